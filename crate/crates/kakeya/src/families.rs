//! Built-in series families with exact or certified tail enclosures and
//! the closed-form asymptotic certificates that let `classify` extend
//! finite checks to all large indices.

use num_bigint::BigInt;
use num_traits::One;

use crate::achievement::{ChoiceSeq, ChoiceSet, TailCert, TailSpans};
use crate::error::AchievementError;
use crate::interval::RatInterval;
use crate::rational::Rat;
use crate::stages;

fn rat_pow(base: &Rat, exp: usize) -> Rat {
    let mut acc = Rat::one();
    for _ in 0..exp {
        acc = acc * base;
    }
    acc
}

/// X_n = {0, r^n} for a rational ratio 0 < r < 1. Tails are exact
/// geometric closed forms; the certificate comes from the scale-free
/// identity r_n / Delta_n = r/(1-r), so the dominance condition holds at
/// every index iff r >= 1/2 and its reverse holds at every index iff
/// r < 1/2.
pub fn geometric(ratio: Rat, prefix_len: usize) -> Result<ChoiceSeq, AchievementError> {
    if !ratio.is_positive() || ratio >= Rat::one() {
        return Err(AchievementError::PreconditionNotEstablished(
            "geometric ratio must satisfy 0 < r < 1".into(),
        ));
    }
    let cert = if ratio >= Rat::ratio(1, 2) {
        TailCert::Cond1From(1)
    } else {
        TailCert::Cond2From(1)
    };
    Ok(geometric_inner(ratio, prefix_len, Some(cert)))
}

/// Same sets as [`geometric`] but with no asymptotic certificate;
/// classification must report Indeterminate.
pub fn geometric_uncertified(ratio: Rat, prefix_len: usize) -> ChoiceSeq {
    geometric_inner(ratio, prefix_len, None)
}

fn geometric_inner(ratio: Rat, prefix_len: usize, cert: Option<TailCert>) -> ChoiceSeq {
    let sets = (1..=prefix_len)
        .map(|n| ChoiceSet::binary(rat_pow(&ratio, n)))
        .collect();
    let tails = {
        let ratio = ratio.clone();
        move |n: usize| {
            // sum_{k>n} r^k = r^(n+1) / (1 - r), exactly.
            let tail = rat_pow(&ratio, n + 1) / (Rat::one() - &ratio);
            TailSpans {
                r: RatInterval::point(tail.clone()),
                a: RatInterval::point(Rat::zero()),
                b: RatInterval::point(tail),
            }
        }
    };
    ChoiceSeq::new(sets, Box::new(tails), cert)
}

/// x_n = 1/3^n: the middle-thirds construction, measure zero.
pub fn triadic(prefix_len: usize) -> ChoiceSeq {
    geometric(Rat::ratio(1, 3), prefix_len).expect("1/3 is a valid ratio")
}

/// x_n = 1/(2^n - 1): empty interior but positive measure. Tails are
/// enclosed by exact leading terms plus the geometric bracket
/// 2^-k <= 1/(2^k - 1) <= 2^(1-k) on the remainder. The separation
/// certificate is the termwise comparison
/// 1/(2^k - 1) < 2^(n-k)/(2^n - 1) for k > n, which sums to r_n < x_n.
pub fn fat_cantor(prefix_len: usize) -> ChoiceSeq {
    let x = |n: usize| {
        Rat::new(
            BigInt::one(),
            (BigInt::one() << n) - BigInt::one(),
        )
    };
    let sets = (1..=prefix_len).map(|n| ChoiceSet::binary(x(n))).collect();
    let tails = move |n: usize| {
        let exact_terms = 64.max(n + 16);
        let mut head = Rat::zero();
        for k in (n + 1)..=(n + exact_terms) {
            head += x(k);
        }
        // Remainder from k0 = n + exact_terms + 1 on.
        let k0 = n + exact_terms + 1;
        let rem_lo = Rat::pow2_neg(k0 as u32 - 1); // sum 2^-k
        let rem_hi = Rat::pow2_neg(k0 as u32 - 2); // sum 2^(1-k)
        let tail = RatInterval::new(&head + rem_lo, head + rem_hi);
        TailSpans {
            r: tail.clone(),
            a: RatInterval::point(Rat::zero()),
            b: tail,
        }
    };
    // Runtime spot-check of the separation inequality with enclosures.
    let seq = ChoiceSeq::new(
        sets,
        Box::new(tails),
        Some(TailCert::Cond2From(1)),
    );
    for n in 1..=prefix_len.min(8) {
        debug_assert!(seq.tail(n).r.hi() < &x(n));
    }
    seq
}

/// Prefix sets given explicitly, then X_n = {0, scale * ratio^(n-1)} for
/// n past the prefix. Used for interval-union examples where a large
/// head set sits in front of a dense geometric tail.
pub fn scaled_geometric_with_head(
    head: Vec<Vec<Rat>>,
    scale: Rat,
    ratio: Rat,
    prefix_len: usize,
) -> Result<ChoiceSeq, AchievementError> {
    assert!(ratio.is_positive() && ratio < Rat::one());
    let head_len = head.len();
    let mut raw = head;
    for n in (head_len + 1)..=prefix_len {
        raw.push(vec![Rat::zero(), &scale * &rat_pow(&ratio, n - 1)]);
    }
    let head_sets: Vec<Vec<Rat>> = raw[..head_len].to_vec();
    let cert = if ratio >= Rat::ratio(1, 2) {
        Some(TailCert::Cond1From(head_len + 1))
    } else {
        None
    };
    let tails = move |n: usize| {
        let mut min_sum = Rat::zero();
        let mut max_sum = Rat::zero();
        for set in head_sets.iter().skip(n) {
            min_sum += set.first().unwrap();
            max_sum += set.last().unwrap();
        }
        // Geometric part past max(n, head_len).
        let from = n.max(head_len);
        let geo = &scale * rat_pow(&ratio, from) / (Rat::one() - &ratio);
        let span = (&max_sum + &geo) - &min_sum;
        TailSpans {
            r: RatInterval::point(span),
            a: RatInterval::point(min_sum),
            b: RatInterval::point(max_sum + geo),
        }
    };
    ChoiceSeq::from_raw(raw, Box::new(tails), cert)
}

/// X_k = {0, t_j(k)} for the stage-j series with constant factor count
/// j. Tail enclosures come from the certified stage tail; the
/// certificate start is the stage's dominance threshold.
pub fn eg_stage(j: u32, prefix_len: usize) -> Result<ChoiceSeq, AchievementError> {
    if j < 2 {
        return Err(AchievementError::PreconditionNotEstablished(
            "stage families need j >= 2; the j = 1 series diverges".into(),
        ));
    }
    let (threshold, _) = stages::kak1_threshold(j).map_err(|e| {
        AchievementError::PreconditionNotEstablished(e.to_string())
    })?;
    let sets = (1..=prefix_len)
        .map(|k| ChoiceSet::binary(stages::stage_term(j, &BigInt::from(k as u64))))
        .collect();
    let tails = move |n: usize| {
        let tail = stages::stage_tail_enclosure(j, n as u64 + 1)
            .expect("j >= 2 is checked at construction");
        TailSpans {
            r: tail.clone(),
            a: RatInterval::point(Rat::zero()),
            b: tail,
        }
    };
    Ok(ChoiceSeq::new(
        sets,
        Box::new(tails),
        Some(TailCert::Cond1From(threshold as usize)),
    ))
}
