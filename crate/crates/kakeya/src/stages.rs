//! Stage series indexed by S_j = 2^(j-1) * (odd numbers): elements,
//! constant-factor-count terms, certified tail enclosures, and the
//! threshold from which the tail-dominance condition holds.

use num_bigint::BigInt;
use num_traits::One;

use crate::error::SeriesError;
use crate::interval::RatInterval;
use crate::rational::Rat;
use crate::series::{tail_closed_form_big, term_big};

/// Default number of exact leading terms folded into a tail enclosure.
pub const DEFAULT_EXACT_TERMS: u64 = 64;

/// k-th element of S_j (1-based): 2^(j-1) * (2k - 1).
pub fn stage_element(j: u32, k: &BigInt) -> BigInt {
    (BigInt::from(2) * k - BigInt::one()) << ((j - 1) as usize)
}

pub fn stage_element_u64(j: u32, k: u64) -> u64 {
    (2 * k - 1) << (j - 1)
}

/// First `count` elements of S_j in ascending order.
pub fn stage_index_set(j: u32, count: u64) -> Vec<u64> {
    (1..=count).map(|k| stage_element_u64(j, k)).collect()
}

/// Membership: n belongs to S_j iff the 2-adic valuation of n is j-1.
pub fn stage_of(n: u64) -> u32 {
    crate::rational::two_adic_valuation(n) + 1
}

/// The k-th term of the stage-j series with constant factor count j.
pub fn stage_term(j: u32, k: &BigInt) -> Rat {
    term_big(&stage_element(j, k), j as u64)
}

/// Certified enclosure of sum_{k >= k_start} 1/prod_{i=1..j}(2^(j-1)(2k-1)+i).
///
/// Both bounds fold in `exact_terms` exact leading terms. The remainder
/// beyond them is bracketed by
///   lo: 2^(-j^2) * k0^(1-j) / (j-1)        (integral comparison below the terms)
///   hi: the smaller of (a) the full-index tail starting at the smallest
///       remaining element, and (b) first remaining term plus an
///       integral comparison above the terms.
pub fn stage_tail_enclosure_with(
    j: u32,
    k_start: u64,
    exact_terms: u64,
) -> Result<RatInterval, SeriesError> {
    if j < 2 {
        return Err(SeriesError::StageTailDivergent);
    }
    if k_start == 0 {
        return Err(SeriesError::DomainZero { n: 0, f: j as u64 });
    }
    let mut head = Rat::zero();
    for k in k_start..k_start + exact_terms {
        head += stage_term(j, &BigInt::from(k));
    }
    let k0 = BigInt::from(k_start + exact_terms);

    // Remainder lower bound: terms dominate 1/(2^j k)^j, and the sum of
    // those from k0 on dominates the integral of t^(-j) from k0.
    let pow2_jsq = Rat::new(BigInt::one(), BigInt::one() << ((j * j) as usize));
    let mut k0_pow = Rat::one(); // k0^(j-1)
    for _ in 0..(j - 1) {
        k0_pow = k0_pow * Rat::from_bigint(k0.clone());
    }
    let rem_lo = pow2_jsq / (k0_pow * Rat::from_int((j - 1) as i64));

    // Remainder upper bound (a): the stage terms beyond k0 are a
    // subsequence of the full-index terms from the smallest remaining
    // element s0 on, so the closed-form full tail dominates.
    let s0 = stage_element(j, &k0);
    let ub_subseq = tail_closed_form_big(j as u64 - 1, &s0);

    // Remainder upper bound (b): term(k0) plus the integral comparison
    // of the decreasing map k -> 1/(e_k + 1)^j above the terms past k0.
    let e0_plus = &s0 + BigInt::one();
    let mut e0_pow = Rat::one(); // (s0+1)^(j-1)
    for _ in 0..(j - 1) {
        e0_pow = e0_pow * Rat::from_bigint(e0_plus.clone());
    }
    let integral_above = Rat::one()
        / (e0_pow
            * Rat::from_int((j - 1) as i64)
            * Rat::from_bigint(BigInt::one() << (j as usize)));
    let ub_integral = stage_term(j, &k0) + integral_above;

    let rem_hi = ub_subseq.min(ub_integral);
    Ok(RatInterval::new(&head + &rem_lo, head + rem_hi))
}

pub fn stage_tail_enclosure(j: u32, k_start: u64) -> Result<RatInterval, SeriesError> {
    stage_tail_enclosure_with(j, k_start, DEFAULT_EXACT_TERMS)
}

/// Certificate data for the tail-dominance threshold of a stage series.
#[derive(Clone, Debug)]
pub struct Kak1Certificate {
    pub j: u32,
    pub threshold: u64,
    /// Exact instances (k, tail lower bound, k-th term) verified at and
    /// just above the threshold.
    pub instances: Vec<(u64, Rat, Rat)>,
}

/// Smallest index certified so that for every k >= threshold the
/// stage-j tail beyond k dominates the k-th stage term.
///
/// The closed-form threshold comes from the chain
///   tail(>k) >= 2^(-j^2)(k+1)^(1-j)/(j-1) >= (2^(j-1)(2k-1))^(-j) > term(k),
/// whose middle inequality reduces to (2k-1)^j >= 2^j (j-1) (k+1)^(j-1);
/// for k >= 2 we have 2k-1 >= k+1, so 2k-1 >= 2^j (j-1) suffices and the
/// inequality persists for all larger k.
pub fn kak1_threshold(j: u32) -> Result<(u64, Kak1Certificate), SeriesError> {
    let threshold = kak1_threshold_index(j)?;
    let mut instances = Vec::new();
    for k in threshold..threshold + 3 {
        let tail_lo = stage_tail_enclosure(j, k + 1)?.lo().clone();
        let term_k = stage_term(j, &BigInt::from(k));
        assert!(
            tail_lo >= term_k,
            "tail-dominance instance failed at j={j}, k={k}"
        );
        instances.push((k, tail_lo, term_k));
    }
    Ok((
        threshold,
        Kak1Certificate {
            j,
            threshold,
            instances,
        },
    ))
}

/// The closed-form dominance threshold alone, without the certified
/// instance checks; cheap enough for bounding never-built stages.
pub fn kak1_threshold_index(j: u32) -> Result<u64, SeriesError> {
    if j < 2 || j > 57 {
        return Err(SeriesError::StageTailDivergent);
    }
    Ok(2u64.max(((1u64 << j) * (j as u64 - 1) + 2) / 2))
}

/// Certified positive lower bound for the length of the zero-containing
/// segment of the stage-j subsum set: the subsums of the series past the
/// dominance threshold fill the whole interval from 0 up to their total,
/// so that tail is a valid lower bound.
pub fn zero_segment_lower_bound(j: u32) -> Result<Rat, SeriesError> {
    let (threshold, _) = kak1_threshold(j)?;
    Ok(stage_tail_enclosure(j, threshold)?.lo().clone())
}

/// Cheap O(1) upper bound for the stage-j tail from `k_start`, used for
/// bounding never-built stages: first term plus integral comparison.
pub fn stage_tail_cheap_upper(j: u32, k_start: u64) -> Result<Rat, SeriesError> {
    if j < 2 {
        return Err(SeriesError::StageTailDivergent);
    }
    let k0 = BigInt::from(k_start);
    let s0 = stage_element(j, &k0);
    let e0_plus = &s0 + BigInt::one();
    let mut e0_pow = Rat::one();
    for _ in 0..(j - 1) {
        e0_pow = e0_pow * Rat::from_bigint(e0_plus.clone());
    }
    let integral_above = Rat::one()
        / (e0_pow
            * Rat::from_int((j - 1) as i64)
            * Rat::from_bigint(BigInt::one() << (j as usize)));
    Ok(stage_term(j, &k0) + integral_above)
}
