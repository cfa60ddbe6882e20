//! Series terms 1/((n+1)(n+2)...(n+f)), closed-form tails, and exact
//! identities that back the rest of the crate.

use num_bigint::BigInt;
use num_traits::One;

use crate::error::SeriesError;
use crate::interval::RatInterval;
use crate::rational::{binomial, factorial, Rat};

/// One series term: index `n` with factor count `f`, denoting
/// 1/((n+1)(n+2)...(n+f)).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct TermSpec {
    pub n: u64,
    pub f: u64,
}

impl TermSpec {
    pub fn new(n: u64, f: u64) -> Result<Self, SeriesError> {
        if n == 0 || f == 0 {
            return Err(SeriesError::DomainZero { n, f });
        }
        Ok(TermSpec { n, f })
    }
}

/// (n+1)(n+2)...(n+f) = (n+f)!/n!, exactly.
pub fn rising_product(n: u64, f: u64) -> Result<BigInt, SeriesError> {
    if n == 0 || f == 0 {
        return Err(SeriesError::DomainZero { n, f });
    }
    Ok(rising_product_big(&BigInt::from(n), f))
}

/// Same product for an arbitrary-precision base index.
pub fn rising_product_big(n: &BigInt, f: u64) -> BigInt {
    let mut result = BigInt::one();
    for i in 1..=f {
        result *= n + BigInt::from(i);
    }
    result
}

/// 1/((n+1)...(n+f)) in lowest terms.
pub fn term(spec: TermSpec) -> Rat {
    Rat::new(
        BigInt::one(),
        rising_product_big(&BigInt::from(spec.n), spec.f),
    )
}

/// Convenience wrapper validating (n, f) on the fly.
pub fn term_nf(n: u64, f: u64) -> Result<Rat, SeriesError> {
    Ok(term(TermSpec::new(n, f)?))
}

/// Term with an arbitrary-precision index.
pub fn term_big(n: &BigInt, f: u64) -> Rat {
    Rat::new(BigInt::one(), rising_product_big(n, f))
}

/// Closed form for the tail sum_{n=m}^inf 1/((n+1)...(n+N+1)),
/// which telescopes to (1/N) * 1/((m+1)...(m+N)).
pub fn tail_closed_form(n_cap: u64, m: u64) -> Result<Rat, SeriesError> {
    if n_cap == 0 {
        return Err(SeriesError::TailDegenerate);
    }
    if m == 0 {
        return Err(SeriesError::DomainZero { n: m, f: n_cap });
    }
    Ok(tail_closed_form_big(n_cap, &BigInt::from(m)))
}

pub fn tail_closed_form_big(n_cap: u64, m: &BigInt) -> Rat {
    Rat::new(BigInt::one(), BigInt::from(n_cap) * rising_product_big(m, n_cap))
}

/// Both sides of the exact identity
/// int_0^{1/2} (1/4 - t^2)^{n-1}/(n-1)! dt = 1/((n+1)...(n+2n)),
/// evaluated by binomial expansion and term-wise polynomial integration
/// on the left and directly on the right.
pub fn integral_term_check(n: u64) -> Result<(Rat, Rat), SeriesError> {
    if n == 0 {
        return Err(SeriesError::DomainZero { n, f: 1 });
    }
    let quarter = Rat::ratio(1, 4);
    let half = Rat::ratio(1, 2);
    let mut integral = Rat::zero();
    // (1/4 - t^2)^(n-1) = sum_k C(n-1,k) (1/4)^(n-1-k) (-1)^k t^(2k)
    for k in 0..n {
        let coeff = Rat::from_bigint(binomial(n - 1, k));
        let mut quarter_pow = Rat::one();
        for _ in 0..(n - 1 - k) {
            quarter_pow = quarter_pow * &quarter;
        }
        let mut half_pow = half.clone(); // (1/2)^(2k+1)
        for _ in 0..(2 * k) {
            half_pow = half_pow * &half;
        }
        let piece = coeff * quarter_pow * half_pow * Rat::new(BigInt::one(), BigInt::from(2 * k + 1));
        if k % 2 == 0 {
            integral += piece;
        } else {
            integral -= piece;
        }
    }
    let lhs = integral / Rat::from_bigint(factorial(n - 1));
    let rhs = term(TermSpec { n, f: n });
    Ok((lhs, rhs))
}

/// Certified enclosure of sum_{n=1}^inf 1/((n+1)...(n+n)) after summing
/// `terms` exact leading terms. The remainder is bounded by twice the
/// next term: the ratio of consecutive terms is
/// (n+1)/((2n+1)(2n+2)) which is checked to be < 1/2 at the truncation
/// point, so the remainder is dominated by a geometric series.
pub fn special_series_enclosure(terms: u64) -> Result<RatInterval, SeriesError> {
    if terms == 0 {
        return Err(SeriesError::DomainZero { n: 0, f: 0 });
    }
    let mut partial = Rat::zero();
    for n in 1..=terms {
        partial += term(TermSpec::new(n, n)?);
    }
    let next = term(TermSpec::new(terms + 1, terms + 1)?);
    // Exact runtime check of the domination ratio at the cut.
    let ratio = term(TermSpec::new(terms + 2, terms + 2)?) / next.clone();
    assert!(
        ratio < Rat::ratio(1, 2),
        "term ratio must be below 1/2 at the truncation point"
    );
    let remainder_hi = Rat::from_int(2) * next;
    Ok(RatInterval::new(partial.clone(), partial + remainder_hi))
}
