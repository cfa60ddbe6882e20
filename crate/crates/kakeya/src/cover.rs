//! Cover machinery for series with increasing factor counts: the
//! harmonic cutoff, monotone tuple spaces counted by combinations with
//! repetition, cover intervals with exact telescoping lengths, the
//! clipped measure bounds, and the sorted partial-sum landscapes.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::CoverError;
use crate::exec::{filter_map_indices, ExecMode};
use crate::interval::RatInterval;
use crate::rational::{binomial, factorial, Rat};
use crate::series::{tail_closed_form, term_nf};

/// Default cap on landscape/tuple enumeration size.
pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

/// Smallest K with sum_{n=1}^K 1/(n+1) > M, exactly.
pub fn choose_k(m_bound: u64) -> u64 {
    let target = Rat::from_int(m_bound as i64);
    let mut sum = Rat::zero();
    let mut k = 0u64;
    loop {
        k += 1;
        sum += Rat::new(BigInt::one(), BigInt::from(k + 1));
        if sum > target {
            return k;
        }
    }
}

/// |T_{N,m}| = C(N + m - 2, m - 1): nondecreasing (m-1)-tuples with
/// entries in 1..=N. m = 1 counts the single empty tuple.
pub fn tuple_count(n_cap: u64, m: u64) -> BigInt {
    if m == 1 {
        return BigInt::one();
    }
    binomial(n_cap + m - 2, m - 1)
}

/// Visit every nondecreasing (m-1)-tuple with entries in 1..=N in
/// lexicographic order.
pub fn enumerate_tuples<F: FnMut(&[u64])>(n_cap: u64, m: u64, mut visitor: F) {
    let len = (m - 1) as usize;
    let mut tuple = vec![1u64; len];
    if len == 0 {
        visitor(&tuple);
        return;
    }
    loop {
        visitor(&tuple);
        // Next lexicographic nondecreasing tuple.
        let mut pos = len;
        while pos > 0 {
            if tuple[pos - 1] < n_cap {
                tuple[pos - 1] += 1;
                for i in pos..len {
                    tuple[i] = tuple[pos - 1];
                }
                break;
            }
            pos -= 1;
        }
        if pos == 0 {
            return;
        }
    }
}

/// Collected tuples, for small spaces and tests.
pub fn collect_tuples(n_cap: u64, m: u64) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    enumerate_tuples(n_cap, m, |t| out.push(t.to_vec()));
    out
}

/// The interval that must contain every series value whose increasing
/// factor counts start with `tuple` and first exceed N at index m.
#[derive(Clone, Debug)]
pub struct CoverInterval {
    pub n_cap: u64,
    pub m: u64,
    pub tuple: Vec<u64>,
    pub interval: RatInterval,
}

/// Exact interval: left endpoint is the sum of the prefix terms, length
/// is the closed-form tail (1/N) / ((m+1)...(m+N)).
pub fn cover_interval(n_cap: u64, tuple: &[u64]) -> Result<CoverInterval, CoverError> {
    if tuple.windows(2).any(|w| w[0] > w[1])
        || tuple.iter().any(|&t| t == 0 || t > n_cap)
    {
        return Err(CoverError::BadTuple { cap: n_cap });
    }
    let m = tuple.len() as u64 + 1;
    let mut left = Rat::zero();
    for (i, &t) in tuple.iter().enumerate() {
        left += term_nf(i as u64 + 1, t).expect("validated above");
    }
    let length = tail_closed_form(n_cap, m).expect("n_cap >= 1 checked by caller");
    let interval = RatInterval::new(left.clone(), left + length);
    Ok(CoverInterval {
        n_cap,
        m,
        tuple: tuple.to_vec(),
        interval,
    })
}

/// The three bound values for a fixed cap N and box [0, M].
#[derive(Clone, Debug)]
pub struct MeasureBound {
    pub k_cutoff: u64,
    /// Exact sum over 1 <= m <= N of |T_{N,m}| * length(N, m).
    pub exact_sum_small_m: Rat,
    /// Certified upper bound for the clipped sum over m > N.
    pub clipped_bound_large_m: Rat,
    /// 1/N! + 2^N/(N-2)!.
    pub closed_bound: Rat,
}

/// Closed bound 1/N! + 2^N/(N-2)! for N >= 2.
pub fn closed_bound(n_cap: u64) -> Rat {
    Rat::new(BigInt::one(), factorial(n_cap))
        + Rat::new(BigInt::one() << (n_cap as usize), factorial(n_cap - 2))
}

/// Exact small-m sum, checked against 1/N!, plus a certified bound on
/// the clipped large-m sum: only tuples that do not start with K ones
/// can meet [0, M], and each summand is dominated by
/// 2^(N-1)/((N-2)! m^2), whose tail past m0 is below 2^(N-1)/((N-2)! m0).
pub fn cover_measure_bound(n_cap: u64, m_bound: u64) -> Result<MeasureBound, CoverError> {
    let k_cutoff = choose_k(m_bound);
    if n_cap < k_cutoff.max(3) {
        return Err(CoverError::BoundPrecondition {
            n: n_cap,
            k: k_cutoff,
        });
    }

    let mut exact_sum_small_m = Rat::zero();
    for m in 1..=n_cap {
        let count = Rat::from_bigint(tuple_count(n_cap, m));
        let length = tail_closed_form(n_cap, m).expect("n_cap >= 3");
        exact_sum_small_m += count * length;
    }
    let n_fact_inv = Rat::new(BigInt::one(), factorial(n_cap));
    assert!(
        exact_sum_small_m < n_fact_inv,
        "small-m sum must stay below 1/N!"
    );

    // Accumulate the clipped sum for m = N+1 .. m0 exactly, then close
    // with the dominating tail.
    let m0 = n_cap + 512;
    let mut clipped = Rat::zero();
    for m in (n_cap + 1)..=m0 {
        let total = tuple_count(n_cap, m);
        let leading_ones = if m - 1 >= k_cutoff {
            // Tuples starting with K ones are in bijection with
            // T_{N, m-K}: C(m - K + N - 2, N - 1).
            binomial(m - k_cutoff + n_cap - 2, n_cap - 1)
        } else {
            BigInt::zero()
        };
        let surviving = Rat::from_bigint(total - leading_ones);
        let length = tail_closed_form(n_cap, m).expect("n_cap >= 3");
        clipped += surviving * length;
    }
    let tail_majorant = Rat::new(
        BigInt::one() << (n_cap as usize - 1),
        factorial(n_cap - 2) * BigInt::from(m0),
    );
    let clipped_bound_large_m = clipped + tail_majorant;

    Ok(MeasureBound {
        k_cutoff,
        exact_sum_small_m,
        clipped_bound_large_m,
        closed_bound: closed_bound(n_cap),
    })
}

/// Spec for a sorted partial-sum landscape: per-index factor-count
/// ranges, an optional monotone filter, and how many sorted sums to
/// emit.
#[derive(Clone, Debug)]
pub struct LandscapeSpec {
    /// Inclusive (lo, hi) range of f(n) for each of the leading indices.
    pub ranges: Vec<(u64, u64)>,
    pub monotone: bool,
    pub top_count: usize,
}

impl LandscapeSpec {
    /// The two figure configurations shipped with the paper data.
    pub fn figure_free() -> Self {
        LandscapeSpec {
            ranges: vec![
                (1, 5),
                (2, 5),
                (2, 5),
                (3, 5),
                (3, 5),
                (3, 5),
                (3, 5),
            ],
            monotone: false,
            top_count: 3000,
        }
    }

    pub fn figure_monotone() -> Self {
        LandscapeSpec {
            ranges: vec![(1, 8); 7],
            monotone: true,
            top_count: 3000,
        }
    }
}

/// One landscape row: the exact partial sum of the assignment's leading
/// terms and the assignment itself.
pub type LandscapeRow = (Rat, Vec<u64>);

/// Landscape result: all admissible assignments' sums, sorted ascending
/// with lexicographic tie-break, truncated to `top_count`, plus the
/// total admissible count.
#[derive(Clone, Debug)]
pub struct Landscape {
    pub rows: Vec<LandscapeRow>,
    pub total: u64,
}

pub fn landscape(spec: &LandscapeSpec, cap: u128, mode: ExecMode) -> Result<Landscape, CoverError> {
    for (i, &(lo, hi)) in spec.ranges.iter().enumerate() {
        if lo == 0 || lo > hi {
            return Err(CoverError::EmptyRange { index: i });
        }
    }
    let mut raw_total: u128 = 1;
    for &(lo, hi) in &spec.ranges {
        raw_total = raw_total.saturating_mul((hi - lo + 1) as u128);
        if raw_total > cap {
            return Err(CoverError::EnumerationCap {
                needed: raw_total,
                cap,
            });
        }
    }
    let ranges = spec.ranges.clone();
    let monotone = spec.monotone;
    let mut rows: Vec<LandscapeRow> = filter_map_indices(raw_total as u64, mode, |idx| {
        // Mixed-radix decode, most significant digit first, so index
        // order equals lexicographic assignment order.
        let mut rem = idx;
        let mut assignment = vec![0u64; ranges.len()];
        for pos in (0..ranges.len()).rev() {
            let (lo, hi) = ranges[pos];
            let size = hi - lo + 1;
            assignment[pos] = lo + rem % size;
            rem /= size;
        }
        if monotone && assignment.windows(2).any(|w| w[0] > w[1]) {
            return None;
        }
        let mut sum = Rat::zero();
        for (i, &f) in assignment.iter().enumerate() {
            sum += term_nf(i as u64 + 1, f).expect("validated ranges");
        }
        Some((sum, assignment))
    });
    let total = rows.len() as u64;
    rows.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    rows.truncate(spec.top_count);
    Ok(Landscape { rows, total })
}

/// CSV serialization: "rank,sum_decimal,sum_rational,assignment" with
/// 12 decimal digits and a space-separated assignment.
pub fn landscape_csv(landscape: &Landscape) -> String {
    let mut out = String::from("rank,sum_decimal,sum_rational,assignment\n");
    for (rank, (sum, assignment)) in landscape.rows.iter().enumerate() {
        let assignment = assignment
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        out.push_str(&format!(
            "{},{},{},{}\n",
            rank + 1,
            sum.decimal(12),
            sum.to_fraction_string(),
            assignment
        ));
    }
    out
}

/// Independent naive-summation oracle for a landscape: recursive
/// enumeration (no index decoding) and term products computed by
/// explicit integer multiplication.
pub fn landscape_oracle(spec: &LandscapeSpec) -> Vec<LandscapeRow> {
    fn rec(
        ranges: &[(u64, u64)],
        monotone: bool,
        pos: usize,
        prev: u64,
        assignment: &mut Vec<u64>,
        out: &mut Vec<LandscapeRow>,
    ) {
        if pos == ranges.len() {
            let mut sum = Rat::zero();
            for (i, &f) in assignment.iter().enumerate() {
                let n = i as u64 + 1;
                let mut prod = BigInt::one();
                for step in 1..=f {
                    prod *= BigInt::from(n + step);
                }
                sum += Rat::new(BigInt::one(), prod);
            }
            out.push((sum, assignment.clone()));
            return;
        }
        let (lo, hi) = ranges[pos];
        for f in lo..=hi {
            if monotone && f < prev {
                continue;
            }
            assignment.push(f);
            rec(ranges, monotone, pos + 1, f, assignment, out);
            assignment.pop();
        }
    }
    let mut out = Vec::new();
    rec(
        &spec.ranges,
        spec.monotone,
        0,
        0,
        &mut Vec::new(),
        &mut out,
    );
    out.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    out
}

/// Key-value report lines for the measure bound.
pub fn measure_bound_report(n_cap: u64, m_bound: u64, b: &MeasureBound) -> String {
    let mut out = String::new();
    out.push_str(&format!("N={n_cap}\n"));
    out.push_str(&format!("M={m_bound}\n"));
    out.push_str(&format!("K={}\n", b.k_cutoff));
    out.push_str(&format!(
        "small_m_exact={} ({})\n",
        b.exact_sum_small_m.to_fraction_string(),
        b.exact_sum_small_m.decimal(12)
    ));
    out.push_str(&format!(
        "small_m_limit=1/N!={}\n",
        Rat::new(BigInt::one(), factorial(n_cap)).to_fraction_string()
    ));
    out.push_str(&format!(
        "large_m_clipped_bound={} ({})\n",
        b.clipped_bound_large_m.to_fraction_string(),
        b.clipped_bound_large_m.decimal(12)
    ));
    out.push_str(&format!(
        "closed_bound={} ({})\n",
        b.closed_bound.to_fraction_string(),
        b.closed_bound.decimal(12)
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn choose_k_small_cases() {
        // 1/2 + 1/3 + 1/4 = 13/12 > 1 and 1/2 + 1/3 = 5/6 <= 1.
        assert_eq!(choose_k(1), 3);
        // Exact harmonic-sum oracle for M = 2.
        let mut sum = Rat::zero();
        let mut k = 0;
        let expected = loop {
            k += 1;
            sum += Rat::new(BigInt::one(), BigInt::from(k + 1));
            if sum > Rat::from_int(2) {
                break k;
            }
        };
        assert_eq!(choose_k(2), expected);
        // Minimality: one term fewer does not exceed M.
        let k1 = choose_k(1);
        let mut sum = Rat::zero();
        for n in 1..k1 {
            sum += Rat::new(BigInt::one(), BigInt::from(n + 1));
        }
        assert!(sum <= Rat::one());
    }

    #[test]
    fn tuple_count_matches_enumeration() {
        assert_eq!(tuple_count(3, 3), BigInt::from(6));
        assert_eq!(tuple_count(8, 8), BigInt::from(3432));
        assert_eq!(tuple_count(5, 1), BigInt::one());
        for n_cap in 1..=8u64 {
            for m in 1..=8u64 {
                let listed = collect_tuples(n_cap, m);
                assert_eq!(
                    BigInt::from(listed.len() as u64),
                    tuple_count(n_cap, m),
                    "N={n_cap} m={m}"
                );
                // Lexicographic and nondecreasing.
                for w in listed.windows(2) {
                    assert!(w[0] < w[1]);
                }
                for t in &listed {
                    assert!(t.windows(2).all(|w| w[0] <= w[1]));
                }
            }
        }
    }

    #[test]
    fn enumerate_tuples_spec_examples() {
        assert_eq!(
            collect_tuples(2, 3),
            vec![vec![1, 1], vec![1, 2], vec![2, 2]]
        );
        assert_eq!(collect_tuples(5, 1), vec![Vec::<u64>::new()]);
        assert_eq!(collect_tuples(3, 2), vec![vec![1], vec![2], vec![3]]);
    }

    #[test]
    fn cover_interval_cases() {
        let c = cover_interval(1, &[]).unwrap();
        assert_eq!(c.interval, RatInterval::new(Rat::zero(), Rat::ratio(1, 2)));

        let c = cover_interval(2, &[1]).unwrap();
        assert_eq!(c.interval.lo(), &Rat::ratio(1, 2));
        assert_eq!(c.interval.width(), Rat::ratio(1, 24));

        // All tuples of fixed (N, m) share one length.
        let tuples = collect_tuples(3, 4);
        let widths: Vec<Rat> = tuples
            .iter()
            .map(|t| cover_interval(3, t).unwrap().interval.width())
            .collect();
        assert!(widths.windows(2).all(|w| w[0] == w[1]));

        assert!(cover_interval(2, &[2, 1]).is_err());
        assert!(cover_interval(2, &[3]).is_err());
    }

    #[test]
    fn cover_interval_length_matches_brute_force() {
        // Brute-force oracle: sum_{n=m}^{K} 1/((n+1)...(n+N+1)) plus the
        // closed-form remainder equals the claimed length.
        for n_cap in 1..=4u64 {
            for m in 1..=5u64 {
                let mut brute = Rat::zero();
                for n in m..m + 100 {
                    brute += term_nf(n, n_cap + 1).unwrap();
                }
                brute += tail_closed_form(n_cap, m + 100).unwrap();
                assert_eq!(brute, tail_closed_form(n_cap, m).unwrap());
            }
        }
    }

    #[test]
    fn cover_containment_for_sampled_extensions() {
        // Any increasing assignment whose counts stay <= N for the first
        // m-1 indices and exceed N afterwards lands inside the tuple's
        // cover interval.
        let n_cap = 4u64;
        for tuple in collect_tuples(n_cap, 4) {
            let c = cover_interval(n_cap, &tuple).unwrap();
            let mut prefix = Rat::zero();
            for (i, &t) in tuple.iter().enumerate() {
                prefix += term_nf(i as u64 + 1, t).unwrap();
            }
            // Sample extensions: f(n) = N + 1 + shift for n >= m.
            for shift in 0..3u64 {
                let mut value = prefix.clone();
                for n in 4..200u64 {
                    value += term_nf(n, n_cap + 1 + shift).unwrap();
                }
                // The dropped remainder is positive, so `value` is a
                // lower fragment of the true sum; the true sum is below
                // prefix + tail_closed_form at the minimal extension.
                assert!(c.interval.contains(&value));
            }
        }
    }

    #[test]
    fn clipping_pushes_leading_one_tuples_past_m() {
        let m_bound = 1u64;
        let k = choose_k(m_bound);
        let n_cap = 5u64;
        // Tuples with t_1 = ... = t_K = 1 and m - 1 >= K.
        for extra in 0..3u64 {
            let m = k + 1 + extra;
            let mut tuple = vec![1u64; k as usize];
            tuple.extend(std::iter::repeat(2).take(extra as usize));
            assert_eq!(tuple.len() as u64, m - 1);
            let c = cover_interval(n_cap, &tuple).unwrap();
            assert!(c.interval.lo() > &Rat::from_int(m_bound as i64));
        }
    }

    #[test]
    fn small_m_inequality_by_exhaustive_enumeration() {
        for n_cap in 3..=9u64 {
            let mut total = Rat::zero();
            for m in 1..=n_cap {
                let mut count = 0u64;
                enumerate_tuples(n_cap, m, |_| count += 1);
                total += Rat::from_int(count as i64)
                    * tail_closed_form(n_cap, m).unwrap();
            }
            assert!(
                total < Rat::new(BigInt::one(), factorial(n_cap)),
                "N={n_cap}"
            );
        }
    }

    #[test]
    fn closed_bound_decreasing_and_small() {
        let b10 = closed_bound(10);
        assert_eq!(
            b10,
            Rat::ratio(1, 3_628_800) + Rat::ratio(1024, 40_320)
        );
        assert!(b10 < Rat::ratio(3, 100));
        for n in 7..40u64 {
            assert!(closed_bound(n + 1) < closed_bound(n), "N={n}");
        }
    }

    #[test]
    fn measure_bound_consistency() {
        let b = cover_measure_bound(10, 1).unwrap();
        assert_eq!(b.k_cutoff, 3);
        assert!(b.exact_sum_small_m < Rat::new(BigInt::one(), factorial(10)));
        // The clipped bound stays below the closed form's large-m part.
        let large_part = Rat::new(BigInt::one() << 10, factorial(8));
        assert!(b.clipped_bound_large_m < large_part);
        assert!(cover_measure_bound(2, 1).is_err());
    }

    #[test]
    fn landscape_figures_counts() {
        let free = landscape(
            &LandscapeSpec::figure_free(),
            DEFAULT_ENUMERATION_CAP,
            ExecMode::Sequential,
        )
        .unwrap();
        assert_eq!(free.total, 6480);
        assert_eq!(free.rows.len(), 3000);

        let mono = landscape(
            &LandscapeSpec::figure_monotone(),
            DEFAULT_ENUMERATION_CAP,
            ExecMode::Sequential,
        )
        .unwrap();
        assert_eq!(mono.total, 3432);
        assert_eq!(mono.rows.len(), 3000);
        for (_, assignment) in &mono.rows {
            assert!(assignment.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn landscape_single_term() {
        let spec = LandscapeSpec {
            ranges: vec![(1, 1)],
            monotone: false,
            top_count: 1,
        };
        let l = landscape(&spec, DEFAULT_ENUMERATION_CAP, ExecMode::Sequential).unwrap();
        assert_eq!(l.rows, vec![(Rat::ratio(1, 2), vec![1])]);
    }

    #[test]
    fn landscape_matches_oracle() {
        let spec = LandscapeSpec {
            ranges: vec![(1, 4), (2, 4), (2, 4), (3, 4)],
            monotone: false,
            top_count: usize::MAX,
        };
        let fast = landscape(&spec, DEFAULT_ENUMERATION_CAP, ExecMode::Sequential).unwrap();
        let oracle = landscape_oracle(&spec);
        assert_eq!(fast.rows, oracle);

        let spec = LandscapeSpec {
            ranges: vec![(1, 5); 5],
            monotone: true,
            top_count: usize::MAX,
        };
        let fast = landscape(&spec, DEFAULT_ENUMERATION_CAP, ExecMode::Sequential).unwrap();
        assert_eq!(fast.rows, landscape_oracle(&spec));
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn landscape_parallel_matches_sequential() {
        let spec = LandscapeSpec::figure_monotone();
        let a = landscape(&spec, DEFAULT_ENUMERATION_CAP, ExecMode::Sequential).unwrap();
        let b = landscape(&spec, DEFAULT_ENUMERATION_CAP, ExecMode::Parallel).unwrap();
        assert_eq!(landscape_csv(&a), landscape_csv(&b));
    }

    #[test]
    fn landscape_cap_and_empty_range() {
        let spec = LandscapeSpec {
            ranges: vec![(1, 100); 8],
            monotone: false,
            top_count: 10,
        };
        assert!(matches!(
            landscape(&spec, 1000, ExecMode::Sequential),
            Err(CoverError::EnumerationCap { .. })
        ));
        let spec = LandscapeSpec {
            ranges: vec![(3, 2)],
            monotone: false,
            top_count: 10,
        };
        assert!(matches!(
            landscape(&spec, 1000, ExecMode::Sequential),
            Err(CoverError::EmptyRange { index: 0 })
        ));
    }
}
