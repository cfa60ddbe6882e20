//! Achievement sets of series with finite choice sets per index:
//! classification by tail-dominance conditions, the greedy
//! representation of targets, finite truncation covers, and the
//! product-count measure formula.

use num_bigint::BigInt;
use num_traits::One;

use crate::error::AchievementError;
use crate::exec::{map_indices, ExecMode};
use crate::interval::{merge_intervals, RatInterval};
use crate::rational::Rat;

/// Default cap on the number of tuples a truncation cover may enumerate.
pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

/// A finite set of nonnegative values available at one series index;
/// strictly ascending, at least two elements.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ChoiceSet {
    elements: Vec<Rat>,
}

impl ChoiceSet {
    pub fn new(elements: Vec<Rat>) -> Result<Self, AchievementError> {
        Self::new_at(elements, 0)
    }

    pub fn new_at(elements: Vec<Rat>, index: usize) -> Result<Self, AchievementError> {
        if elements.len() < 2 {
            return Err(AchievementError::TooFewElements { index });
        }
        if elements[0].is_negative()
            || elements.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(AchievementError::NotAscending { index });
        }
        Ok(ChoiceSet { elements })
    }

    /// `{0, x}` for a positive x.
    pub fn binary(x: Rat) -> Self {
        ChoiceSet {
            elements: vec![Rat::zero(), x],
        }
    }

    pub fn elements(&self) -> &[Rat] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min(&self) -> &Rat {
        &self.elements[0]
    }

    pub fn max(&self) -> &Rat {
        self.elements.last().unwrap()
    }

    pub fn summary(&self) -> ChoiceSetSummary {
        let gaps: Vec<Rat> = self
            .elements
            .windows(2)
            .map(|w| &w[1] - &w[0])
            .collect();
        let delta_max = gaps.iter().cloned().reduce(Rat::max).unwrap();
        let delta_min = gaps.into_iter().reduce(Rat::min).unwrap();
        ChoiceSetSummary {
            min: self.min().clone(),
            max: self.max().clone(),
            delta_max,
            delta_min,
        }
    }
}

/// Per-index summary: extremes and the largest/smallest gap lengths
/// into which the set subdivides its span.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ChoiceSetSummary {
    pub min: Rat,
    pub max: Rat,
    pub delta_max: Rat,
    pub delta_min: Rat,
}

/// Certified enclosures of the three tail series past index n:
/// r_n = sum of spans, a_n = sum of minima, b_n = sum of maxima.
#[derive(Clone, Debug)]
pub struct TailSpans {
    pub r: RatInterval,
    pub a: RatInterval,
    pub b: RatInterval,
}

/// Family-level guarantee that a tail condition holds for every index
/// at or past `from`. Supplied by the series family's constructor,
/// which owns the closed-form argument; finite enclosure checks alone
/// cannot certify an "all sufficiently large n" hypothesis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailCert {
    /// r_n >= Delta_n for all n >= .0
    Cond1From(usize),
    /// r_n < delta_n for all n >= .0
    Cond2From(usize),
}

type TailFn = Box<dyn Fn(usize) -> TailSpans + Send + Sync>;

impl std::fmt::Debug for ChoiceSeq {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChoiceSeq")
            .field("prefix_len", &self.sets.len())
            .field("cert", &self.cert)
            .finish_non_exhaustive()
    }
}

/// A sequence of choice sets: a materialized finite prefix plus
/// certified tail enclosures for every cut at or before the prefix end.
pub struct ChoiceSeq {
    sets: Vec<ChoiceSet>,
    tails: TailFn,
    cert: Option<TailCert>,
}

impl ChoiceSeq {
    pub fn new(sets: Vec<ChoiceSet>, tails: TailFn, cert: Option<TailCert>) -> Self {
        ChoiceSeq { sets, tails, cert }
    }

    pub fn from_raw(
        raw: Vec<Vec<Rat>>,
        tails: TailFn,
        cert: Option<TailCert>,
    ) -> Result<Self, AchievementError> {
        let sets = raw
            .into_iter()
            .enumerate()
            .map(|(i, elems)| ChoiceSet::new_at(elems, i + 1))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ChoiceSeq { sets, tails, cert })
    }

    pub fn prefix_len(&self) -> usize {
        self.sets.len()
    }

    /// 1-based set accessor.
    pub fn set(&self, n: usize) -> &ChoiceSet {
        &self.sets[n - 1]
    }

    pub fn sets(&self) -> &[ChoiceSet] {
        &self.sets
    }

    /// Tail spans past index n (n = 0 gives the full-series spans).
    pub fn tail(&self, n: usize) -> TailSpans {
        (self.tails)(n)
    }

    pub fn cert(&self) -> Option<TailCert> {
        self.cert
    }

    /// eq. interval [sum min X_n, sum max X_n] as an outer enclosure.
    pub fn full_span_outer(&self) -> RatInterval {
        let t = self.tail(0);
        RatInterval::new(t.a.lo().clone(), t.b.hi().clone())
    }

    /// Same interval by inner (certainly-achievable) bounds.
    pub fn full_span_inner(&self) -> Option<RatInterval> {
        let t = self.tail(0);
        if t.a.hi() <= t.b.lo() {
            Some(RatInterval::new(t.a.hi().clone(), t.b.lo().clone()))
        } else {
            None
        }
    }
}

/// Exact per-index summaries of the materialized prefix.
pub fn summarize(seq: &ChoiceSeq) -> Vec<ChoiceSetSummary> {
    seq.sets().iter().map(ChoiceSet::summary).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Classification {
    /// Tail dominance holds from index 1: the achievement set is the
    /// single interval [sum min X_n, sum max X_n].
    SingleInterval(RatInterval),
    /// Tail dominance holds from `from_index` on: finite union of
    /// nondegenerate closed intervals.
    IntervalUnion { from_index: usize },
    /// The reversed condition holds from `from_index` on: closed set
    /// with empty interior.
    EmptyInterior { from_index: usize },
    /// Enclosures too wide, or no asymptotic certificate to extend a
    /// finite check: never a guess.
    Indeterminate,
}

/// Classify the achievement set of `seq` by checking the certified tail
/// conditions up to `horizon` and extending past it only through the
/// family's asymptotic certificate.
pub fn classify(seq: &ChoiceSeq, horizon: usize) -> Classification {
    let h = horizon.min(seq.prefix_len());
    if h == 0 {
        return Classification::Indeterminate;
    }
    match seq.cert() {
        Some(TailCert::Cond1From(c)) if c <= h + 1 => {
            // Certified for n >= c; bridge downward with enclosure checks.
            let mut from = c.max(1);
            while from > 1 {
                let n = from - 1;
                let summary = seq.set(n).summary();
                if seq.tail(n).r.lo() >= &summary.delta_max {
                    from = n;
                } else {
                    break;
                }
            }
            if from == 1 {
                Classification::SingleInterval(seq.full_span_outer())
            } else {
                Classification::IntervalUnion { from_index: from }
            }
        }
        Some(TailCert::Cond2From(c)) if c <= h + 1 => {
            let mut from = c.max(1);
            while from > 1 {
                let n = from - 1;
                let summary = seq.set(n).summary();
                if seq.tail(n).r.hi() < &summary.delta_min {
                    from = n;
                } else {
                    break;
                }
            }
            Classification::EmptyInterior { from_index: from }
        }
        _ => Classification::Indeterminate,
    }
}

/// Checks that the dominance condition is certified at every index in
/// `from..` (bridged to the asymptotic certificate).
fn cond1_established(seq: &ChoiceSeq, from_index: usize) -> bool {
    let c = match seq.cert() {
        Some(TailCert::Cond1From(c)) => c,
        _ => return false,
    };
    if c > seq.prefix_len() + 1 {
        return false;
    }
    (from_index..c).all(|n| {
        let summary = seq.set(n).summary();
        seq.tail(n).r.lo() >= &summary.delta_max
    })
}

/// The merged finite interval union when tail dominance holds from
/// `from_index`: the exact sumset of the first `from_index - 1` sets,
/// each translated by the tail interval past that cut (inner bounds of
/// the certified enclosures, so every reported point is achieved).
pub fn interval_union(
    seq: &ChoiceSeq,
    from_index: usize,
) -> Result<Vec<RatInterval>, AchievementError> {
    if from_index == 0 || !cond1_established(seq, from_index) {
        return Err(AchievementError::PreconditionNotEstablished(format!(
            "tail dominance not certified from index {from_index}"
        )));
    }
    let m = from_index - 1;
    let t = seq.tail(m);
    let segment = RatInterval::new(t.a.hi().clone(), t.b.lo().clone());
    let mut sums = vec![Rat::zero()];
    for n in 1..=m {
        let mut next = Vec::with_capacity(sums.len() * seq.set(n).len());
        for s in &sums {
            for e in seq.set(n).elements() {
                next.push(s + e);
            }
        }
        sums = next;
    }
    Ok(merge_intervals(
        sums.into_iter().map(|s| segment.translate(&s)).collect(),
    ))
}

/// One greedy step: the smallest element y of `choices` such that
/// `target_residual - y` lies in `next_span`.
pub fn greedy_step(
    target_residual: &Rat,
    choices: &ChoiceSet,
    next_span: &RatInterval,
) -> Result<Rat, AchievementError> {
    for y in choices.elements() {
        let next = target_residual - y;
        if next_span.contains(&next) {
            return Ok(y.clone());
        }
    }
    Err(AchievementError::NoFeasibleChoice {
        index: 0,
        residual: target_residual.to_fraction_string(),
    })
}

/// Greedy representation of `target` to `depth` choices. Returns the
/// chosen elements and a certified enclosure of the residual
/// `target - sum(choices)`.
pub fn greedy_represent(
    target: &Rat,
    seq: &ChoiceSeq,
    depth: usize,
) -> Result<(Vec<Rat>, RatInterval), AchievementError> {
    if depth > seq.prefix_len() {
        return Err(AchievementError::DepthBeyondPrefix {
            depth,
            len: seq.prefix_len(),
        });
    }
    let full = seq
        .full_span_inner()
        .ok_or_else(|| AchievementError::PreconditionNotEstablished(
            "full-span enclosures too wide to admit any target".into(),
        ))?;
    if !full.contains(target) {
        let outer = seq.full_span_outer();
        return Err(AchievementError::TargetOutOfRange {
            target: target.to_fraction_string(),
            lo: outer.lo().to_fraction_string(),
            hi: outer.hi().to_fraction_string(),
        });
    }
    let mut residual = target.clone();
    let mut choices = Vec::with_capacity(depth);
    for n in 1..=depth {
        let t = seq.tail(n);
        // Inner span: containment certified for the true tail interval.
        if t.a.hi() > t.b.lo() {
            return Err(AchievementError::PreconditionNotEstablished(format!(
                "tail enclosure past index {n} too wide for a certified step"
            )));
        }
        let span = RatInterval::new(t.a.hi().clone(), t.b.lo().clone());
        let y = greedy_step(&residual, seq.set(n), &span).map_err(|e| match e {
            AchievementError::NoFeasibleChoice { residual, .. } => {
                AchievementError::NoFeasibleChoice { index: n, residual }
            }
            other => other,
        })?;
        residual -= &y;
        choices.push(y);
    }
    let t = seq.tail(depth);
    Ok((
        choices,
        RatInterval::new(t.a.lo().clone(), t.b.hi().clone()),
    ))
}

/// One enumerated tuple of the depth-N cover together with its interval.
#[derive(Clone, Debug)]
pub struct CoverEntry {
    pub choices: Vec<Rat>,
    pub interval: RatInterval,
}

/// All tuple intervals at a fixed truncation depth, in lexicographic
/// tuple order, plus whether they are pairwise disjoint.
#[derive(Clone, Debug)]
pub struct TruncationCover {
    pub depth: usize,
    pub entries: Vec<CoverEntry>,
    pub disjoint: bool,
}

impl TruncationCover {
    /// CSV rows "tuple;lo;hi" with the tuple space-separated.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let tuple = e
                .choices
                .iter()
                .map(Rat::to_fraction_string)
                .collect::<Vec<_>>()
                .join(" ");
            out.push_str(&format!(
                "{};{};{}\n",
                tuple,
                e.interval.lo(),
                e.interval.hi()
            ));
        }
        out
    }
}

/// Enumerate every choice tuple of the first `depth` sets and its
/// interval (tuple sum plus the outer tail enclosure past `depth`).
pub fn truncation_cover(
    seq: &ChoiceSeq,
    depth: usize,
    cap: u128,
    mode: ExecMode,
) -> Result<TruncationCover, AchievementError> {
    if depth > seq.prefix_len() {
        return Err(AchievementError::DepthBeyondPrefix {
            depth,
            len: seq.prefix_len(),
        });
    }
    let mut total: u128 = 1;
    for n in 1..=depth {
        total = total.saturating_mul(seq.set(n).len() as u128);
        if total > cap {
            return Err(AchievementError::EnumerationCap { needed: total, cap });
        }
    }
    let t = seq.tail(depth);
    let tail_outer = RatInterval::new(t.a.lo().clone(), t.b.hi().clone());

    // Mixed-radix decode with X_1 most significant keeps index order
    // equal to lexicographic tuple order.
    let radices: Vec<usize> = (1..=depth).map(|n| seq.set(n).len()).collect();
    let entries = map_indices(total as u64, mode, |idx| {
        let mut rem = idx as usize;
        let mut digits = vec![0usize; depth];
        for pos in (0..depth).rev() {
            digits[pos] = rem % radices[pos];
            rem /= radices[pos];
        }
        let mut sum = Rat::zero();
        let mut choices = Vec::with_capacity(depth);
        for (pos, &d) in digits.iter().enumerate() {
            let e = &seq.set(pos + 1).elements()[d];
            sum += e;
            choices.push(e.clone());
        }
        CoverEntry {
            interval: tail_outer.translate(&sum),
            choices,
        }
    });

    let mut sorted: Vec<&RatInterval> = entries.iter().map(|e| &e.interval).collect();
    sorted.sort_by(|a, b| a.lo().cmp(b.lo()).then_with(|| a.hi().cmp(b.hi())));
    let disjoint = sorted.windows(2).all(|w| w[0].hi() < w[1].lo());

    Ok(TruncationCover {
        depth,
        entries,
        disjoint,
    })
}

/// Certified enclosure of |X_1|...|X_depth| * r_depth, the depth-level
/// value of the measure formula. Requires the separation condition
/// r_n < delta_n certified for every n <= depth.
pub fn measure_limit_enclosure(
    seq: &ChoiceSeq,
    depth: usize,
) -> Result<RatInterval, AchievementError> {
    if depth > seq.prefix_len() {
        return Err(AchievementError::DepthBeyondPrefix {
            depth,
            len: seq.prefix_len(),
        });
    }
    let mut count = BigInt::one();
    for n in 1..=depth {
        let summary = seq.set(n).summary();
        if !(seq.tail(n).r.hi() < &summary.delta_min) {
            return Err(AchievementError::Cond2NotCertified { index: n });
        }
        count *= BigInt::from(seq.set(n).len() as u64);
    }
    Ok(seq.tail(depth).r.scale(&Rat::from_bigint(count)))
}
