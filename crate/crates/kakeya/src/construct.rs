//! Constructive representation of a target x in [theta, M] as the sum
//! of a series 1/((n+1)...(n+f(n))) with f(n) -> infinity.
//!
//! The positive integers are partitioned into stages S_j = 2^(j-1) *
//! (odd numbers). Stage j contributes a value from an equidistant grid:
//! a greedy subsum of the stage-j series hits the chosen grid point to
//! within theta_j/8, and the rest of the stage gets the uniform rule
//! f(n) = n + j + c with a certified geometric bound on its total. Grid
//! steps satisfy theta_j < eps_{j+1}/4, so each stage's residual is
//! always coverable by the next; everything is tracked as exact
//! rational interval arithmetic, and the emitted certificate can be
//! re-verified independently.

use std::collections::HashSet;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::BuildError;
use crate::interval::RatInterval;
use crate::rational::Rat;
use crate::series::term_nf;
use crate::stages::{
    kak1_threshold, kak1_threshold_index, stage_element_u64, stage_of, stage_tail_cheap_upper,
    zero_segment_lower_bound,
};

/// Cap on greedy scans within one stage.
pub const GREEDY_SCAN_CAP: u64 = 10_000_000;
/// Cap on the number of stages a build may plan.
pub const MAX_STAGES: usize = 24;

/// The box [theta, M] and the target inside it.
#[derive(Clone, Debug)]
pub struct TargetRange {
    pub theta: Rat,
    pub m_bound: Rat,
    pub target: Rat,
}

impl TargetRange {
    pub fn new(theta: Rat, m_bound: Rat, target: Rat) -> Result<Self, BuildError> {
        if !theta.is_positive() || theta >= m_bound {
            return Err(BuildError::InvalidRange);
        }
        if target < theta || target > m_bound {
            return Err(BuildError::TargetOutOfRange {
                target: target.to_fraction_string(),
                theta: theta.to_fraction_string(),
                m: m_bound.to_fraction_string(),
            });
        }
        Ok(TargetRange {
            theta,
            m_bound,
            target,
        })
    }
}

/// Grid data for one stage: step, extent, and start of the dominance
/// region. Stage 1 spans [theta/2, theta/2 + M]; stage j >= 2 spans
/// [0, eps_j].
#[derive(Clone, Debug)]
pub struct StagePlan {
    pub j: u32,
    /// Certified lower bound for the zero-segment length (j >= 2).
    pub eps_prime_lb: Option<Rat>,
    /// Grid extent: M at stage 1, eps_j = min(eps' bound, theta/2^j) after.
    pub eps: Rat,
    /// First grid point: theta/2 at stage 1, zero after.
    pub offset: Rat,
    /// Smallest m with eps/m < eps_next/4.
    pub m: BigInt,
    /// theta_j = eps/m.
    pub theta_step: Rat,
    /// Index in S_j from which tail dominance is certified (1 at stage 1).
    pub kak1_from: u64,
}

impl StagePlan {
    pub fn grid_point(&self, k: &BigInt) -> Rat {
        &self.offset + Rat::from_bigint(k.clone()) * &self.theta_step
    }
}

/// eps_j = min(zero-segment lower bound, theta/2^j) for j >= 2.
pub fn stage_eps(j: u32, theta: &Rat) -> Result<Rat, BuildError> {
    let lb = zero_segment_lower_bound(j)?;
    Ok(lb.min(theta * Rat::pow2_neg(j)))
}

/// Cheap certified upper bound for eps_j of a never-built stage.
pub fn stage_eps_upper(j: u32, theta: &Rat) -> Rat {
    let from_theta = theta * Rat::pow2_neg(j);
    let cheap = if j <= 40 {
        let l = kak1_threshold_index(j).expect("2 <= j <= 40");
        stage_tail_cheap_upper(j, l).expect("j >= 2")
    } else {
        // Full-stage-tail domination: every term is below 2^-(j-1)^2,
        // and the whole stage sum is below 2^-((j-1)^2) / (j-1).
        Rat::pow2_neg((j - 1) * (j - 1)) / Rat::from_int((j - 1) as i64)
    };
    from_theta.min(cheap)
}

/// Certified upper bound for sum_{i >= from} eps_i: a few per-stage
/// cheap bounds plus the closed geometric closure
/// sum_{i >= m} 2^-((i-1)^2)/(i-1) <= 2^(1-(m-1)^2)/(m-1).
pub fn eps_sum_upper(theta: &Rat, from: u32) -> Rat {
    debug_assert!(from >= 2);
    let mut total = Rat::zero();
    for i in from..from + 4 {
        total += stage_eps_upper(i, theta);
    }
    let m = from + 4;
    total + Rat::pow2_neg((m - 1) * (m - 1) - 1) / Rat::from_int((m - 1) as i64)
}

/// Stage plan with the smallest grid making theta_j < eps_next/4.
pub fn stage_plan(j: u32, range: &TargetRange, eps_next: &Rat) -> Result<StagePlan, BuildError> {
    if !eps_next.is_positive() {
        return Err(BuildError::NonPositiveBudget);
    }
    let (eps_prime_lb, eps, offset, kak1_from) = if j == 1 {
        (None, range.m_bound.clone(), &range.theta / Rat::from_int(2), 1)
    } else {
        let lb = zero_segment_lower_bound(j)?;
        let eps = lb.clone().min(&range.theta * Rat::pow2_neg(j));
        let (from, _) = kak1_threshold(j)?;
        (Some(lb), eps, Rat::zero(), from)
    };
    let m = (Rat::from_int(4) * &eps / eps_next).floor_int() + BigInt::one();
    let theta_step = &eps / Rat::from_bigint(m.clone());
    debug_assert!(&theta_step * Rat::from_int(4) < *eps_next);
    Ok(StagePlan {
        j,
        eps_prime_lb,
        eps,
        offset,
        m,
        theta_step,
        kak1_from,
    })
}

/// Greedy subsum of the stage-j series aimed at p: scan S_j ascending
/// (from the dominance threshold when j >= 2), include n while the sum
/// stays at most p, stop once the gap drops below `budget`. Returns the
/// included indices and the exact achieved sum, with
/// 0 <= p - achieved < budget.
pub fn stage_subsum_greedy(
    j: u32,
    p: &Rat,
    budget: &Rat,
) -> Result<(Vec<u64>, Rat), BuildError> {
    if !budget.is_positive() {
        return Err(BuildError::NonPositiveBudget);
    }
    if p.is_negative() {
        return Err(BuildError::InfeasibleStageTarget {
            p: p.to_fraction_string(),
            bound: "0".to_owned(),
        });
    }
    let k_start = if j == 1 {
        1
    } else {
        let bound = zero_segment_lower_bound(j)?;
        if *p > bound {
            return Err(BuildError::InfeasibleStageTarget {
                p: p.to_fraction_string(),
                bound: bound.to_fraction_string(),
            });
        }
        kak1_threshold(j)?.0
    };
    let mut t_set = Vec::new();
    let mut achieved = Rat::zero();
    let mut k = k_start;
    loop {
        let gap = p - &achieved;
        if gap < *budget {
            return Ok((t_set, achieved));
        }
        if k - k_start >= GREEDY_SCAN_CAP {
            return Err(BuildError::GreedyScanCap {
                j,
                cap: GREEDY_SCAN_CAP,
            });
        }
        let n = stage_element_u64(j, k);
        let t = term_nf(n, j as u64).expect("positive index and count");
        if t <= gap {
            achieved += t;
            t_set.push(n);
        }
        k += 1;
    }
}

/// Uniform complement rule f(n) = n + j + shift on S_j minus the
/// excluded indices, with a certified bound on its total series
/// contribution below `budget`.
#[derive(Clone, Debug)]
pub struct ComplementRule {
    pub j: u32,
    pub shift: u64,
    /// Smallest index the rule applies to.
    pub start: u64,
    /// Certified upper bound 2^(1 - start - j - shift) for the total.
    pub bound: Rat,
}

impl ComplementRule {
    pub fn value(&self, n: u64) -> u64 {
        n + self.j as u64 + self.shift
    }
}

/// Every term obeys term(n, n+j+c) <= 2^-(n+j+c) (each of the n+j+c
/// factors is at least 2), so the complement total is below
/// sum_{n >= start} 2^-(n+j+c) = 2^(1-start-j-c); take the smallest
/// shift c that pushes this under `budget`.
pub fn complement_fill(j: u32, excluded: &[u64], budget: &Rat) -> ComplementRule {
    assert!(budget.is_positive(), "complement budget must be positive");
    let excluded: HashSet<u64> = excluded.iter().copied().collect();
    let mut k = 1u64;
    let start = loop {
        let n = stage_element_u64(j, k);
        if !excluded.contains(&n) {
            break n;
        }
        k += 1;
    };
    let mut shift = 0u64;
    let mut bound = Rat::pow2_neg((start + j as u64 - 1) as u32);
    while bound >= *budget {
        shift += 1;
        bound = bound / Rat::from_int(2);
    }
    ComplementRule {
        j,
        shift,
        start,
        bound,
    }
}

/// One built stage: the chosen grid index, the greedy index set, and
/// the complement rule.
#[derive(Clone, Debug)]
pub struct StageFunction {
    pub j: u32,
    pub k: BigInt,
    pub grid_point: Rat,
    pub t_set: Vec<u64>,
    /// Exact sum of the stage terms over t_set.
    pub subsum: Rat,
    pub complement: ComplementRule,
}

impl StageFunction {
    /// Enclosure of the full stage-j series value under this function.
    pub fn achieved(&self) -> RatInterval {
        RatInterval::new(self.subsum.clone(), &self.subsum + &self.complement.bound)
    }
}

/// A certified finite prefix of f together with exact bookkeeping:
/// `partial` is the exact greedy mass, the complement rules bound the
/// rest of the built stages, and `residual` encloses
/// target - (the full series value of any compatible completion) — in
/// particular it contains zero and has width at most `tolerance`.
#[derive(Clone, Debug)]
pub struct RepresentationCertificate {
    pub range: TargetRange,
    pub tolerance: Rat,
    pub stages: Vec<(StagePlan, StageFunction)>,
    pub f_prefix: Vec<(u64, u64)>,
    pub partial: Rat,
    pub residual: RatInterval,
}

/// Certified upper bound for the total mass of all stages beyond
/// `built`: each stage i contributes at most eps_i + theta_i/8 and
/// theta_i < eps_{i+1}/4.
fn unstarted_mass_upper(theta: &Rat, built: u32, eps_next: &Rat) -> Rat {
    eps_next + Rat::from_int(2) * eps_sum_upper(theta, built + 2)
}

pub fn build_representation(
    range: &TargetRange,
    tolerance: &Rat,
) -> Result<RepresentationCertificate, BuildError> {
    if !tolerance.is_positive() {
        return Err(BuildError::NonPositiveTolerance);
    }

    // Deepen the stage chain until the certified mass of everything
    // beyond stage J drops under 3/4 of the tolerance. eps[j] holds the
    // exact eps_j for j >= 2.
    let mut eps: Vec<Rat> = vec![Rat::zero(), Rat::zero()];
    let mut j_max = 0usize;
    let mut beyond = Rat::zero();
    let stop = tolerance * Rat::ratio(3, 4);
    for cand in 1..=MAX_STAGES {
        while eps.len() <= cand + 1 {
            let j = eps.len() as u32;
            eps.push(stage_eps(j, &range.theta)?);
        }
        beyond = unstarted_mass_upper(&range.theta, cand as u32, &eps[cand + 1]);
        if beyond < stop {
            j_max = cand;
            break;
        }
    }
    if j_max == 0 {
        return Err(BuildError::ToleranceUnreachable {
            tolerance: tolerance.to_fraction_string(),
            achieved: beyond.to_fraction_string(),
            max_stages: MAX_STAGES,
        });
    }

    let mut plans = Vec::with_capacity(j_max);
    for j in 1..=j_max {
        plans.push(stage_plan(j as u32, range, &eps[j + 1])?);
    }

    // Certified spans of what stages > j can still contribute:
    //   span_hi[j] >= sum_{i>j} max X_i is not needed; admission uses
    //   span_lo[j] <= sum_{i>j} max X_i  (so residuals up to span_lo
    //                                     stay coverable), and
    //   min_hi[j]  >= sum_{i>j} min X_i  (unavoidable future mass).
    let esu_tail = eps_sum_upper(&range.theta, j_max as u32 + 2);
    let eps_ub_next2 = stage_eps_upper(j_max as u32 + 2, &range.theta);
    let mut span_lo = vec![Rat::zero(); j_max + 1];
    let mut min_hi = vec![Rat::zero(); j_max + 1];
    span_lo[j_max] = &eps[j_max + 1] - &eps_ub_next2 / Rat::from_int(16);
    min_hi[j_max] = &esu_tail / Rat::from_int(32);
    for j in (1..j_max).rev() {
        let step = &plans[j].theta_step; // stage j+1 plan
        span_lo[j] = &span_lo[j + 1] + &eps[j + 1] - step / Rat::from_int(4);
        min_hi[j] = &min_hi[j + 1] + step / Rat::from_int(8);
    }

    // Slack available for enclosure noise at each admission window; the
    // complement budgets must stay well under the tightest one.
    let mut noise_cap: Option<Rat> = None;
    for j in 1..=j_max {
        let slack = (&span_lo[j] - &min_hi[j]
            - Rat::from_int(2) * &plans[j - 1].theta_step)
            / Rat::from_int(4);
        if !slack.is_positive() {
            return Err(BuildError::NoFeasibleGridIndex {
                j: j as u32,
                residual: slack.to_fraction_string(),
            });
        }
        noise_cap = Some(match noise_cap {
            None => slack,
            Some(u) => u.min(slack),
        });
    }
    let noise_cap = noise_cap.expect("at least one stage");

    let mut comp_budget = Vec::with_capacity(j_max);
    for (idx, plan) in plans.iter().enumerate() {
        let j = (idx + 1) as u32;
        let b = (&plan.theta_step / Rat::from_int(8))
            .min(&noise_cap * Rat::pow2_neg(j))
            .min(tolerance * Rat::pow2_neg(j + 3));
        comp_budget.push(b);
    }

    // Stage loop: pick the smallest admissible grid index, realize it
    // greedily, and tighten the target residual enclosure.
    let mut stages: Vec<(StagePlan, StageFunction)> = Vec::with_capacity(j_max);
    let mut partial = Rat::zero();
    let mut comp_total = Rat::zero();
    let mut r_lo = range.target.clone();
    let mut r_hi = range.target.clone();
    for (idx, plan) in plans.iter().enumerate() {
        let j = (idx + 1) as u32;
        let eighth = &plan.theta_step / Rat::from_int(8);
        let p_min = &r_hi + &eighth - &span_lo[idx + 1];
        let p_max = &r_lo - &comp_budget[idx] - &min_hi[idx + 1];
        let mut k = ((&p_min - &plan.offset) / &plan.theta_step).ceil_int();
        if k.is_negative() {
            k = BigInt::zero();
        }
        let p = plan.grid_point(&k);
        if k > plan.m || p > p_max {
            return Err(BuildError::NoFeasibleGridIndex {
                j,
                residual: r_hi.to_fraction_string(),
            });
        }
        let (t_set, subsum) = stage_subsum_greedy(j, &p, &eighth)?;
        let complement = complement_fill(j, &t_set, &comp_budget[idx]);
        partial += &subsum;
        comp_total += &complement.bound;
        r_lo = &range.target - (&partial + &comp_total);
        r_hi = &range.target - &partial;
        stages.push((
            plan.clone(),
            StageFunction {
                j,
                k,
                grid_point: p,
                t_set,
                subsum,
                complement,
            },
        ));
    }

    let residual = RatInterval::new(&r_lo - &beyond, r_hi);
    assert!(
        residual.width() <= *tolerance,
        "accounting slack must fit inside the tolerance"
    );
    assert!(residual.contains(&Rat::zero()));

    let f_prefix = prefix_pairs(&stages);
    Ok(RepresentationCertificate {
        range: range.clone(),
        tolerance: tolerance.clone(),
        stages,
        f_prefix,
        partial,
        residual,
    })
}

/// f over all built stages up to the largest greedily chosen index.
fn prefix_pairs(stages: &[(StagePlan, StageFunction)]) -> Vec<(u64, u64)> {
    let j_max = stages.len() as u32;
    let mut horizon = 16u64;
    for (_, func) in stages {
        if let Some(&top) = func.t_set.last() {
            horizon = horizon.max(top);
        }
        horizon = horizon.max(func.complement.start);
    }
    let members: Vec<HashSet<u64>> = stages
        .iter()
        .map(|(_, f)| f.t_set.iter().copied().collect())
        .collect();
    let mut pairs = Vec::new();
    for n in 1..=horizon {
        let j = stage_of(n);
        if j > j_max {
            continue;
        }
        let idx = (j - 1) as usize;
        let f = if members[idx].contains(&n) {
            j as u64
        } else {
            stages[idx].1.complement.value(n)
        };
        pairs.push((n, f));
    }
    pairs
}

impl RepresentationCertificate {
    /// Fixed-order JSON rendering; rationals as "p/q" strings, integers
    /// as bare literals.
    pub fn to_json(&self) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "{{\"theta\":\"{}\",\"M\":\"{}\",\"target\":\"{}\",\"tolerance\":\"{}\",\"stages\":[",
            self.range.theta.to_fraction_string(),
            self.range.m_bound.to_fraction_string(),
            self.range.target.to_fraction_string(),
            self.tolerance.to_fraction_string(),
        );
        for (i, (plan, func)) in self.stages.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            let t_list = func
                .t_set
                .iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join(",");
            let _ = write!(
                s,
                "{{\"j\":{},\"k\":{},\"m_j\":\"{}\",\"theta_j\":\"{}\",\"T\":[{}],\"complement_shift\":{}}}",
                func.j,
                func.k,
                plan.m,
                plan.theta_step.to_fraction_string(),
                t_list,
                func.complement.shift,
            );
        }
        s.push_str("],\"f_prefix\":[");
        for (i, (n, f)) in self.f_prefix.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            let _ = write!(s, "[{n},{f}]");
        }
        let _ = write!(
            s,
            "],\"partial\":\"{}\",\"residual\":[\"{}\",\"{}\"]}}",
            self.partial.to_fraction_string(),
            self.residual.lo().to_fraction_string(),
            self.residual.hi().to_fraction_string(),
        );
        s
    }

    pub fn from_json(text: &str) -> Result<Self, BuildError> {
        let bad = |m: &str| BuildError::Certificate(m.to_owned());
        let v: serde_json::Value =
            serde_json::from_str(text).map_err(|e| BuildError::Certificate(e.to_string()))?;
        let rat = |key: &str| -> Result<Rat, BuildError> {
            v.get(key)
                .and_then(|x| x.as_str())
                .ok_or_else(|| bad(&format!("missing rational field {key}")))?
                .parse::<Rat>()
                .map_err(|e| BuildError::Certificate(e.to_string()))
        };
        let range = TargetRange::new(rat("theta")?, rat("M")?, rat("target")?)?;
        let tolerance = rat("tolerance")?;
        let stages_v = v
            .get("stages")
            .and_then(|x| x.as_array())
            .ok_or_else(|| bad("missing stages"))?;
        let mut stages = Vec::new();
        for sv in stages_v {
            let int = |key: &str| -> Result<u64, BuildError> {
                sv.get(key)
                    .and_then(|x| x.as_u64())
                    .ok_or_else(|| bad(&format!("missing integer field {key}")))
            };
            let j = int("j")? as u32;
            let k = BigInt::from(int("k")?);
            let m: BigInt = sv
                .get("m_j")
                .and_then(|x| x.as_str())
                .ok_or_else(|| bad("missing m_j"))?
                .parse()
                .map_err(|_| bad("m_j is not an integer"))?;
            let theta_step: Rat = sv
                .get("theta_j")
                .and_then(|x| x.as_str())
                .ok_or_else(|| bad("missing theta_j"))?
                .parse()
                .map_err(|_| bad("theta_j is not a rational"))?;
            let t_set: Vec<u64> = sv
                .get("T")
                .and_then(|x| x.as_array())
                .ok_or_else(|| bad("missing T"))?
                .iter()
                .map(|x| x.as_u64().ok_or_else(|| bad("T entry is not an integer")))
                .collect::<Result<_, _>>()?;
            let shift = int("complement_shift")?;
            let offset = if j == 1 {
                &range.theta / Rat::from_int(2)
            } else {
                Rat::zero()
            };
            let eps = &theta_step * Rat::from_bigint(m.clone());
            let mut subsum = Rat::zero();
            for &n in &t_set {
                subsum += term_nf(n, j as u64).map_err(|e| bad(&e.to_string()))?;
            }
            let excluded: HashSet<u64> = t_set.iter().copied().collect();
            let mut kk = 1u64;
            let start = loop {
                let n = stage_element_u64(j, kk);
                if !excluded.contains(&n) {
                    break n;
                }
                kk += 1;
            };
            let shift_u32 = u32::try_from(start + j as u64 + shift - 1)
                .map_err(|_| bad("complement shift out of range"))?;
            let grid_point = &offset + Rat::from_bigint(k.clone()) * &theta_step;
            stages.push((
                StagePlan {
                    j,
                    eps_prime_lb: None,
                    eps,
                    offset,
                    m,
                    theta_step,
                    kak1_from: 0,
                },
                StageFunction {
                    j,
                    k,
                    grid_point,
                    t_set,
                    subsum,
                    complement: ComplementRule {
                        j,
                        shift,
                        start,
                        bound: Rat::pow2_neg(shift_u32),
                    },
                },
            ));
        }
        let f_prefix: Vec<(u64, u64)> = v
            .get("f_prefix")
            .and_then(|x| x.as_array())
            .ok_or_else(|| bad("missing f_prefix"))?
            .iter()
            .map(|pair| {
                let a = pair.get(0).and_then(|x| x.as_u64());
                let b = pair.get(1).and_then(|x| x.as_u64());
                match (a, b) {
                    (Some(n), Some(f)) => Ok((n, f)),
                    _ => Err(bad("f_prefix entry is not an integer pair")),
                }
            })
            .collect::<Result<_, _>>()?;
        let partial = rat("partial")?;
        let res_v = v
            .get("residual")
            .and_then(|x| x.as_array())
            .ok_or_else(|| bad("missing residual"))?;
        if res_v.len() != 2 {
            return Err(bad("residual must have two endpoints"));
        }
        let res_rat = |i: usize| -> Result<Rat, BuildError> {
            res_v[i]
                .as_str()
                .ok_or_else(|| bad("residual endpoint is not a string"))?
                .parse::<Rat>()
                .map_err(|e| BuildError::Certificate(e.to_string()))
        };
        let lo = res_rat(0)?;
        let hi = res_rat(1)?;
        if lo > hi {
            return Err(bad("residual endpoints are out of order"));
        }
        Ok(RepresentationCertificate {
            range,
            tolerance,
            stages,
            f_prefix,
            partial,
            residual: RatInterval::new(lo, hi),
        })
    }
}

/// Independent re-check of a certificate. Returns the violation list;
/// an empty list means every check passed.
pub fn verify_certificate(cert: &RepresentationCertificate) -> (bool, Vec<String>) {
    let mut violations = Vec::new();
    let mut flag = |cond: bool, label: &str, detail: String| {
        if !cond {
            violations.push(format!("{label}: {detail}"));
        }
    };

    let theta = &cert.range.theta;
    flag(
        theta.is_positive() && *theta < cert.range.m_bound,
        "range",
        "need 0 < theta < M".into(),
    );
    flag(
        cert.range.target >= *theta && cert.range.target <= cert.range.m_bound,
        "range",
        "target outside [theta, M]".into(),
    );
    flag(
        cert.tolerance.is_positive(),
        "tolerance",
        "tolerance must be positive".into(),
    );

    let j_max = cert.stages.len() as u32;
    let mut partial = Rat::zero();
    let mut comp_total = Rat::zero();
    for (idx, (plan, func)) in cert.stages.iter().enumerate() {
        let j = (idx + 1) as u32;
        flag(
            plan.j == j && func.j == j,
            "grid",
            format!("stage {idx} must carry index {j}"),
        );

        let mut subsum = Rat::zero();
        let mut prev = 0u64;
        for &n in &func.t_set {
            flag(
                stage_of(n) == j,
                "membership",
                format!("{n} is not a stage-{j} index"),
            );
            flag(n > prev, "membership", format!("{n} breaks ascending order"));
            prev = n;
            if let Ok(t) = term_nf(n, j as u64) {
                subsum += t;
            }
        }
        flag(
            subsum == func.subsum,
            "partial",
            format!("stage {j} subsum mismatch"),
        );
        partial += &subsum;

        let p = plan.grid_point(&func.k);
        flag(
            p == func.grid_point,
            "grid",
            format!("stage {j} grid point mismatch"),
        );
        flag(
            !func.k.is_negative() && func.k <= plan.m,
            "grid",
            format!("stage {j} grid index out of range"),
        );
        let gap = &p - &subsum;
        flag(
            !gap.is_negative() && gap < &plan.theta_step / Rat::from_int(8),
            "grid",
            format!("stage {j} greedy sum misses its grid point"),
        );
        if j == 1 {
            flag(
                &plan.theta_step * Rat::from_bigint(plan.m.clone()) == cert.range.m_bound,
                "grid",
                "stage 1 grid must span M".into(),
            );
            flag(
                plan.offset == theta / Rat::from_int(2),
                "grid",
                "stage 1 grid must start at theta/2".into(),
            );
        } else {
            flag(
                &plan.theta_step * Rat::from_bigint(plan.m.clone()) <= theta * Rat::pow2_neg(j),
                "grid",
                format!("stage {j} extent above theta/2^{j}"),
            );
            flag(
                plan.offset.is_zero(),
                "grid",
                format!("stage {j} grid must start at zero"),
            );
        }

        // Complement bound re-derivation from T alone.
        let members: HashSet<u64> = func.t_set.iter().copied().collect();
        let mut kk = 1u64;
        let start = loop {
            let n = stage_element_u64(j, kk);
            if !members.contains(&n) {
                break n;
            }
            kk += 1;
        };
        flag(
            func.complement.start == start,
            "growth",
            format!("stage {j} complement start mismatch"),
        );
        let expected_bound =
            Rat::pow2_neg((start + j as u64 + func.complement.shift - 1) as u32);
        flag(
            func.complement.bound == expected_bound,
            "containment",
            format!("stage {j} complement bound mismatch"),
        );
        comp_total += &expected_bound;
    }
    flag(
        partial == cert.partial,
        "partial",
        "partial does not match the stage sums".into(),
    );

    // Chain: theta_j < eps_{j+1}/4, with eps from the next stage's grid
    // for built stages and re-derived for the first unbuilt one.
    for idx in 0..cert.stages.len() {
        let step = &cert.stages[idx].0.theta_step;
        let eps_next = if idx + 1 < cert.stages.len() {
            let next = &cert.stages[idx + 1].0;
            Some(&next.theta_step * Rat::from_bigint(next.m.clone()))
        } else {
            stage_eps(j_max + 1, theta).ok()
        };
        match eps_next {
            Some(e) => flag(
                step * Rat::from_int(4) < e,
                "chain",
                format!("theta_{} is not below eps_{}/4", idx + 1, idx + 2),
            ),
            None => flag(false, "chain", "cannot re-derive the next eps".into()),
        }
    }

    // Prefix consistency and growth.
    let members: Vec<HashSet<u64>> = cert
        .stages
        .iter()
        .map(|(_, f)| f.t_set.iter().copied().collect())
        .collect();
    for &(n, f) in &cert.f_prefix {
        let j = stage_of(n);
        if j > j_max || n == 0 {
            flag(false, "growth", format!("{n} belongs to an unbuilt stage"));
            continue;
        }
        let idx = (j - 1) as usize;
        if members[idx].contains(&n) {
            flag(
                f == j as u64,
                "growth",
                format!("f({n}) must equal {j} on the greedy set"),
            );
        } else {
            flag(
                f >= n + j as u64,
                "growth",
                format!("f({n}) = {f} is below {n} + {j}"),
            );
            flag(
                f == cert.stages[idx].1.complement.value(n),
                "growth",
                format!("f({n}) deviates from the complement rule"),
            );
        }
    }

    // Containment: the residual must cover target minus the enclosed
    // full value, with the unbuilt-stage mass re-derived.
    match (
        stage_eps(j_max + 1, theta),
        Ok::<_, BuildError>(eps_sum_upper(theta, j_max + 2)),
    ) {
        (Ok(eps_next), Ok(esu)) => {
            let beyond = &eps_next + Rat::from_int(2) * esu;
            let full_lo = &cert.range.target - &cert.partial - &comp_total - beyond;
            let full_hi = &cert.range.target - &cert.partial;
            flag(
                *cert.residual.lo() <= full_lo && *cert.residual.hi() >= full_hi,
                "containment",
                "residual does not cover the recomputed enclosure".into(),
            );
        }
        _ => flag(false, "containment", "cannot re-derive unbuilt mass".into()),
    }
    flag(
        cert.residual.width() <= cert.tolerance,
        "tolerance",
        "residual wider than the tolerance".into(),
    );

    (violations.is_empty(), violations)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quarter_to_four(target: Rat) -> TargetRange {
        TargetRange::new(Rat::ratio(1, 4), Rat::from_int(4), target).unwrap()
    }

    #[test]
    fn target_range_validation() {
        assert!(TargetRange::new(Rat::ratio(1, 4), Rat::from_int(4), Rat::ratio(1, 2)).is_ok());
        assert!(matches!(
            TargetRange::new(Rat::from_int(4), Rat::ratio(1, 4), Rat::from_int(1)),
            Err(BuildError::InvalidRange)
        ));
        assert!(matches!(
            TargetRange::new(Rat::ratio(1, 4), Rat::from_int(4), Rat::from_int(5)),
            Err(BuildError::TargetOutOfRange { .. })
        ));
        assert!(matches!(
            TargetRange::new(Rat::ratio(1, 4), Rat::from_int(4), Rat::ratio(1, 8)),
            Err(BuildError::TargetOutOfRange { .. })
        ));
    }

    #[test]
    fn stage_plan_smallest_m() {
        // theta_1 = M/m < eps_2/4 strictly: with M = 1, eps_2 = 1/10 the
        // smallest m is 41 (1/40 only matches 1/40 non-strictly).
        let range = TargetRange::new(Rat::ratio(1, 100), Rat::one(), Rat::ratio(1, 2)).unwrap();
        let plan = stage_plan(1, &range, &Rat::ratio(1, 10)).unwrap();
        assert_eq!(plan.m, BigInt::from(41));
        assert_eq!(plan.offset, Rat::ratio(1, 200));
        assert!(&plan.theta_step * Rat::from_int(4) < Rat::ratio(1, 10));

        // eps_j = 1/100, eps_{j+1} = 1/10^4 -> m = 401.
        let m = (Rat::from_int(4) * Rat::ratio(1, 100) / Rat::ratio(1, 10_000)).floor_int()
            + BigInt::one();
        assert_eq!(m, BigInt::from(401));

        // Grid endpoints.
        assert_eq!(plan.grid_point(&BigInt::zero()), Rat::ratio(1, 200));
        assert_eq!(
            plan.grid_point(&plan.m.clone()),
            Rat::ratio(1, 200) + Rat::one()
        );
    }

    #[test]
    fn stage_plan_later_stage_shape() {
        let range = quarter_to_four(Rat::ratio(1, 2));
        let eps3 = stage_eps(3, &range.theta).unwrap();
        let plan = stage_plan(2, &range, &eps3).unwrap();
        assert_eq!(plan.offset, Rat::zero());
        assert!(plan.eps <= &range.theta / Rat::from_int(4));
        assert_eq!(plan.eps, &plan.theta_step * Rat::from_bigint(plan.m.clone()));
        assert!(plan.eps_prime_lb.as_ref().unwrap() >= &plan.eps);
        assert_eq!(plan.kak1_from, kak1_threshold(2).unwrap().0);
        assert!(stage_plan(2, &range, &Rat::zero()).is_err());
    }

    #[test]
    fn greedy_spec_cases() {
        let (t, achieved) =
            stage_subsum_greedy(1, &Rat::ratio(1, 2), &Rat::ratio(1, 100)).unwrap();
        assert_eq!(t, vec![1]);
        assert_eq!(achieved, Rat::ratio(1, 2));

        let (t, achieved) =
            stage_subsum_greedy(1, &Rat::ratio(3, 4), &Rat::ratio(1, 100)).unwrap();
        assert_eq!(t, vec![1, 3]);
        assert_eq!(achieved, Rat::ratio(3, 4));

        // A tiny target starts at the first odd n with 1/(n+1) <= p.
        let (t, _) = stage_subsum_greedy(1, &Rat::ratio(1, 1000), &Rat::pow2_neg(20)).unwrap();
        assert_eq!(t[0], 999);
    }

    #[test]
    fn greedy_gap_invariant() {
        for (num, den) in [(1i64, 3i64), (2, 3), (7, 5), (399, 100)] {
            let p = Rat::ratio(num, den);
            let budget = Rat::pow2_neg(16);
            let (t, achieved) = stage_subsum_greedy(1, &p, &budget).unwrap();
            let gap = &p - &achieved;
            assert!(!gap.is_negative() && gap < budget);
            let recomputed: Rat = t
                .iter()
                .map(|&n| term_nf(n, 1).unwrap())
                .fold(Rat::zero(), |a, b| a + b);
            assert_eq!(recomputed, achieved);
        }

        let bound = zero_segment_lower_bound(2).unwrap();
        let p = &bound / Rat::from_int(2);
        let budget = &bound / Rat::from_int(1 << 20);
        let (t, achieved) = stage_subsum_greedy(2, &p, &budget).unwrap();
        assert!(t.iter().all(|&n| stage_of(n) == 2));
        let gap = &p - &achieved;
        assert!(!gap.is_negative() && gap < budget);
    }

    #[test]
    fn greedy_rejects_bad_inputs() {
        assert!(matches!(
            stage_subsum_greedy(1, &Rat::one(), &Rat::zero()),
            Err(BuildError::NonPositiveBudget)
        ));
        let above = zero_segment_lower_bound(2).unwrap() + Rat::one();
        assert!(matches!(
            stage_subsum_greedy(2, &above, &Rat::ratio(1, 100)),
            Err(BuildError::InfeasibleStageTarget { .. })
        ));
    }

    #[test]
    fn complement_shift_and_bound() {
        let rule = complement_fill(1, &[1, 3], &Rat::one());
        assert_eq!(rule.shift, 0);
        assert_eq!(rule.start, 5);
        assert_eq!(rule.value(5), 6);
        assert_eq!(rule.bound, Rat::pow2_neg(5));

        // A budget below the shift-0 bound forces a positive shift.
        let tight = complement_fill(1, &[1, 3], &Rat::pow2_neg(10));
        assert!(tight.shift >= 1);
        assert!(tight.bound < Rat::pow2_neg(10));

        // Brute check: the first 300 complement terms stay below the bound.
        let excluded: HashSet<u64> = [1u64, 3].into_iter().collect();
        let mut sum = Rat::zero();
        for k in 1..=300u64 {
            let n = stage_element_u64(1, k);
            if excluded.contains(&n) {
                continue;
            }
            sum += term_nf(n, rule.value(n)).unwrap();
        }
        assert!(sum < rule.bound);
    }

    #[test]
    fn eps_chain_magnitudes() {
        let theta = Rat::ratio(1, 4);
        let e2 = stage_eps(2, &theta).unwrap();
        let e3 = stage_eps(3, &theta).unwrap();
        let e4 = stage_eps(4, &theta).unwrap();
        assert!(e2 > e3.clone() && e3 > e4.clone());
        assert!(e4.is_positive());
        // Upper bounds dominate the exact values.
        assert!(stage_eps_upper(3, &theta) >= e3);
        assert!(stage_eps_upper(4, &theta) >= e4);
        // The closure really bounds a long partial sum of upper bounds.
        let closure = eps_sum_upper(&theta, 5);
        let mut partial = Rat::zero();
        for i in 5..25 {
            partial += stage_eps_upper(i, &theta).min(
                Rat::pow2_neg((i - 1) * (i - 1)) / Rat::from_int((i - 1) as i64),
            );
        }
        assert!(partial <= closure);
    }

    #[test]
    fn build_and_verify_basic_target() {
        let range = quarter_to_four(Rat::ratio(1, 2));
        let tol = Rat::new(BigInt::one(), BigInt::from(1_000_000u64));
        let cert = build_representation(&range, &tol).unwrap();
        assert!(cert.residual.contains(&Rat::zero()));
        assert!(cert.residual.width() <= tol);
        let (ok, violations) = verify_certificate(&cert);
        assert!(ok, "{violations:?}");

        // Endpoint slack: the built stage minima leave room below theta
        // and the maxima reach above M.
        let mut min_side = &range.theta / Rat::from_int(2)
            + &cert.stages[0].0.theta_step / Rat::from_int(4);
        let mut max_side = &range.theta / Rat::from_int(2) + &range.m_bound
            - &cert.stages[0].0.theta_step / Rat::from_int(4);
        for (plan, _) in &cert.stages[1..] {
            min_side += &plan.theta_step / Rat::from_int(8);
            max_side += &plan.eps - &plan.theta_step / Rat::from_int(4);
        }
        assert!(min_side < range.theta);
        assert!(max_side > range.m_bound);
    }

    #[test]
    fn build_covers_box_endpoints() {
        let tol = Rat::new(BigInt::one(), BigInt::from(10_000u64));
        for target in [Rat::ratio(1, 4), Rat::from_int(4)] {
            let range = quarter_to_four(target);
            let cert = build_representation(&range, &tol).unwrap();
            let (ok, violations) = verify_certificate(&cert);
            assert!(ok, "{violations:?}");
        }
    }

    #[test]
    fn certificate_prefix_growth() {
        let range = quarter_to_four(Rat::one());
        let tol = Rat::new(BigInt::one(), BigInt::from(100_000u64));
        let cert = build_representation(&range, &tol).unwrap();
        let j_max = cert.stages.len() as u32;
        let members: Vec<HashSet<u64>> = cert
            .stages
            .iter()
            .map(|(_, f)| f.t_set.iter().copied().collect())
            .collect();
        assert!(!cert.f_prefix.is_empty());
        for &(n, f) in &cert.f_prefix {
            let j = stage_of(n);
            assert!(j <= j_max);
            if members[(j - 1) as usize].contains(&n) {
                assert_eq!(f, j as u64);
            } else {
                assert!(f >= n + j as u64);
            }
        }
        // Prefix terms resummed lie inside the partial enclosure.
        let comp_total: Rat = cert
            .stages
            .iter()
            .map(|(_, f)| f.complement.bound.clone())
            .fold(Rat::zero(), |a, b| a + b);
        let resummed: Rat = cert
            .f_prefix
            .iter()
            .map(|&(n, f)| term_nf(n, f).unwrap())
            .fold(Rat::zero(), |a, b| a + b);
        assert!(resummed >= cert.partial);
        assert!(resummed < &cert.partial + &comp_total);
    }

    #[test]
    fn json_round_trip_is_stable() {
        let range = quarter_to_four(Rat::ratio(1, 2));
        let tol = Rat::new(BigInt::one(), BigInt::from(100_000u64));
        let cert = build_representation(&range, &tol).unwrap();
        let text = cert.to_json();
        let back = RepresentationCertificate::from_json(&text).unwrap();
        assert_eq!(back.to_json(), text);
        let (ok, violations) = verify_certificate(&back);
        assert!(ok, "{violations:?}");
    }

    #[test]
    fn verify_flags_tampering() {
        let range = quarter_to_four(Rat::ratio(1, 2));
        let tol = Rat::new(BigInt::one(), BigInt::from(10_000u64));
        let cert = build_representation(&range, &tol).unwrap();

        // Lower one complement value below n + j.
        let mut bad = cert.clone();
        let victim = bad
            .f_prefix
            .iter()
            .position(|&(n, f)| f > stage_of(n) as u64)
            .unwrap();
        bad.f_prefix[victim].1 = 1;
        let (ok, violations) = verify_certificate(&bad);
        assert!(!ok);
        assert!(violations.iter().any(|v| v.starts_with("growth")));

        // Shift the residual.
        let mut bad = cert.clone();
        bad.residual = bad.residual.translate(&Rat::ratio(1, 100));
        let (ok, violations) = verify_certificate(&bad);
        assert!(!ok);
        assert!(violations.iter().any(|v| v.starts_with("containment")));

        // Corrupt the partial.
        let mut bad = cert;
        bad.partial += Rat::pow2_neg(40);
        let (ok, violations) = verify_certificate(&bad);
        assert!(!ok);
        assert!(violations.iter().any(|v| v.starts_with("partial")));
    }

    #[test]
    fn build_rejects_bad_tolerance() {
        let range = quarter_to_four(Rat::ratio(1, 2));
        assert!(matches!(
            build_representation(&range, &Rat::zero()),
            Err(BuildError::NonPositiveTolerance)
        ));
    }
}
