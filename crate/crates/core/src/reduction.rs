//! Continuous-to-discrete reduction: theorem constants evaluated with a
//! certified rational enclosure of e, tail-doubling checks on the dyadic
//! grid, truncation plans, dyadic bucketing, exact discretization, lifting
//! of discrete covers to continuous thresholds, and the value-threshold
//! transform that zeroes all values below a multiple of the mean.
//!
//! Continuous laws are expected in normalized units (mean 1); every dyadic
//! grid and truncation threshold is taken at raw powers of two.

use crate::cover::{Cover, SurvivalTail, ThresholdEntry};
use crate::error::{Error, Result};
use crate::model::{DiscreteLaw, ValueMap};
use crate::rational::{ceil_affine_in_e, ceil_rat, format_rat, parse_rat, pow2, serde_rat, Rat};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Exact integer constants of the four cover theorems at given (C, delta).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstantsReport {
    #[serde(with = "serde_rat")]
    pub c: Rat,
    #[serde(with = "serde_rat")]
    pub delta: Rat,
    /// ceil(12e / ((1 - 1/C) delta)): replica count for the averaging lemma.
    pub k_replica: u64,
    /// ceil(C + 12e / ((1 - 1/C) delta)): inner truncation constant.
    pub k_tail: u64,
    /// 8 * k_tail: threshold multiplier for delta-small covers under the
    /// tail condition.
    pub k_prime_tail: u64,
    /// ceil(18C + 2200 / (1 - 1/C)): multiplier for the continuous
    /// doubling-tail theorem.
    pub k_prime_doubling: u64,
    /// 8 * ceil(12e / delta): multiplier for weakly-small covers.
    pub k_prime_weak: u64,
    /// Smallest admissible multiplier for the interval-weight theorem.
    pub k_prime_interval: u64,
    /// The strict lower bound it must exceed.
    pub interval_lower_bound: u64,
}

fn big_to_u64(v: &BigInt) -> u64 {
    use num_traits::ToPrimitive;
    v.to_u64().expect("constant fits in u64")
}

/// Evaluates every theorem constant exactly; ceilings touching e are
/// certified by an enclosure with outward rounding.
pub fn constants(c: &Rat, delta: &Rat) -> Result<ConstantsReport> {
    if *c <= Rat::one() {
        return Err(Error::Config(format!(
            "C = {} must exceed 1",
            format_rat(c)
        )));
    }
    if !(delta.is_positive() && *delta <= Rat::one()) {
        return Err(Error::Config(format!(
            "delta = {} must lie in (0, 1]",
            format_rat(delta)
        )));
    }
    let one_minus = Rat::one() - Rat::one() / c;
    let twelve = Rat::from_integer(12.into());
    let coeff = &twelve / (&one_minus * delta);
    let k_replica = big_to_u64(&ceil_affine_in_e(&Rat::zero(), &coeff));
    let k_tail = big_to_u64(&ceil_affine_in_e(c, &coeff));
    let k_prime_doubling = big_to_u64(&ceil_rat(
        &(Rat::from_integer(18.into()) * c + Rat::from_integer(2200.into()) / &one_minus),
    ));
    let k_weak_inner = big_to_u64(&ceil_affine_in_e(&Rat::zero(), &(&twelve / delta)));
    Ok(ConstantsReport {
        c: c.clone(),
        delta: delta.clone(),
        k_replica,
        k_tail,
        k_prime_tail: 8 * k_tail,
        k_prime_doubling,
        k_prime_weak: 8 * k_weak_inner,
        k_prime_interval: 2103,
        interval_lower_bound: 2102,
    })
}

/// Catalog of continuous laws with exactly queryable survival functions.
#[derive(Clone, Debug)]
pub enum ContinuousLaw {
    /// Atoms at positive rational values; any missing mass sits at 0.
    Atoms { atoms: Vec<(Rat, Rat)> },
    /// survival(t) = min(1, (scale/t)^2), censored to 0 at the cutoff.
    Pareto { scale: Rat, cutoff: Option<Rat> },
}

impl ContinuousLaw {
    /// Dyadic-geometric stand-in (already normalized): survival 2^{-k} on
    /// [2^k, 2^{k+1}) for k < levels, zero from 2^levels on.
    pub fn geometric_dyadic(levels: u32) -> Self {
        assert!(levels >= 1);
        let mut atoms = Vec::new();
        for k in 0..levels {
            let mass = if k + 1 == levels {
                Rat::one() / pow2(k)
            } else {
                Rat::one() / pow2(k + 1)
            };
            atoms.push((pow2(k), mass));
        }
        Self::Atoms { atoms }
    }

    pub fn two_point(low: Rat, high: Rat, high_prob: Rat) -> Result<Self> {
        if low >= high {
            return Err(Error::Config("two-point law needs low < high".into()));
        }
        Self::from_atoms(vec![(low, Rat::one() - &high_prob), (high, high_prob)])
    }

    pub fn from_atoms(mut atoms: Vec<(Rat, Rat)>) -> Result<Self> {
        atoms.retain(|(_, m)| !m.is_zero());
        atoms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut total = Rat::zero();
        for (value, mass) in &atoms {
            if !value.is_positive() {
                return Err(Error::Config(format!(
                    "atom at {} must sit at a positive value (missing mass lands at 0)",
                    format_rat(value)
                )));
            }
            if mass.is_negative() {
                return Err(Error::Config("atom masses must be nonnegative".into()));
            }
            total += mass;
        }
        if total > Rat::one() {
            return Err(Error::Config(format!(
                "atom masses sum to {} > 1",
                format_rat(&total)
            )));
        }
        for w in atoms.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::Config("duplicate atom values".into()));
            }
        }
        Ok(Self::Atoms { atoms })
    }
}

impl SurvivalTail for ContinuousLaw {
    fn prob_geq(&self, t: &Rat) -> Rat {
        if !t.is_positive() {
            return Rat::one();
        }
        match self {
            Self::Atoms { atoms } => atoms
                .iter()
                .filter(|(v, _)| v >= t)
                .map(|(_, m)| m.clone())
                .sum(),
            Self::Pareto { scale, cutoff } => {
                if let Some(cut) = cutoff {
                    if t >= cut {
                        return Rat::zero();
                    }
                    let base = pareto_tail(scale, t);
                    let lost = pareto_tail(scale, cut);
                    (base - lost).max(Rat::zero())
                } else {
                    pareto_tail(scale, t)
                }
            }
        }
    }

    fn prob_gt(&self, t: &Rat) -> Rat {
        match self {
            Self::Atoms { atoms } => atoms
                .iter()
                .filter(|(v, _)| v > t)
                .map(|(_, m)| m.clone())
                .sum(),
            // atomless on the positive axis; censoring may park mass at 0
            Self::Pareto { scale, cutoff } => {
                if t.is_negative() {
                    Rat::one()
                } else if t.is_zero() {
                    match cutoff {
                        Some(cut) => Rat::one() - pareto_tail(scale, cut),
                        None => Rat::one(),
                    }
                } else {
                    self.prob_geq(t)
                }
            }
        }
    }
}

fn pareto_tail(scale: &Rat, t: &Rat) -> Rat {
    let ratio = scale / t;
    let sq = &ratio * &ratio;
    if sq > Rat::one() {
        Rat::one()
    } else {
        sq
    }
}

/// JSON wire form of a continuous law.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ContinuousLawSpec {
    TruncatedGeometricDyadic {
        levels: u32,
    },
    TwoPoint {
        low: String,
        high: String,
        high_prob: String,
    },
    ParetoTruncated {
        scale: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cutoff: Option<String>,
    },
    Atoms {
        atoms: Vec<[String; 2]>,
    },
}

impl ContinuousLawSpec {
    pub fn build(&self) -> Result<ContinuousLaw> {
        let field = |s: &str, name: &str| -> Result<Rat> {
            parse_rat(s).map_err(|e| Error::Config(format!("field {name}: {e}")))
        };
        match self {
            Self::TruncatedGeometricDyadic { levels } => {
                if *levels == 0 {
                    return Err(Error::Config("levels must be >= 1".into()));
                }
                Ok(ContinuousLaw::geometric_dyadic(*levels))
            }
            Self::TwoPoint {
                low,
                high,
                high_prob,
            } => ContinuousLaw::two_point(
                field(low, "low")?,
                field(high, "high")?,
                field(high_prob, "high_prob")?,
            ),
            Self::ParetoTruncated { scale, cutoff } => Ok(ContinuousLaw::Pareto {
                scale: field(scale, "scale")?,
                cutoff: cutoff.as_deref().map(|c| field(c, "cutoff")).transpose()?,
            }),
            Self::Atoms { atoms } => {
                let parsed: Result<Vec<(Rat, Rat)>> = atoms
                    .iter()
                    .map(|[v, m]| Ok((field(v, "atom value")?, field(m, "atom mass")?)))
                    .collect();
                ContinuousLaw::from_atoms(parsed?)
            }
        }
    }
}

/// Result of the dyadic-grid tail-doubling check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContinuousTailReport {
    pub holds: bool,
    /// Exponent k of the first grid point 2^k where the check fails.
    pub first_violation_exponent: Option<u32>,
}

/// Checks `survival(2^k) >= C * survival(2^{k+1})` for k = 0..n_max.
pub fn tail_condition_continuous(law: &ContinuousLaw, c: &Rat, n_max: u32) -> ContinuousTailReport {
    for k in 0..=n_max {
        let here = law.prob_geq(&pow2(k));
        let next = law.prob_geq(&pow2(k + 1));
        if here < c * next {
            return ContinuousTailReport {
                holds: false,
                first_violation_exponent: Some(k),
            };
        }
    }
    ContinuousTailReport {
        holds: true,
        first_violation_exponent: None,
    }
}

/// Truncation window [2^low, 2^cut) for the dyadic bucketing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionPlan {
    #[serde(with = "serde_rat")]
    pub c: Rat,
    pub dim: usize,
    /// Smallest l with 2^l >= C.
    pub low_exponent: u32,
    /// Smallest n > l with dim * survival(2^n) <= 1/4.
    pub cut_exponent: u32,
}

impl ReductionPlan {
    /// Support size of the discretized law: cut - low + 1.
    pub fn discrete_support(&self) -> usize {
        (self.cut_exponent - self.low_exponent + 1) as usize
    }
}

/// Window for the interval-weight pipeline: no doubling constant is
/// involved, so the window starts at 2^0 and `c` is recorded as 1.
pub fn choose_truncation_weak(
    law: &ContinuousLaw,
    dim: usize,
    n_max: u32,
) -> Result<ReductionPlan> {
    if dim == 0 {
        return Err(Error::Config("dimension must be positive".into()));
    }
    let quarter = Rat::new(BigInt::one(), BigInt::from(4));
    let dim_rat = Rat::from_integer(BigInt::from(dim));
    for cut_exponent in 1..=n_max {
        if &dim_rat * law.prob_geq(&pow2(cut_exponent)) <= quarter {
            return Ok(ReductionPlan {
                c: Rat::one(),
                dim,
                low_exponent: 0,
                cut_exponent,
            });
        }
    }
    Err(Error::NoTruncationLevel { n_max })
}

/// Picks the smallest dyadic window satisfying the plan invariants.
pub fn choose_truncation(
    law: &ContinuousLaw,
    c: &Rat,
    dim: usize,
    n_max: u32,
) -> Result<ReductionPlan> {
    if *c <= Rat::one() {
        return Err(Error::Config(format!(
            "C = {} must exceed 1",
            format_rat(c)
        )));
    }
    if dim == 0 {
        return Err(Error::Config("dimension must be positive".into()));
    }
    let mut low_exponent = 0u32;
    while pow2(low_exponent) < *c {
        low_exponent += 1;
        if low_exponent > 200 {
            return Err(Error::Config(format!(
                "C = {} is beyond any supported dyadic window",
                format_rat(c)
            )));
        }
    }
    let quarter = Rat::new(BigInt::one(), BigInt::from(4));
    let dim_rat = Rat::from_integer(BigInt::from(dim));
    for cut_exponent in (low_exponent + 1)..=n_max {
        if &dim_rat * law.prob_geq(&pow2(cut_exponent)) <= quarter {
            return Ok(ReductionPlan {
                c: c.clone(),
                dim,
                low_exponent,
                cut_exponent,
            });
        }
    }
    Err(Error::NoTruncationLevel { n_max })
}

/// Dyadic bucket value: 2^k when t lies in [2^k, 2^{k+1}) within the plan
/// window, 0 outside. Satisfies `g(t) <= t * 1_window(t) <= 2 g(t)`.
pub fn dyadic_value(t: &Rat, plan: &ReductionPlan) -> Rat {
    if t < &pow2(plan.low_exponent) || t >= &pow2(plan.cut_exponent) {
        return Rat::zero();
    }
    for k in plan.low_exponent..plan.cut_exponent {
        if t < &pow2(k + 1) {
            return pow2(k);
        }
    }
    unreachable!("t below 2^cut must land in a bucket")
}

/// Discretized law and value map over codes 1..=(cut - low + 1).
#[derive(Clone, Debug)]
pub struct DiscretizedLaw {
    pub law: DiscreteLaw,
    pub values: ValueMap,
}

/// Collapses the continuous law onto dyadic buckets: code 1 absorbs
/// everything outside the window, code k >= 2 is the bucket
/// [2^{low+k-2}, 2^{low+k-1}) with value 2^{low+k-2}.
pub fn discretize(law: &ContinuousLaw, plan: &ReductionPlan) -> Result<DiscretizedLaw> {
    let support = plan.discrete_support();
    let mut probs = Vec::with_capacity(support);
    let mut values = Vec::with_capacity(support);
    let below = Rat::one() - law.prob_geq(&pow2(plan.low_exponent));
    let above = law.prob_geq(&pow2(plan.cut_exponent));
    probs.push(below + above);
    values.push(Rat::zero());
    for code in 2..=support {
        let exp = plan.low_exponent + code as u32 - 2;
        let mass = law.prob_geq(&pow2(exp)) - law.prob_geq(&pow2(exp + 1));
        if mass.is_negative() {
            return Err(Error::SurvivalNotMonotone {
                at: format_rat(&pow2(exp)),
                to: format_rat(&pow2(exp + 1)),
            });
        }
        probs.push(mass);
        values.push(pow2(exp));
    }
    Ok(DiscretizedLaw {
        law: DiscreteLaw::new(probs)
            .map_err(|e| Error::Config(format!("discretization produced {e}")))?,
        values: ValueMap::new(values, true)?,
    })
}

/// A discrete cover lifted back to continuous thresholds, plus the weight
/// accounting of the final union bound.
#[derive(Clone, Debug, Serialize)]
pub struct LiftedCover {
    /// Lifted entries: coordinate -> threshold 2^{code + low - 2}.
    pub entries: Vec<ThresholdEntry>,
    /// One singleton entry per coordinate at the truncation threshold 2^cut.
    pub tail_entries: Vec<ThresholdEntry>,
    #[serde(with = "serde_rat")]
    pub discrete_weight: Rat,
    #[serde(with = "serde_rat")]
    pub tail_weight: Rat,
    #[serde(with = "serde_rat")]
    pub total_weight: Rat,
    /// total_weight <= discrete_weight + 1/4, forced by the plan invariant.
    pub within_bound: bool,
}

/// Lifts a discrete cover through the plan: codes map to thresholds
/// 2^{code + low - 2}; d tail entries at 2^cut are appended; the total
/// weight is the discrete tail weight plus d * survival(2^cut).
pub fn lift_cover(cover: &Cover, plan: &ReductionPlan, law: &ContinuousLaw) -> Result<LiftedCover> {
    let discretized = discretize(law, plan)?;
    for entry in &cover.entries {
        for &i in &entry.witness_set {
            if entry.x_star.code(i) < 2 {
                return Err(Error::MalformedEntry(format!(
                    "entry binds coordinate {} at code 1, which has value 0 and lifts nowhere",
                    i + 1
                )));
            }
        }
    }
    let entries: Vec<ThresholdEntry> = cover
        .entries
        .iter()
        .map(|entry| ThresholdEntry {
            thresholds: entry
                .witness_set
                .iter()
                .map(|&i| {
                    let exp = plan.low_exponent + entry.x_star.code(i) as u32 - 2;
                    (i, pow2(exp))
                })
                .collect(),
        })
        .collect();
    let cut = pow2(plan.cut_exponent);
    let tail_entries: Vec<ThresholdEntry> = (0..plan.dim)
        .map(|i| ThresholdEntry {
            thresholds: BTreeMap::from([(i, cut.clone())]),
        })
        .collect();
    let discrete_weight = crate::cover::weight_delta(cover, &discretized.law);
    let tail_weight = Rat::from_integer(BigInt::from(plan.dim)) * law.prob_geq(&cut);
    let total_weight = &discrete_weight + &tail_weight;
    let within_bound = tail_weight <= Rat::new(BigInt::one(), BigInt::from(4));
    Ok(LiftedCover {
        entries,
        tail_entries,
        discrete_weight,
        tail_weight,
        total_weight,
        within_bound,
    })
}

/// Result of zeroing every value at or below `K * E f(X)`.
#[derive(Clone, Debug)]
pub enum ThresholdTransform {
    /// No code exceeds the threshold; the induced family is empty.
    TriviallyEmpty {
        threshold_value: Rat,
    },
    Transformed(CodeTransform),
}

/// A code-level change of variables with its bookkeeping.
#[derive(Clone, Debug)]
pub struct CodeTransform {
    pub law: DiscreteLaw,
    pub values: ValueMap,
    /// Smallest code whose value strictly exceeds the threshold.
    pub cutoff_code: usize,
    /// K * E f(X).
    pub threshold_value: Rat,
    /// code_map[x - 1] is the new code of original code x.
    pub code_map: Vec<usize>,
    /// Codes whose value equals the threshold exactly (reported: they sit on
    /// the strict/non-strict boundary).
    pub boundary_codes: Vec<usize>,
}

impl CodeTransform {
    /// Codes where `f_hat(x_hat) != f(x) * [f(x) > threshold]`; empty for
    /// the corrected mapping.
    pub fn identity_violations(&self, original: &ValueMap) -> Vec<usize> {
        (1..=original.n())
            .filter(|&x| {
                let lhs = self.values.value(self.code_map[x - 1]);
                let rhs = if original.value(x) > &self.threshold_value {
                    original.value(x).clone()
                } else {
                    Rat::zero()
                };
                *lhs != rhs
            })
            .collect()
    }
}

fn transform_parts(
    law: &DiscreteLaw,
    values: &ValueMap,
    k: u64,
) -> (Rat, Option<usize>, Vec<usize>) {
    let threshold_value = Rat::from_integer(BigInt::from(k)) * values.expectation(law);
    let cutoff_code = (1..=values.n()).find(|&c| values.value(c) > &threshold_value);
    let boundary_codes = (1..=values.n())
        .filter(|&c| values.value(c) == &threshold_value)
        .collect();
    (threshold_value, cutoff_code, boundary_codes)
}

/// Corrected transform: codes below the cutoff collapse to 1 (value 0),
/// code x >= cutoff becomes x - cutoff + 2 and keeps its value, so the
/// pointwise identity `f_hat(x_hat) = f(x) * [f(x) > K E f]` is exact.
pub fn threshold_transform(
    law: &DiscreteLaw,
    values: &ValueMap,
    k: u64,
) -> Result<ThresholdTransform> {
    let (threshold_value, cutoff, boundary_codes) = transform_parts(law, values, k);
    let Some(cutoff_code) = cutoff else {
        return Ok(ThresholdTransform::TriviallyEmpty { threshold_value });
    };
    let n = law.n();
    let support = n - cutoff_code + 2;
    let mut probs = vec![Rat::zero(); support];
    let mut new_values = vec![Rat::zero(); support];
    let mut code_map = vec![1usize; n];
    for x in 1..=n {
        let new_code = if x < cutoff_code {
            1
        } else {
            x - cutoff_code + 2
        };
        code_map[x - 1] = new_code;
        probs[new_code - 1] += law.prob(x);
        if new_code >= 2 {
            new_values[new_code - 1] = values.value(x).clone();
        }
    }
    Ok(ThresholdTransform::Transformed(CodeTransform {
        law: DiscreteLaw::new(probs)?,
        values: ValueMap::new(new_values, true)?,
        cutoff_code,
        threshold_value,
        code_map,
        boundary_codes,
    }))
}

/// The literal shifted mapping (x > cutoff goes to x - cutoff), retained to
/// document that it collapses the cutoff code and its successor onto value 0
/// and breaks the pointwise identity there.
pub fn threshold_transform_collapsing(
    law: &DiscreteLaw,
    values: &ValueMap,
    k: u64,
) -> Result<ThresholdTransform> {
    let (threshold_value, cutoff, boundary_codes) = transform_parts(law, values, k);
    let Some(cutoff_code) = cutoff else {
        return Ok(ThresholdTransform::TriviallyEmpty { threshold_value });
    };
    let n = law.n();
    let support = (n - cutoff_code).max(1);
    let mut probs = vec![Rat::zero(); support];
    let mut new_values = vec![Rat::zero(); support];
    let mut code_map = vec![1usize; n];
    for x in 1..=n {
        let new_code = if x <= cutoff_code { 1 } else { x - cutoff_code };
        code_map[x - 1] = new_code;
        probs[new_code - 1] += law.prob(x);
        if new_code >= 2 {
            new_values[new_code - 1] = values.value(x).clone();
        }
    }
    Ok(ThresholdTransform::Transformed(CodeTransform {
        law: DiscreteLaw::new(probs)?,
        values: ValueMap::new(new_values, true)?,
        cutoff_code,
        threshold_value,
        code_map,
        boundary_codes,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tail_condition_discrete;
    use crate::rational::{rat, rat_int};

    #[test]
    fn constants_worked_values() {
        let report = constants(&rat_int(2), &rat(1, 2)).unwrap();
        assert_eq!(report.k_replica, 131);
        assert_eq!(report.k_tail, 133);
        assert_eq!(report.k_prime_tail, 1064);
        assert_eq!(report.k_prime_doubling, 4436);
        assert_eq!(report.k_prime_weak, 528);
        assert_eq!(report.k_prime_interval, 2103);
        assert_eq!(report.interval_lower_bound, 2102);
    }

    #[test]
    fn constants_reject_bad_domain() {
        assert!(constants(&rat_int(1), &rat(1, 2)).is_err());
        assert!(constants(&rat_int(2), &rat_int(2)).is_err());
    }

    #[test]
    fn dyadic_catalog_survival() {
        let law = ContinuousLaw::geometric_dyadic(3);
        assert_eq!(law.prob_geq(&rat_int(1)), rat_int(1));
        assert_eq!(law.prob_geq(&rat_int(2)), rat(1, 2));
        assert_eq!(law.prob_geq(&rat_int(4)), rat(1, 4));
        assert_eq!(law.prob_geq(&rat_int(8)), rat_int(0));
    }

    #[test]
    fn continuous_tail_check_worked_cases() {
        let dyadic = ContinuousLaw::geometric_dyadic(3);
        assert!(tail_condition_continuous(&dyadic, &rat_int(2), 16).holds);

        // bounded law: nothing above the mean scale
        let bounded = ContinuousLaw::two_point(rat(1, 2), rat(99, 100), rat(1, 2)).unwrap();
        assert!(tail_condition_continuous(&bounded, &rat_int(2), 16).holds);

        // quartic decay fails a doubling constant of 8 immediately
        let quartic = ContinuousLaw::Pareto {
            scale: rat_int(1),
            cutoff: None,
        };
        let report = tail_condition_continuous(&quartic, &rat_int(8), 16);
        assert!(!report.holds);
        assert_eq!(report.first_violation_exponent, Some(0));
    }

    #[test]
    fn truncation_plan_worked_cases() {
        let two_point = ContinuousLaw::two_point(rat(1, 2), rat(3, 2), rat(1, 2)).unwrap();
        let plan = choose_truncation(&two_point, &rat_int(2), 2, 32).unwrap();
        assert_eq!(plan.low_exponent, 1);
        assert_eq!(plan.cut_exponent, 2);

        let plan = choose_truncation(&two_point, &rat(1001, 1000), 2, 32).unwrap();
        assert_eq!(plan.low_exponent, 1);

        let plan = choose_truncation(&two_point, &rat_int(5), 2, 32).unwrap();
        assert_eq!(plan.low_exponent, 3);
    }

    #[test]
    fn truncation_needs_decaying_tail() {
        // a point mass far out never satisfies the bound below n_max
        let stuck = ContinuousLaw::from_atoms(vec![(pow2(40), Rat::one())]).unwrap();
        assert!(matches!(
            choose_truncation(&stuck, &rat_int(2), 4, 8),
            Err(Error::NoTruncationLevel { n_max: 8 })
        ));
    }

    #[test]
    fn dyadic_value_worked_cases() {
        let plan = ReductionPlan {
            c: rat_int(2),
            dim: 2,
            low_exponent: 1,
            cut_exponent: 3,
        };
        assert_eq!(dyadic_value(&rat_int(3), &plan), rat_int(2));
        assert_eq!(dyadic_value(&rat_int(2), &plan), rat_int(2));
        assert_eq!(dyadic_value(&rat_int(1), &plan), rat_int(0));
        assert_eq!(dyadic_value(&rat_int(8), &plan), rat_int(0));
    }

    #[test]
    fn sandwich_holds_on_grid() {
        let plan = ReductionPlan {
            c: rat_int(2),
            dim: 2,
            low_exponent: 1,
            cut_exponent: 3,
        };
        for i in 0i64..1000 {
            let t = rat(i, 100);
            let g = dyadic_value(&t, &plan);
            let in_window = t >= pow2(1) && t < pow2(3);
            let cut = if in_window { t.clone() } else { Rat::zero() };
            assert!(g <= cut);
            assert!(cut <= rat_int(2) * &g);
        }
    }

    #[test]
    fn discretize_dyadic_catalog() {
        let law = ContinuousLaw::geometric_dyadic(3);
        let plan = choose_truncation(&law, &rat_int(2), 2, 32).unwrap();
        assert_eq!((plan.low_exponent, plan.cut_exponent), (1, 3));
        let disc = discretize(&law, &plan).unwrap();
        assert_eq!(disc.law.probs(), &[rat(1, 2), rat(1, 4), rat(1, 4)]);
        assert_eq!(disc.values.values(), &[rat_int(0), rat_int(2), rat_int(4)]);

        // tail condition transports at the same C, and code 1 holds the
        // required mass
        assert!(tail_condition_discrete(&disc.law, &disc.values, &rat_int(2)).holds);
        assert!(disc.law.prob(1) >= &rat(1, 2));
    }

    #[test]
    fn discretize_collapses_low_support() {
        let law = ContinuousLaw::two_point(rat(1, 4), rat(3, 2), rat(1, 3)).unwrap();
        let plan = ReductionPlan {
            c: rat_int(2),
            dim: 2,
            low_exponent: 1,
            cut_exponent: 3,
        };
        let disc = discretize(&law, &plan).unwrap();
        assert_eq!(disc.law.prob(1), &rat_int(1));
        assert!(disc.law.probs()[1..].iter().all(|p| p.is_zero()));
    }

    #[test]
    fn bucket_identity_on_grid() {
        let law = ContinuousLaw::geometric_dyadic(4);
        let plan = choose_truncation(&law, &rat_int(2), 1, 32).unwrap();
        let disc = discretize(&law, &plan).unwrap();
        // f'(code(t)) equals g(t) across a rational grid
        for i in 1i64..500 {
            let t = rat(i, 20);
            let g = dyadic_value(&t, &plan);
            let code = if t < pow2(plan.low_exponent) || t >= pow2(plan.cut_exponent) {
                1
            } else {
                let mut k = plan.low_exponent;
                while t >= pow2(k + 1) {
                    k += 1;
                }
                (k - plan.low_exponent + 2) as usize
            };
            assert_eq!(disc.values.value(code), &g);
        }
    }

    #[test]
    fn lift_cover_worked_cases() {
        use crate::cover::{CoordSet, CoverEntry};
        use crate::model::Configuration;

        let law = ContinuousLaw::geometric_dyadic(3);
        let plan = choose_truncation(&law, &rat_int(2), 2, 32).unwrap();
        let cover = Cover::new(vec![
            CoverEntry {
                x_star: Configuration(vec![3, 1]),
                witness_set: CoordSet::from([0]),
            },
            CoverEntry {
                x_star: Configuration(vec![1, 3]),
                witness_set: CoordSet::from([1]),
            },
        ]);
        let lifted = lift_cover(&cover, &plan, &law).unwrap();
        assert_eq!(lifted.entries.len(), 2);
        assert_eq!(lifted.tail_entries.len(), 2);
        assert_eq!(lifted.discrete_weight, rat(1, 2));
        assert_eq!(lifted.tail_weight, rat_int(0));
        assert_eq!(lifted.total_weight, rat(1, 2));
        assert!(lifted.within_bound);
        // thresholds hit the dyadic grid, so the continuous tail of each
        // lifted entry reproduces the discrete tail weight exactly
        let disc = discretize(&law, &plan).unwrap();
        for (entry, lifted_entry) in cover.entries.iter().zip(&lifted.entries) {
            let discrete: Rat = entry
                .witness_set
                .iter()
                .map(|&i| disc.law.tail(entry.x_star.code(i)))
                .product();
            let continuous: Rat = lifted_entry
                .thresholds
                .values()
                .map(|t| law.prob_geq(t))
                .product();
            assert_eq!(discrete, continuous);
        }

        // empty cover still emits the tail entries
        let law8 = ContinuousLaw::geometric_dyadic(4);
        let plan8 = ReductionPlan {
            c: rat_int(2),
            dim: 2,
            low_exponent: 1,
            cut_exponent: 3,
        };
        let lifted = lift_cover(&Cover::default(), &plan8, &law8).unwrap();
        assert_eq!(lifted.entries.len(), 0);
        assert_eq!(lifted.tail_entries.len(), 2);
        assert_eq!(lifted.tail_weight, rat(1, 4));
        assert_eq!(lifted.total_weight, rat(1, 4));
    }

    #[test]
    fn lift_cover_rejects_code_one_bindings() {
        use crate::cover::{CoordSet, CoverEntry};
        use crate::model::Configuration;

        let law = ContinuousLaw::geometric_dyadic(3);
        let plan = choose_truncation(&law, &rat_int(2), 2, 32).unwrap();
        let cover = Cover::new(vec![CoverEntry {
            x_star: Configuration(vec![1, 1]),
            witness_set: CoordSet::from([0]),
        }]);
        assert!(matches!(
            lift_cover(&cover, &plan, &law),
            Err(Error::MalformedEntry(_))
        ));
    }

    #[test]
    fn threshold_transform_worked_cases() {
        // K * E f = 3/4, cutoff at code 2, mapping is the identity
        let law = DiscreteLaw::new(vec![rat(1, 2), rat(1, 4), rat(1, 4)]).unwrap();
        let values = ValueMap::from_values(vec![rat_int(0), rat_int(1), rat_int(2)]).unwrap();
        match threshold_transform(&law, &values, 1).unwrap() {
            ThresholdTransform::Transformed(t) => {
                assert_eq!(t.cutoff_code, 2);
                assert_eq!(t.law.probs(), law.probs());
                assert_eq!(t.values.values(), values.values());
                assert!(t.identity_violations(&values).is_empty());
            }
            other => panic!("expected transform, got {other:?}"),
        }

        // threshold above every value
        match threshold_transform(&law, &values, 10).unwrap() {
            ThresholdTransform::TriviallyEmpty { threshold_value } => {
                assert_eq!(threshold_value, rat(15, 2));
            }
            other => panic!("expected trivial flag, got {other:?}"),
        }

        // K * E f = 5/4, cutoff 3; code 3 maps to 2 with value 4
        let law = DiscreteLaw::new(vec![rat(3, 4), rat(1, 8), rat(1, 8)]).unwrap();
        let values = ValueMap::from_values(vec![rat_int(0), rat_int(1), rat_int(4)]).unwrap();
        match threshold_transform(&law, &values, 2).unwrap() {
            ThresholdTransform::Transformed(t) => {
                assert_eq!(t.cutoff_code, 3);
                assert_eq!(t.code_map, vec![1, 1, 2]);
                assert_eq!(t.law.probs(), &[rat(7, 8), rat(1, 8)]);
                assert_eq!(t.values.values(), &[rat_int(0), rat_int(4)]);
                assert!(t.identity_violations(&values).is_empty());
            }
            other => panic!("expected transform, got {other:?}"),
        }
    }

    #[test]
    fn collapsing_transform_breaks_identity_at_cutoff() {
        let law = DiscreteLaw::new(vec![rat(1, 2), rat(1, 4), rat(1, 4)]).unwrap();
        let values = ValueMap::from_values(vec![rat_int(0), rat_int(1), rat_int(2)]).unwrap();
        match threshold_transform_collapsing(&law, &values, 1).unwrap() {
            ThresholdTransform::Transformed(t) => {
                let violations = t.identity_violations(&values);
                assert!(violations.contains(&t.cutoff_code));
            }
            other => panic!("expected transform, got {other:?}"),
        }
    }

    #[test]
    fn transform_mass_at_zero_respects_markov() {
        let law = DiscreteLaw::new(vec![rat(1, 2), rat(1, 4), rat(1, 4)]).unwrap();
        let values = ValueMap::from_values(vec![rat_int(0), rat_int(1), rat_int(2)]).unwrap();
        for k in 1..=4u64 {
            if let ThresholdTransform::Transformed(t) =
                threshold_transform(&law, &values, k).unwrap()
            {
                let bound = Rat::one() - rat(1, k as i64);
                assert!(t.law.prob(1) >= &bound, "K = {k}");
            }
        }
    }
}
