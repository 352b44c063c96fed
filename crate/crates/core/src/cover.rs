//! Covers: families of threshold events `{x(i) >= x_star(i) for i in W}`,
//! the covering check against a family, and the three exact smallness
//! weights (tail, point-mass, dyadic-interval).

use crate::error::{Error, Result};
use crate::model::{Configuration, DiscreteLaw, ValueMap};
use crate::rational::{format_rat, rat_pow, Rat};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Subset of coordinates, 0-based internally, 1-based on the wire.
pub type CoordSet = BTreeSet<usize>;

pub fn coordset_to_wire(set: &CoordSet) -> Vec<usize> {
    set.iter().map(|i| i + 1).collect()
}

pub fn coordset_from_wire(raw: &[usize], dim: usize) -> Result<CoordSet> {
    let mut set = CoordSet::new();
    for &i in raw {
        if i == 0 || i > dim {
            return Err(Error::Config(format!(
                "coordinate {i} outside 1..={dim} in W"
            )));
        }
        set.insert(i - 1);
    }
    Ok(set)
}

/// One cover entry: a base point and the coordinates on which it binds.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct CoverEntry {
    pub x_star: Configuration,
    pub witness_set: CoordSet,
}

impl CoverEntry {
    /// True when `x` dominates the base point on every bound coordinate.
    pub fn admits(&self, x: &Configuration) -> bool {
        self.witness_set
            .iter()
            .all(|&i| x.code(i) >= self.x_star.code(i))
    }

    /// Entries emitted by the witness machinery bind only coordinates whose
    /// base value is positive; arbitrary user-supplied entries may not.
    pub fn has_positive_values(&self, values: &ValueMap) -> bool {
        self.witness_set
            .iter()
            .all(|&i| values.value(self.x_star.code(i)).is_positive())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct CoverEntryWire {
    x_star: Vec<usize>,
    #[serde(rename = "W")]
    witness_set: Vec<usize>,
}

impl Serialize for CoverEntry {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CoverEntryWire {
            x_star: self.x_star.0.clone(),
            witness_set: coordset_to_wire(&self.witness_set),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CoverEntry {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = CoverEntryWire::deserialize(d)?;
        let dim = wire.x_star.len();
        let witness_set =
            coordset_from_wire(&wire.witness_set, dim).map_err(serde::de::Error::custom)?;
        Ok(CoverEntry {
            x_star: Configuration(wire.x_star),
            witness_set,
        })
    }
}

/// A cover: a list of entries. Duplicates are kept and weigh in with
/// multiplicity; entries with an empty W are legal and weigh 1.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Cover {
    pub entries: Vec<CoverEntry>,
}

impl Cover {
    pub fn new(entries: Vec<CoverEntry>) -> Self {
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Result of the covering check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoverReport {
    pub covered: bool,
    pub first_uncovered: Option<Configuration>,
}

/// Checks that every configuration is admitted by some entry; reports the
/// first failure in the given order (families are stored lexicographically).
pub fn verify_cover<'a, I>(family: I, cover: &Cover) -> CoverReport
where
    I: IntoIterator<Item = &'a Configuration>,
{
    for x in family {
        if !cover.entries.iter().any(|e| e.admits(x)) {
            return CoverReport {
                covered: false,
                first_uncovered: Some(x.clone()),
            };
        }
    }
    CoverReport {
        covered: true,
        first_uncovered: None,
    }
}

/// Tail weight: sum over entries of `prod_{i in W} P(X >= x_star(i))`.
pub fn weight_delta(cover: &Cover, law: &DiscreteLaw) -> Rat {
    cover
        .entries
        .iter()
        .map(|e| {
            e.witness_set
                .iter()
                .map(|&i| law.tail(e.x_star.code(i)))
                .product::<Rat>()
        })
        .sum()
}

/// Point-mass weight: sum over entries of `prod_{i in W} P(X = x_star(i))`.
pub fn weight_weak(cover: &Cover, law: &DiscreteLaw) -> Rat {
    cover
        .entries
        .iter()
        .map(|e| {
            e.witness_set
                .iter()
                .map(|&i| law.prob(e.x_star.code(i)).clone())
                .product::<Rat>()
        })
        .sum()
}

/// Survival (upper tail) function of a nonnegative variable, queryable at
/// exact rationals. `prob_gt` is the right limit, needed when atoms sit at
/// interval endpoints.
pub trait SurvivalTail {
    /// P(X >= t)
    fn prob_geq(&self, t: &Rat) -> Rat;
    /// P(X > t)
    fn prob_gt(&self, t: &Rat) -> Rat;
}

/// Wraps closures as a survival function (atomless: both tails agree).
pub struct FnSurvival<F: Fn(&Rat) -> Rat>(pub F);

impl<F: Fn(&Rat) -> Rat> SurvivalTail for FnSurvival<F> {
    fn prob_geq(&self, t: &Rat) -> Rat {
        (self.0)(t)
    }
    fn prob_gt(&self, t: &Rat) -> Rat {
        (self.0)(t)
    }
}

/// Cover entry with continuous (rational) per-coordinate thresholds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThresholdEntry {
    /// coordinate (0-based) -> threshold
    pub thresholds: BTreeMap<usize, Rat>,
}

impl Serialize for ThresholdEntry {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let wire: BTreeMap<String, String> = self
            .thresholds
            .iter()
            .map(|(i, t)| ((i + 1).to_string(), format_rat(t)))
            .collect();
        wire.serialize(s)
    }
}

/// Interval weight: sum over entries of `prod_{i in W} P(X in [a_i, 2 a_i])`
/// computed as `prob_geq(a) - prob_gt(2a)` from the supplied tail.
pub fn weight_interval<S: SurvivalTail + ?Sized>(
    entries: &[ThresholdEntry],
    survival: &S,
) -> Result<Rat> {
    let mut total = Rat::zero();
    for entry in entries {
        let mut product = Rat::one();
        for threshold in entry.thresholds.values() {
            let double = threshold * Rat::from_integer(2.into());
            let lo = survival.prob_geq(threshold);
            let hi = survival.prob_gt(&double);
            if hi > lo {
                return Err(Error::SurvivalNotMonotone {
                    at: format_rat(threshold),
                    to: format_rat(&double),
                });
            }
            product *= lo - hi;
        }
        total += product;
    }
    Ok(total)
}

/// Per-entry tail weight bounded by the point-mass weight inflated by
/// `(1 - 1/C)^{-|W|}`; holds whenever the law passes the tail condition at C.
pub fn pikachu_bound_holds(cover: &Cover, law: &DiscreteLaw, c: &Rat) -> bool {
    let factor = Rat::one() - Rat::one() / c;
    cover.entries.iter().all(|e| {
        let tail_w: Rat = e
            .witness_set
            .iter()
            .map(|&i| law.tail(e.x_star.code(i)))
            .product();
        let point_w: Rat = e
            .witness_set
            .iter()
            .map(|&i| law.prob(e.x_star.code(i)).clone())
            .product();
        tail_w * rat_pow(&factor, e.witness_set.len()) <= point_w
    })
}
