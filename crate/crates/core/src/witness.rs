//! Witness machinery over a threshold family: exact threshold profiles and
//! their piecewise-linear crossing point, index families, badness of replica
//! matrices, admissibility, deterministic witness selection, per-replica
//! covers, and the counting classes that bound how many witness sets share a
//! signature.
//!
//! Because value maps are strictly increasing, every comparison of values
//! `f(a) >= f(b)` is done on codes directly; rationals enter only through
//! the weights `t^x_i * f(x(i))` and the crossing point computation.

use crate::cover::{CoordSet, Cover, CoverEntry};
use crate::error::{Error, Result};
use crate::model::{
    check_budget, enumerate_configs, Configuration, Family, FamilyMember, Instance, ReplicaMatrix,
};
use crate::rational::{format_rat, Rat};
use num_traits::{Signed, Zero};
use std::collections::BTreeMap;

fn require_zero_base(inst: &Instance) -> Result<()> {
    if inst.values.zero_base() {
        Ok(())
    } else {
        Err(Error::InvalidValueMap(
            "witness machinery requires a zero-based value map (f(1) = 0)".into(),
        ))
    }
}

/// Per-coordinate weights `t^x_i * f(x(i))` of a family member.
pub fn weight_profile(inst: &Instance, member: &FamilyMember) -> Vec<Rat> {
    let t = inst.index_set.vector(member.maximizer_index);
    (0..inst.dim())
        .map(|i| &t[i] * inst.value_of(member.config.code(i)))
        .collect()
}

/// Coordinates where some replica reaches the configuration's own code.
pub fn matched_set(x: &Configuration, y: &ReplicaMatrix) -> CoordSet {
    (0..x.dim())
        .filter(|&i| y.max_code(i) >= x.code(i))
        .collect()
}

/// Largest threshold at which the matched share of the truncated weight
/// profile still accounts for half of the total truncated weight.
///
/// The underlying function
/// `F(e) = sum_{i in matched} min(w_i, e) - 1/2 sum_i min(w_i, e)`
/// is piecewise linear with breakpoints at the distinct positive weights,
/// starts at `F(0) = 0`, and is eventually the constant
/// `sum_matched w - 1/2 sum w`. The returned value is `sup { e : F(e) >= 0 }`,
/// found by an exact right-to-left breakpoint scan.
pub fn epsilon_from_profile(weights: &[Rat], matched: &CoordSet) -> Result<Rat> {
    let total: Rat = weights.iter().sum();
    let matched_total: Rat = matched.iter().map(|&i| weights[i].clone()).sum();
    let limit = &matched_total - &total / Rat::from_integer(2.into());
    if !limit.is_negative() {
        return Err(Error::PreconditionViolation(format!(
            "matched weight {} is at least half of the total weight {}; \
             the crossing function never becomes negative",
            format_rat(&matched_total),
            format_rat(&total),
        )));
    }

    let mut breakpoints: Vec<Rat> = weights
        .iter()
        .filter(|w| w.is_positive())
        .cloned()
        .collect();
    breakpoints.sort();
    breakpoints.dedup();

    let eval = |e: &Rat| -> Rat {
        let covered: Rat = matched
            .iter()
            .map(|&i| weights[i].clone().min(e.clone()))
            .sum();
        let all: Rat = weights.iter().map(|w| w.clone().min(e.clone())).sum();
        covered - all / Rat::from_integer(2.into())
    };

    let values: Vec<Rat> = breakpoints.iter().map(&eval).collect();
    // scan segments right to left; F(0) = 0 guarantees termination
    for k in (0..breakpoints.len()).rev() {
        let right_val = &values[k];
        if !right_val.is_negative() {
            return Ok(breakpoints[k].clone());
        }
        let (left, left_val) = if k == 0 {
            (Rat::zero(), Rat::zero())
        } else {
            (breakpoints[k - 1].clone(), values[k - 1].clone())
        };
        if left_val.is_positive() {
            let span = &breakpoints[k] - &left;
            let drop = &left_val - right_val;
            return Ok(left + span * left_val / drop);
        }
        if left_val.is_zero() {
            return Ok(left);
        }
    }
    Ok(Rat::zero())
}

/// Exact certificate that `epsilon` is the crossing point of the profile.
#[derive(Clone, Debug)]
pub struct EpsilonCertificate {
    pub epsilon: Rat,
    /// F at epsilon; nonnegative by construction.
    pub value_at_epsilon: Rat,
    /// Midpoint between epsilon and the next breakpoint above (or epsilon+1).
    pub probe: Rat,
    /// F at the probe; strictly negative by maximality of epsilon.
    pub value_at_probe: Rat,
    /// Constant value of F beyond the largest breakpoint; strictly negative.
    pub limit_value: Rat,
}

pub fn epsilon_certificate(
    weights: &[Rat],
    matched: &CoordSet,
    epsilon: &Rat,
) -> EpsilonCertificate {
    let eval = |e: &Rat| -> Rat {
        let covered: Rat = matched
            .iter()
            .map(|&i| weights[i].clone().min(e.clone()))
            .sum();
        let all: Rat = weights.iter().map(|w| w.clone().min(e.clone())).sum();
        covered - all / Rat::from_integer(2.into())
    };
    let next = weights
        .iter()
        .filter(|w| *w > epsilon)
        .min()
        .cloned()
        .unwrap_or_else(|| epsilon + Rat::from_integer(1.into()));
    let probe = (epsilon + &next) / Rat::from_integer(2.into());
    let total: Rat = weights.iter().sum();
    let matched_total: Rat = matched.iter().map(|&i| weights[i].clone()).sum();
    EpsilonCertificate {
        epsilon: epsilon.clone(),
        value_at_epsilon: eval(epsilon),
        value_at_probe: eval(&probe),
        probe,
        limit_value: matched_total - total / Rat::from_integer(2.into()),
    }
}

/// All index families of a `(x, y)` pair at its exact threshold.
///
/// Level-indexed vectors hold level `j` at position `j - 1`; level `n + 1`
/// is empty by convention.
#[derive(Clone, Debug)]
pub struct IndexFamilies {
    pub epsilon: Rat,
    pub weights: Vec<Rat>,
    /// Coordinates whose weight strictly exceeds epsilon.
    pub heavy: CoordSet,
    /// Coordinates where some replica reaches the configuration's code.
    pub matched: CoordSet,
    /// Heavy coordinates unmatched by every replica: the witness set.
    pub witness_set: CoordSet,
    /// Coordinates with code >= j.
    pub level: Vec<CoordSet>,
    /// Coordinates with code == j.
    pub level_exact: Vec<CoordSet>,
    /// heavy restricted to level j.
    pub heavy_at: Vec<CoordSet>,
    /// heavy restricted to code == j.
    pub heavy_exact: Vec<CoordSet>,
    /// matched restricted to level j.
    pub matched_at: Vec<CoordSet>,
    /// Coordinates where some replica reaches level j.
    pub reached: Vec<CoordSet>,
    /// Coordinates whose largest replica code equals j.
    pub reached_exact: Vec<CoordSet>,
    /// witness set restricted to level j.
    pub witness_at: Vec<CoordSet>,
    /// witness_at(j) minus witness_at(j+1).
    pub witness_exact: Vec<CoordSet>,
}

/// Replica-level sets: position j-1 holds the coordinates whose largest
/// replica code is at least j (respectively exactly j).
pub fn reached_sets(n: usize, dim: usize, y: &ReplicaMatrix) -> (Vec<CoordSet>, Vec<CoordSet>) {
    let max_codes: Vec<usize> = (0..dim).map(|i| y.max_code(i)).collect();
    let mut reached = Vec::with_capacity(n);
    let mut reached_exact = Vec::with_capacity(n);
    for j in 1..=n {
        reached.push((0..dim).filter(|&i| max_codes[i] >= j).collect());
        reached_exact.push((0..dim).filter(|&i| max_codes[i] == j).collect());
    }
    (reached, reached_exact)
}

fn families_with_reached(
    inst: &Instance,
    member: &FamilyMember,
    reached: &[CoordSet],
    reached_exact: &[CoordSet],
    y: &ReplicaMatrix,
) -> Result<IndexFamilies> {
    let n = inst.n();
    let dim = inst.dim();
    let weights = weight_profile(inst, member);
    let matched = matched_set(&member.config, y);
    let epsilon = epsilon_from_profile(&weights, &matched)?;

    let heavy: CoordSet = (0..dim).filter(|&i| weights[i] > epsilon).collect();
    let witness_set: CoordSet = heavy.difference(&matched).copied().collect();

    let mut level = Vec::with_capacity(n);
    let mut level_exact = Vec::with_capacity(n);
    let mut heavy_at = Vec::with_capacity(n);
    let mut heavy_exact = Vec::with_capacity(n);
    let mut matched_at = Vec::with_capacity(n);
    let mut witness_at = Vec::with_capacity(n);
    for j in 1..=n {
        let lvl: CoordSet = (0..dim).filter(|&i| member.config.code(i) >= j).collect();
        let lvl_eq: CoordSet = (0..dim).filter(|&i| member.config.code(i) == j).collect();
        heavy_at.push(heavy.intersection(&lvl).copied().collect());
        heavy_exact.push(heavy.intersection(&lvl_eq).copied().collect());
        matched_at.push(matched.intersection(&lvl).copied().collect());
        witness_at.push(witness_set.intersection(&lvl).copied().collect());
        level.push(lvl);
        level_exact.push(lvl_eq);
    }
    let witness_exact: Vec<CoordSet> = (0..n)
        .map(|idx| {
            let next: CoordSet = witness_at.get(idx + 1).cloned().unwrap_or_default();
            witness_at[idx].difference(&next).copied().collect()
        })
        .collect();

    let families = IndexFamilies {
        epsilon,
        weights,
        heavy,
        matched,
        witness_set,
        level,
        level_exact,
        heavy_at,
        heavy_exact,
        matched_at,
        reached: reached.to_vec(),
        reached_exact: reached_exact.to_vec(),
        witness_at,
        witness_exact,
    };
    debug_assert!(families.check_internal_identities());
    Ok(families)
}

/// Full index-family computation for one `(x, y)` pair.
pub fn index_families(
    inst: &Instance,
    member: &FamilyMember,
    y: &ReplicaMatrix,
) -> Result<IndexFamilies> {
    require_zero_base(inst)?;
    let (reached, reached_exact) = reached_sets(inst.n(), inst.dim(), y);
    families_with_reached(inst, member, &reached, &reached_exact, y)
}

impl IndexFamilies {
    fn n(&self) -> usize {
        self.level.len()
    }

    /// Level accessor with the `n + 1 -> empty` convention.
    pub fn at(sets: &[CoordSet], j: usize) -> CoordSet {
        sets.get(j - 1).cloned().unwrap_or_default()
    }

    fn check_internal_identities(&self) -> bool {
        let n = self.n();
        // witness set equals its own level-1 restriction
        if self.witness_set != self.witness_at[0] {
            return false;
        }
        for j in 1..=n {
            // witness_exact(j) = heavy_exact(j) minus reached(j)
            let direct: CoordSet = self.heavy_exact[j - 1]
                .difference(&self.reached[j - 1])
                .copied()
                .collect();
            if direct != self.witness_exact[j - 1] {
                return false;
            }
            // witness_at(j) = union over l >= j of heavy_exact(l) \ reached(l)
            let mut union = CoordSet::new();
            for l in j..=n {
                union.extend(
                    self.heavy_exact[l - 1]
                        .difference(&self.reached[l - 1])
                        .copied(),
                );
            }
            if union != self.witness_at[j - 1] {
                return false;
            }
        }
        true
    }
}

/// A replica matrix is bad when no family member extracts more than half the
/// threshold from it. An empty family makes every matrix bad (sup over the
/// empty set is treated as zero).
pub fn is_bad(inst: &Instance, family: &Family, y: &ReplicaMatrix) -> bool {
    if family.is_empty() {
        return true;
    }
    let value = crate::model::replica_supremum_value(inst, &family.distinct_maximizer_indices(), y);
    value * Rat::from_integer(2.into()) <= family.threshold
}

fn admissible_by_families(
    candidate_families: &IndexFamilies,
    candidate: &Configuration,
    x: &Configuration,
) -> bool {
    let short_form = candidate_families
        .witness_set
        .iter()
        .all(|&i| candidate.code(i) <= x.code(i));
    debug_assert_eq!(short_form, {
        // quantified form: every level j binds witness_at(j) under x
        (1..=candidate_families.n()).all(|j| {
            candidate_families.witness_at[j - 1]
                .iter()
                .all(|&i| j <= x.code(i))
        })
    });
    short_form
}

/// Admissibility of a family member as a witness candidate for `x`: its
/// witness set must sit coordinatewise below `x`.
pub fn is_admissible(
    inst: &Instance,
    family: &Family,
    y: &ReplicaMatrix,
    candidate_index: usize,
    x: &Configuration,
) -> Result<bool> {
    let candidate = &family.members[candidate_index];
    let families = index_families(inst, candidate, y)?;
    Ok(admissible_by_families(&families, &candidate.config, x))
}

/// Chosen witness for one family member against a bad replica matrix.
#[derive(Clone, Debug)]
pub struct WitnessSelection {
    /// Index of the witness in the family.
    pub witness_index: usize,
    /// Its witness set against y.
    pub witness_set: CoordSet,
}

fn select_witness_from(
    family: &Family,
    all_families: &[IndexFamilies],
    x_index: usize,
) -> WitnessSelection {
    let x = &family.members[x_index].config;
    let mut best: Option<(usize, usize, usize)> = None; // (|heavy|, |witness|, index)
    for (idx, candidate) in family.members.iter().enumerate() {
        let fam = &all_families[idx];
        if !admissible_by_families(fam, &candidate.config, x) {
            continue;
        }
        let key = (fam.heavy.len(), fam.witness_set.len(), idx);
        if best.is_none_or(|b| key < b) {
            best = Some(key);
        }
    }
    let (_, _, witness_index) =
        best.expect("x is always admissible for itself, so a witness exists");
    WitnessSelection {
        witness_index,
        witness_set: all_families[witness_index].witness_set.clone(),
    }
}

/// Deterministic witness choice: among admissible members minimize the heavy
/// count, then the witness-set size, then lexicographic order.
pub fn select_witness(
    inst: &Instance,
    family: &Family,
    y: &ReplicaMatrix,
    x_index: usize,
) -> Result<WitnessSelection> {
    require_zero_base(inst)?;
    let (reached, reached_exact) = reached_sets(inst.n(), inst.dim(), y);
    let all_families: Result<Vec<IndexFamilies>> = family
        .members
        .iter()
        .map(|m| families_with_reached(inst, m, &reached, &reached_exact, y))
        .collect();
    let all_families = all_families?;
    let selection = select_witness_from(family, &all_families, x_index);

    // selected entries bind only coordinates they dominate, at positive values
    let witness = &family.members[selection.witness_index].config;
    let x = &family.members[x_index].config;
    debug_assert!(selection.witness_set.iter().all(|&i| {
        inst.value_of(witness.code(i)).is_positive() && witness.code(i) <= x.code(i)
    }));
    Ok(selection)
}

/// The deduplicated cover assembled from all witnesses of a bad replica
/// matrix. Covers the family by construction.
pub fn build_cover_for_y(inst: &Instance, family: &Family, y: &ReplicaMatrix) -> Result<Cover> {
    require_zero_base(inst)?;
    if family.is_empty() {
        return Ok(Cover::default());
    }
    let (reached, reached_exact) = reached_sets(inst.n(), inst.dim(), y);
    let all_families: Result<Vec<IndexFamilies>> = family
        .members
        .iter()
        .map(|m| families_with_reached(inst, m, &reached, &reached_exact, y))
        .collect();
    let all_families = all_families?;
    let mut entries: Vec<CoverEntry> = Vec::new();
    for x_index in 0..family.members.len() {
        let sel = select_witness_from(family, &all_families, x_index);
        entries.push(CoverEntry {
            x_star: family.members[sel.witness_index].config.clone(),
            witness_set: sel.witness_set,
        });
    }
    entries.sort();
    entries.dedup();
    Ok(Cover::new(entries))
}

/// One family member's witness data against a fixed bad replica matrix.
#[derive(Clone, Debug)]
pub struct WitnessRecord {
    pub families: IndexFamilies,
    pub witness_index: usize,
}

/// Everything computed for one bad replica matrix.
#[derive(Clone, Debug)]
pub struct BadReplica {
    pub y: ReplicaMatrix,
    pub probability: Rat,
    pub reached: Vec<CoordSet>,
    pub reached_exact: Vec<CoordSet>,
    /// One record per family member, index-aligned.
    pub records: Vec<WitnessRecord>,
    pub cover: Cover,
}

impl BadReplica {
    /// Witness chain `Z(j) = reached(j) union witness_at(j)` of the witness
    /// serving family member `x_index`.
    pub fn chain_for(&self, x_index: usize) -> Vec<CoordSet> {
        let witness = &self.records[self.records[x_index].witness_index].families;
        self.reached
            .iter()
            .zip(&witness.witness_at)
            .map(|(r, w)| r.union(w).copied().collect())
            .collect()
    }
}

/// Exhaustive enumeration of bad replica matrices with their witness data.
#[derive(Clone, Debug)]
pub struct BadAtlas {
    pub bad: Vec<BadReplica>,
    pub bad_probability: Rat,
    pub total_enumerated: u128,
}

pub fn enumerate_bad(inst: &Instance, family: &Family, budget: u64) -> Result<BadAtlas> {
    require_zero_base(inst)?;
    let cells = inst.replicas * inst.dim();
    let total_enumerated = check_budget("n^(K*d)", inst.n(), cells, budget)?;
    let t_indices = family.distinct_maximizer_indices();
    let mut bad = Vec::new();
    let mut bad_probability = Rat::zero();
    for codes in enumerate_configs(inst.n(), cells) {
        let rows: Vec<Vec<usize>> = codes.chunks(inst.dim()).map(|c| c.to_vec()).collect();
        let y = ReplicaMatrix::new(rows);
        let value = if family.is_empty() {
            Rat::zero()
        } else {
            crate::model::replica_supremum_value(inst, &t_indices, &y)
        };
        if value * Rat::from_integer(2.into()) > family.threshold {
            continue;
        }
        let probability: Rat = codes.iter().map(|&c| inst.law.prob(c)).product();
        bad_probability += &probability;
        let (reached, reached_exact) = reached_sets(inst.n(), inst.dim(), &y);
        let all_families: Result<Vec<IndexFamilies>> = family
            .members
            .iter()
            .map(|m| families_with_reached(inst, m, &reached, &reached_exact, &y))
            .collect();
        let all_families = all_families?;
        let mut entries: Vec<CoverEntry> = Vec::new();
        let mut records = Vec::with_capacity(all_families.len());
        for x_index in 0..family.members.len() {
            let sel = select_witness_from(family, &all_families, x_index);
            entries.push(CoverEntry {
                x_star: family.members[sel.witness_index].config.clone(),
                witness_set: sel.witness_set,
            });
            records.push(sel.witness_index);
        }
        entries.sort();
        entries.dedup();
        let records = all_families
            .into_iter()
            .zip(records)
            .map(|(families, witness_index)| WitnessRecord {
                families,
                witness_index,
            })
            .collect();
        bad.push(BadReplica {
            y,
            probability,
            reached,
            reached_exact,
            records,
            cover: Cover::new(entries),
        });
    }
    Ok(BadAtlas {
        bad,
        bad_probability,
        total_enumerated,
    })
}

/// Signature shared by all members of one counting class.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ClassKey {
    /// |heavy| of the generating witness.
    pub heavy_count: usize,
    /// |witness set| of the generating witness.
    pub witness_count: usize,
    /// The decreasing chain `Z(j) = reached(j) union witness_at(j)`.
    pub chain: Vec<CoordSet>,
}

/// A witness set inside a class, with the split of the chain increments it
/// induces and the total probability of the bad matrices that produced it.
#[derive(Clone, Debug)]
pub struct ClassMember {
    pub witness_set: CoordSet,
    /// `Z(j) \ Z(j+1)` intersected with the witness set, per level.
    pub in_chain: Vec<CoordSet>,
    /// `Z(j) \ Z(j+1)` minus the witness set, per level.
    pub off_chain: Vec<CoordSet>,
    pub probability: Rat,
}

#[derive(Clone, Debug, Default)]
pub struct ClassPartition {
    pub classes: BTreeMap<ClassKey, Vec<ClassMember>>,
}

impl ClassPartition {
    pub fn total_members(&self) -> usize {
        self.classes.values().map(|v| v.len()).sum()
    }
}

/// Chain increments `Z(j) \ Z(j+1)`, with `Z(n+1)` empty.
pub fn chain_increments(chain: &[CoordSet]) -> Vec<CoordSet> {
    (0..chain.len())
        .map(|idx| {
            let next = chain.get(idx + 1).cloned().unwrap_or_default();
            chain[idx].difference(&next).copied().collect()
        })
        .collect()
}

/// Groups every witness set produced over all bad replica matrices by its
/// class signature.
pub fn class_partition_from_atlas(atlas: &BadAtlas) -> ClassPartition {
    let mut classes: BTreeMap<ClassKey, BTreeMap<CoordSet, ClassMember>> = BTreeMap::new();
    for replica in &atlas.bad {
        // each (key, witness set) pair counts this y's probability once
        let mut seen: BTreeMap<ClassKey, std::collections::BTreeSet<CoordSet>> = BTreeMap::new();
        for x_index in 0..replica.records.len() {
            let witness = &replica.records[replica.records[x_index].witness_index].families;
            let chain = replica.chain_for(x_index);
            debug_assert!(chain.windows(2).all(|w| w[1].is_subset(&w[0])));
            let key = ClassKey {
                heavy_count: witness.heavy.len(),
                witness_count: witness.witness_set.len(),
                chain,
            };
            let wset = witness.witness_set.clone();
            if !seen.entry(key.clone()).or_default().insert(wset.clone()) {
                continue;
            }
            let increments = chain_increments(&key.chain);
            let in_chain: Vec<CoordSet> = increments
                .iter()
                .map(|z| z.intersection(&wset).copied().collect())
                .collect();
            let off_chain: Vec<CoordSet> = increments
                .iter()
                .map(|z| z.difference(&wset).copied().collect())
                .collect();
            let class = classes.entry(key).or_default();
            class
                .entry(wset.clone())
                .and_modify(|m| m.probability += &replica.probability)
                .or_insert(ClassMember {
                    witness_set: wset,
                    in_chain,
                    off_chain,
                    probability: replica.probability.clone(),
                });
        }
    }
    ClassPartition {
        classes: classes
            .into_iter()
            .map(|(k, v)| (k, v.into_values().collect()))
            .collect(),
    }
}

/// Budgeted end-to-end class partition.
pub fn class_partition(inst: &Instance, family: &Family, budget: u64) -> Result<ClassPartition> {
    let atlas = enumerate_bad(inst, family, budget)?;
    Ok(class_partition_from_atlas(&atlas))
}
