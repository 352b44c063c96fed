//! Batch verification harness: every combinatorial fact the cover
//! construction rests on is checked exhaustively over enumerated witness
//! data, on fixed instances and on seeded random batches. A violation of any
//! proved fact is an implementation defect and fails the run.

use crate::cover::{coordset_to_wire, verify_cover, weight_delta, CoordSet};
use crate::error::{Error, Result};
use crate::model::{
    expected_replica_supremum_exact, tail_condition_discrete, threshold_family, DiscreteLaw,
    Family, IndexSet, Instance, InstanceSpec, McEstimate, ReplicaMatrix, ThresholdSpec, ValueMap,
    MC_CHUNK,
};
use crate::rational::{
    binomial, ceil_affine_in_e, e_enclosure, format_rat, rat_pow, rat_to_f64, serde_rat, Rat,
};
use crate::witness::{
    chain_increments, class_partition_from_atlas, enumerate_bad, epsilon_certificate, BadAtlas,
    ClassKey,
};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::{BTreeMap, BTreeSet};

/// Outcome of one checker over one or more instances.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub instances_checked: u64,
    pub pairs_checked: u64,
    pub violations: Vec<Value>,
    /// True when nothing satisfied the check's hypotheses, so a clean pass
    /// carries no evidence.
    pub inconclusive: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub details: Value,
}

impl CheckReport {
    fn new(check: &str) -> Self {
        Self {
            check: check.into(),
            instances_checked: 1,
            pairs_checked: 0,
            violations: Vec::new(),
            inconclusive: false,
            notes: Vec::new(),
            details: Value::Null,
        }
    }

    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }

    fn finish(mut self) -> Self {
        self.inconclusive = self.pairs_checked == 0;
        self
    }
}

/// Precomputed data shared by all checkers on one instance.
pub struct VerifyContext<'a> {
    pub instance: &'a Instance,
    pub family: Family,
    pub atlas: BadAtlas,
}

impl<'a> VerifyContext<'a> {
    pub fn build(instance: &'a Instance, budget: u64) -> Result<Self> {
        let family = threshold_family(instance, budget)?;
        let atlas = enumerate_bad(instance, &family, budget)?;
        Ok(Self {
            instance,
            family,
            atlas,
        })
    }

    fn spec_json(&self) -> Value {
        serde_json::to_value(InstanceSpec::from_instance(self.instance)).unwrap_or(Value::Null)
    }

    fn violation(&self, detail: Value) -> Value {
        json!({ "instance": self.spec_json(), "detail": detail })
    }
}

fn at(sets: &[CoordSet], j: usize) -> CoordSet {
    sets.get(j - 1).cloned().unwrap_or_default()
}

fn set_wire(set: &CoordSet) -> Value {
    json!(coordset_to_wire(set))
}

/// Half of every heavy set is unmatched: `2 |matched ∩ heavy| <= |heavy|`.
pub fn check_half_heavy(ctx: &VerifyContext) -> CheckReport {
    let mut report = CheckReport::new("half-heavy");
    for replica in &ctx.atlas.bad {
        for (x_index, record) in replica.records.iter().enumerate() {
            report.pairs_checked += 1;
            let fam = &record.families;
            let overlap = fam.matched.intersection(&fam.heavy).count();
            if 2 * overlap > fam.heavy.len() {
                report.violations.push(ctx.violation(json!({
                    "x": ctx.family.members[x_index].config,
                    "y": replica.y,
                    "matched": set_wire(&fam.matched),
                    "heavy": set_wire(&fam.heavy),
                })));
            }
        }
    }
    report.finish()
}

/// Level-set bookkeeping: the witness gradation identity and the difference
/// identity for consecutive levels of the union chain.
pub fn check_level_identities(ctx: &VerifyContext) -> CheckReport {
    let mut report = CheckReport::new("level-identities");
    let n = ctx.instance.n();
    for replica in &ctx.atlas.bad {
        for (x_index, record) in replica.records.iter().enumerate() {
            report.pairs_checked += 1;
            let fam = &record.families;
            for j in 1..=n {
                // gradation: witness_at(j) = union over l >= j of
                // heavy_exact(l) \ reached(l)
                let mut union = CoordSet::new();
                for l in j..=n {
                    union.extend(
                        at(&fam.heavy_exact, l)
                            .difference(&at(&fam.reached, l))
                            .copied(),
                    );
                }
                if union != at(&fam.witness_at, j) {
                    report.violations.push(ctx.violation(json!({
                        "identity": "gradation",
                        "x": ctx.family.members[x_index].config,
                        "y": replica.y,
                        "level": j,
                        "expected": set_wire(&union),
                        "actual": set_wire(&at(&fam.witness_at, j)),
                    })));
                }
                // difference of consecutive union levels
                let lhs: CoordSet = {
                    let here: CoordSet = at(&fam.witness_at, j)
                        .union(&at(&fam.reached, j))
                        .copied()
                        .collect();
                    let next: CoordSet = at(&fam.witness_at, j + 1)
                        .union(&at(&fam.reached, j + 1))
                        .copied()
                        .collect();
                    here.difference(&next).copied().collect()
                };
                let rhs: CoordSet = {
                    let off: CoordSet = at(&fam.reached_exact, j)
                        .difference(&fam.witness_set)
                        .copied()
                        .collect();
                    at(&fam.witness_exact, j).union(&off).copied().collect()
                };
                if lhs != rhs {
                    report.violations.push(ctx.violation(json!({
                        "identity": "level-difference",
                        "x": ctx.family.members[x_index].config,
                        "y": replica.y,
                        "level": j,
                        "lhs": set_wire(&lhs),
                        "rhs": set_wire(&rhs),
                    })));
                }
            }
        }
    }
    report.finish()
}

/// Every per-replica cover covers the family, and each witness binds only
/// coordinates it dominates at positive values.
pub fn check_cover_properties(ctx: &VerifyContext) -> CheckReport {
    let mut report = CheckReport::new("cover-properties");
    for replica in &ctx.atlas.bad {
        let coverage = verify_cover(ctx.family.configs(), &replica.cover);
        if !coverage.covered {
            report.violations.push(ctx.violation(json!({
                "kind": "uncovered",
                "y": replica.y,
                "first_uncovered": coverage.first_uncovered,
            })));
        }
        for (x_index, record) in replica.records.iter().enumerate() {
            report.pairs_checked += 1;
            let x = &ctx.family.members[x_index].config;
            let witness = &ctx.family.members[record.witness_index].config;
            let wset = &replica.records[record.witness_index].families.witness_set;
            let dominated = wset.iter().all(|&i| {
                witness.code(i) <= x.code(i) && ctx.instance.value_of(witness.code(i)).is_positive()
            });
            if !dominated {
                report.violations.push(ctx.violation(json!({
                    "kind": "entry-does-not-dominate",
                    "x": x,
                    "y": replica.y,
                    "witness": witness,
                    "W": set_wire(wset),
                })));
            }
        }
    }
    report.finish()
}

/// Exact crossing certificates: F(eps) >= 0, F just above eps < 0, and the
/// limit beyond the last breakpoint < 0, on every enumerated pair.
pub fn check_epsilon_certificates(ctx: &VerifyContext) -> CheckReport {
    let mut report = CheckReport::new("epsilon-certificate");
    for replica in &ctx.atlas.bad {
        for (x_index, record) in replica.records.iter().enumerate() {
            report.pairs_checked += 1;
            let fam = &record.families;
            let cert = epsilon_certificate(&fam.weights, &fam.matched, &fam.epsilon);
            if cert.value_at_epsilon.is_negative()
                || !cert.value_at_probe.is_negative()
                || !cert.limit_value.is_negative()
            {
                report.violations.push(ctx.violation(json!({
                    "x": ctx.family.members[x_index].config,
                    "y": replica.y,
                    "epsilon": format_rat(&cert.epsilon),
                    "value_at_epsilon": format_rat(&cert.value_at_epsilon),
                    "probe": format_rat(&cert.probe),
                    "value_at_probe": format_rat(&cert.value_at_probe),
                    "limit_value": format_rat(&cert.limit_value),
                })));
            }
        }
    }
    report.finish()
}

/// Distinct (bad replica, witness) pairs grouped by the hypothesis triple
/// (heavy count, witness count, union chain).
fn qualifying_groups(ctx: &VerifyContext) -> BTreeMap<ClassKey, Vec<(usize, usize)>> {
    let mut groups: BTreeMap<ClassKey, BTreeSet<(usize, usize)>> = BTreeMap::new();
    for (y_index, replica) in ctx.atlas.bad.iter().enumerate() {
        for record in &replica.records {
            let witness_index = record.witness_index;
            let witness = &replica.records[witness_index].families;
            let key = ClassKey {
                heavy_count: witness.heavy.len(),
                witness_count: witness.witness_set.len(),
                chain: replica
                    .reached
                    .iter()
                    .zip(&witness.witness_at)
                    .map(|(r, w)| r.union(w).copied().collect())
                    .collect(),
            };
            groups
                .entry(key)
                .or_default()
                .insert((y_index, witness_index));
        }
    }
    groups
        .into_iter()
        .map(|(k, v)| (k, v.into_iter().collect()))
        .collect()
}

/// Threshold monotonicity across qualifying pairs, plus the counting
/// inequality behind it: on every ordered pair of (bad replica, witness)
/// entries sharing the hypothesis triple, the second witness's threshold
/// against its own replica is at most its threshold against the first one.
pub fn check_epsilon_monotone(ctx: &VerifyContext) -> CheckReport {
    let mut report = CheckReport::new("epsilon-monotone");
    let n = ctx.instance.n();
    for (_, entries) in qualifying_groups(ctx) {
        for &(y1, w1) in &entries {
            for &(y2, w2) in &entries {
                report.pairs_checked += 1;
                let own = &ctx.atlas.bad[y2].records[w2].families;
                let cross = &ctx.atlas.bad[y1].records[w2].families;
                if own.epsilon > cross.epsilon {
                    report.violations.push(ctx.violation(json!({
                        "kind": "epsilon-not-monotone",
                        "witness": ctx.family.members[w2].config,
                        "y_own": ctx.atlas.bad[y2].y,
                        "y_cross": ctx.atlas.bad[y1].y,
                        "epsilon_own": format_rat(&own.epsilon),
                        "epsilon_cross": format_rat(&cross.epsilon),
                    })));
                }
                // counting inequality between the two witness records
                let first = &ctx.atlas.bad[y1].records[w1].families;
                let second = own;
                let lhs: usize = (1..=n)
                    .map(|j| {
                        let open: CoordSet = at(&second.witness_at, j)
                            .difference(&at(&second.reached, j))
                            .copied()
                            .collect();
                        at(&second.heavy_exact, j).intersection(&open).count()
                    })
                    .sum();
                let rhs: usize = (1..=n)
                    .map(|j| {
                        let open: CoordSet = at(&first.witness_at, j)
                            .difference(&at(&first.reached, j))
                            .copied()
                            .collect();
                        at(&second.level_exact, j).intersection(&open).count()
                    })
                    .sum();
                if lhs < rhs {
                    report.violations.push(ctx.violation(json!({
                        "kind": "counting-inequality",
                        "witness_first": ctx.family.members[w1].config,
                        "witness_second": ctx.family.members[w2].config,
                        "y_first": ctx.atlas.bad[y1].y,
                        "y_second": ctx.atlas.bad[y2].y,
                        "lhs": lhs,
                        "rhs": rhs,
                    })));
                }
            }
        }
    }
    report.finish()
}

/// Witness-set containment across qualifying pairs: the first entry's
/// witness set sits inside the second entry's heavy set.
pub fn check_witness_containment(ctx: &VerifyContext) -> CheckReport {
    let mut report = CheckReport::new("witness-containment");
    for (_, entries) in qualifying_groups(ctx) {
        for &(y1, w1) in &entries {
            for &(y2, w2) in &entries {
                report.pairs_checked += 1;
                let first = &ctx.atlas.bad[y1].records[w1].families;
                let second = &ctx.atlas.bad[y2].records[w2].families;
                if !first.witness_set.is_subset(&second.heavy) {
                    report.violations.push(ctx.violation(json!({
                        "witness_first": ctx.family.members[w1].config,
                        "witness_second": ctx.family.members[w2].config,
                        "y_first": ctx.atlas.bad[y1].y,
                        "y_second": ctx.atlas.bad[y2].y,
                        "witness_set": set_wire(&first.witness_set),
                        "heavy": set_wire(&second.heavy),
                    })));
                }
            }
        }
    }
    report.finish()
}

/// Class sizes stay within the binomial bound, no class pairs a witness
/// count below half the heavy count, and every member sits inside the top
/// of its chain.
pub fn check_class_bound(ctx: &VerifyContext) -> CheckReport {
    let mut report = CheckReport::new("class-bound");
    let partition = class_partition_from_atlas(&ctx.atlas);
    for (key, members) in &partition.classes {
        report.pairs_checked += 1;
        let bound = binomial(key.heavy_count, key.witness_count);
        if BigInt::from(members.len()) > bound {
            report.violations.push(ctx.violation(json!({
                "kind": "class-too-large",
                "heavy_count": key.heavy_count,
                "witness_count": key.witness_count,
                "size": members.len(),
                "bound": bound.to_string(),
            })));
        }
        if 2 * key.witness_count < key.heavy_count {
            report.violations.push(ctx.violation(json!({
                "kind": "class-below-half",
                "heavy_count": key.heavy_count,
                "witness_count": key.witness_count,
            })));
        }
        if key.chain.windows(2).any(|w| !w[1].is_subset(&w[0])) {
            report.violations.push(ctx.violation(json!({
                "kind": "chain-not-decreasing",
                "heavy_count": key.heavy_count,
                "witness_count": key.witness_count,
            })));
        }
        for member in members {
            let top = key.chain.first().cloned().unwrap_or_default();
            if !member.witness_set.is_subset(&top) {
                report.violations.push(ctx.violation(json!({
                    "kind": "witness-outside-chain-top",
                    "witness_set": set_wire(&member.witness_set),
                    "chain_top": set_wire(&top),
                })));
            }
        }
    }
    report.finish()
}

/// Which hypotheses of the averaging argument the instance satisfies.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HypothesesReport {
    /// Tail condition at the audit C.
    pub tail_condition: bool,
    /// p_1 >= 1 - 1/K.
    pub mass_at_zero: bool,
    /// K >= ceil(12e / ((1 - 1/C) delta)).
    pub replica_count: bool,
    pub all: bool,
}

pub fn averaging_hypotheses(inst: &Instance, audit_c: &Rat) -> HypothesesReport {
    let tail_condition = tail_condition_discrete(&inst.law, &inst.values, audit_c).holds;
    let k = Rat::from_integer(BigInt::from(inst.replicas));
    let mass_at_zero = *inst.law.prob(1) >= Rat::one() - Rat::one() / &k;
    let one_minus = Rat::one() - Rat::one() / audit_c;
    let coeff = Rat::from_integer(12.into()) / (one_minus * &inst.delta);
    let needed = ceil_affine_in_e(&Rat::zero(), &coeff);
    let replica_count = BigInt::from(inst.replicas) >= needed;
    let all = tail_condition && mass_at_zero && replica_count;
    HypothesesReport {
        tail_condition,
        mass_at_zero,
        replica_count,
        all,
    }
}

fn replica_dot(inst: &Instance, maximizer_index: usize, col_sums: &[Rat]) -> Rat {
    inst.index_set
        .vector(maximizer_index)
        .iter()
        .zip(col_sums)
        .map(|(t, s)| t * s)
        .sum()
}

fn column_value_sums(inst: &Instance, y: &ReplicaMatrix) -> Vec<Rat> {
    (0..inst.dim())
        .map(|i| (0..y.replicas()).map(|l| inst.value_of(y.code(l, i))).sum())
        .collect()
}

/// Per-pair truncation bound: the matched share of the weight profile is at
/// most the replica value, which stays strictly below half the total weight.
fn audit_truncation_bounds(ctx: &VerifyContext, report: &mut CheckReport) {
    for replica in &ctx.atlas.bad {
        let col_sums = column_value_sums(ctx.instance, &replica.y);
        for (x_index, record) in replica.records.iter().enumerate() {
            report.pairs_checked += 1;
            let fam = &record.families;
            let member = &ctx.family.members[x_index];
            let matched_weight: Rat = fam.matched.iter().map(|&i| fam.weights[i].clone()).sum();
            let replica_value = replica_dot(ctx.instance, member.maximizer_index, &col_sums);
            let total_weight: Rat = fam.weights.iter().sum();
            let half_total = total_weight / Rat::from_integer(2.into());
            if !(matched_weight <= replica_value && replica_value < half_total) {
                report.violations.push(ctx.violation(json!({
                    "kind": "truncation-bound",
                    "x": member.config,
                    "y": replica.y,
                    "matched_weight": format_rat(&matched_weight),
                    "replica_value": format_rat(&replica_value),
                    "half_total": format_rat(&half_total),
                })));
            }
        }
    }
}

/// Per-entry inflation bound: tail weight <= (1-1/C)^{-|W|} point weight,
/// with the level-wise product identity for the tail side.
fn audit_entry_inflation(ctx: &VerifyContext, audit_c: &Rat, report: &mut CheckReport) {
    let factor = Rat::one() - Rat::one() / audit_c;
    for replica in &ctx.atlas.bad {
        for record in &replica.records {
            let witness_fam = &replica.records[record.witness_index].families;
            let witness = &ctx.family.members[record.witness_index].config;
            let wset = &witness_fam.witness_set;
            let tail_w: Rat = wset
                .iter()
                .map(|&i| ctx.instance.law.tail(witness.code(i)))
                .product();
            let point_w: Rat = wset
                .iter()
                .map(|&i| ctx.instance.law.prob(witness.code(i)).clone())
                .product();
            // level-wise regrouping of the same product
            let regrouped: Rat = (1..=ctx.instance.n())
                .map(|k| {
                    rat_pow(
                        &ctx.instance.law.tail(k),
                        at(&witness_fam.witness_exact, k).len(),
                    )
                })
                .product();
            if regrouped != tail_w {
                report.violations.push(ctx.violation(json!({
                    "kind": "tail-product-identity",
                    "witness": witness,
                    "y": replica.y,
                })));
            }
            if &tail_w * rat_pow(&factor, wset.len()) > point_w {
                report.violations.push(ctx.violation(json!({
                    "kind": "inflation-bound",
                    "witness": witness,
                    "y": replica.y,
                    "tail_weight": format_rat(&tail_w),
                    "point_weight": format_rat(&point_w),
                })));
            }
        }
    }
}

/// Chain reconstruction identities: the chain increments split into the
/// witness part and the replica part exactly.
fn audit_chain_reconstruction(ctx: &VerifyContext, report: &mut CheckReport) {
    for replica in &ctx.atlas.bad {
        for (x_index, record) in replica.records.iter().enumerate() {
            let witness_fam = &replica.records[record.witness_index].families;
            let wset = &witness_fam.witness_set;
            let chain = replica.chain_for(x_index);
            let increments = chain_increments(&chain);
            for k in 1..=ctx.instance.n() {
                let inc = &increments[k - 1];
                let in_w: CoordSet = inc.intersection(wset).copied().collect();
                let off_w: CoordSet = inc.difference(wset).copied().collect();
                let expected_in = at(&witness_fam.witness_exact, k);
                let expected_off: CoordSet = at(&replica.reached_exact, k)
                    .difference(wset)
                    .copied()
                    .collect();
                if in_w != expected_in || off_w != expected_off {
                    report.violations.push(ctx.violation(json!({
                        "kind": "chain-reconstruction",
                        "x": ctx.family.members[x_index].config,
                        "y": replica.y,
                        "level": k,
                    })));
                }
            }
        }
    }
}

/// Law-level bound: for codes k >= 2, the probability that the running
/// maximum of K draws lands exactly at k is at least K p_k / e. Requires
/// p_1 >= 1 - 1/K; certified against the lower enclosure endpoint of e.
fn audit_max_increment_bound(inst: &Instance, report: &mut CheckReport, ctx: &VerifyContext) {
    let k = inst.replicas;
    let (e_lo, _) = e_enclosure(30);
    for code in 2..=inst.n() {
        let hi = rat_pow(&inst.law.cumulative(code), k);
        let lo = rat_pow(&inst.law.cumulative(code - 1), k);
        let bound = Rat::from_integer(BigInt::from(k)) * inst.law.prob(code) / &e_lo;
        if &hi - &lo < bound {
            report.violations.push(ctx.violation(json!({
                "kind": "max-increment-bound",
                "code": code,
                "lhs": format_rat(&(&hi - &lo)),
                "rhs_upper": format_rat(&bound),
            })));
        }
    }
}

/// Exact class-probability bound: the mass of bad replica matrices
/// producing a given witness set within a class is at most the product of
/// max-increment probabilities over the off-witness chain increments.
fn audit_class_probability(ctx: &VerifyContext, report: &mut CheckReport) {
    let k = ctx.instance.replicas;
    let partition = class_partition_from_atlas(&ctx.atlas);
    for members in partition.classes.values() {
        for member in members {
            let mut bound = Rat::one();
            for (level, off) in member.off_chain.iter().enumerate() {
                let code = level + 1;
                let hi = rat_pow(&ctx.instance.law.cumulative(code), k);
                let lo = rat_pow(&ctx.instance.law.cumulative(code - 1), k);
                bound *= rat_pow(&(hi - lo), off.len());
            }
            if member.probability > bound {
                report.violations.push(ctx.violation(json!({
                    "kind": "class-probability-bound",
                    "witness_set": set_wire(&member.witness_set),
                    "probability": format_rat(&member.probability),
                    "bound": format_rat(&bound),
                })));
            }
        }
    }
}

/// Full probability audit: exact P(bad), the per-pair and per-entry chain
/// inequalities, the chain reconstruction identities, the class-probability
/// bound, and (when the averaging hypotheses hold) the closing geometric
/// bound and the averaging consequence.
pub fn check_bad_probability(ctx: &VerifyContext, audit_c: &Rat) -> CheckReport {
    let mut report = CheckReport::new("bad-probability");
    let inst = ctx.instance;
    let hyps = averaging_hypotheses(inst, audit_c);
    if inst.law.is_point_mass_at_one() {
        report.notes.push("law is a point mass at code 1".into());
    }

    audit_truncation_bounds(ctx, &mut report);
    if hyps.tail_condition {
        audit_entry_inflation(ctx, audit_c, &mut report);
    } else {
        report
            .notes
            .push("tail condition fails at audit C; inflation bound not applicable".into());
    }
    audit_chain_reconstruction(ctx, &mut report);
    if hyps.mass_at_zero {
        audit_max_increment_bound(inst, &mut report, ctx);
    } else {
        report
            .notes
            .push("p_1 < 1 - 1/K; max-increment bound not applicable".into());
    }
    audit_class_probability(ctx, &mut report);

    // weighted cover mass over bad replica matrices
    let weighted_mass: Rat = ctx
        .atlas
        .bad
        .iter()
        .map(|r| &r.probability * weight_delta(&r.cover, &inst.law))
        .sum();
    let half_delta = &inst.delta / Rat::from_integer(2.into());

    if hyps.all {
        let (_, e_hi) = e_enclosure(30);
        let one_minus = Rat::one() - Rat::one() / audit_c;
        let four_e = Rat::from_integer(4.into()) * &e_hi;
        let denom = Rat::from_integer(BigInt::from(inst.replicas)) * &one_minus - &four_e;
        let closing_ok = denom.is_positive() && four_e / &denom <= half_delta;
        if !closing_ok {
            report.violations.push(ctx.violation(json!({
                "kind": "closing-geometric-bound",
                "replicas": inst.replicas,
            })));
        }
        if weighted_mass > half_delta {
            report.violations.push(ctx.violation(json!({
                "kind": "weighted-cover-mass",
                "weighted_mass": format_rat(&weighted_mass),
                "half_delta": format_rat(&half_delta),
            })));
        }
        if ctx.atlas.bad_probability > Rat::new(BigInt::one(), BigInt::from(2)) {
            let light = ctx
                .atlas
                .bad
                .iter()
                .find(|r| weight_delta(&r.cover, &inst.law) < inst.delta);
            if light.is_none() {
                report.violations.push(ctx.violation(json!({
                    "kind": "averaging-consequence",
                    "bad_probability": format_rat(&ctx.atlas.bad_probability),
                })));
            }
        }
    } else {
        report.notes.push(format!(
            "averaging hypotheses not all met (tail={}, mass={}, replicas={}); \
             closing bound skipped",
            hyps.tail_condition, hyps.mass_at_zero, hyps.replica_count
        ));
    }

    report.details = json!({
        "bad_probability": format_rat(&ctx.atlas.bad_probability),
        "bad_count": ctx.atlas.bad.len(),
        "weighted_cover_mass": format_rat(&weighted_mass),
        "hypotheses": hyps,
    });
    report.finish()
}

/// Contrapositive audit of the replica-mean lower bound: either the mean
/// meets a quarter of the threshold, or a light cover must exist among the
/// per-replica covers whenever the averaging hypotheses hold.
pub fn check_replica_mean(ctx: &VerifyContext, audit_c: &Rat, budget: u64) -> CheckReport {
    let mut report = CheckReport::new("replica-mean");
    let inst = ctx.instance;
    if ctx.family.is_empty() {
        report
            .notes
            .push("family is empty; nothing to audit".into());
        return report.finish();
    }
    let mean = match expected_replica_supremum_exact(inst, &ctx.family, budget) {
        Ok(m) => m,
        Err(e) => {
            report
                .notes
                .push(format!("exact replica mean unavailable: {e}"));
            return report.finish();
        }
    };
    report.pairs_checked = 1;
    let quarter_threshold = &ctx.family.threshold / Rat::from_integer(4.into());
    if mean >= quarter_threshold {
        report.details = json!({
            "replica_mean": format_rat(&mean),
            "quarter_threshold": format_rat(&quarter_threshold),
            "conclusion": "satisfied",
        });
        return report.finish();
    }
    // mean below the quarter threshold: search the per-replica covers for a
    // light certificate
    let hyps = averaging_hypotheses(inst, audit_c);
    let best = ctx
        .atlas
        .bad
        .iter()
        .map(|r| (weight_delta(&r.cover, &inst.law), r))
        .min_by(|a, b| a.0.cmp(&b.0));
    match best {
        Some((weight, replica)) if weight <= inst.delta => {
            // re-verify the certificate through the cover module
            let coverage = verify_cover(ctx.family.configs(), &replica.cover);
            if !coverage.covered {
                report.violations.push(ctx.violation(json!({
                    "kind": "certificate-reverification",
                    "y": replica.y,
                })));
            }
            report.details = json!({
                "replica_mean": format_rat(&mean),
                "quarter_threshold": format_rat(&quarter_threshold),
                "conclusion": "light cover certificate",
                "certificate": {
                    "y": replica.y,
                    "cover": replica.cover,
                    "delta_weight": format_rat(&weight),
                },
            });
        }
        other => {
            let found = other.map(|(w, _)| format_rat(&w));
            if hyps.all {
                report.violations.push(ctx.violation(json!({
                    "kind": "no-light-cover",
                    "replica_mean": format_rat(&mean),
                    "lightest_weight": found,
                })));
            } else {
                report.notes.push(format!(
                    "mean {} below quarter threshold but averaging hypotheses not met; \
                     lightest cover weight {:?}",
                    format_rat(&mean),
                    found
                ));
                report.details = json!({
                    "replica_mean": format_rat(&mean),
                    "quarter_threshold": format_rat(&quarter_threshold),
                    "conclusion": "hypotheses not met",
                });
            }
        }
    }
    report.finish()
}

/// All checkers over one prepared context.
pub fn run_all_checks(ctx: &VerifyContext, audit_c: &Rat, budget: u64) -> Vec<CheckReport> {
    vec![
        check_half_heavy(ctx),
        check_level_identities(ctx),
        check_cover_properties(ctx),
        check_epsilon_certificates(ctx),
        check_epsilon_monotone(ctx),
        check_witness_containment(ctx),
        check_class_bound(ctx),
        check_bad_probability(ctx, audit_c),
        check_replica_mean(ctx, audit_c, budget),
    ]
}

/// Seeded random instance within the desk-scale envelope (d <= 3, n <= 3,
/// K <= 2, |T| <= 4, rational data with small numerators).
pub fn random_instance(seed: u64, stream: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let draw =
        |rng: &mut ChaCha8Rng, lo: u64, hi: u64| -> u64 { lo + rng.next_u64() % (hi - lo + 1) };
    let d = draw(&mut rng, 1, 3) as usize;
    let n = draw(&mut rng, 2, 3) as usize;
    let k = draw(&mut rng, 1, 2) as usize;
    let m = draw(&mut rng, 1, 4) as usize;

    let weights: Vec<u64> = loop {
        let w: Vec<u64> = (0..n).map(|_| draw(&mut rng, 0, 8)).collect();
        if w.iter().sum::<u64>() > 0 {
            break w;
        }
    };
    let total: u64 = weights.iter().sum();
    let probs: Vec<Rat> = weights
        .iter()
        .map(|&w| Rat::new(BigInt::from(w), BigInt::from(total)))
        .collect();
    let law = DiscreteLaw::new(probs).expect("normalized weights form a law");

    let mut values = vec![Rat::zero()];
    for _ in 1..n {
        let inc = Rat::new(
            BigInt::from(draw(&mut rng, 1, 4)),
            BigInt::from(draw(&mut rng, 1, 3)),
        );
        let prev = values.last().cloned().unwrap();
        values.push(prev + inc);
    }
    let values = ValueMap::new(values, true).expect("increments keep f increasing");

    let vectors: Vec<Vec<Rat>> = loop {
        let vs: Vec<Vec<Rat>> = (0..m)
            .map(|_| {
                (0..d)
                    .map(|_| {
                        Rat::new(
                            BigInt::from(draw(&mut rng, 0, 4)),
                            BigInt::from(draw(&mut rng, 1, 2)),
                        )
                    })
                    .collect()
            })
            .collect();
        if vs.iter().any(|v| v.iter().any(|c| c.is_positive())) {
            break vs;
        }
    };
    let index_set = IndexSet::new(d, vectors).expect("vectors validated by construction");

    let delta = match draw(&mut rng, 0, 2) {
        0 => Rat::new(BigInt::one(), BigInt::from(4)),
        1 => Rat::new(BigInt::one(), BigInt::from(2)),
        _ => Rat::one(),
    };

    // threshold strictly below the attainable maximum so the family is
    // nonempty; the all-top configuration realizes the maximum
    let probe = Instance::new(
        law.clone(),
        values.clone(),
        index_set.clone(),
        k,
        delta.clone(),
        ThresholdSpec::Explicit(Rat::one()),
    )
    .expect("probe instance");
    let top = crate::model::Configuration(vec![n; d]);
    let (_, vmax) = crate::model::maximizer(&probe, &top);
    let ratio = match draw(&mut rng, 0, 2) {
        0 => Rat::new(BigInt::one(), BigInt::from(4)),
        1 => Rat::new(BigInt::one(), BigInt::from(2)),
        _ => Rat::new(BigInt::from(3), BigInt::from(4)),
    };
    let threshold = vmax * ratio;
    Instance::new(
        law,
        values,
        index_set,
        k,
        delta,
        ThresholdSpec::Explicit(threshold),
    )
    .expect("randomized instance is valid")
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub instances: u64,
    pub seed: u64,
    pub budget: u64,
    #[serde(with = "serde_rat")]
    pub audit_c: Rat,
    pub fail_fast: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            instances: 200,
            seed: 7,
            budget: crate::model::DEFAULT_BUDGET,
            audit_c: Rat::from_integer(2.into()),
            fail_fast: false,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteReport {
    pub instances: u64,
    pub seed: u64,
    #[serde(with = "serde_rat")]
    pub audit_c: Rat,
    pub checks: Vec<CheckReport>,
    pub qualifying_pairs: u64,
    pub all_pass: bool,
}

/// Runs the full checker battery over a seeded batch of random instances
/// and aggregates per check. Instance-level work runs in parallel; the
/// aggregation order is by instance stream, so reports are deterministic.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    let one = |stream: u64| -> Result<Vec<CheckReport>> {
        let inst = random_instance(config.seed, stream);
        let ctx = VerifyContext::build(&inst, config.budget)?;
        Ok(run_all_checks(&ctx, &config.audit_c, config.budget))
    };
    let outcomes: Vec<Vec<CheckReport>> = if config.fail_fast {
        let mut acc = Vec::new();
        for stream in 0..config.instances {
            let reports = one(stream)?;
            let failed = reports.iter().any(|r| !r.pass());
            acc.push(reports);
            if failed {
                break;
            }
        }
        acc
    } else {
        (0..config.instances)
            .into_par_iter()
            .map(one)
            .collect::<Result<Vec<_>>>()?
    };

    let mut aggregated: BTreeMap<String, CheckReport> = BTreeMap::new();
    for (stream, reports) in outcomes.iter().enumerate() {
        for report in reports {
            let entry = aggregated
                .entry(report.check.clone())
                .or_insert_with(|| CheckReport {
                    check: report.check.clone(),
                    instances_checked: 0,
                    pairs_checked: 0,
                    violations: Vec::new(),
                    inconclusive: false,
                    notes: Vec::new(),
                    details: Value::Null,
                });
            entry.instances_checked += 1;
            entry.pairs_checked += report.pairs_checked;
            for v in &report.violations {
                entry
                    .violations
                    .push(json!({ "stream": stream, "violation": v }));
            }
        }
    }
    let checks: Vec<CheckReport> = aggregated
        .into_values()
        .map(|mut r| {
            r.inconclusive = r.pairs_checked == 0;
            r
        })
        .collect();
    let qualifying_pairs = checks
        .iter()
        .filter(|c| c.check == "epsilon-monotone" || c.check == "witness-containment")
        .map(|c| c.pairs_checked)
        .sum();
    let all_pass = checks.iter().all(|c| c.pass());
    Ok(SuiteReport {
        instances: outcomes.len() as u64,
        seed: config.seed,
        audit_c: config.audit_c.clone(),
        checks,
        qualifying_pairs,
        all_pass,
    })
}

/// Seeded Monte Carlo audit of badness: estimates P(bad) and the weighted
/// cover mass, and checks the per-sample chain facts on every bad draw.
#[derive(Clone, Debug, Serialize)]
pub struct McBadAudit {
    pub samples: u64,
    pub bad_samples: u64,
    pub bad_probability: McEstimate,
    pub weighted_cover_mass: McEstimate,
    pub hypotheses: HypothesesReport,
    pub violations: Vec<Value>,
    /// Law-level max-increment and closing bounds (when applicable).
    pub law_bounds_pass: bool,
}

pub fn mc_bad_audit(
    inst: &Instance,
    family: &Family,
    samples: u64,
    seed: u64,
    audit_c: &Rat,
) -> Result<McBadAudit> {
    if family.is_empty() {
        return Err(Error::EmptyFamily(
            "badness audit over an empty family is vacuous".into(),
        ));
    }
    if samples < 2 {
        return Err(Error::Config("need at least two samples".into()));
    }
    let hyps = averaging_hypotheses(inst, audit_c);

    // law-level bounds, once
    let mut law_report = CheckReport::new("mc-law-bounds");
    let ctx = VerifyContext {
        instance: inst,
        family: family.clone(),
        atlas: BadAtlas {
            bad: vec![],
            bad_probability: Rat::zero(),
            total_enumerated: 0,
        },
    };
    if hyps.mass_at_zero {
        audit_max_increment_bound(inst, &mut law_report, &ctx);
    }
    let mut law_bounds_pass = law_report.pass();
    if hyps.all {
        let (_, e_hi) = e_enclosure(30);
        let one_minus = Rat::one() - Rat::one() / audit_c;
        let four_e = Rat::from_integer(4.into()) * &e_hi;
        let denom = Rat::from_integer(BigInt::from(inst.replicas)) * &one_minus - &four_e;
        let half_delta = &inst.delta / Rat::from_integer(2.into());
        law_bounds_pass &= denom.is_positive() && four_e / &denom <= half_delta;
    }

    let sampler = crate::model::CodeSampler::new(&inst.law);
    let d = inst.dim();
    let k = inst.replicas;
    let chunks = samples.div_ceil(MC_CHUNK);
    struct ChunkOut {
        sum_bad: f64,
        sum_w: f64,
        sumsq_w: f64,
        bad_count: u64,
        violations: Vec<Value>,
    }
    let partials: Vec<ChunkOut> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let lo = c * MC_CHUNK;
            let hi = ((c + 1) * MC_CHUNK).min(samples);
            let mut out = ChunkOut {
                sum_bad: 0.0,
                sum_w: 0.0,
                sumsq_w: 0.0,
                bad_count: 0,
                violations: Vec::new(),
            };
            for _ in lo..hi {
                let rows: Vec<Vec<usize>> = (0..k)
                    .map(|_| (0..d).map(|_| sampler.draw(&mut rng)).collect())
                    .collect();
                let y = ReplicaMatrix::new(rows);
                if !crate::witness::is_bad(inst, family, &y) {
                    continue;
                }
                out.bad_count += 1;
                out.sum_bad += 1.0;
                match audit_one_bad_sample(inst, family, &y, audit_c, hyps.tail_condition) {
                    Ok((weight, mut sample_violations)) => {
                        let w = rat_to_f64(&weight);
                        out.sum_w += w;
                        out.sumsq_w += w * w;
                        out.violations.append(&mut sample_violations);
                    }
                    Err(e) => out.violations.push(json!({
                        "kind": "audit-error",
                        "error": e.to_string(),
                    })),
                }
            }
            out
        })
        .collect();

    let mut sum_bad = 0.0;
    let mut sum_w = 0.0;
    let mut sumsq_w = 0.0;
    let mut bad_samples = 0u64;
    let mut violations = Vec::new();
    for mut p in partials {
        sum_bad += p.sum_bad;
        sum_w += p.sum_w;
        sumsq_w += p.sumsq_w;
        bad_samples += p.bad_count;
        violations.append(&mut p.violations);
    }
    let n = samples as f64;
    let estimate = |sum: f64, sumsq: f64| -> McEstimate {
        let mean = sum / n;
        let var = ((sumsq - sum * sum / n) / (n - 1.0)).max(0.0);
        McEstimate {
            estimate: mean,
            std_error: (var / n).sqrt(),
            samples,
        }
    };
    // the badness indicator is 0/1, so its square equals itself
    Ok(McBadAudit {
        samples,
        bad_samples,
        bad_probability: estimate(sum_bad, sum_bad),
        weighted_cover_mass: estimate(sum_w, sumsq_w),
        hypotheses: hyps,
        violations,
        law_bounds_pass,
    })
}

/// Chain facts on one sampled bad replica matrix; returns the cover weight.
fn audit_one_bad_sample(
    inst: &Instance,
    family: &Family,
    y: &ReplicaMatrix,
    audit_c: &Rat,
    tail_condition: bool,
) -> Result<(Rat, Vec<Value>)> {
    let mut violations = Vec::new();
    let col_sums = column_value_sums(inst, y);
    let (reached, reached_exact) = crate::witness::reached_sets(inst.n(), inst.dim(), y);
    let factor = Rat::one() - Rat::one() / audit_c;

    let mut all_families = Vec::with_capacity(family.len());
    for member in &family.members {
        all_families.push(crate::witness::index_families(inst, member, y)?);
    }
    let mut cover_entries: Vec<crate::cover::CoverEntry> = Vec::new();
    for (x_index, member) in family.members.iter().enumerate() {
        let fam = &all_families[x_index];
        // truncation bound
        let matched_weight: Rat = fam.matched.iter().map(|&i| fam.weights[i].clone()).sum();
        let replica_value = replica_dot(inst, member.maximizer_index, &col_sums);
        let half_total: Rat = fam.weights.iter().sum::<Rat>() / Rat::from_integer(2.into());
        if !(matched_weight <= replica_value && replica_value < half_total) {
            violations.push(json!({
                "kind": "truncation-bound",
                "x": member.config,
                "y": y,
            }));
        }
        // witness selection and per-entry facts
        let sel = crate::witness::select_witness(inst, family, y, x_index)?;
        let witness_fam = &all_families[sel.witness_index];
        let witness = &family.members[sel.witness_index].config;
        let wset = &sel.witness_set;
        if tail_condition {
            let tail_w: Rat = wset
                .iter()
                .map(|&i| inst.law.tail(witness.code(i)))
                .product();
            let point_w: Rat = wset
                .iter()
                .map(|&i| inst.law.prob(witness.code(i)).clone())
                .product();
            if &tail_w * rat_pow(&factor, wset.len()) > point_w {
                violations.push(json!({
                    "kind": "inflation-bound",
                    "witness": witness,
                    "y": y,
                }));
            }
        }
        // chain reconstruction
        let chain: Vec<CoordSet> = reached
            .iter()
            .zip(&witness_fam.witness_at)
            .map(|(r, w)| r.union(w).copied().collect())
            .collect();
        let increments = chain_increments(&chain);
        for level in 1..=inst.n() {
            let inc = &increments[level - 1];
            let in_w: CoordSet = inc.intersection(wset).copied().collect();
            let off_w: CoordSet = inc.difference(wset).copied().collect();
            let expected_in = at(&witness_fam.witness_exact, level);
            let expected_off: CoordSet = at(&reached_exact, level)
                .difference(wset)
                .copied()
                .collect();
            if in_w != expected_in || off_w != expected_off {
                violations.push(json!({
                    "kind": "chain-reconstruction",
                    "x": member.config,
                    "y": y,
                    "level": level,
                }));
            }
        }
        cover_entries.push(crate::cover::CoverEntry {
            x_star: witness.clone(),
            witness_set: wset.clone(),
        });
    }
    cover_entries.sort();
    cover_entries.dedup();
    let cover = crate::cover::Cover::new(cover_entries);
    let coverage = verify_cover(family.configs(), &cover);
    if !coverage.covered {
        violations.push(json!({ "kind": "uncovered", "y": y }));
    }
    Ok((weight_delta(&cover, &inst.law), violations))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};

    fn i1() -> Instance {
        let law = DiscreteLaw::new(vec![rat(1, 2), rat(1, 4), rat(1, 4)]).unwrap();
        let values = ValueMap::from_values(vec![rat_int(0), rat_int(1), rat_int(2)]).unwrap();
        let t = IndexSet::new(
            2,
            vec![
                vec![rat_int(1), rat_int(0)],
                vec![rat_int(0), rat_int(1)],
                vec![rat(1, 2), rat(1, 2)],
            ],
        )
        .unwrap();
        Instance::new(
            law,
            values,
            t,
            2,
            rat(1, 2),
            ThresholdSpec::Explicit(rat(3, 2)),
        )
        .unwrap()
    }

    #[test]
    fn all_checks_pass_on_worked_instance() {
        let inst = i1();
        let ctx = VerifyContext::build(&inst, 100_000).unwrap();
        let reports = run_all_checks(&ctx, &rat_int(2), 100_000);
        for report in &reports {
            assert!(
                report.pass(),
                "{} failed: {:?}",
                report.check,
                report.violations
            );
        }
        let pier = reports.iter().find(|r| r.check == "half-heavy").unwrap();
        assert_eq!(pier.pairs_checked, 5);
    }

    #[test]
    fn empty_family_checks_are_inconclusive() {
        let mut inst = i1();
        inst.threshold = ThresholdSpec::Explicit(rat_int(100));
        let ctx = VerifyContext::build(&inst, 100_000).unwrap();
        let report = check_half_heavy(&ctx);
        assert!(report.pass());
        assert!(report.inconclusive);
        let report = check_replica_mean(&ctx, &rat_int(2), 100_000);
        assert!(report.pass());
        assert!(report.inconclusive);
    }

    #[test]
    fn replica_mean_conclusion_satisfied_on_worked_instance() {
        let inst = i1();
        let ctx = VerifyContext::build(&inst, 100_000).unwrap();
        let report = check_replica_mean(&ctx, &rat_int(2), 100_000);
        assert!(report.pass());
        assert_eq!(report.details["conclusion"], "satisfied");
        assert_eq!(report.details["replica_mean"], "275/128");
    }

    #[test]
    fn replica_mean_certificate_on_thin_selector() {
        // tiny success probability: the replica mean falls below a quarter
        // of the threshold and the unique bad matrix certifies a light cover
        let law = DiscreteLaw::new(vec![rat(99, 100), rat(1, 100)]).unwrap();
        let values = ValueMap::from_values(vec![rat_int(0), rat_int(1)]).unwrap();
        let t = IndexSet::new(
            2,
            vec![vec![rat_int(1), rat_int(0)], vec![rat_int(0), rat_int(1)]],
        )
        .unwrap();
        let inst = Instance::new(
            law,
            values,
            t,
            1,
            rat(1, 2),
            ThresholdSpec::Explicit(rat(1, 2)),
        )
        .unwrap();
        let ctx = VerifyContext::build(&inst, 100_000).unwrap();
        let report = check_replica_mean(&ctx, &rat_int(2), 100_000);
        assert!(report.pass(), "{:?}", report.violations);
        assert_eq!(report.details["conclusion"], "light cover certificate");
    }

    #[test]
    fn small_random_suite_is_clean_and_deterministic() {
        let config = SuiteConfig {
            instances: 12,
            seed: 99,
            ..SuiteConfig::default()
        };
        let a = run_suite(&config).unwrap();
        let b = run_suite(&config).unwrap();
        assert!(a.all_pass, "{:?}", a.checks);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        assert!(a.qualifying_pairs > 0);
    }

    #[test]
    fn mc_audit_on_worked_instance() {
        let inst = i1();
        let family = threshold_family(&inst, 100_000).unwrap();
        let audit = mc_bad_audit(&inst, &family, 4096, 5, &rat_int(2)).unwrap();
        assert!(audit.violations.is_empty(), "{:?}", audit.violations);
        // exact P(bad) = 1/16
        assert!(
            (audit.bad_probability.estimate - 0.0625).abs()
                <= 4.0 * audit.bad_probability.std_error + 1e-12
        );
        assert!(audit.law_bounds_pass);

        let again = mc_bad_audit(&inst, &family, 4096, 5, &rat_int(2)).unwrap();
        assert_eq!(
            audit.bad_probability.estimate.to_bits(),
            again.bad_probability.estimate.to_bits()
        );
        assert_eq!(
            audit.weighted_cover_mass.estimate.to_bits(),
            again.weighted_cover_mass.estimate.to_bits()
        );
    }
}
