//! Laws, value maps, index sets and instances, plus exact and Monte Carlo
//! evaluation of expected suprema of the induced positive canonical process.
//!
//! Codes are 1-based throughout: a law on `[n]` takes values `1..=n`, and a
//! value map assigns each code a nonnegative rational. In witness mode the
//! value map is zero-based (`f(1) = 0`), so "positive value" means code >= 2.

use crate::error::{Error, Result};
use crate::rational::{
    format_rat, parse_rat, rat_to_f64, serde_rat, serde_rat_mat, serde_rat_vec, Rat,
};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Default cap on enumerated states for exact operations.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Samples per Monte Carlo chunk. Fixed so that estimates are reproducible
/// for a given seed regardless of the number of worker threads.
pub const MC_CHUNK: u64 = 1024;

/// Exact probability vector over the 1-based support `[n]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscreteLaw {
    probs: Vec<Rat>,
    tails: Vec<Rat>,
}

impl DiscreteLaw {
    pub fn new(probs: Vec<Rat>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidLaw("support must be nonempty".into()));
        }
        if let Some(k) = probs.iter().position(|p| p.is_negative()) {
            return Err(Error::InvalidLaw(format!(
                "p[{}] = {} is negative",
                k + 1,
                format_rat(&probs[k])
            )));
        }
        let total: Rat = probs.iter().sum();
        if !total.is_one() {
            return Err(Error::InvalidLaw(format!(
                "probabilities sum to {}, not 1",
                format_rat(&total)
            )));
        }
        let mut tails = vec![Rat::zero(); probs.len()];
        let mut acc = Rat::zero();
        for k in (0..probs.len()).rev() {
            acc += &probs[k];
            tails[k] = acc.clone();
        }
        Ok(Self { probs, tails })
    }

    pub fn n(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[Rat] {
        &self.probs
    }

    /// P(X = code), 1-based.
    pub fn prob(&self, code: usize) -> &Rat {
        &self.probs[code - 1]
    }

    /// P(X >= code); `code` may be `n + 1`, giving 0.
    pub fn tail(&self, code: usize) -> Rat {
        if code > self.probs.len() {
            Rat::zero()
        } else {
            self.tails[code - 1].clone()
        }
    }

    /// P(X <= code); `code` 0 gives 0.
    pub fn cumulative(&self, code: usize) -> Rat {
        if code == 0 {
            Rat::zero()
        } else if code >= self.probs.len() {
            Rat::one()
        } else {
            Rat::one() - &self.tails[code]
        }
    }

    /// True when all mass sits on code 1.
    pub fn is_point_mass_at_one(&self) -> bool {
        self.probs[0].is_one()
    }
}

/// Strictly increasing assignment of rational values to codes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueMap {
    values: Vec<Rat>,
    zero_base: bool,
}

impl ValueMap {
    pub fn new(values: Vec<Rat>, zero_base: bool) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidValueMap("value map must be nonempty".into()));
        }
        if values[0].is_negative() {
            return Err(Error::InvalidValueMap(format!(
                "f(1) = {} is negative",
                format_rat(&values[0])
            )));
        }
        for k in 1..values.len() {
            if values[k] <= values[k - 1] {
                return Err(Error::InvalidValueMap(format!(
                    "not strictly increasing at code {}: f({}) = {} >= f({}) = {}",
                    k + 1,
                    k,
                    format_rat(&values[k - 1]),
                    k + 1,
                    format_rat(&values[k])
                )));
            }
        }
        if zero_base && !values[0].is_zero() {
            return Err(Error::InvalidValueMap(format!(
                "zero-based value map must have f(1) = 0, got {}",
                format_rat(&values[0])
            )));
        }
        Ok(Self { values, zero_base })
    }

    /// Infers the zero-base flag from the first value.
    pub fn from_values(values: Vec<Rat>) -> Result<Self> {
        let zero_base = values.first().map(Rat::is_zero).unwrap_or(false);
        Self::new(values, zero_base)
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn zero_base(&self) -> bool {
        self.zero_base
    }

    /// f(code), 1-based.
    pub fn value(&self, code: usize) -> &Rat {
        &self.values[code - 1]
    }

    pub fn values(&self) -> &[Rat] {
        &self.values
    }

    pub fn expectation(&self, law: &DiscreteLaw) -> Rat {
        self.values
            .iter()
            .zip(law.probs())
            .map(|(v, p)| v * p)
            .sum()
    }
}

/// Finite index set T of nonnegative vectors; the stored order is part of the
/// identity because maximizer ties break to the smallest index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexSet {
    dim: usize,
    vectors: Vec<Vec<Rat>>,
}

impl IndexSet {
    pub fn new(dim: usize, vectors: Vec<Vec<Rat>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidIndexSet("dimension must be positive".into()));
        }
        if vectors.is_empty() {
            return Err(Error::InvalidIndexSet("index set must be nonempty".into()));
        }
        for (j, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::InvalidIndexSet(format!(
                    "vector {} has {} coordinates, expected {}",
                    j,
                    v.len(),
                    dim
                )));
            }
            if let Some(i) = v.iter().position(|c| c.is_negative()) {
                return Err(Error::InvalidIndexSet(format!(
                    "vector {} has negative coordinate at position {}",
                    j, i
                )));
            }
        }
        Ok(Self { dim, vectors })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vector(&self, idx: usize) -> &[Rat] {
        &self.vectors[idx]
    }

    pub fn vectors(&self) -> &[Vec<Rat>] {
        &self.vectors
    }
}

/// Threshold level for the family: explicit, or a multiple of the expected
/// supremum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ThresholdSpec {
    Explicit(Rat),
    MultipleOfMean(Rat),
}

/// A point of `[n]^d`, 1-based codes.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Configuration(pub Vec<usize>);

impl Configuration {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Code at coordinate `i` (0-based coordinate index).
    pub fn code(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn validate(&self, n: usize, d: usize) -> Result<()> {
        if self.0.len() != d {
            return Err(Error::Config(format!(
                "configuration has {} coordinates, expected {}",
                self.0.len(),
                d
            )));
        }
        for (i, &c) in self.0.iter().enumerate() {
            if c == 0 || c > n {
                return Err(Error::Config(format!(
                    "configuration code {} at coordinate {} is outside 1..={}",
                    c,
                    i + 1,
                    n
                )));
            }
        }
        Ok(())
    }
}

/// K independent replica rows over `[n]^d`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ReplicaMatrix {
    pub rows: Vec<Vec<usize>>,
}

impl ReplicaMatrix {
    pub fn new(rows: Vec<Vec<usize>>) -> Self {
        Self { rows }
    }

    pub fn replicas(&self) -> usize {
        self.rows.len()
    }

    /// Code of replica `l` at coordinate `i` (both 0-based).
    pub fn code(&self, l: usize, i: usize) -> usize {
        self.rows[l][i]
    }

    /// Largest code seen at coordinate `i` across replicas.
    pub fn max_code(&self, i: usize) -> usize {
        self.rows.iter().map(|row| row[i]).max().unwrap_or(1)
    }

    pub fn all_ones(replicas: usize, dim: usize) -> Self {
        Self {
            rows: vec![vec![1; dim]; replicas],
        }
    }

    pub fn validate(&self, n: usize, d: usize, replicas: usize) -> Result<()> {
        if self.rows.len() != replicas {
            return Err(Error::Config(format!(
                "replica matrix has {} rows, expected {}",
                self.rows.len(),
                replicas
            )));
        }
        for (l, row) in self.rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::Config(format!(
                    "replica row {} has {} entries, expected {}",
                    l + 1,
                    row.len(),
                    d
                )));
            }
            for (i, &c) in row.iter().enumerate() {
                if c == 0 || c > n {
                    return Err(Error::Config(format!(
                        "replica code {} at ({}, {}) is outside 1..={}",
                        c,
                        l + 1,
                        i + 1,
                        n
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Fully specified problem instance.
#[derive(Clone, Debug)]
pub struct Instance {
    pub law: DiscreteLaw,
    pub values: ValueMap,
    pub index_set: IndexSet,
    pub replicas: usize,
    pub delta: Rat,
    pub threshold: ThresholdSpec,
}

impl Instance {
    pub fn new(
        law: DiscreteLaw,
        values: ValueMap,
        index_set: IndexSet,
        replicas: usize,
        delta: Rat,
        threshold: ThresholdSpec,
    ) -> Result<Self> {
        if values.n() != law.n() {
            return Err(Error::InvalidInstance(format!(
                "value map has {} entries but the law has support size {}",
                values.n(),
                law.n()
            )));
        }
        if replicas == 0 {
            return Err(Error::InvalidInstance("replica count must be >= 1".into()));
        }
        if !(delta.is_positive() && delta <= Rat::one()) {
            return Err(Error::InvalidInstance(format!(
                "delta = {} must lie in (0, 1]",
                format_rat(&delta)
            )));
        }
        match &threshold {
            ThresholdSpec::Explicit(l) if l.is_negative() => {
                return Err(Error::InvalidInstance(format!(
                    "threshold L = {} must be nonnegative",
                    format_rat(l)
                )));
            }
            ThresholdSpec::MultipleOfMean(k) if !k.is_positive() => {
                return Err(Error::InvalidInstance(format!(
                    "threshold multiplier K' = {} must be positive",
                    format_rat(k)
                )));
            }
            _ => {}
        }
        Ok(Self {
            law,
            values,
            index_set,
            replicas,
            delta,
            threshold,
        })
    }

    pub fn dim(&self) -> usize {
        self.index_set.dim()
    }

    pub fn n(&self) -> usize {
        self.law.n()
    }

    /// f applied to a 1-based code.
    pub fn value_of(&self, code: usize) -> &Rat {
        self.values.value(code)
    }
}

/// JSON wire form of an instance; rationals travel as "num/den" strings.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub d: usize,
    pub n: usize,
    #[serde(with = "serde_rat_vec")]
    pub p: Vec<Rat>,
    #[serde(with = "serde_rat_vec")]
    pub f: Vec<Rat>,
    #[serde(rename = "T", with = "serde_rat_mat")]
    pub index_set: Vec<Vec<Rat>>,
    #[serde(rename = "K")]
    pub replicas: usize,
    #[serde(with = "serde_rat")]
    pub delta: Rat,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<String>,
    #[serde(rename = "Kprime", default, skip_serializing_if = "Option::is_none")]
    pub threshold_multiple: Option<String>,
}

impl InstanceSpec {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("instance JSON does not match the schema: {e}")))
    }

    pub fn build(&self) -> Result<Instance> {
        if self.p.len() != self.n {
            return Err(Error::Config(format!(
                "field p has {} entries but n = {}",
                self.p.len(),
                self.n
            )));
        }
        if self.f.len() != self.n {
            return Err(Error::Config(format!(
                "field f has {} entries but n = {}",
                self.f.len(),
                self.n
            )));
        }
        let law =
            DiscreteLaw::new(self.p.clone()).map_err(|e| Error::Config(format!("field p: {e}")))?;
        let values = ValueMap::from_values(self.f.clone())
            .map_err(|e| Error::Config(format!("field f: {e}")))?;
        let index_set = IndexSet::new(self.d, self.index_set.clone())
            .map_err(|e| Error::Config(format!("field T: {e}")))?;
        let threshold = match (&self.threshold, &self.threshold_multiple) {
            (Some(l), None) => ThresholdSpec::Explicit(
                parse_rat(l).map_err(|e| Error::Config(format!("field L: {e}")))?,
            ),
            (None, Some(k)) => ThresholdSpec::MultipleOfMean(
                parse_rat(k).map_err(|e| Error::Config(format!("field Kprime: {e}")))?,
            ),
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "exactly one of L and Kprime may be given, found both".into(),
                ))
            }
            (None, None) => {
                return Err(Error::Config(
                    "one of L and Kprime is required, found neither".into(),
                ))
            }
        };
        Instance::new(
            law,
            values,
            index_set,
            self.replicas,
            self.delta.clone(),
            threshold,
        )
        .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_instance(inst: &Instance) -> Self {
        let (threshold, threshold_multiple) = match &inst.threshold {
            ThresholdSpec::Explicit(l) => (Some(format_rat(l)), None),
            ThresholdSpec::MultipleOfMean(k) => (None, Some(format_rat(k))),
        };
        Self {
            d: inst.dim(),
            n: inst.n(),
            p: inst.law.probs().to_vec(),
            f: inst.values.values().to_vec(),
            index_set: inst.index_set.vectors().to_vec(),
            replicas: inst.replicas,
            delta: inst.delta.clone(),
            threshold,
            threshold_multiple,
        }
    }
}

/// A member of the threshold family, with its chosen maximizer.
#[derive(Clone, Debug)]
pub struct FamilyMember {
    pub config: Configuration,
    pub maximizer_index: usize,
    pub value: Rat,
}

/// The family F of configurations whose supremum value strictly exceeds the
/// threshold, in lexicographic order.
#[derive(Clone, Debug)]
pub struct Family {
    pub threshold: Rat,
    pub members: Vec<FamilyMember>,
}

impl Family {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn configs(&self) -> impl Iterator<Item = &Configuration> {
        self.members.iter().map(|m| &m.config)
    }

    /// Indices into T of the maximizers used by members, deduplicated.
    pub fn distinct_maximizer_indices(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.members.iter().map(|m| m.maximizer_index).collect();
        set.into_iter().collect()
    }

    pub fn position(&self, config: &Configuration) -> Option<usize> {
        self.members.binary_search_by(|m| m.config.cmp(config)).ok()
    }
}

/// Lexicographic iterator over `[n]^d` (last coordinate varies fastest).
pub fn enumerate_configs(n: usize, d: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut codes = vec![1usize; d];
    let mut done = n == 0 || d == 0;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let out = codes.clone();
        let mut i = d;
        loop {
            if i == 0 {
                done = true;
                break;
            }
            i -= 1;
            if codes[i] < n {
                codes[i] += 1;
                break;
            }
            codes[i] = 1;
        }
        Some(out)
    })
}

/// n^exp as a state count, or None on overflow.
pub fn state_count(n: usize, exp: usize) -> Option<u128> {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(n as u128)?;
    }
    Some(acc)
}

pub(crate) fn check_budget(what: &str, n: usize, exp: usize, budget: u64) -> Result<u128> {
    match state_count(n, exp) {
        Some(states) if states <= budget as u128 => Ok(states),
        Some(states) => Err(Error::BudgetExceeded {
            what: what.into(),
            states: states.to_string(),
            budget,
        }),
        None => Err(Error::BudgetExceeded {
            what: what.into(),
            states: format!("{n}^{exp} (overflow)"),
            budget,
        }),
    }
}

/// Largest value of `sum_i t_i f(x(i))` over T, together with the smallest
/// index attaining it.
pub fn maximizer(inst: &Instance, x: &Configuration) -> (usize, Rat) {
    let fx: Vec<&Rat> = x.0.iter().map(|&c| inst.value_of(c)).collect();
    let mut best_idx = 0usize;
    let mut best: Option<Rat> = None;
    for (idx, t) in inst.index_set.vectors().iter().enumerate() {
        let dot: Rat = t.iter().zip(&fx).map(|(ti, fi)| ti * *fi).sum();
        if best.as_ref().is_none_or(|b| dot > *b) {
            best = Some(dot);
            best_idx = idx;
        }
    }
    (best_idx, best.expect("index set is nonempty"))
}

fn config_probability(law: &DiscreteLaw, codes: &[usize]) -> Rat {
    codes.iter().map(|&c| law.prob(c)).product()
}

/// Exact expected supremum S(T) by full enumeration of `[n]^d`.
pub fn expected_supremum_exact(inst: &Instance, budget: u64) -> Result<Rat> {
    check_budget("n^d", inst.n(), inst.dim(), budget)?;
    let mut total = Rat::zero();
    for codes in enumerate_configs(inst.n(), inst.dim()) {
        let prob = config_probability(&inst.law, &codes);
        if prob.is_zero() {
            continue;
        }
        let (_, value) = maximizer(inst, &Configuration(codes));
        total += prob * value;
    }
    Ok(total)
}

/// Resolves the instance threshold to an explicit rational.
pub fn resolve_threshold(inst: &Instance, budget: u64) -> Result<Rat> {
    match &inst.threshold {
        ThresholdSpec::Explicit(l) => Ok(l.clone()),
        ThresholdSpec::MultipleOfMean(k) => Ok(k * expected_supremum_exact(inst, budget)?),
    }
}

/// All configurations whose supremum value strictly exceeds the threshold,
/// lexicographically ordered.
pub fn threshold_family(inst: &Instance, budget: u64) -> Result<Family> {
    let threshold = resolve_threshold(inst, budget)?;
    check_budget("n^d", inst.n(), inst.dim(), budget)?;
    let mut members = Vec::new();
    for codes in enumerate_configs(inst.n(), inst.dim()) {
        let config = Configuration(codes);
        let (idx, value) = maximizer(inst, &config);
        if value > threshold {
            members.push(FamilyMember {
                config,
                maximizer_index: idx,
                value,
            });
        }
    }
    Ok(Family { threshold, members })
}

/// Monte Carlo mean/standard-error pair.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: u64,
}

/// Inverse-CDF sampler at 64-bit granularity; deterministic for a given
/// stream of `u64` draws.
pub(crate) struct CodeSampler {
    thresholds: Vec<u128>,
}

impl CodeSampler {
    pub(crate) fn new(law: &DiscreteLaw) -> Self {
        let scale = Rat::from_integer(num_bigint::BigInt::one() << 64);
        let mut thresholds = Vec::with_capacity(law.n());
        let mut cum = Rat::zero();
        for k in 1..=law.n() {
            cum += law.prob(k);
            let scaled = (&cum * &scale).floor().to_integer();
            thresholds.push(scaled.to_u128().unwrap_or(u128::MAX));
        }
        // the final threshold is exactly 2^64 because the law sums to 1
        if let Some(last) = thresholds.last_mut() {
            *last = 1u128 << 64;
        }
        Self { thresholds }
    }

    pub(crate) fn draw(&self, rng: &mut ChaCha8Rng) -> usize {
        let u = rng.next_u64() as u128;
        match self.thresholds.binary_search_by(|t| {
            if *t <= u {
                std::cmp::Ordering::Less
            } else {
                std::cmp::Ordering::Greater
            }
        }) {
            Ok(pos) | Err(pos) => pos + 1,
        }
    }
}

/// Runs `samples` evaluations chunked by `MC_CHUNK`, each chunk on its own
/// ChaCha stream, reduced in chunk order.
pub(crate) fn run_chunked_mc<F>(samples: u64, seed: u64, eval: F) -> McEstimate
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    assert!(samples >= 2, "need at least two samples");
    let chunks = samples.div_ceil(MC_CHUNK);
    let partials: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let lo = c * MC_CHUNK;
            let hi = ((c + 1) * MC_CHUNK).min(samples);
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for _ in lo..hi {
                let v = eval(&mut rng);
                sum += v;
                sumsq += v * v;
            }
            (sum, sumsq)
        })
        .collect();
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for (s, q) in partials {
        sum += s;
        sumsq += q;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = ((sumsq - sum * sum / n) / (n - 1.0)).max(0.0);
    McEstimate {
        estimate: mean,
        std_error: (var / n).sqrt(),
        samples,
    }
}

/// Seeded Monte Carlo estimate of S(T).
pub fn expected_supremum_mc(inst: &Instance, samples: u64, seed: u64) -> McEstimate {
    let sampler = CodeSampler::new(&inst.law);
    let d = inst.dim();
    let f64_values: Vec<f64> = inst.values.values().iter().map(rat_to_f64).collect();
    let t_f64: Vec<Vec<f64>> = inst
        .index_set
        .vectors()
        .iter()
        .map(|v| v.iter().map(rat_to_f64).collect())
        .collect();
    run_chunked_mc(samples, seed, move |rng| {
        let fx: Vec<f64> = (0..d).map(|_| f64_values[sampler.draw(rng) - 1]).collect();
        t_f64
            .iter()
            .map(|t| t.iter().zip(&fx).map(|(a, b)| a * b).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    })
}

/// Value drawn from the replica process: sup over stored maximizers of the
/// summed replica columns.
pub(crate) fn replica_supremum_value(
    inst: &Instance,
    t_indices: &[usize],
    y: &ReplicaMatrix,
) -> Rat {
    let d = inst.dim();
    let col_sums: Vec<Rat> = (0..d)
        .map(|i| (0..y.replicas()).map(|l| inst.value_of(y.code(l, i))).sum())
        .collect();
    t_indices
        .iter()
        .map(|&idx| {
            inst.index_set
                .vector(idx)
                .iter()
                .zip(&col_sums)
                .map(|(t, s)| t * s)
                .sum::<Rat>()
        })
        .max()
        .expect("at least one maximizer index")
}

/// Exact expectation over replica matrices of the family supremum.
pub fn expected_replica_supremum_exact(
    inst: &Instance,
    family: &Family,
    budget: u64,
) -> Result<Rat> {
    if family.is_empty() {
        return Err(Error::EmptyFamily(
            "replica supremum over an empty family is undefined".into(),
        ));
    }
    let cells = inst.replicas * inst.dim();
    check_budget("n^(K*d)", inst.n(), cells, budget)?;
    let t_indices = family.distinct_maximizer_indices();
    let mut total = Rat::zero();
    for codes in enumerate_configs(inst.n(), cells) {
        let prob = config_probability(&inst.law, &codes);
        if prob.is_zero() {
            continue;
        }
        let rows: Vec<Vec<usize>> = codes.chunks(inst.dim()).map(|c| c.to_vec()).collect();
        let y = ReplicaMatrix::new(rows);
        total += prob * replica_supremum_value(inst, &t_indices, &y);
    }
    Ok(total)
}

/// Monte Carlo counterpart of [`expected_replica_supremum_exact`].
pub fn expected_replica_supremum_mc(
    inst: &Instance,
    family: &Family,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    if family.is_empty() {
        return Err(Error::EmptyFamily(
            "replica supremum over an empty family is undefined".into(),
        ));
    }
    let sampler = CodeSampler::new(&inst.law);
    let d = inst.dim();
    let k = inst.replicas;
    let f64_values: Vec<f64> = inst.values.values().iter().map(rat_to_f64).collect();
    let t_f64: Vec<Vec<f64>> = family
        .distinct_maximizer_indices()
        .iter()
        .map(|&idx| inst.index_set.vector(idx).iter().map(rat_to_f64).collect())
        .collect();
    Ok(run_chunked_mc(samples, seed, move |rng| {
        let mut col_sums = vec![0.0f64; d];
        for _ in 0..k {
            for col in col_sums.iter_mut() {
                *col += f64_values[sampler.draw(rng) - 1];
            }
        }
        t_f64
            .iter()
            .map(|t| t.iter().zip(&col_sums).map(|(a, b)| a * b).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    }))
}

/// Outcome of the discrete tail-regularity check at a given C.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TailConditionReport {
    pub holds: bool,
    pub first_violation: Option<usize>,
}

/// Checks `p_k >= (1 - 1/C) * P(X >= k)` for every code k.
pub fn tail_condition_discrete(
    law: &DiscreteLaw,
    values: &ValueMap,
    c: &Rat,
) -> TailConditionReport {
    debug_assert_eq!(law.n(), values.n());
    let factor = Rat::one() - (Rat::one() / c);
    for k in 1..=law.n() {
        if *law.prob(k) < &factor * law.tail(k) {
            return TailConditionReport {
                holds: false,
                first_violation: Some(k),
            };
        }
    }
    TailConditionReport {
        holds: true,
        first_violation: None,
    }
}
