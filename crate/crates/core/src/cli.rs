//! Configuration ingestion, command dispatch and report emission.
//!
//! Reports are deterministic: canonical JSON with sorted keys, rationals as
//! "num/den" strings, and an embedded hash of the effective configuration,
//! so a rerun with the same config and seed is byte-identical.

use crate::cover::{verify_cover, weight_delta, weight_weak, Cover};
use crate::error::{Error, Result};
use crate::model::{
    expected_supremum_exact, expected_supremum_mc, threshold_family, Configuration, DiscreteLaw,
    IndexSet, Instance, InstanceSpec, ReplicaMatrix, ThresholdSpec, ValueMap, DEFAULT_BUDGET,
};
use crate::rational::{format_rat, parse_rat, rat_to_f64, Rat};
use crate::reduction::{
    choose_truncation, choose_truncation_weak, constants, discretize, dyadic_value, lift_cover,
    tail_condition_continuous, threshold_transform, ContinuousLawSpec, ThresholdTransform,
};
use crate::verify::{mc_bad_audit, run_all_checks, run_suite, SuiteConfig, VerifyContext};
use crate::witness::{
    build_cover_for_y, class_partition_from_atlas, enumerate_bad, index_families, is_bad,
    select_witness,
};
use num_traits::{One, Signed, Zero};
use serde::Deserialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

pub const COMMANDS: &[&str] = &[
    "estimate", "family", "witness", "cover", "classes", "reduce", "verify", "selector",
];

/// Flag-level overrides applied on top of the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    pub mode: Option<String>,
    pub budget: Option<u64>,
    pub fail_fast: bool,
}

/// Dispatch result: the full report value and the process exit code.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub report: Value,
    pub exit: i32,
}

#[derive(Clone, Debug, Deserialize)]
struct ContinuousSection {
    law: ContinuousLawSpec,
    /// "doubling" (default) runs the tail-condition pipeline and needs C;
    /// "interval" runs the unconditional pipeline with interval weights.
    #[serde(default)]
    variant: Option<String>,
    #[serde(rename = "C", default)]
    c: Option<String>,
    d: usize,
    #[serde(default)]
    n_max: Option<u32>,
    #[serde(rename = "T", default)]
    index_set: Option<Vec<Vec<String>>>,
    #[serde(rename = "K", default)]
    replicas: Option<usize>,
    #[serde(default)]
    delta: Option<String>,
    #[serde(rename = "L", default)]
    threshold: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
struct SelectorSection {
    d: usize,
    p: String,
    #[serde(rename = "T")]
    index_set: Vec<Vec<String>>,
    #[serde(rename = "K", default)]
    replicas: Option<usize>,
    #[serde(default)]
    delta: Option<String>,
    #[serde(rename = "L", default)]
    threshold: Option<String>,
    #[serde(rename = "Kprime", default)]
    threshold_multiple: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
struct VerifySection {
    #[serde(default)]
    instances: Option<u64>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(rename = "audit_C", default)]
    audit_c: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
struct ConfigFile {
    #[serde(default)]
    instance: Option<InstanceSpec>,
    #[serde(default)]
    continuous: Option<ContinuousSection>,
    #[serde(default)]
    selector: Option<SelectorSection>,
    #[serde(default)]
    verify: Option<VerifySection>,
    #[serde(default)]
    x: Option<Vec<usize>>,
    #[serde(default)]
    y: Option<Vec<Vec<usize>>>,
    #[serde(default)]
    command: Option<String>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    samples: Option<u64>,
    #[serde(default)]
    mode: Option<String>,
    #[serde(default)]
    budget: Option<u64>,
}

struct Effective {
    config: ConfigFile,
    seed: Option<u64>,
    samples: u64,
    mode: String,
    budget: u64,
    fail_fast: bool,
    hash: String,
}

/// Canonical form of a JSON value: compact encoding with sorted keys (the
/// default map representation already sorts).
pub fn canonical_json(value: &Value) -> String {
    serde_json::to_string(value).expect("json values serialize")
}

fn sha256_hex(data: &str) -> String {
    let digest = Sha256::digest(data.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn effective(command: &str, config_text: &str, overrides: &Overrides) -> Result<Effective> {
    let mut raw: Value = serde_json::from_str(config_text)
        .map_err(|e| Error::Config(format!("config is not valid JSON: {e}")))?;
    let config: ConfigFile = serde_json::from_value(raw.clone())
        .map_err(|e| Error::Config(format!("config does not match the schema: {e}")))?;
    if let Some(declared) = &config.command {
        if declared != command {
            return Err(Error::Config(format!(
                "config declares command {declared:?} but {command:?} was invoked"
            )));
        }
    }
    let seed = overrides.seed.or(config.seed);
    let samples = overrides.samples.or(config.samples).unwrap_or(100_000);
    let mode = overrides
        .mode
        .clone()
        .or_else(|| config.mode.clone())
        .unwrap_or_else(|| "exact".into());
    if mode != "exact" && mode != "mc" {
        return Err(Error::Config(format!(
            "mode must be \"exact\" or \"mc\", got {mode:?}"
        )));
    }
    if mode == "mc" && seed.is_none() {
        return Err(Error::Config("mc mode requires a seed".into()));
    }
    if samples < 2 {
        return Err(Error::Config("samples must be at least 2".into()));
    }
    if config.instance.is_some() && config.continuous.is_some() {
        return Err(Error::Config(
            "config may hold either an \"instance\" or a \"continuous\" section, not both".into(),
        ));
    }
    let budget = overrides.budget.or(config.budget).unwrap_or(DEFAULT_BUDGET);

    // hash the effective configuration: file contents plus applied knobs
    if let Value::Object(map) = &mut raw {
        map.insert("command".into(), json!(command));
        if let Some(s) = seed {
            map.insert("seed".into(), json!(s));
        }
        map.insert("samples".into(), json!(samples));
        map.insert("mode".into(), json!(mode));
        map.insert("budget".into(), json!(budget));
        map.insert("fail_fast".into(), json!(overrides.fail_fast));
    }
    let hash = sha256_hex(&canonical_json(&raw));
    Ok(Effective {
        config,
        seed,
        samples,
        mode,
        budget,
        fail_fast: overrides.fail_fast,
        hash,
    })
}

fn require_instance(eff: &Effective) -> Result<Instance> {
    let spec = eff
        .config
        .instance
        .as_ref()
        .ok_or_else(|| Error::Config("this command needs an \"instance\" section".into()))?;
    spec.build()
}

fn require_replica(eff: &Effective, inst: &Instance) -> Result<ReplicaMatrix> {
    let rows = eff
        .config
        .y
        .clone()
        .ok_or_else(|| Error::Config("this command needs a \"y\" replica matrix".into()))?;
    let y = ReplicaMatrix::new(rows);
    y.validate(inst.n(), inst.dim(), inst.replicas)?;
    Ok(y)
}

fn envelope(command: &str, eff: &Effective, body: Value) -> Value {
    json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "config_hash": eff.hash,
        "seed": eff.seed,
        "mode": eff.mode,
        "report": body,
    })
}

fn run_estimate(eff: &Effective) -> Result<(Value, i32)> {
    let inst = require_instance(eff)?;
    let body = if eff.mode == "mc" {
        let est = expected_supremum_mc(&inst, eff.samples, eff.seed.unwrap());
        json!({
            "estimate": est.estimate,
            "std_error": est.std_error,
            "samples": est.samples,
        })
    } else {
        let value = expected_supremum_exact(&inst, eff.budget)?;
        json!({
            "S_T": format_rat(&value),
            "S_T_decimal": rat_to_f64(&value),
        })
    };
    Ok((body, EXIT_SUCCESS))
}

fn run_family(eff: &Effective) -> Result<(Value, i32)> {
    let inst = require_instance(eff)?;
    let family = threshold_family(&inst, eff.budget)?;
    let members: Vec<&Configuration> = family.configs().collect();
    let values: Vec<String> = family
        .members
        .iter()
        .map(|m| format_rat(&m.value))
        .collect();
    let body = json!({
        "threshold": format_rat(&family.threshold),
        "size": family.len(),
        "members": members,
        "values": values,
    });
    Ok((body, EXIT_SUCCESS))
}

fn run_witness(eff: &Effective) -> Result<(Value, i32)> {
    let inst = require_instance(eff)?;
    let family = threshold_family(&inst, eff.budget)?;
    let x_codes =
        eff.config.x.clone().ok_or_else(|| {
            Error::Config("the witness command needs an \"x\" configuration".into())
        })?;
    let x = Configuration(x_codes);
    x.validate(inst.n(), inst.dim())?;
    let x_index = family.position(&x).ok_or_else(|| {
        Error::Config("x is not in the threshold family; no witness is defined for it".into())
    })?;
    let y = require_replica(eff, &inst)?;
    if !is_bad(&inst, &family, &y) {
        return Err(Error::Config(
            "y is not bad: some family member extracts more than half the threshold".into(),
        ));
    }
    let families = index_families(&inst, &family.members[x_index], &y)?;
    let sel = select_witness(&inst, &family, &y, x_index)?;
    let wire = crate::cover::coordset_to_wire;
    let levels: Vec<Value> = (1..=inst.n())
        .map(|j| {
            json!({
                "level": j,
                "value_at": wire(&families.level[j - 1]),
                "value_exact": wire(&families.level_exact[j - 1]),
                "heavy_at": wire(&families.heavy_at[j - 1]),
                "heavy_exact": wire(&families.heavy_exact[j - 1]),
                "matched_at": wire(&families.matched_at[j - 1]),
                "reached": wire(&families.reached[j - 1]),
                "reached_exact": wire(&families.reached_exact[j - 1]),
                "witness_at": wire(&families.witness_at[j - 1]),
                "witness_exact": wire(&families.witness_exact[j - 1]),
            })
        })
        .collect();
    let body = json!({
        "x": x,
        "y": y,
        "epsilon": format_rat(&families.epsilon),
        "weights": families.weights.iter().map(format_rat).collect::<Vec<_>>(),
        "heavy": wire(&families.heavy),
        "matched": wire(&families.matched),
        "witness_set": wire(&families.witness_set),
        "levels": levels,
        "selected": {
            "witness": family.members[sel.witness_index].config,
            "W": wire(&sel.witness_set),
        },
    });
    Ok((body, EXIT_SUCCESS))
}

fn cover_csv(cover: &Cover, law: &DiscreteLaw) -> String {
    let mut out = String::from("entry,x_star,W,delta_weight,weak_weight\n");
    for (idx, entry) in cover.entries.iter().enumerate() {
        let single = Cover::new(vec![entry.clone()]);
        let codes: Vec<String> = entry.x_star.0.iter().map(|c| c.to_string()).collect();
        let wset: Vec<String> = entry
            .witness_set
            .iter()
            .map(|i| (i + 1).to_string())
            .collect();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            idx,
            codes.join(" "),
            wset.join(" "),
            format_rat(&weight_delta(&single, law)),
            format_rat(&weight_weak(&single, law)),
        ));
    }
    out
}

fn run_cover(eff: &Effective) -> Result<(Value, i32)> {
    let inst = require_instance(eff)?;
    let family = threshold_family(&inst, eff.budget)?;
    let y = require_replica(eff, &inst)?;
    if !is_bad(&inst, &family, &y) {
        return Err(Error::Config(
            "y is not bad: the witness cover is only defined for bad replica matrices".into(),
        ));
    }
    let cover = build_cover_for_y(&inst, &family, &y)?;
    let coverage = verify_cover(family.configs(), &cover);
    let delta_w = weight_delta(&cover, &inst.law);
    let weak_w = weight_weak(&cover, &inst.law);
    let body = json!({
        "y": y,
        "entries": cover.entries,
        "entry_count": cover.len(),
        "covered": coverage.covered,
        "first_uncovered": coverage.first_uncovered,
        "delta_weight": format_rat(&delta_w),
        "delta_weight_decimal": rat_to_f64(&delta_w),
        "weak_weight": format_rat(&weak_w),
        "weak_weight_decimal": rat_to_f64(&weak_w),
        "within_delta": delta_w <= inst.delta,
        "csv": cover_csv(&cover, &inst.law),
    });
    let exit = if coverage.covered {
        EXIT_SUCCESS
    } else {
        EXIT_VIOLATION
    };
    Ok((body, exit))
}

fn run_classes(eff: &Effective) -> Result<(Value, i32)> {
    let inst = require_instance(eff)?;
    let family = threshold_family(&inst, eff.budget)?;
    let atlas = enumerate_bad(&inst, &family, eff.budget)?;
    let partition = class_partition_from_atlas(&atlas);
    let wire = crate::cover::coordset_to_wire;
    let mut csv = String::from("heavy_count,witness_count,size,bound,witness_sets\n");
    let classes: Vec<Value> = partition
        .classes
        .iter()
        .map(|(key, members)| {
            let bound = crate::rational::binomial(key.heavy_count, key.witness_count);
            let sets: Vec<String> = members
                .iter()
                .map(|m| {
                    m.witness_set
                        .iter()
                        .map(|i| (i + 1).to_string())
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .collect();
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                key.heavy_count,
                key.witness_count,
                members.len(),
                bound,
                sets.join("|"),
            ));
            json!({
                "heavy_count": key.heavy_count,
                "witness_count": key.witness_count,
                "chain": key.chain.iter().map(&wire).collect::<Vec<_>>(),
                "size": members.len(),
                "bound": bound.to_string(),
                "members": members.iter().map(|m| json!({
                    "witness_set": wire(&m.witness_set),
                    "in_chain": m.in_chain.iter().map(&wire).collect::<Vec<_>>(),
                    "off_chain": m.off_chain.iter().map(&wire).collect::<Vec<_>>(),
                    "probability": format_rat(&m.probability),
                })).collect::<Vec<_>>(),
            })
        })
        .collect();
    let body = json!({
        "bad_count": atlas.bad.len(),
        "bad_probability": format_rat(&atlas.bad_probability),
        "class_count": classes.len(),
        "classes": classes,
        "csv": csv,
    });
    Ok((body, EXIT_SUCCESS))
}

fn run_reduce(eff: &Effective) -> Result<(Value, i32)> {
    let section =
        eff.config.continuous.as_ref().ok_or_else(|| {
            Error::Config("the reduce command needs a \"continuous\" section".into())
        })?;
    let law = section.law.build()?;
    let variant = section.variant.as_deref().unwrap_or("doubling");
    if variant != "doubling" && variant != "interval" {
        return Err(Error::Config(format!(
            "variant must be \"doubling\" or \"interval\", got {variant:?}"
        )));
    }
    let interval_mode = variant == "interval";
    let c = match (&section.c, interval_mode) {
        (Some(raw), _) => {
            let c = parse_rat(raw).map_err(|e| Error::Config(format!("field C: {e}")))?;
            if c <= Rat::one() {
                return Err(Error::Config("C must exceed 1".into()));
            }
            Some(c)
        }
        (None, true) => None,
        (None, false) => {
            return Err(Error::Config(
                "the doubling pipeline needs a doubling constant C".into(),
            ))
        }
    };
    let n_max = section.n_max.unwrap_or(64);
    let delta = section
        .delta
        .as_deref()
        .map(|s| parse_rat(s).map_err(|e| Error::Config(format!("field delta: {e}"))))
        .transpose()?
        .unwrap_or_else(|| Rat::new(1.into(), 2.into()));

    let mut violation = false;
    let tail_report = c
        .as_ref()
        .map(|c| tail_condition_continuous(&law, c, n_max));
    let plan = if interval_mode {
        choose_truncation_weak(&law, section.d, n_max)?
    } else {
        choose_truncation(&law, c.as_ref().unwrap(), section.d, n_max)?
    };
    let disc = discretize(&law, &plan)?;
    let mut discrete_body = json!({
        "p": disc.law.probs().iter().map(format_rat).collect::<Vec<_>>(),
        "f": disc.values.values().iter().map(format_rat).collect::<Vec<_>>(),
    });
    if let Some(c) = &c {
        let discrete_tail = crate::model::tail_condition_discrete(&disc.law, &disc.values, c);
        let p1_bound = Rat::one() - Rat::one() / c;
        let p1_ok = disc.law.prob(1) >= &p1_bound;
        if tail_report.as_ref().is_some_and(|t| t.holds) && (!discrete_tail.holds || !p1_ok) {
            violation = true;
        }
        let extra = json!({
            "tail_check": discrete_tail,
            "p1_mass": format_rat(disc.law.prob(1)),
            "p1_bound": format_rat(&p1_bound),
            "p1_bound_ok": p1_ok,
        });
        merge_objects(&mut discrete_body, extra);
    }

    // dyadic sandwich over a rational grid
    let mut sandwich_ok = true;
    let grid_points = 1000i64;
    let span = crate::rational::pow2(plan.cut_exponent + 1);
    for i in 0..grid_points {
        let t = Rat::new(i.into(), grid_points.into()) * &span;
        let g = dyadic_value(&t, &plan);
        let windowed = if t >= crate::rational::pow2(plan.low_exponent)
            && t < crate::rational::pow2(plan.cut_exponent)
        {
            t.clone()
        } else {
            Rat::zero()
        };
        if !(g <= windowed && windowed <= Rat::from_integer(2.into()) * &g) {
            sandwich_ok = false;
        }
    }
    if !sandwich_ok {
        violation = true;
    }

    // constants: the doubling pipeline evaluates all of them; the interval
    // pipeline only carries its own threshold multiplier
    let (consts_body, inner_k) = match &c {
        Some(c) => {
            let consts = constants(c, &delta)?;
            let inner = consts.k_replica;
            (serde_json::to_value(&consts).expect("constants"), inner)
        }
        None => {
            let coeff = Rat::from_integer(12.into()) / &delta;
            let inner = crate::rational::ceil_affine_in_e(&Rat::zero(), &coeff);
            use num_traits::ToPrimitive;
            let inner = inner.to_u64().expect("weak constant fits");
            (
                json!({
                    "k_weak": inner,
                    "k_prime_weak": 8 * inner,
                    "k_prime_interval": 2103,
                    "interval_lower_bound": 2102,
                }),
                inner,
            )
        }
    };

    // optional discrete stage: family and lifted witness cover
    let mut family_body = Value::Null;
    if let Some(t_raw) = &section.index_set {
        let vectors: Result<Vec<Vec<Rat>>> = t_raw
            .iter()
            .map(|row| {
                row.iter()
                    .map(|s| parse_rat(s).map_err(|e| Error::Config(format!("field T: {e}"))))
                    .collect()
            })
            .collect();
        let index_set = IndexSet::new(section.d, vectors?)?;
        let replicas = section.replicas.unwrap_or(1);
        let threshold = match &section.threshold {
            Some(l) => ThresholdSpec::Explicit(
                parse_rat(l).map_err(|e| Error::Config(format!("field L: {e}")))?,
            ),
            None => {
                return Err(Error::Config(
                    "a continuous T section needs an explicit L for the discrete stage".into(),
                ))
            }
        };
        let inst = Instance::new(
            disc.law.clone(),
            disc.values.clone(),
            index_set,
            replicas,
            delta.clone(),
            threshold,
        )?;
        let family = threshold_family(&inst, eff.budget)?;
        let y = ReplicaMatrix::all_ones(inst.replicas, inst.dim());
        let cover = build_cover_for_y(&inst, &family, &y)?;
        let coverage = verify_cover(family.configs(), &cover);
        let lifted = lift_cover(&cover, &plan, &law)?;
        if !coverage.covered || !lifted.within_bound {
            violation = true;
        }
        let interval_body = if interval_mode {
            // interval weights of the lifted entries, plus the plain tail
            // weight of the appended truncation entries
            let weak_weight = weight_weak(&cover, &disc.law);
            let interval_weight = crate::cover::weight_interval(&lifted.entries, &law)?;
            let total = &interval_weight + &lifted.tail_weight;
            json!({
                "weak_weight": format_rat(&weak_weight),
                "interval_weight": format_rat(&interval_weight),
                "interval_tail_weight": format_rat(&lifted.tail_weight),
                "interval_total_weight": format_rat(&total),
            })
        } else {
            json!({})
        };
        let mut stage = json!({
            "family_size": family.len(),
            "threshold": format_rat(&family.threshold),
            "cover_entries": cover.entries,
            "covered": coverage.covered,
            "lifted": lifted,
        });
        merge_objects(&mut stage, interval_body);
        family_body = stage;
    }

    // value-threshold transform at the inner constant, reported with its
    // boundary cases
    let transform_body = match threshold_transform(&disc.law, &disc.values, inner_k)? {
        ThresholdTransform::TriviallyEmpty { threshold_value } => json!({
            "trivially_empty": true,
            "threshold_value": format_rat(&threshold_value),
        }),
        ThresholdTransform::Transformed(t) => json!({
            "trivially_empty": false,
            "cutoff_code": t.cutoff_code,
            "threshold_value": format_rat(&t.threshold_value),
            "boundary_codes": t.boundary_codes,
            "support": t.law.probs().len(),
        }),
    };

    let body = json!({
        "variant": variant,
        "C": c.as_ref().map(format_rat),
        "d": section.d,
        "plan": { "low_exponent": plan.low_exponent, "cut_exponent": plan.cut_exponent },
        "tail_check": tail_report,
        "constants": consts_body,
        "discrete": discrete_body,
        "sandwich": { "grid_points": grid_points, "ok": sandwich_ok },
        "discrete_stage": family_body,
        "transform": transform_body,
    });
    let exit = if violation {
        EXIT_VIOLATION
    } else {
        EXIT_SUCCESS
    };
    Ok((body, exit))
}

fn merge_objects(target: &mut Value, extra: Value) {
    if let (Value::Object(t), Value::Object(e)) = (target, extra) {
        t.extend(e);
    }
}

fn run_verify(eff: &Effective) -> Result<(Value, i32)> {
    if let Some(section) = &eff.config.verify {
        let audit_c = section
            .audit_c
            .as_deref()
            .map(|s| parse_rat(s).map_err(|e| Error::Config(format!("field audit_C: {e}"))))
            .transpose()?
            .unwrap_or_else(|| Rat::from_integer(2.into()));
        let config = SuiteConfig {
            instances: section.instances.unwrap_or(200),
            seed: section.seed.or(eff.seed).unwrap_or(7),
            budget: eff.budget,
            audit_c,
            fail_fast: eff.fail_fast,
        };
        let report = run_suite(&config)?;
        let exit = if report.all_pass {
            EXIT_SUCCESS
        } else {
            EXIT_VIOLATION
        };
        return Ok((serde_json::to_value(&report).expect("suite report"), exit));
    }
    let inst = require_instance(eff)?;
    let audit_c = Rat::from_integer(2.into());
    if eff.mode == "mc" {
        let family = threshold_family(&inst, eff.budget)?;
        let audit = mc_bad_audit(&inst, &family, eff.samples, eff.seed.unwrap(), &audit_c)?;
        let exit = if audit.violations.is_empty() && audit.law_bounds_pass {
            EXIT_SUCCESS
        } else {
            EXIT_VIOLATION
        };
        return Ok((serde_json::to_value(&audit).expect("mc audit report"), exit));
    }
    let ctx = VerifyContext::build(&inst, eff.budget)?;
    let reports = run_all_checks(&ctx, &audit_c, eff.budget);
    let all_pass = reports.iter().all(|r| r.pass());
    let body = json!({ "checks": reports, "all_pass": all_pass });
    let exit = if all_pass {
        EXIT_SUCCESS
    } else {
        EXIT_VIOLATION
    };
    Ok((body, exit))
}

fn run_selector(eff: &Effective) -> Result<(Value, i32)> {
    let section =
        eff.config.selector.as_ref().ok_or_else(|| {
            Error::Config("the selector command needs a \"selector\" section".into())
        })?;
    let p = parse_rat(&section.p).map_err(|e| Error::Config(format!("field p: {e}")))?;
    if !(p.is_positive() && p < Rat::one()) {
        return Err(Error::Config(format!(
            "selector probability p = {} must lie in (0, 1)",
            format_rat(&p)
        )));
    }
    let law = DiscreteLaw::new(vec![Rat::one() - &p, p.clone()])?;
    let values = ValueMap::new(vec![Rat::from_integer(0.into()), Rat::one()], true)?;
    let vectors: Result<Vec<Vec<Rat>>> = section
        .index_set
        .iter()
        .map(|row| {
            row.iter()
                .map(|s| parse_rat(s).map_err(|e| Error::Config(format!("field T: {e}"))))
                .collect()
        })
        .collect();
    let index_set = IndexSet::new(section.d, vectors?)?;
    let replicas = section.replicas.unwrap_or(1);
    let delta = section
        .delta
        .as_deref()
        .map(|s| parse_rat(s).map_err(|e| Error::Config(format!("field delta: {e}"))))
        .transpose()?
        .unwrap_or_else(|| Rat::new(1.into(), 2.into()));
    let threshold = match (&section.threshold, &section.threshold_multiple) {
        (Some(l), None) => ThresholdSpec::Explicit(
            parse_rat(l).map_err(|e| Error::Config(format!("field L: {e}")))?,
        ),
        (None, Some(k)) => ThresholdSpec::MultipleOfMean(
            parse_rat(k).map_err(|e| Error::Config(format!("field Kprime: {e}")))?,
        ),
        _ => {
            return Err(Error::Config(
                "the selector section needs exactly one of L and Kprime".into(),
            ))
        }
    };
    let inst = Instance::new(law, values, index_set, replicas, delta.clone(), threshold)?;
    let family = threshold_family(&inst, eff.budget)?;
    if family.is_empty() {
        let body = json!({
            "p": format_rat(&p),
            "threshold": format_rat(&family.threshold),
            "family_size": 0,
            "subsets": [],
            "weight": "0",
            "weight_decimal": 0.0,
            "covered": true,
        });
        return Ok((body, EXIT_SUCCESS));
    }
    let y = ReplicaMatrix::all_ones(inst.replicas, inst.dim());
    debug_assert!(is_bad(&inst, &family, &y));
    let cover = build_cover_for_y(&inst, &family, &y)?;
    let coverage = verify_cover(family.configs(), &cover);
    // in the two-code encoding, every bound coordinate sits at code 2, so
    // the entry weight is p^|W| in both the tail and point-mass senses
    let weight = weight_weak(&cover, &inst.law);
    debug_assert_eq!(weight, weight_delta(&cover, &inst.law));
    let subsets: Vec<Vec<usize>> = cover
        .entries
        .iter()
        .map(|e| crate::cover::coordset_to_wire(&e.witness_set))
        .collect();
    let body = json!({
        "p": format_rat(&p),
        "threshold": format_rat(&family.threshold),
        "family_size": family.len(),
        "subsets": subsets,
        "weight": format_rat(&weight),
        "weight_decimal": rat_to_f64(&weight),
        "within_delta": weight <= delta,
        "covered": coverage.covered,
    });
    let exit = if coverage.covered {
        EXIT_SUCCESS
    } else {
        EXIT_VIOLATION
    };
    Ok((body, exit))
}

/// Parses, validates and dispatches one command over one config document.
pub fn run(command: &str, config_text: &str, overrides: &Overrides) -> RunOutcome {
    let eff = match effective(command, config_text, overrides) {
        Ok(e) => e,
        Err(e) => return error_outcome(command, &e),
    };
    let result = match command {
        "estimate" => run_estimate(&eff),
        "family" => run_family(&eff),
        "witness" => run_witness(&eff),
        "cover" => run_cover(&eff),
        "classes" => run_classes(&eff),
        "reduce" => run_reduce(&eff),
        "verify" => run_verify(&eff),
        "selector" => run_selector(&eff),
        other => Err(Error::Config(format!(
            "unknown command {other:?}; expected one of {COMMANDS:?}"
        ))),
    };
    match result {
        Ok((body, exit)) => RunOutcome {
            report: envelope(command, &eff, body),
            exit,
        },
        Err(e) => error_outcome(command, &e),
    }
}

fn error_outcome(command: &str, error: &Error) -> RunOutcome {
    let exit = match error {
        Error::BudgetExceeded { .. } => EXIT_BUDGET,
        _ => EXIT_CONFIG,
    };
    let kind = match error {
        Error::BudgetExceeded { .. } => "budget",
        Error::Config(_) => "config",
        _ => "invalid-input",
    };
    RunOutcome {
        report: json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "error": { "kind": kind, "exit": exit, "message": error.to_string() },
        }),
        exit,
    }
}

/// Renders a report for emission: pretty JSON with a trailing newline.
pub fn render_report(report: &Value) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("reports serialize");
    text.push('\n');
    text
}

/// Side-car CSV extraction for commands that carry one.
pub fn extract_csv(report: &Value) -> Option<String> {
    report
        .get("report")
        .and_then(|r| r.get("csv"))
        .and_then(Value::as_str)
        .map(str::to_owned)
}

#[cfg(test)]
mod tests {
    use super::*;

    const I1_CONFIG: &str = r#"{
        "instance": {
            "d": 2, "n": 3,
            "p": ["1/2", "1/4", "1/4"],
            "f": ["0", "1", "2"],
            "T": [["1", "0"], ["0", "1"], ["1/2", "1/2"]],
            "K": 2,
            "delta": "1/2",
            "L": "3/2"
        }
    }"#;

    #[test]
    fn estimate_reports_exact_value() {
        let outcome = run("estimate", I1_CONFIG, &Overrides::default());
        assert_eq!(outcome.exit, EXIT_SUCCESS);
        assert_eq!(outcome.report["report"]["S_T"], "19/16");
        assert_eq!(outcome.report["report"]["S_T_decimal"], 1.1875);
    }

    #[test]
    fn malformed_probabilities_name_the_field() {
        let bad = I1_CONFIG.replace("\"1/2\", \"1/4\", \"1/4\"", "\"1/2\", \"1/4\", \"1/8\"");
        let outcome = run("estimate", &bad, &Overrides::default());
        assert_eq!(outcome.exit, EXIT_CONFIG);
        let message = outcome.report["error"]["message"].as_str().unwrap();
        assert!(message.contains("field p"), "{message}");
    }

    #[test]
    fn cover_command_reports_worked_instance() {
        let mut value: Value = serde_json::from_str(I1_CONFIG).unwrap();
        value["y"] = json!([[1, 1], [1, 1]]);
        let config = value.to_string();
        let outcome = run("cover", &config, &Overrides::default());
        assert_eq!(outcome.exit, EXIT_SUCCESS, "{}", outcome.report);
        let report = &outcome.report["report"];
        assert_eq!(report["entry_count"], 2);
        assert_eq!(report["delta_weight"], "1/2");
        assert_eq!(report["covered"], true);
    }

    #[test]
    fn command_mismatch_is_a_config_error() {
        let config = I1_CONFIG.replace("\"instance\"", "\"command\": \"family\", \"instance\"");
        let outcome = run("estimate", &config, &Overrides::default());
        assert_eq!(outcome.exit, EXIT_CONFIG);
    }

    #[test]
    fn mc_mode_requires_seed() {
        let overrides = Overrides {
            mode: Some("mc".into()),
            ..Overrides::default()
        };
        let outcome = run("estimate", I1_CONFIG, &overrides);
        assert_eq!(outcome.exit, EXIT_CONFIG);
    }

    #[test]
    fn canonical_json_is_idempotent() {
        let value: Value = serde_json::from_str(I1_CONFIG).unwrap();
        let once = canonical_json(&value);
        let twice = canonical_json(&serde_json::from_str(&once).unwrap());
        assert_eq!(once, twice);
    }

    #[test]
    fn reruns_are_byte_identical() {
        let overrides = Overrides {
            mode: Some("mc".into()),
            seed: Some(11),
            samples: Some(4096),
            ..Overrides::default()
        };
        let a = run("estimate", I1_CONFIG, &overrides);
        let b = run("estimate", I1_CONFIG, &overrides);
        assert_eq!(render_report(&a.report), render_report(&b.report));
    }
}
