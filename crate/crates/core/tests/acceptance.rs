//! Acceptance suite. Each test prints one pass line; expected values come
//! from the self-contained brute-force oracles at the bottom of this file,
//! which deliberately reimplement the arithmetic with their own loops.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use smallcover::cover::{verify_cover, weight_delta, weight_weak, CoordSet};
use smallcover::model::{
    expected_replica_supremum_exact, expected_supremum_exact, threshold_family, Configuration,
    DiscreteLaw, IndexSet, Instance, ReplicaMatrix, ThresholdSpec, ValueMap,
};
use smallcover::rational::{rat, rat_int, Rat};
use smallcover::reduction::{
    choose_truncation, constants, discretize, dyadic_value, lift_cover, tail_condition_continuous,
    threshold_transform, threshold_transform_collapsing, ContinuousLaw, ThresholdTransform,
};
use smallcover::verify::{
    averaging_hypotheses, check_epsilon_certificates, mc_bad_audit, random_instance, run_suite,
    SuiteConfig, VerifyContext,
};
use smallcover::witness::{build_cover_for_y, enumerate_bad, is_bad};
use std::time::Instant;

const BUDGET: u64 = 10_000_000;

fn i1() -> Instance {
    let law = DiscreteLaw::new(vec![rat(1, 2), rat(1, 4), rat(1, 4)]).unwrap();
    let values = ValueMap::new(vec![rat_int(0), rat_int(1), rat_int(2)], true).unwrap();
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
fn criterion_1_worked_instance() {
    let start = Instant::now();
    let inst = i1();

    // oracle values, recomputed from raw data by the independent code path
    let o_mean = oracle::expected_supremum(&inst);
    assert_eq!(o_mean, rat(19, 16));
    let o_family = oracle::family(&inst);
    assert_eq!(o_family.len(), 5);
    let (o_bad, o_p_bad) = oracle::bad_matrices(&inst, &o_family);
    assert_eq!(o_bad, vec![vec![1, 1, 1, 1]]);
    assert_eq!(o_p_bad, rat(1, 16));
    let o_replica_mean = oracle::replica_mean(&inst, &o_family);
    assert_eq!(o_replica_mean, rat(275, 128));

    // the library agrees with every frozen value
    assert_eq!(expected_supremum_exact(&inst, BUDGET).unwrap(), rat(19, 16));
    let family = threshold_family(&inst, BUDGET).unwrap();
    assert_eq!(family.len(), 5);
    let members: Vec<Vec<usize>> = family.configs().map(|c| c.0.clone()).collect();
    assert_eq!(members, o_family);

    let atlas = enumerate_bad(&inst, &family, BUDGET).unwrap();
    assert_eq!(atlas.bad.len(), 1);
    assert_eq!(atlas.bad[0].y, ReplicaMatrix::all_ones(2, 2));
    assert_eq!(atlas.bad_probability, rat(1, 16));

    let cover = build_cover_for_y(&inst, &family, &atlas.bad[0].y).unwrap();
    assert_eq!(cover.len(), 2);
    assert_eq!(cover.entries[0].x_star, Configuration(vec![1, 3]));
    assert_eq!(cover.entries[0].witness_set, CoordSet::from([1]));
    assert_eq!(cover.entries[1].x_star, Configuration(vec![3, 1]));
    assert_eq!(cover.entries[1].witness_set, CoordSet::from([0]));
    let weight = weight_delta(&cover, &inst.law);
    assert_eq!(weight, rat(1, 2));
    assert!(weight <= inst.delta);
    assert!(verify_cover(family.configs(), &cover).covered);

    let replica_mean = expected_replica_supremum_exact(&inst, &family, BUDGET).unwrap();
    assert_eq!(replica_mean, rat(275, 128));
    assert!(replica_mean >= family.threshold / rat_int(4));

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!("acceptance 1 PASS: worked instance exact values in {elapsed:?}");
}

#[test]
fn criterion_2_lemma_suite_over_200_random_instances() {
    let start = Instant::now();
    let config = SuiteConfig {
        instances: 200,
        seed: 7,
        ..SuiteConfig::default()
    };
    let report = run_suite(&config).unwrap();
    assert_eq!(report.instances, 200);
    for check in &report.checks {
        assert!(
            check.pass(),
            "{} reported violations: {:?}",
            check.check,
            check.violations
        );
    }
    assert!(report.all_pass);
    assert!(report.qualifying_pairs > 0, "no qualifying pairs at all");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:?}");
    println!(
        "acceptance 2 PASS: 200 instances, {} qualifying pairs, 0 violations in {elapsed:?}",
        report.qualifying_pairs
    );
}

#[test]
fn criterion_3_epsilon_certificates_are_exact() {
    // worked instance plus a seeded batch, all with zero-tolerance rational
    // certificate checks on every enumerated (x, bad y) pair
    let mut pairs = 0;
    let inst = i1();
    let ctx = VerifyContext::build(&inst, BUDGET).unwrap();
    let report = check_epsilon_certificates(&ctx);
    assert!(report.pass(), "{:?}", report.violations);
    pairs += report.pairs_checked;
    for stream in 0..25 {
        let inst = random_instance(40, stream);
        let ctx = VerifyContext::build(&inst, BUDGET).unwrap();
        let report = check_epsilon_certificates(&ctx);
        assert!(report.pass(), "{:?}", report.violations);
        pairs += report.pairs_checked;
    }
    assert!(pairs > 0);
    println!("acceptance 3 PASS: {pairs} exact crossing certificates");
}

#[test]
fn criterion_4_reduction_pipeline_on_dyadic_catalog() {
    let law = ContinuousLaw::geometric_dyadic(3);
    let c = rat_int(2);

    let tail = tail_condition_continuous(&law, &c, 32);
    assert!(tail.holds);

    let plan = choose_truncation(&law, &c, 2, 32).unwrap();
    assert_eq!((plan.low_exponent, plan.cut_exponent), (1, 3));

    let disc = discretize(&law, &plan).unwrap();
    assert_eq!(disc.law.probs(), &[rat(1, 2), rat(1, 4), rat(1, 4)]);
    let discrete_tail = smallcover::model::tail_condition_discrete(&disc.law, &disc.values, &c);
    assert!(discrete_tail.holds);
    assert!(disc.law.prob(1) >= &(Rat::one() - Rat::one() / &c));

    // dyadic sandwich on a thousand-point rational grid
    let span = smallcover::rational::pow2(plan.cut_exponent + 1);
    for i in 0i64..1000 {
        let t = rat(i, 1000) * &span;
        let g = dyadic_value(&t, &plan);
        let windowed = if t >= smallcover::rational::pow2(plan.low_exponent)
            && t < smallcover::rational::pow2(plan.cut_exponent)
        {
            t.clone()
        } else {
            Rat::zero()
        };
        assert!(g <= windowed && windowed <= rat_int(2) * &g, "t = {t}");
    }

    // lift the worked witness cover of the discretized instance
    let index_set = IndexSet::new(
        2,
        vec![vec![rat_int(1), rat_int(0)], vec![rat_int(0), rat_int(1)]],
    )
    .unwrap();
    let inst = Instance::new(
        disc.law.clone(),
        disc.values.clone(),
        index_set,
        1,
        rat(1, 2),
        ThresholdSpec::Explicit(rat_int(3)),
    )
    .unwrap();
    let family = threshold_family(&inst, BUDGET).unwrap();
    let cover = build_cover_for_y(&inst, &family, &ReplicaMatrix::all_ones(1, 2)).unwrap();
    let lifted = lift_cover(&cover, &plan, &law).unwrap();
    assert!(lifted.total_weight <= &lifted.discrete_weight + rat(1, 4));
    assert!(lifted.within_bound);
    // the catalog law truncates exactly at the cut, so the bound is tight
    assert_eq!(lifted.total_weight, lifted.discrete_weight);
    println!("acceptance 4 PASS: reduction pipeline checks out on the dyadic catalog");
}

#[test]
fn criterion_5_threshold_transform_identity() {
    use rand_chacha::ChaCha8Rng;
    use rand_core::{RngCore, SeedableRng};

    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut draw = |lo: u64, hi: u64| lo + rng.next_u64() % (hi - lo + 1);
    let mut transformed = 0;
    for _ in 0..50 {
        let n = draw(2, 4) as usize;
        let weights: Vec<u64> = loop {
            let w: Vec<u64> = (0..n).map(|_| draw(0, 6)).collect();
            if w.iter().sum::<u64>() > 0 {
                break w;
            }
        };
        let total: u64 = weights.iter().sum();
        let law = DiscreteLaw::new(
            weights
                .iter()
                .map(|&w| Rat::new(BigInt::from(w), BigInt::from(total)))
                .collect(),
        )
        .unwrap();
        let mut values = vec![Rat::new(BigInt::from(draw(0, 2)), BigInt::from(2))];
        for _ in 1..n {
            let prev = values.last().cloned().unwrap();
            values.push(prev + Rat::new(BigInt::from(draw(1, 5)), BigInt::from(draw(1, 3))));
        }
        let values = ValueMap::new(values, false).unwrap();
        let k = draw(1, 4);
        match threshold_transform(&law, &values, k).unwrap() {
            ThresholdTransform::Transformed(t) => {
                transformed += 1;
                assert!(
                    t.identity_violations(&values).is_empty(),
                    "corrected mapping broke the identity on n={n}, K={k}"
                );
                // mass at zero respects the Markov bound
                let bound = Rat::one() - Rat::new(BigInt::one(), BigInt::from(k));
                assert!(t.law.prob(1) >= &bound);
            }
            ThresholdTransform::TriviallyEmpty { .. } => {}
        }
    }
    assert!(transformed >= 10, "random triples almost never transformed");

    // the shifted variant provably breaks the identity at the cutoff code on
    // the catalog case
    let law = DiscreteLaw::new(vec![rat(1, 2), rat(1, 4), rat(1, 4)]).unwrap();
    let values = ValueMap::new(vec![rat_int(0), rat_int(1), rat_int(2)], true).unwrap();
    match threshold_transform_collapsing(&law, &values, 1).unwrap() {
        ThresholdTransform::Transformed(t) => {
            let violations = t.identity_violations(&values);
            assert!(
                violations.contains(&t.cutoff_code),
                "expected a violation at the cutoff code, got {violations:?}"
            );
        }
        other => panic!("expected a transform, got {other:?}"),
    }
    println!("acceptance 5 PASS: transform identity exact on {transformed} random triples; collapsing variant violates at the cutoff");
}

#[test]
fn criterion_6_averaging_audit_at_true_constants() {
    let start = Instant::now();
    let consts = constants(&rat_int(2), &rat(1, 2)).unwrap();
    assert_eq!(consts.k_replica, 131);
    let k = consts.k_replica as usize;

    let law = DiscreteLaw::new(vec![rat(130, 131), rat(1, 131)]).unwrap();
    let values = ValueMap::new(vec![rat_int(0), rat_int(1)], true).unwrap();
    let index_set = IndexSet::new(
        3,
        vec![
            vec![rat_int(1), rat_int(0), rat_int(0)],
            vec![rat_int(0), rat_int(1), rat_int(0)],
            vec![rat_int(0), rat_int(0), rat_int(1)],
        ],
    )
    .unwrap();
    let inst = Instance::new(
        law,
        values,
        index_set,
        k,
        rat(1, 2),
        ThresholdSpec::Explicit(rat(1, 2)),
    )
    .unwrap();
    let hyps = averaging_hypotheses(&inst, &rat_int(2));
    assert!(hyps.all, "{hyps:?}");

    let family = threshold_family(&inst, BUDGET).unwrap();
    assert_eq!(family.len(), 7);
    let audit = mc_bad_audit(&inst, &family, 4096, 17, &rat_int(2)).unwrap();
    assert!(audit.violations.is_empty(), "{:?}", audit.violations);
    assert!(audit.law_bounds_pass);
    assert!(audit.bad_samples > 0, "no bad sample drawn at all");
    let weighted = &audit.weighted_cover_mass;
    assert!(
        weighted.estimate <= 0.25 + 3.0 * weighted.std_error,
        "estimate {} stderr {}",
        weighted.estimate,
        weighted.std_error
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 600.0, "took {elapsed:?}");
    println!(
        "acceptance 6 PASS: {} bad samples audited, weighted mass {:.6} <= 1/4 + 3se in {elapsed:?}",
        audit.bad_samples, weighted.estimate
    );
}

#[test]
fn criterion_7_constants() {
    let report = constants(&rat_int(2), &rat(1, 2)).unwrap();
    assert_eq!(report.k_tail, 133);
    assert_eq!(report.k_prime_tail, 1064);
    assert_eq!(report.k_prime_doubling, 4436);
    assert_eq!(report.k_prime_weak, 528);
    assert_eq!(report.interval_lower_bound, 2102);
    assert_eq!(report.k_prime_interval, 2103);
    println!("acceptance 7 PASS: constants 133 / 1064 / 4436 / 528, interval bound 2102");
}

#[test]
fn criterion_8_selector_specialization() {
    // d = 2, basis vectors, p = 1/4, L = 1/2
    let cases = [
        (
            2usize,
            rat(1, 4),
            vec![vec![rat_int(1), rat_int(0)], vec![rat_int(0), rat_int(1)]],
            rat(1, 2),
        ),
        (
            3usize,
            rat(1, 8),
            vec![vec![rat_int(1), rat_int(1), rat_int(1)]],
            rat(3, 4),
        ),
        (
            3usize,
            rat(1, 8),
            vec![
                vec![rat_int(1), rat_int(0), rat_int(0)],
                vec![rat_int(0), rat_int(1), rat_int(0)],
                vec![rat_int(0), rat_int(0), rat_int(1)],
            ],
            rat(1, 2),
        ),
    ];
    for (d, p, vectors, threshold) in cases {
        let delta = rat(1, 2);
        let law = DiscreteLaw::new(vec![Rat::one() - &p, p.clone()]).unwrap();
        let values = ValueMap::new(vec![rat_int(0), rat_int(1)], true).unwrap();
        let index_set = IndexSet::new(d, vectors.clone()).unwrap();
        let inst = Instance::new(
            law,
            values,
            index_set,
            1,
            delta.clone(),
            ThresholdSpec::Explicit(threshold.clone()),
        )
        .unwrap();
        let family = threshold_family(&inst, BUDGET).unwrap();
        let y = ReplicaMatrix::all_ones(1, d);
        assert!(is_bad(&inst, &family, &y));
        let cover = build_cover_for_y(&inst, &family, &y).unwrap();
        // every entry binds at code 2, so tail and point weights agree and
        // the weight is sum of p^|W|
        let weight = weight_weak(&cover, &inst.law);
        assert_eq!(weight, weight_delta(&cover, &inst.law));
        let mut recomputed = Rat::zero();
        for entry in &cover.entries {
            for &i in &entry.witness_set {
                assert_eq!(entry.x_star.code(i), 2);
            }
            let mut term = Rat::one();
            for _ in 0..entry.witness_set.len() {
                term *= &p;
            }
            recomputed += term;
        }
        assert_eq!(weight, recomputed);

        // independent oracle: brute-force search over all subset families
        let family_sets: Vec<u8> = family
            .configs()
            .map(|x| {
                let mut mask = 0u8;
                for (i, &code) in x.0.iter().enumerate() {
                    if code == 2 {
                        mask |= 1 << i;
                    }
                }
                mask
            })
            .collect();
        let emitted: Vec<u8> = cover
            .entries
            .iter()
            .map(|e| {
                let mut mask = 0u8;
                for &i in &e.witness_set {
                    mask |= 1 << i;
                }
                mask
            })
            .collect();
        assert!(oracle::selector_family_covers(&family_sets, &emitted));
        let best = oracle::selector_min_cover_weight(d, &p, &family_sets, &delta);
        let min_weight = best.expect("a light cover exists for these cases");
        assert!(weight >= min_weight);
        assert!(weight <= delta);
        assert_eq!(
            weight, min_weight,
            "witness cover is optimal on these cases"
        );
    }
    println!("acceptance 8 PASS: selector families match the brute-force cover search");
}

#[test]
fn criterion_9_byte_identical_reruns() {
    let bin = env!("CARGO_BIN_EXE_smallcover");
    let configs_dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let tmp = std::env::temp_dir().join(format!("smallcover-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&tmp).unwrap();

    let small_suite = tmp.join("suite.json");
    std::fs::write(
        &small_suite,
        r#"{ "verify": { "instances": 40, "seed": 11 } }"#,
    )
    .unwrap();

    let runs: Vec<(&str, std::path::PathBuf, Vec<String>)> = vec![
        (
            "estimate",
            configs_dir.join("i1.json"),
            vec![
                "--mode".into(),
                "mc".into(),
                "--seed".into(),
                "9".into(),
                "--samples".into(),
                "50000".into(),
            ],
        ),
        ("family", configs_dir.join("i1.json"), vec![]),
        ("witness", configs_dir.join("i1_witness.json"), vec![]),
        ("cover", configs_dir.join("i1_cover.json"), vec![]),
        ("classes", configs_dir.join("i1.json"), vec![]),
        ("reduce", configs_dir.join("reduce_dyadic.json"), vec![]),
        ("selector", configs_dir.join("selector_d2.json"), vec![]),
        (
            "verify",
            small_suite.clone(),
            vec!["--seed".into(), "11".into()],
        ),
    ];

    for (command, config, extra) in runs {
        let mut outputs = Vec::new();
        for (tag, threads) in [("a", "1"), ("b", "4"), ("c", "4")] {
            let out = tmp.join(format!("{command}-{tag}.json"));
            let status = std::process::Command::new(bin)
                .arg(command)
                .arg("--config")
                .arg(&config)
                .arg("--out")
                .arg(&out)
                .args(&extra)
                .env("RAYON_NUM_THREADS", threads)
                .status()
                .expect("binary runs");
            assert!(
                status.success(),
                "{command} exited with {:?}",
                status.code()
            );
            outputs.push(std::fs::read(&out).unwrap());
        }
        assert_eq!(outputs[0], outputs[1], "{command}: 1 vs 4 workers differ");
        assert_eq!(outputs[1], outputs[2], "{command}: rerun differs");
    }
    std::fs::remove_dir_all(&tmp).ok();
    println!("acceptance 9 PASS: all commands byte-identical across reruns and worker counts");
}

/// Self-contained brute force, sharing no code with the library paths it
/// checks.
mod oracle {
    use super::*;

    fn value_of(inst: &Instance, code: usize) -> Rat {
        inst.values.values()[code - 1].clone()
    }

    /// First-maximum dot product over the index set.
    fn best_value(inst: &Instance, codes: &[usize]) -> Rat {
        let mut best: Option<Rat> = None;
        for t in inst.index_set.vectors() {
            let mut dot = Rat::zero();
            for (i, &code) in codes.iter().enumerate() {
                dot += &t[i] * value_of(inst, code);
            }
            if best.as_ref().is_none_or(|b| dot > *b) {
                best = Some(dot);
            }
        }
        best.unwrap()
    }

    fn for_each_tuple(n: usize, len: usize, mut f: impl FnMut(&[usize])) {
        let mut codes = vec![1usize; len];
        loop {
            f(&codes);
            let mut i = len;
            loop {
                if i == 0 {
                    return;
                }
                i -= 1;
                if codes[i] < n {
                    codes[i] += 1;
                    break;
                }
                codes[i] = 1;
            }
        }
    }

    fn tuple_probability(inst: &Instance, codes: &[usize]) -> Rat {
        let mut p = Rat::one();
        for &code in codes {
            p *= &inst.law.probs()[code - 1];
        }
        p
    }

    pub fn expected_supremum(inst: &Instance) -> Rat {
        let mut total = Rat::zero();
        for_each_tuple(inst.n(), inst.dim(), |codes| {
            total += tuple_probability(inst, codes) * best_value(inst, codes);
        });
        total
    }

    pub fn family(inst: &Instance) -> Vec<Vec<usize>> {
        let threshold = match &inst.threshold {
            ThresholdSpec::Explicit(l) => l.clone(),
            ThresholdSpec::MultipleOfMean(k) => k * expected_supremum(inst),
        };
        let mut members = Vec::new();
        for_each_tuple(inst.n(), inst.dim(), |codes| {
            if best_value(inst, codes) > threshold {
                members.push(codes.to_vec());
            }
        });
        members
    }

    /// First argmax index into T for a family member.
    fn chosen_vector(inst: &Instance, codes: &[usize]) -> Vec<Rat> {
        let mut best: Option<(Rat, usize)> = None;
        for (idx, t) in inst.index_set.vectors().iter().enumerate() {
            let mut dot = Rat::zero();
            for (i, &code) in codes.iter().enumerate() {
                dot += &t[i] * value_of(inst, code);
            }
            if best.as_ref().is_none_or(|(b, _)| dot > *b) {
                best = Some((dot, idx));
            }
        }
        inst.index_set.vectors()[best.unwrap().1].clone()
    }

    fn replica_value(inst: &Instance, family: &[Vec<usize>], flat: &[usize]) -> Rat {
        let d = inst.dim();
        let mut best: Option<Rat> = None;
        for member in family {
            let t = chosen_vector(inst, member);
            let mut total = Rat::zero();
            for (cell, &code) in flat.iter().enumerate() {
                total += &t[cell % d] * value_of(inst, code);
            }
            if best.as_ref().is_none_or(|b| total > *b) {
                best = Some(total);
            }
        }
        best.unwrap_or_else(Rat::zero)
    }

    /// All bad replica matrices (flattened row-major) and their total mass.
    pub fn bad_matrices(inst: &Instance, family: &[Vec<usize>]) -> (Vec<Vec<usize>>, Rat) {
        let threshold = match &inst.threshold {
            ThresholdSpec::Explicit(l) => l.clone(),
            ThresholdSpec::MultipleOfMean(k) => k * expected_supremum(inst),
        };
        let mut bad = Vec::new();
        let mut mass = Rat::zero();
        for_each_tuple(inst.n(), inst.replicas * inst.dim(), |flat| {
            let value = replica_value(inst, family, flat);
            if value * rat_int(2) <= threshold {
                bad.push(flat.to_vec());
                mass += tuple_probability(inst, flat);
            }
        });
        (bad, mass)
    }

    pub fn replica_mean(inst: &Instance, family: &[Vec<usize>]) -> Rat {
        let mut total = Rat::zero();
        for_each_tuple(inst.n(), inst.replicas * inst.dim(), |flat| {
            total += tuple_probability(inst, flat) * replica_value(inst, family, flat);
        });
        total
    }

    /// Coverage of a Bernoulli family (configurations as bitmasks of
    /// coordinates at code 2) by a family of subsets.
    pub fn selector_family_covers(family_sets: &[u8], cover: &[u8]) -> bool {
        family_sets
            .iter()
            .all(|x| cover.iter().any(|g| g & x == *g))
    }

    /// Exhaustive search over all families of subsets of [d]: the minimum
    /// total weight sum p^|G| of a covering family with weight <= delta.
    pub fn selector_min_cover_weight(
        d: usize,
        p: &Rat,
        family_sets: &[u8],
        delta: &Rat,
    ) -> Option<Rat> {
        let subset_count = 1u32 << (1 << d);
        let mut best: Option<Rat> = None;
        for family_mask in 0..subset_count {
            let subsets: Vec<u8> = (0..(1 << d) as u8)
                .filter(|g| family_mask & (1u32 << g) != 0)
                .collect();
            if !selector_family_covers(family_sets, &subsets) {
                continue;
            }
            let mut weight = Rat::zero();
            for g in &subsets {
                let mut term = Rat::one();
                for _ in 0..g.count_ones() {
                    term *= p;
                }
                weight += term;
            }
            if weight > *delta {
                continue;
            }
            if best.as_ref().is_none_or(|b| weight < *b) {
                best = Some(weight);
            }
        }
        best
    }

    #[test]
    fn oracle_agrees_with_itself_on_tiny_laws() {
        // max of two fair selector coordinates has mean 3/4
        let law = DiscreteLaw::new(vec![rat(1, 2), rat(1, 2)]).unwrap();
        let values = ValueMap::new(vec![rat_int(0), rat_int(1)], true).unwrap();
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
        assert_eq!(expected_supremum(&inst), rat(3, 4));
    }
}
