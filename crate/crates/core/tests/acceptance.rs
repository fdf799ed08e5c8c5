//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line for its
//! criterion (listing failed sub-checks) and then asserts.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crypto_stackelberg::attacker::{
    calibrate_threshold, calibration_methods, solve_brute_force, solve_dp,
    solve_sample_greedy_with, CalibrationConfig, DpConfig, ScriptedCoins, SolverConfig,
};
use crypto_stackelberg::baselines::{
    baseline_strategies, compare_strategies, derive_seed, random_vertex_strategy, SingleObjective,
    STACKELBERG_LABEL,
};
use crypto_stackelberg::defender::{
    defender_polytope, solve_stackelberg, support_size_check, StrategyReport,
};
use crypto_stackelberg::lp::{solve_lp, LpStatus, Relation, Sense};
use crypto_stackelberg::model::{
    attacker_utility, AttackMethod, AttackerParams, CostFunction, DefenderBudgets, DefenderWeights,
    EncryptionAlgorithm, GameInstance,
};
use crypto_stackelberg::robust::{
    breach_regret_matrix, opt_label, regret_matrix, scenario_table, solve_minimax_regret,
};
use crypto_stackelberg::scenario::paper_dataset;

struct Criterion {
    name: &'static str,
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Criterion {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn close(&mut self, label: &str, got: f64, want: f64, tol: f64) {
        let ok = (got - want).abs() <= tol;
        self.check(
            ok,
            format!("{label}: got {got:.6}, expected {want} +/- {tol}"),
        );
    }

    fn close_rel(&mut self, label: &str, got: f64, want: f64, rel: f64) {
        let ok = (got - want).abs() <= rel * want.abs();
        self.check(
            ok,
            format!("{label}: got {got:.6}, expected {want} +/- {rel} rel"),
        );
    }

    fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    fn finish(self) {
        let status = if self.failures.is_empty() {
            "PASS"
        } else {
            "FAIL"
        };
        let mut line = format!("[acceptance] {status} {}", self.name);
        if !self.notes.is_empty() {
            line.push_str(&format!(" (note: {})", self.notes.join("; ")));
        }
        if !self.failures.is_empty() {
            line.push_str(&format!(" :: {}", self.failures.join("; ")));
        }
        // Written straight to stdout so the line survives output capture.
        let mut out = std::io::stdout().lock();
        writeln!(out, "{line}").unwrap();
        out.flush().unwrap();
        drop(out);
        assert!(self.failures.is_empty(), "{line}");
    }
}

const BREACH_K40: [f64; 8] = [0.970, 0.990, 0.950, 0.990, 0.940, 0.835, 0.450, 0.400];

const PRINTED_UTILITIES: [[f64; 8]; 5] = [
    [
        11.5275, 93.5418, 4.2352, 105.938, 81.605, -1456.808, 16.373, 46.406,
    ],
    [
        11.5275, -0.5082, 4.2352, 105.938, -30.395, -1456.808, 16.373, 46.406,
    ],
    [
        1.3275, -0.5082, 4.2352, 105.938, -30.395, -1479.308, 16.373, 46.406,
    ],
    [
        1.3275, -0.5082, 4.2352, -17.812, -49.995, -1479.308, 16.373, 46.406,
    ],
    [
        1.3275, -0.5082, 4.2352, -17.812, -49.995, -1490.308, 16.373, 46.406,
    ],
];
const PRINTED_OPTIMA: [f64; 5] = [70.154, 54.054, 53.997, 19.122, 19.122];
const PRINTED_MMR: [f64; 8] = [0.0, 0.171190, 0.0, 0.282278, 0.0, 0.0, 0.146531, 0.400000];
const PRINTED_REGRETS: [f64; 5] = [3.2750, 3.2750, 3.2188, 3.2750, 3.2750];
const PRINTED_B_STAR: [f64; 5] = [0.2077, 0.3454, 0.3454, 0.6331, 0.6331];
const PRINTED_MMR_BREACH_ROW: [f64; 5] = [0.0182, 0.0500, 0.0500, 0.0418, 0.0418];

fn worked_example() -> (EncryptionAlgorithm, AttackerParams) {
    let alg = EncryptionAlgorithm {
        id: "AES128".into(),
        op_cost: 0.0,
        cpu_cost: 0.0,
        mem_cost: 0.0,
        latency: 0.0,
        resilience: 0.0,
        protected_value: 0.0,
        family: 0,
        attacks: vec![
            AttackMethod::new("A1", 0.20, 100.0),
            AttackMethod::new("A2", 0.35, 200.0),
            AttackMethod::new("A3", 0.42, 280.0),
            AttackMethod::new("A4", 0.25, 120.0),
        ],
    };
    (
        alg,
        AttackerParams::new(1200.0, 500.0, CostFunction::IDENTITY),
    )
}

#[test]
fn criterion_01_worked_attacker_example() {
    let mut c = Criterion::new("1 worked attacker example");
    let (alg, params) = worked_example();
    let config = DpConfig {
        cost_scale: 1,
        ..DpConfig::default()
    };
    let start = Instant::now();
    let dp = solve_dp(&alg, &params, &config).unwrap();
    let elapsed = start.elapsed();
    c.close("DP utility", dp.utility, 312.0, 1e-9);
    c.close("DP success", dp.success_prob, 0.61, 1e-12);
    let bf = solve_brute_force(&alg, &params).unwrap();
    c.check(
        bf == dp,
        format!("brute force {bf:?} differs from DP {dp:?}"),
    );
    let mut coins = ScriptedCoins::new(vec![false, true, false, false]);
    let greedy = solve_sample_greedy_with(&alg, &params, 0.414, &mut coins);
    c.close("SampleGreedy utility", greedy.utility, 224.0, 1e-9);
    let gap = (dp.utility - greedy.utility) / dp.utility * 100.0;
    c.close("gap percent", gap, 28.2, 0.1);
    c.check(
        elapsed.as_secs_f64() < 0.010,
        format!("DP runtime {elapsed:?} >= 10 ms"),
    );
    c.finish();
}

/// Whether every optimal strategy of `report`'s LP has the same vector,
/// decided by minimizing and maximizing each coordinate over the optimal face.
fn optimal_vertex_is_unique(instance: &GameInstance, report: &StrategyReport) -> bool {
    let n = instance.algorithms.len();
    let utilities: Vec<f64> = report.evaluations.iter().map(|e| e.utility).collect();
    for i in 0..n {
        for sense in [Sense::Minimize, Sense::Maximize] {
            let mut objective = vec![0.0; n];
            objective[i] = 1.0;
            let mut lp = defender_polytope(instance, sense, objective);
            lp.constrain(
                "optimal-face",
                utilities.clone(),
                Relation::Ge,
                report.objective - 1e-7,
            );
            let sol = solve_lp(&lp).unwrap();
            if sol.status != LpStatus::Optimal
                || (sol.values[i] - report.strategy.probs[i]).abs() > 1e-6
            {
                return false;
            }
        }
    }
    true
}

#[test]
fn criterion_02_stackelberg_equilibrium() {
    let mut c = Criterion::new("2 Stackelberg equilibrium at k=40");
    let data = paper_dataset();
    let inst = data.instance;
    let report = solve_stackelberg(&inst, &SolverConfig::default()).unwrap();
    c.close("objective", report.objective, 19.1217, 1e-3);
    c.close_rel("usage op", report.usage.op, 1.2600, 1e-3);
    c.close_rel("usage cpu", report.usage.cpu, 500941.256, 1e-3);
    c.close_rel("usage mem", report.usage.mem, 1045.6, 1e-3);
    c.close_rel("usage latency", report.usage.latency, 207.06, 1e-3);
    c.close_rel("usage resilience", report.usage.resilience, 0.4000, 1e-3);
    c.close("expected breach", report.expected_breach, 0.638, 1e-3);
    for (e, want) in report.evaluations.iter().zip(BREACH_K40) {
        c.close(
            &format!("breach {}", e.algorithm),
            e.p_succ_star,
            want,
            1e-3,
        );
    }
    if optimal_vertex_is_unique(&inst, &report) {
        let want = [0.0, 0.0, 0.2, 0.2, 0.0, 0.0, 0.2, 0.4];
        for (i, (got, w)) in report.strategy.probs.iter().zip(want).enumerate() {
            c.close(&format!("p[{i}]"), *got, w, 1e-3);
        }
        c.note("optimal vertex unique, strategy checked");
    } else {
        c.note("optimal vertex not unique, strategy not pinned");
    }
    c.finish();
}

#[test]
fn criterion_03_scenario_utilities() {
    let mut c = Criterion::new("3 scenario utilities and V*");
    let data = paper_dataset();
    let table = scenario_table(
        &data.instance,
        &data.scenarios.unwrap(),
        &SolverConfig::default(),
    )
    .unwrap();
    for (s, (row, want)) in table.utilities.iter().zip(PRINTED_UTILITIES).enumerate() {
        for (i, (got, w)) in row.iter().zip(want).enumerate() {
            c.close(
                &format!("l[{}] at k={}", table.algorithms[i], table.budgets[s]),
                *got,
                w,
                1e-3,
            );
        }
    }
    for (s, (got, want)) in table.optima.iter().zip(PRINTED_OPTIMA).enumerate() {
        c.close(&format!("V* at k={}", table.budgets[s]), *got, want, 1e-3);
    }
    c.finish();
}

#[test]
fn criterion_04_minimax_regret() {
    let mut c = Criterion::new("4 minimax regret");
    let data = paper_dataset();
    let inst = data.instance;
    let table = scenario_table(&inst, &data.scenarios.unwrap(), &SolverConfig::default()).unwrap();
    let mmr = solve_minimax_regret(&inst, &table).unwrap();

    let strategy_matches = mmr
        .strategy
        .probs
        .iter()
        .zip(PRINTED_MMR)
        .all(|(got, want)| (got - want).abs() <= 1e-3);
    let same_regret = (mmr.max_regret - 3.2750).abs() <= 1e-3;
    if !strategy_matches && same_regret {
        c.note(format!("alternate optimal vertex {:?}", mmr.strategy.probs));
    } else if !strategy_matches {
        for (i, (got, want)) in mmr.strategy.probs.iter().zip(PRINTED_MMR).enumerate() {
            c.close(&format!("p_mmr[{i}]"), *got, want, 1e-3);
        }
    }
    c.close("max regret", mmr.max_regret, 3.2750, 1e-3);
    for (s, (got, want)) in mmr
        .per_scenario_regret
        .iter()
        .zip(PRINTED_REGRETS)
        .enumerate()
    {
        c.close(
            &format!("regret at k={}", table.budgets[s]),
            *got,
            want,
            1e-3,
        );
    }
    let matrix = regret_matrix(&table, &[("mmr".into(), mmr.strategy.clone())]);
    c.close(
        "Opt(k=25) at k=11",
        matrix.cell(&opt_label(25.0), 11.0).unwrap(),
        26.2824,
        1e-2,
    );
    c.close(
        "Opt(k=11) row max",
        matrix.row(&opt_label(11.0)).unwrap().max,
        4.1628,
        1e-2,
    );
    c.finish();
}

#[test]
fn criterion_05_breach_regret() {
    let mut c = Criterion::new("5 breach regret");
    let data = paper_dataset();
    let inst = data.instance;
    let table = scenario_table(&inst, &data.scenarios.unwrap(), &SolverConfig::default()).unwrap();
    for (s, (got, want)) in table.optimal_breach.iter().zip(PRINTED_B_STAR).enumerate() {
        c.close(&format!("B* at k={}", table.budgets[s]), *got, want, 1e-3);
    }
    let mmr = solve_minimax_regret(&inst, &table).unwrap();
    let matrix = breach_regret_matrix(&table, &[("mmr".into(), mmr.strategy)]);
    let row = matrix.row("mmr").unwrap();
    for (s, (got, want)) in row.cells.iter().zip(PRINTED_MMR_BREACH_ROW).enumerate() {
        c.close(
            &format!("mmr breach regret at k={}", table.budgets[s]),
            *got,
            want,
            1e-3,
        );
    }
    c.close("mmr breach regret max", row.max, 0.0500, 1e-3);
    c.finish();
}

fn random_algorithm(
    rng: &mut ChaCha8Rng,
    max_methods: usize,
    max_cost: u32,
) -> EncryptionAlgorithm {
    let n = rng.random_range(1..=max_methods);
    EncryptionAlgorithm {
        id: "random".into(),
        op_cost: 0.0,
        cpu_cost: 0.0,
        mem_cost: 0.0,
        latency: 0.0,
        resilience: 0.0,
        protected_value: 1.0,
        family: 0,
        attacks: (0..n)
            .map(|j| {
                AttackMethod::new(
                    format!("m{j}"),
                    rng.random_range(0.01..0.99),
                    f64::from(rng.random_range(1..=max_cost)),
                )
            })
            .collect(),
    }
}

#[test]
fn criterion_06_dp_matches_brute_force() {
    let mut c = Criterion::new("6 DP equals brute force on 200 instances");
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let config = DpConfig {
        cost_scale: 1,
        ..DpConfig::default()
    };
    let start = Instant::now();
    for trial in 0..200 {
        let alg = random_algorithm(&mut rng, 12, 100);
        let params = AttackerParams::new(
            rng.random_range(1.0..500.0),
            f64::from(rng.random_range(0..=100)),
            CostFunction::new(rng.random_range(0.0..2.0), rng.random_range(0.0..0.01)),
        );
        let dp = solve_dp(&alg, &params, &config).unwrap();
        let bf = solve_brute_force(&alg, &params).unwrap();
        c.check(
            dp.utility == bf.utility,
            format!(
                "trial {trial}: DP {} vs brute force {}",
                dp.utility, bf.utility
            ),
        );
    }
    let elapsed = start.elapsed();
    c.check(
        elapsed.as_secs_f64() < 20.0,
        format!("runtime {elapsed:?} >= 20 s"),
    );
    c.finish();
}

#[test]
fn criterion_07_submodularity() {
    let mut c = Criterion::new("7 submodularity of the attacker objective");
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut triples = 0u64;
    for trial in 0..100 {
        let alg = random_algorithm(&mut rng, 8, 100);
        let params = AttackerParams::new(
            rng.random_range(1.0..500.0),
            f64::INFINITY,
            CostFunction::new(rng.random_range(0.0..2.0), rng.random_range(0.0..0.01)),
        );
        let n = alg.attacks.len();
        let f = |mask: u32| {
            attacker_utility(
                (0..n)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| &alg.attacks[i]),
                &params,
            )
        };
        let values: Vec<f64> = (0..1u32 << n).map(f).collect();
        for b in 0..1u32 << n {
            // Enumerate every subset a of b.
            let mut a = b;
            loop {
                for j in (0..n).filter(|j| b & (1 << j) == 0) {
                    let bit = 1u32 << j;
                    let lhs = values[(a | bit) as usize] - values[a as usize];
                    let rhs = values[(b | bit) as usize] - values[b as usize];
                    triples += 1;
                    if lhs < rhs - 1e-9 {
                        c.check(false, format!("trial {trial}: A={a:b} B={b:b} j={j}"));
                    }
                }
                if a == 0 {
                    break;
                }
                a = (a - 1) & b;
            }
        }
    }
    c.note(format!("{triples} triples"));
    c.finish();
}

fn random_defender_instance(rng: &mut ChaCha8Rng) -> GameInstance {
    let n = rng.random_range(2..=8);
    let families = rng.random_range(1..=3u32);
    let algorithms: Vec<EncryptionAlgorithm> = (0..n)
        .map(|i| {
            let mut alg = random_algorithm(rng, 4, 40);
            alg.id = format!("E{i}");
            alg.op_cost = rng.random_range(0.1..5.0);
            alg.cpu_cost = rng.random_range(1e3..1e6);
            alg.mem_cost = rng.random_range(10.0..1e4);
            alg.latency = rng.random_range(1.0..1e3);
            alg.resilience = rng.random_range(0.0..1.0);
            alg.protected_value = rng.random_range(10.0..200.0);
            alg.family = rng.random_range(0..families);
            alg
        })
        .collect();

    // Budgets are loosened around a random anchor strategy so the polytope
    // is never empty.
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let anchor: Vec<f64> = raw.iter().map(|x| x / total).collect();
    let expect = |f: fn(&EncryptionAlgorithm) -> f64| -> f64 {
        algorithms.iter().zip(&anchor).map(|(a, p)| p * f(a)).sum()
    };
    let mut slack = || rng.random_range(1.0..1.6);
    let op_max = expect(|a| a.op_cost) * slack();
    let cpu_max = expect(|a| a.cpu_cost) * slack();
    let mem_max = expect(|a| a.mem_cost) * slack();
    let latency_max = expect(|a| a.latency) * slack();
    let resilience_min = expect(|a| a.resilience) / slack();
    let mut family_caps = BTreeMap::new();
    for fam in 0..families {
        let mass: f64 = algorithms
            .iter()
            .zip(&anchor)
            .filter(|(a, _)| a.family == fam)
            .map(|(_, p)| p)
            .sum();
        if mass > 0.0 && rng.random_bool(0.7) {
            family_caps.insert(fam, (mass * rng.random_range(1.0..1.6)).min(1.0));
        }
    }
    GameInstance {
        algorithms,
        weights: DefenderWeights {
            op: 0.02,
            cpu: 2e-5,
            mem: 2e-3,
            latency: 1e-3,
            resilience: 0.06,
        },
        budgets: DefenderBudgets {
            op_max,
            cpu_max,
            mem_max,
            latency_max,
            resilience_min,
            family_caps,
        },
        attacker: AttackerParams::new(
            rng.random_range(10.0..300.0),
            rng.random_range(0.0..60.0),
            CostFunction::IDENTITY,
        ),
    }
}

#[test]
fn criterion_08_support_bound() {
    let mut c = Criterion::new("8 support size bounded by binding constraints");
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for trial in 0..100 {
        let inst = random_defender_instance(&mut rng);
        match solve_stackelberg(&inst, &SolverConfig::default()) {
            Ok(report) => {
                let check = support_size_check(&report);
                c.check(
                    check.holds,
                    format!(
                        "trial {trial}: support {} > binding {}",
                        check.support_size, check.binding_count
                    ),
                );
            }
            Err(e) => c.check(false, format!("trial {trial}: {e}")),
        }
    }
    c.finish();
}

#[test]
fn criterion_09_baseline_dominance() {
    let mut c = Criterion::new("9 equilibrium dominates baselines");
    let inst = paper_dataset().instance;
    let config = SolverConfig::default();
    let strategies = baseline_strategies(&inst, 50, 0).unwrap();
    let cmp = compare_strategies(&inst, &strategies, &config).unwrap();
    let best = cmp.row(STACKELBERG_LABEL).unwrap().objective;
    c.close("equilibrium objective", best, 19.1217, 1e-3);
    let mut strict = 0;
    for row in &cmp.rows {
        c.check(
            best >= row.objective - 1e-9,
            format!(
                "{} objective {} exceeds equilibrium {best}",
                row.label, row.objective
            ),
        );
        if row.label.starts_with("random-") && best > row.objective + 1e-9 {
            strict += 1;
        }
    }
    c.check(
        strict >= 45,
        format!("only {strict} of 50 random vertices strictly worse"),
    );
    for objective in SingleObjective::ALL {
        c.check(
            cmp.row(&objective.to_string()).is_some(),
            format!("missing {objective}"),
        );
    }
    // Same seeds reproduce the same vertices.
    let again = random_vertex_strategy(&inst, derive_seed(0, 0)).unwrap();
    c.check(again == strategies[0].1, "random vertex not reproducible");
    c.note(format!("{strict}/50 strictly dominated"));
    c.finish();
}

#[test]
fn criterion_10_calibration() {
    let mut c = Criterion::new("10 calibration procedure");
    let config = CalibrationConfig {
        max_methods: 150,
        ..CalibrationConfig::default()
    };
    let first = calibrate_threshold(&config);
    let second = calibrate_threshold(&config);
    c.check(
        first.series.len() == 150,
        format!("series has {} points", first.series.len()),
    );
    let shape = |cal: &crypto_stackelberg::attacker::Calibration| -> Vec<usize> {
        cal.series.iter().map(|p| p.methods).collect()
    };
    c.check(
        shape(&first) == shape(&second),
        "series shape differs between runs",
    );
    c.check(
        calibration_methods(&config) == calibration_methods(&config),
        "instance sequence differs between runs",
    );
    for cal in [&first, &second] {
        let expected = cal
            .series
            .iter()
            .find(|p| p.seconds > config.time_limit)
            .map_or(config.max_methods, |p| p.methods);
        c.check(
            cal.threshold == expected,
            format!(
                "threshold {} is not the first crossing {expected}",
                cal.threshold
            ),
        );
    }
    c.note(format!("threshold {}", first.threshold));
    c.finish();
}
