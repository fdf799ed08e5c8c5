//! Heuristic defender strategies used as comparison points for the
//! equilibrium: random polytope vertices and single-criterion optimizers.

use std::fmt;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::attacker::SolverConfig;
use crate::defender::{
    defender_polytope, evaluate_all, resource_usage, solve_defender_lp, solve_with_evaluations,
    AlgorithmEvaluation, DefenderError, ResourceUsage,
};
use crate::lp::{Sense, FEASIBILITY_TOL};
use crate::model::{GameInstance, MixedStrategy};

/// Default number of random vertices in a comparison run.
pub const DEFAULT_SAMPLES: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingleObjective {
    MinOpCost,
    MinLatency,
    MaxResilience,
}

impl SingleObjective {
    pub const ALL: [SingleObjective; 3] = [
        SingleObjective::MinOpCost,
        SingleObjective::MinLatency,
        SingleObjective::MaxResilience,
    ];
}

impl fmt::Display for SingleObjective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SingleObjective::MinOpCost => "min_op_cost",
            SingleObjective::MinLatency => "min_latency",
            SingleObjective::MaxResilience => "max_resilience",
        })
    }
}

fn solve_over_polytope(
    instance: &GameInstance,
    sense: Sense,
    objective: Vec<f64>,
) -> Result<MixedStrategy, DefenderError> {
    let lp = defender_polytope(instance, sense, objective);
    let sol = solve_defender_lp(&lp)?;
    if lp
        .constraints
        .iter()
        .any(|c| c.violation(&sol.values) > FEASIBILITY_TOL * (1.0 + c.rhs.abs()))
    {
        return Err(DefenderError::InfeasibleDefender);
    }
    Ok(MixedStrategy::new(sol.values))
}

/// Vertex minimizing a standard-normal random objective drawn from `seed`.
pub fn random_vertex_strategy(
    instance: &GameInstance,
    seed: u64,
) -> Result<MixedStrategy, DefenderError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let objective = (0..instance.algorithms.len())
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    solve_over_polytope(instance, Sense::Minimize, objective)
}

pub fn single_objective_strategy(
    instance: &GameInstance,
    objective: SingleObjective,
) -> Result<MixedStrategy, DefenderError> {
    let column = |f: fn(&crate::model::EncryptionAlgorithm) -> f64| {
        instance.algorithms.iter().map(f).collect()
    };
    match objective {
        SingleObjective::MinOpCost => {
            solve_over_polytope(instance, Sense::Minimize, column(|a| a.op_cost))
        }
        SingleObjective::MinLatency => {
            solve_over_polytope(instance, Sense::Minimize, column(|a| a.latency))
        }
        SingleObjective::MaxResilience => {
            solve_over_polytope(instance, Sense::Maximize, column(|a| a.resilience))
        }
    }
}

/// Per-sample seed derived from a master seed; sample `i` always gets the
/// same seed regardless of how many samples are drawn.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng.next_u64()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub label: String,
    pub objective: f64,
    pub breach: f64,
    pub usage: ResourceUsage,
    pub strategy: MixedStrategy,
}

/// Strategies ranked by defender objective, best first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
}

pub const STACKELBERG_LABEL: &str = "stackelberg";

impl Comparison {
    pub fn row(&self, label: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    /// `label,objective,breach,op,cpu,mem,latency,resilience`
    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "label",
            "objective",
            "breach",
            "op",
            "cpu",
            "mem",
            "latency",
            "resilience",
        ])?;
        for r in &self.rows {
            let u = &r.usage;
            w.write_record([
                r.label.clone(),
                r.objective.to_string(),
                r.breach.to_string(),
                u.op.to_string(),
                u.cpu.to_string(),
                u.mem.to_string(),
                u.latency.to_string(),
                u.resilience.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn row(
    instance: &GameInstance,
    evaluations: &[AlgorithmEvaluation],
    label: String,
    strategy: MixedStrategy,
) -> ComparisonRow {
    let utilities: Vec<f64> = evaluations.iter().map(|e| e.utility).collect();
    let breach: Vec<f64> = evaluations.iter().map(|e| e.p_succ_star).collect();
    ComparisonRow {
        label,
        objective: strategy.expectation(&utilities),
        breach: strategy.expectation(&breach),
        usage: resource_usage(instance, &strategy),
        strategy,
    }
}

/// Scores `strategies` against the attacker best responses at the
/// instance's budget, adds the equilibrium as a reference row and sorts by
/// objective (ties keep input order, reference first).
pub fn compare_strategies(
    instance: &GameInstance,
    strategies: &[(String, MixedStrategy)],
    config: &SolverConfig,
) -> Result<Comparison, DefenderError> {
    let evaluations = evaluate_all(instance, config)?;
    let optimum = solve_with_evaluations(instance, evaluations.clone())?;
    let mut rows = vec![row(
        instance,
        &evaluations,
        STACKELBERG_LABEL.into(),
        optimum.strategy,
    )];
    rows.extend(
        strategies
            .iter()
            .map(|(label, s)| row(instance, &evaluations, label.clone(), s.clone())),
    );
    rows.sort_by(|a, b| b.objective.total_cmp(&a.objective));
    Ok(Comparison { rows })
}

/// Labels `random-<i>` for `samples` random vertices plus the three
/// single-objective heuristics.
pub fn baseline_strategies(
    instance: &GameInstance,
    samples: usize,
    seed: u64,
) -> Result<Vec<(String, MixedStrategy)>, DefenderError> {
    let mut out = Vec::with_capacity(samples + SingleObjective::ALL.len());
    for i in 0..samples {
        let s = random_vertex_strategy(instance, derive_seed(seed, i as u64))?;
        out.push((format!("random-{i}"), s));
    }
    for objective in SingleObjective::ALL {
        out.push((
            objective.to_string(),
            single_objective_strategy(instance, objective)?,
        ));
    }
    Ok(out)
}
