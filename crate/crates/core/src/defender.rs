//! Leader side of the game: per-algorithm utilities from attacker best
//! responses and the defender's resource-constrained LP.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attacker::{solve_hybrid, AttackerError, SolverConfig};
use crate::lp::{solve_lp, LinearProgram, LpError, LpStatus, Relation, Sense, BINDING_TOL};
use crate::model::{per_algorithm_utility, AttackPlan, GameInstance, MixedStrategy};

/// Probabilities at or below this count as outside the support.
pub const SUPPORT_THRESHOLD: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DefenderError {
    #[error(transparent)]
    Attacker(#[from] AttackerError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("defender constraints are infeasible")]
    InfeasibleDefender,
    #[error("defender LP is unbounded")]
    Unbounded,
}

/// Attacker best response against one algorithm and the resulting `l_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmEvaluation {
    pub algorithm: String,
    pub attack_plan: AttackPlan,
    pub p_succ_star: f64,
    pub utility: f64,
}

/// Expected resource consumption of a mixed strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResourceUsage {
    pub op: f64,
    pub cpu: f64,
    pub mem: f64,
    pub latency: f64,
    pub resilience: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyReport {
    pub strategy: MixedStrategy,
    pub objective: f64,
    pub usage: ResourceUsage,
    pub expected_breach: f64,
    pub binding: Vec<String>,
    pub binding_count: usize,
    pub support_size: usize,
    pub evaluations: Vec<AlgorithmEvaluation>,
}

impl StrategyReport {
    /// Assembles a report for `strategy`, recomputing objective and breach
    /// from the evaluations.
    pub fn new(
        instance: &GameInstance,
        evaluations: Vec<AlgorithmEvaluation>,
        strategy: MixedStrategy,
        binding: Vec<String>,
    ) -> Self {
        let utilities: Vec<f64> = evaluations.iter().map(|e| e.utility).collect();
        let breach: Vec<f64> = evaluations.iter().map(|e| e.p_succ_star).collect();
        Self {
            objective: strategy.expectation(&utilities),
            usage: resource_usage(instance, &strategy),
            expected_breach: strategy.expectation(&breach),
            binding_count: binding.len(),
            binding,
            support_size: strategy.support(SUPPORT_THRESHOLD).len(),
            strategy,
            evaluations,
        }
    }
}

pub fn resource_usage(instance: &GameInstance, strategy: &MixedStrategy) -> ResourceUsage {
    let column = |f: fn(&crate::model::EncryptionAlgorithm) -> f64| {
        let values: Vec<f64> = instance.algorithms.iter().map(f).collect();
        strategy.expectation(&values)
    };
    ResourceUsage {
        op: column(|a| a.op_cost),
        cpu: column(|a| a.cpu_cost),
        mem: column(|a| a.mem_cost),
        latency: column(|a| a.latency),
        resilience: column(|a| a.resilience),
    }
}

/// Solves every attacker subgame at the instance's attacker budget.
pub fn evaluate_all(
    instance: &GameInstance,
    config: &SolverConfig,
) -> Result<Vec<AlgorithmEvaluation>, AttackerError> {
    instance
        .algorithms
        .iter()
        .map(|alg| {
            let outcome = solve_hybrid(alg, &instance.attacker, config)?;
            Ok(evaluation(instance, alg, outcome.plan))
        })
        .collect()
}

pub(crate) fn evaluation(
    instance: &GameInstance,
    algorithm: &crate::model::EncryptionAlgorithm,
    plan: AttackPlan,
) -> AlgorithmEvaluation {
    let p = plan.success_prob;
    AlgorithmEvaluation {
        algorithm: algorithm.id.clone(),
        utility: per_algorithm_utility(algorithm, p, &instance.weights),
        p_succ_star: p,
        attack_plan: plan,
    }
}

/// The defender's feasible polytope with the given objective. The first
/// `instance.algorithms.len()` variables are the strategy probabilities; any
/// further objective entries become extra variables with zero coefficients
/// in every polytope row.
pub fn defender_polytope(
    instance: &GameInstance,
    sense: Sense,
    objective: Vec<f64>,
) -> LinearProgram {
    let n = instance.algorithms.len();
    let width = objective.len();
    assert!(width >= n, "objective shorter than the strategy");
    let row = |f: &dyn Fn(&crate::model::EncryptionAlgorithm) -> f64| {
        let mut coeffs: Vec<f64> = instance.algorithms.iter().map(f).collect();
        coeffs.resize(width, 0.0);
        coeffs
    };
    let b = &instance.budgets;
    let mut lp = LinearProgram::new(sense, objective);
    lp.constrain("simplex", row(&|_| 1.0), Relation::Eq, 1.0)
        .constrain("op", row(&|a| a.op_cost), Relation::Le, b.op_max)
        .constrain("cpu", row(&|a| a.cpu_cost), Relation::Le, b.cpu_max)
        .constrain("mem", row(&|a| a.mem_cost), Relation::Le, b.mem_max)
        .constrain("latency", row(&|a| a.latency), Relation::Le, b.latency_max)
        .constrain(
            "resilience",
            row(&|a| a.resilience),
            Relation::Ge,
            b.resilience_min,
        );
    for (&family, &cap) in &b.family_caps {
        let coeffs = row(&|a| if a.family == family { 1.0 } else { 0.0 });
        lp.constrain(format!("family:{family}"), coeffs, Relation::Le, cap);
    }
    lp
}

/// `max sum p_i l_i` over the defender polytope.
pub fn build_defender_lp(
    instance: &GameInstance,
    evaluations: &[AlgorithmEvaluation],
) -> LinearProgram {
    let utilities = evaluations.iter().map(|e| e.utility).collect();
    defender_polytope(instance, Sense::Maximize, utilities)
}

/// Solves `lp` and maps non-optimal outcomes to defender errors.
pub(crate) fn solve_defender_lp(
    lp: &LinearProgram,
) -> Result<crate::lp::LpSolution, DefenderError> {
    let sol = solve_lp(lp)?;
    match sol.status {
        LpStatus::Optimal => Ok(sol),
        LpStatus::Infeasible => Err(DefenderError::InfeasibleDefender),
        LpStatus::Unbounded => Err(DefenderError::Unbounded),
    }
}

/// Attacker subgames followed by the defender LP at the instance's budget.
pub fn solve_stackelberg(
    instance: &GameInstance,
    config: &SolverConfig,
) -> Result<StrategyReport, DefenderError> {
    let evaluations = evaluate_all(instance, config)?;
    solve_with_evaluations(instance, evaluations)
}

/// The defender LP for fixed attacker responses.
pub fn solve_with_evaluations(
    instance: &GameInstance,
    evaluations: Vec<AlgorithmEvaluation>,
) -> Result<StrategyReport, DefenderError> {
    let lp = build_defender_lp(instance, &evaluations);
    let sol = solve_defender_lp(&lp)?;
    let strategy = MixedStrategy::new(sol.values);
    Ok(StrategyReport::new(
        instance,
        evaluations,
        strategy,
        sol.binding,
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportCheck {
    pub holds: bool,
    pub support_size: usize,
    pub binding_count: usize,
    pub binding: Vec<String>,
}

/// Checks `|supp(p)| <= u` for a vertex solution.
pub fn support_size_check(report: &StrategyReport) -> SupportCheck {
    SupportCheck {
        holds: report.support_size <= report.binding_count,
        support_size: report.support_size,
        binding_count: report.binding_count,
        binding: report.binding.clone(),
    }
}

/// Binding labels of the defender polytope at an arbitrary strategy.
pub fn binding_at(instance: &GameInstance, strategy: &MixedStrategy) -> Vec<String> {
    let n = instance.algorithms.len();
    let lp = defender_polytope(instance, Sense::Maximize, vec![0.0; n]);
    lp.constraints
        .iter()
        .filter(|c| {
            (c.activity(&strategy.probs) - c.rhs).abs() <= BINDING_TOL * (1.0 + c.rhs.abs())
        })
        .map(|c| c.label.clone())
        .collect()
}
