//! Solvers for the attacker subgame: pick a subset of attack methods under a
//! knapsack budget maximizing `v * P_succ(S) - phi(cost(S))`.
//!
//! [`solve_dp`] is exact (up to the integer scaling of costs),
//! [`solve_sample_greedy`] is the randomized fallback for large method
//! sets, and [`solve_hybrid`] dispatches between them. [`solve_brute_force`]
//! enumerates every subset and exists as an oracle for the other two.

mod brute;
mod calibrate;
mod dp;
mod greedy;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{failure_product, AttackPlan, AttackerParams, EncryptionAlgorithm};

pub use brute::{solve_brute_force, BRUTE_FORCE_MAX_METHODS};
pub use calibrate::{
    calibrate_threshold, calibration_methods, Calibration, CalibrationConfig, CalibrationPoint,
};
pub use dp::{scaled_budget, solve_dp, solve_dp_unguarded};
pub use greedy::{solve_sample_greedy, solve_sample_greedy_with, CoinSource, ScriptedCoins};

/// Method-count threshold above which the hybrid solver always falls back to
/// SampleGreedy. Machine dependent; see [`calibrate_threshold`].
pub const DEFAULT_METHOD_THRESHOLD: usize = 310;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AttackerError {
    #[error("brute force is limited to {max} methods, got {methods}")]
    TooManyMethods { methods: usize, max: usize },
    #[error("DP table would need {cells} cells, limit is {max}")]
    TableTooLarge { cells: u128, max: u64 },
    #[error("attacker budget must be nonnegative, got {0}")]
    BudgetNegative(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpConfig {
    /// Multiplier applied to real costs before rounding them to integers.
    pub cost_scale: u32,
    /// Largest admissible `methods * (scaled budget + 1)`.
    pub max_table_cells: u64,
}

impl Default for DpConfig {
    fn default() -> Self {
        Self {
            cost_scale: 10,
            max_table_cells: 100_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreedyConfig {
    /// Probability of accepting the best-density candidate in each round.
    pub accept_prob: f64,
    pub rng_seed: u64,
}

impl Default for GreedyConfig {
    fn default() -> Self {
        Self {
            accept_prob: 0.414,
            rng_seed: 0,
        }
    }
}

/// Everything [`solve_hybrid`] needs besides the instance itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dp: DpConfig,
    pub greedy: GreedyConfig,
    pub method_threshold: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dp: DpConfig::default(),
            greedy: GreedyConfig::default(),
            method_threshold: DEFAULT_METHOD_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Dp,
    SampleGreedy,
    BruteForce,
}

impl std::fmt::Display for SolverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolverKind::Dp => "DP",
            SolverKind::SampleGreedy => "SampleGreedy",
            SolverKind::BruteForce => "BruteForce",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridOutcome {
    pub plan: AttackPlan,
    pub solver: SolverKind,
}

/// Whether the hybrid dispatcher would run the DP for this instance.
pub fn dp_admissible(
    algorithm: &EncryptionAlgorithm,
    params: &AttackerParams,
    config: &SolverConfig,
) -> Result<bool, AttackerError> {
    let budget = scaled_budget(params.budget, config.dp.cost_scale)?;
    let methods = algorithm.attacks.len();
    let cells = (budget as u128) * (methods as u128);
    Ok(cells <= config.dp.max_table_cells as u128 && methods <= config.method_threshold)
}

/// Runs the exact DP when the scaled table is small enough and the method
/// count is within `method_threshold`, SampleGreedy otherwise.
pub fn solve_hybrid(
    algorithm: &EncryptionAlgorithm,
    params: &AttackerParams,
    config: &SolverConfig,
) -> Result<HybridOutcome, AttackerError> {
    if dp_admissible(algorithm, params, config)? {
        Ok(HybridOutcome {
            plan: solve_dp_unguarded(algorithm, params, config.dp.cost_scale)?,
            solver: SolverKind::Dp,
        })
    } else {
        Ok(HybridOutcome {
            plan: solve_sample_greedy(algorithm, params, &config.greedy),
            solver: SolverKind::SampleGreedy,
        })
    }
}

/// Success probability when every method of the algorithm is run.
pub fn unconstrained_success(algorithm: &EncryptionAlgorithm) -> f64 {
    1.0 - failure_product(&algorithm.attacks)
}

/// Plan that runs every method, ignoring the budget.
pub fn unconstrained_plan(algorithm: &EncryptionAlgorithm, params: &AttackerParams) -> AttackPlan {
    let all: Vec<usize> = (0..algorithm.attacks.len()).collect();
    AttackPlan::from_indices(algorithm, &all, params)
}

/// Ordering used by every solver to pick between equally good plans:
/// higher utility, then lower cost, then the lexicographically smallest
/// sorted id set. Returns true when `a` should replace `b`.
pub(crate) fn plan_better(a: &AttackPlan, b: &AttackPlan) -> bool {
    if a.utility != b.utility {
        return a.utility > b.utility;
    }
    if a.total_cost != b.total_cost {
        return a.total_cost < b.total_cost;
    }
    sorted_ids(a) < sorted_ids(b)
}

fn sorted_ids(plan: &AttackPlan) -> Vec<&str> {
    let mut ids: Vec<&str> = plan.methods.iter().map(String::as_str).collect();
    ids.sort_unstable();
    ids
}
