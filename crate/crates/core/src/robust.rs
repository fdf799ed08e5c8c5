//! Attacker-budget uncertainty over a finite scenario set: scenario tables,
//! maximin, the unconstrained attacker, minimax regret and the regret
//! comparison matrices.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attacker::{solve_hybrid, unconstrained_plan, AttackerError, SolverConfig};
use crate::defender::{
    defender_polytope, evaluation, resource_usage, solve_defender_lp, solve_with_evaluations,
    AlgorithmEvaluation, DefenderError, ResourceUsage, StrategyReport, SUPPORT_THRESHOLD,
};
use crate::lp::{Relation, Sense};
use crate::model::{per_algorithm_utility, AttackPlan, GameInstance, MixedStrategy};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RobustError {
    #[error("invalid scenario set: {0}")]
    InvalidScenarios(String),
    #[error("scenario table shape: {0}")]
    Shape(String),
    #[error(transparent)]
    Defender(#[from] DefenderError),
}

impl From<AttackerError> for RobustError {
    fn from(e: AttackerError) -> Self {
        RobustError::Defender(e.into())
    }
}

/// Strictly increasing, nonempty list of nonnegative attacker budgets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ScenarioSet {
    budgets: Vec<f64>,
}

impl ScenarioSet {
    pub fn new(budgets: Vec<f64>) -> Result<Self, RobustError> {
        if budgets.is_empty() {
            return Err(RobustError::InvalidScenarios("no budgets".into()));
        }
        if let Some(k) = budgets.iter().find(|k| !k.is_finite() || **k < 0.0) {
            return Err(RobustError::InvalidScenarios(format!(
                "budget {k} is not a nonnegative number"
            )));
        }
        if budgets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(RobustError::InvalidScenarios(
                "budgets must be strictly increasing".into(),
            ));
        }
        Ok(Self { budgets })
    }

    pub fn budgets(&self) -> &[f64] {
        &self.budgets
    }

    pub fn len(&self) -> usize {
        self.budgets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.budgets.is_empty()
    }
}

impl TryFrom<Vec<f64>> for ScenarioSet {
    type Error = RobustError;

    fn try_from(budgets: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(budgets)
    }
}

impl From<ScenarioSet> for Vec<f64> {
    fn from(set: ScenarioSet) -> Self {
        set.budgets
    }
}

/// Short label for a budget, e.g. `11` or `20.5`.
pub fn budget_label(k: f64) -> String {
    format!("{k}")
}

/// Per-scenario utilities, breach probabilities and scenario optima.
/// Rows are scenarios, columns follow the instance's algorithm order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioTable {
    pub budgets: Vec<f64>,
    pub algorithms: Vec<String>,
    pub utilities: Vec<Vec<f64>>,
    pub breach: Vec<Vec<f64>>,
    /// Attack plans behind `breach`; empty when the table was built from
    /// externally supplied utilities.
    pub plans: Vec<Vec<AttackPlan>>,
    pub optima: Vec<f64>,
    pub optimal_strategies: Vec<MixedStrategy>,
    pub optimal_breach: Vec<f64>,
}

impl ScenarioTable {
    /// Solves the scenario defender LPs for given utility and breach
    /// matrices.
    pub fn from_utilities(
        instance: &GameInstance,
        budgets: &ScenarioSet,
        utilities: Vec<Vec<f64>>,
        breach: Vec<Vec<f64>>,
    ) -> Result<Self, RobustError> {
        let n = instance.algorithms.len();
        let m = budgets.len();
        if utilities.len() != m
            || breach.len() != m
            || utilities.iter().chain(&breach).any(|row| row.len() != n)
        {
            return Err(RobustError::Shape(format!(
                "expected {m} rows of {n} entries for utilities and breach"
            )));
        }
        let mut optima = Vec::with_capacity(m);
        let mut optimal_strategies = Vec::with_capacity(m);
        let mut optimal_breach = Vec::with_capacity(m);
        for s in 0..m {
            let lp = defender_polytope(instance, Sense::Maximize, utilities[s].clone());
            let sol = solve_defender_lp(&lp)?;
            let strategy = MixedStrategy::new(sol.values);
            optima.push(strategy.expectation(&utilities[s]));
            optimal_breach.push(strategy.expectation(&breach[s]));
            optimal_strategies.push(strategy);
        }
        Ok(Self {
            budgets: budgets.budgets().to_vec(),
            algorithms: instance.algorithms.iter().map(|a| a.id.clone()).collect(),
            utilities,
            breach,
            plans: Vec::new(),
            optima,
            optimal_strategies,
            optimal_breach,
        })
    }

    pub fn scenario_count(&self) -> usize {
        self.budgets.len()
    }

    /// `V*(k_s) - sum p_i l_i(k_s)` for every scenario.
    pub fn regrets(&self, strategy: &MixedStrategy) -> Vec<f64> {
        self.utilities
            .iter()
            .zip(&self.optima)
            .map(|(u, v)| v - strategy.expectation(u))
            .collect()
    }

    /// `sum p_i P*(i, k_s) - B*(k_s)` for every scenario.
    pub fn breach_regrets(&self, strategy: &MixedStrategy) -> Vec<f64> {
        self.breach
            .iter()
            .zip(&self.optimal_breach)
            .map(|(b, best)| strategy.expectation(b) - best)
            .collect()
    }
}

/// Runs every attacker subgame at every scenario budget and solves the
/// scenario defender LPs.
pub fn scenario_table(
    instance: &GameInstance,
    scenarios: &ScenarioSet,
    config: &SolverConfig,
) -> Result<ScenarioTable, RobustError> {
    let mut utilities = Vec::with_capacity(scenarios.len());
    let mut breach = Vec::with_capacity(scenarios.len());
    let mut plans = Vec::with_capacity(scenarios.len());
    for &k in scenarios.budgets() {
        let params = instance.attacker.with_budget(k);
        let mut u_row = Vec::with_capacity(instance.algorithms.len());
        let mut b_row = Vec::with_capacity(instance.algorithms.len());
        let mut p_row = Vec::with_capacity(instance.algorithms.len());
        for alg in &instance.algorithms {
            let plan = solve_hybrid(alg, &params, config)?.plan;
            u_row.push(per_algorithm_utility(
                alg,
                plan.success_prob,
                &instance.weights,
            ));
            b_row.push(plan.success_prob);
            p_row.push(plan);
        }
        utilities.push(u_row);
        breach.push(b_row);
        plans.push(p_row);
    }
    let mut table = ScenarioTable::from_utilities(instance, scenarios, utilities, breach)?;
    table.plans = plans;
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximinReport {
    pub strategy: MixedStrategy,
    /// `min_s sum p_i l_i(k_s)` at the returned strategy.
    pub worst_case_value: f64,
    pub scenario_values: Vec<f64>,
    pub usage: ResourceUsage,
    pub binding: Vec<String>,
    pub binding_count: usize,
    pub support_size: usize,
}

/// `max z` subject to `z <= sum p_i l_i(k_s)` for every scenario and the
/// defender polytope.
pub fn solve_maximin(
    instance: &GameInstance,
    table: &ScenarioTable,
) -> Result<MaximinReport, RobustError> {
    let n = instance.algorithms.len();
    let mut objective = vec![0.0; n + 1];
    objective[n] = 1.0;
    let mut lp = defender_polytope(instance, Sense::Maximize, objective);
    lp.set_free(n);
    for (k, u) in table.budgets.iter().zip(&table.utilities) {
        let mut coeffs: Vec<f64> = u.iter().map(|x| -x).collect();
        coeffs.push(1.0);
        lp.constrain(
            format!("scenario:{}", budget_label(*k)),
            coeffs,
            Relation::Le,
            0.0,
        );
    }
    let sol = solve_defender_lp(&lp)?;
    let strategy = MixedStrategy::new(sol.values[..n].to_vec());
    let scenario_values: Vec<f64> = table
        .utilities
        .iter()
        .map(|u| strategy.expectation(u))
        .collect();
    Ok(MaximinReport {
        worst_case_value: scenario_values
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min),
        scenario_values,
        usage: resource_usage(instance, &strategy),
        binding_count: sol.binding.len(),
        binding: sol.binding,
        support_size: strategy.support(SUPPORT_THRESHOLD).len(),
        strategy,
    })
}

/// Evaluations against an attacker who can afford every method.
pub fn unconstrained_evaluations(instance: &GameInstance) -> Vec<AlgorithmEvaluation> {
    instance
        .algorithms
        .iter()
        .map(|alg| evaluation(instance, alg, unconstrained_plan(alg, &instance.attacker)))
        .collect()
}

/// Defender LP with every algorithm facing its full method set.
pub fn solve_unconstrained_case(instance: &GameInstance) -> Result<StrategyReport, RobustError> {
    Ok(solve_with_evaluations(
        instance,
        unconstrained_evaluations(instance),
    )?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretReport {
    pub strategy: MixedStrategy,
    pub budgets: Vec<f64>,
    pub per_scenario_regret: Vec<f64>,
    pub max_regret: f64,
}

/// `min t` subject to `V*(k_s) - sum p_i l_i(k_s) <= t` for every scenario
/// and the defender polytope, with `t` free.
pub fn solve_minimax_regret(
    instance: &GameInstance,
    table: &ScenarioTable,
) -> Result<RegretReport, RobustError> {
    let n = instance.algorithms.len();
    let mut objective = vec![0.0; n + 1];
    objective[n] = 1.0;
    let mut lp = defender_polytope(instance, Sense::Minimize, objective);
    lp.set_free(n);
    for ((k, u), v) in table
        .budgets
        .iter()
        .zip(&table.utilities)
        .zip(&table.optima)
    {
        let mut coeffs: Vec<f64> = u.iter().map(|x| -x).collect();
        coeffs.push(-1.0);
        lp.constrain(
            format!("regret:{}", budget_label(*k)),
            coeffs,
            Relation::Le,
            -v,
        );
    }
    let sol = solve_defender_lp(&lp)?;
    let strategy = MixedStrategy::new(sol.values[..n].to_vec());
    let per_scenario_regret = table.regrets(&strategy);
    Ok(RegretReport {
        max_regret: per_scenario_regret
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max),
        per_scenario_regret,
        budgets: table.budgets.clone(),
        strategy,
    })
}

/// Labelled rows of per-scenario values with a trailing row maximum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonMatrix {
    pub budgets: Vec<f64>,
    pub rows: Vec<MatrixRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRow {
    pub label: String,
    pub cells: Vec<f64>,
    pub max: f64,
}

impl ComparisonMatrix {
    pub fn row(&self, label: &str) -> Option<&MatrixRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    /// Cell at `label` for the scenario whose budget equals `k`.
    pub fn cell(&self, label: &str, k: f64) -> Option<f64> {
        let col = self.budgets.iter().position(|&b| b == k)?;
        self.row(label).map(|r| r.cells[col])
    }

    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["strategy".to_string()];
        header.extend(
            self.budgets
                .iter()
                .map(|k| format!("k={}", budget_label(*k))),
        );
        header.push("max".into());
        w.write_record(&header)?;
        for row in &self.rows {
            let mut record = vec![row.label.clone()];
            record.extend(row.cells.iter().map(|c| c.to_string()));
            record.push(row.max.to_string());
            w.write_record(&record)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Row label of a scenario-optimal strategy.
pub fn opt_label(k: f64) -> String {
    format!("Opt(k={})", budget_label(k))
}

fn build_matrix(
    table: &ScenarioTable,
    extras: &[(String, MixedStrategy)],
    cells: impl Fn(&MixedStrategy) -> Vec<f64>,
) -> ComparisonMatrix {
    let opt_rows = table
        .budgets
        .iter()
        .zip(&table.optimal_strategies)
        .map(|(k, p)| (opt_label(*k), p));
    let extra_rows = extras.iter().map(|(l, p)| (l.clone(), p));
    let rows = opt_rows
        .chain(extra_rows)
        .map(|(label, p)| {
            let cells = cells(p);
            MatrixRow {
                max: cells.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                label,
                cells,
            }
        })
        .collect();
    ComparisonMatrix {
        budgets: table.budgets.clone(),
        rows,
    }
}

/// Utility regret of every scenario-optimal strategy and of `extras`.
pub fn regret_matrix(
    table: &ScenarioTable,
    extras: &[(String, MixedStrategy)],
) -> ComparisonMatrix {
    build_matrix(table, extras, |p| table.regrets(p))
}

/// Breach-probability regret of every scenario-optimal strategy and of
/// `extras`.
pub fn breach_regret_matrix(
    table: &ScenarioTable,
    extras: &[(String, MixedStrategy)],
) -> ComparisonMatrix {
    build_matrix(table, extras, |p| table.breach_regrets(p))
}
