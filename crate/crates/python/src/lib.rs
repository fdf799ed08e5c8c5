//! Python bindings. Reports cross the boundary as plain dicts and lists built
//! from their JSON serialization.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use stackelberg::attacker::{
    calibrate_threshold, solve_brute_force, solve_dp, solve_hybrid, solve_sample_greedy,
    AttackerError, CalibrationConfig, HybridOutcome, SolverConfig, SolverKind,
};
use stackelberg::baselines::{baseline_strategies, compare_strategies, DEFAULT_SAMPLES};
use stackelberg::defender::{solve_stackelberg, DefenderError};
use stackelberg::model::GameInstance;
use stackelberg::robust::{
    breach_regret_matrix, regret_matrix, scenario_table, solve_maximin, solve_minimax_regret,
    ComparisonMatrix, RobustError, ScenarioSet, ScenarioTable,
};
use stackelberg::scenario::{self, LoadedScenario, ScenarioError};

create_exception!(
    crypto_stackelberg,
    InfeasibleError,
    PyValueError,
    "Defender constraints admit no strategy."
);

fn scenario_err(e: ScenarioError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn attacker_err(e: AttackerError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn defender_err(e: DefenderError) -> PyErr {
    match e {
        DefenderError::InfeasibleDefender => InfeasibleError::new_err(e.to_string()),
        DefenderError::Attacker(a) => attacker_err(a),
        DefenderError::Lp(_) | DefenderError::Unbounded => PyRuntimeError::new_err(e.to_string()),
    }
}

fn robust_err(e: RobustError) -> PyErr {
    match e {
        RobustError::InvalidScenarios(_) => PyValueError::new_err(e.to_string()),
        RobustError::Shape(_) => PyRuntimeError::new_err(e.to_string()),
        RobustError::Defender(d) => defender_err(d),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn solver_config(seed: u64, scale: u32) -> SolverConfig {
    let mut config = SolverConfig::default();
    config.greedy.rng_seed = seed;
    config.dp.cost_scale = scale;
    config
}

/// A validated game instance with its optional scenario budgets.
#[pyclass(frozen, module = "crypto_stackelberg")]
struct Instance {
    loaded: LoadedScenario,
}

impl Instance {
    fn game(&self) -> &GameInstance {
        &self.loaded.instance
    }
}

#[pymethods]
impl Instance {
    /// Parses and validates scenario JSON text.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            loaded: scenario::parse_scenario(text).map_err(scenario_err)?,
        })
    }

    fn to_json(&self) -> String {
        scenario::scenario_json(&self.loaded.instance, self.loaded.scenarios.as_ref())
    }

    #[getter]
    fn algorithm_ids(&self) -> Vec<String> {
        self.game()
            .algorithms
            .iter()
            .map(|a| a.id.clone())
            .collect()
    }

    #[getter]
    fn attacker_budget(&self) -> f64 {
        self.game().attacker.budget
    }

    #[getter]
    fn attack_method_count(&self) -> usize {
        self.game().attack_method_count()
    }

    #[getter]
    fn scenario_budgets(&self) -> Option<Vec<f64>> {
        self.loaded.scenarios.as_ref().map(|s| s.budgets().to_vec())
    }

    /// Copy of the instance with a different attacker budget.
    fn with_attacker_budget(&self, budget: f64) -> Self {
        Self {
            loaded: LoadedScenario {
                instance: self.game().with_attacker_budget(budget),
                scenarios: self.loaded.scenarios.clone(),
            },
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(algorithms={}, attack_methods={}, attacker_budget={})",
            self.game().algorithms.len(),
            self.game().attack_method_count(),
            self.game().attacker.budget
        )
    }
}

#[pyfunction]
fn load_scenario(path: std::path::PathBuf) -> PyResult<Instance> {
    Ok(Instance {
        loaded: scenario::load_scenario(path).map_err(scenario_err)?,
    })
}

/// The bundled eight-algorithm reference dataset.
#[pyfunction]
fn bundled_dataset() -> Instance {
    Instance {
        loaded: scenario::paper_dataset(),
    }
}

/// Attacker best response against one algorithm. `solver` is one of
/// `hybrid`, `dp`, `greedy`, `brute`.
#[pyfunction]
#[pyo3(signature = (instance, algorithm, budget=None, value=None, solver="hybrid", seed=0, scale=10))]
#[allow(clippy::too_many_arguments)]
fn solve_attacker<'py>(
    py: Python<'py>,
    instance: &Instance,
    algorithm: &str,
    budget: Option<f64>,
    value: Option<f64>,
    solver: &str,
    seed: u64,
    scale: u32,
) -> PyResult<Bound<'py, PyAny>> {
    let alg = instance
        .game()
        .algorithm(algorithm)
        .ok_or_else(|| PyValueError::new_err(format!("unknown algorithm \"{algorithm}\"")))?;
    let mut params = instance.game().attacker;
    if let Some(k) = budget {
        params.budget = k;
    }
    if let Some(v) = value {
        params.value = v;
    }
    let config = solver_config(seed, scale);
    let outcome = match solver {
        "hybrid" => solve_hybrid(alg, &params, &config).map_err(attacker_err)?,
        "dp" => HybridOutcome {
            plan: solve_dp(alg, &params, &config.dp).map_err(attacker_err)?,
            solver: SolverKind::Dp,
        },
        "greedy" => {
            if params.budget.is_nan() || params.budget < 0.0 {
                return Err(attacker_err(AttackerError::BudgetNegative(params.budget)));
            }
            HybridOutcome {
                plan: solve_sample_greedy(alg, &params, &config.greedy),
                solver: SolverKind::SampleGreedy,
            }
        }
        "brute" => HybridOutcome {
            plan: solve_brute_force(alg, &params).map_err(attacker_err)?,
            solver: SolverKind::BruteForce,
        },
        other => return Err(PyValueError::new_err(format!("unknown solver \"{other}\""))),
    };
    to_py(py, &outcome)
}

/// Equilibrium strategy report at the instance's (or the given) budget.
#[pyfunction]
#[pyo3(signature = (instance, budget=None, seed=0, scale=10))]
fn solve_defender<'py>(
    py: Python<'py>,
    instance: &Instance,
    budget: Option<f64>,
    seed: u64,
    scale: u32,
) -> PyResult<Bound<'py, PyAny>> {
    let inst = match budget {
        Some(k) => instance.game().with_attacker_budget(k),
        None => instance.game().clone(),
    };
    let report = py
        .detach(|| solve_stackelberg(&inst, &solver_config(seed, scale)))
        .map_err(defender_err)?;
    to_py(py, &report)
}

#[derive(Serialize)]
struct RobustResult<T: Serialize> {
    table: ScenarioTable,
    result: T,
    regret_matrix: ComparisonMatrix,
    breach_regret_matrix: ComparisonMatrix,
}

/// Minimax-regret (`mode="regret"`) or maximin (`mode="maximin"`) strategy
/// over the scenario budgets, with the scenario table and both matrices.
#[pyfunction]
#[pyo3(signature = (instance, budgets=None, mode="regret", seed=0, scale=10))]
fn solve_robust<'py>(
    py: Python<'py>,
    instance: &Instance,
    budgets: Option<Vec<f64>>,
    mode: &str,
    seed: u64,
    scale: u32,
) -> PyResult<Bound<'py, PyAny>> {
    let set = match budgets {
        Some(b) => ScenarioSet::new(b).map_err(robust_err)?,
        None => instance.loaded.scenarios.clone().ok_or_else(|| {
            PyValueError::new_err("no budgets given and the instance has no scenario budgets")
        })?,
    };
    let inst = instance.game();
    let table = py
        .detach(|| scenario_table(inst, &set, &solver_config(seed, scale)))
        .map_err(robust_err)?;
    match mode {
        "regret" => {
            let r = solve_minimax_regret(inst, &table).map_err(robust_err)?;
            let extras = [("minimax_regret".to_string(), r.strategy.clone())];
            to_py(
                py,
                &RobustResult {
                    regret_matrix: regret_matrix(&table, &extras),
                    breach_regret_matrix: breach_regret_matrix(&table, &extras),
                    table,
                    result: r,
                },
            )
        }
        "maximin" => {
            let r = solve_maximin(inst, &table).map_err(robust_err)?;
            let extras = [("maximin".to_string(), r.strategy.clone())];
            to_py(
                py,
                &RobustResult {
                    regret_matrix: regret_matrix(&table, &extras),
                    breach_regret_matrix: breach_regret_matrix(&table, &extras),
                    table,
                    result: r,
                },
            )
        }
        other => Err(PyValueError::new_err(format!("unknown mode \"{other}\""))),
    }
}

/// Equilibrium versus random vertices and single-objective strategies,
/// best objective first.
#[pyfunction]
#[pyo3(signature = (instance, samples=DEFAULT_SAMPLES, seed=0))]
fn baselines<'py>(
    py: Python<'py>,
    instance: &Instance,
    samples: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let inst = instance.game();
    let comparison = py
        .detach(|| {
            let strategies = baseline_strategies(inst, samples, seed)?;
            compare_strategies(inst, &strategies, &solver_config(seed, 10))
        })
        .map_err(defender_err)?;
    to_py(py, &comparison)
}

/// DP timing sweep over synthetic instances.
#[pyfunction]
#[pyo3(signature = (time_limit=0.2, max_methods=500, step=1, seed=0))]
fn calibrate<'py>(
    py: Python<'py>,
    time_limit: f64,
    max_methods: usize,
    step: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    if time_limit.is_nan() || time_limit <= 0.0 || max_methods == 0 || step == 0 {
        return Err(PyValueError::new_err(
            "time_limit must be positive and max_methods, step at least 1",
        ));
    }
    let config = CalibrationConfig {
        time_limit,
        max_methods,
        step,
        rng_seed: seed,
        ..CalibrationConfig::default()
    };
    let calibration = py.detach(|| calibrate_threshold(&config));
    to_py(py, &calibration)
}

#[pymodule]
fn crypto_stackelberg(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Instance>()?;
    m.add("InfeasibleError", m.py().get_type::<InfeasibleError>())?;
    m.add_function(wrap_pyfunction!(load_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(bundled_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(solve_attacker, m)?)?;
    m.add_function(wrap_pyfunction!(solve_defender, m)?)?;
    m.add_function(wrap_pyfunction!(solve_robust, m)?)?;
    m.add_function(wrap_pyfunction!(baselines, m)?)?;
    m.add_function(wrap_pyfunction!(calibrate, m)?)?;
    Ok(())
}
