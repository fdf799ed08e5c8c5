//! Domain types of the hybridization game and the payoff formulas shared by
//! every solver.
//!
//! An [`EncryptionAlgorithm`] is one pure strategy of the defender; the
//! [`AttackMethod`]s attached to it are the ground set of the attacker's
//! knapsack subgame once that algorithm has been observed.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Default absolute tolerance for model-level comparisons.
pub const MODEL_TOLERANCE: f64 = 1e-9;

/// One cryptanalysis technique applicable to a specific algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackMethod {
    pub id: String,
    /// Success probability, strictly inside (0, 1).
    pub success: f64,
    /// Resource cost of running the method.
    pub cost: f64,
}

impl AttackMethod {
    pub fn new(id: impl Into<String>, success: f64, cost: f64) -> Self {
        Self {
            id: id.into(),
            success,
            cost,
        }
    }
}

/// A defender option together with its cost vector and attack surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncryptionAlgorithm {
    pub id: String,
    pub op_cost: f64,
    pub cpu_cost: f64,
    pub mem_cost: f64,
    pub latency: f64,
    pub resilience: f64,
    pub protected_value: f64,
    pub family: u32,
    pub attacks: Vec<AttackMethod>,
}

/// Attacker resource cost `phi(x) = linear * x + quadratic * x^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostFunction {
    pub linear: f64,
    pub quadratic: f64,
}

impl CostFunction {
    pub const IDENTITY: CostFunction = CostFunction {
        linear: 1.0,
        quadratic: 0.0,
    };

    pub fn new(linear: f64, quadratic: f64) -> Self {
        Self { linear, quadratic }
    }

    /// Evaluates the cost of spending `total_cost` resource units.
    pub fn eval(&self, total_cost: f64) -> f64 {
        self.linear * total_cost + self.quadratic * total_cost * total_cost
    }
}

impl Default for CostFunction {
    fn default() -> Self {
        Self::IDENTITY
    }
}

/// Free-function form of [`CostFunction::eval`].
pub fn phi(cost_fn: &CostFunction, total_cost: f64) -> f64 {
    cost_fn.eval(total_cost)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackerParams {
    /// Worth of a successful breach to the attacker.
    pub value: f64,
    /// Resource budget available for attack methods.
    pub budget: f64,
    #[serde(default)]
    pub cost_function: CostFunction,
}

impl AttackerParams {
    pub fn new(value: f64, budget: f64, cost_function: CostFunction) -> Self {
        Self {
            value,
            budget,
            cost_function,
        }
    }

    pub fn with_budget(self, budget: f64) -> Self {
        Self { budget, ..self }
    }
}

/// Conversion weights from resource consumption to defender utility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefenderWeights {
    pub op: f64,
    pub cpu: f64,
    pub mem: f64,
    pub latency: f64,
    pub resilience: f64,
}

/// Expected-resource caps of the defender LP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefenderBudgets {
    pub op_max: f64,
    pub cpu_max: f64,
    pub mem_max: f64,
    pub latency_max: f64,
    pub resilience_min: f64,
    /// Maximum probability mass per family. Families without an entry are
    /// uncapped.
    #[serde(default)]
    pub family_caps: BTreeMap<u32, f64>,
}

impl DefenderBudgets {
    pub fn family_cap(&self, family: u32) -> f64 {
        self.family_caps.get(&family).copied().unwrap_or(1.0)
    }
}

/// A complete scenario: defender options, weights, budgets and attacker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameInstance {
    pub algorithms: Vec<EncryptionAlgorithm>,
    pub weights: DefenderWeights,
    pub budgets: DefenderBudgets,
    pub attacker: AttackerParams,
}

impl GameInstance {
    pub fn algorithm(&self, id: &str) -> Option<&EncryptionAlgorithm> {
        self.algorithms.iter().find(|a| a.id == id)
    }

    pub fn algorithm_ids(&self) -> Vec<&str> {
        self.algorithms.iter().map(|a| a.id.as_str()).collect()
    }

    pub fn with_attacker_budget(&self, budget: f64) -> GameInstance {
        GameInstance {
            attacker: self.attacker.with_budget(budget),
            ..self.clone()
        }
    }

    pub fn attack_method_count(&self) -> usize {
        self.algorithms.iter().map(|a| a.attacks.len()).sum()
    }
}

/// Defender mixed strategy, aligned with [`GameInstance::algorithms`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MixedStrategy {
    pub probs: Vec<f64>,
}

impl MixedStrategy {
    pub fn new(probs: Vec<f64>) -> Self {
        Self { probs }
    }

    /// Checks `p >= -tol` componentwise and `|sum p - 1| <= tol`.
    pub fn is_distribution(&self, tol: f64) -> bool {
        let sum: f64 = self.probs.iter().sum();
        self.probs.iter().all(|&p| p >= -tol) && (sum - 1.0).abs() <= tol
    }

    /// Indices with probability strictly above `threshold`.
    pub fn support(&self, threshold: f64) -> Vec<usize> {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > threshold)
            .map(|(i, _)| i)
            .collect()
    }

    /// `sum_i p_i * values_i`.
    pub fn expectation(&self, values: &[f64]) -> f64 {
        self.probs.iter().zip(values).map(|(p, v)| p * v).sum()
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// An attacker best response against one algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackPlan {
    /// Selected method ids, in the algorithm's method order.
    pub methods: Vec<String>,
    pub success_prob: f64,
    pub total_cost: f64,
    pub utility: f64,
}

impl AttackPlan {
    pub fn empty() -> Self {
        Self {
            methods: Vec::new(),
            success_prob: 0.0,
            total_cost: 0.0,
            utility: 0.0,
        }
    }

    /// Builds a plan from method indices into `algorithm.attacks`, evaluating
    /// it with [`attacker_utility`]. Indices must be ascending.
    pub fn from_indices(
        algorithm: &EncryptionAlgorithm,
        indices: &[usize],
        params: &AttackerParams,
    ) -> Self {
        let methods: Vec<&AttackMethod> = indices.iter().map(|&i| &algorithm.attacks[i]).collect();
        let success_prob = success_probability(methods.iter().copied());
        let total_cost = methods.iter().map(|m| m.cost).sum();
        Self {
            methods: methods.iter().map(|m| m.id.clone()).collect(),
            success_prob,
            total_cost,
            utility: attacker_utility(methods.iter().copied(), params),
        }
    }
}

/// `1 - prod_j (1 - s_j)` with the product taken left to right.
pub fn success_probability<'a>(methods: impl IntoIterator<Item = &'a AttackMethod>) -> f64 {
    1.0 - failure_product(methods)
}

pub(crate) fn failure_product<'a>(methods: impl IntoIterator<Item = &'a AttackMethod>) -> f64 {
    methods
        .into_iter()
        .fold(1.0, |fail, m| fail * (1.0 - m.success))
}

/// Attacker objective `F(S) = v * P_succ(S) - phi(sum of costs)`.
///
/// All solvers evaluate their final plan through this function so utilities
/// of identical sets are bitwise identical regardless of the solver.
pub fn attacker_utility<'a>(
    methods: impl IntoIterator<Item = &'a AttackMethod>,
    params: &AttackerParams,
) -> f64 {
    let mut fail = 1.0;
    let mut cost = 0.0;
    for m in methods {
        fail *= 1.0 - m.success;
        cost += m.cost;
    }
    utility_from_parts(fail, cost, params)
}

#[inline]
pub(crate) fn utility_from_parts(fail: f64, cost: f64, params: &AttackerParams) -> f64 {
    params.value * (1.0 - fail) - params.cost_function.eval(cost)
}

/// Per-algorithm defender utility
/// `L (1 - P*) - g_op c_op - g_cpu c_cpu - g_mem c_mem - g_tau tau + g_r r`.
pub fn per_algorithm_utility(
    algorithm: &EncryptionAlgorithm,
    p_succ_star: f64,
    weights: &DefenderWeights,
) -> f64 {
    algorithm.protected_value * (1.0 - p_succ_star)
        - weights.op * algorithm.op_cost
        - weights.cpu * algorithm.cpu_cost
        - weights.mem * algorithm.mem_cost
        - weights.latency * algorithm.latency
        + weights.resilience * algorithm.resilience
}

/// A single problem found by [`validate_instance`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// Location of the offending value, e.g. `algorithms[2].attacks[0].success`.
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            field: field.into(),
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

fn nonneg_finite(x: f64) -> bool {
    x.is_finite() && x >= 0.0
}

/// Checks every structural invariant of a scenario. Infeasible budget
/// combinations are left to the LP layer.
pub fn validate_instance(instance: &GameInstance) -> ValidationReport {
    let mut report = ValidationReport::default();

    if instance.algorithms.is_empty() {
        report.push("algorithms", "at least one algorithm is required");
    }

    let mut seen = HashSet::new();
    for (i, alg) in instance.algorithms.iter().enumerate() {
        let at = |f: &str| format!("algorithms[{i}].{f}");
        if !seen.insert(alg.id.as_str()) {
            report.push(at("id"), format!("duplicate id \"{}\"", alg.id));
        }
        for (name, value) in [
            ("op_cost", alg.op_cost),
            ("cpu_cost", alg.cpu_cost),
            ("mem_cost", alg.mem_cost),
            ("latency", alg.latency),
        ] {
            if !nonneg_finite(value) {
                report.push(at(name), format!("negative cost {value}"));
            }
        }
        if !(0.0..=1.0).contains(&alg.resilience) {
            report.push(at("resilience"), "resilience out of [0,1]");
        }
        if !(alg.protected_value.is_finite() && alg.protected_value > 0.0) {
            report.push(at("protected_value"), "protected value must be positive");
        }

        let mut method_ids = HashSet::new();
        for (j, m) in alg.attacks.iter().enumerate() {
            let at = |f: &str| format!("algorithms[{i}].attacks[{j}].{f}");
            if !method_ids.insert(m.id.as_str()) {
                report.push(at("id"), format!("duplicate id \"{}\"", m.id));
            }
            if !(m.success > 0.0 && m.success < 1.0) {
                report.push(at("success"), "success out of (0,1)");
            }
            if !nonneg_finite(m.cost) {
                report.push(at("cost"), format!("negative cost {}", m.cost));
            }
        }
    }

    let w = &instance.weights;
    for (name, value) in [
        ("op", w.op),
        ("cpu", w.cpu),
        ("mem", w.mem),
        ("latency", w.latency),
        ("resilience", w.resilience),
    ] {
        if !nonneg_finite(value) {
            report.push(format!("weights.{name}"), "weight must be nonnegative");
        }
    }

    let b = &instance.budgets;
    for (name, value) in [
        ("op_max", b.op_max),
        ("cpu_max", b.cpu_max),
        ("mem_max", b.mem_max),
        ("latency_max", b.latency_max),
    ] {
        if !(value.is_finite() && value > 0.0) {
            report.push(format!("budgets.{name}"), "budget cap must be positive");
        }
    }
    if !(0.0..=1.0).contains(&b.resilience_min) {
        report.push("budgets.resilience_min", "resilience_min out of [0,1]");
    }
    for (family, cap) in &b.family_caps {
        if !(*cap > 0.0 && *cap <= 1.0) {
            report.push(
                format!("budgets.family_caps.{family}"),
                "family cap out of (0,1]",
            );
        }
    }

    let a = &instance.attacker;
    if !(a.value.is_finite() && a.value > 0.0) {
        report.push("attacker.value", "attacker value must be positive");
    }
    if !nonneg_finite(a.budget) {
        report.push("attacker.budget", "attacker budget must be nonnegative");
    }
    if !nonneg_finite(a.cost_function.linear) || !nonneg_finite(a.cost_function.quadratic) {
        report.push(
            "attacker.cost_function",
            "cost function coefficients must be nonnegative",
        );
    }

    report
}
