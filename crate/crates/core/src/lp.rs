//! Small dense linear-programming layer.
//!
//! [`solve_lp`] is a two-phase primal simplex on a dense tableau with Bland's
//! pivoting rule, so it always terminates and returns a basic feasible
//! solution (a vertex of the feasible polytope). Rows are equilibrated by
//! their largest coefficient before pivoting, which keeps CPU-cycle sized
//! coefficients next to probability sized ones well conditioned.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Constraint satisfaction tolerance, scaled by `1 + |rhs|`.
pub const FEASIBILITY_TOL: f64 = 1e-7;
/// Activity-equals-rhs tolerance for binding constraints, scaled by `1 + |rhs|`.
pub const BINDING_TOL: f64 = 1e-7;
/// Reduced-cost tolerance used when certifying optimality.
pub const OPTIMALITY_TOL: f64 = 1e-7;

const PIVOT_TOL: f64 = 1e-9;
const RATIO_TIE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub label: String,
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().zip(x).map(|(a, v)| a * v).sum()
    }

    /// Amount by which `x` violates the constraint (zero when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let act = self.activity(x);
        match self.relation {
            Relation::Le => (act - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - act).max(0.0),
            Relation::Eq => (act - self.rhs).abs(),
        }
    }
}

/// `optimize objective . x` subject to labelled linear constraints and
/// per-variable bounds (`lower` may be `-inf`, `upper` may be `+inf`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LinearProgram {
    /// A program over `objective.len()` nonnegative variables.
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            sense,
            objective,
            constraints: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn constrain(
        &mut self,
        label: impl Into<String>,
        coeffs: Vec<f64>,
        relation: Relation,
        rhs: f64,
    ) -> &mut Self {
        self.constraints.push(Constraint {
            label: label.into(),
            coeffs,
            relation,
            rhs,
        });
        self
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) -> &mut Self {
        self.lower[var] = lower;
        self.upper[var] = upper;
        self
    }

    pub fn set_free(&mut self, var: usize) -> &mut Self {
        self.set_bounds(var, f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn constraint(&self, label: &str) -> Option<&Constraint> {
        self.constraints.iter().find(|c| c.label == label)
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    fn check(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::DimensionMismatch {
                what: "bounds".into(),
                expected: n,
                found: self.lower.len().min(self.upper.len()),
            });
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(LpError::NonFinite("objective".into()));
        }
        if self.lower.iter().chain(&self.upper).any(|b| b.is_nan()) {
            return Err(LpError::NonFinite("bounds".into()));
        }
        let mut labels = HashSet::new();
        for c in &self.constraints {
            if c.coeffs.len() != n {
                return Err(LpError::DimensionMismatch {
                    what: c.label.clone(),
                    expected: n,
                    found: c.coeffs.len(),
                });
            }
            if !c.rhs.is_finite() || c.coeffs.iter().any(|a| !a.is_finite()) {
                return Err(LpError::NonFinite(c.label.clone()));
            }
            if !labels.insert(c.label.as_str()) {
                return Err(LpError::DuplicateLabel(c.label.clone()));
            }
        }
        Ok(())
    }
}

/// Plain-text standard-form dump, close to the CPLEX LP format.
impl fmt::Display for LinearProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn terms(f: &mut fmt::Formatter<'_>, coeffs: &[f64]) -> fmt::Result {
            let mut any = false;
            for (j, &a) in coeffs.iter().enumerate() {
                if a != 0.0 {
                    write!(f, " {:+} x{}", a, j)?;
                    any = true;
                }
            }
            if !any {
                write!(f, " 0")?;
            }
            Ok(())
        }
        writeln!(
            f,
            "{}",
            match self.sense {
                Sense::Maximize => "maximize",
                Sense::Minimize => "minimize",
            }
        )?;
        write!(f, "  obj:")?;
        terms(f, &self.objective)?;
        writeln!(f)?;
        writeln!(f, "subject to")?;
        for c in &self.constraints {
            write!(f, "  {}:", c.label)?;
            terms(f, &c.coeffs)?;
            writeln!(f, " {} {}", c.relation, c.rhs)?;
        }
        writeln!(f, "bounds")?;
        for j in 0..self.num_vars() {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            match (lo.is_finite(), hi.is_finite()) {
                (true, true) => writeln!(f, "  {lo} <= x{j} <= {hi}")?,
                (true, false) => writeln!(f, "  x{j} >= {lo}")?,
                (false, true) => writeln!(f, "  -inf <= x{j} <= {hi}")?,
                (false, false) => writeln!(f, "  x{j} free")?,
            }
        }
        write!(f, "end")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub values: Vec<f64>,
    pub objective_value: f64,
    /// Labels of constraints active at the solution.
    pub binding: Vec<String>,
    /// One multiplier per constraint, in the program's own sense: at an
    /// optimum `objective - A^T duals` is the vector of reduced costs.
    pub duals: Vec<f64>,
}

impl LpSolution {
    fn without_point(status: LpStatus, n: usize, m: usize) -> Self {
        Self {
            status,
            values: vec![0.0; n],
            objective_value: match status {
                LpStatus::Unbounded => f64::INFINITY,
                _ => f64::NAN,
            },
            binding: Vec::new(),
            duals: vec![0.0; m],
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("{what}: expected {expected} coefficients, found {found}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        found: usize,
    },
    #[error("duplicate constraint label \"{0}\"")]
    DuplicateLabel(String),
    #[error("non-finite coefficient in {0}")]
    NonFinite(String),
    #[error("simplex exceeded {0} pivots")]
    IterationLimit(usize),
    #[error("solution status is {0:?}, not optimal")]
    NotOptimal(LpStatus),
}

/// Constraints active at `solution`, i.e. `|activity - rhs| <= eps (1 + |rhs|)`.
/// Variable bounds are never counted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BindingSet {
    pub labels: Vec<String>,
}

impl BindingSet {
    pub fn count(&self) -> usize {
        self.labels.len()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.labels.iter().any(|l| l == label)
    }
}

pub fn binding_constraints(
    lp: &LinearProgram,
    solution: &LpSolution,
    eps: f64,
) -> Result<BindingSet, LpError> {
    if !solution.is_optimal() {
        return Err(LpError::NotOptimal(solution.status));
    }
    Ok(BindingSet {
        labels: binding_labels(lp, &solution.values, eps),
    })
}

fn binding_labels(lp: &LinearProgram, x: &[f64], eps: f64) -> Vec<String> {
    lp.constraints
        .iter()
        .filter(|c| (c.activity(x) - c.rhs).abs() <= eps * (1.0 + c.rhs.abs()))
        .map(|c| c.label.clone())
        .collect()
}

/// Checks the dual multipliers stored in `solution` against the program and
/// returns the duality gap `dual bound - primal objective` (in the
/// maximization direction). Errors describe the first dual infeasibility
/// larger than `tol`.
pub fn dual_certificate_gap(
    lp: &LinearProgram,
    solution: &LpSolution,
    tol: f64,
) -> Result<f64, String> {
    if !solution.is_optimal() {
        return Err(format!("status {:?}", solution.status));
    }
    // Work in the maximization direction.
    let dir = match lp.sense {
        Sense::Maximize => 1.0,
        Sense::Minimize => -1.0,
    };
    let y: Vec<f64> = solution.duals.iter().map(|d| dir * d).collect();
    let mut bound = 0.0;
    for (c, &yr) in lp.constraints.iter().zip(&y) {
        let scale = tol * (1.0 + yr.abs());
        match c.relation {
            Relation::Le if yr < -scale => {
                return Err(format!("dual of {} has wrong sign: {yr}", c.label))
            }
            Relation::Ge if yr > scale => {
                return Err(format!("dual of {} has wrong sign: {yr}", c.label))
            }
            _ => {}
        }
        bound += yr * c.rhs;
    }
    for j in 0..lp.num_vars() {
        let d = dir * lp.objective[j]
            - lp.constraints
                .iter()
                .zip(&y)
                .map(|(c, yr)| yr * c.coeffs[j])
                .sum::<f64>();
        let scale = tol * (1.0 + lp.objective[j].abs());
        if d > scale {
            if !lp.upper[j].is_finite() {
                return Err(format!("reduced cost of x{j} is {d} with no upper bound"));
            }
            bound += d * lp.upper[j];
        } else if d < -scale {
            if !lp.lower[j].is_finite() {
                return Err(format!("reduced cost of x{j} is {d} with no lower bound"));
            }
            bound += d * lp.lower[j];
        } else if lp.lower[j].is_finite() && solution.values[j] <= lp.lower[j] + FEASIBILITY_TOL {
            bound += d * lp.lower[j];
        } else if lp.upper[j].is_finite() {
            bound += d * lp.upper[j].min(solution.values[j]);
        } else {
            bound += d * solution.values[j];
        }
    }
    Ok(bound - dir * solution.objective_value)
}

/// Solves `lp` to a vertex optimum. Infeasibility and unboundedness are
/// reported through [`LpSolution::status`]; malformed input is an error.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.check()?;
    let n = lp.num_vars();
    let m = lp.constraints.len();
    if (0..n).any(|j| lp.lower[j] > lp.upper[j]) {
        return Ok(LpSolution::without_point(LpStatus::Infeasible, n, m));
    }

    let std = StandardForm::build(lp);
    let mut tab = Tableau::new(&std);

    let limit = 200 * (tab.rows + tab.cols) + 1000;
    let mut pivots = 0;

    // Phase 1: minimize the sum of artificials.
    let phase1: Vec<f64> = (0..tab.cols)
        .map(|j| {
            if tab.kind[j] == ColKind::Artificial {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    tab.set_costs(&phase1);
    match tab.run(&mut pivots, limit, false)? {
        Outcome::Optimal => {}
        Outcome::Unbounded => unreachable!("phase one is bounded below"),
    }
    let rhs_scale = 1.0 + tab.rhs_column().map(f64::abs).fold(0.0, f64::max);
    if tab.objective_value() > 1e-9 * rhs_scale {
        return Ok(LpSolution::without_point(LpStatus::Infeasible, n, m));
    }
    tab.evict_artificials();

    // Phase 2: the real objective, with artificials barred from entering.
    tab.set_costs(&std.costs);
    if let Outcome::Unbounded = tab.run(&mut pivots, limit, true)? {
        return Ok(LpSolution::without_point(LpStatus::Unbounded, n, m));
    }

    let y = tab.primal();
    let values = std.recover(&y);
    let duals = std.duals(&tab);
    let objective_value = lp.objective_at(&values);
    let binding = binding_labels(lp, &values, BINDING_TOL);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        values,
        objective_value,
        binding,
        duals,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Structural,
    Slack,
    Artificial,
}

/// Maps an original variable onto internal nonnegative columns:
/// `x = offset + sum(sign * y_col)`.
struct VarMap {
    offset: f64,
    cols: Vec<(usize, f64)>,
}

struct Row {
    coeffs: Vec<f64>,
    relation: Relation,
    rhs: f64,
    /// `internal row = factor * original row`.
    factor: f64,
}

struct StandardForm {
    vars: Vec<VarMap>,
    structural: usize,
    rows: Vec<Row>,
    /// Phase-two minimization costs, one per tableau column.
    costs: Vec<f64>,
    /// +1 for minimization, -1 for maximization.
    dir: f64,
    original_rows: usize,
}

impl StandardForm {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.num_vars();
        let mut vars = Vec::with_capacity(n);
        let mut structural = 0;
        let mut bound_rows: Vec<(usize, f64)> = Vec::new();
        for j in 0..n {
            let (lo, hi) = (lp.lower[j], lp.upper[j]);
            let map = if lo.is_finite() {
                let col = structural;
                structural += 1;
                if hi.is_finite() {
                    bound_rows.push((col, hi - lo));
                }
                VarMap {
                    offset: lo,
                    cols: vec![(col, 1.0)],
                }
            } else if hi.is_finite() {
                structural += 1;
                VarMap {
                    offset: hi,
                    cols: vec![(structural - 1, -1.0)],
                }
            } else {
                structural += 2;
                VarMap {
                    offset: 0.0,
                    cols: vec![(structural - 2, 1.0), (structural - 1, -1.0)],
                }
            };
            vars.push(map);
        }

        let dir = match lp.sense {
            Sense::Maximize => -1.0,
            Sense::Minimize => 1.0,
        };
        let mut costs_structural = vec![0.0; structural];
        for (j, map) in vars.iter().enumerate() {
            for &(col, sign) in &map.cols {
                costs_structural[col] = dir * lp.objective[j] * sign;
            }
        }

        let mut rows = Vec::with_capacity(lp.constraints.len() + bound_rows.len());
        for c in &lp.constraints {
            let mut coeffs = vec![0.0; structural];
            let mut rhs = c.rhs;
            for (j, map) in vars.iter().enumerate() {
                let a = c.coeffs[j];
                if a == 0.0 {
                    continue;
                }
                rhs -= a * map.offset;
                for &(col, sign) in &map.cols {
                    coeffs[col] = a * sign;
                }
            }
            rows.push(Row::normalized(coeffs, c.relation, rhs));
        }
        let original_rows = rows.len();
        for (col, width) in bound_rows {
            let mut coeffs = vec![0.0; structural];
            coeffs[col] = 1.0;
            rows.push(Row::normalized(coeffs, Relation::Le, width));
        }

        let mut costs = costs_structural;
        // Auxiliary columns are appended by the tableau in row order; they
        // carry zero phase-two cost.
        for row in &rows {
            costs.push(0.0);
            if row.relation == Relation::Ge {
                costs.push(0.0);
            }
        }

        Self {
            vars,
            structural,
            rows,
            costs,
            dir,
            original_rows,
        }
    }

    fn recover(&self, y: &[f64]) -> Vec<f64> {
        self.vars
            .iter()
            .map(|map| map.offset + map.cols.iter().map(|&(c, s)| s * y[c]).sum::<f64>())
            .collect()
    }

    fn duals(&self, tab: &Tableau) -> Vec<f64> {
        // Reduced cost of the unit column of row r is -pi_r for the internal
        // minimization; undo row scaling and the sense flip.
        (0..self.original_rows)
            .map(|r| {
                let pi = -tab.reduced[tab.unit_col[r]];
                self.dir * pi * self.rows[r].factor
            })
            .collect()
    }
}

impl Row {
    fn normalized(mut coeffs: Vec<f64>, mut relation: Relation, mut rhs: f64) -> Self {
        let scale = coeffs.iter().fold(0.0_f64, |m, a| m.max(a.abs()));
        let mut factor = if scale > 0.0 { 1.0 / scale } else { 1.0 };
        for a in coeffs.iter_mut() {
            *a *= factor;
        }
        rhs *= factor;
        if rhs < 0.0 {
            for a in coeffs.iter_mut() {
                *a = -*a;
            }
            rhs = -rhs;
            factor = -factor;
            relation = match relation {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
        Self {
            coeffs,
            relation,
            rhs,
            factor,
        }
    }
}

enum Outcome {
    Optimal,
    Unbounded,
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// Row-major, `cols + 1` entries per row; the last entry is the rhs.
    a: Vec<f64>,
    basis: Vec<usize>,
    kind: Vec<ColKind>,
    /// Column holding the identity entry of each row in the initial basis.
    unit_col: Vec<usize>,
    costs: Vec<f64>,
    reduced: Vec<f64>,
    cost_tol: f64,
}

impl Tableau {
    fn new(std: &StandardForm) -> Self {
        let rows = std.rows.len();
        let mut kind = vec![ColKind::Structural; std.structural];
        let mut unit_col = Vec::with_capacity(rows);
        let mut aux: Vec<(usize, f64)> = Vec::new(); // (row, coefficient) per aux column
        for (r, row) in std.rows.iter().enumerate() {
            match row.relation {
                Relation::Le => {
                    unit_col.push(kind.len());
                    kind.push(ColKind::Slack);
                    aux.push((r, 1.0));
                }
                Relation::Ge => {
                    kind.push(ColKind::Slack);
                    aux.push((r, -1.0));
                    unit_col.push(kind.len());
                    kind.push(ColKind::Artificial);
                    aux.push((r, 1.0));
                }
                Relation::Eq => {
                    unit_col.push(kind.len());
                    kind.push(ColKind::Artificial);
                    aux.push((r, 1.0));
                }
            }
        }
        let cols = kind.len();
        let width = cols + 1;
        let mut a = vec![0.0; rows * width];
        for (r, row) in std.rows.iter().enumerate() {
            a[r * width..r * width + std.structural].copy_from_slice(&row.coeffs);
            a[r * width + cols] = row.rhs;
        }
        for (k, &(r, coef)) in aux.iter().enumerate() {
            a[r * width + std.structural + k] = coef;
        }
        Self {
            rows,
            cols,
            a,
            basis: unit_col.clone(),
            kind,
            unit_col,
            costs: vec![0.0; cols],
            reduced: vec![0.0; cols],
            cost_tol: 0.0,
        }
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.a[r * (self.cols + 1) + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn rhs_column(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.rows).map(|r| self.rhs(r))
    }

    fn set_costs(&mut self, costs: &[f64]) {
        self.costs.copy_from_slice(costs);
        self.cost_tol = 1e-10 * costs.iter().fold(1.0_f64, |m, c| m.max(c.abs()));
        self.refresh_reduced();
    }

    fn refresh_reduced(&mut self) {
        for j in 0..self.cols {
            let mut d = self.costs[j];
            for r in 0..self.rows {
                d -= self.costs[self.basis[r]] * self.at(r, j);
            }
            self.reduced[j] = d;
        }
    }

    fn objective_value(&self) -> f64 {
        (0..self.rows)
            .map(|r| self.costs[self.basis[r]] * self.rhs(r))
            .sum()
    }

    fn primal(&self) -> Vec<f64> {
        let mut y = vec![0.0; self.cols];
        for r in 0..self.rows {
            y[self.basis[r]] = self.rhs(r).max(0.0);
        }
        y
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let width = self.cols + 1;
        let p = self.at(pr, pc);
        for v in &mut self.a[pr * width..(pr + 1) * width] {
            *v /= p;
        }
        let pivot_row: Vec<f64> = self.a[pr * width..(pr + 1) * width].to_vec();
        for r in 0..self.rows {
            if r == pr {
                continue;
            }
            let f = self.a[r * width + pc];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.a[r * width..(r + 1) * width];
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            row[pc] = 0.0;
        }
        let d = self.reduced[pc];
        if d != 0.0 {
            for (rj, pv) in self.reduced.iter_mut().zip(&pivot_row) {
                *rj -= d * pv;
            }
            self.reduced[pc] = 0.0;
        }
        self.basis[pr] = pc;
    }

    /// Bland's rule simplex iterations until optimality or unboundedness.
    fn run(
        &mut self,
        pivots: &mut usize,
        limit: usize,
        bar_artificials: bool,
    ) -> Result<Outcome, LpError> {
        loop {
            let entering = (0..self.cols).find(|&j| {
                !(bar_artificials && self.kind[j] == ColKind::Artificial)
                    && self.reduced[j] < -self.cost_tol
            });
            let Some(pc) = entering else {
                return Ok(Outcome::Optimal);
            };

            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, pc);
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(r).max(0.0) / a;
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((br, best)) => {
                        let tie = RATIO_TIE * (1.0 + best.abs());
                        if ratio < best - tie
                            || (ratio <= best + tie && self.basis[r] < self.basis[br])
                        {
                            Some((r, ratio))
                        } else {
                            Some((br, best))
                        }
                    }
                };
            }
            let Some((pr, _)) = leave else {
                return Ok(Outcome::Unbounded);
            };

            *pivots += 1;
            if *pivots > limit {
                return Err(LpError::IterationLimit(limit));
            }
            self.pivot(pr, pc);
        }
    }

    /// Pivots zero-valued artificials out of the basis where a non-artificial
    /// column can replace them. Rows that cannot be cleared are redundant.
    fn evict_artificials(&mut self) {
        for r in 0..self.rows {
            if self.kind[self.basis[r]] != ColKind::Artificial {
                continue;
            }
            let replacement = (0..self.cols)
                .filter(|&j| self.kind[j] != ColKind::Artificial)
                .find(|&j| self.at(r, j).abs() > PIVOT_TOL);
            if let Some(pc) = replacement {
                self.pivot(r, pc);
            }
        }
    }
}
