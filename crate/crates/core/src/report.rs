//! Plain-text tables and CSV for solver reports.

use std::fmt::Write as _;

use crate::attacker::{Calibration, HybridOutcome};
use crate::defender::StrategyReport;
use crate::robust::{budget_label, MaximinReport, RegretReport, ScenarioTable};

fn write_csv(
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn strategy_table(report: &StrategyReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<20} {:>8} {:>10} {:>8}  attacker plan",
        "algorithm", "p", "utility", "breach"
    );
    for (e, p) in report.evaluations.iter().zip(&report.strategy.probs) {
        let plan = if e.attack_plan.methods.is_empty() {
            "-".to_string()
        } else {
            e.attack_plan.methods.join(", ")
        };
        let _ = writeln!(
            out,
            "{:<20} {:>8.4} {:>10.3} {:>8.3}  {}",
            e.algorithm, p, e.utility, e.p_succ_star, plan
        );
    }
    let u = &report.usage;
    let _ = writeln!(out, "objective        {:.4}", report.objective);
    let _ = writeln!(out, "expected breach  {:.4}", report.expected_breach);
    let _ = writeln!(
        out,
        "usage            op {:.4}  cpu {:.3}  mem {:.4}  latency {:.4}  resilience {:.4}",
        u.op, u.cpu, u.mem, u.latency, u.resilience
    );
    let _ = write!(
        out,
        "support {} <= binding {} ({})",
        report.support_size,
        report.binding_count,
        report.binding.join(", ")
    );
    out
}

/// `algorithm,probability,utility,breach,plan`
pub fn strategy_csv(report: &StrategyReport) -> Result<String, csv::Error> {
    write_csv(
        &["algorithm", "probability", "utility", "breach", "plan"],
        report
            .evaluations
            .iter()
            .zip(&report.strategy.probs)
            .map(|(e, p)| {
                vec![
                    e.algorithm.clone(),
                    p.to_string(),
                    e.utility.to_string(),
                    e.p_succ_star.to_string(),
                    e.attack_plan.methods.join(";"),
                ]
            }),
    )
}

pub fn attacker_table(algorithm: &str, outcome: &HybridOutcome) -> String {
    let plan = &outcome.plan;
    format!(
        "algorithm  {algorithm}\nsolver     {}\nmethods    {}\nsuccess    {:.6}\ncost       {}\nutility    {:.6}",
        outcome.solver,
        if plan.methods.is_empty() { "-".to_string() } else { plan.methods.join(", ") },
        plan.success_prob,
        plan.total_cost,
        plan.utility
    )
}

pub fn scenario_table_text(table: &ScenarioTable) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:<20}", "algorithm");
    for k in &table.budgets {
        let _ = write!(out, " {:>10}", format!("k={}", budget_label(*k)));
    }
    out.push('\n');
    for (i, id) in table.algorithms.iter().enumerate() {
        let _ = write!(out, "{id:<20}");
        for row in &table.utilities {
            let _ = write!(out, " {:>10.4}", row[i]);
        }
        out.push('\n');
    }
    let _ = write!(out, "{:<20}", "V*");
    for v in &table.optima {
        let _ = write!(out, " {v:>10.4}");
    }
    out.push('\n');
    let _ = write!(out, "{:<20}", "B*");
    for b in &table.optimal_breach {
        let _ = write!(out, " {b:>10.4}");
    }
    out
}

pub fn regret_text(report: &RegretReport, algorithms: &[String]) -> String {
    let mut out = String::new();
    for (id, p) in algorithms.iter().zip(&report.strategy.probs) {
        let _ = writeln!(out, "{id:<20} {p:>10.6}");
    }
    for (k, r) in report.budgets.iter().zip(&report.per_scenario_regret) {
        let _ = writeln!(out, "regret k={:<8} {r:>10.4}", budget_label(*k));
    }
    let _ = write!(out, "max regret          {:>10.4}", report.max_regret);
    out
}

pub fn maximin_text(report: &MaximinReport, algorithms: &[String], budgets: &[f64]) -> String {
    let mut out = String::new();
    for (id, p) in algorithms.iter().zip(&report.strategy.probs) {
        let _ = writeln!(out, "{id:<20} {p:>10.6}");
    }
    for (k, v) in budgets.iter().zip(&report.scenario_values) {
        let _ = writeln!(out, "value k={:<9} {v:>10.4}", budget_label(*k));
    }
    let _ = write!(out, "worst case          {:>10.4}", report.worst_case_value);
    out
}

/// `n,seconds`
pub fn calibration_csv(calibration: &Calibration) -> Result<String, csv::Error> {
    write_csv(
        &["n", "seconds"],
        calibration
            .series
            .iter()
            .map(|p| vec![p.methods.to_string(), p.seconds.to_string()]),
    )
}
