use crate::model::{utility_from_parts, AttackPlan, AttackerParams, EncryptionAlgorithm};

use super::{AttackerError, DpConfig};

/// `round_half_even(budget * scale)`, the DP's integer capacity.
pub fn scaled_budget(budget: f64, scale: u32) -> Result<usize, AttackerError> {
    if budget.is_nan() || budget < 0.0 {
        return Err(AttackerError::BudgetNegative(budget));
    }
    Ok(scale_cost(budget, scale))
}

fn scale_cost(cost: f64, scale: u32) -> usize {
    (cost * f64::from(scale.max(1))).round_ties_even() as usize
}

/// Exact attacker best response over integer-scaled costs.
///
/// The table is indexed by the exact scaled cost spent: `fail[c]` holds the
/// smallest failure product over subsets costing exactly `c`. For a fixed
/// spend the utility is maximized by minimizing that product, so scanning
/// `c` afterwards yields the optimum for any nondecreasing cost function.
pub fn solve_dp(
    algorithm: &EncryptionAlgorithm,
    params: &AttackerParams,
    config: &DpConfig,
) -> Result<AttackPlan, AttackerError> {
    let budget = scaled_budget(params.budget, config.cost_scale)?;
    let cells = algorithm.attacks.len() as u128 * (budget as u128 + 1);
    if cells > config.max_table_cells as u128 {
        return Err(AttackerError::TableTooLarge {
            cells,
            max: config.max_table_cells,
        });
    }
    solve_dp_unguarded(algorithm, params, config.cost_scale)
}

/// [`solve_dp`] without the table-size guard.
pub fn solve_dp_unguarded(
    algorithm: &EncryptionAlgorithm,
    params: &AttackerParams,
    cost_scale: u32,
) -> Result<AttackPlan, AttackerError> {
    let scale = cost_scale.max(1);
    let budget = scaled_budget(params.budget, scale)?;
    let methods = &algorithm.attacks;
    let n = methods.len();
    let width = budget + 1;
    let weights: Vec<usize> = methods.iter().map(|m| scale_cost(m.cost, scale)).collect();

    let mut table = KnapsackTable {
        take: vec![false; n * width],
        weights: &weights,
        width,
    };
    // INFINITY marks unreachable spend levels.
    let mut fail = vec![f64::INFINITY; width];
    fail[0] = 1.0;

    for (i, m) in methods.iter().enumerate() {
        let w = weights[i];
        if w > budget {
            continue;
        }
        let keep = 1.0 - m.success;
        for c in (w..=budget).rev() {
            let prev = fail[c - w];
            if !prev.is_finite() {
                continue;
            }
            let candidate = prev * keep;
            let replace = if candidate < fail[c] {
                true
            } else if candidate == fail[c] {
                // Exact tie between two subsets of the same spend: keep the
                // one whose sorted ids come first.
                let mut with = table.subset(i, c - w);
                with.push(i);
                let without = table.subset(i, c);
                sorted_ids(algorithm, &with) < sorted_ids(algorithm, &without)
            } else {
                false
            };
            if replace {
                fail[c] = candidate;
                table.take[i * width + c] = true;
            }
        }
    }

    let mut best_spend = 0;
    let mut best_utility = 0.0;
    for (c, &f) in fail.iter().enumerate().skip(1) {
        if !f.is_finite() {
            continue;
        }
        let spend = c as f64 / f64::from(scale);
        let utility = utility_from_parts(f, spend, params);
        if utility > best_utility {
            best_utility = utility;
            best_spend = c;
        }
    }

    let indices = table.subset(n, best_spend);
    Ok(AttackPlan::from_indices(algorithm, &indices, params))
}

struct KnapsackTable<'a> {
    take: Vec<bool>,
    weights: &'a [usize],
    width: usize,
}

impl KnapsackTable<'_> {
    /// Ascending method indices of the subset stored at `spend` after the
    /// first `layers` methods have been processed.
    fn subset(&self, layers: usize, mut spend: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for i in (0..layers).rev() {
            if self.take[i * self.width + spend] {
                out.push(i);
                spend -= self.weights[i];
            }
        }
        out.reverse();
        out
    }
}

fn sorted_ids<'a>(algorithm: &'a EncryptionAlgorithm, indices: &[usize]) -> Vec<&'a str> {
    let mut ids: Vec<&str> = indices
        .iter()
        .map(|&i| algorithm.attacks[i].id.as_str())
        .collect();
    ids.sort_unstable();
    ids
}
