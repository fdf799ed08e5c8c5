use crate::model::{AttackPlan, AttackerParams, EncryptionAlgorithm};

use super::{plan_better, AttackerError};

/// Largest method set [`solve_brute_force`] will enumerate.
pub const BRUTE_FORCE_MAX_METHODS: usize = 25;

/// Enumerates every affordable subset and returns the best one under the
/// shared tie-breaking order.
pub fn solve_brute_force(
    algorithm: &EncryptionAlgorithm,
    params: &AttackerParams,
) -> Result<AttackPlan, AttackerError> {
    let n = algorithm.attacks.len();
    if n > BRUTE_FORCE_MAX_METHODS {
        return Err(AttackerError::TooManyMethods {
            methods: n,
            max: BRUTE_FORCE_MAX_METHODS,
        });
    }
    if params.budget < 0.0 {
        return Err(AttackerError::BudgetNegative(params.budget));
    }

    let mut best = AttackPlan::empty();
    let mut indices = Vec::with_capacity(n);
    for mask in 1u32..(1u32 << n) {
        indices.clear();
        indices.extend((0..n).filter(|i| mask & (1 << i) != 0));
        let cost: f64 = indices.iter().map(|&i| algorithm.attacks[i].cost).sum();
        if cost > params.budget {
            continue;
        }
        let plan = AttackPlan::from_indices(algorithm, &indices, params);
        if plan_better(&plan, &best) {
            best = plan;
        }
    }
    Ok(best)
}
