use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{AttackPlan, AttackerParams, EncryptionAlgorithm};

use super::{plan_better, GreedyConfig};

/// Source of the accept/reject decisions made by SampleGreedy.
pub trait CoinSource {
    /// Returns true to accept the current candidate, which happens with
    /// probability `accept_prob` for a fair source.
    fn accept(&mut self, accept_prob: f64) -> bool;
}

impl CoinSource for ChaCha8Rng {
    fn accept(&mut self, accept_prob: f64) -> bool {
        self.random::<f64>() < accept_prob
    }
}

/// Replays a fixed accept/reject sequence, rejecting once it runs out.
#[derive(Debug, Clone)]
pub struct ScriptedCoins {
    flips: std::vec::IntoIter<bool>,
}

impl ScriptedCoins {
    pub fn new(flips: Vec<bool>) -> Self {
        Self {
            flips: flips.into_iter(),
        }
    }
}

impl CoinSource for ScriptedCoins {
    fn accept(&mut self, _accept_prob: f64) -> bool {
        self.flips.next().unwrap_or(false)
    }
}

/// SampleGreedy with a ChaCha8 stream seeded from `config.rng_seed`.
pub fn solve_sample_greedy(
    algorithm: &EncryptionAlgorithm,
    params: &AttackerParams,
    config: &GreedyConfig,
) -> AttackPlan {
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    solve_sample_greedy_with(algorithm, params, config.accept_prob, &mut rng)
}

/// SampleGreedy driven by an arbitrary coin source.
///
/// Phase 1 keeps the best affordable singleton. Phase 2 repeatedly takes the
/// remaining affordable candidate of highest marginal density
/// `(v * dP - dphi) / k_j` and flips a coin: accepted candidates join the set
/// and consume budget, rejected ones are discarded for good. Candidates with
/// no positive marginal gain are never offered. The better of the two phases
/// (or the empty plan) is returned.
pub fn solve_sample_greedy_with(
    algorithm: &EncryptionAlgorithm,
    params: &AttackerParams,
    accept_prob: f64,
    coins: &mut impl CoinSource,
) -> AttackPlan {
    let methods = &algorithm.attacks;

    let mut best_single = AttackPlan::empty();
    for (i, m) in methods.iter().enumerate() {
        if m.cost <= params.budget {
            let plan = AttackPlan::from_indices(algorithm, &[i], params);
            if plan_better(&plan, &best_single) {
                best_single = plan;
            }
        }
    }

    let mut chosen = Vec::new();
    let mut open: Vec<bool> = vec![true; methods.len()];
    let mut remaining = params.budget;
    let mut spent = 0.0;
    let mut fail = 1.0;
    loop {
        let mut pick: Option<(usize, f64)> = None;
        for (j, m) in methods.iter().enumerate() {
            if !open[j] || m.cost > remaining {
                continue;
            }
            let gain = params.value * m.success * fail
                - (params.cost_function.eval(spent + m.cost) - params.cost_function.eval(spent));
            if gain <= 0.0 {
                continue;
            }
            let density = if m.cost > 0.0 {
                gain / m.cost
            } else {
                f64::INFINITY
            };
            let better = match pick {
                None => true,
                Some((b, bd)) => {
                    density > bd
                        || (density == bd
                            && (m.cost < methods[b].cost
                                || (m.cost == methods[b].cost && m.id < methods[b].id)))
                }
            };
            if better {
                pick = Some((j, density));
            }
        }
        let Some((j, _)) = pick else { break };
        open[j] = false;
        if coins.accept(accept_prob) {
            chosen.push(j);
            remaining -= methods[j].cost;
            spent += methods[j].cost;
            fail *= 1.0 - methods[j].success;
        }
    }
    chosen.sort_unstable();
    let greedy = AttackPlan::from_indices(algorithm, &chosen, params);

    if plan_better(&greedy, &best_single) {
        greedy
    } else {
        best_single
    }
}
