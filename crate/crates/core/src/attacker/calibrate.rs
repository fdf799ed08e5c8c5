use std::hint::black_box;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{AttackMethod, AttackerParams, CostFunction, EncryptionAlgorithm};

use super::dp::solve_dp_unguarded;

/// Parameters of the DP runtime sweep used to pick the hybrid threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationConfig {
    /// Seconds a single DP solve may take before the method count counts as
    /// too large.
    pub time_limit: f64,
    pub max_methods: usize,
    /// Increment between consecutive method counts.
    pub step: usize,
    pub budget: f64,
    pub value: f64,
    pub success_range: (f64, f64),
    pub cost_range: (f64, f64),
    pub cost_scale: u32,
    pub rng_seed: u64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            time_limit: 0.2,
            max_methods: 500,
            step: 1,
            budget: 500.0,
            value: 1000.0,
            success_range: (0.05, 0.85),
            cost_range: (40.0, 200.0),
            cost_scale: 1,
            rng_seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPoint {
    pub methods: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// First method count whose DP solve exceeded the time limit, or
    /// `max_methods` when none did.
    pub threshold: usize,
    /// Timings sorted by method count.
    pub series: Vec<CalibrationPoint>,
}

/// The synthetic method pool for a calibration run. The instance with `n`
/// methods uses the first `n` entries, so the sequence of instances depends
/// only on the seed and ranges.
pub fn calibration_methods(config: &CalibrationConfig) -> Vec<AttackMethod> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let (s_lo, s_hi) = config.success_range;
    let (k_lo, k_hi) = config.cost_range;
    (0..config.max_methods)
        .map(|i| {
            let success = rng.random_range(s_lo..=s_hi);
            let cost = rng.random_range(k_lo..=k_hi).round();
            AttackMethod::new(format!("M{i}"), success, cost)
        })
        .collect()
}

/// Times the exact DP on growing synthetic instances.
pub fn calibrate_threshold(config: &CalibrationConfig) -> Calibration {
    let pool = calibration_methods(config);
    let params = AttackerParams::new(config.value, config.budget, CostFunction::IDENTITY);
    let step = config.step.max(1);

    let mut series = Vec::new();
    let mut threshold = None;
    let mut n = 1;
    while n <= config.max_methods {
        let algorithm = EncryptionAlgorithm {
            id: format!("calibration-{n}"),
            op_cost: 0.0,
            cpu_cost: 0.0,
            mem_cost: 0.0,
            latency: 0.0,
            resilience: 0.0,
            protected_value: 1.0,
            family: 0,
            attacks: pool[..n].to_vec(),
        };
        let start = Instant::now();
        let plan = solve_dp_unguarded(&algorithm, &params, config.cost_scale);
        black_box(plan.ok());
        let seconds = start.elapsed().as_secs_f64();
        series.push(CalibrationPoint {
            methods: n,
            seconds,
        });
        if threshold.is_none() && seconds > config.time_limit {
            threshold = Some(n);
        }
        n += step;
    }

    Calibration {
        threshold: threshold.unwrap_or(config.max_methods),
        series,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> CalibrationConfig {
        CalibrationConfig {
            max_methods: 40,
            rng_seed: 3,
            ..CalibrationConfig::default()
        }
    }

    #[test]
    fn infinite_limit_returns_max_methods() {
        let config = CalibrationConfig {
            time_limit: f64::INFINITY,
            ..small()
        };
        let cal = calibrate_threshold(&config);
        assert_eq!(cal.threshold, 40);
        assert_eq!(cal.series.len(), 40);
        assert!(cal.series.windows(2).all(|w| w[0].methods < w[1].methods));
    }

    #[test]
    fn zero_limit_returns_one() {
        let config = CalibrationConfig {
            time_limit: 0.0,
            ..small()
        };
        assert_eq!(calibrate_threshold(&config).threshold, 1);
    }

    #[test]
    fn pool_respects_ranges_and_seed() {
        let a = calibration_methods(&small());
        let b = calibration_methods(&small());
        assert_eq!(a, b);
        for m in &a {
            assert!((0.05..=0.85).contains(&m.success));
            assert!((40.0..=200.0).contains(&m.cost));
        }
        let other = calibration_methods(&CalibrationConfig {
            rng_seed: 4,
            ..small()
        });
        assert_ne!(a, other);
    }
}
