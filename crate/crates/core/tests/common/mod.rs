//! Seeded scenario generator shared by the integration tests.
#![allow(dead_code)]

use hkdelay::dynamics::DEFAULT_QUAD_NODES;
use hkdelay::{
    DelayProfile, InfluenceKernel, InitialHistory, MemoryWeight, ModelConfig, WeightFamily, WeightScheme,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Case {
    pub label: String,
    pub config: ModelConfig,
    pub initial: InitialHistory,
}

fn point_in_ball(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Vec<f64> {
    loop {
        let p: Vec<f64> = (0..dim).map(|_| radius * (2.0 * rng.random::<f64>() - 1.0)).collect();
        if p.iter().map(|x| x * x).sum::<f64>() <= radius * radius {
            return p;
        }
    }
}

/// `count` randomized scenarios with N ≤ 50, d ≤ 3, alternating weight
/// schemes. Deterministic in `seed`.
pub fn random_suite(count: usize, seed: u64, t_end: f64) -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let n = if k % 4 == 0 { rng.random_range(30..=50) } else { rng.random_range(2..=20) };
            let dim = rng.random_range(1..=3);
            let scheme = if k % 2 == 0 { WeightScheme::Symmetric } else { WeightScheme::Normalized };
            let kernel = match rng.random_range(0..3) {
                0 => InfluenceKernel::constant(),
                1 => InfluenceKernel::power_law(rng.random_range(0.5..2.0)).unwrap(),
                _ => InfluenceKernel::exponential(rng.random_range(0.2..1.5)).unwrap(),
            };
            let delay = if rng.random_bool(0.5) {
                DelayProfile::constant(rng.random_range(0.05..0.3)).unwrap()
            } else {
                let tau0 = rng.random_range(0.1..0.3);
                DelayProfile::linear_decreasing(tau0, tau0 * rng.random_range(0.5..1.0), rng.random_range(0.0..0.2))
                    .unwrap()
            };
            let tau0 = delay.tau_zero();
            let family = match rng.random_range(0..3) {
                0 => WeightFamily::Constant { value: rng.random_range(0.5..2.0) },
                1 => WeightFamily::Exponential { rate: rng.random_range(-1.0..2.0) },
                _ => WeightFamily::Polynomial {
                    coefficients: vec![1.0, -rng.random_range(0.0..0.9) / tau0],
                },
            };
            let weight = MemoryWeight::new(family, &delay).unwrap();
            let radius = rng.random_range(0.1..1.0);
            let initial = if rng.random_bool(0.6) {
                let positions = (0..n).flat_map(|_| point_in_ball(&mut rng, dim, radius)).collect();
                InitialHistory::constant(dim, positions)
            } else {
                let times = vec![-tau0, -0.5 * tau0, 0.0];
                let states = times
                    .iter()
                    .map(|_| (0..n).flat_map(|_| point_in_ball(&mut rng, dim, radius)).collect())
                    .collect();
                InitialHistory::SampledPath { dim, times, states }
            };
            let config = ModelConfig {
                n_agents: n,
                dim,
                scheme,
                kernel,
                delay,
                weight,
                dt: delay.tau_star() / 20.0,
                t_end,
                quad_nodes: DEFAULT_QUAD_NODES,
            };
            Case {
                label: format!("case {k}: N={n} d={dim} {scheme:?} {:?} {:?}", kernel.family, delay.family),
                config,
                initial,
            }
        })
        .collect()
}

/// Two agents at 0 and 1 with ψ ≡ 1 and α ≡ 1 under a constant delay.
pub fn pair(tau: f64, dt: f64, t_end: f64) -> (ModelConfig, InitialHistory) {
    let delay = DelayProfile::constant(tau).unwrap();
    let config = ModelConfig {
        n_agents: 2,
        dim: 1,
        scheme: WeightScheme::Symmetric,
        kernel: InfluenceKernel::constant(),
        weight: MemoryWeight::constant(1.0, &delay).unwrap(),
        delay,
        dt,
        t_end,
        quad_nodes: DEFAULT_QUAD_NODES,
    };
    (config, InitialHistory::constant_1d(&[0.0, 1.0]))
}
