use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::{sample_particles, support_diameter, wasserstein1, EmpiricalMeasure, InitialMeasureSpec};
use crate::diagnostics::{certify, diameter, ConsensusCertificate};
use crate::dynamics::{simulate, ModelConfig, Trajectory};
use crate::error::{Checker, Error, Result};

/// Relative slack allowed on the diameter decay bound.
pub const DECAY_BOUND_SLACK: f64 = 5e-2;

/// Absolute slack when comparing successive W1 values, covering rounding.
const W1_TOLERANCE: f64 = 1e-12;

/// One (N, checkpoint) line of the report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub t: f64,
    /// d_1(μ_t^{N_k}, μ_t^{N_{k+1}}); absent for the last N.
    #[serde(rename = "w1_to_next_N")]
    pub w1_to_next_n: Option<f64>,
    pub support_diameter: Option<f64>,
    /// max_s d_X(g_s) · e^{−K t}; absent when no certificate holds.
    pub decay_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub certificate: ConsensusCertificate,
    pub rows: Vec<ConvergenceRow>,
    /// At every checkpoint, W1 to the next N never grows along the N list.
    pub w1_nonincreasing: bool,
    /// Every diameter sits within the decay bound (with slack). `None` when
    /// the certificate does not hold.
    pub diameter_within_bound: Option<bool>,
}

impl ConvergenceReport {
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for row in &self.rows {
            let line = serde_json::to_string(row).expect("row serializes");
            out.write_all(line.as_bytes())?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConvergenceRow> {
        self.rows.iter().filter(|r| r.error.is_some())
    }

    pub fn row(&self, n: usize, t: f64) -> Option<&ConvergenceRow> {
        self.rows.iter().find(|r| r.n == n && r.t == t)
    }
}

struct Run {
    snapshots: Vec<EmpiricalMeasure>,
    initial_diameter: f64,
}

fn snapshot(traj: &Trajectory, t: f64, dt: f64) -> Result<EmpiricalMeasure> {
    let k = traj.nearest(t);
    if (traj.times[k] - t).abs() > 1e-9 * dt.max(t.abs()) + 1e-12 {
        return Err(Error::validation(
            "checkpoints",
            format!("t = {t} is not on the step grid (nearest record at {})", traj.times[k]),
        ));
    }
    EmpiricalMeasure::new(traj.dim, traj.states[k].clone())
}

fn run_one(spec: &InitialMeasureSpec, config: &ModelConfig, n: usize, checkpoints: &[f64]) -> Result<Run> {
    let tau0 = config.delay.tau_zero();
    let initial = sample_particles(spec, n, tau0)?;
    let config = ModelConfig {
        n_agents: n,
        ..config.clone()
    };
    let initial_diameter = initial
        .nodes()
        .iter()
        .map(|(_, state)| diameter(state, spec.dim))
        .fold(0.0, f64::max);
    let traj = simulate(&config, &initial)?;
    let snapshots = checkpoints
        .iter()
        .map(|&t| snapshot(&traj, t, config.dt))
        .collect::<Result<_>>()?;
    Ok(Run {
        snapshots,
        initial_diameter,
    })
}

fn validate(spec: &InitialMeasureSpec, config: &ModelConfig, n_list: &[usize], checkpoints: &[f64]) -> Result<()> {
    let mut c = Checker::default();
    if let Err(e) = spec.validate() {
        c.absorb("", e);
    }
    c.check(spec.dim == config.dim, "initial.dim", || {
        format!("measure has dimension {}, model has {}", spec.dim, config.dim)
    });
    c.check(!n_list.is_empty(), "n_list", || "no particle counts given".into());
    c.check(n_list.iter().all(|&n| n >= 2), "n_list", || "every N must be at least 2".into());
    c.check(n_list.windows(2).all(|w| w[0] < w[1]), "n_list", || {
        "particle counts must be strictly increasing".into()
    });
    c.check(!checkpoints.is_empty(), "checkpoints", || "no checkpoints given".into());
    c.check(
        checkpoints.iter().all(|&t| (0.0..=config.t_end).contains(&t)),
        "checkpoints",
        || format!("checkpoints must lie in [0, {}]", config.t_end),
    );
    c.finish()
}

/// Runs the particle system for every N in `n_list` from quantile (or
/// seeded) approximations of the same initial measure and tabulates, at each
/// checkpoint, the distance to the next refinement and the support diameter
/// against the certified decay bound. A failing N is reported in its rows
/// and does not stop the others.
pub fn convergence_experiment(
    spec: &InitialMeasureSpec,
    config: &ModelConfig,
    n_list: &[usize],
    checkpoints: &[f64],
) -> Result<ConvergenceReport> {
    validate(spec, config, n_list, checkpoints)?;
    let radius = spec.support_radius(config.delay.tau_zero());
    let certificate = certify(&config.kernel, &config.delay, &config.weight, radius)?;

    let runs: Vec<Result<Run>> = n_list
        .par_iter()
        .map(|&n| run_one(spec, config, n, checkpoints))
        .collect();

    let mut rows = Vec::with_capacity(n_list.len() * checkpoints.len());
    for (k, (&n, run)) in n_list.iter().zip(&runs).enumerate() {
        let next = runs.get(k + 1);
        for (c, &t) in checkpoints.iter().enumerate() {
            let mut row = ConvergenceRow {
                n,
                t,
                w1_to_next_n: None,
                support_diameter: None,
                decay_bound: None,
                error: None,
            };
            match run {
                Err(e) => row.error = Some(e.to_string()),
                Ok(run) => {
                    row.support_diameter = Some(support_diameter(&run.snapshots[c]));
                    row.decay_bound = certificate
                        .rate
                        .map(|rate| run.initial_diameter * (-rate * t).exp());
                    match next {
                        Some(Ok(other)) => match wasserstein1(&run.snapshots[c], &other.snapshots[c]) {
                            Ok(w) => row.w1_to_next_n = Some(w),
                            Err(e) => row.error = Some(e.to_string()),
                        },
                        Some(Err(_)) => {
                            row.error = Some(format!("run for N = {} failed", n_list[k + 1]))
                        }
                        None => {}
                    }
                }
            }
            rows.push(row);
        }
    }

    let w1_nonincreasing = checkpoints.iter().all(|&t| {
        let series: Vec<f64> = rows
            .iter()
            .filter(|r| r.t == t)
            .filter_map(|r| r.w1_to_next_n)
            .collect();
        series.windows(2).all(|w| w[1] <= w[0] + W1_TOLERANCE)
    });
    let diameter_within_bound = certificate.rate.map(|_| {
        rows.iter().all(|r| match (r.support_diameter, r.decay_bound) {
            (Some(d), Some(b)) => d <= b * (1.0 + DECAY_BOUND_SLACK),
            _ => r.error.is_some(),
        })
    });

    Ok(ConvergenceReport {
        certificate,
        rows,
        w1_nonincreasing,
        diameter_within_bound,
    })
}
