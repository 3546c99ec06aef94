//! Right-hand side of the delayed Hegselmann-Krause system and its
//! fixed-step integration by the method of steps.
//!
//! Agent velocities are
//!
//! ```text
//! dx_i/dt = 1/(N h(t)) Σ_{j≠i} ∫_{t−τ(t)}^t α(t−s) a_ij(t;s) (x_j(s) − x_i(t)) ds
//! ```
//!
//! with the s-integral taken by a composite trapezoid rule on `quad_nodes`
//! equally spaced nodes. Time stepping is classical RK4. Stage evaluations at
//! t + c·dt need delayed states on (t, t + c·dt]; those are read from the
//! straight line joining the accepted state at t to the stage state.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Checker, Error, Result};
use crate::history::{norm, HistoryBuffer, InitialHistory};
use crate::kernels::{a_bar, DelayProfile, InfluenceKernel, MemoryWeight};
use crate::output::fmt_f64;
use crate::quadrature::trapezoid_weights;

pub const DEFAULT_QUAD_NODES: usize = 32;

/// Slack on the uniform bound max_i |x_i(t)| ≤ R checked after every step.
pub const RADIUS_TOLERANCE: f64 = 1e-8;

// Below this agent count the per-agent loop stays sequential.
const PARALLEL_MIN_AGENTS: usize = 48;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightScheme {
    /// a_ij = ψ(|x_j(s) − x_i(t)|)
    Symmetric,
    /// a_ij = N ψ(|x_j(s) − x_i(t)|) / Σ_k ψ(|x_k(s) − x_i(t)|)
    Normalized,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub n_agents: usize,
    pub dim: usize,
    pub scheme: WeightScheme,
    pub kernel: InfluenceKernel,
    pub delay: DelayProfile,
    pub weight: MemoryWeight,
    pub dt: f64,
    pub t_end: f64,
    pub quad_nodes: usize,
}

impl ModelConfig {
    /// Checks every cross-field rule and reports all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut c = Checker::default();
        c.check(self.n_agents >= 2, "n", || {
            format!("need at least 2 agents, got {}", self.n_agents)
        });
        c.check(self.dim >= 1, "d", || "dimension must be at least 1".into());
        let tau_star = self.delay.tau_star();
        c.check(
            self.dt > 0.0 && self.dt <= tau_star / 20.0,
            "dt",
            || {
                format!(
                    "step {} must be positive and at most τ*/20 = {}",
                    self.dt,
                    tau_star / 20.0
                )
            },
        );
        c.check(self.t_end > 0.0 && self.t_end.is_finite(), "t_end", || {
            format!("horizon must be positive and finite, got {}", self.t_end)
        });
        c.check(self.quad_nodes >= 2, "quad_nodes", || {
            format!("need at least 2 quadrature nodes, got {}", self.quad_nodes)
        });
        c.check(
            self.weight.domain_end == self.delay.tau_zero(),
            "weight",
            || "memory weight domain does not match τ(0)".into(),
        );
        if let Err(e) = a_bar(&self.weight, &self.delay) {
            c.absorb("", e);
        }
        c.finish()
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil().max(1.0) as usize
    }

    fn h(&self, t: f64) -> f64 {
        self.weight.integral(self.delay.tau(t))
    }
}

/// Communication rate a_ij(t; s).
///
/// `all_x_at_s` is the full N×d configuration at time s; it is only read by
/// the normalized scheme, whose denominator sums over every k including i.
pub fn comm_weight(
    scheme: WeightScheme,
    kernel: &InfluenceKernel,
    x_j_at_s: &[f64],
    x_i_at_t: &[f64],
    all_x_at_s: &[f64],
) -> f64 {
    let psi = |y: &[f64]| kernel.eval(crate::history::norm_diff(y, x_i_at_t));
    match scheme {
        WeightScheme::Symmetric => psi(x_j_at_s),
        WeightScheme::Normalized => {
            let dim = x_i_at_t.len();
            let n = all_x_at_s.len() / dim;
            let denom: f64 = all_x_at_s.chunks(dim).map(psi).sum();
            n as f64 * psi(x_j_at_s) / denom
        }
    }
}

/// Source of delayed states x(s).
pub trait DelayedStates {
    fn sample_into(&self, s: f64, out: &mut [f64]) -> Result<()>;
}

impl DelayedStates for HistoryBuffer {
    fn sample_into(&self, s: f64, out: &mut [f64]) -> Result<()> {
        HistoryBuffer::sample_into(self, s, out)
    }
}

/// History extended past its last stamp by the segment joining the last
/// stored state to a stage state.
struct StageView<'a> {
    history: &'a HistoryBuffer,
    t0: f64,
    x0: &'a [f64],
    t_stage: f64,
    x_stage: &'a [f64],
}

impl DelayedStates for StageView<'_> {
    fn sample_into(&self, s: f64, out: &mut [f64]) -> Result<()> {
        if s <= self.t0 {
            return self.history.sample_into(s, out);
        }
        if s > self.t_stage {
            return Err(Error::OutOfRange {
                s,
                lo: self.t0,
                hi: self.t_stage,
            });
        }
        if s == self.t_stage {
            out.copy_from_slice(self.x_stage);
            return Ok(());
        }
        let theta = (s - self.t0) / (self.t_stage - self.t0);
        for ((o, a), b) in out.iter_mut().zip(self.x0).zip(self.x_stage) {
            *o = a + theta * (b - a);
        }
        Ok(())
    }
}

/// Velocities of all agents at time t; `x` is the N×d state at t.
pub fn rhs(t: f64, x: &[f64], history: &HistoryBuffer, config: &ModelConfig) -> Result<Vec<f64>> {
    eval_rhs(t, x, history, config)
}

fn eval_rhs(t: f64, x: &[f64], delayed: &impl DelayedStates, config: &ModelConfig) -> Result<Vec<f64>> {
    let n = config.n_agents;
    let d = config.dim;
    let nd = n * d;
    debug_assert_eq!(x.len(), nd);
    let m = config.quad_nodes;
    let tau = config.delay.tau(t);
    let h = config.h(t);
    debug_assert!(h > 0.0);

    // quadrature weights already include α(t − s_m)
    let mut weights = trapezoid_weights(m, tau);
    let mut nodes = vec![0.0; m * nd];
    for (k, w) in weights.iter_mut().enumerate() {
        let lag = tau * (m - 1 - k) as f64 / (m - 1) as f64;
        let s = if k == m - 1 { t } else { t - lag };
        *w *= config.weight.eval(lag);
        delayed.sample_into(s, &mut nodes[k * nd..(k + 1) * nd])?;
    }
    let scale = 1.0 / (n as f64 * h);
    let mut v = vec![0.0; nd];

    if config.kernel.is_constant() {
        // ψ ≡ 1: a_ij = 1 under both schemes, so the j-sum collapses.
        // Coordinates are taken relative to agent 0 so coincident states give
        // exactly zero.
        let origin = &x[..d];
        let w_total: f64 = weights.iter().sum();
        let mut agg = vec![0.0; nd];
        let mut sum = vec![0.0; d];
        for (k, w) in weights.iter().enumerate() {
            let xs = &nodes[k * nd..(k + 1) * nd];
            sum.iter_mut().for_each(|c| *c = 0.0);
            for p in xs.chunks(d) {
                for c in 0..d {
                    sum[c] += p[c] - origin[c];
                }
            }
            for (a, p) in agg.chunks_mut(d).zip(xs.chunks(d)) {
                for c in 0..d {
                    a[c] += w * (sum[c] - (p[c] - origin[c]));
                }
            }
        }
        let others = (n - 1) as f64;
        for ((vi, ai), xi) in v.chunks_mut(d).zip(agg.chunks(d)).zip(x.chunks(d)) {
            for c in 0..d {
                vi[c] = scale * (ai[c] - others * w_total * (xi[c] - origin[c]));
            }
        }
        return Ok(v);
    }

    let agent = |i: usize, vi: &mut [f64]| {
        let xi = &x[i * d..(i + 1) * d];
        let mut psi = vec![0.0; n];
        for (k, w) in weights.iter().enumerate() {
            let xs = &nodes[k * nd..(k + 1) * nd];
            for (j, p) in xs.chunks(d).enumerate() {
                psi[j] = config.kernel.eval(crate::history::norm_diff(p, xi));
            }
            let factor = match config.scheme {
                WeightScheme::Symmetric => *w,
                WeightScheme::Normalized => w * n as f64 / psi.iter().sum::<f64>(),
            };
            for (j, p) in xs.chunks(d).enumerate() {
                if j == i {
                    continue;
                }
                let a = factor * psi[j];
                for c in 0..d {
                    vi[c] += a * (p[c] - xi[c]);
                }
            }
        }
        vi.iter_mut().for_each(|c| *c *= scale);
    };
    if n >= PARALLEL_MIN_AGENTS {
        v.par_chunks_mut(d).enumerate().for_each(|(i, vi)| agent(i, vi));
    } else {
        v.chunks_mut(d).enumerate().for_each(|(i, vi)| agent(i, vi));
    }
    Ok(v)
}

fn check_finite(t: f64, stage: usize, values: &[f64], dim: usize) -> Result<()> {
    match values.iter().position(|x| !x.is_finite()) {
        None => Ok(()),
        Some(k) => Err(Error::Numeric {
            t,
            detail: format!(
                "non-finite value {} in RK stage {stage} for agent {} (coordinate {})",
                values[k],
                k / dim,
                k % dim
            ),
        }),
    }
}

pub fn speed_max(velocities: &[f64], dim: usize) -> f64 {
    velocities.chunks(dim).map(norm).fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutput {
    pub x_next: Vec<f64>,
    /// max_k |dx_k/dt| evaluated at t + dt.
    pub speed_max_next: f64,
    /// Velocities at t + dt; the first stage of the next step.
    pub velocity_next: Vec<f64>,
}

/// One RK4 step of size `config.dt` from (t, x). `history` must end at t.
pub fn step(t: f64, x: &[f64], history: &HistoryBuffer, config: &ModelConfig) -> Result<StepOutput> {
    let k1 = eval_rhs(t, x, history, config)?;
    advance(t, x, &k1, history, config)
}

fn advance(
    t: f64,
    x: &[f64],
    k1: &[f64],
    history: &HistoryBuffer,
    config: &ModelConfig,
) -> Result<StepOutput> {
    let dt = config.dt;
    let d = config.dim;
    assert!(
        dt < config.delay.tau_star(),
        "step {dt} must be shorter than the minimal delay"
    );
    match history.last_time() {
        Some(last) if last == t => {}
        last => {
            return Err(Error::OutOfRange {
                s: t,
                lo: f64::NAN,
                hi: last.unwrap_or(f64::NAN),
            })
        }
    }
    check_finite(t, 1, k1, d)?;
    let stage = |c: f64, k: &[f64]| -> Vec<f64> {
        x.iter().zip(k).map(|(xi, ki)| xi + c * dt * ki).collect()
    };
    fn view<'a>(history: &'a HistoryBuffer, t0: f64, x0: &'a [f64], ts: f64, xs: &'a [f64]) -> StageView<'a> {
        StageView {
            history,
            t0,
            x0,
            t_stage: ts,
            x_stage: xs,
        }
    }

    let x2 = stage(0.5, k1);
    let k2 = eval_rhs(t + 0.5 * dt, &x2, &view(history, t, x, t + 0.5 * dt, &x2), config)?;
    check_finite(t, 2, &k2, d)?;
    let x3 = stage(0.5, &k2);
    let k3 = eval_rhs(t + 0.5 * dt, &x3, &view(history, t, x, t + 0.5 * dt, &x3), config)?;
    check_finite(t, 3, &k3, d)?;
    let x4 = stage(1.0, &k3);
    let k4 = eval_rhs(t + dt, &x4, &view(history, t, x, t + dt, &x4), config)?;
    check_finite(t, 4, &k4, d)?;

    let x_next: Vec<f64> = (0..x.len())
        .map(|q| x[q] + dt / 6.0 * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q]))
        .collect();
    check_finite(t + dt, 5, &x_next, d)?;
    let velocity_next = eval_rhs(t + dt, &x_next, &view(history, t, x, t + dt, &x_next), config)?;
    check_finite(t + dt, 6, &velocity_next, d)?;
    Ok(StepOutput {
        speed_max_next: speed_max(&velocity_next, d),
        x_next,
        velocity_next,
    })
}

/// Stored solution: the seeded initial segment on `[−τ(0), 0)` followed by
/// every accepted step from t = 0.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub n_agents: usize,
    pub dim: usize,
    pub times: Vec<f64>,
    /// N×d state per stamp.
    pub states: Vec<Vec<f64>>,
    pub speed_max: Vec<f64>,
    /// Index of the t = 0 record.
    pub origin: usize,
}

impl Trajectory {
    /// Builds a trajectory from raw records. `times` must be strictly
    /// increasing and contain 0.
    pub fn from_records(
        n_agents: usize,
        dim: usize,
        times: Vec<f64>,
        states: Vec<Vec<f64>>,
        speed_max: Vec<f64>,
    ) -> Result<Self> {
        let mut c = Checker::default();
        c.check(times.len() == states.len() && times.len() == speed_max.len(), "records", || {
            "times, states and speed_max must have equal length".into()
        });
        c.check(times.windows(2).all(|w| w[0] < w[1]), "times", || {
            "times must be strictly increasing".into()
        });
        c.check(
            states.iter().all(|s| s.len() == n_agents * dim),
            "states",
            || format!("every state must have {} entries", n_agents * dim),
        );
        c.finish()?;
        let origin = times
            .iter()
            .position(|&t| t == 0.0)
            .ok_or_else(|| Error::validation("times", "no record at t = 0"))?;
        Ok(Self {
            n_agents,
            dim,
            times,
            states,
            speed_max,
            origin,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Indices of the records with t ≥ 0.
    pub fn forward(&self) -> std::ops::Range<usize> {
        self.origin..self.times.len()
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().map(|s| s.as_slice()).unwrap_or(&[])
    }

    /// Index of the record nearest to `t`.
    pub fn nearest(&self, t: f64) -> usize {
        let upper = self.times.partition_point(|&x| x < t);
        if upper == 0 {
            return 0;
        }
        if upper == self.times.len() {
            return upper - 1;
        }
        if (self.times[upper] - t) < (t - self.times[upper - 1]) {
            upper
        } else {
            upper - 1
        }
    }

    /// CSV with columns `t, agent, x_1..x_d, speed_max` for every record with
    /// t ≥ 0, ordered by time then agent.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut header = String::from("t,agent");
        for c in 1..=self.dim {
            header.push_str(&format!(",x_{c}"));
        }
        header.push_str(",speed_max\n");
        out.write_all(header.as_bytes())?;
        for k in self.forward() {
            let t = fmt_f64(self.times[k]);
            let sp = fmt_f64(self.speed_max[k]);
            for (i, p) in self.states[k].chunks(self.dim).enumerate() {
                let mut line = format!("{t},{i}");
                for v in p {
                    line.push(',');
                    line.push_str(&fmt_f64(*v));
                }
                line.push(',');
                line.push_str(&sp);
                line.push('\n');
                out.write_all(line.as_bytes())?;
            }
        }
        Ok(())
    }
}

/// Largest |x_{i,0}(s)| over the stamps of the initial data.
pub(crate) fn max_norm(state: &[f64], dim: usize) -> f64 {
    state.chunks(dim).map(norm).fold(0.0, f64::max)
}

/// Integrates from the initial history to `config.t_end`, checking the
/// uniform bound max_i |x_i(t)| ≤ R after every step.
pub fn simulate(config: &ModelConfig, initial: &InitialHistory) -> Result<Trajectory> {
    config.validate()?;
    let mut c = Checker::default();
    c.check(initial.dim() == config.dim, "initial", || {
        format!("initial data has dimension {}, model has {}", initial.dim(), config.dim)
    });
    c.check(initial.n_agents() == config.n_agents, "initial", || {
        format!(
            "initial data has {} agents, model has {}",
            initial.n_agents(),
            config.n_agents
        )
    });
    c.finish()?;

    let tau0 = config.delay.tau_zero();
    let dt = config.dt;
    let d = config.dim;
    let radius = crate::diagnostics::initial_radius(initial)?;
    let mut history = initial.seed_buffer(tau0, dt)?;

    let seed_times = InitialHistory::seed_times(tau0, dt);
    let n_steps = config.n_steps();
    let capacity = seed_times.len() + n_steps;
    let mut times = Vec::with_capacity(capacity);
    let mut states = Vec::with_capacity(capacity);
    let mut speeds = Vec::with_capacity(capacity);
    for &s in &seed_times[..seed_times.len() - 1] {
        times.push(s);
        states.push(initial.position_at(s));
        speeds.push(initial.speed_max_at(s));
    }

    let mut x = initial.position_at(0.0);
    let mut k1 = eval_rhs(0.0, &x, &history, config)?;
    check_finite(0.0, 1, &k1, d)?;
    times.push(0.0);
    states.push(x.clone());
    speeds.push(speed_max(&k1, d));

    for k in 0..n_steps {
        let t = k as f64 * dt;
        let t_next = (k + 1) as f64 * dt;
        let out = advance(t, &x, &k1, &history, config)?;
        let reach = max_norm(&out.x_next, d);
        if reach > radius + RADIUS_TOLERANCE {
            return Err(Error::IntegratorAccuracy {
                t: t_next,
                norm: reach,
                bound: radius,
            });
        }
        history.append(t_next, &out.x_next, out.speed_max_next)?;
        times.push(t_next);
        states.push(out.x_next.clone());
        speeds.push(out.speed_max_next);
        x = out.x_next;
        k1 = out.velocity_next;
    }

    Trajectory::from_records(config.n_agents, d, times, states, speeds)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(n: usize, scheme: WeightScheme, kernel: InfluenceKernel, tau: f64) -> ModelConfig {
        let delay = DelayProfile::constant(tau).unwrap();
        ModelConfig {
            n_agents: n,
            dim: 1,
            scheme,
            kernel,
            weight: MemoryWeight::constant(1.0, &delay).unwrap(),
            delay,
            dt: tau / 20.0,
            t_end: 1.0,
            quad_nodes: DEFAULT_QUAD_NODES,
        }
    }

    #[test]
    fn comm_weight_examples() {
        let one = InfluenceKernel::constant();
        for scheme in [WeightScheme::Symmetric, WeightScheme::Normalized] {
            let w = comm_weight(scheme, &one, &[3.0], &[0.0], &[3.0, 0.0, 7.0]);
            assert!((w - 1.0).abs() < 1e-15);
        }
        let pl = InfluenceKernel::power_law(1.0).unwrap();
        let w = comm_weight(WeightScheme::Symmetric, &pl, &[1.0], &[0.0], &[0.0, 1.0]);
        assert!((w - 0.5).abs() < 1e-15);
        // N = 2, x_1(s) = x_1(t) = 0, x_2(s) = 1: denominator 1 + 0.5
        let w = comm_weight(WeightScheme::Normalized, &pl, &[1.0], &[0.0], &[0.0, 1.0]);
        assert!((w - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rhs_two_agents_constant_history() {
        for tau in [0.1, 0.25, 1.0] {
            let cfg = config(2, WeightScheme::Symmetric, InfluenceKernel::constant(), tau);
            let hist = InitialHistory::constant_1d(&[0.0, 1.0])
                .seed_buffer(tau, cfg.dt)
                .unwrap();
            let v = rhs(0.0, &[0.0, 1.0], &hist, &cfg).unwrap();
            assert!((v[0] - 0.5).abs() < 1e-14, "{v:?}");
            assert!((v[1] + 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn rhs_general_path_matches_constant_fast_path() {
        // an exponential kernel with a tiny rate is ψ ≈ 1, exercising the
        // general loop against the ψ ≡ 1 shortcut
        let tiny = InfluenceKernel::exponential(1e-12).unwrap();
        let pos = [0.3, -1.0, 0.8, 0.1];
        for scheme in [WeightScheme::Symmetric, WeightScheme::Normalized] {
            let a = config(4, scheme, InfluenceKernel::constant(), 0.3);
            let b = config(4, scheme, tiny, 0.3);
            let hist = InitialHistory::constant_1d(&pos).seed_buffer(0.3, a.dt).unwrap();
            let va = rhs(0.0, &pos, &hist, &a).unwrap();
            let vb = rhs(0.0, &pos, &hist, &b).unwrap();
            for (p, q) in va.iter().zip(&vb) {
                assert!((p - q).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn coincident_agents_have_zero_velocity() {
        let cfg = config(3, WeightScheme::Normalized, InfluenceKernel::power_law(1.0).unwrap(), 0.2);
        let hist = InitialHistory::constant_1d(&[0.4; 3]).seed_buffer(0.2, cfg.dt).unwrap();
        let v = rhs(0.0, &[0.4; 3], &hist, &cfg).unwrap();
        assert!(v.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn rhs_translation_invariant() {
        let cfg = config(3, WeightScheme::Normalized, InfluenceKernel::exponential(1.3).unwrap(), 0.2);
        let pos = [0.0, 0.5, -0.7];
        let shifted: Vec<f64> = pos.iter().map(|x| x + 2.5).collect();
        let h1 = InitialHistory::constant_1d(&pos).seed_buffer(0.2, cfg.dt).unwrap();
        let h2 = InitialHistory::constant_1d(&shifted).seed_buffer(0.2, cfg.dt).unwrap();
        let v1 = rhs(0.0, &pos, &h1, &cfg).unwrap();
        let v2 = rhs(0.0, &shifted, &h2, &cfg).unwrap();
        for (a, b) in v1.iter().zip(&v2) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn rhs_needs_history_coverage() {
        let cfg = config(2, WeightScheme::Symmetric, InfluenceKernel::constant(), 0.2);
        let hist = InitialHistory::constant_1d(&[0.0, 1.0]).seed_buffer(0.2, cfg.dt).unwrap();
        assert!(matches!(
            rhs(0.5, &[0.0, 1.0], &hist, &cfg),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn fixed_point_is_preserved() {
        let cfg = config(3, WeightScheme::Symmetric, InfluenceKernel::power_law(2.0).unwrap(), 0.2);
        let hist = InitialHistory::constant_1d(&[1.5; 3]).seed_buffer(0.2, cfg.dt).unwrap();
        let out = step(0.0, &[1.5; 3], &hist, &cfg).unwrap();
        assert_eq!(out.x_next, vec![1.5; 3]);
        assert_eq!(out.speed_max_next, 0.0);
    }

    #[test]
    fn symmetric_pair_keeps_midpoint() {
        let mut cfg = config(2, WeightScheme::Symmetric, InfluenceKernel::power_law(1.0).unwrap(), 0.2);
        cfg.t_end = 3.0;
        let traj = simulate(&cfg, &InitialHistory::constant_1d(&[-0.8, 0.8])).unwrap();
        for s in &traj.states {
            assert!((s[0] + s[1]).abs() < 1e-14);
        }
    }

    #[test]
    fn validation_lists_every_violation() {
        let mut cfg = config(1, WeightScheme::Symmetric, InfluenceKernel::constant(), 0.2);
        cfg.dt = 0.2;
        cfg.t_end = 0.0;
        cfg.quad_nodes = 1;
        match cfg.validate().unwrap_err() {
            Error::Validation(v) => {
                for f in ["n", "dt", "t_end", "quad_nodes"] {
                    assert!(v.mentions(f), "{f} missing from {v}");
                }
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn coincident_start_stays_coincident() {
        let cfg = config(4, WeightScheme::Normalized, InfluenceKernel::exponential(1.0).unwrap(), 0.2);
        let traj = simulate(&cfg, &InitialHistory::constant_1d(&[0.3; 4])).unwrap();
        for s in &traj.states {
            assert!(s.iter().all(|&x| x == 0.3));
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let cfg = config(2, WeightScheme::Symmetric, InfluenceKernel::constant(), 0.2);
        assert!(simulate(&cfg, &InitialHistory::constant_1d(&[0.0, 1.0, 2.0])).is_err());
        assert!(simulate(&cfg, &InitialHistory::constant(2, vec![0.0, 1.0, 2.0, 3.0])).is_err());
    }

    #[test]
    fn csv_layout() {
        let mut cfg = config(2, WeightScheme::Symmetric, InfluenceKernel::constant(), 0.2);
        cfg.t_end = 0.02;
        let traj = simulate(&cfg, &InitialHistory::constant_1d(&[0.0, 1.0])).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,agent,x_1,speed_max");
        assert_eq!(lines.len(), 1 + 2 * 3);
        assert!(lines[1].starts_with("0.0000000000000000e0,0,"));
        assert!(lines[2].starts_with("0.0000000000000000e0,1,"));
    }
}
