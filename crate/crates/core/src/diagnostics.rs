//! Post-processing of trajectories: opinion diameter, the delayed speed
//! memory γ(t), the Lyapunov functional, the consensus certificate and
//! decay-rate fits.
//!
//! Everything here reads an existing [`Trajectory`]; nothing re-integrates
//! the dynamics. Time integrals use the trajectory's own grid, on which the
//! recorded speed `M(z) = max_k |dx_k/dz|` is taken to be piecewise linear.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{max_norm, ModelConfig, Trajectory};
use crate::error::{Error, Result};
use crate::history::{norm_diff, InitialHistory};
use crate::kernels::{a_bar, h_of_t, DelayProfile, InfluenceKernel, MemoryWeight};
use crate::output::{finite_or_null, fmt_f64};
use crate::quadrature::trapezoid_weights;

/// max_{i,j} |x_i − x_j| over an N×d row-major array.
pub fn diameter(x: &[f64], dim: usize) -> f64 {
    let points: Vec<&[f64]> = x.chunks(dim).collect();
    let mut best = 0.0_f64;
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            best = best.max(norm_diff(p, q));
        }
    }
    best
}

/// R = max over the initial data of max_i |x_{i,0}(s)|. The data is
/// piecewise linear in s, so the maximum sits on a stored stamp.
pub fn initial_radius(initial: &InitialHistory) -> Result<f64> {
    let dim = initial.dim();
    if dim == 0 || initial.n_agents() == 0 {
        return Err(Error::validation("initial", "initial history is empty"));
    }
    let nodes = initial.nodes();
    if nodes.is_empty() {
        return Err(Error::validation("initial", "initial history is empty"));
    }
    Ok(nodes
        .iter()
        .map(|(_, state)| max_norm(state, dim))
        .fold(0.0, f64::max))
}

/// Running integral C(z) = ∫ M over the trajectory grid, exact for
/// piecewise-linear M.
struct SpeedIntegral<'a> {
    times: &'a [f64],
    speed: &'a [f64],
    cumulative: Vec<f64>,
}

impl<'a> SpeedIntegral<'a> {
    fn new(traj: &'a Trajectory) -> Self {
        let mut cumulative = Vec::with_capacity(traj.times.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for k in 1..traj.times.len() {
            acc += 0.5 * (traj.times[k] - traj.times[k - 1]) * (traj.speed_max[k] + traj.speed_max[k - 1]);
            cumulative.push(acc);
        }
        Self {
            times: &traj.times,
            speed: &traj.speed_max,
            cumulative,
        }
    }

    fn covers(&self, lo: f64, hi: f64) -> Result<()> {
        let (first, last) = (self.times[0], *self.times.last().unwrap());
        if lo < first || hi > last {
            return Err(Error::OutOfRange {
                s: if lo < first { lo } else { hi },
                lo: first,
                hi: last,
            });
        }
        Ok(())
    }

    fn at(&self, s: f64) -> f64 {
        let upper = self.times.partition_point(|&t| t <= s);
        if upper == 0 {
            return 0.0;
        }
        let k = upper - 1;
        if k + 1 == self.times.len() || s == self.times[k] {
            return self.cumulative[k];
        }
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let theta = (s - t0) / (t1 - t0);
        let m_s = self.speed[k] + theta * (self.speed[k + 1] - self.speed[k]);
        self.cumulative[k] + 0.5 * (s - t0) * (self.speed[k] + m_s)
    }
}

/// γ(t) = (1/h(t)) ∫_{t−τ(t)}^t α(t−s) ∫_s^t M(z) dz ds.
pub fn gamma(t: f64, traj: &Trajectory, config: &ModelConfig) -> Result<f64> {
    gamma_with(t, &SpeedIntegral::new(traj), config)
}

fn gamma_with(t: f64, cum: &SpeedIntegral<'_>, config: &ModelConfig) -> Result<f64> {
    let tau = config.delay.tau(t);
    cum.covers(t - tau, t)?;
    let h = h_of_t(&config.weight, &config.delay, t.max(0.0))?;
    let m = config.quad_nodes;
    let c_t = cum.at(t);
    let total: f64 = trapezoid_weights(m, tau)
        .iter()
        .enumerate()
        .map(|(k, w)| {
            let lag = tau * (m - 1 - k) as f64 / (m - 1) as f64;
            w * config.weight.eval(lag) * (c_t - cum.at(t - lag))
        })
        .sum();
    Ok(total / h)
}

/// The Lyapunov functional
/// L(t) = d_X(t) + β ∫₀^{τ(t)} α(s) ∫_{t−s}^t e^{−(t−σ)} ∫_σ^t M(ρ) dρ dσ ds.
pub fn lyapunov(t: f64, traj: &Trajectory, config: &ModelConfig, beta: f64) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::validation("beta", format!("β must be positive, got {beta}")));
    }
    lyapunov_unchecked(t, traj, config, beta)
}

pub(crate) fn lyapunov_unchecked(t: f64, traj: &Trajectory, config: &ModelConfig, beta: f64) -> Result<f64> {
    let k = traj.nearest(t);
    if traj.times[k] != t {
        return Err(Error::validation("t", format!("no trajectory record at t = {t}")));
    }
    let d_x = diameter(&traj.states[k], traj.dim);
    let addend = memory_addend(t, &SpeedIntegral::new(traj), config)?;
    Ok(d_x + beta * addend)
}

// ∫₀^{τ(t)} α(u) G(u) du with G(u) = ∫_{t−u}^t e^{−(t−σ)} (C(t) − C(σ)) dσ,
// nested trapezoid over the trajectory stamps inside the window.
fn memory_addend(t: f64, cum: &SpeedIntegral<'_>, config: &ModelConfig) -> Result<f64> {
    let tau = config.delay.tau(t);
    let lo = t - tau;
    cum.covers(lo, t)?;
    let c_t = cum.at(t);
    let first_inside = cum.times.partition_point(|&z| z <= lo);
    let last_inside = cum.times.partition_point(|&z| z < t);
    let mut lags = Vec::with_capacity(last_inside.saturating_sub(first_inside) + 2);
    lags.push(0.0);
    for &z in cum.times[first_inside..last_inside].iter().rev() {
        lags.push(t - z);
    }
    lags.push(tau);

    let f = |u: f64| (-u).exp() * (c_t - cum.at(t - u));
    let mut g_prev = 0.0;
    let mut f_prev = f(0.0);
    let mut outer = 0.0;
    let mut a_prev = config.weight.eval(0.0) * g_prev;
    for w in lags.windows(2) {
        let du = w[1] - w[0];
        let f_next = f(w[1]);
        let g_next = g_prev + 0.5 * du * (f_prev + f_next);
        let a_next = config.weight.eval(w[1]) * g_next;
        outer += 0.5 * du * (a_prev + a_next);
        g_prev = g_next;
        f_prev = f_next;
        a_prev = a_next;
    }
    Ok(outer)
}

/// The evaluated sufficient condition for consensus,
/// (e^{τ(0)} − 1) h(0) ≤ Ā ψ(2R)³ / (2 + ψ(2R)²), together with the
/// admissible β interval and the guaranteed exponential rate K.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConsensusCertificate {
    #[serde(rename = "R")]
    pub radius: f64,
    #[serde(rename = "psi_2R")]
    pub psi_2r: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub beta_min: Option<f64>,
    pub beta_max: Option<f64>,
    pub beta_chosen: Option<f64>,
    #[serde(rename = "K")]
    pub rate: Option<f64>,
}

impl ConsensusCertificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("certificate serializes")
    }

    /// Guaranteed rate K(β) = min{β, ψ(2R) − β h(0)(1 − e^{−τ(0)})/ψ(2R)}.
    pub fn rate_for(psi_2r: f64, h0: f64, tau0: f64, beta: f64) -> f64 {
        let q = h0 * -(-tau0).exp_m1();
        beta.min(psi_2r - beta * q / psi_2r)
    }
}

/// Evaluates the consensus condition for radius `radius` and, when it holds,
/// picks the β that maximizes the guaranteed rate.
pub fn certify(
    kernel: &InfluenceKernel,
    delay: &DelayProfile,
    weight: &MemoryWeight,
    radius: f64,
) -> Result<ConsensusCertificate> {
    if !(radius >= 0.0) || !radius.is_finite() {
        return Err(Error::Domain { what: "R", value: radius });
    }
    let tau0 = delay.tau_zero();
    let h0 = h_of_t(weight, delay, 0.0)?;
    let lower = a_bar(weight, delay)?;
    let psi = kernel.eval(2.0 * radius);
    let lhs = tau0.exp_m1() * h0;
    let rhs = lower * psi.powi(3) / (2.0 + psi * psi);
    let holds = lhs <= rhs;
    let mut cert = ConsensusCertificate {
        radius,
        psi_2r: psi,
        lhs,
        rhs,
        holds,
        beta_min: None,
        beta_max: None,
        beta_chosen: None,
        rate: None,
    };
    if !holds {
        return Ok(cert);
    }

    // q = h(0)(1 − e^{−τ(0)})
    let q = h0 * -(-tau0).exp_m1();
    let gap = (-tau0).exp() * lower * psi - q;
    let beta_min = 2.0 / gap;
    let beta_max = psi * psi / q;
    if !(gap > 0.0 && beta_min < beta_max) {
        return Err(Error::Inconsistency(format!(
            "condition holds (lhs {lhs} ≤ rhs {rhs}) but β interval [{beta_min}, {beta_max}) is empty"
        )));
    }
    // K(β) rises as β and falls as ψ − βq/ψ; the pieces cross at ψ²/(ψ + q).
    let crossing = psi * psi / (psi + q);
    let beta = crossing.clamp(beta_min, beta_max);
    let rate = ConsensusCertificate::rate_for(psi, h0, tau0, beta);
    if !(rate > 0.0) {
        return Err(Error::Inconsistency(format!(
            "certified rate K = {rate} is not positive at β = {beta}"
        )));
    }
    cert.beta_min = Some(beta_min);
    cert.beta_max = Some(beta_max);
    cert.beta_chosen = Some(beta);
    cert.rate = Some(rate);
    Ok(cert)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub d_x: f64,
    pub gamma: f64,
    /// NaN when no β was supplied.
    #[serde(serialize_with = "finite_or_null")]
    pub lyapunov: f64,
    pub speed_max: f64,
}

/// Per-stamp diagnostics for the t ≥ 0 part of a trajectory.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct DiagnosticsSeries {
    pub records: Vec<DiagnosticsRecord>,
}

impl DiagnosticsSeries {
    /// Evaluates d_X, γ, L (with the given β, if any) and the recorded speed
    /// at every t ≥ 0 stamp.
    pub fn compute(traj: &Trajectory, config: &ModelConfig, beta: Option<f64>) -> Result<Self> {
        if let Some(b) = beta {
            if !(b > 0.0) {
                return Err(Error::validation("beta", format!("β must be positive, got {b}")));
            }
        }
        let cum = SpeedIntegral::new(traj);
        let records = traj
            .forward()
            .into_par_iter()
            .map(|k| {
                let t = traj.times[k];
                let d_x = diameter(&traj.states[k], traj.dim);
                let gamma = gamma_with(t, &cum, config)?;
                let lyapunov = match beta {
                    Some(b) => d_x + b * memory_addend(t, &cum, config)?,
                    None => f64::NAN,
                };
                Ok(DiagnosticsRecord {
                    t,
                    d_x,
                    gamma,
                    lyapunov,
                    speed_max: traj.speed_max[k],
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { records })
    }

    /// Series holding only (t, d_X), e.g. for fitting synthetic data.
    pub fn from_diameters(times: &[f64], d_x: &[f64]) -> Self {
        Self {
            records: times
                .iter()
                .zip(d_x)
                .map(|(&t, &d)| DiagnosticsRecord {
                    t,
                    d_x: d,
                    gamma: 0.0,
                    lyapunov: f64::NAN,
                    speed_max: 0.0,
                })
                .collect(),
        }
    }

    pub fn t_end(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.t)
    }

    /// CSV with columns `t, d_X, gamma, lyapunov, speed_max`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        out.write_all(b"t,d_X,gamma,lyapunov,speed_max\n")?;
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{}",
                fmt_f64(r.t),
                fmt_f64(r.d_x),
                fmt_f64(r.gamma),
                fmt_f64(r.lyapunov),
                fmt_f64(r.speed_max)
            )?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    /// Negated slope of the least-squares line through log d_X; +∞ when d_X
    /// reached numerical zero inside the window.
    #[serde(serialize_with = "finite_or_null")]
    pub rate: f64,
    #[serde(serialize_with = "finite_or_null")]
    pub intercept: f64,
    /// Root-mean-square residual of the log-linear fit.
    #[serde(serialize_with = "finite_or_null")]
    pub residual: f64,
    pub hit_zero: bool,
}

/// Least-squares fit of log d_X(t) = intercept − rate·t over `[t_a, t_b]`.
pub fn fit_decay_rate(series: &DiagnosticsSeries, window: (f64, f64)) -> Result<DecayFit> {
    let (ta, tb) = window;
    if !(tb > ta) {
        return Err(Error::validation(
            "window",
            format!("window end {tb} must exceed its start {ta}"),
        ));
    }
    let points: Vec<(f64, f64)> = series
        .records
        .iter()
        .filter(|r| r.t >= ta && r.t <= tb)
        .map(|r| (r.t, r.d_x))
        .collect();
    if points.len() < 2 {
        return Err(Error::validation(
            "window",
            format!("fewer than two records inside [{ta}, {tb}]"),
        ));
    }
    if points.iter().any(|&(_, d)| !(d > f64::MIN_POSITIVE)) {
        return Ok(DecayFit {
            rate: f64::INFINITY,
            intercept: f64::NAN,
            residual: f64::NAN,
            hit_zero: true,
        });
    }
    let n = points.len() as f64;
    let mean_t = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let (mut stt, mut sty) = (0.0, 0.0);
    for &(t, d) in &points {
        stt += (t - mean_t) * (t - mean_t);
        sty += (t - mean_t) * (d.ln() - mean_y);
    }
    let slope = sty / stt;
    let intercept = mean_y - slope * mean_t;
    let residual = (points
        .iter()
        .map(|&(t, d)| {
            let e = d.ln() - (intercept + slope * t);
            e * e
        })
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(DecayFit {
        rate: -slope,
        intercept,
        residual,
        hit_zero: false,
    })
}

/// Worst normalized excesses of the three pointwise inequalities along a
/// series. A check passes when its excess is ≤ 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InequalityReport {
    /// max_k of [e^{K t_{k+1}} L_{k+1} / (e^{K t_k} L_k) − 1] − ε.
    pub lyapunov_excess: f64,
    /// max_k of [forward difference − Dini bound − ε·scale] / scale.
    pub dini_excess: f64,
    /// max_k of [speed − bound − ε·bound] / bound.
    pub speed_excess: f64,
}

impl InequalityReport {
    pub fn passed(&self) -> bool {
        self.lyapunov_excess <= 0.0 && self.dini_excess <= 0.0 && self.speed_excess <= 0.0
    }
}

// Absolute floor on the scale of the relative tolerances.
const SCALE_FLOOR: f64 = 1e-14;

/// Checks, at relative tolerance `eps` per step:
/// - e^{Kt} L(t) non-increasing,
/// - (d_X(t_{k+1}) − d_X(t_k))/Δt ≤ (2/ψ(2R)) γ(t_k) − ψ(2R) d_X(t_k),
/// - speed_max(t) ≤ (γ(t) + d_X(t)) / ψ(2R).
pub fn check_inequalities(
    series: &DiagnosticsSeries,
    cert: &ConsensusCertificate,
    eps: f64,
) -> Result<InequalityReport> {
    let rate = cert.rate.ok_or_else(|| {
        Error::validation("certificate", "inequality checks need a certified rate K")
    })?;
    let psi = cert.psi_2r;
    let mut report = InequalityReport {
        lyapunov_excess: f64::NEG_INFINITY,
        dini_excess: f64::NEG_INFINITY,
        speed_excess: f64::NEG_INFINITY,
    };
    for w in series.records.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if !(a.lyapunov.is_finite() && b.lyapunov.is_finite()) {
            return Err(Error::validation("series", "Lyapunov column was not computed"));
        }
        let dt = b.t - a.t;
        let weighted_a = a.lyapunov;
        let weighted_b = b.lyapunov * (rate * dt).exp();
        let lyap = if weighted_a > SCALE_FLOOR {
            weighted_b / weighted_a - 1.0 - eps
        } else {
            weighted_b - SCALE_FLOOR
        };
        report.lyapunov_excess = report.lyapunov_excess.max(lyap);

        let fd = (b.d_x - a.d_x) / dt;
        let scale = (2.0 / psi) * a.gamma + psi * a.d_x + SCALE_FLOOR;
        let bound = (2.0 / psi) * a.gamma - psi * a.d_x;
        report.dini_excess = report.dini_excess.max((fd - bound - eps * scale) / scale);
    }
    for r in &series.records {
        let bound = (r.gamma + r.d_x) / psi + SCALE_FLOOR;
        report.speed_excess = report
            .speed_excess
            .max((r.speed_max - bound * (1.0 + eps)) / bound);
    }
    Ok(report)
}
