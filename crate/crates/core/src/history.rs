//! Sliding-window storage of past agent states, used for the delayed lookups
//! x_j(s) with s in [t − τ(t), t].

use std::collections::VecDeque;

use crate::error::{Checker, Error, Result};

/// Sampled trajectory over `[t_now − τ(0) − margin, t_now]`.
#[derive(Clone, Debug)]
pub struct HistoryBuffer {
    n_agents: usize,
    dim: usize,
    tau_zero: f64,
    step: f64,
    times: VecDeque<f64>,
    states: VecDeque<Vec<f64>>,
    speed_max: VecDeque<f64>,
}

impl HistoryBuffer {
    /// Empty buffer for `n_agents` points in ℝ^`dim`. Stamps older than
    /// `t − tau_zero − 2·step` are discarded on append.
    pub fn new(n_agents: usize, dim: usize, tau_zero: f64, step: f64) -> Self {
        Self {
            n_agents,
            dim,
            tau_zero,
            step,
            times: VecDeque::new(),
            states: VecDeque::new(),
            speed_max: VecDeque::new(),
        }
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.times.iter().copied()
    }

    pub fn last_time(&self) -> Option<f64> {
        self.times.back().copied()
    }

    pub fn last_state(&self) -> Option<&[f64]> {
        self.states.back().map(|s| s.as_slice())
    }

    pub fn speed_max_at(&self, index: usize) -> Option<f64> {
        self.speed_max.get(index).copied()
    }

    /// `[first, last]` stamp interval, if any stamp is stored.
    pub fn covered(&self) -> Option<(f64, f64)> {
        Some((*self.times.front()?, *self.times.back()?))
    }

    pub fn append(&mut self, t: f64, state: &[f64], speed_max: f64) -> Result<()> {
        if let Some(last) = self.last_time() {
            if !(t > last) {
                return Err(Error::Ordering { t, last });
            }
        }
        if state.len() != self.n_agents * self.dim {
            return Err(Error::validation(
                "state",
                format!(
                    "expected {} entries ({} agents × {} dims), got {}",
                    self.n_agents * self.dim,
                    self.n_agents,
                    self.dim,
                    state.len()
                ),
            ));
        }
        if let Some(k) = state.iter().position(|x| !x.is_finite()) {
            return Err(Error::Numeric {
                t,
                detail: format!("non-finite state entry at index {k}"),
            });
        }
        if !(speed_max >= 0.0) {
            return Err(Error::Numeric {
                t,
                detail: format!("speed_max = {speed_max} is not a non-negative number"),
            });
        }
        self.times.push_back(t);
        self.states.push_back(state.to_vec());
        self.speed_max.push_back(speed_max);
        self.prune(t);
        Ok(())
    }

    // Keeps the newest stamp at or before the cutoff so coverage never shrinks
    // past it.
    fn prune(&mut self, t: f64) {
        let cutoff = t - self.tau_zero - 2.0 * self.step;
        while self.times.len() >= 2 && self.times[1] <= cutoff {
            self.times.pop_front();
            self.states.pop_front();
            self.speed_max.pop_front();
        }
    }

    /// Piecewise-linear interpolation at `s`, written into `out`.
    pub fn sample_into(&self, s: f64, out: &mut [f64]) -> Result<()> {
        let (lo, hi) = self.covered().ok_or(Error::OutOfRange {
            s,
            lo: f64::NAN,
            hi: f64::NAN,
        })?;
        if !(s >= lo && s <= hi) {
            return Err(Error::OutOfRange { s, lo, hi });
        }
        // first index with time > s
        let upper = self.times.partition_point(|&t| t <= s);
        if upper == self.times.len() {
            out.copy_from_slice(&self.states[upper - 1]);
            return Ok(());
        }
        let k = upper - 1;
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        if s == t0 {
            out.copy_from_slice(&self.states[k]);
            return Ok(());
        }
        let theta = (s - t0) / (t1 - t0);
        let (a, b) = (&self.states[k], &self.states[k + 1]);
        for ((o, x0), x1) in out.iter_mut().zip(a).zip(b) {
            *o = x0 + theta * (x1 - x0);
        }
        Ok(())
    }

    pub fn sample(&self, s: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n_agents * self.dim];
        self.sample_into(s, &mut out)?;
        Ok(out)
    }
}

/// Initial data x_{i,0}(s) on `[−τ(0), 0]`.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialHistory {
    /// x_{i,0}(s) ≡ positions[i]; `positions` is N×d row-major.
    ConstantPerAgent { dim: usize, positions: Vec<f64> },
    /// Piecewise-linear paths through `states[k]` (N×d) at `times[k]`.
    SampledPath {
        dim: usize,
        times: Vec<f64>,
        states: Vec<Vec<f64>>,
    },
}

impl InitialHistory {
    pub fn constant(dim: usize, positions: Vec<f64>) -> Self {
        InitialHistory::ConstantPerAgent { dim, positions }
    }

    /// 1-D convenience constructor.
    pub fn constant_1d(positions: &[f64]) -> Self {
        Self::constant(1, positions.to_vec())
    }

    pub fn dim(&self) -> usize {
        match self {
            InitialHistory::ConstantPerAgent { dim, .. } | InitialHistory::SampledPath { dim, .. } => {
                *dim
            }
        }
    }

    pub fn n_agents(&self) -> usize {
        let dim = self.dim().max(1);
        match self {
            InitialHistory::ConstantPerAgent { positions, .. } => positions.len() / dim,
            InitialHistory::SampledPath { states, .. } => {
                states.first().map_or(0, |s| s.len() / dim)
            }
        }
    }

    /// Checks shape, finiteness and coverage of `[−tau_zero, 0]`.
    pub fn validate(&self, tau_zero: f64) -> Result<()> {
        let mut c = Checker::default();
        let dim = self.dim();
        c.check(dim >= 1, "initial.dim", || "dimension must be at least 1".into());
        if dim == 0 {
            return c.finish();
        }
        match self {
            InitialHistory::ConstantPerAgent { positions, .. } => {
                c.check(!positions.is_empty(), "initial.positions", || {
                    "no agents given".into()
                });
                c.check(positions.len() % dim == 0, "initial.positions", || {
                    format!("{} coordinates do not split into {dim}-vectors", positions.len())
                });
                c.check(positions.iter().all(|x| x.is_finite()), "initial.positions", || {
                    "positions must be finite".into()
                });
            }
            InitialHistory::SampledPath { times, states, .. } => {
                c.check(times.len() >= 2, "initial.times", || {
                    "a sampled path needs at least two stamps".into()
                });
                c.check(times.len() == states.len(), "initial.states", || {
                    format!("{} stamps but {} states", times.len(), states.len())
                });
                c.check(times.windows(2).all(|w| w[0] < w[1]), "initial.times", || {
                    "stamps must be strictly increasing".into()
                });
                if let (Some(&first), Some(&last)) = (times.first(), times.last()) {
                    c.check(first <= -tau_zero, "initial.times", || {
                        format!("path starts at {first}, after −τ(0) = {}", -tau_zero)
                    });
                    c.check(last == 0.0, "initial.times", || {
                        format!("path must end at s = 0, ends at {last}")
                    });
                }
                let width = states.first().map_or(0, |s| s.len());
                c.check(width > 0 && width % dim == 0, "initial.states", || {
                    format!("state width {width} does not split into {dim}-vectors")
                });
                c.check(states.iter().all(|s| s.len() == width), "initial.states", || {
                    "every stamp must carry the same number of agents".into()
                });
                c.check(
                    states.iter().flatten().all(|x| x.is_finite()),
                    "initial.states",
                    || "states must be finite".into(),
                );
            }
        }
        c.finish()
    }

    /// Position of every agent at `s ≤ 0` (N×d). Sampled paths are held
    /// constant before their first stamp.
    pub fn position_at(&self, s: f64) -> Vec<f64> {
        match self {
            InitialHistory::ConstantPerAgent { positions, .. } => positions.clone(),
            InitialHistory::SampledPath { times, states, .. } => {
                let upper = times.partition_point(|&t| t <= s);
                if upper == 0 {
                    return states[0].clone();
                }
                if upper == times.len() {
                    return states[upper - 1].clone();
                }
                let k = upper - 1;
                let theta = (s - times[k]) / (times[k + 1] - times[k]);
                states[k]
                    .iter()
                    .zip(&states[k + 1])
                    .map(|(a, b)| a + theta * (b - a))
                    .collect()
            }
        }
    }

    /// max_k |dx_k/ds| of the piecewise-linear path at `s` (right derivative,
    /// left derivative at the final stamp).
    pub fn speed_max_at(&self, s: f64) -> f64 {
        match self {
            InitialHistory::ConstantPerAgent { .. } => 0.0,
            InitialHistory::SampledPath { dim, times, states } => {
                if s < times[0] {
                    return 0.0;
                }
                let upper = times.partition_point(|&t| t <= s).min(times.len() - 1);
                let k = upper - 1;
                let dt = times[k + 1] - times[k];
                states[k]
                    .chunks(*dim)
                    .zip(states[k + 1].chunks(*dim))
                    .map(|(a, b)| norm_diff(a, b) / dt)
                    .fold(0.0, f64::max)
            }
        }
    }

    /// Every (s, state) sample that determines the path: one point for a
    /// constant history, all stamps for a sampled path.
    pub fn nodes(&self) -> Vec<(f64, Vec<f64>)> {
        match self {
            InitialHistory::ConstantPerAgent { positions, .. } => vec![(0.0, positions.clone())],
            InitialHistory::SampledPath { times, states, .. } => times
                .iter()
                .copied()
                .zip(states.iter().cloned())
                .collect(),
        }
    }

    /// Seed times k·step for k = −K..=0 with −K·step ≤ −tau_zero.
    pub fn seed_times(tau_zero: f64, step: f64) -> Vec<f64> {
        let mut count = (tau_zero / step - 1e-9).ceil().max(0.0) as i64;
        // τ(0)/step may be an integer that rounds the last stamp inside
        if -(count as f64) * step > -tau_zero {
            count += 1;
        }
        (-count..=0).map(|k| k as f64 * step).collect()
    }

    /// History buffer holding this path sampled at spacing `step`.
    pub fn seed_buffer(&self, tau_zero: f64, step: f64) -> Result<HistoryBuffer> {
        self.validate(tau_zero)?;
        let mut buffer = HistoryBuffer::new(self.n_agents(), self.dim(), tau_zero, step);
        for s in Self::seed_times(tau_zero, step) {
            buffer.append(s, &self.position_at(s), self.speed_max_at(s))?;
        }
        Ok(buffer)
    }
}

pub(crate) fn norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_times_reach_the_window_start() {
        let tau = 0.0959397452886195;
        let times = InitialHistory::seed_times(tau, tau / 20.0);
        assert!(times[0] <= -tau);
        assert_eq!(*times.last().unwrap(), 0.0);
        assert!(InitialHistory::seed_times(0.25, 0.0125).len() == 21);
    }
    use proptest::prelude::*;

    fn two_stamp() -> HistoryBuffer {
        let mut b = HistoryBuffer::new(1, 1, 10.0, 0.1);
        b.append(0.0, &[0.0], 0.0).unwrap();
        b.append(1.0, &[2.0], 0.0).unwrap();
        b
    }

    #[test]
    fn exact_at_stamps() {
        let b = two_stamp();
        assert_eq!(b.sample(0.0).unwrap(), vec![0.0]);
        assert_eq!(b.sample(1.0).unwrap(), vec![2.0]);
    }

    #[test]
    fn linear_midpoint() {
        assert_eq!(two_stamp().sample(0.5).unwrap(), vec![1.0]);
    }

    #[test]
    fn never_extrapolates() {
        let b = two_stamp();
        assert!(matches!(b.sample(-1e-9), Err(Error::OutOfRange { .. })));
        assert!(matches!(b.sample(1.0 + 1e-9), Err(Error::OutOfRange { .. })));
        assert!(HistoryBuffer::new(1, 1, 1.0, 0.1).sample(0.0).is_err());
    }

    #[test]
    fn guard_before_window() {
        let h = InitialHistory::constant_1d(&[0.0, 1.0]);
        let b = h.seed_buffer(0.5, 0.1).unwrap();
        let (lo, _) = b.covered().unwrap();
        assert!(lo <= -0.5);
        assert!(b.sample(lo - 1e-6).is_err());
    }

    #[test]
    fn append_grows_and_rejects_bad_order() {
        let mut b = two_stamp();
        b.append(1.1, &[2.5], 0.3).unwrap();
        assert_eq!(b.len(), 3);
        assert!(matches!(b.append(1.1, &[2.5], 0.0), Err(Error::Ordering { .. })));
        assert!(matches!(b.append(0.5, &[2.5], 0.0), Err(Error::Ordering { .. })));
        assert!(b.append(1.2, &[1.0, 2.0], 0.0).is_err());
        assert!(b.append(1.2, &[f64::NAN], 0.0).is_err());
    }

    #[test]
    fn far_append_prunes_but_keeps_window() {
        let (tau0, dt) = (0.5, 0.05);
        let mut b = HistoryBuffer::new(2, 1, tau0, dt);
        for k in 0..=400 {
            let t = k as f64 * dt;
            b.append(t, &[t, -t], 0.0).unwrap();
        }
        let t_now = 400.0 * dt;
        assert!(b.len() < 20);
        let (lo, hi) = b.covered().unwrap();
        assert!(lo <= t_now - tau0 - 2.0 * dt + 1e-12);
        assert_eq!(hi, t_now);
        // big jump
        b.append(t_now + 100.0, &[0.0, 0.0], 0.0).unwrap();
        let (lo, hi) = b.covered().unwrap();
        assert!(lo <= hi - tau0);
        assert!(b.sample(hi - tau0).is_ok());
    }

    #[test]
    fn quadratic_path_error_is_second_order() {
        let err_at = |dt: f64| {
            let mut b = HistoryBuffer::new(1, 1, 1.0, dt);
            let n = (1.0 / dt).round() as usize;
            for k in 0..=n {
                let t = k as f64 * dt;
                b.append(t, &[t * t], 0.0).unwrap();
            }
            (0..997)
                .map(|k| {
                    let s = k as f64 / 997.0;
                    (b.sample(s).unwrap()[0] - s * s).abs()
                })
                .fold(0.0, f64::max)
        };
        let (e1, e2, e3) = (err_at(0.1), err_at(0.05), err_at(0.025));
        let p1 = (e1 / e2).log2();
        let p2 = (e2 / e3).log2();
        assert!(p1 > 1.9 && p2 > 1.9, "orders {p1} {p2}");
    }

    #[test]
    fn sampled_path_speed_and_position() {
        let h = InitialHistory::SampledPath {
            dim: 1,
            times: vec![-1.0, 0.0],
            states: vec![vec![0.0, 2.0], vec![1.0, 2.0]],
        };
        h.validate(1.0).unwrap();
        assert_eq!(h.position_at(-0.5), vec![0.5, 2.0]);
        assert_eq!(h.speed_max_at(-0.5), 1.0);
        assert_eq!(h.speed_max_at(0.0), 1.0);
        assert!(h.validate(1.5).is_err());
    }

    #[test]
    fn seed_covers_initial_window() {
        for (tau0, dt) in [(0.25, 0.0125), (0.3, 0.007), (1.0, 0.05)] {
            let ts = InitialHistory::seed_times(tau0, dt);
            assert!(ts[0] <= -tau0);
            assert!(ts[0] > -tau0 - dt);
            assert_eq!(*ts.last().unwrap(), 0.0);
        }
    }

    proptest! {
        #[test]
        fn window_always_covered(steps in proptest::collection::vec(0.001f64..0.05, 1..200)) {
            let tau0 = 0.3;
            let dt = 0.05;
            let mut b = InitialHistory::constant_1d(&[0.0]).seed_buffer(tau0, dt).unwrap();
            let mut t = 0.0;
            for h in steps {
                t += h;
                b.append(t, &[t], 0.0).unwrap();
                prop_assert!(b.sample(t - tau0).is_ok());
                prop_assert!(b.sample(t).is_ok());
            }
        }
    }
}
