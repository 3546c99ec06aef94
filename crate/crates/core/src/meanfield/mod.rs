//! Mean-field experiments.
//!
//! The delayed transport equation is never discretized on a grid. Its
//! measure solution is the push-forward of the initial measure along the
//! particle characteristics, so an N-particle simulation started from an
//! N-atom approximation of the initial measure *is* the solution for that
//! initial datum. Convergence in N is then measured with the 1-Wasserstein
//! distance between empirical measures.

mod assignment;
mod experiment;
mod sampling;

pub use assignment::min_cost_assignment;
pub use experiment::{convergence_experiment, ConvergenceReport, ConvergenceRow, DECAY_BOUND_SLACK};
pub use sampling::{sample_particles, InitialMeasureSpec, MeasureFamily, SamplingMode};

use crate::diagnostics::diameter;
use crate::error::{Error, Result};
use crate::history::norm_diff;

/// Largest atom count accepted by the assignment-based W1.
pub const ASSIGNMENT_CAP: usize = 512;

/// Equal-weight point measure (1/M) Σ δ_{x_k} in ℝ^d.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalMeasure {
    dim: usize,
    points: Vec<f64>,
}

impl EmpiricalMeasure {
    /// `points` is M×d row-major.
    pub fn new(dim: usize, points: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::validation("dim", "dimension must be at least 1"));
        }
        if points.is_empty() || !points.len().is_multiple_of(dim) {
            return Err(Error::validation(
                "points",
                format!("{} coordinates do not form a non-empty set of {dim}-vectors", points.len()),
            ));
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(Error::validation("points", "atoms must be finite"));
        }
        Ok(Self { dim, points })
    }

    pub fn from_1d(points: &[f64]) -> Result<Self> {
        Self::new(1, points.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of atoms M.
    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Same measure with every atom repeated `copies` times.
    pub fn replicate(&self, copies: usize) -> Self {
        let mut points = Vec::with_capacity(self.points.len() * copies);
        for p in self.points.chunks(self.dim) {
            for _ in 0..copies {
                points.extend_from_slice(p);
            }
        }
        Self {
            dim: self.dim,
            points,
        }
    }

    pub fn translate(&self, shift: &[f64]) -> Self {
        assert_eq!(shift.len(), self.dim);
        let points = self
            .points
            .chunks(self.dim)
            .flat_map(|p| p.iter().zip(shift).map(|(a, b)| a + b))
            .collect();
        Self {
            dim: self.dim,
            points,
        }
    }
}

fn check_pair(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> Result<()> {
    if mu.dim != nu.dim {
        return Err(Error::Unsupported(format!(
            "measures live in different dimensions ({} vs {})",
            mu.dim, nu.dim
        )));
    }
    if mu.len() != nu.len() {
        return Err(Error::Unsupported(format!(
            "atom counts differ ({} vs {}); replicate atoms to a common count first",
            mu.len(),
            nu.len()
        )));
    }
    Ok(())
}

/// d_1 between 1-D equal-size empirical measures via the sorted coupling,
/// which is optimal on the line.
pub fn wasserstein1_1d(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> Result<f64> {
    check_pair(mu, nu)?;
    if mu.dim != 1 {
        return Err(Error::Unsupported(format!(
            "sorted coupling needs 1-D atoms, got d = {}; use the assignment solver",
            mu.dim
        )));
    }
    let mut a = mu.points.clone();
    let mut b = nu.points.clone();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let total: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum();
    Ok(total / a.len() as f64)
}

/// d_1 between equal-size empirical measures in any dimension: the optimal
/// coupling of two uniform M-atom measures is a permutation, found exactly
/// by minimum-cost perfect matching.
pub fn wasserstein1_assignment(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> Result<f64> {
    check_pair(mu, nu)?;
    let m = mu.len();
    if m > ASSIGNMENT_CAP {
        return Err(Error::Size {
            size: m,
            cap: ASSIGNMENT_CAP,
        });
    }
    let d = mu.dim;
    let mut cost = Vec::with_capacity(m * m);
    for p in mu.points.chunks(d) {
        for q in nu.points.chunks(d) {
            cost.push(norm_diff(p, q));
        }
    }
    let (total, _) = min_cost_assignment(&cost, m);
    Ok(total / m as f64)
}

/// d_1 choosing the route by dimension: the sorted coupling in 1-D, the
/// assignment solver otherwise. Unequal atom counts are brought to their
/// least common multiple by replication.
pub fn wasserstein1(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> Result<f64> {
    let common = lcm(mu.len(), nu.len());
    let (a, b) = if mu.len() == nu.len() {
        (mu.clone(), nu.clone())
    } else {
        (mu.replicate(common / mu.len()), nu.replicate(common / nu.len()))
    };
    if a.dim == 1 {
        wasserstein1_1d(&a, &b)
    } else {
        wasserstein1_assignment(&a, &b)
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// Diameter of the support: the largest pairwise atom distance.
pub fn support_diameter(mu: &EmpiricalMeasure) -> f64 {
    diameter(&mu.points, mu.dim)
}
