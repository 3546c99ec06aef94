use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Checker, Error, Result};
use crate::history::{norm, InitialHistory};

#[derive(Clone, Debug, PartialEq)]
pub enum MeasureFamily {
    /// Uniform on [a, b] (on the cube [a, b]^d for d > 1).
    UniformInterval { a: f64, b: f64 },
    /// Normal(mean, sd²·I) conditioned on |x − mean| ≤ radius.
    GaussianTruncated { mean: Vec<f64>, sd: f64, radius: f64 },
    /// Half of the mass uniform around c1, half around c2, each on a cube of
    /// half-width `spread`.
    TwoClusters { c1: Vec<f64>, c2: Vec<f64>, spread: f64 },
    /// The uniform measure on the given atoms.
    ExplicitPoints { points: Vec<Vec<f64>> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplingMode {
    /// Deterministic midpoint quantiles (1-D only).
    Quantile,
    /// Independent draws from a seeded generator.
    Iid,
}

/// Initial measure g_s on [−τ(0), 0] and how to approximate it by atoms.
#[derive(Clone, Debug, PartialEq)]
pub struct InitialMeasureSpec {
    pub family: MeasureFamily,
    pub dim: usize,
    /// `None` picks quantiles in 1-D and i.i.d. draws otherwise.
    pub mode: Option<SamplingMode>,
    /// When false, g_s is g_0 translated by s·drift.
    pub constant_in_s: bool,
    pub drift: Vec<f64>,
    pub seed: u64,
}

impl InitialMeasureSpec {
    pub fn new(family: MeasureFamily, dim: usize) -> Self {
        Self {
            family,
            dim,
            mode: None,
            constant_in_s: true,
            drift: vec![0.0; dim],
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_mode(mut self, mode: SamplingMode) -> Self {
        self.mode = Some(mode);
        self
    }

    pub fn with_drift(mut self, drift: Vec<f64>) -> Self {
        self.constant_in_s = false;
        self.drift = drift;
        self
    }

    pub fn sampling_mode(&self) -> SamplingMode {
        self.mode.unwrap_or(if self.dim == 1 {
            SamplingMode::Quantile
        } else {
            SamplingMode::Iid
        })
    }

    pub fn validate(&self) -> Result<()> {
        let mut c = Checker::default();
        let d = self.dim;
        c.check(d >= 1, "initial.dim", || "dimension must be at least 1".into());
        match &self.family {
            MeasureFamily::UniformInterval { a, b } => {
                c.check(a.is_finite() && b.is_finite() && a < b, "initial.a", || {
                    format!("need finite a < b, got [{a}, {b}]")
                });
            }
            MeasureFamily::GaussianTruncated { mean, sd, radius } => {
                c.check(mean.len() == d, "initial.mean", || {
                    format!("mean has {} entries, dimension is {d}", mean.len())
                });
                c.check(mean.iter().all(|m| m.is_finite()), "initial.mean", || {
                    "mean must be finite".into()
                });
                c.check(*sd > 0.0 && sd.is_finite(), "initial.sd", || {
                    format!("standard deviation must be positive, got {sd}")
                });
                c.check(*radius > 0.0 && radius.is_finite(), "initial.radius", || {
                    format!("truncation radius must be positive, got {radius}")
                });
            }
            MeasureFamily::TwoClusters { c1, c2, spread } => {
                c.check(c1.len() == d && c2.len() == d, "initial.c1", || {
                    format!("cluster centres must have {d} entries")
                });
                c.check(
                    c1.iter().chain(c2).all(|x| x.is_finite()),
                    "initial.c1",
                    || "cluster centres must be finite".into(),
                );
                c.check(*spread >= 0.0 && spread.is_finite(), "initial.spread", || {
                    format!("spread must be non-negative, got {spread}")
                });
            }
            MeasureFamily::ExplicitPoints { points } => {
                c.check(!points.is_empty(), "initial.points", || "no atoms given".into());
                c.check(points.iter().all(|p| p.len() == d), "initial.points", || {
                    format!("every atom must have {d} coordinates")
                });
                c.check(
                    points.iter().flatten().all(|x| x.is_finite()),
                    "initial.points",
                    || "atoms must be finite".into(),
                );
            }
        }
        c.check(self.drift.len() == d, "initial.drift", || {
            format!("drift has {} entries, dimension is {d}", self.drift.len())
        });
        if self.sampling_mode() == SamplingMode::Quantile && d != 1 {
            let explicit = matches!(self.family, MeasureFamily::ExplicitPoints { .. });
            c.check(explicit, "initial.mode", || {
                format!("quantile stratification is only defined in 1-D, got d = {d}")
            });
        }
        c.finish()
    }

    /// Radius of a ball around the origin holding the support of every g_s,
    /// s ∈ [−tau_zero, 0].
    pub fn support_radius(&self, tau_zero: f64) -> f64 {
        let d = (self.dim as f64).sqrt();
        let base = match &self.family {
            MeasureFamily::UniformInterval { a, b } => a.abs().max(b.abs()) * d,
            MeasureFamily::GaussianTruncated { mean, radius, .. } => norm(mean) + radius,
            MeasureFamily::TwoClusters { c1, c2, spread } => norm(c1).max(norm(c2)) + spread * d,
            MeasureFamily::ExplicitPoints { points } => {
                points.iter().map(|p| norm(p)).fold(0.0, f64::max)
            }
        };
        if self.constant_in_s {
            base
        } else {
            base + norm(&self.drift) * tau_zero
        }
    }
}

// Midpoint quantiles (k + 1/2)/n, k = 0..n.
fn midpoints(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| (k as f64 + 0.5) / n as f64)
}

fn atoms_at_zero(spec: &InitialMeasureSpec, n: usize) -> Result<Vec<f64>> {
    let d = spec.dim;
    let mode = spec.sampling_mode();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let cube = |centre: &[f64], half: f64, rng: &mut ChaCha8Rng| -> Vec<f64> {
        centre
            .iter()
            .map(|c| c + half * (2.0 * rng.random::<f64>() - 1.0))
            .collect()
    };
    let atoms = match (&spec.family, mode) {
        (MeasureFamily::ExplicitPoints { points }, _) => {
            if !n.is_multiple_of(points.len()) {
                return Err(Error::validation(
                    "n",
                    format!(
                        "{n} particles cannot represent {} equal-weight atoms exactly",
                        points.len()
                    ),
                ));
            }
            (0..n).flat_map(|i| points[i % points.len()].clone()).collect()
        }
        (MeasureFamily::UniformInterval { a, b }, SamplingMode::Quantile) => {
            midpoints(n).map(|p| a + (b - a) * p).collect()
        }
        (MeasureFamily::GaussianTruncated { mean, sd, radius }, SamplingMode::Quantile) => {
            let normal = Normal::new(0.0, 1.0).expect("standard normal");
            let lo = normal.cdf(-radius / sd);
            let hi = normal.cdf(radius / sd);
            midpoints(n)
                .map(|p| mean[0] + sd * normal.inverse_cdf(lo + p * (hi - lo)))
                .collect()
        }
        (MeasureFamily::TwoClusters { c1, c2, spread }, SamplingMode::Quantile) => {
            let first = n.div_ceil(2);
            let mut atoms: Vec<f64> = midpoints(first)
                .map(|p| c1[0] + spread * (2.0 * p - 1.0))
                .collect();
            atoms.extend(midpoints(n - first).map(|p| c2[0] + spread * (2.0 * p - 1.0)));
            atoms
        }
        (MeasureFamily::UniformInterval { a, b }, SamplingMode::Iid) => {
            let centre = vec![0.5 * (a + b); d];
            (0..n).flat_map(|_| cube(&centre, 0.5 * (b - a), &mut rng)).collect()
        }
        (MeasureFamily::GaussianTruncated { mean, sd, radius }, SamplingMode::Iid) => {
            let mut atoms = Vec::with_capacity(n * d);
            while atoms.len() < n * d {
                let z: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal) * sd).collect();
                if norm(&z) <= *radius {
                    atoms.extend(z.iter().zip(mean).map(|(zi, m)| m + zi));
                }
            }
            atoms
        }
        (MeasureFamily::TwoClusters { c1, c2, spread }, SamplingMode::Iid) => {
            let first = n.div_ceil(2);
            (0..n)
                .flat_map(|i| cube(if i < first { c1 } else { c2 }, *spread, &mut rng))
                .collect()
        }
    };
    Ok(atoms)
}

/// N-particle approximation of the initial measure: atoms x_i^0(s) on
/// [−tau_zero, 0]. Deterministic for a fixed spec (including its seed).
pub fn sample_particles(spec: &InitialMeasureSpec, n: usize, tau_zero: f64) -> Result<InitialHistory> {
    spec.validate()?;
    if n < 2 {
        return Err(Error::validation("n", format!("need at least 2 particles, got {n}")));
    }
    let atoms = atoms_at_zero(spec, n)?;
    if spec.constant_in_s {
        return Ok(InitialHistory::constant(spec.dim, atoms));
    }
    let start: Vec<f64> = atoms
        .chunks(spec.dim)
        .flat_map(|p| p.iter().zip(&spec.drift).map(|(x, v)| x - tau_zero * v))
        .collect();
    Ok(InitialHistory::SampledPath {
        dim: spec.dim,
        times: vec![-tau_zero, 0.0],
        states: vec![start, atoms],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_atoms(h: &InitialHistory) -> Vec<f64> {
        match h {
            InitialHistory::ConstantPerAgent { positions, .. } => positions.clone(),
            other => panic!("expected constant history, got {other:?}"),
        }
    }

    #[test]
    fn explicit_points_are_reproduced() {
        let spec = InitialMeasureSpec::new(
            MeasureFamily::ExplicitPoints {
                points: vec![vec![0.0], vec![1.0]],
            },
            1,
        );
        assert_eq!(constant_atoms(&sample_particles(&spec, 2, 0.1).unwrap()), vec![0.0, 1.0]);
        assert_eq!(constant_atoms(&sample_particles(&spec, 4, 0.1).unwrap()), vec![0.0, 1.0, 0.0, 1.0]);
        assert!(sample_particles(&spec, 3, 0.1).is_err());
    }

    #[test]
    fn uniform_quantiles() {
        let spec = InitialMeasureSpec::new(MeasureFamily::UniformInterval { a: -1.0, b: 1.0 }, 1);
        assert_eq!(
            constant_atoms(&sample_particles(&spec, 4, 0.1).unwrap()),
            vec![-0.75, -0.25, 0.25, 0.75]
        );
    }

    #[test]
    fn seeded_draws_are_reproducible() {
        let spec = InitialMeasureSpec::new(
            MeasureFamily::GaussianTruncated {
                mean: vec![0.5, -0.5],
                sd: 1.0,
                radius: 1.5,
            },
            2,
        )
        .with_seed(7);
        let a = sample_particles(&spec, 30, 0.2).unwrap();
        let b = sample_particles(&spec, 30, 0.2).unwrap();
        assert_eq!(a, b);
        let c = sample_particles(&spec.clone().with_seed(8), 30, 0.2).unwrap();
        assert_ne!(a, c);
        for p in constant_atoms(&a).chunks(2) {
            assert!(((p[0] - 0.5).powi(2) + (p[1] + 0.5).powi(2)).sqrt() <= 1.5);
        }
    }

    #[test]
    fn truncated_gaussian_quantiles_are_symmetric_and_bounded() {
        let spec = InitialMeasureSpec::new(
            MeasureFamily::GaussianTruncated {
                mean: vec![2.0],
                sd: 0.5,
                radius: 1.0,
            },
            1,
        );
        let atoms = constant_atoms(&sample_particles(&spec, 10, 0.1).unwrap());
        for k in 0..5 {
            assert!((atoms[k] - 2.0 + atoms[9 - k] - 2.0).abs() < 1e-12);
        }
        assert!(atoms.iter().all(|x| (x - 2.0).abs() < 1.0));
    }

    #[test]
    fn two_clusters_split_mass() {
        let spec = InitialMeasureSpec::new(
            MeasureFamily::TwoClusters {
                c1: vec![-1.0],
                c2: vec![1.0],
                spread: 0.1,
            },
            1,
        );
        let atoms = constant_atoms(&sample_particles(&spec, 5, 0.1).unwrap());
        assert_eq!(atoms.iter().filter(|&&x| x < 0.0).count(), 3);
        assert!(atoms.iter().all(|x| (x.abs() - 1.0).abs() <= 0.1));
    }

    #[test]
    fn quantile_mode_needs_one_dimension() {
        let spec = InitialMeasureSpec::new(MeasureFamily::UniformInterval { a: 0.0, b: 1.0 }, 2)
            .with_mode(SamplingMode::Quantile);
        assert!(sample_particles(&spec, 4, 0.1).is_err());
    }

    #[test]
    fn drifting_measure_builds_a_path() {
        let spec = InitialMeasureSpec::new(MeasureFamily::UniformInterval { a: -1.0, b: 1.0 }, 1)
            .with_drift(vec![0.5]);
        let h = sample_particles(&spec, 2, 0.4).unwrap();
        assert_eq!(h.position_at(0.0), vec![-0.5, 0.5]);
        let back = h.position_at(-0.4);
        assert!((back[0] + 0.7).abs() < 1e-15 && (back[1] - 0.3).abs() < 1e-15);
        assert!(spec.support_radius(0.4) >= 0.7);
    }
}
