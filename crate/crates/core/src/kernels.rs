//! Scalar ingredients of the model: the influence function ψ, the delay
//! profile τ(t) and the memory weight α(s), with the constants derived from
//! them (τ*, τ(0), Ā and h(t)).
//!
//! The concrete families below are a closed menu chosen for this crate. Every
//! family has a closed-form integral, so `h(t)` and `Ā` are exact.

use serde::Serialize;

use crate::error::{Checker, Error, Result};

/// Shape of the influence function ψ. All families satisfy ψ(0) = 1, ψ > 0
/// and are non-increasing on `[0, ∞)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KernelFamily {
    /// ψ ≡ 1.
    Constant,
    /// ψ(r) = (1 + r²)^(-exponent).
    PowerLaw { exponent: f64 },
    /// ψ(r) = exp(-rate·r).
    Exponential { rate: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InfluenceKernel {
    pub family: KernelFamily,
    /// Global Lipschitz constant of ψ on `[0, ∞)`, computed analytically.
    pub lipschitz_bound: f64,
}

impl InfluenceKernel {
    pub fn new(family: KernelFamily) -> Result<Self> {
        let lipschitz_bound = match family {
            KernelFamily::Constant => 0.0,
            KernelFamily::PowerLaw { exponent } => {
                if !(exponent > 0.0 && exponent.is_finite()) {
                    return Err(Error::validation(
                        "exponent",
                        format!("power-law exponent must be positive and finite, got {exponent}"),
                    ));
                }
                // |ψ'| peaks at r² = 1 / (2γ + 1).
                let r = (2.0 * exponent + 1.0).sqrt().recip();
                2.0 * exponent * r * (1.0 + r * r).powf(-(exponent + 1.0))
            }
            KernelFamily::Exponential { rate } => {
                if !(rate > 0.0 && rate.is_finite()) {
                    return Err(Error::validation(
                        "rate",
                        format!("exponential kernel rate must be positive and finite, got {rate}"),
                    ));
                }
                rate
            }
        };
        Ok(Self {
            family,
            lipschitz_bound,
        })
    }

    pub fn constant() -> Self {
        Self {
            family: KernelFamily::Constant,
            lipschitz_bound: 0.0,
        }
    }

    pub fn power_law(exponent: f64) -> Result<Self> {
        Self::new(KernelFamily::PowerLaw { exponent })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Self::new(KernelFamily::Exponential { rate })
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.family, KernelFamily::Constant)
    }

    /// ψ(r) without the domain check; `r` must be non-negative.
    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        match self.family {
            KernelFamily::Constant => 1.0,
            KernelFamily::PowerLaw { exponent } => {
                let base = 1.0 + r * r;
                if exponent == 1.0 {
                    base.recip()
                } else {
                    base.powf(-exponent)
                }
            }
            KernelFamily::Exponential { rate } => (-rate * r).exp(),
        }
    }

    /// Returns a copy with the family's shape parameter replaced, if it has one.
    pub fn with_parameter(&self, value: f64) -> Result<Self> {
        match self.family {
            KernelFamily::Constant => Err(Error::validation(
                "kernel",
                "the constant kernel has no shape parameter",
            )),
            KernelFamily::PowerLaw { .. } => Self::power_law(value),
            KernelFamily::Exponential { .. } => Self::exponential(value),
        }
    }
}

/// ψ(r) for `r ≥ 0`.
pub fn psi_eval(kernel: &InfluenceKernel, r: f64) -> Result<f64> {
    if !(r >= 0.0) || r.is_infinite() {
        return Err(Error::Domain { what: "r", value: r });
    }
    Ok(kernel.eval(r))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DelayFamily {
    /// τ(t) ≡ tau.
    Constant { tau: f64 },
    /// τ(t) = max(tau_inf, tau0 − slope·t).
    LinearDecreasing { tau0: f64, tau_inf: f64, slope: f64 },
}

/// The delay τ(t): bounded below by τ* > 0 and non-increasing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DelayProfile {
    pub family: DelayFamily,
}

impl DelayProfile {
    pub fn new(family: DelayFamily) -> Result<Self> {
        let mut c = Checker::default();
        match family {
            DelayFamily::Constant { tau } => {
                c.check(tau > 0.0 && tau.is_finite(), "tau", || {
                    format!("constant delay must be positive and finite, got {tau}")
                });
            }
            DelayFamily::LinearDecreasing {
                tau0,
                tau_inf,
                slope,
            } => {
                c.check(tau_inf > 0.0 && tau_inf.is_finite(), "tau_inf", || {
                    format!("asymptotic delay must be positive, got {tau_inf}")
                });
                c.check(tau0 >= tau_inf && tau0.is_finite(), "tau0", || {
                    format!("initial delay {tau0} must be finite and at least tau_inf = {tau_inf}")
                });
                c.check(slope >= 0.0 && slope.is_finite(), "slope", || {
                    format!("delay slope must be non-negative (τ non-increasing), got {slope}")
                });
            }
        }
        c.finish()?;
        Ok(Self { family })
    }

    pub fn constant(tau: f64) -> Result<Self> {
        Self::new(DelayFamily::Constant { tau })
    }

    pub fn linear_decreasing(tau0: f64, tau_inf: f64, slope: f64) -> Result<Self> {
        Self::new(DelayFamily::LinearDecreasing {
            tau0,
            tau_inf,
            slope,
        })
    }

    #[inline]
    pub fn tau(&self, t: f64) -> f64 {
        match self.family {
            DelayFamily::Constant { tau } => tau,
            DelayFamily::LinearDecreasing {
                tau0,
                tau_inf,
                slope,
            } => (tau0 - slope * t.max(0.0)).max(tau_inf),
        }
    }

    /// Lower bound τ* of the delay.
    pub fn tau_star(&self) -> f64 {
        match self.family {
            DelayFamily::Constant { tau } => tau,
            DelayFamily::LinearDecreasing { tau_inf, .. } => tau_inf,
        }
    }

    /// τ(0), the longest delay ever used.
    pub fn tau_zero(&self) -> f64 {
        self.tau(0.0)
    }

    /// Same profile shape with τ(0) moved to `value`. A linear profile keeps
    /// its slope and its floor (clamped to the new τ(0)).
    pub fn with_tau_zero(&self, value: f64) -> Result<Self> {
        match self.family {
            DelayFamily::Constant { .. } => Self::constant(value),
            DelayFamily::LinearDecreasing { tau_inf, slope, .. } => {
                Self::linear_decreasing(value, tau_inf.min(value), slope)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum WeightFamily {
    /// α ≡ value.
    Constant { value: f64 },
    /// α(s) = exp(-rate·s).
    Exponential { rate: f64 },
    /// α(s) = Σ_k coefficients[k]·s^k.
    Polynomial { coefficients: Vec<f64> },
}

/// The memory weight α on `[0, τ(0)]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MemoryWeight {
    pub family: WeightFamily,
    /// Right end of the domain, τ(0).
    pub domain_end: f64,
}

const NONNEGATIVITY_SAMPLES: usize = 1000;

impl MemoryWeight {
    /// Builds the weight on `[0, τ(0)]` of `delay`, checking α ≥ 0 on a grid
    /// and Ā > 0.
    pub fn new(family: WeightFamily, delay: &DelayProfile) -> Result<Self> {
        let mut c = Checker::default();
        match &family {
            WeightFamily::Constant { value } => c.check(*value > 0.0 && value.is_finite(), "value", || {
                format!("constant weight must be positive and finite, got {value}")
            }),
            WeightFamily::Exponential { rate } => c.check(rate.is_finite(), "rate", || {
                format!("exponential weight rate must be finite, got {rate}")
            }),
            WeightFamily::Polynomial { coefficients } => {
                c.check(!coefficients.is_empty(), "coefficients", || {
                    "polynomial weight needs at least one coefficient".to_string()
                });
                c.check(coefficients.iter().all(|x| x.is_finite()), "coefficients", || {
                    "polynomial coefficients must be finite".to_string()
                });
            }
        }
        c.finish()?;
        let weight = Self {
            family,
            domain_end: delay.tau_zero(),
        };
        let end = weight.domain_end;
        let negative = (0..=NONNEGATIVITY_SAMPLES)
            .map(|k| end * k as f64 / NONNEGATIVITY_SAMPLES as f64)
            .find(|&s| weight.eval(s) < 0.0);
        if let Some(s) = negative {
            return Err(Error::validation(
                "weight",
                format!("memory weight is negative at s = {s} (α must be ≥ 0 on [0, τ(0)])"),
            ));
        }
        a_bar(&weight, delay)?;
        Ok(weight)
    }

    pub fn constant(value: f64, delay: &DelayProfile) -> Result<Self> {
        Self::new(WeightFamily::Constant { value }, delay)
    }

    pub fn exponential(rate: f64, delay: &DelayProfile) -> Result<Self> {
        Self::new(WeightFamily::Exponential { rate }, delay)
    }

    pub fn polynomial(coefficients: Vec<f64>, delay: &DelayProfile) -> Result<Self> {
        Self::new(WeightFamily::Polynomial { coefficients }, delay)
    }

    /// Re-targets the weight to a different delay (its domain follows τ(0)).
    pub fn rebind(&self, delay: &DelayProfile) -> Result<Self> {
        Self::new(self.family.clone(), delay)
    }

    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        match &self.family {
            WeightFamily::Constant { value } => *value,
            WeightFamily::Exponential { rate } => (-rate * s).exp(),
            WeightFamily::Polynomial { coefficients } => {
                coefficients.iter().rev().fold(0.0, |acc, c| acc * s + c)
            }
        }
    }

    /// ∫₀^upper α(s) ds in closed form.
    pub fn integral(&self, upper: f64) -> f64 {
        match &self.family {
            WeightFamily::Constant { value } => value * upper,
            WeightFamily::Exponential { rate } => {
                if *rate == 0.0 {
                    upper
                } else {
                    -(-rate * upper).exp_m1() / rate
                }
            }
            WeightFamily::Polynomial { coefficients } => coefficients
                .iter()
                .enumerate()
                .rev()
                .fold(0.0, |acc, (k, c)| acc * upper + c / (k + 1) as f64)
                * upper,
        }
    }
}

/// h(t) = ∫₀^{τ(t)} α(s) ds.
pub fn h_of_t(weight: &MemoryWeight, delay: &DelayProfile, t: f64) -> Result<f64> {
    if !(t >= 0.0) || t.is_infinite() {
        return Err(Error::Domain { what: "t", value: t });
    }
    Ok(weight.integral(delay.tau(t)))
}

/// Ā = ∫₀^{τ*} α(s) ds; must be strictly positive.
pub fn a_bar(weight: &MemoryWeight, delay: &DelayProfile) -> Result<f64> {
    let value = weight.integral(delay.tau_star());
    if !(value > 0.0) || !value.is_finite() {
        return Err(Error::validation(
            "weight",
            format!("∫₀^τ* α(s) ds = {value} must be strictly positive"),
        ));
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_adaptive;

    fn kernels() -> Vec<InfluenceKernel> {
        vec![
            InfluenceKernel::constant(),
            InfluenceKernel::power_law(1.0).unwrap(),
            InfluenceKernel::power_law(0.35).unwrap(),
            InfluenceKernel::exponential(2.5).unwrap(),
        ]
    }

    #[test]
    fn psi_is_normalized_at_zero() {
        for k in kernels() {
            assert_eq!(psi_eval(&k, 0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn psi_closed_forms() {
        assert_eq!(psi_eval(&InfluenceKernel::constant(), 5.0).unwrap(), 1.0);
        let k = InfluenceKernel::power_law(1.0).unwrap();
        assert!((psi_eval(&k, 1.0).unwrap() - 0.5).abs() < 1e-15);
        // general-exponent branch agrees with the γ = 1 shortcut
        let g = InfluenceKernel::power_law(1.0 + 1e-15).unwrap();
        assert!((g.eval(1.0) - 0.5).abs() < 1e-14);
        let e = InfluenceKernel::exponential(0.5).unwrap();
        assert!((e.eval(2.0) - (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn negative_radius_is_a_domain_error() {
        let err = psi_eval(&InfluenceKernel::constant(), -0.1).unwrap_err();
        assert!(matches!(err, Error::Domain { what: "r", .. }));
        assert!(psi_eval(&InfluenceKernel::constant(), f64::NAN).is_err());
    }

    #[test]
    fn invalid_kernel_parameters() {
        assert!(InfluenceKernel::power_law(0.0).is_err());
        assert!(InfluenceKernel::exponential(-1.0).is_err());
    }

    #[test]
    fn power_law_lipschitz_bound() {
        let k = InfluenceKernel::power_law(1.0).unwrap();
        assert!((k.lipschitz_bound - 9.0 / (8.0 * 3f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn monotone_positive_and_lipschitz_on_grid() {
        for k in kernels() {
            let grid: Vec<f64> = (0..1000).map(|i| i as f64 * 0.01).collect();
            let vals: Vec<f64> = grid.iter().map(|&r| k.eval(r)).collect();
            for w in vals.windows(2) {
                assert!(w[0] >= w[1], "{k:?} not non-increasing");
            }
            assert!(vals.iter().all(|&v| v > 0.0));
            for (w, r) in vals.windows(2).zip(grid.windows(2)) {
                assert!((w[0] - w[1]).abs() <= k.lipschitz_bound * (r[1] - r[0]) * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn delay_invariants() {
        let d = DelayProfile::linear_decreasing(1.0, 0.5, 0.2).unwrap();
        assert_eq!(d.tau_zero(), 1.0);
        assert_eq!(d.tau_star(), 0.5);
        let mut prev = d.tau(0.0);
        for k in 1..200 {
            let tau = d.tau(k as f64 * 0.05);
            assert!(tau <= prev && tau >= d.tau_star());
            prev = tau;
        }
        assert!(DelayProfile::constant(0.0).is_err());
        assert!(DelayProfile::linear_decreasing(0.4, 0.5, 0.1).is_err());
        assert!(DelayProfile::linear_decreasing(1.0, 0.5, -0.1).is_err());
    }

    #[test]
    fn h_of_t_examples() {
        let delay = DelayProfile::constant(0.7).unwrap();
        let unit = MemoryWeight::constant(1.0, &delay).unwrap();
        for t in [0.0, 1.0, 33.0] {
            assert_eq!(h_of_t(&unit, &delay, t).unwrap(), 0.7);
        }

        let lin = DelayProfile::linear_decreasing(1.0, 0.5, 0.1).unwrap();
        let unit = MemoryWeight::constant(1.0, &lin).unwrap();
        assert_eq!(h_of_t(&unit, &lin, 1e6).unwrap(), 0.5);

        let one = DelayProfile::constant(1.0).unwrap();
        let exp = MemoryWeight::exponential(1.0, &one).unwrap();
        let h = h_of_t(&exp, &one, 0.0).unwrap();
        let oracle = integrate_adaptive(|s| (-s).exp(), 0.0, 1.0, 1e-12).unwrap();
        assert!((h - oracle).abs() < 1e-12);
        assert!((h - 0.632_120_558_828_557_7).abs() < 1e-15);

        assert!(h_of_t(&exp, &one, -1.0).is_err());
    }

    #[test]
    fn a_bar_examples() {
        let d = DelayProfile::constant(0.5).unwrap();
        assert_eq!(a_bar(&MemoryWeight::constant(1.0, &d).unwrap(), &d).unwrap(), 0.5);
        let d = DelayProfile::constant(0.25).unwrap();
        assert_eq!(a_bar(&MemoryWeight::constant(2.0, &d).unwrap(), &d).unwrap(), 0.5);
        let d = DelayProfile::constant(1.0).unwrap();
        let w = MemoryWeight::exponential(1.0, &d).unwrap();
        assert!((a_bar(&w, &d).unwrap() - (1.0 - (-1f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn degenerate_weights_are_rejected() {
        let d = DelayProfile::constant(1.0).unwrap();
        // α(s) = s - 0.5 is negative near zero
        assert!(MemoryWeight::polynomial(vec![-0.5, 1.0], &d).is_err());
        // α ≡ 0
        assert!(MemoryWeight::polynomial(vec![0.0], &d).is_err());
        assert!(MemoryWeight::constant(0.0, &d).is_err());
    }

    #[test]
    fn polynomial_integral_matches_quadrature() {
        let d = DelayProfile::linear_decreasing(1.2, 0.3, 0.5).unwrap();
        let w = MemoryWeight::polynomial(vec![0.5, -0.2, 0.3], &d).unwrap();
        for upper in [0.3, 0.77, 1.2] {
            let q = integrate_adaptive(|s| w.eval(s), 0.0, upper, 1e-12).unwrap();
            assert!((w.integral(upper) - q).abs() < 1e-13);
        }
    }

    #[test]
    fn h_sandwich_on_sampled_times() {
        let d = DelayProfile::linear_decreasing(0.9, 0.4, 0.3).unwrap();
        let w = MemoryWeight::exponential(0.8, &d).unwrap();
        let lo = a_bar(&w, &d).unwrap();
        let hi = h_of_t(&w, &d, 0.0).unwrap();
        let mut prev = hi;
        for k in 0..100 {
            let h = h_of_t(&w, &d, k as f64 * 0.05).unwrap();
            assert!(h <= prev + 1e-15);
            assert!(lo <= h + 1e-15 && h <= hi + 1e-15);
            prev = h;
        }
    }
}
