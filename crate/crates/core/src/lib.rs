//! Hegselmann-Krause opinion dynamics with a distributed, time-varying
//! delay.
//!
//! Each agent moves toward the others' past opinions, weighted over the
//! window `[t − τ(t), t]` by a memory kernel `α` and by an influence
//! function `ψ` of the opinion distance:
//!
//! ```text
//! dx_i/dt = 1/(N h(t)) Σ_{j≠i} ∫_{t−τ(t)}^t α(t−s) a_ij(t; s) (x_j(s) − x_i(t)) ds
//! ```
//!
//! The crate integrates this system ([`dynamics`]), evaluates the sufficient
//! condition for exponential consensus and its rate ([`diagnostics`]), and
//! runs particle approximations of the mean-field limit ([`meanfield`]).
//! [`scenario`] and [`runner`] drive all of it from TOML files.

pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod history;
pub mod kernels;
pub mod meanfield;
pub mod output;
pub mod quadrature;
pub mod runner;
pub mod scenario;

pub use diagnostics::{
    certify, check_inequalities, diameter, fit_decay_rate, gamma, initial_radius, lyapunov,
    ConsensusCertificate, DecayFit, DiagnosticsRecord, DiagnosticsSeries, InequalityReport,
};
pub use dynamics::{rhs, simulate, step, ModelConfig, StepOutput, Trajectory, WeightScheme};
pub use error::{Error, Result, Violation, Violations};
pub use history::{HistoryBuffer, InitialHistory};
pub use kernels::{
    a_bar, h_of_t, psi_eval, DelayFamily, DelayProfile, InfluenceKernel, KernelFamily, MemoryWeight,
    WeightFamily,
};
pub use meanfield::{
    convergence_experiment, sample_particles, support_diameter, wasserstein1, wasserstein1_1d,
    wasserstein1_assignment, EmpiricalMeasure, InitialMeasureSpec, MeasureFamily, SamplingMode,
};
