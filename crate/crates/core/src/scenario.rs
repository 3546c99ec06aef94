//! TOML scenario files.
//!
//! A scenario names one experiment and carries everything it needs. The
//! whole file is validated before anything runs, and every problem found is
//! reported together, each tagged with its `section.key` path. The schema is
//! documented in the repository README; `schema_version` must be 1.

use std::path::Path;

use serde::Deserialize;

use crate::dynamics::{ModelConfig, WeightScheme, DEFAULT_QUAD_NODES};
use crate::error::{Checker, Error, Result, Violation, Violations};
use crate::history::InitialHistory;
use crate::kernels::{DelayFamily, DelayProfile, InfluenceKernel, KernelFamily, MemoryWeight, WeightFamily};
use crate::meanfield::{InitialMeasureSpec, MeasureFamily, SamplingMode};

pub const SCHEMA_VERSION: i64 = 1;

const DIRAC_MESSAGE: &str = "a Dirac memory weight (pointwise delay) is excluded: α must be a bounded \
     function with positive integral; use a distributed weight such as `constant` or `exponential`";

/// Where the initial data comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialSource {
    History(InitialHistory),
    Measure(InitialMeasureSpec),
}

impl InitialSource {
    /// Materializes N agents. Explicit histories must already have N agents.
    pub fn realize(&self, n: usize, tau_zero: f64) -> Result<InitialHistory> {
        match self {
            InitialSource::History(h) => {
                if h.n_agents() != n {
                    return Err(Error::validation(
                        "initial",
                        format!("initial data has {} agents, model.n is {n}", h.n_agents()),
                    ));
                }
                Ok(h.clone())
            }
            InitialSource::Measure(spec) => crate::meanfield::sample_particles(spec, n, tau_zero),
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        if let InitialSource::Measure(spec) = self {
            spec.seed = seed;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParam {
    /// τ(0), keeping the delay shape.
    Tau,
    Dt,
    /// Agent count; needs a measure as initial data.
    N,
    KernelExponent,
}

impl SweepParam {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::Tau => "tau",
            SweepParam::Dt => "dt",
            SweepParam::N => "n",
            SweepParam::KernelExponent => "kernel_exponent",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "tau" => SweepParam::Tau,
            "dt" => SweepParam::Dt,
            "n" => SweepParam::N,
            "kernel_exponent" => SweepParam::KernelExponent,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Experiment {
    Simulate,
    Certify,
    Meanfield { n_list: Vec<usize>, checkpoints: Vec<f64> },
    Sweep { param: SweepParam, values: Vec<f64> },
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Simulate => "simulate",
            Experiment::Certify => "certify",
            Experiment::Meanfield { .. } => "meanfield",
            Experiment::Sweep { .. } => "sweep",
        }
    }
}

/// Artifact file names, relative to the output directory. `None` disables
/// the artifact.
#[derive(Clone, Debug, PartialEq)]
pub struct Outputs {
    pub trajectory: Option<String>,
    pub diagnostics: Option<String>,
    pub certificate: Option<String>,
    pub meanfield: Option<String>,
    pub sweep: Option<String>,
}

impl Default for Outputs {
    fn default() -> Self {
        Self {
            trajectory: Some("trajectory.csv".into()),
            diagnostics: Some("diagnostics.csv".into()),
            certificate: Some("certificate.json".into()),
            meanfield: Some("meanfield.jsonl".into()),
            sweep: Some("sweep.jsonl".into()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub config: ModelConfig,
    pub initial: InitialSource,
    pub outputs: Outputs,
    pub experiment: Experiment,
}

impl Scenario {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("scenario")
            .to_string();
        Self::parse(&text, &name)
    }

    pub fn parse(text: &str, name: &str) -> Result<Self> {
        let raw: RawScenario =
            toml::from_str(text).map_err(|e| Error::validation("scenario", e.message().trim().to_string()))?;
        raw.build(name)
    }

    /// The same scenario run as a different experiment. Simulate and certify
    /// need nothing extra; meanfield and sweep need their settings, so the
    /// file must already declare that experiment.
    pub fn for_command(&self, command: &str) -> Result<Self> {
        if command == self.experiment.name() {
            return Ok(self.clone());
        }
        let experiment = match command {
            "simulate" => Experiment::Simulate,
            "certify" => Experiment::Certify,
            "meanfield" | "sweep" => {
                return Err(Error::validation(
                    "experiment.kind",
                    format!(
                        "`{command}` needs a scenario declaring `kind = \"{command}\"`, this one declares `{}`",
                        self.experiment.name()
                    ),
                ))
            }
            other => return Err(Error::validation("experiment.kind", format!("unknown command `{other}`"))),
        };
        Ok(Self {
            experiment,
            ..self.clone()
        })
    }

    /// The same scenario as a sweep of `param` over `values`.
    pub fn with_sweep(&self, param: &str, values: Vec<f64>) -> Result<Self> {
        let mut c = Checker::default();
        let experiment = RawExperiment {
            kind: "sweep".into(),
            param: Some(param.to_string()),
            values: Some(values),
        }
        .build(&mut c, None);
        if let Some(e) = &experiment {
            check_experiment(&mut c, &self.config, Some(&self.initial), e);
        }
        c.finish()?;
        Ok(Self {
            experiment: experiment.expect("validated"),
            ..self.clone()
        })
    }

    /// The radius R of the initial data used by the certificate.
    pub fn certificate_radius(&self, initial: &InitialHistory) -> Result<f64> {
        match &self.initial {
            InitialSource::History(_) => crate::diagnostics::initial_radius(initial),
            InitialSource::Measure(spec) => Ok(spec.support_radius(self.config.delay.tau_zero())),
        }
    }
}

// ---------------------------------------------------------------------------
// raw file layout

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    schema_version: Option<i64>,
    model: Option<RawModel>,
    kernel: Option<RawKernel>,
    delay: Option<RawDelay>,
    weight: Option<RawWeight>,
    initial: Option<RawInitial>,
    #[serde(default)]
    outputs: RawOutputs,
    experiment: Option<RawExperiment>,
    meanfield: Option<RawMeanfield>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    n: Option<usize>,
    d: Option<usize>,
    weight_scheme: Option<String>,
    dt: Option<f64>,
    t_end: Option<f64>,
    quad_nodes: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawKernel {
    family: String,
    exponent: Option<f64>,
    rate: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDelay {
    family: String,
    tau: Option<f64>,
    tau0: Option<f64>,
    tau_inf: Option<f64>,
    slope: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWeight {
    family: String,
    value: Option<f64>,
    rate: Option<f64>,
    coefficients: Option<Vec<f64>>,
}

/// A point given either as a bare number (1-D) or as a coordinate list.
#[derive(Deserialize, Clone)]
#[serde(untagged)]
enum RawPoint {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl RawPoint {
    fn coords(&self) -> Vec<f64> {
        match self {
            RawPoint::Scalar(x) => vec![*x],
            RawPoint::Vector(v) => v.clone(),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    kind: String,
    // constant_per_agent
    positions: Option<Vec<RawPoint>>,
    // sampled_path
    times: Option<Vec<f64>>,
    states: Option<Vec<Vec<RawPoint>>>,
    // measure
    family: Option<String>,
    a: Option<f64>,
    b: Option<f64>,
    mean: Option<RawPoint>,
    sd: Option<f64>,
    radius: Option<f64>,
    c1: Option<RawPoint>,
    c2: Option<RawPoint>,
    spread: Option<f64>,
    points: Option<Vec<RawPoint>>,
    mode: Option<String>,
    drift: Option<RawPoint>,
    seed: Option<u64>,
}

/// `false` disables an artifact; a string renames it.
#[derive(Deserialize, Clone)]
#[serde(untagged)]
enum RawSlot {
    Enabled(bool),
    Path(String),
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawOutputs {
    trajectory: Option<RawSlot>,
    diagnostics: Option<RawSlot>,
    certificate: Option<RawSlot>,
    meanfield: Option<RawSlot>,
    sweep: Option<RawSlot>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    kind: String,
    param: Option<String>,
    values: Option<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMeanfield {
    n_list: Option<Vec<usize>>,
    checkpoints: Option<Vec<f64>>,
}

// ---------------------------------------------------------------------------
// conversion

fn need<T: Clone>(c: &mut Checker, value: &Option<T>, field: &str) -> Option<T> {
    if value.is_none() {
        c.push(field, "missing required key");
    }
    value.clone()
}

fn prefixed(prefix: &str, err: Error) -> Vec<Violation> {
    match err {
        Error::Validation(Violations(list)) => list
            .into_iter()
            .map(|v| Violation::new(format!("{prefix}.{}", v.field), v.message))
            .collect(),
        other => vec![Violation::new(prefix, other.to_string())],
    }
}

impl RawKernel {
    fn build(&self, c: &mut Checker) -> Option<InfluenceKernel> {
        let family = match self.family.as_str() {
            "constant" => KernelFamily::Constant,
            "power_law" => KernelFamily::PowerLaw {
                exponent: need(c, &self.exponent, "kernel.exponent")?,
            },
            "exponential" => KernelFamily::Exponential {
                rate: need(c, &self.rate, "kernel.rate")?,
            },
            other => {
                c.push(
                    "kernel.family",
                    format!("unknown kernel family `{other}` (expected constant, power_law or exponential)"),
                );
                return None;
            }
        };
        InfluenceKernel::new(family).map_err(|e| c.extend(prefixed("kernel", e))).ok()
    }
}

impl RawDelay {
    fn build(&self, c: &mut Checker) -> Option<DelayProfile> {
        let family = match self.family.as_str() {
            "constant" => DelayFamily::Constant {
                tau: need(c, &self.tau, "delay.tau")?,
            },
            "linear_decreasing" => {
                let tau0 = need(c, &self.tau0, "delay.tau0");
                let tau_inf = need(c, &self.tau_inf, "delay.tau_inf");
                let slope = need(c, &self.slope, "delay.slope");
                DelayFamily::LinearDecreasing {
                    tau0: tau0?,
                    tau_inf: tau_inf?,
                    slope: slope?,
                }
            }
            other => {
                c.push(
                    "delay.family",
                    format!("unknown delay family `{other}` (expected constant or linear_decreasing)"),
                );
                return None;
            }
        };
        DelayProfile::new(family).map_err(|e| c.extend(prefixed("delay", e))).ok()
    }
}

impl RawWeight {
    fn build(&self, c: &mut Checker, delay: Option<&DelayProfile>) -> Option<MemoryWeight> {
        let family = match self.family.as_str() {
            "constant" => WeightFamily::Constant {
                value: self.value.unwrap_or(1.0),
            },
            "exponential" => WeightFamily::Exponential {
                rate: need(c, &self.rate, "weight.rate")?,
            },
            "polynomial" => WeightFamily::Polynomial {
                coefficients: need(c, &self.coefficients, "weight.coefficients")?,
            },
            "dirac" => {
                c.push("weight.family", DIRAC_MESSAGE);
                return None;
            }
            other => {
                c.push(
                    "weight.family",
                    format!("unknown weight family `{other}` (expected constant, exponential or polynomial)"),
                );
                return None;
            }
        };
        MemoryWeight::new(family, delay?).map_err(|e| c.extend(prefixed("weight", e))).ok()
    }
}

fn flatten(points: &[RawPoint], dim: usize, field: &str, c: &mut Checker) -> Option<Vec<f64>> {
    let coords: Vec<Vec<f64>> = points.iter().map(RawPoint::coords).collect();
    if let Some(bad) = coords.iter().position(|p| p.len() != dim) {
        c.push(field, format!("entry {bad} has {} coordinates, model.d is {dim}", coords[bad].len()));
        return None;
    }
    Some(coords.concat())
}

fn point(value: &Option<RawPoint>, dim: usize, field: &str, c: &mut Checker) -> Option<Vec<f64>> {
    let p = need(c, value, field)?.coords();
    if p.len() != dim {
        c.push(field, format!("has {} coordinates, model.d is {dim}", p.len()));
        return None;
    }
    Some(p)
}

impl RawInitial {
    fn build(&self, c: &mut Checker, dim: usize, tau0: Option<f64>) -> Option<InitialSource> {
        match self.kind.as_str() {
            "constant_per_agent" => {
                let positions = need(c, &self.positions, "initial.positions")?;
                let flat = flatten(&positions, dim, "initial.positions", c)?;
                Some(InitialSource::History(InitialHistory::constant(dim, flat)))
            }
            "sampled_path" => {
                let times = need(c, &self.times, "initial.times");
                let states = need(c, &self.states, "initial.states");
                let (times, states) = (times?, states?);
                let states = states
                    .iter()
                    .map(|s| flatten(s, dim, "initial.states", c))
                    .collect::<Option<Vec<_>>>()?;
                let h = InitialHistory::SampledPath { dim, times, states };
                if let Some(tau0) = tau0 {
                    if let Err(e) = h.validate(tau0) {
                        c.extend(prefixed("initial", e));
                        return None;
                    }
                }
                Some(InitialSource::History(h))
            }
            "measure" => self.build_measure(c, dim).map(InitialSource::Measure),
            other => {
                c.push(
                    "initial.kind",
                    format!("unknown initial kind `{other}` (expected constant_per_agent, sampled_path or measure)"),
                );
                None
            }
        }
    }

    fn build_measure(&self, c: &mut Checker, dim: usize) -> Option<InitialMeasureSpec> {
        let family_name = need(c, &self.family, "initial.family")?;
        let family = match family_name.as_str() {
            "uniform_interval" => {
                let a = need(c, &self.a, "initial.a");
                let b = need(c, &self.b, "initial.b");
                MeasureFamily::UniformInterval { a: a?, b: b? }
            }
            "gaussian_truncated" => {
                let mean = point(&self.mean, dim, "initial.mean", c);
                let sd = need(c, &self.sd, "initial.sd");
                let radius = need(c, &self.radius, "initial.radius");
                MeasureFamily::GaussianTruncated {
                    mean: mean?,
                    sd: sd?,
                    radius: radius?,
                }
            }
            "two_clusters" => {
                let c1 = point(&self.c1, dim, "initial.c1", c);
                let c2 = point(&self.c2, dim, "initial.c2", c);
                let spread = need(c, &self.spread, "initial.spread");
                MeasureFamily::TwoClusters {
                    c1: c1?,
                    c2: c2?,
                    spread: spread?,
                }
            }
            "explicit_points" => {
                let points = need(c, &self.points, "initial.points")?;
                MeasureFamily::ExplicitPoints {
                    points: points.iter().map(RawPoint::coords).collect(),
                }
            }
            other => {
                c.push(
                    "initial.family",
                    format!(
                        "unknown measure family `{other}` (expected uniform_interval, gaussian_truncated, two_clusters or explicit_points)"
                    ),
                );
                return None;
            }
        };
        let mut spec = InitialMeasureSpec::new(family, dim);
        match self.mode.as_deref() {
            None => {}
            Some("quantile") => spec.mode = Some(SamplingMode::Quantile),
            Some("iid") => spec.mode = Some(SamplingMode::Iid),
            Some(other) => {
                c.push("initial.mode", format!("unknown sampling mode `{other}` (expected quantile or iid)"));
                return None;
            }
        }
        if self.drift.is_some() {
            spec = spec.with_drift(point(&self.drift, dim, "initial.drift", c)?);
        }
        spec.seed = self.seed.unwrap_or(0);
        if let Err(e) = spec.validate() {
            c.absorb("", e);
            return None;
        }
        Some(spec)
    }
}

fn slot(raw: &Option<RawSlot>, default: Option<String>) -> Option<String> {
    match raw {
        None | Some(RawSlot::Enabled(true)) => default,
        Some(RawSlot::Enabled(false)) => None,
        Some(RawSlot::Path(p)) => Some(p.clone()),
    }
}

impl RawOutputs {
    fn build(&self, c: &mut Checker) -> Outputs {
        let d = Outputs::default();
        let out = Outputs {
            trajectory: slot(&self.trajectory, d.trajectory),
            diagnostics: slot(&self.diagnostics, d.diagnostics),
            certificate: slot(&self.certificate, d.certificate),
            meanfield: slot(&self.meanfield, d.meanfield),
            sweep: slot(&self.sweep, d.sweep),
        };
        for (key, name) in [
            ("outputs.trajectory", &out.trajectory),
            ("outputs.diagnostics", &out.diagnostics),
            ("outputs.certificate", &out.certificate),
            ("outputs.meanfield", &out.meanfield),
            ("outputs.sweep", &out.sweep),
        ] {
            if let Some(name) = name {
                let p = Path::new(name);
                c.check(
                    !name.is_empty() && p.is_relative() && !name.contains(".."),
                    key,
                    || format!("`{name}` must be a relative file name inside the output directory"),
                );
            }
        }
        out
    }
}

impl RawExperiment {
    fn build(&self, c: &mut Checker, meanfield: Option<&RawMeanfield>) -> Option<Experiment> {
        match self.kind.as_str() {
            "simulate" => Some(Experiment::Simulate),
            "certify" => Some(Experiment::Certify),
            "meanfield" => {
                let Some(mf) = meanfield else {
                    c.push("meanfield", "the meanfield experiment needs a [meanfield] section");
                    return None;
                };
                let n_list = need(c, &mf.n_list, "meanfield.n_list");
                let checkpoints = need(c, &mf.checkpoints, "meanfield.checkpoints");
                Some(Experiment::Meanfield {
                    n_list: n_list?,
                    checkpoints: checkpoints?,
                })
            }
            "sweep" => {
                let param = need(c, &self.param, "experiment.param");
                let values = need(c, &self.values, "experiment.values");
                let param = match SweepParam::parse(param?.as_str()) {
                    Some(p) => p,
                    None => {
                        c.push(
                            "experiment.param",
                            "not sweepable (expected tau, dt, n or kernel_exponent)",
                        );
                        return None;
                    }
                };
                let values = values?;
                c.check(!values.is_empty(), "experiment.values", || {
                    "sweep needs at least one value".into()
                });
                c.check(values.iter().all(|v| v.is_finite()), "experiment.values", || {
                    "sweep values must be finite".into()
                });
                if param == SweepParam::N {
                    c.check(
                        values.iter().all(|v| v.fract() == 0.0 && *v >= 2.0),
                        "experiment.values",
                        || "agent counts must be integers ≥ 2".into(),
                    );
                }
                Some(Experiment::Sweep { param, values })
            }
            other => {
                c.push(
                    "experiment.kind",
                    format!("unknown experiment `{other}` (expected simulate, certify, meanfield or sweep)"),
                );
                None
            }
        }
    }
}

impl RawScenario {
    fn build(self, name: &str) -> Result<Scenario> {
        let mut c = Checker::default();
        match self.schema_version {
            Some(SCHEMA_VERSION) => {}
            Some(v) => c.push("schema_version", format!("unsupported schema version {v} (expected {SCHEMA_VERSION})")),
            None => c.push("schema_version", "missing required key"),
        }

        let model = self.model.as_ref();
        if model.is_none() {
            c.push("model", "missing required section");
        }
        let n = model.and_then(|m| need(&mut c, &m.n, "model.n"));
        let dim = model.and_then(|m| need(&mut c, &m.d, "model.d"));
        let dt = model.and_then(|m| need(&mut c, &m.dt, "model.dt"));
        let t_end = model.and_then(|m| need(&mut c, &m.t_end, "model.t_end"));
        let quad_nodes = model.and_then(|m| m.quad_nodes).unwrap_or(DEFAULT_QUAD_NODES);
        let scheme = match model.and_then(|m| m.weight_scheme.as_deref()) {
            None | Some("symmetric") => Some(WeightScheme::Symmetric),
            Some("normalized") => Some(WeightScheme::Normalized),
            Some(other) => {
                c.push(
                    "model.weight_scheme",
                    format!("unknown weight scheme `{other}` (expected symmetric or normalized)"),
                );
                None
            }
        };

        let kernel = match &self.kernel {
            Some(k) => k.build(&mut c),
            None => {
                c.push("kernel", "missing required section");
                None
            }
        };
        let delay = match &self.delay {
            Some(d) => d.build(&mut c),
            None => {
                c.push("delay", "missing required section");
                None
            }
        };
        let weight = match &self.weight {
            Some(w) => w.build(&mut c, delay.as_ref()),
            None => {
                c.push("weight", "missing required section");
                None
            }
        };
        let initial = match (&self.initial, dim) {
            (Some(i), Some(dim)) if dim >= 1 => i.build(&mut c, dim, delay.map(|d| d.tau_zero())),
            (None, _) => {
                c.push("initial", "missing required section");
                None
            }
            _ => None,
        };
        let outputs = self.outputs.build(&mut c);
        let experiment = match &self.experiment {
            Some(e) => e.build(&mut c, self.meanfield.as_ref()),
            None => {
                c.push("experiment", "missing required section");
                None
            }
        };

        let config = match (n, dim, scheme, kernel, delay, weight, dt, t_end) {
            (Some(n), Some(dim), Some(scheme), Some(kernel), Some(delay), Some(weight), Some(dt), Some(t_end)) => {
                let config = ModelConfig {
                    n_agents: n,
                    dim,
                    scheme,
                    kernel,
                    delay,
                    weight,
                    dt,
                    t_end,
                    quad_nodes,
                };
                if let Err(e) = config.validate() {
                    c.extend(prefixed("model", e).into_iter().map(|v| {
                        // model-level fields keep their section prefix; weight
                        // problems point at the weight section instead
                        if v.field.starts_with("model.weight") {
                            Violation::new(v.field.replacen("model.", "", 1), v.message)
                        } else {
                            v
                        }
                    }));
                }
                Some(config)
            }
            _ => None,
        };

        if let (Some(config), Some(initial)) = (&config, &initial) {
            check_initial(&mut c, config, initial);
        }
        if let (Some(config), Some(experiment)) = (&config, &experiment) {
            check_experiment(&mut c, config, initial.as_ref(), experiment);
        }

        c.finish()?;
        Ok(Scenario {
            name: name.to_string(),
            config: config.expect("validated"),
            initial: initial.expect("validated"),
            outputs,
            experiment: experiment.expect("validated"),
        })
    }
}

fn check_initial(c: &mut Checker, config: &ModelConfig, initial: &InitialSource) {
    if let InitialSource::History(h) = initial {
        c.check(h.n_agents() == config.n_agents, "initial", || {
            format!("initial data has {} agents, model.n is {}", h.n_agents(), config.n_agents)
        });
    }
}

fn check_experiment(c: &mut Checker, config: &ModelConfig, initial: Option<&InitialSource>, experiment: &Experiment) {
    match experiment {
        Experiment::Meanfield { n_list, checkpoints } => {
            c.check(
                matches!(initial, Some(InitialSource::Measure(_))),
                "initial.kind",
                || "the meanfield experiment needs `kind = \"measure\"`".into(),
            );
            c.check(!n_list.is_empty(), "meanfield.n_list", || "no particle counts given".into());
            c.check(n_list.iter().all(|&n| n >= 2), "meanfield.n_list", || "every N must be at least 2".into());
            c.check(n_list.windows(2).all(|w| w[0] < w[1]), "meanfield.n_list", || {
                "particle counts must be strictly increasing".into()
            });
            c.check(!checkpoints.is_empty(), "meanfield.checkpoints", || "no checkpoints given".into());
            c.check(
                checkpoints.iter().all(|&t| (0.0..=config.t_end).contains(&t)),
                "meanfield.checkpoints",
                || format!("checkpoints must lie in [0, model.t_end = {}]", config.t_end),
            );
        }
        Experiment::Sweep { param, .. } => match param {
            SweepParam::N => c.check(
                matches!(initial, Some(InitialSource::Measure(_))),
                "experiment.param",
                || "sweeping n needs `initial.kind = \"measure\"`".into(),
            ),
            SweepParam::KernelExponent => c.check(!config.kernel.is_constant(), "experiment.param", || {
                "the constant kernel has no exponent to sweep".into()
            }),
            SweepParam::Tau | SweepParam::Dt => {}
        },
        Experiment::Simulate | Experiment::Certify => {}
    }
}
