//! Executes a validated [`Scenario`] and writes its artifacts.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::diagnostics::{certify, fit_decay_rate, ConsensusCertificate, DiagnosticsSeries};
use crate::dynamics::{simulate, ModelConfig, Trajectory};
use crate::error::{Error, Result};
use crate::meanfield::convergence_experiment;
use crate::output::{fmt_f64, fmt_opt};
use crate::scenario::{Experiment, InitialSource, Scenario, SweepParam};

/// Environment variable capping the sweep's worker threads.
pub const THREADS_ENV: &str = "HKDELAY_THREADS";

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Overrides the seed of a sampled initial measure.
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    /// One line: holds, K and the fitted rate where they apply.
    pub summary: String,
    pub artifacts: Vec<PathBuf>,
    pub certificate: Option<ConsensusCertificate>,
    pub fitted_rate: Option<f64>,
}

/// Process exit status for a failed run: 2 for bad input, 3 for numeric
/// failures, 1 for I/O.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) => 1,
        e if e.is_validation() => 2,
        _ => 3,
    }
}

pub fn run(scenario: &Scenario, opts: &RunOptions) -> Result<RunReport> {
    let mut scenario = scenario.clone();
    if let Some(seed) = opts.seed {
        scenario.initial.set_seed(seed);
    }
    let mut writer = Artifacts::new(&opts.out_dir);
    let report = match &scenario.experiment {
        Experiment::Simulate => run_simulate(&scenario, &mut writer)?,
        Experiment::Certify => run_certify(&scenario, &mut writer)?,
        Experiment::Meanfield { n_list, checkpoints } => {
            run_meanfield(&scenario, n_list, checkpoints, &mut writer)?
        }
        Experiment::Sweep { param, values } => run_sweep(&scenario, *param, values, &mut writer)?,
    };
    Ok(RunReport {
        artifacts: writer.written,
        ..report
    })
}

struct Artifacts {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Artifacts {
    fn new(dir: &Path) -> Self {
        Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        }
    }

    fn write(
        &mut self,
        name: &Option<String>,
        body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    ) -> Result<()> {
        let Some(name) = name else { return Ok(()) };
        std::fs::create_dir_all(&self.dir)?;
        let path = self.dir.join(name);
        let mut out = BufWriter::new(File::create(&path)?);
        body(&mut out)?;
        out.flush()?;
        self.written.push(path);
        Ok(())
    }
}

fn certificate_for(config: &ModelConfig, radius: f64) -> Result<ConsensusCertificate> {
    certify(&config.kernel, &config.delay, &config.weight, radius)
}

fn describe(cert: &ConsensusCertificate) -> String {
    let rate = cert.rate.map_or_else(|| "n/a".to_string(), fmt_f64);
    format!("holds={} K={rate}", cert.holds)
}

fn fitted_rate(traj: &Trajectory, t_end: f64) -> Result<Option<f64>> {
    let times = &traj.times[traj.origin..];
    let d_x: Vec<f64> = traj.forward().map(|k| crate::diagnostics::diameter(&traj.states[k], traj.dim)).collect();
    let fit = fit_decay_rate(&DiagnosticsSeries::from_diameters(times, &d_x), (0.5 * t_end, t_end))?;
    Ok(fit.rate.is_finite().then_some(fit.rate))
}

fn run_simulate(scenario: &Scenario, out: &mut Artifacts) -> Result<RunReport> {
    let config = &scenario.config;
    let initial = scenario.initial.realize(config.n_agents, config.delay.tau_zero())?;
    let radius = scenario.certificate_radius(&initial)?;
    let cert = certificate_for(config, radius)?;
    let traj = simulate(config, &initial)?;
    let series = DiagnosticsSeries::compute(&traj, config, cert.beta_chosen)?;
    let fit = fit_decay_rate(&series, (0.5 * config.t_end, config.t_end))?;
    let rate = fit.rate.is_finite().then_some(fit.rate);
    let final_d = series.records.last().map(|r| r.d_x);

    out.write(&scenario.outputs.trajectory, |w| traj.write_csv(w))?;
    out.write(&scenario.outputs.diagnostics, |w| series.write_csv(w))?;
    out.write(&scenario.outputs.certificate, |w| writeln!(w, "{}", cert.to_json()))?;

    let rate_text = if fit.hit_zero { "inf".to_string() } else { fmt_opt(rate) };
    Ok(RunReport {
        summary: format!(
            "{} simulate: {} fitted_rate={} final_d_X={}",
            scenario.name,
            describe(&cert),
            rate_text,
            fmt_opt(final_d)
        ),
        artifacts: Vec::new(),
        certificate: Some(cert),
        fitted_rate: if fit.hit_zero { Some(f64::INFINITY) } else { rate },
    })
}

fn run_certify(scenario: &Scenario, out: &mut Artifacts) -> Result<RunReport> {
    let config = &scenario.config;
    let initial = scenario.initial.realize(config.n_agents, config.delay.tau_zero())?;
    let radius = scenario.certificate_radius(&initial)?;
    let cert = certificate_for(config, radius)?;
    out.write(&scenario.outputs.certificate, |w| writeln!(w, "{}", cert.to_json()))?;
    Ok(RunReport {
        summary: format!("{} certify: {} R={}", scenario.name, describe(&cert), fmt_opt(Some(radius))),
        artifacts: Vec::new(),
        certificate: Some(cert),
        fitted_rate: None,
    })
}

fn run_meanfield(
    scenario: &Scenario,
    n_list: &[usize],
    checkpoints: &[f64],
    out: &mut Artifacts,
) -> Result<RunReport> {
    let InitialSource::Measure(spec) = &scenario.initial else {
        return Err(Error::validation("initial.kind", "the meanfield experiment needs a measure"));
    };
    let report = convergence_experiment(spec, &scenario.config, n_list, checkpoints)?;
    out.write(&scenario.outputs.meanfield, |w| report.write_jsonl(w))?;
    out.write(&scenario.outputs.certificate, |w| {
        writeln!(w, "{}", report.certificate.to_json())
    })?;
    let within = report
        .diameter_within_bound
        .map_or_else(|| "n/a".to_string(), |b| b.to_string());
    Ok(RunReport {
        summary: format!(
            "{} meanfield: {} w1_nonincreasing={} diameter_within_bound={} failures={}",
            scenario.name,
            describe(&report.certificate),
            report.w1_nonincreasing,
            within,
            report.failures().count()
        ),
        artifacts: Vec::new(),
        certificate: Some(report.certificate),
        fitted_rate: None,
    })
}

/// One line of the sweep report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub param: &'static str,
    pub value: f64,
    pub holds: Option<bool>,
    #[serde(rename = "K")]
    pub rate: Option<f64>,
    pub fitted_rate: Option<f64>,
    #[serde(rename = "final_d_X")]
    pub final_d_x: Option<f64>,
    pub final_state: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// The scenario's model with one parameter replaced.
pub fn apply_sweep_value(config: &ModelConfig, param: SweepParam, value: f64) -> Result<ModelConfig> {
    let mut config = config.clone();
    match param {
        SweepParam::Tau => {
            config.delay = config.delay.with_tau_zero(value)?;
            config.weight = config.weight.rebind(&config.delay)?;
        }
        SweepParam::Dt => config.dt = value,
        SweepParam::N => {
            if !(value >= 2.0 && value.fract() == 0.0) {
                return Err(Error::validation("n", format!("agent count must be an integer ≥ 2, got {value}")));
            }
            config.n_agents = value as usize;
        }
        SweepParam::KernelExponent => config.kernel = config.kernel.with_parameter(value)?,
    }
    config.validate()?;
    Ok(config)
}

fn sweep_one(scenario: &Scenario, param: SweepParam, value: f64) -> SweepRow {
    let mut row = SweepRow {
        param: param.name(),
        value,
        holds: None,
        rate: None,
        fitted_rate: None,
        final_d_x: None,
        final_state: None,
        error: None,
    };
    let outcome = (|| -> Result<()> {
        let config = apply_sweep_value(&scenario.config, param, value)?;
        let initial = scenario.initial.realize(config.n_agents, config.delay.tau_zero())?;
        let cert = certificate_for(&config, scenario.certificate_radius(&initial)?)?;
        row.holds = Some(cert.holds);
        row.rate = cert.rate;
        let traj = simulate(&config, &initial)?;
        row.fitted_rate = fitted_rate(&traj, config.t_end)?;
        row.final_d_x = Some(crate::diagnostics::diameter(traj.final_state(), traj.dim));
        row.final_state = Some(traj.final_state().to_vec());
        Ok(())
    })();
    if let Err(e) = outcome {
        row.error = Some(e.to_string());
    }
    row
}

/// Runs the scenario once per value, in parallel; failures stay in their row.
pub fn sweep(scenario: &Scenario, param: SweepParam, values: &[f64]) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::validation("experiment.values", "sweep needs at least one value"));
    }
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::validation(THREADS_ENV, format!("expected a positive integer, got `{v}`")))?,
        Err(_) => 0,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Inconsistency(format!("cannot start worker threads: {e}")))?;
    Ok(pool.install(|| values.par_iter().map(|&v| sweep_one(scenario, param, v)).collect()))
}

fn run_sweep(scenario: &Scenario, param: SweepParam, values: &[f64], out: &mut Artifacts) -> Result<RunReport> {
    let rows = sweep(scenario, param, values)?;
    out.write(&scenario.outputs.sweep, |w| {
        for row in &rows {
            writeln!(w, "{}", serde_json::to_string(row).expect("row serializes"))?;
        }
        Ok(())
    })?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    let holds: Vec<String> = rows
        .iter()
        .map(|r| r.holds.map_or_else(|| "error".into(), |h| h.to_string()))
        .collect();
    Ok(RunReport {
        summary: format!(
            "{} sweep {}: {} values, holds=[{}] failures={}",
            scenario.name,
            param.name(),
            rows.len(),
            holds.join(","),
            failed
        ),
        artifacts: Vec::new(),
        certificate: None,
        fitted_rate: None,
    })
}
