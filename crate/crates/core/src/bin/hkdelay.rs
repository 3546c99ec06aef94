use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hkdelay::runner::{exit_code, run, RunOptions};
use hkdelay::scenario::Scenario;
use hkdelay::Error;

/// Delayed Hegselmann-Krause dynamics: simulation, consensus certificates and
/// mean-field experiments driven by TOML scenario files.
#[derive(Parser)]
#[command(name = "hkdelay", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run whatever experiment the scenario declares.
    Run(Common),
    /// Integrate the scenario and write trajectory, diagnostics and certificate.
    Simulate(Common),
    /// Evaluate the consensus certificate only.
    Certify(Common),
    /// Run the N-scaling experiment of the scenario's [meanfield] section.
    Meanfield(Common),
    /// Run the scenario once per parameter value (threads: HKDELAY_THREADS).
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Parameter to sweep: tau, dt, n or kernel_exponent.
        #[arg(long, requires = "values")]
        param: Option<String>,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 0.., requires = "param")]
        values: Option<Vec<f64>>,
    },
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,
    /// Directory receiving the artifacts.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Seed for sampled initial measures (overrides the file).
    #[arg(long)]
    seed: Option<u64>,
    /// Print nothing on success.
    #[arg(long)]
    quiet: bool,
}

fn execute(command: Command) -> Result<(String, bool), Error> {
    let (common, name, sweep) = match command {
        Command::Run(c) => (c, None, None),
        Command::Simulate(c) => (c, Some("simulate"), None),
        Command::Certify(c) => (c, Some("certify"), None),
        Command::Meanfield(c) => (c, Some("meanfield"), None),
        Command::Sweep { common, param, values } => (common, Some("sweep"), param.zip(values)),
    };
    let loaded = Scenario::from_path(&common.scenario).map_err(|e| match e {
        Error::Io(io) => Error::validation(
            "scenario",
            format!("cannot read {}: {io}", common.scenario.display()),
        ),
        other => other,
    })?;
    let scenario = match (name, sweep) {
        (_, Some((param, values))) => loaded.with_sweep(&param, values)?,
        (Some(name), None) => loaded.for_command(name)?,
        (None, None) => loaded,
    };
    let opts = RunOptions {
        out_dir: common.out_dir,
        seed: common.seed,
    };
    let report = run(&scenario, &opts)?;
    Ok((report.summary, common.quiet))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok((summary, quiet)) => {
            if !quiet {
                println!("{summary}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("hkdelay: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
