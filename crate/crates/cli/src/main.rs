//! `qlatwit`: run entanglement criteria on spin chains and bosonic lattices
//! from the command line.

mod commands;
mod output;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use qlatwit_core::bosonic::{Coupling, DEFAULT_CUTOFF};
use qlatwit_core::optimize::PulseParams;
use qlatwit_core::qcore::{dimension_cap, set_dimension_cap};
use serde_json::json;

use commands::{CliError, PulseRequest};
use output::{to_json, to_json_lines, Outcome};

/// Environment variable overriding the Hilbert space dimension cap.
const DIM_CAP_VAR: &str = "QLATWIT_DIM_CAP";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    /// Witness, squared and variance criteria for cluster, product and mixed states.
    ClusterWitness,
    /// Noisy cluster witness over a grid of channel weights.
    DecoherenceScan,
    /// Collective uncertainty of a unit-filled singlet chain.
    SingletSuite,
    /// Heisenberg ground state in the unit-filled sector.
    Heisenberg,
    /// Collective-spin moments of the cluster state against separable states.
    MomentsCompare,
    /// Violation ratio of a pulsed product state.
    Pulse,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::ClusterWitness => "cluster-witness",
            Command::DecoherenceScan => "decoherence-scan",
            Command::SingletSuite => "singlet-suite",
            Command::Heisenberg => "heisenberg",
            Command::MomentsCompare => "moments-compare",
            Command::Pulse => "pulse",
        }
    }

    fn default_n(self) -> usize {
        match self {
            Command::ClusterWitness | Command::DecoherenceScan | Command::Pulse => 6,
            Command::SingletSuite | Command::Heisenberg => 4,
            Command::MomentsCompare => 9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "qlatwit", version, about)]
struct Cli {
    #[arg(value_enum)]
    command: Command,

    /// Number of sites. The default depends on the command.
    #[arg(long)]
    n: Option<usize>,

    #[arg(long, default_value_t = 0.5)]
    p_min: f64,

    #[arg(long, default_value_t = 1.0)]
    p_max: f64,

    #[arg(long, default_value_t = 11)]
    steps: usize,

    #[arg(long, default_value_t = 4)]
    max_order: u32,

    /// Pulse angles theta_xx,theta_yy,theta_z.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    params: Option<Vec<f64>>,

    /// Optimize the pulse angles, starting from --params.
    #[arg(long)]
    optimize: bool,

    /// Objective evaluations allowed to the optimizer.
    #[arg(long, default_value_t = 200)]
    budget: usize,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Per-mode occupation cutoff on bosonic lattices.
    #[arg(long, default_value_t = DEFAULT_CUTOFF)]
    cutoff: usize,

    /// Use the ferromagnetic sign for heisenberg.
    #[arg(long)]
    ferromagnetic: bool,

    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write the main output here instead of stdout. Plot data goes next to it.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Write the optimizer trace as JSON lines.
    #[arg(long)]
    trace: Option<PathBuf>,
}

fn apply_dimension_cap() -> Result<usize, CliError> {
    if let Ok(raw) = std::env::var(DIM_CAP_VAR) {
        let cap: usize = raw.trim().parse().ok().filter(|&c| c > 0).ok_or_else(|| {
            CliError::Usage(format!(
                "{DIM_CAP_VAR} must be a positive integer, got {raw:?}"
            ))
        })?;
        set_dimension_cap(cap);
    }
    Ok(dimension_cap())
}

fn pulse_params(raw: &Option<Vec<f64>>) -> Result<PulseParams, CliError> {
    match raw {
        None => Ok(PulseParams::reference()),
        Some(v) => {
            let arr: [f64; 3] = v.as_slice().try_into().map_err(|_| {
                CliError::Usage(format!("--params takes three numbers, got {}", v.len()))
            })?;
            PulseParams::from_array(arr).map_err(|e| CliError::Usage(e.to_string()))
        }
    }
}

fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let n = cli.n.unwrap_or(cli.command.default_n());
    match cli.command {
        Command::ClusterWitness => commands::cluster_witness(n),
        Command::DecoherenceScan => commands::decoherence_scan(n, cli.p_min, cli.p_max, cli.steps),
        Command::SingletSuite => commands::singlet_suite(n, cli.cutoff),
        Command::Heisenberg => {
            let coupling = if cli.ferromagnetic {
                Coupling::Ferromagnetic
            } else {
                Coupling::Antiferromagnetic
            };
            commands::heisenberg(n, cli.cutoff, coupling)
        }
        Command::MomentsCompare => commands::moments_compare(n, cli.max_order),
        Command::Pulse => commands::pulse(&PulseRequest {
            n,
            params: pulse_params(&cli.params)?,
            optimize: cli.optimize.then_some((cli.budget, cli.seed)),
        }),
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cap = apply_dimension_cap()?;
    if cli.trace.is_some() && !(cli.command == Command::Pulse && cli.optimize) {
        return Err(CliError::Usage(
            "--trace only applies to pulse --optimize".to_string(),
        ));
    }
    let mut outcome = execute(cli)?;
    outcome.config["format"] = json!(match cli.format {
        Format::Json => "json",
        Format::Csv => "csv",
    });
    outcome.config["dimension_cap"] = json!(cap);

    let body = match cli.format {
        Format::Json => to_json(&json!({
            "command": cli.command.name(),
            "config": outcome.config,
            "results": outcome.results,
            "versions": {
                "qlatwit": env!("CARGO_PKG_VERSION"),
                "qlatwit-core": qlatwit_core::VERSION,
            },
        }))?,
        Format::Csv => {
            let mut err = std::io::stderr().lock();
            for line in &outcome.summary {
                writeln!(err, "{line}")?;
            }
            outcome.table.to_csv()?
        }
    };
    match &cli.out {
        Some(path) => {
            fs::write(path, body)?;
            for plot in &outcome.plots {
                fs::write(plot.path_next_to(path), plot.render())?;
            }
        }
        None => std::io::stdout().lock().write_all(body.as_bytes())?,
    }
    if let (Some(path), Some(trace)) = (&cli.trace, &outcome.trace) {
        fs::write(path, to_json_lines(trace)?)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
