//! `hal` — batch front end for the heralded amplification simulator.
//!
//! Exit codes: 0 success, 1 validation-suite failure, 2 invalid input, 3 truncation,
//! 4 impossible herald outcome, 64 usage error, 74 I/O error.

mod config;
mod grid;
mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hal_core::fock::{ComplexAmplitude, DEFAULT_CUTOFF};
use hal_core::metrology::{run_campaign, run_campaign_recorded};
use hal_core::protocol::{protocol_herald, run, sweep, Axis, InputKind, Model, ProtocolConfig, ResultRow};
use hal_core::spin::{collective_expectations, default_k_max, dicke_coherent_fidelity, rotated_product_state, EnsembleSpec};
use hal_core::validate::{run_validation, Faults};
use hal_core::Error;
use serde::Serialize;

use output::{csv_table, display_path, emit, format_f64, opt_f64, to_json, Document, RunManifest};

const EXIT_SUITE_FAILED: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_TRUNCATION: u8 = 3;
const EXIT_IMPOSSIBLE: u8 = 4;
const EXIT_USAGE: u8 = 64;
const EXIT_IO: u8 = 74;

#[derive(Parser)]
#[command(name = "hal", version, about = "Heralded amplification of small collective-spin rotations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the protocol at one parameter point and print a JSON result.
    Protocol(ProtocolArgs),
    /// Run the protocol over a parameter grid and write CSV.
    Sweep {
        #[command(flatten)]
        base: ProtocolArgs,
        /// Grid file: one axis per line, `name = start:stop:count` or `name = v1, v2, ...`.
        #[arg(long)]
        grid: PathBuf,
        /// CSV destination (standard output if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the exact Dicke expansion of a rotated ensemble with its oscillator approximation.
    Ensemble {
        #[arg(long)]
        n_atoms: u64,
        /// Per-atom rotation amplitude, `RE[,IM]`.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        epsilon: ComplexAmplitude,
        #[arg(long, default_value_t = DEFAULT_CUTOFF)]
        cutoff: usize,
    },
    /// Run a fixed-time estimation campaign from a TOML configuration.
    Campaign {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Summary JSON destination (standard output if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Optional per-attempt CSV record.
        #[arg(long)]
        runs_csv: Option<PathBuf>,
    },
    /// Check the simulator against independent reference computations.
    Validate {
        #[arg(long, value_enum)]
        inject_fault: Option<Fault>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Fault {
    /// Negate the beam-splitter mixing angle.
    BsSign,
}

#[derive(Clone, Copy, ValueEnum)]
enum InputArg {
    Truncated,
    Coherent,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Exact,
    FirstOrder,
}

#[derive(Args)]
struct ProtocolArgs {
    /// Signal amplitude, `RE[,IM]`.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, default_value = "0")]
    alpha: ComplexAmplitude,
    /// Beam-splitter transmission amplitude (required unless a sweep grid sets `t` or `inv_t`).
    #[arg(long)]
    t: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_CUTOFF)]
    cutoff: usize,
    #[arg(long, value_enum, default_value = "truncated")]
    input: InputArg,
    /// Probability that the source emits its photon.
    #[arg(long, default_value_t = 1.0)]
    source_eff: f64,
    /// Herald read-out efficiency.
    #[arg(long, default_value_t = 1.0)]
    read_eff: f64,
    /// Herald dark-count probability per attempt.
    #[arg(long, default_value_t = 0.0)]
    dark_count: f64,
    /// Use an on/off (threshold) herald instead of a number-resolving one.
    #[arg(long)]
    threshold_detector: bool,
    #[arg(long, value_enum, default_value = "exact")]
    mode: ModelArg,
}

fn parse_complex(s: &str) -> Result<ComplexAmplitude, String> {
    let mut parts = s.split(',');
    let mut next = |what: &str| -> Result<f64, String> {
        match parts.next() {
            None => Ok(0.0),
            Some(p) => p.trim().parse().map_err(|_| format!("{what} part `{}` is not a number", p.trim())),
        }
    };
    let re = next("real")?;
    let im = next("imaginary")?;
    if parts.next().is_some() {
        return Err("expected RE or RE,IM".into());
    }
    ComplexAmplitude::new(re, im).map_err(|e| e.to_string())
}

impl ProtocolArgs {
    fn config(&self, grid_t: Option<f64>) -> Result<(ProtocolConfig, Model), Failure> {
        let t = self.t.or(grid_t).ok_or_else(|| Failure::invalid("missing --t"))?;
        let herald = protocol_herald(self.read_eff, self.dark_count, !self.threshold_detector)?;
        let config = ProtocolConfig {
            alpha: self.alpha,
            t,
            cutoff: self.cutoff,
            input_kind: match self.input {
                InputArg::Truncated => InputKind::Truncated,
                InputArg::Coherent => InputKind::Coherent,
            },
            source_efficiency: self.source_eff,
            herald,
        };
        config.validate()?;
        let model = match self.mode {
            ModelArg::Exact => Model::Exact,
            ModelArg::FirstOrder => Model::FirstOrder,
        };
        Ok((config, model))
    }
}

#[derive(Serialize)]
struct ProtocolParameters {
    config: ProtocolConfig,
    mode: Model,
}

/// Error reported on standard error, with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Self { code: EXIT_INVALID, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Truncation { .. } => EXIT_TRUNCATION,
            Error::ImpossibleOutcome { .. } => EXIT_IMPOSSIBLE,
            _ => EXIT_INVALID,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self { code: EXIT_IO, message: format!("io: {e}") }
    }
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure { code: EXIT_IO, message: format!("io: {}: {e}", path.display()) })
}

fn cmd_protocol(args: &ProtocolArgs) -> Result<(), Failure> {
    let (config, model) = args.config(None)?;
    let result = run(&config, model)?;
    let manifest = RunManifest::new("protocol", &ProtocolParameters { config, mode: model }, None, vec![]);
    emit(None, &(to_json(&Document { manifest: &manifest, result: &result }) + "\n"))?;
    Ok(())
}

#[derive(Serialize)]
struct SweepParameters {
    base: ProtocolConfig,
    mode: Model,
    grid: Vec<(&'static str, Vec<f64>)>,
}

fn cmd_sweep(base: &ProtocolArgs, grid_path: &PathBuf, out: Option<&PathBuf>) -> Result<(), Failure> {
    let grid = grid::parse_grid(&read(grid_path)?).map_err(|e| Failure::invalid(e.to_string()))?;
    let grid_t = grid.axes().iter().find_map(|(axis, values)| match axis {
        Axis::T => Some(values[0]),
        Axis::InvT => Some(1.0 / values[0]),
        _ => None,
    });
    let (config, model) = base.config(grid_t)?;
    let rows = sweep(&config, &grid, model);
    let params = SweepParameters {
        base: config,
        mode: model,
        grid: grid.axes().iter().map(|(a, v)| (a.name(), v.clone())).collect(),
    };
    let outputs = out.map(|p| vec![display_path(p)]).unwrap_or_default();
    let manifest = RunManifest::new("sweep", &params, None, outputs);
    let table = csv_table(
        &ResultRow::COLUMNS,
        rows.iter().map(|r| {
            let r = ResultRow::from(r);
            vec![
                format_f64(r.alpha_re),
                format_f64(r.alpha_im),
                format_f64(r.t),
                format_f64(r.p1),
                format_f64(r.eta_r),
                format_f64(r.p_d),
                r.cutoff.to_string(),
                opt_f64(r.success_prob),
                opt_f64(r.gain),
                opt_f64(r.fidelity),
                format_f64(r.leading_p),
                format_f64(r.leading_gain),
                r.error_code,
            ]
        }),
    )?;
    emit(out, &(manifest.csv_comment() + &table))?;
    Ok(())
}

#[derive(Serialize)]
struct EnsembleParameters {
    n_atoms: u64,
    epsilon: ComplexAmplitude,
    cutoff: usize,
}

#[derive(Serialize)]
struct EnsembleReport {
    alpha: ComplexAmplitude,
    k_max: usize,
    tail_mass: f64,
    dicke_coherent_fidelity: f64,
    commutator_deviation: f64,
    jx: f64,
    jy: f64,
    jz: f64,
    var_x: f64,
    var_p: f64,
}

fn cmd_ensemble(n_atoms: u64, epsilon: ComplexAmplitude, cutoff: usize) -> Result<(), Failure> {
    let spec = EnsembleSpec::new(n_atoms, epsilon)?;
    if cutoff < 1 {
        return Err(Failure::invalid("validation: cutoff must be at least 1"));
    }
    let k_max = default_k_max(&spec, cutoff);
    let dicke = rotated_product_state(&spec, k_max)?;
    let e = collective_expectations(&dicke);
    let report = EnsembleReport {
        alpha: spec.alpha(),
        k_max,
        tail_mass: dicke.tail_mass(),
        dicke_coherent_fidelity: dicke_coherent_fidelity(&spec, cutoff)?,
        commutator_deviation: e.commutator_deviation,
        jx: e.jx,
        jy: e.jy,
        jz: e.jz,
        var_x: e.var_x,
        var_p: e.var_p,
    };
    let manifest = RunManifest::new("ensemble", &EnsembleParameters { n_atoms, epsilon, cutoff }, None, vec![]);
    emit(None, &(to_json(&Document { manifest: &manifest, result: &report }) + "\n"))?;
    Ok(())
}

fn cmd_campaign(
    config_path: &PathBuf,
    seed: u64,
    out: Option<&PathBuf>,
    runs_csv: Option<&PathBuf>,
) -> Result<(), Failure> {
    let config = config::parse_campaign(&read(config_path)?, seed)
        .map_err(|m| Failure::invalid(format!("{}: {m}", config_path.display())))?;
    let mut outputs: Vec<String> = out.iter().map(|p| display_path(p)).collect();
    outputs.extend(runs_csv.map(|p| display_path(p)));
    let manifest = RunManifest::new("campaign", &config, Some(seed), outputs);
    let summary = match runs_csv {
        None => run_campaign(&config)?,
        Some(path) => {
            let (summary, records) = run_campaign_recorded(&config)?;
            let table = csv_table(
                &["replica", "attempt_index", "heralded", "x_sample", "noise_value"],
                records.iter().map(|r| {
                    vec![
                        r.replica.to_string(),
                        r.attempt_index.to_string(),
                        r.heralded.to_string(),
                        opt_f64(r.x_sample),
                        format_f64(r.noise_value),
                    ]
                }),
            )?;
            fs::write(path, manifest.csv_comment() + &table)?;
            summary
        }
    };
    emit(out, &(to_json(&Document { manifest: &manifest, result: &summary }) + "\n"))?;
    Ok(())
}

fn cmd_validate(fault: Option<Fault>) -> Result<(), Failure> {
    let faults = Faults { flip_bs_sign: matches!(fault, Some(Fault::BsSign)) };
    let report = run_validation(faults)?;
    let mut table = format!("{:<30} {:>24} {:>10}  {}\n", "check", "deviation", "tolerance", "status");
    for c in &report.checks {
        let status = if c.passed { "ok" } else { "FAIL" };
        table += &format!("{:<30} {:>24} {:>10.0e}  {status}\n", c.name, format_f64(c.value), c.tolerance);
    }
    emit(None, &table)?;
    let failed: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure { code: EXIT_SUITE_FAILED, message: format!("failed checks: {}", failed.join(", ")) })
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("HAL_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::invalid(format!("HAL_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::invalid(format!("HAL_THREADS: {e}")))
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    match &cli.command {
        Command::Protocol(args) => cmd_protocol(args),
        Command::Sweep { base, grid, out } => cmd_sweep(base, grid, out.as_ref()),
        Command::Ensemble { n_atoms, epsilon, cutoff } => cmd_ensemble(*n_atoms, *epsilon, *cutoff),
        Command::Campaign { config, seed, out, runs_csv } => {
            cmd_campaign(config, *seed, out.as_ref(), runs_csv.as_ref())
        }
        Command::Validate { inject_fault } => cmd_validate(*inject_fault),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("hal: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
