//! `nbs`: η-sweeps of Mandel Q and the X₂ variance, photon-number
//! distributions, generation-protocol reports and a one-shot self-check.
//!
//! Exit codes: 0 success, 1 domain or configuration error, 2 numerical
//! contract failure, 3 I/O error.

mod config;

use std::f64::consts::{FRAC_PI_2, PI};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use nbs_core::generation::{dispersive_protocol, fidelity, kerr_evolve, DispersiveParams, KerrParams};
use nbs_core::special::quarter_turns;
use nbs_core::states::{nbs, superposition};
use nbs_core::sweep::{fig1, fig2, pn_rows, write_pn_csv, write_sweep_csv, EtaGrid, SweepConfig};
use nbs_core::verify::{run_suite, VerifyOptions};
use nbs_core::{FockVector, NbsError, NbsParams, TruncationPolicy};

use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Domain(NbsError),
    #[error("config: {0}")]
    Config(String),
    #[error("numerical contract failed: {0}")]
    Contract(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Domain(_) | CliError::Config(_) => 1,
            CliError::Contract(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<NbsError> for CliError {
    fn from(e: NbsError) -> Self {
        match e {
            NbsError::TruncationOverflow { .. } | NbsError::HardCapExceeded { .. } | NbsError::NonConvergence { .. } => {
                CliError::Contract(e.to_string())
            }
            e => CliError::Domain(e),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "nbs", version, about = "Superpositions of negative binomial states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Mandel Q against η (M = 30, φ ∈ {0, π/2, 3π/4, π} by default)
    Fig1(SweepArgs),
    /// ⟨ΔX₂²⟩ against η (M = 50, same phases by default)
    Fig2(SweepArgs),
    /// Photon-number distribution P(n) of one superposition
    Pn(StateArgs),
    /// Simulate a preparation protocol and report the output state as JSON
    Generate(GenerateArgs),
    /// Run the invariant suite
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    #[arg(long = "M")]
    m: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    /// Truncation tail tolerance
    #[arg(long, allow_hyphen_values = true)]
    tolerance: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated superposition phases
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    phi: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    grid_step: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    eta_start: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    eta_stop: Option<f64>,
}

#[derive(Args, Debug)]
struct StateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, allow_hyphen_values = true)]
    eta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Protocol {
    Kerr,
    Dispersive,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    protocol: Protocol,
    #[command(flatten)]
    state: StateArgs,
    #[arg(long, allow_hyphen_values = true)]
    g1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    g2: Option<f64>,
    /// Interaction time; defaults to π/(2 g1) (kerr) or π/g2 (dispersive)
    #[arg(long, allow_hyphen_values = true)]
    t: Option<f64>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Replace every check tolerance with this value
    #[arg(long, allow_hyphen_values = true)]
    tolerance: Option<f64>,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn load(path: &Option<PathBuf>) -> Result<RunConfig, CliError> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn open_out(path: Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => {
            let f = File::create(&p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            Box::new(BufWriter::new(f))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn policy(tolerance: Option<f64>, cfg: &RunConfig) -> Result<TruncationPolicy, CliError> {
    let mut p = TruncationPolicy::default();
    if let Some(t) = tolerance.or(cfg.tolerance) {
        p.tail_tolerance = t;
    }
    if let Some(cap) = cfg.hard_cap {
        p.hard_cap = cap;
    }
    p.validate()?;
    Ok(p)
}

fn run_sweep(args: SweepArgs, base: SweepConfig, second: bool) -> Result<(), CliError> {
    let cfg = load(&args.common.config)?;
    let defaults = EtaGrid::default();
    let config = SweepConfig {
        m: args.common.m.or(cfg.m).unwrap_or(base.m),
        theta: args.common.theta.or(cfg.theta).unwrap_or(base.theta),
        phis: args.phi.or(cfg.phi.map(|p| p.into_vec())).unwrap_or(base.phis),
        grid: EtaGrid {
            start: args.eta_start.or(cfg.eta_start).unwrap_or(defaults.start),
            stop: args.eta_stop.or(cfg.eta_stop).unwrap_or(defaults.stop),
            step: args.grid_step.or(cfg.grid_step).unwrap_or(defaults.step),
        },
    };
    let records = if second { fig2(&config)? } else { fig1(&config)? };
    let out = open_out(args.common.out.or(cfg.out))?;
    write_sweep_csv(&records, out)?;
    Ok(())
}

fn state_params(args: &StateArgs, cfg: &RunConfig) -> Result<NbsParams, CliError> {
    let phi = match (&args.phi, &cfg.phi) {
        (Some(p), _) => *p,
        (None, Some(list)) => match list.clone().into_vec().as_slice() {
            [p] => *p,
            _ => return Err(CliError::Config("phi must be a single value for this command".into())),
        },
        (None, None) => FRAC_PI_2,
    };
    let m = args.common.m.or(cfg.m).unwrap_or(30);
    let eta = args.eta.or(cfg.eta).unwrap_or(0.3);
    let theta = args.common.theta.or(cfg.theta).unwrap_or(0.0);
    Ok(NbsParams::new(m, eta, theta, phi)?)
}

fn run_pn(args: StateArgs) -> Result<(), CliError> {
    let cfg = load(&args.common.config)?;
    let params = state_params(&args, &cfg)?;
    let rows = pn_rows(&params, &policy(args.common.tolerance, &cfg)?)?;
    let total: f64 = rows.iter().map(|r| r.1).sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(CliError::Contract(format!("P(n) sums to {total}")));
    }
    write_pn_csv(&rows, open_out(args.common.out.or(cfg.out))?)?;
    Ok(())
}

/// Number of leading amplitudes echoed in the generation report.
const REPORT_AMPLITUDES: usize = 20;
const FIDELITY_CONTRACT: f64 = 1e-10;

#[derive(Serialize)]
struct GenerateReport {
    protocol: Protocol,
    params: NbsParams,
    coupling: f64,
    t: f64,
    /// `|⟨output|target⟩|`, target being the superposition the protocol
    /// is designed to produce.
    fidelity: f64,
    /// Whether `t` is the time at which the protocol is meant to hit the target.
    at_target_time: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    success_prob_g: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    success_prob_e: Option<f64>,
    n_max: usize,
    amplitudes: Vec<[f64; 2]>,
}

fn leading(v: &FockVector) -> Vec<[f64; 2]> {
    v.amplitudes().iter().take(REPORT_AMPLITUDES).map(|c| [c.re, c.im]).collect()
}

fn run_generate(args: GenerateArgs) -> Result<(), CliError> {
    let cfg = load(&args.state.common.config)?;
    let policy = policy(args.state.common.tolerance, &cfg)?;
    let params = state_params(&args.state, &cfg)?;

    let report = match args.protocol {
        Protocol::Kerr => {
            let g1 = args.g1.or(cfg.g1).unwrap_or(1.0);
            let t = args.t.or(cfg.t).unwrap_or(FRAC_PI_2 / g1);
            let k = KerrParams::new(g1, t)?;
            let out = kerr_evolve(&nbs(&params, &policy)?, &k);
            let target = superposition(&params.with_phi(FRAC_PI_2), &policy)?.resized(out.n_max());
            GenerateReport {
                protocol: args.protocol,
                params,
                coupling: g1,
                t,
                fidelity: fidelity(&out, &target)?,
                at_target_time: quarter_turns(g1 * t).is_some_and(|q| q.rem_euclid(4) == 1),
                success_prob_g: None,
                success_prob_e: None,
                n_max: out.n_max(),
                amplitudes: leading(&out),
            }
        }
        Protocol::Dispersive => {
            let g2 = args.g2.or(cfg.g2).unwrap_or(1.0);
            let t = args.t.or(cfg.t).unwrap_or(PI / g2);
            let d = DispersiveParams::new(g2, t, params.phi)?;
            let out = dispersive_protocol(&params, &d, &policy)?;
            let target = superposition(&params, &policy)?.resized(out.projected_g.n_max());
            GenerateReport {
                protocol: args.protocol,
                params,
                coupling: g2,
                t,
                fidelity: fidelity(&out.projected_g, &target)?,
                at_target_time: quarter_turns(g2 * t).is_some_and(|q| q.rem_euclid(4) == 2),
                success_prob_g: Some(out.success_prob_g),
                success_prob_e: Some(out.success_prob_e),
                n_max: out.projected_g.n_max(),
                amplitudes: leading(&out.projected_g),
            }
        }
    };

    let mut w = open_out(args.state.common.out.or(cfg.out))?;
    serde_json::to_writer_pretty(&mut w, &report).map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;

    if report.at_target_time && 1.0 - report.fidelity > FIDELITY_CONTRACT {
        return Err(CliError::Contract(format!("fidelity {} below 1 - {FIDELITY_CONTRACT:e}", report.fidelity)));
    }
    if let (Some(pg), Some(pe)) = (report.success_prob_g, report.success_prob_e) {
        if (pg + pe - 1.0).abs() > 1e-12 {
            return Err(CliError::Contract(format!("branch probabilities sum to {}", pg + pe)));
        }
    }
    Ok(())
}

fn run_verify(args: VerifyArgs) -> Result<(), CliError> {
    let cfg = load(&args.config)?;
    let options = VerifyOptions { tolerance_override: args.tolerance.or(cfg.tolerance) };
    let report = run_suite(&options);
    let mut w = open_out(args.out.or(cfg.out))?;
    if args.json {
        serde_json::to_writer_pretty(&mut w, &report).map_err(|e| CliError::Io(e.to_string()))?;
        writeln!(w)?;
    } else {
        writeln!(w, "{report}")?;
    }
    w.flush()?;
    if !report.passed {
        let names: Vec<_> = report.failures().map(|c| c.name).collect();
        return Err(CliError::Contract(format!("failed checks: {}", names.join(", "))));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Fig1(a) => run_sweep(a, SweepConfig::fig1(), false),
        Command::Fig2(a) => run_sweep(a, SweepConfig::fig2(), true),
        Command::Pn(a) => run_pn(a),
        Command::Generate(a) => run_generate(a),
        Command::Verify(a) => run_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nbs: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
