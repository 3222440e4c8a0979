//! `gmc`: sweeps, nodal verification, pole reports and filter-bank features.
//!
//! Exit codes: 0 success, 1 verification or processing failure, 2 usage error.

mod si;
mod topology_args;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gmc::analysis::{sweep_netlist, sweep_tf, FrequencyGrid, Spacing};
use gmc::filterbank::{run_bank, BankConfig, Prototype};
use gmc::scalar::rad_to_hz;
use gmc::topology::{TopologyKind, FAMILIES};
use gmc::verify::verify_preset;
use gmc::wav::read_wav;
use gmc::Error;

use topology_args::{build_bundle, pole_source, ElementArgs, PrototypeArgs};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

fn failure(e: impl std::fmt::Display) -> CliError {
    CliError::Failure(e.to_string())
}

#[derive(Parser, Debug)]
#[command(
    name = "gmc",
    version,
    about = "gm-C filter models, nodal verification and filter-bank features"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Frequency response of one topology output as CSV.
    Response(ResponseArgs),
    /// Closed form against nodal solution for the reference presets.
    Verify(VerifyArgs),
    /// Poles, natural frequency and Q.
    Poles(PolesArgs),
    /// Write a filter-bank description as JSON.
    BankDesign(BankDesignArgs),
    /// Run a WAV file through a filter bank and write envelope features.
    BankRun(BankRunArgs),
}

#[derive(Args, Debug)]
struct GridArgs {
    #[arg(long, default_value = "1", value_parser = si::parse_positive)]
    f_start: f64,
    #[arg(long, default_value = "1M", value_parser = si::parse_positive)]
    f_stop: f64,
    #[arg(long, default_value_t = 512)]
    points: usize,
    #[arg(long, value_enum, default_value_t = SpacingArg::Log)]
    spacing: SpacingArg,
}

impl GridArgs {
    fn grid(&self) -> Result<FrequencyGrid<f64>, CliError> {
        let grid = FrequencyGrid {
            f_start: self.f_start,
            f_stop: self.f_stop,
            points: self.points,
            spacing: match self.spacing {
                SpacingArg::Log => Spacing::Log,
                SpacingArg::Linear => Spacing::Linear,
            },
        };
        grid.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(grid)
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SpacingArg {
    Log,
    Linear,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Engine {
    Closed,
    Mna,
}

#[derive(Args, Debug)]
struct ResponseArgs {
    #[command(flatten)]
    elements: ElementArgs,
    /// Output label; defaults to the topology's main output.
    #[arg(long)]
    probe: Option<String>,
    #[arg(long, value_enum, default_value_t = Engine::Closed)]
    engine: Engine,
    #[command(flatten)]
    grid: GridArgs,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Topology name, `ssf-I` style label, or `all`.
    #[arg(long, default_value = "all")]
    topology: String,
    #[arg(long, default_value = "1e-9", value_parser = si::parse)]
    tol: f64,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Args, Debug)]
struct PolesArgs {
    #[command(flatten)]
    elements: ElementArgs,
    #[command(flatten)]
    proto: PrototypeArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PrototypeArg {
    EqualPoleBpf,
    TwoPoleBpf,
}

#[derive(Args, Debug)]
struct BankDesignArgs {
    #[arg(long, default_value_t = 16)]
    channels: usize,
    #[arg(long, default_value = "100", value_parser = si::parse_positive)]
    f_lo: f64,
    #[arg(long, default_value = "8k", value_parser = si::parse_positive)]
    f_hi: f64,
    #[arg(long, default_value = "2", value_parser = si::parse_positive)]
    q: f64,
    #[arg(long, value_enum, default_value_t = PrototypeArg::EqualPoleBpf)]
    prototype: PrototypeArg,
    /// Sample rate the bank is designed for.
    #[arg(long, default_value = "22.05k", value_parser = si::parse_positive)]
    fs: f64,
    #[arg(long, default_value = "25", value_parser = si::parse_positive)]
    smooth_hz: f64,
    #[arg(long, default_value = "100", value_parser = si::parse_positive)]
    frame_rate: f64,
    #[arg(long)]
    log_compress: bool,
    /// Scale each channel to unit gain at its center frequency.
    #[arg(long)]
    normalize_peak: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BankRunArgs {
    #[arg(long)]
    bank: PathBuf,
    #[arg(long)]
    wav: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Writes to `path` through a temporary file in the same directory, or to
/// standard output.
fn emit(path: Option<&Path>, contents: &str) -> Result<(), CliError> {
    let Some(path) = path else {
        let mut stdout = std::io::stdout().lock();
        return stdout
            .write_all(contents.as_bytes())
            .and_then(|_| stdout.flush())
            .map_err(failure);
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let write = || -> std::io::Result<()> {
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        tmp.write_all(contents.as_bytes())?;
        tmp.as_file().sync_all()?;
        tmp.persist(path).map_err(|e| e.error)?;
        Ok(())
    };
    write().map_err(|e| CliError::Failure(format!("cannot write {}: {e}", path.display())))
}

fn warn_all(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn cmd_response(args: &ResponseArgs) -> Result<(), CliError> {
    let bundle = build_bundle(&args.elements)?;
    let grid = args.grid.grid()?;
    let probe = args.probe.clone().unwrap_or_else(|| bundle.primary_probe.to_owned());
    bundle
        .netlist
        .probe(&probe)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let resp = match args.engine {
        Engine::Closed => {
            let tf = bundle
                .closed_forms
                .get(&probe)
                .ok_or_else(|| CliError::Usage(format!("probe `{probe}` has no closed form; use --engine mna")))?;
            sweep_tf(tf, &grid)
        }
        Engine::Mna => sweep_netlist(&bundle.netlist, &probe, &grid),
    }
    .map_err(failure)?;
    warn_all(&bundle.warnings);
    emit(args.out.as_deref(), &resp.to_csv())
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), CliError> {
    if args.tol <= 0.0 {
        return Err(CliError::Usage(format!("--tol must be positive, got {}", args.tol)));
    }
    let kinds: Vec<TopologyKind> = match args.topology.as_str() {
        "all" => TopologyKind::ALL.to_vec(),
        name => {
            let mut k = TopologyKind::of_family(name);
            if k.is_empty() {
                k.extend(TopologyKind::ALL.into_iter().filter(|k| k.label() == name));
            }
            if k.is_empty() {
                return Err(CliError::Usage(format!(
                    "unknown topology `{name}` (expected all or one of: {})",
                    FAMILIES.join(", ")
                )));
            }
            k
        }
    };
    let grid = args.grid.grid()?;
    let mut report = String::new();
    let mut exceeded = Vec::new();
    for kind in kinds {
        let (worst, checks) = verify_preset::<f64>(kind, &grid).map_err(failure)?;
        let ok = worst <= args.tol;
        let probes: Vec<String> = checks
            .iter()
            .map(|c| format!("{}={:.3e}", c.probe, c.max_rel_err))
            .collect();
        let _ = writeln!(
            report,
            "{:<10} {:<4} max_rel_err={:.3e} [{}]",
            kind.label(),
            if ok { "ok" } else { "FAIL" },
            worst,
            probes.join(" ")
        );
        if !ok {
            exceeded.push(kind.label());
        }
    }
    emit(None, &report)?;
    if exceeded.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failure(format!(
            "tolerance {:e} exceeded by: {}",
            args.tol,
            exceeded.join(", ")
        )))
    }
}

fn cmd_poles(args: &PolesArgs) -> Result<(), CliError> {
    let src = pole_source(&args.elements, &args.proto)?;
    let poles = src.tf.poles().map_err(failure)?;
    let q = src.q.map_or_else(|| "n/a".to_owned(), |q| q.to_string());
    let f0 = rad_to_hz(src.omega0);
    let mut out = String::new();
    match args.format {
        Format::Text => {
            let _ = writeln!(out, "topology: {}", src.name);
            let _ = writeln!(out, "f0_hz: {f0}");
            let _ = writeln!(out, "omega0_rad_s: {}", src.omega0);
            let _ = writeln!(out, "q: {q}");
            for p in &poles {
                let sign = if p.im < 0.0 { '-' } else { '+' };
                let _ = writeln!(out, "pole: {} {sign} {}j", p.re, p.im.abs());
            }
        }
        Format::Csv => {
            let _ = writeln!(out, "topology,f0_hz,omega0_rad_s,q,pole_re,pole_im");
            for p in &poles {
                let _ = writeln!(out, "{},{f0},{},{q},{},{}", src.name, src.omega0, p.re, p.im);
            }
        }
    }
    warn_all(&src.warnings);
    emit(args.out.as_deref(), &out)
}

fn cmd_bank_design(args: &BankDesignArgs) -> Result<(), CliError> {
    let cfg = BankConfig {
        channels: args.channels,
        f_lo_hz: args.f_lo,
        f_hi_hz: args.f_hi,
        q: args.q,
        prototype: match args.prototype {
            PrototypeArg::EqualPoleBpf => Prototype::EqualPoleBpf,
            PrototypeArg::TwoPoleBpf => Prototype::TwoPoleBpf,
        },
        fs_hz: args.fs,
        smooth_hz: args.smooth_hz,
        frame_rate_hz: args.frame_rate,
        log_compress: args.log_compress,
        normalize_peak: args.normalize_peak,
    };
    cfg.validate().map_err(|e| match e {
        Error::InvalidParameter { .. } => CliError::Usage(e.to_string()),
        e => failure(e),
    })?;
    let mut json = serde_json::to_string_pretty(&cfg).map_err(failure)?;
    json.push('\n');
    emit(args.out.as_deref(), &json)
}

fn cmd_bank_run(args: &BankRunArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.bank)
        .map_err(|e| CliError::Failure(format!("cannot read {}: {e}", args.bank.display())))?;
    let mut cfg: BankConfig =
        serde_json::from_str(&text).map_err(|e| CliError::Failure(format!("{}: {e}", args.bank.display())))?;
    let wav = read_wav::<f64>(&args.wav).map_err(|e| CliError::Failure(format!("{}: {e}", args.wav.display())))?;
    let fs = f64::from(wav.sample_rate);
    if fs != cfg.fs_hz {
        eprintln!(
            "warning: bank designed for {} Hz, WAV is {} Hz; channels are re-discretized at {} Hz",
            cfg.fs_hz, fs, fs
        );
        cfg.fs_hz = fs;
    }
    let bank = cfg.discretize().map_err(failure)?;
    let feats = run_bank(&bank, &wav.samples, fs, &cfg.envelope()).map_err(failure)?;
    emit(args.out.as_deref(), &feats.to_csv())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Response(a) => cmd_response(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Poles(a) => cmd_poles(a),
        Command::BankDesign(a) => cmd_bank_design(a),
        Command::BankRun(a) => cmd_bank_run(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (CliError::Usage(msg) | CliError::Failure(msg)) = &e;
            eprintln!("error: {msg}");
            ExitCode::from(e.code())
        }
    }
}
