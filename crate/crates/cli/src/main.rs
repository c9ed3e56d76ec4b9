//! `bdg` — experiment runner for the exact-engine and Monte Carlo
//! verification suites.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use bdg_core::calculus::total_variation;
use bdg_core::davis::{certify, davis_decompose, DavisCertificate};
use bdg_core::prob_space::{generate_martingale, JumpLaw, MartingaleSpec};
use bdg_core::report::{to_csv_string, to_json_string};
use bdg_core::serialize::SpaceFile;
use bdg_core::{run_all, EngineError, ExperimentConfig, OutputFormat};

#[derive(Parser)]
#[command(name = "bdg", version, about = "Martingale inequality verification suites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites and emit a pass/fail report.
    Run(RunArgs),
    /// Generate a martingale, Davis-decompose it, and dump the quadruple
    /// with its certificate as JSON.
    Davis(DavisArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config; defaults apply for every omitted field.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Suite to run (repeatable); overrides the config's suite list.
    #[arg(long = "suite")]
    suites: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Report destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Comma-separated exponents overriding the config's p sweep.
    #[arg(long, value_delimiter = ',')]
    p: Vec<f64>,
}

#[derive(Args)]
struct DavisArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    branching: usize,
    #[arg(long, default_value_t = 6)]
    horizon: usize,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// One of: rademacher, centered_uniform, heavy_tail_truncated,
    /// poisson_compensated.
    #[arg(long, default_value = "centered_uniform")]
    jump_law: String,
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn exit_code(e: &EngineError) -> u8 {
    match e {
        EngineError::Capacity(_) => 3,
        EngineError::Io(_) | EngineError::Csv(_) => 4,
        _ => 2,
    }
}

fn load_config(args: &RunArgs) -> Result<ExperimentConfig, EngineError> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_json(&fs::read_to_string(path)?)?,
        None => ExperimentConfig::default(),
    };
    if !args.suites.is_empty() {
        cfg.suites = args.suites.clone();
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if !args.p.is_empty() {
        cfg.p_values = args.p.clone();
    }
    if let Some(out) = &args.out {
        cfg.output = Some(out.display().to_string());
    }
    if let Some(fmt) = args.format {
        cfg.format = match fmt {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        };
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(args: &RunArgs) -> Result<bool, EngineError> {
    let cfg = load_config(args)?;
    let rows = run_all(&cfg)?;
    let rendered = match cfg.format {
        OutputFormat::Csv => to_csv_string(&rows)?,
        OutputFormat::Json => to_json_string(&rows)?,
    };
    match &cfg.output {
        Some(path) => fs::write(path, &rendered)?,
        None => print!("{rendered}"),
    }
    let failing: Vec<_> = rows.iter().filter(|r| !r.pass).collect();
    eprintln!(
        "{} rows, {} failing",
        rows.len(),
        failing.len()
    );
    for row in &failing {
        eprintln!(
            "FAIL {} [{}] p={} lhs={} rhs={} ratio={}",
            row.name, row.family, row.p, row.lhs, row.rhs, row.ratio
        );
    }
    Ok(failing.is_empty())
}

#[derive(serde::Serialize)]
struct DavisDump {
    spec: MartingaleSpec,
    space: SpaceFile,
    certificate: DavisCertificate,
}

fn davis(args: &DavisArgs) -> Result<bool, EngineError> {
    let jump_law: JumpLaw = serde_json::from_value(serde_json::Value::String(
        args.jump_law.clone(),
    ))
    .map_err(|_| EngineError::Config(format!("unknown jump law {:?}", args.jump_law)))?;
    let spec = MartingaleSpec {
        seed: args.seed,
        branching: args.branching,
        horizon: args.horizon,
        dim: args.dim,
        jump_law,
        scale: args.scale,
    };
    let (space, m) = generate_martingale(&spec)?;
    let dd = davis_decompose(&space, &m)?;
    let cert = certify(&space, &m, &dd);
    let s = dd.s.to_process(&space)?;
    let dump = DavisDump {
        spec,
        space: SpaceFile::from_parts(
            &space,
            &[
                ("m", &m),
                ("l", &dd.l),
                ("k", &dd.k),
                ("k1", &dd.k1),
                ("k2", &dd.k2),
                ("s", &s),
                ("tv_k", &total_variation(&dd.k).to_process(&space)?),
            ],
        ),
        certificate: cert,
    };
    let text = serde_json::to_string_pretty(&dump).map_err(EngineError::Json)?;
    match &args.out {
        Some(path) => fs::write(path, text)?,
        None => println!("{text}"),
    }
    Ok(cert.ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(args) => run(args),
        Command::Davis(args) => davis(args),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
