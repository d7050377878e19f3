use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fdouglas::config::RunConfig;
use fdouglas::report::{emit, Format, VerificationReport};
use fdouglas::suite::{deform_report, generate, oracle_report, phi_report, run_suite};
use fdouglas::{Error, Result};

#[derive(Parser)]
#[command(name = "fdouglas", version, about = "Verify Douglas curvature of (alpha,beta)-metric families")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand)]
enum Command {
    /// Run the checks selected in the config against its family.
    Verify,
    /// ODE residual sweeps and family evaluation for the profile.
    Phi,
    /// Apply deformation factors and report round-trip errors.
    Deform,
    /// Dump the family's fields at the sampled points as JSON.
    Generate,
    /// AD against finite differences and closed-form eta against quadrature.
    Oracle,
}

#[derive(Args)]
struct Opts {
    /// JSON run config; defaults describe Berwald's metric at n = 3.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Text)]
    format: OutFormat,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Text,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Format {
        match f {
            OutFormat::Json => Format::Json,
            OutFormat::Text => Format::Text,
        }
    }
}

fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("FDOUGLAS_THREADS") else {
        return Ok(());
    };
    let n: usize = match v.trim().parse() {
        Ok(n) if n > 0 => n,
        _ => {
            return Err(Error::Config {
                fields: vec![format!("FDOUGLAS_THREADS: expected a positive integer, got {v:?}")],
            })
        }
    };
    // Fails only if a pool already exists, which cannot happen this early.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn load(opts: &Opts) -> Result<RunConfig> {
    let mut cfg = match &opts.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = opts.seed {
        cfg.seed = s;
    }
    if let Some(n) = opts.samples {
        cfg.samples = n;
    }
    if let Some(t) = opts.tol {
        cfg.tol = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_out(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn report(r: &VerificationReport, opts: &Opts) -> Result<bool> {
    match &opts.out {
        Some(path) => emit(r, opts.format.into(), path)?,
        None => write_out(&r.render(opts.format.into())?, None)?,
    }
    Ok(r.all_pass())
}

fn run(cli: &Cli) -> Result<bool> {
    init_threads()?;
    let cfg = load(&cli.opts)?;
    match cli.command {
        Command::Verify => report(&run_suite(&cfg)?, &cli.opts),
        Command::Phi => report(&phi_report(&cfg)?, &cli.opts),
        Command::Deform => report(&deform_report(&cfg)?, &cli.opts),
        Command::Oracle => report(&oracle_report(&cfg)?, &cli.opts),
        Command::Generate => {
            let v = generate(&cfg)?;
            let text = serde_json::to_string_pretty(&v).map_err(Error::Json)? + "\n";
            write_out(&text, cli.opts.out.as_deref())?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
