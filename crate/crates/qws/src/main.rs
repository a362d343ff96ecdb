mod commands;
mod config;
mod errors;
mod output;
mod svg;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::RunContext;
use config::{apply_overrides, canonical_json, config_sha256, parse_config, BoundaryChoice};
use errors::{CliError, Result};
use qw_core::defects::DefectSign;

#[derive(Parser)]
#[command(
    name = "qws",
    version,
    about = "Quantum walks on the line: simulate, diagonalize, and hunt embedded eigenvalues"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the initial state, writing per-step distributions
    Simulate(RunArgs),
    /// Diagonalize the truncated walk and classify its eigenvalues
    Spectrum(RunArgs),
    /// Essential-spectrum arcs and threshold phases (JSON)
    Bands(RunArgs),
    /// |dispersion polynomial| on a uniform momentum/phase grid
    Dispersion(RunArgs),
    /// Build a trapped defect eigenfunction and verify the eigenpair
    Eigenfunction(EigenArgs),
    /// Decide whether the coin field hosts edge defects
    Detect(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration (JSON file)
    #[arg(long)]
    config: PathBuf,
    /// Override output.dir
    #[arg(long)]
    out: Option<String>,
    /// Override the perturbation seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override window.l (truncation half-width)
    #[arg(long)]
    window: Option<i64>,
    /// Override the boundary condition
    #[arg(long, value_enum)]
    boundary: Option<BoundaryArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundaryArg {
    Periodic,
    Truncate,
    Padded,
}

impl BoundaryArg {
    fn to_choice(self) -> BoundaryChoice {
        match self {
            BoundaryArg::Periodic => BoundaryChoice::Periodic,
            BoundaryArg::Truncate => BoundaryChoice::Truncate,
            BoundaryArg::Padded => BoundaryChoice::Padded,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SignArg {
    Plus,
    Minus,
}

#[derive(Args)]
struct EigenArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Which trapped eigenvalue to build: plus or minus
    #[arg(long, value_enum, default_value_t = SignArg::Plus)]
    sign: SignArg,
}

fn context(args: &RunArgs) -> Result<RunContext> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| CliError::io(&args.config, e))?;
    let mut cfg = parse_config(&text)?;
    apply_overrides(
        &mut cfg,
        &config::Overrides {
            out: args.out.clone(),
            seed: args.seed,
            window: args.window,
            boundary: args.boundary.map(BoundaryArg::to_choice),
        },
    );
    cfg.validate()?;
    let canonical = canonical_json(&cfg);
    let sha = config_sha256(&cfg);
    let out_dir = PathBuf::from(&cfg.output.dir);
    std::fs::create_dir_all(&out_dir).map_err(|e| CliError::io(&out_dir, e))?;
    // the resolved config (defaults made explicit) always accompanies results
    output::write_atomic(&out_dir.join("resolved_config.json"), canonical.as_bytes())?;
    Ok(RunContext { cfg, sha, out_dir })
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Simulate(a) => commands::simulate(&context(a)?),
        Command::Spectrum(a) => commands::spectrum(&context(a)?),
        Command::Bands(a) => commands::bands(&context(a)?),
        Command::Dispersion(a) => commands::dispersion_grid(&context(a)?),
        Command::Eigenfunction(e) => {
            let sign = match e.sign {
                SignArg::Plus => DefectSign::Plus,
                SignArg::Minus => DefectSign::Minus,
            };
            commands::eigenfunction(&context(&e.run)?, sign)
        }
        Command::Detect(a) => commands::detect(&context(a)?),
    }
}

fn main() {
    // QWS_THREADS caps BLAS worker parallelism; it must be exported before
    // the first linear-algebra call, i.e. right here.
    if let Ok(v) = std::env::var("QWS_THREADS") {
        for key in ["OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS"] {
            if std::env::var_os(key).is_none() {
                std::env::set_var(key, &v);
            }
        }
    }
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("{}", e.to_json());
        std::process::exit(e.exit_code());
    }
}
