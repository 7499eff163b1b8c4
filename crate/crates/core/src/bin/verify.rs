use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use qkgeom::runner::{run, Format, RunConfig};
use qkgeom::scenarios::{ScenarioKind, Sizes};
use qkgeom::tolerance::{FdSteps, Tolerances};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

/// Verify a scenario against its expected table of check outcomes.
#[derive(Debug, Parser)]
#[command(name = "verify", version)]
struct Cli {
    /// FlatHyperplane, HopfSphere or FlatQuaternionicProjection
    scenario: String,
    /// Quaternionic dimension of the ambient space.
    #[arg(long, conflicts_with_all = ["n", "k"])]
    m: Option<usize>,
    /// Total quaternionic dimension (projection scenario).
    #[arg(long, requires = "k")]
    n: Option<usize>,
    /// Base quaternionic dimension (projection scenario).
    #[arg(long, requires = "n")]
    k: Option<usize>,
    #[arg(long, default_value_t = 32)]
    samples: usize,
    #[arg(long, default_value_t = 8)]
    vectors: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = Tolerances::DEFAULT.alg)]
    tol_alg: f64,
    #[arg(long, default_value_t = Tolerances::DEFAULT.d1)]
    tol_d1: f64,
    #[arg(long, default_value_t = Tolerances::DEFAULT.d2)]
    tol_d2: f64,
    #[arg(long, default_value_t = FdSteps::DEFAULT.step1)]
    fd1: f64,
    #[arg(long, default_value_t = FdSteps::DEFAULT.step2)]
    fd2: f64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    eprintln!("usage: verify <scenario> [--m M | --n N --k K] [--samples N] [--vectors N] [--seed S] [--format text|json]");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(2);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let kind: ScenarioKind = match cli.scenario.parse() {
        Ok(k) => k,
        Err(e) => return usage(e),
    };
    let mut config = RunConfig::new(kind);
    config.sizes = match (kind, cli.m, cli.n, cli.k) {
        (_, None, None, None) => kind.default_sizes(),
        (ScenarioKind::FlatQuaternionicProjection, None, Some(n), Some(k)) => Sizes::NK(n, k),
        (ScenarioKind::FlatQuaternionicProjection, Some(_), _, _) => {
            return usage("FlatQuaternionicProjection takes --n and --k")
        }
        (_, Some(m), None, None) => Sizes::M(m),
        _ => return usage(format!("{} takes --m", kind.name())),
    };
    config.samples = cli.samples;
    config.vectors = cli.vectors;
    config.seed = cli.seed;
    config.tolerances = Tolerances {
        alg: cli.tol_alg,
        d1: cli.tol_d1,
        d2: cli.tol_d2,
    };
    config.steps = FdSteps {
        step1: cli.fd1,
        step2: cli.fd2,
    };
    config.format = match cli.format {
        OutputFormat::Text => Format::Text,
        OutputFormat::Json => Format::Json,
    };
    config.out = cli.out;
    if let Err(e) = config.validate() {
        return usage(e);
    }
    ExitCode::from(run(&config) as u8)
}
