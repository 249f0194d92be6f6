//! `lctsr` command-line driver.

mod failure;
mod modes;
mod selftest;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use failure::Failure;
use modes::Run;
use spec::{parse_overrides, ExperimentSpec};

#[derive(Debug, Parser)]
#[command(name = "lctsr", version, about = "Super-resolution of spike trains from LCT-domain samples")]
struct Cli {
    /// Experiment specification (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides the spec seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Inline JSON or a JSON file; fields replace those in the spec's `tolerances`.
    #[arg(long)]
    tolerance_overrides: Option<String>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::spec(format!("cannot start {n} threads: {e}")))?;
    }
    let spec = ExperimentSpec::load(&cli.spec)?;
    let overrides = match &cli.tolerance_overrides {
        Some(arg) => parse_overrides(arg)?,
        None => Default::default(),
    };
    Run {
        spec: &spec,
        out: &cli.out,
        seed: cli.seed.or(spec.seed),
        tolerances: spec.tolerances.merged(&overrides),
    }
    .execute()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let report = f.to_json();
            eprintln!("{report}");
            if std::fs::create_dir_all(&cli.out).is_ok() {
                let _ = std::fs::write(cli.out.join("error.json"), report + "\n");
            }
            ExitCode::from(f.exit_code as u8)
        }
    }
}
