use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use locfell::harness::config::{ExperimentConfig, FamilyBlock};
use locfell::harness::run::{run_config, RunOptions};
use locfell::path::{read_csv_file, write_csv_file};
use locfell::simulators::{Ensemble, InitialLaw};
use locfell::skorokhod::{global_distance, local_distance};
use locfell::{DeltaChart, Error, StatePoint, StateSpace};

/// Exploding cadlag paths, random time changes and Monte-Carlo checks of
/// martingale local problems.
#[derive(Parser)]
#[command(name = "locfell", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Chart {
    Rational,
    Truncated,
}

#[derive(Subcommand)]
enum Command {
    /// Run every experiment of a configuration file.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write gnuplot script stubs for every CSV.
        #[arg(long)]
        gnuplot: bool,
    },
    /// Run only the martingale suites of a configuration file.
    Testmg {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run only the operator and law convergence experiments.
    Converge {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run only the tightness experiments.
    Tightness {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate paths of a family and dump them as CSV files.
    Simulate {
        /// Family block as JSON, e.g. '{"kind": "chain", "n": 100, "T": 1}'.
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 0.0)]
        start: f64,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "locfell-out")]
        out: PathBuf,
    },
    /// Skorokhod distance between two path CSV files: the global distance
    /// on [0, horizon) when a horizon is given, the local distance otherwise.
    Distance {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long, value_enum, default_value_t = Chart::Rational)]
        chart: Chart,
    },
}

const EXIT_VERDICT: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn configure_threads() {
    if let Some(n) = std::env::var("LOCFELL_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // fails only if a pool already exists, which cannot happen this early
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn run(config: &Path, out: Option<PathBuf>, gnuplot: bool, only: Option<Vec<&'static str>>) -> ExitCode {
    let cfg = match ExperimentConfig::load(config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}: {e}", config.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let out = out.or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("locfell-out"));
    match run_config(&cfg, &RunOptions { out: out.clone(), gnuplot, only }) {
        Ok(m) => {
            for e in &m.experiments {
                let status = if e.ok { "ok" } else { "FAILED" };
                match &e.error {
                    Some(err) => println!("[{status}] {} ({}): error: {err}", e.name, e.kind),
                    None => println!("[{status}] {} ({}): {}", e.name, e.kind, e.summary),
                }
            }
            println!("artifacts in {}", out.display());
            if m.all_ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_VERDICT)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_VERDICT)
        }
    }
}

fn simulate(family: &str, start: f64, n: usize, seed: u64, out: &Path) -> Result<(), Error> {
    let FamilyBlock(fam) = serde_json::from_str(family).map_err(|e| Error::Config(e.to_string()))?;
    let ens = Ensemble::generate(&fam, &InitialLaw::dirac(StatePoint::Interior(start)), n, seed);
    std::fs::create_dir_all(out)?;
    let mut files = Vec::new();
    for (i, p) in ens.paths.iter().enumerate() {
        let name = format!("path_{i:05}.csv");
        write_csv_file(p, &out.join(&name))?;
        files.push(serde_json::json!({ "file": name, "seed": ens.seeds[i], "horizon": ens.horizons[i] }));
    }
    let manifest = serde_json::json!({
        "tool": "locfell",
        "version": env!("CARGO_PKG_VERSION"),
        "family": fam.label(),
        "start": start,
        "master_seed": seed,
        "paths": files,
    });
    std::fs::write(out.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    println!("{} paths of {} written to {}", n, fam.label(), out.display());
    Ok(())
}

fn distance(a: &Path, b: &Path, horizon: Option<f64>, chart: Chart) -> Result<f64, Error> {
    let space = StateSpace::real_line().with_chart(match chart {
        Chart::Rational => DeltaChart::Rational,
        Chart::Truncated => DeltaChart::Truncated,
    });
    let (x, y) = (read_csv_file(a)?, read_csv_file(b)?);
    match horizon {
        Some(t) => global_distance(&space, &x, &y, t),
        None => Ok(local_distance(&space, &x, &y)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    match cli.command {
        Command::Run { config, out, gnuplot } => run(&config, out, gnuplot, None),
        Command::Testmg { config, out } => run(&config, out, false, Some(vec!["martingale_suite"])),
        Command::Converge { config, out } => {
            run(&config, out, false, Some(vec!["operator_convergence", "law_convergence"]))
        }
        Command::Tightness { config, out } => run(&config, out, false, Some(vec!["tightness"])),
        Command::Simulate { family, start, n, seed, out } => match simulate(&family, start, n, seed, &out) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e @ Error::Config(_)) => {
                eprintln!("{e}");
                ExitCode::from(EXIT_CONFIG)
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_VERDICT)
            }
        },
        Command::Distance { a, b, horizon, chart } => match distance(&a, &b, horizon, chart) {
            Ok(d) => {
                println!("{d}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_CONFIG)
            }
        },
    }
}
