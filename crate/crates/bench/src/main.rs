use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mlindex_bench::data;
use mlindex_bench::harness::{self, generate_datasets, ScenarioTables};
use mlindex_bench::{parse_csv, render_report, to_csv, BenchConfig, BenchKind, BenchRow, Scale, Scenario};

#[derive(Debug, Parser)]
#[command(
    name = "mlindex",
    version,
    about = "Multilevel service index: data generation and benchmarks"
)]
struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overrides the configuration file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (CSV) or directory (generate).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Workload size preset, applied after the configuration file.
    #[arg(long, global = true)]
    scale: Option<Scale>,
    /// Restrict to a single scenario.
    #[arg(long, global = true)]
    scenario: Option<Scenario>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write repository, request and probability files.
    Generate,
    /// Retrieval benchmark.
    BenchRetrieve {
        /// Read datasets written by `generate` instead of generating them.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Addition benchmark.
    BenchAdd {
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Rank strategies from a benchmark CSV.
    Report { csv: PathBuf },
}

fn load_config(cli: &Cli) -> Result<BenchConfig, String> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            BenchConfig::parse(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => BenchConfig::default(),
    };
    if let Some(scale) = cli.scale {
        cfg.apply_scale(scale);
    }
    if let Some(seed) = cli.seed {
        cfg.set_seed(seed);
    }
    if let Some(s) = cli.scenario {
        cfg.scenarios = vec![s];
    }
    if let Some(out) = &cli.out {
        cfg.output = Some(out.clone());
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn bench(cfg: &BenchConfig, kind: BenchKind, data_dir: Option<&Path>) -> Result<Vec<BenchRow>, String> {
    let Some(dir) = data_dir else {
        return harness::run_benchmark(cfg, kind).map_err(|e| e.to_string());
    };
    let mut rows = Vec::new();
    for &scenario in &cfg.scenarios {
        let q = cfg.workload_for(scenario).distribution.q;
        let (datasets, tables) = data::load_scenario(dir, scenario, q).map_err(|e| e.to_string())?;
        rows.extend(harness::run_scenario(cfg, scenario, &datasets, &tables, kind).map_err(|e| e.to_string())?);
    }
    rows.sort_by_key(BenchRow::sort_key);
    Ok(rows)
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string()),
    }
}

fn run(cli: Cli) -> Result<(), String> {
    if let Command::Report { csv } = &cli.command {
        let text = std::fs::read_to_string(csv).map_err(|e| format!("{}: {e}", csv.display()))?;
        let rows = parse_csv(&text).map_err(|e| format!("{}: {e}", csv.display()))?;
        return emit(&render_report(&rows), cli.out.as_deref());
    }

    let cfg = load_config(&cli)?;
    match &cli.command {
        Command::Generate => {
            let dir = cfg.output.clone().unwrap_or_else(|| PathBuf::from("data"));
            for &scenario in &cfg.scenarios {
                let w = cfg.workload_for(scenario);
                data::write_scenario(&dir, scenario, &generate_datasets(&w), &ScenarioTables::theoretical(&w))
                    .map_err(|e| e.to_string())?;
            }
            eprintln!("wrote {} scenario(s) to {}", cfg.scenarios.len(), dir.display());
            Ok(())
        }
        Command::BenchRetrieve { data } => {
            let rows = bench(&cfg, BenchKind::Retrieval, data.as_deref())?;
            emit(&to_csv(&rows), cfg.output.as_deref())
        }
        Command::BenchAdd { data } => {
            let rows = bench(&cfg, BenchKind::Addition, data.as_deref())?;
            emit(&to_csv(&rows), cfg.output.as_deref())
        }
        Command::Report { .. } => unreachable!(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
