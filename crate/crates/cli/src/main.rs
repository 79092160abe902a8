use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rangeperc::harness::{
    bound_reports, format_bounds_table, run_experiment, write_bounds_json, write_outputs, BoundsConfig,
    ExperimentConfig, HarnessError, ModelKind, Parallelism,
};

#[derive(Parser)]
#[command(name = "rangeperc", version, about = "Random-range percolation and contact-process experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Contact process with dynamical range.
    Cpdr(RunArgs),
    /// Anisotropic percolation with random range.
    Aprr(RunArgs),
    /// One-dimensional front recursion (`oned_p1` or `oned_thinned`).
    Oned(RunArgs),
    /// Closed-form bound calculators.
    Bounds(BoundsArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads. 1 runs sequentially; omitted uses every core.
    #[arg(long)]
    workers: Option<usize>,
    /// Overrides `master_seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    config: PathBuf,
    /// Directory for `bounds.json`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// What to print on stdout.
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
}

fn run(args: RunArgs, allowed: &[ModelKind]) -> Result<(), HarnessError> {
    let mut cfg = ExperimentConfig::from_path(&args.config)?;
    if !allowed.contains(&cfg.model) {
        return Err(HarnessError::InvalidConfig(format!(
            "config model `{}` does not match this subcommand",
            cfg.model.name()
        )));
    }
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    let out = args
        .out
        .or_else(|| cfg.output.clone())
        .ok_or_else(|| HarnessError::InvalidConfig("no output directory: pass --out or set `output`".into()))?;
    let result = run_experiment(&cfg, Parallelism::from_workers(args.workers))?;
    write_outputs(&result, &out)?;
    println!("sweep_value\truns\tsuccesses\tfraction\twilson_lo\twilson_hi");
    for row in &result.summary {
        let v = row.sweep_value.map_or("-".to_string(), |v| v.to_string());
        println!(
            "{v}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}",
            row.runs, row.successes, row.fraction, row.wilson_lo, row.wilson_hi
        );
    }
    Ok(())
}

fn bounds(args: BoundsArgs) -> Result<(), HarnessError> {
    let text = std::fs::read_to_string(&args.config)?;
    let cfg = BoundsConfig::from_json(&text)?;
    let reports = bound_reports(&cfg);
    if let Some(dir) = &args.out {
        write_bounds_json(&reports, &dir.join("bounds.json"))?;
    }
    match args.format {
        Format::Table => print!("{}", format_bounds_table(&reports)),
        Format::Json => println!("{}", serde_json::to_string_pretty(&reports).expect("reports serialize")),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Cpdr(a) => run(a, &[ModelKind::Cpdr]),
        Command::Aprr(a) => run(a, &[ModelKind::Aprr]),
        Command::Oned(a) => run(a, &[ModelKind::OnedP1, ModelKind::OnedThinned]),
        Command::Bounds(a) => bounds(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
