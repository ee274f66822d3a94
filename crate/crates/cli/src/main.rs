//! Command-line driver for the experiment harness.

use anyhow::{bail, Context};
use clap::Parser;
use haarspec::harness::{emit, run, EmitFormat, ExperimentConfig, ExperimentKind};
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(
    name = "haarspec",
    about = "Dyadic Haar analysis and commutator Schatten spectra on the periodic grid",
    version
)]
struct Args {
    /// JSON configuration file; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Which experiment to run.
    #[arg(long, default_value = "all")]
    experiment: String,

    /// Output directory for report.csv, spectra/ and plots/
    /// (overrides the config's out_dir; default "out").
    #[arg(long)]
    out: Option<PathBuf>,

    /// Random seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,

    /// Worker threads (overrides the config).
    #[arg(long)]
    workers: Option<usize>,

    /// Also write SVG plots next to the CSV output.
    #[arg(long)]
    plots: bool,
}

fn main() -> anyhow::Result<()> {
    let args = Args::parse();
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)
            .with_context(|| format!("loading config {}", path.display()))?,
        None => ExperimentConfig::default_for(2, 7),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(workers) = args.workers {
        cfg.workers = workers;
    }
    let kind: ExperimentKind = args.experiment.parse()?;
    let out_dir = args
        .out
        .clone()
        .or_else(|| cfg.out_dir.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));

    eprintln!(
        "running {:?} (n = {}, levels {:?}, seed {}, workers {})",
        kind, cfg.n, cfg.levels, cfg.seed, cfg.workers
    );
    let started = std::time::Instant::now();
    let report = run(&cfg, kind)?;
    eprintln!(
        "{} rows, {} spectra in {:.1?}",
        report.rows.len(),
        report.spectra.len(),
        started.elapsed()
    );
    if report.is_empty() {
        bail!("experiment produced an empty report");
    }
    let files = emit(&report, EmitFormat::Csv, &out_dir)?;
    if args.plots {
        emit(&report, EmitFormat::SvgPlot, &out_dir)?;
    }
    for f in files.iter().take(1) {
        println!("{}", f.display());
    }
    eprintln!("wrote {} files under {}", files.len(), out_dir.display());
    Ok(())
}
