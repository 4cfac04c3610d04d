//! `smppi` command-line driver: collect data, train models, run and
//! compare controllers from an experiment file.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;
use smppi::benchmarks::{
    run_comparison, write_campaign_csv, write_summary_json, write_trace_file, Campaign, ExperimentConfig, ModelKind,
};
use smppi::controllers::ControllerKind;
use smppi::learning::TransitionDataset;
use smppi::parallel::default_jobs;

#[derive(Parser)]
#[command(name = "smppi", version, about = "Sampling-based MPC experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Roll out the plant under random excitation and write dataset.csv.
    Collect(Common),
    /// Fit a dynamics network to the dataset; writes model.json and loss_curve.csv.
    Train(Common),
    /// Run one controller over the seeds; writes traces, summary.json and campaign.csv.
    Run(RunArgs),
    /// Run several controllers on identical scenarios and seeds.
    Compare(CompareArgs),
}

#[derive(Args)]
struct Common {
    /// Experiment file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Single seed; overrides the file.
    #[arg(long, conflicts_with = "seeds")]
    seed: Option<u64>,
    /// Seed range `A..B` (half-open) or `A..=B`.
    #[arg(long, value_parser = parse_seeds)]
    seeds: Option<SeedRange>,
    /// Output directory; overrides the file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for episodes.
    #[arg(long, default_value_t = default_jobs())]
    jobs: usize,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_parser = parse_controller)]
    controller: Option<ControllerKind>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated controllers; all four by default.
    #[arg(long, value_delimiter = ',', value_parser = parse_controller, num_args = 1..)]
    controller: Vec<ControllerKind>,
}

fn parse_controller(s: &str) -> Result<ControllerKind, String> {
    s.parse::<ControllerKind>().map_err(|e| e.to_string())
}

#[derive(Debug, Clone)]
struct SeedRange(Vec<u64>);

fn parse_seeds(s: &str) -> Result<SeedRange, String> {
    let (a, b, inclusive) = if let Some((a, b)) = s.split_once("..=") {
        (a, b, true)
    } else if let Some((a, b)) = s.split_once("..") {
        (a, b, false)
    } else {
        return Err(format!("expected A..B, got {s:?}"));
    };
    let a: u64 = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let b: u64 = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
    let v: Vec<u64> = if inclusive { (a..=b).collect() } else { (a..b).collect() };
    if v.is_empty() {
        return Err(format!("seed range {s:?} is empty"));
    }
    Ok(SeedRange(v))
}

struct Session {
    cfg: ExperimentConfig,
    out: PathBuf,
    seeds: Vec<u64>,
    jobs: usize,
}

fn load(common: &Common) -> Result<Session> {
    let cfg = ExperimentConfig::from_file(&common.config)
        .with_context(|| format!("loading {}", common.config.display()))?;
    let out = match &common.out {
        Some(o) => o.clone(),
        None => cfg.resolve(&cfg.output_dir),
    };
    let seeds = match (&common.seed, &common.seeds) {
        (Some(s), _) => vec![*s],
        (None, Some(v)) => v.0.clone(),
        (None, None) if !cfg.seeds.is_empty() => cfg.seeds.clone(),
        (None, None) => vec![0],
    };
    if common.jobs == 0 {
        bail!("--jobs must be at least 1");
    }
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let out = std::path::absolute(&out)?;
    Ok(Session { cfg, out, seeds, jobs: common.jobs })
}

fn dataset_path(ctx: &Session) -> PathBuf {
    match &ctx.cfg.dataset {
        Some(p) => ctx.cfg.resolve(p),
        None => ctx.out.join("dataset.csv"),
    }
}

fn cmd_collect(common: &Common) -> Result<()> {
    let mut ctx = load(common)?;
    if let (Some(seed), Some(c)) = (common.seed, ctx.cfg.collect.as_mut()) {
        c.seed = seed;
    }
    let t0 = Instant::now();
    let data = ctx.cfg.collect()?;
    let path = ctx.out.join("dataset.csv");
    data.write_csv(fs::File::create(&path)?)?;
    info!("collected {} transitions in {:.1?} -> {}", data.len(), t0.elapsed(), path.display());
    Ok(())
}

fn cmd_train(common: &Common) -> Result<()> {
    let mut ctx = load(common)?;
    if let Some(seed) = common.seed {
        ctx.cfg.train.get_or_insert_with(Default::default).seed = seed;
    }
    let path = dataset_path(&ctx);
    let data = TransitionDataset::read_csv(fs::File::open(&path).with_context(|| format!("opening {}", path.display()))?)?;
    let t0 = Instant::now();
    let outcome = ctx.cfg.train(&data)?;
    outcome.model.save(ctx.out.join("model.json"))?;
    let mut w = fs::File::create(ctx.out.join("loss_curve.csv"))?;
    use std::io::Write;
    writeln!(w, "epoch,train,validation,learning_rate")?;
    for e in &outcome.curve {
        writeln!(w, "{},{:?},{:?},{:?}", e.epoch, e.train, e.validation, e.learning_rate)?;
    }
    if let Some(last) = outcome.curve.last() {
        info!(
            "trained {} epochs in {:.1?}: train {:.3e}, validation {:.3e}",
            outcome.curve.len(),
            t0.elapsed(),
            last.train,
            last.validation
        );
    }
    Ok(())
}

fn run_controllers(common: &Common, controllers: &[ControllerKind]) -> Result<()> {
    let mut ctx = load(common)?;
    if ctx.cfg.model.kind == ModelKind::Checkpoint && ctx.cfg.model.path.is_none() {
        ctx.cfg.model.path = Some(ctx.out.join("model.json"));
    }
    let scenario = ctx.cfg.scenario()?;
    let t0 = Instant::now();
    let campaigns = run_comparison(&scenario, controllers, &ctx.seeds, ctx.jobs)?;
    info!("{} episodes in {:.1?}", controllers.len() * ctx.seeds.len(), t0.elapsed());
    write_outputs(&ctx.out, &campaigns)?;
    print_table(&campaigns);
    Ok(())
}

fn write_outputs(out: &Path, campaigns: &[Campaign]) -> Result<()> {
    let traces = out.join("traces");
    fs::create_dir_all(&traces)?;
    for c in campaigns {
        for t in &c.traces {
            write_trace_file(t, traces.join(format!("{}_seed{}.csv", c.controller, t.seed)))?;
        }
    }
    write_summary_json(campaigns, out.join("summary.json"))?;
    write_campaign_csv(campaigns, fs::File::create(out.join("campaign.csv"))?)?;
    Ok(())
}

fn print_table(campaigns: &[Campaign]) {
    println!("{:<8} {:>8} {:>9} {:>14} {:>14}", "control", "episodes", "success", "chattering", "cost");
    for c in campaigns {
        let s = c.summary();
        println!(
            "{:<8} {:>8} {:>8.0}% {:>14.6e} {:>14.6e}",
            c.controller.as_str(),
            s.episodes,
            100.0 * s.success_rate,
            s.chattering.median,
            s.total_cost.median
        );
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SMPPI_LOG", "info")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Collect(c) => cmd_collect(c),
        Command::Train(c) => cmd_train(c),
        Command::Run(r) => {
            let kind = match r.controller {
                Some(k) => Ok(k),
                None => ExperimentConfig::from_file(&r.common.config).map(|c| c.scenario.controller).map_err(Into::into),
            };
            kind.and_then(|k| run_controllers(&r.common, &[k]))
        }
        Command::Compare(c) => {
            let list = if c.controller.is_empty() { ControllerKind::ALL.to_vec() } else { c.controller.clone() };
            run_controllers(&c.common, &list)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
