mod msgstats;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tandem::engine::{run_with_log, spearman, sweep_outage_goals, EngineError, SimConfig, SweepRowKind};
use tandem::scenario::{generate_synthetic, load_scenario, GeneratorConfig, Layer, Preset, Scenario, ScenarioError};

#[derive(Parser)]
#[command(name = "tandem", version, about = "Cell on/off switching simulator with a paired rApp/xApp controller")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic scenario file.
    Gen(GenArgs),
    /// Run one simulation and write timeseries.csv, events.csv and msglog.ndjson.
    Run(RunArgs),
    /// Run one simulation per outage goal plus the two reference runs.
    Sweep(SweepArgs),
    /// Summarize a message log written by `run`.
    Msgstats(MsgstatsArgs),
}

#[derive(Args)]
struct Reduce {
    /// Keep only the sites closest to the center, up to this many cells.
    #[arg(long)]
    max_cells: Option<usize>,
    /// Pixel margin kept around the retained sites, meters.
    #[arg(long, default_value_t = 300.0)]
    margin: f64,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value = "dt-like")]
    preset: Preset,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Override the preset's site count.
    #[arg(long)]
    sites: Option<usize>,
    /// Generator parameters as JSON; replaces the preset entirely.
    #[arg(long, conflicts_with_all = ["preset", "sites"])]
    params: Option<PathBuf>,
    #[command(flatten)]
    reduce: Reduce,
    #[arg(short, long, default_value = "scenario.json")]
    output: PathBuf,
}

#[derive(Args)]
struct SimArgs {
    scenario: PathBuf,
    /// Run configuration as JSON; omitted fields keep their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Simulated seconds; also caps the warm-up at a quarter of the horizon.
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    target_outage: Option<f64>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    no_xapp: bool,
    #[arg(long)]
    no_rapp: bool,
    #[arg(long)]
    no_ts: bool,
    #[command(flatten)]
    reduce: Reduce,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    sim: SimArgs,
    #[arg(short, long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    sim: SimArgs,
    /// Comma-separated outage goals, percent.
    #[arg(long, value_delimiter = ',', default_values_t = [5.0, 10.0, 15.0, 20.0])]
    goals: Vec<f64>,
    /// Give goal i the seed `seed + i` instead of sharing one seed.
    #[arg(long)]
    vary_seed: bool,
    #[arg(short, long, default_value = "sweep.csv")]
    output: PathBuf,
}

#[derive(Args)]
struct MsgstatsArgs {
    log: PathBuf,
    /// Also print per-interface counts for windows of this many seconds.
    #[arg(long)]
    window: Option<f64>,
}

/// Exit code 1: bad input. Exit code 2: failure while executing.
enum Failure {
    Validation(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Io(_) => Failure::Runtime(e.into()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Config(_) | EngineError::Scenario(_) => Failure::Validation(e.to_string()),
            _ => Failure::Runtime(e.into()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Msgstats(a) => msgstats::cmd_msgstats(&a.log, a.window),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn reduce(scenario: Scenario, r: &Reduce) -> Result<Scenario, Failure> {
    match r.max_cells {
        Some(n) => Ok(scenario.reduce_to_cells(n, r.margin)?),
        None => Ok(scenario),
    }
}

fn cmd_gen(a: GenArgs) -> Result<(), Failure> {
    let cfg = match &a.params {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            serde_json::from_str(&text).map_err(|e| Failure::Validation(format!("{}: {e}", p.display())))?
        }
        None => {
            let mut cfg = GeneratorConfig::preset(a.preset);
            if let Some(n) = a.sites {
                cfg.sites = n;
                cfg.micro_sites = cfg.micro_sites.min(n);
            }
            cfg
        }
    };
    let scenario = reduce(generate_synthetic(&cfg, a.seed)?, &a.reduce)?;
    scenario.save(&a.output)?;

    let carriers = |layer| {
        let mut v: Vec<u64> =
            scenario.cells.iter().filter(|c| c.layer == layer).map(|c| (c.carrier_hz / 1e6).round() as u64).collect();
        v.sort_unstable();
        v.dedup();
        v.iter().map(|f| format!("{f} MHz")).collect::<Vec<_>>().join(", ")
    };
    println!("wrote {}", a.output.display());
    println!("sites: {}", scenario.sites.len());
    println!("coverage cells: {} ({})", scenario.count_layer(Layer::Coverage), carriers(Layer::Coverage));
    println!("capacity cells: {} ({})", scenario.count_layer(Layer::Capacity), carriers(Layer::Capacity));
    let n = scenario.pixels.len() as f64;
    let mean_of = |f: &dyn Fn(&tandem::scenario::TrafficPixel) -> f64| scenario.pixels.iter().map(f).sum::<f64>() / n;
    let ues = |p: &tandem::scenario::TrafficPixel| p.slots.iter().map(|s| s.mean_active_ues).sum::<f64>() / p.slots.len() as f64;
    let dem = |p: &tandem::scenario::TrafficPixel| p.slots.iter().map(|s| s.mean_demand_bps).sum::<f64>() / p.slots.len() as f64;
    let (ue_lo, ue_hi) = min_max(scenario.pixels.iter().flat_map(|p| p.slots.iter().map(|s| s.mean_active_ues)));
    let (d_lo, d_hi) = min_max(scenario.pixels.iter().flat_map(|p| p.slots.iter().map(|s| s.mean_demand_bps)));
    println!("pixels: {} ({:.0} x {:.0} m)", scenario.pixels.len(), scenario.area.width_m, scenario.area.height_m);
    println!("mean active users per pixel: {:.3} (range {ue_lo:.3} to {ue_hi:.3})", mean_of(&ues));
    println!("mean user demand: {:.2} Mbps (range {:.2} to {:.2})", mean_of(&dem) / 1e6, d_lo / 1e6, d_hi / 1e6);
    Ok(())
}

fn min_max(it: impl Iterator<Item = f64>) -> (f64, f64) {
    it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn load_inputs(a: &SimArgs) -> Result<(Scenario, SimConfig), Failure> {
    let scenario = reduce(load_scenario(&a.scenario)?, &a.reduce)?;
    let mut cfg = match &a.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            serde_json::from_str(&text).map_err(|e| Failure::Validation(format!("{}: {e}", p.display())))?
        }
        None => SimConfig::default(),
    };
    if let Some(h) = a.horizon {
        cfg.horizon_s = h;
        cfg.warmup_s = cfg.warmup_s.min(h / 4.0);
    }
    if let Some(t) = a.target_outage {
        cfg.target_outage_pct = t;
    }
    if let Some(t) = a.tolerance {
        cfg.tolerance_pct = t;
    }
    cfg.xapp_enabled &= !a.no_xapp;
    cfg.rapp_enabled &= !a.no_rapp;
    cfg.ts_enabled &= !a.no_ts;
    cfg.validate().map_err(|errs| Failure::Validation(format!("invalid run configuration:\n  {}", errs.join("\n  "))))?;
    Ok((scenario, cfg))
}

fn cmd_run(a: RunArgs) -> Result<(), Failure> {
    let (scenario, cfg) = load_inputs(&a.sim)?;
    std::fs::create_dir_all(&a.out)?;
    let (sink, status) = output::NdjsonSink::create(&a.out.join("msglog.ndjson"))?;
    let (result, sink) = run_with_log(&scenario, &cfg, a.sim.seed, Some(Box::new(sink)))?;
    drop(sink);
    status.check()?;
    output::write_timeseries(&a.out.join("timeseries.csv"), &result.timeseries)?;
    output::write_events(&a.out.join("events.csv"), &result.events)?;
    output::write_policies(&a.out.join("policies.csv"), cfg.initial_policy(), &result.policies)?;

    println!("cells: {} ({} capacity)", scenario.cells.len(), scenario.count_layer(Layer::Capacity));
    println!("mean outage: {:.2} %", result.mean_outage_pct);
    println!("mean power: {:.1} W ({:.1} W after warm-up)", result.mean_power_w, result.mean_power_after_warmup_w);
    println!("mean off fraction after warm-up: {:.3}", result.mean_off_fraction_after_warmup);
    println!("state changes: {} ({} forced)", result.state_changes(), result.forced_offs);
    println!("messages: {}", result.counters.grand_total());
    println!("outputs: {}", a.out.display());
    Ok(())
}

fn cmd_sweep(a: SweepArgs) -> Result<(), Failure> {
    let (scenario, cfg) = load_inputs(&a.sim)?;
    let base = a.sim.seed;
    let vary = a.vary_seed;
    let rows = sweep_outage_goals(&scenario, &cfg, &a.goals, |i| if vary { base + i as u64 } else { base })?;
    output::write_sweep(&a.output, &rows)?;

    let goals: Vec<_> = rows.iter().filter(|r| r.kind == SweepRowKind::Goal).collect();
    for r in &rows {
        let label = match r.goal_pct {
            Some(g) => format!("goal {g:>5.1} %"),
            None => format!("{:?}", r.kind),
        };
        println!("{label:<16} outage {:>6.2} %  power {:>9.1} W  changes {}", r.outage_pct, r.power_w, r.state_changes);
    }
    if goals.len() >= 2 {
        let outage: Vec<f64> = goals.iter().map(|r| r.outage_pct).collect();
        let power: Vec<f64> = goals.iter().map(|r| r.power_w).collect();
        println!("spearman(power, outage): {:.3}", spearman(&outage, &power));
    }
    println!("wrote {}", a.output.display());
    Ok(())
}
