use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use edgesplit::agent::{checkpoint, train_with_progress, A2CModel, CurveRow};
use edgesplit::baselines::{
    build_policy, evaluate_policy_traced, EvalReport, PolicyKind, TraceRow,
};
use edgesplit::config::RunConfig;
use edgesplit::env::EnvConfig;
use edgesplit::profiles::{
    classifier_catalog_stub, fixture_f1, generate_synthetic_catalog, save_catalog, GeneratorSpec,
};
use edgesplit::sweep::{grid_from_range, run_sweep, SweepPolicy, SweepRow, SweepWeight};
use edgesplit::Error;

#[derive(Parser)]
#[command(
    name = "edgesplit",
    version,
    about = "UAV/edge split-inference simulator and A2C controller"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a profile catalog (synthetic, or one of the built-in presets).
    GenProfiles(GenArgs),
    /// Train an actor-critic agent; writes checkpoint.json and curve.csv.
    Train(RunArgs),
    /// Evaluate a baseline or trained policy; writes eval_<policy>.csv and .txt.
    Eval(EvalArgs),
    /// Sweep one reward weight; writes sweep_<weight>.csv.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    F1,
    Classifiers,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum, conflicts_with_all = ["models", "versions"])]
    preset: Option<Preset>,
    #[arg(long, default_value_t = 1)]
    models: usize,
    #[arg(long, default_value_t = 2)]
    versions: usize,
    #[arg(long, default_value_t = 4)]
    min_layers: usize,
    #[arg(long, default_value_t = 24)]
    max_layers: usize,
    #[arg(long, default_value_t = 4)]
    cuts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's catalog path.
    #[arg(long)]
    catalog: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    episodes: Option<usize>,
    /// Train: per-episode progress on stderr. Eval: per-decision trace CSV. Sweep: per-point progress.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    run: RunArgs,
    /// oracle, random, local-only, min-cut, ao, lo, eo or trained:<checkpoint>
    #[arg(long)]
    policy: String,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// w1, w2 or w3 (accuracy, latency, energy).
    #[arg(long)]
    weight: Option<String>,
    /// Comma-separated grid values; replaces the config grid.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["start", "stop", "step"])]
    grid: Option<Vec<f64>>,
    #[arg(long, requires_all = ["stop", "step"])]
    start: Option<f64>,
    #[arg(long)]
    stop: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    /// Same names as eval, plus `train` to train a fresh agent per point.
    #[arg(long)]
    policy: Option<String>,
}

const EVAL_EPISODES: usize = 20;

/// Exit status 2 for usage and config problems, 3 for runtime and data failures.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. }
            | Error::Validation(_)
            | Error::UnknownId { .. }
            | Error::InvalidConfig(_)
            | Error::DegenerateSpec(_)
            | Error::IllegalCut { .. } => 2,
            _ => 3,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: 3,
            message: e.to_string(),
        }
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure {
            code: 3,
            message: e.to_string(),
        }
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenProfiles(args) => gen_profiles(args),
        Command::Train(args) => cmd_train(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Sweep(args) => cmd_sweep(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn gen_profiles(args: GenArgs) -> CmdResult {
    let catalog = match args.preset {
        Some(Preset::F1) => fixture_f1(),
        Some(Preset::Classifiers) => classifier_catalog_stub(),
        None => {
            let spec = GeneratorSpec {
                models: args.models,
                versions_per_model: args.versions,
                layer_range: (args.min_layers, args.max_layers),
                cuts_per_version: args.cuts,
                ..GeneratorSpec::default()
            };
            generate_synthetic_catalog(&spec, args.seed)?
        }
    };
    if let Some(parent) = args.output.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    save_catalog(&catalog, &args.output)?;
    println!("{}", args.output.display());
    Ok(())
}

struct Prepared {
    run: RunConfig,
    env: EnvConfig,
    out_dir: PathBuf,
}

fn prepare(args: &RunArgs) -> std::result::Result<Prepared, Failure> {
    let mut run = RunConfig::load(&args.config)?;
    if let Some(catalog) = &args.catalog {
        run.catalog = Some(catalog.clone());
    }
    if let Some(seed) = args.seed {
        run.seed = seed;
    }
    if let Some(dir) = &args.out_dir {
        run.output_dir = dir.clone();
    }
    let catalog = Arc::new(run.load_catalog()?);
    let env = run.env_config(catalog)?;
    let out_dir = run.output_dir.clone();
    fs::create_dir_all(&out_dir).map_err(|e| Failure {
        code: 2,
        message: format!("cannot create output dir {}: {e}", out_dir.display()),
    })?;
    Ok(Prepared { run, env, out_dir })
}

fn cmd_train(args: RunArgs) -> CmdResult {
    let p = prepare(&args)?;
    let mut hp = p.run.hyperparams();
    if let Some(n) = args.episodes {
        hp.episodes = n;
    }
    if hp.episodes == 0 {
        return Err(Error::InvalidConfig("episodes must be >= 1".into()).into());
    }
    let trace = args.trace;
    let out = train_with_progress(&p.env, &hp, |row| {
        if trace {
            eprintln!(
                "episode {} reward {:.6} policy_loss {:.6} value_loss {:.6} entropy {:.6}",
                row.episode, row.mean_reward, row.policy_loss, row.value_loss, row.entropy
            );
        }
    })?;

    let ckpt = p.out_dir.join("checkpoint.json");
    checkpoint::save(&out.model, &ckpt)?;
    let curve_path = p.out_dir.join("curve.csv");
    write_curve(&curve_path, &out.curve)?;

    let tail = &out.curve[out.curve.len().saturating_sub(100)..];
    let mean = tail.iter().map(|r| r.mean_reward).sum::<f64>() / tail.len() as f64;
    println!("final {}-episode mean reward: {mean:.6}", tail.len());
    println!("checkpoint: {}", ckpt.display());
    println!("curve: {}", curve_path.display());
    Ok(())
}

fn write_curve(path: &Path, curve: &[CurveRow]) -> CmdResult {
    let mut w = csv::Writer::from_path(path)?;
    for row in curve {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Splits `trained:<path>` from the named baselines.
fn parse_policy(name: &str) -> std::result::Result<(PolicyKind, Option<A2CModel>), Failure> {
    if let Some(path) = name.strip_prefix("trained:") {
        return Ok((PolicyKind::Trained, Some(checkpoint::load(path)?)));
    }
    let kind: PolicyKind = name.parse()?;
    if kind == PolicyKind::Trained {
        return Err(Error::InvalidConfig("use trained:<checkpoint path>".into()).into());
    }
    Ok((kind, None))
}

fn cmd_eval(args: EvalArgs) -> CmdResult {
    let (kind, model) = parse_policy(&args.policy)?;
    let p = prepare(&args.run)?;
    let episodes = args.run.episodes.unwrap_or(EVAL_EPISODES);
    let mut policy = build_policy(kind, p.run.seed, model)?;
    let stem = format!("eval_{}", kind.as_str());

    let mut trace_writer = if args.run.trace {
        Some(csv::Writer::from_path(
            p.out_dir.join(format!("{stem}_trace.csv")),
        )?)
    } else {
        None
    };
    let mut trace_err = None;
    let report = evaluate_policy_traced(
        policy.as_mut(),
        &p.env,
        episodes,
        p.run.seed,
        |row: &TraceRow| {
            if let Some(w) = trace_writer.as_mut() {
                if let Err(e) = w.serialize(row) {
                    trace_err.get_or_insert(e);
                }
            }
        },
    )?;
    if let Some(e) = trace_err {
        return Err(e.into());
    }
    if let Some(mut w) = trace_writer {
        w.flush()?;
    }

    let csv_path = p.out_dir.join(format!("{stem}.csv"));
    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record(REPORT_COLUMNS)?;
    w.write_record(report_record(&report))?;
    w.flush()?;
    let summary = summary_text(&report);
    fs::write(p.out_dir.join(format!("{stem}.txt")), &summary)?;
    print!("{summary}");
    println!("report: {}", csv_path.display());
    Ok(())
}

const REPORT_COLUMNS: [&str; 13] = [
    "policy",
    "episodes",
    "slots",
    "decisions",
    "mean_reward",
    "mean_latency_s",
    "mean_energy_j",
    "mean_transmission_energy_j",
    "mean_accuracy",
    "mean_lifetime_slots",
    "tau_latency_violation_rate",
    "tau_accuracy_violation_rate",
    "clamped_actions",
];

fn report_record(r: &EvalReport) -> Vec<String> {
    vec![
        r.policy.clone(),
        r.episodes.to_string(),
        r.slots.to_string(),
        r.decisions.to_string(),
        r.mean_reward.to_string(),
        r.mean_latency_s.to_string(),
        r.mean_energy_j.to_string(),
        r.mean_transmission_energy_j.to_string(),
        r.mean_accuracy.to_string(),
        r.mean_lifetime_slots.to_string(),
        r.tau_latency_violation_rate.to_string(),
        r.tau_accuracy_violation_rate.to_string(),
        r.clamped_actions.to_string(),
    ]
}

fn summary_text(r: &EvalReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "policy            {}", r.policy);
    let _ = writeln!(
        s,
        "episodes          {} ({} slots, {} decisions)",
        r.episodes, r.slots, r.decisions
    );
    let _ = writeln!(s, "mean reward       {:.6}", r.mean_reward);
    let _ = writeln!(s, "mean latency      {:.6} s", r.mean_latency_s);
    let _ = writeln!(
        s,
        "mean energy       {:.6} J (transmission {:.6} J)",
        r.mean_energy_j, r.mean_transmission_energy_j
    );
    let _ = writeln!(s, "mean accuracy     {:.6}", r.mean_accuracy);
    let _ = writeln!(s, "mean lifetime     {:.3} slots", r.mean_lifetime_slots);
    let _ = writeln!(
        s,
        "tau violations    latency {:.4}, accuracy {:.4}",
        r.tau_latency_violation_rate, r.tau_accuracy_violation_rate
    );
    let _ = writeln!(s, "clamped actions   {}", r.clamped_actions);
    let _ = writeln!(s, "action histogram (model/version/cut):");
    let total = r.decisions.max(1) as f64;
    for (key, count) in &r.action_histogram {
        let _ = writeln!(
            s,
            "  {key:<28} {count:>8} {:>7.2}%",
            100.0 * *count as f64 / total
        );
    }
    s
}

fn cmd_sweep(args: SweepArgs) -> CmdResult {
    let p = prepare(&args.run)?;
    let section = &p.run.sweep;
    let which: SweepWeight = args.weight.as_deref().unwrap_or(&section.weight).parse()?;
    let grid = match (&args.grid, args.start) {
        (Some(grid), _) => grid.clone(),
        (None, Some(start)) => {
            grid_from_range(start, args.stop.unwrap_or(1.0), args.step.unwrap_or(0.0))?
        }
        (None, None) => section.grid.clone(),
    };
    if grid.is_empty() {
        return Err(Error::InvalidConfig("empty sweep grid".into()).into());
    }
    let episodes = args.run.episodes.unwrap_or(section.episodes);
    let policy_name = args
        .policy
        .clone()
        .unwrap_or_else(|| section.policy.clone());
    let policy = if policy_name == "train" {
        SweepPolicy::Train(p.run.hyperparams())
    } else {
        let (kind, model) = parse_policy(&policy_name)?;
        SweepPolicy::Fixed(kind, model)
    };

    let rows = run_sweep(&p.env, which, &grid, &policy, episodes, p.run.seed)?;
    if args.run.trace {
        for row in &rows {
            eprintln!(
                "{which}={} reward {:.6}",
                row.grid_value, row.report.mean_reward
            );
        }
    }
    let path = p.out_dir.join(format!("sweep_{which}.csv"));
    write_sweep(&path, which, &grid, &p.env, &policy_name, episodes, &rows)?;
    println!("sweep: {} ({} rows)", path.display(), rows.len());
    Ok(())
}

fn write_sweep(
    path: &Path,
    which: SweepWeight,
    grid: &[f64],
    env: &EnvConfig,
    policy: &str,
    episodes: usize,
    rows: &[SweepRow],
) -> CmdResult {
    let mut file = fs::File::create(path)?;
    let grid_text = grid
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",");
    let w = env.weights;
    writeln!(
        file,
        "# weight={which} grid=[{grid_text}] policy={policy} episodes={episodes}"
    )?;
    writeln!(
        file,
        "# renormalization: other two weights share 1-{which} in the base ratio (w1,w2,w3)=({},{},{}); even split if both are zero",
        w.accuracy, w.latency, w.energy
    )?;
    let mut out = csv::Writer::from_writer(file);
    out.write_record([
        "grid_value",
        "w1",
        "w2",
        "w3",
        "mean_reward",
        "mean_latency_s",
        "mean_energy_j",
        "mean_accuracy",
        "mean_lifetime_slots",
        "tau_latency_violation_rate",
    ])?;
    for row in rows {
        let r = &row.report;
        out.write_record([
            row.grid_value.to_string(),
            row.weights.accuracy.to_string(),
            row.weights.latency.to_string(),
            row.weights.energy.to_string(),
            r.mean_reward.to_string(),
            r.mean_latency_s.to_string(),
            r.mean_energy_j.to_string(),
            r.mean_accuracy.to_string(),
            r.mean_lifetime_slots.to_string(),
            r.tau_latency_violation_rate.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
