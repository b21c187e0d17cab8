use clap::{Parser, Subcommand};
use haps_core::env::{write_trace, HapsEnv};
use haps_core::harness::{
    evaluate_baseline, evaluate_policy, exit_code, load_model, oracle_actions, parse_metrics, plot_metrics,
    random_actions, run_checks, train, Baseline, EvalSummary, Phase, RunConfig,
};
use haps_core::mobility::{Action, Scenario};
use haps_core::rng::{stream, Stream};
use haps_core::{Result, SimError};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "haps",
    version,
    about = "Wind-disturbed HAPS positioning: simulator, PPO training and evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// TOML run configuration (defaults apply to missing keys).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides master_seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn load(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.master_seed = seed;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train a policy from random starts with periodic evaluation.
    Train {
        #[command(flatten)]
        common: Common,
        /// Overrides the number of training episodes.
        #[arg(long)]
        episodes: Option<usize>,
        /// Output directory (overrides output_dir).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a checkpoint with deterministic actions.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoint: PathBuf,
        /// 1..4 or "random"; all configured scenarios when omitted.
        #[arg(long)]
        scenario: Option<Scenario>,
        #[arg(long, default_value_t = 20)]
        episodes: usize,
        /// Write a per-frame CSV trace of the first episode here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Evaluate a non-learned comparator: static, nocontrol, oracle or random.
    Baseline {
        #[command(flatten)]
        common: Common,
        name: String,
        #[arg(long)]
        scenario: Option<Scenario>,
        #[arg(long, default_value_t = 20)]
        episodes: usize,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Render SVG panels from a metrics file.
    Plot {
        metrics: PathBuf,
        /// Directory for the SVG files (defaults to the metrics file's directory).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Moving-average window in rows.
        #[arg(long, default_value_t = 50)]
        window: usize,
    },
    /// Run the invariant suite against a configuration.
    Check {
        #[command(flatten)]
        common: Common,
    },
}

fn scenarios(cfg: &RunConfig, chosen: &Option<Scenario>) -> Vec<Scenario> {
    match chosen {
        Some(sc) => vec![sc.clone()],
        None => cfg.scenarios(),
    }
}

fn report(label: &str, scenario: &Scenario, s: &EvalSummary) {
    println!(
        "{label} scenario {scenario}: reward {:.4} ± {:.4}, throughput {:.2} ± {:.2} Mbps over {} episodes",
        s.reward_mean,
        s.reward_std,
        s.throughput_mean,
        s.throughput_std,
        s.episodes.len()
    );
}

fn trace_to<P>(path: &Path, cfg: &RunConfig, scenario: &Scenario, policy: P, hold: bool) -> Result<()>
where
    P: FnMut(&HapsEnv, &haps_core::env::Observation) -> Vec<Action>,
{
    let seed = haps_core::harness::eval_seed(cfg.master_seed, scenario, 0);
    let mut env = HapsEnv::new(cfg.env_config(), scenario, seed)?;
    env.set_hold_station(hold);
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    write_trace(&mut env, policy, &mut out)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train { common, episodes, out } => {
            let mut cfg = common.load()?;
            if let Some(n) = episodes {
                cfg.episodes = n;
            }
            if let Some(dir) = out {
                cfg.output_dir = dir;
            }
            let every = (cfg.episodes / 20).max(1);
            let dir = cfg.output_dir.clone();
            let outcome = train(&cfg, &dir, |row| match row.phase {
                Phase::Train if row.episode % every == 0 => eprintln!(
                    "episode {:>6}  reward {:.4}  fair rate {:.2}",
                    row.episode, row.mean_reward, row.mean_fair_rate
                ),
                Phase::Eval => eprintln!(
                    "episode {:>6}  eval scenario {}  reward {:.4}  throughput {:.2} Mbps",
                    row.episode, row.scenario, row.mean_reward, row.mean_sum_throughput_mbps
                ),
                _ => {}
            })?;
            println!(
                "trained {} episodes; outputs in {}",
                cfg.episodes,
                outcome.output_dir.display()
            );
            if let Some(best) = outcome.best_eval_reward {
                println!("best mean evaluation reward {best:.4}");
            }
        }
        Command::Eval {
            common,
            checkpoint,
            scenario,
            episodes,
            trace,
        } => {
            let cfg = common.load()?;
            let model = load_model(&cfg, &checkpoint)?;
            let env_cfg = cfg.env_config();
            let list = scenarios(&cfg, &scenario);
            for sc in &list {
                let s = evaluate_policy(&env_cfg, &model, sc, episodes, cfg.master_seed)?;
                report("policy", sc, &s);
            }
            if let (Some(path), Some(sc)) = (trace, list.first()) {
                trace_to(
                    &path,
                    &cfg,
                    sc,
                    |_, obs| model.act_deterministic(&obs.normalized).unwrap_or_default(),
                    false,
                )?;
            }
        }
        Command::Baseline {
            common,
            name,
            scenario,
            episodes,
            trace,
        } => {
            let cfg = common.load()?;
            let baseline: Baseline = name.parse()?;
            let env_cfg = cfg.env_config();
            let list = scenarios(&cfg, &scenario);
            for sc in &list {
                let s = evaluate_baseline(&env_cfg, baseline, sc, episodes, cfg.master_seed)?;
                report(&baseline.to_string(), sc, &s);
            }
            if let (Some(path), Some(sc)) = (trace, list.first()) {
                let n = env_cfg.num_haps();
                let r_max = env_cfg.area.r_max;
                let seed = haps_core::harness::eval_seed(cfg.master_seed, sc, 0);
                let mut rng = stream(seed, Stream::Baseline);
                let policy = |env: &HapsEnv, _: &haps_core::env::Observation| match baseline {
                    Baseline::Static | Baseline::NoControl => vec![Action::HOLD; n],
                    Baseline::Oracle => oracle_actions(env),
                    Baseline::Random => random_actions(n, r_max, &mut rng),
                };
                trace_to(&path, &cfg, sc, policy, baseline == Baseline::Static)?;
            }
        }
        Command::Plot { metrics, out, window } => {
            let text = std::fs::read_to_string(&metrics)?;
            let rows = parse_metrics(&text)?;
            let dir = out.unwrap_or_else(|| metrics.parent().map(Path::to_path_buf).unwrap_or_default());
            for path in plot_metrics(&rows, window, &dir)? {
                println!("{}", path.display());
            }
        }
        Command::Check { common } => {
            let cfg = common.load()?;
            let results = run_checks(&cfg);
            for c in &results {
                println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            let failed = results.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                return Err(SimError::InvalidConfig(format!("{failed} invariant check(s) failed")));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
