//! Experiment orchestration: configuration, training, evaluation,
//! baselines, metrics and plots.

pub mod check;
pub mod config;
pub mod metrics;
pub mod plot;
pub mod rollout;
pub mod train;

pub use check::{run_checks, CheckResult};
pub use config::{RunConfig, SCHEMA_VERSION};
pub use metrics::{parse_metrics, MetricsRow, MetricsWriter, Phase};
pub use plot::{moving_average, plot_metrics, render_svg, Series};
pub use rollout::{
    baseline_episode, eval_seed, evaluate_baseline, evaluate_policy, oracle_actions, policy_episode, random_actions,
    run_episode, train_seed, Baseline, EpisodeSummary, EvalSummary,
};
pub use train::{load_model, train, TrainOutcome};

use crate::error::SimError;

/// Process exit code for an error: 2 for numerical aborts, 1 otherwise.
pub fn exit_code(err: &SimError) -> i32 {
    match err {
        SimError::Numerical(_) => 2,
        _ => 1,
    }
}
