//! Library-level training, checkpoint and baseline contracts.

use haps_core::env::HapsEnv;
use haps_core::harness::{
    baseline_episode, eval_seed, evaluate_baseline, evaluate_policy, load_model, parse_metrics, plot_metrics, train,
    Baseline, Phase, RunConfig,
};
use haps_core::mobility::Scenario;
use haps_core::ppo::checkpoint;

fn quick(seed: u64, episodes: usize) -> RunConfig {
    RunConfig {
        master_seed: seed,
        episodes,
        eval_every: 2,
        eval_episodes: 1,
        ..RunConfig::default()
    }
}

#[test]
fn training_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick(11, 3);
    let a = train(&cfg, &dir.path().join("a"), |_| {}).unwrap();
    let b = train(&cfg, &dir.path().join("b"), |_| {}).unwrap();
    let read = |p: &str| std::fs::read(dir.path().join(p).join("metrics.csv")).unwrap();
    assert_eq!(read("a"), read("b"));
    assert_eq!(a.model, b.model);

    let c = train(&quick(12, 3), &dir.path().join("c"), |_| {}).unwrap();
    assert_ne!(read("a"), read("c"));
    assert_ne!(a.model, c.model);
}

#[test]
fn metrics_file_round_trips_through_parser() {
    let dir = tempfile::tempdir().unwrap();
    let out = train(&quick(5, 2), dir.path(), |_| {}).unwrap();
    let parsed = parse_metrics(&std::fs::read_to_string(dir.path().join("metrics.csv")).unwrap()).unwrap();
    assert_eq!(parsed, out.rows);
    assert_eq!(parsed.iter().filter(|r| r.phase == Phase::Eval).count(), 4);
    assert!(parsed.iter().all(|r| r.mean_distance_m.len() == 3));
}

#[test]
fn checkpoint_reload_gives_identical_evaluation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick(2, 1);
    let out = train(&cfg, dir.path(), |_| {}).unwrap();
    let loaded = load_model(&cfg, &dir.path().join("checkpoint_final.txt")).unwrap();
    assert_eq!(loaded, out.model);
    let env_cfg = cfg.env_config();
    let sc = Scenario::Preset(3);
    let a = evaluate_policy(&env_cfg, &out.model, &sc, 2, 9).unwrap();
    let b = evaluate_policy(&env_cfg, &loaded, &sc, 2, 9).unwrap();
    assert_eq!(a, b);

    let text = std::fs::read_to_string(dir.path().join("checkpoint_final.txt")).unwrap();
    assert_eq!(checkpoint::from_str(&text, None).unwrap(), out.model);
}

#[test]
fn scenario_four_starts_every_haps_at_origin() {
    let cfg = RunConfig::default();
    let env = HapsEnv::new(
        cfg.env_config(),
        &Scenario::Preset(4),
        eval_seed(0, &Scenario::Preset(4), 0),
    )
    .unwrap();
    for h in &env.world().haps_xy {
        assert_eq!((h.x, h.y), (0.0, 0.0));
    }
}

#[test]
fn random_baseline_is_noisier_than_static() {
    // Variance of the per-episode mean reward across 50 paired episodes.
    let env_cfg = RunConfig::default().env_config();
    let sc = Scenario::Preset(1);
    let var = |b: Baseline| {
        let r: Vec<f64> = (0..50)
            .map(|k| {
                baseline_episode(&env_cfg, b, &sc, eval_seed(21, &sc, k))
                    .unwrap()
                    .mean_reward
            })
            .collect();
        let m = r.iter().sum::<f64>() / r.len() as f64;
        r.iter().map(|x| (x - m).powi(2)).sum::<f64>() / r.len() as f64
    };
    let (random, fixed) = (var(Baseline::Random), var(Baseline::Static));
    assert!(random > fixed, "random {random:.3e} vs static {fixed:.3e}");
}

#[test]
fn oracle_beats_nocontrol_on_every_scenario() {
    let env_cfg = RunConfig::default().env_config();
    for id in 1..=4 {
        let sc = Scenario::Preset(id);
        let oracle = evaluate_baseline(&env_cfg, Baseline::Oracle, &sc, 3, 4).unwrap();
        let drift = evaluate_baseline(&env_cfg, Baseline::NoControl, &sc, 3, 4).unwrap();
        assert!(oracle.reward_mean > drift.reward_mean, "scenario {id}");
    }
}

#[test]
fn plots_are_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let out = train(&quick(1, 2), &dir.path().join("run"), |_| {}).unwrap();
    let first = plot_metrics(&out.rows, 3, &dir.path().join("p1")).unwrap();
    let second = plot_metrics(&out.rows, 3, &dir.path().join("p2")).unwrap();
    assert_eq!(first.len(), 4);
    for (a, b) in first.iter().zip(&second) {
        assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    }
}
