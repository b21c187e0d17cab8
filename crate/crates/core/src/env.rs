//! Episodic RL environment around the simulator.
//!
//! Each step advances the wind, moves the HAPS (command plus drift), moves
//! the hotspots, redraws fading, evaluates the radio frame and returns a
//! sigmoid-normalized fair-rate reward.

use crate::channel::{circular_stats, compute_frame, linear_to_db, FrameRadio, LinkState, RadioConfig};
use crate::error::{Result, SimError};
use crate::geom::Vec2;
use crate::mobility::{init_world, step_haps, step_hotspots, Action, AreaConfig, Scenario, WorldState};
use crate::rng::{stream, SimRng, Stream};
use crate::wind::{WindConfig, WindProcess};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::f64::consts::PI;
use std::io::Write;

/// Raw and normalized features per HAPS per history slot.
pub const FEATURES_PER_HAPS: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardConfig {
    /// Sigmoid slope.
    pub c_s: f64,
    /// Fair rate mapped to a reward of one half.
    pub c_m: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self { c_s: 0.25, c_m: 50.0 }
    }
}

impl RewardConfig {
    pub fn reward(&self, fair_rate: f64) -> f64 {
        1.0 / (1.0 + (-self.c_s * (fair_rate - self.c_m)).exp())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpisodeConfig {
    pub frames_per_episode: u64,
    /// Seconds per frame; must agree with the wind step.
    pub dt: f64,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            frames_per_episode: 128,
            dt: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObservationConfig {
    /// Frames of history stacked into one observation.
    pub memory: usize,
    /// SINR clipping window (dB) before scaling to [-1, 1].
    pub sinr_min_db: f64,
    pub sinr_max_db: f64,
}

impl Default for ObservationConfig {
    fn default() -> Self {
        Self {
            memory: 1,
            sinr_min_db: -20.0,
            sinr_max_db: 60.0,
        }
    }
}

/// Everything that shapes the environment.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    pub wind: WindConfig,
    pub area: AreaConfig,
    pub radio: RadioConfig,
    pub reward: RewardConfig,
    pub episode: EpisodeConfig,
    pub observation: ObservationConfig,
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        self.wind.validate()?;
        self.area.validate()?;
        self.radio.validate()?;
        let bad = |msg: &str| Err(SimError::InvalidConfig(msg.to_string()));
        if !(self.reward.c_s > 0.0 && self.reward.c_m.is_finite()) {
            return bad("reward: c_s must be positive");
        }
        if self.episode.frames_per_episode < 1 {
            return bad("episode: need at least one frame");
        }
        if self.episode.dt != self.wind.dt {
            return bad("episode.dt and wind.dt must agree");
        }
        if self.observation.memory < 1 || self.observation.sinr_max_db <= self.observation.sinr_min_db {
            return bad("observation: need memory >= 1 and a non-empty SINR window");
        }
        Ok(())
    }

    pub fn num_haps(&self) -> usize {
        self.area.num_haps
    }

    pub fn observation_dim(&self) -> usize {
        FEATURES_PER_HAPS * self.area.num_haps * self.observation.memory
    }

    pub fn action_dim(&self) -> usize {
        2 * self.area.num_haps
    }
}

/// One frame of aggregated measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameObservation {
    /// Per HAPS: x, y, z (m), mean SINR (dB), AoA mean (rad), AoA std (rad).
    pub raw: Vec<f64>,
    /// Per HAPS: x/L, y/L, scaled SINR, sin(mean), cos(mean), scaled std.
    pub normalized: Vec<f64>,
}

/// What the agent sees: the last `memory` frames, oldest first.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub raw: Vec<f64>,
    pub normalized: Vec<f64>,
    pub memory: usize,
}

impl Observation {
    fn newest_offset(&self) -> usize {
        self.raw.len() / self.memory * (self.memory - 1)
    }

    /// Raw (x, y, z) of HAPS `d` in the newest frame.
    pub fn haps_position(&self, d: usize) -> (f64, f64, f64) {
        let base = self.newest_offset() + FEATURES_PER_HAPS * d;
        (self.raw[base], self.raw[base + 1], self.raw[base + 2])
    }

    /// Raw (mean SINR dB, AoA mean, AoA std) of HAPS `d` in the newest frame.
    pub fn haps_measurements(&self, d: usize) -> (f64, f64, f64) {
        let base = self.newest_offset() + FEATURES_PER_HAPS * d;
        (self.raw[base + 3], self.raw[base + 4], self.raw[base + 5])
    }
}

/// Aggregates per-UE SINR and AoA into one observation frame.
///
/// `effective_sinr` and `aoa` are indexed `hotspot * n + i`; hotspot `h` is
/// served by HAPS `h`.
pub fn observe(
    world: &WorldState,
    area: &AreaConfig,
    cfg: &ObservationConfig,
    effective_sinr: &[f64],
    aoa: &[f64],
) -> FrameObservation {
    let n = area.ues_per_hotspot;
    let d_count = world.haps_xy.len();
    let mut raw = Vec::with_capacity(FEATURES_PER_HAPS * d_count);
    let mut normalized = Vec::with_capacity(FEATURES_PER_HAPS * d_count);
    let span = cfg.sinr_max_db - cfg.sinr_min_db;
    for d in 0..d_count {
        let block = d * n..(d + 1) * n;
        let mean_sinr_db = effective_sinr[block.clone()]
            .iter()
            .map(|&g| linear_to_db(g.max(1e-30)))
            .sum::<f64>()
            / n as f64;
        let stats = circular_stats(&aoa[block]);
        let xy = world.haps_xy[d];
        raw.extend_from_slice(&[xy.x, xy.y, area.haps_altitude, mean_sinr_db, stats.mean, stats.std]);
        let sinr_scaled = 2.0 * (mean_sinr_db.clamp(cfg.sinr_min_db, cfg.sinr_max_db) - cfg.sinr_min_db) / span - 1.0;
        normalized.extend_from_slice(&[
            xy.x / area.half_extent,
            xy.y / area.half_extent,
            sinr_scaled,
            stats.mean.sin(),
            stats.mean.cos(),
            2.0 * (stats.std / PI).min(1.0) - 1.0,
        ]);
    }
    FrameObservation { raw, normalized }
}

/// Diagnostics of one step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepInfo {
    pub fair_rate: f64,
    pub sum_throughput_mbps: f64,
    /// Wind applied to each HAPS this frame (m/s).
    pub wind: Vec<Vec2>,
    /// Horizontal HAPS-to-own-hotspot distances after the step (m).
    pub distances: Vec<f64>,
    pub floored_rates: usize,
    pub degenerate_aoa: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

pub struct HapsEnv {
    cfg: EnvConfig,
    world: WorldState,
    wind: WindProcess<SimRng>,
    links: LinkState,
    fading_rng: SimRng,
    history: VecDeque<FrameObservation>,
    last_radio: FrameRadio,
    last_wind: Vec<Vec2>,
    hold_station: bool,
    done: bool,
}

impl HapsEnv {
    /// Builds an environment already reset to `scenario`.
    pub fn new(cfg: EnvConfig, scenario: &Scenario, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let (world, wind, links, fading_rng, last_radio) = Self::fresh(&cfg, scenario, seed)?;
        let d = cfg.num_haps();
        let mut env = Self {
            cfg,
            world,
            wind,
            links,
            fading_rng,
            history: VecDeque::new(),
            last_radio,
            last_wind: vec![Vec2::ZERO; d],
            hold_station: false,
            done: false,
        };
        env.reset_history();
        Ok(env)
    }

    #[allow(clippy::type_complexity)]
    fn fresh(
        cfg: &EnvConfig,
        scenario: &Scenario,
        seed: u64,
    ) -> Result<(WorldState, WindProcess<SimRng>, LinkState, SimRng, FrameRadio)> {
        let world = init_world(&cfg.area, scenario, &mut stream(seed, Stream::Placement))?;
        let wind = WindProcess::new(cfg.wind.clone(), cfg.num_haps(), stream(seed, Stream::Wind));
        let mut links = LinkState::new(&cfg.area, &cfg.radio, &mut stream(seed, Stream::Shadowing));
        let mut fading_rng = stream(seed, Stream::Fading);
        links.redraw_fading(&world, &cfg.area, &cfg.radio, &mut fading_rng);
        let radio = compute_frame(&world, &cfg.area, &cfg.radio, &links);
        Ok((world, wind, links, fading_rng, radio))
    }

    pub fn reset(&mut self, scenario: &Scenario, seed: u64) -> Result<Observation> {
        let (world, wind, links, fading_rng, radio) = Self::fresh(&self.cfg, scenario, seed)?;
        self.world = world;
        self.wind = wind;
        self.links = links;
        self.fading_rng = fading_rng;
        self.last_radio = radio;
        self.last_wind = vec![Vec2::ZERO; self.cfg.num_haps()];
        self.done = false;
        self.reset_history();
        Ok(self.observation())
    }

    fn current_frame(&self) -> FrameObservation {
        observe(
            &self.world,
            &self.cfg.area,
            &self.cfg.observation,
            &self.last_radio.effective_sinr,
            &self.last_radio.aoa,
        )
    }

    fn reset_history(&mut self) {
        let frame = self.current_frame();
        self.history = std::iter::repeat_n(frame, self.cfg.observation.memory).collect();
    }

    pub fn observation(&self) -> Observation {
        Observation {
            raw: self.history.iter().flat_map(|f| f.raw.iter().copied()).collect(),
            normalized: self.history.iter().flat_map(|f| f.normalized.iter().copied()).collect(),
            memory: self.cfg.observation.memory,
        }
    }

    /// Holds every HAPS against the wind (used by the static baseline).
    pub fn set_hold_station(&mut self, hold: bool) {
        self.hold_station = hold;
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn world(&self) -> &WorldState {
        &self.world
    }

    pub fn radio(&self) -> &FrameRadio {
        &self.last_radio
    }

    pub fn links(&self) -> &LinkState {
        &self.links
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    /// Wind each HAPS will feel on the next step. Does not disturb the stream.
    pub fn peek_next_wind(&self) -> Vec<Vec2> {
        let mut probe = self.wind.clone();
        probe.advance();
        probe.velocities(self.cfg.num_haps())
    }

    pub fn step(&mut self, actions: &[Action]) -> Result<StepOutcome> {
        if self.done {
            return Err(SimError::StepAfterDone);
        }
        let d = self.cfg.num_haps();
        let dt = self.cfg.episode.dt;

        self.wind.advance();
        let wind = self.wind.velocities(d);
        let drift = if self.hold_station {
            vec![Vec2::ZERO; d]
        } else {
            wind.clone()
        };
        step_haps(&mut self.world, &self.cfg.area, actions, &drift, dt)?;
        step_hotspots(&mut self.world, &self.cfg.area, dt);
        self.world.frame += 1;
        self.links
            .redraw_fading(&self.world, &self.cfg.area, &self.cfg.radio, &mut self.fading_rng);
        self.last_radio = compute_frame(&self.world, &self.cfg.area, &self.cfg.radio, &self.links);
        let fair = self.last_radio.fair;
        if !fair.value.is_finite() {
            return Err(SimError::Numerical(format!(
                "non-finite fair rate at frame {}",
                self.world.frame
            )));
        }
        let reward = self.cfg.reward.reward(fair.value);
        self.done = self.world.frame >= self.cfg.episode.frames_per_episode;
        self.last_wind = wind.clone();

        let frame = self.current_frame();
        self.history.pop_front();
        self.history.push_back(frame);

        Ok(StepOutcome {
            observation: self.observation(),
            reward,
            done: self.done,
            info: StepInfo {
                fair_rate: fair.value,
                sum_throughput_mbps: self.last_radio.sum_throughput_mbps(),
                wind,
                distances: self.world.haps_to_hotspot(),
                floored_rates: fair.floored,
                degenerate_aoa: self.last_radio.degenerate_aoa,
            },
        })
    }

    /// One trace row describing the state after the latest step.
    pub fn trace_row(&self, reward: f64) -> TraceRow {
        TraceRow {
            frame: self.world.frame,
            haps_xy: self.world.haps_xy.clone(),
            hotspot_xy: self.world.hotspot_xy.clone(),
            wind: self.last_wind.first().copied().unwrap_or_default(),
            fair_rate: self.last_radio.fair.value,
            reward,
        }
    }
}

/// Per-frame trace record for plotting and regression checks.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub frame: u64,
    pub haps_xy: Vec<Vec2>,
    pub hotspot_xy: Vec<Vec2>,
    pub wind: Vec2,
    pub fair_rate: f64,
    pub reward: f64,
}

impl TraceRow {
    pub fn header(num_haps: usize) -> String {
        let mut cols = vec!["frame".to_string()];
        for d in 1..=num_haps {
            cols.push(format!("haps{d}_x"));
            cols.push(format!("haps{d}_y"));
        }
        for h in 1..=num_haps {
            cols.push(format!("hotspot{h}_x"));
            cols.push(format!("hotspot{h}_y"));
        }
        cols.extend(["wind_x", "wind_y", "fair_rate", "reward"].map(String::from));
        cols.join(",")
    }

    pub fn to_csv(&self) -> String {
        let mut cols = vec![self.frame.to_string()];
        for p in self.haps_xy.iter().chain(&self.hotspot_xy) {
            cols.push(p.x.to_string());
            cols.push(p.y.to_string());
        }
        cols.push(self.wind.x.to_string());
        cols.push(self.wind.y.to_string());
        cols.push(self.fair_rate.to_string());
        cols.push(self.reward.to_string());
        cols.join(",")
    }
}

/// Runs one episode with `policy` and writes the trace as CSV.
pub fn write_trace<W, P>(env: &mut HapsEnv, mut policy: P, out: &mut W) -> Result<()>
where
    W: Write,
    P: FnMut(&HapsEnv, &Observation) -> Vec<Action>,
{
    writeln!(out, "{}", TraceRow::header(env.config().num_haps()))?;
    let mut obs = env.observation();
    while !env.is_done() {
        let actions = policy(env, &obs);
        let outcome = env.step(&actions)?;
        writeln!(out, "{}", env.trace_row(outcome.reward).to_csv())?;
        obs = outcome.observation;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(scenario: u8, seed: u64) -> HapsEnv {
        HapsEnv::new(EnvConfig::default(), &Scenario::Preset(scenario), seed).unwrap()
    }

    fn hold(n: usize) -> Vec<Action> {
        vec![Action::HOLD; n]
    }

    #[test]
    fn reset_places_presets() {
        let e = env(1, 0);
        let got: Vec<(f64, f64)> = e.world().haps_xy.iter().map(|p| (p.x, p.y)).collect();
        assert_eq!(got, vec![(-250.0, -450.0), (450.0, 0.0), (-250.0, 450.0)]);
        let e = env(4, 0);
        assert!(e.world().haps_xy.iter().all(|p| *p == Vec2::ZERO));
        let obs = e.observation();
        assert_eq!(obs.haps_position(2), (0.0, 0.0, 20_000.0));
        assert_eq!(obs.raw.len(), EnvConfig::default().observation_dim());
    }

    #[test]
    fn reward_sigmoid_values() {
        let r = RewardConfig::default();
        assert_eq!(r.reward(50.0), 0.5);
        assert!((r.reward(54.0) - 0.731_058_578_630_004_9).abs() < 1e-12);
        assert!(r.reward(-1e6) >= 0.0 && r.reward(1e6) <= 1.0);
    }

    #[test]
    fn episode_ends_at_frame_limit() {
        let mut e = env(2, 3);
        let mut steps = 0;
        loop {
            let out = e.step(&hold(3)).unwrap();
            steps += 1;
            if out.done {
                break;
            }
        }
        assert_eq!(steps, 128);
        assert!(matches!(e.step(&hold(3)), Err(SimError::StepAfterDone)));
        e.reset(&Scenario::Preset(2), 3).unwrap();
        assert!(e.step(&hold(3)).is_ok());
    }

    #[test]
    fn same_seed_same_trajectory() {
        let run = || {
            let mut e = env(3, 42);
            (0..20)
                .map(|_| e.step(&[Action::new(0.3, 10.0); 3]).unwrap().reward)
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
        let mut other = env(3, 43);
        assert_ne!(run()[0], other.step(&[Action::new(0.3, 10.0); 3]).unwrap().reward);
    }

    #[test]
    fn calm_hold_keeps_position() {
        let cfg = EnvConfig {
            wind: WindConfig::calm(),
            ..EnvConfig::default()
        };
        let mut e = HapsEnv::new(cfg, &Scenario::Preset(1), 1).unwrap();
        let start = e.world().haps_xy.clone();
        for _ in 0..50 {
            let out = e.step(&hold(3)).unwrap();
            assert!(out.info.wind.iter().all(|w| *w == Vec2::ZERO));
        }
        assert_eq!(e.world().haps_xy, start);
    }

    #[test]
    fn hold_station_cancels_drift() {
        let mut e = env(1, 9);
        e.set_hold_station(true);
        let start = e.world().haps_xy.clone();
        let out = e.step(&hold(3)).unwrap();
        assert!(out.info.wind.iter().any(|w| w.norm() > 0.0));
        assert_eq!(e.world().haps_xy, start);
    }

    #[test]
    fn peek_matches_the_next_step() {
        let mut e = env(1, 5);
        e.step(&hold(3)).unwrap();
        let peek = e.peek_next_wind();
        let out = e.step(&hold(3)).unwrap();
        assert_eq!(peek, out.info.wind);
    }

    #[test]
    fn rejects_wrong_action_count() {
        let mut e = env(1, 0);
        assert!(e.step(&hold(2)).is_err());
        assert!(e
            .step(
                &[Action {
                    angle: 0.0,
                    distance: 60.0
                }; 3]
            )
            .is_err());
    }

    #[test]
    fn observe_examples() {
        let area = AreaConfig::default();
        let world = init_world(&area, &Scenario::Preset(1), &mut stream(0, Stream::Placement)).unwrap();
        let n = area.ues_per_hotspot;
        // 10 dB for everyone; AoA pi/2 in block 0, spread in block 1.
        let sinr = vec![10.0; 3 * n];
        let mut aoa = vec![PI / 2.0; 3 * n];
        for (i, a) in aoa[n..2 * n].iter_mut().enumerate() {
            *a = if i % 2 == 0 { 0.0 } else { PI };
        }
        let f = observe(&world, &area, &ObservationConfig::default(), &sinr, &aoa);
        let b0 = &f.normalized[0..6];
        assert!((b0[0] + 250.0 / 750.0).abs() < 1e-15);
        assert!((b0[1] + 450.0 / 750.0).abs() < 1e-15);
        // (10 + 20) / 80 * 2 - 1
        assert!((b0[2] + 0.25).abs() < 1e-12);
        assert!((b0[3] - 1.0).abs() < 1e-12 && b0[4].abs() < 1e-12);
        assert!((b0[5] + 1.0).abs() < 1e-6);
        assert!((f.raw[3] - 10.0).abs() < 1e-12);
        // Opposite bearings: resultant ~0, std saturates.
        assert!((f.normalized[6 + 5] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn observe_is_permutation_equivariant() {
        let area = AreaConfig::default();
        let mut world = init_world(&area, &Scenario::Preset(2), &mut stream(1, Stream::Placement)).unwrap();
        let n = area.ues_per_hotspot;
        let sinr: Vec<f64> = (0..3 * n).map(|i| 0.5 + i as f64).collect();
        let aoa: Vec<f64> = (0..3 * n).map(|i| (i as f64 * 0.37).sin() * 3.0).collect();
        let cfg = ObservationConfig::default();
        let base = observe(&world, &area, &cfg, &sinr, &aoa);

        let perm = [2, 0, 1];
        world.haps_xy = perm.iter().map(|&p| world.haps_xy[p]).collect();
        let block = |v: &[f64]| -> Vec<f64> { perm.iter().flat_map(|&p| v[p * n..(p + 1) * n].to_vec()).collect() };
        let permuted = observe(&world, &area, &cfg, &block(&sinr), &block(&aoa));
        for (slot, &p) in perm.iter().enumerate() {
            assert_eq!(&permuted.raw[slot * 6..slot * 6 + 6], &base.raw[p * 6..p * 6 + 6]);
            assert_eq!(
                &permuted.normalized[slot * 6..slot * 6 + 6],
                &base.normalized[p * 6..p * 6 + 6]
            );
        }
    }

    #[test]
    fn memory_stacks_frames_oldest_first() {
        let cfg = EnvConfig {
            observation: ObservationConfig {
                memory: 3,
                ..ObservationConfig::default()
            },
            ..EnvConfig::default()
        };
        let mut e = HapsEnv::new(cfg.clone(), &Scenario::Preset(1), 2).unwrap();
        let first = e.observation();
        assert_eq!(first.raw.len(), cfg.observation_dim());
        assert_eq!(first.raw[..18], first.raw[36..]);
        let out = e.step(&[Action::new(0.0, 50.0); 3]).unwrap();
        assert_eq!(out.observation.raw[..36], first.raw[18..]);
        assert_eq!(out.observation.haps_position(0).0, e.world().haps_xy[0].x);
    }

    #[test]
    fn config_checks_dt_agreement() {
        let mut cfg = EnvConfig::default();
        cfg.episode.dt = 1.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn trace_has_one_row_per_frame() {
        let mut e = env(1, 0);
        let mut out = Vec::new();
        write_trace(&mut e, |_, _| hold(3), &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 129);
        assert_eq!(text.lines().next().unwrap().split(',').count(), 17);
    }
}
