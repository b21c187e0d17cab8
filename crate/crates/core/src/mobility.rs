//! World geometry: bouncing hotspots, UEs riding inside them and HAPS
//! platforms moved by commanded displacements plus wind drift.

use crate::error::{Result, SimError};
use crate::geom::{Vec2, Vec3};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

/// Fixed HAPS deployments used for evaluation.
pub const PRESET_SCENARIOS: [[(f64, f64); 3]; 4] = [
    [(-250.0, -450.0), (450.0, 0.0), (-250.0, 450.0)],
    [(-450.0, 450.0), (-100.0, 0.0), (-450.0, -450.0)],
    [(-450.0, 200.0), (100.0, 100.0), (-450.0, -200.0)],
    [(0.0, 0.0), (0.0, 0.0), (0.0, 0.0)],
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AreaConfig {
    /// Service area is [-half_extent, half_extent]^2 (m).
    pub half_extent: f64,
    pub haps_altitude: f64,
    pub ue_altitude: f64,
    pub hotspot_radius: f64,
    pub ues_per_hotspot: usize,
    /// Hotspot ground speed (m/s).
    pub hotspot_speed: f64,
    pub num_haps: usize,
    /// Hotspot centroids at the start of every episode; one per HAPS.
    pub hotspot_starts: Vec<(f64, f64)>,
    /// Largest commanded displacement per frame (m).
    pub r_max: f64,
}

impl Default for AreaConfig {
    fn default() -> Self {
        Self {
            half_extent: 750.0,
            haps_altitude: 20_000.0,
            ue_altitude: 1.5,
            hotspot_radius: 50.0,
            ues_per_hotspot: 10,
            hotspot_speed: 10.0,
            num_haps: 3,
            hotspot_starts: vec![(-550.0, -550.0), (550.0, 0.0), (-550.0, 550.0)],
            r_max: 50.0,
        }
    }
}

impl AreaConfig {
    pub fn validate(&self) -> Result<()> {
        let err = |msg: &str| Err(SimError::InvalidConfig(format!("area: {msg}")));
        if !(self.half_extent > self.hotspot_radius && self.hotspot_radius > 0.0) {
            return err("need half_extent > hotspot_radius > 0");
        }
        if self.num_haps == 0 || self.ues_per_hotspot == 0 {
            return err("need at least one HAPS and one UE per hotspot");
        }
        if self.hotspot_starts.len() != self.num_haps {
            return err("one hotspot per HAPS is required");
        }
        if self
            .hotspot_starts
            .iter()
            .any(|&(x, y)| x.abs() > self.half_extent || y.abs() > self.half_extent)
        {
            return err("hotspot start outside the area");
        }
        if !(self.r_max > 0.0 && self.haps_altitude > self.ue_altitude) {
            return err("need r_max > 0 and HAPS above UEs");
        }
        Ok(())
    }

    pub fn num_hotspots(&self) -> usize {
        self.hotspot_starts.len()
    }
}

/// Initial HAPS deployment.
#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    /// One of the four fixed deployments, numbered from 1.
    Preset(u8),
    /// Uniform over the service area (training).
    Random,
    Custom(Vec<Vec2>),
}

impl Scenario {
    pub fn positions<R: Rng + ?Sized>(&self, area: &AreaConfig, rng: &mut R) -> Result<Vec<Vec2>> {
        let positions: Vec<Vec2> = match self {
            Scenario::Preset(id) => {
                let row = PRESET_SCENARIOS
                    .get((*id as usize).wrapping_sub(1))
                    .ok_or_else(|| SimError::InvalidScenario(id.to_string()))?;
                row.iter().map(|&(x, y)| Vec2::new(x, y)).collect()
            }
            Scenario::Random => (0..area.num_haps)
                .map(|_| {
                    let l = area.half_extent;
                    Vec2::new(rng.random_range(-l..=l), rng.random_range(-l..=l))
                })
                .collect(),
            Scenario::Custom(list) => list.clone(),
        };
        if positions.len() != area.num_haps {
            return Err(SimError::ScenarioLength {
                expected: area.num_haps,
                got: positions.len(),
            });
        }
        Ok(positions)
    }
}

impl FromStr for Scenario {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "random" => Ok(Scenario::Random),
            other => match other.parse::<u8>() {
                Ok(id @ 1..=4) => Ok(Scenario::Preset(id)),
                _ => Err(SimError::InvalidScenario(other.to_string())),
            },
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scenario::Preset(id) => write!(f, "{id}"),
            Scenario::Random => write!(f, "random"),
            Scenario::Custom(_) => write!(f, "custom"),
        }
    }
}

/// Movement command for one HAPS.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Action {
    /// Heading, radians from east.
    pub angle: f64,
    /// Commanded displacement this frame (m).
    pub distance: f64,
}

impl Action {
    pub const HOLD: Action = Action {
        angle: 0.0,
        distance: 0.0,
    };

    pub fn new(angle: f64, distance: f64) -> Self {
        Self { angle, distance }
    }

    /// Action whose displacement is `v`, shortened to `r_max` if needed.
    pub fn toward(v: Vec2, r_max: f64) -> Self {
        let distance = v.norm().min(r_max);
        if distance == 0.0 {
            Action::HOLD
        } else {
            Action::new(v.angle(), distance)
        }
    }

    pub fn displacement(self) -> Vec2 {
        Vec2::from_angle(self.angle) * self.distance
    }

    // pi is accepted alongside -pi; both point west.
    fn in_bounds(self, r_max: f64) -> bool {
        const SLACK: f64 = 1e-9;
        (-PI - SLACK..=PI + SLACK).contains(&self.angle) && (-SLACK..=r_max + SLACK).contains(&self.distance)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub haps_xy: Vec<Vec2>,
    pub hotspot_xy: Vec<Vec2>,
    pub hotspot_vel: Vec<Vec2>,
    /// Per hotspot, per UE offset from the centroid.
    pub ue_offsets: Vec<Vec<Vec2>>,
    pub frame: u64,
}

impl WorldState {
    pub fn ue_xy(&self, hotspot: usize, ue: usize) -> Vec2 {
        self.hotspot_xy[hotspot] + self.ue_offsets[hotspot][ue]
    }

    pub fn haps_position(&self, area: &AreaConfig, d: usize) -> Vec3 {
        self.haps_xy[d].with_z(area.haps_altitude)
    }

    pub fn ue_position(&self, area: &AreaConfig, hotspot: usize, ue: usize) -> Vec3 {
        self.ue_xy(hotspot, ue).with_z(area.ue_altitude)
    }

    /// Horizontal distance from each HAPS to its own hotspot centroid.
    pub fn haps_to_hotspot(&self) -> Vec<f64> {
        self.haps_xy
            .iter()
            .zip(&self.hotspot_xy)
            .map(|(h, c)| h.distance(*c))
            .collect()
    }
}

fn sample_in_disc<R: Rng + ?Sized>(radius: f64, rng: &mut R) -> Vec2 {
    let r = radius * rng.random::<f64>().sqrt();
    let theta = TAU * rng.random::<f64>();
    Vec2::from_angle(theta) * r
}

/// Hotspots left of the origin head east, the others head west.
fn initial_heading(start: Vec2) -> Vec2 {
    if start.x < 0.0 {
        Vec2::new(1.0, 0.0)
    } else {
        Vec2::new(-1.0, 0.0)
    }
}

pub fn init_world<R: Rng + ?Sized>(area: &AreaConfig, scenario: &Scenario, rng: &mut R) -> Result<WorldState> {
    let haps_xy = scenario.positions(area, rng)?;
    let hotspot_xy: Vec<Vec2> = area.hotspot_starts.iter().map(|&(x, y)| Vec2::new(x, y)).collect();
    let hotspot_vel = hotspot_xy
        .iter()
        .map(|&c| initial_heading(c) * area.hotspot_speed)
        .collect();
    let ue_offsets = hotspot_xy
        .iter()
        .map(|_| {
            (0..area.ues_per_hotspot)
                .map(|_| sample_in_disc(area.hotspot_radius, rng))
                .collect()
        })
        .collect();
    Ok(WorldState {
        haps_xy,
        hotspot_xy,
        hotspot_vel,
        ue_offsets,
        frame: 0,
    })
}

/// Moves `pos` by `vel * dt` inside [-limit, limit], mirroring at walls.
fn reflect_axis(pos: f64, vel: f64, dt: f64, limit: f64) -> (f64, f64) {
    let mut p = pos + vel * dt;
    let mut v = vel;
    while p > limit || p < -limit {
        if p > limit {
            p = 2.0 * limit - p;
        } else {
            p = -2.0 * limit - p;
        }
        v = -v;
    }
    (p, v)
}

pub fn step_hotspots(world: &mut WorldState, area: &AreaConfig, dt: f64) {
    for (c, v) in world.hotspot_xy.iter_mut().zip(world.hotspot_vel.iter_mut()) {
        let (x, vx) = reflect_axis(c.x, v.x, dt, area.half_extent);
        let (y, vy) = reflect_axis(c.y, v.y, dt, area.half_extent);
        *c = Vec2::new(x, y);
        *v = Vec2::new(vx, vy);
    }
}

/// Applies commanded displacements and wind drift, then clamps to the area.
pub fn step_haps(world: &mut WorldState, area: &AreaConfig, actions: &[Action], wind: &[Vec2], dt: f64) -> Result<()> {
    if actions.len() != world.haps_xy.len() {
        return Err(SimError::ActionCount {
            expected: world.haps_xy.len(),
            got: actions.len(),
        });
    }
    if let Some((index, a)) = actions.iter().enumerate().find(|(_, a)| !a.in_bounds(area.r_max)) {
        return Err(SimError::ActionOutOfBounds {
            index,
            angle: a.angle,
            distance: a.distance,
        });
    }
    for ((xy, action), w) in world.haps_xy.iter_mut().zip(actions).zip(wind) {
        *xy = (*xy + action.displacement() + *w * dt).clamp_box(area.half_extent);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};
    use proptest::prelude::*;

    fn world(scenario: Scenario) -> WorldState {
        init_world(&AreaConfig::default(), &scenario, &mut stream(3, Stream::Placement)).unwrap()
    }

    #[test]
    fn preset_positions() {
        let w = world(Scenario::Preset(1));
        assert_eq!(
            w.haps_xy,
            vec![
                Vec2::new(-250.0, -450.0),
                Vec2::new(450.0, 0.0),
                Vec2::new(-250.0, 450.0)
            ]
        );
        let area = AreaConfig::default();
        assert_eq!(w.haps_position(&area, 0).z, 20_000.0);
        let w = world(Scenario::Preset(4));
        assert!(w.haps_xy.iter().all(|p| *p == Vec2::ZERO));
    }

    #[test]
    fn hotspots_start_on_their_tracks() {
        let w = world(Scenario::Random);
        assert_eq!(w.hotspot_xy[1], Vec2::new(550.0, 0.0));
        assert_eq!(w.hotspot_vel[0], Vec2::new(10.0, 0.0));
        assert_eq!(w.hotspot_vel[1], Vec2::new(-10.0, 0.0));
        assert_eq!(w.hotspot_vel[2], Vec2::new(10.0, 0.0));
    }

    #[test]
    fn ue_offsets_inside_disc() {
        for seed in 0..20 {
            let w = init_world(
                &AreaConfig::default(),
                &Scenario::Random,
                &mut stream(seed, Stream::Placement),
            )
            .unwrap();
            let offsets: Vec<_> = w.ue_offsets.iter().flatten().collect();
            assert_eq!(offsets.len(), 30);
            assert!(offsets.iter().all(|o| o.norm() <= 50.0));
        }
    }

    #[test]
    fn wrong_scenario_length_is_rejected() {
        let err = init_world(
            &AreaConfig::default(),
            &Scenario::Custom(vec![Vec2::ZERO]),
            &mut stream(0, Stream::Placement),
        );
        assert!(matches!(err, Err(SimError::ScenarioLength { expected: 3, got: 1 })));
        assert!("5".parse::<Scenario>().is_err());
        assert_eq!("random".parse::<Scenario>().unwrap(), Scenario::Random);
    }

    #[test]
    fn reflection_at_east_wall() {
        let area = AreaConfig::default();
        let mut w = world(Scenario::Preset(1));
        w.hotspot_xy[0] = Vec2::new(740.0, 0.0);
        w.hotspot_vel[0] = Vec2::new(10.0, 0.0);
        w.hotspot_xy[1] = Vec2::ZERO;
        w.hotspot_vel[1] = Vec2::new(10.0, 0.0);
        step_hotspots(&mut w, &area, 2.0);
        assert_eq!(w.hotspot_xy[0], Vec2::new(740.0, 0.0));
        assert_eq!(w.hotspot_vel[0], Vec2::new(-10.0, 0.0));
        assert_eq!(w.hotspot_xy[1], Vec2::new(20.0, 0.0));
    }

    #[test]
    fn bounce_period_returns_to_start() {
        // Across the box and back is 4L of travel.
        let area = AreaConfig::default();
        let mut w = world(Scenario::Preset(1));
        let start = w.hotspot_xy.clone();
        let vel = w.hotspot_vel.clone();
        for _ in 0..150 {
            step_hotspots(&mut w, &area, 2.0);
        }
        for (a, b) in w.hotspot_xy.iter().zip(&start) {
            assert!(a.distance(*b) < 1e-9);
        }
        assert_eq!(w.hotspot_vel, vel);
    }

    #[test]
    fn haps_displacements() {
        let area = AreaConfig::default();
        let cases = [
            (Action::new(0.0, 0.0), Vec2::new(4.0, 0.0), Vec2::new(8.0, 0.0)),
            (Action::new(PI / 2.0, 10.0), Vec2::ZERO, Vec2::new(0.0, 10.0)),
            (Action::new(PI, 8.0), Vec2::new(4.0, 0.0), Vec2::ZERO),
        ];
        for (action, wind, expected) in cases {
            let mut w = world(Scenario::Preset(4));
            step_haps(&mut w, &area, &[action; 3], &[wind; 3], 2.0).unwrap();
            assert!(w.haps_xy[0].distance(expected) < 1e-9, "{action:?}");
        }
    }

    #[test]
    fn out_of_bounds_action_rejected() {
        let area = AreaConfig::default();
        let mut w = world(Scenario::Preset(4));
        let bad = [Action::HOLD, Action::new(0.0, 51.0), Action::HOLD];
        assert!(matches!(
            step_haps(&mut w, &area, &bad, &[Vec2::ZERO; 3], 2.0),
            Err(SimError::ActionOutOfBounds { index: 1, .. })
        ));
    }

    proptest! {
        #[test]
        fn positions_stay_inside_area(
            seed in 0u64..1000,
            moves in prop::collection::vec((-PI..PI, 0.0f64..50.0, -10.0f64..10.0, -10.0f64..10.0), 1..200),
        ) {
            let area = AreaConfig::default();
            let mut w = init_world(&area, &Scenario::Random, &mut stream(seed, Stream::Placement)).unwrap();
            let offsets = w.ue_offsets.clone();
            for (angle, dist, wx, wy) in moves {
                step_haps(&mut w, &area, &[Action::new(angle, dist); 3], &[Vec2::new(wx, wy); 3], 2.0).unwrap();
                step_hotspots(&mut w, &area, 2.0);
                for p in w.haps_xy.iter().chain(&w.hotspot_xy) {
                    prop_assert!(p.x.abs() <= 750.0 && p.y.abs() <= 750.0);
                }
            }
            prop_assert_eq!(&w.ue_offsets, &offsets);
            let ue = w.ue_xy(1, 3);
            prop_assert_eq!(ue, w.hotspot_xy[1] + offsets[1][3]);
        }

        #[test]
        fn hold_without_wind_is_fixed_point(seed in 0u64..1000) {
            let area = AreaConfig::default();
            let mut w = init_world(&area, &Scenario::Random, &mut stream(seed, Stream::Placement)).unwrap();
            let before = w.haps_xy.clone();
            step_haps(&mut w, &area, &[Action::HOLD; 3], &[Vec2::ZERO; 3], 2.0).unwrap();
            prop_assert_eq!(w.haps_xy, before);
        }
    }
}
