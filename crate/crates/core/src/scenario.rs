//! Problem instances: rewarded target locations, the sensor field, the
//! travel budget and the turning-radius interval.
//!
//! Scenario files are JSON documents:
//!
//! ```json
//! {
//!   "name": "example",
//!   "t_max": 100.0,
//!   "rho_min": 1.0,
//!   "rho_max": 2.0,
//!   "closed": false,
//!   "sensing": { "alpha": 50.0, "mu": 2.0, "cap": 30.0 },
//!   "sensors": [[15.0, 11.0], [12.0, 11.0]],
//!   "locations": [
//!     { "id": 0, "x": 2.0, "y": 2.0, "reward": 0.0 },
//!     { "id": 1, "x": 8.0, "y": 5.0, "reward": 0.6 },
//!     { "id": 2, "x": 28.0, "y": 20.0, "reward": 0.0 }
//!   ],
//!   "start_id": 0,
//!   "goal_id": 2,
//!   "fixed_headings": [{ "id": 0, "heading": 0.0 }]
//! }
//! ```
//!
//! `fixed_headings` is optional. In memory the start location is always
//! stored first and the goal last; the remaining locations keep file order.

use std::collections::HashSet;
use std::f64::consts::TAU;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{dubins_shortest, Pose};
use crate::sensing::{SensingError, SensorField};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("parse error at `{path}`: {message}")]
    Parse { path: String, message: String },
    #[error("invalid `{field}`: {message}")]
    Invalid { field: String, message: String },
    #[error("unknown location id {0}")]
    UnknownId(u32),
}

impl ScenarioError {
    fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        ScenarioError::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }
}

/// Reward levels used by the generated instances.
pub const REWARD_LEVELS: [f64; 5] = [0.2, 0.4, 0.6, 0.8, 1.0];
pub const DEFAULT_ALPHA: f64 = 50.0;
pub const DEFAULT_MU: f64 = 2.0;
pub const DEFAULT_CAP: f64 = 30.0;
/// Instance seed used for the builtin `cross` and `grid` instances.
pub const DEFAULT_INSTANCE_SEED: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetLocation {
    pub id: u32,
    pub position: [f64; 2],
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    /// Index 0 is the start, the last entry is the goal.
    pub locations: Vec<TargetLocation>,
    pub field: SensorField<f64>,
    pub t_max: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub closed: bool,
    /// Optional per-location heading (same indexing as `locations`).
    pub fixed_headings: Option<Vec<Option<f64>>>,
}

impl Scenario {
    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    pub fn start(&self) -> &TargetLocation {
        &self.locations[0]
    }

    pub fn goal(&self) -> &TargetLocation {
        &self.locations[self.locations.len() - 1]
    }

    pub fn goal_index(&self) -> usize {
        self.locations.len() - 1
    }

    pub fn index_of(&self, id: u32) -> Option<usize> {
        self.locations.iter().position(|l| l.id == id)
    }

    pub fn fixed_heading(&self, index: usize) -> Option<f64> {
        self.fixed_headings
            .as_ref()
            .and_then(|h| h.get(index).copied().flatten())
    }

    pub fn total_available_reward(&self) -> f64 {
        self.locations.iter().map(|l| l.reward).sum()
    }

    /// Shortest possible start-to-goal tour (no intermediate locations).
    pub fn direct_length(&self) -> f64 {
        if self.closed {
            return 0.0;
        }
        let [sx, sy] = self.start().position;
        let [gx, gy] = self.goal().position;
        let line = (gy - sy).atan2(gx - sx);
        let start = Pose::new(sx, sy, self.fixed_heading(0).unwrap_or(line));
        let goal = Pose::new(
            gx,
            gy,
            self.fixed_heading(self.goal_index()).unwrap_or(line),
        );
        dubins_shortest(start, goal, self.rho_min)
            .map(|p| p.length)
            .unwrap_or(f64::INFINITY)
    }

    /// Copy without sensor nodes, as used by single-objective runs.
    pub fn without_sensors(&self) -> Scenario {
        Scenario {
            field: self.field.emptied(),
            ..self.clone()
        }
    }

    /// Circuit variant: the goal is moved onto the start position.
    pub fn closed_variant(&self) -> Scenario {
        let mut out = self.clone();
        let start = out.locations[0].position;
        let g = out.goal_index();
        out.locations[g].position = start;
        out.closed = true;
        out.name = format!("{}-closed", self.name);
        out
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.locations.len() < 2 {
            return Err(ScenarioError::invalid(
                "locations",
                format!("need at least 2 locations, got {}", self.locations.len()),
            ));
        }
        if !(self.t_max > 0.0) || !self.t_max.is_finite() {
            return Err(ScenarioError::invalid(
                "t_max",
                format!("must be positive, got {}", self.t_max),
            ));
        }
        if !(self.rho_min > 0.0) || !self.rho_min.is_finite() {
            return Err(ScenarioError::invalid(
                "rho_min",
                format!("must be positive, got {}", self.rho_min),
            ));
        }
        if !self.rho_max.is_finite() || self.rho_min > self.rho_max {
            return Err(ScenarioError::invalid(
                "rho_min, rho_max",
                format!(
                    "rho_min ({}) must not exceed rho_max ({})",
                    self.rho_min, self.rho_max
                ),
            ));
        }
        self.field.validate().map_err(|e| match e {
            SensingError::InvalidConstant { name, .. } => {
                ScenarioError::invalid(format!("sensing.{name}"), e.to_string())
            }
            SensingError::NonFiniteNode(i) => {
                ScenarioError::invalid(format!("sensors[{i}]"), e.to_string())
            }
            SensingError::InvalidStep(_) => ScenarioError::invalid("sensing", e.to_string()),
        })?;
        let mut seen = HashSet::new();
        for (i, loc) in self.locations.iter().enumerate() {
            if !seen.insert(loc.id) {
                return Err(ScenarioError::invalid(
                    format!("locations[{i}].id"),
                    format!("duplicate id {}", loc.id),
                ));
            }
            if !loc.position.iter().all(|v| v.is_finite()) {
                return Err(ScenarioError::invalid(
                    format!("locations[{i}]"),
                    "non-finite position",
                ));
            }
            if !(loc.reward >= 0.0) || !loc.reward.is_finite() {
                return Err(ScenarioError::invalid(
                    format!("locations[{i}].reward"),
                    format!("must be non-negative, got {}", loc.reward),
                ));
            }
        }
        if self.start().reward != 0.0 || self.goal().reward != 0.0 {
            return Err(ScenarioError::invalid(
                "start_id, goal_id",
                "start and goal rewards must be 0",
            ));
        }
        if self.closed && self.start().position != self.goal().position {
            return Err(ScenarioError::invalid(
                "closed",
                "closed scenarios need coinciding start and goal positions",
            ));
        }
        if let Some(h) = &self.fixed_headings {
            if h.len() != self.locations.len() {
                return Err(ScenarioError::invalid(
                    "fixed_headings",
                    "one entry per location expected",
                ));
            }
            for (i, v) in h.iter().enumerate() {
                if let Some(theta) = v {
                    if !(0.0..TAU).contains(theta) {
                        return Err(ScenarioError::invalid(
                            format!("fixed_headings[{i}]"),
                            format!("heading {theta} outside [0, 2π)"),
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Adds rewards and snaps the total to a 1e-9 grid, so that equal totals
/// reached in different orders compare equal (0.2 + 0.4 vs 0.6).
pub fn sum_rewards(rewards: impl IntoIterator<Item = f64>) -> f64 {
    let sum: f64 = rewards.into_iter().sum();
    (sum * 1e9).round() / 1e9
}

/// Sum of rewards of the given location ids.
pub fn total_reward(scenario: &Scenario, ids: &[u32]) -> Result<f64, ScenarioError> {
    let rewards = ids
        .iter()
        .map(|&id| {
            scenario
                .index_of(id)
                .map(|i| scenario.locations[i].reward)
                .ok_or(ScenarioError::UnknownId(id))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(sum_rewards(rewards))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SensingConstants {
    alpha: f64,
    mu: f64,
    cap: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LocationRecord {
    id: u32,
    x: f64,
    y: f64,
    reward: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HeadingRecord {
    id: u32,
    heading: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: String,
    t_max: f64,
    rho_min: f64,
    rho_max: f64,
    #[serde(default)]
    closed: bool,
    sensing: SensingConstants,
    sensors: Vec<[f64; 2]>,
    locations: Vec<LocationRecord>,
    start_id: u32,
    goal_id: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fixed_headings: Option<Vec<HeadingRecord>>,
}

/// Parses and validates a scenario file.
pub fn load_scenario(bytes: &[u8]) -> Result<Scenario, ScenarioError> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    let file: ScenarioFile =
        serde_path_to_error::deserialize(de).map_err(|e| ScenarioError::Parse {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
    from_file(file)
}

fn from_file(file: ScenarioFile) -> Result<Scenario, ScenarioError> {
    let find = |id: u32, field: &str| {
        file.locations
            .iter()
            .position(|l| l.id == id)
            .ok_or_else(|| ScenarioError::invalid(field, format!("no location with id {id}")))
    };
    let start = find(file.start_id, "start_id")?;
    let goal = find(file.goal_id, "goal_id")?;
    if start == goal {
        return Err(ScenarioError::invalid(
            "start_id, goal_id",
            "start and goal must differ",
        ));
    }
    let mut order = vec![start];
    order.extend((0..file.locations.len()).filter(|&i| i != start && i != goal));
    order.push(goal);
    let locations: Vec<TargetLocation> = order
        .iter()
        .map(|&i| {
            let l = &file.locations[i];
            TargetLocation {
                id: l.id,
                position: [l.x, l.y],
                reward: l.reward,
            }
        })
        .collect();
    let fixed_headings = match &file.fixed_headings {
        None => None,
        Some(records) => {
            let mut h = vec![None; locations.len()];
            for (k, r) in records.iter().enumerate() {
                let i = locations.iter().position(|l| l.id == r.id).ok_or_else(|| {
                    ScenarioError::invalid(
                        format!("fixed_headings[{k}].id"),
                        format!("no location with id {}", r.id),
                    )
                })?;
                h[i] = Some(r.heading);
            }
            Some(h)
        }
    };
    let scenario = Scenario {
        name: file.name,
        locations,
        field: SensorField {
            nodes: file
                .sensors
                .into_iter()
                .map(|position| crate::sensing::SensorNode { position })
                .collect(),
            alpha: file.sensing.alpha,
            mu: file.sensing.mu,
            cap: file.sensing.cap,
        },
        t_max: file.t_max,
        rho_min: file.rho_min,
        rho_max: file.rho_max,
        closed: file.closed,
        fixed_headings,
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Serializes a scenario in the format read by [`load_scenario`].
pub fn save_scenario(scenario: &Scenario) -> String {
    let fixed_headings = scenario.fixed_headings.as_ref().map(|h| {
        h.iter()
            .zip(&scenario.locations)
            .filter_map(|(v, l)| v.map(|heading| HeadingRecord { id: l.id, heading }))
            .collect()
    });
    let file = ScenarioFile {
        name: scenario.name.clone(),
        t_max: scenario.t_max,
        rho_min: scenario.rho_min,
        rho_max: scenario.rho_max,
        closed: scenario.closed,
        sensing: SensingConstants {
            alpha: scenario.field.alpha,
            mu: scenario.field.mu,
            cap: scenario.field.cap,
        },
        sensors: scenario.field.nodes.iter().map(|n| n.position).collect(),
        locations: scenario
            .locations
            .iter()
            .map(|l| LocationRecord {
                id: l.id,
                x: l.position[0],
                y: l.position[1],
                reward: l.reward,
            })
            .collect(),
        start_id: scenario.start().id,
        goal_id: scenario.goal().id,
        fixed_headings,
    };
    serde_json::to_string_pretty(&file).expect("scenario serialization is infallible")
}

/// Reads an orienteering benchmark in the classic whitespace format: a
/// header line `T_max P`, then one `x y score` line per location, the first
/// being the start and the second the goal. Every location gets the single
/// turning radius `rho`; the sensor field is empty.
pub fn load_orienteering_text(text: &str, name: &str, rho: f64) -> Result<Scenario, ScenarioError> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next().ok_or_else(|| ScenarioError::Parse {
        path: "line 1".into(),
        message: "empty file".into(),
    })?;
    let t_max: f64 = header
        .split_whitespace()
        .next()
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| ScenarioError::Parse {
            path: "line 1".into(),
            message: "expected T_max".into(),
        })?;
    let mut points = Vec::new();
    for (k, line) in lines.enumerate() {
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|e| ScenarioError::Parse {
                path: format!("line {}", k + 2),
                message: format!("{e}"),
            })?;
        if vals.len() < 3 {
            return Err(ScenarioError::Parse {
                path: format!("line {}", k + 2),
                message: "expected `x y score`".into(),
            });
        }
        points.push((k as u32, [vals[0], vals[1]], vals[2]));
    }
    if points.len() < 2 {
        return Err(ScenarioError::invalid(
            "locations",
            "need at least 2 locations",
        ));
    }
    let mut locations = vec![TargetLocation {
        id: points[0].0,
        position: points[0].1,
        reward: 0.0,
    }];
    locations.extend(
        points[2..]
            .iter()
            .map(|&(id, position, reward)| TargetLocation {
                id,
                position,
                reward,
            }),
    );
    locations.push(TargetLocation {
        id: points[1].0,
        position: points[1].1,
        reward: 0.0,
    });
    let closed = points[0].1 == points[1].1;
    let scenario = Scenario {
        name: name.to_string(),
        locations,
        field: SensorField {
            nodes: Vec::new(),
            alpha: DEFAULT_ALPHA,
            mu: DEFAULT_MU,
            cap: DEFAULT_CAP,
        },
        t_max,
        rho_min: rho,
        rho_max: rho,
        closed,
        fixed_headings: None,
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Builtin instance layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstanceKind {
    /// 30 m × 22 m, 11 sensors in a cross, 18 targets.
    Cross,
    /// 30 m × 30 m, 8 sensors on a grid, 15 targets.
    Grid,
}

impl std::str::FromStr for InstanceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cross" => Ok(InstanceKind::Cross),
            "grid" => Ok(InstanceKind::Grid),
            other => Err(format!(
                "unknown instance `{other}` (expected `cross` or `grid`)"
            )),
        }
    }
}

struct Layout {
    width: f64,
    height: f64,
    sensors: Vec<[f64; 2]>,
    targets: usize,
    start: [f64; 2],
    goal: [f64; 2],
}

fn layout(kind: InstanceKind) -> Layout {
    match kind {
        InstanceKind::Cross => {
            let (cx, cy) = (15.0, 11.0);
            let mut sensors = vec![[cx, cy]];
            for dx in [-9.0, -6.0, -3.0, 3.0, 6.0, 9.0] {
                sensors.push([cx + dx, cy]);
            }
            for dy in [-8.0, -4.0, 4.0, 8.0] {
                sensors.push([cx, cy + dy]);
            }
            Layout {
                width: 30.0,
                height: 22.0,
                sensors,
                targets: 18,
                start: [2.0, 2.0],
                goal: [28.0, 20.0],
            }
        }
        InstanceKind::Grid => {
            let mut sensors = Vec::new();
            for y in [7.5, 15.0, 22.5] {
                for x in [7.5, 15.0, 22.5] {
                    if (x, y) != (15.0, 15.0) {
                        sensors.push([x, y]);
                    }
                }
            }
            Layout {
                width: 30.0,
                height: 30.0,
                sensors,
                targets: 15,
                start: [2.0, 2.0],
                goal: [28.0, 28.0],
            }
        }
    }
}

/// Generates a builtin instance. Target positions and rewards are drawn from
/// a generator seeded with `seed`; the sensor layout is fixed per kind.
/// Budget and radius interval default to `t_max = 100`, `ρ ∈ [1, 2]`.
pub fn generate_instance(kind: InstanceKind, seed: u64) -> Scenario {
    let lay = layout(kind);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let margin = 1.0;
    let min_gap = 2.0;
    let mut placed: Vec<[f64; 2]> = vec![lay.start, lay.goal];
    let mut targets = Vec::with_capacity(lay.targets);
    while targets.len() < lay.targets {
        let p = [
            rng.gen_range(margin..lay.width - margin),
            rng.gen_range(margin..lay.height - margin),
        ];
        let clear = placed
            .iter()
            .all(|q| (p[0] - q[0]).hypot(p[1] - q[1]) >= min_gap);
        if clear {
            placed.push(p);
            let reward = *REWARD_LEVELS.choose(&mut rng).expect("non-empty");
            targets.push((p, reward));
        }
    }
    let mut locations = vec![TargetLocation {
        id: 0,
        position: lay.start,
        reward: 0.0,
    }];
    locations.extend(
        targets
            .iter()
            .enumerate()
            .map(|(k, &(position, reward))| TargetLocation {
                id: k as u32 + 1,
                position,
                reward,
            }),
    );
    locations.push(TargetLocation {
        id: lay.targets as u32 + 1,
        position: lay.goal,
        reward: 0.0,
    });
    let name = match kind {
        InstanceKind::Cross => "cross",
        InstanceKind::Grid => "grid",
    };
    Scenario {
        name: name.to_string(),
        locations,
        field: SensorField::new(lay.sensors, DEFAULT_ALPHA, DEFAULT_MU, DEFAULT_CAP)
            .expect("builtin sensing constants are valid"),
        t_max: 100.0,
        rho_min: 1.0,
        rho_max: 2.0,
        closed: false,
        fixed_headings: None,
    }
}
