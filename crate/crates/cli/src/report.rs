//! Run reports, stored tours and the front CSV.

use std::fmt::Write as _;

use medop::evolution::{decode, Chromosome, Evolution, GenerationStats, SolverParams};
use medop::scenario::Scenario;
use serde::{Deserialize, Serialize};

/// A tour as written to disk: location ids in visiting order, the heading
/// at each, and the radius of each connecting curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredTour {
    pub ids: Vec<u32>,
    pub headings: Vec<f64>,
    pub radii: Vec<f64>,
}

impl StoredTour {
    pub fn from_chromosome(chromosome: &Chromosome, scenario: &Scenario) -> Self {
        let tour = decode(chromosome, scenario);
        StoredTour {
            ids: tour
                .indices
                .iter()
                .map(|&i| scenario.locations[i].id)
                .collect(),
            headings: tour.poses.iter().map(|p| p.theta).collect(),
            radii: tour.radii,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontEntry {
    pub reward: f64,
    pub exposure: f64,
    pub length: f64,
    pub tour: StoredTour,
    pub chromosome: Chromosome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario_name: String,
    pub scenario: Scenario,
    pub params: SolverParams,
    pub seed: u64,
    /// Reference point of the hypervolume series in `history`.
    pub hypervolume_reference: (f64, f64),
    pub history: Vec<GenerationStats>,
    /// Ascending reward.
    pub front: Vec<FrontEntry>,
    pub duration_seconds: f64,
}

impl RunReport {
    pub fn new(
        scenario: &Scenario,
        params: &SolverParams,
        run: &Evolution,
        duration_seconds: f64,
    ) -> Self {
        // Single-objective runs score exposure against an empty field, so the
        // stored scenario is the one the fitness actually refers to.
        let scenario = if params.single_objective {
            scenario.without_sensors()
        } else {
            scenario.clone()
        };
        let front = run
            .front
            .solutions
            .iter()
            .map(|s| FrontEntry {
                reward: s.fitness.reward,
                exposure: s.fitness.exposure,
                length: s.fitness.length,
                tour: StoredTour::from_chromosome(&s.solution, &scenario),
                chromosome: s.solution.clone(),
            })
            .collect();
        RunReport {
            scenario_name: scenario.name.clone(),
            scenario,
            params: params.clone(),
            seed: params.seed,
            hypervolume_reference: run.reference,
            history: run.history.clone(),
            front,
            duration_seconds,
        }
    }
}

/// Formats `x` with `digits` significant digits in plain decimal notation,
/// dropping trailing zeros.
pub fn significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() {
            "0".into()
        } else {
            format!("{x}")
        };
    }
    let sci = format!("{:.*e}", digits.saturating_sub(1), x);
    let exp: i32 = sci
        .rsplit('e')
        .next()
        .and_then(|e| e.parse().ok())
        .unwrap_or(0);
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    let mut s = if exp >= digits as i32 {
        // Round away the digits beyond the significant ones.
        let scale = 10f64.powi(exp + 1 - digits as i32);
        format!("{:.0}", (x / scale).round() * scale)
    } else {
        format!("{x:.decimals$}")
    };
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

pub fn front_csv(front: &[FrontEntry]) -> String {
    let mut out = String::from("reward,exposure,length\n");
    for e in front {
        let _ = writeln!(
            out,
            "{},{},{}",
            significant(e.reward, 6),
            significant(e.exposure, 6),
            significant(e.length, 6)
        );
    }
    out
}
