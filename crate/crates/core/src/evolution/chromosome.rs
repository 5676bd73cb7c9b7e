//! Random-key chromosome, decoding into a Dubins tour, and fitness.

use serde::{Deserialize, Serialize};

use crate::geometry::{build_tour, tour_length, CompositePath, GeometryError, Pose};
use crate::pareto::Fitness;
use crate::scenario::{sum_rewards, Scenario};
use crate::sensing::{exposure, SensingError};

/// Key value marking a location as not visited.
pub const INACTIVE: f64 = -1.0;

/// Per-location tuple: visiting key, heading at the location, and the turning
/// radius of the curve leaving it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gene {
    pub key: f64,
    pub heading: f64,
    pub radius: f64,
}

impl Gene {
    pub fn is_active(&self) -> bool {
        self.key >= 0.0
    }
}

/// One gene per scenario location; gene `i` belongs to `scenario.locations[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chromosome {
    pub genes: Vec<Gene>,
}

impl Chromosome {
    pub fn len(&self) -> usize {
        self.genes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }

    /// Interior (non start/goal) gene indices that are currently active.
    pub fn active_interior(&self) -> Vec<usize> {
        let last = self.genes.len().saturating_sub(1);
        (1..last).filter(|&i| self.genes[i].is_active()).collect()
    }

    /// Visiting order: active genes by ascending key, ties by location index.
    pub fn visit_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.genes.len())
            .filter(|&i| self.genes[i].is_active())
            .collect();
        order.sort_by(|&a, &b| {
            self.genes[a]
                .key
                .total_cmp(&self.genes[b].key)
                .then(a.cmp(&b))
        });
        order
    }
}

/// Decoded tour: location indices in visiting order, the pose at each, and
/// the radius of each connecting curve (`radii.len() == poses.len() - 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tour {
    pub indices: Vec<usize>,
    pub poses: Vec<Pose<f64>>,
    pub radii: Vec<f64>,
}

impl Tour {
    pub fn path(&self) -> Result<CompositePath<f64>, GeometryError> {
        build_tour(&self.poses, &self.radii)
    }

    pub fn length(&self) -> Result<f64, GeometryError> {
        tour_length(&self.poses, &self.radii)
    }
}

/// Sorts active genes into a tour. Closed scenarios reuse the start heading
/// at the goal so the circuit closes smoothly.
pub fn decode(chromosome: &Chromosome, scenario: &Scenario) -> Tour {
    let indices = chromosome.visit_order();
    let mut poses: Vec<Pose<f64>> = indices
        .iter()
        .map(|&i| {
            let [x, y] = scenario.locations[i].position;
            let heading = scenario
                .fixed_heading(i)
                .unwrap_or(chromosome.genes[i].heading);
            Pose::new(x, y, heading)
        })
        .collect();
    if scenario.closed && poses.len() >= 2 {
        let first = poses[0].theta;
        let last = poses.len() - 1;
        poses[last].theta = first;
    }
    let radii = indices[..indices.len().saturating_sub(1)]
        .iter()
        .map(|&i| chromosome.genes[i].radius)
        .collect();
    Tour {
        indices,
        poses,
        radii,
    }
}

/// Reward, exposure and length of a decoded chromosome.
pub fn evaluate(
    chromosome: &Chromosome,
    scenario: &Scenario,
    exposure_step: f64,
) -> Result<Fitness<f64>, SensingError> {
    let tour = decode(chromosome, scenario);
    let path = tour
        .path()
        .expect("decoded tours have at least start and goal");
    let reward = sum_rewards(tour.indices.iter().map(|&i| scenario.locations[i].reward));
    let e = exposure(&scenario.field, &path, exposure_step)?;
    Ok(Fitness::new(reward, e, path.total_length))
}
