//! Multi-objective evolutionary search over random-key chromosomes.
//!
//! Each chromosome carries one gene per location: a sort key deciding
//! whether and when the location is visited, the heading the vehicle takes
//! there, and the turning radius of the curve that leaves it. Decoding sorts
//! the active genes and chains Dubins curves through them; fitness is the
//! collected reward and the exposure along that path.

mod chromosome;
mod engine;
mod operators;
mod params;
mod selection;
mod von_mises;

use thiserror::Error;

pub use chromosome::{decode, evaluate, Chromosome, Gene, Tour, INACTIVE};
pub use engine::{
    evolve, evolve_seeded, evolve_with, hypervolume_reference, Evolution, GenerationStats,
    Individual, Monitor, RunOptions, Stage,
};
pub use operators::{
    align_headings, crossover_two_point, exchange_window, initialize_population, mutate,
    mutate_genes, repair_budget, two_point_cuts,
};
pub use params::{Selection, SolverParams};
pub use selection::{
    assess, environmental_selection, reference_points, reward_survivors, Standing,
};
pub use von_mises::sample_von_mises;

use crate::scenario::ScenarioError;
use crate::sensing::SensingError;

#[derive(Debug, Error)]
pub enum EvolutionError {
    #[error("infeasible: tour length {length:.6} exceeds budget {t_max} even without intermediate locations")]
    Infeasible { length: f64, t_max: f64 },
    #[error("invalid solver parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Sensing(#[from] SensingError),
}
