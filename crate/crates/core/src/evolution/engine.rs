//! The generational loop.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::chromosome::{decode, evaluate, Chromosome};
use super::operators::{
    align_headings, crossover_two_point, initialize_population, mutate_genes, repair_budget,
};
use super::params::SolverParams;
use super::selection::{
    assess, environmental_selection, reference_points, reward_survivors, reward_tournament,
    tournament,
};
use super::EvolutionError;
use crate::pareto::{dominates, hypervolume_2d, Fitness, ParetoFront, Solution};
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub chromosome: Chromosome,
    pub fitness: Fitness<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub front_size: usize,
    pub hypervolume: f64,
    pub best_reward: f64,
    pub min_exposure: f64,
}

/// Where in the variation pipeline an offspring is reported to a [`Monitor`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// After crossover (or cloning) and budget repair.
    Crossover,
    /// After mutation, optional alignment, and budget repair.
    Mutation,
}

/// Observer hooks for instrumented runs.
pub trait Monitor {
    fn offspring(&mut self, _stage: Stage, _chromosome: &Chromosome) {}

    fn generation(&mut self, _stats: &GenerationStats, _population: &[Individual]) {}
}

impl Monitor for () {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads for fitness evaluation; 1 evaluates inline.
    pub threads: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { threads: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evolution {
    pub front: ParetoFront<Chromosome, f64>,
    pub history: Vec<GenerationStats>,
    /// Hypervolume reference point `(reward, exposure)` used in `history`.
    pub reference: (f64, f64),
    pub final_population: Vec<Individual>,
}

/// Fixed hypervolume reference: zero reward and an exposure no feasible
/// tour can reach.
pub fn hypervolume_reference(scenario: &Scenario) -> (f64, f64) {
    (0.0, scenario.field.intensity_bound() * scenario.t_max + 1.0)
}

struct Evaluator<'a> {
    scenario: &'a Scenario,
    step: f64,
    pool: Option<rayon::ThreadPool>,
}

impl Evaluator<'_> {
    fn run(&self, chromosomes: Vec<Chromosome>) -> Result<Vec<Individual>, EvolutionError> {
        let one = |c: Chromosome| -> Result<Individual, EvolutionError> {
            let fitness = evaluate(&c, self.scenario, self.step)?;
            Ok(Individual {
                chromosome: c,
                fitness,
            })
        };
        match &self.pool {
            Some(pool) => pool.install(|| chromosomes.into_par_iter().map(one).collect()),
            None => chromosomes.into_iter().map(one).collect(),
        }
    }
}

fn stats(generation: usize, population: &[Individual], reference: (f64, f64)) -> GenerationStats {
    let fits: Vec<Fitness<f64>> = population.iter().map(|i| i.fitness).collect();
    let front: Vec<Fitness<f64>> = fits
        .iter()
        .filter(|f| !fits.iter().any(|o| dominates(o, f)))
        .copied()
        .collect();
    GenerationStats {
        generation,
        front_size: front.len(),
        hypervolume: hypervolume_2d(&front, reference).unwrap_or(f64::NAN),
        best_reward: fits
            .iter()
            .map(|f| f.reward)
            .fold(f64::NEG_INFINITY, f64::max),
        min_exposure: fits
            .iter()
            .map(|f| f.exposure)
            .fold(f64::INFINITY, f64::min),
    }
}

/// Non-dominated members of the population, collapsing entries whose fitness
/// and decoded tour are both identical.
fn extract_front(
    population: &[Individual],
    scenario: &Scenario,
    single_objective: bool,
) -> ParetoFront<Chromosome, f64> {
    if single_objective {
        let best = population
            .iter()
            .max_by(|a, b| {
                a.fitness
                    .reward
                    .total_cmp(&b.fitness.reward)
                    .then(b.fitness.length.total_cmp(&a.fitness.length))
            })
            .expect("population is non-empty");
        return ParetoFront {
            solutions: vec![Solution {
                solution: best.chromosome.clone(),
                fitness: best.fitness,
            }],
        };
    }
    let mut kept: Vec<(Solution<Chromosome, f64>, super::chromosome::Tour)> = Vec::new();
    for ind in population {
        if population
            .iter()
            .any(|o| dominates(&o.fitness, &ind.fitness))
        {
            continue;
        }
        let tour = decode(&ind.chromosome, scenario);
        if kept
            .iter()
            .any(|(s, t)| s.fitness == ind.fitness && same_route(t, &tour, s.fitness.length))
        {
            continue;
        }
        kept.push((
            Solution {
                solution: ind.chromosome.clone(),
                fitness: ind.fitness,
            },
            tour,
        ));
    }
    ParetoFront::from_candidates(kept.into_iter().map(|(s, _)| s).collect())
}

// Zero-length tours over the same locations are the same point whatever
// headings and radii they carry.
fn same_route(a: &super::chromosome::Tour, b: &super::chromosome::Tour, length: f64) -> bool {
    a.indices == b.indices && (length == 0.0 || a == b)
}

/// Runs the evolutionary search with a generator seeded from `params.seed`.
pub fn evolve_seeded(
    scenario: &Scenario,
    params: &SolverParams,
) -> Result<Evolution, EvolutionError> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    evolve(scenario, params, &mut rng)
}

pub fn evolve<R: Rng + ?Sized>(
    scenario: &Scenario,
    params: &SolverParams,
    rng: &mut R,
) -> Result<Evolution, EvolutionError> {
    evolve_with(scenario, params, rng, RunOptions::default(), &mut ())
}

/// Full generational loop with evaluation threads and an observer.
///
/// Random numbers are consumed only by the sequential variation and
/// selection phases, so results do not depend on `options.threads`.
pub fn evolve_with<R: Rng + ?Sized, M: Monitor>(
    scenario: &Scenario,
    params: &SolverParams,
    rng: &mut R,
    options: RunOptions,
    monitor: &mut M,
) -> Result<Evolution, EvolutionError> {
    params.validate()?;
    scenario.validate()?;
    let single = params.single_objective;
    let working;
    let eval_scenario = if single {
        working = scenario.without_sensors();
        &working
    } else {
        scenario
    };
    let pool = if options.threads > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(options.threads)
                .build()
                .map_err(|e| EvolutionError::InvalidParams(format!("thread pool: {e}")))?,
        )
    } else {
        None
    };
    let evaluator = Evaluator {
        scenario: eval_scenario,
        step: params.exposure_step,
        pool,
    };
    let n = params.population_size;
    let refs = reference_points(n);
    let reference = hypervolume_reference(eval_scenario);

    let mut population = evaluator.run(initialize_population(scenario, params, rng)?)?;
    let mut history = Vec::with_capacity(params.generations + 1);
    let first = stats(0, &population, reference);
    monitor.generation(&first, &population);
    history.push(first);

    for generation in 1..=params.generations {
        let fits: Vec<Fitness<f64>> = population.iter().map(|i| i.fitness).collect();
        let standing = (!single).then(|| assess(&fits, params.selection, &refs));
        let pick = |rng: &mut R| match &standing {
            Some(s) => tournament(s, rng),
            None => reward_tournament(&fits, rng),
        };

        let mut offspring = Vec::with_capacity(n + 1);
        while offspring.len() < n {
            let a = &population[pick(rng)].chromosome;
            let b = &population[pick(rng)].chromosome;
            let (ca, cb) = if rng.gen_bool(params.crossover_prob) {
                crossover_two_point(a, b, scenario, rng)?
            } else {
                (a.clone(), b.clone())
            };
            for child in [ca, cb] {
                monitor.offspring(Stage::Crossover, &child);
                let mut varied = child.clone();
                if rng.gen_bool(params.mutation_prob_individual) {
                    mutate_genes(&mut varied, scenario, params, rng);
                }
                if params.alignment_mutation {
                    align_headings(&mut varied, scenario);
                }
                // Endpoint heading changes can leave even the bare
                // start-goal leg over budget; such a variant is dropped.
                let varied = match repair_budget(&mut varied, scenario, rng) {
                    Ok(_) => varied,
                    Err(_) => child,
                };
                monitor.offspring(Stage::Mutation, &varied);
                offspring.push(varied);
            }
        }
        offspring.truncate(n);

        let mut union = population;
        union.extend(evaluator.run(offspring)?);
        let union_fits: Vec<Fitness<f64>> = union.iter().map(|i| i.fitness).collect();
        let keep = if single {
            reward_survivors(&union_fits, n)
        } else {
            environmental_selection(&union_fits, n, params.selection, &refs, rng)
        };
        let mut slots: Vec<Option<Individual>> = union.into_iter().map(Some).collect();
        population = keep
            .into_iter()
            .map(|i| slots[i].take().expect("survivor indices are distinct"))
            .collect();

        let s = stats(generation, &population, reference);
        monitor.generation(&s, &population);
        history.push(s);
    }

    Ok(Evolution {
        front: extract_front(&population, scenario, single),
        history,
        reference,
        final_population: population,
    })
}
