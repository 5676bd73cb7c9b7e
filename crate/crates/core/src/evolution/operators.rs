//! Initialization, variation and budget repair.

use std::f64::consts::TAU;

use rand::Rng;

use super::chromosome::{decode, Chromosome, Gene, INACTIVE};
use super::params::SolverParams;
use super::von_mises::sample_von_mises;
use super::EvolutionError;
use crate::scalar::normalize_angle;
use crate::scenario::Scenario;

fn uniform_radius<R: Rng + ?Sized>(scenario: &Scenario, rng: &mut R) -> f64 {
    let u: f64 = rng.gen();
    scenario.rho_min + (scenario.rho_max - scenario.rho_min) * u
}

/// Uniform draw from the open interval (0, 1).
fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            return u;
        }
    }
}

fn decoded_length(chromosome: &Chromosome, scenario: &Scenario) -> f64 {
    decode(chromosome, scenario)
        .length()
        .expect("decoded tours have at least start and goal")
}

/// Deactivates random interior genes until the decoded tour fits the
/// budget. Returns the final tour length.
pub fn repair_budget<R: Rng + ?Sized>(
    chromosome: &mut Chromosome,
    scenario: &Scenario,
    rng: &mut R,
) -> Result<f64, EvolutionError> {
    loop {
        let length = decoded_length(chromosome, scenario);
        if length <= scenario.t_max {
            return Ok(length);
        }
        let active = chromosome.active_interior();
        if active.is_empty() {
            return Err(EvolutionError::Infeasible {
                length,
                t_max: scenario.t_max,
            });
        }
        let victim = active[rng.gen_range(0..active.len())];
        chromosome.genes[victim].key = INACTIVE;
    }
}

fn random_chromosome<R: Rng + ?Sized>(scenario: &Scenario, rng: &mut R) -> Chromosome {
    let m = scenario.len();
    let genes = (0..m)
        .map(|i| {
            let key = if i == 0 {
                0.0
            } else if i == m - 1 {
                1.0
            } else if rng.gen_bool(0.5) {
                rng.gen::<f64>()
            } else {
                INACTIVE
            };
            Gene {
                key,
                heading: rng.gen::<f64>() * TAU,
                radius: uniform_radius(scenario, rng),
            }
        })
        .collect();
    Chromosome { genes }
}

/// Random population; every member is repaired to fit the budget.
pub fn initialize_population<R: Rng + ?Sized>(
    scenario: &Scenario,
    params: &SolverParams,
    rng: &mut R,
) -> Result<Vec<Chromosome>, EvolutionError> {
    let direct = scenario.direct_length();
    if direct > scenario.t_max {
        return Err(EvolutionError::Infeasible {
            length: direct,
            t_max: scenario.t_max,
        });
    }
    let goal = scenario.goal_index();
    let mut population = Vec::with_capacity(params.population_size);
    while population.len() < params.population_size {
        let mut c = random_chromosome(scenario, rng);
        let mut repaired = repair_budget(&mut c, scenario, rng).is_ok();
        // Random endpoint headings can make even the direct leg too long;
        // redraw them, then fall back to facing along the start-goal line.
        for _ in 0..16 {
            if repaired {
                break;
            }
            c.genes[0].heading = rng.gen::<f64>() * TAU;
            c.genes[goal].heading = rng.gen::<f64>() * TAU;
            repaired = repair_budget(&mut c, scenario, rng).is_ok();
        }
        if !repaired {
            let [sx, sy] = scenario.start().position;
            let [gx, gy] = scenario.goal().position;
            let line = normalize_angle((gy - sy).atan2(gx - sx));
            c.genes[0].heading = line;
            c.genes[goal].heading = line;
            c.genes[0].radius = scenario.rho_min;
            repair_budget(&mut c, scenario, rng)?;
        }
        population.push(c);
    }
    Ok(population)
}

/// Swaps whole gene tuples in `[from, to)` between two parents.
pub fn exchange_window(
    a: &Chromosome,
    b: &Chromosome,
    from: usize,
    to: usize,
) -> (Chromosome, Chromosome) {
    let mut ca = a.clone();
    let mut cb = b.clone();
    ca.genes[from..to].copy_from_slice(&b.genes[from..to]);
    cb.genes[from..to].copy_from_slice(&a.genes[from..to]);
    (ca, cb)
}

/// Draws the two cut points `from <= to` among interior gene boundaries so
/// that start and goal never fall inside the window.
pub fn two_point_cuts<R: Rng + ?Sized>(len: usize, rng: &mut R) -> (usize, usize) {
    if len < 3 {
        return (1.min(len), 1.min(len));
    }
    let a = rng.gen_range(1..len);
    let b = rng.gen_range(1..len);
    (a.min(b), a.max(b))
}

/// Two-point crossover followed by budget repair of both children.
pub fn crossover_two_point<R: Rng + ?Sized>(
    a: &Chromosome,
    b: &Chromosome,
    scenario: &Scenario,
    rng: &mut R,
) -> Result<(Chromosome, Chromosome), EvolutionError> {
    let (from, to) = two_point_cuts(a.len(), rng);
    let (mut ca, mut cb) = exchange_window(a, b, from, to);
    repair_budget(&mut ca, scenario, rng)?;
    repair_budget(&mut cb, scenario, rng)?;
    Ok((ca, cb))
}

/// Gene-level mutation without repair. Each gene is selected with
/// probability `mutation_prob_gene`; a selected interior gene gets a fresh
/// key in (0, 1), a von Mises heading around its current one and a uniform
/// radius. Start and goal keys never change, but their heading and radius
/// mutate like any other gene.
pub fn mutate_genes<R: Rng + ?Sized>(
    chromosome: &mut Chromosome,
    scenario: &Scenario,
    params: &SolverParams,
    rng: &mut R,
) {
    let last = chromosome.len().saturating_sub(1);
    for (i, gene) in chromosome.genes.iter_mut().enumerate() {
        if !rng.gen_bool(params.mutation_prob_gene) {
            continue;
        }
        if i != 0 && i != last {
            gene.key = open_unit(rng);
        }
        gene.heading = sample_von_mises(gene.heading, params.von_mises_kappa, rng);
        gene.radius = uniform_radius(scenario, rng);
    }
}

/// Mutation followed by budget repair.
pub fn mutate<R: Rng + ?Sized>(
    chromosome: &Chromosome,
    scenario: &Scenario,
    params: &SolverParams,
    rng: &mut R,
) -> Result<Chromosome, EvolutionError> {
    let mut out = chromosome.clone();
    mutate_genes(&mut out, scenario, params, rng);
    repair_budget(&mut out, scenario, rng)?;
    Ok(out)
}

/// Points each interior visited location's heading from its predecessor
/// toward its successor in the visiting order.
pub fn align_headings(chromosome: &mut Chromosome, scenario: &Scenario) {
    let order = chromosome.visit_order();
    for w in order.windows(3) {
        let [px, py] = scenario.locations[w[0]].position;
        let [nx, ny] = scenario.locations[w[2]].position;
        let (dx, dy) = (nx - px, ny - py);
        if dx != 0.0 || dy != 0.0 {
            chromosome.genes[w[1]].heading = normalize_angle(dy.atan2(dx));
        }
    }
}
