//! Subcommand implementations.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Args;
use medop::evolution::{evolve_with, RunOptions, Selection, SolverParams};
use medop::geometry::build_tour;
use medop::oracle::{run_check, CheckReport, CHECKS};
use medop::scenario::{
    generate_instance, load_orienteering_text, load_scenario, total_reward, InstanceKind, Scenario,
    DEFAULT_INSTANCE_SEED,
};
use medop::sensing::{exposure, DEFAULT_EXPOSURE_STEP};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::plot::{render_svg, tour_poses};
use crate::report::{front_csv, RunReport, StoredTour};
use crate::CliError;

#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    /// Scenario file: JSON, or the plain orienteering text format.
    #[arg(long, conflicts_with = "instance")]
    pub scenario: Option<PathBuf>,
    /// Builtin instance (`cross` or `grid`).
    #[arg(long)]
    pub instance: Option<InstanceKind>,
    #[arg(long, default_value_t = DEFAULT_INSTANCE_SEED)]
    pub instance_seed: u64,
    /// Turn the scenario into a circuit ending back at the start.
    #[arg(long)]
    pub closed: bool,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub rho_min: Option<f64>,
    #[arg(long)]
    pub rho_max: Option<f64>,
}

impl ScenarioArgs {
    fn given(&self) -> bool {
        self.scenario.is_some() || self.instance.is_some()
    }

    /// Loads the scenario and applies the overrides.
    pub fn load(&self) -> Result<Scenario, CliError> {
        let base = match (&self.scenario, self.instance) {
            (Some(path), _) => read_scenario(path, self.rho_min.unwrap_or(1.0))?,
            (None, Some(kind)) => generate_instance(kind, self.instance_seed),
            (None, None) => {
                return Err(CliError::Failed(
                    "one of --scenario or --instance is required".into(),
                ))
            }
        };
        self.apply(base)
    }

    fn apply(&self, mut s: Scenario) -> Result<Scenario, CliError> {
        if self.closed && !s.closed {
            s = s.closed_variant();
        }
        if let Some(t) = self.t_max {
            s.t_max = t;
        }
        if let Some(r) = self.rho_min {
            s.rho_min = r;
        }
        if let Some(r) = self.rho_max {
            s.rho_max = r;
        }
        s.validate()?;
        Ok(s)
    }
}

fn read_scenario(path: &Path, rho: f64) -> Result<Scenario, CliError> {
    let bytes = fs::read(path).map_err(CliError::io(path))?;
    let json = bytes
        .iter()
        .find(|b| !b.is_ascii_whitespace())
        .is_some_and(|&b| b == b'{');
    let scenario = if json {
        load_scenario(&bytes)
    } else {
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        load_orienteering_text(&String::from_utf8_lossy(&bytes), &name, rho)
    };
    scenario.map_err(|e| CliError::Failed(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 400)]
    pub population: usize,
    #[arg(long, default_value_t = 400)]
    pub generations: usize,
    #[arg(long, default_value_t = 0.8)]
    pub crossover_prob: f64,
    #[arg(long, default_value_t = 0.4)]
    pub mutation_prob_individual: f64,
    #[arg(long, default_value_t = 0.02)]
    pub mutation_prob_gene: f64,
    /// Concentration of the von Mises heading mutation.
    #[arg(long, default_value_t = 2.0)]
    pub kappa: f64,
    #[arg(long, default_value = "reference-point")]
    pub selection: Selection,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Maximize reward only, ignoring the sensor field.
    #[arg(long)]
    pub single_objective: bool,
    /// Align interior headings with their neighbours after mutation.
    #[arg(long)]
    pub alignment_mutation: bool,
    /// Quadrature spacing for exposure, meters.
    #[arg(long, default_value_t = DEFAULT_EXPOSURE_STEP)]
    pub exposure_step: f64,
}

impl SolverArgs {
    pub fn params(&self) -> SolverParams {
        SolverParams {
            population_size: self.population,
            generations: self.generations,
            crossover_prob: self.crossover_prob,
            mutation_prob_individual: self.mutation_prob_individual,
            mutation_prob_gene: self.mutation_prob_gene,
            von_mises_kappa: self.kappa,
            selection: self.selection,
            seed: self.seed,
            single_objective: self.single_objective,
            alignment_mutation: self.alignment_mutation,
            exposure_step: self.exposure_step,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Fitness evaluation threads; does not change the results.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Also render `plot-<i>.svg` for front entry `i` (repeatable).
    #[arg(long)]
    pub plot: Vec<usize>,
}

pub fn solve(args: &SolveArgs) -> Result<(), CliError> {
    let scenario = args.scenario.load()?;
    let params = args.solver.params();
    let clock = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let run = evolve_with(
        &scenario,
        &params,
        &mut rng,
        RunOptions {
            threads: args.threads.max(1),
        },
        &mut (),
    )?;
    let report = RunReport::new(&scenario, &params, &run, clock.elapsed().as_secs_f64());

    fs::create_dir_all(&args.out).map_err(CliError::io(&args.out))?;
    write(&args.out.join("front.csv"), &front_csv(&report.front))?;
    let json =
        serde_json::to_string_pretty(&report).map_err(|e| CliError::Failed(e.to_string()))?;
    write(&args.out.join("report.json"), &json)?;
    for &i in &args.plot {
        let svg = plot_entry(&report, i)?;
        write(&args.out.join(format!("plot-{i}.svg")), &svg)?;
    }

    println!(
        "{}: {} front solutions after {} generations in {:.1}s",
        report.scenario_name,
        report.front.len(),
        params.generations,
        report.duration_seconds
    );
    if let (Some(first), Some(last), Some(stats)) = (
        report.front.first(),
        report.front.last(),
        report.history.last(),
    ) {
        let exposures = report.front.iter().map(|e| e.exposure);
        println!(
            "reward {:.4}..{:.4}, exposure {:.4}..{:.4}, hypervolume {:.4}",
            first.reward,
            last.reward,
            exposures.clone().fold(f64::INFINITY, f64::min),
            exposures.fold(0.0, f64::max),
            stats.hypervolume
        );
    }
    Ok(())
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(CliError::io(path))
}

fn read_report(path: &Path) -> Result<RunReport, CliError> {
    let bytes = fs::read(path).map_err(CliError::io(path))?;
    serde_json::from_slice(&bytes).map_err(|e| CliError::Failed(format!("{}: {e}", path.display())))
}

fn plot_entry(report: &RunReport, index: usize) -> Result<String, CliError> {
    let entry = report.front.get(index).ok_or_else(|| {
        CliError::Failed(format!(
            "index {index} out of range (front has {} solutions)",
            report.front.len()
        ))
    })?;
    render_svg(
        &report.scenario,
        &entry.tour,
        (entry.reward, entry.exposure, entry.length),
    )
    .map_err(CliError::Failed)
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// JSON file with `ids`, `headings` and `radii`.
    #[arg(long, conflicts_with = "index")]
    pub tour: Option<PathBuf>,
    /// Report written by `solve`; supplies the scenario unless one is given.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Front entry of `--report` to evaluate.
    #[arg(long, requires = "report")]
    pub index: Option<usize>,
    /// Quadrature spacing; defaults to the report's, else 0.05 m.
    #[arg(long)]
    pub exposure_step: Option<f64>,
}

/// Fitness of a stored tour plus the feasibility verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub reward: f64,
    pub exposure: f64,
    pub length: f64,
    /// Why the tour is infeasible, if it is.
    pub violation: Option<String>,
}

/// Re-evaluates a tour. Malformed tours are errors; budget or radius
/// violations only make the verdict infeasible.
pub fn evaluate_tour(
    scenario: &Scenario,
    tour: &StoredTour,
    step: f64,
) -> Result<Evaluation, CliError> {
    let fail = |m: String| Err(CliError::Failed(m));
    if tour.ids.len() < 2 {
        return fail("a tour needs at least the start and goal ids".into());
    }
    for &id in &tour.ids {
        if scenario.index_of(id).is_none() {
            return fail(format!("unknown location id {id}"));
        }
    }
    let mut seen = tour.ids.clone();
    seen.sort_unstable();
    if seen.windows(2).any(|w| w[0] == w[1]) {
        return fail("a location id appears twice".into());
    }
    if tour.ids[0] != scenario.start().id || tour.ids[tour.ids.len() - 1] != scenario.goal().id {
        return fail(format!(
            "tour must start at id {} and end at id {}",
            scenario.start().id,
            scenario.goal().id
        ));
    }
    if let Some(h) = tour
        .headings
        .iter()
        .find(|h| !(0.0..std::f64::consts::TAU).contains(*h))
    {
        return fail(format!("heading {h} outside [0, 2π)"));
    }
    let poses = tour_poses(scenario, tour).ok_or_else(|| {
        CliError::Failed(format!(
            "expected {} headings and {} radii, got {} and {}",
            tour.ids.len(),
            tour.ids.len() - 1,
            tour.headings.len(),
            tour.radii.len()
        ))
    })?;
    let path = build_tour(&poses, &tour.radii).map_err(|e| CliError::Failed(e.to_string()))?;
    let e = exposure(&scenario.field, &path, step).map_err(|e| CliError::Failed(e.to_string()))?;
    let reward = total_reward(scenario, &tour.ids)?;
    let violation = if path.total_length > scenario.t_max {
        Some(format!(
            "length {} exceeds t_max {}",
            path.total_length, scenario.t_max
        ))
    } else {
        tour.radii
            .iter()
            .find(|r| !(scenario.rho_min..=scenario.rho_max).contains(*r))
            .map(|r| {
                format!(
                    "radius {r} outside [{}, {}]",
                    scenario.rho_min, scenario.rho_max
                )
            })
    };
    Ok(Evaluation {
        reward,
        exposure: e,
        length: path.total_length,
        violation,
    })
}

/// Prints the evaluation; returns whether the tour is feasible.
pub fn evaluate(args: &EvaluateArgs) -> Result<bool, CliError> {
    let report = args.report.as_deref().map(read_report).transpose()?;
    let scenario = match (&report, args.scenario.given()) {
        (_, true) => args.scenario.load()?,
        (Some(r), false) => args.scenario.apply(r.scenario.clone())?,
        (None, false) => {
            return Err(CliError::Failed(
                "one of --scenario, --instance or --report is required".into(),
            ))
        }
    };
    let tour = match (&args.tour, &report, args.index) {
        (Some(path), _, _) => {
            let bytes = fs::read(path).map_err(CliError::io(path))?;
            serde_json::from_slice::<StoredTour>(&bytes)
                .map_err(|e| CliError::Failed(format!("{}: {e}", path.display())))?
        }
        (None, Some(r), Some(i)) => r
            .front
            .get(i)
            .ok_or_else(|| {
                CliError::Failed(format!(
                    "index {i} out of range (front has {} solutions)",
                    r.front.len()
                ))
            })?
            .tour
            .clone(),
        _ => {
            return Err(CliError::Failed(
                "give --tour, or --report with --index".into(),
            ))
        }
    };
    let step = args
        .exposure_step
        .or(report.as_ref().map(|r| r.params.exposure_step))
        .unwrap_or(DEFAULT_EXPOSURE_STEP);
    let ev = evaluate_tour(&scenario, &tour, step)?;
    println!("reward {}", ev.reward);
    println!("exposure {}", ev.exposure);
    println!("length {}", ev.length);
    match &ev.violation {
        None => println!("FEASIBLE"),
        Some(why) => println!("INFEASIBLE: {why}"),
    }
    Ok(ev.violation.is_none())
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    /// Run only this check.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(CHECKS))]
    pub check: Option<String>,
    /// Sample count for the selected checks.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

pub fn oracle(args: &OracleArgs) -> Vec<CheckReport> {
    let names: Vec<&str> = match &args.check {
        Some(c) => vec![c.as_str()],
        None => CHECKS.to_vec(),
    };
    names
        .into_iter()
        .filter_map(|name| run_check(name, args.n, args.seed))
        .collect()
}

#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub index: usize,
    /// Defaults to `plot-<index>.svg`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn plot(args: &PlotArgs) -> Result<PathBuf, CliError> {
    let report = read_report(&args.report)?;
    let svg = plot_entry(&report, args.index)?;
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("plot-{}.svg", args.index)));
    write(&out, &svg)?;
    Ok(out)
}
