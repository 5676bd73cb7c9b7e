use serde::{Deserialize, Serialize};

use super::EvolutionError;
use crate::sensing::DEFAULT_EXPOSURE_STEP;

/// Environmental selection scheme for the multi-objective mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selection {
    ReferencePoint,
    CrowdingDistance,
}

impl std::str::FromStr for Selection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "reference-point" => Ok(Selection::ReferencePoint),
            "crowding-distance" => Ok(Selection::CrowdingDistance),
            other => Err(format!(
                "unknown selection `{other}` (expected `reference-point` or `crowding-distance`)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    pub mutation_prob_individual: f64,
    pub mutation_prob_gene: f64,
    /// Concentration of the heading mutation.
    pub von_mises_kappa: f64,
    pub selection: Selection,
    pub seed: u64,
    /// Ignore the sensor field and maximize reward only.
    pub single_objective: bool,
    /// Align interior headings with their neighbours after mutation.
    pub alignment_mutation: bool,
    /// Arc-length spacing of the exposure quadrature, meters.
    pub exposure_step: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            population_size: 400,
            generations: 400,
            crossover_prob: 0.8,
            mutation_prob_individual: 0.4,
            mutation_prob_gene: 0.02,
            von_mises_kappa: 2.0,
            selection: Selection::ReferencePoint,
            seed: 0,
            single_objective: false,
            alignment_mutation: false,
            exposure_step: DEFAULT_EXPOSURE_STEP,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<(), EvolutionError> {
        let bad = |m: String| Err(EvolutionError::InvalidParams(m));
        if self.population_size == 0 {
            return bad("population_size must be positive".into());
        }
        for (name, p) in [
            ("crossover_prob", self.crossover_prob),
            ("mutation_prob_individual", self.mutation_prob_individual),
            ("mutation_prob_gene", self.mutation_prob_gene),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        if !(self.von_mises_kappa > 0.0) || !self.von_mises_kappa.is_finite() {
            return bad(format!(
                "von_mises_kappa must be positive, got {}",
                self.von_mises_kappa
            ));
        }
        if !(self.exposure_step > 0.0) || !self.exposure_step.is_finite() {
            return bad(format!(
                "exposure_step must be positive, got {}",
                self.exposure_step
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_the_reference_setup() {
        let p = SolverParams::default();
        assert_eq!((p.population_size, p.generations), (400, 400));
        assert_eq!(p.crossover_prob, 0.8);
        assert_eq!(p.mutation_prob_individual, 0.4);
        assert_eq!(p.mutation_prob_gene, 0.02);
        assert_eq!(p.von_mises_kappa, 2.0);
        assert_eq!(p.selection, Selection::ReferencePoint);
        p.validate().unwrap();
    }

    #[test]
    fn rejects_out_of_range_values() {
        let mut p = SolverParams {
            crossover_prob: 1.5,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        p = SolverParams {
            population_size: 0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        p = SolverParams {
            von_mises_kappa: 0.0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        p = SolverParams {
            exposure_step: -0.1,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        p = SolverParams {
            generations: 0,
            ..Default::default()
        };
        assert!(p.validate().is_ok());
    }

    #[test]
    fn selection_names() {
        assert_eq!(
            "reference-point".parse::<Selection>().unwrap(),
            Selection::ReferencePoint
        );
        assert_eq!(
            "crowding-distance".parse::<Selection>().unwrap(),
            Selection::CrowdingDistance
        );
        assert!("spea2".parse::<Selection>().is_err());
        assert_eq!(
            serde_json::to_string(&Selection::CrowdingDistance).unwrap(),
            "\"crowding-distance\""
        );
    }
}
