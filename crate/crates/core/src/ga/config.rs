use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StopVersion {
    /// Stop at the epoch cap or when an optimal schedule appears.
    V1,
    /// Stop at the epoch cap or after `max_patience` epochs without improvement.
    V2,
}

/// Probabilities of `[cx_one_line, cx_one_line_partially]`.
pub type CrossoverMix = [f64; 2];

/// Probabilities of `[swap, change, penalty]` mutation.
pub type MutationMix = [f64; 3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub pop_size: usize,
    pub stop_cond_version: StopVersion,
    pub nb_max_epochs: usize,
    pub max_patience: usize,
    pub probab_crossover: f64,
    pub probab_mutation: f64,
    pub min_prob_greedy: f64,
    pub use_improver: bool,
    pub crossover_mix: CrossoverMix,
    pub mutation_mix: MutationMix,
    pub seed: u64,
    pub max_wall_seconds: Option<f64>,
}

impl Default for GaConfig {
    /// The best configuration found for 100 × 7 instances.
    fn default() -> Self {
        GaConfig {
            pop_size: 200,
            stop_cond_version: StopVersion::V2,
            nb_max_epochs: 50_000,
            max_patience: 3_000,
            probab_crossover: 0.5,
            probab_mutation: 1.0,
            min_prob_greedy: 0.4,
            use_improver: false,
            crossover_mix: [0.5, 0.5],
            mutation_mix: [0.2, 0.2, 0.6],
            seed: 0,
            max_wall_seconds: None,
        }
    }
}

fn check_mix(name: &str, mix: &[f64]) -> Result<()> {
    if mix.iter().any(|p| !(0.0..=1.0).contains(p)) || (mix.iter().sum::<f64>() - 1.0).abs() > 1e-9
    {
        return Err(Error::Configuration(format!(
            "{name} {mix:?} is not a probability vector"
        )));
    }
    Ok(())
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.pop_size == 0 || !self.pop_size.is_multiple_of(2) {
            return Err(Error::Configuration(format!(
                "pop_size must be even and positive, got {}",
                self.pop_size
            )));
        }
        if self.nb_max_epochs == 0 || self.max_patience == 0 {
            return Err(Error::Configuration(
                "epoch and patience caps must be positive".into(),
            ));
        }
        for (name, p) in [
            ("probab_crossover", self.probab_crossover),
            ("probab_mutation", self.probab_mutation),
            ("min_prob_greedy", self.min_prob_greedy),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Configuration(format!("{name} = {p} outside [0, 1]")));
            }
        }
        check_mix("crossover_mix", &self.crossover_mix)?;
        check_mix("mutation_mix", &self.mutation_mix)?;
        if let Some(t) = self.max_wall_seconds {
            if !(t >= 0.0) {
                return Err(Error::Configuration(format!("max_wall_seconds = {t}")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        GaConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_odd_population_and_bad_mixes() {
        let cfg = GaConfig {
            pop_size: 3,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = GaConfig {
            mutation_mix: [0.2, 0.2, 0.5],
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = GaConfig {
            probab_mutation: 1.5,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn partial_json_fills_defaults() {
        let cfg: GaConfig =
            serde_json::from_str(r#"{"pop_size": 50, "stop_cond_version": "v1"}"#).unwrap();
        assert_eq!(cfg.pop_size, 50);
        assert_eq!(cfg.stop_cond_version, StopVersion::V1);
        assert_eq!(cfg.mutation_mix, [0.2, 0.2, 0.6]);
    }
}
