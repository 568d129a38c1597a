//! TOML run configuration shared by the `shipcc` binary and the examples.
//!
//! Every section has defaults, so a minimal config (or none at all) runs the
//! desk-scale defaults. Seeds are always explicit — nothing is seeded from
//! the wall clock.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::control::{CeConfig, EconomicConfig};
use crate::datagen::Scenario;
use crate::integrator::IntegratorConfig;
use crate::neural::TrainConfig;
use crate::plant::ParamVariant;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub out_dir: PathBuf,
    pub seed: u64,
    pub param_set: ParamVariant,
    /// Worker threads (0 = library default).
    pub workers: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            out_dir: PathBuf::from("runs"),
            seed: 42,
            param_set: ParamVariant::Truth,
            workers: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSection {
    pub n_samples: usize,
    pub scenario: String,
}

impl Default for SimulationSection {
    fn default() -> Self {
        SimulationSection {
            n_samples: 2000,
            scenario: "case-i".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub n_samples: usize,
    pub scenario: String,
}

impl Default for DataSection {
    fn default() -> Self {
        DataSection {
            n_samples: 20_000,
            scenario: "case-i".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingSection {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub early_stop_patience: Option<usize>,
    /// Black-box baselines to train alongside the hybrid nets.
    pub blackbox: Vec<String>,
}

impl Default for TrainingSection {
    fn default() -> Self {
        TrainingSection {
            epochs: 300,
            batch_size: 200,
            learning_rate: 1e-4,
            early_stop_patience: Some(50),
            blackbox: vec![],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationSection {
    pub rollout_steps: usize,
    /// Seed of the held-out evaluation trajectory.
    pub eval_seed: u64,
}

impl Default for EvaluationSection {
    fn default() -> Self {
        EvaluationSection {
            rollout_steps: 1800,
            eval_seed: 9090,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataEfficiencySection {
    /// Desk-scale training-set ladder.
    pub sizes: Vec<usize>,
    pub seeds: Vec<u64>,
    /// Hybrid training size vs the black-box trained on the largest size.
    pub hybrid_size: usize,
}

impl Default for DataEfficiencySection {
    fn default() -> Self {
        DataEfficiencySection {
            sizes: vec![5_000, 10_000, 15_000, 20_000],
            seeds: vec![1, 2, 3],
            hybrid_size: 5_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneralizationSection {
    pub seeds: Vec<u64>,
    pub n_samples: usize,
    pub rollout_steps: usize,
}

impl Default for GeneralizationSection {
    fn default() -> Self {
        GeneralizationSection {
            seeds: vec![1, 2, 3],
            n_samples: 20_000,
            rollout_steps: 1800,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControlSection {
    pub n_control_steps: usize,
    pub control_hold: usize,
    pub profile_seed: u64,
    pub nominal_load: f64,
    pub controllers: Vec<String>,
}

impl Default for ControlSection {
    fn default() -> Self {
        ControlSection {
            n_control_steps: 200,
            control_hold: 10,
            profile_seed: 7,
            nominal_load: 0.55,
            controllers: vec![
                "empc-hybrid".into(),
                "mpc-hybrid".into(),
                "empc-imperfect".into(),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CeSection {
    pub iterations: usize,
    pub samples: usize,
    pub elite: usize,
    pub lambda: f64,
    pub variance_floor: f64,
    pub horizon: usize,
}

impl Default for CeSection {
    fn default() -> Self {
        CeSection {
            iterations: 20,
            samples: 400,
            elite: 20,
            lambda: 0.01,
            variance_floor: 1e-8,
            horizon: 5,
        }
    }
}

impl CeSection {
    pub fn to_ce_config(&self) -> CeConfig {
        CeConfig {
            n_iterations: self.iterations,
            n_samples: self.samples,
            n_elite: self.elite,
            blend_lambda: self.lambda,
            variance_floor: self.variance_floor,
            horizon: self.horizon,
            ..CeConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct EconomicsSection {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub y_limit: Option<f64>,
}

impl EconomicsSection {
    pub fn to_economic_config(&self) -> EconomicConfig {
        let d = EconomicConfig::default();
        EconomicConfig {
            alpha: self.alpha.unwrap_or(d.alpha),
            beta: self.beta.unwrap_or(d.beta),
            y_limit: self.y_limit.unwrap_or(d.y_limit),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorSection {
    pub sample_period: f64,
    pub substeps: usize,
    pub newton_tol: f64,
    pub newton_max_iters: usize,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        let d = IntegratorConfig::default();
        IntegratorSection {
            sample_period: d.sample_period,
            substeps: d.substeps,
            newton_tol: d.newton_tol,
            newton_max_iters: d.newton_max_iters,
        }
    }
}

impl IntegratorSection {
    pub fn to_integrator_config(&self) -> IntegratorConfig {
        IntegratorConfig {
            sample_period: self.sample_period,
            substeps: self.substeps,
            newton_tol: self.newton_tol,
            newton_max_iters: self.newton_max_iters,
        }
    }
}

/// The full run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub run: RunSection,
    pub simulation: SimulationSection,
    pub data: DataSection,
    pub training: TrainingSection,
    pub evaluation: EvaluationSection,
    pub data_efficiency: DataEfficiencySection,
    pub generalization: GeneralizationSection,
    pub control: ControlSection,
    pub ce: CeSection,
    pub economics: EconomicsSection,
    pub integrator: IntegratorSection,
}

impl RunConfig {
    /// Parse a TOML config file; returns the parsed config and the raw text
    /// (the text is what gets hashed for the run directory).
    pub fn load(path: &Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config `{}`: {e}", path.display()))
        })?;
        let cfg = Self::parse(&text)?;
        Ok((cfg, text))
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("config parse error: {e}")))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn scenario(name: &str) -> Result<Scenario> {
        match name {
            "case-i" => Ok(Scenario::case_i()),
            "case-ii" => Ok(Scenario::case_ii()),
            "condition-1" => Ok(Scenario::single_condition(0)),
            "condition-2" => Ok(Scenario::single_condition(1)),
            "condition-3" => Ok(Scenario::single_condition(2)),
            other => Err(Error::Config(format!(
                "unknown scenario `{other}` (expected case-i, case-ii, condition-1..3)"
            ))),
        }
    }

    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            batch_size: self.training.batch_size,
            epochs: self.training.epochs,
            learning_rate: self.training.learning_rate,
            seed,
            early_stop_patience: self.training.early_stop_patience,
            ..TrainConfig::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_parses_to_defaults() {
        let cfg = RunConfig::parse("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.data.n_samples, 20_000);
        assert_eq!(cfg.ce.samples, 400);
    }

    #[test]
    fn partial_overrides_apply() {
        let cfg = RunConfig::parse(
            "[run]\nseed = 7\n\n[data]\nn_samples = 500\n\n[ce]\niterations = 5\n",
        )
        .unwrap();
        assert_eq!(cfg.run.seed, 7);
        assert_eq!(cfg.data.n_samples, 500);
        assert_eq!(cfg.ce.iterations, 5);
        assert_eq!(cfg.training.epochs, 300);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(RunConfig::parse("[run]\nbogus = 1\n").is_err());
    }

    #[test]
    fn roundtrips_through_toml() {
        let cfg = RunConfig::default();
        let text = cfg.to_toml().unwrap();
        let back = RunConfig::parse(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn scenario_names_resolve() {
        assert!(RunConfig::scenario("case-i").is_ok());
        assert!(RunConfig::scenario("condition-3").is_ok());
        assert!(RunConfig::scenario("nope").is_err());
    }
}
