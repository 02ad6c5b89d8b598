//! Experiment configuration files (TOML).
//!
//! Every section is optional and omitted keys take their defaults. Each command
//! writes the fully resolved configuration to `config.toml` in its output
//! directory. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use hrc_risk::estimator::{Benchmark, EstimatorSettings, SpaceMode};
use hrc_risk::risk::{SeverityStatistic, SweepGrid};
use hrc_risk::scenario::{DangerPredicate, ScenarioConfig, ScenarioKind};
use hrc_risk::uncertainty::UncertaintySpec;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const DEFAULT_SEED: u64 = 20261017;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Not part of the config hash.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_scenario")]
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub uncertainty: UncertaintySpec,
    #[serde(default)]
    pub estimator: EstimatorSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub safety: SafetySection,
    #[serde(default)]
    pub simulate: SimulateSection,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_scenario() -> ScenarioConfig {
    ScenarioConfig::preset(ScenarioKind::Approach)
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            output_dir: None,
            scenario: default_scenario(),
            uncertainty: UncertaintySpec::default(),
            estimator: EstimatorSection::default(),
            sweep: SweepSection::default(),
            safety: SafetySection::default(),
            simulate: SimulateSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimatorSection {
    pub n: usize,
    pub beta: f64,
    pub edges_per_side: usize,
    pub repetitions: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_scale: Option<f64>,
    /// Use a built-in benchmark instead of the scenario.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub benchmark: Option<Benchmark>,
    pub space_mode: SpaceMode,
    /// Explicit `[lo, hi]` per coordinate; defaults derive from the uncertainty models.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Vec<[f64; 2]>>,
    pub danger: DangerPredicate,
}

impl Default for EstimatorSection {
    fn default() -> Self {
        let s = EstimatorSettings::default();
        Self {
            n: s.n,
            beta: s.beta,
            edges_per_side: s.edges_per_side,
            repetitions: s.repetitions,
            noise_scale: s.noise_scale,
            benchmark: None,
            space_mode: SpaceMode::default(),
            bounds: None,
            danger: DangerPredicate::default(),
        }
    }
}

impl EstimatorSection {
    pub fn settings(&self) -> EstimatorSettings {
        EstimatorSettings {
            n: self.n,
            beta: self.beta,
            edges_per_side: self.edges_per_side,
            repetitions: self.repetitions,
            noise_scale: self.noise_scale,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub grid: SweepGrid,
    pub trials_per_constellation: usize,
    /// Number of `u_s` columns of the table export for 3-D grids.
    pub table_bins: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            grid: SweepGrid::paper_shaped(),
            trials_per_constellation: 20,
            table_bins: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SafetySection {
    pub lambda: f64,
    pub severity_limit: f64,
    pub statistic: SeverityStatistic,
    /// A `surface.json` written by `sweep`; when absent `evaluate` runs the sweep.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub surface: Option<PathBuf>,
}

impl Default for SafetySection {
    fn default() -> Self {
        Self {
            lambda: 0.05,
            severity_limit: 1.0,
            statistic: SeverityStatistic::default(),
            surface: None,
        }
    }
}

/// Fixed constellation for `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateSection {
    pub trials: usize,
    pub delay_steps: u32,
    pub delta_d0: f64,
    pub c: f64,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            trials: 100,
            delay_steps: 0,
            delta_d0: 0.0,
            c: 0.0,
        }
    }
}

/// Named starting points selectable with `--preset`.
///
/// Benchmark presets use `n = 30000` and 20 repetitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    AnalyticBox,
    LargeBox,
    NormalBump,
    ScenarioA,
    ScenarioB,
    ScenarioC,
}

impl Preset {
    pub fn config(self) -> ExperimentConfig {
        let mut config = ExperimentConfig::default();
        if matches!(self, Preset::AnalyticBox | Preset::LargeBox | Preset::NormalBump) {
            config.estimator.n = 30_000;
            config.estimator.repetitions = 20;
        }
        match self {
            Preset::AnalyticBox => config.estimator.benchmark = Some(Benchmark::AnalyticBox),
            Preset::LargeBox => config.estimator.benchmark = Some(Benchmark::LargeBox),
            Preset::NormalBump => config.estimator.benchmark = Some(Benchmark::NormalBump),
            Preset::ScenarioA => config.scenario = ScenarioConfig::preset(ScenarioKind::Approach),
            Preset::ScenarioB => {
                config.scenario = ScenarioConfig::preset(ScenarioKind::SharedReach)
            }
            Preset::ScenarioC => config.scenario = ScenarioConfig::preset(ScenarioKind::MobileStop),
        }
        config
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let config: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.check()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Cross-section consistency checks.
    pub fn check(&self) -> Result<(), CliError> {
        let a = self.scenario.timestep();
        let b = self.uncertainty.temporal.timestep();
        if a != b {
            return Err(CliError::Config(format!(
                "scenario.timestep_T ({a}) and uncertainty.temporal.timestep_T ({b}) must agree"
            )));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    /// SHA-256 over the canonical JSON form, without `output_dir`.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output_dir = None;
        let bytes = serde_json::to_vec(&canonical).expect("config serializes to JSON");
        Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_the_default() {
        assert_eq!(ExperimentConfig::from_toml("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn toml_round_trip() {
        for preset in [Preset::AnalyticBox, Preset::ScenarioB, Preset::ScenarioC] {
            let c = preset.config();
            assert_eq!(ExperimentConfig::from_toml(&c.to_toml()).unwrap(), c);
        }
    }

    #[test]
    fn unknown_keys_are_named() {
        for text in [
            "sed = 1",
            "[estimator]\nbta = 0.3",
            "[sweep]\ntrials = 3",
            "[safety]\nlamda = 0.1",
        ] {
            let err = ExperimentConfig::from_toml(text).unwrap_err().to_string();
            let key = text.rsplit('\n').next().unwrap().split(' ').next().unwrap();
            assert!(err.contains(key), "{err}");
        }
    }

    #[test]
    fn timesteps_must_agree() {
        let c = ExperimentConfig {
            scenario: ScenarioConfig::builder(ScenarioKind::Approach).timestep(0.1).build().unwrap(),
            ..Default::default()
        };
        assert!(matches!(c.check(), Err(CliError::Config(_))));
    }

    #[test]
    fn hash_ignores_output_dir_only() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.output_dir = Some("elsewhere".into());
        assert_eq!(a.hash(), b.hash());
        b.seed += 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
