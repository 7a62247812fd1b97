//! Experiment configuration files.
//!
//! A config is a JSON document mirroring [`RunConfig`] plus bookkeeping the
//! runner needs (experiment name, output directory, seed list for suites).
//! Every field has a documented default, so `{}` is a valid config; unknown
//! keys are rejected with the offending key named. [`ExperimentConfig::resolved`]
//! returns the config with every default applied, which the CLI echoes into
//! the output directory so a run can always be reproduced from its artifacts.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evaluation::{EvalMode, SplitSpec};
use crate::orchestrator::{RunConfig, SearchStrategy};
use crate::selection::SelectionPolicy;
use crate::task::{Orientation, SyntheticTask};
use crate::worker::{OperatorModel, OperatorStyle};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unknown task preset {0:?} (expected smooth-unimodal, rugged-multimodal, or gapped-rugged)")]
    UnknownPreset(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Parent-selection section. Defaults: temperature 0.2, crossover_prob 0.15.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SelectionConfig {
    pub temperature: f64,
    pub crossover_prob: f64,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            temperature: 0.2,
            crossover_prob: 0.15,
        }
    }
}

/// Worker operator section. Defaults mirror [`OperatorModel::default`]:
/// multi_step style, 3 steps of scale 0.3, failure_prob 0.05, log-normal
/// durations with median 1, sigma 1, cap 9.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OperatorConfig {
    pub style: OperatorStyle,
    pub max_steps: u32,
    pub step_scale: f64,
    pub failure_prob: f64,
    pub duration_median: f64,
    pub duration_sigma: f64,
    pub duration_cap: f64,
}

impl Default for OperatorConfig {
    fn default() -> Self {
        let m = OperatorModel::default();
        Self {
            style: m.style,
            max_steps: m.max_steps,
            step_scale: m.step_scale,
            failure_prob: m.failure_prob,
            duration_median: m.duration_median,
            duration_sigma: m.duration_sigma,
            duration_cap: m.duration_cap,
        }
    }
}

impl OperatorConfig {
    fn build(&self) -> OperatorModel {
        OperatorModel {
            style: self.style,
            max_steps: self.max_steps,
            step_scale: self.step_scale,
            failure_prob: self.failure_prob,
            duration_median: self.duration_median,
            duration_sigma: self.duration_sigma,
            duration_cap: self.duration_cap,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalModeName {
    Hce,
    SelfReported,
}

/// Evaluation section. Default mode is `hce`; the three defect knobs apply
/// only under `self_reported` and default to off (no resplit, sigma 0,
/// corruption 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    pub mode: EvalModeName,
    pub resplit_per_call: bool,
    pub noise_sigma: f64,
    pub corruption_prob: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            mode: EvalModeName::Hce,
            resplit_per_call: false,
            noise_sigma: 0.0,
            corruption_prob: 0.0,
        }
    }
}

impl EvalConfig {
    fn build(&self) -> Result<EvalMode, ConfigError> {
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(ConfigError::Invalid(format!(
                "eval.noise_sigma must be finite and non-negative, got {}",
                self.noise_sigma
            )));
        }
        if !(0.0..=1.0).contains(&self.corruption_prob) || self.corruption_prob.is_nan() {
            return Err(ConfigError::Invalid(format!(
                "eval.corruption_prob must be in [0, 1], got {}",
                self.corruption_prob
            )));
        }
        Ok(match self.mode {
            EvalModeName::Hce => EvalMode::Hce,
            EvalModeName::SelfReported => EvalMode::SelfReported {
                resplit_per_call: self.resplit_per_call,
                noise_sigma: self.noise_sigma,
                corruption_prob: self.corruption_prob,
            },
        })
    }
}

/// Task section: a named preset plus optional per-field overrides. Defaults:
/// preset `rugged-multimodal`, dim 6. The split-noise seed is not a config
/// key — it is wired to `split.split_seed` so that "same split" and "same
/// noise field" always coincide.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TaskConfig {
    pub preset: String,
    pub dim: usize,
    pub center: Option<f64>,
    pub box_half_width: Option<f64>,
    pub smooth_weight: Option<f64>,
    pub basin_width: Option<f64>,
    pub rugged_weight: Option<f64>,
    pub ripple_freq: Option<f64>,
    pub gap_strength: Option<f64>,
    pub noise_cell: Option<f64>,
    pub orientation: Option<Orientation>,
}

impl Default for TaskConfig {
    fn default() -> Self {
        Self {
            preset: "rugged-multimodal".into(),
            dim: 6,
            center: None,
            box_half_width: None,
            smooth_weight: None,
            basin_width: None,
            rugged_weight: None,
            ripple_freq: None,
            gap_strength: None,
            noise_cell: None,
            orientation: None,
        }
    }
}

impl TaskConfig {
    fn build(&self, noise_seed: u64) -> Result<SyntheticTask, ConfigError> {
        if self.dim == 0 {
            return Err(ConfigError::Invalid("task.dim must be at least 1".into()));
        }
        let mut task = SyntheticTask::preset(&self.preset, self.dim, noise_seed)
            .ok_or_else(|| ConfigError::UnknownPreset(self.preset.clone()))?;
        if let Some(v) = self.center {
            task.center = v;
        }
        if let Some(v) = self.box_half_width {
            task.box_half_width = v;
        }
        if let Some(v) = self.smooth_weight {
            task.smooth_weight = v;
        }
        if let Some(v) = self.basin_width {
            task.basin_width = v;
        }
        if let Some(v) = self.rugged_weight {
            task.rugged_weight = v;
        }
        if let Some(v) = self.ripple_freq {
            task.ripple_freq = v;
        }
        if let Some(v) = self.gap_strength {
            task.gap_strength = v;
        }
        if let Some(v) = self.noise_cell {
            task.noise_cell = v;
        }
        if let Some(v) = self.orientation {
            task.orientation = v;
        }
        Ok(task)
    }
}

/// Split section. Defaults: 0.8 / 0.1 / 0.1 with split_seed 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitConfig {
    pub train_fraction: f64,
    pub search_fraction: f64,
    pub val_fraction: f64,
    pub split_seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        let s = SplitSpec::default();
        Self {
            train_fraction: s.train_fraction,
            search_fraction: s.search_fraction,
            val_fraction: s.val_fraction,
            split_seed: s.split_seed,
        }
    }
}

impl SplitConfig {
    fn build(&self) -> SplitSpec {
        SplitSpec {
            train_fraction: self.train_fraction,
            search_fraction: self.search_fraction,
            val_fraction: self.val_fraction,
            split_seed: self.split_seed,
        }
    }
}

/// The experiment file format. Field defaults (all optional, `{}` is valid):
///
/// | key             | default               |
/// |-----------------|-----------------------|
/// | `name`          | `"experiment"`        |
/// | `out_dir`       | `"out"`               |
/// | `master_seed`   | 0                     |
/// | `n_workers`     | 8                     |
/// | `budget`        | 72.0                  |
/// | `checkpoints`   | [3, 6, 12, 24, 48, 72]|
/// | `strategy`      | `"evolution"`         |
/// | `pool_size`     | 1000                  |
/// | `init_drafts`   | `n_workers`           |
/// | `seeds`         | [0, 1, 2]             |
/// | `worker_counts` | [1, 8]                |
///
/// plus the sections documented on [`SelectionConfig`], [`OperatorConfig`],
/// [`EvalConfig`], [`TaskConfig`], and [`SplitConfig`]. `seeds` and
/// `worker_counts` drive ablation suites; single runs use `master_seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub name: String,
    pub out_dir: String,
    pub master_seed: u64,
    pub n_workers: u32,
    pub budget: f64,
    pub checkpoints: Vec<f64>,
    pub strategy: SearchStrategy,
    pub selection: SelectionConfig,
    pub operator: OperatorConfig,
    pub eval: EvalConfig,
    pub task: TaskConfig,
    pub split: SplitConfig,
    pub pool_size: u32,
    /// Initial drafts before selection starts; `null` means one per worker.
    pub init_drafts: Option<u32>,
    /// Seed list for ablation suites (paired across variants).
    pub seeds: Vec<u64>,
    /// Worker counts compared by the worker-scaling suite.
    pub worker_counts: Vec<u32>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "experiment".into(),
            out_dir: "out".into(),
            master_seed: 0,
            n_workers: 8,
            budget: 72.0,
            checkpoints: vec![3.0, 6.0, 12.0, 24.0, 48.0, 72.0],
            strategy: SearchStrategy::Evolution,
            selection: SelectionConfig::default(),
            operator: OperatorConfig::default(),
            eval: EvalConfig::default(),
            task: TaskConfig::default(),
            split: SplitConfig::default(),
            pool_size: 1000,
            init_drafts: None,
            seeds: vec![0, 1, 2],
            worker_counts: vec![1, 8],
        }
    }
}

impl ExperimentConfig {
    /// Parses a config document, rejecting unknown keys by name.
    pub fn from_str(contents: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(contents)?)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let contents = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_str(&contents)
    }

    /// The config with every default applied, suitable for echoing next to
    /// run artifacts. Feeding the echo back through [`Self::resolve`] yields
    /// the same run.
    pub fn resolved(&self) -> Self {
        let mut out = self.clone();
        out.init_drafts = Some(self.init_drafts.unwrap_or(self.n_workers));
        out
    }

    /// JSON form of [`Self::resolved`], with a trailing newline.
    pub fn resolved_json(&self) -> String {
        let mut out =
            serde_json::to_string_pretty(&self.resolved()).expect("config serializes");
        out.push('\n');
        out
    }

    /// Builds the fully concrete run description, validating everything a
    /// run would reject so that config mistakes surface before any work.
    pub fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let config = RunConfig {
            n_workers: self.n_workers,
            budget: self.budget,
            strategy: self.strategy,
            selection: SelectionPolicy {
                temperature: self.selection.temperature,
                crossover_prob: self.selection.crossover_prob,
            },
            operator: self.operator.build(),
            eval_mode: self.eval.build()?,
            task: self.task.build(self.split.split_seed)?,
            pool_size: self.pool_size,
            split_spec: self.split.build(),
            master_seed: self.master_seed,
            init_drafts: self.init_drafts.unwrap_or(self.n_workers),
            checkpoints: self.checkpoints.clone(),
            score_val_split: true,
        };
        config
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_a_valid_config() {
        let cfg = ExperimentConfig::from_str("{}").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        let run = cfg.resolve().unwrap();
        assert_eq!(run.n_workers, 8);
        assert_eq!(run.init_drafts, 8);
        assert_eq!(run.budget, 72.0);
        assert_eq!(run.checkpoints, vec![3.0, 6.0, 12.0, 24.0, 48.0, 72.0]);
        assert_eq!(run.eval_mode, EvalMode::Hce);
    }

    #[test]
    fn unknown_top_level_key_is_named() {
        let err = ExperimentConfig::from_str(r#"{"buget": 10}"#).unwrap_err();
        assert!(err.to_string().contains("buget"), "got: {err}");
    }

    #[test]
    fn unknown_nested_key_is_named() {
        let err =
            ExperimentConfig::from_str(r#"{"selection": {"temperature": 0.5, "tempo": 1}}"#)
                .unwrap_err();
        assert!(err.to_string().contains("tempo"), "got: {err}");
        let err = ExperimentConfig::from_str(r#"{"task": {"presett": "x"}}"#).unwrap_err();
        assert!(err.to_string().contains("presett"), "got: {err}");
    }

    #[test]
    fn preset_and_overrides_build_the_task() {
        let cfg = ExperimentConfig::from_str(
            r#"{"task": {"preset": "gapped-rugged", "dim": 4, "gap_strength": 0.1},
                "split": {"split_seed": 7}}"#,
        )
        .unwrap();
        let run = cfg.resolve().unwrap();
        assert_eq!(run.task.dim, 4);
        assert_eq!(run.task.gap_strength, 0.1);
        assert_eq!(run.task.rugged_weight, 0.3);
        // The noise field follows the split seed.
        assert_eq!(run.task.noise_seed, 7);
        assert_eq!(run.split_spec.split_seed, 7);
    }

    #[test]
    fn unknown_preset_is_rejected() {
        let cfg = ExperimentConfig::from_str(r#"{"task": {"preset": "spiky"}}"#).unwrap();
        let err = cfg.resolve().unwrap_err();
        assert!(err.to_string().contains("spiky"), "got: {err}");
    }

    #[test]
    fn self_reported_section_maps_to_the_eval_mode() {
        let cfg = ExperimentConfig::from_str(
            r#"{"eval": {"mode": "self_reported", "resplit_per_call": true,
                "noise_sigma": 0.2, "corruption_prob": 0.02}}"#,
        )
        .unwrap();
        let run = cfg.resolve().unwrap();
        assert_eq!(
            run.eval_mode,
            EvalMode::SelfReported {
                resplit_per_call: true,
                noise_sigma: 0.2,
                corruption_prob: 0.02,
            }
        );
    }

    #[test]
    fn strategy_parses_by_name() {
        let cfg = ExperimentConfig::from_str(r#"{"strategy": "best_of_k"}"#).unwrap();
        assert_eq!(cfg.resolve().unwrap().strategy, SearchStrategy::BestOfK);
        assert!(ExperimentConfig::from_str(r#"{"strategy": "bestest"}"#).is_err());
    }

    #[test]
    fn invalid_values_fail_resolution_not_the_run() {
        for doc in [
            r#"{"budget": -1}"#,
            r#"{"n_workers": 0}"#,
            r#"{"task": {"dim": 0}}"#,
            r#"{"selection": {"temperature": 0}}"#,
            r#"{"eval": {"corruption_prob": 1.5}}"#,
            r#"{"checkpoints": [5, 3]}"#,
            r#"{"split": {"train_fraction": 0.9}}"#,
        ] {
            let cfg = ExperimentConfig::from_str(doc).unwrap();
            assert!(cfg.resolve().is_err(), "{doc} should fail resolution");
        }
    }

    #[test]
    fn resolved_echo_round_trips_to_the_same_run() {
        let cfg = ExperimentConfig::from_str(
            r#"{"master_seed": 9, "n_workers": 3,
                "task": {"preset": "gapped-rugged", "dim": 3}}"#,
        )
        .unwrap();
        let echo = cfg.resolved_json();
        let back = ExperimentConfig::from_str(&echo).unwrap();
        assert_eq!(back, cfg.resolved());
        let a = serde_json::to_string(&cfg.resolve().unwrap()).unwrap();
        let b = serde_json::to_string(&back.resolve().unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn from_path_reads_a_file_and_reports_missing_ones() {
        let dir = std::env::temp_dir();
        let path = dir.join(format!("evosim-config-test-{}.json", std::process::id()));
        std::fs::write(&path, r#"{"name": "from-disk"}"#).unwrap();
        let cfg = ExperimentConfig::from_path(&path).unwrap();
        assert_eq!(cfg.name, "from-disk");
        std::fs::remove_file(&path).unwrap();

        let err = ExperimentConfig::from_path(&path).unwrap_err();
        assert!(matches!(err, ConfigError::Io { .. }));
        assert!(err.to_string().contains("evosim-config-test"));
    }
}
