use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::acquisition::{AcquisitionKind, AcquisitionOptimizer};
use crate::design::DesignKind;
use crate::surrogate::SubsetCriterion;

#[derive(Debug, Clone, Error, PartialEq)]
#[error("invalid configuration: {0}")]
pub struct ConfigError(pub String);

/// Every tunable of an optimization run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Objective calls allowed in total, initial design included.
    pub max_iter: usize,
    pub n_initial: usize,
    /// Wall-clock limit in seconds, checked between evaluations.
    pub max_time: Option<f64>,
    pub acquisition: AcquisitionKind,
    pub acquisition_optimizer: AcquisitionOptimizer,
    pub n_infill: usize,
    pub seed: u64,
    pub design: DesignKind,
    /// Natural-scale points evaluated before the generated design.
    pub x0: Option<Vec<Vec<f64>>>,
    pub restart_after_n: usize,
    /// Success-window capacity; defaults to `restart_after_n`.
    pub window_size: Option<usize>,
    pub restart_inject_best: bool,
    pub n_jobs: usize,
    pub eval_batch_size: usize,
    pub fun_repeats: usize,
    pub ocba_delta: usize,
    pub max_surrogate_points: Option<usize>,
    pub subset_criterion: SubsetCriterion,
    pub log_path: Option<PathBuf>,
    pub verbose: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            max_iter: 20,
            n_initial: 10,
            max_time: None,
            acquisition: AcquisitionKind::PredictedValue,
            acquisition_optimizer: AcquisitionOptimizer::DifferentialEvolution,
            n_infill: 1,
            seed: 0,
            design: DesignKind::QmcLhs,
            x0: None,
            restart_after_n: 100,
            window_size: None,
            restart_inject_best: true,
            n_jobs: 1,
            eval_batch_size: 1,
            fun_repeats: 1,
            ocba_delta: 0,
            max_surrogate_points: None,
            subset_criterion: SubsetCriterion::Distant,
            log_path: None,
            verbose: false,
        }
    }
}

impl RunConfig {
    pub fn window_size(&self) -> usize {
        self.window_size.unwrap_or(self.restart_after_n)
    }

    /// Rows in the initial design: `x0` rows plus generated rows, at least `n_initial`.
    pub fn design_rows(&self) -> usize {
        self.n_initial.max(self.x0.as_ref().map_or(0, Vec::len))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("max_iter", self.max_iter),
            ("n_initial", self.n_initial),
            ("n_infill", self.n_infill),
            ("restart_after_n", self.restart_after_n),
            ("window_size", self.window_size()),
            ("n_jobs", self.n_jobs),
            ("eval_batch_size", self.eval_batch_size),
            ("fun_repeats", self.fun_repeats),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(ConfigError(format!("{name} must be at least 1")));
            }
        }
        let design_cost = self.design_rows() * self.fun_repeats;
        if design_cost > self.max_iter {
            return Err(ConfigError(format!(
                "initial design needs {design_cost} evaluations ({} points x {} repeats) but max_iter is {}",
                self.design_rows(),
                self.fun_repeats,
                self.max_iter
            )));
        }
        if let Some(t) = self.max_time {
            if !(t > 0.0) {
                return Err(ConfigError(format!("max_time must be positive, got {t}")));
            }
        }
        if self.max_surrogate_points == Some(0) {
            return Err(ConfigError("max_surrogate_points must be at least 1".into()));
        }
        Ok(())
    }
}
