//! The optimizer's memory: evaluated points, repeat statistics, the incumbent
//! and the rolling success window.

use std::collections::VecDeque;

use ndarray::Array2;
use thiserror::Error;

use crate::noise::RepeatStats;

#[derive(Debug, Error, PartialEq)]
pub enum StoreError {
    #[error("{x_rows} points but {y_len} values")]
    ShapeMismatch { x_rows: usize, y_len: usize },
    #[error("point has {got} coordinates, store holds {expected}-dimensional points")]
    DimensionMismatch { got: usize, expected: usize },
}

/// Where a row came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Design,
    Sequential { iter: usize },
}

#[derive(Debug, Clone)]
pub struct EvaluationStore {
    dims: usize,
    x: Vec<Vec<f64>>,
    stats: Vec<RepeatStats>,
    iter: Vec<usize>,
    epoch: Vec<usize>,
    current_epoch: usize,
    best_index: Option<usize>,
    window: VecDeque<bool>,
    window_size: usize,
    full_at_iter_start: bool,
    zero_streak: usize,
}

impl EvaluationStore {
    pub fn new(dims: usize, window_size: usize) -> Self {
        Self {
            dims,
            x: Vec::new(),
            stats: Vec::new(),
            iter: Vec::new(),
            epoch: Vec::new(),
            current_epoch: 0,
            best_index: None,
            window: VecDeque::with_capacity(window_size.max(1)),
            window_size: window_size.max(1),
            full_at_iter_start: false,
            zero_streak: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Points in internal scale.
    pub fn x_rows(&self) -> &[Vec<f64>] {
        &self.x
    }

    pub fn x_matrix(&self) -> Array2<f64> {
        Array2::from_shape_fn((self.len(), self.dims), |(i, j)| self.x[i][j])
    }

    pub fn rows_matrix(&self, rows: &[usize]) -> Array2<f64> {
        Array2::from_shape_fn((rows.len(), self.dims), |(i, j)| self.x[rows[i]][j])
    }

    /// Aggregated (mean) objective values.
    pub fn y(&self) -> Vec<f64> {
        self.stats.iter().map(|s| s.mean()).collect()
    }

    pub fn stats(&self) -> &[RepeatStats] {
        &self.stats
    }

    /// Originating sequential iteration of each row, 0 for design rows.
    pub fn iterations(&self) -> &[usize] {
        &self.iter
    }

    pub fn epochs(&self) -> &[usize] {
        &self.epoch
    }

    pub fn current_epoch(&self) -> usize {
        self.current_epoch
    }

    pub fn best_index(&self) -> Option<usize> {
        self.best_index
    }

    pub fn best_x(&self) -> Option<&[f64]> {
        self.best_index.map(|i| self.x[i].as_slice())
    }

    pub fn best_y(&self) -> Option<f64> {
        self.best_index.map(|i| self.stats[i].mean())
    }

    pub fn total_evaluations(&self) -> usize {
        self.stats.iter().map(|s| s.count()).sum()
    }

    /// Appends one point evaluated `values.len()` times. Returns its row index.
    pub fn append(&mut self, x: Vec<f64>, values: &[f64], phase: Phase) -> Result<usize, StoreError> {
        if x.len() != self.dims {
            return Err(StoreError::DimensionMismatch {
                got: x.len(),
                expected: self.dims,
            });
        }
        if values.is_empty() {
            return Err(StoreError::ShapeMismatch { x_rows: 1, y_len: 0 });
        }
        let before = self.best_y();
        let stats = RepeatStats::from_values(values);
        let idx = self.x.len();
        self.x.push(x);
        self.stats.push(stats);
        self.epoch.push(self.current_epoch);
        self.iter.push(match phase {
            Phase::Design => 0,
            Phase::Sequential { iter } => iter,
        });
        self.recompute_best();
        if matches!(phase, Phase::Sequential { .. }) {
            self.push_success(before.is_none_or(|b| stats.mean() < b));
        }
        Ok(idx)
    }

    /// Appends single-evaluation rows.
    pub fn update_storage(&mut self, x_new: &Array2<f64>, y_new: &[f64], phase: Phase) -> Result<(), StoreError> {
        if x_new.nrows() != y_new.len() {
            return Err(StoreError::ShapeMismatch {
                x_rows: x_new.nrows(),
                y_len: y_new.len(),
            });
        }
        for (row, &y) in x_new.rows().into_iter().zip(y_new) {
            self.append(row.to_vec(), &[y], phase)?;
        }
        Ok(())
    }

    /// Adds one more evaluation of an existing row.
    pub fn add_repeat(&mut self, row: usize, value: f64) {
        self.stats[row].push(value);
        self.recompute_best();
    }

    fn recompute_best(&mut self) {
        self.best_index = (0..self.stats.len()).min_by(|&a, &b| self.stats[a].mean().total_cmp(&self.stats[b].mean()));
    }

    fn push_success(&mut self, success: bool) {
        if self.window.len() == self.window_size {
            self.window.pop_front();
        }
        self.window.push_back(success);
    }

    /// Successes over the current window fill; 0 when empty.
    pub fn success_rate(&self) -> f64 {
        if self.window.is_empty() {
            return 0.0;
        }
        self.window.iter().filter(|s| **s).count() as f64 / self.window.len() as f64
    }

    pub fn window(&self) -> &VecDeque<bool> {
        &self.window
    }

    pub fn window_size(&self) -> usize {
        self.window_size
    }

    /// Marks the start of a sequential iteration for restart bookkeeping.
    pub fn begin_iteration(&mut self) {
        self.full_at_iter_start = self.window.len() == self.window_size;
    }

    /// Updates the zero-success streak at the end of an iteration and returns
    /// its new length. Only iterations that began with a full window count.
    pub fn end_iteration(&mut self) -> usize {
        if self.full_at_iter_start && self.success_rate() == 0.0 {
            self.zero_streak += 1;
        } else {
            self.zero_streak = 0;
        }
        self.zero_streak
    }

    pub fn zero_streak(&self) -> usize {
        self.zero_streak
    }

    /// Starts a new epoch: clears the success window and the streak.
    pub fn reset_after_restart(&mut self) {
        self.window.clear();
        self.zero_streak = 0;
        self.full_at_iter_start = false;
        self.current_epoch += 1;
    }
}
