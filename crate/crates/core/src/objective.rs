//! The objective contract: a batch of natural-scale points in, one value per
//! point out.

use ndarray::Array2;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
#[error("{0}")]
pub struct ObjectiveError(pub String);

impl From<String> for ObjectiveError {
    fn from(s: String) -> Self {
        Self(s)
    }
}

impl From<&str> for ObjectiveError {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

pub trait Objective: Send + Sync {
    /// Evaluates every row of `x` (natural scale, shape `(n, d)`).
    fn evaluate(&self, x: &Array2<f64>) -> Result<Vec<f64>, ObjectiveError>;

    /// Like [`evaluate`](Self::evaluate), additionally returning the raw
    /// `(n, m)` outputs of a multi-objective function before scalarization.
    fn evaluate_with_raw(&self, x: &Array2<f64>) -> Result<(Vec<f64>, Option<Array2<f64>>), ObjectiveError> {
        self.evaluate(x).map(|y| (y, None))
    }
}

impl<F> Objective for F
where
    F: Fn(&Array2<f64>) -> Vec<f64> + Send + Sync,
{
    fn evaluate(&self, x: &Array2<f64>) -> Result<Vec<f64>, ObjectiveError> {
        Ok(self(x))
    }
}

/// Adapts a closure that can fail.
pub struct Fallible<F>(pub F);

impl<F> Objective for Fallible<F>
where
    F: Fn(&Array2<f64>) -> Result<Vec<f64>, ObjectiveError> + Send + Sync,
{
    fn evaluate(&self, x: &Array2<f64>) -> Result<Vec<f64>, ObjectiveError> {
        (self.0)(x)
    }
}

/// Calls `fun` and checks the output length and finiteness.
pub(crate) fn checked_call(
    fun: &dyn Objective,
    x: &Array2<f64>,
) -> Result<(Vec<f64>, Option<Array2<f64>>), ObjectiveError> {
    let (y, raw) = fun.evaluate_with_raw(x)?;
    if y.len() != x.nrows() {
        return Err(ObjectiveError(format!(
            "objective returned {} values for {} points",
            y.len(),
            x.nrows()
        )));
    }
    if let Some(i) = y.iter().position(|v| v.is_nan()) {
        return Err(ObjectiveError(format!("objective returned NaN for point {i}")));
    }
    if let Some(r) = &raw {
        if r.nrows() != x.nrows() {
            return Err(ObjectiveError(format!(
                "raw objective output has {} rows for {} points",
                r.nrows(),
                x.nrows()
            )));
        }
    }
    Ok((y, raw))
}
