//! Surrogate models and the fit/predict contract the optimizer relies on.

mod kriging;
mod subset;

pub use kriging::{concentrated_log_likelihood, Kriging, KrigingConfig, KrigingMethod};
pub use subset::{kmeans, select_surrogate_points, SubsetCriterion};

use ndarray::Array2;
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SurrogateError {
    #[error("surrogate has not been fitted")]
    NotFitted,
    #[error("need at least {needed} training points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("training data has {x_rows} rows but {y_len} targets")]
    ShapeMismatch { x_rows: usize, y_len: usize },
    #[error("input has {got} columns, model was trained on {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("training data contains non-finite values")]
    NonFinite,
    #[error("correlation matrix is singular even with jitter {jitter:e}")]
    SingularCorrelation { jitter: f64 },
    #[error("invalid surrogate schedule: {0}")]
    InvalidSchedule(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub mean: f64,
    pub std: Option<f64>,
}

/// Read side of a surrogate: everything acquisition search needs.
pub trait Predictor: Send + Sync {
    fn predict_point(&self, x: &[f64]) -> Result<Prediction, SurrogateError>;

    /// Whether `predict_point` fills in `std`.
    fn provides_std(&self) -> bool;

    fn predict(&self, x: &Array2<f64>) -> Result<(Vec<f64>, Option<Vec<f64>>), SurrogateError> {
        let mut mean = Vec::with_capacity(x.nrows());
        let mut std = self.provides_std().then(|| Vec::with_capacity(x.nrows()));
        for row in x.rows() {
            let p = self.predict_point(row.as_slice().expect("standard layout"))?;
            mean.push(p.mean);
            if let (Some(s), Some(v)) = (std.as_mut(), p.std) {
                s.push(v);
            }
        }
        Ok((mean, std))
    }
}

/// A trainable surrogate.
pub trait Surrogate: Predictor {
    fn fit(&mut self, x: &Array2<f64>, y: &[f64]) -> Result<(), SurrogateError>;

    fn name(&self) -> &str {
        "surrogate"
    }
}

impl<T: Predictor + ?Sized> Predictor for Box<T> {
    fn predict_point(&self, x: &[f64]) -> Result<Prediction, SurrogateError> {
        (**self).predict_point(x)
    }
    fn provides_std(&self) -> bool {
        (**self).provides_std()
    }
}

impl<T: Surrogate + ?Sized> Surrogate for Box<T> {
    fn fit(&mut self, x: &Array2<f64>, y: &[f64]) -> Result<(), SurrogateError> {
        (**self).fit(x, y)
    }
    fn name(&self) -> &str {
        (**self).name()
    }
}

/// Inputs mapped affinely into the unit cube before reaching the wrapped model.
pub struct UnitScaled<'a, P: ?Sized> {
    pub inner: &'a P,
    pub bounds: &'a [(f64, f64)],
}

pub(crate) fn scale_point(x: &[f64], bounds: &[(f64, f64)]) -> Vec<f64> {
    x.iter()
        .zip(bounds)
        .map(|(v, &(lo, hi))| (v - lo) / (hi - lo))
        .collect()
}

pub(crate) fn scale_matrix(x: &Array2<f64>, bounds: &[(f64, f64)]) -> Array2<f64> {
    let mut out = x.clone();
    for mut row in out.rows_mut() {
        for (v, &(lo, hi)) in row.iter_mut().zip(bounds) {
            *v = (*v - lo) / (hi - lo);
        }
    }
    out
}

impl<P: Predictor + ?Sized> Predictor for UnitScaled<'_, P> {
    fn predict_point(&self, x: &[f64]) -> Result<Prediction, SurrogateError> {
        self.inner.predict_point(&scale_point(x, self.bounds))
    }
    fn provides_std(&self) -> bool {
        self.inner.provides_std()
    }
}

/// Several candidate surrogates, one of which is drawn at each refit.
pub struct SurrogateSchedule {
    models: Vec<Box<dyn Surrogate>>,
    prob: Vec<f64>,
    max_points: Vec<Option<usize>>,
}

impl SurrogateSchedule {
    pub fn single(model: Box<dyn Surrogate>) -> Self {
        Self {
            models: vec![model],
            prob: vec![1.0],
            max_points: vec![None],
        }
    }

    /// `prob = None` assigns uniform weights; `max_points = None` means no caps.
    pub fn new(
        models: Vec<Box<dyn Surrogate>>,
        prob: Option<Vec<f64>>,
        max_points: Option<Vec<Option<usize>>>,
    ) -> Result<Self, SurrogateError> {
        let k = models.len();
        if k == 0 {
            return Err(SurrogateError::InvalidSchedule("no models".into()));
        }
        let prob = prob.unwrap_or_else(|| vec![1.0 / k as f64; k]);
        if prob.len() != k {
            return Err(SurrogateError::InvalidSchedule(format!(
                "{} probabilities for {k} models",
                prob.len()
            )));
        }
        if prob.iter().any(|p| !(*p >= 0.0)) || (prob.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(SurrogateError::InvalidSchedule(
                "probabilities must be non-negative and sum to 1".into(),
            ));
        }
        let max_points = max_points.unwrap_or_else(|| vec![None; k]);
        if max_points.len() != k {
            return Err(SurrogateError::InvalidSchedule(format!(
                "{} point caps for {k} models",
                max_points.len()
            )));
        }
        Ok(Self {
            models,
            prob,
            max_points,
        })
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn prob(&self) -> &[f64] {
        &self.prob
    }

    pub fn max_points(&self) -> &[Option<usize>] {
        &self.max_points
    }

    pub fn model(&self, i: usize) -> &dyn Surrogate {
        self.models[i].as_ref()
    }

    pub fn model_mut(&mut self, i: usize) -> &mut dyn Surrogate {
        self.models[i].as_mut()
    }

    pub fn all_provide_std(&self) -> bool {
        self.models.iter().all(|m| m.provides_std())
    }

    /// Draws a model index according to `prob` and returns it with its cap.
    pub fn pick<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, Option<usize>) {
        if self.models.len() == 1 {
            return (0, self.max_points[0]);
        }
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, p) in self.prob.iter().enumerate() {
            acc += p;
            if u < acc {
                return (i, self.max_points[i]);
            }
        }
        let last = self.prob.iter().rposition(|p| *p > 0.0).unwrap_or(0);
        (last, self.max_points[last])
    }
}

impl Default for SurrogateSchedule {
    fn default() -> Self {
        Self::single(Box::new(Kriging::new(KrigingConfig::default())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn kriging() -> Box<dyn Surrogate> {
        Box::new(Kriging::new(KrigingConfig::default()))
    }

    #[test]
    fn single_model_always_zero() {
        let s = SurrogateSchedule::single(kriging());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            assert_eq!(s.pick(&mut rng), (0, None));
        }
    }

    #[test]
    fn weighted_pick_frequencies() {
        let s = SurrogateSchedule::new(
            vec![kriging(), kriging()],
            Some(vec![0.7, 0.3]),
            Some(vec![None, Some(50)]),
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 100_000;
        let mut counts = [0usize; 2];
        for _ in 0..n {
            let (i, cap) = s.pick(&mut rng);
            counts[i] += 1;
            assert_eq!(cap, if i == 1 { Some(50) } else { None });
        }
        assert!((counts[0] as f64 / n as f64 - 0.7).abs() < 0.01);
        assert!((counts[1] as f64 / n as f64 - 0.3).abs() < 0.01);
    }

    #[test]
    fn omitted_prob_is_uniform() {
        let s = SurrogateSchedule::new(vec![kriging(), kriging(), kriging()], None, None).unwrap();
        assert!(s.prob().iter().all(|p| (p - 1.0 / 3.0).abs() < 1e-15));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut counts = [0usize; 3];
        for _ in 0..30_000 {
            counts[s.pick(&mut rng).0] += 1;
        }
        assert!(counts.iter().all(|&c| (c as f64 / 30_000.0 - 1.0 / 3.0).abs() < 0.015));
    }

    #[test]
    fn invalid_schedules() {
        assert!(SurrogateSchedule::new(vec![], None, None).is_err());
        assert!(SurrogateSchedule::new(vec![kriging()], Some(vec![0.5]), None).is_err());
        assert!(SurrogateSchedule::new(vec![kriging(), kriging()], Some(vec![1.2, -0.2]), None).is_err());
        assert!(SurrogateSchedule::new(vec![kriging()], None, Some(vec![None, None])).is_err());
    }
}
