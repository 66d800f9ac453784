//! Infill criteria and their optimization over the internal search box.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};
use thiserror::Error;

use crate::de::{differential_evolution, nelder_mead, DeSettings};
use crate::space::{SearchSpace, VarType};
use crate::surrogate::{Predictor, SurrogateError};

/// Euclidean distance (internal scale) under which two points count as equal.
pub const DUPLICATE_TOL: f64 = 1e-8;

#[derive(Debug, Error, PartialEq)]
pub enum AcquisitionError {
    #[error("{0:?} needs a surrogate that predicts a standard deviation")]
    StdRequired(AcquisitionKind),
    #[error(transparent)]
    Surrogate(#[from] SurrogateError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum AcquisitionKind {
    #[default]
    #[serde(rename = "y")]
    PredictedValue,
    #[serde(rename = "ei")]
    ExpectedImprovement,
    #[serde(rename = "pi")]
    ProbabilityOfImprovement,
}

impl AcquisitionKind {
    pub fn needs_std(self) -> bool {
        !matches!(self, AcquisitionKind::PredictedValue)
    }
}

impl std::str::FromStr for AcquisitionKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "y" => Ok(Self::PredictedValue),
            "ei" => Ok(Self::ExpectedImprovement),
            "pi" => Ok(Self::ProbabilityOfImprovement),
            other => Err(format!("unknown acquisition `{other}` (expected y, ei or pi)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcquisitionOptimizer {
    #[default]
    #[serde(rename = "de")]
    DifferentialEvolution,
    /// Bounded Nelder-Mead started from the best of a random sample.
    LocalSimplex,
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

pub fn expected_improvement(mu: f64, sigma: f64, y_min: f64) -> f64 {
    let diff = y_min - mu;
    if sigma <= 0.0 {
        return diff.max(0.0);
    }
    let z = diff / sigma;
    let n = std_normal();
    (diff * n.cdf(z) + sigma * n.pdf(z)).max(0.0)
}

pub fn probability_of_improvement(mu: f64, sigma: f64, y_min: f64) -> f64 {
    if sigma <= 0.0 {
        return if mu < y_min { 1.0 } else { 0.0 };
    }
    std_normal().cdf((y_min - mu) / sigma)
}

/// Everything a proposal needs to know about the current state.
pub struct AcquisitionContext<'a> {
    pub predictor: &'a dyn Predictor,
    pub y_min: f64,
    pub space: &'a SearchSpace,
    /// Already evaluated (or in-flight) points, internal scale.
    pub evaluated: &'a [Vec<f64>],
    pub seed: u64,
}

impl AcquisitionContext<'_> {
    fn score(&self, kind: AcquisitionKind, x: &[f64]) -> f64 {
        let Ok(p) = self.predictor.predict_point(x) else {
            return f64::INFINITY;
        };
        match kind {
            AcquisitionKind::PredictedValue => p.mean,
            AcquisitionKind::ExpectedImprovement => -expected_improvement(p.mean, p.std.unwrap_or(0.0), self.y_min),
            AcquisitionKind::ProbabilityOfImprovement => {
                -probability_of_improvement(p.mean, p.std.unwrap_or(0.0), self.y_min)
            }
        }
    }
}

pub(crate) fn is_duplicate(x: &[f64], others: &[Vec<f64>]) -> bool {
    others.iter().any(|o| {
        o.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() <= DUPLICATE_TOL
    })
}

/// A uniformly drawn, repaired point that avoids `taken` when possible.
pub(crate) fn random_fallback<R: Rng>(space: &SearchSpace, taken: &[Vec<f64>], rng: &mut R) -> Vec<f64> {
    let bounds = space.internal_bounds();
    let mut x = Vec::new();
    for _ in 0..100 {
        x = bounds.iter().map(|&(lo, hi)| lo + rng.random::<f64>() * (hi - lo)).collect();
        space.repair_internal(&mut x);
        if !is_duplicate(&x, taken) {
            break;
        }
    }
    x
}

/// Proposes `n_infill` new points (rows, internal scale). Discrete dimensions
/// are rounded; points duplicating `ctx.evaluated` or each other, and every
/// point of a flat criterion surface, are replaced by random fallbacks.
pub fn propose(
    ctx: &AcquisitionContext<'_>,
    kind: AcquisitionKind,
    optimizer: AcquisitionOptimizer,
    n_infill: usize,
) -> Result<Array2<f64>, AcquisitionError> {
    if kind.needs_std() && !ctx.predictor.provides_std() {
        return Err(AcquisitionError::StdRequired(kind));
    }
    let d = ctx.space.dims();
    let bounds = ctx.space.internal_bounds();
    let n_infill = n_infill.max(1);
    let objective = |x: &[f64]| ctx.score(kind, x);

    let ranked: Vec<(Vec<f64>, f64)> = match optimizer {
        AcquisitionOptimizer::DifferentialEvolution => {
            let settings = DeSettings::scaled(d, 10, 80, 50, ctx.seed);
            differential_evolution(objective, &bounds, &settings).population
        }
        AcquisitionOptimizer::LocalSimplex => local_search(&objective, &bounds, n_infill, ctx.seed),
    };

    // a converged population can look flat, so probe the whole box as well
    let mut probe_rng = ChaCha8Rng::seed_from_u64(ctx.seed ^ 0x5ca1_ab1e);
    let probes: Vec<f64> = (0..16 * d.max(1))
        .map(|_| {
            let x: Vec<f64> = bounds.iter().map(|&(lo, hi)| lo + probe_rng.random::<f64>() * (hi - lo)).collect();
            objective(&x)
        })
        .collect();
    let (lo, hi) = ranked
        .iter()
        .map(|(_, v)| *v)
        .chain(probes)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let flat = !(hi - lo > 1e-12 * (1.0 + lo.abs()));
    let ranked = if ctx.space.var_type().iter().any(VarType::is_discrete) {
        lattice_candidates(ctx, kind, ranked, n_infill)
    } else {
        ranked
    };

    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut taken: Vec<Vec<f64>> = ctx.evaluated.to_vec();
    let mut chosen: Vec<Vec<f64>> = Vec::with_capacity(n_infill);
    if !flat {
        for (x, _) in &ranked {
            if chosen.len() == n_infill {
                break;
            }
            let mut x = x.clone();
            ctx.space.repair_internal(&mut x);
            if !is_duplicate(&x, &taken) {
                taken.push(x.clone());
                chosen.push(x);
            }
        }
    }
    while chosen.len() < n_infill {
        let x = random_fallback(ctx.space, &taken, &mut rng);
        taken.push(x.clone());
        chosen.push(x);
    }
    Ok(Array2::from_shape_fn((n_infill, d), |(i, j)| chosen[i][j]))
}

/// Re-ranks search results by their criterion value after rounding. The best
/// few also contribute their lattice neighbours (one step along each discrete
/// dimension), so a rounded optimum that was already evaluated is replaced by
/// the next best grid point rather than a far-away population member.
fn lattice_candidates(
    ctx: &AcquisitionContext<'_>,
    kind: AcquisitionKind,
    ranked: Vec<(Vec<f64>, f64)>,
    n_infill: usize,
) -> Vec<(Vec<f64>, f64)> {
    let bounds = ctx.space.internal_bounds();
    let mut points: Vec<Vec<f64>> = Vec::new();
    for (i, (x, _)) in ranked.into_iter().enumerate() {
        let mut x = x;
        ctx.space.repair_internal(&mut x);
        if i < n_infill {
            for (j, t) in ctx.space.var_type().iter().enumerate() {
                if !t.is_discrete() {
                    continue;
                }
                for step in [-1.0, 1.0] {
                    let v = x[j] + step;
                    if v >= bounds[j].0 && v <= bounds[j].1 {
                        let mut n = x.clone();
                        n[j] = v;
                        points.push(n);
                    }
                }
            }
        }
        points.push(x);
    }
    let mut scored: Vec<(Vec<f64>, f64)> = points
        .into_iter()
        .map(|x| {
            let v = ctx.score(kind, &x);
            (x, v)
        })
        .collect();
    scored.sort_by(|a, b| a.1.total_cmp(&b.1));
    scored
}

fn local_search<F: Fn(&[f64]) -> f64>(
    f: &F,
    bounds: &[(f64, f64)],
    n_starts: usize,
    seed: u64,
) -> Vec<(Vec<f64>, f64)> {
    let d = bounds.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sample: Vec<(Vec<f64>, f64)> = (0..(20 * d).max(20))
        .map(|_| {
            let x: Vec<f64> = bounds.iter().map(|&(lo, hi)| lo + rng.random::<f64>() * (hi - lo)).collect();
            let v = f(&x);
            (x, v)
        })
        .collect();
    sample.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut out: Vec<(Vec<f64>, f64)> = sample
        .iter()
        .take(n_starts)
        .map(|(x0, _)| nelder_mead(f, x0, bounds, 200 * d))
        .collect();
    out.extend(sample.into_iter().skip(n_starts));
    out.sort_by(|a, b| a.1.total_cmp(&b.1));
    out
}
