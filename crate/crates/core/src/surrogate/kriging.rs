use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{Prediction, Predictor, Surrogate, SurrogateError};
use crate::de::{differential_evolution, DeSettings};

/// How the nugget enters fitting and prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KrigingMethod {
    /// Generalized least squares with a fixed nugget on the diagonal.
    #[default]
    Regression,
    /// Exact interpolation, no nugget.
    Interpolation,
    /// Regression mean with the error estimate of the noise-free correlation.
    Reinterpolation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KrigingConfig {
    pub method: KrigingMethod,
    /// Nugget added to the correlation diagonal (ignored by `Interpolation`).
    pub noise: f64,
    /// log10 lower bound for each theta.
    pub min_theta: f64,
    /// log10 upper bound for each theta.
    pub max_theta: f64,
    pub seed: u64,
}

impl Default for KrigingConfig {
    fn default() -> Self {
        Self {
            method: KrigingMethod::Regression,
            noise: 1e-6,
            min_theta: -3.0,
            max_theta: 2.0,
            seed: 0,
        }
    }
}

const SIGMA2_FLOOR: f64 = 1e-12;
const JITTER_START: f64 = 1e-10;
const JITTER_MAX: f64 = 1e-4;
const LIKELIHOOD_PENALTY: f64 = -1e10;

/// Squared coordinate differences for every unordered pair, pair-major.
struct PairDiffs {
    n: usize,
    d: usize,
    diffs: Vec<f64>,
}

impl PairDiffs {
    fn new(x: &[Vec<f64>]) -> Self {
        let n = x.len();
        let d = x.first().map_or(0, Vec::len);
        let mut diffs = Vec::with_capacity(n * (n - 1) / 2 * d);
        for i in 0..n {
            for k in (i + 1)..n {
                diffs.extend(x[i].iter().zip(&x[k]).map(|(a, b)| (a - b) * (a - b)));
            }
        }
        Self { n, d, diffs }
    }

    fn correlation(&self, theta: &[f64], diag: f64) -> DMatrix<f64> {
        let n = self.n;
        let mut psi = DMatrix::from_element(n, n, 0.0);
        let mut p = 0;
        for i in 0..n {
            psi[(i, i)] = 1.0 + diag;
            for k in (i + 1)..n {
                let s: f64 = self.diffs[p * self.d..(p + 1) * self.d]
                    .iter()
                    .zip(theta)
                    .map(|(dd, t)| dd * t)
                    .sum();
                let r = (-s).exp();
                psi[(i, k)] = r;
                psi[(k, i)] = r;
                p += 1;
            }
        }
        psi
    }
}

/// Cholesky with escalating diagonal jitter; returns the factor and the
/// jitter that made it succeed.
fn factor_with_jitter(psi: &DMatrix<f64>) -> Result<(Cholesky<f64, Dyn>, f64), SurrogateError> {
    let mut jitter = JITTER_START;
    loop {
        let mut m = psi.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += jitter;
        }
        if let Some(c) = Cholesky::new(m) {
            return Ok((c, jitter));
        }
        if jitter >= JITTER_MAX {
            return Err(SurrogateError::SingularCorrelation { jitter });
        }
        jitter *= 10.0;
    }
}

fn nugget(method: KrigingMethod, noise: f64) -> f64 {
    match method {
        KrigingMethod::Interpolation => 0.0,
        KrigingMethod::Regression | KrigingMethod::Reinterpolation => noise.max(0.0),
    }
}

struct Gls {
    chol: Cholesky<f64, Dyn>,
    mu: f64,
    sigma2: f64,
    ln_det: f64,
    ri_resid: DVector<f64>,
    ri_one: DVector<f64>,
    one_ri_one: f64,
}

fn gls(psi: &DMatrix<f64>, y: &DVector<f64>) -> Result<Gls, SurrogateError> {
    let n = y.len();
    let (chol, _) = factor_with_jitter(psi)?;
    let ln_det = 2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let one = DVector::from_element(n, 1.0);
    let ri_one = chol.solve(&one);
    let ri_y = chol.solve(y);
    let one_ri_one = ri_one.sum();
    let mu = ri_y.sum() / one_ri_one;
    let resid = y.add_scalar(-mu);
    let ri_resid = chol.solve(&resid);
    let sigma2 = (resid.dot(&ri_resid) / n as f64).max(0.0);
    Ok(Gls {
        chol,
        mu,
        sigma2,
        ln_det,
        ri_resid,
        ri_one,
        one_ri_one,
    })
}

fn ln_likelihood(n: usize, g: &Gls) -> f64 {
    -(n as f64 / 2.0) * g.sigma2.max(SIGMA2_FLOOR).ln() - 0.5 * g.ln_det
}

/// Concentrated log-likelihood of the Gaussian-kernel Kriging model with
/// `theta = 10^theta_log10`. Returns a large negative penalty when the
/// correlation matrix cannot be factored.
pub fn concentrated_log_likelihood(
    theta_log10: &[f64],
    x: &Array2<f64>,
    y: &[f64],
    method: KrigingMethod,
    noise: f64,
) -> f64 {
    let rows: Vec<Vec<f64>> = x.rows().into_iter().map(|r| r.to_vec()).collect();
    let pairs = PairDiffs::new(&rows);
    let theta: Vec<f64> = theta_log10.iter().map(|t| 10f64.powf(*t)).collect();
    likelihood_at(&pairs, &theta, &DVector::from_column_slice(y), nugget(method, noise))
}

fn likelihood_at(pairs: &PairDiffs, theta: &[f64], y: &DVector<f64>, diag: f64) -> f64 {
    match gls(&pairs.correlation(theta, diag), y) {
        Ok(g) if g.ln_det.is_finite() => ln_likelihood(pairs.n, &g),
        _ => LIKELIHOOD_PENALTY,
    }
}

#[derive(Debug, Clone)]
struct ReinterpError {
    chol: Cholesky<f64, Dyn>,
    ri_one: DVector<f64>,
    one_ri_one: f64,
    sigma2: f64,
}

#[derive(Debug, Clone)]
struct Fitted {
    x: Vec<Vec<f64>>,
    theta_log10: Vec<f64>,
    theta: Vec<f64>,
    mu: f64,
    sigma2: f64,
    chol: Cholesky<f64, Dyn>,
    ri_resid: DVector<f64>,
    ri_one: DVector<f64>,
    one_ri_one: f64,
    ln_likelihood: f64,
    reinterp: Option<ReinterpError>,
}

/// Gaussian-kernel Kriging with per-dimension weights found by maximizing the
/// concentrated log-likelihood with differential evolution.
#[derive(Debug, Clone)]
pub struct Kriging {
    config: KrigingConfig,
    fitted: Option<Fitted>,
}

impl Kriging {
    pub fn new(config: KrigingConfig) -> Self {
        Self { config, fitted: None }
    }

    pub fn with_method(method: KrigingMethod) -> Self {
        Self::new(KrigingConfig {
            method,
            ..KrigingConfig::default()
        })
    }

    pub fn config(&self) -> &KrigingConfig {
        &self.config
    }

    pub fn is_fitted(&self) -> bool {
        self.fitted.is_some()
    }

    /// Fitted `log10(theta)`.
    pub fn theta_log10(&self) -> Option<&[f64]> {
        self.fitted.as_ref().map(|f| f.theta_log10.as_slice())
    }

    /// GLS mean estimate.
    pub fn mu(&self) -> Option<f64> {
        self.fitted.as_ref().map(|f| f.mu)
    }

    /// Process variance estimate.
    pub fn sigma2(&self) -> Option<f64> {
        self.fitted.as_ref().map(|f| f.sigma2)
    }

    /// `1' Psi^-1 1` of the fitted correlation matrix.
    pub fn one_ri_one(&self) -> Option<f64> {
        self.fitted.as_ref().map(|f| f.one_ri_one)
    }

    pub fn ln_likelihood(&self) -> Option<f64> {
        self.fitted.as_ref().map(|f| f.ln_likelihood)
    }

    /// Fits with `theta` fixed instead of searched.
    pub fn fit_fixed(&mut self, x: &Array2<f64>, y: &[f64], theta_log10: &[f64]) -> Result<(), SurrogateError> {
        let (rows, yv) = self.prepare(x, y)?;
        if theta_log10.len() != x.ncols() {
            return Err(SurrogateError::DimensionMismatch {
                got: theta_log10.len(),
                expected: x.ncols(),
            });
        }
        self.finish_fit(rows, yv, theta_log10.to_vec())
    }

    fn prepare(&self, x: &Array2<f64>, y: &[f64]) -> Result<(Vec<Vec<f64>>, Vec<f64>), SurrogateError> {
        if x.nrows() != y.len() {
            return Err(SurrogateError::ShapeMismatch {
                x_rows: x.nrows(),
                y_len: y.len(),
            });
        }
        if x.iter().chain(y).any(|v| !v.is_finite()) {
            return Err(SurrogateError::NonFinite);
        }
        let mut rows: Vec<Vec<f64>> = x.rows().into_iter().map(|r| r.to_vec()).collect();
        let mut yv = y.to_vec();
        if self.config.method == KrigingMethod::Interpolation {
            (rows, yv) = dedup_mean(rows, yv);
        }
        if rows.len() < 2 {
            return Err(SurrogateError::TooFewPoints {
                needed: 2,
                got: rows.len(),
            });
        }
        Ok((rows, yv))
    }

    fn finish_fit(&mut self, x: Vec<Vec<f64>>, y: Vec<f64>, theta_log10: Vec<f64>) -> Result<(), SurrogateError> {
        let n = x.len();
        let pairs = PairDiffs::new(&x);
        let theta: Vec<f64> = theta_log10.iter().map(|t| 10f64.powf(*t)).collect();
        let yv = DVector::from_vec(y);
        let diag = nugget(self.config.method, self.config.noise);
        let g = gls(&pairs.correlation(&theta, diag), &yv)?;
        let ln_l = ln_likelihood(n, &g);

        let reinterp = if self.config.method == KrigingMethod::Reinterpolation {
            let psi0 = pairs.correlation(&theta, 0.0);
            let resid = yv.add_scalar(-g.mu);
            // (Psi + lambda I)^-1 Psi (Psi + lambda I)^-1 applied to the residual
            let ri_resid = g.chol.solve(&resid);
            let sigma2 = ((&psi0 * &ri_resid).dot(&ri_resid) / n as f64).max(0.0);
            let (chol, _) = factor_with_jitter(&psi0)?;
            let ri_one = chol.solve(&DVector::from_element(n, 1.0));
            let one_ri_one = ri_one.sum();
            Some(ReinterpError {
                chol,
                ri_one,
                one_ri_one,
                sigma2,
            })
        } else {
            None
        };

        self.fitted = Some(Fitted {
            x,
            theta_log10,
            theta,
            mu: g.mu,
            sigma2: g.sigma2,
            chol: g.chol,
            ri_resid: g.ri_resid,
            ri_one: g.ri_one,
            one_ri_one: g.one_ri_one,
            ln_likelihood: ln_l,
            reinterp,
        });
        Ok(())
    }
}

fn dedup_mean(rows: Vec<Vec<f64>>, y: Vec<f64>) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut out_x: Vec<Vec<f64>> = Vec::with_capacity(rows.len());
    let mut sums: Vec<(f64, usize)> = Vec::with_capacity(rows.len());
    for (r, v) in rows.into_iter().zip(y) {
        match out_x.iter().position(|q| *q == r) {
            Some(i) => {
                sums[i].0 += v;
                sums[i].1 += 1;
            }
            None => {
                out_x.push(r);
                sums.push((v, 1));
            }
        }
    }
    let ys = sums.into_iter().map(|(s, c)| s / c as f64).collect();
    (out_x, ys)
}

impl Predictor for Kriging {
    fn predict_point(&self, x: &[f64]) -> Result<Prediction, SurrogateError> {
        let f = self.fitted.as_ref().ok_or(SurrogateError::NotFitted)?;
        let d = f.theta.len();
        if x.len() != d {
            return Err(SurrogateError::DimensionMismatch {
                got: x.len(),
                expected: d,
            });
        }
        let psi = DVector::from_iterator(
            f.x.len(),
            f.x.iter().map(|xi| {
                let s: f64 = xi
                    .iter()
                    .zip(x)
                    .zip(&f.theta)
                    .map(|((a, b), t)| t * (a - b) * (a - b))
                    .sum();
                (-s).exp()
            }),
        );
        let mean = f.mu + psi.dot(&f.ri_resid);
        let var = match &f.reinterp {
            None => error_variance(f.sigma2, &psi, &f.chol.solve(&psi), &f.ri_one, f.one_ri_one),
            Some(r) => error_variance(r.sigma2, &psi, &r.chol.solve(&psi), &r.ri_one, r.one_ri_one),
        };
        Ok(Prediction {
            mean,
            std: Some(var.max(0.0).sqrt()),
        })
    }

    fn provides_std(&self) -> bool {
        true
    }
}

fn error_variance(sigma2: f64, psi: &DVector<f64>, ri_psi: &DVector<f64>, ri_one: &DVector<f64>, one_ri_one: f64) -> f64 {
    let a = 1.0 - ri_one.dot(psi);
    let v = sigma2 * (1.0 - psi.dot(ri_psi) + a * a / one_ri_one);
    if v.is_nan() {
        0.0
    } else {
        v
    }
}

impl Surrogate for Kriging {
    fn fit(&mut self, x: &Array2<f64>, y: &[f64]) -> Result<(), SurrogateError> {
        let (rows, yv) = self.prepare(x, y)?;
        let d = x.ncols();
        let pairs = PairDiffs::new(&rows);
        let y_vec = DVector::from_column_slice(&yv);
        let diag = nugget(self.config.method, self.config.noise);
        let (lo, hi) = (self.config.min_theta, self.config.max_theta);
        let settings = DeSettings::scaled(d, 15, 100, 100, self.config.seed);
        let mut theta = vec![0.0; d];
        let best = differential_evolution(
            |t| {
                for (dst, v) in theta.iter_mut().zip(t) {
                    *dst = 10f64.powf(*v);
                }
                -likelihood_at(&pairs, &theta, &y_vec, diag)
            },
            &vec![(lo, hi); d],
            &settings,
        );
        self.finish_fit(rows, yv, best.x)
    }

    fn name(&self) -> &str {
        "kriging"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn quad_data() -> (Array2<f64>, Vec<f64>) {
        (array![[0.0], [1.0], [3.0], [4.0]], vec![0.0, 1.0, 9.0, 16.0])
    }

    /// Independent, deliberately naive likelihood: explicit Gauss-Jordan
    /// inverse and LU determinant on plain Vec<Vec<f64>>.
    fn naive_likelihood(theta_log10: f64, xs: &[f64], ys: &[f64], lambda: f64) -> f64 {
        let n = xs.len();
        let theta = 10f64.powf(theta_log10);
        let mut a: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|k| {
                        let r = (-theta * (xs[i] - xs[k]).powi(2)).exp();
                        if i == k {
                            r + lambda + JITTER_START
                        } else {
                            r
                        }
                    })
                    .collect()
            })
            .collect();
        let mut inv: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|k| (i == k) as u8 as f64).collect()).collect();
        let mut det = 1.0;
        for c in 0..n {
            let p = (c..n).max_by(|&i, &k| a[i][c].abs().total_cmp(&a[k][c].abs())).unwrap();
            if p != c {
                a.swap(p, c);
                inv.swap(p, c);
                det = -det;
            }
            let piv = a[c][c];
            det *= piv;
            for k in 0..n {
                a[c][k] /= piv;
                inv[c][k] /= piv;
            }
            for r in 0..n {
                if r != c {
                    let f = a[r][c];
                    for k in 0..n {
                        a[r][k] -= f * a[c][k];
                        inv[r][k] -= f * inv[c][k];
                    }
                }
            }
        }
        let q = |u: &[f64], v: &[f64]| -> f64 {
            (0..n).map(|i| (0..n).map(|k| u[i] * inv[i][k] * v[k]).sum::<f64>()).sum()
        };
        let one = vec![1.0; n];
        let mu = q(&one, ys) / q(&one, &one);
        let r: Vec<f64> = ys.iter().map(|v| v - mu).collect();
        let s2 = (q(&r, &r) / n as f64).max(SIGMA2_FLOOR);
        -(n as f64 / 2.0) * s2.ln() - 0.5 * det.ln()
    }

    #[test]
    fn likelihood_matches_naive_oracle_on_grid() {
        let (x, y) = quad_data();
        let xs = [0.0, 1.0, 3.0, 4.0];
        let grid: Vec<f64> = (0..=50).map(|i| -3.0 + 5.0 * i as f64 / 50.0).collect();
        let mut best = (f64::NEG_INFINITY, 0.0);
        let mut best_oracle = (f64::NEG_INFINITY, 0.0);
        for &t in &grid {
            let l = concentrated_log_likelihood(&[t], &x, &y, KrigingMethod::Interpolation, 0.0);
            let o = naive_likelihood(t, &xs, &y, 0.0);
            assert!((l - o).abs() < 1e-6 * (1.0 + o.abs()), "theta {t}: {l} vs {o}");
            if l > best.0 {
                best = (l, t);
            }
            if o > best_oracle.0 {
                best_oracle = (o, t);
            }
        }
        assert_eq!(best.1, best_oracle.1);
        let low = concentrated_log_likelihood(&[-2.0], &x, &y, KrigingMethod::Interpolation, 0.0);
        let high = concentrated_log_likelihood(&[2.0], &x, &y, KrigingMethod::Interpolation, 0.0);
        assert!((low - high).abs() > 1e-3);
    }

    #[test]
    fn nugget_raises_determinant() {
        // ln|Psi + lambda I| > ln|Psi|, so the -1/2 ln|Psi| term strictly drops.
        let xs = [0.0, 1.0, 3.0, 4.0];
        let rows: Vec<Vec<f64>> = xs.iter().map(|v| vec![*v]).collect();
        let pairs = PairDiffs::new(&rows);
        let y = DVector::from_vec(vec![0.0, 1.0, 9.0, 16.0]);
        for t in [-2.0, -1.0, 0.0] {
            let theta = [10f64.powf(t)];
            let g0 = gls(&pairs.correlation(&theta, 0.0), &y).unwrap();
            let g1 = gls(&pairs.correlation(&theta, 1e-3), &y).unwrap();
            assert!(-0.5 * g1.ln_det < -0.5 * g0.ln_det);
        }
    }

    #[test]
    fn degenerate_variance_is_finite() {
        let x = array![[0.0], [1.0]];
        let l = concentrated_log_likelihood(&[0.0], &x, &[2.0, 2.0], KrigingMethod::Interpolation, 0.0);
        assert!(l.is_finite());
    }

    #[test]
    fn interpolation_reproduces_training_points() {
        let (x, y) = quad_data();
        let mut m = Kriging::with_method(KrigingMethod::Interpolation);
        m.fit(&x, &y).unwrap();
        let (mean, std) = m.predict(&x).unwrap();
        for (p, t) in mean.iter().zip(&y) {
            assert!((p - t).abs() < 1e-6, "{p} vs {t}");
        }
        // the variance is a difference of nearly equal terms, so compare it
        // (not its square root) against the process variance
        let s2 = m.sigma2().unwrap();
        assert!(std.unwrap().iter().all(|s| s * s <= 1e-6 * s2));
    }

    #[test]
    fn constant_target() {
        let x = array![[0.0], [1.0], [2.5], [4.0]];
        let y = vec![3.0; 4];
        let mut m = Kriging::with_method(KrigingMethod::Interpolation);
        m.fit(&x, &y).unwrap();
        for q in [0.0, 0.7, 3.3, 10.0] {
            let p = m.predict_point(&[q]).unwrap();
            assert!((p.mean - 3.0).abs() < 1e-9);
        }
        assert!(m.predict_point(&[1.0]).unwrap().std.unwrap() < 1e-6);
    }

    #[test]
    fn far_field_limit() {
        let (x, y) = quad_data();
        let mut m = Kriging::with_method(KrigingMethod::Interpolation);
        m.fit(&x, &y).unwrap();
        let p = m.predict_point(&[1e6]).unwrap();
        let s2 = m.sigma2().unwrap();
        let expected = s2 * (1.0 + 1.0 / m.one_ri_one().unwrap());
        assert!((p.mean - m.mu().unwrap()).abs() < 1e-6);
        assert!((p.std.unwrap().powi(2) - expected).abs() < 1e-6 * (1.0 + expected));
    }

    #[test]
    fn symmetric_data_symmetric_prediction() {
        let x = array![[-2.0], [-1.0], [0.0], [1.0], [2.0]];
        let y = vec![4.0, 1.0, 0.0, 1.0, 4.0];
        for method in [KrigingMethod::Interpolation, KrigingMethod::Regression] {
            let mut m = Kriging::with_method(method);
            m.fit(&x, &y).unwrap();
            for a in [0.3, 1.5, 2.7] {
                let p = m.predict_point(&[a]).unwrap();
                let q = m.predict_point(&[-a]).unwrap();
                // small fitted theta makes the correlation matrix ill-conditioned
                assert!((p.mean - q.mean).abs() < 1e-7, "{method:?} {a} {p:?} {q:?}");
                assert!((p.std.unwrap() - q.std.unwrap()).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn loo_beats_constant_predictor_on_sphere() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 15;
        let pts: Vec<[f64; 2]> = (0..n)
            .map(|_| [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)])
            .collect();
        let f = |p: &[f64; 2]| p[0] * p[0] + p[1] * p[1];
        let mut krig_err = 0.0;
        let mut const_err = 0.0;
        for hold in 0..n {
            let train: Vec<&[f64; 2]> = pts.iter().enumerate().filter(|(i, _)| *i != hold).map(|(_, p)| p).collect();
            let x = Array2::from_shape_fn((n - 1, 2), |(i, j)| train[i][j]);
            let y: Vec<f64> = train.iter().map(|p| f(p)).collect();
            let mut m = Kriging::with_method(KrigingMethod::Interpolation);
            m.fit(&x, &y).unwrap();
            let truth = f(&pts[hold]);
            krig_err += (m.predict_point(&pts[hold]).unwrap().mean - truth).powi(2);
            const_err += (y.iter().sum::<f64>() / y.len() as f64 - truth).powi(2);
        }
        assert!(krig_err < const_err, "{krig_err} vs {const_err}");
    }

    #[test]
    fn fit_is_deterministic() {
        let (x, y) = quad_data();
        let mut a = Kriging::new(KrigingConfig::default());
        let mut b = Kriging::new(KrigingConfig::default());
        a.fit(&x, &y).unwrap();
        b.fit(&x, &y).unwrap();
        assert_eq!(a.theta_log10(), b.theta_log10());
    }

    #[test]
    fn residual_grows_with_nugget() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = Array2::from_shape_fn((12, 2), |_| rng.random_range(-1.0f64..1.0));
        let y: Vec<f64> = x.rows().into_iter().map(|r| (3.0 * r[0]).sin() + r[1] * r[1]).collect();
        let theta = [0.5, 0.5];
        let mut last = -1.0;
        for (method, noise) in [
            (KrigingMethod::Interpolation, 0.0),
            (KrigingMethod::Regression, 1e-6),
            (KrigingMethod::Regression, 1e-3),
            (KrigingMethod::Regression, 1e-1),
        ] {
            let mut m = Kriging::new(KrigingConfig {
                method,
                noise,
                ..KrigingConfig::default()
            });
            m.fit_fixed(&x, &y, &theta).unwrap();
            let (p, _) = m.predict(&x).unwrap();
            let r: f64 = p.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            assert!(r >= last, "residual {r} after {last}");
            last = r;
        }
    }

    #[test]
    fn reinterpolation_matches_interpolation_in_zero_noise_limit() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = Array2::from_shape_fn((10, 2), |_| rng.random_range(0.0..1.0));
        let y: Vec<f64> = x.rows().into_iter().map(|r| r[0] * 2.0 - r[1] * r[1]).collect();
        let theta = [0.3, 0.2];
        let mut interp = Kriging::with_method(KrigingMethod::Interpolation);
        interp.fit_fixed(&x, &y, &theta).unwrap();
        let mut reint = Kriging::new(KrigingConfig {
            method: KrigingMethod::Reinterpolation,
            noise: 1e-12,
            ..KrigingConfig::default()
        });
        reint.fit_fixed(&x, &y, &theta).unwrap();
        for q in [[0.5, 0.5], [0.1, 0.9], [2.0, -1.0]] {
            let a = interp.predict_point(&q).unwrap();
            let b = reint.predict_point(&q).unwrap();
            assert!((a.mean - b.mean).abs() < 1e-4 * (1.0 + a.mean.abs()));
            let (sa, sb) = (a.std.unwrap(), b.std.unwrap());
            assert!((sa - sb).abs() < 1e-3 * (1.0 + sa), "{sa} vs {sb}");
        }
        // with real noise the reinterpolated error vanishes at training points
        let mut noisy = Kriging::new(KrigingConfig {
            method: KrigingMethod::Reinterpolation,
            noise: 1e-2,
            ..KrigingConfig::default()
        });
        noisy.fit_fixed(&x, &y, &theta).unwrap();
        let at = noisy.predict_point(x.row(0).as_slice().unwrap()).unwrap();
        assert!(at.std.unwrap() < 1e-3);
    }

    #[test]
    fn duplicate_rows_are_averaged_for_interpolation() {
        let x = array![[0.0], [1.0], [1.0], [2.0]];
        let y = vec![0.0, 1.0, 3.0, 4.0];
        let mut m = Kriging::with_method(KrigingMethod::Interpolation);
        m.fit(&x, &y).unwrap();
        assert!((m.predict_point(&[1.0]).unwrap().mean - 2.0).abs() < 1e-6);
    }

    #[test]
    fn errors() {
        let mut m = Kriging::new(KrigingConfig::default());
        assert_eq!(m.predict_point(&[0.0]), Err(SurrogateError::NotFitted));
        assert!(matches!(m.fit(&array![[0.0]], &[1.0]), Err(SurrogateError::TooFewPoints { .. })));
        assert!(matches!(m.fit(&array![[0.0], [1.0]], &[1.0]), Err(SurrogateError::ShapeMismatch { .. })));
        assert_eq!(m.fit(&array![[0.0], [f64::NAN]], &[1.0, 2.0]), Err(SurrogateError::NonFinite));
        let (x, y) = quad_data();
        m.fit(&x, &y).unwrap();
        assert!(matches!(
            m.predict_point(&[0.0, 1.0]),
            Err(SurrogateError::DimensionMismatch { .. })
        ));
    }
}
