//! Rank-correlation sensitivity and importance scores.

use ndarray::Array2;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::ReportError;

const MIN_SAMPLES: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sensitivity {
    pub name: String,
    pub rho: f64,
    pub p_value: f64,
    pub stars: &'static str,
}

/// Ranks starting at 1; tied values share the average of their ranks.
pub fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    (sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0)
}

pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    pearson(&average_ranks(a), &average_ranks(b))
}

/// Two-sided p-value of `rho` from the t-approximation with `n - 2` degrees
/// of freedom.
pub fn spearman_p_value(rho: f64, n: usize) -> f64 {
    let df = (n - 2) as f64;
    if rho.abs() >= 1.0 {
        return 0.0;
    }
    let t = rho * (df / (1.0 - rho * rho)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0)
}

pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

fn check(x: &Array2<f64>, y: &[f64], names: &[String]) -> Result<(), ReportError> {
    if x.nrows() != y.len() || x.ncols() != names.len() {
        return Err(ReportError::LengthMismatch(format!(
            "{}x{} history, {} values, {} names",
            x.nrows(),
            x.ncols(),
            y.len(),
            names.len()
        )));
    }
    if y.len() < MIN_SAMPLES {
        return Err(ReportError::TooFewSamples {
            needed: MIN_SAMPLES,
            got: y.len(),
        });
    }
    Ok(())
}

/// Spearman correlation of each column of `x` with `y`.
pub fn sensitivity_spearman(x: &Array2<f64>, y: &[f64], names: &[String]) -> Result<Vec<Sensitivity>, ReportError> {
    check(x, y, names)?;
    Ok(x.columns()
        .into_iter()
        .zip(names)
        .map(|(col, name)| {
            let rho = spearman(&col.to_vec(), y);
            let p_value = spearman_p_value(rho, y.len());
            Sensitivity {
                name: name.clone(),
                rho,
                p_value,
                stars: significance_stars(p_value),
            }
        })
        .collect())
}

/// `100 * |rho_i| / max_j |rho_j|`, all zeros when no variable correlates.
pub fn get_importance(x: &Array2<f64>, y: &[f64], names: &[String]) -> Result<Vec<f64>, ReportError> {
    let rho: Vec<f64> = sensitivity_spearman(x, y, names)?.iter().map(|s| s.rho.abs()).collect();
    let max = rho.iter().cloned().fold(0.0, f64::max);
    Ok(if max == 0.0 {
        vec![0.0; rho.len()]
    } else {
        rho.iter().map(|r| 100.0 * r / max).collect()
    })
}
