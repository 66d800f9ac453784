use std::f64::consts::PI;

use ndarray::{Array2, ArrayView1};

fn map_rows(x: &Array2<f64>, f: impl Fn(ArrayView1<f64>) -> f64) -> Vec<f64> {
    x.rows().into_iter().map(f).collect()
}

pub fn sphere(x: &Array2<f64>) -> Vec<f64> {
    map_rows(x, |r| r.iter().map(|v| v * v).sum())
}

pub fn rosenbrock(x: &Array2<f64>) -> Vec<f64> {
    map_rows(x, |r| {
        r.windows(2)
            .into_iter()
            .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
            .sum()
    })
}

pub fn ackley(x: &Array2<f64>) -> Vec<f64> {
    const A: f64 = 20.0;
    const B: f64 = 0.2;
    const C: f64 = 2.0 * PI;
    map_rows(x, |r| {
        let d = r.len() as f64;
        let sq = r.iter().map(|v| v * v).sum::<f64>() / d;
        let cs = r.iter().map(|v| (C * v).cos()).sum::<f64>() / d;
        let v = -A * (-B * sq.sqrt()).exp() - cs.exp() + A + std::f64::consts::E;
        // the optimum cancels to a few ulps; snap it to exact zero
        if v.abs() < 1e-14 {
            0.0
        } else {
            v
        }
    })
}

/// Michalewicz with steepness `m` (10 is conventional).
pub fn michalewicz(x: &Array2<f64>, m: f64) -> Vec<f64> {
    map_rows(x, |r| {
        -r.iter()
            .enumerate()
            .map(|(j, &v)| v.sin() * ((j + 1) as f64 * v * v / PI).sin().powf(2.0 * m))
            .sum::<f64>()
    })
}
