//! Two-objective test problems. Every function returns an `(n, 2)` matrix.

use std::f64::consts::PI;

use ndarray::{Array2, ArrayView1};

fn map_rows2(x: &Array2<f64>, f: impl Fn(ArrayView1<f64>) -> [f64; 2]) -> Array2<f64> {
    let mut out = Array2::zeros((x.nrows(), 2));
    for (i, r) in x.rows().into_iter().enumerate() {
        let [a, b] = f(r);
        out[[i, 0]] = a;
        out[[i, 1]] = b;
    }
    out
}

fn zdt_g_linear(r: ArrayView1<f64>) -> f64 {
    let n = r.len();
    if n < 2 {
        return 1.0;
    }
    1.0 + 9.0 * r.iter().skip(1).sum::<f64>() / (n - 1) as f64
}

pub fn zdt1(x: &Array2<f64>) -> Array2<f64> {
    map_rows2(x, |r| {
        let f1 = r[0];
        let g = zdt_g_linear(r);
        [f1, g * (1.0 - (f1 / g).sqrt())]
    })
}

pub fn zdt2(x: &Array2<f64>) -> Array2<f64> {
    map_rows2(x, |r| {
        let f1 = r[0];
        let g = zdt_g_linear(r);
        [f1, g * (1.0 - (f1 / g).powi(2))]
    })
}

pub fn zdt3(x: &Array2<f64>) -> Array2<f64> {
    map_rows2(x, |r| {
        let f1 = r[0];
        let g = zdt_g_linear(r);
        [f1, g * (1.0 - (f1 / g).sqrt() - f1 / g * (10.0 * PI * f1).sin())]
    })
}

pub fn zdt4(x: &Array2<f64>) -> Array2<f64> {
    map_rows2(x, |r| {
        let f1 = r[0];
        let n = r.len();
        let g = 1.0
            + 10.0 * (n - 1) as f64
            + r.iter().skip(1).map(|v| v * v - 10.0 * (4.0 * PI * v).cos()).sum::<f64>();
        [f1, g * (1.0 - (f1 / g).sqrt())]
    })
}

/// Bit layout of ZDT5: one 30-bit substring followed by ten 5-bit substrings.
pub const ZDT5_BITS: [usize; 11] = [30, 5, 5, 5, 5, 5, 5, 5, 5, 5, 5];
pub const ZDT5_DIMS: usize = 80;

/// ZDT5 on real inputs in [0, 1], each read as a bit (`>= 0.5` is one).
pub fn zdt5(x: &Array2<f64>) -> Array2<f64> {
    map_rows2(x, |r| {
        let mut ones = Vec::with_capacity(ZDT5_BITS.len());
        let mut at = 0;
        for len in ZDT5_BITS {
            ones.push(r.iter().skip(at).take(len).filter(|&&v| v >= 0.5).count());
            at += len;
        }
        let f1 = 1.0 + ones[0] as f64;
        let g: f64 = ones[1..]
            .iter()
            .map(|&u| if u < 5 { 2.0 + u as f64 } else { 1.0 })
            .sum();
        [f1, g / f1]
    })
}

pub fn zdt6(x: &Array2<f64>) -> Array2<f64> {
    map_rows2(x, |r| {
        let x1 = r[0];
        let n = r.len();
        let f1 = 1.0 - (-4.0 * x1).exp() * (6.0 * PI * x1).sin().powi(6);
        let g = if n < 2 {
            1.0
        } else {
            1.0 + 9.0 * (r.iter().skip(1).sum::<f64>() / (n - 1) as f64).powf(0.25)
        };
        [f1, g * (1.0 - (f1 / g).powi(2))]
    })
}

/// Position-related variables of the two-objective DTLZ problems.
pub const DTLZ1_K: usize = 5;
pub const DTLZ2_K: usize = 10;

pub fn dtlz1(x: &Array2<f64>) -> Array2<f64> {
    map_rows2(x, |r| {
        let tail = r.iter().skip(1);
        let k = (r.len() - 1) as f64;
        let g = 100.0 * (k + tail.map(|v| (v - 0.5).powi(2) - (20.0 * PI * (v - 0.5)).cos()).sum::<f64>());
        [0.5 * r[0] * (1.0 + g), 0.5 * (1.0 - r[0]) * (1.0 + g)]
    })
}

pub fn dtlz2(x: &Array2<f64>) -> Array2<f64> {
    map_rows2(x, |r| {
        let g: f64 = r.iter().skip(1).map(|v| (v - 0.5).powi(2)).sum();
        let a = r[0] * PI / 2.0;
        [(1.0 + g) * a.cos(), (1.0 + g) * a.sin()]
    })
}

pub fn fonseca_fleming(x: &Array2<f64>) -> Array2<f64> {
    map_rows2(x, |r| {
        let c = 1.0 / (r.len() as f64).sqrt();
        let a: f64 = r.iter().map(|v| (v - c).powi(2)).sum();
        let b: f64 = r.iter().map(|v| (v + c).powi(2)).sum();
        [1.0 - (-a).exp(), 1.0 - (-b).exp()]
    })
}

pub fn schaffer_n1(x: &Array2<f64>) -> Array2<f64> {
    map_rows2(x, |r| [r[0] * r[0], (r[0] - 2.0).powi(2)])
}

pub fn kursawe(x: &Array2<f64>) -> Array2<f64> {
    map_rows2(x, |r| {
        let f1 = r
            .windows(2)
            .into_iter()
            .map(|w| -10.0 * (-0.2 * (w[0] * w[0] + w[1] * w[1]).sqrt()).exp())
            .sum();
        let f2 = r.iter().map(|v| v.abs().powf(0.8) + 5.0 * (v.powi(3)).sin()).sum();
        [f1, f2]
    })
}
