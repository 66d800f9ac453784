use std::f64::consts::PI;

use ndarray::Array2;

/// Natural bounds of the wing-weight variables
/// `Sw, Wfw, A, Lambda (deg), q, lambda, tc, Nz, Wdg, Wp`.
pub const WINGWT_BOUNDS: [(f64, f64); 10] = [
    (150.0, 200.0),
    (220.0, 300.0),
    (6.0, 10.0),
    (-10.0, 10.0),
    (16.0, 45.0),
    (0.5, 1.0),
    (0.08, 0.18),
    (2.5, 6.0),
    (1700.0, 2500.0),
    (0.025, 0.08),
];

/// Baseline paint weight used by the 9-variable form.
pub const WINGWT_BASELINE_WP: f64 = 0.064;

fn wingwt_row(v: &[f64]) -> f64 {
    let (sw, wfw, a, lam_deg, q, taper, tc, nz, wdg, wp) = (v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9]);
    let lam = lam_deg.to_radians();
    let cos = lam.cos();
    0.036
        * sw.powf(0.758)
        * wfw.powf(0.0035)
        * (a / (cos * cos)).powf(0.6)
        * q.powf(0.006)
        * taper.powf(0.04)
        * (100.0 * tc / cos).powf(-0.3)
        * (nz * wdg).powf(0.49)
        + sw * wp
}

/// Wing weight. Rows with 9 columns use the baseline paint weight.
pub fn wingwt(x: &Array2<f64>) -> Vec<f64> {
    x.rows()
        .into_iter()
        .map(|r| {
            let mut v = r.to_vec();
            if v.len() == 9 {
                v.push(WINGWT_BASELINE_WP);
            }
            wingwt_row(&v)
        })
        .collect()
}

/// Circular obstacles `(cx, cy, radius)` of the robot-arm problem.
pub const ROBOT_ARM_OBSTACLES: [(f64, f64, f64); 3] = [(2.0, 2.5, 0.8), (3.5, 4.0, 0.6), (1.0, 4.0, 0.5)];
pub const ROBOT_ARM_TARGET: (f64, f64) = (5.0, 5.0);
const ROBOT_ARM_PENALTY: f64 = 10.0;

/// Planar arm with unit links and relative joint angles: distance of the end
/// effector to the target plus a quadratic penalty for every joint inside an
/// obstacle.
pub fn robot_arm_hard(x: &Array2<f64>) -> Vec<f64> {
    x.rows()
        .into_iter()
        .map(|r| {
            let (mut px, mut py, mut phi) = (0.0, 0.0, 0.0);
            let mut penalty = 0.0;
            for &theta in r.iter() {
                phi += theta;
                px += phi.cos();
                py += phi.sin();
                for &(cx, cy, rad) in &ROBOT_ARM_OBSTACLES {
                    let depth = rad - ((px - cx).powi(2) + (py - cy).powi(2)).sqrt();
                    if depth > 0.0 {
                        penalty += ROBOT_ARM_PENALTY * depth * depth;
                    }
                }
            }
            ((px - ROBOT_ARM_TARGET.0).powi(2) + (py - ROBOT_ARM_TARGET.1).powi(2)).sqrt() + penalty
        })
        .collect()
}

pub const LJ_ATOMS: usize = 13;
pub const LJ13_MINIMUM: f64 = -44.326801;

/// Lennard-Jones cluster energy in reduced units for flat `(x, y, z)` triples.
pub fn lj_energy(coords: &[f64]) -> f64 {
    let n = coords.len() / 3;
    let mut e = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let r2 = (0..3)
                .map(|k| (coords[3 * i + k] - coords[3 * j + k]).powi(2))
                .sum::<f64>()
                .max(1e-12);
            let inv6 = 1.0 / (r2 * r2 * r2);
            e += 4.0 * (inv6 * inv6 - inv6);
        }
    }
    e
}

pub fn lennard_jones(x: &Array2<f64>) -> Vec<f64> {
    x.rows().into_iter().map(|r| lj_energy(&r.to_vec())).collect()
}

pub(crate) fn robot_arm_bounds() -> Vec<(f64, f64)> {
    vec![(-PI, PI); 10]
}
