//! Space-filling initial designs. All generators return points in internal
//! scale, one row per point.

use ndarray::{concatenate, Array2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::space::SearchSpace;

#[derive(Debug, Error, PartialEq)]
pub enum DesignError {
    #[error("design size must be at least 1")]
    EmptyDesign,
    #[error("clustered design needs at least one cluster")]
    NoClusters,
    #[error("clustered design spread must be non-negative, got {0}")]
    NegativeSpread(f64),
    #[error("Sobol generator supports up to {max} dimensions, got {got}")]
    SobolDimension { got: usize, max: usize },
    #[error("user design has {got} columns, space has {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("user design row {row}, dimension {dim}: value {value} outside ({lower}, {upper})")]
    OutOfBoundsDesignPoint {
        row: usize,
        dim: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DesignKind {
    #[default]
    QmcLhs,
    Sobol,
    Grid,
    Uniform,
    Clustered { n_clusters: usize, spread: f64 },
}

pub fn generate_design(
    kind: DesignKind,
    space: &SearchSpace,
    n_design: usize,
    seed: u64,
) -> Result<Array2<f64>, DesignError> {
    if n_design == 0 {
        return Err(DesignError::EmptyDesign);
    }
    let bounds = space.internal_bounds();
    let d = bounds.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = match kind {
        DesignKind::QmcLhs => lhs_unit(n_design, d, &mut rng),
        DesignKind::Sobol => sobol_unit(n_design, d, &mut rng)?,
        DesignKind::Grid => grid_unit(n_design, d),
        DesignKind::Uniform => Array2::from_shape_fn((n_design, d), |_| rng.random::<f64>()),
        DesignKind::Clustered { n_clusters, spread } => {
            if n_clusters == 0 {
                return Err(DesignError::NoClusters);
            }
            if !(spread >= 0.0) {
                return Err(DesignError::NegativeSpread(spread));
            }
            clustered_unit(n_design, d, n_clusters, spread, &mut rng)
        }
    };
    Ok(scale_unit(unit, &bounds))
}

/// Maps points from the unit hypercube to the given box.
pub fn scale_unit(mut unit: Array2<f64>, bounds: &[(f64, f64)]) -> Array2<f64> {
    for mut row in unit.rows_mut() {
        for (v, &(lo, hi)) in row.iter_mut().zip(bounds) {
            *v = (lo + *v * (hi - lo)).clamp(lo, hi);
        }
    }
    unit
}

/// Column-wise (min, max) of a point set.
pub fn boundaries(x: &Array2<f64>) -> Vec<(f64, f64)> {
    x.columns()
        .into_iter()
        .map(|c| {
            c.iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
        })
        .collect()
}

fn lhs_unit(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let mut out = Array2::zeros((n, d));
    let mut strata: Vec<usize> = (0..n).collect();
    for j in 0..d {
        strata.shuffle(rng);
        for (i, &s) in strata.iter().enumerate() {
            let u: f64 = rng.random();
            // Stay strictly inside the stratum so the last one cannot reach 1 + eps.
            out[[i, j]] = ((s as f64 + u) / n as f64).min((s as f64 + 1.0 - 1e-12) / n as f64);
        }
    }
    out
}

/// Largest k with k^d <= n.
pub fn grid_side(n: usize, d: usize) -> usize {
    let mut k = (n as f64).powf(1.0 / d as f64).round() as usize + 1;
    while k > 1 && k.checked_pow(d as u32).is_none_or(|p| p > n) {
        k -= 1;
    }
    k.max(1)
}

fn grid_unit(n: usize, d: usize) -> Array2<f64> {
    let k = grid_side(n, d);
    let total = k.pow(d as u32);
    if total < n {
        log::warn!("grid design: {n} points requested, {total} returned ({k} per dimension)");
    }
    let level = |i: usize| if k == 1 { 0.5 } else { i as f64 / (k - 1) as f64 };
    Array2::from_shape_fn((total, d), |(row, col)| {
        let idx = (row / k.pow(col as u32)) % k;
        level(idx)
    })
}

fn clustered_unit(n: usize, d: usize, n_clusters: usize, spread: f64, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let centers: Vec<Vec<f64>> = (0..n_clusters)
        .map(|_| (0..d).map(|_| rng.random::<f64>()).collect())
        .collect();
    let mut out = Array2::zeros((n, d));
    for i in 0..n {
        let c = &centers[i % n_clusters];
        for j in 0..d {
            out[[i, j]] = if spread == 0.0 {
                c[j]
            } else {
                truncated_normal(c[j], spread, rng)
            };
        }
    }
    out
}

fn truncated_normal(mean: f64, sd: f64, rng: &mut ChaCha8Rng) -> f64 {
    let normal = Normal::new(mean, sd).expect("finite sd");
    for _ in 0..1000 {
        let v = normal.sample(rng);
        if (0.0..=1.0).contains(&v) {
            return v;
        }
    }
    mean.clamp(0.0, 1.0)
}

/// Places `x0` rows before `generated` rows. Rows of `x0` that leave the box by
/// at most 1e-9 are clamped; anything further out is rejected.
pub fn merge_user_design(
    x0: &Array2<f64>,
    generated: &Array2<f64>,
    space: &SearchSpace,
) -> Result<Array2<f64>, DesignError> {
    let d = space.dims();
    if x0.nrows() == 0 {
        return Ok(generated.clone());
    }
    if x0.ncols() != d {
        return Err(DesignError::DimensionMismatch {
            got: x0.ncols(),
            expected: d,
        });
    }
    if generated.nrows() > 0 && generated.ncols() != d {
        return Err(DesignError::DimensionMismatch {
            got: generated.ncols(),
            expected: d,
        });
    }
    let bounds = space.internal_bounds();
    let mut user = x0.clone();
    for (row, mut r) in user.rows_mut().into_iter().enumerate() {
        for (dim, v) in r.iter_mut().enumerate() {
            let (lower, upper) = bounds[dim];
            if *v < lower - 1e-9 || *v > upper + 1e-9 || !v.is_finite() {
                return Err(DesignError::OutOfBoundsDesignPoint {
                    row,
                    dim,
                    value: *v,
                    lower,
                    upper,
                });
            }
            *v = v.clamp(lower, upper);
        }
    }
    if generated.nrows() == 0 {
        return Ok(user);
    }
    Ok(concatenate(Axis(0), &[user.view(), generated.view()]).expect("matching columns"))
}

// Joe & Kuo primitive polynomials and initial direction numbers for
// dimensions 2..=21: (degree s, coefficient a, m_1..m_s).
const SOBOL_TABLE: &[(u32, u32, &[u32])] = &[
    (1, 0, &[1]),
    (2, 1, &[1, 3]),
    (3, 1, &[1, 3, 1]),
    (3, 2, &[1, 1, 1]),
    (4, 1, &[1, 1, 3, 3]),
    (4, 4, &[1, 3, 5, 13]),
    (5, 2, &[1, 1, 5, 5, 17]),
    (5, 4, &[1, 1, 5, 5, 5]),
    (5, 7, &[1, 1, 7, 11, 19]),
    (5, 11, &[1, 1, 5, 1, 1]),
    (5, 13, &[1, 1, 1, 3, 11]),
    (5, 14, &[1, 3, 5, 5, 31]),
    (6, 1, &[1, 3, 3, 9, 7, 49]),
    (6, 13, &[1, 1, 1, 15, 21, 21]),
    (6, 16, &[1, 3, 1, 13, 27, 49]),
    (6, 19, &[1, 1, 1, 15, 7, 5]),
    (6, 22, &[1, 3, 1, 15, 13, 25]),
    (6, 25, &[1, 1, 5, 5, 19, 61]),
    (7, 1, &[1, 3, 7, 11, 23, 15, 103]),
    (7, 4, &[1, 3, 7, 13, 13, 15, 69]),
];

pub const SOBOL_MAX_DIMS: usize = SOBOL_TABLE.len() + 1;
const SOBOL_BITS: u32 = 32;

fn direction_numbers(dim: usize) -> [u32; SOBOL_BITS as usize] {
    let mut v = [0u32; SOBOL_BITS as usize];
    if dim == 0 {
        for (k, vk) in v.iter_mut().enumerate() {
            *vk = 1u32 << (SOBOL_BITS - 1 - k as u32);
        }
        return v;
    }
    let (s, a, m) = SOBOL_TABLE[dim - 1];
    let s = s as usize;
    for k in 0..s.min(SOBOL_BITS as usize) {
        v[k] = m[k] << (SOBOL_BITS - 1 - k as u32);
    }
    for k in s..SOBOL_BITS as usize {
        let mut vk = v[k - s] ^ (v[k - s] >> s);
        for i in 1..s {
            if (a >> (s - 1 - i)) & 1 == 1 {
                vk ^= v[k - i];
            }
        }
        v[k] = vk;
    }
    v
}

/// Digitally shifted Sobol points in Gray-code order.
fn sobol_unit(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Result<Array2<f64>, DesignError> {
    if d > SOBOL_MAX_DIMS {
        return Err(DesignError::SobolDimension {
            got: d,
            max: SOBOL_MAX_DIMS,
        });
    }
    let dirs: Vec<_> = (0..d).map(direction_numbers).collect();
    let shift: Vec<u32> = (0..d).map(|_| rng.random::<u32>()).collect();
    let mut state = vec![0u32; d];
    let mut out = Array2::zeros((n, d));
    let scale = 1.0 / (1u64 << SOBOL_BITS) as f64;
    for i in 0..n {
        if i > 0 {
            let c = (i - 1).trailing_ones() as usize;
            for j in 0..d {
                state[j] ^= dirs[j][c];
            }
        }
        for j in 0..d {
            out[[i, j]] = (state[j] ^ shift[j]) as f64 * scale;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{SearchSpace, VarTrans, VarType};

    fn unit_space(d: usize) -> SearchSpace {
        SearchSpace::continuous(vec![(0.0, 1.0); d]).unwrap()
    }

    #[test]
    fn grid_count_rule() {
        let s = SearchSpace::continuous(vec![(-5.0, 5.0); 2]).unwrap();
        let x = generate_design(DesignKind::Grid, &s, 20, 0).unwrap();
        assert_eq!(x.nrows(), 16);
        assert_eq!(grid_side(27, 3), 3);
        assert_eq!(grid_side(26, 3), 2);
        assert_eq!(grid_side(5, 3), 1);
    }

    #[test]
    fn grid_levels_span_bounds() {
        let s = SearchSpace::continuous(vec![(-5.0, 5.0); 2]).unwrap();
        let x = generate_design(DesignKind::Grid, &s, 9, 0).unwrap();
        let mut firsts: Vec<f64> = x.column(0).to_vec();
        firsts.sort_by(f64::total_cmp);
        firsts.dedup();
        assert_eq!(firsts, vec![-5.0, 0.0, 5.0]);
    }

    #[test]
    fn lhs_quartiles() {
        let x = generate_design(DesignKind::QmcLhs, &unit_space(1), 4, 7).unwrap();
        let mut bins: Vec<usize> = x.column(0).iter().map(|v| (v * 4.0).floor() as usize).collect();
        bins.sort();
        assert_eq!(bins, vec![0, 1, 2, 3]);
    }

    #[test]
    fn uniform_single_point() {
        let s = SearchSpace::continuous(vec![(-2.0, 3.0), (10.0, 11.0)]).unwrap();
        let x = generate_design(DesignKind::Uniform, &s, 1, 3).unwrap();
        assert_eq!(x.nrows(), 1);
        assert!((-2.0..=3.0).contains(&x[[0, 0]]) && (10.0..=11.0).contains(&x[[0, 1]]));
    }

    #[test]
    fn designs_use_internal_scale() {
        let s = SearchSpace::new(
            vec![(1e-5, 0.1)],
            vec![VarType::Float],
            vec![VarTrans::Log10],
            vec!["lr".into()],
        )
        .unwrap();
        let x = generate_design(DesignKind::QmcLhs, &s, 10, 1).unwrap();
        assert!(x.iter().all(|v| (-5.0..=-1.0).contains(v)));
    }

    #[test]
    fn same_seed_same_design() {
        let s = unit_space(3);
        for kind in [
            DesignKind::QmcLhs,
            DesignKind::Sobol,
            DesignKind::Uniform,
            DesignKind::Clustered {
                n_clusters: 3,
                spread: 0.1,
            },
        ] {
            let a = generate_design(kind, &s, 17, 42).unwrap();
            let b = generate_design(kind, &s, 17, 42).unwrap();
            assert_eq!(a, b);
            let c = generate_design(kind, &s, 17, 43).unwrap();
            assert_ne!(a, c);
        }
    }

    #[test]
    fn sobol_first_dimension_is_van_der_corput_net() {
        // Each 1-D projection of the first 2^m points has one point per dyadic
        // interval of width 2^-m, shift or no shift.
        let x = generate_design(DesignKind::Sobol, &unit_space(SOBOL_MAX_DIMS), 64, 5).unwrap();
        for j in 0..SOBOL_MAX_DIMS {
            let mut bins: Vec<usize> = x.column(j).iter().map(|v| (v * 64.0) as usize).collect();
            bins.sort();
            assert_eq!(bins, (0..64).collect::<Vec<_>>(), "dimension {j}");
        }
    }

    #[test]
    fn sobol_two_dim_net_property() {
        // Dimensions 1 and 2 form a (0, m, 2)-net: every elementary box of
        // area 2^-m holds exactly one of the first 2^m points.
        let m = 6u32;
        let n = 1usize << m;
        let x = generate_design(DesignKind::Sobol, &unit_space(2), n, 9).unwrap();
        for a in 0..=m {
            let (ba, bb) = (1usize << a, 1usize << (m - a));
            let mut seen = vec![0usize; n];
            for r in x.rows() {
                let i = (r[0] * ba as f64) as usize;
                let k = (r[1] * bb as f64) as usize;
                seen[i * bb + k] += 1;
            }
            assert!(seen.iter().all(|&c| c == 1), "split {a}");
        }
    }

    #[test]
    fn sobol_rows_distinct() {
        let x = generate_design(DesignKind::Sobol, &unit_space(3), 4096, 11).unwrap();
        let mut first: Vec<u64> = x.column(0).iter().map(|v| v.to_bits()).collect();
        first.sort();
        first.dedup();
        assert_eq!(first.len(), 4096);
    }

    #[test]
    fn sobol_dimension_limit() {
        let s = unit_space(SOBOL_MAX_DIMS + 1);
        assert!(matches!(
            generate_design(DesignKind::Sobol, &s, 4, 0),
            Err(DesignError::SobolDimension { .. })
        ));
    }

    #[test]
    fn clustered_in_bounds_and_validated() {
        let s = SearchSpace::continuous(vec![(-1.0, 1.0); 2]).unwrap();
        let x = generate_design(
            DesignKind::Clustered {
                n_clusters: 2,
                spread: 0.5,
            },
            &s,
            50,
            0,
        )
        .unwrap();
        assert!(x.iter().all(|v| (-1.0..=1.0).contains(v)));
        assert_eq!(
            generate_design(DesignKind::Clustered { n_clusters: 0, spread: 0.1 }, &s, 5, 0),
            Err(DesignError::NoClusters)
        );
        assert_eq!(generate_design(DesignKind::Uniform, &s, 0, 0), Err(DesignError::EmptyDesign));
    }

    #[test]
    fn merge_user_design_cases() {
        let s = unit_space(2);
        let gen = generate_design(DesignKind::QmcLhs, &s, 4, 0).unwrap();
        let empty = Array2::zeros((0, 2));
        assert_eq!(merge_user_design(&empty, &gen, &s).unwrap(), gen);

        let x0 = ndarray::array![[0.5, 1.0 + 5e-10]];
        let merged = merge_user_design(&x0, &gen, &s).unwrap();
        assert_eq!(merged.nrows(), 5);
        assert_eq!(merged.row(0).to_vec(), vec![0.5, 1.0]);
        assert_eq!(merged.row(1), gen.row(0));

        let far = ndarray::array![[0.5, 1.1]];
        assert!(matches!(
            merge_user_design(&far, &gen, &s),
            Err(DesignError::OutOfBoundsDesignPoint { row: 0, dim: 1, .. })
        ));
        let wrong = ndarray::array![[0.5]];
        assert!(matches!(
            merge_user_design(&wrong, &gen, &s),
            Err(DesignError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn lhs_stratified_in_wide_bounds() {
        let s = SearchSpace::continuous(vec![(-5.0, 5.0), (0.0, 100.0)]).unwrap();
        let n = 13;
        let x = generate_design(DesignKind::QmcLhs, &s, n, 2).unwrap();
        for (j, &(lo, hi)) in s.bounds().iter().enumerate() {
            let mut bins: Vec<usize> = x
                .column(j)
                .iter()
                .map(|v| (((v - lo) / (hi - lo)) * n as f64).floor() as usize)
                .collect();
            bins.sort();
            assert_eq!(bins, (0..n).collect::<Vec<_>>());
        }
    }
}
