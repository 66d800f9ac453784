//! Pareto efficiency and scalarization of multi-objective functions.

use ndarray::{Array2, ArrayView1};
use thiserror::Error;

use crate::objective::{Objective, ObjectiveError};

#[derive(Debug, Error, PartialEq)]
pub enum MoError {
    #[error("{got} weights for {expected} objectives")]
    DimensionMismatch { got: usize, expected: usize },
}

fn dominates(a: ArrayView1<f64>, b: ArrayView1<f64>) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b.iter()) {
        if x > y {
            return false;
        }
        strict |= x < y;
    }
    strict
}

/// Non-dominated mask of the rows of `costs` (minimization unless
/// `maximize`). Exact duplicates of an efficient row are all efficient.
///
/// Each surviving row eliminates every row it dominates. Every dominated row
/// is dominated by some efficient row, which survives and gets its turn.
pub fn is_pareto_efficient(costs: &Array2<f64>, maximize: bool) -> Vec<bool> {
    let c = if maximize { costs.mapv(|v| -v) } else { costs.clone() };
    let n = c.nrows();
    let mut efficient = vec![true; n];
    for i in 0..n {
        if !efficient[i] {
            continue;
        }
        for (j, eff) in efficient.iter_mut().enumerate() {
            if j != i && *eff && dominates(c.row(i), c.row(j)) {
                *eff = false;
            }
        }
    }
    efficient
}

pub fn scalarize_weighted_sum(y: &Array2<f64>, weights: &[f64]) -> Result<Vec<f64>, MoError> {
    if weights.len() != y.ncols() {
        return Err(MoError::DimensionMismatch {
            got: weights.len(),
            expected: y.ncols(),
        });
    }
    Ok(y.rows()
        .into_iter()
        .map(|r| r.iter().zip(weights).map(|(v, w)| v * w).sum())
        .collect())
}

/// A multi-objective function composed with a scalarizer. The raw outputs are
/// passed through [`Objective::evaluate_with_raw`] for logging.
pub struct Mo2So<F, S> {
    fun_mo: F,
    scalarizer: S,
}

pub fn attach_mo2so<F, S>(fun_mo: F, scalarizer: S) -> Mo2So<F, S>
where
    F: Fn(&Array2<f64>) -> Result<Array2<f64>, ObjectiveError> + Send + Sync,
    S: Fn(&Array2<f64>) -> Vec<f64> + Send + Sync,
{
    Mo2So { fun_mo, scalarizer }
}

/// Weighted-sum scalarizer for [`attach_mo2so`].
pub fn weighted_sum(weights: Vec<f64>) -> impl Fn(&Array2<f64>) -> Vec<f64> + Send + Sync {
    move |y| scalarize_weighted_sum(y, &weights).unwrap_or_else(|_| vec![f64::NAN; y.nrows()])
}

impl<F, S> Objective for Mo2So<F, S>
where
    F: Fn(&Array2<f64>) -> Result<Array2<f64>, ObjectiveError> + Send + Sync,
    S: Fn(&Array2<f64>) -> Vec<f64> + Send + Sync,
{
    fn evaluate(&self, x: &Array2<f64>) -> Result<Vec<f64>, ObjectiveError> {
        self.evaluate_with_raw(x).map(|(y, _)| y)
    }

    fn evaluate_with_raw(&self, x: &Array2<f64>) -> Result<(Vec<f64>, Option<Array2<f64>>), ObjectiveError> {
        let raw = (self.fun_mo)(x)?;
        if raw.nrows() != x.nrows() {
            return Err(ObjectiveError(format!(
                "multi-objective output has shape {:?} for {} points",
                raw.shape(),
                x.nrows()
            )));
        }
        let y = (self.scalarizer)(&raw);
        if y.len() != x.nrows() {
            return Err(ObjectiveError(format!(
                "scalarizer returned {} values for {} points",
                y.len(),
                x.nrows()
            )));
        }
        Ok((y, Some(raw)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    fn brute_force(c: &Array2<f64>) -> Vec<bool> {
        let n = c.nrows();
        (0..n)
            .map(|i| {
                !(0..n).any(|j| {
                    j != i
                        && c.row(j).iter().zip(c.row(i).iter()).all(|(a, b)| a <= b)
                        && c.row(j).iter().zip(c.row(i).iter()).any(|(a, b)| a < b)
                })
            })
            .collect()
    }

    #[test]
    fn small_examples() {
        assert_eq!(is_pareto_efficient(&array![[1.0, 2.0], [2.0, 1.0], [3.0, 3.0]], false), vec![true, true, false]);
        assert_eq!(is_pareto_efficient(&array![[4.0, 4.0]], false), vec![true]);
        assert_eq!(
            is_pareto_efficient(&array![[1.0, 2.0], [1.0, 2.0], [2.0, 3.0]], false),
            vec![true, true, false]
        );
        // maximization flips the orientation
        assert_eq!(is_pareto_efficient(&array![[1.0, 2.0], [2.0, 1.0], [3.0, 3.0]], true), vec![false, false, true]);
    }

    #[test]
    fn weighted_sum_examples() {
        assert_eq!(scalarize_weighted_sum(&array![[2.0, 4.0]], &[0.5, 0.5]).unwrap(), vec![3.0]);
        assert_eq!(scalarize_weighted_sum(&array![[2.0, 4.0], [7.0, 1.0]], &[1.0, 0.0]).unwrap(), vec![2.0, 7.0]);
        assert_eq!(scalarize_weighted_sum(&array![[2.0, 4.0]], &[0.0, 0.0]).unwrap(), vec![0.0]);
        assert!(scalarize_weighted_sum(&array![[2.0, 4.0]], &[1.0]).is_err());
    }

    #[test]
    fn mo2so_passes_raw_through() {
        let f = attach_mo2so(
            |x: &Array2<f64>| Ok(Array2::from_shape_fn((x.nrows(), 2), |(i, j)| x[[i, 0]] * (j + 1) as f64)),
            weighted_sum(vec![0.5, 0.5]),
        );
        let (y, raw) = f.evaluate_with_raw(&array![[2.0], [4.0]]).unwrap();
        assert_eq!(y, vec![3.0, 6.0]);
        assert_eq!(raw.unwrap(), array![[2.0, 4.0], [4.0, 8.0]]);
        let bad = attach_mo2so(|_: &Array2<f64>| Ok(Array2::zeros((1, 2))), weighted_sum(vec![1.0, 1.0]));
        assert!(bad.evaluate(&array![[1.0], [2.0]]).is_err());
        let ident = attach_mo2so(|x: &Array2<f64>| Ok(x.clone()), |y: &Array2<f64>| y.column(0).to_vec());
        assert_eq!(ident.evaluate(&array![[1.5]]).unwrap(), vec![1.5]);
    }

    fn cost_matrix() -> impl Strategy<Value = Array2<f64>> {
        (1usize..200, 2usize..5).prop_flat_map(|(n, m)| {
            // a coarse value grid makes ties and duplicates common
            proptest::collection::vec(0i32..8, n * m)
                .prop_map(move |v| Array2::from_shape_vec((n, m), v.into_iter().map(f64::from).collect()).unwrap())
        })
    }

    proptest! {
        #[test]
        fn matches_brute_force(c in cost_matrix()) {
            let mask = is_pareto_efficient(&c, false);
            prop_assert_eq!(&mask, &brute_force(&c));
            prop_assert!(mask.iter().any(|&b| b));
        }

        #[test]
        fn monotone_transform_invariant(c in cost_matrix(), s in 0.1f64..5.0, t in -3.0f64..3.0) {
            let tc = c.mapv(|v| s * v + t);
            prop_assert_eq!(is_pareto_efficient(&c, false), is_pareto_efficient(&tc, false));
            let ec = c.mapv(|v| (v / 3.0).exp());
            prop_assert_eq!(is_pareto_efficient(&c, false), is_pareto_efficient(&ec, false));
        }
    }
}
