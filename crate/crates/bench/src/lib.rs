//! Shared fixtures for the benchmarks.

use ndarray::Array2;
use spoke_core::design::{generate_design, DesignKind};
use spoke_core::functions::rosenbrock;
use spoke_core::SearchSpace;

/// The unit cube in `d` dimensions.
pub fn unit_space(d: usize) -> SearchSpace {
    SearchSpace::continuous(vec![(0.0, 1.0); d]).expect("unit cube is a valid space")
}

/// `n` Latin-hypercube points in the unit cube with Rosenbrock values
/// (rescaled to `[-2, 2]`) as responses.
pub fn training_set(n: usize, d: usize, seed: u64) -> (Array2<f64>, Vec<f64>) {
    let x = generate_design(DesignKind::QmcLhs, &unit_space(d), n, seed).expect("design");
    let y = rosenbrock(&x.mapv(|v| 4.0 * v - 2.0));
    (x, y)
}
