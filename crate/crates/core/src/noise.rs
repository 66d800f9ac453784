//! Repeat statistics and optimal computing budget allocation (OCBA) for
//! noisy objectives.

use thiserror::Error;

use crate::store::EvaluationStore;

const VAR_FLOOR: f64 = 1e-12;
const DELTA_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum NoiseError {
    #[error("OCBA needs at least 2 designs, got {0}")]
    TooFewDesigns(usize),
    #[error("means, variances and counts must have equal length ({means}, {variances}, {counts})")]
    LengthMismatch {
        means: usize,
        variances: usize,
        counts: usize,
    },
    #[error("non-finite mean or variance")]
    NonFinite,
}

/// Running mean and variance of repeated evaluations (Welford).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RepeatStats {
    count: usize,
    mean: f64,
    m2: f64,
}

impl RepeatStats {
    pub fn from_values(values: &[f64]) -> Self {
        let mut s = Self::default();
        for &v in values {
            s.push(v);
        }
        s
    }

    pub fn push(&mut self, v: f64) {
        self.count += 1;
        let d = v - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (v - self.mean);
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample variance; 0 with fewer than two values.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }
}

pub fn aggregate_repeats(raw: &[Vec<f64>]) -> Vec<RepeatStats> {
    raw.iter().map(|v| RepeatStats::from_values(v)).collect()
}

/// Splits `delta` additional evaluations over `k` designs.
///
/// The best design is the one with the lowest mean. Continuous OCBA targets
/// are computed for the total `sum(counts) + delta`; designs whose target is
/// below what they already have are frozen and the rest re-solved. Fractional
/// increments are rounded by largest remainder, ties to the lower index. If
/// all means coincide, `delta` is split uniformly.
pub fn ocba_allocate(
    means: &[f64],
    variances: &[f64],
    counts: &[usize],
    delta: usize,
) -> Result<Vec<usize>, NoiseError> {
    let k = means.len();
    if variances.len() != k || counts.len() != k {
        return Err(NoiseError::LengthMismatch {
            means: k,
            variances: variances.len(),
            counts: counts.len(),
        });
    }
    if k < 2 {
        return Err(NoiseError::TooFewDesigns(k));
    }
    if means.iter().chain(variances).any(|v| !v.is_finite()) {
        return Err(NoiseError::NonFinite);
    }
    if delta == 0 {
        return Ok(vec![0; k]);
    }
    let b = (0..k).min_by(|&i, &j| means[i].total_cmp(&means[j])).unwrap();
    if means.iter().all(|&m| m == means[b]) {
        log::warn!("OCBA: all means equal, splitting {delta} evaluations uniformly");
        return Ok(uniform_split(k, delta));
    }

    let sd: Vec<f64> = variances.iter().map(|v| v.max(VAR_FLOOR).sqrt()).collect();
    let mut ratio = vec![0.0; k];
    for i in (0..k).filter(|&i| i != b) {
        let d = (means[i] - means[b]).max(DELTA_FLOOR);
        ratio[i] = (sd[i] / d).powi(2);
    }
    ratio[b] = sd[b]
        * (0..k)
            .filter(|&i| i != b)
            .map(|i| (ratio[i] / sd[i]).powi(2))
            .sum::<f64>()
            .sqrt();

    let total = (counts.iter().sum::<usize>() + delta) as f64;
    let mut active = vec![true; k];
    let mut target = vec![0.0; k];
    loop {
        let frozen: f64 = (0..k).filter(|&i| !active[i]).map(|i| counts[i] as f64).sum();
        let ratio_sum: f64 = (0..k).filter(|&i| active[i]).map(|i| ratio[i]).sum();
        for i in 0..k {
            target[i] = if active[i] {
                (total - frozen) * ratio[i] / ratio_sum
            } else {
                counts[i] as f64
            };
        }
        let below: Vec<usize> = (0..k).filter(|&i| active[i] && target[i] < counts[i] as f64).collect();
        if below.is_empty() {
            break;
        }
        for i in below {
            active[i] = false;
        }
    }

    let extra: Vec<f64> = (0..k).map(|i| (target[i] - counts[i] as f64).max(0.0)).collect();
    let scale = delta as f64 / extra.iter().sum::<f64>();
    Ok(largest_remainder(&extra.iter().map(|e| e * scale).collect::<Vec<_>>(), delta))
}

/// Spends `delta` extra evaluations on the store rows that have at least two
/// repeats, as allocated by [`ocba_allocate`]. `eval(x, n)` must return `n`
/// fresh values for internal-scale point `x`. Returns the values added per row.
pub fn apply_ocba<E>(
    store: &mut EvaluationStore,
    delta: usize,
    mut eval: impl FnMut(&[f64], usize) -> Result<Vec<f64>, E>,
) -> Result<Vec<(usize, Vec<f64>)>, E> {
    let rows: Vec<usize> = (0..store.len()).filter(|&i| store.stats()[i].count() >= 2).collect();
    if delta == 0 || rows.len() < 2 {
        return Ok(Vec::new());
    }
    let stats: Vec<RepeatStats> = rows.iter().map(|&i| store.stats()[i]).collect();
    let alloc = ocba_allocate(
        &stats.iter().map(RepeatStats::mean).collect::<Vec<_>>(),
        &stats.iter().map(RepeatStats::variance).collect::<Vec<_>>(),
        &stats.iter().map(RepeatStats::count).collect::<Vec<_>>(),
        delta,
    )
    .expect("at least two finite rows");
    let mut added = Vec::new();
    for (&row, &n) in rows.iter().zip(&alloc) {
        if n == 0 {
            continue;
        }
        let x = store.x_rows()[row].clone();
        let values = eval(&x, n)?;
        for &v in &values {
            store.add_repeat(row, v);
        }
        added.push((row, values));
    }
    Ok(added)
}

fn uniform_split(k: usize, delta: usize) -> Vec<usize> {
    (0..k).map(|i| delta / k + usize::from(i < delta % k)).collect()
}

fn largest_remainder(shares: &[f64], total: usize) -> Vec<usize> {
    let mut out: Vec<usize> = shares.iter().map(|s| s.floor() as usize).collect();
    let assigned: usize = out.iter().sum();
    let mut order: Vec<usize> = (0..shares.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = shares[a] - shares[a].floor();
        let rb = shares[b] - shares[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().cycle().take(total.saturating_sub(assigned)) {
        out[i] += 1;
    }
    // guard against floor sums that overshoot through rounding error
    let mut excess = out.iter().sum::<usize>().saturating_sub(total);
    for &i in order.iter().rev() {
        if excess == 0 {
            break;
        }
        if out[i] > 0 {
            out[i] -= 1;
            excess -= 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn aggregate_examples() {
        let s = aggregate_repeats(&[vec![3.0, 3.0, 3.0], vec![1.0, 2.0, 3.0], vec![7.5]]);
        assert_eq!((s[0].mean(), s[0].variance()), (3.0, 0.0));
        assert!((s[1].mean() - 2.0).abs() < 1e-15 && (s[1].variance() - 1.0).abs() < 1e-15);
        assert_eq!((s[2].mean(), s[2].variance(), s[2].count()), (7.5, 0.0, 1));
    }

    #[test]
    fn welford_matches_two_pass() {
        let v: Vec<f64> = (0..50).map(|i| 1e8 + (i as f64 * 0.37).sin()).collect();
        let mean = v.iter().sum::<f64>() / 50.0;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 49.0;
        let s = RepeatStats::from_values(&v);
        assert!((s.mean() - mean).abs() < 1e-6);
        assert!((s.variance() - var).abs() / var < 1e-6);
    }

    #[test]
    fn two_designs_equal_variance_split_evenly() {
        assert_eq!(ocba_allocate(&[1.0, 2.0], &[1.0, 1.0], &[0, 0], 10).unwrap(), vec![5, 5]);
        assert_eq!(ocba_allocate(&[1.0, 2.0], &[0.3, 0.3], &[2, 2], 10).unwrap(), vec![5, 5]);
    }

    #[test]
    fn far_low_variance_design_gets_nothing() {
        let a = ocba_allocate(&[1.0, 1.2, 50.0], &[1.0, 1.0, 1e-6], &[2, 2, 2], 10).unwrap();
        assert_eq!(a[2], 0);
        assert_eq!(a.iter().sum::<usize>(), 10);
    }

    #[test]
    fn equal_means_uniform() {
        assert_eq!(ocba_allocate(&[2.0, 2.0, 2.0], &[1.0, 3.0, 0.5], &[2, 2, 2], 10).unwrap(), vec![4, 3, 3]);
    }

    #[test]
    fn zero_delta_and_errors() {
        assert_eq!(ocba_allocate(&[1.0, 2.0], &[1.0, 1.0], &[1, 1], 0).unwrap(), vec![0, 0]);
        assert_eq!(ocba_allocate(&[1.0], &[1.0], &[1], 3), Err(NoiseError::TooFewDesigns(1)));
        assert!(ocba_allocate(&[1.0, 2.0], &[1.0], &[1, 1], 3).is_err());
    }

    #[test]
    fn oversampled_design_is_frozen() {
        // design 1 already has far more than its share
        let a = ocba_allocate(&[0.0, 1.0, 1.0], &[1.0, 1.0, 1.0], &[2, 40, 2], 6).unwrap();
        assert_eq!(a[1], 0);
        assert_eq!(a.iter().sum::<usize>(), 6);
    }

    #[test]
    fn apply_conserves_budget() {
        use crate::store::Phase;
        let mut store = EvaluationStore::new(1, 5);
        store.append(vec![0.0], &[1.0, 1.2], Phase::Design).unwrap();
        store.append(vec![1.0], &[2.0, 2.4], Phase::Design).unwrap();
        store.append(vec![2.0], &[9.0], Phase::Design).unwrap();
        let before = store.total_evaluations();
        let added = apply_ocba(&mut store, 7, |x, n| Ok::<_, ()>(vec![x[0] + 1.0; n])).unwrap();
        assert_eq!(store.total_evaluations(), before + 7);
        assert!(added.iter().all(|(row, _)| *row < 2));
        assert_eq!(store.stats()[2].count(), 1);
        let unchanged = store.clone();
        assert!(apply_ocba(&mut store, 0, |_, _| Err::<Vec<f64>, _>(())).unwrap().is_empty());
        assert_eq!(store.y(), unchanged.y());
    }

    fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<usize>, usize)> {
        (2usize..8).prop_flat_map(|k| {
            (
                proptest::collection::vec(-10.0f64..10.0, k),
                proptest::collection::vec(1e-3f64..10.0, k),
                proptest::collection::vec(1usize..20, k),
                1usize..60,
            )
        })
    }

    proptest! {
        #[test]
        fn conservation((m, v, c, delta) in instance()) {
            let a = ocba_allocate(&m, &v, &c, delta).unwrap();
            prop_assert_eq!(a.len(), m.len());
            prop_assert_eq!(a.iter().sum::<usize>(), delta);
        }

        #[test]
        fn scale_invariance((m, v, c, delta) in instance(), p in 1i32..4) {
            // powers of four keep every intermediate exactly scaled
            let s = 4f64.powi(p);
            let scaled: Vec<f64> = v.iter().map(|x| x * s).collect();
            prop_assert_eq!(ocba_allocate(&m, &v, &c, delta).unwrap(), ocba_allocate(&m, &scaled, &c, delta).unwrap());
        }

        #[test]
        fn permutation_equivariance((m, v, c, delta) in instance(), rot in 0usize..8) {
            let k = m.len();
            let r = rot % k;
            let perm = |x: &[f64]| -> Vec<f64> { (0..k).map(|i| x[(i + r) % k]).collect() };
            let cp: Vec<usize> = (0..k).map(|i| c[(i + r) % k]).collect();
            let a = ocba_allocate(&m, &v, &c, delta).unwrap();
            let b = ocba_allocate(&perm(&m), &perm(&v), &cp, delta).unwrap();
            let a_perm: Vec<usize> = (0..k).map(|i| a[(i + r) % k]).collect();
            prop_assert_eq!(a_perm, b);
        }
    }
}
