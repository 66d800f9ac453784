use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Which representative each K-means cluster contributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubsetCriterion {
    /// Point nearest the centroid.
    #[default]
    Distant,
    /// Point with the lowest objective value.
    Best,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lloyd's algorithm with k-means++ seeding. Returns the cluster label of
/// every row and the centroids.
pub fn kmeans(x: &Array2<f64>, k: usize, seed: u64) -> (Vec<usize>, Vec<Vec<f64>>) {
    let rows: Vec<Vec<f64>> = x.rows().into_iter().map(|r| r.to_vec()).collect();
    let n = rows.len();
    let k = k.min(n).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut centroids = vec![rows[rng.random_range(0..n)].clone()];
    let mut d2: Vec<f64> = rows.iter().map(|r| sq_dist(r, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total <= 0.0 {
            rng.random_range(0..n)
        } else {
            let mut u = rng.random::<f64>() * total;
            d2.iter()
                .position(|w| {
                    u -= w;
                    u <= 0.0
                })
                .unwrap_or(n - 1)
        };
        centroids.push(rows[next].clone());
        for (d, r) in d2.iter_mut().zip(&rows) {
            *d = d.min(sq_dist(r, centroids.last().unwrap()));
        }
    }

    let mut labels = vec![0usize; n];
    for iter in 0..100 {
        let mut changed = false;
        for (i, r) in rows.iter().enumerate() {
            let best = (0..k)
                .min_by(|&a, &b| sq_dist(r, &centroids[a]).total_cmp(&sq_dist(r, &centroids[b])))
                .unwrap();
            if best != labels[i] || iter == 0 {
                changed |= best != labels[i];
                labels[i] = best;
            }
        }
        if !changed && iter > 0 {
            break;
        }
        for (c, centroid) in centroids.iter_mut().enumerate() {
            let members: Vec<&Vec<f64>> = rows.iter().zip(&labels).filter(|(_, l)| **l == c).map(|(r, _)| r).collect();
            if members.is_empty() {
                continue;
            }
            for (j, v) in centroid.iter_mut().enumerate() {
                *v = members.iter().map(|m| m[j]).sum::<f64>() / members.len() as f64;
            }
        }
    }
    (labels, centroids)
}

/// Picks at most `k` representative rows for surrogate fitting. Returns all
/// indices when there are no more than `k` rows.
pub fn select_surrogate_points(
    x: &Array2<f64>,
    y: &[f64],
    k: usize,
    criterion: SubsetCriterion,
    seed: u64,
) -> Vec<usize> {
    let n = x.nrows();
    if n <= k {
        return (0..n).collect();
    }
    let (labels, centroids) = kmeans(x, k, seed);
    let mut picked: Vec<usize> = (0..centroids.len())
        .filter_map(|c| {
            let members = (0..n).filter(|&i| labels[i] == c);
            match criterion {
                SubsetCriterion::Distant => members.min_by(|&a, &b| {
                    let ra = x.row(a).to_vec();
                    let rb = x.row(b).to_vec();
                    sq_dist(&ra, &centroids[c]).total_cmp(&sq_dist(&rb, &centroids[c]))
                }),
                SubsetCriterion::Best => members.min_by(|&a, &b| y[a].total_cmp(&y[b])),
            }
        })
        .collect();
    picked.sort_unstable();
    picked
}
