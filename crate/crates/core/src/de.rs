//! Bounded differential evolution (rand/1/bin) and a bounded Nelder-Mead
//! simplex. Both minimize.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeSettings {
    pub pop_size: usize,
    pub generations: usize,
    pub f: f64,
    pub cr: f64,
    pub seed: u64,
}

impl DeSettings {
    /// Population `per_dim * d` capped at `cap` (and at least 5).
    pub fn scaled(d: usize, per_dim: usize, cap: usize, generations: usize, seed: u64) -> Self {
        Self {
            pop_size: (per_dim * d).clamp(5, cap.max(5)),
            generations,
            f: 0.8,
            cr: 0.9,
            seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DeOutcome {
    pub x: Vec<f64>,
    pub fun: f64,
    /// Final population sorted by ascending fitness.
    pub population: Vec<(Vec<f64>, f64)>,
    pub nfev: usize,
}

pub fn differential_evolution<F>(mut f: F, bounds: &[(f64, f64)], settings: &DeSettings) -> DeOutcome
where
    F: FnMut(&[f64]) -> f64,
{
    let d = bounds.len();
    let np = settings.pop_size.max(4);
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut pop: Vec<Vec<f64>> = (0..np)
        .map(|_| bounds.iter().map(|&(lo, hi)| lo + rng.random::<f64>() * (hi - lo)).collect())
        .collect();
    let mut fit: Vec<f64> = pop.iter().map(|x| eval(x)).collect();
    let mut nfev = np;
    let mut trial = vec![0.0; d];

    for _ in 0..settings.generations {
        for i in 0..np {
            let (r0, r1, r2) = distinct_three(&mut rng, np, i);
            let j_rand = rng.random_range(0..d);
            for j in 0..d {
                trial[j] = if j == j_rand || rng.random::<f64>() < settings.cr {
                    let (lo, hi) = bounds[j];
                    (pop[r0][j] + settings.f * (pop[r1][j] - pop[r2][j])).clamp(lo, hi)
                } else {
                    pop[i][j]
                };
            }
            let ft = eval(&trial);
            nfev += 1;
            if ft <= fit[i] {
                pop[i].copy_from_slice(&trial);
                fit[i] = ft;
            }
        }
    }

    let mut population: Vec<(Vec<f64>, f64)> = pop.into_iter().zip(fit).collect();
    population.sort_by(|a, b| a.1.total_cmp(&b.1));
    DeOutcome {
        x: population[0].0.clone(),
        fun: population[0].1,
        population,
        nfev,
    }
}

fn distinct_three(rng: &mut ChaCha8Rng, n: usize, exclude: usize) -> (usize, usize, usize) {
    let mut pick = |taken: &[usize]| loop {
        let r = rng.random_range(0..n);
        if r != exclude && !taken.contains(&r) {
            return r;
        }
    };
    let a = pick(&[]);
    let b = pick(&[a]);
    let c = pick(&[a, b]);
    (a, b, c)
}

/// Nelder-Mead with vertices clamped into the box.
pub fn nelder_mead<F>(mut f: F, start: &[f64], bounds: &[(f64, f64)], max_evals: usize) -> (Vec<f64>, f64)
where
    F: FnMut(&[f64]) -> f64,
{
    let d = start.len();
    let clamp = |x: &mut Vec<f64>| {
        for (v, &(lo, hi)) in x.iter_mut().zip(bounds) {
            *v = v.clamp(lo, hi);
        }
    };
    let mut eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    let mut x0 = start.to_vec();
    clamp(&mut x0);
    let f0 = eval(&x0);
    simplex.push((x0.clone(), f0));
    for j in 0..d {
        let (lo, hi) = bounds[j];
        let step = 0.05 * (hi - lo);
        let mut x = x0.clone();
        x[j] = if x[j] + step <= hi { x[j] + step } else { x[j] - step };
        let fx = eval(&x);
        simplex.push((x, fx));
    }
    let mut evals = d + 1;
    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[d].1 - simplex[0].1;
        if spread.abs() <= 1e-12 * (1.0 + simplex[0].1.abs()) {
            break;
        }
        let centroid: Vec<f64> = (0..d)
            .map(|j| simplex[..d].iter().map(|(x, _)| x[j]).sum::<f64>() / d as f64)
            .collect();
        let along = |t: f64| {
            let mut x: Vec<f64> = centroid
                .iter()
                .zip(&simplex[d].0)
                .map(|(c, w)| c + t * (c - w))
                .collect();
            clamp(&mut x);
            x
        };
        let xr = along(1.0);
        let fr = eval(&xr);
        evals += 1;
        if fr < simplex[0].1 {
            let xe = along(2.0);
            let fe = eval(&xe);
            evals += 1;
            simplex[d] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[d - 1].1 {
            simplex[d] = (xr, fr);
        } else {
            let xc = along(-0.5);
            let fc = eval(&xc);
            evals += 1;
            if fc < simplex[d].1 {
                simplex[d] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = best.iter().zip(&v.0).map(|(b, x)| b + 0.5 * (x - b)).collect();
                    v.1 = eval(&x);
                    v.0 = x;
                    evals += 1;
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}
