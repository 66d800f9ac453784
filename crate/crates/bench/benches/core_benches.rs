use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use spoke_bench::{training_set, unit_space};
use spoke_core::acquisition::{propose, AcquisitionContext, AcquisitionKind, AcquisitionOptimizer};
use spoke_core::design::{generate_design, DesignKind};
use spoke_core::mo::is_pareto_efficient;
use spoke_core::noise::ocba_allocate;
use spoke_core::surrogate::{Kriging, Predictor, Surrogate};

fn kriging(c: &mut Criterion) {
    let mut g = c.benchmark_group("kriging_fit");
    g.sample_size(10);
    for n in [20, 50, 100] {
        let (x, y) = training_set(n, 3, 1);
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| {
                let mut k = Kriging::new(Default::default());
                k.fit(black_box(&x), black_box(&y)).unwrap();
                k
            })
        });
    }
    g.finish();

    let (x, y) = training_set(50, 3, 1);
    let mut k = Kriging::new(Default::default());
    k.fit(&x, &y).unwrap();
    let (q, _) = training_set(1000, 3, 2);
    c.bench_function("kriging_predict_1000", |b| b.iter(|| k.predict(black_box(&q)).unwrap()));
}

fn acquisition(c: &mut Criterion) {
    let (x, y) = training_set(30, 2, 3);
    let mut k = Kriging::new(Default::default());
    k.fit(&x, &y).unwrap();
    let space = unit_space(2);
    let evaluated: Vec<Vec<f64>> = x.rows().into_iter().map(|r| r.to_vec()).collect();
    let y_min = y.iter().copied().fold(f64::INFINITY, f64::min);
    let mut g = c.benchmark_group("propose");
    g.sample_size(10);
    for kind in [AcquisitionKind::PredictedValue, AcquisitionKind::ExpectedImprovement] {
        g.bench_function(format!("{kind:?}"), |b| {
            b.iter(|| {
                let ctx = AcquisitionContext {
                    predictor: &k,
                    y_min,
                    space: &space,
                    evaluated: &evaluated,
                    seed: 7,
                };
                propose(&ctx, kind, AcquisitionOptimizer::DifferentialEvolution, 1).unwrap()
            })
        });
    }
    g.finish();
}

fn pareto(c: &mut Criterion) {
    let mut g = c.benchmark_group("pareto");
    for n in [100, 1000] {
        let costs = generate_design(DesignKind::Uniform, &unit_space(3), n, 4).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &costs, |b, costs| {
            b.iter(|| is_pareto_efficient(black_box(costs), false))
        });
    }
    g.finish();
}

fn designs(c: &mut Criterion) {
    let space = unit_space(10);
    c.bench_function("lhs_200x10", |b| {
        b.iter(|| generate_design(DesignKind::QmcLhs, black_box(&space), 200, 5).unwrap())
    });
}

fn ocba(c: &mut Criterion) {
    let k = 50;
    let means: Vec<f64> = (0..k).map(|i| (i as f64 * 0.37).sin()).collect();
    let variances: Vec<f64> = (0..k).map(|i| 0.5 + (i % 5) as f64 * 0.1).collect();
    let counts = vec![3usize; k];
    c.bench_function("ocba_allocate_50", |b| {
        b.iter(|| ocba_allocate(black_box(&means), &variances, &counts, 100).unwrap())
    });
}

criterion_group!(benches, kriging, acquisition, pareto, designs, ocba);
criterion_main!(benches);
