//! The sequential parameter optimization loop.
//!
//! Phase 1 evaluates a space-filling design. Phase 2 repeats fit, propose,
//! evaluate until the evaluation budget or the time limit runs out, with
//! optional repeated evaluation, OCBA and success-rate restarts.

use std::time::Instant;

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::acquisition::{propose, random_fallback, AcquisitionContext};
use crate::config::{ConfigError, RunConfig};
use crate::design::{generate_design, merge_user_design, DesignError, DesignKind};
use crate::noise::apply_ocba;
use crate::objective::{checked_call, Objective};
use crate::reporting::{EventKind, EventLog, ReportError, RunEvent};
use crate::space::{SearchSpace, SpaceError};
use crate::store::{EvaluationStore, Phase};
use crate::surrogate::{scale_matrix, select_surrogate_points, SurrogateSchedule, UnitScaled};

#[derive(Debug, Clone, Serialize)]
pub struct RestartRecord {
    /// Sequential iteration after which the restart happened.
    pub iter: usize,
    /// Evaluations consumed before the restart.
    pub nfev: usize,
    pub incumbent_x: Vec<f64>,
    pub incumbent_y: f64,
    /// The fresh design (natural scale), injected incumbent included.
    pub design: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct OptimizationResult {
    /// Best point, natural scale.
    pub x: Vec<f64>,
    pub fun: f64,
    pub nfev: usize,
    pub nit: usize,
    pub success: bool,
    pub message: String,
    /// Every evaluated point, natural scale.
    pub x_history: Array2<f64>,
    /// Aggregated value of every evaluated point.
    pub y_history: Vec<f64>,
    /// Originating sequential iteration of each history row, 0 for design rows.
    pub iterations: Vec<usize>,
    pub refits: usize,
    pub restarts: Vec<RestartRecord>,
}

#[derive(Debug, Error)]
pub enum OptimizeError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Design(#[from] DesignError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("objective failed at {point:?}: {message}")]
    ObjectiveFailure {
        point: Vec<f64>,
        message: String,
        partial: Box<OptimizationResult>,
    },
    #[error("evaluation worker failed: {message}")]
    WorkerFailure {
        message: String,
        partial: Box<OptimizationResult>,
    },
}

impl OptimizeError {
    /// History gathered before the failure, when there is one.
    pub fn partial(&self) -> Option<&OptimizationResult> {
        match self {
            OptimizeError::ObjectiveFailure { partial, .. } | OptimizeError::WorkerFailure { partial, .. } => {
                Some(partial)
            }
            _ => None,
        }
    }
}

/// Objective output for a batch of points, each evaluated `repeats` times.
pub(crate) struct Evaluated {
    /// Per point, the value of each call.
    pub values: Vec<Vec<f64>>,
    /// Per point, the raw multi-objective output of each call.
    pub raw: Option<Vec<Vec<Vec<f64>>>>,
}

pub(crate) struct EvalFailure {
    pub point: Vec<f64>,
    pub message: String,
}

/// Evaluates internal-scale `rows`, each `repeats` times, in one objective call.
pub(crate) fn evaluate_points(
    fun: &dyn Objective,
    space: &SearchSpace,
    rows: &[Vec<f64>],
    repeats: usize,
) -> Result<Evaluated, EvalFailure> {
    let d = space.dims();
    let natural: Vec<Vec<f64>> = rows.iter().map(|r| space.to_natural(r)).collect();
    let x = Array2::from_shape_fn((rows.len() * repeats, d), |(i, j)| natural[i / repeats][j]);
    let (y, raw) = checked_call(fun, &x).map_err(|e| EvalFailure {
        point: natural.first().cloned().unwrap_or_default(),
        message: e.0,
    })?;
    let values = y.chunks(repeats).map(<[f64]>::to_vec).collect();
    let raw = raw.map(|r| {
        (0..rows.len())
            .map(|i| (0..repeats).map(|k| r.row(i * repeats + k).to_vec()).collect())
            .collect()
    });
    Ok(Evaluated { values, raw })
}

/// Mutable run state shared by the sequential and steady-state drivers.
pub(crate) struct Engine<'a> {
    pub fun: &'a dyn Objective,
    pub space: &'a SearchSpace,
    pub cfg: &'a RunConfig,
    pub store: EvaluationStore,
    pub log: Option<EventLog>,
    pub nfev: usize,
    pub nit: usize,
    pub refits: usize,
    pub restarts: Vec<RestartRecord>,
    pub injected: Option<usize>,
    pub unit_bounds: Vec<(f64, f64)>,
    start: Instant,
    pick_rng: ChaCha8Rng,
}

impl<'a> Engine<'a> {
    pub fn new(fun: &'a dyn Objective, space: &'a SearchSpace, cfg: &'a RunConfig) -> Result<Self, OptimizeError> {
        let log = cfg.log_path.as_deref().map(EventLog::create).transpose()?;
        Ok(Self {
            fun,
            space,
            cfg,
            store: EvaluationStore::new(space.dims(), cfg.window_size()),
            log,
            nfev: 0,
            nit: 0,
            refits: 0,
            restarts: Vec::new(),
            injected: None,
            unit_bounds: space.internal_bounds(),
            start: Instant::now(),
            pick_rng: ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(0x5eed)),
        })
    }

    pub fn remaining(&self) -> usize {
        self.cfg.max_iter.saturating_sub(self.nfev)
    }

    pub fn out_of_time(&self) -> bool {
        self.cfg.max_time.is_some_and(|t| self.start.elapsed().as_secs_f64() >= t)
    }

    pub fn emit(&mut self, event: RunEvent) -> Result<(), OptimizeError> {
        if let Some(log) = self.log.as_mut() {
            log.write(event)?;
        }
        Ok(())
    }

    fn event(&self, kind: EventKind, iter: usize) -> RunEvent {
        let mut ev = RunEvent::new(kind, iter);
        ev.best_y = self.store.best_y();
        ev.success_rate = self.store.success_rate();
        ev
    }

    /// The initial design in internal scale, user rows first.
    pub fn initial_design(&self) -> Result<Array2<f64>, OptimizeError> {
        let d = self.space.dims();
        let x0 = match &self.cfg.x0 {
            Some(rows) => {
                let mut m = Array2::zeros((rows.len(), d));
                for (i, r) in rows.iter().enumerate() {
                    let v = self.space.to_internal(r)?;
                    m.row_mut(i).assign(&ndarray::ArrayView1::from(&v));
                }
                m
            }
            None => Array2::zeros((0, d)),
        };
        let n_gen = self.cfg.design_rows() - x0.nrows();
        let generated = if n_gen > 0 {
            let mut g = generate_design(self.cfg.design, self.space, n_gen, self.cfg.seed)?;
            for mut row in g.rows_mut() {
                self.space.repair_internal(row.as_slice_mut().expect("standard layout"));
            }
            g
        } else {
            Array2::zeros((0, d))
        };
        Ok(merge_user_design(&x0, &generated, self.space)?)
    }

    pub fn failure(&self, f: EvalFailure) -> OptimizeError {
        OptimizeError::ObjectiveFailure {
            point: f.point,
            message: f.message,
            partial: Box::new(self.result("aborted: objective failure", false)),
        }
    }

    /// Stores evaluated points and logs one event per objective call.
    pub fn record(
        &mut self,
        rows: Vec<Vec<f64>>,
        evaluated: Evaluated,
        phase: Phase,
        kind: EventKind,
    ) -> Result<Vec<usize>, OptimizeError> {
        let iter = match phase {
            Phase::Design => 0,
            Phase::Sequential { iter } => iter,
        };
        let mut idx = Vec::with_capacity(rows.len());
        for (i, (row, values)) in rows.into_iter().zip(evaluated.values).enumerate() {
            let natural = self.space.to_natural(&row);
            let at = self.store.append(row, &values, phase).expect("row shape checked by space");
            idx.push(at);
            self.nfev += values.len();
            for (k, v) in values.iter().enumerate() {
                let mut ev = self.event(kind, iter);
                ev.x = Some(natural.clone());
                ev.y = Some(*v);
                ev.mo_raw = evaluated.raw.as_ref().map(|r| r[i][k].clone());
                self.emit(ev)?;
            }
        }
        Ok(idx)
    }

    /// Rows the surrogate should see: the current epoch plus an injected incumbent,
    /// or everything when that leaves fewer than two rows.
    pub fn active_rows(&self) -> Vec<usize> {
        let epoch = self.store.current_epoch();
        let active: Vec<usize> = (0..self.store.len())
            .filter(|&i| self.store.epochs()[i] == epoch || Some(i) == self.injected)
            .collect();
        if active.len() < 2 {
            (0..self.store.len()).collect()
        } else {
            active
        }
    }

    /// Draws a model from the schedule and fits it on the active rows mapped to
    /// the unit cube. Returns the fitted model index, or `None` if fitting failed.
    pub fn fit(&mut self, schedule: &mut SurrogateSchedule) -> Result<Option<usize>, OptimizeError> {
        let (model, cap) = schedule.pick(&mut self.pick_rng);
        let mut rows = self.active_rows();
        let y_all = self.store.y();
        let x = scale_matrix(&self.store.rows_matrix(&rows), &self.unit_bounds);
        let mut y: Vec<f64> = rows.iter().map(|&i| y_all[i]).collect();
        let x = match cap.or(self.cfg.max_surrogate_points) {
            Some(k) if rows.len() > k => {
                let keep = select_surrogate_points(&x, &y, k, self.cfg.subset_criterion, self.cfg.seed);
                rows = keep.iter().map(|&i| rows[i]).collect();
                y = keep.iter().map(|&i| y[i]).collect();
                x.select(ndarray::Axis(0), &keep)
            }
            _ => x,
        };
        let fitted = match schedule.model_mut(model).fit(&x, &y) {
            Ok(()) => Some(model),
            Err(e) => {
                log::warn!("surrogate fit on {} points failed: {e}; using a random proposal", rows.len());
                None
            }
        };
        self.refits += 1;
        let ev = self.event(EventKind::Refit, self.nit);
        self.emit(ev)?;
        Ok(fitted)
    }

    pub fn result(&self, message: &str, success: bool) -> OptimizationResult {
        let n = self.store.len();
        let d = self.space.dims();
        let natural: Vec<Vec<f64>> = self.store.x_rows().iter().map(|r| self.space.to_natural(r)).collect();
        OptimizationResult {
            x: self.store.best_x().map(|b| self.space.to_natural(b)).unwrap_or_default(),
            fun: self.store.best_y().unwrap_or(f64::INFINITY),
            nfev: self.nfev,
            nit: self.nit,
            success,
            message: message.to_owned(),
            x_history: Array2::from_shape_fn((n, d), |(i, j)| natural[i][j]),
            y_history: self.store.y(),
            iterations: self.store.iterations().to_vec(),
            refits: self.refits,
            restarts: self.restarts.clone(),
        }
    }

    pub fn finish(mut self, message: &str) -> Result<OptimizationResult, OptimizeError> {
        let ev = self.event(EventKind::Done, self.nit);
        self.emit(ev)?;
        if let Some(log) = self.log.as_mut() {
            log.flush()?;
        }
        if self.cfg.verbose {
            log::info!(
                "{message}: best {:.6e} after {} evaluations",
                self.store.best_y().unwrap_or(f64::NAN),
                self.nfev
            );
        }
        Ok(self.result(message, true))
    }
}

/// Checks the configuration against the space and the surrogate schedule.
pub(crate) fn validate_run(
    space: &SearchSpace,
    cfg: &RunConfig,
    schedule: &SurrogateSchedule,
) -> Result<(), OptimizeError> {
    cfg.validate()?;
    if cfg.acquisition.needs_std() && !schedule.all_provide_std() {
        return Err(ConfigError(format!(
            "acquisition {:?} needs every surrogate to predict a standard deviation",
            cfg.acquisition
        ))
        .into());
    }
    if let Some(x0) = &cfg.x0 {
        if let Some(r) = x0.iter().find(|r| r.len() != space.dims()) {
            return Err(ConfigError(format!("x0 row has {} values, space has {} dimensions", r.len(), space.dims())).into());
        }
    }
    Ok(())
}

/// Runs the optimizer. With `n_jobs > 1` the steady-state driver takes over.
pub fn optimize(
    fun: &dyn Objective,
    space: &SearchSpace,
    cfg: &RunConfig,
    schedule: &mut SurrogateSchedule,
) -> Result<OptimizationResult, OptimizeError> {
    validate_run(space, cfg, schedule)?;
    if cfg.n_jobs > 1 {
        return crate::parallel::steady_state_run(fun, space, cfg, schedule);
    }
    let mut e = Engine::new(fun, space, cfg)?;

    let design = e.initial_design()?;
    let rows: Vec<Vec<f64>> = design.rows().into_iter().map(|r| r.to_vec()).collect();
    let evaluated = evaluate_points(fun, space, &rows, cfg.fun_repeats).map_err(|f| e.failure(f))?;
    e.record(rows, evaluated, Phase::Design, EventKind::DesignEval)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(0xfa11));
    let message = loop {
        if e.remaining() < cfg.fun_repeats {
            break "budget exhausted";
        }
        if e.out_of_time() {
            break "time limit reached";
        }
        e.nit += 1;
        let iter = e.nit;
        e.store.begin_iteration();

        let fitted = e.fit(schedule)?;
        let n_points = cfg.n_infill.min(e.remaining() / cfg.fun_repeats);
        let candidates: Vec<Vec<f64>> = match fitted {
            Some(model) => {
                let predictor = UnitScaled {
                    inner: schedule.model(model),
                    bounds: &e.unit_bounds,
                };
                let ctx = AcquisitionContext {
                    predictor: &predictor,
                    y_min: e.store.best_y().unwrap_or(f64::INFINITY),
                    space,
                    evaluated: e.store.x_rows(),
                    seed: cfg.seed.wrapping_add(e.nfev as u64),
                };
                let p = propose(&ctx, cfg.acquisition, cfg.acquisition_optimizer, n_points)
                    .map_err(|err| ConfigError(err.to_string()))?;
                p.rows().into_iter().map(|r| r.to_vec()).collect()
            }
            None => {
                let mut taken = e.store.x_rows().to_vec();
                (0..n_points)
                    .map(|_| {
                        let x = random_fallback(space, &taken, &mut rng);
                        taken.push(x.clone());
                        x
                    })
                    .collect()
            }
        };
        let evaluated = evaluate_points(fun, space, &candidates, cfg.fun_repeats).map_err(|f| e.failure(f))?;
        e.record(candidates, evaluated, Phase::Sequential { iter }, EventKind::SeqEval)?;

        if cfg.ocba_delta > 0 {
            run_ocba(&mut e, iter)?;
        }

        e.store.end_iteration();
        if let Some(design) = maybe_restart(&mut e.store, cfg, space, restart_seed(cfg.seed, e.restarts.len()))? {
            run_restart(&mut e, design, iter)?;
        }
        if cfg.verbose {
            log::info!(
                "iter {iter}: best {:.6e}, success rate {:.2}, nfev {}",
                e.store.best_y().unwrap_or(f64::NAN),
                e.store.success_rate(),
                e.nfev
            );
        }
    };
    e.finish(message)
}

fn restart_seed(seed: u64, restarts: usize) -> u64 {
    seed ^ (restarts as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

fn run_ocba(e: &mut Engine<'_>, iter: usize) -> Result<(), OptimizeError> {
    let eligible = e.store.stats().iter().filter(|s| s.count() >= 2).count();
    let delta = e.cfg.ocba_delta.min(e.remaining());
    if eligible < 2 || delta == 0 {
        return Ok(());
    }
    let (fun, space) = (e.fun, e.space);
    let added = apply_ocba(&mut e.store, delta, |x, n| {
        evaluate_points(fun, space, &[x.to_vec()], n).map(|ev| ev.values.into_iter().next().unwrap_or_default())
    })
    .map_err(|f| e.failure(f))?;
    for (row, values) in added {
        let natural = space.to_natural(&e.store.x_rows()[row]);
        e.nfev += values.len();
        for v in values {
            let mut ev = e.event(EventKind::Ocba, iter);
            ev.x = Some(natural.clone());
            ev.y = Some(v);
            e.emit(ev)?;
        }
    }
    Ok(())
}

/// Returns a fresh design (internal scale) when the zero-success streak has
/// reached `restart_after_n`, and resets the store for a new epoch. With
/// `restart_inject_best` the first row is the incumbent.
pub fn maybe_restart(
    store: &mut EvaluationStore,
    cfg: &RunConfig,
    space: &SearchSpace,
    seed: u64,
) -> Result<Option<Array2<f64>>, DesignError> {
    if store.zero_streak() < cfg.restart_after_n {
        return Ok(None);
    }
    let mut design = generate_design(DesignKind::QmcLhs, space, cfg.n_initial, seed)?;
    for mut row in design.rows_mut() {
        space.repair_internal(row.as_slice_mut().expect("standard layout"));
    }
    if cfg.restart_inject_best {
        if let Some(best) = store.best_x() {
            design.row_mut(0).assign(&ndarray::ArrayView1::from(best));
        }
    }
    store.reset_after_restart();
    Ok(Some(design))
}

fn run_restart(e: &mut Engine<'_>, design: Array2<f64>, iter: usize) -> Result<(), OptimizeError> {
    let incumbent = e.store.best_index();
    let mut rows: Vec<Vec<f64>> = design.rows().into_iter().map(|r| r.to_vec()).collect();
    e.restarts.push(RestartRecord {
        iter,
        nfev: e.nfev,
        incumbent_x: e.store.best_x().map(|b| e.space.to_natural(b)).unwrap_or_default(),
        incumbent_y: e.store.best_y().unwrap_or(f64::INFINITY),
        design: rows.iter().map(|r| e.space.to_natural(r)).collect(),
    });
    let mut ev = e.event(EventKind::Restart, iter);
    ev.x = e.restarts.last().map(|r| r.incumbent_x.clone());
    e.emit(ev)?;

    // the injected incumbent keeps its stored value and is not evaluated again
    e.injected = None;
    if e.cfg.restart_inject_best && incumbent.is_some() {
        rows.remove(0);
        e.injected = incumbent;
    }
    rows.truncate(e.remaining() / e.cfg.fun_repeats);
    if rows.is_empty() {
        return Ok(());
    }
    let evaluated = evaluate_points(e.fun, e.space, &rows, e.cfg.fun_repeats).map_err(|f| e.failure(f))?;
    e.record(rows, evaluated, Phase::Design, EventKind::DesignEval)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::sphere;
    use crate::space::{VarTrans, VarType};

    fn square(b: f64) -> SearchSpace {
        SearchSpace::continuous(vec![(-b, b); 2]).unwrap()
    }

    #[test]
    fn design_only_budget() {
        let cfg = RunConfig {
            max_iter: 10,
            n_initial: 10,
            ..Default::default()
        };
        let r = optimize(&sphere, &square(5.0), &cfg, &mut SurrogateSchedule::default()).unwrap();
        assert_eq!((r.nit, r.nfev), (0, 10));
        assert_eq!(r.fun, r.y_history.iter().cloned().fold(f64::INFINITY, f64::min));
    }

    #[test]
    fn budget_is_exact_with_repeats_and_batches() {
        let cfg = RunConfig {
            max_iter: 24,
            n_initial: 5,
            fun_repeats: 2,
            n_infill: 2,
            ..Default::default()
        };
        let r = optimize(&sphere, &square(5.0), &cfg, &mut SurrogateSchedule::default()).unwrap();
        // 10 design calls, three 2-point iterations of 4 calls, then a truncated 1-point batch
        assert_eq!(r.nfev, 24);
        assert_eq!(r.y_history.len(), 12);
    }

    #[test]
    fn acquisition_needs_std() {
        struct NoStd;
        impl crate::surrogate::Predictor for NoStd {
            fn predict_point(&self, _: &[f64]) -> Result<crate::surrogate::Prediction, crate::surrogate::SurrogateError> {
                Ok(crate::surrogate::Prediction { mean: 0.0, std: None })
            }
            fn provides_std(&self) -> bool {
                false
            }
        }
        impl crate::surrogate::Surrogate for NoStd {
            fn fit(&mut self, _: &Array2<f64>, _: &[f64]) -> Result<(), crate::surrogate::SurrogateError> {
                Ok(())
            }
        }
        let cfg = RunConfig {
            acquisition: crate::acquisition::AcquisitionKind::ExpectedImprovement,
            ..Default::default()
        };
        let err = optimize(&sphere, &square(5.0), &cfg, &mut SurrogateSchedule::single(Box::new(NoStd))).unwrap_err();
        assert!(matches!(err, OptimizeError::Config(_)));
    }

    #[test]
    fn objective_failure_keeps_partial_history() {
        use crate::objective::{Fallible, ObjectiveError};
        use std::sync::atomic::{AtomicUsize, Ordering};
        let calls = AtomicUsize::new(0);
        let f = Fallible(|x: &Array2<f64>| {
            if calls.fetch_add(1, Ordering::SeqCst) == 3 {
                Err(ObjectiveError::from("simulator crashed"))
            } else {
                Ok(sphere(x))
            }
        });
        let cfg = RunConfig {
            max_iter: 20,
            n_initial: 5,
            ..Default::default()
        };
        let err = optimize(&f, &square(1.0), &cfg, &mut SurrogateSchedule::default()).unwrap_err();
        let partial = err.partial().unwrap();
        assert_eq!(partial.nfev, 7);
        assert!(err.to_string().contains("simulator crashed"));
    }

    #[test]
    fn restart_counter_trace_on_constant_function() {
        // window 2, restart after 3: iterations 1-2 fill the window, 3-5 count
        let cfg = RunConfig {
            max_iter: 12,
            n_initial: 3,
            restart_after_n: 3,
            window_size: Some(2),
            ..Default::default()
        };
        let f = |x: &Array2<f64>| vec![1.0; x.nrows()];
        let r = optimize(&f, &square(1.0), &cfg, &mut SurrogateSchedule::default()).unwrap();
        assert_eq!(r.restarts.len(), 1);
        assert_eq!(r.restarts[0].iter, 5);
        assert_eq!(r.restarts[0].nfev, 8);
        // injected incumbent is not re-evaluated: 2 new design points
        assert_eq!(r.nfev, 12);
        assert_eq!(r.restarts[0].design[0], r.restarts[0].incumbent_x);
    }

    #[test]
    fn mixed_space_rounds_discrete_dims() {
        let space = SearchSpace::new(
            vec![(-2.0, 2.0), (0.0, 5.0), (0.0, 2.0)],
            vec![VarType::Float, VarType::Int, VarType::Factor { levels: 3 }],
            vec![VarTrans::Identity; 3],
            vec!["a".into(), "k".into(), "c".into()],
        )
        .unwrap();
        let cfg = RunConfig {
            max_iter: 15,
            n_initial: 8,
            ..Default::default()
        };
        let f = |x: &Array2<f64>| x.rows().into_iter().map(|r| r[0] * r[0] + (r[1] - 3.0).powi(2) + r[2]).collect();
        let r = optimize(&f, &space, &cfg, &mut SurrogateSchedule::default()).unwrap();
        for row in r.x_history.rows() {
            assert_eq!(row[1].fract(), 0.0);
            assert_eq!(row[2].fract(), 0.0);
        }
    }
}
