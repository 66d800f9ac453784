//! Steady-state parallel driver.
//!
//! Up to `n_jobs` objective batches and `n_jobs` acquisition searches run at
//! once on scoped threads. Every completed batch is stored and triggers a
//! refit. Searches read the surrogate under a shared lock and refits take it
//! exclusively, so a model is never read while it is being trained. Restarts
//! and OCBA are sequential-only features and are not used here.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::mpsc;
use std::sync::{PoisonError, RwLock};
use std::thread;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::acquisition::{is_duplicate, propose, random_fallback, AcquisitionContext};
use crate::config::RunConfig;
use crate::objective::Objective;
use crate::optimizer::{evaluate_points, Engine, EvalFailure, Evaluated, OptimizationResult, OptimizeError};
use crate::reporting::EventKind;
use crate::space::SearchSpace;
use crate::store::Phase;
use crate::surrogate::{SurrogateSchedule, UnitScaled};

enum Msg {
    Candidate { seq: u64, x: Result<Vec<f64>, String> },
    Done { rows: Vec<Vec<f64>>, result: Result<Result<Evaluated, EvalFailure>, String> },
}

fn panic_message(p: Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| p.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "worker panicked".to_owned())
}

fn worker_failure(e: &Engine<'_>, message: String) -> OptimizeError {
    OptimizeError::WorkerFailure {
        message,
        partial: Box::new(e.result("aborted: worker failure", false)),
    }
}

/// Evaluates the initial design in batches, at most `n_jobs` calls at a time.
fn evaluate_design(e: &mut Engine<'_>) -> Result<(), OptimizeError> {
    let design = e.initial_design()?;
    let rows: Vec<Vec<f64>> = design.rows().into_iter().map(|r| r.to_vec()).collect();
    let batches: Vec<&[Vec<f64>]> = rows.chunks(e.cfg.eval_batch_size.max(1)).collect();
    let (fun, space, repeats) = (e.fun, e.space, e.cfg.fun_repeats);
    for wave in batches.chunks(e.cfg.n_jobs) {
        let results: Vec<thread::Result<Result<Evaluated, EvalFailure>>> = thread::scope(|s| {
            let handles: Vec<_> = wave
                .iter()
                .map(|batch| s.spawn(move || evaluate_points(fun, space, batch, repeats)))
                .collect();
            handles.into_iter().map(|h| h.join()).collect()
        });
        for (batch, result) in wave.iter().zip(results) {
            match result {
                Ok(Ok(ev)) => {
                    e.record(batch.to_vec(), ev, Phase::Design, EventKind::DesignEval)?;
                }
                Ok(Err(f)) => return Err(e.failure(f)),
                Err(p) => return Err(worker_failure(e, panic_message(p))),
            }
        }
    }
    Ok(())
}

/// Runs the optimizer with concurrent evaluation and acquisition search.
/// The configuration must already be validated.
pub fn steady_state_run(
    fun: &dyn Objective,
    space: &SearchSpace,
    cfg: &RunConfig,
    schedule: &mut SurrogateSchedule,
) -> Result<OptimizationResult, OptimizeError> {
    let mut e = Engine::new(fun, space, cfg)?;
    evaluate_design(&mut e)?;

    let n_jobs = cfg.n_jobs.max(1);
    let batch_size = cfg.eval_batch_size.max(1);
    let repeats = cfg.fun_repeats;
    let budget_points = e.remaining() / repeats;
    if budget_points == 0 {
        return e.finish("budget exhausted");
    }

    let lock = RwLock::new(schedule);
    let mut model = {
        let mut guard = lock.write().unwrap_or_else(PoisonError::into_inner);
        e.fit(&mut guard)?
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(0xfa11));
    let (tx, rx) = mpsc::channel::<Msg>();

    let message = thread::scope(|s| -> Result<&'static str, OptimizeError> {
        let mut seq: u64 = 0;
        let mut requested = 0usize;
        let mut outstanding = 0usize;
        let mut pending: Vec<Vec<f64>> = Vec::new();
        let mut in_flight: Vec<Vec<Vec<f64>>> = Vec::new();
        let mut timed_out = false;

        loop {
            if !timed_out && e.out_of_time() {
                timed_out = true;
                pending.clear();
            }

            // keep up to n_jobs searches running while points remain
            while !timed_out && outstanding < n_jobs && requested < budget_points {
                seq += 1;
                requested += 1;
                let taken: Vec<Vec<f64>> = e
                    .store
                    .x_rows()
                    .iter()
                    .chain(&pending)
                    .chain(in_flight.iter().flatten())
                    .cloned()
                    .collect();
                match model {
                    Some(idx) => {
                        outstanding += 1;
                        let (tx, lock, bounds) = (tx.clone(), &lock, e.unit_bounds.clone());
                        let y_min = e.store.best_y().unwrap_or(f64::INFINITY);
                        let task_seed = cfg.seed.wrapping_add(seq);
                        s.spawn(move || {
                            let x = catch_unwind(AssertUnwindSafe(|| {
                                let guard = lock.read().unwrap_or_else(PoisonError::into_inner);
                                let predictor = UnitScaled {
                                    inner: guard.model(idx),
                                    bounds: &bounds,
                                };
                                let ctx = AcquisitionContext {
                                    predictor: &predictor,
                                    y_min,
                                    space,
                                    evaluated: &taken,
                                    seed: task_seed,
                                };
                                propose(&ctx, cfg.acquisition, cfg.acquisition_optimizer, 1)
                                    .map(|p| p.row(0).to_vec())
                                    .map_err(|err| err.to_string())
                            }))
                            .unwrap_or_else(|p| Err(panic_message(p)));
                            let _ = tx.send(Msg::Candidate { seq, x });
                        });
                    }
                    None => pending.push(random_fallback(space, &taken, &mut rng)),
                }
            }

            // launch full batches, or the remainder once no more candidates can arrive
            let drained = outstanding == 0 && (requested == budget_points || timed_out);
            while in_flight.len() < n_jobs && (pending.len() >= batch_size || (drained && !pending.is_empty())) {
                let rows: Vec<Vec<f64>> = pending.drain(..batch_size.min(pending.len())).collect();
                in_flight.push(rows.clone());
                let tx = tx.clone();
                s.spawn(move || {
                    let result = catch_unwind(AssertUnwindSafe(|| evaluate_points(fun, space, &rows, repeats)))
                        .map_err(panic_message);
                    let _ = tx.send(Msg::Done { rows, result });
                });
            }

            if in_flight.is_empty() && outstanding == 0 && pending.is_empty() {
                break Ok(if timed_out { "time limit reached" } else { "budget exhausted" });
            }

            match rx.recv().expect("a sender is held by the driver") {
                Msg::Candidate { seq, x } => {
                    outstanding -= 1;
                    if timed_out {
                        continue;
                    }
                    let taken: Vec<Vec<f64>> = e
                        .store
                        .x_rows()
                        .iter()
                        .chain(&pending)
                        .chain(in_flight.iter().flatten())
                        .cloned()
                        .collect();
                    let x = match x {
                        Ok(x) if !is_duplicate(&x, &taken) => x,
                        Ok(_) => random_fallback(space, &taken, &mut ChaCha8Rng::seed_from_u64(cfg.seed ^ seq)),
                        Err(msg) => {
                            log::warn!("acquisition search {seq} failed: {msg}; using a random proposal");
                            random_fallback(space, &taken, &mut ChaCha8Rng::seed_from_u64(cfg.seed ^ seq))
                        }
                    };
                    pending.push(x);
                }
                Msg::Done { rows, result } => {
                    let at = in_flight.iter().position(|r| *r == rows).expect("batch was dispatched");
                    in_flight.swap_remove(at);
                    let evaluated = match result {
                        Ok(Ok(ev)) => ev,
                        Ok(Err(f)) => return Err(e.failure(f)),
                        Err(msg) => return Err(worker_failure(&e, msg)),
                    };
                    e.nit += 1;
                    let iter = e.nit;
                    e.record(rows, evaluated, Phase::Sequential { iter }, EventKind::SeqEval)?;
                    if cfg.verbose {
                        log::info!("batch {iter}: best {:?}, nfev {}", e.store.best_y(), e.nfev);
                    }
                    let mut guard = lock.write().unwrap_or_else(PoisonError::into_inner);
                    model = e.fit(&mut guard)?;
                }
            }
        }
    })?;
    e.finish(message)
}
