//! Post-hoc analysis of an event log.

use std::path::Path;

use ndarray::Array2;
use serde::Serialize;
use spoke_core::reporting::{get_importance, read_events, sensitivity_spearman, EventKind, ReportError, Sensitivity};

#[derive(Debug, Serialize)]
pub struct Report {
    pub events: usize,
    pub complete: bool,
    pub evaluations: usize,
    pub best_value: Option<f64>,
    pub best_point: Option<Vec<f64>>,
    pub sensitivity: Vec<SensitivityRow>,
    /// Why sensitivity could not be computed, if it could not.
    pub note: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct SensitivityRow {
    pub name: String,
    pub rho: f64,
    pub p_value: f64,
    pub stars: &'static str,
    pub importance: f64,
}

pub fn build(path: &Path, names: Option<Vec<String>>) -> Result<Report, ReportError> {
    let events = read_events(path)?;
    let complete = events.last().is_some_and(|e| e.kind == EventKind::Done);
    let evals: Vec<(&Vec<f64>, f64)> = events
        .iter()
        .filter(|e| matches!(e.kind, EventKind::DesignEval | EventKind::SeqEval | EventKind::Ocba))
        .filter_map(|e| Some((e.x.as_ref()?, e.y?)))
        .collect();
    let best = evals.iter().min_by(|a, b| a.1.total_cmp(&b.1));

    let mut report = Report {
        events: events.len(),
        complete,
        evaluations: evals.len(),
        best_value: best.map(|b| b.1),
        best_point: best.map(|b| b.0.clone()),
        sensitivity: Vec::new(),
        note: None,
    };
    let Some(d) = evals.first().map(|e| e.0.len()) else {
        report.note = Some("no evaluations in the log".into());
        return Ok(report);
    };
    let names = names.unwrap_or_else(|| (0..d).map(|i| format!("x{i}")).collect());
    let x = Array2::from_shape_fn((evals.len(), d), |(i, j)| evals[i].0[j]);
    let y: Vec<f64> = evals.iter().map(|e| e.1).collect();
    match (sensitivity_spearman(&x, &y, &names), get_importance(&x, &y, &names)) {
        (Ok(sens), Ok(imp)) => {
            report.sensitivity = sens
                .into_iter()
                .zip(imp)
                .map(|(Sensitivity { name, rho, p_value, stars }, importance)| SensitivityRow {
                    name,
                    rho,
                    p_value,
                    stars,
                    importance,
                })
                .collect();
        }
        (Err(e), _) | (_, Err(e)) => report.note = Some(e.to_string()),
    }
    Ok(report)
}

pub fn render(r: &Report) -> String {
    let mut out = String::new();
    let status = if r.complete { "complete" } else { "partial, no done event" };
    out.push_str(&format!("Events: {} ({status})\n", r.events));
    out.push_str(&format!("Evaluations: {}\n", r.evaluations));
    if let (Some(v), Some(x)) = (r.best_value, &r.best_point) {
        out.push_str(&format!("Best value: {v:.6}\n"));
        out.push_str(&format!("Best point: {}\n", crate::format_point(x)));
    }
    if !r.sensitivity.is_empty() {
        let width = r.sensitivity.iter().map(|s| s.name.len()).max().unwrap_or(0);
        out.push_str("Sensitivity (Spearman):\n");
        for s in &r.sensitivity {
            let line = format!("  {:<width$} : {:+.3} (p={:.3}) {}", s.name, s.rho, s.p_value, s.stars);
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out.push_str("Importance:\n");
        for s in &r.sensitivity {
            out.push_str(&format!("  {:<width$} : {:6.2}\n", s.name, s.importance));
        }
    }
    if let Some(note) = &r.note {
        out.push_str(&format!("Note: {note}\n"));
    }
    out
}
