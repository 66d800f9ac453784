//! Post-run analysis and run artifacts: sensitivity and importance, result
//! tables, the JSONL event log and the CSV history export.

mod events;
mod stats;
mod table;

pub use events::{read_events, EventKind, EventLog, RunEvent};
pub use stats::{
    average_ranks, get_importance, sensitivity_spearman, significance_stars, spearman, spearman_p_value, Sensitivity,
};
pub use table::{render_table, results_table, TableRow};

use std::io::Write;
use std::path::Path;

use ndarray::Array2;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    MalformedLine { line: usize, message: String },
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Writes `iter,x0..x{d-1},y,best_y`, one record per history row, where
/// `best_y` is the running minimum of `y`.
pub fn write_history_csv<W: Write>(out: W, iters: &[usize], x: &Array2<f64>, y: &[f64]) -> Result<(), ReportError> {
    if iters.len() != y.len() || x.nrows() != y.len() {
        return Err(ReportError::LengthMismatch(format!(
            "{} iterations, {} points, {} values",
            iters.len(),
            x.nrows(),
            y.len()
        )));
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["iter".to_string()];
    header.extend((0..x.ncols()).map(|j| format!("x{j}")));
    header.extend(["y".to_string(), "best_y".to_string()]);
    w.write_record(&header)?;
    let mut best = f64::INFINITY;
    for (i, row) in x.rows().into_iter().enumerate() {
        best = best.min(y[i]);
        let mut rec = vec![iters[i].to_string()];
        rec.extend(row.iter().map(|v| v.to_string()));
        rec.push(y[i].to_string());
        rec.push(best.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_history_csv_file(path: &Path, iters: &[usize], x: &Array2<f64>, y: &[f64]) -> Result<(), ReportError> {
    write_history_csv(std::fs::File::create(path)?, iters, x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn history_csv_layout() {
        let mut buf = Vec::new();
        write_history_csv(&mut buf, &[0, 0, 1], &array![[1.0, 2.0], [0.5, -1.0], [0.0, 0.0]], &[5.0, 7.0, 0.25]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "iter,x0,x1,y,best_y\n0,1,2,5,5\n0,0.5,-1,7,5\n1,0,0,0.25,0.25\n");
    }

    #[test]
    fn history_csv_length_check() {
        assert!(write_history_csv(Vec::new(), &[0], &array![[1.0]], &[1.0, 2.0]).is_err());
    }
}
