//! JSON Lines run log. One event per objective call plus bookkeeping events.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::ReportError;

const FLUSH_EVERY: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    DesignEval,
    SeqEval,
    Refit,
    Restart,
    Ocba,
    Done,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEvent {
    pub kind: EventKind,
    pub iter: usize,
    /// Evaluated point in natural scale, absent for bookkeeping events.
    pub x: Option<Vec<f64>>,
    pub y: Option<f64>,
    pub best_y: Option<f64>,
    pub success_rate: f64,
    pub t_unix_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mo_raw: Option<Vec<f64>>,
}

impl RunEvent {
    pub fn new(kind: EventKind, iter: usize) -> Self {
        Self {
            kind,
            iter,
            x: None,
            y: None,
            best_y: None,
            success_rate: 0.0,
            t_unix_ms: 0,
            mo_raw: None,
        }
    }
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

/// Buffered single-writer event log. Timestamps are forced non-decreasing.
pub struct EventLog {
    out: BufWriter<File>,
    written: usize,
    last_t: u64,
}

impl EventLog {
    pub fn create(path: &Path) -> Result<Self, ReportError> {
        Ok(Self {
            out: BufWriter::new(File::create(path)?),
            written: 0,
            last_t: 0,
        })
    }

    /// Appends `event`, stamping it with the current time unless it already
    /// carries a later one.
    pub fn write(&mut self, mut event: RunEvent) -> Result<(), ReportError> {
        event.t_unix_ms = event.t_unix_ms.max(now_ms()).max(self.last_t);
        self.last_t = event.t_unix_ms;
        serde_json::to_writer(&mut self.out, &event)?;
        self.out.write_all(b"\n")?;
        self.written += 1;
        if self.written.is_multiple_of(FLUSH_EVERY) || event.kind == EventKind::Done {
            self.out.flush()?;
        }
        Ok(())
    }

    pub fn written(&self) -> usize {
        self.written
    }

    pub fn flush(&mut self) -> Result<(), ReportError> {
        self.out.flush()?;
        Ok(())
    }
}

/// Reads a log written by [`EventLog`]. A final line that fails to parse is
/// treated as a crash-truncated write and dropped; any other bad line is an
/// error.
pub fn read_events(path: &Path) -> Result<Vec<RunEvent>, ReportError> {
    let reader = BufReader::new(File::open(path)?);
    let lines: Vec<String> = reader.lines().collect::<Result<_, _>>()?;
    let last = lines.iter().rposition(|l| !l.trim().is_empty());
    let mut events = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<RunEvent>(line) {
            Ok(ev) => events.push(ev),
            Err(_) if Some(i) == last => break,
            Err(e) => {
                return Err(ReportError::MalformedLine {
                    line: i + 1,
                    message: e.to_string(),
                })
            }
        }
    }
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize) -> Vec<RunEvent> {
        (0..n)
            .map(|i| RunEvent {
                kind: if i + 1 == n { EventKind::Done } else { EventKind::SeqEval },
                iter: i,
                x: Some(vec![i as f64, -0.5]),
                y: Some(1.0 / (i + 1) as f64),
                best_y: Some(0.1),
                success_rate: 0.25,
                t_unix_ms: 0,
                mo_raw: (i % 2 == 0).then(|| vec![1.0, 2.0]),
            })
            .collect()
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.jsonl");
        let mut log = EventLog::create(&path).unwrap();
        for ev in sample(250) {
            log.write(ev).unwrap();
        }
        drop(log);
        let back = read_events(&path).unwrap();
        assert_eq!(back.len(), 250);
        let times: Vec<u64> = back.iter().map(|e| e.t_unix_ms).collect();
        assert!(times.windows(2).all(|w| w[0] <= w[1]));
        for (a, b) in back.iter().zip(sample(250)) {
            assert_eq!(RunEvent { t_unix_ms: 0, ..a.clone() }, b);
        }
    }

    #[test]
    fn schema_field_names() {
        let mut ev = RunEvent::new(EventKind::Refit, 3);
        ev.best_y = Some(2.0);
        let v: serde_json::Value = serde_json::to_value(&ev).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(|s| s.as_str()).collect();
        for k in ["kind", "iter", "x", "y", "best_y", "success_rate", "t_unix_ms"] {
            assert!(keys.contains(&k), "{k}");
        }
        assert!(!keys.contains(&"mo_raw"));
        assert_eq!(v["kind"], "refit");
    }

    #[test]
    fn truncated_tail_is_dropped_but_middle_garbage_is_not() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.jsonl");
        let good = serde_json::to_string(&sample(2)[0]).unwrap();
        std::fs::write(&path, format!("{good}\n{good}\n{}", &good[..good.len() / 2])).unwrap();
        assert_eq!(read_events(&path).unwrap().len(), 2);
        std::fs::write(&path, format!("{good}\nnot json\n{good}\n")).unwrap();
        assert!(matches!(read_events(&path), Err(ReportError::MalformedLine { line: 2, .. })));
    }
}
