use std::path::Path;

use crate::{Error, Result};

const HEADER: &str = "step,epoch,train_loss,test_acc,cumulative_ms";

/// One per-step record. `test_acc` is only present on steps where the test
/// set was evaluated; `cumulative_ms` is zero when timing is disabled.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: u64,
    pub epoch: u64,
    pub train_loss: f64,
    pub test_acc: Option<f64>,
    pub cumulative_ms: u64,
}

/// A training run: ordered `key=value` metadata, per-step records with
/// strictly increasing step numbers, and the step at which the run diverged
/// (first non-finite loss), if it did. Records stop at divergence.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainLog {
    pub metadata: Vec<(String, String)>,
    pub records: Vec<StepRecord>,
    pub diverged_at: Option<u64>,
}

impl TrainLog {
    pub fn push_metadata(&mut self, key: &str, value: impl ToString) {
        self.metadata.push((key.to_string(), value.to_string()));
    }

    /// Appends a record; a non-finite loss marks the run diverged instead
    /// and is not recorded. Returns whether the run is still live.
    pub fn push_record(&mut self, record: StepRecord) -> bool {
        if self.diverged_at.is_some() {
            return false;
        }
        if !record.train_loss.is_finite() {
            self.diverged_at = Some(record.step);
            return false;
        }
        debug_assert!(self
            .records
            .last()
            .is_none_or(|last| last.step < record.step));
        self.records.push(record);
        true
    }

    pub fn final_loss(&self) -> Option<f64> {
        self.records.last().map(|r| r.train_loss)
    }
}

/// Serializes a log: `# key=value` comment lines, the fixed header, one data
/// row per record. Floats use the shortest lossless decimal form, so equal
/// runs serialize to identical bytes.
pub fn write_csv(log: &TrainLog, path: &Path) -> Result<()> {
    std::fs::write(path, to_csv_string(log))?;
    Ok(())
}

pub fn to_csv_string(log: &TrainLog) -> String {
    let mut out = String::new();
    for (k, v) in &log.metadata {
        out.push_str(&format!("# {k}={v}\n"));
    }
    if let Some(step) = log.diverged_at {
        out.push_str(&format!("# diverged_at={step}\n"));
    }
    out.push_str(HEADER);
    out.push('\n');
    for r in &log.records {
        let acc = r.test_acc.map(|a| a.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.step, r.epoch, r.train_loss, acc, r.cumulative_ms
        ));
    }
    out
}

pub fn read_csv(path: &Path) -> Result<TrainLog> {
    let text = std::fs::read_to_string(path)?;
    from_csv_str(&text)
}

pub fn from_csv_str(text: &str) -> Result<TrainLog> {
    let mut log = TrainLog::default();
    let mut saw_header = false;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            let (key, value) = comment.split_once('=').ok_or(Error::Parse {
                line: line_no,
                details: format!("metadata line '{comment}' is not key=value"),
            })?;
            if key == "diverged_at" {
                log.diverged_at = Some(parse_field(value, "diverged_at", line_no)?);
            } else {
                log.metadata.push((key.to_string(), value.to_string()));
            }
            continue;
        }
        if !saw_header {
            if line != HEADER {
                return Err(Error::Parse {
                    line: line_no,
                    details: format!("expected header '{HEADER}', found '{line}'"),
                });
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::Parse {
                line: line_no,
                details: format!("expected 5 fields, found {}", fields.len()),
            });
        }
        let record = StepRecord {
            step: parse_field(fields[0], "step", line_no)?,
            epoch: parse_field(fields[1], "epoch", line_no)?,
            train_loss: parse_field(fields[2], "train_loss", line_no)?,
            test_acc: if fields[3].is_empty() {
                None
            } else {
                Some(parse_field(fields[3], "test_acc", line_no)?)
            },
            cumulative_ms: parse_field(fields[4], "cumulative_ms", line_no)?,
        };
        if let Some(last) = log.records.last() {
            if record.step <= last.step {
                return Err(Error::Parse {
                    line: line_no,
                    details: format!("step {} does not increase past {}", record.step, last.step),
                });
            }
        }
        log.records.push(record);
    }
    if !saw_header {
        return Err(Error::Parse {
            line: text.lines().count() + 1,
            details: "missing header".into(),
        });
    }
    Ok(log)
}

fn parse_field<T: std::str::FromStr>(token: &str, what: &str, line: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    token.parse().map_err(|e| Error::Parse {
        line,
        details: format!("bad {what} '{token}': {e}"),
    })
}
