//! Search histories and their JSON-lines and CSV renderings.

use serde_json::json;

use crate::backends::SearchPoint;
use crate::decode::{point_from_json, point_to_json};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TrialError {
    pub kind: String,
    pub message: String,
}

impl TrialError {
    pub fn new(kind: impl Into<String>, message: impl Into<String>) -> Self {
        TrialError {
            kind: kind.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub index: usize,
    pub point: SearchPoint,
    pub loss: f64,
    pub error: Option<TrialError>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SearchHistory {
    pub trials: Vec<Trial>,
}

impl SearchHistory {
    pub fn new(trials: Vec<Trial>) -> Self {
        SearchHistory { trials }
    }

    /// The trial with the least loss; ties go to the earliest.
    pub fn best(&self) -> Option<&Trial> {
        self.trials
            .iter()
            .fold(None, |best: Option<&Trial>, t| match best {
                Some(b) if b.loss <= t.loss => Some(b),
                _ => Some(t),
            })
    }

    pub fn failed(&self) -> usize {
        self.trials.iter().filter(|t| t.error.is_some()).count()
    }

    /// Failed trials whose error is of `kind`.
    pub fn failed_with(&self, kind: &str) -> usize {
        self.trials
            .iter()
            .filter(|t| t.error.as_ref().is_some_and(|e| e.kind == kind))
            .count()
    }

    pub fn points(&self) -> Vec<&SearchPoint> {
        self.trials.iter().map(|t| &t.point).collect()
    }

    pub fn losses(&self) -> Vec<f64> {
        self.trials.iter().map(|t| t.loss).collect()
    }

    /// Least loss seen after each trial.
    pub fn best_so_far(&self) -> Vec<f64> {
        self.trials
            .iter()
            .scan(f64::INFINITY, |best, t| {
                *best = best.min(t.loss);
                Some(*best)
            })
            .collect()
    }

    /// One object per trial, then a summary line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for t in &self.trials {
            let mut line = json!({
                "trial": t.index,
                "point": point_to_json(&t.point),
                "loss": t.loss,
                "status": if t.error.is_some() { "error" } else { "ok" },
                "seconds": t.seconds,
            });
            if let Some(e) = &t.error {
                line["error"] = json!({"kind": e.kind, "message": e.message});
            }
            out.push_str(&line.to_string());
            out.push('\n');
        }
        let summary = match self.best() {
            Some(b) => json!({"summary": {
                "trials": self.trials.len(),
                "failed": self.failed(),
                "best_trial": b.index,
                "best_loss": b.loss,
                "best_point": point_to_json(&b.point),
            }}),
            None => json!({"summary": {"trials": 0, "failed": 0}}),
        };
        out.push_str(&summary.to_string());
        out.push('\n');
        out
    }

    /// `iteration,best_loss` with iterations counted from 1.
    pub fn convergence_csv(&self) -> String {
        let mut out = String::from("iteration,best_loss\n");
        for (i, b) in self.best_so_far().iter().enumerate() {
            out.push_str(&format!("{},{b}\n", i + 1));
        }
        out
    }
}

/// Reads the trial lines of a JSON-lines history; the summary is skipped.
pub fn parse_history(text: &str) -> Result<SearchHistory> {
    let mut trials = Vec::new();
    for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let at = |m: &str| Error::parse(format!("line {}", n + 1), m);
        let v: serde_json::Value = serde_json::from_str(line).map_err(|e| at(&e.to_string()))?;
        if v.get("summary").is_some() {
            continue;
        }
        let index = v["trial"].as_u64().ok_or_else(|| at("missing `trial`"))? as usize;
        let point = point_from_json(&v["point"]).map_err(|e| at(&e.to_string()))?;
        let loss = v["loss"].as_f64().ok_or_else(|| at("missing `loss`"))?;
        let seconds = v["seconds"].as_f64().unwrap_or(0.0);
        let error = v.get("error").map(|e| {
            TrialError::new(
                e["kind"].as_str().unwrap_or("other"),
                e["message"].as_str().unwrap_or_default(),
            )
        });
        trials.push(Trial {
            index,
            point,
            loss,
            error,
            seconds,
        });
    }
    Ok(SearchHistory::new(trials))
}
