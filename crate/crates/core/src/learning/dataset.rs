use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::LearningError;

pub const MIN_TRAIN_ROWS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    /// `next_state - state`
    pub delta: Vec<f64>,
    pub split: Split,
}

/// Logged plant transitions. CSV layout: `s0..s{n-1}, a0..a{m-1},
/// d0..d{n-1}, split`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionDataset {
    pub state_dim: usize,
    pub action_dim: usize,
    pub rows: Vec<Transition>,
}

impl TransitionDataset {
    pub fn new(state_dim: usize, action_dim: usize) -> Self {
        Self { state_dim, action_dim, rows: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn push(&mut self, t: Transition) {
        self.rows.push(t);
    }

    pub fn split(&self, which: Split) -> impl Iterator<Item = &Transition> {
        self.rows.iter().filter(move |r| r.split == which)
    }

    pub fn validate(&self) -> Result<(), LearningError> {
        for (i, r) in self.rows.iter().enumerate() {
            if r.state.len() != self.state_dim || r.delta.len() != self.state_dim || r.action.len() != self.action_dim {
                return Err(LearningError::Dataset(format!("row {i} has wrong dimensions")));
            }
            if r.state.iter().chain(&r.action).chain(&r.delta).any(|v| !v.is_finite()) {
                return Err(LearningError::Dataset(format!("row {i} contains a non-finite value")));
            }
        }
        Ok(())
    }

    /// Checks the preconditions for training.
    pub fn validate_for_training(&self) -> Result<(), LearningError> {
        self.validate()?;
        if self.len() < MIN_TRAIN_ROWS {
            return Err(LearningError::Dataset(format!(
                "{} rows, at least {MIN_TRAIN_ROWS} required",
                self.len()
            )));
        }
        if self.split(Split::Train).next().is_none() || self.split(Split::Validation).next().is_none() {
            return Err(LearningError::Dataset("need both train and validation rows".into()));
        }
        Ok(())
    }

    fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = (0..self.state_dim).map(|i| format!("s{i}")).collect();
        h.extend((0..self.action_dim).map(|i| format!("a{i}")));
        h.extend((0..self.state_dim).map(|i| format!("d{i}")));
        h.push("split".into());
        h
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), LearningError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(self.header())?;
        for r in &self.rows {
            let mut rec: Vec<String> =
                r.state.iter().chain(&r.action).chain(&r.delta).map(|v| v.to_string()).collect();
            rec.push(match r.split {
                Split::Train => "train".into(),
                Split::Validation => "validation".into(),
            });
            w.write_record(rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self, LearningError> {
        let mut r = csv::Reader::from_reader(reader);
        let headers = r.headers()?.clone();
        let count = |p: char| headers.iter().filter(|h| h.starts_with(p) && h[1..].parse::<usize>().is_ok()).count();
        let (n, m) = (count('s'), count('a'));
        let mut ds = Self::new(n, m);
        if headers.len() != 2 * n + m + 1 || count('d') != n {
            return Err(LearningError::Dataset(format!("unexpected header {headers:?}")));
        }
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let vals: Result<Vec<f64>, _> = rec.iter().take(2 * n + m).map(str::parse::<f64>).collect();
            let vals = vals.map_err(|e| LearningError::Dataset(format!("row {i}: {e}")))?;
            let split = match rec.get(2 * n + m) {
                Some("train") => Split::Train,
                Some("validation") => Split::Validation,
                other => return Err(LearningError::Dataset(format!("row {i}: bad split {other:?}"))),
            };
            ds.push(Transition {
                state: vals[..n].to_vec(),
                action: vals[n..n + m].to_vec(),
                delta: vals[n + m..].to_vec(),
                split,
            });
        }
        ds.validate()?;
        Ok(ds)
    }
}
