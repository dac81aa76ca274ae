use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepKind {
    Filter,
    Single,
    Batch,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Decision {
    /// Filter pass; ids and gains of the dropped candidates.
    Filtered { discarded: Vec<(u64, f64)> },
    Accept,
    /// Single sample below `(1−ε)τ`; back to the filter.
    Reject { id: u64 },
    /// Batch kept but its average failed; back to the filter.
    Break,
    /// Budget reached.
    Complete,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    pub step: StepKind,
    /// Survivors after a filter, otherwise the number of elements added or tested.
    pub size: usize,
    pub avg_gain: Option<f64>,
    pub decision: Decision,
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let step = match self.step {
            StepKind::Filter => "filter",
            StepKind::Single => "single",
            StepKind::Batch => "batch",
        };
        write!(f, "iter={} step={} t={} avg=", self.iteration, step, self.size)?;
        match self.avg_gain {
            Some(g) => write!(f, "{g:.17e}")?,
            None => f.write_str("-")?,
        }
        match &self.decision {
            Decision::Filtered { discarded } => write!(f, " decision=filtered:{}", discarded.len()),
            Decision::Accept => f.write_str(" decision=accept"),
            Decision::Reject { id } => write!(f, " decision=reject:{id}"),
            Decision::Break => f.write_str(" decision=break"),
            Decision::Complete => f.write_str(" decision=complete"),
        }
    }
}
