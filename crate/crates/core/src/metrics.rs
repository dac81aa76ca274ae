use serde::{Deserialize, Serialize};

/// The measured axes of one run.
///
/// `peak_memory` counts elements held at once (buffers plus partial
/// solutions). `communication` counts elements moved from stream machines to
/// the coordinator, `wasted_communication` the subset of those discarded by
/// a prefix ladder. Reference solvers report zero rounds and communication.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub utility: f64,
    pub peak_memory: u64,
    pub queries: u64,
    pub adaptive_rounds: u64,
    pub communication: u64,
    pub wasted_communication: u64,
    pub wall_ms: u64,
}

impl RunMetrics {
    /// Every column except `wall_ms`, for reproducibility checks.
    pub fn deterministic_part(&self) -> (u64, u64, u64, u64, u64, u64) {
        (
            self.utility.to_bits(),
            self.peak_memory,
            self.queries,
            self.adaptive_rounds,
            self.communication,
            self.wasted_communication,
        )
    }
}
