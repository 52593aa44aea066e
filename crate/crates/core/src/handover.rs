//! Measurement reports, the A2-RSRP benchmark, forced single-shot handovers
//! and radio link failure detection.

use crate::error::Result;
use crate::radio::{sample_for, RadioSample};

/// Neighbor slots in every report and feature vector.
pub const NEIGHBOR_SLOTS: usize = 8;
/// Cells below this RSRP are not detectable.
pub const DETECTION_FLOOR_DBM: f64 = -140.0;
pub const SENTINEL: Measurement = Measurement {
    cell_id: 0,
    rsrp: -140.0,
    rsrq: -30.0,
};

/// Windows of consecutive low SINR that declare a radio link failure.
pub const RLF_WINDOWS: u32 = 5;
pub const RLF_SINR_DB: f64 = -6.0;
/// Outage windows before re-establishment after a radio link failure.
pub const REESTABLISH_WINDOWS: u32 = 2;
/// Consecutive reports the A2 condition must hold for.
pub const A2_REPORTS_TO_TRIGGER: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub cell_id: u32,
    pub rsrp: f64,
    pub rsrq: f64,
}

impl From<&RadioSample> for Measurement {
    fn from(s: &RadioSample) -> Self {
        Self {
            cell_id: s.cell_id,
            rsrp: s.rsrp,
            rsrq: s.rsrq,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementReport {
    pub serving: Measurement,
    /// Detectable neighbors, strongest first; never includes the serving cell.
    pub neighbors: Vec<Measurement>,
}

impl MeasurementReport {
    /// Neighbor entry for 1-based `rank`, sentinel when absent.
    pub fn slot(&self, rank: usize) -> Measurement {
        self.neighbors.get(rank - 1).copied().unwrap_or(SENTINEL)
    }
}

/// Strongest `max_neighbors` detectable non-serving cells, ties to the lower id.
pub fn build_report(
    radio: &[RadioSample],
    serving: u32,
    max_neighbors: usize,
) -> Result<MeasurementReport> {
    let serving = Measurement::from(sample_for(radio, serving)?);
    let mut neighbors: Vec<Measurement> = radio
        .iter()
        .filter(|s| s.cell_id != serving.cell_id && s.rsrp >= DETECTION_FLOOR_DBM)
        .map(Measurement::from)
        .collect();
    neighbors.sort_by(|a, b| b.rsrp.total_cmp(&a.rsrp).then(a.cell_id.cmp(&b.cell_id)));
    neighbors.truncate(max_neighbors.min(NEIGHBOR_SLOTS));
    Ok(MeasurementReport { serving, neighbors })
}

/// A2 entry condition with time-to-trigger.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct A2Trigger {
    consecutive: u32,
}

impl A2Trigger {
    /// Feeds one report; true once the serving RSRP has been below
    /// `threshold` for [`A2_REPORTS_TO_TRIGGER`] consecutive reports.
    pub fn observe(&mut self, report: &MeasurementReport, threshold: f64) -> bool {
        if report.serving.rsrp < threshold {
            self.consecutive += 1;
        } else {
            self.consecutive = 0;
        }
        self.consecutive >= A2_REPORTS_TO_TRIGGER
    }

    pub fn reset(&mut self) {
        self.consecutive = 0;
    }
}

/// Benchmark decision once the A2 trigger has fired: the strongest neighbor.
pub fn a2_rsrp_decide(report: &MeasurementReport, fired: bool) -> Option<u32> {
    fired
        .then(|| report.neighbors.first().map(|n| n.cell_id))
        .flatten()
}

/// Forced decision: the `k`-th strongest neighbor (best one if fewer than
/// `k` exist) at the first A2 firing, never again afterwards.
pub fn forced_decide(
    report: &MeasurementReport,
    k: usize,
    fired: bool,
    already_fired: bool,
) -> Option<u32> {
    if already_fired || !fired {
        return None;
    }
    report
        .neighbors
        .get(k - 1)
        .or_else(|| report.neighbors.first())
        .map(|n| n.cell_id)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HandoverPolicy {
    /// A2-RSRP: strongest neighbor whenever the A2 trigger fires.
    Benchmark,
    /// Single handover to the `k`-th neighbor at the first A2 firing.
    Forced(u8),
}

impl HandoverPolicy {
    /// Neighbor rank for forced campaigns, 0 otherwise.
    pub fn rank(&self) -> u8 {
        match self {
            HandoverPolicy::Forced(k) => *k,
            _ => 0,
        }
    }
}

/// Per-UE policy state across windows.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyState {
    pub policy: HandoverPolicy,
    trigger: A2Trigger,
    forced_done: bool,
}

impl PolicyState {
    pub fn new(policy: HandoverPolicy) -> Self {
        Self {
            policy,
            trigger: A2Trigger::default(),
            forced_done: false,
        }
    }

    /// Target cell to hand over to after this report, if any.
    pub fn decide(&mut self, report: &MeasurementReport, a2_threshold: f64) -> Option<u32> {
        let fired = self.trigger.observe(report, a2_threshold);
        let target = match self.policy {
            HandoverPolicy::Benchmark => a2_rsrp_decide(report, fired),
            HandoverPolicy::Forced(k) => {
                let t = forced_decide(report, k as usize, fired, self.forced_done);
                if fired {
                    self.forced_done = true;
                }
                t
            }
        };
        if target.is_some() {
            self.trigger.reset();
        }
        target
    }

    /// Clears the time-to-trigger after a change of serving cell.
    pub fn link_changed(&mut self) {
        self.trigger.reset();
    }
}

/// Counts consecutive windows of serving SINR below [`RLF_SINR_DB`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RlfMonitor {
    low_windows: u32,
}

impl RlfMonitor {
    /// Returns true when this window completes a radio link failure.
    pub fn rlf_check(&mut self, sinr_db: f64) -> bool {
        if sinr_db < RLF_SINR_DB {
            self.low_windows += 1;
        } else {
            self.low_windows = 0;
        }
        if self.low_windows >= RLF_WINDOWS {
            self.low_windows = 0;
            true
        } else {
            false
        }
    }

    pub fn reset(&mut self) {
        self.low_windows = 0;
    }
}
