//! Kernel execution over logical threads in both layouts, memory-trace
//! recording, reduction of duplicated partial results, and wall-clock
//! phase timing.

mod dbim;
mod indexing;
mod oracle;
mod phases;
mod redundant;

pub use dbim::run_dbim;
pub use indexing::run_p2p_indexing;
pub use oracle::{brute_force_oracle, brute_force_pattern_oracle};
pub use phases::{
    measure_once, measure_phases, median_phase_times, oracle_forces, trace_run, Layout,
    Measurement, Scenario,
};
pub use redundant::{reduce_partials, run_p2p_redundant};

use crate::layouts::PatternTable;

/// Interaction kernel. Gravity with zero softening is singular at zero
/// separation: coincident interacting particles are rejected. The pattern
/// kernel needs a table matching the tree's samples-per-box.
#[derive(Clone, Copy, Debug)]
pub enum PairKernel<'a> {
    Gravity { softening: f64 },
    Pattern { table: &'a PatternTable },
}

/// Per-particle accumulated force (or complex field value in pattern
/// mode, stored in the first two components).
#[derive(Clone, Debug, PartialEq)]
pub struct ForceAccumulator {
    pub comps: usize,
    pub values: Vec<[f64; 3]>,
}

impl ForceAccumulator {
    pub fn zeros(n: usize, comps: usize) -> Self {
        ForceAccumulator {
            comps,
            values: vec![[0.0; 3]; n],
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .flat_map(|v| v.iter().map(|x| x.abs()))
            .fold(0.0, f64::max)
    }

    /// Largest per-component deviation divided by the larger of the two
    /// maxima: the scale-relative disagreement of two force fields.
    pub fn relative_error(&self, other: &ForceAccumulator) -> f64 {
        assert_eq!(self.values.len(), other.values.len());
        let scale = self.max_abs().max(other.max_abs()).max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        for (a, b) in self.values.iter().zip(other.values.iter()) {
            for c in 0..3 {
                worst = worst.max((a[c] - b[c]).abs());
            }
        }
        worst / scale
    }

    /// FNV-1a over the component bit patterns; a determinism fingerprint.
    pub fn checksum(&self) -> u64 {
        let mut h = 0xcbf29ce484222325u64;
        for v in &self.values {
            for c in 0..self.comps {
                for byte in v[c].to_le_bytes() {
                    h ^= byte as u64;
                    h = h.wrapping_mul(0x100000001b3);
                }
            }
        }
        h
    }
}

/// Per-record output slots: one contribution per target tuple per record,
/// no two records sharing a slot.
#[derive(Clone, Debug)]
pub struct PartialResults {
    pub comps: usize,
    pub records: Vec<RecordPartial>,
}

#[derive(Clone, Debug)]
pub struct RecordPartial {
    pub record: u32,
    pub values: Vec<[f64; 3]>,
}

impl PartialResults {
    pub fn slot_count(&self) -> usize {
        self.records.iter().map(|r| r.values.len()).sum()
    }
}

/// Maps each record's output slots to target particle ids (a contiguous
/// id range, since records pack whole leaves).
#[derive(Clone, Debug, Default)]
pub struct SlotMap {
    pub per_record: Vec<(u32, u32)>,
}

impl SlotMap {
    pub fn from_buffers(buffers: &crate::layouts::RedundantBuffers, tree: &crate::domain::Tree) -> Self {
        SlotMap {
            per_record: buffers
                .records
                .iter()
                .map(|r| tree.leaves[r.target_leaf as usize].range)
                .collect(),
        }
    }
}

/// Wall-clock seconds of the four phases plus the launch count.
#[derive(Clone, Copy, Debug, Default)]
pub struct PhaseTimes {
    pub collect: f64,
    pub transfer: f64,
    pub compute: f64,
    pub update: f64,
    pub launches: u64,
}

impl PhaseTimes {
    pub fn total(&self) -> f64 {
        self.collect + self.transfer + self.compute + self.update
    }
}
