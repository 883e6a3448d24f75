//! The two packed data layouts plus the shared-pattern table, with
//! byte-exact volume accounting.
//!
//! Indexing: per-field arrays with per-leaf neighbor index lists padded to
//! Max_E2 and a per-leaf particle-range table; threads gather scattered
//! data through indices. Redundant: self-contained pair records
//! duplicating target and source tuples so each work item reads one
//! contiguous block. Pattern: the precomputed pairwise weights of a
//! uniform 2-d box's E2 neighborhood, replicated block-level RF times.
//!
//! Closed-form byte formulas are evaluated alongside the measured counts
//! for comparison only; a few of their printed constants are suspect, so
//! byte counts are never asserted against them.

mod indexing;
mod pattern;
mod redundant;

pub use indexing::{pack_indexing, IndexingBuffers};
pub use pattern::{
    pack_dbim_samples, pack_pattern_redundant, PatternTable, SampleBuffers, PATTERN_ENTRY_BYTES,
    SAMPLE_TUPLE_BYTES,
};
pub use redundant::{pack_redundant, RecordMeta, RedundantBuffers};

/// Index padding sentinel; reads of sentinel entries are skipped.
pub const SENTINEL: u32 = u32::MAX;

/// Default per-batch byte cap standing in for device memory limits.
pub const DEFAULT_BYTE_CAP: u64 = 64 * 1024 * 1024;

/// Bytes moved per phase for one layout instance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct VolumeReport {
    pub collect: u64,
    pub transfer: u64,
    pub compute_resident: u64,
    pub update: u64,
}

/// A measured byte count next to the closed-form estimate it corresponds to.
#[derive(Clone, Copy, Debug)]
pub struct ClosedFormAudit {
    pub measured: u64,
    pub closed_form: f64,
    pub ratio: f64,
}

impl ClosedFormAudit {
    pub fn new(measured: u64, closed_form: f64) -> Self {
        ClosedFormAudit {
            measured,
            closed_form,
            ratio: measured as f64 / closed_form,
        }
    }
}

pub(crate) fn align8(x: u64) -> u64 {
    (x + 7) & !7
}
