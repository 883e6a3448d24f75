//! Shared interaction pattern of a uniform 2-d box: all 9t^2 pairwise
//! weights between a box's samples and the samples of its 3x3 (E2)
//! neighborhood, replicated RF times at block level. Also the
//! accompanying 48-byte-per-unknown sample buffers.

use super::{align8, VolumeReport, SENTINEL};
use crate::domain::{Tree, TreeMode};
use crate::error::{Error, Result};

/// Complex weights for every (target sample, neighbor slot, source sample)
/// combination of the canonical box. One copy is 144 t^2 bytes; all `rf`
/// copies are bit-identical, so a single copy backs every logical copy.
#[derive(Clone, Debug)]
pub struct PatternTable {
    pub t: usize,
    pub rf: usize,
    /// 9 t^2 complex entries, index = target*9t + slot*t + source.
    pub weights: Vec<[f64; 2]>,
}

pub const PATTERN_ENTRY_BYTES: u64 = 16;

impl PatternTable {
    pub fn side(&self) -> usize {
        (self.t as f64).sqrt().round() as usize
    }

    pub fn copy_bytes(&self) -> u64 {
        PATTERN_ENTRY_BYTES * self.weights.len() as u64
    }

    pub fn total_bytes(&self) -> u64 {
        self.copy_bytes() * self.rf as u64
    }

    #[inline]
    pub fn entry_index(&self, target: usize, slot: usize, source: usize) -> usize {
        target * 9 * self.t + slot * self.t + source
    }

    /// Value as seen through logical copy `copy`; copies are identical.
    #[inline]
    pub fn value(&self, copy: usize, index: usize) -> [f64; 2] {
        debug_assert!(copy < self.rf);
        self.weights[index]
    }

    /// Materialize the `rf` copies as raw bytes, for bit-identity checks.
    pub fn materialize_copies(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.total_bytes() as usize);
        for _ in 0..self.rf {
            for w in &self.weights {
                out.extend_from_slice(&w[0].to_le_bytes());
                out.extend_from_slice(&w[1].to_le_bytes());
            }
        }
        out
    }
}

/// Deterministic oscillatory kernel over the canonical unit box; the self
/// entry (zero displacement) is zero.
fn pattern_weight(side: usize, target: usize, slot: usize, source: usize) -> [f64; 2] {
    let (ix, iy) = (target % side, target / side);
    let (jx, jy) = (source % side, source / side);
    let (ox, oy) = ((slot % 3) as i64 - 1, (slot / 3) as i64 - 1);
    let h = 1.0 / side as f64;
    let dx = ((jx as i64 + ox * side as i64) - ix as i64) as f64 * h;
    let dy = ((jy as i64 + oy * side as i64) - iy as i64) as f64 * h;
    let r = (dx * dx + dy * dy).sqrt();
    if r == 0.0 {
        return [0.0, 0.0];
    }
    let k = std::f64::consts::TAU;
    let denom = r.max(h / 2.0);
    [(k * r).cos() / denom, (k * r).sin() / denom]
}

/// Build the pattern table with `rf` logical copies.
/// Bytes are exactly rf * 144 t^2.
pub fn pack_pattern_redundant(t: usize, rf: usize) -> Result<(PatternTable, VolumeReport)> {
    if rf == 0 {
        return Err(Error::InvalidInput("rf must be >= 1".into()));
    }
    if t == 0 || !t.is_power_of_two() {
        return Err(Error::PatternTableShape(t));
    }
    let side = (t as f64).sqrt().round() as usize;
    if side * side != t {
        return Err(Error::PatternTableShape(t));
    }
    let mut weights = Vec::with_capacity(9 * t * t);
    for target in 0..t {
        for slot in 0..9 {
            for source in 0..t {
                weights.push(pattern_weight(side, target, slot, source));
            }
        }
    }
    let table = PatternTable { t, rf, weights };
    let bytes = table.total_bytes();
    let report = VolumeReport {
        collect: bytes,
        transfer: bytes,
        compute_resident: bytes,
        update: 0,
    };
    Ok((table, report))
}

/// Sample buffers for the uniform-grid workload: one 48-byte tuple per
/// unknown (complex value, coordinate, auxiliary pair), per-leaf ranges
/// and the 3x3 neighbor-slot table. Address space:
/// `[tuples | ranges | slots | pattern copies | out]`.
#[derive(Clone, Debug)]
pub struct SampleBuffers {
    pub n: usize,
    pub t: usize,
    pub boxes_per_axis: usize,
    pub periodic: bool,
    /// 6 f64 per sample: value re/im, x, y, aux0, aux1.
    pub tuples: Vec<f64>,
    pub ranges: Vec<(u32, u32)>,
    /// 9 entries per leaf, row-major over (oy, ox); SENTINEL when clipped.
    pub slots: Vec<u32>,
}

pub const SAMPLE_TUPLE_BYTES: u64 = 48;

impl SampleBuffers {
    pub fn n_leaves(&self) -> usize {
        self.ranges.len()
    }

    pub fn tuple_bytes(&self) -> u64 {
        SAMPLE_TUPLE_BYTES * self.n as u64
    }

    pub fn range_table_bytes(&self) -> u64 {
        8 * self.ranges.len() as u64
    }

    pub fn slot_table_bytes(&self) -> u64 {
        4 * self.slots.len() as u64
    }

    pub fn buffer_bytes(&self) -> u64 {
        self.tuple_bytes() + self.range_table_bytes() + self.slot_table_bytes()
    }

    pub fn out_bytes(&self) -> u64 {
        16 * self.n as u64
    }

    pub fn tuple_base(&self) -> u64 {
        0
    }
    pub fn range_base(&self) -> u64 {
        self.tuple_bytes()
    }
    pub fn slot_base(&self) -> u64 {
        self.range_base() + self.range_table_bytes()
    }
    pub fn pattern_base(&self) -> u64 {
        align8(self.slot_base() + self.slot_table_bytes())
    }
    pub fn out_base(&self, pattern_copies: usize, copy_bytes: u64) -> u64 {
        self.pattern_base() + pattern_copies as u64 * copy_bytes
    }
}

/// Pack a uniform 2-d tree into sample buffers. The report's transfer
/// covers the unknowns in and results out; pattern-copy volume is added
/// by the caller for the layout that actually moves copies.
pub fn pack_dbim_samples(tree: &Tree) -> Result<(SampleBuffers, VolumeReport)> {
    if tree.mode != TreeMode::Uniform || tree.dim != 2 {
        return Err(Error::InvalidInput(
            "sample buffers require a uniform 2-d tree".into(),
        ));
    }
    let b = tree.boxes_per_axis as i64;
    let mut tuples = Vec::with_capacity(6 * tree.n_particles());
    for p in &tree.particles {
        tuples.extend_from_slice(&[p.mass, 0.0, p.position[0], p.position[1], 0.0, 0.0]);
    }
    let mut slots = Vec::with_capacity(9 * tree.n_leaves());
    for leaf in &tree.leaves {
        let (bx, by) = (leaf.box_id as i64 % b, leaf.box_id as i64 / b);
        for oy in -1i64..=1 {
            for ox in -1i64..=1 {
                let (mut cx, mut cy) = (bx + ox, by + oy);
                let inside = (0..b).contains(&cx) && (0..b).contains(&cy);
                if !inside {
                    if tree.periodic {
                        cx = cx.rem_euclid(b);
                        cy = cy.rem_euclid(b);
                    } else {
                        slots.push(SENTINEL);
                        continue;
                    }
                }
                slots.push((cy * b + cx) as u32);
            }
        }
    }
    let buffers = SampleBuffers {
        n: tree.n_particles(),
        t: tree.t,
        boxes_per_axis: tree.boxes_per_axis,
        periodic: tree.periodic,
        tuples,
        ranges: tree.leaves.iter().map(|l| l.range).collect(),
        slots,
    };
    let report = VolumeReport {
        collect: buffers.buffer_bytes(),
        transfer: buffers.tuple_bytes() + buffers.out_bytes(),
        compute_resident: buffers.buffer_bytes() + buffers.out_bytes(),
        update: 2 * buffers.out_bytes(),
    };
    Ok((buffers, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::build_uniform_tree;

    #[test]
    fn pattern_volume_golden_values() {
        // one copy is 144 t^2 bytes; rf copies scale it linearly
        let (table, report) = pack_pattern_redundant(64, 2).unwrap();
        assert_eq!(table.copy_bytes(), 144 * 64 * 64);
        assert_eq!(table.total_bytes(), 1_179_648); // = 288 t^2
        assert_eq!(report.transfer, 1_179_648);
        let (table, _) = pack_pattern_redundant(16, 2).unwrap();
        assert_eq!(table.copy_bytes(), 144 * 16 * 16);
        assert_eq!(table.total_bytes(), 2 * 144 * 256);
        let (one, _) = pack_pattern_redundant(16, 1).unwrap();
        assert_eq!(one.total_bytes(), one.copy_bytes());
    }

    #[test]
    fn copies_are_bit_identical() {
        let (table, _) = pack_pattern_redundant(16, 3).unwrap();
        let bytes = table.materialize_copies();
        let copy = table.copy_bytes() as usize;
        assert_eq!(bytes.len(), 3 * copy);
        assert_eq!(&bytes[0..copy], &bytes[copy..2 * copy]);
        assert_eq!(&bytes[0..copy], &bytes[2 * copy..]);
    }

    #[test]
    fn rejects_non_square_t() {
        assert!(pack_pattern_redundant(8, 2).is_err());
        assert!(pack_pattern_redundant(0, 2).is_err());
        assert!(pack_pattern_redundant(64, 0).is_err());
    }

    #[test]
    fn self_entry_is_zero_and_entries_are_finite() {
        let (table, _) = pack_pattern_redundant(16, 1).unwrap();
        for i in 0..16 {
            // slot 4 is the box itself
            assert_eq!(table.value(0, table.entry_index(i, 4, i)), [0.0, 0.0]);
        }
        assert!(table.weights.iter().all(|w| w[0].is_finite() && w[1].is_finite()));
    }

    #[test]
    fn sample_slot_table_wraps_or_clips() {
        let tree = build_uniform_tree(64, 1, false).unwrap(); // 2x2 boxes
        let (bufs, _) = pack_dbim_samples(&tree).unwrap();
        assert_eq!(bufs.slots.len(), 36);
        // corner box keeps only the 2x2 in-bounds block
        let clipped = bufs.slots[0..9].iter().filter(|&&s| s == SENTINEL).count();
        assert_eq!(clipped, 5);

        let tree = build_uniform_tree(64, 1, true).unwrap();
        let (bufs, _) = pack_dbim_samples(&tree).unwrap();
        assert!(bufs.slots.iter().all(|&s| s != SENTINEL));
    }

    #[test]
    fn transfer_is_48_bytes_per_unknown_plus_results() {
        let tree = build_uniform_tree(1024, 2, false).unwrap();
        let (bufs, report) = pack_dbim_samples(&tree).unwrap();
        assert_eq!(bufs.tuple_bytes(), 48 * 1024);
        assert_eq!(report.transfer, 48 * 1024 + 16 * 1024);
    }
}
