//! Array-of-structures pair records: every record carries the target and
//! source particle tuples it needs, so a work item reads nothing outside
//! its own record.

use super::{VolumeReport, DEFAULT_BYTE_CAP};
use crate::domain::{InteractionPair, Tree};
use crate::error::{Error, Result};

/// Location and shape of one packed pair record.
#[derive(Clone, Copy, Debug)]
pub struct RecordMeta {
    pub offset: u64,
    pub len: u32,
    pub target_leaf: u32,
    pub source_leaf: u32,
    pub n_t: u32,
    pub n_s: u32,
    /// First output slot of this record; slots are (record, target) pairs.
    pub slot_start: u64,
}

/// Contiguous packed records plus batch boundaries. Address space:
/// `[records | out]`, out slots sized dim*8 per target tuple.
#[derive(Clone, Debug)]
pub struct RedundantBuffers {
    pub dim: usize,
    pub periodic: bool,
    pub bytes: Vec<u8>,
    pub records: Vec<RecordMeta>,
    /// Records per kernel launch.
    pub batch_size: usize,
    pub slot_count: u64,
}

pub(crate) const HEADER_BYTES: u64 = 16;

impl RedundantBuffers {
    pub fn tuple_bytes(dim: usize) -> u64 {
        (dim as u64 + 1) * 8
    }

    pub fn slot_bytes(&self) -> u64 {
        self.dim as u64 * 8
    }

    pub fn record_bytes(&self) -> u64 {
        self.bytes.len() as u64
    }

    pub fn out_base(&self) -> u64 {
        self.bytes.len() as u64
    }

    pub fn out_bytes(&self) -> u64 {
        self.slot_count * self.slot_bytes()
    }

    pub fn address_space_end(&self) -> u64 {
        self.out_base() + self.out_bytes()
    }

    pub fn launches(&self) -> u64 {
        (self.records.len() as u64).div_ceil(self.batch_size as u64)
    }

    /// Record index ranges, one per launch.
    pub fn batches(&self) -> impl Iterator<Item = std::ops::Range<usize>> + '_ {
        (0..self.launches() as usize).map(move |b| {
            let lo = b * self.batch_size;
            lo..((b + 1) * self.batch_size).min(self.records.len())
        })
    }

    #[inline]
    pub fn read_f64(&self, offset: u64) -> f64 {
        let o = offset as usize;
        f64::from_le_bytes(self.bytes[o..o + 8].try_into().unwrap())
    }

    #[inline]
    pub fn read_u32(&self, offset: u64) -> u32 {
        let o = offset as usize;
        u32::from_le_bytes(self.bytes[o..o + 4].try_into().unwrap())
    }

    /// Byte offset of a tuple inside a record: target tuples first.
    pub fn tuple_offset(&self, rec: &RecordMeta, tuple: u32) -> u64 {
        rec.offset + HEADER_BYTES + tuple as u64 * Self::tuple_bytes(self.dim)
    }

    /// Unpack one tuple (position, mass) for round-trip checks.
    pub fn unpack_tuple(&self, rec: &RecordMeta, tuple: u32) -> ([f64; 3], f64) {
        let base = self.tuple_offset(rec, tuple);
        let mut position = [0.0f64; 3];
        for (a, p) in position.iter_mut().enumerate().take(self.dim) {
            *p = self.read_f64(base + a as u64 * 8);
        }
        (position, self.read_f64(base + self.dim as u64 * 8))
    }
}

/// Pack one self-contained record per pair, batched `batch_size` records
/// per launch. A record larger than `byte_cap` cannot straddle a batch
/// and is rejected, naming the pair.
pub fn pack_redundant(
    pairs: &[InteractionPair],
    tree: &Tree,
    batch_size: usize,
    byte_cap: Option<u64>,
) -> Result<(RedundantBuffers, VolumeReport)> {
    if batch_size == 0 {
        return Err(Error::InvalidInput("batch_size must be >= 1".into()));
    }
    let cap = byte_cap.unwrap_or(DEFAULT_BYTE_CAP);
    let dim = tree.dim;
    let tuple = RedundantBuffers::tuple_bytes(dim);

    let mut bytes = Vec::new();
    let mut records = Vec::with_capacity(pairs.len());
    let mut slot_start = 0u64;

    for (i, pair) in pairs.iter().enumerate() {
        let t_range = tree.leaves[pair.target_leaf as usize].range;
        let s_range = tree.leaves[pair.source_leaf as usize].range;
        let n_t = t_range.1 - t_range.0;
        let n_s = s_range.1 - s_range.0;
        let len = HEADER_BYTES + (n_t + n_s) as u64 * tuple;
        if len > cap {
            return Err(Error::OversizedRecord {
                pair: i,
                bytes: len,
                cap,
            });
        }
        let offset = bytes.len() as u64;
        bytes.extend_from_slice(&pair.target_leaf.to_le_bytes());
        bytes.extend_from_slice(&pair.source_leaf.to_le_bytes());
        bytes.extend_from_slice(&n_t.to_le_bytes());
        bytes.extend_from_slice(&n_s.to_le_bytes());
        for range in [t_range, s_range] {
            for p in &tree.particles[range.0 as usize..range.1 as usize] {
                for a in 0..dim {
                    bytes.extend_from_slice(&p.position[a].to_le_bytes());
                }
                bytes.extend_from_slice(&p.mass.to_le_bytes());
            }
        }
        records.push(RecordMeta {
            offset,
            len: len as u32,
            target_leaf: pair.target_leaf,
            source_leaf: pair.source_leaf,
            n_t,
            n_s,
            slot_start,
        });
        slot_start += n_t as u64;
    }

    let buffers = RedundantBuffers {
        dim,
        periodic: tree.periodic,
        bytes,
        records,
        batch_size,
        slot_count: slot_start,
    };
    let n_out = tree.n_particles() as u64 * dim as u64 * 8;
    let report = VolumeReport {
        collect: buffers.record_bytes(),
        transfer: buffers.record_bytes() + buffers.out_bytes(),
        compute_resident: buffers.record_bytes() + buffers.out_bytes(),
        update: buffers.out_bytes() + n_out,
    };
    Ok((buffers, report))
}
