//! Pattern-table kernel over the uniform-grid sample buffers: one logical
//! thread per target sample, weights looked up from the thread block's
//! assigned pattern copy.

use super::{ForceAccumulator, PairKernel, PhaseTimes};
use crate::cachesim::{AccessKind, MemoryTrace};
use crate::error::{Error, Result};
use crate::layouts::{PatternTable, SampleBuffers, PATTERN_ENTRY_BYTES, SENTINEL};

/// Run the pattern kernel. Thread blocks of `block_width` consecutive
/// threads read from pattern copy `block % rf`, which is how block-level
/// replication spreads accesses across copies. Launches: 1 (single grid
/// over all samples).
pub fn run_dbim(
    buffers: &SampleBuffers,
    kernel: &PairKernel,
    block_width: usize,
    trace_on: bool,
) -> Result<(ForceAccumulator, Option<MemoryTrace>, PhaseTimes)> {
    let table: &PatternTable = match kernel {
        PairKernel::Pattern { table } => table,
        PairKernel::Gravity { .. } => {
            return Err(Error::KernelMismatch(
                "gravity kernel runs on particle buffers, not sample buffers".into(),
            ))
        }
    };
    if table.t != buffers.t {
        return Err(Error::KernelMismatch(format!(
            "pattern table t={} does not match the tree t={}",
            table.t, buffers.t
        )));
    }
    let block_width = block_width.max(1);
    let n = buffers.n;
    let mut out = ForceAccumulator::zeros(n, 2);
    let mut trace = trace_on.then(|| MemoryTrace::new(n));
    let pattern_base = buffers.pattern_base();
    let copy_bytes = table.copy_bytes();
    let out_base = buffers.out_base(table.rf, copy_bytes);

    let start = std::time::Instant::now();
    for (leaf_id, &(lo, hi)) in buffers.ranges.iter().enumerate() {
        let slots = &buffers.slots[leaf_id * 9..(leaf_id + 1) * 9];
        for p in lo..hi {
            let thread = p as usize;
            let copy = (thread / block_width) % table.rf;
            let target_local = (p - lo) as usize;
            if let Some(tr) = trace.as_mut() {
                // own tuple, one contiguous 48-byte read
                tr.record(thread, p as u64 * 48, 48, AccessKind::Data);
            }
            let mut acc = [0.0f64; 2];
            for (slot, &nb) in slots.iter().enumerate() {
                if let Some(tr) = trace.as_mut() {
                    tr.record(
                        thread,
                        buffers.slot_base() + (leaf_id * 9 + slot) as u64 * 4,
                        4,
                        AccessKind::Index,
                    );
                }
                if nb == SENTINEL {
                    continue;
                }
                assert!(
                    (nb as usize) < buffers.ranges.len(),
                    "sentinel or corrupt slot index dereferenced"
                );
                let (slo, shi) = buffers.ranges[nb as usize];
                if let Some(tr) = trace.as_mut() {
                    tr.record(
                        thread,
                        buffers.range_base() + nb as u64 * 8,
                        8,
                        AccessKind::Index,
                    );
                }
                for q in slo..shi {
                    let source_local = (q - slo) as usize;
                    let idx = table.entry_index(target_local, slot, source_local);
                    if let Some(tr) = trace.as_mut() {
                        // source value: the complex part of the tuple
                        tr.record(thread, q as u64 * 48, 16, AccessKind::Data);
                        tr.record(
                            thread,
                            pattern_base
                                + copy as u64 * copy_bytes
                                + idx as u64 * PATTERN_ENTRY_BYTES,
                            PATTERN_ENTRY_BYTES as u8,
                            AccessKind::Data,
                        );
                    }
                    let w = table.value(copy, idx);
                    let vr = buffers.tuples[q as usize * 6];
                    let vi = buffers.tuples[q as usize * 6 + 1];
                    acc[0] += w[0] * vr - w[1] * vi;
                    acc[1] += w[0] * vi + w[1] * vr;
                }
            }
            out.values[thread][0] = acc[0];
            out.values[thread][1] = acc[1];
            if let Some(tr) = trace.as_mut() {
                tr.record(thread, out_base + p as u64 * 16, 16, AccessKind::Data);
            }
        }
    }
    let times = PhaseTimes {
        compute: start.elapsed().as_secs_f64(),
        launches: 1,
        ..PhaseTimes::default()
    };
    Ok((out, trace, times))
}
