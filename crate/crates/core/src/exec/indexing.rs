//! Gathering kernel over the indexing layout: one logical thread per
//! target particle, reading neighbor indices first and particle fields
//! through them.

use super::{ForceAccumulator, PairKernel, PhaseTimes};
use crate::cachesim::{AccessKind, MemoryTrace};
use crate::error::{Error, Result};
use crate::layouts::{IndexingBuffers, SENTINEL};

#[inline]
fn min_image(mut d: f64) -> f64 {
    d -= d.round();
    d
}

/// Run the pair kernel, one thread per target particle. Returns forces,
/// the memory trace when requested, and compute time with the launch
/// count (one launch per interaction kind present).
pub fn run_p2p_indexing(
    buffers: &IndexingBuffers,
    kernel: &PairKernel,
    trace_on: bool,
) -> Result<(ForceAccumulator, Option<MemoryTrace>, PhaseTimes)> {
    let softening = match kernel {
        PairKernel::Gravity { softening } => *softening,
        PairKernel::Pattern { .. } => {
            return Err(Error::KernelMismatch(
                "pattern kernel runs on sample buffers, not the particle SoA".into(),
            ))
        }
    };
    let eps2 = softening * softening;
    let dim = buffers.dim;
    let periodic = buffers.periodic;
    let n = buffers.n;
    let mut forces = ForceAccumulator::zeros(n, dim);
    let mut trace = trace_on.then(|| MemoryTrace::new(n));

    let start = std::time::Instant::now();
    for (leaf_id, &(lo, hi)) in buffers.ranges.iter().enumerate() {
        let row = &buffers.neighbors[leaf_id * buffers.max_e2..(leaf_id + 1) * buffers.max_e2];
        for p in lo..hi {
            let thread = p as usize;
            if let Some(tr) = trace.as_mut() {
                // own tuple: one read per field array
                tr.record(thread, buffers.x_base() + 8 * p as u64, 8, AccessKind::Data);
                tr.record(thread, buffers.y_base() + 8 * p as u64, 8, AccessKind::Data);
                if dim == 3 {
                    tr.record(thread, buffers.z_base() + 8 * p as u64, 8, AccessKind::Data);
                }
                tr.record(thread, buffers.mass_base() + 8 * p as u64, 8, AccessKind::Data);
            }
            let tp = [
                buffers.x[thread],
                buffers.y[thread],
                buffers.z[thread],
            ];
            let tm = buffers.mass[thread];
            let mut acc = [0.0f64; 3];

            for (slot, &nb) in row.iter().enumerate() {
                if let Some(tr) = trace.as_mut() {
                    // the padded row is read in full, sentinels included
                    tr.record(
                        thread,
                        buffers.neighbor_base() + (leaf_id * buffers.max_e2 + slot) as u64 * 4,
                        4,
                        AccessKind::Index,
                    );
                }
                if nb == SENTINEL {
                    continue;
                }
                assert!(
                    (nb as usize) < buffers.ranges.len(),
                    "sentinel or corrupt neighbor index dereferenced"
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
                    if q == p {
                        continue;
                    }
                    let qi = q as usize;
                    if let Some(tr) = trace.as_mut() {
                        tr.record(thread, buffers.x_base() + 8 * q as u64, 8, AccessKind::Data);
                        tr.record(thread, buffers.y_base() + 8 * q as u64, 8, AccessKind::Data);
                        if dim == 3 {
                            tr.record(thread, buffers.z_base() + 8 * q as u64, 8, AccessKind::Data);
                        }
                        tr.record(thread, buffers.mass_base() + 8 * q as u64, 8, AccessKind::Data);
                    }
                    let mut d = [
                        buffers.x[qi] - tp[0],
                        buffers.y[qi] - tp[1],
                        buffers.z[qi] - tp[2],
                    ];
                    if periodic {
                        for dc in d.iter_mut().take(dim) {
                            *dc = min_image(*dc);
                        }
                    }
                    let r2: f64 = d[..dim].iter().map(|x| x * x).sum();
                    if r2 == 0.0 && eps2 == 0.0 {
                        return Err(Error::CoincidentParticles);
                    }
                    let inv = (r2 + eps2).powf(-1.5) * tm * buffers.mass[qi];
                    for a in 0..dim {
                        acc[a] += inv * d[a];
                    }
                }
            }
            forces.values[thread] = acc;
            if let Some(tr) = trace.as_mut() {
                tr.record(
                    thread,
                    buffers.out_base() + p as u64 * (dim as u64 * 8),
                    (dim * 8) as u8,
                    AccessKind::Data,
                );
            }
        }
    }
    let times = PhaseTimes {
        compute: start.elapsed().as_secs_f64(),
        launches: buffers.kinds_present as u64,
        ..PhaseTimes::default()
    };
    Ok((forces, trace, times))
}
