//! Four-phase measurement: collect (packing), transfer (copy into a
//! second allocation and results back, standing in for host/device
//! movement), compute (kernel wall time) and update (reduction or
//! scatter). Timing protocol: one discarded warm-up, then the median of
//! the repetitions.

use super::{
    brute_force_pattern_oracle, reduce_partials, run_dbim, run_p2p_indexing, run_p2p_redundant,
    ForceAccumulator, PairKernel, PhaseTimes, SlotMap,
};
use crate::cachesim::MemoryTrace;
use crate::domain::{
    classify_interactions, e2_neighbors, InteractionPair, NeighborLists, Tree, TreeMode,
    TreeStats,
};
use crate::error::{Error, Result};
use crate::layouts::{
    pack_dbim_samples, pack_indexing, pack_pattern_redundant, pack_redundant, PatternTable,
    VolumeReport,
};
use std::hint::black_box;
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layout {
    /// Gathering layout (the baseline; for the uniform-grid mode this is
    /// the single resident pattern copy).
    Indexing,
    /// Self-contained records, or replicated pattern copies in the
    /// uniform-grid mode.
    Redundant,
}

impl std::fmt::Display for Layout {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Layout::Indexing => write!(f, "indexing"),
            Layout::Redundant => write!(f, "redundant"),
        }
    }
}

/// Everything a sweep point needs to execute both layouts.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub tree: Tree,
    pub lists: NeighborLists,
    pub pairs: Vec<InteractionPair>,
    pub stats: TreeStats,
    pub partitions: usize,
    pub batch_size: usize,
    pub byte_cap: Option<u64>,
    pub softening: f64,
    pub rf: usize,
    /// Threads per block for pattern-copy selection, and the lockstep
    /// group fed to the cache model.
    pub block_width: usize,
    pattern_single: Option<PatternTable>,
    pattern_copies: Option<PatternTable>,
}

impl Scenario {
    /// Adaptive-tree scenario with the gravity kernel.
    pub fn particles(
        tree: Tree,
        partitions: usize,
        batch_size: usize,
        byte_cap: Option<u64>,
        softening: f64,
        block_width: usize,
    ) -> Self {
        let lists = e2_neighbors(&tree, true);
        let (pairs, stats) = classify_interactions(&tree, &lists, partitions);
        Scenario {
            tree,
            lists,
            pairs,
            stats,
            partitions,
            batch_size,
            byte_cap,
            softening,
            rf: 1,
            block_width,
            pattern_single: None,
            pattern_copies: None,
        }
    }

    /// Uniform-grid scenario with the pattern kernel and rf block copies.
    pub fn pattern(tree: Tree, partitions: usize, rf: usize, block_width: usize) -> Result<Self> {
        if tree.mode != TreeMode::Uniform {
            return Err(Error::InvalidInput(
                "pattern scenarios require a uniform tree".into(),
            ));
        }
        let lists = e2_neighbors(&tree, true);
        let (pairs, stats) = classify_interactions(&tree, &lists, partitions);
        let (single, _) = pack_pattern_redundant(tree.t, 1)?;
        let (copies, _) = pack_pattern_redundant(tree.t, rf)?;
        Ok(Scenario {
            tree,
            lists,
            pairs,
            stats,
            partitions,
            batch_size: 1,
            byte_cap: None,
            softening: 0.0,
            rf,
            block_width,
            pattern_single: Some(single),
            pattern_copies: Some(copies),
        })
    }

    pub fn is_pattern(&self) -> bool {
        self.pattern_single.is_some()
    }

    pub fn pattern_table(&self, layout: Layout) -> Option<&PatternTable> {
        match layout {
            Layout::Indexing => self.pattern_single.as_ref(),
            Layout::Redundant => self.pattern_copies.as_ref(),
        }
    }

    /// Weighted interaction counts (sum of n_t * n_s) per pair kind:
    /// (local, remote, periodic). The local fraction of this weight is
    /// the desk-scale stand-in for the local time share.
    pub fn interaction_weights(&self) -> (u64, u64, u64) {
        let mut w = [0u64; 3];
        for p in &self.pairs {
            let n_t = self.tree.leaves[p.target_leaf as usize].len() as u64;
            let n_s = self.tree.leaves[p.source_leaf as usize].len() as u64;
            w[match p.kind {
                crate::domain::InteractionKind::Local => 0,
                crate::domain::InteractionKind::Remote => 1,
                crate::domain::InteractionKind::Periodic => 2,
            }] += n_t * n_s;
        }
        (w[0], w[1], w[2])
    }
}

/// One measured execution of one layout.
#[derive(Clone, Debug)]
pub struct Measurement {
    pub times: PhaseTimes,
    pub volume: VolumeReport,
    pub forces: ForceAccumulator,
}

fn copy_f64s(dst: &mut Vec<f64>, src: impl Iterator<Item = f64>) {
    dst.clear();
    dst.extend(src);
    black_box(dst.len());
}

fn measure_particles(scn: &Scenario, layout: Layout) -> Result<Measurement> {
    let kernel = PairKernel::Gravity {
        softening: scn.softening,
    };
    match layout {
        Layout::Indexing => {
            let t0 = Instant::now();
            let (bufs, volume) = pack_indexing(&scn.tree, &scn.lists, &scn.pairs);
            let collect = t0.elapsed().as_secs_f64();

            let t0 = Instant::now();
            let copies = (
                black_box(bufs.x.clone()),
                black_box(bufs.y.clone()),
                black_box(bufs.z.clone()),
                black_box(bufs.mass.clone()),
                black_box(bufs.ranges.clone()),
                black_box(bufs.neighbors.clone()),
            );
            let transfer_in = t0.elapsed().as_secs_f64();
            let bytes_in = (copies.0.len() + copies.1.len() + copies.2.len() + copies.3.len())
                as u64
                * 8
                + copies.4.len() as u64 * 8
                + copies.5.len() as u64 * 4;

            let (forces, _, run_times) = run_p2p_indexing(&bufs, &kernel, false)?;

            let mut out_scratch = Vec::with_capacity(bufs.n * bufs.dim);
            let t0 = Instant::now();
            copy_f64s(
                &mut out_scratch,
                forces.values.iter().flat_map(|v| v[..bufs.dim].iter().copied()),
            );
            let transfer_out = t0.elapsed().as_secs_f64();
            let bytes_out = out_scratch.len() as u64 * 8;
            debug_assert_eq!(bytes_in + bytes_out, volume.transfer);

            // update: scatter the output region into the accumulator
            let t0 = Instant::now();
            let final_forces = black_box(forces.clone());
            let update = t0.elapsed().as_secs_f64();

            Ok(Measurement {
                times: PhaseTimes {
                    collect,
                    transfer: transfer_in + transfer_out,
                    compute: run_times.compute,
                    update,
                    launches: run_times.launches,
                },
                volume,
                forces: final_forces,
            })
        }
        Layout::Redundant => {
            let t0 = Instant::now();
            let (bufs, volume) =
                pack_redundant(&scn.pairs, &scn.tree, scn.batch_size, scn.byte_cap)?;
            let collect = t0.elapsed().as_secs_f64();

            let t0 = Instant::now();
            let copy = black_box(bufs.bytes.clone());
            let transfer_in = t0.elapsed().as_secs_f64();
            let bytes_in = copy.len() as u64;

            let (partials, _, run_times) = run_p2p_redundant(&bufs, &kernel, false)?;

            let mut out_scratch = Vec::with_capacity(partials.slot_count() * bufs.dim);
            let t0 = Instant::now();
            copy_f64s(
                &mut out_scratch,
                partials
                    .records
                    .iter()
                    .flat_map(|r| r.values.iter().flat_map(|v| v[..bufs.dim].iter().copied())),
            );
            let transfer_out = t0.elapsed().as_secs_f64();
            let bytes_out = out_scratch.len() as u64 * 8;
            debug_assert_eq!(bytes_in + bytes_out, volume.transfer);

            let t0 = Instant::now();
            let map = SlotMap::from_buffers(&bufs, &scn.tree);
            let forces = reduce_partials(&partials, &map, scn.tree.n_particles())?;
            let update = t0.elapsed().as_secs_f64();

            Ok(Measurement {
                times: PhaseTimes {
                    collect,
                    transfer: transfer_in + transfer_out,
                    compute: run_times.compute,
                    update,
                    launches: run_times.launches,
                },
                volume,
                forces,
            })
        }
    }
}

fn measure_pattern(scn: &Scenario, layout: Layout) -> Result<Measurement> {
    let table = scn
        .pattern_table(layout)
        .expect("pattern scenario carries tables");
    let t0 = Instant::now();
    let (bufs, mut volume) = pack_dbim_samples(&scn.tree)?;
    let collect = t0.elapsed().as_secs_f64();

    // base keeps its single copy resident; the redundant layout moves rf copies
    let t0 = Instant::now();
    let tuples_copy = black_box(bufs.tuples.clone());
    let mut bytes_in = tuples_copy.len() as u64 * 8;
    if layout == Layout::Redundant {
        let copies = black_box(table.materialize_copies());
        bytes_in += copies.len() as u64;
        volume.transfer += table.total_bytes();
        volume.compute_resident += table.total_bytes();
    } else {
        volume.compute_resident += table.copy_bytes();
    }
    let transfer_in = t0.elapsed().as_secs_f64();

    let kernel = PairKernel::Pattern { table };
    let (field, _, run_times) = run_dbim(&bufs, &kernel, scn.block_width, false)?;

    let mut out_scratch = Vec::with_capacity(bufs.n * 2);
    let t0 = Instant::now();
    copy_f64s(
        &mut out_scratch,
        field.values.iter().flat_map(|v| v[..2].iter().copied()),
    );
    let transfer_out = t0.elapsed().as_secs_f64();
    let bytes_out = out_scratch.len() as u64 * 8;
    debug_assert_eq!(bytes_in + bytes_out, volume.transfer);

    let t0 = Instant::now();
    let final_field = black_box(field.clone());
    let update = t0.elapsed().as_secs_f64();

    Ok(Measurement {
        times: PhaseTimes {
            collect,
            transfer: transfer_in + transfer_out,
            compute: run_times.compute,
            update,
            launches: run_times.launches,
        },
        volume,
        forces: final_field,
    })
}

/// Execute one layout once, timing each phase.
pub fn measure_once(scn: &Scenario, layout: Layout) -> Result<Measurement> {
    if scn.is_pattern() {
        measure_pattern(scn, layout)
    } else {
        measure_particles(scn, layout)
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n == 0 {
        return 0.0;
    }
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

/// Field-wise median of several phase measurements.
pub fn median_phase_times(times: &[PhaseTimes]) -> PhaseTimes {
    PhaseTimes {
        collect: median(times.iter().map(|t| t.collect).collect()),
        transfer: median(times.iter().map(|t| t.transfer).collect()),
        compute: median(times.iter().map(|t| t.compute).collect()),
        update: median(times.iter().map(|t| t.update).collect()),
        launches: times.last().map(|t| t.launches).unwrap_or(0),
    }
}

/// One discarded warm-up plus `reps` timed runs; per-phase medians.
pub fn measure_phases(scn: &Scenario, layout: Layout, reps: usize) -> Result<Measurement> {
    let reps = reps.max(1);
    let _warmup = measure_once(scn, layout)?;
    let mut all_times = Vec::with_capacity(reps);
    let mut last = None;
    for _ in 0..reps {
        let m = measure_once(scn, layout)?;
        all_times.push(m.times);
        last = Some(m);
    }
    let mut m = last.expect("reps >= 1");
    m.times = median_phase_times(&all_times);
    Ok(m)
}

/// Untimed traced execution of one layout, for locality analysis. Returns
/// the merged trace and the resulting forces (reduced, for the redundant
/// path).
pub fn trace_run(scn: &Scenario, layout: Layout) -> Result<(MemoryTrace, ForceAccumulator)> {
    if scn.is_pattern() {
        let table = scn.pattern_table(layout).unwrap();
        let (bufs, _) = pack_dbim_samples(&scn.tree)?;
        let (field, trace, _) = run_dbim(
            &bufs,
            &PairKernel::Pattern { table },
            scn.block_width,
            true,
        )?;
        return Ok((trace.unwrap(), field));
    }
    let kernel = PairKernel::Gravity {
        softening: scn.softening,
    };
    match layout {
        Layout::Indexing => {
            let (bufs, _) = pack_indexing(&scn.tree, &scn.lists, &scn.pairs);
            let (forces, trace, _) = run_p2p_indexing(&bufs, &kernel, true)?;
            Ok((trace.unwrap(), forces))
        }
        Layout::Redundant => {
            let (bufs, _) = pack_redundant(&scn.pairs, &scn.tree, scn.batch_size, scn.byte_cap)?;
            let (partials, trace, _) = run_p2p_redundant(&bufs, &kernel, true)?;
            let map = SlotMap::from_buffers(&bufs, &scn.tree);
            let forces = reduce_partials(&partials, &map, scn.tree.n_particles())?;
            Ok((trace.unwrap(), forces))
        }
    }
}

/// Reference forces for a scenario, from the layout-free oracle.
pub fn oracle_forces(scn: &Scenario) -> Result<ForceAccumulator> {
    if scn.is_pattern() {
        brute_force_pattern_oracle(&scn.tree, scn.pattern_table(Layout::Indexing).unwrap())
    } else {
        super::brute_force_oracle(&scn.tree, &scn.pairs, scn.softening)
    }
}
