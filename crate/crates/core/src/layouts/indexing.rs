//! Structure-of-arrays packing with padded neighbor index lists.

use super::{align8, ClosedFormAudit, VolumeReport, SENTINEL};
use crate::domain::{InteractionKind, InteractionPair, NeighborLists, Tree};

/// Per-field particle arrays plus the index tables a gathering kernel
/// needs. Every instance defines its own address space for tracing:
/// `[x | y | z | mass | ranges | neighbors | out]`.
#[derive(Clone, Debug)]
pub struct IndexingBuffers {
    pub n: usize,
    pub dim: usize,
    pub periodic: bool,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub mass: Vec<f64>,
    /// Per-leaf half-open particle ranges.
    pub ranges: Vec<(u32, u32)>,
    /// Per-leaf neighbor ids padded with `SENTINEL` to `max_e2` entries.
    pub neighbors: Vec<u32>,
    pub max_e2: usize,
    /// Distinct interaction kinds in the pair list; one kernel launch each.
    pub kinds_present: u32,
    /// Output components per particle (dim for the gravity kernel).
    pub out_comps: usize,
}

impl IndexingBuffers {
    pub fn n_leaves(&self) -> usize {
        self.ranges.len()
    }

    pub fn particle_array_bytes(&self) -> u64 {
        4 * 8 * self.n as u64
    }

    pub fn range_table_bytes(&self) -> u64 {
        8 * self.ranges.len() as u64
    }

    pub fn neighbor_table_bytes(&self) -> u64 {
        4 * (self.ranges.len() * self.max_e2) as u64
    }

    /// Input-side buffer bytes (everything the kernel gathers from).
    pub fn buffer_bytes(&self) -> u64 {
        self.particle_array_bytes() + self.range_table_bytes() + self.neighbor_table_bytes()
    }

    pub fn out_bytes(&self) -> u64 {
        (self.n * self.out_comps * 8) as u64
    }

    // region offsets in the trace address space
    pub fn x_base(&self) -> u64 {
        0
    }
    pub fn y_base(&self) -> u64 {
        8 * self.n as u64
    }
    pub fn z_base(&self) -> u64 {
        16 * self.n as u64
    }
    pub fn mass_base(&self) -> u64 {
        24 * self.n as u64
    }
    pub fn range_base(&self) -> u64 {
        32 * self.n as u64
    }
    pub fn neighbor_base(&self) -> u64 {
        self.range_base() + self.range_table_bytes()
    }
    pub fn out_base(&self) -> u64 {
        align8(self.neighbor_base() + self.neighbor_table_bytes())
    }
    pub fn address_space_end(&self) -> u64 {
        self.out_base() + self.out_bytes()
    }

    /// Closed-form transfer estimate `16*leafs*(3t+1+Max_E2+3t*Max_E2)`
    /// next to the measured buffer bytes.
    pub fn transfer_audit(&self, t: usize) -> ClosedFormAudit {
        let leafs = self.ranges.len() as f64;
        let t = t as f64;
        let me = self.max_e2 as f64;
        ClosedFormAudit::new(
            self.buffer_bytes(),
            16.0 * leafs * (3.0 * t + 1.0 + me + 3.0 * t * me),
        )
    }
}

/// Pack the tree into the indexing layout. The pair list only contributes
/// the set of interaction kinds (one kernel launch per kind).
pub fn pack_indexing(
    tree: &Tree,
    lists: &NeighborLists,
    pairs: &[InteractionPair],
) -> (IndexingBuffers, VolumeReport) {
    let n = tree.n_particles();
    let max_e2 = lists.max_e2();
    let mut neighbors = Vec::with_capacity(tree.n_leaves() * max_e2);
    for row in &lists.lists {
        for nb in row {
            neighbors.push(nb.leaf);
        }
        neighbors.resize(neighbors.len() + (max_e2 - row.len()), SENTINEL);
    }

    let mut kinds = [false; 3];
    for p in pairs {
        kinds[match p.kind {
            InteractionKind::Local => 0,
            InteractionKind::Remote => 1,
            InteractionKind::Periodic => 2,
        }] = true;
    }

    let buffers = IndexingBuffers {
        n,
        dim: tree.dim,
        periodic: tree.periodic,
        x: tree.particles.iter().map(|p| p.position[0]).collect(),
        y: tree.particles.iter().map(|p| p.position[1]).collect(),
        z: tree.particles.iter().map(|p| p.position[2]).collect(),
        mass: tree.particles.iter().map(|p| p.mass).collect(),
        ranges: tree.leaves.iter().map(|l| l.range).collect(),
        neighbors,
        max_e2,
        kinds_present: kinds.iter().filter(|&&k| k).count() as u32,
        out_comps: tree.dim,
    };
    let report = VolumeReport {
        collect: buffers.buffer_bytes(),
        transfer: buffers.buffer_bytes() + buffers.out_bytes(),
        compute_resident: buffers.buffer_bytes() + buffers.out_bytes(),
        update: 2 * buffers.out_bytes(),
    };
    (buffers, report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_adaptive_tree, classify_interactions, e2_neighbors, Particle};

    fn tiny_tree(n: usize) -> Tree {
        let pts = (0..n)
            .map(|i| Particle {
                position: [0.1 + 0.8 * i as f64 / n as f64, 0.5, 0.5],
                mass: 1.0,
                id: i as u32,
            })
            .collect();
        build_adaptive_tree(pts, n, 3, 64, false).unwrap()
    }

    #[test]
    fn single_leaf_particle_arrays_are_64_bytes() {
        // 1 leaf, 2 particles (d=3), no neighbors: arrays are 4 fields x 8 x 2
        let tree = tiny_tree(2);
        let lists = e2_neighbors(&tree, false); // single leaf, self excluded
        let (pairs, _) = classify_interactions(&tree, &lists, 1);
        let (bufs, _) = pack_indexing(&tree, &lists, &pairs);
        assert_eq!(bufs.particle_array_bytes(), 64);
        assert_eq!(bufs.max_e2, 0);
        assert_eq!(bufs.neighbor_table_bytes(), 0);
    }

    #[test]
    fn padded_rows_share_one_width() {
        let tree = tiny_tree(8);
        let lists = e2_neighbors(&tree, true);
        let (pairs, _) = classify_interactions(&tree, &lists, 1);
        let (bufs, _) = pack_indexing(&tree, &lists, &pairs);
        assert_eq!(bufs.neighbors.len(), bufs.n_leaves() * bufs.max_e2);
        assert_eq!(bufs.kinds_present, 1);
    }

    #[test]
    fn closed_form_audit_reports_both_sides() {
        let tree = crate::domain::build_uniform_tree(65536, 5, false).unwrap();
        let lists = e2_neighbors(&tree, false);
        let (pairs, _) = classify_interactions(&tree, &lists, 1);
        let (bufs, report) = pack_indexing(&tree, &lists, &pairs);
        assert_eq!(bufs.max_e2, 8);
        let audit = bufs.transfer_audit(64);
        assert_eq!(audit.measured, bufs.buffer_bytes());
        let closed = 16.0 * 1024.0 * (3.0 * 64.0 + 1.0 + 8.0 + 3.0 * 64.0 * 8.0);
        assert_eq!(audit.closed_form, closed);
        assert!(audit.ratio > 0.0);
        assert_eq!(report.transfer, bufs.buffer_bytes() + bufs.out_bytes());
    }
}
