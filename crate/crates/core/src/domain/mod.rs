//! Geometric N-body state and its spatial decomposition: particles,
//! uniform grid trees, adaptive median-split binary trees, E2 neighbor
//! lists and interaction classification.

mod adaptive;
mod generate;
mod io;
mod neighbors;
mod uniform;

pub use adaptive::build_adaptive_tree;
pub use generate::{generate_particles, jitter_positions, GeneratorKind};
pub use io::{read_particles_csv, write_particles_csv};
pub use neighbors::{classify_interactions, e2_neighbors, Neighbor, NeighborLists};
pub use uniform::{build_uniform_tree, build_uniform_tree_3d};

/// One sample or body. Positions live in the unit box; ids are dense and
/// follow the leaf order once a tree has been built.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Particle {
    pub position: [f64; 3],
    pub mass: f64,
    pub id: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TreeMode {
    Uniform,
    Adaptive,
}

/// Final-level box holding a contiguous slice of the leaf-ordered
/// particle array.
#[derive(Clone, Debug)]
pub struct LeafBox {
    pub box_id: u32,
    pub level: u32,
    /// Half-open index interval into the tree's particle array.
    pub range: (u32, u32),
    pub center: [f64; 3],
    /// Per-axis half-width.
    pub extent: [f64; 3],
    /// Set when the depth cap fired and left this leaf over the threshold.
    pub over_full: bool,
}

impl LeafBox {
    pub fn len(&self) -> usize {
        (self.range.1 - self.range.0) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.range.0 == self.range.1
    }

    pub fn lo(&self, axis: usize) -> f64 {
        self.center[axis] - self.extent[axis]
    }

    pub fn hi(&self, axis: usize) -> f64 {
        self.center[axis] + self.extent[axis]
    }
}

/// Internal node of the adaptive split hierarchy, kept for box-overlap
/// queries during neighbor search.
#[derive(Clone, Debug)]
pub(crate) struct SplitNode {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
    /// Child node indices, or None for a node that wraps a leaf.
    pub children: Option<(u32, u32)>,
    pub leaf: Option<u32>,
}

/// A spatial decomposition plus the leaf-ordered particles it was built
/// from. Immutable once built; safe to share across readers.
#[derive(Clone, Debug)]
pub struct Tree {
    pub mode: TreeMode,
    pub dim: usize,
    /// Uniform: the fixed level L. Adaptive: maximum depth reached.
    pub levels: u32,
    /// Samples per box (uniform) or clustering threshold (adaptive).
    pub t: usize,
    pub periodic: bool,
    pub leaves: Vec<LeafBox>,
    pub particles: Vec<Particle>,
    /// True when the adaptive depth cap fired anywhere.
    pub depth_capped: bool,
    /// Uniform mode: boxes per axis (2^levels).
    pub(crate) boxes_per_axis: usize,
    pub(crate) split_nodes: Vec<SplitNode>,
    pub(crate) split_root: u32,
}

impl Tree {
    pub fn n_particles(&self) -> usize {
        self.particles.len()
    }

    pub fn n_leaves(&self) -> usize {
        self.leaves.len()
    }

    pub fn leaf_particles(&self, leaf: &LeafBox) -> &[Particle] {
        &self.particles[leaf.range.0 as usize..leaf.range.1 as usize]
    }

    /// Validates the leaf ranges partition [0, N).
    pub fn ranges_partition_particles(&self) -> bool {
        let mut next = 0u32;
        for leaf in &self.leaves {
            if leaf.range.0 != next || leaf.range.1 < leaf.range.0 {
                return false;
            }
            next = leaf.range.1;
        }
        next as usize == self.particles.len()
    }
}

/// How a source leaf relates to its target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum InteractionKind {
    Local,
    Remote,
    Periodic,
}

impl std::fmt::Display for InteractionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            InteractionKind::Local => "local",
            InteractionKind::Remote => "remote",
            InteractionKind::Periodic => "periodic",
        };
        write!(f, "{s}")
    }
}

/// One target/source leaf pair in the E2 neighborhood.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InteractionPair {
    pub target_leaf: u32,
    pub source_leaf: u32,
    pub kind: InteractionKind,
}

/// Tree and interaction-list statistics.
#[derive(Clone, Copy, Debug, Default)]
pub struct TreeStats {
    pub n_leaves: usize,
    pub n_interactions: usize,
    pub n_local: usize,
    pub n_remote: usize,
    pub n_periodic: usize,
    /// Mean and maximum E2 neighbors per leaf, as listed.
    pub avg_e2: f64,
    pub max_e2: usize,
}
