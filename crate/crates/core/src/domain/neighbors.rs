//! E2 neighbor lists and interaction classification.
//!
//! Uniform trees use exact grid-index adjacency (Chebyshev distance 1).
//! Adaptive trees use geometric adjacency: source boxes whose bounds touch
//! or overlap the target box dilated by one target-box extent per axis,
//! with a symmetric closure pass afterwards since the dilation width is
//! the target's. A neighbor is marked wrapped only when no unwrapped
//! offset makes it adjacent.

use super::{InteractionKind, InteractionPair, Tree, TreeMode, TreeStats};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Neighbor {
    pub leaf: u32,
    /// Adjacency required crossing the periodic boundary.
    pub wrapped: bool,
}

/// Per-leaf E2 neighbor lists, each sorted by leaf id.
#[derive(Clone, Debug)]
pub struct NeighborLists {
    pub lists: Vec<Vec<Neighbor>>,
    pub include_self: bool,
}

impl NeighborLists {
    pub fn max_e2(&self) -> usize {
        self.lists.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn avg_e2(&self) -> f64 {
        if self.lists.is_empty() {
            return 0.0;
        }
        self.lists.iter().map(Vec::len).sum::<usize>() as f64 / self.lists.len() as f64
    }

    pub fn total_entries(&self) -> usize {
        self.lists.iter().map(Vec::len).sum()
    }
}

fn uniform_neighbors(tree: &Tree, include_self: bool) -> NeighborLists {
    let b = tree.boxes_per_axis as i64;
    let dim = tree.dim;
    let mut lists = Vec::with_capacity(tree.n_leaves());

    for leaf in &tree.leaves {
        // decompose the row-major box id
        let mut idx = [0i64; 3];
        let mut rem = leaf.box_id as i64;
        for a in 0..dim {
            idx[a] = rem % b;
            rem /= b;
        }
        // map source id -> wrapped; a direct route always wins
        let mut found: std::collections::BTreeMap<u32, bool> = std::collections::BTreeMap::new();
        let mut offs = [-1i64; 3];
        loop {
            let self_offset = (0..dim).all(|a| offs[a] == 0);
            if !self_offset || include_self {
                let mut ok = true;
                let mut wrapped = false;
                let mut source = 0i64;
                for a in (0..dim).rev() {
                    let mut c = idx[a] + offs[a];
                    if c < 0 || c >= b {
                        if tree.periodic {
                            c = c.rem_euclid(b);
                            wrapped = true;
                        } else {
                            ok = false;
                            break;
                        }
                    }
                    source = source * b + c;
                }
                if ok {
                    found
                        .entry(source as u32)
                        .and_modify(|w| *w &= wrapped)
                        .or_insert(wrapped);
                }
            }
            // next offset in {-1,0,1}^dim
            let mut a = 0;
            loop {
                if a == dim {
                    break;
                }
                offs[a] += 1;
                if offs[a] <= 1 {
                    break;
                }
                offs[a] = -1;
                a += 1;
            }
            if a == dim {
                break;
            }
        }
        if !include_self {
            found.remove(&leaf.box_id);
        }
        lists.push(
            found
                .into_iter()
                .map(|(leaf, wrapped)| Neighbor { leaf, wrapped })
                .collect(),
        );
    }
    NeighborLists {
        lists,
        include_self,
    }
}

/// Overlap test of `query` against node boxes, collecting leaf hits.
fn collect_overlaps(tree: &Tree, node: u32, q_lo: &[f64; 3], q_hi: &[f64; 3], out: &mut Vec<u32>) {
    const TOL: f64 = 1e-12;
    let n = &tree.split_nodes[node as usize];
    for a in 0..tree.dim {
        if n.lo[a] > q_hi[a] + TOL || n.hi[a] < q_lo[a] - TOL {
            return;
        }
    }
    match n.children {
        Some((l, r)) => {
            collect_overlaps(tree, l, q_lo, q_hi, out);
            collect_overlaps(tree, r, q_lo, q_hi, out);
        }
        None => out.push(n.leaf.expect("split leaf node carries a leaf id")),
    }
}

fn adaptive_neighbors(tree: &Tree, include_self: bool) -> NeighborLists {
    let dim = tree.dim;
    let mut lists: Vec<std::collections::BTreeMap<u32, bool>> =
        vec![std::collections::BTreeMap::new(); tree.n_leaves()];

    for (t_id, leaf) in tree.leaves.iter().enumerate() {
        // dilate by one target-box extent (half-width) per axis: on a
        // uniform grid this overlaps exactly the Moore neighborhood and
        // stays strictly short of boxes two steps away
        let mut d_lo = [0.0f64; 3];
        let mut d_hi = [0.0f64; 3];
        for a in 0..dim {
            d_lo[a] = leaf.lo(a) - leaf.extent[a];
            d_hi[a] = leaf.hi(a) + leaf.extent[a];
        }
        // candidate periodic shifts: only the ones the dilated box reaches
        let mut shifts: Vec<[f64; 3]> = vec![[0.0; 3]];
        if tree.periodic {
            let mut axis_shifts: Vec<Vec<f64>> = Vec::with_capacity(dim);
            for a in 0..dim {
                let mut s = vec![0.0];
                if d_lo[a] < 0.0 {
                    s.push(-1.0);
                }
                if d_hi[a] > 1.0 {
                    s.push(1.0);
                }
                axis_shifts.push(s);
            }
            shifts.clear();
            let mut stack = vec![(0usize, [0.0f64; 3])];
            while let Some((a, cur)) = stack.pop() {
                if a == dim {
                    shifts.push(cur);
                    continue;
                }
                for &s in &axis_shifts[a] {
                    let mut next = cur;
                    next[a] = s;
                    stack.push((a + 1, next));
                }
            }
        }

        let mut hits = Vec::new();
        for shift in &shifts {
            let wrapped = shift.iter().any(|&s| s != 0.0);
            // querying the domain shifted by `shift` is the same as
            // shifting the query box the other way
            let mut q_lo = d_lo;
            let mut q_hi = d_hi;
            for a in 0..dim {
                q_lo[a] -= shift[a];
                q_hi[a] -= shift[a];
            }
            hits.clear();
            collect_overlaps(tree, tree.split_root, &q_lo, &q_hi, &mut hits);
            for &s in &hits {
                lists[t_id]
                    .entry(s)
                    .and_modify(|w| *w &= wrapped)
                    .or_insert(wrapped);
            }
        }
    }

    // symmetric closure: the dilation width was the target's, so enforce
    // source in E2(target) <=> target in E2(source)
    let snapshot: Vec<Vec<(u32, bool)>> = lists
        .iter()
        .map(|m| m.iter().map(|(&l, &w)| (l, w)).collect())
        .collect();
    for (t_id, row) in snapshot.iter().enumerate() {
        for &(s, w) in row {
            lists[s as usize]
                .entry(t_id as u32)
                .and_modify(|x| *x &= w)
                .or_insert(w);
        }
    }

    let lists = lists
        .into_iter()
        .enumerate()
        .map(|(t_id, mut m)| {
            if !include_self {
                m.remove(&(t_id as u32));
            } else {
                m.entry(t_id as u32).or_insert(false);
            }
            m.into_iter()
                .map(|(leaf, wrapped)| Neighbor { leaf, wrapped })
                .collect()
        })
        .collect();
    NeighborLists {
        lists,
        include_self,
    }
}

/// E2 neighborhood of every leaf.
pub fn e2_neighbors(tree: &Tree, include_self: bool) -> NeighborLists {
    match tree.mode {
        TreeMode::Uniform => uniform_neighbors(tree, include_self),
        TreeMode::Adaptive => adaptive_neighbors(tree, include_self),
    }
}

/// Classify every neighbor relation as local, remote or periodic.
/// Periodic wins when the adjacency required wrapping; otherwise leaves
/// striped into `partitions` contiguous groups decide local vs remote.
pub fn classify_interactions(
    tree: &Tree,
    lists: &NeighborLists,
    partitions: usize,
) -> (Vec<InteractionPair>, TreeStats) {
    let partitions = partitions.max(1);
    let n_leaves = tree.n_leaves();
    let stripe = |leaf: u32| (leaf as usize * partitions / n_leaves.max(1)) as u32;

    let mut pairs = Vec::with_capacity(lists.total_entries());
    let mut stats = TreeStats {
        n_leaves,
        avg_e2: lists.avg_e2(),
        max_e2: lists.max_e2(),
        ..TreeStats::default()
    };
    for (t_id, row) in lists.lists.iter().enumerate() {
        let t_id = t_id as u32;
        for nb in row {
            let kind = if nb.wrapped {
                InteractionKind::Periodic
            } else if stripe(t_id) != stripe(nb.leaf) {
                InteractionKind::Remote
            } else {
                InteractionKind::Local
            };
            match kind {
                InteractionKind::Local => stats.n_local += 1,
                InteractionKind::Remote => stats.n_remote += 1,
                InteractionKind::Periodic => stats.n_periodic += 1,
            }
            pairs.push(InteractionPair {
                target_leaf: t_id,
                source_leaf: nb.leaf,
                kind,
            });
        }
    }
    stats.n_interactions = pairs.len();
    (pairs, stats)
}
