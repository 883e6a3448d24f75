//! Adaptive binary tree: longest-axis median splits of the unit box until
//! every leaf holds at most t particles, with a depth cap that flags
//! over-full leaves instead of failing.

use super::{LeafBox, Particle, SplitNode, Tree, TreeMode};
use crate::error::{Error, Result};

struct Builder {
    dim: usize,
    threshold: usize,
    max_depth: u32,
    particles: Vec<Particle>,
    leaves: Vec<LeafBox>,
    nodes: Vec<SplitNode>,
    depth_capped: bool,
    max_level: u32,
}

impl Builder {
    /// Builds the subtree over particles[lo..hi] in the given box and
    /// returns the node index. Particles end up leaf-contiguous.
    fn build(&mut self, lo: usize, hi: usize, bounds_lo: [f64; 3], bounds_hi: [f64; 3], depth: u32) -> u32 {
        self.max_level = self.max_level.max(depth);
        let count = hi - lo;
        if count <= self.threshold || depth >= self.max_depth {
            let over_full = count > self.threshold;
            self.depth_capped |= over_full;
            let mut center = [0.0f64; 3];
            let mut extent = [0.0f64; 3];
            for a in 0..self.dim {
                center[a] = (bounds_lo[a] + bounds_hi[a]) / 2.0;
                extent[a] = (bounds_hi[a] - bounds_lo[a]) / 2.0;
            }
            let leaf_id = self.leaves.len() as u32;
            self.leaves.push(LeafBox {
                box_id: leaf_id,
                level: depth,
                range: (lo as u32, hi as u32),
                center,
                extent,
                over_full,
            });
            self.nodes.push(SplitNode {
                lo: bounds_lo,
                hi: bounds_hi,
                children: None,
                leaf: Some(leaf_id),
            });
            return (self.nodes.len() - 1) as u32;
        }

        // split the longest box axis at the median particle
        let mut axis = 0;
        for a in 1..self.dim {
            if bounds_hi[a] - bounds_lo[a] > bounds_hi[axis] - bounds_lo[axis] {
                axis = a;
            }
        }
        let mid = lo + count / 2;
        self.particles[lo..hi]
            .select_nth_unstable_by(mid - lo, |p, q| p.position[axis].total_cmp(&q.position[axis]));
        let split = self.particles[mid].position[axis];

        let mut left_hi = bounds_hi;
        left_hi[axis] = split;
        let mut right_lo = bounds_lo;
        right_lo[axis] = split;

        let left = self.build(lo, mid, bounds_lo, left_hi, depth + 1);
        let right = self.build(mid, hi, right_lo, bounds_hi, depth + 1);
        self.nodes.push(SplitNode {
            lo: bounds_lo,
            hi: bounds_hi,
            children: Some((left, right)),
            leaf: None,
        });
        (self.nodes.len() - 1) as u32
    }
}

/// Build an adaptive binary tree over the unit box. Particle ids are
/// reassigned to the leaf-contiguous order.
pub fn build_adaptive_tree(
    mut particles: Vec<Particle>,
    threshold: usize,
    dim: usize,
    max_depth: u32,
    periodic: bool,
) -> Result<Tree> {
    if particles.is_empty() {
        return Err(Error::InvalidInput("no particles".into()));
    }
    if threshold == 0 {
        return Err(Error::InvalidInput("clustering threshold must be >= 1".into()));
    }
    if !(2..=3).contains(&dim) {
        return Err(Error::InvalidInput(format!("dim must be 2 or 3, got {dim}")));
    }
    for p in &particles {
        for a in 0..dim {
            if !(0.0..=1.0).contains(&p.position[a]) || !p.position[a].is_finite() {
                return Err(Error::InvalidInput(format!(
                    "particle {} coordinate {a} = {} outside the unit box",
                    p.id, p.position[a]
                )));
            }
        }
    }

    let n = particles.len();
    particles.sort_by_key(|p| p.id); // canonical input order
    let mut b = Builder {
        dim,
        threshold,
        max_depth,
        particles,
        leaves: Vec::new(),
        nodes: Vec::new(),
        depth_capped: false,
        max_level: 0,
    };
    let root = b.build(0, n, [0.0; 3], [1.0; 3], 0);
    let mut particles = b.particles;
    for (i, p) in particles.iter_mut().enumerate() {
        p.id = i as u32;
    }
    Ok(Tree {
        mode: TreeMode::Adaptive,
        dim,
        levels: b.max_level,
        t: threshold,
        periodic,
        leaves: b.leaves,
        particles,
        depth_capped: b.depth_capped,
        boxes_per_axis: 0,
        split_nodes: b.nodes,
        split_root: root,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn uniform_particles(n: usize, seed: u64) -> Vec<Particle> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|i| Particle {
                position: [rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()],
                mass: 1.0 / n as f64,
                id: i as u32,
            })
            .collect()
    }

    /// Independent re-count of how many leaves a median split produces.
    fn count_leaves_oracle(n: usize, threshold: usize, depth: u32, max_depth: u32) -> usize {
        if n <= threshold || depth >= max_depth {
            1
        } else {
            count_leaves_oracle(n / 2, threshold, depth + 1, max_depth)
                + count_leaves_oracle(n - n / 2, threshold, depth + 1, max_depth)
        }
    }

    #[test]
    fn below_threshold_single_leaf() {
        let tree = build_adaptive_tree(uniform_particles(10, 1), 16, 3, 64, false).unwrap();
        assert_eq!(tree.n_leaves(), 1);
        assert_eq!(tree.leaves[0].len(), 10);
        assert!(!tree.depth_capped);
    }

    #[test]
    fn forced_full_split() {
        let corners = vec![
            Particle { position: [0.1, 0.1, 0.0], mass: 1.0, id: 0 },
            Particle { position: [0.9, 0.1, 0.0], mass: 1.0, id: 1 },
            Particle { position: [0.1, 0.9, 0.0], mass: 1.0, id: 2 },
            Particle { position: [0.9, 0.9, 0.0], mass: 1.0, id: 3 },
        ];
        let tree = build_adaptive_tree(corners, 1, 2, 64, false).unwrap();
        assert_eq!(tree.n_leaves(), 4);
        assert!(tree.leaves.iter().all(|l| l.len() == 1));
    }

    #[test]
    fn leaf_count_matches_recursive_oracle() {
        let n = 10_000;
        let tree = build_adaptive_tree(uniform_particles(n, 7), 8, 3, 64, false).unwrap();
        assert!(tree.leaves.iter().all(|l| l.len() <= 8));
        assert_eq!(tree.n_leaves(), count_leaves_oracle(n, 8, 0, 64));
        assert!(tree.ranges_partition_particles());
    }

    #[test]
    fn particles_stay_inside_leaf_boxes() {
        let tree = build_adaptive_tree(uniform_particles(2000, 3), 4, 3, 64, false).unwrap();
        for leaf in &tree.leaves {
            for p in tree.leaf_particles(leaf) {
                for a in 0..3 {
                    assert!(
                        p.position[a] >= leaf.lo(a) - 1e-12 && p.position[a] <= leaf.hi(a) + 1e-12
                    );
                }
            }
        }
    }

    #[test]
    fn depth_cap_flags_over_full_leaves() {
        let tree = build_adaptive_tree(uniform_particles(1000, 5), 1, 3, 3, false).unwrap();
        assert!(tree.depth_capped);
        assert!(tree.leaves.iter().any(|l| l.over_full));
        assert_eq!(tree.n_leaves(), 8);
    }

    #[test]
    fn coincident_points_do_not_recurse_forever() {
        let pts = (0..64)
            .map(|i| Particle { position: [0.5, 0.5, 0.5], mass: 1.0, id: i })
            .collect();
        let tree = build_adaptive_tree(pts, 2, 3, 64, false).unwrap();
        assert!(tree.leaves.iter().all(|l| l.len() <= 2));
    }

    #[test]
    fn rejects_out_of_box_particles() {
        let pts = vec![Particle { position: [1.5, 0.0, 0.0], mass: 1.0, id: 0 }];
        assert!(build_adaptive_tree(pts, 1, 3, 64, false).is_err());
        assert!(build_adaptive_tree(Vec::new(), 1, 3, 64, false).is_err());
    }
}
