//! Uniform grid trees: every leaf holds exactly t grid samples laid out
//! cell-centered, so N = (2^dim)^L * t holds exactly.

use super::{LeafBox, Particle, Tree, TreeMode};
use crate::error::{Error, Result};

fn integer_root(t: usize, dim: usize) -> Option<usize> {
    let r = (t as f64).powf(1.0 / dim as f64).round() as usize;
    for cand in r.saturating_sub(1)..=r + 1 {
        if cand.pow(dim as u32) == t {
            return Some(cand);
        }
    }
    None
}

fn build_grid(n: usize, level: u32, dim: usize, periodic: bool) -> Result<Tree> {
    let boxes_per_axis = 1usize << level;
    let n_boxes = boxes_per_axis.pow(dim as u32);
    if n == 0 || n % n_boxes != 0 {
        return Err(Error::UniformTreeShape(format!(
            "N={n} is not divisible by {}^{level} = {n_boxes} boxes",
            1 << dim
        )));
    }
    let t = n / n_boxes;
    let side = integer_root(t, dim).ok_or_else(|| {
        Error::UniformTreeShape(format!(
            "t = N/boxes = {t} does not form a {}-d sample grid per box",
            dim
        ))
    })?;

    let box_w = 1.0 / boxes_per_axis as f64;
    let cell_w = box_w / side as f64;
    let mut particles = Vec::with_capacity(n);
    let mut leaves = Vec::with_capacity(n_boxes);

    // leaves in row-major order over box indices, samples row-major per box
    let mut box_idx = vec![0usize; dim];
    for box_id in 0..n_boxes {
        let start = particles.len() as u32;
        let mut sample = vec![0usize; dim];
        for _ in 0..t {
            let mut position = [0.0f64; 3];
            for a in 0..dim {
                position[a] = box_idx[a] as f64 * box_w + (sample[a] as f64 + 0.5) * cell_w;
            }
            particles.push(Particle {
                position,
                mass: 1.0,
                id: particles.len() as u32,
            });
            for a in 0..dim {
                sample[a] += 1;
                if sample[a] < side {
                    break;
                }
                sample[a] = 0;
            }
        }
        let mut center = [0.0f64; 3];
        let mut extent = [0.0f64; 3];
        for a in 0..dim {
            center[a] = (box_idx[a] as f64 + 0.5) * box_w;
            extent[a] = box_w / 2.0;
        }
        leaves.push(LeafBox {
            box_id: box_id as u32,
            level,
            range: (start, particles.len() as u32),
            center,
            extent,
            over_full: false,
        });
        for a in 0..dim {
            box_idx[a] += 1;
            if box_idx[a] < boxes_per_axis {
                break;
            }
            box_idx[a] = 0;
        }
    }

    Ok(Tree {
        mode: TreeMode::Uniform,
        dim,
        levels: level,
        t,
        periodic,
        leaves,
        particles,
        depth_capped: false,
        boxes_per_axis,
        split_nodes: Vec::new(),
        split_root: 0,
    })
}

/// 2-d uniform quadtree: 4^L leaves of t = N / 4^L samples each, with t a
/// perfect square so the samples form a sqrt(t) x sqrt(t) grid per box.
pub fn build_uniform_tree(n: usize, level: u32, periodic: bool) -> Result<Tree> {
    build_grid(n, level, 2, periodic)
}

/// 3-d counterpart (8^L leaves, t a perfect cube), used for cubic-grid
/// neighborhood scenarios.
pub fn build_uniform_tree_3d(n: usize, level: u32, periodic: bool) -> Result<Tree> {
    build_grid(n, level, 3, periodic)
}
