//! Independent verification oracles: direct double loops over the pair
//! list (or slot table), with no layout machinery in the path.

use super::ForceAccumulator;
use crate::domain::{InteractionPair, Tree, TreeMode};
use crate::error::{Error, Result};
use crate::layouts::{PatternTable, SENTINEL};

#[inline]
fn min_image(mut d: f64) -> f64 {
    d -= d.round();
    d
}

/// Direct summation of the gravity kernel over every pair's
/// (target, source) particle combinations, straight from the tree.
pub fn brute_force_oracle(
    tree: &Tree,
    pairs: &[InteractionPair],
    softening: f64,
) -> Result<ForceAccumulator> {
    let eps2 = softening * softening;
    let dim = tree.dim;
    let mut acc = ForceAccumulator::zeros(tree.n_particles(), dim);
    for pair in pairs {
        let (tlo, thi) = tree.leaves[pair.target_leaf as usize].range;
        let (slo, shi) = tree.leaves[pair.source_leaf as usize].range;
        for p in tlo..thi {
            let tp = &tree.particles[p as usize];
            let mut f = [0.0f64; 3];
            for q in slo..shi {
                if q == p {
                    continue;
                }
                let sp = &tree.particles[q as usize];
                let mut d = [
                    sp.position[0] - tp.position[0],
                    sp.position[1] - tp.position[1],
                    sp.position[2] - tp.position[2],
                ];
                if tree.periodic {
                    for dc in d.iter_mut().take(dim) {
                        *dc = min_image(*dc);
                    }
                }
                let r2: f64 = d[..dim].iter().map(|x| x * x).sum();
                if r2 == 0.0 && eps2 == 0.0 {
                    return Err(Error::CoincidentParticles);
                }
                let inv = (r2 + eps2).powf(-1.5) * tp.mass * sp.mass;
                for a in 0..dim {
                    f[a] += inv * d[a];
                }
            }
            for a in 0..dim {
                acc.values[p as usize][a] += f[a];
            }
        }
    }
    Ok(acc)
}

/// Pattern-kernel reference: walks the grid neighborhoods directly from
/// the tree and the table, bypassing the sample buffers.
pub fn brute_force_pattern_oracle(tree: &Tree, table: &PatternTable) -> Result<ForceAccumulator> {
    if tree.mode != TreeMode::Uniform || tree.dim != 2 {
        return Err(Error::InvalidInput(
            "pattern oracle requires a uniform 2-d tree".into(),
        ));
    }
    if table.t != tree.t {
        return Err(Error::KernelMismatch(format!(
            "pattern table t={} does not match the tree t={}",
            table.t, tree.t
        )));
    }
    let b = tree.boxes_per_axis as i64;
    let mut acc = ForceAccumulator::zeros(tree.n_particles(), 2);
    for leaf in &tree.leaves {
        let (bx, by) = (leaf.box_id as i64 % b, leaf.box_id as i64 / b);
        for oy in -1i64..=1 {
            for ox in -1i64..=1 {
                let (mut cx, mut cy) = (bx + ox, by + oy);
                if !(0..b).contains(&cx) || !(0..b).contains(&cy) {
                    if !tree.periodic {
                        continue;
                    }
                    cx = cx.rem_euclid(b);
                    cy = cy.rem_euclid(b);
                }
                let nb = (cy * b + cx) as usize;
                debug_assert_ne!(nb as u32, SENTINEL);
                let slot = ((oy + 1) * 3 + (ox + 1)) as usize;
                let (slo, shi) = tree.leaves[nb].range;
                for p in leaf.range.0..leaf.range.1 {
                    let i = (p - leaf.range.0) as usize;
                    for q in slo..shi {
                        let j = (q - slo) as usize;
                        let w = table.value(0, table.entry_index(i, slot, j));
                        let v = tree.particles[q as usize].mass;
                        acc.values[p as usize][0] += w[0] * v;
                        acc.values[p as usize][1] += w[1] * v;
                    }
                }
            }
        }
    }
    Ok(acc)
}
