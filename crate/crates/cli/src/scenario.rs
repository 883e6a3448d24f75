//! Deterministic scenario construction from a config, sweep point and
//! iteration index.

use crate::config::{ExperimentConfig, Mode};
use anyhow::{anyhow, bail, Result};
use p2plab_core::domain::{
    build_adaptive_tree, build_uniform_tree, generate_particles, jitter_positions, Particle,
};
use p2plab_core::exec::Scenario;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Level of the uniform quadtree holding `n` unknowns at `t` per box.
pub fn dbim_level(n: usize, t: usize) -> Result<u32> {
    if n == 0 || t == 0 || n % t != 0 {
        bail!("n={n} is not a multiple of t={t}");
    }
    let boxes = n / t;
    let mut level = 0u32;
    let mut acc = 1usize;
    while acc < boxes {
        acc *= 4;
        level += 1;
    }
    if acc != boxes {
        bail!("n/t = {boxes} is not a power of 4; no quadtree level fits");
    }
    Ok(level)
}

/// Mutable per-sweep-point state that evolves across iterations.
pub struct ScenarioState {
    cfg: ExperimentConfig,
    n: usize,
    t: usize,
    rng: ChaCha8Rng,
    particles: Vec<Particle>,
}

impl ScenarioState {
    pub fn new(cfg: &ExperimentConfig, n: usize, t: usize, scenario_seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(scenario_seed);
        let particles = match cfg.mode {
            Mode::Photons => generate_particles(cfg.generator, n, 3, &mut rng),
            Mode::Dbim => Vec::new(),
        };
        Ok(ScenarioState {
            cfg: cfg.clone(),
            n,
            t,
            rng,
            particles,
        })
    }

    pub fn level(&self) -> Result<u32> {
        match self.cfg.mode {
            Mode::Dbim => dbim_level(self.n, self.t),
            Mode::Photons => Ok(0),
        }
    }

    /// Build the scenario for the current iteration, then advance the
    /// evolving state (jitter positions or re-randomize charges).
    pub fn build(&mut self, iteration: usize) -> Result<Scenario> {
        match self.cfg.mode {
            Mode::Photons => {
                if iteration > 0 {
                    jitter_positions(&mut self.particles, 3, self.cfg.jitter, &mut self.rng);
                }
                let tree = build_adaptive_tree(
                    self.particles.clone(),
                    self.t,
                    3,
                    self.cfg.max_depth,
                    self.cfg.periodic,
                )
                .map_err(|e| anyhow!(e))?;
                Ok(Scenario::particles(
                    tree,
                    self.cfg.partitions,
                    self.cfg.batch_size,
                    Some(self.cfg.byte_cap),
                    self.cfg.softening,
                    self.cfg.cache_group as usize,
                ))
            }
            Mode::Dbim => {
                let level = dbim_level(self.n, self.t)?;
                let mut tree = build_uniform_tree(self.n, level, self.cfg.periodic)
                    .map_err(|e| anyhow!(e))?;
                // random input vector per call
                for p in tree.particles.iter_mut() {
                    p.mass = self.rng.gen_range(-1.0..1.0);
                }
                Scenario::pattern(
                    tree,
                    self.cfg.partitions,
                    self.cfg.rf,
                    self.cfg.cache_group as usize,
                )
                .map_err(|e| anyhow!(e))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn dbim_levels() {
        assert_eq!(dbim_level(65536, 64).unwrap(), 5);
        assert_eq!(dbim_level(65536, 256).unwrap(), 4);
        assert_eq!(dbim_level(65536, 16).unwrap(), 6);
        assert_eq!(dbim_level(4, 1).unwrap(), 1);
        assert!(dbim_level(65537, 64).is_err());
        assert!(dbim_level(65536, 96).is_err());
    }

    #[test]
    fn photons_state_is_seed_deterministic() {
        let cfg = parse_config("[experiment]\nseed = 1\n[scenario]\nn = 300\n").unwrap();
        let mut a = ScenarioState::new(&cfg, 300, 8, 99).unwrap();
        let mut b = ScenarioState::new(&cfg, 300, 8, 99).unwrap();
        let sa = a.build(0).unwrap();
        let sb = b.build(0).unwrap();
        assert_eq!(sa.tree.particles, sb.tree.particles);
        assert_eq!(sa.pairs.len(), sb.pairs.len());
        // iteration 1 jitters but stays deterministic
        let sa1 = a.build(1).unwrap();
        let sb1 = b.build(1).unwrap();
        assert_eq!(sa1.tree.particles, sb1.tree.particles);
        assert_ne!(sa.tree.particles, sa1.tree.particles);
    }

    #[test]
    fn dbim_state_randomizes_charges_per_iteration() {
        let cfg = parse_config("[experiment]\nmode = dbim\n[scenario]\nn = 1024\n").unwrap();
        let mut st = ScenarioState::new(&cfg, 1024, 64, 5).unwrap();
        let s0 = st.build(0).unwrap();
        let s1 = st.build(1).unwrap();
        assert_eq!(s0.tree.n_leaves(), 16);
        assert_ne!(s0.tree.particles, s1.tree.particles);
    }
}
