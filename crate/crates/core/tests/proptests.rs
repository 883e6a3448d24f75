//! Property tests for the metric and model invariants.

use p2plab_core::cachesim::{dispersion, simulate_cache, volume, AccessKind, CacheConfig, MemoryTrace};
use p2plab_core::domain::{build_adaptive_tree, classify_interactions, e2_neighbors, Particle};
use p2plab_core::model::{composite_speedup, p2p_speedup};
use proptest::prelude::*;

fn trace_from(accesses: &[(u32, u8)]) -> MemoryTrace {
    let mut t = MemoryTrace::new(1);
    for &(addr, len) in accesses {
        t.record(0, addr as u64, len.max(1), AccessKind::Data);
    }
    t
}

proptest! {
    #[test]
    fn dispersion_is_permutation_invariant(
        mut accesses in prop::collection::vec((0u32..100_000, 1u8..64), 1..200),
        seed in 0u64..1000,
    ) {
        let a = dispersion(&trace_from(&accesses), 128)[0];
        // deterministic shuffle
        let mut s = seed;
        for i in (1..accesses.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            accesses.swap(i, (s >> 33) as usize % (i + 1));
        }
        let b = dispersion(&trace_from(&accesses), 128)[0];
        prop_assert_eq!(a, b);
    }

    #[test]
    fn volume_matches_naive_byte_set(accesses in prop::collection::vec((0u32..4096, 1u8..64), 1..60)) {
        let v = volume(&trace_from(&accesses))[0];
        let mut bytes = std::collections::HashSet::new();
        for &(addr, len) in &accesses {
            for b in addr as u64..addr as u64 + len.max(1) as u64 {
                bytes.insert(b);
            }
        }
        prop_assert_eq!(v, bytes.len() as u64);
    }

    #[test]
    fn fully_associative_misses_never_increase_with_capacity(
        lines in prop::collection::vec(0u64..64, 1..300),
        small_lines in 1u64..8,
        extra in 1u64..8,
    ) {
        let mut t = MemoryTrace::new(1);
        for &l in &lines {
            t.record(0, l * 128, 8, AccessKind::Data);
        }
        let small = CacheConfig::new(small_lines * 128, 128, small_lines as u32, 1).unwrap();
        let big = CacheConfig::new((small_lines + extra) * 128, 128, (small_lines + extra) as u32, 1).unwrap();
        let (m_small, _) = simulate_cache(&t, &small);
        let (m_big, _) = simulate_cache(&t, &big);
        prop_assert!(m_big <= m_small, "LRU inclusion violated: {m_big} > {m_small}");
    }

    #[test]
    fn composite_speedup_is_monotone_in_x_and_one_at_identity(
        share in 0.0f64..=1.0,
        x in 0.01f64..100.0,
    ) {
        let at_one = composite_speedup(share, 1.0).unwrap();
        prop_assert!((at_one - 1.0).abs() < 1e-12);
        let lo = composite_speedup(share, x).unwrap();
        let hi = composite_speedup(share, x * 1.5).unwrap();
        prop_assert!(hi >= lo - 1e-12);
        // Amdahl bound
        prop_assert!(composite_speedup(share, x).unwrap() <= x.max(1.0) + 1e-12);
    }

    #[test]
    fn p2p_speedup_is_bounded_by_extreme_factors(
        raw in prop::collection::vec(0.01f64..1.0, 4),
        xs in prop::collection::vec(0.05f64..20.0, 4),
    ) {
        let sum: f64 = raw.iter().sum();
        let shares = [raw[0] / sum, raw[1] / sum, raw[2] / sum, raw[3] / sum];
        let xs4 = [xs[0], xs[1], xs[2], xs[3]];
        let x = p2p_speedup(shares, xs4).unwrap();
        let min = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = xs.iter().cloned().fold(0.0f64, f64::max);
        prop_assert!(x >= min - 1e-9 && x <= max + 1e-9);
    }

    #[test]
    fn classification_partitions_the_neighbor_relation_set(
        n in 20usize..200,
        t in 1usize..16,
        partitions in 1usize..6,
        seed in 0u64..500,
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<Particle> = (0..n)
            .map(|i| Particle {
                position: [rng.gen(), rng.gen(), rng.gen()],
                mass: 1.0,
                id: i as u32,
            })
            .collect();
        let tree = build_adaptive_tree(pts, t, 3, 64, seed % 2 == 0).unwrap();
        let lists = e2_neighbors(&tree, true);
        let (pairs, stats) = classify_interactions(&tree, &lists, partitions);
        // kinds are mutually exclusive and jointly exhaustive
        prop_assert_eq!(stats.n_local + stats.n_remote + stats.n_periodic, pairs.len());
        prop_assert_eq!(stats.n_interactions, pairs.len());
        prop_assert_eq!(pairs.len(), lists.total_entries());
        // no duplicate (target, source, kind) triples
        let mut seen = std::collections::HashSet::new();
        for p in &pairs {
            prop_assert!(seen.insert((p.target_leaf, p.source_leaf, p.kind)));
        }
        // E2 symmetry
        for (t_id, row) in lists.lists.iter().enumerate() {
            for nb in row {
                prop_assert!(lists.lists[nb.leaf as usize]
                    .iter()
                    .any(|m| m.leaf == t_id as u32));
            }
        }
        prop_assert!(stats.avg_e2 <= stats.max_e2 as f64 + 1e-12);
    }
}
