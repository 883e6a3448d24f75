//! Wall-clock behavior of the phase measurement, kept in its own test
//! binary so nothing else runs concurrently while timing.

use p2plab_core::domain::{build_adaptive_tree, generate_particles, GeneratorKind};
use p2plab_core::exec::{measure_once, median_phase_times, Layout, Scenario};
use rand::SeedableRng;

fn scenario(n: usize, t: usize, seed: u64) -> Scenario {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let pts = generate_particles(GeneratorKind::Uniform, n, 3, &mut rng);
    let tree = build_adaptive_tree(pts, t, 3, 64, true).unwrap();
    Scenario::particles(tree, 4, 20000, None, 1e-3, 32)
}

#[test]
fn doubling_n_roughly_doubles_collect_time() {
    // linear packers: the ratio of medians over >= 5 runs lies in [1.5, 3]
    let small = scenario(50_000, 4, 3);
    let large = scenario(100_000, 4, 3);
    let reps = 9;
    let mut ts = Vec::new();
    let mut tl = Vec::new();
    let _ = measure_once(&small, Layout::Indexing).unwrap();
    let _ = measure_once(&large, Layout::Indexing).unwrap();
    for _ in 0..reps {
        ts.push(measure_once(&small, Layout::Indexing).unwrap().times);
        tl.push(measure_once(&large, Layout::Indexing).unwrap().times);
    }
    let ratio = median_phase_times(&tl).collect / median_phase_times(&ts).collect;
    assert!(
        (1.5..=3.0).contains(&ratio),
        "collect scaling ratio {ratio} outside [1.5, 3]"
    );
}
