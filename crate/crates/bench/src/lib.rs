//! Shared fixtures for the benchmarks.

use irsvlc::{default_scene, sample_blockers, sample_ue, trial_rng, OrientedBox, PhotoDetector, Scene};

/// Default scene with `n`×`n` mirror arrays and blockers at `density`.
pub fn scene(n: usize, density: f64) -> Scene {
    default_scene(n).and_then(|s| s.with_blocker_density(density)).expect("valid default scene")
}

/// A fixed receiver and blocker draw from the scene's samplers.
pub fn draw(scene: &Scene, seed: u64) -> (PhotoDetector, Vec<OrientedBox>) {
    let mut rng = trial_rng(seed, 0);
    let ue = sample_ue(&mut rng, scene);
    let blockers = sample_blockers(&mut rng, scene);
    (ue, blockers)
}
