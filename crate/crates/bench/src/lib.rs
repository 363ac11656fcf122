//! Deterministic instance generators shared by the benchmarks.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use ruralnet_core::{ApSet, BackhaulNode, InfectionParams, PlanarPoint};

/// Weighted users gathered into `n_blobs` settlements on a 100 km field.
pub fn clustered_users(n_users: usize, n_blobs: usize, seed: u64) -> Vec<PlanarPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<(f64, f64)> = (0..n_blobs)
        .map(|_| {
            (
                rng.random::<f64>() * 100_000.0,
                rng.random::<f64>() * 100_000.0,
            )
        })
        .collect();
    (0..n_users)
        .map(|i| {
            let (cx, cy) = centers[i % n_blobs];
            PlanarPoint::weighted(
                cx + rng.random_range(-400.0..=400.0),
                cy + rng.random_range(-400.0..=400.0),
                rng.random_range(1..=10) as f64,
            )
        })
        .collect()
}

/// Access points and terrestrial nodes scattered over the unit square,
/// the frame the growth process runs in.
pub fn growth_instance(n_bns: usize, n_aps: usize, seed: u64) -> (ApSet, Vec<BackhaulNode>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bns = (0..n_bns)
        .map(|_| BackhaulNode::terrestrial(rng.random::<f64>(), rng.random::<f64>()))
        .collect();
    let centers = (0..n_aps)
        .map(|_| PlanarPoint::new(rng.random::<f64>(), rng.random::<f64>()))
        .collect();
    (ApSet::new(centers, 0.05).unwrap(), bns)
}

/// Growth parameters mild enough that large instances settle quickly while
/// still exercising the distance-dependent slowdown.
pub fn bench_params() -> InfectionParams {
    InfectionParams {
        gamma: 100.0,
        delta: 0.05,
        ..InfectionParams::default()
    }
}
