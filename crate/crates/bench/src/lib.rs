//! Deterministic workload generators shared by the benchmarks.

use quest_core::pareto::{Dimension, Direction, MetricSpace, MetricVector, PointId};
use quest_core::runner::RawRun;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Space of `dims` metrics with alternating directions.
pub fn space(dims: usize) -> MetricSpace {
    MetricSpace::new(
        (0..dims)
            .map(|k| {
                let dir = if k % 2 == 0 {
                    Direction::Minimize
                } else {
                    Direction::Maximize
                };
                Dimension::new(format!("m{k}"), dir, "u")
            })
            .collect(),
    )
    .expect("generated space is valid")
}

/// `n` uniform random points in `[0, 1)^dims`.
pub fn points(n: usize, dims: usize, seed: u64) -> Vec<(PointId, MetricVector)> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let v = MetricVector::try_from_pairs((0..dims).map(|k| (format!("m{k}"), rng.random::<f64>())))
                .expect("finite values");
            (format!("p{i}"), v)
        })
        .collect()
}

/// `n` successful repetitions with jittered timings and accuracies.
pub fn runs(n: u32, seed: u64) -> Vec<RawRun> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..n)
        .map(|i| RawRun {
            repetition_index: i,
            wall_time_s: 0.2 + rng.random::<f64>() * 0.01,
            accuracy: Some(0.7 + rng.random::<f64>() * 0.01),
            energy_j: Some(rng.random::<f64>() * 3.0),
            peak_mem_bytes: Some(rng.random_range(1 << 20..1 << 30)),
            exit_ok: true,
            log_excerpt: String::new(),
        })
        .collect()
}
