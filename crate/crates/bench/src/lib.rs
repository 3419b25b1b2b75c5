//! Seeded instances shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robopt::{GroundSet, IndependenceSystem, Objective, ProblemInstance};

pub fn intro() -> ProblemInstance {
    let objectives = vec![
        Objective::linear(vec![1.0, 0.0]).unwrap(),
        Objective::linear(vec![0.0, 1.0]).unwrap(),
    ];
    ProblemInstance::new(
        GroundSet::new(["a", "b"]).unwrap(),
        objectives,
        IndependenceSystem::uniform(2, 1).unwrap(),
    )
    .unwrap()
}

fn linear_objectives(rng: &mut ChaCha8Rng, size: usize, count: usize) -> Vec<Objective> {
    (0..count)
        .map(|_| Objective::linear((0..size).map(|_| rng.gen_range(0..10) as f64).collect()).unwrap())
        .collect()
}

/// Linear objectives over a partition matroid with blocks of three.
pub fn partition_linear(size: usize, scenarios: usize, seed: u64) -> ProblemInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let block_of: Vec<usize> = (0..size).map(|e| e / 3).collect();
    let blocks = size.div_ceil(3);
    let caps = (0..blocks).map(|_| rng.gen_range(1..=2)).collect();
    ProblemInstance::new(
        GroundSet::indexed(size).unwrap(),
        linear_objectives(&mut rng, size, scenarios),
        IndependenceSystem::partition(block_of, caps).unwrap(),
    )
    .unwrap()
}

/// Linear objectives over a knapsack whose capacity is about a third of the
/// total size.
pub fn knapsack_linear(size: usize, scenarios: usize, seed: u64) -> ProblemInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sizes: Vec<u64> = (0..size).map(|_| rng.gen_range(1..20)).collect();
    let capacity = (sizes.iter().sum::<u64>() / 3).max(*sizes.iter().max().unwrap());
    ProblemInstance::new(
        GroundSet::indexed(size).unwrap(),
        linear_objectives(&mut rng, size, scenarios),
        IndependenceSystem::knapsack(sizes, capacity).unwrap(),
    )
    .unwrap()
}

/// Cardinality-robustness ratios `v_{<=k}(X) / v_{<=k}` over a knapsack, with
/// exact denominators.
pub fn cardinality(size: usize, ks: &[usize], seed: u64) -> ProblemInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values: Vec<f64> = (0..size).map(|_| rng.gen_range(1..50) as f64).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    let sizes: Vec<u64> = (0..size).map(|_| rng.gen_range(1..15)).collect();
    let capacity = (sizes.iter().sum::<u64>() / 2).max(*sizes.iter().max().unwrap());
    let system = IndependenceSystem::knapsack(sizes, capacity).unwrap();
    let sets = system.enumerate_independent().unwrap();
    let objectives = ks
        .iter()
        .map(|&k| {
            let probe = Objective::cardinality_ratio(values.clone(), k, 1.0).unwrap();
            let best = sets.iter().map(|s| probe.eval(s)).fold(0.0, f64::max);
            Objective::cardinality_ratio(values.clone(), k, best).unwrap()
        })
        .collect();
    ProblemInstance::new(GroundSet::indexed(size).unwrap(), objectives, system).unwrap()
}
