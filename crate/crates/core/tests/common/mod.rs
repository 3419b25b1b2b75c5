//! Fixtures and independent oracles shared by the integration tests.
//!
//! Every fixture keeps a plain description of its system and objectives so
//! that the oracles here never go through the library's own enumeration or
//! evaluation code.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robopt::subroutines::SubroutineKind;
use robopt::{ElementSet, GroundSet, IndependenceSystem, MixedStrategy, Objective, ProblemInstance};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Debug)]
pub enum SysSpec {
    Uniform { n: usize, r: usize },
    Partition { block_of: Vec<usize>, caps: Vec<usize> },
    Knapsack { sizes: Vec<u64>, cap: u64 },
    Intersection(Vec<SysSpec>),
}

impl SysSpec {
    pub fn ground(&self) -> usize {
        match self {
            SysSpec::Uniform { n, .. } => *n,
            SysSpec::Partition { block_of, .. } => block_of.len(),
            SysSpec::Knapsack { sizes, .. } => sizes.len(),
            SysSpec::Intersection(ms) => ms[0].ground(),
        }
    }

    pub fn contains(&self, mask: u32) -> bool {
        match self {
            SysSpec::Uniform { r, .. } => mask.count_ones() as usize <= *r,
            SysSpec::Partition { block_of, caps } => {
                let mut used = vec![0; caps.len()];
                for (e, &b) in block_of.iter().enumerate() {
                    if mask >> e & 1 == 1 {
                        used[b] += 1;
                    }
                }
                used.iter().zip(caps).all(|(u, c)| u <= c)
            }
            SysSpec::Knapsack { sizes, cap } => {
                let total: u64 = (0..sizes.len()).filter(|&e| mask >> e & 1 == 1).map(|e| sizes[e]).sum();
                total <= *cap
            }
            SysSpec::Intersection(ms) => ms.iter().all(|m| m.contains(mask)),
        }
    }

    pub fn build(&self) -> IndependenceSystem {
        match self {
            SysSpec::Uniform { n, r } => IndependenceSystem::uniform(*n, *r).unwrap(),
            SysSpec::Partition { block_of, caps } => {
                IndependenceSystem::partition(block_of.clone(), caps.clone()).unwrap()
            }
            SysSpec::Knapsack { sizes, cap } => IndependenceSystem::knapsack(sizes.clone(), *cap).unwrap(),
            SysSpec::Intersection(ms) => {
                IndependenceSystem::intersection(ms.iter().map(SysSpec::build).collect()).unwrap()
            }
        }
    }

    pub fn feasible_masks(&self) -> Vec<u32> {
        (0u32..1 << self.ground()).filter(|&m| self.contains(m)).collect()
    }

    /// Matroid rank by brute force.
    pub fn rank(&self, set: u32) -> usize {
        self.feasible_masks()
            .into_iter()
            .filter(|m| m & !set == 0)
            .map(|m| m.count_ones() as usize)
            .max()
            .unwrap_or(0)
    }
}

#[derive(Clone, Debug)]
pub enum ObjSpec {
    Linear(Vec<f64>),
    Table(Vec<f64>),
    Cardinality {
        values: Vec<f64>,
        k: usize,
        denominator: f64,
    },
}

impl ObjSpec {
    pub fn eval(&self, mask: u32) -> f64 {
        match self {
            ObjSpec::Linear(w) => (0..w.len()).filter(|&e| mask >> e & 1 == 1).map(|e| w[e]).sum(),
            ObjSpec::Table(t) => t[mask as usize],
            ObjSpec::Cardinality { values, k, denominator } => {
                let mut chosen: Vec<f64> = (0..values.len())
                    .filter(|&e| mask >> e & 1 == 1)
                    .map(|e| values[e])
                    .collect();
                chosen.sort_by(|a, b| b.total_cmp(a));
                chosen.iter().take(*k).sum::<f64>() / denominator
            }
        }
    }

    pub fn build(&self) -> Objective {
        match self {
            ObjSpec::Linear(w) => Objective::linear(w.clone()).unwrap(),
            ObjSpec::Table(t) => Objective::submodular_table(t.clone()).unwrap(),
            ObjSpec::Cardinality { values, k, denominator } => {
                Objective::cardinality_ratio(values.clone(), *k, *denominator).unwrap()
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: String,
    pub sys: SysSpec,
    pub objs: Vec<ObjSpec>,
    pub inst: ProblemInstance,
}

impl Fixture {
    pub fn new(name: impl Into<String>, sys: SysSpec, objs: Vec<ObjSpec>) -> Self {
        let ground = GroundSet::indexed(sys.ground()).unwrap();
        let inst = ProblemInstance::new(ground, objs.iter().map(ObjSpec::build).collect(), sys.build()).unwrap();
        Fixture {
            name: name.into(),
            sys,
            objs,
            inst,
        }
    }

    pub fn n(&self) -> usize {
        self.objs.len()
    }

    pub fn is_linear(&self) -> bool {
        self.objs.iter().all(|o| matches!(o, ObjSpec::Linear(_)))
    }

    /// `max_X sum_k q_k f_k(X)` by enumeration.
    pub fn best_response_value(&self, q: &[f64]) -> f64 {
        self.sys
            .feasible_masks()
            .into_iter()
            .map(|m| self.objs.iter().zip(q).map(|(f, qk)| qk * f.eval(m)).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `min_k sum_X p_X f_k(X)`, evaluated here rather than by the library.
    pub fn worst_case(&self, p: &MixedStrategy) -> f64 {
        for (s, _) in p.support() {
            assert!(self.sys.contains(mask_of(s)), "{} is not feasible", s);
        }
        self.objs
            .iter()
            .map(|f| p.support().iter().map(|(s, q)| q * f.eval(mask_of(s))).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }

    /// `max_X f_k(X)` for every scenario.
    pub fn scenario_maxima(&self) -> Vec<f64> {
        let masks = self.sys.feasible_masks();
        self.objs
            .iter()
            .map(|f| masks.iter().map(|&m| f.eval(m)).fold(f64::NEG_INFINITY, f64::max))
            .collect()
    }
}

pub fn mask_of(s: &ElementSet) -> u32 {
    s.iter().fold(0u32, |m, e| m | 1 << e)
}

/// Value of a two-scenario game from the points `(f_1(X), f_2(X))`: the
/// best point of their convex hull under `min(x, y)`, found by checking
/// single points and every crossing segment.
pub fn two_scenario_value(points: &[(f64, f64)]) -> f64 {
    let mut best = points.iter().map(|&(a, b)| a.min(b)).fold(f64::NEG_INFINITY, f64::max);
    for &(a1, a2) in points {
        for &(b1, b2) in points {
            let (da, db) = (a1 - a2, b1 - b2);
            if da > 0.0 && db < 0.0 {
                let t = -db / (da - db);
                best = best.max(t * a1 + (1.0 - t) * b1);
            }
        }
    }
    best
}

pub fn random_linear(rng: &mut ChaCha8Rng, n: usize) -> ObjSpec {
    let mut w: Vec<f64> = (0..n).map(|_| rng.gen_range(0..10) as f64).collect();
    if w.iter().all(|&x| x == 0.0) {
        w[rng.gen_range(0..n)] = 1.0 + rng.gen_range(0..5) as f64;
    }
    ObjSpec::Linear(w)
}

/// Weighted coverage table: monotone submodular.
pub fn random_coverage_table(rng: &mut ChaCha8Rng, n: usize) -> ObjSpec {
    let items = rng.gen_range(3..8);
    let weights: Vec<f64> = (0..items).map(|_| rng.gen_range(1..6) as f64).collect();
    let covers: Vec<u32> = (0..n).map(|_| rng.gen_range(1u32..1 << items)).collect();
    let table = (0u32..1 << n)
        .map(|m| {
            let covered = (0..n).filter(|&e| m >> e & 1 == 1).fold(0u32, |c, e| c | covers[e]);
            (0..items).filter(|&i| covered >> i & 1 == 1).map(|i| weights[i]).sum()
        })
        .collect();
    ObjSpec::Table(table)
}

/// Weighted cut function of a random graph: nonnegative, submodular and in
/// general not monotone.
pub fn random_cut_table(rng: &mut ChaCha8Rng, n: usize) -> ObjSpec {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(0.5) {
                edges.push((u, v, rng.gen_range(1..5) as f64));
            }
        }
    }
    if edges.is_empty() {
        edges.push((0, 1, 1.0));
    }
    let table = (0u32..1 << n)
        .map(|m| {
            edges
                .iter()
                .filter(|&&(u, v, _)| (m >> u & 1) != (m >> v & 1))
                .map(|&(_, _, w)| w)
                .sum()
        })
        .collect();
    ObjSpec::Table(table)
}

pub fn random_partition(rng: &mut ChaCha8Rng, n: usize) -> SysSpec {
    let blocks = rng.gen_range(2..=3.min(n));
    let mut block_of: Vec<usize> = (0..n).map(|e| e % blocks).collect();
    block_of.shuffle(rng);
    let caps = (0..blocks).map(|_| rng.gen_range(1..=2)).collect();
    SysSpec::Partition { block_of, caps }
}

pub fn random_uniform(rng: &mut ChaCha8Rng, n: usize) -> SysSpec {
    SysSpec::Uniform {
        n,
        r: rng.gen_range(1..n),
    }
}

pub fn random_knapsack(rng: &mut ChaCha8Rng, n: usize) -> SysSpec {
    let sizes: Vec<u64> = (0..n).map(|_| rng.gen_range(1..10)).collect();
    let max = *sizes.iter().max().unwrap();
    let total: u64 = sizes.iter().sum();
    SysSpec::Knapsack {
        sizes,
        cap: rng.gen_range(max..=max.max(total / 2)),
    }
}

pub fn random_matroid(rng: &mut ChaCha8Rng, n: usize) -> SysSpec {
    if rng.gen_bool(0.5) {
        random_uniform(rng, n)
    } else {
        random_partition(rng, n)
    }
}

/// Mixed corpus: `|E| <= 8`, `n <= 4`, linear and table objectives over
/// matroids and knapsacks.
pub fn random_corpus(seed: u64, count: usize) -> Vec<Fixture> {
    let mut rng = rng(seed);
    (0..count)
        .map(|i| {
            let size = rng.gen_range(4..=8);
            let n = rng.gen_range(1..=4);
            let sys = match rng.gen_range(0..3) {
                0 => random_uniform(&mut rng, size),
                1 => random_partition(&mut rng, size),
                _ => random_knapsack(&mut rng, size),
            };
            let objs = (0..n)
                .map(|_| match rng.gen_range(0..4) {
                    0 | 1 => random_linear(&mut rng, size),
                    2 => random_coverage_table(&mut rng, size),
                    _ => random_cut_table(&mut rng, size),
                })
                .collect();
            Fixture::new(format!("corpus-{i}"), sys, objs)
        })
        .collect()
}

/// Linear objectives over matroids.
pub fn linear_matroid_fixtures(seed: u64, count: usize) -> Vec<Fixture> {
    let mut rng = rng(seed);
    let mut out = vec![intro()];
    for i in 0..count {
        let size = rng.gen_range(3..=8);
        let n = rng.gen_range(1..=4);
        let sys = random_matroid(&mut rng, size);
        let objs = (0..n).map(|_| random_linear(&mut rng, size)).collect();
        out.push(Fixture::new(format!("linear-matroid-{i}"), sys, objs));
    }
    out
}

/// The two-item instance: pick one of `a`, `b`; each scenario rewards only
/// one of them.
pub fn intro() -> Fixture {
    Fixture::new(
        "intro",
        SysSpec::Uniform { n: 2, r: 1 },
        vec![ObjSpec::Linear(vec![1.0, 0.0]), ObjSpec::Linear(vec![0.0, 1.0])],
    )
}

/// Random distribution with all entries positive.
pub fn random_distribution(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Checks submodularity through `f(S+i) + f(S+j) >= f(S+i+j) + f(S)`.
pub fn is_submodular(table: &[f64], n: usize, tol: f64) -> bool {
    for s in 0u32..1 << n {
        for i in (0..n).filter(|&i| s >> i & 1 == 0) {
            for j in (i + 1..n).filter(|&j| s >> j & 1 == 0) {
                let (si, sj, sij) = (s | 1 << i, s | 1 << j, s | 1 << i | 1 << j);
                let lhs = table[si as usize] + table[sj as usize];
                let rhs = table[sij as usize] + table[s as usize];
                if lhs < rhs - tol {
                    return false;
                }
            }
        }
    }
    true
}

/// Cardinality ratios for the given `ks` over a knapsack, with denominators
/// equal to the best attainable top-`k` value.
pub fn cardinality_fixture(name: &str, values: Vec<f64>, sizes: Vec<u64>, cap: u64, ks: &[usize]) -> Fixture {
    let sys = SysSpec::Knapsack { sizes, cap };
    let masks = sys.feasible_masks();
    let objs = ks
        .iter()
        .map(|&k| {
            let unit = ObjSpec::Cardinality {
                values: values.clone(),
                k,
                denominator: 1.0,
            };
            let best = masks.iter().map(|&m| unit.eval(m)).fold(0.0, f64::max);
            ObjSpec::Cardinality {
                values: values.clone(),
                k,
                denominator: best,
            }
        })
        .collect();
    Fixture::new(name, sys, objs)
}

/// An MWU run to check: fixture, oracle and the oracle's own accuracy.
pub struct MwuCase {
    pub fixture: Fixture,
    pub oracle: SubroutineKind,
    pub oracle_epsilon: f64,
}

/// Enumerable fixtures with `n <= 3` and `γ >= 1/8` covering every oracle
/// and reduction.
pub fn mwu_cases() -> Vec<MwuCase> {
    let mut rng = rng(2024);
    let case = |fixture, oracle, oracle_epsilon| MwuCase {
        fixture,
        oracle,
        oracle_epsilon,
    };
    let mut out = vec![case(intro(), SubroutineKind::BruteForce, 0.0)];
    for i in 0..4 {
        let size = rng.gen_range(4..=8);
        let sys = random_matroid(&mut rng, size);
        let n = 2 + i % 2;
        let objs = (0..n).map(|_| random_linear(&mut rng, size)).collect();
        out.push(case(
            Fixture::new(format!("mwu-linear-{i}"), sys, objs),
            SubroutineKind::BruteForce,
            0.0,
        ));
    }
    let sys = random_partition(&mut rng, 6);
    let objs = (0..3).map(|_| random_linear(&mut rng, 6)).collect();
    out.push(case(Fixture::new("mwu-greedy", sys, objs), SubroutineKind::Greedy, 0.0));
    let objs = (0..3).map(|_| random_coverage_table(&mut rng, 6)).collect();
    out.push(case(
        Fixture::new("mwu-coverage", SysSpec::Uniform { n: 6, r: 2 }, objs),
        SubroutineKind::BruteForce,
        0.0,
    ));
    let sys = random_partition(&mut rng, 6);
    let objs = (0..2).map(|_| random_cut_table(&mut rng, 6)).collect();
    out.push(case(
        Fixture::new("mwu-cut", sys, objs),
        SubroutineKind::BruteForce,
        0.0,
    ));
    let sys = random_knapsack(&mut rng, 7);
    let objs = (0..3).map(|_| random_linear(&mut rng, 7)).collect();
    out.push(case(
        Fixture::new("mwu-knapsack", sys, objs),
        SubroutineKind::KnapsackFptas,
        0.1,
    ));
    out.push(case(
        cardinality_fixture(
            "mwu-cardinality",
            vec![9.0, 7.0, 5.0, 4.0, 2.0, 1.0],
            vec![6, 5, 4, 3, 2, 2],
            10,
            &[1, 3, 6],
        ),
        SubroutineKind::CardinalityDp,
        0.1,
    ));
    out
}

/// Equal-cardinality partition of `a` into two halves of equal sum.
pub fn has_equal_partition(a: &[u64]) -> bool {
    let n = a.len() / 2;
    let total: u64 = a.iter().sum();
    total.is_multiple_of(2)
        && (0u32..1 << a.len())
            .filter(|m| m.count_ones() as usize == n)
            .any(|m| (0..a.len()).filter(|&i| m >> i & 1 == 1).map(|i| a[i]).sum::<u64>() * 2 == total)
}

/// Sorted values and a knapsack on at most 8 items.
pub fn knapsack_items(rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<u64>, u64) {
    let n = rng.gen_range(3..=8);
    let mut values: Vec<f64> = (0..n).map(|_| rng.gen_range(1..30) as f64).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    let sizes: Vec<u64> = (0..n).map(|_| rng.gen_range(1..12)).collect();
    let max = *sizes.iter().max().unwrap();
    let total: u64 = sizes.iter().sum();
    (values, sizes, rng.gen_range(max..=max.max(total * 2 / 3)))
}

pub fn top_k(values: &[f64], mask: u32, k: usize) -> f64 {
    let mut chosen: Vec<f64> = (0..values.len())
        .filter(|&e| mask >> e & 1 == 1)
        .map(|e| values[e])
        .collect();
    chosen.sort_by(|a, b| b.total_cmp(a));
    chosen.iter().take(k).sum()
}

/// Largest coordinate difference between the marginals of `p` and `x`.
pub fn reconstruction_error(p: &MixedStrategy, x: &[f64]) -> f64 {
    let mut m = vec![0.0; x.len()];
    for (s, q) in p.support() {
        for e in s.iter() {
            m[e] += q;
        }
    }
    m.iter().zip(x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}
