//! Independence systems with membership, rank and separation routines.
//!
//! Every kind except [`StPathSystem`] is downward closed. The s–t path family
//! is not: its feasible sets are arc subsets containing an s–t path, and it is
//! only ever optimized through the dominant of its polytope.

mod flow;

use std::collections::{HashSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::{ElementSet, TOLERANCE};

pub(crate) use flow::FlowNetwork;

/// Largest ground set handled by exhaustive enumeration and separation.
pub const MAX_EXHAUSTIVE_GROUND: usize = 20;

/// `I = {X : |X| <= rank}`.
#[derive(Clone, Debug, PartialEq)]
pub struct UniformMatroid {
    ground: usize,
    rank: usize,
}

impl UniformMatroid {
    pub fn rank_bound(&self) -> usize {
        self.rank
    }
}

/// Each element lies in exactly one block; at most `capacity` elements of a
/// block may be chosen.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionMatroid {
    block_of: Vec<usize>,
    capacities: Vec<usize>,
}

impl PartitionMatroid {
    pub fn block_of(&self) -> &[usize] {
        &self.block_of
    }

    pub fn capacities(&self) -> &[usize] {
        &self.capacities
    }
}

/// Independence system listed set by set.
#[derive(Clone, Debug, PartialEq)]
pub struct ExplicitSystem {
    ground: usize,
    sets: Vec<ElementSet>,
    masks: HashSet<u32>,
    matroid: bool,
}

impl ExplicitSystem {
    pub fn sets(&self) -> &[ElementSet] {
        &self.sets
    }
}

/// `I = {X : sum_{e in X} s(e) <= C}` with positive integer sizes.
#[derive(Clone, Debug, PartialEq)]
pub struct KnapsackSystem {
    sizes: Vec<u64>,
    capacity: u64,
}

impl KnapsackSystem {
    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn total_size(&self, set: &ElementSet) -> u128 {
        set.iter().map(|e| self.sizes[e] as u128).sum()
    }
}

/// Digraph whose arcs form the ground set; feasible sets contain an s–t path.
#[derive(Clone, Debug, PartialEq)]
pub struct StPathSystem {
    nodes: usize,
    arcs: Vec<(usize, usize)>,
    source: usize,
    sink: usize,
}

impl StPathSystem {
    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn arcs(&self) -> &[(usize, usize)] {
        &self.arcs
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    /// Whether the arcs of `set` connect source to sink.
    pub fn connects(&self, set: &ElementSet) -> bool {
        self.find_path(|a| set.contains(a)).is_some()
    }

    /// Breadth-first s–t path using only arcs accepted by `usable`; returns
    /// arc indices in path order.
    pub fn find_path(&self, usable: impl Fn(usize) -> bool) -> Option<Vec<usize>> {
        let mut parent: Vec<Option<usize>> = vec![None; self.nodes];
        let mut seen = vec![false; self.nodes];
        seen[self.source] = true;
        let mut queue = VecDeque::from([self.source]);
        while let Some(u) = queue.pop_front() {
            if u == self.sink {
                break;
            }
            for (a, &(from, to)) in self.arcs.iter().enumerate() {
                if from == u && !seen[to] && usable(a) {
                    seen[to] = true;
                    parent[to] = Some(a);
                    queue.push_back(to);
                }
            }
        }
        if !seen[self.sink] {
            return None;
        }
        let mut path = Vec::new();
        let mut v = self.sink;
        while v != self.source {
            let a = parent[v].expect("reached nodes have a parent arc");
            path.push(a);
            v = self.arcs[a].0;
        }
        path.reverse();
        Some(path)
    }

    /// All simple s–t paths as arc sets, in depth-first order.
    pub fn simple_paths(&self, limit: usize) -> Result<Vec<ElementSet>> {
        let mut out = Vec::new();
        let mut on_path = vec![false; self.nodes];
        let mut arcs = Vec::new();
        on_path[self.source] = true;
        self.paths_from(self.source, &mut on_path, &mut arcs, &mut out, limit)?;
        Ok(out)
    }

    fn paths_from(
        &self,
        u: usize,
        on_path: &mut [bool],
        arcs: &mut Vec<usize>,
        out: &mut Vec<ElementSet>,
        limit: usize,
    ) -> Result<()> {
        if u == self.sink {
            if out.len() >= limit {
                return Err(Error::SizeLimit {
                    what: "number of s-t paths",
                    limit,
                    actual: out.len() + 1,
                });
            }
            out.push(ElementSet::new(arcs.iter().copied()));
            return Ok(());
        }
        for (a, &(from, to)) in self.arcs.iter().enumerate() {
            if from == u && !on_path[to] {
                on_path[to] = true;
                arcs.push(a);
                self.paths_from(to, on_path, arcs, out, limit)?;
                arcs.pop();
                on_path[to] = false;
            }
        }
        Ok(())
    }
}

/// Minimum s–t cut under arc capacities `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct StCut {
    pub value: f64,
    /// Arcs leaving the source side.
    pub arcs: ElementSet,
    pub source_side: Vec<bool>,
}

/// A rank inequality `x(U) <= rank` violated by `load = x(U)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RankCut {
    pub set: ElementSet,
    pub rank: usize,
    pub load: f64,
}

impl RankCut {
    pub fn violation(&self) -> f64 {
        self.load - self.rank as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Separation {
    Member,
    Violated(RankCut),
}

#[derive(Clone, Debug, PartialEq)]
pub enum IndependenceSystem {
    Uniform(UniformMatroid),
    Partition(PartitionMatroid),
    Explicit(ExplicitSystem),
    Knapsack(KnapsackSystem),
    Intersection(Vec<IndependenceSystem>),
    StPath(StPathSystem),
}

impl IndependenceSystem {
    pub fn uniform(ground: usize, rank: usize) -> Result<Self> {
        if ground == 0 {
            return Err(Error::InvalidInstance("uniform matroid on empty ground set".into()));
        }
        Ok(IndependenceSystem::Uniform(UniformMatroid { ground, rank }))
    }

    pub fn partition(block_of: Vec<usize>, capacities: Vec<usize>) -> Result<Self> {
        if let Some((e, &b)) = block_of.iter().enumerate().find(|(_, &b)| b >= capacities.len()) {
            return Err(Error::InvalidInstance(format!(
                "element {e} assigned to missing block {b}"
            )));
        }
        Ok(IndependenceSystem::Partition(PartitionMatroid { block_of, capacities }))
    }

    /// Builds an explicit system. The list must contain `∅` and be closed
    /// under taking subsets; the matroid exchange property is recorded.
    pub fn explicit(ground: usize, sets: Vec<ElementSet>) -> Result<Self> {
        if ground > MAX_EXHAUSTIVE_GROUND {
            return Err(Error::SizeLimit {
                what: "explicit system ground set",
                limit: MAX_EXHAUSTIVE_GROUND,
                actual: ground,
            });
        }
        let mut masks = HashSet::with_capacity(sets.len());
        let mut unique = Vec::with_capacity(sets.len());
        for s in sets {
            s.check_range(ground)?;
            let m = s.to_mask().expect("ground <= 20") as u32;
            if masks.insert(m) {
                unique.push(s);
            }
        }
        if !masks.contains(&0) {
            return Err(Error::InvalidInstance(
                "explicit system must contain the empty set".into(),
            ));
        }
        for &m in &masks {
            let mut rest = m;
            while rest != 0 {
                let bit = rest & rest.wrapping_neg();
                if !masks.contains(&(m & !bit)) {
                    return Err(Error::InvalidInstance(format!(
                        "explicit system is not downward closed: {} is listed but {} is not",
                        ElementSet::from_mask(m as u64),
                        ElementSet::from_mask((m & !bit) as u64)
                    )));
                }
                rest &= rest - 1;
            }
        }
        let matroid = exchange_violation(&unique, &masks).is_none();
        Ok(IndependenceSystem::Explicit(ExplicitSystem {
            ground,
            sets: unique,
            masks,
            matroid,
        }))
    }

    pub fn knapsack(sizes: Vec<u64>, capacity: u64) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidInstance("knapsack with no items".into()));
        }
        if let Some(e) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::InvalidInstance(format!("item {e} has size 0")));
        }
        Ok(IndependenceSystem::Knapsack(KnapsackSystem { sizes, capacity }))
    }

    pub fn intersection(members: Vec<IndependenceSystem>) -> Result<Self> {
        let Some(first) = members.first() else {
            return Err(Error::InvalidInstance("intersection of zero matroids".into()));
        };
        let ground = first.ground_size();
        for (i, m) in members.iter().enumerate() {
            if !m.is_matroid() {
                return Err(Error::InvalidInstance(format!(
                    "intersection member {i} is not a matroid"
                )));
            }
            if m.ground_size() != ground {
                return Err(Error::InvalidInstance(format!(
                    "intersection member {i} has a different ground set"
                )));
            }
        }
        Ok(IndependenceSystem::Intersection(members))
    }

    pub fn st_path(nodes: usize, arcs: Vec<(usize, usize)>, source: usize, sink: usize) -> Result<Self> {
        if source >= nodes || sink >= nodes {
            return Err(Error::InvalidInstance("source or sink is not a node".into()));
        }
        if source == sink {
            return Err(Error::InvalidInstance("source and sink coincide".into()));
        }
        if arcs.is_empty() {
            return Err(Error::InvalidInstance("digraph has no arcs".into()));
        }
        if let Some(&(u, v)) = arcs.iter().find(|(u, v)| *u >= nodes || *v >= nodes) {
            return Err(Error::InvalidInstance(format!("arc ({u},{v}) uses a missing node")));
        }
        Ok(IndependenceSystem::StPath(StPathSystem {
            nodes,
            arcs,
            source,
            sink,
        }))
    }

    pub fn ground_size(&self) -> usize {
        match self {
            IndependenceSystem::Uniform(u) => u.ground,
            IndependenceSystem::Partition(p) => p.block_of.len(),
            IndependenceSystem::Explicit(x) => x.ground,
            IndependenceSystem::Knapsack(k) => k.sizes.len(),
            IndependenceSystem::Intersection(ms) => ms[0].ground_size(),
            IndependenceSystem::StPath(g) => g.arcs.len(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            IndependenceSystem::Uniform(_) => "uniform",
            IndependenceSystem::Partition(_) => "partition",
            IndependenceSystem::Explicit(_) => "explicit",
            IndependenceSystem::Knapsack(_) => "knapsack",
            IndependenceSystem::Intersection(_) => "intersection",
            IndependenceSystem::StPath(_) => "st_path",
        }
    }

    pub fn is_path_system(&self) -> bool {
        matches!(self, IndependenceSystem::StPath(_))
    }

    pub fn is_matroid(&self) -> bool {
        match self {
            IndependenceSystem::Uniform(_) | IndependenceSystem::Partition(_) => true,
            IndependenceSystem::Explicit(x) => x.matroid,
            IndependenceSystem::Intersection(ms) => ms.len() == 1,
            _ => false,
        }
    }

    /// Number `μ` of matroids whose intersection this system is.
    pub fn matroid_count(&self) -> Option<usize> {
        match self {
            IndependenceSystem::Intersection(ms) => Some(ms.len()),
            s if s.is_matroid() => Some(1),
            _ => None,
        }
    }

    /// The matroids whose intersection this system is.
    pub fn matroid_members(&self) -> Option<Vec<&IndependenceSystem>> {
        match self {
            IndependenceSystem::Intersection(ms) => Some(ms.iter().collect()),
            s if s.is_matroid() => Some(vec![s]),
            _ => None,
        }
    }

    pub fn is_independent(&self, set: &ElementSet) -> Result<bool> {
        set.check_range(self.ground_size())?;
        Ok(self.contains(set))
    }

    fn contains(&self, set: &ElementSet) -> bool {
        match self {
            IndependenceSystem::Uniform(u) => set.len() <= u.rank,
            IndependenceSystem::Partition(p) => {
                let mut used = vec![0usize; p.capacities.len()];
                set.iter().all(|e| {
                    let b = p.block_of[e];
                    used[b] += 1;
                    used[b] <= p.capacities[b]
                })
            }
            IndependenceSystem::Explicit(x) => {
                let m = set.to_mask().expect("checked range") as u32;
                x.masks.contains(&m)
            }
            IndependenceSystem::Knapsack(k) => k.total_size(set) <= k.capacity as u128,
            IndependenceSystem::Intersection(ms) => ms.iter().all(|m| m.contains(set)),
            IndependenceSystem::StPath(g) => g.connects(set),
        }
    }

    fn contains_mask(&self, mask: u64) -> bool {
        match self {
            IndependenceSystem::Uniform(u) => mask.count_ones() as usize <= u.rank,
            IndependenceSystem::Explicit(x) => x.masks.contains(&(mask as u32)),
            IndependenceSystem::Knapsack(k) => {
                let mut total = 0u128;
                let mut m = mask;
                while m != 0 {
                    total += k.sizes[m.trailing_zeros() as usize] as u128;
                    m &= m - 1;
                }
                total <= k.capacity as u128
            }
            IndependenceSystem::Intersection(ms) => ms.iter().all(|m| m.contains_mask(mask)),
            _ => self.contains(&ElementSet::from_mask(mask)),
        }
    }

    /// Size of a largest independent subset of `set`, found greedily.
    pub fn matroid_rank(&self, set: &ElementSet) -> Result<usize> {
        set.check_range(self.ground_size())?;
        match self {
            IndependenceSystem::Uniform(u) => Ok(set.len().min(u.rank)),
            IndependenceSystem::Partition(p) => {
                let mut count = vec![0usize; p.capacities.len()];
                for e in set.iter() {
                    count[p.block_of[e]] += 1;
                }
                Ok(count.iter().zip(&p.capacities).map(|(&c, &cap)| c.min(cap)).sum())
            }
            IndependenceSystem::Explicit(x) if x.matroid => {
                let mut current = 0u64;
                for e in set.iter() {
                    let next = current | (1 << e);
                    if x.masks.contains(&(next as u32)) {
                        current = next;
                    }
                }
                Ok(current.count_ones() as usize)
            }
            IndependenceSystem::Intersection(ms) if ms.len() == 1 => ms[0].matroid_rank(set),
            other => Err(Error::Unsupported(format!(
                "rank function of a non-matroid `{}` system",
                other.kind_name()
            ))),
        }
    }

    /// Every independent set, in depth-first order of increasing element
    /// index (so `∅` comes first).
    pub fn enumerate_independent(&self) -> Result<Vec<ElementSet>> {
        if let IndependenceSystem::Explicit(x) = self {
            let mut sets = x.sets.clone();
            sets.sort_by_key(|s| s.to_mask());
            return Ok(sets);
        }
        if self.is_path_system() {
            return Err(Error::Unsupported(
                "s-t path families are enumerated as paths, not as an independence system".into(),
            ));
        }
        let n = self.ground_size();
        if n > MAX_EXHAUSTIVE_GROUND {
            return Err(Error::SizeLimit {
                what: "enumeration ground set",
                limit: MAX_EXHAUSTIVE_GROUND,
                actual: n,
            });
        }
        let mut out = Vec::new();
        let mut stack = vec![(0u64, 0usize)];
        while let Some((mask, next)) = stack.pop() {
            out.push(ElementSet::from_mask(mask));
            for e in (next..n).rev() {
                let m = mask | (1 << e);
                if self.contains_mask(m) {
                    stack.push((m, e + 1));
                }
            }
        }
        Ok(out)
    }

    /// Inclusion-wise maximal independent sets.
    pub fn enumerate_bases(&self) -> Result<Vec<ElementSet>> {
        let n = self.ground_size();
        let all = self.enumerate_independent()?;
        Ok(all
            .into_iter()
            .filter(|s| {
                let mask = s.to_mask().expect("enumerated sets are small");
                (0..n).all(|e| mask & (1 << e) != 0 || !self.contains_mask(mask | (1 << e)))
            })
            .collect())
    }

    /// Separation over the matroid polytope `{x >= 0 : x(U) <= ρ(U) ∀U}` by
    /// exhaustive minimization of `ρ(U) - x(U)` over all subsets. Ties go to
    /// the subset with the smallest bit mask.
    pub fn separate_matroid_polytope(&self, x: &[f64]) -> Result<Separation> {
        if !self.is_matroid() {
            return Err(Error::Unsupported(format!(
                "matroid polytope separation for a `{}` system",
                self.kind_name()
            )));
        }
        let n = self.ground_size();
        if x.len() != n {
            return Err(Error::Precondition(format!(
                "point has {} coordinates, ground set has {n}",
                x.len()
            )));
        }
        if n > MAX_EXHAUSTIVE_GROUND {
            return Err(Error::SizeLimit {
                what: "exhaustive separation ground set",
                limit: MAX_EXHAUSTIVE_GROUND,
                actual: n,
            });
        }
        if let Some((e, v)) = x
            .iter()
            .enumerate()
            .find(|(_, &v)| !(-TOLERANCE..=1.0 + TOLERANCE).contains(&v))
        {
            return Err(Error::Precondition(format!("x[{e}] = {v} is outside [0,1]")));
        }
        let mut best: Option<(u64, f64, usize, f64)> = None;
        let mut load = vec![0.0f64; 1 << n];
        for mask in 1u64..(1 << n) {
            let low = mask.trailing_zeros() as usize;
            load[mask as usize] = load[(mask & (mask - 1)) as usize] + x[low];
            let set = ElementSet::from_mask(mask);
            let rank = self.matroid_rank(&set)?;
            let slack = rank as f64 - load[mask as usize];
            if best.is_none_or(|(_, s, _, _)| slack < s) {
                best = Some((mask, slack, rank, load[mask as usize]));
            }
        }
        match best {
            Some((mask, slack, rank, load)) if slack < -TOLERANCE => Ok(Separation::Violated(RankCut {
                set: ElementSet::from_mask(mask),
                rank,
                load,
            })),
            _ => Ok(Separation::Member),
        }
    }

    /// Minimum s–t cut with arc capacities `x`, via maximum flow.
    pub fn min_st_cut(&self, x: &[f64]) -> Result<StCut> {
        let IndependenceSystem::StPath(g) = self else {
            return Err(Error::Unsupported(format!(
                "s-t cuts on a `{}` system",
                self.kind_name()
            )));
        };
        if x.len() != g.arcs.len() {
            return Err(Error::Precondition(format!(
                "capacity vector has {} entries, digraph has {} arcs",
                x.len(),
                g.arcs.len()
            )));
        }
        if let Some((a, v)) = x.iter().enumerate().find(|(_, &v)| !v.is_finite() || v < -TOLERANCE) {
            return Err(Error::Precondition(format!("capacity of arc {a} is {v}")));
        }
        let mut net = FlowNetwork::new(g.nodes);
        for (&(u, v), &cap) in g.arcs.iter().zip(x) {
            net.add_arc(u, v, cap.max(0.0));
        }
        net.max_flow(g.source, g.sink);
        let side = net.source_side(g.source);
        let arcs: ElementSet = g
            .arcs
            .iter()
            .enumerate()
            .filter(|(_, &(u, v))| side[u] && !side[v])
            .map(|(a, _)| a)
            .collect();
        let value = arcs.iter().map(|a| x[a].max(0.0)).sum();
        Ok(StCut {
            value,
            arcs,
            source_side: side,
        })
    }
}

/// First pair `(X, Y)` with `|X| < |Y|` admitting no exchange element.
fn exchange_violation(sets: &[ElementSet], masks: &HashSet<u32>) -> Option<(ElementSet, ElementSet)> {
    let violates = |x: &ElementSet, y: &ElementSet| {
        let xm = x.to_mask().expect("small") as u32;
        x.len() < y.len()
            && !y
                .iter()
                .filter(|&e| !x.contains(e))
                .any(|e| masks.contains(&(xm | (1 << e))))
    };
    if sets.len() <= 2000 {
        for x in sets {
            for y in sets {
                if violates(x, y) {
                    return Some((x.clone(), y.clone()));
                }
            }
        }
        None
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0xe8c4);
        for _ in 0..200_000 {
            let x = &sets[rng.gen_range(0..sets.len())];
            let y = &sets[rng.gen_range(0..sets.len())];
            if violates(x, y) {
                return Some((x.clone(), y.clone()));
            }
        }
        None
    }
}
