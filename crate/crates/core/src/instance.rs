//! Problem instances: ground sets, objective families and mixed strategies.
//!
//! A [`ProblemInstance`] bundles a ground set `E`, objectives `f_1..f_n` and an
//! independence system. Solvers look for a distribution `p` over independent
//! sets maximizing `min_k sum_X p_X f_k(X)`.

use std::collections::HashMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::systems::IndependenceSystem;

/// Absolute tolerance used for equality of reals throughout the crate.
pub const TOLERANCE: f64 = 1e-9;

/// Largest ground set for which a full subset table may be stored.
pub const MAX_TABLE_GROUND: usize = 20;

/// A subset of the ground set, stored as sorted dense element indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "Vec<usize>", into = "Vec<usize>")]
pub struct ElementSet(Vec<usize>);

impl ElementSet {
    pub fn new<I: IntoIterator<Item = usize>>(elements: I) -> Self {
        let mut v: Vec<usize> = elements.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        ElementSet(v)
    }

    pub fn empty() -> Self {
        ElementSet(Vec::new())
    }

    pub fn singleton(e: usize) -> Self {
        ElementSet(vec![e])
    }

    /// Builds the set whose members are the one bits of `mask`.
    pub fn from_mask(mask: u64) -> Self {
        let mut v = Vec::with_capacity(mask.count_ones() as usize);
        let mut m = mask;
        while m != 0 {
            let e = m.trailing_zeros() as usize;
            v.push(e);
            m &= m - 1;
        }
        ElementSet(v)
    }

    /// Bit mask of the set; `None` when some index is 64 or larger.
    pub fn to_mask(&self) -> Option<u64> {
        let mut mask = 0u64;
        for &e in &self.0 {
            if e >= 64 {
                return None;
            }
            mask |= 1 << e;
        }
        Some(mask)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, e: usize) -> bool {
        self.0.binary_search(&e).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn with(&self, e: usize) -> Self {
        match self.0.binary_search(&e) {
            Ok(_) => self.clone(),
            Err(pos) => {
                let mut v = self.0.clone();
                v.insert(pos, e);
                ElementSet(v)
            }
        }
    }

    pub fn without(&self, e: usize) -> Self {
        ElementSet(self.0.iter().copied().filter(|&x| x != e).collect())
    }

    pub fn is_subset(&self, other: &ElementSet) -> bool {
        self.0.iter().all(|&e| other.contains(e))
    }

    pub fn union(&self, other: &ElementSet) -> Self {
        ElementSet::new(self.iter().chain(other.iter()))
    }

    pub fn intersection(&self, other: &ElementSet) -> Self {
        ElementSet(self.iter().filter(|&e| other.contains(e)).collect())
    }

    /// Characteristic vector over a ground set of `size` elements.
    pub fn indicator(&self, size: usize) -> Vec<f64> {
        let mut v = vec![0.0; size];
        for e in self.iter() {
            v[e] = 1.0;
        }
        v
    }

    pub fn max_element(&self) -> Option<usize> {
        self.0.last().copied()
    }

    pub(crate) fn check_range(&self, size: usize) -> Result<()> {
        match self.0.last() {
            Some(&e) if e >= size => Err(Error::ElementOutOfRange { index: e, size }),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ElementSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "}}")
    }
}

impl From<Vec<usize>> for ElementSet {
    fn from(v: Vec<usize>) -> Self {
        ElementSet::new(v)
    }
}

impl From<ElementSet> for Vec<usize> {
    fn from(s: ElementSet) -> Self {
        s.0
    }
}

impl FromIterator<usize> for ElementSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        ElementSet::new(iter)
    }
}

/// Ordered, duplicate-free list of element identifiers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundSet {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl GroundSet {
    pub fn new<S: Into<String>, I: IntoIterator<Item = S>>(names: I) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::InvalidInstance("ground set is empty".into()));
        }
        let mut index = HashMap::with_capacity(names.len());
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(Error::InvalidInstance(format!("duplicate element identifier `{n}`")));
            }
        }
        Ok(GroundSet { names, index })
    }

    /// Ground set `e0, e1, ...` of the given size.
    pub fn indexed(size: usize) -> Result<Self> {
        GroundSet::new((0..size).map(|i| format!("e{i}")))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownElement(name.to_string()))
    }

    pub fn set_of<S: AsRef<str>>(&self, names: &[S]) -> Result<ElementSet> {
        names
            .iter()
            .map(|n| self.index_of(n.as_ref()))
            .collect::<Result<Vec<_>>>()
            .map(ElementSet::new)
    }

    pub fn names_of(&self, set: &ElementSet) -> Vec<String> {
        set.iter().map(|e| self.names[e].clone()).collect()
    }

    pub fn full_set(&self) -> ElementSet {
        ElementSet::new(0..self.len())
    }
}

/// Linear objective `f(X) = sum_{e in X} w_e` with `w >= 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearObjective {
    weights: Vec<f64>,
}

impl LinearObjective {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// A set function given by its full value table, indexed by subset bit mask.
#[derive(Clone, Debug, PartialEq)]
pub struct TableObjective {
    ground: usize,
    values: Vec<f64>,
    monotone: bool,
}

impl TableObjective {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_of_mask(&self, mask: u64) -> f64 {
        self.values[mask as usize]
    }
}

/// Weighted coverage: each element covers a set of items; `f(X)` is the
/// weight of items covered by `X`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverageObjective {
    covers: Vec<Vec<usize>>,
    item_weights: Vec<f64>,
}

impl CoverageObjective {
    pub fn covers(&self) -> &[Vec<usize>] {
        &self.covers
    }

    pub fn item_weights(&self) -> &[f64] {
        &self.item_weights
    }
}

/// `f(X) = v_{<=k}(X) / denominator`, where `v_{<=k}(X)` sums the `k` largest
/// values in `X`. The denominator estimates the best attainable `v_{<=k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct CardinalityRatio {
    values: Vec<f64>,
    k: usize,
    denominator: f64,
}

impl CardinalityRatio {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn denominator(&self) -> f64 {
        self.denominator
    }

    /// Sum of the `k` largest element values of `set`.
    pub fn top_k_value(&self, set: &ElementSet) -> f64 {
        top_k_sum(&self.values, set, self.k)
    }
}

pub(crate) fn top_k_sum(values: &[f64], set: &ElementSet, k: usize) -> f64 {
    let mut vals: Vec<f64> = set.iter().map(|e| values[e]).collect();
    if vals.len() > k {
        vals.sort_unstable_by(|a, b| b.total_cmp(a));
        vals.truncate(k);
    }
    vals.iter().fold(0.0, |acc, v| acc + v)
}

/// A nonnegative set function with `f(∅) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub enum Objective {
    Linear(LinearObjective),
    SubmodularTable(TableObjective),
    Coverage(CoverageObjective),
    CardinalityRatio(CardinalityRatio),
}

fn check_finite_nonneg(what: &str, values: &[f64]) -> Result<()> {
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::InvalidInstance(format!(
                "{what}[{i}] = {v} must be finite and nonnegative"
            )));
        }
    }
    Ok(())
}

impl Objective {
    pub fn linear(weights: Vec<f64>) -> Result<Self> {
        check_finite_nonneg("linear weight", &weights)?;
        Ok(Objective::Linear(LinearObjective { weights }))
    }

    /// Builds a table objective from `2^|E|` values indexed by bit mask.
    ///
    /// The table must satisfy `f(∅) = 0`, be nonnegative and submodular.
    /// Submodularity is checked exhaustively up to 12 elements and by
    /// deterministic sampling above.
    pub fn submodular_table(values: Vec<f64>) -> Result<Self> {
        let len = values.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::InvalidInstance(format!(
                "table length {len} is not a power of two"
            )));
        }
        let ground = len.trailing_zeros() as usize;
        if ground > MAX_TABLE_GROUND {
            return Err(Error::SizeLimit {
                what: "submodular table ground set",
                limit: MAX_TABLE_GROUND,
                actual: ground,
            });
        }
        check_finite_nonneg("table value", &values)?;
        if values[0].abs() > TOLERANCE {
            return Err(Error::InvalidInstance(format!(
                "table value of the empty set is {} (must be 0)",
                values[0]
            )));
        }
        if let Some((x, a, b)) = submodularity_violation(&values, ground) {
            return Err(Error::InvalidInstance(format!(
                "table is not submodular at X={}, a={a}, b={b}",
                ElementSet::from_mask(x)
            )));
        }
        let monotone = table_is_monotone(&values, ground);
        Ok(Objective::SubmodularTable(TableObjective {
            ground,
            values,
            monotone,
        }))
    }

    pub fn coverage(covers: Vec<Vec<usize>>, item_weights: Vec<f64>) -> Result<Self> {
        check_finite_nonneg("item weight", &item_weights)?;
        for (e, items) in covers.iter().enumerate() {
            if let Some(&bad) = items.iter().find(|&&i| i >= item_weights.len()) {
                return Err(Error::InvalidInstance(format!("element {e} covers unknown item {bad}")));
            }
        }
        Ok(Objective::Coverage(CoverageObjective { covers, item_weights }))
    }

    pub fn cardinality_ratio(values: Vec<f64>, k: usize, denominator: f64) -> Result<Self> {
        check_finite_nonneg("item value", &values)?;
        if k == 0 {
            return Err(Error::InvalidInstance("cardinality bound k must be >= 1".into()));
        }
        if !denominator.is_finite() || denominator <= 0.0 {
            return Err(Error::InvalidInstance(format!(
                "cardinality denominator {denominator} must be positive"
            )));
        }
        Ok(Objective::CardinalityRatio(CardinalityRatio { values, k, denominator }))
    }

    pub fn ground_size(&self) -> usize {
        match self {
            Objective::Linear(l) => l.weights.len(),
            Objective::SubmodularTable(t) => t.ground,
            Objective::Coverage(c) => c.covers.len(),
            Objective::CardinalityRatio(c) => c.values.len(),
        }
    }

    pub fn eval(&self, set: &ElementSet) -> f64 {
        match self {
            Objective::Linear(l) => set.iter().fold(0.0, |acc, e| acc + l.weights[e]),
            Objective::SubmodularTable(t) => {
                let mask = set.to_mask().expect("table objectives have at most 20 elements");
                t.values[mask as usize]
            }
            Objective::Coverage(c) => {
                let mut covered = vec![false; c.item_weights.len()];
                let mut total = 0.0;
                for e in set.iter() {
                    for &i in &c.covers[e] {
                        if !covered[i] {
                            covered[i] = true;
                            total += c.item_weights[i];
                        }
                    }
                }
                total
            }
            Objective::CardinalityRatio(c) => c.top_k_value(set) / c.denominator,
        }
    }

    pub fn is_monotone(&self) -> bool {
        match self {
            Objective::SubmodularTable(t) => t.monotone,
            _ => true,
        }
    }

    pub fn linear_weights(&self) -> Option<&[f64]> {
        match self {
            Objective::Linear(l) => Some(&l.weights),
            _ => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Objective::Linear(_) => "linear",
            Objective::SubmodularTable(_) => "submodular_table",
            Objective::Coverage(_) => "coverage",
            Objective::CardinalityRatio(_) => "cardinality_ratio",
        }
    }
}

fn table_tol(values: &[f64]) -> f64 {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    TOLERANCE * (1.0 + scale)
}

/// Finds `(X, a, b)` with `f(X+a) + f(X+b) < f(X+a+b) + f(X)`.
fn submodularity_violation(values: &[f64], ground: usize) -> Option<(u64, usize, usize)> {
    let tol = table_tol(values);
    let check = |x: u64, a: usize, b: usize| {
        let xa = x | (1 << a);
        let xb = x | (1 << b);
        let xab = xa | xb;
        values[xa as usize] + values[xb as usize] + tol < values[xab as usize] + values[x as usize]
    };
    if ground <= 12 {
        for x in 0..(1u64 << ground) {
            for a in 0..ground {
                if x & (1 << a) != 0 {
                    continue;
                }
                for b in (a + 1)..ground {
                    if x & (1 << b) == 0 && check(x, a, b) {
                        return Some((x, a, b));
                    }
                }
            }
        }
        None
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..50_000 {
            let a = rng.gen_range(0..ground);
            let mut b = rng.gen_range(0..ground - 1);
            if b >= a {
                b += 1;
            }
            let x = rng.gen_range(0..(1u64 << ground)) & !(1 << a) & !(1 << b);
            if check(x, a, b) {
                return Some((x, a, b));
            }
        }
        None
    }
}

fn table_is_monotone(values: &[f64], ground: usize) -> bool {
    let tol = table_tol(values);
    (0..(1u64 << ground)).all(|x| {
        (0..ground)
            .filter(|&e| x & (1 << e) == 0)
            .all(|e| values[(x | (1 << e)) as usize] + tol >= values[x as usize])
    })
}

/// Ground set, objective family and feasibility system.
#[derive(Clone, Debug)]
pub struct ProblemInstance {
    ground: GroundSet,
    objectives: Vec<Objective>,
    system: IndependenceSystem,
}

impl ProblemInstance {
    /// Validates dimensions and the positivity assumption: every objective
    /// must attain a positive value on some feasible set. For the subadditive
    /// objectives supported here this is equivalent to some feasible
    /// singleton having positive value.
    pub fn new(ground: GroundSet, objectives: Vec<Objective>, system: IndependenceSystem) -> Result<Self> {
        if objectives.is_empty() {
            return Err(Error::InvalidInstance("no objectives given".into()));
        }
        let size = ground.len();
        if system.ground_size() != size {
            return Err(Error::InvalidInstance(format!(
                "system is defined on {} elements but the ground set has {size}",
                system.ground_size()
            )));
        }
        for (k, f) in objectives.iter().enumerate() {
            if f.ground_size() != size {
                return Err(Error::InvalidInstance(format!(
                    "objective {k} is defined on {} elements but the ground set has {size}",
                    f.ground_size()
                )));
            }
        }
        if !system.is_path_system() {
            for (k, f) in objectives.iter().enumerate() {
                let positive = (0..size).any(|e| {
                    let s = ElementSet::singleton(e);
                    f.eval(&s) > 0.0 && system.is_independent(&s).unwrap_or(false)
                });
                if !positive {
                    return Err(Error::InvalidInstance(format!(
                        "objective {k} is zero on every feasible set"
                    )));
                }
            }
        }
        Ok(ProblemInstance {
            ground,
            objectives,
            system,
        })
    }

    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    pub fn objectives(&self) -> &[Objective] {
        &self.objectives
    }

    pub fn system(&self) -> &IndependenceSystem {
        &self.system
    }

    /// Number of scenarios `n`.
    pub fn scenario_count(&self) -> usize {
        self.objectives.len()
    }

    pub fn ground_size(&self) -> usize {
        self.ground.len()
    }

    /// All objective values `f_1(X), ..., f_n(X)`.
    pub fn values(&self, set: &ElementSet) -> Vec<f64> {
        self.objectives.iter().map(|f| f.eval(set)).collect()
    }

    /// Worst case `min_k f_k(X)` of a deterministic choice.
    pub fn deterministic_value(&self, set: &ElementSet) -> f64 {
        self.objectives
            .iter()
            .map(|f| f.eval(set))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn all_monotone(&self) -> bool {
        self.objectives.iter().all(Objective::is_monotone)
    }

    pub fn all_linear(&self) -> bool {
        self.objectives.iter().all(|f| f.linear_weights().is_some())
    }

    /// Weight matrix `w[k][e]` when all objectives are linear.
    pub fn linear_weight_matrix(&self) -> Option<Vec<Vec<f64>>> {
        self.objectives
            .iter()
            .map(|f| f.linear_weights().map(<[f64]>::to_vec))
            .collect()
    }
}

/// Finite-support distribution over feasible sets.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedStrategy {
    support: Vec<(ElementSet, f64)>,
}

impl MixedStrategy {
    /// Checks that probabilities are nonnegative and sum to one within 1e-9.
    pub fn new(support: Vec<(ElementSet, f64)>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidStrategy("empty support".into()));
        }
        let mut total = 0.0;
        for (set, p) in &support {
            if !p.is_finite() || *p < -TOLERANCE {
                return Err(Error::InvalidStrategy(format!("probability {p} of {set} is negative")));
            }
            total += p;
        }
        if (total - 1.0).abs() > TOLERANCE {
            return Err(Error::InvalidStrategy(format!("probabilities sum to {total}, not 1")));
        }
        Ok(MixedStrategy { support })
    }

    /// Normalizes nonnegative weights into a strategy, merging duplicate
    /// sets and dropping zero weights.
    pub fn from_weights(weights: Vec<(ElementSet, f64)>) -> Result<Self> {
        let mut merged: Vec<(ElementSet, f64)> = Vec::new();
        let mut position: HashMap<ElementSet, usize> = HashMap::new();
        for (set, w) in weights {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidStrategy(format!("weight {w} of {set} is negative")));
            }
            if w == 0.0 {
                continue;
            }
            match position.get(&set) {
                Some(&i) => merged[i].1 += w,
                None => {
                    position.insert(set.clone(), merged.len());
                    merged.push((set, w));
                }
            }
        }
        let total: f64 = merged.iter().map(|(_, w)| w).sum();
        if total <= 0.0 {
            return Err(Error::InvalidStrategy("all weights are zero".into()));
        }
        for (_, w) in &mut merged {
            *w /= total;
        }
        Ok(MixedStrategy { support: merged })
    }

    pub fn point_mass(set: ElementSet) -> Self {
        MixedStrategy {
            support: vec![(set, 1.0)],
        }
    }

    pub fn support(&self) -> &[(ElementSet, f64)] {
        &self.support
    }

    pub fn support_size(&self) -> usize {
        self.support.len()
    }

    /// Per-element marginals `x_e = sum_{X ∋ e} p_X`.
    pub fn marginals(&self, size: usize) -> Vec<f64> {
        let mut x = vec![0.0; size];
        for (set, p) in &self.support {
            for e in set.iter() {
                x[e] += p;
            }
        }
        x
    }

    /// Errors unless every support set is feasible for `inst`.
    pub fn validate_for(&self, inst: &ProblemInstance) -> Result<()> {
        for (set, _) in &self.support {
            set.check_range(inst.ground_size())
                .map_err(|e| Error::InvalidStrategy(e.to_string()))?;
            if !inst.system().is_independent(set)? {
                return Err(Error::InvalidStrategy(format!("support set {set} is not independent")));
            }
        }
        Ok(())
    }

    /// Expected value of every objective under this strategy.
    pub fn expected_values(&self, inst: &ProblemInstance) -> Vec<f64> {
        let mut out = vec![0.0; inst.scenario_count()];
        for (set, p) in &self.support {
            for (k, f) in inst.objectives().iter().enumerate() {
                out[k] += p * f.eval(set);
            }
        }
        out
    }
}

/// `min_k sum_X p_X f_k(X)`.
pub fn worst_case_value(p: &MixedStrategy, inst: &ProblemInstance) -> Result<f64> {
    p.validate_for(inst)?;
    Ok(p.expected_values(inst).into_iter().fold(f64::INFINITY, f64::min))
}

/// `sum_k q_k f_k(X)` for a scenario distribution `q`.
pub fn scenario_value(set: &ElementSet, q: &[f64], inst: &ProblemInstance) -> Result<f64> {
    check_distribution(q, inst.scenario_count())?;
    set.check_range(inst.ground_size())?;
    Ok(inst
        .objectives()
        .iter()
        .zip(q)
        .map(|(f, &qk)| if qk == 0.0 { 0.0 } else { qk * f.eval(set) })
        .sum())
}

pub(crate) fn check_distribution(q: &[f64], n: usize) -> Result<()> {
    if q.len() != n {
        return Err(Error::Precondition(format!(
            "scenario distribution has {} entries, expected {n}",
            q.len()
        )));
    }
    if q.iter().any(|&v| !v.is_finite() || v < -TOLERANCE) {
        return Err(Error::Precondition("scenario distribution has negative entries".into()));
    }
    let total: f64 = q.iter().sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::Precondition(format!(
            "scenario distribution sums to {total}, not 1"
        )));
    }
    Ok(())
}
