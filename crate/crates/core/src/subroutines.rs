//! Approximate best responses `max_{X in I} sum_k q_k g_k(X)`.
//!
//! Every oracle certifies a ratio `α`: its answer is at least `α` times the
//! optimum over `I`.

use crate::error::{Error, Result};
use crate::exact::MAX_EXACT_GROUND;
use crate::instance::{ElementSet, Objective, ProblemInstance};
use crate::reductions::ReducedFamily;
use crate::systems::{IndependenceSystem, KnapsackSystem};

/// Largest dynamic-programming table (in cells) any oracle allocates.
pub const MAX_DP_CELLS: usize = 50_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct BestResponse {
    pub set: ElementSet,
    /// `sum_k q_k g_k(set)` for the family the response was computed for.
    pub value: f64,
    pub alpha: f64,
}

pub trait BestResponder {
    fn name(&self) -> &'static str;

    /// Certified approximation ratio in `(0, 1]`.
    fn alpha(&self) -> f64;

    fn best_response(&mut self, q: &[f64], family: &ReducedFamily) -> Result<BestResponse>;
}

/// Selects an oracle by name; used by the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubroutineKind {
    BruteForce,
    Greedy,
    KnapsackFptas,
    CardinalityDp,
}

impl SubroutineKind {
    pub fn build(self, inst: &ProblemInstance, epsilon: f64) -> Result<Box<dyn BestResponder>> {
        Ok(match self {
            SubroutineKind::BruteForce => Box::new(BruteForce::new(inst)?),
            SubroutineKind::Greedy => Box::new(Greedy::new(inst)?),
            SubroutineKind::KnapsackFptas => Box::new(KnapsackFptas::new(inst, epsilon)?),
            SubroutineKind::CardinalityDp => Box::new(CardinalityDp::new(inst, epsilon)?),
        })
    }

    /// A reasonable oracle for the instance's objective and system kinds.
    pub fn default_for(inst: &ProblemInstance) -> Self {
        let all_cardinality = inst
            .objectives()
            .iter()
            .all(|f| matches!(f, Objective::CardinalityRatio(_)));
        match inst.system() {
            IndependenceSystem::Knapsack(_) if all_cardinality => SubroutineKind::CardinalityDp,
            IndependenceSystem::Knapsack(_) if inst.all_linear() => SubroutineKind::KnapsackFptas,
            s if s.matroid_count() == Some(1) && inst.all_linear() => SubroutineKind::Greedy,
            _ => SubroutineKind::BruteForce,
        }
    }
}

/// Exact best response by enumeration of `I` (`α = 1`).
pub struct BruteForce {
    sets: Vec<ElementSet>,
    cache: Option<(u64, Vec<Vec<f64>>)>,
}

impl BruteForce {
    pub fn new(inst: &ProblemInstance) -> Result<Self> {
        let system = inst.system();
        if system.is_path_system() {
            return Err(Error::Unsupported("brute force over s-t path families".into()));
        }
        if !matches!(system, IndependenceSystem::Explicit(_)) && inst.ground_size() > MAX_EXACT_GROUND {
            return Err(Error::SizeLimit {
                what: "brute-force ground set",
                limit: MAX_EXACT_GROUND,
                actual: inst.ground_size(),
            });
        }
        Ok(BruteForce {
            sets: system.enumerate_independent()?,
            cache: None,
        })
    }

    pub fn sets(&self) -> &[ElementSet] {
        &self.sets
    }
}

impl BestResponder for BruteForce {
    fn name(&self) -> &'static str {
        "brute-force"
    }

    fn alpha(&self) -> f64 {
        1.0
    }

    fn best_response(&mut self, q: &[f64], family: &ReducedFamily) -> Result<BestResponse> {
        family.check_weights(q)?;
        if self.cache.as_ref().is_none_or(|(id, _)| *id != family.id()) {
            let table = self.sets.iter().map(|s| family.values(s)).collect();
            self.cache = Some((family.id(), table));
        }
        let (_, table) = self.cache.as_ref().expect("cache filled above");
        let mut best = (0usize, f64::NEG_INFINITY);
        for (i, row) in table.iter().enumerate() {
            let v: f64 = row
                .iter()
                .zip(q)
                .map(|(g, &qk)| if qk == 0.0 { 0.0 } else { qk * g })
                .sum();
            if v > best.1 {
                best = (i, v);
            }
        }
        Ok(BestResponse {
            set: self.sets[best.0].clone(),
            value: best.1,
            alpha: 1.0,
        })
    }
}

/// Greedy by decreasing marginal gain over a matroid or an intersection of
/// `μ` matroids. Certified `α = 1/μ` for linear objectives and `1/(μ+1)` for
/// monotone submodular ones.
pub struct Greedy {
    system: IndependenceSystem,
    mu: usize,
    linear: bool,
}

impl Greedy {
    pub fn new(inst: &ProblemInstance) -> Result<Self> {
        let system = inst.system();
        let Some(mu) = system.matroid_count() else {
            return Err(Error::Unsupported(format!(
                "greedy needs a matroid or matroid intersection, got `{}`",
                system.kind_name()
            )));
        };
        if !inst.all_monotone() {
            return Err(Error::Precondition("greedy requires monotone objectives".into()));
        }
        Ok(Greedy {
            system: system.clone(),
            mu,
            linear: inst.all_linear(),
        })
    }

    pub fn mu(&self) -> usize {
        self.mu
    }
}

impl BestResponder for Greedy {
    fn name(&self) -> &'static str {
        "greedy"
    }

    fn alpha(&self) -> f64 {
        if self.linear {
            1.0 / self.mu as f64
        } else {
            1.0 / (self.mu as f64 + 1.0)
        }
    }

    fn best_response(&mut self, q: &[f64], family: &ReducedFamily) -> Result<BestResponse> {
        family.check_weights(q)?;
        let set = match family.mixed_linear_weights(q) {
            Some(w) => greedy_linear(&self.system, &w)?,
            None => {
                if self.linear {
                    return Err(Error::Precondition(
                        "greedy was certified for linear objectives but the reduced family is not linear".into(),
                    ));
                }
                if family.objectives().iter().any(|g| !g.is_monotone()) {
                    return Err(Error::Precondition("greedy requires a monotone mixture".into()));
                }
                greedy_marginal(&self.system, |s| family.mixture(q, s))?
            }
        };
        Ok(BestResponse {
            value: family.mixture(q, &set),
            set,
            alpha: self.alpha(),
        })
    }
}

/// Adds elements of positive weight in decreasing weight order (ties to the
/// lower index) whenever independence is preserved.
pub fn greedy_linear(system: &IndependenceSystem, weights: &[f64]) -> Result<ElementSet> {
    let mut order: Vec<usize> = (0..weights.len()).filter(|&e| weights[e] > 0.0).collect();
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
    let mut set = ElementSet::empty();
    for e in order {
        let next = set.with(e);
        if system.is_independent(&next)? {
            set = next;
        }
    }
    Ok(set)
}

/// Repeatedly adds the feasible element of largest positive marginal gain.
pub fn greedy_marginal(system: &IndependenceSystem, f: impl Fn(&ElementSet) -> f64) -> Result<ElementSet> {
    let n = system.ground_size();
    let mut set = ElementSet::empty();
    let mut current = f(&set);
    loop {
        let mut best: Option<(usize, f64)> = None;
        for e in (0..n).filter(|&e| !set.contains(e)) {
            let next = set.with(e);
            if !system.is_independent(&next)? {
                continue;
            }
            let gain = f(&next) - current;
            if gain > 1e-15 && best.is_none_or(|(_, g)| gain > g) {
                best = Some((e, gain));
            }
        }
        match best {
            Some((e, gain)) => {
                set = set.with(e);
                current += gain;
            }
            None => return Ok(set),
        }
    }
}

fn knapsack_of(inst: &ProblemInstance) -> Result<&KnapsackSystem> {
    match inst.system() {
        IndependenceSystem::Knapsack(k) => Ok(k),
        s => Err(Error::Unsupported(format!(
            "knapsack oracle on a `{}` system",
            s.kind_name()
        ))),
    }
}

fn check_epsilon(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Config(format!("ε = {eps} must lie in (0,1)")));
    }
    Ok(())
}

/// Profit-scaling knapsack FPTAS over the mixed clipped weights
/// (`α = 1 - ε`).
pub struct KnapsackFptas {
    sizes: Vec<u64>,
    capacity: u64,
    epsilon: f64,
}

impl KnapsackFptas {
    pub fn new(inst: &ProblemInstance, epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        let k = knapsack_of(inst)?;
        if !inst.all_linear() {
            return Err(Error::Unsupported("knapsack FPTAS needs linear objectives".into()));
        }
        Ok(KnapsackFptas {
            sizes: k.sizes().to_vec(),
            capacity: k.capacity(),
            epsilon,
        })
    }
}

impl BestResponder for KnapsackFptas {
    fn name(&self) -> &'static str {
        "knapsack-fptas"
    }

    fn alpha(&self) -> f64 {
        1.0 - self.epsilon
    }

    fn best_response(&mut self, q: &[f64], family: &ReducedFamily) -> Result<BestResponse> {
        family.check_weights(q)?;
        let Some(w) = family.mixed_linear_weights(q) else {
            return Err(Error::Precondition(
                "knapsack FPTAS needs a linear reduced family".into(),
            ));
        };
        let set = knapsack_fptas(&self.sizes, self.capacity, &w, self.epsilon)?;
        Ok(BestResponse {
            value: family.mixture(q, &set),
            set,
            alpha: self.alpha(),
        })
    }
}

/// Returns a knapsack solution of profit at least `(1-ε)` times optimal.
///
/// Profits are scaled by `K = ε·max_p/|E|` and floored; a table over
/// `(item, scaled profit)` keeps the smallest size attaining each profit.
pub fn knapsack_fptas(sizes: &[u64], capacity: u64, profits: &[f64], eps: f64) -> Result<ElementSet> {
    check_epsilon(eps)?;
    if sizes.len() != profits.len() {
        return Err(Error::Precondition("sizes and profits differ in length".into()));
    }
    if let Some(p) = profits.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(Error::Precondition(format!("profit {p} must be nonnegative")));
    }
    let total: u128 = sizes.iter().map(|&s| s as u128).sum();
    if total <= capacity as u128 {
        return Ok(ElementSet::new(0..sizes.len()));
    }
    let items: Vec<usize> = (0..sizes.len())
        .filter(|&e| sizes[e] <= capacity && profits[e] > 0.0)
        .collect();
    let max_p = items.iter().map(|&e| profits[e]).fold(0.0, f64::max);
    if items.is_empty() || max_p <= 0.0 {
        return Ok(ElementSet::empty());
    }
    let k = eps * max_p / sizes.len() as f64;
    let scaled: Vec<usize> = items.iter().map(|&e| (profits[e] / k).floor() as usize).collect();
    let bound: usize = scaled.iter().sum();
    let cells = (items.len() + 1) * (bound + 1);
    if cells > MAX_DP_CELLS {
        return Err(Error::SizeLimit {
            what: "knapsack DP cells",
            limit: MAX_DP_CELLS,
            actual: cells,
        });
    }
    const INF: u64 = u64::MAX;
    let width = bound + 1;
    // size[i][p]: smallest size of a subset of the first i items with scaled profit p
    let mut size = vec![INF; cells];
    size[0] = 0;
    for (i, (&e, &p)) in items.iter().zip(&scaled).enumerate() {
        let (prev, next) = size.split_at_mut((i + 1) * width);
        let prev = &prev[i * width..];
        let next = &mut next[..width];
        next.copy_from_slice(prev);
        for profit in p..width {
            let base = prev[profit - p];
            if base != INF {
                let cand = base.saturating_add(sizes[e]);
                if cand < next[profit] {
                    next[profit] = cand;
                }
            }
        }
    }
    let last = &size[items.len() * width..];
    let mut profit = (0..width)
        .rev()
        .find(|&p| last[p] <= capacity)
        .expect("profit 0 is always attainable");
    let mut chosen = Vec::new();
    for i in (0..items.len()).rev() {
        let here = size[(i + 1) * width + profit];
        let before = size[i * width + profit];
        if here != before {
            chosen.push(items[i]);
            profit -= scaled[i];
        }
    }
    Ok(ElementSet::new(chosen))
}

/// Estimate `v*` of `max {v_{<=k}(X) : X in I}` with
/// `OPT <= v* <= OPT/(1-ε)`.
///
/// Exact when all fitting items fit together or `k = 1`; otherwise a
/// cardinality-constrained profit-scaling table over
/// `(count, scaled profit)` is used.
pub fn v_le_k_fptas(system: &KnapsackSystem, values: &[f64], k: usize, eps: f64) -> Result<f64> {
    check_epsilon(eps)?;
    if k == 0 {
        return Err(Error::Precondition("k must be at least 1".into()));
    }
    let sizes = system.sizes();
    if values.len() != sizes.len() {
        return Err(Error::Precondition("one value per item required".into()));
    }
    let cap = system.capacity();
    let fitting: Vec<usize> = (0..sizes.len()).filter(|&e| sizes[e] <= cap).collect();
    let mut fit_values: Vec<f64> = fitting.iter().map(|&e| values[e]).collect();
    fit_values.sort_unstable_by(|a, b| b.total_cmp(a));
    let top_k: f64 = fit_values.iter().take(k).sum();
    let fitting_size: u128 = fitting.iter().map(|&e| sizes[e] as u128).sum();
    if fitting_size <= cap as u128 {
        return Ok(top_k);
    }
    if k == 1 {
        return Ok(fit_values.first().copied().unwrap_or(0.0));
    }
    let vmax = fit_values[0];
    if vmax <= 0.0 {
        return Ok(0.0);
    }
    let scale = eps * vmax / k as f64;
    let scaled: Vec<usize> = fitting.iter().map(|&e| (values[e] / scale).floor() as usize).collect();
    let mut sorted = scaled.clone();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let bound: usize = sorted.iter().take(k).sum();
    let width = bound + 1;
    let cells = (k + 1) * width;
    if cells > MAX_DP_CELLS {
        return Err(Error::SizeLimit {
            what: "cardinality knapsack DP cells",
            limit: MAX_DP_CELLS,
            actual: cells,
        });
    }
    const INF: u64 = u64::MAX;
    // size[c][p]: smallest size of exactly c items with scaled profit p
    let mut size = vec![INF; cells];
    size[0] = 0;
    for (&e, &p) in fitting.iter().zip(&scaled) {
        for c in (1..=k).rev() {
            for profit in (p..width).rev() {
                let base = size[(c - 1) * width + profit - p];
                if base != INF {
                    let cand = base.saturating_add(sizes[e]);
                    let cell = &mut size[c * width + profit];
                    if cand < *cell {
                        *cell = cand;
                    }
                }
            }
        }
    }
    let best = (0..width)
        .rev()
        .find(|&p| (0..=k).any(|c| size[c * width + p] <= cap))
        .expect("profit 0 is always attainable");
    Ok((scale * (best + k) as f64).min(top_k))
}

/// Scaled-profit table of the cardinality-robustness best response.
#[derive(Clone, Debug)]
pub struct CardinalityTable {
    items: usize,
    width: usize,
    cells: Vec<u64>,
}

impl CardinalityTable {
    /// Smallest size of a subset of the first `zeta` items with `xi`
    /// members and scaled value `phi`; `None` when no such subset exists.
    pub fn tau(&self, zeta: usize, xi: usize, phi: usize) -> Option<u64> {
        if zeta > self.items || xi > self.items || phi >= self.width {
            return None;
        }
        let v = self.cells[self.index(zeta, xi, phi)];
        (v != u64::MAX).then_some(v)
    }

    pub fn phi_bound(&self) -> usize {
        self.width - 1
    }

    fn index(&self, zeta: usize, xi: usize, phi: usize) -> usize {
        (zeta * (self.items + 1) + xi) * self.width + phi
    }
}

#[derive(Clone, Debug)]
pub struct CardinalityDpResult {
    pub set: ElementSet,
    /// `κ·f̄(set)`.
    pub phi: usize,
    pub kappa: u64,
    pub table: CardinalityTable,
}

/// Maximizes the floor-scaled surrogate of `sum_j q_j v_{<=k_j}(X)/d_j` over
/// knapsack solutions.
///
/// Items must be sorted by nonincreasing value. Writing `c_r` for
/// `sum_{j : k_j >= r} q_j/d_j`, the `r`-th largest chosen item contributes
/// `floor(c_r·v·κ)` with `κ = ceil(|E|·n/ε)`.
pub fn cardinality_dp(
    system: &KnapsackSystem,
    values: &[f64],
    ks: &[usize],
    denominators: &[f64],
    q: &[f64],
    eps: f64,
) -> Result<CardinalityDpResult> {
    check_epsilon(eps)?;
    let m = values.len();
    let sizes = system.sizes();
    if sizes.len() != m {
        return Err(Error::Precondition("one value per item required".into()));
    }
    if ks.len() != denominators.len() || ks.len() != q.len() {
        return Err(Error::Precondition(
            "k, denominator and weight lists differ in length".into(),
        ));
    }
    if values.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::Precondition(
            "items must be sorted by nonincreasing value".into(),
        ));
    }
    let n = ks.len();
    let kappa = ((m * n) as f64 / eps).ceil() as u64;
    let coeff: Vec<f64> = (1..=m)
        .map(|r| {
            ks.iter()
                .zip(denominators)
                .zip(q)
                .filter(|((&k, _), _)| k >= r)
                .map(|((_, &d), &qj)| qj / d)
                .sum()
        })
        .collect();
    let contrib =
        |item: usize, pos: usize| -> usize { (coeff[pos - 1] * values[item] * kappa as f64).floor() as usize };
    let phi_max: usize = (1..=m).map(|r| contrib(r - 1, r)).sum();
    let width = phi_max + 1;
    let cells = (m + 1) * (m + 1) * width;
    if cells > MAX_DP_CELLS {
        return Err(Error::SizeLimit {
            what: "cardinality DP cells",
            limit: MAX_DP_CELLS,
            actual: cells,
        });
    }
    let mut table = CardinalityTable {
        items: m,
        width,
        cells: vec![u64::MAX; cells],
    };
    let first = table.index(0, 0, 0);
    table.cells[first] = 0;
    for zeta in 1..=m {
        let item = zeta - 1;
        for xi in 0..=zeta {
            for phi in 0..width {
                let mut best = table.cells[table.index(zeta - 1, xi, phi)];
                if xi >= 1 {
                    let c = contrib(item, xi);
                    if phi >= c {
                        let prev = table.cells[table.index(zeta - 1, xi - 1, phi - c)];
                        if prev != u64::MAX {
                            best = best.min(prev.saturating_add(sizes[item]));
                        }
                    }
                }
                let at = table.index(zeta, xi, phi);
                table.cells[at] = best;
            }
        }
    }
    let cap = system.capacity();
    let (mut xi, phi) = (0..width)
        .rev()
        .find_map(|phi| {
            (0..=m)
                .find(|&xi| table.tau(m, xi, phi).is_some_and(|s| s <= cap))
                .map(|xi| (xi, phi))
        })
        .expect("the empty set is feasible");
    let mut chosen = Vec::new();
    let mut rest = phi;
    for zeta in (1..=m).rev() {
        if xi == 0 {
            break;
        }
        let here = table.cells[table.index(zeta, xi, rest)];
        let skip = table.cells[table.index(zeta - 1, xi, rest)];
        if here != skip {
            chosen.push(zeta - 1);
            rest -= contrib(zeta - 1, xi);
            xi -= 1;
        }
    }
    Ok(CardinalityDpResult {
        set: ElementSet::new(chosen),
        phi,
        kappa,
        table,
    })
}

/// Best response for cardinality-ratio objectives over a knapsack
/// (`α = 1 - 2ε`).
pub struct CardinalityDp {
    system: KnapsackSystem,
    values: Vec<f64>,
    ks: Vec<usize>,
    denominators: Vec<f64>,
    epsilon: f64,
}

impl CardinalityDp {
    pub fn new(inst: &ProblemInstance, epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        if epsilon >= 0.5 {
            return Err(Error::Config(format!("ε = {epsilon} leaves no positive ratio 1 - 2ε")));
        }
        let system = knapsack_of(inst)?.clone();
        let mut values: Option<&[f64]> = None;
        let mut ks = Vec::new();
        let mut denominators = Vec::new();
        for f in inst.objectives() {
            let Objective::CardinalityRatio(c) = f else {
                return Err(Error::Unsupported(format!(
                    "cardinality DP needs cardinality-ratio objectives, got `{}`",
                    f.kind_name()
                )));
            };
            match values {
                None => values = Some(c.values()),
                Some(v) if v != c.values() => {
                    return Err(Error::Precondition(
                        "cardinality objectives must share item values".into(),
                    ))
                }
                _ => {}
            }
            ks.push(c.k());
            denominators.push(c.denominator());
        }
        let values = values.expect("instances have objectives").to_vec();
        if values.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Precondition(
                "items must be sorted by nonincreasing value".into(),
            ));
        }
        Ok(CardinalityDp {
            system,
            values,
            ks,
            denominators,
            epsilon,
        })
    }
}

impl BestResponder for CardinalityDp {
    fn name(&self) -> &'static str {
        "cardinality-dp"
    }

    fn alpha(&self) -> f64 {
        1.0 - 2.0 * self.epsilon
    }

    fn best_response(&mut self, q: &[f64], family: &ReducedFamily) -> Result<BestResponse> {
        family.check_weights(q)?;
        let res = cardinality_dp(
            &self.system,
            &self.values,
            &self.ks,
            &self.denominators,
            q,
            self.epsilon,
        )?;
        Ok(BestResponse {
            value: family.mixture(q, &res.set),
            set: res.set,
            alpha: self.alpha(),
        })
    }
}
