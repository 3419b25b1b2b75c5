//! Exact solutions by enumeration, plus instance generators for hard cases.

use crate::error::{Error, Result};
use crate::instance::{ElementSet, GroundSet, MixedStrategy, Objective, ProblemInstance};
use crate::lpsolver::{solve_lp, Direction, LinearProgram, Sense};
use crate::systems::IndependenceSystem;

/// Largest ground set the exact solver enumerates for implicit systems.
pub const MAX_EXACT_GROUND: usize = 16;

/// Largest number of s–t paths enumerated by [`exact_path_game`].
pub const MAX_ENUMERATED_PATHS: usize = 10_000;

const EQUALITY_TOL: f64 = 1e-6;

/// Value and optimal strategies of the zero-sum game between the algorithm
/// (choosing sets) and the adversary (choosing scenarios).
#[derive(Clone, Debug)]
pub struct GameSolution {
    pub value: f64,
    pub strategy: MixedStrategy,
    /// Optimal scenario distribution `q*`.
    pub adversary: Vec<f64>,
}

/// Optimal mixed strategies of a matrix game.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixGameSolution {
    pub value: f64,
    /// Distribution over rows.
    pub rows: Vec<f64>,
    /// Distribution over columns.
    pub columns: Vec<f64>,
}

/// Solves the matrix game whose row player picks a row to maximize
/// (`Direction::Maximize`) or minimize the payoff `payoff[row][col]`
/// against a column player with the opposite goal.
pub fn solve_matrix_game(payoff: &[Vec<f64>], direction: Direction) -> Result<MatrixGameSolution> {
    let Some(first) = payoff.first() else {
        return Err(Error::Precondition("matrix game with no rows".into()));
    };
    let cols = first.len();
    if cols == 0 || payoff.iter().any(|r| r.len() != cols) {
        return Err(Error::Precondition("matrix game rows have inconsistent length".into()));
    }
    let rows = payoff.len();
    // variables: p_1..p_rows, value
    let mut objective = vec![0.0; rows + 1];
    objective[rows] = 1.0;
    let mut lp = LinearProgram::new(direction, objective);
    lp.set_bounds(rows, f64::NEG_INFINITY, f64::INFINITY);
    let sense = match direction {
        Direction::Maximize => Sense::Le,
        Direction::Minimize => Sense::Ge,
    };
    for c in 0..cols {
        let mut coeffs: Vec<f64> = payoff.iter().map(|r| -r[c]).collect();
        coeffs.push(1.0);
        lp.add_constraint(coeffs, sense, 0.0);
    }
    let mut simplex = vec![1.0; rows];
    simplex.push(0.0);
    lp.add_constraint(simplex, Sense::Eq, 1.0);
    let sol = solve_lp(&lp)?.optimal()?;

    let row_dist = clean_distribution(&sol.x[..rows])?;
    let col_dist = clean_distribution(&sol.duals[..cols])?;
    Ok(MatrixGameSolution {
        value: sol.value,
        rows: row_dist,
        columns: col_dist,
    })
}

fn clean_distribution(raw: &[f64]) -> Result<Vec<f64>> {
    let mut v: Vec<f64> = raw.iter().map(|&x| if x < 1e-12 { 0.0 } else { x }).collect();
    let total: f64 = v.iter().sum();
    if total <= 0.0 {
        return Err(Error::SolverFailure("game solution has an empty distribution".into()));
    }
    for x in &mut v {
        *x /= total;
    }
    Ok(v)
}

/// Sets the exact solver optimizes over: all bases plus `∅` when every
/// objective is monotone, every independent set otherwise.
pub fn candidate_sets(inst: &ProblemInstance) -> Result<Vec<ElementSet>> {
    let system = inst.system();
    if system.is_path_system() {
        return Err(Error::Unsupported(
            "s-t path families are solved with exact_path_game".into(),
        ));
    }
    let explicit = matches!(system, IndependenceSystem::Explicit(_));
    if !explicit && inst.ground_size() > MAX_EXACT_GROUND {
        return Err(Error::SizeLimit {
            what: "exact solver ground set",
            limit: MAX_EXACT_GROUND,
            actual: inst.ground_size(),
        });
    }
    if inst.all_monotone() {
        let mut sets = vec![ElementSet::empty()];
        sets.extend(system.enumerate_bases()?.into_iter().filter(|s| !s.is_empty()));
        Ok(sets)
    } else {
        system.enumerate_independent()
    }
}

/// Solves the robust problem exactly by enumeration and linear programming.
///
/// Both sides of the minimax identity are checked: the worst case of the
/// returned strategy and the best response value against the returned
/// scenario distribution must agree with the LP value within `1e-6`.
pub fn exact_game_solve(inst: &ProblemInstance) -> Result<GameSolution> {
    let sets = candidate_sets(inst)?;
    let payoff: Vec<Vec<f64>> = sets.iter().map(|s| inst.values(s)).collect();
    let game = solve_matrix_game(&payoff, Direction::Maximize)?;
    let strategy = MixedStrategy::from_weights(sets.iter().cloned().zip(game.rows.iter().copied()).collect())?;

    let worst = strategy.expected_values(inst).into_iter().fold(f64::INFINITY, f64::min);
    let best_response = payoff
        .iter()
        .map(|row| row.iter().zip(&game.columns).map(|(f, q)| f * q).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    let scale = 1.0 + game.value.abs();
    if (worst - game.value).abs() > EQUALITY_TOL * scale || (best_response - game.value).abs() > EQUALITY_TOL * scale {
        return Err(Error::SolverFailure(format!(
            "minimax check failed: LP value {}, strategy worst case {worst}, best response {best_response}",
            game.value
        )));
    }
    Ok(GameSolution {
        value: game.value,
        strategy,
        adversary: game.columns,
    })
}

/// Robust shortest path by enumeration: minimizes the worst expected length
/// over distributions on simple s–t paths. `lengths[k][a]` is the length of
/// arc `a` in scenario `k`.
pub fn exact_path_game(system: &IndependenceSystem, lengths: &[Vec<f64>]) -> Result<GameSolution> {
    let IndependenceSystem::StPath(g) = system else {
        return Err(Error::Unsupported(format!(
            "path game on a `{}` system",
            system.kind_name()
        )));
    };
    if lengths.is_empty() || lengths.iter().any(|l| l.len() != g.arcs().len()) {
        return Err(Error::Precondition("one length per arc and scenario required".into()));
    }
    let paths = g.simple_paths(MAX_ENUMERATED_PATHS)?;
    if paths.is_empty() {
        return Err(Error::Infeasible("no s-t path".into()));
    }
    let payoff: Vec<Vec<f64>> = paths
        .iter()
        .map(|p| lengths.iter().map(|l| p.iter().map(|a| l[a]).sum()).collect())
        .collect();
    let game = solve_matrix_game(&payoff, Direction::Minimize)?;
    let strategy = MixedStrategy::from_weights(paths.into_iter().zip(game.rows.iter().copied()).collect())?;
    Ok(GameSolution {
        value: game.value,
        strategy,
        adversary: game.columns,
    })
}

/// Best deterministic choice: `max_{X in I} min_k f_k(X)`, with its value.
pub fn deterministic_max_min(inst: &ProblemInstance) -> Result<(ElementSet, f64)> {
    let sets = candidate_sets(inst)?;
    let mut best = (ElementSet::empty(), f64::NEG_INFINITY);
    for s in sets {
        let v = inst.deterministic_value(&s);
        if v > best.1 {
            best = (s, v);
        }
    }
    Ok(best)
}

/// Exact maximizer `X*_k` of every objective, by enumeration.
pub fn exact_maximizers(inst: &ProblemInstance) -> Result<Vec<ElementSet>> {
    let sets = candidate_sets(inst)?;
    Ok(inst
        .objectives()
        .iter()
        .map(|f| {
            let mut best = (0usize, f64::NEG_INFINITY);
            for (i, s) in sets.iter().enumerate() {
                let v = f.eval(s);
                if v > best.1 {
                    best = (i, v);
                }
            }
            sets[best.0].clone()
        })
        .collect())
}

/// Bounds `min_k f_k(X'_k)/n <= ν* <= min_k f_k(X'_k)/α` from per-objective
/// `α`-approximate maximizers `X'_k`.
pub fn maxima_bounds(inst: &ProblemInstance, maximizers: &[ElementSet], alpha: f64) -> Result<(f64, f64)> {
    let n = inst.scenario_count();
    if maximizers.is_empty() {
        return Err(Error::Precondition("no maximizers given".into()));
    }
    if maximizers.len() != n {
        return Err(Error::Precondition(format!(
            "{} maximizers for {n} objectives",
            maximizers.len()
        )));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Precondition(format!(
            "approximation ratio {alpha} outside (0,1]"
        )));
    }
    let m = inst
        .objectives()
        .iter()
        .zip(maximizers)
        .map(|(f, x)| f.eval(x))
        .fold(f64::INFINITY, f64::min);
    Ok((m / n as f64, m / alpha))
}

/// Instance with `f_k(X) = |X ∩ S_k|` over `Uniform(r)`. A deterministic
/// solution of positive worst-case value is exactly a hitting set of size at
/// most `r`.
pub fn gen_hitting_set_instance(ground: GroundSet, sets: &[ElementSet], r: usize) -> Result<ProblemInstance> {
    let size = ground.len();
    let mut objectives = Vec::with_capacity(sets.len());
    for (k, s) in sets.iter().enumerate() {
        if s.is_empty() {
            return Err(Error::InvalidInstance(format!("set S_{} is empty", k + 1)));
        }
        s.check_range(size)?;
        objectives.push(Objective::linear(s.indicator(size))?);
    }
    ProblemInstance::new(ground, objectives, IndependenceSystem::uniform(size, r)?)
}

/// Generated cardinality-robustness knapsack instance together with the
/// robustness threshold that is attainable exactly when the underlying
/// equal-cardinality partition instance is solvable.
#[derive(Clone, Debug)]
pub struct PartitionInstance {
    pub instance: ProblemInstance,
    pub alpha: f64,
    pub sizes: Vec<u64>,
    pub values: Vec<u64>,
    pub capacity: u64,
}

/// Builds the knapsack instance encoding the partition problem on
/// `a_1 >= ... >= a_2n >= 1`.
///
/// Element `0` has size `A + 2n²a_1` and value `2(2n+1)a_1`; element `i`
/// has size and value `a_i + 2n·a_1`; the capacity is `2A + 4n²a_1` where
/// `A = sum a_i / 2`. The objectives are the cardinality ratios for
/// `k = 1..2n+1` with exact denominators.
pub fn gen_partition_instance(a: &[u64]) -> Result<PartitionInstance> {
    if !a.len().is_multiple_of(2) {
        return Err(Error::Precondition(format!(
            "partition instance needs an even number of integers, got {}",
            a.len()
        )));
    }
    let n = a.len() / 2;
    if n < 4 {
        return Err(Error::Precondition(format!(
            "partition instance needs n >= 4, got n = {n}"
        )));
    }
    if a.windows(2).any(|w| w[0] < w[1]) || a[a.len() - 1] == 0 {
        return Err(Error::Precondition(
            "integers must be positive and sorted in nonincreasing order".into(),
        ));
    }
    let n64 = n as u64;
    let a1 = a[0];
    let total: u64 = a.iter().sum();
    let capacity = total + 4 * n64 * n64 * a1;
    let mut sizes = Vec::with_capacity(2 * n + 1);
    let mut values = Vec::with_capacity(2 * n + 1);
    // s(0) is a half integer when sum a_i is odd; all data is doubled then
    let scale = if total.is_multiple_of(2) { 1 } else { 2 };
    sizes.push(scale * (total / 2 + 2 * n64 * n64 * a1) + (total % 2));
    values.push(scale * 2 * (2 * n64 + 1) * a1);
    for &ai in a {
        sizes.push(scale * (ai + 2 * n64 * a1));
        values.push(scale * (ai + 2 * n64 * a1));
    }
    let capacity = scale * capacity;

    let c = capacity as f64;
    let v0 = values[0] as f64;
    let alpha = 0.25 * (3.0 * c - 2.0 * v0) / (c - v0);

    let m = 2 * n + 1;
    let value_f: Vec<f64> = values.iter().map(|&v| v as f64).collect();
    let mut objectives = Vec::with_capacity(m);
    for k in 1..=m {
        let denom = max_top_k_value(&sizes, &values, capacity, k)?;
        objectives.push(Objective::cardinality_ratio(value_f.clone(), k, denom as f64)?);
    }
    let ground = GroundSet::new((0..m).map(|i| i.to_string()))?;
    let system = IndependenceSystem::knapsack(sizes.clone(), capacity)?;
    let instance = ProblemInstance::new(ground, objectives, system)?;
    Ok(PartitionInstance {
        instance,
        alpha,
        sizes,
        values,
        capacity,
    })
}

/// `max {v(X) : |X| <= k, s(X) <= C}` by dynamic programming over capacity.
fn max_top_k_value(sizes: &[u64], values: &[u64], capacity: u64, k: usize) -> Result<u64> {
    const LIMIT: u64 = 10_000_000;
    if capacity > LIMIT {
        return Err(Error::SizeLimit {
            what: "knapsack capacity for exact denominators",
            limit: LIMIT as usize,
            actual: capacity as usize,
        });
    }
    let cap = capacity as usize;
    let k = k.min(sizes.len());
    // best[j][c]: largest value with at most j items and size at most c
    let mut best = vec![vec![0u64; cap + 1]; k + 1];
    for (&s, &v) in sizes.iter().zip(values) {
        let s = s as usize;
        if s > cap {
            continue;
        }
        for j in (1..=k).rev() {
            for c in (s..=cap).rev() {
                let cand = best[j - 1][c - s] + v;
                if cand > best[j][c] {
                    best[j][c] = cand;
                }
            }
        }
    }
    Ok(best[k][cap])
}
