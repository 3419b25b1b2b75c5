//! Multiplicative weights over scenarios.
//!
//! Each iteration normalizes the scenario weights into a distribution `q`,
//! asks a best-response oracle for a set `X` approximately maximizing
//! `sum_k q_k g_k(X)` over the reduced objectives `g_k`, and multiplies every
//! weight by `(1-δ)^{g_k(X)/η}`. The output strategy is the empirical
//! distribution of the chosen sets.

use std::collections::HashMap;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::solve_matrix_game;
use crate::instance::{ElementSet, MixedStrategy, Objective, ProblemInstance};
use crate::lpsolver::Direction;
use crate::reductions::{Construction, ReducedFamily, ReductionRule};
use crate::subroutines::BestResponder;

/// Default ceiling on the number of iterations.
pub const MAX_ITERATIONS: u64 = 100_000_000;

#[derive(Clone, Debug)]
pub struct MwuConfig {
    pub epsilon: f64,
    pub rule: ReductionRule,
    pub max_iterations: u64,
    /// Keep every iteration record in the returned trace.
    pub keep_records: bool,
}

impl MwuConfig {
    pub fn new(epsilon: f64) -> Self {
        MwuConfig {
            epsilon,
            rule: ReductionRule::Auto,
            max_iterations: MAX_ITERATIONS,
            keep_records: false,
        }
    }
}

/// Parameters of one run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MwuParams {
    pub epsilon: f64,
    pub delta: f64,
    pub iterations: u64,
    pub eta: f64,
    pub alpha: f64,
    pub gamma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationRecord {
    pub t: u64,
    pub q: Vec<f64>,
    pub set: ElementSet,
    /// `sum_k q_k g_k(set)`.
    pub mixture_value: f64,
    /// `g_k(set)` for every scenario.
    pub reduced_values: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct MwuTrace {
    pub params: MwuParams,
    pub records: Vec<IterationRecord>,
    pub final_log_weights: Vec<f64>,
    /// `sum_t sum_k q_k^(t) g_k(X^(t))`.
    pub potential_lhs: f64,
    /// `sum_t g_k(X^(t))` for every scenario.
    pub reduced_totals: Vec<f64>,
}

impl MwuTrace {
    /// `η ln n / δ + (1+δ) min_k sum_t g_k(X^(t))`.
    pub fn potential_rhs(&self) -> f64 {
        let n = self.reduced_totals.len() as f64;
        let p = &self.params;
        let min = self.reduced_totals.iter().copied().fold(f64::INFINITY, f64::min);
        p.eta * n.ln() / p.delta + (1.0 + p.delta) * min
    }

    /// Whether the potential inequality holds up to rounding.
    pub fn potential_holds(&self) -> bool {
        let rhs = self.potential_rhs();
        self.potential_lhs <= rhs + 1e-9 * (1.0 + rhs.abs())
    }
}

/// Per-scenario maximizers computed without reduction, and the `η` they
/// induce.
#[derive(Clone, Debug)]
pub struct EtaInit {
    pub eta: f64,
    pub maximizers: Vec<ElementSet>,
    /// `min_k f_k(X'_k)`.
    pub min_value: f64,
    pub gamma: f64,
}

#[derive(Clone, Debug)]
pub struct MwuOutcome {
    pub strategy: MixedStrategy,
    pub trace: MwuTrace,
    pub init: EtaInit,
}

/// `δ = min{ε/3, 1/2}`.
pub fn derive_delta(epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Config(format!("ε = {epsilon} must lie in (0,1)")));
    }
    Ok((epsilon / 3.0).min(0.5))
}

/// `T = ceil(n² ln n / (α δ³ γ))`, at least one.
pub fn iteration_count(n: usize, alpha: f64, delta: f64, gamma: f64, max: u64) -> Result<u64> {
    let n = n as f64;
    let t = (n * n * n.ln() / (alpha * delta.powi(3) * gamma)).ceil().max(1.0);
    if !t.is_finite() || t > max as f64 {
        return Err(Error::Config(format!(
            "{t:.0} iterations exceed the limit {max}; use a larger ε"
        )));
    }
    Ok(t as u64)
}

fn all_cardinality(inst: &ProblemInstance) -> bool {
    inst.objectives()
        .iter()
        .all(|f| matches!(f, Objective::CardinalityRatio(_)))
}

/// Runs the oracle once per scenario with a point-mass `q` and no reduction,
/// then sets `η = n/(αδγ) · min_k f_k(X'_k)`.
///
/// Cardinality-ratio families never exceed 1, so they keep `η = 1` and
/// `γ = 1` instead.
pub fn init_eta(
    inst: &ProblemInstance,
    sub: &mut dyn BestResponder,
    rule: ReductionRule,
    delta: f64,
) -> Result<EtaInit> {
    let n = inst.scenario_count();
    let unreduced = ReducedFamily::for_instance(inst, rule, f64::INFINITY)?;
    if unreduced
        .objectives()
        .iter()
        .any(|g| g.construction() == Construction::Identity)
        && !all_cardinality(inst)
    {
        return Err(Error::Unsupported(
            "the identity reduction is only certified for cardinality-ratio families".into(),
        ));
    }
    let mut maximizers = Vec::with_capacity(n);
    let mut min_value = f64::INFINITY;
    for k in 0..n {
        let mut q = vec![0.0; n];
        q[k] = 1.0;
        let br = sub.best_response(&q, &unreduced)?;
        let v = inst.objectives()[k].eval(&br.set);
        min_value = min_value.min(v);
        maximizers.push(br.set);
    }
    if min_value <= 0.0 {
        return Err(Error::InvalidInstance(
            "some objective has zero value at its best response".into(),
        ));
    }
    let gamma = unreduced.gamma();
    let eta = if all_cardinality(inst) {
        1.0
    } else {
        n as f64 / (sub.alpha() * delta * gamma) * min_value
    };
    Ok(EtaInit {
        eta,
        maximizers,
        min_value,
        gamma,
    })
}

pub fn mwu_solve(inst: &ProblemInstance, sub: &mut dyn BestResponder, config: &MwuConfig) -> Result<MwuOutcome> {
    mwu_solve_observed(inst, sub, config, &mut |_| Ok(()))
}

/// As [`mwu_solve`], handing every iteration record to `observer`.
pub fn mwu_solve_observed(
    inst: &ProblemInstance,
    sub: &mut dyn BestResponder,
    config: &MwuConfig,
    observer: &mut dyn FnMut(&IterationRecord) -> Result<()>,
) -> Result<MwuOutcome> {
    let delta = derive_delta(config.epsilon)?;
    let n = inst.scenario_count();
    let alpha = sub.alpha();
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Config(format!("oracle ratio {alpha} outside (0,1]")));
    }
    let init = init_eta(inst, sub, config.rule, delta)?;
    let family = ReducedFamily::for_instance(inst, config.rule, init.eta)?;
    let gamma = family.gamma();
    let iterations = iteration_count(n, alpha, delta, gamma, config.max_iterations)?;
    let params = MwuParams {
        epsilon: config.epsilon,
        delta,
        iterations,
        eta: init.eta,
        alpha,
        gamma,
    };

    let step = (1.0 - delta).ln() / init.eta;
    let mut log_w = vec![0.0f64; n];
    let mut totals = vec![0.0f64; n];
    let mut potential = 0.0f64;
    let mut records = Vec::new();
    let mut counts: Vec<(ElementSet, u64)> = Vec::new();
    let mut position: HashMap<ElementSet, usize> = HashMap::new();

    for t in 1..=iterations {
        let shift = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut q: Vec<f64> = log_w.iter().map(|&l| (l - shift).exp()).collect();
        let z: f64 = q.iter().sum();
        for x in &mut q {
            *x /= z;
        }
        let br = sub.best_response(&q, &family)?;
        let g = family.values(&br.set);
        if let Some(k) = (0..n).find(|&k| g[k] > init.eta * (1.0 + 1e-9)) {
            return Err(Error::Precondition(format!(
                "reduced objective {k} takes value {} above η = {}",
                g[k], init.eta
            )));
        }
        let mixture: f64 = q.iter().zip(&g).map(|(a, b)| a * b).sum();
        potential += mixture;
        for k in 0..n {
            totals[k] += g[k];
            log_w[k] += g[k] * step;
        }
        match position.get(&br.set) {
            Some(&i) => counts[i].1 += 1,
            None => {
                position.insert(br.set.clone(), counts.len());
                counts.push((br.set.clone(), 1));
            }
        }
        let record = IterationRecord {
            t,
            q,
            set: br.set,
            mixture_value: mixture,
            reduced_values: g,
        };
        observer(&record)?;
        if config.keep_records {
            records.push(record);
        }
    }

    let strategy = MixedStrategy::from_weights(
        counts
            .into_iter()
            .map(|(s, c)| (s, c as f64 / iterations as f64))
            .collect(),
    )?;
    Ok(MwuOutcome {
        strategy,
        trace: MwuTrace {
            params,
            records,
            final_log_weights: log_w,
            potential_lhs: potential,
            reduced_totals: totals,
        },
        init,
    })
}

/// Observer writing one JSON object per iteration.
pub fn jsonl_observer<W: Write>(mut out: W) -> impl FnMut(&IterationRecord) -> Result<()> {
    move |record| {
        serde_json::to_writer(&mut out, record)?;
        out.write_all(b"\n")?;
        Ok(())
    }
}

/// Best distribution supported on the sets of `p`, found as a basic optimal
/// solution of `max ν s.t. ν <= sum_t f_i(X_t) r_t, sum_t r_t = 1, r >= 0`.
/// The result has at most `n` sets and is never worse than `p`.
pub fn sparsify(p: &MixedStrategy, inst: &ProblemInstance) -> Result<MixedStrategy> {
    p.validate_for(inst)?;
    let sets: Vec<ElementSet> = p.support().iter().map(|(s, _)| s.clone()).collect();
    if sets.len() == 1 {
        return Ok(p.clone());
    }
    let before = worst_case(p, inst);
    let payoff: Vec<Vec<f64>> = sets.iter().map(|s| inst.values(s)).collect();
    let game = solve_matrix_game(&payoff, Direction::Maximize)?;
    let mut sparse = MixedStrategy::from_weights(sets.iter().cloned().zip(game.rows).collect())?;
    if sparse.support_size() > inst.scenario_count() {
        // only possible when the best value is 0; any single set is optimal
        let best = (0..sets.len())
            .max_by(|&a, &b| {
                let va = inst.deterministic_value(&sets[a]);
                let vb = inst.deterministic_value(&sets[b]);
                va.total_cmp(&vb).then(b.cmp(&a))
            })
            .expect("support is nonempty");
        sparse = MixedStrategy::point_mass(sets[best].clone());
    }
    let after = worst_case(&sparse, inst);
    if after < before - 1e-9 * (1.0 + before.abs()) {
        return Err(Error::SolverFailure(format!(
            "sparsified value {after} is below the original {before}"
        )));
    }
    Ok(sparse)
}

fn worst_case(p: &MixedStrategy, inst: &ProblemInstance) -> f64 {
    p.expected_values(inst).into_iter().fold(f64::INFINITY, f64::min)
}
