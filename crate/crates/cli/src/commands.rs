use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robopt::exact::{
    exact_game_solve, exact_path_game, gen_hitting_set_instance, gen_partition_instance, maxima_bounds,
};
use robopt::lpscheme::{decompose as decompose_point, robust_shortest_path, solve_linear, solve_linearized};
use robopt::mwu::{jsonl_observer, mwu_solve_observed, sparsify as sparsify_strategy, MwuConfig};
use robopt::reductions::{auto_construction, check_reduction, reduce};
use robopt::schema::{instance_from_str, instance_to_string, PointDoc, StrategyDoc};
use robopt::subroutines::SubroutineKind;
use robopt::{
    worst_case_value, ElementSet, Error, GroundSet, IndependenceSystem, MixedStrategy, ProblemInstance, Result,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::{Engine, Subroutine};

/// Largest allowed gap between a reported value and the re-evaluated
/// strategy.
const REVALIDATION_TOL: f64 = 1e-6;

pub struct SolveOptions {
    pub engine: Engine,
    pub epsilon: f64,
    pub subroutine: Option<Subroutine>,
    pub oracle_epsilon: f64,
}

#[derive(Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    /// Largest worst-case expected value.
    Maximize,
    /// Smallest worst-case expected length.
    Minimize,
}

#[derive(Serialize)]
pub struct RunReport {
    pub solver: String,
    pub sense: Sense,
    pub value: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub strategy: StrategyDoc,
    pub wall_time_ms: f64,
    pub config: Value,
}

impl RunReport {
    pub fn summary(&self) -> String {
        format!(
            "{}: value {:.6} in [{:.6}, {:.6}], {} sets, {:.1} ms",
            self.solver,
            self.value,
            self.lower_bound,
            self.upper_bound,
            self.strategy.support.len(),
            self.wall_time_ms
        )
    }
}

fn subroutine_kind(s: Subroutine) -> SubroutineKind {
    match s {
        Subroutine::BruteForce => SubroutineKind::BruteForce,
        Subroutine::Greedy => SubroutineKind::Greedy,
        Subroutine::KnapsackFptas => SubroutineKind::KnapsackFptas,
        Subroutine::CardinalityDp => SubroutineKind::CardinalityDp,
    }
}

fn path_lengths(inst: &ProblemInstance) -> Result<Vec<Vec<f64>>> {
    inst.linear_weight_matrix()
        .ok_or_else(|| Error::Unsupported("path instances need linear arc lengths".into()))
}

/// `max_k` expected length.
fn worst_length(p: &MixedStrategy, inst: &ProblemInstance) -> Result<f64> {
    p.validate_for(inst)?;
    Ok(p.expected_values(inst).into_iter().fold(f64::NEG_INFINITY, f64::max))
}

pub fn solve(inst: &ProblemInstance, opts: &SolveOptions, trace: Option<BufWriter<File>>) -> Result<RunReport> {
    let start = Instant::now();
    let is_path = matches!(inst.system(), IndependenceSystem::StPath(_));
    let mut config = json!({ "engine": format!("{:?}", opts.engine).to_lowercase() });
    let (solver, value, lower, upper, strategy) = match (opts.engine, is_path) {
        (Engine::Mwu, true) => {
            return Err(Error::Unsupported("engine `mwu` on an `st_path` system".into()));
        }
        (Engine::Exact, true) => {
            let game = exact_path_game(inst.system(), &path_lengths(inst)?)?;
            (
                "exact-path".to_string(),
                game.value,
                game.value,
                game.value,
                game.strategy,
            )
        }
        (Engine::Lp, true) => {
            let sol = robust_shortest_path(inst.system(), &path_lengths(inst)?)?;
            config["cuts"] = json!(sol.cuts.cuts.len());
            ("lp-path".to_string(), sol.value, sol.lp_value, sol.value, sol.strategy)
        }
        (Engine::Exact, false) => {
            let game = exact_game_solve(inst)?;
            ("exact".to_string(), game.value, game.value, game.value, game.strategy)
        }
        (Engine::Lp, false) if inst.all_linear() => {
            let (sol, p) = solve_linear(inst)?;
            config["cuts"] = json!(sol.cuts.cuts.len());
            ("lp".to_string(), sol.value, sol.value, sol.value, p)
        }
        (Engine::Lp, false) => {
            let sol = solve_linearized(inst)?;
            config["curvature"] = json!(sol.curvature);
            (
                "lp-linearized".to_string(),
                sol.lower,
                sol.lower,
                sol.upper,
                sol.strategy,
            )
        }
        (Engine::Mwu, false) => {
            let kind = opts
                .subroutine
                .map(subroutine_kind)
                .unwrap_or_else(|| SubroutineKind::default_for(inst));
            let mut oracle = kind.build(inst, opts.oracle_epsilon)?;
            let mwu = MwuConfig::new(opts.epsilon);
            let out = match trace {
                Some(mut w) => {
                    let out = {
                        let mut observer = jsonl_observer(&mut w);
                        mwu_solve_observed(inst, oracle.as_mut(), &mwu, &mut observer)?
                    };
                    w.flush()?;
                    out
                }
                None => mwu_solve_observed(inst, oracle.as_mut(), &mwu, &mut |_| Ok(()))?,
            };
            let alpha = oracle.alpha();
            let value = worst_case_value(&out.strategy, inst)?;
            let (_, maxima_upper) = maxima_bounds(inst, &out.init.maximizers, alpha)?;
            let mut upper = maxima_upper;
            if alpha > opts.epsilon {
                upper = upper.min(value / (alpha - opts.epsilon));
            }
            config["epsilon"] = json!(opts.epsilon);
            config["oracle_epsilon"] = json!(opts.oracle_epsilon);
            config["subroutine"] = json!(oracle.name());
            config["params"] = serde_json::to_value(&out.trace.params)?;
            config["potential_holds"] = json!(out.trace.potential_holds());
            (format!("mwu/{}", oracle.name()), value, value, upper, out.strategy)
        }
    };

    let check = if is_path {
        worst_length(&strategy, inst)?
    } else {
        worst_case_value(&strategy, inst)?
    };
    if (check - value).abs() > REVALIDATION_TOL * (1.0 + value.abs()) {
        return Err(Error::SolverFailure(format!(
            "reported value {value} but the strategy evaluates to {check}"
        )));
    }
    Ok(RunReport {
        solver,
        sense: if is_path { Sense::Minimize } else { Sense::Maximize },
        value,
        lower_bound: lower,
        upper_bound: upper,
        strategy: StrategyDoc::from_strategy(&strategy, inst.ground()),
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        config,
    })
}

pub fn generate_partition(values: &[u64]) -> Result<(ProblemInstance, Value)> {
    let p = gen_partition_instance(values)?;
    let metadata = json!({
        "kind": "partition",
        "a": values,
        "alpha": p.alpha,
        "sizes": p.sizes,
        "values": p.values,
        "capacity": p.capacity,
    });
    Ok((p.instance, metadata))
}

pub fn generate_hitting_set(elements: &[String], sets: &[String], rank: usize) -> Result<(ProblemInstance, Value)> {
    let ground = GroundSet::new(elements.iter().cloned())?;
    let family = sets
        .iter()
        .map(|s| {
            ground.set_of(
                &s.split(',')
                    .map(str::trim)
                    .filter(|n| !n.is_empty())
                    .collect::<Vec<_>>(),
            )
        })
        .collect::<Result<Vec<ElementSet>>>()?;
    let inst = gen_hitting_set_instance(ground, &family, rank)?;
    Ok((inst, json!({ "kind": "hitting_set", "rank": rank, "sets": sets })))
}

pub fn generate_random_hitting_set(
    size: usize,
    count: usize,
    rank: usize,
    seed: u64,
) -> Result<(ProblemInstance, Value)> {
    if size == 0 {
        return Err(Error::Precondition(
            "random hitting sets need at least one element".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ground = GroundSet::indexed(size)?;
    let family: Vec<ElementSet> = (0..count)
        .map(|_| {
            let mut s: ElementSet = (0..size).filter(|_| rng.gen_bool(0.4)).collect();
            if s.is_empty() {
                s = ElementSet::singleton(rng.gen_range(0..size));
            }
            s
        })
        .collect();
    let names: Vec<Vec<String>> = family.iter().map(|s| ground.names_of(s)).collect();
    let inst = gen_hitting_set_instance(ground, &family, rank)?;
    Ok((
        inst,
        json!({ "kind": "hitting_set", "rank": rank, "seed": seed, "sets": names }),
    ))
}

/// Reads a strategy document, or the `strategy` field of a run report.
pub fn load_strategy(path: &Path, inst: &ProblemInstance) -> Result<MixedStrategy> {
    let value: Value = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let doc = match value.get("strategy") {
        Some(inner) => inner.clone(),
        None => value,
    };
    let doc: StrategyDoc = serde_json::from_value(doc)?;
    let p = doc.to_strategy(inst.ground())?;
    p.validate_for(inst)?;
    Ok(p)
}

#[derive(Serialize)]
pub struct SparsifyReport {
    pub strategy: StrategyDoc,
    pub value_before: f64,
    pub value_after: f64,
    pub support_before: usize,
    pub support_after: usize,
}

pub fn sparsify(inst: &ProblemInstance, p: &MixedStrategy) -> Result<SparsifyReport> {
    let sparse = sparsify_strategy(p, inst)?;
    Ok(SparsifyReport {
        strategy: StrategyDoc::from_strategy(&sparse, inst.ground()),
        value_before: worst_case_value(p, inst)?,
        value_after: worst_case_value(&sparse, inst)?,
        support_before: p.support_size(),
        support_after: sparse.support_size(),
    })
}

#[derive(Serialize)]
pub struct DecomposeReport {
    pub strategy: StrategyDoc,
    pub support_size: usize,
    pub reconstruction_error: f64,
}

pub fn decompose(inst: &ProblemInstance, point: &Path) -> Result<DecomposeReport> {
    let doc: PointDoc = serde_json::from_str(&std::fs::read_to_string(point)?)?;
    let x = doc.to_point(inst.ground())?;
    let p = decompose_point(&x, inst.system())?;
    let marginals = p.marginals(inst.ground_size());
    let err = marginals
        .iter()
        .zip(x.as_slice())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(DecomposeReport {
        strategy: StrategyDoc::from_strategy(&p, inst.ground()),
        support_size: p.support_size(),
        reconstruction_error: err,
    })
}

#[derive(Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Serialize)]
pub struct CheckReport {
    pub elements: usize,
    pub objectives: usize,
    pub system: &'static str,
    pub checks: Vec<Check>,
}

pub fn check(inst: &ProblemInstance) -> Result<CheckReport> {
    let mut checks = Vec::new();
    let once = instance_to_string(inst)?;
    let twice = instance_to_string(&instance_from_str(&once)?)?;
    checks.push(Check {
        name: "round_trip".into(),
        passed: once == twice,
        detail: format!("{} bytes", once.len()),
    });

    let sets = inst.system().enumerate_independent().ok();
    checks.push(Check {
        name: "system".into(),
        passed: true,
        detail: match &sets {
            Some(s) => format!("{} independent sets", s.len()),
            None => "too large to enumerate".into(),
        },
    });

    let full = inst.ground().full_set();
    for (k, f) in inst.objectives().iter().enumerate() {
        let top = match &sets {
            Some(s) => s.iter().map(|x| f.eval(x)).fold(0.0, f64::max),
            None => f.eval(&full),
        };
        let top = if top > 0.0 { top } else { 1.0 };
        let construction = auto_construction(f);
        for eta in [0.5 * top, top, 2.0 * top] {
            let name = format!("objective {k} {construction:?} at η = {eta}");
            let (passed, detail) = match reduce(f, construction, eta) {
                Ok(g) => {
                    match check_reduction(|s| f.eval(s), |s| g.eval(s), inst.ground_size(), eta, g.gamma(), 4096) {
                        Ok(()) => (true, format!("{} objective, γ = {}", f.kind_name(), g.gamma())),
                        Err(v) => (
                            false,
                            format!("condition {} fails on {}: f = {}, g = {}", v.condition, v.set, v.f, v.g),
                        ),
                    }
                }
                Err(e) => (false, e.to_string()),
            };
            checks.push(Check { name, passed, detail });
        }
    }
    Ok(CheckReport {
        elements: inst.ground_size(),
        objectives: inst.scenario_count(),
        system: inst.system().kind_name(),
        checks,
    })
}
