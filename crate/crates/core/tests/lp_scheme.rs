mod common;

use common::*;
use rand::Rng;
use robopt::exact::{exact_game_solve, exact_path_game, solve_matrix_game};
use robopt::lpscheme::{
    curvature_linearize, decompose, robust_shortest_path, solve_function_polytope, solve_intersection_relaxation,
    solve_linear, solve_linearized, solve_lp_scheme, FractionalPoint, FunctionPolytope, HullPolytope,
    IntersectionPolytope, MatroidPolytope, PolytopeOracle,
};
use robopt::lpsolver::Direction;
use robopt::subroutines::greedy_linear;
use robopt::{ElementSet, Error, GroundSet, IndependenceSystem, Objective, ProblemInstance};

#[test]
fn lp_value_equals_game_value_on_linear_matroids() {
    for fx in linear_matroid_fixtures(17, 40) {
        let game = exact_game_solve(&fx.inst).unwrap();
        let certified = fx.best_response_value(&game.adversary);
        let (sol, p) = solve_linear(&fx.inst).unwrap();
        assert!(
            (sol.value - certified).abs() <= 1e-6,
            "{}: {} vs {certified}",
            fx.name,
            sol.value
        );
        assert!((fx.worst_case(&p) - sol.value).abs() <= 1e-6, "{}", fx.name);
        assert!(p.support_size() <= fx.sys.ground() + 1);
        assert!(reconstruction_error(&p, sol.point.as_slice()) <= 1e-7);
        assert!(sol.cuts.violations.iter().all(|&v| v > 1e-8));
    }
}

#[test]
fn intro_point_is_the_midpoint() {
    let fx = intro();
    let (sol, p) = solve_linear(&fx.inst).unwrap();
    assert!((sol.value - 0.5).abs() < 1e-9);
    for v in sol.point.as_slice() {
        assert!((v - 0.5).abs() < 1e-9);
    }
    assert_eq!(p.support_size(), 2);
}

#[test]
fn single_objective_reaches_the_best_set() {
    let mut rng = rng(4);
    for i in 0..20 {
        let size = rng.gen_range(3..=8);
        let sys = random_matroid(&mut rng, size);
        let fx = Fixture::new(format!("single-{i}"), sys, vec![random_linear(&mut rng, size)]);
        let best = fx.scenario_maxima()[0];
        let (sol, _) = solve_linear(&fx.inst).unwrap();
        assert!((sol.value - best).abs() < 1e-6, "{}", fx.name);
    }
}

#[test]
fn knapsack_hull_matches_game_value() {
    let mut rng = rng(9);
    for i in 0..15 {
        let size = rng.gen_range(3..=7);
        let sys = random_knapsack(&mut rng, size);
        let n = rng.gen_range(1..=3);
        let objs = (0..n).map(|_| random_linear(&mut rng, size)).collect();
        let fx = Fixture::new(format!("knapsack-{i}"), sys, objs);
        let game = exact_game_solve(&fx.inst).unwrap();
        let hull = HullPolytope::of_system(fx.inst.system()).unwrap();
        let sol = solve_lp_scheme(&fx.inst, &hull).unwrap();
        assert!(
            (sol.value - fx.best_response_value(&game.adversary)).abs() <= 1e-6,
            "{}",
            fx.name
        );
    }
}

#[test]
fn convex_mixtures_decompose_exactly() {
    let mut rng = rng(31);
    for _ in 0..25 {
        let size = rng.gen_range(4..=8);
        let sys = random_partition(&mut rng, size);
        let feasible = sys.feasible_masks();
        let weights = random_distribution(&mut rng, 4);
        let mut x = vec![0.0; size];
        for w in &weights {
            let m = feasible[rng.gen_range(0..feasible.len())];
            for (e, xe) in x.iter_mut().enumerate() {
                if m >> e & 1 == 1 {
                    *xe += w;
                }
            }
        }
        let system = sys.build();
        let p = decompose(&FractionalPoint::new(x.clone()).unwrap(), &system).unwrap();
        assert!(reconstruction_error(&p, &x) <= 1e-7);
        assert!(p.support_size() <= size + 1);
        assert!(p.support().iter().all(|(s, _)| sys.contains(mask_of(s))));
    }
}

#[test]
fn exact_marginals_round_trip() {
    for fx in linear_matroid_fixtures(2, 15) {
        let game = exact_game_solve(&fx.inst).unwrap();
        let x = FractionalPoint::marginals_of(&game.strategy, fx.sys.ground());
        let p = decompose(&x, fx.inst.system()).unwrap();
        assert!(reconstruction_error(&p, x.as_slice()) <= 1e-7, "{}", fx.name);
    }
}

#[test]
fn decompose_edge_cases() {
    let system = IndependenceSystem::uniform(2, 1).unwrap();
    let p = decompose(&FractionalPoint::new(vec![0.5, 0.5]).unwrap(), &system).unwrap();
    assert_eq!(p.support_size(), 2);
    for (s, q) in p.support() {
        assert_eq!(s.len(), 1);
        assert!((q - 0.5).abs() < 1e-12);
    }
    let outside = decompose(&FractionalPoint::new(vec![1.0, 0.5]).unwrap(), &system);
    assert!(matches!(outside, Err(Error::OutsidePolytope { .. })));
    assert!(FractionalPoint::new(vec![1.5]).is_err());
}

fn random_intersection(rng: &mut rand_chacha::ChaCha8Rng, size: usize, mu: usize) -> SysSpec {
    SysSpec::Intersection((0..mu).map(|_| random_matroid(rng, size)).collect())
}

#[test]
fn relaxation_sandwich_on_intersections() {
    let mut rng = rng(77);
    for i in 0..16 {
        let mu = 2 + i % 2;
        let size = rng.gen_range(4..=7);
        let sys = random_intersection(&mut rng, size, mu);
        let n = rng.gen_range(1..=3);
        let objs = (0..n).map(|_| random_linear(&mut rng, size)).collect();
        let fx = Fixture::new(format!("intersection-{i}"), sys, objs);
        let exact = exact_game_solve(&fx.inst).unwrap();
        let star = fx.best_response_value(&exact.adversary);
        let relaxed = solve_intersection_relaxation(&fx.inst).unwrap();
        assert!(relaxed.value / mu as f64 <= star + 1e-6, "{}", fx.name);
        assert!(star <= relaxed.value + 1e-6, "{}", fx.name);
        if mu == 2 {
            assert!(
                (star - relaxed.value).abs() <= 1e-6,
                "{}: two matroids are exact",
                fx.name
            );
        }
    }
}

#[test]
fn greedy_meets_the_relaxed_single_objective_bound() {
    let mut rng = rng(78);
    for i in 0..16 {
        let mu = 2 + i % 2;
        let size = rng.gen_range(4..=7);
        let sys = random_intersection(&mut rng, size, mu);
        let w = random_linear(&mut rng, size);
        let fx = Fixture::new(format!("greedy-{i}"), sys, vec![w.clone()]);
        let relaxed = solve_intersection_relaxation(&fx.inst).unwrap();
        let ObjSpec::Linear(weights) = &w else { unreachable!() };
        let g = greedy_linear(fx.inst.system(), weights).unwrap();
        assert!(fx.sys.contains(mask_of(&g)));
        assert!(w.eval(mask_of(&g)) >= relaxed.value / mu as f64 - 1e-9, "{}", fx.name);
    }
}

#[test]
fn two_matroid_separation_is_rank_based() {
    let sys = SysSpec::Intersection(vec![
        SysSpec::Partition {
            block_of: vec![0, 0, 1, 1],
            caps: vec![1, 1],
        },
        SysSpec::Partition {
            block_of: vec![0, 1, 0, 1],
            caps: vec![1, 1],
        },
    ]);
    let system = sys.build();
    let oracle = IntersectionPolytope::new(&system).unwrap();
    assert_eq!(oracle.mu(), 2);
    let cut = oracle.separate(&[0.9, 0.9, 0.0, 0.0]).unwrap().unwrap();
    assert_eq!(cut.rhs, 1.0);
    assert!(oracle.separate(&[0.5, 0.5, 0.5, 0.5]).unwrap().is_none());
    assert!(MatroidPolytope::new(&system).is_err());
}

/// Random DAG on `nodes` nodes with arcs from lower to higher index.
fn random_dag(rng: &mut rand_chacha::ChaCha8Rng, nodes: usize) -> Vec<(usize, usize)> {
    let mut arcs = vec![(0, nodes - 1)];
    for u in 0..nodes {
        for v in u + 1..nodes {
            if rng.gen_bool(0.5) {
                arcs.push((u, v));
            }
        }
    }
    arcs
}

fn own_paths(arcs: &[(usize, usize)], at: usize, sink: usize, used: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if at == sink {
        out.push(used.clone());
        return;
    }
    for (a, &(u, v)) in arcs.iter().enumerate() {
        if u == at {
            used.push(a);
            own_paths(arcs, v, sink, used, out);
            used.pop();
        }
    }
}

#[test]
fn shortest_path_matches_enumeration() {
    let mut rng = rng(12);
    for _ in 0..15 {
        let arcs = random_dag(&mut rng, 6);
        let lengths: Vec<Vec<f64>> = (0..2)
            .map(|_| arcs.iter().map(|_| rng.gen_range(1..10) as f64).collect())
            .collect();
        let system = IndependenceSystem::st_path(6, arcs.clone(), 0, 5).unwrap();
        let sol = robust_shortest_path(&system, &lengths).unwrap();

        let mut paths = Vec::new();
        own_paths(&arcs, 0, 5, &mut Vec::new(), &mut paths);
        let points: Vec<(f64, f64)> = paths
            .iter()
            .map(|p| {
                let l = |k: usize| -> f64 { p.iter().map(|&a| lengths[k][a]).sum() };
                (-l(0), -l(1))
            })
            .collect();
        let expected = -two_scenario_value(&points);
        assert!((sol.value - expected).abs() <= 1e-6, "{} vs {expected}", sol.value);
        assert!((sol.lp_value - expected).abs() <= 1e-6);
        let game = exact_path_game(&system, &lengths).unwrap();
        assert!((game.value - expected).abs() <= 1e-6);
        for (s, _) in sol.strategy.support() {
            assert!(paths.iter().any(|p| ElementSet::new(p.iter().copied()) == *s));
        }
    }
}

#[test]
fn shortest_path_special_cases() {
    let chain = IndependenceSystem::st_path(3, vec![(0, 1), (1, 2)], 0, 2).unwrap();
    let sol = robust_shortest_path(&chain, &[vec![1.0, 2.0], vec![4.0, 1.0]]).unwrap();
    assert!((sol.value - 5.0).abs() < 1e-9);
    assert_eq!(sol.strategy.support_size(), 1);

    let broken = IndependenceSystem::st_path(3, vec![(0, 1), (2, 1)], 0, 2).unwrap();
    assert!(matches!(
        robust_shortest_path(&broken, &[vec![1.0, 1.0]]),
        Err(Error::Infeasible(_))
    ));
    assert!(robust_shortest_path(&chain, &[vec![0.0, 1.0]]).is_err());
}

#[test]
fn simplex_hull_reproduces_lp_scheme() {
    for fx in linear_matroid_fixtures(44, 15) {
        let weights = fx.inst.linear_weight_matrix().unwrap();
        let f = FunctionPolytope::simplex_hull(&weights).unwrap();
        let oracle = MatroidPolytope::new(fx.inst.system()).unwrap();
        let via_f = solve_function_polytope(&oracle, &f).unwrap();
        let (direct, _) = solve_linear(&fx.inst).unwrap();
        assert!((via_f.value - direct.value).abs() <= 1e-6, "{}", fx.name);
        assert!((fx.worst_case(&via_f.strategy) - direct.value).abs() <= 1e-6);
    }
}

/// Solves a square system by Gaussian elimination with partial pivoting.
fn solve_square(mut m: Vec<Vec<f64>>, mut r: Vec<f64>) -> Option<Vec<f64>> {
    let n = r.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-10 {
            return None;
        }
        m.swap(col, piv);
        r.swap(col, piv);
        for row in 0..n {
            if row != col {
                let f = m[row][col] / m[col][col];
                let pivot_row = m[col].clone();
                for (a, b) in m[row].iter_mut().zip(&pivot_row).skip(col) {
                    *a -= f * b;
                }
                r[row] -= f * r[col];
            }
        }
    }
    Some((0..n).map(|i| r[i] / m[i][i]).collect())
}

/// Vertices of `{w >= 0 : A w <= c}` by trying every choice of `dim` tight
/// constraints.
fn polytope_vertices(a: &[Vec<f64>], c: &[f64], dim: usize) -> Vec<Vec<f64>> {
    let mut rows: Vec<(Vec<f64>, f64)> = a.iter().cloned().zip(c.iter().copied()).collect();
    for e in 0..dim {
        rows.push(((0..dim).map(|j| if j == e { -1.0 } else { 0.0 }).collect(), 0.0));
    }
    let total = rows.len();
    let mut out: Vec<Vec<f64>> = Vec::new();
    for mask in 0u32..1 << total {
        if mask.count_ones() as usize != dim {
            continue;
        }
        let chosen: Vec<usize> = (0..total).filter(|&i| mask >> i & 1 == 1).collect();
        let m = chosen.iter().map(|&i| rows[i].0.clone()).collect();
        let r = chosen.iter().map(|&i| rows[i].1).collect();
        if let Some(w) = solve_square(m, r) {
            let feasible = rows
                .iter()
                .all(|(row, rhs)| row.iter().zip(&w).map(|(x, y)| x * y).sum::<f64>() <= rhs + 1e-9);
            if feasible && !out.iter().any(|v| v.iter().zip(&w).all(|(x, y)| (x - y).abs() < 1e-9)) {
                out.push(w);
            }
        }
    }
    out
}

#[test]
fn two_constraint_weight_polytope_matches_vertex_game() {
    let mut rng = rng(55);
    let size = 5;
    let sys = SysSpec::Uniform { n: size, r: 2 };
    let system = sys.build();
    for _ in 0..10 {
        let w0: Vec<f64> = (0..size).map(|_| rng.gen_range(0.5..2.0)).collect();
        let a1: Vec<f64> = (0..size).map(|_| rng.gen_range(0.1..1.0)).collect();
        let a2: Vec<f64> = (0..size).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dot = |a: &[f64]| a.iter().zip(&w0).map(|(x, y)| x * y).sum::<f64>();
        let a = vec![a1.iter().map(|v| -v).collect::<Vec<f64>>(), a2.clone()];
        let c = vec![-dot(&a1), dot(&a2) + rng.gen_range(0.0..1.0)];
        let f = FunctionPolytope::new(a.clone(), vec![Vec::new(); 2], c.clone()).unwrap();
        let sol = solve_function_polytope(&MatroidPolytope::new(&system).unwrap(), &f).unwrap();

        let vertices = polytope_vertices(&a, &c, size);
        assert!(!vertices.is_empty());
        let sets = sys.feasible_masks();
        let payoff: Vec<Vec<f64>> = sets
            .iter()
            .map(|&m| {
                vertices
                    .iter()
                    .map(|w| (0..size).filter(|&e| m >> e & 1 == 1).map(|e| w[e]).sum())
                    .collect()
            })
            .collect();
        let expected = solve_matrix_game(&payoff, Direction::Maximize).unwrap().value;
        assert!((sol.value - expected).abs() <= 1e-6, "{} vs {expected}", sol.value);
        let guaranteed = vertices
            .iter()
            .map(|w| {
                sol.strategy
                    .support()
                    .iter()
                    .map(|(s, p)| p * s.iter().map(|e| w[e]).sum::<f64>())
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min);
        assert!((guaranteed - expected).abs() <= 1e-6);
    }
}

#[test]
fn single_weight_vector_has_no_adversary() {
    let w = vec![4.0, 1.0, 3.0, 2.0];
    let f = FunctionPolytope::simplex_hull(&[w]).unwrap();
    let system = IndependenceSystem::uniform(4, 2).unwrap();
    let sol = solve_function_polytope(&MatroidPolytope::new(&system).unwrap(), &f).unwrap();
    assert!((sol.value - 7.0).abs() < 1e-9);
}

#[test]
fn curvature_sandwich_is_exhaustive() {
    let mut rng = rng(66);
    for _ in 0..20 {
        let spec = random_coverage_table(&mut rng, 8);
        let g = spec.build();
        let lin = curvature_linearize(&g).unwrap();
        let ObjSpec::Table(table) = &spec else { unreachable!() };
        let singles: Vec<f64> = (0..8).map(|e| table[1 << e]).collect();
        let full = table[255];
        let expected = (0..8)
            .filter(|&e| singles[e] > 0.0)
            .map(|e| (full - table[255 & !(1 << e)]) / singles[e])
            .fold(f64::INFINITY, f64::min);
        assert!((lin.curvature - (1.0 - expected).clamp(0.0, 1.0)).abs() < 1e-12);
        for m in 0u32..256 {
            let set = ElementSet::new((0..8).filter(|&e| m >> e & 1 == 1));
            let hat = lin.linear.eval(&set);
            let v = table[m as usize];
            assert!(lin.factor() * hat <= v + 1e-9 && v <= hat + 1e-9);
        }
    }
}

#[test]
fn curvature_of_simple_functions() {
    let lin = curvature_linearize(&Objective::linear(vec![2.0, 0.0, 5.0]).unwrap()).unwrap();
    assert_eq!(lin.curvature, 0.0);
    assert_eq!(lin.linear.linear_weights().unwrap(), &[2.0, 0.0, 5.0]);

    let at_most_one = Objective::submodular_table(vec![0.0, 1.0, 1.0, 1.0]).unwrap();
    let lin = curvature_linearize(&at_most_one).unwrap();
    assert_eq!(lin.curvature, 1.0);

    let cut = Objective::submodular_table(vec![0.0, 1.0, 1.0, 0.0]).unwrap();
    assert!(matches!(curvature_linearize(&cut), Err(Error::Precondition(_))));
}

#[test]
fn linearized_lp_brackets_the_robust_value() {
    let mut rng = rng(70);
    for i in 0..12 {
        let size = rng.gen_range(4..=7);
        let sys = random_matroid(&mut rng, size);
        let objs = (0..2).map(|_| random_coverage_table(&mut rng, size)).collect();
        let fx = Fixture::new(format!("curv-{i}"), sys, objs);
        let game = exact_game_solve(&fx.inst).unwrap();
        let star = fx.best_response_value(&game.adversary);
        let sol = solve_linearized(&fx.inst).unwrap();
        assert!((fx.worst_case(&sol.strategy) - sol.lower).abs() < 1e-9);
        assert!(sol.lower <= star + 1e-6 && star <= sol.upper + 1e-6, "{}", fx.name);
        assert!(sol.lower >= (1.0 - sol.curvature) * sol.upper - 1e-6);
    }
}

#[test]
fn lp_scheme_rejects_nonlinear_and_paths() {
    let g = GroundSet::indexed(2).unwrap();
    let table = Objective::submodular_table(vec![0.0, 1.0, 1.0, 1.0]).unwrap();
    let inst = ProblemInstance::new(g, vec![table], IndependenceSystem::uniform(2, 1).unwrap()).unwrap();
    assert!(matches!(solve_linear(&inst), Err(Error::Unsupported(_))));
    let path = IndependenceSystem::st_path(2, vec![(0, 1)], 0, 1).unwrap();
    assert!(decompose(&FractionalPoint::new(vec![1.0]).unwrap(), &path).is_err());
}
