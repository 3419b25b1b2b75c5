mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use robopt::lpscheme::{decompose, FractionalPoint};
use robopt::lpsolver::{solve_lp, Direction, LinearProgram, LpOutcome, Sense};
use robopt::reductions::{reduce, Construction};
use robopt::schema::{instance_from_str, instance_to_string};
use robopt::systems::Separation;
use robopt::{worst_case_value, ElementSet, MixedStrategy};

fn mask_set(mask: u32) -> ElementSet {
    ElementSet::new((0..32).filter(|&e| mask >> e & 1 == 1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn element_set_ops_match_bit_masks(a in 0u32..1 << 12, b in 0u32..1 << 12, e in 0usize..12) {
        let (sa, sb) = (mask_set(a), mask_set(b));
        prop_assert_eq!(mask_of(&sa.union(&sb)), a | b);
        prop_assert_eq!(mask_of(&sa.intersection(&sb)), a & b);
        prop_assert_eq!(mask_of(&sa.with(e)), a | 1 << e);
        prop_assert_eq!(mask_of(&sa.without(e)), a & !(1 << e));
        prop_assert_eq!(sa.is_subset(&sb), a & !b == 0);
        prop_assert_eq!(sa.len(), a.count_ones() as usize);
    }

    #[test]
    fn weights_normalize_and_merge(ws in prop::collection::vec((0u32..8, 0.01f64..5.0), 1..10)) {
        let p = MixedStrategy::from_weights(ws.iter().map(|&(m, w)| (mask_set(m), w)).collect()).unwrap();
        let total: f64 = p.support().iter().map(|(_, q)| q).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        let distinct: std::collections::HashSet<u32> = ws.iter().map(|&(m, _)| m).collect();
        prop_assert_eq!(p.support_size(), distinct.len());
    }

    #[test]
    fn lp_solutions_carry_certificates(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let vars = rng.gen_range(1..6);
        let rows = rng.gen_range(1..6);
        let c: Vec<f64> = (0..vars).map(|_| rng.gen_range(-3.0..5.0)).collect();
        let direction = if rng.gen_bool(0.5) { Direction::Maximize } else { Direction::Minimize };
        let mut lp = LinearProgram::new(direction, c);
        for j in 0..vars {
            lp.set_bounds(j, 0.0, rng.gen_range(1.0..4.0));
        }
        for _ in 0..rows {
            let a: Vec<f64> = (0..vars).map(|_| rng.gen_range(-2.0..3.0)).collect();
            let sense = match rng.gen_range(0..3) { 0 => Sense::Le, 1 => Sense::Ge, _ => Sense::Eq };
            lp.add_constraint(a, sense, rng.gen_range(-1.0..3.0));
        }
        match solve_lp(&lp).unwrap() {
            LpOutcome::Optimal(sol) => prop_assert!(sol.check_certificate(&lp) < 1e-7),
            LpOutcome::Infeasible => {}
            LpOutcome::Unbounded => prop_assert!(false, "bounded variables cannot be unbounded"),
        }
    }

    #[test]
    fn matroid_separation_agrees_with_rank_inequalities(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let n = rng.gen_range(3..=7);
        let sys = random_matroid(&mut rng, n);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let inside = (0u32..1 << n).all(|u| {
            let load: f64 = (0..n).filter(|&e| u >> e & 1 == 1).map(|e| x[e]).sum();
            load <= sys.rank(u) as f64 + 1e-9
        });
        match sys.build().separate_matroid_polytope(&x).unwrap() {
            Separation::Member => prop_assert!(inside),
            Separation::Violated(cut) => {
                prop_assert!(!inside);
                prop_assert_eq!(cut.rank, sys.rank(mask_of(&cut.set)));
                prop_assert!(cut.violation() > 0.0);
            }
        }
    }

    #[test]
    fn decompose_reconstructs_convex_mixtures(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let n = rng.gen_range(3..=7);
        let sys = random_matroid(&mut rng, n);
        let feasible = sys.feasible_masks();
        let k = rng.gen_range(1..5);
        let lambda = random_distribution(&mut rng, k);
        let mut x = vec![0.0; n];
        for l in &lambda {
            let m = feasible[rng.gen_range(0..feasible.len())];
            for (e, xe) in x.iter_mut().enumerate() {
                if m >> e & 1 == 1 {
                    *xe += l;
                }
            }
        }
        let p = decompose(&FractionalPoint::new(x.clone()).unwrap(), &sys.build()).unwrap();
        prop_assert!(p.support_size() <= n + 1);
        let marg = p.marginals(n);
        for e in 0..n {
            prop_assert!((marg[e] - x[e]).abs() <= 1e-7);
        }
    }

    #[test]
    fn instance_json_round_trips(seed in any::<u64>()) {
        let fx = random_corpus(seed, 1).pop().unwrap();
        let once = instance_to_string(&fx.inst).unwrap();
        let back = instance_from_str(&once).unwrap();
        prop_assert_eq!(instance_to_string(&back).unwrap(), once);
        for m in fx.sys.feasible_masks() {
            let s = mask_set(m);
            prop_assert_eq!(back.values(&s), fx.inst.values(&s));
            prop_assert!(back.system().is_independent(&s).unwrap());
        }
    }

    #[test]
    fn library_worst_case_matches_direct_sum(seed in any::<u64>()) {
        let fx = random_corpus(seed, 1).pop().unwrap();
        let mut rng = rng(seed ^ 1);
        let feasible = fx.sys.feasible_masks();
        let weights = (0..3).map(|_| (mask_set(feasible[rng.gen_range(0..feasible.len())]), rng.gen_range(0.1..1.0))).collect();
        let p = MixedStrategy::from_weights(weights).unwrap();
        prop_assert!((worst_case_value(&p, &fx.inst).unwrap() - fx.worst_case(&p)).abs() < 1e-9);
    }

    #[test]
    fn truncation_never_exceeds_eta(seed in any::<u64>(), scale in 0.05f64..3.0) {
        let mut rng = rng(seed);
        let n = rng.gen_range(2..=8);
        let f = random_coverage_table(&mut rng, n);
        let top = (0u32..1 << n).map(|m| f.eval(m)).fold(0.0, f64::max);
        let eta = scale * top;
        let g = reduce(&f.build(), Construction::Truncate, eta).unwrap();
        for m in 0u32..1 << n {
            let v = g.eval(&mask_set(m));
            prop_assert!(v <= eta + 1e-12 && v <= f.eval(m) + 1e-12);
            prop_assert!(v == f.eval(m) || v == eta);
        }
    }
}
