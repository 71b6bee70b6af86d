mod common;

use apxmaxsat::clustering::{distinct_weight_count, is_bmo, partition};
use apxmaxsat::harness::generate::bmo_instance;
use apxmaxsat::harness::{brute_force_optimum, Optimum};
use apxmaxsat::search::{self, HardCheck, SearchReport};
use apxmaxsat::satcore::Limits;
use apxmaxsat::wcnf::ModelCheck;
use apxmaxsat::{Algorithm, ClusterCount, Model, SearchConfig, SearchStatus, WcnfFormula, Weight};
use common::small_instance;

fn run(f: &WcnfFormula, cfg: &SearchConfig) -> (SearchReport, Vec<Model>) {
    let mut seen = Vec::new();
    let r = search::solve(f, cfg, &mut |m| seen.push(m.clone())).unwrap();
    (r, seen)
}

fn optimum(f: &WcnfFormula) -> Weight {
    brute_force_optimum(f).unwrap().cost().expect("generated hard parts are satisfiable")
}

/// Safety checks shared by every configuration.
fn check_safe(f: &WcnfFormula, opt: Weight, r: &SearchReport, seen: &[Model]) {
    let best = r.best.as_ref().expect("a model exists");
    assert!(best.true_cost >= opt);
    assert_eq!(best.assignment.len(), f.num_vars() as usize);
    for m in seen {
        assert_eq!(f.check_model(&m.assignment).unwrap(), ModelCheck::Valid(m.true_cost));
    }
    assert!(r.trace.windows(2).all(|w| w[0].cost > w[1].cost), "trace not strictly decreasing");
    assert_eq!(r.trace.last().map(|t| t.cost), Some(best.true_cost));
    assert_eq!(seen.len(), r.trace.len());
}

#[test]
fn exact_mode_finds_brute_force_optimum() {
    for seed in 0..200 {
        let f = small_instance(seed);
        let cfg = SearchConfig::new(Algorithm::ApxWeight, ClusterCount::Fixed(0)).with_seed(seed);
        let (r, seen) = run(&f, &cfg);
        let opt = optimum(&f);
        check_safe(&f, opt, &r, &seen);
        assert_eq!(r.status, SearchStatus::OptimumForApproximation, "seed {seed}");
        assert_eq!(r.best.unwrap().true_cost, opt, "seed {seed}");
    }
}

#[test]
fn approximations_are_safe() {
    for seed in 0..100 {
        let f = small_instance(seed);
        let opt = optimum(&f);
        let d = distinct_weight_count(&f);
        for m in [1, 2, 3, d] {
            for alg in [Algorithm::ApxWeight, Algorithm::ApxSubprob] {
                let (r, seen) = run(&f, &SearchConfig::new(alg, ClusterCount::Fixed(m)).with_seed(seed));
                check_safe(&f, opt, &r, &seen);
            }
        }
    }
}

#[test]
fn clustered_weights_are_optimized_exactly() {
    // A completed apx-weight run is optimal for the approximated weights.
    for seed in 0..100 {
        let f = small_instance(seed);
        for m in 1..=3 {
            let (_, scheme) = partition(&f, m).unwrap();
            let fm = f.reweighted(&scheme.weight_m).unwrap();
            let (r, _) = run(&f, &SearchConfig::new(Algorithm::ApxWeight, ClusterCount::Fixed(m)));
            assert_eq!(r.status, SearchStatus::OptimumForApproximation);
            assert_eq!(r.approx_bound, Some(optimum(&fm)), "seed {seed} m {m}");
            let best = r.best.unwrap();
            assert!(best.true_cost >= optimum(&f));
        }
    }
}

#[test]
fn one_cluster_per_weight_is_exact_for_apx_weight() {
    for seed in 200..260 {
        let f = small_instance(seed);
        let d = distinct_weight_count(&f);
        for m in [d, d + 3] {
            let (r, _) = run(&f, &SearchConfig::new(Algorithm::ApxWeight, ClusterCount::Fixed(m)));
            assert_eq!(r.best.unwrap().true_cost, optimum(&f), "seed {seed} m {m}");
        }
        let (r, _) = run(&f, &SearchConfig::new(Algorithm::ApxWeight, ClusterCount::DistinctWeights));
        assert_eq!(r.best.unwrap().true_cost, optimum(&f));
    }
}

#[test]
fn bmo_instances_are_solved_exactly_by_subprob() {
    let mut checked = 0;
    for seed in 0..50 {
        let f = bmo_instance(&mut common::rng(1000 + seed), 14);
        let (p, _) = partition(&f, distinct_weight_count(&f)).unwrap();
        assert!(is_bmo(&f, &p), "seed {seed}");
        let Optimum::Optimum { cost: opt, .. } = brute_force_optimum(&f).unwrap() else {
            let (r, _) = run(&f, &SearchConfig::new(Algorithm::ApxSubprob, ClusterCount::DistinctWeights));
            assert_eq!(r.status, SearchStatus::Unsatisfiable);
            continue;
        };
        let (r, seen) = run(&f, &SearchConfig::new(Algorithm::ApxSubprob, ClusterCount::DistinctWeights));
        check_safe(&f, opt, &r, &seen);
        assert_eq!(r.best.unwrap().true_cost, opt, "seed {seed}");
        checked += 1;
    }
    assert!(checked >= 40);
}

#[test]
fn hard_unsat_is_reported() {
    let f = apxmaxsat::parse_wcnf("p wcnf 2 3 9\n9 1 0\n9 -1 2 0\n9 -2 0\n4 1 2 0\n".as_bytes()).unwrap();
    assert_eq!(check_hard(&f), HardCheck::Unsat);
    for alg in [Algorithm::ApxWeight, Algorithm::ApxSubprob] {
        let (r, seen) = run(&f, &SearchConfig::new(alg, ClusterCount::DistinctWeights));
        assert_eq!(r.status, SearchStatus::Unsatisfiable);
        assert!(r.best.is_none() && seen.is_empty());
    }
}

fn check_hard(f: &WcnfFormula) -> HardCheck {
    search::check_hard(f, &Limits::none())
}

#[test]
fn seeds_are_deterministic() {
    for seed in 0..20 {
        let f = small_instance(seed);
        for alg in [Algorithm::ApxWeight, Algorithm::ApxSubprob] {
            let cfg = SearchConfig::new(alg, ClusterCount::Fixed(2)).with_seed(seed);
            let a: Vec<Weight> = run(&f, &cfg).0.trace.iter().map(|t| t.cost).collect();
            let b: Vec<Weight> = run(&f, &cfg).0.trace.iter().map(|t| t.cost).collect();
            assert_eq!(a, b);
        }
    }
}

#[test]
fn conflict_budget_keeps_best_model() {
    for seed in 0..30 {
        let f = small_instance(seed);
        let opt = optimum(&f);
        for budget in [0, 1, 5, 50] {
            let cfg = SearchConfig::new(Algorithm::ApxWeight, ClusterCount::Fixed(0)).with_conflicts(budget);
            let (r, seen) = run(&f, &cfg);
            if let Some(best) = &r.best {
                assert!(best.true_cost >= opt);
                check_safe(&f, opt, &r, &seen);
            } else {
                assert_eq!(r.status, SearchStatus::Unknown);
            }
            if r.status == SearchStatus::OptimumForApproximation {
                assert_eq!(r.best.unwrap().true_cost, opt);
            }
        }
    }
}
