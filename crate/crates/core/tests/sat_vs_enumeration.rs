mod common;

use apxmaxsat::satcore::{ClauseSink, Limits, SatBackend, SolveOutcome, Solver};
use apxmaxsat::{Clause, Lit};
use rand::Rng;

fn brute_force_sat(n: u32, clauses: &[Vec<Lit>]) -> bool {
    let masks: Vec<(u32, u32)> = clauses
        .iter()
        .map(|c| {
            c.iter().fold((0, 0), |(p, q), l| {
                let bit = 1 << l.var().idx();
                if l.is_negated() { (p, q | bit) } else { (p | bit, q) }
            })
        })
        .collect();
    (0u32..(1 << n)).any(|x| masks.iter().all(|&(p, q)| x & p != 0 || !x & q != 0))
}

#[test]
fn random_3cnf_agrees_with_enumeration() {
    let mut sat = 0;
    for seed in 0..1000u64 {
        let mut rng = common::rng(seed);
        let n: u32 = rng.random_range(3..=20);
        // Around the satisfiability threshold so both outcomes show up.
        let m = (f64::from(n) * rng.random_range(3.5..5.0)) as usize;
        let clauses: Vec<Vec<Lit>> = (0..m)
            .map(|_| {
                let lits: Vec<i32> = (0..3)
                    .map(|_| {
                        let v = rng.random_range(1..=n) as i32;
                        if rng.random_bool(0.5) { -v } else { v }
                    })
                    .collect();
                Clause::from_dimacs(&lits).lits().to_vec()
            })
            .collect();
        let mut s = Solver::with_seed(n, seed);
        for c in &clauses {
            s.add_clause(c);
        }
        let expected = brute_force_sat(n, &clauses);
        match s.solve(&Limits::none()) {
            SolveOutcome::Sat(a) => {
                assert!(expected, "seed {seed}: solver found a model of an unsat formula");
                for c in &clauses {
                    assert!(c.iter().any(|&l| a.lit_value(l)), "seed {seed}: model violates a clause");
                }
                sat += 1;
            }
            SolveOutcome::Unsat => assert!(!expected, "seed {seed}: satisfiable formula reported unsat"),
            SolveOutcome::Unknown => panic!("seed {seed}: unknown without limits"),
        }
    }
    assert!(sat > 100 && sat < 900, "{sat} satisfiable of 1000");
}

#[test]
fn incremental_calls_match_enumeration() {
    // Add clauses in batches and re-solve; each verdict must match the prefix.
    for seed in 0..100u64 {
        let mut rng = common::rng(seed);
        let n: u32 = rng.random_range(4..=12);
        let mut s = Solver::with_seed(n, seed);
        let mut clauses = Vec::new();
        for _ in 0..6 {
            for _ in 0..n {
                let lits: Vec<i32> = (0..3)
                    .map(|_| {
                        let v = rng.random_range(1..=n) as i32;
                        if rng.random_bool(0.5) { -v } else { v }
                    })
                    .collect();
                let c = Clause::from_dimacs(&lits).lits().to_vec();
                s.add_clause(&c);
                clauses.push(c);
            }
            let got = matches!(s.solve(&Limits::none()), SolveOutcome::Sat(_));
            assert_eq!(got, brute_force_sat(n, &clauses), "seed {seed}");
            if !got {
                break;
            }
        }
        assert_eq!(s.num_vars(), n);
    }
}
