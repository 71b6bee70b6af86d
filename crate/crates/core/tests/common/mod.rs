#![allow(dead_code)]

use apxmaxsat::harness::generate::{random_instance, RandomParams};
use apxmaxsat::{Clause, WcnfFormula, Weight};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn small_instance(seed: u64) -> WcnfFormula {
    random_instance(&mut rng(seed), &RandomParams::default())
}

fn clause_strategy(num_vars: u32) -> impl Strategy<Value = Vec<i32>> {
    prop::collection::vec((1..=num_vars as i32, any::<bool>()), 1..=4)
        .prop_map(|ls| ls.into_iter().map(|(v, neg)| if neg { -v } else { v }).collect())
}

/// Arbitrary formulas, hard part not necessarily satisfiable.
pub fn formula_strategy(max_vars: u32, max_clauses: usize, max_weight: Weight) -> impl Strategy<Value = WcnfFormula> {
    (1..=max_vars).prop_flat_map(move |n| {
        prop::collection::vec((clause_strategy(n), prop::option::of(1..=max_weight)), 0..=max_clauses).prop_map(
            move |cs| {
                let mut f = WcnfFormula::new(n);
                for (lits, w) in cs {
                    match w {
                        Some(w) => f.add_soft(Clause::from_dimacs(&lits), w).unwrap(),
                        None => f.add_hard(Clause::from_dimacs(&lits)),
                    }
                }
                f
            },
        )
    })
}
