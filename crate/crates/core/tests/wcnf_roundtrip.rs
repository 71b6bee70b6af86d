mod common;

use apxmaxsat::wcnf::{parse_wcnf, ModelCheck};
use apxmaxsat::Assignment;
use common::formula_strategy;
use proptest::prelude::*;

proptest! {
    #[test]
    fn serialize_then_parse_is_identity(f in formula_strategy(10, 20, 1_000_000)) {
        let text = f.to_wcnf_string();
        let g = parse_wcnf(text.as_bytes()).unwrap();
        prop_assert_eq!(&g, &f);
        prop_assert_eq!(g.to_wcnf_string(), text);
    }

    #[test]
    fn cost_is_bounded_by_total_weight(f in formula_strategy(8, 20, 50), bits in any::<u32>()) {
        let n = f.num_vars();
        let a = Assignment::new((0..n).map(|i| (bits >> i) & 1 == 1).collect());
        let cost = f.cost(&a).unwrap();
        prop_assert!(cost <= f.total_soft_weight());
        let violated = f.hard().iter().position(|c| !c.is_satisfied(&a));
        match (f.check_model(&a).unwrap(), violated) {
            (ModelCheck::Valid(c), None) => prop_assert_eq!(c, cost),
            (ModelCheck::ViolatesHard(i), Some(j)) => prop_assert_eq!(i, j),
            (got, want) => prop_assert!(false, "{:?} vs {:?}", got, want),
        }
    }

    #[test]
    fn minimal_extension_cost_matches(f in formula_strategy(8, 20, 50), bits in any::<u32>()) {
        let n = f.num_vars();
        let a = Assignment::new((0..n).map(|i| (bits >> i) & 1 == 1).collect());
        let r = f.relax();
        let ext = r.minimal_extension(&a);
        prop_assert_eq!(ext.len(), r.total_vars as usize);
        // Every relaxed soft clause is satisfied and relax vars are set only when needed.
        let costs: Vec<u64> = f.weights().collect();
        let relaxed_cost: u64 = r
            .weighted_relax_lits(&costs)
            .into_iter()
            .filter(|&(l, _)| ext.lit_value(l))
            .map(|(_, w)| w)
            .sum();
        prop_assert_eq!(relaxed_cost, f.cost(&a).unwrap());
        if f.hard().iter().all(|c| c.is_satisfied(&a)) {
            for c in r.clauses() {
                prop_assert!(c.iter().any(|&l| ext.lit_value(l)));
            }
        }
    }
}
