mod common;

use std::fs;
use std::time::Duration;

use apxmaxsat::harness::{run_benchmarks, score, BenchOptions, BestKnown};
use apxmaxsat::{Algorithm, ClusterCount, SearchConfig, Weight};
use num_rational::BigRational;
use proptest::prelude::*;

fn configs() -> Vec<(String, SearchConfig)> {
    vec![
        ("exact".into(), SearchConfig::new(Algorithm::ApxWeight, ClusterCount::Fixed(0))),
        ("subprob-1".into(), SearchConfig::new(Algorithm::ApxSubprob, ClusterCount::Fixed(1))),
    ]
}

#[test]
fn benchmark_directory_is_scored() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..6 {
        let f = common::small_instance(seed);
        fs::write(dir.path().join(format!("i{seed}.wcnf")), f.to_wcnf_string()).unwrap();
    }
    fs::write(dir.path().join("broken.wcnf"), "p wcnf 2 1 5\n5 1 x 0\n").unwrap();
    fs::write(dir.path().join("notes.txt"), "ignored").unwrap();

    let opts = BenchOptions {
        timeout: Some(Duration::from_secs(30)),
        conflicts: None,
        workers: 3,
    };
    let t = run_benchmarks(dir.path(), &configs(), &opts, &BestKnown::default()).unwrap();
    assert_eq!(t.rows.len(), 7);
    let broken = t.rows.iter().find(|r| r.instance.ends_with("broken.wcnf")).unwrap();
    assert!(broken.parse_error.is_some());
    for r in &t.rows {
        if r.parse_error.is_none() {
            // The exact configuration always attains the virtual best.
            assert_eq!(r.runs[0].cost, r.best_known);
            assert_eq!(r.scores[0], BigRational::from_integer(1.into()));
            assert!(r.runs.iter().all(|x| x.validated));
        }
    }
    // Six solved instances out of seven.
    assert_eq!(t.averages[0], BigRational::new(6.into(), 7.into()));

    let json = t.to_json();
    assert_eq!(json["records"].as_array().unwrap().len(), 14);
    assert_eq!(json["averages"]["exact"], "0.8571");
    assert!(t.to_text().lines().last().unwrap().contains("0.8571"));

    // Same inputs, same report.
    let again = run_benchmarks(dir.path(), &configs(), &BenchOptions { workers: 1, ..opts.clone() }, &BestKnown::default()).unwrap();
    let costs = |t: &apxmaxsat::harness::ScoreTable| -> Vec<Vec<Option<Weight>>> {
        t.rows.iter().map(|r| r.runs.iter().map(|x| x.cost).collect()).collect()
    };
    assert_eq!(costs(&t), costs(&again));

    // A sidecar round trip keeps the merged best-known costs.
    let side = dir.path().join("best.txt");
    t.best_known(&BestKnown::default()).save(&side).unwrap();
    let loaded = BestKnown::load(&side).unwrap();
    assert_eq!(loaded.0.len(), 6);
    assert_eq!(BestKnown::load(&dir.path().join("missing.txt")).unwrap(), BestKnown::default());
}

proptest! {
    #[test]
    fn score_is_monotone(best in 0u64..1000, a in 0u64..1000, b in 0u64..1000) {
        let (lo, hi) = (best + a.min(b), best + a.max(b));
        let s_lo = score(best, Some(lo)).unwrap();
        let s_hi = score(best, Some(hi)).unwrap();
        prop_assert!(s_lo >= s_hi);
        prop_assert!(s_hi >= score(best, None).unwrap());
        prop_assert!(s_lo <= BigRational::from_integer(1.into()));
    }
}
