use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::time::{Duration, Instant};

use apxmaxsat::harness::generate::spread_weight_instance;
use apxmaxsat::wcnf::ModelCheck;
use apxmaxsat::{parse_wcnf, Assignment, Weight};
use rand::SeedableRng;

const E1: &str = "p wcnf 2 3 10\n10 1 2 0\n3 -1 0\n2 -2 0\n";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_apxmaxsat"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn stdout(o: &Output) -> Vec<String> {
    String::from_utf8_lossy(&o.stdout).lines().map(String::from).collect()
}

/// Checks the o/s/v protocol and returns the final model's cost.
fn check_protocol(text: &str, lines: &[String]) -> Option<Weight> {
    let f = parse_wcnf(text.as_bytes()).unwrap();
    let os: Vec<Weight> = lines
        .iter()
        .filter_map(|l| l.strip_prefix("o "))
        .map(|c| c.parse().unwrap())
        .collect();
    assert!(os.windows(2).all(|w| w[0] > w[1]), "{lines:?}");
    assert_eq!(lines.iter().filter(|l| l.starts_with("s ")).count(), 1, "{lines:?}");
    let v = lines.iter().find_map(|l| l.strip_prefix("v "))?;
    let lits: Vec<i32> = v.split_whitespace().map(|x| x.parse().unwrap()).collect();
    assert_eq!(lits.len(), f.num_vars() as usize, "only original variables");
    let a = Assignment::from_dimacs(f.num_vars(), &lits);
    let ModelCheck::Valid(cost) = f.check_model(&a).unwrap() else {
        panic!("v line violates a hard clause");
    };
    assert_eq!(os.last(), Some(&cost));
    Some(cost)
}

#[test]
fn solve_defaults_report_satisfiable() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "e1.wcnf", E1);
    let out = bin().arg("solve").arg(&p).output().unwrap();
    assert_eq!(out.status.code(), Some(10));
    let lines = stdout(&out);
    assert_eq!(check_protocol(E1, &lines), Some(2));
    assert!(lines.contains(&"s SATISFIABLE".to_string()));
}

#[test]
fn approximated_runs_never_claim_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "e1.wcnf", E1);
    for (alg, m) in [("apx-weight", "1"), ("apx-weight", "weights"), ("apx-subprob", "1"), ("apx-subprob", "2")] {
        let out = bin()
            .args(["solve", p.to_str().unwrap(), "--algorithm", alg, "--clusters", m])
            .output()
            .unwrap();
        let lines = stdout(&out);
        assert_eq!(out.status.code(), Some(10), "{alg} {m}: {lines:?}");
        assert!(lines.contains(&"s SATISFIABLE".to_string()));
        check_protocol(E1, &lines);
    }
}

#[test]
fn conflict_budget_zero_gives_unknown() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "e1.wcnf", E1);
    let out = bin()
        .args(["solve", p.to_str().unwrap(), "--conflicts", "0", "--algorithm", "apx-weight", "--clusters", "0"])
        .output()
        .unwrap();
    assert_eq!(stdout(&out), ["s UNKNOWN"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn no_soft_clauses_is_optimal_in_exact_mode() {
    let dir = tempfile::tempdir().unwrap();
    let text = "p wcnf 2 1 5\n5 -1 -2 0\n";
    let p = write(dir.path(), "hard.wcnf", text);
    let out = bin()
        .args(["solve", p.to_str().unwrap(), "--algorithm", "apx-weight", "--clusters", "0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(30));
    assert_eq!(check_protocol(text, &stdout(&out)), Some(0));
}

#[test]
fn usage_and_io_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "e1.wcnf", E1);
    let bad = write(dir.path(), "bad.wcnf", "p wcnf 2 1 5\n5 1 x 0\n");
    let newfmt = write(dir.path(), "new.wcnf", "h 1 2 0\n3 -1 0\n");
    let cases: Vec<Vec<String>> = vec![
        vec!["solve".into(), dir.path().join("missing.wcnf").display().to_string()],
        vec!["solve".into(), bad.display().to_string()],
        vec!["solve".into(), newfmt.display().to_string()],
        vec!["solve".into(), p.display().to_string(), "--clusters".into(), "many".into()],
        vec!["solve".into(), p.display().to_string(), "--timeout".into(), "0".into()],
        vec!["solve".into(), p.display().to_string(), "--algorithm".into(), "exact".into()],
        vec!["solve".into(), p.display().to_string(), "--verbosity".into(), "3".into()],
        vec!["solve".into(), p.display().to_string(), "--algorithm".into(), "apx-subprob".into(), "--clusters".into(), "0".into()],
        vec!["frobnicate".into()],
    ];
    for args in cases {
        let out = bin().args(&args).output().unwrap();
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
    assert_eq!(bin().arg("--help").output().unwrap().status.code(), Some(0));
}

#[test]
fn verbosity_adds_only_comments() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "e1.wcnf", E1);
    let out = bin().args(["solve", p.to_str().unwrap(), "--verbosity", "2"]).output().unwrap();
    let lines = stdout(&out);
    assert!(lines.iter().any(|l| l.starts_with("c ")));
    assert!(lines.iter().all(|l| ["c ", "o ", "s ", "v "].iter().any(|p| l.starts_with(p))));
    let quiet: Vec<String> = lines.into_iter().filter(|l| !l.starts_with("c ")).collect();
    assert_eq!(check_protocol(E1, &quiet), Some(2));
}

#[test]
fn oracle_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "e1.wcnf", E1);
    let out = bin().arg("oracle").arg(&p).output().unwrap();
    assert_eq!(stdout(&out), ["o 2", "s OPTIMUM FOUND", "v -1 2"]);
    assert_eq!(out.status.code(), Some(30));
    let u = write(dir.path(), "u.wcnf", "p wcnf 1 2 9\n9 1 0\n9 -1 0\n");
    assert_eq!(bin().arg("oracle").arg(&u).output().unwrap().status.code(), Some(20));
}

/// Parses `encode` output and enumerates which input patterns extend to a model.
fn encoded_models(args: &[&str], n: usize) -> Vec<u32> {
    let out = bin().arg("encode").args(args).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut num_vars = 0;
    let mut clauses: Vec<Vec<i32>> = Vec::new();
    for line in text.lines() {
        if line.starts_with('c') {
            continue;
        }
        if let Some(h) = line.strip_prefix("p cnf ") {
            num_vars = h.split_whitespace().next().unwrap().parse::<u32>().unwrap();
            continue;
        }
        let lits: Vec<i32> = line.split_whitespace().map(|x| x.parse().unwrap()).collect();
        assert_eq!(lits.last(), Some(&0));
        clauses.push(lits[..lits.len() - 1].to_vec());
    }
    assert!(num_vars <= 20, "too many variables to enumerate");
    let mut models: Vec<u32> = (0u32..(1 << num_vars))
        .filter(|x| {
            clauses.iter().all(|c| {
                c.iter().any(|&l| ((x >> (l.unsigned_abs() - 1)) & 1 == 1) == (l > 0))
            })
        })
        .map(|x| x & ((1 << n) - 1))
        .collect();
    models.sort_unstable();
    models.dedup();
    models
}

fn within(weights: &[Weight], b: Weight) -> Vec<u32> {
    (0u32..(1 << weights.len()))
        .filter(|x| (0..weights.len()).filter(|i| (x >> i) & 1 == 1).map(|i| weights[i]).sum::<Weight>() <= b)
        .collect()
}

#[test]
fn encode_dumps_equivalent_dimacs() {
    assert_eq!(encoded_models(&["gte", "--weights", "2,3,4", "--bound", "5"], 3), within(&[2, 3, 4], 5));
    assert_eq!(
        encoded_models(&["gte", "--weights", "1,3,3,5", "--bound", "8", "--bound", "4"], 4),
        within(&[1, 3, 3, 5], 4)
    );
    assert_eq!(
        encoded_models(&["totalizer", "--weights", "1,1,1,1", "--bound", "3", "--bound", "1"], 4),
        within(&[1, 1, 1, 1], 1)
    );
    assert_eq!(encoded_models(&["gte", "--weights", "2,2"], 2), within(&[2, 2], 4));
    let out = bin().args(["encode", "totalizer", "--weights", "1,2", "--bound", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = bin().args(["encode", "gte", "--weights", "1,2", "--bound", "1", "--bound", "2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bench_writes_table_report_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("instances");
    std::fs::create_dir(&inst).unwrap();
    write(&inst, "e1.wcnf", E1);
    write(&inst, "other.wcnf", "p wcnf 3 4 20\n20 1 2 3 0\n7 -1 0\n5 -2 0\n1 -3 0\n");
    write(&inst, "bad.wcnf", "p wcnf 1 1 2\n1 1\n");
    let report = dir.path().join("report.json");
    let side = dir.path().join("best.txt");
    let out = bin()
        .args(["bench", inst.to_str().unwrap(), "--config", "apx-weight:0", "--config", "apx-subprob:1"])
        .args(["--conflicts", "10000", "--workers", "2", "--report", report.to_str().unwrap()])
        .args(["--best-known", side.to_str().unwrap(), "--update-best-known"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let lines = stdout(&out);
    assert!(lines[0].contains("apx-weight:0") && lines[0].contains("apx-subprob:1"));
    let last = lines.last().unwrap();
    assert!(last.starts_with("score") && last.contains("0.6667"), "{last}");
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.wcnf"));
    let json = std::fs::read_to_string(&report).unwrap();
    assert!(json.contains("\"records\"") && json.contains("\"trace\""));
    let sidecar = std::fs::read_to_string(&side).unwrap();
    assert!(sidecar.lines().any(|l| l.starts_with("2 ") && l.ends_with("e1.wcnf")), "{sidecar}");
}

#[test]
fn sigterm_prints_best_model() {
    let dir = tempfile::tempdir().unwrap();
    let f = spread_weight_instance(&mut rand_chacha::ChaCha8Rng::seed_from_u64(7), 400, 1500, 1_000_000);
    let text = f.to_wcnf_string();
    let p = write(dir.path(), "big.wcnf", &text);
    let child = bin()
        .args(["solve", p.to_str().unwrap(), "--algorithm", "apx-weight", "--clusters", "0"])
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    std::thread::sleep(Duration::from_millis(1500));
    let killed = Command::new("kill").args(["-TERM", &child.id().to_string()]).status().unwrap();
    let start = Instant::now();
    let out = child.wait_with_output().unwrap();
    assert!(start.elapsed() < Duration::from_secs(30));
    let lines = stdout(&out);
    if killed.success() && out.status.code() != Some(30) {
        assert_eq!(out.status.code(), Some(10), "{lines:?}");
        assert!(lines.contains(&"s SATISFIABLE".to_string()));
    }
    check_protocol(&text, &lines).expect("a model was printed");
}
