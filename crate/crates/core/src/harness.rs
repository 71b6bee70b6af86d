//! # Verification and Evaluation Harness
//!
//! - an exhaustive optimum oracle for small formulas
//! - MaxSAT Evaluation incomplete-track scoring in exact rational arithmetic
//! - a batch runner that scores solver configurations against the virtual
//!   best cost per instance, optionally merged with externally known costs
//! - seeded instance generators used by the tests and benchmarks

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufReader};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::search::{self, SearchConfig, SearchStatus, TraceEntry};
use crate::wcnf::{parse_wcnf, Assignment, Clause, ModelCheck, WcnfFormula, Weight};

/// Largest variable count the exhaustive oracle accepts.
pub const BRUTE_FORCE_MAX_VARS: u32 = 24;

#[derive(Error, Debug)]
pub enum HarnessError {
    #[error("brute force supports at most {BRUTE_FORCE_MAX_VARS} variables, formula has {0}")]
    TooManyVars(u32),
    #[error("found cost {found} is below the best known cost {best_known}")]
    BelowBestKnown { best_known: Weight, found: Weight },
    #[error("sidecar line {line}: {msg}")]
    Sidecar { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Result of [`brute_force_optimum`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Optimum {
    Optimum { cost: Weight, model: Assignment },
    Unsat,
}

impl Optimum {
    #[must_use]
    pub fn cost(&self) -> Option<Weight> {
        match self {
            Optimum::Optimum { cost, .. } => Some(*cost),
            Optimum::Unsat => None,
        }
    }
}

/// A clause as bitmasks over at most 32 variables.
#[derive(Clone, Copy)]
struct MaskClause {
    pos: u32,
    neg: u32,
}

impl MaskClause {
    fn new(c: &Clause) -> Self {
        let (mut pos, mut neg) = (0, 0);
        for l in c.lits() {
            let bit = 1u32 << l.var().idx();
            if l.is_negated() {
                neg |= bit;
            } else {
                pos |= bit;
            }
        }
        MaskClause { pos, neg }
    }

    fn sat(self, x: u32) -> bool {
        (x & self.pos) != 0 || (!x & self.neg) != 0
    }
}

/// Minimum true cost over all assignments satisfying the hard clauses, by enumeration.
///
/// # Errors
///
/// [`HarnessError::TooManyVars`] above [`BRUTE_FORCE_MAX_VARS`] variables.
pub fn brute_force_optimum(f: &WcnfFormula) -> Result<Optimum, HarnessError> {
    let n = f.num_vars();
    if n > BRUTE_FORCE_MAX_VARS {
        return Err(HarnessError::TooManyVars(n));
    }
    let hard: Vec<MaskClause> = f.hard().iter().map(MaskClause::new).collect();
    let soft: Vec<(MaskClause, Weight)> = f
        .soft()
        .iter()
        .map(|s| (MaskClause::new(&s.clause), s.weight))
        .collect();
    let mut best: Option<(Weight, u32)> = None;
    for x in 0u32..(1u32 << n) {
        if !hard.iter().all(|c| c.sat(x)) {
            continue;
        }
        let cost: Weight = soft.iter().filter(|(c, _)| !c.sat(x)).map(|&(_, w)| w).sum();
        if best.is_none_or(|(b, _)| cost < b) {
            best = Some((cost, x));
            if cost == 0 {
                break;
            }
        }
    }
    Ok(match best {
        Some((cost, x)) => Optimum::Optimum {
            cost,
            model: Assignment::new((0..n).map(|i| (x >> i) & 1 == 1).collect()),
        },
        None => Optimum::Unsat,
    })
}

/// Per-instance score `best_known / found`; 0 without a solution, 1 when both are 0.
///
/// # Errors
///
/// [`HarnessError::BelowBestKnown`] if `found < best_known`.
pub fn score(best_known: Weight, found: Option<Weight>) -> Result<BigRational, HarnessError> {
    match found {
        None => Ok(BigRational::zero()),
        Some(found) if found < best_known => Err(HarnessError::BelowBestKnown { best_known, found }),
        Some(0) => Ok(BigRational::one()),
        Some(found) => Ok(BigRational::new(BigInt::from(best_known), BigInt::from(found))),
    }
}

/// Mean of per-instance scores.
#[must_use]
pub fn average(scores: &[BigRational]) -> BigRational {
    if scores.is_empty() {
        return BigRational::zero();
    }
    let sum = scores.iter().fold(BigRational::zero(), |a, b| a + b);
    sum / BigInt::from(scores.len())
}

/// Rounds half-up to 4 decimal places.
#[must_use]
pub fn format_score(r: &BigRational) -> String {
    let scaled = (r.numer() * BigInt::from(20_000) + r.denom()) / (r.denom() * BigInt::from(2));
    let s = format!("{scaled:0>5}");
    let (int, frac) = s.split_at(s.len() - 4);
    format!("{int}.{frac}")
}

/// Externally known best costs per instance path.
///
/// Stored as text, one `<cost> <path>` entry per line; `#` starts a comment.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BestKnown(pub BTreeMap<String, Weight>);

impl BestKnown {
    /// # Errors
    ///
    /// Malformed lines.
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut map = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| HarnessError::Sidecar {
                line: i + 1,
                msg: msg.to_string(),
            };
            let (cost, path) = line.split_once(char::is_whitespace).ok_or_else(|| err("expected `<cost> <path>`"))?;
            let cost: Weight = cost.parse().map_err(|_| err("invalid cost"))?;
            let path = path.trim();
            map.entry(path.to_string())
                .and_modify(|c: &mut Weight| *c = (*c).min(cost))
                .or_insert(cost);
        }
        Ok(BestKnown(map))
    }

    /// # Errors
    ///
    /// I/O or format errors. A missing file is an empty table.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        match fs::read_to_string(path) {
            Ok(text) => Self::parse(&text),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(Self::default()),
            Err(e) => Err(e.into()),
        }
    }

    #[must_use]
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (path, cost) in &self.0 {
            let _ = writeln!(s, "{cost} {path}");
        }
        s
    }

    /// # Errors
    ///
    /// I/O errors.
    pub fn save(&self, path: &Path) -> Result<(), HarnessError> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    /// Lowers the entry for `instance` to `cost` if that improves it.
    pub fn record(&mut self, instance: &str, cost: Weight) {
        self.0
            .entry(instance.to_string())
            .and_modify(|c| *c = (*c).min(cost))
            .or_insert(cost);
    }
}

/// Outcome of one configuration on one instance.
#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub cost: Option<Weight>,
    pub status: Option<SearchStatus>,
    pub elapsed: Duration,
    pub trace: Vec<TraceEntry>,
    /// Every emitted model re-validated with the same cost.
    pub validated: bool,
}

impl RunRecord {
    /// A run that produced nothing (e.g. the instance failed to parse).
    #[must_use]
    pub fn missing() -> Self {
        RunRecord {
            cost: None,
            status: None,
            elapsed: Duration::ZERO,
            trace: Vec::new(),
            validated: true,
        }
    }

    #[must_use]
    pub fn with_cost(cost: Option<Weight>) -> Self {
        RunRecord {
            cost,
            ..Self::missing()
        }
    }
}

#[derive(Clone, Debug)]
pub struct InstanceRow {
    pub instance: String,
    pub parse_error: Option<String>,
    pub best_known: Option<Weight>,
    /// One record per configuration, in configuration order.
    pub runs: Vec<RunRecord>,
    pub scores: Vec<BigRational>,
}

#[derive(Clone, Debug)]
pub struct ScoreTable {
    pub configs: Vec<String>,
    pub rows: Vec<InstanceRow>,
    /// Average score per configuration.
    pub averages: Vec<BigRational>,
}

impl ScoreTable {
    /// Scores raw run results. `results` holds, per instance, its name, an
    /// optional parse error and one record per configuration.
    #[must_use]
    pub fn compute(
        configs: Vec<String>,
        results: Vec<(String, Option<String>, Vec<RunRecord>)>,
        known: &BestKnown,
    ) -> Self {
        let rows: Vec<InstanceRow> = results
            .into_iter()
            .map(|(instance, parse_error, runs)| {
                assert!(parse_error.is_some() || runs.len() == configs.len());
                let best_known = runs
                    .iter()
                    .filter_map(|r| r.cost)
                    .chain(known.0.get(&instance).copied())
                    .min();
                let scores = (0..configs.len())
                    .map(|i| match (best_known, runs.get(i).and_then(|r| r.cost)) {
                        (Some(b), found) if parse_error.is_none() => {
                            score(b, found).expect("best known is the minimum")
                        }
                        _ => BigRational::zero(),
                    })
                    .collect();
                InstanceRow {
                    instance,
                    parse_error,
                    best_known,
                    runs,
                    scores,
                }
            })
            .collect();
        let averages = (0..configs.len())
            .map(|i| {
                let col: Vec<BigRational> = rows.iter().map(|r| r.scores[i].clone()).collect();
                average(&col)
            })
            .collect();
        ScoreTable {
            configs,
            rows,
            averages,
        }
    }

    /// Best-known table including everything observed in this run.
    #[must_use]
    pub fn best_known(&self, known: &BestKnown) -> BestKnown {
        let mut out = known.clone();
        for r in &self.rows {
            if let Some(b) = r.best_known {
                out.record(&r.instance, b);
            }
        }
        out
    }

    /// Plain-text table: one row per instance, one cost/score column per configuration.
    #[must_use]
    pub fn to_text(&self) -> String {
        let mut header = vec!["instance".to_string(), "best".to_string()];
        header.extend(self.configs.iter().cloned());
        let mut lines = vec![header];
        for r in &self.rows {
            let mut line = vec![
                r.instance.clone(),
                r.best_known.map_or("-".into(), |b| b.to_string()),
            ];
            for (i, s) in r.scores.iter().enumerate() {
                let cost = r.runs.get(i).and_then(|x| x.cost);
                line.push(match (&r.parse_error, cost) {
                    (Some(_), _) => "parse-error".into(),
                    (None, Some(c)) => format!("{c} ({})", format_score(s)),
                    (None, None) => format!("- ({})", format_score(s)),
                });
            }
            lines.push(line);
        }
        let mut avg = vec!["score".to_string(), String::new()];
        avg.extend(self.averages.iter().map(format_score));
        lines.push(avg);

        let widths: Vec<usize> = (0..lines[0].len())
            .map(|c| lines.iter().map(|l| l[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for l in &lines {
            let cells: Vec<String> = l
                .iter()
                .zip(&widths)
                .map(|(cell, w)| format!("{cell:<w$}"))
                .collect();
            let _ = writeln!(out, "{}", cells.join("  ").trim_end());
        }
        out
    }

    /// Machine-readable report: one record per instance and configuration.
    #[must_use]
    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Rec<'a> {
            instance: &'a str,
            config: &'a str,
            parse_error: Option<&'a str>,
            best_known: Option<Weight>,
            cost: Option<Weight>,
            status: Option<SearchStatus>,
            elapsed_secs: f64,
            trace: Vec<(f64, Weight)>,
            validated: bool,
            score: String,
        }
        let missing = RunRecord::missing();
        let mut recs = Vec::new();
        for r in &self.rows {
            for (i, config) in self.configs.iter().enumerate() {
                let run = r.runs.get(i).unwrap_or(&missing);
                recs.push(Rec {
                    instance: &r.instance,
                    config,
                    parse_error: r.parse_error.as_deref(),
                    best_known: r.best_known,
                    cost: run.cost,
                    status: run.status,
                    elapsed_secs: run.elapsed.as_secs_f64(),
                    trace: run.trace.iter().map(|t| (t.elapsed.as_secs_f64(), t.cost)).collect(),
                    validated: run.validated,
                    score: format_score(&r.scores[i]),
                });
            }
        }
        let averages: BTreeMap<&str, String> = self
            .configs
            .iter()
            .map(String::as_str)
            .zip(self.averages.iter().map(format_score))
            .collect();
        serde_json::json!({ "records": recs, "averages": averages })
    }
}

/// Runs one configuration and re-validates every model it reports.
#[must_use]
pub fn run_one(f: &WcnfFormula, cfg: &SearchConfig) -> RunRecord {
    let start = Instant::now();
    let mut validated = true;
    let result = search::solve(f, cfg, &mut |m| {
        validated &= f.check_model(&m.assignment) == Ok(ModelCheck::Valid(m.true_cost));
    });
    match result {
        Ok(r) => RunRecord {
            cost: if validated { r.best.map(|m| m.true_cost) } else { None },
            status: Some(r.status),
            elapsed: start.elapsed(),
            trace: r.trace,
            validated,
        },
        Err(_) => RunRecord::missing(),
    }
}

#[derive(Clone, Debug)]
pub struct BenchOptions {
    pub timeout: Option<Duration>,
    pub conflicts: Option<u64>,
    pub workers: usize,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            timeout: Some(Duration::from_secs(300)),
            conflicts: None,
            workers: 1,
        }
    }
}

/// `.wcnf` files directly inside `dir`, sorted by path.
///
/// # Errors
///
/// The directory cannot be read.
pub fn list_instances(dir: &Path) -> io::Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "wcnf"))
        .collect();
    out.sort();
    Ok(out)
}

/// Runs every configuration on every instance of `dir` and scores them.
///
/// The per-instance budget in `opts` overrides the configurations' own.
/// Unreadable instances are recorded with a parse error and score 0.
///
/// # Errors
///
/// The directory cannot be listed.
pub fn run_benchmarks(
    dir: &Path,
    configs: &[(String, SearchConfig)],
    opts: &BenchOptions,
    known: &BestKnown,
) -> Result<ScoreTable, HarnessError> {
    let instances = list_instances(dir)?;
    let configs: Vec<(String, SearchConfig)> = configs
        .iter()
        .map(|(label, c)| {
            let mut c = c.clone();
            c.timeout = opts.timeout;
            c.conflicts = opts.conflicts;
            (label.clone(), c)
        })
        .collect();

    let run_instance = |path: &PathBuf| {
        let name = path.display().to_string();
        let parsed = fs::File::open(path)
            .map_err(|e| e.to_string())
            .and_then(|file| parse_wcnf(BufReader::new(file)).map_err(|e| e.to_string()));
        match parsed {
            Ok(f) => {
                let runs = configs.iter().map(|(_, c)| run_one(&f, c)).collect();
                (name, None, runs)
            }
            Err(e) => (name, Some(e), Vec::new()),
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers.max(1))
        .build()
        .expect("thread pool");
    let results = pool.install(|| instances.par_iter().map(run_instance).collect::<Vec<_>>());

    let labels = configs.into_iter().map(|(l, _)| l).collect();
    Ok(ScoreTable::compute(labels, results, known))
}

/// Seeded random instance families.
pub mod generate {
    use super::*;

    /// Parameters for [`random_instance`].
    #[derive(Clone, Debug)]
    pub struct RandomParams {
        pub max_vars: u32,
        pub max_clauses: usize,
        pub max_weight: Weight,
        /// Fraction of clauses that are hard.
        pub hard_ratio: f64,
        pub max_clause_len: usize,
    }

    impl Default for RandomParams {
        fn default() -> Self {
            RandomParams {
                max_vars: 16,
                max_clauses: 30,
                max_weight: 20,
                hard_ratio: 0.3,
                max_clause_len: 3,
            }
        }
    }

    fn random_clause<R: Rng>(rng: &mut R, num_vars: u32, len: usize) -> Vec<i32> {
        let len = len.min(num_vars as usize);
        let mut vars: Vec<i32> = Vec::with_capacity(len);
        while vars.len() < len {
            let v = rng.random_range(1..=num_vars) as i32;
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
        vars.into_iter()
            .map(|v| if rng.random_bool(0.5) { -v } else { v })
            .collect()
    }

    /// Weighted partial instance whose hard part is satisfiable by a planted assignment.
    pub fn random_instance<R: Rng>(rng: &mut R, p: &RandomParams) -> WcnfFormula {
        let num_vars = rng.random_range(2..=p.max_vars.max(2));
        let n_clauses = rng.random_range(2..=p.max_clauses.max(2));
        let planted: Vec<bool> = (0..num_vars).map(|_| rng.random_bool(0.5)).collect();
        let mut f = WcnfFormula::new(num_vars);
        for _ in 0..n_clauses {
            let len = rng.random_range(1..=p.max_clause_len);
            let mut lits = random_clause(rng, num_vars, len);
            if rng.random_bool(p.hard_ratio) {
                let sat = |l: i32| planted[(l.unsigned_abs() - 1) as usize] == (l > 0);
                if !lits.iter().any(|&l| sat(l)) {
                    let i = rng.random_range(0..lits.len());
                    lits[i] = -lits[i];
                }
                f.add_hard(Clause::from_dimacs(&lits));
            } else {
                let w = rng.random_range(1..=p.max_weight);
                f.add_soft(Clause::from_dimacs(&lits), w).expect("small weights");
            }
        }
        f
    }

    /// Larger instance with a planted-satisfiable 3-CNF hard part and soft
    /// clauses whose weights are spread log-uniformly over `1..=max_weight`,
    /// giving many distinct weights.
    pub fn spread_weight_instance<R: Rng>(rng: &mut R, num_vars: u32, num_soft: usize, max_weight: Weight) -> WcnfFormula {
        let planted: Vec<bool> = (0..num_vars).map(|_| rng.random_bool(0.5)).collect();
        let mut f = WcnfFormula::new(num_vars);
        let n_hard = (f64::from(num_vars) * 2.5) as usize;
        for _ in 0..n_hard {
            let mut lits = random_clause(rng, num_vars, 3);
            let sat = |l: i32| planted[(l.unsigned_abs() - 1) as usize] == (l > 0);
            if !lits.iter().any(|&l| sat(l)) {
                let i = rng.random_range(0..lits.len());
                lits[i] = -lits[i];
            }
            f.add_hard(Clause::from_dimacs(&lits));
        }
        let log_max = (max_weight as f64).ln();
        for _ in 0..num_soft {
            let len = rng.random_range(1..=2);
            let w = (rng.random_range(0.0..=log_max).exp().round() as Weight).clamp(1, max_weight);
            f.add_soft(Clause::from_dimacs(&random_clause(rng, num_vars, len)), w)
                .expect("bounded weights");
        }
        f
    }

    /// Instance whose distinct weights form Boolean multilevel levels: each
    /// level's weight exceeds the total weight of all lower levels.
    pub fn bmo_instance<R: Rng>(rng: &mut R, max_vars: u32) -> WcnfFormula {
        let num_vars = rng.random_range(3..=max_vars.max(3));
        let mut f = WcnfFormula::new(num_vars);
        for _ in 0..rng.random_range(0..=num_vars) {
            let len = rng.random_range(2..=3);
            f.add_hard(Clause::from_dimacs(&random_clause(rng, num_vars, len)));
        }
        let levels = rng.random_range(2..=4);
        let mut below: Weight = 0;
        for _ in 0..levels {
            let w = below + rng.random_range(1..=3);
            let count = rng.random_range(1..=5);
            for _ in 0..count {
                let len = rng.random_range(1..=2);
                f.add_soft(Clause::from_dimacs(&random_clause(rng, num_vars, len)), w)
                    .expect("small weights");
            }
            below += w * count;
        }
        f
    }
}
