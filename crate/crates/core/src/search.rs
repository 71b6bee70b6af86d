//! # Anytime Approximate MaxSAT Search
//!
//! Two algorithms over the relaxed formula:
//!
//! - **apx-weight**: linear search SAT-UNSAT on the approximated cost. Every
//!   model tightens a generalized-totalizer bound `Σ cost_m(r)·r <= μ - 1`
//!   until the working formula becomes unsatisfiable. With `m = 0` the
//!   approximation is the identity and the search is exact.
//! - **apx-subprob**: clusters are minimized one at a time in descending
//!   order of representative weight using cardinality constraints only. When
//!   a cluster cannot improve further, its count is frozen: the working
//!   formula is rebuilt from the relaxed formula plus `Σ r <= μ_j` for every
//!   cluster processed so far.
//!
//! In both, the best model is tracked by its true cost and only replaced on
//! strict improvement, so the improvement trace is strictly decreasing.

use std::path::PathBuf;
use std::sync::atomic::AtomicBool;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clustering::{distinct_weight_count, partition, Partition, WeightScheme};
use crate::encodings::{BuildLimits, GteState, TotalizerState};
use crate::satcore::{ExternalSolver, Limits, SatBackend, SolveOutcome, Solver};
use crate::wcnf::{Assignment, Lit, Model, RelaxedFormula, WcnfFormula, Weight};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    ApxWeight,
    ApxSubprob,
}

/// Requested number of clusters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClusterCount {
    Fixed(usize),
    /// One cluster per distinct weight.
    DistinctWeights,
}

impl ClusterCount {
    #[must_use]
    pub fn resolve(self, f: &WcnfFormula) -> usize {
        match self {
            ClusterCount::Fixed(m) => m,
            ClusterCount::DistinctWeights => distinct_weight_count(f),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum BackendChoice {
    #[default]
    Bundled,
    /// A DIMACS solver run as a child process for every call.
    External { program: PathBuf, args: Vec<String> },
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub algorithm: Algorithm,
    pub clusters: ClusterCount,
    /// Wall-clock budget for the whole search.
    pub timeout: Option<Duration>,
    /// Conflict budget for the whole search (bundled backend only).
    pub conflicts: Option<u64>,
    pub seed: u64,
    /// Cooperative stop request, polled like the deadline.
    pub stop: Option<Arc<AtomicBool>>,
    /// Largest cardinality or pseudo-Boolean encoding the search may build;
    /// the search stops with its best model when one would be larger.
    pub max_encoding_clauses: Option<usize>,
    pub backend: BackendChoice,
}

impl SearchConfig {
    #[must_use]
    pub fn new(algorithm: Algorithm, clusters: ClusterCount) -> Self {
        SearchConfig {
            algorithm,
            clusters,
            timeout: None,
            conflicts: None,
            seed: 0,
            stop: None,
            max_encoding_clauses: None,
            backend: BackendChoice::Bundled,
        }
    }

    #[must_use]
    pub fn with_conflicts(mut self, n: u64) -> Self {
        self.conflicts = Some(n);
        self
    }

    #[must_use]
    pub fn with_timeout(mut self, t: Duration) -> Self {
        self.timeout = Some(t);
        self
    }

    #[must_use]
    pub fn with_max_encoding_clauses(mut self, n: usize) -> Self {
        self.max_encoding_clauses = Some(n);
        self
    }

    #[must_use]
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Whether a completed run of this configuration proves optimality.
    #[must_use]
    pub fn is_exact(&self) -> bool {
        self.algorithm == Algorithm::ApxWeight && self.clusters == ClusterCount::Fixed(0)
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("apx-subprob needs at least one cluster")]
    ZeroClusters,
    #[error("timeout must be positive")]
    ZeroTimeout,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchStatus {
    /// The search ran to completion: the approximated objective cannot be
    /// improved further. Only an exact configuration makes this an optimum.
    OptimumForApproximation,
    /// Stopped by a budget with a model in hand.
    Satisfiable,
    /// The hard clauses are unsatisfiable.
    Unsatisfiable,
    /// Stopped by a budget before any model was found.
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub elapsed: Duration,
    pub cost: Weight,
}

#[derive(Clone, Debug)]
pub struct SearchReport {
    pub best: Option<Model>,
    pub status: SearchStatus,
    /// Strictly decreasing true costs, one per improvement.
    pub trace: Vec<TraceEntry>,
    /// Last bound `μ` on the approximated cost (apx-weight).
    pub approx_bound: Option<Weight>,
    /// Frozen unsatisfied-clause counts per cluster (apx-subprob), in
    /// partition order; `None` for clusters never reached.
    pub frozen: Vec<Option<Weight>>,
    /// Effective number of clusters.
    pub clusters: usize,
    pub sat_calls: usize,
    pub conflicts: u64,
}

/// Outcome of solving the hard clauses alone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HardCheck {
    Sat(Assignment),
    Unsat,
    Unknown,
}

/// Solves the hard clauses of `f` on their own.
#[must_use]
pub fn check_hard(f: &WcnfFormula, limits: &Limits) -> HardCheck {
    let mut s = Solver::new(f.num_vars());
    for c in f.hard() {
        crate::satcore::ClauseSink::add_clause(&mut s, c.lits());
    }
    match s.solve(limits) {
        SolveOutcome::Sat(a) => HardCheck::Sat(a),
        SolveOutcome::Unsat => HardCheck::Unsat,
        SolveOutcome::Unknown => HardCheck::Unknown,
    }
}

/// Runs the configured algorithm.
///
/// # Errors
///
/// Invalid configurations, see [`SearchError`].
pub fn solve(
    f: &WcnfFormula,
    cfg: &SearchConfig,
    on_improve: &mut dyn FnMut(&Model),
) -> Result<SearchReport, SearchError> {
    match cfg.algorithm {
        Algorithm::ApxWeight => solve_apx_weight(f, cfg, on_improve),
        Algorithm::ApxSubprob => solve_apx_subprob(f, cfg, on_improve),
    }
}

/// Shared budget across all solver calls of one search.
struct Budget {
    start: Instant,
    deadline: Option<Instant>,
    conflicts_left: Option<u64>,
    stop: Option<Arc<AtomicBool>>,
    max_encoding_clauses: Option<usize>,
    sat_calls: usize,
    conflicts: u64,
}

impl Budget {
    fn new(cfg: &SearchConfig) -> Result<Self, SearchError> {
        if cfg.timeout == Some(Duration::ZERO) {
            return Err(SearchError::ZeroTimeout);
        }
        let start = Instant::now();
        Ok(Budget {
            start,
            deadline: cfg.timeout.map(|t| start + t),
            conflicts_left: cfg.conflicts,
            stop: cfg.stop.clone(),
            max_encoding_clauses: cfg.max_encoding_clauses,
            sat_calls: 0,
            conflicts: 0,
        })
    }

    fn build_limits(&self) -> BuildLimits {
        BuildLimits {
            max_clauses: self.max_encoding_clauses,
            deadline: self.deadline,
            stop: self.stop.clone(),
        }
    }

    fn call(&mut self, solver: &mut dyn SatBackend) -> SolveOutcome {
        let limits = Limits {
            deadline: self.deadline,
            max_conflicts: self.conflicts_left,
            stop: self.stop.clone(),
        };
        let before = solver.conflicts();
        self.sat_calls += 1;
        let out = solver.solve(&limits);
        let used = solver.conflicts() - before;
        self.conflicts += used;
        if let Some(left) = &mut self.conflicts_left {
            *left = left.saturating_sub(used);
        }
        out
    }
}

/// Best-model bookkeeping shared by both algorithms.
struct Tracker<'a, 'f> {
    relaxed: &'a RelaxedFormula<'f>,
    weight_m: &'a [Weight],
    best: Option<Model>,
    trace: Vec<TraceEntry>,
}

impl<'a, 'f> Tracker<'a, 'f> {
    fn new(relaxed: &'a RelaxedFormula<'f>, weight_m: &'a [Weight]) -> Self {
        Tracker {
            relaxed,
            weight_m,
            best: None,
            trace: Vec::new(),
        }
    }

    /// Evaluates a solver model on the original variables and records it if
    /// its true cost is a strict improvement. Returns the evaluated model.
    fn offer(&mut self, full: &Assignment, budget: &Budget, on_improve: &mut dyn FnMut(&Model)) -> Model {
        let f = self.relaxed.base;
        let assignment = full.truncated(f.num_vars() as usize);
        let true_cost = f.cost(&assignment).expect("solver models are total");
        let approx_cost = f
            .cost_with(&assignment, self.weight_m)
            .expect("solver models are total");
        let model = Model {
            assignment,
            true_cost,
            approx_cost,
        };
        if self.best.as_ref().is_none_or(|b| true_cost < b.true_cost) {
            self.best = Some(model.clone());
            self.trace.push(TraceEntry {
                elapsed: budget.start.elapsed(),
                cost: true_cost,
            });
            on_improve(&model);
        }
        model
    }

    fn stopped_status(&self) -> SearchStatus {
        if self.best.is_some() {
            SearchStatus::Satisfiable
        } else {
            SearchStatus::Unknown
        }
    }
}

fn fresh_solver(cfg: &SearchConfig, relaxed: &RelaxedFormula<'_>) -> Box<dyn SatBackend> {
    let mut s: Box<dyn SatBackend> = match &cfg.backend {
        BackendChoice::Bundled => Box::new(Solver::with_seed(relaxed.total_vars, cfg.seed)),
        BackendChoice::External { program, args } => {
            Box::new(ExternalSolver::new(program, args.clone(), relaxed.total_vars))
        }
    };
    for c in relaxed.clauses() {
        s.add_clause(&c);
    }
    s
}

fn report(
    tracker: Tracker<'_, '_>,
    status: SearchStatus,
    budget: &Budget,
    p: &Partition,
    approx_bound: Option<Weight>,
    frozen: Vec<Option<Weight>>,
) -> SearchReport {
    SearchReport {
        best: tracker.best,
        status,
        trace: tracker.trace,
        approx_bound,
        frozen,
        clusters: p.len(),
        sat_calls: budget.sat_calls,
        conflicts: budget.conflicts,
    }
}

fn scheme_for(f: &WcnfFormula, m: usize) -> (Partition, WeightScheme) {
    let m = if f.soft().is_empty() { 0 } else { m };
    partition(f, m).expect("m = 0 or soft clauses present")
}

/// Linear search SAT-UNSAT on the approximated weights.
///
/// # Errors
///
/// A zero timeout.
pub fn solve_apx_weight(
    f: &WcnfFormula,
    cfg: &SearchConfig,
    on_improve: &mut dyn FnMut(&Model),
) -> Result<SearchReport, SearchError> {
    let mut budget = Budget::new(cfg)?;
    let (p, scheme) = scheme_for(f, cfg.clusters.resolve(f));
    let relaxed = f.relax();
    let mut tracker = Tracker::new(&relaxed, &scheme.weight_m);
    let mut solver = fresh_solver(cfg, &relaxed);
    let mut gte: Option<GteState> = None;
    let mut mu: Option<Weight> = None;

    let status = loop {
        match budget.call(solver.as_mut()) {
            SolveOutcome::Unknown => break tracker.stopped_status(),
            SolveOutcome::Unsat if mu.is_none() => break SearchStatus::Unsatisfiable,
            SolveOutcome::Unsat => break SearchStatus::OptimumForApproximation,
            SolveOutcome::Sat(full) => {
                let model = tracker.offer(&full, &budget, on_improve);
                let bound = model.approx_cost;
                mu = Some(bound);
                if bound == 0 {
                    break SearchStatus::OptimumForApproximation;
                }
                let g = match &mut gte {
                    Some(g) => g,
                    None => {
                        let inputs = relaxed.weighted_relax_lits(&scheme.weight_m);
                        match GteState::build_limited(&inputs, bound, solver.as_mut(), &budget.build_limits()) {
                            Ok(g) => gte.insert(g),
                            Err(_) => break tracker.stopped_status(),
                        }
                    }
                };
                g.set_bound(bound - 1, solver.as_mut())
                    .expect("approximate cost strictly decreases");
            }
        }
    };
    Ok(report(tracker, status, &budget, &p, mu, vec![]))
}

/// Greedy per-cluster minimization with cardinality constraints.
///
/// # Errors
///
/// Zero clusters requested, or a zero timeout.
pub fn solve_apx_subprob(
    f: &WcnfFormula,
    cfg: &SearchConfig,
    on_improve: &mut dyn FnMut(&Model),
) -> Result<SearchReport, SearchError> {
    if cfg.clusters == ClusterCount::Fixed(0) {
        return Err(SearchError::ZeroClusters);
    }
    let mut budget = Budget::new(cfg)?;
    let (p, scheme) = scheme_for(f, cfg.clusters.resolve(f));
    let relaxed = f.relax();
    let mut tracker = Tracker::new(&relaxed, &scheme.weight_m);
    let mut solver = fresh_solver(cfg, &relaxed);

    let relax_lits = |c: &[usize]| -> Vec<Lit> { c.iter().map(|&i| relaxed.relax_of[i].pos_lit()).collect() };
    let rep_of = |ci: usize| scheme.weight_m[p.clusters[ci][0]];
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| rep_of(b).cmp(&rep_of(a)).then(a.cmp(&b)));

    let mut mu: Vec<Option<Weight>> = vec![None; p.len()];
    let mut saw_model = false;

    if p.is_empty() {
        let status = match budget.call(solver.as_mut()) {
            SolveOutcome::Sat(full) => {
                tracker.offer(&full, &budget, on_improve);
                SearchStatus::OptimumForApproximation
            }
            SolveOutcome::Unsat => SearchStatus::Unsatisfiable,
            SolveOutcome::Unknown => SearchStatus::Unknown,
        };
        return Ok(report(tracker, status, &budget, &p, None, mu));
    }

    for (pos, &ci) in order.iter().enumerate() {
        let cluster = &p.clusters[ci];
        let inputs = relax_lits(cluster);
        let mut tot: Option<TotalizerState> = None;
        loop {
            match budget.call(solver.as_mut()) {
                SolveOutcome::Unknown => {
                    let status = tracker.stopped_status();
                    return Ok(report(tracker, status, &budget, &p, None, mu));
                }
                SolveOutcome::Unsat if !saw_model => {
                    return Ok(report(tracker, SearchStatus::Unsatisfiable, &budget, &p, None, mu));
                }
                SolveOutcome::Unsat => break,
                SolveOutcome::Sat(full) => {
                    saw_model = true;
                    let model = tracker.offer(&full, &budget, on_improve);
                    let count = cluster
                        .iter()
                        .filter(|&&i| !f.soft()[i].clause.is_satisfied(&model.assignment))
                        .count() as Weight;
                    mu[ci] = Some(count);
                    // Σ r <= -1 is unsatisfiable by construction.
                    if count == 0 {
                        break;
                    }
                    let t = match &mut tot {
                        Some(t) => t,
                        None => {
                            match TotalizerState::build_limited(&inputs, count, solver.as_mut(), &budget.build_limits()) {
                                Ok(t) => tot.insert(t),
                                Err(_) => {
                                    let status = tracker.stopped_status();
                                    return Ok(report(tracker, status, &budget, &p, None, mu));
                                }
                            }
                        }
                    };
                    t.set_bound(count - 1, solver.as_mut())
                        .expect("cluster count strictly decreases");
                }
            }
        }

        if pos + 1 == order.len() {
            break;
        }
        solver = fresh_solver(cfg, &relaxed);
        let threshold = rep_of(ci);
        for cj in 0..p.len() {
            let Some(bound) = mu[cj] else { continue };
            if rep_of(cj) < threshold || bound >= p.clusters[cj].len() as Weight {
                continue;
            }
            let limits = budget.build_limits();
            match TotalizerState::build_limited(&relax_lits(&p.clusters[cj]), bound, solver.as_mut(), &limits) {
                Ok(mut t) => t.set_bound(bound, solver.as_mut()).expect("fresh totalizer"),
                Err(_) => {
                    let status = tracker.stopped_status();
                    return Ok(report(tracker, status, &budget, &p, None, mu));
                }
            }
        }
    }

    Ok(report(tracker, SearchStatus::OptimumForApproximation, &budget, &p, None, mu))
}
