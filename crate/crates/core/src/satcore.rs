//! # Incremental CDCL SAT Backend
//!
//! A conflict-driven clause-learning solver with:
//! - two-watched-literal propagation with blocker literals
//! - first-UIP conflict analysis with local clause minimization
//! - VSIDS-style activity branching and phase saving (default phase `false`)
//! - geometric restarts
//! - activity-based learned-clause deletion
//!
//! Clauses may be added between calls to [`SatBackend::solve`]; nothing is
//! ever retracted. Solving is budgeted by a wall-clock deadline, a conflict
//! count and a cooperative stop flag, all polled once per conflict.

use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::wcnf::{Assignment, Lit, Var};

/// Anything clauses can be emitted into.
pub trait ClauseSink {
    /// Allocates a fresh variable.
    fn new_var(&mut self) -> Var;
    fn add_clause(&mut self, lits: &[Lit]);
}

/// The `SAT(φ_W)` primitive: a clause database that only grows, plus budgeted solving.
pub trait SatBackend: ClauseSink {
    fn num_vars(&self) -> u32;
    fn solve(&mut self, limits: &Limits) -> SolveOutcome;
    /// Conflicts spent over the lifetime of this instance.
    fn conflicts(&self) -> u64 {
        0
    }
}

/// Result of one solver call.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveOutcome {
    /// A total assignment over every solver variable satisfying every added clause.
    Sat(Assignment),
    Unsat,
    /// A budget fired before an answer was found.
    Unknown,
}

/// Budget for a single solver call.
#[derive(Clone, Debug, Default)]
pub struct Limits {
    pub deadline: Option<Instant>,
    pub max_conflicts: Option<u64>,
    pub stop: Option<Arc<AtomicBool>>,
}

impl Limits {
    #[must_use]
    pub fn none() -> Self {
        Self::default()
    }

    #[must_use]
    pub fn with_deadline(deadline: Instant) -> Self {
        Limits {
            deadline: Some(deadline),
            ..Default::default()
        }
    }

    #[must_use]
    pub fn with_conflicts(n: u64) -> Self {
        Limits {
            max_conflicts: Some(n),
            ..Default::default()
        }
    }

    fn time_up(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
            || self.stop.as_ref().is_some_and(|s| s.load(Ordering::Relaxed))
    }

    fn exhausted(&self, conflicts: u64) -> bool {
        self.max_conflicts.is_some_and(|m| conflicts >= m) || self.time_up()
    }
}

/// Collects emitted clauses instead of solving them; used to dump encodings.
#[derive(Clone, Debug, Default)]
pub struct CnfBuffer {
    pub num_vars: u32,
    pub clauses: Vec<Vec<Lit>>,
}

impl CnfBuffer {
    #[must_use]
    pub fn new(num_vars: u32) -> Self {
        CnfBuffer {
            num_vars,
            clauses: Vec::new(),
        }
    }

    /// DIMACS CNF text of the collected clauses.
    #[must_use]
    pub fn to_dimacs(&self) -> String {
        let mut s = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            for l in c {
                s.push_str(&l.to_string());
                s.push(' ');
            }
            s.push_str("0\n");
        }
        s
    }
}

impl ClauseSink for CnfBuffer {
    fn new_var(&mut self) -> Var {
        self.num_vars += 1;
        Var::from_dimacs(self.num_vars)
    }

    fn add_clause(&mut self, lits: &[Lit]) {
        for l in lits {
            self.num_vars = self.num_vars.max(l.var().to_dimacs());
        }
        self.clauses.push(lits.to_vec());
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum LBool {
    True,
    False,
    Undef,
}

type ClauseRef = u32;

#[derive(Clone, Copy, Debug)]
struct Watcher {
    cref: ClauseRef,
    blocker: Lit,
}

#[derive(Debug)]
struct ClauseData {
    lits: Vec<Lit>,
    learnt: bool,
    deleted: bool,
    activity: f64,
}

/// Binary max-heap of variables keyed by activity.
#[derive(Debug, Default)]
struct VarOrder {
    heap: Vec<u32>,
    pos: Vec<usize>,
}

const NOT_IN_HEAP: usize = usize::MAX;

impl VarOrder {
    fn grow(&mut self) {
        self.pos.push(NOT_IN_HEAP);
    }

    fn contains(&self, v: u32) -> bool {
        self.pos[v as usize] != NOT_IN_HEAP
    }

    fn insert(&mut self, v: u32, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.pos[v as usize] = self.heap.len();
        self.heap.push(v);
        self.sift_up(self.heap.len() - 1, act);
    }

    fn increased(&mut self, v: u32, act: &[f64]) {
        if self.contains(v) {
            self.sift_up(self.pos[v as usize], act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<u32> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().expect("nonempty");
        self.pos[top as usize] = NOT_IN_HEAP;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last as usize] = 0;
            self.sift_down(0, act);
        }
        Some(top)
    }

    fn sift_up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            let p = self.heap[parent];
            if act[p as usize] >= act[v as usize] {
                break;
            }
            self.heap[i] = p;
            self.pos[p as usize] = i;
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i;
    }

    fn sift_down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        loop {
            let left = 2 * i + 1;
            if left >= self.heap.len() {
                break;
            }
            let right = left + 1;
            let child = if right < self.heap.len()
                && act[self.heap[right] as usize] > act[self.heap[left] as usize]
            {
                right
            } else {
                left
            };
            let c = self.heap[child];
            if act[c as usize] <= act[v as usize] {
                break;
            }
            self.heap[i] = c;
            self.pos[c as usize] = i;
            i = child;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i;
    }
}

const VAR_DECAY: f64 = 0.95;
const CLAUSE_DECAY: f64 = 0.999;
const RESTART_FIRST: u64 = 100;
const RESTART_FACTOR: f64 = 1.5;

/// The bundled CDCL solver.
#[derive(Debug)]
pub struct Solver {
    ok: bool,
    clauses: Vec<ClauseData>,
    learnts: Vec<ClauseRef>,
    n_problem: usize,
    watches: Vec<Vec<Watcher>>,
    assigns: Vec<LBool>,
    level: Vec<u32>,
    reason: Vec<Option<ClauseRef>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    cla_inc: f64,
    order: VarOrder,
    saved_phase: Vec<bool>,
    seen: Vec<bool>,
    max_learnts: f64,
    rng: ChaCha8Rng,
    conflicts: u64,
    decisions: u64,
    propagations: u64,
}

impl Solver {
    /// Creates a solver over `num_vars` variables with seed 0.
    #[must_use]
    pub fn new(num_vars: u32) -> Self {
        Self::with_seed(num_vars, 0)
    }

    /// Creates a solver whose branching tie-breaks are derived from `seed`.
    #[must_use]
    pub fn with_seed(num_vars: u32, seed: u64) -> Self {
        let mut s = Solver {
            ok: true,
            clauses: Vec::new(),
            learnts: Vec::new(),
            n_problem: 0,
            watches: Vec::new(),
            assigns: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: Vec::new(),
            var_inc: 1.0,
            cla_inc: 1.0,
            order: VarOrder::default(),
            saved_phase: Vec::new(),
            seen: Vec::new(),
            max_learnts: 0.0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            conflicts: 0,
            decisions: 0,
            propagations: 0,
        };
        s.ensure_vars(num_vars);
        s
    }

    #[must_use]
    pub fn decisions(&self) -> u64 {
        self.decisions
    }

    #[must_use]
    pub fn propagations(&self) -> u64 {
        self.propagations
    }

    /// Number of irredundant clauses stored (units and satisfied clauses excluded).
    #[must_use]
    pub fn num_clauses(&self) -> usize {
        self.n_problem
    }

    fn ensure_vars(&mut self, n: u32) {
        while (self.assigns.len() as u32) < n {
            let v = self.assigns.len() as u32;
            self.assigns.push(LBool::Undef);
            self.level.push(0);
            self.reason.push(None);
            // Tiny seeded jitter decides ties between untouched variables.
            self.activity.push(self.rng.random::<f64>() * 1e-5);
            self.saved_phase.push(false);
            self.seen.push(false);
            self.watches.push(Vec::new());
            self.watches.push(Vec::new());
            self.order.grow();
            self.order.insert(v, &self.activity);
        }
    }

    fn value(&self, l: Lit) -> LBool {
        lit_value(&self.assigns, l)
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, l: Lit, reason: Option<ClauseRef>) {
        let v = l.var().idx();
        debug_assert_eq!(self.assigns[v], LBool::Undef);
        self.assigns[v] = if l.is_negated() {
            LBool::False
        } else {
            LBool::True
        };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn attach(&mut self, lits: Vec<Lit>, learnt: bool) -> ClauseRef {
        let cref = self.clauses.len() as ClauseRef;
        self.watches[(!lits[0]).code()].push(Watcher {
            cref,
            blocker: lits[1],
        });
        self.watches[(!lits[1]).code()].push(Watcher {
            cref,
            blocker: lits[0],
        });
        self.clauses.push(ClauseData {
            lits,
            learnt,
            deleted: false,
            activity: 0.0,
        });
        if learnt {
            self.learnts.push(cref);
        } else {
            self.n_problem += 1;
        }
        cref
    }

    fn propagate(&mut self) -> Option<ClauseRef> {
        let mut conflict = None;
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.propagations += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[p.code()]);
            let (mut i, mut j) = (0, 0);
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if lit_value(&self.assigns, w.blocker) == LBool::True {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let cd = &mut self.clauses[w.cref as usize];
                if cd.deleted {
                    continue;
                }
                let c = &mut cd.lits;
                if c[0] == false_lit {
                    c.swap(0, 1);
                }
                let first = c[0];
                let kept = Watcher {
                    cref: w.cref,
                    blocker: first,
                };
                if first != w.blocker && lit_value(&self.assigns, first) == LBool::True {
                    ws[j] = kept;
                    j += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..c.len() {
                    if lit_value(&self.assigns, c[k]) != LBool::False {
                        c.swap(1, k);
                        self.watches[(!c[1]).code()].push(kept);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = kept;
                j += 1;
                if lit_value(&self.assigns, first) == LBool::False {
                    conflict = Some(w.cref);
                    self.qhead = self.trail.len();
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, Some(w.cref));
                }
            }
            ws.truncate(j);
            self.watches[p.code()] = ws;
            if conflict.is_some() {
                break;
            }
        }
        conflict
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.order.increased(v as u32, &self.activity);
    }

    fn bump_clause(&mut self, cref: ClauseRef) {
        let cd = &mut self.clauses[cref as usize];
        if !cd.learnt {
            return;
        }
        cd.activity += self.cla_inc;
        if cd.activity > 1e20 {
            for &l in &self.learnts {
                self.clauses[l as usize].activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    /// First-UIP analysis. Returns the learned clause (asserting literal first,
    /// highest remaining level second) and the backjump level.
    fn analyze(&mut self, mut confl: ClauseRef) -> (Vec<Lit>, u32) {
        let mut learnt: Vec<Lit> = vec![Lit::from_code(0)];
        let mut path = 0usize;
        let mut p: Option<Lit> = None;
        let mut index = self.trail.len();
        let dl = self.decision_level();

        loop {
            self.bump_clause(confl);
            let skip = usize::from(p.is_some());
            for k in skip..self.clauses[confl as usize].lits.len() {
                let q = self.clauses[confl as usize].lits[k];
                let v = q.var().idx();
                if !self.seen[v] && self.level[v] > 0 {
                    self.bump_var(v);
                    self.seen[v] = true;
                    if self.level[v] >= dl {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var().idx()] {
                    break;
                }
            }
            let lit = self.trail[index];
            self.seen[lit.var().idx()] = false;
            path -= 1;
            p = Some(lit);
            if path == 0 {
                break;
            }
            confl = self.reason[lit.var().idx()].expect("implied literal has a reason");
        }
        learnt[0] = !p.expect("at least one literal at the conflict level");

        // Drop literals implied by other literals of the clause.
        let mut out = vec![learnt[0]];
        for &l in &learnt[1..] {
            let redundant = self.reason[l.var().idx()].is_some_and(|r| {
                self.clauses[r as usize].lits[1..].iter().all(|q| {
                    let v = q.var().idx();
                    self.seen[v] || self.level[v] == 0
                })
            });
            if !redundant {
                out.push(l);
            }
        }
        for &l in &learnt[1..] {
            self.seen[l.var().idx()] = false;
        }

        let bt = if out.len() == 1 {
            0
        } else {
            let mut max_i = 1;
            for i in 2..out.len() {
                if self.level[out[i].var().idx()] > self.level[out[max_i].var().idx()] {
                    max_i = i;
                }
            }
            out.swap(1, max_i);
            self.level[out[1].var().idx()]
        };
        (out, bt)
    }

    fn cancel_until(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let lim = self.trail_lim[level as usize];
        for k in (lim..self.trail.len()).rev() {
            let l = self.trail[k];
            let v = l.var().idx();
            self.assigns[v] = LBool::Undef;
            self.reason[v] = None;
            self.saved_phase[v] = !l.is_negated();
            self.order.insert(v as u32, &self.activity);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(level as usize);
        self.qhead = lim;
    }

    fn locked(&self, cref: ClauseRef) -> bool {
        let c0 = self.clauses[cref as usize].lits[0];
        self.reason[c0.var().idx()] == Some(cref) && self.value(c0) == LBool::True
    }

    fn reduce_db(&mut self) {
        let mut learnts = std::mem::take(&mut self.learnts);
        learnts.sort_by(|&a, &b| {
            let (ca, cb) = (&self.clauses[a as usize], &self.clauses[b as usize]);
            (ca.lits.len() > 2)
                .cmp(&(cb.lits.len() > 2))
                .reverse()
                .then(ca.activity.total_cmp(&cb.activity))
        });
        let half = learnts.len() / 2;
        let mut kept = Vec::with_capacity(learnts.len());
        for (i, cref) in learnts.into_iter().enumerate() {
            let cd = &self.clauses[cref as usize];
            if i < half && cd.lits.len() > 2 && !self.locked(cref) {
                let cd = &mut self.clauses[cref as usize];
                cd.deleted = true;
                cd.lits = Vec::new();
            } else {
                kept.push(cref);
            }
        }
        self.learnts = kept;
        let clauses = &self.clauses;
        for ws in &mut self.watches {
            ws.retain(|w| !clauses[w.cref as usize].deleted);
        }
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.order.pop(&self.activity) {
            if self.assigns[v as usize] == LBool::Undef {
                return Some(Var::new(v).lit(!self.saved_phase[v as usize]));
            }
        }
        None
    }

    fn model(&self) -> Assignment {
        Assignment::new(self.assigns.iter().map(|&a| a == LBool::True).collect())
    }

    fn search(&mut self, limits: &Limits) -> SolveOutcome {
        let start_conflicts = self.conflicts;
        let mut restart_budget = RESTART_FIRST as f64;
        let mut since_restart = 0u64;
        if self.max_learnts == 0.0 {
            self.max_learnts = (self.n_problem as f64 / 3.0).max(1000.0);
        }

        loop {
            if let Some(confl) = self.propagate() {
                self.conflicts += 1;
                since_restart += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return SolveOutcome::Unsat;
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let first = learnt[0];
                    let cref = self.attach(learnt, true);
                    self.bump_clause(cref);
                    self.enqueue(first, Some(cref));
                }
                self.var_inc /= VAR_DECAY;
                self.cla_inc /= CLAUSE_DECAY;
                if limits.exhausted(self.conflicts - start_conflicts) {
                    self.cancel_until(0);
                    return SolveOutcome::Unknown;
                }
            } else {
                if since_restart as f64 >= restart_budget {
                    since_restart = 0;
                    restart_budget *= RESTART_FACTOR;
                    self.max_learnts *= 1.1;
                    self.cancel_until(0);
                    continue;
                }
                if self.learnts.len() as f64 >= self.max_learnts + self.trail.len() as f64 {
                    self.reduce_db();
                }
                self.decisions += 1;
                if self.decisions.is_multiple_of(1024) && limits.time_up() {
                    self.cancel_until(0);
                    return SolveOutcome::Unknown;
                }
                let Some(d) = self.pick_branch() else {
                    let m = self.model();
                    self.cancel_until(0);
                    return SolveOutcome::Sat(m);
                };
                self.trail_lim.push(self.trail.len());
                self.enqueue(d, None);
            }
        }
    }
}

fn lit_value(assigns: &[LBool], l: Lit) -> LBool {
    match assigns[l.var().idx()] {
        LBool::Undef => LBool::Undef,
        LBool::True if l.is_negated() => LBool::False,
        LBool::False if l.is_negated() => LBool::True,
        v => v,
    }
}

impl ClauseSink for Solver {
    fn new_var(&mut self) -> Var {
        let v = Var::new(self.assigns.len() as u32);
        self.ensure_vars(self.assigns.len() as u32 + 1);
        v
    }

    fn add_clause(&mut self, lits: &[Lit]) {
        if !self.ok {
            return;
        }
        debug_assert_eq!(self.decision_level(), 0);
        if let Some(m) = lits.iter().map(|l| l.var().to_dimacs()).max() {
            self.ensure_vars(m);
        }
        let mut c = lits.to_vec();
        c.sort_unstable();
        c.dedup();
        let mut out = Vec::with_capacity(c.len());
        for (i, &l) in c.iter().enumerate() {
            if self.value(l) == LBool::True || (i + 1 < c.len() && c[i + 1] == !l) {
                return;
            }
            if self.value(l) != LBool::False {
                out.push(l);
            }
        }
        match out.len() {
            0 => self.ok = false,
            1 => {
                self.enqueue(out[0], None);
                if self.propagate().is_some() {
                    self.ok = false;
                }
            }
            _ => {
                self.attach(out, false);
            }
        }
    }
}

impl SatBackend for Solver {
    fn num_vars(&self) -> u32 {
        self.assigns.len() as u32
    }

    fn solve(&mut self, limits: &Limits) -> SolveOutcome {
        if !self.ok {
            return SolveOutcome::Unsat;
        }
        if limits.exhausted(0) {
            return SolveOutcome::Unknown;
        }
        if self.propagate().is_some() {
            self.ok = false;
            return SolveOutcome::Unsat;
        }
        self.search(limits)
    }

    fn conflicts(&self) -> u64 {
        self.conflicts
    }
}

/// Runs an external DIMACS solver as a child process for every call.
///
/// The full clause database is written to the child's stdin; `s` and `v`
/// lines are read back from its stdout. The child is killed when the
/// deadline or the stop flag fires.
#[derive(Debug, Clone)]
pub struct ExternalSolver {
    program: PathBuf,
    args: Vec<String>,
    num_vars: u32,
    clauses: Vec<Vec<Lit>>,
}

impl ExternalSolver {
    #[must_use]
    pub fn new(program: impl Into<PathBuf>, args: Vec<String>, num_vars: u32) -> Self {
        ExternalSolver {
            program: program.into(),
            args,
            num_vars,
            clauses: Vec::new(),
        }
    }

    fn dimacs(&self) -> String {
        let buf = CnfBuffer {
            num_vars: self.num_vars,
            clauses: self.clauses.clone(),
        };
        buf.to_dimacs()
    }

    fn parse_output(&self, out: &str) -> SolveOutcome {
        let mut status = None;
        let mut lits = Vec::new();
        for line in out.lines() {
            let line = line.trim();
            if let Some(s) = line.strip_prefix("s ") {
                status = Some(s.trim().to_string());
            } else if let Some(v) = line.strip_prefix("v ").or(line.strip_prefix("v")) {
                lits.extend(v.split_whitespace().filter_map(|t| t.parse::<i32>().ok()));
            }
        }
        match status.as_deref() {
            Some("SATISFIABLE") => {
                lits.retain(|&l| l != 0 && l.unsigned_abs() <= self.num_vars);
                let model = Assignment::from_dimacs(self.num_vars, &lits);
                let sound = self
                    .clauses
                    .iter()
                    .all(|c| c.iter().any(|&l| model.lit_value(l)));
                if sound {
                    SolveOutcome::Sat(model)
                } else {
                    SolveOutcome::Unknown
                }
            }
            Some("UNSATISFIABLE") => SolveOutcome::Unsat,
            _ => SolveOutcome::Unknown,
        }
    }
}

impl ClauseSink for ExternalSolver {
    fn new_var(&mut self) -> Var {
        self.num_vars += 1;
        Var::from_dimacs(self.num_vars)
    }

    fn add_clause(&mut self, lits: &[Lit]) {
        for l in lits {
            self.num_vars = self.num_vars.max(l.var().to_dimacs());
        }
        self.clauses.push(lits.to_vec());
    }
}

impl SatBackend for ExternalSolver {
    fn num_vars(&self) -> u32 {
        self.num_vars
    }

    fn solve(&mut self, limits: &Limits) -> SolveOutcome {
        if limits.time_up() {
            return SolveOutcome::Unknown;
        }
        let Ok(mut child) = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
        else {
            return SolveOutcome::Unknown;
        };
        let input = self.dimacs();
        let mut stdin = child.stdin.take().expect("piped stdin");
        let writer = std::thread::spawn(move || {
            // The child may exit without reading everything.
            let _ = stdin.write_all(input.as_bytes());
        });
        let stdout = child.stdout.take().expect("piped stdout");
        let reader = std::thread::spawn(move || {
            let mut out = String::new();
            for line in BufReader::new(stdout).lines().map_while(Result::ok) {
                out.push_str(&line);
                out.push('\n');
            }
            out
        });
        loop {
            match child.try_wait() {
                Ok(Some(_)) => break,
                Ok(None) if limits.time_up() => {
                    let _ = child.kill();
                    let _ = child.wait();
                    let _ = writer.join();
                    let _ = reader.join();
                    return SolveOutcome::Unknown;
                }
                Ok(None) => std::thread::sleep(Duration::from_millis(2)),
                Err(_) => return SolveOutcome::Unknown,
            }
        }
        let _ = writer.join();
        let out = reader.join().unwrap_or_default();
        self.parse_output(&out)
    }
}
