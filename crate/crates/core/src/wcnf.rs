//! # Weighted Partial MaxSAT Formulas
//!
//! Literals, clauses and weighted formulas, together with the old-style
//! WDIMACS reader/writer used by the MaxSAT Evaluation 2017 benchmarks,
//! soft-clause relaxation and cost evaluation.

use std::fmt;
use std::io::{self, BufRead, Write};
use std::ops::Not;

use thiserror::Error;

/// Soft-clause weight. Sums of all soft weights must fit; this is checked at load.
pub type Weight = u64;

/// A Boolean variable, stored as a 0-based index and shown 1-based (DIMACS style).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

impl Var {
    /// Largest DIMACS variable id accepted anywhere in the crate.
    pub const MAX_ID: u32 = (u32::MAX >> 1) - 1;

    /// Creates a variable from its 0-based index.
    #[must_use]
    pub const fn new(idx: u32) -> Self {
        Var(idx)
    }

    /// Creates a variable from a 1-based DIMACS id.
    ///
    /// # Panics
    ///
    /// If `id` is 0 or larger than [`Var::MAX_ID`].
    #[must_use]
    pub fn from_dimacs(id: u32) -> Self {
        assert!((1..=Self::MAX_ID).contains(&id), "invalid variable id {id}");
        Var(id - 1)
    }

    #[must_use]
    pub const fn idx(self) -> usize {
        self.0 as usize
    }

    #[must_use]
    pub const fn to_dimacs(self) -> u32 {
        self.0 + 1
    }

    #[must_use]
    pub const fn pos_lit(self) -> Lit {
        Lit(self.0 << 1)
    }

    #[must_use]
    pub const fn neg_lit(self) -> Lit {
        Lit((self.0 << 1) | 1)
    }

    #[must_use]
    pub const fn lit(self, negated: bool) -> Lit {
        Lit((self.0 << 1) | negated as u32)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.to_dimacs())
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A literal: a variable or its negation.
///
/// Encoded as `2 * var_index + negated`, so a literal and its negation share
/// everything but the lowest bit.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    #[must_use]
    pub const fn new(var: Var, negated: bool) -> Self {
        var.lit(negated)
    }

    /// Converts a nonzero signed DIMACS literal.
    ///
    /// # Panics
    ///
    /// If `lit` is 0 or its magnitude exceeds [`Var::MAX_ID`].
    #[must_use]
    pub fn from_dimacs(lit: i32) -> Self {
        Var::from_dimacs(lit.unsigned_abs()).lit(lit < 0)
    }

    #[must_use]
    pub const fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    #[must_use]
    pub const fn is_negated(self) -> bool {
        self.0 & 1 == 1
    }

    /// Dense index usable for per-literal tables (watch lists and the like).
    #[must_use]
    pub const fn code(self) -> usize {
        self.0 as usize
    }

    #[must_use]
    pub const fn from_code(code: usize) -> Self {
        Lit(code as u32)
    }

    #[must_use]
    pub fn to_dimacs(self) -> i64 {
        let v = i64::from(self.var().to_dimacs());
        if self.is_negated() {
            -v
        } else {
            v
        }
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_negated() {
            write!(f, "~{:?}", self.var())
        } else {
            write!(f, "{:?}", self.var())
        }
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A disjunction of literals with duplicates removed (first occurrence kept).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Clause {
    lits: Vec<Lit>,
    tautology: bool,
}

impl Clause {
    /// Normalizes `lits` into a clause.
    ///
    /// # Panics
    ///
    /// If `lits` is empty.
    #[must_use]
    pub fn new(lits: impl IntoIterator<Item = Lit>) -> Self {
        let mut out: Vec<Lit> = Vec::new();
        for l in lits {
            if !out.contains(&l) {
                out.push(l);
            }
        }
        assert!(!out.is_empty(), "clauses must be nonempty");
        let tautology = out.iter().any(|&l| out.contains(&!l));
        Clause { lits: out, tautology }
    }

    /// Builds a clause from signed DIMACS literals.
    #[must_use]
    pub fn from_dimacs(lits: &[i32]) -> Self {
        Self::new(lits.iter().map(|&l| Lit::from_dimacs(l)))
    }

    #[must_use]
    pub fn lits(&self) -> &[Lit] {
        &self.lits
    }

    #[must_use]
    pub fn len(&self) -> usize {
        self.lits.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    /// True when the clause contains some `x` together with `~x`.
    #[must_use]
    pub fn is_tautology(&self) -> bool {
        self.tautology
    }

    #[must_use]
    pub fn max_var(&self) -> Var {
        self.lits.iter().map(|l| l.var()).max().expect("nonempty")
    }

    /// Evaluates the clause. The assignment must cover every variable of the clause.
    #[must_use]
    pub fn is_satisfied(&self, assignment: &Assignment) -> bool {
        self.tautology || self.lits.iter().any(|&l| assignment.lit_value(l))
    }
}

/// A soft clause and its weight.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SoftClause {
    pub clause: Clause,
    pub weight: Weight,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum WcnfError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: the `h`-prefixed WCNF format is not supported; expected old-style WDIMACS with a `p wcnf` header")]
    NewFormat { line: usize },
    #[error("total soft weight overflows 64 bits")]
    WeightOverflow,
    #[error("assignment covers {got} variables but the formula has {need}")]
    PartialAssignment { got: usize, need: usize },
    #[error(transparent)]
    Io(#[from] IoError),
}

/// Cloneable wrapper for I/O failures during parsing.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
#[error("{0}")]
pub struct IoError(pub String);

impl From<io::Error> for WcnfError {
    fn from(e: io::Error) -> Self {
        WcnfError::Io(IoError(e.to_string()))
    }
}

/// A weighted partial MaxSAT instance: hard clauses plus weighted soft clauses.
///
/// Soft-clause order is the input order and doubles as the clause identity.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct WcnfFormula {
    num_vars: u32,
    hard: Vec<Clause>,
    soft: Vec<SoftClause>,
    total_soft: Weight,
}

impl WcnfFormula {
    #[must_use]
    pub fn new(num_vars: u32) -> Self {
        WcnfFormula {
            num_vars,
            ..Default::default()
        }
    }

    #[must_use]
    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    #[must_use]
    pub fn hard(&self) -> &[Clause] {
        &self.hard
    }

    #[must_use]
    pub fn soft(&self) -> &[SoftClause] {
        &self.soft
    }

    /// Iterates over the soft weights in clause order.
    pub fn weights(&self) -> impl ExactSizeIterator<Item = Weight> + '_ {
        self.soft.iter().map(|s| s.weight)
    }

    /// Sum of all soft weights.
    #[must_use]
    pub fn total_soft_weight(&self) -> Weight {
        self.total_soft
    }

    fn grow(&mut self, clause: &Clause) {
        self.num_vars = self.num_vars.max(clause.max_var().to_dimacs());
    }

    pub fn add_hard(&mut self, clause: Clause) {
        self.grow(&clause);
        self.hard.push(clause);
    }

    /// Adds a soft clause.
    ///
    /// # Errors
    ///
    /// [`WcnfError::WeightOverflow`] if the total soft weight would overflow.
    ///
    /// # Panics
    ///
    /// If `weight` is 0.
    pub fn add_soft(&mut self, clause: Clause, weight: Weight) -> Result<(), WcnfError> {
        assert!(weight >= 1, "soft weights must be positive");
        self.total_soft = self
            .total_soft
            .checked_add(weight)
            .ok_or(WcnfError::WeightOverflow)?;
        self.grow(&clause);
        self.soft.push(SoftClause { clause, weight });
        Ok(())
    }

    /// Copy of this formula with soft weights replaced by `weights` (same order).
    ///
    /// # Errors
    ///
    /// [`WcnfError::WeightOverflow`] if the new weights overflow.
    pub fn reweighted(&self, weights: &[Weight]) -> Result<Self, WcnfError> {
        assert_eq!(weights.len(), self.soft.len());
        let mut out = WcnfFormula::new(self.num_vars);
        out.hard = self.hard.clone();
        for (s, &w) in self.soft.iter().zip(weights) {
            out.add_soft(s.clause.clone(), w)?;
        }
        Ok(out)
    }

    fn check_total(&self, assignment: &Assignment) -> Result<(), WcnfError> {
        if assignment.len() < self.num_vars as usize {
            return Err(WcnfError::PartialAssignment {
                got: assignment.len(),
                need: self.num_vars as usize,
            });
        }
        Ok(())
    }

    /// Sum of weights of soft clauses left unsatisfied by `assignment`.
    ///
    /// # Errors
    ///
    /// [`WcnfError::PartialAssignment`] if the assignment does not cover all variables.
    pub fn cost(&self, assignment: &Assignment) -> Result<Weight, WcnfError> {
        self.check_total(assignment)?;
        Ok(self.cost_unchecked(assignment, self.soft.iter().map(|s| s.weight)))
    }

    /// Like [`WcnfFormula::cost`] but with a substitute weight per soft clause.
    ///
    /// # Errors
    ///
    /// [`WcnfError::PartialAssignment`] as for [`WcnfFormula::cost`].
    pub fn cost_with(&self, assignment: &Assignment, weights: &[Weight]) -> Result<Weight, WcnfError> {
        assert_eq!(weights.len(), self.soft.len());
        self.check_total(assignment)?;
        Ok(self.cost_unchecked(assignment, weights.iter().copied()))
    }

    fn cost_unchecked(&self, assignment: &Assignment, weights: impl Iterator<Item = Weight>) -> Weight {
        // Weights never sum past `total_soft`, which fits by construction.
        self.soft
            .iter()
            .zip(weights)
            .filter(|(s, _)| !s.clause.is_satisfied(assignment))
            .map(|(_, w)| w)
            .sum()
    }

    /// Validates a model against the hard clauses and reports its cost.
    ///
    /// # Errors
    ///
    /// [`WcnfError::PartialAssignment`] as for [`WcnfFormula::cost`].
    pub fn check_model(&self, assignment: &Assignment) -> Result<ModelCheck, WcnfError> {
        self.check_total(assignment)?;
        if let Some(idx) = self.hard.iter().position(|c| !c.is_satisfied(assignment)) {
            return Ok(ModelCheck::ViolatesHard(idx));
        }
        Ok(ModelCheck::Valid(self.cost_unchecked(
            assignment,
            self.soft.iter().map(|s| s.weight),
        )))
    }

    /// Relaxes every soft clause with a fresh variable.
    #[must_use]
    pub fn relax(&self) -> RelaxedFormula<'_> {
        let relax_of = (0..self.soft.len())
            .map(|i| Var::new(self.num_vars + i as u32))
            .collect::<Vec<_>>();
        RelaxedFormula {
            base: self,
            total_vars: self.num_vars + relax_of.len() as u32,
            relax_of,
        }
    }

    /// Writes the canonical WDIMACS form: header, hard clauses, then soft clauses.
    ///
    /// # Errors
    ///
    /// I/O errors from `out`.
    pub fn write_wcnf<W: Write>(&self, mut out: W) -> io::Result<()> {
        // Every soft weight is at most the total, so total + 1 is a valid top.
        let top = self.total_soft.saturating_add(1);
        writeln!(
            out,
            "p wcnf {} {} {}",
            self.num_vars,
            self.hard.len() + self.soft.len(),
            top
        )?;
        let write_clause = |out: &mut W, w: Weight, c: &Clause| -> io::Result<()> {
            write!(out, "{w}")?;
            for l in c.lits() {
                write!(out, " {l}")?;
            }
            writeln!(out, " 0")
        };
        for c in &self.hard {
            write_clause(&mut out, top, c)?;
        }
        for s in &self.soft {
            write_clause(&mut out, s.weight, &s.clause)?;
        }
        Ok(())
    }

    #[must_use]
    pub fn to_wcnf_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_wcnf(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("ascii output")
    }
}

/// Outcome of [`WcnfFormula::check_model`].
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ModelCheck {
    Valid(Weight),
    /// Index of the first violated hard clause.
    ViolatesHard(usize),
}

/// A formula with every soft clause relaxed: `ω_i ∨ r_i` with fresh `r_i`.
#[derive(Clone, Debug)]
pub struct RelaxedFormula<'f> {
    pub base: &'f WcnfFormula,
    /// Relaxation variable of soft clause `i`, fresh and in soft-clause order.
    pub relax_of: Vec<Var>,
    pub total_vars: u32,
}

impl RelaxedFormula<'_> {
    /// All clauses of the relaxed formula: hard clauses, then relaxed soft clauses.
    pub fn clauses(&self) -> impl Iterator<Item = Vec<Lit>> + '_ {
        let hard = self.base.hard.iter().map(|c| c.lits().to_vec());
        let soft = self.base.soft.iter().zip(&self.relax_of).map(|(s, r)| {
            let mut lits = s.clause.lits().to_vec();
            lits.push(r.pos_lit());
            lits
        });
        hard.chain(soft)
    }

    /// Relaxation variables paired with a per-soft-clause cost.
    #[must_use]
    pub fn weighted_relax_lits(&self, costs: &[Weight]) -> Vec<(Lit, Weight)> {
        assert_eq!(costs.len(), self.relax_of.len());
        self.relax_of
            .iter()
            .zip(costs)
            .map(|(r, &w)| (r.pos_lit(), w))
            .collect()
    }

    /// Extends an assignment of the original variables: each relaxation
    /// variable is true exactly when its soft clause is unsatisfied.
    #[must_use]
    pub fn minimal_extension(&self, assignment: &Assignment) -> Assignment {
        let mut values: Vec<bool> = assignment.values()[..self.base.num_vars as usize].to_vec();
        values.extend(
            self.base
                .soft
                .iter()
                .map(|s| !s.clause.is_satisfied(assignment)),
        );
        Assignment::new(values)
    }
}

/// A truth assignment indexed by variable.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Assignment {
    values: Vec<bool>,
}

impl Assignment {
    #[must_use]
    pub fn new(values: Vec<bool>) -> Self {
        Assignment { values }
    }

    /// Builds an assignment from signed DIMACS literals over `num_vars`
    /// variables. Variables not mentioned are false.
    #[must_use]
    pub fn from_dimacs(num_vars: u32, lits: &[i32]) -> Self {
        let mut values = vec![false; num_vars as usize];
        for &l in lits {
            let lit = Lit::from_dimacs(l);
            if lit.var().idx() >= values.len() {
                values.resize(lit.var().idx() + 1, false);
            }
            values[lit.var().idx()] = !lit.is_negated();
        }
        Assignment { values }
    }

    #[must_use]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[must_use]
    pub fn values(&self) -> &[bool] {
        &self.values
    }

    #[must_use]
    pub fn value(&self, var: Var) -> Option<bool> {
        self.values.get(var.idx()).copied()
    }

    /// Value of `lit`.
    ///
    /// # Panics
    ///
    /// If the variable is not covered.
    #[must_use]
    pub fn lit_value(&self, lit: Lit) -> bool {
        self.values[lit.var().idx()] != lit.is_negated()
    }

    /// Copy restricted to the first `n` variables.
    #[must_use]
    pub fn truncated(&self, n: usize) -> Assignment {
        Assignment::new(self.values[..n.min(self.values.len())].to_vec())
    }

    /// Signed literals for all covered variables, e.g. `-1 2`.
    #[must_use]
    pub fn to_dimacs_line(&self) -> String {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let id = i as i64 + 1;
                if v { id } else { -id }.to_string()
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// A cost that may be infinite (the cost of having no model at all).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub enum Cost {
    Finite(Weight),
    Infinite,
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cost::Finite(c) => write!(f, "{c}"),
            Cost::Infinite => write!(f, "inf"),
        }
    }
}

/// An assignment to the original variables with its true and approximate cost.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Model {
    pub assignment: Assignment,
    pub true_cost: Weight,
    pub approx_cost: Weight,
}

impl Model {
    #[must_use]
    pub fn cost(model: Option<&Model>) -> Cost {
        model.map_or(Cost::Infinite, |m| Cost::Finite(m.true_cost))
    }
}

/// Parses old-style WDIMACS, discarding warnings.
///
/// # Errors
///
/// See [`parse_wcnf_with_warnings`].
pub fn parse_wcnf<R: BufRead>(input: R) -> Result<WcnfFormula, WcnfError> {
    parse_wcnf_with_warnings(input).map(|(f, _)| f)
}

/// Parses old-style WDIMACS (`p wcnf <vars> <clauses> [<top>]`, one clause per line).
///
/// Clauses weighted `top` are hard. Without a `top` every clause is soft.
/// A clause-count mismatch or variables beyond the header are reported as
/// warnings; the variable count grows to fit.
///
/// # Errors
///
/// Malformed header, non-integer tokens, nonpositive weights, weights above
/// `top`, a `0` before the end of a clause line, a missing terminating `0`,
/// empty clauses, the `h`-prefixed format, or total soft weight overflow.
pub fn parse_wcnf_with_warnings<R: BufRead>(
    input: R,
) -> Result<(WcnfFormula, Vec<String>), WcnfError> {
    let mut header: Option<(u32, usize, Option<Weight>)> = None;
    let mut formula = WcnfFormula::new(0);
    let mut warnings = Vec::new();
    let mut n_clauses = 0usize;
    let mut grew = false;

    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let line_no = lineno + 1;
        let err = |msg: String| WcnfError::Parse { line: line_no, msg };
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(err("duplicate header".into()));
            }
            header = Some(parse_header(trimmed).map_err(err)?);
            formula.num_vars = header.unwrap().0;
            continue;
        }
        let Some((_, _, top)) = header else {
            if trimmed.starts_with('h') {
                return Err(WcnfError::NewFormat { line: line_no });
            }
            return Err(err("clause before `p wcnf` header".into()));
        };

        let mut tokens = trimmed.split_whitespace();
        let weight_tok = tokens.next().expect("nonempty line");
        let weight: i128 = weight_tok
            .parse()
            .map_err(|_| err(format!("invalid weight `{weight_tok}`")))?;
        if weight <= 0 {
            return Err(err(format!("weight must be positive, got {weight}")));
        }
        let weight = Weight::try_from(weight).map_err(|_| err("weight too large".into()))?;
        if let Some(top) = top {
            if weight > top {
                return Err(err(format!("weight {weight} exceeds top {top}")));
            }
        }

        let mut lits = Vec::new();
        let mut terminated = false;
        for tok in tokens {
            if terminated {
                return Err(err("literal 0 before end of clause".into()));
            }
            let lit: i64 = tok
                .parse()
                .map_err(|_| err(format!("invalid literal `{tok}`")))?;
            if lit == 0 {
                terminated = true;
                continue;
            }
            if lit.unsigned_abs() > u64::from(Var::MAX_ID) {
                return Err(err(format!("variable {} out of range", lit.unsigned_abs())));
            }
            lits.push(Lit::from_dimacs(lit as i32));
        }
        if !terminated {
            return Err(err("clause not terminated by 0".into()));
        }
        if lits.is_empty() {
            return Err(err("empty clause".into()));
        }
        let clause = Clause::new(lits);
        if clause.max_var().to_dimacs() > formula.num_vars && !grew {
            grew = true;
            warnings.push(format!(
                "line {line_no}: variable {} exceeds header count {}; growing",
                clause.max_var(),
                formula.num_vars
            ));
        }
        n_clauses += 1;
        if Some(weight) == top {
            formula.add_hard(clause);
        } else {
            formula.add_soft(clause, weight)?;
        }
    }

    let Some((_, declared, _)) = header else {
        return Err(WcnfError::Parse {
            line: 0,
            msg: "missing `p wcnf` header".into(),
        });
    };
    if declared != n_clauses {
        warnings.push(format!(
            "header declares {declared} clauses but {n_clauses} were read"
        ));
    }
    Ok((formula, warnings))
}

fn parse_header(line: &str) -> Result<(u32, usize, Option<Weight>), String> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    if toks.len() < 4 || toks.len() > 5 || toks[0] != "p" || toks[1] != "wcnf" {
        return Err(format!("malformed header `{line}`"));
    }
    let num_vars: u32 = toks[2]
        .parse()
        .map_err(|_| format!("invalid variable count `{}`", toks[2]))?;
    if num_vars > Var::MAX_ID {
        return Err(format!("variable count {num_vars} out of range"));
    }
    let n_clauses: usize = toks[3]
        .parse()
        .map_err(|_| format!("invalid clause count `{}`", toks[3]))?;
    let top = match toks.get(4) {
        Some(t) => Some(
            t.parse::<Weight>()
                .ok()
                .filter(|&t| t >= 1)
                .ok_or_else(|| format!("invalid top weight `{t}`"))?,
        ),
        None => None,
    };
    Ok((num_vars, n_clauses, top))
}
