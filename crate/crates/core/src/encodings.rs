//! # Totalizer and Generalized Totalizer Encodings
//!
//! Both encodings are trees of merge nodes over the inputs (balanced, in
//! input order). Each node carries one output literal per distinct reachable
//! sum, and only the "upward" clauses are emitted: an output is forced true
//! whenever its children reach that sum. Upper bounds are then enforced by
//! unit clauses on the root outputs, which lets a bound be tightened
//! incrementally without touching the rest of the encoding.
//!
//! Sums above the encoding's cap collapse into a single overflow output per
//! node, so node size is bounded by the number of distinct sums up to the cap
//! rather than by the magnitude of the weights.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Instant;

use thiserror::Error;

use crate::satcore::ClauseSink;
use crate::wcnf::{Lit, Var, Weight};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum EncodingError {
    #[error("cannot encode a constraint over no inputs")]
    EmptyInputs,
    #[error("input weights must be positive")]
    ZeroWeight,
    #[error("input literals must be distinct")]
    DuplicateInput,
    #[error("bound {requested} does not tighten the current bound {current}")]
    NotTightening { current: Weight, requested: Weight },
    #[error("bound {requested} is above the encoded cap {cap}")]
    OutOfRange { cap: Weight, requested: Weight },
    #[error("encoding needs more than {limit} clauses")]
    TooLarge { limit: usize },
    #[error("encoding interrupted by deadline or stop request")]
    Interrupted,
}

/// Work limits for building an encoding.
///
/// A build cut short leaves the clauses emitted so far in the sink. They only
/// define fresh auxiliary variables from the inputs, so they never constrain
/// the inputs themselves.
#[derive(Clone, Debug, Default)]
pub struct BuildLimits {
    pub max_clauses: Option<usize>,
    pub deadline: Option<Instant>,
    pub stop: Option<Arc<AtomicBool>>,
}

impl BuildLimits {
    #[must_use]
    pub fn none() -> Self {
        Self::default()
    }

    fn interrupted(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
            || self.stop.as_ref().is_some_and(|s| s.load(Ordering::Relaxed))
    }
}

/// Pair iterations between interrupt checks.
const CHECK_EVERY: usize = 1 << 14;

#[derive(Clone, Debug)]
struct Node {
    /// Ascending sums with their output literals; all sums are `<= cap`.
    outputs: Vec<(Weight, Lit)>,
    /// True whenever the node's sum exceeds the cap.
    overflow: Option<Lit>,
}

/// Shared tree construction for both encodings.
#[derive(Clone, Debug)]
struct Tree {
    root: Node,
    aux: Vec<Var>,
    n_clauses: usize,
}

impl Tree {
    fn build<S: ClauseSink + ?Sized>(
        inputs: &[(Lit, Weight)],
        cap: Weight,
        sink: &mut S,
        limits: &BuildLimits,
    ) -> Result<Tree, EncodingError> {
        if inputs.is_empty() {
            return Err(EncodingError::EmptyInputs);
        }
        if inputs.iter().any(|&(_, w)| w == 0) {
            return Err(EncodingError::ZeroWeight);
        }
        let distinct: BTreeSet<Lit> = inputs.iter().map(|&(l, _)| l).collect();
        if distinct.len() != inputs.len() {
            return Err(EncodingError::DuplicateInput);
        }
        let mut tree = Tree {
            root: Node {
                outputs: Vec::new(),
                overflow: None,
            },
            aux: Vec::new(),
            n_clauses: 0,
        };
        tree.root = tree.subtree(inputs, cap, sink, limits)?;
        Ok(tree)
    }

    fn subtree<S: ClauseSink + ?Sized>(
        &mut self,
        inputs: &[(Lit, Weight)],
        cap: Weight,
        sink: &mut S,
        limits: &BuildLimits,
    ) -> Result<Node, EncodingError> {
        if let [(lit, w)] = inputs {
            return Ok(if *w > cap {
                Node {
                    outputs: Vec::new(),
                    overflow: Some(*lit),
                }
            } else {
                Node {
                    outputs: vec![(*w, *lit)],
                    overflow: None,
                }
            });
        }
        let mid = inputs.len() / 2;
        let left = self.subtree(&inputs[..mid], cap, sink, limits)?;
        let right = self.subtree(&inputs[mid..], cap, sink, limits)?;
        self.merge(&left, &right, cap, sink, limits)
    }

    fn merge<S: ClauseSink + ?Sized>(
        &mut self,
        a: &Node,
        b: &Node,
        cap: Weight,
        sink: &mut S,
        limits: &BuildLimits,
    ) -> Result<Node, EncodingError> {
        // `None` sum stands for overflow, `None` literal for the empty (zero) term.
        let terms = |n: &Node| {
            let mut t: Vec<(Option<Weight>, Option<Lit>)> = vec![(Some(0), None)];
            t.extend(n.outputs.iter().map(|&(s, l)| (Some(s), Some(l))));
            t.extend(n.overflow.map(|l| (None, Some(l))));
            t
        };
        let (ta, tb) = (terms(a), terms(b));
        let n_new = ta.len() * tb.len() - 1;
        if let Some(limit) = limits.max_clauses {
            if self.n_clauses.saturating_add(n_new) > limit {
                return Err(EncodingError::TooLarge { limit });
            }
        }
        let mut steps = 0usize;
        let mut tick = || {
            steps += 1;
            if steps.is_multiple_of(CHECK_EVERY) && limits.interrupted() {
                Err(EncodingError::Interrupted)
            } else {
                Ok(())
            }
        };
        let combine = |sa: Option<Weight>, sb: Option<Weight>| match (sa, sb) {
            (Some(x), Some(y)) => x.checked_add(y).filter(|&s| s <= cap),
            _ => None,
        };

        let mut sums = BTreeSet::new();
        let mut overflows = false;
        for &(sa, la) in &ta {
            for &(sb, lb) in &tb {
                if la.is_none() && lb.is_none() {
                    continue;
                }
                tick()?;
                match combine(sa, sb) {
                    Some(s) => {
                        sums.insert(s);
                    }
                    None => overflows = true,
                }
            }
        }
        let mut outputs = Vec::with_capacity(sums.len());
        for s in sums {
            let v = sink.new_var();
            self.aux.push(v);
            outputs.push((s, v.pos_lit()));
        }
        let overflow = overflows.then(|| {
            let v = sink.new_var();
            self.aux.push(v);
            v.pos_lit()
        });

        for &(sa, la) in &ta {
            for &(sb, lb) in &tb {
                if la.is_none() && lb.is_none() {
                    continue;
                }
                tick()?;
                let out = match combine(sa, sb) {
                    Some(s) => {
                        let i = outputs
                            .binary_search_by_key(&s, |&(k, _)| k)
                            .expect("sum was collected");
                        outputs[i].1
                    }
                    None => overflow.expect("overflow output exists"),
                };
                let mut clause = Vec::with_capacity(3);
                clause.extend(la.map(|l| !l));
                clause.extend(lb.map(|l| !l));
                clause.push(out);
                sink.add_clause(&clause);
                self.n_clauses += 1;
            }
        }
        Ok(Node { outputs, overflow })
    }

    /// Units forbidding every root sum above `bound`.
    fn forbid_above<S: ClauseSink + ?Sized>(&mut self, bound: Weight, sink: &mut S) {
        let root = &self.root;
        let lits: Vec<Lit> = root
            .outputs
            .iter()
            .filter(|&&(s, _)| s > bound)
            .map(|&(_, l)| l)
            .chain(root.overflow)
            .collect();
        for l in lits {
            sink.add_clause(&[!l]);
            self.n_clauses += 1;
        }
    }
}

/// Incremental totalizer for `Σ inputs <= k`.
#[derive(Clone, Debug)]
pub struct TotalizerState {
    inputs: Vec<Lit>,
    cap: Weight,
    tree: Tree,
    bound: Option<Weight>,
}

impl TotalizerState {
    /// Builds a full totalizer with one output per possible count.
    ///
    /// # Errors
    ///
    /// Empty or duplicate inputs.
    pub fn build<S: ClauseSink + ?Sized>(inputs: &[Lit], sink: &mut S) -> Result<Self, EncodingError> {
        Self::build_capped(inputs, inputs.len() as Weight, sink)
    }

    /// Builds a totalizer that can only enforce bounds `k <= cap`; counts
    /// above `cap` share one output.
    ///
    /// # Errors
    ///
    /// Empty or duplicate inputs.
    pub fn build_capped<S: ClauseSink + ?Sized>(
        inputs: &[Lit],
        cap: Weight,
        sink: &mut S,
    ) -> Result<Self, EncodingError> {
        Self::build_limited(inputs, cap, sink, &BuildLimits::none())
    }

    /// [`Self::build_capped`] under work limits.
    ///
    /// # Errors
    ///
    /// Empty or duplicate inputs, or a limit was hit.
    pub fn build_limited<S: ClauseSink + ?Sized>(
        inputs: &[Lit],
        cap: Weight,
        sink: &mut S,
        limits: &BuildLimits,
    ) -> Result<Self, EncodingError> {
        let weighted: Vec<(Lit, Weight)> = inputs.iter().map(|&l| (l, 1)).collect();
        let tree = Tree::build(&weighted, cap, sink, limits)?;
        Ok(TotalizerState {
            inputs: inputs.to_vec(),
            cap,
            tree,
            bound: None,
        })
    }

    #[must_use]
    pub fn inputs(&self) -> &[Lit] {
        &self.inputs
    }

    /// Output literals `o_1, o_2, ...`; `o_j` is forced true when at least `j`
    /// inputs are true. With a cap below the input count the last output is
    /// `o_{cap+1}`.
    #[must_use]
    pub fn outputs(&self) -> Vec<Lit> {
        let root = &self.tree.root;
        root.outputs.iter().map(|&(_, l)| l).chain(root.overflow).collect()
    }

    /// Enforced bound, if any.
    #[must_use]
    pub fn bound(&self) -> Option<Weight> {
        self.bound
    }

    #[must_use]
    pub fn n_clauses(&self) -> usize {
        self.tree.n_clauses
    }

    #[must_use]
    pub fn aux_vars(&self) -> &[Var] {
        &self.tree.aux
    }

    /// Enforces `Σ inputs <= k`.
    ///
    /// # Errors
    ///
    /// `k` not strictly below the current bound, or between the cap and the
    /// input count (not expressible by this encoding).
    pub fn set_bound<S: ClauseSink + ?Sized>(&mut self, k: Weight, sink: &mut S) -> Result<(), EncodingError> {
        if let Some(current) = self.bound {
            if k >= current {
                return Err(EncodingError::NotTightening { current, requested: k });
            }
        }
        let n = self.inputs.len() as Weight;
        if k < n && k > self.cap {
            return Err(EncodingError::OutOfRange {
                cap: self.cap,
                requested: k,
            });
        }
        // Outputs above the previous bound are already false.
        let prev = self.bound.unwrap_or(n);
        let outs = self.outputs();
        for j in (k + 1)..=prev.min(outs.len() as Weight) {
            sink.add_clause(&[!outs[(j - 1) as usize]]);
            self.tree.n_clauses += 1;
        }
        self.bound = Some(k);
        Ok(())
    }
}

/// Generalized totalizer for `Σ w_i x_i <= B`.
#[derive(Clone, Debug)]
pub struct GteState {
    inputs: Vec<(Lit, Weight)>,
    max_bound: Weight,
    tree: Tree,
    bound: Option<Weight>,
}

impl GteState {
    /// Builds the encoding for bounds up to `max_bound`.
    ///
    /// # Errors
    ///
    /// Empty inputs, zero weights or duplicate literals.
    pub fn build<S: ClauseSink + ?Sized>(
        inputs: &[(Lit, Weight)],
        max_bound: Weight,
        sink: &mut S,
    ) -> Result<Self, EncodingError> {
        Self::build_limited(inputs, max_bound, sink, &BuildLimits::none())
    }

    /// [`Self::build`] under work limits.
    ///
    /// # Errors
    ///
    /// Empty inputs, zero weights, duplicate literals, or a limit was hit.
    pub fn build_limited<S: ClauseSink + ?Sized>(
        inputs: &[(Lit, Weight)],
        max_bound: Weight,
        sink: &mut S,
        limits: &BuildLimits,
    ) -> Result<Self, EncodingError> {
        let tree = Tree::build(inputs, max_bound, sink, limits)?;
        Ok(GteState {
            inputs: inputs.to_vec(),
            max_bound,
            tree,
            bound: None,
        })
    }

    #[must_use]
    pub fn inputs(&self) -> &[(Lit, Weight)] {
        &self.inputs
    }

    #[must_use]
    pub fn max_bound(&self) -> Weight {
        self.max_bound
    }

    /// Root outputs in ascending order of sum.
    #[must_use]
    pub fn root_outputs(&self) -> &[(Weight, Lit)] {
        &self.tree.root.outputs
    }

    /// Root output for sums above `max_bound`, if any are reachable.
    #[must_use]
    pub fn overflow(&self) -> Option<Lit> {
        self.tree.root.overflow
    }

    #[must_use]
    pub fn bound(&self) -> Option<Weight> {
        self.bound
    }

    #[must_use]
    pub fn n_clauses(&self) -> usize {
        self.tree.n_clauses
    }

    #[must_use]
    pub fn aux_vars(&self) -> &[Var] {
        &self.tree.aux
    }

    /// Enforces `Σ w_i x_i <= b`.
    ///
    /// # Errors
    ///
    /// `b` not strictly below the current bound, or above `max_bound` while
    /// still below the total weight.
    pub fn set_bound<S: ClauseSink + ?Sized>(&mut self, b: Weight, sink: &mut S) -> Result<(), EncodingError> {
        if let Some(current) = self.bound {
            if b >= current {
                return Err(EncodingError::NotTightening { current, requested: b });
            }
        }
        let total = self
            .inputs
            .iter()
            .try_fold(0 as Weight, |acc, &(_, w)| acc.checked_add(w))
            .unwrap_or(Weight::MAX);
        if b > self.max_bound && b < total {
            return Err(EncodingError::OutOfRange {
                cap: self.max_bound,
                requested: b,
            });
        }
        if b < total {
            self.tree.forbid_above(b, sink);
        }
        self.bound = Some(b);
        Ok(())
    }
}
