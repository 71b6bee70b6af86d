//! Anytime weighted partial MaxSAT with two approximation strategies:
//! weight clustering (soft weights replaced by a per-cluster representative)
//! and greedy per-cluster subproblem minimization.
//!
//! The crate bundles its own incremental CDCL solver ([`satcore`]), the
//! cardinality and pseudo-Boolean encodings the searches rely on
//! ([`encodings`]), and a harness with an exhaustive oracle and
//! MaxSAT-Evaluation-style scoring ([`harness`]).

pub mod clustering;
pub mod encodings;
pub mod harness;
pub mod satcore;
pub mod search;
pub mod wcnf;

pub use search::{Algorithm, ClusterCount, SearchConfig, SearchReport, SearchStatus};
pub use wcnf::{parse_wcnf, Assignment, Clause, Lit, Model, Var, WcnfFormula, Weight};
