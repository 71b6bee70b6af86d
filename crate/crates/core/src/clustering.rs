//! Weight clustering: split the weight-sorted soft clauses at the largest
//! gaps between consecutive weights, and give every clause of a cluster the
//! cluster's representative weight.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::wcnf::{WcnfFormula, Weight};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ClusteringError {
    #[error("cannot partition a formula without soft clauses into clusters")]
    NoSoftClauses,
    #[error("representative weight of an empty cluster")]
    EmptyCluster,
}

/// Soft clauses grouped into clusters of ascending weight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    /// Soft-clause indices per cluster. Every clause of cluster `j` weighs at
    /// most as much as every clause of cluster `j + 1`.
    pub clusters: Vec<Vec<usize>>,
    /// The requested cluster count `m`.
    pub requested: usize,
    /// Positions in the weight-sorted order after which a new cluster starts.
    pub boundaries: Vec<usize>,
}

impl Partition {
    #[must_use]
    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }
}

/// Original and approximated weights, indexed by soft clause.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightScheme {
    pub weight: Vec<Weight>,
    pub weight_m: Vec<Weight>,
    /// Representative weight per cluster; empty for the identity scheme (`m = 0`).
    pub rep: Vec<Weight>,
    /// Cluster of each soft clause.
    pub cluster_of: Vec<usize>,
}

impl WeightScheme {
    /// True when no weight was changed.
    #[must_use]
    pub fn is_exact(&self) -> bool {
        self.weight == self.weight_m
    }
}

/// Number of distinct soft weights.
#[must_use]
pub fn distinct_weight_count(f: &WcnfFormula) -> usize {
    f.weights().collect::<BTreeSet<_>>().len()
}

/// Arithmetic mean rounded half-up, never below 1.
///
/// # Errors
///
/// [`ClusteringError::EmptyCluster`] for an empty input.
pub fn representative_weight(weights: &[Weight]) -> Result<Weight, ClusteringError> {
    if weights.is_empty() {
        return Err(ClusteringError::EmptyCluster);
    }
    let n = weights.len() as u128;
    let sum: u128 = weights.iter().map(|&w| u128::from(w)).sum();
    let rounded = (2 * sum + n) / (2 * n);
    Ok(Weight::try_from(rounded).expect("mean is bounded by the max weight").max(1))
}

/// Partitions the soft clauses of `f` into at most `m` clusters.
///
/// `m = 0` leaves the weights untouched and puts everything in one cluster.
/// Otherwise clauses are stably sorted by weight and split at the `m - 1`
/// largest positive gaps (earlier gaps win ties), so fewer clusters result
/// when there are fewer than `m` distinct weights.
///
/// # Errors
///
/// [`ClusteringError::NoSoftClauses`] when `m >= 1` and `f` has no soft clauses.
pub fn partition(f: &WcnfFormula, m: usize) -> Result<(Partition, WeightScheme), ClusteringError> {
    let weight: Vec<Weight> = f.weights().collect();
    let n = weight.len();

    if m == 0 {
        let clusters = if n == 0 { vec![] } else { vec![(0..n).collect()] };
        return Ok((
            Partition {
                clusters,
                requested: 0,
                boundaries: vec![],
            },
            WeightScheme {
                weight_m: weight.clone(),
                weight,
                rep: vec![],
                cluster_of: vec![0; n],
            },
        ));
    }
    if n == 0 {
        return Err(ClusteringError::NoSoftClauses);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (weight[i], i));

    // Gap `i` sits between sorted positions `i` and `i + 1`.
    let mut gaps: Vec<(Weight, usize)> = (0..n - 1)
        .map(|i| (weight[order[i + 1]] - weight[order[i]], i))
        .filter(|&(d, _)| d > 0)
        .collect();
    gaps.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut boundaries: Vec<usize> = gaps.iter().take(m - 1).map(|&(_, i)| i).collect();
    boundaries.sort_unstable();

    let mut clusters = Vec::with_capacity(boundaries.len() + 1);
    let mut start = 0;
    for &b in boundaries.iter().chain(std::iter::once(&(n - 1))) {
        clusters.push(order[start..=b].to_vec());
        start = b + 1;
    }

    let mut weight_m = vec![0; n];
    let mut cluster_of = vec![0; n];
    let mut rep = Vec::with_capacity(clusters.len());
    for (ci, c) in clusters.iter().enumerate() {
        let ws: Vec<Weight> = c.iter().map(|&i| weight[i]).collect();
        let r = representative_weight(&ws)?;
        rep.push(r);
        for &i in c {
            weight_m[i] = r;
            cluster_of[i] = ci;
        }
    }

    Ok((
        Partition {
            clusters,
            requested: m,
            boundaries,
        },
        WeightScheme {
            weight,
            weight_m,
            rep,
            cluster_of,
        },
    ))
}

/// Whether the clusters form a Boolean multilevel structure: with clusters
/// taken in descending order of their minimum weight, each minimum exceeds
/// the total weight of all clusters after it.
#[must_use]
pub fn is_bmo(f: &WcnfFormula, p: &Partition) -> bool {
    let soft = f.soft();
    let mut levels: Vec<(Weight, u128)> = p
        .clusters
        .iter()
        .filter(|c| !c.is_empty())
        .map(|c| {
            let min = c.iter().map(|&i| soft[i].weight).min().expect("nonempty");
            let sum = c.iter().map(|&i| u128::from(soft[i].weight)).sum();
            (min, sum)
        })
        .collect();
    levels.sort_by_key(|l| std::cmp::Reverse(l.0));
    let mut below: u128 = 0;
    for &(min, sum) in levels.iter().rev() {
        if u128::from(min) <= below {
            return false;
        }
        below += sum;
    }
    true
}
