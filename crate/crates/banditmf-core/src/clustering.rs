//! Seeded k-means over predicted rating rows, producing the per-cluster
//! unified preference vectors that drive the bandit arms.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::matrix::DenseMatrix;
use crate::seed;

/// Error raised by [`kmeans`].
#[derive(Debug, Clone, PartialEq)]
pub enum ClusterError {
    /// Need at least as many rows as clusters.
    TooFewRows { rows: usize, k_clusters: usize },
    InvalidParams(&'static str),
}

impl fmt::Display for ClusterError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClusterError::TooFewRows { rows, k_clusters } => {
                write!(f, "cannot form {k_clusters} clusters from {rows} rows")
            }
            ClusterError::InvalidParams(msg) => write!(f, "invalid clustering params: {msg}"),
        }
    }
}

impl core::error::Error for ClusterError {}

/// Result of a k-means run: the winning restart's partition plus
/// per-restart and per-iteration diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    pub k_clusters: usize,
    /// Cluster index of each input row.
    pub assignment: Vec<usize>,
    /// `k_clusters x dim` centroid rows.
    pub centroids: DenseMatrix,
    /// Within-cluster sum of squared distances of the winning restart.
    pub inertia: f64,
    /// Final inertia of every restart, in restart order.
    pub restart_inertias: Vec<f64>,
    /// Winning restart's inertia after each Lloyd iteration.
    pub inertia_trace: Vec<f64>,
}

struct Restart {
    assignment: Vec<usize>,
    centroids: DenseMatrix,
    inertia: f64,
    trace: Vec<f64>,
}

/// Lloyd's algorithm with seeded uniform distinct-row initialization and
/// `n_init` independent restarts; the restart with the lowest final inertia
/// wins (ties: earliest restart).
///
/// Each restart assigns points to the nearest centroid (ties: lowest
/// cluster index), repairs any emptied cluster by donating the point
/// farthest from its current centroid, recomputes centroids as coordinate
/// means, and stops when the assignment reaches a fixpoint or after
/// `max_iter` iterations.
pub fn kmeans(
    rows: &DenseMatrix,
    k_clusters: usize,
    n_init: usize,
    max_iter: usize,
    master_seed: u64,
) -> Result<ClusterModel, ClusterError> {
    if k_clusters == 0 {
        return Err(ClusterError::InvalidParams("k_clusters must be at least 1"));
    }
    if n_init == 0 {
        return Err(ClusterError::InvalidParams("n_init must be at least 1"));
    }
    if max_iter == 0 {
        return Err(ClusterError::InvalidParams("max_iter must be at least 1"));
    }
    if rows.rows() < k_clusters {
        return Err(ClusterError::TooFewRows { rows: rows.rows(), k_clusters });
    }

    let mut restart_inertias = Vec::with_capacity(n_init);
    let mut best: Option<Restart> = None;
    for restart in 0..n_init {
        let restart_seed = seed::derive_indexed_seed(master_seed, "kmeans-restart", restart as u64);
        let run = lloyd(rows, k_clusters, max_iter, restart_seed);
        restart_inertias.push(run.inertia);
        // Strictly-less keeps the earliest restart on ties.
        if best.as_ref().map_or(true, |incumbent| run.inertia < incumbent.inertia) {
            best = Some(run);
        }
    }
    let winner = best.expect("n_init >= 1 guarantees a winner");
    Ok(ClusterModel {
        k_clusters,
        assignment: winner.assignment,
        centroids: winner.centroids,
        inertia: winner.inertia,
        restart_inertias,
        inertia_trace: winner.trace,
    })
}

fn lloyd(rows: &DenseMatrix, k: usize, max_iter: usize, restart_seed: u64) -> Restart {
    let (m, dim) = (rows.rows(), rows.cols());
    let mut rng = seed::rng_from_seed(restart_seed);
    let picks = seed::sample_distinct(m, k, &mut rng);
    let mut centroids = DenseMatrix::zeros(k, dim);
    for (c, &row) in picks.iter().enumerate() {
        centroids.row_mut(c).copy_from_slice(rows.row(row));
    }

    let mut assignment = vec![usize::MAX; m];
    let mut trace: Vec<f64> = Vec::new();
    for _ in 0..max_iter {
        let mut next: Vec<usize> = (0..m)
            .map(|p| nearest_centroid(rows.row(p), &centroids))
            .collect();
        repair_empty_clusters(rows, &centroids, &mut next, k);
        let converged = next == assignment;
        assignment = next;
        update_centroids(rows, &assignment, &mut centroids, k);
        let inertia = total_inertia(rows, &assignment, &centroids);
        if let Some(&prev) = trace.last() {
            debug_assert!(
                inertia <= prev * (1.0 + 1e-12) + 1e-12,
                "inertia rose from {prev} to {inertia}"
            );
        }
        trace.push(inertia);
        if converged {
            break;
        }
    }
    let inertia = *trace.last().expect("max_iter >= 1 records at least one iteration");
    Restart { assignment, centroids, inertia, trace }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest_centroid(point: &[f64], centroids: &DenseMatrix) -> usize {
    let mut best = 0;
    let mut best_d = sq_dist(point, centroids.row(0));
    for c in 1..centroids.rows() {
        let d = sq_dist(point, centroids.row(c));
        // Strictly-less keeps the lowest cluster index on ties.
        if d < best_d {
            best = c;
            best_d = d;
        }
    }
    best
}

/// Gives every empty cluster the point currently farthest from its own
/// centroid, drawn only from clusters that can spare a member.
fn repair_empty_clusters(
    rows: &DenseMatrix,
    centroids: &DenseMatrix,
    assignment: &mut [usize],
    k: usize,
) {
    let mut sizes = vec![0usize; k];
    for &a in assignment.iter() {
        sizes[a] += 1;
    }
    for empty in 0..k {
        if sizes[empty] > 0 {
            continue;
        }
        let mut farthest: Option<(usize, f64)> = None;
        for p in 0..rows.rows() {
            if sizes[assignment[p]] < 2 {
                continue;
            }
            let d = sq_dist(rows.row(p), centroids.row(assignment[p]));
            if farthest.map_or(true, |(_, best)| d > best) {
                farthest = Some((p, d));
            }
        }
        let (p, _) = farthest.expect("a donor cluster with >= 2 members always exists");
        sizes[assignment[p]] -= 1;
        assignment[p] = empty;
        sizes[empty] += 1;
    }
}

fn update_centroids(
    rows: &DenseMatrix,
    assignment: &[usize],
    centroids: &mut DenseMatrix,
    k: usize,
) {
    let dim = rows.cols();
    let mut sums = DenseMatrix::zeros(k, dim);
    let mut counts = vec![0usize; k];
    for (p, &c) in assignment.iter().enumerate() {
        counts[c] += 1;
        let row = rows.row(p);
        let acc = sums.row_mut(c);
        for (s, v) in acc.iter_mut().zip(row) {
            *s += v;
        }
    }
    for c in 0..k {
        debug_assert!(counts[c] > 0, "cluster {c} empty after repair");
        let count = counts[c] as f64;
        let out = centroids.row_mut(c);
        for (o, s) in out.iter_mut().zip(sums.row(c)) {
            *o = s / count;
        }
    }
}

fn total_inertia(rows: &DenseMatrix, assignment: &[usize], centroids: &DenseMatrix) -> f64 {
    (0..rows.rows())
        .map(|p| sq_dist(rows.row(p), centroids.row(assignment[p])))
        .sum()
}

/// The unified rating matrix: one centroid row per cluster, giving every
/// cluster's estimated rating for every item.
pub fn unified_ratings(model: &ClusterModel) -> DenseMatrix {
    model.centroids.clone()
}
