//! Size-constrained Lloyd iterations.
//!
//! Capacities are fixed up front: every cluster takes `floor(N/K)` points and
//! the first `N mod K` clusters take one more. Assignment walks all
//! (point, center) pairs in order of increasing distance and places a point in
//! the first center that still has room. A reassignment that would raise the
//! objective against the current centers is rejected and the run stops, which
//! keeps the within-cluster SSE non-increasing.

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    pub centers: Array2<f64>,
    /// Within-cluster SSE after each completed iteration.
    pub sse_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

pub fn capacities(n: usize, k: usize) -> Vec<usize> {
    (0..k).map(|c| n / k + usize::from(c < n % k)).collect()
}

pub fn within_cluster_sse(points: ArrayView2<'_, f64>, labels: &[usize], centers: ArrayView2<'_, f64>) -> f64 {
    labels
        .iter()
        .enumerate()
        .map(|(i, &c)| sq_dist(points.row(i), centers.row(c)))
        .sum()
}

pub fn constrained_kmeans(
    points: ArrayView2<'_, f64>,
    k: usize,
    seed: u64,
    max_iters: usize,
) -> Result<KMeansResult> {
    let n = points.nrows();
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if k > n {
        return Err(Error::invalid(format!("k = {k} exceeds the number of points {n}")));
    }
    if points.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "in k-means input".into(),
        });
    }
    let caps = capacities(n, k);
    let mut centers = kmeans_plus_plus(points, k, seed);
    let mut labels = balanced_assign(points, centers.view(), &caps);
    centers = centroids(points, &labels, k);
    let mut sse_history = vec![within_cluster_sse(points, &labels, centers.view())];
    let mut iterations = 1;
    let mut converged = false;

    while iterations < max_iters {
        let proposal = balanced_assign(points, centers.view(), &caps);
        if proposal == labels {
            converged = true;
            break;
        }
        let current = within_cluster_sse(points, &labels, centers.view());
        let proposed = within_cluster_sse(points, &proposal, centers.view());
        if proposed > current {
            // greedy assignment is not optimal; keep the better labelling
            converged = true;
            break;
        }
        labels = proposal;
        centers = centroids(points, &labels, k);
        let sse = within_cluster_sse(points, &labels, centers.view());
        let prev = *sse_history.last().unwrap();
        debug_assert!(sse <= prev * (1.0 + 1e-9) + 1e-12, "SSE rose from {prev} to {sse}");
        sse_history.push(sse);
        iterations += 1;
    }
    Ok(KMeansResult {
        labels,
        centers,
        sse_history,
        iterations,
        converged,
    })
}

fn sq_dist(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn kmeans_plus_plus(points: ArrayView2<'_, f64>, k: usize, seed: u64) -> Array2<f64> {
    let n = points.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = Vec::with_capacity(k);
    chosen.push(rng.random_range(0..n));
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(points.row(i), points.row(chosen[0]))).collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // rounding can leave target just past the last positive weight
            pick.unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).unwrap())
        } else {
            // every point coincides with a chosen center
            (0..n).find(|i| !chosen.contains(i)).unwrap()
        };
        chosen.push(next);
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(points.row(i), points.row(next)));
        }
    }
    points.select(Axis(0), &chosen)
}

fn balanced_assign(points: ArrayView2<'_, f64>, centers: ArrayView2<'_, f64>, caps: &[usize]) -> Vec<usize> {
    let n = points.nrows();
    let k = centers.nrows();
    let mut order: Vec<(f64, u32, u32)> = Vec::with_capacity(n * k);
    for i in 0..n {
        for c in 0..k {
            order.push((sq_dist(points.row(i), centers.row(c)), i as u32, c as u32));
        }
    }
    order.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut labels = vec![usize::MAX; n];
    let mut room = caps.to_vec();
    let mut left = n;
    for (_, i, c) in order {
        let (i, c) = (i as usize, c as usize);
        if labels[i] == usize::MAX && room[c] > 0 {
            labels[i] = c;
            room[c] -= 1;
            left -= 1;
            if left == 0 {
                break;
            }
        }
    }
    labels
}

fn centroids(points: ArrayView2<'_, f64>, labels: &[usize], k: usize) -> Array2<f64> {
    let mut sums = Array2::<f64>::zeros((k, points.ncols()));
    let mut counts = vec![0usize; k];
    for (i, &c) in labels.iter().enumerate() {
        let mut row = sums.row_mut(c);
        row += &points.row(i);
        counts[c] += 1;
    }
    for (c, mut row) in sums.rows_mut().into_iter().enumerate() {
        row /= counts[c] as f64;
    }
    sums
}
