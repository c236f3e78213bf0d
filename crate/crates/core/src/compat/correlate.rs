use serde::{Deserialize, Serialize};

use super::CompatError;
use crate::Real;

/// Pearson, Spearman and Kendall tau-b between two paired samples.
///
/// A coefficient is `None` when it is undefined (a constant input).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport<T> {
    pub pearson: Option<T>,
    pub spearman: Option<T>,
    pub kendall_tau: Option<T>,
    pub n_pairs: usize,
}

pub fn correlate<T: Real>(x: &[T], y: &[T]) -> Result<CorrelationReport<T>, CompatError> {
    if x.len() != y.len() {
        return Err(CompatError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(CompatError::TooSmall { needed: 2, got: x.len() });
    }
    Ok(CorrelationReport {
        pearson: pearson(x, y),
        spearman: spearman(x, y),
        kendall_tau: kendall_tau_b(x, y),
        n_pairs: x.len(),
    })
}

/// Sample Pearson correlation; `None` if either input has zero variance.
pub fn pearson<T: Real>(x: &[T], y: &[T]) -> Option<T> {
    let n = T::from_usize_lossy(x.len());
    let mx = x.iter().copied().sum::<T>() / n;
    let my = y.iter().copied().sum::<T>() / n;
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy = sxy + dx * dy;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
    }
    if sxx <= T::zero() || syy <= T::zero() {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).max(-T::one()).min(T::one()))
}

/// 1-based ranks; tied values share the mean of the ranks they span.
pub fn rank_average<T: Real>(x: &[T]) -> Vec<T> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].partial_cmp(&x[b]).expect("ranked values are not NaN"));
    let mut ranks = vec![T::zero(); x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && x[order[j]] == x[order[i]] {
            j += 1;
        }
        // Positions i..j hold ranks i+1..=j.
        let rank = T::lit((i + 1 + j) as f64 / 2.0);
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        i = j;
    }
    ranks
}

pub fn spearman<T: Real>(x: &[T], y: &[T]) -> Option<T> {
    pearson(&rank_average(x), &rank_average(y))
}

/// Kendall's tau-b in O(n log n) (Knight's algorithm): sort by (x, y),
/// count ties, then count discordant pairs as merge-sort inversions in y.
pub fn kendall_tau_b<T: Real>(x: &[T], y: &[T]) -> Option<T> {
    let n = x.len() as u64;
    let mut idx: Vec<usize> = (0..x.len()).collect();
    let cmp = |a: T, b: T| a.partial_cmp(&b).expect("correlated values are not NaN");
    idx.sort_by(|&a, &b| cmp(x[a], x[b]).then(cmp(y[a], y[b])));

    let tie_pairs = |same: &dyn Fn(usize, usize) -> bool, order: &[usize]| -> u64 {
        let mut total = 0u64;
        let mut run = 1u64;
        for w in order.windows(2) {
            if same(w[0], w[1]) {
                run += 1;
            } else {
                total += run * (run - 1) / 2;
                run = 1;
            }
        }
        total + run * (run - 1) / 2
    };
    let x_ties = tie_pairs(&|a, b| x[a] == x[b], &idx);
    let xy_ties = tie_pairs(&|a, b| x[a] == x[b] && y[a] == y[b], &idx);

    let mut ys: Vec<T> = idx.iter().map(|&i| y[i]).collect();
    let swaps = merge_count(&mut ys, &cmp);
    let y_order: Vec<usize> = (0..ys.len()).collect();
    let y_ties = tie_pairs(&|a, b| ys[a] == ys[b], &y_order);

    let total = n * (n.saturating_sub(1)) / 2;
    let numer = total as f64 - x_ties as f64 - y_ties as f64 + xy_ties as f64 - 2.0 * swaps as f64;
    let denom = ((total - x_ties) as f64 * (total - y_ties) as f64).sqrt();
    if denom == 0.0 {
        return None;
    }
    Some(T::lit((numer / denom).clamp(-1.0, 1.0)))
}

/// Sorts ascending and returns the number of strictly inverted pairs.
fn merge_count<T: Copy>(v: &mut [T], cmp: &impl Fn(T, T) -> std::cmp::Ordering) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = merge_count(&mut v[..mid], cmp) + merge_count(&mut v[mid..], cmp);
    let mut merged = Vec::with_capacity(n);
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if cmp(v[j], v[i]) == std::cmp::Ordering::Less {
            merged.push(v[j]);
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            merged.push(v[i]);
            i += 1;
        }
    }
    merged.extend_from_slice(&v[i..mid]);
    merged.extend_from_slice(&v[j..]);
    v.copy_from_slice(&merged);
    swaps
}
