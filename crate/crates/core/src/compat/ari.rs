use std::collections::HashMap;

use super::CompatError;
use crate::Real;

fn pairs(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

/// Hubert–Arabie adjusted Rand index between two labelings of the same
/// items. Label values are arbitrary identifiers.
///
/// When both partitions are trivial in the same way (all singletons, or a
/// single cluster) the index is defined as 1.
pub fn adjusted_rand_index<T: Real>(a: &[usize], b: &[usize]) -> Result<T, CompatError> {
    if a.len() != b.len() {
        return Err(CompatError::LengthMismatch(a.len(), b.len()));
    }
    let n = a.len();
    if n < 2 {
        return Err(CompatError::TooSmall { needed: 2, got: n });
    }
    let mut table: HashMap<(usize, usize), u64> = HashMap::new();
    let mut rows: HashMap<usize, u64> = HashMap::new();
    let mut cols: HashMap<usize, u64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let index = table.values().map(|&c| pairs(c)).sum::<u64>() as f64;
    let sum_rows = rows.values().map(|&c| pairs(c)).sum::<u64>() as f64;
    let sum_cols = cols.values().map(|&c| pairs(c)).sum::<u64>() as f64;
    let expected = sum_rows * sum_cols / pairs(n as u64) as f64;
    let max_index = 0.5 * (sum_rows + sum_cols);
    if max_index == expected {
        return Ok(T::one());
    }
    Ok(T::lit((index - expected) / (max_index - expected)))
}
