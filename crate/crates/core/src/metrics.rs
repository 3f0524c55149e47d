//! Partition agreement measures and the raw k-means baseline.

use serde::{Deserialize, Serialize};

use crate::clustering::{kmeans, KMeansConfig, Partition};
use crate::series::{remap_first_occurrence, znormalize_values, Dataset};
use crate::{Error, Result};

/// Cross-tabulation of two labelings over the same items.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    /// `counts[i][j]` = items with label `i` in `a` and `j` in `b`
    /// (labels renumbered by first occurrence).
    pub counts: Vec<Vec<u64>>,
    pub row_sums: Vec<u64>,
    pub col_sums: Vec<u64>,
    pub total: u64,
}

impl ContingencyTable {
    pub fn new(a: &[usize], b: &[usize]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::LabelLengthMismatch {
                left: a.len(),
                right: b.len(),
            });
        }
        let ra = remap_first_occurrence(a);
        let rb = remap_first_occurrence(b);
        let rows = ra.iter().max().map_or(0, |m| m + 1);
        let cols = rb.iter().max().map_or(0, |m| m + 1);
        let mut counts = vec![vec![0u64; cols]; rows];
        for (&i, &j) in ra.iter().zip(&rb) {
            counts[i][j] += 1;
        }
        let row_sums = counts.iter().map(|r| r.iter().sum()).collect();
        let col_sums = (0..cols)
            .map(|j| counts.iter().map(|r| r[j]).sum())
            .collect();
        Ok(Self {
            counts,
            row_sums,
            col_sums,
            total: a.len() as u64,
        })
    }

    /// Pairs together in both, in `a`, and in `b`.
    fn pair_sums(&self) -> (u128, u128, u128) {
        let c2 = |x: u64| u128::from(x) * u128::from(x.saturating_sub(1)) / 2;
        let index = self.counts.iter().flatten().map(|&c| c2(c)).sum();
        let a = self.row_sums.iter().map(|&c| c2(c)).sum();
        let b = self.col_sums.iter().map(|&c| c2(c)).sum();
        (index, a, b)
    }

    fn same_partition(&self) -> bool {
        // identical set partitions give a square permutation-shaped table
        self.counts.len() == self.col_sums.len()
            && self
                .counts
                .iter()
                .all(|r| r.iter().filter(|&&c| c > 0).count() == 1)
    }
}

/// Adjusted Rand Index.
///
/// Evaluated as one division of exact integers, so results are correctly
/// rounded. When the chance-corrected denominator vanishes (both partitions
/// trivial, or fewer than two items) the result is 1 for identical set
/// partitions and 0 otherwise.
pub fn ari(a: &[usize], b: &[usize]) -> Result<f64> {
    let t = ContingencyTable::new(a, b)?;
    let n = u128::from(t.total);
    let pairs = n * n.saturating_sub(1) / 2;
    let (index, sa, sb) = t.pair_sums();
    // ARI = (index - sa*sb/pairs) / ((sa+sb)/2 - sa*sb/pairs), scaled by 2*pairs
    let num = 2 * (index as i128 * pairs as i128 - (sa * sb) as i128);
    let den = ((sa + sb) * pairs) as i128 - 2 * (sa * sb) as i128;
    if den == 0 {
        return Ok(if t.same_partition() { 1.0 } else { 0.0 });
    }
    Ok(num as f64 / den as f64)
}

/// Fraction of item pairs on which the two partitions agree.
pub fn rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    let t = ContingencyTable::new(a, b)?;
    let n = u128::from(t.total);
    let pairs = n * n.saturating_sub(1) / 2;
    if pairs == 0 {
        return Ok(1.0);
    }
    let (index, sa, sb) = t.pair_sums();
    let agree = pairs + 2 * index - sa - sb;
    Ok(agree as f64 / pairs as f64)
}

fn entropy(counts: &[u64], n: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Mutual information normalized by the arithmetic mean of the entropies.
/// Two single-cluster labelings score 1; a single cluster against anything
/// else scores 0.
pub fn nmi(a: &[usize], b: &[usize]) -> Result<f64> {
    let t = ContingencyTable::new(a, b)?;
    if t.total == 0 {
        return Ok(1.0);
    }
    let n = t.total as f64;
    let ha = entropy(&t.row_sums, n);
    let hb = entropy(&t.col_sums, n);
    let mean = 0.5 * (ha + hb);
    if mean <= 0.0 {
        return Ok(1.0);
    }
    let mut mi = 0.0;
    for (i, row) in t.counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let c = c as f64;
            mi += c / n * (c * n / (t.row_sums[i] as f64 * t.col_sums[j] as f64)).ln();
        }
    }
    Ok((mi / mean).clamp(0.0, 1.0))
}

/// Share of items that belong to the majority class of their cluster.
pub fn purity(clusters: &[usize], classes: &[usize]) -> Result<f64> {
    let t = ContingencyTable::new(clusters, classes)?;
    if t.total == 0 {
        return Ok(1.0);
    }
    let hits: u64 = t
        .counts
        .iter()
        .map(|r| r.iter().copied().max().unwrap_or(0))
        .sum();
    Ok(hits as f64 / t.total as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub ari: f64,
    pub ri: f64,
    pub nmi: f64,
    pub purity: f64,
}

/// All four measures of `predicted` against `reference`.
pub fn score(predicted: &[usize], reference: &[usize]) -> Result<Scores> {
    Ok(Scores {
        ari: ari(predicted, reference)?,
        ri: rand_index(predicted, reference)?,
        nmi: nmi(predicted, reference)?,
        purity: purity(predicted, reference)?,
    })
}

/// k-means on whole z-normalized series, truncated to the shortest length.
pub fn baseline_kmeans(dataset: &Dataset, k: usize, seed: u64) -> Result<Partition> {
    let n_min = dataset.min_len();
    let rows: Vec<Vec<f64>> = dataset
        .series
        .iter()
        .map(|s| znormalize_values(&s.values[..n_min]))
        .collect();
    Ok(kmeans(&rows, k, seed, &KMeansConfig::default())?.partition)
}
