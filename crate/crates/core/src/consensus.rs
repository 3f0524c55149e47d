//! Consensus of the per-length partitions.
//!
//! The consensus matrix counts how often two series share a cluster across
//! partitions. Final labels come from normalized spectral clustering of that
//! matrix used directly as an affinity.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::clustering::{kmeans, KMeansConfig, Partition};
use crate::{Error, Result};

/// Degree floor that keeps `D^-1/2` finite.
pub const DEGREE_FLOOR: f64 = 1e-12;

/// Square, symmetric co-clustering frequencies, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusMatrix {
    pub size: usize,
    /// Number of partitions aggregated.
    pub partitions: usize,
    pub values: Vec<f64>,
}

impl ConsensusMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.size + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.size..(i + 1) * self.size]
    }

    /// Builds a matrix from an arbitrary dense affinity (used by tests and
    /// callers that bring their own co-association).
    pub fn from_dense(rows: &[Vec<f64>], partitions: usize) -> Result<Self> {
        let size = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != size) {
            return Err(Error::DimensionMismatch {
                expected: size,
                actual: r.len(),
            });
        }
        Ok(Self {
            size,
            partitions,
            values: rows.concat(),
        })
    }
}

pub fn consensus_matrix(partitions: &[Partition]) -> Result<ConsensusMatrix> {
    let first = partitions
        .first()
        .ok_or_else(|| Error::InvalidParameter("no partitions to combine".into()))?;
    let n = first.len();
    if let Some(p) = partitions.iter().find(|p| p.len() != n) {
        return Err(Error::LabelLengthMismatch {
            left: n,
            right: p.len(),
        });
    }
    let mut counts = vec![0u32; n * n];
    for p in partitions {
        for i in 0..n {
            let li = p.labels[i];
            for j in i..n {
                if p.labels[j] == li {
                    counts[i * n + j] += 1;
                }
            }
        }
    }
    let m = partitions.len() as f64;
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = f64::from(counts[i * n + j]) / m;
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    Ok(ConsensusMatrix {
        size: n,
        partitions: partitions.len(),
        values,
    })
}

/// `I - D^-1/2 A D^-1/2` with degrees floored at [`DEGREE_FLOOR`].
pub fn normalized_laplacian(affinity: &ConsensusMatrix) -> DMatrix<f64> {
    let n = affinity.size;
    let inv_sqrt: Vec<f64> = (0..n)
        .map(|i| 1.0 / affinity.row(i).iter().sum::<f64>().max(DEGREE_FLOOR).sqrt())
        .collect();
    DMatrix::from_fn(n, n, |i, j| {
        let a = -inv_sqrt[i] * affinity.get(i, j) * inv_sqrt[j];
        if i == j {
            1.0 + a
        } else {
            a
        }
    })
}

/// The `k` smallest eigenpairs of the normalized Laplacian.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEmbedding {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// One column per eigenvalue, unit norm, largest-magnitude entry positive.
    pub eigenvectors: Vec<Vec<f64>>,
}

pub fn spectral_embedding(affinity: &ConsensusMatrix, k: usize) -> Result<SpectralEmbedding> {
    let n = affinity.size;
    if k == 0 || k > n {
        return Err(Error::TooManyClusters { k, n });
    }
    let lap = normalized_laplacian(affinity);
    let eig = SymmetricEigen::try_new(lap, f64::EPSILON, 0).ok_or(Error::EigenFailure)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .total_cmp(&eig.eigenvalues[b])
            .then(a.cmp(&b))
    });
    let mut eigenvalues = Vec::with_capacity(k);
    let mut eigenvectors = Vec::with_capacity(k);
    for &idx in order.iter().take(k) {
        eigenvalues.push(eig.eigenvalues[idx]);
        let mut v: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
        let lead = v
            .iter()
            .copied()
            .fold(0.0f64, |a, b| if b.abs() > a.abs() { b } else { a });
        if lead < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        eigenvectors.push(v);
    }
    Ok(SpectralEmbedding {
        eigenvalues,
        eigenvectors,
    })
}

/// Ng-Jordan-Weiss spectral clustering of `affinity` into `k` clusters.
pub fn spectral_cluster(affinity: &ConsensusMatrix, k: usize, seed: u64) -> Result<Partition> {
    let emb = spectral_embedding(affinity, k)?;
    let n = affinity.size;
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut r: Vec<f64> = emb.eigenvectors.iter().map(|v| v[i]).collect();
            let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                r.iter_mut().for_each(|x| *x /= norm);
            }
            r
        })
        .collect();
    Ok(kmeans(&rows, k, seed, &KMeansConfig::default())?.partition)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_partitions_give_indicator() {
        let p = Partition::new(vec![0, 0, 1, 2, 1], 3);
        let m = consensus_matrix(&[p.clone(), p.clone(), p]).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let same = [0, 0, 1, 2, 1][i] == [0, 0, 1, 2, 1][j];
                assert_eq!(m.get(i, j), if same { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn half_agreement() {
        let a = Partition::new(vec![0, 0, 1], 2);
        let b = Partition::new(vec![0, 1, 1], 2);
        let m = consensus_matrix(&[a, b]).unwrap();
        assert_eq!(m.get(0, 1), 0.5);
        assert_eq!(m.get(1, 0), 0.5);
        assert_eq!(m.get(0, 2), 0.0);
    }

    #[test]
    fn mismatched_lengths() {
        let a = Partition::new(vec![0, 0, 1], 2);
        let b = Partition::new(vec![0, 1], 2);
        assert!(matches!(
            consensus_matrix(&[a, b]),
            Err(Error::LabelLengthMismatch { .. })
        ));
        assert!(consensus_matrix(&[]).is_err());
    }

    #[test]
    fn all_ones_single_cluster() {
        let rows = vec![vec![1.0; 6]; 6];
        let m = ConsensusMatrix::from_dense(&rows, 1).unwrap();
        let p = spectral_cluster(&m, 1, 0).unwrap();
        assert_eq!(p.labels, vec![0; 6]);
    }

    #[test]
    fn laplacian_spectrum_in_unit_band() {
        let p1 = Partition::new(vec![0, 0, 1, 1, 2, 2, 0], 3);
        let p2 = Partition::new(vec![0, 1, 1, 1, 0, 2, 2], 3);
        let m = consensus_matrix(&[p1, p2]).unwrap();
        let emb = spectral_embedding(&m, 7).unwrap();
        for l in &emb.eigenvalues {
            assert!(*l >= -1e-8 && *l <= 2.0 + 1e-8, "{l}");
        }
        assert!(emb.eigenvalues[0].abs() < 1e-8);
    }

    #[test]
    fn isolated_series_does_not_blow_up() {
        let rows = vec![
            vec![1.0, 1.0, 0.0],
            vec![1.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0],
        ];
        let m = ConsensusMatrix::from_dense(&rows, 1).unwrap();
        let emb = spectral_embedding(&m, 3).unwrap();
        assert!(emb.eigenvectors.iter().flatten().all(|v| v.is_finite()));
        let p = spectral_cluster(&m, 2, 3).unwrap();
        assert!(p.labels.iter().all(|&l| l < 2));
    }
}
