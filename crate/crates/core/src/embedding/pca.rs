use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::seed;
use crate::{Error, Result};

/// Largest number of windows the projection is fitted on.
pub const PCA_SAMPLE_LIMIT: usize = 10_000;

/// Two-component principal projection of length-`length` vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection2D {
    pub length: usize,
    pub mean: Vec<f64>,
    /// PC1 and PC2, orthonormal, each with its largest-magnitude entry positive.
    pub components: [Vec<f64>; 2],
    /// Sample variance along each component.
    pub variances: [f64; 2],
}

impl Projection2D {
    pub fn project(&self, v: &[f64]) -> Result<(f64, f64)> {
        if v.len() != self.length {
            return Err(Error::DimensionMismatch {
                expected: self.length,
                actual: v.len(),
            });
        }
        Ok(self.project_unchecked(v))
    }

    pub(crate) fn project_unchecked(&self, v: &[f64]) -> (f64, f64) {
        let [pc1, pc2] = &self.components;
        let mut x = 0.0;
        let mut y = 0.0;
        for i in 0..self.length {
            let c = v[i] - self.mean[i];
            x += c * pc1[i];
            y += c * pc2[i];
        }
        (x, y)
    }
}

/// Fits PC1/PC2 on `samples`. Above [`PCA_SAMPLE_LIMIT`] samples a seeded
/// uniform subset is used.
pub fn fit_projection<S: AsRef<[f64]>>(
    samples: &[S],
    length: usize,
    seed: u64,
) -> Result<Projection2D> {
    if length < 2 {
        return Err(Error::InvalidParameter(format!(
            "projection needs subsequence length >= 2, got {length}"
        )));
    }
    if samples.len() > PCA_SAMPLE_LIMIT {
        let mut rng = seed::rng(seed);
        let mut picked = index::sample(&mut rng, samples.len(), PCA_SAMPLE_LIMIT).into_vec();
        picked.sort_unstable();
        let subset: Vec<&[f64]> = picked.iter().map(|&i| samples[i].as_ref()).collect();
        return fit_exact(&subset, length);
    }
    let all: Vec<&[f64]> = samples.iter().map(AsRef::as_ref).collect();
    fit_exact(&all, length)
}

fn fit_exact(samples: &[&[f64]], length: usize) -> Result<Projection2D> {
    if samples.len() < 3 {
        return Err(Error::TooFewSamples {
            required: 3,
            actual: samples.len(),
        });
    }
    if let Some(bad) = samples.iter().find(|s| s.len() != length) {
        return Err(Error::DimensionMismatch {
            expected: length,
            actual: bad.len(),
        });
    }
    let m = samples.len() as f64;
    let mut mean = vec![0.0; length];
    for s in samples {
        for (acc, v) in mean.iter_mut().zip(s.iter()) {
            *acc += v;
        }
    }
    for v in &mut mean {
        *v /= m;
    }

    let mut cov = DMatrix::<f64>::zeros(length, length);
    let mut centered = vec![0.0; length];
    for s in samples {
        for i in 0..length {
            centered[i] = s[i] - mean[i];
        }
        for i in 0..length {
            let ci = centered[i];
            for j in i..length {
                cov[(i, j)] += ci * centered[j];
            }
        }
    }
    let denom = m - 1.0;
    for i in 0..length {
        for j in i..length {
            let v = cov[(i, j)] / denom;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }

    let eig = SymmetricEigen::try_new(cov, f64::EPSILON, 0).ok_or(Error::EigenFailure)?;
    let mut order: Vec<usize> = (0..length).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });

    let component = |idx: usize| -> Vec<f64> {
        let mut v: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in &mut v {
            *x /= norm;
        }
        orient(&mut v);
        v
    };
    let pc1 = component(order[0]);
    let mut pc2 = component(order[1]);
    // re-orthogonalize against PC1 to keep |<pc1,pc2>| at machine precision
    let dot: f64 = pc1.iter().zip(&pc2).map(|(a, b)| a * b).sum();
    for (b, a) in pc2.iter_mut().zip(&pc1) {
        *b -= dot * a;
    }
    let norm = pc2.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in &mut pc2 {
        *x /= norm;
    }
    orient(&mut pc2);

    Ok(Projection2D {
        length,
        mean,
        variances: [
            eig.eigenvalues[order[0]].max(0.0),
            eig.eigenvalues[order[1]].max(0.0),
        ],
        components: [pc1, pc2],
    })
}

/// Flips `v` so its largest-magnitude entry (first on ties) is positive.
fn orient(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}
