//! Synthetic fixtures shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::TAU;

use kgraph_core::series::Dataset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `per_class` noisy sines followed by `per_class` noisy square waves.
pub fn sine_square(per_class: usize, n: usize, sigma: f64, seed: u64) -> Dataset {
    let mut rng = rng(seed);
    let period = 32.0;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for class in 0..2 {
        for _ in 0..per_class {
            let phase = rng.random::<f64>() * TAU;
            let row = (0..n)
                .map(|t| {
                    let s = (TAU * t as f64 / period + phase).sin();
                    let clean = if class == 0 { s } else { s.signum() };
                    clean + sigma * rng.sample::<f64, _>(StandardNormal)
                })
                .collect();
            values.push(row);
            labels.push(class);
        }
    }
    Dataset::new("sine_square", values, Some(labels)).unwrap()
}

/// Three classes over a shared noisy flat background; each class carries
/// three jittered occurrences of its own motif (upward bump, downward bump,
/// or step).
pub fn private_motifs(per_class: usize, n: usize, seed: u64) -> Dataset {
    let mut rng = rng(seed);
    let motif_len = 24;
    let bump: Vec<f64> = (0..motif_len)
        .map(|i| {
            let x = (i as f64 - 11.5) / 4.0;
            4.0 * (-x * x).exp()
        })
        .collect();
    let motifs: [Vec<f64>; 3] = [
        bump.clone(),
        bump.iter().map(|v| -v).collect(),
        (0..motif_len)
            .map(|i| if i < motif_len / 2 { -2.0 } else { 2.0 })
            .collect(),
    ];
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (class, motif) in motifs.iter().enumerate() {
        for _ in 0..per_class {
            let mut row = vec![0.0; n];
            let slot = n / 3;
            for occurrence in 0..3 {
                let at = occurrence * slot + rng.random_range(0..slot - motif_len);
                row[at..at + motif_len].copy_from_slice(motif);
            }
            for v in &mut row {
                *v += 0.1 * rng.sample::<f64, _>(StandardNormal);
            }
            values.push(row);
            labels.push(class);
        }
    }
    Dataset::new("private_motifs", values, Some(labels)).unwrap()
}

/// Pair-counting ARI: classifies every item pair, no contingency table.
pub fn ari_by_pairs(a: &[usize], b: &[usize]) -> f64 {
    let (mut n11, mut n10, mut n01, mut n00) = (0f64, 0f64, 0f64, 0f64);
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => n11 += 1.0,
                (true, false) => n10 += 1.0,
                (false, true) => n01 += 1.0,
                (false, false) => n00 += 1.0,
            }
        }
    }
    let den = (n00 + n01) * (n01 + n11) + (n00 + n10) * (n10 + n11);
    if den == 0.0 {
        return if n10 == 0.0 && n01 == 0.0 { 1.0 } else { 0.0 };
    }
    2.0 * (n00 * n11 - n01 * n10) / den
}

/// Fraction of pairs on which two labelings agree, by enumeration.
pub fn rand_index_by_pairs(a: &[usize], b: &[usize]) -> f64 {
    let mut agree = 0usize;
    let mut total = 0usize;
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            total += 1;
            if (a[i] == a[j]) == (b[i] == b[j]) {
                agree += 1;
            }
        }
    }
    if total == 0 {
        return 1.0;
    }
    agree as f64 / total as f64
}

pub fn random_labels(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..k)).collect()
}

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Graph with unit-position nodes whose edges and members follow `paths`.
/// Consecutive repeats in `paths` are collapsed first.
pub fn graph_from_paths(
    nodes: usize,
    paths: Vec<Vec<usize>>,
) -> kgraph_core::embedding::EmbeddedGraph {
    use kgraph_core::embedding::{collapse_path, Edge, EmbeddedGraph, Node};
    let paths: Vec<Vec<usize>> = paths.iter().map(|p| collapse_path(p)).collect();
    let mut weights = std::collections::BTreeMap::new();
    for p in &paths {
        for w in p.windows(2) {
            *weights.entry((w[0], w[1])).or_insert(0u64) += 1;
        }
    }
    let mut members = vec![Vec::new(); nodes];
    for (s, p) in paths.iter().enumerate() {
        for (i, &n) in p.iter().enumerate() {
            members[n].push([s, i]);
        }
    }
    EmbeddedGraph {
        length: 4,
        nodes: (0..nodes)
            .map(|id| Node {
                id,
                x: id as f64,
                y: 0.0,
                angle_bin: 0,
                radius: id as f64,
                density: 1.0,
            })
            .collect(),
        edges: weights
            .into_iter()
            .map(|((src, dst), weight)| Edge { src, dst, weight })
            .collect(),
        paths,
        members,
    }
}
