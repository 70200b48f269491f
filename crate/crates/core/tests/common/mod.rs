//! Oracles shared by the integration tests.

#![allow(dead_code)]

use std::collections::HashMap;

fn pairs(n: usize) -> f64 {
    (n * n.saturating_sub(1)) as f64 / 2.0
}

/// Adjusted Rand index between two labelings of the same items.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut table: HashMap<(usize, usize), usize> = HashMap::new();
    let mut rows: HashMap<usize, usize> = HashMap::new();
    let mut cols: HashMap<usize, usize> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let index: f64 = table.values().map(|&n| pairs(n)).sum();
    let sa: f64 = rows.values().map(|&n| pairs(n)).sum();
    let sb: f64 = cols.values().map(|&n| pairs(n)).sum();
    let expected = sa * sb / pairs(a.len());
    let max = (sa + sb) / 2.0;
    if max == expected {
        return 1.0;
    }
    (index - expected) / (max - expected)
}

/// Within-cluster sum of squares of `points` under `assignment`, centroids
/// being the group means. `None` if some group in `0..k` is empty.
pub fn wcss(points: &[Vec<f64>], assignment: &[usize], k: usize) -> Option<f64> {
    let c = points[0].len();
    let mut sums = vec![vec![0.0; c]; k];
    let mut counts = vec![0usize; k];
    for (p, &g) in points.iter().zip(assignment) {
        counts[g] += 1;
        sums[g].iter_mut().zip(p).for_each(|(s, x)| *s += x);
    }
    if counts.contains(&0) {
        return None;
    }
    let mut total = 0.0;
    for (p, &g) in points.iter().zip(assignment) {
        let n = counts[g] as f64;
        total += p.iter().zip(&sums[g]).map(|(x, s)| (x - s / n).powi(2)).sum::<f64>();
    }
    Some(total)
}

/// Minimum within-cluster sum of squares over all `k^D` assignments with no
/// empty group, and one assignment attaining it.
pub fn exhaustive_kmeans(points: &[Vec<f64>], k: usize) -> (f64, Vec<usize>) {
    let d = points.len();
    let mut best = (f64::INFINITY, Vec::new());
    let mut code = vec![0usize; d];
    for mut n in 0..k.pow(d as u32) {
        for slot in code.iter_mut() {
            *slot = n % k;
            n /= k;
        }
        if let Some(v) = wcss(points, &code, k) {
            if v < best.0 {
                best = (v, code.clone());
            }
        }
    }
    best
}

/// Naive strided correlation plus bias and ReLU, `T_out x n̄` row-major.
pub fn naive_conv(signal: &[f64], filters: &[Vec<f64>], biases: &[f64], stride: usize) -> Vec<f64> {
    let l = filters[0].len();
    let mut out = Vec::new();
    let mut start = 0;
    while start + l <= signal.len() {
        for (w, b) in filters.iter().zip(biases) {
            let mut acc = 0.0;
            for i in 0..l {
                acc += w[i] * signal[start + i];
            }
            let v = acc + b;
            out.push(if v > 0.0 { v } else { 0.0 });
        }
        start += stride;
    }
    out
}

/// True group labels and signatures: `per_group` dimensions around each of
/// `groups` centers placed on scaled unit axes of `R^groups`, with pairwise
/// center distance `separation * sigma`, plus `N(0, sigma)` jitter.
pub fn planted_signatures(
    groups: usize,
    per_group: usize,
    sigma: f64,
    separation: f64,
    rng: &mut impl rand::Rng,
) -> (Vec<usize>, Vec<Vec<f64>>) {
    use rand_distr::{Distribution, Normal};
    let noise = Normal::new(0.0, sigma).unwrap();
    let scale = separation * sigma / std::f64::consts::SQRT_2;
    let mut truth = Vec::new();
    let mut sigs = Vec::new();
    for i in 0..groups * per_group {
        let g = i % groups;
        truth.push(g);
        sigs.push(
            (0..groups)
                .map(|j| if j == g { scale } else { 0.0 } + noise.sample(rng))
                .collect(),
        );
    }
    (truth, sigs)
}
