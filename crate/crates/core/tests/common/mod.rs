//! Shared fixtures for the integration tests.
#![allow(dead_code)]

use distvote::{Districts, Instance};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Exp1};

/// A point drawn uniformly from the probability simplex.
pub fn simplex_row<R: Rng>(m: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..m).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| x / total).collect()
}

/// Shuffled agents cut at `k - 1` random points, so district sizes differ.
pub fn random_partition<R: Rng>(n: usize, k: usize, rng: &mut R) -> Districts {
    assert!(1 <= k && k <= n);
    let mut agents: Vec<usize> = (0..n).collect();
    agents.shuffle(rng);
    let mut cuts: Vec<usize> = rand::seq::index::sample(rng, n - 1, k - 1)
        .into_iter()
        .map(|c| c + 1)
        .collect();
    cuts.sort_unstable();
    cuts.push(n);
    let mut groups = Vec::with_capacity(k);
    let mut start = 0;
    for c in cuts {
        groups.push(agents[start..c].to_vec());
        start = c;
    }
    Districts::new(groups).unwrap()
}

/// Random unit-sum instance with `n` in `2..=n_max`, `m` in `2..=m_max` and
/// `k` in `1..=min(n, k_max)`.
pub fn random_instance<R: Rng>(n_max: usize, m_max: usize, k_max: usize, rng: &mut R) -> Instance {
    let n = rng.random_range(2..=n_max);
    let m = rng.random_range(2..=m_max);
    let k = rng.random_range(1..=n.min(k_max));
    let rows = (0..n).map(|_| simplex_row(m, rng)).collect();
    Instance::new(rows, random_partition(n, k, rng)).unwrap()
}

/// A unit-sum row whose ranking is exactly `ranking`.
pub fn row_for_ranking<R: Rng>(ranking: &[usize], rng: &mut R) -> Vec<f64> {
    let mut values = simplex_row(ranking.len(), rng);
    values.sort_by(|a, b| b.total_cmp(a));
    let mut row = vec![0.0; ranking.len()];
    for (&a, v) in ranking.iter().zip(values) {
        row[a] = v;
    }
    row
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
