use rand::Rng;

use crate::error::{Error, Result};

/// Tolerance on internally produced probability vectors.
pub const LOTTERY_TOL: f64 = 1e-12;

/// Probability distribution over alternatives.
#[derive(Debug, Clone, PartialEq)]
pub struct Lottery {
    probs: Vec<f64>,
}

impl Lottery {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::ProbabilitySum(0.0));
        }
        if let Some(&p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::ProbabilitySum(p));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > LOTTERY_TOL {
            return Err(Error::ProbabilitySum(sum));
        }
        Ok(Self { probs })
    }

    pub fn degenerate(m: usize, alternative: usize) -> Self {
        let mut probs = vec![0.0; m];
        probs[alternative] = 1.0;
        Self { probs }
    }

    pub fn uniform(m: usize) -> Self {
        Self {
            probs: vec![1.0 / m as f64; m],
        }
    }

    /// Weighted mixture of lotteries over the same alternatives.
    pub fn mix<'a, I>(parts: I, m: usize) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, &'a Lottery)>,
    {
        let mut probs = vec![0.0; m];
        for (weight, lottery) in parts {
            if lottery.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: lottery.len(),
                });
            }
            for (p, q) in probs.iter_mut().zip(&lottery.probs) {
                *p += weight * q;
            }
        }
        Self::new(probs)
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, alternative: usize) -> f64 {
        self.probs[alternative]
    }

    /// The alternative chosen with certainty (up to [`LOTTERY_TOL`]), if any.
    pub fn as_degenerate(&self) -> Option<usize> {
        self.probs.iter().position(|&p| p >= 1.0 - LOTTERY_TOL)
    }

    /// Draws an alternative. Degenerate lotteries consume no randomness.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        if let Some(a) = self.as_degenerate() {
            return a;
        }
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (a, &p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return a;
            }
        }
        // rounding left a sliver above the cumulative sum
        self.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
    }

    /// Largest absolute entrywise difference.
    pub fn max_deviation(&self, other: &Lottery) -> f64 {
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}
