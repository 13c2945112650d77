//! Synthetic valuations and random district partitions.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Beta, Distribution, Exp, Uniform};

use crate::error::{Error, Result};
use crate::instance::Districts;

/// Value distribution for synthetic experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistributionSpec {
    Uniform { lo: f64, hi: f64 },
    Beta { alpha: f64, beta: f64 },
    Exponential { rate: f64 },
}

impl DistributionSpec {
    pub const UNIFORM: Self = Self::Uniform { lo: 1.0, hi: 100.0 };
    pub const BETA: Self = Self::Beta { alpha: 0.1, beta: 0.1 };
    pub const EXPONENTIAL: Self = Self::Exponential { rate: 4.0 };

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Uniform { lo, hi } => lo.is_finite() && hi.is_finite() && lo < hi && lo >= 0.0,
            Self::Beta { alpha, beta } => alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite(),
            Self::Exponential { rate } => rate > 0.0 && rate.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid distribution {self}")))
        }
    }

    /// Short label used in result tables.
    pub fn label(&self) -> &'static str {
        match self {
            Self::Uniform { .. } => "uniform",
            Self::Beta { .. } => "beta",
            Self::Exponential { .. } => "exponential",
        }
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Uniform { lo, hi } => write!(f, "uniform({lo},{hi})"),
            Self::Beta { alpha, beta } => write!(f, "beta({alpha},{beta})"),
            Self::Exponential { rate } => write!(f, "exponential({rate})"),
        }
    }
}

/// Accepts `uniform`, `beta`, `exponential` with their default parameters,
/// or explicit forms such as `uniform(0,1)`, `beta(2,3)`, `exponential(1)`.
impl FromStr for DistributionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (name, args) = match s.split_once('(') {
            Some((name, rest)) => {
                let inner = rest
                    .strip_suffix(')')
                    .ok_or_else(|| Error::Config(format!("unbalanced parentheses in `{s}`")))?;
                let args = inner
                    .split(',')
                    .map(|a| a.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| Error::Config(format!("bad distribution arguments in `{s}`")))?;
                (name.to_string(), Some(args))
            }
            None => (s.clone(), None),
        };
        let spec = match (name.as_str(), args.as_deref()) {
            ("uniform", None) => Self::UNIFORM,
            ("uniform", Some(&[lo, hi])) => Self::Uniform { lo, hi },
            ("beta", None) => Self::BETA,
            ("beta", Some(&[alpha, beta])) => Self::Beta { alpha, beta },
            ("exponential" | "exp", None) => Self::EXPONENTIAL,
            ("exponential" | "exp", Some(&[rate])) => Self::Exponential { rate },
            _ => {
                return Err(Error::Config(format!(
                    "unknown distribution `{s}`; expected uniform, beta or exponential"
                )))
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// `n x m` i.i.d. draws; rows are not normalized.
pub fn sample_valuations<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    dist: &DistributionSpec,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    dist.validate()?;
    let bad = |e: &dyn fmt::Display| Error::InvalidParameter(e.to_string());
    let table = match *dist {
        DistributionSpec::Uniform { lo, hi } => {
            let d = Uniform::new_inclusive(lo, hi).map_err(|e| bad(&e))?;
            draw(n, m, &d, rng)
        }
        DistributionSpec::Beta { alpha, beta } => {
            let d = Beta::new(alpha, beta).map_err(|e| bad(&e))?;
            draw(n, m, &d, rng)
        }
        DistributionSpec::Exponential { rate } => {
            let d = Exp::new(rate).map_err(|e| bad(&e))?;
            draw(n, m, &d, rng)
        }
    };
    Ok(table)
}

fn draw<D: Distribution<f64>, R: Rng + ?Sized>(n: usize, m: usize, d: &D, rng: &mut R) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..m).map(|_| d.sample(rng)).collect()).collect()
}

/// Shuffles the agents and cuts them into `k` consecutive groups of `n/k`.
pub fn partition_uniform<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Districts> {
    if k == 0 || n == 0 || !n.is_multiple_of(k) {
        return Err(Error::Divisibility(format!("k = {k} does not divide n = {n}")));
    }
    let mut agents: Vec<usize> = (0..n).collect();
    agents.shuffle(rng);
    let size = n / k;
    Districts::new(agents.chunks(size).map(<[usize]>::to_vec).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn mean(table: &[Vec<f64>]) -> f64 {
        let count = table.iter().map(Vec::len).sum::<usize>() as f64;
        table.iter().flatten().sum::<f64>() / count
    }

    #[test]
    fn uniform_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = sample_valuations(200, 8, &DistributionSpec::UNIFORM, &mut rng).unwrap();
        assert!(t.iter().flatten().all(|&v| (1.0..=100.0).contains(&v)));
    }

    #[test]
    fn beta_and_exponential_means() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = sample_valuations(1000, 100, &DistributionSpec::BETA, &mut rng).unwrap();
        assert!((mean(&t) - 0.5).abs() < 0.01);
        let t = sample_valuations(1000, 100, &DistributionSpec::EXPONENTIAL, &mut rng).unwrap();
        assert!((mean(&t) - 0.25).abs() < 0.01);
    }

    #[test]
    fn invalid_distributions() {
        assert!(DistributionSpec::Uniform { lo: 5.0, hi: 1.0 }.validate().is_err());
        assert!(DistributionSpec::Beta { alpha: 0.0, beta: 1.0 }.validate().is_err());
        assert!(DistributionSpec::Exponential { rate: -1.0 }.validate().is_err());
        assert!("gamma".parse::<DistributionSpec>().is_err());
        assert!("uniform(3,1)".parse::<DistributionSpec>().is_err());
    }

    #[test]
    fn parse_distributions() {
        assert_eq!("uniform".parse::<DistributionSpec>().unwrap(), DistributionSpec::UNIFORM);
        assert_eq!("Beta".parse::<DistributionSpec>().unwrap(), DistributionSpec::BETA);
        assert_eq!(
            "exponential(2)".parse::<DistributionSpec>().unwrap(),
            DistributionSpec::Exponential { rate: 2.0 }
        );
        assert_eq!(
            "uniform(0, 1)".parse::<DistributionSpec>().unwrap(),
            DistributionSpec::Uniform { lo: 0.0, hi: 1.0 }
        );
    }

    #[test]
    fn partition_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = partition_uniform(4, 2, &mut rng).unwrap();
        assert_eq!(d.sizes(), vec![2, 2]);
        let d = partition_uniform(5, 1, &mut rng).unwrap();
        assert_eq!(d.k(), 1);
        let mut all = d.groups()[0].clone();
        all.sort_unstable();
        assert_eq!(all, vec![0, 1, 2, 3, 4]);
        let d = partition_uniform(100, 25, &mut rng).unwrap();
        assert_eq!(d.sizes(), vec![4; 25]);
        assert!(matches!(partition_uniform(10, 3, &mut rng), Err(Error::Divisibility(_))));
        assert!(partition_uniform(10, 0, &mut rng).is_err());
    }
}
