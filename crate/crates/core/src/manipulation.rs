//! Searching for profitable misreports.
//!
//! Utilities under randomized mechanisms are expectations under the exact
//! winner distribution. Mechanisms without a closed form (plurality over
//! randomized representatives) fall back to a fixed-seed empirical
//! distribution when their mode is Monte Carlo, so verdicts stay
//! reproducible.

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::instance::{derive_ordinal, rank_row, Instance, OrdinalProfile};
use crate::lottery::Lottery;
use crate::mechanism::{winner_distribution_for, EvalMode, MechanismSampler, MechanismSpec};

/// Largest `m` for which all `m!` rankings are enumerated.
pub const MAX_EXHAUSTIVE_M: usize = 6;

/// Slack below which a deviation does not count as profitable.
pub const UTILITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportSpace {
    /// Every ranking of the alternatives.
    ExhaustiveOrdinal,
    /// `count` unit-sum valuation rows drawn uniformly from the simplex.
    SampledCardinal { count: usize },
}

/// A report different from the agent's truthful one.
#[derive(Debug, Clone, PartialEq)]
pub struct Misreport {
    pub ranking: Vec<usize>,
    /// Reported valuation row, for cardinal in-district rules.
    pub valuation: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManipulationVerdict {
    pub agent: usize,
    pub truthful_utility: f64,
    pub best_deviation_utility: f64,
    /// Present iff some report beats the truth by more than [`UTILITY_TOL`].
    pub counterexample: Option<Misreport>,
}

impl ManipulationVerdict {
    pub fn is_manipulable(&self) -> bool {
        self.counterexample.is_some()
    }
}

/// Compares the agent's truthful expected utility with the best report in
/// `space`. `seed` drives both report sampling and any Monte Carlo
/// evaluation; each report is evaluated with the same seed.
pub fn check_strategyproof(
    instance: &Instance,
    spec: &MechanismSpec,
    agent: usize,
    space: ReportSpace,
    seed: u64,
) -> Result<ManipulationVerdict> {
    if agent >= instance.n() {
        return Err(Error::AgentOutOfRange {
            agent,
            n: instance.n(),
        });
    }
    let m = instance.m();
    let tie = spec.tie.order(m)?;
    let truthful_profile = derive_ordinal(instance, &tie)?;
    let truth = instance.row(agent);
    let utility = |lottery: &Lottery| -> f64 { lottery.probs().iter().zip(truth).map(|(p, v)| p * v).sum() };

    let truthful_utility = utility(&outcome(instance, &truthful_profile, spec, seed)?);

    let reports: Vec<Misreport> = match space {
        ReportSpace::ExhaustiveOrdinal => {
            if m > MAX_EXHAUSTIVE_M {
                return Err(Error::TooManyAlternatives {
                    m,
                    max: MAX_EXHAUSTIVE_M,
                });
            }
            (0..m)
                .permutations(m)
                .map(|ranking| {
                    let valuation = spec.in_rule.is_cardinal().then(|| linear_row(&ranking));
                    Misreport { ranking, valuation }
                })
                .collect()
        }
        ReportSpace::SampledCardinal { count } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count)
                .map(|_| {
                    let row = simplex_point(m, &mut rng);
                    Misreport {
                        ranking: rank_row(&row, &tie),
                        valuation: Some(row),
                    }
                })
                .collect()
        }
    };

    let mut best = f64::NEG_INFINITY;
    let mut best_report = None;
    for report in reports {
        let (reported, profile) = apply(instance, &truthful_profile, spec, agent, &report)?;
        let u = utility(&outcome(&reported, &profile, spec, seed)?);
        if u > best {
            best = u;
            best_report = Some(report);
        }
    }
    if best == f64::NEG_INFINITY {
        best = truthful_utility;
    }
    let counterexample = if best > truthful_utility + UTILITY_TOL {
        best_report
    } else {
        None
    };
    Ok(ManipulationVerdict {
        agent,
        truthful_utility,
        best_deviation_utility: best,
        counterexample,
    })
}

/// Runs [`check_strategyproof`] for every agent and returns the first
/// manipulable verdict, if any.
pub fn find_manipulation(
    instance: &Instance,
    spec: &MechanismSpec,
    space: ReportSpace,
    seed: u64,
) -> Result<Option<ManipulationVerdict>> {
    for agent in 0..instance.n() {
        let verdict = check_strategyproof(instance, spec, agent, space, seed)?;
        if verdict.is_manipulable() {
            return Ok(Some(verdict));
        }
    }
    Ok(None)
}

fn apply(
    instance: &Instance,
    profile: &OrdinalProfile,
    spec: &MechanismSpec,
    agent: usize,
    report: &Misreport,
) -> Result<(Instance, OrdinalProfile)> {
    let profile = profile.with_ranking(agent, report.ranking.clone())?;
    let reported = match (&report.valuation, spec.in_rule.is_cardinal()) {
        (Some(row), true) => instance.with_row(agent, row.clone())?,
        _ => instance.clone(),
    };
    Ok((reported, profile))
}

fn outcome(instance: &Instance, profile: &OrdinalProfile, spec: &MechanismSpec, seed: u64) -> Result<Lottery> {
    match (winner_distribution_for(instance, profile, spec), spec.mode) {
        (Err(Error::UnsupportedCombination(_)), EvalMode::MonteCarlo { samples }) if samples > 0 => {
            let sampler = MechanismSampler::for_profile(instance, profile, spec)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut freq = vec![0.0; instance.m()];
            for _ in 0..samples {
                freq[sampler.sample(&mut rng)] += 1.0;
            }
            freq.iter_mut().for_each(|f| *f /= samples as f64);
            Lottery::new(freq)
        }
        (result, _) => result,
    }
}

/// Strictly decreasing unit-sum row realizing `ranking`.
fn linear_row(ranking: &[usize]) -> Vec<f64> {
    let m = ranking.len();
    let total = (m * (m + 1) / 2) as f64;
    let mut row = vec![0.0; m];
    for (t, &a) in ranking.iter().enumerate() {
        row[a] = (m - t) as f64 / total;
    }
    row
}

/// Uniform draw from the probability simplex (normalized exponentials).
pub(crate) fn simplex_point<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let sum: f64 = raw.iter().sum();
    raw.iter().map(|x| x / sum).collect()
}
