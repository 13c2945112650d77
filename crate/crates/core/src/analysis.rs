//! Social welfare and distortion.

use rand::Rng;

use crate::error::{Error, Result};
use crate::instance::{Instance, TieOrder};
use crate::lottery::Lottery;
use crate::mechanism::{winner_distribution, MechanismSampler, MechanismSpec};

/// Column sums of the valuation table.
pub fn welfare_vector(instance: &Instance) -> Vec<f64> {
    let mut sw = vec![0.0; instance.m()];
    for row in instance.valuations() {
        for (total, v) in sw.iter_mut().zip(row) {
            *total += v;
        }
    }
    sw
}

pub fn social_welfare(instance: &Instance, alternative: usize) -> Result<f64> {
    if alternative >= instance.m() {
        return Err(Error::AlternativeOutOfRange {
            alternative,
            m: instance.m(),
        });
    }
    Ok(instance.valuations().iter().map(|row| row[alternative]).sum())
}

pub fn expected_welfare(instance: &Instance, lottery: &Lottery) -> Result<f64> {
    if lottery.len() != instance.m() {
        return Err(Error::DimensionMismatch {
            expected: instance.m(),
            found: lottery.len(),
        });
    }
    Ok(welfare_vector(instance)
        .iter()
        .zip(lottery.probs())
        .map(|(sw, p)| sw * p)
        .sum())
}

/// Welfare-maximizing alternative and its welfare.
pub fn optimal_alternative(instance: &Instance, tie: &TieOrder) -> Result<(usize, f64)> {
    tie.check_len(instance.m())?;
    let sw = welfare_vector(instance);
    let best = tie.argmax(&sw).expect("m >= 2");
    Ok((best, sw[best]))
}

/// Optimal welfare against the mechanism's (expected) welfare.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistortionReport {
    pub optimal_alt: usize,
    pub optimal_sw: f64,
    pub mechanism_expected_sw: f64,
    /// `f64::INFINITY` when the mechanism gets zero welfare and the optimum
    /// does not.
    pub ratio: f64,
}

impl DistortionReport {
    pub fn new(optimal_alt: usize, optimal_sw: f64, mechanism_expected_sw: f64) -> Self {
        let ratio = if mechanism_expected_sw > 0.0 {
            optimal_sw / mechanism_expected_sw
        } else if optimal_sw > 0.0 {
            f64::INFINITY
        } else {
            1.0
        };
        Self {
            optimal_alt,
            optimal_sw,
            mechanism_expected_sw,
            ratio,
        }
    }

    pub fn is_infinite(&self) -> bool {
        self.ratio.is_infinite()
    }
}

pub fn distortion_exact(instance: &Instance, spec: &MechanismSpec) -> Result<DistortionReport> {
    let lottery = winner_distribution(instance, spec)?;
    let (opt, opt_sw) = optimal_alternative(instance, &spec.tie.order(instance.m())?)?;
    Ok(DistortionReport::new(opt, opt_sw, expected_welfare(instance, &lottery)?))
}

/// Distortion with the mechanism's welfare estimated from `samples` draws.
pub fn distortion_empirical<R: Rng + ?Sized>(
    instance: &Instance,
    spec: &MechanismSpec,
    samples: usize,
    rng: &mut R,
) -> Result<DistortionReport> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be positive".into()));
    }
    let sampler = MechanismSampler::new(instance, spec)?;
    let sw = welfare_vector(instance);
    let mut counts = vec![0usize; instance.m()];
    for _ in 0..samples {
        counts[sampler.sample(rng)] += 1;
    }
    let n = samples as f64;
    let mean: f64 = sw.iter().zip(&counts).map(|(w, &c)| w * (c as f64 / n)).sum();
    let (opt, opt_sw) = optimal_alternative(instance, &spec.tie.order(instance.m())?)?;
    Ok(DistortionReport::new(opt, opt_sw, mean))
}
