//! Distributed mechanisms: an in-district rule elects one representative per
//! district, and an over-districts rule picks the winner among them.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::instance::{derive_ordinal, restrict_to_district, Instance, OrdinalProfile, TieOrder};
use crate::lottery::Lottery;
use crate::rules::InRule;

/// Rule applied to the district representatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OverRule {
    /// Alternative representing the most districts.
    Plurality,
    /// Representative of a uniformly random district.
    Uniform,
    /// Representative of a district drawn with probability `n_d / n`.
    Proportional,
    /// Representative of district 0.
    First,
}

pub const OVER_RULE_IDS: &[&str] = &["plurality", "uniform", "proportional", "first"];

impl OverRule {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Plurality => "plurality",
            Self::Uniform => "uniform",
            Self::Proportional => "proportional",
            Self::First => "first",
        }
    }

    pub fn is_deterministic(self) -> bool {
        matches!(self, Self::Plurality | Self::First)
    }
}

impl FromStr for OverRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "plurality" | "pl" => Ok(Self::Plurality),
            "uniform" => Ok(Self::Uniform),
            "proportional" | "prop" => Ok(Self::Proportional),
            "first" => Ok(Self::First),
            other => Err(Error::UnknownRule {
                name: other.to_string(),
                valid: OVER_RULE_IDS.join(", "),
            }),
        }
    }
}

/// Tie-breaking policy for a mechanism.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Lower alternative index wins.
    #[default]
    Index,
    Fixed(TieOrder),
}

impl TieBreak {
    pub fn order(&self, m: usize) -> Result<TieOrder> {
        match self {
            Self::Index => Ok(TieOrder::index(m)),
            Self::Fixed(order) => {
                order.check_len(m)?;
                Ok(order.clone())
            }
        }
    }
}

/// How a mechanism's welfare is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvalMode {
    /// Closed-form winner distribution.
    #[default]
    Exact,
    /// Average over sampled winners.
    MonteCarlo { samples: usize },
}

/// A named `over-of-in` mechanism.
#[derive(Debug, Clone, PartialEq)]
pub struct MechanismSpec {
    pub in_rule: InRule,
    pub over_rule: OverRule,
    pub tie: TieBreak,
    pub mode: EvalMode,
}

impl MechanismSpec {
    pub fn new(over_rule: OverRule, in_rule: InRule) -> Self {
        Self {
            in_rule,
            over_rule,
            tie: TieBreak::Index,
            mode: EvalMode::Exact,
        }
    }

    pub fn with_tie(mut self, tie: TieBreak) -> Self {
        self.tie = tie;
        self
    }

    pub fn with_mode(mut self, mode: EvalMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn is_deterministic(&self) -> bool {
        self.in_rule.is_deterministic() && self.over_rule.is_deterministic()
    }
}

impl fmt::Display for MechanismSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-of-{}", self.over_rule.as_str(), self.in_rule)
    }
}

impl FromStr for MechanismSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (over, inner) = s.split_once("-of-").ok_or_else(|| Error::UnknownRule {
            name: s.to_string(),
            valid: format!(
                "<over>-of-<in> with <over> in {{{}}} and <in> in {{{}}}",
                OVER_RULE_IDS.join(", "),
                crate::rules::IN_RULE_IDS.join(", ")
            ),
        })?;
        Ok(Self::new(over.parse()?, inner.parse()?))
    }
}

/// One lottery per district over its representative.
#[derive(Debug, Clone, PartialEq)]
pub struct RepresentativeProfile {
    lotteries: Vec<Lottery>,
}

impl RepresentativeProfile {
    pub fn lotteries(&self) -> &[Lottery] {
        &self.lotteries
    }

    pub fn k(&self) -> usize {
        self.lotteries.len()
    }

    /// Representatives when every district lottery is degenerate.
    pub fn deterministic(&self) -> Option<Vec<usize>> {
        self.lotteries.iter().map(Lottery::as_degenerate).collect()
    }
}

/// Runs the in-district rule in every district.
pub fn district_representatives(instance: &Instance, spec: &MechanismSpec) -> Result<RepresentativeProfile> {
    let tie = spec.tie.order(instance.m())?;
    let profile = derive_ordinal(instance, &tie)?;
    representatives_for(instance, &profile, spec)
}

/// As [`district_representatives`], with an explicit (possibly misreported)
/// ordinal profile.
pub fn representatives_for(
    instance: &Instance,
    profile: &OrdinalProfile,
    spec: &MechanismSpec,
) -> Result<RepresentativeProfile> {
    let tie = spec.tie.order(instance.m())?;
    let lotteries = (0..instance.k())
        .map(|d| spec.in_rule.lottery(&restrict_to_district(instance, profile, d)?, &tie))
        .collect::<Result<_>>()?;
    Ok(RepresentativeProfile { lotteries })
}

/// Alternative representing the most districts.
pub fn plurality_over(reps: &[usize], tie: &TieOrder) -> Result<usize> {
    if reps.is_empty() {
        return Err(Error::EmptyView);
    }
    let mut counts = vec![0.0; tie.len()];
    for &a in reps {
        *counts.get_mut(a).ok_or(Error::AlternativeOutOfRange {
            alternative: a,
            m: tie.len(),
        })? += 1.0;
    }
    Ok(tie.argmax(&counts).expect("non-empty"))
}

fn deterministic_winner(reps: &[usize], spec: &MechanismSpec, tie: &TieOrder) -> Result<usize> {
    match spec.over_rule {
        OverRule::Plurality => plurality_over(reps, tie),
        OverRule::First => reps.first().copied().ok_or(Error::EmptyView),
        _ => Err(Error::NotDeterministic(spec.to_string())),
    }
}

/// Winner of a fully deterministic mechanism.
pub fn run_deterministic(instance: &Instance, spec: &MechanismSpec) -> Result<usize> {
    if !spec.is_deterministic() {
        return Err(Error::NotDeterministic(spec.to_string()));
    }
    let tie = spec.tie.order(instance.m())?;
    let reps = district_representatives(instance, spec)?
        .deterministic()
        .expect("deterministic in-rule");
    deterministic_winner(&reps, spec, &tie)
}

/// Exact distribution of the winner.
pub fn winner_distribution(instance: &Instance, spec: &MechanismSpec) -> Result<Lottery> {
    let tie = spec.tie.order(instance.m())?;
    let profile = derive_ordinal(instance, &tie)?;
    winner_distribution_for(instance, &profile, spec)
}

/// As [`winner_distribution`], with an explicit ordinal profile.
pub fn winner_distribution_for(
    instance: &Instance,
    profile: &OrdinalProfile,
    spec: &MechanismSpec,
) -> Result<Lottery> {
    let tie = spec.tie.order(instance.m())?;
    let reps = representatives_for(instance, profile, spec)?;
    let m = instance.m();
    match spec.over_rule {
        OverRule::Uniform => {
            let w = 1.0 / reps.k() as f64;
            Lottery::mix(reps.lotteries.iter().map(|l| (w, l)), m)
        }
        OverRule::Proportional => {
            let n = instance.n() as f64;
            let sizes = instance.districts().sizes();
            Lottery::mix(
                sizes.iter().zip(&reps.lotteries).map(|(&s, l)| (s as f64 / n, l)),
                m,
            )
        }
        OverRule::First => Ok(reps.lotteries[0].clone()),
        OverRule::Plurality => match reps.deterministic() {
            Some(winners) => Ok(Lottery::degenerate(m, plurality_over(&winners, &tie)?)),
            // a single representative wins outright
            None if reps.k() == 1 => Ok(reps.lotteries[0].clone()),
            None => Err(Error::UnsupportedCombination(spec.to_string())),
        },
    }
}

/// Draws winners with the district lotteries computed once up front.
#[derive(Debug, Clone)]
pub struct MechanismSampler {
    reps: RepresentativeProfile,
    over_rule: OverRule,
    tie: TieOrder,
    /// agent-count prefix sums, for proportional district selection
    cumulative: Vec<usize>,
}

impl MechanismSampler {
    pub fn new(instance: &Instance, spec: &MechanismSpec) -> Result<Self> {
        let tie = spec.tie.order(instance.m())?;
        let profile = derive_ordinal(instance, &tie)?;
        Self::for_profile(instance, &profile, spec)
    }

    pub fn for_profile(instance: &Instance, profile: &OrdinalProfile, spec: &MechanismSpec) -> Result<Self> {
        let cumulative = instance
            .districts()
            .sizes()
            .iter()
            .scan(0, |acc, &s| {
                *acc += s;
                Some(*acc)
            })
            .collect();
        Ok(Self {
            reps: representatives_for(instance, profile, spec)?,
            over_rule: spec.over_rule,
            tie: spec.tie.order(instance.m())?,
            cumulative,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let lotteries = &self.reps.lotteries;
        // Districts vote independently, so for single-district over-rules
        // realizing only the chosen district has the same law.
        let district = match self.over_rule {
            OverRule::Plurality => {
                let realized: Vec<usize> = lotteries.iter().map(|l| l.sample(rng)).collect();
                return plurality_over(&realized, &self.tie).expect("k >= 1");
            }
            OverRule::First => 0,
            OverRule::Uniform => rng.random_range(0..lotteries.len()),
            OverRule::Proportional => {
                let n = *self.cumulative.last().expect("k >= 1");
                let agent = rng.random_range(0..n);
                self.cumulative.partition_point(|&c| c <= agent)
            }
        };
        lotteries[district].sample(rng)
    }
}

/// One sampled winner.
pub fn sample_winner<R: Rng + ?Sized>(instance: &Instance, spec: &MechanismSpec, rng: &mut R) -> Result<usize> {
    Ok(MechanismSampler::new(instance, spec)?.sample(rng))
}
