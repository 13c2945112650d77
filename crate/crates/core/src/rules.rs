//! Single-district (equivalently, centralized) voting rules.
//!
//! Deterministic rules return one alternative; randomized point-voting rules
//! return a [`Lottery`]. [`InRule`] wraps every rule behind one interface so
//! that a mechanism can run any of them inside each district.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::instance::{DistrictView, TieOrder};
use crate::lottery::{Lottery, LOTTERY_TOL};

/// Positional scores `s_1 >= ... >= s_m >= 0`, not all zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoringVector(Vec<f64>);

impl ScoringVector {
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::InvalidScoringVector("empty".into()));
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidScoringVector("non-finite entry".into()));
        }
        if scores.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidScoringVector(format!(
                "not non-increasing: {scores:?}"
            )));
        }
        if *scores.last().unwrap() < 0.0 {
            return Err(Error::InvalidScoringVector("negative last entry".into()));
        }
        if scores.iter().all(|&s| s == 0.0) {
            return Err(Error::InvalidScoringVector("all entries zero".into()));
        }
        Ok(Self(scores))
    }

    /// `(1, 0, ..., 0)`
    pub fn plurality(m: usize) -> Self {
        let mut s = vec![0.0; m];
        s[0] = 1.0;
        Self(s)
    }

    /// `(1, ..., 1, 0)`; needs `m >= 2`.
    pub fn veto(m: usize) -> Self {
        let mut s = vec![1.0; m];
        s[m - 1] = 0.0;
        Self(s)
    }

    /// `(m-1, m-2, ..., 0)`
    pub fn borda(m: usize) -> Self {
        Self((0..m).rev().map(|x| x as f64).collect())
    }

    /// `(1, 1/2, ..., 1/m)`
    pub fn harmonic(m: usize) -> Self {
        Self((1..=m).map(|t| 1.0 / t as f64).collect())
    }

    pub fn scores(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Rank-selection probabilities `p_1 >= ... >= p_m >= 0` summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PointVotingVector(Vec<f64>);

impl PointVotingVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidPointVector("empty".into()));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidPointVector(format!(
                "negative or non-finite entry: {probs:?}"
            )));
        }
        if probs.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidPointVector(format!(
                "not non-increasing: {probs:?}"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > LOTTERY_TOL {
            return Err(Error::InvalidPointVector(format!("sums to {sum}")));
        }
        Ok(Self(probs))
    }

    pub fn uniform(m: usize) -> Self {
        Self(vec![1.0 / m as f64; m])
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn non_empty(view: &DistrictView<'_>) -> Result<()> {
    if view.is_empty() {
        Err(Error::EmptyView)
    } else {
        Ok(())
    }
}

fn same_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Positional scoring winner; equal totals go to the higher-priority
/// alternative.
pub fn scoring_winner(view: &DistrictView<'_>, s: &ScoringVector, tie: &TieOrder) -> Result<usize> {
    non_empty(view)?;
    same_len(view.m(), s.len())?;
    tie.check_len(view.m())?;
    let mut totals = vec![0.0; view.m()];
    for i in 0..view.len() {
        for (&a, &score) in view.ranking(i).iter().zip(s.scores()) {
            totals[a] += score;
        }
    }
    Ok(tie.argmax(&totals).expect("m >= 1"))
}

/// Alternative of maximum welfare among the view's agents.
pub fn range_voting_winner(view: &DistrictView<'_>, tie: &TieOrder) -> Result<usize> {
    non_empty(view)?;
    tie.check_len(view.m())?;
    Ok(tie.argmax(&view.welfare()).expect("m >= 1"))
}

/// Favourite alternative of the view's first agent.
pub fn first_dictator(view: &DistrictView<'_>) -> Result<usize> {
    non_empty(view)?;
    Ok(view.ranking(0)[0])
}

/// `Pr[a] = (1/n) * sum_i p[rank of a for agent i]`.
pub fn point_voting_distribution(view: &DistrictView<'_>, p: &PointVotingVector) -> Result<Lottery> {
    non_empty(view)?;
    same_len(view.m(), p.len())?;
    let mut probs = vec![0.0; view.m()];
    for i in 0..view.len() {
        for (&a, &pt) in view.ranking(i).iter().zip(p.probs()) {
            probs[a] += pt;
        }
    }
    let n = view.len() as f64;
    probs.iter_mut().for_each(|x| *x /= n);
    Lottery::new(probs)
}

/// Scales a scoring vector to sum to one.
pub fn normalize_scoring(s: &ScoringVector) -> Result<PointVotingVector> {
    let total: f64 = s.scores().iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidScoringVector("zero-sum".into()));
    }
    PointVotingVector::new(s.scores().iter().map(|x| x / total).collect())
}

/// Entrywise convex combination of point-voting vectors.
pub fn mix_point_voting(vectors: &[PointVotingVector], weights: &[f64]) -> Result<PointVotingVector> {
    same_len(vectors.len(), weights.len())?;
    let m = vectors.first().ok_or(Error::InvalidPointVector("no vectors".into()))?.len();
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidParameter(format!("negative weight in {weights:?}")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > LOTTERY_TOL {
        return Err(Error::WeightSum(total));
    }
    let mut out = vec![0.0; m];
    for (v, &w) in vectors.iter().zip(weights) {
        same_len(m, v.len())?;
        for (o, &p) in out.iter_mut().zip(v.probs()) {
            *o += w * p;
        }
    }
    PointVotingVector::new(out)
}

/// Half uniform, half normalized harmonic.
pub fn bchlps_vector(m: usize) -> PointVotingVector {
    let harmonic = normalize_scoring(&ScoringVector::harmonic(m)).expect("harmonic sum > 0");
    mix_point_voting(&[PointVotingVector::uniform(m), harmonic], &[0.5, 0.5])
        .expect("both constituents are valid point-voting vectors")
}

/// Positional scoring rules with a name, or an explicit vector.
#[derive(Debug, Clone, PartialEq)]
pub enum ScoringRule {
    Plurality,
    Veto,
    Borda,
    Harmonic,
    Custom(ScoringVector),
}

impl ScoringRule {
    pub fn vector(&self, m: usize) -> Result<ScoringVector> {
        match self {
            Self::Plurality => Ok(ScoringVector::plurality(m)),
            Self::Veto if m < 2 => Err(Error::TooFewAlternatives(m)),
            Self::Veto => Ok(ScoringVector::veto(m)),
            Self::Borda if m < 2 => Err(Error::TooFewAlternatives(m)),
            Self::Borda => Ok(ScoringVector::borda(m)),
            Self::Harmonic => Ok(ScoringVector::harmonic(m)),
            Self::Custom(s) => {
                same_len(m, s.len())?;
                Ok(s.clone())
            }
        }
    }

    fn name(&self) -> String {
        match self {
            Self::Plurality => "plurality".into(),
            Self::Veto => "veto".into(),
            Self::Borda => "borda".into(),
            Self::Harmonic => "harmonic".into(),
            Self::Custom(s) => format!("scores/{}", join(s.scores())),
        }
    }
}

/// Point-voting schemes.
#[derive(Debug, Clone, PartialEq)]
pub enum PointRule {
    /// Normalized scoring vector.
    Proportional(ScoringRule),
    Bchlps,
    UniformRandom,
    Custom(PointVotingVector),
}

impl PointRule {
    pub fn vector(&self, m: usize) -> Result<PointVotingVector> {
        match self {
            Self::Proportional(rule) => normalize_scoring(&rule.vector(m)?),
            Self::Bchlps => Ok(bchlps_vector(m)),
            Self::UniformRandom => Ok(PointVotingVector::uniform(m)),
            Self::Custom(p) => {
                same_len(m, p.len())?;
                Ok(p.clone())
            }
        }
    }

    fn name(&self) -> String {
        match self {
            Self::Proportional(ScoringRule::Custom(s)) => format!("prop-scores/{}", join(s.scores())),
            Self::Proportional(rule) => format!("prop-{}", rule.name()),
            Self::Bchlps => "bchlps".into(),
            Self::UniformRandom => "uniform-random".into(),
            Self::Custom(p) => format!("pv/{}", join(p.probs())),
        }
    }
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(f64::to_string).collect::<Vec<_>>().join("/")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Information {
    Cardinal,
    Ordinal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Determinism {
    Deterministic,
    Randomized,
}

/// Registry metadata for a rule.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleDescriptor {
    pub name: String,
    pub info: Information,
    pub determinism: Determinism,
    /// A common favourite of every voter is always elected.
    pub unanimous: bool,
    /// Known centralized distortion bound, if any.
    pub delta: Option<f64>,
}

/// A rule usable inside a district.
#[derive(Debug, Clone, PartialEq)]
pub enum InRule {
    Scoring(ScoringRule),
    /// Welfare maximizer over the district.
    Range,
    /// Favourite of the district's first agent.
    Dictator,
    PointVoting(PointRule),
    /// Always returns the given alternative, regardless of the votes.
    Constant(usize),
}

/// Identifiers accepted by [`InRule::from_str`].
pub const IN_RULE_IDS: &[&str] = &[
    "plurality",
    "veto",
    "borda",
    "harmonic",
    "range",
    "first",
    "prop-plurality",
    "prop-veto",
    "prop-borda",
    "prop-harmonic",
    "bchlps",
    "uniform-random",
    "constant-<a>",
    "scores/<s1>/.../<sm>",
    "pv/<p1>/.../<pm>",
];

impl InRule {
    pub fn descriptor(&self) -> RuleDescriptor {
        use Determinism::*;
        use Information::*;
        let (info, determinism, unanimous, delta) = match self {
            Self::Range => (Cardinal, Deterministic, true, Some(1.0)),
            Self::Dictator => (Ordinal, Deterministic, true, None),
            Self::Constant(_) => (Ordinal, Deterministic, false, None),
            Self::Scoring(rule) => {
                // a common favourite collects s_1 from everyone, which is the
                // unique maximum exactly when s_1 > s_2
                let unanimous = match rule {
                    ScoringRule::Veto => false,
                    ScoringRule::Custom(s) => s.len() < 2 || s.scores()[0] > s.scores()[1],
                    _ => true,
                };
                (Ordinal, Deterministic, unanimous, None)
            }
            Self::PointVoting(rule) => {
                let unanimous = match rule {
                    PointRule::Proportional(ScoringRule::Plurality) => true,
                    PointRule::Custom(p) => p.probs()[0] == 1.0,
                    _ => false,
                };
                (Ordinal, Randomized, unanimous, None)
            }
        };
        RuleDescriptor {
            name: self.to_string(),
            info,
            determinism,
            unanimous,
            delta,
        }
    }

    pub fn is_deterministic(&self) -> bool {
        !matches!(self, Self::PointVoting(_))
    }

    pub fn is_cardinal(&self) -> bool {
        matches!(self, Self::Range)
    }

    /// Deterministic winner within the view.
    pub fn winner(&self, view: &DistrictView<'_>, tie: &TieOrder) -> Result<usize> {
        match self {
            Self::Scoring(rule) => scoring_winner(view, &rule.vector(view.m())?, tie),
            Self::Range => range_voting_winner(view, tie),
            Self::Dictator => first_dictator(view),
            Self::Constant(a) => {
                non_empty(view)?;
                if *a >= view.m() {
                    return Err(Error::AlternativeOutOfRange {
                        alternative: *a,
                        m: view.m(),
                    });
                }
                Ok(*a)
            }
            Self::PointVoting(_) => Err(Error::NotDeterministic(self.to_string())),
        }
    }

    /// Outcome distribution within the view; degenerate for deterministic
    /// rules.
    pub fn lottery(&self, view: &DistrictView<'_>, tie: &TieOrder) -> Result<Lottery> {
        match self {
            Self::PointVoting(rule) => point_voting_distribution(view, &rule.vector(view.m())?),
            _ => Ok(Lottery::degenerate(view.m(), self.winner(view, tie)?)),
        }
    }
}

impl fmt::Display for InRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Scoring(rule) => f.write_str(&rule.name()),
            Self::Range => f.write_str("range"),
            Self::Dictator => f.write_str("first"),
            Self::PointVoting(rule) => f.write_str(&rule.name()),
            Self::Constant(a) => write!(f, "constant-{a}"),
        }
    }
}

fn unknown(name: &str) -> Error {
    Error::UnknownRule {
        name: name.to_string(),
        valid: IN_RULE_IDS.join(", "),
    }
}

fn parse_floats(name: &str, parts: &str) -> Result<Vec<f64>> {
    parts
        .split('/')
        .map(|x| x.trim().parse::<f64>().map_err(|_| unknown(name)))
        .collect()
}

fn parse_scoring(s: &str) -> Option<ScoringRule> {
    Some(match s {
        "plurality" | "pl" => ScoringRule::Plurality,
        "veto" => ScoringRule::Veto,
        "borda" => ScoringRule::Borda,
        "harmonic" => ScoringRule::Harmonic,
        _ => return None,
    })
}

impl FromStr for InRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let name = s.trim().to_ascii_lowercase();
        if let Some(rule) = parse_scoring(&name) {
            return Ok(Self::Scoring(rule));
        }
        let rule = match name.as_str() {
            "range" | "rv" | "range-voting" => Self::Range,
            "first" | "dictator" => Self::Dictator,
            "bchlps" => Self::PointVoting(PointRule::Bchlps),
            "uniform-random" | "random" => Self::PointVoting(PointRule::UniformRandom),
            _ => {
                if let Some(rest) = name.strip_prefix("prop-scores/") {
                    let s = ScoringVector::new(parse_floats(&name, rest)?)?;
                    Self::PointVoting(PointRule::Proportional(ScoringRule::Custom(s)))
                } else if let Some(rest) = name.strip_prefix("prop-") {
                    let base = parse_scoring(rest).ok_or_else(|| unknown(&name))?;
                    Self::PointVoting(PointRule::Proportional(base))
                } else if let Some(rest) = name.strip_prefix("scores/") {
                    Self::Scoring(ScoringRule::Custom(ScoringVector::new(parse_floats(&name, rest)?)?))
                } else if let Some(rest) = name.strip_prefix("pv/") {
                    Self::PointVoting(PointRule::Custom(PointVotingVector::new(parse_floats(&name, rest)?)?))
                } else if let Some(rest) = name.strip_prefix("constant-") {
                    Self::Constant(rest.parse().map_err(|_| unknown(&name))?)
                } else {
                    return Err(unknown(&name));
                }
            }
        };
        Ok(rule)
    }
}
