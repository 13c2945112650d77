//! Lower-bound instances and their certificates.
//!
//! Every generator fixes an alternative layout so that the index tie order
//! plays the role of the adversarial tie-breaking. Each one is paired with a
//! target mechanism and a closed-form ratio in [`LowerBoundSpec`].

use std::fmt;
use std::str::FromStr;

use crate::analysis::{distortion_exact, DistortionReport};
use crate::error::{Error, Result};
use crate::instance::{Districts, Instance};
use crate::mechanism::{MechanismSpec, OverRule};
use crate::rules::{InRule, ScoringRule};

/// Default value of the small perturbation.
pub const DEFAULT_EPS: f64 = 1e-6;

fn param(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg()))
    }
}

fn instance_from_blocks(blocks: Vec<Vec<Vec<f64>>>) -> Result<Instance> {
    let mut rows = Vec::new();
    let mut groups = Vec::new();
    for block in blocks {
        groups.push((rows.len()..rows.len() + block.len()).collect());
        rows.extend(block);
    }
    Instance::new(rows, Districts::new(groups)?)
}

/// `k` districts of `lambda` agents and `m > k` alternatives.
///
/// Layout: `a_1..a_k = 0..k-1`, `x = k`, fillers after. District 1 values
/// `a_1` at `1/m + eps` and everything else at `1/m - eps/(m-1)`; district
/// `l >= 2` values `a_l` at `1/2 + eps`, `x` at `1/2 - eps`.
pub fn gen_unanimous_lb(k: usize, m: usize, lambda: usize, eps: f64) -> Result<Instance> {
    param(k >= 2, || format!("k = {k} < 2"))?;
    param(m > k, || format!("m = {m} must exceed k = {k}"))?;
    param(lambda >= 1, || "lambda must be positive".into())?;
    param(eps > 0.0 && eps < 1.0 / (2.0 * m as f64), || {
        format!("eps = {eps} outside (0, 1/(2m))")
    })?;
    let mf = m as f64;
    let mut first = vec![1.0 / mf - eps / (mf - 1.0); m];
    first[0] = 1.0 / mf + eps;
    let mut blocks = vec![vec![first; lambda]];
    for l in 1..k {
        let mut row = vec![0.0; m];
        row[l] = 0.5 + eps;
        row[k] = 0.5 - eps;
        blocks.push(vec![row; lambda]);
    }
    instance_from_blocks(blocks)
}

/// Closed-form distortion of plurality-of-range on [`gen_unanimous_lb`].
pub fn unanimous_lb_ratio(k: usize, m: usize, eps: f64) -> f64 {
    let (kf, mf) = (k as f64, m as f64);
    let low = 1.0 / mf - eps / (mf - 1.0);
    let winner = 1.0 / mf + eps;
    let x = low + (kf - 1.0) * (0.5 - eps);
    let a_l = low + 0.5 + eps;
    x.max(a_l).max(winner) / winner
}

/// One divided district: `lambda` agents in `m/2` groups of `2*lambda/m`,
/// group `j` top-ranking `tops[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DividedDistrict {
    pub group_size: usize,
    pub rankings: Vec<Vec<usize>>,
    pub valuations: Vec<Vec<f64>>,
}

/// Builds a divided district over `alternatives` alternatives. Agents value
/// their top at 1, except the `uniform_group` (if any), which values every
/// alternative at `1/alternatives`. Rankings list the top first, then the
/// remaining alternatives by index.
pub fn divided_district(
    lambda: usize,
    m: usize,
    tops: &[usize],
    alternatives: usize,
    uniform_group: Option<usize>,
) -> Result<DividedDistrict> {
    if m == 0 || !m.is_multiple_of(2) {
        return Err(Error::Divisibility(format!("m = {m} must be even and positive")));
    }
    if !(2 * lambda).is_multiple_of(m) || lambda == 0 {
        return Err(Error::Divisibility(format!(
            "2*lambda/m = {}/{m} is not a positive integer",
            2 * lambda
        )));
    }
    param(tops.len() == m / 2, || format!("need {} tops, got {}", m / 2, tops.len()))?;
    param(tops.iter().all(|&t| t < alternatives), || {
        format!("tops {tops:?} exceed {alternatives} alternatives")
    })?;
    let mut sorted = tops.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    param(sorted.len() == tops.len(), || format!("tops {tops:?} are not distinct"))?;
    param(uniform_group.is_none_or(|g| g < tops.len()), || "uniform group out of range".into())?;

    let group_size = 2 * lambda / m;
    let mut rankings = Vec::with_capacity(lambda);
    let mut valuations = Vec::with_capacity(lambda);
    for (j, &top) in tops.iter().enumerate() {
        let mut ranking = vec![top];
        ranking.extend((0..alternatives).filter(|&a| a != top));
        let row = if uniform_group == Some(j) {
            vec![1.0 / alternatives as f64; alternatives]
        } else {
            let mut row = vec![0.0; alternatives];
            row[top] = 1.0;
            row
        };
        for _ in 0..group_size {
            rankings.push(ranking.clone());
            valuations.push(row.clone());
        }
    }
    Ok(DividedDistrict {
        group_size,
        rankings,
        valuations,
    })
}

/// One divided district followed by `k-1` two-alternative districts.
///
/// Layout: `y_1 = 0`, `b_1..b_{m/2-1} = 1..m/2-1`, `y_2..y_k = m/2..m/2+k-2`,
/// `x = m/2+k-1`, fillers after. District 1 is divided over
/// `{y_1, b_1, ..}` with the `y_1` group valuing everything at `1/m`;
/// district `l >= 2` values `y_l` and `x` at `1/2`. Under the index tie
/// order plurality-of-plurality elects `y_1`.
pub fn gen_divided_lb(k: usize, m: usize, lambda: usize) -> Result<Instance> {
    param(k >= 2, || format!("k = {k} < 2"))?;
    param(m.is_multiple_of(2) && m >= 2 * k, || format!("m = {m} must be even and at least 2k = {}", 2 * k))?;
    let half = m / 2;
    let tops: Vec<usize> = (0..half).collect();
    let divided = divided_district(lambda, m, &tops, m, Some(0))?;
    let x = half + k - 1;
    let mut blocks = vec![divided.valuations];
    for l in 2..=k {
        let mut row = vec![0.0; m];
        row[half + l - 2] = 0.5;
        row[x] = 0.5;
        blocks.push(vec![row; lambda]);
    }
    instance_from_blocks(blocks)
}

/// Closed-form distortion of plurality-of-plurality on [`gen_divided_lb`].
pub fn divided_lb_ratio(k: usize, m: usize) -> f64 {
    let (kf, mf) = (k as f64, m as f64);
    // SW(y_1) = 2λ/m²; best of b_j (+2λ/m), x (+(k-1)λ/2), y_l (+λ/2)
    1.0 + mf.max((kf - 1.0) * mf * mf / 4.0).max(mf * mf / 4.0)
}

/// `k` districts of `lambda` agents; district `l` values `a_l = l` at
/// `1/2 + eps` and `x = k` at `1/2 - eps`. Needs `m >= k + 1`.
pub fn gen_rand_unanimous_lb(k: usize, lambda: usize, eps: f64, m: usize) -> Result<Instance> {
    param(k >= 2, || format!("k = {k} < 2"))?;
    param(m > k, || format!("m = {m} must be at least k + 1 = {}", k + 1))?;
    param(lambda >= 1, || "lambda must be positive".into())?;
    param(eps > 0.0 && eps < 0.5, || format!("eps = {eps} outside (0, 1/2)"))?;
    let blocks = (0..k)
        .map(|l| {
            let mut row = vec![0.0; m];
            row[l] = 0.5 + eps;
            row[k] = 0.5 - eps;
            vec![row; lambda]
        })
        .collect();
    instance_from_blocks(blocks)
}

/// Closed-form distortion of any unanimous-in mechanism on
/// [`gen_rand_unanimous_lb`].
pub fn rand_unanimous_lb_ratio(k: usize, eps: f64) -> f64 {
    let mech = 0.5 + eps;
    (k as f64 * (0.5 - eps)).max(mech) / mech
}

fn exact_sqrt(k: usize) -> Option<usize> {
    let r = (k as f64).sqrt().round() as usize;
    (r * r == k).then_some(r)
}

/// `k` districts of `lambda` agents; district `l` values `a_l = l` at `1/2`
/// and each of `b_1..b_{√k} = k..k+√k-1` at `1/(2√k)`.
pub fn gen_sqrt_lb(k: usize, lambda: usize, m: usize) -> Result<Instance> {
    let r = exact_sqrt(k).ok_or_else(|| Error::InvalidParameter(format!("k = {k} is not a perfect square")))?;
    param(k >= 4, || format!("k = {k} < 4"))?;
    param(m >= k + r, || format!("m = {m} < k + sqrt(k) = {}", k + r))?;
    param(lambda >= 1, || "lambda must be positive".into())?;
    let share = 1.0 / (2.0 * r as f64);
    let blocks = (0..k)
        .map(|l| {
            let mut row = vec![0.0; m];
            row[l] = 0.5;
            row[k..k + r].iter_mut().for_each(|v| *v = share);
            vec![row; lambda]
        })
        .collect();
    instance_from_blocks(blocks)
}

/// `k` districts of `lambda` agents valuing only their favourite, at 1.
/// Agent `j` of a district favours `j mod (m-1)`; alternative `m-1` is never
/// anyone's favourite.
pub fn gen_top_or_infinite(k: usize, lambda: usize, m: usize) -> Result<Instance> {
    param(k >= 1 && lambda >= 1, || "k and lambda must be positive".into())?;
    param(m >= 2, || format!("m = {m} < 2"))?;
    let blocks = (0..k)
        .map(|_| {
            (0..lambda)
                .map(|j| {
                    let mut row = vec![0.0; m];
                    row[j % (m - 1)] = 1.0;
                    row
                })
                .collect()
        })
        .collect();
    instance_from_blocks(blocks)
}

/// Named lower-bound constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LowerBound {
    Unanimous,
    Divided,
    RandUnanimous,
    Sqrt,
    TopOrInfinite,
}

pub const LOWER_BOUND_IDS: &[&str] = &["unanimous", "divided", "rand-unanimous", "sqrt", "top-or-infinite"];

impl LowerBound {
    pub const ALL: [LowerBound; 5] = [
        Self::Unanimous,
        Self::Divided,
        Self::RandUnanimous,
        Self::Sqrt,
        Self::TopOrInfinite,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Unanimous => "unanimous",
            Self::Divided => "divided",
            Self::RandUnanimous => "rand-unanimous",
            Self::Sqrt => "sqrt",
            Self::TopOrInfinite => "top-or-infinite",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Self::Unanimous => "deterministic mechanisms with unanimous in-rules (Ω(km)); target plurality-of-range",
            Self::Divided => "one divided district plus k-1 unanimous ones (Ω(km²)); target plurality-of-plurality",
            Self::RandUnanimous => "randomized mechanisms with unanimous in-rules (Ω(k)); target uniform-of-range",
            Self::Sqrt => "randomized over deterministic in-rules (Ω(√k)); target uniform-of-range",
            Self::TopOrInfinite => "representative never top-ranked gives infinite distortion; target plurality-of-constant-(m-1)",
        }
    }
}

impl fmt::Display for LowerBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LowerBound {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|g| g.as_str() == s.trim())
            .ok_or_else(|| Error::UnknownRule {
                name: s.to_string(),
                valid: LOWER_BOUND_IDS.join(", "),
            })
    }
}

/// Construction parameters; `m` and `eps` fall back to per-construction
/// defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbParams {
    pub k: usize,
    pub m: Option<usize>,
    pub lambda: usize,
    pub eps: Option<f64>,
}

/// A generated instance together with its target mechanism and the ratio
/// that mechanism should achieve on it.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundSpec {
    pub name: LowerBound,
    pub k: usize,
    pub m: usize,
    pub lambda: usize,
    pub eps: Option<f64>,
    pub target_mechanism: MechanismSpec,
    pub expected_ratio: f64,
}

/// Builds the instance and its certificate.
pub fn build_lower_bound(kind: LowerBound, params: LbParams) -> Result<(LowerBoundSpec, Instance)> {
    let LbParams { k, lambda, .. } = params;
    let eps = params.eps.unwrap_or(DEFAULT_EPS);
    let plurality_of = |r| MechanismSpec::new(OverRule::Plurality, r);
    let uniform_of = |r| MechanismSpec::new(OverRule::Uniform, r);
    let (m, eps_used, instance, target, ratio) = match kind {
        LowerBound::Unanimous => {
            let m = params.m.unwrap_or(k + 1);
            let inst = gen_unanimous_lb(k, m, lambda, eps)?;
            (m, Some(eps), inst, plurality_of(InRule::Range), unanimous_lb_ratio(k, m, eps))
        }
        LowerBound::Divided => {
            let m = params.m.unwrap_or(2 * k);
            let inst = gen_divided_lb(k, m, lambda)?;
            let target = plurality_of(InRule::Scoring(ScoringRule::Plurality));
            (m, None, inst, target, divided_lb_ratio(k, m))
        }
        LowerBound::RandUnanimous => {
            let m = params.m.unwrap_or(k + 1);
            let inst = gen_rand_unanimous_lb(k, lambda, eps, m)?;
            (m, Some(eps), inst, uniform_of(InRule::Range), rand_unanimous_lb_ratio(k, eps))
        }
        LowerBound::Sqrt => {
            let r = exact_sqrt(k).unwrap_or(0);
            let m = params.m.unwrap_or(k + r);
            let inst = gen_sqrt_lb(k, lambda, m)?;
            (m, None, inst, uniform_of(InRule::Range), r as f64)
        }
        LowerBound::TopOrInfinite => {
            let m = params.m.unwrap_or(3);
            let inst = gen_top_or_infinite(k, lambda, m)?;
            (m, None, inst, plurality_of(InRule::Constant(m - 1)), f64::INFINITY)
        }
    };
    let spec = LowerBoundSpec {
        name: kind,
        k,
        m,
        lambda,
        eps: eps_used,
        target_mechanism: target,
        expected_ratio: ratio,
    };
    Ok((spec, instance))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundMode {
    /// `|ratio - expected| <= tol`
    Within,
    /// `ratio >= expected - tol`
    AtLeast,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub report: DistortionReport,
    pub expected: f64,
    pub tol: f64,
    pub mode: BoundMode,
    pub pass: bool,
}

pub fn verify_bound(
    instance: &Instance,
    spec: &MechanismSpec,
    expected_ratio: f64,
    tol: f64,
    mode: BoundMode,
) -> Result<BoundCheck> {
    let report = distortion_exact(instance, spec)?;
    let ratio = report.ratio;
    let pass = match mode {
        _ if ratio.is_infinite() && expected_ratio.is_infinite() => true,
        BoundMode::Within => (ratio - expected_ratio).abs() <= tol,
        BoundMode::AtLeast => ratio >= expected_ratio - tol,
    };
    Ok(BoundCheck {
        report,
        expected: expected_ratio,
        tol,
        mode,
        pass,
    })
}
