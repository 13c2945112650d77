//! Instances, district partitions, ordinal profiles and tie-breaking orders.
//!
//! Agents and alternatives are dense 0-based indices. An [`Instance`] owns a
//! unit-sum valuation table and a partition of its agents into districts;
//! everything else in the crate reads from it.

use std::borrow::Cow;
use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Tolerance on input row sums.
pub const ROW_SUM_TOL: f64 = 1e-9;

/// Divides each row by its sum. All-zero rows become the uniform row.
pub fn normalize_unit_sum(raw: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let width = raw.first().map_or(0, Vec::len);
    raw.iter()
        .enumerate()
        .map(|(row, values)| {
            if values.len() != width {
                return Err(Error::RaggedTable {
                    row,
                    expected: width,
                    found: values.len(),
                });
            }
            for (col, &value) in values.iter().enumerate() {
                if !value.is_finite() {
                    return Err(Error::NonFiniteValue { row, col });
                }
                if value < 0.0 {
                    return Err(Error::NegativeValue { row, col, value });
                }
            }
            let sum: f64 = values.iter().sum();
            if sum == 0.0 {
                Ok(vec![1.0 / width as f64; width])
            } else {
                Ok(values.iter().map(|v| v / sum).collect())
            }
        })
        .collect()
}

/// An ordered partition of agents into non-empty districts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Districts {
    groups: Vec<Vec<usize>>,
}

impl Districts {
    pub fn new(groups: Vec<Vec<usize>>) -> Result<Self> {
        if let Some(d) = groups.iter().position(Vec::is_empty) {
            return Err(Error::EmptyDistrict(d));
        }
        Ok(Self { groups })
    }

    /// One district holding agents `0..n`.
    pub fn single(n: usize) -> Self {
        Self {
            groups: vec![(0..n).collect()],
        }
    }

    /// Consecutive blocks of `size` agents each.
    pub fn contiguous(k: usize, size: usize) -> Self {
        Self {
            groups: (0..k)
                .map(|d| (d * size..(d + 1) * size).collect())
                .collect(),
        }
    }

    pub fn k(&self) -> usize {
        self.groups.len()
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn group(&self, d: usize) -> Option<&[usize]> {
        self.groups.get(d).map(Vec::as_slice)
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.groups.iter().map(Vec::len).collect()
    }

    pub fn agent_count(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    /// All districts have the same size.
    pub fn is_symmetric(&self) -> bool {
        self.groups.windows(2).all(|w| w[0].len() == w[1].len())
    }

    fn check_partition(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n];
        for &agent in self.groups.iter().flatten() {
            if agent >= n {
                return Err(Error::AgentOutOfRange { agent, n });
            }
            if std::mem::replace(&mut seen[agent], true) {
                return Err(Error::DuplicateAgent(agent));
            }
        }
        match seen.iter().position(|s| !s) {
            Some(agent) => Err(Error::MissingAgent(agent)),
            None => Ok(()),
        }
    }
}

/// A validated election: unit-sum valuations plus a district partition.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    valuations: Vec<Vec<f64>>,
    districts: Districts,
    m: usize,
}

impl Instance {
    pub fn new(valuations: Vec<Vec<f64>>, districts: Districts) -> Result<Self> {
        let m = valuations.first().ok_or(Error::EmptyTable)?.len();
        if m < 2 {
            return Err(Error::TooFewAlternatives(m));
        }
        for (row, values) in valuations.iter().enumerate() {
            check_row(row, values, m)?;
        }
        districts.check_partition(valuations.len())?;
        Ok(Self {
            valuations,
            districts,
            m,
        })
    }

    pub fn n(&self) -> usize {
        self.valuations.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.districts.k()
    }

    pub fn valuations(&self) -> &[Vec<f64>] {
        &self.valuations
    }

    pub fn value(&self, agent: usize, alternative: usize) -> f64 {
        self.valuations[agent][alternative]
    }

    pub fn row(&self, agent: usize) -> &[f64] {
        &self.valuations[agent]
    }

    pub fn districts(&self) -> &Districts {
        &self.districts
    }

    /// Same valuations under a different partition.
    pub fn with_districts(&self, districts: Districts) -> Result<Self> {
        Self::new(self.valuations.clone(), districts)
    }

    /// Copy of the instance with one agent's valuation row replaced.
    pub fn with_row(&self, agent: usize, row: Vec<f64>) -> Result<Self> {
        if agent >= self.n() {
            return Err(Error::AgentOutOfRange {
                agent,
                n: self.n(),
            });
        }
        check_row(agent, &row, self.m)?;
        let mut valuations = self.valuations.clone();
        valuations[agent] = row;
        Ok(Self {
            valuations,
            districts: self.districts.clone(),
            m: self.m,
        })
    }
}

fn check_row(row: usize, values: &[f64], m: usize) -> Result<()> {
    if values.len() != m {
        return Err(Error::RaggedTable {
            row,
            expected: m,
            found: values.len(),
        });
    }
    for (col, &value) in values.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFiniteValue { row, col });
        }
        if value < 0.0 {
            return Err(Error::NegativeValue { row, col, value });
        }
    }
    let sum: f64 = values.iter().sum();
    if (sum - 1.0).abs() > ROW_SUM_TOL {
        return Err(Error::RowSum { row, sum });
    }
    Ok(())
}

fn check_permutation(order: &[usize], len: usize) -> Result<()> {
    if order.len() != len {
        return Err(Error::InvalidPermutation {
            len,
            detail: format!("length {}", order.len()),
        });
    }
    let mut seen = vec![false; len];
    for &x in order {
        if x >= len || std::mem::replace(&mut seen[x], true) {
            return Err(Error::InvalidPermutation {
                len,
                detail: format!("{order:?}"),
            });
        }
    }
    Ok(())
}

/// Fixed priority over alternatives used to break every tie.
///
/// Earlier positions in `order` win ties.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TieOrder {
    order: Vec<usize>,
    priority: Vec<usize>,
}

impl TieOrder {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        check_permutation(&order, order.len())?;
        let mut priority = vec![0; order.len()];
        for (pos, &a) in order.iter().enumerate() {
            priority[a] = pos;
        }
        Ok(Self { order, priority })
    }

    /// Lower index wins.
    pub fn index(m: usize) -> Self {
        Self {
            order: (0..m).collect(),
            priority: (0..m).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Position of `a` in the order; smaller is higher priority.
    pub fn priority(&self, a: usize) -> usize {
        self.priority[a]
    }

    /// Index of the largest score, exact ties resolved by priority.
    pub fn argmax(&self, scores: &[f64]) -> Option<usize> {
        let mut best: Option<usize> = None;
        for a in 0..scores.len() {
            best = match best {
                Some(b)
                    if scores[b] > scores[a]
                        || (scores[b] == scores[a] && self.priority[b] < self.priority[a]) =>
                {
                    Some(b)
                }
                _ => Some(a),
            };
        }
        best
    }

    pub(crate) fn check_len(&self, m: usize) -> Result<()> {
        if self.len() == m {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: m,
                found: self.len(),
            })
        }
    }
}

/// Per-agent strict rankings, best first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrdinalProfile {
    rankings: Vec<Vec<usize>>,
    positions: Vec<Vec<usize>>,
    m: usize,
}

impl OrdinalProfile {
    pub fn new(rankings: Vec<Vec<usize>>, m: usize) -> Result<Self> {
        for ranking in &rankings {
            check_permutation(ranking, m)?;
        }
        let positions = rankings.iter().map(|r| inverse(r)).collect();
        Ok(Self {
            rankings,
            positions,
            m,
        })
    }

    pub fn n(&self) -> usize {
        self.rankings.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn rankings(&self) -> &[Vec<usize>] {
        &self.rankings
    }

    pub fn ranking(&self, agent: usize) -> &[usize] {
        &self.rankings[agent]
    }

    /// Rank position (0 = favourite) of `alternative` for `agent`.
    pub fn position(&self, agent: usize, alternative: usize) -> usize {
        self.positions[agent][alternative]
    }

    pub fn top(&self, agent: usize) -> usize {
        self.rankings[agent][0]
    }

    /// Copy with one agent's ranking replaced.
    pub fn with_ranking(&self, agent: usize, ranking: Vec<usize>) -> Result<Self> {
        if agent >= self.n() {
            return Err(Error::AgentOutOfRange {
                agent,
                n: self.n(),
            });
        }
        check_permutation(&ranking, self.m)?;
        let mut out = self.clone();
        out.positions[agent] = inverse(&ranking);
        out.rankings[agent] = ranking;
        Ok(out)
    }

    /// Every agent ranks a weakly-higher-valued alternative first.
    pub fn is_consistent_with(&self, instance: &Instance) -> bool {
        self.n() == instance.n()
            && self.m == instance.m()
            && self.rankings.iter().enumerate().all(|(i, ranking)| {
                ranking
                    .windows(2)
                    .all(|w| instance.value(i, w[0]) >= instance.value(i, w[1]))
            })
    }
}

fn inverse(ranking: &[usize]) -> Vec<usize> {
    let mut pos = vec![0; ranking.len()];
    for (t, &a) in ranking.iter().enumerate() {
        pos[a] = t;
    }
    pos
}

/// Ranking of one valuation row: descending value, ties by `tie` priority.
pub fn rank_row(values: &[f64], tie: &TieOrder) -> Vec<usize> {
    let mut ranking: Vec<usize> = (0..values.len()).collect();
    ranking.sort_by(|&a, &b| match values[b].total_cmp(&values[a]) {
        Ordering::Equal => tie.priority(a).cmp(&tie.priority(b)),
        other => other,
    });
    ranking
}

/// Rankings consistent with the instance's valuations.
pub fn derive_ordinal(instance: &Instance, tie: &TieOrder) -> Result<OrdinalProfile> {
    tie.check_len(instance.m())?;
    let rankings = instance
        .valuations()
        .iter()
        .map(|row| rank_row(row, tie))
        .collect();
    OrdinalProfile::new(rankings, instance.m())
}

/// Read-only view over a subset of agents, with both their valuations and
/// their rankings.
#[derive(Debug, Clone)]
pub struct DistrictView<'a> {
    instance: &'a Instance,
    profile: &'a OrdinalProfile,
    agents: Cow<'a, [usize]>,
}

impl<'a> DistrictView<'a> {
    /// View over every agent in index order.
    pub fn whole(instance: &'a Instance, profile: &'a OrdinalProfile) -> Self {
        Self {
            instance,
            profile,
            agents: Cow::Owned((0..instance.n()).collect()),
        }
    }

    /// View over an explicit agent subset.
    pub fn of_agents(
        instance: &'a Instance,
        profile: &'a OrdinalProfile,
        agents: &'a [usize],
    ) -> Self {
        Self {
            instance,
            profile,
            agents: Cow::Borrowed(agents),
        }
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn m(&self) -> usize {
        self.instance.m()
    }

    /// Global indices of the agents in this view.
    pub fn agents(&self) -> &[usize] {
        &self.agents
    }

    /// Valuation row of the `i`-th agent of the view.
    pub fn values(&self, i: usize) -> &[f64] {
        self.instance.row(self.agents[i])
    }

    pub fn ranking(&self, i: usize) -> &[usize] {
        self.profile.ranking(self.agents[i])
    }

    pub fn position(&self, i: usize, alternative: usize) -> usize {
        self.profile.position(self.agents[i], alternative)
    }

    /// Welfare of each alternative restricted to the view's agents.
    pub fn welfare(&self) -> Vec<f64> {
        let mut sw = vec![0.0; self.m()];
        for &agent in self.agents.iter() {
            for (total, v) in sw.iter_mut().zip(self.instance.row(agent)) {
                *total += v;
            }
        }
        sw
    }
}

/// The agents of district `d`, in their stored order.
pub fn restrict_to_district<'a>(
    instance: &'a Instance,
    profile: &'a OrdinalProfile,
    d: usize,
) -> Result<DistrictView<'a>> {
    let agents = instance
        .districts()
        .group(d)
        .ok_or(Error::DistrictOutOfRange {
            district: d,
            k: instance.k(),
        })?;
    Ok(DistrictView::of_agents(instance, profile, agents))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(rows: Vec<Vec<f64>>, groups: Vec<Vec<usize>>) -> Result<Instance> {
        Instance::new(rows, Districts::new(groups)?)
    }

    #[test]
    fn normalize_examples() {
        let out = normalize_unit_sum(&[vec![2.0, 2.0], vec![1.0, 3.0]]).unwrap();
        assert_eq!(out, vec![vec![0.5, 0.5], vec![0.25, 0.75]]);
        let zero = normalize_unit_sum(&[vec![0.0; 3]]).unwrap();
        assert_eq!(zero, vec![vec![1.0 / 3.0; 3]]);
    }

    #[test]
    fn normalize_rejects_negative_with_location() {
        let err = normalize_unit_sum(&[vec![1.0, 1.0], vec![0.5, -0.1]]).unwrap_err();
        assert!(matches!(err, Error::NegativeValue { row: 1, col: 1, .. }));
    }

    #[test]
    fn build_instance_examples() {
        let one = inst(vec![vec![1.0, 0.0]], vec![vec![0]]).unwrap();
        assert_eq!((one.n(), one.m(), one.k()), (1, 2, 1));

        let dup = inst(vec![vec![1.0, 0.0]], vec![vec![0], vec![0]]);
        assert!(matches!(dup, Err(Error::DuplicateAgent(0))));

        let sum = inst(vec![vec![0.6, 0.5]], vec![vec![0]]);
        assert!(matches!(sum, Err(Error::RowSum { row: 0, .. })));
    }

    #[test]
    fn partition_errors() {
        let rows = vec![vec![0.5, 0.5]; 3];
        assert!(matches!(
            inst(rows.clone(), vec![vec![0, 1]]),
            Err(Error::MissingAgent(2))
        ));
        assert!(matches!(
            inst(rows.clone(), vec![vec![0, 1, 2, 3]]),
            Err(Error::AgentOutOfRange { agent: 3, n: 3 })
        ));
        assert!(matches!(
            Districts::new(vec![vec![0], vec![]]),
            Err(Error::EmptyDistrict(1))
        ));
        assert!(matches!(
            inst(vec![vec![1.0]], vec![vec![0]]),
            Err(Error::TooFewAlternatives(1))
        ));
    }

    #[test]
    fn derive_ordinal_examples() {
        let i = inst(
            vec![vec![0.2, 0.5, 0.3]],
            vec![vec![0]],
        )
        .unwrap();
        let p = derive_ordinal(&i, &TieOrder::index(3)).unwrap();
        assert_eq!(p.ranking(0), &[1, 2, 0]);

        let i = inst(vec![vec![0.5, 0.5]], vec![vec![0]]).unwrap();
        let p = derive_ordinal(&i, &TieOrder::index(2)).unwrap();
        assert_eq!(p.ranking(0), &[0, 1]);

        let third = 1.0 / 3.0;
        let i = inst(vec![vec![third; 3]], vec![vec![0]]).unwrap();
        let tie = TieOrder::new(vec![2, 0, 1]).unwrap();
        let p = derive_ordinal(&i, &tie).unwrap();
        assert_eq!(p.ranking(0), &[2, 0, 1]);
        assert!(p.is_consistent_with(&i));
    }

    #[test]
    fn tie_order_validation() {
        assert!(TieOrder::new(vec![0, 0]).is_err());
        assert!(TieOrder::new(vec![1, 2]).is_err());
        let i = inst(vec![vec![0.5, 0.5]], vec![vec![0]]).unwrap();
        assert!(matches!(
            derive_ordinal(&i, &TieOrder::index(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn restrict_examples() {
        let i = inst(vec![vec![0.5, 0.5]; 3], vec![vec![0, 1], vec![2]]).unwrap();
        let p = derive_ordinal(&i, &TieOrder::index(2)).unwrap();
        let v = restrict_to_district(&i, &p, 1).unwrap();
        assert_eq!(v.agents(), &[2]);
        assert!(matches!(
            restrict_to_district(&i, &p, 5),
            Err(Error::DistrictOutOfRange { district: 5, k: 2 })
        ));

        let single = inst(vec![vec![0.5, 0.5]; 3], vec![vec![0, 1, 2]]).unwrap();
        let p = derive_ordinal(&single, &TieOrder::index(2)).unwrap();
        let v = restrict_to_district(&single, &p, 0).unwrap();
        assert_eq!(v.agents(), DistrictView::whole(&single, &p).agents());
    }

    #[test]
    fn with_ranking_replaces_positions() {
        let p = OrdinalProfile::new(vec![vec![0, 1, 2], vec![2, 1, 0]], 3).unwrap();
        let q = p.with_ranking(0, vec![1, 2, 0]).unwrap();
        assert_eq!(q.position(0, 0), 2);
        assert_eq!(q.top(0), 1);
        assert_eq!(q.ranking(1), p.ranking(1));
        assert!(p.with_ranking(0, vec![0, 0, 1]).is_err());
    }
}
