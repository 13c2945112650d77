mod common;

use common::{max_abs_diff, random_instance, random_partition, row_for_ranking, simplex_row};
use distvote::analysis::distortion_exact;
use distvote::instance::{derive_ordinal, normalize_unit_sum, restrict_to_district, DistrictView};
use distvote::mechanism::{district_representatives, winner_distribution};
use distvote::rules::{
    mix_point_voting, normalize_scoring, point_voting_distribution, scoring_winner, PointRule, PointVotingVector,
    ScoringVector,
};
use distvote::{Districts, InRule, Instance, MechanismSpec, OrdinalProfile, OverRule, TieOrder};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const OVER_RULES: [OverRule; 4] = [OverRule::Plurality, OverRule::Uniform, OverRule::Proportional, OverRule::First];

const IN_RULES: &[&str] = &[
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
];

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn in_rule(s: &str) -> InRule {
    s.parse().unwrap()
}

/// Random non-increasing point-voting vector of length `m`.
fn random_pv(m: usize, r: &mut ChaCha8Rng) -> PointVotingVector {
    let mut p = simplex_row(m, r);
    p.sort_by(|a, b| b.total_cmp(a));
    PointVotingVector::new(p).unwrap()
}

fn table(n: std::ops::RangeInclusive<usize>, m: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (n, m).prop_flat_map(|(n, m)| prop::collection::vec(prop::collection::vec(0.0f64..100.0, m), n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn normalize_is_idempotent(raw in table(1..=12, 2..=7), zero_row in any::<bool>()) {
        let mut raw = raw;
        if zero_row {
            raw[0].iter_mut().for_each(|v| *v = 0.0);
        }
        let once = normalize_unit_sum(&raw).unwrap();
        let twice = normalize_unit_sum(&once).unwrap();
        for (a, b) in once.iter().zip(&twice) {
            prop_assert!(max_abs_diff(a, b) <= 1e-12);
            prop_assert!((a.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn derived_rankings_are_consistent(raw in table(1..=12, 2..=7), seed in any::<u64>()) {
        let rows = normalize_unit_sum(&raw).unwrap();
        let n = rows.len();
        let m = rows[0].len();
        let inst = Instance::new(rows, Districts::single(n)).unwrap();
        let mut order: Vec<usize> = (0..m).collect();
        order.shuffle(&mut rng(seed));
        let profile = derive_ordinal(&inst, &TieOrder::new(order).unwrap()).unwrap();
        prop_assert!(profile.is_consistent_with(&inst));
        for i in 0..n {
            for w in profile.ranking(i).windows(2) {
                prop_assert!(inst.value(i, w[0]) >= inst.value(i, w[1]));
            }
        }
    }

    #[test]
    fn views_cover_every_agent_once(seed in any::<u64>()) {
        let inst = random_instance(30, 5, 8, &mut rng(seed));
        let profile = derive_ordinal(&inst, &TieOrder::index(inst.m())).unwrap();
        let mut seen: Vec<usize> = (0..inst.k())
            .flat_map(|d| restrict_to_district(&inst, &profile, d).unwrap().agents().to_vec())
            .collect();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..inst.n()).collect::<Vec<_>>());
    }

    #[test]
    fn point_voting_yields_lotteries(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = random_instance(20, 6, 1, &mut r);
        let profile = derive_ordinal(&inst, &TieOrder::index(inst.m())).unwrap();
        let p = random_pv(inst.m(), &mut r);
        let lottery = point_voting_distribution(&DistrictView::whole(&inst, &profile), &p).unwrap();
        prop_assert!((lottery.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(lottery.probs().iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn scoring_argmax_is_affine_invariant(
        seed in any::<u64>(),
        steps in prop::collection::vec(0u32..4, 1..=5),
        alpha in 1u32..8,
        beta in 0u32..8,
    ) {
        // integer scores keep every district total exact
        let m = steps.len() + 1;
        let mut s = vec![0.0; m];
        for t in (0..m - 1).rev() {
            s[t] = s[t + 1] + f64::from(steps[t]);
        }
        if s[0] == 0.0 {
            s[0] = 1.0;
        }
        let scaled: Vec<f64> = s.iter().map(|x| f64::from(alpha) * x + f64::from(beta)).collect();
        let mut r = rng(seed);
        let n = 1 + (seed % 20) as usize;
        let rows = (0..n).map(|_| simplex_row(m, &mut r)).collect();
        let inst = Instance::new(rows, Districts::single(n)).unwrap();
        let tie = TieOrder::index(m);
        let profile = derive_ordinal(&inst, &tie).unwrap();
        let view = DistrictView::whole(&inst, &profile);
        let a = scoring_winner(&view, &ScoringVector::new(s).unwrap(), &tie).unwrap();
        let b = scoring_winner(&view, &ScoringVector::new(scaled).unwrap(), &tie).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn plurality_matches_top_counting(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = random_instance(20, 5, 1, &mut r);
        let m = inst.m();
        let tie = TieOrder::index(m);
        let profile = derive_ordinal(&inst, &tie).unwrap();
        let mut tops = vec![0usize; m];
        for i in 0..inst.n() {
            let row = inst.row(i);
            let best = (0..m).fold(0, |b, a| if row[a] > row[b] { a } else { b });
            tops[best] += 1;
        }
        let most = *tops.iter().max().unwrap();
        let oracle = tops.iter().position(|&c| c == most).unwrap();
        let winner = scoring_winner(&DistrictView::whole(&inst, &profile), &ScoringVector::plurality(m), &tie).unwrap();
        prop_assert_eq!(winner, oracle);
    }

    #[test]
    fn one_agent_point_voting_reorders_vector(seed in any::<u64>(), m in 2usize..=7) {
        let mut r = rng(seed);
        let mut scores = simplex_row(m, &mut r);
        scores.sort_by(|a, b| b.total_cmp(a));
        let p = normalize_scoring(&ScoringVector::new(scores).unwrap()).unwrap();
        let inst = Instance::new(vec![simplex_row(m, &mut r)], Districts::single(1)).unwrap();
        let profile = derive_ordinal(&inst, &TieOrder::index(m)).unwrap();
        let lottery = point_voting_distribution(&DistrictView::whole(&inst, &profile), &p).unwrap();
        for (t, &a) in profile.ranking(0).iter().enumerate() {
            prop_assert_eq!(lottery.prob(a), p.probs()[t]);
        }
    }

    #[test]
    fn mixing_is_linear_in_distributions(seed in any::<u64>(), parts in 1usize..=4) {
        let mut r = rng(seed);
        let inst = random_instance(20, 6, 1, &mut r);
        let m = inst.m();
        let vectors: Vec<PointVotingVector> = (0..parts).map(|_| random_pv(m, &mut r)).collect();
        let weights = simplex_row(parts, &mut r);
        let weights: Vec<f64> = {
            // re-close the sum exactly so the weight check cannot trip
            let head: f64 = weights[..parts - 1].iter().sum();
            let mut w = weights[..parts - 1].to_vec();
            w.push(1.0 - head);
            w
        };
        let profile = derive_ordinal(&inst, &TieOrder::index(m)).unwrap();
        let view = DistrictView::whole(&inst, &profile);
        let mixed = point_voting_distribution(&view, &mix_point_voting(&vectors, &weights).unwrap()).unwrap();
        let mut expected = vec![0.0; m];
        for (v, w) in vectors.iter().zip(&weights) {
            let l = point_voting_distribution(&view, v).unwrap();
            for (e, p) in expected.iter_mut().zip(l.probs()) {
                *e += w * p;
            }
        }
        prop_assert!(max_abs_diff(mixed.probs(), &expected) <= 1e-12);
    }

    #[test]
    fn proportional_point_voting_equals_centralized(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = random_instance(30, 6, 10, &mut r);
        let p = random_pv(inst.m(), &mut r);
        let spec = MechanismSpec::new(OverRule::Proportional, InRule::PointVoting(PointRule::Custom(p.clone())));
        let profile = derive_ordinal(&inst, &TieOrder::index(inst.m())).unwrap();
        let central = point_voting_distribution(&DistrictView::whole(&inst, &profile), &p).unwrap();
        let distributed = winner_distribution(&inst, &spec).unwrap();
        prop_assert!(distributed.max_deviation(&central) <= 1e-12);
    }

    #[test]
    fn proportional_point_voting_ignores_partition(seed in any::<u64>(), rule in 6usize..12) {
        let mut r = rng(seed);
        let inst = random_instance(30, 6, 10, &mut r);
        let spec = MechanismSpec::new(OverRule::Proportional, in_rule(IN_RULES[rule]));
        let base = distortion_exact(&inst, &spec).unwrap();
        let k = r.random_range(1..=inst.n());
        let other = inst.with_districts(random_partition(inst.n(), k, &mut r)).unwrap();
        let moved = distortion_exact(&other, &spec).unwrap();
        prop_assert_eq!(base.optimal_alt, moved.optimal_alt);
        prop_assert!((base.mechanism_expected_sw - moved.mechanism_expected_sw).abs() <= 1e-12);
        prop_assert!((base.ratio - moved.ratio).abs() <= 1e-12);
    }

    #[test]
    fn duplicated_district_gets_same_lottery(seed in any::<u64>(), rule in 0usize..12) {
        let mut r = rng(seed);
        let inst = random_instance(20, 5, 5, &mut r);
        let d = r.random_range(0..inst.k());
        let copy = inst.districts().group(d).unwrap().to_vec();
        let mut rows = inst.valuations().to_vec();
        let mut groups = inst.districts().groups().to_vec();
        let start = rows.len();
        rows.extend(copy.iter().map(|&a| inst.row(a).to_vec()));
        groups.push((start..start + copy.len()).collect());
        let doubled = Instance::new(rows, Districts::new(groups).unwrap()).unwrap();
        let spec = MechanismSpec::new(OverRule::Uniform, in_rule(IN_RULES[rule]));
        let reps = district_representatives(&doubled, &spec).unwrap();
        let k = doubled.k();
        prop_assert_eq!(&reps.lotteries()[d], &reps.lotteries()[k - 1]);
    }

    #[test]
    fn district_order_does_not_matter_for_uniform(seed in any::<u64>(), rule in 0usize..12) {
        let mut r = rng(seed);
        let inst = random_instance(20, 5, 6, &mut r);
        let mut groups = inst.districts().groups().to_vec();
        groups.shuffle(&mut r);
        let permuted = inst.with_districts(Districts::new(groups).unwrap()).unwrap();
        let spec = MechanismSpec::new(OverRule::Uniform, in_rule(IN_RULES[rule]));
        let a = winner_distribution(&inst, &spec).unwrap();
        let b = winner_distribution(&permuted, &spec).unwrap();
        prop_assert!(a.max_deviation(&b) <= 1e-12);
    }

    #[test]
    fn single_district_collapses_to_in_rule(seed in any::<u64>(), rule in 0usize..12) {
        let mut r = rng(seed);
        let inst = random_instance(20, 6, 1, &mut r);
        let rule = in_rule(IN_RULES[rule]);
        let tie = TieOrder::index(inst.m());
        let profile = derive_ordinal(&inst, &tie).unwrap();
        // the district keeps its own agent order, which the dictator reads
        let direct = rule.lottery(&restrict_to_district(&inst, &profile, 0).unwrap(), &tie).unwrap();
        for over in OVER_RULES {
            let got = winner_distribution(&inst, &MechanismSpec::new(over, rule.clone())).unwrap();
            prop_assert!(got.max_deviation(&direct) <= 1e-12, "{over:?}");
        }
    }

    #[test]
    fn common_favourite_propagates(seed in any::<u64>(), rule in 0usize..12) {
        let mut r = rng(seed);
        let base = random_instance(20, 6, 6, &mut r);
        let m = base.m();
        let a = r.random_range(0..m);
        let rows = (0..base.n())
            .map(|_| {
                let mut ranking: Vec<usize> = (0..m).filter(|&x| x != a).collect();
                ranking.shuffle(&mut r);
                ranking.insert(0, a);
                let mut row = row_for_ranking(&ranking, &mut r);
                // strict favourite even after rounding
                let second = (0..m).filter(|&x| x != a).map(|x| row[x]).fold(0.0, f64::max);
                if row[a] <= second {
                    row[a] = second + 1e-3;
                    let total: f64 = row.iter().sum();
                    row.iter_mut().for_each(|v| *v /= total);
                }
                row
            })
            .collect();
        let inst = Instance::new(rows, base.districts().clone()).unwrap();
        let rule = in_rule(IN_RULES[rule]);
        prop_assume!(rule.descriptor().unanimous);
        let reps = district_representatives(&inst, &MechanismSpec::new(OverRule::Uniform, rule.clone())).unwrap();
        prop_assert_eq!(reps.deterministic(), Some(vec![a; inst.k()]));
        for over in OVER_RULES {
            let got = winner_distribution(&inst, &MechanismSpec::new(over, rule.clone())).unwrap();
            prop_assert_eq!(got.as_degenerate(), Some(a));
        }
    }

    #[test]
    fn uniform_of_range_within_k(seed in any::<u64>()) {
        let inst = random_instance(40, 6, 8, &mut rng(seed));
        let report = distortion_exact(&inst, &"uniform-of-range".parse().unwrap()).unwrap();
        prop_assert!(report.ratio <= inst.k() as f64 + 1e-9, "{report:?}");
    }

    #[test]
    fn distortion_is_at_least_one(seed in any::<u64>(), rule in 0usize..12, over in 0usize..4) {
        let inst = random_instance(20, 6, 6, &mut rng(seed));
        let spec = MechanismSpec::new(OVER_RULES[over], in_rule(IN_RULES[rule]));
        match distortion_exact(&inst, &spec) {
            Ok(report) => prop_assert!(report.ratio >= 1.0 - 1e-9),
            Err(distvote::Error::UnsupportedCombination(_)) => {
                prop_assert!(OVER_RULES[over] == OverRule::Plurality && !spec.in_rule.is_deterministic());
            }
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn misreported_profile_changes_one_ranking(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = random_instance(10, 5, 3, &mut r);
        let profile = derive_ordinal(&inst, &TieOrder::index(inst.m())).unwrap();
        let agent = r.random_range(0..inst.n());
        let mut ranking = profile.ranking(agent).to_vec();
        ranking.reverse();
        let changed: OrdinalProfile = profile.with_ranking(agent, ranking.clone()).unwrap();
        prop_assert_eq!(changed.ranking(agent), &ranking[..]);
        for i in (0..inst.n()).filter(|&i| i != agent) {
            prop_assert_eq!(changed.ranking(i), profile.ranking(i));
        }
    }
}
