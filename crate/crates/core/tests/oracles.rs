//! Library results checked against slow, independent reference computations.

use lja::aggregate::{
    average_likelihoods, median_score, profile_distance, quota_likelihood, Metric, Mode,
};
use lja::formula::{all_worlds, entails, satisfiable, Formula};
use lja::likelihood::{implied_bounds, normalize, JudgmentRelation};
use lja::lpfeas::{FeasibilityProblem, LinearConstraint, Relation};
use lja::properties::{generate_profile, GeneratorConfig, JudgmentStyle};
use lja::{CrispJudgmentSet, Frame, LikelihoodJudgment, LikelihoodJudgmentSet, Literal, Profile};
use proptest::prelude::*;

/// Minimum of `objective` over `{p >= 0, sum p = 1, rows}` by enumerating vertices.
/// `None` when the region is empty.
fn vertex_minimum(n: usize, rows: &[(Vec<f64>, Relation, f64)], objective: &[f64]) -> Option<f64> {
    // Every hyperplane that can be tight at a vertex.
    let mut planes: Vec<(Vec<f64>, f64)> = vec![(vec![1.0; n], 1.0)];
    let mut forced = 1;
    for (row, rel, b) in rows {
        if *rel == Relation::Eq {
            planes.insert(0, (row.clone(), *b));
            forced += 1;
        }
    }
    let optional: Vec<(Vec<f64>, f64)> = rows
        .iter()
        .filter(|(_, rel, _)| *rel != Relation::Eq)
        .map(|(row, _, b)| (row.clone(), *b))
        .chain((0..n).map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            (e, 0.0)
        }))
        .collect();
    let forced_planes: Vec<_> = planes[..forced].to_vec();
    let mut best: Option<f64> = None;
    let k = optional.len();
    for mask in 0u32..(1 << k) {
        if (mask.count_ones() as usize) + forced < n {
            continue;
        }
        let mut system = forced_planes.clone();
        system.extend(
            (0..k)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| optional[i].clone()),
        );
        let Some(x) = solve_square(&system, n) else {
            continue;
        };
        let ok = x.iter().all(|&v| v >= -1e-9)
            && rows.iter().all(|(row, rel, b)| {
                let lhs: f64 = row.iter().zip(&x).map(|(a, v)| a * v).sum();
                match rel {
                    Relation::Ge => lhs >= b - 1e-9,
                    Relation::Le => lhs <= b + 1e-9,
                    Relation::Eq => (lhs - b).abs() <= 1e-9,
                }
            })
            && (x.iter().sum::<f64>() - 1.0).abs() <= 1e-9;
        if ok {
            let v: f64 = objective.iter().zip(&x).map(|(a, b)| a * b).sum();
            best = Some(best.map_or(v, |b: f64| b.min(v)));
        }
    }
    best
}

/// Solves the first linearly independent `n` equations of `system` exactly
/// when they have a unique solution that satisfies the remaining ones.
fn solve_square(system: &[(Vec<f64>, f64)], n: usize) -> Option<Vec<f64>> {
    let mut m: Vec<Vec<f64>> = system
        .iter()
        .map(|(row, b)| {
            let mut r = row.clone();
            r.push(*b);
            r
        })
        .collect();
    let rows = m.len();
    let mut pivot_row = 0;
    let mut pivots = Vec::new();
    for col in 0..n {
        let Some(best) =
            (pivot_row..rows).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
        else {
            break;
        };
        if m[best][col].abs() < 1e-12 {
            continue;
        }
        m.swap(pivot_row, best);
        let p = m[pivot_row][col];
        for v in m[pivot_row].iter_mut() {
            *v /= p;
        }
        for r in 0..rows {
            if r != pivot_row {
                let f = m[r][col];
                if f != 0.0 {
                    let pivot = m[pivot_row].clone();
                    for (v, p) in m[r].iter_mut().zip(&pivot) {
                        *v -= f * p;
                    }
                }
            }
        }
        pivots.push(col);
        pivot_row += 1;
    }
    if pivots.len() < n {
        return None;
    }
    if m[pivot_row..].iter().any(|r| r[n].abs() > 1e-9) {
        return None;
    }
    Some((0..n).map(|i| m[i][n]).collect())
}

type LpCase = (usize, Vec<(Vec<f64>, Relation, f64)>, Vec<f64>);

fn relation() -> impl Strategy<Value = Relation> {
    prop_oneof![Just(Relation::Ge), Just(Relation::Le), Just(Relation::Eq)]
}

fn lp_case() -> impl Strategy<Value = LpCase> {
    (2usize..=4).prop_flat_map(|n| {
        let row = (
            prop::collection::vec((-2i32..=2).prop_map(f64::from), n),
            relation(),
            (-4i32..=8).prop_map(|b| f64::from(b) / 4.0),
        );
        (
            Just(n),
            prop::collection::vec(row, 0..=3),
            prop::collection::vec((-3i32..=3).prop_map(f64::from), n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn simplex_agrees_with_vertex_enumeration((n, rows, objective) in lp_case()) {
        let constraints = rows
            .iter()
            .map(|(row, rel, b)| LinearConstraint::new(row.iter().copied().enumerate(), *rel, *b))
            .collect();
        let problem = FeasibilityProblem::new(n, constraints).unwrap();
        let expected = vertex_minimum(n, &rows, &objective);
        prop_assert_eq!(problem.feasible().unwrap(), expected.is_some());
        if let Some(min) = expected {
            let got = problem.minimize(&objective).unwrap();
            prop_assert!((got - min).abs() < 1e-7, "simplex {} vs vertices {}", got, min);
        }
    }
}

fn co2() -> Frame {
    Frame::from_text(&["p", "q"], &["p", "p -> q", "q"], &[]).unwrap()
}

fn hotel() -> Frame {
    Frame::from_text(
        &["s", "t", "x", "e", "h", "a"],
        &["s | t", "x", "e", "h", "a"],
        &["(!e | x) <-> a", "((s | t) & a) <-> h"],
    )
    .unwrap()
}

fn additivity() -> Frame {
    Frame::from_text(&["p1", "p2"], &["p1", "p1 & p2", "p1 & !p2"], &[]).unwrap()
}

fn literal_formulas(frame: &Frame, set: &CrispJudgmentSet) -> Vec<Formula> {
    let mut fs: Vec<Formula> = frame.gamma().to_vec();
    fs.extend(set.literals().map(|l| frame.literal_formula(l)));
    fs
}

fn brute_force_rational(frame: &Frame) -> Vec<String> {
    let m = frame.issue_count();
    let mut out = Vec::new();
    for bits in 0u32..(1 << m) {
        let signs: Vec<bool> = (0..m).map(|i| bits >> (m - 1 - i) & 1 == 1).collect();
        let set = CrispJudgmentSet::from_signs(&signs);
        if satisfiable(&literal_formulas(frame, &set), frame.atoms()).unwrap() {
            out.push(set.signs());
        }
    }
    out.sort();
    out
}

fn decides_everything(frame: &Frame, set: &CrispJudgmentSet) -> bool {
    let premises = literal_formulas(frame, set);
    if !satisfiable(&premises, frame.atoms()).unwrap() {
        return false;
    }
    (0..frame.issue_count()).all(|i| {
        let pos = Literal::positive(i);
        entails(&premises, &frame.literal_formula(pos), frame.atoms()).unwrap()
            || entails(
                &premises,
                &frame.literal_formula(pos.complement()),
                frame.atoms(),
            )
            .unwrap()
    })
}

fn brute_force_implicants(frame: &Frame) -> Vec<String> {
    let m = frame.issue_count();
    let mut out = Vec::new();
    for code in 0..3usize.pow(m as u32) {
        let mut c = code;
        let mut set = CrispJudgmentSet::empty(m);
        for i in 0..m {
            match c % 3 {
                1 => set.insert(Literal::positive(i)),
                2 => set.insert(Literal::negative(i)),
                _ => {}
            }
            c /= 3;
        }
        if !decides_everything(frame, &set) {
            continue;
        }
        let minimal = set.literals().all(|l| {
            let mut smaller = set;
            smaller.remove(l);
            !decides_everything(frame, &smaller)
        });
        if minimal {
            out.push(set.signs());
        }
    }
    out.sort();
    out
}

#[test]
fn rational_sets_match_brute_force() {
    for frame in [co2(), hotel(), additivity()] {
        let mut got: Vec<String> = frame.rational_sets().iter().map(|j| j.signs()).collect();
        got.sort();
        assert_eq!(got, brute_force_rational(&frame));
    }
}

#[test]
fn prime_implicants_match_brute_force() {
    for frame in [co2(), hotel(), additivity()] {
        let mut got: Vec<String> = frame
            .prime_implicants()
            .iter()
            .map(|i| i.as_set().signs())
            .collect();
        got.sort();
        assert_eq!(got, brute_force_implicants(&frame));
    }
}

#[test]
fn closures_are_entailed_by_their_implicant() {
    let frame = hotel();
    for imp in frame.prime_implicants() {
        let closure = frame.closure(&imp).unwrap();
        assert!(closure.is_complete());
        assert!(imp.as_set().is_subset(&closure));
        let premises = literal_formulas(&frame, imp.as_set());
        for l in closure.literals() {
            assert!(entails(&premises, &frame.literal_formula(l), frame.atoms()).unwrap());
        }
    }
}

fn formula_strategy() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("a".to_string()),
        Just("b".to_string()),
        Just("c".to_string())
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|f| format!("!({f})")),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| format!("({x}) & ({y})")),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| format!("({x}) | ({y})")),
            (inner.clone(), inner).prop_map(|(x, y)| format!("({x}) -> ({y})")),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_frames_match_brute_force(
        agenda in prop::collection::vec(formula_strategy(), 1..=3),
        gamma in prop::collection::vec(formula_strategy(), 0..=1),
    ) {
        let agenda: Vec<&str> = agenda.iter().map(String::as_str).collect();
        let gamma: Vec<&str> = gamma.iter().map(String::as_str).collect();
        let frame = Frame::from_text(&["a", "b", "c"], &agenda, &gamma);
        prop_assume!(frame.is_ok());
        let frame = frame.unwrap();
        let mut got: Vec<String> = frame.rational_sets().iter().map(|j| j.signs()).collect();
        got.sort();
        prop_assert_eq!(got, brute_force_rational(&frame));
        let mut imps: Vec<String> = frame.prime_implicants().iter().map(|i| i.as_set().signs()).collect();
        imps.sort();
        prop_assert_eq!(imps, brute_force_implicants(&frame));
    }
}

/// World-level implied lower bound of every literal, by vertex enumeration.
fn implied_by_vertices(frame: &Frame, set: &LikelihoodJudgmentSet) -> Vec<f64> {
    let worlds: Vec<_> = all_worlds(frame.atoms()).unwrap().collect();
    let indicator = |lit: Literal| -> Vec<f64> {
        let f = frame.literal_formula(lit);
        worlds
            .iter()
            .map(|w| if f.evaluate(w) { 1.0 } else { 0.0 })
            .collect()
    };
    let rows: Vec<_> = frame
        .literals()
        .map(|l| {
            let rel = match set.relation(l) {
                JudgmentRelation::AtLeast => Relation::Ge,
                JudgmentRelation::Exactly => Relation::Eq,
            };
            (indicator(l), rel, set.bound(l))
        })
        .collect();
    frame
        .literals()
        .map(|l| vertex_minimum(worlds.len(), &rows, &indicator(l)).expect("consistent source"))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn implied_bounds_match_vertex_enumeration(
        bounds in prop::collection::vec((0u32..=10).prop_map(|b| f64::from(b) / 20.0), 3),
        frame_pick in 0usize..2,
    ) {
        let frame = if frame_pick == 0 { co2() } else { additivity() };
        let raw: Vec<_> = bounds
            .iter()
            .enumerate()
            .map(|(i, &a)| LikelihoodJudgment::at_least(Literal::positive(i), a))
            .collect();
        let set = normalize(&raw, &frame, "s").unwrap();
        prop_assume!(lja::likelihood::is_consistent(&set, &frame).unwrap());
        let got = implied_bounds(&set, &frame).unwrap();
        let expected = implied_by_vertices(&frame, &set);
        for (g, e) in got.iter().zip(&expected) {
            prop_assert!((g - e).abs() < 1e-7, "{:?} vs {:?}", got, expected);
        }
    }
}

fn sample_profiles(frame: &Frame, style: JudgmentStyle, count: usize) -> Vec<Profile> {
    let cfg = GeneratorConfig::default().with_style(style).with_seed(7);
    (0..count)
        .map(|k| generate_profile(frame, &cfg, k).unwrap())
        .collect()
}

#[test]
fn scores_and_distances_match_direct_formulas() {
    let frame = co2();
    for profile in sample_profiles(&frame, JudgmentStyle::LowerBounds, 50) {
        for j in frame.rational_sets() {
            let mut score = 0.0;
            let mut euclid = Vec::new();
            let mut l1 = Vec::new();
            for s in profile.iter() {
                let mut sq = 0.0;
                let mut abs = 0.0;
                for l in frame.literals() {
                    let x = if j.contains(l) { 1.0 } else { 0.0 };
                    let a = s.bound(l);
                    if j.contains(l) {
                        score += a;
                    }
                    sq += (x - a) * (x - a);
                    abs += (x - a).abs();
                }
                euclid.push(sq.sqrt());
                l1.push(abs);
            }
            let close = |a: f64, b: f64| (a - b).abs() < 1e-9;
            assert!(close(median_score(j, &profile), score));
            assert!(close(
                profile_distance(j, &profile, Metric::Euclidean, Mode::Sum),
                euclid.iter().sum()
            ));
            assert!(close(
                profile_distance(j, &profile, Metric::Euclidean, Mode::Max),
                euclid.iter().copied().fold(0.0, f64::max)
            ));
            assert!(close(
                profile_distance(j, &profile, Metric::L1, Mode::Sum),
                l1.iter().sum()
            ));
        }
    }
}

#[test]
fn quota_is_the_qth_largest_bound() {
    let frame = hotel();
    for profile in sample_profiles(&frame, JudgmentStyle::Equalities, 30) {
        for q in 1..=profile.len() {
            let pooled = quota_likelihood(&profile, q).unwrap();
            for l in frame.literals() {
                // The q-th largest is the largest value that at least q sources reach.
                let column = profile.column(l);
                let expected = column
                    .iter()
                    .copied()
                    .filter(|&v| column.iter().filter(|&&w| w >= v).count() >= q)
                    .fold(f64::NEG_INFINITY, f64::max);
                assert_eq!(pooled.bound(l), expected);
            }
        }
        let avg = average_likelihoods(&profile).unwrap();
        for l in frame.literals() {
            let mean = profile.column(l).iter().sum::<f64>() / profile.len() as f64;
            assert!((avg.get(l) - mean).abs() < 1e-12);
        }
    }
}

#[test]
fn euclidean_sum_can_miss_a_unique_kemeny_winner() {
    use lja::aggregate::{crisp_kemeny, distance_rule};
    use lja::likelihood::lift_profile;
    let frame = co2();
    let crisp: Vec<CrispJudgmentSet> = ["111", "111", "011", "010", "010"]
        .iter()
        .map(|s| CrispJudgmentSet::from_signs(&s.chars().map(|c| c == '1').collect::<Vec<_>>()))
        .collect();
    let kemeny = crisp_kemeny(&crisp, &frame).unwrap();
    let signs = |o: &lja::aggregate::AggregationOutcome| {
        o.winners.iter().map(|w| w.signs()).collect::<Vec<_>>()
    };
    assert_eq!(signs(&kemeny), ["011"]);
    let lifted = lift_profile(&crisp).unwrap();
    let euclid = distance_rule(&lifted, &frame, Metric::Euclidean, Mode::Sum).unwrap();
    assert_eq!(signs(&euclid), ["111", "010"]);
    // Each lifted distance is sqrt(2 d_H): 011 scores 4 sqrt(2), the winners 4 + sqrt(2).
    assert!((euclid.value_of(&crisp[2]).unwrap() - 4.0 * 2f64.sqrt()).abs() < 1e-12);
    assert!((euclid.value_of(&crisp[0]).unwrap() - (4.0 + 2f64.sqrt())).abs() < 1e-12);
}
