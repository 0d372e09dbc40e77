//! Aggregation rules.
//!
//! Crispifying rules first pool the profile into one likelihood set and then
//! threshold it with a [`CrispVector`]. Direct rules pick winners among the
//! rational crisp sets of the frame. Rules that optimise are irresolute: every
//! candidate within [`TIE_TOLERANCE`] of the optimum wins, and winners are
//! listed in lexicographic sign order.

use std::fmt;

use thiserror::Error;

use crate::frame::{CrispJudgmentSet, Frame, FrameError, Implicant, Literal, Profile};
use crate::likelihood::{Entry, JudgmentRelation, LikelihoodJudgmentSet};

pub const TIE_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_CRISP_COEFFICIENT: f64 = 0.6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AggregateError {
    #[error("invalid crispifying vector: {0}")]
    InvalidCrispVector(String),
    #[error("quota {q} is outside 1..={n}")]
    QuotaOutOfRange { q: usize, n: usize },
    #[error("the profile is empty")]
    EmptyProfile,
    #[error("profile has {found} issues but the frame has {expected}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("invalid average vector: {0}")]
    InvalidVector(String),
    #[error("the frame has no prime implicants")]
    NoImplicants,
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("rule `{0}` requires --quota")]
    MissingQuota(String),
    #[error("dictator {index} is outside a profile of {n} sources")]
    NoSuchSource { index: usize, n: usize },
    #[error("scoring `{0}` needs the full profile, not only its averages")]
    NeedsProfile(&'static str),
    #[error(transparent)]
    Frame(#[from] FrameError),
}

/// Thresholds `c_phi` for crispification, one per literal.
#[derive(Debug, Clone, PartialEq)]
pub struct CrispVector {
    coefficients: Vec<f64>,
}

impl CrispVector {
    /// The same coefficient on every literal; requires `c` in `(1/2, 1]`.
    pub fn uniform(issues: usize, c: f64) -> Result<Self, AggregateError> {
        if !(c > 0.5 && c <= 1.0) {
            return Err(AggregateError::InvalidCrispVector(format!(
                "uniform coefficient {c} is outside (0.5, 1]"
            )));
        }
        Ok(CrispVector {
            coefficients: vec![c; 2 * issues],
        })
    }

    /// Coefficients in literal index order.
    pub fn new(coefficients: Vec<f64>) -> Result<Self, AggregateError> {
        if !coefficients.len().is_multiple_of(2) {
            return Err(AggregateError::InvalidCrispVector(
                "odd number of coefficients".into(),
            ));
        }
        for (i, &c) in coefficients.iter().enumerate() {
            if !(0.0..=1.0).contains(&c) {
                return Err(AggregateError::InvalidCrispVector(format!(
                    "coefficient {c} on literal {i} is outside [0, 1]"
                )));
            }
        }
        for pair in coefficients.chunks(2) {
            if pair[0] + pair[1] <= 1.0 {
                return Err(AggregateError::InvalidCrispVector(format!(
                    "coefficients {} and {} on an issue and its negation do not exceed 1",
                    pair[0], pair[1]
                )));
            }
        }
        Ok(CrispVector { coefficients })
    }

    pub fn issue_count(&self) -> usize {
        self.coefficients.len() / 2
    }

    pub fn get(&self, lit: Literal) -> f64 {
        self.coefficients[lit.index()]
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn max(&self) -> f64 {
        self.coefficients.iter().copied().fold(0.0, f64::max)
    }
}

/// Accepts each literal whose bound reaches its coefficient.
pub fn crispify(set: &LikelihoodJudgmentSet, c: &CrispVector) -> CrispJudgmentSet {
    let m = set.issue_count();
    CrispJudgmentSet::from_literals(m, Literal::all(m).filter(|&l| set.bound(l) >= c.get(l)))
}

fn check_profile(profile: &Profile, frame: Option<&Frame>) -> Result<usize, AggregateError> {
    let first = profile
        .sources()
        .first()
        .ok_or(AggregateError::EmptyProfile)?;
    if let Some(frame) = frame {
        if first.issue_count() != frame.issue_count() {
            return Err(AggregateError::WidthMismatch {
                expected: frame.issue_count(),
                found: first.issue_count(),
            });
        }
    }
    Ok(profile.len())
}

pub fn majority_quota(n: usize) -> usize {
    n / 2 + 1
}

/// The q-th largest bound on every literal, stated as a lower bound.
pub fn quota_likelihood(
    profile: &Profile,
    q: usize,
) -> Result<LikelihoodJudgmentSet, AggregateError> {
    let n = check_profile(profile, None)?;
    if q == 0 || q > n {
        return Err(AggregateError::QuotaOutOfRange { q, n });
    }
    let m = profile.sources()[0].issue_count();
    let entries = Literal::all(m)
        .map(|l| {
            let mut column = profile.column(l);
            column.sort_by(|a, b| b.total_cmp(a));
            Entry {
                relation: JudgmentRelation::AtLeast,
                bound: column[q - 1],
            }
        })
        .collect();
    Ok(LikelihoodJudgmentSet::from_entries(
        format!("quota {q}"),
        entries,
    ))
}

pub fn quota_rule(
    profile: &Profile,
    q: usize,
    c: &CrispVector,
) -> Result<CrispJudgmentSet, AggregateError> {
    Ok(crispify(&quota_likelihood(profile, q)?, c))
}

/// Literals accepted by at least `q` crisp sets.
pub fn crisp_quota(
    profile: &[CrispJudgmentSet],
    q: usize,
) -> Result<CrispJudgmentSet, AggregateError> {
    let n = profile.len();
    let first = profile.first().ok_or(AggregateError::EmptyProfile)?;
    if q == 0 || q > n {
        return Err(AggregateError::QuotaOutOfRange { q, n });
    }
    let m = first.issue_count();
    Ok(CrispJudgmentSet::from_literals(
        m,
        Literal::all(m).filter(|&l| crisp_support(profile, l) >= q),
    ))
}

/// Strict issue-wise majority of a crisp profile.
pub fn crisp_majoritarian(
    profile: &[CrispJudgmentSet],
) -> Result<CrispJudgmentSet, AggregateError> {
    crisp_quota(profile, majority_quota(profile.len()))
}

/// Number of sources whose bound on `lit` reaches `c`.
pub fn support_count(profile: &Profile, lit: Literal, c: f64) -> usize {
    profile.iter().filter(|s| s.bound(lit) >= c).count()
}

/// Number of crisp sets containing `lit`.
pub fn crisp_support(profile: &[CrispJudgmentSet], lit: Literal) -> usize {
    profile.iter().filter(|j| j.contains(lit)).count()
}

/// One value in `[0, 1]` per literal, in literal index order.
#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodVector {
    values: Vec<f64>,
}

impl LikelihoodVector {
    pub fn new(values: Vec<f64>) -> Result<Self, AggregateError> {
        if values.is_empty() || !values.len().is_multiple_of(2) {
            return Err(AggregateError::InvalidVector(format!(
                "{} values do not cover issue and negation pairs",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(AggregateError::InvalidVector(format!(
                "{v} is outside [0, 1]"
            )));
        }
        Ok(LikelihoodVector { values })
    }

    pub fn issue_count(&self) -> usize {
        self.values.len() / 2
    }

    pub fn get(&self, lit: Literal) -> f64 {
        self.values[lit.index()]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

pub fn average_likelihoods(profile: &Profile) -> Result<LikelihoodVector, AggregateError> {
    let n = check_profile(profile, None)? as f64;
    let m = profile.sources()[0].issue_count();
    let values = Literal::all(m)
        .map(|l| (profile.column(l).iter().sum::<f64>() / n).clamp(0.0, 1.0))
        .collect();
    LikelihoodVector::new(values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub set: CrispJudgmentSet,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImplicantScore {
    pub implicant: Implicant,
    pub score: f64,
    pub closure: CrispJudgmentSet,
}

/// Whether a winner is complete and consistent with the propositional
/// constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WinnerStatus {
    pub complete: bool,
    pub consistent: bool,
}

impl WinnerStatus {
    pub fn rational(&self) -> bool {
        self.complete && self.consistent
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregationOutcome {
    pub rule: String,
    pub winners: Vec<CrispJudgmentSet>,
    pub objective: Option<Objective>,
    /// Every rational set with its score or distance, in frame order.
    pub candidates: Vec<Candidate>,
    pub implicants: Vec<ImplicantScore>,
    /// The pooled likelihood set of crispifying rules.
    pub collective: Option<LikelihoodJudgmentSet>,
    /// Literals in the order the sequential rule added them.
    pub order: Vec<Literal>,
}

impl AggregationOutcome {
    fn single(rule: &str, winner: CrispJudgmentSet) -> Self {
        AggregationOutcome {
            rule: rule.to_string(),
            winners: vec![winner],
            objective: None,
            candidates: Vec::new(),
            implicants: Vec::new(),
            collective: None,
            order: Vec::new(),
        }
    }

    fn over_candidates(rule: &str, candidates: Vec<Candidate>, objective: Objective) -> Self {
        let winners = optimal(&candidates, objective);
        AggregationOutcome {
            rule: rule.to_string(),
            winners,
            objective: Some(objective),
            candidates,
            implicants: Vec::new(),
            collective: None,
            order: Vec::new(),
        }
    }

    /// The lexicographically first winner.
    pub fn resolute(&self) -> CrispJudgmentSet {
        self.winners[0]
    }

    /// Keeps only the lexicographically first winner.
    pub fn into_resolute(mut self) -> Self {
        self.winners.truncate(1);
        self
    }

    pub fn status(&self, frame: &Frame) -> Vec<WinnerStatus> {
        self.winners
            .iter()
            .map(|w| WinnerStatus {
                complete: w.is_complete(),
                consistent: frame.is_consistent(w),
            })
            .collect()
    }

    pub fn value_of(&self, set: &CrispJudgmentSet) -> Option<f64> {
        self.candidates
            .iter()
            .find(|c| c.set == *set)
            .map(|c| c.value)
    }
}

fn is_better(a: f64, b: f64, objective: Objective) -> bool {
    match objective {
        Objective::Maximize => a > b,
        Objective::Minimize => a < b,
    }
}

fn optimal(candidates: &[Candidate], objective: Objective) -> Vec<CrispJudgmentSet> {
    let best =
        candidates
            .iter()
            .map(|c| c.value)
            .reduce(|a, b| if is_better(b, a, objective) { b } else { a });
    let Some(best) = best else {
        return Vec::new();
    };
    let mut winners: Vec<CrispJudgmentSet> = candidates
        .iter()
        .filter(|c| (c.value - best).abs() <= TIE_TOLERANCE)
        .map(|c| c.set)
        .collect();
    winners.sort();
    winners.dedup();
    winners
}

/// Summed likelihood of the set's members across the profile.
pub fn median_score(set: &CrispJudgmentSet, profile: &Profile) -> f64 {
    set.literals()
        .map(|l| profile.column(l).iter().sum::<f64>())
        .sum()
}

/// Rational sets maximising the summed likelihood of their members.
pub fn median_likelihood(
    profile: &Profile,
    frame: &Frame,
) -> Result<AggregationOutcome, AggregateError> {
    check_profile(profile, Some(frame))?;
    let candidates = frame
        .rational_sets()
        .iter()
        .map(|j| Candidate {
            set: *j,
            value: median_score(j, profile),
        })
        .collect();
    Ok(AggregationOutcome::over_candidates(
        "median",
        candidates,
        Objective::Maximize,
    ))
}

/// Rational sets maximising the number of supporting sources.
pub fn crisp_median(
    profile: &[CrispJudgmentSet],
    frame: &Frame,
) -> Result<AggregationOutcome, AggregateError> {
    if profile.is_empty() {
        return Err(AggregateError::EmptyProfile);
    }
    let candidates = frame
        .rational_sets()
        .iter()
        .map(|j| Candidate {
            set: *j,
            value: j.literals().map(|l| crisp_support(profile, l) as f64).sum(),
        })
        .collect();
    Ok(AggregationOutcome::over_candidates(
        "crisp-median",
        candidates,
        Objective::Maximize,
    ))
}

/// Greedy construction from the average vector.
///
/// Literals are visited by decreasing average, then agenda position, then
/// positive before negative. A literal consistent with what has been added
/// joins the set; otherwise its complement, which is then entailed, does.
pub fn sequential_average(
    average: &LikelihoodVector,
    frame: &Frame,
) -> Result<AggregationOutcome, AggregateError> {
    let m = frame.issue_count();
    if average.issue_count() != m {
        return Err(AggregateError::WidthMismatch {
            expected: m,
            found: average.issue_count(),
        });
    }
    let mut literals: Vec<Literal> = frame.literals().collect();
    literals.sort_by(|a, b| {
        average
            .get(*b)
            .total_cmp(&average.get(*a))
            .then(a.issue.cmp(&b.issue))
            .then(a.negated.cmp(&b.negated))
    });
    let mut set = CrispJudgmentSet::empty(m);
    let mut order = Vec::with_capacity(m);
    for lit in literals {
        if set.contains(lit) || set.contains(lit.complement()) {
            continue;
        }
        let mut extended = set;
        extended.insert(lit);
        let chosen = if frame.is_consistent(&extended) {
            lit
        } else {
            lit.complement()
        };
        set.insert(chosen);
        order.push(chosen);
    }
    let mut outcome = AggregationOutcome::single("seq-avg", set);
    outcome.order = order;
    Ok(outcome)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    Euclidean,
    L1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Sum,
    Max,
}

/// Distance between the 0/1 vector of a crisp set and a source's bounds.
pub fn source_distance(
    set: &CrispJudgmentSet,
    source: &LikelihoodJudgmentSet,
    metric: Metric,
) -> f64 {
    let diffs = Literal::all(set.issue_count()).map(|l| {
        let target = if set.contains(l) { 1.0 } else { 0.0 };
        (target - source.bound(l)).abs()
    });
    match metric {
        Metric::Euclidean => diffs.map(|d| d * d).sum::<f64>().sqrt(),
        Metric::L1 => diffs.sum(),
    }
}

pub fn profile_distance(
    set: &CrispJudgmentSet,
    profile: &Profile,
    metric: Metric,
    mode: Mode,
) -> f64 {
    let per_source = profile.iter().map(|s| source_distance(set, s, metric));
    match mode {
        Mode::Sum => per_source.sum(),
        Mode::Max => per_source.fold(0.0, f64::max),
    }
}

/// Rational sets closest to the profile.
pub fn distance_rule(
    profile: &Profile,
    frame: &Frame,
    metric: Metric,
    mode: Mode,
) -> Result<AggregationOutcome, AggregateError> {
    check_profile(profile, Some(frame))?;
    let candidates = frame
        .rational_sets()
        .iter()
        .map(|j| Candidate {
            set: *j,
            value: profile_distance(j, profile, metric, mode),
        })
        .collect();
    Ok(AggregationOutcome::over_candidates(
        &distance_rule_name(metric, mode),
        candidates,
        Objective::Minimize,
    ))
}

fn distance_rule_name(metric: Metric, mode: Mode) -> String {
    let m = match metric {
        Metric::Euclidean => "e",
        Metric::L1 => "l1",
    };
    let a = match mode {
        Mode::Sum => "sum",
        Mode::Max => "max",
    };
    format!("dist-{m}-{a}")
}

/// Rational sets with the least total Hamming distance to a crisp profile.
pub fn crisp_kemeny(
    profile: &[CrispJudgmentSet],
    frame: &Frame,
) -> Result<AggregationOutcome, AggregateError> {
    if profile.is_empty() {
        return Err(AggregateError::EmptyProfile);
    }
    let candidates = frame
        .rational_sets()
        .iter()
        .map(|j| Candidate {
            set: *j,
            value: profile.iter().map(|k| j.hamming(k) as f64).sum(),
        })
        .collect();
    Ok(AggregationOutcome::over_candidates(
        "kemeny",
        candidates,
        Objective::Minimize,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scoring {
    /// Sum of the members' average likelihoods.
    SumAverage,
    /// Smallest average likelihood among the members.
    MinAverage,
    /// Members supported by a strict majority at threshold `c`.
    MajorityCount { c: f64 },
}

fn implicant_outcome(
    frame: &Frame,
    rule: &str,
    score: impl Fn(&Implicant) -> f64,
) -> Result<AggregationOutcome, AggregateError> {
    let primes = frame.prime_implicants();
    if primes.is_empty() {
        return Err(AggregateError::NoImplicants);
    }
    let implicants = primes
        .iter()
        .map(|i| {
            Ok(ImplicantScore {
                implicant: *i,
                score: score(i),
                closure: frame.closure(i)?,
            })
        })
        .collect::<Result<Vec<_>, FrameError>>()?;
    let best = implicants
        .iter()
        .map(|s| s.score)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut winners: Vec<CrispJudgmentSet> = implicants
        .iter()
        .filter(|s| (s.score - best).abs() <= TIE_TOLERANCE)
        .map(|s| s.closure)
        .collect();
    winners.sort();
    winners.dedup();
    Ok(AggregationOutcome {
        rule: rule.to_string(),
        winners,
        objective: Some(Objective::Maximize),
        candidates: Vec::new(),
        implicants,
        collective: None,
        order: Vec::new(),
    })
}

fn scoring_rule_name(scoring: Scoring) -> &'static str {
    match scoring {
        Scoring::SumAverage => "pi-sum",
        Scoring::MinAverage => "pi-min",
        Scoring::MajorityCount { .. } => "pi-maj",
    }
}

fn average_score(average: &LikelihoodVector, implicant: &Implicant, scoring: Scoring) -> f64 {
    let values = implicant.literals().map(|l| average.get(l));
    match scoring {
        Scoring::MinAverage => values.fold(f64::INFINITY, f64::min),
        _ => values.sum(),
    }
}

/// Scores every prime implicant and returns the closures of the best ones.
pub fn prime_implicant_rule(
    profile: &Profile,
    frame: &Frame,
    scoring: Scoring,
) -> Result<AggregationOutcome, AggregateError> {
    check_profile(profile, Some(frame))?;
    match scoring {
        Scoring::MajorityCount { c } => {
            let q = majority_quota(profile.len());
            implicant_outcome(frame, scoring_rule_name(scoring), |i| {
                i.literals()
                    .filter(|&l| support_count(profile, l, c) >= q)
                    .count() as f64
            })
        }
        _ => prime_implicant_rule_from_average(&average_likelihoods(profile)?, frame, scoring),
    }
}

/// The prime-implicant rule driven by an average vector alone.
pub fn prime_implicant_rule_from_average(
    average: &LikelihoodVector,
    frame: &Frame,
    scoring: Scoring,
) -> Result<AggregationOutcome, AggregateError> {
    if average.issue_count() != frame.issue_count() {
        return Err(AggregateError::WidthMismatch {
            expected: frame.issue_count(),
            found: average.issue_count(),
        });
    }
    if let Scoring::MajorityCount { .. } = scoring {
        return Err(AggregateError::NeedsProfile("majority count"));
    }
    implicant_outcome(frame, scoring_rule_name(scoring), |i| {
        average_score(average, i, scoring)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quota {
    Fixed(usize),
    Majority,
    Unanimity,
}

impl Quota {
    pub fn resolve(self, n: usize) -> usize {
        match self {
            Quota::Fixed(q) => q,
            Quota::Majority => majority_quota(n),
            Quota::Unanimity => n,
        }
    }
}

/// Properties a rule satisfies by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Guarantee {
    ZeroPreservation,
    /// Unanimous support at the given threshold.
    Unanimity(f64),
    Convexity,
    Rationality,
    Systematicity,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Rule {
    Quota {
        quota: Quota,
        c: CrispVector,
    },
    Median,
    CrispMedian {
        c: CrispVector,
    },
    SequentialAverage,
    Distance {
        metric: Metric,
        mode: Mode,
    },
    Kemeny {
        c: CrispVector,
    },
    PrimeImplicant {
        scoring: Scoring,
    },
    /// Crispified judgments of one source, by zero-based index.
    Dictator {
        source: usize,
        c: CrispVector,
    },
}

/// Names accepted by [`Rule::from_name`].
pub const RULE_NAMES: &[&str] = &[
    "quota",
    "majority",
    "unanimity",
    "median",
    "crisp-median",
    "seq-avg",
    "dist-e-sum",
    "dist-e-max",
    "dist-l1-sum",
    "dist-l1-max",
    "kemeny",
    "pi-sum",
    "pi-min",
    "pi-maj",
    "dictator",
];

#[derive(Debug, Clone, Default)]
pub struct RuleOptions {
    pub quota: Option<usize>,
    pub crisp: Option<CrispVector>,
    pub dictator: usize,
}

impl Rule {
    pub fn from_name(
        name: &str,
        frame: &Frame,
        options: &RuleOptions,
    ) -> Result<Rule, AggregateError> {
        let c = match &options.crisp {
            Some(c) => {
                if c.issue_count() != frame.issue_count() {
                    return Err(AggregateError::InvalidCrispVector(format!(
                        "{} issues for an agenda of {}",
                        c.issue_count(),
                        frame.issue_count()
                    )));
                }
                c.clone()
            }
            None => CrispVector::uniform(frame.issue_count(), DEFAULT_CRISP_COEFFICIENT)?,
        };
        let uniform_c = c.max();
        Ok(match name {
            "quota" => Rule::Quota {
                quota: Quota::Fixed(
                    options
                        .quota
                        .ok_or_else(|| AggregateError::MissingQuota(name.into()))?,
                ),
                c,
            },
            "majority" => Rule::Quota {
                quota: Quota::Majority,
                c,
            },
            "unanimity" => Rule::Quota {
                quota: Quota::Unanimity,
                c,
            },
            "median" => Rule::Median,
            "crisp-median" => Rule::CrispMedian { c },
            "seq-avg" => Rule::SequentialAverage,
            "dist-e-sum" => Rule::Distance {
                metric: Metric::Euclidean,
                mode: Mode::Sum,
            },
            "dist-e-max" => Rule::Distance {
                metric: Metric::Euclidean,
                mode: Mode::Max,
            },
            "dist-l1-sum" => Rule::Distance {
                metric: Metric::L1,
                mode: Mode::Sum,
            },
            "dist-l1-max" => Rule::Distance {
                metric: Metric::L1,
                mode: Mode::Max,
            },
            "kemeny" => Rule::Kemeny { c },
            "pi-sum" => Rule::PrimeImplicant {
                scoring: Scoring::SumAverage,
            },
            "pi-min" => Rule::PrimeImplicant {
                scoring: Scoring::MinAverage,
            },
            "pi-maj" => Rule::PrimeImplicant {
                scoring: Scoring::MajorityCount { c: uniform_c },
            },
            "dictator" => Rule::Dictator {
                source: options.dictator,
                c,
            },
            other => return Err(AggregateError::UnknownRule(other.into())),
        })
    }

    pub fn name(&self) -> String {
        match self {
            Rule::Quota { quota, .. } => match quota {
                Quota::Fixed(_) => "quota".into(),
                Quota::Majority => "majority".into(),
                Quota::Unanimity => "unanimity".into(),
            },
            Rule::Median => "median".into(),
            Rule::CrispMedian { .. } => "crisp-median".into(),
            Rule::SequentialAverage => "seq-avg".into(),
            Rule::Distance { metric, mode } => distance_rule_name(*metric, *mode),
            Rule::Kemeny { .. } => "kemeny".into(),
            Rule::PrimeImplicant { scoring } => scoring_rule_name(*scoring).into(),
            Rule::Dictator { .. } => "dictator".into(),
        }
    }

    pub fn apply(
        &self,
        profile: &Profile,
        frame: &Frame,
    ) -> Result<AggregationOutcome, AggregateError> {
        let n = check_profile(profile, Some(frame))?;
        let crispified = |c: &CrispVector| -> Vec<CrispJudgmentSet> {
            profile.iter().map(|s| crispify(s, c)).collect()
        };
        let mut outcome = match self {
            Rule::Quota { quota, c } => {
                let pooled = quota_likelihood(profile, quota.resolve(n))?;
                let mut outcome = AggregationOutcome::single("", crispify(&pooled, c));
                outcome.collective = Some(pooled);
                outcome
            }
            Rule::Median => median_likelihood(profile, frame)?,
            Rule::CrispMedian { c } => crisp_median(&crispified(c), frame)?,
            Rule::SequentialAverage => sequential_average(&average_likelihoods(profile)?, frame)?,
            Rule::Distance { metric, mode } => distance_rule(profile, frame, *metric, *mode)?,
            Rule::Kemeny { c } => crisp_kemeny(&crispified(c), frame)?,
            Rule::PrimeImplicant { scoring } => prime_implicant_rule(profile, frame, *scoring)?,
            Rule::Dictator { source, c } => {
                let chosen = profile
                    .sources()
                    .get(*source)
                    .ok_or(AggregateError::NoSuchSource { index: *source, n })?;
                AggregationOutcome::single("", crispify(chosen, c))
            }
        };
        outcome.rule = self.name();
        Ok(outcome)
    }

    /// Whether the rule is defined on profiles of `n` sources.
    pub fn accepts(&self, n: usize) -> bool {
        match self {
            Rule::Quota {
                quota: Quota::Fixed(q),
                ..
            } => (1..=n).contains(q),
            Rule::Dictator { source, .. } => *source < n,
            _ => n >= 1,
        }
    }

    /// Whether the property holds for every profile by construction.
    pub fn guarantees(&self, property: Guarantee) -> bool {
        match (self, property) {
            (Rule::Quota { .. } | Rule::Dictator { .. }, Guarantee::ZeroPreservation) => true,
            (Rule::Quota { c, .. } | Rule::Dictator { c, .. }, Guarantee::Unanimity(t)) => {
                t >= c.max()
            }
            (Rule::Quota { .. }, Guarantee::Convexity) => true,
            (Rule::Quota { .. } | Rule::Dictator { .. }, Guarantee::Systematicity) => true,
            (
                Rule::Median
                | Rule::CrispMedian { .. }
                | Rule::SequentialAverage
                | Rule::Distance { .. }
                | Rule::Kemeny { .. }
                | Rule::PrimeImplicant { .. },
                Guarantee::Rationality,
            ) => true,
            _ => false,
        }
    }

    /// The pooled likelihood set, for rules that build one.
    pub fn intermediate(
        &self,
        profile: &Profile,
    ) -> Result<Option<LikelihoodJudgmentSet>, AggregateError> {
        match self {
            Rule::Quota { quota, .. } => Ok(Some(quota_likelihood(
                profile,
                quota.resolve(profile.len()),
            )?)),
            _ => Ok(None),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}
