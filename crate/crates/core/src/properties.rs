//! Axiom checkers, falsification search and generalization drivers.
//!
//! Every search draws its profiles from a seeded generator: sample `i` uses
//! its own ChaCha stream, so a report depends only on the seed and the
//! configuration, and the first counterexample is the one with the smallest
//! sample index.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::aggregate::{
    crisp_kemeny, crisp_majoritarian, crisp_median, crisp_quota, crispify, distance_rule,
    majority_quota, median_likelihood, quota_rule, AggregateError, CrispVector, Guarantee, Metric,
    Mode, Rule,
};
use crate::frame::{CrispJudgmentSet, Frame, Literal, Profile};
use crate::likelihood::{
    check_rationality, lift, lift_profile, normalize, tighten, LikelihoodError, LikelihoodJudgment,
    LikelihoodJudgmentSet,
};
use crate::lpfeas::{FeasibilityProblem, LpError};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_SAMPLES: usize = 10_000;
const MAX_RETRIES: usize = 200;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PropertyError {
    #[error(transparent)]
    Aggregate(#[from] AggregateError),
    #[error(transparent)]
    Likelihood(#[from] LikelihoodError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("could not generate a rational source after {0} attempts")]
    GenerationFailure(usize),
    #[error("{0}")]
    NotApplicable(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum JudgmentStyle {
    /// Exact probabilities of one random distribution per source.
    Equalities,
    /// Scaled-down probabilities, tightened to the bounds they imply.
    LowerBounds,
    /// Lifted rational crisp sets.
    LiftedCrisp,
}

impl JudgmentStyle {
    pub fn name(self) -> &'static str {
        match self {
            JudgmentStyle::Equalities => "equalities",
            JudgmentStyle::LowerBounds => "lower-bounds",
            JudgmentStyle::LiftedCrisp => "lifted-crisp",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "equalities" => Some(JudgmentStyle::Equalities),
            "lower-bounds" => Some(JudgmentStyle::LowerBounds),
            "lifted-crisp" => Some(JudgmentStyle::LiftedCrisp),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub style: JudgmentStyle,
    pub samples: usize,
    /// Profile sizes are drawn uniformly from this inclusive range.
    pub min_sources: usize,
    pub max_sources: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            seed: DEFAULT_SEED,
            style: JudgmentStyle::LiftedCrisp,
            samples: DEFAULT_SAMPLES,
            min_sources: 1,
            max_sources: 5,
        }
    }
}

impl GeneratorConfig {
    pub fn with_style(mut self, style: JudgmentStyle) -> Self {
        self.style = style;
        self
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_sources(mut self, min: usize, max: usize) -> Self {
        self.min_sources = min;
        self.max_sources = max;
        self
    }

    /// The random stream of one sample.
    pub fn rng(&self, sample: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(sample as u64);
        rng
    }
}

fn sparse_weights(rng: &mut ChaCha8Rng, cells: &[usize], total: usize) -> Vec<f64> {
    let mut w = vec![0.0; total];
    if cells.is_empty() {
        return w;
    }
    if rng.gen_bool(0.25) {
        w[*cells.choose(rng).unwrap()] = 1.0;
        return w;
    }
    for &c in cells {
        if rng.gen_bool(0.5) {
            w[c] = rng.gen_range(0.0..1.0);
        }
    }
    if cells.iter().all(|&c| w[c] == 0.0) {
        w[*cells.choose(rng).unwrap()] = 1.0;
    }
    w
}

/// A random distribution over world classes satisfying the probabilistic
/// constraints: a mixture of LP vertices found with random objectives.
fn constrained_weights(frame: &Frame, rng: &mut ChaCha8Rng) -> Result<Vec<f64>, PropertyError> {
    let cells = frame.cell_count();
    let problem = FeasibilityProblem::new(cells, frame.compiled_gamma_hat().to_vec())?;
    let vertices = rng.gen_range(1..=3);
    let mut mix = vec![0.0; cells];
    for _ in 0..vertices {
        let objective: Vec<f64> = (0..cells).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let point = problem.solve(&objective)?.point;
        let share: f64 = rng.gen_range(0.05..1.0);
        for (m, p) in mix.iter_mut().zip(point) {
            *m += share * p.max(0.0);
        }
    }
    Ok(mix)
}

fn probability(frame: &Frame, weights: &[f64], lit: Literal) -> f64 {
    let (mut yes, mut no) = (0.0, 0.0);
    for (c, &w) in weights.iter().enumerate() {
        if frame.cell_satisfies(c, lit) {
            yes += w;
        } else {
            no += w;
        }
    }
    yes / (yes + no)
}

fn equality_source(
    frame: &Frame,
    weights: &[f64],
    name: &str,
    pinned: Option<(usize, &LikelihoodJudgmentSet, usize)>,
) -> Result<LikelihoodJudgmentSet, PropertyError> {
    let raw: Vec<LikelihoodJudgment> = (0..frame.issue_count())
        .map(|i| {
            let lit = Literal::positive(i);
            match pinned {
                Some((target, from, issue)) if target == i => {
                    LikelihoodJudgment::exactly(lit, from.bound(Literal::positive(issue)))
                }
                _ => LikelihoodJudgment::exactly(lit, probability(frame, weights, lit)),
            }
        })
        .collect();
    Ok(normalize(&raw, frame, name)?)
}

fn base_weights(frame: &Frame, rng: &mut ChaCha8Rng) -> Result<Vec<f64>, PropertyError> {
    if frame.gamma_hat().is_empty() {
        let all: Vec<usize> = (0..frame.cell_count()).collect();
        Ok(sparse_weights(rng, &all, frame.cell_count()))
    } else {
        constrained_weights(frame, rng)
    }
}

fn lifted_source(
    frame: &Frame,
    rng: &mut ChaCha8Rng,
    name: &str,
    sign: Option<Literal>,
) -> Result<Option<LikelihoodJudgmentSet>, PropertyError> {
    let pool: Vec<&CrispJudgmentSet> = frame
        .rational_sets()
        .iter()
        .filter(|j| sign.is_none_or(|l| j.contains(l)))
        .collect();
    for _ in 0..MAX_RETRIES {
        let Some(j) = pool.choose(rng) else {
            return Ok(None);
        };
        let set = lift(j, name)?;
        if frame.gamma_hat().is_empty() || check_rationality(&set, frame)?.rational() {
            return Ok(Some(set));
        }
    }
    Err(PropertyError::GenerationFailure(MAX_RETRIES))
}

/// One rational source in the given style.
pub fn generate_source(
    frame: &Frame,
    style: JudgmentStyle,
    rng: &mut ChaCha8Rng,
    name: &str,
) -> Result<LikelihoodJudgmentSet, PropertyError> {
    match style {
        JudgmentStyle::LiftedCrisp => lifted_source(frame, rng, name, None)?
            .ok_or(PropertyError::GenerationFailure(MAX_RETRIES)),
        JudgmentStyle::Equalities => {
            for _ in 0..MAX_RETRIES {
                let weights = base_weights(frame, rng)?;
                let set = equality_source(frame, &weights, name, None)?;
                if frame.gamma_hat().is_empty() || check_rationality(&set, frame)?.rational() {
                    return Ok(set);
                }
            }
            Err(PropertyError::GenerationFailure(MAX_RETRIES))
        }
        JudgmentStyle::LowerBounds => {
            for _ in 0..MAX_RETRIES {
                let weights = base_weights(frame, rng)?;
                let raw: Vec<LikelihoodJudgment> = frame
                    .literals()
                    .map(|l| {
                        let p = probability(frame, &weights, l);
                        LikelihoodJudgment::at_least(
                            l,
                            (p * rng.gen_range(0.0..=1.0)).clamp(0.0, 1.0),
                        )
                    })
                    .collect();
                let scaled = normalize(&raw, frame, name)?;
                let repaired = tighten(&scaled, frame)?;
                if check_rationality(&repaired, frame)?.rational() {
                    return Ok(repaired);
                }
            }
            Err(PropertyError::GenerationFailure(MAX_RETRIES))
        }
    }
}

/// The profile of one sample; sources are named `1..=n`.
pub fn generate_profile(
    frame: &Frame,
    cfg: &GeneratorConfig,
    sample: usize,
) -> Result<Profile, PropertyError> {
    let mut rng = cfg.rng(sample);
    let n = rng.gen_range(cfg.min_sources.max(1)..=cfg.max_sources.max(cfg.min_sources).max(1));
    let sources = (1..=n)
        .map(|k| generate_source(frame, cfg.style, &mut rng, &k.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Profile::new(sources).expect("generated sources share the frame"))
}

/// A crisp profile of rational sets drawn uniformly.
pub fn generate_crisp_profile(
    frame: &Frame,
    cfg: &GeneratorConfig,
    sample: usize,
) -> Vec<CrispJudgmentSet> {
    let mut rng = cfg.rng(sample);
    let n = rng.gen_range(cfg.min_sources.max(1)..=cfg.max_sources.max(cfg.min_sources).max(1));
    (0..n)
        .map(|_| *frame.rational_sets().choose(&mut rng).unwrap())
        .collect()
}

/// A random valid crispifying vector with every coefficient positive.
pub fn random_crisp_vector(issues: usize, rng: &mut ChaCha8Rng) -> CrispVector {
    let mut values = Vec::with_capacity(2 * issues);
    for _ in 0..issues {
        let c: f64 = rng.gen_range(0.01..=1.0);
        let low = (1.0 - c + 1e-6).max(0.01);
        let d: f64 = if low >= 1.0 {
            1.0
        } else {
            rng.gen_range(low..=1.0)
        };
        if rng.gen_bool(0.5) {
            values.extend([c, d]);
        } else {
            values.extend([d, c]);
        }
    }
    CrispVector::new(values).expect("coefficients pairwise exceed 1")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    HoldsOnSample,
    CounterexampleFound,
    StructurallySatisfied,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::HoldsOnSample => "holds-on-sample",
            Verdict::CounterexampleFound => "counterexample-found",
            Verdict::StructurallySatisfied => "structurally-satisfied",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Theorem {
    /// Majority of a crisp profile equals the crispified likelihood majority.
    Thm1,
    /// Quota pooling commutes with crispification.
    Prop1,
    /// Crisp median equals the likelihood median of the lifted profile.
    Prop2,
    /// Kemeny equals the Euclidean-sum distance rule on the lifted profile.
    Prop4,
}

impl Theorem {
    pub const ALL: [Theorem; 4] = [
        Theorem::Thm1,
        Theorem::Prop1,
        Theorem::Prop2,
        Theorem::Prop4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Theorem::Thm1 => "thm1",
            Theorem::Prop1 => "prop1",
            Theorem::Prop2 => "prop2",
            Theorem::Prop4 => "prop4",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Theorem::ALL.into_iter().find(|t| t.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Property {
    ZeroPreservation,
    Unanimity { c: f64 },
    Convexity,
    Systematicity,
    NonDictatorship,
    Rationality,
    Generalization(Theorem),
}

impl Property {
    pub fn name(&self) -> String {
        match self {
            Property::ZeroPreservation => "zpp".into(),
            Property::Unanimity { .. } => "unanimity".into(),
            Property::Convexity => "convexity".into(),
            Property::Systematicity => "systematicity".into(),
            Property::NonDictatorship => "non-dictatorship".into(),
            Property::Rationality => "rationality".into(),
            Property::Generalization(t) => format!("generalization:{}", t.name()),
        }
    }

    pub fn needs_rule(&self) -> bool {
        !matches!(self, Property::Generalization(_))
    }
}

/// The inputs that exhibit a violation.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// A profile on which the rule's outcome breaks a per-profile property.
    Profile {
        profile: Profile,
        literal: Option<Literal>,
    },
    /// Two profiles whose projections on `left` and `right` agree while the
    /// outcomes treat the two literals differently.
    Transplant {
        first: Profile,
        second: Profile,
        left: Literal,
        right: Literal,
    },
    /// A source that no sampled profile separated from the outcome.
    Dictator { source: usize },
    /// A crisp profile on which the two sides of a theorem disagree.
    Crisp {
        profile: Vec<CrispJudgmentSet>,
        quota: usize,
        crisp: CrispVector,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub sample: usize,
    pub witness: Witness,
    pub detail: String,
}

impl Counterexample {
    /// Re-evaluates the stored inputs; `true` when the violation reproduces.
    pub fn reverify(
        &self,
        property: &Property,
        rule: Option<&Rule>,
        frame: &Frame,
        cfg: &GeneratorConfig,
    ) -> Result<bool, PropertyError> {
        replay(property, rule, frame, &self.witness, cfg).map(|v| v.is_some())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub property: String,
    pub rule: Option<String>,
    pub verdict: Verdict,
    pub counterexample: Option<Counterexample>,
    pub samples: usize,
    pub seed: u64,
    pub style: JudgmentStyle,
    pub note: Option<String>,
}

impl PropertyReport {
    pub fn holds(&self) -> bool {
        self.verdict != Verdict::CounterexampleFound
    }
}

impl fmt::Display for PropertyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.property)?;
        if let Some(rule) = &self.rule {
            write!(f, " [{rule}]")?;
        }
        write!(
            f,
            ": {} after {} samples (seed {})",
            self.verdict.name(),
            self.samples,
            self.seed
        )
    }
}

fn winners(
    rule: &Rule,
    profile: &Profile,
    frame: &Frame,
) -> Result<Vec<CrispJudgmentSet>, PropertyError> {
    Ok(rule.apply(profile, frame)?.winners)
}

fn unanimous_literals(profile: &Profile, threshold: f64) -> Vec<Literal> {
    let m = profile.sources()[0].issue_count();
    Literal::all(m)
        .filter(|&l| profile.iter().all(|s| s.bound(l) >= threshold))
        .collect()
}

/// A literal of the zero set missing from some winner, when the zero set is
/// consistent with the propositional constraints.
pub fn zpp_violation(
    rule: &Rule,
    frame: &Frame,
    profile: &Profile,
) -> Result<Option<String>, PropertyError> {
    let zero = unanimous_literals(profile, 1.0);
    let z = CrispJudgmentSet::from_literals(frame.issue_count(), zero.iter().copied());
    if !frame.is_consistent(&z) {
        return Ok(None);
    }
    for w in winners(rule, profile, frame)? {
        if let Some(l) = zero.iter().find(|l| !w.contains(**l)) {
            return Ok(Some(format!(
                "{} has likelihood 1 in every source but winner {} omits it",
                frame.literal_text(*l),
                w.signs()
            )));
        }
    }
    Ok(None)
}

pub fn unanimity_violation(
    rule: &Rule,
    frame: &Frame,
    profile: &Profile,
    c: f64,
) -> Result<Option<String>, PropertyError> {
    let unanimous = unanimous_literals(profile, c);
    for w in winners(rule, profile, frame)? {
        if let Some(l) = unanimous.iter().find(|l| !w.contains(**l)) {
            return Ok(Some(format!(
                "every source gives {} at least {c} but winner {} omits it",
                frame.literal_text(*l),
                w.signs()
            )));
        }
    }
    Ok(None)
}

pub fn convexity_violation(
    rule: &Rule,
    frame: &Frame,
    profile: &Profile,
) -> Result<Option<String>, PropertyError> {
    let pooled = rule.intermediate(profile)?.ok_or_else(|| {
        PropertyError::NotApplicable(format!(
            "rule `{}` builds no pooled likelihood set",
            rule.name()
        ))
    })?;
    for l in frame.literals() {
        let column = profile.column(l);
        let lo = column.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = column.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let a = pooled.bound(l);
        if a < lo || a > hi {
            return Ok(Some(format!(
                "pooled bound {a} on {} lies outside [{lo}, {hi}]",
                frame.literal_text(l)
            )));
        }
    }
    Ok(None)
}

pub fn rationality_violation(
    rule: &Rule,
    frame: &Frame,
    profile: &Profile,
) -> Result<Option<String>, PropertyError> {
    for w in winners(rule, profile, frame)? {
        if !frame.is_rational(&w) {
            return Ok(Some(format!("winner {} is not rational", w.signs())));
        }
    }
    Ok(None)
}

/// Compares the treatment of `left` on the first profile with that of `right`
/// on the second, using the lexicographically first winner of each.
pub fn systematicity_violation(
    rule: &Rule,
    frame: &Frame,
    first: &Profile,
    second: &Profile,
    left: Literal,
    right: Literal,
) -> Result<Option<String>, PropertyError> {
    let projections_agree = first.len() == second.len()
        && [false, true].into_iter().all(|neg| {
            let a = Literal {
                negated: neg,
                ..left
            };
            let b = Literal {
                negated: neg,
                ..right
            };
            first
                .iter()
                .zip(second.iter())
                .all(|(s, t)| s.entry(a) == t.entry(b))
        });
    if !projections_agree {
        return Err(PropertyError::NotApplicable(
            "the two profiles do not share the transplanted projection".into(),
        ));
    }
    let w1 = rule.apply(first, frame)?.resolute();
    let w2 = rule.apply(second, frame)?.resolute();
    for neg in [false, true] {
        let a = Literal {
            negated: neg,
            ..left
        };
        let b = Literal {
            negated: neg,
            ..right
        };
        if w1.contains(a) != w2.contains(b) {
            return Ok(Some(format!(
                "{} {} the first outcome {} but {} {} the second outcome {}",
                frame.literal_text(a),
                if w1.contains(a) { "is in" } else { "is not in" },
                w1.signs(),
                frame.literal_text(b),
                if w2.contains(b) { "is in" } else { "is not in" },
                w2.signs()
            )));
        }
    }
    Ok(None)
}

/// Whether the outcome differs from the outcome of the profile in which
/// every source copies source `k`.
pub fn separates_from(
    rule: &Rule,
    frame: &Frame,
    profile: &Profile,
    k: usize,
) -> Result<bool, PropertyError> {
    let copy = Profile::new(vec![profile.sources()[k].clone(); profile.len()])
        .expect("copies share the frame");
    Ok(winners(rule, profile, frame)? != winners(rule, &copy, frame)?)
}

pub fn generalization_violation(
    theorem: Theorem,
    frame: &Frame,
    profile: &[CrispJudgmentSet],
    quota: usize,
    crisp: &CrispVector,
) -> Result<Option<String>, PropertyError> {
    let lifted = lift_profile(profile)?;
    let (left, right) = match theorem {
        Theorem::Thm1 => (
            vec![crisp_majoritarian(profile)?],
            vec![quota_rule(&lifted, majority_quota(profile.len()), crisp)?],
        ),
        Theorem::Prop1 => {
            let crispified: Vec<CrispJudgmentSet> =
                lifted.iter().map(|s| crispify(s, crisp)).collect();
            (
                vec![quota_rule(&lifted, quota, crisp)?],
                vec![crisp_quota(&crispified, quota)?],
            )
        }
        Theorem::Prop2 => (
            crisp_median(profile, frame)?.winners,
            median_likelihood(&lifted, frame)?.winners,
        ),
        Theorem::Prop4 => (
            crisp_kemeny(profile, frame)?.winners,
            distance_rule(&lifted, frame, Metric::Euclidean, Mode::Sum)?.winners,
        ),
    };
    if left == right {
        return Ok(None);
    }
    let render = |v: &[CrispJudgmentSet]| v.iter().map(|s| s.signs()).collect::<Vec<_>>().join(" ");
    Ok(Some(format!(
        "crisp side gives [{}] but the likelihood side gives [{}]",
        render(&left),
        render(&right)
    )))
}

fn replay(
    property: &Property,
    rule: Option<&Rule>,
    frame: &Frame,
    witness: &Witness,
    cfg: &GeneratorConfig,
) -> Result<Option<String>, PropertyError> {
    let need_rule = || {
        rule.ok_or_else(|| {
            PropertyError::NotApplicable(format!("{} needs a rule", property.name()))
        })
    };
    match (property, witness) {
        (Property::ZeroPreservation, Witness::Profile { profile, .. }) => {
            zpp_violation(need_rule()?, frame, profile)
        }
        (Property::Unanimity { c }, Witness::Profile { profile, .. }) => {
            unanimity_violation(need_rule()?, frame, profile, *c)
        }
        (Property::Convexity, Witness::Profile { profile, .. }) => {
            convexity_violation(need_rule()?, frame, profile)
        }
        (Property::Rationality, Witness::Profile { profile, .. }) => {
            rationality_violation(need_rule()?, frame, profile)
        }
        (
            Property::Systematicity,
            Witness::Transplant {
                first,
                second,
                left,
                right,
            },
        ) => systematicity_violation(need_rule()?, frame, first, second, *left, *right),
        (Property::NonDictatorship, Witness::Dictator { source }) => {
            let rule = need_rule()?;
            for i in 0..cfg.samples {
                let profile = generate_profile(frame, cfg, i)?;
                if *source < profile.len()
                    && rule.accepts(profile.len())
                    && separates_from(rule, frame, &profile, *source)?
                {
                    return Ok(None);
                }
            }
            Ok(Some(format!(
                "no sample separates the outcome from source {}",
                source + 1
            )))
        }
        (
            Property::Generalization(t),
            Witness::Crisp {
                profile,
                quota,
                crisp,
            },
        ) => generalization_violation(*t, frame, profile, *quota, crisp),
        _ => Err(PropertyError::NotApplicable(
            "the witness does not belong to this property".into(),
        )),
    }
}

fn report(
    property: &Property,
    rule: Option<&Rule>,
    cfg: &GeneratorConfig,
    structural: bool,
    found: Option<Counterexample>,
    samples: usize,
) -> PropertyReport {
    let verdict = match (&found, structural) {
        (Some(_), _) => Verdict::CounterexampleFound,
        (None, true) => Verdict::StructurallySatisfied,
        (None, false) => Verdict::HoldsOnSample,
    };
    PropertyReport {
        property: property.name(),
        rule: rule.map(|r| r.name()),
        verdict,
        counterexample: found,
        samples,
        seed: cfg.seed,
        style: cfg.style,
        note: None,
    }
}

/// Runs a per-profile check over the sample and stops at the first violation.
fn search_profiles(
    property: &Property,
    rule: &Rule,
    frame: &Frame,
    cfg: &GeneratorConfig,
    structural: bool,
    check: impl Fn(&Profile) -> Result<Option<String>, PropertyError>,
) -> Result<PropertyReport, PropertyError> {
    for i in 0..cfg.samples {
        let profile = generate_profile(frame, cfg, i)?;
        if !rule.accepts(profile.len()) {
            continue;
        }
        if let Some(detail) = check(&profile)? {
            let found = Counterexample {
                sample: i,
                witness: Witness::Profile {
                    profile,
                    literal: None,
                },
                detail,
            };
            return Ok(report(
                property,
                Some(rule),
                cfg,
                structural,
                Some(found),
                i + 1,
            ));
        }
    }
    Ok(report(
        property,
        Some(rule),
        cfg,
        structural,
        None,
        cfg.samples,
    ))
}

pub fn check_zpp(
    rule: &Rule,
    frame: &Frame,
    cfg: &GeneratorConfig,
) -> Result<PropertyReport, PropertyError> {
    search_profiles(
        &Property::ZeroPreservation,
        rule,
        frame,
        cfg,
        rule.guarantees(Guarantee::ZeroPreservation),
        |p| zpp_violation(rule, frame, p),
    )
}

pub fn check_c_unanimity(
    rule: &Rule,
    frame: &Frame,
    cfg: &GeneratorConfig,
    c: f64,
) -> Result<PropertyReport, PropertyError> {
    search_profiles(
        &Property::Unanimity { c },
        rule,
        frame,
        cfg,
        rule.guarantees(Guarantee::Unanimity(c)),
        |p| unanimity_violation(rule, frame, p, c),
    )
}

pub fn check_convexity(
    rule: &Rule,
    frame: &Frame,
    cfg: &GeneratorConfig,
) -> Result<PropertyReport, PropertyError> {
    if !matches!(rule, Rule::Quota { .. }) {
        return Err(PropertyError::NotApplicable(format!(
            "rule `{}` builds no pooled likelihood set",
            rule.name()
        )));
    }
    search_profiles(
        &Property::Convexity,
        rule,
        frame,
        cfg,
        rule.guarantees(Guarantee::Convexity),
        |p| convexity_violation(rule, frame, p),
    )
}

pub fn check_rule_rationality(
    rule: &Rule,
    frame: &Frame,
    cfg: &GeneratorConfig,
) -> Result<PropertyReport, PropertyError> {
    search_profiles(
        &Property::Rationality,
        rule,
        frame,
        cfg,
        rule.guarantees(Guarantee::Rationality),
        |p| rationality_violation(rule, frame, p),
    )
}

/// A source whose projection on `target` copies `from`'s projection on
/// `issue`, with every other judgment drawn afresh.
fn transplanted_source(
    frame: &Frame,
    style: JudgmentStyle,
    rng: &mut ChaCha8Rng,
    from: &LikelihoodJudgmentSet,
    issue: usize,
    target: usize,
) -> Result<Option<LikelihoodJudgmentSet>, PropertyError> {
    match style {
        JudgmentStyle::LiftedCrisp => {
            let sign = if from.bound(Literal::positive(issue)) == 1.0 {
                Literal::positive(target)
            } else {
                Literal::negative(target)
            };
            lifted_source(frame, rng, from.source(), Some(sign))
        }
        JudgmentStyle::Equalities => {
            let a = from.bound(Literal::positive(issue));
            let yes: Vec<usize> = frame.literal_cells(Literal::positive(target)).collect();
            let no: Vec<usize> = frame.literal_cells(Literal::negative(target)).collect();
            let wy = sparse_weights(rng, &yes, frame.cell_count());
            let wn = sparse_weights(rng, &no, frame.cell_count());
            let (sy, sn): (f64, f64) = (wy.iter().sum(), wn.iter().sum());
            let weights: Vec<f64> = wy
                .iter()
                .zip(&wn)
                .map(|(y, n)| a * y / sy + (1.0 - a) * n / sn)
                .collect();
            equality_source(frame, &weights, from.source(), Some((target, from, issue))).map(Some)
        }
        JudgmentStyle::LowerBounds => Err(PropertyError::NotApplicable(
            "systematicity search supports the equalities and lifted-crisp styles".into(),
        )),
    }
}

/// Falsification search for systematicity by transplanting one issue's
/// projection onto another issue of a fresh profile.
pub fn check_systematicity(
    rule: &Rule,
    frame: &Frame,
    cfg: &GeneratorConfig,
) -> Result<PropertyReport, PropertyError> {
    let property = Property::Systematicity;
    if !frame.gamma_hat().is_empty() {
        return Err(PropertyError::NotApplicable(
            "systematicity search is restricted to frames without probabilistic constraints".into(),
        ));
    }
    let structural = rule.guarantees(Guarantee::Systematicity);
    let m = frame.issue_count();
    'samples: for i in 0..cfg.samples {
        let first = generate_profile(frame, cfg, i)?;
        if !rule.accepts(first.len()) {
            continue;
        }
        let mut rng = cfg.rng(i);
        // Skip past the words that built the first profile.
        rng.set_word_pos(1 << 40);
        let issue = rng.gen_range(0..m);
        let target = rng.gen_range(0..m);
        let mut sources = Vec::with_capacity(first.len());
        for s in first.iter() {
            match transplanted_source(frame, cfg.style, &mut rng, s, issue, target)? {
                Some(t) => sources.push(t),
                None => continue 'samples,
            }
        }
        let second = Profile::new(sources).expect("transplanted sources share the frame");
        let (left, right) = (Literal::positive(issue), Literal::positive(target));
        if let Some(detail) = systematicity_violation(rule, frame, &first, &second, left, right)? {
            let found = Counterexample {
                sample: i,
                witness: Witness::Transplant {
                    first,
                    second,
                    left,
                    right,
                },
                detail,
            };
            let mut r = report(&property, Some(rule), cfg, structural, Some(found), i + 1);
            r.note = Some("restricted to frames without probabilistic constraints".into());
            return Ok(r);
        }
    }
    let mut r = report(&property, Some(rule), cfg, structural, None, cfg.samples);
    r.note = Some("restricted to frames without probabilistic constraints".into());
    Ok(r)
}

/// Looks, for every source position, for a profile whose outcome differs
/// from the outcome when all sources copy that source.
pub fn check_non_dictatorship(
    rule: &Rule,
    frame: &Frame,
    cfg: &GeneratorConfig,
) -> Result<PropertyReport, PropertyError> {
    let property = Property::NonDictatorship;
    let positions = cfg.max_sources.max(cfg.min_sources).max(1);
    let mut separated = vec![false; positions];
    let mut seen = vec![false; positions];
    for i in 0..cfg.samples {
        let profile = generate_profile(frame, cfg, i)?;
        if !rule.accepts(profile.len()) {
            continue;
        }
        for k in 0..profile.len() {
            seen[k] = true;
            if !separated[k] && separates_from(rule, frame, &profile, k)? {
                separated[k] = true;
            }
        }
        if separated.iter().all(|s| *s) {
            return Ok(report(&property, Some(rule), cfg, false, None, i + 1));
        }
    }
    let source = (0..positions)
        .find(|&k| seen[k] && !separated[k])
        .or_else(|| (0..positions).find(|&k| !separated[k]))
        .unwrap_or(0);
    let found = Counterexample {
        sample: cfg.samples.saturating_sub(1),
        witness: Witness::Dictator { source },
        detail: format!("no sample separates the outcome from source {}", source + 1),
    };
    Ok(report(
        &property,
        Some(rule),
        cfg,
        false,
        Some(found),
        cfg.samples,
    ))
}

/// Evaluates both sides of a generalization result on lifted crisp profiles.
pub fn check_generalization(
    theorem: Theorem,
    frame: &Frame,
    cfg: &GeneratorConfig,
) -> Result<PropertyReport, PropertyError> {
    let property = Property::Generalization(theorem);
    for i in 0..cfg.samples {
        let profile = generate_crisp_profile(frame, cfg, i);
        let mut rng = cfg.rng(i);
        rng.set_word_pos(1 << 40);
        let quota = rng.gen_range(1..=profile.len());
        let crisp = random_crisp_vector(frame.issue_count(), &mut rng);
        if let Some(detail) = generalization_violation(theorem, frame, &profile, quota, &crisp)? {
            let found = Counterexample {
                sample: i,
                witness: Witness::Crisp {
                    profile,
                    quota,
                    crisp,
                },
                detail,
            };
            let mut cfg = *cfg;
            cfg.style = JudgmentStyle::LiftedCrisp;
            return Ok(report(&property, None, &cfg, false, Some(found), i + 1));
        }
    }
    let mut cfg = *cfg;
    cfg.style = JudgmentStyle::LiftedCrisp;
    Ok(report(&property, None, &cfg, false, None, cfg.samples))
}

/// Dispatches to the checker of `property`.
pub fn check(
    property: &Property,
    rule: Option<&Rule>,
    frame: &Frame,
    cfg: &GeneratorConfig,
) -> Result<PropertyReport, PropertyError> {
    if let Property::Generalization(t) = property {
        return check_generalization(*t, frame, cfg);
    }
    let rule = rule
        .ok_or_else(|| PropertyError::NotApplicable(format!("{} needs a rule", property.name())))?;
    match property {
        Property::ZeroPreservation => check_zpp(rule, frame, cfg),
        Property::Unanimity { c } => check_c_unanimity(rule, frame, cfg, *c),
        Property::Convexity => check_convexity(rule, frame, cfg),
        Property::Systematicity => check_systematicity(rule, frame, cfg),
        Property::NonDictatorship => check_non_dictatorship(rule, frame, cfg),
        Property::Rationality => check_rule_rationality(rule, frame, cfg),
        Property::Generalization(_) => unreachable!(),
    }
}

/// Re-runs a stored witness.
pub fn replay_witness(
    property: &Property,
    rule: Option<&Rule>,
    frame: &Frame,
    witness: &Witness,
    cfg: &GeneratorConfig,
) -> Result<Option<String>, PropertyError> {
    replay(property, rule, frame, witness, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregate::RuleOptions;

    fn co2() -> Frame {
        Frame::from_text(&["p", "q"], &["p", "p -> q", "q"], &["true"]).unwrap()
    }

    fn rule(name: &str, frame: &Frame) -> Rule {
        Rule::from_name(
            name,
            frame,
            &RuleOptions {
                quota: Some(2),
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn generation_is_deterministic_and_rational() {
        let frame = co2();
        for style in [
            JudgmentStyle::Equalities,
            JudgmentStyle::LowerBounds,
            JudgmentStyle::LiftedCrisp,
        ] {
            let cfg = GeneratorConfig::default().with_style(style);
            for i in 0..30 {
                let a = generate_profile(&frame, &cfg, i).unwrap();
                let b = generate_profile(&frame, &cfg, i).unwrap();
                assert_eq!(a, b);
                for s in a.iter() {
                    assert!(
                        check_rationality(s, &frame).unwrap().rational(),
                        "{style:?} {s}"
                    );
                }
            }
        }
    }

    #[test]
    fn generator_respects_probabilistic_constraints() {
        use crate::frame::IssueConstraint;
        use crate::lpfeas::Relation;
        let atoms = crate::formula::AtomTable::new(["p1", "p2", "p3"]).unwrap();
        let agenda: Vec<_> = ["p1", "p2", "p3"]
            .iter()
            .map(|a| atoms.parse(a).unwrap())
            .collect();
        let constraint = IssueConstraint {
            terms: agenda.iter().map(|f| (1.0, f.clone())).collect(),
            relation: Relation::Eq,
            bound: 1.0,
        };
        let frame = Frame::new(atoms, agenda, vec![], vec![constraint]).unwrap();
        for style in [JudgmentStyle::Equalities, JudgmentStyle::LowerBounds] {
            let cfg = GeneratorConfig::default().with_style(style);
            for i in 0..10 {
                for s in generate_profile(&frame, &cfg, i).unwrap().iter() {
                    assert!(check_rationality(s, &frame).unwrap().rational());
                }
            }
        }
    }

    #[test]
    fn quota_is_structurally_convex_and_zero_preserving() {
        let frame = co2();
        let cfg = GeneratorConfig::default()
            .with_style(JudgmentStyle::Equalities)
            .with_samples(300);
        let quota = rule("quota", &frame);
        assert_eq!(
            check_convexity(&quota, &frame, &cfg).unwrap().verdict,
            Verdict::StructurallySatisfied
        );
        assert_eq!(
            check_zpp(&quota, &frame, &cfg).unwrap().verdict,
            Verdict::StructurallySatisfied
        );
        assert!(check_convexity(&rule("median", &frame), &frame, &cfg).is_err());
    }

    #[test]
    fn median_systematicity_counterexample_reverifies() {
        let frame = co2();
        let cfg = GeneratorConfig::default().with_samples(2000);
        let median = rule("median", &frame);
        let report = check_systematicity(&median, &frame, &cfg).unwrap();
        assert_eq!(report.verdict, Verdict::CounterexampleFound);
        let ce = report.counterexample.unwrap();
        assert!(ce
            .reverify(&Property::Systematicity, Some(&median), &frame, &cfg)
            .unwrap());
    }

    #[test]
    fn dictator_is_systematic_and_dictatorial() {
        let frame = co2();
        let cfg = GeneratorConfig::default().with_samples(500);
        let dictator = rule("dictator", &frame);
        assert!(check_systematicity(&dictator, &frame, &cfg)
            .unwrap()
            .holds());
        assert!(check_rule_rationality(&dictator, &frame, &cfg)
            .unwrap()
            .holds());
        let nd = check_non_dictatorship(&dictator, &frame, &cfg).unwrap();
        assert_eq!(nd.verdict, Verdict::CounterexampleFound);
        assert_eq!(
            nd.counterexample.unwrap().witness,
            Witness::Dictator { source: 0 }
        );
        let median = check_non_dictatorship(&rule("median", &frame), &frame, &cfg).unwrap();
        assert_eq!(median.verdict, Verdict::HoldsOnSample);
    }

    #[test]
    fn single_issue_frame_is_systematic() {
        let frame = Frame::from_text(&["p"], &["p"], &[]).unwrap();
        let cfg = GeneratorConfig::default().with_samples(200);
        assert!(check_systematicity(&rule("median", &frame), &frame, &cfg)
            .unwrap()
            .holds());
    }

    #[test]
    fn zpp_guard_on_inconsistent_zero_set() {
        let frame = Frame::from_text(&["f1", "f2"], &["f1", "f2"], &["f1 -> f2"]).unwrap();
        let s = normalize(
            &[
                LikelihoodJudgment::exactly(Literal::positive(0), 1.0),
                LikelihoodJudgment::exactly(Literal::positive(1), 0.0),
            ],
            &frame,
            "1",
        )
        .unwrap();
        let profile = Profile::new(vec![s.clone(), s]).unwrap();
        let median = rule("median", &frame);
        assert_eq!(zpp_violation(&median, &frame, &profile).unwrap(), None);
    }

    #[test]
    fn proven_generalizations_hold() {
        let frame = co2();
        let cfg = GeneratorConfig::default().with_samples(300);
        for t in [Theorem::Thm1, Theorem::Prop1, Theorem::Prop2] {
            let r = check_generalization(t, &frame, &cfg).unwrap();
            assert_eq!(
                r.verdict,
                Verdict::HoldsOnSample,
                "{t:?}: {:?}",
                r.counterexample
            );
        }
    }
}
