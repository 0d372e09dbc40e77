//! Likelihood judgments `l(phi) >= a` and `l(phi) = a`, and sets of them.
//!
//! A source's set is rational when it has an entry for every literal, is
//! satisfiable together with the frame's probabilistic constraints, and
//! already states every lower bound it implies. Satisfiability and implied
//! bounds are decided with the LP kernel, one variable per world class.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame::{CrispJudgmentSet, Frame, FrameError, Literal, Profile};
use crate::lpfeas::{
    FeasibilityProblem, LinearConstraint, LpError, Relation, COMPARISON_TOLERANCE,
};

/// Slack allowed when checking `a + a' <= 1` and `a' = 1 - a`.
pub const BOUND_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LikelihoodError {
    #[error("literal {0} is stated more than once")]
    DuplicateIssue(String),
    #[error("judgments on {literal} and its negation conflict: {detail}")]
    Conflict { literal: String, detail: String },
    #[error("bound {bound} on {literal} is outside [0, 1]")]
    BoundOutOfRange { literal: String, bound: f64 },
    #[error("literal refers to issue {0}, outside the agenda")]
    UnknownIssue(usize),
    #[error("crisp set {0} is not complete")]
    Incomplete(String),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Frame(#[from] FrameError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum JudgmentRelation {
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "==")]
    Exactly,
}

impl JudgmentRelation {
    pub fn symbol(self) -> &'static str {
        match self {
            JudgmentRelation::AtLeast => ">=",
            JudgmentRelation::Exactly => "==",
        }
    }

    fn lp(self) -> Relation {
        match self {
            JudgmentRelation::AtLeast => Relation::Ge,
            JudgmentRelation::Exactly => Relation::Eq,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LikelihoodJudgment {
    pub literal: Literal,
    pub relation: JudgmentRelation,
    pub bound: f64,
}

impl LikelihoodJudgment {
    pub fn at_least(literal: Literal, bound: f64) -> Self {
        LikelihoodJudgment {
            literal,
            relation: JudgmentRelation::AtLeast,
            bound,
        }
    }

    pub fn exactly(literal: Literal, bound: f64) -> Self {
        LikelihoodJudgment {
            literal,
            relation: JudgmentRelation::Exactly,
            bound,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub relation: JudgmentRelation,
    pub bound: f64,
}

impl Entry {
    pub const ABSTENTION: Entry = Entry {
        relation: JudgmentRelation::AtLeast,
        bound: 0.0,
    };
}

/// One entry per literal, indexed by [`Literal::index`].
///
/// Sets built by [`normalize`] satisfy `a(phi) + a(!phi) <= 1` and pair every
/// equality with the complementary equality. Collective sets produced by
/// aggregation (the quota functions) only carry bounds and may violate the
/// pairwise condition.
#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodJudgmentSet {
    source: String,
    entries: Vec<Entry>,
}

impl LikelihoodJudgmentSet {
    pub(crate) fn from_entries(source: impl Into<String>, entries: Vec<Entry>) -> Self {
        debug_assert!(entries.len().is_multiple_of(2));
        LikelihoodJudgmentSet {
            source: source.into(),
            entries,
        }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = source.into();
        self
    }

    pub fn issue_count(&self) -> usize {
        self.entries.len() / 2
    }

    pub fn entry(&self, lit: Literal) -> Entry {
        self.entries[lit.index()]
    }

    pub fn bound(&self, lit: Literal) -> f64 {
        self.entries[lit.index()].bound
    }

    pub fn relation(&self, lit: Literal) -> JudgmentRelation {
        self.entries[lit.index()].relation
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    /// Bounds in literal index order.
    pub fn bounds(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.bound).collect()
    }

    /// Every entry as an explicit judgment, abstentions included.
    pub fn judgments(&self) -> Vec<LikelihoodJudgment> {
        self.entries
            .iter()
            .enumerate()
            .map(|(i, e)| LikelihoodJudgment {
                literal: Literal::from_index(i),
                relation: e.relation,
                bound: e.bound,
            })
            .collect()
    }

    /// Entries other than abstentions.
    pub fn stated(&self) -> Vec<LikelihoodJudgment> {
        self.judgments()
            .into_iter()
            .filter(|j| !(j.relation == JudgmentRelation::AtLeast && j.bound == 0.0))
            .collect()
    }
}

impl fmt::Display for LikelihoodJudgmentSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.source)?;
        for j in self.stated() {
            write!(
                f,
                " l({}{}){}{}",
                if j.literal.negated { "!" } else { "" },
                j.literal.issue,
                j.relation.symbol(),
                j.bound
            )?;
        }
        Ok(())
    }
}

/// Completes a list of stated judgments into a full set.
///
/// Unstated literals become abstentions `l(phi) >= 0`. An equality on a
/// literal fixes its complement to the complementary equality.
pub fn normalize(
    raw: &[LikelihoodJudgment],
    frame: &Frame,
    source: &str,
) -> Result<LikelihoodJudgmentSet, LikelihoodError> {
    let m = frame.issue_count();
    let mut stated: Vec<Option<Entry>> = vec![None; 2 * m];
    for j in raw {
        if j.literal.issue >= m {
            return Err(LikelihoodError::UnknownIssue(j.literal.issue));
        }
        if !(0.0..=1.0).contains(&j.bound) {
            return Err(LikelihoodError::BoundOutOfRange {
                literal: frame.literal_text(j.literal),
                bound: j.bound,
            });
        }
        let slot = &mut stated[j.literal.index()];
        if slot.is_some() {
            return Err(LikelihoodError::DuplicateIssue(
                frame.literal_text(j.literal),
            ));
        }
        *slot = Some(Entry {
            relation: j.relation,
            bound: j.bound,
        });
    }

    let mut entries = vec![Entry::ABSTENTION; 2 * m];
    for issue in 0..m {
        let pos = Literal::positive(issue);
        let neg = Literal::negative(issue);
        let conflict = |detail: String| LikelihoodError::Conflict {
            literal: frame.literal_text(pos),
            detail,
        };
        let (p, n) = (stated[pos.index()], stated[neg.index()]);
        let (pe, ne) = match (p, n) {
            (None, None) => (Entry::ABSTENTION, Entry::ABSTENTION),
            (Some(e), None) | (None, Some(e)) => {
                let other = if e.relation == JudgmentRelation::Exactly {
                    Entry {
                        relation: JudgmentRelation::Exactly,
                        bound: 1.0 - e.bound,
                    }
                } else {
                    Entry::ABSTENTION
                };
                if p.is_some() {
                    (e, other)
                } else {
                    (other, e)
                }
            }
            (Some(a), Some(b)) => {
                use JudgmentRelation::*;
                match (a.relation, b.relation) {
                    (Exactly, Exactly) => {
                        if (a.bound + b.bound - 1.0).abs() > BOUND_TOLERANCE {
                            return Err(conflict(format!(
                                "equalities {} and {} do not sum to 1",
                                a.bound, b.bound
                            )));
                        }
                        (a, b)
                    }
                    (Exactly, AtLeast) | (AtLeast, Exactly) => {
                        let (eq, ge) = if a.relation == Exactly {
                            (a, b)
                        } else {
                            (b, a)
                        };
                        if ge.bound > 1.0 - eq.bound + BOUND_TOLERANCE {
                            return Err(conflict(format!(
                                "lower bound {} exceeds 1 - {}",
                                ge.bound, eq.bound
                            )));
                        }
                        let upgraded = Entry {
                            relation: Exactly,
                            bound: 1.0 - eq.bound,
                        };
                        if a.relation == Exactly {
                            (a, upgraded)
                        } else {
                            (upgraded, b)
                        }
                    }
                    (AtLeast, AtLeast) => {
                        if a.bound + b.bound > 1.0 + BOUND_TOLERANCE {
                            return Err(conflict(format!(
                                "lower bounds {} and {} sum above 1",
                                a.bound, b.bound
                            )));
                        }
                        (a, b)
                    }
                }
            }
        };
        entries[pos.index()] = pe;
        entries[neg.index()] = ne;
    }
    Ok(LikelihoodJudgmentSet::from_entries(source, entries))
}

/// A literal whose stated lower bound is weaker than the one it implies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpliedBound {
    pub literal: Literal,
    pub stated: f64,
    pub implied: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RationalityReport {
    pub complete: bool,
    pub consistent: bool,
    pub is_final: bool,
    pub offending: Vec<ImpliedBound>,
}

impl RationalityReport {
    pub fn rational(&self) -> bool {
        self.complete && self.consistent && self.is_final
    }
}

fn source_problem(
    set: &LikelihoodJudgmentSet,
    frame: &Frame,
) -> Result<FeasibilityProblem, LikelihoodError> {
    let mut constraints: Vec<LinearConstraint> = frame.compiled_gamma_hat().to_vec();
    for j in set.judgments() {
        if j.relation == JudgmentRelation::AtLeast && j.bound <= 0.0 {
            continue;
        }
        constraints.push(LinearConstraint::on_worlds(
            frame.literal_cells(j.literal),
            j.relation.lp(),
            j.bound,
        ));
    }
    Ok(FeasibilityProblem::new(frame.cell_count(), constraints)?)
}

/// Whether the set is satisfiable together with the probabilistic constraints.
pub fn is_consistent(set: &LikelihoodJudgmentSet, frame: &Frame) -> Result<bool, LikelihoodError> {
    Ok(source_problem(set, frame)?.feasible()?)
}

/// Strongest lower bound on every literal implied by the set, in index order.
pub fn implied_bounds(
    set: &LikelihoodJudgmentSet,
    frame: &Frame,
) -> Result<Vec<f64>, LikelihoodError> {
    let problem = source_problem(set, frame)?;
    frame
        .literals()
        .map(|l| {
            problem
                .minimize(&frame.literal_indicator(l))
                .map(|v| v.clamp(0.0, 1.0))
                .map_err(LikelihoodError::from)
        })
        .collect()
}

/// Raises every lower bound to the bound the set implies. The feasible region
/// is unchanged, so one pass yields a final set.
pub fn tighten(
    set: &LikelihoodJudgmentSet,
    frame: &Frame,
) -> Result<LikelihoodJudgmentSet, LikelihoodError> {
    let implied = implied_bounds(set, frame)?;
    let entries = set
        .entries()
        .iter()
        .zip(implied)
        .map(|(e, imp)| match e.relation {
            JudgmentRelation::AtLeast => Entry {
                relation: e.relation,
                bound: e.bound.max(imp),
            },
            JudgmentRelation::Exactly => *e,
        })
        .collect();
    Ok(LikelihoodJudgmentSet::from_entries(set.source(), entries))
}

/// Completeness, consistency with the probabilistic constraints, and finality.
///
/// The propositional constraints are not consulted: they bind the collective
/// outcome only.
pub fn check_rationality(
    set: &LikelihoodJudgmentSet,
    frame: &Frame,
) -> Result<RationalityReport, LikelihoodError> {
    let complete = set.issue_count() == frame.issue_count();
    if !complete {
        return Ok(RationalityReport {
            complete,
            consistent: false,
            is_final: false,
            offending: Vec::new(),
        });
    }
    let problem = source_problem(set, frame)?;
    if !problem.feasible()? {
        return Ok(RationalityReport {
            complete,
            consistent: false,
            is_final: false,
            offending: Vec::new(),
        });
    }
    let mut offending = Vec::new();
    for j in set.judgments() {
        if j.relation != JudgmentRelation::AtLeast {
            continue;
        }
        let implied = problem.minimize(&frame.literal_indicator(j.literal))?;
        if implied > j.bound + COMPARISON_TOLERANCE {
            offending.push(ImpliedBound {
                literal: j.literal,
                stated: j.bound,
                implied,
            });
        }
    }
    Ok(RationalityReport {
        complete,
        consistent: true,
        is_final: offending.is_empty(),
        offending,
    })
}

/// The 0/1 likelihood set of a complete crisp set.
pub fn lift(
    set: &CrispJudgmentSet,
    source: &str,
) -> Result<LikelihoodJudgmentSet, LikelihoodError> {
    if !set.is_complete() {
        return Err(LikelihoodError::Incomplete(set.signs()));
    }
    let entries = Literal::all(set.issue_count())
        .map(|l| Entry {
            relation: JudgmentRelation::Exactly,
            bound: if set.contains(l) { 1.0 } else { 0.0 },
        })
        .collect();
    Ok(LikelihoodJudgmentSet::from_entries(source, entries))
}

/// Lifts every set of a crisp profile; sources are named `1..=n`.
pub fn lift_profile(profile: &[CrispJudgmentSet]) -> Result<Profile, LikelihoodError> {
    let sources = profile
        .iter()
        .enumerate()
        .map(|(k, j)| lift(j, &format!("{}", k + 1)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Profile::new(sources)?)
}
