//! Aggregation frames, crisp judgment sets, profiles and prime implicants.
//!
//! A frame fixes the agenda, the propositional constraints that bind the
//! collective outcome and the probabilistic constraints that bind every
//! source. Every question about crisp judgments is answered against the list
//! of rational sets, which is computed once by projecting the models of the
//! constraints onto the agenda.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;

use crate::formula::{all_worlds, AtomTable, Formula, FormulaError};
use crate::likelihood::LikelihoodJudgmentSet;
use crate::lpfeas::{LinearConstraint, Relation};

/// Largest agenda size; crisp sets are stored as two bits per issue.
pub const MAX_ISSUES: usize = 64;
const MAX_CONSTRAINT_TERMS: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrameError {
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error("the agenda is empty")]
    EmptyAgenda,
    #[error("agenda has {0} issues; at most {MAX_ISSUES} are supported")]
    AgendaTooLarge(usize),
    #[error("agenda issue {index} (`{text}`) is a tautology")]
    Tautology { index: usize, text: String },
    #[error("agenda issue {index} (`{text}`) is a contradiction")]
    Contradiction { index: usize, text: String },
    #[error("the propositional constraints are unsatisfiable")]
    UnsatisfiableConstraints,
    #[error("probabilistic constraints use {0} distinct terms; at most {MAX_CONSTRAINT_TERMS} are supported")]
    TooManyTerms(usize),
    #[error("probabilistic constraint has a non-finite coefficient or bound")]
    NonFiniteConstraint,
    #[error("`{0}` is not an implicant of the agenda")]
    NotAnImplicant(String),
    #[error("profile sources disagree on the agenda size")]
    MismatchedProfile,
}

/// An element of the agenda closed under negation: an issue or its negation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub issue: usize,
    pub negated: bool,
}

impl Literal {
    pub fn positive(issue: usize) -> Self {
        Literal {
            issue,
            negated: false,
        }
    }

    pub fn negative(issue: usize) -> Self {
        Literal {
            issue,
            negated: true,
        }
    }

    /// Position in the `(phi_1, !phi_1, phi_2, !phi_2, ...)` ordering.
    pub fn index(self) -> usize {
        2 * self.issue + usize::from(self.negated)
    }

    pub fn from_index(index: usize) -> Self {
        Literal {
            issue: index / 2,
            negated: index % 2 == 1,
        }
    }

    pub fn complement(self) -> Self {
        Literal {
            issue: self.issue,
            negated: !self.negated,
        }
    }

    /// All literals over `issues` issues in index order.
    pub fn all(issues: usize) -> impl Iterator<Item = Literal> {
        (0..2 * issues).map(Literal::from_index)
    }
}

/// A subset of the agenda closed under negation.
///
/// Sets produced by crispifying or by quota rules may be incomplete, and the
/// crisp quota rule with a low quota may even hold an issue together with its
/// negation, so neither property is enforced here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CrispJudgmentSet {
    issues: usize,
    mask: u128,
}

/// What a crisp set says about one issue.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IssueJudgment {
    Accept,
    Reject,
    Abstain,
    Both,
}

impl IssueJudgment {
    fn rank(self) -> u8 {
        match self {
            IssueJudgment::Accept => 0,
            IssueJudgment::Reject => 1,
            IssueJudgment::Abstain => 2,
            IssueJudgment::Both => 3,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            IssueJudgment::Accept => '1',
            IssueJudgment::Reject => '0',
            IssueJudgment::Abstain => '-',
            IssueJudgment::Both => '*',
        }
    }
}

impl CrispJudgmentSet {
    pub fn empty(issues: usize) -> Self {
        assert!(issues <= MAX_ISSUES, "agenda too large");
        CrispJudgmentSet { issues, mask: 0 }
    }

    pub fn from_literals<I: IntoIterator<Item = Literal>>(issues: usize, literals: I) -> Self {
        let mut set = Self::empty(issues);
        for lit in literals {
            set.insert(lit);
        }
        set
    }

    /// Complete set from a sign vector: `true` accepts the issue.
    pub fn from_signs(signs: &[bool]) -> Self {
        Self::from_literals(
            signs.len(),
            signs.iter().enumerate().map(|(i, &s)| Literal {
                issue: i,
                negated: !s,
            }),
        )
    }

    pub fn issue_count(&self) -> usize {
        self.issues
    }

    pub fn mask(&self) -> u128 {
        self.mask
    }

    pub fn insert(&mut self, lit: Literal) {
        assert!(lit.issue < self.issues, "literal outside the agenda");
        self.mask |= 1u128 << lit.index();
    }

    pub fn remove(&mut self, lit: Literal) {
        self.mask &= !(1u128 << lit.index());
    }

    pub fn contains(&self, lit: Literal) -> bool {
        lit.issue < self.issues && self.mask & (1u128 << lit.index()) != 0
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn is_subset(&self, other: &CrispJudgmentSet) -> bool {
        self.mask & other.mask == self.mask
    }

    pub fn literals(&self) -> impl Iterator<Item = Literal> + '_ {
        Literal::all(self.issues).filter(move |l| self.contains(*l))
    }

    pub fn judgment(&self, issue: usize) -> IssueJudgment {
        match (
            self.contains(Literal::positive(issue)),
            self.contains(Literal::negative(issue)),
        ) {
            (true, false) => IssueJudgment::Accept,
            (false, true) => IssueJudgment::Reject,
            (false, false) => IssueJudgment::Abstain,
            (true, true) => IssueJudgment::Both,
        }
    }

    /// One judgment per issue, and never both an issue and its negation.
    pub fn is_complete(&self) -> bool {
        (0..self.issues).all(|i| {
            matches!(
                self.judgment(i),
                IssueJudgment::Accept | IssueJudgment::Reject
            )
        })
    }

    pub fn has_complementary_pair(&self) -> bool {
        (0..self.issues).any(|i| self.judgment(i) == IssueJudgment::Both)
    }

    /// Sign vector rendering such as `101`; `-` marks an abstention.
    pub fn signs(&self) -> String {
        (0..self.issues)
            .map(|i| self.judgment(i).symbol())
            .collect()
    }

    /// Number of issues on which `other` does not hold this set's judgment.
    pub fn hamming(&self, other: &CrispJudgmentSet) -> usize {
        self.literals().filter(|l| !other.contains(*l)).count()
    }
}

impl Ord for CrispJudgmentSet {
    /// Lexicographic over issues in agenda order, accepting before rejecting.
    fn cmp(&self, other: &Self) -> Ordering {
        self.issues.cmp(&other.issues).then_with(|| {
            (0..self.issues)
                .map(|i| self.judgment(i).rank().cmp(&other.judgment(i).rank()))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        })
    }
}

impl PartialOrd for CrispJudgmentSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A minimal-by-construction candidate set of literals that decides the agenda.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Implicant {
    set: CrispJudgmentSet,
}

impl Implicant {
    pub fn new(set: CrispJudgmentSet) -> Self {
        Implicant { set }
    }

    pub fn as_set(&self) -> &CrispJudgmentSet {
        &self.set
    }

    pub fn literals(&self) -> impl Iterator<Item = Literal> + '_ {
        self.set.literals()
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }
}

impl Ord for Implicant {
    /// By size, then by the sorted list of literal indices.
    fn cmp(&self, other: &Self) -> Ordering {
        let key = |i: &Implicant| i.literals().map(Literal::index).collect::<Vec<_>>();
        self.len()
            .cmp(&other.len())
            .then_with(|| key(self).cmp(&key(other)))
    }
}

impl PartialOrd for Implicant {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// `sum coef * l(term)  rel  bound` over propositional terms.
#[derive(Debug, Clone, PartialEq)]
pub struct IssueConstraint {
    pub terms: Vec<(f64, Formula)>,
    pub relation: Relation,
    pub bound: f64,
}

/// The tuple of agenda, source probabilistic constraints and collective
/// propositional constraints. The source count lives on [`Profile`].
#[derive(Debug, Clone)]
pub struct Frame {
    atoms: AtomTable,
    agenda: Vec<Formula>,
    gamma: Vec<Formula>,
    gamma_hat: Vec<IssueConstraint>,
    rational: Vec<CrispJudgmentSet>,
    // Worlds grouped by the truth values of every agenda issue and every
    // probabilistic-constraint term; one LP variable per group.
    cell_agenda: Vec<u64>,
    compiled_gamma_hat: Vec<LinearConstraint>,
}

impl Frame {
    pub fn new(
        atoms: AtomTable,
        agenda: Vec<Formula>,
        gamma: Vec<Formula>,
        gamma_hat: Vec<IssueConstraint>,
    ) -> Result<Self, FrameError> {
        if agenda.is_empty() {
            return Err(FrameError::EmptyAgenda);
        }
        if agenda.len() > MAX_ISSUES {
            return Err(FrameError::AgendaTooLarge(agenda.len()));
        }
        if gamma_hat
            .iter()
            .any(|c| !c.bound.is_finite() || c.terms.iter().any(|(k, _)| !k.is_finite()))
        {
            return Err(FrameError::NonFiniteConstraint);
        }
        let mut terms: Vec<&Formula> = Vec::new();
        for c in &gamma_hat {
            for (_, t) in &c.terms {
                if !terms.contains(&t) {
                    terms.push(t);
                }
            }
        }
        if terms.len() > MAX_CONSTRAINT_TERMS {
            return Err(FrameError::TooManyTerms(terms.len()));
        }

        let m = agenda.len();
        let mut ever_true = vec![false; m];
        let mut ever_false = vec![false; m];
        let mut projections = BTreeSet::new();
        let mut cells: BTreeMap<(u64, u64), ()> = BTreeMap::new();
        for w in all_worlds(&atoms)? {
            let mut sig = 0u64;
            for (i, f) in agenda.iter().enumerate() {
                if f.evaluate(&w) {
                    sig |= 1 << i;
                    ever_true[i] = true;
                } else {
                    ever_false[i] = true;
                }
            }
            let mut term_sig = 0u64;
            for (j, t) in terms.iter().enumerate() {
                if t.evaluate(&w) {
                    term_sig |= 1 << j;
                }
            }
            cells.insert((sig, term_sig), ());
            if gamma.iter().all(|g| g.evaluate(&w)) {
                projections.insert(sig);
            }
        }
        for i in 0..m {
            let text = agenda[i].to_text(&atoms);
            if !ever_false[i] {
                return Err(FrameError::Tautology { index: i, text });
            }
            if !ever_true[i] {
                return Err(FrameError::Contradiction { index: i, text });
            }
        }
        if projections.is_empty() {
            return Err(FrameError::UnsatisfiableConstraints);
        }

        let mut rational: Vec<CrispJudgmentSet> = projections
            .into_iter()
            .map(|sig| {
                let signs: Vec<bool> = (0..m).map(|i| sig >> i & 1 == 1).collect();
                CrispJudgmentSet::from_signs(&signs)
            })
            .collect();
        rational.sort();

        let cell_keys: Vec<(u64, u64)> = cells.into_keys().collect();
        let compiled_gamma_hat = gamma_hat
            .iter()
            .map(|c| {
                let coefs = cell_keys.iter().enumerate().filter_map(|(cell, &(_, ts))| {
                    let coef: f64 = c
                        .terms
                        .iter()
                        .map(|(k, t)| {
                            let j = terms.iter().position(|x| *x == t).unwrap();
                            if ts >> j & 1 == 1 {
                                *k
                            } else {
                                0.0
                            }
                        })
                        .sum();
                    (coef != 0.0).then_some((cell, coef))
                });
                LinearConstraint::new(coefs, c.relation, c.bound)
            })
            .collect();

        Ok(Frame {
            atoms,
            agenda,
            gamma,
            gamma_hat,
            rational,
            cell_agenda: cell_keys.into_iter().map(|(s, _)| s).collect(),
            compiled_gamma_hat,
        })
    }

    /// Builds a frame from formula text, with no probabilistic constraints.
    pub fn from_text(atoms: &[&str], agenda: &[&str], gamma: &[&str]) -> Result<Self, FrameError> {
        let table = AtomTable::new(atoms.iter().copied())?;
        let agenda = agenda
            .iter()
            .map(|t| table.parse(t))
            .collect::<Result<_, _>>()?;
        let gamma = gamma
            .iter()
            .map(|t| table.parse(t))
            .collect::<Result<_, _>>()?;
        Frame::new(table, agenda, gamma, Vec::new())
    }

    pub fn atoms(&self) -> &AtomTable {
        &self.atoms
    }

    pub fn agenda(&self) -> &[Formula] {
        &self.agenda
    }

    pub fn gamma(&self) -> &[Formula] {
        &self.gamma
    }

    pub fn gamma_hat(&self) -> &[IssueConstraint] {
        &self.gamma_hat
    }

    pub fn issue_count(&self) -> usize {
        self.agenda.len()
    }

    pub fn literals(&self) -> impl Iterator<Item = Literal> {
        Literal::all(self.agenda.len())
    }

    /// Agenda position of a formula, compared structurally.
    pub fn issue_of(&self, formula: &Formula) -> Option<usize> {
        self.agenda.iter().position(|f| f == formula)
    }

    pub fn literal_formula(&self, lit: Literal) -> Formula {
        let f = self.agenda[lit.issue].clone();
        if lit.negated {
            Formula::not(f)
        } else {
            f
        }
    }

    pub fn literal_text(&self, lit: Literal) -> String {
        self.literal_formula(lit).to_text(&self.atoms)
    }

    pub fn set_text(&self, set: &CrispJudgmentSet) -> String {
        let parts: Vec<String> = set.literals().map(|l| self.literal_text(l)).collect();
        format!("{{{}}}", parts.join(", "))
    }

    /// Every complete set of judgments consistent with the propositional
    /// constraints, in lexicographic sign order.
    pub fn rational_sets(&self) -> &[CrispJudgmentSet] {
        &self.rational
    }

    /// Whether the set together with the propositional constraints is satisfiable.
    pub fn is_consistent(&self, set: &CrispJudgmentSet) -> bool {
        self.rational.iter().any(|j| set.is_subset(j))
    }

    pub fn is_rational(&self, set: &CrispJudgmentSet) -> bool {
        set.is_complete() && self.is_consistent(set)
    }

    /// Whether the set together with the propositional constraints entails `lit`.
    pub fn entails(&self, set: &CrispJudgmentSet, lit: Literal) -> bool {
        self.rational
            .iter()
            .filter(|j| set.is_subset(j))
            .all(|j| j.contains(lit))
    }

    fn unique_extension(&self, set: &CrispJudgmentSet) -> Option<CrispJudgmentSet> {
        let mut found = None;
        for j in self.rational.iter().filter(|j| set.is_subset(j)) {
            if found.is_some() {
                return None;
            }
            found = Some(*j);
        }
        found
    }

    /// A consistent set that decides every other literal; equivalently, one
    /// contained in exactly one rational set.
    pub fn is_implicant(&self, set: &CrispJudgmentSet) -> bool {
        self.unique_extension(set).is_some()
    }

    /// All prime implicants, by increasing size and then lexicographically.
    pub fn prime_implicants(&self) -> Vec<Implicant> {
        let m = self.issue_count();
        let mut implicants: HashSet<u128> = HashSet::new();
        let mut primes = Vec::new();
        for size in 0..=m {
            for issues in combinations(m, size) {
                for signs in 0..(1u64 << size) {
                    let set = CrispJudgmentSet::from_literals(
                        m,
                        issues.iter().enumerate().map(|(k, &i)| Literal {
                            issue: i,
                            negated: signs >> k & 1 == 1,
                        }),
                    );
                    if !self.is_implicant(&set) {
                        continue;
                    }
                    implicants.insert(set.mask);
                    let has_smaller = set.literals().any(|l| {
                        let mut smaller = set;
                        smaller.remove(l);
                        implicants.contains(&smaller.mask)
                    });
                    if !has_smaller {
                        primes.push(Implicant::new(set));
                    }
                }
            }
        }
        primes.sort();
        primes
    }

    /// The implicant together with every literal it entails.
    pub fn closure(&self, implicant: &Implicant) -> Result<CrispJudgmentSet, FrameError> {
        self.unique_extension(implicant.as_set())
            .ok_or_else(|| FrameError::NotAnImplicant(self.set_text(implicant.as_set())))
    }

    pub(crate) fn cell_count(&self) -> usize {
        self.cell_agenda.len()
    }

    pub(crate) fn cell_satisfies(&self, cell: usize, lit: Literal) -> bool {
        (self.cell_agenda[cell] >> lit.issue & 1 == 1) != lit.negated
    }

    pub(crate) fn literal_cells(&self, lit: Literal) -> impl Iterator<Item = usize> + '_ {
        (0..self.cell_count()).filter(move |&c| self.cell_satisfies(c, lit))
    }

    pub(crate) fn literal_indicator(&self, lit: Literal) -> Vec<f64> {
        (0..self.cell_count())
            .map(|c| {
                if self.cell_satisfies(c, lit) {
                    1.0
                } else {
                    0.0
                }
            })
            .collect()
    }

    pub(crate) fn compiled_gamma_hat(&self) -> &[LinearConstraint] {
        &self.compiled_gamma_hat
    }
}

/// All `k`-element subsets of `0..n` in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// An ordered list of likelihood judgment sets, one per source.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    sources: Vec<LikelihoodJudgmentSet>,
}

impl Profile {
    pub fn new(sources: Vec<LikelihoodJudgmentSet>) -> Result<Self, FrameError> {
        if let Some(first) = sources.first() {
            if sources
                .iter()
                .any(|s| s.issue_count() != first.issue_count())
            {
                return Err(FrameError::MismatchedProfile);
            }
        }
        Ok(Profile { sources })
    }

    pub fn sources(&self) -> &[LikelihoodJudgmentSet] {
        &self.sources
    }

    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LikelihoodJudgmentSet> {
        self.sources.iter()
    }

    /// The bounds every source states for `lit`.
    pub fn column(&self, lit: Literal) -> Vec<f64> {
        self.sources.iter().map(|s| s.bound(lit)).collect()
    }
}

impl fmt::Display for CrispJudgmentSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.signs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn co2() -> Frame {
        Frame::from_text(&["p", "q"], &["p", "p -> q", "q"], &["true"]).unwrap()
    }

    fn hotel() -> Frame {
        Frame::from_text(
            &["s", "t", "x", "e", "h", "a"],
            &["s | t", "x", "e", "h", "a"],
            &["(!e | x) <-> a", "((s | t) & a) <-> h"],
        )
        .unwrap()
    }

    #[test]
    fn co2_rational_sets_match_the_table_order() {
        let signs: Vec<String> = co2().rational_sets().iter().map(|s| s.signs()).collect();
        assert_eq!(signs, ["111", "100", "011", "010"]);
    }

    #[test]
    fn hotel_has_eight_rational_sets() {
        let frame = hotel();
        assert_eq!(frame.rational_sets().len(), 8);
        // The row (s|t, x, e, h, a) = (1, 0, 1, 1, 0) is not among them.
        let bad = CrispJudgmentSet::from_signs(&[true, false, true, true, false]);
        assert!(!frame.is_consistent(&bad));
    }

    #[test]
    fn forced_issue_has_a_single_rational_set() {
        let frame = Frame::from_text(&["p", "q"], &["p"], &["p"]).unwrap();
        assert_eq!(frame.rational_sets().len(), 1);
        assert_eq!(frame.rational_sets()[0].signs(), "1");
    }

    #[test]
    fn frame_validation_errors() {
        assert!(matches!(
            Frame::from_text(&["p"], &[], &[]),
            Err(FrameError::EmptyAgenda)
        ));
        assert!(matches!(
            Frame::from_text(&["p"], &["p | !p"], &[]),
            Err(FrameError::Tautology { .. })
        ));
        assert!(matches!(
            Frame::from_text(&["p"], &["p & !p"], &[]),
            Err(FrameError::Contradiction { .. })
        ));
        assert!(matches!(
            Frame::from_text(&["p"], &["p"], &["false"]),
            Err(FrameError::UnsatisfiableConstraints)
        ));
    }

    #[test]
    fn single_issue_prime_implicants() {
        let frame = Frame::from_text(&["p"], &["p"], &["true"]).unwrap();
        let primes: Vec<String> = frame
            .prime_implicants()
            .iter()
            .map(|i| frame.set_text(i.as_set()))
            .collect();
        assert_eq!(primes, ["{p}", "{!p}"]);
    }

    #[test]
    fn hotel_closures() {
        let frame = hotel();
        // s|t = 0, x = 1, e = 2, h = 3, a = 4
        let i = Implicant::new(CrispJudgmentSet::from_literals(
            5,
            [
                Literal::positive(0),
                Literal::positive(1),
                Literal::negative(2),
            ],
        ));
        let closed = frame.closure(&i).unwrap();
        assert_eq!(frame.set_text(&closed), "{s | t, x, !e, h, a}");

        let j = Implicant::new(CrispJudgmentSet::from_literals(
            5,
            [Literal::negative(4), Literal::positive(0)],
        ));
        assert_eq!(
            frame.set_text(&frame.closure(&j).unwrap()),
            "{s | t, !x, e, !h, !a}"
        );

        let full = frame.rational_sets()[3];
        assert_eq!(frame.closure(&Implicant::new(full)).unwrap(), full);

        let not_one = Implicant::new(CrispJudgmentSet::from_literals(5, [Literal::positive(1)]));
        assert!(matches!(
            frame.closure(&not_one),
            Err(FrameError::NotAnImplicant(_))
        ));
    }

    #[test]
    fn ordering_puts_accept_first() {
        let a = CrispJudgmentSet::from_signs(&[true, false]);
        let b = CrispJudgmentSet::from_signs(&[false, true]);
        assert!(a < b);
        let partial = CrispJudgmentSet::from_literals(2, [Literal::positive(0)]);
        assert!(a < partial);
    }

    #[test]
    fn hamming_counts_disagreements() {
        let j1 = CrispJudgmentSet::from_signs(&[true, true, true]);
        let j2 = CrispJudgmentSet::from_signs(&[false, true, false]);
        assert_eq!(j1.hamming(&j2), 2);
        assert_eq!(j1.hamming(&j1), 0);
    }
}
