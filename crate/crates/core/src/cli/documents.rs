//! JSON documents read and written by the command-line tool.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::aggregate::{CrispVector, LikelihoodVector};
use crate::formula::{AtomTable, Formula, FormulaError};
use crate::frame::{CrispJudgmentSet, Frame, IssueConstraint, Literal, Profile};
use crate::likelihood::{normalize, JudgmentRelation, LikelihoodJudgment, LikelihoodJudgmentSet};
use crate::lpfeas::Relation;

use super::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameDocument {
    pub atoms: Vec<String>,
    pub agenda: Vec<String>,
    #[serde(default)]
    pub gamma: Vec<String>,
    #[serde(default)]
    pub gamma_hat: Vec<ConstraintDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintDocument {
    pub terms: Vec<TermDocument>,
    pub rel: Relation,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDocument {
    pub coef: f64,
    pub issue: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileDocument {
    pub sources: Vec<SourceDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceDocument {
    pub name: String,
    #[serde(default)]
    pub judgments: Vec<JudgmentDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JudgmentDocument {
    pub issue: String,
    #[serde(default)]
    pub neg: bool,
    pub rel: JudgmentRelation,
    pub a: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrispVectorDocument {
    pub default: f64,
    #[serde(default)]
    pub overrides: Vec<OverrideDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverrideDocument {
    pub issue: String,
    #[serde(default)]
    pub neg: bool,
    pub c: f64,
}

/// Crisp profile: each source lists the literals it accepts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrispProfileDocument {
    pub sources: Vec<CrispSourceDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrispSourceDocument {
    pub name: String,
    pub judgments: Vec<LiteralDocument>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiteralDocument {
    pub issue: String,
    #[serde(default)]
    pub neg: bool,
}

/// Average likelihoods given directly, one entry per literal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AverageDocument {
    pub values: Vec<AverageEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AverageEntry {
    pub issue: String,
    #[serde(default)]
    pub neg: bool,
    pub a: f64,
}

/// A file's text kept for locating tokens in error messages.
pub struct Source {
    pub path: PathBuf,
    pub text: String,
}

impl Source {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Ok(Source {
            path: path.to_path_buf(),
            text,
        })
    }

    pub fn parse<T: for<'de> Deserialize<'de>>(&self) -> Result<T, CliError> {
        serde_json::from_str(&self.text).map_err(|e| {
            let token = token_at(&self.text, e.line(), e.column());
            CliError::Parse {
                path: self.path.clone(),
                line: e.line(),
                column: e.column(),
                token,
                message: strip_position(&e.to_string()),
            }
        })
    }

    /// An error located at the first quoted occurrence of `token`.
    pub fn error_at(&self, token: &str, message: impl Into<String>) -> CliError {
        let quoted = serde_json::to_string(token).unwrap_or_else(|_| format!("\"{token}\""));
        let (line, column) = match self.text.find(&quoted) {
            Some(offset) => {
                let before = &self.text[..offset];
                let line = before.matches('\n').count() + 1;
                let column = offset - before.rfind('\n').map_or(0, |i| i + 1) + 1;
                (line, column)
            }
            None => (0, 0),
        };
        CliError::Parse {
            path: self.path.clone(),
            line,
            column,
            token: token.to_string(),
            message: message.into(),
        }
    }

    pub fn error(&self, message: impl Into<String>) -> CliError {
        CliError::Parse {
            path: self.path.clone(),
            line: 0,
            column: 0,
            token: String::new(),
            message: message.into(),
        }
    }
}

fn strip_position(message: &str) -> String {
    match message.rfind(" at line ") {
        Some(i) => message[..i].to_string(),
        None => message.to_string(),
    }
}

fn token_at(text: &str, line: usize, column: usize) -> String {
    let Some(row) = text.lines().nth(line.saturating_sub(1)) else {
        return String::new();
    };
    let chars: Vec<char> = row.chars().collect();
    if chars.is_empty() {
        return String::new();
    }
    let at = column.saturating_sub(1).min(chars.len() - 1);
    let is_part = |c: char| !c.is_whitespace() && !matches!(c, ',' | ':' | '{' | '}' | '[' | ']');
    let mut start = at;
    while start > 0 && is_part(chars[start - 1]) {
        start -= 1;
    }
    let mut end = at;
    while end < chars.len() && is_part(chars[end]) {
        end += 1;
    }
    if start == end {
        chars[at].to_string()
    } else {
        chars[start..end].iter().collect()
    }
}

fn formula_message(text: &str, err: &FormulaError) -> String {
    match err {
        FormulaError::Syntax { position, .. } | FormulaError::UndeclaredAtom { position, .. } => {
            let rest: String = text.chars().skip(*position).take(12).collect();
            format!("invalid formula `{text}`: {err} (near `{rest}`)")
        }
        _ => format!("invalid formula `{text}`: {err}"),
    }
}

fn parse_formula(src: &Source, atoms: &AtomTable, text: &str) -> Result<Formula, CliError> {
    atoms
        .parse(text)
        .map_err(|e| src.error_at(text, formula_message(text, &e)))
}

pub fn load_frame(path: &Path) -> Result<Frame, CliError> {
    let src = Source::read(path)?;
    let doc: FrameDocument = src.parse()?;
    frame_from_document(&src, &doc)
}

pub fn frame_from_document(src: &Source, doc: &FrameDocument) -> Result<Frame, CliError> {
    let atoms = AtomTable::new(doc.atoms.iter()).map_err(|e| match &e {
        FormulaError::InvalidAtomName(name) | FormulaError::DuplicateAtom(name) => {
            src.error_at(name, e.to_string())
        }
        _ => src.error(e.to_string()),
    })?;
    let agenda = doc
        .agenda
        .iter()
        .map(|t| parse_formula(src, &atoms, t))
        .collect::<Result<Vec<_>, _>>()?;
    let gamma = doc
        .gamma
        .iter()
        .map(|t| parse_formula(src, &atoms, t))
        .collect::<Result<Vec<_>, _>>()?;
    let gamma_hat = doc
        .gamma_hat
        .iter()
        .map(|c| {
            Ok(IssueConstraint {
                terms: c
                    .terms
                    .iter()
                    .map(|t| Ok((t.coef, parse_formula(src, &atoms, &t.issue)?)))
                    .collect::<Result<Vec<_>, CliError>>()?,
                relation: c.rel,
                bound: c.bound,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Frame::new(atoms, agenda, gamma, gamma_hat).map_err(|e| match &e {
        crate::frame::FrameError::Tautology { index, .. }
        | crate::frame::FrameError::Contradiction { index, .. } => {
            src.error_at(&doc.agenda[*index], e.to_string())
        }
        _ => src.error(e.to_string()),
    })
}

/// Resolves an issue reference; a negated agenda formula also resolves.
pub fn resolve_literal(
    src: &Source,
    frame: &Frame,
    issue: &str,
    neg: bool,
) -> Result<Literal, CliError> {
    let formula = parse_formula(src, frame.atoms(), issue)?;
    if let Some(i) = frame.issue_of(&formula) {
        return Ok(Literal {
            issue: i,
            negated: neg,
        });
    }
    if let Formula::Not(inner) = &formula {
        if let Some(i) = frame.issue_of(inner) {
            return Ok(Literal {
                issue: i,
                negated: !neg,
            });
        }
    }
    Err(src.error_at(issue, format!("`{issue}` is not an agenda issue")))
}

pub fn load_profile(path: &Path, frame: &Frame) -> Result<Profile, CliError> {
    let src = Source::read(path)?;
    let doc: ProfileDocument = src.parse()?;
    profile_from_document(&src, &doc, frame)
}

pub fn profile_from_document(
    src: &Source,
    doc: &ProfileDocument,
    frame: &Frame,
) -> Result<Profile, CliError> {
    let mut sources = Vec::with_capacity(doc.sources.len());
    for s in &doc.sources {
        let mut raw = Vec::with_capacity(s.judgments.len());
        for j in &s.judgments {
            let literal = resolve_literal(src, frame, &j.issue, j.neg)?;
            raw.push(LikelihoodJudgment {
                literal,
                relation: j.rel,
                bound: j.a,
            });
        }
        let set = normalize(&raw, frame, &s.name)
            .map_err(|e| src.error_at(&s.name, format!("source `{}`: {e}", s.name)))?;
        sources.push(set);
    }
    Profile::new(sources).map_err(|e| src.error(e.to_string()))
}

pub fn load_crisp_profile(
    path: &Path,
    frame: &Frame,
) -> Result<(Vec<String>, Vec<CrispJudgmentSet>), CliError> {
    let src = Source::read(path)?;
    let doc: CrispProfileDocument = src.parse()?;
    let mut names = Vec::new();
    let mut sets = Vec::new();
    for s in &doc.sources {
        let mut set = CrispJudgmentSet::empty(frame.issue_count());
        for j in &s.judgments {
            let lit = resolve_literal(&src, frame, &j.issue, j.neg)?;
            if set.contains(lit.complement()) {
                return Err(src.error_at(
                    &j.issue,
                    format!("source `{}` accepts an issue and its negation", s.name),
                ));
            }
            set.insert(lit);
        }
        if !set.is_complete() {
            return Err(src.error_at(
                &s.name,
                format!("source `{}` does not judge every issue", s.name),
            ));
        }
        names.push(s.name.clone());
        sets.push(set);
    }
    Ok((names, sets))
}

pub fn load_crisp_vector(path: &Path, frame: &Frame) -> Result<CrispVector, CliError> {
    let src = Source::read(path)?;
    let doc: CrispVectorDocument = src.parse()?;
    let mut values = vec![doc.default; 2 * frame.issue_count()];
    for o in &doc.overrides {
        let lit = resolve_literal(&src, frame, &o.issue, o.neg)?;
        values[lit.index()] = o.c;
    }
    CrispVector::new(values).map_err(|e| src.error(e.to_string()))
}

pub fn load_average(path: &Path, frame: &Frame) -> Result<LikelihoodVector, CliError> {
    let src = Source::read(path)?;
    let doc: AverageDocument = src.parse()?;
    let mut values: Vec<Option<f64>> = vec![None; 2 * frame.issue_count()];
    for e in &doc.values {
        let lit = resolve_literal(&src, frame, &e.issue, e.neg)?;
        if values[lit.index()].replace(e.a).is_some() {
            return Err(src.error_at(&e.issue, "literal is listed twice"));
        }
    }
    let values = values
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            v.ok_or_else(|| {
                src.error(format!(
                    "no average for {}",
                    frame.literal_text(Literal::from_index(i))
                ))
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    LikelihoodVector::new(values).map_err(|e| src.error(e.to_string()))
}

pub fn literal_document(frame: &Frame, lit: Literal) -> LiteralDocument {
    LiteralDocument {
        issue: frame.agenda()[lit.issue].to_text(frame.atoms()),
        neg: lit.negated,
    }
}

/// Every entry written out, abstentions included.
pub fn source_document(frame: &Frame, set: &LikelihoodJudgmentSet, round: bool) -> SourceDocument {
    SourceDocument {
        name: set.source().to_string(),
        judgments: set
            .judgments()
            .into_iter()
            .map(|j| {
                let l = literal_document(frame, j.literal);
                JudgmentDocument {
                    issue: l.issue,
                    neg: l.neg,
                    rel: j.relation,
                    a: if round { round_sig(j.bound) } else { j.bound },
                }
            })
            .collect(),
    }
}

pub fn profile_document(frame: &Frame, profile: &Profile, round: bool) -> ProfileDocument {
    ProfileDocument {
        sources: profile
            .iter()
            .map(|s| source_document(frame, s, round))
            .collect(),
    }
}

pub fn frame_document(frame: &Frame) -> FrameDocument {
    let atoms = frame.atoms();
    FrameDocument {
        atoms: atoms.names().to_vec(),
        agenda: frame.agenda().iter().map(|f| f.to_text(atoms)).collect(),
        gamma: frame.gamma().iter().map(|f| f.to_text(atoms)).collect(),
        gamma_hat: frame
            .gamma_hat()
            .iter()
            .map(|c| ConstraintDocument {
                terms: c
                    .terms
                    .iter()
                    .map(|(k, f)| TermDocument {
                        coef: *k,
                        issue: f.to_text(atoms),
                    })
                    .collect(),
                rel: c.relation,
                bound: c.bound,
            })
            .collect(),
    }
}

/// Rounds to ten significant digits.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if !x.is_finite() {
        return x;
    }
    let text = format!("{x:.9e}");
    let r: f64 = text.parse().unwrap_or(x);
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_ten_digits() {
        assert_eq!(round_sig(4.181818181818), 4.181818182);
        assert_eq!(round_sig(0.1 + 0.2), 0.3);
        assert!(round_sig(-0.0).is_sign_positive());
        assert_eq!(round_sig(1.0), 1.0);
    }

    #[test]
    fn token_extraction() {
        let text = "{\n  \"rel\": \">>\"\n}";
        assert_eq!(token_at(text, 2, 12), "\">>\"");
    }
}
