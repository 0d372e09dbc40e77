use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::aggregate::{
    median_score, profile_distance, AggregationOutcome, CrispVector, Metric, Mode, Rule,
    RuleOptions,
};
use crate::frame::{CrispJudgmentSet, Frame, Profile};
use crate::likelihood::RationalityReport;
use crate::properties::{
    Counterexample, GeneratorConfig, JudgmentStyle, Property, PropertyReport, Witness,
};

use super::documents::{
    literal_document, profile_document, profile_from_document, resolve_literal, round_sig,
    source_document, LiteralDocument, ProfileDocument, Source, SourceDocument,
};
use super::{parse_property, CliError, Enumerate, Format};

fn json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("documents serialize");
    text.push('\n');
    text
}

fn table(rows: &[Vec<String>]) -> String {
    let columns = rows.iter().map(|r| r.len()).max().unwrap_or(0);
    let widths: Vec<usize> = (0..columns)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for row in rows {
        let mut line = String::new();
        for (c, cell) in row.iter().enumerate() {
            if c > 0 {
                line.push_str("  ");
            }
            line.push_str(cell);
            let pad = widths[c] - cell.chars().count();
            line.extend(std::iter::repeat_n(' ', pad));
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

fn yes(b: bool) -> String {
    if b { "yes" } else { "no" }.to_string()
}

fn fixed(x: f64) -> String {
    format!("{x:.4}")
}

fn issue_headers(frame: &Frame) -> Vec<String> {
    frame
        .agenda()
        .iter()
        .map(|f| f.to_text(frame.atoms()))
        .collect()
}

fn sign_cells(set: &CrispJudgmentSet) -> Vec<String> {
    set.signs().chars().map(|c| c.to_string()).collect()
}

fn set_literals(frame: &Frame, set: &CrispJudgmentSet) -> Vec<LiteralDocument> {
    set.literals().map(|l| literal_document(frame, l)).collect()
}

#[derive(Serialize)]
struct ValidationOut {
    profile_rational: bool,
    sources: Vec<SourceCheckOut>,
}

#[derive(Serialize)]
struct SourceCheckOut {
    name: String,
    complete: bool,
    consistent: bool,
    #[serde(rename = "final")]
    is_final: bool,
    rational: bool,
    offending: Vec<OffendingOut>,
}

#[derive(Serialize)]
struct OffendingOut {
    issue: String,
    neg: bool,
    stated: f64,
    implied: f64,
}

pub fn validation(
    frame: &Frame,
    profile: &Profile,
    reports: &[RationalityReport],
    format: Format,
) -> String {
    let rational = reports.iter().all(|r| r.rational());
    match format {
        Format::Json => json(&ValidationOut {
            profile_rational: rational,
            sources: profile
                .iter()
                .zip(reports)
                .map(|(s, r)| SourceCheckOut {
                    name: s.source().to_string(),
                    complete: r.complete,
                    consistent: r.consistent,
                    is_final: r.is_final,
                    rational: r.rational(),
                    offending: r
                        .offending
                        .iter()
                        .map(|b| {
                            let l = literal_document(frame, b.literal);
                            OffendingOut {
                                issue: l.issue,
                                neg: l.neg,
                                stated: round_sig(b.stated),
                                implied: round_sig(b.implied),
                            }
                        })
                        .collect(),
                })
                .collect(),
        }),
        Format::Table => {
            let mut rows = vec![vec![
                "source".to_string(),
                "complete".into(),
                "consistent".into(),
                "final".into(),
                "rational".into(),
            ]];
            let mut notes = String::new();
            for (s, r) in profile.iter().zip(reports) {
                rows.push(vec![
                    s.source().to_string(),
                    yes(r.complete),
                    yes(r.consistent),
                    yes(r.is_final),
                    yes(r.rational()),
                ]);
                if !r.consistent {
                    notes.push_str(&format!(
                        "{}: the judgments are unsatisfiable together with the probabilistic constraints\n",
                        s.source()
                    ));
                }
                for b in &r.offending {
                    notes.push_str(&format!(
                        "{}: l({}) >= {} is implied but {} is stated\n",
                        s.source(),
                        frame.literal_text(b.literal),
                        fixed(b.implied),
                        fixed(b.stated)
                    ));
                }
            }
            let mut out = table(&rows);
            if !notes.is_empty() {
                out.push('\n');
                out.push_str(&notes);
            }
            out.push_str(&format!("\nprofile rational: {}\n", yes(rational)));
            out
        }
    }
}

#[derive(Serialize)]
struct EnumerationOut {
    what: &'static str,
    issues: Vec<String>,
    count: usize,
    items: Vec<EnumeratedOut>,
}

#[derive(Serialize)]
struct EnumeratedOut {
    signs: String,
    set: Vec<LiteralDocument>,
    text: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    closure: Option<String>,
}

pub fn enumeration(
    frame: &Frame,
    what: Enumerate,
    format: Format,
) -> Result<String, crate::frame::FrameError> {
    let items: Vec<EnumeratedOut> = match what {
        Enumerate::Rational => frame
            .rational_sets()
            .iter()
            .map(|j| EnumeratedOut {
                signs: j.signs(),
                set: set_literals(frame, j),
                text: frame.set_text(j),
                closure: None,
            })
            .collect(),
        Enumerate::Implicants => frame
            .prime_implicants()
            .iter()
            .map(|i| {
                Ok(EnumeratedOut {
                    signs: i.as_set().signs(),
                    set: set_literals(frame, i.as_set()),
                    text: frame.set_text(i.as_set()),
                    closure: Some(frame.closure(i)?.signs()),
                })
            })
            .collect::<Result<_, crate::frame::FrameError>>()?,
    };
    Ok(match format {
        Format::Json => json(&EnumerationOut {
            what: match what {
                Enumerate::Rational => "rational",
                Enumerate::Implicants => "implicants",
            },
            issues: issue_headers(frame),
            count: items.len(),
            items,
        }),
        Format::Table => {
            let mut header = vec!["#".to_string()];
            header.extend(issue_headers(frame));
            header.push("set".into());
            if what == Enumerate::Implicants {
                header.push("closure".into());
            }
            let mut rows = vec![header];
            for (k, item) in items.iter().enumerate() {
                let mut row = vec![(k + 1).to_string()];
                row.extend(item.signs.chars().map(|c| c.to_string()));
                row.push(item.text.clone());
                if let Some(c) = &item.closure {
                    row.push(c.clone());
                }
                rows.push(row);
            }
            let mut out = table(&rows);
            out.push_str(&format!(
                "\n{} {}\n",
                items.len(),
                match what {
                    Enumerate::Rational => "rational judgment sets",
                    Enumerate::Implicants => "prime implicants",
                }
            ));
            out
        }
    })
}

#[derive(Serialize)]
struct AggregationOut {
    rule: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    profile_rational: Option<bool>,
    winners: Vec<WinnerOut>,
    candidates: Vec<CandidateOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    collective: Option<SourceDocument>,
    order: Vec<LiteralDocument>,
    implicants: Vec<ImplicantOut>,
}

#[derive(Serialize)]
struct WinnerOut {
    signs: String,
    set: Vec<LiteralDocument>,
    text: String,
    complete: bool,
    consistent: bool,
    rational: bool,
}

#[derive(Serialize)]
struct CandidateOut {
    signs: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    score: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    distance: Option<f64>,
    value: f64,
}

#[derive(Serialize)]
struct ImplicantOut {
    implicant: String,
    signs: String,
    score: f64,
    closure: String,
}

struct CandidateRow {
    set: CrispJudgmentSet,
    score: Option<f64>,
    distance: Option<f64>,
    value: f64,
}

fn candidate_rows(
    profile: Option<&Profile>,
    rule: &Rule,
    outcome: &AggregationOutcome,
) -> Vec<CandidateRow> {
    outcome
        .candidates
        .iter()
        .map(|c| {
            let score = profile.map(|p| median_score(&c.set, p));
            let distance = match (profile, rule) {
                (Some(p), Rule::Distance { metric, mode }) => {
                    Some(profile_distance(&c.set, p, *metric, *mode))
                }
                (Some(p), _) => Some(profile_distance(&c.set, p, Metric::Euclidean, Mode::Sum)),
                (None, _) => None,
            };
            CandidateRow {
                set: c.set,
                score,
                distance,
                value: c.value,
            }
        })
        .collect()
}

pub fn aggregation(
    frame: &Frame,
    profile: Option<&Profile>,
    rule: &Rule,
    outcome: &AggregationOutcome,
    profile_rational: Option<bool>,
    format: Format,
) -> String {
    let status = outcome.status(frame);
    let rows = candidate_rows(profile, rule, outcome);
    match format {
        Format::Json => json(&AggregationOut {
            rule: outcome.rule.clone(),
            profile_rational,
            winners: outcome
                .winners
                .iter()
                .zip(&status)
                .map(|(w, s)| WinnerOut {
                    signs: w.signs(),
                    set: set_literals(frame, w),
                    text: frame.set_text(w),
                    complete: s.complete,
                    consistent: s.consistent,
                    rational: s.rational(),
                })
                .collect(),
            candidates: rows
                .iter()
                .map(|r| CandidateOut {
                    signs: r.set.signs(),
                    score: r.score.map(round_sig),
                    distance: r.distance.map(round_sig),
                    value: round_sig(r.value),
                })
                .collect(),
            collective: outcome
                .collective
                .as_ref()
                .map(|c| source_document(frame, c, true)),
            order: outcome
                .order
                .iter()
                .map(|l| literal_document(frame, *l))
                .collect(),
            implicants: outcome
                .implicants
                .iter()
                .map(|i| ImplicantOut {
                    implicant: frame.set_text(i.implicant.as_set()),
                    signs: i.implicant.as_set().signs(),
                    score: round_sig(i.score),
                    closure: i.closure.signs(),
                })
                .collect(),
        }),
        Format::Table => {
            let mut out = format!("rule: {}\n", outcome.rule);
            if let Some(r) = profile_rational {
                out.push_str(&format!("profile rational: {}\n", yes(r)));
            }
            if let Some(c) = &outcome.collective {
                out.push_str("\npooled likelihoods\n");
                let mut t = vec![vec!["literal".to_string(), "bound".into()]];
                for l in frame.literals() {
                    t.push(vec![
                        format!("l({})", frame.literal_text(l)),
                        fixed(c.bound(l)),
                    ]);
                }
                out.push_str(&table(&t));
            }
            if !rows.is_empty() {
                out.push_str("\ncandidates\n");
                let own = !matches!(rule, Rule::Median)
                    && !matches!(
                        rule,
                        Rule::Distance {
                            metric: Metric::Euclidean,
                            mode: Mode::Sum
                        }
                    );
                let mut header = issue_headers(frame);
                if profile.is_some() {
                    header.push("score".into());
                    header.push("distance".into());
                }
                if own {
                    header.push(outcome.rule.clone());
                }
                let mut t = vec![header];
                for r in &rows {
                    let mut row = sign_cells(&r.set);
                    if let (Some(s), Some(d)) = (r.score, r.distance) {
                        row.push(fixed(s));
                        row.push(fixed(d));
                    }
                    if own {
                        row.push(fixed(r.value));
                    }
                    t.push(row);
                }
                out.push_str(&table(&t));
            }
            if !outcome.implicants.is_empty() {
                out.push_str("\nprime implicants\n");
                let mut t = vec![vec![
                    "implicant".to_string(),
                    "score".into(),
                    "closure".into(),
                ]];
                for i in &outcome.implicants {
                    t.push(vec![
                        frame.set_text(i.implicant.as_set()),
                        fixed(i.score),
                        i.closure.signs(),
                    ]);
                }
                out.push_str(&table(&t));
            }
            if !outcome.order.is_empty() {
                let order: Vec<String> = outcome
                    .order
                    .iter()
                    .map(|l| frame.literal_text(*l))
                    .collect();
                out.push_str(&format!("\naddition order: {}\n", order.join(", ")));
            }
            out.push_str("\nwinners\n");
            let mut t = Vec::new();
            for (w, s) in outcome.winners.iter().zip(&status) {
                let flags = match (s.complete, s.consistent) {
                    (true, true) => "rational".to_string(),
                    (c, k) => {
                        let mut f = Vec::new();
                        if !c {
                            f.push("incomplete");
                        }
                        if !k {
                            f.push("inconsistent with the constraints");
                        }
                        f.join(", ")
                    }
                };
                t.push(vec![w.signs(), frame.set_text(w), flags]);
            }
            out.push_str(&table(&t));
            out
        }
    }
}

pub fn lifted(frame: &Frame, profile: &Profile, format: Format) -> String {
    match format {
        Format::Json => json(&profile_document(frame, profile, true)),
        Format::Table => {
            let mut header = vec!["source".to_string()];
            header.extend(frame.literals().map(|l| frame.literal_text(l)));
            let mut rows = vec![header];
            for s in profile.iter() {
                let mut row = vec![s.source().to_string()];
                row.extend(frame.literals().map(|l| format!("{}", s.bound(l))));
                rows.push(row);
            }
            table(&rows)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WitnessDocument {
    Profile {
        profile: ProfileDocument,
    },
    Transplant {
        first: ProfileDocument,
        second: ProfileDocument,
        left: LiteralDocument,
        right: LiteralDocument,
    },
    Dictator {
        source: usize,
    },
    Crisp {
        profile: Vec<String>,
        quota: usize,
        crisp: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessFile {
    pub property: String,
    pub c: f64,
    pub rule: Option<String>,
    pub quota: Option<usize>,
    pub crisp: Option<Vec<f64>>,
    pub dictator: usize,
    pub seed: u64,
    pub samples: usize,
    pub style: String,
    pub min_sources: usize,
    pub max_sources: usize,
    pub sample: usize,
    pub detail: String,
    pub witness: WitnessDocument,
}

fn witness_to_document(frame: &Frame, witness: &Witness) -> WitnessDocument {
    match witness {
        Witness::Profile { profile, .. } => WitnessDocument::Profile {
            profile: profile_document(frame, profile, false),
        },
        Witness::Transplant {
            first,
            second,
            left,
            right,
        } => WitnessDocument::Transplant {
            first: profile_document(frame, first, false),
            second: profile_document(frame, second, false),
            left: literal_document(frame, *left),
            right: literal_document(frame, *right),
        },
        Witness::Dictator { source } => WitnessDocument::Dictator { source: source + 1 },
        Witness::Crisp {
            profile,
            quota,
            crisp,
        } => WitnessDocument::Crisp {
            profile: profile.iter().map(|s| s.signs()).collect(),
            quota: *quota,
            crisp: crisp.coefficients().to_vec(),
        },
    }
}

pub fn witness_document(
    frame: &Frame,
    report: &PropertyReport,
    ce: &Counterexample,
    c: f64,
    rule: Option<&str>,
    options: &RuleOptions,
    cfg: &GeneratorConfig,
) -> String {
    json(&WitnessFile {
        property: report.property.clone(),
        c,
        rule: rule.map(str::to_string),
        quota: options.quota,
        crisp: options.crisp.as_ref().map(|c| c.coefficients().to_vec()),
        dictator: options.dictator + 1,
        seed: cfg.seed,
        samples: cfg.samples,
        style: cfg.style.name().to_string(),
        min_sources: cfg.min_sources,
        max_sources: cfg.max_sources,
        sample: ce.sample,
        detail: ce.detail.clone(),
        witness: witness_to_document(frame, &ce.witness),
    })
}

pub struct StoredWitness {
    pub property_name: String,
    pub c: f64,
    pub rule_name: Option<String>,
    pub options: RuleOptions,
    pub witness: Witness,
    pub config: GeneratorConfig,
}

impl StoredWitness {
    pub fn property(&self) -> Result<Property, CliError> {
        parse_property(&self.property_name, self.c)
    }
}

fn parse_crisp_signs(
    src: &Source,
    frame: &Frame,
    signs: &str,
) -> Result<CrispJudgmentSet, CliError> {
    if signs.chars().count() != frame.issue_count() || signs.chars().any(|c| c != '0' && c != '1') {
        return Err(src.error_at(signs, "expected a complete sign vector of 0 and 1"));
    }
    Ok(CrispJudgmentSet::from_signs(
        &signs.chars().map(|c| c == '1').collect::<Vec<_>>(),
    ))
}

pub fn read_witness(path: &Path, frame: &Frame) -> Result<StoredWitness, CliError> {
    let src = Source::read(path)?;
    let doc: WitnessFile = src.parse()?;
    let witness = match &doc.witness {
        WitnessDocument::Profile { profile } => Witness::Profile {
            profile: profile_from_document(&src, profile, frame)?,
            literal: None,
        },
        WitnessDocument::Transplant {
            first,
            second,
            left,
            right,
        } => Witness::Transplant {
            first: profile_from_document(&src, first, frame)?,
            second: profile_from_document(&src, second, frame)?,
            left: resolve_literal(&src, frame, &left.issue, left.neg)?,
            right: resolve_literal(&src, frame, &right.issue, right.neg)?,
        },
        WitnessDocument::Dictator { source } => Witness::Dictator {
            source: source
                .checked_sub(1)
                .ok_or_else(|| src.error("sources count from 1"))?,
        },
        WitnessDocument::Crisp {
            profile,
            quota,
            crisp,
        } => Witness::Crisp {
            profile: profile
                .iter()
                .map(|s| parse_crisp_signs(&src, frame, s))
                .collect::<Result<_, _>>()?,
            quota: *quota,
            crisp: CrispVector::new(crisp.clone()).map_err(|e| src.error(e.to_string()))?,
        },
    };
    let style = JudgmentStyle::from_name(&doc.style)
        .ok_or_else(|| src.error_at(&doc.style, "unknown judgment style"))?;
    let crisp = match &doc.crisp {
        Some(v) => Some(CrispVector::new(v.clone()).map_err(|e| src.error(e.to_string()))?),
        None => None,
    };
    Ok(StoredWitness {
        property_name: doc.property.clone(),
        c: doc.c,
        rule_name: doc.rule.clone(),
        options: RuleOptions {
            quota: doc.quota,
            crisp,
            dictator: doc.dictator.saturating_sub(1),
        },
        witness,
        config: GeneratorConfig {
            seed: doc.seed,
            style,
            samples: doc.samples,
            min_sources: doc.min_sources,
            max_sources: doc.max_sources,
        },
    })
}

#[derive(Serialize)]
struct ReplayOut<'a> {
    reproduced: bool,
    detail: Option<&'a str>,
}

pub fn replay(result: &Option<String>, format: Format) -> String {
    match format {
        Format::Json => json(&ReplayOut {
            reproduced: result.is_some(),
            detail: result.as_deref(),
        }),
        Format::Table => match result {
            Some(d) => format!("counterexample reproduced: {d}\n"),
            None => "counterexample did not reproduce\n".to_string(),
        },
    }
}

#[derive(Serialize)]
struct ReportOut {
    property: String,
    rule: Option<String>,
    verdict: &'static str,
    samples: usize,
    seed: u64,
    style: &'static str,
    note: Option<String>,
    counterexample: Option<CounterexampleOut>,
}

#[derive(Serialize)]
struct CounterexampleOut {
    sample: usize,
    detail: String,
    witness: WitnessDocument,
}

pub fn property_report(frame: &Frame, report: &PropertyReport, format: Format) -> String {
    match format {
        Format::Json => json(&ReportOut {
            property: report.property.clone(),
            rule: report.rule.clone(),
            verdict: report.verdict.name(),
            samples: report.samples,
            seed: report.seed,
            style: report.style.name(),
            note: report.note.clone(),
            counterexample: report.counterexample.as_ref().map(|ce| CounterexampleOut {
                sample: ce.sample,
                detail: ce.detail.clone(),
                witness: witness_to_document(frame, &ce.witness),
            }),
        }),
        Format::Table => {
            let mut out = format!("{report}\n");
            if let Some(note) = &report.note {
                out.push_str(&format!("note: {note}\n"));
            }
            if let Some(ce) = &report.counterexample {
                out.push_str(&format!(
                    "counterexample at sample {}: {}\n",
                    ce.sample, ce.detail
                ));
                match &ce.witness {
                    Witness::Profile { profile, .. } => {
                        out.push_str(&lifted(frame, profile, Format::Table))
                    }
                    Witness::Transplant {
                        first,
                        second,
                        left,
                        right,
                    } => {
                        out.push_str(&format!(
                            "first profile (issue {})\n",
                            frame.literal_text(*left)
                        ));
                        out.push_str(&lifted(frame, first, Format::Table));
                        out.push_str(&format!(
                            "second profile (issue {})\n",
                            frame.literal_text(*right)
                        ));
                        out.push_str(&lifted(frame, second, Format::Table));
                    }
                    Witness::Crisp { profile, quota, .. } => {
                        let signs: Vec<String> = profile.iter().map(|s| s.signs()).collect();
                        out.push_str(&format!(
                            "crisp profile: {} (quota {quota})\n",
                            signs.join(" ")
                        ));
                    }
                    Witness::Dictator { .. } => {}
                }
            }
            out
        }
    }
}
