//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for a domain-level negative (an irrational
//! profile, a counterexample), 2 for usage and parse errors.

pub mod documents;
mod render;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::aggregate::{
    prime_implicant_rule_from_average, sequential_average, AggregationOutcome, CrispVector, Rule,
    RuleOptions, Scoring, DEFAULT_CRISP_COEFFICIENT,
};
use crate::frame::Frame;
use crate::likelihood::{check_rationality, lift_profile};
use crate::properties::{
    self, GeneratorConfig, JudgmentStyle, Property, Theorem, DEFAULT_SAMPLES, DEFAULT_SEED,
};

use documents::{load_average, load_crisp_profile, load_crisp_vector, load_frame, load_profile};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{}", parse_message(.path, *.line, *.column, .token, .message))]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        token: String,
        message: String,
    },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failure(String),
}

fn parse_message(path: &Path, line: usize, column: usize, token: &str, message: &str) -> String {
    let mut out = format!("{}", path.display());
    if line > 0 {
        out.push_str(&format!(":{line}:{column}"));
    }
    out.push_str(&format!(": {message}"));
    if !token.is_empty() {
        out.push_str(&format!(" (token `{token}`)"));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Enumerate {
    Rational,
    Implicants,
}

#[derive(Debug, Parser)]
#[command(
    name = "lja",
    version,
    about = "Aggregate likelihood judgments into crisp collective judgments"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Seed for sampled property checks.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Report only the lexicographically first winner.
    #[arg(long, global = true)]
    pub resolute: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check that every source of a profile is rational.
    Validate { frame: PathBuf, profile: PathBuf },
    /// List the rational judgment sets or the prime implicants of a frame.
    Enumerate {
        frame: PathBuf,
        #[arg(long, value_enum, default_value_t = Enumerate::Rational)]
        what: Enumerate,
    },
    /// Aggregate a profile with one rule.
    Aggregate {
        frame: PathBuf,
        /// Likelihood profile; optional when --average is given.
        profile: Option<PathBuf>,
        #[arg(long)]
        rule: String,
        #[arg(long)]
        quota: Option<usize>,
        /// Uniform crispifying coefficient in (0.5, 1].
        #[arg(long, conflicts_with = "crisp_vector")]
        uniform_c: Option<f64>,
        /// Crispifying vector document.
        #[arg(long)]
        crisp_vector: Option<PathBuf>,
        /// Source position (1-based) for the dictator rule.
        #[arg(long, default_value_t = 1)]
        dictator: usize,
        /// Average likelihood document, for seq-avg, pi-sum and pi-min.
        #[arg(long)]
        average: Option<PathBuf>,
    },
    /// Turn a crisp profile into its 0/1 likelihood profile.
    Lift { frame: PathBuf, profile: PathBuf },
    /// Check a property of a rule on sampled profiles.
    Check {
        /// zpp, unanimity, convexity, systematicity, non-dictatorship,
        /// rationality, or generalization:{thm1,prop1,prop2,prop4}.
        property: String,
        /// Frame document; defaults to the agenda {p, p -> q, q}.
        #[arg(long)]
        frame: Option<PathBuf>,
        #[arg(long)]
        rule: Option<String>,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        /// equalities, lower-bounds or lifted-crisp.
        #[arg(long, default_value = "lifted-crisp")]
        style: String,
        #[arg(long, default_value_t = 1)]
        min_sources: usize,
        #[arg(long, default_value_t = 5)]
        max_sources: usize,
        /// Threshold for the unanimity property.
        #[arg(long, default_value_t = DEFAULT_CRISP_COEFFICIENT)]
        c: f64,
        #[arg(long)]
        quota: Option<usize>,
        #[arg(long, conflicts_with = "crisp_vector")]
        uniform_c: Option<f64>,
        #[arg(long)]
        crisp_vector: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        dictator: usize,
        /// Where to write a counterexample for replay.
        #[arg(long)]
        witness_out: Option<PathBuf>,
        /// Re-run a stored counterexample instead of searching.
        #[arg(long)]
        replay: Option<PathBuf>,
    },
}

/// Parses arguments, runs the command and returns the exit code.
pub fn run<I: IntoIterator<Item = OsString>>(args: I) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let mut out = std::io::stdout().lock();
    match execute(&cli, &mut out) {
        Ok(code) => code,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            2
        }
    }
}

/// Runs a parsed command, writing its report to `out`.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    let text = match &cli.command {
        Command::Validate { frame, profile } => {
            let frame = load_frame(frame)?;
            let profile = load_profile(profile, &frame)?;
            let mut reports = Vec::new();
            for s in profile.iter() {
                reports.push(check_rationality(s, &frame).map_err(failure)?);
            }
            let rational = reports.iter().all(|r| r.rational());
            let text = render::validation(&frame, &profile, &reports, cli.format);
            write_out(out, &text)?;
            return Ok(if rational { 0 } else { 1 });
        }
        Command::Enumerate { frame, what } => {
            let frame = load_frame(frame)?;
            render::enumeration(&frame, *what, cli.format).map_err(failure)?
        }
        Command::Aggregate {
            frame,
            profile,
            rule,
            quota,
            uniform_c,
            crisp_vector,
            dictator,
            average,
        } => {
            let frame = load_frame(frame)?;
            let options = rule_options(
                &frame,
                *quota,
                *uniform_c,
                crisp_vector.as_deref(),
                *dictator,
            )?;
            let rule_value = Rule::from_name(rule, &frame, &options).map_err(usage)?;
            match (profile, average) {
                (Some(profile), None) => {
                    let profile = load_profile(profile, &frame)?;
                    let mut outcome = rule_value.apply(&profile, &frame).map_err(usage)?;
                    if cli.resolute {
                        outcome = outcome.into_resolute();
                    }
                    let rational = profile
                        .iter()
                        .map(|s| check_rationality(s, &frame).map(|r| r.rational()))
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(failure)?
                        .into_iter()
                        .all(|r| r);
                    render::aggregation(
                        &frame,
                        Some(&profile),
                        &rule_value,
                        &outcome,
                        Some(rational),
                        cli.format,
                    )
                }
                (None, Some(average)) => {
                    let average = load_average(average, &frame)?;
                    let mut outcome = average_outcome(&rule_value, &average, &frame)?;
                    if cli.resolute {
                        outcome = outcome.into_resolute();
                    }
                    render::aggregation(&frame, None, &rule_value, &outcome, None, cli.format)
                }
                (Some(_), Some(_)) => {
                    return Err(CliError::Usage(
                        "give either a profile or --average, not both".into(),
                    ))
                }
                (None, None) => {
                    return Err(CliError::Usage("a profile or --average is required".into()))
                }
            }
        }
        Command::Lift { frame, profile } => {
            let frame = load_frame(frame)?;
            let (names, sets) = load_crisp_profile(profile, &frame)?;
            let lifted = lift_profile(&sets).map_err(failure)?;
            let renamed = crate::frame::Profile::new(
                lifted
                    .iter()
                    .zip(&names)
                    .map(|(s, n)| s.clone().with_source(n.clone()))
                    .collect(),
            )
            .map_err(failure)?;
            render::lifted(&frame, &renamed, cli.format)
        }
        Command::Check {
            property,
            frame,
            rule,
            samples,
            style,
            min_sources,
            max_sources,
            c,
            quota,
            uniform_c,
            crisp_vector,
            dictator,
            witness_out,
            replay,
        } => {
            let frame = match frame {
                Some(path) => load_frame(path)?,
                None => default_frame(),
            };
            let property = parse_property(property, *c)?;
            let style = JudgmentStyle::from_name(style)
                .ok_or_else(|| CliError::Usage(format!("unknown judgment style `{style}`")))?;
            if *min_sources == 0 || min_sources > max_sources {
                return Err(CliError::Usage(
                    "need 1 <= --min-sources <= --max-sources".into(),
                ));
            }
            let cfg = GeneratorConfig {
                seed: cli.seed,
                style,
                samples: *samples,
                min_sources: *min_sources,
                max_sources: *max_sources,
            };
            let options = rule_options(
                &frame,
                *quota,
                *uniform_c,
                crisp_vector.as_deref(),
                *dictator,
            )?;
            let rule_value = match rule {
                Some(name) => Some(Rule::from_name(name, &frame, &options).map_err(usage)?),
                None if property.needs_rule() && replay.is_none() => {
                    return Err(CliError::Usage(format!(
                        "`{}` needs --rule",
                        property.name()
                    )))
                }
                None => None,
            };
            if let Some(path) = replay {
                let stored = render::read_witness(path, &frame)?;
                let rule_value = match stored.rule_name.as_deref() {
                    Some(name) => {
                        Some(Rule::from_name(name, &frame, &stored.options).map_err(usage)?)
                    }
                    None => rule_value,
                };
                let result = properties::replay_witness(
                    &stored.property()?,
                    rule_value.as_ref(),
                    &frame,
                    &stored.witness,
                    &stored.config,
                )
                .map_err(failure)?;
                let text = render::replay(&result, cli.format);
                write_out(out, &text)?;
                return Ok(if result.is_some() { 1 } else { 0 });
            }
            let report = properties::check(&property, rule_value.as_ref(), &frame, &cfg).map_err(
                |e| match e {
                    properties::PropertyError::NotApplicable(m) => CliError::Usage(m),
                    other => failure(other),
                },
            )?;
            if let (Some(path), Some(ce)) = (witness_out, &report.counterexample) {
                let doc = render::witness_document(
                    &frame,
                    &report,
                    ce,
                    *c,
                    rule.as_deref(),
                    &options,
                    &cfg,
                );
                fs::write(path, doc).map_err(|e| CliError::Io {
                    path: path.clone(),
                    message: e.to_string(),
                })?;
            }
            let text = render::property_report(&frame, &report, cli.format);
            write_out(out, &text)?;
            return Ok(if report.holds() { 0 } else { 1 });
        }
    };
    write_out(out, &text)?;
    Ok(0)
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(|e| CliError::Io {
        path: PathBuf::from("<stdout>"),
        message: e.to_string(),
    })
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn failure(e: impl std::fmt::Display) -> CliError {
    CliError::Failure(e.to_string())
}

fn rule_options(
    frame: &Frame,
    quota: Option<usize>,
    uniform_c: Option<f64>,
    crisp_vector: Option<&Path>,
    dictator: usize,
) -> Result<RuleOptions, CliError> {
    let crisp = match (uniform_c, crisp_vector) {
        (Some(c), _) => Some(CrispVector::uniform(frame.issue_count(), c).map_err(usage)?),
        (None, Some(path)) => Some(load_crisp_vector(path, frame)?),
        (None, None) => None,
    };
    if dictator == 0 {
        return Err(CliError::Usage("--dictator counts sources from 1".into()));
    }
    Ok(RuleOptions {
        quota,
        crisp,
        dictator: dictator - 1,
    })
}

fn average_outcome(
    rule: &Rule,
    average: &crate::aggregate::LikelihoodVector,
    frame: &Frame,
) -> Result<AggregationOutcome, CliError> {
    match rule {
        Rule::SequentialAverage => sequential_average(average, frame).map_err(usage),
        Rule::PrimeImplicant {
            scoring: s @ (Scoring::SumAverage | Scoring::MinAverage),
        } => prime_implicant_rule_from_average(average, frame, *s).map_err(usage),
        other => Err(CliError::Usage(format!(
            "rule `{}` needs a profile; --average serves seq-avg, pi-sum and pi-min",
            other.name()
        ))),
    }
}

fn parse_property(name: &str, c: f64) -> Result<Property, CliError> {
    Ok(match name {
        "zpp" => Property::ZeroPreservation,
        "unanimity" => Property::Unanimity { c },
        "convexity" => Property::Convexity,
        "systematicity" => Property::Systematicity,
        "non-dictatorship" => Property::NonDictatorship,
        "rationality" => Property::Rationality,
        other => match other
            .strip_prefix("generalization:")
            .and_then(Theorem::from_name)
        {
            Some(t) => Property::Generalization(t),
            None => return Err(CliError::Usage(format!("unknown property `{other}`"))),
        },
    })
}

fn default_frame() -> Frame {
    Frame::from_text(&["p", "q"], &["p", "p -> q", "q"], &[]).expect("built-in frame is valid")
}
