//! Command-line front end: parses arguments, delegates to `morin-core`
//! and prints one JSON document on standard output.

use std::io::{IsTerminal, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use morin_core::classify::{equivalence_fuzz, Verdict};
use morin_core::forms::{isotopy_form, normal_form, FormSpec};
use morin_core::isotopy::{isotopy_reduce, isotopy_witness};
use morin_core::parse::{parse_framed, parse_germ, GermSource};
use morin_core::report::{
    isotopy_table, Document, FuzzSummary, Report, RulingReport, WitnessReport, SCHEMA, TOOL_VERSION,
};
use morin_core::ruling::{ruling_morin1_check, FramedCurve};
use morin_core::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_TRUNCATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "morin", version, about = "Exact Morin singularity classification of map-germ jets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify a germ file.
    Classify {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 3)]
        rmax: usize,
        /// Raise the truncation order to `rmax + 2` when the header is lower.
        #[arg(long)]
        auto_order: bool,
    },
    /// Classify random orientation-preserving conjugates of a germ.
    Fuzz {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 25)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        degree: u32,
    },
    /// Emit and classify the normal form `h_{0,r}`.
    NormalForm {
        #[command(flatten)]
        form: FormArgs,
    },
    /// Emit and classify the isotopy form `h_{r,(eps1,eps2)}`.
    IsotopyForm {
        #[command(flatten)]
        form: FormArgs,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        eps1: i8,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        eps2: i8,
    },
    /// Sign invariant `D` and isotopy class data of a germ file.
    DInvariant {
        #[command(flatten)]
        input: Input,
        /// Default: the header order minus 2.
        #[arg(long)]
        rmax: Option<usize>,
    },
    /// Number of isotopy classes per `(r, a)`.
    Table {
        #[arg(long, default_value_t = 8)]
        rmax: usize,
        #[arg(long, default_value_t = 4)]
        amax: usize,
    },
    /// Pi-rotations reducing `h_{r,(eps1,eps2)}` to `h_{0,r}`.
    Witness {
        #[command(flatten)]
        form: FormArgs,
        #[arg(long, allow_hyphen_values = true)]
        eps1: i8,
        #[arg(long, allow_hyphen_values = true)]
        eps2: i8,
        /// Reduce to the canonical form of the class instead of failing
        /// when the form is not isotopic to `h_{0,r}`.
        #[arg(long)]
        reduce: bool,
    },
    /// Check a framed curve against the striction-curve criterion.
    Ruling {
        #[command(flatten)]
        input: Input,
    },
    /// Print the JSON schema of all reports.
    Schema,
}

#[derive(Debug, Args)]
pub struct Input {
    /// Input file, `-` for standard input.
    #[arg(long = "in", value_name = "PATH")]
    pub path: PathBuf,
}

#[derive(Debug, Args)]
pub struct FormArgs {
    #[arg(long)]
    pub r: usize,
    #[arg(long)]
    pub a: usize,
    #[arg(long, default_value_t = 0)]
    pub extra: usize,
    /// Truncation order, default `r + 2`.
    #[arg(long)]
    pub order: Option<u32>,
}

impl FormArgs {
    fn spec(&self) -> FormSpec {
        FormSpec::new(self.r, self.a, self.extra)
    }

    fn order(&self) -> u32 {
        self.order.unwrap_or(self.r as u32 + 2)
    }
}

/// Failure carrying the exit code it maps to.
#[derive(Debug)]
struct Failure {
    code: i32,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Failure {
        let error = e.into();
        let code = match error.downcast_ref::<Error>() {
            Some(Error::Truncation { .. }) => EXIT_TRUNCATION,
            Some(Error::Inconsistent(_)) => EXIT_FAILURE,
            _ => EXIT_INPUT,
        };
        Failure { code, error }
    }
}

struct Output {
    doc: Option<Document>,
    text: Option<String>,
    summary: String,
    code: i32,
}

/// Parses `args` and runs the command; the JSON document goes to `out`,
/// the summary and errors to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{rendered}");
            } else {
                let _ = write!(out, "{rendered}");
            }
            return code;
        }
    };
    let paint = Paint::detect();
    let start = Instant::now();
    match execute(&cli.command) {
        Ok(mut o) => {
            if let Some(doc) = o.doc.as_mut() {
                doc.timing_mut().elapsed_us = start.elapsed().as_micros() as u64;
                let _ = out.write_all(doc.to_json().as_bytes());
            }
            if let Some(text) = &o.text {
                let _ = out.write_all(text.as_bytes());
            }
            if !o.summary.is_empty() {
                let _ = writeln!(err, "{}", paint.summary(&o.summary, o.code));
            }
            o.code
        }
        Err(f) => {
            let _ = writeln!(err, "{}: {:#}", paint.error("error"), f.error);
            f.code
        }
    }
}

fn execute(cmd: &Command) -> Result<Output, Failure> {
    match cmd {
        Command::Classify { input, rmax, auto_order } => {
            let src = read_germ(&input.path)?;
            let src = if *auto_order && src.order < *rmax as u32 + 2 {
                GermSource { order: *rmax as u32 + 2, ..src }
            } else {
                src
            };
            germ_output("classify", &src, *rmax)
        }
        Command::Fuzz { input, trials, seed, degree } => {
            let src = read_germ(&input.path)?;
            let f = src.to_map_jet();
            if f.order() < 3 {
                return Err(Error::Truncation { have: f.order(), need: 3 }.into());
            }
            let r_max = f.order() as usize - 2;
            let mut report = Report::classify("fuzz", &src, r_max)?;
            let runs = equivalence_fuzz(&f, *trials, *degree, *seed)?;
            let verdicts: Vec<Verdict> = runs.into_iter().map(|r| r.verdict).collect();
            let consistent = verdicts.iter().all(|v| *v == report.verdict);
            report.seed = Some(*seed);
            report.fuzz = Some(FuzzSummary { trials: *trials, degree: *degree, verdicts, consistent });
            let summary = format!(
                "{}; {} of {} conjugates agree",
                report.verdict,
                report.fuzz.as_ref().map_or(0, |z| z.verdicts.iter().filter(|v| **v == report.verdict).count()),
                trials
            );
            Ok(germ_doc(report, summary))
        }
        Command::NormalForm { form } => {
            let f = normal_form(&form.spec(), form.order())?;
            let src = GermSource::from_map_jet(&f);
            germ_output("normal-form", &src, form.r)
        }
        Command::IsotopyForm { form, eps1, eps2 } => {
            let f = isotopy_form(&form.spec().with_signs(*eps1, *eps2), form.order())?;
            let src = GermSource::from_map_jet(&f);
            germ_output("isotopy-form", &src, form.r)
        }
        Command::DInvariant { input, rmax } => {
            let src = read_germ(&input.path)?;
            let rmax = rmax.unwrap_or((src.order as usize).saturating_sub(2).max(1));
            let mut o = germ_output("d-invariant", &src, rmax)?;
            if let Some(Document::Germ(report)) = &o.doc {
                if o.code == EXIT_OK && report.isotopy.is_none() {
                    return Err(Error::NotApplicable(format!("D needs a Morin germ, verdict is {}", report.verdict)).into());
                }
                if let Some(iso) = &report.isotopy {
                    o.summary = match iso.d_sign {
                        Some(d) => format!("D = {d:+}"),
                        None => "suspension case, D undefined".to_string(),
                    };
                }
            }
            Ok(o)
        }
        Command::Table { rmax, amax } => {
            if *rmax == 0 || *amax == 0 {
                return Err(Error::InvalidArgument("rmax and amax must be positive".into()).into());
            }
            let table = isotopy_table(*rmax, *amax)?;
            let rows: Vec<String> = table
                .class_counts
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
                    format!("r={}: {}", i + 1, cells.join(" "))
                })
                .collect();
            Ok(Output { doc: Some(Document::Table(table)), text: None, summary: rows.join("\n"), code: EXIT_OK })
        }
        Command::Witness { form, eps1, eps2, reduce } => {
            let spec = form.spec().with_signs(*eps1, *eps2);
            let w = if *reduce { isotopy_reduce(&spec)? } else { isotopy_witness(&spec)? };
            let verified = w.verify()?;
            let summary = format!(
                "{} rotations to ({}, {}), verified: {verified}",
                w.steps.len(),
                w.to.0,
                w.to.1
            );
            let code = if verified { EXIT_OK } else { EXIT_FAILURE };
            Ok(Output { doc: Some(Document::Witness(WitnessReport::new(&w, verified))), text: None, summary, code })
        }
        Command::Ruling { input } => {
            let text = read_text(&input.path)?;
            let src = parse_framed(&text).map_err(|e| located(&input.path, e))?;
            let fc = FramedCurve::from_source(&src)?;
            let check = ruling_morin1_check(&fc)?;
            let summary = format!(
                "classifier: {}, striction immersion: {}, identity holds: {}",
                check.verdict, check.alpha_morin1, check.identity_holds
            );
            let report = RulingReport {
                tool_version: TOOL_VERSION.to_string(),
                input: src.to_string(),
                check,
                timing: Default::default(),
            };
            Ok(Output { doc: Some(Document::Ruling(report)), text: None, summary, code: EXIT_OK })
        }
        Command::Schema => Ok(Output { doc: None, text: Some(SCHEMA.to_string()), summary: String::new(), code: EXIT_OK }),
    }
}

fn germ_doc(report: Report, summary: String) -> Output {
    let code = match report.verdict {
        Verdict::TruncationInsufficient { .. } => EXIT_TRUNCATION,
        _ => EXIT_OK,
    };
    Output { doc: Some(Document::Germ(report)), text: None, summary, code }
}

fn germ_output(command: &str, src: &GermSource, r_max: usize) -> Result<Output, Failure> {
    let report = Report::classify(command, src, r_max)?;
    let summary = report.verdict.to_string();
    Ok(germ_doc(report, summary))
}

fn read_text(path: &Path) -> anyhow::Result<String> {
    let mut text = String::new();
    if path == Path::new("-") {
        std::io::stdin().read_to_string(&mut text).context("reading standard input")?;
    } else {
        text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    }
    Ok(text)
}

fn located(path: &Path, e: morin_core::parse::ParseError) -> anyhow::Error {
    anyhow::Error::new(Error::Parse(e)).context(path.display().to_string())
}

fn read_germ(path: &Path) -> anyhow::Result<GermSource> {
    let text = read_text(path)?;
    parse_germ(&text).map_err(|e| located(path, e))
}

struct Paint {
    color: bool,
}

impl Paint {
    fn detect() -> Paint {
        let no_color = std::env::var_os("NO_COLOR").is_some_and(|v| !v.is_empty());
        Paint { color: !no_color && std::io::stderr().is_terminal() }
    }

    fn wrap(&self, code: &str, s: &str) -> String {
        if self.color {
            format!("\x1b[{code}m{s}\x1b[0m")
        } else {
            s.to_string()
        }
    }

    fn summary(&self, s: &str, exit: i32) -> String {
        self.wrap(if exit == EXIT_OK { "32" } else { "33" }, s)
    }

    fn error(&self, s: &str) -> String {
        self.wrap("1;31", s)
    }
}
