//! The `wfcheck` command line: `parse`, `run` and `check`.
//!
//! Exit codes: 0 success or consistent, 1 usage or parse error, 2 I/O error,
//! 3 contradiction or ambiguity found.

mod report;
mod text;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::checks::{cpl_probability_check, epr_correlation_check, ghz_check, ContradictionReport, Verdict};
use crate::interpret::{exact_branches, sample_runs, EngineError, FactHolderPolicy, RuleSet};
use crate::qcore::C64;
use crate::scenario::{parse, Scenario};

pub use report::{
    pin_summaries, tabulate, Agreement, JointRow, ParseReport, PinSummary, ReportEnvelope, Results, RunReport,
    Table, Timing,
};
pub use text::{num as format_number, render as render_text};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_FOUND: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "wfcheck", version, about = "Wigner-friend contradiction checker")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RulesArg {
    Orthodox,
    Rqm5,
    Cpl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum HolderArg {
    Interacting,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CheckName {
    Epr,
    Cpl,
    Ghz,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Parse and validate a scenario file.
    Parse {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Run a scenario under one rule set.
    Run(RunArgs),
    /// Run one of the built-in contradiction checks.
    Check(CheckArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    file: PathBuf,
    #[arg(long, value_enum)]
    rules: RulesArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    samples: usize,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Table entries at or below this weight are omitted; pinned reads
    /// overriding more than this are reported as contradictions.
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    #[arg(long, value_enum, default_value = "interacting")]
    fact_holder: HolderArg,
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[arg(value_enum)]
    name: CheckName,
    /// Outcome probabilities |c_j|^2, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    c: Option<Vec<f64>>,
    /// Alice's fact for `check cpl`.
    #[arg(long)]
    ra: Option<usize>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long, value_enum, default_value = "interacting")]
    fact_holder: HolderArg,
    #[arg(long)]
    timing: bool,
}

/// Captured result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl CliOutput {
    fn fail(code: i32, msg: impl Into<String>) -> Self {
        let mut stderr = msg.into();
        if !stderr.ends_with('\n') {
            stderr.push('\n');
        }
        CliOutput { code, stdout: String::new(), stderr }
    }
}

fn holder(h: HolderArg) -> FactHolderPolicy {
    match h {
        HolderArg::Interacting => FactHolderPolicy::InteractingOnly,
        HolderArg::Both => FactHolderPolicy::BothParties,
    }
}

/// Default probabilities for `check epr` and `check cpl`.
pub const DEFAULT_PROBABILITIES: [f64; 2] = [0.3, 0.7];

/// Runs one invocation; `args` excludes the program name.
pub fn execute<I, T>(args: I) -> CliOutput
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let invocation: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let argv = std::iter::once(OsString::from("wfcheck")).chain(args);
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    CliOutput { code: EXIT_OK, stdout: text, stderr: String::new() }
                }
                _ => CliOutput::fail(EXIT_USAGE, text),
            };
        }
    };
    match cli.cmd {
        Cmd::Parse { file, format } => cmd_parse(&file, format, invocation),
        Cmd::Run(a) => cmd_run(a, invocation),
        Cmd::Check(a) => cmd_check(a, invocation),
    }
}

fn load(path: &PathBuf) -> Result<Scenario, CliOutput> {
    let src = std::fs::read_to_string(path)
        .map_err(|e| CliOutput::fail(EXIT_IO, format!("error: cannot read {}: {e}", path.display())))?;
    parse(&src).map_err(|f| {
        let lines: Vec<String> = f.errors.iter().map(|e| format!("{}:{e}", path.display())).collect();
        CliOutput::fail(EXIT_USAGE, lines.join("\n"))
    })
}

fn emit(env: ReportEnvelope, format: Format, code: i32) -> CliOutput {
    let stdout = match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&env).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Text => text::render(&env),
    };
    CliOutput { code, stdout, stderr: String::new() }
}

fn envelope(invocation: Vec<String>, seed: Option<u64>, results: Results, start: Option<Instant>) -> ReportEnvelope {
    ReportEnvelope {
        tool: "wfcheck".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        invocation,
        seed,
        results,
        timing: start.map(|t| Timing { elapsed_ms: t.elapsed().as_secs_f64() * 1e3 }),
    }
}

fn cmd_parse(file: &PathBuf, format: Format, invocation: Vec<String>) -> CliOutput {
    match load(file) {
        Ok(s) => emit(envelope(invocation, None, Results::Parse(ParseReport::new(&s)), None), format, EXIT_OK),
        Err(e) => e,
    }
}

fn engine_failure(e: EngineError) -> CliOutput {
    CliOutput::fail(EXIT_USAGE, format!("error: {e}"))
}

fn cmd_run(a: RunArgs, invocation: Vec<String>) -> CliOutput {
    let start = a.timing.then(Instant::now);
    if !a.tolerance.is_finite() || a.tolerance < 0.0 {
        return CliOutput::fail(EXIT_USAGE, format!("error: tolerance must be a finite non-negative number, got {}", a.tolerance));
    }
    let s = match load(&a.file) {
        Ok(s) => s,
        Err(e) => return e,
    };
    let base = match a.rules {
        RulesArg::Orthodox => RuleSet::orthodox(),
        RulesArg::Rqm5 => RuleSet::rqm5(),
        RulesArg::Cpl => RuleSet::cpl(),
    };
    let rules = base.with_fact_holder(holder(a.fact_holder));
    let names: Vec<String> = s.timeline.iter().filter_map(|e| e.binds().map(String::from)).collect();

    let (exact, pins) = match exact_branches(&s, rules) {
        Ok(bs) => {
            let weighted: Vec<(f64, &_)> = bs.iter().map(|b| (b.weight, b)).collect();
            (Some(tabulate(&weighted, &names, a.tolerance)), pin_summaries(&bs))
        }
        Err(EngineError::TooManyBranches) => (None, Vec::new()),
        Err(e) => return engine_failure(e),
    };
    let sampled = if a.samples > 0 {
        match sample_runs(&s, rules, a.seed, a.samples) {
            Ok(runs) => {
                let counted: Vec<(f64, &_)> = runs.iter().map(|b| (1.0, b)).collect();
                Some(tabulate(&counted, &names, 0.0).per(a.samples as f64))
            }
            Err(e) => return engine_failure(e),
        }
    } else {
        None
    };
    let found = pins.iter().any(|p| p.expected_discrepancy > a.tolerance || p.impossible_weight > a.tolerance);
    let report = RunReport {
        scenario: s.name.clone(),
        rules: rules.kind,
        fact_holder: rules.fact_holder,
        tolerance: a.tolerance,
        names,
        exact,
        pins,
        sampled,
        samples: a.samples,
    };
    let env = envelope(invocation, Some(a.seed), Results::Run(report), start);
    emit(env, a.format, if found { EXIT_FOUND } else { EXIT_OK })
}

fn probabilities_to_amplitudes(ps: &[f64]) -> Result<Vec<f64>, CliOutput> {
    if let Some(p) = ps.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(CliOutput::fail(EXIT_USAGE, format!("error: probability {p} is not a non-negative number")));
    }
    Ok(ps.iter().map(|p| p.sqrt()).collect())
}

fn cmd_check(a: CheckArgs, invocation: Vec<String>) -> CliOutput {
    let start = a.timing.then(Instant::now);
    let probs = a.c.clone().unwrap_or_else(|| DEFAULT_PROBABILITIES.to_vec());
    let result: Result<ContradictionReport, CliOutput> = match a.name {
        CheckName::Ghz => {
            if a.c.is_some() || a.ra.is_some() {
                return CliOutput::fail(EXIT_USAGE, "error: `check ghz` takes no --c or --ra");
            }
            ghz_check(holder(a.fact_holder)).map_err(|e| CliOutput::fail(EXIT_USAGE, format!("error: {e}")))
        }
        CheckName::Epr => {
            if a.ra.is_some() {
                return CliOutput::fail(EXIT_USAGE, "error: `check epr` takes no --ra");
            }
            probabilities_to_amplitudes(&probs).and_then(|c| {
                epr_correlation_check(&c).map_err(|e| CliOutput::fail(EXIT_USAGE, format!("error: {e}")))
            })
        }
        CheckName::Cpl => probabilities_to_amplitudes(&probs).and_then(|c| {
            let amps: Vec<C64> = c.iter().map(|x| C64::new(*x, 0.0)).collect();
            cpl_probability_check(&amps, a.ra.unwrap_or(0))
                .map_err(|e| CliOutput::fail(EXIT_USAGE, format!("error: {e}")))
        }),
    };
    let mut report = match result {
        Ok(r) => r,
        Err(e) => return e,
    };
    if a.name != CheckName::Ghz {
        report.parameters.insert("probabilities".into(), probs);
    }
    let code = if report.verdict == Verdict::Consistent { EXIT_OK } else { EXIT_FOUND };
    emit(envelope(invocation, None, Results::Check(report), start), a.format, code)
}
