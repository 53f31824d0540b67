//! The `envsan` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 processing failure, 3 `check`
//! found tests that would be newly skipped.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use globset::{GlobBuilder, GlobSet, GlobSetBuilder};
use rayon::prelude::*;
use walkdir::WalkDir;

use crate::annotation::ParseMode;
use crate::classify::{classify_outcomes, parse_outcome_log, FlakinessClassification, LogFormat};
use crate::diagnostic::Diagnostic;
use crate::environment::{detect_environment, EnvOverrides, Environment, HostProbe};
use crate::evaluator::Composition;
use crate::matrix::{emit_workflow_template, predict_skip_matrix, MatrixConfig, SourceFile};
use crate::report::{
    build_report, merge_reports, read_report, render, write_report, Clock, Report, ReportFormat, ScanStats,
    DEFAULT_REPORT_PATH,
};
use crate::transform::{sanitize_source, SanitizeOptions, SanitizedFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;
pub const EXIT_PENDING_SKIPS: i32 = 3;

/// Used when no glob is given. Explicit globs replace these entirely.
pub const DEFAULT_GLOBS: [&str; 3] = ["**/*.test.*", "**/*.spec.*", "test/**/*"];

/// Only files with these extensions are considered, whatever the globs say.
pub const SOURCE_EXTENSIONS: [&str; 8] = ["js", "cjs", "mjs", "jsx", "ts", "cts", "mts", "tsx"];

const SKIPPED_DIRS: [&str; 2] = ["node_modules", ".git"];

#[derive(Debug, Parser)]
#[command(
    name = "envsan",
    version,
    about = "Skip and report environment-dependent JavaScript tests"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rewrite skip-decided tests (dry run unless --write or --out-dir).
    Sanitize(SanitizeArgs),
    /// Like sanitize but never writes sources; exits 3 if skips are pending.
    Check(ScanArgs),
    /// Print the detected environment.
    Env(EnvArgs),
    /// Predict skips across an environment matrix, or emit a workflow file.
    Matrix(MatrixArgs),
    /// Classify an outcome log (ndjson or csv).
    Classify(ClassifyArgs),
    /// Merge report documents.
    MergeReports(MergeArgs),
}

#[derive(Debug, Clone, Args)]
pub struct OverrideArgs {
    #[arg(long)]
    pub os: Option<String>,
    #[arg(long = "node-version")]
    pub node_version: Option<String>,
    /// Falls back to ENVSAN_BROWSER.
    #[arg(long)]
    pub browser: Option<String>,
}

impl From<&OverrideArgs> for EnvOverrides {
    fn from(a: &OverrideArgs) -> Self {
        EnvOverrides {
            os: a.os.clone(),
            node_version: a.node_version.clone(),
            browser: a.browser.clone(),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    /// File globs relative to the working directory.
    pub globs: Vec<String>,
    #[command(flatten)]
    pub overrides: OverrideArgs,
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Fail (exit 2) on unreadable files and malformed tags.
    #[arg(long)]
    pub strict: bool,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    pub format: ReportFormat,
    /// Skip only when an enable term fails and a skip term matches.
    #[arg(long)]
    pub conjunctive_compat: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SanitizeArgs {
    #[command(flatten)]
    pub scan: ScanArgs,
    /// Rewrite files in place.
    #[arg(long, conflicts_with = "out_dir")]
    pub write: bool,
    /// Write sanitized copies under this directory, mirroring the tree.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EnvArgs {
    #[command(flatten)]
    pub overrides: OverrideArgs,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    pub format: ReportFormat,
}

#[derive(Debug, Clone, Args)]
pub struct MatrixArgs {
    pub globs: Vec<String>,
    /// Matrix config json; defaults to 3 OS × Node 18/20/22 × 10 attempts.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Print a CI workflow template instead of the skip prediction.
    #[arg(long)]
    pub workflow: bool,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    pub format: ReportFormat,
    #[arg(long)]
    pub conjunctive_compat: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LogFormatArg {
    Ndjson,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    pub log: PathBuf,
    /// Inferred from the extension when omitted (`.csv` is csv).
    #[arg(long, value_enum)]
    pub log_format: Option<LogFormatArg>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    pub format: ReportFormat,
}

#[derive(Debug, Clone, Args)]
pub struct MergeArgs {
    #[arg(required = true)]
    pub reports: Vec<PathBuf>,
    /// Output path; standard output when omitted.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    pub format: ReportFormat,
}

/// Everything a run depends on besides its arguments.
pub struct Context<'a> {
    pub cwd: PathBuf,
    pub probe: &'a dyn HostProbe,
    pub clock: Clock,
    pub stdout: &'a mut dyn Write,
    pub stderr: &'a mut dyn Write,
}

/// Parses `args` (including the program name) and runs.
pub fn run_from_args<I, T>(args: I, ctx: &mut Context<'_>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli, ctx),
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    let _ = write!(ctx.stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(ctx.stderr, "{e}");
                    EXIT_USAGE
                }
            };
            code
        }
    }
}

pub fn run(cli: Cli, ctx: &mut Context<'_>) -> i32 {
    let result = match cli.command {
        Command::Sanitize(args) => sanitize(&args.scan, Mode::from_sanitize(&args), ctx),
        Command::Check(args) => sanitize(&args, Mode::Check, ctx),
        Command::Env(args) => env(&args, ctx),
        Command::Matrix(args) => matrix(&args, ctx),
        Command::Classify(args) => classify(&args, ctx),
        Command::MergeReports(args) => merge(&args, ctx),
    };
    match result {
        Ok(code) => code,
        Err(Failure { code, message }) => {
            let _ = writeln!(ctx.stderr, "error: {message}");
            code
        }
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn processing(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_FAILURE,
            message: message.into(),
        }
    }
}

fn io_failure(path: &Path, err: io::Error) -> Failure {
    Failure::processing(format!("{}: {err}", path.display()))
}

enum Mode {
    DryRun,
    Write,
    OutDir(PathBuf),
    Check,
}

impl Mode {
    fn from_sanitize(args: &SanitizeArgs) -> Self {
        match (&args.out_dir, args.write) {
            (Some(dir), _) => Mode::OutDir(dir.clone()),
            (None, true) => Mode::Write,
            (None, false) => Mode::DryRun,
        }
    }

    fn writes(&self) -> bool {
        matches!(self, Mode::Write | Mode::OutDir(_))
    }
}

fn detect(overrides: &OverrideArgs, ctx: &Context<'_>) -> Result<Environment, Failure> {
    detect_environment(&overrides.into(), ctx.probe)
        .map_err(|e| Failure::usage(format!("{e} (pass --os/--node-version/--browser to override)")))
}

fn build_globset(globs: &[String]) -> Result<GlobSet, Failure> {
    let patterns: Vec<String> = if globs.is_empty() {
        DEFAULT_GLOBS.iter().map(|s| s.to_string()).collect()
    } else {
        globs.to_vec()
    };
    let mut builder = GlobSetBuilder::new();
    for p in &patterns {
        let p = p.strip_prefix("./").unwrap_or(p);
        let glob = GlobBuilder::new(p)
            .literal_separator(true)
            .build()
            .map_err(|e| Failure::usage(format!("bad glob `{p}`: {e}")))?;
        builder.add(glob);
    }
    builder.build().map_err(|e| Failure::usage(e.to_string()))
}

/// Matching files as paths relative to `root`, sorted.
pub fn collect_files(root: &Path, globs: &[String], exclude: Option<&Path>) -> Result<Vec<PathBuf>, String> {
    let set = build_globset(globs).map_err(|f| f.message)?;
    let exclude = exclude.map(|p| if p.is_absolute() { p.to_path_buf() } else { root.join(p) });
    let mut files = Vec::new();
    let walker = WalkDir::new(root).follow_links(false).into_iter().filter_entry(|e| {
        if e.depth() == 0 {
            return true;
        }
        let name = e.file_name().to_string_lossy();
        if e.file_type().is_dir() && SKIPPED_DIRS.contains(&name.as_ref()) {
            return false;
        }
        exclude.as_deref().is_none_or(|x| e.path() != x)
    });
    for entry in walker {
        let entry = entry.map_err(|e| e.to_string())?;
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = entry.path().strip_prefix(root).unwrap_or(entry.path()).to_path_buf();
        let ext_ok = rel
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| SOURCE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()));
        if ext_ok && set.is_match(&rel) {
            files.push(rel);
        }
    }
    files.sort();
    Ok(files)
}

fn print_diagnostics(diags: &[Diagnostic], ctx: &mut Context<'_>) {
    for d in diags {
        let _ = writeln!(ctx.stderr, "{d}");
    }
}

fn sanitize(args: &ScanArgs, mode: Mode, ctx: &mut Context<'_>) -> Result<i32, Failure> {
    let env = detect(&args.overrides, ctx)?;
    let exclude = match &mode {
        Mode::OutDir(dir) => Some(dir.as_path()),
        _ => None,
    };
    let files = collect_files(&ctx.cwd, &args.globs, exclude).map_err(Failure::usage)?;
    let options = SanitizeOptions {
        mode: if args.strict {
            ParseMode::Strict
        } else {
            ParseMode::Lenient
        },
        composition: if args.conjunctive_compat {
            Composition::Conjunctive
        } else {
            Composition::Disjunctive
        },
        clock: ctx.clock,
    };

    let cwd = ctx.cwd.clone();
    let results: Vec<Result<SanitizedFile, String>> = files
        .par_iter()
        .map(|rel| {
            let bytes = fs::read(cwd.join(rel)).map_err(|e| format!("{}: {e}", rel.display()))?;
            sanitize_source(&bytes, rel, &env, &options).map_err(|e| e.to_string())
        })
        .collect();

    let mut sanitized = Vec::with_capacity(results.len());
    let mut errors = Vec::new();
    for r in results {
        match r {
            Ok(s) => sanitized.push(s),
            Err(e) => errors.push(e),
        }
    }
    let mut diagnostics: Vec<Diagnostic> = sanitized.iter().flat_map(|s| s.diagnostics.iter().cloned()).collect();
    print_diagnostics(&diagnostics, ctx);
    if !errors.is_empty() {
        for e in &errors {
            let _ = writeln!(ctx.stderr, "error: {e}");
        }
        if args.strict {
            return Err(Failure::processing(format!(
                "{} file(s) could not be processed",
                errors.len()
            )));
        }
    }

    let mut scan = ScanStats {
        files: files.len(),
        failed_files: errors.len(),
        ..Default::default()
    };
    let mut records = Vec::new();
    for s in &sanitized {
        scan.test_blocks += s.test_blocks;
        scan.unsanitized += s.unsanitized;
        scan.failed_files += usize::from(s.failed);
        records.extend(s.records.iter().cloned());
    }
    diagnostics.extend(
        errors
            .iter()
            .map(|e| Diagnostic::new(crate::Severity::Error, "", 0, e.clone())),
    );
    let report = build_report(records, &env).with_scan(scan, diagnostics);

    let mut changed_files = 0;
    match &mode {
        Mode::Write => {
            for s in sanitized.iter().filter(|s| s.changed()) {
                write_atomic(&ctx.cwd.join(&s.path), &s.transformed_bytes)?;
                changed_files += 1;
            }
        }
        Mode::OutDir(dir) => {
            let dir = ctx.cwd.join(dir);
            for s in &sanitized {
                let target = dir.join(&s.path);
                if let Some(parent) = target.parent() {
                    fs::create_dir_all(parent).map_err(|e| io_failure(parent, e))?;
                }
                write_atomic(&target, &s.transformed_bytes)?;
                changed_files += usize::from(s.changed());
            }
        }
        Mode::DryRun | Mode::Check => {}
    }

    let report_path = match (&args.report, mode.writes()) {
        (Some(p), _) => Some(p.clone()),
        (None, true) => Some(PathBuf::from(DEFAULT_REPORT_PATH)),
        (None, false) => None,
    };
    match &report_path {
        Some(p) => {
            let full = ctx.cwd.join(p);
            write_report(&report, &full, args.format).map_err(|e| Failure::processing(e.to_string()))?;
            let verb = match mode {
                Mode::Write => format!("rewrote {changed_files} file(s)"),
                Mode::OutDir(ref d) => format!(
                    "wrote {} file(s) to {} ({changed_files} changed)",
                    sanitized.len(),
                    d.display()
                ),
                Mode::DryRun | Mode::Check => "dry run".to_string(),
            };
            let _ = writeln!(
                ctx.stdout,
                "{verb}; {} test(s) skipped, {} already skipped; report: {}",
                report.summary.skipped,
                report.summary.already_skipped,
                p.display()
            );
        }
        None => {
            let _ = write!(ctx.stdout, "{}", render(&report, args.format));
        }
    }

    if matches!(mode, Mode::Check) && report.summary.skipped > 0 {
        return Ok(EXIT_PENDING_SKIPS);
    }
    Ok(EXIT_OK)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_failure(path, e))?;
    tmp.write_all(bytes).map_err(|e| io_failure(path, e))?;
    if let Ok(meta) = fs::metadata(path) {
        let _ = fs::set_permissions(tmp.path(), meta.permissions());
    }
    tmp.persist(path).map_err(|e| io_failure(path, e.error))?;
    Ok(())
}

fn env(args: &EnvArgs, ctx: &mut Context<'_>) -> Result<i32, Failure> {
    let env = detect(&args.overrides, ctx)?;
    match args.format {
        ReportFormat::Json => {
            let _ = writeln!(
                ctx.stdout,
                "{}",
                serde_json::to_string(&env).expect("environment serializes")
            );
        }
        ReportFormat::Text => {
            let _ = writeln!(
                ctx.stdout,
                "os: {}\nnode: {}\nbrowser: {}",
                env.os, env.node_version, env.browser
            );
        }
    }
    Ok(EXIT_OK)
}

fn matrix(args: &MatrixArgs, ctx: &mut Context<'_>) -> Result<i32, Failure> {
    let config = match &args.config {
        Some(p) => {
            let full = ctx.cwd.join(p);
            let text = fs::read_to_string(&full).map_err(|e| io_failure(p, e))?;
            serde_json::from_str::<MatrixConfig>(&text).map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?
        }
        None => MatrixConfig::default(),
    };
    if args.workflow {
        let _ = write!(ctx.stdout, "{}", emit_workflow_template(&config));
        return Ok(EXIT_OK);
    }
    let files = collect_files(&ctx.cwd, &args.globs, None).map_err(Failure::usage)?;
    let sources = files
        .into_iter()
        .map(|rel| {
            let bytes = fs::read(ctx.cwd.join(&rel)).map_err(|e| io_failure(&rel, e))?;
            Ok(SourceFile { path: rel, bytes })
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    let composition = if args.conjunctive_compat {
        Composition::Conjunctive
    } else {
        Composition::Disjunctive
    };
    let m = predict_skip_matrix(&sources, &config, composition).map_err(|e| Failure::usage(e.to_string()))?;
    print_diagnostics(&m.diagnostics, ctx);
    match args.format {
        ReportFormat::Json => {
            let _ = writeln!(
                ctx.stdout,
                "{}",
                serde_json::to_string_pretty(&m).expect("matrix serializes")
            );
        }
        ReportFormat::Text => {
            let _ = write!(ctx.stdout, "{}", m.render_text());
        }
    }
    Ok(EXIT_OK)
}

fn classify(args: &ClassifyArgs, ctx: &mut Context<'_>) -> Result<i32, Failure> {
    let full = ctx.cwd.join(&args.log);
    let text = fs::read_to_string(&full).map_err(|e| io_failure(&args.log, e))?;
    let format = match args.log_format {
        Some(LogFormatArg::Csv) => LogFormat::Csv,
        Some(LogFormatArg::Ndjson) => LogFormat::Ndjson,
        None if args.log.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) => LogFormat::Csv,
        None => LogFormat::Ndjson,
    };
    let records =
        parse_outcome_log(&text, format).map_err(|e| Failure::processing(format!("{}: {e}", args.log.display())))?;
    let c = classify_outcomes(&records).map_err(|e| Failure::processing(format!("{}: {e}", args.log.display())))?;
    for d in &c.diagnostics {
        let _ = writeln!(ctx.stderr, "warning: {d}");
    }
    match args.format {
        ReportFormat::Json => {
            let _ = writeln!(
                ctx.stdout,
                "{}",
                serde_json::to_string_pretty(&c).expect("classification serializes")
            );
        }
        ReportFormat::Text => {
            let _ = write!(ctx.stdout, "{}", classification_text(&c));
        }
    }
    Ok(EXIT_OK)
}

fn classification_text(c: &FlakinessClassification) -> String {
    let mut out = String::new();
    let project: Vec<String> = c.per_project.iter().map(|p| format!("{p:?}")).collect();
    let _ = writeln!(
        out,
        "project: {}",
        if project.is_empty() {
            "-".to_string()
        } else {
            project.join(", ")
        }
    );
    let width = c.per_test.keys().map(String::len).max().unwrap_or(0);
    for (test, t) in &c.per_test {
        let dims: Vec<&str> = t.dimensions.iter().map(|d| d.label()).collect();
        let category = match t.category {
            crate::classify::TestCategory::Stable => "stable",
            crate::classify::TestCategory::EnvDependent => "env_dependent",
            crate::classify::TestCategory::Flaky => "flaky",
        };
        let _ = writeln!(out, "{test:<width$}  {category:<13}  {}", dims.join(" & "));
    }
    let _ = writeln!(
        out,
        "coverage: {}/{} cells",
        c.coverage.observed_cells, c.coverage.expected_cells
    );
    out
}

fn merge(args: &MergeArgs, ctx: &mut Context<'_>) -> Result<i32, Failure> {
    let reports = args
        .reports
        .iter()
        .map(|p| read_report(&ctx.cwd.join(p)).map_err(|e| Failure::processing(e.to_string())))
        .collect::<Result<Vec<Report>, _>>()?;
    let merged = merge_reports(reports).expect("at least one report");
    match &args.report {
        Some(p) => {
            write_report(&merged, &ctx.cwd.join(p), args.format).map_err(|e| Failure::processing(e.to_string()))?
        }
        None => {
            let _ = write!(ctx.stdout, "{}", render(&merged, args.format));
        }
    }
    Ok(EXIT_OK)
}
