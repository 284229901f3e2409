//! The `holotest` command line.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use holotest_core::diag::{codes, has_errors, Diagnostic, Failure};
use holotest_core::mapping::{self, Objective};
use holotest_core::model::*;
use holotest_core::taxonomy::{self, default_taxonomy};
use holotest_core::validate;

use crate::harness::{self, HarnessError, Workspace};
use crate::load;
use crate::specio;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_EXECUTION: i32 = 3;
pub const EXIT_QUALITY_FAIL: i32 = 4;
pub const EXIT_USAGE: i32 = 64;

pub const TAXONOMY_ENV: &str = "HOLOTEST_TAXONOMY";

#[derive(Debug, Parser)]
#[command(name = "holotest", version, about = "Specify, map, run and evaluate holistic tests")]
pub struct Cli {
    /// Print canonical documents on stdout; diagnostics become JSON lines.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and validate documents of any kind.
    Validate {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[arg(long)]
        taxonomy: Option<PathBuf>,
    },
    /// Assign sub-tests to research infrastructures and write a plan.
    Map {
        test_case: PathBuf,
        subtests: PathBuf,
        #[arg(required = true)]
        profiles: Vec<PathBuf>,
        #[arg(long)]
        taxonomy: Option<PathBuf>,
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        #[arg(short, long, default_value = "plan.holo.json")]
        out: PathBuf,
        /// Plan id; defaults to `<subtest-set id>_plan`.
        #[arg(long)]
        id: Option<String>,
    },
    /// Print the execution stages of a plan.
    Plan { plan: PathBuf },
    /// Execute a plan into a workspace.
    Run {
        plan: PathBuf,
        #[arg(long)]
        workspace: PathBuf,
        /// Replaces every executor seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
        jobs: u16,
    },
    /// Characterize sub-tests over their variability attributes.
    Sweep {
        #[arg(long)]
        workspace: PathBuf,
        #[arg(long)]
        plan: Option<String>,
        #[arg(long)]
        subtest: Option<String>,
        #[arg(long)]
        variability: Option<String>,
        #[arg(long)]
        quality: Option<String>,
        #[arg(long, value_enum, default_value_t = Mode::Bisection)]
        mode: Mode,
        #[arg(long, default_value_t = 11)]
        grid_points: u32,
        #[arg(long, default_value_t = 1e-3)]
        tolerance: f64,
    },
    /// Combine results into the holistic verdict.
    Report {
        #[arg(long)]
        workspace: PathBuf,
        #[arg(long)]
        plan: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Grid,
    Bisection,
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(stdout, "{}", e.render());
            return EXIT_OK;
        }
    };
    let mut out = Output {
        json: cli.json,
        stdout,
        stderr,
    };
    match cli.command {
        Command::Validate { paths, taxonomy } => cmd_validate(&mut out, &paths, taxonomy.as_deref()),
        Command::Map {
            test_case,
            subtests,
            profiles,
            taxonomy,
            lambda,
            out: plan_path,
            id,
        } => cmd_map(&mut out, &test_case, &subtests, &profiles, taxonomy.as_deref(), lambda, &plan_path, id),
        Command::Plan { plan } => cmd_plan(&mut out, &plan),
        Command::Run {
            plan,
            workspace,
            seed,
            jobs,
        } => cmd_run(&mut out, &plan, &workspace, seed, usize::from(jobs)),
        Command::Sweep {
            workspace,
            plan,
            subtest,
            variability,
            quality,
            mode,
            grid_points,
            tolerance,
        } => {
            let mode = match mode {
                Mode::Grid => SweepMode::Grid,
                Mode::Bisection => SweepMode::Bisection,
            };
            let sel = SweepSelection {
                subtest,
                variability,
                quality,
                mode,
                grid_points,
                tolerance,
            };
            cmd_sweep(&mut out, &workspace, plan.as_deref(), &sel)
        }
        Command::Report { workspace, plan } => cmd_report(&mut out, &workspace, plan.as_deref()),
    }
}

struct Output<'a> {
    json: bool,
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

impl Output<'_> {
    fn diag(&mut self, file: &Path, d: &Diagnostic) {
        if self.json {
            let v = serde_json::json!({
                "file": file.display().to_string(),
                "code": d.code,
                "severity": d.severity.as_str(),
                "path": d.path,
                "line": d.line,
                "col": d.col,
                "message": d.message,
            });
            let _ = writeln!(self.stderr, "{v}");
        } else {
            let _ = writeln!(self.stderr, "{}: {d}", file.display());
        }
    }

    fn diags(&mut self, file: &Path, ds: &[Diagnostic]) {
        for d in ds {
            self.diag(file, d);
        }
    }

    fn say(&mut self, text: &str) {
        if !self.json {
            let _ = self.stderr.write_all(text.as_bytes());
        }
    }

    fn document(&mut self, bytes: &[u8]) {
        if self.json {
            let _ = self.stdout.write_all(bytes);
        }
    }
}

fn load_taxonomy(out: &mut Output<'_>, flag: Option<&Path>) -> Option<Taxonomy> {
    let path = flag
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(TAXONOMY_ENV).filter(|v| !v.is_empty()).map(PathBuf::from));
    let Some(path) = path else {
        return Some(default_taxonomy());
    };
    match load::read_as::<Taxonomy>(&path) {
        Ok((tax, warnings)) => {
            out.diags(&path, &warnings);
            let diags = taxonomy::check_taxonomy(&tax);
            out.diags(&path, &diags);
            (!has_errors(&diags)).then_some(tax)
        }
        Err(diags) => {
            out.diags(&path, &diags);
            None
        }
    }
}

/// Unwraps a load result, reporting its diagnostics against `file`.
fn take<T>(out: &mut Output<'_>, file: &Path, r: Result<(T, Vec<Diagnostic>), Vec<Diagnostic>>) -> Option<T> {
    match r {
        Ok((doc, warnings)) => {
            out.diags(file, &warnings);
            Some(doc)
        }
        Err(diags) => {
            out.diags(file, &diags);
            None
        }
    }
}

fn prefixed(prefix: &str, diags: Vec<Diagnostic>) -> Vec<Diagnostic> {
    diags
        .into_iter()
        .map(|d| Diagnostic {
            path: format!("{prefix}{}", d.path),
            ..d
        })
        .collect()
}

/// Structural checks of a test case and the configuration it carries.
fn check_test_case(tc: &HolisticTestCase) -> Vec<Diagnostic> {
    match tc.inline_sc() {
        Some(sc) => {
            let mut diags = prefixed("/system_configuration", validate::validate_system_configuration(sc));
            diags.extend(validate::validate_test_case(tc, sc));
            diags
        }
        None => vec![Diagnostic::new(
            codes::W_INCOMPLETE,
            "/system_configuration",
            "no system configuration given; scope checks against it skipped",
        )],
    }
}

fn cmd_validate(out: &mut Output<'_>, paths: &[PathBuf], tax_flag: Option<&Path>) -> i32 {
    let Some(tax) = load_taxonomy(out, tax_flag) else {
        return EXIT_INVALID;
    };
    let mut failed = false;
    let mut docs: Vec<(PathBuf, Document)> = Vec::new();
    for path in paths {
        let parsed = match load::read_bytes(path) {
            Ok(bytes) => specio::parse_any(&bytes),
            Err(diags) => specio::Parsed {
                document: None,
                diagnostics: diags,
            },
        };
        out.diags(path, &parsed.diagnostics);
        failed |= has_errors(&parsed.diagnostics);
        let Some(mut doc) = parsed.document else { continue };
        if let Document::TestCase(tc) = &mut doc {
            match load::inline_sc(tc, path) {
                Ok(w) => out.diags(path, &w),
                Err(e) => {
                    out.diags(path, &e);
                    failed = true;
                    continue;
                }
            }
        }
        docs.push((path.clone(), doc));
    }

    let test_cases: BTreeMap<&str, &HolisticTestCase> = docs
        .iter()
        .filter_map(|(_, d)| match d {
            Document::TestCase(tc) => Some((tc.id.as_str(), tc)),
            _ => None,
        })
        .collect();

    for (path, doc) in &docs {
        let diags = match doc {
            Document::SystemConfiguration(sc) => validate::validate_system_configuration(sc),
            Document::TestCase(tc) => check_test_case(tc),
            Document::SubtestSet(d) => check_subtest_set(d, test_cases.get(d.parent.as_str()).copied(), &tax),
            Document::RiProfile(p) => taxonomy::validate_profile(p, &tax),
            Document::Plan(_) => match load::read_plan(path) {
                Ok((b, w)) => {
                    let mut diags = w;
                    diags.extend(mapping::validate_plan(&b.plan, &b.subtests));
                    diags
                }
                Err(e) => e,
            },
            Document::Taxonomy(t) => taxonomy::check_taxonomy(t),
            Document::ResultSet(_) => Vec::new(),
        };
        out.diags(path, &diags);
        failed |= has_errors(&diags);
        out.document(&specio::serialize(doc));
    }
    if failed {
        EXIT_INVALID
    } else {
        out.say(&format!("{} document(s) valid\n", docs.len()));
        EXIT_OK
    }
}

fn check_subtest_set(d: &Decomposition, parent: Option<&HolisticTestCase>, tax: &Taxonomy) -> Vec<Diagnostic> {
    if let Some(tc) = parent {
        if let Some(sc) = tc.inline_sc() {
            return mapping::validate_subtest_set(tc, sc, d, Some(tax));
        }
    }
    let mut diags = vec![Diagnostic::new(
        codes::W_INCOMPLETE,
        "/parent",
        format!("test case '{}' not among the inputs; decomposition checks skipped", d.parent),
    )];
    for (i, st) in d.subtests.iter().enumerate() {
        for (j, r) in st.requirements.iter().enumerate() {
            diags.extend(taxonomy::validate_requirement(r, tax, &format!("/subtests/{i}/requirements/{j}")));
        }
    }
    if d.taxonomy != tax.id {
        diags.push(Diagnostic::new(
            codes::E_TAXONOMY_MISMATCH,
            "/taxonomy",
            format!("sub-tests use taxonomy '{}', loaded taxonomy is '{}'", d.taxonomy, tax.id),
        ));
    }
    diags
}

fn relative_ref(from_dir: &Path, target: &Path, id: &str) -> DocRef {
    let abs = |p: &Path| std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf());
    let rel = pathdiff::diff_paths(abs(target), abs(from_dir)).unwrap_or_else(|| abs(target));
    DocRef {
        path: rel.to_string_lossy().replace('\\', "/"),
        id: id.into(),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_map(
    out: &mut Output<'_>,
    tc_path: &Path,
    st_path: &Path,
    profile_paths: &[PathBuf],
    tax_flag: Option<&Path>,
    lambda: f64,
    plan_path: &Path,
    id: Option<String>,
) -> i32 {
    let Some(tax) = load_taxonomy(out, tax_flag) else {
        return EXIT_INVALID;
    };
    let tc = take(out, tc_path, load::read_test_case(tc_path));
    let d = take(out, st_path, load::read_as::<Decomposition>(st_path));
    let mut profiles = Vec::new();
    let mut failed = tc.is_none() || d.is_none();
    for p in profile_paths {
        match take(out, p, load::read_as::<RiProfile>(p)) {
            Some(profile) => {
                let diags = taxonomy::validate_profile(&profile, &tax);
                out.diags(p, &diags);
                failed |= has_errors(&diags);
                profiles.push(profile);
            }
            None => failed = true,
        }
    }
    let (Some(tc), Some(d)) = (tc, d) else {
        return EXIT_INVALID;
    };
    let tc_diags = check_test_case(&tc);
    out.diags(tc_path, &tc_diags);
    let st_diags = check_subtest_set(&d, Some(&tc), &tax);
    out.diags(st_path, &st_diags);
    if failed || has_errors(&tc_diags) || has_errors(&st_diags) {
        return EXIT_INVALID;
    }

    let plan_dir = plan_path.parent().unwrap_or(Path::new(""));
    let plan_id = id.unwrap_or_else(|| format!("{}_plan", d.id));
    let made = mapping::make_plan(
        &plan_id,
        relative_ref(plan_dir, tc_path, &tc.id),
        relative_ref(plan_dir, st_path, &d.id),
        &d,
        &profiles,
        Objective { lambda },
    );
    let (plan, diags) = match made {
        Ok(x) => x,
        Err(Failure(diags)) => {
            out.diags(st_path, &diags);
            return if diags.iter().any(|d| d.code == codes::E_INFEASIBLE) {
                EXIT_INFEASIBLE
            } else {
                EXIT_INVALID
            };
        }
    };
    out.diags(st_path, &diags);
    let bytes = specio::to_bytes(&plan);
    if let Err(e) = std::fs::write(plan_path, &bytes) {
        out.diag(plan_path, &Diagnostic::new(codes::E_REF, "", format!("cannot write plan: {e}")));
        return EXIT_INVALID;
    }
    let mut table = String::new();
    for (st, ri) in &plan.assignment {
        let cost = profiles.iter().find(|p| &p.id == ri).map_or(0.0, |p| p.cost);
        table.push_str(&format!("{st:<16} -> {ri:<16} cost {cost}\n"));
    }
    table.push_str(&format!("total cost {} (lambda {})\n", plan.total_cost, plan.lambda));
    out.say(&table);
    out.document(&bytes);
    EXIT_OK
}

fn stages_text(plan: &MappingPlan) -> String {
    let mut s = String::new();
    for (i, stage) in plan.stages.iter().enumerate() {
        let singles: Vec<&str> = stage
            .subtests
            .iter()
            .filter(|m| stage.group_of(m).is_none())
            .map(String::as_str)
            .collect();
        let mut parts: Vec<String> = singles.iter().map(|m| (*m).to_string()).collect();
        for g in &stage.groups {
            parts.push(format!("loop[{}]x{}", g.members.join(" "), g.max_iterations));
        }
        s.push_str(&format!("stage {i}: {}\n", parts.join(" ")));
    }
    s
}

fn cmd_plan(out: &mut Output<'_>, path: &Path) -> i32 {
    let Some(bundle) = take(out, path, load::read_plan(path)) else {
        return EXIT_INVALID;
    };
    let diags = mapping::validate_plan(&bundle.plan, &bundle.subtests);
    out.diags(path, &diags);
    if has_errors(&diags) {
        return EXIT_INVALID;
    }
    out.say(&stages_text(&bundle.plan));
    out.document(&specio::to_bytes(&bundle.plan));
    EXIT_OK
}

fn harness_failure(out: &mut Output<'_>, file: &Path, e: HarnessError) -> i32 {
    match e {
        HarnessError::Io(p, err) => {
            out.diag(&p, &Diagnostic::new(codes::E_EXECUTOR, "", format!("workspace I/O failed: {err}")));
            EXIT_EXECUTION
        }
        HarnessError::Failed(Failure(diags)) => {
            out.diags(file, &diags);
            let execution = diags
                .iter()
                .any(|d| d.code == codes::E_EXECUTOR || d.code == codes::E_MISSING_ARTIFACT);
            if execution {
                EXIT_EXECUTION
            } else {
                EXIT_INVALID
            }
        }
    }
}

fn cmd_run(out: &mut Output<'_>, path: &Path, ws_root: &Path, seed: Option<u64>, jobs: usize) -> i32 {
    let Some(bundle) = take(out, path, load::read_plan(path)) else {
        return EXIT_INVALID;
    };
    let mut diags = check_test_case(&bundle.test_case);
    if let Some(sc) = bundle.sc() {
        diags.extend(mapping::validate_subtest_set(&bundle.test_case, sc, &bundle.subtests, None));
    }
    diags.extend(mapping::validate_plan(&bundle.plan, &bundle.subtests));
    out.diags(path, &diags);
    if has_errors(&diags) {
        return EXIT_INVALID;
    }
    let ws = Workspace::new(ws_root);
    let staged = match ws.stage(&bundle, seed) {
        Ok(b) => b,
        Err(e) => return harness_failure(out, path, e),
    };
    let run = match harness::run_plan(&ws, &staged, jobs) {
        Ok(r) => r,
        Err(e) => return harness_failure(out, path, e),
    };
    out.diags(path, &run.diagnostics);
    let mut table = String::new();
    for r in &run.records {
        table.push_str(&format!("{:<16} {:<16} {}", r.subtest_id, r.ri_id, r.status.as_str()));
        if let Some(m) = &r.message {
            table.push_str(&format!(" ({m})"));
        }
        table.push('\n');
    }
    out.say(&table);
    let doc = ResultSet {
        id: format!("{}.run", staged.plan.id),
        records: run.records.clone(),
        ..Default::default()
    };
    out.document(&specio::to_bytes(&doc));
    if run.all_completed() {
        EXIT_OK
    } else {
        EXIT_EXECUTION
    }
}

fn pick_plan(out: &mut Output<'_>, ws: &Workspace, plan: Option<&str>) -> Result<String, i32> {
    if let Some(p) = plan {
        return Ok(p.to_string());
    }
    let plans = ws.plans();
    match plans.as_slice() {
        [one] => Ok(one.clone()),
        [] => {
            out.diag(
                ws.root(),
                &Diagnostic::new(codes::E_REF, "", "workspace holds no plan; run one first"),
            );
            Err(EXIT_INVALID)
        }
        many => {
            let _ = writeln!(out.stderr, "workspace holds several plans ({}); pick one with --plan", many.join(", "));
            Err(EXIT_USAGE)
        }
    }
}

struct SweepSelection {
    subtest: Option<String>,
    variability: Option<String>,
    quality: Option<String>,
    mode: SweepMode,
    grid_points: u32,
    tolerance: f64,
}

fn cmd_sweep(out: &mut Output<'_>, ws_root: &Path, plan: Option<&str>, sel: &SweepSelection) -> i32 {
    let ws = Workspace::new(ws_root);
    let plan_id = match pick_plan(out, &ws, plan) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let plan_file = ws.plan_dir(&plan_id).join(harness::PLAN_FILE);
    let Some(bundle) = take(out, &plan_file, ws.load(&plan_id)) else {
        return EXIT_INVALID;
    };

    let mut jobs = Vec::new();
    for st in &bundle.subtests.subtests {
        if sel.subtest.as_ref().is_some_and(|s| s != &st.id) {
            continue;
        }
        let c = &st.scope.criteria;
        for v in &c.variability {
            if sel.variability.as_ref().is_some_and(|x| x != &v.id) {
                continue;
            }
            for q in &c.quality {
                if sel.quality.as_ref().is_some_and(|x| x != &q.id) {
                    continue;
                }
                jobs.push((
                    st.id.clone(),
                    SweepRequest {
                        variability_id: v.id.clone(),
                        quality_id: q.id.clone(),
                        mode: sel.mode,
                        grid_points: sel.grid_points,
                        tolerance: sel.tolerance,
                    },
                ));
            }
        }
    }
    if jobs.is_empty() {
        out.diag(
            &plan_file,
            &Diagnostic::new(codes::E_SWEEP, "", "no sub-test matches the sweep selection"),
        );
        return EXIT_INVALID;
    }

    let mut records = Vec::new();
    for (st, req) in &jobs {
        match harness::sweep(&ws, &bundle, st, req) {
            Ok((rec, diags)) => {
                out.diags(&plan_file, &diags);
                let boundary = rec.boundary.map_or("none".to_string(), |b| b.to_string());
                out.say(&format!(
                    "{st} {} vs {}: {} samples, boundary {boundary}\n",
                    req.variability_id,
                    req.quality_id,
                    rec.samples.len()
                ));
                records.push(rec);
            }
            Err(e) => return harness_failure(out, &plan_file, e),
        }
    }
    let doc = ResultSet {
        id: format!("{plan_id}.sweeps"),
        characterizations: records,
        ..Default::default()
    };
    out.document(&specio::to_bytes(&doc));
    EXIT_OK
}

fn cmd_report(out: &mut Output<'_>, ws_root: &Path, plan: Option<&str>) -> i32 {
    let ws = Workspace::new(ws_root);
    let plan_id = match pick_plan(out, &ws, plan) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let plan_file = ws.plan_dir(&plan_id).join(harness::PLAN_FILE);
    let Some(bundle) = take(out, &plan_file, ws.load(&plan_id)) else {
        return EXIT_INVALID;
    };
    let report = match harness::report(&ws, &bundle) {
        Ok(r) => r,
        Err(e) => return harness_failure(out, &plan_file, e),
    };
    out.diags(&plan_file, &report.diagnostics);
    out.say(&report.text);
    out.document(&specio::to_bytes(&report.result_set));
    match report.verdict().and_then(|v| v.overall.as_ref()) {
        None => EXIT_EXECUTION,
        Some(Overall::Verdict(Outcome::Fail)) => EXIT_QUALITY_FAIL,
        Some(_) => EXIT_OK,
    }
}
