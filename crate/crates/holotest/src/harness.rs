//! Executing plans against a workspace directory.
//!
//! Layout under the workspace root:
//!
//! ```text
//! <plan-id>/plan.holo.json            copy of the plan, refs rewritten
//! <plan-id>/test_case.holo.json       configuration inlined
//! <plan-id>/subtest_set.holo.json
//! <plan-id>/<subtest>/<iteration>/result.holo.json
//! <plan-id>/<subtest>/<iteration>/artifacts/<type>.holo.json
//! <plan-id>/<subtest>/sweeps/<variability>.<quality>.holo.json
//! <plan-id>/verdict.holo.json, report.txt
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use holotest_core::combiner;
use holotest_core::diag::{codes, Diagnostic, Failure};
use holotest_core::model::*;
use holotest_core::run;

use crate::load::{self, PlanBundle};
use crate::specio;

pub const PLAN_FILE: &str = "plan.holo.json";
pub const TEST_CASE_FILE: &str = "test_case.holo.json";
pub const SUBTEST_SET_FILE: &str = "subtest_set.holo.json";
pub const RESULT_FILE: &str = "result.holo.json";
pub const VERDICT_FILE: &str = "verdict.holo.json";
pub const REPORT_FILE: &str = "report.txt";
pub const ARTIFACT_DIR: &str = "artifacts";
pub const SWEEP_DIR: &str = "sweeps";

#[derive(Debug)]
pub enum HarnessError {
    Io(PathBuf, io::Error),
    Failed(Failure),
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            HarnessError::Failed(x) => write!(f, "{x}"),
        }
    }
}

impl std::error::Error for HarnessError {}

impl From<Failure> for HarnessError {
    fn from(f: Failure) -> Self {
        HarnessError::Failed(f)
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::Io(dir.into(), e))?;
    }
    std::fs::write(path, bytes).map_err(|e| HarnessError::Io(path.into(), e))
}

#[derive(Debug, Clone)]
pub struct Workspace {
    root: PathBuf,
}

impl Workspace {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Workspace { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn plan_dir(&self, plan: &str) -> PathBuf {
        self.root.join(plan)
    }

    pub fn run_dir(&self, plan: &str, subtest: &str, iteration: u32) -> PathBuf {
        self.plan_dir(plan).join(subtest).join(iteration.to_string())
    }

    pub fn sweep_file(&self, plan: &str, subtest: &str, variability: &str, quality: &str) -> PathBuf {
        self.plan_dir(plan)
            .join(subtest)
            .join(SWEEP_DIR)
            .join(format!("{variability}.{quality}.holo.json"))
    }

    /// Plan ids present in the workspace.
    pub fn plans(&self) -> Vec<String> {
        let mut out: Vec<String> = std::fs::read_dir(&self.root)
            .into_iter()
            .flatten()
            .flatten()
            .filter(|e| e.path().join(PLAN_FILE).is_file())
            .filter_map(|e| e.file_name().into_string().ok())
            .collect();
        out.sort();
        out
    }

    /// Copies the bundle into `<plan-id>/`, replacing earlier contents.
    /// `seed` replaces every executor seed in the copy.
    pub fn stage(&self, bundle: &PlanBundle, seed: Option<u64>) -> Result<PlanBundle, HarnessError> {
        let dir = self.plan_dir(&bundle.plan.id);
        if dir.join(PLAN_FILE).is_file() {
            std::fs::remove_dir_all(&dir).map_err(|e| HarnessError::Io(dir.clone(), e))?;
        }
        let mut staged = bundle.clone();
        staged.plan.test_case = DocRef {
            path: TEST_CASE_FILE.into(),
            id: staged.test_case.id.clone(),
        };
        staged.plan.subtest_set = DocRef {
            path: SUBTEST_SET_FILE.into(),
            id: staged.subtests.id.clone(),
        };
        if let Some(s) = seed {
            for st in &mut staged.subtests.subtests {
                st.executor.seed = Some(s);
            }
        }
        write_file(&dir.join(TEST_CASE_FILE), &specio::to_bytes(&staged.test_case))?;
        write_file(&dir.join(SUBTEST_SET_FILE), &specio::to_bytes(&staged.subtests))?;
        write_file(&dir.join(PLAN_FILE), &specio::to_bytes(&staged.plan))?;
        Ok(staged)
    }

    pub fn load(&self, plan: &str) -> Result<(PlanBundle, Vec<Diagnostic>), Vec<Diagnostic>> {
        load::read_plan(&self.plan_dir(plan).join(PLAN_FILE))
    }

    fn write_record(&self, plan: &str, iteration: u32, record: &ResultRecord) -> Result<(), HarnessError> {
        let doc = ResultSet {
            id: format!("{plan}.{}.{iteration}", record.subtest_id),
            records: vec![record.clone()],
            ..Default::default()
        };
        let path = self.run_dir(plan, &record.subtest_id, iteration).join(RESULT_FILE);
        write_file(&path, &specio::to_bytes(&doc))
    }

    /// Highest iteration recorded for `subtest`.
    pub fn last_iteration(&self, plan: &str, subtest: &str) -> Option<u32> {
        std::fs::read_dir(self.plan_dir(plan).join(subtest))
            .ok()?
            .flatten()
            .filter(|e| e.path().join(RESULT_FILE).is_file())
            .filter_map(|e| e.file_name().to_str()?.parse::<u32>().ok())
            .max()
    }

    pub fn read_record(&self, plan: &str, subtest: &str) -> Result<Option<ResultRecord>, Vec<Diagnostic>> {
        let Some(it) = self.last_iteration(plan, subtest) else {
            return Ok(None);
        };
        let path = self.run_dir(plan, subtest, it).join(RESULT_FILE);
        let (set, _) = load::read_as::<ResultSet>(&path)?;
        Ok(set.records.into_iter().find(|r| r.subtest_id == subtest))
    }

    /// Artifacts of the last recorded run of `subtest`.
    pub fn read_artifacts(&self, plan: &str, subtest: &str) -> Result<Vec<Artifact>, Vec<Diagnostic>> {
        let Some(record) = self.read_record(plan, subtest)? else {
            return Ok(Vec::new());
        };
        let it = self.last_iteration(plan, subtest).unwrap_or(0);
        let dir = self.run_dir(plan, subtest, it);
        let mut out = Vec::new();
        for rel in record.artifacts.values() {
            out.push(specio::parse_artifact(&load::read_bytes(&dir.join(rel))?)?);
        }
        Ok(out)
    }

    pub fn read_sweeps(&self, plan: &str) -> Result<Vec<CharacterizationRecord>, Vec<Diagnostic>> {
        let mut files = Vec::new();
        for st in std::fs::read_dir(self.plan_dir(plan)).into_iter().flatten().flatten() {
            for f in std::fs::read_dir(st.path().join(SWEEP_DIR)).into_iter().flatten().flatten() {
                files.push(f.path());
            }
        }
        files.sort();
        let mut out = Vec::new();
        for f in files {
            let (set, _) = load::read_as::<ResultSet>(&f)?;
            out.extend(set.characterizations);
        }
        Ok(out)
    }
}

fn artifact_file(atype: &str) -> String {
    format!("{ARTIFACT_DIR}/{atype}.holo.json")
}

fn failure_message(f: &Failure) -> String {
    f.0.iter().map(|d| format!("{}: {}", d.code, d.message)).collect::<Vec<_>>().join("; ")
}

/// One executed sub-test.
#[derive(Debug, Clone, PartialEq)]
pub struct Executed {
    pub record: ResultRecord,
    pub artifacts: Vec<Artifact>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Runs `st` once and persists its record and artifacts under
/// `<plan>/<st>/<iteration>/`. Execution errors yield a failed record.
pub fn execute_subtest(
    ws: &Workspace,
    plan: &str,
    ri_id: &str,
    st: &SubTest,
    inputs: &[Artifact],
    iteration: u32,
) -> Result<Executed, HarnessError> {
    let dir = ws.run_dir(plan, &st.id, iteration);
    let out = match run::run_subtest(st, inputs, &Attributes::new(), None, iteration) {
        Ok(r) => {
            let mut files = BTreeMap::new();
            for a in &r.artifacts {
                let rel = artifact_file(&a.artifact_type);
                write_file(&dir.join(&rel), &specio::artifact_to_bytes(a))?;
                files.insert(a.artifact_type.clone(), rel);
            }
            Executed {
                record: ResultRecord {
                    subtest_id: st.id.clone(),
                    ri_id: ri_id.into(),
                    metrics: r.metrics,
                    artifacts: files,
                    status: RecordStatus::Completed,
                    message: None,
                },
                artifacts: r.artifacts,
                diagnostics: Vec::new(),
            }
        }
        Err(f) => Executed {
            record: failed_record(st, ri_id, failure_message(&f)),
            artifacts: Vec::new(),
            diagnostics: f.0,
        },
    };
    ws.write_record(plan, iteration, &out.record)?;
    Ok(out)
}

fn failed_record(st: &SubTest, ri_id: &str, message: String) -> ResultRecord {
    ResultRecord {
        subtest_id: st.id.clone(),
        ri_id: ri_id.into(),
        metrics: BTreeMap::new(),
        artifacts: BTreeMap::new(),
        status: RecordStatus::Failed,
        message: Some(message),
    }
}

/// Runs one sub-test in isolation; a failed run is an error.
pub fn run_subtest(
    ws: &Workspace,
    plan: &str,
    ri_id: &str,
    st: &SubTest,
    inputs: &[Artifact],
    iteration: u32,
) -> Result<ResultRecord, HarnessError> {
    let ex = execute_subtest(ws, plan, ri_id, st, inputs, iteration)?;
    if ex.record.status == RecordStatus::Failed {
        return Err(HarnessError::Failed(Failure(ex.diagnostics)));
    }
    Ok(ex.record)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlanRun {
    /// One record per sub-test, in stage order.
    pub records: Vec<ResultRecord>,
    pub diagnostics: Vec<Diagnostic>,
}

impl PlanRun {
    pub fn all_completed(&self) -> bool {
        self.records.iter().all(|r| r.status != RecordStatus::Failed)
    }
}

enum Unit<'a> {
    Single(&'a SubTest),
    Group(&'a IterationGroup, Vec<&'a SubTest>),
}

impl Unit<'_> {
    fn members(&self) -> Vec<&SubTest> {
        match self {
            Unit::Single(s) => vec![*s],
            Unit::Group(_, m) => m.clone(),
        }
    }
}

type UnitOutput = Vec<(Id, Executed)>;

/// Executes a staged bundle. Units of one stage share no edges, so up to
/// `jobs` of them run at once; results are merged in plan order.
pub fn run_plan(ws: &Workspace, bundle: &PlanBundle, jobs: usize) -> Result<PlanRun, HarnessError> {
    let plan = &bundle.plan;
    let d = &bundle.subtests;
    let mut diags = holotest_core::mapping::validate_plan(plan, d);
    if holotest_core::diag::has_errors(&diags) {
        return Err(HarnessError::Failed(Failure(diags)));
    }

    let mut produced: BTreeMap<Id, Vec<Artifact>> = BTreeMap::new();
    let mut failed: BTreeSet<Id> = BTreeSet::new();
    let mut records: Vec<ResultRecord> = Vec::new();

    for stage in &plan.stages {
        let mut units = Vec::new();
        for g in &stage.groups {
            let members = g.members.iter().filter_map(|m| d.subtest(m)).collect();
            units.push(Unit::Group(g, members));
        }
        for id in &stage.subtests {
            if stage.group_of(id).is_none() {
                if let Some(st) = d.subtest(id) {
                    units.push(Unit::Single(st));
                }
            }
        }

        let mut runnable = Vec::new();
        for unit in units {
            let members = unit.members();
            let ids: BTreeSet<&str> = members.iter().map(|s| s.id.as_str()).collect();
            let upstream = plan
                .dag
                .iter()
                .filter(|e| ids.contains(e.consumer.as_str()) && !ids.contains(e.producer.as_str()))
                .find(|e| failed.contains(&e.producer));
            match upstream {
                Some(e) => {
                    for st in members {
                        let rec = failed_record(st, ri_of(plan, &st.id), format!("upstream sub-test '{}' failed", e.producer));
                        ws.write_record(&plan.id, 0, &rec)?;
                        failed.insert(st.id.clone());
                        records.push(rec);
                    }
                }
                None => runnable.push(unit),
            }
        }

        let outputs = run_units(ws, plan, &runnable, &produced, jobs)?;
        for out in outputs {
            for (id, ex) in out {
                if ex.record.status == RecordStatus::Failed {
                    failed.insert(id.clone());
                }
                diags.extend(ex.diagnostics);
                produced.insert(id, ex.artifacts);
                records.push(ex.record);
            }
        }
    }
    let order: BTreeMap<&str, usize> = plan
        .stages
        .iter()
        .flat_map(|s| s.subtests.iter())
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    records.sort_by_key(|r| order.get(r.subtest_id.as_str()).copied().unwrap_or(usize::MAX));
    Ok(PlanRun {
        records,
        diagnostics: diags,
    })
}

fn ri_of<'a>(plan: &'a MappingPlan, st: &str) -> &'a str {
    plan.assignment.get(st).map_or("", String::as_str)
}

fn run_units(
    ws: &Workspace,
    plan: &MappingPlan,
    units: &[Unit<'_>],
    produced: &BTreeMap<Id, Vec<Artifact>>,
    jobs: usize,
) -> Result<Vec<UnitOutput>, HarnessError> {
    let slots: Mutex<Vec<Option<Result<UnitOutput, HarnessError>>>> =
        Mutex::new(units.iter().map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let workers = jobs.clamp(1, units.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(unit) = units.get(i) else { break };
                let out = run_unit(ws, plan, unit, produced);
                slots.lock().expect("result slots")[i] = Some(out);
            });
        }
    });
    slots
        .into_inner()
        .expect("result slots")
        .into_iter()
        .map(|s| s.expect("every unit ran"))
        .collect()
}

fn external_inputs(plan: &MappingPlan, st: &SubTest, group: &BTreeSet<&str>, produced: &BTreeMap<Id, Vec<Artifact>>) -> Vec<Artifact> {
    let mut out = Vec::new();
    for e in plan.dag.iter().filter(|e| e.consumer == st.id && !group.contains(e.producer.as_str())) {
        if let Some(arts) = produced.get(&e.producer) {
            out.extend(arts.iter().filter(|a| a.artifact_type == e.artifact_type).cloned());
        }
    }
    out
}

fn run_unit(
    ws: &Workspace,
    plan: &MappingPlan,
    unit: &Unit<'_>,
    produced: &BTreeMap<Id, Vec<Artifact>>,
) -> Result<UnitOutput, HarnessError> {
    match unit {
        Unit::Single(st) => {
            let inputs = external_inputs(plan, st, &BTreeSet::new(), produced);
            let ex = execute_subtest(ws, &plan.id, ri_of(plan, &st.id), st, &inputs, 0)?;
            Ok(vec![(st.id.clone(), ex)])
        }
        Unit::Group(g, members) => run_group(ws, plan, g, members, produced),
    }
}

/// Iterates a group `max_iterations` times in member order. Iterative
/// edges deliver the producer's artifacts from the previous iteration.
fn run_group(
    ws: &Workspace,
    plan: &MappingPlan,
    g: &IterationGroup,
    members: &[&SubTest],
    produced: &BTreeMap<Id, Vec<Artifact>>,
) -> Result<UnitOutput, HarnessError> {
    let ids: BTreeSet<&str> = members.iter().map(|s| s.id.as_str()).collect();
    let mut current: BTreeMap<Id, Vec<Artifact>> = BTreeMap::new();
    let mut previous: BTreeMap<Id, Vec<Artifact>> = BTreeMap::new();
    let mut last: BTreeMap<Id, Executed> = BTreeMap::new();

    for k in 0..g.max_iterations {
        for st in members {
            let mut inputs = external_inputs(plan, st, &ids, produced);
            for e in plan.dag.iter().filter(|e| e.consumer == st.id && ids.contains(e.producer.as_str())) {
                let source = if e.iterative {
                    previous.get(&e.producer)
                } else {
                    current.get(&e.producer).or_else(|| previous.get(&e.producer))
                };
                if let Some(arts) = source {
                    inputs.extend(arts.iter().filter(|a| a.artifact_type == e.artifact_type).cloned());
                }
            }
            let ex = execute_subtest(ws, &plan.id, ri_of(plan, &st.id), st, &inputs, k)?;
            let failed = ex.record.status == RecordStatus::Failed;
            current.insert(st.id.clone(), ex.artifacts.clone());
            last.insert(st.id.clone(), ex);
            if failed {
                return finish_failed_group(ws, plan, members, &st.id, k, last);
            }
        }
        previous = std::mem::take(&mut current);
    }
    Ok(members
        .iter()
        .filter_map(|st| last.remove(&st.id).map(|ex| (st.id.clone(), ex)))
        .collect())
}

fn finish_failed_group(
    ws: &Workspace,
    plan: &MappingPlan,
    members: &[&SubTest],
    culprit: &str,
    iteration: u32,
    mut last: BTreeMap<Id, Executed>,
) -> Result<UnitOutput, HarnessError> {
    let mut out = Vec::new();
    for st in members {
        let ex = match last.remove(&st.id) {
            Some(ex) if st.id == culprit => ex,
            _ => {
                let rec = failed_record(
                    st,
                    ri_of(plan, &st.id),
                    format!("iteration group member '{culprit}' failed in iteration {iteration}"),
                );
                ws.write_record(&plan.id, iteration, &rec)?;
                Executed {
                    record: rec,
                    artifacts: Vec::new(),
                    diagnostics: Vec::new(),
                }
            }
        };
        out.push((st.id.clone(), ex));
    }
    Ok(out)
}

/// Inputs a sub-test consumes, read from its producers' last runs.
pub fn stored_inputs(ws: &Workspace, bundle: &PlanBundle, st: &SubTest) -> Result<Vec<Artifact>, Failure> {
    let plan = &bundle.plan;
    let mut inputs = Vec::new();
    let mut errs = Vec::new();
    for e in plan.dag.iter().filter(|e| e.consumer == st.id && !e.iterative) {
        let record = ws.read_record(&plan.id, &e.producer).map_err(Failure)?;
        match record {
            Some(r) if r.status != RecordStatus::Failed => {
                let arts = ws.read_artifacts(&plan.id, &e.producer).map_err(Failure)?;
                inputs.extend(arts.into_iter().filter(|a| a.artifact_type == e.artifact_type));
            }
            _ => errs.push(Diagnostic::new(
                codes::E_MISSING_ARTIFACT,
                format!("/{}", e.producer),
                format!("no completed run of '{}' provides '{}' to '{}'", e.producer, e.artifact_type, st.id),
            )),
        }
    }
    if errs.is_empty() {
        Ok(inputs)
    } else {
        Err(Failure(errs))
    }
}

/// Sweeps one variability attribute of a sub-test and persists the
/// characterization under `<plan>/<subtest>/sweeps/`.
pub fn sweep(
    ws: &Workspace,
    bundle: &PlanBundle,
    subtest: &str,
    req: &SweepRequest,
) -> Result<(CharacterizationRecord, Vec<Diagnostic>), HarnessError> {
    let st = bundle.subtests.subtest(subtest).ok_or_else(|| {
        Failure::one(codes::E_REF, "/subtest", format!("plan has no sub-test '{subtest}'"))
    })?;
    let inputs = stored_inputs(ws, bundle, st)?;
    let (rec, diags) = run::sweep_subtest(st, req, &inputs, None)?;
    let doc = ResultSet {
        id: format!("{}.{}.{}.{}", bundle.plan.id, st.id, req.variability_id, req.quality_id),
        characterizations: vec![rec.clone()],
        ..Default::default()
    };
    let path = ws.sweep_file(&bundle.plan.id, &st.id, &req.variability_id, &req.quality_id);
    write_file(&path, &specio::to_bytes(&doc))?;
    Ok((rec, diags))
}

/// Combined and evaluated results of a workspace plan.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub result_set: ResultSet,
    pub text: String,
    pub diagnostics: Vec<Diagnostic>,
}

impl Report {
    pub fn verdict(&self) -> Option<&HolisticVerdict> {
        self.result_set.verdict.as_ref()
    }
}

/// Combines the last records and all sweeps of a plan, then writes
/// `verdict.holo.json` and `report.txt`.
pub fn report(ws: &Workspace, bundle: &PlanBundle) -> Result<Report, HarnessError> {
    let plan_id = &bundle.plan.id;
    let mut records = Vec::new();
    for st in &bundle.subtests.subtests {
        if let Some(r) = ws.read_record(plan_id, &st.id).map_err(Failure)? {
            records.push(r);
        }
    }
    let sweeps = ws.read_sweeps(plan_id).map_err(Failure)?;
    let tc = &bundle.test_case;
    let values = combiner::combine(&tc.scope.criteria.target, &records)?;
    let (verdict, diagnostics) = combiner::evaluate(tc, &values, &sweeps)?;
    let text = combiner::render_report(tc, &verdict);
    let result_set = ResultSet {
        id: format!("{plan_id}.verdict"),
        records,
        characterizations: sweeps,
        verdict: Some(verdict),
    };
    let dir = ws.plan_dir(plan_id);
    write_file(&dir.join(VERDICT_FILE), &specio::to_bytes(&result_set))?;
    write_file(&dir.join(REPORT_FILE), text.as_bytes())?;
    Ok(Report {
        result_set,
        text,
        diagnostics,
    })
}
