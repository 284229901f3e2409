//! Assembling holistic criteria from sub-test results.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::diag::{codes, Diagnostic, Failure};
use crate::expr::parse_expression;
use crate::model::*;

/// Target values from [`combine`]; `None` marks an unevaluable target.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CombinedValues {
    pub values: BTreeMap<Id, Option<f64>>,
    pub provenance: BTreeMap<Id, Vec<Id>>,
    pub diagnostics: Vec<Diagnostic>,
}

impl CombinedValues {
    pub fn complete(&self) -> bool {
        self.values.values().all(Option::is_some)
    }
}

/// Evaluates every target's combination over the records. A target whose
/// expression references a missing or failed record is unevaluable.
pub fn combine(targets: &[TargetCriterion], records: &[ResultRecord]) -> Result<CombinedValues, Failure> {
    let by_subtest: BTreeMap<&str, &ResultRecord> =
        records.iter().map(|r| (r.subtest_id.as_str(), r)).collect();
    let mut out = CombinedValues::default();
    let mut errors = Vec::new();

    for (i, t) in targets.iter().enumerate() {
        let path = format!("/criteria/target/{i}/combination");
        let Some(text) = t.combination.as_deref() else {
            errors.push(Diagnostic::new(
                codes::E_EXPR_SYNTAX,
                path,
                format!("target '{}' has no combination expression", t.id),
            ));
            continue;
        };
        let e = match parse_expression(text) {
            Ok(e) => e,
            Err(err) => {
                errors.push(err.into_diagnostic(path));
                continue;
            }
        };
        let contributors: Vec<Id> = e.referenced_subtests().into_iter().map(String::from).collect();
        let unusable: Vec<&str> = contributors
            .iter()
            .map(String::as_str)
            .filter(|s| by_subtest.get(s).map_or(true, |r| !r.status.has_metrics()))
            .collect();
        if !unusable.is_empty() {
            out.diagnostics.push(Diagnostic::new(
                codes::W_INCOMPLETE,
                path,
                format!(
                    "target '{}' is unevaluable: no usable record for {}",
                    t.id,
                    unusable.join(", ")
                ),
            ));
            out.values.insert(t.id.clone(), None);
        } else {
            let lookup = |s: &str, m: &str| by_subtest.get(s).and_then(|r| r.metrics.get(m)).copied();
            match e.evaluate(lookup) {
                Ok(v) => {
                    out.values.insert(t.id.clone(), Some(v));
                }
                Err(err) => errors.push(err.into_diagnostic(path)),
            }
        }
        out.provenance.insert(t.id.clone(), contributors);
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(Failure(errors))
    }
}

/// Completes a verdict. Validation and verification pass iff every quality
/// predicate holds; characterization reports one sweep boundary per
/// variability attribute and no pass/fail.
pub fn evaluate(
    tc: &HolisticTestCase,
    values: &CombinedValues,
    sweeps: &[CharacterizationRecord],
) -> Result<(HolisticVerdict, Vec<Diagnostic>), Failure> {
    let characterization = tc.scope.poi.kind == PoiKind::Characterization;
    if characterization && sweeps.is_empty() {
        return Err(Failure::one(
            codes::E_POI_MISMATCH,
            "/poi/kind",
            "characterization test case evaluated without any sweep",
        ));
    }
    let mut diagnostics = values.diagnostics.clone();

    let mut quality = BTreeMap::new();
    for q in &tc.scope.criteria.quality {
        if let Some(Some(v)) = values.values.get(&q.target_ref) {
            quality.insert(q.id.clone(), Outcome::from_bool(q.passes(*v)));
        }
    }

    let complete = values.complete()
        && tc
            .scope
            .criteria
            .target
            .iter()
            .all(|t| values.values.contains_key(&t.id));
    let overall = if !complete {
        if !diagnostics.iter().any(|d| d.code == codes::W_INCOMPLETE) {
            diagnostics.push(Diagnostic::new(codes::W_INCOMPLETE, "/overall", "some targets are unevaluable"));
        }
        None
    } else if characterization {
        let summary = tc
            .scope
            .criteria
            .variability
            .iter()
            .map(|v| {
                let b = sweeps
                    .iter()
                    .filter(|s| s.variability_id == v.id || s.parameter == v.parameter)
                    .find_map(|s| s.boundary);
                (v.id.clone(), b)
            })
            .collect();
        Some(Overall::Characterization(summary))
    } else {
        let pass = quality.len() == tc.scope.criteria.quality.len()
            && quality.values().all(|o| *o == Outcome::Pass);
        Some(Overall::Verdict(Outcome::from_bool(pass)))
    };

    Ok((
        HolisticVerdict {
            test_case: tc.id.clone(),
            targets: values.values.clone(),
            quality,
            overall,
            provenance: values.provenance.clone(),
        },
        diagnostics,
    ))
}

/// Line-oriented report: one `TARGET` line per target, one `QUALITY` line
/// per evaluated quality attribute, `BOUNDARY` lines for characterization,
/// and a final `OVERALL` line.
pub fn render_report(tc: &HolisticTestCase, v: &HolisticVerdict) -> String {
    let mut s = String::new();
    for t in &tc.scope.criteria.target {
        match v.targets.get(&t.id) {
            Some(Some(x)) => writeln!(s, "TARGET {} {}", t.id, x),
            _ => writeln!(s, "TARGET {} UNEVALUABLE", t.id),
        }
        .ok();
    }
    for q in &tc.scope.criteria.quality {
        let Some(outcome) = v.quality.get(&q.id) else { continue };
        let value = v.targets.get(&q.target_ref).copied().flatten().unwrap_or(f64::NAN);
        writeln!(
            s,
            "QUALITY {} {} {} {} {}",
            q.id,
            if *outcome == Outcome::Pass { "PASS" } else { "FAIL" },
            value,
            q.predicate.symbol(),
            q.threshold.value
        )
        .ok();
    }
    match &v.overall {
        None => {
            s.push_str("OVERALL INCOMPLETE\n");
        }
        Some(Overall::Verdict(o)) => {
            writeln!(s, "OVERALL {}", if *o == Outcome::Pass { "PASS" } else { "FAIL" }).ok();
        }
        Some(Overall::Characterization(b)) => {
            for (var, boundary) in b {
                match boundary {
                    Some(x) => writeln!(s, "BOUNDARY {var} {x}"),
                    None => writeln!(s, "BOUNDARY {var} NONE"),
                }
                .ok();
            }
            s.push_str("OVERALL CHARACTERIZED\n");
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(st: &str, metrics: &[(&str, f64)], status: RecordStatus) -> ResultRecord {
        ResultRecord {
            subtest_id: st.into(),
            ri_id: "lab".into(),
            metrics: metrics.iter().map(|(k, v)| ((*k).into(), *v)).collect(),
            artifacts: BTreeMap::new(),
            status,
            message: None,
        }
    }

    fn target(id: &str, expr: &str) -> TargetCriterion {
        TargetCriterion {
            id: id.into(),
            metric: id.into(),
            description: String::new(),
            combination: Some(expr.into()),
        }
    }

    #[test]
    fn identity_of_zero() {
        let recs = [record("st2", &[("tracking_rmse", 0.0)], RecordStatus::Completed)];
        let c = combine(&[target("q", "st2.tracking_rmse")], &recs).unwrap();
        assert_eq!(c.values["q"], Some(0.0));
        assert_eq!(c.provenance["q"], ["st2"]);
    }

    #[test]
    fn mean_of_two() {
        let recs = [
            record("a", &[("m", 2.0)], RecordStatus::Completed),
            record("b", &[("m", 4.0)], RecordStatus::Completed),
        ];
        let c = combine(&[target("q", "mean(a.m, b.m)")], &recs).unwrap();
        assert_eq!(c.values["q"], Some(3.0));
    }

    #[test]
    fn failed_record_is_unevaluable() {
        let recs = [record("a", &[], RecordStatus::Failed)];
        let c = combine(&[target("q", "a.m")], &recs).unwrap();
        assert_eq!(c.values["q"], None);
        assert_eq!(c.diagnostics[0].code, codes::W_INCOMPLETE);
    }

    #[test]
    fn unknown_metric_in_completed_record() {
        let recs = [record("a", &[("m", 1.0)], RecordStatus::Completed)];
        let e = combine(&[target("q", "a.other")], &recs).unwrap_err();
        assert!(e.has_code(codes::E_EXPR_REF));
    }
}
