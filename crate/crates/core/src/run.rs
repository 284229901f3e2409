//! Pure sub-test execution and characterization sweeps. Persistence and
//! scheduling are left to the caller.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::diag::{codes, Diagnostic, Failure};
use crate::exec::{self, ExecutionOutput};
use crate::model::*;

/// Outcome of one successful sub-test run.
#[derive(Debug, Clone, PartialEq)]
pub struct SubtestRun {
    pub metrics: BTreeMap<Id, f64>,
    /// One artifact per declared produced type, in type order.
    pub artifacts: Vec<Artifact>,
}

/// Executes `st` once. On the first iteration of an iteration group,
/// iterative consumed ports may be unfed.
pub fn run_subtest(
    st: &SubTest,
    inputs: &[Artifact],
    overrides: &Attributes,
    seed_override: Option<u64>,
    iteration: u32,
) -> Result<SubtestRun, Failure> {
    let mut missing = Vec::new();
    for (i, port) in st.interfaces.iter().enumerate() {
        if port.direction != PortDirection::Consumes {
            continue;
        }
        if port.iterative && iteration == 0 {
            continue;
        }
        if !inputs.iter().any(|a| a.artifact_type == port.artifact_type) {
            missing.push(Diagnostic::new(
                codes::E_MISSING_ARTIFACT,
                format!("/interfaces/{i}"),
                format!(
                    "sub-test '{}' needs a '{}' artifact from '{}'",
                    st.id, port.artifact_type, port.peer
                ),
            ));
        }
    }
    if !missing.is_empty() {
        return Err(Failure(missing));
    }

    let ExecutionOutput { metrics, mut artifacts } =
        exec::execute(&st.executor, inputs, overrides, seed_override)?;

    let mut errs = Vec::new();
    for t in &st.scope.criteria.target {
        if !metrics.contains_key(&t.metric) {
            errs.push(Diagnostic::new(
                codes::E_EXECUTOR,
                "/criteria/target",
                format!("executor did not report metric '{}' of sub-test '{}'", t.metric, st.id),
            ));
        }
    }
    let produced: BTreeSet<&str> = st
        .interfaces
        .iter()
        .filter(|p| p.direction == PortDirection::Produces)
        .map(|p| p.artifact_type.as_str())
        .collect();
    let mut out_artifacts = Vec::new();
    for atype in produced {
        match artifacts.remove(atype) {
            Some(payload) => out_artifacts.push(Artifact {
                artifact_type: atype.into(),
                payload,
                producer: st.id.clone(),
                iteration,
            }),
            None => errs.push(Diagnostic::new(
                codes::E_EXECUTOR,
                "/interfaces",
                format!("executor did not produce declared artifact '{atype}' of sub-test '{}'", st.id),
            )),
        }
    }
    if !errs.is_empty() {
        return Err(Failure(errs));
    }
    Ok(SubtestRun {
        metrics,
        artifacts: out_artifacts,
    })
}

/// Number of scan points bisection starts from.
pub const BISECTION_SCAN_POINTS: u32 = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub samples: Vec<SweepSample>,
    pub boundary: Option<f64>,
    pub diagnostics: Vec<Diagnostic>,
}

/// `k`-th of `n` evenly spaced points over `[lo, hi]`, endpoints exact.
pub fn grid_point(lo: f64, hi: f64, k: u32, n: u32) -> f64 {
    if k == 0 {
        lo
    } else if k + 1 == n {
        hi
    } else {
        lo + (hi - lo) * f64::from(k) / f64::from(n - 1)
    }
}

/// Locates where `eval`'s pass/fail outcome changes over `[lo, hi]`.
///
/// Grid mode samples `grid_points` evenly. Bisection mode scans
/// [`BISECTION_SCAN_POINTS`] points, then halves the first adjacent pair with
/// differing outcomes until it is no wider than `tolerance`. The boundary is
/// the midpoint of the final bracket.
pub fn sweep_interval<F>(
    lo: f64,
    hi: f64,
    mode: SweepMode,
    grid_points: u32,
    tolerance: f64,
    mut eval: F,
) -> Result<SweepOutcome, Failure>
where
    F: FnMut(f64) -> Result<(BTreeMap<Id, f64>, bool), Failure>,
{
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Failure::one(codes::E_SWEEP, "/range", format!("invalid range [{lo}, {hi}]")));
    }
    match mode {
        SweepMode::Grid if grid_points < 2 => {
            return Err(Failure::one(codes::E_SWEEP, "/grid_points", "grid_points must be >= 2"));
        }
        SweepMode::Bisection if !(tolerance > 0.0 && tolerance.is_finite()) => {
            return Err(Failure::one(codes::E_SWEEP, "/tolerance", "tolerance must be > 0"));
        }
        _ => {}
    }

    let mut samples = Vec::new();
    let mut sample = |v: f64, samples: &mut Vec<SweepSample>| -> Result<bool, Failure> {
        let (metrics, pass) = eval(v)?;
        samples.push(SweepSample {
            value: v,
            metrics,
            quality_pass: pass,
        });
        Ok(pass)
    };

    if lo == hi {
        sample(lo, &mut samples)?;
        return Ok(SweepOutcome {
            samples,
            boundary: None,
            diagnostics: alloc::vec![no_crossing("degenerate range")],
        });
    }

    let n = match mode {
        SweepMode::Grid => grid_points,
        SweepMode::Bisection => BISECTION_SCAN_POINTS,
    };
    let mut scan = Vec::with_capacity(n as usize);
    for k in 0..n {
        let v = grid_point(lo, hi, k, n);
        scan.push((v, sample(v, &mut samples)?));
    }
    let Some(w) = scan.windows(2).find(|w| w[0].1 != w[1].1) else {
        let why = if scan[0].1 { "all samples pass" } else { "all samples fail" };
        return Ok(SweepOutcome {
            samples,
            boundary: None,
            diagnostics: alloc::vec![no_crossing(why)],
        });
    };
    let (mut a, a_pass) = w[0];
    let mut b = w[1].0;
    if mode == SweepMode::Bisection {
        while b - a > tolerance {
            let mid = a + (b - a) / 2.0;
            if mid <= a || mid >= b {
                break;
            }
            if sample(mid, &mut samples)? == a_pass {
                a = mid;
            } else {
                b = mid;
            }
        }
    }
    Ok(SweepOutcome {
        samples,
        boundary: Some(a + (b - a) / 2.0),
        diagnostics: Vec::new(),
    })
}

fn no_crossing(why: &str) -> Diagnostic {
    Diagnostic::new(codes::W_NO_CROSSING, "/boundary", format!("no pass/fail crossing: {why}"))
}

/// Sweeps one variability attribute of a sub-test against one of its
/// quality attributes. The varied parameter is the executor parameter named
/// by the last segment of the attribute's path.
pub fn sweep_subtest(
    st: &SubTest,
    req: &SweepRequest,
    inputs: &[Artifact],
    seed_override: Option<u64>,
) -> Result<(CharacterizationRecord, Vec<Diagnostic>), Failure> {
    let criteria = &st.scope.criteria;
    let var = criteria.variability(&req.variability_id).ok_or_else(|| {
        Failure::one(
            codes::E_REF,
            "/variability_id",
            format!("sub-test '{}' has no variability attribute '{}'", st.id, req.variability_id),
        )
    })?;
    let quality = criteria.quality(&req.quality_id).ok_or_else(|| {
        Failure::one(
            codes::E_REF,
            "/quality_id",
            format!("sub-test '{}' has no quality attribute '{}'", st.id, req.quality_id),
        )
    })?;
    let target = criteria.target(&quality.target_ref).ok_or_else(|| {
        Failure::one(codes::E_REF, "/quality_id", format!("quality '{}' has no target", quality.id))
    })?;
    let (lo, hi) = match var.range {
        VariabilityRange::Interval { lo, hi } => (lo, hi),
        VariabilityRange::Enumerated(_) => {
            return Err(Failure::one(
                codes::E_NONNUMERIC_RANGE,
                "/range",
                format!("variability '{}' has an enumerated range", var.id),
            ))
        }
    };
    let param: String = var
        .parameter
        .rsplit('.')
        .next()
        .unwrap_or(&var.parameter)
        .into();

    let outcome = sweep_interval(lo, hi, req.mode, req.grid_points, req.tolerance, |v| {
        let mut overrides = Attributes::new();
        overrides.insert(param.clone(), Scalar::num(v));
        let run = run_subtest(st, inputs, &overrides, seed_override, 0)?;
        let value = run.metrics.get(&target.metric).copied().ok_or_else(|| {
            Failure::one(codes::E_EXECUTOR, "/metrics", format!("metric '{}' missing", target.metric))
        })?;
        Ok((run.metrics, quality.passes(value)))
    })?;

    Ok((
        CharacterizationRecord {
            subtest_id: st.id.clone(),
            variability_id: var.id.clone(),
            parameter: var.parameter.clone(),
            quality_id: quality.id.clone(),
            mode: req.mode,
            samples: outcome.samples,
            boundary: outcome.boundary,
        },
        outcome.diagnostics,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step_at(x0: f64) -> impl FnMut(f64) -> Result<(BTreeMap<Id, f64>, bool), Failure> {
        move |v| Ok((BTreeMap::new(), v < x0))
    }

    #[test]
    fn bisection_brackets_step() {
        let out = sweep_interval(0.0, 1.0, SweepMode::Bisection, 0, 1e-3, step_at(0.3141)).unwrap();
        let b = out.boundary.unwrap();
        assert!((b - 0.3141).abs() <= 1e-3, "{b}");
        assert!(out.diagnostics.is_empty());
        assert_eq!(out.samples[..8].iter().filter(|s| s.quality_pass).count(), 3);
    }

    #[test]
    fn grid_mode_spacing() {
        let out = sweep_interval(0.0, 1.0, SweepMode::Grid, 5, 0.0, step_at(0.6)).unwrap();
        let values: Vec<f64> = out.samples.iter().map(|s| s.value).collect();
        assert_eq!(values, [0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(out.boundary, Some(0.625));
    }

    #[test]
    fn no_crossing_cases() {
        let out = sweep_interval(0.0, 1.0, SweepMode::Bisection, 0, 1e-3, step_at(f64::INFINITY)).unwrap();
        assert_eq!(out.boundary, None);
        assert_eq!(out.diagnostics[0].code, codes::W_NO_CROSSING);
        let out = sweep_interval(0.0, 1.0, SweepMode::Bisection, 0, 1e-3, step_at(-1.0)).unwrap();
        assert_eq!(out.boundary, None);
    }

    #[test]
    fn degenerate_range_single_sample() {
        let out = sweep_interval(0.3, 0.3, SweepMode::Bisection, 0, 1e-3, step_at(0.5)).unwrap();
        assert_eq!(out.samples.len(), 1);
        assert_eq!(out.boundary, None);
    }

    #[test]
    fn rejects_bad_requests() {
        assert!(sweep_interval(1.0, 0.0, SweepMode::Grid, 4, 0.0, step_at(0.5)).is_err());
        assert!(sweep_interval(0.0, 1.0, SweepMode::Grid, 1, 0.0, step_at(0.5)).is_err());
        assert!(sweep_interval(0.0, 1.0, SweepMode::Bisection, 0, 0.0, step_at(0.5)).is_err());
    }
}
