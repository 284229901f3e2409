//! Built-in executors.
//!
//! * `scripted` replays a declared output table (stand-in for a laboratory
//!   run that happens outside software).
//! * `model_ict_disturbance` turns link availability and latency into a
//!   `model_parameters` artifact.
//! * `model_agc_tracking` simulates an aggregator dispatching an AGC
//!   reference to `N` households over a lossy, delayed link.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::diag::{codes, Diagnostic, Failure};
use crate::model::*;

pub const MODEL_PARAMETERS: &str = "model_parameters";

/// What an executor hands back before the harness checks it against the
/// sub-test's declarations.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExecutionOutput {
    pub metrics: BTreeMap<Id, f64>,
    pub artifacts: BTreeMap<Id, Attributes>,
}

/// Uniform draw in `[0, 1)` addressed by `(household, step)`. The same
/// index gives the same draw for every loss probability.
pub fn uniform_draw(seed: u64, household: u64, step: u64) -> f64 {
    let h = mix64(mix64(seed ^ mix64(household.wrapping_add(0x9e37_79b9_7f4a_7c15))) ^ step);
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

// splitmix64 finalizer
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceShape {
    Sine,
    Square,
}

impl ReferenceShape {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sine" => Some(ReferenceShape::Sine),
            "square" => Some(ReferenceShape::Square),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgcConfig {
    pub n_households: u32,
    pub capacity_kw: f64,
    pub shape: ReferenceShape,
    pub amplitude_kw: f64,
    pub period_steps: u32,
    pub steps: u32,
    pub packet_loss: f64,
    pub latency_steps: u32,
    pub seed: u64,
}

impl AgcConfig {
    pub fn reference(&self, t: u32) -> f64 {
        let a = self.amplitude_kw;
        match self.shape {
            ReferenceShape::Sine => {
                let phase = 2.0 * core::f64::consts::PI * f64::from(t) / f64::from(self.period_steps);
                let v = a * libm::sin(phase);
                if v > 0.0 {
                    v
                } else {
                    0.0
                }
            }
            ReferenceShape::Square => {
                if f64::from(t % self.period_steps) < f64::from(self.period_steps) / 2.0 {
                    a
                } else {
                    0.0
                }
            }
        }
    }

    /// Whether household `i` receives the setpoint sent at step `t`.
    pub fn delivered(&self, household: u32, t: u32) -> bool {
        uniform_draw(self.seed, u64::from(household), u64::from(t)) >= self.packet_loss
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgcTrace {
    pub reference: Vec<f64>,
    pub output: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgcMetrics {
    pub tracking_rmse: f64,
    pub tracking_max: f64,
    pub tracking_rmse_norm: f64,
}

/// Runs the tracking model.
///
/// Households holding the setpoint derived from the same reference step are
/// summed as one group, contributing `(k / N) * r` while unclamped, so a
/// fully synchronised fleet reproduces the reference bit-exactly.
pub fn simulate_agc(cfg: &AgcConfig) -> AgcTrace {
    let n = cfg.n_households;
    let nf = f64::from(n);
    let fleet_capacity = nf * cfg.capacity_kw;
    let reference: Vec<f64> = (0..cfg.steps).map(|t| cfg.reference(t)).collect();

    // held[i]: reference step whose setpoint household i applies; None = 0 kW.
    let mut held: Vec<Option<u32>> = alloc::vec![None; n as usize];
    let mut groups: BTreeMap<Option<u32>, u32> = BTreeMap::new();
    groups.insert(None, n);
    let mut output = Vec::with_capacity(cfg.steps as usize);

    for t in 0..cfg.steps {
        if let Some(sent) = t.checked_sub(cfg.latency_steps) {
            for (i, h) in held.iter_mut().enumerate() {
                if cfg.delivered(i as u32, sent) {
                    if let Some(k) = groups.get_mut(h) {
                        *k -= 1;
                    }
                    *h = Some(sent);
                    *groups.entry(*h).or_insert(0) += 1;
                }
            }
            groups.retain(|_, k| *k > 0);
        }
        let mut p_out = 0.0;
        for (step, &k) in &groups {
            let Some(step) = step else { continue };
            let r = reference[*step as usize];
            p_out += if r <= fleet_capacity {
                (f64::from(k) / nf) * r
            } else {
                f64::from(k) * cfg.capacity_kw
            };
        }
        output.push(p_out);
    }
    AgcTrace { reference, output }
}

impl AgcTrace {
    pub fn metrics(&self, amplitude_kw: f64) -> AgcMetrics {
        let mut sq = 0.0;
        let mut worst: f64 = 0.0;
        for (r, p) in self.reference.iter().zip(&self.output) {
            let e = r - p;
            sq += e * e;
            worst = worst.max(libm::fabs(e));
        }
        let rmse = libm::sqrt(sq / self.reference.len() as f64);
        AgcMetrics {
            tracking_rmse: rmse,
            tracking_max: worst,
            tracking_rmse_norm: rmse / amplitude_kw,
        }
    }
}

/// Static check of an executor declaration. Parameters that an input
/// artifact may supply are only range-checked when present.
pub fn validate_executor(spec: &ExecutorSpec, path: &str) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let bad = |key: &str, msg: String| {
        Diagnostic::new(codes::E_EXECUTOR, format!("{path}/params/{key}"), msg)
    };
    match spec.kind {
        ExecutorKind::Scripted => {
            for (key, value) in &spec.params {
                if let Some(_metric) = key.strip_prefix("metric.") {
                    if value.as_f64().is_none() {
                        out.push(bad(key, format!("scripted metric '{key}' must be numeric")));
                    }
                } else if let Some(rest) = key.strip_prefix("artifact.") {
                    if rest.split_once('.').map_or(true, |(a, f)| a.is_empty() || f.is_empty()) {
                        out.push(bad(key, format!("expected artifact.<type>.<field>, got '{key}'")));
                    }
                } else if key == "fail" {
                    if value.as_bool().is_none() {
                        out.push(bad(key, "'fail' must be a boolean".into()));
                    }
                } else {
                    out.push(bad(key, format!("unknown scripted parameter '{key}'")));
                }
            }
        }
        ExecutorKind::ModelIctDisturbance => {
            if let Err(f) = IctParams::from_params(&spec.params) {
                out.extend(rebase(f, path));
            }
        }
        ExecutorKind::ModelAgcTracking => {
            for key in spec.params.keys() {
                if !AGC_PARAMS.contains(&key.as_str()) {
                    out.push(bad(key, format!("unknown model_agc_tracking parameter '{key}'")));
                }
            }
            for (key, value) in &spec.params {
                if AGC_PARAMS.contains(&key.as_str()) {
                    if let Err(d) = check_agc_param(key, value) {
                        out.push(Diagnostic { path: format!("{path}/params/{key}"), ..d });
                    }
                }
            }
            if spec.seed.is_none() {
                out.push(Diagnostic::new(
                    codes::E_EXECUTOR,
                    format!("{path}/seed"),
                    "model_agc_tracking requires a seed",
                ));
            }
        }
    }
    out
}

fn rebase(f: Failure, path: &str) -> Vec<Diagnostic> {
    f.0.into_iter()
        .map(|d| Diagnostic {
            path: format!("{path}{}", d.path),
            ..d
        })
        .collect()
}

const AGC_PARAMS: [&str; 8] = [
    "n_households",
    "capacity_kw",
    "reference_shape",
    "reference_amplitude_kw",
    "reference_period_steps",
    "steps",
    "packet_loss",
    "latency_steps",
];

fn exec_err(key: &str, msg: impl Into<String>) -> Diagnostic {
    Diagnostic::new(codes::E_EXECUTOR, format!("/params/{key}"), msg)
}

fn number(key: &str, value: &Scalar) -> Result<f64, Diagnostic> {
    match value.as_f64() {
        Some(v) if v.is_finite() => Ok(v),
        _ => Err(exec_err(key, format!("'{key}' must be a finite number"))),
    }
}

fn count(key: &str, value: &Scalar, min: u32) -> Result<u32, Diagnostic> {
    let v = number(key, value)?;
    if libm::trunc(v) != v || v < f64::from(min) || v > f64::from(u32::MAX) {
        return Err(exec_err(key, format!("'{key}' must be an integer >= {min}, got {v}")));
    }
    Ok(v as u32)
}

fn check_agc_param(key: &str, value: &Scalar) -> Result<(), Diagnostic> {
    match key {
        "n_households" | "steps" | "reference_period_steps" => count(key, value, 1).map(drop),
        "latency_steps" => count(key, value, 0).map(drop),
        "capacity_kw" | "reference_amplitude_kw" => {
            let v = number(key, value)?;
            if v > 0.0 {
                Ok(())
            } else {
                Err(exec_err(key, format!("'{key}' must be positive, got {v}")))
            }
        }
        "packet_loss" => {
            let v = number(key, value)?;
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(exec_err(key, format!("'packet_loss' must lie in [0, 1], got {v}")))
            }
        }
        "reference_shape" => match value.as_str().and_then(ReferenceShape::parse) {
            Some(_) => Ok(()),
            None => Err(exec_err(key, "'reference_shape' must be \"sine\" or \"square\"")),
        },
        _ => Err(exec_err(key, format!("unknown parameter '{key}'"))),
    }
}

impl AgcConfig {
    pub fn from_params(params: &Attributes, seed: Option<u64>) -> Result<Self, Failure> {
        let mut errs = Vec::new();
        for (key, value) in params {
            if let Err(d) = check_agc_param(key, value) {
                errs.push(d);
            }
        }
        for key in AGC_PARAMS {
            if !params.contains_key(key) {
                errs.push(exec_err(key, format!("missing parameter '{key}'")));
            }
        }
        if seed.is_none() {
            errs.push(Diagnostic::new(codes::E_EXECUTOR, "/seed", "model_agc_tracking requires a seed"));
        }
        if !errs.is_empty() {
            return Err(Failure(errs));
        }
        let num = |k: &str| params[k].as_f64().unwrap_or_default();
        let cfg = AgcConfig {
            n_households: num("n_households") as u32,
            capacity_kw: num("capacity_kw"),
            shape: params["reference_shape"]
                .as_str()
                .and_then(ReferenceShape::parse)
                .unwrap_or(ReferenceShape::Sine),
            amplitude_kw: num("reference_amplitude_kw"),
            period_steps: num("reference_period_steps") as u32,
            steps: num("steps") as u32,
            packet_loss: num("packet_loss"),
            latency_steps: num("latency_steps") as u32,
            seed: seed.unwrap_or_default(),
        };
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IctParams {
    pub availability: f64,
    pub latency_ms: f64,
    pub step_ms: f64,
}

impl IctParams {
    pub fn from_params(params: &Attributes) -> Result<Self, Failure> {
        let mut errs = Vec::new();
        let mut get = |key: &str, ok: fn(f64) -> bool, rule: &str| -> f64 {
            match params.get(key).map(|v| number(key, v)) {
                Some(Ok(v)) if ok(v) => v,
                Some(Ok(v)) => {
                    errs.push(exec_err(key, format!("'{key}' must be {rule}, got {v}")));
                    0.0
                }
                Some(Err(d)) => {
                    errs.push(d);
                    0.0
                }
                None => {
                    errs.push(exec_err(key, format!("missing parameter '{key}'")));
                    0.0
                }
            }
        };
        let availability = get("availability", |v| (0.0..=1.0).contains(&v), "in [0, 1]");
        let latency_ms = get("latency_ms", |v| v >= 0.0, ">= 0");
        let step_ms = get("step_ms", |v| v > 0.0, "> 0");
        for key in params.keys() {
            if !["availability", "latency_ms", "step_ms"].contains(&key.as_str()) {
                errs.push(exec_err(key, format!("unknown model_ict_disturbance parameter '{key}'")));
            }
        }
        if errs.is_empty() {
            Ok(IctParams {
                availability,
                latency_ms,
                step_ms,
            })
        } else {
            Err(Failure(errs))
        }
    }

    pub fn model_parameters(&self) -> Attributes {
        let mut out = Attributes::new();
        out.insert("packet_loss_probability".into(), Scalar::num(1.0 - self.availability));
        out.insert(
            "latency_steps".into(),
            Scalar::num(libm::round(self.latency_ms / self.step_ms)),
        );
        out
    }
}

/// Runs an executor. Parameter precedence, lowest first: declared params,
/// values derived from input artifacts, `overrides`.
pub fn execute(
    spec: &ExecutorSpec,
    inputs: &[Artifact],
    overrides: &Attributes,
    seed_override: Option<u64>,
) -> Result<ExecutionOutput, Failure> {
    let mut params = spec.params.clone();
    let seed = seed_override.or(spec.seed);
    match spec.kind {
        ExecutorKind::Scripted => {
            params.extend(overrides.iter().map(|(k, v)| (k.clone(), v.clone())));
            run_scripted(&params)
        }
        ExecutorKind::ModelIctDisturbance => {
            params.extend(overrides.iter().map(|(k, v)| (k.clone(), v.clone())));
            let ict = IctParams::from_params(&params)?;
            let mut out = ExecutionOutput::default();
            out.artifacts.insert(MODEL_PARAMETERS.into(), ict.model_parameters());
            Ok(out)
        }
        ExecutorKind::ModelAgcTracking => {
            for a in inputs.iter().filter(|a| a.artifact_type == MODEL_PARAMETERS) {
                if let Some(v) = a.payload.get("packet_loss_probability") {
                    params.insert("packet_loss".into(), v.clone());
                }
                if let Some(v) = a.payload.get("latency_steps") {
                    params.insert("latency_steps".into(), v.clone());
                }
            }
            params.extend(overrides.iter().map(|(k, v)| (k.clone(), v.clone())));
            let cfg = AgcConfig::from_params(&params, seed)?;
            let m = simulate_agc(&cfg).metrics(cfg.amplitude_kw);
            let mut out = ExecutionOutput::default();
            out.metrics.insert("tracking_rmse".into(), m.tracking_rmse);
            out.metrics.insert("tracking_max".into(), m.tracking_max);
            out.metrics.insert("tracking_rmse_norm".into(), m.tracking_rmse_norm);
            Ok(out)
        }
    }
}

fn run_scripted(params: &Attributes) -> Result<ExecutionOutput, Failure> {
    if params.get("fail").and_then(Scalar::as_bool) == Some(true) {
        return Err(Failure::one(codes::E_EXECUTOR, "/params/fail", "scripted failure"));
    }
    let mut out = ExecutionOutput::default();
    let mut errs = Vec::new();
    for (key, value) in params {
        if let Some(metric) = key.strip_prefix("metric.") {
            match value.as_f64() {
                Some(v) => {
                    out.metrics.insert(metric.into(), v);
                }
                None => errs.push(exec_err(key, format!("scripted metric '{key}' must be numeric"))),
            }
        } else if let Some((atype, field)) = key.strip_prefix("artifact.").and_then(|r| r.split_once('.')) {
            out.artifacts
                .entry(atype.into())
                .or_default()
                .insert(field.into(), value.clone());
        } else if key != "fail" {
            errs.push(exec_err(key, format!("unknown scripted parameter '{key}'")));
        }
    }
    if errs.is_empty() {
        Ok(out)
    } else {
        Err(Failure(errs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(p: f64, d: u32) -> AgcConfig {
        AgcConfig {
            n_households: 50,
            capacity_kw: 2.0,
            shape: ReferenceShape::Sine,
            amplitude_kw: 73.3,
            period_steps: 24,
            steps: 60,
            packet_loss: p,
            latency_steps: d,
            seed: 7,
        }
    }

    #[test]
    fn draws_are_in_unit_interval_and_indexed() {
        for i in 0..100 {
            for t in 0..100 {
                let u = uniform_draw(3, i, t);
                assert!((0.0..1.0).contains(&u));
                assert_eq!(u, uniform_draw(3, i, t));
            }
        }
        assert_ne!(uniform_draw(3, 1, 2), uniform_draw(3, 2, 1));
        assert_ne!(uniform_draw(3, 1, 2), uniform_draw(4, 1, 2));
    }

    #[test]
    fn draws_look_uniform() {
        let n = 20_000;
        let mean: f64 = (0..n).map(|k| uniform_draw(11, k % 200, k / 200)).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.01, "{mean}");
    }

    #[test]
    fn perfect_link_tracks_exactly() {
        for shape in [ReferenceShape::Sine, ReferenceShape::Square] {
            let c = AgcConfig { shape, ..cfg(0.0, 0) };
            let tr = simulate_agc(&c);
            assert_eq!(tr.reference, tr.output);
            assert_eq!(tr.metrics(c.amplitude_kw).tracking_rmse, 0.0);
        }
    }

    #[test]
    fn dead_link_outputs_nothing() {
        let c = cfg(1.0, 0);
        let tr = simulate_agc(&c);
        assert!(tr.output.iter().all(|p| *p == 0.0));
    }

    #[test]
    fn square_reference_levels() {
        let c = AgcConfig {
            shape: ReferenceShape::Square,
            period_steps: 4,
            amplitude_kw: 10.0,
            ..cfg(0.0, 0)
        };
        let r: Vec<f64> = (0..8).map(|t| c.reference(t)).collect();
        assert_eq!(r, [10.0, 10.0, 0.0, 0.0, 10.0, 10.0, 0.0, 0.0]);
    }

    #[test]
    fn latency_shifts_output() {
        let c = cfg(0.0, 3);
        let tr = simulate_agc(&c);
        for t in 0..3 {
            assert_eq!(tr.output[t], 0.0);
        }
        for t in 3..tr.output.len() {
            assert_eq!(tr.output[t], tr.reference[t - 3]);
        }
    }

    #[test]
    fn saturated_fleet_clamps() {
        let c = AgcConfig {
            shape: ReferenceShape::Square,
            amplitude_kw: 500.0,
            ..cfg(0.0, 0)
        };
        let tr = simulate_agc(&c);
        assert_eq!(tr.output[0], 100.0);
    }

    #[test]
    fn ict_model_parameters() {
        let p: Attributes = [
            ("availability".into(), Scalar::num(0.75)),
            ("latency_ms".into(), Scalar::num(250.0)),
            ("step_ms".into(), Scalar::num(100.0)),
        ]
        .into_iter()
        .collect();
        let out = IctParams::from_params(&p).unwrap().model_parameters();
        assert_eq!(out["packet_loss_probability"], Scalar::num(0.25));
        assert_eq!(out["latency_steps"], Scalar::num(3.0));
    }

    #[test]
    fn agc_param_errors() {
        let mut params = Attributes::new();
        params.insert("packet_loss".into(), Scalar::num(1.5));
        let e = AgcConfig::from_params(&params, None).unwrap_err();
        assert!(e.0.iter().all(|d| d.code == codes::E_EXECUTOR));
        assert!(e.0.len() >= 8);
    }

    #[test]
    fn scripted_replays_table() {
        let spec = ExecutorSpec {
            kind: ExecutorKind::Scripted,
            params: [
                ("artifact.model_parameters.packet_loss_probability".into(), Scalar::num(0.02)),
                ("artifact.model_parameters.latency_steps".into(), Scalar::num(1.0)),
                ("metric.avg_household_error".into(), Scalar::num(0.5)),
            ]
            .into_iter()
            .collect(),
            seed: None,
        };
        let out = execute(&spec, &[], &Attributes::new(), None).unwrap();
        assert_eq!(out.metrics["avg_household_error"], 0.5);
        let mp = &out.artifacts[MODEL_PARAMETERS];
        assert_eq!(mp["packet_loss_probability"], Scalar::num(0.02));
        assert_eq!(mp["latency_steps"], Scalar::num(1.0));
    }
}
