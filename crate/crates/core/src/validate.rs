//! Structural validation of system configurations, holistic test cases and
//! sub-tests, plus dotted-path signal resolution.
//!
//! Validators never stop at the first problem: every independent violation
//! yields its own diagnostic.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::diag::{codes, Diagnostic, Failure};
use crate::expr;
use crate::model::*;

pub fn validate_system_configuration(sc: &SystemConfiguration) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    duplicate_ids(sc.components.iter().map(|c| c.id.as_str()), "/components", "component", &mut out);
    duplicate_ids(sc.connections.iter().map(|c| c.id.as_str()), "/connections", "connection", &mut out);
    duplicate_ids(sc.functions.iter().map(|f| f.id.as_str()), "/functions", "function", &mut out);

    for (i, c) in sc.components.iter().enumerate() {
        let path = format!("/components/{i}");
        check_id(&c.id, &format!("{path}/id"), &mut out);
        if c.domains.is_empty() {
            out.push(Diagnostic::new(
                codes::E_EMPTY_SET,
                format!("{path}/domains"),
                format!("component '{}' has no domains", c.id),
            ));
        }
        for (j, d) in c.domains.iter().enumerate() {
            check_domain(d, &format!("{path}/domains/{j}"), &mut out);
        }
    }

    for (i, conn) in sc.connections.iter().enumerate() {
        let path = format!("/connections/{i}");
        check_id(&conn.id, &format!("{path}/id"), &mut out);
        check_domain(&conn.domain, &format!("{path}/domain"), &mut out);
        let from = sc.component(&conn.from);
        let to = sc.component(&conn.to);
        for (end, id, found) in [("from", &conn.from, from), ("to", &conn.to, to)] {
            if found.is_none() {
                out.push(Diagnostic::new(
                    codes::E_REF,
                    format!("{path}/{end}"),
                    format!("connection '{}' references unknown component '{id}'", conn.id),
                ));
            }
        }
        for c in [from, to].into_iter().flatten() {
            if !c.domains.contains(&conn.domain) {
                out.push(Diagnostic::new(
                    codes::E_DOMAIN_MISMATCH,
                    format!("{path}/domain"),
                    format!(
                        "connection '{}' domain '{}' is not a domain of component '{}'",
                        conn.id, conn.domain, c.id
                    ),
                ));
            }
        }
    }

    for (i, f) in sc.functions.iter().enumerate() {
        let path = format!("/functions/{i}");
        check_id(&f.id, &format!("{path}/id"), &mut out);
        if f.actors.is_empty() {
            out.push(Diagnostic::new(
                codes::E_EMPTY_SET,
                format!("{path}/actors"),
                format!("function '{}' has no actors", f.id),
            ));
        }
        for (j, a) in f.actors.iter().enumerate() {
            if sc.component(a).is_none() {
                out.push(Diagnostic::new(
                    codes::E_REF,
                    format!("{path}/actors/{j}"),
                    format!("function '{}' names unknown actor '{a}'", f.id),
                ));
            }
        }
    }
    out
}

/// Checks a holistic test case against its (already validated) system
/// configuration.
pub fn validate_test_case(tc: &HolisticTestCase, sc: &SystemConfiguration) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    check_id(&tc.id, "/id", &mut out);
    validate_scope(&tc.scope, sc, &[], "", &mut out);
    for (i, t) in tc.scope.criteria.target.iter().enumerate() {
        if let Some(text) = &t.combination {
            if let Err(e) = expr::parse_expression(text) {
                out.push(Diagnostic::new(
                    codes::E_EXPR_SYNTAX,
                    format!("/criteria/target/{i}/combination"),
                    format!("column {}: {}", e.column, e.message),
                ));
            }
        }
    }
    out
}

/// Checks one sub-test against its parent and the shared configuration.
/// Port pairing across sub-tests is checked by the mapping engine.
pub fn validate_subtest(
    st: &SubTest,
    parent: &HolisticTestCase,
    sc: &SystemConfiguration,
    path: &str,
) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    check_id(&st.id, &format!("{path}/id"), &mut out);
    if st.parent != parent.id {
        out.push(Diagnostic::new(
            codes::E_REF,
            format!("{path}/parent"),
            format!("sub-test '{}' names parent '{}', expected '{}'", st.id, st.parent, parent.id),
        ));
    }
    validate_scope(&st.scope, sc, core::slice::from_ref(st), path, &mut out);
    for (i, c) in st.scope.sut.components.iter().enumerate() {
        if !parent.scope.sut.components.contains(c) {
            out.push(Diagnostic::new(
                codes::E_SUBTEST_SCOPE,
                format!("{path}/sut/components/{i}"),
                format!("component '{c}' of sub-test '{}' is outside the parent SuT", st.id),
            ));
        }
    }

    duplicate_ids(
        st.interfaces.iter().map(|p| p.id.as_str()),
        &format!("{path}/interfaces"),
        "port",
        &mut out,
    );
    for (i, port) in st.interfaces.iter().enumerate() {
        let pp = format!("{path}/interfaces/{i}");
        match (port.iterative, port.max_iterations) {
            (true, None) => out.push(Diagnostic::new(
                codes::E_PORT,
                format!("{pp}/max_iterations"),
                format!("iterative port '{}' needs max_iterations", port.id),
            )),
            (true, Some(0)) => out.push(Diagnostic::new(
                codes::E_PORT,
                format!("{pp}/max_iterations"),
                format!("port '{}' max_iterations must be positive", port.id),
            )),
            (false, Some(_)) => out.push(Diagnostic::new(
                codes::E_PORT,
                format!("{pp}/max_iterations"),
                format!("non-iterative port '{}' must not set max_iterations", port.id),
            )),
            _ => {}
        }
        if port.peer == st.id {
            out.push(Diagnostic::new(
                codes::E_PORT,
                format!("{pp}/peer"),
                format!("port '{}' names its own sub-test as peer", port.id),
            ));
        }
        if port.artifact_type.is_empty() {
            out.push(Diagnostic::new(
                codes::E_SCHEMA,
                format!("{pp}/artifact_type"),
                "empty artifact_type",
            ));
        }
    }

    out.extend(crate::exec::validate_executor(&st.executor, &format!("{path}/executor")));
    out
}

fn validate_scope(
    scope: &TestScope,
    sc: &SystemConfiguration,
    subtests: &[SubTest],
    base: &str,
    out: &mut Vec<Diagnostic>,
) {
    let sut = &scope.sut.components;
    if sut.is_empty() {
        out.push(Diagnostic::new(
            codes::E_EMPTY_SET,
            format!("{base}/sut/components"),
            "SuT has no components",
        ));
    }
    for (i, c) in sut.iter().enumerate() {
        if sc.component(c).is_none() {
            out.push(Diagnostic::new(
                codes::E_REF,
                format!("{base}/sut/components/{i}"),
                format!("SuT component '{c}' is not in the system configuration"),
            ));
        }
    }

    if scope.oui.is_empty() {
        out.push(Diagnostic::new(codes::E_EMPTY_SET, format!("{base}/oui"), "OuI is empty"));
    }
    for (i, o) in scope.oui.iter().enumerate() {
        if !sut.contains(o) {
            out.push(Diagnostic::new(
                codes::E_OUI_NOT_IN_SUT,
                format!("{base}/oui/{i}"),
                format!("OuI component '{o}' is not part of the SuT"),
            ));
        }
    }

    if scope.doi.is_empty() {
        out.push(Diagnostic::new(codes::E_EMPTY_SET, format!("{base}/doi"), "DoI is empty"));
    }
    for (i, d) in scope.doi.iter().enumerate() {
        let p = format!("{base}/doi/{i}");
        check_domain(d, &p, out);
        let used = sut
            .iter()
            .filter_map(|c| sc.component(c))
            .any(|c| c.domains.contains(d));
        if !used {
            out.push(Diagnostic::new(
                codes::E_DOI_UNUSED,
                p,
                format!("domain '{d}' appears on no SuT component"),
            ));
        }
    }

    if scope.fut.is_empty() {
        out.push(Diagnostic::new(codes::E_EMPTY_SET, format!("{base}/fut"), "FuT is empty"));
    }
    for (i, f) in scope.fut.iter().enumerate() {
        let p = format!("{base}/fut/{i}");
        match sc.function(f) {
            None => out.push(Diagnostic::new(
                codes::E_REF,
                p,
                format!("function '{f}' is not defined in the system configuration"),
            )),
            Some(def) => {
                if !def.actors.iter().any(|a| sut.contains(a)) {
                    out.push(Diagnostic::new(
                        codes::E_FUT_OUTSIDE_SUT,
                        p,
                        format!("no actor of function '{f}' is inside the SuT"),
                    ));
                }
            }
        }
    }
    if scope.fui.is_empty() {
        out.push(Diagnostic::new(codes::E_EMPTY_SET, format!("{base}/fui"), "FuI is empty"));
    }
    for (i, f) in scope.fui.iter().enumerate() {
        if !scope.fut.contains(f) {
            out.push(Diagnostic::new(
                codes::E_FUI_NOT_IN_FUT,
                format!("{base}/fui/{i}"),
                format!("FuI '{f}' is not among the functions under test"),
            ));
        }
    }

    validate_criteria(&scope.criteria, sc, subtests, &format!("{base}/criteria"), out);
}

fn validate_criteria(
    criteria: &TestCriteria,
    sc: &SystemConfiguration,
    subtests: &[SubTest],
    base: &str,
    out: &mut Vec<Diagnostic>,
) {
    let ids = criteria
        .target
        .iter()
        .map(|t| t.id.as_str())
        .chain(criteria.variability.iter().map(|v| v.id.as_str()))
        .chain(criteria.quality.iter().map(|q| q.id.as_str()));
    duplicate_ids(ids, base, "criterion", out);

    for (i, t) in criteria.target.iter().enumerate() {
        if t.metric.is_empty() {
            out.push(Diagnostic::new(
                codes::E_SCHEMA,
                format!("{base}/target/{i}/metric"),
                format!("target '{}' has an empty metric", t.id),
            ));
        }
    }
    for (i, v) in criteria.variability.iter().enumerate() {
        let p = format!("{base}/variability/{i}");
        if let VariabilityRange::Interval { lo, hi } = v.range {
            if lo.is_nan() || hi.is_nan() || lo > hi {
                out.push(Diagnostic::new(
                    codes::E_RANGE,
                    format!("{p}/range"),
                    format!("variability '{}' range [{lo}, {hi}] is not ordered", v.id),
                ));
            }
        }
        let ctx = SignalContext { sc, subtests };
        if let Err(d) = ctx.resolve(&v.parameter) {
            out.push(Diagnostic {
                path: format!("{p}/parameter"),
                ..d
            });
        }
    }
    for (i, q) in criteria.quality.iter().enumerate() {
        if criteria.target(&q.target_ref).is_none() {
            out.push(Diagnostic::new(
                codes::E_REF,
                format!("{base}/quality/{i}/target_ref"),
                format!("quality '{}' refers to unknown target '{}'", q.id, q.target_ref),
            ));
        }
        if q.threshold.value.is_nan() {
            out.push(Diagnostic::new(
                codes::E_RANGE,
                format!("{base}/quality/{i}/threshold"),
                "threshold is NaN",
            ));
        }
    }
}

/// A resolved dotted path.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum SignalRef {
    ComponentAttribute { component: Id, attribute: String },
    ConnectionAttribute { connection: Id, attribute: String },
    Metric { subtest: Id, metric: Id },
}

impl SignalRef {
    /// The trailing segment: attribute or metric name.
    pub fn leaf(&self) -> &str {
        match self {
            SignalRef::ComponentAttribute { attribute, .. } => attribute,
            SignalRef::ConnectionAttribute { attribute, .. } => attribute,
            SignalRef::Metric { metric, .. } => metric,
        }
    }
}

/// Resolution scope for dotted paths: configuration entities first, then
/// sub-test metrics.
#[derive(Debug, Clone, Copy)]
pub struct SignalContext<'a> {
    pub sc: &'a SystemConfiguration,
    pub subtests: &'a [SubTest],
}

impl<'a> SignalContext<'a> {
    pub fn resolve(&self, path: &str) -> Result<SignalRef, Diagnostic> {
        let unresolved = |why: &str| {
            Diagnostic::new(
                codes::E_PATH_UNRESOLVED,
                "",
                format!("path '{path}' does not resolve: {why}"),
            )
        };
        let (head, leaf) = path
            .split_once('.')
            .ok_or_else(|| unresolved("expected <entity>.<name>"))?;
        if head.is_empty() || leaf.is_empty() || leaf.contains('.') {
            return Err(unresolved("expected <entity>.<name>"));
        }
        if let Some(c) = self.sc.component(head) {
            return if c.attributes.contains_key(leaf) {
                Ok(SignalRef::ComponentAttribute {
                    component: head.into(),
                    attribute: leaf.into(),
                })
            } else {
                Err(unresolved("component has no such attribute"))
            };
        }
        if let Some(c) = self.sc.connection(head) {
            return if c.attributes.contains_key(leaf) {
                Ok(SignalRef::ConnectionAttribute {
                    connection: head.into(),
                    attribute: leaf.into(),
                })
            } else {
                Err(unresolved("connection has no such attribute"))
            };
        }
        if let Some(st) = self.subtests.iter().find(|s| s.id == head) {
            return if st.scope.criteria.target.iter().any(|t| t.metric == leaf) {
                Ok(SignalRef::Metric {
                    subtest: head.into(),
                    metric: leaf.into(),
                })
            } else {
                Err(unresolved("sub-test declares no such metric"))
            };
        }
        Err(unresolved("unknown entity"))
    }
}

/// Resolves `path` over the test case's configuration and, when given, the
/// sub-tests of its decomposition.
pub fn signal_resolve(
    sc: &SystemConfiguration,
    subtests: &[SubTest],
    path: &str,
) -> Result<SignalRef, Failure> {
    SignalContext { sc, subtests }.resolve(path).map_err(Failure::from)
}

fn check_id(id: &str, path: &str, out: &mut Vec<Diagnostic>) {
    if id.is_empty() {
        out.push(Diagnostic::new(codes::E_SCHEMA, path, "identifier is empty"));
    }
}

fn check_domain(tag: &DomainTag, path: &str, out: &mut Vec<Diagnostic>) {
    if !tag.is_well_formed() {
        out.push(Diagnostic::new(
            codes::E_DOMAIN_TAG,
            path,
            format!("domain tag '{tag}' is not a lowercase snake-case identifier"),
        ));
    } else if !tag.is_seeded() {
        out.push(Diagnostic::new(
            codes::W_UNKNOWN_DOMAIN,
            path,
            format!("domain tag '{tag}' is not in the registry"),
        ));
    }
}

pub(crate) fn duplicate_ids<'a>(
    ids: impl Iterator<Item = &'a str>,
    path: &str,
    what: &str,
    out: &mut Vec<Diagnostic>,
) {
    let mut seen = BTreeSet::new();
    let mut reported = BTreeSet::new();
    for id in ids {
        if !seen.insert(id) && reported.insert(id) {
            out.push(Diagnostic::new(
                codes::E_DUPLICATE_ID,
                path,
                format!("duplicate {what} id '{id}'"),
            ));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::*;

    #[test]
    fn empty_configuration_is_valid() {
        assert!(validate_system_configuration(&SystemConfiguration::default()).is_empty());
    }

    #[test]
    fn fixture_configuration_is_valid() {
        assert_eq!(validate_system_configuration(&agc_sc()), vec![]);
    }

    #[test]
    fn dangling_connection_endpoint() {
        let mut sc = agc_sc();
        sc.connections[2].to = "hems_9".into();
        let diags = validate_system_configuration(&sc);
        assert_eq!(diags.len(), 1, "{diags:?}");
        assert_eq!(diags[0].code, codes::E_REF);
        assert!(diags[0].is_error());
    }

    #[test]
    fn connection_domain_must_be_shared() {
        let mut sc = agc_sc();
        sc.connections[0].domain = DomainTag::new("thermal");
        let diags = validate_system_configuration(&sc);
        assert!(diags.iter().any(|d| d.code == codes::E_DOMAIN_MISMATCH));
    }

    #[test]
    fn unknown_domain_is_a_warning() {
        let mut sc = agc_sc();
        sc.components[0].domains.push(DomainTag::new("gas"));
        let diags = validate_system_configuration(&sc);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, codes::W_UNKNOWN_DOMAIN);
        assert!(!diags[0].is_error());
    }

    #[test]
    fn fixture_test_case_is_valid() {
        assert_eq!(validate_test_case(&agc_test_case(), &agc_sc()), vec![]);
    }

    #[test]
    fn fui_outside_fut() {
        let mut tc = agc_test_case();
        tc.scope.fui = vec!["f_agc_dispatch".into()];
        let diags = validate_test_case(&tc, &agc_sc());
        assert!(diags.iter().any(|d| d.code == codes::E_FUI_NOT_IN_FUT), "{diags:?}");
    }

    #[test]
    fn unused_domain_of_investigation() {
        let mut tc = agc_test_case();
        tc.scope.doi.push(DomainTag::new("thermal"));
        let diags = validate_test_case(&tc, &agc_sc());
        assert_eq!(diags.len(), 1, "{diags:?}");
        assert_eq!(diags[0].code, codes::E_DOI_UNUSED);
    }

    #[test]
    fn independent_violations_all_reported() {
        let mut tc = agc_test_case();
        tc.scope.fui = vec!["f_agc_dispatch".into()];
        tc.scope.doi.push(DomainTag::new("thermal"));
        tc.scope.oui.push("tso".into());
        tc.scope.criteria.quality[0].target_ref = "nope".into();
        let diags = validate_test_case(&tc, &agc_sc());
        for code in [
            codes::E_FUI_NOT_IN_FUT,
            codes::E_DOI_UNUSED,
            codes::E_OUI_NOT_IN_SUT,
            codes::E_REF,
        ] {
            assert!(diags.iter().any(|d| d.code == code), "missing {code}: {diags:?}");
        }
    }

    #[test]
    fn resolves_component_attribute() {
        let sc = agc_sc();
        let r = signal_resolve(&sc, &[], "agc_ref.amplitude_kw").unwrap();
        assert_eq!(
            r,
            SignalRef::ComponentAttribute {
                component: "agc_ref".into(),
                attribute: "amplitude_kw".into()
            }
        );
    }

    #[test]
    fn resolves_subtest_metric() {
        let sc = agc_sc();
        let d = agc_decomposition();
        let r = signal_resolve(&sc, &d.subtests, "st2.tracking_rmse").unwrap();
        assert_eq!(
            r,
            SignalRef::Metric {
                subtest: "st2".into(),
                metric: "tracking_rmse".into()
            }
        );
    }

    #[test]
    fn unresolved_paths() {
        let sc = agc_sc();
        for p in ["", "agc_ref", "agc_ref.", ".x", "agc_ref.nope", "ghost.x", "a.b.c"] {
            let e = signal_resolve(&sc, &[], p).unwrap_err();
            assert!(e.has_code(codes::E_PATH_UNRESOLVED), "{p}");
        }
    }

    #[test]
    fn fixture_subtests_are_valid() {
        let tc = agc_test_case();
        let sc = agc_sc();
        for (i, st) in agc_decomposition().subtests.iter().enumerate() {
            let diags = validate_subtest(st, &tc, &sc, &format!("/subtests/{i}"));
            assert_eq!(diags, vec![]);
        }
    }

    #[test]
    fn iterative_port_needs_bound() {
        let tc = agc_test_case();
        let sc = agc_sc();
        let mut st = agc_decomposition().subtests[1].clone();
        st.interfaces[0].iterative = true;
        let diags = validate_subtest(&st, &tc, &sc, "");
        assert!(diags.iter().any(|d| d.code == codes::E_PORT));
    }
}
