//! Test-classification registry: categories, classes, inter-category
//! compatibility rules, and the requirement/capability matching predicate.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::diag::{codes, Diagnostic, Failure};
use crate::model::*;
use crate::validate::duplicate_ids;

/// Categories every taxonomy must define.
pub const REQUIRED_CATEGORIES: [&str; 6] = [
    "purpose_of_investigation",
    "test_setup",
    "test_criteria",
    "test_design",
    "object_of_investigation",
    "interfaces",
];

pub const DEFAULT_TAXONOMY_ID: &str = "holotest_default";

impl Taxonomy {
    pub fn category(&self, id: &str) -> Option<&Category> {
        self.categories.iter().find(|c| c.id == id)
    }

    pub fn class(&self, category: &str, id: &str) -> Option<&Class> {
        self.classes
            .iter()
            .find(|c| c.category == category && c.id == id)
    }

    pub fn classes_of<'a>(&'a self, category: &'a str) -> impl Iterator<Item = &'a Class> + 'a {
        self.classes.iter().filter(move |c| c.category == category)
    }
}

/// The taxonomy shipped with the toolchain.
pub fn default_taxonomy() -> Taxonomy {
    let cat = |id: &str, description: &str| Category {
        id: id.into(),
        description: description.into(),
    };
    let class = |category: &str, id: &str, description: &str, schema: &[(&str, AttributeType)]| Class {
        id: id.into(),
        category: category.into(),
        description: description.into(),
        attribute_schema: schema.iter().map(|(k, t)| ((*k).into(), *t)).collect(),
    };
    let rel = |from: &str, to: &str, pairs: &[(&str, &str)]| CategoryRelation {
        from: from.into(),
        to: to.into(),
        compatible: pairs.iter().map(|(a, b)| ((*a).into(), (*b).into())).collect(),
    };
    use AttributeType::*;

    Taxonomy {
        id: DEFAULT_TAXONOMY_ID.into(),
        categories: alloc::vec![
            cat("purpose_of_investigation", "Test objective kind"),
            cat("test_setup", "Kind of laboratory or simulation environment executing the test"),
            cat("test_criteria", "Kind of metric the test evaluates"),
            cat("test_design", "How test factors are varied and sampled"),
            cat("object_of_investigation", "Granularity of the object the criteria refer to"),
            cat("interfaces", "Data exchanged with other tests, components or sub-systems"),
        ],
        classes: alloc::vec![
            class("purpose_of_investigation", "characterization", "Quantify a property or boundary", &[]),
            class("purpose_of_investigation", "validation", "Show fitness for the intended use", &[]),
            class("purpose_of_investigation", "verification", "Show conformance to a specification", &[]),
            class("test_setup", "pure_simulation", "Offline software simulation", &[("max_nodes", Numeric), ("real_time", Bool)]),
            class("test_setup", "controller_hil", "Controller hardware-in-the-loop", &[("max_nodes", Numeric), ("real_time", Bool)]),
            class("test_setup", "power_hil", "Power hardware-in-the-loop", &[("max_power_kw", Numeric), ("max_nodes", Numeric)]),
            class("test_setup", "physical_lab", "Physical laboratory setup", &[("max_power_kw", Numeric), ("ict_emulation", Bool), ("households", Numeric)]),
            class("test_criteria", "threshold_metric", "Scalar metric compared to a threshold", &[]),
            class("test_criteria", "sweep_metric", "Metric traced over a varied factor", &[]),
            class("test_criteria", "time_series_error", "Deviation between time series", &[]),
            class("test_design", "scripted_sequence", "Fixed scripted procedure", &[]),
            class("test_design", "factorial_sweep", "Grid over test factors", &[("max_points", Numeric)]),
            class("test_design", "bisection_characterization", "Boundary search by bisection", &[]),
            class("object_of_investigation", "component", "Single device or software object", &[]),
            class("object_of_investigation", "subsystem", "Group of interacting components", &[]),
            class("object_of_investigation", "system", "Whole system of systems", &[]),
            class("interfaces", "time_series", "Sampled signal exchange", &[]),
            class("interfaces", "model_parameters", "Parameter set of a derived model", &[]),
            class("interfaces", "event_log", "Timestamped event exchange", &[]),
        ],
        relations: alloc::vec![
            rel(
                "purpose_of_investigation",
                "test_criteria",
                &[
                    ("characterization", "sweep_metric"),
                    ("characterization", "time_series_error"),
                    ("validation", "threshold_metric"),
                    ("validation", "time_series_error"),
                    ("verification", "threshold_metric"),
                ],
            ),
            rel(
                "test_criteria",
                "test_design",
                &[
                    ("sweep_metric", "factorial_sweep"),
                    ("sweep_metric", "bisection_characterization"),
                    ("threshold_metric", "scripted_sequence"),
                    ("threshold_metric", "factorial_sweep"),
                    ("time_series_error", "scripted_sequence"),
                    ("time_series_error", "factorial_sweep"),
                    ("time_series_error", "bisection_characterization"),
                ],
            ),
            rel(
                "object_of_investigation",
                "test_setup",
                &[
                    ("component", "pure_simulation"),
                    ("component", "controller_hil"),
                    ("component", "power_hil"),
                    ("component", "physical_lab"),
                    ("subsystem", "pure_simulation"),
                    ("subsystem", "controller_hil"),
                    ("subsystem", "power_hil"),
                    ("subsystem", "physical_lab"),
                    ("system", "pure_simulation"),
                    ("system", "controller_hil"),
                    ("system", "power_hil"),
                ],
            ),
        ],
    }
}

pub fn check_taxonomy(tax: &Taxonomy) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    duplicate_ids(tax.categories.iter().map(|c| c.id.as_str()), "/categories", "category", &mut out);
    for required in REQUIRED_CATEGORIES {
        if tax.category(required).is_none() {
            out.push(Diagnostic::new(
                codes::E_SCHEMA,
                "/categories",
                format!("required category '{required}' is missing"),
            ));
        }
    }

    let mut seen = BTreeSet::new();
    for (i, c) in tax.classes.iter().enumerate() {
        if tax.category(&c.category).is_none() {
            out.push(Diagnostic::new(
                codes::E_REF,
                format!("/classes/{i}/category"),
                format!("class '{}' names unknown category '{}'", c.id, c.category),
            ));
        }
        if !seen.insert((c.category.as_str(), c.id.as_str())) {
            out.push(Diagnostic::new(
                codes::E_DUPLICATE_ID,
                format!("/classes/{i}"),
                format!("duplicate class '{}' in category '{}'", c.id, c.category),
            ));
        }
    }

    let mut pairs = BTreeSet::new();
    for (i, r) in tax.relations.iter().enumerate() {
        let path = format!("/relations/{i}");
        for (end, cat) in [("from", &r.from), ("to", &r.to)] {
            if tax.category(cat).is_none() {
                out.push(Diagnostic::new(
                    codes::E_REF,
                    format!("{path}/{end}"),
                    format!("relation names unknown category '{cat}'"),
                ));
            }
        }
        if !pairs.insert((r.from.as_str(), r.to.as_str())) {
            out.push(Diagnostic::new(
                codes::E_DUPLICATE_ID,
                path.clone(),
                format!("relation {} -> {} declared twice", r.from, r.to),
            ));
        }
        for (j, (a, b)) in r.compatible.iter().enumerate() {
            for (cat, class) in [(&r.from, a), (&r.to, b)] {
                if tax.category(cat).is_some() && tax.class(cat, class).is_none() {
                    out.push(Diagnostic::new(
                        codes::E_REF,
                        format!("{path}/compatible/{j}"),
                        format!("unknown class '{class}' in category '{cat}'"),
                    ));
                }
            }
        }
    }

    if let Some(cycle) = relation_cycle(tax) {
        out.push(Diagnostic::new(
            codes::E_CYCLE,
            "/relations",
            format!("category relations form a cycle: {}", cycle.join(" -> ")),
        ));
    }
    out
}

/// First cycle found by depth-first search, as a closed list of category ids.
fn relation_cycle(tax: &Taxonomy) -> Option<Vec<String>> {
    let mut adj: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for r in &tax.relations {
        adj.entry(r.from.as_str()).or_default().insert(r.to.as_str());
        adj.entry(r.to.as_str()).or_default();
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state: BTreeMap<&str, u8> = adj.keys().map(|k| (*k, 0)).collect();
    let mut stack: Vec<&str> = Vec::new();

    fn dfs<'a>(
        node: &'a str,
        adj: &BTreeMap<&'a str, BTreeSet<&'a str>>,
        state: &mut BTreeMap<&'a str, u8>,
        stack: &mut Vec<&'a str>,
    ) -> Option<Vec<String>> {
        state.insert(node, 1);
        stack.push(node);
        for &next in &adj[node] {
            match state[next] {
                1 => {
                    let start = stack.iter().position(|n| *n == next).unwrap_or(0);
                    let mut cycle: Vec<String> = stack[start..].iter().map(|s| (*s).into()).collect();
                    cycle.push(next.into());
                    return Some(cycle);
                }
                0 => {
                    if let Some(c) = dfs(next, adj, state, stack) {
                        return Some(c);
                    }
                }
                _ => {}
            }
        }
        stack.pop();
        state.insert(node, 2);
        None
    }

    let nodes: Vec<&str> = adj.keys().copied().collect();
    for n in nodes {
        if state[n] == 0 {
            if let Some(c) = dfs(n, &adj, &mut state, &mut stack) {
                return Some(c);
            }
        }
    }
    None
}

/// Checks a requirement's classes and constrained attributes against the
/// taxonomy.
pub fn validate_requirement(req: &Requirement, tax: &Taxonomy, path: &str) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if tax.category(&req.category).is_none() {
        out.push(Diagnostic::new(
            codes::E_REF,
            format!("{path}/category"),
            format!("unknown category '{}'", req.category),
        ));
        return out;
    }
    let Some(class) = tax.class(&req.category, &req.class) else {
        out.push(Diagnostic::new(
            codes::E_REF,
            format!("{path}/class"),
            format!("class '{}' does not belong to category '{}'", req.class, req.category),
        ));
        return out;
    };
    for (i, c) in req.attribute_constraints.iter().enumerate() {
        let cp = format!("{path}/attribute_constraints/{i}");
        let Some(ty) = class.attribute_schema.get(&c.attribute) else {
            out.push(Diagnostic::new(
                codes::E_REF,
                format!("{cp}/attribute"),
                format!("class '{}' has no attribute '{}'", class.id, c.attribute),
            ));
            continue;
        };
        let values: &[Scalar] = match &c.value {
            ConstraintValue::One(v) => core::slice::from_ref(v),
            ConstraintValue::Many(vs) => vs,
        };
        if values.iter().any(|v| !ty.admits(v)) {
            out.push(Diagnostic::new(
                codes::E_SCHEMA,
                format!("{cp}/value"),
                format!("attribute '{}' expects {} values", c.attribute, ty.as_str()),
            ));
        }
        let ordering = matches!(
            c.predicate,
            ConstraintOp::Lt | ConstraintOp::Le | ConstraintOp::Gt | ConstraintOp::Ge
        );
        if ordering && *ty != AttributeType::Numeric {
            out.push(Diagnostic::new(
                codes::E_SCHEMA,
                format!("{cp}/predicate"),
                format!("ordering predicate on non-numeric attribute '{}'", c.attribute),
            ));
        }
        if ordering && matches!(c.value, ConstraintValue::Many(_)) {
            out.push(Diagnostic::new(
                codes::E_SCHEMA,
                format!("{cp}/value"),
                "ordering predicate needs a single value",
            ));
        }
    }
    out
}

pub fn validate_profile(profile: &RiProfile, tax: &Taxonomy) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if profile.taxonomy != tax.id {
        out.push(Diagnostic::new(
            codes::E_TAXONOMY_MISMATCH,
            "/taxonomy",
            format!("profile uses taxonomy '{}', loaded taxonomy is '{}'", profile.taxonomy, tax.id),
        ));
    }
    if !(profile.cost >= 0.0 && profile.cost.is_finite()) {
        out.push(Diagnostic::new(
            codes::E_RANGE,
            "/cost",
            format!("cost {} must be a finite non-negative number", profile.cost),
        ));
    }
    for (i, cap) in profile.capabilities.iter().enumerate() {
        let path = format!("/capabilities/{i}");
        let Some(class) = tax.class(&cap.category, &cap.class) else {
            out.push(Diagnostic::new(
                codes::E_REF,
                path,
                format!("({}, {}) is not a taxonomy class", cap.category, cap.class),
            ));
            continue;
        };
        for (name, value) in &cap.attributes {
            match class.attribute_schema.get(name) {
                None => out.push(Diagnostic::new(
                    codes::W_UNKNOWN_FIELD,
                    format!("{path}/attributes/{name}"),
                    format!("attribute '{name}' is not declared by class '{}'", class.id),
                )),
                Some(ty) if !ty.admits(value) => out.push(Diagnostic::new(
                    codes::E_SCHEMA,
                    format!("{path}/attributes/{name}"),
                    format!("attribute '{name}' expects a {} value", ty.as_str()),
                )),
                _ => {}
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchOutcome {
    pub satisfied: bool,
    pub explanation: Vec<String>,
}

fn constraint_holds(c: &AttributeConstraint, attrs: &Attributes) -> (bool, String) {
    let Some(actual) = attrs.get(&c.attribute) else {
        return (false, format!("{} {}: fail (attribute missing)", c.attribute, c.predicate.as_str()));
    };
    let ok = match (&c.predicate, &c.value) {
        (ConstraintOp::Eq, ConstraintValue::One(v)) => actual.same_value(v),
        (ConstraintOp::Eq, ConstraintValue::Many(_)) => false,
        (ConstraintOp::In, ConstraintValue::One(v)) => actual.same_value(v),
        (ConstraintOp::In, ConstraintValue::Many(vs)) => vs.iter().any(|v| actual.same_value(v)),
        (op, ConstraintValue::One(v)) => match (actual.as_f64(), v.as_f64()) {
            (Some(a), Some(b)) => match op {
                ConstraintOp::Lt => a < b,
                ConstraintOp::Le => a <= b,
                ConstraintOp::Gt => a > b,
                ConstraintOp::Ge => a >= b,
                _ => false,
            },
            _ => false,
        },
        (_, ConstraintValue::Many(_)) => false,
    };
    let want = match &c.value {
        ConstraintValue::One(v) => format!("{v}"),
        ConstraintValue::Many(vs) => {
            let parts: Vec<String> = vs.iter().map(|v| format!("{v}")).collect();
            format!("[{}]", parts.join(", "))
        }
    };
    (
        ok,
        format!(
            "{} {} {}: {} (actual {})",
            c.attribute,
            c.predicate.as_str(),
            want,
            if ok { "pass" } else { "fail" },
            actual
        ),
    )
}

/// Whether `profile` can host a test with requirement `req`. Both must be
/// expressed in the taxonomy named `taxonomy_id`.
pub fn matches(taxonomy_id: &str, profile: &RiProfile, req: &Requirement) -> Result<MatchOutcome, Failure> {
    if profile.taxonomy != taxonomy_id {
        return Err(Failure::one(
            codes::E_TAXONOMY_MISMATCH,
            "/taxonomy",
            format!(
                "profile '{}' uses taxonomy '{}', requirement uses '{}'",
                profile.id, profile.taxonomy, taxonomy_id
            ),
        ));
    }
    let candidates: Vec<&Capability> = profile
        .capabilities
        .iter()
        .filter(|c| c.category == req.category && c.class == req.class)
        .collect();
    if candidates.is_empty() {
        return Ok(MatchOutcome {
            satisfied: false,
            explanation: alloc::vec![format!("class {} absent", req.class)],
        });
    }
    let mut first: Option<Vec<String>> = None;
    for cap in candidates {
        let results: Vec<(bool, String)> = req
            .attribute_constraints
            .iter()
            .map(|c| constraint_holds(c, &cap.attributes))
            .collect();
        let all = results.iter().all(|(ok, _)| *ok);
        let mut lines = alloc::vec![format!("class {} present", req.class)];
        lines.extend(results.into_iter().map(|(_, l)| l));
        if all {
            return Ok(MatchOutcome {
                satisfied: true,
                explanation: lines,
            });
        }
        first.get_or_insert(lines);
    }
    Ok(MatchOutcome {
        satisfied: false,
        explanation: first.unwrap_or_default(),
    })
}

/// Rule-table consistency of the classes one test holds across related
/// categories.
pub fn consistent_test(reqs: &[Requirement], relations: &[CategoryRelation]) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for r in relations {
        let from: BTreeSet<&str> = reqs
            .iter()
            .filter(|q| q.category == r.from)
            .map(|q| q.class.as_str())
            .collect();
        let to: BTreeSet<&str> = reqs
            .iter()
            .filter(|q| q.category == r.to)
            .map(|q| q.class.as_str())
            .collect();
        for a in &from {
            for b in &to {
                let ok = r.compatible.iter().any(|(x, y)| x == a && y == b);
                if !ok {
                    out.push(Diagnostic::new(
                        codes::E_INCOMPATIBLE,
                        "/requirements",
                        format!("{}:{a} is not compatible with {}:{b}", r.from, r.to),
                    ));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario;

    fn req(category: &str, class: &str, cons: Vec<AttributeConstraint>) -> Requirement {
        Requirement {
            category: category.into(),
            class: class.into(),
            attribute_constraints: cons,
        }
    }

    fn hil_profile(max_nodes: f64) -> RiProfile {
        RiProfile {
            id: "lab".into(),
            name: "Lab".into(),
            taxonomy: DEFAULT_TAXONOMY_ID.into(),
            capabilities: alloc::vec![Capability {
                category: "test_setup".into(),
                class: "controller_hil".into(),
                attributes: [("max_nodes".into(), Scalar::num(max_nodes))].into_iter().collect(),
            }],
            cost: 1.0,
        }
    }

    fn at_least(n: f64) -> AttributeConstraint {
        AttributeConstraint {
            attribute: "max_nodes".into(),
            predicate: ConstraintOp::Ge,
            value: ConstraintValue::One(Scalar::num(n)),
        }
    }

    #[test]
    fn default_taxonomy_is_clean() {
        assert_eq!(check_taxonomy(&default_taxonomy()), vec![]);
    }

    #[test]
    fn purpose_classes_are_the_triple() {
        let tax = default_taxonomy();
        let ids: Vec<&str> = tax.classes_of("purpose_of_investigation").map(|c| c.id.as_str()).collect();
        assert_eq!(ids, ["characterization", "validation", "verification"]);
        assert!(tax
            .relations
            .iter()
            .any(|r| r.from == "purpose_of_investigation" && r.to == "test_criteria"));
    }

    #[test]
    fn relation_cycle_detected() {
        let mut tax = default_taxonomy();
        tax.relations.push(CategoryRelation {
            from: "test_criteria".into(),
            to: "purpose_of_investigation".into(),
            compatible: Vec::new(),
        });
        let diags = check_taxonomy(&tax);
        assert!(diags.iter().any(|d| d.code == codes::E_CYCLE), "{diags:?}");
    }

    #[test]
    fn unknown_class_in_pair() {
        let mut tax = default_taxonomy();
        tax.relations[0].compatible.push(("characterization".into(), "nonsense".into()));
        let diags = check_taxonomy(&tax);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, codes::E_REF);
    }

    #[test]
    fn capability_satisfies_bound() {
        let r = req("test_setup", "controller_hil", alloc::vec![at_least(500.0)]);
        let m = matches(DEFAULT_TAXONOMY_ID, &hil_profile(1000.0), &r).unwrap();
        assert!(m.satisfied, "{:?}", m.explanation);
        let m = matches(DEFAULT_TAXONOMY_ID, &hil_profile(200.0), &r).unwrap();
        assert!(!m.satisfied);
        assert!(m.explanation.iter().any(|l| l.contains("fail")));
    }

    #[test]
    fn vacuous_constraints() {
        let r = req("test_setup", "controller_hil", Vec::new());
        assert!(matches(DEFAULT_TAXONOMY_ID, &hil_profile(1.0), &r).unwrap().satisfied);
    }

    #[test]
    fn absent_class_explained() {
        let mut p = hil_profile(1000.0);
        p.capabilities[0].class = "physical_lab".into();
        let r = req("test_setup", "controller_hil", Vec::new());
        let m = matches(DEFAULT_TAXONOMY_ID, &p, &r).unwrap();
        assert!(!m.satisfied);
        assert_eq!(m.explanation, ["class controller_hil absent"]);
    }

    #[test]
    fn taxonomy_mismatch() {
        let r = req("test_setup", "controller_hil", Vec::new());
        let e = matches("other", &hil_profile(1.0), &r).unwrap_err();
        assert!(e.has_code(codes::E_TAXONOMY_MISMATCH));
    }

    #[test]
    fn set_membership_constraint() {
        let mut p = hil_profile(1.0);
        p.capabilities[0].attributes.insert("real_time".into(), Scalar::Bool(true));
        let r = req(
            "test_setup",
            "controller_hil",
            alloc::vec![AttributeConstraint {
                attribute: "real_time".into(),
                predicate: ConstraintOp::In,
                value: ConstraintValue::Many(alloc::vec![Scalar::Bool(true)]),
            }],
        );
        assert!(matches(DEFAULT_TAXONOMY_ID, &p, &r).unwrap().satisfied);
    }

    #[test]
    fn compatibility_rules() {
        let tax = default_taxonomy();
        let reqs = alloc::vec![
            req("purpose_of_investigation", "characterization", Vec::new()),
            req("test_criteria", "sweep_metric", Vec::new()),
        ];
        assert_eq!(consistent_test(&reqs, &tax.relations), vec![]);

        let mut emptied = tax.relations.clone();
        emptied[0].compatible.clear();
        let diags = consistent_test(&reqs, &emptied);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, codes::E_INCOMPATIBLE);

        let unrelated = alloc::vec![
            req("purpose_of_investigation", "characterization", Vec::new()),
            req("interfaces", "model_parameters", Vec::new()),
        ];
        assert_eq!(consistent_test(&unrelated, &tax.relations), vec![]);
    }

    #[test]
    fn fixture_requirements_and_profiles_validate() {
        let tax = default_taxonomy();
        for st in scenario::agc_decomposition().subtests {
            for (i, r) in st.requirements.iter().enumerate() {
                assert_eq!(validate_requirement(r, &tax, &format!("/{i}")), vec![]);
            }
            assert_eq!(consistent_test(&st.requirements, &tax.relations), vec![]);
        }
        for p in scenario::agc_profiles() {
            assert_eq!(validate_profile(&p, &tax), vec![]);
        }
    }
}
