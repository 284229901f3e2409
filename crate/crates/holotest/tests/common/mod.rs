//! Strategies generating arbitrary, structurally complete documents.

#![allow(dead_code)]

pub mod oracle;

use std::collections::BTreeMap;

use holotest::specio;
use holotest_core::model::*;
use proptest::collection::{btree_map, vec};
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

/// Runner with a fixed seed, so reruns draw the same cases.
pub fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

/// `n` deterministic draws from `s`.
pub fn sample<S: Strategy>(s: &S, n: usize) -> Vec<S::Value> {
    let mut runner = runner(1);
    (0..n).map(|_| s.new_tree(&mut runner).expect("strategy").current()).collect()
}

/// Serialize, parse back, compare, and serialize again.
pub fn roundtrip_case(kind: DocumentKind, doc: &Document) -> Result<(), TestCaseError> {
    let bytes = specio::serialize(doc);
    let parsed = specio::parse(&bytes, kind);
    if parsed.diagnostics.iter().any(|d| d.is_error()) {
        return Err(TestCaseError::fail(format!(
            "{:?}\n{}",
            parsed.diagnostics,
            String::from_utf8_lossy(&bytes)
        )));
    }
    let back = parsed.document.expect("document without errors");
    if &back != doc {
        return Err(TestCaseError::fail(format!("{back:?} != {doc:?}")));
    }
    if specio::serialize(&back) != bytes {
        return Err(TestCaseError::fail("serialization not deterministic"));
    }
    Ok(())
}

pub fn id() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9_]{0,8}"
}

pub fn text() -> impl Strategy<Value = String> {
    "\\PC{0,16}"
}

pub fn number() -> impl Strategy<Value = f64> {
    prop_oneof![
        6 => any::<f64>().prop_filter("finite", |v| v.is_finite()),
        2 => (-1000i32..1000).prop_map(f64::from),
        1 => Just(0.1),
        1 => prop_oneof![Just(f64::INFINITY), Just(f64::NEG_INFINITY)],
    ]
}

pub fn ids() -> impl Strategy<Value = Vec<Id>> {
    vec(id(), 0..4)
}

pub fn quantity() -> impl Strategy<Value = Quantity> {
    (number(), proptest::option::of("[a-zA-Z.%/]{1,4}")).prop_map(|(value, unit)| Quantity { value, unit })
}

pub fn scalar() -> impl Strategy<Value = Scalar> {
    prop_oneof![
        quantity().prop_map(Scalar::Number),
        text().prop_map(Scalar::Text),
        any::<bool>().prop_map(Scalar::Bool),
    ]
}

pub fn attrs() -> impl Strategy<Value = Attributes> {
    btree_map(id(), scalar(), 0..4)
}

pub fn metrics() -> impl Strategy<Value = BTreeMap<Id, f64>> {
    btree_map(id(), number(), 0..4)
}

pub fn domains() -> impl Strategy<Value = Vec<DomainTag>> {
    vec(id().prop_map(DomainTag), 0..3)
}

pub fn doc_ref() -> impl Strategy<Value = DocRef> {
    ("[a-z][a-z0-9_./]{0,12}", id()).prop_map(|(path, id)| DocRef { path, id })
}

pub fn system_configuration() -> impl Strategy<Value = SystemConfiguration> {
    let component = (id(), text(), 0usize..3, domains(), attrs()).prop_map(|(id, name, k, domains, attributes)| {
        Component {
            id,
            name,
            kind: ComponentKind::ALL[k],
            domains,
            attributes,
        }
    });
    let connection = (id(), id(), id(), id(), attrs()).prop_map(|(id, from, to, d, attributes)| Connection {
        id,
        from,
        to,
        domain: DomainTag(d),
        attributes,
    });
    let function = (id(), text(), ids()).prop_map(|(id, name, actors)| FunctionDef { id, name, actors });
    (id(), vec(component, 0..4), vec(connection, 0..4), vec(function, 0..3)).prop_map(
        |(id, components, connections, functions)| SystemConfiguration {
            id,
            components,
            connections,
            functions,
        },
    )
}

pub fn criteria() -> impl Strategy<Value = TestCriteria> {
    let target = (id(), id(), text(), proptest::option::of(text())).prop_map(|(id, metric, description, combination)| {
        TargetCriterion {
            id,
            metric,
            description,
            combination,
        }
    });
    let range = prop_oneof![
        (number(), number()).prop_map(|(lo, hi)| VariabilityRange::Interval { lo, hi }),
        vec(scalar(), 0..3).prop_map(VariabilityRange::Enumerated),
    ];
    let variability = (id(), "[a-z_]{1,6}\\.[a-z_]{1,6}", range).prop_map(|(id, parameter, range)| {
        VariabilityAttribute { id, parameter, range }
    });
    let quality = (id(), id(), 0usize..4, quantity()).prop_map(|(id, target_ref, p, threshold)| QualityAttribute {
        id,
        target_ref,
        predicate: Comparison::ALL[p],
        threshold,
    });
    (vec(target, 0..3), vec(variability, 0..2), vec(quality, 0..2)).prop_map(|(target, variability, quality)| {
        TestCriteria {
            target,
            variability,
            quality,
        }
    })
}

pub fn scope() -> impl Strategy<Value = TestScope> {
    let sut = (ids(), ids(), ids()).prop_map(|(components, inputs, outputs)| SystemUnderTest {
        components,
        inputs,
        outputs,
    });
    let poi = (0usize..3, text()).prop_map(|(k, statement)| Poi {
        kind: PoiKind::ALL[k],
        statement,
    });
    (text(), sut, ids(), domains(), ids(), ids(), poi, criteria()).prop_map(
        |(narrative, sut, oui, doi, fut, fui, poi, criteria)| TestScope {
            narrative,
            sut,
            oui,
            doi,
            fut,
            fui,
            poi,
            criteria,
        },
    )
}

pub fn test_case() -> impl Strategy<Value = HolisticTestCase> {
    let sc = prop_oneof![
        Just(None),
        doc_ref().prop_map(|r| Some(ScSource::Ref(r))),
        system_configuration().prop_map(|sc| Some(ScSource::Inline(sc))),
    ];
    (id(), sc, scope()).prop_map(|(id, system_configuration, scope)| HolisticTestCase {
        id,
        system_configuration,
        scope,
    })
}

pub fn subtest() -> impl Strategy<Value = SubTest> {
    let value = prop_oneof![
        scalar().prop_map(ConstraintValue::One),
        vec(scalar(), 0..3).prop_map(ConstraintValue::Many),
    ];
    let constraint = (id(), 0usize..6, value).prop_map(|(attribute, p, value)| AttributeConstraint {
        attribute,
        predicate: ConstraintOp::ALL[p],
        value,
    });
    let requirement = (id(), id(), vec(constraint, 0..2)).prop_map(|(category, class, attribute_constraints)| {
        Requirement {
            category,
            class,
            attribute_constraints,
        }
    });
    let port = (id(), any::<bool>(), id(), id(), any::<bool>(), proptest::option::of(any::<u32>())).prop_map(
        |(id, produces, artifact_type, peer, iterative, max_iterations)| InterfacePort {
            id,
            direction: if produces {
                PortDirection::Produces
            } else {
                PortDirection::Consumes
            },
            artifact_type,
            peer,
            iterative,
            max_iterations,
        },
    );
    let executor = (0usize..3, attrs(), proptest::option::of(any::<u64>())).prop_map(|(k, params, seed)| {
        ExecutorSpec {
            kind: ExecutorKind::ALL[k],
            params,
            seed,
        }
    });
    (id(), id(), scope(), vec(requirement, 0..3), vec(port, 0..3), executor).prop_map(
        |(id, parent, scope, requirements, interfaces, executor)| SubTest {
            id,
            parent,
            scope,
            requirements,
            interfaces,
            executor,
        },
    )
}

pub fn subtest_set() -> impl Strategy<Value = Decomposition> {
    (id(), id(), id(), vec(subtest(), 0..3)).prop_map(|(id, parent, taxonomy, subtests)| Decomposition {
        id,
        parent,
        taxonomy,
        subtests,
    })
}

pub fn profile() -> impl Strategy<Value = RiProfile> {
    let cap = (id(), id(), attrs()).prop_map(|(category, class, attributes)| Capability {
        category,
        class,
        attributes,
    });
    (id(), text(), id(), vec(cap, 0..4), number()).prop_map(|(id, name, taxonomy, capabilities, cost)| RiProfile {
        id,
        name,
        taxonomy,
        capabilities,
        cost,
    })
}

pub fn plan() -> impl Strategy<Value = MappingPlan> {
    let edge = (id(), id(), id(), any::<bool>()).prop_map(|(producer, consumer, artifact_type, iterative)| DagEdge {
        producer,
        consumer,
        artifact_type,
        iterative,
    });
    let group = (ids(), any::<u32>()).prop_map(|(members, max_iterations)| IterationGroup {
        members,
        max_iterations,
    });
    let stage = (ids(), vec(group, 0..2)).prop_map(|(subtests, groups)| Stage { subtests, groups });
    (
        id(),
        doc_ref(),
        doc_ref(),
        number(),
        btree_map(id(), id(), 0..4),
        vec(edge, 0..4),
        vec(stage, 0..3),
        number(),
    )
        .prop_map(
            |(id, test_case, subtest_set, lambda, assignment, dag, stages, total_cost)| MappingPlan {
                id,
                test_case,
                subtest_set,
                lambda,
                assignment,
                dag,
                stages,
                total_cost,
            },
        )
}

pub fn result_set() -> impl Strategy<Value = ResultSet> {
    let record = (
        id(),
        id(),
        metrics(),
        btree_map(id(), "[a-z/._]{1,10}", 0..3),
        0usize..3,
        proptest::option::of(text()),
    )
        .prop_map(|(subtest_id, ri_id, metrics, artifacts, s, message)| ResultRecord {
            subtest_id,
            ri_id,
            metrics,
            artifacts,
            status: RecordStatus::ALL[s],
            message,
        });
    let sample = (number(), metrics(), any::<bool>()).prop_map(|(value, metrics, quality_pass)| SweepSample {
        value,
        metrics,
        quality_pass,
    });
    let characterization = (
        id(),
        id(),
        text(),
        id(),
        any::<bool>(),
        vec(sample, 0..3),
        proptest::option::of(number()),
    )
        .prop_map(
            |(subtest_id, variability_id, parameter, quality_id, grid, samples, boundary)| CharacterizationRecord {
                subtest_id,
                variability_id,
                parameter,
                quality_id,
                mode: if grid { SweepMode::Grid } else { SweepMode::Bisection },
                samples,
                boundary,
            },
        );
    let outcome = any::<bool>().prop_map(Outcome::from_bool);
    let overall = prop_oneof![
        Just(None),
        outcome.clone().prop_map(|o| Some(Overall::Verdict(o))),
        btree_map(id(), proptest::option::of(number()), 0..3).prop_map(|m| Some(Overall::Characterization(m))),
    ];
    let verdict = (
        id(),
        btree_map(id(), proptest::option::of(number()), 0..3),
        btree_map(id(), outcome, 0..3),
        overall,
        btree_map(id(), ids(), 0..3),
    )
        .prop_map(|(test_case, targets, quality, overall, provenance)| HolisticVerdict {
            test_case,
            targets,
            quality,
            overall,
            provenance,
        });
    (id(), vec(record, 0..3), vec(characterization, 0..2), proptest::option::of(verdict)).prop_map(
        |(id, records, characterizations, verdict)| ResultSet {
            id,
            records,
            characterizations,
            verdict,
        },
    )
}

pub fn taxonomy() -> impl Strategy<Value = Taxonomy> {
    let category = (id(), text()).prop_map(|(id, description)| Category { id, description });
    let ty = prop_oneof![
        Just(AttributeType::Numeric),
        Just(AttributeType::Text),
        Just(AttributeType::Bool),
    ];
    let class = (id(), id(), text(), btree_map(id(), ty, 0..3)).prop_map(|(id, category, description, attribute_schema)| {
        Class {
            id,
            category,
            description,
            attribute_schema,
        }
    });
    let relation = (id(), id(), vec((id(), id()), 0..3)).prop_map(|(from, to, compatible)| CategoryRelation {
        from,
        to,
        compatible,
    });
    (id(), vec(category, 0..4), vec(class, 0..4), vec(relation, 0..3)).prop_map(
        |(id, categories, classes, relations)| Taxonomy {
            id,
            categories,
            classes,
            relations,
        },
    )
}

/// Every document kind, tagged.
pub fn document(kind: DocumentKind) -> BoxedStrategy<Document> {
    match kind {
        DocumentKind::SystemConfiguration => system_configuration().prop_map(Document::SystemConfiguration).boxed(),
        DocumentKind::TestCase => test_case().prop_map(Document::TestCase).boxed(),
        DocumentKind::SubtestSet => subtest_set().prop_map(Document::SubtestSet).boxed(),
        DocumentKind::RiProfile => profile().prop_map(Document::RiProfile).boxed(),
        DocumentKind::Plan => plan().prop_map(Document::Plan).boxed(),
        DocumentKind::ResultSet => result_set().prop_map(Document::ResultSet).boxed(),
        DocumentKind::Taxonomy => taxonomy().prop_map(Document::Taxonomy).boxed(),
    }
}

fn fmt_attrs(a: &Attributes) -> String {
    let parts: Vec<String> = a.iter().map(|(k, v)| format!("{k}={v}")).collect();
    parts.join(" ")
}

/// Plain-text digest of what a test case says, one item per line.
pub fn summary(tc: &HolisticTestCase) -> String {
    let sc = tc.inline_sc().expect("configuration inlined");
    let s = &tc.scope;
    let mut out = String::new();
    let mut line = |l: String| {
        out.push_str(l.trim_end());
        out.push('\n');
    };
    line(format!("test_case {}", tc.id));
    line(format!("poi {}", s.poi.kind.as_str()));
    for c in &s.sut.components {
        let comp = sc.component(c).expect("SuT component");
        line(format!("sut {c} \"{}\" {}", comp.name, fmt_attrs(&comp.attributes)));
    }
    for c in &s.oui {
        line(format!("oui {c} \"{}\"", sc.component(c).expect("OuI component").name));
    }
    let doi: Vec<&str> = s.doi.iter().map(DomainTag::as_str).collect();
    line(format!("doi {}", doi.join(" ")));
    for f in &s.fut {
        line(format!("fut {f}"));
    }
    for f in &s.fui {
        line(format!("fui {f} \"{}\"", sc.function(f).expect("FuI function").name));
    }
    for t in &s.criteria.target {
        line(format!(
            "target {} {} \"{}\" = {}",
            t.id,
            t.metric,
            t.description,
            t.combination.as_deref().unwrap_or("-")
        ));
    }
    for v in &s.criteria.variability {
        let range = match &v.range {
            VariabilityRange::Interval { lo, hi } => format!("[{lo}, {hi}]"),
            VariabilityRange::Enumerated(vs) => {
                let parts: Vec<String> = vs.iter().map(ToString::to_string).collect();
                format!("{{{}}}", parts.join(", "))
            }
        };
        line(format!("variability {} {} {range}", v.id, v.parameter));
    }
    for q in &s.criteria.quality {
        line(format!("quality {} {} {} {}", q.id, q.target_ref, q.predicate.as_str(), Scalar::Number(q.threshold.clone())));
    }
    out
}
