//! Reading and writing `*.holo.json` documents.
//!
//! Decoding walks a [`serde_json::Value`] tree and keeps going after the
//! first problem, so one pass reports every schema violation. Encoding emits
//! keys in a fixed order, two-space indentation and shortest round-trip
//! numbers, making the output a pure function of the model.

use std::collections::BTreeMap;

use holotest_core::diag::{codes, Diagnostic};
use holotest_core::model::*;
use serde_json::{Map, Value};

pub const FORMAT_VERSION: &str = "1";

/// Result of [`parse`]: a document iff no error diagnostic was raised.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed {
    pub document: Option<Document>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Typed access to one document kind.
pub trait Doc: Sized {
    const KIND: DocumentKind;
    fn encode_body(&self, out: &mut Map<String, Value>);
    fn from_document(doc: Document) -> Option<Self>;
    fn doc_id(&self) -> &str;
}

macro_rules! doc_impl {
    ($ty:ty, $variant:ident, $enc:ident) => {
        impl Doc for $ty {
            const KIND: DocumentKind = DocumentKind::$variant;
            fn encode_body(&self, out: &mut Map<String, Value>) {
                $enc(self, out)
            }
            fn from_document(doc: Document) -> Option<Self> {
                match doc {
                    Document::$variant(d) => Some(d),
                    _ => None,
                }
            }
            fn doc_id(&self) -> &str {
                &self.id
            }
        }
    };
}

doc_impl!(SystemConfiguration, SystemConfiguration, enc_sc);
doc_impl!(HolisticTestCase, TestCase, enc_test_case);
doc_impl!(Decomposition, SubtestSet, enc_subtest_set);
doc_impl!(RiProfile, RiProfile, enc_profile);
doc_impl!(MappingPlan, Plan, enc_plan);
doc_impl!(ResultSet, ResultSet, enc_result_set);
doc_impl!(Taxonomy, Taxonomy, enc_taxonomy);

/// Parses `bytes` as a document of `kind`.
pub fn parse(bytes: &[u8], kind: DocumentKind) -> Parsed {
    let mut cx = Cx::default();
    let document = root(&mut cx, bytes).and_then(|v| decode_kind(&mut cx, &v, kind));
    let (document, diagnostics) = cx.finish(document);
    Parsed { document, diagnostics }
}

/// Parses a document whose kind is read from its `kind` field.
pub fn parse_any(bytes: &[u8]) -> Parsed {
    let mut cx = Cx::default();
    let document = root(&mut cx, bytes).and_then(|v| {
        let o = cx.obj(&v, "")?;
        let text = cx.string(&o, "kind")?;
        match DocumentKind::parse(&text) {
            Some(kind) => decode_kind(&mut cx, &v, kind),
            None => {
                cx.schema("/kind", format!("unknown document kind '{text}'; allowed values: {}", kind_names()));
                None
            }
        }
    });
    let (document, diagnostics) = cx.finish(document);
    Parsed { document, diagnostics }
}

/// Parses a document of type `T`, returning its warnings alongside.
pub fn parse_as<T: Doc>(bytes: &[u8]) -> Result<(T, Vec<Diagnostic>), Vec<Diagnostic>> {
    let parsed = parse(bytes, T::KIND);
    match parsed.document.and_then(T::from_document) {
        Some(doc) => Ok((doc, parsed.diagnostics)),
        None => Err(parsed.diagnostics),
    }
}

pub fn serialize(doc: &Document) -> Vec<u8> {
    match doc {
        Document::SystemConfiguration(d) => to_bytes(d),
        Document::TestCase(d) => to_bytes(d),
        Document::SubtestSet(d) => to_bytes(d),
        Document::RiProfile(d) => to_bytes(d),
        Document::Plan(d) => to_bytes(d),
        Document::ResultSet(d) => to_bytes(d),
        Document::Taxonomy(d) => to_bytes(d),
    }
}

/// Canonical bytes of a typed document.
pub fn to_bytes<T: Doc>(doc: &T) -> Vec<u8> {
    let mut m = Map::new();
    m.insert("kind".into(), T::KIND.as_str().into());
    m.insert("version".into(), FORMAT_VERSION.into());
    doc.encode_body(&mut m);
    canonical(&Value::Object(m))
}

/// Canonical bytes of an exchanged artifact.
pub fn artifact_to_bytes(a: &Artifact) -> Vec<u8> {
    let mut m = Map::new();
    m.insert("artifact_type".into(), a.artifact_type.clone().into());
    m.insert("producer".into(), a.producer.clone().into());
    m.insert("iteration".into(), a.iteration.into());
    m.insert("payload".into(), enc_attrs(&a.payload));
    canonical(&Value::Object(m))
}

pub fn parse_artifact(bytes: &[u8]) -> Result<Artifact, Vec<Diagnostic>> {
    let mut cx = Cx::default();
    let art = root(&mut cx, bytes).and_then(|v| {
        let o = cx.obj(&v, "")?;
        cx.known(&o, &["artifact_type", "producer", "iteration", "payload"]);
        let artifact_type = cx.string(&o, "artifact_type");
        let producer = cx.string(&o, "producer");
        let iteration = cx.u32(&o, "iteration");
        let payload = cx.attrs(&o, "payload");
        Some(Artifact {
            artifact_type: artifact_type?,
            payload: payload?,
            producer: producer?,
            iteration: iteration?,
        })
    });
    let (art, diags) = cx.finish(art);
    art.ok_or(diags)
}

fn canonical(v: &Value) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("in-memory JSON encoding");
    out.push(b'\n');
    out
}

fn kind_names() -> String {
    DocumentKind::ALL.iter().map(|k| k.as_str()).collect::<Vec<_>>().join(", ")
}

// ---- encoding ----

fn num(v: f64) -> Value {
    if v.is_finite() {
        Value::from(v)
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn opt_num(v: Option<f64>) -> Value {
    v.map_or(Value::Null, num)
}

fn ids(xs: &[Id]) -> Value {
    Value::Array(xs.iter().map(|x| Value::from(x.as_str())).collect())
}

fn enc_quantity(q: &Quantity) -> Value {
    let mut m = Map::new();
    m.insert("value".into(), num(q.value));
    if let Some(u) = &q.unit {
        m.insert("unit".into(), u.clone().into());
    }
    Value::Object(m)
}

fn enc_scalar(s: &Scalar) -> Value {
    match s {
        Scalar::Number(q) if q.unit.is_none() && q.value.is_finite() => num(q.value),
        Scalar::Number(q) => enc_quantity(q),
        Scalar::Text(t) => t.clone().into(),
        Scalar::Bool(b) => (*b).into(),
    }
}

fn enc_attrs(a: &Attributes) -> Value {
    Value::Object(a.iter().map(|(k, v)| (k.clone(), enc_scalar(v))).collect())
}

fn enc_metrics(m: &BTreeMap<Id, f64>) -> Value {
    Value::Object(m.iter().map(|(k, v)| (k.clone(), num(*v))).collect())
}

fn doc_ref(r: &DocRef) -> Value {
    let mut m = Map::new();
    m.insert("$ref".into(), r.to_string().into());
    Value::Object(m)
}

fn obj(f: impl FnOnce(&mut Map<String, Value>)) -> Value {
    let mut m = Map::new();
    f(&mut m);
    Value::Object(m)
}

fn enc_sc(sc: &SystemConfiguration, m: &mut Map<String, Value>) {
    m.insert("id".into(), sc.id.clone().into());
    let comps = sc.components.iter().map(|c| {
        obj(|o| {
            o.insert("id".into(), c.id.clone().into());
            o.insert("name".into(), c.name.clone().into());
            o.insert("kind".into(), c.kind.as_str().into());
            o.insert("domains".into(), Value::Array(c.domains.iter().map(|d| d.as_str().into()).collect()));
            o.insert("attributes".into(), enc_attrs(&c.attributes));
        })
    });
    m.insert("components".into(), Value::Array(comps.collect()));
    let conns = sc.connections.iter().map(|c| {
        obj(|o| {
            o.insert("id".into(), c.id.clone().into());
            o.insert("from".into(), c.from.clone().into());
            o.insert("to".into(), c.to.clone().into());
            o.insert("domain".into(), c.domain.as_str().into());
            o.insert("attributes".into(), enc_attrs(&c.attributes));
        })
    });
    m.insert("connections".into(), Value::Array(conns.collect()));
    let funcs = sc.functions.iter().map(|f| {
        obj(|o| {
            o.insert("id".into(), f.id.clone().into());
            o.insert("name".into(), f.name.clone().into());
            o.insert("actors".into(), ids(&f.actors));
        })
    });
    m.insert("functions".into(), Value::Array(funcs.collect()));
}

fn enc_scope(s: &TestScope, m: &mut Map<String, Value>) {
    m.insert("narrative".into(), s.narrative.clone().into());
    m.insert(
        "sut".into(),
        obj(|o| {
            o.insert("components".into(), ids(&s.sut.components));
            o.insert("inputs".into(), ids(&s.sut.inputs));
            o.insert("outputs".into(), ids(&s.sut.outputs));
        }),
    );
    m.insert("oui".into(), ids(&s.oui));
    m.insert("doi".into(), Value::Array(s.doi.iter().map(|d| d.as_str().into()).collect()));
    m.insert("fut".into(), ids(&s.fut));
    m.insert("fui".into(), ids(&s.fui));
    m.insert(
        "poi".into(),
        obj(|o| {
            o.insert("kind".into(), s.poi.kind.as_str().into());
            o.insert("statement".into(), s.poi.statement.clone().into());
        }),
    );
    let c = &s.criteria;
    m.insert(
        "criteria".into(),
        obj(|o| {
            let targets = c.target.iter().map(|t| {
                obj(|x| {
                    x.insert("id".into(), t.id.clone().into());
                    x.insert("metric".into(), t.metric.clone().into());
                    x.insert("description".into(), t.description.clone().into());
                    if let Some(e) = &t.combination {
                        x.insert("combination".into(), e.clone().into());
                    }
                })
            });
            o.insert("target".into(), Value::Array(targets.collect()));
            let vars = c.variability.iter().map(|v| {
                obj(|x| {
                    x.insert("id".into(), v.id.clone().into());
                    x.insert("parameter".into(), v.parameter.clone().into());
                    let range = match &v.range {
                        VariabilityRange::Interval { lo, hi } => obj(|r| {
                            r.insert("lo".into(), num(*lo));
                            r.insert("hi".into(), num(*hi));
                        }),
                        VariabilityRange::Enumerated(vals) => Value::Array(vals.iter().map(enc_scalar).collect()),
                    };
                    x.insert("range".into(), range);
                })
            });
            o.insert("variability".into(), Value::Array(vars.collect()));
            let quality = c.quality.iter().map(|q| {
                obj(|x| {
                    x.insert("id".into(), q.id.clone().into());
                    x.insert("target_ref".into(), q.target_ref.clone().into());
                    x.insert("predicate".into(), q.predicate.as_str().into());
                    x.insert("threshold".into(), enc_quantity(&q.threshold));
                })
            });
            o.insert("quality".into(), Value::Array(quality.collect()));
        }),
    );
}

fn enc_test_case(tc: &HolisticTestCase, m: &mut Map<String, Value>) {
    m.insert("id".into(), tc.id.clone().into());
    match &tc.system_configuration {
        Some(ScSource::Inline(sc)) => {
            m.insert("system_configuration".into(), obj(|o| enc_sc(sc, o)));
        }
        Some(ScSource::Ref(r)) => {
            m.insert("system_configuration".into(), doc_ref(r));
        }
        None => {}
    }
    enc_scope(&tc.scope, m);
}

fn enc_value(v: &ConstraintValue) -> Value {
    match v {
        ConstraintValue::One(s) => enc_scalar(s),
        ConstraintValue::Many(xs) => Value::Array(xs.iter().map(enc_scalar).collect()),
    }
}

fn enc_subtest(st: &SubTest) -> Value {
    obj(|m| {
        m.insert("id".into(), st.id.clone().into());
        m.insert("parent".into(), st.parent.clone().into());
        enc_scope(&st.scope, m);
        let reqs = st.requirements.iter().map(|r| {
            obj(|o| {
                o.insert("category".into(), r.category.clone().into());
                o.insert("class".into(), r.class.clone().into());
                let cons = r.attribute_constraints.iter().map(|c| {
                    obj(|x| {
                        x.insert("attribute".into(), c.attribute.clone().into());
                        x.insert("predicate".into(), c.predicate.as_str().into());
                        x.insert("value".into(), enc_value(&c.value));
                    })
                });
                o.insert("attribute_constraints".into(), Value::Array(cons.collect()));
            })
        });
        m.insert("requirements".into(), Value::Array(reqs.collect()));
        let ports = st.interfaces.iter().map(|p| {
            obj(|o| {
                o.insert("id".into(), p.id.clone().into());
                o.insert("direction".into(), p.direction.as_str().into());
                o.insert("artifact_type".into(), p.artifact_type.clone().into());
                o.insert("peer".into(), p.peer.clone().into());
                o.insert("iterative".into(), p.iterative.into());
                if let Some(n) = p.max_iterations {
                    o.insert("max_iterations".into(), n.into());
                }
            })
        });
        m.insert("interfaces".into(), Value::Array(ports.collect()));
        m.insert(
            "executor".into(),
            obj(|o| {
                o.insert("kind".into(), st.executor.kind.as_str().into());
                o.insert("params".into(), enc_attrs(&st.executor.params));
                if let Some(s) = st.executor.seed {
                    o.insert("seed".into(), s.into());
                }
            }),
        );
    })
}

fn enc_subtest_set(d: &Decomposition, m: &mut Map<String, Value>) {
    m.insert("id".into(), d.id.clone().into());
    m.insert("parent".into(), d.parent.clone().into());
    m.insert("taxonomy".into(), d.taxonomy.clone().into());
    m.insert("subtests".into(), Value::Array(d.subtests.iter().map(enc_subtest).collect()));
}

fn enc_profile(p: &RiProfile, m: &mut Map<String, Value>) {
    m.insert("id".into(), p.id.clone().into());
    m.insert("name".into(), p.name.clone().into());
    m.insert("taxonomy".into(), p.taxonomy.clone().into());
    let caps = p.capabilities.iter().map(|c| {
        obj(|o| {
            o.insert("category".into(), c.category.clone().into());
            o.insert("class".into(), c.class.clone().into());
            o.insert("attributes".into(), enc_attrs(&c.attributes));
        })
    });
    m.insert("capabilities".into(), Value::Array(caps.collect()));
    m.insert("cost".into(), num(p.cost));
}

fn enc_plan(p: &MappingPlan, m: &mut Map<String, Value>) {
    m.insert("id".into(), p.id.clone().into());
    m.insert("test_case".into(), doc_ref(&p.test_case));
    m.insert("subtest_set".into(), doc_ref(&p.subtest_set));
    m.insert("lambda".into(), num(p.lambda));
    m.insert(
        "assignment".into(),
        Value::Object(p.assignment.iter().map(|(k, v)| (k.clone(), v.clone().into())).collect()),
    );
    let dag = p.dag.iter().map(|e| {
        obj(|o| {
            o.insert("producer".into(), e.producer.clone().into());
            o.insert("consumer".into(), e.consumer.clone().into());
            o.insert("artifact_type".into(), e.artifact_type.clone().into());
            o.insert("iterative".into(), e.iterative.into());
        })
    });
    m.insert("dag".into(), Value::Array(dag.collect()));
    let stages = p.stages.iter().map(|s| {
        obj(|o| {
            o.insert("subtests".into(), ids(&s.subtests));
            let groups = s.groups.iter().map(|g| {
                obj(|x| {
                    x.insert("members".into(), ids(&g.members));
                    x.insert("max_iterations".into(), g.max_iterations.into());
                })
            });
            o.insert("groups".into(), Value::Array(groups.collect()));
        })
    });
    m.insert("stages".into(), Value::Array(stages.collect()));
    m.insert("total_cost".into(), num(p.total_cost));
}

fn enc_record(r: &ResultRecord) -> Value {
    obj(|o| {
        o.insert("subtest_id".into(), r.subtest_id.clone().into());
        o.insert("ri_id".into(), r.ri_id.clone().into());
        o.insert("metrics".into(), enc_metrics(&r.metrics));
        o.insert(
            "artifacts".into(),
            Value::Object(r.artifacts.iter().map(|(k, v)| (k.clone(), v.clone().into())).collect()),
        );
        o.insert("status".into(), r.status.as_str().into());
        if let Some(msg) = &r.message {
            o.insert("message".into(), msg.clone().into());
        }
    })
}

fn enc_characterization(c: &CharacterizationRecord) -> Value {
    obj(|o| {
        o.insert("subtest_id".into(), c.subtest_id.clone().into());
        o.insert("variability_id".into(), c.variability_id.clone().into());
        o.insert("parameter".into(), c.parameter.clone().into());
        o.insert("quality_id".into(), c.quality_id.clone().into());
        o.insert("mode".into(), c.mode.as_str().into());
        let samples = c.samples.iter().map(|s| {
            obj(|x| {
                x.insert("value".into(), num(s.value));
                x.insert("metrics".into(), enc_metrics(&s.metrics));
                x.insert("quality_pass".into(), s.quality_pass.into());
            })
        });
        o.insert("samples".into(), Value::Array(samples.collect()));
        if let Some(b) = c.boundary {
            o.insert("boundary".into(), num(b));
        }
    })
}

fn enc_verdict(v: &HolisticVerdict) -> Value {
    obj(|o| {
        o.insert("test_case".into(), v.test_case.clone().into());
        o.insert(
            "targets".into(),
            Value::Object(v.targets.iter().map(|(k, x)| (k.clone(), opt_num(*x))).collect()),
        );
        o.insert(
            "quality".into(),
            Value::Object(v.quality.iter().map(|(k, x)| (k.clone(), x.as_str().into())).collect()),
        );
        match &v.overall {
            Some(Overall::Verdict(out)) => {
                o.insert("overall".into(), obj(|x| {
                    x.insert("verdict".into(), out.as_str().into());
                }));
            }
            Some(Overall::Characterization(b)) => {
                o.insert("overall".into(), obj(|x| {
                    x.insert(
                        "characterization".into(),
                        Value::Object(b.iter().map(|(k, y)| (k.clone(), opt_num(*y))).collect()),
                    );
                }));
            }
            None => {}
        }
        o.insert(
            "provenance".into(),
            Value::Object(v.provenance.iter().map(|(k, xs)| (k.clone(), ids(xs))).collect()),
        );
    })
}

fn enc_result_set(r: &ResultSet, m: &mut Map<String, Value>) {
    m.insert("id".into(), r.id.clone().into());
    m.insert("records".into(), Value::Array(r.records.iter().map(enc_record).collect()));
    m.insert(
        "characterizations".into(),
        Value::Array(r.characterizations.iter().map(enc_characterization).collect()),
    );
    if let Some(v) = &r.verdict {
        m.insert("verdict".into(), enc_verdict(v));
    }
}

fn enc_taxonomy(t: &Taxonomy, m: &mut Map<String, Value>) {
    m.insert("id".into(), t.id.clone().into());
    let cats = t.categories.iter().map(|c| {
        obj(|o| {
            o.insert("id".into(), c.id.clone().into());
            o.insert("description".into(), c.description.clone().into());
        })
    });
    m.insert("categories".into(), Value::Array(cats.collect()));
    let classes = t.classes.iter().map(|c| {
        obj(|o| {
            o.insert("id".into(), c.id.clone().into());
            o.insert("category".into(), c.category.clone().into());
            o.insert("description".into(), c.description.clone().into());
            o.insert(
                "attribute_schema".into(),
                Value::Object(c.attribute_schema.iter().map(|(k, v)| (k.clone(), v.as_str().into())).collect()),
            );
        })
    });
    m.insert("classes".into(), Value::Array(classes.collect()));
    let rels = t.relations.iter().map(|r| {
        obj(|o| {
            o.insert("from".into(), r.from.clone().into());
            o.insert("to".into(), r.to.clone().into());
            let pairs = r.compatible.iter().map(|(a, b)| Value::Array(vec![a.clone().into(), b.clone().into()]));
            o.insert("compatible".into(), Value::Array(pairs.collect()));
        })
    });
    m.insert("relations".into(), Value::Array(rels.collect()));
}

// ---- decoding ----

const POI_KINDS: &[&str] = &["characterization", "validation", "verification"];
const COMPONENT_KINDS: &[&str] = &["physical", "ict", "abstract"];
const COMPARISONS: &[&str] = &["lt", "le", "gt", "ge"];
const CONSTRAINT_OPS: &[&str] = &["eq", "lt", "le", "gt", "ge", "in"];
const DIRECTIONS: &[&str] = &["produces", "consumes"];
const EXECUTOR_KINDS: &[&str] = &["scripted", "model_ict_disturbance", "model_agc_tracking"];
const STATUSES: &[&str] = &["completed", "failed", "iteration_limit"];
const SWEEP_MODES: &[&str] = &["grid", "bisection"];
const OUTCOMES: &[&str] = &["pass", "fail"];
const ATTRIBUTE_TYPES: &[&str] = &["numeric", "text", "bool"];

const SCOPE_FIELDS: &[&str] = &["narrative", "sut", "oui", "doi", "fut", "fui", "poi", "criteria"];

struct Obj<'a> {
    map: &'a Map<String, Value>,
    path: String,
}

impl<'a> Obj<'a> {
    fn at(&self, key: &str) -> String {
        format!("{}/{}", self.path, key)
    }

    fn opt(&self, key: &str) -> Option<&'a Value> {
        self.map.get(key).filter(|v| !v.is_null())
    }
}

#[derive(Default)]
struct Cx {
    diags: Vec<Diagnostic>,
}

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

impl Cx {
    fn finish<T>(mut self, v: Option<T>) -> (Option<T>, Vec<Diagnostic>) {
        if holotest_core::diag::has_errors(&self.diags) {
            return (None, self.diags);
        }
        if v.is_none() {
            self.schema("", "document could not be decoded");
            return (None, self.diags);
        }
        (v, self.diags)
    }

    fn schema(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.diags.push(Diagnostic::new(codes::E_SCHEMA, path, message));
    }

    fn obj<'a>(&mut self, v: &'a Value, path: &str) -> Option<Obj<'a>> {
        match v.as_object() {
            Some(map) => Some(Obj { map, path: path.into() }),
            None => {
                self.schema(path, format!("expected an object, found {}", type_name(v)));
                None
            }
        }
    }

    fn req<'a>(&mut self, o: &Obj<'a>, key: &str) -> Option<&'a Value> {
        let v = o.opt(key);
        if v.is_none() {
            self.schema(o.at(key), format!("missing required field '{key}'"));
        }
        v
    }

    fn child<'a>(&mut self, o: &Obj<'a>, key: &str) -> Option<Obj<'a>> {
        let v = self.req(o, key)?;
        self.obj(v, &o.at(key))
    }

    fn known(&mut self, o: &Obj<'_>, keys: &[&str]) {
        for k in o.map.keys() {
            if !keys.contains(&k.as_str()) {
                self.diags.push(Diagnostic::new(
                    codes::W_UNKNOWN_FIELD,
                    o.at(k),
                    format!("unknown field '{k}' ignored"),
                ));
            }
        }
    }

    fn as_string(&mut self, v: &Value, path: &str) -> Option<String> {
        match v.as_str() {
            Some(s) => Some(s.into()),
            None => {
                self.schema(path, format!("expected a string, found {}", type_name(v)));
                None
            }
        }
    }

    fn string(&mut self, o: &Obj<'_>, key: &str) -> Option<String> {
        let v = self.req(o, key)?;
        self.as_string(v, &o.at(key))
    }

    fn string_or(&mut self, o: &Obj<'_>, key: &str, default: &str) -> Option<String> {
        match o.opt(key) {
            Some(v) => self.as_string(v, &o.at(key)),
            None => Some(default.into()),
        }
    }

    fn opt_string(&mut self, o: &Obj<'_>, key: &str) -> Option<Option<String>> {
        match o.opt(key) {
            Some(v) => self.as_string(v, &o.at(key)).map(Some),
            None => Some(None),
        }
    }

    fn as_number(&mut self, v: &Value, path: &str) -> Option<f64> {
        match v {
            Value::Number(n) => n.as_f64(),
            Value::String(s) if s == "inf" => Some(f64::INFINITY),
            Value::String(s) if s == "-inf" => Some(f64::NEG_INFINITY),
            Value::String(s) if s == "nan" => Some(f64::NAN),
            _ => {
                self.schema(path, format!("expected a number, found {}", type_name(v)));
                None
            }
        }
    }

    fn number(&mut self, o: &Obj<'_>, key: &str) -> Option<f64> {
        let v = self.req(o, key)?;
        self.as_number(v, &o.at(key))
    }

    fn opt_number(&mut self, o: &Obj<'_>, key: &str) -> Option<Option<f64>> {
        match o.opt(key) {
            Some(v) => self.as_number(v, &o.at(key)).map(Some),
            None => Some(None),
        }
    }

    fn bool_or(&mut self, o: &Obj<'_>, key: &str, default: bool) -> Option<bool> {
        match o.opt(key) {
            Some(Value::Bool(b)) => Some(*b),
            Some(v) => {
                self.schema(o.at(key), format!("expected a boolean, found {}", type_name(v)));
                None
            }
            None => Some(default),
        }
    }

    fn boolean(&mut self, o: &Obj<'_>, key: &str) -> Option<bool> {
        self.req(o, key)?;
        self.bool_or(o, key, false)
    }

    fn as_u64(&mut self, v: &Value, path: &str) -> Option<u64> {
        match v.as_u64() {
            Some(n) => Some(n),
            None => {
                self.schema(path, format!("expected a non-negative integer, found {}", type_name(v)));
                None
            }
        }
    }

    fn u32(&mut self, o: &Obj<'_>, key: &str) -> Option<u32> {
        let v = self.req(o, key)?;
        self.to_u32(v, &o.at(key))
    }

    fn to_u32(&mut self, v: &Value, path: &str) -> Option<u32> {
        let n = self.as_u64(v, path)?;
        match u32::try_from(n) {
            Ok(n) => Some(n),
            Err(_) => {
                self.schema(path, format!("integer {n} out of range"));
                None
            }
        }
    }

    fn opt_u32(&mut self, o: &Obj<'_>, key: &str) -> Option<Option<u32>> {
        match o.opt(key) {
            Some(v) => self.to_u32(v, &o.at(key)).map(Some),
            None => Some(None),
        }
    }

    fn opt_u64(&mut self, o: &Obj<'_>, key: &str) -> Option<Option<u64>> {
        match o.opt(key) {
            Some(v) => self.as_u64(v, &o.at(key)).map(Some),
            None => Some(None),
        }
    }

    fn enumerated<T>(
        &mut self,
        o: &Obj<'_>,
        key: &str,
        parse: impl Fn(&str) -> Option<T>,
        allowed: &[&str],
    ) -> Option<T> {
        let text = self.string(o, key)?;
        let parsed = parse(&text);
        if parsed.is_none() {
            self.schema(
                o.at(key),
                format!("'{text}' is not a valid {key}; allowed values: {{{}}}", allowed.join(", ")),
            );
        }
        parsed
    }

    fn elements<'a, T>(
        &mut self,
        v: &'a Value,
        path: &str,
        mut f: impl FnMut(&mut Cx, &'a Value, String) -> Option<T>,
    ) -> Option<Vec<T>> {
        let Some(items) = v.as_array() else {
            self.schema(path, format!("expected an array, found {}", type_name(v)));
            return None;
        };
        let mut out = Vec::with_capacity(items.len());
        let mut ok = true;
        for (i, item) in items.iter().enumerate() {
            match f(self, item, format!("{path}/{i}")) {
                Some(x) => out.push(x),
                None => ok = false,
            }
        }
        ok.then_some(out)
    }

    fn list<'a, T>(
        &mut self,
        o: &Obj<'a>,
        key: &str,
        f: impl FnMut(&mut Cx, &'a Value, String) -> Option<T>,
    ) -> Option<Vec<T>> {
        let v = self.req(o, key)?;
        self.elements(v, &o.at(key), f)
    }

    fn list_or_empty<'a, T>(
        &mut self,
        o: &Obj<'a>,
        key: &str,
        f: impl FnMut(&mut Cx, &'a Value, String) -> Option<T>,
    ) -> Option<Vec<T>> {
        match o.opt(key) {
            Some(v) => self.elements(v, &o.at(key), f),
            None => Some(Vec::new()),
        }
    }

    fn id_list(&mut self, o: &Obj<'_>, key: &str) -> Option<Vec<Id>> {
        self.list(o, key, |cx, v, p| cx.as_string(v, &p))
    }

    fn id_list_or_empty(&mut self, o: &Obj<'_>, key: &str) -> Option<Vec<Id>> {
        self.list_or_empty(o, key, |cx, v, p| cx.as_string(v, &p))
    }

    fn map_or_empty<'a, T>(
        &mut self,
        o: &Obj<'a>,
        key: &str,
        mut f: impl FnMut(&mut Cx, &'a Value, String) -> Option<T>,
    ) -> Option<BTreeMap<String, T>> {
        let Some(v) = o.opt(key) else {
            return Some(BTreeMap::new());
        };
        let inner = self.obj(v, &o.at(key))?;
        let mut out = BTreeMap::new();
        let mut ok = true;
        for (k, item) in inner.map {
            match f(self, item, inner.at(k)) {
                Some(x) => {
                    out.insert(k.clone(), x);
                }
                None => ok = false,
            }
        }
        ok.then_some(out)
    }

    fn quantity(&mut self, v: &Value, path: &str) -> Option<Quantity> {
        if let Value::Object(_) = v {
            let o = self.obj(v, path)?;
            self.known(&o, &["value", "unit"]);
            let value = self.number(&o, "value");
            let unit = self.opt_string(&o, "unit");
            return Some(Quantity { value: value?, unit: unit? });
        }
        self.as_number(v, path).map(Quantity::new)
    }

    fn scalar(&mut self, v: &Value, path: &str) -> Option<Scalar> {
        match v {
            Value::Number(_) => self.as_number(v, path).map(Scalar::num),
            Value::String(s) => Some(Scalar::Text(s.clone())),
            Value::Bool(b) => Some(Scalar::Bool(*b)),
            Value::Object(_) => self.quantity(v, path).map(Scalar::Number),
            _ => {
                self.schema(path, format!("expected a scalar, found {}", type_name(v)));
                None
            }
        }
    }

    fn attrs(&mut self, o: &Obj<'_>, key: &str) -> Option<Attributes> {
        self.map_or_empty(o, key, |cx, v, p| cx.scalar(v, &p))
    }

    fn doc_ref(&mut self, o: &Obj<'_>, key: &str) -> Option<DocRef> {
        let r = self.child(o, key)?;
        self.ref_body(&r)
    }

    fn ref_body(&mut self, r: &Obj<'_>) -> Option<DocRef> {
        self.known(r, &["$ref"]);
        let text = self.string(r, "$ref")?;
        let parsed = DocRef::parse(&text);
        if parsed.is_none() {
            self.diags.push(Diagnostic::new(
                codes::E_REF,
                r.at("$ref"),
                format!("malformed reference '{text}'; expected '<path>#<id>'"),
            ));
        }
        parsed
    }
}

fn root(cx: &mut Cx, bytes: &[u8]) -> Option<Value> {
    if let Err(e) = std::str::from_utf8(bytes) {
        cx.diags.push(Diagnostic::new(
            codes::E_SYNTAX,
            "",
            format!("input is not UTF-8 (invalid byte at offset {})", e.valid_up_to()),
        ));
        return None;
    }
    match serde_json::from_slice::<Value>(bytes) {
        Ok(v) => Some(v),
        Err(e) => {
            let line = u32::try_from(e.line()).unwrap_or(u32::MAX);
            let col = u32::try_from(e.column()).unwrap_or(u32::MAX);
            cx.diags
                .push(Diagnostic::new(codes::E_SYNTAX, "", format!("malformed JSON: {e}")).at(line, col));
            None
        }
    }
}

fn decode_kind(cx: &mut Cx, v: &Value, kind: DocumentKind) -> Option<Document> {
    let o = cx.obj(v, "")?;
    if let Some(k) = o.opt("kind") {
        match k.as_str() {
            Some(text) if text == kind.as_str() => {}
            _ => cx.schema("/kind", format!("expected document kind '{kind}', found {k}")),
        }
    }
    if let Some(ver) = o.opt("version") {
        if ver.as_str() != Some(FORMAT_VERSION) {
            cx.schema("/version", format!("unsupported version {ver}; expected \"{FORMAT_VERSION}\""));
        }
    }
    match kind {
        DocumentKind::SystemConfiguration => dec_sc(cx, &o, true).map(Document::SystemConfiguration),
        DocumentKind::TestCase => dec_test_case(cx, &o).map(Document::TestCase),
        DocumentKind::SubtestSet => dec_subtest_set(cx, &o).map(Document::SubtestSet),
        DocumentKind::RiProfile => dec_profile(cx, &o).map(Document::RiProfile),
        DocumentKind::Plan => dec_plan(cx, &o).map(Document::Plan),
        DocumentKind::ResultSet => dec_result_set(cx, &o).map(Document::ResultSet),
        DocumentKind::Taxonomy => dec_taxonomy(cx, &o).map(Document::Taxonomy),
    }
}

fn with_header<'k>(fields: &[&'k str]) -> Vec<&'k str> {
    let mut all = vec!["kind", "version"];
    all.extend_from_slice(fields);
    all
}

fn dec_domains(cx: &mut Cx, o: &Obj<'_>, key: &str) -> Option<Vec<DomainTag>> {
    cx.list(o, key, |cx, v, p| cx.as_string(v, &p).map(DomainTag))
}

fn dec_sc(cx: &mut Cx, o: &Obj<'_>, top: bool) -> Option<SystemConfiguration> {
    let fields = ["id", "components", "connections", "functions"];
    if top {
        cx.known(o, &with_header(&fields));
    } else {
        cx.known(o, &fields);
    }
    let id = cx.string(o, "id");
    let components = cx.list(o, "components", |cx, v, p| {
        let c = cx.obj(v, &p)?;
        cx.known(&c, &["id", "name", "kind", "domains", "attributes"]);
        let id = cx.string(&c, "id");
        let name = cx.string_or(&c, "name", "");
        let kind = cx.enumerated(&c, "kind", ComponentKind::parse, COMPONENT_KINDS);
        let domains = dec_domains(cx, &c, "domains");
        let attributes = cx.attrs(&c, "attributes");
        Some(Component {
            id: id?,
            name: name?,
            kind: kind?,
            domains: domains?,
            attributes: attributes?,
        })
    });
    let connections = cx.list(o, "connections", |cx, v, p| {
        let c = cx.obj(v, &p)?;
        cx.known(&c, &["id", "from", "to", "domain", "attributes"]);
        let id = cx.string(&c, "id");
        let from = cx.string(&c, "from");
        let to = cx.string(&c, "to");
        let domain = cx.string(&c, "domain");
        let attributes = cx.attrs(&c, "attributes");
        Some(Connection {
            id: id?,
            from: from?,
            to: to?,
            domain: DomainTag(domain?),
            attributes: attributes?,
        })
    });
    let functions = cx.list(o, "functions", |cx, v, p| {
        let f = cx.obj(v, &p)?;
        cx.known(&f, &["id", "name", "actors"]);
        let id = cx.string(&f, "id");
        let name = cx.string_or(&f, "name", "");
        let actors = cx.id_list(&f, "actors");
        Some(FunctionDef {
            id: id?,
            name: name?,
            actors: actors?,
        })
    });
    Some(SystemConfiguration {
        id: id?,
        components: components?,
        connections: connections?,
        functions: functions?,
    })
}

fn dec_scope(cx: &mut Cx, o: &Obj<'_>) -> Option<TestScope> {
    let narrative = cx.string(o, "narrative");
    let sut = cx.child(o, "sut").and_then(|s| {
        cx.known(&s, &["components", "inputs", "outputs"]);
        let components = cx.id_list(&s, "components");
        let inputs = cx.id_list_or_empty(&s, "inputs");
        let outputs = cx.id_list_or_empty(&s, "outputs");
        Some(SystemUnderTest {
            components: components?,
            inputs: inputs?,
            outputs: outputs?,
        })
    });
    let oui = cx.id_list(o, "oui");
    let doi = dec_domains(cx, o, "doi");
    let fut = cx.id_list(o, "fut");
    let fui = cx.id_list(o, "fui");
    let poi = cx.child(o, "poi").and_then(|p| {
        cx.known(&p, &["kind", "statement"]);
        let kind = cx.enumerated(&p, "kind", PoiKind::parse, POI_KINDS);
        let statement = cx.string_or(&p, "statement", "");
        Some(Poi {
            kind: kind?,
            statement: statement?,
        })
    });
    let criteria = cx.child(o, "criteria").and_then(|c| dec_criteria(cx, &c));
    Some(TestScope {
        narrative: narrative?,
        sut: sut?,
        oui: oui?,
        doi: doi?,
        fut: fut?,
        fui: fui?,
        poi: poi?,
        criteria: criteria?,
    })
}

fn dec_criteria(cx: &mut Cx, c: &Obj<'_>) -> Option<TestCriteria> {
    cx.known(c, &["target", "variability", "quality"]);
    let target = cx.list_or_empty(c, "target", |cx, v, p| {
        let t = cx.obj(v, &p)?;
        cx.known(&t, &["id", "metric", "description", "combination"]);
        let id = cx.string(&t, "id");
        let metric = cx.string(&t, "metric");
        let description = cx.string_or(&t, "description", "");
        let combination = cx.opt_string(&t, "combination");
        Some(TargetCriterion {
            id: id?,
            metric: metric?,
            description: description?,
            combination: combination?,
        })
    });
    let variability = cx.list_or_empty(c, "variability", |cx, v, p| {
        let a = cx.obj(v, &p)?;
        cx.known(&a, &["id", "parameter", "range"]);
        let id = cx.string(&a, "id");
        let parameter = cx.string(&a, "parameter");
        let range = cx.req(&a, "range").and_then(|r| {
            let path = a.at("range");
            match r {
                Value::Array(_) => cx.elements(r, &path, |cx, v, p| cx.scalar(v, &p)).map(VariabilityRange::Enumerated),
                _ => {
                    let ro = cx.obj(r, &path)?;
                    cx.known(&ro, &["lo", "hi"]);
                    let lo = cx.number(&ro, "lo");
                    let hi = cx.number(&ro, "hi");
                    Some(VariabilityRange::Interval { lo: lo?, hi: hi? })
                }
            }
        });
        Some(VariabilityAttribute {
            id: id?,
            parameter: parameter?,
            range: range?,
        })
    });
    let quality = cx.list_or_empty(c, "quality", |cx, v, p| {
        let q = cx.obj(v, &p)?;
        cx.known(&q, &["id", "target_ref", "predicate", "threshold"]);
        let id = cx.string(&q, "id");
        let target_ref = cx.string(&q, "target_ref");
        let predicate = cx.enumerated(&q, "predicate", Comparison::parse, COMPARISONS);
        let threshold = cx.req(&q, "threshold").and_then(|t| cx.quantity(t, &q.at("threshold")));
        Some(QualityAttribute {
            id: id?,
            target_ref: target_ref?,
            predicate: predicate?,
            threshold: threshold?,
        })
    });
    Some(TestCriteria {
        target: target?,
        variability: variability?,
        quality: quality?,
    })
}

fn dec_test_case(cx: &mut Cx, o: &Obj<'_>) -> Option<HolisticTestCase> {
    let mut fields = vec!["id", "system_configuration"];
    fields.extend_from_slice(SCOPE_FIELDS);
    cx.known(o, &with_header(&fields));
    let id = cx.string(o, "id");
    let sc = match o.opt("system_configuration") {
        None => Some(None),
        Some(v) => cx.obj(v, &o.at("system_configuration")).and_then(|s| {
            if s.map.contains_key("$ref") {
                cx.ref_body(&s).map(|r| Some(ScSource::Ref(r)))
            } else {
                dec_sc(cx, &s, false).map(|sc| Some(ScSource::Inline(sc)))
            }
        }),
    };
    let scope = dec_scope(cx, o);
    Some(HolisticTestCase {
        id: id?,
        system_configuration: sc?,
        scope: scope?,
    })
}

fn dec_subtest(cx: &mut Cx, v: &Value, path: String) -> Option<SubTest> {
    let o = cx.obj(v, &path)?;
    let mut fields = vec!["id", "parent", "requirements", "interfaces", "executor"];
    fields.extend_from_slice(SCOPE_FIELDS);
    cx.known(&o, &fields);
    let id = cx.string(&o, "id");
    let parent = cx.string(&o, "parent");
    let scope = dec_scope(cx, &o);
    let requirements = cx.list_or_empty(&o, "requirements", |cx, v, p| {
        let r = cx.obj(v, &p)?;
        cx.known(&r, &["category", "class", "attribute_constraints"]);
        let category = cx.string(&r, "category");
        let class = cx.string(&r, "class");
        let cons = cx.list_or_empty(&r, "attribute_constraints", |cx, v, p| {
            let c = cx.obj(v, &p)?;
            cx.known(&c, &["attribute", "predicate", "value"]);
            let attribute = cx.string(&c, "attribute");
            let predicate = cx.enumerated(&c, "predicate", ConstraintOp::parse, CONSTRAINT_OPS);
            let value = cx.req(&c, "value").and_then(|x| {
                let vp = c.at("value");
                match x {
                    Value::Array(_) => cx.elements(x, &vp, |cx, v, p| cx.scalar(v, &p)).map(ConstraintValue::Many),
                    _ => cx.scalar(x, &vp).map(ConstraintValue::One),
                }
            });
            Some(AttributeConstraint {
                attribute: attribute?,
                predicate: predicate?,
                value: value?,
            })
        });
        Some(Requirement {
            category: category?,
            class: class?,
            attribute_constraints: cons?,
        })
    });
    let interfaces = cx.list_or_empty(&o, "interfaces", |cx, v, p| {
        let q = cx.obj(v, &p)?;
        cx.known(&q, &["id", "direction", "artifact_type", "peer", "iterative", "max_iterations"]);
        let id = cx.string(&q, "id");
        let direction = cx.enumerated(&q, "direction", PortDirection::parse, DIRECTIONS);
        let artifact_type = cx.string(&q, "artifact_type");
        let peer = cx.string(&q, "peer");
        let iterative = cx.bool_or(&q, "iterative", false);
        let max_iterations = cx.opt_u32(&q, "max_iterations");
        Some(InterfacePort {
            id: id?,
            direction: direction?,
            artifact_type: artifact_type?,
            peer: peer?,
            iterative: iterative?,
            max_iterations: max_iterations?,
        })
    });
    let executor = cx.child(&o, "executor").and_then(|e| {
        cx.known(&e, &["kind", "params", "seed"]);
        let kind = cx.enumerated(&e, "kind", ExecutorKind::parse, EXECUTOR_KINDS);
        let params = cx.attrs(&e, "params");
        let seed = cx.opt_u64(&e, "seed");
        Some(ExecutorSpec {
            kind: kind?,
            params: params?,
            seed: seed?,
        })
    });
    Some(SubTest {
        id: id?,
        parent: parent?,
        scope: scope?,
        requirements: requirements?,
        interfaces: interfaces?,
        executor: executor?,
    })
}

fn dec_subtest_set(cx: &mut Cx, o: &Obj<'_>) -> Option<Decomposition> {
    cx.known(o, &with_header(&["id", "parent", "taxonomy", "subtests"]));
    let id = cx.string(o, "id");
    let parent = cx.string(o, "parent");
    let taxonomy = cx.string(o, "taxonomy");
    let subtests = cx.list(o, "subtests", dec_subtest);
    Some(Decomposition {
        id: id?,
        parent: parent?,
        taxonomy: taxonomy?,
        subtests: subtests?,
    })
}

fn dec_profile(cx: &mut Cx, o: &Obj<'_>) -> Option<RiProfile> {
    cx.known(o, &with_header(&["id", "name", "taxonomy", "capabilities", "cost"]));
    let id = cx.string(o, "id");
    let name = cx.string_or(o, "name", "");
    let taxonomy = cx.string(o, "taxonomy");
    let capabilities = cx.list(o, "capabilities", |cx, v, p| {
        let c = cx.obj(v, &p)?;
        cx.known(&c, &["category", "class", "attributes"]);
        let category = cx.string(&c, "category");
        let class = cx.string(&c, "class");
        let attributes = cx.attrs(&c, "attributes");
        Some(Capability {
            category: category?,
            class: class?,
            attributes: attributes?,
        })
    });
    let cost = cx.number(o, "cost");
    Some(RiProfile {
        id: id?,
        name: name?,
        taxonomy: taxonomy?,
        capabilities: capabilities?,
        cost: cost?,
    })
}

fn dec_plan(cx: &mut Cx, o: &Obj<'_>) -> Option<MappingPlan> {
    cx.known(
        o,
        &with_header(&["id", "test_case", "subtest_set", "lambda", "assignment", "dag", "stages", "total_cost"]),
    );
    let id = cx.string(o, "id");
    let test_case = cx.doc_ref(o, "test_case");
    let subtest_set = cx.doc_ref(o, "subtest_set");
    let lambda = cx.number(o, "lambda");
    let assignment = if cx.req(o, "assignment").is_some() {
        cx.map_or_empty(o, "assignment", |cx, v, p| cx.as_string(v, &p))
    } else {
        None
    };
    let dag = cx.list(o, "dag", |cx, v, p| {
        let e = cx.obj(v, &p)?;
        cx.known(&e, &["producer", "consumer", "artifact_type", "iterative"]);
        let producer = cx.string(&e, "producer");
        let consumer = cx.string(&e, "consumer");
        let artifact_type = cx.string(&e, "artifact_type");
        let iterative = cx.boolean(&e, "iterative");
        Some(DagEdge {
            producer: producer?,
            consumer: consumer?,
            artifact_type: artifact_type?,
            iterative: iterative?,
        })
    });
    let stages = cx.list(o, "stages", |cx, v, p| {
        let s = cx.obj(v, &p)?;
        cx.known(&s, &["subtests", "groups"]);
        let subtests = cx.id_list(&s, "subtests");
        let groups = cx.list_or_empty(&s, "groups", |cx, v, p| {
            let g = cx.obj(v, &p)?;
            cx.known(&g, &["members", "max_iterations"]);
            let members = cx.id_list(&g, "members");
            let max_iterations = cx.u32(&g, "max_iterations");
            Some(IterationGroup {
                members: members?,
                max_iterations: max_iterations?,
            })
        });
        Some(Stage {
            subtests: subtests?,
            groups: groups?,
        })
    });
    let total_cost = cx.number(o, "total_cost");
    Some(MappingPlan {
        id: id?,
        test_case: test_case?,
        subtest_set: subtest_set?,
        lambda: lambda?,
        assignment: assignment?,
        dag: dag?,
        stages: stages?,
        total_cost: total_cost?,
    })
}

fn dec_metrics(cx: &mut Cx, o: &Obj<'_>, key: &str) -> Option<BTreeMap<Id, f64>> {
    cx.map_or_empty(o, key, |cx, v, p| cx.as_number(v, &p))
}

fn dec_record(cx: &mut Cx, v: &Value, path: String) -> Option<ResultRecord> {
    let r = cx.obj(v, &path)?;
    cx.known(&r, &["subtest_id", "ri_id", "metrics", "artifacts", "status", "message"]);
    let subtest_id = cx.string(&r, "subtest_id");
    let ri_id = cx.string(&r, "ri_id");
    let metrics = dec_metrics(cx, &r, "metrics");
    let artifacts = cx.map_or_empty(&r, "artifacts", |cx, v, p| cx.as_string(v, &p));
    let status = cx.enumerated(&r, "status", RecordStatus::parse, STATUSES);
    let message = cx.opt_string(&r, "message");
    Some(ResultRecord {
        subtest_id: subtest_id?,
        ri_id: ri_id?,
        metrics: metrics?,
        artifacts: artifacts?,
        status: status?,
        message: message?,
    })
}

fn dec_characterization(cx: &mut Cx, v: &Value, path: String) -> Option<CharacterizationRecord> {
    let c = cx.obj(v, &path)?;
    cx.known(
        &c,
        &["subtest_id", "variability_id", "parameter", "quality_id", "mode", "samples", "boundary"],
    );
    let subtest_id = cx.string(&c, "subtest_id");
    let variability_id = cx.string(&c, "variability_id");
    let parameter = cx.string(&c, "parameter");
    let quality_id = cx.string(&c, "quality_id");
    let mode = cx.enumerated(&c, "mode", SweepMode::parse, SWEEP_MODES);
    let samples = cx.list(&c, "samples", |cx, v, p| {
        let s = cx.obj(v, &p)?;
        cx.known(&s, &["value", "metrics", "quality_pass"]);
        let value = cx.number(&s, "value");
        let metrics = dec_metrics(cx, &s, "metrics");
        let quality_pass = cx.boolean(&s, "quality_pass");
        Some(SweepSample {
            value: value?,
            metrics: metrics?,
            quality_pass: quality_pass?,
        })
    });
    let boundary = cx.opt_number(&c, "boundary");
    Some(CharacterizationRecord {
        subtest_id: subtest_id?,
        variability_id: variability_id?,
        parameter: parameter?,
        quality_id: quality_id?,
        mode: mode?,
        samples: samples?,
        boundary: boundary?,
    })
}

fn opt_number_value(cx: &mut Cx, v: &Value, path: &str) -> Option<Option<f64>> {
    if v.is_null() {
        Some(None)
    } else {
        cx.as_number(v, path).map(Some)
    }
}

fn dec_verdict(cx: &mut Cx, v: &Value, path: &str) -> Option<HolisticVerdict> {
    let o = cx.obj(v, path)?;
    cx.known(&o, &["test_case", "targets", "quality", "overall", "provenance"]);
    let test_case = cx.string(&o, "test_case");
    let targets = match o.map.get("targets") {
        Some(t) => cx.obj(t, &o.at("targets")).and_then(|t| {
            let mut out = BTreeMap::new();
            let mut ok = true;
            for (k, x) in t.map {
                match opt_number_value(cx, x, &t.at(k)) {
                    Some(n) => {
                        out.insert(k.clone(), n);
                    }
                    None => ok = false,
                }
            }
            ok.then_some(out)
        }),
        None => Some(BTreeMap::new()),
    };
    let quality = cx.map_or_empty(&o, "quality", |cx, v, p| {
        let text = cx.as_string(v, &p)?;
        let out = Outcome::parse(&text);
        if out.is_none() {
            cx.schema(p, format!("'{text}' is not a valid outcome; allowed values: {{{}}}", OUTCOMES.join(", ")));
        }
        out
    });
    let overall = match o.opt("overall") {
        None => Some(None),
        Some(x) => cx.obj(x, &o.at("overall")).and_then(|ov| {
            cx.known(&ov, &["verdict", "characterization"]);
            if ov.map.contains_key("verdict") {
                cx.enumerated(&ov, "verdict", Outcome::parse, OUTCOMES)
                    .map(|out| Some(Overall::Verdict(out)))
            } else if let Some(ch) = ov.map.get("characterization") {
                let cp = ov.at("characterization");
                let ch = cx.obj(ch, &cp)?;
                let mut out = BTreeMap::new();
                let mut ok = true;
                for (k, y) in ch.map {
                    match opt_number_value(cx, y, &ch.at(k)) {
                        Some(n) => {
                            out.insert(k.clone(), n);
                        }
                        None => ok = false,
                    }
                }
                ok.then_some(Some(Overall::Characterization(out)))
            } else {
                cx.schema(ov.path.clone(), "overall needs 'verdict' or 'characterization'");
                None
            }
        }),
    };
    let provenance = cx.map_or_empty(&o, "provenance", |cx, v, p| {
        cx.elements(v, &p, |cx, x, q| cx.as_string(x, &q))
    });
    Some(HolisticVerdict {
        test_case: test_case?,
        targets: targets?,
        quality: quality?,
        overall: overall?,
        provenance: provenance?,
    })
}

fn dec_result_set(cx: &mut Cx, o: &Obj<'_>) -> Option<ResultSet> {
    cx.known(o, &with_header(&["id", "records", "characterizations", "verdict"]));
    let id = cx.string(o, "id");
    let records = cx.list_or_empty(o, "records", dec_record);
    let characterizations = cx.list_or_empty(o, "characterizations", dec_characterization);
    let verdict = match o.opt("verdict") {
        Some(v) => dec_verdict(cx, v, &o.at("verdict")).map(Some),
        None => Some(None),
    };
    Some(ResultSet {
        id: id?,
        records: records?,
        characterizations: characterizations?,
        verdict: verdict?,
    })
}

fn dec_taxonomy(cx: &mut Cx, o: &Obj<'_>) -> Option<Taxonomy> {
    cx.known(o, &with_header(&["id", "categories", "classes", "relations"]));
    let id = cx.string(o, "id");
    let categories = cx.list(o, "categories", |cx, v, p| {
        let c = cx.obj(v, &p)?;
        cx.known(&c, &["id", "description"]);
        let id = cx.string(&c, "id");
        let description = cx.string_or(&c, "description", "");
        Some(Category {
            id: id?,
            description: description?,
        })
    });
    let classes = cx.list(o, "classes", |cx, v, p| {
        let c = cx.obj(v, &p)?;
        cx.known(&c, &["id", "category", "description", "attribute_schema"]);
        let id = cx.string(&c, "id");
        let category = cx.string(&c, "category");
        let description = cx.string_or(&c, "description", "");
        let schema = cx.map_or_empty(&c, "attribute_schema", |cx, v, p| {
            let text = cx.as_string(v, &p)?;
            let t = AttributeType::parse(&text);
            if t.is_none() {
                cx.schema(
                    p,
                    format!("'{text}' is not a valid attribute type; allowed values: {{{}}}", ATTRIBUTE_TYPES.join(", ")),
                );
            }
            t
        });
        Some(Class {
            id: id?,
            category: category?,
            description: description?,
            attribute_schema: schema?,
        })
    });
    let relations = cx.list_or_empty(o, "relations", |cx, v, p| {
        let r = cx.obj(v, &p)?;
        cx.known(&r, &["from", "to", "compatible"]);
        let from = cx.string(&r, "from");
        let to = cx.string(&r, "to");
        let compatible = cx.list_or_empty(&r, "compatible", |cx, v, p| {
            let pair = cx.elements(v, &p, |cx, x, q| cx.as_string(x, &q))?;
            match <[String; 2]>::try_from(pair) {
                Ok([a, b]) => Some((a, b)),
                Err(_) => {
                    cx.schema(p, "compatible entries are [from_class, to_class] pairs");
                    None
                }
            }
        });
        Some(CategoryRelation {
            from: from?,
            to: to?,
            compatible: compatible?,
        })
    });
    Some(Taxonomy {
        id: id?,
        categories: categories?,
        classes: classes?,
        relations: relations?,
    })
}
