//! Reference implementations and instance generators used to check the
//! mapping engine and validators from the outside.

use std::collections::{BTreeMap, BTreeSet};

use holotest_core::mapping::{self, Objective};
use holotest_core::model::*;
use holotest_core::taxonomy::DEFAULT_TAXONOMY_ID;
use holotest_core::Failure;
use proptest::collection::vec;
use proptest::prelude::*;

pub fn scope(components: &[&str]) -> TestScope {
    TestScope {
        narrative: String::new(),
        sut: SystemUnderTest {
            components: components.iter().map(|c| c.to_string()).collect(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        },
        oui: Vec::new(),
        doi: Vec::new(),
        fut: Vec::new(),
        fui: Vec::new(),
        poi: Poi {
            kind: PoiKind::Characterization,
            statement: String::new(),
        },
        criteria: TestCriteria {
            target: Vec::new(),
            variability: Vec::new(),
            quality: Vec::new(),
        },
    }
}

pub fn bare_subtest(id: &str, requirements: Vec<Requirement>, interfaces: Vec<InterfacePort>) -> SubTest {
    SubTest {
        id: id.into(),
        parent: "tc".into(),
        scope: scope(&[]),
        requirements,
        interfaces,
        executor: ExecutorSpec {
            kind: ExecutorKind::Scripted,
            params: Attributes::new(),
            seed: None,
        },
    }
}

fn decomposition(subtests: Vec<SubTest>) -> Decomposition {
    Decomposition {
        id: "d".into(),
        parent: "tc".into(),
        taxonomy: DEFAULT_TAXONOMY_ID.into(),
        subtests,
    }
}

// ---- assignment ----

const SETUPS: [&str; 3] = ["pure_simulation", "controller_hil", "physical_lab"];
const POIS: [&str; 3] = ["characterization", "validation", "verification"];

/// One requirement drawn from a small pool, so that profiles often tie.
fn requirement() -> impl Strategy<Value = Requirement> {
    prop_oneof![
        (0usize..3).prop_map(|k| Requirement {
            category: "purpose_of_investigation".into(),
            class: POIS[k].into(),
            attribute_constraints: Vec::new(),
        }),
        (0usize..3, proptest::option::of((any::<bool>(), 0u32..5)), proptest::option::of(any::<bool>())).prop_map(
            |(k, nodes, rt)| {
                let mut attribute_constraints = Vec::new();
                if let Some((at_least, n)) = nodes {
                    attribute_constraints.push(AttributeConstraint {
                        attribute: "max_nodes".into(),
                        predicate: if at_least { ConstraintOp::Ge } else { ConstraintOp::Le },
                        value: ConstraintValue::One(Scalar::num(f64::from(n * 250))),
                    });
                }
                if let Some(rt) = rt {
                    attribute_constraints.push(AttributeConstraint {
                        attribute: "real_time".into(),
                        predicate: ConstraintOp::Eq,
                        value: ConstraintValue::One(Scalar::Bool(rt)),
                    });
                }
                Requirement {
                    category: "test_setup".into(),
                    class: SETUPS[k].into(),
                    attribute_constraints,
                }
            }
        ),
    ]
}

fn capability() -> impl Strategy<Value = Capability> {
    prop_oneof![
        (0usize..3).prop_map(|k| Capability {
            category: "purpose_of_investigation".into(),
            class: POIS[k].into(),
            attributes: Attributes::new(),
        }),
        (0usize..3, 0u32..5, any::<bool>()).prop_map(|(k, n, rt)| {
            let mut attributes = Attributes::new();
            attributes.insert("max_nodes".into(), Scalar::num(f64::from(n * 250)));
            attributes.insert("real_time".into(), Scalar::Bool(rt));
            Capability {
                category: "test_setup".into(),
                class: SETUPS[k].into(),
                attributes,
            }
        }),
    ]
}

const COSTS: [f64; 7] = [0.0, 0.1, 0.2, 0.5, 1.0, 1.5, 3.0];
const LAMBDAS: [f64; 4] = [0.0, 0.1, 0.5, 2.0];

#[derive(Debug, Clone)]
pub struct MappingInstance {
    pub subtests: Decomposition,
    pub profiles: Vec<RiProfile>,
    pub lambda: f64,
}

/// Up to six sub-tests against up to four profiles.
pub fn mapping_instance() -> impl Strategy<Value = MappingInstance> {
    let st = vec(requirement(), 0..3);
    let profile = (vec(capability(), 0..6), 0usize..COSTS.len());
    (vec(st, 1..=6), vec(profile, 1..=4), 0usize..LAMBDAS.len()).prop_map(|(sts, ps, l)| MappingInstance {
        subtests: decomposition(
            sts.into_iter()
                .enumerate()
                .map(|(i, reqs)| bare_subtest(&format!("st{i}"), reqs, Vec::new()))
                .collect(),
        ),
        profiles: ps
            .into_iter()
            .enumerate()
            .map(|(i, (capabilities, c))| RiProfile {
                id: format!("ri_{}", (b'a' + i as u8) as char),
                name: String::new(),
                taxonomy: DEFAULT_TAXONOMY_ID.into(),
                capabilities,
                cost: COSTS[c],
            })
            .collect(),
        lambda: LAMBDAS[l],
    })
}

fn satisfies(p: &RiProfile, r: &Requirement) -> bool {
    p.capabilities.iter().any(|c| {
        c.category == r.category
            && c.class == r.class
            && r.attribute_constraints.iter().all(|k| {
                let (Some(actual), ConstraintValue::One(want)) = (c.attributes.get(&k.attribute), &k.value) else {
                    return false;
                };
                match (actual, want) {
                    (Scalar::Bool(a), Scalar::Bool(b)) => k.predicate == ConstraintOp::Eq && a == b,
                    (Scalar::Number(a), Scalar::Number(b)) => match k.predicate {
                        ConstraintOp::Ge => a.value >= b.value,
                        ConstraintOp::Le => a.value <= b.value,
                        _ => unreachable!(),
                    },
                    _ => false,
                }
            })
    })
}

/// Exhaustive minimum over every profile vector, visited in lexicographic
/// order of RI ids so the first minimum found is the tie-break winner.
/// `None` when some sub-test has no feasible profile.
pub fn brute_force(inst: &MappingInstance) -> Option<(BTreeMap<Id, Id>, f64)> {
    let mut sts: Vec<&SubTest> = inst.subtests.subtests.iter().collect();
    sts.sort_by(|a, b| a.id.cmp(&b.id));
    let mut ps: Vec<&RiProfile> = inst.profiles.iter().collect();
    ps.sort_by(|a, b| a.id.cmp(&b.id));
    let ok = |s: &SubTest, p: &RiProfile| s.requirements.iter().all(|r| satisfies(p, r));

    let total = ps.len().pow(sts.len() as u32);
    let mut best: Option<(Vec<usize>, f64, f64)> = None;
    for code in 0..total {
        // Most significant digit first, so `code` order is lexicographic.
        let mut digits = vec![0usize; sts.len()];
        let mut c = code;
        for d in digits.iter_mut().rev() {
            *d = c % ps.len();
            c /= ps.len();
        }
        if !digits.iter().zip(&sts).all(|(&d, s)| ok(s, ps[d])) {
            continue;
        }
        let mut cost = 0.0;
        for &d in &digits {
            cost += ps[d].cost;
        }
        let distinct: BTreeSet<usize> = digits.iter().copied().collect();
        let value = cost + inst.lambda * distinct.len() as f64;
        if best.as_ref().map_or(true, |(_, _, b)| value < *b) {
            best = Some((digits, cost, value));
        }
    }
    best.map(|(digits, cost, _)| {
        (
            sts.iter().zip(digits).map(|(s, d)| (s.id.clone(), ps[d].id.clone())).collect(),
            cost,
        )
    })
}

/// Compares the engine with [`brute_force`]; `Err` describes a mismatch.
pub fn check_assignment(inst: &MappingInstance) -> Result<(), String> {
    let got = mapping::assign(&inst.subtests, &inst.profiles, Objective { lambda: inst.lambda });
    match (brute_force(inst), got) {
        (None, Err(Failure(diags))) if diags.iter().all(|d| d.code == "E_INFEASIBLE") => Ok(()),
        (Some((assignment, cost)), Ok(a)) if a.exact && a.assignment == assignment && a.total_cost == cost => Ok(()),
        (want, got) => Err(format!("oracle {want:?}, engine {got:?}")),
    }
}

// ---- execution order ----

const ARTIFACTS: [&str; 2] = ["time_series", "model_parameters"];

#[derive(Debug, Clone)]
pub struct DagInstance {
    pub subtests: Decomposition,
    /// (producer, consumer, artifact, iterative), as declared.
    pub edges: Vec<(usize, usize, usize, bool)>,
}

pub fn dag_instance() -> impl Strategy<Value = DagInstance> {
    (2usize..=7)
        .prop_flat_map(|n| {
            let edge = (0..n, 0..n, 0usize..2, prop::bool::weighted(0.2));
            (Just(n), vec(edge, 0..(2 * n)))
        })
        .prop_map(|(n, raw)| {
            let mut seen = BTreeSet::new();
            let edges: Vec<_> = raw
                .into_iter()
                .filter(|&(a, b, t, _)| a != b && seen.insert((a, b, t)))
                .collect();
            let mut ports: Vec<Vec<InterfacePort>> = vec![Vec::new(); n];
            for (k, &(a, b, t, it)) in edges.iter().enumerate() {
                let port = |dir, peer: usize| InterfacePort {
                    id: format!("p{k}"),
                    direction: dir,
                    artifact_type: ARTIFACTS[t].into(),
                    peer: format!("s{peer}"),
                    iterative: it,
                    max_iterations: it.then_some(3),
                };
                ports[a].push(port(PortDirection::Produces, b));
                ports[b].push(port(PortDirection::Consumes, a));
            }
            let subtests = ports
                .into_iter()
                .enumerate()
                .map(|(i, p)| bare_subtest(&format!("s{i}"), Vec::new(), p))
                .collect();
            DagInstance {
                subtests: decomposition(subtests),
                edges,
            }
        })
}

fn closure(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> Vec<Vec<bool>> {
    let mut r = vec![vec![false; n]; n];
    for (a, b) in edges {
        r[a][b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if r[i][k] && r[k][j] {
                    r[i][j] = true;
                }
            }
        }
    }
    r
}

/// Whether the instance can be scheduled, and whether a directed cycle runs
/// through a non-iterative edge.
pub fn dag_expectation(inst: &DagInstance) -> (bool, bool) {
    let n = inst.subtests.subtests.len();
    let reach = closure(n, inst.edges.iter().map(|&(a, b, _, _)| (a, b)));
    let bad_cycle = inst.edges.iter().any(|&(a, b, _, it)| !it && reach[b][a]);
    // Groups: connected over iterative edges, direction ignored.
    let linked = closure(
        n,
        inst.edges
            .iter()
            .filter(|e| e.3)
            .flat_map(|&(a, b, _, _)| [(a, b), (b, a)]),
    );
    let unit = |i: usize| (0..n).find(|&j| j == i || linked[i][j]).unwrap();
    let units = closure(
        n,
        inst.edges
            .iter()
            .map(|&(a, b, _, _)| (unit(a), unit(b)))
            .filter(|(a, b)| a != b),
    );
    let unit_cycle = (0..n).any(|u| units[u][u]);
    (!bad_cycle && !unit_cycle, bad_cycle)
}

pub fn check_dag(inst: &DagInstance) -> Result<(), String> {
    let (schedulable, bad_cycle) = dag_expectation(inst);
    let got = mapping::build_dag(&inst.subtests);
    let (edges, stages) = match got {
        Err(Failure(diags)) => {
            if schedulable {
                return Err(format!("rejected a schedulable instance: {diags:?}"));
            }
            if !diags.iter().all(|d| d.code == "E_CYCLE") {
                return Err(format!("expected only E_CYCLE, got {diags:?}"));
            }
            if bad_cycle && !diags.iter().any(|d| d.message.contains("non-iterative")) {
                return Err(format!("cycle through a non-iterative edge not named: {diags:?}"));
            }
            return Ok(());
        }
        Ok(v) => v,
    };
    if !schedulable {
        return Err(format!("accepted an unschedulable instance: {stages:?}"));
    }
    let mut stage_of = BTreeMap::new();
    for (k, s) in stages.iter().enumerate() {
        for id in &s.subtests {
            if stage_of.insert(id.clone(), k).is_some() {
                return Err(format!("'{id}' scheduled twice"));
            }
        }
    }
    if stage_of.len() != inst.subtests.subtests.len() {
        return Err("not every sub-test is scheduled".into());
    }
    let group_of = |id: &str| {
        stages
            .iter()
            .flat_map(|s| &s.groups)
            .find(|g| g.members.iter().any(|m| m == id))
    };
    if edges.len() != inst.edges.len() {
        return Err(format!("{} edges derived from {} declared", edges.len(), inst.edges.len()));
    }
    for &(a, b, _, it) in &inst.edges {
        let (pa, pb) = (format!("s{a}"), format!("s{b}"));
        if it {
            let same = group_of(&pa).is_some_and(|g| g.members.contains(&pb));
            if !same {
                return Err(format!("iterative edge {pa} -> {pb} not inside one group"));
            }
            continue;
        }
        match (group_of(&pa), group_of(&pb)) {
            (Some(g), Some(h)) if std::ptr::eq(g, h) => {
                let pos = |x: &str| g.members.iter().position(|m| m == x).unwrap();
                if pos(&pa) >= pos(&pb) {
                    return Err(format!("{pa} -> {pb} out of order inside {:?}", g.members));
                }
            }
            _ => {
                if stage_of[&pa] >= stage_of[&pb] {
                    return Err(format!("{pa} (stage {}) -> {pb} (stage {})", stage_of[&pa], stage_of[&pb]));
                }
            }
        }
    }
    Ok(())
}

// ---- well-formed scenarios ----

const DOMAINS: [&str; 4] = ["electric_power", "ict", "thermal", "market"];

fn pick<T: Clone>(mask: u32, items: &[T]) -> Vec<T> {
    let out: Vec<T> = items
        .iter()
        .enumerate()
        .filter(|(i, _)| mask & (1 << i) != 0)
        .map(|(_, x)| x.clone())
        .collect();
    if out.is_empty() {
        items[..1].to_vec()
    } else {
        out
    }
}

/// A configuration together with a test case that is valid against it.
pub fn valid_scenario() -> impl Strategy<Value = (SystemConfiguration, HolisticTestCase)> {
    (
        vec((1u32..16, -100i32..100), 1..7),
        vec((0usize..7, 0usize..7), 0..8),
        vec(1u32..128, 1..4),
        (any::<u32>(), any::<u32>(), any::<u32>(), any::<u32>()),
        (0usize..3, 0usize..4),
    )
        .prop_map(|(comps, conns, funcs, (sut_m, oui_m, doi_m, fui_m), (poi, cmp))| {
            let components: Vec<Component> = comps
                .iter()
                .enumerate()
                .map(|(i, &(dm, size))| Component {
                    id: format!("c{i}"),
                    name: String::new(),
                    kind: ComponentKind::ALL[i % 3],
                    domains: pick(dm, &DOMAINS).into_iter().map(DomainTag::new).collect(),
                    attributes: [("size".to_string(), Scalar::num(f64::from(size)))].into(),
                })
                .collect();
            let n = components.len();
            let connections = conns
                .iter()
                .filter(|&&(a, b)| a < n && b < n && a != b)
                .enumerate()
                .filter_map(|(k, &(a, b))| {
                    let shared = components[a]
                        .domains
                        .iter()
                        .find(|d| components[b].domains.contains(d))?;
                    Some(Connection {
                        id: format!("k{k}"),
                        from: components[a].id.clone(),
                        to: components[b].id.clone(),
                        domain: shared.clone(),
                        attributes: Attributes::new(),
                    })
                })
                .collect();
            let ids: Vec<Id> = components.iter().map(|c| c.id.clone()).collect();
            let functions: Vec<FunctionDef> = funcs
                .iter()
                .enumerate()
                .map(|(i, &m)| FunctionDef {
                    id: format!("f{i}"),
                    name: String::new(),
                    actors: pick(m, &ids),
                })
                .collect();

            let mut sut = pick(sut_m, &ids);
            if !sut.contains(&functions[0].actors[0]) {
                sut.push(functions[0].actors[0].clone());
            }
            let fut: Vec<Id> = functions
                .iter()
                .filter(|f| f.actors.iter().any(|a| sut.contains(a)))
                .map(|f| f.id.clone())
                .collect();
            let mut used: Vec<DomainTag> = Vec::new();
            for c in components.iter().filter(|c| sut.contains(&c.id)) {
                for d in &c.domains {
                    if !used.contains(d) {
                        used.push(d.clone());
                    }
                }
            }
            let mut scope = scope(&[]);
            scope.narrative = "generated".into();
            scope.oui = pick(oui_m, &sut);
            scope.doi = pick(doi_m, &used);
            scope.fui = pick(fui_m, &fut);
            scope.fut = fut;
            scope.poi.kind = PoiKind::ALL[poi];
            scope.criteria = TestCriteria {
                target: vec![TargetCriterion {
                    id: "t0".into(),
                    metric: "m0".into(),
                    description: String::new(),
                    combination: None,
                }],
                variability: vec![VariabilityAttribute {
                    id: "v0".into(),
                    parameter: format!("{}.size", sut[0]),
                    range: VariabilityRange::Interval { lo: -1.0, hi: 1.0 },
                }],
                quality: vec![QualityAttribute {
                    id: "q0".into(),
                    target_ref: "t0".into(),
                    predicate: Comparison::ALL[cmp],
                    threshold: Quantity::new(0.5),
                }],
            };
            scope.sut.components = sut;
            let sc = SystemConfiguration {
                id: "sc".into(),
                components,
                connections,
                functions,
            };
            let tc = HolisticTestCase {
                id: "tc".into(),
                system_configuration: Some(ScSource::Inline(sc.clone())),
                scope,
            };
            (sc, tc)
        })
}
