//! Decomposition checks, RI feasibility, cost-optimal assignment and the
//! execution DAG.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::diag::{codes, Diagnostic, Failure};
use crate::expr;
use crate::model::*;
use crate::taxonomy;
use crate::validate::duplicate_ids;

/// Largest search space explored exhaustively.
pub const EXACT_SEARCH_LIMIT: u128 = 1_000_000;

/// Producer/consumer pairs implied by matched interface ports, sorted.
pub fn interface_edges(d: &Decomposition) -> Vec<DagEdge> {
    let mut edges = BTreeSet::new();
    for consumer in &d.subtests {
        for port in consumer.interfaces.iter().filter(|p| p.direction == PortDirection::Consumes) {
            let Some(producer) = d.subtest(&port.peer) else { continue };
            let matched = producer.interfaces.iter().find(|p| {
                p.direction == PortDirection::Produces
                    && p.artifact_type == port.artifact_type
                    && p.peer == consumer.id
            });
            if let Some(pp) = matched {
                edges.insert(DagEdge {
                    producer: producer.id.clone(),
                    consumer: consumer.id.clone(),
                    artifact_type: port.artifact_type.clone(),
                    iterative: port.iterative || pp.iterative,
                });
            }
        }
    }
    edges.into_iter().collect()
}

/// Checks that the sub-tests jointly reflect the holistic test: coverage,
/// cut consistency, assembly of every target and OuI containment, plus
/// port pairing.
pub fn validate_decomposition(
    tc: &HolisticTestCase,
    sc: &SystemConfiguration,
    d: &Decomposition,
) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if d.parent != tc.id {
        out.push(Diagnostic::new(
            codes::E_REF,
            "/parent",
            format!("decomposition parent '{}' is not test case '{}'", d.parent, tc.id),
        ));
    }
    duplicate_ids(d.subtests.iter().map(|s| s.id.as_str()), "/subtests", "sub-test", &mut out);

    for (i, st) in d.subtests.iter().enumerate() {
        for (j, port) in st.interfaces.iter().enumerate() {
            if port.direction != PortDirection::Consumes || port.peer == EXTERNAL_PEER {
                continue;
            }
            let path = format!("/subtests/{i}/interfaces/{j}");
            let Some(peer) = d.subtest(&port.peer) else {
                out.push(Diagnostic::new(
                    codes::E_REF,
                    format!("{path}/peer"),
                    format!("port '{}' names unknown peer '{}'", port.id, port.peer),
                ));
                continue;
            };
            let producer = peer.interfaces.iter().find(|p| {
                p.direction == PortDirection::Produces
                    && p.artifact_type == port.artifact_type
                    && p.peer == st.id
            });
            match producer {
                None => out.push(Diagnostic::new(
                    codes::E_UNMATCHED_PORT,
                    path,
                    format!(
                        "'{}' consumes '{}' from '{}', which declares no matching producer",
                        st.id, port.artifact_type, port.peer
                    ),
                )),
                Some(pp) if pp.iterative != port.iterative => out.push(Diagnostic::new(
                    codes::E_PORT,
                    format!("{path}/iterative"),
                    format!("ports '{}' and '{}' disagree on iteration", pp.id, port.id),
                )),
                _ => {}
            }
        }
    }

    // (a) coverage
    let covered: BTreeSet<&str> = d
        .subtests
        .iter()
        .flat_map(|s| s.scope.sut.components.iter().map(String::as_str))
        .collect();
    for (i, c) in tc.scope.sut.components.iter().enumerate() {
        if !covered.contains(c.as_str()) {
            out.push(Diagnostic::new(
                codes::E_COVERAGE,
                format!("/sut/components/{i}"),
                format!("SuT component '{c}' is in no sub-test"),
            ));
        }
    }

    // (b) cut consistency
    let edges = interface_edges(d);
    let linked = |a: &str, b: &str| {
        edges.iter().any(|e| {
            (e.producer == a && e.consumer == b) || (e.producer == b && e.consumer == a)
        })
    };
    for (i, conn) in sc.connections.iter().enumerate() {
        let holders = |c: &str| -> Vec<&SubTest> {
            d.subtests
                .iter()
                .filter(|s| s.scope.sut.components.iter().any(|x| x == c))
                .collect()
        };
        let (from, to) = (holders(&conn.from), holders(&conn.to));
        if from.is_empty() || to.is_empty() {
            continue;
        }
        let internal = from.iter().any(|a| to.iter().any(|b| a.id == b.id));
        if internal {
            continue;
        }
        let bridged = from.iter().any(|a| to.iter().any(|b| linked(&a.id, &b.id)));
        if !bridged {
            out.push(Diagnostic::new(
                codes::E_CUT,
                format!("/connections/{i}"),
                format!(
                    "connection '{}' between '{}' and '{}' crosses sub-tests without an interface pair",
                    conn.id, conn.from, conn.to
                ),
            ));
        }
    }

    // (c) assembly
    for (i, t) in tc.scope.criteria.target.iter().enumerate() {
        let path = format!("/criteria/target/{i}/combination");
        let text = t.combination.as_deref().unwrap_or("").trim();
        if text.is_empty() {
            out.push(Diagnostic::new(
                codes::E_ASSEMBLY,
                path,
                format!("target '{}' has no combination expression", t.id),
            ));
            continue;
        }
        let parsed = match expr::parse_expression(text) {
            Ok(e) => e,
            Err(e) => {
                out.push(e.into_diagnostic(path));
                continue;
            }
        };
        if parsed.references().is_empty() {
            out.push(Diagnostic::new(
                codes::E_ASSEMBLY,
                path.clone(),
                format!("target '{}' combination references no sub-test metric", t.id),
            ));
        }
        let known = |s: &str, m: &str| {
            d.subtest(s)
                .is_some_and(|st| st.scope.criteria.target.iter().any(|x| x.metric == m))
        };
        if let Err(e) = parsed.check_references(known) {
            out.push(e.into_diagnostic(path));
        }
    }

    // (d) OuI containment
    let oui_covered: BTreeSet<&str> = d
        .subtests
        .iter()
        .flat_map(|s| s.scope.oui.iter().map(String::as_str))
        .collect();
    for (i, o) in tc.scope.oui.iter().enumerate() {
        if !oui_covered.contains(o.as_str()) {
            out.push(Diagnostic::new(
                codes::E_OUI_UNCOVERED,
                format!("/oui/{i}"),
                format!("OuI '{o}' is the OuI of no sub-test"),
            ));
        }
    }
    out
}

/// Full check of a sub-test document: each sub-test on its own, the
/// decomposition rules, and, when a taxonomy is given, requirements.
pub fn validate_subtest_set(
    tc: &HolisticTestCase,
    sc: &SystemConfiguration,
    d: &Decomposition,
    tax: Option<&Taxonomy>,
) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for (i, st) in d.subtests.iter().enumerate() {
        let path = format!("/subtests/{i}");
        out.extend(crate::validate::validate_subtest(st, tc, sc, &path));
        if let Some(tax) = tax {
            for (j, r) in st.requirements.iter().enumerate() {
                out.extend(taxonomy::validate_requirement(r, tax, &format!("{path}/requirements/{j}")));
            }
            out.extend(
                taxonomy::consistent_test(&st.requirements, &tax.relations)
                    .into_iter()
                    .map(|dg| Diagnostic {
                        path: format!("{path}{}", dg.path),
                        ..dg
                    }),
            );
        }
    }
    if let Some(tax) = tax {
        if d.taxonomy != tax.id {
            out.push(Diagnostic::new(
                codes::E_TAXONOMY_MISMATCH,
                "/taxonomy",
                format!("sub-tests use taxonomy '{}', loaded taxonomy is '{}'", d.taxonomy, tax.id),
            ));
        }
    }
    out.extend(validate_decomposition(tc, sc, d));
    out
}

/// The one-sub-test decomposition of `tc`: a single sub-test `<tc.id>_all`
/// carrying the whole scope, and a copy of `tc` whose targets combine by
/// identity.
pub fn trivial_decomposition(tc: &HolisticTestCase, taxonomy: &str) -> (HolisticTestCase, Decomposition) {
    let st_id = format!("{}_all", tc.id);
    let mut tc2 = tc.clone();
    for t in &mut tc2.scope.criteria.target {
        t.combination = Some(format!("{st_id}.{}", t.metric));
    }
    let mut scope = tc.scope.clone();
    for t in &mut scope.criteria.target {
        t.combination = None;
    }
    let st = SubTest {
        id: st_id,
        parent: tc.id.clone(),
        scope,
        requirements: Vec::new(),
        interfaces: Vec::new(),
        executor: ExecutorSpec {
            kind: ExecutorKind::Scripted,
            params: Attributes::new(),
            seed: None,
        },
    };
    let d = Decomposition {
        id: format!("{}_trivial", tc.id),
        parent: tc.id.clone(),
        taxonomy: taxonomy.into(),
        subtests: alloc::vec![st],
    };
    (tc2, d)
}

/// Feasible RI ids per sub-test (all requirements satisfied by one RI).
pub fn feasible_ris(
    d: &Decomposition,
    profiles: &[RiProfile],
) -> Result<BTreeMap<Id, BTreeSet<Id>>, Failure> {
    let mismatched: Vec<Diagnostic> = profiles
        .iter()
        .filter(|p| p.taxonomy != d.taxonomy)
        .map(|p| {
            Diagnostic::new(
                codes::E_TAXONOMY_MISMATCH,
                "/taxonomy",
                format!(
                    "profile '{}' uses taxonomy '{}', sub-tests use '{}'",
                    p.id, p.taxonomy, d.taxonomy
                ),
            )
        })
        .collect();
    if !mismatched.is_empty() {
        return Err(Failure(mismatched));
    }
    let mut out = BTreeMap::new();
    for st in &d.subtests {
        let mut ok = BTreeSet::new();
        for p in profiles {
            let mut all = true;
            for r in &st.requirements {
                if !taxonomy::matches(&d.taxonomy, p, r)?.satisfied {
                    all = false;
                    break;
                }
            }
            if all {
                ok.insert(p.id.clone());
            }
        }
        out.insert(st.id.clone(), ok);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Objective {
    /// Penalty per distinct RI used.
    pub lambda: f64,
}

impl Default for Objective {
    fn default() -> Self {
        Objective { lambda: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub assignment: BTreeMap<Id, Id>,
    /// Sum of assigned RI costs.
    pub total_cost: f64,
    /// `total_cost + lambda * distinct RIs`.
    pub objective: f64,
    pub exact: bool,
    pub diagnostics: Vec<Diagnostic>,
}

/// Objective of a complete assignment, summing costs in sub-test id order.
pub fn objective_value(choice: &[&RiProfile], objective: Objective) -> (f64, f64) {
    let total: f64 = choice.iter().fold(0.0, |acc, p| acc + p.cost);
    let distinct: BTreeSet<&str> = choice.iter().map(|p| p.id.as_str()).collect();
    (total, total + objective.lambda * distinct.len() as f64)
}

/// Minimises `Σ cost + λ·(distinct RIs)`. Exhaustive (with bound pruning)
/// when the feasible search space is at most [`EXACT_SEARCH_LIMIT`], else
/// cheapest-feasible per sub-test with a `W_APPROXIMATE` warning. Ties go
/// to the lexicographically smallest RI-id vector over sub-tests in id
/// order.
pub fn assign(d: &Decomposition, profiles: &[RiProfile], objective: Objective) -> Result<Assignment, Failure> {
    let feasible = feasible_ris(d, profiles)?;
    let infeasible: Vec<Diagnostic> = feasible
        .iter()
        .filter(|(_, s)| s.is_empty())
        .map(|(st, _)| {
            Diagnostic::new(
                codes::E_INFEASIBLE,
                "/subtests",
                format!("no RI satisfies every requirement of sub-test '{st}'"),
            )
        })
        .collect();
    if !infeasible.is_empty() {
        return Err(Failure(infeasible));
    }
    if !(objective.lambda >= 0.0 && objective.lambda.is_finite()) {
        return Err(Failure::one(codes::E_RANGE, "/lambda", "lambda must be finite and >= 0"));
    }

    let by_id: BTreeMap<&str, &RiProfile> = profiles.iter().map(|p| (p.id.as_str(), p)).collect();
    // Sub-tests in id order, candidates in id order.
    let options: Vec<(&str, Vec<&RiProfile>)> = feasible
        .iter()
        .map(|(st, ris)| (st.as_str(), ris.iter().map(|r| by_id[r.as_str()]).collect()))
        .collect();

    let space = options
        .iter()
        .try_fold(1u128, |acc, (_, c)| acc.checked_mul(c.len() as u128))
        .unwrap_or(u128::MAX);

    if space <= EXACT_SEARCH_LIMIT {
        let mut search = Search {
            options: &options,
            objective,
            chosen: Vec::with_capacity(options.len()),
            best: None,
        };
        search.dfs(0.0);
        let (choice, _) = search.best.expect("non-empty feasible sets give at least one assignment");
        Ok(finish(&options, choice, objective, true, Vec::new()))
    } else {
        let choice: Vec<&RiProfile> = options
            .iter()
            .map(|(_, c)| {
                let mut best = c[0];
                for p in &c[1..] {
                    if p.cost < best.cost {
                        best = p;
                    }
                }
                best
            })
            .collect();
        let warn = Diagnostic::new(
            codes::W_APPROXIMATE,
            "/assignment",
            format!("search space {space} exceeds {EXACT_SEARCH_LIMIT}; greedy assignment used"),
        );
        Ok(finish(&options, choice, objective, false, alloc::vec![warn]))
    }
}

fn finish(
    options: &[(&str, Vec<&RiProfile>)],
    choice: Vec<&RiProfile>,
    objective: Objective,
    exact: bool,
    diagnostics: Vec<Diagnostic>,
) -> Assignment {
    let (total_cost, value) = objective_value(&choice, objective);
    Assignment {
        assignment: options
            .iter()
            .zip(&choice)
            .map(|((st, _), p)| ((*st).into(), p.id.clone()))
            .collect(),
        total_cost,
        objective: value,
        exact,
        diagnostics,
    }
}

struct Search<'a, 'p> {
    options: &'a [(&'a str, Vec<&'p RiProfile>)],
    objective: Objective,
    chosen: Vec<&'p RiProfile>,
    best: Option<(Vec<&'p RiProfile>, f64)>,
}

impl<'a, 'p> Search<'a, 'p> {
    fn partial_bound(&self, cost: f64) -> f64 {
        let distinct: BTreeSet<&str> = self.chosen.iter().map(|p| p.id.as_str()).collect();
        cost + self.objective.lambda * distinct.len() as f64
    }

    fn dfs(&mut self, cost: f64) {
        if let Some((_, best)) = &self.best {
            // Costs and lambda are non-negative, so completing a branch never
            // lowers its bound; equal is not an improvement.
            if self.partial_bound(cost) >= *best {
                return;
            }
        }
        let depth = self.chosen.len();
        if depth == self.options.len() {
            let (_, value) = objective_value(&self.chosen, self.objective);
            if self.best.as_ref().map_or(true, |(_, b)| value < *b) {
                self.best = Some((self.chosen.clone(), value));
            }
            return;
        }
        let candidates = &self.options[depth].1;
        for p in candidates.iter().copied() {
            self.chosen.push(p);
            self.dfs(cost + p.cost);
            self.chosen.pop();
        }
    }
}

/// Edges and stages of the execution DAG.
///
/// Sub-tests linked by iterative edges form one iteration group. A cycle
/// through any non-iterative edge is rejected with `E_CYCLE`. Units (single
/// sub-tests or groups) are stratified Kahn-style; within a stage units are
/// ordered by their smallest member id.
pub fn build_dag(d: &Decomposition) -> Result<(Vec<DagEdge>, Vec<Stage>), Failure> {
    let edges = interface_edges(d);
    let ids: Vec<&str> = {
        let s: BTreeSet<&str> = d.subtests.iter().map(|s| s.id.as_str()).collect();
        s.into_iter().collect()
    };
    let mut succ: BTreeMap<&str, BTreeSet<&str>> = ids.iter().map(|i| (*i, BTreeSet::new())).collect();
    for e in &edges {
        succ.get_mut(e.producer.as_str()).map(|s| s.insert(e.consumer.as_str()));
    }
    let reaches = |from: &str, to: &str| -> bool {
        let mut seen = BTreeSet::new();
        let mut stack = alloc::vec![from];
        while let Some(n) = stack.pop() {
            if n == to {
                return true;
            }
            if seen.insert(n) {
                stack.extend(succ[n].iter().copied());
            }
        }
        false
    };

    let mut cyc = Vec::new();
    for e in edges.iter().filter(|e| !e.iterative) {
        if reaches(&e.consumer, &e.producer) {
            cyc.push(Diagnostic::new(
                codes::E_CYCLE,
                "/interfaces",
                format!(
                    "non-iterative edge {} -> {} ({}) lies on a cycle",
                    e.producer, e.consumer, e.artifact_type
                ),
            ));
        }
    }
    if !cyc.is_empty() {
        return Err(Failure(cyc));
    }

    // Iteration groups: connected components over iterative edges.
    let mut root: BTreeMap<&str, &str> = ids.iter().map(|i| (*i, *i)).collect();
    fn find<'s>(root: &BTreeMap<&'s str, &'s str>, mut x: &'s str) -> &'s str {
        while root[x] != x {
            x = root[x];
        }
        x
    }
    for e in edges.iter().filter(|e| e.iterative) {
        let a = find(&root, &e.producer);
        let b = find(&root, &e.consumer);
        if a != b {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            root.insert(hi, lo);
        }
    }
    let unit_of: BTreeMap<&str, &str> = ids.iter().map(|i| (*i, find(&root, i))).collect();
    let mut members: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for i in &ids {
        members.entry(unit_of[i]).or_default().push(i);
    }

    let mut unit_succ: BTreeMap<&str, BTreeSet<&str>> = members.keys().map(|u| (*u, BTreeSet::new())).collect();
    let mut indeg: BTreeMap<&str, usize> = members.keys().map(|u| (*u, 0)).collect();
    for e in &edges {
        let (a, b) = (unit_of[e.producer.as_str()], unit_of[e.consumer.as_str()]);
        if a != b && unit_succ.get_mut(a).is_some_and(|s| s.insert(b)) {
            *indeg.get_mut(b).unwrap() += 1;
        }
    }

    let mut stages = Vec::new();
    let mut ready: Vec<&str> = indeg.iter().filter(|(_, d)| **d == 0).map(|(u, _)| *u).collect();
    let mut placed = 0;
    while !ready.is_empty() {
        let mut stage = Stage::default();
        let mut next = Vec::new();
        for u in &ready {
            let ms = &members[u];
            placed += 1;
            stage.subtests.extend(ms.iter().map(|m| String::from(*m)));
            if ms.len() > 1 {
                stage.groups.push(group_order(ms, &edges, d));
            }
            for v in &unit_succ[u] {
                let dv = indeg.get_mut(v).unwrap();
                *dv -= 1;
                if *dv == 0 {
                    next.push(*v);
                }
            }
        }
        stage.subtests.sort();
        stages.push(stage);
        next.sort();
        ready = next;
    }
    if placed != members.len() {
        return Err(Failure::one(
            codes::E_CYCLE,
            "/interfaces",
            "iteration groups and non-iterative edges form a cycle",
        ));
    }
    Ok((edges, stages))
}

/// Member order inside a group: topological over internal non-iterative
/// edges, ties by id. The bound is the smallest `max_iterations` on the
/// group's iterative ports.
fn group_order(ms: &[&str], edges: &[DagEdge], d: &Decomposition) -> IterationGroup {
    let inside: BTreeSet<&str> = ms.iter().copied().collect();
    let mut indeg: BTreeMap<&str, usize> = ms.iter().map(|m| (*m, 0)).collect();
    let internal: Vec<&DagEdge> = edges
        .iter()
        .filter(|e| !e.iterative && inside.contains(e.producer.as_str()) && inside.contains(e.consumer.as_str()))
        .collect();
    for e in &internal {
        *indeg.get_mut(e.consumer.as_str()).unwrap() += 1;
    }
    let mut order = Vec::new();
    let mut ready: BTreeSet<&str> = indeg.iter().filter(|(_, d)| **d == 0).map(|(m, _)| *m).collect();
    while let Some(m) = ready.pop_first() {
        order.push(String::from(m));
        for e in internal.iter().filter(|e| e.producer == m) {
            let dv = indeg.get_mut(e.consumer.as_str()).unwrap();
            *dv -= 1;
            if *dv == 0 {
                ready.insert(e.consumer.as_str());
            }
        }
    }
    let max_iterations = ms
        .iter()
        .filter_map(|m| d.subtest(m))
        .flat_map(|st| st.interfaces.iter())
        .filter(|p| p.iterative && (p.peer == EXTERNAL_PEER || inside.contains(p.peer.as_str())))
        .filter_map(|p| p.max_iterations)
        .min()
        .unwrap_or(1);
    IterationGroup {
        members: order,
        max_iterations,
    }
}

/// Assignment plus DAG in one plan.
pub fn make_plan(
    id: &str,
    test_case: DocRef,
    subtest_set: DocRef,
    d: &Decomposition,
    profiles: &[RiProfile],
    objective: Objective,
) -> Result<(MappingPlan, Vec<Diagnostic>), Failure> {
    let a = assign(d, profiles, objective)?;
    let (dag, stages) = build_dag(d)?;
    Ok((
        MappingPlan {
            id: id.into(),
            test_case,
            subtest_set,
            lambda: objective.lambda,
            assignment: a.assignment,
            dag,
            stages,
            total_cost: a.total_cost,
        },
        a.diagnostics,
    ))
}

/// Structural agreement between a plan and the decomposition it runs.
pub fn validate_plan(plan: &MappingPlan, d: &Decomposition) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let ids: BTreeSet<&str> = d.subtests.iter().map(|s| s.id.as_str()).collect();
    let assigned: BTreeSet<&str> = plan.assignment.keys().map(String::as_str).collect();
    for missing in ids.difference(&assigned) {
        out.push(Diagnostic::new(codes::E_PLAN, "/assignment", format!("sub-test '{missing}' is not assigned")));
    }
    for extra in assigned.difference(&ids) {
        out.push(Diagnostic::new(codes::E_PLAN, "/assignment", format!("unknown sub-test '{extra}' assigned")));
    }
    let mut staged: BTreeMap<&str, usize> = BTreeMap::new();
    for (k, stage) in plan.stages.iter().enumerate() {
        for s in &stage.subtests {
            if staged.insert(s.as_str(), k).is_some() {
                out.push(Diagnostic::new(codes::E_PLAN, format!("/stages/{k}"), format!("sub-test '{s}' staged twice")));
            }
            if !ids.contains(s.as_str()) {
                out.push(Diagnostic::new(codes::E_PLAN, format!("/stages/{k}"), format!("unknown sub-test '{s}' staged")));
            }
        }
        for g in &stage.groups {
            if !g.members.iter().all(|m| stage.subtests.contains(m)) {
                out.push(Diagnostic::new(codes::E_PLAN, format!("/stages/{k}/groups"), "group member outside its stage"));
            }
        }
    }
    for id in &ids {
        if !staged.contains_key(id) {
            out.push(Diagnostic::new(codes::E_PLAN, "/stages", format!("sub-test '{id}' is in no stage")));
        }
    }
    if plan.dag != interface_edges(d) {
        out.push(Diagnostic::new(codes::E_PLAN, "/dag", "DAG edges differ from the sub-test interfaces"));
    }
    for e in &plan.dag {
        let (Some(&a), Some(&b)) = (staged.get(e.producer.as_str()), staged.get(e.consumer.as_str())) else {
            continue;
        };
        let same_group = a == b
            && plan.stages[a]
                .group_of(&e.producer)
                .is_some_and(|g| g.members.iter().any(|m| *m == e.consumer));
        if e.iterative && !same_group {
            out.push(Diagnostic::new(
                codes::E_PLAN,
                "/dag",
                format!("iterative edge {} -> {} leaves its iteration group", e.producer, e.consumer),
            ));
        }
        if !e.iterative && !same_group && a >= b {
            out.push(Diagnostic::new(
                codes::E_PLAN,
                "/stages",
                format!("edge {} -> {} is not ordered by stage", e.producer, e.consumer),
            ));
        }
    }
    out
}
