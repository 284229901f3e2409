//! Domain model: system configurations, holistic test cases, sub-tests,
//! research-infrastructure profiles, plans and results.
//!
//! Every type is plain data. Structural checks live in [`crate::validate`];
//! the JSON codec lives in the companion crate.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub type Id = String;

/// Number with an optional, unchecked unit label.
#[derive(Debug, Clone, PartialEq)]
pub struct Quantity {
    pub value: f64,
    pub unit: Option<String>,
}

impl Quantity {
    pub fn new(value: f64) -> Self {
        Quantity { value, unit: None }
    }

    pub fn with_unit(value: f64, unit: impl Into<String>) -> Self {
        Quantity {
            value,
            unit: Some(unit.into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Number(Quantity),
    Text(String),
    Bool(bool),
}

impl Scalar {
    pub fn num(v: f64) -> Self {
        Scalar::Number(Quantity::new(v))
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Scalar::Number(q) => Some(q.value),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Scalar::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Scalar::Bool(b) => Some(*b),
            _ => None,
        }
    }

    /// Equality on value only; units are labels.
    pub fn same_value(&self, other: &Scalar) -> bool {
        match (self, other) {
            (Scalar::Number(a), Scalar::Number(b)) => a.value == b.value,
            (Scalar::Text(a), Scalar::Text(b)) => a == b,
            (Scalar::Bool(a), Scalar::Bool(b)) => a == b,
            _ => false,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Number(q) => match &q.unit {
                Some(u) => write!(f, "{} {}", q.value, u),
                None => write!(f, "{}", q.value),
            },
            Scalar::Text(s) => write!(f, "{s:?}"),
            Scalar::Bool(b) => write!(f, "{b}"),
        }
    }
}

pub type Attributes = BTreeMap<String, Scalar>;

/// Domain tags seeded into the registry. Others are accepted with a warning.
pub const SEEDED_DOMAINS: [&str; 4] = ["electric_power", "ict", "thermal", "market"];

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DomainTag(pub String);

impl DomainTag {
    pub fn new(name: impl Into<String>) -> Self {
        DomainTag(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Non-empty, lowercase snake-case, starting with a letter.
    pub fn is_well_formed(&self) -> bool {
        is_snake_identifier(&self.0)
    }

    pub fn is_seeded(&self) -> bool {
        SEEDED_DOMAINS.contains(&self.0.as_str())
    }
}

impl fmt::Display for DomainTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub fn is_snake_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ComponentKind {
    Physical,
    Ict,
    Abstract,
}

impl ComponentKind {
    pub const ALL: [ComponentKind; 3] = [
        ComponentKind::Physical,
        ComponentKind::Ict,
        ComponentKind::Abstract,
    ];

    pub const fn as_str(self) -> &'static str {
        match self {
            ComponentKind::Physical => "physical",
            ComponentKind::Ict => "ict",
            ComponentKind::Abstract => "abstract",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub id: Id,
    pub name: String,
    pub kind: ComponentKind,
    pub domains: Vec<DomainTag>,
    pub attributes: Attributes,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Connection {
    pub id: Id,
    pub from: Id,
    pub to: Id,
    pub domain: DomainTag,
    pub attributes: Attributes,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionDef {
    pub id: Id,
    pub name: String,
    pub actors: Vec<Id>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SystemConfiguration {
    pub id: Id,
    pub components: Vec<Component>,
    pub connections: Vec<Connection>,
    pub functions: Vec<FunctionDef>,
}

impl SystemConfiguration {
    pub fn component(&self, id: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.id == id)
    }

    pub fn connection(&self, id: &str) -> Option<&Connection> {
        self.connections.iter().find(|c| c.id == id)
    }

    pub fn function(&self, id: &str) -> Option<&FunctionDef> {
        self.functions.iter().find(|f| f.id == id)
    }
}

/// Cross-file reference written as `{"$ref": "<path>#<id>"}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DocRef {
    pub path: String,
    pub id: Id,
}

impl DocRef {
    pub fn parse(text: &str) -> Option<Self> {
        let (path, id) = text.rsplit_once('#')?;
        if path.is_empty() || id.is_empty() {
            return None;
        }
        Some(DocRef {
            path: path.into(),
            id: id.into(),
        })
    }
}

impl fmt::Display for DocRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.path, self.id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScSource {
    Inline(SystemConfiguration),
    Ref(DocRef),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PoiKind {
    Characterization,
    Validation,
    Verification,
}

impl PoiKind {
    pub const ALL: [PoiKind; 3] = [
        PoiKind::Characterization,
        PoiKind::Validation,
        PoiKind::Verification,
    ];

    pub const fn as_str(self) -> &'static str {
        match self {
            PoiKind::Characterization => "characterization",
            PoiKind::Validation => "validation",
            PoiKind::Verification => "verification",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Poi {
    pub kind: PoiKind,
    pub statement: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetCriterion {
    pub id: Id,
    pub metric: Id,
    pub description: String,
    pub combination: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum VariabilityRange {
    Interval { lo: f64, hi: f64 },
    Enumerated(Vec<Scalar>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariabilityAttribute {
    pub id: Id,
    /// Dotted path, e.g. `c_agg_hems.packet_loss`.
    pub parameter: String,
    pub range: VariabilityRange,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Comparison {
    Lt,
    Le,
    Gt,
    Ge,
}

impl Comparison {
    pub const ALL: [Comparison; 4] = [Comparison::Lt, Comparison::Le, Comparison::Gt, Comparison::Ge];

    pub const fn as_str(self) -> &'static str {
        match self {
            Comparison::Lt => "lt",
            Comparison::Le => "le",
            Comparison::Gt => "gt",
            Comparison::Ge => "ge",
        }
    }

    pub const fn symbol(self) -> &'static str {
        match self {
            Comparison::Lt => "<",
            Comparison::Le => "<=",
            Comparison::Gt => ">",
            Comparison::Ge => ">=",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }

    pub fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            Comparison::Lt => lhs < rhs,
            Comparison::Le => lhs <= rhs,
            Comparison::Gt => lhs > rhs,
            Comparison::Ge => lhs >= rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityAttribute {
    pub id: Id,
    pub target_ref: Id,
    pub predicate: Comparison,
    pub threshold: Quantity,
}

impl QualityAttribute {
    pub fn passes(&self, value: f64) -> bool {
        self.predicate.holds(value, self.threshold.value)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TestCriteria {
    pub target: Vec<TargetCriterion>,
    pub variability: Vec<VariabilityAttribute>,
    pub quality: Vec<QualityAttribute>,
}

impl TestCriteria {
    pub fn target(&self, id: &str) -> Option<&TargetCriterion> {
        self.target.iter().find(|t| t.id == id)
    }

    pub fn variability(&self, id: &str) -> Option<&VariabilityAttribute> {
        self.variability.iter().find(|v| v.id == id)
    }

    pub fn quality(&self, id: &str) -> Option<&QualityAttribute> {
        self.quality.iter().find(|q| q.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SystemUnderTest {
    pub components: Vec<Id>,
    pub inputs: Vec<Id>,
    pub outputs: Vec<Id>,
}

/// The what-and-why items shared by holistic test cases and sub-tests.
#[derive(Debug, Clone, PartialEq)]
pub struct TestScope {
    pub narrative: String,
    pub sut: SystemUnderTest,
    pub oui: Vec<Id>,
    pub doi: Vec<DomainTag>,
    pub fut: Vec<Id>,
    pub fui: Vec<Id>,
    pub poi: Poi,
    pub criteria: TestCriteria,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HolisticTestCase {
    pub id: Id,
    /// Absent when the configuration is supplied out of band.
    pub system_configuration: Option<ScSource>,
    pub scope: TestScope,
}

impl HolisticTestCase {
    pub fn inline_sc(&self) -> Option<&SystemConfiguration> {
        match &self.system_configuration {
            Some(ScSource::Inline(sc)) => Some(sc),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PortDirection {
    Produces,
    Consumes,
}

impl PortDirection {
    pub const fn as_str(self) -> &'static str {
        match self {
            PortDirection::Produces => "produces",
            PortDirection::Consumes => "consumes",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "produces" => Some(PortDirection::Produces),
            "consumes" => Some(PortDirection::Consumes),
            _ => None,
        }
    }
}

pub const EXTERNAL_PEER: &str = "external";

#[derive(Debug, Clone, PartialEq)]
pub struct InterfacePort {
    pub id: Id,
    pub direction: PortDirection,
    pub artifact_type: Id,
    /// Peer sub-test id, or [`EXTERNAL_PEER`].
    pub peer: Id,
    pub iterative: bool,
    pub max_iterations: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExecutorKind {
    Scripted,
    ModelIctDisturbance,
    ModelAgcTracking,
}

impl ExecutorKind {
    pub const ALL: [ExecutorKind; 3] = [
        ExecutorKind::Scripted,
        ExecutorKind::ModelIctDisturbance,
        ExecutorKind::ModelAgcTracking,
    ];

    pub const fn as_str(self) -> &'static str {
        match self {
            ExecutorKind::Scripted => "scripted",
            ExecutorKind::ModelIctDisturbance => "model_ict_disturbance",
            ExecutorKind::ModelAgcTracking => "model_agc_tracking",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecutorSpec {
    pub kind: ExecutorKind,
    pub params: Attributes,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConstraintOp {
    Eq,
    Lt,
    Le,
    Gt,
    Ge,
    In,
}

impl ConstraintOp {
    pub const ALL: [ConstraintOp; 6] = [
        ConstraintOp::Eq,
        ConstraintOp::Lt,
        ConstraintOp::Le,
        ConstraintOp::Gt,
        ConstraintOp::Ge,
        ConstraintOp::In,
    ];

    pub const fn as_str(self) -> &'static str {
        match self {
            ConstraintOp::Eq => "eq",
            ConstraintOp::Lt => "lt",
            ConstraintOp::Le => "le",
            ConstraintOp::Gt => "gt",
            ConstraintOp::Ge => "ge",
            ConstraintOp::In => "in",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintValue {
    One(Scalar),
    Many(Vec<Scalar>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttributeConstraint {
    pub attribute: String,
    pub predicate: ConstraintOp,
    pub value: ConstraintValue,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Requirement {
    pub category: Id,
    pub class: Id,
    pub attribute_constraints: Vec<AttributeConstraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubTest {
    pub id: Id,
    pub parent: Id,
    pub scope: TestScope,
    pub requirements: Vec<Requirement>,
    pub interfaces: Vec<InterfacePort>,
    pub executor: ExecutorSpec,
}

/// Author-supplied split of a holistic test into sub-tests.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub id: Id,
    pub parent: Id,
    pub taxonomy: Id,
    pub subtests: Vec<SubTest>,
}

impl Decomposition {
    pub fn subtest(&self, id: &str) -> Option<&SubTest> {
        self.subtests.iter().find(|s| s.id == id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Capability {
    pub category: Id,
    pub class: Id,
    pub attributes: Attributes,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiProfile {
    pub id: Id,
    pub name: String,
    pub taxonomy: Id,
    pub capabilities: Vec<Capability>,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DagEdge {
    pub producer: Id,
    pub consumer: Id,
    pub artifact_type: Id,
    pub iterative: bool,
}

/// Sub-tests joined by iterative edges, re-run as a unit. `members` are in
/// execution order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationGroup {
    pub members: Vec<Id>,
    pub max_iterations: u32,
}

/// One topological stratum. `subtests` lists every member id in ascending
/// order, including the members of `groups`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Stage {
    pub subtests: Vec<Id>,
    pub groups: Vec<IterationGroup>,
}

impl Stage {
    pub fn group_of(&self, id: &str) -> Option<&IterationGroup> {
        self.groups.iter().find(|g| g.members.iter().any(|m| m == id))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MappingPlan {
    pub id: Id,
    pub test_case: DocRef,
    pub subtest_set: DocRef,
    pub lambda: f64,
    pub assignment: BTreeMap<Id, Id>,
    pub dag: Vec<DagEdge>,
    pub stages: Vec<Stage>,
    pub total_cost: f64,
}

impl MappingPlan {
    pub fn stage_index(&self, subtest: &str) -> Option<usize> {
        self.stages
            .iter()
            .position(|s| s.subtests.iter().any(|m| m == subtest))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RecordStatus {
    Completed,
    Failed,
    IterationLimit,
}

impl RecordStatus {
    pub const ALL: [RecordStatus; 3] = [
        RecordStatus::Completed,
        RecordStatus::Failed,
        RecordStatus::IterationLimit,
    ];

    pub const fn as_str(self) -> &'static str {
        match self {
            RecordStatus::Completed => "completed",
            RecordStatus::Failed => "failed",
            RecordStatus::IterationLimit => "iteration_limit",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }

    /// Records whose metrics may feed a combination.
    pub fn has_metrics(self) -> bool {
        !matches!(self, RecordStatus::Failed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub subtest_id: Id,
    pub ri_id: Id,
    pub metrics: BTreeMap<Id, f64>,
    /// artifact_type -> payload location relative to the record.
    pub artifacts: BTreeMap<Id, String>,
    pub status: RecordStatus,
    pub message: Option<String>,
}

/// Data handed from a producer to its consumers.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub artifact_type: Id,
    pub payload: Attributes,
    pub producer: Id,
    pub iteration: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SweepMode {
    Grid,
    Bisection,
}

impl SweepMode {
    pub const fn as_str(self) -> &'static str {
        match self {
            SweepMode::Grid => "grid",
            SweepMode::Bisection => "bisection",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "grid" => Some(SweepMode::Grid),
            "bisection" => Some(SweepMode::Bisection),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRequest {
    pub variability_id: Id,
    pub quality_id: Id,
    pub mode: SweepMode,
    pub grid_points: u32,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSample {
    pub value: f64,
    pub metrics: BTreeMap<Id, f64>,
    pub quality_pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharacterizationRecord {
    pub subtest_id: Id,
    pub variability_id: Id,
    /// Parameter path of the varied attribute.
    pub parameter: String,
    pub quality_id: Id,
    pub mode: SweepMode,
    pub samples: Vec<SweepSample>,
    pub boundary: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    Pass,
    Fail,
}

impl Outcome {
    pub const fn as_str(self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "pass" => Some(Outcome::Pass),
            "fail" => Some(Outcome::Fail),
            _ => None,
        }
    }

    pub fn from_bool(pass: bool) -> Self {
        if pass {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Overall {
    Verdict(Outcome),
    /// Characterization summary: variability id -> boundary value.
    Characterization(BTreeMap<Id, Option<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct HolisticVerdict {
    pub test_case: Id,
    /// `None` marks an unevaluable target.
    pub targets: BTreeMap<Id, Option<f64>>,
    pub quality: BTreeMap<Id, Outcome>,
    pub overall: Option<Overall>,
    pub provenance: BTreeMap<Id, Vec<Id>>,
}

/// Contents of a `result_set` document.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultSet {
    pub id: Id,
    pub records: Vec<ResultRecord>,
    pub characterizations: Vec<CharacterizationRecord>,
    pub verdict: Option<HolisticVerdict>,
}

/// Test-classification registry.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Taxonomy {
    pub id: Id,
    pub categories: Vec<Category>,
    pub classes: Vec<Class>,
    pub relations: Vec<CategoryRelation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Category {
    pub id: Id,
    pub description: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AttributeType {
    Numeric,
    Text,
    Bool,
}

impl AttributeType {
    pub const fn as_str(self) -> &'static str {
        match self {
            AttributeType::Numeric => "numeric",
            AttributeType::Text => "text",
            AttributeType::Bool => "bool",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "numeric" => Some(AttributeType::Numeric),
            "text" => Some(AttributeType::Text),
            "bool" => Some(AttributeType::Bool),
            _ => None,
        }
    }

    pub fn admits(self, value: &Scalar) -> bool {
        matches!(
            (self, value),
            (AttributeType::Numeric, Scalar::Number(_))
                | (AttributeType::Text, Scalar::Text(_))
                | (AttributeType::Bool, Scalar::Bool(_))
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Class {
    pub id: Id,
    pub category: Id,
    pub description: String,
    pub attribute_schema: BTreeMap<String, AttributeType>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CategoryRelation {
    pub from: Id,
    pub to: Id,
    pub compatible: Vec<(Id, Id)>,
}

/// Document kinds understood by the codec.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DocumentKind {
    SystemConfiguration,
    TestCase,
    SubtestSet,
    RiProfile,
    Plan,
    ResultSet,
    Taxonomy,
}

impl DocumentKind {
    pub const ALL: [DocumentKind; 7] = [
        DocumentKind::SystemConfiguration,
        DocumentKind::TestCase,
        DocumentKind::SubtestSet,
        DocumentKind::RiProfile,
        DocumentKind::Plan,
        DocumentKind::ResultSet,
        DocumentKind::Taxonomy,
    ];

    pub const fn as_str(self) -> &'static str {
        match self {
            DocumentKind::SystemConfiguration => "system_configuration",
            DocumentKind::TestCase => "test_case",
            DocumentKind::SubtestSet => "subtest_set",
            DocumentKind::RiProfile => "ri_profile",
            DocumentKind::Plan => "plan",
            DocumentKind::ResultSet => "result_set",
            DocumentKind::Taxonomy => "taxonomy",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

impl fmt::Display for DocumentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Any parsed document.
#[derive(Debug, Clone, PartialEq)]
pub enum Document {
    SystemConfiguration(SystemConfiguration),
    TestCase(HolisticTestCase),
    SubtestSet(Decomposition),
    RiProfile(RiProfile),
    Plan(MappingPlan),
    ResultSet(ResultSet),
    Taxonomy(Taxonomy),
}

impl Document {
    pub fn kind(&self) -> DocumentKind {
        match self {
            Document::SystemConfiguration(_) => DocumentKind::SystemConfiguration,
            Document::TestCase(_) => DocumentKind::TestCase,
            Document::SubtestSet(_) => DocumentKind::SubtestSet,
            Document::RiProfile(_) => DocumentKind::RiProfile,
            Document::Plan(_) => DocumentKind::Plan,
            Document::ResultSet(_) => DocumentKind::ResultSet,
            Document::Taxonomy(_) => DocumentKind::Taxonomy,
        }
    }

    pub fn id(&self) -> &str {
        match self {
            Document::SystemConfiguration(d) => &d.id,
            Document::TestCase(d) => &d.id,
            Document::SubtestSet(d) => &d.id,
            Document::RiProfile(d) => &d.id,
            Document::Plan(d) => &d.id,
            Document::ResultSet(d) => &d.id,
            Document::Taxonomy(d) => &d.id,
        }
    }
}
