//! The aggregator AGC-tracking scenario built in code: an aggregator with
//! 500 households delivering secondary frequency control, tested for its
//! sensitivity to ICT disturbances and split into a physical single-household
//! test and a 500-household controller-HIL simulation.
//!
//! The JSON fixtures shipped with the CLI encode the same documents.

use alloc::string::String;
use alloc::vec::Vec;

use crate::model::*;
use crate::taxonomy::DEFAULT_TAXONOMY_ID;

/// Contract threshold on normalised tracking RMSE. Fixture parameter.
pub const CONTRACT_RMSE_NORM: f64 = 0.1;
pub const HOUSEHOLDS: u32 = 500;
pub const SEED: u64 = 42;

fn ids(xs: &[&str]) -> Vec<Id> {
    xs.iter().map(|x| String::from(*x)).collect()
}

fn tags(xs: &[&str]) -> Vec<DomainTag> {
    xs.iter().map(|x| DomainTag::new(*x)).collect()
}

fn attrs(xs: &[(&str, Scalar)]) -> Attributes {
    xs.iter().map(|(k, v)| (String::from(*k), v.clone())).collect()
}

fn kw(v: f64) -> Scalar {
    Scalar::Number(Quantity::with_unit(v, "kW"))
}

fn component(id: &str, name: &str, kind: ComponentKind, domains: &[&str], attributes: Attributes) -> Component {
    Component {
        id: id.into(),
        name: name.into(),
        kind,
        domains: tags(domains),
        attributes,
    }
}

fn connection(id: &str, from: &str, to: &str, domain: &str, attributes: Attributes) -> Connection {
    Connection {
        id: id.into(),
        from: from.into(),
        to: to.into(),
        domain: DomainTag::new(domain),
        attributes,
    }
}

pub fn agc_sc() -> SystemConfiguration {
    use ComponentKind::*;
    SystemConfiguration {
        id: "agc_aggregator_sc".into(),
        components: alloc::vec![
            component("tso", "Transmission system operator", Abstract, &["electric_power", "ict", "market"], Attributes::new()),
            component(
                "agc_ref",
                "AGC reference signal",
                Abstract,
                &["ict"],
                attrs(&[
                    ("amplitude_kw", kw(400.0)),
                    ("period_steps", Scalar::num(48.0)),
                    ("shape", Scalar::Text("sine".into())),
                ]),
            ),
            component("aggregator_control", "Aggregator control system", Ict, &["ict"], Attributes::new()),
            component("aggregator_ict", "Aggregator ICT infrastructure", Ict, &["ict"], Attributes::new()),
            component(
                "household_hems",
                "Household HEMS",
                Ict,
                &["ict", "electric_power"],
                attrs(&[("count", Scalar::num(f64::from(HOUSEHOLDS)))]),
            ),
            component(
                "household_der",
                "Household DER",
                Physical,
                &["electric_power", "ict"],
                attrs(&[("count", Scalar::num(f64::from(HOUSEHOLDS))), ("capacity_kw", kw(2.0))]),
            ),
            component("distribution_grid", "Distribution grid", Physical, &["electric_power"], Attributes::new()),
        ],
        connections: alloc::vec![
            connection("c_tso_agg", "tso", "aggregator_control", "ict", attrs(&[("signal", Scalar::Text("agc".into()))])),
            connection("c_agg_ict", "aggregator_control", "aggregator_ict", "ict", Attributes::new()),
            connection(
                "c_agg_hems",
                "aggregator_ict",
                "household_hems",
                "ict",
                attrs(&[
                    ("packet_loss", Scalar::num(0.0)),
                    ("latency_ms", Scalar::Number(Quantity::with_unit(0.0, "ms"))),
                ]),
            ),
            connection("c_hems_der", "household_hems", "household_der", "ict", Attributes::new()),
            connection("c_der_grid", "household_der", "distribution_grid", "electric_power", Attributes::new()),
            connection("c_grid_tso", "distribution_grid", "tso", "electric_power", Attributes::new()),
        ],
        functions: alloc::vec![
            FunctionDef { id: "f_central_control".into(), name: "Aggregator central control".into(), actors: ids(&["aggregator_control"]) },
            FunctionDef { id: "f_local_der_control".into(), name: "Local DER control".into(), actors: ids(&["household_hems", "household_der"]) },
            FunctionDef {
                id: "f_agg_hems_comm".into(),
                name: "Aggregator-HEMS communication".into(),
                actors: ids(&["aggregator_ict", "household_hems"]),
            },
            FunctionDef { id: "f_agc_dispatch".into(), name: "AGC dispatch".into(), actors: ids(&["tso"]) },
        ],
    }
}

fn contract_quality(id: &str, target: &str) -> QualityAttribute {
    QualityAttribute {
        id: id.into(),
        target_ref: target.into(),
        predicate: Comparison::Le,
        threshold: Quantity::with_unit(CONTRACT_RMSE_NORM, "p.u."),
    }
}

fn ict_link_variability() -> VariabilityAttribute {
    VariabilityAttribute {
        id: "ict_link".into(),
        parameter: "c_agg_hems.packet_loss".into(),
        range: VariabilityRange::Interval { lo: 0.0, hi: 1.0 },
    }
}

pub fn agc_test_case() -> HolisticTestCase {
    HolisticTestCase {
        id: "agc_holistic".into(),
        system_configuration: Some(ScSource::Inline(agc_sc())),
        scope: TestScope {
            narrative: "A 500-household DER aggregator offers secondary frequency control. We drive it with \
                        the AGC setpoint stream and degrade the aggregator-HEMS links to see how long the fleet \
                        output keeps following the reference."
                .into(),
            sut: SystemUnderTest {
                components: ids(&["aggregator_control", "aggregator_ict", "household_hems", "household_der"]),
                inputs: ids(&["agc_ref"]),
                outputs: ids(&["household_power"]),
            },
            oui: ids(&["aggregator_control"]),
            doi: tags(&["electric_power", "ict"]),
            fut: ids(&["f_central_control", "f_local_der_control", "f_agg_hems_comm"]),
            fui: ids(&["f_central_control"]),
            poi: Poi {
                kind: PoiKind::Characterization,
                statement: "Tracking error of the fleet versus packet loss on the aggregator-HEMS link".into(),
            },
            criteria: TestCriteria {
                target: alloc::vec![
                    TargetCriterion {
                        id: "service_quality".into(),
                        metric: "tracking_rmse_norm".into(),
                        description: "RMS of AGC reference minus aggregated household power, per unit of amplitude".into(),
                        combination: Some("st2.tracking_rmse_norm".into()),
                    },
                    TargetCriterion {
                        id: "upscaled_household_error".into(),
                        metric: "fleet_household_error_kw".into(),
                        description: "Single-household setpoint error scaled to the fleet".into(),
                        combination: Some("scale(st1.avg_household_error, 500)".into()),
                    },
                ],
                variability: alloc::vec![ict_link_variability()],
                quality: alloc::vec![contract_quality("contract", "service_quality")],
            },
        },
    }
}

fn requirement(category: &str, class: &str, cons: Vec<AttributeConstraint>) -> Requirement {
    Requirement {
        category: category.into(),
        class: class.into(),
        attribute_constraints: cons,
    }
}

fn port(id: &str, direction: PortDirection, peer: &str) -> InterfacePort {
    InterfacePort {
        id: id.into(),
        direction,
        artifact_type: crate::exec::MODEL_PARAMETERS.into(),
        peer: peer.into(),
        iterative: false,
        max_iterations: None,
    }
}

pub fn agc_decomposition() -> Decomposition {
    let tc = agc_test_case();
    let st1 = SubTest {
        id: "st1".into(),
        parent: tc.id.clone(),
        scope: TestScope {
            narrative: "Physical laboratory test of the aggregator link to a single household; \
                        yields an availability and latency model of the ICT connection."
                .into(),
            sut: SystemUnderTest {
                components: ids(&["aggregator_ict", "household_hems", "household_der"]),
                inputs: ids(&["setpoint"]),
                outputs: ids(&["household_power"]),
            },
            oui: ids(&["aggregator_ict"]),
            doi: tags(&["ict"]),
            fut: ids(&["f_agg_hems_comm"]),
            fui: ids(&["f_agg_hems_comm"]),
            poi: Poi {
                kind: PoiKind::Characterization,
                statement: "Availability and latency of the aggregator-HEMS link".into(),
            },
            criteria: TestCriteria {
                target: alloc::vec![TargetCriterion {
                    id: "household_error".into(),
                    metric: "avg_household_error".into(),
                    description: "Mean absolute setpoint deviation at the household".into(),
                    combination: None,
                }],
                variability: Vec::new(),
                quality: Vec::new(),
            },
        },
        requirements: alloc::vec![
            requirement("purpose_of_investigation", "characterization", Vec::new()),
            requirement(
                "test_setup",
                "physical_lab",
                alloc::vec![AttributeConstraint {
                    attribute: "ict_emulation".into(),
                    predicate: ConstraintOp::Eq,
                    value: ConstraintValue::One(Scalar::Bool(true)),
                }],
            ),
            requirement("test_criteria", "time_series_error", Vec::new()),
            requirement("test_design", "scripted_sequence", Vec::new()),
            requirement("object_of_investigation", "subsystem", Vec::new()),
            requirement("interfaces", "model_parameters", Vec::new()),
        ],
        interfaces: alloc::vec![port("model_out", PortDirection::Produces, "st2")],
        executor: ExecutorSpec {
            kind: ExecutorKind::Scripted,
            params: attrs(&[
                ("artifact.model_parameters.latency_steps", Scalar::num(1.0)),
                ("artifact.model_parameters.packet_loss_probability", Scalar::num(0.02)),
                ("metric.avg_household_error", Scalar::num(0.016)),
            ]),
            seed: None,
        },
    };

    let target = |id: &str, metric: &str, description: &str| TargetCriterion {
        id: id.into(),
        metric: metric.into(),
        description: description.into(),
        combination: None,
    };
    let st2 = SubTest {
        id: "st2".into(),
        parent: tc.id.clone(),
        scope: TestScope {
            narrative: "Controller hardware-in-the-loop simulation of the aggregator with 500 households, \
                        using the link model measured in st1."
                .into(),
            sut: tc.scope.sut.clone(),
            oui: ids(&["aggregator_control"]),
            doi: tags(&["electric_power", "ict"]),
            fut: tc.scope.fut.clone(),
            fui: ids(&["f_central_control"]),
            poi: tc.scope.poi.clone(),
            criteria: TestCriteria {
                target: alloc::vec![
                    target("rmse", "tracking_rmse", "RMS deviation from the reference"),
                    target("rmse_norm", "tracking_rmse_norm", "RMS deviation per unit of amplitude"),
                    target("max_dev", "tracking_max", "Largest absolute deviation"),
                ],
                variability: alloc::vec![ict_link_variability()],
                quality: alloc::vec![contract_quality("contract", "rmse_norm")],
            },
        },
        requirements: alloc::vec![
            requirement("purpose_of_investigation", "characterization", Vec::new()),
            requirement(
                "test_setup",
                "controller_hil",
                alloc::vec![AttributeConstraint {
                    attribute: "max_nodes".into(),
                    predicate: ConstraintOp::Ge,
                    value: ConstraintValue::One(Scalar::num(f64::from(HOUSEHOLDS))),
                }],
            ),
            requirement("test_criteria", "sweep_metric", Vec::new()),
            requirement("test_design", "bisection_characterization", Vec::new()),
            requirement("object_of_investigation", "system", Vec::new()),
            requirement("interfaces", "model_parameters", Vec::new()),
        ],
        interfaces: alloc::vec![port("model_in", PortDirection::Consumes, "st1")],
        executor: ExecutorSpec {
            kind: ExecutorKind::ModelAgcTracking,
            params: attrs(&[
                ("n_households", Scalar::num(f64::from(HOUSEHOLDS))),
                ("capacity_kw", Scalar::num(2.0)),
                ("reference_shape", Scalar::Text("sine".into())),
                ("reference_amplitude_kw", Scalar::num(400.0)),
                ("reference_period_steps", Scalar::num(48.0)),
                ("steps", Scalar::num(96.0)),
            ]),
            seed: Some(SEED),
        },
    };
    Decomposition {
        id: "agc_split".into(),
        parent: tc.id,
        taxonomy: DEFAULT_TAXONOMY_ID.into(),
        subtests: alloc::vec![st1, st2],
    }
}

fn cap(category: &str, class: &str, attributes: Attributes) -> Capability {
    Capability {
        category: category.into(),
        class: class.into(),
        attributes,
    }
}

fn plain(category: &str, classes: &[&str]) -> Vec<Capability> {
    classes.iter().map(|c| cap(category, c, Attributes::new())).collect()
}

/// Physical lab A, large controller-HIL lab B, and a cheaper but too small
/// controller-HIL lab C.
pub fn agc_profiles() -> Vec<RiProfile> {
    let mut a = plain("purpose_of_investigation", &["characterization", "validation"]);
    a.push(cap(
        "test_setup",
        "physical_lab",
        attrs(&[
            ("max_power_kw", Scalar::num(30.0)),
            ("ict_emulation", Scalar::Bool(true)),
            ("households", Scalar::num(1.0)),
        ]),
    ));
    a.extend(plain("test_criteria", &["threshold_metric", "time_series_error"]));
    a.extend(plain("test_design", &["scripted_sequence"]));
    a.extend(plain("object_of_investigation", &["component", "subsystem"]));
    a.extend(plain("interfaces", &["model_parameters", "time_series"]));

    let hil = |max_nodes: f64| {
        let mut c = plain("purpose_of_investigation", &["characterization", "validation", "verification"]);
        c.push(cap(
            "test_setup",
            "controller_hil",
            attrs(&[("max_nodes", Scalar::num(max_nodes)), ("real_time", Scalar::Bool(true))]),
        ));
        c.push(cap(
            "test_setup",
            "pure_simulation",
            attrs(&[("max_nodes", Scalar::num(100_000.0)), ("real_time", Scalar::Bool(false))]),
        ));
        c.extend(plain("test_criteria", &["sweep_metric", "threshold_metric", "time_series_error"]));
        c.extend(plain("test_design", &["bisection_characterization", "factorial_sweep", "scripted_sequence"]));
        c.extend(plain("object_of_investigation", &["subsystem", "system"]));
        c.extend(plain("interfaces", &["model_parameters", "time_series"]));
        c
    };

    let profile = |id: &str, name: &str, capabilities: Vec<Capability>, cost: f64| RiProfile {
        id: id.into(),
        name: name.into(),
        taxonomy: DEFAULT_TAXONOMY_ID.into(),
        capabilities,
        cost,
    };
    alloc::vec![
        profile("lab_A", "Physical smart-home laboratory", a, 3.0),
        profile("lab_B", "Controller-HIL laboratory", hil(1000.0), 1.0),
        profile("lab_C", "Small controller-HIL bench", hil(200.0), 0.5),
    ]
}
