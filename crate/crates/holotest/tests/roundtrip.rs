mod common;

use holotest::specio;
use holotest_core::model::DocumentKind;

fn roundtrip(kind: DocumentKind, cases: u32) {
    common::runner(cases)
        .run(&common::document(kind), |doc| common::roundtrip_case(kind, &doc))
        .unwrap();
}

#[test]
fn system_configuration_roundtrips() {
    roundtrip(DocumentKind::SystemConfiguration, 256);
}

#[test]
fn test_case_roundtrips() {
    roundtrip(DocumentKind::TestCase, 256);
}

#[test]
fn subtest_set_roundtrips() {
    roundtrip(DocumentKind::SubtestSet, 256);
}

#[test]
fn ri_profile_roundtrips() {
    roundtrip(DocumentKind::RiProfile, 256);
}

#[test]
fn plan_roundtrips() {
    roundtrip(DocumentKind::Plan, 256);
}

#[test]
fn result_set_roundtrips() {
    roundtrip(DocumentKind::ResultSet, 256);
}

#[test]
fn taxonomy_roundtrips() {
    roundtrip(DocumentKind::Taxonomy, 256);
}

#[test]
fn parse_any_sniffs_every_kind() {
    for kind in DocumentKind::ALL {
        let mut runner = common::runner(16);
        runner
            .run(&common::document(kind), |doc| {
                let parsed = specio::parse_any(&specio::serialize(&doc));
                assert_eq!(parsed.document.as_ref(), Some(&doc));
                Ok(())
            })
            .unwrap();
    }
}
