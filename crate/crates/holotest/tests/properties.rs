mod common;

use common::oracle;
use holotest_core::mapping;
use holotest_core::taxonomy::{default_taxonomy, DEFAULT_TAXONOMY_ID};
use holotest_core::validate::{validate_system_configuration, validate_test_case};
use holotest_core::Diagnostic;
use proptest::prelude::*;

fn codes(diags: &[Diagnostic]) -> Vec<(&'static str, String)> {
    let mut v: Vec<_> = diags.iter().map(|d| (d.code, d.message.clone())).collect();
    v.sort();
    v
}

proptest! {
    #[test]
    fn assignment_matches_exhaustive_search(inst in oracle::mapping_instance()) {
        oracle::check_assignment(&inst).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn stages_respect_edges(inst in oracle::dag_instance()) {
        oracle::check_dag(&inst).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn generated_scenarios_are_valid((sc, tc) in oracle::valid_scenario()) {
        prop_assert_eq!(validate_system_configuration(&sc), vec![]);
        prop_assert_eq!(validate_test_case(&tc, &sc), vec![]);
    }

    #[test]
    fn configuration_checks_ignore_order(
        (sc, _) in oracle::valid_scenario(),
        dangling in any::<bool>(),
        rotate in 0usize..7,
    ) {
        let mut sc = sc;
        if dangling {
            sc.functions[0].actors.push("ghost".into());
            sc.components[0].domains.clear();
        }
        let before = codes(&validate_system_configuration(&sc));
        let mut shuffled = sc.clone();
        let k = rotate % shuffled.components.len();
        shuffled.components.rotate_left(k);
        shuffled.components.reverse();
        shuffled.connections.reverse();
        shuffled.functions.reverse();
        prop_assert_eq!(before.clone(), codes(&validate_system_configuration(&shuffled)));
        prop_assert_eq!(before.is_empty(), !dangling);
    }

    #[test]
    fn subset_violations_are_reported((sc, tc) in oracle::valid_scenario(), which in 0usize..3) {
        let mut bad = tc.clone();
        let code = match which {
            0 => { bad.scope.oui.push("outsider".into()); "E_OUI_NOT_IN_SUT" }
            1 => { bad.scope.fui.push("f_missing".into()); "E_FUI_NOT_IN_FUT" }
            _ => { bad.scope.oui.clear(); "E_EMPTY_SET" }
        };
        let diags = validate_test_case(&bad, &sc);
        prop_assert!(diags.iter().any(|d| d.code == code), "{:?}", diags);
    }

    #[test]
    fn trivial_decomposition_validates((sc, tc) in oracle::valid_scenario()) {
        let (tc2, d) = mapping::trivial_decomposition(&tc, DEFAULT_TAXONOMY_ID);
        let diags = mapping::validate_subtest_set(&tc2, &sc, &d, Some(&default_taxonomy()));
        prop_assert!(diags.iter().all(|d| !d.is_error()), "{:?}", diags);
    }
}

#[test]
fn oracle_sees_infeasible_instances() {
    // Guards against a generator that never exercises the interesting cases.
    let draws = common::sample(&oracle::mapping_instance(), 300);
    let infeasible = draws.iter().filter(|i| oracle::brute_force(i).is_none()).count();
    assert!(infeasible > 10 && infeasible < 250, "{infeasible} infeasible of 300");
}

#[test]
fn dag_generator_covers_both_outcomes() {
    let draws = common::sample(&oracle::dag_instance(), 300);
    let ok = draws.iter().filter(|i| oracle::dag_expectation(i).0).count();
    assert!(ok > 30 && ok < 270, "{ok} schedulable of 300");
}

