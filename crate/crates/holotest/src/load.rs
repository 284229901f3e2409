//! Reading documents from disk and following `$ref` links.

use std::path::{Path, PathBuf};

use holotest_core::diag::{codes, Diagnostic};
use holotest_core::model::*;

use crate::specio::{self, Doc};

pub fn read_bytes(path: &Path) -> Result<Vec<u8>, Vec<Diagnostic>> {
    std::fs::read(path).map_err(|e| {
        vec![Diagnostic::new(codes::E_REF, "", format!("cannot read {}: {e}", path.display()))]
    })
}

pub fn read_as<T: Doc>(path: &Path) -> Result<(T, Vec<Diagnostic>), Vec<Diagnostic>> {
    specio::parse_as(&read_bytes(path)?)
}

/// Location a reference found in `from` points at.
pub fn ref_target(from: &Path, r: &DocRef) -> PathBuf {
    from.parent().unwrap_or(Path::new("")).join(&r.path)
}

/// Loads the document `r` names, relative to the file `from` holding it.
pub fn resolve<T: Doc>(from: &Path, r: &DocRef, at: &str) -> Result<(T, Vec<Diagnostic>), Vec<Diagnostic>> {
    let target = ref_target(from, r);
    let dangling = |why: String| vec![Diagnostic::new(codes::E_REF, at, format!("reference '{r}': {why}"))];
    let bytes = std::fs::read(&target).map_err(|e| dangling(format!("cannot read {}: {e}", target.display())))?;
    let (doc, warnings) = specio::parse_as::<T>(&bytes).map_err(|diags| {
        diags
            .into_iter()
            .map(|d| Diagnostic {
                message: format!("in {}: {}", target.display(), d.message),
                ..d
            })
            .collect::<Vec<_>>()
    })?;
    let id = doc.doc_id();
    if id != r.id {
        return Err(dangling(format!("{} holds '{id}', not '{}'", target.display(), r.id)));
    }
    Ok((doc, warnings))
}

/// Reads a test case and replaces a referenced configuration by its
/// contents.
pub fn read_test_case(path: &Path) -> Result<(HolisticTestCase, Vec<Diagnostic>), Vec<Diagnostic>> {
    let (mut tc, mut warnings) = read_as::<HolisticTestCase>(path)?;
    warnings.extend(inline_sc(&mut tc, path)?);
    Ok((tc, warnings))
}

pub fn inline_sc(tc: &mut HolisticTestCase, path: &Path) -> Result<Vec<Diagnostic>, Vec<Diagnostic>> {
    if let Some(ScSource::Ref(r)) = &tc.system_configuration {
        let (sc, w) = resolve::<SystemConfiguration>(path, r, "/system_configuration")?;
        tc.system_configuration = Some(ScSource::Inline(sc));
        return Ok(w);
    }
    Ok(Vec::new())
}

/// A plan with the documents it references, configuration inlined.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanBundle {
    pub plan: MappingPlan,
    pub test_case: HolisticTestCase,
    pub subtests: Decomposition,
}

impl PlanBundle {
    pub fn sc(&self) -> Option<&SystemConfiguration> {
        self.test_case.inline_sc()
    }
}

pub fn read_plan(path: &Path) -> Result<(PlanBundle, Vec<Diagnostic>), Vec<Diagnostic>> {
    let (plan, mut warnings) = read_as::<MappingPlan>(path)?;
    let tc = resolve::<HolisticTestCase>(path, &plan.test_case, "/test_case");
    let d = resolve::<Decomposition>(path, &plan.subtest_set, "/subtest_set");
    let (mut tc, d) = match (tc, d) {
        (Ok(tc), Ok(d)) => (tc, d),
        (a, b) => {
            let mut errs = Vec::new();
            errs.extend(a.err().unwrap_or_default());
            errs.extend(b.err().unwrap_or_default());
            return Err(errs);
        }
    };
    warnings.extend(tc.1);
    warnings.extend(d.1);
    warnings.extend(inline_sc(&mut tc.0, &ref_target(path, &plan.test_case))?);
    Ok((
        PlanBundle {
            plan,
            test_case: tc.0,
            subtests: d.0,
        },
        warnings,
    ))
}
