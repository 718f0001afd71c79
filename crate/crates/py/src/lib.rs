//! Python module `alignforge`: sessions, property terms, metrics and the
//! tier check. Structured results come back as plain dicts and lists.

use std::collections::BTreeSet;
use std::path::PathBuf;

use alignforge_core::alignment::keys_from_store;
use alignforge_core::analysis::{score_keys, tier_check};
use alignforge_core::bundle::OntologyBundle;
use alignforge_core::engine::{Action, Correspondence, Decision, MoveKind, Phase};
use alignforge_core::error::Error;
use alignforge_core::prefix::PrefixMap;
use alignforge_core::session::{Workspace, WorkspaceConfig};
use alignforge_core::term::{normalize, term_equal, PropertyTerm};
use alignforge_core::turtle::parse_turtle_with_prefixes;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyTuple;
use serde_json::Value;

create_exception!(alignforge, AlignforgeError, PyException);

fn err(e: Error) -> PyErr {
    AlignforgeError::new_err((e.code(), e.to_string()))
}

fn to_py<'py>(py: Python<'py>, v: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// A relation term such as `chain(inv(a:p), a:q)`.
#[pyclass(name = "Term", module = "alignforge", frozen, from_py_object)]
#[derive(Clone)]
struct PyTerm {
    term: PropertyTerm,
    prefixes: PrefixMap,
}

#[pymethods]
impl PyTerm {
    #[new]
    #[pyo3(signature = (text, prefixes = None))]
    fn new(text: &str, prefixes: Option<Vec<(String, String)>>) -> PyResult<Self> {
        let mut pm = PrefixMap::standard();
        for (p, ns) in prefixes.unwrap_or_default() {
            pm.insert(p, ns);
        }
        let term = PropertyTerm::parse(text, &pm).map_err(err)?;
        Ok(PyTerm { term, prefixes: pm })
    }

    fn normalized(&self) -> Self {
        PyTerm { term: normalize(&self.term), prefixes: self.prefixes.clone() }
    }

    /// Equal up to normalization.
    fn equivalent(&self, other: &PyTerm) -> bool {
        term_equal(&self.term, &other.term)
    }

    #[getter]
    fn depth(&self) -> usize {
        self.term.depth()
    }

    #[getter]
    fn is_atomic(&self) -> bool {
        self.term.is_atomic()
    }

    fn __eq__(&self, other: &PyTerm) -> bool {
        self.term == other.term
    }

    fn __hash__(&self) -> u64 {
        use std::hash::{DefaultHasher, Hash, Hasher};
        let mut h = DefaultHasher::new();
        self.term.hash(&mut h);
        h.finish()
    }

    fn __str__(&self) -> String {
        self.term.to_text(&self.prefixes)
    }

    fn __repr__(&self) -> String {
        format!("Term({:?})", self.__str__())
    }
}

#[pyclass(name = "Correspondence", module = "alignforge", frozen)]
struct PyCorrespondence {
    inner: Correspondence,
    text: String,
    sigma_text: String,
    tau_text: String,
}

impl PyCorrespondence {
    fn wrap(c: &Correspondence, prefixes: &PrefixMap) -> Self {
        PyCorrespondence {
            inner: c.clone(),
            text: c.to_text(prefixes),
            sigma_text: c.sigma.to_text(prefixes),
            tau_text: c.tau.to_text(prefixes),
        }
    }
}

#[pymethods]
impl PyCorrespondence {
    #[getter]
    fn id(&self) -> u32 {
        self.inner.id
    }

    #[getter]
    fn sigma(&self) -> &str {
        &self.sigma_text
    }

    #[getter]
    fn tau(&self) -> &str {
        &self.tau_text
    }

    #[getter]
    fn op(&self) -> String {
        self.inner.op.to_string()
    }

    #[getter]
    fn status(&self) -> String {
        format!("{:?}", self.inner.status).to_lowercase()
    }

    #[getter]
    fn provenance(&self) -> &str {
        &self.inner.provenance
    }

    #[getter]
    fn merged_into(&self) -> Option<u32> {
        self.inner.merged_into
    }

    fn history<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.history)
    }

    fn __str__(&self) -> &str {
        &self.text
    }

    fn __repr__(&self) -> String {
        format!("Correspondence({}, {:?}, {})", self.inner.id, self.text, self.status())
    }
}

/// An alignment session over a fixture directory.
#[pyclass(name = "Workspace", module = "alignforge")]
struct PyWorkspace {
    ws: Workspace,
}

fn phase(name: &str) -> PyResult<Phase> {
    match name {
        "relax" => Ok(Phase::Relax),
        "strengthen" => Ok(Phase::Strengthen),
        _ => Err(PyValueError::new_err(format!("phase must be 'relax' or 'strengthen', not {name:?}"))),
    }
}

#[pymethods]
impl PyWorkspace {
    #[new]
    fn new(bundle_dir: PathBuf) -> PyResult<Self> {
        let cfg = WorkspaceConfig::from_dir(&bundle_dir).map_err(err)?;
        Ok(PyWorkspace { ws: Workspace::open(&cfg).map_err(err)? })
    }

    fn candidates(&self) -> Vec<PyCorrespondence> {
        self.ws.candidates.iter().map(|c| PyCorrespondence::wrap(c, &self.ws.ctx.prefixes)).collect()
    }

    fn candidate(&self, id: u32) -> PyResult<PyCorrespondence> {
        Ok(PyCorrespondence::wrap(self.ws.candidate(id).map_err(err)?, &self.ws.ctx.prefixes))
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.ws.warnings.clone()
    }

    fn check<'py>(&self, py: Python<'py>, id: u32) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.ws.check(id).map_err(err)?)
    }

    #[pyo3(signature = (id, phase = "relax"))]
    fn suggest<'py>(&self, py: Python<'py>, id: u32, phase: &str) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.ws.suggest(id, self::phase(phase)?).map_err(err)?)
    }

    /// `action` is "accept", "discard" or "apply"; "apply" needs `move`.
    #[pyo3(signature = (id, action, r#move = None, term = None, reason = None, timestamp = None))]
    fn decide(
        &mut self,
        id: u32,
        action: &str,
        r#move: Option<&str>,
        term: Option<String>,
        reason: Option<String>,
        timestamp: Option<String>,
    ) -> PyResult<PyCorrespondence> {
        let action: Action = serde_json::from_value(Value::String(action.into()))
            .map_err(|_| PyValueError::new_err(format!("unknown action {action:?}")))?;
        let d = match action {
            Action::Accept => Decision::Accept,
            Action::Discard => Decision::Discard { reason },
            Action::Apply => {
                let name = r#move.ok_or_else(|| PyValueError::new_err("apply needs move="))?;
                let kind = MoveKind::from_name(name)
                    .ok_or_else(|| PyValueError::new_err(format!("unknown move kind {name:?}")))?;
                Decision::Apply { kind, term }
            }
        };
        let c = self.ws.decide(id, &d, timestamp.unwrap_or_default()).map_err(err)?.clone();
        Ok(PyCorrespondence::wrap(&c, &self.ws.ctx.prefixes))
    }

    fn replay(&mut self, log: &str) -> PyResult<()> {
        self.ws.replay(log).map_err(err)
    }

    fn log_jsonl(&self) -> String {
        self.ws.log_jsonl()
    }

    /// `(turtle, rules)` for the accepted correspondences.
    fn artifacts<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyTuple>> {
        let (ttl, rules) = self.ws.artifacts().map_err(err)?;
        PyTuple::new(py, [ttl, rules])
    }

    fn term(&self, text: &str) -> PyResult<PyTerm> {
        let term = PropertyTerm::parse(text, &self.ws.ctx.prefixes).map_err(err)?;
        Ok(PyTerm { term, prefixes: self.ws.ctx.prefixes.clone() })
    }
}

fn statement_keys(text: &str) -> PyResult<BTreeSet<alignforge_core::alignment::StatementKey>> {
    let (store, _) = parse_turtle_with_prefixes(text, &PrefixMap::standard()).map_err(err)?;
    Ok(keys_from_store(&store))
}

/// Precision, recall and F-measure of one alignment (Turtle text) against a
/// reference. Undefined values are `None`.
#[pyfunction]
fn metrics<'py>(py: Python<'py>, alignment: &str, reference: &str) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &score_keys(&statement_keys(alignment)?, &statement_keys(reference)?))
}

#[pyfunction(name = "tier_check")]
fn py_tier_check<'py>(py: Python<'py>, bundle_dir: PathBuf) -> PyResult<Bound<'py, PyAny>> {
    let (bundle, _) = OntologyBundle::load_dir(&bundle_dir).map_err(err)?;
    let t = bundle.taxonomy().map_err(err)?;
    to_py(py, &tier_check(&bundle, &t))
}

#[pymodule]
fn alignforge(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("AlignforgeError", m.py().get_type::<AlignforgeError>())?;
    m.add_class::<PyTerm>()?;
    m.add_class::<PyCorrespondence>()?;
    m.add_class::<PyWorkspace>()?;
    m.add_function(wrap_pyfunction!(metrics, m)?)?;
    m.add_function(wrap_pyfunction!(py_tier_check, m)?)?;
    Ok(())
}
