//! Python bindings: load a workspace document and query it.
//!
//! The module exposes one entry point, `load(text)`, returning a
//! [`Workspace`] whose methods mirror the main analyses: interventional
//! distributions, alignment consistency, ambiguity ranges, audit validity,
//! and classification contrasts. Every probability crosses the boundary as
//! a `fractions.Fraction`, so Python sees the same exact arithmetic the
//! engine computed.

use std::collections::BTreeMap;
use std::sync::Arc;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use casl_core::abstraction::{Aggregator, AggregatorKind, InterventionSet};
use casl_core::audit::audit_validity_check;
use casl_core::dsl::{load as load_document, LoweredAlignment, LoweredWorkspace};
use casl_core::norms::{norm_effect, reclassification_summary};
use casl_core::rational::format_rational;
use casl_core::{Intervention, Rational, Scm};

// ── Conversions ──────────────────────────────────────────────────────────────

fn fraction<'py>(py: Python<'py>, value: &Rational) -> PyResult<Bound<'py, PyAny>> {
    let ctor = py.import("fractions")?.getattr("Fraction")?;
    ctor.call1((format_rational(value),))
}

fn opt_fraction<'py>(
    py: Python<'py>,
    value: &Option<Rational>,
) -> PyResult<Option<Bound<'py, PyAny>>> {
    value.as_ref().map(|v| fraction(py, v)).transpose()
}

fn intervention_from(assignments: Option<BTreeMap<String, String>>) -> Intervention {
    assignments.unwrap_or_default().into_iter().collect()
}

fn aggregator_from(name: &str) -> PyResult<Aggregator> {
    let kind = AggregatorKind::parse(name).ok_or_else(|| {
        PyValueError::new_err(format!(
            "unknown aggregator `{name}`; expected mean, uniform, min, or max"
        ))
    })?;
    Ok(Aggregator::new(kind))
}

fn value_error(err: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(err.to_string())
}

// ── Workspace ────────────────────────────────────────────────────────────────

/// A resolved workspace document: models, alignments, and declared studies.
#[pyclass]
pub struct Workspace {
    inner: LoweredWorkspace,
}

impl Workspace {
    fn model(&self, name: &str) -> PyResult<&Arc<Scm>> {
        self.inner.models.get(name).ok_or_else(|| {
            PyValueError::new_err(format!(
                "unknown model `{name}`; declared: {}",
                self.inner.models.keys().cloned().collect::<Vec<_>>().join(", ")
            ))
        })
    }

    fn alignment(&self, name: &str) -> PyResult<&LoweredAlignment> {
        self.inner.alignments.get(name).ok_or_else(|| {
            PyValueError::new_err(format!(
                "unknown alignment `{name}`; declared: {}",
                self.inner
                    .alignments
                    .keys()
                    .cloned()
                    .collect::<Vec<_>>()
                    .join(", ")
            ))
        })
    }
}

#[pymethods]
impl Workspace {
    /// Names of the declared models, sorted.
    fn models(&self) -> Vec<String> {
        self.inner.models.keys().cloned().collect()
    }

    /// Names of the declared alignments, sorted.
    fn alignments(&self) -> Vec<String> {
        self.inner.alignments.keys().cloned().collect()
    }

    /// Names of the declared audit studies, sorted.
    fn audits(&self) -> Vec<String> {
        self.inner.audits.keys().cloned().collect()
    }

    /// Names of the declared classification contrasts, sorted.
    fn comparisons(&self) -> Vec<String> {
        self.inner.norm_comparisons.keys().cloned().collect()
    }

    /// Endogenous scope of a model, in the order distribution entries use.
    fn scope(&self, model: &str) -> PyResult<Vec<String>> {
        let scm = self.model(model)?;
        let mut names: Vec<String> = scm.endogenous_names().map(str::to_string).collect();
        names.sort();
        Ok(names)
    }

    /// Exact interventional distribution of a model as a list of
    /// `(assignment dict, Fraction)` pairs. `do=None` means observational.
    #[pyo3(signature = (model, r#do=None))]
    fn interventional<'py>(
        &self,
        py: Python<'py>,
        model: &str,
        r#do: Option<BTreeMap<String, String>>,
    ) -> PyResult<Vec<(BTreeMap<String, String>, Bound<'py, PyAny>)>> {
        let scm = self.model(model)?;
        let distribution = scm
            .interventional_distribution(&intervention_from(r#do))
            .map_err(value_error)?;
        let mut entries = Vec::new();
        for (key, weight) in distribution.entries() {
            entries.push((distribution.assignment_of(key), fraction(py, weight)?));
        }
        Ok(entries)
    }

    /// Exact probability of a (partial) event under an interventional
    /// distribution.
    #[pyo3(signature = (model, event, r#do=None))]
    fn probability<'py>(
        &self,
        py: Python<'py>,
        model: &str,
        event: BTreeMap<String, String>,
        r#do: Option<BTreeMap<String, String>>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let scm = self.model(model)?;
        let distribution = scm
            .interventional_distribution(&intervention_from(r#do))
            .map_err(value_error)?;
        let p = distribution.probability(&event).map_err(value_error)?;
        fraction(py, &p)
    }

    /// Exact consistency of an alignment over every complete-cluster
    /// intervention: `{"pass", "max_distance", "interventions"}`.
    fn consistency<'py>(&self, py: Python<'py>, alignment: &str) -> PyResult<Bound<'py, PyDict>> {
        let lowered = self.alignment(alignment)?;
        let report = lowered
            .alignment
            .check_exact_consistency(&InterventionSet::AllCompleteClusters)
            .map_err(value_error)?;
        let out = PyDict::new(py);
        out.set_item("pass", report.pass)?;
        out.set_item("max_distance", fraction(py, &report.max_distance)?)?;
        out.set_item("interventions", report.entries.len())?;
        Ok(out)
    }

    /// Range of outcome probabilities across the low realizations of one
    /// high intervention:
    /// `{"min", "max", "spread", "aggregated", "realizations"}`.
    #[pyo3(signature = (alignment, r#do, outcome, value, aggregator="mean"))]
    fn ambiguity<'py>(
        &self,
        py: Python<'py>,
        alignment: &str,
        r#do: BTreeMap<String, String>,
        outcome: &str,
        value: &str,
        aggregator: &str,
    ) -> PyResult<Bound<'py, PyDict>> {
        let lowered = self.alignment(alignment)?;
        let aggregator = aggregator_from(aggregator)?;
        let report = lowered
            .alignment
            .ambiguity_report(&intervention_from(Some(r#do)), outcome, value, &aggregator)
            .map_err(value_error)?;
        let out = PyDict::new(py);
        out.set_item("min", fraction(py, &report.min)?)?;
        out.set_item("max", fraction(py, &report.max)?)?;
        out.set_item("spread", fraction(py, &report.spread)?)?;
        out.set_item("aggregated", fraction(py, &report.aggregated)?)?;
        out.set_item("realizations", report.entries.len())?;
        Ok(out)
    }

    /// Run a declared audit study: `{"verdict", "callbacks_a",
    /// "callbacks_b", "callback_ratio", "audit_effect", "race_effect",
    /// "deviation", "assumption_holds", "reasons"}`.
    fn audit<'py>(&self, py: Python<'py>, name: &str) -> PyResult<Bound<'py, PyDict>> {
        let case = self.inner.audits.get(name).ok_or_else(|| {
            PyValueError::new_err(format!(
                "unknown audit `{name}`; declared: {}",
                self.inner.audits.keys().cloned().collect::<Vec<_>>().join(", ")
            ))
        })?;
        let population = self
            .inner
            .populations
            .get(&case.population)
            .ok_or_else(|| PyValueError::new_err(format!("missing population `{}`", case.population)))?;
        let projection = self
            .inner
            .projections
            .get(&case.projection)
            .ok_or_else(|| PyValueError::new_err(format!("missing projection `{}`", case.projection)))?;

        let report = audit_validity_check(
            population,
            &projection.projection,
            &case.construction,
            &case.resume_a,
            &case.resume_b,
            &case.aggregator,
        )
        .map_err(value_error)?;

        let out = PyDict::new(py);
        out.set_item("verdict", report.verdict.as_str())?;
        out.set_item("callbacks_a", fraction(py, &report.rate_a)?)?;
        out.set_item("callbacks_b", fraction(py, &report.rate_b)?)?;
        out.set_item("callback_ratio", opt_fraction(py, &report.ratio)?)?;
        out.set_item("audit_effect", fraction(py, &report.audit_effect)?)?;
        out.set_item("race_effect", opt_fraction(py, &report.race_effect)?)?;
        out.set_item("deviation", opt_fraction(py, &report.deviation)?)?;
        out.set_item(
            "assumption_holds",
            report.consistency.as_ref().map(|c| c.pass),
        )?;
        out.set_item("reasons", report.reasons.clone())?;
        Ok(out)
    }

    /// Run a declared classification contrast: `{"factual",
    /// "counterfactual", "delta", "reclassified"}`.
    fn norms<'py>(&self, py: Python<'py>, name: &str) -> PyResult<Bound<'py, PyDict>> {
        let case = self.inner.norm_comparisons.get(name).ok_or_else(|| {
            PyValueError::new_err(format!(
                "unknown comparison `{name}`; declared: {}",
                self.inner
                    .norm_comparisons
                    .keys()
                    .cloned()
                    .collect::<Vec<_>>()
                    .join(", ")
            ))
        })?;

        let effect = norm_effect(
            &case.pair,
            &case.variable,
            &case.from,
            &case.to,
            &case.outcome,
            &case.positive,
            &case.aggregator,
        )
        .map_err(value_error)?;
        let reclassification = reclassification_summary(&case.pair).map_err(value_error)?;

        let out = PyDict::new(py);
        out.set_item("factual", fraction(py, &effect.factual)?)?;
        out.set_item("counterfactual", fraction(py, &effect.counterfactual)?)?;
        out.set_item("delta", fraction(py, &effect.delta)?)?;
        out.set_item("reclassified", fraction(py, &reclassification.total)?)?;
        Ok(out)
    }
}

// ── Module ───────────────────────────────────────────────────────────────────

/// Parse and resolve a workspace document. Raises `ValueError` listing every
/// diagnostic when the text has errors.
#[pyfunction]
fn load(text: &str) -> PyResult<Workspace> {
    match load_document(text) {
        Ok(workspace) => Ok(Workspace { inner: workspace }),
        Err(diagnostics) => {
            let rendered: Vec<String> = diagnostics.iter().map(|d| d.to_string()).collect();
            Err(PyValueError::new_err(rendered.join("\n")))
        }
    }
}

#[pymodule]
fn casl(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Workspace>()?;
    m.add_function(wrap_pyfunction!(load, m)?)?;
    Ok(())
}
