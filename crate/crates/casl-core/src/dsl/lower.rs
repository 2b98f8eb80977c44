//! Lowering from syntax to semantic objects.
//!
//! Resolution is order-independent: models lower first, then alignments,
//! then populations and projections, then the studies that reference them,
//! so declarations may appear in any order. Unresolved names anchor their
//! diagnostic at the referencing token; construction failures (a model that
//! does not validate, an alignment that does not fit) anchor at the
//! declaration's name.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::abstraction::{Aggregator, AggregatorKind, Alignment, AlignmentSpec, ClusterSpec};
use crate::audit::{
    build_social_construction, PopulationModel, ResumeProjection, SocialConstruction,
};
use crate::norms::AlignmentPair;
use crate::scm::{Assignment, ExogenousSpec, Scm, ScmSpec, VariableSpec};

use super::ast::*;
use super::{Diagnostic, Severity, SourceSpan};

// ── Lowered shapes ───────────────────────────────────────────────────────────

/// A named alignment plus the raw spec it was built from, kept so other
/// declarations (audits) can rebuild variations of it.
#[derive(Debug, Clone)]
pub struct LoweredAlignment {
    pub low_model: String,
    pub high_model: String,
    pub spec: AlignmentSpec,
    pub alignment: Alignment,
}

#[derive(Debug, Clone)]
pub struct LoweredProjection {
    pub population: String,
    pub projection: ResumeProjection,
}

/// Everything needed to run one declared audit study.
#[derive(Debug, Clone)]
pub struct AuditCase {
    pub population: String,
    pub projection: String,
    pub construction_name: String,
    pub construction: SocialConstruction,
    pub labels: (String, String),
    pub resume_a: Assignment,
    pub resume_b: Assignment,
    pub aggregator: Aggregator,
}

/// Everything needed to run one declared construction contrast.
#[derive(Debug, Clone)]
pub struct NormCompareCase {
    pub factual: String,
    pub counterfactual: String,
    pub pair: AlignmentPair,
    pub variable: String,
    pub from: String,
    pub to: String,
    pub outcome: String,
    pub positive: String,
    pub aggregator: Aggregator,
}

/// A document resolved into live objects, keyed by declaration name.
#[derive(Debug, Clone, Default)]
pub struct LoweredWorkspace {
    pub models: BTreeMap<String, Arc<Scm>>,
    pub alignments: BTreeMap<String, LoweredAlignment>,
    pub populations: BTreeMap<String, PopulationModel>,
    pub projections: BTreeMap<String, LoweredProjection>,
    pub audits: BTreeMap<String, AuditCase>,
    pub norm_comparisons: BTreeMap<String, NormCompareCase>,
}

/// Resolve a parsed document. Declarations that fail stay out of the
/// workspace; everything that went wrong is reported as diagnostics.
pub fn lower(document: &Document) -> (LoweredWorkspace, Vec<Diagnostic>) {
    let mut ctx = Lowering {
        workspace: LoweredWorkspace::default(),
        diagnostics: Vec::new(),
    };

    for decl in &document.decls {
        if let Decl::Model(model) = decl {
            ctx.model(model);
        }
    }
    for decl in &document.decls {
        if let Decl::Alignment(alignment) = decl {
            ctx.alignment(alignment);
        }
    }
    for decl in &document.decls {
        if let Decl::Population(population) = decl {
            ctx.population(population);
        }
    }
    for decl in &document.decls {
        if let Decl::Projection(projection) = decl {
            ctx.projection(projection);
        }
    }
    for decl in &document.decls {
        match decl {
            Decl::Audit(audit) => ctx.audit(audit),
            Decl::NormCompare(compare) => ctx.normcompare(compare),
            _ => {}
        }
    }

    ctx.diagnostics
        .sort_by_key(|d| (d.span.line, d.span.column));
    (ctx.workspace, ctx.diagnostics)
}

struct Lowering {
    workspace: LoweredWorkspace,
    diagnostics: Vec<Diagnostic>,
}

impl Lowering {
    fn error(&mut self, span: SourceSpan, message: impl Into<String>) {
        self.diagnostics.push(Diagnostic {
            severity: Severity::Error,
            message: message.into(),
            span,
        });
    }

    fn duplicate(&mut self, kind: &str, name: &Name) -> bool {
        let taken = match kind {
            "model" => self.workspace.models.contains_key(&name.node),
            "alignment" => self.workspace.alignments.contains_key(&name.node),
            "population" => self.workspace.populations.contains_key(&name.node),
            "projection" => self.workspace.projections.contains_key(&name.node),
            "audit" => self.workspace.audits.contains_key(&name.node),
            _ => self.workspace.norm_comparisons.contains_key(&name.node),
        };
        if taken {
            self.error(
                name.span,
                format!("another {kind} named `{}` already exists", name.node),
            );
        }
        taken
    }

    // ── Declarations ─────────────────────────────────────────────────────

    fn model(&mut self, decl: &ModelDecl) {
        if self.duplicate("model", &decl.name) {
            return;
        }
        let mut exogenous = Vec::new();
        let mut variables = Vec::new();
        for item in &decl.items {
            match item {
                ModelItem::Exogenous(item) => exogenous.push(ExogenousSpec {
                    name: item.name.node.clone(),
                    weights: item
                        .weights
                        .iter()
                        .map(|(value, weight)| (value.node.clone(), weight.node.clone()))
                        .collect(),
                }),
                ModelItem::Variable(item) => variables.push(VariableSpec {
                    name: item.name.node.clone(),
                    domain: item.domain.iter().map(|v| v.node.clone()).collect(),
                    parents: item.parents.iter().map(|v| v.node.clone()).collect(),
                    table: item
                        .table
                        .iter()
                        .map(|row| {
                            (
                                row.key.iter().map(|k| k.node.clone()).collect(),
                                row.value.node.clone(),
                            )
                        })
                        .collect(),
                }),
            }
        }
        match Scm::build(ScmSpec {
            exogenous,
            variables,
        }) {
            Ok(model) => {
                self.workspace
                    .models
                    .insert(decl.name.node.clone(), Arc::new(model));
            }
            Err(errors) => {
                for error in errors {
                    self.error(
                        decl.name.span,
                        format!("in model `{}`: {error}", decl.name.node),
                    );
                }
            }
        }
    }

    fn alignment(&mut self, decl: &AlignmentDecl) {
        if self.duplicate("alignment", &decl.name) {
            return;
        }
        let Some(low) = self.resolve_model(&decl.low) else {
            return;
        };
        let Some(high) = self.resolve_model(&decl.high) else {
            return;
        };
        let spec = AlignmentSpec {
            clusters: decl
                .clusters
                .iter()
                .map(|cluster| ClusterSpec {
                    high_var: cluster.high_var.node.clone(),
                    low_vars: cluster.over.iter().map(|v| v.node.clone()).collect(),
                    value_map: cluster
                        .map
                        .iter()
                        .map(|row| {
                            (
                                row.key.iter().map(|k| k.node.clone()).collect(),
                                row.value.node.clone(),
                            )
                        })
                        .collect(),
                })
                .collect(),
            dropped: decl.dropped.iter().map(|v| v.node.clone()).collect(),
        };
        match Alignment::build(low, high, &spec) {
            Ok(alignment) => {
                self.workspace.alignments.insert(
                    decl.name.node.clone(),
                    LoweredAlignment {
                        low_model: decl.low.node.clone(),
                        high_model: decl.high.node.clone(),
                        spec,
                        alignment,
                    },
                );
            }
            Err(errors) => {
                for error in errors {
                    self.error(
                        decl.name.span,
                        format!("in alignment `{}`: {error}", decl.name.node),
                    );
                }
            }
        }
    }

    fn population(&mut self, decl: &PopulationDecl) {
        if self.duplicate("population", &decl.name) {
            return;
        }
        let Some(model) = self.resolve_model(&decl.model) else {
            return;
        };
        match PopulationModel::new(model, &decl.outcome.node, &decl.positive.node) {
            Ok(population) => {
                self.workspace
                    .populations
                    .insert(decl.name.node.clone(), population);
            }
            Err(error) => {
                self.error(
                    decl.name.span,
                    format!("in population `{}`: {error}", decl.name.node),
                );
            }
        }
    }

    fn projection(&mut self, decl: &ProjectionDecl) {
        if self.duplicate("projection", &decl.name) {
            return;
        }
        let Some(population) = self.resolve_population(&decl.population) else {
            return;
        };
        let kept: Vec<String> = decl.keep.iter().map(|v| v.node.clone()).collect();
        match ResumeProjection::new(&population, &kept) {
            Ok(projection) => {
                self.workspace.projections.insert(
                    decl.name.node.clone(),
                    LoweredProjection {
                        population: decl.population.node.clone(),
                        projection,
                    },
                );
            }
            Err(error) => {
                self.error(
                    decl.name.span,
                    format!("in projection `{}`: {error}", decl.name.node),
                );
            }
        }
    }

    fn audit(&mut self, decl: &AuditDecl) {
        if self.duplicate("audit", &decl.name) {
            return;
        }
        let Some(population) = self.resolve_population(&decl.population) else {
            return;
        };
        let Some(lowered_projection) = self.resolve_projection(&decl.projection) else {
            return;
        };
        if lowered_projection.population != decl.population.node {
            self.error(
                decl.projection.span,
                format!(
                    "projection `{}` was declared for population `{}`, not `{}`",
                    decl.projection.node, lowered_projection.population, decl.population.node
                ),
            );
            return;
        }
        let Some(lowered_alignment) = self.resolve_alignment(&decl.construction) else {
            return;
        };
        let Some(aggregator) = self.aggregator(decl.aggregator.as_ref()) else {
            return;
        };

        // A construction supplies the outcome's identity cluster implicitly.
        // Alignments declared in a document spell it out so they also work
        // standalone; drop that copy rather than rejecting it.
        let mut clusters = lowered_alignment.spec.clusters.clone();
        clusters.retain(|c| !is_implicit_outcome_cluster(c, &population));
        let construction = match build_social_construction(
            &population,
            Arc::clone(lowered_alignment.alignment.high()),
            clusters,
            lowered_alignment.spec.dropped.clone(),
            decl.protected.as_ref().map(|p| p.node.as_str()),
        ) {
            Ok(construction) => construction,
            Err(error) => {
                self.error(
                    decl.name.span,
                    format!("in audit `{}`: {error}", decl.name.node),
                );
                return;
            }
        };

        let mut resumes = Vec::new();
        for resume in &decl.resumes {
            let mut assignment = Assignment::new();
            for (var, value) in &resume.fields {
                if assignment
                    .insert(var.node.clone(), value.node.clone())
                    .is_some()
                {
                    self.error(
                        var.span,
                        format!(
                            "resume `{}` sets `{}` more than once",
                            resume.label.node, var.node
                        ),
                    );
                    return;
                }
            }
            resumes.push((resume.label.node.clone(), assignment));
        }
        let (label_b, resume_b) = resumes.pop().expect("parser enforces two resumes");
        let (label_a, resume_a) = resumes.pop().expect("parser enforces two resumes");

        self.workspace.audits.insert(
            decl.name.node.clone(),
            AuditCase {
                population: decl.population.node.clone(),
                projection: decl.projection.node.clone(),
                construction_name: decl.construction.node.clone(),
                construction,
                labels: (label_a, label_b),
                resume_a,
                resume_b,
                aggregator,
            },
        );
    }

    fn normcompare(&mut self, decl: &NormCompareDecl) {
        if self.duplicate("normcompare", &decl.name) {
            return;
        }
        let Some(factual) = self.resolve_alignment(&decl.factual) else {
            return;
        };
        let Some(counterfactual) = self.resolve_alignment(&decl.counterfactual) else {
            return;
        };
        let Some(aggregator) = self.aggregator(decl.aggregator.as_ref()) else {
            return;
        };
        let pair = match AlignmentPair::new(factual.alignment, counterfactual.alignment) {
            Ok(pair) => pair,
            Err(error) => {
                self.error(
                    decl.name.span,
                    format!("in normcompare `{}`: {error}", decl.name.node),
                );
                return;
            }
        };
        self.workspace.norm_comparisons.insert(
            decl.name.node.clone(),
            NormCompareCase {
                factual: decl.factual.node.clone(),
                counterfactual: decl.counterfactual.node.clone(),
                pair,
                variable: decl.contrast.node.clone(),
                from: decl.from.node.clone(),
                to: decl.to.node.clone(),
                outcome: decl.outcome.node.clone(),
                positive: decl.positive.node.clone(),
                aggregator,
            },
        );
    }

    // ── Name resolution ──────────────────────────────────────────────────

    fn resolve_model(&mut self, name: &Name) -> Option<Arc<Scm>> {
        match self.workspace.models.get(&name.node) {
            Some(model) => Some(Arc::clone(model)),
            None => {
                self.error(name.span, format!("unknown model `{}`", name.node));
                None
            }
        }
    }

    fn resolve_population(&mut self, name: &Name) -> Option<PopulationModel> {
        match self.workspace.populations.get(&name.node) {
            Some(population) => Some(population.clone()),
            None => {
                self.error(name.span, format!("unknown population `{}`", name.node));
                None
            }
        }
    }

    fn resolve_projection(&mut self, name: &Name) -> Option<LoweredProjection> {
        match self.workspace.projections.get(&name.node) {
            Some(projection) => Some(projection.clone()),
            None => {
                self.error(name.span, format!("unknown projection `{}`", name.node));
                None
            }
        }
    }

    fn resolve_alignment(&mut self, name: &Name) -> Option<LoweredAlignment> {
        match self.workspace.alignments.get(&name.node) {
            Some(alignment) => Some(alignment.clone()),
            None => {
                self.error(name.span, format!("unknown alignment `{}`", name.node));
                None
            }
        }
    }

    fn aggregator(&mut self, name: Option<&Name>) -> Option<Aggregator> {
        match name {
            None => Some(Aggregator::default()),
            Some(name) => match AggregatorKind::parse(&name.node) {
                Some(kind) => Some(Aggregator {
                    kind,
                    reference: None,
                }),
                None => {
                    self.error(
                        name.span,
                        format!(
                            "unknown aggregator `{}` (expected mean, uniform, min, or max)",
                            name.node
                        ),
                    );
                    None
                }
            },
        }
    }
}

/// True when a cluster is exactly the outcome's identity cluster: same high
/// and low name, and a value map sending every outcome value to itself.
fn is_implicit_outcome_cluster(cluster: &ClusterSpec, population: &PopulationModel) -> bool {
    let outcome = population.outcome();
    if cluster.high_var != outcome || cluster.low_vars != [outcome.to_string()] {
        return false;
    }
    let Some(domain) = population.model().domain(outcome) else {
        return false;
    };
    cluster.value_map.len() == domain.len()
        && domain
            .iter()
            .all(|v| cluster.value_map.contains(&(vec![v.clone()], v.clone())))
}
