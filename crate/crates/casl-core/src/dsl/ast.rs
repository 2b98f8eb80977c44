//! Syntax tree for workspace documents.
//!
//! Every name-like node carries its source span for diagnostics, but
//! equality ignores spans entirely: two documents are equal when they say
//! the same thing, wherever they say it. That is what makes round-trip
//! properties (`parse` after `serialize`) directly checkable.

use crate::rational::Rational;

use super::SourceSpan;

/// A value plus where it came from. Equality and ordering look only at the
/// value.
#[derive(Debug, Clone)]
pub struct Spanned<T> {
    pub node: T,
    pub span: SourceSpan,
}

impl<T> Spanned<T> {
    pub fn new(node: T, span: SourceSpan) -> Self {
        Spanned { node, span }
    }
}

impl<T: PartialEq> PartialEq for Spanned<T> {
    fn eq(&self, other: &Self) -> bool {
        self.node == other.node
    }
}

impl<T: Eq> Eq for Spanned<T> {}

impl<T: PartialOrd> PartialOrd for Spanned<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.node.partial_cmp(&other.node)
    }
}

impl<T: Ord> Ord for Spanned<T> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.node.cmp(&other.node)
    }
}

pub type Name = Spanned<String>;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Document {
    pub decls: Vec<Decl>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decl {
    Model(ModelDecl),
    Alignment(AlignmentDecl),
    Population(PopulationDecl),
    Projection(ProjectionDecl),
    Audit(AuditDecl),
    NormCompare(NormCompareDecl),
}

impl Decl {
    pub fn name(&self) -> &Name {
        match self {
            Decl::Model(d) => &d.name,
            Decl::Alignment(d) => &d.name,
            Decl::Population(d) => &d.name,
            Decl::Projection(d) => &d.name,
            Decl::Audit(d) => &d.name,
            Decl::NormCompare(d) => &d.name,
        }
    }

    pub fn keyword(&self) -> &'static str {
        match self {
            Decl::Model(_) => "model",
            Decl::Alignment(_) => "alignment",
            Decl::Population(_) => "population",
            Decl::Projection(_) => "projection",
            Decl::Audit(_) => "audit",
            Decl::NormCompare(_) => "normcompare",
        }
    }
}

// ── Models ───────────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelDecl {
    pub name: Name,
    pub items: Vec<ModelItem>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelItem {
    Exogenous(ExogenousDecl),
    Variable(VariableDecl),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExogenousDecl {
    pub name: Name,
    pub weights: Vec<(Name, Spanned<Rational>)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableDecl {
    pub name: Name,
    pub domain: Vec<Name>,
    pub parents: Vec<Name>,
    pub table: Vec<TableRow>,
}

/// `(k1, k2, ...) -> value`, used both for mechanism tables and value maps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableRow {
    pub key: Vec<Name>,
    pub value: Name,
}

// ── Alignments ───────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentDecl {
    pub name: Name,
    pub low: Name,
    pub high: Name,
    pub clusters: Vec<ClusterDecl>,
    pub dropped: Vec<Name>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterDecl {
    pub high_var: Name,
    pub over: Vec<Name>,
    pub map: Vec<TableRow>,
}

// ── Audit-study declarations ─────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PopulationDecl {
    pub name: Name,
    pub model: Name,
    pub outcome: Name,
    pub positive: Name,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectionDecl {
    pub name: Name,
    pub population: Name,
    pub keep: Vec<Name>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditDecl {
    pub name: Name,
    pub population: Name,
    pub projection: Name,
    pub construction: Name,
    pub protected: Option<Name>,
    pub resumes: Vec<ResumeDecl>,
    pub aggregator: Option<Name>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResumeDecl {
    pub label: Name,
    pub fields: Vec<(Name, Name)>,
}

// ── Construction contrasts ───────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormCompareDecl {
    pub name: Name,
    pub factual: Name,
    pub counterfactual: Name,
    pub contrast: Name,
    pub from: Name,
    pub to: Name,
    pub outcome: Name,
    pub positive: Name,
    pub aggregator: Option<Name>,
}
