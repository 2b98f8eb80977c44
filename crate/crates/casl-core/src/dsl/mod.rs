//! The workspace file format: parsing, canonical form, and lowering.
//!
//! A workspace document declares models, alignments between them, and
//! studies to run over those alignments (audit designs, construction
//! contrasts). The pipeline is `parse` (text to syntax tree, collecting
//! diagnostics), `canonical` (syntax tree back to its one canonical
//! spelling), and `lower` (syntax tree to live models and studies). `load`
//! chains parse and lower, failing if any diagnostic is an error.

mod ast;
mod canon;
mod lexer;
mod lower;
mod parser;

pub use ast::{
    AlignmentDecl, AuditDecl, ClusterDecl, Decl, Document, ExogenousDecl, ModelDecl, ModelItem,
    Name, NormCompareDecl, PopulationDecl, ProjectionDecl, ResumeDecl, Spanned, TableRow,
    VariableDecl,
};
pub use canon::canonical;
pub use lower::{
    lower, AuditCase, LoweredAlignment, LoweredProjection, LoweredWorkspace, NormCompareCase,
};
pub use parser::parse;

// ── Diagnostics ──────────────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

impl Severity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Severity::Warning => "warning",
            Severity::Error => "error",
        }
    }
}

/// A location in the source text: 1-based line and column, with a length of
/// at least one character, always inside the line it names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl SourceSpan {
    pub fn new(line: usize, column: usize, length: usize) -> Self {
        SourceSpan {
            line: line.max(1),
            column: column.max(1),
            length: length.max(1),
        }
    }
}

impl std::fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// One problem found while parsing or lowering, anchored to source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
    pub span: SourceSpan,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}: {} at {}",
            self.severity.as_str(),
            self.message,
            self.span
        )
    }
}

/// Parse and lower in one step. `Err` carries every diagnostic (parse and
/// lowering, in source order) whenever at least one is an error.
pub fn load(text: &str) -> Result<LoweredWorkspace, Vec<Diagnostic>> {
    let (document, mut diagnostics) = parse(text);
    let (workspace, mut lowering_diagnostics) = lower(&document);
    diagnostics.append(&mut lowering_diagnostics);
    if diagnostics.iter().any(|d| d.severity == Severity::Error) {
        Err(diagnostics)
    } else {
        Ok(workspace)
    }
}

// ── Tests ────────────────────────────────────────────────────────────────────
