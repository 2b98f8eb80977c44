//! Canonical text form for documents.
//!
//! One semantic document has exactly one canonical spelling: two-space
//! indents, LF line endings, blocks in declaration order, and every
//! order-insensitive list (weights, table rows, value maps, drop and keep
//! lists, resume fields) sorted. Serializing is idempotent across a
//! parse/serialize cycle, which is what the round-trip tests pin down.

use std::fmt::Write as _;

use crate::rational::format_rational;

use super::ast::*;

pub fn canonical(document: &Document) -> String {
    let mut out = String::new();
    for (index, decl) in document.decls.iter().enumerate() {
        if index > 0 {
            out.push('\n');
        }
        match decl {
            Decl::Model(decl) => model(&mut out, decl),
            Decl::Alignment(decl) => alignment(&mut out, decl),
            Decl::Population(decl) => population(&mut out, decl),
            Decl::Projection(decl) => projection(&mut out, decl),
            Decl::Audit(decl) => audit(&mut out, decl),
            Decl::NormCompare(decl) => normcompare(&mut out, decl),
        }
    }
    out
}

// ── Blocks ───────────────────────────────────────────────────────────────────

fn model(out: &mut String, decl: &ModelDecl) {
    let _ = writeln!(out, "model {} {{", decl.name.node);
    for item in &decl.items {
        match item {
            ModelItem::Exogenous(exogenous) => {
                let _ = writeln!(out, "  exogenous {} {{", exogenous.name.node);
                let mut weights: Vec<_> = exogenous.weights.iter().collect();
                weights.sort_by(|a, b| a.0.cmp(&b.0));
                for (value, weight) in weights {
                    let _ = writeln!(out, "    {}: {}", value.node, format_rational(&weight.node));
                }
                out.push_str("  }\n");
            }
            ModelItem::Variable(variable) => {
                let _ = writeln!(out, "  variable {} {{", variable.name.node);
                let _ = writeln!(out, "    domain {}", inline_names(&variable.domain));
                if !variable.parents.is_empty() {
                    let _ = writeln!(out, "    parents {}", inline_names(&variable.parents));
                }
                out.push_str("    table {\n");
                rows(out, "      ", &variable.table);
                out.push_str("    }\n");
                out.push_str("  }\n");
            }
        }
    }
    out.push_str("}\n");
}

fn alignment(out: &mut String, decl: &AlignmentDecl) {
    let _ = writeln!(out, "alignment {} {{", decl.name.node);
    let _ = writeln!(out, "  low {}", decl.low.node);
    let _ = writeln!(out, "  high {}", decl.high.node);
    for cluster in &decl.clusters {
        let _ = writeln!(out, "  cluster {} {{", cluster.high_var.node);
        let _ = writeln!(out, "    over {}", inline_names(&cluster.over));
        out.push_str("    map {\n");
        rows(out, "      ", &cluster.map);
        out.push_str("    }\n");
        out.push_str("  }\n");
    }
    if !decl.dropped.is_empty() {
        let mut dropped = decl.dropped.clone();
        dropped.sort();
        let _ = writeln!(out, "  drop {}", inline_names(&dropped));
    }
    out.push_str("}\n");
}

fn population(out: &mut String, decl: &PopulationDecl) {
    let _ = writeln!(out, "population {} {{", decl.name.node);
    let _ = writeln!(out, "  model {}", decl.model.node);
    let _ = writeln!(out, "  outcome {}", decl.outcome.node);
    let _ = writeln!(out, "  positive {}", decl.positive.node);
    out.push_str("}\n");
}

fn projection(out: &mut String, decl: &ProjectionDecl) {
    let _ = writeln!(out, "projection {} {{", decl.name.node);
    let _ = writeln!(out, "  population {}", decl.population.node);
    let mut keep = decl.keep.clone();
    keep.sort();
    keep.dedup();
    let _ = writeln!(out, "  keep {}", inline_names(&keep));
    out.push_str("}\n");
}

fn audit(out: &mut String, decl: &AuditDecl) {
    let _ = writeln!(out, "audit {} {{", decl.name.node);
    let _ = writeln!(out, "  population {}", decl.population.node);
    let _ = writeln!(out, "  projection {}", decl.projection.node);
    let _ = writeln!(out, "  construction {}", decl.construction.node);
    if let Some(protected) = &decl.protected {
        let _ = writeln!(out, "  protected {}", protected.node);
    }
    for resume in &decl.resumes {
        let mut fields: Vec<_> = resume.fields.iter().collect();
        fields.sort_by(|a, b| a.0.cmp(&b.0));
        let rendered: Vec<String> = fields
            .iter()
            .map(|(var, value)| format!("{}: {}", var.node, value.node))
            .collect();
        let body = if rendered.is_empty() {
            "{}".to_string()
        } else {
            format!("{{ {} }}", rendered.join(", "))
        };
        let _ = writeln!(out, "  resume {} {}", resume.label.node, body);
    }
    if let Some(aggregator) = &decl.aggregator {
        let _ = writeln!(out, "  aggregator {}", aggregator.node);
    }
    out.push_str("}\n");
}

fn normcompare(out: &mut String, decl: &NormCompareDecl) {
    let _ = writeln!(out, "normcompare {} {{", decl.name.node);
    let _ = writeln!(out, "  factual {}", decl.factual.node);
    let _ = writeln!(out, "  counterfactual {}", decl.counterfactual.node);
    let _ = writeln!(
        out,
        "  contrast {} {{ from: {}, to: {} }}",
        decl.contrast.node, decl.from.node, decl.to.node
    );
    let _ = writeln!(out, "  outcome {}", decl.outcome.node);
    let _ = writeln!(out, "  positive {}", decl.positive.node);
    if let Some(aggregator) = &decl.aggregator {
        let _ = writeln!(out, "  aggregator {}", aggregator.node);
    }
    out.push_str("}\n");
}

// ── Pieces ───────────────────────────────────────────────────────────────────

fn inline_names(names: &[Name]) -> String {
    if names.is_empty() {
        return "{}".to_string();
    }
    let rendered: Vec<&str> = names.iter().map(|n| n.node.as_str()).collect();
    format!("{{ {} }}", rendered.join(", "))
}

fn rows(out: &mut String, indent: &str, table: &[TableRow]) {
    let mut sorted: Vec<&TableRow> = table.iter().collect();
    sorted.sort_by(|a, b| a.key.cmp(&b.key));
    for row in sorted {
        let key: Vec<&str> = row.key.iter().map(|k| k.node.as_str()).collect();
        let _ = writeln!(out, "{indent}({}) -> {}", key.join(", "), row.value.node);
    }
}
