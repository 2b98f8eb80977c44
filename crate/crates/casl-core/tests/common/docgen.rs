//! Proptest strategies that generate arbitrary syntax trees for the
//! modeling language, used to property-test serializer idempotence.

use casl_core::dsl::{
    AlignmentDecl, AuditDecl, ClusterDecl, Decl, Document, ExogenousDecl, ModelDecl, ModelItem,
    Name, NormCompareDecl, PopulationDecl, ProjectionDecl, ResumeDecl, SourceSpan, Spanned,
    TableRow, VariableDecl,
};
use casl_core::rational::rat;
use casl_core::Rational;
use proptest::prelude::*;

fn span() -> SourceSpan {
    SourceSpan::new(1, 1, 1)
}

fn name(text: String) -> Name {
    Spanned::new(text, span())
}

/// Lexically valid identifier, deliberately allowed to collide with block
/// keywords: the grammar is position-keyed, so `variable drop { ... }` must
/// survive a round trip like any other spelling.
fn ident() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9_]{0,5}"
}

/// A value token: an identifier or an integer literal (leading zeros kept).
fn value() -> impl Strategy<Value = String> {
    prop_oneof![ident(), "[0-9]{1,3}"]
}

fn ident_name() -> impl Strategy<Value = Name> {
    ident().prop_map(name)
}

fn value_name() -> impl Strategy<Value = Name> {
    value().prop_map(name)
}

fn names(max: usize) -> impl Strategy<Value = Vec<Name>> {
    prop::collection::vec(ident_name(), 0..max)
}

fn rational() -> impl Strategy<Value = Rational> {
    (1i64..200, 1i64..200).prop_map(|(n, d)| rat(n, d))
}

fn table_row() -> impl Strategy<Value = TableRow> {
    (
        prop::collection::vec(value_name(), 0..3),
        value_name(),
    )
        .prop_map(|(key, value)| TableRow { key, value })
}

fn rows(max: usize) -> impl Strategy<Value = Vec<TableRow>> {
    prop::collection::vec(table_row(), 0..max)
}

// ── Declarations ─────────────────────────────────────────────────────────────

fn exogenous_item() -> impl Strategy<Value = ModelItem> {
    (
        ident_name(),
        prop::collection::vec(
            (value_name(), rational().prop_map(|r| Spanned::new(r, span()))),
            0..4,
        ),
    )
        .prop_map(|(name, weights)| ModelItem::Exogenous(ExogenousDecl { name, weights }))
}

fn variable_item() -> impl Strategy<Value = ModelItem> {
    (
        ident_name(),
        prop::collection::vec(value_name(), 0..4),
        names(3),
        rows(4),
    )
        .prop_map(|(name, domain, parents, table)| {
            ModelItem::Variable(VariableDecl {
                name,
                domain,
                parents,
                table,
            })
        })
}

fn model_decl() -> impl Strategy<Value = Decl> {
    (
        ident_name(),
        prop::collection::vec(prop_oneof![exogenous_item(), variable_item()], 0..4),
    )
        .prop_map(|(name, items)| Decl::Model(ModelDecl { name, items }))
}

fn cluster_decl() -> impl Strategy<Value = ClusterDecl> {
    (ident_name(), names(3), rows(3)).prop_map(|(high_var, over, map)| ClusterDecl {
        high_var,
        over,
        map,
    })
}

fn alignment_decl() -> impl Strategy<Value = Decl> {
    (
        ident_name(),
        ident_name(),
        ident_name(),
        prop::collection::vec(cluster_decl(), 0..3),
        names(3),
    )
        .prop_map(|(name, low, high, clusters, dropped)| {
            Decl::Alignment(AlignmentDecl {
                name,
                low,
                high,
                clusters,
                dropped,
            })
        })
}

fn population_decl() -> impl Strategy<Value = Decl> {
    (ident_name(), ident_name(), ident_name(), value_name()).prop_map(
        |(name, model, outcome, positive)| {
            Decl::Population(PopulationDecl {
                name,
                model,
                outcome,
                positive,
            })
        },
    )
}

fn projection_decl() -> impl Strategy<Value = Decl> {
    (ident_name(), ident_name(), names(4)).prop_map(|(name, population, keep)| {
        Decl::Projection(ProjectionDecl {
            name,
            population,
            keep,
        })
    })
}

fn resume_decl() -> impl Strategy<Value = ResumeDecl> {
    (
        ident_name(),
        prop::collection::vec((ident_name(), value_name()), 0..3),
    )
        .prop_map(|(label, fields)| ResumeDecl { label, fields })
}

fn audit_decl() -> impl Strategy<Value = Decl> {
    (
        (ident_name(), ident_name(), ident_name(), ident_name()),
        (
            prop::option::of(ident_name()),
            resume_decl(),
            resume_decl(),
            prop::option::of(ident_name()),
        ),
    )
        .prop_map(
            |((name, population, projection, construction), (protected, a, b, aggregator))| {
                Decl::Audit(AuditDecl {
                    name,
                    population,
                    projection,
                    construction,
                    protected,
                    resumes: vec![a, b],
                    aggregator,
                })
            },
        )
}

fn normcompare_decl() -> impl Strategy<Value = Decl> {
    (
        (ident_name(), ident_name(), ident_name()),
        (ident_name(), value_name(), value_name()),
        (ident_name(), value_name(), prop::option::of(ident_name())),
    )
        .prop_map(
            |(
                (name, factual, counterfactual),
                (contrast, from, to),
                (outcome, positive, aggregator),
            )| {
                Decl::NormCompare(NormCompareDecl {
                    name,
                    factual,
                    counterfactual,
                    contrast,
                    from,
                    to,
                    outcome,
                    positive,
                    aggregator,
                })
            },
        )
}

/// A whole document: a short mix of every declaration kind.
pub fn document() -> impl Strategy<Value = Document> {
    prop::collection::vec(
        prop_oneof![
            3 => model_decl(),
            2 => alignment_decl(),
            1 => population_decl(),
            1 => projection_decl(),
            1 => audit_decl(),
            1 => normcompare_decl(),
        ],
        0..5,
    )
    .prop_map(|decls| Document { decls })
}
