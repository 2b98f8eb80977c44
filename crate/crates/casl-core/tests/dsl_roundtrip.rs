//! Round-trip guarantees for the document corpus: every shipped document is
//! its own canonical form, every invalid document fails with well-anchored
//! errors, and serialization is idempotent on arbitrary syntax trees.

mod common;

use casl_core::dsl::{self, canonical, parse, Severity};
use common::docgen;
use proptest::prelude::*;

#[test]
fn corpus_documents_are_their_own_canonical_form() {
    let names = common::fixture_names("");
    assert!(
        names.len() >= 8,
        "corpus should hold at least eight documents, found {}",
        names.len()
    );
    for name in &names {
        let text = common::fixture_text(name);
        let (document, diagnostics) = parse(&text);
        assert!(
            diagnostics.is_empty(),
            "{name}: unexpected diagnostics: {diagnostics:?}"
        );
        let rendered = canonical(&document);
        assert_eq!(rendered, text, "{name} is not in canonical form");

        let (reparsed, diagnostics) = parse(&rendered);
        assert!(diagnostics.is_empty(), "{name}: canonical text has errors");
        assert_eq!(reparsed, document, "{name} does not round-trip");
    }
}

#[test]
fn corpus_documents_lower_cleanly() {
    for name in common::fixture_names("") {
        let workspace = common::load_fixture(&name);
        assert!(!workspace.models.is_empty(), "{name} declares no models");
    }
}

#[test]
fn invalid_documents_fail_with_in_bounds_spans() {
    let names = common::fixture_names("invalid");
    assert!(
        names.len() >= 10,
        "invalid corpus should hold at least ten documents, found {}",
        names.len()
    );
    for name in &names {
        let text = common::fixture_text(&format!("invalid/{name}"));
        let diagnostics = match dsl::load(&text) {
            Ok(_) => panic!("invalid/{name} loaded cleanly"),
            Err(diagnostics) => diagnostics,
        };
        assert!(
            diagnostics.iter().any(|d| d.severity == Severity::Error),
            "invalid/{name} produced no errors"
        );
        let lines: Vec<&str> = text.lines().collect();
        for diagnostic in &diagnostics {
            let span = diagnostic.span;
            assert!(
                span.line >= 1 && span.line <= lines.len(),
                "invalid/{name}: line out of bounds in `{diagnostic}`"
            );
            let width = lines[span.line - 1].chars().count().max(1);
            assert!(
                span.column >= 1 && span.column + span.length - 1 <= width,
                "invalid/{name}: column out of bounds in `{diagnostic}` (line is {width} wide)"
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    /// serialize ∘ parse ∘ serialize == serialize, for any syntax tree.
    #[test]
    fn serialization_is_idempotent(document in docgen::document()) {
        let first = canonical(&document);
        let (reparsed, diagnostics) = parse(&first);
        prop_assert!(
            diagnostics.is_empty(),
            "canonical text should parse cleanly: {:?}\n{}",
            diagnostics,
            first
        );
        let second = canonical(&reparsed);
        prop_assert_eq!(first, second);
    }
}
