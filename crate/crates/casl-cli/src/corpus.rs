//! Loading one or more document files into a single parse corpus.
//!
//! Files are concatenated (each padded to a trailing newline) and parsed in
//! one pass; diagnostics carry corpus-wide line numbers that map back to a
//! `path:line` pair for display.

use casl_core::dsl::{lower, parse, Diagnostic, LoweredWorkspace, Severity};
use std::path::PathBuf;

struct SourceFile {
    path: String,
    first_line: usize,
    line_count: usize,
}

pub struct Corpus {
    files: Vec<SourceFile>,
    text: String,
}

impl Corpus {
    /// Read and concatenate the given files. Any I/O failure aborts the run
    /// with a usage-level error.
    pub fn load(paths: &[PathBuf]) -> Result<Corpus, String> {
        if paths.is_empty() {
            return Err("no input files given; pass --file <path>".to_string());
        }
        let mut files = Vec::new();
        let mut text = String::new();
        let mut next_line = 1usize;
        for path in paths {
            let display = path.display().to_string();
            let mut content = std::fs::read_to_string(path)
                .map_err(|err| format!("cannot read {display}: {err}"))?;
            if !content.ends_with('\n') {
                content.push('\n');
            }
            let line_count = content.lines().count().max(1);
            files.push(SourceFile {
                path: display,
                first_line: next_line,
                line_count,
            });
            next_line += line_count;
            text.push_str(&content);
        }
        Ok(Corpus { files, text })
    }

    pub fn paths(&self) -> Vec<String> {
        self.files.iter().map(|f| f.path.clone()).collect()
    }

    /// Map a corpus-wide line number back to its file and local line.
    fn locate(&self, line: usize) -> (&str, usize) {
        for file in self.files.iter().rev() {
            if line >= file.first_line {
                let local = (line - file.first_line + 1).min(file.line_count);
                return (&file.path, local);
            }
        }
        let first = &self.files[0];
        (&first.path, 1)
    }

    fn render_diagnostic(&self, diagnostic: &Diagnostic) -> String {
        let (path, line) = self.locate(diagnostic.span.line);
        format!(
            "{path}:{line}:{col}: {severity}: {message}",
            col = diagnostic.span.column,
            severity = diagnostic.severity.as_str(),
            message = diagnostic.message,
        )
    }

    /// Parse and resolve the corpus. Diagnostics come back rendered with
    /// file-local positions; the workspace is only returned when no errors
    /// were reported.
    pub fn analyze(&self) -> (Option<LoweredWorkspace>, Vec<String>, usize) {
        let (document, mut diagnostics) = parse(&self.text);
        let (workspace, lowering) = lower(&document);
        diagnostics.extend(lowering);
        diagnostics.sort_by(|a, b| {
            (a.span.line, a.span.column)
                .cmp(&(b.span.line, b.span.column))
                .then_with(|| a.message.cmp(&b.message))
        });
        let errors = diagnostics
            .iter()
            .filter(|d| d.severity == Severity::Error)
            .count();
        let rendered = diagnostics
            .iter()
            .map(|d| self.render_diagnostic(d))
            .collect();
        if errors == 0 {
            (Some(workspace), rendered, 0)
        } else {
            (None, rendered, errors)
        }
    }
}
