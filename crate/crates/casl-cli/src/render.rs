//! Output assembly: aligned text tables, stable JSON, and flat CSV.
//!
//! Every command builds one [`Payload`] holding all three renderings, so
//! the format flag only selects which string leaves the process. Exact
//! rationals always come first; decimal approximations trail them.

use casl_core::rational::{approx_f64, format_rational};
use casl_core::Rational;
use clap::ValueEnum;

#[derive(Debug, Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Aligned, human-readable columns.
    Table,
    /// One stable JSON object per run.
    Json,
    /// Flat comma-separated rows.
    Csv,
}

#[derive(Debug, Clone)]
pub struct Payload {
    pub table: String,
    pub json: serde_json::Value,
    pub csv: String,
}

impl Payload {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Table => self.table.clone(),
            Format::Json => {
                let mut text =
                    serde_json::to_string_pretty(&self.json).expect("reports serialize");
                text.push('\n');
                text
            }
            Format::Csv => self.csv.clone(),
        }
    }
}

// ── Rationals ────────────────────────────────────────────────────────────────

/// `1/20 (0.050000)` — the exact value first, a fixed-width decimal second.
pub fn rational_cell(r: &Rational) -> String {
    format!("{} ({:.6})", format_rational(r), approx_f64(r))
}

pub fn rational_json(r: &Rational) -> serde_json::Value {
    serde_json::json!({
        "exact": format_rational(r),
        "approx": approx_f64(r),
    })
}

pub fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

// ── Tables ───────────────────────────────────────────────────────────────────

/// Incremental builder for the table rendering: headings, key/value pairs,
/// and aligned column blocks separated by blank lines.
pub struct TableDoc {
    sections: Vec<String>,
    style: bool,
}

impl TableDoc {
    pub fn new(style: bool) -> Self {
        TableDoc {
            sections: Vec::new(),
            style,
        }
    }

    fn bold(&self, text: &str) -> String {
        if self.style {
            format!("\x1b[1m{text}\x1b[0m")
        } else {
            text.to_string()
        }
    }

    pub fn heading(&mut self, text: &str) {
        let line = self.bold(text);
        self.sections.push(format!("{line}\n"));
    }

    pub fn line(&mut self, text: &str) {
        self.sections.push(format!("{text}\n"));
    }

    /// A block of `key  value` pairs with aligned values.
    pub fn pairs(&mut self, pairs: &[(&str, String)]) {
        let width = pairs.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
        let mut block = String::new();
        for (key, value) in pairs {
            let pad = " ".repeat(width - key.chars().count());
            block.push_str(&format!("{key}{pad}  {value}\n"));
        }
        self.sections.push(block);
    }

    /// A column-aligned table with a header row.
    pub fn columns(&mut self, header: &[&str], rows: &[Vec<String>]) {
        let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
        for row in rows {
            for (i, cell) in row.iter().enumerate() {
                widths[i] = widths[i].max(cell.chars().count());
            }
        }
        let mut block = String::new();
        let rendered_header: Vec<String> = header
            .iter()
            .enumerate()
            .map(|(i, h)| pad_cell(h, widths[i]))
            .collect();
        block.push_str(&self.bold(rendered_header.join("  ").trim_end()));
        block.push('\n');
        for row in rows {
            let cells: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(i, cell)| pad_cell(cell, widths[i]))
                .collect();
            block.push_str(cells.join("  ").trim_end());
            block.push('\n');
        }
        self.sections.push(block);
    }

    pub fn finish(self) -> String {
        self.sections.join("\n")
    }
}

fn pad_cell(text: &str, width: usize) -> String {
    let pad = width - text.chars().count();
    format!("{text}{}", " ".repeat(pad))
}

// ── CSV ──────────────────────────────────────────────────────────────────────

pub fn csv_escape(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

pub fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(
        &header
            .iter()
            .map(|h| csv_escape(h))
            .collect::<Vec<_>>()
            .join(","),
    );
    out.push('\n');
    for row in rows {
        out.push_str(
            &row.iter()
                .map(|cell| csv_escape(cell))
                .collect::<Vec<_>>()
                .join(","),
        );
        out.push('\n');
    }
    out
}
