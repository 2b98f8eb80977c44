//! One handler per subcommand, each producing an exit code and a payload.
//!
//! Handlers return `Err(message)` only for input problems (unknown names,
//! unparsable flags, engine preconditions); those surface as usage errors.
//! Semantic verdicts (a failed consistency check, an invalid audit) are
//! successes that set the exit code to one.

use std::collections::BTreeMap;
use std::sync::Arc;

use casl_core::abstraction::{Aggregator, AggregatorKind, ConsistencyReport, InterventionSet};
use casl_core::audit::{audit_validity_check, AuditValidityReport, RaceCall};
use casl_core::dsl::{
    canonical, Decl, Document, ExogenousDecl, LoweredWorkspace, ModelDecl, ModelItem, Name,
    Spanned, TableRow, VariableDecl,
};
use casl_core::norms::{norm_effect, reclassification_summary};
use casl_core::quotient::quotient_high_model;
use casl_core::rational::{approx_f64, format_rational, parse_rational};
use casl_core::{Assignment, Intervention, Rational, Scm};

use crate::render::{csv_table, rational_cell, rational_json, yes_no, Payload, TableDoc};

pub type CommandResult = Result<(i32, Payload), String>;

// ── Shared helpers ───────────────────────────────────────────────────────────

fn lookup<'a, T>(map: &'a BTreeMap<String, T>, name: &str, kind: &str) -> Result<&'a T, String> {
    map.get(name).ok_or_else(|| {
        let known: Vec<&str> = map.keys().map(String::as_str).collect();
        if known.is_empty() {
            format!("no {kind} declarations found in the given files")
        } else {
            format!(
                "unknown {kind} `{name}`; declared: {}",
                known.join(", ")
            )
        }
    })
}

pub fn parse_do(pairs: &[String]) -> Result<Intervention, String> {
    let mut assignments = Vec::new();
    for pair in pairs {
        let Some((var, value)) = pair.split_once('=') else {
            return Err(format!("--do expects VAR=VALUE, got `{pair}`"));
        };
        if var.is_empty() || value.is_empty() {
            return Err(format!("--do expects VAR=VALUE, got `{pair}`"));
        }
        assignments.push((var.to_string(), value.to_string()));
    }
    Ok(assignments.into_iter().collect())
}

fn parse_rational_flag(text: &str, flag: &str) -> Result<Rational, String> {
    parse_rational(text).ok_or_else(|| format!("{flag} expects a rational such as 1/10, got `{text}`"))
}

fn intervention_json(iv: &Intervention) -> serde_json::Value {
    let map: serde_json::Map<String, serde_json::Value> = iv
        .iter()
        .map(|(var, value)| (var.to_string(), serde_json::Value::String(value.to_string())))
        .collect();
    serde_json::Value::Object(map)
}

fn assignment_text(assignment: &Assignment) -> String {
    assignment
        .iter()
        .map(|(var, value)| format!("{var}={value}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn assignment_json(assignment: &Assignment) -> serde_json::Value {
    let map: serde_json::Map<String, serde_json::Value> = assignment
        .iter()
        .map(|(var, value)| (var.clone(), serde_json::Value::String(value.clone())))
        .collect();
    serde_json::Value::Object(map)
}

// ── validate ─────────────────────────────────────────────────────────────────

pub fn validate(
    workspace: &LoweredWorkspace,
    files: &[String],
    warnings: usize,
    style: bool,
) -> CommandResult {
    let counts = [
        ("models", workspace.models.len()),
        ("alignments", workspace.alignments.len()),
        ("populations", workspace.populations.len()),
        ("projections", workspace.projections.len()),
        ("audits", workspace.audits.len()),
        ("comparisons", workspace.norm_comparisons.len()),
    ];

    let mut table = TableDoc::new(style);
    table.heading("workspace valid");
    let mut pairs: Vec<(&str, String)> = vec![("files", files.join(", "))];
    for (kind, count) in counts {
        pairs.push((kind, count.to_string()));
    }
    pairs.push(("warnings", warnings.to_string()));
    table.pairs(&pairs);

    let json = serde_json::json!({
        "valid": true,
        "files": files,
        "declarations": counts
            .iter()
            .map(|(kind, count)| (kind.to_string(), serde_json::json!(count)))
            .collect::<serde_json::Map<_, _>>(),
        "warnings": warnings,
    });

    let mut rows: Vec<Vec<String>> = counts
        .iter()
        .map(|(kind, count)| vec![kind.to_string(), count.to_string()])
        .collect();
    rows.push(vec!["warnings".to_string(), warnings.to_string()]);
    let csv = csv_table(&["kind", "count"], &rows);

    Ok((
        0,
        Payload {
            table: table.finish(),
            json,
            csv,
        },
    ))
}

// ── intervene ────────────────────────────────────────────────────────────────

pub struct InterveneArgs {
    pub model: String,
    pub interventions: Vec<String>,
    pub sample: Option<u64>,
    pub seed: u64,
    pub cap: Option<u64>,
}

pub fn intervene(workspace: &LoweredWorkspace, args: &InterveneArgs, style: bool) -> CommandResult {
    let model = lookup(&workspace.models, &args.model, "model")?;
    let iv = parse_do(&args.interventions)?;

    if let Some(samples) = args.sample {
        return intervene_sampled(&args.model, model, &iv, samples, args.seed, style);
    }

    let cap = args.cap.unwrap_or_else(|| model.enumeration_cap());
    let distribution = model
        .interventional_distribution_capped(&iv, cap)
        .map_err(|err| err.to_string())?;

    let mut header: Vec<&str> = distribution.scope().iter().map(String::as_str).collect();
    header.push("probability");
    let rows: Vec<Vec<String>> = distribution
        .entries()
        .map(|(key, weight)| {
            let mut row: Vec<String> = key.clone();
            row.push(rational_cell(weight));
            row
        })
        .collect();

    let mut table = TableDoc::new(style);
    table.heading(&format!("model {}", args.model));
    table.pairs(&[
        ("intervention", iv.to_string()),
        ("support", distribution.support_len().to_string()),
        ("mass", rational_cell(&distribution.mass())),
    ]);
    table.columns(&header, &rows);

    let json = serde_json::json!({
        "model": args.model,
        "mode": "exact",
        "intervention": intervention_json(&iv),
        "scope": distribution.scope(),
        "mass": rational_json(&distribution.mass()),
        "entries": distribution
            .entries()
            .map(|(key, weight)| {
                serde_json::json!({
                    "values": assignment_json(&distribution.assignment_of(key)),
                    "probability": rational_json(weight),
                })
            })
            .collect::<Vec<_>>(),
    });

    let csv_rows: Vec<Vec<String>> = distribution
        .entries()
        .map(|(key, weight)| {
            let mut row: Vec<String> = key.clone();
            row.push(format_rational(weight));
            row.push(format!("{:.6}", approx_f64(weight)));
            row
        })
        .collect();
    let mut csv_header: Vec<&str> = distribution.scope().iter().map(String::as_str).collect();
    csv_header.push("probability");
    csv_header.push("approx");
    let csv = csv_table(&csv_header, &csv_rows);

    Ok((
        0,
        Payload {
            table: table.finish(),
            json,
            csv,
        },
    ))
}

fn intervene_sampled(
    model_name: &str,
    model: &Arc<Scm>,
    iv: &Intervention,
    samples: u64,
    seed: u64,
    style: bool,
) -> CommandResult {
    let sampled = model
        .sample_interventional(iv, samples, seed)
        .map_err(|err| err.to_string())?;
    let distribution = &sampled.distribution;

    let mut header: Vec<&str> = distribution.scope().iter().map(String::as_str).collect();
    header.push("frequency");
    header.push("std_error");
    let rows: Vec<Vec<String>> = distribution
        .entries()
        .map(|(key, weight)| {
            let mut row: Vec<String> = key.clone();
            row.push(rational_cell(weight));
            row.push(format!("{:.6}", sampled.standard_error[key]));
            row
        })
        .collect();

    let mut table = TableDoc::new(style);
    table.heading(&format!("model {model_name}"));
    table.pairs(&[
        ("intervention", iv.to_string()),
        ("samples", sampled.samples.to_string()),
        ("seed", sampled.seed.to_string()),
        ("support", distribution.support_len().to_string()),
    ]);
    table.columns(&header, &rows);

    let json = serde_json::json!({
        "model": model_name,
        "mode": "sampled",
        "intervention": intervention_json(iv),
        "samples": sampled.samples,
        "seed": sampled.seed,
        "scope": distribution.scope(),
        "entries": distribution
            .entries()
            .map(|(key, weight)| {
                serde_json::json!({
                    "values": assignment_json(&distribution.assignment_of(key)),
                    "frequency": rational_json(weight),
                    "std_error": sampled.standard_error[key],
                })
            })
            .collect::<Vec<_>>(),
    });

    let csv_rows: Vec<Vec<String>> = distribution
        .entries()
        .map(|(key, weight)| {
            let mut row: Vec<String> = key.clone();
            row.push(format_rational(weight));
            row.push(format!("{:.6}", approx_f64(weight)));
            row.push(format!("{:.6}", sampled.standard_error[key]));
            row
        })
        .collect();
    let mut csv_header: Vec<&str> = distribution.scope().iter().map(String::as_str).collect();
    csv_header.push("frequency");
    csv_header.push("approx");
    csv_header.push("std_error");
    let csv = csv_table(&csv_header, &csv_rows);

    Ok((
        0,
        Payload {
            table: table.finish(),
            json,
            csv,
        },
    ))
}

// ── consistency ──────────────────────────────────────────────────────────────

#[derive(Debug, Copy, Clone, PartialEq, Eq, clap::ValueEnum)]
pub enum ConsistencyModeArg {
    /// Pushed distributions must match the high model exactly.
    Exact,
    /// Total variation distance up to --epsilon passes.
    Tv,
    /// Average effects on an outcome within --epsilon for --fraction of pairs.
    Effects,
}

pub struct ConsistencyArgs {
    pub alignment: String,
    pub mode: ConsistencyModeArg,
    pub epsilon: Option<String>,
    pub outcome: Option<String>,
    pub value: Option<String>,
    pub fraction: Option<String>,
}

pub fn consistency(
    workspace: &LoweredWorkspace,
    args: &ConsistencyArgs,
    style: bool,
) -> CommandResult {
    let lowered = lookup(&workspace.alignments, &args.alignment, "alignment")?;

    match args.mode {
        ConsistencyModeArg::Exact => {
            let report = lowered
                .alignment
                .check_exact_consistency(&InterventionSet::AllCompleteClusters)
                .map_err(|err| err.to_string())?;
            Ok(consistency_payload(args, lowered, "exact", None, &report, style))
        }
        ConsistencyModeArg::Tv => {
            let epsilon = args
                .epsilon
                .as_deref()
                .ok_or("--mode tv requires --epsilon <p/q>")?;
            let threshold = parse_rational_flag(epsilon, "--epsilon")?;
            let report = lowered
                .alignment
                .approx_consistency_tv(&InterventionSet::AllCompleteClusters, &threshold)
                .map_err(|err| err.to_string())?;
            Ok(consistency_payload(
                args,
                lowered,
                "tv",
                Some(&threshold),
                &report,
                style,
            ))
        }
        ConsistencyModeArg::Effects => effects_consistency(args, lowered, style),
    }
}

fn consistency_payload(
    args: &ConsistencyArgs,
    lowered: &casl_core::dsl::LoweredAlignment,
    mode: &str,
    threshold: Option<&Rational>,
    report: &ConsistencyReport,
    style: bool,
) -> (i32, Payload) {
    let rows: Vec<Vec<String>> = report
        .entries
        .iter()
        .map(|entry| {
            vec![
                entry.low.to_string(),
                entry.induced.to_string(),
                rational_cell(&entry.distance),
                yes_no(entry.pass).to_string(),
            ]
        })
        .collect();

    let mut table = TableDoc::new(style);
    table.heading(&format!("alignment {}", args.alignment));
    let mut pairs = vec![
        ("low model", lowered.low_model.clone()),
        ("high model", lowered.high_model.clone()),
        ("mode", mode.to_string()),
    ];
    if let Some(threshold) = threshold {
        pairs.push(("threshold", rational_cell(threshold)));
    }
    pairs.push(("interventions", report.entries.len().to_string()));
    pairs.push(("max distance", rational_cell(&report.max_distance)));
    pairs.push(("verdict", if report.pass { "pass" } else { "fail" }.to_string()));
    table.pairs(&pairs);
    table.columns(&["intervention", "induced", "distance", "pass"], &rows);

    let json = serde_json::json!({
        "alignment": args.alignment,
        "low": lowered.low_model,
        "high": lowered.high_model,
        "mode": mode,
        "threshold": threshold.map(rational_json),
        "entries": report
            .entries
            .iter()
            .map(|entry| {
                serde_json::json!({
                    "intervention": entry.low.to_string(),
                    "induced": entry.induced.to_string(),
                    "distance": rational_json(&entry.distance),
                    "pass": entry.pass,
                })
            })
            .collect::<Vec<_>>(),
        "max_distance": rational_json(&report.max_distance),
        "pass": report.pass,
    });

    let csv_rows: Vec<Vec<String>> = report
        .entries
        .iter()
        .map(|entry| {
            vec![
                entry.low.to_string(),
                entry.induced.to_string(),
                format_rational(&entry.distance),
                yes_no(entry.pass).to_string(),
            ]
        })
        .collect();
    let csv = csv_table(&["intervention", "induced", "distance", "pass"], &csv_rows);

    (
        if report.pass { 0 } else { 1 },
        Payload {
            table: table.finish(),
            json,
            csv,
        },
    )
}

fn effects_consistency(
    args: &ConsistencyArgs,
    lowered: &casl_core::dsl::LoweredAlignment,
    style: bool,
) -> CommandResult {
    let outcome = args
        .outcome
        .as_deref()
        .ok_or("--mode effects requires --outcome <var>")?;
    let value = args
        .value
        .as_deref()
        .ok_or("--mode effects requires --value <value>")?;
    let epsilon = args
        .epsilon
        .as_deref()
        .ok_or("--mode effects requires --epsilon <p/q> as tolerance")?;
    let tolerance = parse_rational_flag(epsilon, "--epsilon")?;
    let fraction = match args.fraction.as_deref() {
        Some(text) => parse_rational_flag(text, "--fraction")?,
        None => Rational::from_integer(1.into()),
    };

    let report = lowered
        .alignment
        .approx_consistency_average_effects(outcome, value, &tolerance, &fraction)
        .map_err(|err| err.to_string())?;

    let rows: Vec<Vec<String>> = report
        .contrasts
        .iter()
        .map(|contrast| {
            vec![
                contrast.variable.clone(),
                contrast.from_value.clone(),
                contrast.to_value.clone(),
                rational_cell(&contrast.average),
                rational_cell(&contrast.within_fraction),
                contrast.offenders.len().to_string(),
                yes_no(contrast.pass).to_string(),
            ]
        })
        .collect();

    let mut table = TableDoc::new(style);
    table.heading(&format!("alignment {}", args.alignment));
    table.pairs(&[
        ("low model", lowered.low_model.clone()),
        ("high model", lowered.high_model.clone()),
        ("mode", "effects".to_string()),
        ("outcome", format!("{outcome}={value}")),
        ("tolerance", rational_cell(&report.tolerance)),
        ("fraction", rational_cell(&report.fraction)),
        ("verdict", if report.pass { "pass" } else { "fail" }.to_string()),
    ]);
    table.columns(
        &["variable", "from", "to", "average", "within", "offenders", "pass"],
        &rows,
    );

    let json = serde_json::json!({
        "alignment": args.alignment,
        "low": lowered.low_model,
        "high": lowered.high_model,
        "mode": "effects",
        "outcome": report.outcome,
        "value": report.value,
        "tolerance": rational_json(&report.tolerance),
        "fraction": rational_json(&report.fraction),
        "contrasts": report
            .contrasts
            .iter()
            .map(|contrast| {
                serde_json::json!({
                    "variable": contrast.variable,
                    "from": contrast.from_value,
                    "to": contrast.to_value,
                    "average": rational_json(&contrast.average),
                    "within_fraction": rational_json(&contrast.within_fraction),
                    "offenders": contrast.offenders.len(),
                    "pass": contrast.pass,
                    "effects": contrast
                        .effects
                        .iter()
                        .map(|effect| {
                            serde_json::json!({
                                "from": effect.from.to_string(),
                                "to": effect.to.to_string(),
                                "effect": rational_json(&effect.effect),
                            })
                        })
                        .collect::<Vec<_>>(),
                })
            })
            .collect::<Vec<_>>(),
        "pass": report.pass,
    });

    let csv_rows: Vec<Vec<String>> = report
        .contrasts
        .iter()
        .map(|contrast| {
            vec![
                contrast.variable.clone(),
                contrast.from_value.clone(),
                contrast.to_value.clone(),
                format_rational(&contrast.average),
                format_rational(&contrast.within_fraction),
                yes_no(contrast.pass).to_string(),
            ]
        })
        .collect();
    let csv = csv_table(
        &["variable", "from", "to", "average", "within_fraction", "pass"],
        &csv_rows,
    );

    Ok((
        if report.pass { 0 } else { 1 },
        Payload {
            table: table.finish(),
            json,
            csv,
        },
    ))
}

// ── ambiguity ────────────────────────────────────────────────────────────────

pub struct AmbiguityArgs {
    pub alignment: String,
    pub interventions: Vec<String>,
    pub outcome: String,
    pub value: String,
    pub aggregator: AggregatorKind,
}

pub fn ambiguity(workspace: &LoweredWorkspace, args: &AmbiguityArgs, style: bool) -> CommandResult {
    let lowered = lookup(&workspace.alignments, &args.alignment, "alignment")?;
    let iv = parse_do(&args.interventions)?;
    let aggregator = Aggregator::new(args.aggregator);

    let report = lowered
        .alignment
        .ambiguity_report(&iv, &args.outcome, &args.value, &aggregator)
        .map_err(|err| err.to_string())?;

    let rows: Vec<Vec<String>> = report
        .entries
        .iter()
        .map(|entry| {
            vec![
                entry.low.to_string(),
                rational_cell(&entry.probability),
                entry
                    .weight
                    .as_ref()
                    .map(rational_cell)
                    .unwrap_or_default(),
            ]
        })
        .collect();

    let mut table = TableDoc::new(style);
    table.heading(&format!("alignment {}", args.alignment));
    table.pairs(&[
        ("intervention", report.intervention.to_string()),
        ("outcome", format!("{}={}", report.outcome, report.value)),
        ("aggregator", report.aggregator.as_str().to_string()),
    ]);
    table.columns(&["realization", "probability", "weight"], &rows);
    table.pairs(&[
        ("min", rational_cell(&report.min)),
        ("max", rational_cell(&report.max)),
        ("spread", rational_cell(&report.spread)),
        ("aggregated", rational_cell(&report.aggregated)),
    ]);

    let json = serde_json::json!({
        "alignment": args.alignment,
        "intervention": report.intervention.to_string(),
        "outcome": report.outcome,
        "value": report.value,
        "aggregator": report.aggregator.as_str(),
        "entries": report
            .entries
            .iter()
            .map(|entry| {
                serde_json::json!({
                    "low": entry.low.to_string(),
                    "probability": rational_json(&entry.probability),
                    "weight": entry.weight.as_ref().map(rational_json),
                })
            })
            .collect::<Vec<_>>(),
        "min": rational_json(&report.min),
        "max": rational_json(&report.max),
        "spread": rational_json(&report.spread),
        "aggregated": rational_json(&report.aggregated),
    });

    let csv_rows: Vec<Vec<String>> = report
        .entries
        .iter()
        .map(|entry| {
            vec![
                report.intervention.to_string(),
                entry.low.to_string(),
                format_rational(&entry.probability),
                entry
                    .weight
                    .as_ref()
                    .map(format_rational)
                    .unwrap_or_default(),
            ]
        })
        .collect();
    let csv = csv_table(&["high_iv", "low_iv", "outcome_prob", "weight"], &csv_rows);

    Ok((
        0,
        Payload {
            table: table.finish(),
            json,
            csv,
        },
    ))
}

// ── audit ────────────────────────────────────────────────────────────────────

pub fn audit(workspace: &LoweredWorkspace, name: &str, style: bool) -> CommandResult {
    let case = lookup(&workspace.audits, name, "audit")?;
    let population = lookup(&workspace.populations, &case.population, "population")?;
    let projection = lookup(&workspace.projections, &case.projection, "projection")?;

    let report = audit_validity_check(
        population,
        &projection.projection,
        &case.construction,
        &case.resume_a,
        &case.resume_b,
        &case.aggregator,
    )
    .map_err(|err| err.to_string())?;

    let signal_text = |call: &Option<RaceCall>| -> String {
        match call {
            Some(call) => {
                let tie = if call.tied { ", tied" } else { "" };
                format!(
                    "{} (p = {}{tie})",
                    call.value,
                    format_rational(&call.probability)
                )
            }
            None => "none".to_string(),
        }
    };

    let mut table = TableDoc::new(style);
    table.heading(&format!("audit {name}"));
    table.pairs(&[
        ("population", case.population.clone()),
        ("projection", case.projection.clone()),
        ("construction", case.construction_name.clone()),
        ("protected", case.construction.protected().to_string()),
        (
            "outcome",
            format!("{}={}", population.outcome(), population.positive()),
        ),
    ]);
    table.columns(
        &["resume", "fields", "mass", "callbacks", "signals"],
        &[
            vec![
                case.labels.0.clone(),
                assignment_text(&report.resume_a),
                rational_cell(&report.mass_a),
                rational_cell(&report.rate_a),
                signal_text(&report.race_a),
            ],
            vec![
                case.labels.1.clone(),
                assignment_text(&report.resume_b),
                rational_cell(&report.mass_b),
                rational_cell(&report.rate_b),
                signal_text(&report.race_b),
            ],
        ],
    );

    let mut pairs = vec![("audit effect", rational_cell(&report.audit_effect))];
    match &report.ratio {
        Some(ratio) => pairs.push(("callback ratio", rational_cell(ratio))),
        None => pairs.push(("callback ratio", "undefined".to_string())),
    }
    match &report.race_effect {
        Some(effect) => pairs.push(("race effect", rational_cell(effect))),
        None => pairs.push(("race effect", "undefined".to_string())),
    }
    if let Some(deviation) = &report.deviation {
        pairs.push(("deviation", rational_cell(deviation)));
    }
    if let Some(consistency) = &report.consistency {
        pairs.push(("assumption checks", consistency.entries.len().to_string()));
        pairs.push(("assumption distance", rational_cell(&consistency.max_distance)));
        pairs.push(("assumption holds", yes_no(consistency.pass).to_string()));
    }
    pairs.push(("verdict", report.verdict.as_str().to_string()));
    table.pairs(&pairs);
    if !report.reasons.is_empty() {
        let notes: Vec<String> = report
            .reasons
            .iter()
            .map(|reason| format!("note: {reason}"))
            .collect();
        table.line(&notes.join("\n"));
    }

    let json = audit_json(name, case, &report);
    let csv = audit_csv(&report);

    let exit = match report.verdict {
        casl_core::audit::AuditVerdict::Valid => 0,
        _ => 1,
    };
    Ok((
        exit,
        Payload {
            table: table.finish(),
            json,
            csv,
        },
    ))
}

fn audit_json(
    name: &str,
    case: &casl_core::dsl::AuditCase,
    report: &AuditValidityReport,
) -> serde_json::Value {
    let signal_json = |call: &Option<RaceCall>| -> serde_json::Value {
        match call {
            Some(call) => serde_json::json!({
                "value": call.value,
                "probability": rational_json(&call.probability),
                "tied": call.tied,
            }),
            None => serde_json::Value::Null,
        }
    };

    serde_json::json!({
        "audit": name,
        "population": case.population,
        "projection": case.projection,
        "construction": case.construction_name,
        "protected": case.construction.protected(),
        "resumes": {
            "a": {
                "label": case.labels.0,
                "fields": assignment_json(&report.resume_a),
                "mass": rational_json(&report.mass_a),
                "callbacks": rational_json(&report.rate_a),
                "signal": signal_json(&report.race_a),
            },
            "b": {
                "label": case.labels.1,
                "fields": assignment_json(&report.resume_b),
                "mass": rational_json(&report.mass_b),
                "callbacks": rational_json(&report.rate_b),
                "signal": signal_json(&report.race_b),
            },
        },
        "audit_effect": rational_json(&report.audit_effect),
        "callback_ratio": report.ratio.as_ref().map(rational_json),
        "race_effect": report.race_effect.as_ref().map(rational_json),
        "deviation": report.deviation.as_ref().map(rational_json),
        "assumption": report.consistency.as_ref().map(|consistency| {
            serde_json::json!({
                "checks": consistency.entries.len(),
                "max_distance": rational_json(&consistency.max_distance),
                "holds": consistency.pass,
            })
        }),
        "verdict": report.verdict.as_str(),
        "reasons": report.reasons,
    })
}

fn audit_csv(report: &AuditValidityReport) -> String {
    let mut rows = vec![
        vec!["mass_a".to_string(), format_rational(&report.mass_a)],
        vec!["mass_b".to_string(), format_rational(&report.mass_b)],
        vec!["callbacks_a".to_string(), format_rational(&report.rate_a)],
        vec!["callbacks_b".to_string(), format_rational(&report.rate_b)],
        vec![
            "audit_effect".to_string(),
            format_rational(&report.audit_effect),
        ],
    ];
    if let Some(ratio) = &report.ratio {
        rows.push(vec![
            "callback_ratio".to_string(),
            format_rational(ratio),
        ]);
    }
    if let Some(effect) = &report.race_effect {
        rows.push(vec!["race_effect".to_string(), format_rational(effect)]);
    }
    if let Some(deviation) = &report.deviation {
        rows.push(vec!["deviation".to_string(), format_rational(deviation)]);
    }
    if let Some(consistency) = &report.consistency {
        rows.push(vec![
            "assumption_distance".to_string(),
            format_rational(&consistency.max_distance),
        ]);
        rows.push(vec![
            "assumption_holds".to_string(),
            yes_no(consistency.pass).to_string(),
        ]);
    }
    rows.push(vec![
        "verdict".to_string(),
        report.verdict.as_str().to_string(),
    ]);
    csv_table(&["metric", "value"], &rows)
}

// ── norms ────────────────────────────────────────────────────────────────────

pub fn norms(workspace: &LoweredWorkspace, name: &str, style: bool) -> CommandResult {
    let case = lookup(&workspace.norm_comparisons, name, "normcompare")?;

    let effect = norm_effect(
        &case.pair,
        &case.variable,
        &case.from,
        &case.to,
        &case.outcome,
        &case.positive,
        &case.aggregator,
    )
    .map_err(|err| err.to_string())?;
    let reclassification = reclassification_summary(&case.pair).map_err(|err| err.to_string())?;

    let transition_rows: Vec<Vec<String>> = reclassification
        .by_variable
        .iter()
        .flat_map(|(variable, shift)| {
            shift
                .transitions
                .iter()
                .map(move |((from, to), mass)| {
                    vec![
                        variable.clone(),
                        from.clone(),
                        to.clone(),
                        rational_cell(mass),
                    ]
                })
        })
        .collect();

    let mut table = TableDoc::new(style);
    table.heading(&format!("comparison {name}"));
    table.pairs(&[
        ("factual construction", case.factual.clone()),
        ("counterfactual construction", case.counterfactual.clone()),
        (
            "contrast",
            format!("{}: {} -> {}", case.variable, case.from, case.to),
        ),
        ("outcome", format!("{}={}", case.outcome, case.positive)),
        ("aggregator", case.aggregator.kind.as_str().to_string()),
    ]);
    table.pairs(&[
        ("factual effect", rational_cell(&effect.factual)),
        ("counterfactual effect", rational_cell(&effect.counterfactual)),
        ("delta", rational_cell(&effect.delta)),
    ]);
    table.heading("reclassified mass");
    table.pairs(&[("total", rational_cell(&reclassification.total))]);
    if !transition_rows.is_empty() {
        table.columns(&["variable", "from", "to", "mass"], &transition_rows);
    }

    let json = serde_json::json!({
        "comparison": name,
        "factual": case.factual,
        "counterfactual": case.counterfactual,
        "variable": case.variable,
        "from": case.from,
        "to": case.to,
        "outcome": case.outcome,
        "positive": case.positive,
        "aggregator": case.aggregator.kind.as_str(),
        "effect": {
            "factual": rational_json(&effect.factual),
            "counterfactual": rational_json(&effect.counterfactual),
            "delta": rational_json(&effect.delta),
        },
        "reclassification": {
            "total": rational_json(&reclassification.total),
            "by_variable": reclassification
                .by_variable
                .iter()
                .map(|(variable, shift)| {
                    (
                        variable.clone(),
                        serde_json::json!({
                            "disagreement": rational_json(&shift.disagreement),
                            "transitions": shift
                                .transitions
                                .iter()
                                .map(|((from, to), mass)| {
                                    serde_json::json!({
                                        "from": from,
                                        "to": to,
                                        "mass": rational_json(mass),
                                    })
                                })
                                .collect::<Vec<_>>(),
                        }),
                    )
                })
                .collect::<serde_json::Map<_, _>>(),
        },
    });

    let mut csv_rows = vec![
        vec!["factual_effect".to_string(), format_rational(&effect.factual)],
        vec![
            "counterfactual_effect".to_string(),
            format_rational(&effect.counterfactual),
        ],
        vec!["delta".to_string(), format_rational(&effect.delta)],
        vec![
            "reclassified_total".to_string(),
            format_rational(&reclassification.total),
        ],
    ];
    for (variable, shift) in &reclassification.by_variable {
        for ((from, to), mass) in &shift.transitions {
            csv_rows.push(vec![
                format!("reclassified {variable} {from}->{to}"),
                format_rational(mass),
            ]);
        }
    }
    let csv = csv_table(&["metric", "value"], &csv_rows);

    Ok((
        0,
        Payload {
            table: table.finish(),
            json,
            csv,
        },
    ))
}

// ── quotient ─────────────────────────────────────────────────────────────────

pub struct QuotientArgs {
    pub model: Option<String>,
    pub shape: String,
    pub aggregator: AggregatorKind,
}

pub fn quotient(workspace: &LoweredWorkspace, args: &QuotientArgs, style: bool) -> CommandResult {
    let lowered = lookup(&workspace.alignments, &args.shape, "alignment")?;
    let low_name = args.model.as_deref().unwrap_or(&lowered.low_model);
    let low = lookup(&workspace.models, low_name, "model")?;

    let result = quotient_high_model(Arc::clone(low), &lowered.spec, args.aggregator)
        .map_err(|err| err.to_string())?;

    let constructed_name = format!("{}_quotient", args.shape);
    let document = model_document(&constructed_name, &result.model);
    let text = canonical(&document);

    let mut table = TableDoc::new(style);
    table.heading(&format!("quotient of {low_name} over {}", args.shape));
    table.pairs(&[
        ("aggregator", args.aggregator.as_str().to_string()),
        ("exact", yes_no(result.exact).to_string()),
        ("max distance", rational_cell(&result.report.max_distance)),
        ("renormalized", yes_no(result.renormalized).to_string()),
        ("weight fallback", yes_no(result.weight_fallback).to_string()),
        (
            "verdict",
            if result.report.pass { "pass" } else { "fail" }.to_string(),
        ),
    ]);
    table.line(&text);

    let json = serde_json::json!({
        "low": low_name,
        "shape": args.shape,
        "aggregator": args.aggregator.as_str(),
        "exact": result.exact,
        "max_distance": rational_json(&result.report.max_distance),
        "renormalized": result.renormalized,
        "weight_fallback": result.weight_fallback,
        "pass": result.report.pass,
        "model": text,
    });

    let csv_rows = vec![
        vec!["exact".to_string(), yes_no(result.exact).to_string()],
        vec![
            "max_distance".to_string(),
            format_rational(&result.report.max_distance),
        ],
        vec![
            "renormalized".to_string(),
            yes_no(result.renormalized).to_string(),
        ],
        vec![
            "weight_fallback".to_string(),
            yes_no(result.weight_fallback).to_string(),
        ],
        vec![
            "pass".to_string(),
            yes_no(result.report.pass).to_string(),
        ],
        vec!["model".to_string(), text.clone()],
    ];
    let csv = csv_table(&["metric", "value"], &csv_rows);

    Ok((
        if result.report.pass { 0 } else { 1 },
        Payload {
            table: table.finish(),
            json,
            csv,
        },
    ))
}

/// Rebuild a model declaration from a live model so it can be printed in
/// the workspace file format and fed back in.
fn model_document(name: &str, model: &Scm) -> Document {
    let span = casl_core::dsl::SourceSpan::new(1, 1, 1);
    let ident = |text: &str| Name::new(text.to_string(), span);

    let mut items = Vec::new();
    for exo in model.exogenous_names() {
        let weights = model
            .exogenous_weights(exo)
            .expect("open exogenous name")
            .iter()
            .map(|(value, weight)| (ident(value), Spanned::new(weight.clone(), span)))
            .collect();
        items.push(ModelItem::Exogenous(ExogenousDecl {
            name: ident(exo),
            weights,
        }));
    }
    for var in model.evaluation_order() {
        let domain = model
            .domain(var)
            .expect("ordered variable is declared")
            .iter()
            .map(|value| ident(value))
            .collect();
        let parents: Vec<Name> = model
            .parents(var)
            .expect("ordered variable is endogenous")
            .iter()
            .map(|parent| ident(parent))
            .collect();
        let rows = model
            .table(var)
            .expect("ordered variable is endogenous")
            .iter()
            .map(|(key, value)| TableRow {
                key: key.iter().map(|part| ident(part)).collect(),
                value: ident(value),
            })
            .collect();
        items.push(ModelItem::Variable(VariableDecl {
            name: ident(var),
            domain,
            parents,
            table: rows,
        }));
    }

    Document {
        decls: vec![Decl::Model(ModelDecl {
            name: ident(name),
            items,
        })],
    }
}
