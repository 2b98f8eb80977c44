//! Hand-built models shared by unit tests across modules. Each mirrors one
//! of the shipped `.casl` fixture files.

use crate::rational::{rat, Rational};
use crate::scm::{ExogenousSpec, Scm, ScmSpec, VariableSpec};

pub fn exo(name: &str, weights: &[(&str, Rational)]) -> ExogenousSpec {
    ExogenousSpec {
        name: name.to_string(),
        weights: weights
            .iter()
            .map(|(v, w)| (v.to_string(), w.clone()))
            .collect(),
    }
}

pub fn uniform_exo(name: &str, values: &[&str]) -> ExogenousSpec {
    let n = values.len() as i64;
    ExogenousSpec {
        name: name.to_string(),
        weights: values.iter().map(|v| (v.to_string(), rat(1, n))).collect(),
    }
}

pub fn var(
    name: &str,
    domain: &[&str],
    parents: &[&str],
    table: &[(&[&str], &str)],
) -> VariableSpec {
    VariableSpec {
        name: name.to_string(),
        domain: domain.iter().map(|v| v.to_string()).collect(),
        parents: parents.iter().map(|p| p.to_string()).collect(),
        table: table
            .iter()
            .map(|(key, value)| {
                (
                    key.iter().map(|v| v.to_string()).collect(),
                    value.to_string(),
                )
            })
            .collect(),
    }
}

/// Variable that copies one source variable value for value.
pub fn identity_var(name: &str, source: &str, values: &[&str]) -> VariableSpec {
    VariableSpec {
        name: name.to_string(),
        domain: values.iter().map(|v| v.to_string()).collect(),
        parents: vec![source.to_string()],
        table: values
            .iter()
            .map(|v| (vec![v.to_string()], v.to_string()))
            .collect(),
    }
}

pub fn build(spec: ScmSpec) -> Scm {
    Scm::build(spec).expect("fixture model builds")
}

// ── Bird models ─────────────────────────────────────────────────────────────

const SHADES: [&str; 4] = ["crimson", "scarlet", "cyan", "turquoise"];

/// Bird model without exogenous noise: plumage is a parentless constant and
/// pecking is determined by it.
pub fn noise_free_bird() -> Scm {
    build(ScmSpec {
        exogenous: vec![],
        variables: vec![
            var("Fine", &SHADES, &[], &[(&[], "crimson")]),
            pecking_from_fine(&["crimson", "scarlet"]),
        ],
    })
}

fn pecking_from_fine(peckers: &[&str]) -> VariableSpec {
    let table: Vec<(Vec<String>, String)> = SHADES
        .iter()
        .map(|shade| {
            let out = if peckers.contains(shade) { "yes" } else { "no" };
            (vec![shade.to_string()], out.to_string())
        })
        .collect();
    VariableSpec {
        name: "Pecking".into(),
        domain: vec!["yes".into(), "no".into()],
        parents: vec!["Fine".into()],
        table,
    }
}

/// Fine-grained bird model: uniform prior over four shades, pecking exactly
/// on the two reddish ones.
pub fn bird_low_spec() -> ScmSpec {
    ScmSpec {
        exogenous: vec![uniform_exo("U_fine", &SHADES)],
        variables: vec![
            identity_var("Fine", "U_fine", &SHADES),
            pecking_from_fine(&["crimson", "scarlet"]),
        ],
    }
}

pub fn bird_low() -> Scm {
    build(bird_low_spec())
}

/// Bird model whose scarlet birds do not peck; breaks the coarse alignment.
pub fn perturbed_bird_low() -> Scm {
    build(ScmSpec {
        exogenous: vec![uniform_exo("U_fine", &SHADES)],
        variables: vec![
            identity_var("Fine", "U_fine", &SHADES),
            pecking_from_fine(&["crimson"]),
        ],
    })
}

/// Coarse-grained bird model: red or blue, pecking exactly when red.
pub fn bird_high() -> Scm {
    build(ScmSpec {
        exogenous: vec![uniform_exo("U_coarse", &["red", "blue"])],
        variables: vec![
            identity_var("Coarse", "U_coarse", &["red", "blue"]),
            var(
                "Pecking",
                &["yes", "no"],
                &["Coarse"],
                &[(&["red"], "yes"), (&["blue"], "no")],
            ),
        ],
    })
}

// ── Hiring audit models ─────────────────────────────────────────────────────

pub const EDUS: [&str; 4] = ["CommColl", "EliteU", "HowardU", "StateU"];

fn cb_values() -> Vec<String> {
    (1..=20).map(|i| i.to_string()).collect()
}

/// Callback table keyed on (Name, U_cb): a name gets a callback exactly when
/// the draw falls below its threshold.
fn callback_by_name(greg_hits: u32, jamal_hits: u32) -> VariableSpec {
    let mut table = Vec::new();
    for name in ["Greg", "Jamal"] {
        let hits = if name == "Greg" { greg_hits } else { jamal_hits };
        for draw in 1..=20u32 {
            let out = if draw <= hits { "yes" } else { "no" };
            table.push((vec![name.to_string(), draw.to_string()], out.to_string()));
        }
    }
    VariableSpec {
        name: "Callback".into(),
        domain: vec!["yes".into(), "no".into()],
        parents: vec!["Name".into(), "U_cb".into()],
        table,
    }
}

/// Hiring model: name and education are independent attributes; callbacks
/// favor Greg 3/20 to Jamal 2/20.
pub fn audit_low() -> Scm {
    let cb: Vec<String> = cb_values();
    let cb_refs: Vec<&str> = cb.iter().map(String::as_str).collect();
    build(ScmSpec {
        exogenous: vec![
            uniform_exo("U_name", &["Greg", "Jamal"]),
            uniform_exo("U_edu", &EDUS),
            uniform_exo("U_cb", &cb_refs),
        ],
        variables: vec![
            identity_var("Name", "U_name", &["Greg", "Jamal"]),
            identity_var("Edu", "U_edu", &EDUS),
            callback_by_name(3, 2),
        ],
    })
}

/// Race-level hiring model matching the aggregate behavior of [`audit_low`].
pub fn audit_high() -> Scm {
    let cb: Vec<String> = cb_values();
    let cb_refs: Vec<&str> = cb.iter().map(String::as_str).collect();
    let mut table = Vec::new();
    for race in ["Black", "white"] {
        let hits = if race == "white" { 3 } else { 2 };
        for draw in 1..=20u32 {
            let out = if draw <= hits { "yes" } else { "no" };
            table.push((vec![race.to_string(), draw.to_string()], out.to_string()));
        }
    }
    build(ScmSpec {
        exogenous: vec![
            uniform_exo("U_race", &["Black", "white"]),
            uniform_exo("U_cb", &cb_refs),
        ],
        variables: vec![
            identity_var("Race", "U_race", &["Black", "white"]),
            VariableSpec {
                name: "Callback".into(),
                domain: vec!["yes".into(), "no".into()],
                parents: vec!["Race".into(), "U_cb".into()],
                table,
            },
        ],
    })
}

// ── Alignments ──────────────────────────────────────────────────────────────

use crate::abstraction::{Alignment, AlignmentSpec, ClusterSpec};
use std::sync::Arc;

pub fn cluster(high_var: &str, low_vars: &[&str], map: &[(&[&str], &str)]) -> ClusterSpec {
    ClusterSpec {
        high_var: high_var.to_string(),
        low_vars: low_vars.iter().map(|v| v.to_string()).collect(),
        value_map: map
            .iter()
            .map(|(key, value)| {
                (
                    key.iter().map(|v| v.to_string()).collect(),
                    value.to_string(),
                )
            })
            .collect(),
    }
}

/// Cluster carrying one low variable to a high variable of the same domain,
/// value for value.
pub fn identity_cluster(high_var: &str, low_var: &str, values: &[&str]) -> ClusterSpec {
    ClusterSpec {
        high_var: high_var.to_string(),
        low_vars: vec![low_var.to_string()],
        value_map: values
            .iter()
            .map(|v| (vec![v.to_string()], v.to_string()))
            .collect(),
    }
}

pub fn bird_alignment_spec() -> AlignmentSpec {
    AlignmentSpec {
        clusters: vec![
            cluster(
                "Coarse",
                &["Fine"],
                &[
                    (&["crimson"], "red"),
                    (&["scarlet"], "red"),
                    (&["cyan"], "blue"),
                    (&["turquoise"], "blue"),
                ],
            ),
            identity_cluster("Pecking", "Pecking", &["yes", "no"]),
        ],
        dropped: vec![],
    }
}

pub fn bird_alignment() -> Alignment {
    Alignment::build(
        Arc::new(bird_low()),
        Arc::new(bird_high()),
        &bird_alignment_spec(),
    )
    .expect("fixture alignment builds")
}

pub fn perturbed_bird_alignment() -> Alignment {
    Alignment::build(
        Arc::new(perturbed_bird_low()),
        Arc::new(bird_high()),
        &bird_alignment_spec(),
    )
    .expect("fixture alignment builds")
}

/// One level above the coarse bird model: red is warm, blue is cool, and
/// pecking is forgotten.
pub fn warmth_high() -> Scm {
    build(ScmSpec {
        exogenous: vec![uniform_exo("U_warmth", &["warm", "cool"])],
        variables: vec![identity_var("Warmth", "U_warmth", &["warm", "cool"])],
    })
}

pub fn warmth_alignment() -> Alignment {
    let spec = AlignmentSpec {
        clusters: vec![cluster(
            "Warmth",
            &["Coarse"],
            &[(&["red"], "warm"), (&["blue"], "cool")],
        )],
        dropped: vec!["Pecking".into()],
    };
    Alignment::build(Arc::new(bird_high()), Arc::new(warmth_high()), &spec)
        .expect("fixture alignment builds")
}

// ── Hiring alignments ───────────────────────────────────────────────────────

pub fn tau_sc_spec() -> AlignmentSpec {
    AlignmentSpec {
        clusters: vec![
            cluster(
                "Race",
                &["Name"],
                &[(&["Greg"], "white"), (&["Jamal"], "Black")],
            ),
            identity_cluster("Callback", "Callback", &["yes", "no"]),
        ],
        dropped: vec!["Edu".into()],
    }
}

/// Social-construction alignment over the independent-attribute hiring
/// model: race is constituted by the name alone, education is set aside.
pub fn tau_sc() -> Alignment {
    Alignment::build(Arc::new(audit_low()), Arc::new(audit_high()), &tau_sc_spec())
        .expect("fixture alignment builds")
}

pub const EDUS2: [&str; 2] = ["HowardU", "StateU"];

/// Hiring model where education moderates the name penalty: Jamal from
/// HowardU gets callbacks at 1/20, everyone else at 3/20.
pub fn ambiguity_low() -> Scm {
    let cb: Vec<String> = cb_values();
    let cb_refs: Vec<&str> = cb.iter().map(String::as_str).collect();
    let mut table = Vec::new();
    for edu in EDUS2 {
        for name in ["Greg", "Jamal"] {
            let hits = if name == "Jamal" && edu == "HowardU" { 1 } else { 3 };
            for draw in 1..=20u32 {
                let out = if draw <= hits { "yes" } else { "no" };
                table.push((
                    vec![edu.to_string(), name.to_string(), draw.to_string()],
                    out.to_string(),
                ));
            }
        }
    }
    build(ScmSpec {
        exogenous: vec![
            uniform_exo("U_name", &["Greg", "Jamal"]),
            uniform_exo("U_edu", &EDUS2),
            uniform_exo("U_cb", &cb_refs),
        ],
        variables: vec![
            identity_var("Name", "U_name", &["Greg", "Jamal"]),
            identity_var("Edu", "U_edu", &EDUS2),
            VariableSpec {
                name: "Callback".into(),
                domain: vec!["yes".into(), "no".into()],
                parents: vec!["Edu".into(), "Name".into(), "U_cb".into()],
                table,
            },
        ],
    })
}

pub fn ambiguity_spec() -> AlignmentSpec {
    AlignmentSpec {
        clusters: vec![
            cluster(
                "Race",
                &["Edu", "Name"],
                &[
                    (&["HowardU", "Greg"], "white"),
                    (&["HowardU", "Jamal"], "Black"),
                    (&["StateU", "Greg"], "white"),
                    (&["StateU", "Jamal"], "Black"),
                ],
            ),
            identity_cluster("Callback", "Callback", &["yes", "no"]),
        ],
        dropped: vec![],
    }
}

/// Race as constituted by name and education together, over
/// [`ambiguity_low`]. The two low realizations of `Race = Black` disagree
/// on callback rates, so high interventions are ambiguous.
pub fn ambiguity_alignment() -> Alignment {
    Alignment::build(
        Arc::new(ambiguity_low()),
        Arc::new(audit_high()),
        &ambiguity_spec(),
    )
    .expect("fixture alignment builds")
}

// ── Correlated-attribute hiring models ──────────────────────────────────────

/// Hiring model with correlated attributes: education tracks the name three
/// quarters of the time (Greg to EliteU, Jamal to HowardU), and callbacks
/// depend on both. Audit contrasts on typical resumes then diverge from the
/// population-weighted group effect.
pub fn audit_skew_low() -> Scm {
    let cb: Vec<String> = cb_values();
    let cb_refs: Vec<&str> = cb.iter().map(String::as_str).collect();
    let thresholds = [
        (("EliteU", "Greg"), 3),
        (("EliteU", "Jamal"), 2),
        (("HowardU", "Greg"), 2),
        (("HowardU", "Jamal"), 1),
    ];
    let mut table = Vec::new();
    for ((edu, name), hits) in thresholds {
        for draw in 1..=20u32 {
            let out = if draw <= hits { "yes" } else { "no" };
            table.push((
                vec![edu.to_string(), name.to_string(), draw.to_string()],
                out.to_string(),
            ));
        }
    }
    build(ScmSpec {
        exogenous: vec![
            uniform_exo("U_corr", &["g", "j"]),
            exo("U_flip", &[("stay", rat(3, 4)), ("flip", rat(1, 4))]),
            uniform_exo("U_cb", &cb_refs),
        ],
        variables: vec![
            var(
                "Name",
                &["Greg", "Jamal"],
                &["U_corr"],
                &[(&["g"], "Greg"), (&["j"], "Jamal")],
            ),
            var(
                "Edu",
                &["EliteU", "HowardU"],
                &["U_corr", "U_flip"],
                &[
                    (&["g", "stay"], "EliteU"),
                    (&["g", "flip"], "HowardU"),
                    (&["j", "stay"], "HowardU"),
                    (&["j", "flip"], "EliteU"),
                ],
            ),
            VariableSpec {
                name: "Callback".into(),
                domain: vec!["yes".into(), "no".into()],
                parents: vec!["Edu".into(), "Name".into(), "U_cb".into()],
                table,
            },
        ],
    })
}

/// Race as constituted by name and education over [`audit_skew_low`]; the
/// education component never changes the assigned race, but it does change
/// the callback rate.
pub fn audit_skew_spec() -> AlignmentSpec {
    AlignmentSpec {
        clusters: vec![
            cluster(
                "Race",
                &["Edu", "Name"],
                &[
                    (&["EliteU", "Greg"], "white"),
                    (&["EliteU", "Jamal"], "Black"),
                    (&["HowardU", "Greg"], "white"),
                    (&["HowardU", "Jamal"], "Black"),
                ],
            ),
            identity_cluster("Callback", "Callback", &["yes", "no"]),
        ],
        dropped: vec![],
    }
}

/// Degenerate hiring model where education is a function of the name, so
/// name-swapped resumes describe applicants who do not exist.
pub fn deterministic_edu_low() -> Scm {
    build(ScmSpec {
        exogenous: vec![
            uniform_exo("U_name", &["Greg", "Jamal"]),
            uniform_exo("U_cb", &cb_values().iter().map(String::as_str).collect::<Vec<_>>()),
        ],
        variables: vec![
            identity_var("Name", "U_name", &["Greg", "Jamal"]),
            var(
                "Edu",
                &["EliteU", "HowardU"],
                &["Name"],
                &[(&["Greg"], "EliteU"), (&["Jamal"], "HowardU")],
            ),
            callback_by_name(3, 2),
        ],
    })
}

// ── Competing-construction models ───────────────────────────────────────────

/// Low model where gendered dress mediates hiring: identity drives typical
/// dress three quarters of the time, and only dress moves the hiring rate
/// (pants 1/2, skirt 1/4).
pub fn gender_low() -> Scm {
    let draws: Vec<String> = (1..=8).map(|i| i.to_string()).collect();
    let draw_refs: Vec<&str> = draws.iter().map(String::as_str).collect();
    let mut hire_table = Vec::new();
    for dress in ["pants", "skirt"] {
        let hits = if dress == "pants" { 4 } else { 2 };
        for draw in 1..=8u32 {
            let out = if draw <= hits { "yes" } else { "no" };
            hire_table.push((vec![dress.to_string(), draw.to_string()], out.to_string()));
        }
    }
    build(ScmSpec {
        exogenous: vec![
            uniform_exo("U_id", &["m", "f"]),
            exo("U_dress", &[("typ", rat(3, 4)), ("atyp", rat(1, 4))]),
            uniform_exo("U_hire", &draw_refs),
        ],
        variables: vec![
            var(
                "Identity",
                &["m", "f"],
                &["U_id"],
                &[(&["m"], "m"), (&["f"], "f")],
            ),
            var(
                "Dress",
                &["pants", "skirt"],
                &["Identity", "U_dress"],
                &[
                    (&["m", "typ"], "pants"),
                    (&["m", "atyp"], "skirt"),
                    (&["f", "typ"], "skirt"),
                    (&["f", "atyp"], "pants"),
                ],
            ),
            VariableSpec {
                name: "Hired".into(),
                domain: vec!["yes".into(), "no".into()],
                parents: vec!["Dress".into(), "U_hire".into()],
                table: hire_table,
            },
        ],
    })
}

/// Gender-level hiring model: men are hired at 1/2, women at 1/4.
pub fn gender_high() -> Scm {
    let draws: Vec<String> = (1..=8).map(|i| i.to_string()).collect();
    let draw_refs: Vec<&str> = draws.iter().map(String::as_str).collect();
    let mut hire_table = Vec::new();
    for gender in ["man", "woman"] {
        let hits = if gender == "man" { 4 } else { 2 };
        for draw in 1..=8u32 {
            let out = if draw <= hits { "yes" } else { "no" };
            hire_table.push((vec![gender.to_string(), draw.to_string()], out.to_string()));
        }
    }
    build(ScmSpec {
        exogenous: vec![
            uniform_exo("U_g", &["man", "woman"]),
            uniform_exo("U_hire", &draw_refs),
        ],
        variables: vec![
            identity_var("Gender", "U_g", &["man", "woman"]),
            VariableSpec {
                name: "Hired".into(),
                domain: vec!["yes".into(), "no".into()],
                parents: vec!["Gender".into(), "U_hire".into()],
                table: hire_table,
            },
        ],
    })
}

/// Gender as constituted by dress: pants signal a man, a skirt a woman.
pub fn gender_dress_alignment() -> Alignment {
    let spec = AlignmentSpec {
        clusters: vec![
            cluster(
                "Gender",
                &["Dress"],
                &[(&["pants"], "man"), (&["skirt"], "woman")],
            ),
            identity_cluster("Hired", "Hired", &["yes", "no"]),
        ],
        dropped: vec!["Identity".into()],
    };
    Alignment::build(Arc::new(gender_low()), Arc::new(gender_high()), &spec)
        .expect("fixture alignment builds")
}

/// Gender as constituted by identity, with dress set aside.
pub fn gender_identity_alignment() -> Alignment {
    let spec = AlignmentSpec {
        clusters: vec![
            cluster(
                "Gender",
                &["Identity"],
                &[(&["m"], "man"), (&["f"], "woman")],
            ),
            identity_cluster("Hired", "Hired", &["yes", "no"]),
        ],
        dropped: vec!["Dress".into()],
    };
    Alignment::build(Arc::new(gender_low()), Arc::new(gender_high()), &spec)
        .expect("fixture alignment builds")
}

/// Low model where a badge follows practice alone, and membership is an
/// independent label.
pub fn creed_low() -> Scm {
    build(ScmSpec {
        exogenous: vec![
            uniform_exo("U_m", &["a", "b"]),
            uniform_exo("U_p", &["p1", "p2"]),
        ],
        variables: vec![
            identity_var("Membership", "U_m", &["a", "b"]),
            identity_var("Practice", "U_p", &["p1", "p2"]),
            var(
                "Badge",
                &["yes", "no"],
                &["Practice"],
                &[(&["p1"], "yes"), (&["p2"], "no")],
            ),
        ],
    })
}

/// Creed-level model: the badge tracks the creed exactly.
pub fn creed_high() -> Scm {
    build(ScmSpec {
        exogenous: vec![uniform_exo("U_c", &["alpha", "beta"])],
        variables: vec![
            identity_var("Creed", "U_c", &["alpha", "beta"]),
            var(
                "Badge",
                &["yes", "no"],
                &["Creed"],
                &[(&["alpha"], "yes"), (&["beta"], "no")],
            ),
        ],
    })
}

/// Creed as constituted by practice.
pub fn creed_practice_alignment() -> Alignment {
    let spec = AlignmentSpec {
        clusters: vec![
            cluster(
                "Creed",
                &["Practice"],
                &[(&["p1"], "alpha"), (&["p2"], "beta")],
            ),
            identity_cluster("Badge", "Badge", &["yes", "no"]),
        ],
        dropped: vec!["Membership".into()],
    };
    Alignment::build(Arc::new(creed_low()), Arc::new(creed_high()), &spec)
        .expect("fixture alignment builds")
}

/// Creed as constituted by membership.
pub fn creed_membership_alignment() -> Alignment {
    let spec = AlignmentSpec {
        clusters: vec![
            cluster(
                "Creed",
                &["Membership"],
                &[(&["a"], "alpha"), (&["b"], "beta")],
            ),
            identity_cluster("Badge", "Badge", &["yes", "no"]),
        ],
        dropped: vec!["Practice".into()],
    };
    Alignment::build(Arc::new(creed_low()), Arc::new(creed_high()), &spec)
        .expect("fixture alignment builds")
}
