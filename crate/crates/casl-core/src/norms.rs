//! Contrasts between competing constructions of the same attribute.
//!
//! Two alignments over one low-level model can disagree about what a high
//! variable *is*: which low variables constitute it and how their values
//! classify. This module pairs such alignments and asks how causal
//! conclusions shift when the construction shifts. `attribute_effect`
//! measures a high-level contrast under one construction;
//! [`norm_effect`] takes the difference between constructions; and
//! [`reclassification_summary`] reports how much probability mass the two
//! constructions sort into different categories.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::abstraction::{Aggregator, Alignment, AnalysisError};
use crate::rational::Rational;
use crate::scm::{Intervention, QueryError};

// ── Errors ───────────────────────────────────────────────────────────────────

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NormError {
    #[error("the two alignments describe different low models")]
    DifferentLowModels,
    #[error(
        "the alignments map different high variables (only first: [{}]; only second: [{}])",
        .only_first.join(", "),
        .only_second.join(", ")
    )]
    MappedVariablesDiffer {
        only_first: Vec<String>,
        only_second: Vec<String>,
    },
    #[error("`{variable}` takes different values under the two alignments")]
    ValuesDisagree { variable: String },
    #[error("`{variable}` is the outcome; contrast a different attribute")]
    ContrastsOutcome { variable: String },
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Query(#[from] QueryError),
}

// ── Alignment pairs ──────────────────────────────────────────────────────────

/// Two alignments of the same low model that map the same high variables,
/// with matching value ranges, so their conclusions are directly comparable.
#[derive(Debug, Clone)]
pub struct AlignmentPair {
    first: Alignment,
    second: Alignment,
}

impl AlignmentPair {
    pub fn new(first: Alignment, second: Alignment) -> Result<Self, NormError> {
        if first.low().as_ref() != second.low().as_ref() {
            return Err(NormError::DifferentLowModels);
        }
        let first_vars: BTreeSet<String> = first.mapped_high_vars().into_iter().collect();
        let second_vars: BTreeSet<String> = second.mapped_high_vars().into_iter().collect();
        if first_vars != second_vars {
            return Err(NormError::MappedVariablesDiffer {
                only_first: first_vars.difference(&second_vars).cloned().collect(),
                only_second: second_vars.difference(&first_vars).cloned().collect(),
            });
        }
        for var in &first_vars {
            let first_image = first.cluster(var).expect("mapped var has a cluster").image();
            let second_image = second.cluster(var).expect("mapped var has a cluster").image();
            if first_image != second_image {
                return Err(NormError::ValuesDisagree {
                    variable: var.to_string(),
                });
            }
        }
        Ok(AlignmentPair { first, second })
    }

    pub fn first(&self) -> &Alignment {
        &self.first
    }

    pub fn second(&self) -> &Alignment {
        &self.second
    }

    /// High variables both alignments give meaning to, sorted.
    pub fn shared_vars(&self) -> Vec<String> {
        self.first.mapped_high_vars()
    }
}

// ── Attribute and norm effects ───────────────────────────────────────────────

/// Aggregated effect of moving `variable` from one value to another on the
/// probability that `outcome` is `positive`, read through one construction.
///
/// The contrast runs over the low realizations of each high setting, so the
/// result depends on what `variable` is taken to consist of. The outcome must
/// be a different high variable than the one being contrasted.
pub fn attribute_effect(
    alignment: &Alignment,
    variable: &str,
    from_value: &str,
    to_value: &str,
    outcome: &str,
    positive: &str,
    aggregator: &Aggregator,
) -> Result<Rational, NormError> {
    if variable == outcome {
        return Err(NormError::ContrastsOutcome {
            variable: variable.to_string(),
        });
    }
    let from_report = alignment.ambiguity_report(
        &Intervention::from_pairs([(variable, from_value)]),
        outcome,
        positive,
        aggregator,
    )?;
    let to_report = alignment.ambiguity_report(
        &Intervention::from_pairs([(variable, to_value)]),
        outcome,
        positive,
        aggregator,
    )?;
    Ok(from_report.aggregated - to_report.aggregated)
}

/// An attribute contrast evaluated under both constructions in a pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormEffectReport {
    pub variable: String,
    pub from_value: String,
    pub to_value: String,
    pub outcome: String,
    pub positive: String,
    /// Effect under the pair's first construction.
    pub factual: Rational,
    /// Effect under the pair's second construction.
    pub counterfactual: Rational,
    /// `factual - counterfactual`: how much of the measured effect is owed
    /// to the choice of construction.
    pub delta: Rational,
}

/// Contrast `variable` across both constructions and report the difference.
pub fn norm_effect(
    pair: &AlignmentPair,
    variable: &str,
    from_value: &str,
    to_value: &str,
    outcome: &str,
    positive: &str,
    aggregator: &Aggregator,
) -> Result<NormEffectReport, NormError> {
    let factual = attribute_effect(
        pair.first(),
        variable,
        from_value,
        to_value,
        outcome,
        positive,
        aggregator,
    )?;
    let counterfactual = attribute_effect(
        pair.second(),
        variable,
        from_value,
        to_value,
        outcome,
        positive,
        aggregator,
    )?;
    let delta = factual.clone() - counterfactual.clone();
    Ok(NormEffectReport {
        variable: variable.to_string(),
        from_value: from_value.to_string(),
        to_value: to_value.to_string(),
        outcome: outcome.to_string(),
        positive: positive.to_string(),
        factual,
        counterfactual,
        delta,
    })
}

// ── Reclassification ─────────────────────────────────────────────────────────

/// How one high variable's classification shifts between constructions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableReclassification {
    /// Mass of low worlds the two constructions classify differently.
    pub disagreement: Rational,
    /// Mass per ordered pair `(first's value, second's value)`, off-diagonal
    /// and positive only.
    pub transitions: BTreeMap<(String, String), Rational>,
}

/// Observational mass the two constructions sort into different categories.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReclassificationSummary {
    /// Mass of low worlds where at least one shared variable is reclassified.
    pub total: Rational,
    pub by_variable: BTreeMap<String, VariableReclassification>,
}

/// Mass of low worlds where the two constructions disagree on at least one
/// shared high variable.
pub fn classification_delta(pair: &AlignmentPair) -> Result<Rational, NormError> {
    Ok(reclassification_summary(pair)?.total)
}

/// Per-variable and overall reclassification masses under the low model's
/// observational distribution.
pub fn reclassification_summary(pair: &AlignmentPair) -> Result<ReclassificationSummary, NormError> {
    let low = pair.first().low();
    let observation = low.observational_distribution()?;
    let scope: Vec<&str> = observation.scope().iter().map(|v| v.as_str()).collect();
    let position: BTreeMap<&str, usize> = scope.iter().enumerate().map(|(i, v)| (*v, i)).collect();

    let shared = pair.shared_vars();
    let mut total = Rational::from_integer(0.into());
    let mut by_variable: BTreeMap<String, VariableReclassification> = shared
        .iter()
        .map(|var| {
            (
                var.clone(),
                VariableReclassification {
                    disagreement: Rational::from_integer(0.into()),
                    transitions: BTreeMap::new(),
                },
            )
        })
        .collect();

    for (key, weight) in observation.entries() {
        let mut any_differ = false;
        for var in &shared {
            let first_value = classify(pair.first(), var, key, &position);
            let second_value = classify(pair.second(), var, key, &position);
            if first_value != second_value {
                any_differ = true;
                let entry = by_variable.get_mut(var).expect("initialized above");
                entry.disagreement += weight;
                *entry
                    .transitions
                    .entry((first_value, second_value))
                    .or_insert_with(|| Rational::from_integer(0.into())) += weight;
            }
        }
        if any_differ {
            total += weight;
        }
    }

    Ok(ReclassificationSummary { total, by_variable })
}

/// Value `alignment` assigns to high `var` in the low world `key`.
fn classify(
    alignment: &Alignment,
    var: &str,
    key: &[String],
    position: &BTreeMap<&str, usize>,
) -> String {
    let cluster = alignment.cluster(var).expect("shared var has a cluster");
    let cluster_key: Vec<String> = cluster
        .low_vars()
        .iter()
        .map(|low_var| key[position[low_var.as_str()]].clone())
        .collect();
    cluster.value_map()[&cluster_key].clone()
}

// ── Tests ────────────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abstraction::AlignmentSpec;
    use crate::rational::rat;
    use crate::test_fixtures::*;

    fn creed_pair() -> AlignmentPair {
        AlignmentPair::new(creed_practice_alignment(), creed_membership_alignment())
            .expect("creed alignments pair up")
    }

    fn gender_pair() -> AlignmentPair {
        AlignmentPair::new(gender_dress_alignment(), gender_identity_alignment())
            .expect("gender alignments pair up")
    }

    #[test]
    fn badge_contrast_is_total_under_practice_and_null_under_membership() {
        let report = norm_effect(
            &creed_pair(),
            "Creed",
            "alpha",
            "beta",
            "Badge",
            "yes",
            &Aggregator::default(),
        )
        .unwrap();
        assert_eq!(report.factual, rat(1, 1));
        assert_eq!(report.counterfactual, rat(0, 1));
        assert_eq!(report.delta, rat(1, 1));
    }

    #[test]
    fn independent_label_reclassifies_half_the_population() {
        let summary = reclassification_summary(&creed_pair()).unwrap();
        assert_eq!(summary.total, rat(1, 2));
        let creed = &summary.by_variable["Creed"];
        assert_eq!(creed.disagreement, rat(1, 2));
        assert_eq!(
            creed.transitions[&("alpha".to_string(), "beta".to_string())],
            rat(1, 4)
        );
        assert_eq!(
            creed.transitions[&("beta".to_string(), "alpha".to_string())],
            rat(1, 4)
        );
        assert!(summary.by_variable["Badge"].transitions.is_empty());
        assert_eq!(classification_delta(&creed_pair()).unwrap(), rat(1, 2));
    }

    #[test]
    fn dress_mediation_shrinks_the_identity_level_hiring_gap() {
        let uniform = Aggregator {
            kind: crate::abstraction::AggregatorKind::UniformMean,
            reference: None,
        };
        let report = norm_effect(
            &gender_pair(),
            "Gender",
            "man",
            "woman",
            "Hired",
            "yes",
            &uniform,
        )
        .unwrap();
        assert_eq!(report.factual, rat(1, 4));
        assert_eq!(report.counterfactual, rat(1, 8));
        assert_eq!(report.delta, rat(1, 8));
    }

    #[test]
    fn atypical_dressers_are_the_reclassified_quarter() {
        let summary = reclassification_summary(&gender_pair()).unwrap();
        assert_eq!(summary.total, rat(1, 4));
        let gender = &summary.by_variable["Gender"];
        assert_eq!(gender.disagreement, rat(1, 4));
        assert_eq!(
            gender.transitions[&("man".to_string(), "woman".to_string())],
            rat(1, 8)
        );
        assert_eq!(
            gender.transitions[&("woman".to_string(), "man".to_string())],
            rat(1, 8)
        );
        assert!(summary.by_variable["Hired"].transitions.is_empty());
    }

    #[test]
    fn pairs_require_the_same_low_model() {
        let err = AlignmentPair::new(creed_practice_alignment(), gender_dress_alignment())
            .unwrap_err();
        assert_eq!(err, NormError::DifferentLowModels);
    }

    #[test]
    fn pairs_require_the_same_mapped_variables() {
        let narrow = Alignment::build(
            std::sync::Arc::new(gender_low()),
            std::sync::Arc::new(gender_high()),
            &AlignmentSpec {
                clusters: vec![cluster(
                    "Gender",
                    &["Dress"],
                    &[(&["pants"], "man"), (&["skirt"], "woman")],
                )],
                dropped: vec!["Identity".into(), "Hired".into()],
            },
        )
        .unwrap();
        let err = AlignmentPair::new(gender_dress_alignment(), narrow).unwrap_err();
        assert_eq!(
            err,
            NormError::MappedVariablesDiffer {
                only_first: vec!["Hired".into()],
                only_second: vec![],
            }
        );
    }

    #[test]
    fn contrasting_the_outcome_itself_is_rejected() {
        let err = attribute_effect(
            gender_pair().first(),
            "Hired",
            "yes",
            "no",
            "Hired",
            "yes",
            &Aggregator::default(),
        )
        .unwrap_err();
        assert_eq!(
            err,
            NormError::ContrastsOutcome {
                variable: "Hired".into()
            }
        );
    }
}
