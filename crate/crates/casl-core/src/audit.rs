//! Audit studies over resume projections and the social constructions they
//! implicitly measure.
//!
//! A [`PopulationModel`] is a low-level model with a designated outcome
//! variable and positive value. A [`ResumeProjection`] selects the
//! endogenous variables a screener sees. The audit lab then answers the
//! questions an audit study raises: what effect does swapping one resume
//! for another have ([`PopulationModel::audit_effect`]), what group does a
//! resume signal under a given social construction
//! ([`SocialConstruction::assign_race`]), what would intervening on the
//! constructed category itself do ([`SocialConstruction::race_effect`]),
//! and under what assumptions the first number measures the second
//! ([`audit_validity_check`]). Two diagnostics guard the design:
//! [`PopulationModel::atypicality_report`] quantifies how unusual a
//! manipulated resume is against an anchor, and
//! [`PopulationModel::positivity_check`] verifies every resume actually
//! occurs in the population.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::Zero;

use crate::abstraction::{
    Aggregator, Alignment, AlignmentError, AlignmentSpec, AnalysisError, ClusterSpec,
    ConsistencyReport, InterventionSet,
};
use crate::distribution::Distribution;
use crate::rational::Rational;
use crate::scm::{Assignment, Intervention, QueryError, Scm};
use crate::util::ProductIter;

// ── Errors ──────────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AuditError {
    #[error("outcome `{variable}` is not an endogenous variable of the model")]
    UnknownOutcome { variable: String },
    #[error("`{value}` is not in the domain of outcome `{variable}`")]
    UnknownPositiveValue { variable: String, value: String },
    #[error("projection keeps `{variable}`, which is not an endogenous variable")]
    UnknownProjectionVariable { variable: String },
    #[error("projection keeps the outcome `{variable}`; screeners cannot read the result off the resume")]
    OutcomeInProjection { variable: String },
    #[error("malformed resume: {detail}")]
    MalformedResume { detail: String },
    #[error("outcome `{variable}` cannot sit in a constitutive basis")]
    OutcomeInConstitutiveBasis { variable: String },
    #[error("the outcome cannot be dropped from a social construction")]
    OutcomeDropped,
    #[error("social construction is invalid: {}", .errors.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))]
    Construction { errors: Vec<AlignmentError> },
    #[error("cannot identify the protected attribute: {detail}")]
    ProtectedAttribute { detail: String },
    #[error("the social construction was built over a different population model")]
    PopulationMismatch,
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Query(#[from] QueryError),
}

// ── Population model ────────────────────────────────────────────────────────

/// A low-level model together with the outcome an audit study watches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PopulationModel {
    model: Arc<Scm>,
    outcome: String,
    positive: String,
}

impl PopulationModel {
    pub fn new(model: Arc<Scm>, outcome: &str, positive: &str) -> Result<Self, AuditError> {
        let Some(domain) = model.domain(outcome).filter(|_| model.is_endogenous(outcome))
        else {
            return Err(AuditError::UnknownOutcome {
                variable: outcome.to_string(),
            });
        };
        if !domain.iter().any(|v| v == positive) {
            return Err(AuditError::UnknownPositiveValue {
                variable: outcome.to_string(),
                value: positive.to_string(),
            });
        }
        Ok(PopulationModel {
            model,
            outcome: outcome.to_string(),
            positive: positive.to_string(),
        })
    }

    pub fn model(&self) -> &Arc<Scm> {
        &self.model
    }

    pub fn outcome(&self) -> &str {
        &self.outcome
    }

    pub fn positive(&self) -> &str {
        &self.positive
    }

    fn positive_event(&self) -> BTreeMap<String, String> {
        [(self.outcome.clone(), self.positive.clone())].into()
    }

    /// Probability of the positive outcome under an intervention.
    pub fn outcome_rate(&self, iv: &Intervention) -> Result<Rational, AuditError> {
        Ok(self
            .model
            .interventional_distribution(iv)?
            .probability(&self.positive_event())?)
    }

    /// Observational mass of a resume and the renormalized population it
    /// selects. A resume nobody has yields mass zero and no population.
    pub fn population_for_resume(
        &self,
        projection: &ResumeProjection,
        resume: &Assignment,
    ) -> Result<ResumePopulation, AuditError> {
        projection.check_resume(&self.model, resume)?;
        let (mass, distribution) = self
            .model
            .observational_distribution()?
            .condition(resume)?;
        Ok(ResumePopulation { mass, distribution })
    }

    /// The audit contrast: probability of the positive outcome when every
    /// kept variable is forced to one resume minus the same under another.
    pub fn audit_effect(
        &self,
        projection: &ResumeProjection,
        resume_a: &Assignment,
        resume_b: &Assignment,
    ) -> Result<Rational, AuditError> {
        projection.check_resume(&self.model, resume_a)?;
        projection.check_resume(&self.model, resume_b)?;
        let rate_a = self.outcome_rate(&assignment_intervention(resume_a))?;
        let rate_b = self.outcome_rate(&assignment_intervention(resume_b))?;
        Ok(rate_a - rate_b)
    }

    /// How unusual a resume is: total variation distance between the
    /// conditional distributions of the hidden variables given the resume
    /// and given the anchor. Hidden variables are the endogenous variables
    /// the screener does not see, excluding the outcome.
    pub fn atypicality_report(
        &self,
        projection: &ResumeProjection,
        resume: &Assignment,
        anchor: &Assignment,
    ) -> Result<AtypicalityReport, AuditError> {
        projection.check_resume(&self.model, resume)?;
        projection.check_resume(&self.model, anchor)?;
        let hidden: Vec<String> = self
            .model
            .endogenous_names()
            .filter(|v| !projection.keeps(v) && *v != self.outcome)
            .map(str::to_string)
            .collect();
        let observational = self.model.observational_distribution()?;
        let (resume_mass, resume_population) = observational.condition(resume)?;
        let (anchor_mass, anchor_population) = observational.condition(anchor)?;
        let distance = match (resume_population, anchor_population) {
            (Some(r), Some(a)) => {
                Some(r.marginal(&hidden)?.tv_distance(&a.marginal(&hidden)?)?)
            }
            _ => None,
        };
        Ok(AtypicalityReport {
            resume: resume.clone(),
            anchor: anchor.clone(),
            resume_mass,
            anchor_mass,
            hidden,
            distance,
        })
    }

    /// Checks that every joint setting of the kept variables has positive
    /// observational mass, listing the resumes that do not.
    pub fn positivity_check(
        &self,
        projection: &ResumeProjection,
    ) -> Result<PositivityReport, AuditError> {
        let observational = self.model.observational_distribution()?;
        let kept = projection.kept();
        let domains: Vec<&[String]> = kept
            .iter()
            .map(|v| self.model.domain(v).expect("projection is validated"))
            .collect();
        let sizes: Vec<usize> = domains.iter().map(|d| d.len()).collect();
        let checked = ProductIter::count_tuples(&sizes);
        let mut zero_mass = Vec::new();
        for idx in ProductIter::new(sizes) {
            let resume: Assignment = idx
                .iter()
                .enumerate()
                .map(|(pos, &i)| (kept[pos].clone(), domains[pos][i].clone()))
                .collect();
            if observational.probability(&resume)?.is_zero() {
                zero_mass.push(resume);
            }
        }
        Ok(PositivityReport {
            kept: kept.to_vec(),
            holds: zero_mass.is_empty(),
            zero_mass,
            checked,
        })
    }
}

fn assignment_intervention(assignment: &Assignment) -> Intervention {
    assignment
        .iter()
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect()
}

/// Observational mass of a resume plus the population it selects, when any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResumePopulation {
    pub mass: Rational,
    pub distribution: Option<Distribution>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtypicalityReport {
    pub resume: Assignment,
    pub anchor: Assignment,
    pub resume_mass: Rational,
    pub anchor_mass: Rational,
    /// Endogenous variables the screener does not see, outcome excluded.
    pub hidden: Vec<String>,
    /// Total variation distance between the hidden-variable populations;
    /// absent when either resume selects nobody.
    pub distance: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositivityReport {
    pub kept: Vec<String>,
    pub holds: bool,
    /// Joint kept settings with zero observational mass, in lexicographic
    /// order.
    pub zero_mass: Vec<Assignment>,
    pub checked: u128,
}

// ── Resume projections ──────────────────────────────────────────────────────

/// The endogenous variables a screener can read off a resume.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResumeProjection {
    kept: Vec<String>,
}

impl ResumeProjection {
    /// Validates the kept list: endogenous variables only, never the
    /// outcome. Duplicates collapse; order is normalized to sorted.
    pub fn new(population: &PopulationModel, kept: &[String]) -> Result<Self, AuditError> {
        let mut names = Vec::new();
        for var in kept {
            if !population.model.is_endogenous(var) {
                return Err(AuditError::UnknownProjectionVariable {
                    variable: var.clone(),
                });
            }
            if var == &population.outcome {
                return Err(AuditError::OutcomeInProjection {
                    variable: var.clone(),
                });
            }
            names.push(var.clone());
        }
        names.sort();
        names.dedup();
        Ok(ResumeProjection { kept: names })
    }

    pub fn kept(&self) -> &[String] {
        &self.kept
    }

    pub fn keeps(&self, var: &str) -> bool {
        self.kept.iter().any(|v| v == var)
    }

    /// A resume must assign exactly the kept variables, each to a value in
    /// its domain.
    pub fn check_resume(&self, model: &Scm, resume: &Assignment) -> Result<(), AuditError> {
        for var in &self.kept {
            let Some(value) = resume.get(var) else {
                return Err(AuditError::MalformedResume {
                    detail: format!("missing a value for kept variable `{var}`"),
                });
            };
            let domain = model.domain(var).expect("projection is validated");
            if !domain.iter().any(|v| v == value) {
                return Err(AuditError::Query(QueryError::UnknownValue {
                    variable: var.clone(),
                    value: value.clone(),
                }));
            }
        }
        for var in resume.keys() {
            if !self.keeps(var) {
                return Err(AuditError::MalformedResume {
                    detail: format!("assigns `{var}`, which the projection does not keep"),
                });
            }
        }
        Ok(())
    }
}

// ── Social constructions ────────────────────────────────────────────────────

/// An alignment from the population model to a group-level model in which
/// one high variable plays the protected role and the outcome is carried
/// up unchanged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SocialConstruction {
    alignment: Alignment,
    protected: String,
    outcome: String,
    positive: String,
}

/// Builds the alignment for a social construction: the caller supplies the
/// constitutive clusters and dropped variables, and the outcome is mapped
/// by an identity cluster added automatically.
pub fn build_social_construction(
    population: &PopulationModel,
    high: Arc<Scm>,
    clusters: Vec<ClusterSpec>,
    dropped: Vec<String>,
    protected: Option<&str>,
) -> Result<SocialConstruction, AuditError> {
    for cluster in &clusters {
        if cluster.low_vars.iter().any(|v| v == &population.outcome) {
            return Err(AuditError::OutcomeInConstitutiveBasis {
                variable: population.outcome.clone(),
            });
        }
    }
    if dropped.iter().any(|v| v == &population.outcome) {
        return Err(AuditError::OutcomeDropped);
    }

    let outcome_domain = population
        .model
        .domain(&population.outcome)
        .expect("outcome is validated");
    let mut clusters = clusters;
    clusters.push(ClusterSpec {
        high_var: population.outcome.clone(),
        low_vars: vec![population.outcome.clone()],
        value_map: outcome_domain
            .iter()
            .map(|v| (vec![v.clone()], v.clone()))
            .collect(),
    });
    let spec = AlignmentSpec { clusters, dropped };
    let alignment = Alignment::build(population.model.clone(), high, &spec)
        .map_err(|errors| AuditError::Construction { errors })?;

    let candidates: Vec<String> = alignment
        .mapped_high_vars()
        .into_iter()
        .filter(|v| v != &population.outcome)
        .collect();
    let protected = match protected {
        Some(name) => {
            if !candidates.iter().any(|v| v == name) {
                return Err(AuditError::ProtectedAttribute {
                    detail: format!("`{name}` is not a mapped non-outcome high variable"),
                });
            }
            name.to_string()
        }
        None => match candidates.as_slice() {
            [only] => only.clone(),
            [] => {
                return Err(AuditError::ProtectedAttribute {
                    detail: "the construction maps no high variable besides the outcome"
                        .to_string(),
                })
            }
            several => {
                return Err(AuditError::ProtectedAttribute {
                    detail: format!(
                        "several candidates ({}); name one explicitly",
                        several.join(", ")
                    ),
                })
            }
        },
    };
    Ok(SocialConstruction {
        alignment,
        protected,
        outcome: population.outcome.clone(),
        positive: population.positive.clone(),
    })
}

impl SocialConstruction {
    pub fn alignment(&self) -> &Alignment {
        &self.alignment
    }

    pub fn protected(&self) -> &str {
        &self.protected
    }

    pub fn outcome(&self) -> &str {
        &self.outcome
    }

    /// Values of the protected attribute, in sorted order.
    pub fn protected_values(&self) -> Vec<String> {
        self.alignment
            .cluster(&self.protected)
            .expect("protected is mapped")
            .image()
            .into_iter()
            .map(str::to_string)
            .collect()
    }

    /// The group a resume signals: the population matching the resume,
    /// pushed onto the protected attribute. `None` when the resume selects
    /// nobody. The modal value breaks ties toward the lexicographically
    /// smaller value and says so.
    pub fn assign_race(
        &self,
        projection: &ResumeProjection,
        resume: &Assignment,
    ) -> Result<Option<RaceCall>, AuditError> {
        projection.check_resume(self.alignment.low(), resume)?;
        let (_, population) = self
            .alignment
            .low()
            .observational_distribution()?
            .condition(resume)?;
        let Some(population) = population else {
            return Ok(None);
        };
        let pushed = self
            .alignment
            .push_marginal(&population, std::slice::from_ref(&self.protected))?;
        let mut modal: Option<(String, Rational)> = None;
        let mut tied = false;
        for (key, weight) in pushed.entries() {
            match &modal {
                Some((_, best)) if weight > best => {
                    modal = Some((key[0].clone(), weight.clone()));
                    tied = false;
                }
                Some((_, best)) if weight == best => tied = true,
                Some(_) => {}
                None => modal = Some((key[0].clone(), weight.clone())),
            }
        }
        let (value, probability) = modal.expect("population has positive mass");
        Ok(Some(RaceCall {
            distribution: pushed,
            value,
            probability,
            tied,
        }))
    }

    /// Effect of intervening on the protected attribute itself, with the
    /// realization ambiguity collapsed by the aggregator.
    pub fn race_effect(
        &self,
        from_value: &str,
        to_value: &str,
        aggregator: &Aggregator,
    ) -> Result<Rational, AuditError> {
        let from_report = self.alignment.ambiguity_report(
            &Intervention::from_pairs([(self.protected.as_str(), from_value)]),
            &self.outcome,
            &self.positive,
            aggregator,
        )?;
        let to_report = self.alignment.ambiguity_report(
            &Intervention::from_pairs([(self.protected.as_str(), to_value)]),
            &self.outcome,
            &self.positive,
            aggregator,
        )?;
        Ok(from_report.aggregated - to_report.aggregated)
    }

    /// Exact consistency over every low realization of the two protected
    /// values. When this passes, any realization of either value yields the
    /// same outcome rate, so the audit contrast is unambiguous.
    pub fn assumption_consistency(
        &self,
        value_a: &str,
        value_b: &str,
    ) -> Result<ConsistencyReport, AuditError> {
        let mut set = self.alignment.preimage_interventions(&Intervention::from_pairs([(
            self.protected.as_str(),
            value_a,
        )]))?;
        set.extend(self.alignment.preimage_interventions(&Intervention::from_pairs([(
            self.protected.as_str(),
            value_b,
        )]))?);
        Ok(self
            .alignment
            .check_exact_consistency(&InterventionSet::Explicit(set))?)
    }
}

/// A perceived group membership: the full signal distribution plus its
/// mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RaceCall {
    pub distribution: Distribution,
    pub value: String,
    pub probability: Rational,
    pub tied: bool,
}

// ── Validity check ──────────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuditVerdict {
    /// The audit contrast measures the race effect: both resumes signal a
    /// definite group and every realization of either group agrees.
    Valid,
    /// The realization-independence assumption fails; the audit contrast
    /// need not equal the race effect.
    Invalid,
    /// The populations or signals needed for a verdict do not exist.
    Undetermined,
}

impl AuditVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            AuditVerdict::Valid => "valid",
            AuditVerdict::Invalid => "invalid",
            AuditVerdict::Undetermined => "undetermined",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditValidityReport {
    pub resume_a: Assignment,
    pub resume_b: Assignment,
    pub mass_a: Rational,
    pub mass_b: Rational,
    pub race_a: Option<RaceCall>,
    pub race_b: Option<RaceCall>,
    /// Positive-outcome rate when every kept variable is forced to the
    /// corresponding resume.
    pub rate_a: Rational,
    pub rate_b: Rational,
    /// `rate_a / rate_b`; absent when the second rate is zero.
    pub ratio: Option<Rational>,
    pub audit_effect: Rational,
    /// Aggregated effect of intervening on the protected attribute itself;
    /// absent when the resumes do not signal two distinct groups.
    pub race_effect: Option<Rational>,
    /// Audit effect minus race effect.
    pub deviation: Option<Rational>,
    /// Exact consistency over the realizations of the two signaled groups.
    pub consistency: Option<ConsistencyReport>,
    pub verdict: AuditVerdict,
    /// Human-readable grounds for a non-valid verdict.
    pub reasons: Vec<String>,
}

/// Runs the whole validity analysis for one audit pair: population checks,
/// group signals, the realization-independence assumption, and the
/// comparison of the audit contrast against the aggregated race effect.
pub fn audit_validity_check(
    population: &PopulationModel,
    projection: &ResumeProjection,
    construction: &SocialConstruction,
    resume_a: &Assignment,
    resume_b: &Assignment,
    aggregator: &Aggregator,
) -> Result<AuditValidityReport, AuditError> {
    if construction.alignment.low().as_ref() != population.model.as_ref() {
        return Err(AuditError::PopulationMismatch);
    }
    let population_a = population.population_for_resume(projection, resume_a)?;
    let population_b = population.population_for_resume(projection, resume_b)?;
    let race_a = construction.assign_race(projection, resume_a)?;
    let race_b = construction.assign_race(projection, resume_b)?;
    let rate_a = population.outcome_rate(&assignment_intervention(resume_a))?;
    let rate_b = population.outcome_rate(&assignment_intervention(resume_b))?;
    let ratio = (!rate_b.is_zero()).then(|| &rate_a / &rate_b);
    let audit_effect = &rate_a - &rate_b;

    let mut reasons = Vec::new();
    if population_a.distribution.is_none() {
        reasons.push("the first resume selects an empty population".to_string());
    }
    if population_b.distribution.is_none() {
        reasons.push("the second resume selects an empty population".to_string());
    }
    for (call, which) in [(&race_a, "first"), (&race_b, "second")] {
        if let Some(call) = call {
            if call.tied {
                reasons.push(format!(
                    "the {which} resume signals no single group; `{}` is only tied for most likely",
                    call.value
                ));
            }
        }
    }
    let signals = match (&race_a, &race_b) {
        (Some(a), Some(b)) if !a.tied && !b.tied => {
            if a.value == b.value {
                reasons.push(format!(
                    "both resumes signal the same group `{}`",
                    a.value
                ));
                None
            } else {
                Some((a.value.clone(), b.value.clone()))
            }
        }
        _ => None,
    };

    let Some((value_a, value_b)) = signals else {
        return Ok(AuditValidityReport {
            resume_a: resume_a.clone(),
            resume_b: resume_b.clone(),
            mass_a: population_a.mass,
            mass_b: population_b.mass,
            race_a,
            race_b,
            rate_a,
            rate_b,
            ratio,
            audit_effect,
            race_effect: None,
            deviation: None,
            consistency: None,
            verdict: AuditVerdict::Undetermined,
            reasons,
        });
    };

    let consistency = construction.assumption_consistency(&value_a, &value_b)?;
    let race_effect = construction.race_effect(&value_a, &value_b, aggregator)?;
    let deviation = &audit_effect - &race_effect;
    let verdict = if consistency.pass {
        AuditVerdict::Valid
    } else {
        for entry in consistency.entries.iter().filter(|e| !e.pass) {
            reasons.push(format!(
                "realization {} disagrees with the group-level model",
                entry.low
            ));
        }
        AuditVerdict::Invalid
    };
    Ok(AuditValidityReport {
        resume_a: resume_a.clone(),
        resume_b: resume_b.clone(),
        mass_a: population_a.mass,
        mass_b: population_b.mass,
        race_a,
        race_b,
        rate_a,
        rate_b,
        ratio,
        audit_effect,
        race_effect: Some(race_effect),
        deviation: Some(deviation),
        consistency: Some(consistency),
        verdict,
        reasons,
    })
}

// ── Tests ───────────────────────────────────────────────────────────────────
