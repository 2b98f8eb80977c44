//! Alignments between a fine-grained and a coarse-grained model, and the
//! consistency analyses built on them.
//!
//! An [`Alignment`] partitions the low model's endogenous variables into
//! disjoint clusters, one per mapped high variable, plus a set of dropped
//! variables. Each cluster carries a total, surjective map from joint low
//! values onto the high variable's domain. Distributions push forward
//! through the value maps; low interventions on complete clusters induce
//! high interventions; high interventions pull back to the ordered list of
//! complete-cluster low interventions realizing them.
//!
//! Consistency compares, for each intervention in a designated set, the
//! pushed low interventional distribution against the high model's own
//! interventional distribution. The exact check demands table equality;
//! the approximate checks bound total variation distance or compare
//! per-preimage effects against their average.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_traits::Zero;

use crate::distribution::Distribution;
use crate::rational::Rational;
use crate::scm::{Intervention, QueryError, Scm};
use crate::util::ProductIter;

// ── Specifications ──────────────────────────────────────────────────────────

/// Declaration of one cluster: the low variables constituting a high
/// variable, with the map from joint low values to high values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterSpec {
    pub high_var: String,
    /// Low endogenous variables in value-map key order.
    pub low_vars: Vec<String>,
    pub value_map: Vec<(Vec<String>, String)>,
}

/// Declaration handed to [`Alignment::build`]: clusters plus the low
/// variables deliberately excluded from the high description.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AlignmentSpec {
    pub clusters: Vec<ClusterSpec>,
    pub dropped: Vec<String>,
}

// ── Errors ──────────────────────────────────────────────────────────────────

/// Validation failure while building an alignment. [`Alignment::build`]
/// reports every failure it finds.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlignmentError {
    #[error("cluster for `{high_var}` names unknown low variable `{variable}`")]
    UnknownLowVariable { high_var: String, variable: String },
    #[error("`{variable}` is not an endogenous variable of the high model")]
    UnknownHighVariable { variable: String },
    #[error("high variable `{variable}` has more than one cluster")]
    DuplicateHighVariable { variable: String },
    #[error("low variable `{variable}` appears in more than one cluster")]
    OverlappingClusters { variable: String },
    #[error("low variable `{variable}` is both clustered and dropped")]
    DroppedAndClustered { variable: String },
    #[error("dropped name `{variable}` is not an endogenous low variable")]
    UnknownDropped { variable: String },
    #[error("low variable `{variable}` is neither clustered nor dropped")]
    UncoveredLowVariable { variable: String },
    #[error("value map for `{high_var}` has a row with {got} values; its {expected} cluster variables require {expected}")]
    ValueMapArity {
        high_var: String,
        expected: usize,
        got: usize,
    },
    #[error("value map for `{high_var}` repeats the row ({})", .key.join(", "))]
    DuplicateMapRow { high_var: String, key: Vec<String> },
    #[error("value map for `{high_var}` uses `{value}`, which is not in the domain of `{variable}`")]
    UnknownMapValue {
        high_var: String,
        variable: String,
        value: String,
    },
    #[error("value map for `{high_var}` produces `{value}`, which is not in its high domain")]
    DomainMismatch { high_var: String, value: String },
    #[error("value map for `{high_var}` is missing the row ({})", .key.join(", "))]
    NonTotalValueMap { high_var: String, key: Vec<String> },
    #[error("value map for `{high_var}` never produces high value `{value}`")]
    NonSurjectiveValueMap { high_var: String, value: String },
}

/// Failure while running an analysis over a validated alignment.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalysisError {
    #[error("{iv} has no defined high-level counterpart: {reason}")]
    UndefinedInducedIntervention { iv: Intervention, reason: String },
    #[error("high variable `{variable}` is not mapped by the alignment")]
    UnmappedHighVariable { variable: String },
    #[error("{iv} has no complete-cluster preimage interventions")]
    EmptyPreimage { iv: Intervention },
    #[error("model mismatch: {detail}")]
    ModelMismatch { detail: String },
    #[error("population weighting is undefined: {detail}")]
    EmptyAggregateSupport { detail: String },
    #[error(transparent)]
    Query(#[from] QueryError),
}

// ── Clusters ────────────────────────────────────────────────────────────────

/// Validated cluster: ordered low variables plus a total surjective map
/// from their joint values onto the high domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    low_vars: Vec<String>,
    value_map: BTreeMap<Vec<String>, String>,
}

impl Cluster {
    pub fn low_vars(&self) -> &[String] {
        &self.low_vars
    }

    pub fn value_map(&self) -> &BTreeMap<Vec<String>, String> {
        &self.value_map
    }

    /// High values produced by this cluster, in sorted order.
    pub fn image(&self) -> BTreeSet<&str> {
        self.value_map.values().map(String::as_str).collect()
    }
}

// ── Alignment ───────────────────────────────────────────────────────────────

/// A validated abstraction relation from a low model to a high model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    low: Arc<Scm>,
    high: Arc<Scm>,
    clusters: BTreeMap<String, Cluster>,
    dropped: BTreeSet<String>,
}

/// Checks a specification against the low model alone: cluster disjointness,
/// coverage, and total value maps. High-model checks happen separately so
/// the quotient construction can reuse this half before a high model exists.
pub(crate) fn validate_spec_against_low(
    low: &Scm,
    spec: &AlignmentSpec,
) -> Result<(BTreeMap<String, Cluster>, BTreeSet<String>), Vec<AlignmentError>> {
    let mut errors = Vec::new();
    let mut clusters = BTreeMap::new();
    let mut clustered: BTreeMap<&str, &str> = BTreeMap::new();

    for cluster in &spec.clusters {
        if clusters.contains_key(&cluster.high_var) {
            errors.push(AlignmentError::DuplicateHighVariable {
                variable: cluster.high_var.clone(),
            });
            continue;
        }
        let mut ok = true;
        for var in &cluster.low_vars {
            if !low.is_endogenous(var) {
                errors.push(AlignmentError::UnknownLowVariable {
                    high_var: cluster.high_var.clone(),
                    variable: var.clone(),
                });
                ok = false;
                continue;
            }
            if clustered.insert(var, &cluster.high_var).is_some() {
                errors.push(AlignmentError::OverlappingClusters {
                    variable: var.clone(),
                });
                ok = false;
            }
        }
        if !ok {
            continue;
        }

        let domains: Vec<&[String]> = cluster
            .low_vars
            .iter()
            .map(|v| low.domain(v).expect("checked endogenous"))
            .collect();
        let mut value_map = BTreeMap::new();
        for (key, value) in &cluster.value_map {
            if key.len() != cluster.low_vars.len() {
                errors.push(AlignmentError::ValueMapArity {
                    high_var: cluster.high_var.clone(),
                    expected: cluster.low_vars.len(),
                    got: key.len(),
                });
                ok = false;
                continue;
            }
            let mut row_ok = true;
            for (pos, cell) in key.iter().enumerate() {
                if !domains[pos].contains(cell) {
                    errors.push(AlignmentError::UnknownMapValue {
                        high_var: cluster.high_var.clone(),
                        variable: cluster.low_vars[pos].clone(),
                        value: cell.clone(),
                    });
                    row_ok = false;
                }
            }
            if !row_ok {
                ok = false;
                continue;
            }
            if value_map.insert(key.clone(), value.clone()).is_some() {
                errors.push(AlignmentError::DuplicateMapRow {
                    high_var: cluster.high_var.clone(),
                    key: key.clone(),
                });
                ok = false;
            }
        }
        if ok {
            let sizes: Vec<usize> = domains.iter().map(|d| d.len()).collect();
            if (value_map.len() as u128) < ProductIter::count_tuples(&sizes) {
                let missing = ProductIter::new(sizes)
                    .map(|idx| {
                        idx.iter()
                            .enumerate()
                            .map(|(pos, &i)| domains[pos][i].clone())
                            .collect::<Vec<String>>()
                    })
                    .find(|key| !value_map.contains_key(key))
                    .expect("fewer rows than combinations");
                errors.push(AlignmentError::NonTotalValueMap {
                    high_var: cluster.high_var.clone(),
                    key: missing,
                });
                ok = false;
            }
        }
        if ok {
            clusters.insert(
                cluster.high_var.clone(),
                Cluster {
                    low_vars: cluster.low_vars.clone(),
                    value_map,
                },
            );
        }
    }

    let mut dropped = BTreeSet::new();
    for var in &spec.dropped {
        if !low.is_endogenous(var) {
            errors.push(AlignmentError::UnknownDropped {
                variable: var.clone(),
            });
            continue;
        }
        if clustered.contains_key(var.as_str()) {
            errors.push(AlignmentError::DroppedAndClustered {
                variable: var.clone(),
            });
            continue;
        }
        dropped.insert(var.clone());
    }

    for var in low.endogenous_names() {
        if !clustered.contains_key(var) && !dropped.contains(var) {
            errors.push(AlignmentError::UncoveredLowVariable {
                variable: var.to_string(),
            });
        }
    }

    if errors.is_empty() {
        Ok((clusters, dropped))
    } else {
        Err(errors)
    }
}

impl Alignment {
    /// Validates a specification against both models and builds the
    /// alignment, reporting the full list of failures when invalid.
    pub fn build(
        low: Arc<Scm>,
        high: Arc<Scm>,
        spec: &AlignmentSpec,
    ) -> Result<Alignment, Vec<AlignmentError>> {
        let (clusters, dropped) = validate_spec_against_low(&low, spec)?;

        let mut errors = Vec::new();
        for (high_var, cluster) in &clusters {
            let Some(domain) = high.domain(high_var).filter(|_| high.is_endogenous(high_var))
            else {
                errors.push(AlignmentError::UnknownHighVariable {
                    variable: high_var.clone(),
                });
                continue;
            };
            let image = cluster.image();
            for value in &image {
                if !domain.iter().any(|v| v == value) {
                    errors.push(AlignmentError::DomainMismatch {
                        high_var: high_var.clone(),
                        value: value.to_string(),
                    });
                }
            }
            for value in domain {
                if !image.contains(value.as_str()) {
                    errors.push(AlignmentError::NonSurjectiveValueMap {
                        high_var: high_var.clone(),
                        value: value.clone(),
                    });
                }
            }
        }

        if errors.is_empty() {
            Ok(Alignment {
                low,
                high,
                clusters,
                dropped,
            })
        } else {
            Err(errors)
        }
    }

    // ── Structure queries ──────────────────────────────────────────────

    pub fn low(&self) -> &Arc<Scm> {
        &self.low
    }

    pub fn high(&self) -> &Arc<Scm> {
        &self.high
    }

    /// Mapped high variables in sorted order.
    pub fn mapped_high_vars(&self) -> Vec<String> {
        self.clusters.keys().cloned().collect()
    }

    pub fn cluster(&self, high_var: &str) -> Option<&Cluster> {
        self.clusters.get(high_var)
    }

    pub fn clusters(&self) -> &BTreeMap<String, Cluster> {
        &self.clusters
    }

    pub fn dropped(&self) -> &BTreeSet<String> {
        &self.dropped
    }

    /// The high variable whose cluster contains a low variable, if any.
    pub fn cluster_of_low(&self, low_var: &str) -> Option<&str> {
        self.clusters
            .iter()
            .find(|(_, c)| c.low_vars.iter().any(|v| v == low_var))
            .map(|(h, _)| h.as_str())
    }

    // ── Pushforward ────────────────────────────────────────────────────

    /// Pushes a distribution over low variables through every value map,
    /// producing a distribution over all mapped high variables. The input
    /// scope must cover every clustered low variable; other scope variables
    /// are marginalized away.
    pub fn push_distribution(&self, d: &Distribution) -> Result<Distribution, AnalysisError> {
        let vars = self.mapped_high_vars();
        push_through_clusters(&self.clusters, d, &vars)
    }

    /// Pushes onto a subset of the mapped high variables. The input scope
    /// must cover the clusters of the requested variables only.
    pub fn push_marginal(
        &self,
        d: &Distribution,
        high_vars: &[String],
    ) -> Result<Distribution, AnalysisError> {
        for var in high_vars {
            if !self.clusters.contains_key(var) {
                return Err(AnalysisError::UnmappedHighVariable {
                    variable: var.clone(),
                });
            }
        }
        let mut sorted: Vec<String> = high_vars.to_vec();
        sorted.sort();
        sorted.dedup();
        push_through_clusters(&self.clusters, d, &sorted)
    }

    // ── Intervention translation ───────────────────────────────────────

    /// High intervention induced by a low intervention, when defined. A low
    /// intervention induces `do(H=v)` for every cluster it assigns
    /// completely; it is undefined when it assigns a strict nonempty subset
    /// of some cluster or touches a dropped variable, because no high
    /// intervention captures it.
    pub fn induced_high_intervention(
        &self,
        iv: &Intervention,
    ) -> Result<InducedIntervention, AnalysisError> {
        self.low.check_intervention(iv).map_err(AnalysisError::Query)?;
        for (var, _) in iv.iter() {
            if self.dropped.contains(var) {
                return Ok(InducedIntervention::Undefined {
                    reason: format!("it assigns dropped variable `{var}`"),
                });
            }
        }
        let mut pairs = Vec::new();
        for (high_var, cluster) in &self.clusters {
            let assigned = cluster
                .low_vars
                .iter()
                .filter(|v| iv.get(v).is_some())
                .count();
            if assigned == 0 {
                continue;
            }
            if assigned < cluster.low_vars.len() {
                return Ok(InducedIntervention::Undefined {
                    reason: format!(
                        "it assigns only part of the cluster for `{high_var}`"
                    ),
                });
            }
            let key: Vec<String> = cluster
                .low_vars
                .iter()
                .map(|v| iv.get(v).expect("assigned").to_string())
                .collect();
            let value = cluster.value_map.get(&key).expect("total value map");
            pairs.push((high_var.clone(), value.clone()));
        }
        Ok(InducedIntervention::Defined(
            pairs.into_iter().collect(),
        ))
    }

    /// All complete-cluster low interventions whose induced high
    /// intervention equals `iv_high`, in lexicographic order. The high
    /// intervention must assign mapped high variables only.
    pub fn preimage_interventions(
        &self,
        iv_high: &Intervention,
    ) -> Result<Vec<Intervention>, AnalysisError> {
        for (var, value) in iv_high.iter() {
            let Some(cluster) = self.clusters.get(var) else {
                return Err(AnalysisError::UnmappedHighVariable {
                    variable: var.to_string(),
                });
            };
            if !cluster.image().contains(value) {
                return Err(AnalysisError::Query(QueryError::UnknownValue {
                    variable: var.to_string(),
                    value: value.to_string(),
                }));
            }
        }
        let preimages = preimages_through_clusters(&self.clusters, iv_high);
        if preimages.is_empty() {
            return Err(AnalysisError::EmptyPreimage {
                iv: iv_high.clone(),
            });
        }
        Ok(preimages)
    }

    // ── Consistency ────────────────────────────────────────────────────

    /// Exact consistency: for every intervention in the set, the pushed low
    /// interventional distribution must equal the high interventional
    /// distribution over the mapped high variables, as identical tables.
    pub fn check_exact_consistency(
        &self,
        set: &InterventionSet,
    ) -> Result<ConsistencyReport, AnalysisError> {
        let entries = self.consistency_entries(set, |distance| distance.is_zero())?;
        Ok(finish_report(ConsistencyMode::Exact, entries))
    }

    /// Approximate consistency by worst-case total variation distance,
    /// judged against a caller-supplied threshold.
    pub fn approx_consistency_tv(
        &self,
        set: &InterventionSet,
        threshold: &Rational,
    ) -> Result<ConsistencyReport, AnalysisError> {
        let entries = self.consistency_entries(set, |distance| distance <= threshold)?;
        Ok(finish_report(
            ConsistencyMode::TotalVariation {
                threshold: threshold.clone(),
            },
            entries,
        ))
    }

    fn consistency_entries(
        &self,
        set: &InterventionSet,
        passes: impl Fn(&Rational) -> bool,
    ) -> Result<Vec<ConsistencyEntry>, AnalysisError> {
        let mapped = self.mapped_high_vars();
        let mut entries = Vec::new();
        for iv in set.expand(self)? {
            let induced = match self.induced_high_intervention(&iv)? {
                InducedIntervention::Defined(induced) => induced,
                InducedIntervention::Undefined { reason } => {
                    return Err(AnalysisError::UndefinedInducedIntervention { iv, reason });
                }
            };
            let low_dist = self.low.interventional_distribution(&iv)?;
            let pushed_low = self.push_distribution(&low_dist)?;
            let high = self
                .high
                .interventional_distribution(&induced)?
                .marginal(&mapped)?;
            let distance = pushed_low.tv_distance(&high)?;
            let pass = passes(&distance);
            entries.push(ConsistencyEntry {
                low: iv,
                induced,
                pushed_low,
                high,
                distance,
                pass,
            });
        }
        Ok(entries)
    }

    /// Approximate consistency in the averaged-effects sense: for every
    /// contrast between two values of a mapped high variable, the individual
    /// preimage-level effects on the outcome must mostly sit close to their
    /// average. `tolerance` bounds the distance from the average and
    /// `fraction` says how many effects must respect it.
    pub fn approx_consistency_average_effects(
        &self,
        outcome: &str,
        value: &str,
        tolerance: &Rational,
        fraction: &Rational,
    ) -> Result<AverageEffectsReport, AnalysisError> {
        let Some(outcome_cluster) = self.clusters.get(outcome) else {
            return Err(AnalysisError::UnmappedHighVariable {
                variable: outcome.to_string(),
            });
        };
        if !outcome_cluster.image().contains(value) {
            return Err(AnalysisError::Query(QueryError::UnknownValue {
                variable: outcome.to_string(),
                value: value.to_string(),
            }));
        }

        let outcome_scope = vec![outcome.to_string()];
        let target: BTreeMap<String, String> =
            [(outcome.to_string(), value.to_string())].into();
        let mut contrasts = Vec::new();
        for (high_var, cluster) in &self.clusters {
            if high_var == outcome {
                continue;
            }
            let image: Vec<&str> = cluster.image().into_iter().collect();
            for (i, from_value) in image.iter().enumerate() {
                for to_value in &image[i + 1..] {
                    let side = |v: &str| -> Result<Vec<(Intervention, Rational)>, AnalysisError> {
                        let iv = Intervention::from_pairs([(high_var.as_str(), v)]);
                        let preimages = self.preimage_interventions(&iv)?;
                        preimages
                            .into_iter()
                            .map(|p| {
                                let dist = self.low.interventional_distribution(&p)?;
                                let pushed = self.push_marginal(&dist, &outcome_scope)?;
                                let prob = pushed.probability(&target)?;
                                Ok((p, prob))
                            })
                            .collect()
                    };
                    let from_side = side(from_value)?;
                    let to_side = side(to_value)?;

                    let mut effects = Vec::new();
                    for (from_iv, from_prob) in &from_side {
                        for (to_iv, to_prob) in &to_side {
                            effects.push(IndividualEffect {
                                from: from_iv.clone(),
                                to: to_iv.clone(),
                                effect: to_prob - from_prob,
                            });
                        }
                    }
                    let count = Rational::from_integer((effects.len() as i64).into());
                    let average: Rational = effects
                        .iter()
                        .map(|e| e.effect.clone())
                        .sum::<Rational>()
                        / &count;
                    let offenders: Vec<usize> = effects
                        .iter()
                        .enumerate()
                        .filter(|(_, e)| {
                            use num_traits::Signed;
                            (&e.effect - &average).abs() > *tolerance
                        })
                        .map(|(i, _)| i)
                        .collect();
                    let within = effects.len() - offenders.len();
                    let within_fraction =
                        Rational::from_integer((within as i64).into()) / &count;
                    let pass = within_fraction >= *fraction;
                    contrasts.push(EffectContrast {
                        variable: high_var.clone(),
                        from_value: from_value.to_string(),
                        to_value: to_value.to_string(),
                        effects,
                        average,
                        offenders,
                        within_fraction,
                        pass,
                    });
                }
            }
        }
        let pass = contrasts.iter().all(|c| c.pass);
        Ok(AverageEffectsReport {
            outcome: outcome.to_string(),
            value: value.to_string(),
            tolerance: tolerance.clone(),
            fraction: fraction.clone(),
            contrasts,
            pass,
        })
    }

    // ── Ambiguity ──────────────────────────────────────────────────────

    /// How much the choice of low realization matters: per-preimage outcome
    /// probabilities for one high intervention, their min, max, and spread,
    /// and the aggregated value under the chosen aggregator.
    pub fn ambiguity_report(
        &self,
        iv_high: &Intervention,
        outcome: &str,
        value: &str,
        agg: &Aggregator,
    ) -> Result<AmbiguityReport, AnalysisError> {
        let Some(outcome_cluster) = self.clusters.get(outcome) else {
            return Err(AnalysisError::UnmappedHighVariable {
                variable: outcome.to_string(),
            });
        };
        if !outcome_cluster.image().contains(value) {
            return Err(AnalysisError::Query(QueryError::UnknownValue {
                variable: outcome.to_string(),
                value: value.to_string(),
            }));
        }
        let preimages = self.preimage_interventions(iv_high)?;
        let outcome_scope = vec![outcome.to_string()];
        let target: BTreeMap<String, String> = [(outcome.to_string(), value.to_string())].into();
        let mut values = Vec::new();
        for p in preimages {
            let dist = self.low.interventional_distribution(&p)?;
            let pushed = self.push_marginal(&dist, &outcome_scope)?;
            let prob = pushed.probability(&target)?;
            values.push((p, prob));
        }
        let aggregated = agg.aggregate(&values, &self.low)?;
        let min = values.iter().map(|(_, v)| v).min().expect("nonempty").clone();
        let max = values.iter().map(|(_, v)| v).max().expect("nonempty").clone();
        let entries: Vec<AmbiguityEntry> = values
            .into_iter()
            .enumerate()
            .map(|(i, (low, probability))| AmbiguityEntry {
                low,
                probability,
                weight: aggregated
                    .population_weights
                    .as_ref()
                    .map(|w| w[i].clone()),
            })
            .collect();
        Ok(AmbiguityReport {
            intervention: iv_high.clone(),
            outcome: outcome.to_string(),
            value: value.to_string(),
            spread: &max - &min,
            min,
            max,
            aggregated: aggregated.value,
            aggregator: agg.kind,
            entries,
        })
    }
}

/// Result of translating a low intervention upward: either a concrete high
/// intervention or an explanation of why none captures it. Undefined is a
/// value, not an error, so callers can branch on it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InducedIntervention {
    Defined(Intervention),
    Undefined { reason: String },
}

impl InducedIntervention {
    pub fn defined(self) -> Option<Intervention> {
        match self {
            InducedIntervention::Defined(iv) => Some(iv),
            InducedIntervention::Undefined { .. } => None,
        }
    }

    pub fn is_defined(&self) -> bool {
        matches!(self, InducedIntervention::Defined(_))
    }
}

// ── Cluster-level helpers (shared with the quotient construction) ──────────

/// Pushes a distribution through value maps onto the requested high
/// variables. `high_vars` must be sorted, deduplicated, and mapped.
pub(crate) fn push_through_clusters(
    clusters: &BTreeMap<String, Cluster>,
    d: &Distribution,
    high_vars: &[String],
) -> Result<Distribution, AnalysisError> {
    let mut positions: Vec<(usize, Vec<usize>)> = Vec::new();
    for var in high_vars {
        let cluster = &clusters[var];
        let mut cluster_positions = Vec::new();
        for low_var in &cluster.low_vars {
            let Some(pos) = d.scope().iter().position(|v| v == low_var) else {
                return Err(AnalysisError::Query(QueryError::ScopeMismatch {
                    detail: format!(
                        "distribution scope ({}) does not cover clustered variable `{low_var}`",
                        d.scope().join(", ")
                    ),
                }));
            };
            cluster_positions.push(pos);
        }
        let index = high_vars.iter().position(|v| v == var).expect("requested");
        positions.push((index, cluster_positions));
    }

    let mut entries: Vec<(Vec<String>, Rational)> = Vec::new();
    for (key, weight) in d.entries() {
        let mut high_key = vec![String::new(); high_vars.len()];
        for (index, cluster_positions) in &positions {
            let cluster = &clusters[&high_vars[*index]];
            let low_key: Vec<String> = cluster_positions
                .iter()
                .map(|&pos| key[pos].clone())
                .collect();
            let Some(value) = cluster.value_map.get(&low_key) else {
                return Err(AnalysisError::Query(QueryError::UnknownValue {
                    variable: cluster.low_vars[0].clone(),
                    value: low_key[0].clone(),
                }));
            };
            high_key[*index] = value.clone();
        }
        entries.push((high_key, weight.clone()));
    }
    Distribution::new(high_vars.to_vec(), entries).map_err(AnalysisError::Query)
}

/// Complete-cluster low interventions realizing a high intervention, in
/// lexicographic order. Assumes the high variables are mapped and the
/// values lie in the cluster images.
pub(crate) fn preimages_through_clusters(
    clusters: &BTreeMap<String, Cluster>,
    iv_high: &Intervention,
) -> Vec<Intervention> {
    let mut result = vec![Intervention::empty()];
    for (var, value) in iv_high.iter() {
        let cluster = &clusters[var];
        let rows: Vec<Intervention> = cluster
            .value_map
            .iter()
            .filter(|(_, v)| v.as_str() == value)
            .map(|(key, _)| {
                cluster
                    .low_vars
                    .iter()
                    .cloned()
                    .zip(key.iter().cloned())
                    .collect()
            })
            .collect();
        let mut extended = Vec::with_capacity(result.len() * rows.len());
        for base in &result {
            for row in &rows {
                extended.push(base.merged(row));
            }
        }
        result = extended;
    }
    result.sort();
    result
}

// ── Intervention sets ───────────────────────────────────────────────────────

/// The family of interventions a consistency check quantifies over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InterventionSet {
    /// Every joint setting of every single cluster, plus the empty
    /// intervention. This is the default family for consistency checks.
    AllCompleteClusters,
    /// An explicit list of low interventions.
    Explicit(Vec<Intervention>),
}

impl InterventionSet {
    /// Expands to a sorted, deduplicated list of low interventions.
    pub fn expand(&self, alignment: &Alignment) -> Result<Vec<Intervention>, AnalysisError> {
        let mut out: BTreeSet<Intervention> = BTreeSet::new();
        match self {
            InterventionSet::AllCompleteClusters => {
                out.insert(Intervention::empty());
                for cluster in alignment.clusters.values() {
                    let domains: Vec<&[String]> = cluster
                        .low_vars
                        .iter()
                        .map(|v| alignment.low.domain(v).expect("validated cluster"))
                        .collect();
                    let sizes: Vec<usize> = domains.iter().map(|d| d.len()).collect();
                    for idx in ProductIter::new(sizes) {
                        let iv: Intervention = cluster
                            .low_vars
                            .iter()
                            .cloned()
                            .zip(idx.iter().enumerate().map(|(pos, &i)| domains[pos][i].clone()))
                            .collect();
                        out.insert(iv);
                    }
                }
            }
            InterventionSet::Explicit(list) => {
                for iv in list {
                    alignment
                        .low
                        .check_intervention(iv)
                        .map_err(AnalysisError::Query)?;
                    out.insert(iv.clone());
                }
            }
        }
        Ok(out.into_iter().collect())
    }
}

// ── Consistency reports ─────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConsistencyMode {
    Exact,
    TotalVariation { threshold: Rational },
}

/// One compared intervention: the low intervention, its induced high
/// intervention, both distributions, and their exact distance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsistencyEntry {
    pub low: Intervention,
    pub induced: Intervention,
    pub pushed_low: Distribution,
    pub high: Distribution,
    pub distance: Rational,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsistencyReport {
    pub mode: ConsistencyMode,
    /// Entries in lexicographic order of the low intervention.
    pub entries: Vec<ConsistencyEntry>,
    /// Worst-case total variation distance across entries.
    pub max_distance: Rational,
    pub pass: bool,
}

fn finish_report(mode: ConsistencyMode, entries: Vec<ConsistencyEntry>) -> ConsistencyReport {
    let max_distance = entries
        .iter()
        .map(|e| e.distance.clone())
        .max()
        .unwrap_or_else(Rational::zero);
    let pass = entries.iter().all(|e| e.pass);
    ConsistencyReport {
        mode,
        entries,
        max_distance,
        pass,
    }
}

// ── Aggregators ─────────────────────────────────────────────────────────────

/// How per-preimage quantities collapse to a single number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggregatorKind {
    /// Mean weighted by the low observational probability of each
    /// preimage's assigned values, renormalized over the preimage list.
    PopulationWeightedMean,
    UniformMean,
    Min,
    Max,
}

impl AggregatorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            AggregatorKind::PopulationWeightedMean => "mean",
            AggregatorKind::UniformMean => "uniform",
            AggregatorKind::Min => "min",
            AggregatorKind::Max => "max",
        }
    }

    pub fn parse(text: &str) -> Option<AggregatorKind> {
        match text {
            "mean" | "population_weighted_mean" => Some(AggregatorKind::PopulationWeightedMean),
            "uniform" | "uniform_mean" => Some(AggregatorKind::UniformMean),
            "min" => Some(AggregatorKind::Min),
            "max" => Some(AggregatorKind::Max),
            _ => None,
        }
    }
}

/// An aggregation rule, optionally carrying an explicit reference
/// distribution for population weighting. Without one, the low model's
/// observational distribution is used.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Aggregator {
    pub kind: AggregatorKind,
    pub reference: Option<Distribution>,
}

impl Default for Aggregator {
    fn default() -> Self {
        Aggregator::new(AggregatorKind::PopulationWeightedMean)
    }
}

/// An aggregated value plus the renormalized population weights that were
/// (or would have been) used, when they exist.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Aggregated {
    pub value: Rational,
    pub population_weights: Option<Vec<Rational>>,
}

impl Aggregator {
    pub fn new(kind: AggregatorKind) -> Self {
        Aggregator {
            kind,
            reference: None,
        }
    }

    pub fn with_reference(kind: AggregatorKind, reference: Distribution) -> Self {
        Aggregator {
            kind,
            reference: Some(reference),
        }
    }

    /// Collapses intervention-tagged values. The population weight of an
    /// intervention is the reference probability of the event it forces.
    pub fn aggregate(
        &self,
        values: &[(Intervention, Rational)],
        low: &Scm,
    ) -> Result<Aggregated, AnalysisError> {
        if values.is_empty() {
            return Err(AnalysisError::EmptyPreimage {
                iv: Intervention::empty(),
            });
        }
        let reference = match &self.reference {
            Some(d) => d.clone(),
            None => low.observational_distribution().map_err(AnalysisError::Query)?,
        };
        let raw: Vec<Rational> = values
            .iter()
            .map(|(iv, _)| {
                let partial: BTreeMap<String, String> = iv
                    .iter()
                    .map(|(k, v)| (k.to_string(), v.to_string()))
                    .collect();
                reference.probability(&partial).map_err(AnalysisError::Query)
            })
            .collect::<Result<_, _>>()?;
        let total: Rational = raw.iter().cloned().sum();
        let population_weights = if total.is_zero() {
            None
        } else {
            Some(raw.iter().map(|w| w / &total).collect::<Vec<_>>())
        };

        let value = match self.kind {
            AggregatorKind::PopulationWeightedMean => {
                let Some(weights) = &population_weights else {
                    return Err(AnalysisError::EmptyAggregateSupport {
                        detail: "every aggregated preimage has zero reference probability"
                            .to_string(),
                    });
                };
                values
                    .iter()
                    .zip(weights)
                    .map(|((_, v), w)| v * w)
                    .sum()
            }
            AggregatorKind::UniformMean => {
                let n = Rational::from_integer((values.len() as i64).into());
                values.iter().map(|(_, v)| v.clone()).sum::<Rational>() / n
            }
            AggregatorKind::Min => values.iter().map(|(_, v)| v).min().expect("nonempty").clone(),
            AggregatorKind::Max => values.iter().map(|(_, v)| v).max().expect("nonempty").clone(),
        };
        Ok(Aggregated {
            value,
            population_weights,
        })
    }
}

// ── Averaged-effects report ─────────────────────────────────────────────────

/// One preimage-level effect: outcome probability under `to` minus under
/// `from`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndividualEffect {
    pub from: Intervention,
    pub to: Intervention,
    pub effect: Rational,
}

/// One high-value contrast with its individual effects and their average.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EffectContrast {
    pub variable: String,
    pub from_value: String,
    pub to_value: String,
    pub effects: Vec<IndividualEffect>,
    pub average: Rational,
    /// Indices into `effects` that stray beyond the tolerance.
    pub offenders: Vec<usize>,
    pub within_fraction: Rational,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AverageEffectsReport {
    pub outcome: String,
    pub value: String,
    pub tolerance: Rational,
    pub fraction: Rational,
    pub contrasts: Vec<EffectContrast>,
    pub pass: bool,
}

// ── Ambiguity report ────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmbiguityEntry {
    pub low: Intervention,
    pub probability: Rational,
    /// Renormalized population weight of this preimage, when defined.
    pub weight: Option<Rational>,
}

/// Per-preimage outcome probabilities for one high intervention.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmbiguityReport {
    pub intervention: Intervention,
    pub outcome: String,
    pub value: String,
    pub entries: Vec<AmbiguityEntry>,
    pub min: Rational,
    pub max: Rational,
    pub spread: Rational,
    pub aggregated: Rational,
    pub aggregator: AggregatorKind,
}

// ── Composition ─────────────────────────────────────────────────────────────

/// Composes two alignments into one from the lowest to the highest model.
/// The first alignment's high model must equal the second's low model, and
/// every mid-level variable clustered by the second must be mapped by the
/// first.
pub fn compose_alignments(
    first: &Alignment,
    second: &Alignment,
) -> Result<Alignment, AnalysisError> {
    if first.high.as_ref() != second.low.as_ref() {
        return Err(AnalysisError::ModelMismatch {
            detail: "the first alignment's high model differs from the second's low model"
                .to_string(),
        });
    }

    let mut clusters = Vec::new();
    for (top_var, mid_cluster) in &second.clusters {
        let mut low_vars = Vec::new();
        let mut segments: Vec<&Cluster> = Vec::new();
        for mid_var in &mid_cluster.low_vars {
            let Some(base) = first.clusters.get(mid_var) else {
                return Err(AnalysisError::ModelMismatch {
                    detail: format!(
                        "`{mid_var}` is clustered by the second alignment but not mapped by the first"
                    ),
                });
            };
            low_vars.extend(base.low_vars.iter().cloned());
            segments.push(base);
        }

        // Rows of the composed map: the product of the per-segment rows,
        // mapped through the second value map.
        let mut rows: Vec<(Vec<String>, Vec<String>)> = vec![(Vec::new(), Vec::new())];
        for segment in &segments {
            let mut extended = Vec::new();
            for (key, mid_value) in &segment.value_map {
                for (low_key, mid_key) in &rows {
                    let mut low_key = low_key.clone();
                    low_key.extend(key.iter().cloned());
                    let mut mid_key = mid_key.clone();
                    mid_key.push(mid_value.clone());
                    extended.push((low_key, mid_key));
                }
            }
            rows = extended;
        }
        let value_map: Vec<(Vec<String>, String)> = rows
            .into_iter()
            .map(|(low_key, mid_key)| {
                let top_value = mid_cluster
                    .value_map
                    .get(&mid_key)
                    .expect("total value map")
                    .clone();
                (low_key, top_value)
            })
            .collect();
        clusters.push(ClusterSpec {
            high_var: top_var.clone(),
            low_vars,
            value_map,
        });
    }

    let mut dropped: BTreeSet<String> = first.dropped.clone();
    for mid_var in &second.dropped {
        if let Some(base) = first.clusters.get(mid_var) {
            dropped.extend(base.low_vars.iter().cloned());
        }
    }

    let spec = AlignmentSpec {
        clusters,
        dropped: dropped.into_iter().collect(),
    };
    Alignment::build(first.low.clone(), second.high.clone(), &spec).map_err(|errors| {
        AnalysisError::ModelMismatch {
            detail: errors
                .iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join("; "),
        }
    })
}

// ── Tests ───────────────────────────────────────────────────────────────────
