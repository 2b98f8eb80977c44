//! Constructing a coarse model from a fine one and a cluster shape.
//!
//! Given a low model and an [`AlignmentSpec`] whose high side does not exist
//! yet, [`quotient_high_model`] builds the high model the shape suggests:
//! high variables are ordered by the low ancestry between their clusters,
//! each gets a conditional distribution aggregated over the low realizations
//! of its high parents, parents that never change the conditional are
//! pruned, and any remaining randomness is realized by a fresh exogenous
//! noise variable per high variable. The result carries the alignment from
//! the low model to the constructed one and an exact consistency report, so
//! the caller learns immediately whether the shape supports a faithful
//! coarse description or only a best-effort one.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::abstraction::{
    preimages_through_clusters, push_through_clusters, validate_spec_against_low, AggregatorKind,
    Alignment, AlignmentError, AlignmentSpec, AnalysisError, ConsistencyReport, InterventionSet,
};
use crate::rational::Rational;
use crate::scm::{ExogenousSpec, Intervention, ModelError, Scm, ScmSpec, VariableSpec};
use crate::util::{lexicographic_topological_order, ProductIter};

// ── Errors ──────────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QuotientError {
    #[error("invalid cluster shape: {}", .errors.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))]
    Shape { errors: Vec<AlignmentError> },
    #[error("cluster shape induces cyclic precedence: {}", .cycle.join(" -> "))]
    CyclicPrecedence { cycle: Vec<String> },
    #[error("aggregated distribution for `{variable}` under {parents} has zero total mass")]
    EmptyStageDistribution {
        variable: String,
        parents: Intervention,
    },
    #[error("constructed model failed validation: {}", .errors.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))]
    ConstructedModelInvalid { errors: Vec<ModelError> },
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

// ── Result ──────────────────────────────────────────────────────────────────

/// A constructed coarse model with its alignment and consistency verdict.
#[derive(Debug, Clone)]
pub struct QuotientResult {
    pub model: Arc<Scm>,
    pub alignment: Alignment,
    /// Exact consistency of the alignment over every complete-cluster
    /// intervention.
    pub report: ConsistencyReport,
    pub exact: bool,
    /// True when a min or max aggregated stage distribution had to be
    /// renormalized to sum to one.
    pub renormalized: bool,
    /// True when some parent setting had zero observational mass in every
    /// low realization, so population weighting fell back to a uniform mean
    /// there.
    pub weight_fallback: bool,
}

// ── Construction ────────────────────────────────────────────────────────────

pub fn quotient_high_model(
    low: Arc<Scm>,
    spec: &AlignmentSpec,
    aggregator: AggregatorKind,
) -> Result<QuotientResult, QuotientError> {
    let (clusters, _dropped) =
        validate_spec_against_low(&low, spec).map_err(|errors| QuotientError::Shape { errors })?;

    // Endogenous ancestor closure of the low model, in evaluation order.
    let mut ancestors: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for var in low.evaluation_order() {
        let mut anc: BTreeSet<&str> = BTreeSet::new();
        for parent in low.parents(var).expect("evaluation order lists endogenous") {
            if low.is_endogenous(parent) {
                anc.insert(parent.as_str());
                anc.extend(ancestors[parent.as_str()].iter().copied());
            }
        }
        ancestors.insert(var.as_str(), anc);
    }

    // One high variable precedes another when its cluster can influence the
    // other's cluster in the low model.
    let mut deps: BTreeMap<String, BTreeSet<String>> = clusters
        .keys()
        .map(|h| (h.clone(), BTreeSet::new()))
        .collect();
    for (a, cluster_a) in &clusters {
        for (b, cluster_b) in &clusters {
            if a == b {
                continue;
            }
            let influences = cluster_a.low_vars().iter().any(|av| {
                cluster_b
                    .low_vars()
                    .iter()
                    .any(|bv| ancestors[bv.as_str()].contains(av.as_str()))
            });
            if influences {
                deps.get_mut(b).expect("all high vars present").insert(a.clone());
            }
        }
    }
    let order = lexicographic_topological_order(&deps)
        .map_err(|cycle| QuotientError::CyclicPrecedence { cycle })?;

    let observational = low
        .observational_distribution()
        .map_err(AnalysisError::Query)?;

    let mut renormalized = false;
    let mut weight_fallback = false;
    let mut exogenous: Vec<ExogenousSpec> = Vec::new();
    let mut variables: Vec<VariableSpec> = Vec::new();
    let mut taken: BTreeSet<String> = clusters.keys().cloned().collect();

    for high_var in &order {
        let domain: Vec<String> = clusters[high_var]
            .image()
            .into_iter()
            .map(str::to_string)
            .collect();
        let candidates: Vec<String> = deps[high_var].iter().cloned().collect();
        let axes: Vec<Vec<String>> = candidates
            .iter()
            .map(|c| clusters[c].image().into_iter().map(str::to_string).collect())
            .collect();

        // Aggregated conditional distribution of the high variable, one row
        // per joint setting of the candidate parents.
        let mut rows: BTreeMap<Vec<String>, Vec<Rational>> = BTreeMap::new();
        for idx in ProductIter::new(axes.iter().map(Vec::len).collect()) {
            let setting: Vec<String> = idx
                .iter()
                .enumerate()
                .map(|(pos, &i)| axes[pos][i].clone())
                .collect();
            let iv_high: Intervention = candidates
                .iter()
                .cloned()
                .zip(setting.iter().cloned())
                .collect();
            let preimages = preimages_through_clusters(&clusters, &iv_high);

            let mut realization_rows: Vec<Vec<Rational>> = Vec::new();
            let mut weights: Vec<Rational> = Vec::new();
            for preimage in &preimages {
                let dist = low
                    .interventional_distribution(preimage)
                    .map_err(AnalysisError::Query)?;
                let pushed =
                    push_through_clusters(&clusters, &dist, std::slice::from_ref(high_var))?;
                let row: Vec<Rational> = domain
                    .iter()
                    .map(|value| {
                        pushed.probability(&[(high_var.clone(), value.clone())].into())
                    })
                    .collect::<Result<_, _>>()
                    .map_err(AnalysisError::Query)?;
                realization_rows.push(row);
                let event: BTreeMap<String, String> = preimage
                    .iter()
                    .map(|(k, v)| (k.to_string(), v.to_string()))
                    .collect();
                weights.push(
                    observational
                        .probability(&event)
                        .map_err(AnalysisError::Query)?,
                );
            }

            let count = realization_rows.len();
            let row: Vec<Rational> = match aggregator {
                AggregatorKind::PopulationWeightedMean => {
                    let total: Rational = weights.iter().cloned().sum();
                    let weights: Vec<Rational> = if total.is_zero() {
                        weight_fallback = true;
                        let uniform = Rational::one()
                            / Rational::from_integer((count as i64).into());
                        vec![uniform; count]
                    } else {
                        weights.iter().map(|w| w / &total).collect()
                    };
                    (0..domain.len())
                        .map(|j| {
                            realization_rows
                                .iter()
                                .zip(&weights)
                                .map(|(r, w)| &r[j] * w)
                                .sum()
                        })
                        .collect()
                }
                AggregatorKind::UniformMean => {
                    let n = Rational::from_integer((count as i64).into());
                    (0..domain.len())
                        .map(|j| {
                            realization_rows
                                .iter()
                                .map(|r| r[j].clone())
                                .sum::<Rational>()
                                / &n
                        })
                        .collect()
                }
                AggregatorKind::Min | AggregatorKind::Max => {
                    let mut row: Vec<Rational> = (0..domain.len())
                        .map(|j| {
                            let candidates = realization_rows.iter().map(|r| &r[j]);
                            let picked = if aggregator == AggregatorKind::Min {
                                candidates.min()
                            } else {
                                candidates.max()
                            };
                            picked.expect("at least one realization").clone()
                        })
                        .collect();
                    let total: Rational = row.iter().cloned().sum();
                    if total.is_zero() {
                        return Err(QuotientError::EmptyStageDistribution {
                            variable: high_var.clone(),
                            parents: iv_high,
                        });
                    }
                    if !total.is_one() {
                        renormalized = true;
                        row = row.iter().map(|x| x / &total).collect();
                    }
                    row
                }
            };
            rows.insert(setting, row);
        }

        // Drop parents the conditional never depends on.
        let mut parent_names = candidates;
        let mut axis = 0;
        while axis < parent_names.len() {
            let mut constant = true;
            let mut grouped: BTreeMap<Vec<String>, &Vec<Rational>> = BTreeMap::new();
            for (key, row) in &rows {
                let mut reduced = key.clone();
                reduced.remove(axis);
                match grouped.entry(reduced) {
                    Entry::Vacant(slot) => {
                        slot.insert(row);
                    }
                    Entry::Occupied(slot) => {
                        if *slot.get() != row {
                            constant = false;
                            break;
                        }
                    }
                }
            }
            if constant {
                let mut reduced_rows = BTreeMap::new();
                for (key, row) in &rows {
                    let mut reduced = key.clone();
                    reduced.remove(axis);
                    reduced_rows.insert(reduced, row.clone());
                }
                rows = reduced_rows;
                parent_names.remove(axis);
            } else {
                axis += 1;
            }
        }

        let deterministic = rows.values().all(|row| row.iter().any(|x| x.is_one()));
        if deterministic {
            let table: Vec<(Vec<String>, String)> = rows
                .iter()
                .map(|(key, row)| {
                    let pos = row.iter().position(|x| x.is_one()).expect("point mass");
                    (key.clone(), domain[pos].clone())
                })
                .collect();
            variables.push(VariableSpec {
                name: high_var.clone(),
                domain,
                parents: parent_names,
                table,
            });
            continue;
        }

        // Refine every row's cumulative breakpoints into one noise variable
        // whose intervals realize all rows at once.
        let mut breaks: BTreeSet<Rational> = BTreeSet::new();
        for row in rows.values() {
            let mut acc = Rational::zero();
            for x in row {
                acc += x;
                if !acc.is_zero() {
                    breaks.insert(acc.clone());
                }
            }
        }
        let breaks: Vec<Rational> = breaks.into_iter().collect();
        let pad = (breaks.len() - 1).to_string().len();
        let labels: Vec<String> = (0..breaks.len()).map(|i| format!("u{i:0pad$}")).collect();

        let mut noise_name = format!("U_{high_var}");
        let mut suffix = 2;
        while taken.contains(&noise_name) {
            noise_name = format!("U_{high_var}{suffix}");
            suffix += 1;
        }
        taken.insert(noise_name.clone());

        let mut weights = Vec::with_capacity(breaks.len());
        let mut prev = Rational::zero();
        for (label, b) in labels.iter().zip(&breaks) {
            weights.push((label.clone(), b - &prev));
            prev = b.clone();
        }
        exogenous.push(ExogenousSpec {
            name: noise_name.clone(),
            weights,
        });

        let mut table = Vec::new();
        for (key, row) in &rows {
            let mut cumulative = Vec::with_capacity(row.len());
            let mut acc = Rational::zero();
            for x in row {
                acc += x;
                cumulative.push(acc.clone());
            }
            let mut prev = Rational::zero();
            for (i, b) in breaks.iter().enumerate() {
                let pos = cumulative
                    .iter()
                    .position(|c| *c > prev)
                    .expect("mass remains beyond every proper breakpoint");
                let mut full_key = key.clone();
                full_key.push(labels[i].clone());
                table.push((full_key, domain[pos].clone()));
                prev = b.clone();
            }
        }
        let mut parents = parent_names;
        parents.push(noise_name);
        variables.push(VariableSpec {
            name: high_var.clone(),
            domain,
            parents,
            table,
        });
    }

    let model = Scm::build(ScmSpec {
        exogenous,
        variables,
    })
    .map_err(|errors| QuotientError::ConstructedModelInvalid { errors })?
    .with_enumeration_cap(low.enumeration_cap());
    let model = Arc::new(model);

    let alignment = Alignment::build(low, model.clone(), spec)
        .map_err(|errors| QuotientError::Shape { errors })?;
    let report = alignment.check_exact_consistency(&InterventionSet::AllCompleteClusters)?;
    let exact = report.pass;
    Ok(QuotientResult {
        model,
        alignment,
        report,
        exact,
        renormalized,
        weight_fallback,
    })
}

// ── Tests ───────────────────────────────────────────────────────────────────
