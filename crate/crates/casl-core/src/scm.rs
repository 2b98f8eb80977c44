//! Finite discrete structural causal models.
//!
//! A model is a set of exogenous variables, each carrying an exact rational
//! probability distribution over a finite value domain, and a set of
//! endogenous variables, each defined by an extensional table over its
//! parents. The parent graph over endogenous variables must be acyclic.
//!
//! Evaluation is deterministic: endogenous variables are computed in the
//! unique topological order obtained by breaking ties lexicographically on
//! variable names, so permuting declaration order never changes any result.
//! Interventional and observational distributions are exact pushforwards of
//! the joint exogenous distribution, computed by full enumeration up to a
//! configurable cap, with an optional seeded Monte Carlo estimator beyond it.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::distribution::Distribution;
use crate::rational::{format_rational, Rational};
use crate::util::ProductIter;

/// Default bound on the number of joint exogenous states enumerated when
/// computing a distribution exactly.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 20;

/// Total map from variable names to value labels.
pub type Assignment = BTreeMap<String, String>;

// ── Specifications ──────────────────────────────────────────────────────────

/// Declaration of one exogenous variable and its distribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExogenousSpec {
    pub name: String,
    /// Value labels paired with rational weights. Weights must be
    /// nonnegative and sum to exactly one.
    pub weights: Vec<(String, Rational)>,
}

/// Declaration of one endogenous variable and its structural function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableSpec {
    pub name: String,
    /// Ordered, nonempty, duplicate-free value domain.
    pub domain: Vec<String>,
    /// Parent variables, exogenous or endogenous, in table-key order.
    pub parents: Vec<String>,
    /// One row per joint parent assignment, exhaustive over the parent
    /// domain product. A parentless variable has a single empty-key row.
    pub table: Vec<(Vec<String>, String)>,
}

/// Raw model declaration handed to [`Scm::build`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScmSpec {
    pub exogenous: Vec<ExogenousSpec>,
    pub variables: Vec<VariableSpec>,
}

// ── Errors ──────────────────────────────────────────────────────────────────

/// Validation failure while building a model. [`Scm::build`] reports every
/// failure it finds, not just the first.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("duplicate declaration of `{name}`")]
    DuplicateName { name: String },
    #[error("`{target}` references unknown name `{name}`")]
    UnknownReference { target: String, name: String },
    #[error("`{variable}` has an empty domain")]
    EmptyDomain { variable: String },
    #[error("`{variable}` lists value `{value}` more than once")]
    DuplicateValue { variable: String, value: String },
    #[error("`{variable}` assigns negative weight to value `{value}`")]
    NegativeWeight { variable: String, value: String },
    #[error("weights of `{variable}` sum to {}, not 1", format_rational(.sum))]
    BadProbabilitySum { variable: String, sum: Rational },
    #[error("`{target}` lists parent `{parent}` more than once")]
    DuplicateParent { target: String, parent: String },
    #[error("table for `{target}` has a row with {got} values; its {expected} parents require {expected}")]
    TableKeyArity {
        target: String,
        expected: usize,
        got: usize,
    },
    #[error("table for `{target}` repeats the row ({})", .key.join(", "))]
    DuplicateTableRow { target: String, key: Vec<String> },
    #[error("table for `{target}` is missing {missing_count} parent combination(s){}",
            .missing.as_ref().map(|k| format!(", first ({})", k.join(", "))).unwrap_or_default())]
    NonExhaustiveTable {
        target: String,
        missing: Option<Vec<String>>,
        missing_count: u128,
    },
    #[error("cycle detected: {}", .cycle.join(" -> "))]
    CycleDetected { cycle: Vec<String> },
}

/// Failure while querying a validated model or distribution.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error("unknown variable `{variable}`")]
    UnknownVariable { variable: String },
    #[error("`{value}` is not in the domain of `{variable}`")]
    UnknownValue { variable: String, value: String },
    #[error("`{variable}` is not endogenous and cannot be intervened on")]
    NotEndogenous { variable: String },
    #[error("`{variable}` is not exogenous")]
    NotExogenous { variable: String },
    #[error("assignment is missing a value for `{variable}`")]
    MissingAssignment { variable: String },
    #[error("enumeration needs {required} joint exogenous states, above the cap of {cap}")]
    EnumerationCapExceeded { required: u128, cap: u64 },
    #[error("scope mismatch: {detail}")]
    ScopeMismatch { detail: String },
    #[error("invalid distribution: {detail}")]
    InvalidDistribution { detail: String },
    #[error("sample count must be positive")]
    ZeroSamples,
}

// ── Interventions ───────────────────────────────────────────────────────────

/// A `do` intervention: a partial map from endogenous variables to forced
/// values. Interventions order lexicographically by their (variable, value)
/// pairs, with the empty intervention first.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Intervention(BTreeMap<String, String>);

impl Intervention {
    pub fn empty() -> Self {
        Intervention(BTreeMap::new())
    }

    pub fn from_pairs<I, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, S)>,
        S: Into<String>,
    {
        Intervention(
            pairs
                .into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
        )
    }

    /// Returns a copy extended with one more forced value.
    pub fn with(mut self, var: impl Into<String>, value: impl Into<String>) -> Self {
        self.0.insert(var.into(), value.into());
        self
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, var: &str) -> Option<&str> {
        self.0.get(var).map(String::as_str)
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Union of two interventions. The right side wins on shared variables.
    pub fn merged(&self, other: &Intervention) -> Intervention {
        let mut map = self.0.clone();
        for (k, v) in &other.0 {
            map.insert(k.clone(), v.clone());
        }
        Intervention(map)
    }
}

impl std::fmt::Display for Intervention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "do(")?;
        for (i, (var, value)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{var}={value}")?;
        }
        write!(f, ")")
    }
}

impl FromIterator<(String, String)> for Intervention {
    fn from_iter<T: IntoIterator<Item = (String, String)>>(iter: T) -> Self {
        Intervention(iter.into_iter().collect())
    }
}

// ── Model ───────────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Eq)]
struct ExogenousVariable {
    /// Value labels in sorted order; mirrors the keys of `weights`.
    domain: Vec<String>,
    weights: BTreeMap<String, Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct EndogenousVariable {
    domain: Vec<String>,
    parents: Vec<String>,
    table: BTreeMap<Vec<String>, String>,
}

/// A validated structural causal model. Immutable after construction; all
/// queries are safe to run concurrently.
#[derive(Debug, Clone)]
pub struct Scm {
    exogenous: BTreeMap<String, ExogenousVariable>,
    endogenous: BTreeMap<String, EndogenousVariable>,
    /// Endogenous names in evaluation order: topological with lexicographic
    /// tie-breaking, hence unique and declaration-order independent.
    order: Vec<String>,
    /// Bound on exact enumeration for this model's distribution queries.
    cap: u64,
}

/// Equality is structural: two models are equal when they declare the same
/// variables, distributions, and tables. The enumeration cap is a query
/// limit, not part of the model.
impl PartialEq for Scm {
    fn eq(&self, other: &Self) -> bool {
        self.exogenous == other.exogenous && self.endogenous == other.endogenous
    }
}

impl Eq for Scm {}

impl Scm {
    /// Validates a declaration and builds the model, reporting the full list
    /// of failures when invalid.
    pub fn build(spec: ScmSpec) -> Result<Scm, Vec<ModelError>> {
        let mut errors = Vec::new();

        // Name uniqueness across both variable kinds.
        let mut seen = BTreeSet::new();
        for name in spec
            .exogenous
            .iter()
            .map(|e| &e.name)
            .chain(spec.variables.iter().map(|v| &v.name))
        {
            if !seen.insert(name.clone()) {
                errors.push(ModelError::DuplicateName { name: name.clone() });
            }
        }

        let mut exogenous = BTreeMap::new();
        for exo in &spec.exogenous {
            if exo.weights.is_empty() {
                errors.push(ModelError::EmptyDomain {
                    variable: exo.name.clone(),
                });
                continue;
            }
            let mut weights = BTreeMap::new();
            let mut ok = true;
            for (value, weight) in &exo.weights {
                if weights.insert(value.clone(), weight.clone()).is_some() {
                    errors.push(ModelError::DuplicateValue {
                        variable: exo.name.clone(),
                        value: value.clone(),
                    });
                    ok = false;
                }
                if weight.is_negative() {
                    errors.push(ModelError::NegativeWeight {
                        variable: exo.name.clone(),
                        value: value.clone(),
                    });
                    ok = false;
                }
            }
            let sum: Rational = weights.values().cloned().sum();
            if ok && !sum.is_one() {
                errors.push(ModelError::BadProbabilitySum {
                    variable: exo.name.clone(),
                    sum,
                });
            }
            let domain: Vec<String> = weights.keys().cloned().collect();
            exogenous.insert(exo.name.clone(), ExogenousVariable { domain, weights });
        }

        // Domains must exist before tables can be checked, so collect them
        // for every declared name first.
        let mut domains: BTreeMap<&str, Vec<String>> = BTreeMap::new();
        for (name, exo) in &exogenous {
            domains.insert(name, exo.domain.clone());
        }
        for var in &spec.variables {
            domains.insert(&var.name, var.domain.clone());
        }

        let mut endogenous = BTreeMap::new();
        for var in &spec.variables {
            let mut ok = true;
            if var.domain.is_empty() {
                errors.push(ModelError::EmptyDomain {
                    variable: var.name.clone(),
                });
                ok = false;
            }
            let mut values = BTreeSet::new();
            for value in &var.domain {
                if !values.insert(value) {
                    errors.push(ModelError::DuplicateValue {
                        variable: var.name.clone(),
                        value: value.clone(),
                    });
                    ok = false;
                }
            }
            let mut parent_seen = BTreeSet::new();
            for parent in &var.parents {
                if !domains.contains_key(parent.as_str()) {
                    errors.push(ModelError::UnknownReference {
                        target: var.name.clone(),
                        name: parent.clone(),
                    });
                    ok = false;
                }
                if !parent_seen.insert(parent) {
                    errors.push(ModelError::DuplicateParent {
                        target: var.name.clone(),
                        parent: parent.clone(),
                    });
                    ok = false;
                }
            }

            let mut table = BTreeMap::new();
            if ok {
                let parent_domains: Vec<&Vec<String>> = var
                    .parents
                    .iter()
                    .map(|p| domains.get(p.as_str()).expect("parent checked above"))
                    .collect();
                for (key, value) in &var.table {
                    if key.len() != var.parents.len() {
                        errors.push(ModelError::TableKeyArity {
                            target: var.name.clone(),
                            expected: var.parents.len(),
                            got: key.len(),
                        });
                        ok = false;
                        continue;
                    }
                    let mut row_ok = true;
                    for (pos, cell) in key.iter().enumerate() {
                        if !parent_domains[pos].contains(cell) {
                            errors.push(ModelError::UnknownReference {
                                target: var.name.clone(),
                                name: cell.clone(),
                            });
                            row_ok = false;
                        }
                    }
                    if !var.domain.contains(value) {
                        errors.push(ModelError::UnknownReference {
                            target: var.name.clone(),
                            name: value.clone(),
                        });
                        row_ok = false;
                    }
                    if !row_ok {
                        ok = false;
                        continue;
                    }
                    if table.insert(key.clone(), value.clone()).is_some() {
                        errors.push(ModelError::DuplicateTableRow {
                            target: var.name.clone(),
                            key: key.clone(),
                        });
                        ok = false;
                    }
                }
                if ok {
                    let sizes: Vec<usize> = parent_domains.iter().map(|d| d.len()).collect();
                    let required = ProductIter::count_tuples(&sizes);
                    let present = table.len() as u128;
                    if present < required {
                        // Name the first missing combination when the
                        // product is small enough to walk.
                        let missing = if required <= 1 << 22 {
                            ProductIter::new(sizes)
                                .map(|idx| {
                                    idx.iter()
                                        .enumerate()
                                        .map(|(pos, &i)| parent_domains[pos][i].clone())
                                        .collect::<Vec<String>>()
                                })
                                .find(|key| !table.contains_key(key))
                        } else {
                            None
                        };
                        errors.push(ModelError::NonExhaustiveTable {
                            target: var.name.clone(),
                            missing,
                            missing_count: required - present,
                        });
                    }
                }
            }

            endogenous.insert(
                var.name.clone(),
                EndogenousVariable {
                    domain: var.domain.clone(),
                    parents: var.parents.clone(),
                    table,
                },
            );
        }

        let deps: BTreeMap<String, BTreeSet<String>> = endogenous
            .iter()
            .map(|(name, decl)| {
                (
                    name.clone(),
                    decl.parents
                        .iter()
                        .filter(|p| endogenous.contains_key(*p))
                        .cloned()
                        .collect(),
                )
            })
            .collect();
        let order = match crate::util::lexicographic_topological_order(&deps) {
            Ok(order) => order,
            Err(cycle) => {
                errors.push(ModelError::CycleDetected { cycle });
                Vec::new()
            }
        };

        if errors.is_empty() {
            Ok(Scm {
                exogenous,
                endogenous,
                order,
                cap: DEFAULT_ENUMERATION_CAP,
            })
        } else {
            Err(errors)
        }
    }

    /// Returns the same model with a different exact-enumeration cap. Every
    /// distribution query derived from the model respects the cap.
    pub fn with_enumeration_cap(mut self, cap: u64) -> Scm {
        self.cap = cap;
        self
    }

    pub fn enumeration_cap(&self) -> u64 {
        self.cap
    }

    // ── Structure queries ──────────────────────────────────────────────

    pub fn exogenous_names(&self) -> impl Iterator<Item = &str> {
        self.exogenous.keys().map(String::as_str)
    }

    pub fn endogenous_names(&self) -> impl Iterator<Item = &str> {
        self.endogenous.keys().map(String::as_str)
    }

    pub fn is_exogenous(&self, var: &str) -> bool {
        self.exogenous.contains_key(var)
    }

    pub fn is_endogenous(&self, var: &str) -> bool {
        self.endogenous.contains_key(var)
    }

    /// Value domain of any declared variable. Exogenous domains are in
    /// sorted value order, endogenous domains in declared order.
    pub fn domain(&self, var: &str) -> Option<&[String]> {
        if let Some(exo) = self.exogenous.get(var) {
            return Some(&exo.domain);
        }
        self.endogenous.get(var).map(|v| v.domain.as_slice())
    }

    pub fn parents(&self, var: &str) -> Option<&[String]> {
        self.endogenous.get(var).map(|v| v.parents.as_slice())
    }

    /// Structural table of an endogenous variable.
    pub fn table(&self, var: &str) -> Option<&BTreeMap<Vec<String>, String>> {
        self.endogenous.get(var).map(|v| &v.table)
    }

    /// Exogenous weights of an exogenous variable.
    pub fn exogenous_weights(&self, var: &str) -> Option<&BTreeMap<String, Rational>> {
        self.exogenous.get(var).map(|v| &v.weights)
    }

    /// Endogenous names in deterministic evaluation order.
    pub fn evaluation_order(&self) -> &[String] {
        &self.order
    }

    /// Number of joint exogenous states, saturating at `u128::MAX`.
    pub fn exogenous_state_count(&self) -> u128 {
        let sizes: Vec<usize> = self.exogenous.values().map(|e| e.domain.len()).collect();
        ProductIter::count_tuples(&sizes)
    }

    // ── Validation helpers ─────────────────────────────────────────────

    pub(crate) fn check_intervention(&self, iv: &Intervention) -> Result<(), QueryError> {
        for (var, value) in iv.iter() {
            let Some(decl) = self.endogenous.get(var) else {
                if self.exogenous.contains_key(var) {
                    return Err(QueryError::NotEndogenous {
                        variable: var.to_string(),
                    });
                }
                return Err(QueryError::UnknownVariable {
                    variable: var.to_string(),
                });
            };
            if !decl.domain.iter().any(|v| v == value) {
                return Err(QueryError::UnknownValue {
                    variable: var.to_string(),
                    value: value.to_string(),
                });
            }
        }
        Ok(())
    }

    fn check_exogenous_assignment(&self, exo: &Assignment) -> Result<(), QueryError> {
        for (var, value) in exo {
            let Some(decl) = self.exogenous.get(var) else {
                return Err(QueryError::NotExogenous {
                    variable: var.clone(),
                });
            };
            if !decl.weights.contains_key(value) {
                return Err(QueryError::UnknownValue {
                    variable: var.clone(),
                    value: value.clone(),
                });
            }
        }
        for var in self.exogenous.keys() {
            if !exo.contains_key(var) {
                return Err(QueryError::MissingAssignment {
                    variable: var.clone(),
                });
            }
        }
        Ok(())
    }

    // ── Evaluation ─────────────────────────────────────────────────────

    /// Computes every endogenous value for one joint exogenous state under
    /// an intervention. The result assigns exactly the endogenous variables.
    pub fn evaluate_world(
        &self,
        exo: &Assignment,
        iv: &Intervention,
    ) -> Result<Assignment, QueryError> {
        self.check_exogenous_assignment(exo)?;
        self.check_intervention(iv)?;
        let mut env: BTreeMap<&str, &str> = exo
            .iter()
            .map(|(k, v)| (k.as_str(), v.as_str()))
            .collect();
        self.evaluate_into(&mut env, iv);
        Ok(self
            .endogenous
            .keys()
            .map(|name| (name.clone(), env[name.as_str()].to_string()))
            .collect())
    }

    /// Core evaluation over a prepared environment holding all exogenous
    /// values. Assumes validated inputs.
    fn evaluate_into<'a>(&'a self, env: &mut BTreeMap<&'a str, &'a str>, iv: &'a Intervention) {
        for name in &self.order {
            if let Some(forced) = iv.get(name) {
                env.insert(name, forced);
                continue;
            }
            let decl = &self.endogenous[name];
            let key: Vec<String> = decl
                .parents
                .iter()
                .map(|p| env[p.as_str()].to_string())
                .collect();
            let value = decl
                .table
                .get(&key)
                .expect("validated tables are exhaustive");
            env.insert(name, value);
        }
    }

    // ── Distributions ──────────────────────────────────────────────────

    /// Observational joint distribution over all endogenous variables.
    pub fn observational_distribution(&self) -> Result<Distribution, QueryError> {
        self.interventional_distribution(&Intervention::empty())
    }

    /// Interventional joint distribution over all endogenous variables,
    /// enumerated exactly under the model's cap.
    pub fn interventional_distribution(&self, iv: &Intervention) -> Result<Distribution, QueryError> {
        self.interventional_distribution_capped(iv, self.cap)
    }

    /// Interventional distribution with an explicit enumeration cap.
    pub fn interventional_distribution_capped(
        &self,
        iv: &Intervention,
        cap: u64,
    ) -> Result<Distribution, QueryError> {
        self.check_intervention(iv)?;
        let required = self.exogenous_state_count();
        if required > cap as u128 {
            return Err(QueryError::EnumerationCapExceeded { required, cap });
        }

        let exo_names: Vec<&String> = self.exogenous.keys().collect();
        let exo_vars: Vec<&ExogenousVariable> = self.exogenous.values().collect();
        let sizes: Vec<usize> = exo_vars.iter().map(|e| e.domain.len()).collect();
        let scope: Vec<String> = self.endogenous.keys().cloned().collect();

        let mut weights: BTreeMap<Vec<String>, Rational> = BTreeMap::new();
        for idx in ProductIter::new(sizes) {
            let mut weight = Rational::one();
            let mut skip = false;
            for (pos, &i) in idx.iter().enumerate() {
                let value = &exo_vars[pos].domain[i];
                let w = &exo_vars[pos].weights[value];
                if w.is_zero() {
                    skip = true;
                    break;
                }
                weight *= w;
            }
            if skip {
                continue;
            }
            let mut env: BTreeMap<&str, &str> = BTreeMap::new();
            for (pos, &i) in idx.iter().enumerate() {
                env.insert(exo_names[pos], &exo_vars[pos].domain[i]);
            }
            self.evaluate_into(&mut env, iv);
            let key: Vec<String> = scope.iter().map(|v| env[v.as_str()].to_string()).collect();
            *weights.entry(key).or_insert_with(Rational::zero) += weight;
        }

        Distribution::from_weights(scope, weights)
    }

    /// Seeded Monte Carlo estimate of an interventional distribution, for
    /// models whose exogenous product is too large to enumerate. Weights are
    /// exact sample frequencies; the reported standard error for each cell
    /// is `sqrt(p(1-p)/n)` of the estimate.
    pub fn sample_interventional(
        &self,
        iv: &Intervention,
        samples: u64,
        seed: u64,
    ) -> Result<SampledDistribution, QueryError> {
        self.check_intervention(iv)?;
        if samples == 0 {
            return Err(QueryError::ZeroSamples);
        }

        // Cumulative weight tables per exogenous variable, in sorted value
        // order, so draws are reproducible across platforms.
        let exo_names: Vec<&String> = self.exogenous.keys().collect();
        let cumulative: Vec<Vec<(f64, &String)>> = self
            .exogenous
            .values()
            .map(|exo| {
                let mut acc = Rational::zero();
                exo.domain
                    .iter()
                    .map(|value| {
                        acc += &exo.weights[value];
                        (crate::rational::approx_f64(&acc), value)
                    })
                    .collect()
            })
            .collect();

        let scope: Vec<String> = self.endogenous.keys().cloned().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts: BTreeMap<Vec<String>, u64> = BTreeMap::new();
        for _ in 0..samples {
            let mut env: BTreeMap<&str, &str> = BTreeMap::new();
            for (pos, table) in cumulative.iter().enumerate() {
                let draw: f64 = rng.random();
                let value = table
                    .iter()
                    .find(|(cum, _)| draw < *cum)
                    .map(|(_, v)| *v)
                    .unwrap_or_else(|| table.last().expect("nonempty domain").1);
                env.insert(exo_names[pos], value);
            }
            self.evaluate_into(&mut env, iv);
            let key: Vec<String> = scope.iter().map(|v| env[v.as_str()].to_string()).collect();
            *counts.entry(key).or_insert(0) += 1;
        }

        let n = Rational::from_integer(samples.into());
        let mut weights = BTreeMap::new();
        let mut standard_error = BTreeMap::new();
        for (key, count) in counts {
            let p = Rational::from_integer(count.into()) / &n;
            let pf = p.to_f64().unwrap_or(0.0);
            standard_error.insert(key.clone(), (pf * (1.0 - pf) / samples as f64).sqrt());
            weights.insert(key, p);
        }
        Ok(SampledDistribution {
            distribution: Distribution::from_weights(scope, weights)?,
            standard_error,
            samples,
            seed,
        })
    }

    // ── Derived quantities ─────────────────────────────────────────────

    /// `P[outcome=value | do(iv_a)] - P[outcome=value | do(iv_b)]`, exact.
    pub fn effect_contrast(
        &self,
        iv_a: &Intervention,
        iv_b: &Intervention,
        outcome: &str,
        value: &str,
    ) -> Result<Rational, QueryError> {
        let target = self.check_outcome(outcome, value)?;
        let a = self.interventional_distribution(iv_a)?;
        let b = self.interventional_distribution(iv_b)?;
        let pa = a.probability(&target)?;
        let pb = b.probability(&target)?;
        Ok(pa - pb)
    }

    fn check_outcome(&self, outcome: &str, value: &str) -> Result<BTreeMap<String, String>, QueryError> {
        let Some(decl) = self.endogenous.get(outcome) else {
            return Err(QueryError::UnknownVariable {
                variable: outcome.to_string(),
            });
        };
        if !decl.domain.iter().any(|v| v == value) {
            return Err(QueryError::UnknownValue {
                variable: outcome.to_string(),
                value: value.to_string(),
            });
        }
        let mut target = BTreeMap::new();
        target.insert(outcome.to_string(), value.to_string());
        Ok(target)
    }

    /// Value of one variable for a fully specified exogenous state under an
    /// intervention.
    pub fn unit_counterfactual(
        &self,
        exo: &Assignment,
        iv: &Intervention,
        query: &str,
    ) -> Result<String, QueryError> {
        if self.is_exogenous(query) {
            self.check_exogenous_assignment(exo)?;
            self.check_intervention(iv)?;
            return Ok(exo[query].clone());
        }
        if !self.is_endogenous(query) {
            return Err(QueryError::UnknownVariable {
                variable: query.to_string(),
            });
        }
        let world = self.evaluate_world(exo, iv)?;
        Ok(world[query].clone())
    }
}

/// Result of [`Scm::sample_interventional`].
#[derive(Debug, Clone)]
pub struct SampledDistribution {
    /// Exact sample frequencies over the endogenous scope.
    pub distribution: Distribution,
    /// Per-assignment standard error of the estimate.
    pub standard_error: BTreeMap<Vec<String>, f64>,
    pub samples: u64,
    pub seed: u64,
}

// ── Tests ───────────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use crate::test_fixtures::*;

    #[test]
    fn build_collects_every_failure() {
        let spec = ScmSpec {
            exogenous: vec![ExogenousSpec {
                name: "U".into(),
                weights: vec![("a".into(), rat(1, 2)), ("b".into(), rat(1, 3))],
            }],
            variables: vec![
                VariableSpec {
                    name: "U".into(),
                    domain: vec!["x".into()],
                    parents: vec!["Ghost".into()],
                    table: vec![],
                },
                VariableSpec {
                    name: "Y".into(),
                    domain: vec![],
                    parents: vec![],
                    table: vec![(vec![], "x".into())],
                },
            ],
        };
        let errors = Scm::build(spec).unwrap_err();
        assert!(errors.contains(&ModelError::DuplicateName { name: "U".into() }));
        assert!(errors.contains(&ModelError::BadProbabilitySum {
            variable: "U".into(),
            sum: rat(5, 6),
        }));
        assert!(errors.contains(&ModelError::UnknownReference {
            target: "U".into(),
            name: "Ghost".into(),
        }));
        assert!(errors.contains(&ModelError::EmptyDomain { variable: "Y".into() }));
    }

    #[test]
    fn cycle_error_names_the_cycle() {
        let spec = ScmSpec {
            exogenous: vec![],
            variables: vec![
                VariableSpec {
                    name: "A".into(),
                    domain: vec!["0".into(), "1".into()],
                    parents: vec!["B".into()],
                    table: vec![
                        (vec!["0".into()], "0".into()),
                        (vec!["1".into()], "1".into()),
                    ],
                },
                VariableSpec {
                    name: "B".into(),
                    domain: vec!["0".into(), "1".into()],
                    parents: vec!["A".into()],
                    table: vec![
                        (vec!["0".into()], "0".into()),
                        (vec!["1".into()], "1".into()),
                    ],
                },
            ],
        };
        let errors = Scm::build(spec).unwrap_err();
        let cycle = errors
            .iter()
            .find_map(|e| match e {
                ModelError::CycleDetected { cycle } => Some(cycle.clone()),
                _ => None,
            })
            .expect("cycle reported");
        assert_eq!(cycle.first(), cycle.last());
        assert!(cycle.len() >= 3);
    }

    #[test]
    fn missing_table_row_is_named() {
        let spec = ScmSpec {
            exogenous: vec![],
            variables: vec![
                VariableSpec {
                    name: "A".into(),
                    domain: vec!["0".into(), "1".into()],
                    parents: vec![],
                    table: vec![(vec![], "0".into())],
                },
                VariableSpec {
                    name: "B".into(),
                    domain: vec!["0".into(), "1".into()],
                    parents: vec!["A".into()],
                    table: vec![(vec!["0".into()], "1".into())],
                },
            ],
        };
        let errors = Scm::build(spec).unwrap_err();
        assert_eq!(
            errors,
            vec![ModelError::NonExhaustiveTable {
                target: "B".into(),
                missing: Some(vec!["1".into()]),
                missing_count: 1,
            }]
        );
    }

    #[test]
    fn noise_free_bird_answers_point_queries() {
        let scm = noise_free_bird();
        let world = scm
            .evaluate_world(
                &Assignment::new(),
                &Intervention::from_pairs([("Fine", "cyan")]),
            )
            .unwrap();
        assert_eq!(world["Fine"], "cyan");
        assert_eq!(world["Pecking"], "no");
    }

    #[test]
    fn intervening_every_variable_echoes_the_intervention() {
        let scm = noise_free_bird();
        let iv = Intervention::from_pairs([("Fine", "turquoise"), ("Pecking", "yes")]);
        let world = scm.evaluate_world(&Assignment::new(), &iv).unwrap();
        assert_eq!(world["Fine"], "turquoise");
        assert_eq!(world["Pecking"], "yes");
    }

    #[test]
    fn evaluate_world_validates_inputs() {
        let scm = bird_low();
        let err = scm
            .evaluate_world(&Assignment::new(), &Intervention::empty())
            .unwrap_err();
        assert_eq!(
            err,
            QueryError::MissingAssignment {
                variable: "U_fine".into()
            }
        );

        let exo: Assignment = [("U_fine".to_string(), "crimson".to_string())].into();
        let err = scm
            .evaluate_world(&exo, &Intervention::from_pairs([("U_fine", "cyan")]))
            .unwrap_err();
        assert_eq!(
            err,
            QueryError::NotEndogenous {
                variable: "U_fine".into()
            }
        );

        let err = scm
            .evaluate_world(&exo, &Intervention::from_pairs([("Pecking", "loud")]))
            .unwrap_err();
        assert_eq!(
            err,
            QueryError::UnknownValue {
                variable: "Pecking".into(),
                value: "loud".into()
            }
        );
    }

    #[test]
    fn bird_observational_pecking_rate_is_one_half() {
        let scm = bird_low();
        let dist = scm.observational_distribution().unwrap();
        let p = dist
            .probability(&[("Pecking".to_string(), "yes".to_string())].into())
            .unwrap();
        assert_eq!(p, rat(1, 2));
    }

    #[test]
    fn bird_scarlet_intervention_forces_pecking() {
        let scm = bird_low();
        let dist = scm
            .interventional_distribution(&Intervention::from_pairs([("Fine", "scarlet")]))
            .unwrap();
        let p = dist
            .probability(&[("Pecking".to_string(), "yes".to_string())].into())
            .unwrap();
        assert_eq!(p, rat(1, 1));
    }

    #[test]
    fn audit_callback_rates_match_hand_enumeration() {
        let scm = audit_low();
        let yes = [("Callback".to_string(), "yes".to_string())].into();
        let greg = scm
            .interventional_distribution(&Intervention::from_pairs([("Name", "Greg")]))
            .unwrap();
        assert_eq!(greg.probability(&yes).unwrap(), rat(3, 20));
        let jamal = scm
            .interventional_distribution(&Intervention::from_pairs([("Name", "Jamal")]))
            .unwrap();
        assert_eq!(jamal.probability(&yes).unwrap(), rat(1, 10));
        let observational = scm.observational_distribution().unwrap();
        assert_eq!(observational.probability(&yes).unwrap(), rat(1, 8));
    }

    #[test]
    fn audit_effect_contrast_and_ratio() {
        let scm = audit_low();
        let greg = Intervention::from_pairs([("Name", "Greg")]);
        let jamal = Intervention::from_pairs([("Name", "Jamal")]);
        let effect = scm
            .effect_contrast(&greg, &jamal, "Callback", "yes")
            .unwrap();
        assert_eq!(effect, rat(1, 20));
        let flipped = scm
            .effect_contrast(&jamal, &greg, "Callback", "yes")
            .unwrap();
        assert_eq!(flipped, -effect);
    }

    #[test]
    fn audit_unit_counterfactuals_follow_the_table() {
        let scm = audit_low();
        let mut exo = Assignment::new();
        exo.insert("U_name".into(), "Greg".into());
        exo.insert("U_edu".into(), "StateU".into());
        exo.insert("U_cb".into(), "5".into());
        assert_eq!(
            scm.unit_counterfactual(&exo, &Intervention::empty(), "Name")
                .unwrap(),
            "Greg"
        );
        assert_eq!(
            scm.unit_counterfactual(&exo, &Intervention::empty(), "Callback")
                .unwrap(),
            "no"
        );

        exo.insert("U_cb".into(), "1".into());
        assert_eq!(
            scm.unit_counterfactual(&exo, &Intervention::from_pairs([("Name", "Jamal")]), "Callback")
                .unwrap(),
            "yes"
        );
    }

    #[test]
    fn enumeration_cap_reports_required_state_count() {
        let scm = audit_low();
        let err = scm
            .interventional_distribution_capped(&Intervention::empty(), 100)
            .unwrap_err();
        assert_eq!(
            err,
            QueryError::EnumerationCapExceeded {
                required: 160,
                cap: 100
            }
        );
    }

    #[test]
    fn sampling_is_deterministic_for_a_seed_and_tracks_the_exact_law() {
        let scm = bird_low();
        let iv = Intervention::empty();
        let a = scm.sample_interventional(&iv, 4000, 7).unwrap();
        let b = scm.sample_interventional(&iv, 4000, 7).unwrap();
        assert_eq!(a.distribution, b.distribution);
        assert_eq!(a.distribution.mass(), rat(1, 1));

        let estimate = a
            .distribution
            .probability(&[("Pecking".to_string(), "yes".to_string())].into())
            .unwrap();
        let drift = crate::rational::approx_f64(&(estimate - rat(1, 2)));
        assert!(drift.abs() < 0.05, "estimate strayed by {drift}");
    }

    #[test]
    fn declaration_order_does_not_change_distributions() {
        let mut spec = bird_low_spec();
        spec.variables.reverse();
        spec.exogenous.reverse();
        let reordered = Scm::build(spec).unwrap();
        let base = bird_low();
        assert_eq!(
            base.observational_distribution().unwrap(),
            reordered.observational_distribution().unwrap()
        );
        assert_eq!(base.evaluation_order(), reordered.evaluation_order());
    }

    #[test]
    fn intervention_ordering_puts_empty_first() {
        let empty = Intervention::empty();
        let a = Intervention::from_pairs([("Fine", "crimson")]);
        let b = Intervention::from_pairs([("Fine", "cyan")]);
        let mut list = vec![b.clone(), a.clone(), empty.clone()];
        list.sort();
        assert_eq!(list, vec![empty, a, b]);
    }
}
