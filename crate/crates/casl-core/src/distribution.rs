//! Exact finite probability tables.
//!
//! A [`Distribution`] is a map from joint assignments over a fixed variable
//! scope to rational weights. Zero-weight assignments are never stored, so
//! two distributions over the same scope are equal exactly when they assign
//! the same weight to every assignment.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use crate::rational::Rational;
use crate::scm::QueryError;

/// An exact probability table over a fixed, duplicate-free variable scope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Distribution {
    scope: Vec<String>,
    weights: BTreeMap<Vec<String>, Rational>,
}

impl Distribution {
    /// Builds a table from weighted assignments, accumulating duplicates and
    /// dropping zero weights. Weights must be nonnegative and keys must match
    /// the scope arity.
    pub fn new(
        scope: Vec<String>,
        entries: impl IntoIterator<Item = (Vec<String>, Rational)>,
    ) -> Result<Distribution, QueryError> {
        let mut weights = BTreeMap::new();
        for (key, weight) in entries {
            *weights.entry(key).or_insert_with(Rational::zero) += weight;
        }
        Distribution::from_weights(scope, weights)
    }

    pub(crate) fn from_weights(
        scope: Vec<String>,
        weights: BTreeMap<Vec<String>, Rational>,
    ) -> Result<Distribution, QueryError> {
        let mut seen = std::collections::BTreeSet::new();
        for var in &scope {
            if !seen.insert(var) {
                return Err(QueryError::InvalidDistribution {
                    detail: format!("scope lists `{var}` twice"),
                });
            }
        }
        let mut kept = BTreeMap::new();
        for (key, weight) in weights {
            if key.len() != scope.len() {
                return Err(QueryError::InvalidDistribution {
                    detail: format!(
                        "assignment ({}) has {} values for a scope of {}",
                        key.join(", "),
                        key.len(),
                        scope.len()
                    ),
                });
            }
            if weight.is_negative() {
                return Err(QueryError::InvalidDistribution {
                    detail: format!("assignment ({}) has negative weight", key.join(", ")),
                });
            }
            if !weight.is_zero() {
                kept.insert(key, weight);
            }
        }
        Ok(Distribution {
            scope,
            weights: kept,
        })
    }

    /// Point mass on one total assignment.
    pub fn point_mass(assignment: &BTreeMap<String, String>) -> Distribution {
        let scope: Vec<String> = assignment.keys().cloned().collect();
        let key: Vec<String> = assignment.values().cloned().collect();
        let mut weights = BTreeMap::new();
        weights.insert(key, Rational::from_integer(1.into()));
        Distribution { scope, weights }
    }

    pub fn scope(&self) -> &[String] {
        &self.scope
    }

    /// Stored assignments and their nonzero weights, in key order.
    pub fn entries(&self) -> impl Iterator<Item = (&Vec<String>, &Rational)> {
        self.weights.iter()
    }

    pub fn support_len(&self) -> usize {
        self.weights.len()
    }

    /// Total stored weight. One for a probability table; possibly less for
    /// an unnormalized slice of one.
    pub fn mass(&self) -> Rational {
        self.weights.values().cloned().sum()
    }

    /// Rebuilds an assignment key as a name-to-value map.
    pub fn assignment_of(&self, key: &[String]) -> BTreeMap<String, String> {
        self.scope
            .iter()
            .cloned()
            .zip(key.iter().cloned())
            .collect()
    }

    fn positions_of(&self, vars: &[String]) -> Result<Vec<usize>, QueryError> {
        vars.iter()
            .map(|var| {
                self.scope.iter().position(|v| v == var).ok_or_else(|| {
                    QueryError::UnknownVariable {
                        variable: var.clone(),
                    }
                })
            })
            .collect()
    }

    /// Probability of a partial assignment: the sum over all stored
    /// assignments that agree with it.
    pub fn probability(&self, partial: &BTreeMap<String, String>) -> Result<Rational, QueryError> {
        let vars: Vec<String> = partial.keys().cloned().collect();
        let positions = self.positions_of(&vars)?;
        let wanted: Vec<&String> = partial.values().collect();
        let mut total = Rational::zero();
        for (key, weight) in &self.weights {
            if positions
                .iter()
                .zip(&wanted)
                .all(|(&pos, value)| &key[pos] == *value)
            {
                total += weight;
            }
        }
        Ok(total)
    }

    /// Exact marginal onto a subset of the scope. The result keeps the
    /// variables in this distribution's scope order, so marginalizing onto
    /// the full scope is the identity.
    pub fn marginal(&self, vars: &[String]) -> Result<Distribution, QueryError> {
        self.positions_of(vars)?;
        let keep: Vec<usize> = self
            .scope
            .iter()
            .enumerate()
            .filter(|(_, v)| vars.contains(v))
            .map(|(i, _)| i)
            .collect();
        let scope: Vec<String> = keep.iter().map(|&i| self.scope[i].clone()).collect();
        let mut weights: BTreeMap<Vec<String>, Rational> = BTreeMap::new();
        for (key, weight) in &self.weights {
            let reduced: Vec<String> = keep.iter().map(|&i| key[i].clone()).collect();
            *weights.entry(reduced).or_insert_with(Rational::zero) += weight;
        }
        Ok(Distribution { scope, weights })
    }

    /// Conditions on a partial assignment. Returns the event mass together
    /// with the renormalized table over the unchanged scope, or `None` when
    /// the event has zero mass.
    pub fn condition(
        &self,
        partial: &BTreeMap<String, String>,
    ) -> Result<(Rational, Option<Distribution>), QueryError> {
        let vars: Vec<String> = partial.keys().cloned().collect();
        let positions = self.positions_of(&vars)?;
        let wanted: Vec<&String> = partial.values().collect();
        let mut kept: BTreeMap<Vec<String>, Rational> = BTreeMap::new();
        let mut mass = Rational::zero();
        for (key, weight) in &self.weights {
            if positions
                .iter()
                .zip(&wanted)
                .all(|(&pos, value)| &key[pos] == *value)
            {
                mass += weight;
                kept.insert(key.clone(), weight.clone());
            }
        }
        if mass.is_zero() {
            return Ok((mass, None));
        }
        for weight in kept.values_mut() {
            *weight /= &mass;
        }
        Ok((
            mass,
            Some(Distribution {
                scope: self.scope.clone(),
                weights: kept,
            }),
        ))
    }

    /// Reorders the scope. The target must be a permutation of the current
    /// scope.
    pub fn aligned_to(&self, scope: &[String]) -> Result<Distribution, QueryError> {
        if scope.len() != self.scope.len() {
            return Err(QueryError::ScopeMismatch {
                detail: format!(
                    "cannot align scope ({}) to ({})",
                    self.scope.join(", "),
                    scope.join(", ")
                ),
            });
        }
        let positions = self.positions_of(scope)?;
        let mut weights = BTreeMap::new();
        for (key, weight) in &self.weights {
            let reordered: Vec<String> = positions.iter().map(|&i| key[i].clone()).collect();
            weights.insert(reordered, weight.clone());
        }
        Ok(Distribution {
            scope: scope.to_vec(),
            weights,
        })
    }

    /// Exact total variation distance between two tables over the same
    /// variable set: half the sum of absolute weight differences.
    pub fn tv_distance(&self, other: &Distribution) -> Result<Rational, QueryError> {
        let aligned = other.aligned_to(&self.scope)?;
        let mut total = Rational::zero();
        for (key, weight) in &self.weights {
            match aligned.weights.get(key) {
                Some(other_weight) => total += (weight - other_weight).abs(),
                None => total += weight,
            }
        }
        for (key, weight) in &aligned.weights {
            if !self.weights.contains_key(key) {
                total += weight;
            }
        }
        Ok(total / Rational::from_integer(2.into()))
    }

    /// Exact table equality over the same variable set, insensitive to scope
    /// order.
    pub fn same_table(&self, other: &Distribution) -> Result<bool, QueryError> {
        let aligned = other.aligned_to(&self.scope)?;
        Ok(self.weights == aligned.weights)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn pair(a: &str, b: &str) -> Vec<String> {
        vec![a.to_string(), b.to_string()]
    }

    fn sample() -> Distribution {
        Distribution::new(
            vec!["Color".into(), "Pecking".into()],
            vec![
                (pair("red", "yes"), rat(1, 2)),
                (pair("blue", "no"), rat(1, 4)),
                (pair("blue", "yes"), rat(1, 4)),
                (pair("red", "no"), rat(0, 1)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn zero_weights_are_dropped_and_duplicates_accumulate() {
        let d = Distribution::new(
            vec!["X".into()],
            vec![
                (vec!["a".into()], rat(1, 4)),
                (vec!["a".into()], rat(1, 4)),
                (vec!["b".into()], rat(0, 1)),
            ],
        )
        .unwrap();
        assert_eq!(d.support_len(), 1);
        assert_eq!(d.mass(), rat(1, 2));
    }

    #[test]
    fn arity_and_negative_weights_are_rejected() {
        let err = Distribution::new(vec!["X".into()], vec![(pair("a", "b"), rat(1, 2))]).unwrap_err();
        assert!(matches!(err, QueryError::InvalidDistribution { .. }));
        let err =
            Distribution::new(vec!["X".into()], vec![(vec!["a".into()], rat(-1, 2))]).unwrap_err();
        assert!(matches!(err, QueryError::InvalidDistribution { .. }));
    }

    #[test]
    fn marginal_keeps_scope_order_and_is_identity_on_full_scope() {
        let d = sample();
        let full = d
            .marginal(&["Pecking".to_string(), "Color".to_string()])
            .unwrap();
        assert_eq!(full, d);
        let color = d.marginal(&["Color".to_string()]).unwrap();
        assert_eq!(
            color.probability(&[("Color".to_string(), "blue".to_string())].into()).unwrap(),
            rat(1, 2)
        );
    }

    #[test]
    fn conditioning_renormalizes_and_flags_empty_events() {
        let d = sample();
        let (mass, cond) = d
            .condition(&[("Color".to_string(), "blue".to_string())].into())
            .unwrap();
        assert_eq!(mass, rat(1, 2));
        let cond = cond.unwrap();
        assert_eq!(
            cond.probability(&[("Pecking".to_string(), "yes".to_string())].into())
                .unwrap(),
            rat(1, 2)
        );
        let (mass, cond) = d
            .condition(&[("Color".to_string(), "green".to_string())].into())
            .unwrap();
        assert_eq!(mass, rat(0, 1));
        assert!(cond.is_none());
    }

    #[test]
    fn tv_distance_is_symmetric_and_order_insensitive() {
        let d = sample();
        let shuffled = Distribution::new(
            vec!["Pecking".into(), "Color".into()],
            vec![
                (pair("yes", "red"), rat(1, 4)),
                (pair("no", "blue"), rat(1, 2)),
                (pair("yes", "blue"), rat(1, 4)),
            ],
        )
        .unwrap();
        let forward = d.tv_distance(&shuffled).unwrap();
        let backward = shuffled.tv_distance(&d).unwrap();
        assert_eq!(forward, backward);
        assert_eq!(forward, rat(1, 4));
        assert!(!d.same_table(&shuffled).unwrap());

        let same_reordered = d.aligned_to(&["Pecking".to_string(), "Color".to_string()]).unwrap();
        assert!(d.same_table(&same_reordered).unwrap());
        assert_eq!(d.tv_distance(&same_reordered).unwrap(), rat(0, 1));
    }

    #[test]
    fn disjoint_scopes_are_a_scope_mismatch() {
        let d = sample();
        let other = Distribution::new(vec!["X".into()], vec![(vec!["a".into()], rat(1, 1))]).unwrap();
        assert!(d.tv_distance(&other).is_err());
    }
}
