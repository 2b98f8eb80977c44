//! Property tests over seeded random models: normalization, metric facts,
//! mass preservation under pushforward, identity quotients, and the
//! preimage/induced-intervention adjunction.

mod common;

use std::sync::Arc;

use casl_core::abstraction::{AggregatorKind, AlignmentSpec, ClusterSpec};
use casl_core::quotient::quotient_high_model;
use casl_core::random::{random_cluster_shape, random_model, RandomModelConfig};
use casl_core::{Intervention, Rational, Scm};
use num_traits::{One, Zero};
use proptest::prelude::*;

fn small_config(vars: usize) -> RandomModelConfig {
    RandomModelConfig {
        variables: vars,
        max_parents: 2,
        max_domain: 3,
    }
}

/// A deterministic single-variable intervention derived from the seed.
fn seeded_intervention(model: &Scm, seed: u64) -> Intervention {
    let vars: Vec<&str> = model.endogenous_names().collect();
    let var = vars[(seed as usize) % vars.len()];
    let domain = model.domain(var).expect("endogenous domain");
    let value = &domain[((seed / 7) as usize) % domain.len()];
    Intervention::from_pairs([(var.to_string(), value.clone())])
}

/// Every endogenous variable as its own cluster with an identity value map.
fn identity_shape(model: &Scm) -> AlignmentSpec {
    AlignmentSpec {
        clusters: model
            .endogenous_names()
            .map(|v| ClusterSpec {
                high_var: v.to_string(),
                low_vars: vec![v.to_string()],
                value_map: model
                    .domain(v)
                    .expect("endogenous domain")
                    .iter()
                    .map(|x| (vec![x.clone()], x.clone()))
                    .collect(),
            })
            .collect(),
        dropped: Vec::new(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn interventional_distributions_are_normalized(seed in 0u64..10_000, vars in 2usize..6) {
        let model = random_model(seed, &small_config(vars));
        let iv = seeded_intervention(&model, seed);
        let dist = model.interventional_distribution(&iv).expect("small model");
        prop_assert_eq!(dist.mass(), Rational::one());

        for (var, value) in iv.iter() {
            let marginal = dist.marginal(std::slice::from_ref(&var.to_string())).expect("in scope");
            prop_assert_eq!(marginal.support_len(), 1);
            let event = [(var.to_string(), value.to_string())].into();
            prop_assert_eq!(marginal.probability(&event).expect("in scope"), Rational::one());
        }
    }

    #[test]
    fn tv_distance_is_a_bounded_symmetric_metric(seed in 0u64..10_000, vars in 2usize..5) {
        let model = random_model(seed, &small_config(vars));
        let a = model.observational_distribution().expect("small model");
        let b = model
            .interventional_distribution(&seeded_intervention(&model, seed))
            .expect("small model");

        prop_assert_eq!(a.tv_distance(&a).expect("same scope"), Rational::zero());
        let d = a.tv_distance(&b).expect("same scope");
        prop_assert!(d >= Rational::zero() && d <= Rational::one());
        prop_assert_eq!(d, b.tv_distance(&a).expect("same scope"));
    }

    #[test]
    fn pushforward_preserves_mass(seed in 0u64..10_000, vars in 2usize..6) {
        let model = Arc::new(random_model(seed, &small_config(vars)));
        let shape = random_cluster_shape(seed ^ 0x5eed, &model, 2);
        let result = quotient_high_model(
            Arc::clone(&model),
            &shape,
            AggregatorKind::PopulationWeightedMean,
        )
        .expect("random shapes are buildable");

        let low = model.observational_distribution().expect("small model");
        let pushed = result.alignment.push_distribution(&low).expect("full scope");
        prop_assert_eq!(pushed.mass(), Rational::one());
    }

    /// Quotienting along the identity shape reproduces the low model's
    /// behavior under every designated intervention.
    #[test]
    fn identity_quotient_matches_the_low_model(seed in 0u64..5_000, vars in 2usize..5) {
        let model = Arc::new(random_model(seed, &small_config(vars)));
        let shape = identity_shape(&model);
        let result = quotient_high_model(
            Arc::clone(&model),
            &shape,
            AggregatorKind::PopulationWeightedMean,
        )
        .expect("identity shapes are buildable");
        prop_assert!(result.report.pass);

        for iv in common::oracle_designated_interventions(&result.alignment) {
            let low = model.interventional_distribution(&iv).expect("small model");
            let high = result.model.interventional_distribution(&iv).expect("small model");
            prop_assert!(low.same_table(&high).expect("same variables"));
        }
    }

    /// A complete-cluster intervention is one of the preimages of the high
    /// intervention it induces.
    #[test]
    fn complete_cluster_interventions_are_among_their_own_preimages(
        seed in 0u64..5_000,
        vars in 2usize..6,
    ) {
        let model = Arc::new(random_model(seed, &small_config(vars)));
        let shape = random_cluster_shape(seed.wrapping_mul(31), &model, 2);
        let result = quotient_high_model(
            Arc::clone(&model),
            &shape,
            AggregatorKind::PopulationWeightedMean,
        )
        .expect("random shapes are buildable");
        let alignment = &result.alignment;

        for iv in common::oracle_designated_interventions(alignment) {
            if iv.is_empty() {
                continue;
            }
            let induced = alignment
                .induced_high_intervention(&iv)
                .expect("valid low intervention")
                .defined()
                .expect("complete clusters always induce");
            let preimages = alignment.preimage_interventions(&induced).expect("mapped");
            prop_assert!(preimages.contains(&iv));
        }
    }
}
