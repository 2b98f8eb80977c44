//! Seeded generators for models and alignment shapes.
//!
//! Stress tests need many structurally varied inputs, not hand-picked ones.
//! Everything here is driven by a ChaCha stream cipher, so a seed pins the
//! output exactly across runs and platforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::abstraction::{AlignmentSpec, ClusterSpec};
use crate::rational::rat;
use crate::scm::{ExogenousSpec, Scm, ScmSpec, VariableSpec};
use crate::util::ProductIter;

// ── Random models ────────────────────────────────────────────────────────────

/// Size knobs for [`random_model`].
#[derive(Debug, Clone)]
pub struct RandomModelConfig {
    /// Number of endogenous variables.
    pub variables: usize,
    /// Upper bound on endogenous parents per variable.
    pub max_parents: usize,
    /// Domain sizes are drawn from `2..=max_domain`.
    pub max_domain: usize,
}

impl Default for RandomModelConfig {
    fn default() -> Self {
        RandomModelConfig {
            variables: 4,
            max_parents: 2,
            max_domain: 3,
        }
    }
}

/// Build a random acyclic model, deterministically from `seed`.
///
/// Variables `V1..Vn` are created in topological order; each draws parents
/// from its predecessors plus one private noise term `U1..Un` with random
/// non-degenerate weights. Every table row picks a uniformly random output.
pub fn random_model(seed: u64, config: &RandomModelConfig) -> Scm {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut exogenous = Vec::new();
    let mut variables: Vec<VariableSpec> = Vec::new();
    let mut domains: Vec<Vec<String>> = Vec::new();

    for index in 0..config.variables {
        let name = format!("V{}", index + 1);
        let noise_name = format!("U{}", index + 1);

        let noise_size = rng.random_range(2..=config.max_domain.max(2));
        let noise_values: Vec<String> = (0..noise_size).map(|i| format!("u{i}")).collect();
        let raw: Vec<i64> = (0..noise_size).map(|_| rng.random_range(1..=4)).collect();
        let total: i64 = raw.iter().sum();
        exogenous.push(ExogenousSpec {
            name: noise_name.clone(),
            weights: noise_values
                .iter()
                .zip(&raw)
                .map(|(v, w)| (v.clone(), rat(*w, total)))
                .collect(),
        });

        let domain_size = rng.random_range(2..=config.max_domain.max(2));
        let domain: Vec<String> = (0..domain_size).map(|i| format!("x{i}")).collect();

        let parent_count = rng.random_range(0..=config.max_parents.min(index));
        let mut pool: Vec<usize> = (0..index).collect();
        for slot in 0..parent_count {
            let pick = rng.random_range(slot..pool.len());
            pool.swap(slot, pick);
        }
        let mut parent_indices: Vec<usize> = pool[..parent_count].to_vec();
        parent_indices.sort_unstable();

        let mut parents: Vec<String> = parent_indices
            .iter()
            .map(|&i| variables[i].name.clone())
            .collect();
        let mut axis_sizes: Vec<usize> = parent_indices.iter().map(|&i| domains[i].len()).collect();
        parents.push(noise_name);
        axis_sizes.push(noise_size);

        let mut table = Vec::new();
        for tuple in ProductIter::new(axis_sizes.clone()) {
            let mut key: Vec<String> = tuple
                .iter()
                .take(parent_indices.len())
                .enumerate()
                .map(|(slot, &value_index)| domains[parent_indices[slot]][value_index].clone())
                .collect();
            key.push(format!("u{}", tuple[parent_indices.len()]));
            let out = domain[rng.random_range(0..domain_size)].clone();
            table.push((key, out));
        }

        variables.push(VariableSpec {
            name,
            domain: domain.clone(),
            parents,
            table,
        });
        domains.push(domain);
    }

    Scm::build(ScmSpec {
        exogenous,
        variables,
    })
    .expect("generated spec is exhaustive and acyclic by construction")
}

// ── Random alignment shapes ──────────────────────────────────────────────────

/// Partition a model's variables into a random alignment shape.
///
/// Clusters are contiguous runs of the model's evaluation order, so the
/// induced precedence between clusters can never cycle. Value maps are total
/// by enumeration and surjective by forcing each high value onto at least one
/// randomly chosen row; remaining rows classify uniformly at random.
pub fn random_cluster_shape(seed: u64, model: &Scm, clusters: usize) -> AlignmentSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let order = model.evaluation_order();
    let count = clusters.clamp(1, order.len());

    let mut cuts: Vec<usize> = Vec::new();
    let mut gaps: Vec<usize> = (1..order.len()).collect();
    for slot in 0..count - 1 {
        let pick = rng.random_range(slot..gaps.len());
        gaps.swap(slot, pick);
    }
    cuts.extend_from_slice(&gaps[..count - 1]);
    cuts.sort_unstable();
    cuts.insert(0, 0);
    cuts.push(order.len());

    let mut specs = Vec::new();
    for (cluster_index, window) in cuts.windows(2).enumerate() {
        let low_vars: Vec<String> = order[window[0]..window[1]].to_vec();
        let axis_sizes: Vec<usize> = low_vars
            .iter()
            .map(|v| model.domain(v).expect("evaluation order names are real").len())
            .collect();
        let rows: Vec<Vec<String>> = ProductIter::new(axis_sizes.clone())
            .map(|tuple| {
                tuple
                    .iter()
                    .enumerate()
                    .map(|(axis, &value_index)| {
                        model.domain(&low_vars[axis]).expect("checked above")[value_index].clone()
                    })
                    .collect()
            })
            .collect();

        let image_size = rng.random_range(2..=3).min(rows.len());
        let image: Vec<String> = (0..image_size).map(|i| format!("y{i}")).collect();

        let mut assignments: Vec<String> = (0..rows.len())
            .map(|_| image[rng.random_range(0..image_size)].clone())
            .collect();
        let mut forced: Vec<usize> = (0..rows.len()).collect();
        for slot in 0..image_size {
            let pick = rng.random_range(slot..forced.len());
            forced.swap(slot, pick);
            assignments[forced[slot]] = image[slot].clone();
        }

        specs.push(ClusterSpec {
            high_var: format!("H{}", cluster_index + 1),
            low_vars,
            value_map: rows.into_iter().zip(assignments).collect(),
        });
    }

    AlignmentSpec {
        clusters: specs,
        dropped: Vec::new(),
    }
}

// ── Tests ────────────────────────────────────────────────────────────────────
