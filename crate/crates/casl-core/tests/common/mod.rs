//! Shared helpers for the integration suites: fixture loading plus a
//! brute-force oracle that recomputes interventional distributions,
//! pushforwards, and consistency verdicts from first principles, sharing no
//! code path with the engine under test.

#![allow(dead_code)]

pub mod docgen;

use std::collections::BTreeMap;
use std::path::PathBuf;

use casl_core::abstraction::Alignment;
use casl_core::dsl::{self, LoweredWorkspace};
use casl_core::scm::{ExogenousSpec, ScmSpec, VariableSpec};
use casl_core::{Assignment, Distribution, Intervention, Rational, Scm};
use num_traits::{One, Zero};

// ── Fixture corpus ───────────────────────────────────────────────────────────

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("..")
        .join("..")
        .join("fixtures")
}

pub fn fixture_text(name: &str) -> String {
    let path = fixtures_dir().join(name);
    std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("reading fixture {}: {e}", path.display()))
}

/// Loads a fixture that is expected to be valid, panicking with the full
/// diagnostic list otherwise.
pub fn load_fixture(name: &str) -> LoweredWorkspace {
    match dsl::load(&fixture_text(name)) {
        Ok(workspace) => workspace,
        Err(diagnostics) => {
            let listing: Vec<String> = diagnostics.iter().map(|d| d.to_string()).collect();
            panic!("fixture {name} should load cleanly:\n{}", listing.join("\n"));
        }
    }
}

/// File names (not paths) of every `.casl` file directly inside the given
/// corpus subdirectory; `""` means the corpus root. Sorted for determinism.
pub fn fixture_names(sub: &str) -> Vec<String> {
    let dir = if sub.is_empty() {
        fixtures_dir()
    } else {
        fixtures_dir().join(sub)
    };
    let mut names: Vec<String> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("listing {}: {e}", dir.display()))
        .filter_map(|entry| {
            let entry = entry.expect("directory entry");
            let path = entry.path();
            if path.is_file() && path.extension().is_some_and(|e| e == "casl") {
                Some(entry.file_name().to_string_lossy().into_owned())
            } else {
                None
            }
        })
        .collect();
    names.sort();
    names
}

// ── Brute-force oracle ──────────────────────────────────────────────────────
//
// The oracle deliberately avoids the engine's enumeration machinery: it
// recurses over exogenous assignments directly, solves each world by
// repeated "all parents known" sweeps instead of the precomputed evaluation
// order, and compares tables pointwise.

/// Every exogenous assignment with positive weight, paired with its product
/// weight.
fn exogenous_worlds(model: &Scm) -> Vec<(BTreeMap<String, String>, Rational)> {
    let exo: Vec<&str> = model.exogenous_names().collect();
    let mut out: Vec<(BTreeMap<String, String>, Rational)> =
        vec![(BTreeMap::new(), Rational::one())];
    for name in exo {
        let weights = model
            .exogenous_weights(name)
            .expect("exogenous variable has weights");
        let mut next = Vec::new();
        for (assignment, weight) in &out {
            for (value, w) in weights {
                if w.is_zero() {
                    continue;
                }
                let mut extended = assignment.clone();
                extended.insert(name.to_string(), value.clone());
                next.push((extended, weight * w));
            }
        }
        out = next;
    }
    out
}

/// Solves one world under an intervention by sweeping until every
/// endogenous variable has a value, without consulting the evaluation order.
fn solve_world(model: &Scm, exo: &BTreeMap<String, String>, iv: &Intervention) -> Assignment {
    let mut values: BTreeMap<String, String> = exo.clone();
    let mut remaining: Vec<String> = model.endogenous_names().map(str::to_string).collect();
    while !remaining.is_empty() {
        let before = remaining.len();
        remaining.retain(|var| {
            if let Some(forced) = iv.get(var) {
                values.insert(var.clone(), forced.to_string());
                return false;
            }
            let parents = model.parents(var).expect("endogenous variable has parents");
            if parents.iter().all(|p| values.contains_key(p)) {
                let key: Vec<String> = parents.iter().map(|p| values[p].clone()).collect();
                let table = model.table(var).expect("endogenous variable has a table");
                values.insert(var.clone(), table[&key].clone());
                return false;
            }
            true
        });
        assert!(remaining.len() < before, "oracle: no variable became ready");
    }
    model
        .endogenous_names()
        .map(|v| (v.to_string(), values[v].clone()))
        .collect()
}

/// Interventional distribution over all endogenous variables, built by
/// direct world enumeration.
pub fn oracle_interventional(model: &Scm, iv: &Intervention) -> Distribution {
    let mut acc: BTreeMap<Assignment, Rational> = BTreeMap::new();
    for (exo, weight) in exogenous_worlds(model) {
        let world = solve_world(model, &exo, iv);
        *acc.entry(world).or_insert_with(Rational::zero) += weight;
    }
    let scope: Vec<String> = model.endogenous_names().map(str::to_string).collect();
    let entries: Vec<(Vec<String>, Rational)> = acc
        .into_iter()
        .map(|(world, weight)| {
            let key: Vec<String> = scope.iter().map(|v| world[v].clone()).collect();
            (key, weight)
        })
        .collect();
    Distribution::new(scope, entries).expect("oracle table is well formed")
}

/// Pushes a low distribution through the alignment's value maps, one entry
/// at a time.
pub fn oracle_push(alignment: &Alignment, low: &Distribution) -> Distribution {
    let high_vars = alignment.mapped_high_vars();
    let low_scope = low.scope();
    let position: BTreeMap<&str, usize> = low_scope
        .iter()
        .enumerate()
        .map(|(i, v)| (v.as_str(), i))
        .collect();
    let mut acc: BTreeMap<Vec<String>, Rational> = BTreeMap::new();
    for (key, weight) in low.entries() {
        let image: Vec<String> = high_vars
            .iter()
            .map(|h| {
                let cluster = alignment.cluster(h).expect("mapped variable has a cluster");
                let cluster_key: Vec<String> = cluster
                    .low_vars()
                    .iter()
                    .map(|lv| key[position[lv.as_str()]].clone())
                    .collect();
                cluster.value_map()[&cluster_key].clone()
            })
            .collect();
        *acc.entry(image).or_insert_with(Rational::zero) += weight;
    }
    Distribution::new(high_vars, acc).expect("oracle push is well formed")
}

/// The family of low interventions a consistency verdict quantifies over:
/// the empty intervention plus every joint setting of every single cluster.
pub fn oracle_designated_interventions(alignment: &Alignment) -> Vec<Intervention> {
    let mut out = vec![Intervention::empty()];
    for high_var in alignment.mapped_high_vars() {
        let cluster = alignment.cluster(&high_var).expect("mapped variable");
        let mut combos: Vec<Vec<(String, String)>> = vec![Vec::new()];
        for low_var in cluster.low_vars() {
            let domain = alignment
                .low()
                .domain(low_var)
                .expect("cluster variable is endogenous");
            combos = combos
                .iter()
                .flat_map(|combo| {
                    domain.iter().map(move |value| {
                        let mut extended = combo.clone();
                        extended.push((low_var.clone(), value.clone()));
                        extended
                    })
                })
                .collect();
        }
        for combo in combos {
            out.push(Intervention::from_pairs(combo));
        }
    }
    out.sort();
    out.dedup();
    out
}

/// The high intervention matching a designated low intervention: empty for
/// empty, otherwise the value-map image of the one fully set cluster.
pub fn oracle_induced(alignment: &Alignment, iv: &Intervention) -> Intervention {
    if iv.is_empty() {
        return Intervention::empty();
    }
    for high_var in alignment.mapped_high_vars() {
        let cluster = alignment.cluster(&high_var).expect("mapped variable");
        let key: Option<Vec<String>> = cluster
            .low_vars()
            .iter()
            .map(|lv| iv.get(lv).map(str::to_string))
            .collect();
        if let Some(key) = key {
            assert_eq!(
                iv.len(),
                cluster.low_vars().len(),
                "designated intervention sets exactly one cluster"
            );
            let value = cluster.value_map()[&key].clone();
            return Intervention::from_pairs([(high_var, value)]);
        }
    }
    panic!("designated intervention does not cover a cluster");
}

/// Consistency verdict computed entirely with oracle machinery: for every
/// designated intervention, the pushed low table must equal the high table
/// marginalized onto the mapped variables.
pub fn oracle_consistency_pass(alignment: &Alignment) -> bool {
    let high_vars = alignment.mapped_high_vars();
    for iv in oracle_designated_interventions(alignment) {
        let induced = oracle_induced(alignment, &iv);
        let pushed = oracle_push(alignment, &oracle_interventional(alignment.low(), &iv));
        let high_full = oracle_interventional(alignment.high(), &induced);

        let position: BTreeMap<&str, usize> = high_full
            .scope()
            .iter()
            .enumerate()
            .map(|(i, v)| (v.as_str(), i))
            .collect();
        let mut acc: BTreeMap<Vec<String>, Rational> = BTreeMap::new();
        for (key, weight) in high_full.entries() {
            let projected: Vec<String> = high_vars
                .iter()
                .map(|v| key[position[v.as_str()]].clone())
                .collect();
            *acc.entry(projected).or_insert_with(Rational::zero) += weight;
        }
        let high_marginal =
            Distribution::new(high_vars.clone(), acc).expect("oracle marginal is well formed");

        if !pushed
            .same_table(&high_marginal)
            .expect("tables share a scope")
        {
            return false;
        }
    }
    true
}

// ── Model reconstruction ────────────────────────────────────────────────────

/// Rebuilds a buildable spec from a model's public accessors, so tests can
/// perturb a model and construct the variant through the normal front door.
pub fn respec(model: &Scm) -> ScmSpec {
    let exogenous = model
        .exogenous_names()
        .map(|name| ExogenousSpec {
            name: name.to_string(),
            weights: model
                .exogenous_weights(name)
                .expect("exogenous variable has weights")
                .iter()
                .map(|(v, w)| (v.clone(), w.clone()))
                .collect(),
        })
        .collect();
    let variables = model
        .evaluation_order()
        .iter()
        .map(|name| VariableSpec {
            name: name.clone(),
            domain: model.domain(name).expect("endogenous domain").to_vec(),
            parents: model.parents(name).expect("endogenous parents").to_vec(),
            table: model
                .table(name)
                .expect("endogenous table")
                .iter()
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        })
        .collect();
    ScmSpec {
        exogenous,
        variables,
    }
}
