//! Small internal iteration and ordering helpers.

use std::collections::{BTreeMap, BTreeSet};

/// Unique topological order for a dependency map (`node -> prerequisites`),
/// taking the lexicographically smallest ready node at every step. On a
/// cycle, returns one concrete cycle path whose first and last entries
/// match.
pub(crate) fn lexicographic_topological_order(
    deps: &BTreeMap<String, BTreeSet<String>>,
) -> Result<Vec<String>, Vec<String>> {
    let mut remaining: BTreeMap<&str, BTreeSet<&str>> = deps
        .iter()
        .map(|(node, reqs)| {
            (
                node.as_str(),
                reqs.iter()
                    .filter(|r| deps.contains_key(*r))
                    .map(String::as_str)
                    .collect(),
            )
        })
        .collect();
    let mut dependents: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (node, reqs) in &remaining {
        for req in reqs {
            dependents.entry(req).or_default().push(node);
        }
    }

    let mut ready: BTreeSet<&str> = remaining
        .iter()
        .filter(|(_, reqs)| reqs.is_empty())
        .map(|(node, _)| *node)
        .collect();
    let mut order = Vec::new();
    while let Some(&node) = ready.iter().next() {
        ready.remove(node);
        order.push(node.to_string());
        if let Some(children) = dependents.get(node) {
            for &child in children {
                let reqs = remaining.get_mut(child).expect("known child");
                reqs.remove(node);
                if reqs.is_empty() {
                    ready.insert(child);
                }
            }
        }
        remaining.remove(node);
    }

    let stuck: BTreeSet<&str> = remaining
        .iter()
        .filter(|(_, reqs)| !reqs.is_empty())
        .map(|(node, _)| *node)
        .collect();
    if stuck.is_empty() {
        return Ok(order);
    }

    // Walk prerequisites inside the stuck set, smallest first, until a node
    // repeats; the walked segment is a concrete cycle.
    let start = *stuck.iter().next().expect("nonempty stuck set");
    let mut path = vec![start];
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    seen.insert(start, 0);
    let mut current = start;
    loop {
        let next = *remaining[current]
            .iter()
            .find(|req| stuck.contains(*req))
            .expect("stuck nodes keep a stuck prerequisite");
        if let Some(&at) = seen.get(next) {
            let mut cycle: Vec<String> = path[at..].iter().map(|s| s.to_string()).collect();
            cycle.push(next.to_string());
            // Reverse so the arrows read from prerequisite to dependent.
            cycle.reverse();
            return Err(cycle);
        }
        seen.insert(next, path.len());
        path.push(next);
        current = next;
    }
}

/// Odometer over index tuples `[0..sizes[0]) x [0..sizes[1]) x ...` in
/// lexicographic order. An empty size list yields exactly one empty tuple.
pub(crate) struct ProductIter {
    sizes: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl ProductIter {
    pub(crate) fn new(sizes: Vec<usize>) -> Self {
        let next = if sizes.iter().any(|&s| s == 0) {
            None
        } else {
            Some(vec![0; sizes.len()])
        };
        ProductIter { sizes, next }
    }

    /// Total number of tuples, saturating at `u128::MAX`.
    pub(crate) fn count_tuples(sizes: &[usize]) -> u128 {
        sizes
            .iter()
            .fold(1u128, |acc, &s| acc.saturating_mul(s as u128))
    }
}

impl Iterator for ProductIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.clone()?;
        let mut bumped = current.clone();
        let mut pos = self.sizes.len();
        loop {
            if pos == 0 {
                self.next = None;
                break;
            }
            pos -= 1;
            bumped[pos] += 1;
            if bumped[pos] < self.sizes[pos] {
                self.next = Some(bumped);
                break;
            }
            bumped[pos] = 0;
        }
        Some(current)
    }
}
