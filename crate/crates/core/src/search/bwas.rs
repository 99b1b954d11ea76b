use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::env::Environment;

use super::{trace_back, Policy, SearchOutcome};

/// What `h(n)` is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Heuristic {
    /// `-log p(n | parent)`.
    #[default]
    Step,
    /// Sum of `-log p` along the path from the root.
    Path,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BwasConfig {
    pub weight: f64,
    pub batch_size: usize,
    pub node_budget: u64,
    pub heuristic: Heuristic,
    pub max_depth: usize,
}

impl Default for BwasConfig {
    fn default() -> Self {
        BwasConfig {
            weight: 0.6,
            batch_size: 100,
            node_budget: 100_000,
            heuristic: Heuristic::Step,
            max_depth: usize::MAX,
        }
    }
}

struct Open {
    priority: f64,
    order: u64,
    id: usize,
}

impl PartialEq for Open {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Open {}
impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Open {
    // Reversed so the max-heap pops the lowest priority, oldest first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .priority
            .total_cmp(&self.priority)
            .then_with(|| other.order.cmp(&self.order))
    }
}

/// Batch weighted A*: pops the `batch_size` lowest `λ·g + h` open nodes per
/// iteration and scores all of their successors in one policy call.
///
/// `node_budget` counts generated nodes. A successor is goal-tested when
/// generated, and a state is re-opened only when reached by a shorter path.
pub fn bwas(
    env: &dyn Environment,
    policy: &dyn Policy,
    start: &str,
    config: &BwasConfig,
) -> SearchOutcome {
    let mut out = SearchOutcome::default();
    let mut nodes: Vec<(String, Option<String>, usize)> = vec![(start.to_string(), None, 0)];
    if env.is_solved(start).unwrap_or(false) {
        out.solution = Some(trace_back(&nodes, 0));
        return out;
    }
    // Per node: path length and accumulated -log p.
    let mut info: Vec<(usize, f64)> = vec![(0, 0.0)];
    let mut best_g: HashMap<String, usize> = HashMap::from([(start.to_string(), 0)]);
    let mut open = BinaryHeap::new();
    let mut order = 0u64;
    open.push(Open {
        priority: 0.0,
        order,
        id: 0,
    });

    while !open.is_empty() {
        let mut batch = Vec::new();
        while batch.len() < config.batch_size.max(1) {
            let Some(o) = open.pop() else { break };
            let (g, _) = info[o.id];
            if best_g.get(&nodes[o.id].0).is_some_and(|&b| b < g) || g >= config.max_depth {
                continue;
            }
            batch.push(o.id);
        }
        if batch.is_empty() {
            break;
        }
        let mut expanded = Vec::with_capacity(batch.len());
        for id in batch {
            let Ok(edges) = env.expand(&nodes[id].0) else { continue };
            out.edges_expanded += edges.len() as u64;
            expanded.push((id, edges));
        }
        let states: Vec<Vec<String>> = expanded
            .iter()
            .map(|(_, e)| e.iter().map(|e| e.next_state.clone()).collect())
            .collect();
        let queries: Vec<(&str, &[String])> = expanded
            .iter()
            .zip(&states)
            .map(|((id, _), c)| (nodes[*id].0.as_str(), c.as_slice()))
            .collect();
        let log_probs = policy.log_probs_batch(&queries);

        for ((id, edges), lps) in expanded.into_iter().zip(log_probs) {
            let (g, acc) = info[id];
            for (e, lp) in edges.into_iter().zip(lps) {
                if out.nodes_generated >= config.node_budget {
                    return out;
                }
                out.nodes_generated += 1;
                let g2 = g + 1;
                if best_g.get(&e.next_state).is_some_and(|&b| b <= g2) {
                    continue;
                }
                best_g.insert(e.next_state.clone(), g2);
                let solved = env.is_solved(&e.next_state).unwrap_or(false);
                let acc2 = acc - lp;
                let h = match config.heuristic {
                    Heuristic::Step => -lp,
                    Heuristic::Path => acc2,
                };
                nodes.push((e.next_state, Some(e.label), id));
                info.push((g2, acc2));
                let nid = nodes.len() - 1;
                if solved {
                    out.solution = Some(trace_back(&nodes, nid));
                    return out;
                }
                order += 1;
                open.push(Open {
                    priority: config.weight * g2 as f64 + h,
                    order,
                    id: nid,
                });
            }
        }
    }
    out
}
