use std::collections::HashSet;
use std::hash::{DefaultHasher, Hash, Hasher};

use crate::env::{Environment, TraceStep, MAX_DEPTH};

use super::SearchOutcome;

fn fingerprint(s: &str) -> u128 {
    let mut a = DefaultHasher::new();
    s.hash(&mut a);
    let mut b = DefaultHasher::new();
    0x9e37_79b9_u32.hash(&mut b);
    s.hash(&mut b);
    ((a.finish() as u128) << 64) | b.finish() as u128
}

/// Breadth-first search that gives up after examining `edge_budget` edges.
///
/// States are deduplicated, so a returned solution is a shortest one. Only
/// a fingerprint and a back-pointer are kept per state, and the solution is
/// rebuilt by replaying the recorded action indices.
pub fn bfs(env: &dyn Environment, start: &str, edge_budget: u64) -> SearchOutcome {
    let mut out = SearchOutcome::default();
    if env.is_solved(start).unwrap_or(false) {
        out.solution = Some(vec![TraceStep::start(start)]);
        return out;
    }
    let mut seen = HashSet::new();
    seen.insert(fingerprint(start));
    // (parent, action index); node 0 is the root.
    let mut nodes: Vec<(u32, u32)> = vec![(0, u32::MAX)];
    let mut frontier: Vec<(String, u32)> = vec![(start.to_string(), 0)];
    for _depth in 1..=MAX_DEPTH {
        let mut next = Vec::new();
        for (state, id) in &frontier {
            let Ok(edges) = env.expand(state) else { continue };
            for (k, e) in edges.into_iter().enumerate() {
                if out.edges_expanded >= edge_budget {
                    return out;
                }
                out.edges_expanded += 1;
                if !seen.insert(fingerprint(&e.next_state)) {
                    continue;
                }
                let nid = nodes.len() as u32;
                nodes.push((*id, k as u32));
                out.nodes_generated += 1;
                if env.is_solved(&e.next_state).unwrap_or(false) {
                    out.solution = Some(replay(env, start, &nodes, nid));
                    return out;
                }
                next.push((e.next_state, nid));
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    out
}

fn replay(env: &dyn Environment, start: &str, nodes: &[(u32, u32)], mut id: u32) -> Vec<TraceStep> {
    let mut actions = Vec::new();
    while id != 0 {
        let (p, k) = nodes[id as usize];
        actions.push(k as usize);
        id = p;
    }
    actions.reverse();
    let mut steps = vec![TraceStep::start(start)];
    let mut state = start.to_string();
    for k in actions {
        let e = env.expand(&state).expect("replayed state parses").swap_remove(k);
        state = e.next_state.clone();
        steps.push(TraceStep::after(e.next_state, e.label));
    }
    steps
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::sorting::{SortList, Sorting};
    use crate::env::validate_trace;

    #[test]
    fn one_step_and_already_solved() {
        let o = bfs(&Sorting, "[==|=]", 100);
        assert_eq!(o.solution_len(), Some(1));
        let o = bfs(&Sorting, "[=|==]", 100);
        assert_eq!(o.solution_len(), Some(0));
        assert_eq!(o.edges_expanded, 0);
    }

    #[test]
    fn budget_exhaustion_returns_nothing() {
        let o = bfs(&Sorting, "[=====|====|===|==|=|======]", 3);
        assert!(o.solution.is_none());
        assert_eq!(o.edges_expanded, 3);
    }

    // Optimum with adjacent swaps and one reversal: min(inv(p), 1 + inv(rev p)).
    #[test]
    fn matches_inversion_oracle_on_short_lists() {
        for seed in 0..100 {
            let mut l = crate::env::sorting::generate_sort_problem(seed);
            l.lengths.truncate(6);
            let n = l.lengths.clone();
            let mut ranks: Vec<usize> = (0..n.len()).collect();
            ranks.sort_by_key(|&i| n[i]);
            let mut lengths = vec![0; n.len()];
            for (r, &i) in ranks.iter().enumerate() {
                lengths[i] = r + 1;
            }
            let l = SortList { lengths };
            let start = l.to_string();
            let o = bfs(&Sorting, &start, 10_000_000);
            let steps = o.solution.expect("small lists are always solved");
            validate_trace(&Sorting, &steps).unwrap();
            let rev = l.apply(crate::env::sorting::SortAxiom::Reverse).unwrap();
            let oracle = if l.is_sorted() {
                0
            } else {
                l.inversions().min(1 + rev.inversions())
            };
            assert_eq!(steps.len() - 1, oracle, "{start}");
        }
    }
}
