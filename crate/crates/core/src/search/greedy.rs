use std::collections::HashSet;

use crate::env::{Environment, TraceStep};

use super::{Policy, SearchOutcome};

/// Follows the most probable successor for up to `max_depth` steps.
///
/// Ties go to the earlier action. Returning to a state already on the path
/// counts as failure.
pub fn greedy_rollout(
    env: &dyn Environment,
    policy: &dyn Policy,
    start: &str,
    max_depth: usize,
) -> SearchOutcome {
    let mut out = SearchOutcome::default();
    let mut steps = vec![TraceStep::start(start)];
    let mut visited = HashSet::from([start.to_string()]);
    let mut state = start.to_string();
    for depth in 0..=max_depth {
        if env.is_solved(&state).unwrap_or(false) {
            out.solution = Some(steps);
            return out;
        }
        if depth == max_depth {
            break;
        }
        let Ok(edges) = env.expand(&state) else { break };
        if edges.is_empty() {
            break;
        }
        out.edges_expanded += edges.len() as u64;
        let cands: Vec<String> = edges.iter().map(|e| e.next_state.clone()).collect();
        let lps = policy.log_probs(&state, &cands);
        let mut best = 0;
        for (i, lp) in lps.iter().enumerate() {
            if *lp > lps[best] {
                best = i;
            }
        }
        let e = edges.into_iter().nth(best).expect("non-empty");
        if !visited.insert(e.next_state.clone()) {
            break;
        }
        state = e.next_state.clone();
        steps.push(TraceStep::after(e.next_state, e.label));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::sorting::{SortList, Sorting};
    use crate::search::{ScoreFnPolicy, UniformPolicy};

    #[test]
    fn inversion_oracle_always_sorts() {
        let p = ScoreFnPolicy(|_: &str, c: &str| -(SortList::parse(c).unwrap().inversions() as f64));
        for seed in 0..200 {
            let start = crate::env::sorting::generate_sort_problem(seed).to_string();
            assert!(greedy_rollout(&Sorting, &p, &start, 60).solved(), "{start}");
        }
    }

    #[test]
    fn uniform_policy_loops_on_swaps() {
        // Always picking swap 0 undoes itself on the second step.
        let o = greedy_rollout(&Sorting, &UniformPolicy, "[===|==|=]", 30);
        assert!(!o.solved());
    }
}
