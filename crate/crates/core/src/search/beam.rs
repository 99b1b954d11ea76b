use std::collections::{HashMap, HashSet};

use crate::env::Environment;

use super::{trace_back, Candidate, Policy, SearchOutcome};

/// Beam search scored by cumulative log-probability.
///
/// Each depth expands every beam state, records all successors as
/// candidates, and keeps the `beam_size` best successors that were not in
/// an earlier beam. Ties go to the lexicographically smaller state and a
/// state reached twice keeps its higher score. The search stops at the
/// first depth that produces a solved state, returning the best-scoring
/// one.
pub fn beam_search(
    env: &dyn Environment,
    policy: &dyn Policy,
    start: &str,
    beam_size: usize,
    max_depth: usize,
) -> SearchOutcome {
    let beam_size = beam_size.max(1);
    let mut out = SearchOutcome::default();
    // (state, label, parent index) for every beam member ever kept.
    let mut nodes: Vec<(String, Option<String>, usize)> = vec![(start.to_string(), None, 0)];
    if env.is_solved(start).unwrap_or(false) {
        out.solution = Some(trace_back(&nodes, 0));
        return out;
    }
    let mut in_beam: HashSet<String> = HashSet::from([start.to_string()]);
    let mut beam: Vec<(usize, f64)> = vec![(0, 0.0)];

    for _ in 0..max_depth {
        let mut expansions = Vec::with_capacity(beam.len());
        for &(id, score) in &beam {
            let Ok(edges) = env.expand(&nodes[id].0) else { continue };
            if edges.is_empty() {
                continue;
            }
            out.edges_expanded += edges.len() as u64;
            expansions.push((id, score, edges));
        }
        if expansions.is_empty() {
            break;
        }
        let next_states: Vec<Vec<String>> = expansions
            .iter()
            .map(|(_, _, e)| e.iter().map(|e| e.next_state.clone()).collect())
            .collect();
        let queries: Vec<(&str, &[String])> = expansions
            .iter()
            .zip(&next_states)
            .map(|((id, _, _), c)| (nodes[*id].0.as_str(), c.as_slice()))
            .collect();
        let log_probs = policy.log_probs_batch(&queries);

        let mut step_candidates = Vec::new();
        // state -> (score, parent id, label)
        let mut best: HashMap<String, (f64, usize, String)> = HashMap::new();
        for ((id, score, edges), lps) in expansions.into_iter().zip(log_probs) {
            for (e, lp) in edges.into_iter().zip(lps) {
                out.nodes_generated += 1;
                step_candidates.push(Candidate {
                    state: e.next_state.clone(),
                    parent: nodes[id].0.clone(),
                });
                if in_beam.contains(&e.next_state) {
                    continue;
                }
                let s = score + lp;
                match best.get_mut(&e.next_state) {
                    Some(entry) if entry.0 >= s => {}
                    Some(entry) => *entry = (s, id, e.label),
                    None => {
                        best.insert(e.next_state, (s, id, e.label));
                    }
                }
            }
        }
        out.visited_per_step.push(step_candidates);

        let mut ranked: Vec<(String, (f64, usize, String))> = best.into_iter().collect();
        ranked.sort_by(|a, b| b.1 .0.total_cmp(&a.1 .0).then_with(|| a.0.cmp(&b.0)));

        if let Some(pos) = ranked
            .iter()
            .position(|(s, _)| env.is_solved(s).unwrap_or(false))
        {
            let (s, (_, parent, label)) = ranked.swap_remove(pos);
            nodes.push((s, Some(label), parent));
            out.solution = Some(trace_back(&nodes, nodes.len() - 1));
            return out;
        }

        ranked.truncate(beam_size);
        beam.clear();
        for (s, (score, parent, label)) in ranked {
            in_beam.insert(s.clone());
            nodes.push((s, Some(label), parent));
            beam.push((nodes.len() - 1, score));
        }
        if beam.is_empty() {
            break;
        }
    }
    out
}
