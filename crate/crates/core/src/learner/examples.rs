use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::nn::ContrastiveExample;
use crate::search::SearchOutcome;

use super::LearnError;

/// Which beam candidates serve as negatives for a solution step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NegativeMode {
    /// Every candidate generated at that depth.
    #[default]
    All,
    /// Only candidates generated from the solution state itself.
    Local,
}

/// One example per solution step. Negatives are distinct, never equal the
/// positive, keep generation order and are truncated to `cap`.
pub fn extract_examples(
    outcome: &SearchOutcome,
    mode: NegativeMode,
    cap: usize,
) -> Result<Vec<ContrastiveExample>, LearnError> {
    let solution = outcome.solution.as_ref().ok_or(LearnError::NoSolution)?;
    let mut out = Vec::with_capacity(solution.len().saturating_sub(1));
    for (i, pair) in solution.windows(2).enumerate() {
        let (anchor, positive) = (&pair[0].state, &pair[1].state);
        let mut seen = HashSet::from([positive.as_str()]);
        let mut negatives = Vec::new();
        for c in outcome.visited_per_step.get(i).into_iter().flatten() {
            if negatives.len() >= cap {
                break;
            }
            if mode == NegativeMode::Local && &c.parent != anchor {
                continue;
            }
            if seen.insert(c.state.as_str()) {
                negatives.push(c.state.clone());
            }
        }
        out.push(ContrastiveExample {
            anchor: anchor.clone(),
            positive: positive.clone(),
            negatives,
        });
    }
    Ok(out)
}

/// Reward targets: 1 for states on the solution path, 0 for every other
/// state the search generated.
pub fn value_targets(outcome: &SearchOutcome) -> Result<Vec<(String, f64)>, LearnError> {
    let solution = outcome.solution.as_ref().ok_or(LearnError::NoSolution)?;
    let on_path: HashSet<&str> = solution.iter().map(|s| s.state.as_str()).collect();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for s in solution {
        if seen.insert(s.state.as_str()) {
            out.push((s.state.clone(), 1.0));
        }
    }
    for c in outcome.visited_per_step.iter().flatten() {
        if !on_path.contains(c.state.as_str()) && seen.insert(c.state.as_str()) {
            out.push((c.state.clone(), 0.0));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::sorting::{generate_sort_problem, Sorting};
    use crate::search::{beam_search, UniformPolicy};

    #[test]
    fn single_step_solution_uses_all_other_candidates() {
        let o = beam_search(&Sorting, &UniformPolicy, "[=|===|==]", 100, 5);
        assert_eq!(o.solution_len(), Some(1));
        let ex = extract_examples(&o, NegativeMode::All, 512).unwrap();
        assert_eq!(ex.len(), 1);
        let distinct: HashSet<_> = o.visited_per_step[0].iter().map(|c| &c.state).collect();
        assert_eq!(ex[0].negatives.len(), distinct.len() - 1);
        assert_eq!(ex[0].positive, "[=|==|===]");
    }

    #[test]
    fn duplicate_edges_leave_no_negatives() {
        let o = beam_search(&Sorting, &UniformPolicy, "[==|=]", 100, 5);
        let ex = extract_examples(&o, NegativeMode::All, 512).unwrap();
        assert_eq!(ex.len(), 1);
        assert!(ex[0].negatives.is_empty());
    }

    #[test]
    fn local_is_a_subset_of_all() {
        for seed in 0..40 {
            let start = generate_sort_problem(seed).to_string();
            let o = beam_search(&Sorting, &UniformPolicy, &start, 5, 12);
            let (Ok(all), Ok(local)) = (
                extract_examples(&o, NegativeMode::All, 512),
                extract_examples(&o, NegativeMode::Local, 512),
            ) else {
                continue;
            };
            for (a, l) in all.iter().zip(&local) {
                assert!(l.negatives.iter().all(|n| a.negatives.contains(n)));
                assert!(!a.negatives.contains(&a.positive));
            }
        }
    }

    #[test]
    fn no_solution_is_an_error() {
        let o = SearchOutcome::default();
        assert!(matches!(
            extract_examples(&o, NegativeMode::All, 8),
            Err(LearnError::NoSolution)
        ));
        assert!(value_targets(&o).is_err());
    }

    #[test]
    fn value_targets_mark_the_path() {
        let o = beam_search(&Sorting, &UniformPolicy, "[=|===|==]", 100, 5);
        let t = value_targets(&o).unwrap();
        let ones: Vec<_> = t.iter().filter(|(_, r)| *r == 1.0).map(|(s, _)| s.as_str()).collect();
        assert_eq!(ones, vec!["[=|===|==]", "[=|==|===]"]);
        assert!(t.len() > 2);
    }

    #[test]
    fn cap_bounds_negatives() {
        let o = beam_search(&Sorting, &UniformPolicy, "[======|=====|====|===|==|=]", 3, 30);
        for e in extract_examples(&o, NegativeMode::All, 2).unwrap() {
            assert!(e.negatives.len() <= 2);
        }
    }
}
