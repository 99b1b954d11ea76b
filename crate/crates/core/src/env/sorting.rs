//! Sorting substrings of `=` by length, using adjacent swaps and a full reversal.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{problem_rng, ActionEdge, EnvError, Environment};

const NAME: &str = "sorting";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortList {
    pub lengths: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SortAxiom {
    Swap(usize),
    Reverse,
}

impl SortList {
    pub fn parse(text: &str) -> Result<Self, EnvError> {
        let inner = text
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| EnvError::parse(NAME, text, 0, "expected [...]"))?;
        let mut lengths = Vec::new();
        let mut pos = 1;
        for run in inner.split('|') {
            if run.is_empty() || run.bytes().any(|b| b != b'=') {
                return Err(EnvError::parse(NAME, text, pos, "expected a run of '='"));
            }
            lengths.push(run.len());
            pos += run.len() + 1;
        }
        let mut seen = vec![false; lengths.len() + 1];
        for &n in &lengths {
            if n > lengths.len() || seen[n] {
                return Err(EnvError::parse(
                    NAME,
                    text,
                    0,
                    "lengths must be a permutation of 1..L",
                ));
            }
            seen[n] = true;
        }
        Ok(SortList { lengths })
    }

    pub fn is_sorted(&self) -> bool {
        self.lengths.windows(2).all(|w| w[0] < w[1])
    }

    pub fn inversions(&self) -> usize {
        let n = self.lengths.len();
        let mut count = 0;
        for i in 0..n {
            for j in i + 1..n {
                if self.lengths[i] > self.lengths[j] {
                    count += 1;
                }
            }
        }
        count
    }

    pub fn apply(&self, axiom: SortAxiom) -> Result<SortList, EnvError> {
        let mut lengths = self.lengths.clone();
        match axiom {
            SortAxiom::Swap(i) => {
                if i + 1 >= lengths.len() {
                    return Err(EnvError::inapplicable(
                        format!("swap {i}"),
                        format!("list has {} elements", lengths.len()),
                    ));
                }
                lengths.swap(i, i + 1);
            }
            SortAxiom::Reverse => lengths.reverse(),
        }
        Ok(SortList { lengths })
    }
}

impl std::fmt::Display for SortList {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("[")?;
        for (i, &n) in self.lengths.iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            for _ in 0..n {
                f.write_str("=")?;
            }
        }
        f.write_str("]")
    }
}

pub fn generate_sort_problem(seed: u64) -> SortList {
    let mut rng = problem_rng(seed);
    let len = rng.random_range(2..=11);
    let mut lengths: Vec<usize> = (1..=len).collect();
    lengths.shuffle(&mut rng);
    SortList { lengths }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Sorting;

impl Environment for Sorting {
    fn name(&self) -> &'static str {
        NAME
    }

    fn generate(&self, seed: u64) -> String {
        generate_sort_problem(seed).to_string()
    }

    fn expand(&self, state: &str) -> Result<Vec<ActionEdge>, EnvError> {
        let list = SortList::parse(state)?;
        if list.is_sorted() {
            return Ok(Vec::new());
        }
        let mut edges = Vec::with_capacity(list.lengths.len());
        for i in 0..list.lengths.len() - 1 {
            let next = list.apply(SortAxiom::Swap(i))?;
            edges.push(ActionEdge::new(format!("swap {i}"), next.to_string()));
        }
        let next = list.apply(SortAxiom::Reverse)?;
        edges.push(ActionEdge::new("reverse", next.to_string()));
        Ok(edges)
    }

    fn is_solved(&self, state: &str) -> Result<bool, EnvError> {
        Ok(SortList::parse(state)?.is_sorted())
    }

    fn canonicalize(&self, state: &str) -> Result<String, EnvError> {
        Ok(SortList::parse(state)?.to_string())
    }
}
