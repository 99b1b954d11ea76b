//! Base-3 addition over a sequence of digit/power tokens.
//!
//! A token `c3` stands for 2·3³; digits `a`, `b`, `c` are 0, 1, 2 and powers
//! are single decimal digits. The state `#(c3 b5 b3)` is the sum of its
//! tokens.

use rand::Rng;

use super::{problem_rng, ActionEdge, EnvError, Environment};

const NAME: &str = "ternary-addition";
pub const MAX_POWER: u8 = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Token {
    pub digit: u8,
    pub power: u8,
}

impl std::fmt::Display for Token {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}{}", (b'a' + self.digit) as char, self.power)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TernarySequence {
    pub tokens: Vec<Token>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TernaryAxiom {
    Swap(usize),
    Comb(usize),
    Del(usize),
}

impl TernarySequence {
    pub fn parse(text: &str) -> Result<Self, EnvError> {
        let inner = text
            .strip_prefix("#(")
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| EnvError::parse(NAME, text, 0, "expected #(...)"))?;
        let mut tokens = Vec::new();
        if inner.is_empty() {
            return Ok(TernarySequence { tokens });
        }
        let mut pos = 2;
        for tok in inner.split(' ') {
            let b = tok.as_bytes();
            if b.len() != 2 || !(b'a'..=b'c').contains(&b[0]) || !b[1].is_ascii_digit() {
                return Err(EnvError::parse(NAME, text, pos, format!("bad token {tok:?}")));
            }
            tokens.push(Token {
                digit: b[0] - b'a',
                power: b[1] - b'0',
            });
            pos += tok.len() + 1;
        }
        Ok(TernarySequence { tokens })
    }

    pub fn value(&self) -> u64 {
        self.tokens
            .iter()
            .map(|t| t.digit as u64 * 3u64.pow(t.power as u32))
            .sum()
    }

    /// Nonzero digits with strictly increasing powers.
    pub fn is_solved(&self) -> bool {
        self.tokens.iter().all(|t| t.digit != 0)
            && self.tokens.windows(2).all(|w| w[0].power < w[1].power)
    }

    pub fn apply(&self, axiom: TernaryAxiom) -> Result<TernarySequence, EnvError> {
        let n = self.tokens.len();
        let mut tokens = self.tokens.clone();
        match axiom {
            TernaryAxiom::Swap(i) => {
                if i + 1 >= n {
                    return Err(EnvError::inapplicable(format!("swap {i}"), "index out of range"));
                }
                tokens.swap(i, i + 1);
            }
            TernaryAxiom::Comb(i) => {
                if i + 1 >= n {
                    return Err(EnvError::inapplicable(format!("comb {i}"), "index out of range"));
                }
                let (l, r) = (tokens[i], tokens[i + 1]);
                if l.power != r.power {
                    return Err(EnvError::inapplicable(
                        format!("comb {i}"),
                        format!("powers {} and {} differ", l.power, r.power),
                    ));
                }
                if l.power >= MAX_POWER {
                    return Err(EnvError::inapplicable(
                        format!("comb {i}"),
                        "carry would exceed the largest printable power",
                    ));
                }
                let sum = l.digit + r.digit;
                tokens[i] = Token {
                    digit: sum % 3,
                    power: l.power,
                };
                tokens[i + 1] = Token {
                    digit: sum / 3,
                    power: l.power + 1,
                };
            }
            TernaryAxiom::Del(i) => {
                if i >= n || tokens[i].digit != 0 {
                    return Err(EnvError::inapplicable(format!("del {i}"), "no zero digit there"));
                }
                tokens.remove(i);
            }
        }
        Ok(TernarySequence { tokens })
    }
}

impl std::fmt::Display for TernarySequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("#(")?;
        for (i, t) in self.tokens.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str(")")
    }
}

pub fn ternary_value(text: &str) -> Result<u64, EnvError> {
    Ok(TernarySequence::parse(text)?.value())
}

pub fn generate_ternary_problem(seed: u64) -> TernarySequence {
    let mut rng = problem_rng(seed);
    let len = rng.random_range(1..=15);
    let tokens = (0..len)
        .map(|_| Token {
            digit: rng.random_range(0..3),
            power: rng.random_range(0..=6),
        })
        .collect();
    TernarySequence { tokens }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TernaryAddition;

impl Environment for TernaryAddition {
    fn name(&self) -> &'static str {
        NAME
    }

    fn generate(&self, seed: u64) -> String {
        generate_ternary_problem(seed).to_string()
    }

    fn expand(&self, state: &str) -> Result<Vec<ActionEdge>, EnvError> {
        let seq = TernarySequence::parse(state)?;
        if seq.is_solved() {
            return Ok(Vec::new());
        }
        let t = &seq.tokens;
        let mut edges = Vec::new();
        for i in 0..t.len().saturating_sub(1) {
            let next = seq.apply(TernaryAxiom::Swap(i))?;
            edges.push(ActionEdge::new(
                format!("swap {i}, {} {}", t[i], t[i + 1]),
                next.to_string(),
            ));
        }
        for i in 0..t.len().saturating_sub(1) {
            if let Ok(next) = seq.apply(TernaryAxiom::Comb(i)) {
                edges.push(ActionEdge::new(
                    format!("comb {i}, {} {}", t[i], t[i + 1]),
                    next.to_string(),
                ));
            }
        }
        for (i, tok) in t.iter().enumerate() {
            if tok.digit == 0 {
                let next = seq.apply(TernaryAxiom::Del(i))?;
                edges.push(ActionEdge::new(format!("del {i}, {tok}"), next.to_string()));
            }
        }
        Ok(edges)
    }

    fn is_solved(&self, state: &str) -> Result<bool, EnvError> {
        Ok(TernarySequence::parse(state)?.is_solved())
    }

    fn canonicalize(&self, state: &str) -> Result<String, EnvError> {
        Ok(TernarySequence::parse(state)?.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn apply(s: &str, a: TernaryAxiom) -> String {
        TernarySequence::parse(s).unwrap().apply(a).unwrap().to_string()
    }

    #[test]
    fn table_examples() {
        assert_eq!(apply("#(b3 b5 c3)", TernaryAxiom::Swap(1)), "#(b3 c3 b5)");
        assert_eq!(apply("#(b3 c3 b5)", TernaryAxiom::Comb(0)), "#(a3 b4 b5)");
        assert_eq!(apply("#(a3 b4 b5)", TernaryAxiom::Del(0)), "#(b4 b5)");
    }

    #[test]
    fn carry_of_two_twos() {
        assert_eq!(apply("#(c2 c2)", TernaryAxiom::Comb(0)), "#(b2 b3)");
    }

    #[test]
    fn values() {
        assert_eq!(ternary_value("#(c0)").unwrap(), 2);
        assert_eq!(ternary_value("#(a0)").unwrap(), 0);
        assert_eq!(ternary_value("#(c3 c3 b5 b5 b5 a1 a0 c0)").unwrap(), 839);
    }

    #[test]
    fn inapplicable_cases() {
        let s = TernarySequence::parse("#(b3 b5 c3)").unwrap();
        assert!(s.apply(TernaryAxiom::Comb(0)).is_err());
        assert!(s.apply(TernaryAxiom::Del(0)).is_err());
        assert!(s.apply(TernaryAxiom::Swap(2)).is_err());
        let top = TernarySequence::parse("#(b9 b9)").unwrap();
        assert!(top.apply(TernaryAxiom::Comb(0)).is_err());
    }

    #[test]
    fn solved_predicate() {
        assert!(TernaryAddition.is_solved("#(c0 b3 b4 b6)").unwrap());
        assert!(!TernaryAddition.is_solved("#(c3 b3)").unwrap());
        assert!(!TernaryAddition.is_solved("#(a3)").unwrap());
        assert!(!TernaryAddition.is_solved("#(b5 b3)").unwrap());
        assert!(TernaryAddition.is_solved("#()").unwrap());
    }

    #[test]
    fn generator_ranges() {
        for seed in 0..1000 {
            let s = generate_ternary_problem(seed);
            assert!((1..=15).contains(&s.tokens.len()));
            assert!(s.tokens.iter().all(|t| t.power <= 6 && t.digit <= 2));
        }
    }
}
