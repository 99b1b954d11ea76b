//! Whole-number multiplication built from primitive steps.
//!
//! Adding any two numbers and multiplying two numbers that each have a
//! single nonzero digit (`3 * 40`, `200 * 7`) are primitive. Larger factors
//! must first be split by their leading digit block (`347` becomes
//! `(300 + 47)`) and distributed. Sites are preorder indices with the root
//! at 0.

use rand::Rng;

use super::{problem_rng, ActionEdge, EnvError, Environment};

const NAME: &str = "multiplication";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Mul,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ArithExpr {
    Int(u64),
    Bin(Box<ArithExpr>, ArithOp, Box<ArithExpr>),
}

use ArithExpr::{Bin, Int};

fn bin(l: ArithExpr, o: ArithOp, r: ArithExpr) -> ArithExpr {
    Bin(Box::new(l), o, Box::new(r))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MultAxiom {
    EvalAdd,
    EvalMul1Digit,
    Split,
    Dist,
    Comm,
    Assoc,
}

impl MultAxiom {
    pub const ALL: [MultAxiom; 6] = [
        MultAxiom::EvalAdd,
        MultAxiom::EvalMul1Digit,
        MultAxiom::Split,
        MultAxiom::Dist,
        MultAxiom::Comm,
        MultAxiom::Assoc,
    ];

    pub fn mnemonic(self) -> &'static str {
        match self {
            MultAxiom::EvalAdd => "eval_add",
            MultAxiom::EvalMul1Digit => "eval_mul1digit",
            MultAxiom::Split => "split",
            MultAxiom::Dist => "dist",
            MultAxiom::Comm => "comm",
            MultAxiom::Assoc => "assoc",
        }
    }
}

/// Zero, or a number with exactly one nonzero decimal digit.
pub fn is_single_digit_block(n: u64) -> bool {
    let mut m = n;
    while m >= 10 && m % 10 == 0 {
        m /= 10;
    }
    m < 10
}

/// `n = lead + rest` with `lead = d·10^k` the leading digit.
pub fn split_leading(n: u64) -> Option<(u64, u64)> {
    if is_single_digit_block(n) {
        return None;
    }
    let mut place = 1u64;
    while n / place >= 10 {
        place *= 10;
    }
    let lead = (n / place) * place;
    Some((lead, n - lead))
}

impl ArithExpr {
    pub fn value(&self) -> Option<u128> {
        match self {
            Int(n) => Some(*n as u128),
            Bin(l, ArithOp::Add, r) => l.value()?.checked_add(r.value()?),
            Bin(l, ArithOp::Mul, r) => l.value()?.checked_mul(r.value()?),
        }
    }

    fn write(&self, out: &mut String) {
        match self {
            Int(n) => out.push_str(&n.to_string()),
            Bin(l, o, r) => {
                out.push('(');
                l.write(out);
                out.push_str(match o {
                    ArithOp::Add => " + ",
                    ArithOp::Mul => " * ",
                });
                r.write(out);
                out.push(')');
            }
        }
    }

    pub fn parse(text: &str) -> Result<ArithExpr, EnvError> {
        let b = text.as_bytes();
        let mut pos = 0;
        let e = parse_expr(text, b, &mut pos)?;
        if pos != b.len() {
            return Err(EnvError::parse(NAME, text, pos, "trailing input"));
        }
        Ok(e)
    }

    fn preorder<'a>(&'a self, out: &mut Vec<&'a ArithExpr>) {
        out.push(self);
        if let Bin(l, _, r) = self {
            l.preorder(out);
            r.preorder(out);
        }
    }

    pub fn nodes(&self) -> Vec<&ArithExpr> {
        let mut out = Vec::new();
        self.preorder(&mut out);
        out
    }

    fn size(&self) -> usize {
        match self {
            Int(_) => 1,
            Bin(l, _, r) => 1 + l.size() + r.size(),
        }
    }

    fn replace_at(&self, target: usize, counter: &mut usize, new: &ArithExpr) -> ArithExpr {
        let here = *counter;
        *counter += 1;
        if here == target {
            *counter += self.size() - 1;
            return new.clone();
        }
        match self {
            Int(_) => self.clone(),
            Bin(l, o, r) => {
                let l2 = l.replace_at(target, counter, new);
                let r2 = r.replace_at(target, counter, new);
                bin(l2, *o, r2)
            }
        }
    }

    pub fn is_solved(&self) -> bool {
        matches!(self, Int(_))
    }

    pub fn apply(&self, axiom: MultAxiom, site: usize) -> Result<ArithExpr, EnvError> {
        let nodes = self.nodes();
        let node = nodes.get(site).ok_or_else(|| {
            EnvError::inapplicable(axiom.mnemonic(), format!("no sub-term {site}"))
        })?;
        let new = rewrite(axiom, node).ok_or_else(|| {
            EnvError::inapplicable(axiom.mnemonic(), format!("pattern does not match {node}"))
        })?;
        Ok(self.replace_at(site, &mut 0, &new))
    }

    pub fn actions(&self) -> Vec<(String, ArithExpr)> {
        let nodes = self.nodes();
        let mut out = Vec::new();
        for axiom in MultAxiom::ALL {
            for (site, node) in nodes.iter().enumerate() {
                if let Some(new) = rewrite(axiom, node) {
                    out.push((
                        format!("{} {site}, {node}", axiom.mnemonic()),
                        self.replace_at(site, &mut 0, &new),
                    ));
                }
            }
        }
        out
    }
}

impl std::fmt::Display for ArithExpr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut s = String::new();
        self.write(&mut s);
        f.write_str(&s)
    }
}

fn parse_expr(text: &str, b: &[u8], pos: &mut usize) -> Result<ArithExpr, EnvError> {
    match b.get(*pos) {
        Some(c) if c.is_ascii_digit() => {
            let start = *pos;
            while b.get(*pos).is_some_and(|c| c.is_ascii_digit()) {
                *pos += 1;
            }
            text[start..*pos]
                .parse()
                .map(Int)
                .map_err(|_| EnvError::parse(NAME, text, start, "integer out of range"))
        }
        Some(b'(') => {
            *pos += 1;
            let l = parse_expr(text, b, pos)?;
            let o = match b.get(*pos..*pos + 3) {
                Some(b" + ") => ArithOp::Add,
                Some(b" * ") => ArithOp::Mul,
                _ => return Err(EnvError::parse(NAME, text, *pos, "expected \" + \" or \" * \"")),
            };
            *pos += 3;
            let r = parse_expr(text, b, pos)?;
            if b.get(*pos) != Some(&b')') {
                return Err(EnvError::parse(NAME, text, *pos, "expected ')'"));
            }
            *pos += 1;
            Ok(bin(l, o, r))
        }
        _ => Err(EnvError::parse(NAME, text, *pos, "expected a number or '('")),
    }
}

fn rewrite(axiom: MultAxiom, e: &ArithExpr) -> Option<ArithExpr> {
    use ArithOp::{Add, Mul};
    match (axiom, e) {
        (MultAxiom::Split, Int(n)) => {
            let (lead, rest) = split_leading(*n)?;
            Some(bin(Int(lead), Add, Int(rest)))
        }
        (_, Int(_)) => None,
        (MultAxiom::EvalAdd, Bin(l, Add, r)) => match (l.as_ref(), r.as_ref()) {
            (Int(a), Int(b)) => a.checked_add(*b).map(Int),
            _ => None,
        },
        (MultAxiom::EvalMul1Digit, Bin(l, Mul, r)) => match (l.as_ref(), r.as_ref()) {
            (Int(a), Int(b)) if is_single_digit_block(*a) && is_single_digit_block(*b) => {
                a.checked_mul(*b).map(Int)
            }
            _ => None,
        },
        (MultAxiom::Dist, Bin(l, Mul, r)) => {
            if let Bin(b, Add, c) = r.as_ref() {
                return Some(bin(
                    bin((**l).clone(), Mul, (**b).clone()),
                    Add,
                    bin((**l).clone(), Mul, (**c).clone()),
                ));
            }
            if let Bin(a, Add, b) = l.as_ref() {
                return Some(bin(
                    bin((**a).clone(), Mul, (**r).clone()),
                    Add,
                    bin((**b).clone(), Mul, (**r).clone()),
                ));
            }
            None
        }
        (MultAxiom::Comm, Bin(l, o, r)) => Some(bin((**r).clone(), *o, (**l).clone())),
        (MultAxiom::Assoc, Bin(l, o, r)) => {
            if let Bin(a, inner, b) = l.as_ref() {
                if inner == o {
                    return Some(bin((**a).clone(), *o, bin((**b).clone(), *o, (**r).clone())));
                }
            }
            if let Bin(b, inner, c) = r.as_ref() {
                if inner == o {
                    return Some(bin(bin((**l).clone(), *o, (**b).clone()), *o, (**c).clone()));
                }
            }
            None
        }
        _ => None,
    }
}

fn random_operand<R: Rng>(rng: &mut R) -> u64 {
    let digits = rng.random_range(1..=3u32);
    let lo = if digits == 1 { 1 } else { 10u64.pow(digits - 1) };
    rng.random_range(lo..10u64.pow(digits))
}

pub fn generate_mult_problem(seed: u64) -> ArithExpr {
    let mut rng = problem_rng(seed);
    let a = random_operand(&mut rng);
    let b = random_operand(&mut rng);
    bin(Int(a), ArithOp::Mul, Int(b))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Multiplication;

impl Environment for Multiplication {
    fn name(&self) -> &'static str {
        NAME
    }

    fn generate(&self, seed: u64) -> String {
        generate_mult_problem(seed).to_string()
    }

    fn expand(&self, state: &str) -> Result<Vec<ActionEdge>, EnvError> {
        let e = ArithExpr::parse(state)?;
        if e.is_solved() {
            return Ok(Vec::new());
        }
        Ok(e.actions()
            .into_iter()
            .map(|(label, next)| ActionEdge::new(label, next.to_string()))
            .collect())
    }

    fn is_solved(&self, state: &str) -> Result<bool, EnvError> {
        Ok(ArithExpr::parse(state)?.is_solved())
    }

    fn canonicalize(&self, state: &str) -> Result<String, EnvError> {
        Ok(ArithExpr::parse(state)?.to_string())
    }
}
