//! Fraction manipulation: factoring, cancelling, scaling and combining.
//!
//! A state is a number, an integer expression, a fraction of integer
//! expressions, or one operation between two such operands. Fraction
//! operations never nest. Sub-terms are addressed by their preorder index,
//! with the root at index 0.

use std::fmt::Write as _;

use num_integer::Integer;
use num_traits::CheckedDiv;
use rand::Rng;

use super::{problem_rng, ActionEdge, EnvError, Environment};

const NAME: &str = "fractions";

/// Primes usable by `scale` and by `factorize`.
pub const PRIMES: [i64; 4] = [2, 3, 5, 7];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FracOp {
    Add,
    Sub,
    Mul,
}

impl FracOp {
    fn symbol(self) -> char {
        match self {
            FracOp::Add => '+',
            FracOp::Sub => '-',
            FracOp::Mul => '*',
        }
    }

    fn from_byte(b: u8) -> Option<Self> {
        match b {
            b'+' => Some(FracOp::Add),
            b'-' => Some(FracOp::Sub),
            b'*' => Some(FracOp::Mul),
            _ => None,
        }
    }

    fn apply(self, a: i64, b: i64) -> Option<i64> {
        match self {
            FracOp::Add => a.checked_add(b),
            FracOp::Sub => a.checked_sub(b),
            FracOp::Mul => a.checked_mul(b),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FracTerm {
    Number(i64),
    Op(Box<FracTerm>, FracOp, Box<FracTerm>),
    Fraction(Box<FracTerm>, Box<FracTerm>),
}

use FracTerm::{Fraction, Number, Op};

fn op(l: FracTerm, o: FracOp, r: FracTerm) -> FracTerm {
    Op(Box::new(l), o, Box::new(r))
}

fn frac(n: FracTerm, d: FracTerm) -> FracTerm {
    Fraction(Box::new(n), Box::new(d))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FractionAxiom {
    /// Split the number at `site` into `prime * cofactor`.
    Factorize { site: usize, prime: i64 },
    /// Remove `factor` from both sides of the fraction at `site`.
    Cancel { site: usize, factor: FracTerm },
    Eval { site: usize },
    Scale { site: usize, prime: i64 },
    Simpl1 { site: usize },
    Mfrac { site: usize },
    Mul,
    Combine,
}

impl FracTerm {
    pub fn parse(text: &str) -> Result<FracTerm, EnvError> {
        let mut p = Parser {
            text,
            bytes: text.as_bytes(),
            pos: 0,
        };
        let left = p.operand()?;
        let state = if p.pos == p.bytes.len() {
            left
        } else {
            let o = p.op_symbol()?;
            let right = p.operand()?;
            op(left, o, right)
        };
        if p.pos != p.bytes.len() {
            return Err(p.err("trailing input"));
        }
        state.check_root().map_err(|m| EnvError::parse(NAME, text, 0, m))?;
        Ok(state)
    }

    fn check_root(&self) -> Result<(), &'static str> {
        match self {
            Number(_) => Ok(()),
            Fraction(n, d) => check_fraction(n, d),
            Op(l, _, r) => {
                for side in [l, r] {
                    match side.as_ref() {
                        Fraction(n, d) => check_fraction(n, d)?,
                        t if t.has_fraction() => return Err("fraction operations cannot nest"),
                        _ => {}
                    }
                }
                Ok(())
            }
        }
    }

    fn has_fraction(&self) -> bool {
        match self {
            Number(_) => false,
            Fraction(..) => true,
            Op(l, _, r) => l.has_fraction() || r.has_fraction(),
        }
    }

    fn write_nested(&self, out: &mut String) {
        match self {
            Number(n) => {
                let _ = write!(out, "{n}");
            }
            Op(l, o, r) => {
                out.push('(');
                l.write_nested(out);
                let _ = write!(out, " {} ", o.symbol());
                r.write_nested(out);
                out.push(')');
            }
            Fraction(n, d) => {
                out.push('[');
                n.write_nested(out);
                out.push_str("]/[");
                d.write_nested(out);
                out.push(']');
            }
        }
    }

    /// Printed as a whole state: the outermost operation is not parenthesized.
    pub fn write_root(&self, out: &mut String) {
        match self {
            Op(l, o, r) => {
                l.write_nested(out);
                let _ = write!(out, " {} ", o.symbol());
                r.write_nested(out);
            }
            other => other.write_nested(out),
        }
    }

    pub fn to_root_string(&self) -> String {
        let mut s = String::new();
        self.write_root(&mut s);
        s
    }

    pub fn is_solved(&self) -> bool {
        match self {
            Number(_) => true,
            Fraction(n, d) => match (n.as_ref(), d.as_ref()) {
                (Number(a), Number(b)) => *b != 1 && a.gcd(b) == 1,
                _ => false,
            },
            Op(..) => false,
        }
    }

    /// Nodes in preorder.
    pub fn nodes(&self) -> Vec<&FracTerm> {
        let mut out = Vec::new();
        fn walk<'a>(t: &'a FracTerm, out: &mut Vec<&'a FracTerm>) {
            out.push(t);
            match t {
                Number(_) => {}
                Op(l, _, r) | Fraction(l, r) => {
                    walk(l, out);
                    walk(r, out);
                }
            }
        }
        walk(self, &mut out);
        out
    }

    fn replace_at(&self, target: usize, counter: &mut usize, new: &FracTerm) -> FracTerm {
        let here = *counter;
        *counter += 1;
        if here == target {
            return new.clone();
        }
        match self {
            Number(n) => Number(*n),
            Op(l, o, r) => {
                let l2 = l.replace_at(target, counter, new);
                let r2 = r.replace_at(target, counter, new);
                op(l2, *o, r2)
            }
            Fraction(n, d) => {
                let n2 = n.replace_at(target, counter, new);
                let d2 = d.replace_at(target, counter, new);
                frac(n2, d2)
            }
        }
    }

    fn replaced(&self, site: usize, new: &FracTerm) -> FracTerm {
        self.replace_at(site, &mut 0, new)
    }

    pub fn apply(&self, axiom: &FractionAxiom) -> Result<FracTerm, EnvError> {
        let nodes = self.nodes();
        let node = |site: usize, name: &str| {
            nodes
                .get(site)
                .copied()
                .ok_or_else(|| EnvError::inapplicable(name, format!("no sub-term {site}")))
        };
        let result = match axiom {
            FractionAxiom::Factorize { site, prime } => {
                let Number(n) = node(*site, "factorize")? else {
                    return Err(EnvError::inapplicable("factorize", "not a number"));
                };
                if !PRIMES.contains(prime) || n % prime != 0 || (n / prime).abs() <= 1 {
                    return Err(EnvError::inapplicable(
                        "factorize",
                        format!("{n} has no factorization {prime}*k with |k| > 1"),
                    ));
                }
                self.replaced(*site, &op(Number(*prime), FracOp::Mul, Number(n / prime)))
            }
            FractionAxiom::Cancel { site, factor } => {
                let Fraction(n, d) = node(*site, "cancel")? else {
                    return Err(EnvError::inapplicable("cancel", "not a fraction"));
                };
                match (remove_factor(n, factor), remove_factor(d, factor)) {
                    (Some(n2), Some(d2)) => self.replaced(*site, &frac(n2, d2)),
                    _ => {
                        return Err(EnvError::inapplicable(
                            "cancel",
                            "factor is not written on both sides",
                        ))
                    }
                }
            }
            FractionAxiom::Eval { site } => {
                let t = node(*site, "eval")?;
                let v = match t {
                    Op(l, o, r) => match (l.as_ref(), r.as_ref()) {
                        (Number(a), Number(b)) => o.apply(*a, *b),
                        _ => None,
                    },
                    _ => None,
                };
                let v = v.ok_or_else(|| {
                    EnvError::inapplicable("eval", "not an operation between two numbers")
                })?;
                self.replaced(*site, &Number(v))
            }
            FractionAxiom::Scale { site, prime } => {
                let Fraction(n, d) = node(*site, "scale")? else {
                    return Err(EnvError::inapplicable("scale", "not a fraction"));
                };
                if !PRIMES.contains(prime) {
                    return Err(EnvError::inapplicable("scale", format!("{prime} not allowed")));
                }
                let scaled = frac(
                    op(Number(*prime), FracOp::Mul, (**n).clone()),
                    op(Number(*prime), FracOp::Mul, (**d).clone()),
                );
                self.replaced(*site, &scaled)
            }
            FractionAxiom::Simpl1 { site } => match node(*site, "simpl1")? {
                Fraction(n, d) if **d == Number(1) => self.replaced(*site, n),
                _ => return Err(EnvError::inapplicable("simpl1", "denominator is not 1")),
            },
            FractionAxiom::Mfrac { site } => {
                let is_root_operand = match self {
                    Op(l, _, _) => *site == 1 || *site == 1 + l.nodes().len(),
                    _ => false,
                };
                match node(*site, "mfrac")? {
                    Number(n) if is_root_operand => {
                        self.replaced(*site, &frac(Number(*n), Number(1)))
                    }
                    _ => {
                        return Err(EnvError::inapplicable(
                            "mfrac",
                            "only operands of the top-level operation",
                        ))
                    }
                }
            }
            FractionAxiom::Mul => match self {
                Op(l, FracOp::Mul, r) => match (l.as_ref(), r.as_ref()) {
                    (Fraction(n1, d1), Fraction(n2, d2)) => frac(
                        op((**n1).clone(), FracOp::Mul, (**n2).clone()),
                        op((**d1).clone(), FracOp::Mul, (**d2).clone()),
                    ),
                    _ => return Err(EnvError::inapplicable("mul", "operands are not fractions")),
                },
                _ => return Err(EnvError::inapplicable("mul", "not a product of fractions")),
            },
            FractionAxiom::Combine => match self {
                Op(l, o @ (FracOp::Add | FracOp::Sub), r) => match (l.as_ref(), r.as_ref()) {
                    (Fraction(n1, d1), Fraction(n2, d2)) if d1 == d2 => {
                        frac(op((**n1).clone(), *o, (**n2).clone()), (**d1).clone())
                    }
                    _ => {
                        return Err(EnvError::inapplicable(
                            "combine",
                            "denominators are not syntactically equal",
                        ))
                    }
                },
                _ => return Err(EnvError::inapplicable("combine", "not a sum or difference")),
            },
        };
        if result.has_zero_denominator() {
            return Err(EnvError::inapplicable(
                format!("{axiom:?}"),
                "result has a zero denominator",
            ));
        }
        Ok(result)
    }

    fn has_zero_denominator(&self) -> bool {
        match self {
            Number(_) => false,
            Fraction(_, d) => **d == Number(0),
            Op(l, _, r) => l.has_zero_denominator() || r.has_zero_denominator(),
        }
    }

    /// All legal actions in axiom-table order, then by sub-term index.
    pub fn actions(&self) -> Vec<(String, FracTerm)> {
        let mut out = Vec::new();
        if self.is_solved() {
            return out;
        }
        let nodes = self.nodes();
        let mut push = |label: String, axiom: FractionAxiom| {
            if let Ok(next) = self.apply(&axiom) {
                out.push((label, next));
            }
        };
        for (site, t) in nodes.iter().enumerate() {
            if let Number(n) = t {
                for prime in PRIMES {
                    if n % prime == 0 && (n / prime).abs() > 1 {
                        push(
                            format!("factorize {site}, {n}, {prime}*{}", n / prime),
                            FractionAxiom::Factorize { site, prime },
                        );
                    }
                }
            }
        }
        for (site, t) in nodes.iter().enumerate() {
            if let Fraction(n, d) = t {
                let mut num_factors = Vec::new();
                factors(n, &mut num_factors);
                let mut den_factors = Vec::new();
                factors(d, &mut den_factors);
                let mut seen: Vec<&FracTerm> = Vec::new();
                for f in num_factors {
                    if den_factors.contains(&f) && !seen.contains(&f) {
                        seen.push(f);
                        push(
                            format!("cancel {site}, {}", f.to_root_string()),
                            FractionAxiom::Cancel {
                                site,
                                factor: f.clone(),
                            },
                        );
                    }
                }
            }
        }
        for (site, t) in nodes.iter().enumerate() {
            if let Op(l, _, r) = t {
                if matches!((l.as_ref(), r.as_ref()), (Number(_), Number(_))) {
                    push(
                        format!("eval {site}, {}", t.to_root_string()),
                        FractionAxiom::Eval { site },
                    );
                }
            }
        }
        for (site, t) in nodes.iter().enumerate() {
            if let Fraction(..) = t {
                for prime in PRIMES {
                    push(
                        format!("scale {site}, {prime}"),
                        FractionAxiom::Scale { site, prime },
                    );
                }
            }
        }
        for (site, t) in nodes.iter().enumerate() {
            if let Fraction(_, d) = t {
                if **d == Number(1) {
                    push(format!("simpl1 {site}"), FractionAxiom::Simpl1 { site });
                }
            }
        }
        if let Op(l, _, r) = self {
            let right_site = 1 + l.nodes().len();
            for (site, side) in [(1, l), (right_site, r)] {
                if let Number(n) = side.as_ref() {
                    push(format!("mfrac {site}, {n}"), FractionAxiom::Mfrac { site });
                }
            }
        }
        push("mul 0".to_string(), FractionAxiom::Mul);
        push("combine 0".to_string(), FractionAxiom::Combine);
        out
    }

    /// Exact rational value, `None` on overflow or division by zero.
    pub fn value(&self) -> Option<num_rational::Ratio<i128>> {
        use num_rational::Ratio;
        use num_traits::{CheckedAdd, CheckedMul, CheckedSub};
        match self {
            Number(n) => Some(Ratio::from_integer(*n as i128)),
            Op(l, o, r) => {
                let (a, b) = (l.value()?, r.value()?);
                match o {
                    FracOp::Add => a.checked_add(&b),
                    FracOp::Sub => a.checked_sub(&b),
                    FracOp::Mul => a.checked_mul(&b),
                }
            }
            Fraction(n, d) => {
                let (a, b) = (n.value()?, d.value()?);
                if b == Ratio::from_integer(0) {
                    None
                } else {
                    a.checked_div(&b)
                }
            }
        }
    }
}

fn check_fraction(n: &FracTerm, d: &FracTerm) -> Result<(), &'static str> {
    if n.has_fraction() || d.has_fraction() {
        return Err("fractions cannot contain fractions");
    }
    if *d == Number(0) {
        return Err("zero denominator");
    }
    Ok(())
}

/// Multiplicative factors as written: the leaves of a product tree.
fn factors<'a>(t: &'a FracTerm, out: &mut Vec<&'a FracTerm>) {
    match t {
        Op(l, FracOp::Mul, r) => {
            factors(l, out);
            factors(r, out);
        }
        other => out.push(other),
    }
}

/// Removes the leftmost occurrence of `factor` from a product tree.
fn remove_factor(t: &FracTerm, factor: &FracTerm) -> Option<FracTerm> {
    if t == factor {
        return Some(Number(1));
    }
    match t {
        Op(l, FracOp::Mul, r) => {
            if **l == *factor {
                return Some((**r).clone());
            }
            if let Some(l2) = remove_factor_inner(l, factor) {
                return Some(op(l2, FracOp::Mul, (**r).clone()));
            }
            if **r == *factor {
                return Some((**l).clone());
            }
            remove_factor_inner(r, factor).map(|r2| op((**l).clone(), FracOp::Mul, r2))
        }
        _ => None,
    }
}

fn remove_factor_inner(t: &FracTerm, factor: &FracTerm) -> Option<FracTerm> {
    match t {
        Op(_, FracOp::Mul, _) => remove_factor(t, factor),
        _ => None,
    }
}

struct Parser<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> EnvError {
        EnvError::parse(NAME, self.text, self.pos, msg)
    }

    fn expect(&mut self, s: &str) -> Result<(), EnvError> {
        if self.bytes[self.pos..].starts_with(s.as_bytes()) {
            self.pos += s.len();
            Ok(())
        } else {
            Err(self.err(&format!("expected {s:?}")))
        }
    }

    fn op_symbol(&mut self) -> Result<FracOp, EnvError> {
        self.expect(" ")?;
        let o = self
            .bytes
            .get(self.pos)
            .and_then(|&b| FracOp::from_byte(b))
            .ok_or_else(|| self.err("expected an operator"))?;
        self.pos += 1;
        self.expect(" ")?;
        Ok(o)
    }

    fn operand(&mut self) -> Result<FracTerm, EnvError> {
        if self.bytes.get(self.pos) == Some(&b'[') {
            self.pos += 1;
            let n = self.term()?;
            self.expect("]/[")?;
            let d = self.term()?;
            self.expect("]")?;
            Ok(frac(n, d))
        } else {
            self.term()
        }
    }

    fn term(&mut self) -> Result<FracTerm, EnvError> {
        match self.bytes.get(self.pos) {
            Some(b'(') => {
                self.pos += 1;
                let l = self.term()?;
                let o = self.op_symbol()?;
                let r = self.term()?;
                self.expect(")")?;
                Ok(op(l, o, r))
            }
            Some(b'-' | b'0'..=b'9') => {
                let start = self.pos;
                if self.bytes[self.pos] == b'-' {
                    self.pos += 1;
                }
                while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                self.text[start..self.pos]
                    .parse()
                    .map(Number)
                    .map_err(|_| self.err("bad integer"))
            }
            _ => Err(self.err("expected a number or '('")),
        }
    }
}

pub fn generate_fraction_problem(seed: u64) -> FracTerm {
    let mut rng = problem_rng(seed);
    fn number<R: Rng>(rng: &mut R) -> i64 {
        let k = rng.random_range(0..=4);
        (0..k).map(|_| PRIMES[rng.random_range(0..PRIMES.len())]).product()
    }
    fn operand<R: Rng>(rng: &mut R) -> FracTerm {
        if rng.random_bool(0.5) {
            Number(number(rng))
        } else {
            let n = number(rng);
            let d = number(rng);
            frac(Number(n), Number(d))
        }
    }
    if rng.random_bool(0.25) {
        operand(&mut rng)
    } else {
        let o = [FracOp::Add, FracOp::Sub, FracOp::Mul][rng.random_range(0..3)];
        let l = operand(&mut rng);
        let r = operand(&mut rng);
        op(l, o, r)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Fractions;

impl Environment for Fractions {
    fn name(&self) -> &'static str {
        NAME
    }

    fn generate(&self, seed: u64) -> String {
        generate_fraction_problem(seed).to_root_string()
    }

    fn expand(&self, state: &str) -> Result<Vec<ActionEdge>, EnvError> {
        let t = FracTerm::parse(state)?;
        Ok(t.actions()
            .into_iter()
            .map(|(label, next)| ActionEdge {
                label,
                next_state: next.to_root_string(),
            })
            .collect())
    }

    fn is_solved(&self, state: &str) -> Result<bool, EnvError> {
        Ok(FracTerm::parse(state)?.is_solved())
    }

    fn canonicalize(&self, state: &str) -> Result<String, EnvError> {
        Ok(FracTerm::parse(state)?.to_root_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn apply(s: &str, a: FractionAxiom) -> String {
        FracTerm::parse(s).unwrap().apply(&a).unwrap().to_root_string()
    }

    #[test]
    fn round_trips_trace_states() {
        for s in [
            "[1]/[105] + [(5 * 1)]/[(5 * 42)]",
            "[((2 * 1) + (5 * 1))]/[210]",
            "[18]/[5] - 1",
            "5 * 3",
            "15",
            "(10 + 5) + [1]/[2]",
        ] {
            assert_eq!(FracTerm::parse(s).unwrap().to_root_string(), s);
        }
    }

    #[test]
    fn axiom_examples() {
        assert_eq!(
            apply("[1]/[105] + [1]/[42]", FractionAxiom::Scale { site: 4, prime: 5 }),
            "[1]/[105] + [(5 * 1)]/[(5 * 42)]"
        );
        assert_eq!(
            apply("[7]/[210]", FractionAxiom::Factorize { site: 2, prime: 7 }),
            "[7]/[(7 * 30)]"
        );
        assert_eq!(apply("5 * 3", FractionAxiom::Mfrac { site: 1 }), "[5]/[1] * 3");
        assert_eq!(
            apply(
                "[(2 * 5)]/[(5 * 10)]",
                FractionAxiom::Cancel {
                    site: 0,
                    factor: Number(5)
                }
            ),
            "[2]/[10]"
        );
        assert_eq!(apply("[(10 + 5)]/[1]", FractionAxiom::Simpl1 { site: 0 }), "10 + 5");
        assert_eq!(
            apply("[3]/[4] * [2]/[3]", FractionAxiom::Mul),
            "[(3 * 2)]/[(4 * 3)]"
        );
        assert_eq!(
            apply("[3]/[(4 + 1)] + [(9 * 2)]/[(4 + 1)]", FractionAxiom::Combine),
            "[(3 + (9 * 2))]/[(4 + 1)]"
        );
    }

    #[test]
    fn terminal_states() {
        assert!(Fractions.expand("[13]/[5]").unwrap().is_empty());
        assert!(Fractions.expand("15").unwrap().is_empty());
        assert!(!Fractions.is_solved("[7]/[210]").unwrap());
        assert!(!Fractions.is_solved("[15]/[1]").unwrap());
    }

    #[test]
    fn factorize_enumerates_all_small_primes() {
        let labels: Vec<String> = Fractions
            .expand("[7]/[210]")
            .unwrap()
            .into_iter()
            .map(|e| e.label)
            .filter(|l| l.starts_with("factorize"))
            .collect();
        assert_eq!(
            labels,
            vec![
                "factorize 2, 210, 2*105",
                "factorize 2, 210, 3*70",
                "factorize 2, 210, 5*42",
                "factorize 2, 210, 7*30"
            ]
        );
    }

    #[test]
    fn nested_fraction_operations_are_rejected() {
        assert!(FracTerm::parse("([1]/[2] + 1) * 3").is_err());
        assert!(FracTerm::parse("[[1]/[2]]/[3]").is_err());
        assert!(FracTerm::parse("[1]/[0]").is_err());
    }

    #[test]
    fn combine_requires_equal_denominators() {
        let t = FracTerm::parse("[1]/[2] + [1]/[3]").unwrap();
        assert!(t.apply(&FractionAxiom::Combine).is_err());
    }

    #[test]
    fn empty_product_generates_one() {
        let mut ones = 0;
        for seed in 0..2000 {
            let s = generate_fraction_problem(seed).to_root_string();
            FracTerm::parse(&s).unwrap();
            if s == "1" {
                ones += 1;
            }
        }
        assert!(ones > 0);
    }
}
