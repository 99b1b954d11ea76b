//! Linear equations in one unknown, rewritten one axiom at a time.
//!
//! Binary operations are always parenthesized. A constant times the
//! unknown prints in coefficient form (`8x`, `-2x`, `0x`), negative
//! constants print wrapped (`(-7)`), and non-integers print as bracketed
//! fractions (`[4/5]`, `([-7/10])`).
//!
//! Axiom sites are preorder indices: 0 is the equation itself, 1 is the
//! left-hand side, and the right-hand side follows the last node of the
//! left. The both-sides operations `add`, `sub`, `mul` and `div` take an
//! atomic sub-term of the current equation (a constant, `x`, or a
//! coefficient term) as their operand.

use std::fmt::Write as _;
use std::sync::Arc;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, Signed, Zero};
use rand::Rng;

use super::{problem_rng, ActionEdge, EnvError, Environment};

const NAME: &str = "equations";

pub type Rational = Ratio<i64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }

    fn from_byte(b: u8) -> Option<Self> {
        match b {
            b'+' => Some(BinOp::Add),
            b'-' => Some(BinOp::Sub),
            b'*' => Some(BinOp::Mul),
            b'/' => Some(BinOp::Div),
            _ => None,
        }
    }

    fn is_additive(self) -> bool {
        matches!(self, BinOp::Add | BinOp::Sub)
    }

    fn eval(self, a: &Rational, b: &Rational) -> Option<Rational> {
        match self {
            BinOp::Add => a.checked_add(b),
            BinOp::Sub => a.checked_sub(b),
            BinOp::Mul => a.checked_mul(b),
            BinOp::Div => {
                if b.is_zero() {
                    None
                } else {
                    a.checked_div(b)
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(Rational),
    Unknown,
    Neg(Box<Expr>),
    Bin(Box<Expr>, BinOp, Box<Expr>),
}

use Expr::{Bin, Const, Neg, Unknown};

pub fn bin(l: Expr, o: BinOp, r: Expr) -> Expr {
    Bin(Box::new(l), o, Box::new(r))
}

pub fn int(n: i64) -> Expr {
    Const(Rational::from_integer(n))
}

fn is_const(e: &Expr, n: i64) -> bool {
    matches!(e, Const(c) if *c == Rational::from_integer(n))
}

fn write_rational(c: &Rational, out: &mut String) {
    if c.is_integer() {
        let _ = write!(out, "{}", c.numer());
    } else {
        let _ = write!(out, "[{}/{}]", c.numer(), c.denom());
    }
}

impl Expr {
    pub fn write(&self, out: &mut String) {
        match self {
            Const(c) if c.is_negative() => {
                out.push('(');
                write_rational(c, out);
                out.push(')');
            }
            Const(c) => write_rational(c, out),
            Unknown => out.push('x'),
            Neg(inner) => {
                out.push('-');
                match inner.as_ref() {
                    Bin(l, BinOp::Mul, r) if matches!(**l, Const(_)) && **r == Unknown => {
                        out.push('(');
                        l.write(out);
                        out.push_str(" * x)");
                    }
                    other => other.write(out),
                }
            }
            Bin(l, BinOp::Mul, r) if **r == Unknown && matches!(**l, Const(_)) => {
                let Const(c) = l.as_ref() else { unreachable!() };
                write_rational(c, out);
                out.push('x');
            }
            Bin(l, o, r) => {
                out.push('(');
                l.write(out);
                out.push(' ');
                out.push(o.symbol());
                out.push(' ');
                r.write(out);
                out.push(')');
            }
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        self.write(&mut s);
        s
    }

    fn preorder<'a>(&'a self, out: &mut Vec<&'a Expr>) {
        out.push(self);
        match self {
            Const(_) | Unknown => {}
            Neg(e) => e.preorder(out),
            Bin(l, _, r) => {
                l.preorder(out);
                r.preorder(out);
            }
        }
    }

    fn size(&self) -> usize {
        match self {
            Const(_) | Unknown => 1,
            Neg(e) => 1 + e.size(),
            Bin(l, _, r) => 1 + l.size() + r.size(),
        }
    }

    fn replace_at(&self, target: usize, counter: &mut usize, new: &Expr) -> Expr {
        let here = *counter;
        *counter += 1;
        if here == target {
            *counter += self.size() - 1;
            return new.clone();
        }
        match self {
            Const(_) | Unknown => self.clone(),
            Neg(e) => Neg(Box::new(e.replace_at(target, counter, new))),
            Bin(l, o, r) => {
                let l2 = l.replace_at(target, counter, new);
                let r2 = r.replace_at(target, counter, new);
                bin(l2, *o, r2)
            }
        }
    }

    /// Value with the unknown bound to `x`; `None` on division by zero or overflow.
    pub fn eval_at(&self, x: &Rational) -> Option<Rational> {
        match self {
            Const(c) => Some(*c),
            Unknown => Some(*x),
            Neg(e) => e.eval_at(x)?.checked_mul(&Rational::from_integer(-1)),
            Bin(l, o, r) => o.eval(&l.eval_at(x)?, &r.eval_at(x)?),
        }
    }

    /// A constant, the unknown, or a coefficient term such as `-2x`.
    pub fn is_atom(&self) -> bool {
        match self {
            Const(_) | Unknown => true,
            Bin(l, BinOp::Mul, r) => matches!(**l, Const(_)) && **r == Unknown,
            _ => false,
        }
    }

    fn is_syntactic_zero(&self) -> bool {
        is_const(self, 0)
    }

    /// `0` or `0x`.
    fn is_zero_operand(&self) -> bool {
        match self {
            Bin(l, BinOp::Mul, r) => is_const(l, 0) && **r == Unknown,
            other => other.is_syntactic_zero(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Equation {
    pub lhs: Expr,
    pub rhs: Expr,
}

/// The nineteen axioms, in table order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EqAxiom {
    Refl,
    Comm,
    Assoc,
    Dist,
    SubComm,
    Eval,
    Add0,
    Sub0,
    Mul1,
    Div1,
    DivSelf,
    SubSelf,
    SubSub,
    Mul0,
    ZeroDiv,
    Add,
    Sub,
    Mul,
    Div,
}

impl EqAxiom {
    pub const ALL: [EqAxiom; 19] = [
        EqAxiom::Refl,
        EqAxiom::Comm,
        EqAxiom::Assoc,
        EqAxiom::Dist,
        EqAxiom::SubComm,
        EqAxiom::Eval,
        EqAxiom::Add0,
        EqAxiom::Sub0,
        EqAxiom::Mul1,
        EqAxiom::Div1,
        EqAxiom::DivSelf,
        EqAxiom::SubSelf,
        EqAxiom::SubSub,
        EqAxiom::Mul0,
        EqAxiom::ZeroDiv,
        EqAxiom::Add,
        EqAxiom::Sub,
        EqAxiom::Mul,
        EqAxiom::Div,
    ];

    /// Axioms that rewrite a single sub-term.
    pub const LOCAL: [EqAxiom; 14] = [
        EqAxiom::Comm,
        EqAxiom::Assoc,
        EqAxiom::Dist,
        EqAxiom::SubComm,
        EqAxiom::Eval,
        EqAxiom::Add0,
        EqAxiom::Sub0,
        EqAxiom::Mul1,
        EqAxiom::Div1,
        EqAxiom::DivSelf,
        EqAxiom::SubSelf,
        EqAxiom::SubSub,
        EqAxiom::Mul0,
        EqAxiom::ZeroDiv,
    ];

    pub fn mnemonic(self) -> &'static str {
        match self {
            EqAxiom::Refl => "refl",
            EqAxiom::Comm => "comm",
            EqAxiom::Assoc => "assoc",
            EqAxiom::Dist => "dist",
            EqAxiom::SubComm => "sub_comm",
            EqAxiom::Eval => "eval",
            EqAxiom::Add0 => "add0",
            EqAxiom::Sub0 => "sub0",
            EqAxiom::Mul1 => "mul1",
            EqAxiom::Div1 => "div1",
            EqAxiom::DivSelf => "div_self",
            EqAxiom::SubSelf => "sub_self",
            EqAxiom::SubSub => "subsub",
            EqAxiom::Mul0 => "mul0",
            EqAxiom::ZeroDiv => "zero_div",
            EqAxiom::Add => "add",
            EqAxiom::Sub => "sub",
            EqAxiom::Mul => "mul",
            EqAxiom::Div => "div",
        }
    }

    pub fn from_mnemonic(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.mnemonic() == s)
    }

    fn both_sides_op(self) -> Option<BinOp> {
        match self {
            EqAxiom::Add => Some(BinOp::Add),
            EqAxiom::Sub => Some(BinOp::Sub),
            EqAxiom::Mul => Some(BinOp::Mul),
            EqAxiom::Div => Some(BinOp::Div),
            _ => None,
        }
    }
}

/// Where an axiom is applied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AxiomArgs {
    /// `refl` takes no argument.
    Whole,
    /// Preorder index of the rewritten sub-term.
    Site(usize),
    /// Term applied to both sides by `add`, `sub`, `mul` and `div`.
    Operand(Expr),
}

/// Rewrites one sub-term. When a node matches more than one pattern of the
/// same axiom, only the first pattern listed is used, so every
/// (axiom, site) pair names a single edge.
pub fn rewrite_local(axiom: EqAxiom, e: &Expr) -> Option<Expr> {
    use BinOp::*;
    let Bin(l, o, r) = e else {
        return match (axiom, e) {
            (EqAxiom::Eval, Neg(inner)) => match inner.as_ref() {
                Const(c) => c.checked_mul(&Rational::from_integer(-1)).map(Const),
                _ => None,
            },
            _ => None,
        };
    };
    let (l, o, r) = (l.as_ref(), *o, r.as_ref());
    match axiom {
        EqAxiom::Comm => match o {
            Add | Mul => Some(bin(r.clone(), o, l.clone())),
            _ => None,
        },
        EqAxiom::Assoc => {
            if let Bin(a, inner, b) = l {
                let ok = matches!((inner, o), (Add, Add | Sub) | (Mul, Mul | Div));
                if ok {
                    return Some(bin((**a).clone(), *inner, bin((**b).clone(), o, r.clone())));
                }
            }
            if let Bin(b, inner, c) = r {
                let ok = matches!((o, inner), (Add, Add | Sub) | (Mul, Mul | Div));
                if ok {
                    return Some(bin(bin(l.clone(), o, (**b).clone()), *inner, (**c).clone()));
                }
            }
            None
        }
        EqAxiom::Dist => {
            if o == Mul {
                if let Bin(b, inner, c) = r {
                    if inner.is_additive() {
                        return Some(bin(
                            bin(l.clone(), Mul, (**b).clone()),
                            *inner,
                            bin(l.clone(), Mul, (**c).clone()),
                        ));
                    }
                }
            }
            if matches!(o, Mul | Div) {
                if let Bin(a, inner, b) = l {
                    if inner.is_additive() {
                        return Some(bin(
                            bin((**a).clone(), o, r.clone()),
                            *inner,
                            bin((**b).clone(), o, r.clone()),
                        ));
                    }
                }
            }
            if o.is_additive() {
                if let (Bin(a, lo, c1), Bin(b, ro, c2)) = (l, r) {
                    if lo == ro && matches!(lo, Mul | Div) && c1 == c2 {
                        return Some(bin(bin((**a).clone(), o, (**b).clone()), *lo, (**c1).clone()));
                    }
                    if *lo == Mul && *ro == Mul && a == b {
                        return Some(bin((**a).clone(), Mul, bin((**c1).clone(), o, (**c2).clone())));
                    }
                }
            }
            None
        }
        EqAxiom::SubComm => match (l, o) {
            (Bin(a, Sub, b), Sub) => Some(bin(bin((**a).clone(), Sub, r.clone()), Sub, (**b).clone())),
            _ => None,
        },
        EqAxiom::Eval => match (l, r) {
            (Const(a), Const(b)) => o.eval(a, b).map(Const),
            _ => None,
        },
        EqAxiom::Add0 => match o {
            Add if r.is_syntactic_zero() => Some(l.clone()),
            Add if l.is_syntactic_zero() => Some(r.clone()),
            _ => None,
        },
        EqAxiom::Sub0 => (o == Sub && r.is_syntactic_zero()).then(|| l.clone()),
        EqAxiom::Mul1 => match o {
            Mul if is_const(r, 1) => Some(l.clone()),
            Mul if is_const(l, 1) => Some(r.clone()),
            _ => None,
        },
        EqAxiom::Div1 => (o == Div && is_const(r, 1)).then(|| l.clone()),
        EqAxiom::DivSelf => (o == Div && l == r && !r.is_syntactic_zero()).then(|| int(1)),
        EqAxiom::SubSelf => (o == Sub && l == r).then(|| int(0)),
        EqAxiom::SubSub => match (o, r) {
            (Sub, Const(c)) if c.is_negative() => Some(bin(l.clone(), Add, Const(-*c))),
            (Sub, Neg(inner)) => Some(bin(l.clone(), Add, (**inner).clone())),
            _ => None,
        },
        EqAxiom::Mul0 => {
            (o == Mul && (l.is_syntactic_zero() || r.is_syntactic_zero())).then(|| int(0))
        }
        EqAxiom::ZeroDiv => {
            (o == Div && l.is_syntactic_zero() && !r.is_syntactic_zero()).then(|| int(0))
        }
        _ => None,
    }
}

impl Equation {
    pub fn parse(text: &str) -> Result<Equation, EnvError> {
        let mut p = Parser {
            text,
            bytes: text.as_bytes(),
            pos: 0,
            placeholders: false,
        };
        let eq = p.equation()?;
        Ok(eq)
    }

    pub fn is_solved(&self) -> bool {
        self.lhs == Unknown && matches!(self.rhs, Const(_))
    }

    /// Sub-terms in preorder; index `i` here is site `i + 1`.
    pub fn nodes(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        self.lhs.preorder(&mut out);
        self.rhs.preorder(&mut out);
        out
    }

    fn replaced(&self, site: usize, new: &Expr) -> Equation {
        let lhs_size = self.lhs.size();
        if site <= lhs_size {
            Equation {
                lhs: self.lhs.replace_at(site - 1, &mut 0, new),
                rhs: self.rhs.clone(),
            }
        } else {
            Equation {
                lhs: self.lhs.clone(),
                rhs: self.rhs.replace_at(site - 1 - lhs_size, &mut 0, new),
            }
        }
    }

    pub fn apply(&self, axiom: EqAxiom, args: &AxiomArgs) -> Result<Equation, EnvError> {
        let name = axiom.mnemonic();
        match (axiom, args) {
            (EqAxiom::Refl, AxiomArgs::Whole) => Ok(Equation {
                lhs: self.rhs.clone(),
                rhs: self.lhs.clone(),
            }),
            (a, AxiomArgs::Operand(t)) if a.both_sides_op().is_some() => {
                let o = a.both_sides_op().unwrap();
                if matches!(o, BinOp::Mul | BinOp::Div) && t.is_zero_operand() {
                    return Err(EnvError::inapplicable(name, "operand is zero"));
                }
                if !t.is_atom() || !self.nodes().contains(&t) {
                    return Err(EnvError::inapplicable(name, "operand is not an atomic sub-term"));
                }
                Ok(Equation {
                    lhs: bin(self.lhs.clone(), o, t.clone()),
                    rhs: bin(self.rhs.clone(), o, t.clone()),
                })
            }
            (a, AxiomArgs::Site(site)) if EqAxiom::LOCAL.contains(&a) => {
                let nodes = self.nodes();
                let node = (*site)
                    .checked_sub(1)
                    .and_then(|i| nodes.get(i))
                    .ok_or_else(|| EnvError::inapplicable(name, format!("no sub-term {site}")))?;
                let new = rewrite_local(a, node).ok_or_else(|| {
                    EnvError::inapplicable(name, format!("pattern does not match {}", node.to_text()))
                })?;
                Ok(self.replaced(*site, &new))
            }
            _ => Err(EnvError::inapplicable(name, format!("wrong arguments {args:?}"))),
        }
    }

    /// Every legal action: axiom-table order, then site (or operand) order.
    pub fn actions(&self) -> Vec<(String, Equation)> {
        let mut out = Vec::new();
        if self.is_solved() {
            return out;
        }
        out.push((
            "refl".to_string(),
            Equation {
                lhs: self.rhs.clone(),
                rhs: self.lhs.clone(),
            },
        ));
        let nodes = self.nodes();
        for axiom in EqAxiom::LOCAL {
            for (i, node) in nodes.iter().enumerate() {
                if let Some(new) = rewrite_local(axiom, node) {
                    let site = i + 1;
                    out.push((
                        format!("{} {site}, {}", axiom.mnemonic(), node.to_text()),
                        self.replaced(site, &new),
                    ));
                }
            }
        }
        let mut operands: Vec<&Expr> = Vec::new();
        for n in &nodes {
            if n.is_atom() && !operands.contains(n) {
                operands.push(n);
            }
        }
        for axiom in [EqAxiom::Add, EqAxiom::Sub, EqAxiom::Mul, EqAxiom::Div] {
            let o = axiom.both_sides_op().unwrap();
            for t in &operands {
                if matches!(o, BinOp::Mul | BinOp::Div) && t.is_zero_operand() {
                    continue;
                }
                out.push((
                    format!("{} {}", axiom.mnemonic(), t.to_text()),
                    Equation {
                        lhs: bin(self.lhs.clone(), o, (*t).clone()),
                        rhs: bin(self.rhs.clone(), o, (*t).clone()),
                    },
                ));
            }
        }
        out
    }
}

impl std::fmt::Display for Equation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut s = String::new();
        self.lhs.write(&mut s);
        s.push_str(" = ");
        self.rhs.write(&mut s);
        f.write_str(&s)
    }
}

struct Parser<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
    placeholders: bool,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> EnvError {
        EnvError::parse(NAME, self.text, self.pos, msg)
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn expect(&mut self, s: &str) -> Result<(), EnvError> {
        if self.bytes[self.pos..].starts_with(s.as_bytes()) {
            self.pos += s.len();
            Ok(())
        } else {
            Err(self.err(&format!("expected {s:?}")))
        }
    }

    fn equation(&mut self) -> Result<Equation, EnvError> {
        let lhs = self.expr()?;
        self.expect(" = ")?;
        let rhs = self.expr()?;
        if self.pos != self.bytes.len() {
            return Err(self.err("trailing input"));
        }
        Ok(Equation { lhs, rhs })
    }

    fn integer(&mut self) -> Result<i64, EnvError> {
        let start = self.pos;
        while self.peek().is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected digits"));
        }
        self.text[start..self.pos]
            .parse()
            .map_err(|_| self.err("integer out of range"))
    }

    fn rational(&mut self) -> Result<Rational, EnvError> {
        self.expect("[")?;
        let neg = self.peek() == Some(b'-');
        if neg {
            self.pos += 1;
        }
        let n = self.integer()?;
        self.expect("/")?;
        let d = self.integer()?;
        self.expect("]")?;
        if d == 0 {
            return Err(self.err("zero denominator"));
        }
        let r = Rational::new(if neg { -n } else { n }, d);
        Ok(r)
    }

    fn coefficient_tail(&mut self, c: Rational) -> Expr {
        if self.peek() == Some(b'x') {
            self.pos += 1;
            bin(Const(c), BinOp::Mul, Unknown)
        } else {
            Const(c)
        }
    }

    fn expr(&mut self) -> Result<Expr, EnvError> {
        match self.peek() {
            Some(b'x') => {
                self.pos += 1;
                Ok(Unknown)
            }
            Some(b'0'..=b'9') => {
                let n = self.integer()?;
                Ok(self.coefficient_tail(Rational::from_integer(n)))
            }
            Some(b'[') => {
                let r = self.rational()?;
                Ok(self.coefficient_tail(r))
            }
            Some(b'?') if self.placeholders => {
                self.pos += 1;
                Ok(self.coefficient_tail(Rational::from_integer(1)))
            }
            Some(b'-') => {
                self.pos += 1;
                if self.peek().is_some_and(|b| b.is_ascii_digit()) {
                    let n = self.integer()?;
                    if self.peek() == Some(b'x') {
                        self.pos += 1;
                        return Ok(bin(int(-n), BinOp::Mul, Unknown));
                    }
                    return Ok(Neg(Box::new(int(n))));
                }
                Ok(Neg(Box::new(self.expr()?)))
            }
            Some(b'(') => {
                self.pos += 1;
                let left = self.expr()?;
                if self.peek() == Some(b')') {
                    self.pos += 1;
                    return match left {
                        Neg(inner) => match *inner {
                            Const(c) => Ok(Const(-c)),
                            other => Ok(Neg(Box::new(other))),
                        },
                        Const(c) if c.is_negative() => Ok(Const(c)),
                        _ => Err(self.err("redundant parentheses")),
                    };
                }
                self.expect(" ")?;
                let o = self
                    .peek()
                    .and_then(BinOp::from_byte)
                    .ok_or_else(|| self.err("expected an operator"))?;
                self.pos += 1;
                self.expect(" ")?;
                let right = self.expr()?;
                self.expect(")")?;
                Ok(bin(left, o, right))
            }
            _ => Err(self.err("expected an expression")),
        }
    }
}

/// An equation skeleton whose constants are `?` placeholders.
///
/// `?` alone is a constant, `?x` a coefficient and `(-?)` the negated
/// constant. Each placeholder is instantiated independently.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquationTemplate {
    pub text: String,
    pub placeholders: usize,
}

impl EquationTemplate {
    pub fn new(text: &str) -> Result<Self, EnvError> {
        let placeholders = text.matches('?').count();
        let bad = |reason: String| EnvError::BadTemplate {
            template: text.to_string(),
            reason,
        };
        if placeholders == 0 {
            return Err(bad("no placeholders".into()));
        }
        let mut p = Parser {
            text,
            bytes: text.as_bytes(),
            pos: 0,
            placeholders: true,
        };
        p.equation().map_err(|e| bad(e.to_string()))?;
        let t = EquationTemplate {
            text: text.to_string(),
            placeholders,
        };
        t.instantiate(&vec![1; placeholders]).map_err(|e| bad(e.to_string()))?;
        Ok(t)
    }

    pub fn instantiate(&self, values: &[i64]) -> Result<Equation, EnvError> {
        let mut out = String::with_capacity(self.text.len() + 8);
        let mut vals = values.iter();
        let mut next = || -> Result<i64, EnvError> {
            vals.next().copied().ok_or_else(|| EnvError::BadTemplate {
                template: self.text.clone(),
                reason: "not enough values".into(),
            })
        };
        let b = self.text.as_bytes();
        let mut i = 0;
        while i < b.len() {
            if self.text[i..].starts_with("(-?)") {
                Const(Rational::from_integer(-next()?)).write(&mut out);
                i += 4;
            } else if b[i] == b'?' {
                let v = next()?;
                if b.get(i + 1) == Some(&b'x') {
                    let _ = write!(out, "{v}");
                } else {
                    int(v).write(&mut out);
                }
                i += 1;
            } else {
                out.push(b[i] as char);
                i += 1;
            }
        }
        let eq = Equation::parse(&out)?;
        Ok(eq)
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Equation {
        let values: Vec<i64> = (0..self.placeholders)
            .map(|_| rng.random_range(-10..=10))
            .collect();
        self.instantiate(&values)
            .expect("templates are validated on construction")
    }
}

/// Starter template set. The first two are the published examples; the
/// rest span one-step to multi-step solutions.
pub const BUNDLED_TEMPLATES: &str = "\
(?x + ?) = x
(? - (-?)) = (((? / x) + (-?)) - (-?))
(x + ?) = ?
(x - ?) = ?
?x = ?
(x / ?) = ?
(? + x) = ?
? = (x + ?)
(?x + ?) = ?
(?x - ?) = ?
? = (?x + ?)
(? - ?x) = ?
((x / ?) + ?) = ?
((x + ?) / ?) = ?
(? * (x + ?)) = ?
(? * (x - ?)) = ?
(?x + ?) = (?x + ?)
(?x - ?) = (?x + ?)
(x + ?) = (?x - ?)
(?x + ?) = (? - ?x)
(?x + (?x + ?)) = ?
((?x + ?) + ?x) = ?
(? - (x - ?)) = ?
(? / x) = ?
((? / x) + ?) = ?
(?x / ?) = (x + ?)
((?x + ?) * ?) = ?
(? * (?x - ?)) = (?x + ?)
(? * (x + ?)) = (? * (x - ?))
((?x + ?) - (?x - ?)) = ?
(((x + ?) / ?) + ?) = ?
((? + x) + ?) = (?x + ?)
";

pub fn parse_templates(text: &str) -> Result<Vec<EquationTemplate>, EnvError> {
    let templates: Vec<EquationTemplate> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(EquationTemplate::new)
        .collect::<Result<_, _>>()?;
    if templates.is_empty() {
        return Err(EnvError::EmptyTemplateSet);
    }
    Ok(templates)
}

pub fn generate_equation(seed: u64, templates: &[EquationTemplate]) -> Result<Equation, EnvError> {
    if templates.is_empty() {
        return Err(EnvError::EmptyTemplateSet);
    }
    let mut rng = problem_rng(seed);
    let t = &templates[rng.random_range(0..templates.len())];
    Ok(t.sample(&mut rng))
}

#[derive(Debug, Clone)]
pub struct Equations {
    templates: Arc<Vec<EquationTemplate>>,
}

impl Equations {
    pub fn with_templates(templates: Vec<EquationTemplate>) -> Result<Self, EnvError> {
        if templates.is_empty() {
            return Err(EnvError::EmptyTemplateSet);
        }
        Ok(Equations {
            templates: Arc::new(templates),
        })
    }

    pub fn templates(&self) -> &[EquationTemplate] {
        &self.templates
    }
}

impl Default for Equations {
    fn default() -> Self {
        Equations::with_templates(parse_templates(BUNDLED_TEMPLATES).expect("bundled templates"))
            .expect("bundled templates are non-empty")
    }
}

impl Environment for Equations {
    fn name(&self) -> &'static str {
        NAME
    }

    fn generate(&self, seed: u64) -> String {
        generate_equation(seed, &self.templates)
            .expect("non-empty template set")
            .to_string()
    }

    fn expand(&self, state: &str) -> Result<Vec<ActionEdge>, EnvError> {
        let eq = Equation::parse(state)?;
        Ok(eq
            .actions()
            .into_iter()
            .map(|(label, next)| ActionEdge {
                label,
                next_state: next.to_string(),
            })
            .collect())
    }

    fn is_solved(&self, state: &str) -> Result<bool, EnvError> {
        Ok(Equation::parse(state)?.is_solved())
    }

    fn canonicalize(&self, state: &str) -> Result<String, EnvError> {
        Ok(Equation::parse(state)?.to_string())
    }
}
