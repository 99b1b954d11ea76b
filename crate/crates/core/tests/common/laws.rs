//! Conservation and algebraic laws checked on 10⁴ random axiom applications
//! per domain. Each check panics on the first violation. Every value oracle
//! here parses the state text on its own, without going through the
//! environment's parser.

use conpole::env::{make_env, Environment};
use num_rational::Ratio;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

const APPLICATIONS: usize = 10_000;

type Q = Ratio<i128>;

/// Visits `(state, label, next)` for random walks of up to 20 steps.
fn random_applications(env: &dyn Environment, seed: u64, mut check: impl FnMut(&str, &str, &str)) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut done = 0;
    let mut problem = 0u64;
    while done < APPLICATIONS {
        let mut state = env.generate(rng.random_range(0..1_000_000) + problem);
        problem += 1;
        for _ in 0..20 {
            let edges = env.expand(&state).unwrap();
            let Some(e) = edges.choose(&mut rng) else { break };
            check(&state, &e.label, &e.next_state);
            done += 1;
            state = e.next_state.clone();
        }
    }
}

struct Cursor<'a> {
    s: &'a [u8],
    i: usize,
}

impl<'a> Cursor<'a> {
    fn new(s: &'a str) -> Self {
        Cursor { s: s.as_bytes(), i: 0 }
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.i).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, b: u8) {
        assert!(self.eat(b), "expected {:?} at {} in {:?}", b as char, self.i, String::from_utf8_lossy(self.s));
    }

    fn int(&mut self) -> i128 {
        let neg = self.eat(b'-');
        let start = self.i;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.i += 1;
        }
        let v: i128 = std::str::from_utf8(&self.s[start..self.i]).unwrap().parse().unwrap();
        if neg {
            -v
        } else {
            v
        }
    }

    fn op(&mut self) -> u8 {
        self.expect(b' ');
        let o = self.peek().unwrap();
        self.i += 1;
        self.expect(b' ');
        o
    }

    fn done(&self) -> bool {
        self.i == self.s.len()
    }
}

fn apply(o: u8, a: Q, b: Q) -> Option<Q> {
    match o {
        b'+' => Some(a + b),
        b'-' => Some(a - b),
        b'*' => Some(a * b),
        b'/' if b != Q::from_integer(0) => Some(a / b),
        b'/' => None,
        _ => panic!("operator {:?}", o as char),
    }
}

/// `n` or `(e op e)` over whole numbers.
fn int_expr(c: &mut Cursor) -> Q {
    if c.eat(b'(') {
        let a = int_expr(c);
        let o = c.op();
        let b = int_expr(c);
        c.expect(b')');
        apply(o, a, b).unwrap()
    } else {
        Q::from_integer(c.int())
    }
}

fn frac_operand(c: &mut Cursor) -> Q {
    if c.eat(b'[') {
        let n = int_expr(c);
        c.expect(b']');
        c.expect(b'/');
        c.expect(b'[');
        let d = int_expr(c);
        c.expect(b']');
        n / d
    } else {
        int_expr(c)
    }
}

fn fraction_value(s: &str) -> Q {
    let mut c = Cursor::new(s);
    let a = frac_operand(&mut c);
    let v = if c.done() {
        a
    } else {
        let o = c.op();
        let b = frac_operand(&mut c);
        apply(o, a, b).unwrap()
    };
    assert!(c.done(), "trailing input in {s:?}");
    v
}

fn ternary_value(s: &str) -> u128 {
    let inner = s.strip_prefix("#(").unwrap().strip_suffix(')').unwrap();
    inner
        .split_whitespace()
        .map(|t| {
            let b = t.as_bytes();
            (b[0] - b'a') as u128 * 3u128.pow((b[1] - b'0') as u32)
        })
        .sum()
}

/// Value of one side of an equation at `x`; `None` where undefined.
fn eq_side(c: &mut Cursor, x: Q) -> Option<Q> {
    let coef = |c: &mut Cursor, v: Q| if c.eat(b'x') { v * x } else { v };
    match c.peek().unwrap() {
        b'(' => {
            c.i += 1;
            let a = eq_side(c, x);
            if c.eat(b')') {
                return a;
            }
            let o = c.op();
            let b = eq_side(c, x);
            c.expect(b')');
            apply(o, a?, b?)
        }
        b'-' => {
            c.i += 1;
            if c.peek().is_some_and(|d| d.is_ascii_digit()) {
                let v = Q::from_integer(-c.int());
                Some(coef(c, v))
            } else {
                eq_side(c, x).map(|v| -v)
            }
        }
        b'[' => {
            c.i += 1;
            let n = c.int();
            c.expect(b'/');
            let d = c.int();
            c.expect(b']');
            Some(coef(c, Q::new(n, d)))
        }
        b'x' => {
            c.i += 1;
            Some(x)
        }
        _ => {
            let v = Q::from_integer(c.int());
            Some(coef(c, v))
        }
    }
}

fn equation_sides(s: &str, x: Q) -> (Option<Q>, Option<Q>) {
    let (l, r) = s.split_once(" = ").unwrap();
    let eval = |t: &str| {
        let mut c = Cursor::new(t);
        let v = eq_side(&mut c, x);
        assert!(c.done(), "trailing input in {t:?}");
        v
    };
    (eval(l), eval(r))
}

pub fn ternary_addition_conserves_value() {
    let env = make_env("ternary-addition").unwrap();
    random_applications(&*env, 1, |s, a, n| {
        assert_eq!(ternary_value(s), ternary_value(n), "{s} | {a} => {n}");
    });
}

pub fn fractions_conserve_value() {
    let env = make_env("fractions").unwrap();
    random_applications(&*env, 2, |s, a, n| {
        assert_eq!(fraction_value(s), fraction_value(n), "{s} | {a} => {n}");
    });
}

pub fn multiplication_conserves_value() {
    let env = make_env("multiplication").unwrap();
    random_applications(&*env, 3, |s, a, n| {
        let (mut c1, mut c2) = (Cursor::new(s), Cursor::new(n));
        assert_eq!(int_expr(&mut c1), int_expr(&mut c2), "{s} | {a} => {n}");
        assert!(c1.done() && c2.done());
    });
}

pub fn sorting_keeps_the_multiset_and_reverse_is_an_involution() {
    let env = make_env("sorting").unwrap();
    let runs = |s: &str| {
        let mut v: Vec<usize> = s
            .trim_start_matches('[')
            .trim_end_matches(']')
            .split('|')
            .map(str::len)
            .collect();
        v.sort();
        v
    };
    let reverse = |s: &str| {
        env.expand(s)
            .unwrap()
            .into_iter()
            .find(|e| e.label == "reverse")
            .map(|e| e.next_state)
    };
    random_applications(&*env, 4, |s, a, n| {
        assert_eq!(runs(s), runs(n), "{s} | {a} => {n}");
        let r = reverse(s).expect("unsolved states can reverse");
        if let Some(back) = reverse(&r) {
            assert_eq!(back, s);
        }
    });
}

pub fn equations_round_trip_and_local_rewrites_preserve_each_side() {
    let env = make_env("equations").unwrap();
    let both_sides = ["refl", "add", "sub", "mul", "div"];
    let xs = [Q::new(-7, 3), Q::from_integer(2), Q::from_integer(5), Q::new(11, 2)];
    let mut local = 0;
    random_applications(&*env, 5, |s, a, n| {
        assert_eq!(env.canonicalize(n).unwrap(), n);
        assert_eq!(
            conpole::env::equations::Equation::parse(n).unwrap().to_string(),
            n
        );
        let mnemonic = a.split_whitespace().next().unwrap();
        if both_sides.contains(&mnemonic) {
            return;
        }
        local += 1;
        for &x in &xs {
            let (l1, r1) = equation_sides(s, x);
            let (l2, r2) = equation_sides(n, x);
            if let (Some(a), Some(b)) = (l1, l2) {
                assert_eq!(a, b, "lhs at x={x}: {s} | {a} => {n}");
            }
            if let (Some(a), Some(b)) = (r1, r2) {
                assert_eq!(a, b, "rhs at x={x}: {s} | {a} => {n}");
            }
        }
    });
    assert!(local > 1000, "only {local} local rewrites sampled");
}

pub fn rubiks_moves_invert_and_have_order_four() {
    let env = make_env("rubiks-cube").unwrap();
    let apply = |s: &str, m: &str| {
        env.expand(s)
            .unwrap()
            .into_iter()
            .find(|e| e.label == m)
            .unwrap_or_else(|| panic!("no move {m} at {s}"))
            .next_state
    };
    let inverse = |m: &str| match m.strip_suffix('\'') {
        Some(base) => base.to_string(),
        None => format!("{m}'"),
    };
    random_applications(&*env, 6, |s, m, n| {
        if env.is_solved(n).unwrap() {
            return;
        }
        assert_eq!(apply(n, &inverse(m)), s, "{m}");
        let mut t = n.to_string();
        for _ in 0..3 {
            if env.is_solved(&t).unwrap() {
                return;
            }
            t = apply(&t, m);
        }
        assert_eq!(t, s, "{m} has order four");
    });
}
