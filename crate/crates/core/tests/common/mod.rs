//! Shorthand builders for reference expressions in tests.
#![allow(dead_code)]

use std::collections::HashMap;

use heatcalc::calculus::compose::all_perms;
use heatcalc::expr::{Atom, Index, Label, TensorPolynomial};
use heatcalc::rational::{rat, Rational};

pub mod refs;

/// `"^p_k_l_j"` → [p↑, k↓, l↓, j↓].
pub fn ix(s: &str) -> Vec<Index> {
    let c: Vec<char> = s.chars().collect();
    c.chunks(2)
        .map(|w| {
            let l = Label::letter(w[1]);
            if w[0] == '^' {
                Index::up(l)
            } else {
                Index::down(l)
            }
        })
        .collect()
}

pub fn riem(s: &str) -> Atom {
    let v = ix(s);
    Atom::riemann([v[0], v[1], v[2], v[3]])
}

pub fn ric(s: &str) -> Atom {
    let v = ix(s);
    Atom::ricci(v[0], v[1])
}

pub fn curv(s: &str) -> Atom {
    let v = ix(s);
    Atom::curv(v[0], v[1])
}

pub fn xi(s: &str) -> Atom {
    Atom::momentum(ix(s)[0])
}

pub fn g(s: &str) -> Atom {
    let v = ix(s);
    Atom::metric(v[0], v[1])
}

/// Atom with a (−i∇) prefix.
pub fn d(prefix: &str, a: Atom) -> Atom {
    a.with_prefix(ix(prefix))
}

pub fn r(n: i64, m: i64) -> Rational {
    rat(n, m)
}

/// Scalar-valued monomial times the identity endomorphism.
pub fn sc(c: Rational, scalars: Vec<Atom>) -> TensorPolynomial {
    TensorPolynomial::from_atoms(c, scalars, vec![Atom::identity()]).unwrap()
}

/// Monomial with an End-valued chain.
pub fn en(c: Rational, scalars: Vec<Atom>, chain: Vec<Atom>) -> TensorPolynomial {
    TensorPolynomial::from_atoms(c, scalars, chain).unwrap()
}

/// Scalar monomial without an End factor (invariants).
pub fn num(c: Rational, scalars: Vec<Atom>) -> TensorPolynomial {
    TensorPolynomial::from_atoms(c, scalars, vec![]).unwrap()
}

pub fn sum(parts: Vec<TensorPolynomial>) -> TensorPolynomial {
    let mut acc = TensorPolynomial::zero();
    for p in &parts {
        acc.add_assign(p);
    }
    acc
}

/// Average of `p` over all permutations of the letters in `labels`.
pub fn sigma(labels: &str, p: &TensorPolynomial) -> TensorPolynomial {
    let ls: Vec<Label> = labels.chars().map(Label::letter).collect();
    let perms = all_perms(ls.len());
    let mut acc = TensorPolynomial::zero();
    for perm in &perms {
        let map: HashMap<Label, Label> = ls.iter().enumerate().map(|(k, l)| (*l, ls[perm[k]])).collect();
        acc.add_assign(&p.rename(&map).unwrap());
    }
    acc.scale(&rat(1, perms.len() as i64))
}

pub fn mi(s: &str) -> heatcalc::rho_chi::MultiIndex {
    heatcalc::rho_chi::MultiIndex::parse(s).unwrap()
}

pub fn scal() -> Atom {
    Atom::scalar()
}

pub fn endo() -> Atom {
    Atom::endo_a()
}

pub fn tr(chain: Vec<Atom>) -> Atom {
    Atom::trace(chain)
}

pub fn fib() -> Atom {
    Atom::fiber_dim()
}
