//! Normal form modulo the curvature identities.
//!
//! Starting from the monomials of the input, every first and second Bianchi
//! relation and every Ricci commutation of adjacent derivatives is generated
//! until no new monomial appears. The relations are row-reduced with the
//! largest monomial as pivot, and the input is reduced onto the remaining
//! monomials. Two polynomials are equal modulo the identities exactly when the
//! normal form of their difference is zero.

use std::collections::{BTreeMap, HashMap, VecDeque};

use num_traits::{One, Zero};

use super::deriv::{derive_term, Fresh};
use crate::error::{Error, Result};
use crate::expr::canon::Term;
use crate::expr::{Atom, Index, Kind, TensorPolynomial, Variance};
use crate::rational::Rational;

/// Cap on the number of monomials in one closure.
pub const MAX_CLOSURE: usize = 200_000;

#[derive(Clone, Copy, Debug)]
enum Loc {
    Scalar(usize),
    Chain(usize),
    Inner(usize, usize),
}

fn atom_at(t: &Term, loc: Loc) -> &Atom {
    match loc {
        Loc::Scalar(k) => &t.scalars[k],
        Loc::Chain(k) => &t.chain[k],
        Loc::Inner(k, j) => &t.scalars[k].inner[j],
    }
}

fn replace(t: &Term, loc: Loc, a: Atom) -> Term {
    let mut u = t.clone();
    match loc {
        Loc::Scalar(k) => u.scalars[k] = a,
        Loc::Chain(k) => u.chain[k] = a,
        Loc::Inner(k, j) => u.scalars[k].inner[j] = a,
    }
    u
}

/// Replaces the atom at `loc` by the scalar and chain factors of `frag`.
fn splice(t: &Term, loc: Loc, frag: &Term) -> Term {
    let mut u = t.clone();
    match loc {
        Loc::Scalar(k) => {
            u.scalars.remove(k);
            u.scalars.extend(frag.scalars.iter().cloned());
            u.chain.extend(frag.chain.iter().cloned());
        }
        Loc::Chain(k) => {
            u.chain.splice(k..=k, frag.chain.iter().cloned());
            u.scalars.extend(frag.scalars.iter().cloned());
        }
        Loc::Inner(k, j) => {
            u.scalars[k].inner.splice(j..=j, frag.chain.iter().cloned());
            u.scalars.extend(frag.scalars.iter().cloned());
        }
    }
    u
}

fn locations(t: &Term) -> Vec<Loc> {
    let mut out = Vec::new();
    for (k, a) in t.scalars.iter().enumerate() {
        if a.kind == Kind::Trace {
            for j in 0..a.inner.len() {
                out.push(Loc::Inner(k, j));
            }
        } else {
            out.push(Loc::Scalar(k));
        }
    }
    for k in 0..t.chain.len() {
        out.push(Loc::Chain(k));
    }
    out
}

/// Ricci and scalar curvature written as contractions of the Riemann tensor.
fn expand_contracted(a: &Atom, fresh: &mut Fresh) -> Option<Atom> {
    match a.kind {
        Kind::Riemann => Some(a.clone()),
        Kind::Ricci => {
            let p = fresh.next();
            Some(
                Atom::riemann([a.slots[0], Index::down(p), a.slots[1], Index::up(p)])
                    .with_prefix(a.prefix.clone()),
            )
        }
        Kind::Scalar => {
            let p = fresh.next();
            let q = fresh.next();
            Some(
                Atom::riemann([Index::down(q), Index::down(p), Index::up(q), Index::up(p)])
                    .with_prefix(a.prefix.clone()),
            )
        }
        _ => None,
    }
}

fn relation(terms: Vec<(Rational, Term)>) -> Result<TensorPolynomial> {
    let mut p = TensorPolynomial::zero();
    for (c, t) in terms {
        p.add_term(c, t)?;
    }
    Ok(p)
}

fn first_bianchi(t: &Term, loc: Loc) -> Result<Option<TensorPolynomial>> {
    let a = atom_at(t, loc);
    if a.kind != Kind::Riemann {
        return Ok(None);
    }
    let s = &a.slots;
    let mut terms = Vec::new();
    for perm in [[0, 1, 2, 3], [0, 2, 3, 1], [0, 3, 1, 2]] {
        let mut b = a.clone();
        b.slots = perm.iter().map(|&k| s[k]).collect();
        terms.push((Rational::one(), replace(t, loc, b)));
    }
    relation(terms).map(Some)
}

fn second_bianchi(t: &Term, loc: Loc) -> Result<Vec<TensorPolynomial>> {
    let a = atom_at(t, loc);
    if a.prefix.is_empty() {
        return Ok(vec![]);
    }
    let last = a.prefix.len() - 1;
    let cycle = |b: &Atom, x: usize, y: usize| -> Result<TensorPolynomial> {
        let e = b.prefix[last];
        let (sx, sy) = (b.slots[x], b.slots[y]);
        let mut terms = vec![(Rational::one(), replace(t, loc, b.clone()))];
        let mut b1 = b.clone();
        b1.prefix[last] = sx;
        b1.slots[x] = sy;
        b1.slots[y] = e;
        terms.push((Rational::one(), replace(t, loc, b1)));
        let mut b2 = b.clone();
        b2.prefix[last] = sy;
        b2.slots[x] = e;
        b2.slots[y] = sx;
        terms.push((Rational::one(), replace(t, loc, b2)));
        relation(terms)
    };
    match a.kind {
        Kind::BundleCurv => Ok(vec![cycle(a, 0, 1)?]),
        Kind::Riemann | Kind::Ricci | Kind::Scalar => {
            let mut fresh = Fresh::above(t);
            let b = expand_contracted(a, &mut fresh).expect("curvature atom");
            Ok(vec![cycle(&b, 2, 3)?, cycle(&b, 0, 1)?])
        }
        _ => Ok(vec![]),
    }
}

fn ricci_identities(t: &Term, loc: Loc) -> Result<Vec<TensorPolynomial>> {
    let x = atom_at(t, loc);
    if !x.kind.differentiable() || x.prefix.len() < 2 {
        return Ok(vec![]);
    }
    let endo = matches!(loc, Loc::Chain(_) | Loc::Inner(..));
    let mut out = Vec::new();
    for k in 0..x.prefix.len() - 1 {
        let (a, b) = (x.prefix[k], x.prefix[k + 1]);
        let outer = &x.prefix[..k];
        let mut y = x.clone();
        y.prefix = x.prefix[k + 2..].to_vec();

        let mut fresh = Fresh::above(t);
        let mut frags: Vec<(Rational, Term)> = Vec::new();
        let nidx = y.prefix.len() + y.slots.len();
        for q in 0..nidx {
            let c = if q < y.prefix.len() { y.prefix[q] } else { y.slots[q - y.prefix.len()] };
            let p = fresh.next();
            let (rm, repl, sign) = match c.var {
                Variance::Down => (Atom::riemann([Index::up(p), c, a, b]), Index::down(p), 1),
                Variance::Up => (Atom::riemann([c, Index::down(p), a, b]), Index::up(p), -1),
            };
            let mut y2 = y.clone();
            if q < y.prefix.len() {
                y2.prefix[q] = repl;
            } else {
                y2.slots[q - y.prefix.len()] = repl;
            }
            let frag = if endo {
                Term { scalars: vec![rm], chain: vec![y2] }
            } else {
                Term { scalars: vec![rm, y2], chain: vec![] }
            };
            frags.push((Rational::from_integer(sign.into()), frag));
        }
        if endo {
            let f = Atom::curv(a, b);
            frags.push((-Rational::one(), Term { scalars: vec![], chain: vec![f.clone(), y.clone()] }));
            frags.push((Rational::one(), Term { scalars: vec![], chain: vec![y.clone(), f] }));
        }
        for o in outer.iter().rev() {
            frags = frags
                .into_iter()
                .flat_map(|(c, f)| derive_term(&f, *o).into_iter().map(move |g| (c.clone(), g)))
                .collect();
        }

        let mut swapped = x.clone();
        swapped.prefix.swap(k, k + 1);
        let mut terms = vec![(Rational::one(), t.clone()), (-Rational::one(), replace(t, loc, swapped))];
        for (c, f) in frags {
            terms.push((-c, splice(t, loc, &f)));
        }
        out.push(relation(terms)?);
    }
    Ok(out)
}

/// All identity relations anchored at one monomial.
pub fn relations_of(t: &Term) -> Result<Vec<TensorPolynomial>> {
    let mut out = Vec::new();
    for loc in locations(t) {
        if let Some(r) = first_bianchi(t, loc)? {
            out.push(r);
        }
        out.extend(second_bianchi(t, loc)?);
        out.extend(ricci_identities(t, loc)?);
    }
    out.retain(|r| !r.is_zero());
    Ok(out)
}

type Row = BTreeMap<usize, Rational>;

fn sub_scaled(row: &mut Row, other: &Row, s: &Rational) {
    for (k, v) in other {
        let e = row.entry(*k).or_insert_with(Rational::zero);
        *e -= v * s;
        if e.is_zero() {
            row.remove(k);
        }
    }
}

/// Normal form of `p` modulo the first and second Bianchi identities and the
/// Ricci commutation identities.
pub fn simplify_identities(p: &TensorPolynomial) -> Result<TensorPolynomial> {
    if p.is_zero() {
        return Ok(p.clone());
    }
    let mut index: HashMap<Term, usize> = HashMap::new();
    let mut monos: Vec<Term> = Vec::new();
    let mut queue: VecDeque<usize> = VecDeque::new();
    let mut rels: Vec<TensorPolynomial> = Vec::new();
    let mut intern = |t: &Term, monos: &mut Vec<Term>, queue: &mut VecDeque<usize>| -> usize {
        if let Some(&k) = index.get(t) {
            return k;
        }
        let k = monos.len();
        monos.push(t.clone());
        index.insert(t.clone(), k);
        queue.push_back(k);
        k
    };
    for (t, _) in p.iter() {
        intern(t, &mut monos, &mut queue);
    }
    while let Some(k) = queue.pop_front() {
        let t = monos[k].clone();
        for r in relations_of(&t)? {
            for (u, _) in r.iter() {
                intern(u, &mut monos, &mut queue);
            }
            rels.push(r);
        }
        if monos.len() > MAX_CLOSURE {
            return Err(Error::Capacity { got: monos.len(), bound: MAX_CLOSURE });
        }
    }

    // rank monomials: larger rank = eliminated first
    let mut order: Vec<usize> = (0..monos.len()).collect();
    order.sort_by(|&i, &j| {
        (monos[i].deriv_count(), &monos[i]).cmp(&(monos[j].deriv_count(), &monos[j]))
    });
    let mut rank = vec![0usize; monos.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    let index_of: HashMap<&Term, usize> = monos.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let to_row = |q: &TensorPolynomial| -> Row { q.iter().map(|(t, c)| (rank[index_of[t]], c.clone())).collect() };

    let mut pivots: HashMap<usize, Row> = HashMap::new();
    for r in &rels {
        let mut row = to_row(r);
        while let Some((&lead, _)) = row.iter().next_back() {
            if let Some(pr) = pivots.get(&lead) {
                let s = row[&lead].clone();
                sub_scaled(&mut row, pr, &s);
            } else {
                let inv = Rational::one() / &row[&lead];
                for v in row.values_mut() {
                    *v *= &inv;
                }
                pivots.insert(lead, row);
                break;
            }
        }
    }

    let mut row = to_row(p);
    let mut result = Row::new();
    while let Some((&lead, _)) = row.iter().next_back() {
        if let Some(pr) = pivots.get(&lead) {
            let s = row[&lead].clone();
            sub_scaled(&mut row, pr, &s);
        } else {
            let v = row.remove(&lead).unwrap();
            result.insert(lead, v);
        }
    }
    let mut out = TensorPolynomial::zero();
    for (r, c) in result {
        out.push_canonical(monos[order[r]].clone(), c);
    }
    Ok(out)
}

/// Whether two polynomials agree modulo the curvature identities.
pub fn equal_modulo_identities(a: &TensorPolynomial, b: &TensorPolynomial) -> Result<bool> {
    Ok(simplify_identities(&(a - b))?.is_zero())
}
