//! Normal form of products of symmetrized covariant derivatives.
//!
//! Operator polynomials are tensor polynomials whose terms carry one `SymDeriv`
//! factor: a term c·Sym(γ) stands for c acting on (−i∇)^γ u, with Sym(γ) the
//! average of the plain derivative strings over all orderings of γ.
//!
//! Symmetric bags of derivative directions are written with the probe vector η:
//! (η·D)^t Sym(μ) keeps one term per tensor shape instead of one per labelled
//! arrangement, and explicit labels are recovered by polarization.
//!
//! The core identity moves one derivative into a symmetrized block:
//! D_a Sym(γ) = Sym(aγ) + E(a;γ), where E collects the commutator terms
//! [D_a, D_b] = −ℛ_ab on the bundle slot and +R^p_{cab} on each tensor slot c.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use num_traits::Zero;

use super::deriv::{derive_along, derive_term, Fresh};
use crate::error::{Error, Result};
use crate::expr::canon::Term;
use crate::expr::poly::{mul_terms, relabel_term};
use crate::expr::{Atom, Index, Kind, Label, TensorPolynomial};
use crate::rational::{binom, int, one, rat, Rational};

/// A derivative direction: the probe η or an explicit label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dir {
    Eta,
    Lab(Label),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Key {
    Eta,
    P(u8),
}

type Cache<K> = RwLock<HashMap<K, Arc<TensorPolynomial>>>;

/// Memoizing engine for symmetrized-derivative compositions. Caches are
/// write-once: a racing insert keeps the first value, which is identical.
pub struct Composer {
    flat_bundle: bool,
    bound: usize,
    plain: Cache<Vec<Key>>,
    eterm: Cache<(bool, usize, usize)>,
    powers: Cache<(usize, usize)>,
}

fn cached<K: std::hash::Hash + Eq + Clone>(
    cache: &Cache<K>,
    key: &K,
    compute: impl FnOnce() -> Result<TensorPolynomial>,
) -> Result<Arc<TensorPolynomial>> {
    if let Some(v) = cache.read().expect("cache lock").get(key) {
        return Ok(v.clone());
    }
    let v = Arc::new(compute()?);
    let mut w = cache.write().expect("cache lock");
    Ok(w.entry(key.clone()).or_insert(v).clone())
}

fn index_for(d: Dir, fresh: &mut Fresh, markers: &mut Vec<Atom>) -> Index {
    match d {
        Dir::Lab(l) => Index::down(l),
        Dir::Eta => {
            let l = fresh.next();
            markers.push(Atom::probe(Kind::ProbeEta, Index::up(l)));
            Index::down(l)
        }
    }
}

/// Sym(dirs) as an operator polynomial with unit coefficient.
pub fn sym_of(dirs: &[Dir]) -> Result<TensorPolynomial> {
    let mut fresh = Fresh::new();
    let mut markers = Vec::new();
    let slots: Vec<Index> = dirs.iter().map(|d| index_for(*d, &mut fresh, &mut markers)).collect();
    markers.push(Atom::sym_deriv(slots));
    TensorPolynomial::from_atoms(one(), markers, vec![Atom::identity()])
}

fn distinct_perms(items: &[Dir]) -> Vec<Vec<Dir>> {
    let mut sorted = items.to_vec();
    sorted.sort();
    let mut out = Vec::new();
    let mut used = vec![false; sorted.len()];
    let mut cur = Vec::with_capacity(sorted.len());
    fn rec(s: &[Dir], used: &mut [bool], cur: &mut Vec<Dir>, out: &mut Vec<Vec<Dir>>) {
        if cur.len() == s.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..s.len() {
            if used[i] || (i > 0 && s[i] == s[i - 1] && !used[i - 1]) {
                continue;
            }
            used[i] = true;
            cur.push(s[i]);
            rec(s, used, cur, out);
            cur.pop();
            used[i] = false;
        }
    }
    rec(&sorted, &mut used, &mut cur, &mut out);
    out
}

/// Weight of the bundle term with `o` outer derivatives on the curvature factor.
fn weight_bundle(r: usize, o: usize) -> i64 {
    (o..r).map(|q| (r - q) as i64 * binom(q as i64, o as i64)).sum()
}

/// Weight of the tangent term acting on slot position `c` (0-based).
fn weight_tangent(r: usize, o: usize, c: usize) -> i64 {
    (o..c).map(|q| (r - q) as i64 * binom(q as i64, o as i64)).sum()
}

/// Splits c·Sym(γ) into c (without the η factors owned by γ), the η count of γ
/// and the remaining γ indices.
fn split_operator_term(t: &Term) -> Result<(Term, usize, Vec<Index>)> {
    let pos = t
        .scalars
        .iter()
        .position(|a| a.kind == Kind::SymDeriv)
        .ok_or_else(|| Error::Structural("operator term without SymDeriv".into()))?;
    let sd = &t.scalars[pos];
    let mut eta_owned = Vec::new();
    let mut labels = Vec::new();
    for i in &sd.slots {
        let is_eta = t
            .scalars
            .iter()
            .any(|a| a.kind == Kind::ProbeEta && a.slots[0].label == i.label);
        if is_eta {
            eta_owned.push(i.label);
        } else {
            labels.push(*i);
        }
    }
    let scalars = t
        .scalars
        .iter()
        .enumerate()
        .filter(|(k, a)| {
            *k != pos && !(a.kind == Kind::ProbeEta && eta_owned.contains(&a.slots[0].label))
        })
        .map(|(_, a)| a.clone())
        .collect();
    Ok((Term { scalars, chain: t.chain.clone() }, eta_owned.len(), labels))
}

impl Composer {
    /// `bound` caps the total derivative order |α|+|β| of public requests.
    pub fn new(flat_bundle: bool, bound: usize) -> Composer {
        Composer {
            flat_bundle,
            bound,
            plain: RwLock::new(HashMap::new()),
            eterm: RwLock::new(HashMap::new()),
            powers: RwLock::new(HashMap::new()),
        }
    }

    pub fn flat_bundle(&self) -> bool {
        self.flat_bundle
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn check_bound(&self, order: usize) -> Result<()> {
        if order > self.bound {
            return Err(Error::Capacity { got: order, bound: self.bound });
        }
        Ok(())
    }

    /// Normal form of the plain string D_{d1} D_{d2} … D_{dm} u (D_{dm} acts first).
    pub fn plain_nf(&self, dirs: &[Dir]) -> Result<TensorPolynomial> {
        let mut keys = Vec::with_capacity(dirs.len());
        let mut map: HashMap<Label, Index> = HashMap::new();
        for d in dirs {
            match d {
                Dir::Eta => keys.push(Key::Eta),
                Dir::Lab(l) => {
                    let k = map.len();
                    map.insert(Label::placeholder(k), Index::down(*l));
                    keys.push(Key::P(k as u8));
                }
            }
        }
        let tmpl = cached(&self.plain, &keys, || self.compute_plain(&keys))?;
        tmpl.relabel(&map)
    }

    fn compute_plain(&self, keys: &[Key]) -> Result<TensorPolynomial> {
        let dirs: Vec<Dir> = keys
            .iter()
            .map(|k| match k {
                Key::Eta => Dir::Eta,
                Key::P(i) => Dir::Lab(Label::placeholder(*i as usize)),
            })
            .collect();
        if dirs.len() <= 1 {
            return sym_of(&dirs);
        }
        let tail = self.plain_nf(&dirs[1..])?;
        self.apply_d(dirs[0], &tail)
    }

    /// D_a applied to an operator polynomial, result in normal form.
    pub fn apply_d(&self, a: Dir, x: &TensorPolynomial) -> Result<TensorPolynomial> {
        let mut acc = TensorPolynomial::zero();
        for (t, c) in x.iter() {
            // derivative falling on the coefficient
            let dts = match a {
                Dir::Lab(l) => derive_term(t, Index::down(l)),
                Dir::Eta => derive_along(t, Kind::ProbeEta),
            };
            for u in dts {
                acc.add_term(c.clone(), u)?;
            }

            // top-order symmetrized term
            let mut u = t.clone();
            let mut fresh = Fresh::above(t);
            let mut markers = Vec::new();
            let idx = index_for(a, &mut fresh, &mut markers);
            let sd = u.scalars.iter().position(|b| b.kind == Kind::SymDeriv).unwrap();
            u.scalars[sd].slots.push(idx);
            u.scalars.extend(markers);
            acc.add_term(c.clone(), u)?;

            // commutator corrections
            let (coef, s, labels) = split_operator_term(t)?;
            if s + labels.len() == 0 {
                continue;
            }
            let a_eta = a == Dir::Eta;
            let tmpl = cached(&self.eterm, &(a_eta, s, labels.len()), || {
                self.compute_eterm(a_eta, s, labels.len())
            })?;
            let mut map: HashMap<Label, Index> = HashMap::new();
            for (k, i) in labels.iter().enumerate() {
                map.insert(Label::placeholder(k), *i);
            }
            if let Dir::Lab(l) = a {
                map.insert(Label::placeholder(labels.len()), Index::down(l));
            }
            for (tt, tc) in tmpl.iter() {
                let rt = relabel_term(tt, &map);
                acc.add_term(c * tc, mul_terms(&coef, &rt))?;
            }
        }
        Ok(acc)
    }

    /// E(a;γ) for γ = η^s ∪ {P0..P(u−1)} and a = η or P_u.
    fn compute_eterm(&self, a_eta: bool, s: usize, u: usize) -> Result<TensorPolynomial> {
        let r = s + u;
        let mut gamma: Vec<Dir> = vec![Dir::Eta; s];
        gamma.extend((0..u).map(|k| Dir::Lab(Label::placeholder(k))));
        let a = if a_eta { Dir::Eta } else { Dir::Lab(Label::placeholder(u)) };
        let arrangements = distinct_perms(&gamma);
        let mut acc = TensorPolynomial::zero();
        for y in &arrangements {
            for o in 0..r {
                let b = y[o];
                if a == Dir::Eta && b == Dir::Eta {
                    continue;
                }
                let outer = &y[..o];
                let rest = &y[o + 1..];
                if !self.flat_bundle {
                    let w = weight_bundle(r, o);
                    let mut fresh = Fresh::new();
                    let mut markers = Vec::new();
                    let prefix: Vec<Index> =
                        outer.iter().map(|d| index_for(*d, &mut fresh, &mut markers)).collect();
                    let ia = index_for(a, &mut fresh, &mut markers);
                    let ib = index_for(b, &mut fresh, &mut markers);
                    let coef = Term {
                        scalars: markers,
                        chain: vec![Atom::curv(ia, ib).with_prefix(prefix)],
                    };
                    let nf = self.plain_nf(rest)?;
                    for (nt, nc) in nf.iter() {
                        acc.add_term(-(nc * int(w)), mul_terms(&coef, nt))?;
                    }
                }
                for c in o + 1..r {
                    let w = weight_tangent(r, o, c);
                    if w == 0 {
                        continue;
                    }
                    let mut fresh = Fresh::new();
                    let mut markers = Vec::new();
                    let p = fresh.next();
                    let prefix: Vec<Index> =
                        outer.iter().map(|d| index_for(*d, &mut fresh, &mut markers)).collect();
                    let ic = index_for(y[c], &mut fresh, &mut markers);
                    let ia = index_for(a, &mut fresh, &mut markers);
                    let ib = index_for(b, &mut fresh, &mut markers);
                    let mut scalars = markers;
                    scalars.push(Atom::riemann([Index::up(p), ic, ia, ib]).with_prefix(prefix));
                    let coef = Term { scalars, chain: vec![Atom::identity()] };
                    let mut string = rest.to_vec();
                    string[c - o - 1] = Dir::Lab(p);
                    let nf = self.plain_nf(&string)?;
                    for (nt, nc) in nf.iter() {
                        acc.add_term(nc * int(w), mul_terms(&coef, nt))?;
                    }
                }
            }
        }
        Ok(acc.scale(&rat(1, (arrangements.len() * (r + 1)) as i64)))
    }

    /// Normal form of (−i∇)^α (−i∇)^β for multi-indices of distinct abstract labels.
    pub fn compose_sym_derivs(&self, alpha: &[Label], beta: &[Label]) -> Result<TensorPolynomial> {
        self.check_bound(alpha.len() + beta.len())?;
        check_distinct(alpha.iter().chain(beta))?;
        polarize(&self.sym_power(alpha.len(), beta)?, Kind::ProbeEta, alpha)
    }

    /// (η·D)^t Sym(μ) with μ given by explicit labels.
    pub fn sym_power(&self, t: usize, mu: &[Label]) -> Result<TensorPolynomial> {
        let tmpl = cached(&self.powers, &(t, mu.len()), || {
            let dirs: Vec<Dir> = (0..mu.len()).map(|k| Dir::Lab(Label::placeholder(k))).collect();
            let mut x = sym_of(&dirs)?;
            for _ in 0..t {
                x = self.apply_d(Dir::Eta, &x)?;
            }
            Ok(x)
        })?;
        let map: HashMap<Label, Index> =
            mu.iter().enumerate().map(|(k, l)| (Label::placeholder(k), Index::down(*l))).collect();
        tmpl.relabel(&map)
    }
}

/// Replaces the probe factors of `kind` by the explicit labels, averaged over assignments.
pub fn polarize(p: &TensorPolynomial, kind: Kind, labels: &[Label]) -> Result<TensorPolynomial> {
    let m = labels.len();
    let perms = all_perms(m);
    let w = rat(1, perms.len() as i64);
    p.map_terms(|t, c| {
        let marker_pos: Vec<usize> =
            (0..t.scalars.len()).filter(|&k| t.scalars[k].kind == kind).collect();
        if marker_pos.len() != m {
            return Err(Error::Structural(format!(
                "polarization expects {} probes, found {}",
                m,
                marker_pos.len()
            )));
        }
        let probe_labels: Vec<Label> = marker_pos.iter().map(|&k| t.scalars[k].slots[0].label).collect();
        let base = Term {
            scalars: t
                .scalars
                .iter()
                .enumerate()
                .filter(|(k, _)| !marker_pos.contains(k))
                .map(|(_, a)| a.clone())
                .collect(),
            chain: t.chain.clone(),
        };
        let mut out = Vec::with_capacity(perms.len());
        for perm in &perms {
            let mut u = base.clone();
            u.for_each_index_mut(&mut |i| {
                if let Some(k) = probe_labels.iter().position(|l| *l == i.label) {
                    *i = Index::down(labels[perm[k]]);
                }
            });
            out.push((c * &w, u));
        }
        Ok(out)
    })
}

/// Multi-index labels stand for distinct abstract slots; a repeat would read as a contraction.
pub fn check_distinct<'a>(labels: impl Iterator<Item = &'a Label>) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for l in labels {
        if !seen.insert(*l) {
            return Err(Error::IndexBalance { label: l.name(), count: 2 });
        }
    }
    Ok(())
}

pub fn all_perms(m: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for k in 0..m {
        let mut next = Vec::new();
        for p in &out {
            for pos in 0..=k {
                let mut q: Vec<usize> = p.clone();
                q.insert(pos, k);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

/// Substitutes ξ for (−i∇) in an operator polynomial: c·Sym(γ) ↦ c·ξ^γ.
pub fn operator_symbol(p: &TensorPolynomial) -> Result<TensorPolynomial> {
    p.map_terms(|t, c| {
        let mut u = t.clone();
        if let Some(pos) = u.scalars.iter().position(|a| a.kind == Kind::SymDeriv) {
            let sd = u.scalars.remove(pos);
            for i in sd.slots {
                u.scalars.push(Atom::momentum(i));
            }
        }
        Ok(vec![(c.clone(), u)])
    })
}

/// Number of factors of a kind in a term (top level only).
pub fn count_top(t: &Term, kind: Kind) -> usize {
    t.scalars.iter().filter(|a| a.kind == kind).count()
}

pub fn is_zero(r: &Rational) -> bool {
    r.is_zero()
}
