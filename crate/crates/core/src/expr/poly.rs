use std::collections::{BTreeMap, HashMap};
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::atom::{Atom, Kind};
use super::canon::{canonical_term, Term};
use super::index::{Binding, Index, Label};
use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monomial {
    pub coeff: Rational,
    pub term: Term,
}

impl Monomial {
    pub fn new(coeff: Rational, scalars: Vec<Atom>, chain: Vec<Atom>) -> Monomial {
        Monomial { coeff, term: Term { scalars, chain } }
    }

    pub fn binding(&self, l: Label) -> Option<Binding> {
        match self.term.label_counts().get(&l) {
            Some(1) => Some(Binding::Free),
            Some(2) => Some(Binding::Dummy),
            _ => None,
        }
    }
}

/// Canonical representative; `None` when the monomial vanishes.
pub fn canonicalize(m: &Monomial) -> Result<Option<Monomial>> {
    if m.coeff.is_zero() {
        return Ok(None);
    }
    Ok(canonical_term(&m.term)?.map(|(neg, term)| Monomial {
        coeff: if neg { -m.coeff.clone() } else { m.coeff.clone() },
        term,
    }))
}

/// A collected sum of canonical monomials with nonzero coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TensorPolynomial {
    terms: BTreeMap<Term, Rational>,
}

impl TensorPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational) -> Self {
        let mut p = Self::zero();
        p.push_canonical(Term::default(), c);
        p
    }

    /// The End(V) identity.
    pub fn identity() -> Self {
        Self::from_monomial(Monomial::new(Rational::one(), vec![], vec![Atom::identity()]))
            .expect("identity is well formed")
    }

    pub fn from_monomial(m: Monomial) -> Result<Self> {
        let mut p = Self::zero();
        p.add_monomial(m)?;
        Ok(p)
    }

    pub fn from_atoms(coeff: Rational, scalars: Vec<Atom>, chain: Vec<Atom>) -> Result<Self> {
        Self::from_monomial(Monomial::new(coeff, scalars, chain))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Term, &Rational)> {
        self.terms.iter()
    }

    pub fn monomials(&self) -> Vec<Monomial> {
        self.terms
            .iter()
            .map(|(t, c)| Monomial { coeff: c.clone(), term: t.clone() })
            .collect()
    }

    pub fn coeff_of(&self, t: &Term) -> Rational {
        self.terms.get(t).cloned().unwrap_or_else(Rational::zero)
    }

    /// Adds a term that is already canonical.
    pub fn push_canonical(&mut self, t: Term, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(t) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_monomial(&mut self, m: Monomial) -> Result<()> {
        if let Some(c) = canonicalize(&m)? {
            self.push_canonical(c.term, c.coeff);
        }
        Ok(())
    }

    pub fn add_term(&mut self, coeff: Rational, term: Term) -> Result<()> {
        self.add_monomial(Monomial { coeff, term })
    }

    /// In-place sum without the free-index check.
    pub fn add_assign(&mut self, other: &TensorPolynomial) {
        for (t, c) in &other.terms {
            self.push_canonical(t.clone(), c.clone());
        }
    }

    pub fn add_scaled(&mut self, other: &TensorPolynomial, s: &Rational) {
        if s.is_zero() {
            return;
        }
        for (t, c) in &other.terms {
            self.push_canonical(t.clone(), c * s);
        }
    }

    pub fn scale(&self, s: &Rational) -> TensorPolynomial {
        let mut out = TensorPolynomial::zero();
        out.add_scaled(self, s);
        out
    }

    /// Free indices of the first term; all terms of a well-formed sum agree.
    pub fn free_indices(&self) -> Vec<Index> {
        self.terms.keys().next().map(Term::free_indices).unwrap_or_default()
    }

    pub fn free_labels(&self) -> Vec<Label> {
        let mut v: Vec<Label> = self.free_indices().iter().map(|i| i.label).collect();
        v.sort();
        v
    }

    pub fn check_free_consistency(&self) -> Result<()> {
        let mut it = self.terms.keys().map(|t| {
            let mut v: Vec<Label> = t.free_indices().iter().map(|i| i.label).collect();
            v.sort();
            v
        });
        if let Some(first) = it.next() {
            for other in it {
                if other != first {
                    return Err(Error::FreeMismatch(format!(
                        "{:?} vs {:?}",
                        first.iter().map(|l| l.name()).collect::<Vec<_>>(),
                        other.iter().map(|l| l.name()).collect::<Vec<_>>()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Checked sum: both operands must carry the same free labels.
    pub fn try_add(&self, other: &TensorPolynomial) -> Result<TensorPolynomial> {
        if !self.is_zero() && !other.is_zero() && self.free_labels() != other.free_labels() {
            return Err(Error::FreeMismatch(format!(
                "{:?} vs {:?}",
                self.free_labels().iter().map(|l| l.name()).collect::<Vec<_>>(),
                other.free_labels().iter().map(|l| l.name()).collect::<Vec<_>>()
            )));
        }
        let mut out = self.clone();
        out.add_assign(other);
        Ok(out)
    }

    /// Product; labels free in both operands become contracted, chains concatenate.
    pub fn try_mul(&self, other: &TensorPolynomial) -> Result<TensorPolynomial> {
        let mut out = TensorPolynomial::zero();
        for (ta, ca) in &self.terms {
            for (tb, cb) in &other.terms {
                let t = mul_terms(ta, tb);
                out.add_term(ca * cb, t)?;
            }
        }
        Ok(out)
    }

    /// Applies `f` to every term and collects the canonicalized results.
    pub fn map_terms(
        &self,
        mut f: impl FnMut(&Term, &Rational) -> Result<Vec<(Rational, Term)>>,
    ) -> Result<TensorPolynomial> {
        let mut out = TensorPolynomial::zero();
        for (t, c) in &self.terms {
            for (c2, t2) in f(t, c)? {
                out.add_term(c2, t2)?;
            }
        }
        Ok(out)
    }

    pub fn filter(&self, mut keep: impl FnMut(&Term) -> bool) -> TensorPolynomial {
        TensorPolynomial {
            terms: self.terms.iter().filter(|(t, _)| keep(t)).map(|(t, c)| (t.clone(), c.clone())).collect(),
        }
    }

    /// Renames free labels through `map`; own dummies are moved out of the way first.
    pub fn relabel(&self, map: &HashMap<Label, Index>) -> Result<TensorPolynomial> {
        self.map_terms(|t, c| Ok(vec![(c.clone(), relabel_term(t, map))]))
    }

    /// Same as [`relabel`](Self::relabel) but keeps each index's own variance.
    pub fn rename(&self, map: &HashMap<Label, Label>) -> Result<TensorPolynomial> {
        self.map_terms(|t, c| Ok(vec![(c.clone(), rename_term(t, map))]))
    }

    pub fn max_deriv_count(&self) -> usize {
        self.terms.keys().map(Term::deriv_count).max().unwrap_or(0)
    }
}

fn fresh_base(used: u32) -> u32 {
    used.max(super::index::DUMMY_BASE) + 1
}

/// Renames the dummies of `t` to labels strictly above `floor`.
pub fn shift_dummies(t: &Term, floor: u32) -> Term {
    let counts = t.label_counts();
    let mut map: HashMap<Label, Label> = HashMap::new();
    let mut next = fresh_base(floor);
    let mut out = t.clone();
    out.for_each_index_mut(&mut |i| {
        if counts[&i.label] == 2 {
            let l = *map.entry(i.label).or_insert_with(|| {
                let l = Label(next);
                next += 1;
                l
            });
            i.label = l;
        }
    });
    out
}

pub fn mul_terms(a: &Term, b: &Term) -> Term {
    let floor = a.max_label().max(b.max_label());
    let b2 = shift_dummies(b, floor);
    let mut scalars = a.scalars.clone();
    scalars.extend(b2.scalars);
    let mut chain = a.chain.clone();
    chain.extend(b2.chain);
    Term { scalars, chain }
}

pub fn relabel_term(t: &Term, map: &HashMap<Label, Index>) -> Term {
    let floor = map.values().map(|i| i.label.0).max().unwrap_or(0).max(t.max_label());
    let counts = t.label_counts();
    let mut out = shift_dummies(t, floor);
    out.for_each_index_mut(&mut |i| {
        if counts.get(&i.label) == Some(&1) {
            if let Some(j) = map.get(&i.label) {
                *i = *j;
            }
        }
    });
    out
}

pub fn rename_term(t: &Term, map: &HashMap<Label, Label>) -> Term {
    let floor = map.values().map(|l| l.0).max().unwrap_or(0).max(t.max_label());
    let counts = t.label_counts();
    let mut out = shift_dummies(t, floor);
    out.for_each_index_mut(&mut |i| {
        if counts.get(&i.label) == Some(&1) {
            if let Some(j) = map.get(&i.label) {
                i.label = *j;
            }
        }
    });
    out
}

impl Add for &TensorPolynomial {
    type Output = TensorPolynomial;
    fn add(self, rhs: &TensorPolynomial) -> TensorPolynomial {
        let mut out = self.clone();
        out.add_assign(rhs);
        out
    }
}

impl Sub for &TensorPolynomial {
    type Output = TensorPolynomial;
    fn sub(self, rhs: &TensorPolynomial) -> TensorPolynomial {
        let mut out = self.clone();
        out.add_scaled(rhs, &-Rational::one());
        out
    }
}

impl Neg for &TensorPolynomial {
    type Output = TensorPolynomial;
    fn neg(self) -> TensorPolynomial {
        self.scale(&-Rational::one())
    }
}

impl Mul for &TensorPolynomial {
    type Output = TensorPolynomial;
    fn mul(self, rhs: &TensorPolynomial) -> TensorPolynomial {
        self.try_mul(rhs).expect("product of well-formed polynomials")
    }
}

/// Convenience constructor for tests and reference formulas: one monomial, canonicalized.
pub fn mono(coeff: Rational, scalars: Vec<Atom>, chain: Vec<Atom>) -> TensorPolynomial {
    TensorPolynomial::from_atoms(coeff, scalars, chain).expect("well-formed monomial")
}

/// Whether a term carries any atom of the given kind, traces included.
pub fn has_kind(t: &Term, k: Kind) -> bool {
    t.count_kind(k) > 0
}
