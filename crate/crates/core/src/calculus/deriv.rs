use crate::error::Result;
use crate::expr::canon::Term;
use crate::expr::{Atom, Index, Kind, Label, TensorPolynomial};

/// Labels handed out while building terms; far above canonical dummies.
pub const TEMP_BASE: u32 = crate::expr::index::DUMMY_BASE + (1 << 22);

/// Source of fresh labels for one term under construction.
pub struct Fresh(u32);

impl Fresh {
    pub fn new() -> Fresh {
        Fresh(TEMP_BASE)
    }

    pub fn above(t: &Term) -> Fresh {
        Fresh(t.max_label().max(TEMP_BASE) + 1)
    }

    pub fn next(&mut self) -> Label {
        let l = Label(self.0);
        self.0 += 1;
        l
    }
}

impl Default for Fresh {
    fn default() -> Self {
        Fresh::new()
    }
}

/// Leibniz expansion of (−i∇)_i over the atoms of a term. Markers, metrics,
/// identity and the symmetric operator are parallel and contribute nothing.
pub fn derive_term(t: &Term, i: Index) -> Vec<Term> {
    let mut out = Vec::new();
    for k in 0..t.scalars.len() {
        let a = &t.scalars[k];
        if a.kind.differentiable() {
            let mut u = t.clone();
            u.scalars[k].prefix.insert(0, i);
            out.push(u);
        } else if a.kind == Kind::Trace {
            for j in 0..a.inner.len() {
                if a.inner[j].kind.differentiable() {
                    let mut u = t.clone();
                    u.scalars[k].inner[j].prefix.insert(0, i);
                    out.push(u);
                }
            }
        }
    }
    for k in 0..t.chain.len() {
        if t.chain[k].kind.differentiable() {
            let mut u = t.clone();
            u.chain[k].prefix.insert(0, i);
            out.push(u);
        }
    }
    out
}

/// Covariant derivative of a polynomial. Prefixes denote (−i∇), so the result
/// is −i times the Levi-Civita derivative; all coefficients stay rational.
pub fn covariant_derivative(p: &TensorPolynomial, i: Index) -> Result<TensorPolynomial> {
    p.map_terms(|t, c| Ok(derive_term(t, i).into_iter().map(|u| (c.clone(), u)).collect()))
}

/// Derivative along a probe vector: contracts the new prefix slot with a marker atom.
pub fn derive_along(t: &Term, kind: Kind) -> Vec<Term> {
    let mut fresh = Fresh::above(t);
    let l = fresh.next();
    derive_term(t, Index::down(l))
        .into_iter()
        .map(|mut u| {
            u.scalars.push(Atom::new(kind, vec![Index::up(l)]));
            u
        })
        .collect()
}
