//! From resolvent symbols to local heat invariants: residue in λ, Gaussian
//! moments in ξ, fiber traces and the final identity-based simplification.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::identities::simplify_identities;
use crate::error::{Error, Result};
use crate::expr::canon::Term;
use crate::expr::{Atom, Kind, TensorPolynomial};
use crate::parametrix::{Potential, RationalSymbol, Recurrence};
use crate::rational::{factorial, int, one, rat, Rational};
use crate::rho_chi::RhoTable;

/// Which operator P = −∇^p∇_p + A is meant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Variant {
    /// Arbitrary bundle, connection and potential A.
    Generic,
    /// The scalar Laplacian: A = 0, d = 1, ℛ = 0.
    Scalar,
    /// The Hodge Laplacian on ν-forms of an n-manifold.
    Hodge { n: usize, nu: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorSpec {
    variant: Variant,
    trace_free_curv: bool,
}

impl OperatorSpec {
    /// Generic operator under the hypothesis Tr ℛ_ij = 0.
    pub fn generic() -> OperatorSpec {
        OperatorSpec { variant: Variant::Generic, trace_free_curv: true }
    }

    /// Generic operator keeping terms linear in ℛ under the trace.
    pub fn generic_unrestricted() -> OperatorSpec {
        OperatorSpec { variant: Variant::Generic, trace_free_curv: false }
    }

    pub fn scalar() -> OperatorSpec {
        OperatorSpec { variant: Variant::Scalar, trace_free_curv: true }
    }

    pub fn hodge(n: usize, nu: usize) -> Result<OperatorSpec> {
        if nu > n {
            return Err(Error::Config(format!("form degree {nu} exceeds dimension {n}")));
        }
        Ok(OperatorSpec { variant: Variant::Hodge { n, nu }, trace_free_curv: true })
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn trace_free_curv(&self) -> bool {
        self.trace_free_curv
    }

    pub fn potential(&self) -> Potential {
        match self.variant {
            Variant::Scalar => Potential::Zero,
            _ => Potential::Generic,
        }
    }

    pub fn flat_bundle(&self) -> bool {
        self.variant == Variant::Scalar
    }
}

impl fmt::Display for OperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.variant {
            Variant::Generic => write!(f, "generic")?,
            Variant::Scalar => write!(f, "scalar")?,
            Variant::Hodge { n, nu } => write!(f, "hodge(n={n}, nu={nu})")?,
        }
        if !self.trace_free_curv {
            write!(f, " without Tr R = 0")?;
        }
        Ok(())
    }
}

/// A fully contracted scalar polynomial in curvature, its derivatives and trace atoms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CurvaturePolynomial(TensorPolynomial);

impl CurvaturePolynomial {
    pub fn new(p: TensorPolynomial) -> Result<CurvaturePolynomial> {
        if !p.free_indices().is_empty() {
            return Err(Error::Structural("invariant with free indices".into()));
        }
        for (t, _) in p.iter() {
            if !t.chain.is_empty() {
                return Err(Error::Structural("invariant with an untraced End(V) factor".into()));
            }
            if t.scalars.iter().any(|a| a.kind.is_marker() || a.kind == Kind::SymDeriv) {
                return Err(Error::Structural("invariant still depends on ξ".into()));
            }
        }
        Ok(CurvaturePolynomial(p))
    }

    pub fn poly(&self) -> &TensorPolynomial {
        &self.0
    }

    pub fn into_poly(self) -> TensorPolynomial {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

/// λ-residue: the part f/(λ−|ξ|²)^m contributes (−1)^{m−1}/(m−1)! · f, with the
/// weight e^{−|ξ|²} left implicit.
pub fn contour_integrate(s: &RationalSymbol) -> Result<TensorPolynomial> {
    let mut acc = TensorPolynomial::zero();
    for (m, f) in s.parts() {
        if m < 1 {
            return Err(Error::Structural("symbol part with non-positive power".into()));
        }
        let sign = if m % 2 == 1 { one() } else { -one() };
        acc.add_scaled(f, &(sign / factorial(m - 1)));
    }
    Ok(acc)
}

/// Perfect matchings of 0..n (n even).
fn pairings(n: usize) -> Vec<Vec<(usize, usize)>> {
    fn rec(rest: &[usize], cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if rest.is_empty() {
            out.push(cur.clone());
            return;
        }
        let a = rest[0];
        for k in 1..rest.len() {
            let b = rest[k];
            let others: Vec<usize> = rest[1..].iter().copied().filter(|&x| x != b).collect();
            cur.push((a, b));
            rec(&others, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(&(0..n).collect::<Vec<_>>(), &mut Vec::new(), &mut out);
    out
}

/// Normalized Gaussian moments: ξ-monomials of degree 2m become the sum over
/// pairings of metric products divided by 2^m; odd degrees vanish.
pub fn gaussian_moment(p: &TensorPolynomial) -> Result<TensorPolynomial> {
    let mut cache: HashMap<usize, Vec<Vec<(usize, usize)>>> = HashMap::new();
    let mut acc = TensorPolynomial::zero();
    for (t, c) in p.iter() {
        let pos: Vec<usize> =
            (0..t.scalars.len()).filter(|&k| t.scalars[k].kind == Kind::Momentum).collect();
        if pos.len() % 2 == 1 {
            continue;
        }
        let base: Vec<Atom> = t
            .scalars
            .iter()
            .enumerate()
            .filter(|(k, _)| !pos.contains(k))
            .map(|(_, a)| a.clone())
            .collect();
        let w = c * rat(1, 1i64 << (pos.len() / 2));
        let ps = cache.entry(pos.len()).or_insert_with(|| pairings(pos.len()));
        for pairing in ps.iter() {
            let mut scalars = base.clone();
            for &(x, y) in pairing {
                scalars.push(Atom::metric(t.scalars[pos[x]].slots[0], t.scalars[pos[y]].slots[0]));
            }
            acc.add_term(w.clone(), Term { scalars, chain: t.chain.clone() })?;
        }
    }
    Ok(acc)
}

/// Fiber trace of every End(V)-valued monomial.
pub fn trace_reduce(p: &TensorPolynomial, spec: &OperatorSpec) -> Result<TensorPolynomial> {
    let mut acc = TensorPolynomial::zero();
    for (t, c) in p.iter() {
        if t.chain.is_empty() {
            return Err(Error::Structural("trace of a scalar-valued term".into()));
        }
        let nontrivial: Vec<&Atom> = t.chain.iter().filter(|a| a.kind != Kind::Identity).collect();
        if spec.trace_free_curv && nontrivial.len() == 1 && nontrivial[0].kind == Kind::BundleCurv {
            continue;
        }
        let mut scalars = t.scalars.clone();
        scalars.push(Atom::trace(t.chain.clone()));
        acc.add_term(c.clone(), Term { scalars, chain: vec![] })?;
    }
    Ok(acc)
}

/// Order of the two ξ/trace stages; both orders give the same invariant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StageOrder {
    TraceFirst,
    MomentFirst,
}

/// Derivative bound needed to run the recurrence up to r_k.
pub fn required_bound(k: usize) -> usize {
    k + 2
}

/// Everything after the recurrence: residue, trace, moments, simplification.
pub fn integrate_symbol(s: &RationalSymbol, spec: &OperatorSpec, order: StageOrder) -> Result<CurvaturePolynomial> {
    let f = contour_integrate(s)?;
    let g = match order {
        StageOrder::TraceFirst => gaussian_moment(&trace_reduce(&f, spec)?)?,
        StageOrder::MomentFirst => trace_reduce(&gaussian_moment(&f)?, spec)?,
    };
    let g = specialize(&g, spec)?;
    CurvaturePolynomial::new(simplify_identities(&g)?)
}

/// Applies the variant's values for d and the trace atoms.
fn specialize(p: &TensorPolynomial, spec: &OperatorSpec) -> Result<TensorPolynomial> {
    match spec.variant {
        Variant::Generic => Ok(p.clone()),
        Variant::Scalar => p.map_terms(|t, c| {
            let scalars: Vec<Atom> = t.scalars.iter().filter(|a| a.kind != Kind::FiberDim).cloned().collect();
            Ok(vec![(c.clone(), Term { scalars, chain: t.chain.clone() })])
        }),
        Variant::Hodge { n, nu } => crate::hodge::substitute_traces(p, n, nu),
    }
}

/// a_k(x, P) through the full pipeline with a fresh table.
pub fn heat_invariant(k: usize, spec: &OperatorSpec) -> Result<CurvaturePolynomial> {
    let table = RhoTable::new(required_bound(k), spec.flat_bundle());
    heat_invariant_with(&table, k, spec, StageOrder::TraceFirst)
}

/// a_k(x, P) reusing a table whose bound covers k + 2.
pub fn heat_invariant_with(table: &RhoTable, k: usize, spec: &OperatorSpec, order: StageOrder) -> Result<CurvaturePolynomial> {
    if table.composer().flat_bundle() && !spec.flat_bundle() {
        return Err(Error::Config("flat-bundle table used for a bundle-valued operator".into()));
    }
    let mut rec = Recurrence::new(table, spec.potential());
    let rk = rec.get(k)?.clone();
    integrate_symbol(&rk, spec, order)
}

/// Several invariants with one shared table, the integration stage run in parallel.
pub fn heat_invariants(ks: &[usize], spec: &OperatorSpec) -> Result<Vec<CurvaturePolynomial>> {
    let kmax = ks.iter().copied().max().unwrap_or(0);
    let table = RhoTable::new(required_bound(kmax), spec.flat_bundle());
    let mut rec = Recurrence::new(&table, spec.potential());
    rec.get(kmax)?;
    let symbols: Vec<RationalSymbol> = ks.iter().map(|&k| rec.history()[k].clone()).collect();
    symbols.par_iter().map(|s| integrate_symbol(s, spec, StageOrder::TraceFirst)).collect()
}

/// Substitutes a number for the fiber dimension d.
pub fn with_fiber_dim(p: &TensorPolynomial, d: i64) -> Result<TensorPolynomial> {
    substitute_constant(p, Kind::FiberDim, &int(d))
}

/// Replaces every factor of a constant kind (`Dim` or `FiberDim`) by a number.
pub fn substitute_constant(p: &TensorPolynomial, kind: Kind, value: &Rational) -> Result<TensorPolynomial> {
    p.map_terms(|t, c| {
        let mut c = c.clone();
        let mut scalars = Vec::with_capacity(t.scalars.len());
        for a in &t.scalars {
            if a.kind == kind {
                c *= value;
            } else {
                scalars.push(a.clone());
            }
        }
        Ok(vec![(c, Term { scalars, chain: t.chain.clone() })])
    })
}
