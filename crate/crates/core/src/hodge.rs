//! The Hodge Laplacian on ν-forms: exterior-algebra matrices of A_ν and ℛ^ν,
//! exact fits of their trace invariants, and the coefficients of a_0, a_2, a_4.

use num_traits::{One, Zero};

use crate::assemble::CurvaturePolynomial;
use crate::calculus::deriv::Fresh;
use crate::calculus::identities::simplify_identities;
use crate::error::{Error, Result};
use crate::expr::canon::Term;
use crate::expr::{Atom, Index, Kind, TensorPolynomial};
use crate::jetlab::CurvatureData;
use crate::rational::{binom, int, rat, solve, Rational};

/// Lexicographically ordered ν-subsets of {0, …, n−1}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormBasis {
    pub n: usize,
    pub nu: usize,
    pub elements: Vec<Vec<usize>>,
}

impl FormBasis {
    pub fn new(n: usize, nu: usize) -> FormBasis {
        let mut elements = Vec::new();
        if nu <= n {
            let mut cur = Vec::new();
            subsets(n, nu, 0, &mut cur, &mut elements);
        }
        FormBasis { n, nu, elements }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn position(&self, s: &[usize]) -> Option<usize> {
        self.elements.binary_search_by(|e| e.as_slice().cmp(s)).ok()
    }

    /// Sorts a wedge word; returns the sign and the basis position, or `None` if it vanishes.
    fn normalize(&self, word: &[usize]) -> Option<(bool, usize)> {
        let mut w = word.to_vec();
        let mut neg = false;
        for i in 0..w.len() {
            for j in 0..w.len() - 1 - i {
                if w[j] > w[j + 1] {
                    w.swap(j, j + 1);
                    neg = !neg;
                }
            }
        }
        if w.windows(2).any(|p| p[0] == p[1]) {
            return None;
        }
        self.position(&w).map(|k| (neg, k))
    }
}

fn subsets(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for i in start..n {
        cur.push(i);
        subsets(n, k, i + 1, cur, out);
        cur.pop();
    }
}

/// Square matrix of rationals over a form basis, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EndoMatrix {
    pub dim: usize,
    pub data: Vec<Rational>,
}

impl EndoMatrix {
    pub fn zero(dim: usize) -> EndoMatrix {
        EndoMatrix { dim, data: vec![Rational::zero(); dim * dim] }
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.data[r * self.dim + c]
    }

    fn add_at(&mut self, r: usize, c: usize, v: Rational) {
        self.data[r * self.dim + c] += v;
    }

    pub fn trace(&self) -> Rational {
        (0..self.dim).map(|i| self.get(i, i).clone()).sum()
    }

    pub fn mul(&self, o: &EndoMatrix) -> EndoMatrix {
        let n = self.dim;
        let mut out = EndoMatrix::zero(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * o.get(k, j);
                }
            }
        }
        out
    }

    pub fn add(&self, o: &EndoMatrix) -> EndoMatrix {
        EndoMatrix { dim: self.dim, data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect() }
    }

    pub fn scale(&self, s: &Rational) -> EndoMatrix {
        EndoMatrix { dim: self.dim, data: self.data.iter().map(|a| a * s).collect() }
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Σ_ij M_ij².
    pub fn norm2(&self) -> Rational {
        self.data.iter().map(|a| a * a).sum()
    }

    /// Sub-block on the given rows and columns.
    pub fn block(&self, idx: &[usize]) -> EndoMatrix {
        let m = idx.len();
        let mut out = EndoMatrix::zero(m);
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                out.data[a * m + b] = self.get(i, j).clone();
            }
        }
        out
    }
}

fn riem(c: &CurvatureData, i: usize, j: usize, k: usize, l: usize) -> Rational {
    c.riemann_at([i, j, k, l])
}

/// Σ_a A^a_ν: replaces the a-th factor dx^{i_a} by R^{i_a}_p dx^p.
pub fn build_b(basis: &FormBasis, c: &CurvatureData) -> EndoMatrix {
    let n = basis.n;
    let mut m = EndoMatrix::zero(basis.len());
    for (col, e) in basis.elements.iter().enumerate() {
        for a in 0..e.len() {
            for p in 0..n {
                let v = c.ricci_at(e[a], p);
                if v.is_zero() {
                    continue;
                }
                let mut w = e.clone();
                w[a] = p;
                if let Some((neg, row)) = basis.normalize(&w) {
                    m.add_at(row, col, if neg { -v } else { v });
                }
            }
        }
    }
    m
}

/// Σ_{a<b} A^{ab}_ν: replaces dx^{i_a}, dx^{i_b} by R^{i_a}{}_p{}^{i_b}{}_q dx^p, dx^q.
pub fn build_c(basis: &FormBasis, c: &CurvatureData) -> EndoMatrix {
    let n = basis.n;
    let mut m = EndoMatrix::zero(basis.len());
    for (col, e) in basis.elements.iter().enumerate() {
        for a in 0..e.len() {
            for b in a + 1..e.len() {
                for p in 0..n {
                    for q in 0..n {
                        let v = riem(c, e[a], p, e[b], q);
                        if v.is_zero() {
                            continue;
                        }
                        let mut w = e.clone();
                        w[a] = p;
                        w[b] = q;
                        if let Some((neg, row)) = basis.normalize(&w) {
                            m.add_at(row, col, if neg { -v } else { v });
                        }
                    }
                }
            }
        }
    }
    m
}

/// Matrix of A_ν = Σ_a A^a_ν − 2 Σ_{a<b} A^{ab}_ν; empty when ν > n.
pub fn build_a_nu(n: usize, nu: usize, c: &CurvatureData) -> EndoMatrix {
    let basis = FormBasis::new(n, nu);
    build_b(&basis, c).add(&build_c(&basis, c).scale(&int(-2)))
}

/// ℛ^ν_ij = −Σ_a ℛ^{ν,a}_ij with ℛ^{ν,a}_ij replacing dx^{i_a} by R^{i_a}_{pij} dx^p;
/// entry (i, j) at offset i·n + j.
pub fn build_curv_nu(n: usize, nu: usize, c: &CurvatureData) -> Vec<EndoMatrix> {
    let basis = FormBasis::new(n, nu);
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut m = EndoMatrix::zero(basis.len());
            for (col, e) in basis.elements.iter().enumerate() {
                for a in 0..e.len() {
                    for p in 0..n {
                        let v = riem(c, e[a], p, i, j);
                        if v.is_zero() {
                            continue;
                        }
                        let mut w = e.clone();
                        w[a] = p;
                        if let Some((neg, row)) = basis.normalize(&w) {
                            m.add_at(row, col, if neg { v } else { -v });
                        }
                    }
                }
            }
            out.push(m);
        }
    }
    out
}

/// S, S², |Ric|², |R|² of one curvature sample.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantVector {
    pub s: Rational,
    pub s2: Rational,
    pub ric2: Rational,
    pub riem2: Rational,
}

impl InvariantVector {
    pub fn of(c: &CurvatureData) -> InvariantVector {
        let s = c.scalar_curvature();
        InvariantVector { s2: &s * &s, s, ric2: c.ricci_norm2(), riem2: c.riemann_norm2() }
    }

    fn quadratic(&self) -> Vec<Rational> {
        vec![self.s2.clone(), self.ric2.clone(), self.riem2.clone()]
    }
}

/// Tr A_ν, Tr A_ν² and Tr(g^{ik}g^{jl}ℛ^ν_ij ℛ^ν_kl) for one sample.
pub fn trace_values(n: usize, nu: usize, c: &CurvatureData) -> [Rational; 3] {
    let a = build_a_nu(n, nu, c);
    let curv = build_curv_nu(n, nu, c);
    let rr: Rational = curv.iter().map(|m| m.mul(m).trace()).sum();
    [a.trace(), a.mul(&a).trace(), rr]
}

/// Coefficients of Tr A_ν in S, and of Tr A_ν², Tr(ℛℛ) in (S², |Ric|², |R|²).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceCoefficients {
    pub tr_a: Rational,
    pub tr_a2: [Rational; 3],
    pub tr_rr: [Rational; 3],
}

/// The closed forms of the trace invariants.
pub fn trace_closed_form(n: usize, nu: usize) -> TraceCoefficients {
    let (n, nu) = (n as i64, nu as i64);
    let c1 = int(binom(n - 2, nu - 1));
    let c2 = int(binom(n - 4, nu - 2));
    TraceCoefficients {
        tr_a: c1.clone(),
        tr_a2: [c2.clone(), &c1 - int(4) * &c2, c2],
        tr_rr: [Rational::zero(), Rational::zero(), -c1],
    }
}

/// Exact fit over curvature samples; needs n ≥ 4 so that S², |Ric|², |R|² are independent.
pub fn fit_trace_invariants(n: usize, nu: usize, samples: &[CurvatureData]) -> Result<TraceCoefficients> {
    if n < 4 {
        return Err(Error::Config(format!("quadratic invariants are dependent in dimension {n}")));
    }
    if samples.len() < 4 {
        return Err(Error::Config("the fit needs at least 4 samples".into()));
    }
    let mut lin_rows = Vec::new();
    let mut quad_rows = Vec::new();
    let mut ta = Vec::new();
    let mut ta2 = Vec::new();
    let mut trr = Vec::new();
    for c in samples {
        if c.n != n {
            return Err(Error::Config("sample dimension differs from n".into()));
        }
        let inv = InvariantVector::of(c);
        let [a, a2, rr] = trace_values(n, nu, c);
        lin_rows.push(vec![inv.s.clone()]);
        quad_rows.push(inv.quadratic());
        ta.push(a);
        ta2.push(a2);
        trr.push(rr);
    }
    let tr_a = solve(&lin_rows, &ta).ok_or(Error::Singular)?;
    let tr_a2 = solve(&quad_rows, &ta2).ok_or(Error::Singular)?;
    let tr_rr = solve(&quad_rows, &trr).ok_or(Error::Singular)?;
    let arr = |v: Vec<Rational>| -> [Rational; 3] { [v[0].clone(), v[1].clone(), v[2].clone()] };
    Ok(TraceCoefficients { tr_a: tr_a[0].clone(), tr_a2: arr(tr_a2), tr_rr: arr(tr_rr) })
}

/// a_0 = count, a_2 = a2·S, a_4 = (1/360)(c_1 ΔS + c_2 S² + c_3 |Ric|² + c_4 |R|²).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatodiCoefficients {
    pub n: usize,
    pub nu: usize,
    pub a0: Rational,
    pub a2: Rational,
    pub c: [Rational; 4],
}

pub fn patodi_closed_form(n: usize, nu: usize) -> PatodiCoefficients {
    let b = |m: i64, k: i64| int(binom(m, k));
    let (n_, v) = (n as i64, nu as i64);
    let (b0, b1, b2) = (b(n_, v), b(n_ - 2, v - 1), b(n_ - 4, v - 2));
    PatodiCoefficients {
        n,
        nu,
        a0: b0.clone(),
        a2: (&b0 - int(6) * &b1) * rat(1, 6),
        c: [
            int(-12) * (&b0 - int(5) * &b1),
            int(5) * (&b0 - int(12) * &b1 + int(36) * &b2),
            int(-2) * (&b0 - int(90) * &b1 + int(360) * &b2),
            int(2) * (&b0 - int(15) * &b1 + int(90) * &b2),
        ],
    }
}

fn sc(c: Rational, scalars: Vec<Atom>) -> Result<TensorPolynomial> {
    TensorPolynomial::from_atoms(c, scalars, vec![])
}

/// The invariants S, ΔS, S², |Ric|², |R|² as polynomials (ΔS = D^pD_pS).
pub fn basis_invariants() -> Result<[TensorPolynomial; 5]> {
    let mut f = Fresh::new();
    let (p, q, r, s) = (f.next(), f.next(), f.next(), f.next());
    let (dn, up) = (Index::down, Index::up);
    Ok([
        sc(int(1), vec![Atom::scalar()])?,
        sc(int(1), vec![Atom::scalar().with_prefix(vec![up(p), dn(p)])])?,
        sc(int(1), vec![Atom::scalar(), Atom::scalar()])?,
        sc(int(1), vec![Atom::ricci(dn(p), dn(q)), Atom::ricci(up(p), up(q))])?,
        sc(int(1), vec![Atom::riemann([dn(p), dn(q), dn(r), dn(s)]), Atom::riemann([up(p), up(q), up(r), up(s)])])?,
    ])
}

/// Coordinates of `p` in the span of `basis`, exact modulo the curvature identities.
pub fn coordinates(p: &TensorPolynomial, basis: &[TensorPolynomial]) -> Result<Vec<Rational>> {
    let target = simplify_identities(p)?;
    let reduced: Vec<TensorPolynomial> = basis.iter().map(simplify_identities).collect::<Result<_>>()?;
    let mut keys: Vec<Term> = Vec::new();
    for q in reduced.iter().chain(std::iter::once(&target)) {
        for (t, _) in q.iter() {
            if !keys.contains(t) {
                keys.push(t.clone());
            }
        }
    }
    let rows: Vec<Vec<Rational>> = keys.iter().map(|t| reduced.iter().map(|q| q.coeff_of(t)).collect()).collect();
    let rhs: Vec<Rational> = keys.iter().map(|t| target.coeff_of(t)).collect();
    if basis.is_empty() {
        return if target.is_zero() { Ok(vec![]) } else { Err(Error::Structural("polynomial outside the span".into())) };
    }
    solve(&rows, &rhs).ok_or_else(|| Error::Structural("polynomial outside the span of the basis".into()))
}

/// Replaces d, n and the trace atoms by their values for the ν-form bundle.
pub fn substitute_traces(p: &TensorPolynomial, n: usize, nu: usize) -> Result<TensorPolynomial> {
    let closed = trace_closed_form(n, nu);
    let fiber = int(binom(n as i64, nu as i64));
    let mut out = TensorPolynomial::zero();
    for (t, c) in p.iter() {
        let mut partial: Vec<(Rational, Term)> = vec![(c.clone(), Term { scalars: vec![], chain: t.chain.clone() })];
        let mut fresh = Fresh::above(t);
        for a in &t.scalars {
            let images: Vec<(Rational, Vec<Atom>)> = match a.kind {
                Kind::Dim => vec![(int(n as i64), vec![])],
                Kind::FiberDim => vec![(fiber.clone(), vec![])],
                Kind::Trace => trace_image(a, &closed, &mut fresh)?,
                _ => vec![(Rational::one(), vec![a.clone()])],
            };
            let mut next = Vec::with_capacity(partial.len() * images.len());
            for (pc, pt) in &partial {
                for (ic, atoms) in &images {
                    if ic.is_zero() {
                        continue;
                    }
                    let mut u = pt.clone();
                    u.scalars.extend(atoms.iter().cloned());
                    next.push((pc * ic, u));
                }
            }
            partial = next;
        }
        for (pc, pt) in partial {
            out.add_term(pc, pt)?;
        }
    }
    Ok(out)
}

fn trace_image(a: &Atom, closed: &TraceCoefficients, fresh: &mut Fresh) -> Result<Vec<(Rational, Vec<Atom>)>> {
    let kinds: Vec<Kind> = a.inner.iter().map(|b| b.kind).collect();
    let (dn, up) = (Index::down, Index::up);
    match kinds.as_slice() {
        [Kind::EndoA] => Ok(vec![(closed.tr_a.clone(), vec![Atom::scalar().with_prefix(a.inner[0].prefix.clone())])]),
        [Kind::EndoA, Kind::EndoA] if a.inner.iter().all(|b| b.prefix.is_empty()) => {
            let (p, q, r, s) = (fresh.next(), fresh.next(), fresh.next(), fresh.next());
            Ok(vec![
                (closed.tr_a2[0].clone(), vec![Atom::scalar(), Atom::scalar()]),
                (closed.tr_a2[1].clone(), vec![Atom::ricci(dn(p), dn(q)), Atom::ricci(up(p), up(q))]),
                (
                    closed.tr_a2[2].clone(),
                    vec![Atom::riemann([dn(p), dn(q), dn(r), dn(s)]), Atom::riemann([up(p), up(q), up(r), up(s)])],
                ),
            ])
        }
        [Kind::BundleCurv, Kind::BundleCurv] => {
            // Tr(ℛ^ν_ab ℛ^ν_cd) = C(n−2,ν−1) R^i_{pab} R^p_{icd}, derivatives carried along
            let (x, y) = (&a.inner[0], &a.inner[1]);
            let (i, p) = (fresh.next(), fresh.next());
            let first = Atom::riemann([up(i), dn(p), x.slots[0], x.slots[1]]).with_prefix(x.prefix.clone());
            let second = Atom::riemann([up(p), dn(i), y.slots[0], y.slots[1]]).with_prefix(y.prefix.clone());
            Ok(vec![(-closed.tr_rr[2].clone(), vec![first, second])])
        }
        _ => Err(Error::Structural(format!(
            "no closed form for the trace of {}",
            kinds.iter().map(|k| k.name()).collect::<Vec<_>>().join("·")
        ))),
    }
}

/// Hodge coefficients read off from generic invariants a_0, a_2, a_4.
pub fn patodi_from_invariants(generic: &[CurvaturePolynomial; 3], n: usize, nu: usize) -> Result<PatodiCoefficients> {
    let [s, lap, s2, ric2, riem2] = basis_invariants()?;
    let spec = |p: &CurvaturePolynomial| -> Result<TensorPolynomial> { simplify_identities(&substitute_traces(p.poly(), n, nu)?) };
    let a0 = coordinates(&spec(&generic[0])?, &[TensorPolynomial::constant(int(1))])?;
    let a2 = coordinates(&spec(&generic[1])?, &[s])?;
    let a4 = coordinates(&spec(&generic[2])?, &[lap, s2, ric2, riem2])?;
    let k = int(360);
    Ok(PatodiCoefficients {
        n,
        nu,
        a0: a0[0].clone(),
        a2: a2[0].clone(),
        c: [&a4[0] * &k, &a4[1] * &k, &a4[2] * &k, &a4[3] * &k],
    })
}
