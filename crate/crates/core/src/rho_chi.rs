//! Composition coefficients ρ_{α,β} and the recurrence coefficients χ^{(p)}_α.
//!
//! Both are computed in probe form first: ρ(η^a; β) = Σ_{|α|=a} (a!/α!) η^α ρ_{α,β}
//! is one polynomial per (a, β) shape, and explicit entries come from polarization.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use crate::calculus::compose::{check_distinct, operator_symbol, polarize, Composer};
use crate::calculus::deriv::Fresh;
use crate::error::{Error, Result};
use crate::expr::canon::Term;
use crate::expr::poly::mul_terms;
use crate::expr::{Atom, Index, Kind, Label, TensorPolynomial};
use crate::rational::{binom, int, one};

/// Multi-index ⟨j₁…j_m⟩ over distinct abstract labels; equality ignores order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct MultiIndex(Vec<Label>);

impl MultiIndex {
    pub fn new(mut labels: Vec<Label>) -> Result<MultiIndex> {
        labels.sort();
        check_distinct(labels.iter())?;
        Ok(MultiIndex(labels))
    }

    pub fn empty() -> MultiIndex {
        MultiIndex(Vec::new())
    }

    /// `"jk"` → ⟨jk⟩; the empty string or `"0"` is the zero multi-index.
    pub fn parse(s: &str) -> Result<MultiIndex> {
        let s = s.trim();
        if s.is_empty() || s == "0" {
            return Ok(MultiIndex::empty());
        }
        if !s.chars().all(|c| c.is_ascii_lowercase()) {
            return Err(Error::Parse(format!("multi-index `{s}` must be lowercase letters")));
        }
        MultiIndex::new(s.chars().map(Label::letter).collect())
    }

    pub fn labels(&self) -> &[Label] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        for l in &self.0 {
            write!(f, "{}", l.name())?;
        }
        Ok(())
    }
}

/// Splits a polynomial by the number of ξ factors.
pub fn split_by_xi(p: &TensorPolynomial) -> Vec<TensorPolynomial> {
    let mut out: Vec<TensorPolynomial> = Vec::new();
    for (t, c) in p.iter() {
        let d = t.count_kind(Kind::Momentum);
        while out.len() <= d {
            out.push(TensorPolynomial::zero());
        }
        out[d].push_canonical(t.clone(), c.clone());
    }
    out
}

pub fn xi_part(p: &TensorPolynomial, degree: usize) -> TensorPolynomial {
    p.filter(|t| t.count_kind(Kind::Momentum) == degree)
}

type Cache<K, V> = RwLock<HashMap<K, Arc<V>>>;

/// ρ and χ tables with write-once memoization.
pub struct RhoTable {
    composer: Composer,
    rho: Cache<(usize, usize), TensorPolynomial>,
    chi: Cache<usize, [TensorPolynomial; 3]>,
}

fn get_or<K: std::hash::Hash + Eq + Clone, V>(
    cache: &Cache<K, V>,
    key: K,
    f: impl FnOnce() -> Result<V>,
) -> Result<Arc<V>> {
    if let Some(v) = cache.read().expect("cache lock").get(&key) {
        return Ok(v.clone());
    }
    let v = Arc::new(f()?);
    Ok(cache.write().expect("cache lock").entry(key).or_insert(v).clone())
}

fn placeholders(n: usize) -> Vec<Label> {
    (0..n).map(Label::placeholder).collect()
}

impl RhoTable {
    pub fn new(bound: usize, flat_bundle: bool) -> RhoTable {
        RhoTable {
            composer: Composer::new(flat_bundle, bound),
            rho: RwLock::new(HashMap::new()),
            chi: RwLock::new(HashMap::new()),
        }
    }

    pub fn composer(&self) -> &Composer {
        &self.composer
    }

    pub fn bound(&self) -> usize {
        self.composer.bound()
    }

    /// ρ(η^a; β) with β = P0..P(b−1).
    fn rho_probe_template(&self, a: usize, b: usize) -> Result<Arc<TensorPolynomial>> {
        get_or(&self.rho, (a, b), || {
            let beta = placeholders(b);
            let mut acc = TensorPolynomial::zero();
            for t in 0..=a {
                for mask in 0u32..(1 << b) {
                    let u: Vec<Label> = (0..b).filter(|k| mask & (1 << k) != 0).map(|k| beta[k]).collect();
                    let sign = if (a + b + t + u.len()) % 2 == 0 { 1 } else { -1 };
                    let coeff = int(sign * binom(a as i64, t as i64));
                    let composed = operator_symbol(&self.composer.sym_power(t, &u)?)?;

                    let mut fresh = Fresh::new();
                    let mut scalars = Vec::new();
                    for _ in 0..a - t {
                        let l = fresh.next();
                        scalars.push(Atom::probe(Kind::ProbeEta, Index::up(l)));
                        scalars.push(Atom::momentum(Index::down(l)));
                    }
                    for k in (0..b).filter(|k| mask & (1 << k) == 0) {
                        scalars.push(Atom::momentum(Index::down(beta[k])));
                    }
                    let extra = Term { scalars, chain: vec![] };
                    for (ct, cc) in composed.iter() {
                        acc.add_term(&coeff * cc, mul_terms(&extra, ct))?;
                    }
                }
            }
            Ok(acc)
        })
    }

    /// ρ(η^a; β) for explicit β labels.
    pub fn rho_probe(&self, a: usize, beta: &[Label]) -> Result<TensorPolynomial> {
        self.composer.check_bound(a + beta.len())?;
        check_distinct(beta.iter())?;
        let tmpl = self.rho_probe_template(a, beta.len())?;
        let map: HashMap<Label, Index> =
            beta.iter().enumerate().map(|(k, l)| (Label::placeholder(k), Index::down(*l))).collect();
        tmpl.relabel(&map)
    }

    pub fn compute_rho(&self, alpha: &MultiIndex, beta: &MultiIndex) -> Result<TensorPolynomial> {
        check_distinct(alpha.labels().iter().chain(beta.labels()))?;
        let p = self.rho_probe(alpha.len(), beta.labels())?;
        polarize(&p, Kind::ProbeEta, alpha.labels())
    }

    /// ρ^{(p)}_{α,β} for p = 0, 1, …
    pub fn rho_parts(&self, alpha: &MultiIndex, beta: &MultiIndex) -> Result<Vec<TensorPolynomial>> {
        Ok(split_by_xi(&self.compute_rho(alpha, beta)?))
    }

    /// χ^{(0)}, χ^{(1)}, χ^{(2)} in probe form: Σ_{|α|=a} (a!/α!) η^α χ^{(p)}_α.
    pub fn chi_probe(&self, a: usize) -> Result<Arc<[TensorPolynomial; 3]>> {
        self.composer.check_bound(a + 2)?;
        get_or(&self.chi, a, || {
            let (i, j) = (Label::placeholder(0), Label::placeholder(1));
            let rho2 = self.rho_probe(a, &[i, j])?;
            let rho1 = self.rho_probe(a, &[i])?;
            let g = TensorPolynomial::from_atoms(one(), vec![Atom::metric(Index::up(i), Index::up(j))], vec![])?;
            let xi = TensorPolynomial::from_atoms(int(2), vec![Atom::momentum(Index::up(i))], vec![])?;
            let chi = &g.try_mul(&rho2)? + &rho1.try_mul(&xi)?;
            Ok([xi_part(&chi, 0), xi_part(&chi, 1), xi_part(&chi, 2)])
        })
    }

    /// (χ⁰_α, χ¹_α, χ²_α).
    pub fn compute_chi(&self, alpha: &MultiIndex) -> Result<[TensorPolynomial; 3]> {
        let p = self.chi_probe(alpha.len())?;
        Ok([
            polarize(&p[0], Kind::ProbeEta, alpha.labels())?,
            polarize(&p[1], Kind::ProbeEta, alpha.labels())?,
            polarize(&p[2], Kind::ProbeEta, alpha.labels())?,
        ])
    }
}

/// Drops every monomial whose End-valued factors are exactly one ℛ and no A.
pub fn drop_linear_curv(p: &TensorPolynomial) -> TensorPolynomial {
    p.filter(|t| !(t.count_kind(Kind::BundleCurv) == 1 && t.count_kind(Kind::EndoA) == 0))
}
