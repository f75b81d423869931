//! Resolvent symbols r_k(x, ξ, λ) stored as Σ_m f_m(x, ξ) / (λ − |ξ|²)^m.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::calculus::deriv::Fresh;
use crate::error::{Error, Result};
use crate::expr::canon::Term;
use crate::expr::poly::mul_terms;
use crate::expr::serial::{poly_from_dto, poly_to_dto, PolyDto};
use crate::expr::{Atom, Index, Kind, Label, TensorPolynomial};
use crate::rational::{factorial, int, one, Rational};
use crate::rho_chi::{MultiIndex, RhoTable};

/// Σ_m f_m / (λ − |ξ|²)^m with m ≥ 1.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RationalSymbol {
    parts: BTreeMap<usize, TensorPolynomial>,
}

impl RationalSymbol {
    pub fn zero() -> RationalSymbol {
        RationalSymbol::default()
    }

    pub fn single(m: usize, f: TensorPolynomial) -> RationalSymbol {
        let mut s = RationalSymbol::zero();
        s.add_part(m, &f);
        s
    }

    pub fn parts(&self) -> impl Iterator<Item = (usize, &TensorPolynomial)> {
        self.parts.iter().map(|(m, f)| (*m, f))
    }

    pub fn part(&self, m: usize) -> TensorPolynomial {
        self.parts.get(&m).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn max_power(&self) -> usize {
        self.parts.keys().next_back().copied().unwrap_or(0)
    }

    pub fn term_count(&self) -> usize {
        self.parts.values().map(TensorPolynomial::len).sum()
    }

    pub fn add_part(&mut self, m: usize, f: &TensorPolynomial) {
        let e = self.parts.entry(m).or_default();
        e.add_assign(f);
        if e.is_zero() {
            self.parts.remove(&m);
        }
    }

    pub fn add_assign(&mut self, other: &RationalSymbol) {
        for (m, f) in &other.parts {
            self.add_part(*m, f);
        }
    }

    pub fn scale(&self, c: &Rational) -> RationalSymbol {
        let mut out = RationalSymbol::zero();
        for (m, f) in &self.parts {
            out.add_part(*m, &f.scale(c));
        }
        out
    }

    /// Multiplies by (λ − |ξ|²)^{−k}.
    pub fn shift(&self, k: usize) -> RationalSymbol {
        RationalSymbol { parts: self.parts.iter().map(|(m, f)| (m + k, f.clone())).collect() }
    }

    pub fn map_parts(&self, mut f: impl FnMut(&TensorPolynomial) -> Result<TensorPolynomial>) -> Result<RationalSymbol> {
        let mut out = RationalSymbol::zero();
        for (m, p) in &self.parts {
            out.add_part(*m, &f(p)?);
        }
        Ok(out)
    }

    pub fn filter(&self, mut keep: impl FnMut(&Term) -> bool) -> RationalSymbol {
        let mut out = RationalSymbol::zero();
        for (m, p) in &self.parts {
            out.add_part(*m, &p.filter(&mut keep));
        }
        out
    }

    /// ξ ↦ −ξ.
    pub fn reflect_xi(&self) -> RationalSymbol {
        let mut out = RationalSymbol::zero();
        for (m, p) in &self.parts {
            let mut q = TensorPolynomial::zero();
            for (t, c) in p.iter() {
                let c = if t.count_kind(Kind::Momentum) % 2 == 0 { c.clone() } else { -c.clone() };
                q.push_canonical(t.clone(), c);
            }
            out.add_part(*m, &q);
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SymbolDto {
            schema: SYMBOL_SCHEMA.to_string(),
            parts: self.parts.iter().map(|(m, f)| PartDto { power: *m, numerator: poly_to_dto(f) }).collect(),
        })
        .expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<RationalSymbol> {
        let d: SymbolDto = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        if d.schema != SYMBOL_SCHEMA {
            return Err(Error::Parse(format!("unsupported schema `{}`", d.schema)));
        }
        let mut out = RationalSymbol::zero();
        for p in &d.parts {
            if p.power == 0 {
                return Err(Error::Structural("denominator power must be at least 1".into()));
            }
            out.add_part(p.power, &poly_from_dto(&p.numerator)?);
        }
        Ok(out)
    }
}

pub const SYMBOL_SCHEMA: &str = "heatcalc.rational-symbol/1";

#[derive(Serialize, Deserialize)]
struct PartDto {
    power: usize,
    numerator: PolyDto,
}

#[derive(Serialize, Deserialize)]
struct SymbolDto {
    schema: String,
    parts: Vec<PartDto>,
}

fn xi_up(l: Label) -> TensorPolynomial {
    TensorPolynomial::from_atoms(one(), vec![Atom::momentum(Index::up(l))], vec![]).expect("ξ atom")
}

/// ∂/∂ξ_i of a polynomial: each ξ factor in turn becomes a metric carrying the new index `i` (upper).
fn d_xi_poly(p: &TensorPolynomial, i: Label) -> Result<TensorPolynomial> {
    p.map_terms(|t, c| {
        let mut out = Vec::new();
        for (k, a) in t.scalars.iter().enumerate() {
            if a.kind == Kind::Momentum {
                let mut u = t.clone();
                u.scalars[k] = Atom::metric(a.slots[0], Index::up(i));
                out.push((c.clone(), u));
            }
        }
        Ok(out)
    })
}

/// ∇^v{}^i applied once.
pub fn vertical_derivative_once(s: &RationalSymbol, i: Label) -> Result<RationalSymbol> {
    let mut out = RationalSymbol::zero();
    for (m, f) in s.parts() {
        out.add_part(m, &d_xi_poly(f, i)?);
        let g = f.try_mul(&xi_up(i))?.scale(&int(2 * m as i64));
        out.add_part(m + 1, &g);
    }
    Ok(out)
}

/// ∇^v{}^{i₁…i_m}; the labels come out as free upper indices.
pub fn vertical_derivative(s: &RationalSymbol, alpha: &[Label]) -> Result<RationalSymbol> {
    let mut cur = s.clone();
    for &i in alpha.iter().rev() {
        cur = vertical_derivative_once(&cur, i)?;
    }
    Ok(cur)
}

/// The potential term of P = −∇^p∇_p + A.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Potential {
    Generic,
    Zero,
}

/// How the multi-index sums Σ_{|α|=m} (1/α!) ∇^v{}^α r_j · χ_α are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlphaSum {
    /// Contract the probe form of χ directly against the symmetric derivative.
    Probe,
    /// Polarize χ to explicit labels and contract with weight 1/m!.
    Explicit,
}

/// Replaces the probe factors of a probe-form term by the given labels (lower).
fn substitute_probes(t: &Term, labels: &[Label]) -> Result<Term> {
    let pos: Vec<usize> = (0..t.scalars.len()).filter(|&k| t.scalars[k].kind == Kind::ProbeEta).collect();
    if pos.len() != labels.len() {
        return Err(Error::Structural(format!("expected {} probes, found {}", labels.len(), pos.len())));
    }
    let map: HashMap<Label, Label> =
        pos.iter().zip(labels).map(|(&k, l)| (t.scalars[k].slots[0].label, *l)).collect();
    let mut u = Term {
        scalars: t.scalars.iter().filter(|a| a.kind != Kind::ProbeEta).cloned().collect(),
        chain: t.chain.clone(),
    };
    u.for_each_index_mut(&mut |i| {
        if let Some(l) = map.get(&i.label) {
            *i = Index::down(*l);
        }
    });
    Ok(u)
}

fn right_multiply(s: &RationalSymbol, f: &TensorPolynomial, w: &Rational) -> Result<RationalSymbol> {
    s.map_parts(|p| {
        let mut acc = TensorPolynomial::zero();
        for (ta, ca) in p.iter() {
            for (tb, cb) in f.iter() {
                acc.add_term(ca * cb * w, mul_terms(ta, tb))?;
            }
        }
        Ok(acc)
    })
}

/// Runs the recurrence r_0, r_1, r_2, … with cached vertical derivatives.
pub struct Recurrence<'a> {
    table: &'a RhoTable,
    potential: Potential,
    alpha_sum: AlphaSum,
    history: Vec<RationalSymbol>,
    derivs: HashMap<(usize, usize), RationalSymbol>,
}

fn alpha_labels(m: usize) -> Vec<Label> {
    let mut f = Fresh::new();
    (0..m).map(|_| f.next()).collect()
}

impl<'a> Recurrence<'a> {
    pub fn new(table: &'a RhoTable, potential: Potential) -> Recurrence<'a> {
        Recurrence { table, potential, alpha_sum: AlphaSum::Probe, history: Vec::new(), derivs: HashMap::new() }
    }

    pub fn with_alpha_sum(mut self, a: AlphaSum) -> Self {
        self.alpha_sum = a;
        self
    }

    pub fn history(&self) -> &[RationalSymbol] {
        &self.history
    }

    /// r_k, computing earlier entries as needed.
    pub fn get(&mut self, k: usize) -> Result<&RationalSymbol> {
        while self.history.len() <= k {
            let next = r_next(self.history.len(), &self.history, self.table, self.potential, self.alpha_sum, &mut self.derivs)?;
            self.history.push(next);
        }
        Ok(&self.history[k])
    }
}

fn cached_deriv<'c>(
    cache: &'c mut HashMap<(usize, usize), RationalSymbol>,
    history: &[RationalSymbol],
    j: usize,
    m: usize,
) -> Result<&'c RationalSymbol> {
    if !cache.contains_key(&(j, m)) {
        let d = vertical_derivative(&history[j], &alpha_labels(m))?;
        cache.insert((j, m), d);
    }
    Ok(&cache[&(j, m)])
}

/// The A contribution Σ_{|α|=m} (1/α!) ∇^v{}^α r_j · (−i∇)^α A.
fn potential_term(deriv: &RationalSymbol, m: usize) -> Result<RationalSymbol> {
    let labels = alpha_labels(m);
    let a = TensorPolynomial::from_atoms(
        one(),
        vec![],
        vec![Atom::endo_a().with_prefix(labels.iter().map(|l| Index::down(*l)).collect())],
    )?;
    right_multiply(deriv, &a, &(one() / factorial(m)))
}

/// Σ_{|α|=m} (1/α!) ∇^v{}^α r_j · χ^{(p)}_α.
fn chi_term(deriv: &RationalSymbol, table: &RhoTable, m: usize, p: usize, mode: AlphaSum) -> Result<RationalSymbol> {
    let labels = alpha_labels(m);
    let chi = match mode {
        AlphaSum::Probe => {
            let probe = table.chi_probe(m)?;
            probe[p].map_terms(|t, c| Ok(vec![(c.clone(), substitute_probes(t, &labels)?)]))?
        }
        AlphaSum::Explicit => table.compute_chi(&MultiIndex::new(labels.clone())?)?[p].clone(),
    };
    right_multiply(deriv, &chi, &(one() / factorial(m)))
}

/// Contributions of one history entry r_j to r_k, before the final (λ−|ξ|²)^{−1}.
pub fn contributions(
    k: usize,
    j: usize,
    history: &[RationalSymbol],
    table: &RhoTable,
    potential: Potential,
    mode: AlphaSum,
    cache: &mut HashMap<(usize, usize), RationalSymbol>,
) -> Result<(RationalSymbol, RationalSymbol)> {
    let mut with_a = RationalSymbol::zero();
    let mut chi = RationalSymbol::zero();
    if history[j].is_zero() {
        return Ok((with_a, chi));
    }
    if potential == Potential::Generic {
        let m = k - j - 2;
        let d = cached_deriv(cache, history, j, m)?;
        with_a.add_assign(&potential_term(d, m)?);
    }
    for p in 0..=2usize {
        if p > k - j {
            continue;
        }
        let m = k - j - p;
        if m == 0 {
            continue;
        }
        let d = cached_deriv(cache, history, j, m)?;
        chi.add_assign(&chi_term(d, table, m, 2 - p, mode)?);
    }
    Ok((with_a, chi))
}

/// One step of the recurrence.
pub fn r_next(
    k: usize,
    history: &[RationalSymbol],
    table: &RhoTable,
    potential: Potential,
    mode: AlphaSum,
    cache: &mut HashMap<(usize, usize), RationalSymbol>,
) -> Result<RationalSymbol> {
    if history.len() < k {
        return Err(Error::Sequencing(k));
    }
    match k {
        0 => return Ok(RationalSymbol::single(1, TensorPolynomial::identity())),
        1 => return Ok(RationalSymbol::zero()),
        _ => {}
    }
    let mut acc = RationalSymbol::zero();
    for j in 0..=k - 2 {
        let (a, c) = contributions(k, j, history, table, potential, mode, cache)?;
        acc.add_assign(&a);
        acc.add_assign(&c);
    }
    Ok(acc.shift(1))
}

/// r_4 split into the A-dependent part, the part built from r_0 alone, and the rest.
pub struct R4Clusters {
    pub with_a: RationalSymbol,
    pub from_r0: RationalSymbol,
    pub rest: RationalSymbol,
}

/// Recomputes the three r_4 clusters from r_0 and r_2.
pub fn r4_clusters(table: &RhoTable, potential: Potential) -> Result<R4Clusters> {
    let mut rec = Recurrence::new(table, potential);
    rec.get(2)?;
    let history = rec.history().to_vec();
    let mut cache = HashMap::new();
    let (a0, c0) = contributions(4, 0, &history, table, potential, AlphaSum::Probe, &mut cache)?;

    let r2 = &history[2];
    let has_a = |t: &Term| t.count_kind(Kind::EndoA) > 0;
    let r2_a = r2.filter(has_a);
    let r2_rest = r2.filter(|t| !has_a(t));
    let split = |h: &RationalSymbol| -> Result<(RationalSymbol, RationalSymbol)> {
        let mut hist = history.clone();
        hist[2] = h.clone();
        contributions(4, 2, &hist, table, potential, AlphaSum::Probe, &mut HashMap::new())
    };
    let (a2a, c2a) = split(&r2_a)?;
    let (a2r, c2r) = split(&r2_rest)?;

    let mut with_a = a0;
    with_a.add_assign(&a2a);
    with_a.add_assign(&c2a);
    with_a.add_assign(&a2r);
    Ok(R4Clusters { with_a: with_a.shift(1), from_r0: c0.shift(1), rest: c2r.shift(1) })
}

/// Whether r(−ξ) = (−1)^k r(ξ).
pub fn has_parity(s: &RationalSymbol, k: usize) -> bool {
    let r = s.reflect_xi();
    if k % 2 == 0 {
        r == *s
    } else {
        r == s.scale(&-one())
    }
}
