//! Truncated multivariate polynomials with exact rational coefficients.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::rational::Rational;

/// Exponent vector of a monomial in x_0 … x_{n−1}.
pub type Exponent = Vec<u8>;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Poly {
    terms: BTreeMap<Exponent, Rational>,
}

fn degree(e: &Exponent) -> usize {
    e.iter().map(|&k| k as usize).sum()
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn constant(n: usize, c: Rational) -> Poly {
        let mut p = Poly::zero();
        p.add_monomial(vec![0; n], c);
        p
    }

    /// The coordinate function x_i.
    pub fn var(n: usize, i: usize) -> Poly {
        let mut e = vec![0; n];
        e[i] = 1;
        let mut p = Poly::zero();
        p.add_monomial(e, Rational::from_integer(1.into()));
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &Rational)> {
        self.terms.iter()
    }

    pub fn add_monomial(&mut self, e: Exponent, c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e.clone()).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    /// Value at the origin.
    pub fn constant_term(&self) -> Rational {
        self.terms
            .iter()
            .find(|(e, _)| e.iter().all(|&k| k == 0))
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Rational::zero)
    }

    pub fn truncate(&self, max_deg: usize) -> Poly {
        Poly { terms: self.terms.iter().filter(|(e, _)| degree(e) <= max_deg).map(|(e, c)| (e.clone(), c.clone())).collect() }
    }

    pub fn add_assign(&mut self, other: &Poly) {
        for (e, c) in &other.terms {
            self.add_monomial(e.clone(), c.clone());
        }
    }

    pub fn sub_assign(&mut self, other: &Poly) {
        for (e, c) in &other.terms {
            self.add_monomial(e.clone(), -c.clone());
        }
    }

    pub fn scale(&self, s: &Rational) -> Poly {
        if s.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect() }
    }

    /// Product truncated to total degree `max_deg`.
    pub fn mul(&self, other: &Poly, max_deg: usize) -> Poly {
        let mut out = Poly::zero();
        for (ea, ca) in &self.terms {
            let da = degree(ea);
            if da > max_deg {
                continue;
            }
            for (eb, cb) in &other.terms {
                if da + degree(eb) > max_deg {
                    continue;
                }
                let e: Exponent = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_monomial(e, ca * cb);
            }
        }
        out
    }

    /// ∂/∂x_i.
    pub fn diff(&self, i: usize) -> Poly {
        let mut out = Poly::zero();
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut f = e.clone();
            f[i] -= 1;
            out.add_monomial(f, c * Rational::from_integer((e[i] as i64).into()));
        }
        out
    }

    pub fn max_degree(&self) -> usize {
        self.terms.keys().map(degree).max().unwrap_or(0)
    }

    /// Substitutes x_i = Σ_j m[i][j] y_j, truncating at `max_deg`.
    pub fn linear_substitute(&self, m: &[Vec<Rational>], max_deg: usize) -> Poly {
        let n = m.len();
        let images: Vec<Poly> = (0..n)
            .map(|i| {
                let mut p = Poly::zero();
                for (j, c) in m[i].iter().enumerate() {
                    p.add_assign(&Poly::var(n, j).scale(c));
                }
                p
            })
            .collect();
        let mut out = Poly::zero();
        for (e, c) in &self.terms {
            let mut acc = Poly::constant(n, c.clone());
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    acc = acc.mul(&images[i], max_deg);
                }
            }
            out.add_assign(&acc);
        }
        out
    }
}

/// All exponent vectors of total degree exactly `d` in `n` variables.
pub fn monomials_of_degree(n: usize, d: usize) -> Vec<Exponent> {
    fn rec(n: usize, left: usize, cur: &mut Exponent, out: &mut Vec<Exponent>) {
        if cur.len() == n - 1 {
            cur.push(left as u8);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in (0..=left).rev() {
            cur.push(k as u8);
            rec(n, left - k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    rec(n, d, &mut Vec::new(), &mut out);
    out
}
