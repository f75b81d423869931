//! Tensor fields with polynomial components and their covariant derivatives.
//!
//! All tensor slots are covariant; at the origin the frame is orthonormal, so
//! raising an index there is the identity on components.

use num_traits::{One, Zero};

use super::poly::Poly;
use crate::rational::{rat, Rational};

/// Matrix of polynomials; 1×1 for scalar fields.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PMat {
    pub rows: usize,
    pub cols: usize,
    pub v: Vec<Poly>,
}

impl PMat {
    pub fn zero(rows: usize, cols: usize) -> PMat {
        PMat { rows, cols, v: vec![Poly::zero(); rows * cols] }
    }

    pub fn scalar(p: Poly) -> PMat {
        PMat { rows: 1, cols: 1, v: vec![p] }
    }

    pub fn get(&self, r: usize, c: usize) -> &Poly {
        &self.v[r * self.cols + c]
    }

    pub fn get_mut(&mut self, r: usize, c: usize) -> &mut Poly {
        &mut self.v[r * self.cols + c]
    }

    pub fn mul(&self, o: &PMat, deg: usize) -> PMat {
        let mut out = PMat::zero(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let p = a.mul(o.get(k, j), deg);
                    out.get_mut(i, j).add_assign(&p);
                }
            }
        }
        out
    }

    pub fn add_assign(&mut self, o: &PMat) {
        for (a, b) in self.v.iter_mut().zip(&o.v) {
            a.add_assign(b);
        }
    }

    pub fn sub_assign(&mut self, o: &PMat) {
        for (a, b) in self.v.iter_mut().zip(&o.v) {
            a.sub_assign(b);
        }
    }

    pub fn scale(&self, s: &Rational) -> PMat {
        PMat { rows: self.rows, cols: self.cols, v: self.v.iter().map(|p| p.scale(s)).collect() }
    }

    /// Multiplies every entry by a scalar polynomial.
    pub fn scale_poly(&self, p: &Poly, deg: usize) -> PMat {
        PMat { rows: self.rows, cols: self.cols, v: self.v.iter().map(|q| q.mul(p, deg)).collect() }
    }

    pub fn diff(&self, i: usize) -> PMat {
        PMat { rows: self.rows, cols: self.cols, v: self.v.iter().map(|p| p.diff(i)).collect() }
    }

    pub fn truncate(&self, deg: usize) -> PMat {
        PMat { rows: self.rows, cols: self.cols, v: self.v.iter().map(|p| p.truncate(deg)).collect() }
    }

    pub fn at_origin(&self) -> QMat {
        QMat { rows: self.rows, cols: self.cols, v: self.v.iter().map(Poly::constant_term).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.v.iter().all(Poly::is_zero)
    }
}

/// Matrix of rationals; 1×1 for scalars.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QMat {
    pub rows: usize,
    pub cols: usize,
    pub v: Vec<Rational>,
}

impl QMat {
    pub fn zero(rows: usize, cols: usize) -> QMat {
        QMat { rows, cols, v: vec![Rational::zero(); rows * cols] }
    }

    pub fn scalar(c: Rational) -> QMat {
        QMat { rows: 1, cols: 1, v: vec![c] }
    }

    pub fn identity(d: usize) -> QMat {
        let mut m = QMat::zero(d, d);
        for i in 0..d {
            m.v[i * d + i] = Rational::one();
        }
        m
    }

    pub fn is_scalar(&self) -> bool {
        self.rows == 1 && self.cols == 1
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.v[r * self.cols + c]
    }

    pub fn is_zero(&self) -> bool {
        self.v.iter().all(Zero::is_zero)
    }

    /// Matrix product; a 1×1 factor acts as a scalar.
    pub fn mul(&self, o: &QMat) -> QMat {
        if self.is_scalar() {
            return o.scale(&self.v[0]);
        }
        if o.is_scalar() {
            return self.scale(&o.v[0]);
        }
        assert_eq!(self.cols, o.rows, "matrix shapes");
        let mut out = QMat::zero(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    out.v[i * o.cols + j] += a * o.get(k, j);
                }
            }
        }
        out
    }

    pub fn scale(&self, s: &Rational) -> QMat {
        QMat { rows: self.rows, cols: self.cols, v: self.v.iter().map(|c| c * s).collect() }
    }

    /// Sum of two values; a zero 1×1 value adopts the other's shape.
    pub fn add(&self, o: &QMat) -> QMat {
        if self.is_scalar() && self.v[0].is_zero() {
            return o.clone();
        }
        if o.is_scalar() && o.v[0].is_zero() {
            return self.clone();
        }
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "matrix shapes");
        QMat { rows: self.rows, cols: self.cols, v: self.v.iter().zip(&o.v).map(|(a, b)| a + b).collect() }
    }

    pub fn trace(&self) -> Rational {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i).clone()).sum()
    }
}

/// What the components of a field take values in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fiber {
    Scalar,
    /// Sections of the bundle: d×1 columns.
    Section,
    /// Endomorphisms of the bundle: d×d.
    End,
}

/// A covariant tensor field; component (i_0, …, i_{r−1}) is at offset Σ i_s n^{r−1−s}.
#[derive(Clone, Debug)]
pub struct Field {
    pub n: usize,
    pub rank: usize,
    pub fiber: Fiber,
    /// Highest polynomial degree that is exact.
    pub prec: usize,
    pub comps: Vec<PMat>,
}

pub fn flat_index(n: usize, idx: &[usize]) -> usize {
    idx.iter().fold(0, |acc, &i| acc * n + i)
}

pub fn unflatten(n: usize, rank: usize, mut k: usize) -> Vec<usize> {
    let mut out = vec![0; rank];
    for s in (0..rank).rev() {
        out[s] = k % n;
        k /= n;
    }
    out
}

impl Field {
    pub fn comp(&self, idx: &[usize]) -> &PMat {
        &self.comps[flat_index(self.n, idx)]
    }

    /// Components at the origin.
    pub fn at_origin(&self) -> Vec<QMat> {
        self.comps.iter().map(PMat::at_origin).collect()
    }

    /// Averages over all orderings of the slots in `start..end`.
    pub fn symmetrize(&self, start: usize, end: usize) -> Field {
        let perms = crate::calculus::compose::all_perms(end - start);
        let w = rat(1, perms.len() as i64);
        let mut comps = Vec::with_capacity(self.comps.len());
        for k in 0..self.comps.len() {
            let idx = unflatten(self.n, self.rank, k);
            let first = &self.comps[k];
            let mut acc = PMat::zero(first.rows, first.cols);
            for p in &perms {
                let mut j = idx.clone();
                for (t, &q) in p.iter().enumerate() {
                    j[start + t] = idx[start + q];
                }
                acc.add_assign(self.comp(&j));
            }
            comps.push(acc.scale(&w));
        }
        Field { comps, ..self.clone() }
    }
}

/// Metric, Christoffel symbols and an optional bundle connection, all as truncated polynomials.
pub struct Geometry {
    pub n: usize,
    pub d: usize,
    /// Exact degree of the metric jet.
    pub prec: usize,
    pub g: Vec<Poly>,
    pub ginv: Vec<Poly>,
    /// Γ^k_{ij} at offset (k·n + i)·n + j.
    pub gamma: Vec<Poly>,
    /// Connection one-form ω_i (d×d); ∇_i u = ∂_i u + ω_i u.
    pub omega: Vec<PMat>,
    pub bundle_prec: usize,
}

impl Geometry {
    /// `g` is the full symmetric n×n metric with g(0) = δ.
    pub fn new(n: usize, prec: usize, g: Vec<Poly>, bundle: Option<(usize, usize, Vec<PMat>)>) -> Geometry {
        // g^{-1} = Σ_k (−h)^k with h = g − δ = O(|x|²)
        let mut h: Vec<Poly> = g.clone();
        for i in 0..n {
            h[i * n + i].sub_assign(&Poly::constant(n, Rational::one()));
        }
        let mat_mul = |a: &[Poly], b: &[Poly]| -> Vec<Poly> {
            let mut out = vec![Poly::zero(); n * n];
            for i in 0..n {
                for k in 0..n {
                    for j in 0..n {
                        let p = a[i * n + k].mul(&b[k * n + j], prec);
                        out[i * n + j].add_assign(&p);
                    }
                }
            }
            out
        };
        let mut ginv: Vec<Poly> = (0..n * n)
            .map(|k| if k / n == k % n { Poly::constant(n, Rational::one()) } else { Poly::zero() })
            .collect();
        let minus_h: Vec<Poly> = h.iter().map(|p| p.scale(&-Rational::one())).collect();
        let mut power = minus_h.clone();
        for _ in 0..prec / 2 {
            for (a, b) in ginv.iter_mut().zip(&power) {
                a.add_assign(b);
            }
            power = mat_mul(&power, &minus_h);
        }

        let gp = prec.saturating_sub(1);
        let half = rat(1, 2);
        let mut gamma = vec![Poly::zero(); n * n * n];
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut acc = Poly::zero();
                    for l in 0..n {
                        let mut s = g[j * n + l].diff(i);
                        s.add_assign(&g[i * n + l].diff(j));
                        s.sub_assign(&g[i * n + j].diff(l));
                        acc.add_assign(&ginv[k * n + l].mul(&s, gp));
                    }
                    gamma[(k * n + i) * n + j] = acc.scale(&half);
                }
            }
        }
        let (d, bundle_prec, omega) = match bundle {
            Some((d, bp, om)) => (d, bp, om),
            None => (1, usize::MAX / 2, vec![PMat::zero(1, 1); n]),
        };
        Geometry { n, d, prec, g, ginv, gamma, omega, bundle_prec }
    }

    pub fn christoffel(&self, k: usize, i: usize, j: usize) -> &Poly {
        &self.gamma[(k * self.n + i) * self.n + j]
    }

    /// ∇F with the new slot in front: (∇F)_{m i_1…i_r} = ∇_m F_{i_1…i_r}.
    pub fn nabla(&self, f: &Field) -> Field {
        let n = self.n;
        let prec = f.prec.saturating_sub(1).min(self.prec.saturating_sub(1));
        let prec = match f.fiber {
            Fiber::Scalar => prec,
            _ => prec.min(self.bundle_prec.saturating_sub(1)),
        };
        let rank = f.rank + 1;
        let total = n.pow(rank as u32);
        let mut comps = Vec::with_capacity(total);
        for k in 0..total {
            let idx = unflatten(n, rank, k);
            let m = idx[0];
            let rest = &idx[1..];
            let base = f.comp(rest);
            let mut acc = base.diff(m).truncate(prec);
            for s in 0..f.rank {
                let mut j = rest.to_vec();
                for p in 0..n {
                    let gam = self.christoffel(p, m, rest[s]);
                    if gam.is_zero() {
                        continue;
                    }
                    j[s] = p;
                    acc.sub_assign(&f.comp(&j).scale_poly(gam, prec));
                }
            }
            match f.fiber {
                Fiber::Scalar => {}
                Fiber::Section => acc.add_assign(&self.omega[m].mul(base, prec)),
                Fiber::End => {
                    acc.add_assign(&self.omega[m].mul(base, prec));
                    acc.sub_assign(&base.mul(&self.omega[m], prec));
                }
            }
            comps.push(acc);
        }
        Field { n, rank, fiber: f.fiber, prec, comps }
    }

    /// All-lower Riemann tensor R_{cdab} = g_{ce} R^e_{dab}, with
    /// R^e_{dab} = ∂_aΓ^e_{bd} − ∂_bΓ^e_{ad} + Γ^e_{af}Γ^f_{bd} − Γ^e_{bf}Γ^f_{ad}.
    pub fn riemann(&self) -> Field {
        let n = self.n;
        let prec = self.prec.saturating_sub(2);
        let mut up = vec![Poly::zero(); n * n * n * n];
        for e in 0..n {
            for dd in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        let mut acc = self.christoffel(e, b, dd).diff(a);
                        acc.sub_assign(&self.christoffel(e, a, dd).diff(b));
                        for f in 0..n {
                            acc.add_assign(&self.christoffel(e, a, f).mul(self.christoffel(f, b, dd), prec));
                            acc.sub_assign(&self.christoffel(e, b, f).mul(self.christoffel(f, a, dd), prec));
                        }
                        up[flat_index(n, &[e, dd, a, b])] = acc.truncate(prec);
                    }
                }
            }
        }
        let mut comps = Vec::with_capacity(n.pow(4));
        for k in 0..n.pow(4) {
            let idx = unflatten(n, 4, k);
            let mut acc = Poly::zero();
            for e in 0..n {
                acc.add_assign(&self.g[idx[0] * n + e].mul(&up[flat_index(n, &[e, idx[1], idx[2], idx[3]])], prec));
            }
            comps.push(PMat::scalar(acc));
        }
        Field { n, rank: 4, fiber: Fiber::Scalar, prec, comps }
    }

    /// Bundle curvature ℛ_ab = ∂_aω_b − ∂_bω_a + [ω_a, ω_b], so that [∇_a, ∇_b]u = ℛ_ab u.
    pub fn bundle_curvature(&self) -> Field {
        let n = self.n;
        let prec = self.bundle_prec.saturating_sub(1);
        let mut comps = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                let mut acc = self.omega[b].diff(a);
                acc.sub_assign(&self.omega[a].diff(b));
                acc.add_assign(&self.omega[a].mul(&self.omega[b], prec));
                acc.sub_assign(&self.omega[b].mul(&self.omega[a], prec));
                comps.push(acc.truncate(prec));
            }
        }
        Field { n, rank: 2, fiber: Fiber::End, prec, comps }
    }
}
