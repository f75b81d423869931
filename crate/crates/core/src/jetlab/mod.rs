//! Exact numeric oracle: polynomial metric jets around a point, curvature and
//! its covariant derivatives at that point, and evaluation of tensor polynomials.
//!
//! Jets are in the gauge g(0) = δ, ∂g(0) = 0, so components at the origin are
//! orthonormal-frame components.

pub mod eval;
pub mod field;
pub mod poly;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use eval::{eval_full, numeric_eval, Evaluated};
pub use field::{Fiber, Field, Geometry, PMat, QMat};
pub use poly::Poly;

use crate::error::{Error, Result};
use crate::rational::{factorial, int, inverse, rat, Rational};
use poly::monomials_of_degree;

/// Taylor jet of a metric at the origin.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricJet {
    pub n: usize,
    pub degree: usize,
    /// Full symmetric matrix g_{ij}(x), row-major.
    pub g: Vec<Poly>,
}

/// Connection one-form and potential on the trivial bundle of rank d.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BundleJet {
    pub d: usize,
    pub degree: usize,
    /// ω_i, traceless, vanishing at the origin.
    pub omega: Vec<PMat>,
    pub a: PMat,
}

fn small_rational(rng: &mut ChaCha8Rng) -> Rational {
    let num = rng.gen_range(-3i64..=3);
    let den = rng.gen_range(1i64..=3);
    rat(num, den)
}

fn random_poly(rng: &mut ChaCha8Rng, n: usize, degrees: std::ops::RangeInclusive<usize>, density: f64) -> Poly {
    let mut p = Poly::zero();
    for d in degrees {
        for e in monomials_of_degree(n, d) {
            if rng.gen_bool(density) {
                p.add_monomial(e, small_rational(rng));
            }
        }
    }
    p
}

impl MetricJet {
    pub fn flat(n: usize, degree: usize) -> MetricJet {
        let g = (0..n * n)
            .map(|k| if k / n == k % n { Poly::constant(n, Rational::one()) } else { Poly::zero() })
            .collect();
        MetricJet { n, degree, g }
    }

    /// Constant sectional curvature K in normal coordinates:
    /// g = δ + (sin²(√K r)/(K r²) − 1)(δ − x xᵀ/r²), expanded to `degree`.
    pub fn constant_curvature(n: usize, k: Rational, degree: usize) -> MetricJet {
        let r2 = (0..n).fold(Poly::zero(), |mut acc, i| {
            acc.add_assign(&Poly::var(n, i).mul(&Poly::var(n, i), 2));
            acc
        });
        // (sin²s/s² − 1)/r² = Σ_{j≥2} (−1)^{j+1} 2^{2j−1} K^{j−1} r^{2j−4} / (2j)!
        let mut factor = Poly::zero();
        let mut r_pow = Poly::constant(n, Rational::one());
        let mut j = 2;
        while 2 * j - 2 <= degree {
            let sign = if j % 2 == 1 { int(1) } else { int(-1) };
            let c = sign * int(1i64 << (2 * j - 1)) * pow(&k, j - 1) / factorial(2 * j);
            factor.add_assign(&r_pow.scale(&c));
            r_pow = r_pow.mul(&r2, degree);
            j += 1;
        }
        let mut g = MetricJet::flat(n, degree).g;
        for i in 0..n {
            for l in 0..n {
                let mut t = if i == l { r2.clone() } else { Poly::zero() };
                t.sub_assign(&Poly::var(n, i).mul(&Poly::var(n, l), 2));
                g[i * n + l].add_assign(&factor.mul(&t, degree));
            }
        }
        MetricJet { n, degree, g }
    }

    /// Deterministic random jet; coefficients of degrees 2..=degree with small denominators.
    pub fn random(n: usize, degree: usize, seed: u64) -> MetricJet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = MetricJet::flat(n, degree).g;
        for i in 0..n {
            for j in i..n {
                let p = random_poly(&mut rng, n, 2..=degree, 0.5);
                g[i * n + j].add_assign(&p);
                if i != j {
                    g[j * n + i].add_assign(&p);
                }
            }
        }
        MetricJet { n, degree, g }
    }

    /// The same metric in coordinates y with x = Q y, Q orthogonal.
    pub fn rotate(&self, q: &[Vec<Rational>]) -> MetricJet {
        let n = self.n;
        let sub: Vec<Poly> = self.g.iter().map(|p| p.linear_substitute(q, self.degree)).collect();
        let mut g = vec![Poly::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = Poly::zero();
                for k in 0..n {
                    for l in 0..n {
                        let c = &q[k][i] * &q[l][j];
                        if !c.is_zero() {
                            acc.add_assign(&sub[k * n + l].scale(&c));
                        }
                    }
                }
                g[i * n + j] = acc;
            }
        }
        MetricJet { n, degree: self.degree, g }
    }

    /// Product with a flat line: the metric on M × ℝ.
    pub fn extend_flat(&self) -> MetricJet {
        let n = self.n;
        let m = n + 1;
        let lift = |p: &Poly| {
            let mut q = Poly::zero();
            for (e, c) in p.terms() {
                let mut f = e.clone();
                f.push(0);
                q.add_monomial(f, c.clone());
            }
            q
        };
        let mut g = vec![Poly::zero(); m * m];
        for i in 0..n {
            for j in 0..n {
                g[i * m + j] = lift(&self.g[i * n + j]);
            }
        }
        g[n * m + n] = Poly::constant(m, Rational::one());
        MetricJet { n: m, degree: self.degree, g }
    }

    pub fn geometry(&self, bundle: Option<&BundleJet>) -> Geometry {
        Geometry::new(self.n, self.degree, self.g.clone(), bundle.map(|b| (b.d, b.degree, b.omega.clone())))
    }
}

fn pow(k: &Rational, e: usize) -> Rational {
    (0..e).fold(Rational::one(), |acc, _| acc * k)
}

impl BundleJet {
    /// Random traceless connection with ω(0) = 0 and a random symmetric potential.
    pub fn random(n: usize, d: usize, degree: usize, seed: u64) -> BundleJet {
        BundleJet::build(n, d, degree, seed, true)
    }

    /// Like [`BundleJet::random`] but the connection keeps its trace, so Tr ℛ ≠ 0.
    pub fn random_general(n: usize, d: usize, degree: usize, seed: u64) -> BundleJet {
        BundleJet::build(n, d, degree, seed, false)
    }

    fn build(n: usize, d: usize, degree: usize, seed: u64, traceless: bool) -> BundleJet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        let mut omega = Vec::with_capacity(n);
        for _ in 0..n {
            let mut m = PMat::zero(d, d);
            for r in 0..d {
                for c in 0..d {
                    *m.get_mut(r, c) = random_poly(&mut rng, n, 1..=degree, 0.4);
                }
            }
            if traceless {
                let mut tr = Poly::zero();
                for r in 0..d {
                    tr.add_assign(m.get(r, r));
                }
                let tr = tr.scale(&rat(1, d as i64));
                for r in 0..d {
                    m.get_mut(r, r).sub_assign(&tr);
                }
            }
            omega.push(m);
        }
        let mut a = PMat::zero(d, d);
        for r in 0..d {
            for c in r..d {
                let p = random_poly(&mut rng, n, 0..=degree, 0.4);
                *a.get_mut(r, c) = p.clone();
                *a.get_mut(c, r) = p;
            }
        }
        BundleJet { d, degree, omega, a }
    }
}

/// Values at the origin of curvature, its covariant derivatives and bundle data.
#[derive(Clone, Debug)]
pub struct CurvatureData {
    pub n: usize,
    pub d: usize,
    /// ∇^q R, all lower, rank 4 + q, derivative slots first.
    pub riem: Vec<Vec<Rational>>,
    /// ∇^q ℛ (End-valued, rank 2 + q).
    pub curv: Vec<Vec<QMat>>,
    /// ∇^q A (rank q).
    pub endo: Vec<Vec<QMat>>,
    /// Sym(∇^m u) of a test section (columns d×1).
    pub section: Vec<Vec<QMat>>,
}

/// Curvature data with covariant derivatives up to order `order`.
pub fn evaluate_curvature(jet: &MetricJet, order: usize, bundle: Option<&BundleJet>) -> Result<CurvatureData> {
    if jet.degree < order + 2 {
        return Err(Error::JetDegree { have: jet.degree, need: order + 2 });
    }
    if let Some(b) = bundle {
        if b.degree < order + 1 {
            return Err(Error::JetDegree { have: b.degree, need: order + 1 });
        }
    }
    let geo = jet.geometry(bundle);
    let mut riem = Vec::new();
    let mut f = geo.riemann();
    for q in 0..=order {
        riem.push(f.at_origin().into_iter().map(|m| m.v[0].clone()).collect());
        if q < order {
            f = geo.nabla(&f);
        }
    }
    let (d, curv, endo) = match bundle {
        None => (1, Vec::new(), Vec::new()),
        Some(b) => {
            let mut curv = Vec::new();
            let mut f = geo.bundle_curvature();
            for q in 0..=order {
                curv.push(f.at_origin());
                if q < order {
                    f = geo.nabla(&f);
                }
            }
            let mut endo = Vec::new();
            let mut f = Field { n: jet.n, rank: 0, fiber: Fiber::End, prec: b.degree, comps: vec![b.a.clone()] };
            for q in 0..=order {
                endo.push(f.at_origin());
                if q < order {
                    f = geo.nabla(&f);
                }
            }
            (b.d, curv, endo)
        }
    };
    Ok(CurvatureData { n: jet.n, d, riem, curv, endo, section: Vec::new() })
}

/// Symmetrized covariant derivatives Sym(∇^m u) at the origin for m ≤ order.
pub fn section_derivatives(geo: &Geometry, u: &Field, order: usize) -> Vec<Vec<QMat>> {
    let mut out = Vec::new();
    let mut f = u.clone();
    for m in 0..=order {
        out.push(f.symmetrize(0, m).at_origin());
        if m < order {
            f = geo.nabla(&f);
        }
    }
    out
}

/// A random section of the trivial bundle, as a rank-0 field.
pub fn random_section(n: usize, d: usize, degree: usize, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x51ed_270b_2745_8d3b);
    let mut m = PMat::zero(d, 1);
    for r in 0..d {
        *m.get_mut(r, 0) = random_poly(&mut rng, n, 0..=degree, 0.6);
    }
    Field { n, rank: 0, fiber: Fiber::Section, prec: degree, comps: vec![m] }
}

impl CurvatureData {
    fn r(&self, q: usize, idx: &[usize]) -> &Rational {
        &self.riem[q][field::flat_index(self.n, idx)]
    }

    pub fn riemann_at(&self, idx: [usize; 4]) -> Rational {
        self.r(0, &idx).clone()
    }

    pub fn ricci_at(&self, i: usize, j: usize) -> Rational {
        (0..self.n).map(|p| self.r(0, &[i, p, j, p]).clone()).sum()
    }

    pub fn scalar_curvature(&self) -> Rational {
        (0..self.n).map(|i| self.ricci_at(i, i)).sum()
    }

    /// ΔS = −∇^p∇_p S; needs order ≥ 2.
    pub fn laplace_s(&self) -> Rational {
        let n = self.n;
        let mut acc = Rational::zero();
        for p in 0..n {
            for i in 0..n {
                for k in 0..n {
                    acc -= self.r(2, &[p, p, i, k, i, k]);
                }
            }
        }
        acc
    }

    pub fn ricci_norm2(&self) -> Rational {
        let mut acc = Rational::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                let r = self.ricci_at(i, j);
                acc += &r * &r;
            }
        }
        acc
    }

    pub fn riemann_norm2(&self) -> Rational {
        self.riem[0].iter().map(|c| c * c).sum()
    }

    pub fn with_section(mut self, section: Vec<Vec<QMat>>) -> CurvatureData {
        self.section = section;
        self
    }
}

/// Rational orthogonal matrix (I − K)(I + K)^{-1} from a skew matrix K.
pub fn cayley(k: &[Vec<Rational>]) -> Result<Vec<Vec<Rational>>> {
    let n = k.len();
    let id = |i: usize, j: usize| if i == j { Rational::one() } else { Rational::zero() };
    let plus: Vec<Vec<Rational>> = (0..n).map(|i| (0..n).map(|j| id(i, j) + &k[i][j]).collect()).collect();
    let inv = inverse(&plus).ok_or(Error::Singular)?;
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|l| (id(i, l) - &k[i][l]) * &inv[l][j]).sum())
                .collect()
        })
        .collect())
}

/// Random rational rotation from a seed.
pub fn random_rotation(n: usize, seed: u64) -> Result<Vec<Vec<Rational>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x2545_f491_4f6c_dd1d);
    let mut k = vec![vec![Rational::zero(); n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let c = small_rational(&mut rng);
            k[i][j] = c.clone();
            k[j][i] = -c;
        }
    }
    cayley(&k)
}
