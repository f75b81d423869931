//! Exact evaluation of tensor polynomials on curvature data.

use num_traits::Zero;

use super::field::{flat_index, unflatten, QMat};
use super::CurvatureData;
use crate::error::{Error, Result};
use crate::expr::canon::Term;
use crate::expr::{Atom, Kind, Label, TensorPolynomial};
use crate::rational::{int, Rational};

/// Components over a list of labels, offset Σ i_s n^{r−1−s}.
#[derive(Clone, Debug)]
struct Dense {
    labels: Vec<Label>,
    data: Vec<QMat>,
}

impl Dense {
    fn unit() -> Dense {
        Dense { labels: vec![], data: vec![QMat::scalar(int(1))] }
    }

    /// Builds from a component function over raw slot labels, merging repeated labels.
    fn from_slots(n: usize, slots: &[Label], f: impl Fn(&[usize]) -> Result<QMat>) -> Result<Dense> {
        let mut labels: Vec<Label> = Vec::new();
        for l in slots {
            if !labels.contains(l) {
                labels.push(*l);
            }
        }
        let pos: Vec<usize> = slots.iter().map(|l| labels.iter().position(|m| m == l).unwrap()).collect();
        let repeated: Vec<bool> = labels.iter().map(|l| slots.iter().filter(|m| *m == l).count() > 1).collect();
        let total = n.pow(labels.len() as u32);
        let mut data = Vec::with_capacity(total);
        for k in 0..total {
            let idx = unflatten(n, labels.len(), k);
            let full: Vec<usize> = pos.iter().map(|&p| idx[p]).collect();
            data.push(f(&full)?);
        }
        let mut d = Dense { labels, data };
        // a label repeated inside one atom is a trace over that slot pair
        if repeated.iter().any(|&r| r) {
            let keep: Vec<usize> = (0..d.labels.len()).filter(|&i| !repeated[i]).collect();
            let kept_labels: Vec<Label> = keep.iter().map(|&i| d.labels[i]).collect();
            let mut out = vec![QMat::scalar(Rational::zero()); n.pow(kept_labels.len() as u32)];
            for k in 0..d.data.len() {
                let idx = unflatten(n, d.labels.len(), k);
                let o = flat_index(n, &keep.iter().map(|&i| idx[i]).collect::<Vec<_>>());
                out[o] = out[o].add(&d.data[k]);
            }
            d = Dense { labels: kept_labels, data: out };
        }
        Ok(d)
    }

    /// Product with summation over shared labels; `self` stays on the left.
    fn mul(&self, o: &Dense, n: usize) -> Dense {
        let shared: Vec<Label> = self.labels.iter().filter(|l| o.labels.contains(l)).copied().collect();
        let mut labels: Vec<Label> = self.labels.iter().filter(|l| !shared.contains(l)).copied().collect();
        labels.extend(o.labels.iter().filter(|l| !shared.contains(l)).copied());
        let all: Vec<Label> = labels.iter().chain(shared.iter()).copied().collect();
        let pa: Vec<usize> = self.labels.iter().map(|l| all.iter().position(|m| m == l).unwrap()).collect();
        let pb: Vec<usize> = o.labels.iter().map(|l| all.iter().position(|m| m == l).unwrap()).collect();
        let out_size = n.pow(labels.len() as u32);
        let inner = n.pow(shared.len() as u32);
        let mut data = Vec::with_capacity(out_size);
        let mut idx = vec![0usize; all.len()];
        for k in 0..out_size {
            let head = unflatten(n, labels.len(), k);
            idx[..labels.len()].copy_from_slice(&head);
            let mut acc = QMat::scalar(Rational::zero());
            for s in 0..inner {
                let tail = unflatten(n, shared.len(), s);
                idx[labels.len()..].copy_from_slice(&tail);
                let ia = flat_index(n, &pa.iter().map(|&p| idx[p]).collect::<Vec<_>>());
                let ib = flat_index(n, &pb.iter().map(|&p| idx[p]).collect::<Vec<_>>());
                let (x, y) = (&self.data[ia], &o.data[ib]);
                if x.is_zero() || y.is_zero() {
                    continue;
                }
                acc = acc.add(&x.mul(y));
            }
            data.push(acc);
        }
        Dense { labels, data }
    }

    fn permuted_to(&self, order: &[Label], n: usize) -> Dense {
        let pos: Vec<usize> = order.iter().map(|l| self.labels.iter().position(|m| m == l).unwrap()).collect();
        let mut data = Vec::with_capacity(self.data.len());
        for k in 0..self.data.len() {
            let idx = unflatten(n, order.len(), k);
            let mut src = vec![0; order.len()];
            for (t, &p) in pos.iter().enumerate() {
                src[p] = idx[t];
            }
            data.push(self.data[flat_index(n, &src)].clone());
        }
        Dense { labels: order.to_vec(), data }
    }
}

fn labels_of(a: &Atom) -> Vec<Label> {
    a.prefix.iter().chain(a.slots.iter()).map(|i| i.label).collect()
}

fn missing(what: &str) -> Error {
    Error::MissingValue(what.to_string())
}

fn level<T>(v: &[T], q: usize, what: &str) -> Result<usize> {
    if q < v.len() {
        Ok(q)
    } else {
        Err(missing(&format!("{what} with {q} derivatives")))
    }
}

fn atom_value(a: &Atom, data: &CurvatureData) -> Result<Dense> {
    let n = data.n;
    let q = a.prefix.len();
    let slots = labels_of(a);
    match a.kind {
        Kind::Dim => Ok(Dense { labels: vec![], data: vec![QMat::scalar(int(n as i64))] }),
        Kind::FiberDim => Ok(Dense { labels: vec![], data: vec![QMat::scalar(int(data.d as i64))] }),
        Kind::Identity => Ok(Dense { labels: vec![], data: vec![QMat::identity(data.d)] }),
        Kind::Metric => Dense::from_slots(n, &slots, |i| Ok(QMat::scalar(int((i[0] == i[1]) as i64)))),
        Kind::Riemann => {
            let q = level(&data.riem, q, "Riemann tensor")?;
            Dense::from_slots(n, &slots, |i| Ok(QMat::scalar(data.riem[q][flat_index(n, i)].clone())))
        }
        Kind::Ricci => {
            let q = level(&data.riem, q, "Ricci tensor")?;
            Dense::from_slots(n, &slots, |i| {
                let mut idx: Vec<usize> = i[..q].to_vec();
                idx.extend([i[q], 0, i[q + 1], 0]);
                let mut s = Rational::zero();
                for p in 0..n {
                    idx[q + 1] = p;
                    idx[q + 3] = p;
                    s += &data.riem[q][flat_index(n, &idx)];
                }
                Ok(QMat::scalar(s))
            })
        }
        Kind::Scalar => {
            let q = level(&data.riem, q, "scalar curvature")?;
            Dense::from_slots(n, &slots, |i| {
                let mut idx: Vec<usize> = i[..q].to_vec();
                idx.extend([0, 0, 0, 0]);
                let mut s = Rational::zero();
                for a in 0..n {
                    for p in 0..n {
                        idx[q..].copy_from_slice(&[a, p, a, p]);
                        s += &data.riem[q][flat_index(n, &idx)];
                    }
                }
                Ok(QMat::scalar(s))
            })
        }
        Kind::BundleCurv => {
            let q = level(&data.curv, q, "bundle curvature")?;
            Dense::from_slots(n, &slots, |i| Ok(data.curv[q][flat_index(n, i)].clone()))
        }
        Kind::EndoA => {
            let q = level(&data.endo, q, "potential")?;
            Dense::from_slots(n, &slots, |i| Ok(data.endo[q][flat_index(n, i)].clone()))
        }
        Kind::SymDeriv => {
            let m = level(&data.section, slots.len(), "section derivative")?;
            Dense::from_slots(n, &slots, |i| Ok(data.section[m][flat_index(n, i)].clone()))
        }
        Kind::Trace => {
            let mut acc = Dense::unit();
            for b in &a.inner {
                acc = acc.mul(&atom_value(b, data)?, n);
            }
            Ok(Dense { labels: acc.labels, data: acc.data.iter().map(|m| QMat::scalar(m.trace())).collect() })
        }
        Kind::Momentum | Kind::ProbeEta | Kind::ProbeZeta => Err(missing(kind_name(a.kind))),
    }
}

fn kind_name(k: Kind) -> &'static str {
    match k {
        Kind::Momentum => "momentum ξ",
        _ => "probe vector",
    }
}

fn derivative_order(t: &Term) -> usize {
    let mut q = t.deriv_count();
    for a in &t.scalars {
        if a.kind == Kind::SymDeriv {
            q += a.slots.len();
        }
    }
    q
}

fn eval_term(t: &Term, data: &CurvatureData) -> Result<Dense> {
    let n = data.n;
    let mut acc = Dense::unit();
    for a in t.scalars.iter().filter(|a| a.kind != Kind::SymDeriv) {
        acc = acc.mul(&atom_value(a, data)?, n);
    }
    for a in &t.chain {
        acc = acc.mul(&atom_value(a, data)?, n);
    }
    for a in t.scalars.iter().filter(|a| a.kind == Kind::SymDeriv) {
        acc = acc.mul(&atom_value(a, data)?, n);
    }
    Ok(acc)
}

/// Value of a polynomial: components over its sorted free labels, split into
/// real and imaginary parts (each derivative prefix carries a factor −i).
#[derive(Clone, Debug)]
pub struct Evaluated {
    pub labels: Vec<Label>,
    pub re: Vec<QMat>,
    pub im: Vec<QMat>,
}

impl Evaluated {
    pub fn is_zero(&self) -> bool {
        self.re.iter().chain(&self.im).all(QMat::is_zero)
    }

    /// Componentwise difference.
    pub fn sub(&self, o: &Evaluated) -> Evaluated {
        let neg = |m: &QMat| m.scale(&-int(1));
        Evaluated {
            labels: self.labels.clone(),
            re: self.re.iter().zip(&o.re).map(|(a, b)| a.add(&neg(b))).collect(),
            im: self.im.iter().zip(&o.im).map(|(a, b)| a.add(&neg(b))).collect(),
        }
    }
}

pub fn eval_full(p: &TensorPolynomial, data: &CurvatureData) -> Result<Evaluated> {
    let n = data.n;
    let mut labels: Vec<Label> = p.free_labels();
    labels.sort();
    let size = n.pow(labels.len() as u32);
    let mut re = vec![QMat::scalar(Rational::zero()); size];
    let mut im = re.clone();
    for (t, c) in p.iter() {
        let v = eval_term(t, data)?.permuted_to(&labels, n);
        let (target, sign) = match derivative_order(t) % 4 {
            0 => (&mut re, int(1)),
            1 => (&mut im, int(-1)),
            2 => (&mut re, int(-1)),
            _ => (&mut im, int(1)),
        };
        let w = c * sign;
        for (slot, m) in target.iter_mut().zip(&v.data) {
            *slot = slot.add(&m.scale(&w));
        }
    }
    Ok(Evaluated { labels, re, im })
}

/// Exact value of a closed scalar polynomial.
pub fn numeric_eval(p: &TensorPolynomial, data: &CurvatureData) -> Result<Rational> {
    let v = eval_full(p, data)?;
    if !v.labels.is_empty() {
        return Err(Error::Structural("numeric_eval needs a closed polynomial".into()));
    }
    let (re, im) = (&v.re[0], &v.im[0]);
    if !re.is_scalar() {
        return Err(Error::Structural("numeric_eval needs a scalar-valued polynomial".into()));
    }
    if !im.is_zero() {
        return Err(Error::Structural("value is not real; odd derivative order".into()));
    }
    Ok(re.v[0].clone())
}
