//! Exact rational helpers shared by every module.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// Binomial coefficient with the convention C(m,k) = 0 when m < 0, k < 0 or m < k.
pub fn binom(m: i64, k: i64) -> i64 {
    if m < 0 || k < 0 || m < k {
        return 0;
    }
    let k = k.min(m - k);
    let mut acc: i64 = 1;
    for i in 0..k {
        acc = acc * (m - i) / (i + 1);
    }
    acc
}

pub fn factorial(n: usize) -> Rational {
    let mut acc = BigInt::one();
    for i in 2..=n {
        acc *= BigInt::from(i);
    }
    BigRational::from_integer(acc)
}

/// Formats as "p/q", or "p" when the denominator is 1.
pub fn fmt_rat(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rat(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                None
            } else {
                Some(BigRational::new(p, q))
            }
        }
        None => s.parse::<BigInt>().ok().map(BigRational::from_integer),
    }
}

pub fn is_negative(r: &Rational) -> bool {
    r.is_negative()
}

/// Exact solve of a possibly overdetermined system `rows · x = rhs`; `None` when
/// the columns are dependent or the system is inconsistent.
pub fn solve(rows: &[Vec<Rational>], rhs: &[Rational]) -> Option<Vec<Rational>> {
    let m = rows.len();
    let k = rows.first().map_or(0, Vec::len);
    let mut a: Vec<Vec<Rational>> =
        rows.iter().zip(rhs).map(|(r, b)| r.iter().cloned().chain(std::iter::once(b.clone())).collect()).collect();
    let mut row = 0;
    for col in 0..k {
        let Some(p) = (row..m).find(|&i| !a[i][col].is_zero()) else {
            return None;
        };
        a.swap(row, p);
        let inv = Rational::one() / &a[row][col];
        for v in a[row].iter_mut() {
            *v *= &inv;
        }
        for i in 0..m {
            if i != row && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                for j in col..=k {
                    let s = &a[row][j] * &f;
                    a[i][j] -= s;
                }
            }
        }
        row += 1;
    }
    if a[row..].iter().any(|r| !r[k].is_zero()) {
        return None;
    }
    Some((0..k).map(|c| a[c][k].clone()).collect())
}

/// Inverse of a square matrix, `None` when singular.
pub fn inverse(m: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let e: Vec<Rational> = (0..n).map(|i| if i == j { Rational::one() } else { Rational::zero() }).collect();
        cols.push(solve(m, &e)?);
    }
    Some((0..n).map(|i| (0..n).map(|j| cols[j][i].clone()).collect()).collect())
}
