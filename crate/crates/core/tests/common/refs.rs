//! Published reference values, written in the (−i∇) prefix convention.
#![allow(dead_code)]

use heatcalc::expr::{Atom, TensorPolynomial};

use super::*;

pub fn rho_j_kl() -> TensorPolynomial {
    sum(vec![
        sc(r(-1, 3), vec![riem("^p_k_l_j"), xi("_p")]),
        sc(r(-1, 3), vec![riem("^p_l_k_j"), xi("_p")]),
        en(r(-1, 6), vec![], vec![d("_k", curv("_j_l"))]),
        en(r(-1, 6), vec![], vec![d("_l", curv("_j_k"))]),
    ])
}

pub fn rho_jk_l() -> TensorPolynomial {
    sum(vec![
        sc(r(-1, 6), vec![riem("^p_j_l_k"), xi("_p")]),
        sc(r(-1, 6), vec![riem("^p_k_l_j"), xi("_p")]),
        en(r(-1, 3), vec![], vec![d("_j", curv("_k_l"))]),
        en(r(-1, 3), vec![], vec![d("_k", curv("_j_l"))]),
    ])
}

pub fn rho_j_klm() -> TensorPolynomial {
    let inner = sum(vec![
        sc(r(2, 1), vec![d("_k", riem("^p_l_j_m")), xi("_p")]),
        en(r(-1, 1), vec![], vec![d("_k_l", curv("_j_m"))]),
        en(r(1, 1), vec![riem("^p_k_l_j")], vec![curv("_m_p")]),
    ]);
    sigma("klm", &inner).scale(&r(1, 4))
}

pub fn rho_jkl_m() -> TensorPolynomial {
    let inner = sum(vec![
        sc(r(2, 1), vec![d("_j", riem("^p_k_l_m")), xi("_p")]),
        en(r(-3, 1), vec![], vec![d("_j_k", curv("_l_m"))]),
        en(r(-1, 1), vec![riem("^p_j_k_m")], vec![curv("_l_p")]),
    ]);
    sigma("jkl", &inner).scale(&r(1, 4))
}

pub fn rho_jk_lm() -> TensorPolynomial {
    let inner = sum(vec![
        sc(r(5, 1), vec![d("_j", riem("^p_l_k_m")), xi("_p")]),
        sc(r(1, 1), vec![d("_l", riem("^p_j_k_m")), xi("_p")]),
        en(r(-3, 1), vec![], vec![d("_j_l", curv("_k_m"))]),
        en(r(2, 1), vec![riem("^p_l_m_j")], vec![curv("_k_p")]),
        en(r(1, 1), vec![riem("^p_j_k_l")], vec![curv("_p_m")]),
        en(r(3, 1), vec![], vec![curv("_j_l"), curv("_k_m")]),
    ]);
    sigma("lm", &sigma("jk", &inner)).scale(&r(1, 6))
}

/// ρ_{⟨ijk⟩,⟨lm⟩} with ℛ = 0 (plain ∇∇ = −(−i∇)(−i∇)).
pub fn rho_ijk_lm_flat() -> TensorPolynomial {
    let inner = sum(vec![
        sc(r(-27, 1), vec![d("_i_j", riem("^p_l_k_m")), xi("_p")]),
        sc(r(-7, 1), vec![d("_i_l", riem("^p_j_k_m")), xi("_p")]),
        sc(r(-2, 1), vec![d("_l_i", riem("^p_j_k_m")), xi("_p")]),
        sc(r(-4, 1), vec![riem("^q_i_j_l"), riem("^p_q_k_m"), xi("_p")]),
        sc(r(-12, 1), vec![riem("^q_i_j_l"), riem("^p_m_k_q"), xi("_p")]),
        sc(r(-16, 1), vec![riem("^q_l_i_m"), riem("^p_j_k_q"), xi("_p")]),
    ]);
    sigma("lm", &sigma("ijk", &inner)).scale(&r(-1, 30))
}

/// ρ_{⟨ijkl⟩,⟨m⟩} with ℛ = 0.
pub fn rho_ijkl_m_flat() -> TensorPolynomial {
    let inner = sum(vec![
        sc(r(9, 1), vec![d("_i_j", riem("^p_k_l_m")), xi("_p")]),
        sc(r(7, 1), vec![riem("^q_i_j_m"), riem("^p_k_l_q"), xi("_p")]),
    ]);
    sigma("ijkl", &inner).scale(&r(1, 15))
}

/// ξ-quadratic part of ρ_{⟨ijkl⟩,⟨pq⟩}.
pub fn rho_ijkl_pq_quadratic() -> TensorPolynomial {
    let inner = sc(r(1, 1), vec![riem("^r_i_j_p"), riem("^s_k_l_q"), xi("_r"), xi("_s")]);
    sigma("pq", &sigma("ijkl", &inner)).scale(&r(2, 3))
}

pub fn chi1_i() -> TensorPolynomial {
    sum(vec![sc(r(2, 3), vec![ric("_i_p"), xi("^p")]), en(r(-1, 1), vec![xi("^p")], vec![curv("_i_p")])])
}

/// ℛ-quadratic part of χ^{(0)}_{⟨ij⟩}.
pub fn chi0_ij_quadratic() -> TensorPolynomial {
    sum(vec![
        en(r(1, 4), vec![g("^p^q")], vec![curv("_i_p"), curv("_j_q")]),
        en(r(1, 4), vec![g("^p^q")], vec![curv("_j_p"), curv("_i_q")]),
    ])
}

pub fn chi2_ij() -> TensorPolynomial {
    sc(r(-2, 3), vec![riem("_i_p_j_q"), xi("^p"), xi("^q")])
}

/// χ^{(1)}_{⟨ijk⟩} up to ℛ-linear terms.
pub fn chi1_ijk() -> TensorPolynomial {
    let inner = sum(vec![
        sc(r(-27, 1), vec![d("_i_j", ric("_k_p"))]),
        sc(r(-7, 1), vec![d("_i^q", riem("_p_j_k_q"))]),
        sc(r(-2, 1), vec![d("^q_i", riem("_p_j_k_q"))]),
        sc(r(-4, 1), vec![riem("^q_i_j^r"), riem("_p_q_k_r")]),
        sc(r(-12, 1), vec![riem("^q_i_j^r"), riem("_p_r_k_q")]),
        sc(r(-16, 1), vec![ric("^q_i"), riem("_p_j_k_q")]),
    ]);
    let inner = &inner * &num(r(1, 1), vec![xi("^p")]);
    sigma("ijk", &inner).scale(&r(-1, 30))
}

/// χ^{(2)}_{⟨ijkl⟩} up to ℛ-linear terms.
pub fn chi2_ijkl() -> TensorPolynomial {
    let inner = sum(vec![
        sc(r(-3, 1), vec![d("_i_j", riem("_k_p_l_q"))]),
        sc(r(4, 1), vec![riem("_p_i_j_r"), riem("^r_k_l_q")]),
    ]);
    let inner = &inner * &num(r(1, 1), vec![xi("^p"), xi("^q")]);
    sigma("ijkl", &inner).scale(&r(2, 5))
}

fn lap_s() -> Atom {
    d("^p_p", scal())
}

fn ric2() -> Vec<Atom> {
    vec![ric("_p_q"), ric("^p^q")]
}

fn riem2() -> Vec<Atom> {
    vec![riem("_p_q_r_s"), riem("^p^q^r^s")]
}

fn with(mut head: Vec<Atom>, tail: Vec<Atom>) -> Vec<Atom> {
    head.extend(tail);
    head
}

pub fn a2_generic() -> TensorPolynomial {
    sum(vec![num(r(1, 6), vec![fib(), scal()]), num(r(-1, 1), vec![tr(vec![endo()])])])
}

/// a_4 of −∇^p∇_p + A; the D-form of −2∇^p∇_pA is +2D^pD_pA.
pub fn a4_generic() -> TensorPolynomial {
    sum(vec![
        num(r(-12, 360), vec![fib(), lap_s()]),
        num(r(5, 360), vec![fib(), scal(), scal()]),
        num(r(-2, 360), with(vec![fib()], ric2())),
        num(r(2, 360), with(vec![fib()], riem2())),
        num(r(1, 12), vec![tr(vec![curv("_i_j"), curv("^i^j")])]),
        num(r(2, 12), vec![tr(vec![d("^p_p", endo())])]),
        num(r(6, 12), vec![tr(vec![endo(), endo()])]),
        num(r(-2, 12), vec![scal(), tr(vec![endo()])]),
    ])
}

pub fn a4_scalar() -> TensorPolynomial {
    sum(vec![
        num(r(-12, 360), vec![lap_s()]),
        num(r(5, 360), vec![scal(), scal()]),
        num(r(-2, 360), ric2()),
        num(r(2, 360), riem2()),
    ])
}

/// Integral of the cluster of r_4 that carries A.
pub fn cluster_with_a() -> TensorPolynomial {
    sum(vec![
        num(r(1, 6), vec![tr(vec![d("^p_p", endo())])]),
        num(r(1, 2), vec![tr(vec![endo(), endo()])]),
        num(r(-1, 6), vec![scal(), tr(vec![endo()])]),
    ])
}

/// Integral of the curvature-only cluster of r_4 built from r_0 and χ.
pub fn cluster_from_r0() -> TensorPolynomial {
    sum(vec![
        num(r(-18, 540), vec![fib(), lap_s()]),
        num(r(2, 540), with(vec![fib()], ric2())),
        num(r(3, 540), with(vec![fib()], riem2())),
        num(r(1, 12), vec![tr(vec![curv("_i_j"), curv("^i^j")])]),
    ])
}

/// Integral of the remaining cluster of r_4.
pub fn cluster_rest() -> TensorPolynomial {
    sum(vec![num(r(3, 216), vec![fib(), scal(), scal()]), num(r(-2, 216), with(vec![fib()], ric2()))])
}
