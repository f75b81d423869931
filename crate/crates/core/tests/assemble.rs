mod common;

use common::refs;
use common::*;
use heatcalc::assemble::{
    contour_integrate, gaussian_moment, heat_invariant, heat_invariant_with, integrate_symbol, trace_reduce,
    CurvaturePolynomial, OperatorSpec, StageOrder,
};
use heatcalc::calculus::equal_modulo_identities;
use heatcalc::expr::TensorPolynomial;
use heatcalc::jetlab::{evaluate_curvature, numeric_eval, BundleJet, MetricJet};
use heatcalc::parametrix::{r4_clusters, Potential, RationalSymbol, Recurrence};
use heatcalc::rho_chi::RhoTable;
use num_traits::Zero;

fn same(got: &CurvaturePolynomial, want: &TensorPolynomial) -> bool {
    equal_modulo_identities(got.poly(), want).unwrap()
}

#[test]
fn residue_weights() {
    let f = sc(r(1, 1), vec![ric("_i_j"), xi("^i"), xi("^j")]);
    for (m, w) in [(1, r(1, 1)), (2, r(-1, 1)), (3, r(1, 2)), (4, r(-1, 6))] {
        let s = RationalSymbol::single(m, f.clone());
        assert_eq!(contour_integrate(&s).unwrap(), f.scale(&w));
    }
}

#[test]
fn gaussian_moments() {
    let one = sc(r(1, 1), vec![]);
    assert_eq!(gaussian_moment(&one).unwrap(), one);

    let odd = sc(r(1, 1), vec![ric("_i_j"), xi("^i"), xi("^j"), xi("^k"), d("_k", scal())]);
    assert!(gaussian_moment(&odd).unwrap().is_zero());

    let c = sc(r(1, 1), vec![ric("_i_j"), xi("^i"), xi("^j")]);
    assert_eq!(gaussian_moment(&c).unwrap(), sc(r(1, 2), vec![scal()]));

    // D_{ijkl}ξ^iξ^jξ^kξ^l ↦ ¾ (g²)^{ijkl} D_{ijkl} with D = R_ij R_kl
    let q = sc(r(1, 1), vec![ric("_i_j"), ric("_k_l"), xi("^i"), xi("^j"), xi("^k"), xi("^l")]);
    let g2 = sum(vec![
        sc(r(1, 3), vec![scal(), scal()]),
        sc(r(2, 3), vec![ric("_p_q"), ric("^p^q")]),
    ]);
    assert_eq!(gaussian_moment(&q).unwrap(), g2.scale(&r(3, 4)));
}

#[test]
fn traces() {
    let spec = OperatorSpec::generic();
    let id = sc(r(3, 1), vec![scal()]);
    assert_eq!(trace_reduce(&id, &spec).unwrap(), num(r(3, 1), vec![scal(), fib()]));

    let lone = en(r(1, 1), vec![xi("^i"), xi("^j")], vec![curv("_i_j")]);
    assert!(trace_reduce(&lone, &spec).unwrap().is_zero());
    let lone2 = en(r(1, 1), vec![ric("^i^k")], vec![d("_k", curv("_i_j")), curv("^j^l")]);
    assert!(!trace_reduce(&lone2, &spec).unwrap().is_zero());

    // symmetric against antisymmetric
    let sym = en(r(1, 1), vec![ric("^i^j")], vec![curv("_i_j"), endo()]);
    assert!(trace_reduce(&sym, &spec).unwrap().is_zero());

    let kept = trace_reduce(&lone, &OperatorSpec::generic_unrestricted()).unwrap();
    assert!(kept.is_zero(), "ξ^iξ^j ℛ_ij vanishes by symmetry alone");
}

#[test]
fn generic_invariants() {
    let spec = OperatorSpec::generic();
    let table = RhoTable::new(6, false);
    let a0 = heat_invariant_with(&table, 0, &spec, StageOrder::TraceFirst).unwrap();
    assert_eq!(a0.poly(), &num(r(1, 1), vec![fib()]));
    let a2 = heat_invariant_with(&table, 2, &spec, StageOrder::TraceFirst).unwrap();
    assert_eq!(a2.poly(), &refs::a2_generic());
    let a4 = heat_invariant_with(&table, 4, &spec, StageOrder::TraceFirst).unwrap();
    assert!(same(&a4, &refs::a4_generic()), "a4 = {}", heatcalc::expr::render::to_text(a4.poly()));

    let other = heat_invariant_with(&table, 4, &spec, StageOrder::MomentFirst).unwrap();
    assert_eq!(other, a4);
    for k in [1, 3] {
        assert!(heat_invariant_with(&table, k, &spec, StageOrder::TraceFirst).unwrap().is_zero());
    }
}

#[test]
fn scalar_laplacian() {
    let spec = OperatorSpec::scalar();
    assert_eq!(heat_invariant(0, &spec).unwrap().poly(), &num(r(1, 1), vec![]));
    assert_eq!(heat_invariant(2, &spec).unwrap().poly(), &num(r(1, 6), vec![scal()]));
    let a4 = heat_invariant(4, &spec).unwrap();
    assert!(same(&a4, &refs::a4_scalar()));
}

#[test]
fn r4_cluster_integrals() {
    let table = RhoTable::new(6, false);
    let spec = OperatorSpec::generic();
    let cl = r4_clusters(&table, Potential::Generic).unwrap();
    let i1 = integrate_symbol(&cl.with_a, &spec, StageOrder::TraceFirst).unwrap();
    let want1 = refs::cluster_with_a();
    assert!(same(&i1, &want1), "r4^1: {}", heatcalc::expr::render::to_text(i1.poly()));

    let i3 = integrate_symbol(&cl.rest, &spec, StageOrder::TraceFirst).unwrap();
    let want3 = refs::cluster_rest();
    assert!(same(&i3, &want3), "r4^3: {}", heatcalc::expr::render::to_text(i3.poly()));

    let i2 = integrate_symbol(&cl.from_r0, &spec, StageOrder::TraceFirst).unwrap();
    let want2 = refs::cluster_from_r0();
    assert!(same(&i2, &want2), "r4^2: {}", heatcalc::expr::render::to_text(i2.poly()));
}

#[test]
fn a4_without_trace_free_curvature() {
    let table = RhoTable::new(6, false);
    let free = heat_invariant_with(&table, 4, &OperatorSpec::generic_unrestricted(), StageOrder::TraceFirst).unwrap();
    let restricted = heat_invariant_with(&table, 4, &OperatorSpec::generic(), StageOrder::TraceFirst).unwrap();
    assert_eq!(free, restricted);

    // raw stage output against the reference on jets whose bundle curvature has a trace
    let mut rec = Recurrence::new(&table, Potential::Generic);
    let raw = contour_integrate(rec.get(4).unwrap()).unwrap();
    let raw = gaussian_moment(&trace_reduce(&raw, &OperatorSpec::generic_unrestricted()).unwrap()).unwrap();
    let mut traced = 0;
    for seed in 0..6 {
        let jet = MetricJet::random(3, 4, 70 + seed);
        let bundle = BundleJet::random_general(3, 2, 3, 70 + seed);
        let c = evaluate_curvature(&jet, 2, Some(&bundle)).unwrap();
        let tr_curv = num(r(1, 1), vec![tr(vec![curv("_a_b")]), tr(vec![curv("^a^b")])]);
        traced += !numeric_eval(&tr_curv, &c).unwrap().is_zero() as usize;
        assert_eq!(numeric_eval(&raw, &c).unwrap(), numeric_eval(&refs::a4_generic(), &c).unwrap(), "seed {seed}");
    }
    assert!(traced > 0, "test jets should carry Tr R != 0");
}
