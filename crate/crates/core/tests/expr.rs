use heatcalc::expr::serial::{from_json, to_json};
use heatcalc::expr::render::{to_latex, to_text};
use heatcalc::expr::*;
use heatcalc::rational::{int, rat};

#[test]
fn riemann_first_pair_antisymmetry() {
    let p = mono(int(1), vec![Atom::riemann([lo('j'), lo('i'), lo('k'), lo('l')])], vec![]);
    let q = mono(int(-1), vec![Atom::riemann([lo('i'), lo('j'), lo('k'), lo('l')])], vec![]);
    assert_eq!(p, q);
}

#[test]
fn curvature_against_symmetric_momenta_vanishes() {
    let p = mono(
        int(1),
        vec![Atom::momentum(hi('i')), Atom::momentum(hi('j'))],
        vec![Atom::curv(lo('i'), lo('j'))],
    );
    assert!(p.is_zero());
    let q = mono(
        int(1),
        vec![
            Atom::riemann([lo('i'), lo('k'), lo('j'), lo('l')]),
            Atom::momentum(hi('i')),
            Atom::momentum(hi('j')),
            Atom::momentum(hi('k')),
            Atom::momentum(hi('l')),
        ],
        vec![],
    );
    assert!(q.is_zero());
}

#[test]
fn dummy_renaming_is_invisible() {
    let a = mono(
        int(3),
        vec![Atom::riemann([lo('a'), lo('b'), lo('c'), lo('d')]), Atom::riemann([hi('a'), hi('c'), hi('b'), hi('d')])],
        vec![],
    );
    let b = mono(
        int(3),
        vec![Atom::riemann([lo('x'), lo('y'), lo('z'), lo('w')]), Atom::riemann([hi('x'), hi('z'), hi('y'), hi('w')])],
        vec![],
    );
    assert_eq!(a, b);
    let c = mono(
        int(3),
        vec![Atom::riemann([hi('q'), hi('p'), hi('s'), hi('r')]), Atom::riemann([lo('p'), lo('s'), lo('q'), lo('r')])],
        vec![],
    );
    // R_{qpsr}R^{psqr} is R_{abcd}R^{bcad} = -R_{abcd}R^{acbd} after swapping a and b.
    assert_eq!(a, -&c);
}

#[test]
fn metric_contractions() {
    let n = mono(int(1), vec![Atom::metric(hi('i'), hi('j')), Atom::metric(lo('i'), lo('j'))], vec![]);
    assert_eq!(n, mono(int(1), vec![Atom::dim()], vec![]));
    let s = mono(int(1), vec![Atom::metric(hi('i'), hi('j')), Atom::ricci(lo('i'), lo('j'))], vec![]);
    assert_eq!(s, mono(int(1), vec![Atom::scalar()], vec![]));
    let r = mono(int(1), vec![Atom::riemann([lo('p'), lo('i'), hi('p'), lo('j')])], vec![]);
    assert_eq!(r, mono(int(1), vec![Atom::ricci(lo('i'), lo('j'))], vec![]));
}

#[test]
fn chain_order_is_kept() {
    let a = mono(int(1), vec![], vec![Atom::endo_a()]);
    let aa = &a * &a;
    let t = aa.monomials();
    assert_eq!(t.len(), 1);
    assert_eq!(t[0].term.chain.len(), 2);
    let f = mono(int(1), vec![], vec![Atom::curv(lo('i'), lo('j'))]);
    assert_ne!(&f * &a, &a * &f);
    let id = TensorPolynomial::identity();
    assert_eq!(&id * &a, a);
    assert_eq!(&a + &TensorPolynomial::zero(), a);
}

#[test]
fn free_mismatch_is_reported() {
    let a = mono(int(1), vec![Atom::momentum(lo('i'))], vec![]);
    let b = mono(int(1), vec![Atom::momentum(lo('j'))], vec![]);
    assert!(a.try_add(&b).is_err());
}

#[test]
fn unbalanced_index_is_reported() {
    let bad = TensorPolynomial::from_atoms(
        int(1),
        vec![Atom::momentum(lo('i')), Atom::momentum(lo('i')), Atom::momentum(lo('i'))],
        vec![],
    );
    assert!(matches!(bad, Err(heatcalc::Error::IndexBalance { .. })));
}

#[test]
fn json_round_trip() {
    let p = &mono(
        rat(-1, 6),
        vec![Atom::riemann([hi('p'), lo('j'), lo('l'), lo('k')]), Atom::momentum(lo('p'))],
        vec![Atom::identity()],
    ) + &mono(rat(-1, 3), vec![], vec![Atom::curv(lo('k'), lo('l')).with_prefix(vec![lo('j')])]);
    let s = to_json(&p);
    let back = from_json(&s).unwrap();
    assert_eq!(back, p);
    assert_eq!(to_json(&back), s);
}

#[test]
fn renderers() {
    let s = mono(rat(1, 6), vec![Atom::scalar()], vec![]);
    assert_eq!(to_text(&s), "S/6");
    let f = mono(rat(-1, 2), vec![], vec![Atom::curv(lo('j'), lo('k'))]);
    assert_eq!(to_latex(&f), "-\\frac{1}{2} \\mathcal{R}_{jk}");
}
