use heatcalc::calculus::compose::{all_perms, sym_of};
use heatcalc::calculus::{equal_modulo_identities, Composer, Dir};
use heatcalc::expr::{lo, Atom, Index, Label, TensorPolynomial};
use heatcalc::rational::{int, rat};

fn l(c: char) -> Dir {
    Dir::Lab(Label::letter(c))
}

#[test]
fn commutator_on_section() {
    let cmp = Composer::new(false, 6);
    let a = cmp.plain_nf(&[l('j'), l('k')]).unwrap();
    let b = cmp.plain_nf(&[l('k'), l('j')]).unwrap();
    let expect = TensorPolynomial::from_atoms(int(-1), vec![Atom::sym_deriv(vec![])], vec![Atom::curv(lo('j'), lo('k'))]).unwrap();
    assert_eq!(&a - &b, expect);
}

#[test]
fn commutator_on_one_form() {
    let cmp = Composer::new(false, 6);
    let a = cmp.plain_nf(&[l('i'), l('j'), l('k')]).unwrap();
    let b = cmp.plain_nf(&[l('j'), l('i'), l('k')]).unwrap();
    let mut expect = TensorPolynomial::from_atoms(int(-1), vec![Atom::sym_deriv(vec![lo('k')])], vec![Atom::curv(lo('i'), lo('j'))]).unwrap();
    let p = Label::letter('p');
    expect.add_assign(
        &TensorPolynomial::from_atoms(
            int(1),
            vec![Atom::riemann([Index::up(p), lo('k'), lo('i'), lo('j')]), Atom::sym_deriv(vec![Index::down(p)])],
            vec![Atom::identity()],
        )
        .unwrap(),
    );
    assert!(equal_modulo_identities(&(&a - &b), &expect).unwrap());
}

#[test]
fn symmetrization_is_consistent() {
    let cmp = Composer::new(false, 6);
    for n in 2..=4 {
        let labels: Vec<Dir> = "ijkl".chars().take(n).map(l).collect();
        let perms = all_perms(n);
        let mut acc = TensorPolynomial::zero();
        for p in &perms {
            let s: Vec<Dir> = p.iter().map(|&k| labels[k]).collect();
            acc.add_assign(&cmp.plain_nf(&s).unwrap());
        }
        let acc = acc.scale(&rat(1, perms.len() as i64));
        assert_eq!(acc, sym_of(&labels).unwrap(), "n = {n}");
    }
}
