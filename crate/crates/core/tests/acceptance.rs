//! Acceptance report: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary so the report is always printed. The process fails
//! when a blocking check fails; the stretch criterion and checks listed as
//! known failures are reported but do not change the exit status.

mod common;

use std::time::{Duration, Instant};

use common::refs;
use common::*;
use heatcalc::assemble::{
    contour_integrate, gaussian_moment, heat_invariant, heat_invariant_with, integrate_symbol, required_bound,
    trace_reduce, with_fiber_dim, OperatorSpec, StageOrder,
};
use heatcalc::calculus::identities::relations_of;
use heatcalc::calculus::{equal_modulo_identities, simplify_identities};
use heatcalc::expr::canon::Term;
use heatcalc::expr::{Kind, TensorPolynomial};
use heatcalc::hodge::*;
use heatcalc::jetlab::{eval_full, evaluate_curvature, numeric_eval, BundleJet, CurvatureData, MetricJet};
use heatcalc::parametrix::{has_parity, r4_clusters, Potential, RationalSymbol, Recurrence};
use heatcalc::rational::int;
use heatcalc::rho_chi::{drop_linear_curv, xi_part, RhoTable};
use heatcalc::Rational;

struct Criterion {
    name: &'static str,
    checks: Vec<(String, bool)>,
    /// Checks that cannot hold under the conventions in use; reported, not enforced.
    known: Vec<(String, bool, &'static str)>,
    notes: Vec<String>,
}

impl Criterion {
    fn new(name: &'static str) -> Criterion {
        Criterion { name, checks: vec![], known: vec![], notes: vec![] }
    }

    fn check(&mut self, what: impl Into<String>, ok: heatcalc::Result<bool>) {
        let what = what.into();
        match ok {
            Ok(ok) => self.checks.push((what, ok)),
            Err(e) => self.checks.push((format!("{what} [error: {e}]"), false)),
        }
    }

    fn known_failure(&mut self, what: impl Into<String>, ok: bool, why: &'static str) {
        self.known.push((what.into(), ok, why));
    }

    fn timed<T>(&mut self, f: impl FnOnce(&mut Criterion) -> T) -> (T, Duration) {
        let t = Instant::now();
        let v = f(self);
        (v, t.elapsed())
    }

    fn blocking_ok(&self) -> bool {
        self.checks.iter().all(|(_, ok)| *ok)
    }

    fn all_ok(&self) -> bool {
        self.blocking_ok() && self.known.iter().all(|(_, ok, _)| *ok)
    }

    fn report(&self, n: usize) {
        let passed = self.checks.iter().filter(|(_, ok)| *ok).count();
        let status = if self.all_ok() { "PASS" } else { "FAIL" };
        let mut line = format!("criterion {n} [{}]: {status} ({passed}/{} checks", self.name, self.checks.len());
        for note in &self.notes {
            line.push_str(&format!(", {note}"));
        }
        line.push(')');
        for (what, ok) in &self.checks {
            if !ok {
                line.push_str(&format!("; failed: {what}"));
            }
        }
        for (what, ok, why) in &self.known {
            if !ok {
                line.push_str(&format!("; known failure: {what} ({why})"));
            }
        }
        println!("{line}");
    }
}

fn equiv(a: &TensorPolynomial, b: &TensorPolynomial) -> heatcalc::Result<bool> {
    equal_modulo_identities(a, b)
}

fn secs(d: Duration) -> String {
    format!("{:.1}s", d.as_secs_f64())
}

fn rho_regression() -> Criterion {
    let mut c = Criterion::new("rho regression");
    let (_, took) = c.timed(|c| {
        let t = RhoTable::new(6, false);
        let rho = |a: &str, b: &str| t.compute_rho(&mi(a), &mi(b));
        c.check("rho(,) = I", rho("", "").map(|p| p == TensorPolynomial::identity()));
        for s in ["j", "jk", "jkl"] {
            c.check(format!("rho({s},) = 0"), rho(s, "").map(|p| p.is_zero()));
            c.check(format!("rho(,{s}) = 0"), rho("", s).map(|p| p.is_zero()));
        }
        c.check("rho(j,k)", rho("j", "k").map(|p| p == en(r(-1, 2), vec![], vec![curv("_j_k")])));
        let exact: [(&str, &str, fn() -> TensorPolynomial); 5] = [
            ("j", "kl", refs::rho_j_kl),
            ("jk", "l", refs::rho_jk_l),
            ("j", "klm", refs::rho_j_klm),
            ("jkl", "m", refs::rho_jkl_m),
            ("jk", "lm", refs::rho_jk_lm),
        ];
        for (a, b, want) in exact {
            c.check(format!("rho({a},{b})"), rho(a, b).and_then(|p| equiv(&p, &want())));
        }
        let no_curv = |p: &TensorPolynomial| p.filter(|m| m.count_kind(Kind::BundleCurv) == 0);
        let fifth: [(&str, &str, fn() -> TensorPolynomial); 2] =
            [("ijk", "lm", refs::rho_ijk_lm_flat), ("ijkl", "m", refs::rho_ijkl_m_flat)];
        for (a, b, want) in fifth {
            c.check(format!("rho({a},{b}) at curvature-free bundle"), rho(a, b).and_then(|p| equiv(&no_curv(&p), &want())));
            c.check(
                format!("rho({a},{b}) xi-linear part modulo bundle-curvature-linear terms"),
                rho(a, b).and_then(|p| equiv(&drop_linear_curv(&xi_part(&p, 1)), &want())),
            );
        }
        c.check(
            "rho(ijkl,pq) xi-quadratic part at curvature-free bundle",
            t.rho_parts(&mi("ijkl"), &mi("pq")).and_then(|p| equiv(&no_curv(&p[2]), &refs::rho_ijkl_pq_quadratic())),
        );
    });
    c.checks.push((format!("runtime {} < 60s", secs(took)), took < Duration::from_secs(60)));
    c.notes.push(secs(took));
    c
}

fn chi_regression() -> Criterion {
    let mut c = Criterion::new("chi regression");
    let t = RhoTable::new(6, false);
    let chi = |s: &str| t.compute_chi(&mi(s));
    c.check("chi(,) = 0", chi("").map(|v| v.iter().all(|p| p.is_zero())));
    c.check(
        "chi(i)",
        chi("i").and_then(|v| {
            Ok(drop_linear_curv(&v[0]).is_zero() && equiv(&v[1], &refs::chi1_i())? && v[2].is_zero())
        }),
    );
    c.check(
        "chi0(ij) modulo bundle-curvature-linear terms",
        chi("ij").and_then(|v| equiv(&drop_linear_curv(&v[0]), &refs::chi0_ij_quadratic())),
    );
    c.check("chi2(ij)", chi("ij").and_then(|v| equiv(&v[2], &refs::chi2_ij())));
    c.check(
        "chi1(ijk) modulo bundle-curvature-linear terms",
        chi("ijk").and_then(|v| equiv(&drop_linear_curv(&v[1]), &refs::chi1_ijk())),
    );
    c.check(
        "chi2(ijkl) modulo bundle-curvature-linear terms",
        chi("ijkl").and_then(|v| equiv(&drop_linear_curv(&v[2]), &refs::chi2_ijkl())),
    );
    c
}

fn parametrix() -> Criterion {
    let mut c = Criterion::new("parametrix");
    let table = RhoTable::new(8, false);
    let mut rec = Recurrence::new(&table, Potential::Generic);
    let r0 = RationalSymbol::single(1, TensorPolynomial::identity());
    c.check("r0 = I/(lambda - |xi|^2)", rec.get(0).map(|s| s == &r0));
    c.check("r1 = 0", rec.get(1).map(|s| s.is_zero()));
    let mut r2 = RationalSymbol::single(2, en(r(1, 1), vec![], vec![heatcalc::expr::Atom::endo_a()]));
    r2.add_part(3, &sc(r(2, 3), vec![ric("_i_j"), xi("^i"), xi("^j")]));
    c.check("r2", rec.get(2).map(|s| s == &r2));
    let (_, took) = c.timed(|c| {
        for k in 0..=6 {
            c.check(format!("parity of r{k}"), rec.get(k).map(|s| has_parity(s, k)));
        }
    });
    c.notes.push(format!("parity through r6 in {}", secs(took)));
    c
}

fn invariants() -> Criterion {
    let mut c = Criterion::new("generic invariants");
    let spec = OperatorSpec::generic();
    let (_, took) = c.timed(|c| {
        let table = RhoTable::new(required_bound(4), false);
        let a = |k| heat_invariant_with(&table, k, &spec, StageOrder::TraceFirst);
        c.check("a0 = d", a(0).map(|p| p.poly() == &num(r(1, 1), vec![fib()])));
        c.check("a2 = d S/6 - Tr A", a(2).map(|p| p.poly() == &refs::a2_generic()));
        c.check(
            "a4 term-for-term after simplification",
            a(4).and_then(|p| Ok(p.poly() == &simplify_identities(&refs::a4_generic())?)),
        );
        c.check("a1 = a3 = 0", a(1).and_then(|x| Ok(x.is_zero() && a(3)?.is_zero())));
        match r4_clusters(&table, Potential::Generic) {
            Ok(cl) => {
                let parts = [
                    ("cluster carrying A", &cl.with_a, refs::cluster_with_a()),
                    ("cluster from r0", &cl.from_r0, refs::cluster_from_r0()),
                    ("remaining cluster", &cl.rest, refs::cluster_rest()),
                ];
                for (what, s, want) in parts {
                    c.check(what, integrate_symbol(s, &spec, StageOrder::TraceFirst).and_then(|p| equiv(p.poly(), &want)));
                }
            }
            Err(e) => c.check("r4 clusters", Err(e)),
        }
    });
    c.checks.push((format!("runtime {} < 300s", secs(took)), took < Duration::from_secs(300)));
    c.notes.push(secs(took));
    c
}

fn scalar() -> Criterion {
    let mut c = Criterion::new("scalar Laplacian");
    let spec = OperatorSpec::scalar();
    c.check("a0 = 1", heat_invariant(0, &spec).map(|p| p.poly() == &num(r(1, 1), vec![])));
    c.check("a2 = S/6", heat_invariant(2, &spec).map(|p| p.poly() == &num(r(1, 6), vec![scal()])));
    c.check(
        "a4 = (-12 DS + 5 S^2 - 2 |Ric|^2 + 2 |R|^2)/360",
        heat_invariant(4, &spec).and_then(|p| Ok(p.poly() == &simplify_identities(&refs::a4_scalar())?)),
    );
    c
}

fn sample(n: usize, seed: u64) -> CurvatureData {
    evaluate_curvature(&MetricJet::random(n, 2, seed), 0, None).unwrap()
}

fn hodge() -> Criterion {
    let mut c = Criterion::new("Hodge Laplacian");
    let mut fits = 0;
    let mut grid = std::collections::BTreeMap::new();
    for n in 4..=6 {
        let samples: Vec<CurvatureData> = (0..5).map(|s| sample(n, 300 + 10 * n as u64 + s)).collect();
        for nu in 0..=n {
            match fit_trace_invariants(n, nu, &samples) {
                Ok(fit) => {
                    fits += (fit == trace_closed_form(n, nu)) as usize;
                    grid.insert((n, nu), fit);
                }
                Err(e) => c.check(format!("fit ({n},{nu})"), Err(e)),
            }
        }
    }
    c.checks.push((format!("trace fits {fits}/18 match closed form"), fits == 18));

    let mut pascal = true;
    for n in 4..=5 {
        for nu in 1..=n {
            if let (Some(lo), Some(prev), Some(hi)) = (grid.get(&(n, nu)), grid.get(&(n, nu - 1)), grid.get(&(n + 1, nu))) {
                pascal &= hi.tr_a == &lo.tr_a + &prev.tr_a;
                pascal &= (0..3).all(|i| hi.tr_a2[i] == &lo.tr_a2[i] + &prev.tr_a2[i]);
                pascal &= (0..3).all(|i| hi.tr_rr[i] == &lo.tr_rr[i] + &prev.tr_rr[i]);
            } else {
                pascal = false;
            }
        }
    }
    c.checks.push(("Pascal recurrence on the fitted grid".into(), pascal));

    let basis = FormBasis::new(4, 2);
    let mut good = 0;
    for seed in 0..20 {
        let d = sample(4, 1000 + seed);
        let (b, cm, a) = (build_b(&basis, &d), build_c(&basis, &d), build_a_nu(4, 2, &d));
        let inv = InvariantVector::of(&d);
        let ok = a == b.add(&cm.scale(&int(-2)))
            && a.mul(&a).trace() == b.norm2() + int(4) * cm.norm2() - int(4) * b.mul(&cm).trace()
            && b.norm2() == int(2) * &inv.ric2 + &inv.s2
            && b.mul(&cm).trace() == inv.ric2
            && cm.norm2() == &inv.riem2 * r(1, 4);
        good += ok as usize;
    }
    c.checks.push((format!("(4,2) decomposition on {good}/20 jets"), good == 20));

    let table = RhoTable::new(6, false);
    let generic = OperatorSpec::generic();
    let inv: Vec<_> = [0, 2, 4].iter().map(|&k| heat_invariant_with(&table, k, &generic, StageOrder::TraceFirst)).collect();
    match (inv.into_iter().collect::<heatcalc::Result<Vec<_>>>(), basis_invariants()) {
        (Ok(inv), Ok([s, lap, s2, ric2, riem2])) => {
            let inv: [_; 3] = inv.try_into().unwrap();
            let mut agree = 0;
            let mut total = 0;
            for n in 1..=6 {
                for nu in 0..=n {
                    total += 1;
                    let want = patodi_closed_form(n, nu);
                    let via_inv = patodi_from_invariants(&inv, n, nu).map(|p| p == want);
                    let via_pipe = OperatorSpec::hodge(n, nu).and_then(|spec| {
                        let a0 = heat_invariant_with(&table, 0, &spec, StageOrder::MomentFirst)?;
                        let a2 = heat_invariant_with(&table, 2, &spec, StageOrder::MomentFirst)?;
                        let a4 = heat_invariant_with(&table, 4, &spec, StageOrder::MomentFirst)?;
                        let c4 = coordinates(a4.poly(), &[lap.clone(), s2.clone(), ric2.clone(), riem2.clone()])?;
                        let c4: Vec<Rational> = c4.iter().map(|x| x * int(360)).collect();
                        Ok(a0.poly() == &TensorPolynomial::constant(want.a0.clone())
                            && coordinates(a2.poly(), &[s.clone()])? == vec![want.a2.clone()]
                            && c4 == want.c.to_vec())
                    });
                    agree += (matches!(via_inv, Ok(true)) && matches!(via_pipe, Ok(true))) as usize;
                }
            }
            c.checks.push((format!("closed form vs pipeline {agree}/{total} (n <= 6)"), agree == total));
        }
        (Err(e), _) | (_, Err(e)) => c.check("closed form vs pipeline", Err(e)),
    }
    c
}

fn random_data(n: usize, order: usize, seed: u64, bundle: bool) -> CurvatureData {
    let jet = MetricJet::random(n, order + 2, seed);
    let b = bundle.then(|| BundleJet::random(n, 2, order + 1, seed));
    evaluate_curvature(&jet, order, b.as_ref()).unwrap()
}

fn oracles() -> Criterion {
    let mut c = Criterion::new("oracle properties");
    let table = RhoTable::new(6, false);
    let mut rec = Recurrence::new(&table, Potential::Generic);
    let spec = OperatorSpec::generic_unrestricted();
    let mut stages = Vec::new();
    for k in [2, 4] {
        let p = rec
            .get(k)
            .and_then(contour_integrate)
            .and_then(|f| trace_reduce(&f, &spec))
            .and_then(|f| gaussian_moment(&f));
        match p {
            Ok(p) => stages.push(p),
            Err(e) => c.check(format!("stage k = {k}"), Err(e)),
        }
    }
    let simplified: Vec<TensorPolynomial> = stages.iter().filter_map(|p| simplify_identities(p).ok()).collect();
    let mut relations = Vec::new();
    for p in &stages {
        for (t, _) in p.iter() {
            relations.extend(relations_of(t).unwrap_or_default());
        }
    }
    let mut preserved = 0;
    let mut rules = 0;
    for seed in 0..20 {
        let d = random_data(3 + seed as usize % 2, 2, 500 + seed, true);
        let same = stages.len() == simplified.len()
            && stages.iter().zip(&simplified).all(|(p, s)| {
                matches!((numeric_eval(p, &d), numeric_eval(s, &d)), (Ok(x), Ok(y)) if x == y)
            });
        preserved += same as usize;
        rules += relations.iter().all(|rel| matches!(eval_full(rel, &d), Ok(v) if v.is_zero())) as usize;
    }
    c.checks.push((format!("simplification value-preserving on {preserved}/20 jets"), preserved == 20));
    c.checks.push((format!("all {} rewrite relations vanish on {rules}/20 jets", relations.len()), rules == 20));

    let contracted = sum(vec![num(r(1, 1), vec![d("^i^j", ric("_i_j"))]), num(r(-1, 2), vec![d("^p_p", scal())])]);
    let pair = sum(vec![
        num(r(1, 1), vec![riem("_i_j_k_l"), riem("^i^k^j^l")]),
        num(r(-1, 2), vec![riem("_i_j_k_l"), riem("^i^j^k^l")]),
    ]);
    let (mut cb, mut pi) = (0, 0);
    for seed in 0..20 {
        let d = random_data(3 + seed as usize % 2, 2, 100 + seed, false);
        cb += matches!(numeric_eval(&contracted, &d), Ok(v) if v == Rational::from_integer(0.into())) as usize;
        pi += matches!(numeric_eval(&pair, &d), Ok(v) if v == Rational::from_integer(0.into())) as usize;
    }
    c.checks.push((format!("contracted Bianchi identity exact on {cb}/20 jets"), cb == 20));
    c.checks.push((format!("pair identity exact on {pi}/20 jets"), pi == 20));

    let sphere = evaluate_curvature(&MetricJet::constant_curvature(2, r(1, 1), 4), 0, None).unwrap();
    let s = sphere.scalar_curvature();
    c.checks.push((format!("unit 2-sphere S = {s} (sectional curvature 1, S = n(n-1))"), s == r(2, 1)));
    c.known_failure(
        format!("unit 2-sphere S = +1, got {s}"),
        s == r(1, 1),
        "with Ric_ij = R^p_ipj and K = 1 the scalar curvature of the unit 2-sphere is 2",
    );
    c
}

fn weight(t: &Term) -> usize {
    t.scalars
        .iter()
        .chain(&t.chain)
        .map(|a| {
            a.prefix.len()
                + match a.kind {
                    Kind::Riemann | Kind::Ricci | Kind::Scalar | Kind::BundleCurv => 2,
                    _ => 0,
                }
        })
        .sum()
}

fn stretch() -> Criterion {
    let mut c = Criterion::new("stretch: scalar a6");
    let spec = OperatorSpec::scalar();
    let (res, took) = c.timed(|_| {
        let table = RhoTable::new(required_bound(6), true);
        let mut rec = Recurrence::new(&table, Potential::Zero);
        let r6 = rec.get(6)?.clone();
        let raw = with_fiber_dim(&gaussian_moment(&trace_reduce(&contour_integrate(&r6)?, &spec)?)?, 1)?;
        let a6 = integrate_symbol(&r6, &spec, StageOrder::TraceFirst)?;
        Ok::<_, heatcalc::Error>((raw, a6))
    });
    c.notes.push(format!("pipeline {}", secs(took)));
    match res {
        Ok((raw, a6)) => {
            c.notes.push(format!("{} terms", a6.poly().len()));
            c.checks.push(("fully contracted".into(), a6.poly().free_indices().is_empty()));
            c.checks.push(("homogeneous of degree 6".into(), a6.poly().iter().all(|(t, _)| weight(t) == 6)));
            let mut stable = 0;
            for seed in 0..3 {
                let d = evaluate_curvature(&MetricJet::random(3, 6, 800 + seed), 4, None).unwrap();
                stable += matches!((numeric_eval(&raw, &d), numeric_eval(a6.poly(), &d)), (Ok(x), Ok(y)) if x == y) as usize;
            }
            c.checks.push((format!("value-stable under simplification on {stable}/3 jets"), stable == 3));
        }
        Err(e) => c.check("k = 6 pipeline", Err(e)),
    }
    c
}

fn main() {
    let blocking: [fn() -> Criterion; 7] = [rho_regression, chi_regression, parametrix, invariants, scalar, hodge, oracles];
    let mut ok = true;
    for (i, f) in blocking.iter().enumerate() {
        let c = f();
        c.report(i + 1);
        ok &= c.blocking_ok();
    }
    stretch().report(8);
    println!("acceptance: {}", if ok { "all blocking checks pass" } else { "blocking failures" });
    if !ok {
        std::process::exit(1);
    }
}
