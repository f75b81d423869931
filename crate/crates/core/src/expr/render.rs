//! LaTeX and plain-text renderers.
//!
//! Prefixes are stored as (−i∇). A monomial with an even number of them is shown
//! with plain ∇ and the sign (−1)^{d/2} folded into the coefficient; an odd count
//! keeps the (−i∇) notation. D^pD_pS is shown as ΔS, which absorbs its own sign.

use std::collections::{HashMap, HashSet};

use num_traits::{One, Signed, Zero};

use super::atom::{Atom, Kind};
use super::canon::Term;
use super::index::{Index, Label, Variance};
use super::poly::TensorPolynomial;
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Style {
    Latex,
    Text,
}

const POOL: &str = "pqrstuvwxyzabcdefghijklmno";

struct Namer {
    names: HashMap<Label, String>,
    pool: Vec<char>,
    next: usize,
}

impl Namer {
    fn new(t: &Term) -> Namer {
        let counts = t.label_counts();
        let taken: HashSet<char> = counts
            .iter()
            .filter(|(_, c)| **c == 1)
            .filter_map(|(l, _)| {
                let n = l.name();
                (n.len() == 1).then(|| n.chars().next().unwrap())
            })
            .collect();
        Namer {
            names: HashMap::new(),
            pool: POOL.chars().filter(|c| !taken.contains(c)).collect(),
            next: 0,
        }
    }

    fn name(&mut self, l: Label) -> String {
        if let Some(n) = self.names.get(&l) {
            return n.clone();
        }
        let n = if l.0 >= super::index::DUMMY_BASE || l.is_placeholder() {
            let n = if self.next < self.pool.len() {
                self.pool[self.next].to_string()
            } else {
                format!("q_{{{}}}", self.next)
            };
            self.next += 1;
            n
        } else {
            l.name()
        };
        self.names.insert(l, n.clone());
        n
    }
}

fn indices(idx: &[Index], namer: &mut Namer, style: Style) -> String {
    let mut out = String::new();
    let mut i = 0;
    let mut first = true;
    while i < idx.len() {
        let var = idx[i].var;
        let mut group = String::new();
        while i < idx.len() && idx[i].var == var {
            group.push_str(&namer.name(idx[i].label));
            i += 1;
        }
        if !first && style == Style::Latex {
            out.push_str("{}");
        }
        first = false;
        let mark = if var == Variance::Up { '^' } else { '_' };
        out.push(mark);
        out.push('{');
        out.push_str(&group);
        out.push('}');
    }
    out
}

fn prefix_str(a: &Atom, namer: &mut Namer, style: Style, plain: bool) -> String {
    let mut out = String::new();
    for p in &a.prefix {
        let nab = match (style, plain) {
            (Style::Latex, true) => "\\nabla".to_string(),
            (Style::Latex, false) => "(-i\\nabla)".to_string(),
            (Style::Text, true) => "∇".to_string(),
            (Style::Text, false) => "(-i∇)".to_string(),
        };
        out.push_str(&nab);
        out.push_str(&indices(std::slice::from_ref(p), namer, style));
    }
    out
}

fn is_laplace_s(a: &Atom) -> bool {
    a.kind == Kind::Scalar && a.prefix.len() == 2 && a.prefix[0].label == a.prefix[1].label
}

fn base_symbol(k: Kind, style: Style) -> &'static str {
    match (k, style) {
        (Kind::Riemann, _) => "R",
        (Kind::Ricci, Style::Latex) => "R",
        (Kind::Ricci, Style::Text) => "Ric",
        (Kind::Scalar, _) => "S",
        (Kind::BundleCurv, Style::Latex) => "\\mathcal{R}",
        (Kind::BundleCurv, Style::Text) => "ℛ",
        (Kind::EndoA, _) => "A",
        (Kind::Identity, _) => "I",
        (Kind::Metric, _) => "g",
        (Kind::Momentum, Style::Latex) => "\\xi",
        (Kind::Momentum, Style::Text) => "ξ",
        (Kind::ProbeEta, Style::Latex) => "\\eta",
        (Kind::ProbeEta, Style::Text) => "η",
        (Kind::ProbeZeta, Style::Latex) => "\\zeta",
        (Kind::ProbeZeta, Style::Text) => "ζ",
        (Kind::Dim, _) => "n",
        (Kind::FiberDim, _) => "d",
        (Kind::Trace, Style::Latex) => "\\operatorname{Tr}",
        (Kind::Trace, Style::Text) => "Tr",
        (Kind::SymDeriv, Style::Latex) => "(-i\\nabla)",
        (Kind::SymDeriv, Style::Text) => "(-i∇)",
    }
}

fn atom_str(a: &Atom, namer: &mut Namer, style: Style, plain: bool) -> String {
    if is_laplace_s(a) {
        return match style {
            Style::Latex => "\\Delta S".into(),
            Style::Text => "ΔS".into(),
        };
    }
    if a.kind == Kind::Trace {
        let inner: Vec<String> = a.inner.iter().map(|b| atom_str(b, namer, style, plain)).collect();
        let sep = if style == Style::Latex { " " } else { " " };
        return format!("{}({})", base_symbol(Kind::Trace, style), inner.join(sep));
    }
    let mut s = prefix_str(a, namer, style, plain);
    s.push_str(base_symbol(a.kind, style));
    if a.kind == Kind::SymDeriv {
        let mut sorted = a.slots.clone();
        sorted.sort_by_key(|i| i.var);
        s.push_str(&indices(&sorted, namer, style));
    } else {
        s.push_str(&indices(&a.slots, namer, style));
    }
    s
}

/// Recognizes S·S, Ric·Ric and Riem·Riem full contractions among derivative-free factors.
fn squares(t: &Term, style: Style) -> (Vec<String>, Vec<usize>) {
    let mut out = Vec::new();
    let mut used = Vec::new();
    let s = &t.scalars;
    let plain = |a: &Atom| a.prefix.is_empty();
    let mut i = 0;
    while i < s.len() {
        if used.contains(&i) {
            i += 1;
            continue;
        }
        let a = &s[i];
        if plain(a) && matches!(a.kind, Kind::Scalar | Kind::Ricci | Kind::Riemann) {
            if let Some(j) = (i + 1..s.len()).find(|&j| {
                !used.contains(&j) && s[j].kind == a.kind && plain(&s[j]) && {
                    let la: Vec<Label> = a.slots.iter().map(|x| x.label).collect();
                    let lb: Vec<Label> = s[j].slots.iter().map(|x| x.label).collect();
                    match a.kind {
                        Kind::Scalar => true,
                        Kind::Ricci => {
                            la[0] != la[1] && ((la == lb) || (la[0] == lb[1] && la[1] == lb[0]))
                        }
                        _ => la == lb && la.iter().collect::<HashSet<_>>().len() == 4,
                    }
                }
            }) {
                let name = match (a.kind, style) {
                    (Kind::Scalar, _) => "S^2",
                    (Kind::Ricci, Style::Latex) => "|\\mathrm{Ric}|^2",
                    (Kind::Ricci, Style::Text) => "|Ric|^2",
                    (_, _) => "|R|^2",
                };
                out.push(name.to_string());
                used.push(i);
                used.push(j);
            }
        }
        i += 1;
    }
    (out, used)
}

fn effective_derivs(t: &Term) -> usize {
    let mut d = t.deriv_count();
    for a in &t.scalars {
        if is_laplace_s(a) {
            d -= 2;
        }
    }
    d
}

/// Body of a monomial (no coefficient) and the sign to fold into the coefficient.
pub fn term_body(t: &Term, style: Style) -> (String, bool) {
    let mut namer = Namer::new(t);
    let d = effective_derivs(t);
    let plain = d % 2 == 0;
    let flip = plain && (d / 2) % 2 == 1;
    let (mut parts, used) = squares(t, style);
    for (i, a) in t.scalars.iter().enumerate() {
        if !used.contains(&i) {
            parts.push(atom_str(a, &mut namer, style, plain));
        }
    }
    for a in &t.chain {
        parts.push(atom_str(a, &mut namer, style, plain));
    }
    let sep = if style == Style::Latex { " " } else { " " };
    (parts.join(sep), flip)
}

fn coeff_latex(c: &Rational) -> String {
    let a = c.abs();
    if a.denom().is_one() {
        if a.is_one() {
            String::new()
        } else {
            a.numer().to_string()
        }
    } else {
        format!("\\frac{{{}}}{{{}}}", a.numer(), a.denom())
    }
}

fn join_terms(items: Vec<(bool, String)>) -> String {
    if items.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (k, (neg, body)) in items.into_iter().enumerate() {
        if k == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        out.push_str(&body);
    }
    out
}

pub fn to_latex(p: &TensorPolynomial) -> String {
    let items = p
        .iter()
        .map(|(t, c)| {
            let (body, flip) = term_body(t, Style::Latex);
            let c = if flip { -c.clone() } else { c.clone() };
            let coeff = coeff_latex(&c);
            let body = if body.is_empty() {
                if coeff.is_empty() {
                    "1".to_string()
                } else {
                    coeff
                }
            } else if coeff.is_empty() {
                body
            } else {
                format!("{coeff} {body}")
            };
            (c.is_negative(), body)
        })
        .collect();
    join_terms(items)
}

/// Plain text: `S/6`, `-ΔS/30`, `5*S^2/360`.
pub fn to_text(p: &TensorPolynomial) -> String {
    let items = p
        .iter()
        .map(|(t, c)| {
            let (body, flip) = term_body(t, Style::Text);
            let c = if flip { -c.clone() } else { c.clone() };
            let a = c.abs();
            let (num, den) = (a.numer().to_string(), a.denom().to_string());
            let s = if body.is_empty() {
                if a.denom().is_one() {
                    num
                } else {
                    format!("{num}/{den}")
                }
            } else {
                let mut s = if a.numer().is_one() { body } else { format!("{num}*{body}") };
                if !a.denom().is_one() {
                    s = format!("{s}/{den}");
                }
                s
            };
            (c.is_negative(), s)
        })
        .collect();
    join_terms(items)
}

pub fn is_zero_poly(p: &TensorPolynomial) -> bool {
    p.iter().all(|(_, c)| c.is_zero())
}
