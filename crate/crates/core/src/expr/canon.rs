//! Canonical representatives of monomials.
//!
//! A pre-pass removes metric factors, turns self-contracted curvature into
//! Ricci/scalar atoms and folds momentum-like vectors into slot markers. The
//! remaining atoms are arranged by a level-by-level search: at each level every
//! admissible (atom, slot permutation) is encoded with dummies numbered by first
//! appearance, and only the lexicographically minimal partial encodings survive.

use std::collections::{HashMap, HashSet};

use super::atom::{Atom, Kind};
use super::index::{Index, Label, Variance};
use crate::error::{Error, Result};

/// Coefficient-free part of a monomial: commuting factors and the ordered End(V) chain.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term {
    pub scalars: Vec<Atom>,
    pub chain: Vec<Atom>,
}

impl Term {
    pub fn new(scalars: Vec<Atom>, chain: Vec<Atom>) -> Term {
        Term { scalars, chain }
    }

    pub fn for_each_index(&self, f: &mut impl FnMut(&Index)) {
        for a in self.scalars.iter().chain(self.chain.iter()) {
            a.for_each_index(f);
        }
    }

    pub fn for_each_index_mut(&mut self, f: &mut impl FnMut(&mut Index)) {
        for a in self.scalars.iter_mut().chain(self.chain.iter_mut()) {
            a.for_each_index_mut(f);
        }
    }

    pub fn label_counts(&self) -> HashMap<Label, usize> {
        let mut c = HashMap::new();
        self.for_each_index(&mut |i| *c.entry(i.label).or_insert(0) += 1);
        c
    }

    /// Free indices sorted by label.
    pub fn free_indices(&self) -> Vec<Index> {
        let counts = self.label_counts();
        let mut out = Vec::new();
        self.for_each_index(&mut |i| {
            if counts[&i.label] == 1 {
                out.push(*i);
            }
        });
        out.sort();
        out
    }

    pub fn max_label(&self) -> u32 {
        let mut m = 0;
        self.for_each_index(&mut |i| m = m.max(i.label.0));
        m
    }

    pub fn deriv_count(&self) -> usize {
        self.scalars.iter().chain(self.chain.iter()).map(Atom::deriv_count).sum()
    }

    pub fn is_endo(&self) -> bool {
        !self.chain.is_empty()
    }

    pub fn count_kind(&self, kind: Kind) -> usize {
        fn rec(a: &Atom, k: Kind) -> usize {
            (a.kind == k) as usize + a.inner.iter().map(|b| rec(b, k)).sum::<usize>()
        }
        self.scalars.iter().chain(self.chain.iter()).map(|a| rec(a, kind)).sum()
    }
}

/// Outcome of canonicalization: `None` for a vanishing monomial, otherwise the
/// sign to absorb into the coefficient and the representative.
pub type CanonResult = Option<(bool, Term)>;

pub fn canonical_term(t: &Term) -> Result<CanonResult> {
    let mut w = t.clone();
    let mut negative = false;
    if !normalize(&mut w, &mut negative)? {
        return Ok(None);
    }
    Ok(search(&w)?.map(|(neg, term)| (neg ^ negative, term)))
}

// ---------------------------------------------------------------------------
// pre-pass

fn structural_check(t: &Term) -> Result<()> {
    for a in &t.scalars {
        if a.kind.is_endo() {
            return Err(Error::Structural(format!("{} outside the End(V) chain", a.kind.name())));
        }
        if a.kind == Kind::Trace {
            for b in &a.inner {
                if !b.kind.is_endo() {
                    return Err(Error::Structural(format!("{} inside a trace", b.kind.name())));
                }
            }
        }
        check_arity(a)?;
    }
    for a in &t.chain {
        if !a.kind.is_endo() {
            return Err(Error::Structural(format!("{} inside the End(V) chain", a.kind.name())));
        }
        check_arity(a)?;
    }
    Ok(())
}

fn check_arity(a: &Atom) -> Result<()> {
    if let Some(n) = a.kind.arity() {
        if a.slots.len() != n {
            return Err(Error::Structural(format!(
                "{} expects {} slots, found {}",
                a.kind.name(),
                n,
                a.slots.len()
            )));
        }
    }
    if !a.prefix.is_empty() && !a.kind.differentiable() {
        return Err(Error::Structural(format!("{} cannot carry a derivative prefix", a.kind.name())));
    }
    for b in &a.inner {
        check_arity(b)?;
    }
    Ok(())
}

fn check_balance(t: &Term) -> Result<HashMap<Label, usize>> {
    let counts = t.label_counts();
    for (l, c) in &counts {
        if *c > 2 {
            return Err(Error::IndexBalance { label: l.name(), count: *c });
        }
    }
    Ok(counts)
}

/// Replaces the unique occurrence of `from` by `to`.
fn replace_label(t: &mut Term, from: Label, to: Index) {
    let mut done = false;
    t.for_each_index_mut(&mut |i| {
        if !done && i.label == from {
            *i = to;
            done = true;
        }
    });
}

fn normalize(t: &mut Term, negative: &mut bool) -> Result<bool> {
    structural_check(t)?;
    loop {
        let counts = check_balance(t)?;

        if t.chain.len() > 1 && t.chain.iter().any(|a| a.kind == Kind::Identity) {
            t.chain.retain(|a| a.kind != Kind::Identity);
            if t.chain.is_empty() {
                t.chain.push(Atom::identity());
            }
            continue;
        }

        let mut changed = false;
        for k in 0..t.scalars.len() {
            let a = &mut t.scalars[k];
            if a.kind != Kind::Trace {
                continue;
            }
            if a.inner.len() > 1 && a.inner.iter().any(|b| b.kind == Kind::Identity) {
                a.inner.retain(|b| b.kind != Kind::Identity);
                changed = true;
            }
            if a.inner.is_empty() || (a.inner.len() == 1 && a.inner[0].kind == Kind::Identity) {
                *a = Atom::fiber_dim();
                changed = true;
            }
        }
        if changed {
            continue;
        }

        let mut metric_done = false;
        for k in 0..t.scalars.len() {
            if t.scalars[k].kind != Kind::Metric {
                continue;
            }
            let x = t.scalars[k].slots[0];
            let y = t.scalars[k].slots[1];
            if x.label == y.label {
                t.scalars[k] = Atom::dim();
                metric_done = true;
                break;
            }
            if counts[&x.label] == 2 {
                t.scalars.remove(k);
                replace_label(t, x.label, y);
                metric_done = true;
                break;
            }
            if counts[&y.label] == 2 {
                t.scalars.remove(k);
                replace_label(t, y.label, x);
                metric_done = true;
                break;
            }
        }
        if metric_done {
            continue;
        }

        let mut zero = false;
        let mut contracted = false;
        let mut visit = |a: &mut Atom| {
            if zero || contracted {
                return;
            }
            match contract_self(a) {
                SelfContraction::None => {}
                SelfContraction::Zero => zero = true,
                SelfContraction::Changed(neg) => {
                    contracted = true;
                    if neg {
                        *negative = !*negative;
                    }
                }
            }
        };
        for a in t.scalars.iter_mut() {
            if a.kind == Kind::Trace {
                for b in a.inner.iter_mut() {
                    visit(b);
                }
            } else {
                visit(a);
            }
        }
        for a in t.chain.iter_mut() {
            visit(a);
        }
        if zero {
            return Ok(false);
        }
        if contracted {
            continue;
        }
        return Ok(true);
    }
}

enum SelfContraction {
    None,
    Zero,
    Changed(bool),
}

fn contract_self(a: &mut Atom) -> SelfContraction {
    let s = &a.slots;
    match a.kind {
        Kind::Riemann => {
            let same = |i: usize, j: usize| s[i].label == s[j].label;
            if same(0, 1) || same(2, 3) {
                return SelfContraction::Zero;
            }
            let (keep, neg) = if same(0, 2) {
                ([1, 3], false)
            } else if same(1, 3) {
                ([0, 2], false)
            } else if same(0, 3) {
                ([1, 2], true)
            } else if same(1, 2) {
                ([0, 3], true)
            } else {
                return SelfContraction::None;
            };
            let slots = vec![s[keep[0]], s[keep[1]]];
            a.kind = Kind::Ricci;
            a.slots = slots;
            SelfContraction::Changed(neg)
        }
        Kind::Ricci if s[0].label == s[1].label => {
            a.kind = Kind::Scalar;
            a.slots.clear();
            SelfContraction::Changed(false)
        }
        Kind::BundleCurv if s[0].label == s[1].label => SelfContraction::Zero,
        _ => SelfContraction::None,
    }
}

// ---------------------------------------------------------------------------
// slot symmetry groups

/// (permutation, negative sign) pairs; `perm[i]` is the source slot for slot i.
fn slot_group(kind: Kind) -> &'static [(&'static [usize], bool)] {
    const RIEMANN: [(&[usize], bool); 8] = [
        (&[0, 1, 2, 3], false),
        (&[1, 0, 2, 3], true),
        (&[0, 1, 3, 2], true),
        (&[1, 0, 3, 2], false),
        (&[2, 3, 0, 1], false),
        (&[3, 2, 0, 1], true),
        (&[2, 3, 1, 0], true),
        (&[3, 2, 1, 0], false),
    ];
    const SYM2: [(&[usize], bool); 2] = [(&[0, 1], false), (&[1, 0], false)];
    const ANTI2: [(&[usize], bool); 2] = [(&[0, 1], false), (&[1, 0], true)];
    const ID2: [(&[usize], bool); 1] = [(&[0, 1], false)];
    const ID1: [(&[usize], bool); 1] = [(&[0], false)];
    const ID0: [(&[usize], bool); 1] = [(&[], false)];
    match kind {
        Kind::Riemann => &RIEMANN,
        Kind::Ricci | Kind::Metric => &SYM2,
        Kind::BundleCurv => &ANTI2,
        _ => match kind.arity() {
            Some(2) => &ID2,
            Some(1) => &ID1,
            _ => &ID0,
        },
    }
}

fn permuted(a: &Atom, perm: &[usize]) -> Atom {
    let mut b = a.clone();
    if !perm.is_empty() {
        b.slots = perm.iter().map(|&p| a.slots[p]).collect();
    }
    b
}

/// All (sign, arranged atom) variants of an atom under its symmetries.
fn choices(a: &Atom) -> Vec<(bool, Atom)> {
    if a.kind == Kind::Trace {
        let n = a.inner.len();
        let mut out = Vec::new();
        for r in 0..n {
            let rotated: Vec<&Atom> = (0..n).map(|i| &a.inner[(i + r) % n]).collect();
            let mut partial: Vec<(bool, Vec<Atom>)> = vec![(false, Vec::new())];
            for b in rotated {
                let mut next = Vec::new();
                for (neg, chain) in &partial {
                    for (perm, s) in slot_group(b.kind) {
                        let mut c = chain.clone();
                        c.push(permuted(b, perm));
                        next.push((neg ^ s, c));
                    }
                }
                partial = next;
            }
            for (neg, chain) in partial {
                out.push((neg, Atom::trace(chain)));
            }
        }
        out
    } else {
        slot_group(a.kind).iter().map(|(perm, s)| (*s, permuted(a, perm))).collect()
    }
}

// ---------------------------------------------------------------------------
// encoding

const FREE_CODE: u64 = 1 << 40;
const MARK_CODE: u64 = 1 << 50;
const FIXED_CODE: u64 = 1 << 56;

#[derive(Clone, Copy)]
enum Tok {
    Fixed(u64),
    Idx(Index),
}

fn tokens(a: &Atom, out: &mut Vec<Tok>) {
    out.push(Tok::Fixed(a.kind as u64));
    out.push(Tok::Fixed(a.prefix.len() as u64));
    for i in a.prefix.iter().chain(a.slots.iter()) {
        out.push(Tok::Idx(*i));
    }
    if a.kind == Kind::Trace {
        out.push(Tok::Fixed(a.inner.len() as u64));
        for b in &a.inner {
            tokens(b, out);
        }
    }
}

struct Ctx {
    free: HashSet<Label>,
    marked: HashMap<Label, Kind>,
}

impl Ctx {
    fn fixed_code(&self, i: &Index) -> Option<u64> {
        if self.free.contains(&i.label) {
            Some(FREE_CODE + 2 * i.label.0 as u64 + (i.var == Variance::Up) as u64)
        } else {
            self.marked.get(&i.label).map(|k| MARK_CODE + *k as u64)
        }
    }
}

#[derive(Clone)]
struct Branch {
    used: Vec<bool>,
    map: Vec<(Label, u32)>,
    negative: bool,
    picks: Vec<(usize, usize)>,
}

impl Branch {
    fn lookup(&self, l: Label) -> Option<u32> {
        self.map.iter().find(|(x, _)| *x == l).map(|(_, k)| *k)
    }
}

fn encode(ctx: &Ctx, toks: &[Tok], map: &mut Vec<(Label, u32)>, out: &mut Vec<u64>) {
    for t in toks {
        match t {
            Tok::Fixed(v) => out.push(FIXED_CODE + v),
            Tok::Idx(i) => {
                if let Some(c) = ctx.fixed_code(i) {
                    out.push(c);
                } else if let Some((_, k)) = map.iter().find(|(x, _)| *x == i.label) {
                    out.push(*k as u64);
                } else {
                    let k = map.len() as u32;
                    map.push((i.label, k));
                    out.push(k as u64);
                }
            }
        }
    }
}

#[derive(PartialEq, Eq, PartialOrd, Ord, Clone, Debug)]
struct TypeKey {
    kind: Kind,
    plen: usize,
    nslots: usize,
    inner_sig: Vec<(Kind, usize, usize)>,
    frees: Vec<Index>,
    marks: Vec<Kind>,
}

fn type_key(a: &Atom, ctx: &Ctx) -> TypeKey {
    let mut frees = Vec::new();
    let mut marks = Vec::new();
    a.for_each_index(&mut |i| {
        if ctx.free.contains(&i.label) {
            frees.push(*i);
        } else if let Some(k) = ctx.marked.get(&i.label) {
            marks.push(*k);
        }
    });
    frees.sort();
    marks.sort();
    let inner_sig = if a.kind == Kind::Trace {
        let sig: Vec<(Kind, usize, usize)> =
            a.inner.iter().map(|b| (b.kind, b.prefix.len(), b.slots.len())).collect();
        let n = sig.len();
        (0..n)
            .map(|r| (0..n).map(|i| sig[(i + r) % n]).collect::<Vec<_>>())
            .min()
            .unwrap_or_default()
    } else {
        Vec::new()
    };
    TypeKey { kind: a.kind, plen: a.prefix.len(), nslots: a.slots.len(), inner_sig, frees, marks }
}

struct Slot {
    variants: Vec<(bool, Atom, Vec<Tok>)>,
}

fn search(t: &Term) -> Result<CanonResult> {
    let counts = t.label_counts();
    let free: HashSet<Label> = counts.iter().filter(|(_, c)| **c == 1).map(|(l, _)| *l).collect();

    let mut n_dim = 0;
    let mut n_fib = 0;
    let mut marker_labels: HashMap<Label, Vec<Kind>> = HashMap::new();
    let mut sym: Option<&Atom> = None;
    let mut body: Vec<&Atom> = Vec::new();
    for a in &t.scalars {
        match a.kind {
            Kind::Dim => n_dim += 1,
            Kind::FiberDim => n_fib += 1,
            k if k.is_marker() => marker_labels.entry(a.slots[0].label).or_default().push(k),
            Kind::SymDeriv => {
                if sym.is_some() {
                    return Err(Error::Structural("more than one SymDeriv factor".into()));
                }
                sym = Some(a);
            }
            _ => body.push(a),
        }
    }

    let mut free_markers: Vec<(Kind, Index)> = Vec::new();
    let mut marker_pairs: Vec<(Kind, Kind)> = Vec::new();
    let mut marked: HashMap<Label, Kind> = HashMap::new();
    for (l, kinds) in &marker_labels {
        if free.contains(l) {
            let idx = t
                .scalars
                .iter()
                .find(|a| a.kind.is_marker() && a.slots[0].label == *l)
                .map(|a| a.slots[0])
                .unwrap();
            free_markers.push((kinds[0], idx));
        } else if kinds.len() == 2 {
            let (a, b) = (kinds[0].min(kinds[1]), kinds[0].max(kinds[1]));
            marker_pairs.push((a, b));
        } else {
            marked.insert(*l, kinds[0]);
        }
    }
    free_markers.sort();
    marker_pairs.sort();

    let ctx = Ctx { free, marked };

    let mut keyed: Vec<(TypeKey, usize)> =
        body.iter().enumerate().map(|(i, a)| (type_key(a, &ctx), i)).collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));

    let make_slot = |a: &Atom| Slot {
        variants: choices(a)
            .into_iter()
            .map(|(neg, b)| {
                let mut toks = Vec::new();
                tokens(&b, &mut toks);
                (neg, b, toks)
            })
            .collect(),
    };
    let slots: Vec<Slot> = keyed.iter().map(|(_, i)| make_slot(body[*i])).collect();
    let chain_slots: Vec<Slot> =
        t.chain.iter().map(make_slot).collect();

    // Group boundaries among the sorted body atoms.
    let mut groups: Vec<std::ops::Range<usize>> = Vec::new();
    let mut start = 0;
    for i in 1..=keyed.len() {
        if i == keyed.len() || keyed[i].0 != keyed[start].0 {
            groups.push(start..i);
            start = i;
        }
    }

    let total = slots.len() + chain_slots.len();
    let mut branches = vec![Branch {
        used: vec![false; total],
        map: Vec::new(),
        negative: false,
        picks: Vec::new(),
    }];

    let mut levels: Vec<Vec<usize>> = Vec::new();
    for g in &groups {
        for _ in g.clone() {
            levels.push(g.clone().collect());
        }
    }
    for c in 0..chain_slots.len() {
        levels.push(vec![slots.len() + c]);
    }

    let slot_ref = |s: usize| -> &Slot {
        if s < slots.len() {
            &slots[s]
        } else {
            &chain_slots[s - slots.len()]
        }
    };

    let mut code_buf = Vec::new();
    for candidates in &levels {
        let mut best: Option<Vec<u64>> = None;
        let mut next: Vec<Branch> = Vec::new();
        for b in &branches {
            for &s in candidates {
                if b.used[s] {
                    continue;
                }
                for (vi, (neg, _, toks)) in slot_ref(s).variants.iter().enumerate() {
                    let mut map = b.map.clone();
                    code_buf.clear();
                    encode(&ctx, toks, &mut map, &mut code_buf);
                    let ord = match &best {
                        None => std::cmp::Ordering::Less,
                        Some(bc) => code_buf.as_slice().cmp(bc.as_slice()),
                    };
                    if ord == std::cmp::Ordering::Greater {
                        continue;
                    }
                    if ord == std::cmp::Ordering::Less {
                        best = Some(code_buf.clone());
                        next.clear();
                    }
                    let mut nb = Branch {
                        used: b.used.clone(),
                        map,
                        negative: b.negative ^ neg,
                        picks: b.picks.clone(),
                    };
                    nb.used[s] = true;
                    nb.picks.push((s, vi));
                    next.push(nb);
                }
            }
        }
        // Identical search states with opposite signs certify a vanishing monomial.
        let mut seen: HashMap<(Vec<bool>, Vec<(Label, u32)>), bool> = HashMap::new();
        let mut dedup = Vec::new();
        for nb in next {
            let mut m = nb.map.clone();
            m.sort();
            match seen.get(&(nb.used.clone(), m.clone())) {
                Some(&neg) => {
                    if neg != nb.negative {
                        return Ok(None);
                    }
                }
                None => {
                    seen.insert((nb.used.clone(), m), nb.negative);
                    dedup.push(nb);
                }
            }
        }
        branches = dedup;
    }

    // The symmetric operator is encoded last: self pairs, then sorted slot codes.
    let sym_code = |b: &Branch| -> Vec<u64> {
        let Some(sd) = sym else { return Vec::new() };
        let mut pairs = 0u64;
        let mut codes = Vec::new();
        let mut seen_l: HashSet<Label> = HashSet::new();
        for i in &sd.slots {
            if let Some(c) = ctx.fixed_code(i) {
                codes.push(c);
            } else if let Some(k) = b.lookup(i.label) {
                codes.push(k as u64);
            } else if !seen_l.insert(i.label) {
                pairs += 1;
            }
        }
        codes.sort();
        let mut out = vec![pairs];
        out.extend(codes);
        out
    };
    if sym.is_some() {
        let codes: Vec<Vec<u64>> = branches.iter().map(sym_code).collect();
        let best = codes.iter().min().cloned().unwrap();
        branches = branches
            .into_iter()
            .zip(codes)
            .filter(|(_, c)| *c == best)
            .map(|(b, _)| b)
            .collect();
    }

    let neg0 = branches[0].negative;
    if branches.iter().any(|b| b.negative != neg0) {
        return Ok(None);
    }
    let win = &branches[0];

    // Rebuild the representative from the winning arrangement.
    let mut next_dummy = win.map.len();
    let mut seen_dummy: HashSet<Label> = HashSet::new();
    let mut marker_atoms: Vec<Atom> = Vec::new();
    let mut relabel = |i: &mut Index, marker_atoms: &mut Vec<Atom>, next_dummy: &mut usize| {
        if ctx.free.contains(&i.label) {
            return;
        }
        if let Some(k) = ctx.marked.get(&i.label) {
            let l = Label::dummy(*next_dummy);
            *next_dummy += 1;
            *i = Index::down(l);
            marker_atoms.push(Atom::new(*k, vec![Index::up(l)]));
            return;
        }
        let k = win.lookup(i.label).expect("dummy numbered during search");
        let l = Label::dummy(k as usize);
        let var = if seen_dummy.insert(l) { Variance::Down } else { Variance::Up };
        *i = Index { label: l, var };
    };

    let mut scalars: Vec<Atom> = Vec::new();
    scalars.extend(std::iter::repeat_n(Atom::dim(), n_dim));
    scalars.extend(std::iter::repeat_n(Atom::fiber_dim(), n_fib));
    let mut chain: Vec<Atom> = Vec::new();
    for &(s, vi) in &win.picks {
        let mut a = slot_ref(s).variants[vi].1.clone();
        a.for_each_index_mut(&mut |i| relabel(i, &mut marker_atoms, &mut next_dummy));
        if s < slots.len() {
            scalars.push(a);
        } else {
            chain.push(a);
        }
    }
    for (k, i) in &free_markers {
        scalars.push(Atom::new(*k, vec![*i]));
    }
    for (k1, k2) in &marker_pairs {
        let l = Label::dummy(next_dummy);
        next_dummy += 1;
        scalars.push(Atom::new(*k1, vec![Index::down(l)]));
        scalars.push(Atom::new(*k2, vec![Index::up(l)]));
    }
    let mut sym_atom = None;
    if let Some(sd) = sym {
        let mut coded: Vec<(u64, Index)> = Vec::new();
        let mut self_pairs = 0;
        let mut seen_l: HashSet<Label> = HashSet::new();
        for i in &sd.slots {
            if let Some(c) = ctx.fixed_code(i) {
                coded.push((c, *i));
            } else if let Some(k) = win.lookup(i.label) {
                coded.push((k as u64, *i));
            } else if !seen_l.insert(i.label) {
                self_pairs += 1;
            }
        }
        coded.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out_slots = Vec::new();
        for (_, mut i) in coded {
            relabel(&mut i, &mut marker_atoms, &mut next_dummy);
            out_slots.push(i);
        }
        for _ in 0..self_pairs {
            let l = Label::dummy(next_dummy);
            next_dummy += 1;
            out_slots.push(Index::down(l));
            out_slots.push(Index::up(l));
        }
        sym_atom = Some(Atom::sym_deriv(out_slots));
    }
    scalars.extend(marker_atoms);
    if let Some(a) = sym_atom {
        scalars.push(a);
    }
    Ok(Some((neg0, Term { scalars, chain })))
}
