use super::index::{Index, Label};

/// Atom kinds. The declaration order is the canonical ordering of commuting factors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    /// The dimension n of the base manifold.
    Dim,
    /// The fiber dimension d of the bundle.
    FiberDim,
    /// g with per-slot variance; g^{ij}, g_{ij} and the Kronecker delta.
    Metric,
    Momentum,
    /// Auxiliary polarization vectors used to encode symmetric index bags.
    ProbeEta,
    ProbeZeta,
    Scalar,
    Ricci,
    Riemann,
    BundleCurv,
    EndoA,
    Identity,
    Trace,
    /// The operator (−i∇)^γ acting on the section; only in operator polynomials.
    SymDeriv,
}

impl Kind {
    pub const ALL: [Kind; 14] = [
        Kind::Dim,
        Kind::FiberDim,
        Kind::Metric,
        Kind::Momentum,
        Kind::ProbeEta,
        Kind::ProbeZeta,
        Kind::Scalar,
        Kind::Ricci,
        Kind::Riemann,
        Kind::BundleCurv,
        Kind::EndoA,
        Kind::Identity,
        Kind::Trace,
        Kind::SymDeriv,
    ];

    /// Fixed slot count, `None` for the variable-arity symmetric operator.
    pub fn arity(self) -> Option<usize> {
        match self {
            Kind::Riemann => Some(4),
            Kind::Ricci | Kind::BundleCurv | Kind::Metric => Some(2),
            Kind::Momentum | Kind::ProbeEta | Kind::ProbeZeta => Some(1),
            Kind::SymDeriv => None,
            _ => Some(0),
        }
    }

    /// End(V)-valued kinds live in the ordered chain.
    pub fn is_endo(self) -> bool {
        matches!(self, Kind::BundleCurv | Kind::EndoA | Kind::Identity)
    }

    pub fn is_marker(self) -> bool {
        matches!(self, Kind::Momentum | Kind::ProbeEta | Kind::ProbeZeta)
    }

    /// Kinds that accept a covariant-derivative prefix.
    pub fn differentiable(self) -> bool {
        matches!(
            self,
            Kind::Scalar | Kind::Ricci | Kind::Riemann | Kind::BundleCurv | Kind::EndoA
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            Kind::Dim => "Dim",
            Kind::FiberDim => "FiberDim",
            Kind::Metric => "Metric",
            Kind::Momentum => "Momentum",
            Kind::ProbeEta => "ProbeEta",
            Kind::ProbeZeta => "ProbeZeta",
            Kind::Scalar => "Scalar",
            Kind::Ricci => "Ricci",
            Kind::Riemann => "Riemann",
            Kind::BundleCurv => "BundleCurv",
            Kind::EndoA => "EndoA",
            Kind::Identity => "Identity",
            Kind::Trace => "Trace",
            Kind::SymDeriv => "SymDeriv",
        }
    }

    pub fn from_name(s: &str) -> Option<Kind> {
        if s == "InverseMetric" {
            return Some(Kind::Metric);
        }
        Kind::ALL.iter().copied().find(|k| k.name() == s)
    }
}

/// An indexed factor. `prefix` lists derivative indices outermost first; for
/// every kind the prefix stands for the rescaled derivative (−i∇).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub kind: Kind,
    pub prefix: Vec<Index>,
    pub slots: Vec<Index>,
    /// Chain under a trace; empty for every other kind.
    pub inner: Vec<Atom>,
}

impl Atom {
    pub fn new(kind: Kind, slots: Vec<Index>) -> Atom {
        Atom { kind, prefix: Vec::new(), slots, inner: Vec::new() }
    }

    pub fn riemann(s: [Index; 4]) -> Atom {
        Atom::new(Kind::Riemann, s.to_vec())
    }

    pub fn ricci(a: Index, b: Index) -> Atom {
        Atom::new(Kind::Ricci, vec![a, b])
    }

    pub fn scalar() -> Atom {
        Atom::new(Kind::Scalar, vec![])
    }

    pub fn curv(a: Index, b: Index) -> Atom {
        Atom::new(Kind::BundleCurv, vec![a, b])
    }

    pub fn endo_a() -> Atom {
        Atom::new(Kind::EndoA, vec![])
    }

    pub fn identity() -> Atom {
        Atom::new(Kind::Identity, vec![])
    }

    pub fn metric(a: Index, b: Index) -> Atom {
        Atom::new(Kind::Metric, vec![a, b])
    }

    pub fn momentum(a: Index) -> Atom {
        Atom::new(Kind::Momentum, vec![a])
    }

    pub fn probe(kind: Kind, a: Index) -> Atom {
        debug_assert!(matches!(kind, Kind::ProbeEta | Kind::ProbeZeta));
        Atom::new(kind, vec![a])
    }

    pub fn dim() -> Atom {
        Atom::new(Kind::Dim, vec![])
    }

    pub fn fiber_dim() -> Atom {
        Atom::new(Kind::FiberDim, vec![])
    }

    pub fn trace(chain: Vec<Atom>) -> Atom {
        Atom { kind: Kind::Trace, prefix: Vec::new(), slots: Vec::new(), inner: chain }
    }

    pub fn sym_deriv(slots: Vec<Index>) -> Atom {
        Atom::new(Kind::SymDeriv, slots)
    }

    pub fn with_prefix(mut self, prefix: Vec<Index>) -> Atom {
        self.prefix = prefix;
        self
    }

    /// Every index of the atom, including those of traced factors.
    pub fn for_each_index(&self, f: &mut impl FnMut(&Index)) {
        for i in self.prefix.iter().chain(self.slots.iter()) {
            f(i);
        }
        for a in &self.inner {
            a.for_each_index(f);
        }
    }

    pub fn for_each_index_mut(&mut self, f: &mut impl FnMut(&mut Index)) {
        for i in self.prefix.iter_mut().chain(self.slots.iter_mut()) {
            f(i);
        }
        for a in &mut self.inner {
            a.for_each_index_mut(f);
        }
    }

    /// Number of derivative symbols, traced factors included.
    pub fn deriv_count(&self) -> usize {
        self.prefix.len() + self.inner.iter().map(Atom::deriv_count).sum::<usize>()
    }

    pub fn has_label(&self, l: Label) -> bool {
        let mut found = false;
        self.for_each_index(&mut |i| found |= i.label == l);
        found
    }
}
