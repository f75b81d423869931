use std::fmt;

/// Identifier of an abstract index.
///
/// Letters map to their code points, so alphabetical order is numeric order.
/// Placeholders are used inside memoized templates and canonical dummies
/// live in their own range above everything else.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(pub u32);

pub const PLACEHOLDER_BASE: u32 = 1 << 20;
pub const DUMMY_BASE: u32 = 1 << 24;

impl Label {
    pub fn letter(c: char) -> Label {
        Label(c as u32)
    }

    pub fn placeholder(k: usize) -> Label {
        Label(PLACEHOLDER_BASE + k as u32)
    }

    pub fn dummy(k: usize) -> Label {
        Label(DUMMY_BASE + k as u32)
    }

    pub fn is_placeholder(self) -> bool {
        (PLACEHOLDER_BASE..DUMMY_BASE).contains(&self.0)
    }

    pub fn name(self) -> String {
        let v = self.0;
        if v < 128 && (v as u8).is_ascii_alphabetic() {
            (v as u8 as char).to_string()
        } else if self.is_placeholder() {
            format!("P{}", v - PLACEHOLDER_BASE)
        } else if v >= DUMMY_BASE {
            format!("~{}", v - DUMMY_BASE)
        } else {
            format!("#{v}")
        }
    }

    pub fn parse(s: &str) -> Option<Label> {
        let mut chars = s.chars();
        let first = chars.next()?;
        let rest = chars.as_str();
        if rest.is_empty() && first.is_ascii_alphabetic() {
            return Some(Label::letter(first));
        }
        let n: u32 = rest.parse().ok()?;
        match first {
            'P' => Some(Label(PLACEHOLDER_BASE + n)),
            '~' => Some(Label(DUMMY_BASE + n)),
            '#' => Some(Label(n)),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variance {
    Down,
    Up,
}

impl Variance {
    pub fn flip(self) -> Variance {
        match self {
            Variance::Down => Variance::Up,
            Variance::Up => Variance::Down,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Index {
    pub label: Label,
    pub var: Variance,
}

impl Index {
    pub fn down(label: Label) -> Index {
        Index { label, var: Variance::Down }
    }

    pub fn up(label: Label) -> Index {
        Index { label, var: Variance::Up }
    }

    pub fn with_label(self, label: Label) -> Index {
        Index { label, var: self.var }
    }

    /// Serialized as "_j" or "^j".
    pub fn token(self) -> String {
        match self.var {
            Variance::Down => format!("_{}", self.label.name()),
            Variance::Up => format!("^{}", self.label.name()),
        }
    }

    pub fn parse_token(s: &str) -> Option<Index> {
        let (var, rest) = match s.chars().next()? {
            '_' => (Variance::Down, &s[1..]),
            '^' => (Variance::Up, &s[1..]),
            _ => return None,
        };
        Some(Index { label: Label::parse(rest)?, var })
    }
}

/// Whether an index label is free or contracted inside a given monomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Binding {
    Free,
    Dummy,
}

/// Shorthand for a lower letter index.
pub fn lo(c: char) -> Index {
    Index::down(Label::letter(c))
}

/// Shorthand for an upper letter index.
pub fn hi(c: char) -> Index {
    Index::up(Label::letter(c))
}
