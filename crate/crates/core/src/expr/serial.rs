//! Versioned JSON text form of tensor polynomials.
//!
//! ```text
//! {"schema":"heatcalc.tensor-polynomial/1",
//!  "terms":[{"coeff":"-1/2","scalars":[],"chain":[{"kind":"BundleCurv","slots":["_j","_k"]}]}]}
//! ```
//!
//! Indices are written `_j` (lower) or `^j` (upper); canonical dummies are `~0`, `~1`, …
//! A trace atom carries its chain under `inner`.

use serde::{Deserialize, Serialize};

use super::atom::{Atom, Kind};
use super::canon::Term;
use super::index::Index;
use super::poly::TensorPolynomial;
use crate::error::{Error, Result};
use crate::rational::{fmt_rat, parse_rat};

pub const POLY_SCHEMA: &str = "heatcalc.tensor-polynomial/1";

#[derive(Serialize, Deserialize)]
struct AtomDto {
    kind: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    prefix: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    slots: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    inner: Vec<AtomDto>,
}

#[derive(Serialize, Deserialize)]
struct TermDto {
    coeff: String,
    #[serde(default)]
    scalars: Vec<AtomDto>,
    #[serde(default)]
    chain: Vec<AtomDto>,
}

#[derive(Serialize, Deserialize)]
pub(crate) struct PolyDto {
    schema: String,
    terms: Vec<TermDto>,
}

fn atom_to_dto(a: &Atom) -> AtomDto {
    AtomDto {
        kind: a.kind.name().to_string(),
        prefix: a.prefix.iter().map(|i| i.token()).collect(),
        slots: a.slots.iter().map(|i| i.token()).collect(),
        inner: a.inner.iter().map(atom_to_dto).collect(),
    }
}

fn parse_indices(v: &[String]) -> Result<Vec<Index>> {
    v.iter()
        .map(|s| Index::parse_token(s).ok_or_else(|| Error::Parse(format!("bad index `{s}`"))))
        .collect()
}

fn atom_from_dto(d: &AtomDto) -> Result<Atom> {
    let kind = Kind::from_name(&d.kind).ok_or_else(|| Error::Parse(format!("unknown kind `{}`", d.kind)))?;
    Ok(Atom {
        kind,
        prefix: parse_indices(&d.prefix)?,
        slots: parse_indices(&d.slots)?,
        inner: d.inner.iter().map(atom_from_dto).collect::<Result<_>>()?,
    })
}

pub(crate) fn poly_to_dto(p: &TensorPolynomial) -> PolyDto {
    PolyDto {
        schema: POLY_SCHEMA.to_string(),
        terms: p
            .iter()
            .map(|(t, c)| TermDto {
                coeff: fmt_rat(c),
                scalars: t.scalars.iter().map(atom_to_dto).collect(),
                chain: t.chain.iter().map(atom_to_dto).collect(),
            })
            .collect(),
    }
}

pub(crate) fn poly_from_dto(d: &PolyDto) -> Result<TensorPolynomial> {
    if d.schema != POLY_SCHEMA {
        return Err(Error::Parse(format!("unsupported schema `{}`", d.schema)));
    }
    let mut p = TensorPolynomial::zero();
    for t in &d.terms {
        let coeff = parse_rat(&t.coeff).ok_or_else(|| Error::Parse(format!("bad coefficient `{}`", t.coeff)))?;
        let scalars = t.scalars.iter().map(atom_from_dto).collect::<Result<Vec<_>>>()?;
        let chain = t.chain.iter().map(atom_from_dto).collect::<Result<Vec<_>>>()?;
        p.add_term(coeff, Term { scalars, chain })?;
    }
    Ok(p)
}

pub fn to_json(p: &TensorPolynomial) -> String {
    serde_json::to_string(&poly_to_dto(p)).expect("serializable")
}

pub fn to_json_pretty(p: &TensorPolynomial) -> String {
    serde_json::to_string_pretty(&poly_to_dto(p)).expect("serializable")
}

pub fn from_json(s: &str) -> Result<TensorPolynomial> {
    let d: PolyDto = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
    poly_from_dto(&d)
}
