//! Command-line driver: argument and config-file handling, dispatch, renderers and run manifests.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::assemble::{heat_invariant_with, required_bound, CurvaturePolynomial, OperatorSpec, StageOrder};
use crate::calculus::identities::{relations_of, simplify_identities};
use crate::error::{Error, Result};
use crate::expr::render::{to_latex, to_text};
use crate::expr::serial::poly_to_dto;
use crate::expr::{Atom, Index, Label, TensorPolynomial};
use crate::hodge::{patodi_closed_form, patodi_from_invariants, PatodiCoefficients};
use crate::jetlab::field::flat_index;
use crate::jetlab::{eval_full, evaluate_curvature, numeric_eval, CurvatureData, MetricJet};
use crate::parametrix::{RationalSymbol, Recurrence};
use crate::rational::{fmt_rat, Rational};
use crate::rho_chi::{MultiIndex, RhoTable};

pub const OUTPUT_SCHEMA: &str = "heatcalc.output/1";
pub const MANIFEST_SCHEMA: &str = "heatcalc.manifest/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Latex,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorKind {
    Generic,
    Scalar,
    Hodge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Rho,
    Chi,
    Rk,
    Invariant,
    Hodge,
    Jet,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    Identities,
}

#[derive(Parser, Debug)]
#[command(name = "heatcalc", version, about = "Symbolic heat-kernel invariants")]
pub struct Cli {
    /// TOML file with the same fields as the flags; flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output format (default text).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the result here and a manifest next to it.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Bound on |α|+|β| for the composition tables.
    #[arg(long, global = true)]
    pub bound: Option<usize>,
    /// Use all cores for Hodge tables and jet batches.
    #[arg(long, global = true)]
    pub parallel: bool,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Composition coefficient ρ_{α,β}.
    Rho(RhoArgs),
    /// Recurrence coefficients χ^{(0)}, χ^{(1)}, χ^{(2)} of a multi-index.
    Chi(ChiArgs),
    /// Resolvent symbol r_k.
    Rk(OpArgs),
    /// Heat invariant a_k.
    Invariant(OpArgs),
    /// Hodge Laplacian coefficients.
    Hodge(HodgeArgs),
    /// Numeric checks on random metric jets.
    Jet(JetArgs),
}

#[derive(Args, Debug, Default)]
pub struct RhoArgs {
    /// Multi-index as letters, e.g. `jk`; empty or `0` for the zero index.
    #[arg(long)]
    pub alpha: Option<String>,
    /// Second multi-index, same syntax.
    #[arg(long)]
    pub beta: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct ChiArgs {
    /// Multi-index as letters, e.g. `ijk`.
    #[arg(long)]
    pub alpha: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct OpArgs {
    /// Order k, at most 6 (default 2).
    #[arg(long)]
    pub k: Option<usize>,
    /// Operator family (default generic).
    #[arg(long, value_enum)]
    pub operator: Option<OperatorKind>,
    /// Dimension, for the hodge operator.
    #[arg(long)]
    pub n: Option<usize>,
    /// Form degree, for the hodge operator.
    #[arg(long)]
    pub nu: Option<usize>,
}

#[derive(Args, Debug, Default)]
pub struct HodgeArgs {
    /// Dimension.
    #[arg(long)]
    pub n: Option<usize>,
    /// Form degree.
    #[arg(long)]
    pub nu: Option<usize>,
    /// Every (n, ν) with n up to --n.
    #[arg(long)]
    pub table: bool,
}

#[derive(Args, Debug, Default)]
pub struct JetArgs {
    /// Dimension (default 4).
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated seeds (default 1).
    #[arg(long, value_delimiter = ',')]
    pub seed: Vec<u64>,
    /// Report identity residuals instead of curvature values.
    #[arg(long, value_enum)]
    pub check: Option<Check>,
}

/// Optional settings, as read from a config file or from flags.
#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub command: Option<CommandKind>,
    pub k: Option<usize>,
    pub operator: Option<OperatorKind>,
    pub n: Option<usize>,
    pub nu: Option<usize>,
    pub alpha: Option<String>,
    pub beta: Option<String>,
    pub bound: Option<usize>,
    pub seeds: Option<Vec<u64>>,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
    pub table: Option<bool>,
    pub check: Option<Check>,
    pub parallel: Option<bool>,
}

impl PartialConfig {
    pub fn from_toml(s: &str) -> Result<PartialConfig> {
        toml::from_str(s).map_err(|e| Error::Config(e.message().to_string()))
    }

    /// Field-wise `self` over `base`.
    pub fn over(self, base: PartialConfig) -> PartialConfig {
        PartialConfig {
            command: self.command.or(base.command),
            k: self.k.or(base.k),
            operator: self.operator.or(base.operator),
            n: self.n.or(base.n),
            nu: self.nu.or(base.nu),
            alpha: self.alpha.or(base.alpha),
            beta: self.beta.or(base.beta),
            bound: self.bound.or(base.bound),
            seeds: self.seeds.or(base.seeds),
            format: self.format.or(base.format),
            output: self.output.or(base.output),
            table: self.table.or(base.table),
            check: self.check.or(base.check),
            parallel: self.parallel.or(base.parallel),
        }
    }
}

fn flag(b: bool) -> Option<bool> {
    b.then_some(true)
}

impl Cli {
    fn partial(&self) -> PartialConfig {
        let mut p = PartialConfig {
            format: self.format,
            output: self.output.clone(),
            bound: self.bound,
            parallel: flag(self.parallel),
            ..Default::default()
        };
        match &self.command {
            None => {}
            Some(Command::Rho(a)) => {
                p.command = Some(CommandKind::Rho);
                p.alpha = a.alpha.clone();
                p.beta = a.beta.clone();
            }
            Some(Command::Chi(a)) => {
                p.command = Some(CommandKind::Chi);
                p.alpha = a.alpha.clone();
            }
            Some(Command::Rk(a)) | Some(Command::Invariant(a)) => {
                let rk = matches!(self.command, Some(Command::Rk(_)));
                p.command = Some(if rk { CommandKind::Rk } else { CommandKind::Invariant });
                p.k = a.k;
                p.operator = a.operator;
                p.n = a.n;
                p.nu = a.nu;
            }
            Some(Command::Hodge(a)) => {
                p.command = Some(CommandKind::Hodge);
                p.n = a.n;
                p.nu = a.nu;
                p.table = flag(a.table);
            }
            Some(Command::Jet(a)) => {
                p.command = Some(CommandKind::Jet);
                p.n = a.n;
                p.seeds = (!a.seed.is_empty()).then(|| a.seed.clone());
                p.check = a.check;
            }
        }
        p
    }
}

/// A validated run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub k: usize,
    pub operator: OperatorKind,
    pub n: Option<usize>,
    pub nu: Option<usize>,
    pub alpha: String,
    pub beta: String,
    pub bound: usize,
    pub seeds: Vec<u64>,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub table: bool,
    pub check: Option<Check>,
    pub parallel: bool,
}

/// Largest supported invariant order.
pub const MAX_K: usize = 6;

impl RunConfig {
    pub fn from_partial(p: PartialConfig) -> Result<RunConfig> {
        let command = p.command.ok_or_else(|| Error::Config("no subcommand given".into()))?;
        let k = p.k.unwrap_or(2);
        let operator = p.operator.unwrap_or(OperatorKind::Generic);
        let default_bound = match command {
            CommandKind::Rk | CommandKind::Invariant => required_bound(k),
            CommandKind::Hodge => required_bound(4),
            _ => 6,
        };
        let cfg = RunConfig {
            command,
            k,
            operator,
            n: p.n,
            nu: p.nu,
            alpha: p.alpha.unwrap_or_default(),
            beta: p.beta.unwrap_or_default(),
            bound: p.bound.unwrap_or(default_bound),
            seeds: p.seeds.unwrap_or_else(|| vec![1]),
            format: p.format.unwrap_or(Format::Text),
            output: p.output,
            table: p.table.unwrap_or(false),
            check: p.check,
            parallel: p.parallel.unwrap_or(false),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        match self.command {
            CommandKind::Rk | CommandKind::Invariant => {
                if self.k > MAX_K {
                    return bad(format!("k = {} is above the supported maximum {MAX_K}", self.k));
                }
                if self.bound < required_bound(self.k) {
                    return bad(format!("k = {} needs --bound at least {}", self.k, required_bound(self.k)));
                }
                if self.operator == OperatorKind::Hodge {
                    if self.command == CommandKind::Rk {
                        return bad("rk takes --operator generic or scalar".into());
                    }
                    self.operator_spec()?;
                }
            }
            CommandKind::Hodge => {
                let n = self.n.ok_or_else(|| Error::Config("hodge needs --n".into()))?;
                if n == 0 {
                    return bad("--n must be positive".into());
                }
                if !self.table {
                    let nu = self.nu.ok_or_else(|| Error::Config("hodge needs --nu or --table".into()))?;
                    if nu > n {
                        return bad(format!("form degree {nu} exceeds dimension {n}"));
                    }
                }
                if self.bound < required_bound(4) {
                    return bad(format!("hodge needs --bound at least {}", required_bound(4)));
                }
            }
            CommandKind::Jet => {
                if self.n.unwrap_or(4) < 2 {
                    return bad("jets need n >= 2".into());
                }
            }
            CommandKind::Rho | CommandKind::Chi => {
                MultiIndex::parse(&self.alpha)?;
                MultiIndex::parse(&self.beta)?;
            }
        }
        Ok(())
    }

    pub fn operator_spec(&self) -> Result<OperatorSpec> {
        match self.operator {
            OperatorKind::Generic => Ok(OperatorSpec::generic()),
            OperatorKind::Scalar => Ok(OperatorSpec::scalar()),
            OperatorKind::Hodge => {
                let n = self.n.ok_or_else(|| Error::Config("--operator hodge needs --n".into()))?;
                let nu = self.nu.ok_or_else(|| Error::Config("--operator hodge needs --nu".into()))?;
                OperatorSpec::hodge(n, nu)
            }
        }
    }
}

/// Parses arguments (without loading the config file).
pub fn parse_args<I, T>(args: I) -> std::result::Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    Cli::try_parse_from(args)
}

/// Merges flags over the optional config file and validates.
pub fn resolve(cli: &Cli) -> Result<RunConfig> {
    let file = match &cli.config {
        None => PartialConfig::default(),
        Some(path) => {
            let s = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            PartialConfig::from_toml(&s)?
        }
    };
    RunConfig::from_partial(cli.partial().over(file))
}

/// Runs a configuration and returns the rendered output.
pub fn run(cfg: &RunConfig) -> Result<String> {
    let mut out = match cfg.command {
        CommandKind::Rho => run_rho(cfg)?,
        CommandKind::Chi => run_chi(cfg)?,
        CommandKind::Rk => run_rk(cfg)?,
        CommandKind::Invariant => run_invariant(cfg)?,
        CommandKind::Hodge => run_hodge(cfg)?,
        CommandKind::Jet => run_jet(cfg)?,
    };
    if !out.ends_with('\n') {
        out.push('\n');
    }
    Ok(out)
}

fn envelope(cfg: &RunConfig, result: Value) -> String {
    let v = json!({
        "schema": OUTPUT_SCHEMA,
        "command": cfg.command,
        "config": cfg,
        "result": result,
    });
    serde_json::to_string_pretty(&v).expect("serializable")
}

fn poly_value(p: &TensorPolynomial) -> Value {
    serde_json::to_value(poly_to_dto(p)).expect("serializable")
}

fn render(p: &TensorPolynomial, f: Format) -> String {
    match f {
        Format::Latex => to_latex(p),
        _ => to_text(p),
    }
}

fn run_rho(cfg: &RunConfig) -> Result<String> {
    let (alpha, beta) = (MultiIndex::parse(&cfg.alpha)?, MultiIndex::parse(&cfg.beta)?);
    let table = RhoTable::new(cfg.bound, false);
    let rho = table.compute_rho(&alpha, &beta)?;
    Ok(match cfg.format {
        Format::Json => envelope(cfg, poly_value(&rho)),
        f => render(&rho, f),
    })
}

fn run_chi(cfg: &RunConfig) -> Result<String> {
    let alpha = MultiIndex::parse(&cfg.alpha)?;
    let table = RhoTable::new(cfg.bound, false);
    let chi = table.compute_chi(&alpha)?;
    Ok(match cfg.format {
        Format::Json => envelope(cfg, Value::Array(chi.iter().map(poly_value).collect())),
        Format::Latex => {
            let mut s = String::new();
            for (p, c) in chi.iter().enumerate() {
                let _ = writeln!(s, "\\chi^{{({p})}} = {}", to_latex(c));
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            for (p, c) in chi.iter().enumerate() {
                let _ = writeln!(s, "chi{p} = {}", to_text(c));
            }
            s
        }
    })
}

fn symbol_text(s: &RationalSymbol, f: Format) -> String {
    if s.is_zero() {
        return "0".into();
    }
    let mut parts = Vec::new();
    for (m, p) in s.parts() {
        parts.push(match f {
            Format::Latex => format!("\\frac{{{}}}{{(\\lambda-|\\xi|^2)^{{{m}}}}}", to_latex(p)),
            _ => format!("({}) / (lambda - |xi|^2)^{m}", to_text(p)),
        });
    }
    parts.join("\n+ ")
}

fn run_rk(cfg: &RunConfig) -> Result<String> {
    let spec = cfg.operator_spec()?;
    let table = RhoTable::new(cfg.bound, spec.flat_bundle());
    let mut rec = Recurrence::new(&table, spec.potential());
    let r = rec.get(cfg.k)?.clone();
    Ok(match cfg.format {
        Format::Json => {
            let v: Value = serde_json::from_str(&r.to_json()).expect("valid json");
            envelope(cfg, v)
        }
        f => symbol_text(&r, f),
    })
}

fn invariant(table: &RhoTable, k: usize, spec: &OperatorSpec) -> Result<CurvaturePolynomial> {
    heat_invariant_with(table, k, spec, StageOrder::TraceFirst)
}

fn run_invariant(cfg: &RunConfig) -> Result<String> {
    let spec = cfg.operator_spec()?;
    let table = RhoTable::new(cfg.bound, spec.flat_bundle());
    let a = invariant(&table, cfg.k, &spec)?;
    Ok(match cfg.format {
        Format::Json => envelope(cfg, json!({ "k": cfg.k, "operator": spec.to_string(), "value": poly_value(a.poly()) })),
        f => render(a.poly(), f),
    })
}

fn patodi_value(p: &PatodiCoefficients) -> Value {
    json!({
        "n": p.n,
        "nu": p.nu,
        "a0": fmt_rat(&p.a0),
        "a2": fmt_rat(&p.a2),
        "c": p.c.iter().map(fmt_rat).collect::<Vec<_>>(),
    })
}

fn run_hodge(cfg: &RunConfig) -> Result<String> {
    let n_max = cfg.n.expect("validated");
    let grid: Vec<(usize, usize)> = if cfg.table {
        (1..=n_max).flat_map(|n| (0..=n).map(move |nu| (n, nu))).collect()
    } else {
        vec![(n_max, cfg.nu.expect("validated"))]
    };
    let table = RhoTable::new(cfg.bound, false);
    let generic = OperatorSpec::generic();
    let inv = [
        invariant(&table, 0, &generic)?,
        invariant(&table, 2, &generic)?,
        invariant(&table, 4, &generic)?,
    ];
    let row = |&(n, nu): &(usize, usize)| -> Result<PatodiCoefficients> {
        let closed = patodi_closed_form(n, nu);
        let piped = patodi_from_invariants(&inv, n, nu)?;
        if closed != piped {
            return Err(Error::Structural(format!("closed form and pipeline disagree at (n, nu) = ({n}, {nu})")));
        }
        Ok(closed)
    };
    let rows: Vec<PatodiCoefficients> = if cfg.parallel {
        grid.par_iter().map(row).collect::<Result<_>>()?
    } else {
        grid.iter().map(row).collect::<Result<_>>()?
    };
    Ok(match cfg.format {
        Format::Json => envelope(cfg, Value::Array(rows.iter().map(patodi_value).collect())),
        Format::Latex => hodge_latex(&rows),
        Format::Text if cfg.table => hodge_table_text(&rows),
        Format::Text => hodge_text(&rows[0]),
    })
}

fn signed_terms(items: &[(Rational, &str)]) -> String {
    let mut s = String::new();
    for (c, name) in items {
        if c.is_zero() {
            continue;
        }
        let mag = fmt_rat(&c.abs());
        let body = if c.abs() == Rational::from_integer(1.into()) && !name.is_empty() {
            name.to_string()
        } else if name.is_empty() {
            mag
        } else {
            format!("{mag}*{name}")
        };
        if s.is_empty() {
            s = if c.is_negative() { format!("-{body}") } else { body };
        } else {
            s += if c.is_negative() { " - " } else { " + " };
            s += &body;
        }
    }
    if s.is_empty() {
        "0".into()
    } else {
        s
    }
}

fn hodge_text(p: &PatodiCoefficients) -> String {
    let [c1, c2, c3, c4] = p.c.clone();
    let a4 = signed_terms(&[(c1, "ΔS"), (c2, "S^2"), (c3, "|Ric|^2"), (c4, "|R|^2")]);
    format!(
        "n = {}, nu = {}\na0 = {}\na2 = {}\na4 = ({a4})/360\nc = [{}]\n",
        p.n,
        p.nu,
        fmt_rat(&p.a0),
        signed_terms(&[(p.a2.clone(), "S")]),
        p.c.iter().map(fmt_rat).collect::<Vec<_>>().join(", ")
    )
}

fn hodge_table_text(rows: &[PatodiCoefficients]) -> String {
    let mut s = format!("{:>3} {:>3} {:>6} {:>8} {:>8} {:>8} {:>8} {:>8}\n", "n", "nu", "a0", "a2", "c1", "c2", "c3", "c4");
    for p in rows {
        let _ = writeln!(
            s,
            "{:>3} {:>3} {:>6} {:>8} {:>8} {:>8} {:>8} {:>8}",
            p.n,
            p.nu,
            fmt_rat(&p.a0),
            fmt_rat(&p.a2),
            fmt_rat(&p.c[0]),
            fmt_rat(&p.c[1]),
            fmt_rat(&p.c[2]),
            fmt_rat(&p.c[3])
        );
    }
    s
}

fn latex_rat(r: &Rational) -> String {
    if r.denom() == &1.into() {
        r.numer().to_string()
    } else {
        let sign = if r.is_negative() { "-" } else { "" };
        format!("{sign}\\frac{{{}}}{{{}}}", r.numer().abs(), r.denom())
    }
}

fn hodge_latex(rows: &[PatodiCoefficients]) -> String {
    let mut s = String::from("\\begin{tabular}{rrrrrrrr}\nn & \\nu & a_0 & a_2/S & c_1 & c_2 & c_3 & c_4 \\\\\n\\hline\n");
    for p in rows {
        let _ = writeln!(
            s,
            "{} & {} & {} & {} & {} & {} & {} & {} \\\\",
            p.n,
            p.nu,
            latex_rat(&p.a0),
            latex_rat(&p.a2),
            latex_rat(&p.c[0]),
            latex_rat(&p.c[1]),
            latex_rat(&p.c[2]),
            latex_rat(&p.c[3])
        );
    }
    s.push_str("\\end{tabular}");
    s
}

/// Residuals of the curvature identities on one jet; all are exactly zero when the engine is sound.
pub fn identity_residuals(data: &CurvatureData) -> Result<Vec<(&'static str, Rational)>> {
    let n = data.n;
    let r0 = |i: usize, j: usize, k: usize, l: usize| data.riemann_at([i, j, k, l]);
    let r1 = |m: usize, i: usize, j: usize, k: usize, l: usize| data.riem[1][flat_index(n, &[m, i, j, k, l])].clone();
    let mut sym = Rational::zero();
    let mut b1 = Rational::zero();
    let mut b2 = Rational::zero();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let v = r0(i, j, k, l);
                    sym += (&v + r0(j, i, k, l)).abs() + (&v + r0(i, j, l, k)).abs() + (&v - r0(k, l, i, j)).abs();
                    b1 += (&v + r0(i, k, l, j) + r0(i, l, j, k)).abs();
                    for m in 0..n {
                        b2 += (r1(m, i, j, k, l) + r1(k, i, j, l, m) + r1(l, i, j, m, k)).abs();
                    }
                }
            }
        }
    }
    let idx = |s: &str| -> Vec<Index> {
        let c: Vec<char> = s.chars().collect();
        c.chunks(2)
            .map(|w| if w[0] == '^' { Index::up(Label::letter(w[1])) } else { Index::down(Label::letter(w[1])) })
            .collect()
    };
    let riem = |s: &str| {
        let v = idx(s);
        Atom::riemann([v[0], v[1], v[2], v[3]])
    };
    let ric = |s: &str| {
        let v = idx(s);
        Atom::ricci(v[0], v[1])
    };
    let mono = |c: Rational, atoms: Vec<Atom>| TensorPolynomial::from_atoms(c, atoms, vec![]);
    let half = Rational::new(1.into(), 2.into());
    let mut bianchi = mono(Rational::from_integer(1.into()), vec![ric("_i_j").with_prefix(idx("^i^j"))])?;
    bianchi.add_assign(&mono(-half.clone(), vec![Atom::scalar().with_prefix(idx("^p_p"))])?);
    let mut pair = mono(Rational::from_integer(1.into()), vec![riem("_i_j_k_l"), riem("^i^k^j^l")])?;
    pair.add_assign(&mono(-half, vec![riem("_i_j_k_l"), riem("^i^j^k^l")])?);

    let probes = [
        mono(Rational::from_integer(1.into()), vec![ric("_i_j").with_prefix(idx("^i^j"))])?,
        mono(Rational::from_integer(1.into()), vec![riem("_i_j_k_l"), riem("^i^k^j^l")])?,
        mono(Rational::from_integer(1.into()), vec![riem("^i_j_i_l").with_prefix(idx("^j^l"))])?,
        mono(Rational::from_integer(1.into()), vec![ric("_i_j").with_prefix(idx("_k")), ric("^i^k").with_prefix(idx("^j"))])?,
    ];
    let mut simplify = Rational::zero();
    let mut rules = Rational::zero();
    for p in &probes {
        simplify += (numeric_eval(p, data)? - numeric_eval(&simplify_identities(p)?, data)?).abs();
        for (t, _) in p.iter() {
            for rel in relations_of(t)? {
                let v = eval_full(&rel, data)?;
                rules += v.re.iter().chain(&v.im).flat_map(|m| m.v.iter()).map(|x| x.abs()).sum::<Rational>();
            }
        }
    }
    Ok(vec![
        ("riemann_symmetries", sym),
        ("first_bianchi", b1),
        ("second_bianchi", b2),
        ("contracted_bianchi", numeric_eval(&bianchi, data)?.abs()),
        ("pair_identity", numeric_eval(&pair, data)?.abs()),
        ("simplify_value", simplify),
        ("rewrite_relations", rules),
    ])
}

fn run_jet(cfg: &RunConfig) -> Result<String> {
    let n = cfg.n.unwrap_or(4);
    let one = |seed: &u64| -> Result<(u64, Vec<(&'static str, Rational)>)> {
        let data = evaluate_curvature(&MetricJet::random(n, 4, *seed), 2, None)?;
        let mut res = vec![("scalar_curvature", data.scalar_curvature())];
        if cfg.check == Some(Check::Identities) {
            res.extend(identity_residuals(&data)?);
        } else {
            res.push(("ricci_norm2", data.ricci_norm2()));
            res.push(("riemann_norm2", data.riemann_norm2()));
            res.push(("laplace_s", data.laplace_s()));
        }
        Ok((*seed, res))
    };
    let rows: Vec<(u64, Vec<(&'static str, Rational)>)> = if cfg.parallel {
        cfg.seeds.par_iter().map(one).collect::<Result<_>>()?
    } else {
        cfg.seeds.iter().map(one).collect::<Result<_>>()?
    };
    Ok(match cfg.format {
        Format::Json => envelope(
            cfg,
            Value::Array(
                rows.iter()
                    .map(|(seed, res)| {
                        let mut m = serde_json::Map::new();
                        m.insert("seed".into(), json!(seed));
                        for (k, v) in res {
                            m.insert((*k).into(), json!(fmt_rat(v)));
                        }
                        Value::Object(m)
                    })
                    .collect(),
            ),
        ),
        _ => {
            let mut s = String::new();
            for (seed, res) in &rows {
                let fields: Vec<String> = res.iter().map(|(k, v)| format!("{k}={}", fmt_rat(v))).collect();
                let _ = writeln!(s, "n={n} seed={seed} {}", fields.join(" "));
            }
            s
        }
    })
}

/// Hex SHA-256 of a byte string.
pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Path of the manifest written next to an output file.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Deterministic manifest: config, versions and the digest of the emitted file.
pub fn manifest(cfg: &RunConfig, output: &Path, content: &str) -> String {
    let v = json!({
        "schema": MANIFEST_SCHEMA,
        "tool": "heatcalc",
        "version": env!("CARGO_PKG_VERSION"),
        "output_schema": OUTPUT_SCHEMA,
        "config": cfg,
        "files": [{
            "path": output.file_name().map(|f| f.to_string_lossy().to_string()).unwrap_or_default(),
            "sha256": digest(content.as_bytes()),
            "bytes": content.len(),
        }],
    });
    serde_json::to_string_pretty(&v).expect("serializable") + "\n"
}

fn write_file(path: &Path, s: &str) -> Result<()> {
    std::fs::write(path, s).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Exit status for an error: 2 for configuration problems, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Parse(_) | Error::Io(_) => 2,
        _ => 1,
    }
}

/// Full entry point; returns the process exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match parse_args(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = resolve(&cli).and_then(|cfg| {
        let out = run(&cfg)?;
        match &cfg.output {
            None => print!("{out}"),
            Some(path) => {
                write_file(path, &out)?;
                write_file(&manifest_path(path), &manifest(&cfg, path, &out))?;
            }
        }
        Ok(())
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
