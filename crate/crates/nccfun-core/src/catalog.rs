//! Space descriptors: the built-in families and the custom text format.
//!
//! A [`SpaceDescriptor`] bundles a validated [`RootDatum`] with an optional
//! concrete geometric model.  Three families are built in:
//!
//! * `SlR(n, p, q)` — `Sl(n, R)/SO(p, q)`, type `A_{n-1}` roots with
//!   multiplicity 1, graded by `T_0 = (1/n)(q, ..., q, -p, ..., -p)`;
//!   carries the `Sl(n, R)` matrix model.
//! * `ComplexGroupA(n, p, q)` — the group case with the same `A_{n-1}`
//!   geometry and all multiplicities doubled; no matrix model.
//! * `RankOneLorentz(n)` — a single root pair of multiplicity `n`,
//!   realised on ambient dimension 2 (so `RankOneLorentz(1)` has the same
//!   root data as `SlR(2, 1, 1)`); carries the unit-ball model.
//!
//! Custom data are loaded from a line-oriented UTF-8 text format:
//!
//! ```text
//! dim 3
//! gram 1 0 0 0 1 0 0 0 1
//! T0 2/3 -1/3 -1/3
//! root 1 -1 0 mult 1
//! root 1 0 -1 mult 1
//! root 0 1 -1 mult 1
//! ```
//!
//! `dim`, `gram` and `T0` must appear once, in that order, before the
//! `root` lines (one per positive root; negatives are inferred).  Rationals
//! are written `p/q` or as plain integers.  Blank lines and lines starting
//! with `#` are ignored.  A parsed datum that coincides with a built-in
//! family is upgraded to that family's descriptor (including its model).

use alloc::format;

#[allow(unused_imports)]
use num_traits::Float;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_rational::Ratio;
use num_traits::Zero;

use crate::roots::{rat_to_f64, Canonicalization, Rat, RootDatum, RootError, RootSubset};

/// Family tag of a space descriptor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Family {
    /// `Sl(n, R)/SO(p, q)` with `p + q = n`, `p <= q`.
    SlR { n: usize, p: usize, q: usize },
    /// Rank-one Lorentz space with root multiplicity `n`.
    RankOneLorentz { n: usize },
    /// Group case over the type-A geometry, multiplicities doubled.
    ComplexGroupA { n: usize, p: usize, q: usize },
    /// Loaded from a custom datum file; the label records its origin.
    Custom { name: String },
}

impl core::fmt::Display for Family {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Family::SlR { n, p, q } => write!(f, "SlR({n}, {p}, {q})"),
            Family::RankOneLorentz { n } => write!(f, "RankOneLorentz({n})"),
            Family::ComplexGroupA { n, p, q } => write!(f, "ComplexGroupA({n}, {p}, {q})"),
            Family::Custom { name } => write!(f, "Custom({name})"),
        }
    }
}

/// Concrete geometric model attached to a descriptor, used by the oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatrixModel {
    /// `Sl(n, R)` with the involution defined by the signature matrix
    /// `I_{p,q} = diag(1_p, -1_q)`; `Omega` is the matrix ball of `q x p`
    /// real matrices.
    SlMatrix { n: usize, p: usize, q: usize },
    /// Analytic rank-one model: `Omega` is the open unit ball in `R^dim`
    /// and `a_H(exp X)^alpha = 1 - |X|^2`.
    Ball { dim: usize },
}

impl MatrixModel {
    /// Diagonal of the signature matrix `I_{p,q}` (SlMatrix only).
    pub fn signature(&self) -> Option<Vec<f64>> {
        match self {
            MatrixModel::SlMatrix { n, p, .. } => {
                let mut s = vec![1.0; *n];
                for v in s.iter_mut().skip(*p) {
                    *v = -1.0;
                }
                Some(s)
            }
            MatrixModel::Ball { .. } => None,
        }
    }
}

/// A root datum together with its family tag and optional model.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceDescriptor {
    /// Which family (or custom source) the descriptor came from.
    pub family: Family,
    /// The validated root datum.
    pub datum: RootDatum,
    /// Geometric model for oracle integration, when one exists.
    pub model: Option<MatrixModel>,
}

/// Errors from catalog construction and parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CatalogError {
    /// Family parameters violate their constraints.
    BadParameters(String),
    /// The custom file is syntactically malformed.
    Parse {
        /// 1-based line number.
        line: usize,
        /// 1-based column of the offending token.
        column: usize,
        /// What went wrong.
        message: String,
    },
    /// The parsed datum violates a named structural invariant.
    Validation {
        /// Name of the violated invariant (e.g. `grading`).
        invariant: String,
        /// Full diagnostic.
        message: String,
    },
}

impl core::fmt::Display for CatalogError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            CatalogError::BadParameters(msg) => write!(f, "bad parameters: {msg}"),
            CatalogError::Parse {
                line,
                column,
                message,
            } => write!(f, "parse error at line {line}, column {column}: {message}"),
            CatalogError::Validation { invariant, message } => {
                write!(f, "validation error ({invariant}): {message}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for CatalogError {}

fn validation_error(err: RootError) -> CatalogError {
    match err {
        RootError::MalformedDatum(msg) => {
            let invariant = msg.split(':').next().unwrap_or("datum").trim().to_string();
            CatalogError::Validation {
                invariant,
                message: msg,
            }
        }
        other => CatalogError::Validation {
            invariant: String::from("datum"),
            message: format!("{other}"),
        },
    }
}

/// Positive roots of the type-`A_{n-1}` system: `eps_i - eps_j`, `i < j`.
fn type_a_positives(n: usize, mult: u32) -> Vec<(Vec<Rat>, u32)> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let mut coords = vec![Rat::zero(); n];
            coords[i] = Rat::from_integer(1);
            coords[j] = Rat::from_integer(-1);
            out.push((coords, mult));
        }
    }
    out
}

fn identity_gram(n: usize) -> Vec<Vec<Rat>> {
    let mut g = vec![vec![Rat::zero(); n]; n];
    for (i, row) in g.iter_mut().enumerate() {
        row[i] = Rat::from_integer(1);
    }
    g
}

/// Grading vector `T_0 = (1/n)(q, ..., q, -p, ..., -p)`.
fn type_a_grading(n: usize, p: usize, q: usize) -> Vec<Rat> {
    let mut t0 = Vec::with_capacity(n);
    for i in 0..n {
        if i < p {
            t0.push(Ratio::new(q as i128, n as i128));
        } else {
            t0.push(Ratio::new(-(p as i128), n as i128));
        }
    }
    t0
}

fn check_type_a_params(
    family: &str,
    n: usize,
    p: usize,
) -> Result<usize, CatalogError> {
    if n < 2 {
        return Err(CatalogError::BadParameters(format!(
            "{family} requires n >= 2 (got n = {n})"
        )));
    }
    if p == 0 || p >= n {
        return Err(CatalogError::BadParameters(format!(
            "{family} requires 1 <= p < n with p + q = n (got p = {p}, n = {n})"
        )));
    }
    let q = n - p;
    if p > q {
        return Err(CatalogError::BadParameters(format!(
            "{family} uses the p <= q normalization; got p = {p} > q = {q} — swap p and q"
        )));
    }
    Ok(q)
}

/// Build `SlR(n, p, n - p)`.
pub fn build_slr(n: usize, p: usize) -> Result<SpaceDescriptor, CatalogError> {
    let q = check_type_a_params("SlR", n, p)?;
    let datum = RootDatum::new(
        n,
        identity_gram(n),
        type_a_grading(n, p, q),
        &type_a_positives(n, 1),
        Canonicalization::SumZero,
    )
    .map_err(validation_error)?;
    Ok(SpaceDescriptor {
        family: Family::SlR { n, p, q },
        datum,
        model: Some(MatrixModel::SlMatrix { n, p, q }),
    })
}

/// Build `ComplexGroupA(n, p, n - p)` (all multiplicities 2).
pub fn build_complex_group_a(n: usize, p: usize) -> Result<SpaceDescriptor, CatalogError> {
    let q = check_type_a_params("ComplexGroupA", n, p)?;
    let datum = RootDatum::new(
        n,
        identity_gram(n),
        type_a_grading(n, p, q),
        &type_a_positives(n, 2),
        Canonicalization::SumZero,
    )
    .map_err(validation_error)?;
    Ok(SpaceDescriptor {
        family: Family::ComplexGroupA { n, p, q },
        datum,
        model: None,
    })
}

/// Build `RankOneLorentz(n)`: one positive root of multiplicity `n`.
pub fn build_rank_one_lorentz(n: usize) -> Result<SpaceDescriptor, CatalogError> {
    if n == 0 {
        return Err(CatalogError::BadParameters(String::from(
            "RankOneLorentz requires n >= 1",
        )));
    }
    let datum = RootDatum::new(
        2,
        identity_gram(2),
        type_a_grading(2, 1, 1),
        &[(
            vec![Rat::from_integer(1), Rat::from_integer(-1)],
            n as u32,
        )],
        Canonicalization::SumZero,
    )
    .map_err(validation_error)?;
    Ok(SpaceDescriptor {
        family: Family::RankOneLorentz { n },
        datum,
        model: Some(MatrixModel::Ball { dim: n }),
    })
}

/// Parse one rational token (`p/q` or integer).
fn parse_rat(token: &str) -> Option<Rat> {
    if let Some((num, den)) = token.split_once('/') {
        let n: i128 = num.parse().ok()?;
        let d: i128 = den.parse().ok()?;
        if d == 0 {
            return None;
        }
        Some(Ratio::new(n, d))
    } else {
        let n: i128 = token.parse().ok()?;
        Some(Rat::from_integer(n))
    }
}

struct LineTokens<'a> {
    line_no: usize,
    tokens: Vec<(usize, &'a str)>,
    cursor: usize,
}

impl<'a> LineTokens<'a> {
    fn new(line_no: usize, line: &'a str) -> Self {
        let mut tokens = Vec::new();
        let mut col = 1usize;
        for piece in line.split(' ') {
            if !piece.is_empty() {
                tokens.push((col, piece));
            }
            col += piece.chars().count() + 1;
        }
        LineTokens {
            line_no,
            tokens,
            cursor: 0,
        }
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str), CatalogError> {
        if self.cursor < self.tokens.len() {
            let t = self.tokens[self.cursor];
            self.cursor += 1;
            Ok(t)
        } else {
            let column = self
                .tokens
                .last()
                .map(|(c, t)| c + t.chars().count())
                .unwrap_or(1);
            Err(CatalogError::Parse {
                line: self.line_no,
                column,
                message: format!("expected {what}, found end of line"),
            })
        }
    }

    fn next_rat(&mut self, what: &str) -> Result<Rat, CatalogError> {
        let (col, tok) = self.next(what)?;
        parse_rat(tok).ok_or(CatalogError::Parse {
            line: self.line_no,
            column: col,
            message: format!("expected {what} (a rational like 2/3 or -1), found `{tok}`"),
        })
    }

    fn expect_end(&mut self) -> Result<(), CatalogError> {
        if self.cursor < self.tokens.len() {
            let (col, tok) = self.tokens[self.cursor];
            return Err(CatalogError::Parse {
                line: self.line_no,
                column: col,
                message: format!("unexpected trailing token `{tok}`"),
            });
        }
        Ok(())
    }
}

/// Parse a custom datum from text.  `name` labels the source (e.g. a file
/// path) and is recorded in the family tag.
pub fn load_custom_str(name: &str, text: &str) -> Result<SpaceDescriptor, CatalogError> {
    let mut dim: Option<usize> = None;
    let mut gram: Option<Vec<Vec<Rat>>> = None;
    let mut t0: Option<Vec<Rat>> = None;
    let mut positives: Vec<(Vec<Rat>, u32)> = Vec::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim_end();
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let mut toks = LineTokens::new(line_no, line);
        let (kw_col, keyword) = toks.next("a keyword (dim, gram, T0, root)")?;
        match keyword {
            "dim" => {
                if dim.is_some() {
                    return Err(CatalogError::Parse {
                        line: line_no,
                        column: kw_col,
                        message: String::from("duplicate `dim` line"),
                    });
                }
                let (col, tok) = toks.next("a positive integer dimension")?;
                let n: usize = tok.parse().map_err(|_| CatalogError::Parse {
                    line: line_no,
                    column: col,
                    message: format!("expected a positive integer dimension, found `{tok}`"),
                })?;
                if n == 0 {
                    return Err(CatalogError::Parse {
                        line: line_no,
                        column: col,
                        message: String::from("dimension must be positive"),
                    });
                }
                toks.expect_end()?;
                dim = Some(n);
            }
            "gram" => {
                let n = dim.ok_or(CatalogError::Parse {
                    line: line_no,
                    column: kw_col,
                    message: String::from("`gram` must come after `dim`"),
                })?;
                if gram.is_some() {
                    return Err(CatalogError::Parse {
                        line: line_no,
                        column: kw_col,
                        message: String::from("duplicate `gram` line"),
                    });
                }
                let mut rows = Vec::with_capacity(n);
                for _ in 0..n {
                    let mut row = Vec::with_capacity(n);
                    for _ in 0..n {
                        row.push(toks.next_rat("a gram entry")?);
                    }
                    rows.push(row);
                }
                toks.expect_end()?;
                gram = Some(rows);
            }
            "T0" => {
                let n = dim.ok_or(CatalogError::Parse {
                    line: line_no,
                    column: kw_col,
                    message: String::from("`T0` must come after `dim`"),
                })?;
                if t0.is_some() {
                    return Err(CatalogError::Parse {
                        line: line_no,
                        column: kw_col,
                        message: String::from("duplicate `T0` line"),
                    });
                }
                let mut coords = Vec::with_capacity(n);
                for _ in 0..n {
                    coords.push(toks.next_rat("a T0 coordinate")?);
                }
                toks.expect_end()?;
                t0 = Some(coords);
            }
            "root" => {
                let n = dim.ok_or(CatalogError::Parse {
                    line: line_no,
                    column: kw_col,
                    message: String::from("`root` must come after `dim`"),
                })?;
                if gram.is_none() || t0.is_none() {
                    return Err(CatalogError::Parse {
                        line: line_no,
                        column: kw_col,
                        message: String::from("`root` lines must come after `gram` and `T0`"),
                    });
                }
                let mut coords = Vec::with_capacity(n);
                for _ in 0..n {
                    coords.push(toks.next_rat("a root coordinate")?);
                }
                let (col, kw) = toks.next("`mult`")?;
                if kw != "mult" {
                    return Err(CatalogError::Parse {
                        line: line_no,
                        column: col,
                        message: format!("expected `mult`, found `{kw}`"),
                    });
                }
                let (mcol, mtok) = toks.next("a positive integer multiplicity")?;
                let mult: u32 = mtok.parse().map_err(|_| CatalogError::Parse {
                    line: line_no,
                    column: mcol,
                    message: format!("expected a positive integer multiplicity, found `{mtok}`"),
                })?;
                toks.expect_end()?;
                positives.push((coords, mult));
            }
            other => {
                return Err(CatalogError::Parse {
                    line: line_no,
                    column: kw_col,
                    message: format!(
                        "unknown keyword `{other}` (expected dim, gram, T0 or root)"
                    ),
                });
            }
        }
    }

    let dim = dim.ok_or(CatalogError::Parse {
        line: text.lines().count().max(1),
        column: 1,
        message: String::from("missing `dim` line"),
    })?;
    let gram = gram.ok_or(CatalogError::Parse {
        line: text.lines().count().max(1),
        column: 1,
        message: String::from("missing `gram` line"),
    })?;
    let t0 = t0.ok_or(CatalogError::Parse {
        line: text.lines().count().max(1),
        column: 1,
        message: String::from("missing `T0` line"),
    })?;

    let datum = RootDatum::new(dim, gram, t0, &positives, Canonicalization::SumZero)
        .map_err(validation_error)?;

    // Upgrade to a built-in family when the datum coincides with one.
    if let Some(upgraded) = recognise_builtin(&datum) {
        return Ok(upgraded);
    }

    Ok(SpaceDescriptor {
        family: Family::Custom {
            name: String::from(name),
        },
        datum,
        model: None,
    })
}

/// If the datum equals a built-in family's datum, return that descriptor.
fn recognise_builtin(datum: &RootDatum) -> Option<SpaceDescriptor> {
    let n = datum.ambient_dim();
    if n == 2 && datum.num_positive() == 1 {
        let mult = datum.roots()[0].multiplicity as usize;
        if let Ok(desc) = build_rank_one_lorentz(mult) {
            if desc.datum == *datum {
                // SlR(2,1,1) and RankOneLorentz(1) share the same datum;
                // prefer the SlR tag (it carries the matrix model).
                if mult == 1 {
                    if let Ok(slr) = build_slr(2, 1) {
                        if slr.datum == *datum {
                            return Some(slr);
                        }
                    }
                }
                return Some(desc);
            }
        }
    }
    for p in 1..=(n / 2) {
        if let Ok(desc) = build_slr(n, p) {
            if desc.datum == *datum {
                return Some(desc);
            }
        }
        if let Ok(desc) = build_complex_group_a(n, p) {
            if desc.datum == *datum {
                return Some(desc);
            }
        }
    }
    None
}

fn fmt_rat_vec(v: &[Rat]) -> String {
    let mut s = String::from("(");
    for (i, r) in v.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        s.push_str(&r.to_string());
    }
    s.push(')');
    s
}

fn is_identity_gram(datum: &RootDatum) -> bool {
    let n = datum.ambient_dim();
    let g = datum.gram();
    for i in 0..n {
        for j in 0..n {
            let expect = if i == j {
                Rat::from_integer(1)
            } else {
                Rat::zero()
            };
            if g[i * n + j] != expect {
                return false;
            }
        }
    }
    true
}

/// Deterministic structural report for a root datum (family-independent).
pub fn describe_datum(datum: &RootDatum) -> String {
    let mut out = String::new();
    let n = datum.ambient_dim();
    out.push_str(&format!("ambient dim: {n}\n"));
    match datum.canonicalization() {
        Canonicalization::SumZero => out.push_str("canonicalization: sum-zero\n"),
        Canonicalization::Identity => out.push_str("canonicalization: identity\n"),
    }
    if is_identity_gram(datum) {
        out.push_str("gram: identity\n");
    } else {
        out.push_str("gram:");
        for i in 0..n {
            out.push_str(" [");
            for j in 0..n {
                if j > 0 {
                    out.push(' ');
                }
                out.push_str(&datum.gram()[i * n + j].to_string());
            }
            out.push(']');
        }
        out.push('\n');
    }
    out.push_str(&format!("T0: {}\n", fmt_rat_vec(datum.grading_vector())));
    out.push_str("positive roots (coords, mult, grade, coroot):\n");
    for i in 0..datum.num_positive() {
        let r = &datum.roots()[i];
        let grade = match r.grade {
            1 => "+1",
            0 => " 0",
            _ => "-1",
        };
        out.push_str(&format!(
            "  {}  mult {}  grade {}  coroot {}\n",
            fmt_rat_vec(&r.coords),
            r.multiplicity,
            grade,
            fmt_rat_vec(&r.coroot)
        ));
    }
    let ncp = datum.block_indices(RootSubset::Noncompact).len();
    let cp = datum.block_indices(RootSubset::Compact).len();
    out.push_str(&format!("|Delta_n^+| = {ncp}, |Delta_0^+| = {cp}\n"));
    out.push_str(&format!("rho   = {}\n", fmt_rat_vec(&datum.rho(RootSubset::Full))));
    out.push_str(&format!(
        "rho_0 = {}\n",
        fmt_rat_vec(&datum.rho(RootSubset::Compact))
    ));
    out.push_str(&format!(
        "rho_+ = {}\n",
        fmt_rat_vec(&datum.rho(RootSubset::Noncompact))
    ));
    match datum.little_weyl_group() {
        Ok(w) => out.push_str(&format!("little Weyl group order: {}\n", w.len())),
        Err(_) => out.push_str("little Weyl group order: > bound\n"),
    }
    out.push_str("E_Omega conditions (Re lambda(H_alpha) < 2 - m_alpha):\n");
    for &i in &datum.block_indices(RootSubset::Noncompact) {
        let r = &datum.roots()[i];
        let bound = 2.0 - r.multiplicity as f64;
        out.push_str(&format!(
            "  Re lambda({}) < {}\n",
            fmt_rat_vec(&r.coroot),
            fmt_f64_plain(bound)
        ));
    }
    out.push_str("E_0 conditions (Re lambda(H_beta) < -2 m_beta):\n");
    for &i in &datum.block_indices(RootSubset::Compact) {
        let r = &datum.roots()[i];
        let bound = -2.0 * r.multiplicity as f64;
        out.push_str(&format!(
            "  Re lambda({}) < {}\n",
            fmt_rat_vec(&r.coroot),
            fmt_f64_plain(bound)
        ));
    }
    out
}

fn fmt_f64_plain(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

impl SpaceDescriptor {
    /// Deterministic structural report: family header, model note, root
    /// data (via [`describe_datum`]).
    pub fn describe(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("family: {}\n", self.family));
        match &self.model {
            Some(MatrixModel::SlMatrix { n, p, q }) => {
                let mut sig = String::new();
                for i in 0..(p + q) {
                    if i > 0 {
                        sig.push_str(", ");
                    }
                    sig.push_str(if i < *p { "+1" } else { "-1" });
                }
                out.push_str(&format!(
                    "matrix model: Sl({n}, R) with signature I_{{{p},{q}}} = diag({sig})\n"
                ));
            }
            Some(MatrixModel::Ball { dim }) => {
                out.push_str(&format!("matrix model: unit ball in R^{dim}\n"));
            }
            None => out.push_str("matrix model: none\n"),
        }
        out.push_str(&describe_datum(&self.datum));
        out
    }

    /// Convenience: `rho` in floating point.
    pub fn rho_f64(&self) -> Vec<f64> {
        self.datum.rho_f64(RootSubset::Full)
    }

    /// Dimension of `Omega` in the attached model, if any.
    pub fn omega_dim(&self) -> Option<usize> {
        match &self.model {
            Some(MatrixModel::SlMatrix { p, q, .. }) => Some(p * q),
            Some(MatrixModel::Ball { dim }) => Some(*dim),
            None => None,
        }
    }
}

/// `rho` of the datum as `f64`, kept here for callers without the
/// descriptor.
pub fn rho_f64_of(datum: &RootDatum) -> Vec<f64> {
    datum
        .rho(RootSubset::Full)
        .iter()
        .map(|r| rat_to_f64(*r))
        .collect()
}
