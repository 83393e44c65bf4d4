//! Command-line front end and the bracket-expression parser.
//!
//! Exit status: 0 on success, 1 when a verification finds a nonzero residual,
//! 2 on malformed input (arguments, expressions, indices).

use std::io::Write;
use std::ops::Range;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::SeedableRng;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::algebra::{
    check_index_triple, check_synthetic_triple, jacobi_residual, AlgebraElement, AlgebraError, ElementSampler,
    MonsterAlgebra, TripleKind, TripleReport,
};
use crate::cartan::{BlockIndex, BorcherdsCartanMatrix, CartanError};
use crate::freelie::{dimension_table, dimension_table_record, fricke_generators, FreeLieError};
use crate::moonshine::{
    fricke_transform, mckay_thompson, root_multiplicity, verify_2b_reciprocal_identity, verify_2b_row0,
    verify_denominator_identity_with, verify_fricke_p0_consistency_with, verify_theta_identity, ClassData,
    ClassLabel, IdentityReport, MonsterExponents, MoonshineError, Multiplicity, PerturbedExponents,
    SimpleRootExponents,
};
use crate::qseries::{exponent_string, Exponent, QSeries, RootExponents};
use crate::scalar::parse_small_fraction;

type Element = AlgebraElement<BigRational>;

// ---------------------------------------------------------------------------
// Expression grammar:
//   elem := h1 | h2 | e(-1) | f(-1) | e(l;j,k) | f(l;j,k) | [elem,elem]
//         | num*elem | elem+elem | elem-elem | -elem | (elem) | 0

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Zero,
    H1,
    H2,
    EMinus,
    FMinus,
    E { l: u32, j: i64, k: u64 },
    F { l: u32, j: i64, k: u64 },
    Bracket(Box<Expr>, Box<Expr>),
    Scale(BigRational, Box<Expr>),
    Sum(Box<Expr>, Box<Expr>),
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{message} at {}..{}", span.start, span.end)]
pub struct ParseError {
    pub message: String,
    pub span: Range<usize>,
}

impl ParseError {
    /// The message followed by the source line and a caret marker.
    pub fn render(&self, src: &str) -> String {
        let width = (self.span.end.max(self.span.start + 1) - self.span.start).max(1);
        format!(
            "parse error: {}\n  {}\n  {}{}",
            self,
            src,
            " ".repeat(self.span.start),
            "^".repeat(width)
        )
    }
}

struct Parser_<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser_<'a> {
    fn err<T>(&self, message: impl Into<String>, span: Range<usize>) -> Result<T, ParseError> {
        Err(ParseError {
            message: message.into(),
            span,
        })
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        match self.peek() {
            Some(x) if x == c => {
                self.pos += 1;
                Ok(())
            }
            Some(x) => self.err(format!("expected '{c}', found '{x}'"), self.pos..self.pos + x.len_utf8()),
            None => self.err(format!("expected '{c}', found end of input"), self.pos..self.pos),
        }
    }

    fn digits(&mut self) -> Result<(String, Range<usize>), ParseError> {
        self.skip_ws();
        let start = self.pos;
        if self.src[self.pos..].starts_with('-') {
            self.pos += 1;
        }
        while self.src[self.pos..].starts_with(|c: char| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let text = &self.src[start..self.pos];
        if text.is_empty() || text == "-" {
            return self.err("expected a number", start..(start + 1).min(self.src.len()));
        }
        Ok((text.to_string(), start..self.pos))
    }

    fn int<T: std::str::FromStr>(&mut self) -> Result<(T, Range<usize>), ParseError> {
        let (text, span) = self.digits()?;
        match text.parse() {
            Ok(v) => Ok((v, span)),
            Err(_) => self.err(format!("number {text} out of range"), span),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    acc = Expr::Sum(Box::new(acc), Box::new(rhs));
                }
                Some('-') => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    acc = Expr::Sum(Box::new(acc), Box::new(Expr::Scale(-BigRational::one(), Box::new(rhs))));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some('-') => {
                self.pos += 1;
                Ok(Expr::Scale(-BigRational::one(), Box::new(self.factor()?)))
            }
            Some(c) if c.is_ascii_digit() => {
                let (num, span) = self.int::<BigInt>()?;
                let mut value = BigRational::from_integer(num);
                let mut end = span.end;
                if self.peek() == Some('/') {
                    self.pos += 1;
                    let (den, dspan) = self.int::<BigInt>()?;
                    if den.is_zero() {
                        return self.err("zero denominator", dspan);
                    }
                    value /= BigRational::from_integer(den);
                    end = dspan.end;
                }
                if self.peek() == Some('*') {
                    self.pos += 1;
                    return Ok(Expr::Scale(value, Box::new(self.factor()?)));
                }
                if value.is_zero() {
                    return Ok(Expr::Zero);
                }
                self.err("a scalar must multiply an element (use num*elem)", span.start..end)
            }
            _ => self.atom(),
        }
    }

    fn generator(&mut self, is_e: bool, start: usize) -> Result<Expr, ParseError> {
        self.expect('(')?;
        let (first, fspan) = self.int::<i64>()?;
        if self.peek() == Some(')') {
            self.pos += 1;
            if first != -1 {
                return self.err("single-index generators must be e(-1) or f(-1)", start..self.pos);
            }
            return Ok(if is_e { Expr::EMinus } else { Expr::FMinus });
        }
        self.expect(';')?;
        let (j, jspan) = self.int::<i64>()?;
        self.expect(',')?;
        let (k, kspan) = self.int::<i64>()?;
        self.expect(')')?;
        let span = start..self.pos;
        if first < 0 {
            return self.err("l must be non-negative", fspan);
        }
        if j < 1 {
            return self.err("block index j must be at least 1", jspan);
        }
        if first >= j {
            return self.err(format!("l must satisfy l <= j-1 = {}", j - 1), span);
        }
        if k < 1 {
            return self.err("k must be at least 1", kspan);
        }
        let (l, k) = (first as u32, k as u64);
        Ok(if is_e { Expr::E { l, j, k } } else { Expr::F { l, j, k } })
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.src[self.pos..];
        if rest.starts_with("h1") {
            self.pos += 2;
            return Ok(Expr::H1);
        }
        if rest.starts_with("h2") {
            self.pos += 2;
            return Ok(Expr::H2);
        }
        match rest.chars().next() {
            Some('e') => {
                self.pos += 1;
                self.generator(true, start)
            }
            Some('f') => {
                self.pos += 1;
                self.generator(false, start)
            }
            Some('[') => {
                self.pos += 1;
                let a = self.expr()?;
                self.expect(',')?;
                let b = self.expr()?;
                match self.peek() {
                    Some(']') => {
                        self.pos += 1;
                        Ok(Expr::Bracket(Box::new(a), Box::new(b)))
                    }
                    _ => self.err("unbalanced bracket: missing ']'", start..self.pos),
                }
            }
            Some('(') => {
                self.pos += 1;
                let a = self.expr()?;
                match self.peek() {
                    Some(')') => {
                        self.pos += 1;
                        Ok(a)
                    }
                    _ => self.err("unbalanced parenthesis: missing ')'", start..self.pos),
                }
            }
            Some(c) => {
                let end = start
                    + rest
                        .find(|x: char| !x.is_alphanumeric())
                        .unwrap_or(rest.len())
                        .max(c.len_utf8());
                self.err(format!("unknown symbol '{}'", &self.src[start..end]), start..end)
            }
            None => self.err("unexpected end of input", start..start),
        }
    }
}

pub fn parse_bracket_expression(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser_ { src, pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < src.len() {
        let c = src[p.pos..].chars().next().unwrap_or(' ');
        let message = if c == ']' || c == ')' {
            format!("unbalanced '{c}'")
        } else {
            format!("unexpected '{c}'")
        };
        return Err(ParseError {
            message,
            span: p.pos..p.pos + c.len_utf8(),
        });
    }
    Ok(e)
}

pub fn evaluate(expr: &Expr, alg: &MonsterAlgebra<BigRational>) -> Result<Element, AlgebraError> {
    let x = match expr {
        Expr::Zero => Element::zero(),
        Expr::H1 => Element::h1(),
        Expr::H2 => Element::h2(),
        Expr::EMinus => Element::e_minus(),
        Expr::FMinus => Element::f_minus(),
        Expr::E { l, j, k } => Element::e(*l, *j, *k),
        Expr::F { l, j, k } => Element::f(*l, *j, *k),
        Expr::Bracket(a, b) => return alg.bracket(&evaluate(a, alg)?, &evaluate(b, alg)?),
        Expr::Scale(c, a) => evaluate(a, alg)?.scale(c),
        Expr::Sum(a, b) => evaluate(a, alg)?.add(&evaluate(b, alg)?),
    };
    alg.validate(&x)?;
    Ok(x)
}

// ---------------------------------------------------------------------------
// Command line

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "borcherds", version, about = "Monster and Fricke monstrous Lie algebras: series, Cartan matrices, brackets, identities")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value = "text", global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

fn parse_pair(s: &str) -> Result<(i64, i64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected a,b but got {s:?}"))?;
    let a = a.trim().parse().map_err(|_| format!("bad integer {a:?}"))?;
    let b = b.trim().parse().map_err(|_| format!("bad integer {b:?}"))?;
    Ok((a, b))
}

fn parse_exponent(s: &str) -> Result<Exponent, String> {
    parse_small_fraction(s).ok_or_else(|| format!("expected an integer or a/b, got {s:?}"))
}

fn parse_ints(s: &str) -> Result<Vec<i64>, String> {
    s.split(',')
        .map(|x| x.trim().parse().map_err(|_| format!("bad integer {x:?}")))
        .collect()
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// McKay-Thompson series T_g up to q^T.
    Series {
        class: String,
        #[arg(long, value_parser = parse_exponent)]
        trunc: Exponent,
    },
    /// T_g(-1/tau) up to q^T.
    Transform {
        class: String,
        #[arg(long, value_parser = parse_exponent)]
        trunc: Exponent,
    },
    /// Finite corner of the Cartan matrix with its Borcherds conditions and rank.
    Cartan {
        class: String,
        #[arg(long)]
        blocks: i64,
        #[arg(long = "per-block")]
        per_block: u64,
        /// Overwrite one entry: j,k,p,q,value.
        #[arg(long, allow_hyphen_values = true)]
        perturb: Option<String>,
    },
    /// Root multiplicity c(m, n).
    Mult {
        class: String,
        #[arg(long, allow_hyphen_values = true)]
        m: i64,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_exponent)]
        n: Exponent,
    },
    /// Residual of the denominator identity (1A), its p^0 row (2A), or the
    /// eta-product identities (2B).
    DenomCheck {
        class: String,
        #[arg(long)]
        p: i64,
        #[arg(long)]
        q: i64,
        /// Add 1 to one multiplicity: m,n (n may be a fraction a/b).
        #[arg(long)]
        perturb: Option<String>,
    },
    /// Evaluate a bracket expression.
    Bracket {
        expr: String,
        #[arg(long, default_value = "1A")]
        class: String,
        /// Degree window m,n.
        #[arg(long, value_parser = parse_pair, default_value = "8,8")]
        window: (i64, i64),
    },
    /// Edge multiplicities of the Dynkin diagram.
    Dynkin {
        class: String,
        #[arg(long)]
        blocks: i64,
        #[arg(long = "per-block", default_value_t = 2)]
        per_block: u64,
    },
    /// Graded dimension of the free Lie algebra u^+ at (m, n).
    Witt {
        class: String,
        #[arg(long)]
        m: i64,
        #[arg(long, value_parser = parse_exponent)]
        n: Exponent,
        /// Also print every dimension in the box below (m, n).
        #[arg(long)]
        table: bool,
    },
    /// sl2 or Heisenberg triple residuals at a simple root.
    Triple {
        class: String,
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        index: Option<(i64, i64)>,
        /// Use the rank-one algebra with this diagonal entry instead.
        #[arg(long, allow_hyphen_values = true)]
        diagonal: Option<i64>,
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
    },
    /// Residuals of the defining relations and of the center images.
    Relations {
        class: String,
        #[arg(long = "j-max", default_value_t = 4)]
        j_max: i64,
        #[arg(long = "k-max", default_value_t = 3)]
        k_max: u64,
        /// Shift one right-hand-side coefficient of the first relation whose
        /// label starts with this text.
        #[arg(long)]
        perturb: Option<String>,
    },
    /// Jacobi identity on random homogeneous triples.
    Jacobi {
        class: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_parser = parse_pair, default_value = "4,4")]
        window: (i64, i64),
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Sl2,
    Heisenberg,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Parse(String),
}

impl From<MoonshineError> for CliError {
    fn from(e: MoonshineError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<CartanError> for CliError {
    fn from(e: CartanError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<AlgebraError> for CliError {
    fn from(e: AlgebraError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<FreeLieError> for CliError {
    fn from(e: FreeLieError) -> Self {
        CliError::Input(e.to_string())
    }
}

/// Text and JSON renderings of one command's result.
struct Output {
    text: String,
    json: serde_json::Value,
    pass: bool,
}

impl Output {
    fn ok(text: String, json: serde_json::Value) -> Self {
        Self { text, json, pass: true }
    }
}

/// Runs the command line; returns the exit status.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    return 0;
                }
                _ => 2,
            };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    match dispatch(&cli.command) {
        Ok(o) => {
            let written = match cli.format {
                Format::Text => write!(out, "{}", o.text),
                Format::Json => writeln!(out, "{}", o.json),
            };
            if written.is_err() {
                return 2;
            }
            if o.pass {
                0
            } else {
                1
            }
        }
        Err(CliError::Parse(msg)) | Err(CliError::Input(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
    }
}

fn class(label: &str) -> Result<&'static ClassData, CliError> {
    Ok(ClassData::lookup(label)?)
}

fn series_output(s: &QSeries<BigRational>) -> Output {
    Output::ok(s.to_text(), serde_json::to_value(s.to_record()).expect("serializable"))
}

fn dispatch(cmd: &Command) -> Result<Output, CliError> {
    match cmd {
        Command::Series { class: c, trunc } => Ok(series_output(&mckay_thompson(class(c)?, *trunc))),
        Command::Transform { class: c, trunc } => Ok(series_output(&fricke_transform(class(c)?, *trunc))),
        Command::Cartan {
            class: c,
            blocks,
            per_block,
            perturb,
        } => cartan(class(c)?, *blocks, *per_block, perturb.as_deref()),
        Command::Mult { class: c, m, n } => mult(class(c)?, *m, *n),
        Command::DenomCheck { class: c, p, q, perturb } => denom_check(class(c)?, *p, *q, perturb.as_deref()),
        Command::Bracket { expr, class: c, window } => bracket(class(c)?, expr, *window),
        Command::Dynkin {
            class: c,
            blocks,
            per_block,
        } => dynkin(class(c)?, *blocks, *per_block),
        Command::Witt { class: c, m, n, table } => witt(class(c)?, *m, *n, *table),
        Command::Triple {
            class: c,
            index,
            diagonal,
            kind,
        } => triple(class(c)?, *index, *diagonal, *kind),
        Command::Relations {
            class: c,
            j_max,
            k_max,
            perturb,
        } => relations(class(c)?, *j_max, *k_max, perturb.as_deref()),
        Command::Jacobi {
            class: c,
            samples,
            seed,
            window,
        } => jacobi(class(c)?, *samples, *seed, *window),
    }
}

fn positive(name: &str, v: i64) -> Result<(), CliError> {
    if v < 1 {
        return Err(CliError::Input(format!("--{name} must be positive")));
    }
    Ok(())
}

fn cartan(c: &'static ClassData, blocks: i64, per_block: u64, perturb: Option<&str>) -> Result<Output, CliError> {
    positive("blocks", blocks)?;
    positive("per-block", per_block as i64)?;
    let a = BorcherdsCartanMatrix::new(c)?;
    let mut t = a.truncate(blocks, per_block)?;
    if let Some(v) = perturb {
        let v = parse_ints(v).map_err(CliError::Input)?;
        let [j, k, p, q, value] = v.as_slice() else {
            return Err(CliError::Input("--perturb expects j,k,p,q,value".into()));
        };
        let (i1, i2) = (BlockIndex::new(*j, *k as u64), BlockIndex::new(*p, *q as u64));
        if *k < 1 || *q < 1 || !t.set(i1, i2, *value) {
            return Err(CliError::Input(format!("{i1} or {i2} is outside the truncation")));
        }
    }
    let report = t.validate();
    let rank = t.rank();
    let half = |n: i64| BigRational::new(n.into(), 2.into());
    let relation = (blocks >= 2).then(|| {
        let lhs = t.combine_rows(&[(half(-1), BlockIndex::REAL), (half(3), BlockIndex::new(1, 1))]);
        let rhs = t.combine_rows(&[(BigRational::one(), BlockIndex::new(2, 1))]);
        lhs.is_some() && lhs == rhs
    });
    let slice = t.to_slice();
    let mut text = format!("class {}  blocks j <= {blocks}  per block k <= {per_block}\n", c.label);
    let width = slice.rows.iter().map(String::len).max().unwrap_or(0).max(4);
    text += &format!("{:>width$}", "");
    for col in &slice.cols {
        text += &format!(" {col:>width$}");
    }
    text.push('\n');
    for (row, entries) in slice.rows.iter().zip(&slice.entries) {
        text += &format!("{row:>width$}");
        for e in entries {
            text += &format!(" {e:>width$}");
        }
        text.push('\n');
    }
    let sizes: Vec<String> = slice.block_sizes.iter().map(|(j, s)| format!("{j}:{s}")).collect();
    text += &format!("block sizes: {}\n", sizes.join(" "));
    let status = |cond: &crate::cartan::Condition| match cond.witness {
        None => "pass".to_string(),
        Some((a, b)) => format!("FAIL at {a},{b}"),
    };
    text += &format!("B1 symmetric: {}\n", status(&report.b1));
    text += &format!("B2 off-diagonal <= 0: {}\n", status(&report.b2));
    text += &format!("B3 2a_ij/a_ii integral: {}\n", status(&report.b3));
    text += &format!("rank: {rank}\n");
    if let Some(ok) = relation {
        text += &format!(
            "row relation -1/2 R(-1,1) + 3/2 R(1,1) = R(2,1): {}\n",
            if ok { "pass" } else { "FAIL" }
        );
    }
    let pass = report.all_hold() && relation.unwrap_or(true);
    Ok(Output {
        text,
        json: json!({
            "class": c.label,
            "matrix": slice,
            "conditions": report,
            "rank": rank,
            "row_relation": relation,
            "pass": pass,
        }),
        pass,
    })
}

fn mult(c: &'static ClassData, m: i64, n: Exponent) -> Result<Output, CliError> {
    let (status, value) = match root_multiplicity(c, m, n)? {
        Multiplicity::Certified(v) => ("certified", Some(v.to_string())),
        Multiplicity::Uncertified => ("uncertified", None),
    };
    let text = format!("{}\n", value.clone().unwrap_or_else(|| status.to_string()));
    Ok(Output::ok(
        text,
        json!({
            "class": c.label,
            "m": m,
            "n": exponent_string(&n),
            "status": status,
            "multiplicity": value,
        }),
    ))
}

fn report_text(r: &IdentityReport) -> String {
    let mut s = format!(
        "identity: {}\nbounds: {}\npass: {}\n",
        r.identity, r.bounds, r.pass
    );
    if !r.residual_terms.is_empty() {
        s += "residual:\n";
        for t in &r.residual_terms {
            match t.p {
                Some(p) => s += &format!("p^{p}\tq^{}\t{}\n", t.q, t.coefficient),
                None => s += &format!("q^{}\t{}\n", t.q, t.coefficient),
            }
        }
    }
    s
}

fn reports_output(c: &ClassData, reports: Vec<IdentityReport>) -> Output {
    let pass = reports.iter().all(|r| r.pass);
    let text = reports.iter().map(report_text).collect::<Vec<_>>().join("\n");
    Output {
        text,
        json: json!({ "class": c.label, "reports": reports, "pass": pass }),
        pass,
    }
}

fn parse_perturbation(s: &str) -> Result<(i64, Exponent), CliError> {
    let (m, n) = s
        .split_once(',')
        .ok_or_else(|| CliError::Input(format!("--perturb expects m,n, got {s:?}")))?;
    let m = m
        .trim()
        .parse()
        .map_err(|_| CliError::Input(format!("bad integer {m:?}")))?;
    let n = parse_small_fraction(n).ok_or_else(|| CliError::Input(format!("bad exponent {n:?}")))?;
    Ok((m, n))
}

fn denom_check(c: &'static ClassData, p: i64, q: i64, perturb: Option<&str>) -> Result<Output, CliError> {
    positive("p", p)?;
    positive("q", q)?;
    let perturb = perturb.map(parse_perturbation).transpose()?;
    let wrap = |inner: &dyn RootExponents, f: &dyn Fn(&dyn RootExponents) -> Result<IdentityReport, MoonshineError>| {
        match perturb {
            Some((m, n)) => f(&PerturbedExponents {
                inner,
                m,
                n,
                delta: BigInt::one(),
            }),
            None => f(inner),
        }
    };
    let reports = match c.label {
        ClassLabel::A1 => vec![wrap(&MonsterExponents, &|e| verify_denominator_identity_with(e, p, q))?],
        ClassLabel::A2 => {
            let qb = Exponent::from_integer(q);
            vec![wrap(&SimpleRootExponents { class: c }, &|e| {
                verify_fricke_p0_consistency_with(c, e, qb)
            })?]
        }
        ClassLabel::B2 => {
            let qb = Exponent::from_integer(q);
            let row = match perturb {
                Some((m, n)) if n.is_zero() => Some((m, 1)),
                Some(_) => return Err(CliError::Input("2B multiplicities are perturbed at n = 0".into())),
                None => None,
            };
            vec![
                verify_theta_identity(qb)?,
                verify_2b_reciprocal_identity(qb)?,
                verify_2b_row0(p, row)?,
            ]
        }
    };
    Ok(reports_output(c, reports))
}

fn algebra(c: &'static ClassData, window: (i64, i64)) -> Result<MonsterAlgebra<BigRational>, CliError> {
    if window.0 < 1 || window.1 < 1 {
        return Err(CliError::Input("window must be positive".into()));
    }
    Ok(MonsterAlgebra::new(c, window)?)
}

fn bracket(c: &'static ClassData, src: &str, window: (i64, i64)) -> Result<Output, CliError> {
    let expr = parse_bracket_expression(src).map_err(|e| CliError::Parse(e.render(src)))?;
    let alg = algebra(c, window)?;
    let value = evaluate(&expr, &alg)?;
    let degree = value.homogeneous_degree().map(|(m, n)| vec![m, n]);
    Ok(Output::ok(
        format!("{value}\n"),
        json!({ "class": c.label, "input": src, "result": value.to_string(), "degree": degree }),
    ))
}

fn dynkin(c: &'static ClassData, blocks: i64, per_block: u64) -> Result<Output, CliError> {
    positive("blocks", blocks)?;
    positive("per-block", per_block as i64)?;
    let a = BorcherdsCartanMatrix::new(c)?;
    let t = a.truncate(blocks, per_block)?;
    let vertices = t.indices().to_vec();
    let mut edges = Vec::new();
    let mut text = String::new();
    for (x, a_) in vertices.iter().enumerate() {
        for b in &vertices[x + 1..] {
            let mult = a.dynkin_edge_multiplicity(*a_, *b)?;
            text += &format!("{a_} -- {b}: {mult}\n");
            edges.push(json!({ "a": a_.to_string(), "b": b.to_string(), "multiplicity": mult }));
        }
    }
    let labels: Vec<String> = vertices.iter().map(|v| v.to_string()).collect();
    Ok(Output::ok(
        text,
        json!({ "class": c.label, "vertices": labels, "edges": edges }),
    ))
}

fn witt(c: &'static ClassData, m: i64, n: Exponent, table: bool) -> Result<Output, CliError> {
    let scaled = n * Exponent::from_integer(c.level);
    if !scaled.is_integer() {
        return Err(MoonshineError::OffGrid {
            n: exponent_string(&n),
            level: c.level,
        }
        .into());
    }
    let d = (m, scaled.to_integer());
    positive("m", d.0)?;
    if d.1 < 1 {
        return Err(CliError::Input("--n must be positive".into()));
    }
    let g = fricke_generators(c, d)?;
    let dims = dimension_table(&g, d);
    let dim = dims.get(&d).cloned().unwrap_or_default();
    let mut text = format!("{dim}\n");
    let record = dimension_table_record(&dims);
    if table {
        for ((a, b), v) in dims.iter().filter(|((a, b), _)| *a >= 1 && *b >= 1) {
            let nb = exponent_string(&Exponent::new(*b, c.level));
            text += &format!("({a},{nb})\t{v}\n");
        }
    }
    let mut j = json!({
        "class": c.label,
        "m": m,
        "n": exponent_string(&n),
        "dimension": dim.to_string(),
    });
    if table {
        j["table"] = serde_json::to_value(record).expect("serializable");
    }
    Ok(Output::ok(text, j))
}

fn triple_output(r: TripleReport) -> Output {
    let mut text = format!("index: {}\ndiagonal: {}\nkind: {}\n", r.index, r.diagonal, r.kind);
    for x in &r.residuals {
        text += &format!("{}: {}\n", x.relation, x.residual);
    }
    text += &format!("pass: {}\n", r.pass);
    let pass = r.pass;
    Output {
        text,
        json: serde_json::to_value(&r).expect("serializable"),
        pass,
    }
}

fn triple(
    c: &'static ClassData,
    index: Option<(i64, i64)>,
    diagonal: Option<i64>,
    kind: Option<KindArg>,
) -> Result<Output, CliError> {
    let kind = kind.map(|k| match k {
        KindArg::Sl2 => TripleKind::Sl2,
        KindArg::Heisenberg => TripleKind::Heisenberg,
    });
    if let Some(a) = diagonal {
        return Ok(triple_output(check_synthetic_triple(a, kind)?));
    }
    if !c.fricke {
        // norm-zero simple roots of a non-Fricke algebra give Heisenberg triples
        let mut r = check_synthetic_triple(0, kind)?;
        r.index = format!("{} norm-zero simple root", c.label);
        return Ok(triple_output(r));
    }
    let (j, k) = index.unwrap_or((-1, 1));
    if k < 1 {
        return Err(CliError::Input("k must be at least 1".into()));
    }
    let window = (2, (j.abs() + 1).max(2));
    let alg = algebra(c, window)?;
    Ok(triple_output(check_index_triple(&alg, BlockIndex::new(j, k as u64), kind)?))
}

#[derive(Serialize)]
struct RelationRecord {
    relation: String,
    residual: String,
}

fn relations(c: &'static ClassData, j_max: i64, k_max: u64, perturb: Option<&str>) -> Result<Output, CliError> {
    positive("j-max", j_max)?;
    positive("k-max", k_max as i64)?;
    let alg = algebra(c, (j_max + 1, 2 * j_max + 1))?;
    let mut rels = alg.relation_suite(j_max, k_max)?;
    if let Some(prefix) = perturb {
        let r = rels
            .iter_mut()
            .find(|r| r.label.starts_with(prefix))
            .ok_or_else(|| CliError::Input(format!("no relation labelled {prefix:?}")))?;
        r.perturb();
    }
    let mut failures = Vec::new();
    for r in &rels {
        let res = r.residual();
        if !res.is_zero() {
            failures.push(RelationRecord {
                relation: r.label.clone(),
                residual: res.to_string(),
            });
        }
    }
    let indices: Vec<BlockIndex> = std::iter::once(BlockIndex::REAL)
        .chain((1..=j_max).flat_map(|j| (1..=k_max).map(move |k| BlockIndex::new(j, k))))
        .filter(|i| alg.matrix().validate_index(*i).is_ok())
        .collect();
    let mut centers = 0;
    for a in &indices {
        for b in &indices {
            let img = alg.center_image(*a, *b)?;
            centers += 1;
            if !img.is_zero() {
                failures.push(RelationRecord {
                    relation: format!("center image {a},{b}"),
                    residual: img.to_string(),
                });
            }
        }
    }
    let pass = failures.is_empty();
    let mut text = format!(
        "class {}: {} relations, {} center images, {} nonzero\n",
        c.label,
        rels.len(),
        centers,
        failures.len()
    );
    for f in &failures {
        text += &format!("{}: {}\n", f.relation, f.residual);
    }
    text += &format!("pass: {pass}\n");
    Ok(Output {
        text,
        json: json!({
            "class": c.label,
            "relations": rels.len(),
            "center_images": centers,
            "failures": failures,
            "pass": pass,
        }),
        pass,
    })
}

fn jacobi(c: &'static ClassData, samples: usize, seed: u64, window: (i64, i64)) -> Result<Output, CliError> {
    let alg = algebra(c, window)?;
    let sampler = ElementSampler::new(&alg, 2)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for _ in 0..samples {
        let [x, y, z] = sampler.triple(&mut rng);
        let r = jacobi_residual(&alg, &x, &y, &z)?;
        if !r.is_zero() {
            failures.push(json!({ "x": x.to_string(), "y": y.to_string(), "z": z.to_string(), "residual": r.to_string() }));
        }
    }
    let pass = failures.is_empty();
    let text = format!(
        "class {}: {samples} triples (seed {seed}), {} nonzero Jacobi residuals\npass: {pass}\n",
        c.label,
        failures.len()
    );
    Ok(Output {
        text,
        json: json!({ "class": c.label, "samples": samples, "seed": seed, "failures": failures, "pass": pass }),
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["borcherds"];
        full.extend_from_slice(args);
        let code = run(full, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn parse_examples() {
        let e = parse_bracket_expression("[e(0;1,1),f(0;1,1)]").unwrap();
        assert_eq!(
            e,
            Expr::Bracket(
                Box::new(Expr::E { l: 0, j: 1, k: 1 }),
                Box::new(Expr::F { l: 0, j: 1, k: 1 })
            )
        );
        let e = parse_bracket_expression(" 3/2 * [ h1 , e(-1) ] ").unwrap();
        assert!(matches!(e, Expr::Scale(_, _)));
        let err = parse_bracket_expression("e(1;1,1)").unwrap_err();
        assert_eq!(err.span, 0..8);
        assert!(err.message.contains("l <= j-1 = 0"));
        let err = parse_bracket_expression("[h1,h2").unwrap_err();
        assert!(err.message.contains("unbalanced"));
        let err = parse_bracket_expression("h1 + x3").unwrap_err();
        assert_eq!(err.span, 5..7);
        assert!(parse_bracket_expression("h1]").unwrap_err().message.contains("unbalanced"));
    }

    #[test]
    fn round_trip() {
        let alg = MonsterAlgebra::new(ClassData::get(ClassLabel::A1), (6, 6)).unwrap();
        for src in [
            "[e(-1),f(-1)]",
            "3/2*[h1,e(-1)] - 2*h2",
            "[[e(0;1,1),e(0;2,1)],e(1;2,2)]",
            "[f(-1),[f(0;3,1),f(0;1,2)]] + -1/3*f(2;3,1)",
            "0",
        ] {
            let v = evaluate(&parse_bracket_expression(src).unwrap(), &alg).unwrap();
            let again = evaluate(&parse_bracket_expression(&v.to_string()).unwrap(), &alg).unwrap();
            assert_eq!(v, again, "{src} -> {v}");
        }
    }

    #[test]
    fn command_examples() {
        assert_eq!(run_str(&["mult", "1A", "--m", "1", "--n", "1"]), (0, "196884\n".into(), String::new()));
        let (code, out, _) = run_str(&["bracket", "[e(-1),f(-1)]"]);
        assert_eq!((code, out.as_str()), (0, "h1 - h2\n"));
        let (code, out, _) = run_str(&["denom-check", "1A", "--p", "2", "--q", "2"]);
        assert_eq!(code, 0, "{out}");
        assert!(out.contains("pass: true"));
        let (code, _, err) = run_str(&["bracket", "e(1;1,1)"]);
        assert_eq!(code, 2);
        assert!(err.contains("l <= j-1"));
        let (code, out, _) = run_str(&["mult", "2A", "--m", "2", "--n", "1/2"]);
        assert_eq!((code, out.as_str()), (0, "uncertified\n"));
        assert_eq!(run_str(&["series", "3C", "--trunc", "2"]).0, 2);
    }

    #[test]
    fn perturbations_fail() {
        assert_eq!(run_str(&["denom-check", "1A", "--p", "2", "--q", "2", "--perturb", "1,1"]).0, 1);
        assert_eq!(run_str(&["cartan", "1A", "--blocks", "3", "--per-block", "2", "--perturb", "1,1,2,1,1"]).0, 1);
        assert_eq!(run_str(&["relations", "1A", "--j-max", "2", "--k-max", "2", "--perturb", "M:4c"]).0, 1);
        assert_eq!(run_str(&["triple", "1A", "--diagonal", "-4", "--kind", "heisenberg"]).0, 1);
    }

    #[test]
    fn structured_and_text_agree() {
        let (_, text, _) = run_str(&["witt", "1A", "--m", "2", "--n", "2"]);
        let (_, js, _) = run_str(&["--format", "json", "witt", "1A", "--m", "2", "--n", "2"]);
        let v: serde_json::Value = serde_json::from_str(&js).unwrap();
        assert_eq!(v["dimension"].as_str().unwrap(), text.trim());
    }
}
