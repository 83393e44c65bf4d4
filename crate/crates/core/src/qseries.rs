//! Exact truncated Laurent series in fractional powers of `q`.
//!
//! A [`QSeries`] stores its exponents as integer numerators over a single
//! normalized denominator `D`, so `q^{1/2}`, `q^{1/24}` and ordinary integer
//! powers all live on an exact grid. Every series carries a truncation order:
//! coefficients are certified only strictly below it. Arithmetic always
//! computes the tightest truncation that is still valid for its result.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{fraction_string, parse_fraction, parse_small_fraction, small_fraction_string, Coefficient};

/// Exponents of `q` are small exact rationals.
pub type Exponent = Ratio<i64>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("cannot invert a series with no certified nonzero term")]
    NotInvertible,
    #[error("leading coefficient is not a unit of the coefficient ring")]
    NonUnitLeading,
    #[error("an exact series with more than one term needs a truncation order before inversion")]
    NeedsTruncation,
    #[error("substitution factor must be positive, got {0}")]
    NonPositiveFactor(String),
    #[error("multiplicity c({m}, {n}) lies outside the certified region")]
    Uncertified { m: i64, n: String },
    #[error("coefficient at q^{0} is not an integer")]
    NotIntegral(String),
    #[error("requested bound needs coefficients beyond the truncation order {0}")]
    InsufficientPrecision(String),
    #[error("malformed series text at line {line}: {message}")]
    Parse { line: usize, message: String },
}

fn tmin(a: Option<Exponent>, b: Option<Exponent>) -> Option<Exponent> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

fn below(num: i64, den: i64, trunc: Option<Exponent>) -> bool {
    trunc.map_or(true, |t| Ratio::new(num, den) < t)
}

/// Truncated formal Laurent series `sum c_e q^e` with `e` in `(1/D)Z`.
#[derive(Clone, Debug, PartialEq)]
pub struct QSeries<C> {
    denom: i64,
    terms: BTreeMap<i64, C>,
    /// `None` means the series is exact (a Laurent polynomial).
    trunc: Option<Exponent>,
}

impl<C: Coefficient> QSeries<C> {
    fn build(denom: i64, terms: BTreeMap<i64, C>, trunc: Option<Exponent>) -> Self {
        let mut terms: BTreeMap<i64, C> = terms
            .into_iter()
            .filter(|(e, c)| !c.is_zero() && below(*e, denom, trunc))
            .collect();
        let mut g = denom;
        for e in terms.keys() {
            g = g.gcd(e);
            if g == 1 {
                break;
            }
        }
        if terms.is_empty() {
            g = denom;
        }
        let denom = if g > 1 {
            terms = terms.into_iter().map(|(e, c)| (e / g, c)).collect();
            denom / g
        } else {
            denom
        };
        Self { denom, terms, trunc }
    }

    /// The zero series certified below `trunc`.
    pub fn zero(trunc: Exponent) -> Self {
        Self::build(1, BTreeMap::new(), Some(trunc))
    }

    pub fn exact_zero() -> Self {
        Self::build(1, BTreeMap::new(), None)
    }

    /// The exact constant `1`.
    pub fn one() -> Self {
        Self::monomial(C::one(), Exponent::zero())
    }

    /// The exact monomial `c q^e`.
    pub fn monomial(c: C, e: Exponent) -> Self {
        Self::from_terms([(e, c)], None)
    }

    /// Builds a series from `(exponent, coefficient)` pairs. Repeated
    /// exponents are summed; pairs at or beyond `trunc` are dropped.
    pub fn from_terms<I>(terms: I, trunc: Option<Exponent>) -> Self
    where
        I: IntoIterator<Item = (Exponent, C)>,
    {
        let terms: Vec<(Exponent, C)> = terms.into_iter().collect();
        let denom = terms.iter().fold(1i64, |d, (e, _)| d.lcm(e.denom()));
        let mut map: BTreeMap<i64, C> = BTreeMap::new();
        for (e, c) in terms {
            let num = e.numer() * (denom / e.denom());
            let slot = map.entry(num).or_insert_with(C::zero);
            *slot = slot.clone() + c;
        }
        Self::build(denom, map, trunc)
    }

    /// `sum_{i} coeffs[i] q^{start + i*step}`, certified below `trunc`.
    pub fn from_coefficients<I>(start: Exponent, step: Exponent, coeffs: I, trunc: Option<Exponent>) -> Self
    where
        I: IntoIterator<Item = C>,
    {
        Self::from_terms(
            coeffs
                .into_iter()
                .enumerate()
                .map(|(i, c)| (start + step * Exponent::from_integer(i as i64), c)),
            trunc,
        )
    }

    /// The normalized denominator `D`: every exponent lies in `(1/D)Z`.
    pub fn denominator(&self) -> i64 {
        self.denom
    }

    /// Coefficients are certified for exponents strictly below this value;
    /// `None` for exact series.
    pub fn truncation(&self) -> Option<Exponent> {
        self.trunc
    }

    pub fn is_exact(&self) -> bool {
        self.trunc.is_none()
    }

    /// Whether no nonzero term is certified.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of `q^e`, or `None` if `e` is not certified.
    pub fn coeff(&self, e: Exponent) -> Option<C> {
        if !below(*e.numer(), *e.denom(), self.trunc) {
            return None;
        }
        if self.denom % e.denom() != 0 {
            return Some(C::zero());
        }
        let num = e.numer() * (self.denom / e.denom());
        Some(self.terms.get(&num).cloned().unwrap_or_else(C::zero))
    }

    /// Coefficient of `q^n` for integer `n`.
    pub fn coeff_at(&self, n: i64) -> Option<C> {
        self.coeff(Exponent::from_integer(n))
    }

    /// Nonzero terms in ascending exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (Exponent, &C)> + '_ {
        let d = self.denom;
        self.terms.iter().map(move |(e, c)| (Ratio::new(*e, d), c))
    }

    /// Lowest exponent carrying a nonzero certified coefficient.
    pub fn valuation(&self) -> Option<Exponent> {
        self.terms.keys().next().map(|e| Ratio::new(*e, self.denom))
    }

    pub fn leading(&self) -> Option<(Exponent, &C)> {
        self.terms().next()
    }

    /// Lowers the truncation order to `min(current, t)`.
    pub fn with_truncation(&self, t: Exponent) -> Self {
        Self::build(self.denom, self.terms.clone(), tmin(self.trunc, Some(t)))
    }

    /// Keeps exactly the exponents `<= bound`, and asserts that they are
    /// certified.
    pub fn certified_through(&self, bound: Exponent, step: Exponent) -> Result<Self, SeriesError> {
        let t = bound + step;
        if let Some(tr) = self.trunc {
            if tr < t {
                return Err(SeriesError::InsufficientPrecision(small_fraction_string(&tr)));
            }
        }
        Ok(self.with_truncation(t))
    }

    pub fn scale(&self, c: &C) -> Self {
        Self::build(
            self.denom,
            self.terms.iter().map(|(e, x)| (*e, x.clone() * c.clone())).collect(),
            self.trunc,
        )
    }

    /// Multiplication by `q^r`.
    pub fn shift(&self, r: Exponent) -> Self {
        Self::from_terms(
            self.terms().map(|(e, c)| (e + r, c.clone())),
            self.trunc.map(|t| t + r),
        )
    }

    fn rescaled(&self, d: i64) -> impl Iterator<Item = (i64, &C)> + '_ {
        let f = d / self.denom;
        self.terms.iter().map(move |(e, c)| (e * f, c))
    }

    fn combine(&self, other: &Self, sign: bool) -> Self {
        let d = self.denom.lcm(&other.denom);
        let mut map: BTreeMap<i64, C> = self.rescaled(d).map(|(e, c)| (e, c.clone())).collect();
        for (e, c) in other.rescaled(d) {
            let slot = map.entry(e).or_insert_with(C::zero);
            *slot = if sign {
                slot.clone() + c.clone()
            } else {
                slot.clone() - c.clone()
            };
        }
        Self::build(d, map, tmin(self.trunc, other.trunc))
    }

    pub fn add_series(&self, other: &Self) -> Self {
        self.combine(other, true)
    }

    pub fn sub_series(&self, other: &Self) -> Self {
        self.combine(other, false)
    }

    pub fn neg_series(&self) -> Self {
        Self::build(
            self.denom,
            self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect(),
            self.trunc,
        )
    }

    /// Cauchy product. The result is certified below
    /// `min(T_a + v_b, T_b + v_a)`.
    pub fn mul_series(&self, other: &Self) -> Self {
        let lowest = |s: &Self| s.valuation().or(s.trunc);
        let (va, vb) = (lowest(self), lowest(other));
        let ta = match (self.trunc, vb) {
            (Some(t), Some(v)) => Some(t + v),
            (Some(_), None) => None,
            (None, _) => None,
        };
        let tb = match (other.trunc, va) {
            (Some(t), Some(v)) => Some(t + v),
            (Some(_), None) => None,
            (None, _) => None,
        };
        let trunc = tmin(ta, tb);
        // An exact zero operand yields an exact zero.
        if (self.is_exact() && self.is_zero()) || (other.is_exact() && other.is_zero()) {
            return Self::exact_zero();
        }
        let d = self.denom.lcm(&other.denom);
        let a: Vec<(i64, &C)> = self.rescaled(d).collect();
        let b: Vec<(i64, &C)> = other.rescaled(d).collect();
        let mut map: BTreeMap<i64, C> = BTreeMap::new();
        for (ea, ca) in &a {
            for (eb, cb) in &b {
                let e = ea + eb;
                if !below(e, d, trunc) {
                    break;
                }
                let slot = map.entry(e).or_insert_with(C::zero);
                *slot = slot.clone() + (*ca).clone() * (*cb).clone();
            }
        }
        Self::build(d, map, trunc)
    }

    /// Multiplicative inverse. For a series `c q^v (1 + ...)` certified below
    /// `T`, the inverse is certified below `T - 2v`.
    pub fn invert(&self) -> Result<Self, SeriesError> {
        let (v, c) = self.leading().ok_or(SeriesError::NotInvertible)?;
        let inv_c = c.try_inverse().ok_or(SeriesError::NonUnitLeading)?;
        let t = match self.trunc {
            None if self.terms.len() == 1 => return Ok(Self::monomial(inv_c, -v)),
            None => return Err(SeriesError::NeedsTruncation),
            Some(t) => t,
        };
        let d = self.denom;
        let v_num = *self.terms.keys().next().expect("nonempty");
        let span = (t - v) * Exponent::from_integer(d);
        let len = span.ceil().to_integer().max(0) as usize;
        let mut a = vec![C::zero(); len];
        for (e, x) in &self.terms {
            let i = (e - v_num) as usize;
            if i < len {
                a[i] = x.clone();
            }
        }
        let mut b: Vec<C> = Vec::with_capacity(len);
        if len > 0 {
            b.push(inv_c.clone());
        }
        for i in 1..len {
            let mut acc = C::zero();
            for k in 1..=i {
                if !a[k].is_zero() {
                    acc = acc + a[k].clone() * b[i - k].clone();
                }
            }
            b.push(-(acc * inv_c.clone()));
        }
        let map = b
            .into_iter()
            .enumerate()
            .map(|(i, x)| (i as i64 - v_num, x))
            .collect();
        Ok(Self::build(d, map, Some(t - v - v)))
    }

    /// Integer power; negative exponents go through [`QSeries::invert`].
    pub fn pow(&self, e: i64) -> Result<Self, SeriesError> {
        if e < 0 {
            return self.invert()?.pow(-e);
        }
        let mut result = Self::one();
        let mut base = self.clone();
        let mut n = e as u64;
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul_series(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul_series(&base);
            }
        }
        Ok(result)
    }

    /// The substitution `q -> q^r`, i.e. `tau -> r tau`.
    pub fn substitute_power(&self, r: Exponent) -> Result<Self, SeriesError> {
        if r <= Exponent::zero() {
            return Err(SeriesError::NonPositiveFactor(small_fraction_string(&r)));
        }
        Ok(Self::from_terms(
            self.terms().map(|(e, c)| (e * r, c.clone())),
            self.trunc.map(|t| t * r),
        ))
    }

    /// The coefficients as exact integers, or the first exponent where a
    /// coefficient is not integral.
    pub fn integer_coefficients(&self) -> Result<Vec<(Exponent, BigInt)>, SeriesError> {
        self.terms()
            .map(|(e, c)| {
                c.to_integer()
                    .map(|n| (e, n))
                    .ok_or_else(|| SeriesError::NotIntegral(small_fraction_string(&e)))
            })
            .collect()
    }

    pub fn is_integral(&self) -> bool {
        self.integer_coefficients().is_ok()
    }
}

impl<C: Coefficient> Add for &QSeries<C> {
    type Output = QSeries<C>;
    fn add(self, rhs: Self) -> QSeries<C> {
        self.add_series(rhs)
    }
}

impl<C: Coefficient> Sub for &QSeries<C> {
    type Output = QSeries<C>;
    fn sub(self, rhs: Self) -> QSeries<C> {
        self.sub_series(rhs)
    }
}

impl<C: Coefficient> Mul for &QSeries<C> {
    type Output = QSeries<C>;
    fn mul(self, rhs: Self) -> QSeries<C> {
        self.mul_series(rhs)
    }
}

impl<C: Coefficient> Neg for &QSeries<C> {
    type Output = QSeries<C>;
    fn neg(self) -> QSeries<C> {
        self.neg_series()
    }
}

impl<C: Coefficient> Add for QSeries<C> {
    type Output = QSeries<C>;
    fn add(self, rhs: Self) -> QSeries<C> {
        self.add_series(&rhs)
    }
}

impl<C: Coefficient> Sub for QSeries<C> {
    type Output = QSeries<C>;
    fn sub(self, rhs: Self) -> QSeries<C> {
        self.sub_series(&rhs)
    }
}

impl<C: Coefficient> Mul for QSeries<C> {
    type Output = QSeries<C>;
    fn mul(self, rhs: Self) -> QSeries<C> {
        self.mul_series(&rhs)
    }
}

impl<C: Coefficient> Neg for QSeries<C> {
    type Output = QSeries<C>;
    fn neg(self) -> QSeries<C> {
        self.neg_series()
    }
}

// ---------------------------------------------------------------------------
// Serialization (exact rationals only)

/// One `exponent, coefficient` pair of the structured form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermRecord {
    pub exponent: String,
    pub coefficient: String,
}

/// Structured form of a series: `{denominator, truncation, terms}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesRecord {
    pub denominator: i64,
    /// `null` for exact series.
    pub truncation: Option<String>,
    pub terms: Vec<TermRecord>,
}

fn exponent_from_text(s: &str, line: usize) -> Result<Exponent, SeriesError> {
    parse_small_fraction(s).ok_or_else(|| SeriesError::Parse {
        line,
        message: format!("bad exponent {s:?}"),
    })
}

impl QSeries<BigRational> {
    /// Line-oriented text form. A header line `# truncation T` (or
    /// `# truncation exact`) is followed by one `exponent<TAB>num/den` line
    /// per nonzero term, exponents ascending.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match self.trunc {
            Some(t) => writeln!(out, "# truncation {}", small_fraction_string(&t)),
            None => writeln!(out, "# truncation exact"),
        }
        .expect("write to string");
        for (e, c) in self.terms() {
            writeln!(out, "{}\t{}", small_fraction_string(&e), fraction_string(c)).expect("write to string");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, SeriesError> {
        let mut trunc = None;
        let mut saw_header = false;
        let mut terms = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let l = raw.trim_end_matches('\r');
            if l.trim().is_empty() {
                continue;
            }
            if let Some(rest) = l.strip_prefix('#') {
                if let Some(t) = rest.trim().strip_prefix("truncation") {
                    let t = t.trim();
                    trunc = if t == "exact" { None } else { Some(exponent_from_text(t, line)?) };
                    saw_header = true;
                }
                continue;
            }
            let (e, c) = l.split_once('\t').ok_or_else(|| SeriesError::Parse {
                line,
                message: "expected exponent<TAB>coefficient".into(),
            })?;
            let e = exponent_from_text(e, line)?;
            let c = parse_fraction(c).ok_or_else(|| SeriesError::Parse {
                line,
                message: format!("bad coefficient {c:?}"),
            })?;
            if let Some(t) = trunc {
                if e >= t {
                    return Err(SeriesError::Parse {
                        line,
                        message: "term at or beyond the truncation order".into(),
                    });
                }
            }
            terms.push((e, c));
        }
        if !saw_header {
            return Err(SeriesError::Parse {
                line: 1,
                message: "missing `# truncation` header".into(),
            });
        }
        Ok(Self::from_terms(terms, trunc))
    }

    pub fn to_record(&self) -> SeriesRecord {
        SeriesRecord {
            denominator: self.denom,
            truncation: self.trunc.map(|t| small_fraction_string(&t)),
            terms: self
                .terms()
                .map(|(e, c)| TermRecord {
                    exponent: small_fraction_string(&e),
                    coefficient: fraction_string(c),
                })
                .collect(),
        }
    }

    pub fn from_record(record: &SeriesRecord) -> Result<Self, SeriesError> {
        let trunc = record
            .truncation
            .as_deref()
            .map(|t| exponent_from_text(t, 0))
            .transpose()?;
        let mut terms = Vec::with_capacity(record.terms.len());
        for (i, t) in record.terms.iter().enumerate() {
            let e = exponent_from_text(&t.exponent, i + 1)?;
            let c = parse_fraction(&t.coefficient).ok_or_else(|| SeriesError::Parse {
                line: i + 1,
                message: format!("bad coefficient {:?}", t.coefficient),
            })?;
            terms.push((e, c));
        }
        let s = Self::from_terms(terms, trunc);
        if s.denom != record.denominator {
            return Err(SeriesError::Parse {
                line: 0,
                message: format!(
                    "denominator {} is not the normalized value {}",
                    record.denominator, s.denom
                ),
            });
        }
        Ok(s)
    }
}

// ---------------------------------------------------------------------------
// Modular building blocks

/// `prod_{n >= 1} (1 - q^{step n})`, certified below `trunc`.
pub fn euler_product<C: Coefficient>(step: Exponent, trunc: Exponent) -> QSeries<C> {
    // number of multiples i*step below trunc
    let len = if trunc <= Exponent::zero() {
        0
    } else {
        (trunc / step).ceil().to_integer() as usize
    };
    let mut p = vec![C::zero(); len];
    if len > 0 {
        p[0] = C::one();
    }
    for n in 1..len {
        for i in (n..len).rev() {
            if !p[i - n].is_zero() {
                p[i] = p[i].clone() - p[i - n].clone();
            }
        }
    }
    QSeries::from_coefficients(Exponent::zero(), step, p, Some(trunc))
}

/// The eta quotient `prod_i eta(a_i tau)^{b_i}` for `(a_i, b_i)` in
/// `factors`, certified below `trunc`.
pub fn eta_quotient<C: Coefficient>(factors: &[(Exponent, i64)], trunc: Exponent) -> QSeries<C> {
    let v: Exponent = factors
        .iter()
        .map(|(a, b)| a * Exponent::from_integer(*b) / Exponent::from_integer(24))
        .sum();
    let inner = trunc - v;
    let mut acc = QSeries::<C>::one().with_truncation(inner);
    for (a, b) in factors {
        // unit constant term, so powers and inverses lose no precision
        let f = euler_product::<C>(*a, inner)
            .pow(*b)
            .expect("Euler product has unit constant term");
        acc = acc.mul_series(&f);
    }
    acc.shift(v).with_truncation(trunc)
}

/// `eta(scale * tau) = q^{scale/24} prod_{n >= 1} (1 - q^{scale n})`.
pub fn eta<C: Coefficient>(scale: Exponent, trunc: Exponent) -> QSeries<C> {
    eta_quotient(&[(scale, 1)], trunc)
}

/// `theta_4(tau) = eta(tau/2)^2 / eta(tau)`.
pub fn theta4<C: Coefficient>(trunc: Exponent) -> QSeries<C> {
    eta_quotient(&[(Ratio::new(1, 2), 2), (Exponent::one(), -1)], trunc)
}

/// `sum_{n in Z} (-1)^n q^{n^2/2}`, the same function as [`theta4`].
pub fn theta4_sum<C: Coefficient>(trunc: Exponent) -> QSeries<C> {
    let mut terms = Vec::new();
    let mut n: i64 = 0;
    while Ratio::new(n * n, 2) < trunc {
        let sign = if n % 2 == 0 { C::one() } else { -C::one() };
        terms.push((Ratio::new(n * n, 2), sign.clone()));
        if n > 0 {
            terms.push((Ratio::new(n * n, 2), sign));
        }
        n += 1;
    }
    QSeries::from_terms(terms, Some(trunc))
}

fn sigma3(n: u64) -> BigInt {
    let mut s = BigInt::zero();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            s += BigInt::from(d).pow(3);
            let e = n / d;
            if e != d {
                s += BigInt::from(e).pow(3);
            }
        }
        d += 1;
    }
    s
}

/// Eisenstein series `E_4 = 1 + 240 sum sigma_3(n) q^n`.
pub fn eisenstein_e4<C: Coefficient>(trunc: Exponent) -> QSeries<C> {
    let top = if trunc <= Exponent::zero() {
        0
    } else {
        trunc.ceil().to_integer() as u64
    };
    let terms = (0..top).map(|n| {
        let c = if n == 0 {
            BigInt::one()
        } else {
            sigma3(n) * 240
        };
        (Exponent::from_integer(n as i64), C::from_bigint(&c))
    });
    QSeries::from_terms(terms, Some(trunc))
}

/// The discriminant `Delta = eta(tau)^24 = q prod (1 - q^n)^24`.
pub fn discriminant<C: Coefficient>(trunc: Exponent) -> QSeries<C> {
    eta_quotient(&[(Exponent::one(), 24)], trunc)
}

/// `J(q) = E_4^3 / Delta - 744 = q^{-1} + 196884 q + ...`, certified below
/// `trunc`.
pub fn j_series<C: Coefficient>(trunc: Exponent) -> QSeries<C> {
    let one = Exponent::one();
    let e4 = eisenstein_e4::<C>(trunc + one);
    let delta = discriminant::<C>(trunc + one + one);
    let j = e4
        .pow(3)
        .expect("non-negative power")
        .mul_series(&delta.invert().expect("Delta has leading coefficient 1"));
    j.sub_series(&QSeries::monomial(C::from_i64(744), Exponent::zero()))
        .with_truncation(trunc)
}

/// Generalized binomial coefficient `binom(c, k)` for any integer `c`.
pub fn binomial(c: &BigInt, k: u64) -> BigInt {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k {
        num *= c - BigInt::from(i);
        den *= BigInt::from(i + 1);
    }
    num / den
}

/// Recovers exponents `a_m` with `f = prod_{m >= 1} (1 - q^m)^{a_m}` for a
/// power series `f` with constant term 1, for `m = 1..=m_max`.
pub fn product_exponents<C: Coefficient>(f: &QSeries<C>, m_max: i64) -> Result<Vec<BigInt>, SeriesError> {
    let trunc = f.truncation().unwrap_or_else(|| Exponent::from_integer(m_max + 1));
    if trunc <= Exponent::from_integer(m_max) {
        return Err(SeriesError::InsufficientPrecision(small_fraction_string(&trunc)));
    }
    let mut g = f.with_truncation(trunc);
    let mut out = Vec::with_capacity(m_max as usize);
    for m in 1..=m_max {
        let c = g.coeff_at(m).expect("certified");
        let a = (-c)
            .to_integer()
            .ok_or_else(|| SeriesError::NotIntegral(m.to_string()))?;
        if !a.is_zero() {
            // divide out (1 - q^m)^a
            let corr = binomial_series::<C>(Exponent::from_integer(m), &(-&a), trunc);
            g = g.mul_series(&corr);
        }
        out.push(a);
    }
    Ok(out)
}

/// `(1 - q^{step})^c` as a series certified below `trunc`.
pub fn binomial_series<C: Coefficient>(step: Exponent, c: &BigInt, trunc: Exponent) -> QSeries<C> {
    let mut terms = Vec::new();
    let mut k: u64 = 0;
    while step * Exponent::from_integer(k as i64) < trunc {
        let b = binomial(c, k);
        if !c.is_negative() && b.is_zero() {
            break;
        }
        let b = if k % 2 == 1 { -b } else { b };
        terms.push((step * Exponent::from_integer(k as i64), C::from_bigint(&b)));
        k += 1;
    }
    QSeries::from_terms(terms, Some(trunc))
}

// ---------------------------------------------------------------------------
// Two-variable products

/// Exponents `c(m, n)` of a product `p^{-1} prod (1 - p^m q^n)^{c(m,n)}`.
pub trait RootExponents {
    /// `n` ranges over `(1/N)Z`.
    fn level(&self) -> i64;

    /// Smallest `n` with possibly nonzero `c(m, n)`.
    fn min_n(&self, m: i64) -> Exponent;

    /// `c(m, n)`, or [`SeriesError::Uncertified`] outside the known region.
    fn exponent(&self, m: i64, n: Exponent) -> Result<BigInt, SeriesError>;
}

/// Adapter turning a closure into a [`RootExponents`].
pub struct FnExponents<F> {
    pub level: i64,
    pub min_n: Exponent,
    pub f: F,
}

impl<F> RootExponents for FnExponents<F>
where
    F: Fn(i64, Exponent) -> Result<BigInt, SeriesError>,
{
    fn level(&self) -> i64 {
        self.level
    }

    fn min_n(&self, _m: i64) -> Exponent {
        self.min_n
    }

    fn exponent(&self, m: i64, n: Exponent) -> Result<BigInt, SeriesError> {
        (self.f)(m, n)
    }
}

/// A series in `p` whose coefficients are q-series, certified for
/// `p`-exponents in `p_min..=p_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct BivariateSeries<C> {
    coeffs: BTreeMap<i64, QSeries<C>>,
    p_min: i64,
    p_max: i64,
}

impl<C: Coefficient> BivariateSeries<C> {
    /// Every `p` in `p_min..=p_max` must be present in `coeffs`.
    pub fn new(coeffs: BTreeMap<i64, QSeries<C>>, p_min: i64, p_max: i64) -> Self {
        debug_assert!((p_min..=p_max).all(|p| coeffs.contains_key(&p)));
        Self { coeffs, p_min, p_max }
    }

    pub fn p_range(&self) -> std::ops::RangeInclusive<i64> {
        self.p_min..=self.p_max
    }

    /// The q-series coefficient of `p^a`.
    pub fn p_coeff(&self, a: i64) -> Option<&QSeries<C>> {
        self.coeffs.get(&a)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let p_min = self.p_min.max(other.p_min);
        let p_max = self.p_max.min(other.p_max);
        let coeffs = (p_min..=p_max)
            .map(|p| (p, self.coeffs[&p].sub_series(&other.coeffs[&p])))
            .collect();
        Self { coeffs, p_min, p_max }
    }

    /// All nonzero `(p, q, coefficient)` triples, ordered by `p` then `q`.
    pub fn nonzero_terms(&self) -> Vec<(i64, Exponent, C)> {
        self.coeffs
            .iter()
            .flat_map(|(p, s)| s.terms().map(move |(e, c)| (*p, e, c.clone())))
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.values().all(|s| s.is_zero())
    }

    /// Restricts every coefficient to q-exponents `<= q_bound`.
    pub fn certified_through(&self, q_bound: Exponent, step: Exponent) -> Result<Self, SeriesError> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(p, s)| Ok((*p, s.certified_through(q_bound, step)?)))
            .collect::<Result<_, SeriesError>>()?;
        Ok(Self {
            coeffs,
            p_min: self.p_min,
            p_max: self.p_max,
        })
    }
}

/// Expands `p^{-1} prod_{m > 0, n in (1/N)Z} (1 - p^m q^n)^{c(m,n)}` exactly
/// for `p`-exponents `-1..=p_bound` and `q`-exponents `<= q_bound`.
pub fn product_side<C: Coefficient>(
    source: &dyn RootExponents,
    p_bound: i64,
    q_bound: Exponent,
) -> Result<BivariateSeries<C>, SeriesError> {
    let level = source.level();
    let step = Ratio::new(1, level);
    let top = p_bound + 1; // largest p-power inside the product
    // Total q-degree that factors with negative n can remove from a p^a
    // coefficient.
    let mut margin = Exponent::zero();
    for m in 1..=top.max(0) {
        let lo = source.min_n(m);
        if lo < Exponent::zero() {
            margin += -lo * Exponent::from_integer(top / m);
        }
    }
    let cut = q_bound + step + margin;

    let mut acc: BTreeMap<i64, QSeries<C>> = (0..=top.max(0))
        .map(|p| {
            let s = if p == 0 {
                QSeries::one().with_truncation(cut)
            } else {
                QSeries::zero(cut)
            };
            (p, s)
        })
        .collect();

    for m in 1..=top {
        let mut n = source.min_n(m);
        // align to the (1/N) grid
        n = (n * Exponent::from_integer(level)).ceil() / Exponent::from_integer(level);
        while n < cut {
            let c = source.exponent(m, n)?;
            if !c.is_zero() {
                let kmax = (top / m) as u64;
                let coefs: Vec<BigInt> = (1..=kmax)
                    .map(|k| {
                        let b = binomial(&c, k);
                        if k % 2 == 1 {
                            -b
                        } else {
                            b
                        }
                    })
                    .collect();
                for p in (m..=top).rev() {
                    let mut add = acc[&p].clone();
                    for (idx, b) in coefs.iter().enumerate() {
                        let k = idx as i64 + 1;
                        if m * k > p || b.is_zero() {
                            continue;
                        }
                        let src = &acc[&(p - m * k)];
                        let term = src.shift(n * Exponent::from_integer(k)).scale(&C::from_bigint(b));
                        add = add.add_series(&term);
                    }
                    acc.insert(p, add);
                }
            }
            n += step;
        }
    }

    let coeffs: BTreeMap<i64, QSeries<C>> = acc.into_iter().map(|(p, s)| (p - 1, s)).collect();
    BivariateSeries::new(coeffs, -1, p_bound).certified_through(q_bound, step)
}

/// Helper for diagnostics: exponents as exact fraction strings.
pub fn exponent_string(e: &Exponent) -> String {
    small_fraction_string(e)
}
