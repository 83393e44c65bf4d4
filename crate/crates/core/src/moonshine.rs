//! Conjugacy-class data for 1A, 2A and 2B: McKay-Thompson series, their
//! Fricke transforms, root multiplicities and the identity checks built on
//! them.

use std::fmt;
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::qseries::{
    eta_quotient, exponent_string, j_series, product_exponents, product_side, theta4, BivariateSeries,
    Exponent, QSeries, RootExponents, SeriesError,
};
use crate::scalar::{fraction_string, Coefficient};

type Series = QSeries<BigRational>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MoonshineError {
    #[error("unknown conjugacy class {0:?} (known: 1A, 2A, 2B)")]
    UnknownClass(String),
    #[error("class {0} is not of Fricke type")]
    NotFricke(ClassLabel),
    #[error("exponent {n} is not in (1/{level})Z")]
    OffGrid { n: String, level: i64 },
    #[error("(0, 0) is not a root")]
    ZeroRoot,
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ClassLabel {
    #[serde(rename = "1A")]
    A1,
    #[serde(rename = "2A")]
    A2,
    #[serde(rename = "2B")]
    B2,
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassLabel::A1 => "1A",
            ClassLabel::A2 => "2A",
            ClassLabel::B2 => "2B",
        })
    }
}

impl FromStr for ClassLabel {
    type Err = MoonshineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "1A" => Ok(ClassLabel::A1),
            "2A" => Ok(ClassLabel::A2),
            "2B" => Ok(ClassLabel::B2),
            _ => Err(MoonshineError::UnknownClass(s.to_string())),
        }
    }
}

/// How the McKay-Thompson series of a class is built.
#[derive(Clone, Debug, PartialEq)]
pub enum SeriesRecipe {
    /// `E_4^3 / Delta - 744`.
    JFunction,
    /// `((eta(t)/eta(Nt))^a + w (eta(Nt)/eta(t))^a)^2 - constant`.
    SquaredEtaSum {
        level: i64,
        power: i64,
        weight: i64,
        constant: i64,
    },
    /// `prod eta(a_i tau)^{b_i}`.
    EtaProduct(Vec<(Exponent, i64)>),
}

/// How `T_g(-1/tau)` is obtained from `T_g`.
#[derive(Clone, Debug, PartialEq)]
pub enum FrickeRecipe {
    /// `T_g(-1/tau) = T_g(tau)`.
    Invariant,
    /// `T_g(-1/tau) = T_g(tau/N)`.
    Rescale,
    /// `T_g(-1/tau) = k / T_g(tau/N)`.
    Reciprocal { numerator: i64 },
}

/// Per-class record. Instances live in a static registry.
#[derive(Debug)]
pub struct ClassData {
    pub label: ClassLabel,
    pub level: i64,
    pub fricke: bool,
    pub recipe: SeriesRecipe,
    pub fricke_recipe: FrickeRecipe,
    transform_cache: Mutex<Option<Series>>,
}

impl ClassData {
    fn new(label: ClassLabel, level: i64, fricke: bool, recipe: SeriesRecipe, fricke_recipe: FrickeRecipe) -> Self {
        Self {
            label,
            level,
            fricke,
            recipe,
            fricke_recipe,
            transform_cache: Mutex::new(None),
        }
    }

    pub fn get(label: ClassLabel) -> &'static ClassData {
        registry()
            .iter()
            .find(|c| c.label == label)
            .expect("every label is registered")
    }

    pub fn lookup(label: &str) -> Result<&'static ClassData, MoonshineError> {
        Ok(Self::get(label.parse()?))
    }

    /// The exponent grid `(1/N)Z` step.
    pub fn step(&self) -> Exponent {
        Ratio::new(1, self.level)
    }

    pub fn require_fricke(&self) -> Result<(), MoonshineError> {
        if self.fricke {
            Ok(())
        } else {
            Err(MoonshineError::NotFricke(self.label))
        }
    }

    /// `T_g(-1/tau)` certified below `trunc`, through a shared cache.
    pub fn cached_transform(&self, trunc: Exponent) -> Series {
        let mut guard = self.transform_cache.lock().expect("transform cache poisoned");
        if let Some(s) = guard.as_ref() {
            if s.truncation().map_or(true, |t| t >= trunc) {
                return s.with_truncation(trunc);
            }
        }
        let have = guard
            .as_ref()
            .and_then(|s| s.truncation())
            .unwrap_or_else(|| Exponent::from_integer(8));
        let target = trunc.max(have * Exponent::from_integer(2));
        let s = fricke_transform::<BigRational>(self, target);
        *guard = Some(s.clone());
        s.with_truncation(trunc)
    }
}

fn registry() -> &'static [ClassData] {
    static REGISTRY: OnceLock<Vec<ClassData>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        vec![
            ClassData::new(ClassLabel::A1, 1, true, SeriesRecipe::JFunction, FrickeRecipe::Invariant),
            ClassData::new(
                ClassLabel::A2,
                2,
                true,
                SeriesRecipe::SquaredEtaSum {
                    level: 2,
                    power: 12,
                    weight: 64,
                    constant: 104,
                },
                FrickeRecipe::Rescale,
            ),
            ClassData::new(
                ClassLabel::B2,
                2,
                false,
                SeriesRecipe::EtaProduct(vec![(Exponent::one(), 24), (Exponent::from_integer(2), -24)]),
                FrickeRecipe::Reciprocal { numerator: 4096 },
            ),
        ]
    })
}

/// The McKay-Thompson series `T_g`, certified below `trunc`.
pub fn mckay_thompson<C: Coefficient>(class: &ClassData, trunc: Exponent) -> QSeries<C> {
    match &class.recipe {
        SeriesRecipe::JFunction => j_series(trunc),
        SeriesRecipe::SquaredEtaSum {
            level,
            power,
            weight,
            constant,
        } => {
            let one = Exponent::one();
            let n = Exponent::from_integer(*level);
            let a = eta_quotient::<C>(&[(one, *power), (n, -*power)], trunc + one);
            let b = eta_quotient::<C>(&[(one, -*power), (n, *power)], trunc + one).scale(&C::from_i64(*weight));
            let s = a.add_series(&b);
            s.mul_series(&s)
                .sub_series(&QSeries::monomial(C::from_i64(*constant), Exponent::zero()))
                .with_truncation(trunc)
        }
        SeriesRecipe::EtaProduct(factors) => eta_quotient(factors, trunc),
    }
}

/// `T_g(-1/tau)` as a series in `q^{1/N}`, certified below `trunc`.
pub fn fricke_transform<C: Coefficient>(class: &ClassData, trunc: Exponent) -> QSeries<C> {
    let n = Exponent::from_integer(class.level);
    match class.fricke_recipe {
        FrickeRecipe::Invariant => mckay_thompson(class, trunc),
        FrickeRecipe::Rescale => mckay_thompson::<C>(class, trunc * n)
            .substitute_power(class.step())
            .expect("positive factor")
            .with_truncation(trunc),
        FrickeRecipe::Reciprocal { numerator } => {
            // T(tau/N) = q^{-1/N}(...) certified below T'/N; its inverse is
            // certified below T'/N + 2/N.
            let inner = (trunc * n).ceil();
            mckay_thompson::<C>(class, inner)
                .substitute_power(class.step())
                .expect("positive factor")
                .invert()
                .expect("leading coefficient 1")
                .scale(&C::from_i64(numerator))
                .with_truncation(trunc)
        }
    }
}

/// The closed form `2^12 eta(tau)^24 / eta(tau/2)^24` of `T_2B(-1/tau)`.
pub fn fricke_transform_2b_eta<C: Coefficient>(trunc: Exponent) -> QSeries<C> {
    eta_quotient::<C>(&[(Exponent::one(), 24), (Ratio::new(1, 2), -24)], trunc).scale(&C::from_i64(4096))
}

/// `(2 eta(tau) / theta_4(tau))^12`.
pub fn theta_form_2b<C: Coefficient>(trunc: Exponent) -> QSeries<C> {
    let margin = trunc + Exponent::one();
    let e = eta_quotient::<C>(&[(Exponent::one(), 1)], margin).scale(&C::from_i64(2));
    let ratio = e.mul_series(&theta4::<C>(margin).invert().expect("theta_4 has constant term 1"));
    ratio.pow(12).expect("non-negative power").with_truncation(trunc)
}

fn on_grid(class: &ClassData, n: Exponent) -> Result<(), MoonshineError> {
    if (n * Exponent::from_integer(class.level)).is_integer() {
        Ok(())
    } else {
        Err(MoonshineError::OffGrid {
            n: exponent_string(&n),
            level: class.level,
        })
    }
}

fn integer_coeff(s: &Series, e: Exponent) -> BigInt {
    let c = s.coeff(e).expect("certified");
    Coefficient::to_integer(&c).expect("moonshine coefficients are integers")
}

/// `c(1, n)`: the coefficient of `q^n` in `T_g(-1/tau)`. For Fricke classes
/// `c(1, -1/N) = 1` is the real simple root.
pub fn simple_root_multiplicity(class: &ClassData, n: Exponent) -> Result<BigInt, MoonshineError> {
    on_grid(class, n)?;
    let s = class.cached_transform(n + class.step());
    Ok(integer_coeff(&s, n))
}

/// Coefficient `c(n)` of `J`.
pub fn monster_coefficient(n: i64) -> BigInt {
    if n < -1 {
        return BigInt::zero();
    }
    simple_root_multiplicity(ClassData::get(ClassLabel::A1), Exponent::from_integer(n)).expect("integer exponent")
}

/// Multiplicity of the root `(m, n)` of the Monster Lie algebra: `c(mn)`,
/// which is 1 for the real roots `(1,-1)`, `(-1,1)` and 0 for non-roots.
pub fn monster_multiplicity(m: i64, n: i64) -> Result<BigInt, MoonshineError> {
    if m == 0 && n == 0 {
        return Err(MoonshineError::ZeroRoot);
    }
    let mn = m * n;
    Ok(if mn == 0 || mn < -1 {
        BigInt::zero()
    } else {
        monster_coefficient(mn)
    })
}

/// `c(m, 0)` for 2B, from the closed form: 24 for odd `m`, 0 for even `m`.
pub fn multiplicity_2b_row0(m: u64) -> i64 {
    if m % 2 == 1 {
        24
    } else {
        0
    }
}

/// `c(m, 0)` for 2B for `m = 1..=m_max`, read off the product expansion of
/// `q T_2B(tau)`.
pub fn multiplicity_2b_row0_from_series(m_max: i64) -> Result<Vec<BigInt>, MoonshineError> {
    let class = ClassData::get(ClassLabel::B2);
    let t = mckay_thompson::<BigRational>(class, Exponent::from_integer(m_max));
    let f = t.shift(Exponent::one());
    Ok(product_exponents(&f, m_max)?)
}

/// A root multiplicity together with whether it is backed by data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Multiplicity {
    Certified(BigInt),
    /// Outside the region where the class's multiplicities are known.
    Uncertified,
}

/// Multiplicity of `(m, n)` for any registered class, where certified.
pub fn root_multiplicity(class: &ClassData, m: i64, n: Exponent) -> Result<Multiplicity, MoonshineError> {
    on_grid(class, n)?;
    if m == 0 && n.is_zero() {
        return Err(MoonshineError::ZeroRoot);
    }
    if class.label == ClassLabel::A1 {
        return Ok(Multiplicity::Certified(monster_multiplicity(m, n.to_integer())?));
    }
    // roots come in +- pairs
    let (m, n) = if m < 0 || (m == 0 && n < Exponent::zero()) {
        (-m, -n)
    } else {
        (m, n)
    };
    if m == 1 {
        return Ok(Multiplicity::Certified(simple_root_multiplicity(class, n)?));
    }
    if class.label == ClassLabel::B2 && n.is_zero() {
        return Ok(Multiplicity::Certified(BigInt::from(multiplicity_2b_row0(m as u64))));
    }
    Ok(Multiplicity::Uncertified)
}

/// `c(m, n) = c(mn)` for the Monster Lie algebra.
#[derive(Clone, Copy, Debug, Default)]
pub struct MonsterExponents;

impl RootExponents for MonsterExponents {
    fn level(&self) -> i64 {
        1
    }

    fn min_n(&self, m: i64) -> Exponent {
        if m == 1 {
            -Exponent::one()
        } else {
            Exponent::zero()
        }
    }

    fn exponent(&self, m: i64, n: Exponent) -> Result<BigInt, SeriesError> {
        Ok(monster_multiplicity(m, n.to_integer()).unwrap_or_default())
    }
}

/// The `m = 1` row `c(1, n)` of a Fricke class; other rows are uncertified.
#[derive(Clone, Copy, Debug)]
pub struct SimpleRootExponents {
    pub class: &'static ClassData,
}

impl RootExponents for SimpleRootExponents {
    fn level(&self) -> i64 {
        self.class.level
    }

    fn min_n(&self, _m: i64) -> Exponent {
        -self.class.step()
    }

    fn exponent(&self, m: i64, n: Exponent) -> Result<BigInt, SeriesError> {
        if m != 1 {
            return Err(SeriesError::Uncertified {
                m,
                n: exponent_string(&n),
            });
        }
        simple_root_multiplicity(self.class, n).map_err(|e| match e {
            MoonshineError::Series(s) => s,
            other => SeriesError::Uncertified {
                m: 1,
                n: other.to_string(),
            },
        })
    }
}

/// Another exponent table with one entry shifted by `delta`.
pub struct PerturbedExponents<'a> {
    pub inner: &'a dyn RootExponents,
    pub m: i64,
    pub n: Exponent,
    pub delta: BigInt,
}

impl RootExponents for PerturbedExponents<'_> {
    fn level(&self) -> i64 {
        self.inner.level()
    }

    fn min_n(&self, m: i64) -> Exponent {
        self.inner.min_n(m)
    }

    fn exponent(&self, m: i64, n: Exponent) -> Result<BigInt, SeriesError> {
        let base = self.inner.exponent(m, n)?;
        Ok(if (m, n) == (self.m, self.n) { base + &self.delta } else { base })
    }
}

// ---------------------------------------------------------------------------
// Identity checks

/// One nonzero coefficient of a residual.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResidualTerm {
    /// `p`-exponent, for two-variable identities.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<i64>,
    pub q: String,
    pub coefficient: String,
}

/// Machine-readable outcome of an identity check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    pub identity: String,
    pub bounds: String,
    pub residual_terms: Vec<ResidualTerm>,
    pub pass: bool,
}

impl IdentityReport {
    fn from_series(identity: &str, bounds: String, residual: &Series) -> Self {
        let residual_terms: Vec<ResidualTerm> = residual
            .terms()
            .map(|(e, c)| ResidualTerm {
                p: None,
                q: exponent_string(&e),
                coefficient: fraction_string(c),
            })
            .collect();
        Self {
            identity: identity.to_string(),
            bounds,
            pass: residual_terms.is_empty(),
            residual_terms,
        }
    }

    fn from_bivariate(identity: &str, bounds: String, residual: &BivariateSeries<BigRational>) -> Self {
        let residual_terms: Vec<ResidualTerm> = residual
            .nonzero_terms()
            .into_iter()
            .map(|(p, e, c)| ResidualTerm {
                p: Some(p),
                q: exponent_string(&e),
                coefficient: fraction_string(&c),
            })
            .collect();
        Self {
            identity: identity.to_string(),
            bounds,
            pass: residual_terms.is_empty(),
            residual_terms,
        }
    }
}

/// `J(p) - J(q)` as a two-variable series for `p^{-1}..p^{p_bound}` and
/// `q`-exponents `<= q_bound`.
pub fn j_difference(p_bound: i64, q_bound: i64) -> BivariateSeries<BigRational> {
    let qb = Exponent::from_integer(q_bound);
    let t = qb + Exponent::one();
    let j = ClassData::get(ClassLabel::A1).cached_transform(t.max(Exponent::from_integer(p_bound + 1)));
    let coeffs = (-1..=p_bound)
        .map(|a| {
            let s = if a == 0 {
                j.with_truncation(t).neg_series()
            } else {
                let c = j.coeff_at(a).expect("certified");
                QSeries::monomial(c, Exponent::zero()).with_truncation(t)
            };
            (a, s)
        })
        .collect();
    BivariateSeries::new(coeffs, -1, p_bound)
}

/// Residual of `J(p) - J(q) = p^{-1} prod (1 - p^m q^n)^{c(m,n)}` using the
/// given exponents.
pub fn verify_denominator_identity_with(
    exponents: &dyn RootExponents,
    p_bound: i64,
    q_bound: i64,
) -> Result<IdentityReport, MoonshineError> {
    let lhs = j_difference(p_bound, q_bound);
    let rhs = product_side::<BigRational>(exponents, p_bound, Exponent::from_integer(q_bound))?;
    Ok(IdentityReport::from_bivariate(
        "J(p) - J(q) = p^-1 prod (1 - p^m q^n)^c(mn)",
        format!("p <= {p_bound}, q <= {q_bound}"),
        &lhs.sub(&rhs),
    ))
}

/// The Monster denominator identity up to the given degrees.
pub fn verify_denominator_identity(p_bound: i64, q_bound: i64) -> Result<IdentityReport, MoonshineError> {
    verify_denominator_identity_with(&MonsterExponents, p_bound, q_bound)
}

/// Checks that the `p^0` coefficient of the product side built from `c(1, n)`
/// is `-f(q^{1/N})` with `f(q^{1/N}) = T_g(-1/tau)`.
pub fn verify_fricke_p0_consistency_with(
    class: &ClassData,
    exponents: &dyn RootExponents,
    q_bound: Exponent,
) -> Result<IdentityReport, MoonshineError> {
    class.require_fricke()?;
    let rhs = product_side::<BigRational>(exponents, 0, q_bound)?;
    let f = class.cached_transform(q_bound + class.step());
    let p0 = rhs.p_coeff(0).expect("p^0 present");
    let residual = f.neg_series().sub_series(p0);
    Ok(IdentityReport::from_series(
        "p^0 coefficient of p^-1 prod (1 - p^m q^n)^c(m,n) = -f(q^(1/N))",
        format!("q <= {}", exponent_string(&q_bound)),
        &residual,
    ))
}

pub fn verify_fricke_p0_consistency(class: &'static ClassData, q_bound: Exponent) -> Result<IdentityReport, MoonshineError> {
    verify_fricke_p0_consistency_with(class, &SimpleRootExponents { class }, q_bound)
}

/// `T_2B(-1/tau) - (2 eta(tau)/theta_4(tau))^12` through `q^{q_bound}`.
pub fn verify_theta_identity(q_bound: Exponent) -> Result<IdentityReport, MoonshineError> {
    let step = Ratio::new(1, 2);
    let t = q_bound + step;
    let lhs = fricke_transform::<BigRational>(ClassData::get(ClassLabel::B2), t);
    let rhs = theta_form_2b::<BigRational>(t);
    let residual = lhs.sub_series(&rhs).certified_through(q_bound, step)?;
    Ok(IdentityReport::from_series(
        "T_2B(-1/tau) = (2 eta(tau) / theta_4(tau))^12",
        format!("q <= {}", exponent_string(&q_bound)),
        &residual,
    ))
}

/// `T_2B(-1/tau) T_2B(tau/2) - 2^12` through `q^{q_bound}`.
pub fn verify_2b_reciprocal_identity(q_bound: Exponent) -> Result<IdentityReport, MoonshineError> {
    let class = ClassData::get(ClassLabel::B2);
    let step = Ratio::new(1, 2);
    let t = q_bound + Exponent::one();
    let transformed = fricke_transform::<BigRational>(class, t + step);
    let half = mckay_thompson::<BigRational>(class, (t + step) * Exponent::from_integer(2))
        .substitute_power(step)
        .expect("positive factor");
    let prod = transformed.mul_series(&half);
    let residual = prod
        .sub_series(&QSeries::monomial(BigRational::from_integer(4096.into()), Exponent::zero()))
        .certified_through(q_bound, step)?;
    Ok(IdentityReport::from_series(
        "T_2B(-1/tau) T_2B(tau/2) = 2^12",
        format!("q <= {}", exponent_string(&q_bound)),
        &residual,
    ))
}

/// Compares `c(m, 0)` for 2B read off the product expansion of `q T_2B`
/// with the closed form (24 for odd `m`, 0 for even), `m = 1..=m_max`.
/// `perturb` shifts one closed-form value.
pub fn verify_2b_row0(m_max: i64, perturb: Option<(i64, i64)>) -> Result<IdentityReport, MoonshineError> {
    let from_series = multiplicity_2b_row0_from_series(m_max)?;
    let residual_terms: Vec<ResidualTerm> = from_series
        .iter()
        .zip(1..)
        .filter_map(|(c, m)| {
            let mut want = BigInt::from(multiplicity_2b_row0(m as u64));
            if let Some((pm, delta)) = perturb {
                if pm == m {
                    want += delta;
                }
            }
            let diff = c - want;
            (!diff.is_zero()).then(|| ResidualTerm {
                p: Some(m),
                q: "0".into(),
                coefficient: format!("{diff}/1"),
            })
        })
        .collect();
    Ok(IdentityReport {
        identity: "c(m, 0) = 24 for odd m, 0 for even m".into(),
        bounds: format!("m <= {m_max}"),
        pass: residual_terms.is_empty(),
        residual_terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qseries::FnExponents;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn r(n: i64, d: i64) -> Exponent {
        Ratio::new(n, d)
    }

    fn int(n: i64) -> Exponent {
        Exponent::from_integer(n)
    }

    #[test]
    fn labels_round_trip() {
        for l in [ClassLabel::A1, ClassLabel::A2, ClassLabel::B2] {
            assert_eq!(l.to_string().parse::<ClassLabel>().unwrap(), l);
        }
        assert!(matches!(ClassData::lookup("3A"), Err(MoonshineError::UnknownClass(_))));
        assert!(!ClassData::get(ClassLabel::B2).fricke);
        assert_eq!(ClassData::get(ClassLabel::A1).level, 1);
    }

    #[test]
    fn t2a_expansion() {
        let t = mckay_thompson::<BigRational>(ClassData::get(ClassLabel::A2), int(5));
        let j2a = &t + &QSeries::monomial(q(104), int(0));
        let want = [(-1, 1), (0, 104), (1, 4372), (2, 96256), (3, 1240002), (4, 10698752)];
        for (e, c) in want {
            assert_eq!(j2a.coeff_at(e), Some(q(c)), "q^{e}");
        }
        assert_eq!(t.coeff_at(0), Some(q(0)));
    }

    #[test]
    fn t2a_half_substitution() {
        let s = fricke_transform::<BigRational>(ClassData::get(ClassLabel::A2), int(2));
        assert_eq!(s.coeff(r(1, 2)), Some(q(4372)));
        assert_eq!(s.coeff(r(-1, 2)), Some(q(1)));
    }

    #[test]
    fn t2b_leading_and_transform() {
        let class = ClassData::get(ClassLabel::B2);
        let t = mckay_thompson::<BigRational>(class, int(3));
        assert_eq!(t.leading(), Some((int(-1), &q(1))));
        let f = fricke_transform::<BigRational>(class, int(2));
        assert_eq!(f.coeff(r(1, 2)), Some(q(4096)));
        assert_eq!(f.coeff(int(1)), Some(q(98304)));
        assert_eq!(f.coeff(r(3, 2)), Some(q(1228800)));
        assert_eq!(f, fricke_transform_2b_eta(int(2)));
        // 2^12 (q^{1/2} + 24 q + 300 q^{3/2})
        assert_eq!(f.coeff(r(3, 2)).unwrap(), q(4096 * 300));
    }

    #[test]
    fn one_a_is_fixed_by_transform() {
        let c = ClassData::get(ClassLabel::A1);
        assert_eq!(
            fricke_transform::<BigRational>(c, int(4)),
            mckay_thompson::<BigRational>(c, int(4))
        );
    }

    #[test]
    fn simple_roots() {
        let a2 = ClassData::get(ClassLabel::A2);
        assert_eq!(simple_root_multiplicity(a2, int(1)).unwrap(), BigInt::from(96256));
        assert_eq!(simple_root_multiplicity(a2, r(3, 2)).unwrap(), BigInt::from(1240002));
        assert_eq!(simple_root_multiplicity(a2, r(-1, 2)).unwrap(), BigInt::one());
        let b2 = ClassData::get(ClassLabel::B2);
        assert_eq!(simple_root_multiplicity(b2, r(1, 2)).unwrap(), BigInt::from(4096));
        assert!(simple_root_multiplicity(a2, r(1, 3)).is_err());
    }

    #[test]
    fn monster_multiplicities() {
        assert_eq!(monster_multiplicity(1, 1).unwrap(), BigInt::from(196884));
        assert_eq!(monster_multiplicity(1, -1).unwrap(), BigInt::one());
        assert_eq!(monster_multiplicity(-1, 1).unwrap(), BigInt::one());
        assert_eq!(monster_multiplicity(2, -2).unwrap(), BigInt::zero());
        assert_eq!(monster_multiplicity(3, 0).unwrap(), BigInt::zero());
        assert_eq!(monster_multiplicity(2, 3).unwrap(), monster_coefficient(6));
        assert!(monster_multiplicity(0, 0).is_err());
    }

    #[test]
    fn row0_for_2b() {
        assert_eq!(multiplicity_2b_row0(2), 0);
        assert_eq!(multiplicity_2b_row0(3), 24);
        assert_eq!(multiplicity_2b_row0(7), 24);
        let from_series = multiplicity_2b_row0_from_series(15).unwrap();
        for (i, c) in from_series.iter().enumerate() {
            assert_eq!(*c, BigInt::from(multiplicity_2b_row0(i as u64 + 1)));
        }
    }

    #[test]
    fn certified_region() {
        let a2 = ClassData::get(ClassLabel::A2);
        assert_eq!(root_multiplicity(a2, 2, int(1)).unwrap(), Multiplicity::Uncertified);
        assert_eq!(
            root_multiplicity(a2, 1, r(1, 2)).unwrap(),
            Multiplicity::Certified(BigInt::from(4372))
        );
        let b2 = ClassData::get(ClassLabel::B2);
        assert_eq!(
            root_multiplicity(b2, 5, int(0)).unwrap(),
            Multiplicity::Certified(BigInt::from(24))
        );
        assert_eq!(root_multiplicity(b2, 2, int(1)).unwrap(), Multiplicity::Uncertified);
    }

    #[test]
    fn small_denominator_identity() {
        let rep = verify_denominator_identity(1, 1).unwrap();
        assert!(rep.pass, "{rep:?}");
        // p^0 coefficient of the product side is -J(q)
        let rhs = product_side::<BigRational>(&MonsterExponents, 1, int(1)).unwrap();
        let p0 = rhs.p_coeff(0).unwrap();
        assert_eq!(p0.coeff_at(-1), Some(q(-1)));
        assert_eq!(p0.coeff_at(0), Some(q(0)));
        assert_eq!(p0.coeff_at(1), Some(q(-196884)));
    }

    #[test]
    fn perturbed_exponent_is_detected() {
        let bumped = FnExponents {
            level: 1,
            min_n: int(-1),
            f: |m: i64, n: Exponent| {
                let base = MonsterExponents.exponent(m, n)?;
                Ok(if m == 1 && n == int(1) { base + 1 } else { base })
            },
        };
        let rep = verify_denominator_identity_with(&bumped, 2, 2).unwrap();
        assert!(!rep.pass);
        let first = &rep.residual_terms[0];
        assert_eq!((first.p, first.q.as_str()), (Some(0), "1"));
    }

    #[test]
    fn fricke_p0_for_2a() {
        let a2 = ClassData::get(ClassLabel::A2);
        let rep = verify_fricke_p0_consistency(a2, int(3)).unwrap();
        assert!(rep.pass, "{rep:?}");
        let missing = FnExponents {
            level: 2,
            min_n: r(-1, 2),
            f: |m: i64, n: Exponent| {
                if n == r(-1, 2) {
                    Ok(BigInt::zero())
                } else {
                    SimpleRootExponents { class: ClassData::get(ClassLabel::A2) }.exponent(m, n)
                }
            },
        };
        let bad = verify_fricke_p0_consistency_with(a2, &missing, int(3)).unwrap();
        assert!(!bad.pass);
        assert_eq!(bad.residual_terms[0].q, "-1/2");
        let a1 = ClassData::get(ClassLabel::A1);
        assert!(verify_fricke_p0_consistency(a1, int(4)).unwrap().pass);
        assert!(verify_fricke_p0_consistency(ClassData::get(ClassLabel::B2), int(1)).is_err());
    }

    #[test]
    fn theta_and_reciprocal_identities() {
        assert!(verify_theta_identity(int(3)).unwrap().pass);
        assert!(verify_theta_identity(r(1, 2)).unwrap().pass);
        assert!(verify_2b_reciprocal_identity(int(5)).unwrap().pass);
    }
}
