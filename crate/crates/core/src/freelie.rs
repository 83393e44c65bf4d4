//! Free Lie algebras on Z^2-graded alphabets: Lyndon words, their standard
//! bracketings, rewriting of bracket trees into the Lyndon basis, and graded
//! dimensions from the product identity
//! `prod_b (1 - z^b)^{dim L_b} = 1 - sum_g mult_g z^g`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::cartan::BorcherdsCartanMatrix;
use crate::moonshine::{ClassData, MoonshineError};
use crate::qseries::binomial;
use crate::scalar::Coefficient;

/// `(m, n)`; for a class of level `N` the second coordinate counts `1/N`.
pub type Degree = (i64, i64);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FreeLieError {
    #[error("generator degree ({0}, {1}) is not in the closed positive quadrant minus the origin")]
    BadDegree(i64, i64),
    #[error("generator multiplicity must be positive")]
    BadMultiplicity,
    #[error("{count} Lyndon monomials exceed the enumeration cap {cap}")]
    CapExceeded { count: BigInt, cap: usize },
    #[error("degree bound must be positive in both coordinates")]
    BadBound,
    #[error(transparent)]
    Moonshine(#[from] MoonshineError),
}

/// The free generator `e_{l,jk} = (ad e_{-1})^l e_{jk}`. The derived order is
/// lexicographic in `(j, k, l)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Gen {
    pub j: i64,
    pub k: u64,
    pub l: u32,
}

impl Gen {
    pub fn new(l: u32, j: i64, k: u64) -> Self {
        Self { j, k, l }
    }

    /// `(1 + l, j - l)`.
    pub fn degree(&self) -> Degree {
        (1 + self.l as i64, self.j - self.l as i64)
    }
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e({};{},{})", self.l, self.j, self.k)
    }
}

/// Letters of a restricted alphabet built from a [`GeneratorSet`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    Gen(Gen),
    Named { name: String, k: u64 },
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Letter::Gen(g) => g.fmt(f),
            Letter::Named { name, k: 1 } => f.write_str(name),
            Letter::Named { name, k } => write!(f, "{name}_{k}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum FamilyLabel {
    /// The family `e_{l,jk}` for fixed `(l, j)`, indexed by `k`.
    Fricke { l: u32, j: i64 },
    Named(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GeneratorFamily {
    pub label: FamilyLabel,
    pub degree: Degree,
    #[serde(serialize_with = "serialize_bigint")]
    pub multiplicity: BigInt,
}

fn serialize_bigint<S: serde::Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

impl GeneratorFamily {
    fn letter(&self, k: u64) -> Letter {
        match &self.label {
            FamilyLabel::Fricke { l, j } => Letter::Gen(Gen::new(*l, *j, k)),
            FamilyLabel::Named(name) => Letter::Named { name: name.clone(), k },
        }
    }
}

/// Generators of a free Lie algebra grouped into families that share a
/// degree. Multiplicities stay symbolic so blocks of size `c(j)` cost nothing.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GeneratorSet {
    families: Vec<GeneratorFamily>,
}

impl GeneratorSet {
    pub fn new(families: Vec<GeneratorFamily>) -> Result<Self, FreeLieError> {
        for f in &families {
            let (m, n) = f.degree;
            if m < 0 || n < 0 || (m, n) == (0, 0) {
                return Err(FreeLieError::BadDegree(m, n));
            }
            if !f.multiplicity.is_positive() {
                return Err(FreeLieError::BadMultiplicity);
            }
        }
        Ok(Self { families })
    }

    /// One generator per degree, named `x0`, `x1`, ... in order.
    pub fn from_degrees(degrees: &[Degree]) -> Result<Self, FreeLieError> {
        Self::new(
            degrees
                .iter()
                .enumerate()
                .map(|(i, d)| GeneratorFamily {
                    label: FamilyLabel::Named(format!("x{i}")),
                    degree: *d,
                    multiplicity: BigInt::one(),
                })
                .collect(),
        )
    }

    pub fn families(&self) -> &[GeneratorFamily] {
        &self.families
    }

    /// Total multiplicity of generators at each degree.
    pub fn multiplicities(&self) -> BTreeMap<Degree, BigInt> {
        let mut out: BTreeMap<Degree, BigInt> = BTreeMap::new();
        for f in &self.families {
            *out.entry(f.degree).or_default() += &f.multiplicity;
        }
        out
    }

    /// Keeps at most `k_cap` generators from each family.
    pub fn restrict(&self, k_cap: u64) -> Self {
        let families = self
            .families
            .iter()
            .map(|f| GeneratorFamily {
                multiplicity: f.multiplicity.clone().min(BigInt::from(k_cap)),
                ..f.clone()
            })
            .filter(|f| f.multiplicity.is_positive())
            .collect();
        Self { families }
    }

    /// Every generator as an explicit letter; only sensible after
    /// [`GeneratorSet::restrict`].
    pub fn letters(&self) -> Vec<(Letter, Degree)> {
        let mut out: Vec<(Letter, Degree)> = self
            .families
            .iter()
            .flat_map(|f| {
                let count = f.multiplicity.to_u64().unwrap_or(u64::MAX);
                (1..=count).map(move |k| (f.letter(k), f.degree))
            })
            .collect();
        out.sort();
        out
    }
}

/// Generators `e_{l,jk}` of `u^+` whose degree `(1+l, j-l)` lies in the box
/// `[1, bound.0] x [1, bound.1]`, with multiplicity equal to the block size.
pub fn fricke_generators(class: &'static ClassData, bound: Degree) -> Result<GeneratorSet, FreeLieError> {
    let a = BorcherdsCartanMatrix::new(class).map_err(|e| match e {
        crate::cartan::CartanError::Moonshine(m) => FreeLieError::Moonshine(m),
        _ => FreeLieError::BadBound,
    })?;
    if bound.0 < 1 || bound.1 < 1 {
        return Err(FreeLieError::BadBound);
    }
    let mut families = Vec::new();
    for j in 1..=bound.0 - 1 + bound.1 {
        let size = match a.block_size(j) {
            Ok(s) => s,
            Err(crate::cartan::CartanError::Moonshine(m)) => return Err(m.into()),
            Err(_) => return Err(FreeLieError::BadBound),
        };
        for l in 0..j as u32 {
            let g = Gen::new(l, j, 1);
            let (m, n) = g.degree();
            if m <= bound.0 && n <= bound.1 && size.is_positive() {
                families.push(GeneratorFamily {
                    label: FamilyLabel::Fricke { l, j },
                    degree: (m, n),
                    multiplicity: size.clone(),
                });
            }
        }
    }
    GeneratorSet::new(families)
}

/// Graded dimensions of the free Lie algebra on `g` for every degree in the
/// box `[0, d.0] x [0, d.1]` (the origin excluded).
///
/// Degrees are processed by total degree and then lexicographically. At each
/// degree `b` the coefficient of `z^b` in the product of the factors found so
/// far is `P[b]`, and the identity forces `dim L_b = P[b] + mult_b`.
pub fn dimension_table(g: &GeneratorSet, d: Degree) -> BTreeMap<Degree, BigInt> {
    let mut table = BTreeMap::new();
    if d.0 < 0 || d.1 < 0 {
        return table;
    }
    let (w, h) = (d.0 as usize + 1, d.1 as usize + 1);
    let mult = g.multiplicities();
    let mut order: Vec<Degree> = (0..=d.0)
        .flat_map(|m| (0..=d.1).map(move |n| (m, n)))
        .filter(|&b| b != (0, 0))
        .collect();
    order.sort_by_key(|&(m, n)| (m + n, m, n));

    let mut prod = vec![vec![BigInt::zero(); h]; w];
    prod[0][0] = BigInt::one();
    for b in order {
        let dim = &prod[b.0 as usize][b.1 as usize] + mult.get(&b).cloned().unwrap_or_default();
        if !dim.is_zero() {
            let old = prod.clone();
            let mut k = 1u64;
            loop {
                let (km, kn) = (b.0 * k as i64, b.1 * k as i64);
                if km > d.0 || kn > d.1 {
                    break;
                }
                let mut c = binomial(&dim, k);
                if k % 2 == 1 {
                    c = -c;
                }
                if !c.is_zero() {
                    for m in 0..w - km as usize {
                        for n in 0..h - kn as usize {
                            if !old[m][n].is_zero() {
                                prod[m + km as usize][n + kn as usize] += &c * &old[m][n];
                            }
                        }
                    }
                }
                k += 1;
            }
        }
        table.insert(b, dim);
    }
    table
}

/// Dimension of the degree-`d` component of the free Lie algebra on `g`.
pub fn graded_dimension(g: &GeneratorSet, d: Degree) -> BigInt {
    dimension_table(g, d).remove(&d).unwrap_or_default()
}

/// `{"(m,n)": "dim"}` for every degree in the box with `m, n >= 1`.
pub fn dimension_table_record(table: &BTreeMap<Degree, BigInt>) -> BTreeMap<String, String> {
    table
        .iter()
        .filter(|((m, n), _)| *m >= 1 && *n >= 1)
        .map(|((m, n), v)| (format!("({m},{n})"), v.to_string()))
        .collect()
}

/// True if `w` is strictly smaller than each of its proper suffixes.
pub fn is_lyndon<L: Ord>(w: &[L]) -> bool {
    !w.is_empty() && (1..w.len()).all(|i| w < &w[i..])
}

/// `w = uv` with `v` the longest proper Lyndon suffix; `None` for letters.
pub fn standard_factorization<L: Ord>(w: &[L]) -> Option<(&[L], &[L])> {
    (1..w.len()).find(|&i| is_lyndon(&w[i..])).map(|i| w.split_at(i))
}

/// A binary bracket expression over letters.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BracketTree<L> {
    Leaf(L),
    Node(Box<BracketTree<L>>, Box<BracketTree<L>>),
}

impl<L: Clone + Ord> BracketTree<L> {
    pub fn node(a: BracketTree<L>, b: BracketTree<L>) -> Self {
        BracketTree::Node(Box::new(a), Box::new(b))
    }

    /// Standard bracketing of a Lyndon word.
    pub fn standard(w: &[L]) -> Self {
        match standard_factorization(w) {
            None => BracketTree::Leaf(w[0].clone()),
            Some((u, v)) => Self::node(Self::standard(u), Self::standard(v)),
        }
    }

    pub fn leaves(&self) -> Vec<L> {
        match self {
            BracketTree::Leaf(x) => vec![x.clone()],
            BracketTree::Node(a, b) => {
                let mut out = a.leaves();
                out.extend(b.leaves());
                out
            }
        }
    }

    /// Image in the free associative algebra, `[a,b] = ab - ba`.
    pub fn expand<C: Coefficient>(&self) -> BTreeMap<Vec<L>, C> {
        match self {
            BracketTree::Leaf(x) => BTreeMap::from([(vec![x.clone()], C::one())]),
            BracketTree::Node(a, b) => {
                let (ea, eb) = (a.expand::<C>(), b.expand::<C>());
                let mut out = BTreeMap::new();
                for (u, cu) in &ea {
                    for (v, cv) in &eb {
                        let c = cu.clone() * cv.clone();
                        add_term(&mut out, [u.as_slice(), v].concat(), c.clone());
                        add_term(&mut out, [v.as_slice(), u].concat(), -c);
                    }
                }
                out
            }
        }
    }
}

impl<L: fmt::Display> fmt::Display for BracketTree<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BracketTree::Leaf(x) => x.fmt(f),
            BracketTree::Node(a, b) => write!(f, "[{a},{b}]"),
        }
    }
}

/// A Lyndon word with its degree; its standard bracketing is a basis vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LyndonMonomial<L> {
    pub word: Vec<L>,
    pub degree: Degree,
}

impl<L: Clone + Ord + fmt::Display> fmt::Display for LyndonMonomial<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        BracketTree::standard(&self.word).fmt(f)
    }
}

pub(crate) fn add_term<K: Ord, C: Coefficient>(map: &mut BTreeMap<K, C>, key: K, c: C) {
    use std::collections::btree_map::Entry;
    if c.is_zero() {
        return;
    }
    match map.entry(key) {
        Entry::Vacant(e) => {
            e.insert(c);
        }
        Entry::Occupied(mut e) => {
            let s = e.get().clone() + c;
            if s.is_zero() {
                e.remove();
            } else {
                *e.get_mut() = s;
            }
        }
    }
}

/// Element of a free Lie algebra in the Lyndon basis.
pub type LieCombination<L, C> = BTreeMap<Vec<L>, C>;

/// `[u, v]` for Lyndon words `u`, `v`, in the Lyndon basis.
///
/// For `u < v`: if `u` is a letter or the right factor of `u` is `>= v`, the
/// standard bracketing of `uv` is `[u, v]`. Otherwise `u = [u1, u2]` and
/// `[u, v] = [u1, [u2, v]] + [[u1, v], u2]`.
pub fn lyndon_bracket<L: Clone + Ord, C: Coefficient>(u: &[L], v: &[L]) -> LieCombination<L, C> {
    use std::cmp::Ordering;
    match u.cmp(v) {
        Ordering::Equal => BTreeMap::new(),
        Ordering::Greater => lyndon_bracket::<L, C>(v, u)
            .into_iter()
            .map(|(w, c)| (w, -c))
            .collect(),
        Ordering::Less => match standard_factorization(u) {
            Some((u1, u2)) if u2 < v => {
                let mut out = BTreeMap::new();
                for (w, c) in lyndon_bracket::<L, C>(u2, v) {
                    for (x, d) in lyndon_bracket::<L, C>(u1, &w) {
                        add_term(&mut out, x, c.clone() * d);
                    }
                }
                for (w, c) in lyndon_bracket::<L, C>(u1, v) {
                    for (x, d) in lyndon_bracket::<L, C>(&w, u2) {
                        add_term(&mut out, x, c.clone() * d);
                    }
                }
                out
            }
            _ => BTreeMap::from([([u, v].concat(), C::one())]),
        },
    }
}

/// Bilinear extension of [`lyndon_bracket`].
pub fn bracket_combinations<L: Clone + Ord, C: Coefficient>(
    x: &LieCombination<L, C>,
    y: &LieCombination<L, C>,
) -> LieCombination<L, C> {
    let mut out = BTreeMap::new();
    for (u, a) in x {
        for (v, b) in y {
            for (w, c) in lyndon_bracket::<L, C>(u, v) {
                add_term(&mut out, w, a.clone() * b.clone() * c);
            }
        }
    }
    out
}

/// Rewrites a bracket tree in the Lyndon basis.
pub fn bracket_normalize<L: Clone + Ord, C: Coefficient>(t: &BracketTree<L>) -> LieCombination<L, C> {
    match t {
        BracketTree::Leaf(x) => BTreeMap::from([(vec![x.clone()], C::one())]),
        BracketTree::Node(a, b) => bracket_combinations(&bracket_normalize(a), &bracket_normalize(b)),
    }
}

/// All Lyndon words over `alphabet` whose letter degrees sum to `d`, in
/// lexicographic order. Degrees must be nonzero with non-negative entries.
pub fn lyndon_words<L: Clone + Ord>(alphabet: &[(L, Degree)], d: Degree) -> Vec<Vec<L>> {
    let mut letters: Vec<(L, Degree)> = alphabet.to_vec();
    letters.sort_by(|a, b| a.0.cmp(&b.0));
    let mut out = Vec::new();
    let mut word = Vec::new();
    extend_words(&letters, d, (0, 0), &mut word, &mut out);
    out
}

fn extend_words<L: Clone + Ord>(
    letters: &[(L, Degree)],
    d: Degree,
    acc: Degree,
    word: &mut Vec<usize>,
    out: &mut Vec<Vec<L>>,
) {
    if acc == d && !word.is_empty() {
        if is_lyndon(word) {
            out.push(word.iter().map(|&i| letters[i].0.clone()).collect());
        }
        return;
    }
    // every letter of a Lyndon word is >= its first letter
    let start = word.first().copied().unwrap_or(0);
    for (i, (_, (m, n))) in letters.iter().enumerate().skip(start) {
        let next = (acc.0 + m, acc.1 + n);
        if next.0 <= d.0 && next.1 <= d.1 {
            word.push(i);
            extend_words(letters, d, next, word, out);
            word.pop();
        }
    }
}

/// Lyndon basis of degree `d` over `g` with every family cut to `k_cap`
/// generators. Fails with the exact count when it exceeds `cap`.
pub fn lyndon_basis(
    g: &GeneratorSet,
    d: Degree,
    cap: usize,
    k_cap: u64,
) -> Result<Vec<LyndonMonomial<Letter>>, FreeLieError> {
    let restricted = g.restrict(k_cap);
    let count = graded_dimension(&restricted, d);
    if count > BigInt::from(cap) {
        return Err(FreeLieError::CapExceeded { count, cap });
    }
    Ok(lyndon_words(&restricted.letters(), d)
        .into_iter()
        .map(|word| LyndonMonomial { word, degree: d })
        .collect())
}

/// Moebius-function Witt formula for a single graded alphabet of `q` letters
/// of degree 1 each; used only as a cross-check.
pub fn necklace_count(q: u64, n: u64) -> BigInt {
    let mut total = BigInt::zero();
    for d in 1..=n {
        if n % d == 0 {
            total += BigInt::from(mobius(n / d)) * BigInt::from(q).pow(d as u32);
        }
    }
    (Ratio::new(total, BigInt::from(n))).to_integer()
}

fn mobius(mut n: u64) -> i64 {
    let mut sign = 1;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}
