//! Element arithmetic in the Monster Lie algebra and the Fricke monstrous Lie
//! algebras, realized on the decomposition `u^- + gl_2 + u^+`.
//!
//! `u^+` is free on `e_{l,jk} = (ad e_{-1})^l e_{jk}` and `u^-` on the mirror
//! images `f_{l,jk}`, so elements there are combinations of Lyndon words over
//! [`Gen`]. Brackets between the two halves are expanded recursively down to
//! `[e_{jk}, f_{pq}] = -delta (j h1 + h2)`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::RwLock;

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::cartan::{BlockIndex, BorcherdsCartanMatrix, CartanError};
use crate::freelie::{add_term, lyndon_bracket, lyndon_words, standard_factorization, Degree, Gen};
use crate::moonshine::ClassData;
use crate::scalar::Coefficient;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("degree ({0}, {1}) is outside the window ({2}, {3})")]
    WindowExceeded(i64, i64, i64, i64),
    #[error("invalid generator {0}: {1}")]
    InvalidGenerator(String, String),
    #[error("lowering rule fails for j = {j}, l = {l}")]
    LoweringMismatch { j: i64, l: u32 },
    #[error("an sl2 triple needs a nonzero diagonal entry")]
    ZeroDiagonal,
    #[error(transparent)]
    Cartan(#[from] CartanError),
}

/// Basis symbols. `E(w)`, `F(w)` are the standard bracketings of the Lyndon
/// word `w` in the `e`- and `f`-generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Basis {
    H1,
    H2,
    Em1,
    Fm1,
    E(Vec<Gen>),
    F(Vec<Gen>),
}

impl Basis {
    pub fn e(l: u32, j: i64, k: u64) -> Self {
        Basis::E(vec![Gen::new(l, j, k)])
    }

    pub fn f(l: u32, j: i64, k: u64) -> Self {
        Basis::F(vec![Gen::new(l, j, k)])
    }

    pub fn degree(&self) -> Degree {
        let word = |w: &[Gen]| {
            w.iter()
                .map(Gen::degree)
                .fold((0, 0), |(a, b), (m, n)| (a + m, b + n))
        };
        match self {
            Basis::H1 | Basis::H2 => (0, 0),
            Basis::Em1 => (1, -1),
            Basis::Fm1 => (-1, 1),
            Basis::E(w) => word(w),
            Basis::F(w) => {
                let (m, n) = word(w);
                (-m, -n)
            }
        }
    }

    pub fn cartan_involution(&self) -> Self {
        match self {
            Basis::H1 => Basis::H1,
            Basis::H2 => Basis::H2,
            Basis::Em1 => Basis::Fm1,
            Basis::Fm1 => Basis::Em1,
            Basis::E(w) => Basis::F(w.clone()),
            Basis::F(w) => Basis::E(w.clone()),
        }
    }

    fn letters(&self) -> &[Gen] {
        match self {
            Basis::E(w) | Basis::F(w) => w,
            _ => &[],
        }
    }
}

fn fmt_word(w: &[Gen], head: char, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match standard_factorization(w) {
        None => write!(f, "{head}({};{},{})", w[0].l, w[0].j, w[0].k),
        Some((u, v)) => {
            f.write_str("[")?;
            fmt_word(u, head, f)?;
            f.write_str(",")?;
            fmt_word(v, head, f)?;
            f.write_str("]")
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basis::H1 => f.write_str("h1"),
            Basis::H2 => f.write_str("h2"),
            Basis::Em1 => f.write_str("e(-1)"),
            Basis::Fm1 => f.write_str("f(-1)"),
            Basis::E(w) => fmt_word(w, 'e', f),
            Basis::F(w) => fmt_word(w, 'f', f),
        }
    }
}

/// Finite linear combination of basis symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraElement<C> {
    terms: BTreeMap<Basis, C>,
}

impl<C: Coefficient> Default for AlgebraElement<C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<C: Coefficient> AlgebraElement<C> {
    pub fn zero() -> Self {
        Self { terms: BTreeMap::new() }
    }

    pub fn basis(b: Basis) -> Self {
        Self::term(C::one(), b)
    }

    pub fn term(c: C, b: Basis) -> Self {
        let mut out = Self::zero();
        add_term(&mut out.terms, b, c);
        out
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Basis, C)>) -> Self {
        let mut out = Self::zero();
        for (b, c) in terms {
            add_term(&mut out.terms, b, c);
        }
        out
    }

    pub fn h1() -> Self {
        Self::basis(Basis::H1)
    }

    pub fn h2() -> Self {
        Self::basis(Basis::H2)
    }

    pub fn e_minus() -> Self {
        Self::basis(Basis::Em1)
    }

    pub fn f_minus() -> Self {
        Self::basis(Basis::Fm1)
    }

    pub fn e(l: u32, j: i64, k: u64) -> Self {
        Self::basis(Basis::e(l, j, k))
    }

    pub fn f(l: u32, j: i64, k: u64) -> Self {
        Self::basis(Basis::f(l, j, k))
    }

    pub fn terms(&self) -> &BTreeMap<Basis, C> {
        &self.terms
    }

    pub fn coeff(&self, b: &Basis) -> C {
        self.terms.get(b).cloned().unwrap_or_else(C::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (b, c) in &other.terms {
            add_term(&mut out.terms, b.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(b, c)| (b.clone(), -c.clone())).collect(),
        }
    }

    pub fn scale(&self, s: &C) -> Self {
        Self::from_terms(self.terms.iter().map(|(b, c)| (b.clone(), s.clone() * c.clone())))
    }

    pub fn add_scaled(&mut self, s: &C, other: &Self) {
        for (b, c) in &other.terms {
            add_term(&mut self.terms, b.clone(), s.clone() * c.clone());
        }
    }

    /// The common degree of all terms, if there is one.
    pub fn homogeneous_degree(&self) -> Option<Degree> {
        let mut degrees = self.terms.keys().map(Basis::degree);
        let first = degrees.next()?;
        degrees.all(|d| d == first).then_some(first)
    }

    /// `h_i -> -h_i`, `e <-> f` on every symbol.
    pub fn cartan_involution(&self) -> Self {
        Self::from_terms(self.terms.iter().map(|(b, c)| {
            let c = if matches!(b, Basis::H1 | Basis::H2) { -c.clone() } else { c.clone() };
            (b.cartan_involution(), c)
        }))
    }

    /// `D_i` scales each term by coordinate `i` (1 or 2) of its degree.
    pub fn degree_derivation(&self, i: usize) -> Self {
        Self::from_terms(self.terms.iter().map(|(b, c)| {
            let d = b.degree();
            let s = if i == 1 { d.0 } else { d.1 };
            (b.clone(), C::from_i64(s) * c.clone())
        }))
    }
}

impl<C: Coefficient + fmt::Display> fmt::Display for AlgebraElement<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (b, c)) in self.terms.iter().enumerate() {
            let s = c.to_string();
            let (neg, mag) = match s.strip_prefix('-') {
                Some(rest) => (true, rest.to_string()),
                None => (false, s),
            };
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if mag != "1" {
                write!(f, "{mag}*")?;
            }
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// `[f_{-1}, e_{l,jk}] = l (j - l) e_{l-1,jk}`.
pub fn lowering_coefficient(j: i64, l: u32) -> i64 {
    l as i64 * (j - l as i64)
}

type Memo<C> = RwLock<HashMap<(Basis, Basis), AlgebraElement<C>>>;

/// The Lie algebra of a Fricke class (1A is the Monster Lie algebra) under a
/// degree window `|m| <= window.0`, `|n| <= window.1`.
pub struct MonsterAlgebra<C> {
    matrix: BorcherdsCartanMatrix,
    window: Degree,
    memo: Memo<C>,
}

impl<C: Coefficient> MonsterAlgebra<C> {
    /// Fails for non-Fricke classes, and if the lowering rule disagrees with
    /// the raw Jacobi expansion for any generator in the window.
    pub fn new(class: &'static ClassData, window: Degree) -> Result<Self, AlgebraError> {
        let alg = Self {
            matrix: BorcherdsCartanMatrix::new(class)?,
            window,
            memo: RwLock::new(HashMap::new()),
        };
        alg.verify_lowering()?;
        Ok(alg)
    }

    pub fn matrix(&self) -> &BorcherdsCartanMatrix {
        &self.matrix
    }

    pub fn window(&self) -> Degree {
        self.window
    }

    fn verify_lowering(&self) -> Result<(), AlgebraError> {
        let j_max = self.window.0.max(1) - 1 + self.window.1;
        for j in 1..=j_max {
            // [f_{-1}, e_l] = [[f_{-1}, e_{-1}], e_{l-1}] + [e_{-1}, [f_{-1}, e_{l-1}]]
            let mut raw = AlgebraElement::<C>::zero();
            for l in 1..j as u32 {
                let prev = AlgebraElement::e(l - 1, j, 1);
                let h = self.br(&AlgebraElement::f_minus(), &AlgebraElement::e_minus());
                raw = self.br(&h, &prev).add(&self.br(&AlgebraElement::e_minus(), &raw));
                let want = prev.scale(&C::from_i64(lowering_coefficient(j, l)));
                if raw != want {
                    return Err(AlgebraError::LoweringMismatch { j, l });
                }
            }
        }
        Ok(())
    }

    fn in_window(&self, d: Degree) -> Result<(), AlgebraError> {
        if d.0.abs() > self.window.0 || d.1.abs() > self.window.1 {
            return Err(AlgebraError::WindowExceeded(d.0, d.1, self.window.0, self.window.1));
        }
        Ok(())
    }

    pub fn validate_generator(&self, g: &Gen) -> Result<(), AlgebraError> {
        if g.j < 1 || g.l as i64 >= g.j {
            return Err(AlgebraError::InvalidGenerator(
                g.to_string(),
                format!("l must satisfy 0 <= l <= j - 1 with j >= 1"),
            ));
        }
        self.matrix
            .validate_index(BlockIndex::new(g.j, g.k))
            .map_err(|e| AlgebraError::InvalidGenerator(g.to_string(), e.to_string()))
    }

    /// Checks every symbol of `x` against the window and the index set.
    pub fn validate(&self, x: &AlgebraElement<C>) -> Result<(), AlgebraError> {
        for b in x.terms.keys() {
            self.in_window(b.degree())?;
            for g in b.letters() {
                self.validate_generator(g)?;
            }
        }
        Ok(())
    }

    pub fn bracket(&self, x: &AlgebraElement<C>, y: &AlgebraElement<C>) -> Result<AlgebraElement<C>, AlgebraError> {
        self.validate(x)?;
        self.validate(y)?;
        let out = self.br(x, y);
        for b in out.terms.keys() {
            self.in_window(b.degree())?;
        }
        Ok(out)
    }

    /// `(ad a)^n x`.
    pub fn adjoint_power(
        &self,
        a: &AlgebraElement<C>,
        n: u32,
        x: &AlgebraElement<C>,
    ) -> Result<AlgebraElement<C>, AlgebraError> {
        let mut out = x.clone();
        for _ in 0..n {
            out = self.bracket(a, &out)?;
        }
        Ok(out)
    }

    fn br(&self, x: &AlgebraElement<C>, y: &AlgebraElement<C>) -> AlgebraElement<C> {
        let mut out = AlgebraElement::zero();
        for (a, ca) in &x.terms {
            for (b, cb) in &y.terms {
                let v = self.br_basis(a, b);
                out.add_scaled(&(ca.clone() * cb.clone()), &v);
            }
        }
        out
    }

    fn br_basis(&self, a: &Basis, b: &Basis) -> AlgebraElement<C> {
        let key = (a.clone(), b.clone());
        if let Some(v) = self.memo.read().expect("memo lock").get(&key) {
            return v.clone();
        }
        let v = self.compute(a, b);
        self.memo.write().expect("memo lock").insert(key, v.clone());
        v
    }

    fn compute(&self, a: &Basis, b: &Basis) -> AlgebraElement<C> {
        use Basis::*;
        if a == b {
            return AlgebraElement::zero();
        }
        match (a, b) {
            (H1 | H2, _) => {
                let (m, n) = b.degree();
                let s = if *a == H1 { m } else { n };
                AlgebraElement::term(C::from_i64(s), b.clone())
            }
            (_, H1 | H2) => self.br_basis(b, a).neg(),
            (Em1, _) => self.ad_e_minus(b),
            (_, Em1) => self.ad_e_minus(a).neg(),
            (Fm1, _) => self.ad_f_minus(b),
            (_, Fm1) => self.ad_f_minus(a).neg(),
            (E(u), E(v)) => words(lyndon_bracket::<Gen, C>(u, v), E),
            (F(u), F(v)) => words(lyndon_bracket::<Gen, C>(u, v), F),
            (E(u), F(v)) => self.cross(u, v),
            (F(u), E(v)) => self.cross(v, u).neg(),
        }
    }

    fn ad_e_minus(&self, x: &Basis) -> AlgebraElement<C> {
        use Basis::*;
        match x {
            H1 | H2 => self.br_basis(x, &Em1).neg(),
            Em1 => AlgebraElement::zero(),
            Fm1 => AlgebraElement::h1().sub(&AlgebraElement::h2()),
            E(w) if w.len() == 1 => {
                let g = w[0];
                if (g.l as i64) + 1 < g.j {
                    AlgebraElement::e(g.l + 1, g.j, g.k)
                } else {
                    AlgebraElement::zero()
                }
            }
            F(w) if w.len() == 1 => {
                let g = w[0];
                if g.l == 0 {
                    AlgebraElement::zero()
                } else {
                    AlgebraElement::f(g.l - 1, g.j, g.k).scale(&C::from_i64(lowering_coefficient(g.j, g.l)))
                }
            }
            _ => self.leibniz(&Em1, x),
        }
    }

    fn ad_f_minus(&self, x: &Basis) -> AlgebraElement<C> {
        use Basis::*;
        match x {
            H1 | H2 => self.br_basis(x, &Fm1).neg(),
            Fm1 => AlgebraElement::zero(),
            Em1 => AlgebraElement::h2().sub(&AlgebraElement::h1()),
            E(w) if w.len() == 1 => {
                let g = w[0];
                if g.l == 0 {
                    AlgebraElement::zero()
                } else {
                    AlgebraElement::e(g.l - 1, g.j, g.k).scale(&C::from_i64(lowering_coefficient(g.j, g.l)))
                }
            }
            F(w) if w.len() == 1 => {
                let g = w[0];
                if (g.l as i64) + 1 < g.j {
                    AlgebraElement::f(g.l + 1, g.j, g.k)
                } else {
                    AlgebraElement::zero()
                }
            }
            _ => self.leibniz(&Fm1, x),
        }
    }

    /// `[a, [u1, u2]] = [[a, u1], u2] + [u1, [a, u2]]` on a word symbol.
    fn leibniz(&self, a: &Basis, x: &Basis) -> AlgebraElement<C> {
        let (w, mk): (&Vec<Gen>, fn(Vec<Gen>) -> Basis) = match x {
            Basis::E(w) => (w, Basis::E),
            Basis::F(w) => (w, Basis::F),
            _ => unreachable!("leibniz applies to words"),
        };
        let (u1, u2) = standard_factorization(w).expect("word of length at least 2");
        let a = AlgebraElement::basis(a.clone());
        let x1 = AlgebraElement::basis(mk(u1.to_vec()));
        let x2 = AlgebraElement::basis(mk(u2.to_vec()));
        self.br(&self.br(&a, &x1), &x2).add(&self.br(&x1, &self.br(&a, &x2)))
    }

    /// `[E(u), F(v)]`.
    fn cross(&self, u: &[Gen], v: &[Gen]) -> AlgebraElement<C> {
        let e = |w: &[Gen]| AlgebraElement::basis(Basis::E(w.to_vec()));
        let f = |w: &[Gen]| AlgebraElement::basis(Basis::F(w.to_vec()));
        if let Some((u1, u2)) = standard_factorization(u) {
            // [[u1, u2], y] = [u1, [u2, y]] - [u2, [u1, y]]
            let y = f(v);
            return self
                .br(&e(u1), &self.br(&e(u2), &y))
                .sub(&self.br(&e(u2), &self.br(&e(u1), &y)));
        }
        if let Some((v1, v2)) = standard_factorization(v) {
            // [x, [v1, v2]] = [[x, v1], v2] + [v1, [x, v2]]
            let x = e(u);
            return self
                .br(&self.br(&x, &f(v1)), &f(v2))
                .add(&self.br(&f(v1), &self.br(&x, &f(v2))));
        }
        self.cross_letters(u[0], v[0])
    }

    fn cross_letters(&self, a: Gen, b: Gen) -> AlgebraElement<C> {
        let em1 = AlgebraElement::e_minus();
        let fm1 = AlgebraElement::f_minus();
        if a.l > 0 {
            // e_l = [e_{-1}, e_{l-1}]
            let prev = AlgebraElement::e(a.l - 1, a.j, a.k);
            let y = AlgebraElement::basis(Basis::F(vec![b]));
            return self
                .br(&em1, &self.br(&prev, &y))
                .sub(&self.br(&prev, &self.br(&em1, &y)));
        }
        if b.l > 0 {
            // f_l = [f_{-1}, f_{l-1}]
            let x = AlgebraElement::basis(Basis::E(vec![a]));
            let prev = AlgebraElement::f(b.l - 1, b.j, b.k);
            return self
                .br(&self.br(&x, &fm1), &prev)
                .add(&self.br(&fm1, &self.br(&x, &prev)));
        }
        if (a.j, a.k) == (b.j, b.k) {
            AlgebraElement::h1()
                .scale(&C::from_i64(a.j))
                .add(&AlgebraElement::h2())
                .neg()
        } else {
            AlgebraElement::zero()
        }
    }

    /// `e_i`, `f_i` for a simple root index.
    pub fn chevalley_pair(&self, i: BlockIndex) -> Result<(AlgebraElement<C>, AlgebraElement<C>), AlgebraError> {
        self.matrix.validate_index(i)?;
        Ok(if i == BlockIndex::REAL {
            (AlgebraElement::e_minus(), AlgebraElement::f_minus())
        } else {
            (AlgebraElement::e(0, i.j, i.k), AlgebraElement::f(0, i.j, i.k))
        })
    }

    /// Image of `h_i = [e_i, f_i]`.
    pub fn coroot(&self, i: BlockIndex) -> Result<AlgebraElement<C>, AlgebraError> {
        let (e, f) = self.chevalley_pair(i)?;
        self.bracket(&e, &f)
    }

    /// `(p - j) h_{-1,1} - (p + 1) h_{jk} + (j + 1) h_{pq}` evaluated in the
    /// algebra, where the center has been divided out; expected zero.
    pub fn center_image(&self, jk: BlockIndex, pq: BlockIndex) -> Result<AlgebraElement<C>, AlgebraError> {
        let (j, p) = (jk.j, pq.j);
        let mut out = self.coroot(BlockIndex::REAL)?.scale(&C::from_i64(p - j));
        out.add_scaled(&C::from_i64(-(p + 1)), &self.coroot(jk)?);
        out.add_scaled(&C::from_i64(j + 1), &self.coroot(pq)?);
        Ok(out)
    }

    /// `e_{0,jk}, ..., e_{j-1,jk}` with their `h1 - h2` eigenvalues.
    pub fn weight_string(&self, j: i64, k: u64) -> Result<Vec<(AlgebraElement<C>, C)>, AlgebraError> {
        let h = AlgebraElement::h1().sub(&AlgebraElement::h2());
        let mut out = Vec::new();
        let mut x = AlgebraElement::e(0, j, k);
        self.validate(&x)?;
        for l in 0..j as u32 {
            let hx = self.bracket(&h, &x)?;
            let b = Basis::e(l, j, k);
            out.push((x.clone(), hx.coeff(&b)));
            if l + 1 < j as u32 {
                x = self.bracket(&AlgebraElement::e_minus(), &x)?;
            }
        }
        Ok(out)
    }

    /// All basis symbols of degree `d`, with each block cut to `k_cap`
    /// generators.
    pub fn basis_at(&self, d: Degree, k_cap: u64) -> Result<Vec<Basis>, AlgebraError> {
        self.in_window(d)?;
        Ok(match d {
            (0, 0) => vec![Basis::H1, Basis::H2],
            (1, -1) => vec![Basis::Em1],
            (-1, 1) => vec![Basis::Fm1],
            (m, n) if m >= 1 && n >= 1 => self.words_at((m, n), k_cap)?.into_iter().map(Basis::E).collect(),
            (m, n) if m <= -1 && n <= -1 => self.words_at((-m, -n), k_cap)?.into_iter().map(Basis::F).collect(),
            _ => Vec::new(),
        })
    }

    fn words_at(&self, d: Degree, k_cap: u64) -> Result<Vec<Vec<Gen>>, AlgebraError> {
        let mut alphabet = Vec::new();
        for j in 1..=d.0 - 1 + d.1 {
            let size = self.matrix.block_size(j)?;
            for l in 0..j as u32 {
                for k in 1..=k_cap {
                    let g = Gen::new(l, j, k);
                    let (m, n) = g.degree();
                    if m <= d.0 && n <= d.1 && num_bigint::BigInt::from(k) <= size {
                        alphabet.push((g, (m, n)));
                    }
                }
            }
        }
        Ok(lyndon_words(&alphabet, d))
    }

    /// The relations M:1-M:5 for all `j, p <= j_max`, `k, q <= k_max`.
    pub fn relation_suite(&self, j_max: i64, k_max: u64) -> Result<Vec<Relation<C>>, AlgebraError> {
        type El<C> = AlgebraElement<C>;
        let mut out = Vec::new();
        let mut push = |label: String, lhs: Result<El<C>, AlgebraError>, rhs: El<C>| -> Result<(), AlgebraError> {
            out.push(Relation { label, lhs: lhs?, rhs });
            Ok(())
        };
        let (h1, h2, em, fm) = (El::<C>::h1(), El::<C>::h2(), El::<C>::e_minus(), El::<C>::f_minus());
        let int = |n: i64| C::from_i64(n);
        push("M:1 [h1,h2]".into(), self.bracket(&h1, &h2), El::zero())?;
        push("M:2a [h1,e(-1)]".into(), self.bracket(&h1, &em), em.clone())?;
        push("M:2a [h2,e(-1)]".into(), self.bracket(&h2, &em), em.neg())?;
        push("M:3a [h1,f(-1)]".into(), self.bracket(&h1, &fm), fm.neg())?;
        push("M:3a [h2,f(-1)]".into(), self.bracket(&h2, &fm), fm.clone())?;
        push("M:4a [e(-1),f(-1)]".into(), self.bracket(&em, &fm), h1.sub(&h2))?;
        let mut indices = Vec::new();
        for j in 1..=j_max {
            let size = self.matrix.block_size(j)?;
            for k in (1..=k_max).filter(|k| num_bigint::BigInt::from(*k) <= size) {
                indices.push((j, k));
            }
        }
        for &(j, k) in &indices {
            let (e, f) = (El::<C>::e(0, j, k), El::<C>::f(0, j, k));
            push(format!("M:2b [h1,e(0;{j},{k})]"), self.bracket(&h1, &e), e.clone())?;
            push(format!("M:2b [h2,e(0;{j},{k})]"), self.bracket(&h2, &e), e.scale(&int(j)))?;
            push(format!("M:3b [h1,f(0;{j},{k})]"), self.bracket(&h1, &f), f.neg())?;
            push(format!("M:3b [h2,f(0;{j},{k})]"), self.bracket(&h2, &f), f.scale(&int(-j)))?;
            push(format!("M:4b [e(-1),f(0;{j},{k})]"), self.bracket(&em, &f), El::zero())?;
            push(format!("M:4b [e(0;{j},{k}),f(-1)]"), self.bracket(&e, &fm), El::zero())?;
            for &(p, q) in &indices {
                let rhs = if (j, k) == (p, q) {
                    h1.scale(&int(j)).add(&h2).neg()
                } else {
                    El::zero()
                };
                let fpq = El::<C>::f(0, p, q);
                push(format!("M:4c [e(0;{j},{k}),f(0;{p},{q})]"), self.bracket(&e, &fpq), rhs)?;
            }
            push(format!("M:5 (ad e(-1))^{j} e(0;{j},{k})"), self.adjoint_power(&em, j as u32, &e), El::zero())?;
            push(format!("M:5 (ad f(-1))^{j} f(0;{j},{k})"), self.adjoint_power(&fm, j as u32, &f), El::zero())?;
        }
        Ok(out)
    }
}

/// `[x,[y,z]] + [y,[z,x]] + [z,[x,y]]`.
pub fn jacobi_residual<C: Coefficient>(
    alg: &MonsterAlgebra<C>,
    x: &AlgebraElement<C>,
    y: &AlgebraElement<C>,
    z: &AlgebraElement<C>,
) -> Result<AlgebraElement<C>, AlgebraError> {
    let a = alg.bracket(x, &alg.bracket(y, z)?)?;
    let b = alg.bracket(y, &alg.bracket(z, x)?)?;
    let c = alg.bracket(z, &alg.bracket(x, y)?)?;
    Ok(a.add(&b).add(&c))
}

/// Draws random homogeneous elements whose degrees keep every partial
/// bracket of a triple inside the window.
pub struct ElementSampler<'a, C> {
    alg: &'a MonsterAlgebra<C>,
    k_cap: u64,
    degrees: Vec<Degree>,
    bases: HashMap<Degree, Vec<Basis>>,
}

impl<'a, C: Coefficient> ElementSampler<'a, C> {
    pub fn new(alg: &'a MonsterAlgebra<C>, k_cap: u64) -> Result<Self, AlgebraError> {
        let (wm, wn) = alg.window();
        let mut bases = HashMap::new();
        let mut degrees = Vec::new();
        for m in -wm..=wm {
            for n in -wn..=wn {
                let b = alg.basis_at((m, n), k_cap)?;
                if !b.is_empty() {
                    degrees.push((m, n));
                    bases.insert((m, n), b);
                }
            }
        }
        Ok(Self { alg, k_cap, degrees, bases })
    }

    pub fn k_cap(&self) -> u64 {
        self.k_cap
    }

    fn fits(&self, d: Degree) -> bool {
        let (wm, wn) = self.alg.window();
        d.0.abs() <= wm && d.1.abs() <= wn
    }

    /// Up to three basis symbols of degree `d` with small nonzero integer
    /// coefficients.
    pub fn element<R: rand::Rng>(&self, rng: &mut R, d: Degree) -> AlgebraElement<C> {
        let basis = &self.bases[&d];
        let count = rng.gen_range(1..=3.min(basis.len()));
        let mut out = AlgebraElement::zero();
        for _ in 0..count {
            let b = basis[rng.gen_range(0..basis.len())].clone();
            let mut c = rng.gen_range(-3i64..=2);
            if c >= 0 {
                c += 1;
            }
            add_term(&mut out.terms, b, C::from_i64(c));
        }
        out
    }

    /// Three homogeneous elements such that all pairwise and total degrees
    /// stay in the window.
    pub fn triple<R: rand::Rng>(&self, rng: &mut R) -> [AlgebraElement<C>; 3] {
        loop {
            let d: Vec<Degree> = (0..3).map(|_| self.degrees[rng.gen_range(0..self.degrees.len())]).collect();
            let sum = |a: Degree, b: Degree| (a.0 + b.0, a.1 + b.1);
            let ok = self.fits(sum(d[0], d[1]))
                && self.fits(sum(d[1], d[2]))
                && self.fits(sum(d[0], d[2]))
                && self.fits(sum(sum(d[0], d[1]), d[2]));
            if ok {
                let [x, y, z] = [d[0], d[1], d[2]].map(|d| self.element(rng, d));
                if !x.is_zero() && !y.is_zero() && !z.is_zero() {
                    return [x, y, z];
                }
            }
        }
    }
}

fn words<C: Coefficient>(c: BTreeMap<Vec<Gen>, C>, mk: fn(Vec<Gen>) -> Basis) -> AlgebraElement<C> {
    AlgebraElement::from_terms(c.into_iter().map(|(w, x)| (mk(w), x)))
}

/// `lhs = rhs` as a checkable statement.
#[derive(Clone, Debug)]
pub struct Relation<C> {
    pub label: String,
    pub lhs: AlgebraElement<C>,
    pub rhs: AlgebraElement<C>,
}

impl<C: Coefficient> Relation<C> {
    pub fn residual(&self) -> AlgebraElement<C> {
        self.lhs.sub(&self.rhs)
    }

    /// Shifts one coefficient of the right-hand side by one (the leading one,
    /// or `h1` when the side is zero).
    pub fn perturb(&mut self) {
        let b = self.rhs.terms.keys().next().cloned().unwrap_or(Basis::H1);
        add_term(&mut self.rhs.terms, b, C::one());
    }
}

/// Minimal interface used by the triple checks.
pub trait LieAlgebra {
    type Element: Clone + fmt::Display;

    fn lie_bracket(&self, x: &Self::Element, y: &Self::Element) -> Result<Self::Element, AlgebraError>;
    fn combine(&self, terms: &[(BigRational, &Self::Element)]) -> Self::Element;
    fn is_zero_element(&self, x: &Self::Element) -> bool;
}

impl<C: Coefficient + fmt::Display> LieAlgebra for MonsterAlgebra<C> {
    type Element = AlgebraElement<C>;

    fn lie_bracket(&self, x: &Self::Element, y: &Self::Element) -> Result<Self::Element, AlgebraError> {
        self.bracket(x, y)
    }

    fn combine(&self, terms: &[(BigRational, &Self::Element)]) -> Self::Element {
        let mut out = AlgebraElement::zero();
        for (c, x) in terms {
            let c = C::from_bigint(c.numer()).clone()
                * C::from_bigint(c.denom()).try_inverse().expect("nonzero denominator");
            out.add_scaled(&c, x);
        }
        out
    }

    fn is_zero_element(&self, x: &Self::Element) -> bool {
        x.is_zero()
    }
}

/// The three-dimensional Borcherds algebra of the 1x1 matrix `(a)`:
/// `[h, e] = a e`, `[h, f] = -a f`, `[e, f] = h`. Sl2 for `a != 0`,
/// Heisenberg for `a = 0`.
#[derive(Clone, Copy, Debug)]
pub struct RankOneBorcherds {
    pub a: i64,
}

/// `e_coeff * e + f_coeff * f + h_coeff * h`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankOneElement {
    pub e: BigRational,
    pub f: BigRational,
    pub h: BigRational,
}

impl RankOneElement {
    fn new(e: i64, f: i64, h: i64) -> Self {
        let q = |x: i64| BigRational::from_integer(x.into());
        Self { e: q(e), f: q(f), h: q(h) }
    }
}

impl fmt::Display for RankOneElement {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts = [(&self.e, "e"), (&self.f, "f"), (&self.h, "h")];
        let mut first = true;
        for (c, name) in parts {
            if c.is_zero() {
                continue;
            }
            let s = c.to_string();
            let (neg, mag) = match s.strip_prefix('-') {
                Some(r) => (true, r.to_string()),
                None => (false, s),
            };
            let sep = match (first, neg) {
                (true, true) => "-",
                (true, false) => "",
                (false, true) => " - ",
                (false, false) => " + ",
            };
            fmt.write_str(sep)?;
            if mag != "1" {
                write!(fmt, "{mag}*")?;
            }
            fmt.write_str(name)?;
            first = false;
        }
        if first {
            fmt.write_str("0")?;
        }
        Ok(())
    }
}

impl RankOneBorcherds {
    pub fn generators(&self) -> (RankOneElement, RankOneElement, RankOneElement) {
        (RankOneElement::new(1, 0, 0), RankOneElement::new(0, 1, 0), RankOneElement::new(0, 0, 1))
    }
}

impl LieAlgebra for RankOneBorcherds {
    type Element = RankOneElement;

    fn lie_bracket(&self, x: &RankOneElement, y: &RankOneElement) -> Result<RankOneElement, AlgebraError> {
        let a = BigRational::from_integer(self.a.into());
        // [e,f] = h, [h,e] = a e, [h,f] = -a f
        let h = &x.e * &y.f - &x.f * &y.e;
        let e = &a * (&x.h * &y.e - &x.e * &y.h);
        let f = -&a * (&x.h * &y.f - &x.f * &y.h);
        Ok(RankOneElement { e, f, h })
    }

    fn combine(&self, terms: &[(BigRational, &RankOneElement)]) -> RankOneElement {
        let mut out = RankOneElement::new(0, 0, 0);
        for (c, x) in terms {
            out.e += c * &x.e;
            out.f += c * &x.f;
            out.h += c * &x.h;
        }
        out
    }

    fn is_zero_element(&self, x: &RankOneElement) -> bool {
        x.e.is_zero() && x.f.is_zero() && x.h.is_zero()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TripleKind {
    Sl2,
    Heisenberg,
}

impl fmt::Display for TripleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TripleKind::Sl2 => "sl2",
            TripleKind::Heisenberg => "heisenberg",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TripleResidual {
    pub relation: String,
    pub residual: String,
    pub zero: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TripleReport {
    pub index: String,
    pub diagonal: i64,
    pub kind: TripleKind,
    pub residuals: Vec<TripleResidual>,
    pub pass: bool,
}

/// Checks the triple `(e, f, h = [e, f])` with diagonal entry `a`. With
/// `kind = None` the kind is sl2 iff `a != 0`; forcing the other kind is how
/// a mismatched triple is exhibited.
pub fn check_triple<A: LieAlgebra>(
    alg: &A,
    index: &str,
    e: &A::Element,
    f: &A::Element,
    a: i64,
    kind: Option<TripleKind>,
) -> Result<TripleReport, AlgebraError> {
    let kind = kind.unwrap_or(if a != 0 { TripleKind::Sl2 } else { TripleKind::Heisenberg });
    let q = |n: i64| BigRational::from_integer(n.into());
    let h = alg.lie_bracket(e, f)?;
    let mut residuals = Vec::new();
    let mut record = |relation: &str, r: A::Element| {
        residuals.push(TripleResidual {
            relation: relation.to_string(),
            residual: r.to_string(),
            zero: alg.is_zero_element(&r),
        });
    };
    match kind {
        TripleKind::Sl2 => {
            if a == 0 {
                return Err(AlgebraError::ZeroDiagonal);
            }
            let s = BigRational::new(2.into(), a.into());
            let e_hat = alg.combine(&[(s.clone(), e)]);
            let h_hat = alg.combine(&[(s, &h)]);
            let he = alg.lie_bracket(&h_hat, &e_hat)?;
            record("[h^,e^] - 2e^", alg.combine(&[(q(1), &he), (q(-2), &e_hat)]));
            let hf = alg.lie_bracket(&h_hat, f)?;
            record("[h^,f] + 2f", alg.combine(&[(q(1), &hf), (q(2), f)]));
            let ef = alg.lie_bracket(&e_hat, f)?;
            record("[e^,f] - h^", alg.combine(&[(q(1), &ef), (q(-1), &h_hat)]));
        }
        TripleKind::Heisenberg => {
            let ef = alg.lie_bracket(e, f)?;
            record("[e,f] - h", alg.combine(&[(q(1), &ef), (q(-1), &h)]));
            record("[e,h]", alg.lie_bracket(e, &h)?);
            record("[f,h]", alg.lie_bracket(f, &h)?);
        }
    }
    let pass = residuals.iter().all(|r| r.zero);
    Ok(TripleReport {
        index: index.to_string(),
        diagonal: a,
        kind,
        residuals,
        pass,
    })
}

/// Triple check at a simple root of a Fricke algebra.
pub fn check_index_triple<C: Coefficient + fmt::Display>(
    alg: &MonsterAlgebra<C>,
    i: BlockIndex,
    kind: Option<TripleKind>,
) -> Result<TripleReport, AlgebraError> {
    let a = alg.matrix().entry(i, i)?;
    let (e, f) = alg.chevalley_pair(i)?;
    check_triple(alg, &i.to_string(), &e, &f, a, kind)
}

/// Triple check in the rank-one algebra with diagonal `a`.
pub fn check_synthetic_triple(a: i64, kind: Option<TripleKind>) -> Result<TripleReport, AlgebraError> {
    let alg = RankOneBorcherds { a };
    let (e, f, _) = alg.generators();
    check_triple(&alg, "synthetic", &e, &f, a, kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moonshine::ClassLabel;

    type Q = BigRational;
    type El = AlgebraElement<Q>;

    fn monster() -> MonsterAlgebra<Q> {
        MonsterAlgebra::new(ClassData::get(ClassLabel::A1), (6, 6)).unwrap()
    }

    fn q(n: i64) -> Q {
        Q::from_integer(n.into())
    }

    #[test]
    fn presentation_examples() {
        let m = monster();
        assert_eq!(m.bracket(&El::h1(), &El::e_minus()).unwrap(), El::e_minus());
        let ef = m.bracket(&El::e(0, 2, 1), &El::f(0, 2, 1)).unwrap();
        assert_eq!(ef, El::h1().scale(&q(2)).add(&El::h2()).neg());
        assert_eq!(m.bracket(&El::f_minus(), &El::e(1, 2, 3)).unwrap(), El::e(0, 2, 3));
        assert_eq!(m.bracket(&El::e_minus(), &El::f_minus()).unwrap().to_string(), "h1 - h2");
        assert!(m.bracket(&El::e(0, 1, 1), &El::f(0, 1, 2)).unwrap().is_zero());
    }

    #[test]
    fn lowering_rule_values() {
        let m = monster();
        for j in 1..=5 {
            for l in 1..j as u32 {
                let got = m.bracket(&El::f_minus(), &El::e(l, j, 1)).unwrap();
                assert_eq!(got, El::e(l - 1, j, 1).scale(&q(lowering_coefficient(j, l))));
            }
        }
    }

    #[test]
    fn adjoint_powers() {
        let m = monster();
        let em = El::e_minus();
        for j in 1..=4 {
            let e = El::e(0, j, 1);
            assert!(m.adjoint_power(&em, j as u32, &e).unwrap().is_zero());
            assert!(!m.adjoint_power(&em, j as u32 - 1, &e).unwrap().is_zero());
        }
        assert_eq!(m.adjoint_power(&em, 0, &El::h1()).unwrap(), El::h1());
    }

    #[test]
    fn involution() {
        let m = monster();
        assert_eq!(El::h1().cartan_involution(), El::h1().neg());
        let x = m.bracket(&El::e_minus(), &El::e(0, 1, 1)).unwrap();
        assert!(x.is_zero());
        let x = m.bracket(&El::e_minus(), &El::e(0, 2, 1)).unwrap();
        let y = m.bracket(&El::f_minus(), &El::f(0, 2, 1)).unwrap();
        assert_eq!(x.cartan_involution(), y);
        let z = El::e(1, 3, 2).add(&El::h2().scale(&q(5)));
        assert_eq!(z.cartan_involution().cartan_involution(), z);
    }

    #[test]
    fn derivations() {
        assert_eq!(El::e_minus().degree_derivation(1), El::e_minus());
        assert!(El::h1().degree_derivation(2).is_zero());
        let x = El::basis(Basis::E(vec![Gen::new(0, 1, 1), Gen::new(1, 2, 1)]));
        assert_eq!(x.homogeneous_degree(), Some((3, 2)));
        assert_eq!(x.degree_derivation(2), x.scale(&q(2)));
    }

    #[test]
    fn weight_strings() {
        let m = monster();
        for j in 1..=4 {
            let s = m.weight_string(j, 1).unwrap();
            assert_eq!(s.len(), j as usize);
            let eig: Vec<Q> = s.iter().map(|(_, c)| c.clone()).collect();
            let want: Vec<Q> = (0..j).map(|l| q(1 - j + 2 * l)).collect();
            assert_eq!(eig, want);
        }
    }

    #[test]
    fn relation_suite_vanishes() {
        let m = monster();
        let rels = m.relation_suite(3, 2).unwrap();
        for r in &rels {
            assert!(r.residual().is_zero(), "{}: {}", r.label, r.residual());
        }
        let mut bad = rels[7].clone();
        bad.perturb();
        assert!(!bad.residual().is_zero());
    }

    #[test]
    fn center() {
        let m = monster();
        let b = BlockIndex::new;
        assert!(m.center_image(b(2, 1), b(3, 1)).unwrap().is_zero());
        assert!(m.center_image(b(1, 1), b(2, 1)).unwrap().is_zero());
        assert!(m.center_image(b(-1, 1), b(4, 2)).unwrap().is_zero());
    }

    #[test]
    fn triples() {
        let m = monster();
        let r = check_index_triple(&m, BlockIndex::REAL, None).unwrap();
        assert_eq!(r.kind, TripleKind::Sl2);
        assert!(r.pass);
        let r = check_index_triple(&m, BlockIndex::new(3, 2), None).unwrap();
        assert_eq!((r.kind, r.diagonal), (TripleKind::Sl2, -6));
        assert!(r.pass);
        let r = check_synthetic_triple(0, None).unwrap();
        assert_eq!(r.kind, TripleKind::Heisenberg);
        assert!(r.pass);
        let r = check_synthetic_triple(-4, Some(TripleKind::Heisenberg)).unwrap();
        assert!(!r.pass);
        assert!(check_synthetic_triple(-4, None).unwrap().pass);
        assert!(check_synthetic_triple(0, Some(TripleKind::Sl2)).is_err());
    }

    #[test]
    fn cross_brackets_of_words() {
        let m = monster();
        // [[e11, e12], f11] = [e11, [e12, f11]] - [e12, [e11, f11]] = [e12, h1 + h2] = -2 e12
        let x = m.bracket(&El::e(0, 1, 1), &El::e(0, 1, 2)).unwrap();
        let y = m.bracket(&x, &El::f(0, 1, 1)).unwrap();
        assert_eq!(y, El::e(0, 1, 2).scale(&q(-2)));
    }

    #[test]
    fn window_and_indices() {
        let m = MonsterAlgebra::<Q>::new(ClassData::get(ClassLabel::A1), (2, 2)).unwrap();
        assert!(matches!(
            m.bracket(&El::e(0, 3, 1), &El::h1()),
            Err(AlgebraError::WindowExceeded(..))
        ));
        assert!(m.bracket(&El::e(0, 1, 196885), &El::h1()).is_err());
        assert!(m.bracket(&El::e(1, 1, 1), &El::h1()).is_err());
        assert!(MonsterAlgebra::<Q>::new(ClassData::get(ClassLabel::B2), (2, 2)).is_err());
    }

    #[test]
    fn no_multiples_of_the_real_root() {
        let m = monster();
        assert!(m.basis_at((2, -2), 3).unwrap().is_empty());
        assert!(m.bracket(&El::e_minus(), &El::e_minus()).unwrap().is_zero());
        assert_eq!(m.basis_at((1, -1), 3).unwrap(), vec![Basis::Em1]);
    }

    #[test]
    fn jacobi_on_random_triples() {
        use rand::SeedableRng;
        let m = MonsterAlgebra::<Q>::new(ClassData::get(ClassLabel::A1), (3, 3)).unwrap();
        let sampler = ElementSampler::new(&m, 2).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let [x, y, z] = sampler.triple(&mut rng);
            assert!(jacobi_residual(&m, &x, &y, &z).unwrap().is_zero(), "{x} | {y} | {z}");
        }
    }

    #[test]
    fn fricke_2a_uses_same_presentation() {
        let m = MonsterAlgebra::<Q>::new(ClassData::get(ClassLabel::A2), (4, 4)).unwrap();
        for r in m.relation_suite(2, 2).unwrap() {
            assert!(r.residual().is_zero(), "{}", r.label);
        }
        assert!(m.bracket(&El::e(0, 1, 4372), &El::h1()).is_ok());
        assert!(m.bracket(&El::e(0, 1, 4373), &El::h1()).is_err());
    }
}
