//! Borcherds Cartan matrices of the Monster Lie algebra and the Fricke
//! monstrous Lie algebras, evaluated lazily, plus the rank-2 root lattice.
//!
//! Block sizes such as `c(1) = 196884` rule out materializing the matrix, so
//! entries are computed from the block rule `a_{jk,pq} = -(j+p)` and indices
//! are only checked against the (big-integer) block sizes.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::moonshine::{simple_root_multiplicity, ClassData, ClassLabel, MoonshineError};
use crate::qseries::{exponent_string, Exponent};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CartanError {
    #[error("invalid index ({j},{k}): {reason}")]
    InvalidIndex { j: i64, k: u64, reason: String },
    #[error("a vertex has no edge to itself")]
    SameVertex,
    #[error("({m}, {n}) is not a root of {class}")]
    NotARoot { class: ClassLabel, m: i64, n: String },
    #[error(transparent)]
    Moonshine(#[from] MoonshineError),
}

/// Index `(j, k)` of a simple root: `j in {-1, 1, 2, ...}` and
/// `1 <= k <= blocksize(j)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct BlockIndex {
    pub j: i64,
    pub k: u64,
}

impl BlockIndex {
    pub const REAL: BlockIndex = BlockIndex { j: -1, k: 1 };

    pub fn new(j: i64, k: u64) -> Self {
        Self { j, k }
    }
}

impl fmt::Display for BlockIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.j, self.k)
    }
}

/// The infinite matrix `A` (class 1A) or `A_g` (Fricke classes).
#[derive(Clone, Copy, Debug)]
pub struct BorcherdsCartanMatrix {
    class: &'static ClassData,
}

impl BorcherdsCartanMatrix {
    /// Only Fricke classes have a matrix of this shape.
    pub fn new(class: &'static ClassData) -> Result<Self, CartanError> {
        class.require_fricke()?;
        Ok(Self { class })
    }

    pub fn for_label(label: ClassLabel) -> Result<Self, CartanError> {
        Self::new(ClassData::get(label))
    }

    pub fn class(&self) -> &'static ClassData {
        self.class
    }

    pub fn level(&self) -> i64 {
        self.class.level
    }

    /// `c(j)` for 1A, `c(1, j/N)` for a Fricke class; 1 for `j = -1`.
    pub fn block_size(&self, j: i64) -> Result<BigInt, CartanError> {
        match j {
            -1 => Ok(BigInt::from(1)),
            j if j >= 1 => Ok(simple_root_multiplicity(
                self.class,
                Exponent::new(j, self.class.level),
            )?),
            _ => Err(CartanError::InvalidIndex {
                j,
                k: 0,
                reason: "block j must be -1 or positive".into(),
            }),
        }
    }

    pub fn validate_index(&self, i: BlockIndex) -> Result<(), CartanError> {
        let size = self.block_size(i.j).map_err(|_| CartanError::InvalidIndex {
            j: i.j,
            k: i.k,
            reason: "block j must be -1 or positive".into(),
        })?;
        if i.k == 0 || BigInt::from(i.k) > size {
            return Err(CartanError::InvalidIndex {
                j: i.j,
                k: i.k,
                reason: format!("k must lie in 1..={size}"),
            });
        }
        Ok(())
    }

    /// `a_{jk,pq} = -(j + p)`.
    pub fn entry(&self, a: BlockIndex, b: BlockIndex) -> Result<i64, CartanError> {
        self.validate_index(a)?;
        self.validate_index(b)?;
        Ok(-(a.j + b.j))
    }

    /// The finite corner with blocks `j in {-1, 1..=j_max}` and at most
    /// `k_max` indices per block, ordered lexicographically by `(j, k)`.
    pub fn truncate(&self, j_max: i64, k_max: u64) -> Result<TruncatedMatrix, CartanError> {
        let mut indices = vec![BlockIndex::REAL];
        let mut block_sizes = vec![(-1, BigInt::from(1))];
        for j in 1..=j_max {
            let size = self.block_size(j)?;
            let take = size.to_u64().map_or(k_max, |s| s.min(k_max));
            indices.extend((1..=take).map(|k| BlockIndex::new(j, k)));
            block_sizes.push((j, size));
        }
        let entries = indices
            .iter()
            .map(|a| indices.iter().map(|b| -(a.j + b.j)).collect())
            .collect();
        Ok(TruncatedMatrix {
            indices,
            entries,
            block_sizes,
        })
    }

    /// Edge multiplicity of the Dynkin diagram between two simple roots:
    /// `|1 - j|` to the real root, `j + j'` across blocks, `2j` inside one.
    pub fn dynkin_edge_multiplicity(&self, a: BlockIndex, b: BlockIndex) -> Result<u64, CartanError> {
        if a == b {
            return Err(CartanError::SameVertex);
        }
        Ok(self.entry(a, b)?.unsigned_abs())
    }

    /// The imaginary simple roots `(j, k)` have diagonal entry `-2j`; the
    /// only real one is `(-1, 1)`.
    pub fn is_real_index(&self, i: BlockIndex) -> Result<bool, CartanError> {
        Ok(self.entry(i, i)? > 0)
    }
}

/// Outcome of one of the conditions (B1)-(B3).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Condition {
    pub holds: bool,
    /// First failing pair, if any.
    pub witness: Option<(BlockIndex, BlockIndex)>,
}

impl Condition {
    fn check(
        indices: &[BlockIndex],
        mut bad: impl FnMut(usize, usize) -> bool,
    ) -> Self {
        for a in 0..indices.len() {
            for b in 0..indices.len() {
                if bad(a, b) {
                    return Self {
                        holds: false,
                        witness: Some((indices[a], indices[b])),
                    };
                }
            }
        }
        Self {
            holds: true,
            witness: None,
        }
    }
}

/// The three Borcherds conditions on a finite corner.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BorcherdsReport {
    /// Symmetry.
    pub b1: Condition,
    /// Non-positive off-diagonal entries.
    pub b2: Condition,
    /// `2 a_ij / a_ii` integral whenever `a_ii > 0`.
    pub b3: Condition,
}

impl BorcherdsReport {
    pub fn all_hold(&self) -> bool {
        self.b1.holds && self.b2.holds && self.b3.holds
    }
}

/// Explicit finite corner of a Borcherds Cartan matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedMatrix {
    indices: Vec<BlockIndex>,
    entries: Vec<Vec<i64>>,
    block_sizes: Vec<(i64, BigInt)>,
}

/// `{rows, cols, entries, block_sizes}` for CLI output.
#[derive(Clone, Debug, Serialize)]
pub struct MatrixSlice {
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub entries: Vec<Vec<i64>>,
    pub block_sizes: Vec<(i64, String)>,
}

impl TruncatedMatrix {
    pub fn indices(&self) -> &[BlockIndex] {
        &self.indices
    }

    pub fn entries(&self) -> &[Vec<i64>] {
        &self.entries
    }

    fn position(&self, i: BlockIndex) -> Option<usize> {
        self.indices.iter().position(|x| *x == i)
    }

    pub fn get(&self, a: BlockIndex, b: BlockIndex) -> Option<i64> {
        Some(self.entries[self.position(a)?][self.position(b)?])
    }

    /// Overwrites one entry; used to inject defects.
    pub fn set(&mut self, a: BlockIndex, b: BlockIndex, value: i64) -> bool {
        match (self.position(a), self.position(b)) {
            (Some(x), Some(y)) => {
                self.entries[x][y] = value;
                true
            }
            _ => false,
        }
    }

    pub fn row(&self, i: BlockIndex) -> Option<&[i64]> {
        self.position(i).map(|x| self.entries[x].as_slice())
    }

    pub fn validate(&self) -> BorcherdsReport {
        let e = &self.entries;
        let b1 = Condition::check(&self.indices, |a, b| e[a][b] != e[b][a]);
        let b2 = Condition::check(&self.indices, |a, b| a != b && e[a][b] > 0);
        let b3 = Condition::check(&self.indices, |a, b| {
            let d = e[a][a];
            d > 0 && (2 * e[a][b]) % d != 0
        });
        BorcherdsReport { b1, b2, b3 }
    }

    /// Exact rank over the rationals. Identical rows are merged first; then
    /// fraction-free (Bareiss) elimination runs on the distinct rows.
    pub fn rank(&self) -> usize {
        let mut rows: Vec<Vec<i64>> = Vec::new();
        for r in &self.entries {
            if !rows.contains(r) {
                rows.push(r.clone());
            }
        }
        bareiss_rank(rows.into_iter().map(|r| r.into_iter().map(BigInt::from).collect()).collect())
    }

    /// `sum coef_i * row(i)` over the truncated columns.
    pub fn combine_rows(&self, combo: &[(BigRational, BlockIndex)]) -> Option<Vec<BigRational>> {
        let mut out = vec![BigRational::zero(); self.indices.len()];
        for (c, i) in combo {
            let row = self.row(*i)?;
            for (o, x) in out.iter_mut().zip(row) {
                *o += c * BigRational::from_integer((*x).into());
            }
        }
        Some(out)
    }

    pub fn to_slice(&self) -> MatrixSlice {
        let labels: Vec<String> = self.indices.iter().map(|i| i.to_string()).collect();
        MatrixSlice {
            rows: labels.clone(),
            cols: labels,
            entries: self.entries.clone(),
            block_sizes: self
                .block_sizes
                .iter()
                .map(|(j, s)| (*j, s.to_string()))
                .collect(),
        }
    }
}

fn bareiss_rank(mut m: Vec<Vec<BigInt>>) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut rank = 0;
    let mut prev = BigInt::from(1);
    for col in 0..cols {
        let Some(pivot) = (rank..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pivot);
        for r in rank + 1..rows {
            for c in col + 1..cols {
                let v = (&m[rank][col] * &m[r][c] - &m[r][col] * &m[rank][c]) / &prev;
                m[r][c] = v;
            }
            m[r][col] = BigInt::zero();
        }
        prev = m[rank][col].clone();
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// A vector `(m, n)` of the rank-2 root lattice, `n in (1/N)Z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct RootVector {
    pub m: i64,
    #[serde(serialize_with = "serialize_exponent")]
    pub n: Exponent,
}

fn serialize_exponent<S: serde::Serializer>(e: &Exponent, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&exponent_string(e))
}

impl RootVector {
    pub fn new(m: i64, n: Exponent) -> Self {
        Self { m, n }
    }

    pub fn int(m: i64, n: i64) -> Self {
        Self::new(m, Exponent::from_integer(n))
    }

    /// Gram matrix `((0, -1), (-1, 0))`.
    pub fn pairing(&self, other: &RootVector) -> Exponent {
        -(Exponent::from_integer(self.m) * other.n + self.n * Exponent::from_integer(other.m))
    }

    /// `-2mn`.
    pub fn norm(&self) -> Exponent {
        self.pairing(self)
    }
}

impl fmt::Display for RootVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.m, exponent_string(&self.n))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RootKind {
    Real,
    Imaginary,
}

/// Real iff the norm is positive.
pub fn root_kind(v: &RootVector) -> RootKind {
    if v.norm() > Exponent::zero() {
        RootKind::Real
    } else {
        RootKind::Imaginary
    }
}

/// Classifies `v` after checking it against the class's multiplicity table,
/// where that table is certified.
pub fn classify_root(class: &'static ClassData, v: &RootVector) -> Result<RootKind, CartanError> {
    use crate::moonshine::{root_multiplicity, Multiplicity};
    match root_multiplicity(class, v.m, v.n)? {
        Multiplicity::Certified(c) if !c.is_positive() => Err(CartanError::NotARoot {
            class: class.label,
            m: v.m,
            n: exponent_string(&v.n),
        }),
        _ => Ok(root_kind(v)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    fn monster() -> BorcherdsCartanMatrix {
        BorcherdsCartanMatrix::for_label(ClassLabel::A1).unwrap()
    }

    fn bi(j: i64, k: u64) -> BlockIndex {
        BlockIndex::new(j, k)
    }

    #[test]
    fn entries() {
        let a = monster();
        assert_eq!(a.entry(bi(-1, 1), bi(-1, 1)).unwrap(), 2);
        assert_eq!(a.entry(bi(1, 5), bi(2, 7)).unwrap(), -3);
        assert_eq!(a.entry(bi(2, 1), bi(2, 2)).unwrap(), -4);
        assert_eq!(a.entry(bi(-1, 1), bi(1, 3)).unwrap(), 0);
        assert!(a.entry(bi(-1, 2), bi(1, 1)).is_err());
        assert!(a.entry(bi(1, 196885), bi(1, 1)).is_err());
        assert!(a.entry(bi(1, 196884), bi(1, 1)).is_ok());
        assert!(a.entry(bi(0, 1), bi(1, 1)).is_err());
    }

    #[test]
    fn block_sizes() {
        assert_eq!(monster().block_size(1).unwrap(), BigInt::from(196884));
        assert_eq!(monster().block_size(-1).unwrap(), BigInt::from(1));
        let a2 = BorcherdsCartanMatrix::for_label(ClassLabel::A2).unwrap();
        assert_eq!(a2.block_size(1).unwrap(), BigInt::from(4372));
        assert_eq!(a2.block_size(-1).unwrap(), BigInt::from(1));
        assert!(BorcherdsCartanMatrix::for_label(ClassLabel::B2).is_err());
    }

    #[test]
    fn borcherds_conditions_and_defect() {
        let t = monster().truncate(5, 3).unwrap();
        assert!(t.validate().all_hold());
        let mut bad = t.clone();
        bad.set(bi(1, 1), bi(2, 1), 1);
        let rep = bad.validate();
        assert!(!rep.b2.holds);
        assert_eq!(rep.b2.witness, Some((bi(1, 1), bi(2, 1))));
        assert!(!rep.b1.holds);
        let mut odd = t.clone();
        odd.set(bi(-1, 1), bi(2, 1), -3);
        odd.set(bi(2, 1), bi(-1, 1), -3);
        odd.set(bi(-1, 1), bi(-1, 1), 4);
        assert!(!odd.validate().b3.holds);
    }

    #[test]
    fn rank_is_two() {
        assert_eq!(monster().truncate(4, 2).unwrap().rank(), 2);
        assert_eq!(monster().truncate(0, 1).unwrap().rank(), 1);
        let mut last = 0;
        for j in 0..6 {
            let r = monster().truncate(j, 2).unwrap().rank();
            assert!(r >= last);
            last = r;
        }
        assert_eq!(last, 2);
    }

    #[test]
    fn row_relation() {
        let t = monster().truncate(5, 3).unwrap();
        let half = |n: i64| Ratio::new(BigInt::from(n), BigInt::from(2));
        let combo = t
            .combine_rows(&[(half(-1), bi(-1, 1)), (half(3), bi(1, 1))])
            .unwrap();
        let target: Vec<BigRational> = t
            .row(bi(2, 1))
            .unwrap()
            .iter()
            .map(|x| BigRational::from_integer((*x).into()))
            .collect();
        assert_eq!(combo, target);
    }

    #[test]
    fn norms() {
        assert_eq!(RootVector::int(1, -1).norm(), Exponent::from_integer(2));
        assert_eq!(RootVector::int(1, 3).norm(), Exponent::from_integer(-6));
        assert_eq!(
            RootVector::new(3, Ratio::new(5, 2)).norm(),
            Exponent::from_integer(-15)
        );
        for j in 1..6 {
            let d = monster().entry(bi(j, 1), bi(j, 1)).unwrap();
            assert_eq!(RootVector::int(1, j).norm(), Exponent::from_integer(d));
        }
    }

    #[test]
    fn classification() {
        let c = ClassData::get(ClassLabel::A1);
        assert_eq!(classify_root(c, &RootVector::int(1, -1)).unwrap(), RootKind::Real);
        assert_eq!(classify_root(c, &RootVector::int(1, 2)).unwrap(), RootKind::Imaginary);
        assert_eq!(classify_root(c, &RootVector::int(2, 3)).unwrap(), RootKind::Imaginary);
        assert!(classify_root(c, &RootVector::int(2, -2)).is_err());
    }

    #[test]
    fn dynkin() {
        let a = monster();
        assert_eq!(a.dynkin_edge_multiplicity(bi(-1, 1), bi(1, 4)).unwrap(), 0);
        assert_eq!(a.dynkin_edge_multiplicity(bi(-1, 1), bi(3, 1)).unwrap(), 2);
        assert_eq!(a.dynkin_edge_multiplicity(bi(2, 1), bi(2, 2)).unwrap(), 4);
        assert_eq!(a.dynkin_edge_multiplicity(bi(2, 1), bi(3, 2)).unwrap(), 5);
        assert!(a.dynkin_edge_multiplicity(bi(2, 1), bi(2, 1)).is_err());
        assert!(a.is_real_index(bi(-1, 1)).unwrap());
        assert!(!a.is_real_index(bi(4, 1)).unwrap());
    }
}
