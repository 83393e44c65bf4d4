//! The Monster Lie algebra and the Fricke monstrous Lie algebras as Borcherds
//! algebras: exact q-series and McKay-Thompson data, Borcherds Cartan
//! matrices, free Lie algebra bases, element arithmetic, and checks of the
//! denominator identities.
//!
//! Series and algebra elements are generic over a [`scalar::Coefficient`];
//! the aliases below fix exact rationals, which every verification uses.

pub mod algebra;
pub mod cartan;
pub mod cli;
pub mod freelie;
pub mod moonshine;
pub mod qseries;
pub mod scalar;

pub use num_bigint::BigInt;
pub use num_rational::BigRational;

pub use algebra::{AlgebraElement, Basis, MonsterAlgebra};
pub use cartan::{BlockIndex, BorcherdsCartanMatrix, RootVector};
pub use freelie::{Degree, Gen, GeneratorSet};
pub use moonshine::{ClassData, ClassLabel, IdentityReport};
pub use qseries::{Exponent, QSeries};
pub use scalar::Coefficient;

/// Exact rational scalars.
pub type Rational = BigRational;
/// Truncated q-series with rational coefficients.
pub type Series = QSeries<BigRational>;
/// Element of a Fricke monstrous Lie algebra with rational coefficients.
pub type Element = AlgebraElement<BigRational>;
/// Lie algebra with rational coefficients.
pub type Algebra = MonsterAlgebra<BigRational>;
