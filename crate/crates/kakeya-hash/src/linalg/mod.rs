//! Exact finite-field linear algebra.
//!
//! Fields `F_p` and `F_{p^ℓ}` with deterministic moduli, dense matrices
//! with rank/kernel/RREF, uniform sampling of surjective maps, and
//! enumeration of subspaces and flats in canonical form.

mod field;
mod matrix;
mod subspace;

pub use field::{FieldCtx, FieldElem, MAX_Q};
pub use matrix::{
    enumerate_matrices, enumerate_surjective_maps, sample_surjective_map, surjective_map_count,
    LinearMap, MatrixFq,
};
pub use subspace::{enumerate_flats, enumerate_subspaces, gaussian_binomial, Flat, Subspace};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LinalgError {
    NotPrime(u64),
    ZeroExtensionDegree,
    FieldTooLarge { p: u64, ell: u32 },
    ValueOutOfRange { val: u64, q: u64 },
    CtxMismatch,
    DivisionByZero,
    DimensionMismatch,
    NotSurjective,
    ZeroOutputDimension,
    NoSurjection { n: usize, t: usize },
    DimensionTooLarge { k: u64, n: u64 },
}

impl std::fmt::Display for LinalgError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::NotPrime(p) => write!(f, "{p} is not prime"),
            Self::ZeroExtensionDegree => write!(f, "extension degree must be at least 1"),
            Self::FieldTooLarge { p, ell } => {
                write!(f, "field F_{{{p}^{ell}}} exceeds the supported size 2^20")
            }
            Self::ValueOutOfRange { val, q } => {
                write!(f, "value {val} is not an element of a field of order {q}")
            }
            Self::CtxMismatch => write!(f, "operands belong to different fields"),
            Self::DivisionByZero => write!(f, "division by zero"),
            Self::DimensionMismatch => write!(f, "dimension mismatch"),
            Self::NotSurjective => write!(f, "matrix does not have full row rank"),
            Self::ZeroOutputDimension => write!(f, "output dimension t must be at least 1"),
            Self::NoSurjection { n, t } => {
                write!(f, "no surjective map from dimension {n} onto dimension {t}")
            }
            Self::DimensionTooLarge { k, n } => {
                write!(f, "subspace dimension {k} exceeds ambient dimension {n}")
            }
        }
    }
}

impl std::error::Error for LinalgError {}
