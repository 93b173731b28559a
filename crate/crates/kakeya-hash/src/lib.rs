//! Linear hashing over finite fields, studied exactly.
//!
//! A surjective linear map `L : F_q^n -> F_q^t` hashes a point set
//! `S ⊂ F_q^n` into `q^t` buckets. This crate provides the exact machinery
//! needed to study how uniform those buckets are in the worst case
//! (ℓ∞ distance to uniform) rather than merely on average:
//!
//! - [`linalg`]: fields `F_{p^ℓ}`, dense matrices, rank/kernel/RREF,
//!   uniform sampling of surjective maps, and enumeration of subspaces and
//!   flats in canonical form.
//! - [`hashcore`]: bucket histograms, exact ℓ∞/ℓ1 distances, and the
//!   parameter rules that pick an output dimension `t` for a requested
//!   balance `τ` and failure fraction `δ`.
//! - [`balance`]: the kernel-side view — τ-balanced flats and
//!   τ-shift-balanced subspaces — with exhaustive fraction audits.
//! - [`furstenberg`]: m-rich flats, (k,m,β)-Furstenberg predicates, the
//!   size lower bound, and brute-force verification on tiny instances.
//! - [`polymethod`]: multivariate polynomials, Hasse derivatives,
//!   multiplicities, Schwartz–Zippel audits, and the evaluation-matrix
//!   rank toolkit.
//!
//! All counting is exact: arbitrary-precision integers and rationals
//! throughout, floating point only in human-readable rendering.
//!
//! ```
//! use kakeya_hash::hashcore::{histogram, linf_distance, PointSet};
//! use kakeya_hash::linalg::{sample_surjective_map, FieldCtx};
//! use kakeya_hash::rng::SplitMix64;
//!
//! let ctx = FieldCtx::new(2, 1)?;
//! let mut rng = SplitMix64::new(7);
//! let set = PointSet::random(&mut rng, &ctx, 12, 512)?;
//! let map = sample_surjective_map(&mut rng, &ctx, 12, 4)?;
//! let h = histogram(&map, &set)?;
//! assert_eq!(h.total(), 512);
//! assert!(h.max_bucket() >= 512 / 16);
//! println!("linf = {}", linf_distance(&h));
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod balance;
pub mod budget;
pub mod furstenberg;
pub mod hashcore;
pub mod linalg;
pub mod polymethod;
pub mod rng;
pub mod util;
