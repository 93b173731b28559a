//! The hash family itself: applying surjective linear maps to point sets,
//! exact bucket statistics, and the parameter rules that pick the output
//! dimension.
//!
//! Distances to uniform are exact rationals. The ℓ∞ distance maximizes
//! over *all* `q^t` buckets, empty ones included; this is what makes the
//! guarantee worst-case rather than average-case.

mod gf2;
mod params;
mod quadratic;

pub use gf2::{gf2_max_bucket_load, gf2_rank, gf2_sample_surjective, pack_gf2_point};
pub use params::{
    choose_t_binary, choose_t_large_field, hypothesis_check_large_field, injective_t,
    two_stage_hash, two_stage_with_dims, BinaryParams, BinaryVariant, HashParams, HypothesisClause,
    HypothesisReport, LargeFieldChoice, LargeFieldVariant, TwoStageOutcome,
};
pub use quadratic::QuadRat;

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;

use crate::linalg::{FieldCtx, LinalgError, LinearMap};
use crate::rng::SplitMix64;
use crate::util::{ratio_big, rational_to_string};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HashError {
    Linalg(LinalgError),
    EmptySet,
    SetTooSmall { size: u64, needed: u64 },
    DimensionMismatch,
    PointOutOfRange,
    SetTooLargeForSpace,
    BucketSpaceTooLarge { q: u64, t: usize },
    NotBinary,
    NoValidR { reason: String },
    InvalidTau(String),
    InvalidDelta(String),
    SideConditions(HypothesisReport),
}

impl std::fmt::Display for HashError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Linalg(e) => write!(f, "{e}"),
            Self::EmptySet => write!(f, "point set is empty"),
            Self::SetTooSmall { size, needed } => {
                write!(f, "point set has {size} points, at least {needed} required")
            }
            Self::DimensionMismatch => write!(f, "ambient dimensions do not match"),
            Self::PointOutOfRange => write!(f, "point coordinate outside the field"),
            Self::SetTooLargeForSpace => write!(f, "requested more points than the space holds"),
            Self::BucketSpaceTooLarge { q, t } => {
                write!(f, "bucket space q^t = {q}^{t} too large to index")
            }
            Self::NotBinary => write!(f, "operation requires the prime field F_2"),
            Self::NoValidR { reason } => write!(f, "no valid exponent r: {reason}"),
            Self::InvalidTau(msg) => write!(f, "invalid tau: {msg}"),
            Self::InvalidDelta(msg) => write!(f, "invalid delta: {msg}"),
            Self::SideConditions(report) => {
                write!(f, "side conditions violated: {}", report.failed_summary())
            }
        }
    }
}

impl std::error::Error for HashError {}

impl From<LinalgError> for HashError {
    fn from(e: LinalgError) -> Self {
        Self::Linalg(e)
    }
}

/// A finite set `S ⊂ F_q^n`: sorted, duplicate-free, exact membership.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSet {
    ctx: FieldCtx,
    n: usize,
    points: Vec<Vec<u64>>,
}

impl PointSet {
    /// Build from arbitrary points; sorts and deduplicates.
    pub fn new(ctx: &FieldCtx, n: usize, mut points: Vec<Vec<u64>>) -> Result<Self, HashError> {
        for p in &points {
            if p.len() != n {
                return Err(HashError::DimensionMismatch);
            }
            if p.iter().any(|&c| c >= ctx.q()) {
                return Err(HashError::PointOutOfRange);
            }
        }
        points.sort_unstable();
        points.dedup();
        Ok(Self {
            ctx: ctx.clone(),
            n,
            points,
        })
    }

    pub fn empty(ctx: &FieldCtx, n: usize) -> Self {
        Self {
            ctx: ctx.clone(),
            n,
            points: Vec::new(),
        }
    }

    /// All of `F_q^n`. Guarded: `q^n` must stay addressable.
    pub fn full_space(ctx: &FieldCtx, n: usize) -> Result<Self, HashError> {
        let exp = u32::try_from(n).map_err(|_| HashError::SetTooLargeForSpace)?;
        let size = ctx
            .q()
            .checked_pow(exp)
            .filter(|&s| s <= 1 << 24)
            .ok_or(HashError::SetTooLargeForSpace)?;
        let q = ctx.q();
        let points = (0..size)
            .map(|idx| {
                let mut p = vec![0u64; n];
                let mut rest = idx;
                for c in (0..n).rev() {
                    p[c] = rest % q;
                    rest /= q;
                }
                p
            })
            .collect();
        Ok(Self {
            ctx: ctx.clone(),
            n,
            points,
        })
    }

    /// `size` distinct points drawn uniformly, deterministic given the rng.
    pub fn random(
        rng: &mut SplitMix64,
        ctx: &FieldCtx,
        n: usize,
        size: u64,
    ) -> Result<Self, HashError> {
        let q = ctx.q();
        let space = u32::try_from(n)
            .ok()
            .and_then(|e| q.checked_pow(e))
            .ok_or(HashError::SetTooLargeForSpace)?;
        if size > space {
            return Err(HashError::SetTooLargeForSpace);
        }
        let mut chosen = std::collections::BTreeSet::new();
        while (chosen.len() as u64) < size {
            let p: Vec<u64> = (0..n).map(|_| rng.below(q)).collect();
            chosen.insert(p);
        }
        Ok(Self {
            ctx: ctx.clone(),
            n,
            points: chosen.into_iter().collect(),
        })
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> u64 {
        self.points.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: &[u64]) -> bool {
        self.points.binary_search_by(|x| x.as_slice().cmp(p)).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Vec<u64>> {
        self.points.iter()
    }

    pub fn points(&self) -> &[Vec<u64>] {
        &self.points
    }
}

/// Bucket counts of `L(S)`: map from bucket index to count. Absent keys
/// mean zero. The bucket index is the base-q encoding of the output
/// vector, coordinate 0 most significant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BucketHistogram {
    q: u64,
    t: usize,
    counts: BTreeMap<u64, u64>,
    total: u64,
}

impl BucketHistogram {
    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn counts(&self) -> &BTreeMap<u64, u64> {
        &self.counts
    }

    pub fn count(&self, bucket: u64) -> u64 {
        self.counts.get(&bucket).copied().unwrap_or(0)
    }

    pub fn max_bucket(&self) -> u64 {
        self.counts.values().copied().max().unwrap_or(0)
    }

    /// Number of buckets, `q^t`, as a big integer.
    pub fn bucket_count(&self) -> BigUint {
        BigUint::from(self.q).pow(self.t as u32)
    }
}

/// Integer encoding of `L(x)`: base-q digits, coordinate 0 most significant.
pub fn apply_map(map: &LinearMap, x: &[u64]) -> Result<u64, HashError> {
    let image = map.apply(x)?;
    let q = map.ctx().q();
    let mut bucket = 0u64;
    for &digit in &image {
        bucket = bucket * q + digit;
    }
    Ok(bucket)
}

/// Exact bucket counts of `S` under `L`.
pub fn histogram(map: &LinearMap, set: &PointSet) -> Result<BucketHistogram, HashError> {
    if set.is_empty() {
        return Err(HashError::EmptySet);
    }
    if map.n() != set.ambient_dim() || map.ctx() != set.ctx() {
        return Err(HashError::DimensionMismatch);
    }
    let q = map.ctx().q();
    let t = map.t();
    let addressable = u32::try_from(t)
        .ok()
        .and_then(|e| q.checked_pow(e))
        .is_some_and(|s| s <= 1 << 62);
    if !addressable {
        return Err(HashError::BucketSpaceTooLarge { q, t });
    }
    let mut counts = BTreeMap::new();
    for p in set.iter() {
        let bucket = apply_map(map, p)?;
        *counts.entry(bucket).or_insert(0u64) += 1;
    }
    Ok(BucketHistogram {
        q,
        t,
        counts,
        total: set.size(),
    })
}

/// `max_y |count(y)/total - q^{-t}|` over all `q^t` buckets, exact.
pub fn linf_distance(h: &BucketHistogram) -> BigRational {
    let big_q = h.bucket_count();
    let total = BigUint::from(h.total);
    let denom = &total * &big_q;
    // |c/total - 1/Q| = |c*Q - total| / (total*Q)
    let mut max_num = if BigUint::from(h.counts.len() as u64) < big_q {
        // at least one empty bucket contributes |0 - 1/Q| = total/(total*Q)
        total.clone()
    } else {
        BigUint::zero()
    };
    for &c in h.counts.values() {
        let cq = BigUint::from(c) * &big_q;
        let diff = if cq >= total {
            &cq - &total
        } else {
            &total - &cq
        };
        max_num = max_num.max(diff);
    }
    ratio_big(max_num, denom)
}

/// `Σ_y |count(y)/total - q^{-t}|` over all buckets, exact.
pub fn l1_distance(h: &BucketHistogram) -> BigRational {
    let big_q = h.bucket_count();
    let total = BigUint::from(h.total);
    let denom = &total * &big_q;
    let mut sum = BigUint::zero();
    for &c in h.counts.values() {
        let cq = BigUint::from(c) * &big_q;
        sum += if cq >= total { &cq - &total } else { &total - &cq };
    }
    // each empty bucket contributes total / (total*Q)
    let empty = &big_q - BigUint::from(h.counts.len() as u64);
    sum += empty * &total;
    ratio_big(sum, denom)
}

/// Is `L(U_S)` within `τ·q^{-t}` of uniform in ℓ∞? Exact and inclusive:
/// distance equal to the threshold passes.
pub fn linf_pass(map: &LinearMap, set: &PointSet, tau: &BigRational) -> Result<bool, HashError> {
    let h = histogram(map, set)?;
    let threshold =
        tau / BigRational::from_integer(num_bigint::BigInt::from(h.bucket_count()));
    Ok(linf_distance(&h) <= threshold)
}

/// Group the bits of each point of `S ⊂ F_2^n` into `⌈n/ell⌉` blocks of
/// `ell` bits (zero-padded at the end) and read each block as an element
/// of `F_{2^ell}` in the polynomial basis, first bit highest degree.
/// This is an injective F_2-linear embedding of `F_2^n` into
/// `F_{2^ell}^{⌈n/ell⌉}`.
pub fn embed_binary(set: &PointSet, ell: u32) -> Result<PointSet, HashError> {
    if set.ctx().p() != 2 || set.ctx().ell() != 1 {
        return Err(HashError::NotBinary);
    }
    let big = FieldCtx::new(2, ell)?;
    let n = set.ambient_dim();
    let ell_us = ell as usize;
    let n_prime = n.div_ceil(ell_us);
    let points = set
        .iter()
        .map(|p| {
            (0..n_prime)
                .map(|block| {
                    let mut val = 0u64;
                    for offset in 0..ell_us {
                        let bit = p.get(block * ell_us + offset).copied().unwrap_or(0);
                        // first bit of the block is the highest-degree coefficient
                        val |= bit << (ell_us - 1 - offset);
                    }
                    val
                })
                .collect()
        })
        .collect();
    PointSet::new(&big, n_prime, points)
}

/// Render a histogram's distance pair for reports.
pub fn distance_summary(h: &BucketHistogram) -> String {
    format!(
        "linf={} l1={} max_bucket={}",
        rational_to_string(&linf_distance(h)),
        rational_to_string(&l1_distance(h)),
        h.max_bucket()
    )
}
