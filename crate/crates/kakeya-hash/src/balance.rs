//! Balance of flats against a point set: the kernel-side view of hashing.
//!
//! A surjective map's buckets are the shifts of its kernel, so "every
//! bucket is within `τ` of uniform" is the same statement as "every shift
//! of the kernel meets `S` in `(1±τ)·E` points", where `E_k = |S|/q^{n-k}`
//! is the expected intersection with a uniformly random k-flat. This
//! module works entirely on that side: exact balance predicates,
//! exhaustive shift-balanced fraction counts, and audits of the two
//! variance bounds (concentration of a random flat, anti-concentration of
//! a random flat inside an unbalanced one).
//!
//! Degenerate case, by the literal formula: when `S` is empty, `E_k = 0`
//! and every flat is balanced (`|0 - 0| <= τ·0`).

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::budget::{Budget, BudgetExceeded};
use crate::hashcore::PointSet;
use crate::linalg::{enumerate_flats, enumerate_subspaces, gaussian_binomial, Flat, Subspace};

/// Cap on stored witnesses; counts stay exact regardless.
pub const WITNESS_CAP: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BalanceError {
    DimensionMismatch,
    InvalidK { k: usize, n: usize },
    KTooSmall { k: usize, min: usize },
    SigmaNotBelowTau,
    FlatNotUnbalanced,
    Budget(BudgetExceeded),
}

impl std::fmt::Display for BalanceError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::DimensionMismatch => write!(f, "flat and set dimensions do not match"),
            Self::InvalidK { k, n } => write!(f, "k = {k} out of range for n = {n}"),
            Self::KTooSmall { k, min } => write!(f, "k = {k} below the minimum {min}"),
            Self::SigmaNotBelowTau => write!(f, "sigma must be strictly below tau"),
            Self::FlatNotUnbalanced => write!(f, "the given flat is not tau-unbalanced"),
            Self::Budget(b) => write!(f, "{b}"),
        }
    }
}

impl std::error::Error for BalanceError {}

impl From<BudgetExceeded> for BalanceError {
    fn from(b: BudgetExceeded) -> Self {
        Self::Budget(b)
    }
}

/// Points per k-flat, saturating instead of wrapping for huge k.
fn flat_point_cap(q: u64, k: usize) -> u64 {
    u32::try_from(k)
        .ok()
        .and_then(|e| q.checked_pow(e))
        .unwrap_or(u64::MAX)
}

/// `E_k(S) = |S| / q^{n-k}`: expected size of `S ∩ R` over a uniformly
/// random k-flat `R`.
pub fn expected_intersection(set: &PointSet, k: usize) -> Result<BigRational, BalanceError> {
    let n = set.ambient_dim();
    if k > n {
        return Err(BalanceError::InvalidK { k, n });
    }
    let q_pow = BigUint::from(set.ctx().q()).pow((n - k) as u32);
    Ok(BigRational::new(
        BigInt::from(set.size()),
        BigInt::from(q_pow),
    ))
}

/// Exact `|R ∩ S|`, iterating whichever side is smaller.
pub fn flat_intersection(flat: &Flat, set: &PointSet) -> Result<u64, BalanceError> {
    if flat.ambient_dim() != set.ambient_dim() || flat.ctx() != set.ctx() {
        return Err(BalanceError::DimensionMismatch);
    }
    let q = set.ctx().q();
    let flat_size = u32::try_from(flat.dim())
        .ok()
        .and_then(|e| q.checked_pow(e));
    let count = match flat_size {
        Some(fs) if fs < set.size() => {
            flat.points().iter().filter(|p| set.contains(p)).count() as u64
        }
        _ => set.iter().filter(|p| flat.contains(p)).count() as u64,
    };
    Ok(count)
}

fn balance_deviation_ok(count: u64, expected: &BigRational, tau: &BigRational) -> bool {
    // | count - E | <= tau * E, exact and inclusive
    let count = BigRational::from_integer(BigInt::from(count));
    let dev = (&count - expected).abs();
    dev <= tau * expected
}

/// Is the flat `τ`-balanced with respect to `S`?
pub fn is_balanced(flat: &Flat, set: &PointSet, tau: &BigRational) -> Result<bool, BalanceError> {
    let expected = expected_intersection(set, flat.dim())?;
    let count = flat_intersection(flat, set)?;
    Ok(balance_deviation_ok(count, &expected, tau))
}

/// All canonical shifts of a subspace (zeros on the pivot coordinates),
/// one per coset, `q^{n-k}` in total.
pub fn canonical_shifts(sub: &Subspace) -> impl Iterator<Item = Flat> + '_ {
    let q = sub.ctx().q();
    let n = sub.ambient_dim();
    let free: Vec<usize> = (0..n).filter(|c| !sub.pivots().contains(c)).collect();
    let total = u32::try_from(free.len())
        .ok()
        .and_then(|e| q.checked_pow(e))
        .expect("shift family too large to enumerate");
    (0..total).map(move |idx| {
        let mut shift = vec![0u64; n];
        let mut rest = idx;
        for &c in free.iter().rev() {
            shift[c] = rest % q;
            rest /= q;
        }
        // shift vanishes on the pivots, so this is already canonical
        Flat::canonicalize(&shift, sub.clone())
    })
}

/// Is every shift of `A` τ-balanced? Returns the first violating flat
/// (with its intersection count) otherwise.
pub fn is_shift_balanced(
    sub: &Subspace,
    set: &PointSet,
    tau: &BigRational,
) -> Result<(bool, Option<(Flat, u64)>), BalanceError> {
    if sub.ambient_dim() != set.ambient_dim() || sub.ctx() != set.ctx() {
        return Err(BalanceError::DimensionMismatch);
    }
    let expected = expected_intersection(set, sub.dim())?;
    for flat in canonical_shifts(sub) {
        let count = flat_intersection(&flat, set)?;
        if !balance_deviation_ok(count, &expected, tau) {
            return Ok((false, Some((flat, count))));
        }
    }
    Ok((true, None))
}

/// A subspace that failed the shift-balance test, with one violating flat.
#[derive(Clone, Debug)]
pub struct UnbalancedWitness {
    pub subspace: Subspace,
    pub violating_flat: Flat,
    pub intersection: u64,
}

/// Exhaustive count of τ-shift-balanced k-subspaces.
#[derive(Clone, Debug)]
pub struct BalanceReport {
    pub n: usize,
    pub k: usize,
    pub q: u64,
    pub tau: BigRational,
    pub total_subspaces: BigUint,
    pub shift_balanced_count: BigUint,
    /// `shift_balanced_count / total_subspaces`.
    pub fraction: BigRational,
    /// Up to [`WITNESS_CAP`] unbalanced subspaces, each re-verifiable.
    pub witnesses: Vec<UnbalancedWitness>,
}

/// Count exactly which k-subspaces are τ-shift-balanced with respect to
/// `S`, enumerating all of them. One budget unit per flat-point
/// incidence check.
pub fn shift_balanced_fraction(
    set: &PointSet,
    k: usize,
    tau: &BigRational,
    budget: &mut Budget,
) -> Result<BalanceReport, BalanceError> {
    let n = set.ambient_dim();
    if k > n {
        return Err(BalanceError::InvalidK { k, n });
    }
    let q = set.ctx().q();
    let expected = expected_intersection(set, k)?;
    let per_flat = set.size().min(flat_point_cap(q, k)).max(1);
    let mut balanced: u64 = 0;
    let mut total: u64 = 0;
    let mut witnesses = Vec::new();
    for sub in enumerate_subspaces(set.ctx(), n, k).map_err(|_| BalanceError::InvalidK { k, n })? {
        total += 1;
        let mut ok = true;
        for flat in canonical_shifts(&sub) {
            budget.charge(per_flat)?;
            let count = flat_intersection(&flat, set)?;
            if !balance_deviation_ok(count, &expected, tau) {
                ok = false;
                if witnesses.len() < WITNESS_CAP {
                    witnesses.push(UnbalancedWitness {
                        subspace: sub.clone(),
                        violating_flat: flat,
                        intersection: count,
                    });
                }
                break;
            }
        }
        if ok {
            balanced += 1;
        }
    }
    let total_subspaces =
        gaussian_binomial(n as u64, k as u64, q).map_err(|_| BalanceError::InvalidK { k, n })?;
    debug_assert_eq!(BigUint::from(total), total_subspaces);
    Ok(BalanceReport {
        n,
        k,
        q,
        tau: tau.clone(),
        total_subspaces: total_subspaces.clone(),
        shift_balanced_count: BigUint::from(balanced),
        fraction: BigRational::new(BigInt::from(balanced), BigInt::from(total_subspaces)),
        witnesses,
    })
}

/// Outcome of the concentration audit: the fraction of σ-unbalanced
/// (k-2)-flats against the `1/(σ²q)` bound.
#[derive(Clone, Debug)]
pub struct ConcentrationAudit {
    pub total_flats: BigUint,
    pub unbalanced_flats: BigUint,
    pub fraction_unbalanced: BigRational,
    /// `1/(σ²q)`; `None` means the bound is infinite (σ = 0).
    pub bound: Option<BigRational>,
    /// fraction <= bound (vacuously true when infinite).
    pub pass: bool,
    /// The hypothesis `E_{k-2} >= q` under which the bound is claimed;
    /// reported, never silently assumed.
    pub hypothesis_met: bool,
    /// The sharper unconditional form `1/(σ²·E_{k-2})`, when `E > 0`.
    pub variance_bound: Option<BigRational>,
    pub variance_pass: bool,
}

/// Exhaustively count σ-unbalanced (k-2)-flats of the whole space and
/// compare against `1/(σ²q)`. Needs `3 <= k <= n`.
pub fn audit_claim_concentration(
    set: &PointSet,
    k: usize,
    sigma: &BigRational,
    budget: &mut Budget,
) -> Result<ConcentrationAudit, BalanceError> {
    let n = set.ambient_dim();
    if k < 3 {
        return Err(BalanceError::KTooSmall { k, min: 3 });
    }
    if k > n {
        return Err(BalanceError::InvalidK { k, n });
    }
    let q = set.ctx().q();
    let dim = k - 2;
    let expected = expected_intersection(set, dim)?;
    let per_flat = set.size().min(flat_point_cap(q, dim)).max(1);
    let mut total: u64 = 0;
    let mut unbalanced: u64 = 0;
    for flat in enumerate_flats(set.ctx(), n, dim).map_err(|_| BalanceError::InvalidK { k, n })? {
        budget.charge(per_flat)?;
        total += 1;
        let count = flat_intersection(&flat, set)?;
        if !balance_deviation_ok(count, &expected, sigma) {
            unbalanced += 1;
        }
    }
    let fraction = BigRational::new(BigInt::from(unbalanced), BigInt::from(total));
    let sigma_sq = sigma * sigma;
    let bound = (!sigma_sq.is_zero())
        .then(|| (BigRational::from_integer(BigInt::from(q)) * &sigma_sq).recip());
    let pass = bound.as_ref().is_none_or(|b| &fraction <= b);
    let q_rat = BigRational::from_integer(BigInt::from(q));
    let hypothesis_met = expected >= q_rat;
    let variance_bound =
        (!sigma_sq.is_zero() && expected.is_positive()).then(|| (&sigma_sq * &expected).recip());
    let variance_pass = variance_bound.as_ref().is_none_or(|b| &fraction <= b);
    Ok(ConcentrationAudit {
        total_flats: BigUint::from(total),
        unbalanced_flats: BigUint::from(unbalanced),
        fraction_unbalanced: fraction,
        bound,
        pass,
        hypothesis_met,
        variance_bound,
        variance_pass,
    })
}

/// Outcome of the anti-concentration audit inside an unbalanced flat.
#[derive(Clone, Debug)]
pub struct AntiConcentrationAudit {
    pub total_flats: BigUint,
    pub unbalanced_flats: BigUint,
    pub fraction_unbalanced: BigRational,
    /// `1 - (1+τ)/((τ-σ)²q)`; can be non-positive, in which case the
    /// audit passes vacuously.
    pub bound: BigRational,
    pub pass: bool,
    /// The hypothesis `E_{k-2} >= q`; reported, never silently assumed.
    pub hypothesis_met: bool,
    /// The sharper unconditional form `1 - (1+τ)/((τ-σ)²·E_{k-2})`.
    pub variance_bound: Option<BigRational>,
    pub variance_pass: bool,
}

/// All `dim`-flats contained in the flat `T`, via the affine
/// parametrization of `T` by `F_q^k`.
pub fn flats_within(t_flat: &Flat, dim: usize) -> Result<Vec<Flat>, BalanceError> {
    let k = t_flat.dim();
    let n = t_flat.ambient_dim();
    if dim > k {
        return Err(BalanceError::InvalidK { k: dim, n: k });
    }
    let ctx = t_flat.ctx();
    let f = ctx.clone();
    let basis = t_flat.subspace().basis();
    let mut out = Vec::new();
    for inner in enumerate_flats(ctx, k, dim).map_err(|_| BalanceError::InvalidK { k: dim, n })? {
        // map x in F_q^k to t_shift + x * B
        let mut shift_image = t_flat.shift().to_vec();
        for (i, &xi) in inner.shift().iter().enumerate() {
            if xi != 0 {
                for j in 0..n {
                    let term = f.mul(xi, basis.get(i, j));
                    shift_image[j] = f.add(shift_image[j], term);
                }
            }
        }
        let dir_rows: Vec<Vec<u64>> = (0..inner.dim())
            .map(|i| {
                let row = inner.subspace().basis().row(i);
                let mut image = vec![0u64; n];
                for (idx, &xi) in row.iter().enumerate() {
                    if xi != 0 {
                        for j in 0..n {
                            let term = f.mul(xi, basis.get(idx, j));
                            image[j] = f.add(image[j], term);
                        }
                    }
                }
                image
            })
            .collect();
        let direction = Subspace::from_spanning(ctx, n, &dir_rows);
        out.push(Flat::canonicalize(&shift_image, direction));
    }
    Ok(out)
}

/// Exhaustively check that a τ-unbalanced k-flat `T` contains mostly
/// σ-unbalanced (k-2)-flats: fraction `>= 1 - (1+τ)/((τ-σ)²q)`.
/// Needs `σ < τ`, `T` actually τ-unbalanced, `k >= 3`.
pub fn audit_claim_anticoncentration(
    t_flat: &Flat,
    set: &PointSet,
    tau: &BigRational,
    sigma: &BigRational,
    budget: &mut Budget,
) -> Result<AntiConcentrationAudit, BalanceError> {
    let k = t_flat.dim();
    if k < 3 {
        return Err(BalanceError::KTooSmall { k, min: 3 });
    }
    if sigma >= tau {
        return Err(BalanceError::SigmaNotBelowTau);
    }
    if is_balanced(t_flat, set, tau)? {
        return Err(BalanceError::FlatNotUnbalanced);
    }
    let q = set.ctx().q();
    let dim = k - 2;
    let expected = expected_intersection(set, dim)?;
    let per_flat = set.size().min(flat_point_cap(q, dim)).max(1);
    let mut total: u64 = 0;
    let mut unbalanced: u64 = 0;
    for flat in flats_within(t_flat, dim)? {
        budget.charge(per_flat)?;
        total += 1;
        let count = flat_intersection(&flat, set)?;
        if !balance_deviation_ok(count, &expected, sigma) {
            unbalanced += 1;
        }
    }
    let fraction = BigRational::new(BigInt::from(unbalanced), BigInt::from(total));
    let gap = tau - sigma;
    let gap_sq = &gap * &gap;
    let one_plus_tau = BigRational::one() + tau;
    let q_rat = BigRational::from_integer(BigInt::from(q));
    let bound = BigRational::one() - &one_plus_tau / (&gap_sq * &q_rat);
    let pass = fraction >= bound;
    let hypothesis_met = expected >= q_rat;
    let variance_bound = expected
        .is_positive()
        .then(|| BigRational::one() - &one_plus_tau / (&gap_sq * &expected));
    let variance_pass = variance_bound.as_ref().is_none_or(|b| &fraction >= b);
    Ok(AntiConcentrationAudit {
        total_flats: BigUint::from(total),
        unbalanced_flats: BigUint::from(unbalanced),
        fraction_unbalanced: fraction,
        bound,
        pass,
        hypothesis_met,
        variance_bound,
        variance_pass,
    })
}
