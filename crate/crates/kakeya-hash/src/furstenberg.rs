//! Rich flats, Furstenberg-set predicates, the size lower bound, and
//! brute-force verification on tiny instances.
//!
//! A k-flat is m-rich for `K` when it meets `K` in at least `m` points;
//! `K` is a (k, m, β)-Furstenberg set when at least a β-fraction of the
//! k-subspace directions admit an m-rich shift. The (k, q^k, 1) case is a
//! Kakeya set. The lower bound states that a (k, ⌈γq^k⌉, β)-Furstenberg
//! set has at least `β·γ^n·q^n·(1 + q^{1-k})^{-n}` points; the audit here
//! checks that against every subset of a small space.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::budget::{Budget, BudgetExceeded};
use crate::hashcore::PointSet;
use crate::linalg::{enumerate_subspaces, gaussian_binomial, Flat, Subspace};

use crate::balance::{canonical_shifts, flat_intersection};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FurstenbergError {
    DimensionMismatch,
    InvalidK { k: usize, n: usize },
    InvalidFraction(String),
    InconsistentRichness { m: u64, from_gamma: u64 },
    UnattainableRichness { m: u64, flat_capacity: u64 },
    SpaceTooLarge { limit: u64 },
    Budget(BudgetExceeded),
}

impl std::fmt::Display for FurstenbergError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::DimensionMismatch => write!(f, "flat and set dimensions do not match"),
            Self::InvalidK { k, n } => write!(f, "k = {k} out of range for n = {n}"),
            Self::InvalidFraction(msg) => write!(f, "{msg}"),
            Self::InconsistentRichness { m, from_gamma } => write!(
                f,
                "richness m = {m} does not match ceil(gamma*q^k) = {from_gamma}"
            ),
            Self::UnattainableRichness { m, flat_capacity } => write!(
                f,
                "no k-flat can hold m = {m} points (a flat has {flat_capacity})"
            ),
            Self::SpaceTooLarge { limit } => {
                write!(f, "exhaustive sweep limited to q^n <= {limit}")
            }
            Self::Budget(b) => write!(f, "{b}"),
        }
    }
}

impl std::error::Error for FurstenbergError {}

impl From<BudgetExceeded> for FurstenbergError {
    fn from(b: BudgetExceeded) -> Self {
        Self::Budget(b)
    }
}

/// Parameters of a Furstenberg query: flat dimension, richness threshold,
/// direction fraction, and optionally the density γ that produced `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct FurstenbergQuery {
    pub k: usize,
    pub m: u64,
    pub beta: BigRational,
    pub gamma: Option<BigRational>,
}

fn check_unit_interval(x: &BigRational, name: &str) -> Result<(), FurstenbergError> {
    if x.is_negative() || x > &BigRational::one() {
        return Err(FurstenbergError::InvalidFraction(format!(
            "{name} must lie in [0, 1]"
        )));
    }
    Ok(())
}

/// `⌈γ·q^k⌉` as the richness threshold derived from a density γ.
pub fn richness_from_gamma(gamma: &BigRational, q: u64, k: usize) -> Result<u64, FurstenbergError> {
    check_unit_interval(gamma, "gamma")?;
    let qk = BigRational::from_integer(BigInt::from(BigUint::from(q).pow(k as u32)));
    let m = (gamma * qk).ceil().to_integer();
    u64::try_from(&m).map_err(|_| FurstenbergError::InvalidFraction("gamma*q^k overflow".into()))
}

impl FurstenbergQuery {
    pub fn new(k: usize, m: u64, beta: BigRational) -> Result<Self, FurstenbergError> {
        check_unit_interval(&beta, "beta")?;
        Ok(Self {
            k,
            m,
            beta,
            gamma: None,
        })
    }

    /// Query with `m = ⌈γ·q^k⌉`; stores γ for the lower-bound formula.
    pub fn from_gamma(
        k: usize,
        gamma: BigRational,
        beta: BigRational,
        q: u64,
    ) -> Result<Self, FurstenbergError> {
        check_unit_interval(&beta, "beta")?;
        let m = richness_from_gamma(&gamma, q, k)?;
        Ok(Self {
            k,
            m,
            beta,
            gamma: Some(gamma),
        })
    }
}

/// Is the flat m-rich with respect to `K`, i.e. `|R ∩ K| >= m`?
pub fn is_rich(flat: &Flat, set: &PointSet, m: u64) -> Result<bool, FurstenbergError> {
    let count =
        flat_intersection(flat, set).map_err(|_| FurstenbergError::DimensionMismatch)?;
    Ok(count >= m)
}

/// Fraction of directions `A ∈ L_k^*` that admit an m-rich shift: the
/// largest β for which `K` is (k, m, β)-Furstenberg. Exact rational with
/// denominator `gauss(n, k, q)`.
pub fn rich_direction_fraction(
    set: &PointSet,
    k: usize,
    m: u64,
    budget: &mut Budget,
) -> Result<BigRational, FurstenbergError> {
    let n = set.ambient_dim();
    if k > n {
        return Err(FurstenbergError::InvalidK { k, n });
    }
    let q = set.ctx().q();
    let per_flat = set
        .size()
        .min(u32::try_from(k).ok().and_then(|e| q.checked_pow(e)).unwrap_or(u64::MAX))
        .max(1);
    let mut rich_directions: u64 = 0;
    let mut total: u64 = 0;
    for sub in
        enumerate_subspaces(set.ctx(), n, k).map_err(|_| FurstenbergError::InvalidK { k, n })?
    {
        total += 1;
        for flat in canonical_shifts(&sub) {
            budget.charge(per_flat)?;
            if is_rich(&flat, set, m)? {
                rich_directions += 1;
                break;
            }
        }
    }
    debug_assert_eq!(
        BigUint::from(total),
        gaussian_binomial(n as u64, k as u64, q).unwrap()
    );
    Ok(BigRational::new(
        BigInt::from(rich_directions),
        BigInt::from(total),
    ))
}

/// Does `K` satisfy the query, i.e. is a β-fraction of directions m-rich?
pub fn is_furstenberg(
    set: &PointSet,
    query: &FurstenbergQuery,
    budget: &mut Budget,
) -> Result<bool, FurstenbergError> {
    if let Some(gamma) = &query.gamma {
        let derived = richness_from_gamma(gamma, set.ctx().q(), query.k)?;
        if derived != query.m {
            return Err(FurstenbergError::InconsistentRichness {
                m: query.m,
                from_gamma: derived,
            });
        }
    }
    if query.beta.is_zero() {
        return Ok(true);
    }
    let fraction = rich_direction_fraction(set, query.k, query.m, budget)?;
    Ok(fraction >= query.beta)
}

/// The size floor for a (k, ⌈γq^k⌉, β)-Furstenberg set of `F_q^n`:
/// `β · γ^n · q^n · (1 + q^{-(k-1)})^{-n}`, exact.
pub fn lower_bound(
    n: u64,
    q: u64,
    k: usize,
    gamma: &BigRational,
    beta: &BigRational,
) -> Result<BigRational, FurstenbergError> {
    check_unit_interval(gamma, "gamma")?;
    check_unit_interval(beta, "beta")?;
    if k < 1 {
        return Err(FurstenbergError::InvalidK { k, n: n as usize });
    }
    let n32 = n as u32;
    let q_pow_k1 = BigRational::from_integer(BigInt::from(BigUint::from(q).pow(k as u32 - 1)));
    // (1 + q^{1-k})^{-n} = (q^{k-1} / (q^{k-1} + 1))^n
    let shrink = (&q_pow_k1 / (&q_pow_k1 + BigRational::one())).pow(n32 as i32);
    let qn = BigRational::from_integer(BigInt::from(BigUint::from(q).pow(n32)));
    Ok(beta * gamma.pow(n32 as i32) * qn * shrink)
}

/// One violation found by the exhaustive audit.
#[derive(Debug, Clone)]
pub struct LowerBoundViolation {
    pub subset: Vec<Vec<u64>>,
    pub gamma: BigRational,
    pub beta: BigRational,
    pub m: u64,
    pub size: u64,
    pub bound: BigRational,
}

/// Exhaustive audit report over all subsets of `F_q^n`.
#[derive(Debug, Clone)]
pub struct LowerBoundAudit {
    pub subsets_checked: u64,
    pub furstenberg_instances: u64,
    pub violations: Vec<LowerBoundViolation>,
}

/// For every subset `K` of `F_q^n` and every (γ, β) grid point: if `K` is
/// (k, ⌈γq^k⌉, β)-Furstenberg then `|K| >= lower_bound`. One violation is
/// a bug. Exhaustive mode needs `q^n <= 12`.
pub fn audit_lower_bound_exhaustive(
    ctx: &crate::linalg::FieldCtx,
    n: usize,
    k: usize,
    gamma_grid: &[BigRational],
    beta_grid: &[BigRational],
    budget: &mut Budget,
) -> Result<LowerBoundAudit, FurstenbergError> {
    let q = ctx.q();
    let space = q.pow(n as u32);
    if space > 12 {
        return Err(FurstenbergError::SpaceTooLarge { limit: 12 });
    }
    let full = PointSet::full_space(ctx, n).expect("tiny space");
    let all_points = full.points().to_vec();
    let mut audit = LowerBoundAudit {
        subsets_checked: 0,
        furstenberg_instances: 0,
        violations: Vec::new(),
    };
    for mask in 0u64..(1 << space) {
        let subset: Vec<Vec<u64>> = all_points
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, p)| p.clone())
            .collect();
        let set = PointSet::new(ctx, n, subset.clone()).expect("valid points");
        audit.subsets_checked += 1;
        for gamma in gamma_grid {
            let m = richness_from_gamma(gamma, q, k)?;
            // the direction fraction does not depend on beta: compute once
            let fraction = rich_direction_fraction(&set, k, m, budget)?;
            for beta in beta_grid {
                let is_fur = if beta.is_zero() {
                    true
                } else {
                    &fraction >= beta
                };
                if !is_fur {
                    continue;
                }
                audit.furstenberg_instances += 1;
                let bound = lower_bound(n as u64, q, k, gamma, beta)?;
                let size = BigRational::from_integer(BigInt::from(set.size()));
                if size < bound {
                    audit.violations.push(LowerBoundViolation {
                        subset: subset.clone(),
                        gamma: gamma.clone(),
                        beta: beta.clone(),
                        m,
                        size: set.size(),
                        bound,
                    });
                }
            }
        }
    }
    Ok(audit)
}

/// Search mode for [`min_furstenberg_size`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    /// Scan subsets by increasing size; exact minimum. Needs `q^n <= 12`.
    Exhaustive,
    /// Repeatedly add the point that covers the most deficient
    /// directions; upper-bound witness only.
    Greedy,
}

/// Smallest `K` (exhaustive) or a small witness (greedy) achieving the
/// (k, m, β)-Furstenberg property.
pub fn min_furstenberg_size(
    ctx: &crate::linalg::FieldCtx,
    n: usize,
    k: usize,
    m: u64,
    beta: &BigRational,
    mode: SearchMode,
    budget: &mut Budget,
) -> Result<(u64, PointSet), FurstenbergError> {
    check_unit_interval(beta, "beta")?;
    if k > n {
        return Err(FurstenbergError::InvalidK { k, n });
    }
    let q = ctx.q();
    if m == 0 || beta.is_zero() {
        return Ok((0, PointSet::empty(ctx, n)));
    }
    // a k-flat has exactly q^k points, so richer thresholds are hopeless
    let flat_capacity = u32::try_from(k)
        .ok()
        .and_then(|e| q.checked_pow(e))
        .unwrap_or(u64::MAX);
    if m > flat_capacity {
        return Err(FurstenbergError::UnattainableRichness { m, flat_capacity });
    }
    let space = q.pow(n as u32);
    match mode {
        SearchMode::Exhaustive => {
            if space > 12 {
                return Err(FurstenbergError::SpaceTooLarge { limit: 12 });
            }
            let full = PointSet::full_space(ctx, n).expect("tiny space");
            let all_points = full.points().to_vec();
            // masks ordered by popcount, then numerically: first hit is minimal
            let mut masks: Vec<u64> = (0..(1u64 << space)).collect();
            masks.sort_by_key(|m| (m.count_ones(), *m));
            for mask in masks {
                let subset: Vec<Vec<u64>> = all_points
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, p)| p.clone())
                    .collect();
                let set = PointSet::new(ctx, n, subset).expect("points from the space are valid");
                let fraction = rich_direction_fraction(&set, k, m, budget)?;
                if &fraction >= beta {
                    return Ok((set.size(), set));
                }
            }
            unreachable!("the full space is (k, q^k, 1)-Furstenberg and m <= q^k is forced by feasibility")
        }
        SearchMode::Greedy => {
            let full = PointSet::full_space(ctx, n)
                .map_err(|_| FurstenbergError::SpaceTooLarge { limit: 1 << 24 })?;
            let directions: Vec<Subspace> = enumerate_subspaces(ctx, n, k)
                .map_err(|_| FurstenbergError::InvalidK { k, n })?
                .collect();
            let mut chosen: Vec<Vec<u64>> = Vec::new();
            loop {
                let set = PointSet::new(ctx, n, chosen.clone()).expect("points from the space are valid");
                let fraction = rich_direction_fraction(&set, k, m, budget)?;
                if &fraction >= beta {
                    return Ok((set.size(), set));
                }
                // deficient directions: no m-rich shift yet
                let deficient: Vec<&Subspace> = directions
                    .iter()
                    .filter(|sub| {
                        !canonical_shifts(sub)
                            .any(|flat| is_rich(&flat, &set, m).unwrap_or(false))
                    })
                    .collect();
                // add the point that makes the most deficient directions rich
                let mut best: Option<(u64, Vec<u64>)> = None;
                for cand in full.iter() {
                    if set.contains(cand) {
                        continue;
                    }
                    budget.charge(deficient.len() as u64)?;
                    let mut gain = 0u64;
                    for sub in &deficient {
                        let covers = canonical_shifts(sub).any(|flat| {
                            if !flat.contains(cand) {
                                return false;
                            }
                            flat_intersection(&flat, &set).map(|c| c + 1 >= m).unwrap_or(false)
                        });
                        if covers {
                            gain += 1;
                        }
                    }
                    let better = match &best {
                        None => true,
                        Some((bg, bp)) => gain > *bg || (gain == *bg && cand < bp),
                    };
                    if better {
                        best = Some((gain, cand.clone()));
                    }
                }
                match best {
                    Some((_, p)) => chosen.push(p),
                    // m <= q^k makes the full space satisfy every query,
                    // so the loop returns before running out of points
                    None => unreachable!("full space satisfies any feasible query"),
                }
            }
        }
    }
}
