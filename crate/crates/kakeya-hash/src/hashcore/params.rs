//! Output-dimension selection rules and their hypothesis checks.
//!
//! Two families of rules:
//!
//! - Large field: when `q` is already polynomially large in `n`, take
//!   `t = r - 3` where `q^r < |S| <= q^{r+1}`. The entropy loss is at
//!   most 4 field digits.
//! - Binary: embed `F_2^n` into `F_{2^ℓ}^{⌈n/ℓ⌉}` for a computed block
//!   size ℓ, apply the large-field rule there, and read the result back
//!   as an `F_2`-map of output length `t = (r-3)·ℓ`. The two-stage rules
//!   first hash injectively into `F_2^m`, `m ≈ 2·log2|S|`, then compress.
//!
//! Every threshold is evaluated by exact integer/rational power
//! comparison (`2^t >= rational`), never by floating logarithms. Rules
//! whose constants involve `√τ` are evaluated exactly in `Q(√τ)`.
//!
//! Each rule also evaluates the closed-form floor
//! `t >= log2|S| - 4·log2(...) - c` it is meant to guarantee and reports
//! whether the computed `t` actually meets it ([`BinaryParams::stated_bound_met`]).
//! The computed `t` is returned as-is either way: when the block-size
//! rounding is unfavorable the recipe can land up to 4 bits below the
//! closed form, and silently clamping would misstate what the
//! construction achieves.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::linalg::{sample_surjective_map, FieldCtx, LinearMap};
use crate::rng::SplitMix64;
use crate::util::{ceil_log2_rational, pow2_rational, rational_to_string};

use super::quadratic::{tau_minus_sqrt_tau_squared, QuadRat};
use super::{histogram, BucketHistogram, HashError, PointSet};

/// One hypothesis clause of a parameter rule, with its exact verdict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HypothesisClause {
    pub description: String,
    pub satisfied: bool,
}

/// Exact evaluation of a rule's hypotheses; `pass` iff every clause holds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HypothesisReport {
    pub clauses: Vec<HypothesisClause>,
    pub pass: bool,
}

impl HypothesisReport {
    fn from_clauses(clauses: Vec<HypothesisClause>) -> Self {
        let pass = clauses.iter().all(|c| c.satisfied);
        Self { clauses, pass }
    }

    pub fn failed_summary(&self) -> String {
        let failed: Vec<&str> = self
            .clauses
            .iter()
            .filter(|c| !c.satisfied)
            .map(|c| c.description.as_str())
            .collect();
        if failed.is_empty() {
            "all clauses hold".to_string()
        } else {
            failed.join("; ")
        }
    }
}

/// Summary of a chosen hash parameterization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HashParams {
    pub tau: BigRational,
    pub delta: BigRational,
    pub t: u64,
    /// Exact upper bound on the entropy loss `log2|S| - t`, in bits
    /// (`⌈log2|S|⌉ - t` as a rational).
    pub entropy_loss_bound: BigRational,
    pub variant: String,
}

/// Which large-field hypothesis set to check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LargeFieldVariant {
    /// `q >= 32·max(n(1+τ)/(τδ)², n)`, `n >= 5`, any `τ > 0`.
    Main,
    /// `q >= max(n(1+τ)/((τ-√τ)²δ²), n)`, `n >= 20`, `τ > 1`, `δ < 1/10`.
    Improved,
}

/// Result of the large-field selection rule `t = r - 3`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LargeFieldChoice {
    pub r: u64,
    pub t: u64,
    /// `⌈log_q|S|⌉ - t`, always 4 for this rule.
    pub entropy_loss_qdigits: u64,
}

/// Largest `r >= 0` with `q^r < size`; `size >= 2` assumed.
fn log_floor_strict(q: u64, size: &BigUint) -> u64 {
    let q = BigUint::from(q);
    let mut r = 0u64;
    let mut power = &q * 1u32; // q^1
    while &power < size {
        r += 1;
        power *= &q;
    }
    r
}

/// Pick `t = r - 3` where `q^r < |S| <= q^{r+1}`, requiring `4 <= r <= n-1`.
pub fn choose_t_large_field(
    ctx: &FieldCtx,
    set_size: &BigUint,
    n: u64,
) -> Result<LargeFieldChoice, HashError> {
    if set_size < &BigUint::from(2u32) {
        return Err(HashError::SetTooSmall {
            size: 0,
            needed: 2,
        });
    }
    let q = ctx.q();
    let r = log_floor_strict(q, set_size);
    if r < 4 {
        return Err(HashError::NoValidR {
            reason: format!("|S| <= q^4 = {q}^4 (r = {r}, need r >= 4)"),
        });
    }
    if r > n - 1 {
        return Err(HashError::NoValidR {
            reason: format!("r = {r} exceeds n - 1 = {}", n - 1),
        });
    }
    Ok(LargeFieldChoice {
        r,
        t: r - 3,
        entropy_loss_qdigits: 4,
    })
}

/// `max(n(1+τ)/(τδ)², n)` as an exact rational.
fn main_threshold(n: u64, tau: &BigRational, delta: &BigRational) -> BigRational {
    let n_rat = BigRational::from_integer(BigInt::from(n));
    let td = tau * delta;
    let lhs = &n_rat * (BigRational::one() + tau) / (&td * &td);
    lhs.max(n_rat)
}

/// `max(n(1+τ)/((τ-√τ)²δ²), n)` in `Q(√τ)`; requires `τ > 1`.
fn improved_threshold(n: u64, tau: &BigRational, delta: &BigRational) -> QuadRat {
    let n_rat = BigRational::from_integer(BigInt::from(n));
    let w = tau_minus_sqrt_tau_squared(tau); // (τ-√τ)², positive for τ > 1
    let denom = w.scale(&(delta * delta));
    let lhs = denom.inv().scale(&(&n_rat * (BigRational::one() + tau)));
    if lhs.ge_rational(&n_rat) {
        lhs
    } else {
        QuadRat::from_rational(n_rat, tau.clone())
    }
}

/// Exact check of the large-field hypotheses. Report-style: invalid
/// inputs appear as failed clauses rather than errors.
pub fn hypothesis_check_large_field(
    ctx: &FieldCtx,
    n: u64,
    tau: &BigRational,
    delta: &BigRational,
    variant: LargeFieldVariant,
) -> HypothesisReport {
    let q_rat = BigRational::from_integer(BigInt::from(ctx.q()));
    let mut clauses = Vec::new();
    match variant {
        LargeFieldVariant::Main => {
            let tau_ok = tau.is_positive();
            clauses.push(HypothesisClause {
                description: "tau > 0".into(),
                satisfied: tau_ok,
            });
            let delta_ok = delta.is_positive() && *delta < BigRational::one();
            clauses.push(HypothesisClause {
                description: "delta in (0, 1)".into(),
                satisfied: delta_ok,
            });
            clauses.push(HypothesisClause {
                description: format!("n >= 5 (n = {n})"),
                satisfied: n >= 5,
            });
            let satisfied = tau_ok && delta_ok && {
                let bound = main_threshold(n, tau, delta) * BigRational::from_integer(32.into());
                q_rat >= bound
            };
            clauses.push(HypothesisClause {
                description: format!(
                    "q >= 32*max(n(1+tau)/(tau*delta)^2, n) (q = {})",
                    ctx.q()
                ),
                satisfied,
            });
        }
        LargeFieldVariant::Improved => {
            let tau_ok = *tau > BigRational::one();
            clauses.push(HypothesisClause {
                description: "tau > 1".into(),
                satisfied: tau_ok,
            });
            let tenth = BigRational::new(BigInt::one(), BigInt::from(10));
            let delta_ok = delta.is_positive() && *delta < tenth;
            clauses.push(HypothesisClause {
                description: "delta in (0, 1/10)".into(),
                satisfied: delta_ok,
            });
            clauses.push(HypothesisClause {
                description: format!("n >= 20 (n = {n})"),
                satisfied: n >= 20,
            });
            let satisfied = tau_ok && delta_ok && {
                let bound = improved_threshold(n, tau, delta);
                bound.le_rational(&q_rat)
            };
            clauses.push(HypothesisClause {
                description: format!(
                    "q >= max(n(1+tau)/((tau-sqrt(tau))^2*delta^2), n) (q = {})",
                    ctx.q()
                ),
                satisfied,
            });
        }
    }
    HypothesisReport::from_clauses(clauses)
}

/// Smallest `t` with `2^t >= |S|(|S|-1)/(2δ)`: enough room for a random
/// surjective map to be injective on `S` with probability `1 - δ`.
pub fn injective_t(set_size: &BigUint, delta: &BigRational) -> Result<u64, HashError> {
    if set_size < &BigUint::from(2u32) {
        return Err(HashError::SetTooSmall {
            size: u64::try_from(set_size).unwrap_or(0),
            needed: 2,
        });
    }
    if !delta.is_positive() || *delta > BigRational::one() {
        return Err(HashError::InvalidDelta(format!(
            "delta = {} must lie in (0, 1]",
            rational_to_string(delta)
        )));
    }
    let size = BigRational::from_integer(BigInt::from(set_size.clone()));
    let threshold =
        &size * (&size - BigRational::one()) / (BigRational::from_integer(2.into()) * delta);
    if threshold <= BigRational::one() {
        return Ok(0);
    }
    Ok(ceil_log2_rational(&threshold))
}

/// The four binary selection rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinaryVariant {
    /// Embed and compress directly; any `τ > 0`.
    Direct,
    /// Injective pre-hash to `m` bits, then [`BinaryVariant::Direct`] on
    /// `m` variables at `δ/2`.
    TwoStage,
    /// Direct rule with the sharper constants available for `τ > 1`.
    DirectLargeTau,
    /// Two-stage rule with the sharper constants available for `τ > 1`.
    TwoStageLargeTau,
}

impl BinaryVariant {
    pub fn label(self) -> &'static str {
        match self {
            Self::Direct => "binary-direct",
            Self::TwoStage => "binary-two-stage",
            Self::DirectLargeTau => "binary-direct-large-tau",
            Self::TwoStageLargeTau => "binary-two-stage-large-tau",
        }
    }
}

/// Outcome of a binary selection rule.
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryParams {
    pub variant: BinaryVariant,
    pub tau: BigRational,
    pub delta: BigRational,
    pub n: u64,
    pub set_size: BigUint,
    /// Intermediate dimension of the injective stage (two-stage rules).
    pub m: Option<u64>,
    /// Block size: the embedding subfield is `F_{2^ell}`.
    pub ell: u64,
    /// Embedded ambient dimension `⌈n/ell⌉` (or `⌈m/ell⌉`).
    pub n_prime: u64,
    /// Exponent with `q^r < |S| <= q^{r+1}` for `q = 2^ell`.
    pub r: u64,
    /// Chosen output length in bits: `t = (r-3)·ell`.
    pub t: u64,
    /// `⌈log2|S|⌉ - t`.
    pub entropy_loss_bound_bits: u64,
    /// Does `t` meet the closed-form floor this rule is meant to
    /// guarantee? Evaluated exactly; see the module docs.
    pub stated_bound_met: bool,
    /// Human-readable form of that floor.
    pub stated_bound: String,
    /// The hypothesis clauses that were checked (all satisfied).
    pub conditions: HypothesisReport,
}

impl BinaryParams {
    pub fn to_hash_params(&self) -> HashParams {
        HashParams {
            tau: self.tau.clone(),
            delta: self.delta.clone(),
            t: self.t,
            entropy_loss_bound: BigRational::from_integer(BigInt::from(
                self.entropy_loss_bound_bits,
            )),
            variant: self.variant.label().to_string(),
        }
    }
}

fn ceil_log2_quad(x: &QuadRat) -> u64 {
    let mut e = 0u64;
    loop {
        if x.le_rational(&pow2_rational(e)) {
            return e;
        }
        e += 1;
        assert!(e < 1 << 20, "ceil_log2_quad out of range");
    }
}

fn ceil_log2_biguint(x: &BigUint) -> u64 {
    if x <= &BigUint::one() {
        return 0;
    }
    let bits = x.bits();
    if x == &(BigUint::one() << (bits - 1)) {
        bits - 1
    } else {
        bits
    }
}

fn rational_from_biguint(x: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(x.clone()))
}

/// Pick the output length `t` for hashing a set of `set_size` points of
/// `F_2^n` with target balance `tau` and failure fraction `delta`.
///
/// Verifies the variant's side conditions exactly (detailed report on
/// failure), then runs the embedding recipe. See the module docs for the
/// bound-floor semantics of [`BinaryParams::stated_bound_met`].
pub fn choose_t_binary(
    n: u64,
    set_size: &BigUint,
    tau: &BigRational,
    delta: &BigRational,
    variant: BinaryVariant,
) -> Result<BinaryParams, HashError> {
    if !tau.is_positive() {
        return Err(HashError::InvalidTau(format!(
            "tau = {} must be positive",
            rational_to_string(tau)
        )));
    }
    if !delta.is_positive() || *delta >= BigRational::one() {
        return Err(HashError::InvalidDelta(format!(
            "delta = {} must lie in (0, 1)",
            rational_to_string(delta)
        )));
    }
    let large_tau = matches!(
        variant,
        BinaryVariant::DirectLargeTau | BinaryVariant::TwoStageLargeTau
    );
    if large_tau && *tau <= BigRational::one() {
        return Err(HashError::InvalidTau(format!(
            "tau = {} must exceed 1 for this rule",
            rational_to_string(tau)
        )));
    }
    match variant {
        BinaryVariant::Direct => choose_direct(n, set_size, tau, delta),
        BinaryVariant::TwoStage => choose_two_stage(n, set_size, tau, delta),
        BinaryVariant::DirectLargeTau => choose_direct_large_tau(n, set_size, tau, delta),
        BinaryVariant::TwoStageLargeTau => choose_two_stage_large_tau(n, set_size, tau, delta),
    }
}

/// Shared tail of every binary rule: given the block size `ell` and the
/// dimension `dim` being embedded, locate `r` and assemble the result.
#[allow(clippy::too_many_arguments)]
fn finish_binary(
    variant: BinaryVariant,
    n: u64,
    dim: u64,
    m: Option<u64>,
    set_size: &BigUint,
    tau: &BigRational,
    delta: &BigRational,
    ell: u64,
    conditions: HypothesisReport,
    bound_met: bool,
    bound_text: String,
) -> Result<BinaryParams, HashError> {
    let n_prime = dim.div_ceil(ell);
    let q = BigUint::one() << ell;
    let r = {
        // largest r with q^r < |S|
        let mut r = 0u64;
        let mut power = q.clone();
        while &power < set_size {
            r += 1;
            power <<= ell;
        }
        r
    };
    if r < 4 {
        return Err(HashError::NoValidR {
            reason: format!("|S| <= 2^(4*ell) = 2^{} (r = {r}, need r >= 4)", 4 * ell),
        });
    }
    if r > n_prime.saturating_sub(1) {
        return Err(HashError::NoValidR {
            reason: format!("r = {r} exceeds n' - 1 = {}", n_prime.saturating_sub(1)),
        });
    }
    let t = (r - 3) * ell;
    let entropy_loss_bound_bits = ceil_log2_biguint(set_size).saturating_sub(t);
    Ok(BinaryParams {
        variant,
        tau: tau.clone(),
        delta: delta.clone(),
        n,
        set_size: set_size.clone(),
        m,
        ell,
        n_prime,
        r,
        t,
        entropy_loss_bound_bits,
        stated_bound_met: bound_met,
        stated_bound: bound_text,
        conditions,
    })
}

fn choose_direct(
    n: u64,
    set_size: &BigUint,
    tau: &BigRational,
    delta: &BigRational,
) -> Result<BinaryParams, HashError> {
    let x = main_threshold(n, tau, delta);
    let x4 = &x * &x * &x * &x;
    let size_rat = rational_from_biguint(set_size);

    let size_floor = pow2_rational(20) * &x4;
    let cond1 = HypothesisClause {
        description: format!(
            "|S| > 2^20 * max(n^4(1+tau)^4/(tau*delta)^8, n^4) = {}",
            rational_to_string(&size_floor)
        ),
        satisfied: size_rat > size_floor,
    };
    let log_x = ceil_log2_rational(&x);
    let cond2 = HypothesisClause {
        description: format!(
            "n >= 5*ceil(log2(max(n(1+tau)/(tau*delta)^2, n))) + 25 = {}",
            5 * log_x + 25
        ),
        satisfied: n >= 5 * log_x + 25,
    };
    let conditions = HypothesisReport::from_clauses(vec![cond1, cond2]);
    if !conditions.pass {
        return Err(HashError::SideConditions(conditions));
    }

    // recipe: ell = ceil(log2(32 * X)), q = 2^ell
    let ell = ceil_log2_rational(&(&x * BigRational::from_integer(32.into())));

    // closed-form floor: t >= log2|S| - 4*log2(X) - 20,
    // i.e. 2^(t+20) * X^4 >= |S|
    let probe = |t: u64| pow2_rational(t + 20) * &x4 >= size_rat;
    let bound_text = format!(
        "t >= log2(|S|) - 4*log2({}) - 20",
        rational_to_string(&x)
    );
    let params = finish_binary(
        BinaryVariant::Direct,
        n,
        n,
        None,
        set_size,
        tau,
        delta,
        ell,
        conditions,
        false,
        bound_text,
    )?;
    Ok(BinaryParams {
        stated_bound_met: probe(params.t),
        ..params
    })
}

/// Smallest `m` with `2^m >= |S|(|S|-1)/delta`; equals
/// `injective_t(set_size, delta/2)`.
fn two_stage_m(set_size: &BigUint, delta: &BigRational) -> Result<u64, HashError> {
    let half = delta / BigRational::from_integer(2.into());
    injective_t(set_size, &half)
}

fn choose_two_stage(
    n: u64,
    set_size: &BigUint,
    tau: &BigRational,
    delta: &BigRational,
) -> Result<BinaryParams, HashError> {
    let m = two_stage_m(set_size, delta)?;
    let m_rat = BigRational::from_integer(BigInt::from(m));
    let size_rat = rational_from_biguint(set_size);

    // Y = max(4(1+tau)/(tau*delta)^2, 1)
    let td = tau * delta;
    let y = (BigRational::from_integer(4.into()) * (BigRational::one() + tau) / (&td * &td))
        .max(BigRational::one());
    let y4 = &y * &y * &y * &y;

    let size_floor = pow2_rational(20) * &m_rat * &y4;
    let cond1 = HypothesisClause {
        description: format!(
            "|S| > 2^20 * m * max(2^8(1+tau)^4/(tau*delta)^8, 1) = {}",
            rational_to_string(&size_floor)
        ),
        satisfied: size_rat > size_floor,
    };
    // m >= 5*log2(m*Y) + 25, no ceiling: 2^(m-25) >= (m*Y)^5
    let my = &m_rat * &y;
    let my5 = &my * &my * &my * &my * &my;
    let cond2 = HypothesisClause {
        description: format!(
            "m >= 5*log2(m*max(4(1+tau)/(tau*delta)^2, 1)) + 25 (m = {m})"
        ),
        satisfied: m >= 25 && pow2_rational(m - 25) >= my5,
    };
    let conditions = HypothesisReport::from_clauses(vec![cond1, cond2]);
    if !conditions.pass {
        return Err(HashError::SideConditions(conditions));
    }

    // recipe: direct rule on m variables at delta/2, so
    // ell = ceil(log2(32 * m * Y))
    let ell = ceil_log2_rational(&(BigRational::from_integer(32.into()) * &my));

    let my4 = &my * &my * &my * &my;
    let probe = |t: u64| pow2_rational(t + 20) * &my4 >= size_rat;
    let bound_text = format!(
        "t >= log2(|S|) - 4*log2({}) - 20",
        rational_to_string(&my)
    );
    let params = finish_binary(
        BinaryVariant::TwoStage,
        n,
        m,
        Some(m),
        set_size,
        tau,
        delta,
        ell,
        conditions,
        false,
        bound_text,
    )?;
    Ok(BinaryParams {
        stated_bound_met: probe(params.t),
        ..params
    })
}

fn choose_direct_large_tau(
    n: u64,
    set_size: &BigUint,
    tau: &BigRational,
    delta: &BigRational,
) -> Result<BinaryParams, HashError> {
    let tenth = BigRational::new(BigInt::one(), BigInt::from(10));
    let delta_clause = HypothesisClause {
        description: "delta <= 1/10".into(),
        satisfied: *delta <= tenth,
    };

    let x = improved_threshold(n, tau, delta);
    let x4 = x.pow(4);
    let size_rat = rational_from_biguint(set_size);

    // |S| > max(n^4(1+tau)^4/((tau-sqrt(tau))*delta)^8, n^4) = X^4
    let cond1 = HypothesisClause {
        description: format!(
            "|S| > max(n^4(1+tau)^4/((tau-sqrt(tau))*delta)^8, n^4) ~= {:.6e}",
            x4.approx_f64()
        ),
        satisfied: !x4.ge_rational(&size_rat),
    };
    let log_x = ceil_log2_quad(&x);
    let cond2 = HypothesisClause {
        description: format!(
            "n >= 20*ceil(log2(max(n(1+tau)/((tau-sqrt(tau))*delta)^2, n))) = {}",
            20 * log_x
        ),
        satisfied: n >= 20 * log_x,
    };
    let conditions = HypothesisReport::from_clauses(vec![delta_clause, cond1, cond2]);
    if !conditions.pass {
        return Err(HashError::SideConditions(conditions));
    }

    let ell = log_x; // block size: ceil(log2(X)), constant 1 for this rule

    // floor: t >= log2|S| - 4*log2(X), i.e. 2^t * X^4 >= |S|
    let probe = |t: u64| {
        x4.scale(&pow2_rational(t)).ge_rational(&size_rat)
    };
    let bound_text = format!(
        "t >= log2(|S|) - 4*log2(max(n(1+tau)/((tau-sqrt(tau))^2*delta^2), n) ~= {:.6})",
        x.approx_f64()
    );
    let params = finish_binary(
        BinaryVariant::DirectLargeTau,
        n,
        n,
        None,
        set_size,
        tau,
        delta,
        ell,
        conditions,
        false,
        bound_text,
    )?;
    Ok(BinaryParams {
        stated_bound_met: probe(params.t),
        ..params
    })
}

fn choose_two_stage_large_tau(
    n: u64,
    set_size: &BigUint,
    tau: &BigRational,
    delta: &BigRational,
) -> Result<BinaryParams, HashError> {
    let tenth = BigRational::new(BigInt::one(), BigInt::from(10));
    let delta_clause = HypothesisClause {
        description: "delta <= 1/10".into(),
        satisfied: *delta <= tenth,
    };

    let m = two_stage_m(set_size, delta)?;
    let m_rat = BigRational::from_integer(BigInt::from(m));
    let size_rat = rational_from_biguint(set_size);

    // Y = max(4(1+tau)/((tau-sqrt(tau))^2*delta^2), 1) in Q(sqrt(tau))
    let w = tau_minus_sqrt_tau_squared(tau);
    let four_term = w
        .scale(&(delta * delta))
        .inv()
        .scale(&(BigRational::from_integer(4.into()) * (BigRational::one() + tau)));
    let y = if four_term.ge_rational(&BigRational::one()) {
        four_term
    } else {
        QuadRat::from_rational(BigRational::one(), tau.clone())
    };
    let my = y.scale(&m_rat);
    let my4 = my.pow(4);

    // |S| > m^4 * max(2^8(1+tau)^4/((tau-sqrt(tau))*delta)^8, 1) = (m*Y)^4
    let cond1 = HypothesisClause {
        description: format!(
            "|S| > m^4 * max(2^8(1+tau)^4/((tau-sqrt(tau))*delta)^8, 1) ~= {:.6e} (m = {m})",
            my4.approx_f64()
        ),
        satisfied: !my4.ge_rational(&size_rat),
    };
    let log_my = ceil_log2_quad(&my);
    let cond2 = HypothesisClause {
        description: format!(
            "m >= 20*ceil(log2(m*max(4(1+tau)/((tau-sqrt(tau))*delta)^2, 1))) = {}",
            20 * log_my
        ),
        satisfied: m >= 20 * log_my,
    };
    let conditions = HypothesisReport::from_clauses(vec![delta_clause, cond1, cond2]);
    if !conditions.pass {
        return Err(HashError::SideConditions(conditions));
    }

    let ell = log_my; // direct-large-tau recipe on m variables at delta/2

    let probe = |t: u64| my4.scale(&pow2_rational(t)).ge_rational(&size_rat);
    let bound_text = format!(
        "t >= log2(|S|) - 4*log2(m*max(4(1+tau)/((tau-sqrt(tau))^2*delta^2), 1) ~= {:.6})",
        my.approx_f64()
    );
    let params = finish_binary(
        BinaryVariant::TwoStageLargeTau,
        n,
        m,
        Some(m),
        set_size,
        tau,
        delta,
        ell,
        conditions,
        false,
        bound_text,
    )?;
    Ok(BinaryParams {
        stated_bound_met: probe(params.t),
        ..params
    })
}

/// Output of a two-stage hash run.
#[derive(Clone, Debug)]
pub struct TwoStageOutcome {
    /// Injective stage: `F_2^n -> F_2^m`.
    pub stage1: LinearMap,
    /// Compression stage: `F_2^m -> F_2^t`.
    pub stage2: LinearMap,
    /// The composed map `stage2 · stage1`.
    pub composed: LinearMap,
    pub m: u64,
    pub t: u64,
    /// Whether stage 1 was actually injective on the set. A collision is
    /// a recorded probabilistic event, not an error.
    pub stage1_injective: bool,
    /// Histogram of the composed map on the original set.
    pub histogram: BucketHistogram,
}

/// Run the two-stage mechanics with explicit dimensions `m` and `t`,
/// sampling both stages from `rng`. Used directly by tests and by
/// [`two_stage_hash`] once the rule has chosen the dimensions.
pub fn two_stage_with_dims(
    set: &PointSet,
    m: u64,
    t: u64,
    rng: &mut SplitMix64,
) -> Result<TwoStageOutcome, HashError> {
    if set.ctx().p() != 2 || set.ctx().ell() != 1 {
        return Err(HashError::NotBinary);
    }
    if set.is_empty() {
        return Err(HashError::EmptySet);
    }
    let n = set.ambient_dim();
    let stage1 = sample_surjective_map(rng, set.ctx(), n, m as usize)?;
    let mut images: Vec<Vec<u64>> = Vec::with_capacity(set.size() as usize);
    for p in set.iter() {
        images.push(stage1.apply(p)?);
    }
    let mut distinct = images.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let stage1_injective = distinct.len() as u64 == set.size();

    let stage2 = sample_surjective_map(rng, set.ctx(), m as usize, t as usize)?;
    let composed = LinearMap::new(stage2.matrix().mul_mat(stage1.matrix())?)?;
    let hist = histogram(&composed, set)?;
    Ok(TwoStageOutcome {
        stage1,
        stage2,
        composed,
        m,
        t,
        stage1_injective,
        histogram: hist,
    })
}

/// Two-stage hash with dimensions chosen by [`BinaryVariant::TwoStage`]:
/// verifies that rule's side conditions, derives `m` and `t`, then runs
/// the mechanics. Returns the parameters alongside the outcome.
pub fn two_stage_hash(
    set: &PointSet,
    tau: &BigRational,
    delta: &BigRational,
    rng: &mut SplitMix64,
) -> Result<(BinaryParams, TwoStageOutcome), HashError> {
    let params = choose_t_binary(
        set.ambient_dim() as u64,
        &BigUint::from(set.size()),
        tau,
        delta,
        BinaryVariant::TwoStage,
    )?;
    let outcome = two_stage_with_dims(set, params.m.expect("two-stage has m"), params.t, rng)?;
    Ok((params, outcome))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::ratio;

    #[test]
    fn large_field_rule_worked_examples() {
        // q=16, |S|=16^5 -> r=4, t=1
        let f16 = FieldCtx::new(2, 4).unwrap();
        let c = choose_t_large_field(&f16, &BigUint::from(16u32).pow(5), 6).unwrap();
        assert_eq!((c.r, c.t), (4, 1));

        // q=7, |S|=7^4+1 -> r=4, t=1
        let f7 = FieldCtx::new(7, 1).unwrap();
        let size = BigUint::from(7u32).pow(4) + BigUint::one();
        let c = choose_t_large_field(&f7, &size, 6).unwrap();
        assert_eq!((c.r, c.t), (4, 1));
        assert_eq!(c.entropy_loss_qdigits, 4);

        // q=16, |S|=16^4 -> no r >= 4 with q^r < |S|
        let err = choose_t_large_field(&f16, &BigUint::from(16u32).pow(4), 6);
        assert!(matches!(err, Err(HashError::NoValidR { .. })));

        // r must stay <= n-1: |S| = 16^6 in dimension 5 gives r = 5 > 4
        let err = choose_t_large_field(&f16, &BigUint::from(16u32).pow(6), 5);
        assert!(matches!(err, Err(HashError::NoValidR { .. })));
    }

    #[test]
    fn hypothesis_check_worked_examples() {
        // (q=2048, n=5, tau=1, delta=1/2): 32*max(40, 5) = 1280 <= 2048
        let f2048 = FieldCtx::new(2, 11).unwrap();
        let rep = hypothesis_check_large_field(
            &f2048,
            5,
            &ratio(1, 1),
            &ratio(1, 2),
            LargeFieldVariant::Main,
        );
        assert!(rep.pass, "{}", rep.failed_summary());

        // q=2 fails the same check
        let f2 = FieldCtx::new(2, 1).unwrap();
        let rep =
            hypothesis_check_large_field(&f2, 5, &ratio(1, 1), &ratio(1, 2), LargeFieldVariant::Main);
        assert!(!rep.pass);

        // improved variant at tau=1 fails with the "tau > 1" clause
        let rep = hypothesis_check_large_field(
            &f2048,
            20,
            &ratio(1, 1),
            &ratio(1, 20),
            LargeFieldVariant::Improved,
        );
        assert!(!rep.pass);
        assert!(rep
            .clauses
            .iter()
            .any(|c| c.description == "tau > 1" && !c.satisfied));
    }

    #[test]
    fn improved_hypothesis_exact_square_root_handling() {
        // tau = 4: (4 - 2)^2 = 4 exactly; q >= max(n*5/(4*delta^2), n)
        // n = 20, delta = 1/20: n*5/(4/400) = 20*5*100 = 10000
        let f = FieldCtx::new(2, 14).unwrap(); // q = 16384
        let rep = hypothesis_check_large_field(
            &f,
            20,
            &ratio(4, 1),
            &ratio(1, 20),
            LargeFieldVariant::Improved,
        );
        assert!(rep.pass, "{}", rep.failed_summary());
        let f_small = FieldCtx::new(2, 13).unwrap(); // q = 8192 < 10000
        let rep = hypothesis_check_large_field(
            &f_small,
            20,
            &ratio(4, 1),
            &ratio(1, 20),
            LargeFieldVariant::Improved,
        );
        assert!(!rep.pass);
    }

    #[test]
    fn improved_hypothesis_boundary_with_irrational_radical() {
        // tau = 2: (2 - sqrt(2))^2 = 6 - 4*sqrt(2) ~= 0.34315. With n = 20
        // and delta = 1/20 the threshold is 20*3/((6-4*sqrt(2))/400)
        // = 6000*(6+4*sqrt(2)) ~= 69941.1, strictly between 2^16 and 2^17,
        // so the exact sign logic in Q(sqrt(2)) decides both sides.
        let tau = ratio(2, 1);
        let delta = ratio(1, 20);
        let f17 = FieldCtx::new(2, 17).unwrap(); // q = 131072
        let rep =
            hypothesis_check_large_field(&f17, 20, &tau, &delta, LargeFieldVariant::Improved);
        assert!(rep.pass, "{}", rep.failed_summary());
        let f16 = FieldCtx::new(2, 16).unwrap(); // q = 65536 < 69941.1
        let rep =
            hypothesis_check_large_field(&f16, 20, &tau, &delta, LargeFieldVariant::Improved);
        assert!(!rep.pass);
        assert!(rep
            .clauses
            .iter()
            .any(|c| c.description.starts_with("q >=") && !c.satisfied));
    }

    #[test]
    fn injective_t_worked_examples() {
        assert_eq!(
            injective_t(&BigUint::from(1024u32), &ratio(1, 2)).unwrap(),
            20
        );
        assert_eq!(injective_t(&BigUint::from(4u32), &ratio(1, 2)).unwrap(), 4);
        assert_eq!(injective_t(&BigUint::from(2u32), &ratio(1, 1)).unwrap(), 0);
        assert!(matches!(
            injective_t(&BigUint::one(), &ratio(1, 2)),
            Err(HashError::SetTooSmall { .. })
        ));
        assert!(matches!(
            injective_t(&BigUint::from(4u32), &ratio(3, 2)),
            Err(HashError::InvalidDelta(..))
        ));
    }

    #[test]
    fn direct_rule_worked_example() {
        // n=100, |S|=2^60, tau=3, delta=1/2:
        // X = 1600/9, ell = ceil(log2(32*1600/9)) = 13, r = 4, t = 13
        let params = choose_t_binary(
            100,
            &(BigUint::one() << 60),
            &ratio(3, 1),
            &ratio(1, 2),
            BinaryVariant::Direct,
        )
        .unwrap();
        assert_eq!(params.ell, 13);
        assert_eq!(params.n_prime, 8);
        assert_eq!(params.r, 4);
        assert_eq!(params.t, 13);
        assert_eq!(params.entropy_loss_bound_bits, 47);
        assert!(params.entropy_loss_bound_bits <= 4 * params.ell);
        assert!(params.stated_bound_met);
        let hp = params.to_hash_params();
        assert_eq!(hp.t, 13);
        assert_eq!(hp.variant, "binary-direct");
        assert_eq!(hp.entropy_loss_bound, ratio(47, 1));
    }

    #[test]
    fn direct_rule_rejects_tau_zero_and_bad_delta() {
        let size = BigUint::one() << 60;
        assert!(matches!(
            choose_t_binary(100, &size, &ratio(0, 1), &ratio(1, 2), BinaryVariant::Direct),
            Err(HashError::InvalidTau(..))
        ));
        assert!(matches!(
            choose_t_binary(100, &size, &ratio(1, 1), &ratio(1, 1), BinaryVariant::Direct),
            Err(HashError::InvalidDelta(..))
        ));
        assert!(matches!(
            choose_t_binary(
                100,
                &size,
                &ratio(1, 2),
                &ratio(1, 2),
                BinaryVariant::DirectLargeTau
            ),
            Err(HashError::InvalidTau(..))
        ));
    }

    #[test]
    fn direct_rule_reports_side_condition_failures() {
        // set too small: |S| = 2^30 with n = 100, tau = 3, delta = 1/2
        // needs |S| > 2^20 * (1600/9)^4 ~= 2^49.9
        let err = choose_t_binary(
            100,
            &(BigUint::one() << 30),
            &ratio(3, 1),
            &ratio(1, 2),
            BinaryVariant::Direct,
        )
        .unwrap_err();
        let HashError::SideConditions(report) = err else {
            panic!("expected side-condition report");
        };
        assert!(!report.pass);
        assert!(report.clauses.iter().any(|c| !c.satisfied));

        // n too small: n = 59 < 5*ceil(log2(104.9)) + 25 = 60
        let err = choose_t_binary(
            59,
            &(BigUint::one() << 59),
            &ratio(3, 1),
            &ratio(1, 2),
            BinaryVariant::Direct,
        )
        .unwrap_err();
        assert!(matches!(err, HashError::SideConditions(..)));
    }

    #[test]
    fn direct_rule_stated_bound_can_fail_at_block_boundary() {
        // Same parameters as the worked example above, but |S| = 2^65 = q^5 exactly:
        // t = 13 while the closed form asks for t >= 65 - 4*log2(1600/9)
        // - 20 ~= 15.1. The recipe surfaces this instead of clamping.
        let params = choose_t_binary(
            100,
            &(BigUint::one() << 65),
            &ratio(3, 1),
            &ratio(1, 2),
            BinaryVariant::Direct,
        )
        .unwrap();
        assert_eq!(params.t, 13);
        assert!(!params.stated_bound_met);
    }

    #[test]
    fn two_stage_m_worked_example() {
        // |S| = 2^40, delta = 1/2: m = smallest with 2^m >= |S|(|S|-1)*2 = 81
        let size = BigUint::one() << 40;
        assert_eq!(two_stage_m(&size, &ratio(1, 2)).unwrap(), 81);
    }

    #[test]
    fn two_stage_rule_needs_room_for_r() {
        // tau = 20, delta = 1/2 gives Y = 1, so ell = ceil(log2(32m)).
        // At |S| = 2^40 (m = 81, ell = 12) the side conditions hold but
        // |S| <= 2^(4*ell) = 2^48, so no r >= 4 exists: reported, not hidden.
        let err = choose_t_binary(
            1000,
            &(BigUint::one() << 40),
            &ratio(20, 1),
            &ratio(1, 2),
            BinaryVariant::TwoStage,
        )
        .unwrap_err();
        assert!(matches!(err, HashError::NoValidR { .. }));

        // |S| = 2^59 (m = 119, ell = 12): q^4 = 2^48 < 2^59, r = 4, t = 12
        let params = choose_t_binary(
            1000,
            &(BigUint::one() << 59),
            &ratio(20, 1),
            &ratio(1, 2),
            BinaryVariant::TwoStage,
        )
        .unwrap();
        assert_eq!(params.m, Some(119));
        assert_eq!(params.ell, 12);
        assert_eq!((params.r, params.t), (4, 12));
        // floor check: 2^(12+20) * 119^4 = 2^59.58 >= 2^59
        assert!(params.stated_bound_met);
    }

    #[test]
    fn two_stage_mechanics_compose_correctly() {
        // composed map equals the matrix product applied pointwise
        let f2 = FieldCtx::new(2, 1).unwrap();
        let mut rng = SplitMix64::new(31);
        for trial in 0..20 {
            let mut trial_rng = SplitMix64::for_trial(1000, trial);
            let n = 12;
            let s = PointSet::random(&mut rng, &f2, n, 40).unwrap();
            let out = two_stage_with_dims(&s, 9, 3, &mut trial_rng).unwrap();
            for p in s.iter() {
                let staged = out.stage2.apply(&out.stage1.apply(p).unwrap()).unwrap();
                let direct = out.composed.apply(p).unwrap();
                assert_eq!(staged, direct);
            }
            assert_eq!(out.histogram.total(), s.size());
        }
    }

    #[test]
    fn two_stage_collision_is_flagged_not_error() {
        // m = 2 on 5 points: stage 1 cannot be injective (2^2 < 5)
        let f2 = FieldCtx::new(2, 1).unwrap();
        let mut rng = SplitMix64::new(8);
        let s = PointSet::random(&mut rng, &f2, 8, 5).unwrap();
        let out = two_stage_with_dims(&s, 2, 1, &mut rng).unwrap();
        assert!(!out.stage1_injective);
    }

    #[test]
    fn two_stage_full_rule_rejects_small_sets() {
        let f2 = FieldCtx::new(2, 1).unwrap();
        let mut rng = SplitMix64::new(8);
        let s = PointSet::random(&mut rng, &f2, 10, 50).unwrap();
        let err = two_stage_hash(&s, &ratio(3, 1), &ratio(1, 2), &mut rng).unwrap_err();
        assert!(matches!(err, HashError::SideConditions(..)));

        let single = PointSet::new(&f2, 4, vec![vec![0, 0, 0, 0]]).unwrap();
        let err = two_stage_hash(&single, &ratio(3, 1), &ratio(1, 2), &mut rng).unwrap_err();
        assert!(matches!(err, HashError::SetTooSmall { .. }));
    }

    #[test]
    fn large_tau_rules_run_and_report() {
        // DirectLargeTau: tau = 9 (perfect square, (9-3)^2 = 36),
        // delta = 1/10, n large
        let tau = ratio(9, 1);
        let delta = ratio(1, 10);
        // X = max(n*10/(36/100), n) = max(1000n/36, n) = 250n/9
        let n = 500u64;
        // need n >= 20*ceil(log2(250n/9)) = 20*14 = 280 <= 500
        let size = BigUint::one() << 200;
        let params =
            choose_t_binary(n, &size, &tau, &delta, BinaryVariant::DirectLargeTau).unwrap();
        assert_eq!(params.ell, 14);
        assert!(params.t >= 1);
        // irrational tau as well
        let params2 = choose_t_binary(
            n,
            &size,
            &ratio(7, 1),
            &delta,
            BinaryVariant::DirectLargeTau,
        );
        assert!(params2.is_ok());
    }

    #[test]
    fn two_stage_large_tau_runs() {
        // tau = 450 makes (tau - sqrt(tau))^2 * delta^2 >= 4(1+tau), so
        // Y = 1; |S| = 2^80 gives m = 164 >= 20*ceil(log2(164)) = 160.
        let size = BigUint::one() << 80;
        let params = choose_t_binary(
            1000,
            &size,
            &ratio(450, 1),
            &ratio(1, 10),
            BinaryVariant::TwoStageLargeTau,
        )
        .unwrap();
        assert_eq!(params.m, Some(164));
        assert_eq!(params.ell, 8);
        assert_eq!((params.r, params.t), (9, 48));

        // m just below the 20*ceil(log2(m)) floor is rejected with a report
        let err = choose_t_binary(
            1000,
            &(BigUint::one() << 60),
            &ratio(450, 1),
            &ratio(1, 10),
            BinaryVariant::TwoStageLargeTau,
        )
        .unwrap_err();
        assert!(matches!(err, HashError::SideConditions(..)));
    }
}
