//! Evaluation-with-derivatives matrices and their `F_q`-ranks.
//!
//! `EVAL^m(S, W)` evaluates every Hasse derivative of weight below `m` of
//! every monomial in `W` at every point of `S`. Points may be plain field
//! vectors or n-tuples of homogeneous linear forms `u·t1 + v·t2`, in which
//! case the entries live in `F_q[t1, t2]` and the rank of interest is the
//! `F_q`-rank: the largest set of columns with no vanishing nonzero
//! `F_q`-combination. Expanding each polynomial entry into its coefficient
//! rows preserves exactly that rank and reduces it to ordinary Gaussian
//! elimination over `F_q`.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::budget::Budget;
use crate::linalg::{FieldCtx, MatrixFq};
use crate::util::binomial;

use super::{monomials_up_to, multi_indices_of_weight, MultiPoly, PolyError};

/// An n-tuple of homogeneous linear forms `u·t1 + v·t2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearFormVector {
    pub u: Vec<u64>,
    pub v: Vec<u64>,
}

impl LinearFormVector {
    pub fn new(u: Vec<u64>, v: Vec<u64>) -> Self {
        assert_eq!(u.len(), v.len());
        Self { u, v }
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    /// Are the coefficient vectors of `t1` and `t2` linearly independent?
    pub fn is_full(&self, ctx: &FieldCtx) -> bool {
        let m = MatrixFq::from_rows(ctx, &[self.u.clone(), self.v.clone()])
            .expect("u, v share a length");
        m.rank() == 2
    }
}

/// All `q^{2n}` tuples (`full_only = false`) or the subset with
/// independent coefficient vectors (`full_only = true`), in lexicographic
/// order of the concatenated coordinates.
pub fn enumerate_v(
    ctx: &FieldCtx,
    n: usize,
    full_only: bool,
) -> impl Iterator<Item = LinearFormVector> {
    let ctx = ctx.clone();
    let q = ctx.q();
    let cells = 2 * n;
    let total = q
        .checked_pow(u32::try_from(cells).expect("dimension too large"))
        .expect("family too large to enumerate");
    (0..total).filter_map(move |index| {
        let mut digits = vec![0u64; cells];
        let mut rest = index;
        for slot in digits.iter_mut().rev() {
            *slot = rest % q;
            rest /= q;
        }
        let form = LinearFormVector::new(digits[..n].to_vec(), digits[n..].to_vec());
        (!full_only || form.is_full(&ctx)).then_some(form)
    })
}

/// `|V_full| = (q^n - 1)(q^n - q)`: ordered independent pairs.
pub fn v_full_count(q: u64, n: usize) -> BigUint {
    let qn = BigUint::from(q).pow(n as u32);
    (&qn - BigUint::one()) * (&qn - BigUint::from(q))
}

/// A row index of an evaluation matrix: which point, which derivative.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalRowLabel {
    pub point_index: usize,
    pub derivative: Vec<u32>,
}

/// Point kinds accepted by [`build_eval_matrix`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EvalPoint {
    /// A plain point of `F_q^n`: entries are constants.
    Plain(Vec<u64>),
    /// A tuple of linear forms: entries are polynomials in `t1, t2`.
    Forms(LinearFormVector),
}

/// `EVAL^m(S, W)`: rows indexed by (point, derivative of weight < m),
/// columns by the monomials of `W`; entries in `F_q[t1, t2]` (constants
/// for plain points).
#[derive(Clone, Debug)]
pub struct EvalMatrix {
    ctx: FieldCtx,
    row_labels: Vec<EvalRowLabel>,
    monomials: Vec<Vec<u32>>,
    /// row-major, length `row_labels.len() * monomials.len()`
    entries: Vec<MultiPoly>,
}

impl EvalMatrix {
    pub fn rows(&self) -> usize {
        self.row_labels.len()
    }

    pub fn cols(&self) -> usize {
        self.monomials.len()
    }

    pub fn entry(&self, r: usize, c: usize) -> &MultiPoly {
        &self.entries[r * self.monomials.len() + c]
    }

    pub fn row_labels(&self) -> &[EvalRowLabel] {
        &self.row_labels
    }

    pub fn monomials(&self) -> &[Vec<u32>] {
        &self.monomials
    }

    /// Largest degree (in `t1, t2`) over all entries; 0 when empty/constant.
    pub fn max_entry_degree(&self) -> u64 {
        self.entries
            .iter()
            .filter_map(|e| e.total_degree())
            .max()
            .unwrap_or(0)
    }

    /// Build directly from explicit polynomial entries (2 variables each).
    pub fn from_entries(
        ctx: &FieldCtx,
        rows: Vec<Vec<MultiPoly>>,
    ) -> Result<EvalMatrix, PolyError> {
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut entries = Vec::new();
        for row in &rows {
            if row.len() != ncols {
                return Err(PolyError::ArityMismatch);
            }
            for e in row {
                if e.nvars() != 2 || e.ctx() != ctx {
                    return Err(PolyError::ArityMismatch);
                }
                entries.push(e.clone());
            }
        }
        Ok(EvalMatrix {
            ctx: ctx.clone(),
            row_labels: (0..rows.len())
                .map(|i| EvalRowLabel {
                    point_index: i,
                    derivative: vec![],
                })
                .collect(),
            monomials: (0..ncols).map(|c| vec![c as u32]).collect(),
            entries,
        })
    }
}

/// Derivative of the monomial `x^a` by `j`, evaluated at the point: the
/// scalar `C(a,j)·x^{a-j}` (zero if any `j_i > a_i`).
fn monomial_derivative_at_plain(
    ctx: &FieldCtx,
    exps: &[u32],
    deriv: &[u32],
    point: &[u64],
) -> u64 {
    let p = ctx.p();
    let mut coeff = 1u64;
    for (&a, &j) in exps.iter().zip(deriv) {
        if j > a {
            return 0;
        }
        coeff = coeff * super::binomial_mod_p(a, j, p) % p;
        if coeff == 0 {
            return 0;
        }
    }
    let mut value = ctx.from_prime_subfield(coeff);
    for ((&a, &j), &x) in exps.iter().zip(deriv).zip(point) {
        value = ctx.mul(value, ctx.pow(x, (a - j) as u64));
    }
    value
}

/// Derivative of the monomial `x^a` by `j`, with `x_i` replaced by the
/// linear form `u_i·t1 + v_i·t2`: a polynomial in `t1, t2`.
fn monomial_derivative_at_forms(
    ctx: &FieldCtx,
    exps: &[u32],
    deriv: &[u32],
    form: &LinearFormVector,
) -> Result<MultiPoly, PolyError> {
    let p = ctx.p();
    let mut coeff = 1u64;
    for (&a, &j) in exps.iter().zip(deriv) {
        if j > a {
            return Ok(MultiPoly::zero(ctx, 2));
        }
        coeff = coeff * super::binomial_mod_p(a, j, p) % p;
        if coeff == 0 {
            return Ok(MultiPoly::zero(ctx, 2));
        }
    }
    let mut out = MultiPoly::constant(ctx, 2, ctx.from_prime_subfield(coeff));
    for ((&a, &j), i) in exps.iter().zip(deriv).zip(0..) {
        let e = a - j;
        if e == 0 {
            continue;
        }
        let linear = MultiPoly::monomial(ctx, 2, &[1, 0], form.u[i])
            .add(&MultiPoly::monomial(ctx, 2, &[0, 1], form.v[i]))?;
        out = out.mul(&linear.pow(e)?)?;
    }
    Ok(out)
}

/// Assemble `EVAL^m(points, monomials)`. Row order: points in the given
/// order, derivatives per point by ascending weight (lex-descending
/// within a weight). One budget unit per entry.
pub fn build_eval_matrix(
    ctx: &FieldCtx,
    points: &[EvalPoint],
    monomials: &[Vec<u32>],
    m: u32,
    budget: &mut Budget,
) -> Result<EvalMatrix, PolyError> {
    let nvars = match points.first() {
        Some(EvalPoint::Plain(p)) => p.len(),
        Some(EvalPoint::Forms(f)) => f.dim(),
        None => monomials.first().map_or(0, |e| e.len()),
    };
    for mono in monomials {
        if mono.len() != nvars {
            return Err(PolyError::ArityMismatch);
        }
    }
    let derivatives: Vec<Vec<u32>> = (0..m)
        .flat_map(|w| multi_indices_of_weight(nvars, w))
        .collect();
    let mut row_labels = Vec::with_capacity(points.len() * derivatives.len());
    let mut entries = Vec::with_capacity(points.len() * derivatives.len() * monomials.len());
    for (pi, point) in points.iter().enumerate() {
        match point {
            EvalPoint::Plain(coords) => {
                if coords.len() != nvars {
                    return Err(PolyError::ArityMismatch);
                }
            }
            EvalPoint::Forms(form) => {
                if form.dim() != nvars {
                    return Err(PolyError::ArityMismatch);
                }
            }
        }
        for deriv in &derivatives {
            budget.charge(monomials.len() as u64)?;
            row_labels.push(EvalRowLabel {
                point_index: pi,
                derivative: deriv.clone(),
            });
            for mono in monomials {
                let entry = match point {
                    EvalPoint::Plain(coords) => {
                        let val = monomial_derivative_at_plain(ctx, mono, deriv, coords);
                        MultiPoly::constant(ctx, 2, val)
                    }
                    EvalPoint::Forms(form) => {
                        monomial_derivative_at_forms(ctx, mono, deriv, form)?
                    }
                };
                entries.push(entry);
            }
        }
    }
    Ok(EvalMatrix {
        ctx: ctx.clone(),
        row_labels,
        monomials: monomials.to_vec(),
        entries,
    })
}

/// Expand a polynomial-entry matrix into its coefficient matrix over
/// `F_q`: each entry becomes the column of its `t1^i t2^j` coefficients,
/// `i + j <= d`, so each row becomes `C(d+2, 2)` rows. The `F_q`-rank is
/// unchanged by this expansion.
pub fn coeff_matrix(eval: &EvalMatrix, d: u64) -> Result<MatrixFq, PolyError> {
    let actual = eval.max_entry_degree();
    if actual > d {
        return Err(PolyError::DegreeOverflow { deg: actual, cap: d });
    }
    // (i, j) pairs with i + j <= d, ascending degree, t1-power first
    let pairs: Vec<(u32, u32)> = (0..=d as u32)
        .flat_map(|w| (0..=w).rev().map(move |i| (i, w - i)))
        .collect();
    let nrows = eval.rows() * pairs.len();
    let mut out = MatrixFq::zero(&eval.ctx, nrows, eval.cols());
    for r in 0..eval.rows() {
        for c in 0..eval.cols() {
            let entry = eval.entry(r, c);
            for (pi, &(i, j)) in pairs.iter().enumerate() {
                let coeff = entry
                    .terms()
                    .get(&vec![i, j])
                    .copied()
                    .unwrap_or(0);
                if coeff != 0 {
                    out.set(r * pairs.len() + pi, c, coeff);
                }
            }
        }
    }
    Ok(out)
}

/// `F_q`-rank of an evaluation matrix, via its coefficient matrix.
pub fn fq_rank(eval: &EvalMatrix) -> Result<usize, PolyError> {
    let d = eval.max_entry_degree();
    Ok(coeff_matrix(eval, d)?.rank())
}

/// Which rows to use in a rank-lemma audit.
#[derive(Clone, Debug)]
pub enum RankRows {
    /// All of `V` (`q^{2n}` tuples).
    V,
    /// All of `V_full`.
    VFull,
    /// An explicit subset of `V_full`.
    Subset(Vec<LinearFormVector>),
}

/// Result of a rank-lemma audit.
#[derive(Clone, Debug)]
pub struct RankAudit {
    pub rank: usize,
    /// `C(d+n, n)` for the full families; `ceil(δ·C(d+n,n))` for subsets.
    pub target: u64,
    /// Equality for the full families, `rank >= target` for subsets.
    pub pass: bool,
    pub rows: usize,
    pub cols: usize,
}

/// Check the rank of `EVAL^m(rows, W_{d,n})` against its predicted value.
/// Hypothesis: `d < m·q²`.
pub fn rank_lemma_audit(
    ctx: &FieldCtx,
    n: usize,
    m: u32,
    d: u32,
    rows: RankRows,
    budget: &mut Budget,
) -> Result<RankAudit, PolyError> {
    let q = ctx.q();
    if (d as u64) >= (m as u64) * q * q {
        return Err(PolyError::HypothesisViolated(format!(
            "need d < m*q^2, got d = {d}, m*q^2 = {}",
            (m as u64) * q * q
        )));
    }
    let monos = monomials_up_to(n, d);
    let full_dim = binomial(d as u64 + n as u64, n as u64)
        .to_u64()
        .expect("monomial count fits");
    debug_assert_eq!(monos.len() as u64, full_dim);

    let points: Vec<EvalPoint> = match &rows {
        RankRows::V => enumerate_v(ctx, n, false).map(EvalPoint::Forms).collect(),
        RankRows::VFull => enumerate_v(ctx, n, true).map(EvalPoint::Forms).collect(),
        RankRows::Subset(subset) => {
            for form in subset {
                if !form.is_full(ctx) {
                    return Err(PolyError::NotFullForm);
                }
            }
            subset.iter().cloned().map(EvalPoint::Forms).collect()
        }
    };
    let eval = build_eval_matrix(ctx, &points, &monos, m, budget)?;
    let rank = fq_rank(&eval)?;
    let (target, pass) = match &rows {
        RankRows::V | RankRows::VFull => (full_dim, rank as u64 == full_dim),
        RankRows::Subset(subset) => {
            // ceil(|S| * C(d+n,n) / |V_full|)
            let vf = v_full_count(q, n);
            let num = BigUint::from(subset.len() as u64) * BigUint::from(full_dim);
            let target = ((num + &vf - BigUint::one()) / &vf)
                .to_u64()
                .expect("target fits");
            (target, rank as u64 >= target)
        }
    };
    Ok(RankAudit {
        rank,
        target,
        pass,
        rows: eval.rows(),
        cols: eval.cols(),
    })
}

/// A monomial set certified not to vanish jointly on a subset of forms.
#[derive(Clone, Debug)]
pub struct GoodMonomialSelection {
    /// The selected monomial exponents, in graded-lex order.
    pub monomials: Vec<Vec<u32>>,
    /// `ceil(δ·C(d+n,n))`: the guaranteed minimum size.
    pub guaranteed: u64,
    /// Certificate: the selected columns' coefficient matrix has full
    /// column rank, re-verified by a kernel computation.
    pub certificate: bool,
}

/// Pick a maximal `F_q`-independent set of monomial columns of
/// `EVAL^r(S, W_{d,n})`, greedy left-to-right in graded-lex order. No
/// nonzero combination of the selected monomials vanishes to order `r`
/// everywhere on `S`. Hypothesis: `d < r·q²`.
pub fn select_good_monomials(
    ctx: &FieldCtx,
    n: usize,
    subset: &[LinearFormVector],
    d: u32,
    r: u32,
    budget: &mut Budget,
) -> Result<GoodMonomialSelection, PolyError> {
    let q = ctx.q();
    if (d as u64) >= (r as u64) * q * q {
        return Err(PolyError::HypothesisViolated(format!(
            "need d < r*q^2, got d = {d}, r*q^2 = {}",
            (r as u64) * q * q
        )));
    }
    for form in subset {
        if !form.is_full(ctx) {
            return Err(PolyError::NotFullForm);
        }
    }
    let monos = monomials_up_to(n, d);
    let full_dim = binomial(d as u64 + n as u64, n as u64)
        .to_u64()
        .expect("monomial count fits");
    let guaranteed = {
        let vf = v_full_count(q, n);
        let num = BigUint::from(subset.len() as u64) * BigUint::from(full_dim);
        ((num + &vf - BigUint::one()) / &vf).to_u64().expect("fits")
    };
    if subset.is_empty() {
        return Ok(GoodMonomialSelection {
            monomials: vec![],
            guaranteed,
            certificate: true,
        });
    }
    let points: Vec<EvalPoint> = subset.iter().cloned().map(EvalPoint::Forms).collect();
    let eval = build_eval_matrix(ctx, &points, &monos, r, budget)?;
    let coeff = coeff_matrix(&eval, eval.max_entry_degree())?;
    // RREF pivot columns are exactly the greedy leftmost independent set
    let (_, _, pivots) = coeff.rref();
    let selected: Vec<Vec<u32>> = pivots.iter().map(|&c| monos[c].clone()).collect();

    // certificate: restrict to the selected columns and verify the
    // homogeneous system has only the trivial solution
    let mut restricted = MatrixFq::zero(ctx, coeff.rows(), selected.len());
    for (new_c, &old_c) in pivots.iter().enumerate() {
        for row in 0..coeff.rows() {
            restricted.set(row, new_c, coeff.get(row, old_c));
        }
    }
    let certificate = restricted.kernel().dim() == 0;
    Ok(GoodMonomialSelection {
        monomials: selected,
        guaranteed,
        certificate,
    })
}
