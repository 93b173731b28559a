//! Multivariate polynomials over `F_q`, Hasse derivatives, vanishing
//! multiplicities, and the evaluation-matrix rank toolkit.
//!
//! Hasse derivatives replace ordinary derivatives in positive
//! characteristic: `f^(i)` is the coefficient of `z^i` in `f(x+z)`, which
//! on a monomial acts as `x^a -> C(a,i)·x^{a-i}` with the binomials
//! reduced mod p. Multiplicity at a point is the largest `w` such that
//! every derivative of weight below `w` vanishes there.

mod evalmat;

pub use evalmat::{
    build_eval_matrix, coeff_matrix, enumerate_v, fq_rank, rank_lemma_audit,
    select_good_monomials, v_full_count, EvalMatrix, EvalPoint, GoodMonomialSelection,
    LinearFormVector, RankAudit, RankRows,
};

use std::collections::BTreeMap;

use crate::budget::BudgetExceeded;
use crate::linalg::FieldCtx;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolyError {
    CtxMismatch,
    ArityMismatch,
    ZeroPolynomial,
    DegreeOverflow { deg: u64, cap: u64 },
    HypothesisViolated(String),
    NotFullForm,
    EmptyEvaluationSet,
    Budget(BudgetExceeded),
}

impl std::fmt::Display for PolyError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::CtxMismatch => write!(f, "polynomials belong to different fields"),
            Self::ArityMismatch => write!(f, "variable counts do not match"),
            Self::ZeroPolynomial => write!(f, "the zero polynomial is not allowed here"),
            Self::DegreeOverflow { deg, cap } => {
                write!(f, "entry degree {deg} exceeds the bound {cap}")
            }
            Self::HypothesisViolated(msg) => write!(f, "hypothesis violated: {msg}"),
            Self::NotFullForm => write!(f, "tuple is not in the full (independent) family"),
            Self::EmptyEvaluationSet => write!(f, "evaluation set is empty"),
            Self::Budget(b) => write!(f, "{b}"),
        }
    }
}

impl std::error::Error for PolyError {}

impl From<BudgetExceeded> for PolyError {
    fn from(b: BudgetExceeded) -> Self {
        Self::Budget(b)
    }
}

/// Sparse multivariate polynomial: exponent vector -> nonzero coefficient.
#[derive(Clone, PartialEq, Eq)]
pub struct MultiPoly {
    ctx: FieldCtx,
    nvars: usize,
    terms: BTreeMap<Vec<u32>, u64>,
}

impl std::fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let vars: Vec<String> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, &p)| p > 0)
                    .map(|(i, &p)| {
                        if p == 1 {
                            format!("x{}", i + 1)
                        } else {
                            format!("x{}^{}", i + 1, p)
                        }
                    })
                    .collect();
                if vars.is_empty() {
                    format!("{c}")
                } else if *c == 1 {
                    vars.join("*")
                } else {
                    format!("{c}*{}", vars.join("*"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl MultiPoly {
    pub fn zero(ctx: &FieldCtx, nvars: usize) -> Self {
        Self {
            ctx: ctx.clone(),
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(ctx: &FieldCtx, nvars: usize, c: u64) -> Self {
        assert!(c < ctx.q());
        let mut p = Self::zero(ctx, nvars);
        if c != 0 {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    /// The monomial `coeff · x^exps`.
    pub fn monomial(ctx: &FieldCtx, nvars: usize, exps: &[u32], coeff: u64) -> Self {
        assert_eq!(exps.len(), nvars);
        assert!(coeff < ctx.q());
        let mut p = Self::zero(ctx, nvars);
        if coeff != 0 {
            p.terms.insert(exps.to_vec(), coeff);
        }
        p
    }

    pub fn variable(ctx: &FieldCtx, nvars: usize, index: usize) -> Self {
        let mut exps = vec![0u32; nvars];
        exps[index] = 1;
        Self::monomial(ctx, nvars, &exps, 1)
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, u64> {
        &self.terms
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u64> {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| x as u64).sum())
            .max()
    }

    fn check_compatible(&self, other: &Self) -> Result<(), PolyError> {
        if self.ctx != other.ctx {
            return Err(PolyError::CtxMismatch);
        }
        if self.nvars != other.nvars {
            return Err(PolyError::ArityMismatch);
        }
        Ok(())
    }

    fn insert_term(&mut self, exps: Vec<u32>, coeff: u64) {
        if coeff == 0 {
            return;
        }
        let f = &self.ctx;
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = f.add(*e.get(), coeff);
                if sum == 0 {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (e, &c) in &other.terms {
            out.insert_term(e.clone(), c);
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        let mut out = Self::zero(&self.ctx, self.nvars);
        for (e, &c) in &self.terms {
            out.terms.insert(e.clone(), self.ctx.neg(c));
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PolyError> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: u64) -> Self {
        let mut out = Self::zero(&self.ctx, self.nvars);
        if c == 0 {
            return out;
        }
        for (e, &coeff) in &self.terms {
            let v = self.ctx.mul(coeff, c);
            if v != 0 {
                out.terms.insert(e.clone(), v);
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_compatible(other)?;
        let mut out = Self::zero(&self.ctx, self.nvars);
        for (ea, &ca) in &self.terms {
            for (eb, &cb) in &other.terms {
                let exps: Vec<u32> = ea.iter().zip(eb).map(|(&a, &b)| a + b).collect();
                out.insert_term(exps, self.ctx.mul(ca, cb));
            }
        }
        Ok(out)
    }

    pub fn pow(&self, mut e: u32) -> Result<Self, PolyError> {
        let mut result = Self::constant(&self.ctx, self.nvars, 1);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }

    pub fn eval(&self, point: &[u64]) -> Result<u64, PolyError> {
        if point.len() != self.nvars {
            return Err(PolyError::ArityMismatch);
        }
        let f = &self.ctx;
        let mut acc = 0u64;
        for (e, &c) in &self.terms {
            let mut term = c;
            for (i, &exp) in e.iter().enumerate() {
                if exp > 0 {
                    term = f.mul(term, f.pow(point[i], exp as u64));
                }
            }
            acc = f.add(acc, term);
        }
        Ok(acc)
    }

    /// Substitute `x_i -> images[i]`; the images share one ring.
    pub fn substitute(&self, images: &[Self]) -> Result<Self, PolyError> {
        if images.len() != self.nvars {
            return Err(PolyError::ArityMismatch);
        }
        let (target_ctx, target_nvars) = match images.first() {
            Some(first) => {
                for im in images {
                    first.check_compatible(im)?;
                }
                if first.ctx != self.ctx {
                    return Err(PolyError::CtxMismatch);
                }
                (first.ctx.clone(), first.nvars)
            }
            // nvars = 0: constants only
            None => (self.ctx.clone(), 0),
        };
        let mut out = Self::zero(&target_ctx, target_nvars);
        for (e, &c) in &self.terms {
            let mut term = Self::constant(&target_ctx, target_nvars, c);
            for (i, &exp) in e.iter().enumerate() {
                if exp > 0 {
                    term = term.mul(&images[i].pow(exp)?)?;
                }
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }
}

/// `C(a, b) mod p` by Lucas' theorem: the product of digit binomials.
pub fn binomial_mod_p(a: u32, b: u32, p: u64) -> u64 {
    if b > a {
        return 0;
    }
    let (mut a, mut b) = (a as u64, b as u64);
    let mut result = 1u64;
    while b > 0 || a > 0 {
        let (ad, bd) = (a % p, b % p);
        if bd > ad {
            return 0;
        }
        // C(ad, bd) mod p with ad, bd < p, via the multiplicative formula
        let mut c = 1u64;
        for i in 0..bd {
            c = c * ((ad - i) % p) % p;
            // divide by (i+1): multiply by its inverse mod p
            let inv = mod_inverse(i + 1, p);
            c = c * inv % p;
        }
        result = result * c % p;
        a /= p;
        b /= p;
    }
    result
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    // Fermat: a^(p-2) mod p
    let mut result = 1u64;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    result
}

/// The `order`-th Hasse derivative: termwise
/// `x^a -> C(a, order)·x^{a-order}` with binomials mod p.
pub fn hasse_derivative(f: &MultiPoly, order: &[u32]) -> Result<MultiPoly, PolyError> {
    if order.len() != f.nvars {
        return Err(PolyError::ArityMismatch);
    }
    let p = f.ctx.p();
    let mut out = MultiPoly::zero(&f.ctx, f.nvars);
    for (e, &c) in &f.terms {
        if e.iter().zip(order).any(|(&a, &i)| a < i) {
            continue;
        }
        let mut binom = 1u64;
        for (&a, &i) in e.iter().zip(order) {
            binom = binom * binomial_mod_p(a, i, p) % p;
            if binom == 0 {
                break;
            }
        }
        if binom == 0 {
            continue;
        }
        let coeff = f.ctx.mul(c, f.ctx.from_prime_subfield(binom));
        let exps: Vec<u32> = e.iter().zip(order).map(|(&a, &i)| a - i).collect();
        out.insert_term(exps, coeff);
    }
    Ok(out)
}

/// Both sides of the derivative chain rule:
/// `(f^(i))^(j) = C(i+j, i) · f^(i+j)` (componentwise binomials).
/// They must be equal as polynomials.
pub fn chain_rule_pair(
    f: &MultiPoly,
    i: &[u32],
    j: &[u32],
) -> Result<(MultiPoly, MultiPoly), PolyError> {
    if i.len() != f.nvars || j.len() != f.nvars {
        return Err(PolyError::ArityMismatch);
    }
    let lhs = hasse_derivative(&hasse_derivative(f, i)?, j)?;
    let sum: Vec<u32> = i.iter().zip(j).map(|(&a, &b)| a + b).collect();
    let p = f.ctx.p();
    let mut factor = 1u64;
    for (&a, &b) in i.iter().zip(j) {
        factor = factor * binomial_mod_p(a + b, a, p) % p;
    }
    let rhs = hasse_derivative(f, &sum)?.scale(f.ctx.from_prime_subfield(factor));
    Ok((lhs, rhs))
}

/// Vanishing multiplicity: finite or infinite (zero polynomial).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Multiplicity {
    Finite(u64),
    Infinite,
}

impl Multiplicity {
    pub fn at_least(&self, w: u64) -> bool {
        match self {
            Self::Finite(m) => *m >= w,
            Self::Infinite => true,
        }
    }

    pub fn finite(&self) -> Option<u64> {
        match self {
            Self::Finite(m) => Some(*m),
            Self::Infinite => None,
        }
    }
}

/// All exponent vectors over `nvars` variables of total weight exactly
/// `w`, in descending lexicographic order.
pub fn multi_indices_of_weight(nvars: usize, w: u32) -> Vec<Vec<u32>> {
    fn rec(nvars: usize, w: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if nvars == 1 {
            prefix.push(w);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=w).rev() {
            prefix.push(first);
            rec(nvars - 1, w - first, prefix, out);
            prefix.pop();
        }
    }
    if nvars == 0 {
        return if w == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    rec(nvars, w, &mut Vec::new(), &mut out);
    out
}

/// Monomial exponents of total degree at most `d`, graded lexicographic:
/// ascending degree, descending lex within a degree.
pub fn monomials_up_to(nvars: usize, d: u32) -> Vec<Vec<u32>> {
    (0..=d)
        .flat_map(|w| multi_indices_of_weight(nvars, w))
        .collect()
}

/// Largest `w` such that every Hasse derivative of weight `< w` vanishes
/// at the point; infinite for the zero polynomial.
pub fn multiplicity(f: &MultiPoly, point: &[u64]) -> Result<Multiplicity, PolyError> {
    if point.len() != f.nvars {
        return Err(PolyError::ArityMismatch);
    }
    let Some(deg) = f.total_degree() else {
        return Ok(Multiplicity::Infinite);
    };
    for w in 0..=(deg as u32) {
        for idx in multi_indices_of_weight(f.nvars, w) {
            if hasse_derivative(f, &idx)?.eval(point)? != 0 {
                return Ok(Multiplicity::Finite(w as u64));
            }
        }
    }
    unreachable!("a nonzero polynomial has a nonvanishing derivative of weight <= deg")
}

/// Total multiplicity of `f` over the grid `U^n` against the degree bound
/// `d·|U|^{n-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SzAudit {
    pub total_multiplicity: u64,
    pub degree: u64,
    pub grid_side: u64,
    pub bound: u64,
    pub pass: bool,
    /// Equality: the bound is attained exactly.
    pub tight: bool,
}

/// Sum the vanishing multiplicity of a nonzero `f` over all of `U^n` and
/// check `Σ mult <= deg(f)·|U|^{n-1}`.
pub fn sz_audit(f: &MultiPoly, u_set: &[u64]) -> Result<SzAudit, PolyError> {
    if f.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    if u_set.is_empty() {
        return Err(PolyError::EmptyEvaluationSet);
    }
    let n = f.nvars;
    let degree = f.total_degree().expect("nonzero");
    let side = u_set.len() as u64;
    let mut total = 0u64;
    let mut point_idx = vec![0usize; n];
    loop {
        let point: Vec<u64> = point_idx.iter().map(|&i| u_set[i]).collect();
        match multiplicity(f, &point)? {
            Multiplicity::Finite(m) => total += m,
            Multiplicity::Infinite => unreachable!("nonzero polynomial"),
        }
        // odometer over U^n
        let mut carry = true;
        for slot in point_idx.iter_mut().rev() {
            if !carry {
                break;
            }
            *slot += 1;
            if *slot == u_set.len() {
                *slot = 0;
            } else {
                carry = false;
            }
        }
        if carry {
            break;
        }
        if n == 0 {
            break;
        }
    }
    let bound = degree * side.pow((n as u32).saturating_sub(1));
    Ok(SzAudit {
        total_multiplicity: total,
        degree,
        grid_side: side,
        bound,
        pass: total <= bound,
        tight: total == bound,
    })
}

/// Both multiplicities of the composition inequality
/// `mult(f∘H, a) >= mult(f, H(a))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositionAudit {
    pub composed: Multiplicity,
    pub inner: Multiplicity,
    pub pass: bool,
}

/// Compose `f` with the tuple `H` and compare multiplicities at `a`.
pub fn mult_composition_audit(
    f: &MultiPoly,
    h: &[MultiPoly],
    point: &[u64],
) -> Result<CompositionAudit, PolyError> {
    let composed_poly = f.substitute(h)?;
    let composed = multiplicity(&composed_poly, point)?;
    let image: Vec<u64> = h
        .iter()
        .map(|hi| hi.eval(point))
        .collect::<Result<_, _>>()?;
    let inner = multiplicity(f, &image)?;
    let pass = match (composed, inner) {
        (Multiplicity::Infinite, _) => true,
        (Multiplicity::Finite(_), Multiplicity::Infinite) => false,
        (Multiplicity::Finite(c), Multiplicity::Finite(i)) => c >= i,
    };
    Ok(CompositionAudit {
        composed,
        inner,
        pass,
    })
}
