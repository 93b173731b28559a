//! Finite fields `F_q`, `q = p^ℓ`, with a deterministic modulus.
//!
//! Elements are stored packed: the coefficient vector `(c_0, ..., c_{ℓ-1})`
//! over `Z_p` (c_j multiplies x^j) is encoded as the integer
//! `Σ c_j p^j`. For `p = 2` this is the usual bit representation.
//!
//! For a fixed `(p, ℓ)` the modulus is the lexicographically smallest monic
//! irreducible polynomial of degree ℓ over `F_p`, where candidates are
//! ordered by their coefficients read high-degree-first as base-p digits.
//! Irreducibility is established by trial division against every monic
//! polynomial of degree at most ℓ/2. This makes field construction
//! reproducible across runs and machines.

use std::fmt;
use std::sync::Arc;

use super::LinalgError;

/// Largest supported field cardinality.
pub const MAX_Q: u64 = 1 << 20;

#[derive(Debug)]
struct CtxInner {
    p: u64,
    ell: u32,
    q: u64,
    /// Monic modulus, coefficients low-degree-first, length ell+1.
    /// Present iff ell > 1.
    modulus: Option<Vec<u64>>,
    /// Full multiplication table for small fields (q <= 256).
    mul_table: Option<Vec<u64>>,
    /// Inverse table for small fields; entry 0 is unused.
    inv_table: Option<Vec<u64>>,
}

/// A finite field context. Cheap to clone and share across threads.
#[derive(Clone)]
pub struct FieldCtx {
    inner: Arc<CtxInner>,
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        self.inner.p == other.inner.p && self.inner.ell == other.inner.ell
    }
}

impl Eq for FieldCtx {}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldCtx(q = {}^{})", self.inner.p, self.inner.ell)
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

// --- dense polynomial helpers over Z_p (low-degree-first, used only for
// --- modulus search and extension-field reduction) ---

fn poly_deg(a: &[u64]) -> Option<usize> {
    a.iter().rposition(|&c| c != 0)
}

/// Remainder of `a` modulo monic `m` over Z_p.
fn poly_rem(a: &mut Vec<u64>, m: &[u64], p: u64) {
    let md = poly_deg(m).expect("modulus is nonzero");
    while let Some(d) = poly_deg(a) {
        if d < md {
            break;
        }
        let lead = a[d];
        let shift = d - md;
        for (i, &mc) in m.iter().enumerate() {
            let idx = i + shift;
            let sub = (lead * mc) % p;
            a[idx] = (a[idx] + p - sub) % p;
        }
    }
    a.truncate(md);
    a.resize(md, 0);
}

/// Does monic `b` divide `a` exactly over Z_p?
fn poly_divides(b: &[u64], a: &[u64], p: u64) -> bool {
    let mut r = a.to_vec();
    let bd = poly_deg(b).expect("divisor is nonzero");
    while let Some(d) = poly_deg(&r) {
        if d < bd {
            return false;
        }
        let lead = r[d];
        let shift = d - bd;
        for (i, &bc) in b.iter().enumerate() {
            let idx = i + shift;
            let sub = (lead * bc) % p;
            r[idx] = (r[idx] + p - sub) % p;
        }
    }
    true
}

/// Monic polynomial of degree `deg` whose non-leading coefficients are the
/// base-p digits of `index`, read high-degree-first.
fn monic_from_index(index: u64, deg: u32, p: u64) -> Vec<u64> {
    let mut coeffs = vec![0u64; deg as usize + 1];
    coeffs[deg as usize] = 1;
    // base-p digit j of index is the coefficient of x^j, so iterating
    // index upward walks the candidates with high-degree coefficients
    // most significant.
    let mut rest = index;
    for j in 0..deg as usize {
        coeffs[j] = rest % p;
        rest /= p;
    }
    coeffs
}

fn is_irreducible(candidate: &[u64], p: u64) -> bool {
    let deg = poly_deg(candidate).unwrap() as u32;
    if candidate[0] == 0 {
        // divisible by x
        return deg == 1;
    }
    for d in 1..=deg / 2 {
        let count = p.pow(d);
        for idx in 0..count {
            let divisor = monic_from_index(idx, d, p);
            if poly_divides(&divisor, candidate, p) {
                return false;
            }
        }
    }
    true
}

fn find_modulus(p: u64, ell: u32) -> Vec<u64> {
    let count = p.pow(ell);
    for idx in 0..count {
        let candidate = monic_from_index(idx, ell, p);
        if is_irreducible(&candidate, p) {
            return candidate;
        }
    }
    unreachable!("an irreducible polynomial of every degree exists over F_p")
}

impl FieldCtx {
    /// Build `F_{p^ell}`. Verifies primality of `p` and, for `ell > 1`,
    /// finds the deterministic irreducible modulus.
    pub fn new(p: u64, ell: u32) -> Result<Self, LinalgError> {
        if !is_prime(p) {
            return Err(LinalgError::NotPrime(p));
        }
        if ell == 0 {
            return Err(LinalgError::ZeroExtensionDegree);
        }
        let q = (0..ell).try_fold(1u64, |acc, _| {
            let next = acc.checked_mul(p)?;
            (next <= MAX_Q).then_some(next)
        });
        let Some(q) = q else {
            return Err(LinalgError::FieldTooLarge { p, ell });
        };
        let modulus = (ell > 1).then(|| find_modulus(p, ell));
        let mut inner = CtxInner {
            p,
            ell,
            q,
            modulus,
            mul_table: None,
            inv_table: None,
        };
        if q <= 256 {
            let mut table = vec![0u64; (q * q) as usize];
            for a in 0..q {
                for b in 0..q {
                    table[(a * q + b) as usize] = mul_slow(&inner, a, b);
                }
            }
            let mut inv = vec![0u64; q as usize];
            for a in 1..q {
                inv[a as usize] = pow_slow(&inner, a, q - 2);
            }
            inner.mul_table = Some(table);
            inner.inv_table = Some(inv);
        }
        Ok(Self {
            inner: Arc::new(inner),
        })
    }

    pub fn p(&self) -> u64 {
        self.inner.p
    }

    pub fn ell(&self) -> u32 {
        self.inner.ell
    }

    pub fn q(&self) -> u64 {
        self.inner.q
    }

    /// Modulus coefficients, low-degree-first (length ell+1); `None` for
    /// prime fields.
    pub fn modulus(&self) -> Option<&[u64]> {
        self.inner.modulus.as_deref()
    }

    /// All field elements in encoding order `0..q`.
    pub fn elements(&self) -> impl Iterator<Item = u64> {
        0..self.inner.q
    }

    /// Decode an element into its coefficient vector over `Z_p`
    /// (low-degree-first, length ell).
    pub fn coeffs(&self, a: u64) -> Vec<u64> {
        debug_assert!(a < self.q());
        let mut out = Vec::with_capacity(self.ell() as usize);
        let mut rest = a;
        for _ in 0..self.ell() {
            out.push(rest % self.p());
            rest /= self.p();
        }
        out
    }

    /// Encode a coefficient vector (low-degree-first) into an element.
    pub fn from_coeffs(&self, coeffs: &[u64]) -> u64 {
        assert!(coeffs.len() <= self.ell() as usize);
        let mut val = 0u64;
        for &c in coeffs.iter().rev() {
            debug_assert!(c < self.p());
            val = val * self.p() + c;
        }
        val
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        let p = self.p();
        if self.ell() == 1 {
            return (a + b) % p;
        }
        if p == 2 {
            return a ^ b;
        }
        digitwise(a, b, p, self.ell(), |x, y| (x + y) % p)
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        let p = self.p();
        if self.ell() == 1 {
            return (a + p - b) % p;
        }
        if p == 2 {
            return a ^ b;
        }
        digitwise(a, b, p, self.ell(), |x, y| (x + p - y) % p)
    }

    pub fn neg(&self, a: u64) -> u64 {
        self.sub(0, a)
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        if let Some(table) = &self.inner.mul_table {
            return table[(a * self.q() + b) as usize];
        }
        mul_slow(&self.inner, a, b)
    }

    /// Multiplicative inverse; panics on zero (checked callers use
    /// [`FieldElem::inv`]).
    pub fn inv(&self, a: u64) -> u64 {
        assert!(a != 0, "zero has no inverse");
        if let Some(table) = &self.inner.inv_table {
            return table[a as usize];
        }
        pow_slow(&self.inner, a, self.q() - 2)
    }

    pub fn div(&self, a: u64, b: u64) -> u64 {
        self.mul(a, self.inv(b))
    }

    pub fn pow(&self, a: u64, e: u64) -> u64 {
        let mut result = 1u64;
        let mut base = a;
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul(result, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        result
    }

    /// Scalar embedding of `Z_p` into the field (constant polynomials).
    pub fn from_prime_subfield(&self, c: u64) -> u64 {
        c % self.p()
    }

    /// Wrap a raw value into a checked element.
    pub fn elem(&self, val: u64) -> Result<FieldElem, LinalgError> {
        if val >= self.q() {
            return Err(LinalgError::ValueOutOfRange { val, q: self.q() });
        }
        Ok(FieldElem {
            ctx: self.clone(),
            val,
        })
    }
}

fn digitwise(a: u64, b: u64, p: u64, ell: u32, op: impl Fn(u64, u64) -> u64) -> u64 {
    let mut out = 0u64;
    let mut pow = 1u64;
    let (mut ra, mut rb) = (a, b);
    for _ in 0..ell {
        out += op(ra % p, rb % p) * pow;
        pow *= p;
        ra /= p;
        rb /= p;
    }
    out
}

fn unpack(mut a: u64, p: u64, ell: u32) -> Vec<u64> {
    let mut v = Vec::with_capacity(ell as usize);
    for _ in 0..ell {
        v.push(a % p);
        a /= p;
    }
    v
}

fn pack(v: &[u64], p: u64) -> u64 {
    let mut out = 0u64;
    for &c in v.iter().rev() {
        out = out * p + c;
    }
    out
}

fn mul_slow(inner: &CtxInner, a: u64, b: u64) -> u64 {
    let p = inner.p;
    if inner.ell == 1 {
        return (a * b) % p;
    }
    let av = unpack(a, p, inner.ell);
    let bv = unpack(b, p, inner.ell);
    let mut prod = vec![0u64; 2 * inner.ell as usize - 1];
    for (i, &ac) in av.iter().enumerate() {
        if ac == 0 {
            continue;
        }
        for (j, &bc) in bv.iter().enumerate() {
            prod[i + j] = (prod[i + j] + ac * bc) % p;
        }
    }
    poly_rem(&mut prod, inner.modulus.as_ref().unwrap(), p);
    pack(&prod, p)
}

fn pow_slow(inner: &CtxInner, a: u64, mut e: u64) -> u64 {
    let mut result = 1u64;
    let mut base = a;
    while e > 0 {
        if e & 1 == 1 {
            result = mul_slow(inner, result, base);
        }
        base = mul_slow(inner, base, base);
        e >>= 1;
    }
    result
}

/// A field element carrying its context, for checked arithmetic.
#[derive(Clone, PartialEq, Eq)]
pub struct FieldElem {
    ctx: FieldCtx,
    val: u64,
}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}∈F{}", self.val, self.ctx.q())
    }
}

impl FieldElem {
    pub fn value(&self) -> u64 {
        self.val
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    /// Coefficient vector over `Z_p`, low-degree-first, length ell.
    pub fn coeffs(&self) -> Vec<u64> {
        self.ctx.coeffs(self.val)
    }

    fn check_ctx(&self, other: &FieldElem) -> Result<(), LinalgError> {
        if self.ctx != other.ctx {
            return Err(LinalgError::CtxMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &FieldElem) -> Result<FieldElem, LinalgError> {
        self.check_ctx(other)?;
        self.ctx.elem(self.ctx.add(self.val, other.val))
    }

    pub fn sub(&self, other: &FieldElem) -> Result<FieldElem, LinalgError> {
        self.check_ctx(other)?;
        self.ctx.elem(self.ctx.sub(self.val, other.val))
    }

    pub fn mul(&self, other: &FieldElem) -> Result<FieldElem, LinalgError> {
        self.check_ctx(other)?;
        self.ctx.elem(self.ctx.mul(self.val, other.val))
    }

    pub fn inv(&self) -> Result<FieldElem, LinalgError> {
        if self.val == 0 {
            return Err(LinalgError::DivisionByZero);
        }
        self.ctx.elem(self.ctx.inv(self.val))
    }

    pub fn div(&self, other: &FieldElem) -> Result<FieldElem, LinalgError> {
        self.check_ctx(other)?;
        if other.val == 0 {
            return Err(LinalgError::DivisionByZero);
        }
        self.ctx.elem(self.ctx.div(self.val, other.val))
    }
}
