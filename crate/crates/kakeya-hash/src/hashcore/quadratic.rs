//! Exact arithmetic in `Q(√τ)` for a fixed positive rational τ.
//!
//! The improved parameter rules involve `(τ - √τ)²` and its powers, which
//! are irrational for general τ. Numbers of the form `a + b·√τ` with
//! rational `a, b` are closed under the arithmetic those formulas need,
//! and their sign can be decided exactly, so every comparison stays
//! float-free.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;

/// `a + b·√tau`, with `tau` a fixed positive rational.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadRat {
    a: BigRational,
    b: BigRational,
    tau: BigRational,
}

impl QuadRat {
    pub fn new(a: BigRational, b: BigRational, tau: BigRational) -> Self {
        assert!(tau.is_positive(), "radicand must be positive");
        Self { a, b, tau }
    }

    pub fn from_rational(a: BigRational, tau: BigRational) -> Self {
        Self::new(a, BigRational::zero(), tau)
    }

    /// The value `√tau` itself.
    pub fn sqrt_tau(tau: BigRational) -> Self {
        Self::new(BigRational::zero(), BigRational::one(), tau)
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }

    pub fn radical_part(&self) -> &BigRational {
        &self.b
    }

    fn check_same_field(&self, other: &Self) {
        assert_eq!(self.tau, other.tau, "mixed radicands");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_same_field(other);
        Self::new(&self.a + &other.a, &self.b + &other.b, self.tau.clone())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check_same_field(other);
        Self::new(&self.a - &other.a, &self.b - &other.b, self.tau.clone())
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check_same_field(other);
        // (a + b√τ)(c + d√τ) = ac + bdτ + (ad + bc)√τ
        Self::new(
            &self.a * &other.a + &self.b * &other.b * &self.tau,
            &self.a * &other.b + &self.b * &other.a,
            self.tau.clone(),
        )
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        Self::new(&self.a * k, &self.b * k, self.tau.clone())
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut result = Self::from_rational(BigRational::one(), self.tau.clone());
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        result
    }

    /// `1 / (a + b√τ)` via the conjugate. Panics on zero.
    pub fn inv(&self) -> Self {
        let norm = &self.a * &self.a - &self.b * &self.b * &self.tau;
        assert!(!norm.is_zero() || !self.is_zero(), "inverse of zero");
        if norm.is_zero() {
            // a² = b²τ with (a,b) ≠ 0 means √τ = ±a/b is rational;
            // fall back to rational arithmetic.
            let value = &self.a + &self.b * rational_sqrt(&self.tau).expect("norm zero forces rational √τ");
            return Self::from_rational(value.recip(), self.tau.clone());
        }
        Self::new(&self.a / &norm, -(&self.b / &norm), self.tau.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// Exact sign of `a + b·√τ`.
    pub fn sign(&self) -> Ordering {
        let sa = rational_sign(&self.a);
        let sb = rational_sign(&self.b);
        match (sa, sb) {
            (Ordering::Equal, s) | (s, Ordering::Equal) => s,
            (Ordering::Greater, Ordering::Greater) => Ordering::Greater,
            (Ordering::Less, Ordering::Less) => Ordering::Less,
            // opposite signs: compare a² with b²τ; the sign of the larger
            // magnitude term wins
            (sa, _) => {
                let a2 = &self.a * &self.a;
                let b2t = &self.b * &self.b * &self.tau;
                match a2.cmp(&b2t) {
                    Ordering::Greater => sa,
                    Ordering::Less => sa.reverse(),
                    Ordering::Equal => Ordering::Equal,
                }
            }
        }
    }

    pub fn cmp_value(&self, other: &Self) -> Ordering {
        self.sub(other).sign()
    }

    pub fn is_positive_value(&self) -> bool {
        self.sign() == Ordering::Greater
    }

    /// `self >= x` for rational `x`.
    pub fn ge_rational(&self, x: &BigRational) -> bool {
        self.sub(&Self::from_rational(x.clone(), self.tau.clone()))
            .sign()
            != Ordering::Less
    }

    /// `self <= x` for rational `x`.
    pub fn le_rational(&self, x: &BigRational) -> bool {
        self.sub(&Self::from_rational(x.clone(), self.tau.clone()))
            .sign()
            != Ordering::Greater
    }

    /// Decimal rendering for reports only.
    pub fn approx_f64(&self) -> f64 {
        rational_f64(&self.a) + rational_f64(&self.b) * rational_f64(&self.tau).sqrt()
    }
}

fn rational_sign(x: &BigRational) -> Ordering {
    if x.is_zero() {
        Ordering::Equal
    } else if x.is_positive() {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}

fn rational_f64(x: &BigRational) -> f64 {
    let n = x.numer().to_string().parse::<f64>().unwrap_or(f64::NAN);
    let d = x.denom().to_string().parse::<f64>().unwrap_or(f64::NAN);
    n / d
}

/// Exact rational square root, when one exists.
fn rational_sqrt(x: &BigRational) -> Option<BigRational> {
    if x.is_negative() {
        return None;
    }
    let sn = x.numer().sqrt();
    let sd = x.denom().sqrt();
    let candidate = BigRational::new(sn, sd);
    (&candidate * &candidate == *x).then_some(candidate)
}

/// `(τ - √τ)²` as an element of `Q(√τ)`: `τ² + τ - 2τ·√τ`.
pub fn tau_minus_sqrt_tau_squared(tau: &BigRational) -> QuadRat {
    let tau_sq = tau * tau;
    QuadRat::new(
        &tau_sq + tau,
        -(BigRational::from_integer(2.into()) * tau),
        tau.clone(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::ratio;

    fn q(a: (i64, i64), b: (i64, i64), tau: (i64, i64)) -> QuadRat {
        QuadRat::new(ratio(a.0, a.1), ratio(b.0, b.1), ratio(tau.0, tau.1))
    }

    #[test]
    fn sign_against_float_oracle() {
        // compare exact sign with f64 evaluation on values far from zero
        let taus = [(2i64, 1i64), (3, 1), (5, 2), (7, 3)];
        for &(tn, td) in &taus {
            for an in -6i64..=6 {
                for bn in -6i64..=6 {
                    let v = q((an, 2), (bn, 3), (tn, td));
                    let approx = v.approx_f64();
                    if approx.abs() > 1e-9 {
                        let expected = if approx > 0.0 {
                            Ordering::Greater
                        } else {
                            Ordering::Less
                        };
                        assert_eq!(v.sign(), expected, "a={an}/2 b={bn}/3 tau={tn}/{td}");
                    }
                }
            }
        }
    }

    #[test]
    fn exact_zero_detected() {
        // 2 - √4 = 0 in Q(√4)
        let v = q((2, 1), (-1, 1), (4, 1));
        assert_eq!(v.sign(), Ordering::Equal);
    }

    #[test]
    fn mul_and_pow_agree_with_float() {
        let v = q((1, 2), (3, 4), (5, 1));
        let p = v.pow(8);
        let expected = v.approx_f64().powi(8);
        assert!((p.approx_f64() - expected).abs() / expected.abs() < 1e-9);
    }

    #[test]
    fn inv_is_multiplicative_inverse() {
        let v = q((1, 2), (3, 4), (5, 1));
        let one = v.mul(&v.inv());
        assert_eq!(one.rational_part(), &ratio(1, 1));
        assert!(one.radical_part().is_zero());
    }

    #[test]
    fn inv_handles_zero_norm_with_rational_radical() {
        // 2 + sqrt(4) has conjugate norm 4 - 4 = 0 but value 4: the
        // inverse falls back to plain rational arithmetic
        let v = q((2, 1), (1, 1), (4, 1));
        let inv = v.inv();
        assert_eq!(inv.rational_part(), &ratio(1, 4));
        assert!(inv.radical_part().is_zero());
        let one = v.mul(&inv);
        assert_eq!(one.sign(), Ordering::Greater);
        assert_eq!(one.sub(&q((1, 1), (0, 1), (4, 1))).sign(), Ordering::Equal);
    }

    #[test]
    fn tau_minus_sqrt_squared_matches_float() {
        for &(tn, td) in &[(4i64, 1i64), (9, 4), (7, 2), (11, 10)] {
            let tau = ratio(tn, td);
            let v = tau_minus_sqrt_tau_squared(&tau);
            let t = tn as f64 / td as f64;
            let expected = (t - t.sqrt()).powi(2);
            assert!((v.approx_f64() - expected).abs() < 1e-9);
        }
    }
}
