//! Small exact-arithmetic helpers shared across modules.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// `base^exp` as a big integer.
pub fn big_pow(base: u64, exp: u64) -> BigUint {
    BigUint::from(base).pow(u32::try_from(exp).expect("exponent too large"))
}

/// Rational from an integer pair.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Rational from big unsigned numerator/denominator.
pub fn ratio_big(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Smallest integer `e >= 0` with `2^e >= x`, for `x > 0`.
///
/// This is `ceil(log2(x))` evaluated by exact power comparison.
pub fn ceil_log2_rational(x: &BigRational) -> u64 {
    assert!(x.is_positive(), "ceil_log2 needs a positive argument");
    if *x <= BigRational::one() {
        return 0;
    }
    // x > 1: bracket by bit length of ceil(x), then walk down.
    let approx = x.ceil().to_integer().magnitude().bits();
    let mut e = approx; // 2^approx >= ceil(x) >= x
    while e > 0 && pow2_rational(e - 1) >= *x {
        e -= 1;
    }
    e
}

/// `2^e` as a rational.
pub fn pow2_rational(e: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(big_pow(2, e)))
}

/// Smallest integer `t >= 0` with `2^t >= x`; `None` when `x <= 0`
/// (every `t` works, callers treat that as 0).
pub fn smallest_pow2_at_least(x: &BigRational) -> u64 {
    if !x.is_positive() {
        return 0;
    }
    ceil_log2_rational(x)
}

/// Render a rational as `"num/den"` in lowest terms (denominator always
/// printed, `0/1` for zero) — the wire form used in reports and JSONL.
pub fn rational_to_string(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Parse the `"num/den"` wire form; a bare integer is accepted as `n/1`.
pub fn rational_from_string(s: &str) -> Result<BigRational, String> {
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let n: BigInt = num
        .parse()
        .map_err(|e| format!("bad numerator {num:?}: {e}"))?;
    let d: BigInt = den
        .parse()
        .map_err(|e| format!("bad denominator {den:?}: {e}"))?;
    if d.is_zero() {
        return Err("zero denominator".to_string());
    }
    Ok(BigRational::new(n, d))
}

/// Binomial coefficient `C(n, k)` as a big integer.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..k {
        num *= BigUint::from(n - i);
        den *= BigUint::from(i + 1);
    }
    num / den
}
