//! Arbitrary-precision rational scalars.
//!
//! `BigRat` is the coefficient domain for everything in this crate: polynomial
//! coefficients, sequence values, verification residuals. It is backed by
//! `num::BigRational`, which already keeps values in lowest terms with a
//! positive denominator, so every value is canonical by construction and
//! equality is structural. No floating point is used anywhere.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

pub type BigRat = BigRational;

/// Rational from a machine integer.
pub fn rat(n: i64) -> BigRat {
    BigRational::from_integer(BigInt::from(n))
}

/// Rational from a numerator/denominator pair. Panics on zero denominator.
pub fn rat_frac(num: i64, den: i64) -> BigRat {
    assert!(den != 0, "zero denominator");
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Rational from a big integer.
pub fn rat_int(n: BigInt) -> BigRat {
    BigRational::from_integer(n)
}

/// Integer power with negative exponents allowed (base must be nonzero then).
pub fn rat_pow(base: &BigRat, exp: i64) -> BigRat {
    if exp == 0 {
        return BigRat::one();
    }
    let mut p = BigRat::one();
    for _ in 0..exp.unsigned_abs() {
        p *= base;
    }
    if exp < 0 {
        assert!(!p.is_zero(), "zero raised to a negative power");
        p.recip()
    } else {
        p
    }
}

/// The integer value, if the rational is an integer.
pub fn as_integer(x: &BigRat) -> Option<BigInt> {
    if x.is_integer() {
        Some(x.to_integer())
    } else {
        None
    }
}

/// The machine-integer value, if it is an integer that fits in `i64`.
pub fn as_i64(x: &BigRat) -> Option<i64> {
    use num::ToPrimitive;
    as_integer(x).and_then(|n| n.to_i64())
}

/// n! as a rational. Panics on negative input.
pub fn factorial(n: i64) -> BigRat {
    assert!(n >= 0, "factorial of a negative integer");
    let mut acc = BigInt::one();
    for i in 2..=n {
        acc *= BigInt::from(i);
    }
    rat_int(acc)
}

/// Rising factorial x(x+1)...(x+n-1) for integer n of either sign.
///
/// For negative n this is 1/((x-1)(x-2)...(x+n)), the usual extension that
/// keeps poch(x, a+b) = poch(x, a) * poch(x+a, b).
pub fn pochhammer(x: &BigRat, n: i64) -> BigRat {
    let mut acc = BigRat::one();
    if n >= 0 {
        for i in 0..n {
            acc *= x + rat(i);
        }
    } else {
        for i in 1..=(-n) {
            let f = x - rat(i);
            assert!(!f.is_zero(), "pochhammer pole");
            acc /= f;
        }
    }
    acc
}

/// Binomial coefficient with integer arguments, zero outside 0 <= k <= n
/// for n >= 0, and the standard extension C(n,k) = (-1)^k C(k-n-1,k) for
/// negative n with k >= 0.
pub fn binomial_int(n: i64, k: i64) -> BigRat {
    if k < 0 {
        return BigRat::zero();
    }
    if n >= 0 && k > n {
        return BigRat::zero();
    }
    let mut acc = BigRat::one();
    for i in 0..k {
        acc = acc * rat(n - i) / rat(i + 1);
    }
    acc
}

/// Render as `p` or `p/q`.
pub fn rat_to_string(x: &BigRat) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// True if the value is a negative rational (used by renderers).
pub fn is_negative(x: &BigRat) -> bool {
    x.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_forms() {
        assert_eq!(rat_frac(2, 4), rat_frac(1, 2));
        assert_eq!(rat_frac(1, -2), rat_frac(-1, 2));
        assert_eq!(rat_frac(0, 5), rat(0));
        assert_eq!(rat_to_string(&rat_frac(-3, 6)), "-1/2");
    }

    #[test]
    fn powers_and_factorials() {
        assert_eq!(rat_pow(&rat(2), 10), rat(1024));
        assert_eq!(rat_pow(&rat(2), -3), rat_frac(1, 8));
        assert_eq!(rat_pow(&rat_frac(-1, 2), 2), rat_frac(1, 4));
        assert_eq!(factorial(6), rat(720));
        assert_eq!(factorial(0), rat(1));
    }

    #[test]
    fn pochhammer_both_signs() {
        assert_eq!(pochhammer(&rat(3), 4), rat(3 * 4 * 5 * 6));
        assert_eq!(pochhammer(&rat(3), 0), rat(1));
        // poch(x,-2) = 1/((x-1)(x-2))
        assert_eq!(pochhammer(&rat(5), -2), rat_frac(1, 12));
        // consistency: poch(x, 2 + (-2)) = poch(x,2) * poch(x+2,-2)
        let x = rat_frac(7, 3);
        assert_eq!(
            pochhammer(&x, 0),
            pochhammer(&x, 2) * pochhammer(&(x.clone() + rat(2)), -2)
        );
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial_int(5, 2), rat(10));
        assert_eq!(binomial_int(5, 6), rat(0));
        assert_eq!(binomial_int(5, -1), rat(0));
        assert_eq!(binomial_int(-3, 2), rat(6));
        assert_eq!(binomial_int(0, 0), rat(1));
    }
}
