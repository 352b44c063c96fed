//! Exact rational arithmetic helpers shared across the crate.
//!
//! All probabilities, value maps, index-set coordinates and thresholds are
//! `BigRational`. Floating point appears only in Monte Carlo estimates, where
//! it is paired with an explicit standard error.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::str::FromStr;

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Parses "num/den" (or a bare integer) into an exact rational.
pub fn parse_rat(s: &str) -> Result<Rat, String> {
    Rat::from_str(s.trim()).map_err(|e| format!("invalid rational {s:?}: {e}"))
}

/// Formats as "num/den", or just "num" when the denominator is 1.
pub fn format_rat(r: &Rat) -> String {
    r.to_string()
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn rat_pow(base: &Rat, exp: usize) -> Rat {
    let mut acc = Rat::one();
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

/// 2^k as an exact rational, k may be any nonnegative exponent.
pub fn pow2(k: u32) -> Rat {
    Rat::from_integer(BigInt::one() << k)
}

pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for j in 0..k {
        acc = acc * BigInt::from(n - j) / BigInt::from(j + 1);
    }
    acc
}

/// Smallest integer >= r.
pub fn ceil_rat(r: &Rat) -> BigInt {
    r.ceil().to_integer()
}

/// Rational enclosure [lo, hi] of Euler's number from the factorial series,
/// with `terms` summands. The truncation error is below 2/(terms+1)!, so the
/// width shrinks superexponentially.
pub fn e_enclosure(terms: u32) -> (Rat, Rat) {
    let mut sum = Rat::zero();
    let mut factorial = BigInt::one();
    for k in 0..=terms {
        if k > 0 {
            factorial *= BigInt::from(k);
        }
        sum += Rat::new(BigInt::one(), factorial.clone());
    }
    let tail = Rat::new(BigInt::from(2), factorial * BigInt::from(terms + 1));
    (sum.clone(), sum + tail)
}

/// Exact ceiling of `a + q*e` for rational a, q with q >= 0, certified by
/// tightening the enclosure of e until both endpoints agree.
pub fn ceil_affine_in_e(a: &Rat, q: &Rat) -> BigInt {
    assert!(!q.is_negative(), "coefficient of e must be nonnegative");
    let mut terms = 25;
    loop {
        let (lo, hi) = e_enclosure(terms);
        let lo_val = a + q * lo;
        let hi_val = a + q * hi;
        let (cl, ch) = (ceil_rat(&lo_val), ceil_rat(&hi_val));
        if cl == ch {
            return cl;
        }
        terms *= 2;
        assert!(terms <= 1_600, "e enclosure failed to separate a ceiling");
    }
}

/// serde adapter: a single rational as a "num/den" string.
pub mod serde_rat {
    use super::{format_rat, parse_rat, Rat};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
        format_rat(r).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let raw = String::deserialize(d)?;
        parse_rat(&raw).map_err(serde::de::Error::custom)
    }
}

/// serde adapter: a vector of rationals as "num/den" strings.
pub mod serde_rat_vec {
    use super::{format_rat, parse_rat, Rat};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rat], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(format_rat).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rat>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter()
            .map(|s| parse_rat(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// serde adapter: a matrix of rationals as "num/den" strings.
pub mod serde_rat_mat {
    use super::{format_rat, parse_rat, Rat};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Vec<Rat>], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|row| row.iter().map(format_rat).collect::<Vec<_>>())
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Rat>>, D::Error> {
        let raw = Vec::<Vec<String>>::deserialize(d)?;
        raw.iter()
            .map(|row| {
                row.iter()
                    .map(|s| parse_rat(s).map_err(serde::de::Error::custom))
                    .collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["19/16", "0", "2", "275/128", "-3/7"] {
            let r = parse_rat(s).unwrap();
            assert_eq!(format_rat(&r), s);
        }
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("abc").is_err());
    }

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial(4, 2), BigInt::from(6));
        assert_eq!(binomial(5, 0), BigInt::from(1));
        assert_eq!(binomial(3, 5), BigInt::from(0));
        assert_eq!(binomial(10, 3), BigInt::from(120));
    }

    #[test]
    fn e_enclosure_brackets_e() {
        let (lo, hi) = e_enclosure(25);
        assert!(lo < hi);
        let e = std::f64::consts::E;
        assert!(rat_to_f64(&lo) <= e && e <= rat_to_f64(&hi));
        assert!(rat_to_f64(&(hi - lo)) < 1e-20);
    }

    #[test]
    fn certified_ceilings() {
        // ceil(2 + 48e) = 133 and ceil(24e) = 66
        assert_eq!(
            ceil_affine_in_e(&rat_int(2), &rat_int(48)),
            BigInt::from(133)
        );
        assert_eq!(
            ceil_affine_in_e(&rat_int(0), &rat_int(24)),
            BigInt::from(66)
        );
    }
}
