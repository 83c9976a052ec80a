//! Exact arithmetic: binary fixed-point numbers over big integers, rational
//! helpers and the factorial-derived decision thresholds.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NumericError {
    #[error("fractional bit mismatch: {0} vs {1}")]
    MixedPrecision(u32, u32),
    #[error("division by zero")]
    DivisionByZero,
    #[error("square root of a negative value")]
    NegativeSqrt,
    #[error("vertex count {0} is below 3")]
    TooFewVertices(usize),
    #[error("cannot parse `{0}` as a rational number")]
    BadRational(String),
}

/// Signed binary fixed-point value `mantissa / 2^frac_bits`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FixedPoint {
    mantissa: BigInt,
    frac_bits: u32,
}

impl FixedPoint {
    pub fn from_mantissa(mantissa: BigInt, frac_bits: u32) -> Self {
        FixedPoint { mantissa, frac_bits }
    }

    pub fn zero(frac_bits: u32) -> Self {
        Self::from_mantissa(BigInt::zero(), frac_bits)
    }

    pub fn from_integer(v: i64, frac_bits: u32) -> Self {
        Self::from_mantissa(BigInt::from(v) << frac_bits, frac_bits)
    }

    /// Nearest representable value (ties to even mantissa).
    pub fn from_rational(r: &BigRational, frac_bits: u32) -> Self {
        let num = r.numer().clone() << frac_bits;
        Self::from_mantissa(round_div_even(&num, r.denom()), frac_bits)
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    /// The exact dyadic rational this value denotes.
    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.mantissa.clone(), BigInt::one() << self.frac_bits)
    }

    fn same_p(&self, other: &Self) -> Result<u32, NumericError> {
        if self.frac_bits != other.frac_bits {
            return Err(NumericError::MixedPrecision(self.frac_bits, other.frac_bits));
        }
        Ok(self.frac_bits)
    }

    pub fn add(&self, other: &Self) -> Result<Self, NumericError> {
        let p = self.same_p(other)?;
        Ok(Self::from_mantissa(&self.mantissa + &other.mantissa, p))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, NumericError> {
        let p = self.same_p(other)?;
        Ok(Self::from_mantissa(&self.mantissa - &other.mantissa, p))
    }

    pub fn mul(&self, other: &Self) -> Result<Self, NumericError> {
        let p = self.same_p(other)?;
        let prod = &self.mantissa * &other.mantissa;
        Ok(Self::from_mantissa(round_div_even(&prod, &(BigInt::one() << p)), p))
    }

    pub fn div(&self, other: &Self) -> Result<Self, NumericError> {
        let p = self.same_p(other)?;
        if other.mantissa.is_zero() {
            return Err(NumericError::DivisionByZero);
        }
        let num = self.mantissa.clone() << p;
        Ok(Self::from_mantissa(round_div_even(&num, &other.mantissa), p))
    }

    /// Floor square root at the same precision: `r <= sqrt(a) < r + 2^-p`.
    pub fn isqrt(&self) -> Result<Self, NumericError> {
        if self.mantissa.is_negative() {
            return Err(NumericError::NegativeSqrt);
        }
        let scaled = self.mantissa.clone() << self.frac_bits;
        Ok(Self::from_mantissa(scaled.sqrt(), self.frac_bits))
    }

    /// Exact decimal expansion (always finite for dyadic values) with the
    /// precision annotated, e.g. `3.375 (p=4)`.
    pub fn to_decimal_string(&self) -> String {
        format!(
            "{} (p={})",
            dyadic_decimal(&self.mantissa, self.frac_bits),
            self.frac_bits
        )
    }
}

impl PartialOrd for FixedPoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        (self.frac_bits == other.frac_bits).then(|| self.mantissa.cmp(&other.mantissa))
    }
}

impl fmt::Display for FixedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal_string())
    }
}

fn dyadic_decimal(mantissa: &BigInt, p: u32) -> String {
    // m / 2^p = m * 5^p / 10^p
    let scaled = mantissa.abs() * BigInt::from(5u32).pow(p);
    let digits = scaled.to_string();
    let p = p as usize;
    let (int_part, frac_part) = if digits.len() > p {
        let (a, b) = digits.split_at(digits.len() - p);
        (a.to_string(), b.to_string())
    } else {
        ("0".to_string(), format!("{digits:0>p$}"))
    };
    let frac_part = frac_part.trim_end_matches('0');
    let sign = if mantissa.is_negative() { "-" } else { "" };
    if frac_part.is_empty() {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac_part}")
    }
}

/// `num / den` rounded to the nearest integer, ties to even. `den != 0`.
pub fn round_div_even(num: &BigInt, den: &BigInt) -> BigInt {
    let (num, den) = if den.is_negative() {
        (-num, -den)
    } else {
        (num.clone(), den.clone())
    };
    let (q, r) = num.div_mod_floor(&den);
    let twice: BigInt = r << 1u32;
    match twice.cmp(&den) {
        Ordering::Less => q,
        Ordering::Greater => q + 1,
        Ordering::Equal => {
            if q.is_odd() {
                q + 1
            } else {
                q
            }
        }
    }
}

/// Parses `"a/b"`, `"-1.25"` or `"7"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational, NumericError> {
    let bad = || NumericError::BadRational(s.to_string());
    let t = s.trim();
    if let Some((a, b)) = t.split_once('/') {
        let num: BigInt = a.trim().parse().map_err(|_| bad())?;
        let den: BigInt = b.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(num, den));
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty()
        || !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = digits.parse().map_err(|_| bad())?;
    let den = BigInt::from(10u32).pow(frac_part.len() as u32);
    let r = BigRational::new(num, den);
    Ok(if neg { -r } else { r })
}

/// `num/den` (or just `num` for integers).
pub fn rational_string(r: &BigRational) -> String {
    r.to_string()
}

pub fn factorial(n: usize) -> BigUint {
    (1..=n as u64).map(BigUint::from).product()
}

/// Decision thresholds derived from `n!`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Thresholds {
    /// Accuracy target `1/(3 n!)`.
    pub epsilon: BigRational,
    /// Per-multiplier precision `1/(3 n n!)`.
    pub delta: BigRational,
    /// Decision cutoff `2/(3 n!)`.
    pub tau: BigRational,
}

pub fn factorial_thresholds(n: usize) -> Result<Thresholds, NumericError> {
    if n < 3 {
        return Err(NumericError::TooFewVertices(n));
    }
    let f = BigInt::from(factorial(n));
    let three_f: BigInt = &f * 3;
    Ok(Thresholds {
        epsilon: BigRational::new(BigInt::one(), three_f.clone()),
        delta: BigRational::new(BigInt::one(), &three_f * BigInt::from(n)),
        tau: BigRational::new(BigInt::from(2), three_f),
    })
}
