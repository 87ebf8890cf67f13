//! Exact surgery coefficients and negative continued fractions.
//!
//! A [`SurgeryCoefficient`] is a rational number or `∞`. Every transform in
//! this module is exact; nothing here touches floating point.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RationalError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("slope r = 1 is excluded: it would require r' = 0, which admits no tight extension")]
    ExcludedSlope,
    #[error("cannot parse coefficient {input:?}: {reason}")]
    Parse { input: String, reason: String },
}

/// A contact or smooth surgery coefficient: an exact rational or `∞`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SurgeryCoefficient {
    Finite(BigRational),
    Infinity,
}

impl SurgeryCoefficient {
    /// `p/q`, reduced. `q = 0` with `p ≠ 0` is `∞`.
    pub fn new(p: impl Into<BigInt>, q: impl Into<BigInt>) -> Result<Self, RationalError> {
        let p = p.into();
        let q = q.into();
        if q.is_zero() {
            if p.is_zero() {
                return Err(RationalError::Domain("0/0 is not a coefficient".into()));
            }
            return Ok(Self::Infinity);
        }
        Ok(Self::Finite(BigRational::new(p, q)))
    }

    pub fn integer(n: impl Into<BigInt>) -> Self {
        Self::Finite(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Self::integer(0)
    }

    pub fn one() -> Self {
        Self::integer(1)
    }

    pub fn minus_one() -> Self {
        Self::integer(-1)
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Self::Infinity)
    }

    pub fn finite(&self) -> Option<&BigRational> {
        match self {
            Self::Finite(q) => Some(q),
            Self::Infinity => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.finite().is_some_and(|q| q.is_zero())
    }

    pub fn is_negative(&self) -> bool {
        self.finite().is_some_and(|q| q.is_negative())
    }

    /// Strictly positive and finite.
    pub fn is_positive(&self) -> bool {
        self.finite().is_some_and(|q| q.is_positive())
    }

    pub fn is_integer_value(&self, n: i64) -> bool {
        self.finite()
            .is_some_and(|q| q.is_integer() && *q.numer() == BigInt::from(n))
    }

    /// Numerator in lowest terms; `1` for `∞`.
    pub fn numerator(&self) -> BigInt {
        match self {
            Self::Finite(q) => q.numer().clone(),
            Self::Infinity => BigInt::one(),
        }
    }

    /// Denominator in lowest terms, always `≥ 0`; `0` for `∞`.
    pub fn denominator(&self) -> BigInt {
        match self {
            Self::Finite(q) => q.denom().clone(),
            Self::Infinity => BigInt::zero(),
        }
    }

    /// `1/x`, with `1/0 = ∞` and `1/∞ = 0`.
    pub fn recip(&self) -> Self {
        match self {
            Self::Infinity => Self::zero(),
            Self::Finite(q) if q.is_zero() => Self::Infinity,
            Self::Finite(q) => Self::Finite(q.recip()),
        }
    }

    /// `n + x`, where `n + ∞ = ∞`.
    pub fn add_integer(&self, n: &BigInt) -> Self {
        match self {
            Self::Infinity => Self::Infinity,
            Self::Finite(q) => Self::Finite(q + BigRational::from_integer(n.clone())),
        }
    }
}

impl PartialOrd for SurgeryCoefficient {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Numeric order on the finite values with `∞` placed above every rational.
impl Ord for SurgeryCoefficient {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Self::Finite(a), Self::Finite(b)) => a.cmp(b),
            (Self::Finite(_), Self::Infinity) => Ordering::Less,
            (Self::Infinity, Self::Finite(_)) => Ordering::Greater,
            (Self::Infinity, Self::Infinity) => Ordering::Equal,
        }
    }
}

impl From<BigRational> for SurgeryCoefficient {
    fn from(q: BigRational) -> Self {
        Self::Finite(q)
    }
}

impl From<i64> for SurgeryCoefficient {
    fn from(n: i64) -> Self {
        Self::integer(n)
    }
}

impl fmt::Display for SurgeryCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Infinity => f.write_str("inf"),
            Self::Finite(q) if q.is_integer() => write!(f, "{}", q.numer()),
            Self::Finite(q) => write!(f, "{}/{}", q.numer(), q.denom()),
        }
    }
}

impl FromStr for SurgeryCoefficient {
    type Err = RationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let err = |reason: &str| RationalError::Parse {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        if t.eq_ignore_ascii_case("inf") || t == "∞" {
            return Ok(Self::Infinity);
        }
        let (p, q) = match t.split_once('/') {
            Some((p, q)) => (p.trim(), q.trim()),
            None => (t, "1"),
        };
        let p: BigInt = p.parse().map_err(|_| err("bad numerator"))?;
        let q: BigInt = q.parse().map_err(|_| err("bad denominator"))?;
        if q.is_zero() {
            return Err(err("zero denominator (write \"inf\" for ∞)"));
        }
        Self::new(p, q)
    }
}

impl Serialize for SurgeryCoefficient {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SurgeryCoefficient {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `a_1 − 1/(a_2 − 1/(… − 1/a_m))`.
///
/// Produced by [`neg_cf`]: `a_1 ≤ −1` and `a_i ≤ −2` for `i ≥ 2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NegContinuedFraction {
    pub coefficients: Vec<BigInt>,
}

impl NegContinuedFraction {
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Stabilization counts of the Legendrian chain realizing this expansion:
    /// `s_1 = |a_1 + 1|`, `s_i = |a_i + 2|` for `i ≥ 2`.
    pub fn stabilization_counts(&self) -> Vec<BigInt> {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let shift = if i == 0 { 1 } else { 2 };
                (a + BigInt::from(shift)).abs()
            })
            .collect()
    }
}

/// Negative continued fraction of a finite `r < 0`, by repeated floor division.
pub fn neg_cf(r: &SurgeryCoefficient) -> Result<NegContinuedFraction, RationalError> {
    let mut x = match r {
        SurgeryCoefficient::Finite(q) if q.is_negative() => q.clone(),
        _ => {
            return Err(RationalError::Domain(format!(
                "negative continued fraction needs a finite negative coefficient, got {r}"
            )))
        }
    };
    let mut coefficients = Vec::new();
    loop {
        let a = x.floor();
        // a - x lies in (-1, 0]
        let rem = &a - &x;
        coefficients.push(a.to_integer());
        if rem.is_zero() {
            break;
        }
        x = rem.recip();
    }
    Ok(NegContinuedFraction { coefficients })
}

/// Evaluates `a_1 − 1/(a_2 − … − 1/a_m)`. Total: a vanishing tail evaluates through `∞`.
pub fn eval_cf(cf: &NegContinuedFraction) -> SurgeryCoefficient {
    let mut iter = cf.coefficients.iter().rev();
    let Some(last) = iter.next() else {
        return SurgeryCoefficient::Infinity;
    };
    let mut value = SurgeryCoefficient::integer(last.clone());
    for a in iter {
        // a - 1/value
        value = match value.recip() {
            SurgeryCoefficient::Infinity => SurgeryCoefficient::Infinity,
            SurgeryCoefficient::Finite(inv) => {
                SurgeryCoefficient::Finite(BigRational::from_integer(a.clone()) - inv)
            }
        };
    }
    value
}

/// Smooth slope `r` on the trefoil from the contact coefficient `r'` of its pushoff:
/// `r = 1/(1 − r')`.
pub fn r_from_rprime(rp: &SurgeryCoefficient) -> SurgeryCoefficient {
    match rp {
        SurgeryCoefficient::Infinity => SurgeryCoefficient::zero(),
        SurgeryCoefficient::Finite(q) => SurgeryCoefficient::Finite(BigRational::one() - q).recip(),
    }
}

/// Inverse of [`r_from_rprime`]: `r' = (r − 1)/r`.
pub fn rprime_from_r(r: &SurgeryCoefficient) -> Result<SurgeryCoefficient, RationalError> {
    match r {
        SurgeryCoefficient::Infinity => Ok(SurgeryCoefficient::one()),
        SurgeryCoefficient::Finite(q) if q.is_one() => Err(RationalError::ExcludedSlope),
        SurgeryCoefficient::Finite(q) if q.is_zero() => Ok(SurgeryCoefficient::Infinity),
        SurgeryCoefficient::Finite(q) => {
            Ok(SurgeryCoefficient::Finite((q - BigRational::one()) / q))
        }
    }
}

/// `r'' = r'/(1 − k r')` for finite `r' > 0` and `k ≥ 1`; `∞` exactly when `r' = 1/k`.
pub fn prop7_transform(
    rp: &SurgeryCoefficient,
    k: u64,
) -> Result<SurgeryCoefficient, RationalError> {
    let q = positive_finite(rp)?;
    if k == 0 {
        return Err(RationalError::Domain("k must be a positive integer".into()));
    }
    let den = BigRational::one() - BigRational::from_integer(BigInt::from(k)) * q;
    if den.is_zero() {
        return Ok(SurgeryCoefficient::Infinity);
    }
    Ok(SurgeryCoefficient::Finite(q / den))
}

/// Inverse of [`prop7_transform`] for a fixed `k`: `r' = r''/(1 + k r'')`, with `∞ ↦ 1/k`.
pub fn prop7_inverse(rpp: &SurgeryCoefficient, k: u64) -> SurgeryCoefficient {
    let k = BigRational::from_integer(BigInt::from(k));
    match rpp {
        SurgeryCoefficient::Infinity => SurgeryCoefficient::Finite(k.recip()),
        SurgeryCoefficient::Finite(q) => {
            let den = BigRational::one() + &k * q;
            if den.is_zero() {
                SurgeryCoefficient::Infinity
            } else {
                SurgeryCoefficient::Finite(q / den)
            }
        }
    }
}

/// Smallest `k ≥ 1` with `r'/(1 − k r') < 0`, i.e. `⌊q/p⌋ + 1` for `r' = p/q`.
pub fn min_k_negative(rp: &SurgeryCoefficient) -> Result<u64, RationalError> {
    let q = positive_finite(rp)?;
    let k = q.denom().div_floor(q.numer()) + BigInt::one();
    k.to_u64()
        .ok_or_else(|| RationalError::Domain(format!("k = {k} does not fit a machine word")))
}

/// `Some(j)` when `r' = 1/j` for a positive integer `j`.
pub fn unit_fraction(rp: &SurgeryCoefficient) -> Option<u64> {
    let q = rp.finite()?;
    if q.numer().is_one() && q.denom().is_positive() {
        q.denom().to_u64()
    } else {
        None
    }
}

fn positive_finite(rp: &SurgeryCoefficient) -> Result<&BigRational, RationalError> {
    match rp {
        SurgeryCoefficient::Finite(q) if q.is_positive() => Ok(q),
        _ => Err(RationalError::Domain(format!(
            "expected a finite positive coefficient, got {rp}"
        ))),
    }
}
