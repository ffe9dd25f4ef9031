//! Scalar abstraction shared by the LP solver, envelopes and load formulas.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_traits::{FromPrimitive, Num, Signed};

use crate::{Error, Rational, Result};

/// An ordered field element.
///
/// Exactness is a property of the instance: [`Rational`] gives exact results,
/// while `f64` is accepted for quick exploratory evaluation only.
pub trait Scalar: Num + Signed + FromPrimitive + Clone + PartialOrd + Debug {
    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num).expect("numerator representable") / Self::from_i64(den).expect("denominator representable")
    }

    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable")
    }
}

impl<T> Scalar for T where T: Num + Signed + FromPrimitive + Clone + PartialOrd + Debug {}

/// Parses `"p/q"`, `"p"` or a terminating decimal such as `"0.25"` exactly.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::arg(format!("cannot parse {text:?} as an exact rational"));
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den == BigInt::from(0) {
            return Err(Error::arg(format!("zero denominator in {text:?}")));
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.starts_with('-');
        let int: BigInt = if int.is_empty() || int == "-" {
            BigInt::from(0)
        } else {
            int.parse().map_err(|_| bad())?
        };
        let frac_val: BigInt = frac.parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let mag = int.abs() * &scale + frac_val;
        let num = if negative { -mag } else { mag };
        return Ok(Rational::new(num, scale));
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

/// Formats as `"p/q"`, or `"p"` when the denominator is one.
pub fn format_rational(r: &Rational) -> String {
    if r.denom() == &BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Nearest `f64`; used for decimal display only.
pub fn to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}
