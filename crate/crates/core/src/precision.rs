//! Working precision and decimal formatting of high-precision reals.

use rug::ops::Pow;
use rug::{Float, Rational};

use crate::error::{Error, Result};

/// Smallest supported working precision, in decimal digits.
pub const MIN_DIGITS: u32 = 16;

/// Default working precision: enough to resolve `A_1000 ~ 1e-840` with
/// room to spare.
pub const DEFAULT_DIGITS: u32 = 890;

const GUARD_BITS: u32 = 32;

/// Decimal-digit working precision for all floating evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrecisionContext {
    digits: u32,
}

impl PrecisionContext {
    pub fn new(digits: u32) -> Result<Self> {
        if digits < MIN_DIGITS {
            return Err(Error::InvalidArgument(format!(
                "precision of {digits} digits is below the minimum of {MIN_DIGITS}"
            )));
        }
        Ok(PrecisionContext { digits })
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    /// Binary precision handed to MPFR, including guard bits.
    pub fn bits(&self) -> u32 {
        (f64::from(self.digits) * std::f64::consts::LOG2_10).ceil() as u32 + GUARD_BITS
    }

    pub fn float<T>(&self, val: T) -> Float
    where
        Float: rug::Assign<T>,
    {
        let mut f = Float::new(self.bits());
        rug::Assign::assign(&mut f, val);
        f
    }

    pub fn from_rational(&self, q: &Rational) -> Float {
        Float::with_val(self.bits(), q)
    }

    /// Parses a decimal string (with optional exponent) at this precision.
    pub fn parse(&self, s: &str) -> Result<Float> {
        let parsed = Float::parse(s.trim())
            .map_err(|e| Error::InvalidArgument(format!("cannot parse `{s}` as a real: {e}")))?;
        Ok(Float::with_val(self.bits(), parsed))
    }

    /// `10^-digits`, the nominal relative resolution of this context.
    pub fn epsilon(&self) -> Float {
        let ten = Float::with_val(self.bits(), 10);
        ten.pow(-i64::from(self.digits))
    }
}

impl Default for PrecisionContext {
    fn default() -> Self {
        PrecisionContext {
            digits: DEFAULT_DIGITS,
        }
    }
}

/// Formats `x` as a decimal string with `sig_digits` significant digits.
/// Trailing zeros are kept so that the digit count is explicit. Magnitudes
/// in `[1e-6, 1e40)` are written positionally, anything else as
/// `d.ddd...e<exp>`.
const POSITIONAL_MIN_EXP: i64 = -5;
const POSITIONAL_MAX_EXP: i64 = 40;

pub fn to_decimal(x: &Float, sig_digits: usize) -> String {
    if x.is_nan() {
        return "NaN".to_owned();
    }
    if x.is_infinite() {
        return if x.is_sign_negative() { "-inf" } else { "inf" }.to_owned();
    }
    if x.is_zero() {
        return "0".to_owned();
    }
    let (neg, mantissa, exp) = x.to_sign_string_exp(10, Some(sig_digits.max(1)));
    // value = 0.<mantissa> * 10^exp
    let exp = exp.expect("normal float has an exponent") as i64;
    let mut out = String::with_capacity(mantissa.len() + exp.unsigned_abs() as usize + 3);
    if neg {
        out.push('-');
    }
    if !(POSITIONAL_MIN_EXP..=POSITIONAL_MAX_EXP).contains(&exp) {
        let (lead, rest) = mantissa.split_at(1);
        out.push_str(lead);
        if !rest.is_empty() {
            out.push('.');
            out.push_str(rest);
        }
        out.push_str(&format!("e{}", exp - 1));
    } else if exp <= 0 {
        out.push_str("0.");
        out.extend(std::iter::repeat_n('0', (-exp) as usize));
        out.push_str(&mantissa);
    } else if exp as usize >= mantissa.len() {
        out.push_str(&mantissa);
        out.extend(std::iter::repeat_n('0', exp as usize - mantissa.len()));
    } else {
        let (int, frac) = mantissa.split_at(exp as usize);
        out.push_str(int);
        out.push('.');
        out.push_str(frac);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_low_precision() {
        assert!(PrecisionContext::new(15).is_err());
        assert!(PrecisionContext::new(16).is_ok());
        assert_eq!(PrecisionContext::default().digits(), 890);
    }

    #[test]
    fn decimal_formatting() {
        let ctx = PrecisionContext::new(30).unwrap();
        assert_eq!(to_decimal(&ctx.float(6.25), 4), "6.250");
        assert_eq!(to_decimal(&ctx.float(-0.0625), 3), "-0.0625");
        assert_eq!(to_decimal(&ctx.float(48000), 3), "48000");
        assert_eq!(to_decimal(&ctx.float(0), 3), "0");
        assert_eq!(to_decimal(&ctx.float(0.000001), 2), "0.0000010");
        assert_eq!(to_decimal(&ctx.parse("-4.45e-133").unwrap(), 3), "-4.45e-133");
        assert_eq!(to_decimal(&ctx.parse("1e50").unwrap(), 1), "1e50");
        assert_eq!(to_decimal(&ctx.parse("2.5e-7").unwrap(), 4), "2.500e-7");
        let third = ctx.from_rational(&Rational::from((1, 3)));
        assert_eq!(to_decimal(&third, 5), "0.33333");
    }

    #[test]
    fn parse_round_trips_through_decimal() {
        let ctx = PrecisionContext::new(50).unwrap();
        let x = ctx.parse("1.9804310285e0").unwrap();
        let back = ctx.parse(&to_decimal(&x, 50)).unwrap();
        assert_eq!(x, back);
    }
}
