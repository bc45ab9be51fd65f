use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};

/// Mantissa width, in bits, of every multiple-precision real in a computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Precision(u32);

impl Default for Precision {
    fn default() -> Self {
        Precision(Self::DEFAULT_BITS)
    }
}

impl Precision {
    pub const DEFAULT_BITS: u32 = 256;
    pub const MIN_BITS: u32 = 64;
    pub const MAX_BITS: u32 = 65536;

    pub fn new(bits: u32) -> Result<Self> {
        if (Self::MIN_BITS..=Self::MAX_BITS).contains(&bits) {
            Ok(Precision(bits))
        } else {
            Err(Error::InvalidPrecision(bits))
        }
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    /// Decimal digits fully represented by the mantissa (77 at 256 bits).
    pub fn digits(self) -> u32 {
        (f64::from(self.0) * std::f64::consts::LOG10_2).floor() as u32
    }

    pub fn float(self, x: f64) -> Float {
        Float::with_val(self.0, x)
    }

    pub fn int(self, x: i64) -> Float {
        Float::with_val(self.0, x)
    }

    pub fn zero(self) -> Float {
        Float::new(self.0)
    }

    /// Parses a decimal literal ("0.3", "-1.17e0") with round-to-nearest at
    /// this precision, so literals are exact to the working precision rather
    /// than to f64.
    pub fn parse(self, s: &str) -> Result<Float> {
        let t = s.trim();
        let parsed = Float::parse(t).map_err(|_| Error::ParseReal(s.to_string()))?;
        let x = Float::with_val(self.0, parsed);
        if x.is_finite() {
            Ok(x)
        } else {
            Err(Error::ParseReal(s.to_string()))
        }
    }

    /// `10^-exp` at this precision.
    pub fn pow10_neg(self, exp: u32) -> Float {
        let ten = self.int(10);
        Float::with_val(self.0, ten.pow(-(exp as i32)))
    }

    /// Relative stopping tolerance for energy roots: 10^-(digits - 8).
    pub fn root_tolerance(self) -> Float {
        self.pow10_neg(self.digits().saturating_sub(8).max(1))
    }

    /// Threshold below which a quantity is treated as an exact zero:
    /// 10^-(digits - 10).
    pub fn zero_threshold(self) -> Float {
        self.pow10_neg(self.digits().saturating_sub(10).max(1))
    }

    /// Relative tolerance for recognising the closed-form parameter locus;
    /// 1e-30 at 256 bits and scaling with the digit count.
    pub fn locus_tolerance(self) -> Float {
        self.pow10_neg((self.digits() * 2 / 5).max(1))
    }

    /// Round-to-nearest positional decimal with `digits` significant figures.
    pub fn format(x: &Float, digits: usize) -> String {
        render(x, Some(digits.max(1)))
    }

    /// Positional decimal with just enough digits to read back exactly.
    pub fn format_exact(x: &Float) -> String {
        render(x, None)
    }
}

/// Magnitudes outside `10^-24 .. 10^48` switch to `d.ddde<exp>` notation.
fn render(x: &Float, digits: Option<usize>) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let (neg, mantissa, exp) = x.to_sign_string_exp(10, digits);
    let exp = exp.expect("finite non-zero values carry an exponent");
    let sign = if neg { "-" } else { "" };
    let len = mantissa.len() as i32;
    let body = if !(-24..=48).contains(&exp) {
        format!("{}.{}e{}", &mantissa[..1], &mantissa[1..], exp - 1)
    } else if exp <= 0 {
        format!("0.{}{}", "0".repeat((-exp) as usize), mantissa)
    } else if exp >= len {
        format!("{}{}", mantissa, "0".repeat((exp - len) as usize))
    } else {
        format!(
            "{}.{}",
            &mantissa[..exp as usize],
            &mantissa[exp as usize..]
        )
    };
    format!("{sign}{body}")
}
