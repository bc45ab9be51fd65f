//! Truncated Taylor series ("jets") about a fixed positive center.
//!
//! A jet of order `m` stores `c_k = f^(k)(r0) / k!` for `k = 0..=m`. Every
//! operation tracks the order it can vouch for: sums and products truncate
//! to the smaller input order and differentiation drops one order, so a
//! coefficient is never read past the point where it is still exact.

use std::fmt;

use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};
use crate::laurent::Laurent;

#[derive(Clone, PartialEq)]
pub struct Jet {
    center: Float,
    coeffs: Vec<Float>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("center", &self.center.to_f64())
            .field(
                "coeffs",
                &self.coeffs.iter().map(Float::to_f64).collect::<Vec<_>>(),
            )
            .finish()
    }
}

impl Jet {
    /// Builds a jet from explicit Taylor coefficients.
    pub fn from_coeffs(center: Float, coeffs: Vec<Float>) -> Result<Self> {
        if !(center.is_finite() && center.is_sign_positive() && !center.is_zero()) {
            return Err(Error::NonPositiveCenter);
        }
        assert!(
            !coeffs.is_empty(),
            "a jet needs at least its value coefficient"
        );
        Ok(Jet { center, coeffs })
    }

    pub fn constant(value: Float, center: Float, order: usize) -> Result<Self> {
        let prec = center.prec();
        let mut coeffs = vec![Float::new(prec); order + 1];
        coeffs[0] = Float::with_val(prec, value);
        Jet::from_coeffs(center, coeffs)
    }

    /// Taylor expansion of `sum_k c_k r^k` about `center`, truncated at `order`.
    ///
    /// Each power uses the generalized binomial series
    /// `r^k = sum_j C(k, j) r0^(k-j) (r - r0)^j`, which terminates for
    /// `k >= 0` and gives the alternating geometric-type series for `k < 0`.
    pub fn from_laurent(poly: &Laurent, center: &Float, order: usize) -> Result<Self> {
        if !(center.is_finite() && center.is_sign_positive() && !center.is_zero()) {
            return Err(Error::NonPositiveCenter);
        }
        let prec = center.prec();
        let mut coeffs = vec![Float::new(prec); order + 1];
        let inv_center = Float::with_val(prec, center.recip_ref());
        for (k, c) in poly.terms() {
            if c.is_zero() {
                continue;
            }
            // term_j = c * C(k, j) * r0^(k - j)
            let mut term = Float::with_val(prec, center.pow(k));
            term *= c;
            for (j, slot) in coeffs.iter_mut().enumerate() {
                if term.is_zero() {
                    break;
                }
                *slot += &term;
                let numer = i64::from(k) - j as i64;
                term *= numer;
                term /= (j + 1) as u32;
                term *= &inv_center;
            }
        }
        Jet::from_coeffs(center.clone(), coeffs)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn center(&self) -> &Float {
        &self.center
    }

    pub fn coeffs(&self) -> &[Float] {
        &self.coeffs
    }

    /// The function value at the center.
    pub fn value(&self) -> &Float {
        &self.coeffs[0]
    }

    pub fn prec(&self) -> u32 {
        self.center.prec()
    }

    fn check_center(&self, other: &Jet) -> Result<()> {
        if self.center == other.center {
            Ok(())
        } else {
            Err(Error::CenterMismatch)
        }
    }

    /// Same jet with only the first `order + 1` coefficients kept.
    pub fn truncate(&self, order: usize) -> Jet {
        let keep = (order + 1).min(self.coeffs.len());
        Jet {
            center: self.center.clone(),
            coeffs: self.coeffs[..keep].to_vec(),
        }
    }

    pub fn add(&self, other: &Jet) -> Result<Jet> {
        self.check_center(other)?;
        let order = self.order().min(other.order());
        let prec = self.prec();
        let coeffs = self.coeffs[..=order]
            .iter()
            .zip(&other.coeffs[..=order])
            .map(|(a, b)| Float::with_val(prec, a + b))
            .collect();
        Ok(Jet {
            center: self.center.clone(),
            coeffs,
        })
    }

    pub fn sub(&self, other: &Jet) -> Result<Jet> {
        self.check_center(other)?;
        let order = self.order().min(other.order());
        let prec = self.prec();
        let coeffs = self.coeffs[..=order]
            .iter()
            .zip(&other.coeffs[..=order])
            .map(|(a, b)| Float::with_val(prec, a - b))
            .collect();
        Ok(Jet {
            center: self.center.clone(),
            coeffs,
        })
    }

    pub fn scale(&self, factor: &Float) -> Jet {
        let prec = self.prec();
        Jet {
            center: self.center.clone(),
            coeffs: self
                .coeffs
                .iter()
                .map(|c| Float::with_val(prec, c * factor))
                .collect(),
        }
    }

    /// Cauchy product truncated at `min(self.order, other.order)`.
    pub fn mul(&self, other: &Jet) -> Result<Jet> {
        self.check_center(other)?;
        let order = self.order().min(other.order());
        Ok(self.mul_to_order(other, order))
    }

    /// Cauchy product truncated at `order`, which must not exceed either
    /// operand's order.
    pub(crate) fn mul_to_order(&self, other: &Jet, order: usize) -> Jet {
        debug_assert!(order <= self.order() && order <= other.order());
        let prec = self.prec();
        let mut coeffs = Vec::with_capacity(order + 1);
        for k in 0..=order {
            let mut acc = Float::new(prec);
            for i in 0..=k {
                acc += &self.coeffs[i] * &other.coeffs[k - i];
            }
            coeffs.push(acc);
        }
        Jet {
            center: self.center.clone(),
            coeffs,
        }
    }

    /// Product with a Laurent polynomial in `r`, exact to this jet's order.
    ///
    /// Powers of `r = r0 + x` act by shifting (`r * f`) or by the division
    /// recurrence `u_j = (f_j - u_(j-1)) / r0` (`f / r`), so each term costs
    /// O(order) rather than a full Cauchy product.
    pub fn mul_laurent(&self, poly: &Laurent) -> Jet {
        let prec = self.prec();
        let m = self.coeffs.len();
        let mut out = vec![Float::new(prec); m];
        let mut add_scaled = |t: &[Float], c: &Float| {
            for (o, v) in out.iter_mut().zip(t) {
                *o += c * v;
            }
        };

        let mut up = self.coeffs.clone();
        let mut up_power = 0;
        let mut down = self.coeffs.clone();
        let mut down_power = 0;
        // non-negative powers ascending, then negative powers descending
        let ordered = poly
            .terms()
            .filter(|(k, _)| *k >= 0)
            .chain(poly.terms().filter(|(k, _)| *k < 0).rev());
        for (k, c) in ordered {
            if c.is_zero() {
                continue;
            }
            if k >= 0 {
                while up_power < k {
                    // (r0 + x) f
                    for j in (0..m).rev() {
                        up[j] *= &self.center;
                        if j > 0 {
                            let (lo, hi) = up.split_at_mut(j);
                            hi[0] += &lo[j - 1];
                        }
                    }
                    up_power += 1;
                }
                add_scaled(&up, c);
            } else {
                while down_power > k {
                    // f / (r0 + x)
                    for j in 0..m {
                        if j > 0 {
                            let (lo, hi) = down.split_at_mut(j);
                            hi[0] -= &lo[j - 1];
                        }
                        down[j] /= &self.center;
                    }
                    down_power -= 1;
                }
                add_scaled(&down, c);
            }
        }
        Jet {
            center: self.center.clone(),
            coeffs: out,
        }
    }

    /// d/dr, one order lower: `c'_k = (k + 1) c_(k+1)`.
    pub fn derivative(&self) -> Result<Jet> {
        if self.order() == 0 {
            return Err(Error::OrderUnderflow);
        }
        let prec = self.prec();
        let coeffs = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(k, c)| Float::with_val(prec, c * (k as u32 + 1)))
            .collect();
        Ok(Jet {
            center: self.center.clone(),
            coeffs,
        })
    }

    /// Value of the truncated series at `r`.
    pub fn eval(&self, r: &Float) -> Float {
        let prec = self.prec();
        let x = Float::with_val(prec, r - &self.center);
        let mut acc = Float::new(prec);
        for c in self.coeffs.iter().rev() {
            acc *= &x;
            acc += c;
        }
        acc
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> Float {
        let prec = self.prec();
        self.coeffs
            .iter()
            .map(|c| Float::with_val(prec, c.abs_ref()))
            .fold(Float::new(prec), |a, b| if b > a { b } else { a })
    }
}
