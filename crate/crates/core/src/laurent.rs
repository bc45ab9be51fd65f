//! Finite Laurent polynomials `sum_k c_k r^k` with integer powers.

use std::collections::BTreeMap;

use rug::ops::Pow;
use rug::Float;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Laurent {
    terms: BTreeMap<i32, Float>,
}

impl Laurent {
    pub fn new() -> Self {
        Laurent::default()
    }

    pub fn from_terms<I: IntoIterator<Item = (i32, Float)>>(terms: I) -> Self {
        let mut p = Laurent::new();
        for (k, c) in terms {
            p.add_term(k, c);
        }
        p
    }

    /// Adds `c r^k`, accumulating into an existing power.
    pub fn add_term(&mut self, power: i32, c: Float) {
        match self.terms.get_mut(&power) {
            Some(existing) => *existing += c,
            None => {
                self.terms.insert(power, c);
            }
        }
    }

    /// Coefficient of `r^power`; `None` when the power was never set.
    pub fn coeff(&self, power: i32) -> Option<&Float> {
        self.terms.get(&power)
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (i32, &Float)> {
        self.terms.iter().map(|(k, c)| (*k, c))
    }

    pub fn powers(&self) -> impl Iterator<Item = i32> + '_ {
        self.terms.keys().copied()
    }

    /// Direct evaluation at `r` (Horner is not worth it for four terms).
    pub fn eval(&self, r: &Float) -> Float {
        let mut acc = Float::new(r.prec());
        for (&k, c) in &self.terms {
            let rk = Float::with_val(r.prec(), r.pow(k));
            acc += Float::with_val(r.prec(), c * &rk);
        }
        acc
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self, prec: u32) -> Float {
        self.terms
            .values()
            .map(|c| Float::with_val(prec, c.abs_ref()))
            .fold(Float::new(prec), |a, b| if b > a { b } else { a })
    }
}
