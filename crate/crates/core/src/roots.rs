//! Sign-change bracketing and bracketed refinement on multiple-precision reals.

use rug::Float;

use crate::error::Result;

/// An interval on which a continuous function changes sign (or is zero at an end).
#[derive(Debug, Clone, PartialEq)]
pub struct Bracket {
    pub lo: Float,
    pub hi: Float,
    pub f_lo: Float,
    pub f_hi: Float,
}

impl Bracket {
    pub fn straddles(&self) -> bool {
        self.f_lo.is_zero()
            || self.f_hi.is_zero()
            || self.f_lo.is_sign_negative() != self.f_hi.is_sign_negative()
    }

    pub fn midpoint(&self) -> Float {
        let p = self.lo.prec();
        Float::with_val(p, &self.lo + &self.hi) / 2u32
    }
}

/// Evaluates `f` at `steps + 1` evenly spaced points of `[lo, hi]` and
/// returns every sub-interval across which it changes sign, in increasing order.
pub fn scan_sign_changes<F>(mut f: F, lo: &Float, hi: &Float, steps: usize) -> Result<Vec<Bracket>>
where
    F: FnMut(&Float) -> Result<Float>,
{
    let p = lo.prec();
    let width = Float::with_val(p, hi - lo);
    let mut prev_x = lo.clone();
    let first = f(&prev_x)?;
    let mut prev_f = first.clone();
    let mut out = Vec::new();
    for i in 1..=steps {
        let x = if i == steps {
            hi.clone()
        } else {
            Float::with_val(p, &width * i as u32) / steps as u32 + lo
        };
        let fx = f(&x)?;
        let b = Bracket {
            lo: prev_x,
            hi: x.clone(),
            f_lo: prev_f,
            f_hi: fx.clone(),
        };
        // a zero exactly on a grid point is reported once, by the interval it closes
        if b.straddles() && !b.f_lo.is_zero() {
            out.push(b);
        }
        prev_x = x;
        prev_f = fx;
    }
    if first.is_zero() {
        out.insert(
            0,
            Bracket {
                lo: lo.clone(),
                hi: lo.clone(),
                f_lo: first.clone(),
                f_hi: first,
            },
        );
    }
    Ok(out)
}

/// Shrinks a sign-change bracket until its width is at most
/// `rel_tol * max(|lo|, |hi|)` (Brent's method: inverse quadratic
/// interpolation and secant steps, falling back to bisection whenever they
/// do not contract the bracket fast enough). The result always lies inside
/// the original bracket.
pub fn refine<F>(mut f: F, bracket: Bracket, rel_tol: &Float) -> Result<Float>
where
    F: FnMut(&Float) -> Result<Float>,
{
    let Bracket { lo, hi, f_lo, f_hi } = bracket;
    if f_lo.is_zero() {
        return Ok(lo);
    }
    if f_hi.is_zero() {
        return Ok(hi);
    }
    debug_assert!(f_lo.is_sign_negative() != f_hi.is_sign_negative());
    let p = lo.prec();
    let new = |x: &Float| Float::with_val(p, x);

    // b is the best estimate, a the previous b, c the counterpoint (f(b), f(c) differ in sign)
    let (mut b, mut fb) = (hi, f_hi);
    let (mut c, mut fc) = (lo, f_lo);
    let mut a = new(&c);
    let mut fa = new(&fc);
    let mut d = Float::with_val(p, &b - &c);
    let mut e = new(&d);

    for _ in 0..10_000u32 {
        if fb.is_sign_negative() == fc.is_sign_negative() {
            c = new(&a);
            fc = new(&fa);
            d = Float::with_val(p, &b - &a);
            e = new(&d);
        }
        if Float::with_val(p, fc.abs_ref()) < Float::with_val(p, fb.abs_ref()) {
            a = b;
            b = c;
            c = new(&a);
            fa = fb;
            fb = fc;
            fc = new(&fa);
        }
        let scale = Float::with_val(p, b.abs_ref()).max(&Float::with_val(p, c.abs_ref()));
        let tol = Float::with_val(p, rel_tol * &scale) / 2u32;
        let m = Float::with_val(p, &c - &b) / 2u32;
        if Float::with_val(p, m.abs_ref()) <= tol || fb.is_zero() {
            return Ok(b);
        }

        let mut bisect = true;
        if Float::with_val(p, e.abs_ref()) >= tol
            && Float::with_val(p, fa.abs_ref()) > Float::with_val(p, fb.abs_ref())
        {
            let s = Float::with_val(p, &fb / &fa);
            let (mut pn, mut q);
            if a == c {
                // secant
                pn = Float::with_val(p, &m * 2u32) * &s;
                q = Float::with_val(p, 1u32 - &s);
            } else {
                // inverse quadratic interpolation
                let qa = Float::with_val(p, &fa / &fc);
                let r = Float::with_val(p, &fb / &fc);
                let t1 = Float::with_val(p, &m * 2u32) * &qa * Float::with_val(p, &qa - &r);
                let t2 = Float::with_val(p, &b - &a) * Float::with_val(p, &r - 1u32);
                pn = Float::with_val(p, t1 - t2) * &s;
                q = Float::with_val(p, &qa - 1u32)
                    * Float::with_val(p, &r - 1u32)
                    * Float::with_val(p, &s - 1u32);
            }
            if pn.is_sign_positive() {
                q = -q;
            } else {
                pn = -pn;
            }
            let lim1 = Float::with_val(p, &m * 3u32) * &q - Float::with_val(p, &tol * &q).abs();
            let lim2 = Float::with_val(p, &e * &q).abs();
            if Float::with_val(p, &pn * 2u32) < lim1 && Float::with_val(p, &pn * 2u32) < lim2 {
                e = d;
                d = Float::with_val(p, &pn / &q);
                bisect = false;
            }
        }
        if bisect {
            d = new(&m);
            e = new(&m);
        }
        a = new(&b);
        fa = new(&fb);
        if Float::with_val(p, d.abs_ref()) > tol {
            b += &d;
        } else if m.is_sign_positive() {
            b += &tol;
        } else {
            b -= &tol;
        }
        fb = f(&b)?;
    }
    Ok(b)
}
