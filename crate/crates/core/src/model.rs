//! The perturbed Coulomb model `V(r) = -Z/r + g r + lambda r^2` and its
//! closed-form companions: scaling maps, the factor function that turns the
//! radial equation into `y'' = Q y' + R y`, low-order perturbation theory
//! about the harmonic oscillator, and the quasi-exactly solvable family.

use rug::Float;

use crate::error::{Error, Result};
use crate::laurent::Laurent;
use crate::precision::Precision;

/// `(Z, g, lambda)`, all held at one working precision.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialParams {
    pub z: Float,
    pub g: Float,
    pub lambda: Float,
}

impl PotentialParams {
    pub fn new(z: Float, g: Float, lambda: Float) -> Self {
        PotentialParams { z, g, lambda }
    }

    pub fn from_f64(z: f64, g: f64, lambda: f64, prec: Precision) -> Self {
        PotentialParams::new(prec.float(z), prec.float(g), prec.float(lambda))
    }

    /// Parses decimal literals at `prec`.
    pub fn parse(z: &str, g: &str, lambda: &str, prec: Precision) -> Result<Self> {
        Ok(PotentialParams::new(
            prec.parse(z)?,
            prec.parse(g)?,
            prec.parse(lambda)?,
        ))
    }

    pub fn prec(&self) -> u32 {
        self.lambda.prec()
    }

    /// Accepts the triple when every field is finite and `lambda > 0`
    /// (only then is the whole spectrum discrete).
    pub fn validate(self) -> Result<Self> {
        for (name, v) in [("Z", &self.z), ("g", &self.g), ("lambda", &self.lambda)] {
            if !v.is_finite() {
                return Err(Error::NonFinite(name));
            }
        }
        if self.lambda <= 0 {
            return Err(Error::NonPositiveLambda(self.lambda.to_f64().to_string()));
        }
        Ok(self)
    }

    fn require_positive_lambda(&self) -> Result<()> {
        self.clone().validate().map(|_| ())
    }

    /// `V(r)` at working precision.
    pub fn potential(&self, r: &Float) -> Float {
        let p = self.prec();
        let mut v = Float::with_val(p, &self.lambda * r);
        v += &self.g;
        v *= r;
        v -= Float::with_val(p, &self.z / r);
        v
    }

    /// Maps onto the `lambda = 1` slice: returns `(Z lambda^-1/4, g lambda^-3/4, 1)`
    /// together with the factor `lambda^1/2` such that
    /// `E(original) = factor * E(scaled)`.
    pub fn scale_to_unit_lambda(&self) -> Result<(PotentialParams, Float)> {
        self.require_positive_lambda()?;
        let p = self.prec();
        let quarter = Float::with_val(p, self.lambda.sqrt_ref()).sqrt();
        let factor = Float::with_val(p, self.lambda.sqrt_ref());
        let z = Float::with_val(p, &self.z / &quarter);
        let g = Float::with_val(p, &self.g / Float::with_val(p, &quarter * &factor));
        Ok((PotentialParams::new(z, g, Float::with_val(p, 1)), factor))
    }

    /// `(Z, g, lambda) -> (-Z, -g, lambda)`.
    pub fn reflect_z_g(&self) -> PotentialParams {
        PotentialParams::new(
            Float::with_val(self.prec(), -&self.z),
            Float::with_val(self.prec(), -&self.g),
            self.lambda.clone(),
        )
    }

    /// Factor parameters that cancel the `r^2` and `r` terms of `R(r)`:
    /// `alpha = sqrt(lambda / 2)`, `beta = g / (2 alpha)`.
    pub fn asymptotic_factor_params(&self) -> Result<FactorParams> {
        self.require_positive_lambda()?;
        let p = self.prec();
        let alpha = Float::with_val(p, &self.lambda / 2u32).sqrt();
        FactorParams::with_asymptotic_beta(alpha, self)
    }
}

/// Radial quantum number `n` (interior nodes) and angular momentum `l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct QuantumNumbers {
    pub n: u32,
    pub l: u32,
}

impl QuantumNumbers {
    pub fn new(n: u32, l: u32) -> Self {
        QuantumNumbers { n, l }
    }

    pub fn ground(l: u32) -> Self {
        QuantumNumbers { n: 0, l }
    }

    /// Principal quantum number `n + l + 1`.
    pub fn nu(self) -> u32 {
        self.n + self.l + 1
    }
}

/// `(alpha, beta)` of the factor function `phi(r) = r^(l+1) exp(-beta r - alpha r^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorParams {
    pub alpha: Float,
    pub beta: Float,
}

impl FactorParams {
    pub fn new(alpha: Float, beta: Float) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::NonFinite("alpha"));
        }
        if !beta.is_finite() {
            return Err(Error::NonFinite("beta"));
        }
        if alpha <= 0 {
            return Err(Error::NonPositiveAlpha(alpha.to_f64().to_string()));
        }
        Ok(FactorParams { alpha, beta })
    }

    /// `beta = g / (2 alpha)`: cancels the linear term of `R(r)` for any alpha.
    pub fn with_asymptotic_beta(alpha: Float, params: &PotentialParams) -> Result<Self> {
        if alpha.is_finite() && alpha <= 0 {
            return Err(Error::NonPositiveAlpha(alpha.to_f64().to_string()));
        }
        let p = alpha.prec();
        let beta = Float::with_val(p, &params.g / Float::with_val(p, &alpha * 2u32));
        FactorParams::new(alpha, beta)
    }

    /// Positive root of `phi'(r) = 0`, i.e. of `4 alpha r^2 + 2 beta r - 2 (l + 1)`:
    /// `r0 = (sqrt(8 alpha (l+1) + beta^2) - beta) / (4 alpha)`.
    ///
    /// For `beta > 0` the textbook form loses digits to cancellation, so the
    /// algebraically equal `4 (l+1) / (2 (sqrt(...) + beta))` is used instead.
    pub fn evaluation_point(&self, l: u32) -> Float {
        let p = self.alpha.prec();
        let lp1 = l + 1;
        let mut disc = Float::with_val(p, &self.alpha * (8 * lp1));
        disc += Float::with_val(p, self.beta.square_ref());
        let root = disc.sqrt();
        if self.beta.is_sign_negative() {
            let num = Float::with_val(p, &root - &self.beta);
            num / Float::with_val(p, &self.alpha * 4u32)
        } else {
            let den = Float::with_val(p, &root + &self.beta) * 2u32;
            Float::with_val(p, 4 * lp1) / den
        }
    }
}

/// `y'' = Q(r) y' + R(r) y` with `Q` and `R` held as Laurent polynomials and
/// `R = r_const - 2 E`.
#[derive(Debug, Clone, PartialEq)]
pub struct SturmLiouvilleForm {
    pub q: Laurent,
    pub r_const: Laurent,
    pub r_energy_coeff: Float,
}

impl SturmLiouvilleForm {
    /// `Q = 4 alpha r - 2 (l+1)/r + 2 beta`,
    /// `R = (2 lambda - 4 alpha^2) r^2 + (2 g - 4 alpha beta) r
    ///      + (2 beta (l+1) - 2 Z)/r + 2 alpha (2l + 3) - beta^2 - 2E`.
    pub fn build(params: &PotentialParams, qn: QuantumNumbers, fp: &FactorParams) -> Result<Self> {
        params.require_positive_lambda()?;
        let fp = FactorParams::new(fp.alpha.clone(), fp.beta.clone())?;
        let p = params.prec();
        let f = |x: Float| Float::with_val(p, x);
        let lp1 = qn.l + 1;
        let (a, b) = (&fp.alpha, &fp.beta);

        let q = Laurent::from_terms([
            (1, f(Float::with_val(p, a * 4u32))),
            (0, f(Float::with_val(p, b * 2u32))),
            (-1, Float::with_val(p, -2 * i64::from(lp1))),
        ]);

        let a2 = Float::with_val(p, a.square_ref());
        let r2 = Float::with_val(p, &params.lambda * 2u32) - Float::with_val(p, &a2 * 4u32);
        let ab = Float::with_val(p, a * b);
        let r1 = Float::with_val(p, &params.g * 2u32) - Float::with_val(p, &ab * 4u32);
        let rm1 = Float::with_val(p, b * (2 * lp1)) - Float::with_val(p, &params.z * 2u32);
        let r0 = Float::with_val(p, a * (2 * (2 * qn.l + 3))) - Float::with_val(p, b.square_ref());
        let r_const = Laurent::from_terms([(2, r2), (1, r1), (0, r0), (-1, rm1)]);

        Ok(SturmLiouvilleForm {
            q,
            r_const,
            r_energy_coeff: Float::with_val(p, -2),
        })
    }

    /// `R(r)` with the energy substituted.
    pub fn r_at(&self, energy: &Float) -> Laurent {
        let mut r = self.r_const.clone();
        let p = self.r_energy_coeff.prec();
        r.add_term(0, Float::with_val(p, &self.r_energy_coeff * energy));
        r
    }

    pub fn r_coeff(&self, power: i32) -> Float {
        let p = self.r_energy_coeff.prec();
        self.r_const
            .coeff(power)
            .cloned()
            .unwrap_or_else(|| Float::new(p))
    }

    pub fn q_coeff(&self, power: i32) -> Float {
        let p = self.r_energy_coeff.prec();
        self.q
            .coeff(power)
            .cloned()
            .unwrap_or_else(|| Float::new(p))
    }

    /// The energy at which `R` vanishes identically, if the non-constant part
    /// of `R` is zero to within `tol` relative to the largest coefficient.
    /// In that case `y = 1` solves the equation and the iteration terminates.
    pub fn terminating_energy(&self, tol: &Float) -> Option<Float> {
        let p = self.r_energy_coeff.prec();
        let scale = {
            let m = self.r_const.max_abs(p);
            if m < 1 {
                Float::with_val(p, 1)
            } else {
                m
            }
        };
        let bound = Float::with_val(p, tol * &scale);
        let vanishes = self
            .r_const
            .terms()
            .filter(|(k, _)| *k != 0)
            .all(|(_, c)| Float::with_val(p, c.abs_ref()) <= bound);
        vanishes.then(|| Float::with_val(p, self.r_coeff(0) / 2u32))
    }
}

/// `Gamma(l + 3/2) = (2l + 1)!! sqrt(pi) / 2^(l+1)`.
pub fn gamma_half_integer(l: u32, prec: Precision) -> Float {
    let mut dfact = prec.int(1);
    let mut k = 2 * l + 1;
    while k > 1 {
        dfact *= k;
        k -= 2;
    }
    let sqrt_pi = Float::with_val(prec.bits(), rug::float::Constant::Pi).sqrt();
    let mut out = dfact * sqrt_pi;
    out >>= l + 1;
    out
}

fn factorial(n: u32, prec: Precision) -> Float {
    (1..=n).fold(prec.int(1), |acc, k| acc * k)
}

/// Harmonic-oscillator energy of the `n = 0` state: `sqrt(2 lambda) (2l + 3) / 2`.
pub fn pt_energy_order0(params: &PotentialParams, l: u32) -> Result<Float> {
    params.require_positive_lambda()?;
    let p = params.prec();
    let w = Float::with_val(p, &params.lambda * 2u32).sqrt();
    Ok(w * (2 * l + 3) / 2u32)
}

/// First-order correction for `n = 0` from `-Z/r + g r` about the oscillator:
/// `(l+1)! g / ((2 lambda)^(1/4) Gamma(l+3/2)) - l! Z (2 lambda)^(1/4) / Gamma(l+3/2)`.
///
/// Evaluated as `l! / ((2 lambda)^(1/4) Gamma) * ((l+1) g - Z sqrt(2 lambda))`
/// so that the bracket, which is zero on the quasi-exact locus, is formed
/// once; a bracket within the locus tolerance returns exactly zero.
pub fn pt_energy_order1(params: &PotentialParams, l: u32) -> Result<Float> {
    params.require_positive_lambda()?;
    let prec = Precision::new(params.prec())?;
    let p = prec.bits();
    let root2l = Float::with_val(p, &params.lambda * 2u32).sqrt();
    let quarter = Float::with_val(p, root2l.sqrt_ref());
    let lg = Float::with_val(p, &params.g * (l + 1));
    let zr = Float::with_val(p, &params.z * &root2l);
    let bracket = Float::with_val(p, &lg - &zr);
    let scale = {
        let m = Float::with_val(p, lg.abs_ref()).max(&Float::with_val(p, zr.abs_ref()));
        m.max(&prec.int(1))
    };
    if Float::with_val(p, bracket.abs_ref()) <= Float::with_val(p, prec.locus_tolerance() * scale) {
        return Ok(prec.zero());
    }
    let pre = factorial(l, prec) / (quarter * gamma_half_integer(l, prec));
    Ok(pre * bracket)
}

/// Closed-form `n = 0` eigenpair on the locus `g = sqrt(2 lambda) Z / (l + 1)`.
/// The normalization constant of the wavefunction is not computed.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiExactSolution {
    pub energy: Float,
    pub alpha: Float,
    pub beta: Float,
    pub g_required: Float,
    pub normalization_computed: bool,
}

impl QuasiExactSolution {
    /// The member of the family for `(Z, lambda, l)`, whatever `g` is.
    pub fn for_locus(z: &Float, lambda: &Float, l: u32) -> Result<Self> {
        let p = lambda.prec();
        let params = PotentialParams::new(z.clone(), Float::new(p), lambda.clone());
        params.require_positive_lambda()?;
        let lp1 = l + 1;
        let alpha = Float::with_val(p, lambda / 2u32).sqrt();
        let beta = Float::with_val(p, z / lp1);
        let g_required = Float::with_val(p, lambda * 2u32).sqrt() * z / lp1;
        let mut energy = Float::with_val(p, &alpha * (2 * l + 3));
        energy -= Float::with_val(p, z.square_ref()) / (2 * lp1 * lp1);
        Ok(QuasiExactSolution {
            energy,
            alpha,
            beta,
            g_required,
            normalization_computed: false,
        })
    }
}

/// Returns the closed-form solution when `g` lies on the locus to within the
/// relative locus tolerance of the working precision, `None` otherwise.
pub fn quasi_exact(params: &PotentialParams, l: u32) -> Result<Option<QuasiExactSolution>> {
    params.require_positive_lambda()?;
    let prec = Precision::new(params.prec())?;
    let p = prec.bits();
    let sol = QuasiExactSolution::for_locus(&params.z, &params.lambda, l)?;
    let diff = Float::with_val(p, &params.g - &sol.g_required).abs();
    let scale = Float::with_val(p, sol.g_required.abs_ref()).max(&prec.int(1));
    if diff <= Float::with_val(p, prec.locus_tolerance() * scale) {
        Ok(Some(sol))
    } else {
        Ok(None)
    }
}
