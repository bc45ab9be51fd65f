//! Asymptotic iteration method on `y'' = Q(r) y' + R(r; E) y`.
//!
//! With `lambda_0 = Q` and `s_0 = R` the iteration
//!
//! ```text
//! lambda_k = lambda_(k-1)' + s_(k-1) + lambda_0 lambda_(k-1)
//! s_k      = s_(k-1)'      +           s_0      lambda_(k-1)
//! ```
//!
//! is carried on Taylor jets about the evaluation radius, and the energy is
//! quantized by the roots of `delta_n = lambda_n s_(n-1) - lambda_(n-1) s_n`
//! at that radius. `delta_n` is a polynomial in `E`, so every sign change of
//! a scan holds a root.

use rug::Float;

use crate::error::{Error, Result};
use crate::jets::Jet;
use crate::model::{
    pt_energy_order0, pt_energy_order1, quasi_exact, FactorParams, PotentialParams, QuantumNumbers,
    SturmLiouvilleForm,
};
use crate::precision::Precision;
use crate::roots::{refine, scan_sign_changes, Bracket};
use crate::sweep;

/// First iteration recorded by [`AimRun::converge`].
pub const DEFAULT_N_MIN: usize = 10;
/// Uniform sub-intervals used when a bracket has to be scanned.
pub const SCAN_STEPS: usize = 200;
/// Half-width of the default energy window around the perturbative estimate.
pub const WINDOW_HALF_WIDTH: f64 = 2.0;
/// Consecutive iterations without a root before a run is declared divergent.
pub const MAX_CONSECUTIVE_MISSES: usize = 3;
/// Iteration gap of the self-convergence score used by [`optimize_alpha`].
pub const SCORE_LAG: usize = 5;

/// Extra mantissa bits carried through the iteration for `delta_n`.
///
/// `lambda_n` and `s_n` become nearly proportional as `n` grows, so
/// `delta_n` is a difference of close numbers and the recursion sheds
/// roughly 3-4 bits per iteration (worst observed for `g > 0`, where the
/// factor function has `beta > 0`). The guard keeps the energies good to
/// the configured precision.
pub fn guard_bits(n: usize) -> u32 {
    4 * n as u32 + 64
}

/// One configured AIM computation: the Sturm-Liouville form for a fixed
/// factor function, the radius at which the quantization condition is
/// imposed, the iteration budget and the energy search window.
#[derive(Debug, Clone)]
pub struct AimRun {
    params: PotentialParams,
    qn: QuantumNumbers,
    factor: FactorParams,
    sl: SturmLiouvilleForm,
    r0: Float,
    r_eval: Float,
    n_max: usize,
    precision: Precision,
    window: (Float, Float),
    terminating_energy: Option<Float>,
}

/// `delta_n` at one energy together with the pieces it was built from.
#[derive(Debug, Clone)]
pub struct Delta {
    pub value: Float,
    /// `delta_(n-1)` at the same energy.
    pub previous: Float,
    pub lambda_n: Float,
    pub s_n: Float,
    /// `s_0` vanishes identically at this energy, so every `s_k` and every
    /// `delta_k` is zero and the iteration has terminated exactly.
    pub terminated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    pub iteration: usize,
    pub energy: Float,
    /// `log10 |E^(N) - E_ref|`; `-inf` when the two are identical.
    pub log_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct XiScanRecord {
    pub xi: f64,
    pub log_error: Option<f64>,
    pub n_fixed: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct XiScan {
    pub n_fixed: usize,
    pub records: Vec<XiScanRecord>,
    /// Grid point with the smallest logarithmic error.
    pub xi_min: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaCandidate {
    pub alpha: Float,
    /// `log10 |E^(budget) - E^(budget - 5)|`, absent when the run failed.
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaSearch {
    pub best_alpha: Float,
    pub best_score: f64,
    pub candidates: Vec<AlphaCandidate>,
}

pub fn log10_error(energy: &Float, reference: &Float) -> f64 {
    let p = energy.prec().max(reference.prec());
    let diff = Float::with_val(p, energy - reference).abs();
    if diff.is_zero() {
        f64::NEG_INFINITY
    } else {
        diff.log10().to_f64()
    }
}

/// Perturbative `n = 0` estimate (orders 0 and 1) used to center search windows.
pub fn pt_estimate(params: &PotentialParams, l: u32) -> Result<Float> {
    Ok(pt_energy_order0(params, l)? + pt_energy_order1(params, l)?)
}

impl AimRun {
    /// Run evaluated at `r0` with the default window `[E_pt - 2, E_pt + 2]`.
    pub fn new(
        params: &PotentialParams,
        qn: QuantumNumbers,
        factor: &FactorParams,
        n_max: usize,
        precision: Precision,
    ) -> Result<Self> {
        if n_max < 2 {
            return Err(Error::InvalidRun(format!(
                "n_max must be >= 2 (got {n_max})"
            )));
        }
        let p = precision.bits();
        let params = PotentialParams::new(
            Float::with_val(p, &params.z),
            Float::with_val(p, &params.g),
            Float::with_val(p, &params.lambda),
        )
        .validate()?;
        let factor = FactorParams::new(
            Float::with_val(p, &factor.alpha),
            Float::with_val(p, &factor.beta),
        )?;
        let sl = SturmLiouvilleForm::build(&params, qn, &factor)?;
        let r0 = factor.evaluation_point(qn.l);
        let e_pt = pt_estimate(&params, qn.l)?;
        let window = (
            Float::with_val(p, &e_pt - WINDOW_HALF_WIDTH),
            Float::with_val(p, &e_pt + WINDOW_HALF_WIDTH),
        );
        let terminating_energy = sl.terminating_energy(&precision.locus_tolerance());
        Ok(AimRun {
            params,
            qn,
            factor,
            sl,
            r_eval: r0.clone(),
            r0,
            n_max,
            precision,
            window,
            terminating_energy,
        })
    }

    /// Run with the asymptotic factor parameters `alpha = sqrt(lambda/2)`, `beta = g/(2 alpha)`.
    pub fn asymptotic(
        params: &PotentialParams,
        qn: QuantumNumbers,
        n_max: usize,
        precision: Precision,
    ) -> Result<Self> {
        let p = precision.bits();
        let lifted = PotentialParams::new(
            Float::with_val(p, &params.z),
            Float::with_val(p, &params.g),
            Float::with_val(p, &params.lambda),
        );
        let fp = lifted.asymptotic_factor_params()?;
        AimRun::new(&lifted, qn, &fp, n_max, precision)
    }

    /// Run with the given `alpha` and `beta = g / (2 alpha)`.
    pub fn with_alpha(
        params: &PotentialParams,
        qn: QuantumNumbers,
        alpha: &Float,
        n_max: usize,
        precision: Precision,
    ) -> Result<Self> {
        let p = precision.bits();
        let lifted = PotentialParams::new(
            Float::with_val(p, &params.z),
            Float::with_val(p, &params.g),
            Float::with_val(p, &params.lambda),
        );
        let fp = FactorParams::with_asymptotic_beta(Float::with_val(p, alpha), &lifted)?;
        AimRun::new(&lifted, qn, &fp, n_max, precision)
    }

    pub fn with_r_eval(mut self, r_eval: Float) -> Result<Self> {
        if !(r_eval.is_finite() && r_eval > 0) {
            return Err(Error::InvalidRun("evaluation radius must be > 0".into()));
        }
        self.r_eval = Float::with_val(self.precision.bits(), r_eval);
        Ok(self)
    }

    /// Evaluate at `xi * r0`.
    pub fn with_xi(self, xi: f64) -> Result<Self> {
        if !(xi.is_finite() && xi > 0.0) {
            return Err(Error::InvalidRun(format!("xi must be > 0 (got {xi})")));
        }
        let r = Float::with_val(self.precision.bits(), &self.r0 * xi);
        self.with_r_eval(r)
    }

    pub fn with_window(mut self, lo: Float, hi: Float) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidRun(
                "energy window needs finite lo < hi".into(),
            ));
        }
        let p = self.precision.bits();
        self.window = (Float::with_val(p, lo), Float::with_val(p, hi));
        Ok(self)
    }

    pub fn with_n_max(mut self, n_max: usize) -> Result<Self> {
        if n_max < 2 {
            return Err(Error::InvalidRun(format!(
                "n_max must be >= 2 (got {n_max})"
            )));
        }
        self.n_max = n_max;
        Ok(self)
    }

    pub fn params(&self) -> &PotentialParams {
        &self.params
    }

    pub fn quantum_numbers(&self) -> QuantumNumbers {
        self.qn
    }

    pub fn factor(&self) -> &FactorParams {
        &self.factor
    }

    pub fn sturm_liouville(&self) -> &SturmLiouvilleForm {
        &self.sl
    }

    pub fn r0(&self) -> &Float {
        &self.r0
    }

    pub fn r_eval(&self) -> &Float {
        &self.r_eval
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn window(&self) -> (&Float, &Float) {
        (&self.window.0, &self.window.1)
    }

    fn check_iteration(&self, n: usize) -> Result<()> {
        if n > self.n_max {
            return Err(Error::InsufficientJetOrder {
                n,
                budget: self.n_max,
            });
        }
        if n < 2 {
            return Err(Error::InvalidRun(format!(
                "iteration must be >= 2 (got {n})"
            )));
        }
        Ok(())
    }

    /// Quantization function `delta_n(r_eval, E)`.
    pub fn delta(&self, n: usize, energy: &Float) -> Result<Delta> {
        self.check_iteration(n)?;
        DeltaEvaluator::new(self, n)?.eval(energy)
    }

    /// `E^(n)`: the root of `delta_n` in `[lo, hi]`.
    ///
    /// If the end points do not straddle a sign change the interval is
    /// scanned in [`SCAN_STEPS`] steps and the sign change nearest the
    /// interval midpoint is refined.
    pub fn root(&self, n: usize, lo: &Float, hi: &Float) -> Result<Float> {
        self.check_iteration(n)?;
        let p = self.precision.bits();
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };

        if let Some(e) = &self.terminating_energy {
            if e >= lo && e <= hi {
                return self.closed_form_energy(n);
            }
        }

        let eval = DeltaEvaluator::new(self, n)?;
        let f = |e: &Float| eval.eval(e).map(|d| d.value);
        let tol = self.precision.root_tolerance();

        let f_lo = f(lo)?;
        let f_hi = f(hi)?;
        let ends = Bracket {
            lo: lo.clone(),
            hi: hi.clone(),
            f_lo,
            f_hi,
        };
        let bracket = if ends.straddles() && lo != hi {
            ends
        } else {
            let mid = ends.midpoint();
            let candidates = scan_sign_changes(f, lo, hi, SCAN_STEPS)?;
            candidates
                .into_iter()
                .min_by(|a, b| {
                    let da = Float::with_val(p, a.midpoint() - &mid).abs();
                    let db = Float::with_val(p, b.midpoint() - &mid).abs();
                    da.partial_cmp(&db).expect("finite distances")
                })
                .ok_or_else(|| Error::NoRootInWindow {
                    n,
                    lo: lo.to_f64().to_string(),
                    hi: hi.to_f64().to_string(),
                })?
        };
        refine(f, bracket, &tol)
    }

    /// Root in the run's default window.
    pub fn root_in_window(&self, n: usize) -> Result<Float> {
        let (lo, hi) = (self.window.0.clone(), self.window.1.clone());
        self.root(n, &lo, &hi)
    }

    fn closed_form_energy(&self, n: usize) -> Result<Float> {
        match quasi_exact(&self.params, self.qn.l)? {
            Some(sol) => Ok(sol.energy),
            None => Err(Error::DegenerateDelta { n }),
        }
    }

    /// Root sequence `E^(N)` for `N = 10..=n_max`.
    pub fn converge(&self, reference: Option<&Float>) -> Result<Vec<ConvergenceRecord>> {
        self.converge_from(DEFAULT_N_MIN.min(self.n_max), reference)
    }

    /// Root sequence from `n_min` to `n_max`, following one root by continuity.
    ///
    /// The first root comes from the default window; afterwards the bracket
    /// is the previous root `+- max(10 |E^(N-1) - E^(N-2)|, 1e-3)`. An
    /// iteration whose bracket holds no root is retried on the default window
    /// and otherwise skipped; [`MAX_CONSECUTIVE_MISSES`] misses in a row end
    /// the run with `NoRootInWindow` for the last failing iteration.
    /// Non-monotone error sequences are never treated as failure.
    pub fn converge_from(
        &self,
        n_min: usize,
        reference: Option<&Float>,
    ) -> Result<Vec<ConvergenceRecord>> {
        self.check_iteration(n_min)?;
        let p = self.precision.bits();
        let floor = self.precision.parse("1e-3")?;
        let mut records: Vec<ConvergenceRecord> = Vec::new();
        let mut misses = 0;

        for n in n_min..=self.n_max {
            let tracked = match records.as_slice() {
                [] => None,
                [only] => Some((only.energy.clone(), floor.clone())),
                [.., prev, last] => {
                    let step = Float::with_val(p, &last.energy - &prev.energy).abs() * 10u32;
                    let w = if step > floor { step } else { floor.clone() };
                    Some((last.energy.clone(), w))
                }
            };
            let attempt = match &tracked {
                Some((center, w)) => {
                    let lo = Float::with_val(p, center - w);
                    let hi = Float::with_val(p, center + w);
                    match self.root(n, &lo, &hi) {
                        Err(Error::NoRootInWindow { .. }) => self.root_in_window(n),
                        other => other,
                    }
                }
                None => self.root_in_window(n),
            };
            match attempt {
                Ok(energy) => {
                    misses = 0;
                    let log_error = reference.map(|r| log10_error(&energy, r));
                    records.push(ConvergenceRecord {
                        iteration: n,
                        energy,
                        log_error,
                    });
                }
                Err(e @ Error::NoRootInWindow { .. }) => {
                    misses += 1;
                    if misses >= MAX_CONSECUTIVE_MISSES {
                        return Err(e);
                    }
                }
                Err(e) => return Err(e),
            }
        }
        Ok(records)
    }

    /// `E^(n_max)` reached by root tracking from `N = 10`.
    pub fn solve(&self) -> Result<ConvergenceRecord> {
        let records = self.converge(None)?;
        match records.last() {
            Some(r) if r.iteration == self.n_max => Ok(r.clone()),
            _ => Err(Error::NoRootInWindow {
                n: self.n_max,
                lo: self.window.0.to_f64().to_string(),
                hi: self.window.1.to_f64().to_string(),
            }),
        }
    }
}

/// E-independent state for evaluating `delta_n` at many energies, held at
/// the guarded working precision.
struct DeltaEvaluator<'a> {
    run: &'a AimRun,
    work: Precision,
    n: usize,
    sl: SturmLiouvilleForm,
    r_eval: Float,
    r_scale: Float,
}

impl<'a> DeltaEvaluator<'a> {
    fn new(run: &'a AimRun, n: usize) -> Result<Self> {
        let work = Precision::new(run.precision.bits() + guard_bits(n))?;
        let w = work.bits();
        let lift = |x: &Float| Float::with_val(w, x);
        let params = PotentialParams::new(
            lift(&run.params.z),
            lift(&run.params.g),
            lift(&run.params.lambda),
        );
        let factor = FactorParams::new(lift(&run.factor.alpha), lift(&run.factor.beta))?;
        let sl = SturmLiouvilleForm::build(&params, run.qn, &factor)?;
        let r_eval = lift(&run.r_eval);
        let r_scale = sl.r_const.max_abs(w);
        Ok(DeltaEvaluator {
            run,
            work,
            n,
            sl,
            r_eval,
            r_scale,
        })
    }

    fn eval(&self, energy: &Float) -> Result<Delta> {
        let p = self.work.bits();
        let energy = Float::with_val(p, energy);
        let r_poly = self.sl.r_at(&energy);
        let lambda0 = Jet::from_laurent(&self.sl.q, &self.r_eval, self.n + 1)?;
        let s0 = Jet::from_laurent(&r_poly, &self.r_eval, self.n + 1)?;

        let terminated = {
            let mut scale = Float::with_val(p, energy.abs_ref()) * 2u32;
            if self.r_scale > scale {
                scale = self.r_scale.clone();
            }
            if scale < 1 {
                scale = Float::with_val(p, 1);
            }
            r_poly.max_abs(p) <= self.run.precision.zero_threshold() * scale
        };

        // (lambda_k, s_k) at r_eval for k = n-2, n-1
        let mut lambda = lambda0;
        let mut s = s0.clone();
        let mut hist: [(Float, Float); 2] = [
            (Float::new(p), Float::new(p)),
            (Float::new(p), Float::new(p)),
        ];
        for _ in 1..=self.n {
            let next_lambda = lambda
                .derivative()?
                .add(&s)?
                .add(&lambda.mul_laurent(&self.sl.q))?;
            let next_s = s.derivative()?.add(&lambda.mul_laurent(&r_poly))?;
            hist.swap(0, 1);
            hist[1] = (lambda.value().clone(), s.value().clone());
            lambda = next_lambda;
            s = next_s;
        }
        let [(lambda_pp, s_pp), (lambda_p, s_p)] = hist;
        let lambda_n = lambda.value().clone();
        let s_n = s.value().clone();
        let cross = |l_hi: &Float, s_lo: &Float, l_lo: &Float, s_hi: &Float| {
            Float::with_val(p, l_hi * s_lo) - Float::with_val(p, l_lo * s_hi)
        };
        let out = |x: Float| Float::with_val(self.run.precision.bits(), x);
        Ok(Delta {
            value: out(cross(&lambda_n, &s_p, &lambda_p, &s_n)),
            previous: out(cross(&lambda_p, &s_pp, &lambda_pp, &s_p)),
            lambda_n: out(lambda_n),
            s_n: out(s_n),
            terminated,
        })
    }
}

/// Grid search over `alpha` (with `beta = g / (2 alpha)`) scored by the
/// self-convergence `log10 |E^(budget) - E^(budget - 5)|` of the tracked
/// root sequence. Lowest score wins; ties go to the smaller `alpha`.
pub fn optimize_alpha(
    params: &PotentialParams,
    qn: QuantumNumbers,
    alpha_grid: &[Float],
    budget_n: usize,
    precision: Precision,
) -> Result<AlphaSearch> {
    if alpha_grid.is_empty() {
        return Err(Error::InvalidRun("alpha grid is empty".into()));
    }
    if budget_n < DEFAULT_N_MIN + SCORE_LAG {
        return Err(Error::InvalidRun(format!(
            "budget must be >= {} (got {budget_n})",
            DEFAULT_N_MIN + SCORE_LAG
        )));
    }
    for a in alpha_grid {
        if !(a.is_finite() && *a > 0) {
            return Err(Error::NonPositiveAlpha(a.to_f64().to_string()));
        }
    }
    let scores = sweep::map(alpha_grid, |alpha| -> Result<Option<f64>> {
        let run = AimRun::with_alpha(params, qn, alpha, budget_n, precision)?;
        let records = match run.converge(None) {
            Ok(r) => r,
            Err(Error::NoRootInWindow { .. }) | Err(Error::DegenerateDelta { .. }) => {
                return Ok(None)
            }
            Err(e) => return Err(e),
        };
        let at = |n: usize| records.iter().find(|r| r.iteration == n);
        Ok(match (at(budget_n), at(budget_n - SCORE_LAG)) {
            (Some(a), Some(b)) => Some(log10_error(&a.energy, &b.energy)),
            _ => None,
        })
    });

    let mut candidates = Vec::with_capacity(alpha_grid.len());
    for (alpha, score) in alpha_grid.iter().zip(scores) {
        candidates.push(AlphaCandidate {
            alpha: alpha.clone(),
            score: score?,
        });
    }
    let best = candidates
        .iter()
        .filter_map(|c| c.score.map(|s| (c, s)))
        .min_by(|(a, sa), (b, sb)| {
            sa.partial_cmp(sb)
                .expect("scores are never NaN")
                .then_with(|| a.alpha.partial_cmp(&b.alpha).expect("finite alphas"))
        })
        .ok_or(Error::AllCandidatesFailed)?;
    Ok(AlphaSearch {
        best_alpha: best.0.alpha.clone(),
        best_score: best.1,
        candidates: candidates.clone(),
    })
}

/// `L_N(xi)` for every `N` in `n_values` and every `xi` on the grid, with the
/// quantization condition imposed at `xi * r0`. One tracked root sequence
/// per grid point serves all requested `N`. Failed grid points are recorded
/// with an absent error rather than aborting the scan.
pub fn xi_scan_many(
    run: &AimRun,
    n_values: &[usize],
    xi_grid: &[f64],
    reference: &Float,
) -> Result<Vec<XiScan>> {
    let n_top = *n_values
        .iter()
        .max()
        .ok_or_else(|| Error::InvalidRun("no iteration counts requested".into()))?;
    for &n in n_values {
        if n < DEFAULT_N_MIN {
            return Err(Error::InvalidRun(format!(
                "xi scans need N >= {DEFAULT_N_MIN} (got {n})"
            )));
        }
    }
    for &xi in xi_grid {
        if !(xi.is_finite() && xi > 0.0) {
            return Err(Error::InvalidRun(format!("xi must be > 0 (got {xi})")));
        }
    }
    let base = run.clone().with_n_max(n_top.max(run.n_max))?;
    let per_xi = sweep::map(xi_grid, |&xi| -> Vec<Option<f64>> {
        let records = base
            .clone()
            .with_xi(xi)
            .and_then(|r| r.with_n_max(n_top))
            .and_then(|r| r.converge(Some(reference)));
        match records {
            Ok(records) => n_values
                .iter()
                .map(|&n| {
                    records
                        .iter()
                        .find(|r| r.iteration == n)
                        .and_then(|r| r.log_error)
                })
                .collect(),
            Err(_) => vec![None; n_values.len()],
        }
    });

    Ok(n_values
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let records: Vec<XiScanRecord> = xi_grid
                .iter()
                .zip(&per_xi)
                .map(|(&xi, errs)| XiScanRecord {
                    xi,
                    log_error: errs[k],
                    n_fixed: n,
                })
                .collect();
            let xi_min = records
                .iter()
                .filter_map(|r| r.log_error.map(|e| (r.xi, e)))
                .min_by(|a, b| a.1.partial_cmp(&b.1).expect("no NaN errors"))
                .map(|(xi, _)| xi);
            XiScan {
                n_fixed: n,
                records,
                xi_min,
            }
        })
        .collect())
}

/// `L_(n_fixed)(xi)` over a grid of `xi = r / r0` and its grid minimiser.
pub fn xi_scan(run: &AimRun, n_fixed: usize, xi_grid: &[f64], reference: &Float) -> Result<XiScan> {
    Ok(xi_scan_many(run, &[n_fixed], xi_grid, reference)?
        .pop()
        .expect("one scan per requested N"))
}
