//! Shooting-method reference solver for the radial equation
//! `-u''/2 + [l(l+1)/(2r^2) + V(r)] u = E u`, `u(0) = u(inf) = 0`.
//!
//! The regular solution is integrated outward in `t = ln r` using
//! `(u, w = r u')`, which keeps the centrifugal and Coulomb terms bounded as
//! `r -> 0`; the decaying solution is integrated inward in `r` from a
//! Gaussian-times-exponential start. Both legs use fixed-step classical RK4
//! and the normalized Wronskian at the matching radius is extrapolated from
//! `N` and `2N` steps. Everything here is plain `f64`.

use crate::error::{Error, Result};
use crate::model::{PotentialParams, QuantumNumbers};

/// Scan resolution of the energy window when bracketing eigenvalues.
pub const WINDOW_SCAN_STEPS: usize = 400;
/// Smallest energy tolerance reachable in double precision here.
pub const MIN_TOLERANCE: f64 = 1e-12;
/// Outer radius is placed where `2 (V_eff(r) - E_hi)` first reaches this.
pub const BARRIER_HEIGHT: f64 = 400.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ShootConfig {
    pub r_min: f64,
    /// `None`: first radius beyond the well where `2 (V_eff - E_hi) >= 400`.
    pub r_max: Option<f64>,
    /// `None`: the minimum of the effective potential (see [`Geometry`]).
    pub r_match: Option<f64>,
    pub step_count: usize,
    pub tolerance: f64,
}

impl Default for ShootConfig {
    fn default() -> Self {
        ShootConfig {
            r_min: 1e-4,
            r_max: None,
            r_match: None,
            step_count: 20_000,
            tolerance: 1e-10,
        }
    }
}

/// Resolved radii for one energy window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub r_min: f64,
    pub r_match: f64,
    pub r_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Model {
    z: f64,
    g: f64,
    lambda: f64,
    l: f64,
}

impl Model {
    fn new(params: &PotentialParams, l: u32) -> Result<Self> {
        let params = params.clone().validate()?;
        Ok(Model {
            z: params.z.to_f64(),
            g: params.g.to_f64(),
            lambda: params.lambda.to_f64(),
            l: f64::from(l),
        })
    }

    fn v(&self, r: f64) -> f64 {
        -self.z / r + self.g * r + self.lambda * r * r
    }

    fn v_eff(&self, r: f64) -> f64 {
        self.l * (self.l + 1.0) / (2.0 * r * r) + self.v(r)
    }
}

impl ShootConfig {
    fn check(&self) -> Result<()> {
        if !(self.r_min.is_finite() && self.r_min > 0.0) {
            return Err(Error::InvalidShootConfig("r_min must be > 0".into()));
        }
        if self.step_count < 1000 {
            return Err(Error::InvalidShootConfig(format!(
                "step_count must be >= 1000 (got {})",
                self.step_count
            )));
        }
        if !(self.tolerance.is_finite() && self.tolerance >= MIN_TOLERANCE) {
            return Err(Error::InvalidShootConfig(format!(
                "tolerance must be >= {MIN_TOLERANCE:e} (got {:e})",
                self.tolerance
            )));
        }
        Ok(())
    }

    /// Fills in automatic radii for the energy window `[e_lo, e_hi]`.
    pub fn geometry(
        &self,
        params: &PotentialParams,
        l: u32,
        window: (f64, f64),
    ) -> Result<Geometry> {
        self.check()?;
        check_window(window)?;
        let m = Model::new(params, l)?;
        let (e_lo, e_hi) = window;

        let r_max = match self.r_max {
            Some(r) => r,
            None => {
                // V_eff -> +inf at large r since lambda > 0
                let mut r = self.r_min.max(1e-3);
                let mut past_well = false;
                loop {
                    let next = r * 1.01;
                    if m.v_eff(next) > m.v_eff(r) {
                        past_well = true;
                    }
                    r = next;
                    if past_well && 2.0 * (m.v_eff(r) - e_hi) >= BARRIER_HEIGHT {
                        break r;
                    }
                    if r > 1e6 {
                        return Err(Error::BadWindow(
                            "no confining barrier below r = 1e6".into(),
                        ));
                    }
                }
            }
        };

        let r_match = match self.r_match {
            Some(r) => r,
            None => {
                let samples = 4000;
                let (ln_lo, ln_hi) = (self.r_min.ln(), r_max.ln());
                let grid = (0..=samples)
                    .map(|i| (ln_lo + (ln_hi - ln_lo) * i as f64 / samples as f64).exp());
                let r_well = grid
                    .min_by(|a, b| m.v_eff(*a).total_cmp(&m.v_eff(*b)))
                    .expect("non-empty grid");
                // with no interior well (repulsive Coulomb, l = 0) match inside
                // the classically allowed region instead of at the origin
                let e_mid = 0.5 * (e_lo + e_hi);
                let mut r_turn = r_well;
                while r_turn < r_max && m.v_eff(r_turn) < e_mid {
                    r_turn *= 1.001;
                }
                r_well.max(0.5 * r_turn)
            }
        };

        if !(self.r_min < r_match && r_match < r_max) {
            return Err(Error::InvalidShootConfig(format!(
                "need r_min < r_match < r_max (got {} < {} < {})",
                self.r_min, r_match, r_max
            )));
        }
        Ok(Geometry {
            r_min: self.r_min,
            r_match,
            r_max,
        })
    }
}

fn check_window(window: (f64, f64)) -> Result<()> {
    if window.0.is_finite() && window.1.is_finite() && window.0 < window.1 {
        Ok(())
    } else {
        Err(Error::BadWindow(format!("[{}, {}]", window.0, window.1)))
    }
}

/// Solution state at the matching radius plus the number of sign changes
/// met on the way.
#[derive(Debug, Clone, Copy)]
struct Leg {
    u: f64,
    du: f64,
    nodes: u32,
}

const RESCALE_ABOVE: f64 = 1e100;

fn rk4<F>(y: [f64; 2], x: f64, h: f64, f: &F) -> [f64; 2]
where
    F: Fn(f64, [f64; 2]) -> [f64; 2],
{
    let k1 = f(x, y);
    let k2 = f(
        x + 0.5 * h,
        [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]],
    );
    let k3 = f(
        x + 0.5 * h,
        [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]],
    );
    let k4 = f(x + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
    [
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

fn integrate<F>(mut y: [f64; 2], x0: f64, x1: f64, steps: usize, f: F) -> Result<([f64; 2], u32)>
where
    F: Fn(f64, [f64; 2]) -> [f64; 2],
{
    let h = (x1 - x0) / steps as f64;
    let mut nodes = 0;
    for i in 0..steps {
        let next = rk4(y, x0 + h * i as f64, h, &f);
        if !(next[0].is_finite() && next[1].is_finite()) {
            return Err(Error::IntegrationOverflow);
        }
        if next[0] != 0.0 && y[0] != 0.0 && next[0].is_sign_negative() != y[0].is_sign_negative() {
            nodes += 1;
        }
        y = next;
        let big = y[0].abs().max(y[1].abs());
        if big > RESCALE_ABOVE {
            y = [y[0] / big, y[1] / big];
        }
    }
    Ok((y, nodes))
}

fn outward(m: &Model, geo: &Geometry, energy: f64, steps: usize) -> Result<Leg> {
    let l = m.l;
    let r = geo.r_min;
    // u ~ r^(l+1) (1 - Z r / (l+1)); w = r u'
    let u = r.powf(l + 1.0) * (1.0 - m.z * r / (l + 1.0));
    let w = (l + 1.0) * r.powf(l + 1.0) - m.z * (l + 2.0) * r.powf(l + 2.0) / (l + 1.0);
    let rhs = |t: f64, y: [f64; 2]| {
        let r = t.exp();
        let k = l * (l + 1.0) + 2.0 * r * r * (m.v(r) - energy);
        [y[1], y[1] + k * y[0]]
    };
    let (y, nodes) = integrate([u, w], r.ln(), geo.r_match.ln(), steps, rhs)?;
    Ok(Leg {
        u: y[0],
        du: y[1] / geo.r_match,
        nodes,
    })
}

fn inward(m: &Model, geo: &Geometry, energy: f64, steps: usize) -> Result<Leg> {
    // exp(-a r^2 - b r), a = sqrt(lambda/2), b = g / sqrt(2 lambda); the overall scale is irrelevant
    let a = (m.lambda / 2.0).sqrt();
    let b = m.g / (2.0 * m.lambda).sqrt();
    let r = geo.r_max;
    let rhs = |r: f64, y: [f64; 2]| [y[1], 2.0 * (m.v_eff(r) - energy) * y[0]];
    let (y, nodes) = integrate([1.0, -(2.0 * a * r + b)], r, geo.r_match, steps, rhs)?;
    Ok(Leg {
        u: y[0],
        du: y[1],
        nodes,
    })
}

fn wronskian(out: &Leg, inn: &Leg) -> f64 {
    let w = out.u * inn.du - out.du * inn.u;
    w / ((out.u.hypot(out.du)) * (inn.u.hypot(inn.du)))
}

fn mismatch_at(m: &Model, geo: &Geometry, energy: f64, steps: usize) -> Result<(f64, u32)> {
    let half = (steps / 2).max(1);
    let o = outward(m, geo, energy, half)?;
    let i = inward(m, geo, energy, half)?;
    Ok((wronskian(&o, &i), o.nodes + i.nodes))
}

/// Normalized Wronskian mismatch of the regular and decaying solutions at
/// the matching radius; zero exactly at eigenvalues. One Richardson level
/// combines `step_count` and `2 step_count` steps.
pub fn shoot_mismatch(
    params: &PotentialParams,
    qn: QuantumNumbers,
    config: &ShootConfig,
    energy: f64,
) -> Result<f64> {
    let window = (energy - 1.0, energy + 1.0);
    let geo = config.geometry(params, qn.l, window)?;
    mismatch_with(params, qn, config, &geo, energy).map(|(w, _)| w)
}

fn mismatch_with(
    params: &PotentialParams,
    qn: QuantumNumbers,
    config: &ShootConfig,
    geo: &Geometry,
    energy: f64,
) -> Result<(f64, u32)> {
    if !energy.is_finite() {
        return Err(Error::BadWindow(format!("energy {energy}")));
    }
    let m = Model::new(params, qn.l)?;
    let (coarse, _) = mismatch_at(&m, geo, energy, config.step_count)?;
    let (fine, nodes) = mismatch_at(&m, geo, energy, 2 * config.step_count)?;
    Ok((fine + (fine - coarse) / 15.0, nodes))
}

/// Default window: `n = 0` perturbation estimate `+- 2`; for `n > 0` the
/// oscillator level `sqrt(2 lambda) (2n + l + 3/2)` `+- 2`.
pub fn default_window(params: &PotentialParams, qn: QuantumNumbers) -> Result<(f64, f64)> {
    let center = if qn.n == 0 {
        crate::aim::pt_estimate(params, qn.l)?.to_f64()
    } else {
        let w = (2.0 * params.lambda.to_f64()).sqrt();
        w * (2.0 * f64::from(qn.n) + f64::from(qn.l) + 1.5)
    };
    Ok((center - 2.0, center + 2.0))
}

/// Eigenvalue with exactly `qn.n` interior nodes inside `window`.
///
/// The window is scanned for sign changes of the mismatch; each is bisected
/// to a hundredth of the tolerance and the candidate whose solution has `n`
/// nodes is returned.
pub fn oracle_eigenvalue(
    params: &PotentialParams,
    qn: QuantumNumbers,
    config: &ShootConfig,
    window: Option<(f64, f64)>,
) -> Result<f64> {
    let window = match window {
        Some(w) => w,
        None => default_window(params, qn)?,
    };
    let geo = config.geometry(params, qn.l, window)?;
    let f = |e: f64| mismatch_with(params, qn, config, &geo, e);

    let (lo, hi) = window;
    let mut brackets = Vec::new();
    let mut prev = (lo, f(lo)?.0);
    for i in 1..=WINDOW_SCAN_STEPS {
        let e = lo + (hi - lo) * i as f64 / WINDOW_SCAN_STEPS as f64;
        let cur = (e, f(e)?.0);
        if prev.1 == 0.0 || prev.1.is_sign_negative() != cur.1.is_sign_negative() {
            brackets.push((prev, cur));
        }
        prev = cur;
    }
    if brackets.is_empty() {
        return Err(Error::NoSignChange { lo, hi });
    }

    let target = config.tolerance / 100.0;
    let mut seen = Vec::new();
    for ((mut a, mut fa), (mut b, _)) in brackets {
        while b - a > target {
            let mid = 0.5 * (a + b);
            let fm = f(mid)?.0;
            if fm == 0.0 {
                a = mid;
                b = mid;
                break;
            }
            if fm.is_sign_negative() == fa.is_sign_negative() {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
            if mid == a && mid == b {
                break;
            }
        }
        let e = 0.5 * (a + b);
        let nodes = f(e)?.1;
        if nodes == qn.n {
            return Ok(e);
        }
        seen.push(nodes);
    }
    Err(Error::WrongNodeCount {
        expected: qn.n,
        found: seen,
    })
}

/// Interior nodes of the matched solution at `energy`.
pub fn node_count(
    params: &PotentialParams,
    qn: QuantumNumbers,
    config: &ShootConfig,
    energy: f64,
) -> Result<u32> {
    let geo = config.geometry(params, qn.l, (energy - 1.0, energy + 1.0))?;
    mismatch_with(params, qn, config, &geo, energy).map(|(_, n)| n)
}
