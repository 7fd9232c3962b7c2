//! Inverting `g_M` along the unit circle.
//!
//! `g_M(1) = 1` and `g_M'(1) = E[M] > 0`, so `g_M` has an analytic inverse
//! near 1. We follow that branch by continuation: the target
//! `w(t) = exp(i phi t)` moves from 1 to `exp(i phi)` and every step is a
//! tangent predictor followed by Newton correction. Steps are halved when
//! the corrector fails or wanders off the predicted branch.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::pgf::{pgf_of_m, pgf_of_w, Pgf};
use crate::channel::ChannelSpec;
use crate::error::{Error, Result};

const MAX_STEPS: usize = 20_000;
const MIN_STEP: f64 = 1e-12;
const NEWTON_ITERS: usize = 30;
/// Angle swept by the first continuation step.
const FIRST_STEP: f64 = 0.05;

/// Inverse of `g_M` on arcs of the unit circle for one channel.
#[derive(Clone, Debug)]
pub struct ArcInverter {
    g_m: Pgf,
    g_w: Pgf,
}

impl ArcInverter {
    pub fn new(spec: &ChannelSpec) -> Result<Self> {
        Ok(Self {
            g_m: pgf_of_m(spec, 1e-15)?,
            g_w: pgf_of_w(spec, 1e-15)?,
        })
    }

    pub fn g_m(&self) -> &Pgf {
        &self.g_m
    }

    pub fn g_w(&self) -> &Pgf {
        &self.g_w
    }

    fn residual(&self, z: Complex64, w: Complex64) -> Option<Complex64> {
        let v = self.g_m.eval(z).ok()?.value;
        v.is_finite().then(|| v - w)
    }

    fn newton(&self, start: Complex64, w: Complex64, tol: f64) -> Option<Complex64> {
        let mut z = start;
        for _ in 0..NEWTON_ITERS {
            let f = self.residual(z, w)?;
            if f.norm() <= tol {
                return Some(z);
            }
            let d = self.g_m.eval_derivative(z).ok()?;
            if d.norm() == 0.0 || !d.is_finite() {
                return None;
            }
            z -= f / d;
            if !z.is_finite() {
                return None;
            }
        }
        (self.residual(z, w)?.norm() <= tol).then_some(z)
    }

    /// Finds `z` on the branch through `z = 1` with `|g_M(z) - e^{i phi}| <= tol`.
    pub fn invert(&self, phi: f64, tol: f64) -> Result<Complex64> {
        if !phi.is_finite() || phi.abs() > PI {
            return Err(Error::domain("phi", format!("{phi} is outside [-pi, pi]")));
        }
        if !(tol > 0.0 && tol <= 1e-8) {
            return Err(Error::domain("tol", format!("{tol} is outside (0, 1e-8]")));
        }
        let mut z = Complex64::new(1.0, 0.0);
        if phi == 0.0 {
            return Ok(z);
        }
        let fail = |reached: f64, reason: &str| Error::Convergence {
            phi,
            reached,
            reason: reason.to_string(),
        };
        let mut t = 0.0;
        let mut h = (FIRST_STEP / phi.abs()).min(1.0);
        let mut steps = 0;
        while t < 1.0 {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(fail(t, "step budget exhausted"));
            }
            let t_next = (t + h).min(1.0);
            let w_now = Complex64::from_polar(1.0, phi * t);
            let w_next = Complex64::from_polar(1.0, phi * t_next);
            let slope = self
                .g_m
                .eval_derivative(z)
                .map_err(|e| fail(t, &e.to_string()))?;
            if slope.norm() == 0.0 {
                return Err(fail(t, "critical point of g_M on the path"));
            }
            let dz = (w_next - w_now) / slope;
            let predicted = z + dz;
            match self.newton(predicted, w_next, tol) {
                Some(z_next) if (z_next - predicted).norm() <= 0.5 * dz.norm() + 1e-12 => {
                    z = z_next;
                    t = t_next;
                    h = (h * 1.5).min(1.0);
                }
                _ => {
                    h *= 0.5;
                    if h < MIN_STEP {
                        return Err(fail(t, "step size underflow"));
                    }
                }
            }
        }
        Ok(z)
    }
}

/// Solves `g_M(z) = e^{i phi}` on the branch through `z = 1`.
pub fn invert_on_arc(spec: &ChannelSpec, phi: f64, tol: f64) -> Result<Complex64> {
    ArcInverter::new(spec)?.invert(phi, tol)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArcBoundRow {
    pub phi: f64,
    pub z: Complex64,
    /// `(|z| - 1) / phi^2`, zero at `phi = 0`.
    pub ratio: f64,
    pub g_w_abs: f64,
    pub residual: f64,
}

/// Quadratic growth of `|z_phi|` and the size of `g_W` along the arc.
#[derive(Clone, Debug, PartialEq)]
pub struct ArcBoundReport {
    pub rows: Vec<ArcBoundRow>,
    /// Largest observed `(|z_phi| - 1) / phi^2`.
    pub c_prime: f64,
    /// The ratio settles on the smallest quarter of the angles.
    pub bounded: bool,
    /// Largest `|phi|` below which every grid point has `|g_W(z_phi)| >= 1/2`.
    pub g_w_threshold: Option<f64>,
}

pub fn arc_quadratic_bound_check(spec: &ChannelSpec, phis: &[f64]) -> Result<ArcBoundReport> {
    let inv = ArcInverter::new(spec)?;
    let mut rows = Vec::with_capacity(phis.len());
    for &phi in phis {
        let z = inv.invert(phi, 1e-13)?;
        let residual = (inv.g_m.eval(z)?.value - Complex64::from_polar(1.0, phi)).norm();
        let ratio = if phi == 0.0 {
            0.0
        } else {
            (z.norm() - 1.0) / (phi * phi)
        };
        rows.push(ArcBoundRow {
            phi,
            z,
            ratio,
            g_w_abs: inv.g_w.eval(z)?.value.norm(),
            residual,
        });
    }
    let c_prime = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);

    let mut by_size: Vec<&ArcBoundRow> = rows.iter().filter(|r| r.phi != 0.0).collect();
    by_size.sort_by(|a, b| b.phi.abs().total_cmp(&a.phi.abs()));
    let smallest = &by_size[by_size.len() - (by_size.len() / 4).max(2).min(by_size.len())..];
    let (lo, hi) = smallest
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r.ratio), hi.max(r.ratio))
        });
    let bounded = smallest.is_empty() || hi - lo <= 0.1 * hi.abs().max(lo.abs()) + 1e-4;

    let mut ascending: Vec<&ArcBoundRow> = rows.iter().collect();
    ascending.sort_by(|a, b| a.phi.abs().total_cmp(&b.phi.abs()));
    let g_w_threshold = ascending
        .iter()
        .take_while(|r| r.g_w_abs >= 0.5)
        .last()
        .map(|r| r.phi.abs());

    Ok(ArcBoundReport {
        rows,
        c_prime,
        bounded,
        g_w_threshold,
    })
}
