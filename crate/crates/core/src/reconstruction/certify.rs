//! Certified lower bounds on mean-trace separation.
//!
//! For `|z| >= 1`,
//! `||mu_x^N - mu_x'^N||_1 >= |z|^{-N} (|P-bar_x(z) - P-bar_x'(z)| - tail(z))`,
//! where `tail(z)` bounds the series beyond `N`. The point `z` comes from the
//! arc maximum of the half difference polynomial, pulled back through `g_M`,
//! and `P-bar_x - P-bar_x'` is evaluated through the generating functions.
//! The left side is computed independently from the position weights.

use num_complex::Complex64;

use super::separation::{difference_l1, half_difference};
use crate::channel::ChannelSpec;
use crate::error::{Error, Result};
use crate::genfun::{arc_max, littlewood_eval, ArcInverter, ArcSpec};
use crate::mean_trace::{choose_truncation, MeanTraceModel};

/// Truncation of the certified traces.
pub const CERTIFY_EPS: f64 = 1e-12;
/// Angles scanned on the arc before refinement.
pub const CERTIFY_GRID: usize = 2048;

#[derive(Clone, Debug, PartialEq)]
pub struct Certification {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
    /// `rhs <= 0`, so the bound says nothing.
    pub vacuous: bool,
    pub phi: f64,
    pub z: Complex64,
    pub arc_max_abs: f64,
    /// Bound on the discarded part of the series at `z`.
    pub tail: f64,
    pub len: usize,
}

impl Certification {
    /// `lhs / rhs` when the bound is informative.
    pub fn ratio(&self) -> Option<f64> {
        (!self.vacuous).then(|| self.lhs / self.rhs)
    }
}

/// Reusable state for certifying many pairs of one length.
#[derive(Clone, Debug)]
pub struct Certifier {
    model: MeanTraceModel,
    inverter: ArcInverter,
    arc: ArcSpec,
    c1: f64,
}

impl Certifier {
    /// `l` is the arc parameter; the arc is `|phi| <= pi / l`.
    pub fn new(spec: &ChannelSpec, n: usize, l: f64) -> Result<Self> {
        let len = choose_truncation(spec, n, CERTIFY_EPS)?;
        Ok(Self {
            model: MeanTraceModel::new(spec, n, len)?,
            inverter: ArcInverter::new(spec)?,
            arc: ArcSpec::new(l, CERTIFY_GRID)?,
            c1: spec.bias() * spec.replication_profile(1).expected_len,
        })
    }

    /// `L = n^{1/3}`.
    pub fn with_default_arc(spec: &ChannelSpec, n: usize) -> Result<Self> {
        Self::new(spec, n, (n as f64).cbrt())
    }

    pub fn len(&self) -> usize {
        self.model.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn certify(&self, x: &[i8], x_prime: &[i8]) -> Result<Certification> {
        let d = half_difference(x, x_prime)?;
        if d.len() != self.model.n() {
            return Err(Error::domain("pair", "length does not match the certifier"));
        }
        if d.iter().all(|&v| v == 0) {
            return Err(Error::domain("pair", "x and x' are equal"));
        }
        let spec = self.model.spec();
        let lhs = difference_l1(self.model.weights(), spec.bias(), &d);

        let peak = arc_max(&d, &self.arc)?;
        let z = self.inverter.invert(peak.phi, 1e-12)?;
        let w = self.inverter.g_m().eval(z)?;
        let g_w = self.inverter.g_w().eval(z)?;
        // P_x - P_x' = 2 P_d.
        let p_d = littlewood_eval(&d, w.value);
        let gap = (2.0 * self.c1 * g_w.value * p_d).norm();

        let rho = z.norm().max(1.0);
        let tails = self.model.row_tails(rho)?;
        let tail = 2.0
            * spec.bias()
            * d.iter()
                .zip(&tails)
                .filter(|(&v, _)| v != 0)
                .map(|(_, t)| t)
                .sum::<f64>();
        let slack = 2.0
            * self.c1
            * (g_w.error * p_d.norm()
                + (g_w.value.norm() + g_w.error) * self.p_slope(&d, w.value.norm()) * w.error);
        let rhs = rho.powi(-(self.len() as i32)) * (gap - tail - slack);
        Ok(Certification {
            lhs,
            rhs,
            pass: lhs >= rhs - 1e-9,
            vacuous: rhs <= 0.0,
            phi: peak.phi,
            z,
            arc_max_abs: peak.max_abs,
            tail,
            len: self.len(),
        })
    }

    /// Lipschitz constant of `P_d` on the disk of radius `r`.
    fn p_slope(&self, d: &[i8], r: f64) -> f64 {
        let r = r.max(1.0);
        d.iter()
            .enumerate()
            .skip(1)
            .map(|(k, &v)| f64::from(v.abs()) * k as f64 * r.powi(k as i32 - 1))
            .sum()
    }
}

/// Certifies one pair with `L = l`.
pub fn certify_lower_bound(
    spec: &ChannelSpec,
    x: &[i8],
    x_prime: &[i8],
    l: f64,
) -> Result<Certification> {
    Certifier::new(spec, x.len(), l)?.certify(x, x_prime)
}
