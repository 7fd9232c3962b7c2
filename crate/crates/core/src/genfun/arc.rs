//! Maximum modulus of `{-1, 0, 1}` polynomials on short arcs of the unit circle.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// The arc `{e^{i phi} : |phi| <= pi / L}` sampled on `grid_points` angles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArcSpec {
    pub l: f64,
    pub grid_points: usize,
}

impl ArcSpec {
    pub fn new(l: f64, grid_points: usize) -> Result<Self> {
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::domain(
                "arc L",
                format!("{l} is not a positive real"),
            ));
        }
        if grid_points < 16 {
            return Err(Error::domain(
                "arc grid_points",
                format!("{grid_points} < 16"),
            ));
        }
        Ok(Self { l, grid_points })
    }

    /// `min(pi / L, pi)`.
    pub fn half_width(&self) -> f64 {
        (PI / self.l).min(PI)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArcMaximum {
    pub phi: f64,
    pub w: Complex64,
    pub max_abs: f64,
}

/// `sum_j a_j w^j`.
pub fn littlewood_eval(coeffs: &[i8], w: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &a| acc * w + f64::from(a))
}

const REFINED_PEAKS: usize = 8;

/// Largest `|A(e^{i phi})|` over the arc: a uniform scan of
/// `max(grid_points, 1024, 64 * len)` angles, then golden-section refinement
/// around the best local maxima. The reported value is attained at the
/// reported angle, so it never exceeds the true maximum.
pub fn arc_max(coeffs: &[i8], arc: &ArcSpec) -> Result<ArcMaximum> {
    if let Some(&a) = coeffs.iter().find(|&&a| !(-1..=1).contains(&a)) {
        return Err(Error::domain(
            "arc_max coefficients",
            format!("{a} is not in {{-1, 0, 1}}"),
        ));
    }
    if coeffs.iter().all(|&a| a == 0) {
        return Err(Error::domain(
            "arc_max coefficients",
            "all coefficients are zero",
        ));
    }
    let ArcSpec { l, grid_points } = ArcSpec::new(arc.l, arc.grid_points)?;
    let half = ArcSpec { l, grid_points }.half_width();
    let points = grid_points.max(1024).max(64 * coeffs.len());
    let step = 2.0 * half / (points - 1) as f64;
    let angle = |k: usize| (-half + step * k as f64).min(half);
    let modulus = |phi: f64| littlewood_eval(coeffs, Complex64::from_polar(1.0, phi)).norm();

    let values: Vec<f64> = (0..points).map(|k| modulus(angle(k))).collect();
    let mut peaks: Vec<usize> = (0..points)
        .filter(|&k| {
            (k == 0 || values[k] >= values[k - 1])
                && (k + 1 == points || values[k] >= values[k + 1])
        })
        .collect();
    peaks.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    peaks.truncate(REFINED_PEAKS);

    let mut best_phi = angle(peaks[0]);
    let mut best = values[peaks[0]];
    for &k in &peaks {
        let lo = angle(k.saturating_sub(1));
        let hi = angle((k + 1).min(points - 1));
        let (phi, v) = golden_max(&modulus, lo, hi);
        if v > best {
            best = v;
            best_phi = phi;
        }
    }
    Ok(ArcMaximum {
        phi: best_phi,
        w: Complex64::from_polar(1.0, best_phi),
        max_abs: best,
    })
}

fn golden_max(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > 1e-13 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        }
    }
    [(lo, f(lo)), (hi, f(hi)), (x1, f1), (x2, f2)]
        .into_iter()
        .fold((lo, f64::NEG_INFINITY), |best, cand| {
            if cand.1 > best.1 {
                cand
            } else {
                best
            }
        })
}
