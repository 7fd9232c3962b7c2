//! Truncation points from the tail of `S_n = M_1 + ... + M_n`.
//!
//! Every trace position beyond `N` is occupied only if `S_n > N`, so `N` is
//! chosen with `Pr[S_n > N] <= eps`. The Chernoff bound
//! `Pr[S_n >= N + 1] <= g_M(e^s)^n e^{-s (N + 1)}` is minimized over a fixed
//! grid of `s`; the exact convolution tail is the fallback and the oracle.

use super::weights::convolve_truncated;
use crate::channel::ChannelSpec;
use crate::error::{Error, Result};
use crate::genfun::pgf_of_m;

/// Number of `s` values tried, evenly spaced in `(0, s_max)`.
pub const CHERNOFF_GRID: usize = 256;
/// Upper end of the `s` grid when `M` has finite support.
pub const FINITE_S_MAX: f64 = 40.0;

fn check_args(n: usize, eps: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("n", "input length must be at least 1"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::domain("eps", format!("{eps} is outside (0, 1)")));
    }
    Ok(())
}

/// Smallest `N` on the Chernoff grid with `Pr[S_n > N] <= eps`, capped at
/// `n * max M` for finite supports.
pub fn choose_truncation(spec: &ChannelSpec, n: usize, eps: f64) -> Result<usize> {
    check_args(n, eps)?;
    let g = pgf_of_m(spec, 1e-15)?;
    let s_max = match spec.max_block_len() {
        Some(_) => FINITE_S_MAX,
        None => g.radius().ln(),
    };
    let ln_eps = eps.ln();
    let best = (1..=CHERNOFF_GRID)
        .map(|k| s_max * k as f64 / (CHERNOFF_GRID + 1) as f64)
        .filter_map(|s| {
            let log_g = g.log_mgf(s)?;
            let need = (n as f64 * log_g - ln_eps) / s;
            need.is_finite().then(|| need.ceil().max(1.0) - 1.0)
        })
        .fold(f64::INFINITY, f64::min);
    let chernoff = if best.is_finite() {
        best as usize
    } else {
        exact_truncation(spec, n, eps)?
    };
    Ok(match spec.max_block_len() {
        Some(m) => chernoff.min(n * m),
        None => chernoff,
    }
    .max(1))
}

/// `Pr[S_n = s]` for `s = 0..=horizon`, exact.
pub fn length_sum_pmf(spec: &ChannelSpec, n: usize, horizon: usize) -> Vec<f64> {
    let m_pmf = spec.m_pmf(horizon);
    let mut pmf = vec![0.0; horizon + 1];
    pmf[0] = 1.0;
    for _ in 0..n {
        pmf = convolve_truncated(&pmf, &m_pmf);
    }
    pmf
}

/// Smallest `N >= 1` with exact `Pr[S_n > N] <= eps`, from the n-fold convolution.
pub fn exact_truncation(spec: &ChannelSpec, n: usize, eps: f64) -> Result<usize> {
    check_args(n, eps)?;
    let mut horizon = match spec.max_block_len() {
        Some(m) => n * m,
        None => 64.max(2 * n),
    };
    loop {
        let pmf = length_sum_pmf(spec, n, horizon);
        let mut below = 0.0;
        for (s, &p) in pmf.iter().enumerate() {
            below += p;
            if s >= 1 && 1.0 - below <= eps {
                return Ok(s);
            }
        }
        if spec.max_block_len().is_some() {
            return Ok(horizon.max(1));
        }
        horizon *= 2;
    }
}
