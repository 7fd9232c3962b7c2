//! Exact and empirical mean traces.
//!
//! The mean trace is linear in the input: `mu_x = (1 - 2 p_flip) V^T x` with
//! `V` the [`PositionWeights`]. Its power series satisfies
//! `sum_i mu_i z^{i-1} = C1 g_W(z) P_x(g_M(z))` with `C1 = (1 - 2 p_flip) E[|R|]`,
//! which [`verify_changevar`] checks with explicit error budgets.

mod empirical;
mod tail;
mod weights;

pub use empirical::{
    empirical_mean_trace, sample_mean_trace, EmpiricalMeanTrace, MeanAccumulator, SAMPLE_BATCH,
};
pub use tail::{choose_truncation, exact_truncation, length_sum_pmf, CHERNOFF_GRID, FINITE_S_MAX};
pub use weights::PositionWeights;

use num_complex::Complex64;

use crate::channel::{check_word, ChannelSpec};
use crate::error::{Error, Result};
use crate::genfun::{pgf_of_m, pgf_of_w, Pgf};

/// Truncation used by [`verify_changevar`].
pub const CHANGEVAR_EPS: f64 = 1e-12;

/// `E[Y'_x]` on positions `1..=len`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeanTrace {
    /// `values[j]` is the mean of position `j + 1`.
    pub values: Vec<f64>,
    pub n: usize,
    pub len: usize,
    /// Bound on `sum_{i > len} |mu_i|`.
    pub tail_bound: f64,
}

impl MeanTrace {
    pub fn l1_distance(&self, other: &[f64]) -> f64 {
        l1(&self.values, other)
    }
}

pub fn l1(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "mean traces of different length");
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// `P-bar_x(z)` truncated at `len`, with a bound on the discarded terms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesValue {
    pub value: Complex64,
    /// Bound on `|sum_{i > len} mu_i z^{i-1}|`.
    pub tail_bound: f64,
    /// Floating-point slack on `value`.
    pub rounding: f64,
}

/// Precomputed weights and generating functions for one `(spec, n, len)`.
#[derive(Clone, Debug)]
pub struct MeanTraceModel {
    spec: ChannelSpec,
    weights: PositionWeights,
    g_m: Pgf,
}

impl MeanTraceModel {
    pub fn new(spec: &ChannelSpec, n: usize, len: usize) -> Result<Self> {
        Ok(Self {
            spec: spec.clone(),
            weights: PositionWeights::new(spec, n, len)?,
            g_m: pgf_of_m(spec, 1e-15)?,
        })
    }

    pub fn spec(&self) -> &ChannelSpec {
        &self.spec
    }

    pub fn weights(&self) -> &PositionWeights {
        &self.weights
    }

    pub fn n(&self) -> usize {
        self.weights.n()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn check_input(&self, x: &[i8]) -> Result<()> {
        check_word(x)?;
        if x.len() != self.n() {
            return Err(Error::domain(
                "word",
                format!(
                    "length {} does not match the model's n = {}",
                    x.len(),
                    self.n()
                ),
            ));
        }
        Ok(())
    }

    /// `(1 - 2 p_flip) V^T x` without validation.
    pub fn values(&self, x: &[i8]) -> Vec<f64> {
        let bias = self.spec.bias();
        let mut v = self.weights.combine(x);
        v.iter_mut().for_each(|c| *c *= bias);
        v
    }

    pub fn mean_trace(&self, x: &[i8]) -> Result<MeanTrace> {
        self.check_input(x)?;
        let tail_bound = self.spec.bias() * self.row_tails(1.0)?.iter().sum::<f64>();
        Ok(MeanTrace {
            values: self.values(x),
            n: self.n(),
            len: self.len(),
            tail_bound,
        })
    }

    /// Per input bit `i`: `sum_{j > len} Pr[j in R_i] rho^{j-1}` (rounded up).
    pub fn row_tails(&self, rho: f64) -> Result<Vec<f64>> {
        if !(rho >= 1.0 && rho < self.g_m.radius()) {
            return Err(Error::domain(
                "|z|",
                format!(
                    "{rho} is outside [1, {}) for this channel",
                    self.g_m.radius()
                ),
            ));
        }
        let len = self.len();
        let form = self.spec.form();
        let full = form.replication_tail(0, rho);
        let g = self.g_m.eval(Complex64::new(rho, 0.0))?.value.re;
        (0..self.n())
            .map(|i| {
                if self
                    .spec
                    .max_block_len()
                    .is_some_and(|m| (i + 1) * m <= len)
                {
                    return Ok(0.0);
                }
                let pmf = self.weights.offset_pmf(i);
                let mut inside = 0.0;
                let mut reached = 0.0;
                let mut power = 1.0;
                for (s, &p) in pmf.iter().enumerate() {
                    if p > 0.0 {
                        inside += p * power * form.replication_tail(len - s, rho);
                        reached += p * power;
                    }
                    power *= rho;
                }
                // E[rho^S 1{S >= len}], by complement.
                let total = g.powi(i as i32);
                let beyond =
                    (total - reached).max(0.0) + 4.0 * (len + i + 1) as f64 * f64::EPSILON * total;
                let bound = inside + beyond * full;
                if bound.is_finite() {
                    Ok(bound * (1.0 + 1e-12))
                } else {
                    Err(Error::domain(
                        "|z|",
                        format!("tail series diverges at {rho}"),
                    ))
                }
            })
            .collect()
    }

    /// `sum_{i <= len} mu_i z^{i-1}` and a bound on the rest, for `1 <= |z| < radius`.
    pub fn series(&self, x: &[i8], z: Complex64) -> Result<SeriesValue> {
        self.check_input(x)?;
        let rho = z.norm();
        if rho < 1.0 - 1e-12 {
            return Err(Error::domain("|z|", format!("{rho} < 1")));
        }
        let tails = self.row_tails(rho.max(1.0))?;
        let mu = self.values(x);
        let mut value = Complex64::new(0.0, 0.0);
        let mut magnitude = 0.0;
        for c in mu.iter().rev() {
            value = value * z + c;
            magnitude = magnitude * rho + c.abs();
        }
        let tail_bound = self.spec.bias() * tails.iter().sum::<f64>();
        Ok(SeriesValue {
            value,
            tail_bound,
            rounding: 4.0 * (mu.len() + self.n()) as f64 * f64::EPSILON * magnitude.max(1.0),
        })
    }
}

/// `mu_x` truncated at `len`.
pub fn exact_mean_trace(spec: &ChannelSpec, x: &[i8], len: usize) -> Result<MeanTrace> {
    check_word(x)?;
    MeanTraceModel::new(spec, x.len(), len)?.mean_trace(x)
}

/// Truncated mean-trace power series at `z`.
pub fn series_eval(spec: &ChannelSpec, x: &[i8], z: Complex64, len: usize) -> Result<SeriesValue> {
    check_word(x)?;
    MeanTraceModel::new(spec, x.len(), len)?.series(x, z)
}

/// `P_x(w) = sum_i x_i w^{i-1}`.
pub fn input_poly_eval(x: &[i8], w: Complex64) -> Complex64 {
    x.iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * w + f64::from(c))
}

/// Both sides of the change-of-variable identity at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChangeVarCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
    /// Truncation plus evaluation error of both sides.
    pub budget: f64,
    pub len: usize,
}

impl ChangeVarCheck {
    pub fn holds(&self) -> bool {
        self.residual <= self.budget + 1e-9
    }
}

/// Compares the truncated mean-trace series with `C1 g_W(z) P_x(g_M(z))`.
pub fn verify_changevar(spec: &ChannelSpec, x: &[i8], z: Complex64) -> Result<ChangeVarCheck> {
    check_word(x)?;
    let len = choose_truncation(spec, x.len(), CHANGEVAR_EPS)?;
    let lhs = series_eval(spec, x, z, len)?;
    let g_m = pgf_of_m(spec, 1e-15)?.eval(z)?;
    let g_w = pgf_of_w(spec, 1e-15)?.eval(z)?;
    let c1 = spec.bias() * spec.replication_profile(1).expected_len;
    let p = input_poly_eval(x, g_m.value);
    let rhs = c1 * g_w.value * p;

    // |P_x| changes by at most sum_i (i-1) max(1,|w|)^{i-2} per unit of error in w.
    let w_abs = g_m.value.norm() + g_m.error;
    let slope: f64 = (1..x.len())
        .map(|k| k as f64 * w_abs.max(1.0).powi(k as i32 - 1))
        .sum();
    let p_abs: f64 = (0..x.len()).map(|k| w_abs.max(1.0).powi(k as i32)).sum();
    let rhs_err = c1
        * (g_w.error * (p.norm() + slope * g_m.error)
            + (g_w.value.norm() + g_w.error) * slope * g_m.error)
        + 8.0 * x.len() as f64 * f64::EPSILON * c1 * (g_w.value.norm() + g_w.error) * p_abs;
    Ok(ChangeVarCheck {
        lhs: lhs.value,
        rhs,
        residual: (lhs.value - rhs).norm(),
        budget: lhs.tail_bound + lhs.rounding + rhs_err,
        len,
    })
}
