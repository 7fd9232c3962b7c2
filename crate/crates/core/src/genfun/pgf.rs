use num_complex::Complex64;

use crate::channel::{ChannelSpec, Form, LengthLaw};
use crate::error::{Error, Result};

/// `(a + b z) / (c + d z)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Mobius {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl Mobius {
    fn eval(&self, z: Complex64) -> Complex64 {
        (self.a + self.b * z) / (self.c + self.d * z)
    }

    fn derivative(&self, z: Complex64) -> Complex64 {
        let den = self.c + self.d * z;
        (self.b * self.c - self.a * self.d) / (den * den)
    }
}

/// A value together with a bound on its absolute error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub value: Complex64,
    pub error: f64,
}

/// Probability generating function `sum_j p_j z^j` of a nonnegative integer
/// law, stored as (possibly truncated) coefficients plus an optional exact
/// rational form.
#[derive(Clone, Debug, PartialEq)]
pub struct Pgf {
    coefficients: Vec<f64>,
    discarded_mass: f64,
    closed_form: Option<Mobius>,
    radius: f64,
    /// `p_j <= scale * exp(-decay * j)`, used to bound the discarded series.
    envelope: Option<(f64, f64)>,
}

impl Pgf {
    /// Exact finite-support law.
    pub fn from_pmf(coefficients: Vec<f64>) -> Self {
        Pgf {
            coefficients,
            discarded_mass: 0.0,
            closed_form: None,
            radius: f64::INFINITY,
            envelope: None,
        }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn discarded_mass(&self) -> f64 {
        self.discarded_mass
    }

    /// Lower bound on the radius of convergence.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn has_closed_form(&self) -> bool {
        self.closed_form.is_some()
    }

    fn check_domain(&self, z: Complex64) -> Result<()> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::domain("pgf argument", format!("{z} is not finite")));
        }
        if z.norm() >= self.radius {
            return Err(Error::domain(
                "pgf argument",
                format!(
                    "|z| = {} is not below the convergence radius {}",
                    z.norm(),
                    self.radius
                ),
            ));
        }
        Ok(())
    }

    /// Evaluates at `z`, preferring the closed form when there is one.
    pub fn eval(&self, z: Complex64) -> Result<Evaluation> {
        self.check_domain(z)?;
        match self.closed_form {
            Some(f) => {
                let value = f.eval(z);
                Ok(Evaluation {
                    value,
                    error: 8.0 * f64::EPSILON * (1.0 + value.norm()),
                })
            }
            None => self.eval_series(z),
        }
    }

    /// Evaluates the retained coefficients and bounds the discarded series.
    pub fn eval_series(&self, z: Complex64) -> Result<Evaluation> {
        self.check_domain(z)?;
        let r = z.norm();
        let value = horner(&self.coefficients, z);
        let magnitude = horner_abs(&self.coefficients, r);
        let rounding = 2.0 * (self.coefficients.len() as f64 + 1.0) * f64::EPSILON * magnitude;
        Ok(Evaluation {
            value,
            error: self.remainder_bound(r) + rounding,
        })
    }

    /// Bound on `|sum_{j > K} p_j z^j|` for `|z| = r`.
    pub fn remainder_bound(&self, r: f64) -> f64 {
        if self.discarded_mass == 0.0 {
            return 0.0;
        }
        let geometric = match self.envelope {
            Some((scale, decay)) => {
                let rho = r * (-decay).exp();
                if rho < 1.0 {
                    scale * rho.powi(self.coefficients.len() as i32) / (1.0 - rho)
                } else {
                    f64::INFINITY
                }
            }
            None => f64::INFINITY,
        };
        if r <= 1.0 {
            geometric.min(self.discarded_mass)
        } else {
            geometric
        }
    }

    pub fn eval_derivative(&self, z: Complex64) -> Result<Complex64> {
        self.check_domain(z)?;
        Ok(match self.closed_form {
            Some(f) => f.derivative(z),
            None => {
                let derived: Vec<f64> = self
                    .coefficients
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(j, &p)| j as f64 * p)
                    .collect();
                horner(&derived, z)
            }
        })
    }

    /// `g'(1)`, the mean of the law.
    pub fn derivative_at_one(&self) -> f64 {
        match self.closed_form {
            Some(f) => f.derivative(Complex64::new(1.0, 0.0)).re,
            None => self
                .coefficients
                .iter()
                .enumerate()
                .map(|(j, &p)| j as f64 * p)
                .sum(),
        }
    }

    /// `ln g(e^s)` for real `s`, stable for large `s` on finite supports.
    pub(crate) fn log_mgf(&self, s: f64) -> Option<f64> {
        if s.exp() >= self.radius {
            return None;
        }
        match self.closed_form {
            Some(f) => {
                let v = f.eval(Complex64::new(s.exp(), 0.0)).re;
                (v > 0.0 && v.is_finite()).then(|| v.ln())
            }
            None => {
                if self.discarded_mass > 0.0 {
                    return None;
                }
                let top = self
                    .coefficients
                    .iter()
                    .enumerate()
                    .filter(|(_, &p)| p > 0.0)
                    .map(|(j, &p)| p.ln() + s * j as f64)
                    .fold(f64::NEG_INFINITY, f64::max);
                let sum: f64 = self
                    .coefficients
                    .iter()
                    .enumerate()
                    .filter(|(_, &p)| p > 0.0)
                    .map(|(j, &p)| (p.ln() + s * j as f64 - top).exp())
                    .sum();
                Some(top + sum.ln())
            }
        }
    }
}

pub(crate) fn horner(coefficients: &[f64], z: Complex64) -> Complex64 {
    coefficients
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

fn horner_abs(coefficients: &[f64], r: f64) -> f64 {
    coefficients
        .iter()
        .rev()
        .fold(0.0, |acc, &c| acc * r + c.abs())
}

fn check_trunc_eps(trunc_eps: f64) -> Result<()> {
    if trunc_eps > 0.0 && trunc_eps <= 1e-6 {
        Ok(())
    } else {
        Err(Error::domain(
            "trunc_eps",
            format!("{trunc_eps} is outside (0, 1e-6]"),
        ))
    }
}

/// Geometric decay rate `1 - s` of the unbounded-support forms.
fn geometric_fail(form: &Form) -> Option<f64> {
    match form {
        Form::InsertThenKeep { sigma, .. } if *sigma < 1.0 => Some(1.0 - sigma),
        Form::Replicate(LengthLaw::Geometric { p }) if *p < 1.0 => Some(1.0 - p),
        _ => None,
    }
}

/// Generating function of the block length `M`.
pub fn pgf_of_m(spec: &ChannelSpec, trunc_eps: f64) -> Result<Pgf> {
    check_trunc_eps(trunc_eps)?;
    let form = spec.form();
    if let Some(m) = spec.max_block_len() {
        return Ok(Pgf::from_pmf(spec.m_pmf(m)));
    }
    let fail = geometric_fail(form).expect("unbounded support is geometric");
    let mut len = 1;
    while form.tail(len) > trunc_eps {
        len += 1;
    }
    let closed_form = match form {
        Form::InsertThenKeep { sigma, keep } => Mobius {
            a: sigma * (1.0 - keep),
            b: sigma * keep,
            c: 1.0,
            d: -fail,
        },
        Form::Replicate(LengthLaw::Geometric { p }) => Mobius {
            a: 0.0,
            b: *p,
            c: 1.0,
            d: -fail,
        },
        _ => unreachable!(),
    };
    let cert = spec.tail_certificate();
    Ok(Pgf {
        coefficients: spec.m_pmf(len - 1),
        discarded_mass: form.tail(len),
        closed_form: Some(closed_form),
        radius: cert.alpha.exp(),
        envelope: Some((cert.kappa, cert.alpha)),
    })
}

/// Generating function of `W(j) = Pr[j + 1 in R] / E[|R|]`.
pub fn pgf_of_w(spec: &ChannelSpec, trunc_eps: f64) -> Result<Pgf> {
    check_trunc_eps(trunc_eps)?;
    let form = spec.form();
    let expected = form.expected_replications();
    if expected <= 0.0 {
        return Err(crate::error::ChannelViolation::NeverReplicates.into());
    }
    if let Some(m) = spec.max_block_len() {
        let coefficients = (1..=m).map(|k| form.replication(k) / expected).collect();
        return Ok(Pgf::from_pmf(coefficients));
    }
    let fail = geometric_fail(form).expect("unbounded support is geometric");
    // Both geometric forms give W = Geom0(1 - fail), so sum_{j >= len} W(j) = fail^len.
    let mut len = 1;
    while fail.powi(len as i32) > trunc_eps {
        len += 1;
    }
    let coefficients = (1..=len).map(|k| form.replication(k) / expected).collect();
    let cert = spec.tail_certificate();
    Ok(Pgf {
        coefficients,
        discarded_mass: fail.powi(len as i32),
        closed_form: Some(Mobius {
            a: 1.0 - fail,
            b: 0.0,
            c: 1.0,
            d: -fail,
        }),
        radius: cert.alpha.exp(),
        envelope: Some((cert.kappa * (-cert.alpha).exp() / expected, cert.alpha)),
    })
}
