//! Success rate of mean-based reconstruction as a function of the trace count.
//!
//! Trial `k` draws its input from `derive_seed(seed, [k, 0])` and its traces
//! from `derive_seed(seed, [k, 1])`, trace `j` on stream `j`. Every `t` in the
//! grid reuses the same inputs and the first `t` traces of the same streams,
//! so larger `t` strictly extends the evidence of smaller `t`.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{CandidateSet, Reconstructor};
use crate::channel::ChannelSpec;
use crate::error::{Error, Result};
use crate::mean_trace::{choose_truncation, l1, sample_mean_trace};
use crate::rng::derive_seed;

pub const MAX_EXPERIMENT_N: usize = 12;
pub const MIN_TRIALS: u64 = 20;
/// Truncation of the mean traces compared by the experiment.
pub const EXPERIMENT_EPS: f64 = 1e-9;

/// Wilson score interval at 95%.
pub fn wilson(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.96f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuccessPoint {
    pub t: u64,
    pub successes: u64,
    pub trials: u64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialOutcome {
    pub x: Vec<i8>,
    pub estimate: Vec<i8>,
    /// `||mu-hat - mu_x||_1` over the truncated window.
    pub l1_error: f64,
    pub success: bool,
}

/// Shared state for many trials on one `(spec, n)`.
#[derive(Clone, Debug)]
pub struct TrialSetup {
    reconstructor: Reconstructor,
    seed: u64,
}

impl TrialSetup {
    pub fn new(spec: &ChannelSpec, n: usize, seed: u64) -> Result<Self> {
        if n == 0 || n > MAX_EXPERIMENT_N {
            return Err(Error::domain(
                "n",
                format!("{n} is outside 1..={MAX_EXPERIMENT_N}"),
            ));
        }
        let len = choose_truncation(spec, n, EXPERIMENT_EPS)?;
        Ok(Self {
            reconstructor: Reconstructor::new(spec, CandidateSet::Exhaustive(n), len)?,
            seed,
        })
    }

    pub fn reconstructor(&self) -> &Reconstructor {
        &self.reconstructor
    }

    pub fn len(&self) -> usize {
        self.reconstructor.model().len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn input(&self, trial: u64) -> Vec<i8> {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, &[trial, 0]));
        (0..self.reconstructor.model().n())
            .map(|_| if rng.random::<bool>() { 1 } else { -1 })
            .collect()
    }
}

/// One reconstruction from `t` traces.
pub fn run_trial(setup: &TrialSetup, trial: u64, t: u64) -> Result<TrialOutcome> {
    if t == 0 {
        return Err(Error::domain("t", "need at least one trace"));
    }
    let model = setup.reconstructor.model();
    let x = setup.input(trial);
    let mu_hat = sample_mean_trace(
        model.spec(),
        &x,
        t,
        model.len(),
        derive_seed(setup.seed, &[trial, 1]),
    )?;
    let l1_error = l1(&mu_hat.values, &model.values(&x));
    let estimate = setup.reconstructor.reconstruct(&mu_hat.values)?;
    Ok(TrialOutcome {
        success: estimate == x,
        x,
        estimate,
        l1_error,
    })
}

pub fn trace_complexity_experiment(
    spec: &ChannelSpec,
    n: usize,
    t_grid: &[u64],
    trials: u64,
    seed: u64,
) -> Result<Vec<SuccessPoint>> {
    if trials < MIN_TRIALS {
        return Err(Error::domain("trials", format!("{trials} < {MIN_TRIALS}")));
    }
    if t_grid.contains(&0) {
        return Err(Error::domain("t_grid", "trace counts must be positive"));
    }
    let setup = TrialSetup::new(spec, n, seed)?;
    t_grid
        .iter()
        .map(|&t| {
            let outcomes = (0..trials)
                .into_par_iter()
                .map(|k| run_trial(&setup, k, t).map(|o| o.success))
                .collect::<Result<Vec<bool>>>()?;
            let successes = outcomes.iter().filter(|&&s| s).count() as u64;
            let (ci_lo, ci_hi) = wilson(successes, trials);
            Ok(SuccessPoint {
                t,
                successes,
                trials,
                ci_lo,
                ci_hi,
            })
        })
        .collect()
}
