//! Mean-based reconstruction and the experiments built on it.
//!
//! Candidates are always scanned in lexicographic order with `-1 < +1` and
//! the first candidate at minimal L1 distance wins.

mod certify;
mod experiment;
mod separation;

pub use certify::{certify_lower_bound, Certification, Certifier};
pub use experiment::{
    run_trial, trace_complexity_experiment, wilson, SuccessPoint, TrialOutcome, TrialSetup,
    MAX_EXPERIMENT_N, MIN_TRIALS,
};
pub use separation::{
    difference_l1, pair_distance, pairwise_separation, scaling_fit, separation_scaling,
    HistogramBin, PairMode, ScalingReport, ScalingRow, SeparationReport, TruncationRule,
    MAX_ALL_PAIRS_N,
};

pub use crate::mean_trace::input_poly_eval;

use rayon::prelude::*;

use crate::channel::{check_word, ChannelSpec};
use crate::error::{Error, Result};
use crate::mean_trace::{l1, MeanTraceModel};

/// Largest `n` for [`CandidateSet::Exhaustive`].
pub const MAX_EXHAUSTIVE_N: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CandidateSet {
    /// All of `{-1, +1}^n`.
    Exhaustive(usize),
    /// Distinct words of a common length.
    Explicit(Vec<Vec<i8>>),
}

/// Word number `k` of `{-1, +1}^n` in lexicographic order: bit `n - 1 - i`
/// of `k` set means `x_i = +1`.
pub fn word_from_index(k: u64, n: usize) -> Vec<i8> {
    (0..n)
        .map(|i| if (k >> (n - 1 - i)) & 1 == 1 { 1 } else { -1 })
        .collect()
}

impl CandidateSet {
    /// Checks the invariants and puts explicit lists in lexicographic order.
    pub fn validated(self) -> Result<Self> {
        match self {
            CandidateSet::Exhaustive(n) => {
                if n == 0 || n > MAX_EXHAUSTIVE_N {
                    return Err(Error::domain(
                        "candidates",
                        format!("exhaustive n = {n} is outside 1..={MAX_EXHAUSTIVE_N}"),
                    ));
                }
                Ok(CandidateSet::Exhaustive(n))
            }
            CandidateSet::Explicit(mut words) => {
                let n = words
                    .first()
                    .map(Vec::len)
                    .ok_or_else(|| Error::domain("candidates", "candidate set is empty"))?;
                for w in &words {
                    check_word(w)?;
                    if w.len() != n {
                        return Err(Error::domain(
                            "candidates",
                            "candidates have different lengths",
                        ));
                    }
                }
                words.sort();
                if words.windows(2).any(|p| p[0] == p[1]) {
                    return Err(Error::domain("candidates", "duplicate candidate"));
                }
                Ok(CandidateSet::Explicit(words))
            }
        }
    }

    pub fn n(&self) -> usize {
        match self {
            CandidateSet::Exhaustive(n) => *n,
            CandidateSet::Explicit(words) => words.first().map_or(0, Vec::len),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            CandidateSet::Exhaustive(n) => 1 << n,
            CandidateSet::Explicit(words) => words.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn word(&self, k: usize) -> Vec<i8> {
        match self {
            CandidateSet::Exhaustive(n) => word_from_index(k as u64, *n),
            CandidateSet::Explicit(words) => words[k].clone(),
        }
    }
}

/// Exact truncated mean traces of every candidate, ready for repeated argmin queries.
#[derive(Clone, Debug)]
pub struct Reconstructor {
    model: MeanTraceModel,
    candidates: CandidateSet,
    means: Vec<Vec<f64>>,
}

impl Reconstructor {
    pub fn new(spec: &ChannelSpec, candidates: CandidateSet, len: usize) -> Result<Self> {
        let candidates = candidates.validated()?;
        let model = MeanTraceModel::new(spec, candidates.n(), len)?;
        let means = (0..candidates.len())
            .into_par_iter()
            .map(|k| model.values(&candidates.word(k)))
            .collect();
        Ok(Self {
            model,
            candidates,
            means,
        })
    }

    pub fn model(&self) -> &MeanTraceModel {
        &self.model
    }

    pub fn candidates(&self) -> &CandidateSet {
        &self.candidates
    }

    pub fn candidate_mean(&self, k: usize) -> &[f64] {
        &self.means[k]
    }

    /// Index and distance of the L1-closest candidate.
    pub fn nearest(&self, mu_hat: &[f64]) -> Result<(usize, f64)> {
        if mu_hat.len() != self.model.len() {
            return Err(Error::domain(
                "mu_hat",
                format!(
                    "length {} does not match N = {}",
                    mu_hat.len(),
                    self.model.len()
                ),
            ));
        }
        let distances: Vec<f64> = self.means.par_iter().map(|m| l1(m, mu_hat)).collect();
        let mut best = (0, distances[0]);
        for (k, &d) in distances.iter().enumerate().skip(1) {
            if d < best.1 {
                best = (k, d);
            }
        }
        Ok(best)
    }

    pub fn reconstruct(&self, mu_hat: &[f64]) -> Result<Vec<i8>> {
        Ok(self.candidates.word(self.nearest(mu_hat)?.0))
    }
}

/// The candidate whose exact mean trace is L1-closest to `mu_hat`.
pub fn reconstruct(
    mu_hat: &[f64],
    spec: &ChannelSpec,
    candidates: CandidateSet,
    len: usize,
) -> Result<Vec<i8>> {
    Reconstructor::new(spec, candidates, len)?.reconstruct(mu_hat)
}
