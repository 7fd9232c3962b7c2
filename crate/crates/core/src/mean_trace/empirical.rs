use rayon::prelude::*;

use crate::channel::{apply_into, check_word, ChannelSpec, Trace};
use crate::error::{Error, Result};
use crate::rng::TraceRng;

/// Traces per parallel work item. Fixed so results do not depend on the pool size.
pub const SAMPLE_BATCH: u64 = 8192;

/// Running sums of zero-padded traces. Integer counts make merging exact and
/// order independent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeanAccumulator {
    sums: Vec<i64>,
    /// Number of traces that reach each position.
    reached: Vec<u64>,
    traces: u64,
}

impl MeanAccumulator {
    pub fn new(len: usize) -> Self {
        Self {
            sums: vec![0; len],
            reached: vec![0; len],
            traces: 0,
        }
    }

    pub fn push(&mut self, symbols: &[i8]) {
        for ((s, r), &y) in self.sums.iter_mut().zip(&mut self.reached).zip(symbols) {
            *s += i64::from(y);
            *r += 1;
        }
        self.traces += 1;
    }

    pub fn merge(&mut self, other: &Self) {
        assert_eq!(
            self.sums.len(),
            other.sums.len(),
            "accumulators of different length"
        );
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            *a += b;
        }
        for (a, b) in self.reached.iter_mut().zip(&other.reached) {
            *a += b;
        }
        self.traces += other.traces;
    }

    pub fn traces(&self) -> u64 {
        self.traces
    }

    pub fn finish(&self) -> Result<EmpiricalMeanTrace> {
        if self.traces == 0 {
            return Err(Error::domain("traces", "need at least one trace"));
        }
        let t = self.traces as f64;
        let (values, stderr) = self
            .sums
            .iter()
            .zip(&self.reached)
            .map(|(&s, &r)| {
                let mean = s as f64 / t;
                // Every nonzero padded symbol squares to 1.
                let var = if self.traces > 1 {
                    ((r as f64 - t * mean * mean) / (t - 1.0)).max(0.0)
                } else {
                    0.0
                };
                (mean, (var / t).sqrt())
            })
            .unzip();
        Ok(EmpiricalMeanTrace {
            values,
            stderr,
            traces: self.traces,
        })
    }
}

/// Coordinate means of zero-padded traces with their standard errors.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalMeanTrace {
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub traces: u64,
}

pub fn empirical_mean_trace<'a>(
    traces: impl IntoIterator<Item = &'a Trace>,
    len: usize,
) -> Result<EmpiricalMeanTrace> {
    let mut acc = MeanAccumulator::new(len);
    for trace in traces {
        acc.push(trace.symbols());
    }
    acc.finish()
}

/// Samples `t` traces of `x` (trace `k` uses stream `k` of `seed`) and
/// averages them. The result is independent of the rayon pool size.
pub fn sample_mean_trace(
    spec: &ChannelSpec,
    x: &[i8],
    t: u64,
    len: usize,
    seed: u64,
) -> Result<EmpiricalMeanTrace> {
    sample_accumulator(spec, x, t, len, seed)?.finish()
}

pub(crate) fn sample_accumulator(
    spec: &ChannelSpec,
    x: &[i8],
    t: u64,
    len: usize,
    seed: u64,
) -> Result<MeanAccumulator> {
    check_word(x)?;
    let batches = t.div_ceil(SAMPLE_BATCH);
    let parts: Vec<MeanAccumulator> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut acc = MeanAccumulator::new(len);
            let mut buf = Vec::with_capacity(4 * x.len());
            for k in b * SAMPLE_BATCH..((b + 1) * SAMPLE_BATCH).min(t) {
                let mut rng = TraceRng::new(seed, k);
                buf.clear();
                apply_into(spec, x, &mut rng, &mut buf).expect("input checked above");
                acc.push(&buf);
            }
            acc
        })
        .collect();
    let mut total = MeanAccumulator::new(len);
    for part in &parts {
        total.merge(part);
    }
    Ok(total)
}
