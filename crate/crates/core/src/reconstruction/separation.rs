//! Minimum L1 distance between truncated mean traces.
//!
//! `mu_x - mu_x' = 2 (1 - 2 p_flip) V^T d` with `d = (x - x') / 2`, so the
//! distance only depends on `d`. Each `d` in `{-1, 0, 1}^n` whose first nonzero
//! entry is `+1` stands for `2^{n - |supp d|}` unordered pairs, which turns
//! the all-pairs sweep into `(3^n - 1) / 2` distance evaluations.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::MAX_EXHAUSTIVE_N;
use crate::channel::{check_word, ChannelSpec};
use crate::error::{Error, Result};
use crate::mean_trace::{choose_truncation, PositionWeights};

/// Largest `n` accepted by [`PairMode::AllPairs`].
pub const MAX_ALL_PAIRS_N: usize = 12;

const BATCH: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairMode {
    AllPairs,
    /// `pairs` uniformly random distinct pairs plus the hard families:
    /// single flips, adjacent transpositions and `x` versus `-x` for
    /// alternating `x`.
    Sampled {
        pairs: u64,
        seed: u64,
    },
}

/// Pair counts per quarter decade of distance, `[lo, hi)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeparationReport {
    pub n: usize,
    pub len: usize,
    pub min_l1: f64,
    /// Lexicographically ordered pair attaining `min_l1`.
    pub argmin_pair: (Vec<i8>, Vec<i8>),
    /// Number of unordered pairs covered.
    pub pairs: u64,
    pub histogram: Vec<HistogramBin>,
}

/// `||V^T d||_1 * 2 (1 - 2 p_flip)` for a difference vector `d = (x - x') / 2`.
pub fn difference_l1(weights: &PositionWeights, bias: f64, d: &[i8]) -> f64 {
    2.0 * bias * weights.combine(d).iter().map(|v| v.abs()).sum::<f64>()
}

/// `||mu_x^N - mu_x'^N||_1` through the difference vector.
pub fn pair_distance(spec: &ChannelSpec, x: &[i8], x_prime: &[i8], len: usize) -> Result<f64> {
    let d = half_difference(x, x_prime)?;
    let weights = PositionWeights::new(spec, x.len(), len)?;
    Ok(difference_l1(&weights, spec.bias(), &d))
}

pub(crate) fn half_difference(x: &[i8], x_prime: &[i8]) -> Result<Vec<i8>> {
    check_word(x)?;
    check_word(x_prime)?;
    if x.len() != x_prime.len() {
        return Err(Error::domain("pair", "words have different lengths"));
    }
    Ok(x.iter().zip(x_prime).map(|(a, b)| (a - b) / 2).collect())
}

/// `d` with its sign fixed so the first nonzero entry is `+1`.
fn normalized(mut d: Vec<i8>) -> Vec<i8> {
    if d.iter().find(|&&v| v != 0).is_some_and(|&v| v < 0) {
        d.iter_mut().for_each(|v| *v = -*v);
    }
    d
}

/// Base-3 digit `i` of `k` (most significant first) as `0, +1, -1`.
fn difference_from_index(k: u64, n: usize) -> Vec<i8> {
    let mut d = vec![0i8; n];
    let mut rest = k;
    for slot in d.iter_mut().rev() {
        *slot = match rest % 3 {
            0 => 0,
            1 => 1,
            _ => -1,
        };
        rest /= 3;
    }
    d
}

/// The lexicographically smallest pair with half difference `d`.
fn representative(d: &[i8]) -> (Vec<i8>, Vec<i8>) {
    let x: Vec<i8> = d.iter().map(|&v| if v == 0 { -1 } else { v }).collect();
    let y: Vec<i8> = d.iter().map(|&v| if v == 0 { -1 } else { -v }).collect();
    if x <= y {
        (x, y)
    } else {
        (y, x)
    }
}

#[derive(Clone, Debug)]
struct Partial {
    best: Option<(f64, Vec<i8>)>,
    pairs: u64,
    bins: Vec<u64>,
}

/// Quarter-decade bins from `1e-20` to `1e2`; bin 0 also takes anything smaller.
const BIN_FLOOR: f64 = -20.0;
const BINS: usize = 88;

fn bin_of(distance: f64) -> usize {
    if distance <= 0.0 {
        return 0;
    }
    let b = ((distance.log10() - BIN_FLOOR) * 4.0).floor();
    b.clamp(0.0, (BINS - 1) as f64) as usize
}

impl Partial {
    fn new() -> Self {
        Self {
            best: None,
            pairs: 0,
            bins: vec![0; BINS],
        }
    }

    fn add(&mut self, distance: f64, d: &[i8], weight: u64) {
        self.pairs += weight;
        self.bins[bin_of(distance)] += weight;
        if self.best.as_ref().is_none_or(|(b, _)| distance < *b) {
            self.best = Some((distance, d.to_vec()));
        }
    }

    fn merge(&mut self, other: Partial) {
        self.pairs += other.pairs;
        for (a, b) in self.bins.iter_mut().zip(&other.bins) {
            *a += b;
        }
        if let Some((dist, d)) = other.best {
            if self.best.as_ref().is_none_or(|(b, _)| dist < *b) {
                self.best = Some((dist, d));
            }
        }
    }
}

pub fn pairwise_separation(
    spec: &ChannelSpec,
    n: usize,
    len: usize,
    mode: PairMode,
) -> Result<SeparationReport> {
    if n < 2 {
        return Err(Error::domain("n", "separation needs n >= 2"));
    }
    let weights = PositionWeights::new(spec, n, len)?;
    let bias = spec.bias();
    let total = match mode {
        PairMode::AllPairs => {
            if n > MAX_ALL_PAIRS_N {
                return Err(Error::domain(
                    "pair mode",
                    format!("all_pairs is limited to n <= {MAX_ALL_PAIRS_N}; use sampled mode"),
                ));
            }
            let count = 3u64.pow(n as u32);
            let parts: Vec<Partial> = (0..count.div_ceil(BATCH))
                .into_par_iter()
                .map(|b| {
                    let mut part = Partial::new();
                    for k in b * BATCH..((b + 1) * BATCH).min(count) {
                        let d = difference_from_index(k, n);
                        if d.iter().find(|&&v| v != 0) != Some(&1) {
                            continue;
                        }
                        let support = d.iter().filter(|&&v| v != 0).count();
                        part.add(difference_l1(&weights, bias, &d), &d, 1 << (n - support));
                    }
                    part
                })
                .collect();
            merge_in_order(parts)
        }
        PairMode::Sampled { pairs, seed } => {
            let mut diffs = hard_families(n);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..pairs {
                let (x, y) = loop {
                    let x: Vec<i8> = (0..n)
                        .map(|_| if rng.random::<bool>() { 1 } else { -1 })
                        .collect();
                    let y: Vec<i8> = (0..n)
                        .map(|_| if rng.random::<bool>() { 1 } else { -1 })
                        .collect();
                    if x != y {
                        break (x, y);
                    }
                };
                diffs.push(normalized(half_difference(&x, &y)?));
            }
            let parts: Vec<Partial> = diffs
                .par_chunks(BATCH as usize)
                .map(|chunk| {
                    let mut part = Partial::new();
                    for d in chunk {
                        part.add(difference_l1(&weights, bias, d), d, 1);
                    }
                    part
                })
                .collect();
            merge_in_order(parts)
        }
    };
    let (min_l1, d) = total.best.expect("at least one pair");
    let histogram = total
        .bins
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(b, &count)| HistogramBin {
            lo: 10f64.powf(BIN_FLOOR + b as f64 / 4.0),
            hi: 10f64.powf(BIN_FLOOR + (b + 1) as f64 / 4.0),
            count,
        })
        .collect();
    Ok(SeparationReport {
        n,
        len,
        min_l1,
        argmin_pair: representative(&d),
        pairs: total.pairs,
        histogram,
    })
}

fn merge_in_order(parts: Vec<Partial>) -> Partial {
    let mut total = Partial::new();
    for part in parts {
        total.merge(part);
    }
    total
}

fn hard_families(n: usize) -> Vec<Vec<i8>> {
    let mut out = Vec::new();
    for i in 0..n {
        let mut d = vec![0; n];
        d[i] = 1;
        out.push(d);
    }
    for i in 0..n - 1 {
        let mut d = vec![0; n];
        d[i] = 1;
        d[i + 1] = -1;
        out.push(d);
    }
    out.push((0..n).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect());
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TruncationRule {
    Fixed(usize),
    /// [`choose_truncation`] at this `eps`.
    Eps(f64),
    /// `ceil(factor * n)`.
    Linear(f64),
}

impl TruncationRule {
    pub fn resolve(&self, spec: &ChannelSpec, n: usize) -> Result<usize> {
        match *self {
            TruncationRule::Fixed(len) => Ok(len),
            TruncationRule::Eps(eps) => choose_truncation(spec, n, eps),
            TruncationRule::Linear(factor) => {
                if !(factor.is_finite() && factor > 0.0) {
                    return Err(Error::domain(
                        "truncation factor",
                        format!("{factor} is not positive"),
                    ));
                }
                Ok(((factor * n as f64).ceil() as usize).max(1))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingRow {
    pub n: usize,
    pub len: usize,
    pub min_l1: f64,
    pub argmin_pair: (Vec<i8>, Vec<i8>),
}

/// Per-`n` minima and the least-squares line `ln(1 / min_l1) = slope n^{1/3} + intercept`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
}

pub fn separation_scaling(
    spec: &ChannelSpec,
    n_values: &[usize],
    rule: TruncationRule,
) -> Result<ScalingReport> {
    if let Some(&n) = n_values
        .iter()
        .find(|&&n| !(2..=MAX_ALL_PAIRS_N).contains(&n))
    {
        return Err(Error::domain(
            "n_values",
            format!("{n} is outside 2..={MAX_ALL_PAIRS_N}"),
        ));
    }
    const { assert!(MAX_ALL_PAIRS_N <= MAX_EXHAUSTIVE_N) };
    let rows = n_values
        .iter()
        .map(|&n| {
            let len = rule.resolve(spec, n)?;
            let report = pairwise_separation(spec, n, len, PairMode::AllPairs)?;
            Ok(ScalingRow {
                n,
                len,
                min_l1: report.min_l1,
                argmin_pair: report.argmin_pair,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (slope, intercept) = scaling_fit(&rows).unzip();
    Ok(ScalingReport {
        rows,
        slope,
        intercept,
    })
}

/// Least-squares `(slope, intercept)` of `ln(1 / min_l1)` against `n^{1/3}`,
/// skipping rows with `min_l1 = 0`.
pub fn scaling_fit(rows: &[ScalingRow]) -> Option<(f64, f64)> {
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.min_l1 > 0.0)
        .map(|r| ((r.n as f64).cbrt(), -r.min_l1.ln()))
        .collect();
    least_squares(&points)
}

fn least_squares(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    if points.len() < 2 {
        return None;
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn deletion_half_two_bits() {
        let report = pairwise_separation(
            &ChannelSpec::deletion(0.5).unwrap(),
            2,
            2,
            PairMode::AllPairs,
        )
        .unwrap();
        assert_abs_diff_eq!(report.min_l1, 1.0, epsilon = 1e-12);
        assert_eq!(report.pairs, 6);
    }

    #[test]
    fn identity_separates_by_two() {
        for n in 2..=6 {
            let report =
                pairwise_separation(&ChannelSpec::identity(), n, n, PairMode::AllPairs).unwrap();
            assert_eq!(report.min_l1, 2.0);
            assert_eq!(report.pairs, (1u64 << n) * ((1u64 << n) - 1) / 2);
        }
    }

    #[test]
    fn all_pairs_is_capped() {
        let err =
            pairwise_separation(&ChannelSpec::identity(), 13, 13, PairMode::AllPairs).unwrap_err();
        assert!(err.to_string().contains("use sampled mode"));
    }

    #[test]
    fn reduction_matches_brute_force() {
        let spec = ChannelSpec::geo_ins_del(0.5, 0.25).unwrap();
        let n = 5;
        let len = 12;
        let report = pairwise_separation(&spec, n, len, PairMode::AllPairs).unwrap();
        let words: Vec<Vec<i8>> = (0..1u64 << n)
            .map(|k| super::super::word_from_index(k, n))
            .collect();
        let means: Vec<Vec<f64>> = words
            .iter()
            .map(|w| {
                crate::mean_trace::exact_mean_trace(&spec, w, len)
                    .unwrap()
                    .values
            })
            .collect();
        let mut best = f64::INFINITY;
        let mut pairs = 0;
        for a in 0..words.len() {
            for b in a + 1..words.len() {
                best = best.min(crate::mean_trace::l1(&means[a], &means[b]));
                pairs += 1;
            }
        }
        assert_abs_diff_eq!(report.min_l1, best, epsilon = 1e-12);
        assert_eq!(report.pairs, pairs);
        let (x, y) = &report.argmin_pair;
        assert_abs_diff_eq!(
            pair_distance(&spec, x, y, len).unwrap(),
            best,
            epsilon = 1e-12
        );
        assert!(x < y);
    }

    #[test]
    fn sampled_mode_is_an_upper_bound() {
        let spec = ChannelSpec::deletion(0.3).unwrap();
        let all = pairwise_separation(&spec, 8, 8, PairMode::AllPairs).unwrap();
        let some = pairwise_separation(
            &spec,
            8,
            8,
            PairMode::Sampled {
                pairs: 200,
                seed: 1,
            },
        )
        .unwrap();
        assert!(some.min_l1 >= all.min_l1);
        assert_eq!(some.pairs, 200 + 8 + 7 + 1);
    }

    #[test]
    fn identity_scaling_is_flat() {
        let report = separation_scaling(
            &ChannelSpec::identity(),
            &[2, 3, 4, 5],
            TruncationRule::Linear(1.0),
        )
        .unwrap();
        assert!(report.rows.iter().all(|r| r.min_l1 == 2.0));
        assert_abs_diff_eq!(report.slope.unwrap(), 0.0, epsilon = 1e-12);
        assert!(
            separation_scaling(&ChannelSpec::identity(), &[13], TruncationRule::Fixed(13)).is_err()
        );
    }
}
