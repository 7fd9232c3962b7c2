//! Independent oracles shared by the integration tests. Nothing here calls
//! the library's own probability code; laws are rebuilt from their parameters.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use tracelab_core::{ChannelSpec, Law, LengthLaw};

pub fn uniform_dup() -> ChannelSpec {
    ChannelSpec::duplication(LengthLaw::Table {
        probs: vec![1.0 / 3.0; 3],
    })
    .unwrap()
}

/// The channels named by the acceptance criteria.
pub fn builtins() -> Vec<(&'static str, ChannelSpec)> {
    vec![
        ("deletion(0.3)", ChannelSpec::deletion(0.3).unwrap()),
        ("deletion(0.7)", ChannelSpec::deletion(0.7).unwrap()),
        (
            "geo_ins_del(0.5,0.25)",
            ChannelSpec::geo_ins_del(0.5, 0.25).unwrap(),
        ),
        (
            "geo_ins_before(0.5,0.3)",
            ChannelSpec::geo_ins_before(0.5, 0.3).unwrap(),
        ),
        ("duplication{1,2,3}", uniform_dup()),
    ]
}

pub fn random_word<R: Rng>(rng: &mut R, n: usize) -> Vec<i8> {
    (0..n)
        .map(|_| if rng.random::<bool>() { 1 } else { -1 })
        .collect()
}

pub fn word(k: u64, n: usize) -> Vec<i8> {
    (0..n)
        .map(|i| if (k >> (n - 1 - i)) & 1 == 1 { 1 } else { -1 })
        .collect()
}

/// `(m, R, prob)` rows of a finite-support law.
pub fn finite_outcomes(law: &Law) -> Option<Vec<(usize, Vec<usize>, f64)>> {
    match law {
        Law::Deletion { q } => Some(vec![(0, vec![], *q), (1, vec![1], 1.0 - q)]),
        Law::Duplication {
            lengths: LengthLaw::Table { probs },
        } => Some(
            probs
                .iter()
                .enumerate()
                .map(|(k, &p)| (k + 1, (1..=k + 1).collect(), p))
                .collect(),
        ),
        Law::ExplicitTable { rows } => Some(
            rows.iter()
                .map(|r| (r.m, r.positions.clone(), r.prob))
                .collect(),
        ),
        _ => None,
    }
}

/// Mean trace by enumerating every combination of per-bit outcomes. Flips
/// average to `1 - 2 p` per replicated symbol and inserted symbols to 0.
pub fn brute_force_mean(
    outcomes: &[(usize, Vec<usize>, f64)],
    p_flip: f64,
    x: &[i8],
    len: usize,
) -> Vec<f64> {
    #[allow(clippy::too_many_arguments)]
    fn go(
        outcomes: &[(usize, Vec<usize>, f64)],
        p_flip: f64,
        x: &[i8],
        i: usize,
        offset: usize,
        prob: f64,
        placed: &mut Vec<(usize, f64)>,
        acc: &mut [f64],
    ) {
        if i == x.len() {
            for &(pos, v) in placed.iter() {
                if pos < acc.len() {
                    acc[pos] += prob * v;
                }
            }
            return;
        }
        for (m, r, p) in outcomes {
            if *p == 0.0 {
                continue;
            }
            let before = placed.len();
            for &k in r {
                // E[symbol] = (1 - p) x + p (-x).
                let e = (1.0 - p_flip) * f64::from(x[i]) - p_flip * f64::from(x[i]);
                placed.push((offset + k - 1, e));
            }
            go(
                outcomes,
                p_flip,
                x,
                i + 1,
                offset + m,
                prob * p,
                placed,
                acc,
            );
            placed.truncate(before);
        }
    }
    let mut acc = vec![0.0; len];
    go(outcomes, p_flip, x, 0, 0, 1.0, &mut Vec::new(), &mut acc);
    acc
}

/// `Pr[M = j]` rebuilt from the law's parameters. GeoInsBefore sums the
/// binomial thinning of the inserted run explicitly.
pub fn m_pmf_oracle(law: &Law, j: usize) -> f64 {
    let geo = |s: f64, g: usize| s * (1.0 - s).powi(g as i32);
    match law {
        Law::Deletion { q } => match j {
            0 => *q,
            1 => 1.0 - q,
            _ => 0.0,
        },
        Law::GeoInsDel { sigma, delta } => {
            // M = G + B.
            let deleted = delta * geo(*sigma, j);
            let kept = if j >= 1 {
                (1.0 - delta) * geo(*sigma, j - 1)
            } else {
                0.0
            };
            deleted + kept
        }
        Law::GeoInsBefore { sigma, q } => {
            let survivors = |s: usize| -> f64 {
                // sum_g Pr[G = g] C(g, s) (1-q)^s q^(g-s)
                let mut total = 0.0;
                let mut g = s;
                loop {
                    let term = geo(*sigma, g)
                        * binomial(g, s)
                        * (1.0 - q).powi(s as i32)
                        * q.powi((g - s) as i32);
                    total += term;
                    if g > s + 50 && term < 1e-18 {
                        break;
                    }
                    g += 1;
                }
                total
            };
            let deleted = q * survivors(j);
            let kept = if j >= 1 {
                (1.0 - q) * survivors(j - 1)
            } else {
                0.0
            };
            deleted + kept
        }
        Law::Duplication {
            lengths: LengthLaw::Table { probs },
        } => {
            if j == 0 {
                0.0
            } else {
                probs.get(j - 1).copied().unwrap_or(0.0)
            }
        }
        Law::Duplication {
            lengths: LengthLaw::Geometric { p },
        } => {
            if j == 0 {
                0.0
            } else {
                p * (1.0 - p).powi(j as i32 - 1)
            }
        }
        Law::ExplicitTable { rows } => rows.iter().filter(|r| r.m == j).map(|r| r.prob).sum(),
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Smallest `N >= 1` with `Pr[M_1 + ... + M_n > N] <= eps`, by direct convolution.
pub fn convolution_truncation(law: &Law, n: usize, eps: f64) -> usize {
    let pmf: Vec<f64> = (0..=CONVOLUTION_HORIZON)
        .map(|j| m_pmf_oracle(law, j))
        .collect();
    convolution_truncation_from(&pmf, n, eps)
}

pub const CONVOLUTION_HORIZON: usize = 600;

/// `Pr[M_1 + ... + M_n = s]` for `s <= horizon` from `Pr[M = j]`.
pub fn sum_pmf(pmf: &[f64], n: usize, horizon: usize) -> Vec<f64> {
    let mut sum = vec![0.0; horizon + 1];
    sum[0] = 1.0;
    for _ in 0..n {
        let mut next = vec![0.0; horizon + 1];
        for (a, &pa) in sum.iter().enumerate() {
            if pa == 0.0 {
                continue;
            }
            for (b, &pb) in pmf.iter().enumerate().take(horizon + 1 - a) {
                next[a + b] += pa * pb;
            }
        }
        sum = next;
    }
    sum
}

/// [`convolution_truncation`] from a precomputed `Pr[M = j]`, `j <= CONVOLUTION_HORIZON`.
pub fn convolution_truncation_from(pmf: &[f64], n: usize, eps: f64) -> usize {
    let sum = sum_pmf(pmf, n, pmf.len() - 1);
    let mut below = 0.0;
    for (s, &p) in sum.iter().enumerate() {
        below += p;
        if s >= 1 && 1.0 - below <= eps {
            return s;
        }
    }
    panic!("horizon too small")
}

/// Closed-form inverse of the deletion pgf `q + (1 - q) z` at `e^{i phi}`.
pub fn deletion_inverse(q: f64, phi: f64) -> Complex64 {
    (Complex64::from_polar(1.0, phi) - q) / (1.0 - q)
}

/// `max |A(e^{i phi})|` on a uniform grid of `points` angles over `|phi| <= half`.
pub fn dense_arc_max(coeffs: &[i8], half: f64, points: usize) -> f64 {
    (0..points)
        .map(|k| -half + 2.0 * half * k as f64 / (points - 1) as f64)
        .map(|phi| {
            let w = Complex64::from_polar(1.0, phi);
            let mut acc = Complex64::new(0.0, 0.0);
            let mut power = Complex64::new(1.0, 0.0);
            for &a in coeffs {
                acc += power * f64::from(a);
                power *= w;
            }
            acc.norm()
        })
        .fold(0.0, f64::max)
}
