mod support;

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use support::{
    brute_force_mean, builtins, convolution_truncation_from, finite_outcomes, m_pmf_oracle,
    random_word, uniform_dup, word, CONVOLUTION_HORIZON,
};
use tracelab_core::mean_trace::{
    choose_truncation, exact_mean_trace, exact_truncation, length_sum_pmf, sample_mean_trace,
    verify_changevar, MeanTraceModel,
};
use tracelab_core::{apply_channel, ChannelSpec, LengthLaw, TableRow, TraceRng};

#[test]
fn exact_mean_matches_enumeration() {
    let specs = [
        ChannelSpec::deletion(0.3).unwrap().with_flip(0.1).unwrap(),
        ChannelSpec::deletion(0.7).unwrap(),
        uniform_dup().with_flip(0.25).unwrap(),
        ChannelSpec::explicit_table(vec![
            TableRow::new(3, [1, 3], 0.4),
            TableRow::new(0, [], 0.1),
            TableRow::new(2, [2], 0.5),
        ])
        .unwrap()
        .with_flip(0.05)
        .unwrap(),
    ];
    for spec in &specs {
        let outcomes = finite_outcomes(spec.law()).unwrap();
        for n in 1..=5 {
            let len = n * spec.max_block_len().unwrap();
            for k in 0..1u64 << n {
                let x = word(k, n);
                let oracle = brute_force_mean(&outcomes, spec.p_flip(), &x, len);
                let mean = exact_mean_trace(spec, &x, len).unwrap();
                assert_eq!(mean.tail_bound, 0.0);
                for (a, b) in mean.values.iter().zip(&oracle) {
                    assert!((a - b).abs() <= 1e-12, "{spec:?} {x:?}");
                }
            }
        }
    }
}

#[test]
fn truncation_never_under_cuts_the_convolution_tail() {
    for (_, spec) in builtins() {
        let pmf: Vec<f64> = (0..=CONVOLUTION_HORIZON)
            .map(|j| m_pmf_oracle(spec.law(), j))
            .collect();
        for n in [1, 4, 10, 20] {
            for eps in [1e-6, 1e-9, 1e-12] {
                let chosen = choose_truncation(&spec, n, eps).unwrap();
                let oracle = convolution_truncation_from(&pmf, n, eps);
                assert!(
                    chosen >= oracle,
                    "{spec:?} n={n} eps={eps}: {chosen} < {oracle}"
                );
                assert_eq!(exact_truncation(&spec, n, eps).unwrap(), oracle);
            }
        }
    }
}

#[test]
fn mean_trace_beyond_the_support_is_zero() {
    let spec = uniform_dup();
    let x = [1, -1, -1, 1];
    let mean = exact_mean_trace(&spec, &x, 20).unwrap();
    assert!(mean.values[12..].iter().all(|&v| v == 0.0));
    assert!(mean.values.iter().all(|v| v.abs() <= 1.0));
}

/// `E[Y_i^2] = Pr[S_n >= i]`, so the per-coordinate variance is exact.
fn coordinate_sd(spec: &ChannelSpec, n: usize, mu: &[f64]) -> Vec<f64> {
    let pmf = length_sum_pmf(spec, n, mu.len());
    let mut reach = 1.0;
    mu.iter()
        .enumerate()
        .map(|(i, m)| {
            if i > 0 {
                reach -= pmf[i - 1];
            }
            (reach.max(0.0) - m * m).max(0.0).sqrt()
        })
        .collect()
}

#[test]
fn monte_carlo_agrees_with_the_exact_mean() {
    let t = 200_000u64;
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for (name, spec) in builtins() {
        for trial in 0..20 {
            let n = rng.random_range(2..=12);
            let x = random_word(&mut rng, n);
            let len = choose_truncation(&spec, n, 1e-9).unwrap();
            let exact = exact_mean_trace(&spec, &x, len).unwrap();
            let est = sample_mean_trace(&spec, &x, t, len, 1000 + trial).unwrap();
            let sd = coordinate_sd(&spec, n, &exact.values);
            let violations = exact
                .values
                .iter()
                .zip(&est.values)
                .zip(&sd)
                .filter(|((m, e), s)| (*m - *e).abs() > 5.0 * *s / (t as f64).sqrt())
                .count();
            assert!(
                violations <= 1,
                "{name} x={x:?}: {violations} coordinates beyond 5 sigma"
            );
        }
    }
}

#[test]
fn deletion_point_four_estimate_within_reach() {
    let spec = ChannelSpec::deletion(0.4).unwrap();
    let x = random_word(&mut ChaCha8Rng::seed_from_u64(1), 10);
    let exact = exact_mean_trace(&spec, &x, 10).unwrap();
    let est = sample_mean_trace(&spec, &x, 1_000_000, 10, 8).unwrap();
    let worst = exact
        .values
        .iter()
        .zip(&est.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 0.006, "{worst}");
}

#[test]
fn change_of_variable_holds_for_every_builtin() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for (name, spec) in builtins() {
        for _ in 0..20 {
            let n = rng.random_range(4..=16);
            let x = random_word(&mut rng, n);
            for _ in 0..10 {
                let z = Complex64::from_polar(
                    1.0 + 0.05 * rng.random::<f64>(),
                    rng.random_range(-PI..PI),
                );
                let check = verify_changevar(&spec, &x, z).unwrap();
                assert!(check.holds(), "{name} {check:?}");
            }
        }
    }
}

/// The series at `z` estimated from raw traces agrees with the generating-function side.
#[test]
fn change_of_variable_against_monte_carlo() {
    let spec = ChannelSpec::geo_ins_del(0.5, 0.25).unwrap();
    let x = random_word(&mut ChaCha8Rng::seed_from_u64(12), 12);
    let z = Complex64::from_polar(1.01, 0.03);
    let check = verify_changevar(&spec, &x, z).unwrap();
    assert!(check.holds());
    let t = 10_000_000u64;
    let chunk = 100_000u64;
    let sums: Vec<(Complex64, f64, f64)> = (0..t / chunk)
        .into_par_iter()
        .map(|c| {
            let mut acc = (Complex64::new(0.0, 0.0), 0.0, 0.0);
            for k in c * chunk..(c + 1) * chunk {
                let trace = apply_channel(&spec, &x, &mut TraceRng::new(31, k)).unwrap();
                let v = trace
                    .symbols()
                    .iter()
                    .rev()
                    .fold(Complex64::new(0.0, 0.0), |a, &s| a * z + f64::from(s));
                acc.0 += v;
                acc.1 += v.re * v.re;
                acc.2 += v.im * v.im;
            }
            acc
        })
        .collect();
    let (s, sre, sim) = sums
        .iter()
        .fold((Complex64::new(0.0, 0.0), 0.0, 0.0), |a, b| {
            (a.0 + b.0, a.1 + b.1, a.2 + b.2)
        });
    let tf = t as f64;
    let mean = s / tf;
    let sd_re = ((sre / tf - mean.re * mean.re) / tf).sqrt();
    let sd_im = ((sim / tf - mean.im * mean.im) / tf).sqrt();
    assert!(
        (mean.re - check.rhs.re).abs() <= 5.0 * sd_re,
        "{mean} vs {}",
        check.rhs
    );
    assert!(
        (mean.im - check.rhs.im).abs() <= 5.0 * sd_im,
        "{mean} vs {}",
        check.rhs
    );
}

fn finite_or_geometric() -> impl Strategy<Value = ChannelSpec> {
    prop_oneof![
        (0.0..0.9f64).prop_map(|q| ChannelSpec::deletion(q).unwrap()),
        (0.2..1.0f64, 0.0..0.9f64).prop_map(|(s, d)| ChannelSpec::geo_ins_del(s, d).unwrap()),
        (0.2..1.0f64, 0.0..0.9f64).prop_map(|(s, q)| ChannelSpec::geo_ins_before(s, q).unwrap()),
        (0.3..1.0f64).prop_map(|p| ChannelSpec::duplication(LengthLaw::Geometric { p }).unwrap()),
        Just(uniform_dup()),
    ]
    .prop_flat_map(|spec| (0.0..0.49f64).prop_map(move |p| spec.clone().with_flip(p).unwrap()))
}

fn words(n: usize) -> impl Strategy<Value = Vec<i8>> {
    prop::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mean_trace_is_linear(spec in finite_or_geometric(), (x, y) in (1usize..10).prop_flat_map(|n| (words(n), words(n))), len in 1usize..40) {
        let model = MeanTraceModel::new(&spec, x.len(), len).unwrap();
        let mx = model.mean_trace(&x).unwrap().values;
        let my = model.mean_trace(&y).unwrap().values;
        // V^T (x + y) computed directly from the weight rows.
        for j in 0..len {
            let direct: f64 = (0..x.len())
                .map(|i| spec.bias() * f64::from(x[i] + y[i]) * model.weights().row(i)[j])
                .sum();
            prop_assert!((mx[j] + my[j] - direct).abs() <= 1e-12);
        }
    }

    #[test]
    fn negation_is_exact(spec in finite_or_geometric(), x in (1usize..12).prop_flat_map(words), len in 1usize..40) {
        let neg: Vec<i8> = x.iter().map(|v| -v).collect();
        let a = exact_mean_trace(&spec, &x, len).unwrap();
        let b = exact_mean_trace(&spec, &neg, len).unwrap();
        for (u, v) in a.values.iter().zip(&b.values) {
            prop_assert_eq!(*u, -*v);
        }
        prop_assert_eq!(a.tail_bound, b.tail_bound);
    }

    #[test]
    fn tail_bound_covers_the_dropped_mass(spec in finite_or_geometric(), x in (1usize..8).prop_flat_map(words), len in 1usize..30) {
        let short = exact_mean_trace(&spec, &x, len).unwrap();
        let long = exact_mean_trace(&spec, &x, len + 400).unwrap();
        let dropped: f64 = long.values[len..].iter().map(|v| v.abs()).sum();
        prop_assert!(short.tail_bound + 1e-12 >= dropped);
        prop_assert!(short.values.iter().all(|v| v.abs() <= 1.0));
    }

    #[test]
    fn chernoff_is_never_below_the_exact_point(spec in finite_or_geometric(), n in 1usize..=20, e in 6i32..=12) {
        let eps = 10f64.powi(-e);
        prop_assert!(choose_truncation(&spec, n, eps).unwrap() >= exact_truncation(&spec, n, eps).unwrap());
    }
}
