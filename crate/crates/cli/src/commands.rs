//! The six subcommands. Each reads a validated config and writes its CSV
//! files into the output directory; the caller writes the manifest.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use tracelab_core::genfun::{arc_max, arc_quadratic_bound_check};
use tracelab_core::mean_trace::{exact_mean_trace, l1, sample_mean_trace};
use tracelab_core::reconstruction::{
    pairwise_separation, run_trial, scaling_fit, wilson, Certification, Certifier, PairMode,
    ScalingRow, TrialSetup, TruncationRule, MIN_TRIALS,
};
use tracelab_core::{
    apply_into, check_word, derive_seed, format_word, parse_word, ArcSpec, TraceRng,
};

use crate::config::{
    ArcConfig, CertifyConfig, MeanTraceConfig, PairSelection, ReconstructConfig, SampleConfig,
    SeparationConfig,
};
use crate::error::{AtPath, CliError, Result};
use crate::output::{num, OutDir};

/// Traces generated per parallel round of `sample`.
const SAMPLE_ROUND: u64 = 1 << 16;
/// Grid for arc maximum searches.
const ARC_GRID: usize = 2048;
/// Seed label of the designated-input runs of `reconstruct`.
const DESIGNATED_LABEL: u64 = u64::MAX;

fn word(path: &str, s: &str) -> Result<Vec<i8>> {
    let x = parse_word(s).at(path)?;
    check_word(&x).at(path)?;
    Ok(x)
}

fn flag(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

/// `traces.txt`: trace `k` uses stream `k` of the root seed.
pub fn sample(cfg: &SampleConfig, seed: u64, out: &mut OutDir) -> Result<()> {
    let x = word("x", &cfg.x)?;
    let mut file = out.text("traces.txt")?;
    let mut start = 0;
    while start < cfg.t {
        let end = (start + SAMPLE_ROUND).min(cfg.t);
        let lines: Vec<String> = (start..end)
            .into_par_iter()
            .map(|k| {
                let mut rng = TraceRng::new(seed, k);
                let mut buf = Vec::with_capacity(2 * x.len());
                apply_into(&cfg.channel, &x, &mut rng, &mut buf).expect("word checked above");
                format_word(&buf)
            })
            .collect();
        for line in &lines {
            file.line(line)?;
        }
        start = end;
    }
    file.finish()
}

/// `mean_trace.csv` and `mean_trace_summary.csv`.
pub fn mean_trace(cfg: &MeanTraceConfig, seed: u64, out: &mut OutDir) -> Result<()> {
    let x = word("x", &cfg.x)?;
    let len = TruncationRule::from(cfg.truncation)
        .resolve(&cfg.channel, x.len())
        .at("truncation")?;
    let exact = exact_mean_trace(&cfg.channel, &x, len).at("truncation")?;
    let empirical = if cfg.traces > 0 {
        Some(sample_mean_trace(&cfg.channel, &x, cfg.traces, len, seed).at("traces")?)
    } else {
        None
    };

    let mut csv = out.csv("mean_trace.csv")?;
    csv.row(["index", "exact", "empirical", "stderr"])?;
    for (i, v) in exact.values.iter().enumerate() {
        let (e, s) = match &empirical {
            Some(emp) => (num(emp.values[i]), num(emp.stderr[i])),
            None => (String::new(), String::new()),
        };
        csv.row([(i + 1).to_string(), num(*v), e, s])?;
    }
    csv.finish()?;

    let mut summary = out.csv("mean_trace_summary.csv")?;
    summary.row(["n", "len", "tail_bound", "traces", "l1_error"])?;
    summary.row([
        x.len().to_string(),
        len.to_string(),
        num(exact.tail_bound),
        cfg.traces.to_string(),
        empirical
            .as_ref()
            .map(|emp| num(l1(&emp.values, &exact.values)))
            .unwrap_or_default(),
    ])?;
    summary.finish()
}

/// `trials.csv`, `success_curve.csv`, and `designated.csv` when requested.
pub fn reconstruct(cfg: &ReconstructConfig, seed: u64, out: &mut OutDir) -> Result<()> {
    if cfg.trials < MIN_TRIALS {
        return Err(CliError::config(
            "trials",
            format!("{} < {MIN_TRIALS}", cfg.trials),
        ));
    }
    if cfg.t_grid.is_empty() {
        return Err(CliError::config("t_grid", "needs at least one trace count"));
    }
    if let Some(i) = cfg.t_grid.iter().position(|&t| t == 0) {
        return Err(CliError::config(
            format!("t_grid[{i}]"),
            "trace counts must be positive",
        ));
    }
    let setup = TrialSetup::new(&cfg.channel, cfg.n, seed).at("n")?;

    let mut trials = out.csv("trials.csv")?;
    trials.row(["t", "trial", "x", "estimate", "l1_error", "success"])?;
    let mut curve = out.csv("success_curve.csv")?;
    curve.row(["t", "successes", "trials", "ci_lo", "ci_hi"])?;
    for &t in &cfg.t_grid {
        let outcomes = (0..cfg.trials)
            .into_par_iter()
            .map(|k| run_trial(&setup, k, t))
            .collect::<tracelab_core::Result<Vec<_>>>()?;
        for (k, o) in outcomes.iter().enumerate() {
            trials.row([
                t.to_string(),
                k.to_string(),
                format_word(&o.x),
                format_word(&o.estimate),
                num(o.l1_error),
                flag(o.success).to_string(),
            ])?;
        }
        let successes = outcomes.iter().filter(|o| o.success).count() as u64;
        let (lo, hi) = wilson(successes, cfg.trials);
        curve.row([
            t.to_string(),
            successes.to_string(),
            cfg.trials.to_string(),
            num(lo),
            num(hi),
        ])?;
    }
    trials.finish()?;
    curve.finish()?;

    if cfg.designated {
        designated(cfg, &setup, seed, out)?;
    }
    Ok(())
}

/// Success rates for the two strings of the closest pair of mean traces.
fn designated(
    cfg: &ReconstructConfig,
    setup: &TrialSetup,
    seed: u64,
    out: &mut OutDir,
) -> Result<()> {
    let len = setup.len();
    let sep = pairwise_separation(&cfg.channel, cfg.n, len, PairMode::AllPairs).at("n")?;
    let (a, b) = sep.argmin_pair;
    let mut csv = out.csv("designated.csv")?;
    csv.row([
        "t",
        "input",
        "min_l1",
        "successes",
        "trials",
        "ci_lo",
        "ci_hi",
    ])?;
    for &t in &cfg.t_grid {
        for (which, x) in [&a, &b].into_iter().enumerate() {
            let base = derive_seed(seed, &[DESIGNATED_LABEL, which as u64]);
            let hits = (0..cfg.trials)
                .into_par_iter()
                .map(|k| {
                    let mu = sample_mean_trace(&cfg.channel, x, t, len, derive_seed(base, &[k]))?;
                    Ok(setup.reconstructor().reconstruct(&mu.values)? == *x)
                })
                .collect::<tracelab_core::Result<Vec<bool>>>()?;
            let successes = hits.iter().filter(|&&h| h).count() as u64;
            let (lo, hi) = wilson(successes, cfg.trials);
            csv.row([
                t.to_string(),
                format_word(x),
                num(sep.min_l1),
                successes.to_string(),
                cfg.trials.to_string(),
                num(lo),
                num(hi),
            ])?;
        }
    }
    csv.finish()
}

/// `separation.csv`, `histogram.csv`, and `scaling.csv` for exhaustive sweeps.
pub fn separation(cfg: &SeparationConfig, seed: u64, out: &mut OutDir) -> Result<()> {
    if cfg.n_values.is_empty() {
        return Err(CliError::config("n_values", "needs at least one length"));
    }
    let rule = TruncationRule::from(cfg.truncation);
    let mut reports = Vec::with_capacity(cfg.n_values.len());
    for (i, &n) in cfg.n_values.iter().enumerate() {
        let path = format!("n_values[{i}]");
        let len = rule.resolve(&cfg.channel, n).at(&path)?;
        let mode = cfg.mode.mode(derive_seed(seed, &[n as u64]));
        reports.push(pairwise_separation(&cfg.channel, n, len, mode).at(&path)?);
    }

    let mut table = out.csv("separation.csv")?;
    table.row(["n", "len", "min_l1", "x", "x_prime", "pairs"])?;
    let mut hist = out.csv("histogram.csv")?;
    hist.row(["n", "lo", "hi", "count"])?;
    for r in &reports {
        table.row([
            r.n.to_string(),
            r.len.to_string(),
            num(r.min_l1),
            format_word(&r.argmin_pair.0),
            format_word(&r.argmin_pair.1),
            r.pairs.to_string(),
        ])?;
        for bin in r.histogram.iter().filter(|b| b.count > 0) {
            hist.row([
                r.n.to_string(),
                num(bin.lo),
                num(bin.hi),
                bin.count.to_string(),
            ])?;
        }
    }
    table.finish()?;
    hist.finish()?;

    if cfg.mode == PairSelection::AllPairs && reports.len() >= 2 {
        let rows: Vec<ScalingRow> = reports
            .into_iter()
            .map(|r| ScalingRow {
                n: r.n,
                len: r.len,
                min_l1: r.min_l1,
                argmin_pair: r.argmin_pair,
            })
            .collect();
        let mut scaling = out.csv("scaling.csv")?;
        scaling.row(["slope", "intercept"])?;
        match scaling_fit(&rows) {
            Some((slope, intercept)) => scaling.row([num(slope), num(intercept)])?,
            None => scaling.row(["", ""])?,
        }
        scaling.finish()?;
    }
    Ok(())
}

fn random_word(rng: &mut ChaCha8Rng, n: usize) -> Vec<i8> {
    (0..n)
        .map(|_| if rng.random::<bool>() { 1 } else { -1 })
        .collect()
}

/// `certify.csv`: one row per pair, explicit pairs first.
pub fn certify(cfg: &CertifyConfig, seed: u64, out: &mut OutDir) -> Result<()> {
    if cfg.pairs == 0 && cfg.explicit_pairs.is_empty() {
        return Err(CliError::config("pairs", "no pairs to certify"));
    }
    if cfg.n == 0 {
        return Err(CliError::config("n", "must be positive"));
    }
    let mut pairs = Vec::with_capacity(cfg.explicit_pairs.len() + cfg.pairs as usize);
    for (i, (a, b)) in cfg.explicit_pairs.iter().enumerate() {
        let path = format!("explicit_pairs[{i}]");
        let (x, y) = (word(&path, a)?, word(&path, b)?);
        if x.len() != cfg.n || y.len() != cfg.n {
            return Err(CliError::config(
                path,
                format!("words must have length n = {}", cfg.n),
            ));
        }
        if x == y {
            return Err(CliError::config(path, "the two words are equal"));
        }
        pairs.push((format!("explicit:{i}"), x, y));
    }
    for k in 0..cfg.pairs {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[k]));
        let x = random_word(&mut rng, cfg.n);
        let y = loop {
            let y = random_word(&mut rng, cfg.n);
            if y != x {
                break y;
            }
        };
        pairs.push((format!("random:{k}"), x, y));
    }

    let l = cfg.l.unwrap_or((cfg.n as f64).cbrt());
    let certifier = Certifier::new(&cfg.channel, cfg.n, l).at("l")?;
    let results = pairs
        .par_iter()
        .map(|(_, x, y)| certifier.certify(x, y))
        .collect::<tracelab_core::Result<Vec<Certification>>>()?;

    let mut csv = out.csv("certify.csv")?;
    csv.row([
        "pair", "x", "x_prime", "len", "lhs", "rhs", "pass", "vacuous", "z_re", "z_im", "z_abs",
        "phi", "arc_max", "tail",
    ])?;
    for ((label, x, y), c) in pairs.iter().zip(&results) {
        csv.row([
            label.clone(),
            format_word(x),
            format_word(y),
            c.len.to_string(),
            num(c.lhs),
            num(c.rhs),
            flag(c.pass).to_string(),
            flag(c.vacuous).to_string(),
            num(c.z.re),
            num(c.z.im),
            num(c.z.norm()),
            num(c.phi),
            num(c.arc_max_abs),
            num(c.tail),
        ])?;
    }
    csv.finish()
}

fn polynomial(path: &str, s: &str) -> Result<Vec<i8>> {
    s.chars()
        .map(|c| match c {
            '+' => Ok(1),
            '-' => Ok(-1),
            '0' => Ok(0),
            other => Err(CliError::config(
                path,
                format!("unexpected character {other:?}"),
            )),
        })
        .collect()
}

/// `arc_inversion.csv` and `arc_summary.csv` for `phis`, `arc_max.csv` for
/// `polynomials`.
pub fn arc(cfg: &ArcConfig, _seed: u64, out: &mut OutDir) -> Result<()> {
    if cfg.phis.is_empty() && cfg.polynomials.is_empty() {
        return Err(CliError::config(".", "give phis, polynomials or both"));
    }
    let polys = cfg
        .polynomials
        .iter()
        .enumerate()
        .map(|(i, s)| polynomial(&format!("polynomials[{i}]"), s))
        .collect::<Result<Vec<_>>>()?;

    if !cfg.phis.is_empty() {
        let report = arc_quadratic_bound_check(&cfg.channel, &cfg.phis).at("phis")?;
        let mut csv = out.csv("arc_inversion.csv")?;
        csv.row([
            "phi", "z_re", "z_im", "z_abs", "ratio", "g_w_abs", "residual",
        ])?;
        for r in &report.rows {
            csv.row([
                num(r.phi),
                num(r.z.re),
                num(r.z.im),
                num(r.z.norm()),
                num(r.ratio),
                num(r.g_w_abs),
                num(r.residual),
            ])?;
        }
        csv.finish()?;
        let mut summary = out.csv("arc_summary.csv")?;
        summary.row(["c_prime", "bounded", "g_w_threshold"])?;
        summary.row([
            num(report.c_prime),
            flag(report.bounded).to_string(),
            report.g_w_threshold.map(num).unwrap_or_default(),
        ])?;
        summary.finish()?;
    }

    if !polys.is_empty() {
        let rows = polys
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let path = format!("polynomials[{i}]");
                let l = cfg.l.unwrap_or((p.len() as f64).cbrt());
                let spec = ArcSpec::new(l, ARC_GRID).at("l")?;
                Ok((l, arc_max(p, &spec).at(&path)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut csv = out.csv("arc_max.csv")?;
        csv.row(["polynomial", "l", "phi", "max_abs"])?;
        for ((l, m), s) in rows.iter().zip(&cfg.polynomials) {
            csv.row([s.clone(), num(*l), num(m.phi), num(m.max_abs)])?;
        }
        csv.finish()?;
    }
    Ok(())
}
