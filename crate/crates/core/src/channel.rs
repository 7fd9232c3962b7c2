//! Replication-insertion channels.
//!
//! A channel acts on every input bit independently: it draws a block length
//! `m` and a set `R ⊆ {1..m}` of replication positions from a joint law,
//! writes a copy of the bit (flipped with probability `p_flip`) at each
//! position of `R` and a uniformly random symbol everywhere else. The trace
//! is the concatenation of the blocks.
//!
//! Channels are described in JSON as
//!
//! ```json
//! {"p_flip": 0.1, "law": {"kind": "geo_ins_del", "sigma": 0.5, "delta": 0.25}}
//! ```
//!
//! with `kind` one of `deletion {q}`, `geo_ins_del {sigma, delta}`,
//! `geo_ins_before {sigma, q}`, `duplication {lengths}` and
//! `explicit_table {rows}`; table rows are `[m, [positions...], prob]`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use crate::error::{ChannelViolation, Error, Result};
use crate::rng::TraceRng;

const NORMALIZATION_TOL: f64 = 1e-12;

/// Law of the replication count `K >= 1` of a duplication channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LengthLaw {
    /// `probs[k - 1] = Pr[K = k]`.
    Table { probs: Vec<f64> },
    /// `Pr[K = k] = p (1 - p)^(k - 1)` for `k >= 1`.
    Geometric { p: f64 },
}

/// One atom `(m, R, prob)` of an explicit joint law. Positions are 1-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "(usize, Vec<usize>, f64)", into = "(usize, Vec<usize>, f64)")]
pub struct TableRow {
    pub m: usize,
    pub positions: Vec<usize>,
    pub prob: f64,
}

impl TableRow {
    pub fn new(m: usize, positions: impl Into<Vec<usize>>, prob: f64) -> Self {
        Self {
            m,
            positions: positions.into(),
            prob,
        }
    }
}

impl From<(usize, Vec<usize>, f64)> for TableRow {
    fn from((m, positions, prob): (usize, Vec<usize>, f64)) -> Self {
        Self { m, positions, prob }
    }
}

impl From<TableRow> for (usize, Vec<usize>, f64) {
    fn from(row: TableRow) -> Self {
        (row.m, row.positions, row.prob)
    }
}

/// Joint law of the block length `M` and replication set `R`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Law {
    /// The bit is deleted with probability `q`, otherwise copied once.
    Deletion { q: f64 },
    /// `G ~ Geom0(sigma)` random symbols are prepended, then the bit itself
    /// is deleted with probability `delta`.
    GeoInsDel { sigma: f64, delta: f64 },
    /// `G ~ Geom0(sigma)` random symbols are inserted before the bit and the
    /// resulting block goes through a deletion channel with probability `q`.
    GeoInsBefore { sigma: f64, q: f64 },
    /// The bit is repeated `K` times.
    Duplication { lengths: LengthLaw },
    /// Arbitrary finite-support joint law.
    ExplicitTable { rows: Vec<TableRow> },
}

/// `Pr[M >= tau] <= kappa * exp(-alpha * tau)` for all `tau >= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailCertificate {
    pub kappa: f64,
    pub alpha: f64,
}

impl TailCertificate {
    pub fn bound(&self, tau: f64) -> f64 {
        self.kappa * (-self.alpha * tau).exp()
    }
}

/// Normal form shared by the analytic code paths.
#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Form {
    /// `M = G + B` with `G ~ Geom0(sigma)`, `B ~ Bernoulli(keep)`, and
    /// `R = {G + 1}` when `B = 1`.
    InsertThenKeep { sigma: f64, keep: f64 },
    /// `M = K`, `R = {1..K}`.
    Replicate(LengthLaw),
    /// Rows with sorted positions.
    Table(Vec<TableRow>),
}

#[derive(Clone, Debug)]
enum LengthSampler {
    Cdf(Vec<f64>),
    /// `None` when `p = 1`.
    Geometric(Option<Geometric>),
}

#[derive(Clone, Debug)]
enum Sampler {
    Deletion { keep: f64 },
    GeoInsDel { geo: Option<Geometric>, keep: f64 },
    GeoInsBefore { geo: Option<Geometric>, keep: f64 },
    Duplication(LengthSampler),
    Table { cdf: Vec<f64> },
}

/// Block shape of one input bit, without allocation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Shape {
    Block { m: usize, rep: Option<usize> },
    Prefix { m: usize },
    Row(usize),
}

/// Serialized form of a [`ChannelSpec`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelDoc {
    #[serde(default)]
    pub p_flip: f64,
    pub law: Law,
}

/// A validated replication-insertion channel. Immutable once built.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "ChannelDoc", into = "ChannelDoc")]
pub struct ChannelSpec {
    p_flip: f64,
    law: Law,
    form: Form,
    tail: TailCertificate,
    max_m: Option<usize>,
    sampler: Sampler,
}

impl PartialEq for ChannelSpec {
    fn eq(&self, other: &Self) -> bool {
        self.p_flip == other.p_flip && self.law == other.law
    }
}

impl TryFrom<ChannelDoc> for ChannelSpec {
    type Error = Error;

    fn try_from(doc: ChannelDoc) -> Result<Self> {
        ChannelSpec::new(doc.p_flip, doc.law)
    }
}

impl From<ChannelSpec> for ChannelDoc {
    fn from(spec: ChannelSpec) -> Self {
        ChannelDoc {
            p_flip: spec.p_flip,
            law: spec.law,
        }
    }
}

fn check_prob(what: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::domain(what, format!("{v} is not a probability")))
    }
}

fn check_sigma(what: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain(what, format!("{v} is outside (0, 1]")))
    }
}

fn geometric(p: f64) -> Option<Geometric> {
    (p < 1.0).then(|| Geometric::new(p).expect("p checked to lie in (0, 1)"))
}

fn cdf_of(weights: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    let mut cdf: Vec<f64> = weights
        .map(|w| {
            acc += w;
            acc
        })
        .collect();
    if let Some(last) = cdf.last_mut() {
        *last = f64::INFINITY;
    }
    cdf
}

fn sample_cdf<R: Rng + ?Sized>(cdf: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

impl ChannelSpec {
    /// Validates `law` and builds the channel, deriving its tail certificate.
    pub fn new(p_flip: f64, law: Law) -> Result<Self> {
        if !(p_flip.is_finite() && (0.0..0.5).contains(&p_flip)) {
            return Err(Error::domain(
                "p_flip",
                format!("{p_flip} is outside [0, 1/2)"),
            ));
        }
        let (form, sampler) = match &law {
            Law::Deletion { q } => {
                check_prob("deletion q", *q)?;
                if *q == 1.0 {
                    return Err(ChannelViolation::NeverEmits.into());
                }
                (
                    Form::InsertThenKeep {
                        sigma: 1.0,
                        keep: 1.0 - q,
                    },
                    Sampler::Deletion { keep: 1.0 - q },
                )
            }
            Law::GeoInsDel { sigma, delta } => {
                check_sigma("geo_ins_del sigma", *sigma)?;
                check_prob("geo_ins_del delta", *delta)?;
                if *delta == 1.0 {
                    return Err(ChannelViolation::NeverReplicates.into());
                }
                (
                    Form::InsertThenKeep {
                        sigma: *sigma,
                        keep: 1.0 - delta,
                    },
                    Sampler::GeoInsDel {
                        geo: geometric(*sigma),
                        keep: 1.0 - delta,
                    },
                )
            }
            Law::GeoInsBefore { sigma, q } => {
                check_sigma("geo_ins_before sigma", *sigma)?;
                check_prob("geo_ins_before q", *q)?;
                if *q == 1.0 {
                    return Err(ChannelViolation::NeverEmits.into());
                }
                // Thinning a Geom0(sigma) count by keep probability 1 - q
                // leaves a Geom0(sigma') count.
                let thinned = sigma / (sigma + (1.0 - sigma) * (1.0 - q));
                (
                    Form::InsertThenKeep {
                        sigma: thinned,
                        keep: 1.0 - q,
                    },
                    Sampler::GeoInsBefore {
                        geo: geometric(*sigma),
                        keep: 1.0 - q,
                    },
                )
            }
            Law::Duplication { lengths } => {
                let sampler = match lengths {
                    LengthLaw::Table { probs } => {
                        if probs.is_empty() {
                            return Err(Error::domain("duplication lengths", "empty table"));
                        }
                        for &p in probs {
                            check_prob("duplication length probability", p)?;
                        }
                        let sum: f64 = probs.iter().sum();
                        if (sum - 1.0).abs() > NORMALIZATION_TOL {
                            return Err(ChannelViolation::NotNormalized { sum }.into());
                        }
                        LengthSampler::Cdf(cdf_of(probs.iter().copied()))
                    }
                    LengthLaw::Geometric { p } => {
                        check_sigma("duplication geometric p", *p)?;
                        LengthSampler::Geometric(geometric(*p))
                    }
                };
                (
                    Form::Replicate(lengths.clone()),
                    Sampler::Duplication(sampler),
                )
            }
            Law::ExplicitTable { rows } => {
                let sorted = validate_table(rows)?;
                let cdf = cdf_of(sorted.iter().map(|r| r.prob));
                (Form::Table(sorted), Sampler::Table { cdf })
            }
        };
        let max_m = form.max_m();
        let tail = form.certificate(max_m);
        let spec = ChannelSpec {
            p_flip,
            law,
            form,
            tail,
            max_m,
            sampler,
        };
        spec.verify_certificate()?;
        Ok(spec)
    }

    /// The noiseless channel: every bit is copied exactly once.
    pub fn identity() -> Self {
        Self::deletion(0.0).expect("q = 0 is valid")
    }

    pub fn deletion(q: f64) -> Result<Self> {
        Self::new(0.0, Law::Deletion { q })
    }

    pub fn geo_ins_del(sigma: f64, delta: f64) -> Result<Self> {
        Self::new(0.0, Law::GeoInsDel { sigma, delta })
    }

    pub fn geo_ins_before(sigma: f64, q: f64) -> Result<Self> {
        Self::new(0.0, Law::GeoInsBefore { sigma, q })
    }

    pub fn duplication(lengths: LengthLaw) -> Result<Self> {
        Self::new(0.0, Law::Duplication { lengths })
    }

    pub fn explicit_table(rows: Vec<TableRow>) -> Result<Self> {
        Self::new(0.0, Law::ExplicitTable { rows })
    }

    /// Same law with a different flip probability.
    pub fn with_flip(self, p_flip: f64) -> Result<Self> {
        Self::new(p_flip, self.law)
    }

    pub fn p_flip(&self) -> f64 {
        self.p_flip
    }

    pub fn law(&self) -> &Law {
        &self.law
    }

    pub(crate) fn form(&self) -> &Form {
        &self.form
    }

    pub fn tail_certificate(&self) -> TailCertificate {
        self.tail
    }

    /// Largest possible block length, when `M` has finite support.
    pub fn max_block_len(&self) -> Option<usize> {
        self.max_m
    }

    /// `1 - 2 p_flip`, the expected value of a replicated `+1`.
    pub fn bias(&self) -> f64 {
        1.0 - 2.0 * self.p_flip
    }

    /// `Pr[M = j]` for `j = 0..=n`.
    pub fn m_pmf(&self, n: usize) -> Vec<f64> {
        (0..=n).map(|j| self.form.pmf(j)).collect()
    }

    /// Exact `Pr[M >= tau]`.
    pub fn tail_prob(&self, tau: usize) -> f64 {
        self.form.tail(tau)
    }

    /// `E[M]`.
    pub fn mean_block_len(&self) -> f64 {
        self.form.mean_m()
    }

    /// `Pr[k in R]` for `k = 1..=len` and `E[|R|]`.
    pub fn replication_profile(&self, len: usize) -> ReplicationProfile {
        let r: Vec<f64> = (1..=len).map(|k| self.form.replication(k)).collect();
        let remainder = match self.max_m {
            Some(m) => ((len + 1)..=m).map(|k| self.form.replication(k)).sum(),
            None => {
                let TailCertificate { kappa, alpha } = self.tail;
                kappa * (-alpha * (len + 1) as f64).exp() / (1.0 - (-alpha).exp())
            }
        };
        ReplicationProfile {
            r,
            expected_len: self.form.expected_replications(),
            remainder,
        }
    }

    fn verify_certificate(&self) -> Result<()> {
        let top = match self.max_m {
            Some(m) => m + 2,
            None => {
                let mut tau = 0;
                while self.form.tail(tau) > 1e-12 && tau < 1_000_000 {
                    tau += 1;
                }
                tau
            }
        };
        for tau in 0..=top {
            let exact = self.form.tail(tau);
            if exact > self.tail.bound(tau as f64) * (1.0 + 1e-12) + 1e-15 {
                return Err(ChannelViolation::TailCertificate {
                    kappa: self.tail.kappa,
                    alpha: self.tail.alpha,
                    tau,
                }
                .into());
            }
        }
        Ok(())
    }

    fn draw_shape<R: Rng + ?Sized>(&self, rng: &mut R) -> Shape {
        match &self.sampler {
            Sampler::Deletion { keep } => {
                let kept = rng.random::<f64>() < *keep;
                Shape::Block {
                    m: kept as usize,
                    rep: kept.then_some(1),
                }
            }
            Sampler::GeoInsDel { geo, keep } => {
                let g = geo.map_or(0, |d| d.sample(rng) as usize);
                let kept = rng.random::<f64>() < *keep;
                Shape::Block {
                    m: g + kept as usize,
                    rep: kept.then_some(g + 1),
                }
            }
            Sampler::GeoInsBefore { geo, keep } => {
                let g = geo.map_or(0, |d| d.sample(rng) as usize);
                let survivors = (0..g).filter(|_| rng.random::<f64>() < *keep).count();
                let kept = rng.random::<f64>() < *keep;
                Shape::Block {
                    m: survivors + kept as usize,
                    rep: kept.then_some(survivors + 1),
                }
            }
            Sampler::Duplication(LengthSampler::Cdf(cdf)) => Shape::Prefix {
                m: sample_cdf(cdf, rng) + 1,
            },
            Sampler::Duplication(LengthSampler::Geometric(geo)) => Shape::Prefix {
                m: geo.map_or(0, |d| d.sample(rng) as usize) + 1,
            },
            Sampler::Table { cdf } => Shape::Row(sample_cdf(cdf, rng)),
        }
    }

    fn outcome(&self, shape: Shape) -> PerBitOutcome {
        match shape {
            Shape::Block { m, rep } => PerBitOutcome {
                m,
                r_set: rep.into_iter().collect(),
            },
            Shape::Prefix { m } => PerBitOutcome {
                m,
                r_set: (1..=m).collect(),
            },
            Shape::Row(i) => {
                let Form::Table(rows) = &self.form else {
                    unreachable!("row shapes only come from tables")
                };
                PerBitOutcome {
                    m: rows[i].m,
                    r_set: rows[i].positions.clone(),
                }
            }
        }
    }

    fn emit<R: Rng + ?Sized>(&self, shape: Shape, bit: i8, rng: &mut R, out: &mut Vec<i8>) {
        let symbol = |replicated: bool, rng: &mut R| -> i8 {
            if replicated {
                if self.p_flip > 0.0 && rng.random::<f64>() < self.p_flip {
                    -bit
                } else {
                    bit
                }
            } else if rng.next_u32() & 1 == 1 {
                // Inserted symbols are drawn relative to the input bit; the
                // law is still uniform but negating x negates the trace.
                bit
            } else {
                -bit
            }
        };
        match shape {
            Shape::Block { m, rep } => {
                for j in 1..=m {
                    let s = symbol(rep == Some(j), rng);
                    out.push(s);
                }
            }
            Shape::Prefix { m } => {
                for _ in 0..m {
                    let s = symbol(true, rng);
                    out.push(s);
                }
            }
            Shape::Row(i) => {
                let Form::Table(rows) = &self.form else {
                    unreachable!("row shapes only come from tables")
                };
                let row = &rows[i];
                for j in 1..=row.m {
                    let s = symbol(row.positions.binary_search(&j).is_ok(), rng);
                    out.push(s);
                }
            }
        }
    }
}

fn validate_table(rows: &[TableRow]) -> Result<Vec<TableRow>> {
    if rows.is_empty() {
        return Err(Error::domain("explicit_table rows", "empty table"));
    }
    let mut sorted = Vec::with_capacity(rows.len());
    let mut sum = 0.0;
    let mut emits = 0.0;
    let mut replicates = 0.0;
    for (i, row) in rows.iter().enumerate() {
        check_prob("explicit_table probability", row.prob)?;
        let mut positions = row.positions.clone();
        positions.sort_unstable();
        for w in positions.windows(2) {
            if w[0] == w[1] {
                return Err(ChannelViolation::DuplicatePosition { row: i, pos: w[0] }.into());
            }
        }
        if let Some(&pos) = positions.iter().find(|&&p| p == 0 || p > row.m) {
            return Err(ChannelViolation::PositionOutOfRange {
                row: i,
                pos,
                m: row.m,
            }
            .into());
        }
        sum += row.prob;
        if row.m > 0 {
            emits += row.prob;
        }
        if !positions.is_empty() {
            replicates += row.prob;
        }
        sorted.push(TableRow {
            m: row.m,
            positions,
            prob: row.prob,
        });
    }
    if (sum - 1.0).abs() > NORMALIZATION_TOL {
        return Err(ChannelViolation::NotNormalized { sum }.into());
    }
    if emits == 0.0 {
        return Err(ChannelViolation::NeverEmits.into());
    }
    if replicates == 0.0 {
        return Err(ChannelViolation::NeverReplicates.into());
    }
    Ok(sorted)
}

impl Form {
    pub(crate) fn pmf(&self, j: usize) -> f64 {
        match self {
            Form::InsertThenKeep { sigma, keep } => {
                let fail = 1.0 - sigma;
                let geo = |g: usize| sigma * fail.powi(g as i32);
                let dropped = (1.0 - keep) * geo(j);
                if j == 0 {
                    dropped
                } else {
                    dropped + keep * geo(j - 1)
                }
            }
            Form::Replicate(LengthLaw::Table { probs }) => {
                if j == 0 {
                    0.0
                } else {
                    probs.get(j - 1).copied().unwrap_or(0.0)
                }
            }
            Form::Replicate(LengthLaw::Geometric { p }) => {
                if j == 0 {
                    0.0
                } else {
                    p * (1.0 - p).powi(j as i32 - 1)
                }
            }
            Form::Table(rows) => rows.iter().filter(|r| r.m == j).map(|r| r.prob).sum(),
        }
    }

    pub(crate) fn tail(&self, tau: usize) -> f64 {
        if tau == 0 {
            return 1.0;
        }
        match self {
            Form::InsertThenKeep { sigma, keep } => {
                let fail = 1.0 - sigma;
                fail.powi(tau as i32) + keep * sigma * fail.powi(tau as i32 - 1)
            }
            Form::Replicate(LengthLaw::Table { probs }) => probs.iter().skip(tau - 1).sum(),
            Form::Replicate(LengthLaw::Geometric { p }) => (1.0 - p).powi(tau as i32 - 1),
            Form::Table(rows) => rows.iter().filter(|r| r.m >= tau).map(|r| r.prob).sum(),
        }
    }

    fn mean_m(&self) -> f64 {
        match self {
            Form::InsertThenKeep { sigma, keep } => (1.0 - sigma) / sigma + keep,
            Form::Replicate(LengthLaw::Table { probs }) => probs
                .iter()
                .enumerate()
                .map(|(k, p)| (k + 1) as f64 * p)
                .sum(),
            Form::Replicate(LengthLaw::Geometric { p }) => 1.0 / p,
            Form::Table(rows) => rows.iter().map(|r| r.m as f64 * r.prob).sum(),
        }
    }

    /// `Pr[k in R]` for 1-based `k`.
    pub(crate) fn replication(&self, k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        match self {
            Form::InsertThenKeep { sigma, keep } => keep * sigma * (1.0 - sigma).powi(k as i32 - 1),
            Form::Replicate(_) => self.tail(k),
            Form::Table(rows) => rows
                .iter()
                .filter(|r| r.positions.binary_search(&k).is_ok())
                .map(|r| r.prob)
                .sum(),
        }
    }

    /// `sum_{k > t} r(k) rho^(k - 1)`, infinite when the series diverges.
    pub(crate) fn replication_tail(&self, t: usize, rho: f64) -> f64 {
        let geometric = |scale: f64, fail: f64| {
            let x = fail * rho;
            if x < 1.0 {
                scale * x.powi(t as i32) / (1.0 - x)
            } else {
                f64::INFINITY
            }
        };
        match self {
            Form::InsertThenKeep { sigma, keep } => geometric(keep * sigma, 1.0 - sigma),
            Form::Replicate(LengthLaw::Geometric { p }) => geometric(1.0, 1.0 - p),
            Form::Replicate(LengthLaw::Table { probs }) => ((t + 1)..=probs.len())
                .map(|k| self.tail(k) * rho.powi(k as i32 - 1))
                .sum(),
            Form::Table(rows) => rows
                .iter()
                .map(|r| {
                    r.prob
                        * r.positions
                            .iter()
                            .filter(|&&k| k > t)
                            .map(|&k| rho.powi(k as i32 - 1))
                            .sum::<f64>()
                })
                .sum(),
        }
    }

    pub(crate) fn expected_replications(&self) -> f64 {
        match self {
            Form::InsertThenKeep { keep, .. } => *keep,
            Form::Replicate(_) => self.mean_m(),
            Form::Table(rows) => rows.iter().map(|r| r.positions.len() as f64 * r.prob).sum(),
        }
    }

    fn max_m(&self) -> Option<usize> {
        match self {
            Form::InsertThenKeep { sigma, .. } => (*sigma == 1.0).then_some(1),
            Form::Replicate(LengthLaw::Table { probs }) => {
                probs.iter().rposition(|&p| p > 0.0).map(|k| k + 1)
            }
            Form::Replicate(LengthLaw::Geometric { p }) => (*p == 1.0).then_some(1),
            Form::Table(rows) => rows.iter().filter(|r| r.prob > 0.0).map(|r| r.m).max(),
        }
    }

    fn certificate(&self, max_m: Option<usize>) -> TailCertificate {
        if let Some(m) = max_m {
            // Pr[M >= tau] <= 1 <= e^(alpha (m - tau)) up to the support edge, 0 after.
            let alpha = (30.0 / m as f64).min(1.0);
            return TailCertificate {
                kappa: (alpha * m as f64).exp(),
                alpha,
            };
        }
        let fail = match self {
            Form::InsertThenKeep { sigma, .. } => 1.0 - sigma,
            Form::Replicate(LengthLaw::Geometric { p }) => 1.0 - p,
            _ => unreachable!("only geometric laws have unbounded support"),
        };
        // Both geometric forms satisfy Pr[M >= tau] <= (1 - s)^(tau - 1).
        TailCertificate {
            kappa: 1.0 / fail,
            alpha: -fail.ln(),
        }
    }
}

/// Replication probabilities `r(k) = Pr[k in R]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplicationProfile {
    /// `r[k - 1] = Pr[k in R]`.
    pub r: Vec<f64>,
    /// `E[|R|]`.
    pub expected_len: f64,
    /// Upper bound on `sum_{k > len} r(k)`.
    pub remainder: f64,
}

/// What the channel did to one input bit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerBitOutcome {
    pub m: usize,
    /// Sorted 1-based replication positions, a subset of `1..=m`.
    pub r_set: Vec<usize>,
}

/// One channel output over the alphabet `{-1, +1}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Trace {
    symbols: Vec<i8>,
}

impl Trace {
    pub fn new(symbols: Vec<i8>) -> Result<Self> {
        check_word_symbols(&symbols)?;
        Ok(Self { symbols })
    }

    pub fn symbols(&self) -> &[i8] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn into_symbols(self) -> Vec<i8> {
        self.symbols
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_word(&self.symbols))
    }
}

impl FromStr for Trace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(Self {
            symbols: parse_word(s)?,
        })
    }
}

fn check_word_symbols(x: &[i8]) -> Result<()> {
    match x.iter().position(|&s| s != 1 && s != -1) {
        Some(i) => Err(Error::domain(
            "word",
            format!("symbol {} at position {i} is not +1 or -1", x[i]),
        )),
        None => Ok(()),
    }
}

/// Checks that `x` is a nonempty word over `{-1, +1}`.
pub fn check_word(x: &[i8]) -> Result<()> {
    if x.is_empty() {
        return Err(Error::domain("word", "input must have at least one bit"));
    }
    check_word_symbols(x)
}

/// Parses `"+-+"` into `[1, -1, 1]`.
pub fn parse_word(s: &str) -> Result<Vec<i8>> {
    s.chars()
        .map(|c| match c {
            '+' => Ok(1),
            '-' => Ok(-1),
            other => Err(Error::domain(
                "word",
                format!("unexpected character {other:?}"),
            )),
        })
        .collect()
}

pub fn format_word(x: &[i8]) -> String {
    x.iter().map(|&s| if s > 0 { '+' } else { '-' }).collect()
}

/// Draws `(m, R)` for one input bit.
pub fn sample_per_bit<R: Rng + ?Sized>(spec: &ChannelSpec, rng: &mut R) -> PerBitOutcome {
    spec.outcome(spec.draw_shape(rng))
}

/// Sends `x` through the channel. Bit `i` draws from substream `i` of `rng`.
pub fn apply_channel(spec: &ChannelSpec, x: &[i8], rng: &mut TraceRng) -> Result<Trace> {
    let mut out = Vec::with_capacity(x.len() * 2);
    apply_into(spec, x, rng, &mut out)?;
    Ok(Trace { symbols: out })
}

/// [`apply_channel`] that reports every per-bit outcome to `observe`.
pub fn apply_channel_observed(
    spec: &ChannelSpec,
    x: &[i8],
    rng: &mut TraceRng,
    mut observe: impl FnMut(usize, &PerBitOutcome),
) -> Result<Trace> {
    check_word(x)?;
    let mut out = Vec::with_capacity(x.len() * 2);
    for (i, &bit) in x.iter().enumerate() {
        rng.enter_bit(i);
        let shape = spec.draw_shape(rng);
        observe(i, &spec.outcome(shape));
        spec.emit(shape, bit, rng, &mut out);
    }
    Ok(Trace { symbols: out })
}

/// Appends the trace of `x` to `out`, reusing its allocation.
pub fn apply_into(
    spec: &ChannelSpec,
    x: &[i8],
    rng: &mut TraceRng,
    out: &mut Vec<i8>,
) -> Result<()> {
    check_word(x)?;
    for (i, &bit) in x.iter().enumerate() {
        rng.enter_bit(i);
        let shape = spec.draw_shape(rng);
        spec.emit(shape, bit, rng, out);
    }
    Ok(())
}
