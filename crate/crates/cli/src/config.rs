//! Command configurations. Every document is a JSON object with the
//! channel, the optional `seed` and `out`, and the command's own fields.
//! Unknown fields are errors.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tracelab_core::reconstruction::{PairMode, TruncationRule};
use tracelab_core::ChannelSpec;

use crate::error::{CliError, Result};

pub const DEFAULT_EPS: f64 = 1e-9;
pub const DEFAULT_OUT: &str = "tracelab-out";

/// How many mean-trace coordinates to keep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Truncation {
    /// A fixed window length.
    Len(usize),
    /// The smallest window whose discarded tail mass is at most `eps`.
    Eps(f64),
    /// `ceil(factor * n)`.
    Linear(f64),
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation::Eps(DEFAULT_EPS)
    }
}

impl From<Truncation> for TruncationRule {
    fn from(t: Truncation) -> Self {
        match t {
            Truncation::Len(len) => TruncationRule::Fixed(len),
            Truncation::Eps(eps) => TruncationRule::Eps(eps),
            Truncation::Linear(f) => TruncationRule::Linear(f),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PairSelection {
    #[default]
    AllPairs,
    Sampled {
        pairs: u64,
    },
}

impl PairSelection {
    pub fn mode(&self, seed: u64) -> PairMode {
        match *self {
            PairSelection::AllPairs => PairMode::AllPairs,
            PairSelection::Sampled { pairs } => PairMode::Sampled { pairs, seed },
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub channel: ChannelSpec,
    /// Input word over `+` and `-`.
    pub x: String,
    pub t: u64,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeanTraceConfig {
    pub channel: ChannelSpec,
    pub x: String,
    #[serde(default)]
    pub truncation: Truncation,
    /// Traces for the empirical estimate; 0 computes the exact mean only.
    #[serde(default)]
    pub traces: u64,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconstructConfig {
    pub channel: ChannelSpec,
    pub n: usize,
    pub t_grid: Vec<u64>,
    pub trials: u64,
    /// Also run the two strings of the closest pair as fixed inputs.
    #[serde(default)]
    pub designated: bool,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparationConfig {
    pub channel: ChannelSpec,
    pub n_values: Vec<usize>,
    #[serde(default)]
    pub truncation: Truncation,
    #[serde(default)]
    pub mode: PairSelection,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyConfig {
    pub channel: ChannelSpec,
    pub n: usize,
    /// Random distinct pairs to certify.
    #[serde(default)]
    pub pairs: u64,
    /// Extra pairs given as words.
    #[serde(default)]
    pub explicit_pairs: Vec<(String, String)>,
    /// Arc parameter; defaults to `n^{1/3}`.
    #[serde(default)]
    pub l: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcConfig {
    pub channel: ChannelSpec,
    /// Angles at which `g_M` is inverted.
    #[serde(default)]
    pub phis: Vec<f64>,
    /// Polynomials over `+`, `-` and `0` for the arc maximum search.
    #[serde(default)]
    pub polynomials: Vec<String>,
    /// Arc parameter; defaults to the cube root of each polynomial's length.
    #[serde(default)]
    pub l: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

/// Fields every command config shares.
pub trait Common: Serialize + DeserializeOwned {
    fn seed_mut(&mut self) -> &mut Option<u64>;
    fn out_mut(&mut self) -> &mut Option<PathBuf>;
}

macro_rules! impl_common {
    ($($t:ty),*) => {$(
        impl Common for $t {
            fn seed_mut(&mut self) -> &mut Option<u64> {
                &mut self.seed
            }
            fn out_mut(&mut self) -> &mut Option<PathBuf> {
                &mut self.out
            }
        }
    )*};
}

impl_common!(
    SampleConfig,
    MeanTraceConfig,
    ReconstructConfig,
    SeparationConfig,
    CertifyConfig,
    ArcConfig
);

/// Parses a config document, reporting the JSON path of the first error.
pub fn parse<C: DeserializeOwned>(text: &str) -> Result<C> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::config(path, e.into_inner())
    })
}

pub fn load<C: DeserializeOwned>(path: &Path) -> Result<C> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text)
}
