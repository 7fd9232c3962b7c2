//! Simulation and analysis of replication-insertion channels for trace
//! reconstruction.
//!
//! A [`ChannelSpec`] maps every input bit to a block of output symbols. The
//! [`mean_trace`] module computes the expected trace, [`genfun`] holds the
//! generating-function machinery that bounds how far apart two mean traces
//! must be, and [`reconstruction`] turns both into estimators and
//! experiments.

pub mod channel;
pub mod error;
pub mod genfun;
pub mod mean_trace;
pub mod reconstruction;
pub mod rng;

pub use channel::{
    apply_channel, apply_channel_observed, apply_into, check_word, format_word, parse_word,
    sample_per_bit, ChannelSpec, Law, LengthLaw, PerBitOutcome, ReplicationProfile, TableRow,
    TailCertificate, Trace,
};
pub use error::{ChannelViolation, Error, Result};
pub use genfun::{ArcSpec, Pgf};
pub use mean_trace::{MeanTrace, PositionWeights};
pub use reconstruction::{CandidateSet, SeparationReport};
pub use rng::{derive_seed, TraceRng};
