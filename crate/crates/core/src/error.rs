use thiserror::Error;

/// Reasons a channel description is rejected even though every parameter is
/// individually in range.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelViolation {
    #[error("Pr[M > 0] = 0: the channel never emits any output symbol")]
    NeverEmits,
    #[error("Pr[R nonempty] = 0: the channel never replicates its input bit")]
    NeverReplicates,
    #[error("probabilities sum to {sum}, expected 1 within 1e-12")]
    NotNormalized { sum: f64 },
    #[error("table row {row}: replication position {pos} is outside 1..={m}")]
    PositionOutOfRange { row: usize, pos: usize, m: usize },
    #[error("table row {row}: replication position {pos} listed twice")]
    DuplicatePosition { row: usize, pos: usize },
    #[error("tail certificate (kappa = {kappa}, alpha = {alpha}) fails at tau = {tau}")]
    TailCertificate { kappa: f64, alpha: f64, tau: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter or argument lies outside the domain of the operation.
    #[error("{what}: {detail}")]
    Domain { what: &'static str, detail: String },

    #[error("invalid channel: {0}")]
    InvalidChannel(#[from] ChannelViolation),

    /// Newton continuation gave up before reaching the target angle.
    #[error(
        "inversion of g_M did not converge for phi = {phi} (reached t = {reached:.6}): {reason}"
    )]
    Convergence {
        phi: f64,
        reached: f64,
        reason: String,
    },
}

impl Error {
    pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            what,
            detail: detail.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
