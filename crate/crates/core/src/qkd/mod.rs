//! Decoy-state BB84 link model: gains, error rates, key rate with a finite-size
//! penalty, polarization drift with feedback, and intercept-resend.

pub mod attack;
pub mod channel;
pub mod cycle;
pub mod drift;
pub mod link;
pub mod params;

pub use attack::{attacked_estimate, intercept_resend_qber, simulate_intercept_resend, AttackTally};
pub use channel::{binary_entropy, channel_estimate, finite_key_factor, secure_key_rate, ChannelEstimate};
pub use cycle::{CycleResult, FeedbackTrigger, LinkModel, CYCLE_SECONDS};
pub use drift::{step_drift, DriftConfig, DriftState};
pub use link::{run_link, LinkRun, LinkSummary, WindowStat, WINDOW_SECONDS};
pub use params::{LinkParams, ParamsFile};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QkdError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("attack fraction {0} outside [0, 1]")]
    InvalidFraction(f64),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
}
