//! Two-phase, two-way message authentication for the QKD classical channel.
//!
//! Phase 1 exchanges identities, nonces and (in PQC mode) certificates.
//! Phase 2 authenticates each of the four per-cycle message classes with a
//! tag over `R_peer ‖ D ‖ class ‖ cycle`, where `R_peer` is the receiver's
//! nonce and `D` the SM3 digest of the payload.

mod cycle;
mod message;
pub mod mitm;
mod session;
pub mod transport;

pub use cycle::{run_auth_cycle, run_auth_cycle_with, CyclePayloads, CycleReport, CycleVerdict, Direction};
pub use message::{AuthenticatedMessage, Frame, Hello, MessageClass};
pub use session::{AuthMode, AuthSession, Credentials, RejectReason, SessionState, Verdict};

use crate::crypto::CryptoError;
use crate::pki::CertReject;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AuthError {
    #[error("session is not ready")]
    NotReady,
    #[error("state violation: {0}")]
    StateViolation(&'static str),
    #[error("certificate rejected: {0}")]
    CertInvalid(CertReject),
    #[error("peer identity mismatch: expected `{expected}`, got `{got}`")]
    PeerMismatch { expected: String, got: String },
    #[error("transport timed out")]
    TransportTimeout,
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("malformed frame: {0}")]
    Malformed(&'static str),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
}
