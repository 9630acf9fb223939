//! Network orchestration: topologies of users, optical switches and trusted
//! relays, session plans, key relay and key-management cost.

pub mod authlink;
pub mod cost;
pub mod keys;
pub mod plan;
pub mod scenario;
pub mod topology;

pub use authlink::{AuthLink, Credentialer};
pub use cost::{certificates_required, join_cost, join_cost_for, preshared_pairs_required, JoinCost};
pub use keys::{relay_compose, replenish_pool, Composed, KeyStore, PairKey, PresharedRegistry};
pub use plan::{PlanPair, SessionPlan};
pub use scenario::{run_scenario, ReportRow, ScenarioReport, REPORT_HEADER};
pub use topology::{Hop, Node, NodeKind, QkdRole, Route, Segment, SwitchLedger, Topology};

use crate::auth::AuthError;
use crate::crypto::CryptoError;
use crate::qkd::QkdError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NetsimError {
    #[error("config: {0}")]
    Config(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("`{0}` cannot connect to itself")]
    SameEndpoint(String),
    #[error("no route from {0} to {1}")]
    NoRoute(String, String),
    #[error("optical switch {0} is busy")]
    SwitchBusy(String),
    #[error("insufficient hop key: need {needed} bits, have {available}")]
    InsufficientHopKey { needed: u64, available: u64 },
    #[error("insufficient key: need {needed} bits, have {available}")]
    InsufficientKey { needed: u64, available: u64 },
    #[error(transparent)]
    Auth(#[from] AuthError),
    #[error(transparent)]
    Qkd(#[from] QkdError),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
}
