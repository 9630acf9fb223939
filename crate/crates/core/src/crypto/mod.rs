//! Cryptographic primitives: SM3, the lattice signature, the pre-shared-key
//! MAC and nonce generation.

pub mod keyfile;
pub mod mac;
pub mod nonce;
mod pack;
pub mod params;
pub mod ring;
pub mod sig;
pub mod sm3;

pub use mac::{mac_tag, mac_verify, ItsMacTag, PresharedKeyPool};
pub use nonce::{gen_nonce, EntropySource, Nonce};
pub use params::{ParamsId, SigParams};
pub use sig::{
    sig_keygen, sig_sign, sig_verify, sig_verify_bytes, LatticeSignature, PublicKey, SecretKey,
    SigKeypair,
};
pub use sm3::{digest, Digest256};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CryptoError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("randomness source failed: {0}")]
    Rng(String),
    #[error("signing gave up after {0} restarts")]
    AbortLimitExceeded(u32),
    #[error("malformed encoding: {0}")]
    Malformed(&'static str),
    #[error("unsupported encoding version {0}")]
    UnsupportedVersion(u16),
    #[error("key pool exhausted: need {needed} bits, {remaining} left")]
    PoolExhausted { needed: u64, remaining: u64 },
    #[error("key pool out of sync: local cursor {local}, tag claims {claimed}")]
    PoolDesync { local: u64, claimed: u64 },
}
