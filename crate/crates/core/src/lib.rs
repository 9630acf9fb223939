pub mod auth;
pub mod cli;
pub mod crypto;
pub mod netsim;
pub mod pki;
pub mod qkd;
pub mod rng;
