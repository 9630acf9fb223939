//! Key-management cost of pre-shared keys versus certificates.

use super::topology::Topology;
use crate::auth::AuthMode;

/// `C(n, 2)`: pools needed so that any two of `n` users can authenticate.
pub fn preshared_pairs_required(n: u32) -> u64 {
    let n = n as u64;
    n * n.saturating_sub(1) / 2
}

/// One certificate per user.
pub fn certificates_required(n: u32) -> u64 {
    n as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JoinCost {
    pub preshared_pairs: u64,
    pub certificates: u64,
}

impl JoinCost {
    pub fn total(&self) -> u64 {
        self.preshared_pairs + self.certificates
    }
}

/// Cost of adding `k` users to a network of `n`. With pre-shared keys an
/// all-pass network needs a pool from each newcomer to everyone; a relay
/// network only needs one pool per newcomer with its relay.
pub fn join_cost(all_pass: bool, n: u32, k: u32, mode: AuthMode) -> JoinCost {
    let (n, k) = (n as u64, k as u64);
    match mode {
        AuthMode::Pqc => JoinCost { preshared_pairs: 0, certificates: k },
        AuthMode::PresharedKey if all_pass => {
            JoinCost { preshared_pairs: k * n + k * k.saturating_sub(1) / 2, certificates: 0 }
        }
        AuthMode::PresharedKey => JoinCost { preshared_pairs: k, certificates: 0 },
    }
}

pub fn join_cost_for(topology: &Topology, n: u32, k: u32, mode: AuthMode) -> JoinCost {
    join_cost(topology.is_all_pass(), n, k, mode)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(preshared_pairs_required(100), 4950);
        assert_eq!(preshared_pairs_required(10), 45);
        assert_eq!(preshared_pairs_required(0), 0);
        assert_eq!(preshared_pairs_required(1), 0);
        assert_eq!(certificates_required(10), 10);
        assert_eq!(preshared_pairs_required(u32::MAX), (u32::MAX as u64) * (u32::MAX as u64 - 1) / 2);
    }

    #[test]
    fn joins() {
        assert_eq!(join_cost(true, 10, 2, AuthMode::PresharedKey).preshared_pairs, 21);
        assert_eq!(join_cost(true, 10, 2, AuthMode::Pqc).certificates, 2);
        assert_eq!(join_cost(true, 10, 0, AuthMode::PresharedKey).total(), 0);
        assert_eq!(join_cost(true, 10, 0, AuthMode::Pqc).total(), 0);
        assert_eq!(join_cost(false, 10, 2, AuthMode::PresharedKey).preshared_pairs, 2);
    }

    #[test]
    fn telescoping() {
        for n in 0..=50u32 {
            let built: u64 = (0..n).map(|i| join_cost(true, i, 1, AuthMode::PresharedKey).preshared_pairs).sum();
            assert_eq!(built, preshared_pairs_required(n));
        }
    }
}
