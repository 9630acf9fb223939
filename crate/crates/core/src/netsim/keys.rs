//! Distilled-key accounting: per-link key buffers, relay composition and
//! pre-shared pool replenishment.

use std::collections::BTreeMap;

use bitvec::prelude::*;
use rand::RngCore;

use super::NetsimError;
use crate::crypto::mac::KeyBits;
use crate::crypto::PresharedKeyPool;

/// Unordered node pair, stored sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairKey(String, String);

impl PairKey {
    pub fn new(a: &str, b: &str) -> Self {
        if a <= b {
            PairKey(a.to_owned(), b.to_owned())
        } else {
            PairKey(b.to_owned(), a.to_owned())
        }
    }

    pub fn nodes(&self) -> (&str, &str) {
        (&self.0, &self.1)
    }
}

/// Key shared by each linked pair. Both ends hold the same bits, so one
/// buffer per pair is kept and either end can read it.
#[derive(Debug, Clone, Default)]
pub struct KeyStore {
    links: BTreeMap<PairKey, KeyBits>,
}

impl KeyStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn balance(&self, a: &str, b: &str) -> u64 {
        self.links.get(&PairKey::new(a, b)).map_or(0, |k| k.len() as u64)
    }

    pub fn total_bits(&self) -> u64 {
        self.links.values().map(|k| k.len() as u64).sum()
    }

    /// Map from peer to balance for node `id`.
    pub fn peers_of(&self, id: &str) -> BTreeMap<String, u64> {
        self.links
            .iter()
            .filter_map(|(p, k)| match p.nodes() {
                (x, y) if x == id => Some((y.to_owned(), k.len() as u64)),
                (x, y) if y == id => Some((x.to_owned(), k.len() as u64)),
                _ => None,
            })
            .collect()
    }

    pub fn deposit(&mut self, a: &str, b: &str, bits: &BitSlice<u8, Lsb0>) {
        self.links.entry(PairKey::new(a, b)).or_default().extend_from_bitslice(bits);
    }

    /// Deposits `n` fresh bits drawn from `rng`.
    pub fn deposit_random(&mut self, a: &str, b: &str, n: u64, rng: &mut impl RngCore) {
        let mut bytes = vec![0u8; n.div_ceil(8) as usize];
        rng.fill_bytes(&mut bytes);
        self.deposit(a, b, &bytes.view_bits::<Lsb0>()[..n as usize]);
    }

    /// Removes the oldest `n` bits of the `a`-`b` buffer.
    pub fn withdraw(&mut self, a: &str, b: &str, n: u64) -> Result<KeyBits, NetsimError> {
        let available = self.balance(a, b);
        if n > available {
            return Err(NetsimError::InsufficientKey { needed: n, available });
        }
        let buf = self.links.get_mut(&PairKey::new(a, b)).expect("balance > 0");
        let rest = buf.split_off(n as usize);
        Ok(std::mem::replace(buf, rest))
    }

    /// Composes an end-to-end key along `path` (consecutive trusted nodes),
    /// drawing from the store. Returns the endpoint keys and the relays'
    /// public announcements.
    pub fn compose_along(&mut self, path: &[&str], max_bits: Option<u64>) -> Result<Composed, NetsimError> {
        if path.len() < 2 {
            return Err(NetsimError::Config("composition needs at least one hop".into()));
        }
        let mut l = path.windows(2).map(|w| self.balance(w[0], w[1])).min().unwrap();
        if let Some(m) = max_bits {
            l = l.min(m);
        }
        let mut hops = Vec::with_capacity(path.len() - 1);
        for w in path.windows(2) {
            hops.push(self.withdraw(w[0], w[1], l)?);
        }
        relay_compose(hops)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Composed {
    pub alice: KeyBits,
    pub bob: KeyBits,
    /// `k_i xor k_(i+1)` published by relay `i`.
    pub announcements: Vec<KeyBits>,
    /// Bits taken from each hop.
    pub consumed_per_hop: u64,
}

fn xor(a: &BitSlice<u8, Lsb0>, b: &BitSlice<u8, Lsb0>) -> KeyBits {
    let mut out = a.to_bitvec();
    out ^= b;
    out
}

/// Trusted-relay XOR forwarding. Hop `i` carries key `k_i`; every relay
/// publishes `k_i xor k_(i+1)` and the far end recovers `k_0`. All hops are
/// cut to the shortest, and that many bits are consumed from each.
pub fn relay_compose(hops: Vec<KeyBits>) -> Result<Composed, NetsimError> {
    let Some(l) = hops.iter().map(|h| h.len()).min() else {
        return Err(NetsimError::Config("composition needs at least one hop".into()));
    };
    if l == 0 {
        return Err(NetsimError::InsufficientHopKey { needed: 1, available: 0 });
    }
    let hops: Vec<&BitSlice<u8, Lsb0>> = hops.iter().map(|h| &h[..l]).collect();
    let announcements: Vec<KeyBits> = hops.windows(2).map(|w| xor(w[0], w[1])).collect();
    let mut bob = hops[hops.len() - 1].to_bitvec();
    for a in &announcements {
        bob ^= a.as_bitslice();
    }
    Ok(Composed { alice: hops[0].to_bitvec(), bob, announcements, consumed_per_hop: l as u64 })
}

/// One pre-shared pool per unordered pair.
#[derive(Debug, Clone, Default)]
pub struct PresharedRegistry {
    pools: BTreeMap<PairKey, PresharedKeyPool>,
}

impl PresharedRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.pools.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pools.is_empty()
    }

    pub fn get(&self, a: &str, b: &str) -> Option<&PresharedKeyPool> {
        self.pools.get(&PairKey::new(a, b))
    }

    pub fn get_mut(&mut self, a: &str, b: &str) -> Option<&mut PresharedKeyPool> {
        self.pools.get_mut(&PairKey::new(a, b))
    }

    /// Adds a pool for a pair that has none.
    pub fn insert(&mut self, pool: PresharedKeyPool) -> Result<(), NetsimError> {
        let (a, b) = pool.owners();
        let k = PairKey::new(a, b);
        if self.pools.contains_key(&k) {
            return Err(NetsimError::Config(format!("pair {a}-{b} already has a pool")));
        }
        self.pools.insert(k, pool);
        Ok(())
    }

    pub fn total_remaining(&self) -> u64 {
        self.pools.values().map(|p| p.remaining()).sum()
    }
}

/// Moves `bits` of distilled key for `a`-`b` into their pool, creating the
/// pool if needed. Returns the moved bits so that live sessions holding a copy
/// of the pool can be extended in step.
pub fn replenish_pool(
    registry: &mut PresharedRegistry,
    store: &mut KeyStore,
    a: &str,
    b: &str,
    bits: u64,
) -> Result<KeyBits, NetsimError> {
    let moved = store.withdraw(a, b, bits)?;
    match registry.get_mut(a, b) {
        Some(p) => p.extend(&moved),
        None => registry.insert(PresharedKeyPool::new(a, b, moved.clone()))?,
    }
    Ok(moved)
}
