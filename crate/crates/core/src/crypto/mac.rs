//! Wegman-Carter MAC over a pre-shared key pool.
//!
//! The first tag drawn from a pool consumes a 383-bit Toeplitz seed, which
//! then stays fixed for the pool's lifetime. Every tag (the first included)
//! consumes a fresh 128-bit one-time pad:
//!
//! `tag = Toeplitz(SM3(message)) XOR pad`
//!
//! Tags carry the pool range they consumed so that a verifier whose cursor
//! has drifted reports a desync rather than a plain mismatch.

use std::fmt;

use bitvec::prelude::*;

use super::sm3;
use super::CryptoError;

pub const TAG_BITS: u64 = 128;
const INPUT_BITS: usize = 256;
pub const TOEPLITZ_SEED_BITS: u64 = (TAG_BITS as usize + INPUT_BITS - 1) as u64;

pub type KeyBits = BitVec<u8, Lsb0>;

#[derive(Clone)]
pub struct PresharedKeyPool {
    owners: (String, String),
    bits: KeyBits,
    cursor: u64,
    // One row per output bit, packed into four little-endian words.
    toeplitz: Option<Vec<[u64; 4]>>,
    issued: Vec<(u64, u64)>,
}

impl fmt::Debug for PresharedKeyPool {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PresharedKeyPool")
            .field("owners", &self.owners)
            .field("capacity", &self.capacity())
            .field("cursor", &self.cursor)
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ItsMacTag {
    pub tag: [u8; 16],
    pub range_start: u64,
    pub range_len: u64,
}

impl ItsMacTag {
    pub const ENCODED_LEN: usize = 16 + 8 + 8;

    /// `tag ‖ range_start ‖ range_len`, integers big-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(Self::ENCODED_LEN);
        out.extend_from_slice(&self.tag);
        out.extend_from_slice(&self.range_start.to_be_bytes());
        out.extend_from_slice(&self.range_len.to_be_bytes());
        out
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self, CryptoError> {
        if b.len() != Self::ENCODED_LEN {
            return Err(CryptoError::Malformed("mac tag length"));
        }
        Ok(ItsMacTag {
            tag: b[..16].try_into().unwrap(),
            range_start: u64::from_be_bytes(b[16..24].try_into().unwrap()),
            range_len: u64::from_be_bytes(b[24..32].try_into().unwrap()),
        })
    }
}

impl PresharedKeyPool {
    pub fn new(a: impl Into<String>, b: impl Into<String>, bits: KeyBits) -> Self {
        PresharedKeyPool { owners: (a.into(), b.into()), bits, cursor: 0, toeplitz: None, issued: Vec::new() }
    }

    pub fn from_bytes(a: impl Into<String>, b: impl Into<String>, bytes: &[u8]) -> Self {
        Self::new(a, b, KeyBits::from_slice(bytes))
    }

    pub fn owners(&self) -> (&str, &str) {
        (&self.owners.0, &self.owners.1)
    }

    pub fn capacity(&self) -> u64 {
        self.bits.len() as u64
    }

    pub fn cursor(&self) -> u64 {
        self.cursor
    }

    pub fn remaining(&self) -> u64 {
        self.capacity() - self.cursor
    }

    /// Ranges consumed so far, in issue order.
    pub fn consumed_ranges(&self) -> &[(u64, u64)] {
        &self.issued
    }

    /// Bits the next tag will consume.
    pub fn next_tag_cost(&self) -> u64 {
        if self.toeplitz.is_some() {
            TAG_BITS
        } else {
            TOEPLITZ_SEED_BITS + TAG_BITS
        }
    }

    /// Appends fresh key bits to the end of the reservoir.
    pub fn extend(&mut self, more: &BitSlice<u8, Lsb0>) {
        self.bits.extend_from_bitslice(more);
    }

    /// Flips one not-yet-consumed bit. Test and adversary harness hook.
    pub fn flip_bit(&mut self, index: u64) {
        let i = index as usize;
        let v = self.bits[i];
        self.bits.set(i, !v);
    }

    fn take(&mut self, n: u64) -> Result<&BitSlice<u8, Lsb0>, CryptoError> {
        if self.remaining() < n {
            return Err(CryptoError::PoolExhausted { needed: n, remaining: self.remaining() });
        }
        let start = self.cursor as usize;
        self.cursor += n;
        Ok(&self.bits[start..start + n as usize])
    }

    /// Consumes the range for one tag and returns the pad plus the range.
    fn consume_for_tag(&mut self) -> Result<([u8; 16], u64, u64), CryptoError> {
        let needed = self.next_tag_cost();
        if self.remaining() < needed {
            return Err(CryptoError::PoolExhausted { needed, remaining: self.remaining() });
        }
        let start = self.cursor;
        if self.toeplitz.is_none() {
            let seed = self.take(TOEPLITZ_SEED_BITS)?.to_bitvec();
            self.toeplitz = Some(toeplitz_rows(&seed));
        }
        let mut pad = [0u8; 16];
        for (i, bit) in self.take(TAG_BITS)?.iter().enumerate() {
            if *bit {
                pad[i / 8] |= 1 << (i % 8);
            }
        }
        self.issued.push((start, needed));
        Ok((pad, start, needed))
    }

    fn hash(&self, message: &[u8]) -> [u8; 16] {
        let rows = self.toeplitz.as_ref().expect("seed drawn before hashing");
        let d = sm3::digest(message);
        let mut x = [0u64; 4];
        for (w, chunk) in x.iter_mut().zip(d.as_bytes().chunks_exact(8)) {
            *w = u64::from_le_bytes(chunk.try_into().unwrap());
        }
        let mut out = [0u8; 16];
        for (i, row) in rows.iter().enumerate() {
            let parity = row.iter().zip(&x).map(|(r, v)| (r & v).count_ones()).sum::<u32>() & 1;
            if parity == 1 {
                out[i / 8] |= 1 << (i % 8);
            }
        }
        out
    }
}

/// Row i of the Toeplitz matrix: `T[i][j] = seed[i - j + INPUT_BITS - 1]`.
fn toeplitz_rows(seed: &BitSlice<u8, Lsb0>) -> Vec<[u64; 4]> {
    (0..TAG_BITS as usize)
        .map(|i| {
            let mut row = [0u64; 4];
            for j in 0..INPUT_BITS {
                if seed[i + INPUT_BITS - 1 - j] {
                    row[j / 64] |= 1 << (j % 64);
                }
            }
            row
        })
        .collect()
}

pub fn mac_tag(pool: &mut PresharedKeyPool, message: &[u8]) -> Result<ItsMacTag, CryptoError> {
    let (pad, range_start, range_len) = pool.consume_for_tag()?;
    let mut tag = pool.hash(message);
    for (t, p) in tag.iter_mut().zip(pad) {
        *t ^= p;
    }
    Ok(ItsMacTag { tag, range_start, range_len })
}

/// Consumes the same range the signer consumed, then compares. The range is
/// consumed even when the comparison fails so both ends stay in step.
pub fn mac_verify(pool: &mut PresharedKeyPool, message: &[u8], tag: &ItsMacTag) -> Result<bool, CryptoError> {
    if tag.range_start != pool.cursor || tag.range_len != pool.next_tag_cost() {
        return Err(CryptoError::PoolDesync { local: pool.cursor, claimed: tag.range_start });
    }
    let expected = mac_tag(pool, message)?;
    let diff = expected.tag.iter().zip(&tag.tag).fold(0u8, |acc, (a, b)| acc | (a ^ b));
    Ok(diff == 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, RngCore, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn pool_pair(bytes: usize, seed: u64) -> (PresharedKeyPool, PresharedKeyPool) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut key = vec![0u8; bytes];
        rng.fill_bytes(&mut key);
        let p = PresharedKeyPool::from_bytes("A", "B", &key);
        (p.clone(), p)
    }

    #[test]
    fn round_trip_and_costs() {
        let (mut a, mut b) = pool_pair(256, 1);
        let t1 = mac_tag(&mut a, b"sift").unwrap();
        assert_eq!((t1.range_start, t1.range_len), (0, 511));
        assert!(mac_verify(&mut b, b"sift", &t1).unwrap());
        let t2 = mac_tag(&mut a, b"sift").unwrap();
        assert_eq!((t2.range_start, t2.range_len), (511, 128));
        assert_ne!(t1.tag, t2.tag);
        assert!(mac_verify(&mut b, b"sift", &t2).unwrap());
        assert_eq!(a.cursor(), b.cursor());
    }

    #[test]
    fn replay_is_desync() {
        let (mut a, mut b) = pool_pair(256, 2);
        let t = mac_tag(&mut a, b"x").unwrap();
        assert!(mac_verify(&mut b, b"x", &t).unwrap());
        assert!(matches!(mac_verify(&mut b, b"x", &t), Err(CryptoError::PoolDesync { .. })));
    }

    #[test]
    fn exhaustion() {
        let (mut a, _) = pool_pair(63, 3);
        assert!(matches!(mac_tag(&mut a, b"x"), Err(CryptoError::PoolExhausted { needed: 511, .. })));
        assert_eq!(a.cursor(), 0);
        let mut empty = PresharedKeyPool::new("A", "B", KeyBits::new());
        assert!(mac_tag(&mut empty, b"").is_err());
    }

    #[test]
    fn flipped_pool_bit_rejects() {
        for idx in [0u64, 200, 382, 383, 450, 510] {
            let (mut a, mut b) = pool_pair(128, 4);
            a.flip_bit(idx);
            let t = mac_tag(&mut a, b"payload").unwrap();
            assert!(!mac_verify(&mut b, b"payload", &t).unwrap(), "bit {idx}");
        }
    }

    #[test]
    fn single_byte_corruptions_reject() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let (mut a, mut b) = pool_pair(20_000, 6);
        for _ in 0..1000 {
            let mut msg = vec![0u8; 40];
            rng.fill_bytes(&mut msg);
            let t = mac_tag(&mut a, &msg).unwrap();
            let pos = rng.random_range(0..msg.len());
            msg[pos] ^= rng.random_range(1..=255u8);
            assert!(!mac_verify(&mut b, &msg, &t).unwrap());
        }
    }

    #[test]
    fn toeplitz_is_linear() {
        // Oracle: H(x) computed bit by bit from the defining formula.
        let (mut a, _) = pool_pair(128, 7);
        mac_tag(&mut a, b"").unwrap();
        let seed: Vec<bool> = a.bits[..TOEPLITZ_SEED_BITS as usize].iter().map(|b| *b).collect();
        let d = sm3::digest(b"hello");
        let x: Vec<bool> = (0..256).map(|j| d.as_bytes()[j / 8] >> (j % 8) & 1 == 1).collect();
        let h = a.hash(b"hello");
        for i in 0..128 {
            let mut bit = false;
            for j in 0..256 {
                bit ^= seed[i + 255 - j] & x[j];
            }
            assert_eq!(h[i / 8] >> (i % 8) & 1 == 1, bit, "row {i}");
        }
    }

    #[test]
    fn tag_encoding_round_trip() {
        let t = ItsMacTag { tag: [9; 16], range_start: 511, range_len: 128 };
        assert_eq!(ItsMacTag::from_bytes(&t.to_bytes()).unwrap(), t);
        assert!(ItsMacTag::from_bytes(&[0; 31]).is_err());
    }
}
