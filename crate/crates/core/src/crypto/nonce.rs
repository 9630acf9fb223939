use std::fmt;

use super::CryptoError;

/// Anything that can fill a buffer with random bytes. Implemented for every
/// `rand` generator, so `OsRng` and seeded `ChaCha20Rng` both work.
pub trait EntropySource {
    fn try_fill(&mut self, dest: &mut [u8]) -> Result<(), CryptoError>;
}

impl<R: rand::TryRngCore + ?Sized> EntropySource for R {
    fn try_fill(&mut self, dest: &mut [u8]) -> Result<(), CryptoError> {
        self.try_fill_bytes(dest).map_err(|e| CryptoError::Rng(e.to_string()))
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Nonce(pub [u8; 32]);

impl Nonce {
    pub const LEN: usize = 32;

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }
}

impl fmt::Debug for Nonce {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Nonce(")?;
        for b in &self.0[..6] {
            write!(f, "{b:02x}")?;
        }
        write!(f, "..)")
    }
}

pub fn gen_nonce(rng: &mut (impl EntropySource + ?Sized)) -> Result<Nonce, CryptoError> {
    let mut n = [0u8; 32];
    rng.try_fill(&mut n)?;
    Ok(Nonce(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn seeded_sequence_repeats() {
        let mut a = ChaCha20Rng::seed_from_u64(11);
        let mut b = ChaCha20Rng::seed_from_u64(11);
        for _ in 0..8 {
            assert_eq!(gen_nonce(&mut a).unwrap(), gen_nonce(&mut b).unwrap());
        }
    }

    #[test]
    fn os_source_works() {
        let mut os = rand::rngs::OsRng;
        let a = gen_nonce(&mut os).unwrap();
        let b = gen_nonce(&mut os).unwrap();
        assert_ne!(a, b);
    }

    struct Broken;
    impl EntropySource for Broken {
        fn try_fill(&mut self, _: &mut [u8]) -> Result<(), CryptoError> {
            Err(CryptoError::Rng("unplugged".into()))
        }
    }

    #[test]
    fn failure_propagates() {
        assert!(matches!(gen_nonce(&mut Broken), Err(CryptoError::Rng(_))));
    }
}
