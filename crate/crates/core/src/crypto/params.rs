//! Parameter sets for the module-lattice signature.
//!
//! Two sets ship with the crate. `REFERENCE` uses Dilithium-class dimensions
//! (n = 256, k = l = 4) and produces 2420-byte signatures. `DESK` keeps the same
//! modulus and bounds but shrinks the ring to n = 64 and the module to 2x2 so
//! that property tests can run many thousands of signatures quickly.
//!
//! Wire sizes for each set (little-endian, LSB-first bit packing):
//!
//! | set       | public key | secret key | signature |
//! |-----------|-----------:|-----------:|----------:|
//! | reference |       1312 |       3840 |      2420 |
//! | desk      |        192 |        592 |       346 |

use std::fmt;

use super::CryptoError;

/// Identifies a parameter set inside file headers and encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u16)]
pub enum ParamsId {
    Reference = 1,
    Desk = 2,
}

impl ParamsId {
    pub fn from_u16(v: u16) -> Option<Self> {
        match v {
            1 => Some(ParamsId::Reference),
            2 => Some(ParamsId::Desk),
            _ => None,
        }
    }

    pub fn params(self) -> SigParams {
        match self {
            ParamsId::Reference => SigParams::REFERENCE,
            ParamsId::Desk => SigParams::DESK,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ParamsId::Reference => "reference",
            ParamsId::Desk => "desk",
        }
    }
}

impl fmt::Display for ParamsId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ParamsId {
    type Err = CryptoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "reference" | "ref" => Ok(ParamsId::Reference),
            "desk" => Ok(ParamsId::Desk),
            other => Err(CryptoError::InvalidParams(format!("unknown parameter set `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SigParams {
    pub id: ParamsId,
    /// Ring dimension.
    pub n: usize,
    pub q: i64,
    /// Rows of the public matrix.
    pub k: usize,
    /// Columns of the public matrix.
    pub l: usize,
    pub eta: i64,
    pub tau: usize,
    pub beta: i64,
    pub gamma1: i64,
    pub gamma2: i64,
    /// Maximum number of hint bits in a signature.
    pub omega: usize,
    /// Bits dropped from t in the public key.
    pub d: u32,
}

impl SigParams {
    pub const REFERENCE: SigParams = SigParams {
        id: ParamsId::Reference,
        n: 256,
        q: 8_380_417,
        k: 4,
        l: 4,
        eta: 2,
        tau: 39,
        beta: 78,
        gamma1: 1 << 17,
        gamma2: (8_380_417 - 1) / 88,
        omega: 80,
        d: 13,
    };

    pub const DESK: SigParams = SigParams {
        id: ParamsId::Desk,
        n: 64,
        q: 8_380_417,
        k: 2,
        l: 2,
        eta: 2,
        tau: 16,
        beta: 32,
        gamma1: 1 << 17,
        gamma2: (8_380_417 - 1) / 88,
        omega: 24,
        d: 13,
    };

    pub fn validate(&self) -> Result<(), CryptoError> {
        let bad = |msg: String| Err(CryptoError::InvalidParams(msg));
        if !self.n.is_power_of_two() || !(8..=256).contains(&self.n) {
            return bad(format!("n = {} must be a power of two in 8..=256", self.n));
        }
        if self.q < 3 || self.q >= 1 << 31 || !is_prime(self.q) {
            return bad(format!("q = {} must be a prime below 2^31", self.q));
        }
        if (self.q - 1) % (2 * self.n as i64) != 0 {
            return bad(format!("q = {} is not 1 mod 2n", self.q));
        }
        if self.k == 0 || self.l == 0 {
            return bad("module ranks must be positive".into());
        }
        if self.eta <= 0 || self.tau == 0 || self.gamma1 <= 0 || self.gamma2 <= 0 || self.omega == 0 {
            return bad("all bounds must be positive".into());
        }
        if self.tau > self.n || self.tau > 64 {
            return bad(format!("tau = {} must not exceed min(n, 64)", self.tau));
        }
        if self.beta != self.tau as i64 * self.eta {
            return bad(format!("beta = {} must equal tau * eta = {}", self.beta, self.tau as i64 * self.eta));
        }
        if self.gamma1 <= self.beta {
            return bad("gamma1 must exceed beta".into());
        }
        if self.gamma1 as u64 & (self.gamma1 as u64 - 1) != 0 {
            return bad("gamma1 must be a power of two".into());
        }
        if self.gamma2 <= self.beta || (self.q - 1) % (2 * self.gamma2) != 0 {
            return bad("gamma2 must exceed beta and divide (q - 1) / 2".into());
        }
        if self.d == 0 || self.d >= bit_len(self.q as u64) {
            return bad(format!("d = {} out of range", self.d));
        }
        if self.omega > self.n * self.k || self.omega > 255 {
            return bad("omega too large".into());
        }
        Ok(())
    }

    // Packing widths.

    pub(crate) fn t1_bits(&self) -> u32 {
        bit_len(((self.q - 1) >> self.d) as u64)
    }

    pub(crate) fn eta_bits(&self) -> u32 {
        bit_len(2 * self.eta as u64)
    }

    pub(crate) fn z_bits(&self) -> u32 {
        1 + self.gamma1.trailing_zeros()
    }

    pub(crate) fn w1_bits(&self) -> u32 {
        bit_len((self.q - 1) as u64 / (2 * self.gamma2 as u64) - 1)
    }

    pub(crate) fn poly_bytes(&self, bits: u32) -> usize {
        self.n * bits as usize / 8
    }

    pub fn public_key_len(&self) -> usize {
        32 + self.k * self.poly_bytes(self.t1_bits())
    }

    pub fn secret_key_len(&self) -> usize {
        self.public_key_len()
            + 32
            + 64
            + (self.l + self.k) * self.poly_bytes(self.eta_bits())
            + self.k * self.poly_bytes(self.d)
    }

    pub fn signature_len(&self) -> usize {
        32 + self.l * self.poly_bytes(self.z_bits()) + self.omega + self.k
    }

    /// Probability that a single signing attempt passes both norm checks on
    /// z and on the low bits of w - c*s2, assuming the low bits are uniform.
    /// The c*t0 and hint-count checks are ignored; they almost never fire for
    /// the shipped sets.
    pub fn attempt_acceptance_probability(&self) -> f64 {
        let z_ok = (2.0 * (self.gamma1 - self.beta) as f64 - 1.0) / (2.0 * self.gamma1 as f64);
        let r0_ok = (2.0 * (self.gamma2 - self.beta) as f64 - 1.0) / (2.0 * self.gamma2 as f64);
        z_ok.powi((self.n * self.l) as i32) * r0_ok.powi((self.n * self.k) as i32)
    }
}

pub(crate) fn bit_len(v: u64) -> u32 {
    64 - v.leading_zeros()
}

fn is_prime(q: i64) -> bool {
    if q < 2 {
        return false;
    }
    let mut d = 2i64;
    while d * d <= q {
        if q % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}
