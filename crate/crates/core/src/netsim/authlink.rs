//! Two authenticated endpoints of one QKD link, driven cycle by cycle.

use std::collections::BTreeMap;

use bitvec::prelude::*;
use rand::RngCore;

use super::keys::PresharedRegistry;
use super::NetsimError;
use crate::auth::{run_auth_cycle, AuthError, AuthMode, AuthSession, CyclePayloads, Credentials};
use crate::crypto::{sig_keygen, PresharedKeyPool, SigKeypair, SigParams};
use crate::pki::{Certificate, CertificateAuthority, TrustStore, Validity};
use crate::rng::stream_rng;

/// Key bits placed in a pool before the first QKD key is available.
pub const INITIAL_PRESHARED_BITS: u64 = 16_384;

/// Issues credentials on demand: certificates from one CA in PQC mode,
/// pools from a registry in pre-shared mode.
pub struct Credentialer {
    mode: AuthMode,
    seed: u64,
    params: SigParams,
    ca: Option<CertificateAuthority>,
    issued: BTreeMap<String, (SigKeypair, Certificate)>,
}

impl Credentialer {
    pub fn new(mode: AuthMode, params: SigParams, seed: u64) -> Result<Self, NetsimError> {
        let ca = match mode {
            AuthMode::Pqc => {
                let mut k = [0u8; 32];
                stream_rng(seed, "ca", 0).fill_bytes(&mut k);
                let kp = sig_keygen(&params, &k)?;
                Some(CertificateAuthority::new("CA", kp).map_err(|e| NetsimError::Config(e.to_string()))?)
            }
            AuthMode::PresharedKey => None,
        };
        Ok(Credentialer { mode, seed, params, ca, issued: BTreeMap::new() })
    }

    pub fn mode(&self) -> AuthMode {
        self.mode
    }

    pub fn certificates_issued(&self) -> usize {
        self.issued.len()
    }

    pub fn trust_store(&self) -> Option<TrustStore> {
        self.ca.as_ref().map(|c| c.trust_store())
    }

    fn pqc(&mut self, node: &str) -> Result<Credentials, NetsimError> {
        let ca = self.ca.as_mut().expect("pqc mode has a CA");
        if !self.issued.contains_key(node) {
            let mut rng = stream_rng(self.seed, &format!("node-key:{node}"), 0);
            let mut k = [0u8; 32];
            rng.fill_bytes(&mut k);
            let kp = sig_keygen(&self.params, &k)?;
            let cert = ca
                .issue_for(node, kp.public(), Validity::new(0, u64::MAX / 2), &mut rng)
                .map_err(|e| NetsimError::Config(e.to_string()))?;
            self.issued.insert(node.to_owned(), (kp, cert));
        }
        let (kp, cert) = &self.issued[node];
        Ok(Credentials::Pqc { keypair: kp.clone(), certificate: cert.clone(), trust: ca.trust_store() })
    }

    /// Credentials for both ends of `a`-`b`.
    pub fn pair(
        &mut self,
        a: &str,
        b: &str,
        registry: &mut PresharedRegistry,
    ) -> Result<(Credentials, Credentials), NetsimError> {
        match self.mode {
            AuthMode::Pqc => Ok((self.pqc(a)?, self.pqc(b)?)),
            AuthMode::PresharedKey => {
                if registry.get(a, b).is_none() {
                    let (x, y) = if a <= b { (a, b) } else { (b, a) };
                    let mut bytes = vec![0u8; (INITIAL_PRESHARED_BITS / 8) as usize];
                    stream_rng(self.seed, &format!("preshared:{x}-{y}"), 0).fill_bytes(&mut bytes);
                    registry.insert(PresharedKeyPool::from_bytes(x, y, &bytes))?;
                }
                let pool = registry.get(a, b).expect("inserted").clone();
                Ok((Credentials::PresharedKey { pool: pool.clone() }, Credentials::PresharedKey { pool }))
            }
        }
    }
}

pub struct AuthLink {
    label: String,
    a: AuthSession,
    b: AuthSession,
    cycles: u64,
    failures: u64,
}

impl std::fmt::Debug for AuthLink {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AuthLink").field("label", &self.label).field("cycles", &self.cycles).finish_non_exhaustive()
    }
}

impl AuthLink {
    /// Creates both sessions and runs the phase-1 exchange.
    pub fn establish(
        a: &str,
        b: &str,
        creds: (Credentials, Credentials),
        seed: u64,
        stream: u64,
    ) -> Result<Self, AuthError> {
        let ra = Box::new(stream_rng(seed, &format!("auth:{a}->{b}"), stream));
        let rb = Box::new(stream_rng(seed, &format!("auth:{b}->{a}"), stream));
        let mut sa = AuthSession::new(a, b, creds.0, ra)?;
        let mut sb = AuthSession::new(b, a, creds.1, rb)?;
        let ha = sa.hello()?;
        let hb = sb.hello()?;
        sa.accept_hello(&hb)?;
        sb.accept_hello(&ha)?;
        Ok(AuthLink { label: format!("{a}-{b}"), a: sa, b: sb, cycles: 0, failures: 0 })
    }

    /// One full two-way cycle over synthetic payloads. Any error counts as a
    /// failed verdict.
    pub fn run_cycle(&mut self) -> bool {
        let n = self.cycles;
        self.cycles += 1;
        let pa = CyclePayloads::synthetic(&format!("{}:a", self.label), n);
        let pb = CyclePayloads::synthetic(&format!("{}:b", self.label), n);
        let ok = matches!(run_auth_cycle(&mut self.a, &mut self.b, &pa, &pb), Ok(v) if v.is_pass());
        if !ok {
            self.failures += 1;
        }
        ok
    }

    pub fn cycles(&self) -> u64 {
        self.cycles
    }

    pub fn failures(&self) -> u64 {
        self.failures
    }

    pub fn sessions(&mut self) -> (&mut AuthSession, &mut AuthSession) {
        (&mut self.a, &mut self.b)
    }

    /// Remaining pool bits, pre-shared mode only.
    pub fn pool_remaining(&self) -> Option<u64> {
        self.a.pool().map(|p| p.remaining())
    }

    pub fn extend_pools(&mut self, bits: &BitSlice<u8, Lsb0>) {
        for s in [&mut self.a, &mut self.b] {
            if let Some(p) = s.pool_mut() {
                p.extend(bits);
            }
        }
    }
}
