use std::collections::HashSet;
use std::fmt;

use super::message::{AuthenticatedMessage, Hello, MessageClass};
use super::AuthError;
use crate::crypto::{
    digest, gen_nonce, mac_tag, mac_verify, sig_sign, sig_verify_bytes, EntropySource, ItsMacTag, Nonce,
    PresharedKeyPool, PublicKey, SigKeypair,
};
use crate::pki::{verify_certificate, CertReject, Certificate, TrustStore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AuthMode {
    Pqc,
    PresharedKey,
}

impl fmt::Display for AuthMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AuthMode::Pqc => "pqc",
            AuthMode::PresharedKey => "psk",
        })
    }
}

impl std::str::FromStr for AuthMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "pqc" => Ok(AuthMode::Pqc),
            "psk" | "preshared" | "preshared-key" => Ok(AuthMode::PresharedKey),
            other => Err(format!("unknown auth mode `{other}` (expected pqc or psk)")),
        }
    }
}

#[allow(clippy::large_enum_variant)]
pub enum Credentials {
    Pqc { keypair: SigKeypair, certificate: Certificate, trust: TrustStore },
    PresharedKey { pool: PresharedKeyPool },
}

impl Credentials {
    pub fn mode(&self) -> AuthMode {
        match self {
            Credentials::Pqc { .. } => AuthMode::Pqc,
            Credentials::PresharedKey { .. } => AuthMode::PresharedKey,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SessionState {
    Init,
    CertExchanged,
    Ready,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RejectReason {
    BadTag,
    Replay,
    StaleCycle,
    NotReady,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RejectReason::BadTag => "bad-tag",
            RejectReason::Replay => "replay",
            RejectReason::StaleCycle => "stale-cycle",
            RejectReason::NotReady => "not-ready",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Accept,
    Reject(RejectReason),
}

impl Verdict {
    pub fn is_accept(self) -> bool {
        self == Verdict::Accept
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Accept => f.write_str("accept"),
            Verdict::Reject(r) => write!(f, "reject({r})"),
        }
    }
}

pub struct AuthSession {
    id: String,
    identity: String,
    peer_identity: String,
    creds: Credentials,
    peer_key: Option<PublicKey>,
    own_nonce: Nonce,
    peer_nonce: Option<Nonce>,
    next_own: Option<Nonce>,
    next_peer: Option<Nonce>,
    state: SessionState,
    failure: Option<AuthError>,
    ledger: HashSet<(Nonce, MessageClass, u64)>,
    cycle: u64,
    clock: u64,
    rng: Box<dyn EntropySource + Send>,
    transcript: Vec<String>,
}

impl fmt::Debug for AuthSession {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AuthSession")
            .field("id", &self.id)
            .field("mode", &self.mode())
            .field("state", &self.state)
            .field("cycle", &self.cycle)
            .finish_non_exhaustive()
    }
}

/// Bytes covered by a tag: `R ‖ D ‖ class ‖ cycle (BE) [‖ next nonce]`.
fn tag_input(r: &Nonce, payload: &[u8], class: MessageClass, cycle: u64, next: Option<&Nonce>) -> Vec<u8> {
    let mut v = Vec::with_capacity(32 + 32 + 1 + 8 + 32);
    v.extend_from_slice(&r.0);
    v.extend_from_slice(digest(payload).as_bytes());
    v.push(class as u8);
    v.extend_from_slice(&cycle.to_be_bytes());
    if let Some(n) = next {
        v.extend_from_slice(&n.0);
    }
    v
}

impl AuthSession {
    pub fn new(
        identity: impl Into<String>,
        peer_identity: impl Into<String>,
        creds: Credentials,
        mut rng: Box<dyn EntropySource + Send>,
    ) -> Result<Self, AuthError> {
        let identity = identity.into();
        let peer_identity = peer_identity.into();
        let own_nonce = gen_nonce(&mut *rng)?;
        Ok(AuthSession {
            id: format!("{identity}->{peer_identity}"),
            identity,
            peer_identity,
            creds,
            peer_key: None,
            own_nonce,
            peer_nonce: None,
            next_own: None,
            next_peer: None,
            state: SessionState::Init,
            failure: None,
            ledger: HashSet::new(),
            cycle: 0,
            clock: 0,
            rng,
            transcript: Vec::new(),
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn identity(&self) -> &str {
        &self.identity
    }

    pub fn peer_identity(&self) -> &str {
        &self.peer_identity
    }

    pub fn mode(&self) -> AuthMode {
        self.creds.mode()
    }

    pub fn state(&self) -> SessionState {
        self.state
    }

    pub fn failure(&self) -> Option<&AuthError> {
        self.failure.as_ref()
    }

    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    pub fn own_nonce(&self) -> Nonce {
        self.own_nonce
    }

    pub fn peer_nonce(&self) -> Option<Nonce> {
        self.peer_nonce
    }

    pub fn ledger_len(&self) -> usize {
        self.ledger.len()
    }

    pub fn pool(&self) -> Option<&PresharedKeyPool> {
        match &self.creds {
            Credentials::PresharedKey { pool } => Some(pool),
            Credentials::Pqc { .. } => None,
        }
    }

    pub fn pool_mut(&mut self) -> Option<&mut PresharedKeyPool> {
        match &mut self.creds {
            Credentials::PresharedKey { pool } => Some(pool),
            Credentials::Pqc { .. } => None,
        }
    }

    /// Logical time used for certificate checks and transcript lines.
    pub fn set_clock(&mut self, t: u64) {
        self.clock = t;
    }

    pub fn transcript(&self) -> &[String] {
        &self.transcript
    }

    pub fn take_transcript(&mut self) -> Vec<String> {
        std::mem::take(&mut self.transcript)
    }

    fn log(&mut self, event: &str, verdict: impl fmt::Display) {
        self.transcript.push(format!("t={} session={} event={} verdict={}", self.clock, self.id, event, verdict));
    }

    fn fail(&mut self, err: AuthError) -> Result<(), AuthError> {
        self.state = SessionState::Failed;
        self.log("phase1.accept", format_args!("failed({err})"));
        self.failure = Some(err.clone());
        Err(err)
    }

    /// Marks the session failed from outside, e.g. on a transport timeout.
    pub fn abort(&mut self, err: AuthError) {
        let _ = self.fail(err);
    }

    /// Our phase-1 greeting.
    pub fn hello(&mut self) -> Result<Hello, AuthError> {
        if self.state != SessionState::Init {
            return Err(AuthError::StateViolation("hello outside phase 1"));
        }
        let certificate = match &self.creds {
            Credentials::Pqc { certificate, .. } => Some(certificate.clone()),
            Credentials::PresharedKey { .. } => None,
        };
        self.log("phase1.hello", "sent");
        Ok(Hello { identity: self.identity.clone(), nonce: self.own_nonce, certificate })
    }

    /// Processes the peer's greeting and completes phase 1.
    pub fn accept_hello(&mut self, hello: &Hello) -> Result<(), AuthError> {
        if self.state != SessionState::Init {
            return Err(AuthError::StateViolation("phase 1 already ran"));
        }
        if hello.identity != self.peer_identity {
            let err = AuthError::PeerMismatch { expected: self.peer_identity.clone(), got: hello.identity.clone() };
            return self.fail(err);
        }
        match &self.creds {
            Credentials::Pqc { trust, .. } => {
                let Some(cert) = &hello.certificate else {
                    return self.fail(AuthError::CertInvalid(CertReject::Malformed));
                };
                if cert.subject() != self.peer_identity {
                    let err = AuthError::PeerMismatch { expected: self.peer_identity.clone(), got: cert.subject().into() };
                    return self.fail(err);
                }
                if let Err(r) = verify_certificate(trust, cert, self.clock) {
                    return self.fail(AuthError::CertInvalid(r));
                }
                match cert.subject_public_key() {
                    Ok(pk) => self.peer_key = Some(pk),
                    Err(_) => return self.fail(AuthError::CertInvalid(CertReject::Malformed)),
                }
            }
            Credentials::PresharedKey { pool } => {
                let (a, b) = pool.owners();
                let ours = (a == self.identity && b == self.peer_identity) || (b == self.identity && a == self.peer_identity);
                if !ours {
                    let err = AuthError::PeerMismatch { expected: format!("{a}/{b}"), got: hello.identity.clone() };
                    return self.fail(err);
                }
            }
        }
        self.state = SessionState::CertExchanged;
        self.log("phase1.cert", "accept");
        self.peer_nonce = Some(hello.nonce);
        self.state = SessionState::Ready;
        self.log("phase1.ready", "accept");
        Ok(())
    }

    /// Tags `payload` for the peer in the current cycle.
    pub fn authenticate_message(&mut self, class: MessageClass, payload: &[u8]) -> Result<AuthenticatedMessage, AuthError> {
        if self.state != SessionState::Ready {
            return Err(AuthError::NotReady);
        }
        let r_peer = self.peer_nonce.expect("ready implies peer nonce");
        let next = if class == MessageClass::FinalKeyVerify {
            let n = gen_nonce(&mut *self.rng)?;
            self.next_own = Some(n);
            Some(n)
        } else {
            None
        };
        let input = tag_input(&r_peer, payload, class, self.cycle, next.as_ref());
        let raw = match &mut self.creds {
            Credentials::Pqc { keypair, .. } => sig_sign(keypair.secret(), &input, &mut *self.rng)?.to_bytes(),
            Credentials::PresharedKey { pool } => mac_tag(pool, &input)?.to_bytes(),
        };
        let mut tag = Vec::with_capacity(raw.len() + 32);
        if let Some(n) = next {
            tag.extend_from_slice(&n.0);
        }
        tag.extend_from_slice(&raw);
        let msg = AuthenticatedMessage { class, cycle: self.cycle, payload: payload.to_vec(), tag };
        self.log(&format!("send.{class}"), "tagged");
        Ok(msg)
    }

    /// Total decision on an incoming message. Accepted messages enter the
    /// replay ledger and are never accepted again.
    pub fn verify_message(&mut self, msg: &AuthenticatedMessage) -> Verdict {
        let v = self.check(msg);
        self.log(&format!("recv.{}", msg.class), v);
        v
    }

    fn check(&mut self, msg: &AuthenticatedMessage) -> Verdict {
        if self.state != SessionState::Ready {
            return Verdict::Reject(RejectReason::NotReady);
        }
        let entry = (self.own_nonce, msg.class, msg.cycle);
        if self.ledger.contains(&entry) {
            return Verdict::Reject(RejectReason::Replay);
        }
        if msg.cycle != self.cycle {
            return Verdict::Reject(RejectReason::StaleCycle);
        }
        let Some((next, raw)) = msg.split_tag() else {
            return Verdict::Reject(RejectReason::BadTag);
        };
        let input = tag_input(&self.own_nonce, &msg.payload, msg.class, msg.cycle, next.as_ref());
        let ok = match &mut self.creds {
            Credentials::Pqc { .. } => {
                sig_verify_bytes(self.peer_key.as_ref().expect("ready implies peer key"), &input, raw)
            }
            Credentials::PresharedKey { pool } => match ItsMacTag::from_bytes(raw) {
                Ok(t) => matches!(mac_verify(pool, &input, &t), Ok(true)),
                Err(_) => false,
            },
        };
        if !ok {
            return Verdict::Reject(RejectReason::BadTag);
        }
        self.ledger.insert(entry);
        if next.is_some() {
            self.next_peer = next;
        }
        Verdict::Accept
    }

    /// Closes the current cycle. Nonces roll forward only after a pass in
    /// which both fresh nonces were exchanged.
    pub fn finish_cycle(&mut self, pass: bool) -> Result<(), AuthError> {
        if self.state != SessionState::Ready {
            return Err(AuthError::StateViolation("finish_cycle before phase 1"));
        }
        if let (true, Some(own), Some(peer)) = (pass, self.next_own, self.next_peer) {
            self.own_nonce = own;
            self.peer_nonce = Some(peer);
        }
        self.next_own = None;
        self.next_peer = None;
        self.log("cycle.finish", if pass { "pass" } else { "fail" });
        self.cycle += 1;
        Ok(())
    }
}
