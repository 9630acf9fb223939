//! Man-in-the-middle harness. An adversary sits between A and B, may replace
//! or corrupt any phase-1 field and any phase-2 payload or tag, and the
//! protocol must end in a rejection whenever something was changed.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::cycle::{CyclePayloads, Direction};
use super::message::{Hello, MessageClass};
use super::session::{AuthSession, Credentials, RejectReason, Verdict};
use super::AuthError;
use crate::crypto::{sig_keygen, PresharedKeyPool, SigKeypair, SigParams};
use crate::pki::{Certificate, CertificateAuthority, TrustStore, Validity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Field {
    Identity,
    Certificate,
    PublicKey,
    Nonce,
    Payload(MessageClass),
    Tag(MessageClass),
}

impl Field {
    pub fn all() -> Vec<Field> {
        let mut v = vec![Field::Identity, Field::Certificate, Field::PublicKey, Field::Nonce];
        v.extend(MessageClass::ALL.map(Field::Payload));
        v.extend(MessageClass::ALL.map(Field::Tag));
        v
    }

    pub fn is_phase1(self) -> bool {
        matches!(self, Field::Identity | Field::Certificate | Field::PublicKey | Field::Nonce)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edit {
    /// Swap in the adversary's own value (her certificate, key, nonce, a
    /// payload of her choice, or a tag she computed with her own key).
    Substitute,
    /// Flip one bit; the index is reduced modulo the field length.
    FlipBit(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mutation {
    pub field: Field,
    /// Direction of the frame being changed; for phase 1, `AToB` is A's hello.
    pub direction: Direction,
    pub edit: Edit,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MitmOutcome {
    /// Phase 1 failed at the receiver of the tampered hello.
    Phase1Failed(AuthError),
    /// A phase-2 message was rejected.
    Rejected { direction: Direction, class: MessageClass, reason: RejectReason },
    /// Every check passed.
    Accepted,
}

impl MitmOutcome {
    pub fn is_rejected(&self) -> bool {
        !matches!(self, MitmOutcome::Accepted)
    }
}

/// Honest credentials for A and B plus the adversary's own material.
#[derive(Clone)]
pub struct MitmFixture {
    pub pqc: Option<PqcMaterial>,
    pub pool: Option<PresharedKeyPool>,
    pub eve_pool: Option<PresharedKeyPool>,
}

#[derive(Clone)]
pub struct PqcMaterial {
    pub a: (SigKeypair, Certificate),
    pub b: (SigKeypair, Certificate),
    pub trust: TrustStore,
    /// Eve's keypair with certificates for "A" and "B" from her own CA, which
    /// is also named "CA".
    pub eve: (SigKeypair, Certificate, Certificate),
}

impl MitmFixture {
    pub fn pqc(params: &SigParams, seed: u64) -> Result<Self, AuthError> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut key = || {
            let mut k = [0u8; 32];
            rng.fill_bytes(&mut k);
            sig_keygen(params, &k)
        };
        let (ca_kp, a_kp, b_kp, eve_ca_kp, eve_kp) = (key()?, key()?, key()?, key()?, key()?);
        let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x5eed);
        let bad = |e: crate::pki::PkiError| AuthError::Malformed(if matches!(e, crate::pki::PkiError::Crypto(_)) { "ca sign" } else { "ca" });
        let mut ca = CertificateAuthority::new("CA", ca_kp).map_err(bad)?;
        let mut eve_ca = CertificateAuthority::new("CA", eve_ca_kp).map_err(bad)?;
        let v = Validity::new(0, 1 << 40);
        let ca_cert = ca.issue_for("A", a_kp.public(), v, &mut rng).map_err(bad)?;
        let cb_cert = ca.issue_for("B", b_kp.public(), v, &mut rng).map_err(bad)?;
        let eve_a = eve_ca.issue_for("A", eve_kp.public(), v, &mut rng).map_err(bad)?;
        let eve_b = eve_ca.issue_for("B", eve_kp.public(), v, &mut rng).map_err(bad)?;
        Ok(MitmFixture {
            pqc: Some(PqcMaterial { a: (a_kp, ca_cert), b: (b_kp, cb_cert), trust: ca.trust_store(), eve: (eve_kp, eve_a, eve_b) }),
            pool: None,
            eve_pool: None,
        })
    }

    pub fn preshared(seed: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut k = vec![0u8; 2048];
        rng.fill_bytes(&mut k);
        let mut e = vec![0u8; 2048];
        rng.fill_bytes(&mut e);
        MitmFixture {
            pqc: None,
            pool: Some(PresharedKeyPool::from_bytes("A", "B", &k)),
            eve_pool: Some(PresharedKeyPool::from_bytes("A", "B", &e)),
        }
    }

    fn credentials(&self) -> (Credentials, Credentials) {
        match (&self.pqc, &self.pool) {
            (Some(p), _) => {
                let trust = p.trust.clone();
                (
                    Credentials::Pqc { keypair: p.a.0.clone(), certificate: p.a.1.clone(), trust: trust.clone() },
                    Credentials::Pqc { keypair: p.b.0.clone(), certificate: p.b.1.clone(), trust },
                )
            }
            (None, Some(pool)) => (
                Credentials::PresharedKey { pool: pool.clone() },
                Credentials::PresharedKey { pool: pool.clone() },
            ),
            (None, None) => unreachable!("fixture has credentials"),
        }
    }

    /// Eve's stand-in for the named peer, keyed with her own material.
    fn eve_session(&self, me: &str, peer: &str, seed: u64) -> Result<AuthSession, AuthError> {
        let creds = match (&self.pqc, &self.eve_pool) {
            (Some(p), _) => Credentials::Pqc {
                keypair: p.eve.0.clone(),
                certificate: if me == "A" { p.eve.1.clone() } else { p.eve.2.clone() },
                trust: p.trust.clone(),
            },
            (None, Some(pool)) => Credentials::PresharedKey { pool: pool.clone() },
            (None, None) => unreachable!(),
        };
        AuthSession::new(me, peer, creds, Box::new(ChaCha20Rng::seed_from_u64(seed)))
    }
}

fn flip(bytes: &mut [u8], bit: usize) -> bool {
    if bytes.is_empty() {
        return false;
    }
    let i = bit % (bytes.len() * 8);
    bytes[i / 8] ^= 1 << (i % 8);
    true
}

fn tamper_hello(h: &mut Hello, m: &Mutation, fx: &MitmFixture, rng: &mut ChaCha20Rng) -> Result<(), AuthError> {
    match (m.field, m.edit) {
        (Field::Identity, Edit::Substitute) => h.identity = "E".into(),
        (Field::Identity, Edit::FlipBit(b)) => {
            let mut bytes = h.identity.clone().into_bytes();
            flip(&mut bytes, b);
            // a non-UTF-8 identity never survives frame decoding
            h.identity = String::from_utf8(bytes).map_err(|_| AuthError::Malformed("identity is not UTF-8"))?;
        }
        (Field::Nonce, Edit::Substitute) => rng.fill_bytes(&mut h.nonce.0),
        (Field::Nonce, Edit::FlipBit(b)) => {
            flip(&mut h.nonce.0, b);
        }
        (Field::Certificate, Edit::Substitute) => match &fx.pqc {
            Some(p) => h.certificate = Some(if h.identity == "A" { p.eve.1.clone() } else { p.eve.2.clone() }),
            None => return Err(AuthError::Malformed("unexpected certificate")),
        },
        (Field::Certificate, Edit::FlipBit(b)) => {
            let Some(c) = &h.certificate else {
                return Err(AuthError::Malformed("unexpected certificate"));
            };
            let mut bytes = c.to_bytes().map_err(|_| AuthError::Malformed("certificate"))?;
            flip(&mut bytes, b);
            h.certificate = Some(Certificate::from_bytes(&bytes).map_err(|_| AuthError::Malformed("certificate"))?);
        }
        (Field::PublicKey, edit) => {
            let (Some(c), Some(p)) = (&mut h.certificate, &fx.pqc) else {
                return Err(AuthError::Malformed("unexpected certificate"));
            };
            match edit {
                Edit::Substitute => c.fields.subject_key = p.eve.0.public().to_bytes(),
                Edit::FlipBit(b) => {
                    flip(&mut c.fields.subject_key, b);
                }
            }
        }
        _ => unreachable!("phase-2 field"),
    }
    Ok(())
}

/// Runs phase 1 and one cycle with the given mutations applied.
pub fn run_mitm(fx: &MitmFixture, mutations: &[Mutation], seed: u64) -> Result<MitmOutcome, AuthError> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (ca, cb) = fx.credentials();
    let mut a = AuthSession::new("A", "B", ca, Box::new(ChaCha20Rng::seed_from_u64(rng.random())))?;
    let mut b = AuthSession::new("B", "A", cb, Box::new(ChaCha20Rng::seed_from_u64(rng.random())))?;
    let mut ha = a.hello()?;
    let mut hb = b.hello()?;
    for m in mutations.iter().filter(|m| m.field.is_phase1()) {
        let h = match m.direction {
            Direction::AToB => &mut ha,
            Direction::BToA => &mut hb,
        };
        // A hello that cannot be decoded is dropped by its receiver.
        if let Err(e) = tamper_hello(h, m, fx, &mut rng) {
            return Ok(MitmOutcome::Phase1Failed(e));
        }
    }
    if let Err(e) = b.accept_hello(&ha) {
        return Ok(MitmOutcome::Phase1Failed(e));
    }
    if let Err(e) = a.accept_hello(&hb) {
        return Ok(MitmOutcome::Phase1Failed(e));
    }

    // Eve's own endpoints, used to forge tags under substituted keys.
    let mut eve_as_a = fx.eve_session("A", "B", rng.random())?;
    let mut eve_as_b = fx.eve_session("B", "A", rng.random())?;
    for (e, h) in [(&mut eve_as_a, &hb), (&mut eve_as_b, &ha)] {
        let mut h = h.clone();
        if let (Some(p), Some(_)) = (&fx.pqc, &h.certificate) {
            h.certificate = Some(if h.identity == "A" { p.a.1.clone() } else { p.b.1.clone() });
        }
        let _ = e.accept_hello(&h);
    }

    let pa = CyclePayloads::synthetic("mitm:a", 0);
    let pb = CyclePayloads::synthetic("mitm:b", 0);
    for (direction, payloads) in [(Direction::AToB, &pa), (Direction::BToA, &pb)] {
        for class in MessageClass::ALL {
            let (tx, rx, eve) = match direction {
                Direction::AToB => (&mut a, &mut b, &mut eve_as_a),
                Direction::BToA => (&mut b, &mut a, &mut eve_as_b),
            };
            let mut msg = tx.authenticate_message(class, payloads.get(class))?;
            for m in mutations.iter().filter(|m| m.direction == direction) {
                match (m.field, m.edit) {
                    (Field::Payload(c), Edit::Substitute) if c == class => {
                        msg.payload = format!("eve {class}").into_bytes();
                    }
                    (Field::Payload(c), Edit::FlipBit(bit)) if c == class => {
                        if !flip(&mut msg.payload, bit) {
                            msg.payload.push(1);
                        }
                    }
                    (Field::Tag(c), Edit::Substitute) if c == class => {
                        msg.tag = eve.authenticate_message(class, &msg.payload).map(|f| f.tag).unwrap_or_default();
                    }
                    (Field::Tag(c), Edit::FlipBit(bit)) if c == class => {
                        flip(&mut msg.tag, bit);
                    }
                    _ => {}
                }
            }
            if let Verdict::Reject(reason) = rx.verify_message(&msg) {
                return Ok(MitmOutcome::Rejected { direction, class, reason });
            }
        }
    }
    Ok(MitmOutcome::Accepted)
}

/// Every field in both directions, substituted and with a few bit flips.
pub fn single_field_mutations(pqc: bool) -> Vec<Mutation> {
    let mut out = Vec::new();
    for field in Field::all() {
        if !pqc && matches!(field, Field::Certificate | Field::PublicKey) {
            continue;
        }
        for direction in [Direction::AToB, Direction::BToA] {
            for edit in [Edit::Substitute, Edit::FlipBit(0), Edit::FlipBit(7), Edit::FlipBit(1001), Edit::FlipBit(usize::MAX / 3)] {
                out.push(Mutation { field, direction, edit });
            }
        }
    }
    out
}

/// Between one and four random mutations.
pub fn random_mutations(rng: &mut impl Rng, pqc: bool) -> Vec<Mutation> {
    let fields: Vec<Field> = Field::all()
        .into_iter()
        .filter(|f| pqc || !matches!(f, Field::Certificate | Field::PublicKey))
        .collect();
    let n = rng.random_range(1..=4);
    (0..n)
        .map(|_| Mutation {
            field: fields[rng.random_range(0..fields.len())],
            direction: if rng.random() { Direction::AToB } else { Direction::BToA },
            edit: if rng.random_ratio(1, 4) { Edit::Substitute } else { Edit::FlipBit(rng.random::<u32>() as usize) },
        })
        .collect()
}
