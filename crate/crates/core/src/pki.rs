//! Single-level certificate authority binding identities to signature keys.
//!
//! Canonical encoding of the to-be-signed fields, all integers little-endian:
//!
//! ```text
//! u32 len | subject | u16 subject params id | u32 len | subject public key |
//! u64 serial | u64 not_before | u64 not_after | u32 len | issuer
//! ```
//!
//! A full certificate appends `u32 len | CA signature`.

use std::collections::BTreeMap;
use std::fmt;

use crate::crypto::keyfile::{self, FileKind};
use crate::crypto::{sig_sign, sig_verify_bytes, CryptoError, EntropySource, ParamsId, PublicKey, SigKeypair};

pub const MAX_IDENTITY_LEN: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PkiError {
    #[error("field `{field}` is {len} bytes, limit {max}")]
    FieldTooLong { field: &'static str, len: usize, max: usize },
    #[error("subject public key does not decode under its parameter set")]
    InvalidSubjectKey,
    #[error("validity window must have start < end (got {0}..{1})")]
    InvalidValidity(u64, u64),
    #[error("malformed certificate encoding: {0}")]
    Malformed(&'static str),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
}

/// Why a certificate was refused.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CertReject {
    UnknownIssuer,
    BadSignature,
    Expired,
    NotYetValid,
    Malformed,
}

impl fmt::Display for CertReject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CertReject::UnknownIssuer => "unknown-issuer",
            CertReject::BadSignature => "bad-signature",
            CertReject::Expired => "expired",
            CertReject::NotYetValid => "not-yet-valid",
            CertReject::Malformed => "malformed",
        })
    }
}

/// Inclusive validity window in logical seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Validity {
    pub not_before: u64,
    pub not_after: u64,
}

impl Validity {
    pub fn new(not_before: u64, not_after: u64) -> Self {
        Validity { not_before, not_after }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CertFields {
    pub subject: String,
    pub subject_params: ParamsId,
    pub subject_key: Vec<u8>,
    pub serial: u64,
    pub validity: Validity,
    pub issuer: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Certificate {
    pub fields: CertFields,
    pub signature: Vec<u8>,
}

fn check_len(field: &'static str, len: usize, max: usize) -> Result<(), PkiError> {
    if len > max {
        Err(PkiError::FieldTooLong { field, len, max })
    } else {
        Ok(())
    }
}

fn put_var(out: &mut Vec<u8>, b: &[u8]) {
    out.extend_from_slice(&(b.len() as u32).to_le_bytes());
    out.extend_from_slice(b);
}

pub fn canonical_encode(f: &CertFields) -> Result<Vec<u8>, PkiError> {
    check_len("subject", f.subject.len(), MAX_IDENTITY_LEN)?;
    check_len("issuer", f.issuer.len(), MAX_IDENTITY_LEN)?;
    check_len("subject_key", f.subject_key.len(), u32::MAX as usize)?;
    let mut out = Vec::with_capacity(64 + f.subject.len() + f.subject_key.len() + f.issuer.len());
    put_var(&mut out, f.subject.as_bytes());
    out.extend_from_slice(&(f.subject_params as u16).to_le_bytes());
    put_var(&mut out, &f.subject_key);
    out.extend_from_slice(&f.serial.to_le_bytes());
    out.extend_from_slice(&f.validity.not_before.to_le_bytes());
    out.extend_from_slice(&f.validity.not_after.to_le_bytes());
    put_var(&mut out, f.issuer.as_bytes());
    Ok(out)
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], PkiError> {
        if self.buf.len() < n {
            return Err(PkiError::Malformed("truncated"));
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    fn u16(&mut self) -> Result<u16, PkiError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, PkiError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, PkiError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn var(&mut self) -> Result<&'a [u8], PkiError> {
        let n = self.u32()? as usize;
        self.take(n)
    }

    fn string(&mut self) -> Result<String, PkiError> {
        let b = self.var()?;
        if b.len() > MAX_IDENTITY_LEN {
            return Err(PkiError::Malformed("identity too long"));
        }
        String::from_utf8(b.to_vec()).map_err(|_| PkiError::Malformed("identity is not UTF-8"))
    }

    fn fields(&mut self) -> Result<CertFields, PkiError> {
        let subject = self.string()?;
        let subject_params = ParamsId::from_u16(self.u16()?).ok_or(PkiError::Malformed("params id"))?;
        let subject_key = self.var()?.to_vec();
        let serial = self.u64()?;
        let validity = Validity::new(self.u64()?, self.u64()?);
        let issuer = self.string()?;
        Ok(CertFields { subject, subject_params, subject_key, serial, validity, issuer })
    }
}

pub fn canonical_decode(bytes: &[u8]) -> Result<CertFields, PkiError> {
    let mut r = Reader { buf: bytes };
    let f = r.fields()?;
    if !r.buf.is_empty() {
        return Err(PkiError::Malformed("trailing bytes"));
    }
    Ok(f)
}

impl Certificate {
    pub fn subject(&self) -> &str {
        &self.fields.subject
    }

    pub fn issuer(&self) -> &str {
        &self.fields.issuer
    }

    pub fn serial(&self) -> u64 {
        self.fields.serial
    }

    pub fn subject_public_key(&self) -> Result<PublicKey, PkiError> {
        PublicKey::from_bytes(&self.fields.subject_params.params(), &self.fields.subject_key)
            .map_err(|_| PkiError::InvalidSubjectKey)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, PkiError> {
        let mut out = canonical_encode(&self.fields)?;
        put_var(&mut out, &self.signature);
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, PkiError> {
        let mut r = Reader { buf: bytes };
        let fields = r.fields()?;
        let signature = r.var()?.to_vec();
        if !r.buf.is_empty() {
            return Err(PkiError::Malformed("trailing bytes"));
        }
        Ok(Certificate { fields, signature })
    }

    /// File form: common header, header params id = CA signature params.
    pub fn to_file(&self, ca_params: ParamsId) -> Result<Vec<u8>, PkiError> {
        Ok(keyfile::wrap(FileKind::Certificate, ca_params, &self.to_bytes()?))
    }

    pub fn from_file(bytes: &[u8]) -> Result<(ParamsId, Self), PkiError> {
        let (params, body) = keyfile::unwrap(FileKind::Certificate, bytes)?;
        Ok((params, Certificate::from_bytes(body)?))
    }
}

pub struct CertificateAuthority {
    identity: String,
    keypair: SigKeypair,
    last_serial: u64,
}

impl fmt::Debug for CertificateAuthority {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CertificateAuthority")
            .field("identity", &self.identity)
            .field("last_serial", &self.last_serial)
            .finish_non_exhaustive()
    }
}

impl CertificateAuthority {
    pub fn new(identity: impl Into<String>, keypair: SigKeypair) -> Result<Self, PkiError> {
        let identity = identity.into();
        check_len("issuer", identity.len(), MAX_IDENTITY_LEN)?;
        Ok(CertificateAuthority { identity, keypair, last_serial: 0 })
    }

    /// Resumes a CA whose last issued serial is known.
    pub fn with_last_serial(mut self, serial: u64) -> Self {
        self.last_serial = serial;
        self
    }

    pub fn identity(&self) -> &str {
        &self.identity
    }

    pub fn public_key(&self) -> &PublicKey {
        self.keypair.public()
    }

    pub fn keypair(&self) -> &SigKeypair {
        &self.keypair
    }

    pub fn last_serial(&self) -> u64 {
        self.last_serial
    }

    pub fn issue_certificate(
        &mut self,
        subject: &str,
        subject_params: ParamsId,
        subject_key: &[u8],
        validity: Validity,
        rng: &mut (impl EntropySource + ?Sized),
    ) -> Result<Certificate, PkiError> {
        if PublicKey::from_bytes(&subject_params.params(), subject_key).is_err() {
            return Err(PkiError::InvalidSubjectKey);
        }
        if validity.not_before >= validity.not_after {
            return Err(PkiError::InvalidValidity(validity.not_before, validity.not_after));
        }
        let fields = CertFields {
            subject: subject.to_owned(),
            subject_params,
            subject_key: subject_key.to_vec(),
            serial: self.last_serial + 1,
            validity,
            issuer: self.identity.clone(),
        };
        let tbs = canonical_encode(&fields)?;
        let signature = sig_sign(self.keypair.secret(), &tbs, rng)?.to_bytes();
        self.last_serial += 1;
        Ok(Certificate { fields, signature })
    }

    pub fn issue_for(
        &mut self,
        subject: &str,
        key: &PublicKey,
        validity: Validity,
        rng: &mut (impl EntropySource + ?Sized),
    ) -> Result<Certificate, PkiError> {
        self.issue_certificate(subject, key.params().id, &key.to_bytes(), validity, rng)
    }

    pub fn trust_store(&self) -> TrustStore {
        let mut s = TrustStore::new();
        s.add(&self.identity, self.public_key().clone());
        s
    }
}

#[derive(Debug, Clone, Default)]
pub struct TrustStore {
    anchors: BTreeMap<String, PublicKey>,
}

impl TrustStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, issuer: &str, key: PublicKey) {
        self.anchors.insert(issuer.to_owned(), key);
    }

    pub fn get(&self, issuer: &str) -> Option<&PublicKey> {
        self.anchors.get(issuer)
    }

    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }
}

/// Checks run in order: structure, issuer, signature, then the clock.
pub fn verify_certificate(store: &TrustStore, cert: &Certificate, now: u64) -> Result<(), CertReject> {
    let f = &cert.fields;
    let tbs = canonical_encode(f).map_err(|_| CertReject::Malformed)?;
    if f.validity.not_before >= f.validity.not_after || cert.subject_public_key().is_err() {
        return Err(CertReject::Malformed);
    }
    let ca = store.get(&f.issuer).ok_or(CertReject::UnknownIssuer)?;
    if !sig_verify_bytes(ca, &tbs, &cert.signature) {
        return Err(CertReject::BadSignature);
    }
    if now < f.validity.not_before {
        return Err(CertReject::NotYetValid);
    }
    if now > f.validity.not_after {
        return Err(CertReject::Expired);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::{sig_keygen, SigParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn ca(name: &str, seed: u8) -> CertificateAuthority {
        CertificateAuthority::new(name, sig_keygen(&SigParams::DESK, &[seed; 32]).unwrap()).unwrap()
    }

    #[test]
    fn issue_verify_and_serials() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let mut ca = ca("CA", 1);
        let user = sig_keygen(&SigParams::DESK, &[9; 32]).unwrap();
        let c1 = ca.issue_for("alice", user.public(), Validity::new(10, 100), &mut rng).unwrap();
        let c2 = ca.issue_for("bob", user.public(), Validity::new(10, 100), &mut rng).unwrap();
        assert_eq!((c1.serial(), c2.serial()), (1, 2));
        let store = ca.trust_store();
        assert_eq!(verify_certificate(&store, &c1, 10), Ok(()));
        assert_eq!(verify_certificate(&store, &c1, 100), Ok(()));
        assert_eq!(verify_certificate(&store, &c1, 101), Err(CertReject::Expired));
        assert_eq!(verify_certificate(&store, &c1, 9), Err(CertReject::NotYetValid));
        assert_eq!(c1.subject_public_key().unwrap(), *user.public());
    }

    #[test]
    fn wrong_issuer_and_empty_store() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let mut ca1 = ca("CA1", 1);
        let ca2 = ca("CA2", 2);
        let user = sig_keygen(&SigParams::DESK, &[3; 32]).unwrap();
        let c = ca1.issue_for("u", user.public(), Validity::new(0, 10), &mut rng).unwrap();
        assert_eq!(verify_certificate(&ca2.trust_store(), &c, 5), Err(CertReject::UnknownIssuer));
        assert_eq!(verify_certificate(&TrustStore::new(), &c, 5), Err(CertReject::UnknownIssuer));
        // CA2's key registered under CA1's name.
        let mut spoof = TrustStore::new();
        spoof.add("CA1", ca2.public_key().clone());
        assert_eq!(verify_certificate(&spoof, &c, 5), Err(CertReject::BadSignature));
    }

    #[test]
    fn issue_rejects_bad_inputs() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let mut ca = ca("CA", 1);
        let user = sig_keygen(&SigParams::DESK, &[3; 32]).unwrap();
        let pk = user.public().to_bytes();
        assert_eq!(
            ca.issue_certificate("u", ParamsId::Desk, &pk[1..], Validity::new(0, 1), &mut rng),
            Err(PkiError::InvalidSubjectKey)
        );
        assert_eq!(
            ca.issue_certificate("u", ParamsId::Reference, &pk, Validity::new(0, 1), &mut rng),
            Err(PkiError::InvalidSubjectKey)
        );
        assert_eq!(
            ca.issue_certificate("u", ParamsId::Desk, &pk, Validity::new(5, 5), &mut rng),
            Err(PkiError::InvalidValidity(5, 5))
        );
        let long = "x".repeat(257);
        assert!(matches!(
            ca.issue_certificate(&long, ParamsId::Desk, &pk, Validity::new(0, 1), &mut rng),
            Err(PkiError::FieldTooLong { field: "subject", .. })
        ));
        assert_eq!(ca.last_serial(), 0);
    }

    #[test]
    fn encoding_round_trips_and_is_injective() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let mut ca = ca("CA", 1);
        let user = sig_keygen(&SigParams::DESK, &[5; 32]).unwrap();
        let c = ca.issue_for("alice", user.public(), Validity::new(1, 2), &mut rng).unwrap();
        let bytes = c.to_bytes().unwrap();
        assert_eq!(Certificate::from_bytes(&bytes).unwrap(), c);
        let (p, back) = Certificate::from_file(&c.to_file(ParamsId::Desk).unwrap()).unwrap();
        assert_eq!((p, back), (ParamsId::Desk, c.clone()));
        // Moving a byte between adjacent variable fields changes the encoding.
        let mut a = c.fields.clone();
        a.subject = "ab".into();
        a.issuer = "c".into();
        let mut b = c.fields.clone();
        b.subject = "a".into();
        b.issuer = "bc".into();
        assert_ne!(canonical_encode(&a).unwrap(), canonical_encode(&b).unwrap());
        assert!(Certificate::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut extra = bytes;
        extra.push(0);
        assert!(Certificate::from_bytes(&extra).is_err());
    }
}
