//! On-disk framing for keys, signatures and certificates:
//! 8-byte magic, 2-byte version, 2-byte parameter-set id (both little-endian),
//! then the raw encoding.

use super::params::ParamsId;
use super::CryptoError;

pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileKind {
    PublicKey,
    SecretKey,
    Signature,
    Certificate,
}

impl FileKind {
    pub fn magic(self) -> &'static [u8; 8] {
        match self {
            FileKind::PublicKey => b"QKDAPUBK",
            FileKind::SecretKey => b"QKDASECK",
            FileKind::Signature => b"QKDASIG\0",
            FileKind::Certificate => b"QKDACERT",
        }
    }
}

pub fn wrap(kind: FileKind, params: ParamsId, body: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + body.len());
    out.extend_from_slice(kind.magic());
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(params as u16).to_le_bytes());
    out.extend_from_slice(body);
    out
}

pub fn unwrap(kind: FileKind, bytes: &[u8]) -> Result<(ParamsId, &[u8]), CryptoError> {
    if bytes.len() < HEADER_LEN || &bytes[..8] != kind.magic() {
        return Err(CryptoError::Malformed("file magic"));
    }
    let version = u16::from_le_bytes([bytes[8], bytes[9]]);
    if version != VERSION {
        return Err(CryptoError::UnsupportedVersion(version));
    }
    let id = u16::from_le_bytes([bytes[10], bytes[11]]);
    let params = ParamsId::from_u16(id).ok_or(CryptoError::Malformed("parameter set id"))?;
    Ok((params, &bytes[HEADER_LEN..]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let f = wrap(FileKind::Signature, ParamsId::Desk, &[0xaa]);
        assert_eq!(f, b"QKDASIG\0\x01\x00\x02\x00\xaa");
        let (p, body) = unwrap(FileKind::Signature, &f).unwrap();
        assert_eq!((p, body), (ParamsId::Desk, &[0xaa][..]));
    }

    #[test]
    fn rejects_wrong_kind_and_version() {
        let f = wrap(FileKind::PublicKey, ParamsId::Reference, &[]);
        assert!(unwrap(FileKind::SecretKey, &f).is_err());
        let mut v2 = f.clone();
        v2[8] = 2;
        assert_eq!(unwrap(FileKind::PublicKey, &v2), Err(CryptoError::UnsupportedVersion(2)));
        let mut bad_id = f;
        bad_id[10] = 9;
        assert!(unwrap(FileKind::PublicKey, &bad_id).is_err());
    }
}
