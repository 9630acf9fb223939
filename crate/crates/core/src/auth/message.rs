use std::fmt;

use super::AuthError;
use crate::crypto::{digest, Digest256, Nonce};
use crate::pki::Certificate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum MessageClass {
    BasisSift = 0x01,
    EcVerify = 0x02,
    PaRandomTransfer = 0x03,
    FinalKeyVerify = 0x04,
}

impl MessageClass {
    pub const ALL: [MessageClass; 4] = [
        MessageClass::BasisSift,
        MessageClass::EcVerify,
        MessageClass::PaRandomTransfer,
        MessageClass::FinalKeyVerify,
    ];

    pub fn from_u8(b: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|c| *c as u8 == b)
    }

    pub fn name(self) -> &'static str {
        match self {
            MessageClass::BasisSift => "basis-sift",
            MessageClass::EcVerify => "ec-verify",
            MessageClass::PaRandomTransfer => "pa-random",
            MessageClass::FinalKeyVerify => "final-key-verify",
        }
    }

    pub fn index(self) -> usize {
        self as usize - 1
    }
}

impl fmt::Display for MessageClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One authenticated classical message.
///
/// Wire layout (big-endian): `class u8 | cycle u64 | len u32 | payload |
/// tag_len u16 | tag`. For `FinalKeyVerify` the tag block starts with the
/// sender's 32-byte nonce for the next cycle, covered by the tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthenticatedMessage {
    pub class: MessageClass,
    pub cycle: u64,
    pub payload: Vec<u8>,
    pub tag: Vec<u8>,
}

impl AuthenticatedMessage {
    pub fn digest(&self) -> Digest256 {
        digest(&self.payload)
    }

    /// Split of the tag block into piggybacked nonce and the primitive's tag.
    pub(crate) fn split_tag(&self) -> Option<(Option<Nonce>, &[u8])> {
        if self.class == MessageClass::FinalKeyVerify {
            if self.tag.len() < Nonce::LEN {
                return None;
            }
            let (n, rest) = self.tag.split_at(Nonce::LEN);
            Some((Some(Nonce(n.try_into().unwrap())), rest))
        } else {
            Some((None, &self.tag))
        }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, AuthError> {
        let plen = u32::try_from(self.payload.len()).map_err(|_| AuthError::Malformed("payload too long"))?;
        let tlen = u16::try_from(self.tag.len()).map_err(|_| AuthError::Malformed("tag too long"))?;
        let mut out = Vec::with_capacity(15 + self.payload.len() + self.tag.len());
        out.push(self.class as u8);
        out.extend_from_slice(&self.cycle.to_be_bytes());
        out.extend_from_slice(&plen.to_be_bytes());
        out.extend_from_slice(&self.payload);
        out.extend_from_slice(&tlen.to_be_bytes());
        out.extend_from_slice(&self.tag);
        Ok(out)
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self, AuthError> {
        let class = MessageClass::from_u8(*b.first().ok_or(AuthError::Malformed("empty"))?)
            .ok_or(AuthError::Malformed("message class"))?;
        if b.len() < 13 {
            return Err(AuthError::Malformed("short header"));
        }
        let cycle = u64::from_be_bytes(b[1..9].try_into().unwrap());
        let plen = u32::from_be_bytes(b[9..13].try_into().unwrap()) as usize;
        let rest = &b[13..];
        if rest.len() < plen + 2 {
            return Err(AuthError::Malformed("truncated payload"));
        }
        let payload = rest[..plen].to_vec();
        let tlen = u16::from_be_bytes([rest[plen], rest[plen + 1]]) as usize;
        let tag_bytes = &rest[plen + 2..];
        if tag_bytes.len() != tlen {
            return Err(AuthError::Malformed("tag length"));
        }
        Ok(AuthenticatedMessage { class, cycle, payload, tag: tag_bytes.to_vec() })
    }
}

/// Phase-1 greeting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hello {
    pub identity: String,
    pub nonce: Nonce,
    pub certificate: Option<Certificate>,
}

pub const HELLO_KIND: u8 = 0x10;
pub const VERDICT_KIND: u8 = 0x20;

/// Everything that travels over a transport.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Frame {
    Hello(Hello),
    Message(AuthenticatedMessage),
    Verdict(bool),
}

impl Frame {
    pub fn to_bytes(&self) -> Result<Vec<u8>, AuthError> {
        match self {
            Frame::Message(m) => m.to_bytes(),
            Frame::Verdict(pass) => Ok(vec![VERDICT_KIND, *pass as u8]),
            Frame::Hello(h) => {
                let mut out = vec![HELLO_KIND];
                let id = h.identity.as_bytes();
                let idlen = u16::try_from(id.len()).map_err(|_| AuthError::Malformed("identity too long"))?;
                out.extend_from_slice(&idlen.to_be_bytes());
                out.extend_from_slice(id);
                out.extend_from_slice(&h.nonce.0);
                match &h.certificate {
                    None => out.push(0),
                    Some(c) => {
                        let cb = c.to_bytes().map_err(|_| AuthError::Malformed("certificate"))?;
                        out.push(1);
                        out.extend_from_slice(&(cb.len() as u32).to_be_bytes());
                        out.extend_from_slice(&cb);
                    }
                }
                Ok(out)
            }
        }
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self, AuthError> {
        match b.first() {
            None => Err(AuthError::Malformed("empty frame")),
            Some(&VERDICT_KIND) => match b {
                [_, 0] => Ok(Frame::Verdict(false)),
                [_, 1] => Ok(Frame::Verdict(true)),
                _ => Err(AuthError::Malformed("verdict frame")),
            },
            Some(&HELLO_KIND) => {
                let short = AuthError::Malformed("short hello");
                if b.len() < 3 {
                    return Err(short);
                }
                let idlen = u16::from_be_bytes([b[1], b[2]]) as usize;
                let rest = &b[3..];
                if rest.len() < idlen + Nonce::LEN + 1 {
                    return Err(short);
                }
                let identity = String::from_utf8(rest[..idlen].to_vec())
                    .map_err(|_| AuthError::Malformed("identity is not UTF-8"))?;
                let nonce = Nonce(rest[idlen..idlen + 32].try_into().unwrap());
                let rest = &rest[idlen + 32..];
                let certificate = match rest[0] {
                    0 if rest.len() == 1 => None,
                    1 if rest.len() >= 5 => {
                        let clen = u32::from_be_bytes(rest[1..5].try_into().unwrap()) as usize;
                        if rest.len() != 5 + clen {
                            return Err(AuthError::Malformed("certificate length"));
                        }
                        Some(Certificate::from_bytes(&rest[5..]).map_err(|_| AuthError::Malformed("certificate"))?)
                    }
                    _ => return Err(AuthError::Malformed("hello trailer")),
                };
                Ok(Frame::Hello(Hello { identity, nonce, certificate }))
            }
            Some(_) => AuthenticatedMessage::from_bytes(b).map(Frame::Message),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wire_layout() {
        let m = AuthenticatedMessage {
            class: MessageClass::EcVerify,
            cycle: 0x0102,
            payload: vec![0xaa, 0xbb],
            tag: vec![0xcc],
        };
        let b = m.to_bytes().unwrap();
        assert_eq!(
            b,
            vec![0x02, 0, 0, 0, 0, 0, 0, 0x01, 0x02, 0, 0, 0, 2, 0xaa, 0xbb, 0, 1, 0xcc]
        );
        assert_eq!(AuthenticatedMessage::from_bytes(&b).unwrap(), m);
        assert!(AuthenticatedMessage::from_bytes(&b[..b.len() - 1]).is_err());
        let mut bad = b.clone();
        bad[0] = 9;
        assert!(AuthenticatedMessage::from_bytes(&bad).is_err());
    }

    #[test]
    fn frames_round_trip() {
        let h = Frame::Hello(Hello { identity: "U1".into(), nonce: Nonce([7; 32]), certificate: None });
        assert_eq!(Frame::from_bytes(&h.to_bytes().unwrap()).unwrap(), h);
        let v = Frame::Verdict(true);
        assert_eq!(Frame::from_bytes(&v.to_bytes().unwrap()).unwrap(), v);
        assert!(Frame::from_bytes(&[]).is_err());
        assert!(Frame::from_bytes(&[HELLO_KIND, 0]).is_err());
    }
}
