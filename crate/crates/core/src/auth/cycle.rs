use std::fmt;

use super::message::{AuthenticatedMessage, MessageClass};
use super::session::{AuthSession, RejectReason, SessionState, Verdict};
use super::AuthError;
use crate::crypto::sm3::Sm3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    AToB,
    BToA,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::AToB => "a->b",
            Direction::BToA => "b->a",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CycleVerdict {
    Pass,
    Fail { direction: Direction, class: MessageClass, reason: RejectReason },
}

impl CycleVerdict {
    pub fn is_pass(self) -> bool {
        self == CycleVerdict::Pass
    }
}

impl fmt::Display for CycleVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CycleVerdict::Pass => f.write_str("pass"),
            CycleVerdict::Fail { direction, class, reason } => write!(f, "fail({direction} {class} {reason})"),
        }
    }
}

/// Payloads for the four message classes, in `MessageClass::ALL` order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclePayloads(pub [Vec<u8>; 4]);

impl CyclePayloads {
    pub fn get(&self, class: MessageClass) -> &[u8] {
        &self.0[class.index()]
    }

    /// Deterministic stand-in payloads for simulation runs. Sizes follow the
    /// rough shape of real traffic: sifting dominates, verification is short.
    pub fn synthetic(label: &str, cycle: u64) -> Self {
        let sizes = [512usize, 64, 256, 32];
        let mk = |i: usize| {
            let mut out = Vec::with_capacity(sizes[i]);
            let mut counter = 0u32;
            while out.len() < sizes[i] {
                let mut h = Sm3::new();
                h.update(label.as_bytes());
                h.update(&cycle.to_be_bytes());
                h.update(&[i as u8]);
                h.update(&counter.to_be_bytes());
                out.extend_from_slice(h.finalize().as_bytes());
                counter += 1;
            }
            out.truncate(sizes[i]);
            out
        };
        CyclePayloads([mk(0), mk(1), mk(2), mk(3)])
    }
}

/// Full record of one two-way cycle.
#[derive(Debug, Clone)]
pub struct CycleReport {
    pub verdict: CycleVerdict,
    /// Payloads accepted by B (from A) and by A (from B), per class.
    pub delivered_to_b: [Option<Vec<u8>>; 4],
    pub delivered_to_a: [Option<Vec<u8>>; 4],
}

pub fn run_auth_cycle(
    a: &mut AuthSession,
    b: &mut AuthSession,
    from_a: &CyclePayloads,
    from_b: &CyclePayloads,
) -> Result<CycleVerdict, AuthError> {
    run_auth_cycle_with(a, b, from_a, from_b, |_, _| {}).map(|r| r.verdict)
}

/// Runs one cycle, passing every message through `channel` before delivery.
/// All eight messages are always exchanged so that both ends stay in step;
/// the verdict records the first failure.
pub fn run_auth_cycle_with(
    a: &mut AuthSession,
    b: &mut AuthSession,
    from_a: &CyclePayloads,
    from_b: &CyclePayloads,
    mut channel: impl FnMut(Direction, &mut AuthenticatedMessage),
) -> Result<CycleReport, AuthError> {
    if a.state() != SessionState::Ready || b.state() != SessionState::Ready {
        return Err(AuthError::StateViolation("cycle requires both sessions ready"));
    }
    let mut verdict = CycleVerdict::Pass;
    let mut delivered_to_b: [Option<Vec<u8>>; 4] = Default::default();
    let mut delivered_to_a: [Option<Vec<u8>>; 4] = Default::default();
    for (direction, payloads) in [(Direction::AToB, from_a), (Direction::BToA, from_b)] {
        for class in MessageClass::ALL {
            let (tx, rx, sink) = match direction {
                Direction::AToB => (&mut *a, &mut *b, &mut delivered_to_b),
                Direction::BToA => (&mut *b, &mut *a, &mut delivered_to_a),
            };
            let mut msg = tx.authenticate_message(class, payloads.get(class))?;
            channel(direction, &mut msg);
            match rx.verify_message(&msg) {
                Verdict::Accept => sink[class.index()] = Some(msg.payload),
                Verdict::Reject(reason) => {
                    if verdict.is_pass() {
                        verdict = CycleVerdict::Fail { direction, class, reason };
                    }
                }
            }
        }
    }
    let pass = verdict.is_pass();
    a.finish_cycle(pass)?;
    b.finish_cycle(pass)?;
    Ok(CycleReport { verdict, delivered_to_b, delivered_to_a })
}
