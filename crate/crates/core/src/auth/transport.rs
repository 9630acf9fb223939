//! Byte transports and the endpoint side of the protocol.

use std::io::{Read, Write};
use std::net::TcpStream;
use std::sync::mpsc::{channel, Receiver, RecvTimeoutError, Sender};
use std::time::Duration;

use super::message::{Frame, MessageClass};
use super::session::AuthSession;
use super::{AuthError, CyclePayloads, Verdict};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);

/// Largest frame accepted from a stream.
const MAX_FRAME: usize = 1 << 20;

pub trait Transport {
    fn send_bytes(&mut self, frame: &[u8]) -> Result<(), AuthError>;
    fn recv_bytes(&mut self) -> Result<Vec<u8>, AuthError>;

    fn send(&mut self, frame: &Frame) -> Result<(), AuthError> {
        self.send_bytes(&frame.to_bytes()?)
    }

    fn recv(&mut self) -> Result<Frame, AuthError> {
        Frame::from_bytes(&self.recv_bytes()?)
    }
}

/// One end of an in-process duplex queue.
pub struct MemoryTransport {
    tx: Sender<Vec<u8>>,
    rx: Receiver<Vec<u8>>,
    timeout: Duration,
}

impl MemoryTransport {
    pub fn pair() -> (Self, Self) {
        let (tx_a, rx_b) = channel();
        let (tx_b, rx_a) = channel();
        (
            MemoryTransport { tx: tx_a, rx: rx_a, timeout: DEFAULT_TIMEOUT },
            MemoryTransport { tx: tx_b, rx: rx_b, timeout: DEFAULT_TIMEOUT },
        )
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }
}

impl Transport for MemoryTransport {
    fn send_bytes(&mut self, frame: &[u8]) -> Result<(), AuthError> {
        self.tx.send(frame.to_vec()).map_err(|_| AuthError::Transport("peer hung up".into()))
    }

    fn recv_bytes(&mut self) -> Result<Vec<u8>, AuthError> {
        self.rx.recv_timeout(self.timeout).map_err(|e| match e {
            RecvTimeoutError::Timeout => AuthError::TransportTimeout,
            RecvTimeoutError::Disconnected => AuthError::Transport("peer hung up".into()),
        })
    }
}

/// Length-prefixed frames (u32 big-endian) over a byte stream.
pub struct StreamTransport<S> {
    stream: S,
}

impl<S: Read + Write> StreamTransport<S> {
    pub fn new(stream: S) -> Self {
        StreamTransport { stream }
    }

    pub fn into_inner(self) -> S {
        self.stream
    }
}

impl StreamTransport<TcpStream> {
    pub fn tcp(stream: TcpStream, timeout: Duration) -> Result<Self, AuthError> {
        stream.set_read_timeout(Some(timeout)).map_err(io_err)?;
        stream.set_nodelay(true).map_err(io_err)?;
        Ok(StreamTransport { stream })
    }
}

fn io_err(e: std::io::Error) -> AuthError {
    match e.kind() {
        std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut => AuthError::TransportTimeout,
        _ => AuthError::Transport(e.to_string()),
    }
}

impl<S: Read + Write> Transport for StreamTransport<S> {
    fn send_bytes(&mut self, frame: &[u8]) -> Result<(), AuthError> {
        let len = u32::try_from(frame.len()).map_err(|_| AuthError::Malformed("frame too long"))?;
        self.stream.write_all(&len.to_be_bytes()).map_err(io_err)?;
        self.stream.write_all(frame).map_err(io_err)?;
        self.stream.flush().map_err(io_err)
    }

    fn recv_bytes(&mut self) -> Result<Vec<u8>, AuthError> {
        let mut len = [0u8; 4];
        self.stream.read_exact(&mut len).map_err(io_err)?;
        let len = u32::from_be_bytes(len) as usize;
        if len > MAX_FRAME {
            return Err(AuthError::Malformed("frame too long"));
        }
        let mut buf = vec![0u8; len];
        self.stream.read_exact(&mut buf).map_err(io_err)?;
        Ok(buf)
    }
}

/// Phase 1 from one endpoint: send our hello, read theirs, verify.
pub fn phase1_over(session: &mut AuthSession, t: &mut dyn Transport) -> Result<(), AuthError> {
    let hello = session.hello()?;
    t.send(&Frame::Hello(hello))?;
    let frame = match t.recv() {
        Ok(f) => f,
        Err(e) => {
            session.abort(e.clone());
            return Err(e);
        }
    };
    match frame {
        Frame::Hello(h) => session.accept_hello(&h),
        _ => {
            let e = AuthError::StateViolation("expected hello");
            session.abort(e.clone());
            Err(e)
        }
    }
}

fn receive_four(session: &mut AuthSession, t: &mut dyn Transport) -> Result<bool, AuthError> {
    let mut ok = true;
    for class in MessageClass::ALL {
        match t.recv()? {
            Frame::Message(m) if m.class == class => ok &= session.verify_message(&m) == Verdict::Accept,
            Frame::Message(_) => ok = false,
            _ => return Err(AuthError::StateViolation("expected authenticated message")),
        }
    }
    Ok(ok)
}

fn send_four(session: &mut AuthSession, t: &mut dyn Transport, payloads: &CyclePayloads) -> Result<(), AuthError> {
    for class in MessageClass::ALL {
        let m = session.authenticate_message(class, payloads.get(class))?;
        t.send(&Frame::Message(m))?;
    }
    Ok(())
}

/// One two-way cycle from an endpoint. The initiator sends first; the
/// responder answers and reports its half of the verdict; the initiator
/// announces the combined verdict. Returns that combined verdict.
pub fn cycle_over(
    session: &mut AuthSession,
    t: &mut dyn Transport,
    payloads: &CyclePayloads,
    initiator: bool,
) -> Result<bool, AuthError> {
    let pass = if initiator {
        send_four(session, t, payloads)?;
        let mine = receive_four(session, t)?;
        let theirs = match t.recv()? {
            Frame::Verdict(v) => v,
            _ => return Err(AuthError::StateViolation("expected verdict")),
        };
        let pass = mine && theirs;
        t.send(&Frame::Verdict(pass))?;
        pass
    } else {
        let mine = receive_four(session, t)?;
        send_four(session, t, payloads)?;
        t.send(&Frame::Verdict(mine))?;
        match t.recv()? {
            Frame::Verdict(v) => v,
            _ => return Err(AuthError::StateViolation("expected verdict")),
        }
    };
    session.finish_cycle(pass)?;
    Ok(pass)
}
