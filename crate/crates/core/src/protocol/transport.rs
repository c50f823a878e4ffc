//! Blocking whole-frame transports.

use std::io::{self, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::time::Duration;

use thiserror::Error;

use super::message::{FrameError, Message};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(5);

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("timed out waiting for peer")]
    Timeout,
    #[error("peer closed the connection")]
    Closed,
    #[error("framing error: {0}")]
    Frame(FrameError),
    #[error(transparent)]
    Io(io::Error),
}

impl From<FrameError> for TransportError {
    fn from(e: FrameError) -> Self {
        match e {
            FrameError::Closed => TransportError::Closed,
            FrameError::Io(io) => io.into(),
            other => TransportError::Frame(other),
        }
    }
}

impl From<io::Error> for TransportError {
    fn from(e: io::Error) -> Self {
        match e.kind() {
            io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut => TransportError::Timeout,
            io::ErrorKind::UnexpectedEof
            | io::ErrorKind::ConnectionReset
            | io::ErrorKind::ConnectionAborted
            | io::ErrorKind::BrokenPipe => TransportError::Closed,
            _ => TransportError::Io(e),
        }
    }
}

pub trait Transport {
    fn send(&mut self, msg: &Message) -> Result<(), TransportError>;
    fn recv(&mut self) -> Result<Message, TransportError>;
}

/// One end of an in-process channel pair. Frames cross as encoded bytes.
#[derive(Debug)]
pub struct MemoryTransport {
    tx: Sender<Vec<u8>>,
    rx: Receiver<Vec<u8>>,
    timeout: Duration,
}

pub fn memory_pair() -> (MemoryTransport, MemoryTransport) {
    memory_pair_with_timeout(DEFAULT_TIMEOUT)
}

pub fn memory_pair_with_timeout(timeout: Duration) -> (MemoryTransport, MemoryTransport) {
    let (a_tx, b_rx) = mpsc::channel();
    let (b_tx, a_rx) = mpsc::channel();
    (MemoryTransport { tx: a_tx, rx: a_rx, timeout }, MemoryTransport { tx: b_tx, rx: b_rx, timeout })
}

impl MemoryTransport {
    /// Pushes raw bytes to the peer, bypassing the encoder.
    pub fn send_raw(&mut self, bytes: Vec<u8>) -> Result<(), TransportError> {
        self.tx.send(bytes).map_err(|_| TransportError::Closed)
    }
}

impl Transport for MemoryTransport {
    fn send(&mut self, msg: &Message) -> Result<(), TransportError> {
        self.send_raw(msg.encode())
    }

    fn recv(&mut self) -> Result<Message, TransportError> {
        let bytes = self.rx.recv_timeout(self.timeout).map_err(|e| match e {
            RecvTimeoutError::Timeout => TransportError::Timeout,
            RecvTimeoutError::Disconnected => TransportError::Closed,
        })?;
        Ok(Message::decode(&bytes)?)
    }
}

#[derive(Debug)]
pub struct TcpTransport {
    stream: TcpStream,
}

impl TcpTransport {
    pub fn connect<A: ToSocketAddrs>(addr: A, timeout: Duration) -> Result<Self, TransportError> {
        let mut last = None;
        for a in addr.to_socket_addrs()? {
            match TcpStream::connect_timeout(&a, timeout) {
                Ok(stream) => return TcpTransport::from_stream(stream, timeout),
                Err(e) => last = Some(e),
            }
        }
        Err(TransportError::Io(
            last.unwrap_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "address resolved to nothing")),
        ))
    }

    pub fn from_stream(stream: TcpStream, timeout: Duration) -> Result<Self, TransportError> {
        stream.set_read_timeout(Some(timeout))?;
        stream.set_write_timeout(Some(timeout))?;
        stream.set_nodelay(true)?;
        Ok(TcpTransport { stream })
    }
}

impl Transport for TcpTransport {
    fn send(&mut self, msg: &Message) -> Result<(), TransportError> {
        self.stream.write_all(&msg.encode())?;
        Ok(self.stream.flush()?)
    }

    fn recv(&mut self) -> Result<Message, TransportError> {
        Ok(Message::read_from(&mut self.stream)?)
    }
}
