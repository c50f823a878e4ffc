//! Wire frames.
//!
//! ```text
//! COMMITMENT 0x01  id_p[4] | len_be32 | x
//! CHALLENGE  0x02  len_be32 | n_v
//! RESPONSE   0x03  len_be32 | y
//! VERDICT    0x04  0x00 (reject) | 0x01 (accept)
//! ```
//!
//! Integers are big-endian and minimal: no leading zero byte, and zero is
//! sent with length 0. Frames are self-delimiting, so a stream needs no
//! outer length prefix.

use std::io::{self, Read};

use num_bigint::BigUint;
use thiserror::Error;

/// Upper bound on one integer field.
pub const MAX_INT_LEN: u32 = 64 * 1024;

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("frame truncated")]
    Truncated,
    #[error("unknown frame kind 0x{0:02x}")]
    UnknownKind(u8),
    #[error("integer field of {0} bytes exceeds the limit")]
    TooLong(u32),
    #[error("integer has a leading zero byte")]
    NonCanonical,
    #[error("verdict byte 0x{0:02x} is neither 0 nor 1")]
    BadVerdict(u8),
    #[error("{0} trailing bytes after frame")]
    Trailing(usize),
    #[error("connection closed")]
    Closed,
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum MessageKind {
    Commitment = 0x01,
    Challenge = 0x02,
    Response = 0x03,
    Verdict = 0x04,
}

impl MessageKind {
    pub fn name(self) -> &'static str {
        match self {
            MessageKind::Commitment => "COMMITMENT",
            MessageKind::Challenge => "CHALLENGE",
            MessageKind::Response => "RESPONSE",
            MessageKind::Verdict => "VERDICT",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Message {
    Commitment { id_p: [u8; 4], x: BigUint },
    Challenge { n_v: BigUint },
    Response { y: BigUint },
    Verdict { accept: bool },
}

impl Message {
    pub fn kind(&self) -> MessageKind {
        match self {
            Message::Commitment { .. } => MessageKind::Commitment,
            Message::Challenge { .. } => MessageKind::Challenge,
            Message::Response { .. } => MessageKind::Response,
            Message::Verdict { .. } => MessageKind::Verdict,
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = vec![self.kind() as u8];
        match self {
            Message::Commitment { id_p, x } => {
                out.extend_from_slice(id_p);
                put_int(&mut out, x);
            }
            Message::Challenge { n_v } => put_int(&mut out, n_v),
            Message::Response { y } => put_int(&mut out, y),
            Message::Verdict { accept } => out.push(u8::from(*accept)),
        }
        out
    }

    /// Decodes exactly one frame; trailing bytes are an error.
    pub fn decode(mut bytes: &[u8]) -> Result<Message, FrameError> {
        let msg = Message::read_from(&mut bytes).map_err(|e| match e {
            FrameError::Closed => FrameError::Truncated,
            other => other,
        })?;
        if !bytes.is_empty() {
            return Err(FrameError::Trailing(bytes.len()));
        }
        Ok(msg)
    }

    /// Reads one frame from a stream. End of stream before the kind byte is
    /// [`FrameError::Closed`]; inside a frame it is [`FrameError::Truncated`].
    pub fn read_from<R: Read + ?Sized>(r: &mut R) -> Result<Message, FrameError> {
        let mut kind = [0u8; 1];
        match r.read_exact(&mut kind) {
            Ok(()) => {}
            Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => return Err(FrameError::Closed),
            Err(e) => return Err(e.into()),
        }
        match kind[0] {
            0x01 => {
                let mut id_p = [0u8; 4];
                read_exact(r, &mut id_p)?;
                Ok(Message::Commitment { id_p, x: get_int(r)? })
            }
            0x02 => Ok(Message::Challenge { n_v: get_int(r)? }),
            0x03 => Ok(Message::Response { y: get_int(r)? }),
            0x04 => {
                let mut b = [0u8; 1];
                read_exact(r, &mut b)?;
                match b[0] {
                    0 => Ok(Message::Verdict { accept: false }),
                    1 => Ok(Message::Verdict { accept: true }),
                    other => Err(FrameError::BadVerdict(other)),
                }
            }
            other => Err(FrameError::UnknownKind(other)),
        }
    }
}

fn put_int(out: &mut Vec<u8>, v: &BigUint) {
    let bytes = if v.bits() == 0 { Vec::new() } else { v.to_bytes_be() };
    out.extend_from_slice(&(bytes.len() as u32).to_be_bytes());
    out.extend_from_slice(&bytes);
}

fn read_exact<R: Read + ?Sized>(r: &mut R, buf: &mut [u8]) -> Result<(), FrameError> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => FrameError::Truncated,
        _ => FrameError::Io(e),
    })
}

fn get_int<R: Read + ?Sized>(r: &mut R) -> Result<BigUint, FrameError> {
    let mut len = [0u8; 4];
    read_exact(r, &mut len)?;
    let len = u32::from_be_bytes(len);
    if len > MAX_INT_LEN {
        return Err(FrameError::TooLong(len));
    }
    let mut bytes = vec![0u8; len as usize];
    read_exact(r, &mut bytes)?;
    if bytes.first() == Some(&0) {
        return Err(FrameError::NonCanonical);
    }
    Ok(BigUint::from_bytes_be(&bytes))
}
