//! The four-message exchange between a prover holding coupons and a
//! verifier holding the prover's public key.
//!
//! ```text
//! prover                       verifier
//!   COMMITMENT(id_p, x)   -->
//!                         <--  CHALLENGE(n_v)
//!   RESPONSE(y)           -->
//!                         <--  VERDICT(accept)
//! ```
//!
//! An unknown `id_p` is answered with a reject verdict in place of the
//! challenge.

mod message;
mod session;
mod transport;

pub use message::{FrameError, Message, MessageKind, MAX_INT_LEN};
pub use session::{
    check_response, CouponSource, ProverDirectory, ProverSession, ProverState, VerifierSession, VerifierState,
};
pub use transport::{
    memory_pair, memory_pair_with_timeout, MemoryTransport, TcpTransport, Transport, TransportError, DEFAULT_TIMEOUT,
};

use std::net::TcpListener;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::datapath::DatapathError;
use crate::params::{ParameterProfile, ParamsError};

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("no unused coupons left")]
    OutOfCoupons,
    #[error("{0}")]
    WrongState(&'static str),
    #[error("expected {} frame, got {}", expected.name(), got.name())]
    Unexpected { expected: MessageKind, got: MessageKind },
    #[error("challenge exceeds the challenge range")]
    ChallengeOutOfRange,
    #[error(transparent)]
    Datapath(#[from] DatapathError),
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Transport(#[from] TransportError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Party {
    Prover,
    Verifier,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub from: Party,
    pub message: Message,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundOutcome {
    pub accepted: bool,
    pub transcript: Vec<Frame>,
}

/// Drives the prover's half of one round over `transport`.
pub fn run_prover<T: Transport + ?Sized>(
    prover: &mut ProverSession,
    transport: &mut T,
) -> Result<RoundOutcome, ProtocolError> {
    let mut transcript = Vec::with_capacity(4);
    let commit = prover.commit()?;
    transport.send(&commit)?;
    transcript.push(Frame { from: Party::Prover, message: commit });

    let reply = transport.recv()?;
    transcript.push(Frame { from: Party::Verifier, message: reply.clone() });
    if let Message::Verdict { accept } = reply {
        return Ok(RoundOutcome { accepted: accept, transcript });
    }
    let response = prover.respond(&reply)?;
    transport.send(&response)?;
    transcript.push(Frame { from: Party::Prover, message: response });

    match transport.recv()? {
        verdict @ Message::Verdict { accept } => {
            transcript.push(Frame { from: Party::Verifier, message: verdict });
            Ok(RoundOutcome { accepted: accept, transcript })
        }
        other => Err(ProtocolError::Unexpected { expected: MessageKind::Verdict, got: other.kind() }),
    }
}

/// Drives the verifier's half of one round. On any failure the session is
/// reset to idle before the error is returned.
pub fn serve_round<T: Transport + ?Sized, R: RngCore + ?Sized>(
    verifier: &mut VerifierSession,
    transport: &mut T,
    rng: &mut R,
) -> Result<RoundOutcome, ProtocolError> {
    verifier.reset();
    let result = verifier_steps(verifier, transport, rng);
    if result.is_err() {
        verifier.reset();
    }
    result
}

fn verifier_steps<T: Transport + ?Sized, R: RngCore + ?Sized>(
    verifier: &mut VerifierSession,
    transport: &mut T,
    rng: &mut R,
) -> Result<RoundOutcome, ProtocolError> {
    let mut transcript = Vec::with_capacity(4);
    let commit = transport.recv()?;
    transcript.push(Frame { from: Party::Prover, message: commit.clone() });
    let reply = verifier.challenge(&commit, rng)?;
    transport.send(&reply)?;
    transcript.push(Frame { from: Party::Verifier, message: reply.clone() });
    if let Message::Verdict { accept } = reply {
        return Ok(RoundOutcome { accepted: accept, transcript });
    }

    let response = match transport.recv() {
        Ok(m) => m,
        Err(e @ TransportError::Frame(_)) => {
            // best effort: tell the prover before dropping the connection
            let _ = transport.send(&Message::Verdict { accept: false });
            return Err(e.into());
        }
        Err(e) => return Err(e.into()),
    };
    transcript.push(Frame { from: Party::Prover, message: response.clone() });
    let verdict = verifier.decide(&response)?;
    transport.send(&verdict)?;
    let Message::Verdict { accept } = verdict else { unreachable!("decide returns a verdict") };
    transcript.push(Frame { from: Party::Verifier, message: verdict });
    Ok(RoundOutcome { accepted: accept, transcript })
}

/// Runs one complete round in-process over a memory transport pair. The
/// returned transcript is the prover's view.
pub fn run_round<R: RngCore + Send>(
    prover: &mut ProverSession,
    verifier: &mut VerifierSession,
    rng: &mut R,
) -> Result<RoundOutcome, ProtocolError> {
    let (mut p_end, mut v_end) = memory_pair();
    std::thread::scope(|scope| {
        let server = scope.spawn(move || serve_round(verifier, &mut v_end, rng));
        let prover_side = run_prover(prover, &mut p_end);
        drop(p_end);
        let verifier_side = server.join().expect("verifier thread panicked");
        let outcome = prover_side?;
        let verifier_outcome = verifier_side?;
        debug_assert_eq!(outcome.accepted, verifier_outcome.accepted);
        Ok(outcome)
    })
}

/// TCP verifier: one round per connection, one thread per connection.
#[derive(Debug, Clone)]
pub struct VerifierService {
    pub profile: Arc<ParameterProfile>,
    pub provers: Arc<ProverDirectory>,
    pub timeout: Duration,
}

impl VerifierService {
    pub fn new(profile: ParameterProfile, provers: ProverDirectory) -> Self {
        VerifierService { profile: Arc::new(profile), provers: Arc::new(provers), timeout: DEFAULT_TIMEOUT }
    }

    pub fn session(&self) -> VerifierSession {
        VerifierSession::new(self.profile.clone(), self.provers.clone())
    }

    /// Accepts connections until `max_rounds` have been served (forever when
    /// `None`). Challenge randomness for connection `k` is stream `k` of a
    /// ChaCha20 generator seeded with `seed`. `on_round` sees every outcome.
    pub fn serve<F>(
        &self,
        listener: &TcpListener,
        seed: u64,
        max_rounds: Option<u64>,
        on_round: F,
    ) -> std::io::Result<()>
    where
        F: Fn(u64, &Result<RoundOutcome, ProtocolError>) + Sync,
    {
        let counter = AtomicU64::new(0);
        std::thread::scope(|scope| {
            loop {
                if max_rounds.is_some_and(|m| counter.load(Ordering::SeqCst) >= m) {
                    break;
                }
                let (stream, _) = listener.accept()?;
                let k = counter.fetch_add(1, Ordering::SeqCst);
                let on_round = &on_round;
                let mut session = self.session();
                let timeout = self.timeout;
                scope.spawn(move || {
                    let mut rng = ChaCha20Rng::seed_from_u64(seed);
                    rng.set_stream(k);
                    let result = TcpTransport::from_stream(stream, timeout)
                        .map_err(ProtocolError::from)
                        .and_then(|mut t| serve_round(&mut session, &mut t, &mut rng));
                    on_round(k, &result);
                });
            }
            Ok(())
        })
    }
}
