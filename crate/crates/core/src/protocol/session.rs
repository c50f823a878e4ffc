use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigUint;
use rand::RngCore;

use super::message::{Message, MessageKind};
use super::ProtocolError;
use crate::arith;
use crate::datapath::{DatapathResult, Engine, ResponseUnit};
use crate::params::{make_coupon, random_bits, Coupon, CouponSeed, KeyPair, ParameterProfile};

/// Where the prover's coupons come from.
#[derive(Debug, Clone)]
pub enum CouponSource {
    List(Vec<Coupon>),
    /// Regenerated on demand from the seed; `count` bounds the set.
    Seeded(CouponSeed),
}

impl CouponSource {
    fn len(&self) -> u64 {
        match self {
            CouponSource::List(v) => v.len() as u64,
            CouponSource::Seeded(seed) => seed.count,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProverState {
    Idle,
    /// Holding coupon slot `n` of the source.
    Committed(u64),
    Done,
}

/// Prover side of the exchange. Each coupon slot is consumed at most once;
/// a finished round may be followed by a new commitment.
#[derive(Debug)]
pub struct ProverSession {
    profile: ParameterProfile,
    keypair: KeyPair,
    coupons: CouponSource,
    next: u64,
    state: ProverState,
    current: Option<Coupon>,
    unit: ResponseUnit,
    last_datapath: Option<DatapathResult>,
}

impl ProverSession {
    pub fn new(
        profile: ParameterProfile,
        keypair: KeyPair,
        coupons: CouponSource,
        engine: Engine,
    ) -> Result<Self, ProtocolError> {
        let unit = ResponseUnit::new(engine, &keypair.s, profile.widths())?;
        Ok(ProverSession {
            profile,
            keypair,
            coupons,
            next: 0,
            state: ProverState::Idle,
            current: None,
            unit,
            last_datapath: None,
        })
    }

    /// Skips the first `n` coupon slots, e.g. ones spent in earlier runs.
    pub fn skip_coupons(&mut self, n: u64) {
        self.next = self.next.max(n);
    }

    pub fn state(&self) -> ProverState {
        self.state
    }

    pub fn profile(&self) -> &ParameterProfile {
        &self.profile
    }

    pub fn keypair(&self) -> &KeyPair {
        &self.keypair
    }

    pub fn engine(&self) -> Engine {
        self.unit.engine()
    }

    pub fn coupons_left(&self) -> u64 {
        self.coupons.len().saturating_sub(self.next)
    }

    /// Datapath result of the last response, trace included.
    pub fn last_datapath(&self) -> Option<&DatapathResult> {
        self.last_datapath.as_ref()
    }

    /// The coupon held by the current round.
    pub fn current_coupon(&self) -> Option<&Coupon> {
        self.current.as_ref()
    }

    /// Step 1: picks the next unused coupon and commits to it.
    pub fn commit(&mut self) -> Result<Message, ProtocolError> {
        if let ProverState::Committed(_) = self.state {
            return Err(ProtocolError::WrongState("prover already committed"));
        }
        if self.next >= self.coupons.len() {
            return Err(ProtocolError::OutOfCoupons);
        }
        let slot = self.next;
        let coupon = match &self.coupons {
            CouponSource::List(v) => v[slot as usize].clone(),
            CouponSource::Seeded(seed) => make_coupon(&self.profile, seed, slot)?,
        };
        self.next += 1;
        let msg = Message::Commitment { id_p: self.keypair.id_p, x: coupon.x.clone() };
        self.current = Some(coupon);
        self.state = ProverState::Committed(slot);
        Ok(msg)
    }

    /// Step 3: `y = r + n_v * s` through the configured response unit.
    pub fn respond(&mut self, msg: &Message) -> Result<Message, ProtocolError> {
        let ProverState::Committed(_) = self.state else {
            return Err(ProtocolError::WrongState("prover has no open commitment"));
        };
        let Message::Challenge { n_v } = msg else {
            self.abort();
            return Err(ProtocolError::Unexpected { expected: MessageKind::Challenge, got: msg.kind() });
        };
        if n_v.bits() > u64::from(self.profile.c_bits) {
            self.abort();
            return Err(ProtocolError::ChallengeOutOfRange);
        }
        let coupon = self.current.as_ref().expect("committed state holds a coupon");
        let result = self.unit.respond(n_v, &coupon.r)?;
        let y = result.value.clone();
        self.last_datapath = Some(result);
        self.state = ProverState::Done;
        Ok(Message::Response { y })
    }

    fn abort(&mut self) {
        self.state = ProverState::Done;
    }
}

/// Known provers: identifier to public key.
pub type ProverDirectory = HashMap<[u8; 4], BigUint>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VerifierState {
    Idle,
    Challenged,
    Decided(bool),
}

#[derive(Debug, Clone)]
struct Pending {
    i_pub: BigUint,
    x: BigUint,
    n_v: BigUint,
}

/// Verifier side of one exchange. Profile and directory are shared
/// read-only between concurrent sessions.
#[derive(Debug, Clone)]
pub struct VerifierSession {
    profile: Arc<ParameterProfile>,
    provers: Arc<ProverDirectory>,
    state: VerifierState,
    pending: Option<Pending>,
}

impl VerifierSession {
    pub fn new(profile: Arc<ParameterProfile>, provers: Arc<ProverDirectory>) -> Self {
        VerifierSession { profile, provers, state: VerifierState::Idle, pending: None }
    }

    pub fn state(&self) -> &VerifierState {
        &self.state
    }

    pub fn profile(&self) -> &ParameterProfile {
        &self.profile
    }

    /// Back to `Idle`, dropping any pending commitment.
    pub fn reset(&mut self) {
        self.state = VerifierState::Idle;
        self.pending = None;
    }

    /// Step 2: answers a commitment with a uniform challenge below
    /// `2^c_bits`, or with a reject verdict for an unknown prover.
    pub fn challenge<R: RngCore + ?Sized>(&mut self, msg: &Message, rng: &mut R) -> Result<Message, ProtocolError> {
        if self.state != VerifierState::Idle {
            return Err(ProtocolError::WrongState("verifier is not idle"));
        }
        let Message::Commitment { id_p, x } = msg else {
            return Err(ProtocolError::Unexpected { expected: MessageKind::Commitment, got: msg.kind() });
        };
        let Some(i_pub) = self.provers.get(id_p) else {
            self.state = VerifierState::Decided(false);
            return Ok(Message::Verdict { accept: false });
        };
        let n_v = random_bits(rng, self.profile.c_bits);
        self.pending = Some(Pending { i_pub: i_pub.clone(), x: x.clone(), n_v: n_v.clone() });
        self.state = VerifierState::Challenged;
        Ok(Message::Challenge { n_v })
    }

    /// Step 4: accepts iff `y < D + phi` and `g^y * I^n_v mod n = x`.
    pub fn decide(&mut self, msg: &Message) -> Result<Message, ProtocolError> {
        if self.state != VerifierState::Challenged {
            return Err(ProtocolError::WrongState("verifier has no outstanding challenge"));
        }
        let pending = self.pending.take().expect("challenged state holds a commitment");
        let accept = match msg {
            Message::Response { y } => check_response(&self.profile, &pending.i_pub, &pending.x, &pending.n_v, y),
            _ => false,
        };
        self.state = VerifierState::Decided(accept);
        Ok(Message::Verdict { accept })
    }
}

/// The verifier's acceptance predicate on a transcript.
pub fn check_response(profile: &ParameterProfile, i_pub: &BigUint, x: &BigUint, n_v: &BigUint, y: &BigUint) -> bool {
    if *y >= profile.response_bound() {
        return false;
    }
    let gy = arith::modexp(&profile.g, y, &profile.n).expect("modulus > 1");
    let in_v = arith::modexp(i_pub, n_v, &profile.n).expect("modulus > 1");
    (gy * in_v) % &profile.n == *x
}
