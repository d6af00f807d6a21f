//! The q-bounded flat mining model.

use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::blocktree::{Block, BlockId, Miner, TxId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("need at least one party")]
    NoParties,
    #[error("t = {t} exceeds n = {n}")]
    TooManyCorrupted { n: u32, t: u32 },
    #[error("p = {0} outside [0, 1]")]
    BadProbability(f64),
    #[error("q must be at least 1")]
    NoQueries,
    #[error("{0} must be finite and positive")]
    BadValue(&'static str),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolParams {
    pub n: u32,
    pub t: u32,
    pub p: f64,
    pub q: u32,
    pub epsilon: f64,
    pub lambda: u64,
    pub delta: f64,
    pub kappa: Option<u32>,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        ProtocolParams {
            n: 100,
            t: 20,
            p: 1e-3,
            q: 10,
            epsilon: 0.5,
            lambda: 200,
            delta: 0.5,
            kappa: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rates {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub gamma_u: f64,
    pub f: f64,
}

impl ProtocolParams {
    pub fn honest(&self) -> u32 {
        self.n - self.t
    }

    /// Difficulty `D = p * 2^kappa` when kappa is given.
    pub fn difficulty(&self) -> Option<f64> {
        self.kappa.map(|k| self.p * 2f64.powi(k as i32))
    }

    /// Hard errors for unusable parameters; advisory problems come back as
    /// warnings.
    pub fn validate(&self) -> Result<Vec<String>, ParamError> {
        if self.n == 0 {
            return Err(ParamError::NoParties);
        }
        if self.t > self.n {
            return Err(ParamError::TooManyCorrupted {
                n: self.n,
                t: self.t,
            });
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(ParamError::BadProbability(self.p));
        }
        if self.q == 0 {
            return Err(ParamError::NoQueries);
        }
        if !self.epsilon.is_finite() || self.epsilon < 0.0 {
            return Err(ParamError::BadValue("epsilon"));
        }
        if !self.delta.is_finite() || self.delta < 0.0 {
            return Err(ParamError::BadValue("delta"));
        }
        let mut warnings = Vec::new();
        let r = derived_rates(self);
        if self.p <= 0.0 || self.p >= 1.0 {
            warnings.push(format!("p = {} is not strictly between 0 and 1", self.p));
        }
        if self.epsilon <= 0.0 || self.epsilon >= 1.0 {
            warnings.push(format!(
                "epsilon = {} is not strictly between 0 and 1",
                self.epsilon
            ));
        }
        if self.delta <= 0.0 || self.delta >= 1.0 {
            warnings.push(format!(
                "delta = {} is not strictly between 0 and 1",
                self.delta
            ));
        }
        if self.t as f64 > (1.0 - self.delta) * self.honest() as f64 {
            warnings.push(format!(
                "honest majority violated: t = {} > (1 - delta)(n - t) = {}",
                self.t,
                (1.0 - self.delta) * self.honest() as f64
            ));
        }
        if 3.0 * r.gamma + 3.0 * self.epsilon >= self.delta {
            warnings.push(format!(
                "3 gamma + 3 epsilon = {:.4} is not below delta = {}",
                3.0 * r.gamma + 3.0 * self.epsilon,
                self.delta
            ));
        }
        if r.gamma > 0.0 && (self.lambda as f64) < 2.0 / r.gamma {
            warnings.push(format!(
                "lambda = {} is below 2 / gamma = {:.2}",
                self.lambda,
                2.0 / r.gamma
            ));
        }
        Ok(warnings)
    }
}

/// Closed-form expectations of the per-round mining counters.
pub fn derived_rates(params: &ProtocolParams) -> Rates {
    let p = params.p;
    let q = params.q as f64;
    let h = params.honest() as f64;
    let m = q * h;
    let alpha = p * m;
    let beta = p * q * params.t as f64;
    let (gamma, gamma_u) = if p >= 1.0 {
        (
            if m > 0.0 { 1.0 } else { 0.0 },
            if m == 1.0 { 1.0 } else { 0.0 },
        )
    } else {
        let l = (-p).ln_1p();
        (-(m * l).exp_m1(), m * p * ((m - 1.0) * l).exp())
    };
    Rates {
        alpha,
        beta,
        gamma,
        gamma_u,
        f: alpha + beta,
    }
}

/// Counter-based randomness keyed by `(seed, round, party)`.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
}

/// Words reserved per party in a round's stream.
const WORDS_PER_PARTY: u128 = 4;
/// Stream offset for the extra draws of corrupted parties.
const CORRUPT_STREAM: u64 = 1 << 62;
const CORRUPT_WORDS: u128 = 1 << 12;

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn base(&self, stream: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(stream);
        r
    }

    /// The primary uniform of `party` in `round`, in `[0, 1)`.
    pub fn party_uniform(&self, round: u64, party: u32) -> f64 {
        let mut r = self.base(round);
        r.set_word_pos(party as u128 * WORDS_PER_PARTY);
        to_unit(r.next_u64())
    }

    /// Primary uniforms of parties `0..n` in `round`; equal to calling
    /// [`RngStream::party_uniform`] for each party.
    pub fn round_uniforms(&self, round: u64, n: u32) -> Vec<f64> {
        let mut r = self.base(round);
        (0..n)
            .map(|_| {
                let u = to_unit(r.next_u64());
                r.next_u64();
                u
            })
            .collect()
    }

    /// Independent sequence of uniforms for a corrupted party's trials.
    fn corrupted(&self, round: u64, party: u32) -> ChaCha8Rng {
        let mut r = self.base(round | CORRUPT_STREAM);
        r.set_word_pos(party as u128 * CORRUPT_WORDS);
        r
    }
}

fn to_unit(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Index of the first success in a sequence of Bernoulli(p) trials, drawn
/// by inverting the geometric distribution at `u`.
pub fn first_success(p: f64, u: f64) -> Option<u64> {
    if p >= 1.0 {
        return Some(1);
    }
    if p <= 0.0 {
        return None;
    }
    let k = ((-u).ln_1p() / (-p).ln_1p()).floor();
    if k.is_finite() && k < u64::MAX as f64 {
        Some(k as u64 + 1)
    } else {
        None
    }
}

/// Role of a party in a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Honest,
    Corrupted,
}

/// A successful query of a corrupted party, handed to the adversary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CorruptedSuccess {
    pub party: u32,
    pub ctr: u32,
}

#[derive(Clone, Debug, Default)]
pub struct MiningOutcome {
    pub honest: Vec<Arc<Block>>,
    pub corrupted: Vec<CorruptedSuccess>,
}

/// Allocates globally unique block ids.
#[derive(Clone, Debug)]
pub struct IdAllocator {
    next: u64,
}

impl Default for IdAllocator {
    fn default() -> Self {
        IdAllocator { next: 1 }
    }
}

impl IdAllocator {
    pub fn next_id(&mut self) -> BlockId {
        let id = BlockId(self.next);
        self.next += 1;
        id
    }

    pub fn peek(&self) -> u64 {
        self.next
    }
}

/// One round of mining. Honest party `i` with `tips[i] = Some(parent)`
/// stops at its first success and emits one block on `parent`; corrupted
/// parties run all `q` trials and their successes go to the adversary.
pub fn mine_round<F>(
    params: &ProtocolParams,
    round: u64,
    tips: &[Option<BlockId>],
    roles: &[Role],
    rng: &RngStream,
    ids: &mut IdAllocator,
    mut payload: F,
) -> MiningOutcome
where
    F: FnMut(u32) -> Vec<TxId>,
{
    let q = params.q as u64;
    let uniforms = rng.round_uniforms(round, params.n);
    let mut out = MiningOutcome::default();
    for party in 0..params.n {
        match roles[party as usize] {
            Role::Honest => {
                let Some(parent) = tips[party as usize] else {
                    continue;
                };
                if let Some(ctr) = first_success(params.p, uniforms[party as usize]) {
                    if ctr <= q {
                        out.honest.push(Arc::new(Block {
                            id: ids.next_id(),
                            parent: Some(parent),
                            miner: Miner::Honest(party),
                            round,
                            ctr: ctr as u32,
                            payload: payload(party),
                        }));
                    }
                }
            }
            Role::Corrupted => {
                let mut r = rng.corrupted(round, party);
                let mut pos = 0u64;
                loop {
                    let Some(gap) = first_success(params.p, to_unit(r.next_u64())) else {
                        break;
                    };
                    pos += gap;
                    if pos > q {
                        break;
                    }
                    out.corrupted.push(CorruptedSuccess {
                        party,
                        ctr: pos as u32,
                    });
                }
            }
        }
    }
    out
}
