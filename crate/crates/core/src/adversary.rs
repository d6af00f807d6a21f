//! Adversary strategies: passive withholding, secret-chain releases and the
//! partition balance attack.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use thiserror::Error;

use crate::blocktree::{
    compare_weight_with, Block, BlockId, BlockTree, Exactness, Miner, SelectOptions,
    WeightCoefficient, WeightPoly,
};
use crate::diffusion::AdversaryMessage;
use crate::mining::{CorruptedSuccess, IdAllocator, ProtocolParams};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AdversaryError {
    #[error("{got} corrupted parties listed, expected t = {expected}")]
    WrongCount { got: usize, expected: u32 },
    #[error("corrupted party {0} out of range")]
    OutOfRange(u32),
    #[error("withholding period must be at least one round")]
    ZeroWithhold,
}

/// When a balancing release counts as answering the imbalance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LengthGuard {
    /// The released side must end up at least as heavy and strictly longer.
    Strict,
    /// The other side is no longer ahead: heavier, or equally heavy and at
    /// least as long.
    #[default]
    Balanced,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Corrupted parties mine privately and never release.
    None,
    SecretChain {
        withhold: u64,
    },
    /// Partition for `tau` rounds, then balance the two subtrees.
    Balance {
        tau: u64,
        guard: LengthGuard,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdversaryConfig {
    pub strategy: Strategy,
    pub corrupted: Vec<u32>,
}

impl AdversaryConfig {
    /// Corrupts the `t` highest-indexed parties.
    pub fn last_parties(params: &ProtocolParams, strategy: Strategy) -> Self {
        AdversaryConfig {
            strategy,
            corrupted: (params.n - params.t..params.n).collect(),
        }
    }

    pub fn validate(&self, params: &ProtocolParams) -> Result<(), AdversaryError> {
        if self.corrupted.len() != params.t as usize {
            return Err(AdversaryError::WrongCount {
                got: self.corrupted.len(),
                expected: params.t,
            });
        }
        if let Some(&p) = self.corrupted.iter().find(|&&p| p >= params.n) {
            return Err(AdversaryError::OutOfRange(p));
        }
        if let Strategy::SecretChain { withhold: 0 } = self.strategy {
            return Err(AdversaryError::ZeroWithhold);
        }
        Ok(())
    }
}

/// Everything the adversary observes in a round, after honest mining.
pub struct AdversaryView<'a> {
    pub round: u64,
    /// All broadcast blocks including this round's honest blocks.
    pub public: &'a BlockTree,
    /// Head of the public main chain at the start of the round.
    pub public_head: BlockId,
    pub coeff: &'a WeightCoefficient,
    /// `(party, head)` for every honest party at the start of the round.
    pub party_heads: &'a [(u32, BlockId)],
    pub successes: &'a [CorruptedSuccess],
}

#[derive(Clone, Debug, Default)]
pub struct AdversaryAction {
    /// Every corrupted block mined this round, released or not.
    pub mined: Vec<Arc<Block>>,
    pub messages: Vec<AdversaryMessage>,
    /// Heal the partition at the end of this round.
    pub heal: bool,
}

/// Withheld blocks of one partition side.
#[derive(Clone, Debug, Default)]
pub struct BlockBank {
    pub sides: [Vec<(Arc<Block>, u32)>; 2],
}

impl BlockBank {
    pub fn size(&self) -> usize {
        self.sides[0].len() + self.sides[1].len()
    }
}

/// Result of a balance attack.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BalanceOutcome {
    pub heal_round: u64,
    pub bank_at_heal: u64,
    /// Rounds after the heal that the adversary kept the fork balanced,
    /// set once the attack ends.
    pub attack_duration: Option<u64>,
    /// The two fork roots at the heal, when a fork existed.
    pub fork_roots: Option<(BlockId, BlockId)>,
}

#[derive(Debug)]
enum State {
    Passive,
    Secret(SecretState),
    Balance(Box<BalanceState>),
}

#[derive(Debug)]
struct SecretState {
    withhold: u64,
    fork: Option<BlockId>,
    chain: Vec<Arc<Block>>,
}

#[derive(Debug)]
struct BalanceState {
    tau: u64,
    guard: LengthGuard,
    side_of: HashMap<u32, usize>,
    bank: BlockBank,
    depth: HashMap<BlockId, u32>,
    roots: Option<[BlockId; 2]>,
    outcome: BalanceOutcome,
    over: bool,
}

pub struct Adversary {
    corrupted: Vec<u32>,
    state: State,
}

fn corrupted_block(
    ids: &mut IdAllocator,
    parent: BlockId,
    s: &CorruptedSuccess,
    round: u64,
) -> Arc<Block> {
    Arc::new(Block {
        id: ids.next_id(),
        parent: Some(parent),
        miner: Miner::Adversary(s.party),
        round,
        ctr: s.ctr,
        payload: Vec::new(),
    })
}

fn compare_polys(pa: &WeightPoly, pb: &WeightPoly, c: &WeightCoefficient) -> Ordering {
    if c.is_limit() {
        return pa.degree().cmp(&pb.degree());
    }
    compare_weight_with(pa, pb, c, Exactness::numeric()).unwrap_or(Ordering::Equal)
}

impl Adversary {
    pub fn new(config: &AdversaryConfig) -> Self {
        let state = match config.strategy {
            Strategy::None => State::Passive,
            Strategy::SecretChain { withhold } => State::Secret(SecretState {
                withhold: withhold.max(1),
                fork: None,
                chain: Vec::new(),
            }),
            Strategy::Balance { tau, guard } => {
                let half = config.corrupted.len() / 2;
                let side_of = config
                    .corrupted
                    .iter()
                    .enumerate()
                    .map(|(k, &p)| (p, usize::from(k >= half)))
                    .collect();
                State::Balance(Box::new(BalanceState {
                    tau,
                    guard,
                    side_of,
                    bank: BlockBank::default(),
                    depth: HashMap::new(),
                    roots: None,
                    outcome: BalanceOutcome {
                        heal_round: tau,
                        ..Default::default()
                    },
                    over: tau == 0,
                }))
            }
        };
        Adversary {
            corrupted: config.corrupted.clone(),
            state,
        }
    }

    /// Partition labels for all `n` parties when the strategy starts with a
    /// partition: honest parties split in half by index, corrupted parties
    /// `floor(t/2)` / `ceil(t/2)`.
    pub fn initial_partition(&self, n: u32) -> Option<Vec<u32>> {
        let State::Balance(b) = &self.state else {
            return None;
        };
        if b.tau == 0 {
            return None;
        }
        let corrupted: HashSet<u32> = self.corrupted.iter().copied().collect();
        let honest: Vec<u32> = (0..n).filter(|p| !corrupted.contains(p)).collect();
        let mut labels = vec![0u32; n as usize];
        let half = honest.len() / 2;
        for (k, &p) in honest.iter().enumerate() {
            labels[p as usize] = u32::from(k >= half);
        }
        for (&p, &s) in &b.side_of {
            labels[p as usize] = s as u32;
        }
        Some(labels)
    }

    pub fn balance_outcome(&self) -> Option<&BalanceOutcome> {
        match &self.state {
            State::Balance(b) => Some(&b.outcome),
            _ => None,
        }
    }

    /// True once a balance attack has ended (always true for other strategies).
    pub fn finished(&self) -> bool {
        match &self.state {
            State::Balance(b) => b.over,
            _ => true,
        }
    }

    pub fn bank(&self) -> Option<&BlockBank> {
        match &self.state {
            State::Balance(b) => Some(&b.bank),
            _ => None,
        }
    }

    pub fn step(&mut self, view: &AdversaryView<'_>, ids: &mut IdAllocator) -> AdversaryAction {
        match &mut self.state {
            State::Passive => {
                let mut action = AdversaryAction::default();
                for s in view.successes {
                    action
                        .mined
                        .push(corrupted_block(ids, view.public_head, s, view.round));
                }
                action
            }
            State::Secret(st) => secret_step(st, view, ids),
            State::Balance(st) => balance_step(st, view, ids),
        }
    }
}

fn secret_step(
    st: &mut SecretState,
    view: &AdversaryView<'_>,
    ids: &mut IdAllocator,
) -> AdversaryAction {
    let mut action = AdversaryAction::default();
    let w = st.withhold;
    if (view.round - 1).is_multiple_of(w) {
        st.fork = Some(view.public_head);
        st.chain.clear();
    }
    let fork = st.fork.unwrap_or(view.public_head);
    for s in view.successes {
        let parent = st.chain.last().map(|b| b.id).unwrap_or(fork);
        let b = corrupted_block(ids, parent, s, view.round);
        st.chain.push(b.clone());
        action.mined.push(b);
    }
    if view.round.is_multiple_of(w) && !st.chain.is_empty() {
        if secret_chain_wins(view, fork, st.chain.len()) {
            let recipients: Vec<u32> = view.party_heads.iter().map(|&(p, _)| p).collect();
            for b in st.chain.drain(..) {
                action.messages.push(AdversaryMessage {
                    block: b,
                    recipients: recipients.clone(),
                    cross_partition: false,
                });
            }
        }
        st.chain.clear();
    }
    action
}

/// Whether a private chain of `len` blocks on `fork` beats the honest
/// subtree that the public main chain follows out of `fork`.
fn secret_chain_wins(view: &AdversaryView<'_>, fork: BlockId, len: usize) -> bool {
    let opts = SelectOptions {
        exactness: Exactness::numeric(),
        prefer: None,
    };
    let Ok(head) = crate::blocktree::select_head(view.public, view.coeff, opts, None) else {
        return false;
    };
    let head_id = view.public.id_of(head);
    let Ok(fd) = view.public.depth(fork) else {
        return false;
    };
    if !view.public.is_ancestor(fork, head_id).unwrap_or(false) {
        return false;
    }
    if head_id == fork {
        return true;
    }
    let hi = view.public.idx(head_id).unwrap();
    let child = view.public.id_of(view.public.ancestor_at(hi, fd + 1));
    let honest = view.public.weight_poly(child).unwrap();
    compare_polys(&WeightPoly::chain(len), &honest, view.coeff) == Ordering::Greater
}

fn balance_step(
    st: &mut BalanceState,
    view: &AdversaryView<'_>,
    ids: &mut IdAllocator,
) -> AdversaryAction {
    let mut action = AdversaryAction::default();
    let r = view.round;
    let side_heads = side_heads(view);

    for s in view.successes {
        let side = st.side_of[&s.party];
        let head = side_heads[side];
        let head_depth = view.public.depth(head).unwrap();
        let parent = match st.bank.sides[side].last() {
            Some((b, d)) if *d > head_depth => b.id,
            _ => head,
        };
        let pd = st.depth.get(&parent).copied().unwrap_or(head_depth);
        let b = corrupted_block(ids, parent, s, r);
        st.depth.insert(b.id, pd + 1);
        st.bank.sides[side].push((b.clone(), pd + 1));
        action.mined.push(b);
    }

    if r < st.tau || st.over {
        return action;
    }
    if r == st.tau {
        action.heal = true;
        st.outcome.bank_at_heal = st.bank.size() as u64;
    }

    if st.roots.is_none() {
        match fork_roots(view.public, side_heads) {
            Some(roots) => {
                st.roots = Some(roots);
                st.outcome.fork_roots = Some((roots[0], roots[1]));
            }
            None => {
                st.over = true;
                st.outcome.attack_duration = Some(0);
                return action;
            }
        }
    }
    let roots = st.roots.unwrap();
    let n = r - st.tau;
    match balance_release(st, view, roots) {
        Some(msgs) => action.messages = msgs,
        None => {
            st.over = true;
            st.outcome.attack_duration = Some(n);
        }
    }
    action
}

/// Head of the first honest party of each side.
fn side_heads(view: &AdversaryView<'_>) -> [BlockId; 2] {
    let n_honest = view.party_heads.len();
    let half = n_honest / 2;
    let h0 = view
        .party_heads
        .first()
        .map(|x| x.1)
        .unwrap_or(view.public_head);
    let h1 = view.party_heads.get(half).map(|x| x.1).unwrap_or(h0);
    [h0, h1]
}

fn fork_roots(tree: &BlockTree, heads: [BlockId; 2]) -> Option<[BlockId; 2]> {
    let a = tree.idx(heads[0]).ok()?;
    let b = tree.idx(heads[1]).ok()?;
    let d = tree.node(a).depth.min(tree.node(b).depth);
    let (mut x, mut y) = (tree.ancestor_at(a, d), tree.ancestor_at(b, d));
    if x == y {
        return None;
    }
    loop {
        let px = tree.node(x).parent.unwrap();
        let py = tree.node(y).parent.unwrap();
        if px == py {
            return Some([tree.id_of(x), tree.id_of(y)]);
        }
        x = px;
        y = py;
    }
}

/// Length of the main chain inside `T(root)` under `c`.
fn chain_length_below(tree: &BlockTree, root: BlockId, c: &WeightCoefficient) -> u32 {
    let opts = SelectOptions {
        exactness: Exactness::numeric(),
        prefer: None,
    };
    let start = tree.idx(root).unwrap();
    let h = crate::blocktree::head_below(tree, start, c, opts).unwrap_or(start);
    tree.node(h).depth
}

/// One balancing round. `None` means the imbalance cannot be answered.
fn balance_release(
    st: &mut BalanceState,
    view: &AdversaryView<'_>,
    roots: [BlockId; 2],
) -> Option<Vec<AdversaryMessage>> {
    let c = view.coeff;
    let tree = view.public;
    let w = [
        tree.weight_poly(roots[0]).ok()?,
        tree.weight_poly(roots[1]).ok()?,
    ];
    let len = [
        chain_length_below(tree, roots[0], c),
        chain_length_below(tree, roots[1], c),
    ];
    let (i, j) = match compare_polys(&w[0], &w[1], c) {
        Ordering::Greater => (0, 1),
        Ordering::Less => (1, 0),
        Ordering::Equal => match len[0].cmp(&len[1]) {
            Ordering::Greater => (0, 1),
            Ordering::Less => (1, 0),
            Ordering::Equal => return Some(Vec::new()),
        },
    };

    // bank blocks that hang below T(B_j), through other bank blocks if needed
    let in_bank: HashMap<BlockId, usize> = st.bank.sides[j]
        .iter()
        .enumerate()
        .map(|(k, (b, _))| (b.id, k))
        .collect();
    let attaches = |k: usize| -> bool {
        let mut cur = st.bank.sides[j][k].0.parent;
        while let Some(p) = cur {
            if let Some(&pk) = in_bank.get(&p) {
                cur = st.bank.sides[j][pk].0.parent;
            } else {
                return tree.contains(p) && tree.is_ancestor(roots[j], p).unwrap_or(false);
            }
        }
        false
    };
    let mut candidates: Vec<usize> = (0..st.bank.sides[j].len())
        .filter(|&k| attaches(k))
        .collect();
    candidates.sort_by(|&a, &b| {
        st.bank.sides[j][b]
            .1
            .cmp(&st.bank.sides[j][a].1)
            .then(a.cmp(&b))
    });

    let mut trial = tree.clone();
    let mut chosen: Vec<usize> = Vec::new();
    let mut chosen_set = HashSet::new();
    for k in candidates {
        if chosen_set.contains(&k) {
            continue;
        }
        // closure: unreleased bank ancestors first
        let mut closure = vec![k];
        let mut cur = st.bank.sides[j][k].0.parent;
        while let Some(p) = cur {
            match in_bank.get(&p) {
                Some(&pk) if !trial.contains(p) => {
                    closure.push(pk);
                    cur = st.bank.sides[j][pk].0.parent;
                }
                _ => break,
            }
        }
        closure.reverse();
        trial.attach(closure.iter().map(|&x| st.bank.sides[j][x].0.clone()));
        for x in closure {
            if chosen_set.insert(x) {
                chosen.push(x);
            }
        }
        let wj = trial.weight_poly(roots[j]).ok()?;
        let lj = chain_length_below(&trial, roots[j], c);
        let heavier = compare_polys(&wj, &w[i], c);
        let ok = match st.guard {
            LengthGuard::Strict => heavier != Ordering::Less && lj > len[i],
            LengthGuard::Balanced => {
                heavier == Ordering::Greater || (heavier == Ordering::Equal && lj >= len[i])
            }
        };
        if ok {
            let recipients: Vec<u32> = view
                .party_heads
                .iter()
                .enumerate()
                .filter(|(k, _)| usize::from(*k >= view.party_heads.len() / 2) == j)
                .map(|(_, &(p, _))| p)
                .collect();
            let mut released: Vec<(Arc<Block>, u32)> = chosen
                .iter()
                .map(|&x| st.bank.sides[j][x].clone())
                .collect();
            released.sort_by_key(|(_, d)| *d);
            let remove: HashSet<usize> = chosen.into_iter().collect();
            let mut k = 0;
            st.bank.sides[j].retain(|_| {
                let keep = !remove.contains(&k);
                k += 1;
                keep
            });
            return Some(
                released
                    .into_iter()
                    .map(|(b, _)| AdversaryMessage {
                        block: b,
                        recipients: recipients.clone(),
                        cross_partition: true,
                    })
                    .collect(),
            );
        }
    }
    None
}
