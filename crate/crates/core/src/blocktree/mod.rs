//! Block trees, subtree weights and chain selection.

pub mod interval;
pub(crate) mod select;
pub mod weight;

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::sync::Arc;

use thiserror::Error;

pub use select::{
    ghost_select, k_dominant_prefix, longest_chain_select, medium_select, medium_select_with,
    normalized_tree_weight, recursive_weight, PrefixMode, SelectOptions,
};
pub(crate) use select::{head_below, select_head, stable_head, HeadCache};
pub use weight::{
    compare_weight, compare_weight_with, evaluate_weight, CoefficientKind, Exactness,
    WeightCoefficient, WeightError, WeightPoly,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockId(pub u64);

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TxId(pub u64);

/// Author of a block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Miner {
    System,
    Honest(u32),
    Adversary(u32),
}

impl Miner {
    pub fn is_honest(self) -> bool {
        matches!(self, Miner::Honest(_))
    }
}

impl fmt::Display for Miner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Miner::System => write!(f, "system"),
            Miner::Honest(i) => write!(f, "{i}"),
            Miner::Adversary(i) => write!(f, "a{i}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub id: BlockId,
    pub parent: Option<BlockId>,
    pub miner: Miner,
    pub round: u64,
    pub ctr: u32,
    pub payload: Vec<TxId>,
}

impl Block {
    pub fn genesis() -> Self {
        Block {
            id: BlockId(0),
            parent: None,
            miner: Miner::System,
            round: 0,
            ctr: 0,
            payload: Vec::new(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("unknown block {0}")]
    UnknownBlock(BlockId),
    #[error("not a chain of this tree")]
    InvalidChain,
    #[error(transparent)]
    Weight(#[from] WeightError),
}

/// Sequence of block ids from genesis to head.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Chain(Vec<BlockId>);

impl Chain {
    pub fn new(blocks: Vec<BlockId>) -> Self {
        Chain(blocks)
    }

    pub fn blocks(&self) -> &[BlockId] {
        &self.0
    }

    pub fn head(&self) -> BlockId {
        *self.0.last().expect("chain holds genesis")
    }

    /// Depth of the head.
    pub fn length(&self) -> usize {
        self.0.len() - 1
    }

    pub fn is_prefix_of(&self, other: &Chain) -> bool {
        other.0.len() >= self.0.len() && other.0[..self.0.len()] == self.0[..]
    }

    pub fn contains(&self, id: BlockId) -> bool {
        self.0.contains(&id)
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Node {
    pub block: Arc<Block>,
    pub parent: Option<usize>,
    pub depth: u32,
    pub children: Vec<usize>,
    pub batch: u64,
    pub seq: u64,
    pub size: u64,
    pub height: u32,
}

/// One party's view of the mined blocks.
#[derive(Clone, Debug)]
pub struct BlockTree {
    nodes: Vec<Node>,
    index: HashMap<BlockId, usize>,
    next_seq: u64,
    next_batch: u64,
    max_id: u64,
}

impl Default for BlockTree {
    fn default() -> Self {
        Self::new()
    }
}

impl BlockTree {
    pub fn new() -> Self {
        Self::with_genesis(Arc::new(Block::genesis()))
    }

    pub fn with_genesis(genesis: Arc<Block>) -> Self {
        let mut index = HashMap::new();
        index.insert(genesis.id, 0);
        let max_id = genesis.id.0;
        BlockTree {
            nodes: vec![Node {
                block: genesis,
                parent: None,
                depth: 0,
                children: Vec::new(),
                batch: 0,
                seq: 0,
                size: 1,
                height: 0,
            }],
            index,
            next_seq: 1,
            next_batch: 1,
            max_id,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn genesis(&self) -> BlockId {
        self.nodes[0].block.id
    }

    pub fn contains(&self, id: BlockId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn get(&self, id: BlockId) -> Option<&Block> {
        self.index.get(&id).map(|&i| &*self.nodes[i].block)
    }

    pub(crate) fn idx(&self, id: BlockId) -> Result<usize, TreeError> {
        self.index
            .get(&id)
            .copied()
            .ok_or(TreeError::UnknownBlock(id))
    }

    pub(crate) fn node(&self, idx: usize) -> &Node {
        &self.nodes[idx]
    }

    pub(crate) fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub(crate) fn id_of(&self, idx: usize) -> BlockId {
        self.nodes[idx].block.id
    }

    pub fn depth(&self, id: BlockId) -> Result<u32, TreeError> {
        Ok(self.nodes[self.idx(id)?].depth)
    }

    pub fn parent(&self, id: BlockId) -> Result<Option<BlockId>, TreeError> {
        Ok(self.nodes[self.idx(id)?].parent.map(|p| self.id_of(p)))
    }

    pub fn children(&self, id: BlockId) -> Result<Vec<BlockId>, TreeError> {
        let i = self.idx(id)?;
        Ok(self.nodes[i]
            .children
            .iter()
            .map(|&c| self.id_of(c))
            .collect())
    }

    pub fn arrival_seq(&self, id: BlockId) -> Result<u64, TreeError> {
        Ok(self.nodes[self.idx(id)?].seq)
    }

    /// Number of blocks in `T(id)`.
    pub fn subtree_size(&self, id: BlockId) -> Result<u64, TreeError> {
        Ok(self.nodes[self.idx(id)?].size)
    }

    /// Largest relative depth in `T(id)`.
    pub fn subtree_height(&self, id: BlockId) -> Result<u32, TreeError> {
        Ok(self.nodes[self.idx(id)?].height)
    }

    pub fn max_depth(&self) -> u32 {
        self.nodes[0].height
    }

    /// Blocks in arrival order, genesis first.
    pub fn blocks(&self) -> impl Iterator<Item = &Arc<Block>> {
        self.nodes.iter().map(|n| &n.block)
    }

    /// Chain from genesis to `id`.
    pub fn chain_to(&self, id: BlockId) -> Result<Chain, TreeError> {
        Ok(self.chain_to_idx(self.idx(id)?))
    }

    pub(crate) fn chain_to_idx(&self, mut i: usize) -> Chain {
        let mut v = Vec::with_capacity(self.nodes[i].depth as usize + 1);
        loop {
            v.push(self.id_of(i));
            match self.nodes[i].parent {
                Some(p) => i = p,
                None => break,
            }
        }
        v.reverse();
        Chain(v)
    }

    /// Index of the ancestor of `i` at `depth`.
    pub(crate) fn ancestor_at(&self, mut i: usize, depth: u32) -> usize {
        while self.nodes[i].depth > depth {
            i = self.nodes[i].parent.unwrap();
        }
        i
    }

    pub fn is_ancestor(&self, a: BlockId, b: BlockId) -> Result<bool, TreeError> {
        let ia = self.idx(a)?;
        let ib = self.idx(b)?;
        let da = self.nodes[ia].depth;
        Ok(self.nodes[ib].depth >= da && self.ancestor_at(ib, da) == ia)
    }

    /// Checks that `chain` starts at genesis and follows parent links.
    pub fn validate_chain(&self, chain: &Chain) -> Result<Vec<usize>, TreeError> {
        let mut out = Vec::with_capacity(chain.0.len());
        for (k, id) in chain.0.iter().enumerate() {
            let i = self.idx(*id).map_err(|_| TreeError::InvalidChain)?;
            let ok = match (k, self.nodes[i].parent) {
                (0, None) => true,
                (0, Some(_)) => false,
                (_, Some(p)) => p == out[k - 1],
                (_, None) => false,
            };
            if !ok {
                return Err(TreeError::InvalidChain);
            }
            out.push(i);
        }
        if out.is_empty() {
            return Err(TreeError::InvalidChain);
        }
        Ok(out)
    }

    /// Number of blocks per relative depth of `T(root)`.
    pub fn weight_poly(&self, root: BlockId) -> Result<WeightPoly, TreeError> {
        Ok(self.weight_poly_idx(self.idx(root)?))
    }

    pub(crate) fn weight_poly_idx(&self, root: usize) -> WeightPoly {
        let base = self.nodes[root].depth as usize;
        let mut coeffs = vec![0u64; self.nodes[root].height as usize + 1];
        let mut stack = vec![root];
        while let Some(i) = stack.pop() {
            coeffs[self.nodes[i].depth as usize - base] += 1;
            stack.extend_from_slice(&self.nodes[i].children);
        }
        WeightPoly::new(coeffs)
    }

    /// Attaches every block whose parent is known, with no payload check.
    pub fn attach<I>(&mut self, incoming: I) -> Vec<BlockId>
    where
        I: IntoIterator<Item = Arc<Block>>,
    {
        self.validate_and_attach(incoming, |_, _| true)
    }

    /// Attaches blocks whose parent is present and which pass `valid`,
    /// iterating to a fixpoint so chains delivered together attach in order.
    /// Returns the accepted ids in attachment order.
    pub fn validate_and_attach<I, V>(&mut self, incoming: I, valid: V) -> Vec<BlockId>
    where
        I: IntoIterator<Item = Arc<Block>>,
        V: Fn(&BlockTree, &Block) -> bool,
    {
        let mut pending: Vec<(u64, Arc<Block>)> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        let base = self.next_seq;
        let mut count = 0u64;
        for b in incoming {
            count += 1;
            if self.index.contains_key(&b.id) || !seen.insert(b.id) {
                continue;
            }
            pending.push((base + count - 1, b));
        }
        let batch = self.next_batch;
        self.next_batch += 1;
        self.next_seq = base + count;

        let mut accepted = Vec::new();
        loop {
            let mut progress = false;
            let mut rest = Vec::with_capacity(pending.len());
            for (seq, b) in pending {
                let ok = match b.parent {
                    Some(p) => self.index.contains_key(&p),
                    None => false,
                };
                if ok {
                    if valid(self, &b) {
                        accepted.push(b.id);
                        self.insert(b, batch, seq);
                        progress = true;
                    }
                } else {
                    rest.push((seq, b));
                }
            }
            pending = rest;
            if !progress || pending.is_empty() {
                break;
            }
        }
        accepted
    }

    fn insert(&mut self, block: Arc<Block>, batch: u64, seq: u64) {
        let p = self.index[&block.parent.unwrap()];
        let i = self.nodes.len();
        let depth = self.nodes[p].depth + 1;
        self.max_id = self.max_id.max(block.id.0);
        self.index.insert(block.id, i);
        self.nodes.push(Node {
            block,
            parent: Some(p),
            depth,
            children: Vec::new(),
            batch,
            seq,
            size: 1,
            height: 0,
        });
        let siblings = &mut self.nodes[p].children;
        let pos = siblings.len();
        siblings.push(i);
        // keep siblings ordered by arrival sequence
        let mut k = pos;
        while k > 0 && self.nodes[self.nodes[p].children[k - 1]].seq > seq {
            self.nodes[p].children.swap(k - 1, k);
            k -= 1;
        }
        let mut cur = Some(p);
        let mut h = 0u32;
        while let Some(a) = cur {
            let n = &mut self.nodes[a];
            n.size += 1;
            h += 1;
            if n.height < h {
                n.height = h;
            } else {
                h = n.height;
            }
            cur = n.parent;
        }
    }

    /// Adds a fresh child of `parent` with the next unused id; for building
    /// trees by hand.
    pub fn extend(&mut self, parent: BlockId, miner: Miner) -> Result<BlockId, TreeError> {
        self.idx(parent)?;
        let id = BlockId(self.max_id + 1);
        let b = Block {
            id,
            parent: Some(parent),
            miner,
            round: 0,
            ctr: 0,
            payload: Vec::new(),
        };
        self.attach([Arc::new(b)]);
        Ok(id)
    }

    /// One line per block: `id parent depth miner round arrival`.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for n in &self.nodes {
            let parent = match n.block.parent {
                Some(p) => p.to_string(),
                None => "-".to_string(),
            };
            let _ = writeln!(
                s,
                "{} {} {} {} {} {}",
                n.block.id, parent, n.depth, n.block.miner, n.block.round, n.seq
            );
        }
        s
    }

    /// Stable hash of the arrival sequence, used to detect identical views.
    pub(crate) fn fingerprint(&self) -> (usize, u64) {
        let mut h: u64 = 0xcbf29ce484222325;
        for n in &self.nodes {
            h ^= n.block.id.0;
            h = h.wrapping_mul(0x100000001b3);
            h ^= n.batch;
            h = h.wrapping_mul(0x100000001b3);
        }
        (self.nodes.len(), h)
    }

    /// Same blocks with the same arrival structure.
    pub(crate) fn same_view(&self, other: &BlockTree) -> bool {
        self.nodes.len() == other.nodes.len()
            && self
                .nodes
                .iter()
                .zip(&other.nodes)
                .all(|(a, b)| a.block.id == b.block.id && a.batch == b.batch && a.seq == b.seq)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blk(id: u64, parent: u64) -> Arc<Block> {
        Arc::new(Block {
            id: BlockId(id),
            parent: Some(BlockId(parent)),
            miner: Miner::Honest(0),
            round: 1,
            ctr: 1,
            payload: vec![],
        })
    }

    #[test]
    fn polys_of_small_trees() {
        let mut t = BlockTree::new();
        assert_eq!(t.weight_poly(BlockId(0)).unwrap().coeffs(), &[1]);
        let a = t.extend(BlockId(0), Miner::Honest(0)).unwrap();
        let _b = t.extend(BlockId(0), Miner::Honest(1)).unwrap();
        t.extend(a, Miner::Honest(0)).unwrap();
        assert_eq!(t.weight_poly(BlockId(0)).unwrap().coeffs(), &[1, 2, 1]);
        assert_eq!(t.subtree_size(BlockId(0)).unwrap(), 4);
        assert_eq!(t.max_depth(), 2);
        assert_eq!(
            t.weight_poly(BlockId(99)),
            Err(TreeError::UnknownBlock(BlockId(99)))
        );
    }

    #[test]
    fn orphans_wait_and_fixpoint_attaches() {
        let mut t = BlockTree::new();
        assert!(t.attach([blk(5, 4)]).is_empty());
        assert_eq!(t.len(), 1);
        let got = t.attach([blk(2, 1), blk(1, 0)]);
        assert_eq!(got, vec![BlockId(1), BlockId(2)]);
        assert_eq!(t.depth(BlockId(2)).unwrap(), 2);
        // duplicates are dropped silently
        assert!(t.attach([blk(1, 0), blk(1, 0)]).is_empty());
    }

    #[test]
    fn validator_rejects() {
        let mut t = BlockTree::new();
        let got = t.validate_and_attach([blk(1, 0), blk(2, 0)], |_, b| b.id != BlockId(2));
        assert_eq!(got, vec![BlockId(1)]);
    }

    #[test]
    fn dump_format() {
        let mut t = BlockTree::new();
        t.attach([blk(1, 0)]);
        assert_eq!(t.dump(), "0 - 0 system 0 0\n1 0 1 0 1 1\n");
    }

    #[test]
    fn children_in_arrival_order() {
        let mut t = BlockTree::new();
        t.attach([blk(3, 1), blk(2, 0), blk(1, 0)]);
        assert_eq!(
            t.children(BlockId(0)).unwrap(),
            vec![BlockId(2), BlockId(1)]
        );
        let s2 = t.arrival_seq(BlockId(2)).unwrap();
        let s1 = t.arrival_seq(BlockId(1)).unwrap();
        assert!(s2 < s1);
    }
}
