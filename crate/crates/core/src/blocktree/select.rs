//! Main-chain selection rules and the weighted prefix.

use std::cmp::Ordering;
use std::collections::HashMap;

use super::interval::F64Interval;
use super::weight::{compare_to_threshold, compare_weight_with, CoefficientKind, Exactness};
use super::{
    BlockId, BlockTree, Chain, Miner, TreeError, WeightCoefficient, WeightError, WeightPoly,
};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SelectOptions {
    pub exactness: Exactness,
    /// Blocks of this miner count as received first within their batch.
    pub prefer: Option<Miner>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Count,
    Height,
    Weight,
}

struct Selector<'a> {
    tree: &'a BlockTree,
    c: &'a WeightCoefficient,
    mode: Mode,
    opts: SelectOptions,
    ln_c: (f64, f64),
    memo: HashMap<usize, usize>,
    polys: HashMap<usize, WeightPoly>,
}

impl<'a> Selector<'a> {
    fn new(tree: &'a BlockTree, c: &'a WeightCoefficient, opts: SelectOptions) -> Self {
        let mode = match c.kind() {
            CoefficientKind::GhostOne => Mode::Count,
            CoefficientKind::BitcoinLimit => Mode::Height,
            _ => Mode::Weight,
        };
        let ln_c = match c.f64_bounds() {
            Ok((lo, hi)) => (lo.ln().next_down().max(0.0), hi.ln().next_up()),
            Err(_) => (0.0, 0.0),
        };
        Selector {
            tree,
            c,
            mode,
            opts,
            ln_c,
            memo: HashMap::new(),
            polys: HashMap::new(),
        }
    }

    fn head_from(&mut self, start: usize) -> Result<usize, WeightError> {
        let mut node = start;
        let mut path = Vec::new();
        let head = loop {
            if let Some(&h) = self.memo.get(&node) {
                break h;
            }
            let children = &self.tree.node(node).children;
            if children.is_empty() {
                break node;
            }
            let mut best = children[0];
            for &ch in &children[1..] {
                if self.prefers(ch, best)? {
                    best = ch;
                }
            }
            path.push(node);
            node = best;
        };
        for p in path {
            self.memo.insert(p, head);
        }
        Ok(head)
    }

    fn prefers(&mut self, a: usize, b: usize) -> Result<bool, WeightError> {
        match self.cmp_weight(a, b)? {
            Ordering::Greater => return Ok(true),
            Ordering::Less => return Ok(false),
            Ordering::Equal => {}
        }
        let la = self.tree.node(self.head_from(a)?).depth;
        let lb = self.tree.node(self.head_from(b)?).depth;
        if la != lb {
            return Ok(la > lb);
        }
        Ok(self.arrival_key(a) < self.arrival_key(b))
    }

    fn arrival_key(&mut self, i: usize) -> (u64, u8, u64) {
        let n = self.tree.node(i);
        let own = match self.opts.prefer {
            Some(m) if n.block.miner == m => 0,
            _ => 1,
        };
        (n.batch, own, n.seq)
    }

    fn cmp_weight(&mut self, a: usize, b: usize) -> Result<Ordering, WeightError> {
        let (na, nb) = (self.tree.node(a), self.tree.node(b));
        match self.mode {
            Mode::Count => Ok(na.size.cmp(&nb.size)),
            Mode::Height => Ok(na.height.cmp(&nb.height)),
            Mode::Weight => {
                if let Some(o) = self.dominates(a, b) {
                    return Ok(o);
                }
                let pa = self.poly(a);
                let pb = self.poly(b);
                compare_weight_with(&pa, &pb, self.c, self.opts.exactness)
            }
        }
    }

    fn poly(&mut self, i: usize) -> WeightPoly {
        if let Some(p) = self.polys.get(&i) {
            return p.clone();
        }
        let p = self.tree.weight_poly_idx(i);
        self.polys.insert(i, p.clone());
        p
    }

    /// Decides the comparison from subtree sizes and heights alone when one
    /// side clearly dominates.
    fn dominates(&self, a: usize, b: usize) -> Option<Ordering> {
        let (na, nb) = (self.tree.node(a), self.tree.node(b));
        let lower = |n: &super::Node| -> f64 {
            // every block weighs at least 1 and the deepest path weighs a geometric sum
            let by_count = (n.size as f64).ln();
            let by_height = n.height as f64 * self.ln_c.0;
            by_count.max(by_height)
        };
        let upper = |n: &super::Node| (n.size as f64).ln() + n.height as f64 * self.ln_c.1;
        let margin = |x: f64| 1e-9 * (1.0 + x.abs());
        let (la, ua, lb, ub) = (lower(na), upper(na), lower(nb), upper(nb));
        if la > ub + margin(ub) {
            Some(Ordering::Greater)
        } else if lb > ua + margin(ua) {
            Some(Ordering::Less)
        } else {
            None
        }
    }
}

/// Head index selected from genesis; fills `sensitive` with the miners of
/// same-batch blocks whose order decided a tie.
pub(crate) fn select_head(
    tree: &BlockTree,
    c: &WeightCoefficient,
    opts: SelectOptions,
    sensitive: Option<&mut Vec<Miner>>,
) -> Result<usize, WeightError> {
    let mut ties = Vec::new();
    let head = descend(tree, c, opts, 0, &mut ties)?;
    if let Some(s) = sensitive {
        s.extend(ties.into_iter().flat_map(|t| [t.1, t.2]));
    }
    Ok(head)
}

/// Arrival-order ties met on the way down: `(depth, miner, miner)`.
pub(crate) type Tie = (u32, Miner, Miner);

fn descend(
    tree: &BlockTree,
    c: &WeightCoefficient,
    opts: SelectOptions,
    start: usize,
    ties: &mut Vec<Tie>,
) -> Result<usize, WeightError> {
    let mut s = Selector::new(tree, c, opts);
    let mut node = start;
    let mut tied = Vec::new();
    loop {
        let children = &tree.node(node).children;
        if children.is_empty() {
            return Ok(node);
        }
        let mut best = children[0];
        tied.clear();
        for &ch in &children[1..] {
            let better = match s.cmp_weight(ch, best)? {
                Ordering::Greater => true,
                Ordering::Less => false,
                Ordering::Equal => {
                    let la = tree.node(s.head_from(ch)?).depth;
                    let lb = tree.node(s.head_from(best)?).depth;
                    if la != lb {
                        la > lb
                    } else {
                        // weight and length agree, so arrival decides
                        let wins = s.arrival_key(ch) < s.arrival_key(best);
                        tied.push(if wins { best } else { ch });
                        if wins {
                            best = ch;
                        }
                        continue;
                    }
                }
            };
            if better {
                best = ch;
                tied.clear();
            }
        }
        let nb = tree.node(best);
        for &x in &tied {
            let nx = tree.node(x);
            if nx.batch == nb.batch {
                ties.push((tree.node(node).depth, nb.block.miner, nx.block.miner));
            }
        }
        node = best;
    }
}

/// Main-chain head of a growing tree, updated from the shallowest point
/// that blocks added since the last call could have changed.
#[derive(Clone, Debug, Default)]
pub(crate) struct HeadCache {
    state: Option<(usize, usize, Vec<Tie>)>,
}

impl HeadCache {
    /// Head index and the arrival-order ties on its path.
    pub(crate) fn update(
        &mut self,
        tree: &BlockTree,
        c: &WeightCoefficient,
        opts: SelectOptions,
    ) -> Result<(usize, Vec<Tie>), WeightError> {
        let start = match &self.state {
            None => 0,
            Some((head, seen, ties)) => {
                let head = *head;
                let mut depth = tree.node(head).depth;
                for i in *seen..tree.len() {
                    depth = depth.min(lca_depth(tree, i, head));
                }
                if let Some(d) = ties.iter().map(|t| t.0).min() {
                    depth = depth.min(d);
                }
                if *seen == tree.len() {
                    return Ok((head, ties.clone()));
                }
                tree.ancestor_at(head, depth)
            }
        };
        let mut ties = Vec::new();
        let head = descend(tree, c, opts, start, &mut ties)?;
        self.state = Some((head, tree.len(), ties.clone()));
        Ok((head, ties))
    }
}

fn lca_depth(tree: &BlockTree, a: usize, b: usize) -> u32 {
    let d = tree.node(a).depth.min(tree.node(b).depth);
    let (mut x, mut y) = (tree.ancestor_at(a, d), tree.ancestor_at(b, d));
    while x != y {
        x = tree.node(x).parent.unwrap();
        y = tree.node(y).parent.unwrap();
    }
    tree.node(x).depth
}

/// Head of the main chain restricted to `T(start)`.
pub(crate) fn head_below(
    tree: &BlockTree,
    start: usize,
    c: &WeightCoefficient,
    opts: SelectOptions,
) -> Result<usize, WeightError> {
    Selector::new(tree, c, opts).head_from(start)
}

/// Main chain under the weighting `c`, with exact comparisons.
pub fn medium_select(tree: &BlockTree, c: &WeightCoefficient) -> Result<Chain, WeightError> {
    medium_select_with(tree, c, SelectOptions::default())
}

pub fn medium_select_with(
    tree: &BlockTree,
    c: &WeightCoefficient,
    opts: SelectOptions,
) -> Result<Chain, WeightError> {
    Ok(tree.chain_to_idx(select_head(tree, c, opts, None)?))
}

/// Heaviest-subtree rule counting blocks.
pub fn ghost_select(tree: &BlockTree) -> Chain {
    let nodes = tree.nodes();
    // counts and best-leaf depths bottom-up; children always follow parents in storage
    let mut count = vec![1u64; nodes.len()];
    for i in (1..nodes.len()).rev() {
        let p = nodes[i].parent.unwrap();
        count[p] += count[i];
    }
    let mut head_depth = vec![0u32; nodes.len()];
    for i in (0..nodes.len()).rev() {
        let mut best: Option<usize> = None;
        for &ch in &nodes[i].children {
            best = Some(match best {
                None => ch,
                Some(b) => {
                    let better = count[ch] > count[b]
                        || (count[ch] == count[b]
                            && (head_depth[ch] > head_depth[b]
                                || (head_depth[ch] == head_depth[b]
                                    && nodes[ch].seq < nodes[b].seq)));
                    if better {
                        ch
                    } else {
                        b
                    }
                }
            });
        }
        head_depth[i] = match best {
            Some(b) => head_depth[b],
            None => nodes[i].depth,
        };
    }
    let mut node = 0;
    loop {
        let ch = &nodes[node].children;
        if ch.is_empty() {
            break;
        }
        let mut b = ch[0];
        for &x in &ch[1..] {
            if count[x] > count[b]
                || (count[x] == count[b]
                    && (head_depth[x] > head_depth[b]
                        || (head_depth[x] == head_depth[b] && nodes[x].seq < nodes[b].seq)))
            {
                b = x;
            }
        }
        node = b;
    }
    tree.chain_to_idx(node)
}

/// Deepest leaf; among equally deep leaves the path that arrived first at
/// the point where the paths diverge.
pub fn longest_chain_select(tree: &BlockTree) -> Chain {
    let nodes = tree.nodes();
    let max = nodes.iter().map(|n| n.depth).max().unwrap_or(0);
    let mut best: Option<Vec<u64>> = None;
    let mut best_leaf = 0;
    for (i, n) in nodes.iter().enumerate() {
        if n.depth != max {
            continue;
        }
        let mut key = Vec::with_capacity(max as usize);
        let mut j = i;
        while let Some(p) = nodes[j].parent {
            key.push(nodes[j].seq);
            j = p;
        }
        key.reverse();
        if best.as_ref().is_none_or(|b| key < *b) {
            best = Some(key);
            best_leaf = i;
        }
    }
    tree.chain_to_idx(best_leaf)
}

/// Polynomial whose value is `ω_c(T(B)) / c^{d(B)}`.
pub fn normalized_tree_weight(
    tree: &BlockTree,
    b: BlockId,
    c: &WeightCoefficient,
) -> Result<WeightPoly, TreeError> {
    if c.is_limit() {
        return Err(WeightError::LimitMode.into());
    }
    tree.weight_poly(b)
}

/// Recursive evaluation `c * sum(children) + 1` in outward-rounded f64
/// intervals.
pub fn recursive_weight(
    tree: &BlockTree,
    b: BlockId,
    c: &WeightCoefficient,
) -> Result<F64Interval, TreeError> {
    let (lo, hi) = c.f64_bounds()?;
    Ok(subtree_weight_f64(tree, tree.idx(b)?, lo, hi))
}

pub(crate) fn subtree_weight_f64(
    tree: &BlockTree,
    root: usize,
    c_lo: f64,
    c_hi: f64,
) -> F64Interval {
    let cw = F64Interval::new(c_lo, c_hi);
    let mut order = vec![root];
    let mut k = 0;
    while k < order.len() {
        let i = order[k];
        order.extend_from_slice(&tree.node(i).children);
        k += 1;
    }
    let mut w: HashMap<usize, F64Interval> = HashMap::with_capacity(order.len());
    for &i in order.iter().rev() {
        let mut sum = F64Interval::point(0.0);
        for ch in &tree.node(i).children {
            sum = sum.add(w[ch]);
        }
        w.insert(i, cw.mul(sum).add(F64Interval::point(1.0)));
    }
    w[&root]
}

/// Whether the prefix threshold applies to normalized or absolute weight.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PrefixMode {
    #[default]
    Normalized,
    Absolute,
}

/// Deepest block on the chain ending at `head` whose subtree weight meets
/// `k`, or genesis when none does.
pub(crate) fn stable_head(
    tree: &BlockTree,
    head: usize,
    c: &WeightCoefficient,
    k: f64,
    mode: PrefixMode,
) -> Result<usize, WeightError> {
    let (c_lo, c_hi) = c.f64_bounds()?;
    if k <= 1.0 && mode == PrefixMode::Normalized {
        return Ok(head);
    }
    let cw = F64Interval::new(c_lo, c_hi);
    let (lnc_lo, lnc_hi) = (c_lo.ln(), c_hi.ln());
    let lnk = k.ln();
    let mut w = F64Interval::point(1.0);
    let mut node = head;
    loop {
        let n = tree.node(node);
        let verdict = match mode {
            PrefixMode::Normalized => w.cmp(F64Interval::point(k)),
            PrefixMode::Absolute => {
                let d = n.depth as f64;
                let lo = w.lo.ln() + d * lnc_lo;
                let hi = w.hi.ln() + d * lnc_hi;
                let m = 1e-12 * (1.0 + lnk.abs());
                if lo - m > lnk {
                    Some(Ordering::Greater)
                } else if hi + m < lnk {
                    Some(Ordering::Less)
                } else {
                    None
                }
            }
        };
        let qualifies = match verdict {
            Some(o) => o != Ordering::Less,
            None => {
                let poly = tree.weight_poly_idx(node);
                let shift = match mode {
                    PrefixMode::Normalized => 0,
                    PrefixMode::Absolute => n.depth as usize,
                };
                compare_to_threshold(&poly, shift, c, k)? != Ordering::Less
            }
        };
        if qualifies {
            return Ok(node);
        }
        let Some(p) = n.parent else {
            return Ok(0);
        };
        let mut sum = w;
        for &s in &tree.node(p).children {
            if s != node {
                sum = sum.add(subtree_weight_f64(tree, s, c_lo, c_hi));
            }
        }
        w = cw.mul(sum).add(F64Interval::point(1.0));
        node = p;
    }
}

/// Longest prefix of `chain` whose blocks all carry subtree weight at least `k`.
pub fn k_dominant_prefix(
    tree: &BlockTree,
    chain: &Chain,
    c: &WeightCoefficient,
    k: f64,
    mode: PrefixMode,
) -> Result<Chain, TreeError> {
    let idxs = tree.validate_chain(chain)?;
    if k <= 0.0 {
        return Ok(chain.clone());
    }
    let head = *idxs.last().unwrap();
    let s = stable_head(tree, head, c, k, mode)?;
    let keep = tree.node(s).depth as usize + 1;
    Ok(Chain::new(chain.blocks()[..keep].to_vec()))
}
