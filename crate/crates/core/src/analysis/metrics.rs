use std::collections::HashMap;

use super::lineage::Lineage;
use super::params::expected_subtree_weight;
use super::AnalysisError;
use crate::blocktree::BlockId;
use crate::mining::{derived_rates, ProtocolParams};
use crate::sim::SimTrace;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThroughputMetrics {
    /// Honest blocks in the final main chain over its length (1 for an
    /// empty chain).
    pub honest_fraction: f64,
    /// `1 - Y / X̃` over the whole run (0 without successful rounds).
    pub psi_f: f64,
    /// Fraction of depths holding honest blocks that hold at least two.
    pub collision_rate: f64,
    pub chain_length: u64,
    /// `None` when the parties still disagree at the end of the run.
    pub fork_duration: Option<u64>,
}

/// `1 - γ_u / γ`, the probability that a successful round is not uniquely
/// successful.
pub fn psi_f_expected(params: &ProtocolParams) -> f64 {
    let r = derived_rates(params);
    if r.gamma <= 0.0 {
        0.0
    } else {
        1.0 - r.gamma_u / r.gamma
    }
}

/// Heads of round `r` (1-based); `rounds + 1` means the final heads.
pub(crate) fn heads_at(trace: &SimTrace, r: u64) -> &[BlockId] {
    if r as usize <= trace.heads.len() {
        &trace.heads[r as usize - 1]
    } else {
        &trace.final_heads
    }
}

pub fn throughput_metrics(trace: &SimTrace) -> ThroughputMetrics {
    let chain = trace.final_chain();
    let len = chain.len() as u64 - 1;
    let honest = chain
        .iter()
        .skip(1)
        .filter(|&&b| trace.is_honest_block(b))
        .count() as u64;
    let honest_fraction = if len == 0 {
        1.0
    } else {
        honest as f64 / len as f64
    };
    let (xt, y) = trace.stats.iter().fold((0u64, 0u64), |(a, b), s| {
        (a + s.x_tilde() as u64, b + s.y() as u64)
    });
    let psi_f = if xt == 0 {
        0.0
    } else {
        1.0 - y as f64 / xt as f64
    };
    let mut per_depth: HashMap<u32, u32> = HashMap::new();
    for b in trace.tree.blocks().skip(1) {
        if b.miner.is_honest() {
            *per_depth
                .entry(trace.tree.depth(b.id).unwrap())
                .or_default() += 1;
        }
    }
    let collision_rate = if per_depth.is_empty() {
        0.0
    } else {
        per_depth.values().filter(|&&k| k >= 2).count() as f64 / per_depth.len() as f64
    };
    ThroughputMetrics {
        honest_fraction,
        psi_f,
        collision_rate,
        chain_length: len,
        fork_duration: fork_duration(trace),
    }
}

/// Rounds after the heal until every honest party sits, for good, in the
/// same subtree below the fork point: the first round `r ≥ τ + 1` from
/// which all heads share the ancestor at the fork-root depth, minus
/// `τ + 1`. Zero without a partition or without a fork at the heal; `None`
/// when the parties disagree at the end of the trace or per-round heads
/// were not recorded.
pub fn fork_duration(trace: &SimTrace) -> Option<u64> {
    let Some(tau) = trace.partition else {
        return Some(0);
    };
    let Some((a, _)) = trace.balance.as_ref().and_then(|o| o.fork_roots) else {
        return Some(0);
    };
    if trace.heads.len() as u64 != trace.rounds {
        return None;
    }
    let lin = Lineage::new(&trace.tree);
    let d = lin.depth(a);
    let agree = |r: u64| {
        let heads = heads_at(trace, r);
        let side = |h: BlockId| {
            if lin.depth(h) >= d {
                Some(lin.ancestor_at(h, d))
            } else {
                None
            }
        };
        let first = side(heads[0]);
        first.is_some() && heads.iter().all(|&h| side(h) == first)
    };
    let last = trace.rounds + 1;
    if !agree(last) {
        return None;
    }
    let mut r = last;
    while r > tau + 1 && agree(r - 1) {
        r -= 1;
    }
    Some(r - (tau + 1))
}

/// `(ℓ_B, ℓ_L)` at the start of round `round`: the shortest honest main
/// chain minus the depth of `block`, and the longest path from `block`
/// down to a block some honest party holds.
pub fn distance_metrics(
    trace: &SimTrace,
    block: BlockId,
    round: u64,
) -> Result<(i64, u32), AnalysisError> {
    if round == 0 || round > trace.rounds + 1 {
        return Err(AnalysisError::Argument(format!(
            "round {round} outside 1..={}",
            trace.rounds + 1
        )));
    }
    if round <= trace.rounds && trace.heads.len() as u64 != trace.rounds {
        return Err(AnalysisError::NeedsFullRecord);
    }
    let lin = Lineage::new(&trace.tree);
    if block.0 as usize >= lin.len() {
        return Err(AnalysisError::Argument(format!("unknown block {block}")));
    }
    let db = lin.depth(block);
    let shortest = heads_at(trace, round)
        .iter()
        .map(|&h| lin.depth(h))
        .min()
        .unwrap();
    let mut ell_l = 0;
    for (i, seen) in trace.first_seen_any.iter().enumerate() {
        let b = BlockId(i as u64);
        if seen.is_some_and(|s| s <= round)
            && lin.depth(b) > db + ell_l
            && lin.is_ancestor(block, b)
        {
            ell_l = lin.depth(b) - db;
        }
    }
    Ok((shortest as i64 - db as i64, ell_l))
}

/// `(observed, expected)` normalized weights of the subtrees below up to
/// `max` evenly spaced blocks of the final tree that have descendants. The
/// observed weight is `Σ c^{d(x) - d(B)}` over the descendants `x` of `B`;
/// the expectation is `(N / ℓ) Σ_{i=1}^{ℓ} c^i` for their count `N` and
/// height `ℓ`.
pub fn subtree_weight_samples(
    trace: &SimTrace,
    max: usize,
) -> Result<Vec<(f64, f64)>, AnalysisError> {
    if trace.coeff.is_limit() {
        return Err(AnalysisError::LimitCoefficient);
    }
    let c = trace.coeff.approx();
    let tree = &trace.tree;
    // per block: (descendant count, height, Σ c^{relative depth})
    let mut acc = vec![(0u64, 0u32, 0.0f64); tree.len()];
    for i in (1..tree.len()).rev() {
        let node = tree.node(i);
        let parent = node.parent.unwrap();
        let (n, h, w) = acc[i];
        let a = &mut acc[parent];
        a.0 += n + 1;
        a.1 = a.1.max(h + 1);
        a.2 += c * (1.0 + w);
    }
    let roots: Vec<usize> = (0..tree.len()).filter(|&i| acc[i].0 > 0).collect();
    let step = roots.len().div_ceil(max.max(1)).max(1);
    roots
        .iter()
        .step_by(step)
        .map(|&i| {
            let (n, h, w) = acc[i];
            Ok((w, expected_subtree_weight(n, h as u64, 0, c)?))
        })
        .collect()
}
