use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use super::counters::{Counters, Window};
use super::lineage::Lineage;
use super::metrics::heads_at;
use super::AnalysisError;
use crate::blocktree::{compare_weight_with, BlockId, Exactness, TxId, WeightPoly};
use crate::sim::SimTrace;

/// Violations kept verbatim in a report; the rest are only counted.
const KEEP: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub round: u64,
    pub detail: String,
}

/// Outcome of one property check.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PropertyReport {
    pub checked: u64,
    pub violations: u64,
    pub first_violation_round: Option<u64>,
    pub examples: Vec<Violation>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    fn violate(&mut self, round: u64, detail: impl FnOnce() -> String) {
        self.violations += 1;
        self.first_violation_round =
            Some(self.first_violation_round.map_or(round, |r| r.min(round)));
        if self.examples.len() < KEEP {
            self.examples.push(Violation {
                round,
                detail: detail(),
            });
        }
    }

    pub fn summary(&self) -> String {
        match self.examples.first() {
            Some(v) => format!(
                "{} of {} checks failed; first: {}",
                self.violations, self.checked, v.detail
            ),
            None => format!("{} checks", self.checked),
        }
    }
}

fn require_full(trace: &SimTrace) -> Result<(), AnalysisError> {
    if trace.heads.len() as u64 != trace.rounds {
        return Err(AnalysisError::NeedsFullRecord);
    }
    Ok(())
}

/// Common ancestor of all heads for rounds `1..=rounds + 1` (index `r - 1`).
fn round_lcas(trace: &SimTrace, lin: &Lineage) -> Vec<BlockId> {
    (1..=trace.rounds + 1)
        .map(|r| lin.lca_all(heads_at(trace, r)))
        .collect()
}

/// `out[i]` is the common ancestor of `m[i..]`.
fn suffix_lcas(lin: &Lineage, m: &[BlockId]) -> Vec<BlockId> {
    let mut out = m.to_vec();
    for i in (0..m.len().saturating_sub(1)).rev() {
        out[i] = lin.lca(m[i], out[i + 1]);
    }
    out
}

fn stable_at(trace: &SimTrace, r: u64) -> &[BlockId] {
    if r as usize <= trace.stable.len() {
        &trace.stable[r as usize - 1]
    } else {
        &trace.final_stable
    }
}

/// Evenly spaced picks of at most `max` items.
fn spread<T: Copy>(items: &[T], max: usize) -> Vec<T> {
    if items.len() <= max || max == 0 {
        return items.to_vec();
    }
    (0..max).map(|k| items[k * items.len() / max]).collect()
}

/// Main-chain length of every honest party is at least `g·r` after each
/// round `r ≥ r0`.
pub fn chain_growth_check(
    trace: &SimTrace,
    g: f64,
    r0: u64,
) -> Result<PropertyReport, AnalysisError> {
    require_full(trace)?;
    let mut rep = PropertyReport::default();
    for r in r0.max(1)..=trace.rounds {
        let heads = heads_at(trace, r + 1);
        let bound = g * r as f64;
        for (k, &h) in heads.iter().enumerate() {
            rep.checked += 1;
            let len = trace.tree.depth(h)?;
            if (len as f64) < bound {
                rep.violate(r, || {
                    format!(
                        "party {} has length {len} < {bound:.3} after round {r}",
                        trace.honest[k]
                    )
                });
            }
        }
    }
    Ok(rep)
}

/// The stable prefix any honest party holds at round `r1` lies on the
/// chain of every honest party at every round `r2 ≥ r1`. The prefix
/// threshold is the one the trace was recorded with.
pub fn common_prefix_check(trace: &SimTrace) -> Result<PropertyReport, AnalysisError> {
    require_full(trace)?;
    if trace.stability.is_none() || trace.stable.len() as u64 != trace.rounds {
        return Err(AnalysisError::NeedsStability);
    }
    let lin = Lineage::new(&trace.tree);
    let m = round_lcas(trace, &lin);
    let sl = suffix_lcas(&lin, &m);
    let mut seen = HashSet::new();
    let mut rep = PropertyReport::default();
    for r in 1..=trace.rounds + 1 {
        for (k, &s) in stable_at(trace, r).iter().enumerate() {
            if !seen.insert(s) {
                continue;
            }
            rep.checked += 1;
            if lin.is_ancestor(s, sl[r as usize - 1]) {
                continue;
            }
            let r2 = (r..=trace.rounds + 1)
                .find(|&x| !lin.is_ancestor(s, m[x as usize - 1]))
                .unwrap();
            let heads = heads_at(trace, r2);
            let (j, &h) = heads
                .iter()
                .enumerate()
                .find(|(_, &h)| !lin.is_ancestor(s, h))
                .unwrap();
            let split = lin.depth(lin.lca(s, h));
            let diverging = lin.ancestor_at(s, split + 1);
            rep.violate(r2, || {
                format!(
                    "stable block {s} of party {} at round {r} is not on the chain of party {} at round {r2}; diverges at {diverging}",
                    trace.honest[k], trace.honest[j]
                )
            });
        }
    }
    Ok(rep)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LivenessReport {
    /// Transactions whose `u`-round window ends inside the trace.
    pub eligible: u64,
    /// Eligible transactions stable for every honest party by the deadline.
    pub on_time: u64,
    /// Transactions inside the common stable prefix by the end of the run.
    pub settled: u64,
    pub total: u64,
    /// Rounds from injection to entering the common stable prefix.
    pub max_latency: Option<u64>,
    pub mean_latency: Option<f64>,
    pub report: PropertyReport,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LedgerReport {
    pub persistence: PropertyReport,
    pub liveness: LivenessReport,
}

/// Persistence: every stable prefix reported by any honest party in any
/// round agrees with all earlier ones, so a stable transaction keeps its
/// position. Liveness: a transaction offered to all honest parties for `u`
/// rounds is stable for all of them when those rounds end.
pub fn ledger_checks(trace: &SimTrace, u: u64) -> Result<LedgerReport, AnalysisError> {
    require_full(trace)?;
    if trace.stability.is_none() || trace.stable.len() as u64 != trace.rounds {
        return Err(AnalysisError::NeedsStability);
    }
    let lin = Lineage::new(&trace.tree);
    let last = trace.rounds + 1;

    let mut persistence = PropertyReport::default();
    let mut canon = vec![trace.tree.genesis()];
    for r in 1..=last {
        for (k, &s) in stable_at(trace, r).iter().enumerate() {
            persistence.checked += 1;
            let ds = lin.depth(s) as usize;
            let top = canon.len() - 1;
            if ds <= top {
                if canon[ds] != s {
                    let split = lin.depth(lin.lca(s, canon[ds]));
                    persistence.violate(r, || {
                        format!(
                            "party {} reports {} stable at depth {}, where {} was stable before",
                            trace.honest[k],
                            lin.ancestor_at(s, split + 1),
                            split + 1,
                            canon[split as usize + 1]
                        )
                    });
                }
                continue;
            }
            if lin.ancestor_at(s, top as u32) != canon[top] {
                let split = lin.depth(lin.lca(s, canon[top]));
                persistence.violate(r, || {
                    format!(
                        "party {} reports {} stable at depth {}, where {} was stable before",
                        trace.honest[k],
                        lin.ancestor_at(s, split + 1),
                        split + 1,
                        canon[split as usize + 1]
                    )
                });
                continue;
            }
            for d in top + 1..=ds {
                canon.push(lin.ancestor_at(s, d as u32));
            }
        }
    }

    let mut inclusions: HashMap<TxId, Vec<BlockId>> = HashMap::new();
    for b in trace.tree.blocks() {
        for &t in &b.payload {
            inclusions.entry(t).or_default().push(b.id);
        }
    }
    let common: Vec<BlockId> = (1..=last)
        .map(|r| lin.lca_all(stable_at(trace, r)))
        .collect();
    let mut live = LivenessReport {
        total: trace.txs.len() as u64,
        ..Default::default()
    };
    let mut latencies = Vec::new();
    let none = Vec::new();
    for tx in &trace.txs {
        let blocks = inclusions.get(&tx.id).unwrap_or(&none);
        let in_chain = |s: BlockId| blocks.iter().any(|&b| lin.is_ancestor(b, s));
        if let Some(r) = (tx.injected.max(1)..=last).find(|&r| in_chain(common[r as usize - 1])) {
            live.settled += 1;
            latencies.push(r - tx.injected);
        }
        let deadline = tx.injected + u;
        if deadline > last {
            continue;
        }
        live.eligible += 1;
        live.report.checked += 1;
        let stable = stable_at(trace, deadline);
        match stable.iter().position(|&s| !in_chain(s)) {
            None => live.on_time += 1,
            Some(k) => live.report.violate(deadline, || {
                format!(
                    "tx {} injected at round {} is not stable for party {} at round {deadline}",
                    tx.id.0, tx.injected, trace.honest[k]
                )
            }),
        }
    }
    live.max_latency = latencies.iter().copied().max();
    if !latencies.is_empty() {
        live.mean_latency = Some(latencies.iter().sum::<u64>() as f64 / latencies.len() as f64);
    }
    Ok(LedgerReport {
        persistence,
        liveness: live,
    })
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FreshBlockReport {
    /// `(block, mined round, round from which it is on every honest chain
    /// for good)`, genesis first.
    pub latencies: Vec<(BlockId, u64, u64)>,
    /// Longest run of rounds without a mined block that ends up permanent.
    pub max_gap: u64,
    pub report: PropertyReport,
}

/// Every window of `u` consecutive rounds contains the mining round of an
/// honest block that, from some round on, stays on the main chain of every
/// honest party until the end of the trace.
pub fn fresh_block_check(trace: &SimTrace, u: u64) -> Result<FreshBlockReport, AnalysisError> {
    require_full(trace)?;
    let lin = Lineage::new(&trace.tree);
    let sl = suffix_lcas(&lin, &round_lcas(trace, &lin));
    let settled_tip = *sl.last().unwrap();
    let mut out = FreshBlockReport {
        latencies: vec![(trace.tree.genesis(), 0, 0)],
        ..Default::default()
    };
    for b in trace.tree.blocks() {
        if !b.miner.is_honest() || !lin.is_ancestor(b.id, settled_tip) {
            continue;
        }
        let d = lin.depth(b.id);
        let from = b.round as usize;
        // sl is a chain of ancestors growing with the round index
        let k = from + sl[from..].partition_point(|&x| lin.depth(x) < d);
        out.latencies.push((b.id, b.round, k as u64 + 1));
    }
    out.latencies.sort_by_key(|x| (x.1, x.0));
    let mut mined: Vec<u64> = out.latencies.iter().map(|x| x.1).collect();
    mined.push(trace.rounds + 1);
    mined.dedup();
    for pair in mined.windows(2) {
        let gap = pair[1] - pair[0] - 1;
        out.max_gap = out.max_gap.max(gap);
    }
    let mut a = 1;
    for &m in mined.iter().skip(1) {
        // rounds a..m-1 hold no permanent block
        let run = m - a;
        out.report.checked += 1;
        if u > 0 && run >= u {
            out.report.violate(a + u - 1, || {
                format!(
                    "no permanent honest block mined in rounds {a}..={}",
                    a + u - 1
                )
            });
        }
        a = m + 1;
    }
    Ok(out)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct WeightGrowthReport {
    pub tracked: u64,
    /// Windows where even the least favourable view grew enough.
    pub passed: u64,
    /// Windows the first-seen bounds cannot decide.
    pub undecided: u64,
    /// Definite violations: no honest view grew enough.
    pub report: PropertyReport,
}

/// Normalized subtree weight of tracked honest main-chain blocks grows by at
/// least `Σ_{i=1}^{levels} c^i` over every `s`-round window during which the
/// block stays on every honest main chain. Per-party views are bracketed by
/// the blocks every honest party held and the blocks some honest party held.
pub fn weight_growth_check(
    trace: &SimTrace,
    levels: u64,
    s: u64,
    max_tracked: usize,
) -> Result<WeightGrowthReport, AnalysisError> {
    require_full(trace)?;
    if trace.coeff.is_limit() {
        return Err(AnalysisError::LimitCoefficient);
    }
    if s == 0 {
        return Err(AnalysisError::Argument("window length 0".into()));
    }
    let lin = Lineage::new(&trace.tree);
    let m = round_lcas(trace, &lin);
    let candidates: Vec<BlockId> = trace
        .final_chain()
        .into_iter()
        .filter(|&b| trace.is_honest_block(b))
        .collect();
    let tracked = spread(&candidates, max_tracked);
    let mut tau = vec![1u64; levels as usize + 1];
    tau[0] = 0;
    let tau = WeightPoly::new(tau);
    let exact = Exactness::numeric();
    let last = trace.rounds + 1;
    let mut out = WeightGrowthReport {
        tracked: tracked.len() as u64,
        ..Default::default()
    };
    for &b in &tracked {
        let db = lin.depth(b);
        let sub: Vec<(usize, u64, u64)> = trace
            .tree
            .blocks()
            .filter(|x| lin.depth(x.id) >= db && lin.is_ancestor(b, x.id))
            .map(|x| {
                let i = x.id.0 as usize;
                let all = trace.first_seen_all[i].unwrap_or(u64::MAX);
                let any = trace.first_seen_any[i].unwrap_or(u64::MAX);
                ((lin.depth(x.id) - db) as usize, all, any)
            })
            .collect();
        let poly = |r: u64, pick: fn(&(usize, u64, u64)) -> u64| {
            let mut c = vec![0u64; sub.iter().map(|x| x.0).max().unwrap_or(0) + 1];
            for x in &sub {
                if pick(x) <= r {
                    c[x.0] += 1;
                }
            }
            WeightPoly::new(c)
        };
        let mined = trace.block(b).round;
        let mut r = mined + 1;
        while r + s <= last {
            let end = r + s;
            if !(r..=end).all(|x| lin.is_ancestor(b, m[x as usize - 1])) {
                r += s;
                continue;
            }
            out.report.checked += 1;
            let min_end = poly(end, |x| x.1);
            let max_start = poly(r, |x| x.2);
            if compare_weight_with(&min_end, &max_start.add(&tau), &trace.coeff, exact)?
                != Ordering::Less
            {
                out.passed += 1;
            } else {
                let max_end = poly(end, |x| x.2);
                let min_start = poly(r, |x| x.1);
                if compare_weight_with(&max_end, &min_start.add(&tau), &trace.coeff, exact)?
                    == Ordering::Less
                {
                    out.report.violate(end, || {
                        format!("subtree of {b} grew less than tau over rounds {r}..{end}")
                    });
                } else {
                    out.undecided += 1;
                }
            }
            r += s;
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SandwichReport {
    pub tracked: u64,
    pub windows: u64,
    /// `Y(S) - Ẑ(S) ≤ l(S) ≤ X̃(S) + Ẑ(S)` with `Ẑ` the corrupted blocks
    /// released inside `S`.
    pub released: PropertyReport,
    /// Windows violating the same bounds with `Z(S)`, the corrupted blocks
    /// mined inside `S`.
    pub mined_violations: u64,
}

/// Length-increase bounds for tracked honest blocks `B0` (genesis and
/// honest blocks of the final chain): for every window `S` starting right
/// after `B0` was mined during which `B0` stays on every honest main chain,
/// the change of each party's main-chain length between the start of `S`
/// and the start of the round after `S` lies within
/// `[Y(S) - Ẑ(S), X̃(S) + Ẑ(S)]`.
pub fn length_sandwich_check(
    trace: &SimTrace,
    max_tracked: usize,
) -> Result<SandwichReport, AnalysisError> {
    require_full(trace)?;
    let lin = Lineage::new(&trace.tree);
    let m = round_lcas(trace, &lin);
    let counters = Counters::new(&trace.stats);
    let last = trace.rounds + 1;
    let lens: Vec<Vec<u32>> = (1..=last)
        .map(|r| heads_at(trace, r).iter().map(|&h| lin.depth(h)).collect())
        .collect();
    let mut candidates = vec![trace.tree.genesis()];
    candidates.extend(
        trace
            .final_chain()
            .into_iter()
            .filter(|&b| trace.is_honest_block(b)),
    );
    let tracked = spread(&candidates, max_tracked);
    let mut out = SandwichReport {
        tracked: tracked.len() as u64,
        ..Default::default()
    };
    for &b in &tracked {
        let r0 = trace.block(b).round;
        let start = r0 + 1;
        if start > trace.rounds || !lin.is_ancestor(b, m[start as usize - 1]) {
            continue;
        }
        let base = &lens[start as usize - 1];
        for e in start..=trace.rounds {
            if !lin.is_ancestor(b, m[e as usize]) {
                break;
            }
            let now = &lens[e as usize];
            let (mut lo, mut hi) = (i64::MAX, i64::MIN);
            for (a, z) in base.iter().zip(now) {
                let l = *z as i64 - *a as i64;
                lo = lo.min(l);
                hi = hi.max(l);
            }
            let w = counters.get(Window::new(start, e));
            let (y, xt) = (w.y as i64, w.x_tilde as i64);
            let (zr, zm) = (w.z_released as i64, w.z as i64);
            out.windows += 1;
            out.released.checked += 1;
            if lo < y - zr || hi > xt + zr {
                out.released.violate(e, || {
                    format!(
                        "block {b}, rounds {start}..={e}: length change in [{lo}, {hi}], bounds [{}, {}]",
                        y - zr,
                        xt + zr
                    )
                });
            }
            if lo < y - zm || hi > xt + zm {
                out.mined_violations += 1;
            }
        }
    }
    Ok(out)
}

/// In every round with an honest success, when nothing but honest traffic
/// was delivered at the end of the previous round and no partition is in
/// force, the broadcast tree's main chain grows by exactly one block
/// through this round's honest blocks.
pub fn honest_node_mining_check(trace: &SimTrace) -> Result<PropertyReport, AnalysisError> {
    if trace.public_lengths.len() as u64 != trace.rounds {
        return Err(AnalysisError::NeedsPublicLengths);
    }
    let skip_until = trace.partition.map_or(0, |tau| tau + 1);
    let mut rep = PropertyReport::default();
    for r in 1..=trace.rounds {
        let i = r as usize - 1;
        if trace.stats[i].x == 0
            || r <= skip_until
            || (r >= 2 && trace.stats[i - 1].adversary_delivered)
        {
            continue;
        }
        rep.checked += 1;
        let (before, after) = trace.public_lengths[i];
        if after != before + 1 {
            rep.violate(r, || format!("round {r}: main chain {before} -> {after}"));
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::Strategy;
    use crate::blocktree::{PrefixMode, WeightCoefficient};
    use crate::mining::ProtocolParams;
    use crate::sim::{simulate, Record, SimConfig};

    fn run(n: u32, t: u32, p: f64, strategy: Strategy, rounds: u64, seed: u64) -> SimTrace {
        let params = ProtocolParams {
            n,
            t,
            p,
            q: 1,
            epsilon: 0.5,
            lambda: 20,
            ..Default::default()
        };
        let mut cfg = SimConfig::new(params, WeightCoefficient::integer(2).unwrap(), strategy);
        cfg.rounds = rounds;
        cfg.seed = seed;
        cfg.record = Record::Full;
        cfg.track_public = true;
        cfg.tx_every = Some(5);
        cfg.stability = Some((30.0, PrefixMode::Normalized));
        simulate(&cfg).unwrap()
    }

    #[test]
    fn certain_mining_grows_at_rate_one() {
        let tr = run(1, 0, 1.0, Strategy::None, 50, 0);
        assert!(chain_growth_check(&tr, 1.0, 1).unwrap().passed());
        let rep = chain_growth_check(&tr, 1.01, 1).unwrap();
        assert_eq!(rep.violations, 50);
    }

    #[test]
    fn single_party_has_a_common_prefix() {
        let tr = run(1, 0, 0.3, Strategy::None, 300, 1);
        let rep = common_prefix_check(&tr).unwrap();
        assert!(rep.passed() && rep.checked > 0);
        let l = ledger_checks(&tr, 80).unwrap();
        assert!(l.persistence.passed());
        assert_eq!(l.liveness.on_time, l.liveness.eligible);
    }

    #[test]
    fn zero_threshold_exposes_same_round_forks() {
        let params = ProtocolParams {
            n: 10,
            t: 0,
            p: 0.15,
            q: 1,
            lambda: 20,
            ..Default::default()
        };
        let mut cfg = SimConfig::new(
            params,
            WeightCoefficient::integer(2).unwrap(),
            Strategy::None,
        );
        cfg.rounds = 300;
        cfg.record = Record::Full;
        cfg.stability = Some((0.0, PrefixMode::Normalized));
        let tr = simulate(&cfg).unwrap();
        let forks = tr
            .heads
            .iter()
            .filter(|h| h.iter().any(|&x| x != h[0]))
            .count();
        let rep = common_prefix_check(&tr).unwrap();
        assert!(forks > 0);
        assert!(!rep.passed());
        // a violation needs a round whose heads disagree
        for v in &rep.examples {
            let h = heads_at(&tr, v.round);
            assert!(h.iter().any(|&x| x != h[0]), "{}", v.detail);
        }
    }

    #[test]
    fn honest_runs_keep_the_ledger() {
        for seed in 0..3 {
            let tr = run(10, 0, 0.05, Strategy::None, 1500, seed);
            assert!(common_prefix_check(&tr).unwrap().passed());
            let l = ledger_checks(&tr, 200).unwrap();
            assert!(l.persistence.passed(), "{}", l.persistence.summary());
            assert!(l.liveness.eligible > 0);
            assert_eq!(
                l.liveness.on_time,
                l.liveness.eligible,
                "{}",
                l.liveness.report.summary()
            );
            let f = fresh_block_check(&tr, 200).unwrap();
            assert!(f.report.passed());
            assert_eq!(f.latencies[0], (tr.tree.genesis(), 0, 0));
            assert!(f
                .latencies
                .iter()
                .all(|&(_, mined, settled)| settled > mined || mined == 0));
        }
    }

    #[test]
    fn fresh_block_gap_detected() {
        let tr = run(4, 0, 0.01, Strategy::None, 2000, 5);
        let f = fresh_block_check(&tr, 5).unwrap();
        assert!(f.max_gap >= 5);
        assert!(!f.report.passed());
        assert!(fresh_block_check(&tr, f.max_gap + 1)
            .unwrap()
            .report
            .passed());
    }

    #[test]
    fn sandwich_holds_without_adversary_releases() {
        for seed in 0..3 {
            let tr = run(10, 0, 0.08, Strategy::None, 800, seed);
            let rep = length_sandwich_check(&tr, 50).unwrap();
            assert!(rep.windows > 0);
            assert!(rep.released.passed(), "{}", rep.released.summary());
        }
    }

    #[test]
    fn honest_node_mining_in_quiet_rounds() {
        let tr = run(10, 2, 0.08, Strategy::SecretChain { withhold: 4 }, 800, 2);
        let rep = honest_node_mining_check(&tr).unwrap();
        assert!(rep.checked > 0);
        assert!(rep.passed(), "{}", rep.summary());
    }

    #[test]
    fn weight_growth_on_a_single_chain() {
        let tr = run(1, 0, 1.0, Strategy::None, 60, 0);
        let rep = weight_growth_check(&tr, 9, 10, 10).unwrap();
        assert!(rep.report.checked > 0);
        assert_eq!(rep.report.violations, 0, "{:?}", rep.report.examples);
        // a single party sees its block one round after mining, so ten rounds add ten levels
        assert_eq!(rep.passed, rep.report.checked);
        // eleven levels outgrow the first window of each block, later windows add deeper levels
        let rep = weight_growth_check(&tr, 11, 10, 10).unwrap();
        assert!(rep.report.violations > 0 && rep.report.violations <= rep.tracked);
        assert_eq!(rep.passed + rep.report.violations, rep.report.checked);
    }

    #[test]
    fn checks_need_recorded_state() {
        let params = ProtocolParams {
            n: 3,
            t: 0,
            p: 0.3,
            q: 1,
            lambda: 20,
            ..Default::default()
        };
        let tr = simulate(&SimConfig::new(
            params,
            WeightCoefficient::ghost(),
            Strategy::None,
        ))
        .unwrap();
        assert!(matches!(
            common_prefix_check(&tr),
            Err(AnalysisError::NeedsFullRecord)
        ));
        assert!(matches!(
            honest_node_mining_check(&tr),
            Err(AnalysisError::NeedsPublicLengths)
        ));
    }
}
