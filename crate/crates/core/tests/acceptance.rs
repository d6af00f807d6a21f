//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.
//!
//! Run with `cargo test --release --test acceptance`.

mod common;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::random_tree;
use medium_core::adversary::Strategy;
use medium_core::analysis::{derive_params, subtree_weight_samples, write_check_csv};
use medium_core::blocktree::{
    compare_weight, evaluate_weight, ghost_select, longest_chain_select, medium_select,
    recursive_weight, BlockTree, WeightCoefficient, WeightPoly,
};
use medium_core::experiments::{
    check_sim_config, check_trace, run_balance_sweep, run_check_campaign, run_experiment,
    run_throughput_sweep, summarize, summary_of, write_rows, ExperimentConfig, ExperimentKind,
    Protocol, TraceChecks,
};
use medium_core::mining::ProtocolParams;
use medium_core::sim::{simulate, SimConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn root(k: u32) -> Protocol {
    Protocol::Medium(WeightCoefficient::algebraic_root(10_001_521, k).unwrap())
}

fn selector_reductions() -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    for seed in 0..1000 {
        let tree = random_tree(seed, 200);
        if medium_select(&tree, &WeightCoefficient::ghost()).unwrap() != ghost_select(&tree) {
            bad.push(format!("ghost seed {seed}"));
        }
        if medium_select(&tree, &WeightCoefficient::bitcoin()).unwrap()
            != longest_chain_select(&tree)
        {
            bad.push(format!("bitcoin seed {seed}"));
        }
    }
    let t = start.elapsed();
    outcome(
        bad.is_empty() && t < Duration::from_secs(10),
        format!(
            "1000 trees, {} mismatches {:?}, {:.2}s",
            bad.len(),
            &bad[..bad.len().min(3)],
            t.as_secs_f64()
        ),
    )
}

fn bitcoin_sufficiency() -> Outcome {
    let mut fails = 0;
    for seed in 0..1000 {
        let tree = random_tree(10_000 + seed, 49);
        let n = tree.len() as u64;
        let c = WeightCoefficient::integer(n + 1).unwrap();
        let chain = medium_select(&tree, &c).unwrap();
        if tree.depth(chain.head()).unwrap() != tree.max_depth() {
            fails += 1;
        }
    }
    outcome(
        fails == 0,
        format!("1000 trees with N <= 50, c = N + 1: {fails} heads short of the maximum depth"),
    )
}

fn weight_algebra() -> Outcome {
    let coeffs = [
        WeightCoefficient::ghost(),
        WeightCoefficient::integer(2).unwrap(),
        WeightCoefficient::algebraic_root(10_001_521, 10).unwrap(),
        WeightCoefficient::algebraic_root(10_001_521, 100).unwrap(),
        WeightCoefficient::algebraic_root(10_001_521, 100_000).unwrap(),
    ];
    let mut blocks = 0u64;
    let mut disjoint = 0u64;
    let mut widest: f64 = 0.0;
    for seed in 0..1000 {
        let tree = random_tree(20_000 + seed, 150);
        let c = &coeffs[seed as usize % coeffs.len()];
        for b in tree.blocks() {
            let rec = recursive_weight(&tree, b.id, c).unwrap();
            let enc =
                evaluate_weight(&tree.weight_poly(b.id).unwrap(), c, c.precision_hint()).unwrap();
            blocks += 1;
            if rec.hi < enc.lo_f64() || enc.hi_f64() < rec.lo {
                disjoint += 1;
            }
            let mid = enc.mid_f64();
            widest = widest
                .max(enc.relative_width())
                .max((rec.hi - rec.lo) / mid);
        }
    }
    outcome(
        disjoint == 0 && widest < 1e-12,
        format!(
            "{blocks} blocks: {disjoint} disagreements, widest relative enclosure {widest:.1e}"
        ),
    )
}

/// Subtree polynomials of depth at most 100, with every fourth one a copy
/// of an earlier polynomial.
fn sample_polys(count: usize) -> Vec<WeightPoly> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut out: Vec<WeightPoly> = Vec::new();
    let mut seed = 30_000;
    while out.len() < count {
        if out.len() % 4 == 3 {
            let k = rng.gen_range(0..out.len());
            out.push(out[k].clone());
            continue;
        }
        let tree: BlockTree = random_tree(seed, 300);
        seed += 1;
        let ids: Vec<_> = tree.blocks().map(|b| b.id).collect();
        let b = ids[rng.gen_range(0..ids.len())];
        let p = tree.weight_poly(b).unwrap();
        if p.degree() <= 100 {
            out.push(p);
        }
    }
    out
}

fn exact_comparison() -> Outcome {
    let c = WeightCoefficient::algebraic_root(10_001_521, 100).unwrap();
    let polys = sample_polys(200);
    let (mut pairs, mut equal, mut wrong) = (0u64, 0u64, 0u64);
    for i in 0..polys.len() {
        for j in i + 1..polys.len() {
            let ord = compare_weight(&polys[i], &polys[j], &c).unwrap();
            pairs += 1;
            let same = polys[i].coeffs() == polys[j].coeffs();
            equal += u64::from(same);
            if (ord == Ordering::Equal) != same {
                wrong += 1;
            }
        }
    }
    outcome(
        wrong == 0,
        format!("{pairs} pairs, {equal} identical, {wrong} wrong"),
    )
}

/// Property reports of 20 secret-chain traces at c = 10001521^(1/100).
fn check_traces() -> (f64, Vec<TraceChecks>) {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Check);
    let protocol = root(100);
    cfg.protocols = vec![protocol.clone()];
    let params = cfg.params_for(cfg.params.t, None);
    let derived = derive_params(&params, &protocol.coefficient()).unwrap();
    let checks = (0..20u64)
        .into_par_iter()
        .map(|seed| {
            let trace =
                simulate(&check_sim_config(&cfg, &params, &protocol, &derived, seed)).unwrap();
            check_trace(&trace, &derived, cfg.growth_window, cfg.max_tracked).unwrap()
        })
        .collect();
    (derived.g, checks)
}

fn typical_and_bounds(g: f64, checks: &[TraceChecks]) -> Outcome {
    let windows: u64 = checks.iter().map(|c| c.typical.windows).sum();
    let typical: u64 = checks.iter().map(|c| c.typical.typical_windows).sum();
    let frac = typical as f64 / windows as f64;
    let typical_traces: Vec<&TraceChecks> =
        checks.iter().filter(|c| c.typical.is_typical()).collect();
    let released: u64 = typical_traces
        .iter()
        .map(|c| c.sandwich.released.violations)
        .sum();
    let mined: u64 = typical_traces
        .iter()
        .map(|c| c.sandwich.mined_violations)
        .sum();
    let sandwich_windows: u64 = typical_traces.iter().map(|c| c.sandwich.windows).sum();
    let growth: u64 = checks.iter().map(|c| c.chain_growth.violations).sum();
    let growth_checked: u64 = checks.iter().map(|c| c.chain_growth.checked).sum();
    outcome(
        frac >= 0.9 && released == 0 && growth == 0,
        format!(
            "{:.4}% of {windows} windows typical, {} of {} traces fully typical; sandwich on typical traces: \
             {released} violations with released Z, {mined} with mined Z over {sandwich_windows} windows; \
             chain growth g = {g:.4}: {growth} violations in {growth_checked} checks",
            100.0 * frac,
            typical_traces.len(),
            checks.len()
        ),
    )
}

fn prefix_persistence_liveness(checks: &[TraceChecks]) -> Outcome {
    let cp: u64 = checks.iter().map(|c| c.common_prefix.violations).sum();
    let cp_checked: u64 = checks.iter().map(|c| c.common_prefix.checked).sum();
    let pers: u64 = checks.iter().map(|c| c.ledger.persistence.violations).sum();
    let live: u64 = checks
        .iter()
        .map(|c| c.ledger.liveness.report.violations)
        .sum();
    let eligible: u64 = checks.iter().map(|c| c.ledger.liveness.eligible).sum();
    let on_time: u64 = checks.iter().map(|c| c.ledger.liveness.on_time).sum();
    let settled: u64 = checks.iter().map(|c| c.ledger.liveness.settled).sum();
    let total: u64 = checks.iter().map(|c| c.ledger.liveness.total).sum();
    outcome(
        cp == 0 && pers == 0 && live == 0 && on_time == eligible,
        format!(
            "common prefix {cp} violations in {cp_checked} checks; persistence {pers} violations; \
             liveness {on_time} of {eligible} eligible transactions on time, {settled} of {total} settled"
        ),
    )
}

fn throughput_ordering() -> Outcome {
    let start = Instant::now();
    let mut cfg = ExperimentConfig::new(ExperimentKind::Throughput {
        t_values: vec![10, 15, 20, 25, 30, 35, 40],
    });
    let order = [
        Protocol::Ghost,
        root(100_000),
        root(100),
        root(10),
        Protocol::Bitcoin,
    ];
    cfg.protocols = order.to_vec();
    let rows = run_throughput_sweep(&cfg).unwrap();
    let s = summarize(&rows);
    let tol = 0.05;
    let mut bad = Vec::new();
    let mut table = Vec::new();
    for t in [10u32, 15, 20, 25, 30, 35, 40] {
        let m: Vec<f64> = order
            .iter()
            .map(|p| {
                summary_of(&s, &p.label(), t as f64, "honest_fraction")
                    .unwrap()
                    .mean
            })
            .collect();
        let (ghost, m_1, m_11, m_5, btc) = (m[0], m[1], m[2], m[3], m[4]);
        for (name, hi, lo) in [
            ("GHOST >= M(1.17)", ghost, m_11),
            ("M(1.17) >= M(5)", m_11, m_5),
            ("M(5) >= Bitcoin", m_5, btc),
            ("M(1.0002) >= M(1.17)", m_1, m_11),
        ] {
            if hi + tol < lo {
                bad.push(format!("t={t}: {name} ({hi:.3} vs {lo:.3})"));
            }
        }
        table.push(format!(
            "t={t} {}",
            m.iter()
                .map(|x| format!("{x:.3}"))
                .collect::<Vec<_>>()
                .join("/")
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        bad.is_empty() && secs < 600.0,
        format!(
            "100 reps, GHOST/M(1.0002)/M(1.17)/M(5)/Bitcoin: {}; {} violations {:?}; {secs:.0}s",
            table.join(", "),
            bad.len(),
            bad
        ),
    )
}

fn balance_attack() -> Outcome {
    let start = Instant::now();
    let mut cfg = ExperimentConfig::new(ExperimentKind::Balance {
        pqn_values: vec![0.5, 1.0, 2.0, 4.0],
        tau: 100,
    });
    cfg.protocols = vec![Protocol::Ghost, root(10)];
    let rows = run_balance_sweep(&cfg).unwrap();
    let mut runs: BTreeMap<(String, u64, u64), BTreeMap<String, f64>> = BTreeMap::new();
    for r in &rows {
        runs.entry((r.protocol.clone(), r.var.to_bits(), r.seed))
            .or_default()
            .insert(r.metric.clone(), r.value);
    }
    let mut over_bound = 0;
    let mut typical_runs = 0;
    for m in runs.values() {
        if m["typical"] == 1.0 {
            typical_runs += 1;
            match m.get("fork_duration") {
                Some(d) if *d <= m["bound"] => {}
                _ => over_bound += 1,
            }
        }
    }
    let mean = |protocol: &str, pqn: f64| {
        let d: Vec<f64> = runs
            .iter()
            .filter(|((p, v, _), _)| p == protocol && f64::from_bits(*v) == pqn)
            .map(|(_, m)| m.get("fork_duration").copied().unwrap_or(f64::INFINITY))
            .collect();
        d.iter().sum::<f64>() / d.len() as f64
    };
    let mut ratio_ok = true;
    let mut table = Vec::new();
    for pqn in [0.5, 1.0, 2.0, 4.0] {
        let (g, m) = (mean("GHOST", pqn), mean(&root(10).label(), pqn));
        ratio_ok &= m <= 0.5 * g;
        table.push(format!("pqn={pqn}: GHOST {g:.2}, M(5) {m:.2}"));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        ratio_ok && over_bound == 0 && secs < 900.0,
        format!(
            "50 seeds, tau = 100; mean fork duration {}; {over_bound} of {typical_runs} typical runs over the bound; {secs:.1}s",
            table.join(", ")
        ),
    )
}

fn expected_subtree_weight() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for k in [100_000, 100, 10] {
        let protocol = root(k);
        let params = ProtocolParams {
            t: 0,
            ..Default::default()
        };
        let mut samples = Vec::new();
        let mut seed = 0;
        while samples.len() < 1000 {
            let mut cfg = SimConfig::new(params.clone(), protocol.coefficient(), Strategy::None);
            cfg.rounds = 300;
            cfg.seed = seed;
            seed += 1;
            let trace = simulate(&cfg).unwrap();
            samples.extend(subtree_weight_samples(&trace, 100).unwrap());
        }
        samples.truncate(1000);
        let ratio = samples.iter().map(|(o, e)| o / e).sum::<f64>() / samples.len() as f64;
        pass &= (ratio - 1.0).abs() <= 0.1;
        parts.push(format!(
            "{}: mean observed/expected {ratio:.4}",
            protocol.label()
        ));
    }
    outcome(
        pass,
        format!("1000 honest subtrees each; {}", parts.join(", ")),
    )
}

fn determinism() -> Outcome {
    let small = |kind: ExperimentKind, reps: u32, rounds: u64| {
        let mut cfg = ExperimentConfig::new(kind);
        cfg.repetitions = reps;
        cfg.rounds = rounds;
        cfg.seed = 42;
        cfg
    };
    let configs = [
        small(
            ExperimentKind::Throughput {
                t_values: vec![10, 30],
            },
            4,
            1000,
        ),
        small(
            ExperimentKind::Balance {
                pqn_values: vec![1.0, 4.0],
                tau: 100,
            },
            4,
            3000,
        ),
        small(ExperimentKind::Single, 3, 1000),
        small(ExperimentKind::Params, 1, 1),
    ];
    let bytes = |cfg: &ExperimentConfig| {
        let mut out = Vec::new();
        write_rows(&mut out, &run_experiment(cfg).unwrap()).unwrap();
        out
    };
    let mut differing = Vec::new();
    let mut total = 0;
    for cfg in &configs {
        let (a, b) = (bytes(cfg), bytes(cfg));
        total += a.len();
        if a != b {
            differing.push(cfg.kind.name());
        }
    }
    let mut check = small(ExperimentKind::Check, 2, 1500);
    check.protocols = vec![root(100)];
    let campaign = |cfg: &ExperimentConfig| {
        let mut out = Vec::new();
        write_check_csv(&mut out, &run_check_campaign(cfg).unwrap()).unwrap();
        out
    };
    let (a, b) = (campaign(&check), campaign(&check));
    total += a.len();
    if a != b {
        differing.push("check");
    }
    outcome(
        differing.is_empty(),
        format!("5 experiment kinds rerun, {total} CSV bytes, differing: {differing:?}"),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Outcome, f64)> = Vec::new();
    let mut run = |name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        let secs = start.elapsed().as_secs_f64();
        println!(
            "{} {name}: {} [{secs:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        results.push((name, o, secs));
    };
    run("selector reductions", &mut selector_reductions);
    run("bitcoin-limit sufficiency", &mut bitcoin_sufficiency);
    run("weight algebra", &mut weight_algebra);
    run("exact comparison", &mut exact_comparison);
    let start = Instant::now();
    let (g, checks) = check_traces();
    println!(
        "(20 property-check traces of 10000 rounds built in {:.1}s)",
        start.elapsed().as_secs_f64()
    );
    run("typical execution and bounds", &mut || {
        typical_and_bounds(g, &checks)
    });
    run("common prefix, persistence, liveness", &mut || {
        prefix_persistence_liveness(&checks)
    });
    run("throughput ordering", &mut throughput_ordering);
    run("balance attack", &mut balance_attack);
    run("expected subtree weight", &mut expected_subtree_weight);
    run("determinism", &mut determinism);
    let failed = results.iter().filter(|r| !r.1.pass).count();
    println!(
        "acceptance: {} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
