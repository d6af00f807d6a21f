//! Sweeps, property-check campaigns and their CSV output.

mod config;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use thiserror::Error;

pub use config::{ExperimentConfig, ExperimentKind, Protocol, DEFAULT_PRIME};

use crate::adversary::Strategy;
use crate::analysis::{
    balance_bound, chain_growth_check, common_prefix_check, derive_params, fresh_block_check,
    growth_levels, honest_node_mining_check, ledger_checks, length_sandwich_check, params_digest,
    throughput_metrics, typical_execution_check, weight_growth_check, AnalysisError, CheckRecord,
    DerivedParams, FreshBlockReport, LedgerReport, PropertyReport, SandwichReport, TypicalOptions,
    TypicalReport, WeightGrowthReport,
};
use crate::blocktree::PrefixMode;
use crate::mining::{derived_rates, ProtocolParams};
use crate::sim::{simulate, Record, SimConfig, SimError, SimTrace};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One CSV row: `experiment,protocol,c,var,seed,metric,value`.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub protocol: String,
    pub c: String,
    pub var: f64,
    pub seed: u64,
    pub metric: String,
    pub value: f64,
}

pub const CSV_HEADER: [&str; 7] = [
    "experiment",
    "protocol",
    "c",
    "var",
    "seed",
    "metric",
    "value",
];

pub fn write_rows<W: Write>(writer: W, rows: &[ResultRow]) -> Result<(), ExperimentError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.experiment.as_str(),
            &r.protocol,
            &r.c,
            &number(r.var),
            &r.seed.to_string(),
            &r.metric,
            &number(r.value),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Shortest round-trip form, in exponent notation outside `[1e-5, 1e16)`.
fn number(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

pub fn read_rows<R: std::io::Read>(reader: R) -> Result<Vec<ResultRow>, ExperimentError> {
    let mut rd = csv::Reader::from_reader(reader);
    if rd.headers()?.iter().ne(CSV_HEADER) {
        return Err(ExperimentError::Config(format!(
            "unexpected header {:?}",
            rd.headers()?
        )));
    }
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64, ExperimentError> {
            rec[i]
                .parse()
                .map_err(|e| ExperimentError::Config(format!("column {}: {e}", CSV_HEADER[i])))
        };
        rows.push(ResultRow {
            experiment: rec[0].to_string(),
            protocol: rec[1].to_string(),
            c: rec[2].to_string(),
            var: num(3)?,
            seed: rec[4]
                .parse()
                .map_err(|e| ExperimentError::Config(format!("column seed: {e}")))?,
            metric: rec[5].to_string(),
            value: num(6)?,
        });
    }
    Ok(rows)
}

/// Mean, spread and extremes of one metric over seeds.
#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub protocol: String,
    pub var: f64,
    pub metric: String,
    pub count: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub min: f64,
    pub max: f64,
}

/// Groups rows by `(protocol, var, metric)`. Values are sorted before
/// accumulation, so the result does not depend on row order.
pub fn summarize(rows: &[ResultRow]) -> Vec<Summary> {
    let mut groups: BTreeMap<(String, u64, String), Vec<f64>> = BTreeMap::new();
    for r in rows {
        groups
            .entry((r.protocol.clone(), r.var.to_bits(), r.metric.clone()))
            .or_default()
            .push(r.value);
    }
    groups
        .into_iter()
        .map(|((protocol, var, metric), mut v)| {
            v.sort_by(f64::total_cmp);
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let ss: f64 = v.iter().map(|x| (x - mean) * (x - mean)).sum();
            Summary {
                protocol,
                var: f64::from_bits(var),
                metric,
                count: v.len(),
                mean,
                std_dev: if v.len() > 1 {
                    (ss / (n - 1.0)).sqrt()
                } else {
                    0.0
                },
                min: v[0],
                max: v[v.len() - 1],
            }
        })
        .collect()
}

pub fn summary_of<'a>(
    s: &'a [Summary],
    protocol: &str,
    var: f64,
    metric: &str,
) -> Option<&'a Summary> {
    s.iter()
        .find(|x| x.protocol == protocol && x.var == var && x.metric == metric)
}

struct Job {
    var: f64,
    protocol: usize,
    seed: u64,
    params: ProtocolParams,
}

fn row(cfg: &ExperimentConfig, job: &Job, metric: &str, value: f64) -> ResultRow {
    let proto = &cfg.protocols[job.protocol];
    ResultRow {
        experiment: cfg.kind.name().into(),
        protocol: proto.label(),
        c: proto.coefficient().to_string(),
        var: job.var,
        seed: job.seed,
        metric: metric.into(),
        value,
    }
}

/// Runs `f` on every job in parallel, keeping the `(var, protocol, seed)`
/// order in the output.
fn run_jobs<F>(mut jobs: Vec<Job>, f: F) -> Result<Vec<ResultRow>, ExperimentError>
where
    F: Fn(&Job) -> Result<Vec<ResultRow>, ExperimentError> + Sync,
{
    jobs.sort_by(|a, b| {
        a.var
            .total_cmp(&b.var)
            .then(a.protocol.cmp(&b.protocol))
            .then(a.seed.cmp(&b.seed))
    });
    let out: Vec<Vec<ResultRow>> = jobs.par_iter().map(&f).collect::<Result<_, _>>()?;
    Ok(out.into_iter().flatten().collect())
}

fn sim_config(cfg: &ExperimentConfig, job: &Job, strategy: Strategy) -> SimConfig {
    let mut s = SimConfig::new(
        job.params.clone(),
        cfg.protocols[job.protocol].coefficient(),
        strategy,
    );
    s.rounds = cfg.rounds;
    s.seed = job.seed;
    s
}

fn npq_warnings(cfg: &ExperimentConfig, params: &ProtocolParams, var: f64) -> Option<ResultRow> {
    let npq = params.n as f64 * params.p * params.q as f64;
    ((npq - 1.0).abs() > 1e-9).then(|| ResultRow {
        experiment: cfg.kind.name().into(),
        protocol: "-".into(),
        c: "-".into(),
        var,
        seed: cfg.seed,
        metric: "warning_npq".into(),
        value: npq,
    })
}

/// Honest fraction of the final main chain for every corrupted-party
/// count, protocol and repetition.
pub fn run_throughput_sweep(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, ExperimentError> {
    let ExperimentKind::Throughput { t_values } = &cfg.kind else {
        return Err(ExperimentError::Config(
            "not a throughput experiment".into(),
        ));
    };
    let mut jobs = Vec::new();
    let mut warnings = Vec::new();
    for &t in t_values {
        let params = cfg.params_for(t, None);
        warnings.extend(npq_warnings(cfg, &params, t as f64));
        for protocol in 0..cfg.protocols.len() {
            for rep in 0..cfg.repetitions {
                jobs.push(Job {
                    var: t as f64,
                    protocol,
                    seed: cfg.seed + rep as u64,
                    params: params.clone(),
                });
            }
        }
    }
    let mut rows = run_jobs(jobs, |job| {
        let trace = simulate(&sim_config(cfg, job, cfg.strategy.clone()))?;
        let m = throughput_metrics(&trace);
        Ok(vec![
            row(cfg, job, "honest_fraction", m.honest_fraction),
            row(cfg, job, "psi_f", m.psi_f),
            row(cfg, job, "collision_rate", m.collision_rate),
            row(cfg, job, "chain_length", m.chain_length as f64),
        ])
    })?;
    rows.extend(warnings);
    Ok(rows)
}

/// Outcome of one balance-attack run.
#[derive(Clone, Debug, PartialEq)]
pub struct BalanceRun {
    /// `None` when the fork was still open at the horizon.
    pub fork_duration: Option<u64>,
    pub attack_duration: Option<u64>,
    pub bank_at_heal: u64,
    pub bound_rounds: u64,
    /// Every window of at least `λ` rounds is typical (vacuously so for
    /// runs shorter than `λ`).
    pub typical: bool,
    pub rounds: u64,
}

pub fn balance_run(sim: &SimConfig) -> Result<BalanceRun, ExperimentError> {
    let Strategy::Balance { tau, .. } = sim.adversary.strategy else {
        return Err(ExperimentError::Config("not a balance attack".into()));
    };
    let mut sim = sim.clone();
    sim.record = Record::Full;
    sim.stop_when_resolved = true;
    let trace = simulate(&sim)?;
    let outcome = trace.balance.clone().unwrap_or_default();
    let bound = balance_bound(outcome.bank_at_heal as f64, &sim.params, &sim.coeff, tau)?;
    let opts = TypicalOptions::new(sim.params.epsilon, sim.params.lambda);
    let typical = match typical_execution_check(&trace.stats, &derived_rates(&sim.params), &opts) {
        Ok(r) => r.is_typical(),
        Err(AnalysisError::TraceTooShort { .. }) => true,
        Err(e) => return Err(e.into()),
    };
    Ok(BalanceRun {
        fork_duration: crate::analysis::fork_duration(&trace),
        attack_duration: outcome.attack_duration,
        bank_at_heal: outcome.bank_at_heal,
        bound_rounds: bound.rounds,
        typical,
        rounds: trace.rounds,
    })
}

/// Fork duration after a `τ`-round partition for every mining ratio,
/// protocol and repetition, next to the duration bound.
pub fn run_balance_sweep(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, ExperimentError> {
    let ExperimentKind::Balance { pqn_values, tau } = &cfg.kind else {
        return Err(ExperimentError::Config("not a balance experiment".into()));
    };
    let strategy = match &cfg.strategy {
        Strategy::Balance { guard, .. } => Strategy::Balance {
            tau: *tau,
            guard: *guard,
        },
        _ => {
            return Err(ExperimentError::Config(
                "balance sweeps need the balance adversary".into(),
            ))
        }
    };
    let mut jobs = Vec::new();
    for &pqn in pqn_values {
        let params = cfg.params_for(cfg.params.t, Some(pqn));
        for protocol in 0..cfg.protocols.len() {
            for rep in 0..cfg.repetitions {
                jobs.push(Job {
                    var: pqn,
                    protocol,
                    seed: cfg.seed + rep as u64,
                    params: params.clone(),
                });
            }
        }
    }
    run_jobs(jobs, |job| {
        let run = balance_run(&sim_config(cfg, job, strategy.clone()))?;
        let mut out = Vec::new();
        match run.fork_duration {
            Some(d) => out.push(row(cfg, job, "fork_duration", d as f64)),
            None => out.push(row(cfg, job, "fork_unresolved", run.rounds as f64)),
        }
        if let Some(d) = run.attack_duration {
            out.push(row(cfg, job, "attack_duration", d as f64));
        }
        out.push(row(cfg, job, "bank_at_heal", run.bank_at_heal as f64));
        out.push(row(cfg, job, "bound", run.bound_rounds as f64));
        out.push(row(
            cfg,
            job,
            "typical",
            if run.typical { 1.0 } else { 0.0 },
        ));
        Ok(out)
    })
}

/// Throughput metrics of one run per protocol.
pub fn run_single(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, ExperimentError> {
    let params = cfg.params_for(cfg.params.t, None);
    let jobs = (0..cfg.protocols.len())
        .flat_map(|protocol| {
            let params = params.clone();
            (0..cfg.repetitions).map(move |rep| Job {
                var: params.t as f64,
                protocol,
                seed: cfg.seed + rep as u64,
                params: params.clone(),
            })
        })
        .collect();
    run_jobs(jobs, |job| {
        let trace = simulate(&sim_config(cfg, job, cfg.strategy.clone()))?;
        let m = throughput_metrics(&trace);
        let mut out = vec![
            row(cfg, job, "honest_fraction", m.honest_fraction),
            row(cfg, job, "psi_f", m.psi_f),
            row(cfg, job, "collision_rate", m.collision_rate),
            row(cfg, job, "chain_length", m.chain_length as f64),
            row(cfg, job, "blocks", trace.tree.len() as f64 - 1.0),
        ];
        if let Some(d) = m.fork_duration {
            out.push(row(cfg, job, "fork_duration", d as f64));
        }
        Ok(out)
    })
}

/// Derived quantities for every protocol; `K`-dependent rows are left out
/// where `K` is undefined.
pub fn params_report(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, ExperimentError> {
    let params = cfg.params_for(cfg.params.t, None);
    let mut rows = Vec::new();
    for (protocol, p) in cfg.protocols.iter().enumerate() {
        let job = Job {
            var: params.t as f64,
            protocol,
            seed: cfg.seed,
            params: params.clone(),
        };
        let rates = derived_rates(&params);
        for (name, v) in [
            ("alpha", rates.alpha),
            ("beta", rates.beta),
            ("gamma", rates.gamma),
            ("gamma_u", rates.gamma_u),
            ("f", rates.f),
        ] {
            rows.push(row(cfg, &job, name, v));
        }
        match derive_params(&params, &p.coefficient()) {
            Ok(d) => {
                for (name, v) in [
                    ("g", d.g),
                    ("K", d.k.value),
                    ("K_terms", d.k.terms as f64),
                    ("K_threshold", d.k.threshold as f64),
                    ("R", d.fresh.r as f64),
                    ("R_from_one", d.fresh.r_from_one as f64),
                    ("R_from_zero", d.fresh.r_from_zero as f64),
                    ("R_hat", d.fresh.r_hat as f64),
                    ("u", d.fresh.u),
                    ("u_rounds", d.fresh.u_rounds as f64),
                    ("tau_growth", d.tau_growth),
                    ("throughput_ok", d.throughput_ok as u8 as f64),
                    ("healthy", d.is_healthy() as u8 as f64),
                ] {
                    rows.push(row(cfg, &job, name, v));
                }
            }
            Err(AnalysisError::LimitCoefficient) => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(rows)
}

/// Every property report of one trace.
#[derive(Clone, Debug)]
pub struct TraceChecks {
    pub typical: TypicalReport,
    pub chain_growth: PropertyReport,
    pub common_prefix: PropertyReport,
    pub ledger: LedgerReport,
    pub fresh: FreshBlockReport,
    /// Absent for the Bitcoin limit.
    pub weight_growth: Option<WeightGrowthReport>,
    pub sandwich: SandwichReport,
    pub honest_mining: PropertyReport,
}

/// Simulation settings of a check campaign run: full recording, the
/// stable prefix at `K`, transactions and broadcast-tree tracking.
pub fn check_sim_config(
    cfg: &ExperimentConfig,
    params: &ProtocolParams,
    protocol: &Protocol,
    derived: &DerivedParams,
    seed: u64,
) -> SimConfig {
    let mut s = SimConfig::new(params.clone(), protocol.coefficient(), cfg.strategy.clone());
    s.rounds = cfg.rounds;
    s.seed = seed;
    s.record = Record::Full;
    s.stability = Some((derived.k.value, PrefixMode::Normalized));
    s.tx_every = Some(cfg.tx_every.max(1));
    s.track_public = true;
    s
}

pub fn check_trace(
    trace: &SimTrace,
    derived: &DerivedParams,
    growth_window: u64,
    max_tracked: usize,
) -> Result<TraceChecks, AnalysisError> {
    let params = &trace.params;
    let opts = TypicalOptions::new(params.epsilon, params.lambda);
    let typical = typical_execution_check(&trace.stats, &derived_rates(params), &opts)?;
    let weight_growth = if trace.coeff.is_limit() {
        None
    } else {
        let levels = growth_levels(params, growth_window);
        Some(weight_growth_check(
            trace,
            levels,
            growth_window,
            max_tracked,
        )?)
    };
    Ok(TraceChecks {
        typical,
        chain_growth: chain_growth_check(trace, derived.g, params.lambda)?,
        common_prefix: common_prefix_check(trace)?,
        ledger: ledger_checks(trace, derived.fresh.u_rounds)?,
        fresh: fresh_block_check(trace, derived.fresh.u_rounds)?,
        weight_growth,
        sandwich: length_sandwich_check(trace, max_tracked)?,
        honest_mining: honest_node_mining_check(trace)?,
    })
}

impl TraceChecks {
    pub fn records(&self, digest: &str, seed: u64) -> Vec<CheckRecord> {
        let rec = |check: &str, r: &PropertyReport, extra: String| CheckRecord {
            check: check.into(),
            params_digest: digest.into(),
            pass: r.passed(),
            first_violation_round: r.first_violation_round,
            detail: format!("seed={seed}; {}{extra}", r.summary()),
        };
        let t = &self.typical;
        let mut out = vec![CheckRecord {
            check: "typical_execution".into(),
            params_digest: digest.into(),
            pass: t.is_typical(),
            first_violation_round: t.first_atypical.map(|w| w.end),
            detail: format!(
                "seed={seed}; {} of {} windows typical",
                t.typical_windows, t.windows
            ),
        }];
        out.push(rec("chain_growth", &self.chain_growth, String::new()));
        out.push(rec("common_prefix", &self.common_prefix, String::new()));
        out.push(rec("persistence", &self.ledger.persistence, String::new()));
        let l = &self.ledger.liveness;
        out.push(rec(
            "liveness",
            &l.report,
            format!(
                "; {} of {} eligible on time, {} of {} settled",
                l.on_time, l.eligible, l.settled, l.total
            ),
        ));
        out.push(rec(
            "fresh_block",
            &self.fresh.report,
            format!("; max gap {}", self.fresh.max_gap),
        ));
        if let Some(w) = &self.weight_growth {
            out.push(rec(
                "weight_growth",
                &w.report,
                format!("; {} passed, {} undecided", w.passed, w.undecided),
            ));
        }
        let s = &self.sandwich;
        out.push(rec(
            "length_sandwich",
            &s.released,
            format!("; {} windows", s.windows),
        ));
        out.push(CheckRecord {
            check: "length_sandwich_mined".into(),
            params_digest: digest.into(),
            pass: s.mined_violations == 0,
            first_violation_round: None,
            detail: format!(
                "seed={seed}; {} of {} windows outside the bounds",
                s.mined_violations, s.windows
            ),
        });
        out.push(rec(
            "honest_node_mining",
            &self.honest_mining,
            String::new(),
        ));
        out
    }
}

/// Runs every property check on `repetitions` seeded traces per protocol.
/// Protocols without a finite `K` are skipped.
pub fn run_check_campaign(cfg: &ExperimentConfig) -> Result<Vec<CheckRecord>, ExperimentError> {
    let params = cfg.params_for(cfg.params.t, None);
    let mut jobs = Vec::new();
    for (i, p) in cfg.protocols.iter().enumerate() {
        let derived = match derive_params(&params, &p.coefficient()) {
            Ok(d) => d,
            Err(AnalysisError::LimitCoefficient) => {
                log::warn!("{}: no finite K, skipped", p.label());
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let derived = std::sync::Arc::new(derived);
        for rep in 0..cfg.repetitions {
            jobs.push((i, cfg.seed + rep as u64, derived.clone()));
        }
    }
    let out: Vec<Vec<CheckRecord>> = jobs
        .par_iter()
        .map(|(i, seed, derived)| {
            let p = &cfg.protocols[*i];
            let trace = simulate(&check_sim_config(cfg, &params, p, derived, *seed))?;
            let checks = check_trace(&trace, derived, cfg.growth_window, cfg.max_tracked)?;
            Ok(checks.records(
                &params_digest(&params, &p.coefficient(), &cfg.strategy),
                *seed,
            ))
        })
        .collect::<Result<_, ExperimentError>>()?;
    Ok(out.into_iter().flatten().collect())
}

/// Result rows of the experiment `cfg` describes; check campaigns have
/// their own record format, see [`run_check_campaign`].
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, ExperimentError> {
    for w in cfg
        .params
        .validate()
        .map_err(|e| ExperimentError::Config(e.to_string()))?
    {
        log::warn!("{w}");
    }
    match &cfg.kind {
        ExperimentKind::Throughput { .. } => run_throughput_sweep(cfg),
        ExperimentKind::Balance { .. } => run_balance_sweep(cfg),
        ExperimentKind::Single => run_single(cfg),
        ExperimentKind::Params => params_report(cfg),
        ExperimentKind::Check => Err(ExperimentError::Config(
            "check campaigns produce check records".into(),
        )),
    }
}

/// Orders summaries by protocol position in `protocols`, then variable.
pub fn order_by_protocol(s: &mut [Summary], protocols: &[Protocol]) {
    let pos = |label: &str| {
        protocols
            .iter()
            .position(|p| p.label() == label)
            .unwrap_or(usize::MAX)
    };
    s.sort_by(|a, b| {
        pos(&a.protocol)
            .cmp(&pos(&b.protocol))
            .then(a.var.partial_cmp(&b.var).unwrap_or(Ordering::Equal))
            .then(a.metric.cmp(&b.metric))
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: &str) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(ExperimentKind::default_for(kind).unwrap());
        cfg.params.n = 20;
        cfg.params.q = 5;
        cfg.params.t = 4;
        cfg.rounds = 300;
        cfg.repetitions = 3;
        cfg
    }

    #[test]
    fn throughput_rows_and_honest_only_fraction() {
        let mut cfg = small("throughput");
        cfg.kind = ExperimentKind::Throughput {
            t_values: vec![0, 5],
        };
        let rows = run_throughput_sweep(&cfg).unwrap();
        let fractions: Vec<&ResultRow> = rows
            .iter()
            .filter(|r| r.metric == "honest_fraction")
            .collect();
        assert_eq!(fractions.len(), 2 * 5 * 3);
        assert!(fractions
            .iter()
            .filter(|r| r.var == 0.0)
            .all(|r| r.value == 1.0));
        assert!(rows.iter().all(|r| r.metric != "warning_npq"));
        let mut buf = Vec::new();
        write_rows(&mut buf, &rows).unwrap();
        assert_eq!(read_rows(buf.as_slice()).unwrap(), rows);
        let mut again = Vec::new();
        write_rows(&mut again, &run_throughput_sweep(&cfg).unwrap()).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn numbers_round_trip() {
        for x in [
            0.0,
            1.0,
            -2.5,
            1e-7,
            2.3841043019173105e161,
            5.3e16,
            0.1 + 0.2,
            f64::NAN,
            f64::INFINITY,
        ] {
            let s = number(x);
            let back: f64 = s.parse().unwrap();
            assert!(back == x || (x.is_nan() && back.is_nan()), "{s}");
            assert!(s.len() < 26, "{s}");
        }
        assert_eq!(number(226.0), "226");
    }

    #[test]
    fn npq_violation_warns() {
        let mut cfg = small("throughput");
        cfg.kind = ExperimentKind::Throughput { t_values: vec![2] };
        cfg.npq = None;
        cfg.params.p = 0.05;
        cfg.repetitions = 1;
        cfg.protocols.truncate(1);
        let rows = run_throughput_sweep(&cfg).unwrap();
        let w: Vec<_> = rows.iter().filter(|r| r.metric == "warning_npq").collect();
        assert_eq!(w.len(), 1);
        assert!((w[0].value - 5.0).abs() < 1e-12);
    }

    #[test]
    fn zero_partition_has_no_fork() {
        let mut cfg = small("balance");
        cfg.kind = ExperimentKind::Balance {
            pqn_values: vec![1.0],
            tau: 0,
        };
        cfg.strategy = Strategy::Balance {
            tau: 0,
            guard: Default::default(),
        };
        cfg.params.t = 4;
        let rows = run_balance_sweep(&cfg).unwrap();
        let d: Vec<_> = rows
            .iter()
            .filter(|r| r.metric == "fork_duration")
            .collect();
        assert_eq!(d.len(), 5 * 3);
        assert!(d.iter().all(|r| r.value == 0.0));
        assert!(rows.iter().any(|r| r.metric == "bound"));
    }

    #[test]
    fn summaries_ignore_row_order() {
        let mut cfg = small("simulate");
        cfg.protocols.truncate(2);
        let rows = run_single(&cfg).unwrap();
        let mut rev = rows.clone();
        rev.reverse();
        assert_eq!(summarize(&rows), summarize(&rev));
        let s = summarize(&rows);
        let h = summary_of(&s, "GHOST", cfg.params.t as f64, "honest_fraction").unwrap();
        assert_eq!(h.count, 3);
        assert!(h.min <= h.mean && h.mean <= h.max);
    }

    #[test]
    fn params_rows_skip_k_for_bitcoin() {
        let cfg = ExperimentConfig::new(ExperimentKind::Params);
        let rows = params_report(&cfg).unwrap();
        assert!(rows
            .iter()
            .any(|r| r.protocol == "Bitcoin" && r.metric == "alpha"));
        assert!(!rows
            .iter()
            .any(|r| r.protocol == "Bitcoin" && r.metric == "K"));
        let k = rows
            .iter()
            .find(|r| r.protocol == "Medium(10001521^(1/100))" && r.metric == "R")
            .unwrap();
        assert_eq!(k.value, 226.0);
    }

    #[test]
    fn check_campaign_on_a_small_honest_network() {
        let mut cfg = small("check");
        cfg.strategy = Strategy::None;
        cfg.params.t = 0;
        cfg.params.lambda = 50;
        cfg.rounds = 600;
        cfg.repetitions = 1;
        cfg.protocols = vec!["2".parse().unwrap()];
        let recs = run_check_campaign(&cfg).unwrap();
        let names: Vec<&str> = recs.iter().map(|r| r.check.as_str()).collect();
        for n in [
            "typical_execution",
            "common_prefix",
            "persistence",
            "liveness",
            "honest_node_mining",
        ] {
            assert!(names.contains(&n), "{n}");
        }
        for r in &recs {
            if [
                "common_prefix",
                "persistence",
                "honest_node_mining",
                "length_sandwich",
            ]
            .contains(&r.check.as_str())
            {
                assert!(r.pass, "{r:?}");
            }
        }
    }
}
