use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::ExperimentError;
use crate::adversary::{LengthGuard, Strategy};
use crate::blocktree::WeightCoefficient;
use crate::mining::ProtocolParams;

/// The prime whose roots give the default Medium coefficients.
pub const DEFAULT_PRIME: u64 = 10_001_521;

/// A chain-selection rule under test.
#[derive(Clone, Debug, PartialEq)]
pub enum Protocol {
    Ghost,
    Bitcoin,
    Medium(WeightCoefficient),
}

impl Protocol {
    pub fn coefficient(&self) -> WeightCoefficient {
        match self {
            Protocol::Ghost => WeightCoefficient::ghost(),
            Protocol::Bitcoin => WeightCoefficient::bitcoin(),
            Protocol::Medium(c) => c.clone(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Protocol::Ghost => "GHOST".into(),
            Protocol::Bitcoin => "Bitcoin".into(),
            Protocol::Medium(c) => format!("Medium({c})"),
        }
    }

    /// GHOST, Medium at the 10th, 100th and 100000th root of the default
    /// prime, and Bitcoin.
    pub fn defaults() -> Vec<Protocol> {
        let mut v = vec![Protocol::Ghost];
        for root in [10, 100, 100_000] {
            v.push(Protocol::Medium(
                WeightCoefficient::algebraic_root(DEFAULT_PRIME, root).unwrap(),
            ));
        }
        v.push(Protocol::Bitcoin);
        v
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Parses `ghost`, `bitcoin`, or a coefficient: `P^(1/k)` for a prime `P`,
/// an integer, or a fraction `a/b`. `medium:` in front is optional.
impl FromStr for Protocol {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let spec = s.strip_prefix("medium:").unwrap_or(s).trim();
        match spec.to_ascii_lowercase().as_str() {
            "ghost" | "1" => return Ok(Protocol::Ghost),
            "bitcoin" | "inf" => return Ok(Protocol::Bitcoin),
            _ => {}
        }
        let bad = |why: String| ExperimentError::Config(format!("protocol `{s}`: {why}"));
        if let Some((base, exp)) = spec.split_once('^') {
            let prime: u64 = base.trim().parse().map_err(|e| bad(format!("{e}")))?;
            let exp = exp.trim().trim_start_matches('(').trim_end_matches(')');
            let root = exp
                .strip_prefix("1/")
                .ok_or_else(|| bad("exponent must be 1/k".into()))?
                .trim()
                .parse::<u32>()
                .map_err(|e| bad(format!("{e}")))?;
            return WeightCoefficient::algebraic_root(prime, root)
                .map(Protocol::Medium)
                .map_err(|e| bad(e.to_string()));
        }
        let (num, den) = spec.split_once('/').unwrap_or((spec, "1"));
        let num: BigInt = num.trim().parse().map_err(|e| bad(format!("{e}")))?;
        let den: BigInt = den.trim().parse().map_err(|e| bad(format!("{e}")))?;
        if den == BigInt::from(0) {
            return Err(bad("zero denominator".into()));
        }
        let r = BigRational::new(num, den);
        if r == BigRational::from_integer(1.into()) {
            return Ok(Protocol::Ghost);
        }
        WeightCoefficient::rational(r)
            .map(Protocol::Medium)
            .map_err(|e| bad(e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExperimentKind {
    /// Honest fraction against the number of corrupted parties.
    Throughput {
        t_values: Vec<u32>,
    },
    /// Fork duration of a balance attack against the total mining ratio.
    Balance {
        pqn_values: Vec<f64>,
        tau: u64,
    },
    Single,
    Params,
    /// Property-check campaign.
    Check,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Throughput { .. } => "throughput",
            ExperimentKind::Balance { .. } => "balance",
            ExperimentKind::Single => "simulate",
            ExperimentKind::Params => "params",
            ExperimentKind::Check => "check",
        }
    }

    pub fn default_for(name: &str) -> Result<Self, ExperimentError> {
        Ok(match name {
            "throughput" => ExperimentKind::Throughput {
                t_values: (0..10).map(|k| 5 * k).collect(),
            },
            "balance" => ExperimentKind::Balance {
                pqn_values: vec![0.5, 1.0, 2.0, 4.0],
                tau: 100,
            },
            "simulate" | "single" => ExperimentKind::Single,
            "params" => ExperimentKind::Params,
            "check" => ExperimentKind::Check,
            other => {
                return Err(ExperimentError::Config(format!(
                    "unknown experiment `{other}`"
                )))
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub protocols: Vec<Protocol>,
    /// `p` is recomputed from `npq` for sweeps unless `p` was set explicitly.
    pub params: ProtocolParams,
    pub npq: Option<f64>,
    pub strategy: Strategy,
    pub rounds: u64,
    pub repetitions: u32,
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// Inject a transaction every this many rounds (check campaigns).
    pub tx_every: u64,
    /// Cap on blocks tracked by the per-block window checks.
    pub max_tracked: usize,
    /// Window length of the weight-growth check.
    pub growth_window: u64,
}

impl ExperimentConfig {
    /// Defaults of each experiment: `n = 100`, `q = 10`, `npq = 1`,
    /// `ε = 0.5`, `λ = 200`, the five default protocols.
    pub fn new(kind: ExperimentKind) -> Self {
        let (strategy, rounds, repetitions, t) = match &kind {
            ExperimentKind::Throughput { .. } => {
                (Strategy::SecretChain { withhold: 8 }, 1000, 100, 20)
            }
            ExperimentKind::Balance { tau, .. } => (
                Strategy::Balance {
                    tau: *tau,
                    guard: LengthGuard::Balanced,
                },
                3000,
                50,
                20,
            ),
            ExperimentKind::Check => (Strategy::SecretChain { withhold: 8 }, 10_000, 20, 20),
            _ => (Strategy::None, 1000, 1, 20),
        };
        ExperimentConfig {
            kind,
            protocols: Protocol::defaults(),
            params: ProtocolParams {
                t,
                ..Default::default()
            },
            npq: Some(1.0),
            strategy,
            rounds,
            repetitions,
            seed: 0,
            out: None,
            tx_every: 50,
            max_tracked: 64,
            growth_window: 400,
        }
    }

    /// Reads `key = value` lines; `#` starts a comment and lists are
    /// comma-separated. The `experiment` key picks the defaults the other
    /// keys override; `default_kind` is used without it.
    pub fn parse(text: &str, default_kind: &str) -> Result<Self, ExperimentError> {
        let mut pairs = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                ExperimentError::Config(format!("line {}: expected `key = value`", no + 1))
            })?;
            pairs.push((no + 1, k.trim().to_ascii_lowercase(), v.trim().to_string()));
        }
        let kind_name = pairs
            .iter()
            .rev()
            .find(|(_, k, _)| k == "experiment")
            .map_or(default_kind.to_string(), |(_, _, v)| v.clone());
        let mut cfg = ExperimentConfig::new(ExperimentKind::default_for(&kind_name)?);
        let mut explicit_p = false;
        let mut guard = None;
        let mut withhold = None;
        let mut adversary = None;
        for (no, key, value) in pairs {
            let err = |e: String| ExperimentError::Config(format!("line {no}: {key}: {e}"));
            macro_rules! num {
                () => {
                    value.parse().map_err(|e| err(format!("{e}")))?
                };
            }
            match key.as_str() {
                "experiment" => {}
                "protocols" => cfg.protocols = list(&value, |s| s.parse())?,
                "n" => cfg.params.n = num!(),
                "t" => cfg.params.t = num!(),
                "p" => {
                    cfg.params.p = num!();
                    explicit_p = true;
                }
                "q" => cfg.params.q = num!(),
                "npq" => cfg.npq = Some(num!()),
                "epsilon" => cfg.params.epsilon = num!(),
                "lambda" => cfg.params.lambda = num!(),
                "delta" => cfg.params.delta = num!(),
                "rounds" => cfg.rounds = num!(),
                "repetitions" | "reps" => cfg.repetitions = num!(),
                "seed" => cfg.seed = num!(),
                "out" => cfg.out = Some(PathBuf::from(&value)),
                "tx_every" => cfg.tx_every = num!(),
                "max_tracked" => cfg.max_tracked = num!(),
                "growth_window" => cfg.growth_window = num!(),
                "adversary" => adversary = Some(value.to_ascii_lowercase()),
                "withhold" => withhold = Some(num!()),
                "guard" => {
                    guard = Some(match value.to_ascii_lowercase().as_str() {
                        "strict" => LengthGuard::Strict,
                        "balanced" => LengthGuard::Balanced,
                        other => return Err(err(format!("unknown guard `{other}`"))),
                    })
                }
                "t_values" => match &mut cfg.kind {
                    ExperimentKind::Throughput { t_values } => {
                        *t_values = list(&value, |s| {
                            s.parse::<u32>().map_err(|e| err(format!("{e}")))
                        })?
                    }
                    _ => return Err(err("only valid for throughput".into())),
                },
                "pqn_values" => match &mut cfg.kind {
                    ExperimentKind::Balance { pqn_values, .. } => {
                        *pqn_values = list(&value, |s| {
                            s.parse::<f64>().map_err(|e| err(format!("{e}")))
                        })?
                    }
                    _ => return Err(err("only valid for balance".into())),
                },
                "tau" => match &mut cfg.kind {
                    ExperimentKind::Balance { tau, .. } => *tau = num!(),
                    _ => return Err(err("only valid for balance".into())),
                },
                _ => return Err(err("unknown key".into())),
            }
        }
        if explicit_p {
            cfg.npq = None;
        }
        let tau = match &cfg.kind {
            ExperimentKind::Balance { tau, .. } => *tau,
            _ => 100,
        };
        if let Some(a) = adversary {
            cfg.strategy = match a.as_str() {
                "none" => Strategy::None,
                "secret" | "secret_chain" => Strategy::SecretChain { withhold: 8 },
                "balance" => Strategy::Balance {
                    tau,
                    guard: LengthGuard::Balanced,
                },
                other => {
                    return Err(ExperimentError::Config(format!(
                        "unknown adversary `{other}`"
                    )))
                }
            };
        }
        match &mut cfg.strategy {
            Strategy::SecretChain { withhold: w } => *w = withhold.unwrap_or(*w),
            Strategy::Balance { tau: t, guard: g } => {
                *t = tau;
                *g = guard.unwrap_or(*g);
            }
            Strategy::None => {}
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::Config(m.into()));
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1");
        }
        if self.protocols.is_empty() {
            return bad("no protocols");
        }
        match &self.kind {
            ExperimentKind::Throughput { t_values } if t_values.is_empty() => {
                return bad("empty t_values")
            }
            ExperimentKind::Throughput { t_values }
                if t_values.iter().any(|&t| t > self.params.n) =>
            {
                return bad("t_values exceed n")
            }
            ExperimentKind::Balance { pqn_values, .. } if pqn_values.is_empty() => {
                return bad("empty pqn_values")
            }
            ExperimentKind::Balance { pqn_values, .. }
                if pqn_values.iter().any(|&x| !(x > 0.0)) =>
            {
                return bad("pqn_values must be positive")
            }
            _ => {}
        }
        if let Some(x) = self.npq {
            if !(x > 0.0) {
                return bad("npq must be positive");
            }
        }
        self.params
            .validate()
            .map_err(|e| ExperimentError::Config(e.to_string()))?;
        Ok(())
    }

    /// Parameters with `t` corrupted parties and `p` from the mining ratio.
    pub fn params_for(&self, t: u32, npq: Option<f64>) -> ProtocolParams {
        let mut p = ProtocolParams {
            t,
            ..self.params.clone()
        };
        if let Some(x) = npq.or(self.npq) {
            p.p = x / (p.n as f64 * p.q as f64);
        }
        p
    }
}

fn list<T, E>(value: &str, f: impl Fn(&str) -> Result<T, E>) -> Result<Vec<T>, E> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(f)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn protocol_specs() {
        assert_eq!("ghost".parse::<Protocol>().unwrap(), Protocol::Ghost);
        assert_eq!(" bitcoin ".parse::<Protocol>().unwrap(), Protocol::Bitcoin);
        let p: Protocol = "medium:10001521^(1/100)".parse().unwrap();
        assert_eq!(
            p,
            Protocol::Medium(WeightCoefficient::algebraic_root(DEFAULT_PRIME, 100).unwrap())
        );
        assert_eq!(p.label(), "Medium(10001521^(1/100))");
        assert_eq!(
            "10001521^1/10".parse::<Protocol>().unwrap(),
            Protocol::defaults()[1]
        );
        assert_eq!("3/2".parse::<Protocol>().unwrap().label(), "Medium(3/2)");
        assert_eq!("1".parse::<Protocol>().unwrap(), Protocol::Ghost);
        assert!("10001522^(1/10)".parse::<Protocol>().is_err());
        assert!("1/0".parse::<Protocol>().is_err());
        assert!("fast".parse::<Protocol>().is_err());
    }

    #[test]
    fn parse_overrides_defaults() {
        let text = "experiment = balance\n# comment\npqn_values = 1, 2\ntau = 50 # trailing\nguard = strict\nreps = 3\nprotocols = ghost, 10001521^(1/10)\n";
        let cfg = ExperimentConfig::parse(text, "throughput").unwrap();
        assert_eq!(
            cfg.kind,
            ExperimentKind::Balance {
                pqn_values: vec![1.0, 2.0],
                tau: 50
            }
        );
        assert_eq!(
            cfg.strategy,
            Strategy::Balance {
                tau: 50,
                guard: LengthGuard::Strict
            }
        );
        assert_eq!(cfg.repetitions, 3);
        assert_eq!(cfg.protocols.len(), 2);
        let p = cfg.params_for(20, Some(2.0));
        assert!((p.p * p.n as f64 * p.q as f64 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn parse_errors() {
        assert!(ExperimentConfig::parse("bogus = 1", "params").is_err());
        assert!(ExperimentConfig::parse("n 100", "params").is_err());
        assert!(ExperimentConfig::parse("reps = 0", "params").is_err());
        assert!(ExperimentConfig::parse("tau = 5", "throughput").is_err());
        assert!(ExperimentConfig::parse("t_values =", "throughput").is_err());
        assert!(ExperimentConfig::parse("experiment = dance", "params").is_err());
        let cfg = ExperimentConfig::parse("p = 0.002", "throughput").unwrap();
        assert_eq!(cfg.npq, None);
        assert_eq!(cfg.params_for(5, None).p, 0.002);
    }
}
