use std::fmt;

use super::AnalysisError;
use crate::mining::Rates;
use crate::sim::RoundStats;

/// Inclusive range of 1-based rounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Window {
    pub start: u64,
    pub end: u64,
}

impl Window {
    pub fn new(start: u64, end: u64) -> Self {
        Window { start, end }
    }

    pub fn len(&self) -> u64 {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end < self.start
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..={}", self.start, self.end)
    }
}

/// `X(S)`, `X̃(S)`, `Y(S)`, `Z(S)` and the corrupted blocks released in `S`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct WindowSums {
    pub x: u64,
    pub x_tilde: u64,
    pub y: u64,
    pub z: u64,
    pub z_released: u64,
    pub repeat_miners: u64,
}

impl WindowSums {
    fn add(&self, s: &RoundStats) -> WindowSums {
        WindowSums {
            x: self.x + s.x as u64,
            x_tilde: self.x_tilde + s.x_tilde() as u64,
            y: self.y + s.y() as u64,
            z: self.z + s.z as u64,
            z_released: self.z_released + s.released as u64,
            repeat_miners: self.repeat_miners + s.repeat_miners as u64,
        }
    }

    fn sub(&self, o: &WindowSums) -> WindowSums {
        WindowSums {
            x: self.x - o.x,
            x_tilde: self.x_tilde - o.x_tilde,
            y: self.y - o.y,
            z: self.z - o.z,
            z_released: self.z_released - o.z_released,
            repeat_miners: self.repeat_miners - o.repeat_miners,
        }
    }
}

/// Prefix sums of the round counters for O(1) window queries.
#[derive(Clone, Debug)]
pub struct Counters {
    prefix: Vec<WindowSums>,
}

impl Counters {
    pub fn new(stats: &[RoundStats]) -> Self {
        let mut prefix = Vec::with_capacity(stats.len() + 1);
        prefix.push(WindowSums::default());
        for s in stats {
            let next = prefix.last().unwrap().add(s);
            prefix.push(next);
        }
        Counters { prefix }
    }

    pub fn rounds(&self) -> u64 {
        self.prefix.len() as u64 - 1
    }

    pub fn sums(&self, w: Window) -> Result<WindowSums, AnalysisError> {
        if w.start == 0 || w.end > self.rounds() || w.start > w.end + 1 {
            return Err(AnalysisError::BadWindow {
                start: w.start,
                end: w.end,
                rounds: self.rounds(),
            });
        }
        Ok(self.get(w))
    }

    pub(crate) fn get(&self, w: Window) -> WindowSums {
        if w.end < w.start {
            return WindowSums::default();
        }
        self.prefix[w.end as usize].sub(&self.prefix[w.start as usize - 1])
    }
}

pub fn window_sums(stats: &[RoundStats], w: Window) -> Result<WindowSums, AnalysisError> {
    Counters::new(stats).sums(w)
}

/// The numbered conditions of an (ε, λ)-typical execution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Condition {
    /// `(1-ε)E[X] < X < (1+ε)E[X]`
    HonestBlocks = 1,
    /// `(1-ε)E[X̃] < X̃ < (1+ε)E[X̃]`
    SuccessfulRounds = 2,
    /// `(1-ε)E[Y] < Y`
    UniqueRounds = 3,
    /// `Z < Y` and `Z < (1+ε)E[Z]`
    AdversaryBlocks = 4,
    /// No insertions, predictions or copies.
    NoForgery = 5,
    /// At most one success per honest party and round.
    OneSuccess = 6,
}

impl Condition {
    pub const ALL: [Condition; 6] = [
        Condition::HonestBlocks,
        Condition::SuccessfulRounds,
        Condition::UniqueRounds,
        Condition::AdversaryBlocks,
        Condition::NoForgery,
        Condition::OneSuccess,
    ];
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionOutcome {
    pub condition: Condition,
    pub violations: u64,
    pub first_violation: Option<Window>,
    /// Holds by construction of the simulator and is not evaluated.
    pub structural: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TypicalOptions {
    pub epsilon: f64,
    pub lambda: u64,
    /// Window starts are taken at multiples of this.
    pub stride: u64,
}

impl TypicalOptions {
    pub fn new(epsilon: f64, lambda: u64) -> Self {
        TypicalOptions {
            epsilon,
            lambda,
            stride: (lambda / 4).max(1),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TypicalReport {
    pub windows: u64,
    /// Windows satisfying every evaluated condition.
    pub typical_windows: u64,
    pub first_atypical: Option<Window>,
    pub conditions: Vec<ConditionOutcome>,
}

impl TypicalReport {
    pub fn fraction(&self) -> f64 {
        if self.windows == 0 {
            return 1.0;
        }
        self.typical_windows as f64 / self.windows as f64
    }

    pub fn is_typical(&self) -> bool {
        self.windows > 0 && self.typical_windows == self.windows
    }

    pub fn condition(&self, c: Condition) -> &ConditionOutcome {
        self.conditions.iter().find(|o| o.condition == c).unwrap()
    }
}

/// Evaluates conditions 1-4 and 6 over every window of at least `lambda`
/// rounds that starts at `1 + k * stride`, plus every suffix window.
/// Expectations come from the closed-form `rates`.
pub fn typical_execution_check(
    stats: &[RoundStats],
    rates: &Rates,
    opts: &TypicalOptions,
) -> Result<TypicalReport, AnalysisError> {
    let rounds = stats.len() as u64;
    if opts.lambda == 0 || opts.stride == 0 || !(0.0..1.0).contains(&opts.epsilon) {
        return Err(AnalysisError::Argument(format!("{opts:?}")));
    }
    if rounds < opts.lambda {
        return Err(AnalysisError::TraceTooShort {
            rounds,
            lambda: opts.lambda,
        });
    }
    let counters = Counters::new(stats);
    let eps = opts.epsilon;
    let mut outcomes: Vec<ConditionOutcome> = Condition::ALL
        .iter()
        .map(|&condition| ConditionOutcome {
            condition,
            violations: 0,
            first_violation: None,
            structural: condition == Condition::NoForgery,
        })
        .collect();
    let mut report = TypicalReport {
        windows: 0,
        typical_windows: 0,
        first_atypical: None,
        conditions: Vec::new(),
    };

    let mut check = |w: Window| {
        let s = counters.get(w);
        let len = w.len() as f64;
        let ex = rates.alpha * len;
        let ext = rates.gamma * len;
        let ey = rates.gamma_u * len;
        let ez = rates.beta * len;
        let within = |v: u64, e: f64| (1.0 - eps) * e < v as f64 && (v as f64) < (1.0 + eps) * e;
        let verdicts = [
            within(s.x, ex),
            within(s.x_tilde, ext),
            (1.0 - eps) * ey < s.y as f64,
            s.z < s.y && (s.z == 0 && ez == 0.0 || (s.z as f64) < (1.0 + eps) * ez),
            true,
            s.repeat_miners == 0,
        ];
        report.windows += 1;
        let mut ok = true;
        for (o, &v) in outcomes.iter_mut().zip(&verdicts) {
            if !v {
                ok = false;
                o.violations += 1;
                o.first_violation.get_or_insert(w);
            }
        }
        if ok {
            report.typical_windows += 1;
        } else {
            report.first_atypical.get_or_insert(w);
        }
    };

    let mut start = 1;
    while start + opts.lambda - 1 <= rounds {
        for end in start + opts.lambda - 1..=rounds {
            check(Window::new(start, end));
        }
        start += opts.stride;
    }
    for start in 1..=rounds + 1 - opts.lambda {
        if (start - 1) % opts.stride != 0 {
            check(Window::new(start, rounds));
        }
    }
    report.conditions = outcomes;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(x: u32, z: u32) -> RoundStats {
        RoundStats {
            x,
            z,
            ..Default::default()
        }
    }

    fn rates(alpha: f64, beta: f64, gamma: f64, gamma_u: f64) -> Rates {
        Rates {
            alpha,
            beta,
            gamma,
            gamma_u,
            f: alpha + beta,
        }
    }

    #[test]
    fn sums_and_bounds() {
        let stats = vec![st(1, 0), st(2, 1), st(0, 3), st(1, 0)];
        let s = window_sums(&stats, Window::new(1, 1)).unwrap();
        assert_eq!((s.x, s.x_tilde, s.y, s.z), (1, 1, 1, 0));
        let s = window_sums(&stats, Window::new(2, 4)).unwrap();
        assert_eq!((s.x, s.x_tilde, s.y, s.z), (3, 2, 1, 4));
        assert!(window_sums(&stats, Window::new(0, 2)).is_err());
        assert!(window_sums(&stats, Window::new(2, 5)).is_err());
    }

    #[test]
    fn zero_probability_fails_counting_conditions() {
        let stats = vec![st(0, 0); 50];
        let r = typical_execution_check(
            &stats,
            &rates(0.3, 0.0, 0.25, 0.2),
            &TypicalOptions::new(0.5, 10),
        )
        .unwrap();
        assert_eq!(r.typical_windows, 0);
        for c in [
            Condition::HonestBlocks,
            Condition::SuccessfulRounds,
            Condition::UniqueRounds,
        ] {
            assert_eq!(r.condition(c).violations, r.windows);
        }
        assert!(r.condition(Condition::NoForgery).structural);
    }

    #[test]
    fn no_adversary_meets_condition_four() {
        let stats: Vec<RoundStats> = (0..40).map(|k| st(u32::from(k % 2 == 0), 0)).collect();
        let r = typical_execution_check(
            &stats,
            &rates(0.5, 0.0, 0.5, 0.5),
            &TypicalOptions::new(0.5, 8),
        )
        .unwrap();
        assert_eq!(r.condition(Condition::AdversaryBlocks).violations, 0);
        assert!(r.is_typical());
    }

    #[test]
    fn window_enumeration() {
        let stats = vec![st(1, 0); 12];
        let opts = TypicalOptions {
            epsilon: 0.5,
            lambda: 4,
            stride: 4,
        };
        let r = typical_execution_check(&stats, &rates(1.0, 0.0, 1.0, 1.0), &opts).unwrap();
        // starts 1, 5, 9 with every end, then the remaining suffix starts
        assert_eq!(r.windows, 9 + 5 + 1 + 6);
        assert!(typical_execution_check(&stats[..3], &rates(1.0, 0.0, 1.0, 1.0), &opts).is_err());
    }
}
