use super::AnalysisError;
use crate::blocktree::interval::F64Interval;
use crate::blocktree::WeightCoefficient;
use crate::mining::{derived_rates, ProtocolParams};

/// `K` together with the piecewise profile `k(i, λ)` it sums.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KProfile {
    /// Midpoint of `enclosure`.
    pub value: f64,
    pub enclosure: F64Interval,
    /// Number of summed levels, `⌈(1+ε)(γ+β)λ⌉`.
    pub terms: u64,
    /// First index with `k(i, λ) = (1+ε)α` (clamped to at least 1).
    pub threshold: u64,
    /// `(1+ε)α`.
    pub upper_k: f64,
}

impl KProfile {
    pub fn k(&self, i: u64) -> f64 {
        if i < self.threshold {
            1.0
        } else {
            self.upper_k
        }
    }
}

fn ceil_u64(x: f64) -> u64 {
    if x <= 0.0 {
        0
    } else {
        x.ceil() as u64
    }
}

fn c_interval(c: &WeightCoefficient) -> Result<F64Interval, AnalysisError> {
    if c.is_limit() {
        return Err(AnalysisError::LimitCoefficient);
    }
    let (lo, hi) = c.f64_bounds()?;
    Ok(F64Interval::new(lo, hi))
}

/// `K = Σ_{i=1}^{⌈(1+ε)(γ+β)λ⌉} k(i, λ) c^i` with `k = 1` below the threshold
/// index and `(1+ε)α` from it on, summed in outward-rounded intervals.
pub fn compute_k(
    params: &ProtocolParams,
    c: &WeightCoefficient,
) -> Result<KProfile, AnalysisError> {
    let cw = c_interval(c)?;
    let r = derived_rates(params);
    let eps = params.epsilon;
    let lambda = params.lambda as f64;
    let terms = ceil_u64((1.0 + eps) * (r.gamma + r.beta) * lambda);
    let forked_levels = if r.gamma > 0.0 {
        ceil_u64((1.0 + eps) * (r.alpha - r.gamma) * lambda / ((1.0 + eps) * r.gamma))
    } else {
        0
    };
    let threshold = terms.saturating_sub(forked_levels).max(1);
    let upper_k = (1.0 + eps) * r.alpha;
    let mut sum = F64Interval::point(0.0);
    let mut pow = F64Interval::point(1.0);
    let profile = KProfile {
        value: 0.0,
        enclosure: sum,
        terms,
        threshold,
        upper_k,
    };
    for i in 1..=terms {
        pow = pow.mul(cw);
        sum = sum.add(pow.scale(profile.k(i)));
    }
    Ok(KProfile {
        value: 0.5 * (sum.lo + sum.hi),
        enclosure: sum,
        ..profile
    })
}

/// Parameters of the fresh-block window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FreshParams {
    /// The smaller of `r_from_one` and `r_from_zero`.
    pub r: u64,
    /// Largest `R` with `Σ_{i=1}^{R+1} c^i ≤ K` (0 when none).
    pub r_from_one: u64,
    /// Largest `R` with `Σ_{i=0}^{R} c^i ≤ K` (0 when none).
    pub r_from_zero: u64,
    pub r_hat: u64,
    /// `(R̂² + 2R̂) / ((1-ε) 2γ) + λR`.
    pub u: f64,
    /// `u` rounded up to whole rounds.
    pub u_rounds: u64,
}

/// Largest `R` with `Σ_{i=first}^{first+R} c^i ≤ k` by direct scan, or 0
/// when even `R = 0` exceeds `k`.
fn scan_r(c: f64, k: f64, first: i32) -> u64 {
    let mut pow = c.powi(first);
    let mut sum = pow;
    if sum > k {
        return 0;
    }
    let mut r = 0u64;
    loop {
        pow *= c;
        let next = sum + pow;
        if next > k || !next.is_finite() || r >= 1 << 40 {
            return r;
        }
        sum = next;
        r += 1;
    }
}

pub fn compute_r_u(
    params: &ProtocolParams,
    c: &WeightCoefficient,
    k: f64,
) -> Result<FreshParams, AnalysisError> {
    if c.is_limit() {
        return Err(AnalysisError::LimitCoefficient);
    }
    let cf = c.approx();
    let r_from_one = scan_r(cf, k, 1);
    let r_from_zero = scan_r(cf, k, 0);
    let r = r_from_one.min(r_from_zero);
    let r_hat = r / 2;
    let gamma = derived_rates(params).gamma;
    let rh = r_hat as f64;
    let mut u = params.lambda as f64 * r as f64;
    if r_hat > 0 {
        u += (rh * rh + 2.0 * rh) / ((1.0 - params.epsilon) * 2.0 * gamma);
    }
    Ok(FreshParams {
        r,
        r_from_one,
        r_from_zero,
        r_hat,
        u,
        u_rounds: u.ceil() as u64,
    })
}

/// Duration bound of a balance attack.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BalanceBound {
    /// Real solution `R` of `B_τ = (c^{Ra} - 1) / (c^a - 1)`, `a = (1+ε)λβ`.
    pub r: f64,
    /// `⌈R⌉ λ`.
    pub rounds: u64,
    /// `R` with `B_τ` replaced by its typical-execution ceiling
    /// `(1+ε)pqtτ`; present when `τ ≥ λ`.
    pub r_typical: Option<f64>,
}

fn balance_r(b: f64, c: f64, a: f64) -> f64 {
    if b <= 0.0 {
        return 0.0;
    }
    if c.is_infinite() {
        return 1.0;
    }
    if a == 0.0 || (c - 1.0).abs() < 1e-15 {
        return b;
    }
    // c^{Ra} = B (c^a - 1) + 1
    let lnc = c.ln();
    let growth = (a * lnc).exp_m1();
    if growth.is_infinite() {
        // c^a overflows: R = 1 + log_c(B)/a up to a vanishing term
        return 1.0 + b.ln() / (a * lnc);
    }
    (b * growth).ln_1p() / (a * lnc)
}

pub fn balance_bound(
    b_tau: f64,
    params: &ProtocolParams,
    c: &WeightCoefficient,
    tau: u64,
) -> Result<BalanceBound, AnalysisError> {
    if !(b_tau >= 0.0) {
        return Err(AnalysisError::Argument(format!("B_tau = {b_tau}")));
    }
    let beta = derived_rates(params).beta;
    let a = (1.0 + params.epsilon) * params.lambda as f64 * beta;
    let cf = if c.is_limit() {
        f64::INFINITY
    } else {
        c.approx()
    };
    let r = balance_r(b_tau, cf, a);
    let r_typical = (tau >= params.lambda).then(|| {
        let ceiling =
            (1.0 + params.epsilon) * params.p * params.q as f64 * params.t as f64 * tau as f64;
        balance_r(ceiling, cf, a)
    });
    Ok(BalanceBound {
        r,
        rounds: (r - 1e-12).ceil().max(0.0) as u64 * params.lambda,
        r_typical,
    })
}

/// `⌊((1-ε)γ_u - (1+ε)β) s⌋`, the number of levels in the weight-growth
/// amount over `s` rounds (0 when the rate is not positive).
pub fn growth_levels(params: &ProtocolParams, s: u64) -> u64 {
    let r = derived_rates(params);
    let g = (1.0 - params.epsilon) * r.gamma_u - (1.0 + params.epsilon) * r.beta;
    let v = g * s as f64;
    if v <= 0.0 {
        0
    } else {
        v.floor() as u64
    }
}

/// `τ = Σ_{i=1}^{growth_levels} c^i`.
pub fn growth_tau(
    params: &ProtocolParams,
    c: &WeightCoefficient,
    s: u64,
) -> Result<f64, AnalysisError> {
    if c.is_limit() {
        return Err(AnalysisError::LimitCoefficient);
    }
    let cf = c.approx();
    let mut sum = 0.0;
    let mut pow = 1.0;
    for _ in 0..growth_levels(params, s) {
        pow *= cf;
        sum += pow;
    }
    Ok(sum)
}

/// `(N / ℓ) Σ_{i=1}^{ℓ} c^{i + ℓ0}`.
pub fn expected_subtree_weight(n: u64, ell: u64, ell0: u64, c: f64) -> Result<f64, AnalysisError> {
    if ell == 0 || n < ell {
        return Err(AnalysisError::Argument(format!(
            "need N >= ell >= 1, got N = {n}, ell = {ell}"
        )));
    }
    let mut pow = c.powf(ell0 as f64);
    let mut sum = 0.0;
    for _ in 0..ell {
        pow *= c;
        sum += pow;
    }
    Ok(n as f64 / ell as f64 * sum)
}

/// Every closed-form quantity of one configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivedParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub gamma_u: f64,
    pub f: f64,
    /// Chain-growth rate `(1-ε)γ_u - (1+ε)β`.
    pub g: f64,
    pub k: KProfile,
    pub fresh: FreshParams,
    /// Weight-growth amount over `λ` rounds.
    pub tau_growth: f64,
    /// `α(1 - ψ_f) > β` with `ψ_f = 1 - γ_u/γ`.
    pub throughput_ok: bool,
}

impl DerivedParams {
    pub fn is_healthy(&self) -> bool {
        self.g > 0.0
    }
}

pub fn derive_params(
    params: &ProtocolParams,
    c: &WeightCoefficient,
) -> Result<DerivedParams, AnalysisError> {
    let r = derived_rates(params);
    let g = (1.0 - params.epsilon) * r.gamma_u - (1.0 + params.epsilon) * r.beta;
    let k = compute_k(params, c)?;
    let fresh = compute_r_u(params, c, k.value)?;
    let psi = super::psi_f_expected(params);
    Ok(DerivedParams {
        alpha: r.alpha,
        beta: r.beta,
        gamma: r.gamma,
        gamma_u: r.gamma_u,
        f: r.f,
        g,
        k,
        fresh,
        tau_growth: growth_tau(params, c, params.lambda)?,
        throughput_ok: r.alpha * (1.0 - psi) > r.beta,
    })
}
