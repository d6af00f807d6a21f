//! Polynomial subtree weights and the weight coefficient `c`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use super::interval::{
    fixed_to_f64, rational_sign, rational_to_fixed, root_enclosure, Enclosure, F64Interval,
};

/// Cap on the escalation of precision for exact comparisons.
pub const MAX_EXACT_BITS: u32 = 1 << 16;

/// Cap used by numeric-only comparisons before declaring a tie.
pub const NUMERIC_CAP_BITS: u32 = 1024;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WeightError {
    #[error("the longest-chain limit has no numeric weight")]
    LimitMode,
    #[error("difference of degree {degree} may vanish at a root of index {root}")]
    NotExact { degree: usize, root: u32 },
    #[error("comparison undecided at {bits} bits")]
    PrecisionExhausted { bits: u32 },
    #[error("invalid coefficient: {0}")]
    InvalidCoefficient(String),
}

/// Number of blocks at each relative depth of a subtree.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct WeightPoly(Vec<u64>);

impl WeightPoly {
    pub fn new(coeffs: Vec<u64>) -> Self {
        let mut p = WeightPoly(coeffs);
        p.trim();
        p
    }

    /// Polynomial of a single block.
    pub fn unit() -> Self {
        WeightPoly(vec![1])
    }

    /// Polynomial of a bare chain with `len` blocks.
    pub fn chain(len: usize) -> Self {
        WeightPoly(vec![1; len])
    }

    fn trim(&mut self) {
        while self.0.len() > 1 && *self.0.last().unwrap() == 0 {
            self.0.pop();
        }
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.0
    }

    /// Highest relative depth with a block, or 0 for the empty polynomial.
    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    /// True when every level from 0 to the degree holds a block.
    pub fn is_connected(&self) -> bool {
        !self.0.is_empty() && self.0.iter().all(|&a| a > 0)
    }

    /// Adds one block at relative depth `level`.
    pub fn add_block(&mut self, level: usize) {
        if self.0.len() <= level {
            self.0.resize(level + 1, 0);
        }
        self.0[level] += 1;
    }

    pub fn add(&self, other: &WeightPoly) -> WeightPoly {
        let mut v = vec![0; self.0.len().max(other.0.len())];
        for (i, a) in self.0.iter().enumerate() {
            v[i] += a;
        }
        for (i, a) in other.0.iter().enumerate() {
            v[i] += a;
        }
        WeightPoly::new(v)
    }

    /// Multiplies by `c^k`.
    pub fn shift(&self, k: usize) -> WeightPoly {
        let mut v = vec![0; k];
        v.extend_from_slice(&self.0);
        WeightPoly::new(v)
    }
}

impl From<Vec<u64>> for WeightPoly {
    fn from(v: Vec<u64>) -> Self {
        WeightPoly::new(v)
    }
}

impl fmt::Display for WeightPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "]")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoefficientKind {
    /// `prime^(1/root)`.
    AlgebraicRoot {
        prime: u64,
        root: u32,
    },
    Rational(BigRational),
    GhostOne,
    BitcoinLimit,
}

/// How a comparison treats differences that may vanish at `c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Exactness {
    /// Error out unless the sign is provably decided.
    #[default]
    Exact,
    /// Escalate up to the given precision and report Equal if still undecided.
    Numeric { max_bits: u32 },
}

impl Exactness {
    pub fn numeric() -> Self {
        Exactness::Numeric {
            max_bits: NUMERIC_CAP_BITS,
        }
    }
}

#[derive(Default)]
struct RootCache {
    f64_bounds: OnceLock<(f64, f64)>,
    fixed: Mutex<BTreeMap<u32, (BigUint, BigUint)>>,
}

/// The weight coefficient `c` of the weighting `c^depth`.
#[derive(Clone)]
pub struct WeightCoefficient {
    kind: CoefficientKind,
    precision_hint: u32,
    cache: Arc<RootCache>,
}

impl PartialEq for WeightCoefficient {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.precision_hint == other.precision_hint
    }
}

impl fmt::Debug for WeightCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightCoefficient")
            .field("kind", &self.kind)
            .field("precision_hint", &self.precision_hint)
            .finish()
    }
}

impl fmt::Display for WeightCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            CoefficientKind::AlgebraicRoot { prime, root } => write!(f, "{prime}^(1/{root})"),
            CoefficientKind::Rational(r) => write!(f, "{r}"),
            CoefficientKind::GhostOne => write!(f, "1"),
            CoefficientKind::BitcoinLimit => write!(f, "inf"),
        }
    }
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut a: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mulmod(r, a);
            }
            a = mulmod(a, a);
            e >>= 1;
        }
        r
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

impl WeightCoefficient {
    pub const DEFAULT_PRECISION: u32 = 64;

    fn from_kind(kind: CoefficientKind) -> Self {
        WeightCoefficient {
            kind,
            precision_hint: Self::DEFAULT_PRECISION,
            cache: Arc::new(RootCache::default()),
        }
    }

    pub fn algebraic_root(prime: u64, root: u32) -> Result<Self, WeightError> {
        if !is_prime(prime) {
            return Err(WeightError::InvalidCoefficient(format!(
                "{prime} is not prime"
            )));
        }
        if root == 0 {
            return Err(WeightError::InvalidCoefficient(
                "root index must be positive".into(),
            ));
        }
        Ok(Self::from_kind(CoefficientKind::AlgebraicRoot {
            prime,
            root,
        }))
    }

    pub fn rational(value: BigRational) -> Result<Self, WeightError> {
        if value < BigRational::one() {
            return Err(WeightError::InvalidCoefficient(format!(
                "{value} is below 1"
            )));
        }
        Ok(Self::from_kind(CoefficientKind::Rational(value)))
    }

    pub fn integer(value: u64) -> Result<Self, WeightError> {
        Self::rational(BigRational::from_integer(BigInt::from(value)))
    }

    pub fn ghost() -> Self {
        Self::from_kind(CoefficientKind::GhostOne)
    }

    pub fn bitcoin() -> Self {
        Self::from_kind(CoefficientKind::BitcoinLimit)
    }

    pub fn with_precision(mut self, bits: u32) -> Self {
        self.precision_hint = bits.max(16);
        self
    }

    pub fn kind(&self) -> &CoefficientKind {
        &self.kind
    }

    pub fn precision_hint(&self) -> u32 {
        self.precision_hint
    }

    pub fn is_limit(&self) -> bool {
        self.kind == CoefficientKind::BitcoinLimit
    }

    pub fn is_one(&self) -> bool {
        match &self.kind {
            CoefficientKind::GhostOne => true,
            CoefficientKind::Rational(r) => r.is_one(),
            _ => false,
        }
    }

    /// Nearest f64 to `c`; infinite for the limit.
    pub fn approx(&self) -> f64 {
        match &self.kind {
            CoefficientKind::BitcoinLimit => f64::INFINITY,
            _ => {
                let (lo, hi) = self.f64_bounds().unwrap();
                0.5 * (lo + hi)
            }
        }
    }

    /// Rigorous f64 bounds on `c`.
    pub fn f64_bounds(&self) -> Result<(f64, f64), WeightError> {
        match &self.kind {
            CoefficientKind::BitcoinLimit => Err(WeightError::LimitMode),
            CoefficientKind::GhostOne => Ok((1.0, 1.0)),
            _ => Ok(*self.cache.f64_bounds.get_or_init(|| {
                let (lo, hi) = self.fixed_bounds(64).unwrap();
                let lo = fixed_to_f64(&BigInt::from(lo), 64, false).max(1.0);
                let hi = fixed_to_f64(&BigInt::from(hi), 64, true);
                (lo, hi)
            })),
        }
    }

    /// Fixed-point bounds `lo <= c * 2^bits <= hi`.
    pub(crate) fn fixed_bounds(&self, bits: u32) -> Result<(BigUint, BigUint), WeightError> {
        match &self.kind {
            CoefficientKind::BitcoinLimit => Err(WeightError::LimitMode),
            CoefficientKind::GhostOne => {
                let one = BigUint::one() << bits as usize;
                Ok((one.clone(), one))
            }
            CoefficientKind::Rational(r) => Ok((
                rational_to_fixed(r, bits, false).to_biguint().unwrap(),
                rational_to_fixed(r, bits, true).to_biguint().unwrap(),
            )),
            CoefficientKind::AlgebraicRoot { prime, root } => {
                let mut cache = self.cache.fixed.lock().unwrap();
                if let Some(v) = cache.get(&bits) {
                    return Ok(v.clone());
                }
                let v = root_enclosure(*prime, *root, bits);
                cache.insert(bits, v.clone());
                Ok(v)
            }
        }
    }
}

/// Rigorous enclosure of `sum a_i c^i` at `bits` fractional bits.
pub fn evaluate_weight(
    poly: &WeightPoly,
    c: &WeightCoefficient,
    bits: u32,
) -> Result<Enclosure, WeightError> {
    let coeffs: Vec<BigInt> = poly.coeffs().iter().map(|&a| BigInt::from(a)).collect();
    evaluate_signed(&coeffs, c, bits)
}

fn evaluate_signed(
    coeffs: &[BigInt],
    c: &WeightCoefficient,
    bits: u32,
) -> Result<Enclosure, WeightError> {
    let (cl, ch) = c.fixed_bounds(bits)?;
    let cl = BigInt::from(cl);
    let ch = BigInt::from(ch);
    let one = BigInt::one() << bits as usize;
    let mut pl = one.clone();
    let mut ph = one;
    let mut lo = BigInt::zero();
    let mut hi = BigInt::zero();
    let last = coeffs.len().saturating_sub(1);
    for (i, d) in coeffs.iter().enumerate() {
        if d.sign() == num_bigint::Sign::Plus {
            lo += d * &pl;
            hi += d * &ph;
        } else if d.sign() == num_bigint::Sign::Minus {
            lo += d * &ph;
            hi += d * &pl;
        }
        if i < last {
            pl = (&pl * &cl) >> bits as usize;
            let prod = &ph * &ch;
            let q: BigInt = &prod >> bits as usize;
            ph = if (&q << bits as usize) == prod {
                q
            } else {
                q + 1
            };
        }
    }
    Ok(Enclosure::new(lo, hi, bits))
}

/// f64 enclosure of `sum a_i c^(i - scale_deg)` with `c` in `[c_lo, c_hi]`.
///
/// Normalizing by the top degree keeps the values finite for deep trees.
pub fn normalized_f64(coeffs: &[u64], scale_deg: usize, c_lo: f64, c_hi: f64) -> F64Interval {
    let x = F64Interval::new((1.0 / c_hi).next_down(), (1.0 / c_lo).next_up().min(1.0));
    let mut acc = F64Interval::point(0.0);
    for i in 0..=scale_deg {
        acc = acc.mul(x);
        let a = coeffs.get(i).copied().unwrap_or(0) as f64;
        acc = acc.add(F64Interval::point(a));
    }
    acc
}

fn difference(p1: &WeightPoly, p2: &WeightPoly) -> Vec<i128> {
    let n = p1.coeffs().len().max(p2.coeffs().len());
    (0..n)
        .map(|i| {
            p1.coeffs().get(i).copied().unwrap_or(0) as i128
                - p2.coeffs().get(i).copied().unwrap_or(0) as i128
        })
        .collect()
}

/// Exact sign of `p1(c) - p2(c)`.
pub fn compare_weight(
    p1: &WeightPoly,
    p2: &WeightPoly,
    c: &WeightCoefficient,
) -> Result<Ordering, WeightError> {
    compare_weight_with(p1, p2, c, Exactness::Exact)
}

pub fn compare_weight_with(
    p1: &WeightPoly,
    p2: &WeightPoly,
    c: &WeightCoefficient,
    exactness: Exactness,
) -> Result<Ordering, WeightError> {
    if c.is_limit() {
        return Err(WeightError::LimitMode);
    }
    if p1 == p2 {
        return Ok(Ordering::Equal);
    }
    let diff = difference(p1, p2);
    let Some(first) = diff.iter().position(|&d| d != 0) else {
        return Ok(Ordering::Equal);
    };
    let last = diff.iter().rposition(|&d| d != 0).unwrap();
    let reduced = &diff[first..=last];

    match c.kind() {
        CoefficientKind::GhostOne => {
            let s: i128 = reduced.iter().sum();
            Ok(s.cmp(&0))
        }
        CoefficientKind::Rational(r) => {
            if let Some(o) = screen_f64(p1, p2, c) {
                return Ok(o);
            }
            let mut acc = BigRational::zero();
            for d in reduced.iter().rev() {
                acc = acc * r + BigRational::from_integer(BigInt::from(*d));
            }
            Ok(rational_sign(&acc))
        }
        CoefficientKind::AlgebraicRoot { prime, root } => {
            let degree = last - first;
            let root = *root as usize;
            let guaranteed = if degree < root {
                true
            } else if degree == root {
                // k * (X^n - P) is the only shape that vanishes at c
                let lead = reduced[degree];
                let is_multiple = reduced[1..degree].iter().all(|&d| d == 0)
                    && reduced[0] == -(*prime as i128) * lead;
                if is_multiple {
                    return Ok(Ordering::Equal);
                }
                true
            } else {
                false
            };
            let max_bits = match (guaranteed, exactness) {
                (true, _) => MAX_EXACT_BITS,
                (false, Exactness::Numeric { max_bits }) => max_bits,
                (false, Exactness::Exact) => {
                    return Err(WeightError::NotExact {
                        degree,
                        root: root as u32,
                    })
                }
            };
            if let Some(o) = screen_f64(p1, p2, c) {
                return Ok(o);
            }
            let coeffs: Vec<BigInt> = reduced.iter().map(|&d| BigInt::from(d)).collect();
            let mut bits = c.precision_hint();
            loop {
                let e = evaluate_signed(&coeffs, c, bits)?;
                if let Some(o) = e.sign() {
                    if o != Ordering::Equal {
                        return Ok(o);
                    }
                }
                if bits >= max_bits {
                    return if guaranteed {
                        Err(WeightError::PrecisionExhausted { bits })
                    } else {
                        Ok(Ordering::Equal)
                    };
                }
                bits = bits.saturating_mul(2).min(max_bits);
            }
        }
        CoefficientKind::BitcoinLimit => unreachable!(),
    }
}

/// Cheap f64 decision, `None` when the outward-rounded intervals overlap.
fn screen_f64(p1: &WeightPoly, p2: &WeightPoly, c: &WeightCoefficient) -> Option<Ordering> {
    let (lo, hi) = c.f64_bounds().ok()?;
    let deg = p1.degree().max(p2.degree());
    let a = normalized_f64(p1.coeffs(), deg, lo, hi);
    let b = normalized_f64(p2.coeffs(), deg, lo, hi);
    a.cmp(b)
}

/// Ordering of `poly(c)` against a real threshold, deciding ties numerically.
pub fn compare_to_threshold(
    poly: &WeightPoly,
    shift: usize,
    c: &WeightCoefficient,
    threshold: f64,
) -> Result<Ordering, WeightError> {
    if c.is_limit() {
        return Err(WeightError::LimitMode);
    }
    if threshold <= 0.0 {
        return Ok(Ordering::Greater);
    }
    let (lo, hi) = c.f64_bounds()?;
    let deg = poly.degree();
    let norm = normalized_f64(poly.coeffs(), deg, lo, hi);
    let top = (deg + shift) as f64;
    let llo = norm.lo.ln() + top * lo.ln();
    let lhi = norm.hi.ln() + top * hi.ln();
    let lt = threshold.ln();
    let margin = 1e-12 * (1.0 + lt.abs().max(llo.abs()));
    if llo - margin > lt {
        return Ok(Ordering::Greater);
    }
    if lhi + margin < lt {
        return Ok(Ordering::Less);
    }
    let shifted = poly.shift(shift);
    let mut bits = c.precision_hint();
    loop {
        let e = evaluate_weight(&shifted, c, bits)?;
        if let Some(o) = e.cmp_f64(threshold) {
            return Ok(o);
        }
        if bits >= NUMERIC_CAP_BITS {
            return Ok(Ordering::Equal);
        }
        bits *= 2;
    }
}

/// f64 approximation of `poly(c)`; may overflow to infinity.
pub fn approx_weight(poly: &WeightPoly, c: &WeightCoefficient) -> f64 {
    let cv = c.approx();
    let mut acc = 0.0;
    for &a in poly.coeffs().iter().rev() {
        acc = acc * cv + a as f64;
    }
    acc
}

/// `sum a_i c^i` as an exact rational, for rational coefficients.
pub fn exact_rational_weight(poly: &WeightPoly, c: &WeightCoefficient) -> Option<BigRational> {
    let r = match c.kind() {
        CoefficientKind::Rational(r) => r.clone(),
        CoefficientKind::GhostOne => BigRational::one(),
        _ => return None,
    };
    let mut acc = BigRational::zero();
    for &a in poly.coeffs().iter().rev() {
        acc = acc * &r + BigRational::from_integer(BigInt::from(a));
    }
    Some(acc)
}
