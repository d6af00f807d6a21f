//! Dyadic fixed-point enclosures.
//!
//! A value `v` is represented at `bits` fractional bits by integers
//! `lo`, `hi` with `lo / 2^bits <= v <= hi / 2^bits`. All rounding is
//! directed outward, so every enclosure returned here is rigorous.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Float, One, Signed, ToPrimitive, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enclosure {
    lo: BigInt,
    hi: BigInt,
    bits: u32,
}

impl Enclosure {
    pub fn new(lo: BigInt, hi: BigInt, bits: u32) -> Self {
        debug_assert!(lo <= hi);
        Self { lo, hi, bits }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn lo_raw(&self) -> &BigInt {
        &self.lo
    }

    pub fn hi_raw(&self) -> &BigInt {
        &self.hi
    }

    /// Sign of the enclosed value when it is decided, `None` when the
    /// enclosure straddles zero.
    pub fn sign(&self) -> Option<Ordering> {
        if self.lo.is_positive() {
            Some(Ordering::Greater)
        } else if self.hi.is_negative() {
            Some(Ordering::Less)
        } else if self.lo.is_zero() && self.hi.is_zero() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    /// Largest f64 not above the lower endpoint.
    pub fn lo_f64(&self) -> f64 {
        fixed_to_f64(&self.lo, self.bits, false)
    }

    /// Smallest f64 not below the upper endpoint.
    pub fn hi_f64(&self) -> f64 {
        fixed_to_f64(&self.hi, self.bits, true)
    }

    pub fn mid_f64(&self) -> f64 {
        0.5 * (self.lo_f64() + self.hi_f64())
    }

    pub fn width_f64(&self) -> f64 {
        fixed_to_f64(&(&self.hi - &self.lo), self.bits, true)
    }

    /// Width divided by the magnitude of the lower endpoint.
    pub fn relative_width(&self) -> f64 {
        let mag = self.lo_f64().abs().max(self.hi_f64().abs());
        if mag == 0.0 {
            return 0.0;
        }
        self.width_f64() / mag
    }

    /// True unless the enclosure is provably on one side of `x`.
    pub fn contains_f64(&self, x: f64) -> bool {
        !matches!(
            self.cmp_f64(x),
            Some(Ordering::Less) | Some(Ordering::Greater)
        )
    }

    /// Ordering of the enclosed value against `x`, if decided.
    pub fn cmp_f64(&self, x: f64) -> Option<Ordering> {
        let x_lo = f64_to_fixed(x, self.bits, false);
        let x_hi = f64_to_fixed(x, self.bits, true);
        if self.lo > x_hi {
            Some(Ordering::Greater)
        } else if self.hi < x_lo {
            Some(Ordering::Less)
        } else if self.lo == self.hi && x_lo == x_hi && self.lo == x_lo {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    pub fn sub(&self, other: &Enclosure) -> Enclosure {
        assert_eq!(self.bits, other.bits);
        Enclosure::new(&self.lo - &other.hi, &self.hi - &other.lo, self.bits)
    }
}

/// Shift a non-negative integer right, rounding up or down.
pub(crate) fn shr_round(x: &BigUint, k: u32, up: bool) -> BigUint {
    if k == 0 {
        return x.clone();
    }
    let q = x >> k as usize;
    if up && (&q << k as usize) != *x {
        q + 1u32
    } else {
        q
    }
}

fn shr_round_signed(x: &BigInt, k: u32, up: bool) -> BigInt {
    if k == 0 {
        return x.clone();
    }
    let d = BigInt::one() << k as usize;
    if up {
        x.div_ceil(&d)
    } else {
        x.div_floor(&d)
    }
}

/// Fixed-point product `a * b / 2^bits` with directed rounding.
pub(crate) fn mul_round(a: &BigUint, b: &BigUint, bits: u32, up: bool) -> BigUint {
    shr_round(&(a * b), bits, up)
}

/// Bound on `(x / 2^bits)^e * 2^bits` by repeated squaring; every
/// intermediate rounds in the same direction so the result is one-sided.
pub(crate) fn pow_bound(x: &BigUint, e: u64, bits: u32, up: bool) -> BigUint {
    let mut acc = BigUint::one() << bits as usize;
    let mut base = x.clone();
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_round(&acc, &base, bits, up);
        }
        e >>= 1;
        if e > 0 {
            base = mul_round(&base, &base, bits, up);
        }
    }
    acc
}

/// Fixed-point representation of a finite f64, rounded in the given direction.
pub fn f64_to_fixed(x: f64, bits: u32, up: bool) -> BigInt {
    assert!(x.is_finite(), "non-finite value in fixed-point conversion");
    if x == 0.0 {
        return BigInt::zero();
    }
    let (mant, exp, sign) = Float::integer_decode(x);
    let m = BigInt::from(mant) * BigInt::from(sign);
    let shift = exp as i64 + bits as i64;
    if shift >= 0 {
        m << shift as usize
    } else {
        shr_round_signed(&m, (-shift) as u32, up)
    }
}

/// Scale `f` by `2^e` without intermediate overflow or underflow.
fn ldexp(mut f: f64, mut e: i64) -> f64 {
    while e > 1000 {
        f *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        f *= 2f64.powi(-1000);
        e += 1000;
    }
    f * 2f64.powi(e as i32)
}

/// f64 bound on `m / 2^bits`, rounded outward by at least one ulp.
pub fn fixed_to_f64(m: &BigInt, bits: u32, up: bool) -> f64 {
    if m.is_zero() {
        return 0.0;
    }
    let len = m.bits();
    let (top, shift) = if len > 64 {
        let k = (len - 64) as u32;
        (shr_round_signed(m, k, up), k as i64)
    } else {
        (m.clone(), 0)
    };
    let f = top.to_f64().expect("64-bit value fits f64");
    let v = ldexp(f, shift - bits as i64);
    if up {
        v.next_up()
    } else {
        v.next_down()
    }
}

/// Floor or ceiling of `r * 2^bits`.
pub(crate) fn rational_to_fixed(r: &BigRational, bits: u32, up: bool) -> BigInt {
    let num = r.numer() << bits as usize;
    let den = r.denom();
    if up {
        num.div_ceil(den)
    } else {
        num.div_floor(den)
    }
}

/// Enclosure `[lo, hi]` of `P^(1/n)` at `bits` fractional bits.
pub(crate) fn root_enclosure(prime: u64, root: u32, bits: u32) -> (BigUint, BigUint) {
    let one = BigUint::one() << bits as usize;
    let target = BigUint::from(prime) << bits as usize;
    if root == 1 {
        return (target.clone(), target);
    }
    let est = ((prime as f64).ln() / root as f64).exp();
    let mut x = f64_to_fixed(est, bits, false)
        .to_biguint()
        .unwrap_or_else(|| one.clone());
    if bits > 60 {
        x = newton_root(x, &target, root, bits);
    }
    let mut delta = BigUint::from(2u32);
    loop {
        let lo = if x > delta.clone() + &one {
            &x - &delta
        } else {
            one.clone()
        };
        let hi = (&x + &delta).min(target.clone());
        let lo_ok = pow_bound(&lo, root as u64, bits, true) <= target;
        let hi_ok = pow_bound(&hi, root as u64, bits, false) >= target;
        if lo_ok && hi_ok {
            return (lo, hi);
        }
        delta <<= 2usize;
    }
}

/// Fixed-point Newton iteration for `x^n = target`; the result is an
/// approximation only and is verified by the caller.
fn newton_root(mut x: BigUint, target: &BigUint, n: u32, bits: u32) -> BigUint {
    let nb = BigUint::from(n);
    for _ in 0..64 {
        let xn1 = pow_bound(&x, n as u64 - 1, bits, false);
        if xn1.is_zero() {
            break;
        }
        let xn = mul_round(&xn1, &x, bits, false);
        let denom = &nb * &xn1;
        let (step, down) = if xn >= *target {
            (((&xn - target) << bits as usize) / &denom, true)
        } else {
            (((target - &xn) << bits as usize) / &denom, false)
        };
        if step.is_zero() {
            break;
        }
        let small = step <= BigUint::one();
        if down {
            if step >= x {
                break;
            }
            x -= step;
        } else {
            x += step;
        }
        if small {
            break;
        }
    }
    x
}

/// Sign of a rational value.
pub(crate) fn rational_sign(r: &BigRational) -> Ordering {
    match r.numer().sign() {
        Sign::Minus => Ordering::Less,
        Sign::NoSign => Ordering::Equal,
        Sign::Plus => Ordering::Greater,
    }
}

/// Outward-rounded f64 interval used as a cheap first pass before any
/// big-integer work.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct F64Interval {
    pub lo: f64,
    pub hi: f64,
}

impl F64Interval {
    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    /// Sum of non-negative intervals.
    pub fn add(self, o: Self) -> Self {
        Self {
            lo: (self.lo + o.lo).next_down().max(0.0),
            hi: (self.hi + o.hi).next_up(),
        }
    }

    /// Product of non-negative intervals.
    pub fn mul(self, o: Self) -> Self {
        Self {
            lo: (self.lo * o.lo).next_down().max(0.0),
            hi: (self.hi * o.hi).next_up(),
        }
    }

    pub fn scale(self, k: f64) -> Self {
        self.mul(Self::point(k))
    }

    pub fn cmp(self, o: Self) -> Option<Ordering> {
        if self.lo > o.hi {
            Some(Ordering::Greater)
        } else if self.hi < o.lo {
            Some(Ordering::Less)
        } else {
            None
        }
    }
}
