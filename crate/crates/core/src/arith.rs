//! Small exact-arithmetic helpers used across the crate.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[inline]
pub fn checked_mul(a: i128, b: i128) -> Result<i128> {
    a.checked_mul(b).ok_or(Error::Overflow)
}

#[inline]
pub fn checked_add(a: i128, b: i128) -> Result<i128> {
    a.checked_add(b).ok_or(Error::Overflow)
}

/// Checked integer power, erroring out instead of wrapping.
pub fn checked_pow(base: i128, exp: u32) -> Result<i128> {
    let mut acc: i128 = 1;
    for _ in 0..exp {
        acc = checked_mul(acc, base)?;
    }
    Ok(acc)
}

pub fn gcd_i128(a: i128, b: i128) -> i128 {
    a.unsigned_abs().gcd(&b.unsigned_abs()) as i128
}

#[inline]
pub fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// gcd of all entries (non-negative; 0 for the zero vector).
pub fn content(v: &[i128]) -> i128 {
    let mut g: i128 = 0;
    for &c in v {
        g = gcd_i128(g, c);
        if g == 1 {
            break;
        }
    }
    g
}

pub fn is_primitive_vector(v: &[i128]) -> bool {
    content(v) == 1
}

/// Divide out the content and flip the sign so the first nonzero entry
/// is positive. Errors on the zero vector.
pub fn canonicalize(v: &[i128]) -> Result<Vec<i128>> {
    let g = content(v);
    if g == 0 {
        return Err(Error::NonPrimitiveVector);
    }
    let mut out: Vec<i128> = v.iter().map(|&c| c / g).collect();
    if let Some(first) = out.iter().find(|&&c| c != 0) {
        if *first < 0 {
            for c in &mut out {
                *c = -*c;
            }
        }
    }
    Ok(out)
}

pub fn norm_sq_i128(v: &[i128]) -> Result<i128> {
    let mut acc: i128 = 0;
    for &c in v {
        acc = checked_add(acc, checked_mul(c, c)?)?;
    }
    Ok(acc)
}

pub fn norm_sq_big(v: &[i128]) -> BigInt {
    let mut acc = BigInt::zero();
    for &c in v {
        let b = BigInt::from(c);
        acc += &b * &b;
    }
    acc
}

/// binomial(a, b) as u128; desk-scale arguments only.
pub fn binomial(a: u64, b: u64) -> u128 {
    if b > a {
        return 0;
    }
    let b = b.min(a - b);
    let mut num: u128 = 1;
    for i in 0..b {
        num = num * (a - i) as u128 / (i + 1) as u128;
    }
    num
}

/// Moebius function on 0..=n by linear sieve.
pub fn moebius_sieve(n: usize) -> Vec<i8> {
    let mut mu = vec![0i8; n + 1];
    if n >= 1 {
        mu[1] = 1;
    }
    let mut primes: Vec<usize> = Vec::new();
    let mut lp = vec![0usize; n + 1];
    for i in 2..=n {
        if lp[i] == 0 {
            lp[i] = i;
            primes.push(i);
            mu[i] = -1;
        }
        for &p in &primes {
            let ip = i.checked_mul(p).unwrap_or(usize::MAX);
            if p > lp[i] || ip > n {
                break;
            }
            lp[ip] = p;
            mu[ip] = if i % p == 0 { 0 } else { -mu[i] };
        }
    }
    mu
}

/// floor(sqrt(x)) for a non-negative rational: isqrt(p*q)/q.
pub fn floor_sqrt_ratio(x: &BigRational) -> BigInt {
    assert!(!x.is_negative(), "floor_sqrt_ratio of negative value");
    let p = x.numer();
    let q = x.denom();
    (p * q).sqrt().div_floor(q)
}

/// Largest integer s >= 0 with s^exp <= bound (bound >= 0, exp >= 1).
/// Used to turn a height bound into an integer squared-norm cutoff.
pub fn floor_root_of_ratio(bound: &BigRational, exp: u32) -> BigInt {
    assert!(exp >= 1);
    if bound.is_negative() {
        return BigInt::from(-1); // empty condition marker; callers guard
    }
    let n = bound.numer();
    let d = bound.denom();
    // nth root of floor(n/d), then fix up against the exact inequality.
    let mut s = n.div_floor(d).nth_root(exp);
    while &(&s + 1i32).pow(exp) * d <= *n {
        s += 1;
    }
    while s.pow(exp) * d > *n && s.is_positive() {
        s -= 1;
    }
    s
}

/// Parse "p", "p/q", or a finite decimal like "2.5" into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::InvalidInput(format!("cannot parse '{s}' as a rational"));
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| bad())?;
        let d: BigInt = den.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.trim_start().starts_with('-');
        let i: BigInt = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            int.parse().map_err(|_| bad())?
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let f: BigInt = frac.parse().map_err(|_| bad())?;
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let mag = i.abs() * &scale + f;
        let signed = if neg { -mag } else { mag };
        return Ok(BigRational::new(signed, scale));
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

pub fn rational_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Exact rational equal to the given float (every finite f64 is rational).
pub fn rational_from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x)
        .ok_or_else(|| Error::InvalidInput(format!("non-finite value {x}")))
}

/// Compensated (Kahan) summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}
