//! Averaged point counts over the space of hypersurfaces.
//!
//! The total S(A, B) = sum over hypersurfaces of coefficient norm <= A of
//! the number of their rational points of height <= B is computed two
//! independent ways: directly (enumerate hypersurfaces, count points on
//! each) and dually (for every point x of height <= B, count primitive
//! integer vectors orthogonal to the Veronese coordinates of x inside the
//! coefficient ball, then divide by four for the two signs on each side).
//! The two routes must agree exactly; their agreement is the strongest
//! oracle in the test suite.
//!
//! The module also evaluates the leading constant of the averaged
//! asymptotic: a product of zeta factors, a ratio of consecutive unit-ball
//! volumes, and the integral of 1 / ||nu(t)|| over the unit ball, the
//! latter by spherical Monte Carlo after the radial part is integrated
//! analytically.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::arith::{floor_root_of_ratio, gcd_u64, KahanSum};
use crate::error::{Budget, Error, Result};
use crate::hypersurface::{canonical_primitive_vectors, enumerate_space, sample_space, PointTable};
use crate::lattice::{kernel_lattice, IntegralLattice};
use crate::monomials::{monomial_count, MonomialBasis};

/// Exact averaged count over a full coefficient ball.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedCount {
    pub degree: u32,
    pub dimension: usize,
    pub coeff_bound: BigRational,
    pub height_bound: BigRational,
    /// S = total number of (hypersurface, point) incidences; integral when
    /// computed directly, a quarter-integer by construction when computed
    /// dually.
    pub total: BigRational,
    pub space_size: u128,
    pub average: BigRational,
}

fn height_exponent(d: u32, n: usize) -> Result<u32> {
    if n < d as usize {
        return Err(Error::InvalidInput(format!("need n >= d, got n = {n}, d = {d}")));
    }
    Ok((n + 1 - d as usize) as u32)
}

/// Direct route: sum point counts over every hypersurface in the ball.
pub fn s_direct(
    d: u32,
    n: usize,
    coeff_bound: &BigRational,
    height_bound: &BigRational,
    budget: &Budget,
) -> Result<AveragedCount> {
    let exp = height_exponent(d, n)?;
    let surfaces = enumerate_space(d, n, coeff_bound, budget)?;
    let basis = MonomialBasis::new(d, n)?;
    let max_norm_sq = floor_root_of_ratio(&(height_bound * height_bound), exp)
        .to_i64()
        .ok_or(Error::Overflow)?;
    let table = PointTable::build(&basis, max_norm_sq, budget)?;
    let counts: Vec<u64> = surfaces
        .par_iter()
        .map(|v| table.count_zeros(v.coeffs()))
        .collect::<Result<_>>()?;
    let total: u128 = counts.iter().map(|&c| c as u128).sum();
    let space_size = surfaces.len() as u128;
    let total = BigRational::from_integer(BigInt::from(total));
    let average = &total / BigRational::from_integer(BigInt::from(space_size));
    Ok(AveragedCount {
        degree: d,
        dimension: n,
        coeff_bound: coeff_bound.clone(),
        height_bound: height_bound.clone(),
        total,
        space_size,
        average,
    })
}

/// Dual route: for every point of bounded height, count primitive
/// coefficient vectors vanishing on it inside the coefficient ball.
pub fn s_dual(
    d: u32,
    n: usize,
    coeff_bound: &BigRational,
    height_bound: &BigRational,
    budget: &Budget,
) -> Result<AveragedCount> {
    let exp = height_exponent(d, n)?;
    let basis = MonomialBasis::new(d, n)?;
    let max_norm_sq = floor_root_of_ratio(&(height_bound * height_bound), exp)
        .to_i64()
        .ok_or(Error::Overflow)?;
    let points = canonical_primitive_vectors(n + 1, max_norm_sq, budget)?;
    let radius_sq = coeff_bound * coeff_bound;

    // Each canonical point stands for the pair {x, -x}, whose orthogonal
    // lattices coincide; the full signed sum is twice this one.
    let signed_half: u128 = points
        .par_iter()
        .map(|(_, x)| -> Result<u128> {
            let coords: Vec<i128> = x.iter().map(|&v| v as i128).collect();
            let nu = basis.veronese_embed(&coords)?;
            let lattice = kernel_lattice(&[nu])?;
            lattice.count_primitive_points_moebius_sq(&radius_sq, budget)
        })
        .try_reduce(|| 0u128, |a, b| Ok(a + b))?;

    let total = BigRational::new(BigInt::from(signed_half) * 2, BigInt::from(4));
    let space_size = space_size(d, n, coeff_bound, budget)?;
    let average = &total / BigRational::from_integer(BigInt::from(space_size));
    Ok(AveragedCount {
        degree: d,
        dimension: n,
        coeff_bound: coeff_bound.clone(),
        height_bound: height_bound.clone(),
        total,
        space_size,
        average,
    })
}

/// Exact number of hypersurfaces with coefficient norm <= bound: half the
/// primitive vectors of the coefficient lattice in the ball.
pub fn space_size(d: u32, n: usize, coeff_bound: &BigRational, budget: &Budget) -> Result<u128> {
    let dim = monomial_count(d, n) as usize;
    let full = IntegralLattice::standard(dim);
    let prim = full.count_primitive_points_moebius_sq(&(coeff_bound * coeff_bound), budget)?;
    Ok(prim / 2)
}

/// Sum of 1 / ||nu(x)|| over primitive x (both signs) of height at most
/// `height_bound`, by compensated floating summation over exact integer
/// squared norms.
///
/// The enumeration folds the full symmetry of the summand: ||nu(x)|| is
/// invariant under coordinate permutations and sign flips, so only sorted
/// non-negative representatives are visited, weighted by orbit size.
pub fn t_sum(d: u32, n: usize, height_bound: &BigRational) -> Result<f64> {
    let exp = height_exponent(d, n)?;
    if height_bound < &BigRational::from_integer(BigInt::from(1)) {
        return Err(Error::InvalidInput("height bound must be >= 1".into()));
    }
    let s_max = floor_root_of_ratio(&(height_bound * height_bound), exp)
        .to_i64()
        .ok_or(Error::Overflow)?;
    let basis = MonomialBasis::new(d, n)?;

    // Group monomials by the exponent of the last variable: the squared
    // Veronese norm becomes a polynomial sum_k P_k(prefix) * (y_n^2)^k.
    let groups: Vec<Vec<Vec<u32>>> = (0..=d)
        .map(|k| {
            basis
                .exponents()
                .iter()
                .filter(|e| e[n] == k)
                .map(|e| e[..n].to_vec())
                .collect()
        })
        .collect();

    // Everything fits i64: the largest possible squared norm is
    // N * s_max^d, checked here once.
    let worst = BigInt::from(basis.len()) * BigInt::from(s_max).pow(d);
    if worst.to_i64().is_none() {
        return Err(Error::Overflow);
    }

    let dim = n + 1;
    let fact: Vec<f64> = {
        let mut f = vec![1f64];
        for i in 1..=dim {
            f.push(f[i - 1] * i as f64);
        }
        f
    };

    let vmax = isqrt_i64(s_max);
    // One job per value of the largest prefix coordinate; partial sums are
    // folded in job order so the result is scheduling-independent.
    let partials: Vec<f64> = (0..=vmax)
        .into_par_iter()
        .map(|top| {
            let mut acc = KahanSum::default();
            let mut prefix = vec![0i64; n];
            prefix[n - 1] = top;
            if top * top <= s_max {
                fill_prefix(&mut prefix, n - 1, s_max - top * top, &groups, &fact, dim, s_max, &mut acc);
            }
            acc.value()
        })
        .collect();

    let mut total = KahanSum::default();
    for p in partials {
        total.add(p);
    }
    Ok(total.value())
}

/// Enumerate prefix coordinates 0 <= y_0 <= ... <= y_{pos-1} <= y_pos
/// downward from `pos`, then hand each complete prefix to the inner line.
#[allow(clippy::too_many_arguments)]
fn fill_prefix(
    prefix: &mut Vec<i64>,
    pos: usize,
    rem: i64,
    groups: &[Vec<Vec<u32>>],
    fact: &[f64],
    dim: usize,
    s_max: i64,
    acc: &mut KahanSum,
) {
    if pos == 0 {
        inner_line(prefix, s_max, groups, fact, dim, acc);
        return;
    }
    let cap = isqrt_i64(rem).min(prefix[pos]);
    for v in 0..=cap {
        prefix[pos - 1] = v;
        fill_prefix(prefix, pos - 1, rem - v * v, groups, fact, dim, s_max, acc);
    }
    prefix[pos - 1] = 0;
}

/// Sum the inner loop over the largest coordinate y_n >= max(prefix).
fn inner_line(
    prefix: &[i64],
    s_max: i64,
    groups: &[Vec<Vec<u32>>],
    fact: &[f64],
    dim: usize,
    acc: &mut KahanSum,
) {
    let norm_pre: i64 = prefix.iter().map(|&v| v * v).sum();
    if norm_pre > s_max {
        return;
    }
    let hi = isqrt_i64(s_max - norm_pre);
    let lo = prefix.last().copied().unwrap_or(0);
    if hi < lo.max(1) {
        return;
    }

    // Horner coefficients of the squared Veronese norm in y_n^2.
    let coeffs: Vec<i64> = groups
        .iter()
        .map(|g| {
            let mut sum = 0i64;
            for pe in g {
                let mut prod = 1i64;
                for (i, &e) in pe.iter().enumerate() {
                    for _ in 0..e {
                        prod *= prefix[i] * prefix[i];
                    }
                }
                sum += prod;
            }
            sum
        })
        .collect();

    let g_prefix = prefix.iter().fold(0u64, |g, &v| gcd_u64(g, v.unsigned_abs()));

    // Orbit bookkeeping on the sorted representative: the permutation
    // count divides by the factorial of each value's multiplicity.
    let zeros = prefix.iter().filter(|&&v| v == 0).count();
    let mut mult_factor = 1f64;
    let mut run = 1usize;
    for i in 1..prefix.len() {
        if prefix[i] == prefix[i - 1] {
            run += 1;
        } else {
            mult_factor *= fact[run];
            run = 1;
        }
    }
    mult_factor *= fact[run];
    let m_last = run; // multiplicity of the largest prefix value
    let signs = 2f64.powi((prefix.len() - zeros) as i32 + 1);

    if g_prefix == 0 {
        // All-zero prefix: primitivity forces y_n = 1.
        if hi >= 1 {
            // Multiset {0^n, 1}: dim orderings, two signs of the 1.
            let w = fact[dim] / fact[dim - 1] * 2.0;
            let nrm = eval_horner(&coeffs, 1);
            acc.add(w / (nrm as f64).sqrt());
        }
        return;
    }

    // Tie with the largest prefix value.
    if lo >= 1 && gcd_u64(g_prefix, lo as u64) == 1 {
        let w_tie = fact[dim] / (mult_factor / fact[m_last] * fact[m_last + 1]) * signs;
        let nrm = eval_horner(&coeffs, lo * lo);
        acc.add(w_tie / (nrm as f64).sqrt());
    }

    // Plain summation within one line (positive terms of one scale; the
    // error is far below the compensated cross-line accumulation), folded
    // into the Kahan accumulator once per line.
    let w_new = fact[dim] / mult_factor * signs;
    let mut line = 0f64;
    if g_prefix == 1 {
        for y in (lo + 1)..=hi {
            let nrm = eval_horner(&coeffs, y * y);
            line += inv_sqrt(nrm as f64);
        }
    } else {
        for y in (lo + 1)..=hi {
            if gcd_u64(g_prefix, y as u64) != 1 {
                continue;
            }
            let nrm = eval_horner(&coeffs, y * y);
            line += inv_sqrt(nrm as f64);
        }
    }
    acc.add(w_new * line);
}

/// Reciprocal square root by bit-pattern seed plus Newton refinement,
/// accurate to about one ulp and free of the hardware divider. The inner
/// sums run billions of these; the deterministic pure-arithmetic form also
/// keeps results identical across machines.
#[inline]
fn inv_sqrt(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let seed = 0x5FE6_EB50_C7B5_37A9u64.wrapping_sub(x.to_bits() >> 1);
    let mut y = f64::from_bits(seed);
    let half = 0.5 * x;
    for _ in 0..4 {
        y *= 1.5 - half * y * y;
    }
    y
}

#[inline]
fn eval_horner(coeffs: &[i64], v: i64) -> i64 {
    let mut acc = coeffs[coeffs.len() - 1];
    for k in (0..coeffs.len() - 1).rev() {
        acc = acc * v + coeffs[k];
    }
    acc
}

fn isqrt_i64(n: i64) -> i64 {
    if n < 0 {
        return -1;
    }
    let mut s = (n as f64).sqrt() as i64;
    while (s + 1) * (s + 1) <= n {
        s += 1;
    }
    while s * s > n {
        s -= 1;
    }
    s
}

/// Volume of the unit ball in R^N, from the closed Gamma-function forms.
pub fn ball_volume(n: u32) -> f64 {
    use std::f64::consts::PI;
    if n == 0 {
        return 1.0;
    }
    if n % 2 == 0 {
        let k = n / 2;
        let mut v = 1f64;
        for i in 1..=k {
            v *= PI / i as f64;
        }
        v
    } else {
        let k = (n - 1) / 2;
        // 2 * (4 pi)^k * k! / (2k + 1)!
        let mut v = 2f64;
        for i in 1..=k {
            v *= 4.0 * PI * i as f64;
        }
        for i in 1..=(2 * k + 1) {
            v /= i as f64;
        }
        v
    }
}

/// Riemann zeta at integer s >= 2 via the truncated series with
/// Euler-Maclaurin tail corrections; absolute error below 1e-14.
pub fn zeta(s: u32) -> Result<f64> {
    if s < 2 {
        return Err(Error::InvalidInput(format!("zeta requires s >= 2, got {s}")));
    }
    let sf = s as f64;
    let m = 64f64;
    let mut sum = KahanSum::default();
    for k in 1..=64u64 {
        sum.add((k as f64).powf(-sf));
    }
    let mut tail = m.powf(1.0 - sf) / (sf - 1.0);
    tail -= 0.5 * m.powf(-sf);
    tail += sf / 12.0 * m.powf(-sf - 1.0);
    tail -= sf * (sf + 1.0) * (sf + 2.0) / 720.0 * m.powf(-sf - 3.0);
    Ok(sum.value() + tail)
}

/// Monte-Carlo value and standard error of the integral of 1/||nu(t)||
/// over the unit ball, after exact radial integration: the radial factor
/// contributes 1/(n+1-d) and leaves a uniform spherical average.
pub fn veronese_ball_integral(d: u32, n: usize, samples: u64, seed: u64) -> Result<(f64, f64)> {
    if n < d as usize {
        return Err(Error::InvalidInput(format!(
            "integral diverges for n = {n} < d = {d}"
        )));
    }
    if samples == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    let basis = MonomialBasis::new(d, n)?;
    let exponents: Vec<Vec<u32>> = basis.exponents().to_vec();
    let dim = n + 1;

    const CHUNK: u64 = 1 << 16;
    let chunks: Vec<(u64, u64)> = {
        let mut v = Vec::new();
        let mut start = 0;
        while start < samples {
            let len = CHUNK.min(samples - start);
            v.push((start / CHUNK, len));
            start += len;
        }
        v
    };

    // One independent, seeded stream per chunk; chunk statistics are
    // folded in order, so the value is independent of scheduling. Welford
    // accumulation keeps the variance stable even when the integrand is
    // (numerically) constant.
    let stats: Vec<(f64, f64, f64)> = chunks
        .par_iter()
        .map(|&(chunk_idx, len)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk_idx + 1);
            let mut omega = vec![0f64; dim];
            let (mut count, mut mean, mut m2) = (0f64, 0f64, 0f64);
            for _ in 0..len {
                sample_unit_sphere(&mut rng, &mut omega);
                let g = inverse_veronese_norm(&exponents, &omega);
                count += 1.0;
                let delta = g - mean;
                mean += delta / count;
                m2 += delta * (g - mean);
            }
            (count, mean, m2)
        })
        .collect();

    let (mut count, mut mean, mut m2) = (0f64, 0f64, 0f64);
    for (cb, mb, m2b) in stats {
        if cb == 0.0 {
            continue;
        }
        let delta = mb - mean;
        let total = count + cb;
        m2 += m2b + delta * delta * count * cb / total;
        mean += delta * cb / total;
        count = total;
    }
    let var = if samples > 1 { (m2 / (count - 1.0)).max(0.0) } else { 0.0 };

    let surface = dim as f64 * ball_volume(dim as u32);
    let radial = 1.0 / (n as f64 + 1.0 - d as f64);
    let scale = surface * radial;
    Ok((scale * mean, scale * (var / count).sqrt()))
}

fn sample_unit_sphere<R: Rng>(rng: &mut R, out: &mut [f64]) {
    loop {
        let mut norm_sq = 0f64;
        let mut i = 0;
        while i < out.len() {
            // Box-Muller pair from two uniforms.
            let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let u2: f64 = rng.gen::<f64>();
            let r = (-2.0 * u1.ln()).sqrt();
            let (s, c) = (2.0 * std::f64::consts::PI * u2).sin_cos();
            out[i] = r * c;
            norm_sq += out[i] * out[i];
            i += 1;
            if i < out.len() {
                out[i] = r * s;
                norm_sq += out[i] * out[i];
                i += 1;
            }
        }
        if norm_sq > 1e-300 {
            let inv = norm_sq.sqrt().recip();
            for v in out.iter_mut() {
                *v *= inv;
            }
            return;
        }
    }
}

fn inverse_veronese_norm(exponents: &[Vec<u32>], omega: &[f64]) -> f64 {
    let mut norm_sq = 0f64;
    for e in exponents {
        let mut m = 1f64;
        for (i, &ei) in e.iter().enumerate() {
            for _ in 0..ei {
                m *= omega[i];
            }
        }
        norm_sq += m * m;
    }
    norm_sq.sqrt().recip()
}

/// The leading constant of the averaged asymptotic, with its recorded
/// components. Requires at least three monomials so both zeta arguments
/// are in the convergent range.
#[derive(Debug, Clone)]
pub struct ManinConstant {
    pub degree: u32,
    pub dimension: usize,
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
    pub components: ConstantComponents,
}

#[derive(Debug, Clone)]
pub struct ConstantComponents {
    /// zeta(n + 1), from primitivity of the points.
    pub zeta_dim: f64,
    /// V_{N-1} / V_N, the ball-volume ratio of the coefficient space.
    pub volume_ratio: f64,
    /// zeta(N) / zeta(N - 1), from primitivity of the coefficients.
    pub zeta_ratio: f64,
    /// Monte-Carlo value of the unit-ball integral of 1/||nu||.
    pub integral: f64,
    pub integral_std_error: f64,
}

pub fn manin_constant(d: u32, n: usize, samples: u64, seed: u64) -> Result<ManinConstant> {
    let count = monomial_count(d, n);
    if count < 3 {
        return Err(Error::InvalidInput(format!(
            "constant undefined for (d, n) = ({d}, {n}): the coefficient space \
             has only {count} monomials and the zeta factor degenerates"
        )));
    }
    let big_n = count as u32;
    let zeta_dim = zeta(n as u32 + 1)?;
    let volume_ratio = ball_volume(big_n - 1) / ball_volume(big_n);
    let zeta_ratio = zeta(big_n)? / zeta(big_n - 1)?;
    let (integral, integral_se) = veronese_ball_integral(d, n, samples, seed)?;
    let scale = 1.0 / (2.0 * zeta_dim) * volume_ratio * zeta_ratio;
    Ok(ManinConstant {
        degree: d,
        dimension: n,
        value: scale * integral,
        std_error: scale * integral_se,
        samples,
        seed,
        components: ConstantComponents {
            zeta_dim,
            volume_ratio,
            zeta_ratio,
            integral,
            integral_std_error: integral_se,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theorem2Mode {
    Exact,
    Sampled,
}

/// One averaged-count experiment against the predicted constant.
#[derive(Debug, Clone)]
pub struct Theorem2Report {
    pub degree: u32,
    pub dimension: usize,
    pub coeff_bound: BigRational,
    pub height_bound: BigRational,
    pub mode: Theorem2Mode,
    pub samples: u64,
    pub seed: u64,
    /// Mean point count per hypersurface.
    pub average: f64,
    /// Exact average in exact mode.
    pub average_exact: Option<BigRational>,
    /// Standard error of the mean in sampled mode.
    pub std_error: Option<f64>,
    pub prediction: f64,
    pub ratio: f64,
    /// The shape of the error envelope B^(1/(n+1-d))/A + log(B)/B^(1/(n+1-d)),
    /// for context only (its implied constants are unspecified).
    pub error_envelope: f64,
    /// Exact mode: whether the two independent totals agreed exactly.
    pub dual_agrees: Option<bool>,
    pub space_size: Option<u128>,
    pub total: Option<BigRational>,
    pub constant: ManinConstant,
}

#[allow(clippy::too_many_arguments)]
pub fn theorem2_report(
    d: u32,
    n: usize,
    coeff_bound: &BigRational,
    height_bound: &BigRational,
    mode: Theorem2Mode,
    samples: u64,
    constant_samples: u64,
    seed: u64,
    budget: &Budget,
) -> Result<Theorem2Report> {
    let exp = height_exponent(d, n)?;
    if height_bound < &BigRational::from_integer(BigInt::from(1))
        || coeff_bound < &BigRational::from_integer(BigInt::from(1))
    {
        return Err(Error::InvalidInput("bounds must be >= 1".into()));
    }
    // Hypothesis A >= B^(1/(n+1-d)), checked exactly by cross-powering.
    let lhs = pow_rational(coeff_bound, exp);
    if lhs < *height_bound {
        return Err(Error::InvalidInput(
            "coefficient bound below the height-bound root: A >= B^(1/(n+1-d)) required".into(),
        ));
    }

    let constant_seed = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let constant = manin_constant(d, n, constant_samples, constant_seed)?;

    let b_over_a = (height_bound / coeff_bound).to_f64().unwrap_or(f64::NAN);
    let prediction = constant.value * b_over_a;
    let b_root = height_bound.to_f64().unwrap_or(f64::NAN).powf(1.0 / exp as f64);
    let a_f = coeff_bound.to_f64().unwrap_or(f64::NAN);
    let envelope = b_root / a_f + height_bound.to_f64().unwrap_or(f64::NAN).ln() / b_root;

    match mode {
        Theorem2Mode::Exact => {
            let direct = s_direct(d, n, coeff_bound, height_bound, budget)?;
            let dual = s_dual(d, n, coeff_bound, height_bound, budget)?;
            let agrees = direct.total == dual.total && direct.space_size == dual.space_size;
            let average = dual.average.to_f64().unwrap_or(f64::NAN);
            Ok(Theorem2Report {
                degree: d,
                dimension: n,
                coeff_bound: coeff_bound.clone(),
                height_bound: height_bound.clone(),
                mode,
                samples: 0,
                seed,
                average,
                average_exact: Some(dual.average.clone()),
                std_error: None,
                prediction,
                ratio: average / prediction,
                error_envelope: envelope,
                dual_agrees: Some(agrees),
                space_size: Some(dual.space_size),
                total: Some(dual.total),
                constant,
            })
        }
        Theorem2Mode::Sampled => {
            if samples == 0 {
                return Err(Error::InvalidInput("need at least one sample".into()));
            }
            let surfaces = sample_space(d, n, coeff_bound, samples as usize, seed)?;
            let basis = MonomialBasis::new(d, n)?;
            let max_norm_sq = floor_root_of_ratio(&(height_bound * height_bound), exp)
                .to_i64()
                .ok_or(Error::Overflow)?;
            let table = PointTable::build(&basis, max_norm_sq, budget)?;
            let counts: Vec<u64> = surfaces
                .par_iter()
                .map(|v| table.count_zeros(v.coeffs()))
                .collect::<Result<_>>()?;
            // Exact integer moments keep the result schedule-independent.
            let sum: u128 = counts.iter().map(|&c| c as u128).sum();
            let sum_sq: u128 = counts.iter().map(|&c| (c as u128) * (c as u128)).sum();
            let k = samples as f64;
            let mean = sum as f64 / k;
            let var = if samples > 1 {
                (sum_sq as f64 - (sum as f64) * (sum as f64) / k) / (k - 1.0)
            } else {
                0.0
            };
            let se = (var / k).sqrt();
            Ok(Theorem2Report {
                degree: d,
                dimension: n,
                coeff_bound: coeff_bound.clone(),
                height_bound: height_bound.clone(),
                mode,
                samples,
                seed,
                average: mean,
                average_exact: None,
                std_error: Some(se),
                prediction,
                ratio: mean / prediction,
                error_envelope: envelope,
                dual_agrees: None,
                space_size: None,
                total: None,
                constant,
            })
        }
    }
}

fn pow_rational(x: &BigRational, e: u32) -> BigRational {
    let mut acc = BigRational::from_integer(BigInt::from(1));
    for _ in 0..e {
        acc *= x;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::parse_rational;
    use std::f64::consts::PI;

    fn rat(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn ball_volume_known_values() {
        assert!((ball_volume(1) - 2.0).abs() < 1e-15);
        assert!((ball_volume(2) - PI).abs() < 1e-15);
        assert!((ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((ball_volume(6) - PI.powi(3) / 6.0).abs() < 1e-14);
    }

    #[test]
    fn ball_volume_recurrence() {
        for n in 3..=24u32 {
            let lhs = ball_volume(n);
            let rhs = ball_volume(n - 2) * 2.0 * PI / n as f64;
            assert!(
                ((lhs - rhs) / rhs).abs() < 1e-12,
                "recurrence fails at N = {n}: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn zeta_known_values() {
        assert!((zeta(2).unwrap() - PI * PI / 6.0).abs() < 1e-12);
        assert!((zeta(4).unwrap() - PI.powi(4) / 90.0).abs() < 1e-12);
        let z20 = zeta(20).unwrap();
        let direct: f64 = (1..200u64).map(|k| (k as f64).powi(-20)).sum();
        assert!((z20 - direct).abs() < 1e-12);
        assert!(zeta(1).is_err());
    }

    #[test]
    fn s_direct_monomial_conics() {
        // The six coefficient-norm-1 conics against the three height-1
        // points: squares vanish on two apiece, cross terms on all three.
        let b = Budget::default();
        let r = s_direct(2, 2, &rat("1"), &rat("1"), &b).unwrap();
        assert_eq!(r.space_size, 6);
        assert_eq!(r.total, rat("15"));
    }

    #[test]
    fn s_direct_zero_below_smallest_height() {
        let b = Budget::default();
        let r = s_direct(2, 2, &rat("1"), &rat("1/2"), &b).unwrap();
        assert_eq!(r.total, rat("0"));
    }

    #[test]
    fn dual_count_matches_direct_exactly() {
        let b = Budget::default();
        for (a, bound) in [("1", "1"), ("2", "1"), ("2", "2"), ("3", "2")] {
            let direct = s_direct(2, 2, &rat(a), &rat(bound), &b).unwrap();
            let dual = s_dual(2, 2, &rat(a), &rat(bound), &b).unwrap();
            assert_eq!(direct.total, dual.total, "A={a} B={bound}");
            assert_eq!(direct.space_size, dual.space_size, "A={a} B={bound}");
            // The dual total times four is an integer by construction.
            assert!((dual.total * BigRational::from_integer(4.into())).is_integer());
        }
    }

    #[test]
    fn t_sum_pinned_values() {
        // Six unit vectors (both signs) each contribute 1.
        let t = t_sum(2, 2, &rat("1")).unwrap();
        assert!((t - 6.0).abs() < 1e-12, "t = {t}");
        // Identity embedding on the line: four unit vectors.
        let t = t_sum(1, 1, &rat("1")).unwrap();
        assert!((t - 4.0).abs() < 1e-12, "t = {t}");
    }

    #[test]
    fn t_sum_matches_unfolded_reference() {
        // Reference: enumerate canonical primitive points directly and
        // weight each by 2 for the sign pair.
        let b = Budget::default();
        for (d, n, bound) in [(2u32, 2usize, 20i64), (3, 3, 4), (2, 3, 6), (1, 2, 12)] {
            let basis = MonomialBasis::new(d, n).unwrap();
            let exp = (n + 1 - d as usize) as u32;
            let height = BigRational::from_integer(BigInt::from(bound).pow(exp));
            let max_norm_sq = bound * bound;
            let pts = canonical_primitive_vectors(n + 1, max_norm_sq, &b).unwrap();
            let mut reference = KahanSum::default();
            for (_, x) in &pts {
                let coords: Vec<i128> = x.iter().map(|&v| v as i128).collect();
                let nrm = basis.veronese_norm_sq(&coords).unwrap();
                reference.add(2.0 / nrm.to_f64().unwrap().sqrt());
            }
            let fast = t_sum(d, n, &height).unwrap();
            let rel = ((fast - reference.value()) / reference.value()).abs();
            assert!(rel < 1e-10, "(d,n)=({d},{n}): {fast} vs {}", reference.value());
        }
    }

    #[test]
    fn t_sum_monotone_in_bound() {
        let mut last = 0.0;
        for bound in ["1", "2", "4", "8", "16"] {
            let t = t_sum(2, 2, &rat(bound)).unwrap();
            assert!(t >= last);
            last = t;
        }
    }

    #[test]
    fn integral_closed_form_on_the_line() {
        // Identity embedding: the integrand is 1, the integral is the
        // radial factor times the circle length, 2 pi exactly; the sampler
        // has zero variance.
        let (value, se) = veronese_ball_integral(1, 1, 20_000, 1).unwrap();
        assert!(se < 1e-12);
        assert!((value - 2.0 * PI).abs() < 1e-9, "value {value}");
    }

    #[test]
    fn integral_closed_form_linear_any_dimension() {
        // Degree 1 keeps ||nu|| = ||t||, so the integral is
        // V_{n+1} (n+1) / n for every n.
        for n in [2usize, 3, 4] {
            let (value, se) = veronese_ball_integral(1, n, 30_000, 7).unwrap();
            let oracle = ball_volume(n as u32 + 1) * (n as f64 + 1.0) / n as f64;
            assert!(se < 1e-10);
            assert!(((value - oracle) / oracle).abs() < 1e-9, "n = {n}");
        }
    }

    #[test]
    fn integral_seeds_agree_within_error() {
        let (v1, s1) = veronese_ball_integral(2, 2, 200_000, 11).unwrap();
        let (v2, s2) = veronese_ball_integral(2, 2, 200_000, 12).unwrap();
        let combined = (s1 * s1 + s2 * s2).sqrt();
        assert!((v1 - v2).abs() <= 4.0 * combined, "{v1} vs {v2} ({combined})");
    }

    #[test]
    fn integral_rejects_divergent_range() {
        assert!(veronese_ball_integral(3, 2, 100, 1).is_err());
    }

    #[test]
    fn integral_is_deterministic_under_seed() {
        let a = veronese_ball_integral(2, 2, 100_000, 5).unwrap();
        let b = veronese_ball_integral(2, 2, 100_000, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn constant_components_multiply_to_value() {
        let c = manin_constant(2, 2, 50_000, 3).unwrap();
        let prod = 1.0 / (2.0 * c.components.zeta_dim)
            * c.components.volume_ratio
            * c.components.zeta_ratio
            * c.components.integral;
        assert!(((c.value - prod) / prod).abs() < 1e-12);
        assert!(c.value > 0.0);
    }

    #[test]
    fn constant_closed_form_check_for_linear_forms() {
        // (d, n) = (1, 2): the integral is exactly 2 pi, so the constant is
        // (1 / (2 zeta(3))) * (V_2 / V_3) * (zeta(3) / zeta(2)) * 2 pi
        // = (3 / 4) * pi / zeta(2).
        let c = manin_constant(1, 2, 200_000, 9).unwrap();
        let oracle = 0.75 * PI / zeta(2).unwrap();
        assert!(
            (c.value - oracle).abs() <= 3.0 * c.std_error.max(1e-12),
            "value {} vs oracle {oracle} (se {})",
            c.value,
            c.std_error
        );
    }

    #[test]
    fn constant_degenerate_case_is_rejected() {
        // Two monomials only: the zeta ratio hits the pole at 1.
        assert!(manin_constant(1, 1, 1000, 1).is_err());
    }

    #[test]
    fn theorem2_exact_tiny_run() {
        let b = Budget::default();
        let r = theorem2_report(
            2,
            2,
            &rat("3"),
            &rat("2"),
            Theorem2Mode::Exact,
            0,
            20_000,
            1,
            &b,
        )
        .unwrap();
        assert_eq!(r.dual_agrees, Some(true));
        assert!(r.average > 0.0);
        assert!(r.prediction > 0.0);
    }

    #[test]
    fn theorem2_rejects_small_coefficient_bound() {
        let b = Budget::default();
        // B^(1/(n+1-d)) = 4 > A = 3.
        let err = theorem2_report(
            2,
            2,
            &rat("3"),
            &rat("4"),
            Theorem2Mode::Exact,
            0,
            1000,
            1,
            &b,
        );
        assert!(err.is_err());
    }

    #[test]
    fn theorem2_sampled_is_deterministic() {
        let b = Budget::default();
        let run = || {
            theorem2_report(
                2,
                2,
                &rat("20"),
                &rat("5"),
                Theorem2Mode::Sampled,
                2000,
                20_000,
                77,
                &b,
            )
            .unwrap()
        };
        let r1 = run();
        let r2 = run();
        assert_eq!(r1.average.to_bits(), r2.average.to_bits());
        assert_eq!(r1.prediction.to_bits(), r2.prediction.to_bits());
        assert_eq!(r1.std_error.map(f64::to_bits), r2.std_error.map(f64::to_bits));
    }
}
