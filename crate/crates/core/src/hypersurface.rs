//! Projective points, hypersurfaces, bounded-height point counts, and
//! minimal heights.
//!
//! Rational points and coefficient vectors are represented by canonical
//! primitive integer vectors: coordinates have gcd 1 and the first nonzero
//! entry is positive, so each projective object appears exactly once. The
//! anticanonical height of a point is ||x||^(n+1-d); heights are compared
//! exactly through squared norms and cross-powering, never through floats.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{canonicalize, content, floor_root_of_ratio, norm_sq_big};
use crate::error::{Budget, Error, Result};
use crate::monomials::{monomial_count, MonomialBasis};

/// A rational point of projective space in canonical primitive form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectivePoint {
    coords: Vec<i128>,
}

impl ProjectivePoint {
    pub fn new(coords: &[i128]) -> Result<Self> {
        Ok(ProjectivePoint { coords: canonicalize(coords)? })
    }

    pub fn coords(&self) -> &[i128] {
        &self.coords
    }

    pub fn norm_squared(&self) -> BigInt {
        norm_sq_big(&self.coords)
    }

    /// Anticanonical height ||x||^(n+1-d) for hypersurfaces of degree d,
    /// kept exact as a (squared norm, exponent) pair.
    pub fn height(&self, d: u32) -> Result<Height> {
        let dim = self.coords.len() - 1; // projective dimension n
        if dim < d as usize {
            return Err(Error::InvalidInput(format!(
                "height undefined for n = {dim} < d = {d}"
            )));
        }
        Ok(Height {
            norm_squared: self.norm_squared(),
            exponent: (dim + 1 - d as usize) as u32,
        })
    }
}

/// Exact height value ||x||^exponent stored through its squared base.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Height {
    pub norm_squared: BigInt,
    pub exponent: u32,
}

impl Height {
    /// H <= bound, decided exactly: ||x||^(2e) <= bound^2.
    pub fn le_rational(&self, bound: &BigRational) -> bool {
        if bound.is_negative() {
            return false;
        }
        let lhs = self.norm_squared.pow(self.exponent);
        let b2 = bound * bound;
        BigRational::from_integer(lhs) <= b2
    }

    pub fn value(&self) -> f64 {
        self.norm_squared
            .to_f64()
            .map(|v| v.powf(self.exponent as f64 / 2.0))
            .unwrap_or(f64::NAN)
    }
}

/// A degree-d hypersurface in P^n with canonical primitive coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypersurface {
    basis: MonomialBasis,
    coeffs: Vec<i128>,
}

impl Hypersurface {
    /// Canonicalizes the coefficient vector (content divided out, sign
    /// fixed); rejects the zero vector and length mismatches.
    pub fn new(d: u32, n: usize, coeffs: &[i128]) -> Result<Self> {
        let basis = MonomialBasis::new(d, n)?;
        if coeffs.len() != basis.len() {
            return Err(Error::InvalidInput(format!(
                "got {} coefficients, expected {}",
                coeffs.len(),
                basis.len()
            )));
        }
        Ok(Hypersurface { coeffs: canonicalize(coeffs)?, basis })
    }

    pub fn degree(&self) -> u32 {
        self.basis.degree()
    }

    pub fn dimension(&self) -> usize {
        self.basis.dimension()
    }

    pub fn coeffs(&self) -> &[i128] {
        &self.coeffs
    }

    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    /// Squared Euclidean norm of the canonical coefficient vector.
    pub fn coeff_norm_squared(&self) -> BigInt {
        norm_sq_big(&self.coeffs)
    }

    pub fn coeff_norm(&self) -> f64 {
        self.coeff_norm_squared().to_f64().map(f64::sqrt).unwrap_or(f64::NAN)
    }

    /// Fano-range height exponent n + 1 - d, when defined.
    fn height_exponent(&self) -> Result<u32> {
        let n = self.dimension();
        if n < self.degree() as usize {
            return Err(Error::InvalidInput(format!(
                "need n >= d, got n = {n}, d = {}",
                self.degree()
            )));
        }
        Ok((n + 1 - self.degree() as usize) as u32)
    }

    pub fn contains(&self, point: &ProjectivePoint) -> Result<bool> {
        Ok(self.basis.evaluate_form(&self.coeffs, point.coords())? == 0)
    }

    /// Exact number of rational points on the hypersurface with height at
    /// most `bound`, by exhaustive enumeration of canonical representatives.
    pub fn count_rational_points(&self, bound: &BigRational, budget: &Budget) -> Result<u64> {
        let exp = self.height_exponent()?;
        let max_norm_sq = height_bound_to_norm_sq(&(bound * bound), exp)?;
        let table = PointTable::build(&self.basis, max_norm_sq, budget)?;
        table.count_zeros(&self.coeffs)
    }

    /// Smallest height of a rational point, searched in increasing norm
    /// (ties broken by descending coordinate order). For conics the search
    /// is a complete decision procedure once the cap reaches three times
    /// the coefficient norm.
    pub fn min_height(&self, cap: &HeightCap, budget: &Budget) -> Result<MinHeightResult> {
        let exp = self.height_exponent()?;
        let max_norm_sq = height_bound_to_norm_sq(&cap.squared, exp)?;
        let table = PointTable::build(&self.basis, max_norm_sq, budget)?;
        if let Some(idx) = table.first_zero(&self.coeffs)? {
            let coords: Vec<i128> = table.point(idx).iter().map(|&v| v as i128).collect();
            return Ok(MinHeightResult::Found {
                height: Height {
                    norm_squared: BigInt::from(table.norm_sq(idx)),
                    exponent: exp,
                },
                witness: ProjectivePoint::new(&coords)?,
            });
        }
        let davenport_sq =
            BigRational::from_integer(self.coeff_norm_squared() * BigInt::from(9));
        if self.degree() == 2 && self.dimension() == 2 && cap.squared >= davenport_sq {
            Ok(MinHeightResult::EmptyProven)
        } else {
            Ok(MinHeightResult::Unknown { cap_squared: cap.squared.clone() })
        }
    }
}

/// Height caps carried by their exact square, so irrational caps such as
/// the conic bound 3*||a|| stay exact.
#[derive(Debug, Clone, PartialEq)]
pub struct HeightCap {
    squared: BigRational,
}

impl HeightCap {
    pub fn from_value(value: &BigRational) -> Result<Self> {
        if value.is_negative() {
            return Err(Error::InvalidInput("height cap must be non-negative".into()));
        }
        Ok(HeightCap { squared: value * value })
    }

    pub fn from_squared(squared: BigRational) -> Result<Self> {
        if squared.is_negative() {
            return Err(Error::InvalidInput("squared cap must be non-negative".into()));
        }
        Ok(HeightCap { squared })
    }

    /// The complete-search cap 3*||a_V|| for conic solubility.
    pub fn davenport(surface: &Hypersurface) -> Self {
        HeightCap {
            squared: BigRational::from_integer(surface.coeff_norm_squared() * BigInt::from(9)),
        }
    }

    pub fn squared(&self) -> &BigRational {
        &self.squared
    }

    pub fn value(&self) -> f64 {
        self.squared.to_f64().map(f64::sqrt).unwrap_or(f64::NAN)
    }
}

/// Outcome of a minimal-height search.
#[derive(Debug, Clone, PartialEq)]
pub enum MinHeightResult {
    Found { height: Height, witness: ProjectivePoint },
    EmptyProven,
    Unknown { cap_squared: BigRational },
}

/// Largest integer squared norm compatible with H(x)^2 <= bound_sq, i.e.
/// the biggest s with s^exp <= bound_sq.
fn height_bound_to_norm_sq(bound_sq: &BigRational, exp: u32) -> Result<i64> {
    let s = floor_root_of_ratio(bound_sq, exp);
    s.to_i64().ok_or(Error::Overflow)
}

/// Every hypersurface of the given degree and dimension with coefficient
/// norm at most `max_coeff_norm`, exactly once, ordered by (norm,
/// descending coordinates). Refuses upfront when the predicted count
/// exceeds the budget.
pub fn enumerate_space(
    d: u32,
    n: usize,
    max_coeff_norm: &BigRational,
    budget: &Budget,
) -> Result<Vec<Hypersurface>> {
    if max_coeff_norm < &BigRational::from_integer(BigInt::from(1)) {
        return Err(Error::InvalidInput("coefficient norm bound must be >= 1".into()));
    }
    let dim = monomial_count(d, n) as usize;
    let norm_sq = floor_root_of_ratio(&(max_coeff_norm * max_coeff_norm), 1)
        .to_i64()
        .ok_or(Error::Overflow)?;
    // Volume-based prediction of the candidate count.
    let a = max_coeff_norm.to_f64().unwrap_or(f64::INFINITY);
    let predicted = crate::manin::ball_volume(dim as u32) * a.powi(dim as i32);
    if !predicted.is_finite() || predicted > budget.max_candidates as f64 {
        return Err(Error::BudgetExceeded { budget: budget.max_candidates });
    }
    let vecs = canonical_primitive_vectors(dim, norm_sq, budget)?;
    vecs.into_iter()
        .map(|(_, v)| {
            let coeffs: Vec<i128> = v.iter().map(|&c| c as i128).collect();
            Hypersurface::new(d, n, &coeffs)
        })
        .collect()
}

/// Independent uniform draws from the hypersurfaces of coefficient norm at
/// most `max_coeff_norm`, by rejection from the surrounding box;
/// deterministic for a fixed seed.
pub fn sample_space(
    d: u32,
    n: usize,
    max_coeff_norm: &BigRational,
    count: usize,
    seed: u64,
) -> Result<Vec<Hypersurface>> {
    if count == 0 {
        return Err(Error::InvalidInput("sample count must be positive".into()));
    }
    if max_coeff_norm < &BigRational::from_integer(BigInt::from(1)) {
        return Err(Error::InvalidInput("coefficient norm bound must be >= 1".into()));
    }
    let dim = monomial_count(d, n) as usize;
    let norm_sq_max = floor_root_of_ratio(&(max_coeff_norm * max_coeff_norm), 1)
        .to_i64()
        .ok_or(Error::Overflow)?;
    let m = floor_root_of_ratio(max_coeff_norm, 1).to_i64().ok_or(Error::Overflow)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut draw = vec![0i128; dim];
    while out.len() < count {
        let mut norm: i128 = 0;
        for c in draw.iter_mut() {
            let v = rng.gen_range(-m..=m) as i128;
            *c = v;
            norm += v * v;
        }
        if norm > norm_sq_max as i128 || content(&draw) != 1 {
            continue;
        }
        out.push(Hypersurface::new(d, n, &draw)?);
    }
    Ok(out)
}

/// Flat, norm-sorted table of canonical primitive points together with
/// their Veronese coordinates. Built once, scanned many times.
pub struct PointTable {
    dim: usize,
    nu_len: usize,
    norms: Vec<i64>,
    points: Vec<i64>,
    nus: Vec<i64>,
    max_abs_nu: i64,
}

impl PointTable {
    /// All canonical primitive x with ||x||^2 <= max_norm_sq, sorted by
    /// (norm, descending coordinates), with nu(x) precomputed.
    pub fn build(basis: &MonomialBasis, max_norm_sq: i64, budget: &Budget) -> Result<PointTable> {
        let dim = basis.dimension() + 1;
        let vecs = canonical_primitive_vectors(dim, max_norm_sq, budget)?;
        let nu_len = basis.len();
        let mut norms = Vec::with_capacity(vecs.len());
        let mut points = Vec::with_capacity(vecs.len() * dim);
        let mut nus = Vec::with_capacity(vecs.len() * nu_len);
        let mut max_abs_nu: i64 = 0;
        for (norm_sq, v) in vecs {
            norms.push(norm_sq);
            points.extend_from_slice(&v);
            let coords: Vec<i128> = v.iter().map(|&c| c as i128).collect();
            for value in basis.veronese_embed(&coords)? {
                let value = i64::try_from(value).map_err(|_| Error::Overflow)?;
                max_abs_nu = max_abs_nu.max(value.abs());
                nus.push(value);
            }
        }
        Ok(PointTable { dim, nu_len, norms, points, nus, max_abs_nu })
    }

    pub fn len(&self) -> usize {
        self.norms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.norms.is_empty()
    }

    pub fn point(&self, idx: usize) -> &[i64] {
        &self.points[idx * self.dim..(idx + 1) * self.dim]
    }

    pub fn norm_sq(&self, idx: usize) -> i64 {
        self.norms[idx]
    }

    fn coeffs_for_scan(&self, coeffs: &[i128]) -> Result<Vec<i64>> {
        if coeffs.len() != self.nu_len {
            return Err(Error::InvalidInput("coefficient length mismatch".into()));
        }
        let a: Vec<i64> = coeffs
            .iter()
            .map(|&c| i64::try_from(c).map_err(|_| Error::Overflow))
            .collect::<Result<_>>()?;
        // Prove the scan cannot overflow before entering the hot loop.
        let max_a = a.iter().map(|v| v.abs()).max().unwrap_or(0);
        let worst = (max_a as i128) * (self.max_abs_nu as i128) * (self.nu_len as i128);
        if worst >= i64::MAX as i128 {
            return Err(Error::Overflow);
        }
        Ok(a)
    }

    /// Number of table points on the hypersurface with the given
    /// coefficients.
    pub fn count_zeros(&self, coeffs: &[i128]) -> Result<u64> {
        self.count_zeros_up_to(coeffs, i64::MAX)
    }

    /// As `count_zeros`, restricted to points of squared norm at most the
    /// given cutoff (the table is norm-sorted, so this is a prefix).
    pub fn count_zeros_up_to(&self, coeffs: &[i128], max_norm_sq: i64) -> Result<u64> {
        let a = self.coeffs_for_scan(coeffs)?;
        let end = self.norms.partition_point(|&n| n <= max_norm_sq);
        let mut count = 0u64;
        for idx in 0..end {
            let nu = &self.nus[idx * self.nu_len..(idx + 1) * self.nu_len];
            let mut acc = 0i64;
            for (x, y) in a.iter().zip(nu) {
                acc += x * y;
            }
            if acc == 0 {
                count += 1;
            }
        }
        Ok(count)
    }

    /// Index of the first table point (in the search order) lying on the
    /// hypersurface, if any.
    pub fn first_zero(&self, coeffs: &[i128]) -> Result<Option<usize>> {
        let a = self.coeffs_for_scan(coeffs)?;
        Ok((0..self.len()).find(|&idx| {
            let nu = &self.nus[idx * self.nu_len..(idx + 1) * self.nu_len];
            a.iter().zip(nu).map(|(x, y)| x * y).sum::<i64>() == 0
        }))
    }

    /// Whether some table point of squared norm <= max_norm_sq lies on the
    /// hypersurface; scans in increasing norm and exits early.
    pub fn has_zero_up_to(&self, coeffs: &[i128], max_norm_sq: i64) -> Result<bool> {
        let a = self.coeffs_for_scan(coeffs)?;
        let end = self.norms.partition_point(|&n| n <= max_norm_sq);
        for idx in 0..end {
            let nu = &self.nus[idx * self.nu_len..(idx + 1) * self.nu_len];
            let mut acc = 0i64;
            for (x, y) in a.iter().zip(nu) {
                acc += x * y;
            }
            if acc == 0 {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// All canonical primitive integer vectors of the given dimension with
/// squared norm in [1, max_norm_sq], sorted by (norm, descending
/// coordinates). The leading nonzero coordinate is positive.
pub fn canonical_primitive_vectors(
    dim: usize,
    max_norm_sq: i64,
    budget: &Budget,
) -> Result<Vec<(i64, Vec<i64>)>> {
    if dim == 0 {
        return Err(Error::InvalidInput("dimension must be positive".into()));
    }
    let mut out = Vec::new();
    if max_norm_sq < 1 {
        return Ok(out);
    }
    let mut visits = 0u64;
    let mut current = vec![0i64; dim];
    for lead in 0..dim {
        // current[0..lead] = 0, current[lead] >= 1, rest free.
        fill_rest(
            &mut current,
            lead,
            lead,
            max_norm_sq,
            &mut out,
            &mut visits,
            budget,
        )?;
        current[lead] = 0;
    }
    out.sort_unstable_by(|a, b| a.0.cmp(&b.0).then_with(|| b.1.cmp(&a.1)));
    Ok(out)
}

fn fill_rest(
    current: &mut Vec<i64>,
    lead: usize,
    pos: usize,
    rem_norm_sq: i64,
    out: &mut Vec<(i64, Vec<i64>)>,
    visits: &mut u64,
    budget: &Budget,
) -> Result<()> {
    *visits += 1;
    if *visits > budget.max_candidates {
        return Err(Error::BudgetExceeded { budget: budget.max_candidates });
    }
    if pos == current.len() {
        let g = current.iter().fold(0u64, |g, &v| crate::arith::gcd_u64(g, v.unsigned_abs()));
        if g == 1 {
            let total: i64 = current.iter().map(|&v| v * v).sum();
            out.push((total, current.clone()));
        }
        return Ok(());
    }
    let m = isqrt_i64(rem_norm_sq);
    let lo = if pos == lead { 1 } else { -m };
    for v in lo..=m {
        current[pos] = v;
        fill_rest(current, lead, pos + 1, rem_norm_sq - v * v, out, visits, budget)?;
    }
    current[pos] = 0;
    Ok(())
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
