//! Exact enumeration of lattice points in Euclidean balls.
//!
//! The search runs over basis coordinates with pruning derived from a
//! fraction-free LDL^T decomposition of the Gram matrix: at every level the
//! admissible coordinate range is an exact integer interval, so counts are
//! exact by construction. The innermost level is never iterated for plain
//! counting (the interval length is added in closed form); for primitive
//! counting the points of an innermost line are classified by a small
//! arithmetic-progression sieve instead of a per-point gcd whenever
//! possible.
//!
//! Two interchangeable arithmetic backends run the same algorithm: `i128`
//! when a-priori bounds (computed exactly at setup) prove it cannot
//! overflow, arbitrary precision otherwise.

use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};

use rayon::prelude::*;

use crate::arith::gcd_u64;
use crate::error::{Budget, Error, Result};

use super::{bareiss_determinant, gram_matrix, lll, IntegralLattice};

/// LLL-reduced basis plus the fraction-free LDL^T data of its Gram matrix:
/// `p[k]` is the k-th leading principal minor (p[0] = 1) and
/// `lam[j][k] / p[k+1]` is the Gram-Schmidt coefficient mu_{j,k}.
pub(crate) struct Prepared {
    rank: usize,
    ambient: usize,
    cols_i64: Option<Vec<Vec<i64>>>,
    p: Vec<BigInt>,
    lam: Vec<Vec<BigInt>>,
    /// Diagonal of the adjugate of the Gram matrix, for coordinate box bounds.
    adj_diag: Vec<BigInt>,
    det_sq: BigInt,
}

impl Prepared {
    pub(crate) fn new(lat: &IntegralLattice) -> Result<Self> {
        let cols = lll::lll_reduce(lat.basis_columns().to_vec());
        let rank = cols.len();
        let gram = gram_matrix(&cols);
        let det_sq = bareiss_determinant(gram.clone());
        if !det_sq.is_positive() {
            return Err(Error::RankDeficient);
        }

        // Fraction-free forward elimination; keep the sub-pivot column
        // entries at each stage (integer mu numerators).
        let mut a = gram.clone();
        let mut p = vec![BigInt::one()];
        let mut lam = vec![vec![BigInt::from(0); rank]; rank];
        let mut prev = BigInt::one();
        for k in 0..rank {
            if !a[k][k].is_positive() {
                return Err(Error::RankDeficient);
            }
            p.push(a[k][k].clone());
            for (j, row) in a.iter().enumerate().skip(k + 1) {
                lam[j][k] = row[k].clone();
            }
            for i in k + 1..rank {
                for j in k + 1..rank {
                    let num = &a[k][k] * &a[i][j] - &a[i][k] * &a[k][j];
                    a[i][j] = num / &prev;
                }
            }
            prev = p[k + 1].clone();
        }

        let adj_diag = (0..rank)
            .map(|j| {
                let minor: Vec<Vec<BigInt>> = (0..rank)
                    .filter(|&i| i != j)
                    .map(|i| {
                        (0..rank)
                            .filter(|&c| c != j)
                            .map(|c| gram[i][c].clone())
                            .collect()
                    })
                    .collect();
                bareiss_determinant(minor)
            })
            .collect();

        let cols_i64 = cols
            .iter()
            .map(|c| c.iter().map(|v| v.to_i64()).collect::<Option<Vec<i64>>>())
            .collect::<Option<Vec<Vec<i64>>>>();

        Ok(Prepared {
            rank,
            ambient: lat.ambient_dim(),
            cols_i64,
            p,
            lam,
            adj_diag,
            det_sq,
        })
    }

    /// Number of lattice points with squared norm <= radius_sq.
    pub(crate) fn count(&self, radius_sq: &BigRational, budget: &Budget) -> Result<u128> {
        let sink = self.run::<CountSink>(radius_sq, budget)?;
        Ok(sink.total)
    }

    /// (total, primitive) point counts in one pass.
    pub(crate) fn count_with_primitive(
        &self,
        radius_sq: &BigRational,
        budget: &Budget,
    ) -> Result<(u128, u128)> {
        if self.cols_i64.is_none() {
            return Err(Error::Overflow);
        }
        let sink = self.run::<PrimitiveSink>(radius_sq, budget)?;
        Ok((sink.total, sink.primitive))
    }

    /// All lattice vectors with squared norm <= radius_sq, with exact
    /// squared norms, sorted by (norm, coordinates descending).
    pub(crate) fn collect(
        &self,
        radius_sq: &BigRational,
        budget: &Budget,
    ) -> Result<Vec<(BigInt, Vec<i64>)>> {
        if self.cols_i64.is_none() {
            return Err(Error::Overflow);
        }
        let sink = self.run::<CollectSink>(radius_sq, budget)?;
        let mut out = sink.points;
        out.sort_unstable_by(|a, b| a.0.cmp(&b.0).then_with(|| b.1.cmp(&a.1)));
        Ok(out)
    }

    fn run<S: Sink>(&self, radius_sq: &BigRational, budget: &Budget) -> Result<S> {
        if radius_sq.is_negative() {
            return Ok(S::empty());
        }
        let tau_n = radius_sq.numer().clone();
        let tau_d = radius_sq.denom().clone();

        let r = self.rank;
        let mut pp = Vec::with_capacity(r);
        for k in 0..r {
            pp.push(&self.p[k] * &self.p[k + 1]);
        }
        // Per-level fixed denominators of the running budget rho_k.
        let mut den = vec![BigInt::one(); r];
        den[r - 1] = tau_d.clone();
        for k in (1..r).rev() {
            den[k - 1] = &den[k] * &pp[k];
        }

        // Coordinate box bounds |z_j| <= sqrt(tau * adj_jj / det^2) + 1.
        let mut zbox = Vec::with_capacity(r);
        for j in 0..r {
            let m2 = &tau_n * &self.adj_diag[j] / (&tau_d * &self.det_sq);
            zbox.push(m2.sqrt() + 1);
        }

        if self.fits_i128(&tau_n, &den, &pp, &zbox) {
            let ctx = EngineCtx::<i128>::build(self, &tau_n, &den, &pp);
            self.drive(&ctx, budget)
        } else {
            let ctx = EngineCtx::<BigInt>::build(self, &tau_n, &den, &pp);
            self.drive(&ctx, budget)
        }
    }

    /// Exact worst-case magnitude analysis for the i128 backend: every
    /// intermediate the engine forms must stay below 2^126.
    fn fits_i128(&self, tau_n: &BigInt, den: &[BigInt], pp: &[BigInt], zbox: &[BigInt]) -> bool {
        let limit = BigInt::one() << 126;
        let r = self.rank;
        // num[k] <= tau * den[k]; num * pp never exceeds tau_n * den[0] * pp[0].
        if tau_n * &den[0] * &pp[0] >= limit {
            return false;
        }
        for k in 0..r {
            let mut s_bound = BigInt::from(0);
            for j in k + 1..r {
                s_bound += self.lam[j][k].abs() * &zbox[j];
            }
            // K = p[k+1] z_k + s_k
            let k_bound = &self.p[k + 1] * &zbox[k] + &s_bound;
            if &k_bound * &k_bound * &den[k] >= limit {
                return false;
            }
        }
        zbox.iter().all(|m| m.to_i64().is_some())
    }

    fn drive<S: Sink, T: EnumInt>(&self, ctx: &EngineCtx<T>, budget: &Budget) -> Result<S> {
        let visits = AtomicU64::new(0);
        let r = self.rank;
        let Some(m) = ctx.root_halfwidth()? else {
            return Ok(S::empty());
        };

        if r == 1 {
            // The root level is itself the innermost line.
            let zero = vec![0i64; self.ambient];
            let bcol = self.cols_i64.as_ref().map(|c| c[0].as_slice());
            let mut sink = S::empty();
            let base = if S::NEEDS_POINTS { Some(zero.as_slice()) } else { None };
            if S::MIRROR && m > 0 {
                sink.line(LineCtx { ybase: base, bcol, lo: 0, hi: 0, weight: 1 })?;
                sink.line(LineCtx { ybase: base, bcol, lo: 1, hi: m, weight: 2 })?;
            } else {
                sink.line(LineCtx { ybase: base, bcol, lo: -m, hi: m, weight: 1 })?;
            }
            return Ok(sink);
        }

        // Count modes may fold the z -> -z symmetry of the root level.
        let jobs: Vec<(i64, u64)> = if S::MIRROR {
            (0..=m).map(|z| (z, if z == 0 { 1 } else { 2 })).collect()
        } else {
            (-m..=m).map(|z| (z, 1)).collect()
        };

        let parallel = jobs.len() >= 8 && r >= 3;
        let run_job = |(z, w): &(i64, u64)| -> Result<S> {
            let mut local = S::empty();
            let mut state = EngineState::fresh(ctx, self);
            state.descend(ctx, self, r - 1, *z, *w, budget, &visits, &mut local)?;
            Ok(local)
        };

        if parallel {
            jobs.par_iter().map(run_job).try_reduce(S::empty, |mut a, b| {
                a.merge(b);
                Ok(a)
            })
        } else {
            let mut acc = S::empty();
            for job in &jobs {
                acc.merge(run_job(job)?);
            }
            Ok(acc)
        }
    }
}

/// Integer backend: exact ring ops plus floor division and floor sqrt.
/// Method names avoid the std operator traits on purpose.
pub(crate) trait EnumInt: Clone + Send + Sync {
    fn from_big(b: &BigInt) -> Self;
    fn is_neg(&self) -> bool;
    fn mul_ref(&self, o: &Self) -> Self;
    fn sub_ref(&self, o: &Self) -> Self;
    fn add_ref(&self, o: &Self) -> Self;
    fn scale_i64(&self, z: i64) -> Self;
    fn div_floor_ref(&self, o: &Self) -> Self;
    fn floor_sqrt(&self) -> Self;
    fn to_i64_exact(&self) -> Option<i64>;
    fn negate(&self) -> Self;
}

impl EnumInt for i128 {
    fn from_big(b: &BigInt) -> Self {
        b.to_i128().expect("setup bounds guarantee i128 range")
    }
    fn is_neg(&self) -> bool {
        *self < 0
    }
    fn mul_ref(&self, o: &Self) -> Self {
        self * o
    }
    fn sub_ref(&self, o: &Self) -> Self {
        self - o
    }
    fn add_ref(&self, o: &Self) -> Self {
        self + o
    }
    fn scale_i64(&self, z: i64) -> Self {
        self * z as i128
    }
    fn div_floor_ref(&self, o: &Self) -> Self {
        Integer::div_floor(self, o)
    }
    fn floor_sqrt(&self) -> Self {
        isqrt_i128(*self)
    }
    fn to_i64_exact(&self) -> Option<i64> {
        i64::try_from(*self).ok()
    }
    fn negate(&self) -> Self {
        -self
    }
}

impl EnumInt for BigInt {
    fn from_big(b: &BigInt) -> Self {
        b.clone()
    }
    fn is_neg(&self) -> bool {
        self.is_negative()
    }
    fn mul_ref(&self, o: &Self) -> Self {
        self * o
    }
    fn sub_ref(&self, o: &Self) -> Self {
        self - o
    }
    fn add_ref(&self, o: &Self) -> Self {
        self + o
    }
    fn scale_i64(&self, z: i64) -> Self {
        self * z
    }
    fn div_floor_ref(&self, o: &Self) -> Self {
        Integer::div_floor(self, o)
    }
    fn floor_sqrt(&self) -> Self {
        self.sqrt()
    }
    fn to_i64_exact(&self) -> Option<i64> {
        self.to_i64()
    }
    fn negate(&self) -> Self {
        -self
    }
}

fn isqrt_i128(n: i128) -> i128 {
    debug_assert!(n >= 0);
    if n < 2 {
        return n;
    }
    let mut s = (n as f64).sqrt() as i128;
    for _ in 0..2 {
        if s > 0 {
            s = (s + n / s) / 2;
        }
    }
    while (s + 1) * (s + 1) <= n {
        s += 1;
    }
    while s * s > n {
        s -= 1;
    }
    s
}

/// Immutable per-enumeration data in the backend's integer type.
struct EngineCtx<T: EnumInt> {
    rank: usize,
    tau_n: T,
    one: T,
    p: Vec<T>,
    pp: Vec<T>,
    den: Vec<T>,
    lam: Vec<Vec<T>>,
}

impl<T: EnumInt> EngineCtx<T> {
    fn build(prep: &Prepared, tau_n: &BigInt, den: &[BigInt], pp: &[BigInt]) -> Self {
        EngineCtx {
            rank: prep.rank,
            tau_n: T::from_big(tau_n),
            one: T::from_big(&BigInt::one()),
            p: prep.p.iter().map(T::from_big).collect(),
            pp: pp.iter().map(T::from_big).collect(),
            den: den.iter().map(T::from_big).collect(),
            lam: prep
                .lam
                .iter()
                .map(|row| row.iter().map(T::from_big).collect())
                .collect(),
        }
    }

    /// Half-width m of the symmetric admissible root interval [-m, m],
    /// or None when the ball contains no lattice point at all (impossible:
    /// zero is always admissible for tau >= 0, so None never fires here,
    /// but keep the guard for tau slightly below zero after roundings).
    fn root_halfwidth(&self) -> Result<Option<i64>> {
        let k = self.rank - 1;
        let w = self.tau_n.mul_ref(&self.pp[k]).div_floor_ref(&self.den[k]);
        if w.is_neg() {
            return Ok(None);
        }
        let kmax = w.floor_sqrt();
        let m = kmax
            .div_floor_ref(&self.p[k + 1])
            .to_i64_exact()
            .ok_or(Error::Overflow)?;
        Ok(Some(m))
    }
}

struct EngineState<T: EnumInt> {
    /// num[k]: numerator of the remaining budget rho_k over den[k].
    num: Vec<T>,
    /// sig[k][j] = sum over m >= j of lam[m][k] * z_m; s_k = sig[k][k+1].
    sig: Vec<Vec<T>>,
    /// ybase[k] = sum over j >= k of z_j * b_j.
    ybase: Vec<Vec<i64>>,
}

impl<T: EnumInt> EngineState<T> {
    fn fresh(ctx: &EngineCtx<T>, prep: &Prepared) -> Self {
        let zero = ctx.tau_n.sub_ref(&ctx.tau_n);
        EngineState {
            num: vec![zero.clone(); ctx.rank],
            sig: vec![vec![zero; ctx.rank + 1]; ctx.rank],
            ybase: vec![vec![0i64; prep.ambient]; ctx.rank + 1],
        }
    }

    /// Fix z at `level`, update the state, then recurse or emit the
    /// innermost line.
    #[allow(clippy::too_many_arguments)]
    fn descend<S: Sink>(
        &mut self,
        ctx: &EngineCtx<T>,
        prep: &Prepared,
        level: usize,
        z: i64,
        weight: u64,
        budget: &Budget,
        visits: &AtomicU64,
        sink: &mut S,
    ) -> Result<()> {
        debug_assert!(level >= 1, "rank-1 lattices are handled by the driver");
        let r = ctx.rank;
        if visits.fetch_add(1, AtomicOrdering::Relaxed) >= budget.max_candidates {
            return Err(Error::BudgetExceeded { budget: budget.max_candidates });
        }

        // K = p[level+1] * z + s_level; rho' = rho - K^2 / pp[level].
        let s = self.sig[level][level + 1].clone();
        let kval = ctx.p[level + 1].scale_i64(z).add_ref(&s);
        let num_here = if level == r - 1 {
            ctx.tau_n.clone()
        } else {
            self.num[level].clone()
        };
        let next_num = num_here
            .mul_ref(&ctx.pp[level])
            .sub_ref(&kval.mul_ref(&kval).mul_ref(&ctx.den[level]));

        if S::NEEDS_POINTS {
            let cols = prep.cols_i64.as_ref().expect("checked by caller");
            let (head, tail) = self.ybase.split_at_mut(level + 1);
            let src = &tail[0];
            let dst = &mut head[level];
            let col = &cols[level];
            for i in 0..dst.len() {
                dst[i] = src[i]
                    .checked_add(col[i].checked_mul(z).ok_or(Error::Overflow)?)
                    .ok_or(Error::Overflow)?;
            }
        }

        // Update partial sums for all deeper levels.
        for k in 0..level {
            let add = ctx.lam[level][k].scale_i64(z);
            self.sig[k][level] = self.sig[k][level + 1].add_ref(&add);
        }
        let nlevel = level - 1;
        self.num[nlevel] = next_num;

        // Admissible interval at the next level.
        let w = self.num[nlevel]
            .mul_ref(&ctx.pp[nlevel])
            .div_floor_ref(&ctx.den[nlevel]);
        if w.is_neg() {
            return Ok(());
        }
        let kmax = w.floor_sqrt();
        let s_next = self.sig[nlevel][nlevel + 1].clone();
        let pnext = &ctx.p[nlevel + 1];
        let lo = kmax
            .negate()
            .sub_ref(&s_next)
            .add_ref(pnext)
            .sub_ref(&ctx.one)
            .div_floor_ref(pnext)
            .to_i64_exact()
            .ok_or(Error::Overflow)?;
        let hi = kmax
            .sub_ref(&s_next)
            .div_floor_ref(pnext)
            .to_i64_exact()
            .ok_or(Error::Overflow)?;
        if lo > hi {
            return Ok(());
        }

        if nlevel == 0 {
            let used = sink.line(LineCtx {
                ybase: if S::NEEDS_POINTS {
                    Some(self.ybase[1].as_slice())
                } else {
                    None
                },
                bcol: prep.cols_i64.as_ref().map(|c| c[0].as_slice()),
                lo,
                hi,
                weight,
            })?;
            visits.fetch_add(used, AtomicOrdering::Relaxed);
            return Ok(());
        }
        for zn in lo..=hi {
            self.descend(ctx, prep, nlevel, zn, weight, budget, visits, sink)?;
        }
        Ok(())
    }
}

struct LineCtx<'a> {
    ybase: Option<&'a [i64]>,
    bcol: Option<&'a [i64]>,
    lo: i64,
    hi: i64,
    weight: u64,
}

trait Sink: Send + Sized {
    /// Whether leaf lines require point coordinates.
    const NEEDS_POINTS: bool;
    /// Whether the root-level sign symmetry may be folded.
    const MIRROR: bool;
    fn empty() -> Self;
    /// Consume one innermost line; returns the work units spent.
    fn line(&mut self, ctx: LineCtx<'_>) -> Result<u64>;
    fn merge(&mut self, other: Self);
}

struct CountSink {
    total: u128,
}

impl Sink for CountSink {
    const NEEDS_POINTS: bool = false;
    const MIRROR: bool = true;
    fn empty() -> Self {
        CountSink { total: 0 }
    }
    fn line(&mut self, ctx: LineCtx<'_>) -> Result<u64> {
        let len = (ctx.hi - ctx.lo + 1) as u128;
        self.total += len * ctx.weight as u128;
        Ok(1)
    }
    fn merge(&mut self, other: Self) {
        self.total += other.total;
    }
}

struct PrimitiveSink {
    total: u128,
    primitive: u128,
}

impl Sink for PrimitiveSink {
    const NEEDS_POINTS: bool = true;
    const MIRROR: bool = true;
    fn empty() -> Self {
        PrimitiveSink { total: 0, primitive: 0 }
    }
    fn line(&mut self, ctx: LineCtx<'_>) -> Result<u64> {
        let len = (ctx.hi - ctx.lo + 1) as u128;
        self.total += len * ctx.weight as u128;
        let (prim, work) =
            primitive_count_on_line(ctx.ybase.unwrap(), ctx.bcol.unwrap(), ctx.lo, ctx.hi);
        self.primitive += prim as u128 * ctx.weight as u128;
        Ok(work)
    }
    fn merge(&mut self, other: Self) {
        self.total += other.total;
        self.primitive += other.primitive;
    }
}

struct CollectSink {
    points: Vec<(BigInt, Vec<i64>)>,
}

impl Sink for CollectSink {
    const NEEDS_POINTS: bool = true;
    const MIRROR: bool = false;
    fn empty() -> Self {
        CollectSink { points: Vec::new() }
    }
    fn line(&mut self, ctx: LineCtx<'_>) -> Result<u64> {
        let base = ctx.ybase.unwrap();
        let col = ctx.bcol.unwrap();
        let mut y: Vec<i64> = base
            .iter()
            .zip(col)
            .map(|(b, c)| {
                c.checked_mul(ctx.lo)
                    .and_then(|m| b.checked_add(m))
                    .ok_or(Error::Overflow)
            })
            .collect::<Result<_>>()?;
        for t in ctx.lo..=ctx.hi {
            let mut norm = BigInt::from(0);
            for &v in &y {
                norm += BigInt::from(v) * BigInt::from(v);
            }
            self.points.push((norm, y.clone()));
            if t < ctx.hi {
                for (yi, ci) in y.iter_mut().zip(col) {
                    *yi = yi.checked_add(*ci).ok_or(Error::Overflow)?;
                }
            }
        }
        Ok((ctx.hi - ctx.lo + 1) as u64)
    }
    fn merge(&mut self, other: Self) {
        self.points.extend(other.points);
    }
}

const SIEVE_PRIMES: [i64; 18] =
    [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61];

/// Number of t in [lo, hi] with gcd(ybase + t * b) = 1, plus work units.
///
/// Any prime dividing such a gcd must divide every 2x2 minor of the matrix
/// [ybase | b]; the gcd of those minors therefore localizes all possible bad
/// primes. Small primes are handled by counting their residue progressions
/// with inclusion-exclusion; in the rare case of a large prime factor the
/// line falls back to per-point gcds.
fn primitive_count_on_line(ybase: &[i64], b: &[i64], lo: i64, hi: i64) -> (u64, u64) {
    if lo > hi {
        return (0, 0);
    }
    let len = (hi - lo + 1) as u64;
    if len < 8 {
        return (naive_primitive_count(ybase, b, lo, hi), len);
    }

    // Gcd of all 2x2 minors, with early exit at 1.
    let mut delta: i128 = 0;
    'outer: for i in 0..ybase.len() {
        for j in i + 1..ybase.len() {
            let m = ybase[i] as i128 * b[j] as i128 - ybase[j] as i128 * b[i] as i128;
            delta = crate::arith::gcd_i128(delta, m);
            if delta == 1 {
                break 'outer;
            }
        }
    }

    if delta == 1 {
        return (len, 4);
    }
    if delta == 0 {
        // ybase is parallel to b: y(t) = (alpha + t*beta) * u with u primitive.
        let b128: Vec<i128> = b.iter().map(|&v| v as i128).collect();
        let beta = crate::arith::content(&b128);
        debug_assert!(beta > 0, "basis columns are nonzero");
        let u: Vec<i128> = b128.iter().map(|&v| v / beta).collect();
        let idx = u.iter().position(|&v| v != 0).expect("nonzero direction");
        let alpha = ybase[idx] as i128 / u[idx];
        debug_assert!(ybase.iter().zip(&u).all(|(&y, &ui)| y as i128 == alpha * ui));
        let mut prim = 0u64;
        for target in [1i128, -1i128] {
            let num = target - alpha;
            if num.rem_euclid(beta) == 0 {
                let t = num / beta;
                if t >= lo as i128 && t <= hi as i128 {
                    prim += 1;
                }
            }
        }
        return (prim, 4);
    }

    // Split off the small prime factors of delta.
    let mut rest = delta.unsigned_abs();
    let mut classes: Vec<(i64, i64)> = Vec::new(); // (prime, bad residue)
    for &p in &SIEVE_PRIMES {
        if rest % p as u128 != 0 {
            continue;
        }
        while rest % p as u128 == 0 {
            rest /= p as u128;
        }
        let bp: Vec<i64> = b.iter().map(|&v| v.rem_euclid(p)).collect();
        if bp.iter().all(|&v| v == 0) {
            if ybase.iter().all(|&v| v.rem_euclid(p) == 0) {
                // Every point on the line is divisible by p.
                return (0, 8);
            }
            continue;
        }
        let i = bp.iter().position(|&v| v != 0).unwrap();
        let inv = mod_inverse(bp[i], p);
        let r = (-(ybase[i].rem_euclid(p)) * inv).rem_euclid(p);
        classes.push((p, r));
    }
    if rest != 1 || classes.len() > 6 {
        return (naive_primitive_count(ybase, b, lo, hi), len);
    }

    // Inclusion-exclusion over subsets of bad residue classes (moduli are
    // distinct primes, so CRT always produces one class per subset).
    let mut bad: i64 = 0;
    let k = classes.len();
    for mask in 1u32..(1 << k) {
        let mut modulus: i64 = 1;
        let mut residue: i64 = 0;
        for (idx, &(p, r)) in classes.iter().enumerate() {
            if mask & (1 << idx) == 0 {
                continue;
            }
            // Merge x = residue (mod modulus) with x = r (mod p).
            let delta_r = (r - residue).rem_euclid(p);
            let step = (mod_inverse(modulus.rem_euclid(p), p) * delta_r).rem_euclid(p);
            residue += modulus * step;
            modulus *= p;
        }
        let cnt = count_in_progression(residue, modulus, lo, hi);
        if mask.count_ones() % 2 == 1 {
            bad += cnt;
        } else {
            bad -= cnt;
        }
    }
    (len - bad as u64, 8 + 2 * (1u64 << k))
}

fn naive_primitive_count(ybase: &[i64], b: &[i64], lo: i64, hi: i64) -> u64 {
    let mut y: Vec<i64> = ybase.iter().zip(b).map(|(&a, &c)| a + c * lo).collect();
    let mut prim = 0u64;
    let mut t = lo;
    loop {
        let mut g: u64 = 0;
        for &v in &y {
            g = gcd_u64(g, v.unsigned_abs());
            if g == 1 {
                break;
            }
        }
        if g == 1 {
            prim += 1;
        }
        if t == hi {
            break;
        }
        t += 1;
        for (yi, ci) in y.iter_mut().zip(b) {
            *yi += *ci;
        }
    }
    prim
}

/// Count of x in [lo, hi] with x = residue (mod modulus), modulus > 0.
fn count_in_progression(residue: i64, modulus: i64, lo: i64, hi: i64) -> i64 {
    let first = lo + (residue - lo).rem_euclid(modulus);
    if first > hi {
        0
    } else {
        (hi - first) / modulus + 1
    }
}

/// Inverse of a modulo prime p (a not divisible by p).
fn mod_inverse(a: i64, p: i64) -> i64 {
    let (mut t, mut new_t) = (0i64, 1i64);
    let (mut r, mut new_r) = (p, a.rem_euclid(p));
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    debug_assert_eq!(r, 1, "argument must be invertible");
    t.rem_euclid(p)
}
