//! Integral lattices with exact invariants.
//!
//! A lattice is stored through an integer basis matrix (columns are basis
//! vectors). Determinants are handled through their squares, which are
//! integers; radii of balls are handled through their squares, which are
//! rationals. Nothing here is floating point except convenience accessors.

mod enumerate;
mod lll;
mod minima;

pub use minima::MinimaProfile;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{floor_sqrt_ratio, moebius_sieve};
use crate::error::{Budget, Error, Result};

/// A full-rank-by-construction integral lattice of rank R inside Z^N.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegralLattice {
    ambient: usize,
    /// Basis vectors as columns; linearly independent over Q.
    basis: Vec<Vec<BigInt>>,
}

impl IntegralLattice {
    /// Build a lattice from basis columns, rejecting dependent input.
    pub fn from_columns(ambient: usize, columns: Vec<Vec<i128>>) -> Result<Self> {
        let cols: Vec<Vec<BigInt>> = columns
            .iter()
            .map(|c| c.iter().map(|&v| BigInt::from(v)).collect())
            .collect();
        Self::from_big_columns(ambient, cols)
    }

    pub(crate) fn from_big_columns(ambient: usize, columns: Vec<Vec<BigInt>>) -> Result<Self> {
        if columns.is_empty() || columns.len() > ambient {
            return Err(Error::InvalidInput(format!(
                "rank {} out of range for ambient dimension {}",
                columns.len(),
                ambient
            )));
        }
        for c in &columns {
            if c.len() != ambient {
                return Err(Error::InvalidInput(
                    "basis column length differs from ambient dimension".into(),
                ));
            }
        }
        let lat = IntegralLattice { ambient, basis: columns };
        if lat.det_squared().is_zero() {
            return Err(Error::RankDeficient);
        }
        Ok(lat)
    }

    /// The standard lattice Z^n.
    pub fn standard(n: usize) -> Self {
        let mut basis = vec![vec![BigInt::zero(); n]; n];
        for (i, col) in basis.iter_mut().enumerate() {
            col[i] = BigInt::one();
        }
        IntegralLattice { ambient: n, basis }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis_columns(&self) -> &[Vec<BigInt>] {
        &self.basis
    }

    /// det(Lambda)^2 = det(B^T B), an exact integer independent of the
    /// choice of basis.
    pub fn det_squared(&self) -> BigInt {
        let g = gram_matrix(&self.basis);
        bareiss_determinant(g)
    }

    /// Convenience float determinant.
    pub fn det(&self) -> f64 {
        self.det_squared().to_f64().map(f64::sqrt).unwrap_or(f64::NAN)
    }

    /// The lattice of all integer vectors orthogonal to this one
    /// (integer points of the orthogonal complement of its span).
    pub fn orthogonal(&self) -> Result<IntegralLattice> {
        kernel_of_big(self.ambient, &self.basis)
    }

    /// True when the lattice equals all integer points of its rational
    /// span, i.e. all Smith invariant factors of the basis matrix are 1.
    pub fn is_primitive(&self) -> bool {
        let mat: Vec<Vec<BigInt>> = (0..self.ambient)
            .map(|i| self.basis.iter().map(|c| c[i].clone()).collect())
            .collect();
        smith_invariant_factors(mat).iter().all(|f| f.is_one())
    }

    /// Exact number of lattice vectors y (including zero) with
    /// ||y||^2 <= radius_sq.
    pub fn count_points_sq(&self, radius_sq: &BigRational, budget: &Budget) -> Result<u128> {
        if radius_sq.is_negative() {
            return Ok(0);
        }
        let prep = enumerate::Prepared::new(self)?;
        prep.count(radius_sq, budget)
    }

    /// As `count_points_sq` with the radius given directly.
    pub fn count_points(&self, radius: &BigRational, budget: &Budget) -> Result<u128> {
        if radius.is_negative() {
            return Ok(0);
        }
        self.count_points_sq(&(radius * radius), budget)
    }

    /// Exact number of lattice vectors of norm <= sqrt(radius_sq) whose
    /// coordinates are coprime, by filtering the full enumeration.
    pub fn count_primitive_points_direct_sq(
        &self,
        radius_sq: &BigRational,
        budget: &Budget,
    ) -> Result<u128> {
        if !self.is_primitive() {
            return Err(Error::NotPrimitive);
        }
        if radius_sq.is_negative() {
            return Ok(0);
        }
        let prep = enumerate::Prepared::new(self)?;
        Ok(prep.count_with_primitive(radius_sq, budget)?.1)
    }

    /// Same count through Moebius inversion over the dilation factor:
    /// sum over l <= T of mu(l) * (count(T/l) - 1). Requires primitivity,
    /// which makes (1/l * Lambda) cap Z^N = Lambda.
    pub fn count_primitive_points_moebius_sq(
        &self,
        radius_sq: &BigRational,
        budget: &Budget,
    ) -> Result<u128> {
        if !self.is_primitive() {
            return Err(Error::NotPrimitive);
        }
        if radius_sq.is_negative() {
            return Ok(0);
        }
        let floor_t = floor_sqrt_ratio(radius_sq).to_u64().ok_or(Error::Overflow)?;
        if floor_t == 0 {
            return Ok(0);
        }
        let mu = moebius_sieve(floor_t as usize);
        let prep = enumerate::Prepared::new(self)?;
        let mut acc: i128 = 0;
        for ell in 1..=floor_t {
            let m = mu[ell as usize];
            if m == 0 {
                continue;
            }
            let scaled = radius_sq / BigRational::from_integer(BigInt::from(ell * ell));
            let count = prep.count(&scaled, budget)? as i128 - 1;
            acc += m as i128 * count;
        }
        u128::try_from(acc).map_err(|_| Error::Overflow)
    }

    /// Both primitive counts at once; they agree by construction of the
    /// Moebius identity, and the pair is exposed for cross-checking.
    pub fn count_primitive_points_both_sq(
        &self,
        radius_sq: &BigRational,
        budget: &Budget,
    ) -> Result<(u128, u128)> {
        Ok((
            self.count_primitive_points_direct_sq(radius_sq, budget)?,
            self.count_primitive_points_moebius_sq(radius_sq, budget)?,
        ))
    }

    /// Exact successive minima (as squared values) by complete enumeration
    /// within the given squared radius.
    pub fn successive_minima_sq(
        &self,
        bound_sq: &BigRational,
        budget: &Budget,
    ) -> Result<MinimaProfile> {
        minima::successive_minima_sq(self, bound_sq, budget)
    }

    /// A squared radius certified to contain rank-many independent lattice
    /// vectors: the longest column of a reduced basis. Any basis works as a
    /// bound; reduction just keeps the subsequent enumeration small.
    pub fn minima_search_bound_sq(&self) -> BigInt {
        lll::max_column_norm_sq(&lll::lll_reduce(self.basis.clone()))
    }
}

/// Kernel lattice of a family of independent integer vectors: all y in Z^N
/// with <c_i, y> = 0 for every i. The result is primitive of rank N - k.
pub fn kernel_lattice(vectors: &[Vec<i128>]) -> Result<IntegralLattice> {
    if vectors.is_empty() {
        return Err(Error::InvalidInput("need at least one vector".into()));
    }
    let n = vectors[0].len();
    let big: Vec<Vec<BigInt>> = vectors
        .iter()
        .map(|v| v.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    kernel_of_big(n, &big)
}

fn kernel_of_big(n: usize, vectors: &[Vec<BigInt>]) -> Result<IntegralLattice> {
    let k = vectors.len();
    for v in vectors {
        if v.len() != n {
            return Err(Error::InvalidInput("mixed vector lengths".into()));
        }
    }
    if k >= n {
        return Err(Error::InvalidInput(format!(
            "need k <= N-1 constraints, got k={k} in dimension {n}"
        )));
    }
    // Independence check up front so the failure mode is explicit.
    if bareiss_determinant(gram_matrix(vectors)).is_zero() {
        return Err(Error::DependentVectors);
    }

    // Column reduction of the k x N constraint matrix M, mirroring every
    // column operation on an N x N identity U. Columns of U whose M-column
    // is zeroed out form a basis of the integer kernel, which is the full
    // set of integer points of the rational kernel, hence primitive.
    let mut m: Vec<Vec<BigInt>> = (0..k)
        .map(|i| (0..n).map(|j| vectors[i][j].clone()).collect())
        .collect();
    let mut u: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect();

    let mut pivot_col = 0usize;
    for row in 0..k {
        // Gcd-reduce columns pivot_col..n on this row.
        loop {
            let mut best: Option<(usize, BigInt)> = None;
            for col in pivot_col..n {
                let v = m[row][col].abs();
                if !v.is_zero() {
                    match &best {
                        Some((_, b)) if *b <= v => {}
                        _ => best = Some((col, v)),
                    }
                }
            }
            let Some((bc, _)) = best else { break };
            swap_columns(&mut m, &mut u, pivot_col, bc);
            let mut again = false;
            let pivot = m[row][pivot_col].clone();
            for col in pivot_col + 1..n {
                if m[row][col].is_zero() {
                    continue;
                }
                let q = div_round(&m[row][col], &pivot);
                if !q.is_zero() {
                    sub_scaled_column(&mut m, &mut u, col, pivot_col, &q);
                }
                if !m[row][col].is_zero() {
                    again = true;
                }
            }
            if !again {
                break;
            }
        }
        if !m[row][pivot_col].is_zero() {
            pivot_col += 1;
        }
    }
    debug_assert_eq!(pivot_col, k, "independent constraints must all pivot");

    let kernel_cols: Vec<Vec<BigInt>> = (pivot_col..n)
        .map(|col| (0..n).map(|i| u[i][col].clone()).collect())
        .collect();
    debug_assert!(kernel_cols
        .iter()
        .all(|c| (0..k).all(|row| dot_big(&vectors[row], c).is_zero())));

    let reduced = lll::lll_reduce(kernel_cols);
    let lat = IntegralLattice::from_big_columns(n, reduced)?;
    debug_assert!(lat.is_primitive());
    Ok(lat)
}

/// det^2 of the lattice spanned by the given columns (zero iff dependent).
pub fn span_det_squared(vectors: &[Vec<i128>]) -> BigInt {
    let big: Vec<Vec<BigInt>> = vectors
        .iter()
        .map(|v| v.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    bareiss_determinant(gram_matrix(&big))
}

/// Gcd of all k x k minors of the N x k matrix with the given columns.
pub fn minors_gcd(vectors: &[Vec<i128>]) -> Result<BigInt> {
    if vectors.is_empty() {
        return Err(Error::InvalidInput("need at least one vector".into()));
    }
    let k = vectors.len();
    let n = vectors[0].len();
    if k > n {
        return Err(Error::InvalidInput("more vectors than coordinates".into()));
    }
    let mut g = BigInt::zero();
    let mut rows: Vec<usize> = (0..k).collect();
    loop {
        let sub: Vec<Vec<BigInt>> = rows
            .iter()
            .map(|&r| vectors.iter().map(|c| BigInt::from(c[r])).collect())
            .collect();
        g = g.gcd(&bareiss_determinant(sub));
        if g.is_one() {
            return Ok(g);
        }
        // next k-combination of 0..n
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(g);
            }
            i -= 1;
            if rows[i] != i + n - k {
                rows[i] += 1;
                for j in i + 1..k {
                    rows[j] = rows[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Determinant of the kernel lattice straight from the constraint vectors:
/// det(span of the c_i) divided by the gcd of the k x k minors. Returned
/// as the exact squared value.
pub fn orthogonal_det_squared_formula(vectors: &[Vec<i128>]) -> Result<BigRational> {
    if vectors.is_empty() {
        return Err(Error::InvalidInput("need at least one vector".into()));
    }
    let n = vectors[0].len();
    if vectors.len() >= n {
        return Err(Error::InvalidInput(
            "need k <= N-1 vectors for a nonzero orthogonal lattice".into(),
        ));
    }
    let num = span_det_squared(vectors);
    if num.is_zero() {
        return Err(Error::DependentVectors);
    }
    let g = minors_gcd(vectors)?;
    Ok(BigRational::new(num, &g * &g))
}

pub(crate) fn gram_matrix(cols: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let r = cols.len();
    let mut g = vec![vec![BigInt::zero(); r]; r];
    for i in 0..r {
        for j in i..r {
            let v = dot_big(&cols[i], &cols[j]);
            g[i][j] = v.clone();
            g[j][i] = v;
        }
    }
    g
}

pub(crate) fn dot_big(a: &[BigInt], b: &[BigInt]) -> BigInt {
    let mut acc = BigInt::zero();
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

/// Fraction-free determinant; consumes its argument.
pub(crate) fn bareiss_determinant(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = 1i32;
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &a[k][k] * &a[i][j] - &a[i][k] * &a[k][j];
                a[i][j] = num / &prev;
            }
        }
        prev = a[k][k].clone();
        if k + 1 < n {
            for i in k + 1..n {
                a[i][k] = BigInt::zero();
            }
        }
    }
    if sign < 0 {
        -a[n - 1][n - 1].clone()
    } else {
        a[n - 1][n - 1].clone()
    }
}

/// Smith invariant factors (diagonal of the Smith normal form), in order.
pub(crate) fn smith_invariant_factors(mut a: Vec<Vec<BigInt>>) -> Vec<BigInt> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut out = Vec::new();
    let mut top = 0usize;
    while top < rows.min(cols) {
        // Find a nonzero pivot in the remaining block.
        let mut found = None;
        'search: for i in top..rows {
            for j in top..cols {
                if !a[i][j].is_zero() {
                    found = Some((i, j));
                    break 'search;
                }
            }
        }
        let Some((pi, pj)) = found else { break };
        a.swap(top, pi);
        for row in a.iter_mut() {
            row.swap(top, pj);
        }
        // Reduce row and column by Euclidean steps until clean.
        loop {
            let mut dirty = false;
            for i in top + 1..rows {
                if a[i][top].is_zero() {
                    continue;
                }
                if a[i][top].magnitude() < a[top][top].magnitude() {
                    a.swap(top, i);
                    dirty = true;
                }
                let q = div_round(&a[i][top].clone(), &a[top][top].clone());
                if !q.is_zero() {
                    for j in top..cols {
                        let s = &a[top][j] * &q;
                        a[i][j] -= s;
                    }
                }
                if !a[i][top].is_zero() {
                    dirty = true;
                }
            }
            for j in top + 1..cols {
                if a[top][j].is_zero() {
                    continue;
                }
                if a[top][j].magnitude() < a[top][top].magnitude() {
                    for row in a.iter_mut() {
                        row.swap(top, j);
                    }
                    dirty = true;
                }
                let q = div_round(&a[top][j].clone(), &a[top][top].clone());
                if !q.is_zero() {
                    for i in top..rows {
                        let s = &a[i][top] * &q;
                        a[i][j] -= s;
                    }
                }
                if !a[top][j].is_zero() {
                    dirty = true;
                }
            }
            if !dirty {
                break;
            }
        }
        out.push(a[top][top].abs());
        top += 1;
    }
    // Enforce the divisibility chain; for our primitivity test only the
    // multiset matters, but keep the canonical form anyway.
    for i in 0..out.len() {
        for j in i + 1..out.len() {
            if out[i].is_zero() && out[j].is_zero() {
                continue;
            }
            let g = out[i].gcd(&out[j]);
            let l = if g.is_zero() { BigInt::zero() } else { &out[i] / &g * &out[j] };
            out[i] = g;
            out[j] = l;
        }
    }
    out
}

fn swap_columns(m: &mut [Vec<BigInt>], u: &mut [Vec<BigInt>], a: usize, b: usize) {
    if a == b {
        return;
    }
    for row in m.iter_mut() {
        row.swap(a, b);
    }
    for row in u.iter_mut() {
        row.swap(a, b);
    }
}

/// col_to -= q * col_from, applied to both matrices.
fn sub_scaled_column(m: &mut [Vec<BigInt>], u: &mut [Vec<BigInt>], to: usize, from: usize, q: &BigInt) {
    for row in m.iter_mut() {
        let s = &row[from] * q;
        row[to] -= s;
    }
    for row in u.iter_mut() {
        let s = &row[from] * q;
        row[to] -= s;
    }
}

/// Rounded division, used to keep Euclidean steps shrinking fast.
fn div_round(a: &BigInt, b: &BigInt) -> BigInt {
    let (q, r) = a.div_rem(b);
    if &r.abs() * 2 > b.abs() {
        if (r.is_negative()) == (b.is_negative()) {
            q + 1
        } else {
            q - 1
        }
    } else {
        q
    }
}

#[cfg(test)]
mod tests;
