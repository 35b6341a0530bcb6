//! Exact successive minima by complete enumeration.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Budget, Error, Result};

use super::{enumerate::Prepared, IntegralLattice};

/// The squared successive minima of a lattice, in non-decreasing order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimaProfile {
    pub values_squared: Vec<BigInt>,
}

impl MinimaProfile {
    pub fn max_squared(&self) -> &BigInt {
        self.values_squared.last().expect("rank >= 1")
    }

    pub fn to_f64(&self) -> Vec<f64> {
        use num_traits::ToPrimitive;
        self.values_squared
            .iter()
            .map(|v| v.to_f64().map(f64::sqrt).unwrap_or(f64::NAN))
            .collect()
    }
}

/// Enumerate every lattice vector within the bound and greedily extend a
/// maximal independent family in order of increasing norm. The definition
/// of the minima makes this exact; the caller must supply a bound that
/// actually contains R independent vectors (a reduced basis or an explicit
/// short family supplies one).
pub(super) fn successive_minima_sq(
    lat: &IntegralLattice,
    bound_sq: &BigRational,
    budget: &Budget,
) -> Result<MinimaProfile> {
    let rank = lat.rank();
    let prep = Prepared::new(lat)?;
    let points = prep.collect(bound_sq, budget)?;

    let mut chosen: Vec<Vec<i128>> = Vec::with_capacity(rank);
    let mut values = Vec::with_capacity(rank);
    for (norm_sq, y) in points {
        if norm_sq.is_zero() {
            continue;
        }
        let cand: Vec<i128> = y.iter().map(|&v| v as i128).collect();
        if extends_independent(&chosen, &cand) {
            chosen.push(cand);
            values.push(norm_sq);
            if values.len() == rank {
                return Ok(MinimaProfile { values_squared: values });
            }
        }
    }
    Err(Error::BoundTooSmall { found: values.len(), need: rank })
}

/// Rank test by fraction-free elimination over the integers.
fn extends_independent(chosen: &[Vec<i128>], cand: &[i128]) -> bool {
    let mut rows: Vec<Vec<i128>> = chosen.to_vec();
    rows.push(cand.to_vec());
    let m = rows.len();
    let n = rows[0].len();
    let mut rank = 0usize;
    let mut col = 0usize;
    while rank < m && col < n {
        let Some(pivot) = (rank..m).find(|&i| rows[i][col] != 0) else {
            col += 1;
            continue;
        };
        rows.swap(rank, pivot);
        for i in rank + 1..m {
            if rows[i][col] == 0 {
                continue;
            }
            let a = rows[rank][col];
            let b = rows[i][col];
            let g = crate::arith::gcd_i128(a, b);
            let (fa, fb) = (b / g, a / g);
            for j in col..n {
                // row_i = row_i * fb - row_rank * fa, exact and content-reduced
                let v = rows[i][j]
                    .checked_mul(fb)
                    .and_then(|x| rows[rank][j].checked_mul(fa).map(|y| (x, y)))
                    .map(|(x, y)| x - y);
                match v {
                    Some(val) => rows[i][j] = val,
                    None => return extends_independent_big(chosen, cand),
                }
            }
            let content = crate::arith::content(&rows[i][col..]);
            if content > 1 {
                for v in rows[i][col..].iter_mut() {
                    *v /= content;
                }
            }
        }
        rank += 1;
        col += 1;
    }
    rank == m
}

/// Arbitrary-precision fallback for the rank test (rarely needed).
fn extends_independent_big(chosen: &[Vec<i128>], cand: &[i128]) -> bool {
    let mut cols: Vec<Vec<BigInt>> = chosen
        .iter()
        .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
        .collect();
    cols.push(cand.iter().map(|&v| BigInt::from(v)).collect());
    let gram = super::gram_matrix(&cols);
    !super::bareiss_determinant(gram).is_zero()
}
