//! Exact LLL reduction over the rationals.
//!
//! Only used to precondition bases before enumeration (smaller, closer to
//! orthogonal, so the search tree stays tight) and to supply enumeration
//! bounds. Never used as an answer: every count and every minimum is
//! established by complete enumeration afterwards.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::dot_big;

const DELTA_NUM: i32 = 3;
const DELTA_DEN: i32 = 4;

/// Gram-Schmidt data for the current basis: squared norms of the
/// orthogonalized vectors and the projection coefficients mu.
struct Gso {
    b_star_sq: Vec<BigRational>,
    mu: Vec<Vec<BigRational>>,
}

fn gso(cols: &[Vec<BigInt>]) -> Gso {
    let r = cols.len();
    let mut mu = vec![vec![BigRational::zero(); r]; r];
    let mut b_star_sq = vec![BigRational::zero(); r];
    // <b_i, b*_j> can be expanded over integer dots and earlier mu's.
    let mut star_dot = vec![vec![BigRational::zero(); r]; r]; // <b_i, b*_j>
    for i in 0..r {
        for j in 0..=i {
            let mut acc = BigRational::from_integer(dot_big(&cols[i], &cols[j]));
            for t in 0..j {
                let m = &mu[j][t] * &star_dot[i][t];
                acc -= m;
            }
            star_dot[i][j] = acc;
        }
        b_star_sq[i] = star_dot[i][i].clone();
        for j in 0..i {
            mu[i][j] = if b_star_sq[j].is_zero() {
                BigRational::zero()
            } else {
                &star_dot[i][j] / &b_star_sq[j]
            };
        }
    }
    Gso { b_star_sq, mu }
}

fn round_rational(x: &BigRational) -> BigInt {
    let two = BigInt::from(2);
    let num = x.numer() * &two + x.denom() * if x.is_negative() { -1 } else { 1 };
    num / (x.denom() * &two)
}

/// LLL with delta = 3/4 on basis columns; entries exact throughout.
pub(crate) fn lll_reduce(mut cols: Vec<Vec<BigInt>>) -> Vec<Vec<BigInt>> {
    let r = cols.len();
    if r <= 1 {
        return cols;
    }
    let mut g = gso(&cols);
    let delta = BigRational::new(BigInt::from(DELTA_NUM), BigInt::from(DELTA_DEN));
    let mut k = 1usize;
    while k < r {
        // Size-reduce b_k against earlier vectors.
        for j in (0..k).rev() {
            let q = round_rational(&g.mu[k][j]);
            if !q.is_zero() {
                let (head, tail) = cols.split_at_mut(k);
                let bj = &head[j];
                for (t, v) in tail[0].iter_mut().enumerate() {
                    *v -= &q * &bj[t];
                }
                g = gso(&cols);
            }
        }
        // Lovasz condition.
        let lhs = &g.b_star_sq[k] + &g.mu[k][k - 1] * &g.mu[k][k - 1] * &g.b_star_sq[k - 1];
        if lhs >= &delta * &g.b_star_sq[k - 1] {
            k += 1;
        } else {
            cols.swap(k, k - 1);
            g = gso(&cols);
            k = k.max(2) - 1;
        }
    }
    cols
}

/// Max squared norm over the basis columns; a valid complete-enumeration
/// bound for all successive minima of the lattice they span.
pub(crate) fn max_column_norm_sq(cols: &[Vec<BigInt>]) -> BigInt {
    cols.iter()
        .map(|c| dot_big(c, c))
        .max()
        .unwrap_or_else(BigInt::zero)
}
