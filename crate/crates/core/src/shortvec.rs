//! Explicit short vectors orthogonal to a Veronese image.
//!
//! For a primitive integer point x, the integer vectors orthogonal to its
//! Veronese coordinates form a lattice of rank N-1 (N the number of
//! monomials), and that lattice already contains N-1 linearly independent
//! vectors no longer than x itself. The construction is fully explicit:
//!
//! * if x_0 != 0, every monomial P other than T_0^d pairs with
//!   Q = (P / T_i) * T_0 for the least i >= 1 dividing P, and the vector
//!   with -x_i at Q and x_0 at P kills the form since
//!   x_i * Q(x) = x_0 * P(x) up to sign. Each vector has its trailing
//!   nonzero entry x_0 at a distinct index, so the family is in echelon
//!   form and independent.
//! * if x_0 = 0, the leading monomials (those divisible by T_0) vanish at
//!   x, the corresponding standard basis vectors qualify, and the
//!   construction recurses on the tail of x in one variable fewer.

use crate::arith::is_primitive_vector;
use crate::error::{Error, Result};
use crate::monomials::{monomial_count, MonomialBasis};

/// N-1 independent vectors of the orthogonal lattice of the Veronese image
/// of `point`, all of squared norm at most ||point||^2.
#[derive(Debug, Clone)]
pub struct ShortFamily {
    point: Vec<i128>,
    vectors: Vec<Vec<i128>>,
}

impl ShortFamily {
    pub fn point(&self) -> &[i128] {
        &self.point
    }

    pub fn vectors(&self) -> &[Vec<i128>] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Build the family for a primitive x (gcd of coordinates 1, hence nonzero).
pub fn build_short_family(basis: &MonomialBasis, x: &[i128]) -> Result<ShortFamily> {
    if x.len() != basis.dimension() + 1 {
        return Err(Error::InvalidInput(format!(
            "point has {} coordinates, expected {}",
            x.len(),
            basis.dimension() + 1
        )));
    }
    if !is_primitive_vector(x) {
        return Err(Error::NonPrimitiveVector);
    }
    let mut vectors = Vec::with_capacity(basis.len() - 1);
    emit(basis, x, &mut vectors)?;
    debug_assert_eq!(vectors.len(), basis.len() - 1);
    Ok(ShortFamily { point: x.to_vec(), vectors })
}

fn emit(basis: &MonomialBasis, x: &[i128], out: &mut Vec<Vec<i128>>) -> Result<()> {
    let n_count = basis.len();
    if x[0] != 0 {
        // Index 0 is T_0^d; every other monomial gets one vector.
        for (idx, exp) in basis.exponents().iter().enumerate().skip(1) {
            let i = exp[1..]
                .iter()
                .position(|&e| e > 0)
                .map(|j| j + 1)
                .expect("only T_0^d has no later variable");
            let mut q = exp.clone();
            q[i] -= 1;
            q[0] += 1;
            let q_idx = basis.index_of(&q).expect("Q is a degree-d monomial");
            debug_assert!(q_idx < idx, "Q precedes P in the fixed order");
            let mut v = vec![0i128; n_count];
            v[q_idx] = -x[i];
            v[idx] = x[0];
            out.push(v);
        }
        return Ok(());
    }

    // x_0 = 0: the monomials divisible by T_0 come first in the order and
    // vanish at x, so their standard basis vectors are orthogonal. The
    // remaining block is the degree-d basis in one variable fewer.
    let n = basis.dimension();
    debug_assert!(n >= 1, "a primitive point in one variable has x_0 != 0");
    let tail_count = monomial_count(basis.degree(), n - 1) as usize;
    let head = n_count - tail_count;
    for j in 0..head {
        let mut v = vec![0i128; n_count];
        v[j] = 1;
        out.push(v);
    }
    let sub_basis = MonomialBasis::new(basis.degree(), n - 1)?;
    debug_assert!(basis.exponents()[head..]
        .iter()
        .zip(sub_basis.exponents())
        .all(|(full, sub)| full[0] == 0 && &full[1..] == sub.as_slice()));
    let mut sub_vectors = Vec::with_capacity(tail_count.saturating_sub(1));
    emit(&sub_basis, &x[1..], &mut sub_vectors)?;
    for w in sub_vectors {
        let mut v = vec![0i128; n_count];
        v[head..].copy_from_slice(&w);
        out.push(v);
    }
    Ok(())
}
