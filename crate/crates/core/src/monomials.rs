//! Ordered monomial bases and the Veronese coordinate map.
//!
//! Monomials of degree `d` in `n+1` variables are listed in decreasing
//! lexicographic order on the exponent tuple `(e_0, ..., e_n)` with `e_0`
//! most significant, so index 0 is always `T_0^d`. All evaluation is exact
//! `i128` arithmetic with overflow detection.

use num_bigint::BigInt;

use crate::arith::{binomial, checked_add, checked_mul, checked_pow, norm_sq_big};
use crate::error::{Error, Result};

/// The ordered list of degree-`d` exponent tuples in `n+1` variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialBasis {
    d: u32,
    n: usize,
    exponents: Vec<Vec<u32>>,
}

/// binomial(n + d, d), the number of degree-`d` monomials in `n+1` variables.
pub fn monomial_count(d: u32, n: usize) -> u128 {
    binomial(n as u64 + d as u64, d as u64)
}

impl MonomialBasis {
    /// Build the basis for degree `d >= 1` in `n+1` variables.
    pub fn new(d: u32, n: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidInput("degree must be at least 1".into()));
        }
        let mut exponents = Vec::with_capacity(monomial_count(d, n) as usize);
        let mut current = vec![0u32; n + 1];
        gen_decreasing_lex(d, 0, &mut current, &mut exponents);
        debug_assert_eq!(exponents.len() as u128, monomial_count(d, n));
        Ok(MonomialBasis { d, n, exponents })
    }

    pub fn degree(&self) -> u32 {
        self.d
    }

    /// Projective dimension n (monomials live in n+1 variables).
    pub fn dimension(&self) -> usize {
        self.n
    }

    /// Number of monomials N = binomial(n + d, d).
    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        false // d >= 1 guarantees at least one monomial
    }

    pub fn exponents(&self) -> &[Vec<u32>] {
        &self.exponents
    }

    /// Index of an exponent tuple in the fixed order, if present.
    pub fn index_of(&self, tuple: &[u32]) -> Option<usize> {
        // The list is sorted in decreasing lex order.
        self.exponents
            .binary_search_by(|probe| cmp_desc_lex(probe, tuple))
            .ok()
    }

    /// Evaluate all monomials at `x`, i.e. the Veronese coordinates of `x`.
    /// Homogeneous of degree d: scaling `x` by c scales the result by c^d.
    pub fn veronese_embed(&self, x: &[i128]) -> Result<Vec<i128>> {
        self.check_point_len(x)?;
        self.exponents.iter().map(|e| eval_monomial(e, x)).collect()
    }

    /// Inner product of a coefficient vector with the Veronese coordinates:
    /// zero exactly when `x` lies on the hypersurface with coefficients `a`.
    pub fn evaluate_form(&self, a: &[i128], x: &[i128]) -> Result<i128> {
        self.check_point_len(x)?;
        if a.len() != self.len() {
            return Err(Error::InvalidInput(format!(
                "coefficient vector has length {}, expected {}",
                a.len(),
                self.len()
            )));
        }
        let mut acc: i128 = 0;
        for (coeff, e) in a.iter().zip(&self.exponents) {
            acc = checked_add(acc, checked_mul(*coeff, eval_monomial(e, x)?)?)?;
        }
        Ok(acc)
    }

    /// Exact squared Euclidean norm of the Veronese coordinates.
    pub fn veronese_norm_sq(&self, x: &[i128]) -> Result<BigInt> {
        Ok(norm_sq_big(&self.veronese_embed(x)?))
    }

    fn check_point_len(&self, x: &[i128]) -> Result<()> {
        if x.len() != self.n + 1 {
            return Err(Error::InvalidInput(format!(
                "point has {} coordinates, expected {}",
                x.len(),
                self.n + 1
            )));
        }
        Ok(())
    }
}

/// Decreasing lex order with the first entry most significant.
fn cmp_desc_lex(a: &[u32], b: &[u32]) -> std::cmp::Ordering {
    b.cmp(a)
}

fn gen_decreasing_lex(left: u32, pos: usize, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if pos == current.len() - 1 {
        current[pos] = left;
        out.push(current.clone());
        current[pos] = 0;
        return;
    }
    for e in (0..=left).rev() {
        current[pos] = e;
        gen_decreasing_lex(left - e, pos + 1, current, out);
    }
    current[pos] = 0;
}

fn eval_monomial(e: &[u32], x: &[i128]) -> Result<i128> {
    let mut acc: i128 = 1;
    for (&xi, &ei) in x.iter().zip(e) {
        if ei > 0 {
            acc = checked_mul(acc, checked_pow(xi, ei)?)?;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn basis_2_2_is_pinned() {
        let b = MonomialBasis::new(2, 2).unwrap();
        let want: Vec<Vec<u32>> = vec![
            vec![2, 0, 0],
            vec![1, 1, 0],
            vec![1, 0, 1],
            vec![0, 2, 0],
            vec![0, 1, 1],
            vec![0, 0, 2],
        ];
        assert_eq!(b.exponents(), &want[..]);
    }

    #[test]
    fn basis_1_3_is_the_variables() {
        let b = MonomialBasis::new(1, 3).unwrap();
        let want: Vec<Vec<u32>> = vec![
            vec![1, 0, 0, 0],
            vec![0, 1, 0, 0],
            vec![0, 0, 1, 0],
            vec![0, 0, 0, 1],
        ];
        assert_eq!(b.exponents(), &want[..]);
    }

    #[test]
    fn basis_3_3_endpoints() {
        let b = MonomialBasis::new(3, 3).unwrap();
        assert_eq!(b.len(), 20);
        assert_eq!(b.exponents()[0], vec![3, 0, 0, 0]);
        assert_eq!(b.exponents()[19], vec![0, 0, 0, 3]);
    }

    #[test]
    fn degree_zero_rejected() {
        assert!(MonomialBasis::new(0, 2).is_err());
    }

    #[test]
    fn counts_match_independent_pascal() {
        // Pascal triangle computed on its own, no binomial() reuse.
        let max = 9usize;
        let mut pascal = vec![vec![1u128]];
        for r in 1..=2 * max {
            let prev = &pascal[r - 1];
            let mut row = vec![1u128];
            for i in 1..r {
                row.push(prev[i - 1] + prev[i]);
            }
            row.push(1);
            pascal.push(row);
        }
        for d in 1..=6u32 {
            for n in 0..=5usize {
                let b = MonomialBasis::new(d, n).unwrap();
                assert_eq!(b.len() as u128, pascal[n + d as usize][d as usize]);
            }
        }
    }

    #[test]
    fn basis_is_strictly_decreasing_and_degree_d() {
        for (d, n) in [(2u32, 2usize), (3, 2), (2, 3), (3, 3), (4, 2)] {
            let b = MonomialBasis::new(d, n).unwrap();
            for e in b.exponents() {
                assert_eq!(e.iter().sum::<u32>(), d);
            }
            for w in b.exponents().windows(2) {
                assert!(w[0] > w[1], "not strictly decreasing: {:?} {:?}", w[0], w[1]);
            }
            for (i, e) in b.exponents().iter().enumerate() {
                assert_eq!(b.index_of(e), Some(i));
            }
            assert_eq!(b.index_of(&vec![d + 1; n + 1]), None);
        }
    }

    #[test]
    fn veronese_examples() {
        let b = MonomialBasis::new(2, 1).unwrap();
        assert_eq!(b.veronese_embed(&[2, 3]).unwrap(), vec![4, 6, 9]);

        let b = MonomialBasis::new(1, 2).unwrap();
        assert_eq!(b.veronese_embed(&[5, -7, 0]).unwrap(), vec![5, -7, 0]);

        let b = MonomialBasis::new(2, 2).unwrap();
        assert_eq!(b.veronese_embed(&[1, 0, -1]).unwrap(), vec![1, 0, -1, 0, 0, 1]);
    }

    #[test]
    fn veronese_homogeneity_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (d, n) in [(2u32, 1usize), (2, 2), (3, 2), (2, 3), (3, 3)] {
            let b = MonomialBasis::new(d, n).unwrap();
            for _ in 0..200 {
                let x: Vec<i128> = (0..=n).map(|_| rng.gen_range(-9..=9)).collect();
                let vx = b.veronese_embed(&x).unwrap();
                for c in -3i128..=3 {
                    let cx: Vec<i128> = x.iter().map(|&v| c * v).collect();
                    let vcx = b.veronese_embed(&cx).unwrap();
                    let scale = checked_pow(c, d).unwrap();
                    let scaled: Vec<i128> = vx.iter().map(|&v| v * scale).collect();
                    assert_eq!(vcx, scaled);
                }
            }
        }
    }

    /// ||v(r t)||^2 = r^(2d) ||v(t)||^2 for rational r = p/q, checked on
    /// integer points of the form q*u so everything stays integral.
    #[test]
    fn veronese_norm_scaling_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (d, n) in [(2u32, 2usize), (3, 2), (2, 3)] {
            let b = MonomialBasis::new(d, n).unwrap();
            for _ in 0..100 {
                let u: Vec<i128> = (0..=n).map(|_| rng.gen_range(-6..=6)).collect();
                let p = rng.gen_range(1..=5i128);
                let q = rng.gen_range(1..=5i128);
                // t = q*u, r = p/q, r*t = p*u
                let t: Vec<i128> = u.iter().map(|&v| q * v).collect();
                let rt: Vec<i128> = u.iter().map(|&v| p * v).collect();
                let lhs = b.veronese_norm_sq(&rt).unwrap();
                let rhs = b.veronese_norm_sq(&t).unwrap();
                // lhs * q^(2d) == rhs * p^(2d)
                let qd = BigInt::from(q).pow(2 * d);
                let pd = BigInt::from(p).pow(2 * d);
                assert_eq!(lhs * qd, rhs * pd);
            }
        }
    }

    #[test]
    fn evaluate_form_examples() {
        let b = MonomialBasis::new(2, 2).unwrap();
        let a = [1, 0, 0, 1, 0, -1]; // x0^2 + x1^2 - x2^2
        assert_eq!(b.evaluate_form(&a, &[3, 4, 5]).unwrap(), 0);
        assert_eq!(b.evaluate_form(&a, &[1, 1, 1]).unwrap(), 1);

        let mut t0_only = vec![0i128; b.len()];
        t0_only[0] = 1;
        assert_eq!(b.evaluate_form(&t0_only, &[0, 7, -3]).unwrap(), 0);
    }

    #[test]
    fn evaluate_form_bilinear_and_homogeneous() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = MonomialBasis::new(3, 2).unwrap();
        for _ in 0..100 {
            let a1: Vec<i128> = (0..b.len()).map(|_| rng.gen_range(-5..=5)).collect();
            let a2: Vec<i128> = (0..b.len()).map(|_| rng.gen_range(-5..=5)).collect();
            let x: Vec<i128> = (0..=2).map(|_| rng.gen_range(-5..=5)).collect();
            let sum: Vec<i128> = a1.iter().zip(&a2).map(|(p, q)| p + q).collect();
            assert_eq!(
                b.evaluate_form(&sum, &x).unwrap(),
                b.evaluate_form(&a1, &x).unwrap() + b.evaluate_form(&a2, &x).unwrap()
            );
            let c = rng.gen_range(-3..=3i128);
            let cx: Vec<i128> = x.iter().map(|&v| c * v).collect();
            assert_eq!(
                b.evaluate_form(&a1, &cx).unwrap(),
                b.evaluate_form(&a1, &x).unwrap() * checked_pow(c, 3).unwrap()
            );
        }
    }

    #[test]
    fn overflow_is_detected_not_wrapped() {
        let b = MonomialBasis::new(3, 2).unwrap();
        let huge = 1i128 << 50;
        assert!(matches!(
            b.veronese_embed(&[huge, huge, huge]),
            Err(Error::Overflow)
        ));
    }

    #[test]
    fn veronese_norm_of_unit_vectors() {
        let b = MonomialBasis::new(2, 2).unwrap();
        for i in 0..3 {
            let mut e = vec![0i128; 3];
            e[i] = 1;
            let nu = b.veronese_embed(&e).unwrap();
            let nonzero: Vec<_> = nu.iter().filter(|&&v| v != 0).collect();
            assert_eq!(nonzero, vec![&1]);
            assert_eq!(b.veronese_norm_sq(&e).unwrap(), BigInt::from(1) - BigInt::zero());
        }
    }
}
