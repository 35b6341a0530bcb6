use super::*;
use crate::error::Budget;
use num_traits::FromPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn ratf(x: f64) -> BigRational {
    BigRational::from_f64(x).unwrap()
}

#[test]
fn gram_determinant_examples() {
    assert_eq!(IntegralLattice::standard(2).det_squared(), BigInt::from(1));

    let l = IntegralLattice::from_columns(3, vec![vec![1, 1, 0], vec![0, 1, 1]]).unwrap();
    assert_eq!(l.det_squared(), BigInt::from(3)); // Gram [[2,1],[1,2]]

    let l = IntegralLattice::from_columns(3, vec![vec![1, 2, 3]]).unwrap();
    assert_eq!(l.det_squared(), BigInt::from(14));
}

#[test]
fn rank_deficient_rejected() {
    assert!(matches!(
        IntegralLattice::from_columns(3, vec![vec![1, 2, 3], vec![2, 4, 6]]),
        Err(Error::RankDeficient)
    ));
}

#[test]
fn determinant_is_basis_invariant() {
    // Same lattice, two bases: Z*(1,1,0) + Z*(0,1,1), transformed by a
    // unimodular column operation.
    let a = IntegralLattice::from_columns(3, vec![vec![1, 1, 0], vec![0, 1, 1]]).unwrap();
    let b = IntegralLattice::from_columns(3, vec![vec![1, 2, 1], vec![0, 1, 1]]).unwrap();
    assert_eq!(a.det_squared(), b.det_squared());
}

#[test]
fn kernel_lattice_examples() {
    // Coordinate kernel: orthogonal to e1 and e2 in Z^3.
    let l = kernel_lattice(&[vec![1, 0, 0], vec![0, 1, 0]]).unwrap();
    assert_eq!(l.rank(), 1);
    assert_eq!(l.det_squared(), BigInt::from(1));

    let l = kernel_lattice(&[vec![1, 1, 1]]).unwrap();
    assert_eq!(l.rank(), 2);
    assert_eq!(l.det_squared(), BigInt::from(3));

    let l = kernel_lattice(&[vec![2, 4]]).unwrap();
    assert_eq!(l.rank(), 1);
    assert_eq!(l.det_squared(), BigInt::from(5)); // Z * (2, -1)
}

#[test]
fn kernel_lattice_rejects_bad_input() {
    assert!(matches!(
        kernel_lattice(&[vec![1, 2, 3], vec![2, 4, 6]]),
        Err(Error::DependentVectors)
    ));
    // k = N leaves a rank-0 kernel, which is out of range.
    assert!(kernel_lattice(&[vec![1, 0], vec![0, 1]]).is_err());
}

#[test]
fn kernel_vectors_annihilate_constraints() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let n = rng.gen_range(3..=7usize);
        let k = rng.gen_range(1..=3.min(n - 1));
        let cs: Vec<Vec<i128>> = (0..k)
            .map(|_| (0..n).map(|_| rng.gen_range(-20..=20)).collect())
            .collect();
        match kernel_lattice(&cs) {
            Ok(l) => {
                assert_eq!(l.rank(), n - k);
                assert!(l.is_primitive());
                for col in l.basis_columns() {
                    for c in &cs {
                        let big: Vec<BigInt> = c.iter().map(|&v| BigInt::from(v)).collect();
                        assert!(dot_big(&big, col).is_zero());
                    }
                }
            }
            Err(Error::DependentVectors) => {}
            Err(e) => panic!("unexpected error {e:?}"),
        }
    }
}

#[test]
fn orthogonal_determinant_formula_examples() {
    let f = orthogonal_det_squared_formula(&[vec![1, 2, 3]]).unwrap();
    assert_eq!(f, BigRational::from_integer(BigInt::from(14)));

    // Scaling the constraint scales both the span determinant and the
    // minor gcd, leaving the quotient fixed.
    let f = orthogonal_det_squared_formula(&[vec![2, 4, 6]]).unwrap();
    assert_eq!(f, BigRational::from_integer(BigInt::from(14)));

    let f = orthogonal_det_squared_formula(&[vec![1, 0, 0], vec![0, 2, 0]]).unwrap();
    assert_eq!(f, BigRational::from_integer(BigInt::from(1)));
}

#[test]
fn orthogonal_formula_matches_kernel_gram_randomly() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut checked = 0;
    while checked < 120 {
        let n = rng.gen_range(2..=8usize);
        let k = rng.gen_range(1..=3.min(n - 1));
        let cs: Vec<Vec<i128>> = (0..k)
            .map(|_| (0..n).map(|_| rng.gen_range(-20..=20)).collect())
            .collect();
        let Ok(kernel) = kernel_lattice(&cs) else { continue };
        let formula = orthogonal_det_squared_formula(&cs).unwrap();
        assert_eq!(
            formula,
            BigRational::from_integer(kernel.det_squared()),
            "constraints {cs:?}"
        );
        checked += 1;
    }
}

#[test]
fn duality_of_determinants_for_primitive_lattices() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut checked = 0;
    while checked < 40 {
        let n = rng.gen_range(3..=7usize);
        let k = rng.gen_range(1..=(n - 1).min(3));
        let cs: Vec<Vec<i128>> = (0..k)
            .map(|_| (0..n).map(|_| rng.gen_range(-9..=9)).collect())
            .collect();
        let Ok(lat) = kernel_lattice(&cs) else { continue };
        let ortho = lat.orthogonal().unwrap();
        assert_eq!(ortho.rank(), n - lat.rank());
        assert_eq!(ortho.det_squared(), lat.det_squared());
        checked += 1;
    }
}

#[test]
fn minors_gcd_and_primitivity() {
    assert_eq!(minors_gcd(&[vec![2, 4, 6]]).unwrap(), BigInt::from(2));
    assert_eq!(minors_gcd(&[vec![1, 0, 0], vec![0, 2, 0]]).unwrap(), BigInt::from(2));
    assert!(IntegralLattice::standard(4).is_primitive());
    // Index-2 sublattice of Z^2 is not primitive.
    let l = IntegralLattice::from_columns(2, vec![vec![2, 0], vec![0, 1]]).unwrap();
    assert!(!l.is_primitive());
    let l = IntegralLattice::from_columns(3, vec![vec![2, 0, 0], vec![0, 3, 0]]).unwrap();
    assert!(!l.is_primitive());
}

#[test]
fn counting_examples() {
    let budget = Budget::default();
    let z2 = IntegralLattice::standard(2);
    assert_eq!(z2.count_points(&ratf(1.5), &budget).unwrap(), 9);

    let axis = IntegralLattice::from_columns(2, vec![vec![0, 5]]).unwrap();
    assert_eq!(axis.count_points(&ratf(4.9), &budget).unwrap(), 1);

    let kernel = kernel_lattice(&[vec![1, 1, 1]]).unwrap();
    assert_eq!(kernel.count_points_sq(&rat(2), &budget).unwrap(), 7);
}

#[test]
fn primitive_counting_examples() {
    let budget = Budget::default();
    let z2 = IntegralLattice::standard(2);
    assert_eq!(z2.count_primitive_points_direct_sq(&ratf(6.25), &budget).unwrap(), 16);
    assert_eq!(z2.count_primitive_points_moebius_sq(&ratf(6.25), &budget).unwrap(), 16);
    assert_eq!(z2.count_primitive_points_direct_sq(&ratf(0.25), &budget).unwrap(), 0);

    let kernel = kernel_lattice(&[vec![1, 1, 1]]).unwrap();
    assert_eq!(kernel.count_primitive_points_direct_sq(&rat(2), &budget).unwrap(), 6);
    assert_eq!(kernel.count_primitive_points_moebius_sq(&rat(2), &budget).unwrap(), 6);
}

#[test]
fn primitive_counting_requires_primitive_lattice() {
    let budget = Budget::default();
    let l = IntegralLattice::from_columns(2, vec![vec![2, 0], vec![0, 1]]).unwrap();
    assert!(matches!(
        l.count_primitive_points_direct_sq(&rat(9), &budget),
        Err(Error::NotPrimitive)
    ));
    assert!(matches!(
        l.count_primitive_points_moebius_sq(&rat(9), &budget),
        Err(Error::NotPrimitive)
    ));
}

#[test]
fn moebius_and_direct_agree_randomly() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let budget = Budget::default();
    let mut checked = 0;
    while checked < 25 {
        let n = rng.gen_range(2..=5usize);
        let k = rng.gen_range(1..=(n - 1).min(2));
        let cs: Vec<Vec<i128>> = (0..k)
            .map(|_| (0..n).map(|_| rng.gen_range(-7..=7)).collect())
            .collect();
        let Ok(lat) = kernel_lattice(&cs) else { continue };
        let radius_sq = rat(rng.gen_range(1..=400));
        let (direct, moebius) = lat.count_primitive_points_both_sq(&radius_sq, &budget).unwrap();
        assert_eq!(direct, moebius, "constraints {cs:?} radius_sq {radius_sq}");
        checked += 1;
    }
}

#[test]
fn successive_minima_examples() {
    let budget = Budget::default();
    let z2 = IntegralLattice::standard(2);
    let m = z2.successive_minima_sq(&rat(4), &budget).unwrap();
    assert_eq!(m.values_squared, vec![BigInt::from(1), BigInt::from(1)]);

    let axes = IntegralLattice::from_columns(2, vec![vec![1, 0], vec![0, 5]]).unwrap();
    let m = axes.successive_minima_sq(&rat(36), &budget).unwrap();
    assert_eq!(m.values_squared, vec![BigInt::from(1), BigInt::from(25)]);

    let kernel = kernel_lattice(&[vec![1, 1, 1]]).unwrap();
    let m = kernel.successive_minima_sq(&rat(4), &budget).unwrap();
    assert_eq!(m.values_squared, vec![BigInt::from(2), BigInt::from(2)]);
}

#[test]
fn successive_minima_bound_too_small() {
    let axes = IntegralLattice::from_columns(2, vec![vec![1, 0], vec![0, 5]]).unwrap();
    match axes.successive_minima_sq(&rat(4), &Budget::default()) {
        Err(Error::BoundTooSmall { found: 1, need: 2 }) => {}
        other => panic!("expected bound failure, got {other:?}"),
    }
}

/// Minkowski's second theorem: det <= prod(lambda_i) <= 2^R det / V_R.
/// The left inequality is checked exactly on squares; the right one in
/// floating point with a hair of slack for the irrational V_R.
#[test]
fn minkowski_sandwich_on_random_kernels() {
    use num_traits::ToPrimitive;
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let budget = Budget::default();
    let mut checked = 0;
    while checked < 30 {
        let n = rng.gen_range(3..=6usize);
        let k = rng.gen_range(1..=(n - 1).min(3));
        let cs: Vec<Vec<i128>> = (0..k)
            .map(|_| (0..n).map(|_| rng.gen_range(-9..=9)).collect())
            .collect();
        let Ok(lat) = kernel_lattice(&cs) else { continue };
        let rank = lat.rank();
        // A reduced basis certifies an enumeration bound for the minima.
        let bound_sq = lat.minima_search_bound_sq();
        let minima = lat
            .successive_minima_sq(&BigRational::from_integer(bound_sq), &budget)
            .unwrap();

        let det_sq = lat.det_squared();
        let mut prod_sq = BigInt::one();
        for v in &minima.values_squared {
            prod_sq *= v;
        }
        assert!(det_sq <= prod_sq, "lower Minkowski bound failed for {cs:?}");

        let vr = crate::manin::ball_volume(rank as u32);
        let lhs = prod_sq.to_f64().unwrap().sqrt() * vr;
        let rhs = 2f64.powi(rank as i32) * det_sq.to_f64().unwrap().sqrt();
        assert!(lhs <= rhs * (1.0 + 1e-9), "upper Minkowski bound failed for {cs:?}");
        checked += 1;
    }
}

/// Integral lattices in small balls: a calibrated form of the upper bound
/// count <= C * T^(R-R0-1) * (T * Y^R0 / det + 1) with R0 = R - 2.
/// The constant below was observed empirically with margin; the point of
/// the test is the shape of the bound, not the constant.
#[test]
fn small_ball_upper_bound_shape() {
    use num_traits::ToPrimitive;
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let budget = Budget::default();
    const CALIBRATED_C: f64 = 64.0;
    let mut checked = 0;
    while checked < 20 {
        let n = rng.gen_range(3..=5usize);
        let cs: Vec<Vec<i128>> = vec![(0..n).map(|_| rng.gen_range(-6..=6)).collect()];
        let Ok(lat) = kernel_lattice(&cs) else { continue };
        let rank = lat.rank();
        if rank < 2 {
            continue;
        }
        let bound_sq = lat.minima_search_bound_sq();
        let minima = lat
            .successive_minima_sq(&BigRational::from_integer(bound_sq.clone()), &budget)
            .unwrap();
        let y = minima.max_squared().to_f64().unwrap().sqrt().max(1.0);
        let det = lat.det_squared().to_f64().unwrap().sqrt();
        let r0 = rank - 2;
        // T <= Y regime.
        for frac in [0.3, 0.6, 1.0] {
            let t = (y * frac).max(1.0);
            let count = lat
                .count_points_sq(&crate::arith::rational_from_f64(t * t).unwrap(), &budget)
                .unwrap() as f64;
            let bound = CALIBRATED_C
                * t.powi((rank - r0 - 1) as i32)
                * (t * y.powi(r0 as i32) / det + 1.0);
            assert!(count <= bound, "count {count} > bound {bound} for {cs:?}, T={t}");
        }
        checked += 1;
    }
}

#[test]
fn count_is_monotone_in_radius() {
    let budget = Budget::default();
    let lat = kernel_lattice(&[vec![2, 3, 5]]).unwrap();
    let mut last = 0;
    for t2 in [0i64, 1, 2, 4, 9, 25, 100, 400] {
        let c = lat.count_points_sq(&rat(t2), &budget).unwrap();
        assert!(c >= last);
        last = c;
    }
    assert!(last > 1);
}
