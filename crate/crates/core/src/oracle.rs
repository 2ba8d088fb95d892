//! Exact dense reference: Hermitian exponentials, Schatten norms, relative
//! errors and partition functions for chains within the dense cap.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::model::HamiltonianSpec;
use crate::C64;

/// Square complex matrix on the full `d^n` Hilbert space.
pub type DenseOperator = DMatrix<C64>;

fn hermitian_part(h: &DenseOperator) -> DenseOperator {
    (h + h.adjoint()) * C64::new(0.5, 0.0)
}

/// `e^{z H}` for Hermitian `H` through its eigendecomposition.
pub fn exp_hermitian(h: &DenseOperator, z: C64) -> DenseOperator {
    if z == C64::new(0.0, 0.0) {
        return DenseOperator::identity(h.nrows(), h.ncols());
    }
    let eig = SymmetricEigen::new(hermitian_part(h));
    let u = &eig.eigenvectors;
    let mut scaled = u.clone();
    for (j, lambda) in eig.eigenvalues.iter().enumerate() {
        let f = (z * *lambda).exp();
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= f;
        }
    }
    scaled * u.adjoint()
}

/// Unnormalized Gibbs operator `e^{-βH}`; complex `β = it` gives `e^{-iHt}`.
pub fn gibbs_dense(spec: &HamiltonianSpec, beta: C64, cap: usize) -> Result<DenseOperator> {
    let h = spec.dense_matrix(cap)?;
    Ok(exp_hermitian(&h, -beta))
}

/// `Z_β = tr e^{-βH}` for real `β`.
pub fn partition_function(spec: &HamiltonianSpec, beta: f64, cap: usize) -> Result<f64> {
    let h = spec.dense_matrix(cap)?;
    let eig = hermitian_part(&h).symmetric_eigenvalues();
    Ok(eig.iter().map(|l| (-beta * l).exp()).sum())
}

/// Singular values in descending order.
pub fn singular_values(a: &DenseOperator) -> Vec<f64> {
    crate::mpo::linalg::singular_values(a)
}

/// `||A||_p = (Σ σ_i^p)^{1/p}`; `p = ∞` is the largest singular value.
pub fn schatten_norm(a: &DenseOperator, p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(schatten_from_singular_values(&singular_values(a), p))
}

fn check_p(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidParameter(format!("Schatten p must be >= 1, got {p}")));
    }
    Ok(())
}

pub(crate) fn schatten_from_singular_values(s: &[f64], p: f64) -> f64 {
    let max = s.iter().cloned().fold(0.0, f64::max);
    if p.is_infinite() || max == 0.0 {
        return max;
    }
    // scaled to keep large p finite
    max * s.iter().map(|x| (x / max).powf(p)).sum::<f64>().powf(1.0 / p)
}

/// `||A - B||_p / ||A||_p`.
pub fn relative_error(a: &DenseOperator, b: &DenseOperator, p: f64) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch(format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    let denom = schatten_norm(a, p)?;
    if denom == 0.0 {
        return Err(Error::InvalidParameter("reference operator has zero norm".into()));
    }
    Ok(schatten_norm(&(a - b), p)? / denom)
}

/// Parses `1`, `2`, `inf`, or any real `p >= 1`.
pub fn parse_pnorm(s: &str) -> Result<f64> {
    let p = match s.trim() {
        "inf" | "infinity" | "∞" => f64::INFINITY,
        other => other
            .parse::<f64>()
            .map_err(|_| Error::InvalidParameter(format!("bad Schatten index '{other}'")))?,
    };
    check_p(p)?;
    Ok(p)
}

pub fn pnorm_label(p: f64) -> String {
    if p.is_infinite() {
        "inf".to_string()
    } else {
        format!("{p}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Coupling, LocalTerm, SiteOp, DEFAULT_DENSE_CAP};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, dim: usize) -> DenseOperator {
        DMatrix::from_fn(dim, dim, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    fn zz_pair() -> HamiltonianSpec {
        HamiltonianSpec::generic(2, 2, 2, vec![LocalTerm::new(vec![1, 2], vec![SiteOp::Z; 2], 1.0)])
            .unwrap()
    }

    #[test]
    fn beta_zero_is_identity() {
        let h = zz_pair();
        let g = gibbs_dense(&h, C64::new(0.0, 0.0), DEFAULT_DENSE_CAP).unwrap();
        assert!((g - DMatrix::identity(4, 4)).camax() < 1e-15);
    }

    #[test]
    fn zz_gibbs_matches_scalar_exponentials() {
        let g = gibbs_dense(&zz_pair(), C64::new(1.0, 0.0), DEFAULT_DENSE_CAP).unwrap();
        let e = std::f64::consts::E;
        let expected = [1.0 / e, e, e, 1.0 / e];
        for (i, x) in expected.iter().enumerate() {
            assert!((g[(i, i)].re - x).abs() < 1e-13);
        }
        assert!((g.clone() - DMatrix::from_diagonal(&g.diagonal())).camax() < 1e-14);
        let z = partition_function(&zz_pair(), 1.0, DEFAULT_DENSE_CAP).unwrap();
        assert!((z - (2.0 / e + 2.0 * e)).abs() < 1e-13);
    }

    #[test]
    fn partition_function_trivial_cases() {
        let h = zz_pair();
        assert!((partition_function(&h, 0.0, DEFAULT_DENSE_CAP).unwrap() - 4.0).abs() < 1e-14);
        let zero = HamiltonianSpec::generic(3, 2, 2, vec![]).unwrap();
        assert!((partition_function(&zero, 2.0, DEFAULT_DENSE_CAP).unwrap() - 8.0).abs() < 1e-14);
    }

    #[test]
    fn identity_norms() {
        let id = DenseOperator::identity(4, 4);
        assert!((schatten_norm(&id, 1.0).unwrap() - 4.0).abs() < 1e-14);
        assert!((schatten_norm(&id, f64::INFINITY).unwrap() - 1.0).abs() < 1e-14);
        assert!(schatten_norm(&id, 0.5).is_err());
    }

    #[test]
    fn frobenius_agrees_with_entry_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_matrix(&mut rng, 8);
        let direct = a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        assert!((schatten_norm(&a, 2.0).unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn relative_error_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_matrix(&mut rng, 6);
        let b = random_matrix(&mut rng, 6);
        assert_eq!(relative_error(&a, &a, 2.0).unwrap(), 0.0);
        let zero = DenseOperator::zeros(6, 6);
        assert!((relative_error(&a, &zero, 1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!(relative_error(&zero, &a, 1.0).is_err());
        // independent route: Frobenius from entries
        let fro = |m: &DenseOperator| m.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let expected = fro(&(&a - &b)) / fro(&a);
        assert!((relative_error(&a, &b, 2.0).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn diagonal_hamiltonian_exponential_is_elementwise() {
        let h = HamiltonianSpec::generic(
            2,
            2,
            1,
            vec![
                LocalTerm::new(vec![1], vec![SiteOp::Z], 0.3),
                LocalTerm::new(vec![2], vec![SiteOp::Z], -0.7),
            ],
        )
        .unwrap();
        let dense = h.dense_matrix(DEFAULT_DENSE_CAP).unwrap();
        let g = gibbs_dense(&h, C64::new(1.5, 0.0), DEFAULT_DENSE_CAP).unwrap();
        for i in 0..4 {
            assert!((g[(i, i)].re - (-1.5 * dense[(i, i)].re).exp()).abs() < 1e-13);
        }
    }

    #[test]
    fn semigroup_and_positivity() {
        let c = vec![Coupling { left: SiteOp::X, right: SiteOp::X, j: 1.0 }];
        let h = HamiltonianSpec::power_law(4, 2, 3.0, c, &[(SiteOp::Z, 0.4)]).unwrap();
        let g1 = gibbs_dense(&h, C64::new(0.3, 0.0), DEFAULT_DENSE_CAP).unwrap();
        let g2 = gibbs_dense(&h, C64::new(0.5, 0.0), DEFAULT_DENSE_CAP).unwrap();
        let g12 = gibbs_dense(&h, C64::new(0.8, 0.0), DEFAULT_DENSE_CAP).unwrap();
        assert!((&g1 * &g2 - &g12).camax() < 1e-10);
        assert!((&g12 - g12.adjoint()).camax() < 1e-12);
        let eig = hermitian_part(&g12).symmetric_eigenvalues();
        assert!(eig.iter().all(|&l| l > 0.0));
    }

    #[test]
    fn real_time_is_unitary() {
        let c = vec![Coupling { left: SiteOp::Z, right: SiteOp::Z, j: 1.0 }];
        let h = HamiltonianSpec::power_law(3, 2, 3.0, c, &[(SiteOp::X, 1.0)]).unwrap();
        let u = gibbs_dense(&h, C64::new(0.0, 0.7), DEFAULT_DENSE_CAP).unwrap();
        assert!((&u * u.adjoint() - DenseOperator::identity(8, 8)).camax() < 1e-12);
    }

    #[test]
    fn pnorm_parsing() {
        assert_eq!(parse_pnorm("inf").unwrap(), f64::INFINITY);
        assert_eq!(parse_pnorm("2").unwrap(), 2.0);
        assert!(parse_pnorm("0.5").is_err());
        assert!(parse_pnorm("abc").is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn norm_ordering(seed in 0u64..1000, dim in 1usize..10, p in 1.0f64..20.0) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let a = random_matrix(&mut rng, dim);
                let inf = schatten_norm(&a, f64::INFINITY).unwrap();
                let one = schatten_norm(&a, 1.0).unwrap();
                let mid = schatten_norm(&a, p).unwrap();
                prop_assert!(inf <= mid * (1.0 + 1e-12));
                prop_assert!(mid <= one * (1.0 + 1e-12));
            }
        }
    }
}
