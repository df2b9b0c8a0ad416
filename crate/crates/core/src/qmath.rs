//! Dense complex linear algebra substrate.
//!
//! Everything here operates on small dense matrices (problem dimensions stay
//! below ~64), so the implementations favor clarity over asymptotics.

use nalgebra::{Complex, DMatrix, DVector};

use crate::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;
pub type RMatrix = DMatrix<f64>;
pub type RVector = DVector<f64>;

/// QR-step budget for the eigenvalue iteration.
const EIGEN_MAX_STEPS: usize = 10_000;

/// Which tensor factor survives a partial trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    First,
    Second,
}

/// Kronecker product `a ⊗ b`; output dims are the products of the input dims.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Traces out one tensor factor of a `(dA·dB)×(dA·dB)` matrix.
///
/// The output trace equals the input trace.
pub fn partial_trace(m: &CMatrix, dims: (usize, usize), keep: Keep) -> Result<CMatrix> {
    let (da, db) = dims;
    let d = da * db;
    if m.nrows() != d || m.ncols() != d {
        return Err(Error::DimensionMismatch(format!(
            "partial_trace expects a {d}x{d} matrix for dims ({da}, {db}), got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    match keep {
        Keep::First => {
            let mut out = CMatrix::zeros(da, da);
            for a in 0..da {
                for a2 in 0..da {
                    let mut s = C64::new(0.0, 0.0);
                    for b in 0..db {
                        s += m[(a * db + b, a2 * db + b)];
                    }
                    out[(a, a2)] = s;
                }
            }
            Ok(out)
        }
        Keep::Second => {
            let mut out = CMatrix::zeros(db, db);
            for b in 0..db {
                for b2 in 0..db {
                    let mut s = C64::new(0.0, 0.0);
                    for a in 0..da {
                        s += m[(a * db + b, a * db + b2)];
                    }
                    out[(b, b2)] = s;
                }
            }
            Ok(out)
        }
    }
}

/// `m^n` by repeated squaring; `m^0` is the identity.
pub fn mat_power<T: nalgebra::ComplexField>(m: &DMatrix<T>, n: u64) -> DMatrix<T> {
    assert_eq!(m.nrows(), m.ncols(), "mat_power requires a square matrix");
    let mut result = DMatrix::identity(m.nrows(), m.ncols());
    let mut base = m.clone();
    let mut k = n;
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &base;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    result
}

/// All eigenvalues (with multiplicity) of a real square matrix.
///
/// Uses Hessenberg reduction followed by the shifted-QR (real Schur)
/// iteration; no symmetry is assumed. Accurate to ~1e-9 for well-conditioned
/// matrices up to dim 16.
pub fn spectrum(m: &RMatrix) -> Result<Vec<C64>> {
    assert_eq!(m.nrows(), m.ncols(), "spectrum requires a square matrix");
    if m.is_empty() {
        return Ok(Vec::new());
    }
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), f64::EPSILON, EIGEN_MAX_STEPS)
        .ok_or(Error::EigenNotConverged(EIGEN_MAX_STEPS))?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// Largest absolute eigenvalue of a real square matrix.
///
/// Defective eigenvalues (nontrivial Jordan blocks) are only computed to
/// ~√ε by any backward-stable solver, but their perturbations split
/// symmetrically around the true value, so averaging near-coincident
/// eigenvalues recovers ~ε accuracy. Eigenvalues closer than 1e-6·scale are
/// therefore merged into their cluster mean before taking the maximum
/// modulus.
pub fn spectral_radius(m: &RMatrix) -> Result<f64> {
    let eigs = spectrum(m)?;
    let scale = eigs.iter().map(|l| l.norm()).fold(0.0_f64, f64::max);
    if scale == 0.0 {
        return Ok(0.0);
    }
    let tol = 1e-6 * scale.max(1.0);
    let mut clusters: Vec<(C64, usize)> = Vec::new(); // (sum, count)
    for l in eigs {
        match clusters
            .iter_mut()
            .find(|(sum, count)| (sum.unscale(*count as f64) - l).norm() < tol)
        {
            Some((sum, count)) => {
                *sum += l;
                *count += 1;
            }
            None => clusters.push((l, 1)),
        }
    }
    Ok(clusters
        .iter()
        .map(|(sum, count)| sum.unscale(*count as f64).norm())
        .fold(0.0_f64, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_cmatrix(rows: usize, cols: usize, rng: &mut impl rand::Rng) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let i2 = CMatrix::identity(2, 2);
        assert_eq!(kron(&i2, &i2), CMatrix::identity(4, 4));
    }

    #[test]
    fn kron_projector_times_x() {
        let proj = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]));
        let x = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let k = kron(&proj, &x);
        // X in the top-left 2x2 block, zeros elsewhere.
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i < 2 && j < 2 { x[(i, j)] } else { c(0.0, 0.0) };
                assert_eq!(k[(i, j)], expected);
            }
        }
    }

    #[test]
    fn kron_matches_index_formula() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let a = random_cmatrix(2, 2, &mut rng);
        let b = random_cmatrix(2, 2, &mut rng);
        let k = kron(&a, &b);
        for i in 0..2 {
            for j in 0..2 {
                for p in 0..2 {
                    for q in 0..2 {
                        let expected = a[(i, j)] * b[(p, q)];
                        let got = k[(2 * i + p, 2 * j + q)];
                        assert_abs_diff_eq!(got.re, expected.re, epsilon = 1e-15);
                        assert_abs_diff_eq!(got.im, expected.im, epsilon = 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn partial_trace_of_product_state() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        // rho and sigma Hermitian with unit trace.
        let g = random_cmatrix(2, 2, &mut rng);
        let mut rho = &g * g.adjoint();
        rho /= rho.trace();
        let g2 = random_cmatrix(3, 3, &mut rng);
        let mut sigma = &g2 * g2.adjoint();
        sigma /= sigma.trace();

        let joint = kron(&rho, &sigma);
        let back = partial_trace(&joint, (2, 3), Keep::Second).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(back[(i, j)].re, sigma[(i, j)].re, epsilon = 1e-12);
                assert_abs_diff_eq!(back[(i, j)].im, sigma[(i, j)].im, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn partial_trace_of_maximally_mixed() {
        let m = CMatrix::identity(4, 4) * c(0.25, 0.0);
        let out = partial_trace(&m, (2, 2), Keep::First).unwrap();
        let half_i = CMatrix::identity(2, 2) * c(0.5, 0.0);
        assert_eq!(out, half_i);
    }

    #[test]
    fn partial_trace_of_bell_state() {
        // |Φ+⟩ = (|00⟩ + |11⟩)/√2; projector entries hand-computed: 1/2 at
        // indices (0,0), (0,3), (3,0), (3,3).
        let mut bell = CMatrix::zeros(4, 4);
        for &(i, j) in &[(0, 0), (0, 3), (3, 0), (3, 3)] {
            bell[(i, j)] = c(0.5, 0.0);
        }
        for keep in [Keep::First, Keep::Second] {
            let out = partial_trace(&bell, (2, 2), keep).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    let expected = if i == j { 0.5 } else { 0.0 };
                    assert_abs_diff_eq!(out[(i, j)].re, expected, epsilon = 1e-15);
                    assert_abs_diff_eq!(out[(i, j)].im, 0.0, epsilon = 1e-15);
                }
            }
        }
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let m = CMatrix::zeros(3, 3);
        assert!(partial_trace(&m, (2, 2), Keep::First).is_err());
    }

    #[test]
    fn mat_power_zero_and_one() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let m = random_cmatrix(3, 3, &mut rng);
        assert_eq!(mat_power(&m, 0), CMatrix::identity(3, 3));
        assert_eq!(mat_power(&m, 1), m);
    }

    #[test]
    fn mat_power_matches_naive_multiplication() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        // Random column-stochastic 3x3.
        let mut p = RMatrix::from_fn(3, 3, |_, _| rng.random_range(0.0..1.0));
        for j in 0..3 {
            let s: f64 = p.column(j).sum();
            for i in 0..3 {
                p[(i, j)] /= s;
            }
        }
        let mut naive = RMatrix::identity(3, 3);
        for _ in 0..5 {
            naive = &naive * &p;
        }
        let fast = mat_power(&p, 5);
        assert!((&fast - &naive).abs().max() < 1e-14);
    }

    #[test]
    fn spectrum_of_diagonal_matrix() {
        let m = RMatrix::from_diagonal(&RVector::from_vec(vec![0.5, 0.25]));
        let mut eigs: Vec<f64> = spectrum(&m).unwrap().iter().map(|l| l.re).collect();
        eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_abs_diff_eq!(eigs[0], 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(eigs[1], 0.5, epsilon = 1e-12);
        assert!(spectrum(&m).unwrap().iter().all(|l| l.im.abs() < 1e-12));
    }

    #[test]
    fn spectrum_of_triangular_matrix_is_diagonal() {
        let m = RMatrix::from_row_slice(2, 2, &[0.7, 0.0, 0.3, 0.2]);
        let mut eigs: Vec<f64> = spectrum(&m).unwrap().iter().map(|l| l.re).collect();
        eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_abs_diff_eq!(eigs[0], 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(eigs[1], 0.7, epsilon = 1e-12);
    }

    #[test]
    fn spectrum_of_swap_matrix() {
        // Characteristic polynomial λ² − 1 ⇒ {1, −1}.
        let m = RMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let mut eigs: Vec<f64> = spectrum(&m).unwrap().iter().map(|l| l.re).collect();
        eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_abs_diff_eq!(eigs[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eigs[1], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(spectral_radius(&m).unwrap(), 1.0, epsilon = 1e-12);
    }
}
