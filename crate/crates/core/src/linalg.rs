//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

/// Pivot floor for the positive-definiteness test.
pub const PD_PIVOT_FLOOR: f64 = 1e-12;

/// Relative tolerance for the symmetry test.
pub const SYMMETRY_RTOL: f64 = 1e-12;

pub fn is_symmetric(m: &DMatrix<f64>) -> bool {
    if !m.is_square() {
        return false;
    }
    let scale = m.amax().max(f64::MIN_POSITIVE);
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_RTOL * scale {
                return false;
            }
        }
    }
    true
}

/// Lower Cholesky factor, rejecting any pivot below [`PD_PIVOT_FLOOR`].
pub fn cholesky_strict(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if !m.is_square() {
        return None;
    }
    let n = m.nrows();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut pivot = m[(j, j)];
        for k in 0..j {
            pivot -= l[(j, k)] * l[(j, k)];
        }
        if !(pivot > PD_PIVOT_FLOOR) {
            return None;
        }
        let d = pivot.sqrt();
        l[(j, j)] = d;
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Some(l)
}

/// A square-root factor `L` with `L Lᵀ = m` for a symmetric PSD matrix.
///
/// Lower-triangular when `m` is numerically positive definite. Singular
/// matrices (e.g. after an exact observation) fall back to a symmetric
/// eigen-decomposition with round-off negative eigenvalues clipped to zero.
/// Returns `None` for matrices that are clearly indefinite or non-finite.
pub fn psd_sqrt(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if !m.is_square() || m.iter().any(|v| !v.is_finite()) {
        return None;
    }
    if let Some(l) = cholesky_strict(m) {
        return Some(l);
    }
    let sym = symmetrized(m);
    let floor = -1e-9 * sym.amax().max(1.0);
    let eig = sym.symmetric_eigen();
    if eig.eigenvalues.iter().any(|&v| v < floor) {
        return None;
    }
    let roots = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    Some(&eig.eigenvectors * DMatrix::from_diagonal(&roots))
}

pub fn symmetrized(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Spectral radius from the complex eigenvalues of a real square matrix.
pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues()
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max)
}

/// Draw `L z` with `z` standard normal.
pub fn colored_normal<R: Rng + ?Sized>(factor: &DMatrix<f64>, rng: &mut R) -> DVector<f64> {
    let z = DVector::from_fn(factor.ncols(), |_, _| rng.sample::<f64, _>(StandardNormal));
    factor * z
}

pub fn all_finite(v: &DVector<f64>) -> bool {
    v.iter().all(|x| x.is_finite())
}
