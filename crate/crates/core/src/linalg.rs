//! Small dense symmetric linear algebra.
//!
//! Everything here works on `k x k` symmetric matrices with `k` in the tens,
//! so clarity wins over blocking or SIMD.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Relative tolerance for accepting a matrix as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Eigenvalues with `|l| <= PINV_RTOL * max|l|` are treated as zero.
pub const PINV_RTOL: f64 = 1e-10;
/// A matrix is PSD for factorization if `min eig >= -PSD_FACTOR_TOL * max eig`.
pub const PSD_FACTOR_TOL: f64 = 1e-8;

/// Length of the half-vectorization of a `k x k` symmetric matrix.
pub fn vecs_len(k: usize) -> usize {
    k * (k + 1) / 2
}

/// Position of `(i, j)` (with `i >= j`) inside `vecs` output.
///
/// Column-major lower triangle: column `j` contributes rows `j..k`.
pub fn vecs_index(k: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i >= j { (i, j) } else { (j, i) };
    j * (2 * k - j + 1) / 2 + (i - j)
}

/// Iterates `(i, j)` pairs in `vecs` order.
pub fn vecs_pairs(k: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..k).flat_map(move |j| (j..k).map(move |i| (i, j)))
}

pub fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let k = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..k {
        for j in 0..i {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidArgument(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let scale = m.amax().max(f64::MIN_POSITIVE);
    let asym = max_asymmetry(m);
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::NonSymmetric(asym));
    }
    Ok(())
}

/// Stacks the on-and-below-diagonal entries column by column:
/// `(s11, s21, ..., sk1, s22, ..., skk)`.
pub fn vecs(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_symmetric(m)?;
    Ok(vecs_pairs(m.nrows()).map(|(i, j)| m[(i, j)]).collect())
}

/// Inverse of [`vecs`].
pub fn unvecs(v: &[f64], k: usize) -> Result<DMatrix<f64>> {
    if v.len() != vecs_len(k) {
        return Err(Error::InvalidArgument(format!(
            "vecs vector of length {} does not match k = {k}",
            v.len()
        )));
    }
    let mut m = DMatrix::zeros(k, k);
    for ((i, j), &x) in vecs_pairs(k).zip(v) {
        m[(i, j)] = x;
        m[(j, i)] = x;
    }
    Ok(m)
}

fn symmetric_eigen(m: &DMatrix<f64>) -> SymmetricEigen<f64, nalgebra::Dyn> {
    // symmetrize exactly so round-off in the input cannot leak into the solver
    let sym = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(sym)
}

/// Moore-Penrose inverse of a symmetric matrix via its eigendecomposition.
pub fn pseudoinverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_symmetric(m)?;
    let k = m.nrows();
    if k == 0 || m.amax() == 0.0 {
        return Ok(DMatrix::zeros(k, k));
    }
    let eig = symmetric_eigen(m);
    let lmax = eig.eigenvalues.amax();
    let cutoff = PINV_RTOL * lmax;
    let inv: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&l| if l.abs() <= cutoff { 0.0 } else { 1.0 / l })
        .collect();
    let v = &eig.eigenvectors;
    let mut out = DMatrix::zeros(k, k);
    for (c, &w) in inv.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let col = v.column(c);
        out += (&col * col.transpose()) * w;
    }
    Ok((&out + out.transpose()) * 0.5)
}

/// Returns `F` with `F F' = m` for a PSD matrix.
///
/// Positive definite input yields the lower Cholesky factor. Singular or
/// numerically indefinite input falls back to `V sqrt(max(L, 0))` from the
/// eigendecomposition, after checking the negative part is within tolerance.
pub fn cholesky_psd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_symmetric(m)?;
    let k = m.nrows();
    if m.amax() == 0.0 {
        return Ok(DMatrix::zeros(k, k));
    }
    let sym = (m + m.transpose()) * 0.5;
    if let Some(ch) = sym.clone().cholesky() {
        let l = ch.unpack();
        let dmin = l.diagonal().min();
        let dmax = l.diagonal().max();
        // a pivot this small means the matrix is singular up to round-off
        if dmin > 1e-7 * dmax {
            return Ok(l);
        }
    }
    let eig = symmetric_eigen(&sym);
    let lmax = eig.eigenvalues.max();
    let lmin = eig.eigenvalues.min();
    if lmax <= 0.0 || lmin < -PSD_FACTOR_TOL * lmax {
        return Err(Error::NotPsd {
            min_eigenvalue: lmin,
        });
    }
    let mut f = eig.eigenvectors.clone();
    for (c, &l) in eig.eigenvalues.iter().enumerate() {
        let s = if l <= PINV_RTOL * lmax { 0.0 } else { l.sqrt() };
        f.column_mut(c).scale_mut(s);
    }
    Ok(f)
}

/// Smallest and largest eigenvalue of a symmetric matrix.
pub fn eigen_range(m: &DMatrix<f64>) -> (f64, f64) {
    let eig = symmetric_eigen(m);
    (eig.eigenvalues.min(), eig.eigenvalues.max())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).amax()
    }

    #[test]
    fn vecs_small_cases() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 3.0]);
        assert_eq!(vecs(&m).unwrap(), vec![1.0, 2.0, 3.0]);
        let eye = DMatrix::<f64>::identity(3, 3);
        assert_eq!(vecs(&eye).unwrap(), vec![1.0, 0.0, 0.0, 1.0, 0.0, 1.0]);
        assert_eq!(vecs(&DMatrix::<f64>::identity(5, 5)).unwrap().len(), 15);
    }

    #[test]
    fn vecs_order_matches_column_major_lower_triangle() {
        let k = 4;
        let m = DMatrix::from_fn(k, k, |i, j| (10 * i.max(j) + i.min(j)) as f64);
        let v = vecs(&m).unwrap();
        let expected = [0.0, 10.0, 20.0, 30.0, 11.0, 21.0, 31.0, 22.0, 32.0, 33.0];
        assert_eq!(v, expected);
        for (p, (i, j)) in vecs_pairs(k).enumerate() {
            assert_eq!(vecs_index(k, i, j), p);
            assert_eq!(vecs_index(k, j, i), p);
        }
    }

    #[test]
    fn vecs_rejects_asymmetric() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.5, 3.0]);
        assert!(matches!(vecs(&m), Err(Error::NonSymmetric(_))));
    }

    #[test]
    fn pinv_of_singular_diagonal() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]);
        let p = pseudoinverse(&m).unwrap();
        assert_abs_diff_eq!(p[(0, 0)], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p[(1, 1)], 0.0, epsilon = 1e-15);
        assert_eq!(pseudoinverse(&DMatrix::zeros(3, 3)).unwrap(), DMatrix::zeros(3, 3));
    }

    #[test]
    fn pinv_of_centering_matrix_is_itself() {
        let h = DMatrix::<f64>::identity(3, 3) - DMatrix::from_element(3, 3, 1.0 / 3.0);
        let p = pseudoinverse(&h).unwrap();
        assert!(max_abs_diff(&p, &h) < 1e-12);
        // Penrose identities
        assert!(max_abs_diff(&(&h * &p * &h), &h) < 1e-8);
        assert!(max_abs_diff(&(&p * &h * &p), &p) < 1e-8);
        assert!(max_abs_diff(&(&h * &p), &(&h * &p).transpose()) < 1e-8);
        assert!(max_abs_diff(&(&p * &h), &(&p * &h).transpose()) < 1e-8);
    }

    #[test]
    fn cholesky_hand_case() {
        let m = DMatrix::from_row_slice(2, 2, &[4.0, 2.0, 2.0, 5.0]);
        let l = cholesky_psd(&m).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 1.0, 2.0]);
        assert!(max_abs_diff(&l, &expected) < 1e-12);
        let eye = DMatrix::<f64>::identity(4, 4);
        assert!(max_abs_diff(&cholesky_psd(&eye).unwrap(), &eye) < 1e-15);
    }

    #[test]
    fn cholesky_singular_falls_back_to_eigen() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let f = cholesky_psd(&m).unwrap();
        assert!(max_abs_diff(&(&f * f.transpose()), &m) < 1e-8);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(cholesky_psd(&m), Err(Error::NotPsd { .. })));
    }

    fn sym_strategy(k: usize) -> impl Strategy<Value = DMatrix<f64>> {
        proptest::collection::vec(-3.0f64..3.0, k * k).prop_map(move |v| {
            let a = DMatrix::from_vec(k, k, v);
            &a * a.transpose() + DMatrix::identity(k, k) * 0.5
        })
    }

    proptest! {
        #[test]
        fn vecs_round_trip(m in sym_strategy(4)) {
            let back = unvecs(&vecs(&m).unwrap(), 4).unwrap();
            prop_assert_eq!(back, m);
        }

        #[test]
        fn pinv_of_invertible_is_inverse(m in sym_strategy(5)) {
            let p = pseudoinverse(&m).unwrap();
            let inv = m.clone().try_inverse().unwrap();
            let scale = inv.amax().max(1.0);
            prop_assert!((&p - &inv).amax() / scale < 1e-8);
            prop_assert!((&m * &p - DMatrix::identity(5, 5)).amax() < 1e-8);
        }

        #[test]
        fn cholesky_reproduces(m in sym_strategy(5)) {
            let f = cholesky_psd(&m).unwrap();
            prop_assert!((&f * f.transpose() - &m).amax() < 1e-8 * m.amax().max(1.0));
        }
    }
}
