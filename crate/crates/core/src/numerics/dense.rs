//! Dense eigendecomposition of unitary matrices.
//!
//! A unitary matrix is normal, so its complex Schur form is diagonal and the
//! Schur vectors are an orthonormal eigenbasis, even inside degenerate
//! eigenspaces. The Schur factorization comes from LAPACK `zgees`.

use std::os::raw::c_char;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{phase_of, NumericsError};

pub const MAX_DIM: usize = 4096;
pub const UNITARY_TOL: f64 = 1e-8;

/// Eigenvalues sorted by phase in `[0, 2π)` with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct UnitaryEigen {
    pub values: Vec<Complex64>,
    pub vectors: DMatrix<Complex64>,
}

/// Frobenius norm of `M†M − I`.
pub fn unitarity_residual(m: &DMatrix<Complex64>) -> f64 {
    let d = m.nrows();
    let g = m.adjoint() * m;
    let mut s = 0.0;
    for j in 0..d {
        for i in 0..d {
            let target = if i == j { 1.0 } else { 0.0 };
            s += (g[(i, j)] - target).norm_sqr();
        }
    }
    s.sqrt()
}

fn check_shape(m: &DMatrix<Complex64>) -> Result<(), NumericsError> {
    if m.nrows() != m.ncols() {
        return Err(NumericsError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.nrows() > MAX_DIM {
        return Err(NumericsError::TooLarge {
            dim: m.nrows(),
            max: MAX_DIM,
        });
    }
    Ok(())
}

/// Checks `‖M†M − I‖_F ≤ UNITARY_TOL` from the Schur form `T = D + N`.
///
/// `‖T†T − I‖_F ≤ ‖D†D − I‖_F + 2‖D‖_max‖N‖_F + ‖N‖_F²`, and the Frobenius
/// residual is invariant under the unitary change of basis. Only when this
/// O(d²) bound is inconclusive is the exact O(d³) residual formed.
fn check_unitary(m: &DMatrix<Complex64>, t: &[Complex64]) -> Result<(), NumericsError> {
    let d = m.nrows();
    let mut diag = 0.0;
    let mut dmax: f64 = 0.0;
    let mut strict = 0.0;
    for j in 0..d {
        for i in 0..j {
            strict += t[j * d + i].norm_sqr();
        }
        let x = t[j * d + j];
        diag += (x.norm_sqr() - 1.0).powi(2);
        dmax = dmax.max(x.norm());
    }
    let n_f = strict.sqrt();
    let bound = diag.sqrt() + 2.0 * dmax * n_f + strict;
    if bound <= UNITARY_TOL {
        return Ok(());
    }
    let residual = unitarity_residual(m);
    if residual <= UNITARY_TOL {
        Ok(())
    } else {
        Err(NumericsError::NotUnitary { residual })
    }
}

/// Full eigendecomposition of a unitary matrix.
pub fn unitary_eig(m: &DMatrix<Complex64>) -> Result<UnitaryEigen, NumericsError> {
    check_shape(m)?;
    let (values, t, vectors) = schur(m, true)?;
    check_unitary(m, &t)?;
    let vectors = vectors.expect("requested Schur vectors");
    let d = values.len();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| phase_of(values[i]).total_cmp(&phase_of(values[j])));
    let sorted_values = order.iter().map(|&i| values[i]).collect();
    let sorted_vectors = DMatrix::from_fn(d, d, |r, c| vectors[(r, order[c])]);
    Ok(UnitaryEigen {
        values: sorted_values,
        vectors: sorted_vectors,
    })
}

/// Eigenvalues only, sorted by phase.
pub fn unitary_eigvals(m: &DMatrix<Complex64>) -> Result<Vec<Complex64>, NumericsError> {
    check_shape(m)?;
    let (mut values, t, _) = schur(m, false)?;
    check_unitary(m, &t)?;
    values.sort_by(|a, b| phase_of(*a).total_cmp(&phase_of(*b)));
    Ok(values)
}

/// (eigenvalues, Schur form column-major, Schur vectors)
type Schur = (Vec<Complex64>, Vec<Complex64>, Option<DMatrix<Complex64>>);

fn schur(m: &DMatrix<Complex64>, want_vectors: bool) -> Result<Schur, NumericsError> {
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), Vec::new(), want_vectors.then(|| DMatrix::zeros(0, 0))));
    }
    // nalgebra storage is column-major, which is what LAPACK expects.
    let mut a: Vec<Complex64> = m.as_slice().to_vec();
    let jobvs = if want_vectors { b'V' } else { b'N' } as c_char;
    let sort = b'N' as c_char;
    let n_i = n as i32;
    let ldvs = if want_vectors { n_i } else { 1 };
    let mut sdim = 0i32;
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    let mut vs = vec![Complex64::new(0.0, 0.0); if want_vectors { n * n } else { 1 }];
    let mut rwork = vec![0.0f64; n];
    let mut info = 0i32;

    let mut query = [Complex64::new(0.0, 0.0)];
    let mut lwork = -1i32;
    // SAFETY: all buffers are sized per the zgees contract; `Complex64` is
    // layout-compatible with LAPACK's double complex.
    unsafe {
        lapack_sys::zgees_(
            &jobvs,
            &sort,
            None,
            &n_i,
            a.as_mut_ptr() as *mut _,
            &n_i,
            &mut sdim,
            w.as_mut_ptr() as *mut _,
            vs.as_mut_ptr() as *mut _,
            &ldvs,
            query.as_mut_ptr() as *mut _,
            &lwork,
            rwork.as_mut_ptr(),
            std::ptr::null_mut(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(NumericsError::Lapack { routine: "zgees", info });
    }
    lwork = (query[0].re as i32).max(1);
    let mut work = vec![Complex64::new(0.0, 0.0); lwork as usize];
    // SAFETY: as above, with a workspace of the size LAPACK asked for.
    unsafe {
        lapack_sys::zgees_(
            &jobvs,
            &sort,
            None,
            &n_i,
            a.as_mut_ptr() as *mut _,
            &n_i,
            &mut sdim,
            w.as_mut_ptr() as *mut _,
            vs.as_mut_ptr() as *mut _,
            &ldvs,
            work.as_mut_ptr() as *mut _,
            &lwork,
            rwork.as_mut_ptr(),
            std::ptr::null_mut(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(NumericsError::Lapack { routine: "zgees", info });
    }
    let vectors = want_vectors.then(|| DMatrix::from_column_slice(n, n, &vs));
    Ok((w, a, vectors))
}
