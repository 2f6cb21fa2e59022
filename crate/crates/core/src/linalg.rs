//! Thin safe wrappers over the handful of LAPACK routines the engines need.
//!
//! All matrices cross the boundary as row-major `ndarray` arrays; the wrappers
//! copy into column-major scratch buffers before calling Fortran.

use ndarray::{Array1, Array2, ArrayView2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

// Link the system OpenBLAS, which bundles LAPACK.
use openblas_src as _;

fn col_major<T: Copy>(a: &ArrayView2<T>) -> Vec<T> {
    let (m, n) = a.dim();
    let mut out = Vec::with_capacity(m * n);
    for j in 0..n {
        for i in 0..m {
            out.push(a[[i, j]]);
        }
    }
    out
}

fn from_col_major<T: Copy>(m: usize, n: usize, buf: &[T]) -> Array2<T> {
    Array2::from_shape_fn((m, n), |(i, j)| buf[j * m + i])
}

fn check(routine: &'static str, info: i32) -> Result<()> {
    if info == 0 {
        Ok(())
    } else {
        Err(Error::Lapack { routine, info })
    }
}

/// Thin singular value decomposition `a = u * diag(s) * vh`, singular values
/// in descending order.
pub fn svd(a: &ArrayView2<C64>) -> Result<(Array2<C64>, Vec<f64>, Array2<C64>)> {
    let (m, n) = a.dim();
    let k = m.min(n);
    if k == 0 {
        return Ok((Array2::zeros((m, 0)), Vec::new(), Array2::zeros((0, n))));
    }
    match svd_driver(a, true) {
        Ok(r) => Ok(r),
        Err(Error::Lapack { .. }) => svd_driver(a, false),
        Err(e) => Err(e),
    }
}

fn svd_driver(a: &ArrayView2<C64>, divide_conquer: bool) -> Result<(Array2<C64>, Vec<f64>, Array2<C64>)> {
    let (m, n) = a.dim();
    let k = m.min(n);
    let mx = m.max(n);
    let mut buf = col_major(a);
    let mut s = vec![0.0; k];
    let mut u = vec![C64::new(0.0, 0.0); m * k];
    let mut vt = vec![C64::new(0.0, 0.0); k * n];
    let mut work = vec![C64::new(0.0, 0.0); 1];
    let mut info = 0;
    let (mi, ni, ki) = (m as i32, n as i32, k as i32);
    if divide_conquer {
        let mut rwork = vec![0.0; (5 * k * k + 5 * k).max(2 * mx * k + 2 * k * k + k)];
        let mut iwork = vec![0i32; 8 * k];
        unsafe {
            lapack::zgesdd(
                b'S', mi, ni, &mut buf, mi, &mut s, &mut u, mi, &mut vt, ki, &mut work, -1,
                &mut rwork, &mut iwork, &mut info,
            );
        }
        check("zgesdd", info)?;
        let lwork = work[0].re as usize;
        work = vec![C64::new(0.0, 0.0); lwork.max(1)];
        unsafe {
            lapack::zgesdd(
                b'S', mi, ni, &mut buf, mi, &mut s, &mut u, mi, &mut vt, ki, &mut work,
                lwork as i32, &mut rwork, &mut iwork, &mut info,
            );
        }
        check("zgesdd", info)?;
    } else {
        let mut rwork = vec![0.0; 5 * k];
        unsafe {
            lapack::zgesvd(
                b'S', b'S', mi, ni, &mut buf, mi, &mut s, &mut u, mi, &mut vt, ki, &mut work, -1,
                &mut rwork, &mut info,
            );
        }
        check("zgesvd", info)?;
        let lwork = work[0].re as usize;
        work = vec![C64::new(0.0, 0.0); lwork.max(1)];
        unsafe {
            lapack::zgesvd(
                b'S', b'S', mi, ni, &mut buf, mi, &mut s, &mut u, mi, &mut vt, ki, &mut work,
                lwork as i32, &mut rwork, &mut info,
            );
        }
        check("zgesvd", info)?;
    }
    Ok((from_col_major(m, k, &u), s, from_col_major(k, n, &vt)))
}

/// Eigen-decomposition of a real symmetric matrix. Eigenvalues ascending,
/// eigenvectors in the columns of the returned matrix.
pub fn eigh_real(a: &ArrayView2<f64>) -> Result<(Vec<f64>, Array2<f64>)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::InvalidArgument("eigh_real: matrix not square".into()));
    }
    if n == 0 {
        return Ok((Vec::new(), Array2::zeros((0, 0))));
    }
    let mut buf = col_major(a);
    let mut w = vec![0.0; n];
    let mut work = vec![0.0; 1];
    let mut iwork = vec![0i32; 1];
    let mut info = 0;
    let ni = n as i32;
    unsafe {
        lapack::dsyevd(b'V', b'U', ni, &mut buf, ni, &mut w, &mut work, -1, &mut iwork, -1, &mut info);
    }
    check("dsyevd", info)?;
    let lwork = work[0] as usize;
    let liwork = iwork[0] as usize;
    work = vec![0.0; lwork.max(1)];
    iwork = vec![0; liwork.max(1)];
    unsafe {
        lapack::dsyevd(
            b'V', b'U', ni, &mut buf, ni, &mut w, &mut work, lwork as i32, &mut iwork,
            liwork as i32, &mut info,
        );
    }
    check("dsyevd", info)?;
    Ok((w, from_col_major(n, n, &buf)))
}

/// Eigen-decomposition of a complex Hermitian matrix (upper triangle used).
pub fn eigh_complex(a: &ArrayView2<C64>) -> Result<(Vec<f64>, Array2<C64>)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::InvalidArgument("eigh_complex: matrix not square".into()));
    }
    if n == 0 {
        return Ok((Vec::new(), Array2::zeros((0, 0))));
    }
    let mut buf = col_major(a);
    let mut w = vec![0.0; n];
    let mut work = vec![C64::new(0.0, 0.0); 1];
    let mut rwork = vec![0.0; 1];
    let mut iwork = vec![0i32; 1];
    let mut info = 0;
    let ni = n as i32;
    unsafe {
        lapack::zheevd(
            b'V', b'U', ni, &mut buf, ni, &mut w, &mut work, -1, &mut rwork, -1, &mut iwork, -1,
            &mut info,
        );
    }
    check("zheevd", info)?;
    let lwork = work[0].re as usize;
    let lrwork = rwork[0] as usize;
    let liwork = iwork[0] as usize;
    work = vec![C64::new(0.0, 0.0); lwork.max(1)];
    rwork = vec![0.0; lrwork.max(1)];
    iwork = vec![0; liwork.max(1)];
    unsafe {
        lapack::zheevd(
            b'V', b'U', ni, &mut buf, ni, &mut w, &mut work, lwork as i32, &mut rwork,
            lrwork as i32, &mut iwork, liwork as i32, &mut info,
        );
    }
    check("zheevd", info)?;
    Ok((w, from_col_major(n, n, &buf)))
}

/// Eigenvalues of a complex Hermitian matrix only.
pub fn eigvalsh_complex(a: &ArrayView2<C64>) -> Result<Vec<f64>> {
    let n = a.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut buf = col_major(a);
    let mut w = vec![0.0; n];
    let mut work = vec![C64::new(0.0, 0.0); 1];
    let mut rwork = vec![0.0; (3 * n).saturating_sub(2).max(1)];
    let mut info = 0;
    let ni = n as i32;
    unsafe {
        lapack::zheev(b'N', b'U', ni, &mut buf, ni, &mut w, &mut work, -1, &mut rwork, &mut info);
    }
    check("zheev", info)?;
    let lwork = work[0].re as usize;
    work = vec![C64::new(0.0, 0.0); lwork.max(1)];
    unsafe {
        lapack::zheev(b'N', b'U', ni, &mut buf, ni, &mut w, &mut work, lwork as i32, &mut rwork, &mut info);
    }
    check("zheev", info)?;
    Ok(w)
}

/// Eigenpairs of a real symmetric tridiagonal matrix with diagonal `d` and
/// off-diagonal `e` (`e.len() == d.len() - 1`).
pub fn eigh_tridiagonal(d: &[f64], e: &[f64]) -> Result<(Vec<f64>, Array2<f64>)> {
    let n = d.len();
    if n == 0 {
        return Ok((Vec::new(), Array2::zeros((0, 0))));
    }
    if e.len() + 1 != n {
        return Err(Error::InvalidArgument("eigh_tridiagonal: bad off-diagonal length".into()));
    }
    let mut dd = d.to_vec();
    let mut ee = e.to_vec();
    ee.push(0.0);
    let mut z = vec![0.0; n * n];
    let mut work = vec![0.0; (2 * n).saturating_sub(2).max(1)];
    let mut info = 0;
    unsafe {
        lapack::dstev(b'V', n as i32, &mut dd, &mut ee, &mut z, n as i32, &mut work, &mut info);
    }
    check("dstev", info)?;
    Ok((dd, from_col_major(n, n, &z)))
}

/// Thin QR factorisation `a = q * r` with `q` having orthonormal columns.
pub fn qr(a: &ArrayView2<C64>) -> Result<(Array2<C64>, Array2<C64>)> {
    let (m, n) = a.dim();
    let k = m.min(n);
    if k == 0 {
        return Ok((Array2::zeros((m, 0)), Array2::zeros((0, n))));
    }
    let mut buf = col_major(a);
    let mut tau = vec![C64::new(0.0, 0.0); k];
    let mut work = vec![C64::new(0.0, 0.0); 1];
    let mut info = 0;
    let (mi, ni, ki) = (m as i32, n as i32, k as i32);
    unsafe {
        lapack::zgeqrf(mi, ni, &mut buf, mi, &mut tau, &mut work, -1, &mut info);
    }
    check("zgeqrf", info)?;
    let lwork = (work[0].re as usize).max(n).max(1);
    work = vec![C64::new(0.0, 0.0); lwork];
    unsafe {
        lapack::zgeqrf(mi, ni, &mut buf, mi, &mut tau, &mut work, lwork as i32, &mut info);
    }
    check("zgeqrf", info)?;
    let full = from_col_major(m, n, &buf);
    let r = Array2::from_shape_fn((k, n), |(i, j)| if j >= i { full[[i, j]] } else { C64::new(0.0, 0.0) });
    unsafe {
        lapack::zungqr(mi, ki, ki, &mut buf, mi, &tau, &mut work, -1, &mut info);
    }
    check("zungqr", info)?;
    let lwork = (work[0].re as usize).max(k).max(1);
    work = vec![C64::new(0.0, 0.0); lwork];
    unsafe {
        lapack::zungqr(mi, ki, ki, &mut buf, mi, &tau, &mut work, lwork as i32, &mut info);
    }
    check("zungqr", info)?;
    let q = from_col_major(m, k, &buf[..m * k]);
    Ok((q, r))
}

/// `exp(factor * h)` for a real symmetric `h`.
pub fn expm_symmetric(h: &ArrayView2<f64>, factor: C64) -> Result<Array2<C64>> {
    let (w, v) = eigh_real(h)?;
    let n = w.len();
    let phases: Array1<C64> = w.iter().map(|&x| (factor * x).exp()).collect();
    let mut out = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                acc += phases[k] * v[[i, k]] * v[[j, k]];
            }
            out[[i, j]] = acc;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn svd_reconstructs() {
        let a = array![[c(1.0, 0.5), c(2.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(-1.0, 0.0), c(3.0, 0.2)]];
        let (u, s, vh) = svd(&a.view()).unwrap();
        assert!(s[0] >= s[1]);
        let mut us = u.clone();
        for (j, &sj) in s.iter().enumerate() {
            us.column_mut(j).mapv_inplace(|x| x * sj);
        }
        let back = us.dot(&vh);
        for (x, y) in back.iter().zip(a.iter()) {
            assert!((x - y).norm() < 1e-12);
        }
        let tall = a.t().to_owned();
        let (u2, s2, vh2) = svd(&tall.view()).unwrap();
        assert_eq!(u2.dim(), (3, 2));
        assert_eq!(vh2.dim(), (2, 2));
        assert!((s2[0] - s[0]).abs() < 1e-12);
    }

    #[test]
    fn real_eigh_sorted_and_orthonormal() {
        let a = array![[2.0, 1.0, 0.0], [1.0, 2.0, 1.0], [0.0, 1.0, 2.0]];
        let (w, v) = eigh_real(&a.view()).unwrap();
        assert!((w[0] - (2.0 - 2f64.sqrt())).abs() < 1e-12);
        assert!((w[2] - (2.0 + 2f64.sqrt())).abs() < 1e-12);
        let g = v.t().dot(&v);
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((g[[i, j]] - e).abs() < 1e-12);
            }
        }
        let av = a.dot(&v.column(0));
        for i in 0..3 {
            assert!((av[i] - w[0] * v[[i, 0]]).abs() < 1e-12);
        }
    }

    #[test]
    fn complex_eigh_pauli_y() {
        let a = array![[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]];
        let (w, v) = eigh_complex(&a.view()).unwrap();
        assert!((w[0] + 1.0).abs() < 1e-12 && (w[1] - 1.0).abs() < 1e-12);
        let x = v.column(0).to_owned();
        let ax = a.dot(&x);
        for i in 0..2 {
            assert!((ax[i] + x[i]).norm() < 1e-12);
        }
        let vals = eigvalsh_complex(&a.view()).unwrap();
        assert!((vals[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tridiagonal_matches_dense() {
        let (w, _) = eigh_tridiagonal(&[2.0, 2.0, 2.0], &[1.0, 1.0]).unwrap();
        assert!((w[0] - (2.0 - 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn qr_reconstructs() {
        let a = array![[c(1.0, 0.0), c(2.0, 1.0)], [c(0.0, 1.0), c(1.0, 0.0)], [c(3.0, 0.0), c(0.0, -2.0)]];
        let (q, r) = qr(&a.view()).unwrap();
        let back = q.dot(&r);
        for (x, y) in back.iter().zip(a.iter()) {
            assert!((x - y).norm() < 1e-12);
        }
        let g = q.t().mapv(|x| x.conj()).dot(&q);
        assert!((g[[0, 1]]).norm() < 1e-12 && (g[[1, 1]] - 1.0).norm() < 1e-12);
    }

    #[test]
    fn expm_of_pauli_x_rotation() {
        let x = array![[0.0, 1.0], [1.0, 0.0]];
        let theta = 0.3;
        let u = expm_symmetric(&x.view(), C64::new(0.0, -theta)).unwrap();
        assert!((u[[0, 0]] - C64::new(theta.cos(), 0.0)).norm() < 1e-12);
        assert!((u[[0, 1]] - C64::new(0.0, -theta.sin())).norm() < 1e-12);
    }
}
