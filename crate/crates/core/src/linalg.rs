//! Small dense linear-algebra helpers shared by the Riccati, LMI and
//! synthesis modules. Everything here works on `DMatrix<f64>` of modest size.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::{Error, Result};

/// Relative positive-definiteness margin: `lambda_min > PD_MARGIN * ||M||_2`.
pub const PD_MARGIN: f64 = 1e-10;

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Eigenvalues of the symmetric part of `m`, ascending.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(symmetrize(m))
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn lambda_min(m: &DMatrix<f64>) -> f64 {
    sym_eigenvalues(m)[0]
}

pub fn lambda_max(m: &DMatrix<f64>) -> f64 {
    *sym_eigenvalues(m).last().expect("empty matrix")
}

/// Largest eigenvalue and a unit eigenvector of the symmetric part of `m`.
pub fn top_eigenpair(m: &DMatrix<f64>) -> (f64, Vec<f64>) {
    let eig = SymmetricEigen::new(symmetrize(m));
    let (idx, val) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("empty matrix");
    (*val, eig.eigenvectors.column(idx).iter().copied().collect())
}

pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

/// `lambda_min(M) > PD_MARGIN * ||M||_2` for the symmetric part of `m`.
pub fn is_positive_definite(m: &DMatrix<f64>) -> bool {
    let ev = sym_eigenvalues(m);
    let scale = ev.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    ev[0] > PD_MARGIN * scale && ev[0] > 0.0
}

pub fn is_positive_semidefinite(m: &DMatrix<f64>, tol: f64) -> bool {
    let ev = sym_eigenvalues(m);
    let scale = ev.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    ev[0] >= -tol * scale.max(1.0)
}

/// Eigenvalues of a general square matrix as `(re, im)` pairs.
pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<(f64, f64)> {
    m.complex_eigenvalues()
        .iter()
        .map(|c| (c.re, c.im))
        .collect()
}

pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    eigenvalues(m)
        .into_iter()
        .map(|(re, im)| re.hypot(im))
        .fold(0.0, f64::max)
}

pub fn max_real_eigenvalue(m: &DMatrix<f64>) -> f64 {
    eigenvalues(m)
        .into_iter()
        .map(|(re, _)| re)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Every eigenvalue strictly left of `-margin`.
pub fn is_hurwitz(m: &DMatrix<f64>, margin: f64) -> bool {
    max_real_eigenvalue(m) < -margin
}

/// Solves `A^T X + X A + C = 0` for Hurwitz `A` with the matrix-sign
/// (Roberts) iteration. Quadratically convergent; the determinant scaling
/// keeps the first iterations from stalling on widely spread spectra.
pub fn solve_lyapunov(a: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if a.ncols() != n || c.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "lyapunov: A is {:?}, C is {:?}",
            a.shape(),
            c.shape()
        )));
    }
    let mut ak = a.clone();
    let mut ck = c.clone();
    for _ in 0..100 {
        let lu = ak.clone().lu();
        let det = lu.determinant();
        let inv = lu
            .try_inverse()
            .ok_or_else(|| Error::NoStabilizingSolution("singular Lyapunov operator".into()))?;
        let scale = if det.is_finite() && det != 0.0 {
            det.abs().powf(-1.0 / n as f64)
        } else {
            1.0
        };
        let next_a = (&ak * scale + &inv / scale) * 0.5;
        let next_c = (&ck * scale + inv.transpose() * &ck * &inv / scale) * 0.5;
        let delta = (&next_a - &ak).norm();
        let size = next_a.norm();
        ak = next_a;
        ck = next_c;
        if delta <= 1e-14 * size {
            break;
        }
    }
    // ak -> -I, ck -> 2X
    let identity = DMatrix::<f64>::identity(n, n);
    if (&ak + &identity).norm() > 1e-6 * (n as f64).sqrt() {
        return Err(Error::NoStabilizingSolution(
            "Lyapunov operator is not Hurwitz".into(),
        ));
    }
    Ok(symmetrize(&(ck * 0.5)))
}

/// Symmetric square root of a positive semidefinite matrix (negative
/// eigenvalues are clipped at zero).
pub fn psd_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    map_symmetric(m, |v| v.max(0.0).sqrt())
}

/// Projection onto `{M : M >= floor * I}` in the Frobenius norm.
pub fn project_floor(m: &DMatrix<f64>, floor: f64) -> DMatrix<f64> {
    map_symmetric(m, |v| v.max(floor))
}

fn map_symmetric(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(symmetrize(m));
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(f));
    symmetrize(&(&eig.eigenvectors * d * eig.eigenvectors.transpose()))
}

/// Orthonormal basis of the eigenspace of a symmetric matrix for eigenvalues
/// above `threshold`.
pub fn dominant_subspace(m: &DMatrix<f64>, threshold: f64) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(symmetrize(m));
    let cols: Vec<_> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > threshold)
        .map(|(i, _)| eig.eigenvectors.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(m.nrows(), 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}
