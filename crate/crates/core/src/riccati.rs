//! Stabilizing solutions of the two H∞-type Riccati equations
//!
//! ```text
//! X A + A^T X - X (B B^T - gamma sigma I) X + (sigma/gamma) I = 0
//! Z A^T + A Z - Z (C^T C - gamma sigma I) Z + (sigma/gamma) I = 0
//! ```
//!
//! the coupling condition `rho(XZ) < gamma^-2`, and the resulting controller
//! gain `K = B^T X` and observer gain `L = Z (I - gamma^2 X Z)^-1 C^T`.
//!
//! The generic solver extracts the stable invariant subspace of the
//! Hamiltonian from its eigenvalues (clustered, so repeated and defective
//! eigenvalues are handled through null spaces of `(H - lambda I)^k`),
//! forms `X = V2 V1^-1`, symmetrizes and takes one Newton step. Whether the
//! result is stabilizing is always checked afterwards.

use nalgebra::{Complex, DMatrix};
use serde::Serialize;

use crate::linalg::{
    condition_number, dominant_subspace, is_hurwitz, is_positive_definite,
    is_positive_semidefinite, max_real_eigenvalue, solve_lyapunov, spectral_radius, symmetrize,
};
use crate::modal::{eigenvalue, input_coefficient, output_coefficient, ModalSystem};
use crate::{Error, Result};

/// Hamiltonian eigenvalues closer than this to the imaginary axis mean no
/// stabilizing solution.
pub const IMAGINARY_AXIS_TOL: f64 = 1e-9;
/// Closed-loop eigenvalues must lie left of `-HURWITZ_MARGIN`.
pub const HURWITZ_MARGIN: f64 = 1e-9;
/// Residual acceptance: `||res||_F <= RESIDUAL_TOL * (1 + ||X||_F)`.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// `V1` condition numbers above this make the subspace unusable.
pub const MAX_SUBSPACE_CONDITION: f64 = 1e12;

/// `X A + A^T X - X R X + Q`.
pub fn care_residual(
    a: &DMatrix<f64>,
    r: &DMatrix<f64>,
    q: &DMatrix<f64>,
    x: &DMatrix<f64>,
) -> DMatrix<f64> {
    x * a + a.transpose() * x - x * r * x + q
}

fn check_square(name: &str, m: &DMatrix<f64>, n: usize) -> Result<()> {
    if m.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "{name} is {:?}, expected ({n}, {n})",
            m.shape()
        )));
    }
    Ok(())
}

/// Stabilizing solution of `X A + A^T X - X R X + Q = 0`.
pub fn solve_care_stabilizing(
    a: &DMatrix<f64>,
    r: &DMatrix<f64>,
    q: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    check_square("A", a, n)?;
    check_square("R", r, n)?;
    check_square("Q", q, n)?;
    if n == 0 {
        return Err(Error::DimensionMismatch("empty system".into()));
    }

    let mut h = DMatrix::<f64>::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(a);
    h.view_mut((0, n), (n, n)).copy_from(&(-r));
    h.view_mut((n, 0), (n, n)).copy_from(&(-q));
    h.view_mut((n, n), (n, n)).copy_from(&(-a.transpose()));

    let basis = stable_subspace(&h, n)?;
    let v1 = basis.rows(0, n).into_owned();
    let v2 = basis.rows(n, n).into_owned();
    let cond = condition_number(&v1);
    if !(cond <= MAX_SUBSPACE_CONDITION) {
        return Err(Error::DegenerateSubspace(cond));
    }
    let v1_inv = v1
        .try_inverse()
        .ok_or(Error::DegenerateSubspace(f64::INFINITY))?;
    let x = symmetrize(&(v2 * v1_inv));
    let x = newton_refine(a, r, q, x);
    certify(a, r, q, x)
}

/// One Newton (Kleinman) step, kept only if it lowers the residual.
fn newton_refine(
    a: &DMatrix<f64>,
    r: &DMatrix<f64>,
    q: &DMatrix<f64>,
    x: DMatrix<f64>,
) -> DMatrix<f64> {
    let before = care_residual(a, r, q, &x).norm();
    match newton_step(a, r, q, &x) {
        Ok(next) if care_residual(a, r, q, &next).norm() < before => next,
        _ => x,
    }
}

fn newton_step(
    a: &DMatrix<f64>,
    r: &DMatrix<f64>,
    q: &DMatrix<f64>,
    x: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let closed = a - r * x;
    let rhs = q + x * r * x;
    solve_lyapunov(&closed, &rhs)
}

fn certify(
    a: &DMatrix<f64>,
    r: &DMatrix<f64>,
    q: &DMatrix<f64>,
    x: DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NoStabilizingSolution("non-finite solution".into()));
    }
    let res = care_residual(a, r, q, &x).norm();
    if res > RESIDUAL_TOL * (1.0 + x.norm()) {
        return Err(Error::NoStabilizingSolution(format!(
            "residual {res:.3e} above tolerance"
        )));
    }
    let closed = a - r * &x;
    if !is_hurwitz(&closed, HURWITZ_MARGIN) {
        return Err(Error::NoStabilizingSolution(format!(
            "closed loop not Hurwitz (max Re = {:.3e})",
            max_real_eigenvalue(&closed)
        )));
    }
    Ok(x)
}

/// Newton-Kleinman iteration from a stabilizing initial guess.
pub fn newton_kleinman(
    a: &DMatrix<f64>,
    r: &DMatrix<f64>,
    q: &DMatrix<f64>,
    x0: &DMatrix<f64>,
    max_iter: usize,
) -> Result<DMatrix<f64>> {
    let mut x = x0.clone();
    for _ in 0..max_iter {
        let next = symmetrize(&newton_step(a, r, q, &x)?);
        let delta = (&next - &x).norm();
        x = next;
        if delta <= 1e-14 * (1.0 + x.norm()) {
            break;
        }
    }
    certify(a, r, q, x)
}

struct Cluster {
    re: f64,
    im: f64,
    size: usize,
}

/// Real `2n x n` basis of the invariant subspace of `h` for `Re < 0`.
fn stable_subspace(h: &DMatrix<f64>, n: usize) -> Result<DMatrix<f64>> {
    let eig: Vec<(f64, f64)> = h
        .complex_eigenvalues()
        .iter()
        .map(|c| (c.re, c.im))
        .collect();
    if eig
        .iter()
        .any(|(re, im)| !re.is_finite() || !im.is_finite())
    {
        return Err(Error::NoStabilizingSolution(
            "non-finite Hamiltonian".into(),
        ));
    }
    if let Some((re, im)) = eig.iter().find(|(re, _)| re.abs() < IMAGINARY_AXIS_TOL) {
        return Err(Error::NoStabilizingSolution(format!(
            "Hamiltonian eigenvalue {re:.3e}{im:+.3e}i on the imaginary axis"
        )));
    }
    let mut stable: Vec<(f64, f64)> = eig.into_iter().filter(|(re, _)| *re < 0.0).collect();
    if stable.len() != n {
        return Err(Error::NoStabilizingSolution(format!(
            "{} stable Hamiltonian eigenvalues, expected {n}",
            stable.len()
        )));
    }
    stable.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    // Greedy clustering of numerically repeated eigenvalues.
    let mut clusters: Vec<(Vec<(f64, f64)>, f64)> = Vec::new();
    for ev in stable {
        let tol = 1e-6 * (1.0 + ev.0.hypot(ev.1));
        match clusters.iter_mut().find(|(members, _)| {
            members
                .iter()
                .any(|m| (m.0 - ev.0).hypot(m.1 - ev.1) <= tol)
        }) {
            Some((members, _)) => members.push(ev),
            None => clusters.push((vec![ev], tol)),
        }
    }
    let clusters: Vec<Cluster> = clusters
        .into_iter()
        .map(|(members, _)| {
            let k = members.len() as f64;
            Cluster {
                re: members.iter().map(|m| m.0).sum::<f64>() / k,
                im: members.iter().map(|m| m.1).sum::<f64>() / k,
                size: members.len(),
            }
        })
        .collect();

    let mut columns: Vec<nalgebra::DVector<f64>> = Vec::with_capacity(n);
    for c in &clusters {
        let real_tol = 1e-6 * (1.0 + c.re.abs());
        if c.im.abs() <= real_tol {
            let shifted = h - DMatrix::<f64>::identity(2 * n, 2 * n) * c.re;
            let m = matrix_power(&shifted, c.size);
            for v in real_null_vectors(m, c.size) {
                columns.push(v);
            }
        } else if c.im > 0.0 {
            let hc = h.map(|v| Complex::new(v, 0.0));
            let shift = Complex::new(c.re, c.im);
            let shifted = hc - DMatrix::<Complex<f64>>::identity(2 * n, 2 * n) * shift;
            let m = complex_matrix_power(&shifted, c.size);
            for v in complex_null_vectors(m, c.size) {
                columns.push(v.map(|z| z.re));
                columns.push(v.map(|z| z.im));
            }
        }
    }
    if columns.len() != n {
        return Err(Error::NoStabilizingSolution(format!(
            "stable subspace has dimension {}, expected {n}",
            columns.len()
        )));
    }
    Ok(DMatrix::from_columns(&columns))
}

fn matrix_power(m: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let mut out = m.clone();
    for _ in 1..k {
        out = &out * m;
    }
    out
}

fn complex_matrix_power(m: &DMatrix<Complex<f64>>, k: usize) -> DMatrix<Complex<f64>> {
    let mut out = m.clone();
    for _ in 1..k {
        out = &out * m;
    }
    out
}

fn smallest_indices(values: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    idx.truncate(k);
    idx
}

fn real_null_vectors(m: DMatrix<f64>, k: usize) -> Vec<nalgebra::DVector<f64>> {
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    smallest_indices(&sv, k)
        .into_iter()
        .map(|i| v_t.row(i).transpose())
        .collect()
}

fn complex_null_vectors(
    m: DMatrix<Complex<f64>>,
    k: usize,
) -> Vec<nalgebra::DVector<Complex<f64>>> {
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested V^H");
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    smallest_indices(&sv, k)
        .into_iter()
        .map(|i| v_t.row(i).transpose().map(|z| z.conj()))
        .collect()
}

/// Why a design was rejected.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "code", content = "detail")]
pub enum Infeasibility {
    #[serde(rename = "no-stabilizing-X")]
    NoStabilizingX(String),
    #[serde(rename = "no-stabilizing-Z")]
    NoStabilizingZ(String),
    #[serde(rename = "spectral-condition-failed")]
    SpectralConditionFailed { rho: f64, bound: f64 },
    #[serde(rename = "not-positive-definite")]
    NotPositiveDefinite(String),
}

impl Infeasibility {
    pub fn code(&self) -> &'static str {
        match self {
            Infeasibility::NoStabilizingX(_) => "no-stabilizing-X",
            Infeasibility::NoStabilizingZ(_) => "no-stabilizing-Z",
            Infeasibility::SpectralConditionFailed { .. } => "spectral-condition-failed",
            Infeasibility::NotPositiveDefinite(_) => "not-positive-definite",
        }
    }
}

/// How to treat semidefinite Riccati solutions, which occur for `sigma = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SemidefiniteMode {
    /// Accept PSD `X`, `Z` when `sigma = 0`; the coupling matrix `Y` is then
    /// checked on the range of `Z`.
    #[default]
    AllowLinear,
    /// Require `X > 0` and `Z > 0` always.
    Strict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisResult {
    pub n: usize,
    pub gamma: f64,
    pub sigma: f64,
    pub x: Option<DMatrix<f64>>,
    pub z: Option<DMatrix<f64>>,
    /// `gamma^-2 Z^-1 - X`; absent when `Z` is singular.
    pub y: Option<DMatrix<f64>>,
    /// `1 x N`
    pub k: Option<DMatrix<f64>>,
    /// `N x 1`
    pub l: Option<DMatrix<f64>>,
    pub rho_xz: Option<f64>,
    pub reason: Option<Infeasibility>,
    /// Both `X` and `Z` positive definite.
    pub positive_definite: bool,
}

/// Controller data needed to run the closed loop.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerGains {
    pub k: DMatrix<f64>,
    pub l: DMatrix<f64>,
    pub x: DMatrix<f64>,
    pub y: Option<DMatrix<f64>>,
    pub gamma: f64,
    pub sigma: f64,
}

impl SynthesisResult {
    pub fn feasible(&self) -> bool {
        self.reason.is_none()
    }

    pub fn controller(&self) -> Option<ControllerGains> {
        if !self.feasible() {
            return None;
        }
        Some(ControllerGains {
            k: self.k.clone()?,
            l: self.l.clone()?,
            x: self.x.clone()?,
            y: self.y.clone(),
            gamma: self.gamma,
            sigma: self.sigma,
        })
    }

    fn rejected(n: usize, gamma: f64, sigma: f64, reason: Infeasibility) -> Self {
        Self {
            n,
            gamma,
            sigma,
            x: None,
            z: None,
            y: None,
            k: None,
            l: None,
            rho_xz: None,
            reason: Some(reason),
            positive_definite: false,
        }
    }
}

/// `(rho(XZ), rho(XZ) < gamma^-2)`.
pub fn spectral_condition(x: &DMatrix<f64>, z: &DMatrix<f64>, gamma: f64) -> (f64, bool) {
    let rho = spectral_radius(&(x * z));
    (rho, rho < gamma.powi(-2))
}

pub fn synthesize_gains(sys: &ModalSystem, sigma: f64, gamma: f64) -> Result<SynthesisResult> {
    synthesize_gains_with(sys, sigma, gamma, SemidefiniteMode::default())
}

pub fn synthesize_gains_with(
    sys: &ModalSystem,
    sigma: f64,
    gamma: f64,
    mode: SemidefiniteMode,
) -> Result<SynthesisResult> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "gamma must be > 0, got {gamma}"
        )));
    }
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sigma must be >= 0, got {sigma}"
        )));
    }
    let n = sys.n;
    let eye = DMatrix::<f64>::identity(n, n);
    let coupling = &eye * (gamma * sigma);
    let q_weight = &eye * (sigma / gamma);

    let rx = &sys.b_mat * sys.b_mat.transpose() - &coupling;
    let x = match solve_with_fallback(sys, &sys.a, &rx, &q_weight, Side::Controller) {
        Ok(x) => x,
        Err(e) => {
            return Ok(SynthesisResult::rejected(
                n,
                gamma,
                sigma,
                Infeasibility::NoStabilizingX(e.to_string()),
            ))
        }
    };
    let at = sys.a.transpose();
    let rz = sys.c_mat.transpose() * &sys.c_mat - &coupling;
    let z = match solve_with_fallback(sys, &at, &rz, &q_weight, Side::Observer) {
        Ok(z) => z,
        Err(e) => {
            let mut out = SynthesisResult::rejected(
                n,
                gamma,
                sigma,
                Infeasibility::NoStabilizingZ(e.to_string()),
            );
            out.k = Some(sys.b_mat.transpose() * &x);
            out.x = Some(x);
            return Ok(out);
        }
    };

    let k = sys.b_mat.transpose() * &x;
    let (rho, spectral_ok) = spectral_condition(&x, &z, gamma);
    let pd = is_positive_definite(&x) && is_positive_definite(&z);

    let mut out = SynthesisResult {
        n,
        gamma,
        sigma,
        x: Some(x.clone()),
        z: Some(z.clone()),
        y: None,
        k: Some(k),
        l: None,
        rho_xz: Some(rho),
        reason: None,
        positive_definite: pd,
    };

    if !spectral_ok {
        out.reason = Some(Infeasibility::SpectralConditionFailed {
            rho,
            bound: gamma.powi(-2),
        });
        return Ok(out);
    }

    let semidefinite_allowed = mode == SemidefiniteMode::AllowLinear && sigma == 0.0;
    if !pd {
        let psd = is_positive_semidefinite(&x, 1e-9) && is_positive_semidefinite(&z, 1e-9);
        if !(semidefinite_allowed && psd) {
            out.reason = Some(Infeasibility::NotPositiveDefinite("X or Z".into()));
            return Ok(out);
        }
    }

    let m = &eye - (&x * &z) * (gamma * gamma);
    let Some(m_inv) = m.try_inverse() else {
        out.reason = Some(Infeasibility::SpectralConditionFailed {
            rho,
            bound: gamma.powi(-2),
        });
        return Ok(out);
    };
    out.l = Some(&z * m_inv * sys.c_mat.transpose());

    if is_positive_definite(&z) {
        let z_inv = z.clone().try_inverse().expect("positive definite");
        let y = symmetrize(&(z_inv / (gamma * gamma) - &x));
        if !is_positive_definite(&y) {
            out.reason = Some(Infeasibility::NotPositiveDefinite("Y".into()));
            return Ok(out);
        }
        out.y = Some(y);
    } else {
        // Y restricted to the range of Z
        let scale = z.norm().max(f64::MIN_POSITIVE);
        let u = dominant_subspace(&z, 1e-10 * scale);
        if u.ncols() > 0 {
            let zr = u.transpose() * &z * &u;
            let xr = u.transpose() * &x * &u;
            let yr = zr.try_inverse().map(|zi| zi / (gamma * gamma) - xr);
            if !yr.map(|y| is_positive_definite(&y)).unwrap_or(false) {
                out.reason = Some(Infeasibility::NotPositiveDefinite("restricted Y".into()));
                return Ok(out);
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy)]
enum Side {
    Controller,
    Observer,
}

/// Eigen path first; when the subspace is degenerate, Newton-Kleinman from the
/// zero-padded Gramian solution.
fn solve_with_fallback(
    sys: &ModalSystem,
    a: &DMatrix<f64>,
    r: &DMatrix<f64>,
    q: &DMatrix<f64>,
    side: Side,
) -> Result<DMatrix<f64>> {
    match solve_care_stabilizing(a, r, q) {
        Err(Error::DegenerateSubspace(cond)) => {
            let qe = sys.effective_q();
            let n0 = unstable_mode_count(qe);
            if n0 > sys.n {
                return Err(Error::DegenerateSubspace(cond));
            }
            let (x0, z0) = gramian_solution_linear(qe, n0)?;
            let seed = match side {
                Side::Controller => x0,
                Side::Observer => z0,
            };
            let mut padded = DMatrix::<f64>::zeros(sys.n, sys.n);
            padded.view_mut((0, 0), (n0, n0)).copy_from(&seed);
            newton_kleinman(a, r, q, &padded, 50)
        }
        other => other,
    }
}

/// Number of eigenvalues `lambda_n = n^2` strictly below `q`.
pub fn unstable_mode_count(q: f64) -> usize {
    let mut n = 0;
    while eigenvalue(n) < q {
        n += 1;
    }
    n
}

fn check_resonance(q: f64) -> Result<()> {
    let nearest = q.max(0.0).sqrt().round() as usize;
    for n in nearest.saturating_sub(1)..=nearest + 1 {
        if (q - eigenvalue(n)).abs() < 1e-9 {
            return Err(Error::ResonantReaction { q, n });
        }
    }
    Ok(())
}

/// Inverse controllability/observability Gramians of the `N0` unstable modes,
/// from their closed-form entries `b_i b_j / (a_i + a_j)` with
/// `a_i = q - lambda_i > 0`. These solve the `sigma = 0` equations.
pub fn gramian_solution_linear(q: f64, n0: usize) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    check_resonance(q)?;
    if n0 == 0 || !(eigenvalue(n0 - 1) < q && q < eigenvalue(n0)) {
        return Err(Error::InvalidParameter(format!(
            "N0 = {n0} does not bracket q = {q} (need lambda_(N0-1) < q < lambda_N0)"
        )));
    }
    let a: Vec<f64> = (0..n0).map(|i| q - eigenvalue(i)).collect();
    let gb = DMatrix::from_fn(n0, n0, |i, j| {
        input_coefficient(i) * input_coefficient(j) / (a[i] + a[j])
    });
    let gc = DMatrix::from_fn(n0, n0, |i, j| {
        output_coefficient(i) * output_coefficient(j) / (a[i] + a[j])
    });
    let invert = |g: DMatrix<f64>, name| {
        g.cholesky()
            .map(|c| symmetrize(&c.inverse()))
            .ok_or(Error::NotPositiveDefinite(name))
    };
    Ok((invert(gb, "G_B")?, invert(gc, "G_C")?))
}

/// Gains of the linear design with the stable-mode entries set to zero:
/// `K = [B0^T X0, 0]`, `L = [Z0 (I - gamma^2 X0 Z0)^-1 C0^T; 0]`.
pub fn linear_gain_structure(q: f64, n: usize, gamma: f64) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    check_resonance(q)?;
    let n0 = unstable_mode_count(q);
    if n < n0 {
        return Err(Error::InvalidParameter(format!(
            "N = {n} is below the number of unstable modes {n0}"
        )));
    }
    let (x0, z0) = gramian_solution_linear(q, n0)?;
    let (rho, ok) = spectral_condition(&x0, &z0, gamma);
    if !ok {
        return Err(Error::SpectralCondition {
            rho,
            bound: gamma.powi(-2),
        });
    }
    let b0 = DMatrix::from_fn(n0, 1, |i, _| input_coefficient(i));
    let c0 = DMatrix::from_fn(1, n0, |_, j| output_coefficient(j));
    let eye = DMatrix::<f64>::identity(n0, n0);
    let m =
        (&eye - (&x0 * &z0) * (gamma * gamma))
            .try_inverse()
            .ok_or(Error::SpectralCondition {
                rho,
                bound: gamma.powi(-2),
            })?;
    let k0 = b0.transpose() * &x0;
    let l0 = &z0 * m * c0.transpose();
    let mut k = DMatrix::zeros(1, n);
    let mut l = DMatrix::zeros(n, 1);
    k.view_mut((0, 0), (1, n0)).copy_from(&k0);
    l.view_mut((0, 0), (n0, 1)).copy_from(&l0);
    Ok((k, l))
}
