//! Sampled-data stability matrix `Psi` and a certificate search for
//! `Psi(Pz, Pe, Wz, We) <= 0`.
//!
//! Block layout (upper triangle), `G = gamma sigma`, `KK = K^T K`,
//! `Acl = A - BK`, `Ae = A - LC + G X`:
//!
//! ```text
//!        z      e          F/(G)   zeta   dz            de            Wz-slack        We-slack
//! z    [ P11    P12        G Pz    0      KK - PzBK     KK - PzBK     h Acl^T Wz      h G X We      ]
//! e    [        P22        -G Pe   Pe L   KK            KK            -h K^T B^T Wz   h Ae^T We     ]
//! F    [                   -G I    0      0             0             h G Wz          -h G We       ]
//! zeta [                           -g^-2  0             0             0               h L^T We      ]
//! dz   [                                  -pi^2/4 Wz+KK KK            -h K^T B^T Wz   0             ]
//! de   [                                                -pi^2/4 We+KK -h K^T B^T Wz   0             ]
//! Wz   [                                                              -Wz             0             ]
//! We   [                                                                              -We           ]
//! ```
//!
//! with `P11 = Pz Acl + Acl^T Pz + KK + (sigma/gamma) I`,
//! `P12 = -Pz B K + G X Pe + KK`, `P22 = Pe Ae + Ae^T Pe + KK`.
//! For `sigma = 0` the `F` block row and column are removed.
//!
//! `A` here is built from the reduced reaction coefficient, which the caller
//! supplies as its own [`ModalSystem`].
//!
//! The search never proves infeasibility. A missing certificate only means
//! none was found.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::linalg::{is_positive_definite, lambda_max, project_floor, psd_sqrt, symmetrize};
use crate::modal::ModalSystem;
use crate::parallel::par_map;
use crate::riccati::ControllerGains;
use crate::{Error, Result};

/// Accept `lambda_max(Psi) <= PSI_TOL`.
pub const PSI_TOL: f64 = 1e-8;
/// Relative positive-definiteness margin of certificate matrices.
pub const CERT_PD_MARGIN: f64 = 1e-9;
pub const DEFAULT_BUDGET: usize = 1000;
pub const DEFAULT_GRID_POINTS: usize = 60;
pub const GRID_RANGE: (f64, f64) = (1e-3, 1e6);

/// Fixed data of the LMI: plant at the reduced reaction and the gains.
#[derive(Debug, Clone)]
pub struct PsiData {
    pub n: usize,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub k: DMatrix<f64>,
    pub l: DMatrix<f64>,
    pub x: DMatrix<f64>,
    pub gamma: f64,
    pub sigma: f64,
}

impl PsiData {
    pub fn new(reduced: &ModalSystem, gains: &ControllerGains) -> Result<Self> {
        let n = reduced.n;
        let shapes = [
            ("K", gains.k.shape(), (1, n)),
            ("L", gains.l.shape(), (n, 1)),
            ("X", gains.x.shape(), (n, n)),
        ];
        for (name, got, want) in shapes {
            if got != want {
                return Err(Error::DimensionMismatch(format!(
                    "{name} is {got:?}, expected {want:?}"
                )));
            }
        }
        Ok(Self {
            n,
            a: reduced.a.clone(),
            b: reduced.b_mat.clone(),
            c: reduced.c_mat.clone(),
            k: gains.k.clone(),
            l: gains.l.clone(),
            x: gains.x.clone(),
            gamma: gains.gamma,
            sigma: gains.sigma,
        })
    }

    /// `Psi` has a nonlinearity block.
    pub fn has_f_block(&self) -> bool {
        self.sigma != 0.0
    }

    pub fn psi_size(&self) -> usize {
        if self.has_f_block() {
            7 * self.n + 1
        } else {
            6 * self.n + 1
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmiVariables {
    pub pz: DMatrix<f64>,
    pub pe: DMatrix<f64>,
    pub wz: DMatrix<f64>,
    pub we: DMatrix<f64>,
}

impl LmiVariables {
    pub fn zeros(n: usize) -> Self {
        let z = DMatrix::zeros(n, n);
        Self {
            pz: z.clone(),
            pe: z.clone(),
            wz: z.clone(),
            we: z,
        }
    }

    fn as_array(&self) -> [&DMatrix<f64>; 4] {
        [&self.pz, &self.pe, &self.wz, &self.we]
    }

    fn from_array(m: [DMatrix<f64>; 4]) -> Self {
        let [pz, pe, wz, we] = m;
        Self { pz, pe, wz, we }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertStage {
    WarmStart,
    Subgradient,
}

#[derive(Debug, Clone)]
pub struct SampledCert {
    pub vars: LmiVariables,
    pub h: f64,
    pub lambda_max: f64,
    pub stage: CertStage,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    pub budget: usize,
    pub grid_points: usize,
    pub threads: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            grid_points: DEFAULT_GRID_POINTS,
            threads: 1,
        }
    }
}

/// Assembles the symmetric `Psi` for sampling bound `h`.
pub fn assemble_psi(data: &PsiData, h: f64, vars: &LmiVariables) -> Result<DMatrix<f64>> {
    let n = data.n;
    for (name, m) in ["Pz", "Pe", "Wz", "We"].iter().zip(vars.as_array()) {
        if m.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "{name} is {:?}, expected ({n}, {n})",
                m.shape()
            )));
        }
    }
    if !(h >= 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("h must be >= 0, got {h}")));
    }
    Ok(assemble_unchecked(data, h, vars))
}

fn assemble_unchecked(data: &PsiData, h: f64, v: &LmiVariables) -> DMatrix<f64> {
    let n = data.n;
    let eye = DMatrix::<f64>::identity(n, n);
    let (a, b, c, k, l, x) = (&data.a, &data.b, &data.c, &data.k, &data.l, &data.x);
    let g = data.gamma;
    let gs = data.gamma * data.sigma;
    let (pz, pe, wz, we) = (&v.pz, &v.pe, &v.wz, &v.we);

    let kk = k.transpose() * k;
    let bk = b * k;
    let acl = a - &bk;
    let ae = a - l * c + x * gs;
    let pz_bk = pz * &bk;
    let kbw = k.transpose() * b.transpose() * wz * (-h);

    let p11 = pz * &acl + acl.transpose() * pz + &kk + &eye * (data.sigma / g);
    let p12 = -&pz_bk + x * pe * gs + &kk;
    let p22 = pe * &ae + ae.transpose() * pe + &kk;

    let sizes = [n, n, n, 1, n, n, n, n];
    let keep: Vec<usize> = (0..8).filter(|&i| i != 2 || data.has_f_block()).collect();
    let mut offset = [0usize; 8];
    let mut acc = 0;
    for &i in &keep {
        offset[i] = acc;
        acc += sizes[i];
    }
    let mut psi = DMatrix::<f64>::zeros(acc, acc);
    let mut put = |i: usize, j: usize, m: DMatrix<f64>| {
        if keep.contains(&i) && keep.contains(&j) {
            psi.view_mut((offset[i], offset[j]), m.shape())
                .copy_from(&m);
            if i != j {
                psi.view_mut((offset[j], offset[i]), (m.ncols(), m.nrows()))
                    .copy_from(&m.transpose());
            }
        }
    };

    put(0, 0, p11);
    put(0, 1, p12);
    put(0, 2, pz * gs);
    put(0, 4, &kk - &pz_bk);
    put(0, 5, &kk - &pz_bk);
    put(0, 6, acl.transpose() * wz * h);
    put(0, 7, x * we * (h * gs));

    put(1, 1, p22);
    put(1, 2, pe * (-gs));
    put(1, 3, pe * l);
    put(1, 4, kk.clone());
    put(1, 5, kk.clone());
    put(1, 6, kbw.clone());
    put(1, 7, ae.transpose() * we * h);

    put(2, 2, &eye * (-gs));
    put(2, 6, wz * (h * gs));
    put(2, 7, we * (-h * gs));

    put(3, 3, DMatrix::from_element(1, 1, -1.0 / (g * g)));
    put(3, 7, l.transpose() * we * h);

    let quarter_pi2 = PI * PI / 4.0;
    put(4, 4, wz * (-quarter_pi2) + &kk);
    put(4, 5, kk.clone());
    put(4, 6, kbw.clone());

    put(5, 5, we * (-quarter_pi2) + &kk);
    put(5, 6, kbw);

    put(6, 6, -wz);
    put(7, 7, -we);
    psi
}

/// `Psi` as an affine map of a coordinate vector: `Psi(v) = base + sum v_k basis_k`.
struct AffinePsi {
    base: DMatrix<f64>,
    basis: Vec<DMatrix<f64>>,
    n: usize,
    /// Congruence factors applied to each of the four matrices.
    scale: [DMatrix<f64>; 4],
}

fn sym_dim(n: usize) -> usize {
    n * (n + 1) / 2
}

fn sym_unit(n: usize, idx: usize) -> DMatrix<f64> {
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            if k == idx {
                let mut e = DMatrix::zeros(n, n);
                e[(i, j)] = 1.0;
                e[(j, i)] = 1.0;
                return e;
            }
            k += 1;
        }
    }
    unreachable!("index within symmetric dimension")
}

fn pack(m: &DMatrix<f64>, out: &mut Vec<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in i..n {
            out.push(m[(i, j)]);
        }
    }
}

fn unpack(v: &[f64], n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            m[(i, j)] = v[k];
            m[(j, i)] = v[k];
            k += 1;
        }
    }
    m
}

impl AffinePsi {
    fn new(data: &PsiData, h: f64, scale: [DMatrix<f64>; 4]) -> Self {
        let n = data.n;
        let base = assemble_unchecked(data, h, &LmiVariables::zeros(n));
        let m = sym_dim(n);
        let mut basis = Vec::with_capacity(4 * m);
        for slot in 0..4 {
            for idx in 0..m {
                let e = sym_unit(n, idx);
                let mut mats = [
                    DMatrix::zeros(n, n),
                    DMatrix::zeros(n, n),
                    DMatrix::zeros(n, n),
                    DMatrix::zeros(n, n),
                ];
                mats[slot] = &scale[slot] * e * &scale[slot];
                let vars = LmiVariables::from_array(mats);
                basis.push(assemble_unchecked(data, h, &vars) - &base);
            }
        }
        Self {
            base,
            basis,
            n,
            scale,
        }
    }

    fn eval(&self, v: &[f64]) -> DMatrix<f64> {
        let mut m = self.base.clone();
        for (vk, bk) in v.iter().zip(&self.basis) {
            if *vk != 0.0 {
                add_scaled(&mut m, *vk, bk);
            }
        }
        m
    }

    fn variables(&self, v: &[f64]) -> LmiVariables {
        let m = sym_dim(self.n);
        let mats = std::array::from_fn(|slot| {
            let inner = unpack(&v[slot * m..(slot + 1) * m], self.n);
            symmetrize(&(&self.scale[slot] * inner * &self.scale[slot]))
        });
        LmiVariables::from_array(mats)
    }
}

/// `m += s * b`
fn add_scaled(m: &mut DMatrix<f64>, s: f64, b: &DMatrix<f64>) {
    for (mi, bi) in m.as_mut_slice().iter_mut().zip(b.as_slice()) {
        *mi += s * bi;
    }
}

fn top_eig(m: &DMatrix<f64>) -> (f64, nalgebra::DVector<f64>) {
    let eig = SymmetricEigen::new(m.clone());
    let (idx, val) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    (*val, eig.eigenvectors.column(idx).into_owned())
}

fn log_grid(points: usize) -> Vec<f64> {
    let (lo, hi) = (GRID_RANGE.0.log10(), GRID_RANGE.1.log10());
    if points == 1 {
        return vec![10f64.powf(lo)];
    }
    (0..points)
        .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (points - 1) as f64))
        .collect()
}

/// Warm-start `Pe`: `Y` when available, otherwise the `X` scale.
fn warm_pe(data: &PsiData, y: Option<&DMatrix<f64>>) -> DMatrix<f64> {
    match y {
        Some(y) => y.clone(),
        None => {
            let s = data.x.norm().max(1.0);
            DMatrix::identity(data.n, data.n) * s
        }
    }
}

fn warm_pz(data: &PsiData) -> DMatrix<f64> {
    if is_positive_definite(&data.x) {
        data.x.clone()
    } else {
        project_floor(&data.x, 1e-6 * data.x.norm().max(1.0))
    }
}

/// Best `(lambda_max, alpha, beta)` of the warm start over the log grid.
pub fn stage1_minimum(
    data: &PsiData,
    y: Option<&DMatrix<f64>>,
    h: f64,
    grid_points: usize,
    threads: usize,
) -> (f64, f64, f64) {
    let n = data.n;
    let eye = DMatrix::<f64>::identity(n, n);
    let fixed = LmiVariables {
        pz: warm_pz(data),
        pe: warm_pe(data, y),
        wz: DMatrix::zeros(n, n),
        we: DMatrix::zeros(n, n),
    };
    let base = assemble_unchecked(data, h, &fixed);
    let wz_part = assemble_unchecked(
        data,
        h,
        &LmiVariables {
            wz: eye.clone(),
            ..LmiVariables::zeros(n)
        },
    ) - assemble_unchecked(data, h, &LmiVariables::zeros(n));
    let we_part = assemble_unchecked(
        data,
        h,
        &LmiVariables {
            we: eye,
            ..LmiVariables::zeros(n)
        },
    ) - assemble_unchecked(data, h, &LmiVariables::zeros(n));
    let grid = log_grid(grid_points.max(1));

    let eval_row = |alpha: f64| -> (f64, f64, f64) {
        let mut best = (f64::INFINITY, alpha, grid[0]);
        for &beta in &grid {
            let mut m = base.clone();
            add_scaled(&mut m, alpha, &wz_part);
            add_scaled(&mut m, beta, &we_part);
            let top = m
                .symmetric_eigenvalues()
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max);
            if top < best.0 {
                best = (top, alpha, beta);
            }
        }
        best
    };

    let rows = par_map(&grid, threads, |&a| eval_row(a));
    rows.into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("non-empty grid")
}

fn validate(
    data: &PsiData,
    h: f64,
    vars: LmiVariables,
    stage: CertStage,
    iterations: usize,
) -> Option<SampledCert> {
    if !vars.as_array().into_iter().all(pd_with_margin) {
        return None;
    }
    let lambda = lambda_max(&assemble_unchecked(data, h, &vars));
    (lambda <= PSI_TOL).then_some(SampledCert {
        vars,
        h,
        lambda_max: lambda,
        stage,
        iterations,
    })
}

fn pd_with_margin(m: &DMatrix<f64>) -> bool {
    let ev = crate::linalg::sym_eigenvalues(m);
    let top = ev.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    ev[0] > CERT_PD_MARGIN * top
}

/// Warm start over the `(alpha, beta)` grid, then projected subgradient
/// descent on `lambda_max(Psi)`.
pub fn feasibility_search(
    data: &PsiData,
    y: Option<&DMatrix<f64>>,
    h: f64,
    opts: SearchOptions,
) -> Result<Option<SampledCert>> {
    if let Some(y) = y {
        if y.shape() != (data.n, data.n) {
            return Err(Error::DimensionMismatch(format!(
                "Y is {:?}, expected ({n}, {n})",
                y.shape(),
                n = data.n
            )));
        }
    }
    if !(h >= 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("h must be >= 0, got {h}")));
    }
    let n = data.n;
    let eye = DMatrix::<f64>::identity(n, n);
    let (best, alpha, beta) = stage1_minimum(data, y, h, opts.grid_points, opts.threads);
    let pz = warm_pz(data);
    let pe = warm_pe(data, y);
    if best <= PSI_TOL {
        let vars = LmiVariables {
            pz: pz.clone(),
            pe: pe.clone(),
            wz: &eye * alpha,
            we: &eye * beta,
        };
        if let Some(cert) = validate(data, h, vars, CertStage::WarmStart, 0) {
            return Ok(Some(cert));
        }
    }
    Ok(subgradient(
        data,
        h,
        [pz, pe, &eye * alpha, &eye * beta],
        opts.budget,
    ))
}

/// Projected subgradient in congruence-scaled coordinates `M = S M' S`
/// around the warm start (`M' = I` initially), Polyak steps toward an
/// adaptive target below the best value seen.
fn subgradient(
    data: &PsiData,
    h: f64,
    warm: [DMatrix<f64>; 4],
    budget: usize,
) -> Option<SampledCert> {
    let n = data.n;
    let m = sym_dim(n);
    let scale = warm.map(|w| psd_sqrt(&w));
    let psi = AffinePsi::new(data, h, scale);
    let eye = DMatrix::<f64>::identity(n, n);
    let mut v = Vec::with_capacity(4 * m);
    for _ in 0..4 {
        pack(&eye, &mut v);
    }

    let floor = CERT_PD_MARGIN;
    let mut f_best = f64::INFINITY;
    let mut delta = 1e-2;
    let mut stall = 0;
    let mut grad = vec![0.0; psi.basis.len()];
    for it in 0..budget {
        let current = psi.eval(&v);
        let (f, u) = top_eig(&current);
        if !f.is_finite() {
            return None;
        }
        if f <= PSI_TOL {
            if let Some(cert) = validate(data, h, psi.variables(&v), CertStage::Subgradient, it) {
                return Some(cert);
            }
        }
        if f < f_best - 1e-12 {
            f_best = f;
            stall = 0;
        } else {
            stall += 1;
            if stall > 50 {
                delta *= 0.5;
                stall = 0;
            }
        }
        for (gk, bk) in grad.iter_mut().zip(&psi.basis) {
            *gk = (bk * &u).dot(&u);
        }
        let g2: f64 = grad.iter().map(|g| g * g).sum();
        if g2 == 0.0 {
            return None;
        }
        let target = f_best.min(0.0) - delta;
        let step = (f - target) / g2;
        for (vk, gk) in v.iter_mut().zip(&grad) {
            *vk -= step * gk;
        }
        let mut projected = Vec::with_capacity(v.len());
        for slot in 0..4 {
            let mat = unpack(&v[slot * m..(slot + 1) * m], n);
            pack(&project_floor(&mat, floor), &mut projected);
        }
        v = projected;
    }
    let current = psi.eval(&v);
    if lambda_max(&current) <= PSI_TOL {
        return validate(data, h, psi.variables(&v), CertStage::Subgradient, budget);
    }
    None
}

#[derive(Debug, Clone)]
pub struct MaxH {
    pub h_star: f64,
    pub certificate: Option<SampledCert>,
    pub diagnostic: Option<String>,
}

/// Largest certified `h` in `[0, h_hi]` by bisection to resolution `tol`.
/// Certified feasibility is assumed monotone in `h`.
pub fn max_h(
    data: &PsiData,
    y: Option<&DMatrix<f64>>,
    h_hi: f64,
    tol: f64,
    opts: SearchOptions,
) -> Result<MaxH> {
    if !(tol > 0.0 && h_hi > tol) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < tol < h_hi, got tol = {tol}, h_hi = {h_hi}"
        )));
    }
    let Some(mut best) = feasibility_search(data, y, tol, opts)? else {
        return Ok(MaxH {
            h_star: 0.0,
            certificate: None,
            diagnostic: Some(format!("no certificate found at h = {tol}")),
        });
    };
    if let Some(cert) = feasibility_search(data, y, h_hi, opts)? {
        return Ok(MaxH {
            h_star: h_hi,
            certificate: Some(cert),
            diagnostic: Some("upper end of the bracket is certified".into()),
        });
    }
    let (mut lo, mut hi) = (tol, h_hi);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        match feasibility_search(data, y, mid, opts)? {
            Some(cert) => {
                lo = mid;
                best = cert;
            }
            None => hi = mid,
        }
    }
    Ok(MaxH {
        h_star: lo,
        certificate: Some(best),
        diagnostic: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modal::PlantParams;

    fn unit_data(sigma: f64) -> PsiData {
        let one = DMatrix::from_element(1, 1, 1.0);
        PsiData {
            n: 1,
            a: one.clone(),
            b: one.clone(),
            c: one.clone(),
            k: one.clone(),
            l: one.clone(),
            x: one,
            gamma: 1.0,
            sigma,
        }
    }

    fn unit_vars() -> LmiVariables {
        let one = DMatrix::from_element(1, 1, 1.0);
        LmiVariables {
            pz: one.clone(),
            pe: one.clone(),
            wz: one.clone(),
            we: one,
        }
    }

    #[test]
    fn scalar_hand_expansion() {
        // N = 1, every matrix 1, h = 0, sigma = 0: A - BK = 0, Ae = A - LC = 0
        let psi = assemble_psi(&unit_data(0.0), 0.0, &unit_vars()).unwrap();
        let q = PI * PI / 4.0;
        #[rustfmt::skip]
        let expected = DMatrix::from_row_slice(7, 7, &[
            1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
            0.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0,
            0.0, 1.0, -1.0, 0.0, 0.0, 0.0, 0.0,
            0.0, 1.0, 0.0, 1.0 - q, 1.0, 0.0, 0.0,
            0.0, 1.0, 0.0, 1.0, 1.0 - q, 0.0, 0.0,
            0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0,
            0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0,
        ]);
        assert!((psi - expected).norm() < 1e-15);
    }

    #[test]
    fn sizes() {
        let sys = ModalSystem::unchecked(PlantParams::new(0.08, 0.2, 0.0).unwrap(), 3);
        let gains = ControllerGains {
            k: DMatrix::from_element(1, 3, 0.3),
            l: DMatrix::from_element(3, 1, 0.2),
            x: DMatrix::identity(3, 3),
            y: None,
            gamma: 0.3,
            sigma: 0.2,
        };
        let data = PsiData::new(&sys, &gains).unwrap();
        let mut vars = unit_vars();
        assert!(assemble_psi(&data, 0.1, &vars).is_err());
        vars = LmiVariables::from_array(std::array::from_fn(|_| DMatrix::identity(3, 3)));
        let psi = assemble_psi(&data, 0.1, &vars).unwrap();
        assert_eq!(psi.nrows(), 22);
        assert_eq!((&psi - psi.transpose()).norm(), 0.0);
        let mut data0 = data.clone();
        data0.sigma = 0.0;
        assert_eq!(assemble_psi(&data0, 0.1, &vars).unwrap().nrows(), 19);
        assert!(assemble_psi(&data, -0.1, &vars).is_err());
    }

    #[test]
    fn zero_h_decouples_slack_blocks() {
        let data = unit_data(0.3);
        let psi = assemble_psi(&data, 0.0, &unit_vars()).unwrap();
        let n = psi.nrows();
        for row in 0..n - 2 {
            assert_eq!(psi[(row, n - 2)], 0.0);
            assert_eq!(psi[(row, n - 1)], 0.0);
        }
    }

    #[test]
    fn sym_pack_round_trip() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 5.0, 3.0, 5.0, 6.0]);
        let mut v = Vec::new();
        pack(&m, &mut v);
        assert_eq!(unpack(&v, 3), m);
        assert_eq!(sym_unit(3, 1)[(1, 0)], 1.0);
    }

    #[test]
    fn grid_endpoints() {
        let g = log_grid(60);
        assert!((g[0] - 1e-3).abs() < 1e-15);
        assert!((g[59] / 1e6 - 1.0).abs() < 1e-12);
    }
}
