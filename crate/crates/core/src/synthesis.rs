//! End-to-end design pipelines built on the gain, Riccati and modal modules.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::linalg::{is_positive_definite, sym_eigenvalues};
use crate::modal::{min_modes, ModalSystem, PlantParams};
use crate::parallel::par_map;
use crate::residue_gain::{gamma, gamma_harmonic, gamma_sobolev, GainBreakdown, GainMethod};
use crate::riccati::{synthesize_gains_with, Infeasibility, SemidefiniteMode, SynthesisResult};
use crate::{Error, Result};

/// Upper limit of the mode-count scan.
pub const N_SCAN_CAP: usize = 64;
pub const DEFAULT_SIGMA_TOL: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct FeasibilityReport {
    pub params: PlantParams,
    pub n: usize,
    pub method: GainMethod,
    pub gain: GainBreakdown,
    pub result: SynthesisResult,
}

impl FeasibilityReport {
    pub fn feasible(&self) -> bool {
        self.result.feasible()
    }

    pub fn reason(&self) -> Option<&Infeasibility> {
        self.result.reason.as_ref()
    }

    /// Decay constant `M = 2 c2 / c1`, when `X` and `Y` are positive definite.
    pub fn stability_constant(&self) -> Option<f64> {
        let x = self.result.x.as_ref()?;
        let y = self.result.y.as_ref()?;
        stability_constant(x, y, self.gain.gamma).ok()
    }
}

pub fn synthesize(params: PlantParams, n: usize, method: GainMethod) -> Result<FeasibilityReport> {
    synthesize_with(params, n, method, SemidefiniteMode::default())
}

pub fn synthesize_with(
    params: PlantParams,
    n: usize,
    method: GainMethod,
    mode: SemidefiniteMode,
) -> Result<FeasibilityReport> {
    let sys = ModalSystem::new(params, n)?;
    let gain = gamma(method, sys.effective_q(), params.sigma, n)?;
    let result = synthesize_gains_with(&sys, params.sigma, gain.gamma, mode)?;
    Ok(FeasibilityReport {
        params,
        n,
        method,
        gain,
        result,
    })
}

fn feasible_at(q: f64, sigma: f64, n: usize, method: GainMethod) -> bool {
    PlantParams::new(q, sigma, 0.0)
        .and_then(|p| synthesize(p, n, method))
        .map(|r| r.feasible())
        .unwrap_or(false)
}

#[derive(Debug, Clone, Serialize)]
pub struct SigmaSearch {
    pub n: usize,
    pub sigma: f64,
    pub gamma: f64,
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, Copy)]
pub struct SigmaOptions {
    pub tol: f64,
    pub method: GainMethod,
    /// Re-verify feasibility at interior points below the result.
    pub paranoid: bool,
}

impl Default for SigmaOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_SIGMA_TOL,
            method: GainMethod::Harmonic,
            paranoid: false,
        }
    }
}

pub fn max_sigma(q: f64, n: usize, tol: f64) -> Result<SigmaSearch> {
    max_sigma_with(
        q,
        n,
        SigmaOptions {
            tol,
            ..Default::default()
        },
    )
}

/// Bisection on `sigma` in `[0, N^2 - q)`, assuming feasibility is monotone
/// in `sigma`.
pub fn max_sigma_with(q: f64, n: usize, opts: SigmaOptions) -> Result<SigmaSearch> {
    let base = PlantParams::new(q, 0.0, 0.0)?;
    let bound = (n * n) as f64 - q;
    if n < min_modes(&base) {
        return Err(Error::ModeCondition {
            n_squared: (n * n) as f64,
            bound: q,
        });
    }
    let tol = opts.tol;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParameter(format!("tol must be > 0, got {tol}")));
    }
    let feasible = |s: f64| feasible_at(q, s, n, opts.method);
    let gamma_at = |s: f64| gamma(opts.method, q, s, n).map(|g| g.gamma);

    if tol >= bound || !feasible(tol) {
        return Ok(SigmaSearch {
            n,
            sigma: 0.0,
            gamma: gamma_at(0.0)?,
            diagnostic: Some(format!("infeasible already at sigma = {tol}")),
        });
    }
    let (mut lo, mut hi) = (tol, bound);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut diagnostic = None;
    if opts.paranoid {
        let bad: Vec<f64> = (1..=10)
            .map(|i| lo * i as f64 / 11.0)
            .filter(|&s| !feasible(s))
            .collect();
        if !bad.is_empty() {
            diagnostic = Some(format!(
                "feasibility not monotone: infeasible at sigma = {bad:?}"
            ));
        }
    }
    Ok(SigmaSearch {
        n,
        sigma: lo,
        gamma: gamma_at(lo)?,
        diagnostic,
    })
}

/// `max_sigma` for every `N` from the smallest admissible one to `n_max`.
pub fn sigma_table(q: f64, n_max: usize, tol: f64, threads: usize) -> Result<Vec<SigmaSearch>> {
    let first = min_modes(&PlantParams::new(q, 0.0, 0.0)?);
    let ns: Vec<usize> = (first..=n_max).collect();
    par_map(&ns, threads, |&n| max_sigma(q, n, tol)).into_iter().collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GammaCurveRow {
    pub n: usize,
    pub harmonic: f64,
    pub sobolev: f64,
}

impl GammaCurveRow {
    pub fn ratio(&self) -> f64 {
        self.sobolev / self.harmonic
    }
}

pub fn gamma_curve(
    q: f64,
    sigma: f64,
    ns: std::ops::RangeInclusive<usize>,
) -> Result<Vec<GammaCurveRow>> {
    ns.map(|n| {
        Ok(GammaCurveRow {
            n,
            harmonic: gamma_harmonic(q, sigma, n)?.gamma,
            sobolev: gamma_sobolev(q, sigma, n)?.gamma,
        })
    })
    .collect()
}

/// Smallest feasible `N`, scanning upward from the mode condition.
pub fn min_feasible_n(q: f64, sigma: f64, method: GainMethod) -> Result<usize> {
    let params = PlantParams::new(q, sigma, 0.0)?;
    (min_modes(&params)..=N_SCAN_CAP)
        .find(|&n| feasible_at(q, sigma, n, method))
        .ok_or(Error::ScanCapExceeded(N_SCAN_CAP))
}

/// `M = 2 c2 / c1` with `c1 = min(lambda_min X, lambda_min Y, 1/gamma)` and
/// `c2 = max(lambda_max X, lambda_max Y, 1/gamma)`.
pub fn stability_constant(x: &DMatrix<f64>, y: &DMatrix<f64>, gamma: f64) -> Result<f64> {
    if !is_positive_definite(x) {
        return Err(Error::NotPositiveDefinite("X"));
    }
    if !is_positive_definite(y) {
        return Err(Error::NotPositiveDefinite("Y"));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!("gamma must be > 0, got {gamma}")));
    }
    let ex = sym_eigenvalues(x);
    let ey = sym_eigenvalues(y);
    let g = 1.0 / gamma;
    let c1 = ex[0].min(ey[0]).min(g);
    let c2 = ex[ex.len() - 1].max(ey[ey.len() - 1]).max(g);
    Ok(2.0 * c2 / c1)
}
