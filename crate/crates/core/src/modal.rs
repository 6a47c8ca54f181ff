//! Spectral data of the Neumann Laplacian on `[0, pi]` and the truncated
//! `N`-mode state-space model.

use std::f64::consts::{FRAC_2_PI, PI};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Reaction coefficient, Lipschitz bound of the nonlinearity and the decay
/// rate to enforce.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantParams {
    pub q: f64,
    pub sigma: f64,
    #[serde(default)]
    pub alpha: f64,
}

impl PlantParams {
    pub fn new(q: f64, sigma: f64, alpha: f64) -> Result<Self> {
        let p = Self { q, sigma, alpha };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q.is_finite() && self.q > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "q must be > 0, got {}",
                self.q
            )));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sigma must be >= 0, got {}",
                self.sigma
            )));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be >= 0, got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    /// Reaction coefficient seen by the design, `q + alpha`.
    pub fn effective_q(&self) -> f64 {
        self.q + self.alpha
    }
}

/// `lambda_n = n^2`.
pub fn eigenvalue(n: usize) -> f64 {
    (n * n) as f64
}

/// `phi_n(pi)`: `1/sqrt(pi)` for `n = 0`, `(-1)^n sqrt(2/pi)` otherwise.
pub fn input_coefficient(n: usize) -> f64 {
    if n == 0 {
        1.0 / PI.sqrt()
    } else if n.is_multiple_of(2) {
        FRAC_2_PI.sqrt()
    } else {
        -FRAC_2_PI.sqrt()
    }
}

/// `phi_n(0)`: `1/sqrt(pi)` for `n = 0`, `sqrt(2/pi)` otherwise.
pub fn output_coefficient(n: usize) -> f64 {
    if n == 0 {
        1.0 / PI.sqrt()
    } else {
        FRAC_2_PI.sqrt()
    }
}

/// Normalized eigenfunction `phi_n(x)` on `[0, pi]`.
pub fn eval_eigenfunction(n: usize, x: f64) -> Result<f64> {
    if !(0.0..=PI).contains(&x) {
        return Err(Error::PositionOutOfRange(x));
    }
    Ok(eigenfunction_unchecked(n, x))
}

pub(crate) fn eigenfunction_unchecked(n: usize, x: f64) -> f64 {
    if n == 0 {
        1.0 / PI.sqrt()
    } else {
        FRAC_2_PI.sqrt() * (n as f64 * x).cos()
    }
}

/// Smallest `N` with `N^2 > q + alpha + sigma`.
pub fn min_modes(params: &PlantParams) -> usize {
    let bound = params.effective_q() + params.sigma;
    let mut n = bound.max(0.0).sqrt().floor() as usize;
    while eigenvalue(n) <= bound {
        n += 1;
    }
    while n > 1 && eigenvalue(n - 1) > bound {
        n -= 1;
    }
    n.max(1)
}

/// Truncated plant `dz^N/dt = A z^N + B u + F`, `y = C z^N + zeta`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalSystem {
    pub params: PlantParams,
    pub n: usize,
    pub lambda: DVector<f64>,
    pub b: DVector<f64>,
    pub c: DVector<f64>,
    /// `diag{q + alpha - lambda_n}`
    pub a: DMatrix<f64>,
    /// `N x 1`
    pub b_mat: DMatrix<f64>,
    /// `1 x N`
    pub c_mat: DMatrix<f64>,
}

impl ModalSystem {
    /// Builds the `N`-mode model. The decay rate is folded into the reaction
    /// coefficient here, so every consumer sees only `q + alpha`.
    pub fn new(params: PlantParams, n: usize) -> Result<Self> {
        params.validate()?;
        let bound = params.effective_q() + params.sigma;
        if n == 0 || eigenvalue(n) <= bound {
            return Err(Error::ModeCondition {
                n_squared: eigenvalue(n),
                bound,
            });
        }
        Ok(Self::assemble(params, n))
    }

    /// Same model without the mode-count check. Used for the reduced reaction
    /// coefficient inside the sampled-data LMI and for the Gramian
    /// construction, where fewer modes than `min_modes` are intentional.
    pub fn unchecked(params: PlantParams, n: usize) -> Self {
        Self::assemble(params, n)
    }

    fn assemble(params: PlantParams, n: usize) -> Self {
        let q = params.effective_q();
        let lambda = DVector::from_fn(n, |i, _| eigenvalue(i));
        let b = DVector::from_fn(n, |i, _| input_coefficient(i));
        let c = DVector::from_fn(n, |i, _| output_coefficient(i));
        let a = DMatrix::from_diagonal(&lambda.map(|l| q - l));
        let b_mat = DMatrix::from_column_slice(n, 1, b.as_slice());
        let c_mat = DMatrix::from_row_slice(1, n, c.as_slice());
        Self {
            params,
            n,
            lambda,
            b,
            c,
            a,
            b_mat,
            c_mat,
        }
    }

    pub fn effective_q(&self) -> f64 {
        self.params.effective_q()
    }

    pub fn sigma(&self) -> f64 {
        self.params.sigma
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(q: f64, sigma: f64) -> PlantParams {
        PlantParams::new(q, sigma, 0.0).unwrap()
    }

    #[test]
    fn min_modes_examples() {
        assert_eq!(min_modes(&params(1.1, 0.0)), 2);
        assert_eq!(min_modes(&params(0.1, 0.2)), 1);
        assert_eq!(min_modes(&params(8.9, 0.2)), 4);
        // exactly on an eigenvalue the strict inequality pushes to the next mode
        assert_eq!(min_modes(&params(4.0, 0.0)), 3);
    }

    #[test]
    fn min_modes_matches_enumeration() {
        for i in 0..400 {
            let q = 0.05 + i as f64 * 0.123;
            let p = params(q, 0.07 * (i % 5) as f64);
            let brute = (1..).find(|n| (n * n) as f64 > q + p.sigma).unwrap();
            assert_eq!(min_modes(&p), brute, "q = {q}");
        }
    }

    #[test]
    fn one_mode_system() {
        let sys = ModalSystem::new(params(0.1, 0.0), 1).unwrap();
        let r = 1.0 / PI.sqrt();
        assert!((sys.a[(0, 0)] - 0.1).abs() < 1e-15);
        assert!((sys.b_mat[(0, 0)] - r).abs() < 1e-15);
        assert!((sys.c_mat[(0, 0)] - r).abs() < 1e-15);
    }

    #[test]
    fn two_mode_system() {
        let sys = ModalSystem::new(params(0.1, 0.0), 2).unwrap();
        assert!((sys.a[(0, 0)] - 0.1).abs() < 1e-15);
        assert!((sys.a[(1, 1)] + 0.9).abs() < 1e-15);
        assert_eq!(sys.a[(0, 1)], 0.0);
        assert!((sys.b[0] - 1.0 / PI.sqrt()).abs() < 1e-15);
        assert!((sys.b[1] + (2.0 / PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rejects_too_few_modes() {
        assert!(matches!(
            ModalSystem::new(params(1.1, 0.0), 1),
            Err(Error::ModeCondition { .. })
        ));
        assert!(ModalSystem::new(params(0.1, 0.0), 0).is_err());
    }

    #[test]
    fn decay_rate_folds_into_q() {
        let sys = ModalSystem::new(PlantParams::new(0.1, 0.0, 0.05).unwrap(), 3).unwrap();
        for i in 0..3 {
            assert!((sys.a[(i, i)] - (0.15 - (i * i) as f64)).abs() < 1e-15);
        }
        // strictly decreasing diagonal
        assert!(sys.a[(0, 0)] > sys.a[(1, 1)] && sys.a[(1, 1)] > sys.a[(2, 2)]);
    }

    #[test]
    fn eigenfunction_values() {
        assert!((eval_eigenfunction(0, 1.0).unwrap() - 0.564_189_583_547_756).abs() < 1e-12);
        assert!((eval_eigenfunction(3, 0.0).unwrap() - 0.797_884_560_802_865_4).abs() < 1e-12);
        assert!((eval_eigenfunction(2, PI / 2.0).unwrap() + (2.0 / PI).sqrt()).abs() < 1e-12);
        assert!(eval_eigenfunction(1, -0.1).is_err());
        assert!(eval_eigenfunction(1, 3.2).is_err());
    }

    #[test]
    fn boundary_values_are_coefficients() {
        for n in 0..30 {
            assert_eq!(eval_eigenfunction(n, 0.0).unwrap(), output_coefficient(n));
            assert!((eval_eigenfunction(n, PI).unwrap() - input_coefficient(n)).abs() < 1e-13);
        }
    }

    #[test]
    fn orthonormal_on_dct_grid() {
        // 512-point trapezoid with half-weighted endpoints
        let p = 512;
        let h = PI / (p - 1) as f64;
        let xs: Vec<f64> = (0..p).map(|j| j as f64 * h).collect();
        for m in 0..=20 {
            for n in 0..=20 {
                let s: f64 = xs
                    .iter()
                    .enumerate()
                    .map(|(j, &x)| {
                        let w = if j == 0 || j == p - 1 { 0.5 * h } else { h };
                        w * eigenfunction_unchecked(m, x) * eigenfunction_unchecked(n, x)
                    })
                    .sum();
                let expected = if m == n { 1.0 } else { 0.0 };
                assert!((s - expected).abs() < 1e-10, "m={m} n={n} s={s}");
            }
        }
    }
}
