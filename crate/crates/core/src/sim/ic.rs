use std::f64::consts::{FRAC_2_PI, PI};

use serde::{Deserialize, Serialize};

use super::galerkin::Grid;
use crate::modal::eigenfunction_unchecked;
use crate::{Error, Result};

/// Initial temperature profile on `[0, pi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialCondition {
    /// `x^3 - (3 pi / 2) x^2`, which satisfies both Neumann conditions.
    #[default]
    Cubic,
    Constant { value: f64 },
    Eigenfunction { n: usize },
    /// Samples at increasing positions covering `[0, pi]`, linearly interpolated.
    Samples { xs: Vec<f64>, values: Vec<f64> },
}

impl InitialCondition {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            InitialCondition::Cubic => x * x * x - 1.5 * PI * x * x,
            InitialCondition::Constant { value } => *value,
            InitialCondition::Eigenfunction { n } => eigenfunction_unchecked(*n, x),
            InitialCondition::Samples { xs, values } => interpolate(xs, values, x),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let InitialCondition::Samples { xs, values } = self {
            if xs.len() != values.len() || xs.len() < 2 {
                return Err(Error::DimensionMismatch(format!(
                    "{} sample positions and {} values",
                    xs.len(),
                    values.len()
                )));
            }
            if xs.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::InvalidParameter(
                    "sample positions must be strictly increasing".into(),
                ));
            }
            let tol = 1e-9;
            if xs[0] > tol || xs[xs.len() - 1] < PI - tol {
                return Err(Error::InvalidParameter(
                    "samples must cover [0, pi]".into(),
                ));
            }
            if let Some(v) = values.iter().find(|v| !v.is_finite()) {
                return Err(Error::NonFinite(*v));
            }
        }
        Ok(())
    }
}

fn interpolate(xs: &[f64], values: &[f64], x: f64) -> f64 {
    let i = xs.partition_point(|&p| p <= x).clamp(1, xs.len() - 1);
    let (x0, x1) = (xs[i - 1], xs[i]);
    let t = ((x - x0) / (x1 - x0)).clamp(0.0, 1.0);
    values[i - 1] + t * (values[i] - values[i - 1])
}

/// Fourier coefficients `z_n(0)`, `n < modes`, by trapezoid quadrature on
/// `points` grid points.
pub fn project_ic(ic: &InitialCondition, modes: usize, points: usize) -> Result<Vec<f64>> {
    ic.validate()?;
    let grid = Grid::new(modes, points)?;
    let samples: Vec<f64> = grid.xs.iter().map(|&x| ic.eval(x)).collect();
    Ok(grid.project(&samples))
}

/// Exact coefficients of the cubic profile.
pub fn cubic_coefficients(modes: usize) -> Vec<f64> {
    (0..modes)
        .map(|n| {
            if n == 0 {
                -PI.powi(4) / 4.0 / PI.sqrt()
            } else {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                FRAC_2_PI.sqrt() * (-6.0 * (sign - 1.0) / (n as f64).powi(4))
            }
        })
        .collect()
}
