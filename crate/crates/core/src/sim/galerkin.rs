//! Cosine-basis Galerkin machinery on the uniform grid `x_j = j pi / (P-1)`
//! with half-weighted endpoints. On this grid the trapezoid rule keeps the
//! first `P - 1` eigenfunctions exactly orthonormal.

use std::f64::consts::PI;

use crate::modal::{eigenfunction_unchecked, eval_eigenfunction};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct Grid {
    pub modes: usize,
    pub points: usize,
    pub xs: Vec<f64>,
    pub weights: Vec<f64>,
    /// Mirror pairs `(j, P-1-j)` with `j < half`.
    half: usize,
    /// `phi[n * half + j] = phi_n(x_j)`, left half only; the right half
    /// follows from `phi_n(pi - x) = (-1)^n phi_n(x)`.
    phi: Vec<f64>,
    /// `phi_n` at the centre point when `P` is odd.
    centre: Option<Vec<f64>>,
}

impl Grid {
    /// Requires `points >= 2 * modes`.
    pub fn new(modes: usize, points: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidParameter("need at least one mode".into()));
        }
        if points < 2 * modes {
            return Err(Error::Aliasing {
                points,
                needed: 2 * modes,
            });
        }
        let step = PI / (points - 1) as f64;
        let xs: Vec<f64> = (0..points).map(|j| j as f64 * step).collect();
        let weights: Vec<f64> = (0..points)
            .map(|j| if j == 0 || j == points - 1 { 0.5 * step } else { step })
            .collect();
        let half = points / 2;
        let mut phi = Vec::with_capacity(modes * half);
        for n in 0..modes {
            phi.extend(xs[..half].iter().map(|&x| eigenfunction_unchecked(n, x)));
        }
        let centre = (points % 2 == 1)
            .then(|| (0..modes).map(|n| eigenfunction_unchecked(n, xs[half])).collect());
        Ok(Self {
            modes,
            points,
            xs,
            weights,
            half,
            phi,
            centre,
        })
    }

    fn row(&self, n: usize) -> &[f64] {
        &self.phi[n * self.half..(n + 1) * self.half]
    }

    /// Field values on the grid from modal coefficients. `out` must hold
    /// `points` values; its second half is used as scratch.
    pub fn reconstruct_into(&self, coeffs: &[f64], out: &mut [f64]) {
        let half = self.half;
        let (even, rest) = out.split_at_mut(half);
        let skip = rest.len() - half;
        let odd = &mut rest[skip..];
        even.fill(0.0);
        odd.fill(0.0);
        for (n, &a) in coeffs.iter().enumerate().take(self.modes) {
            if a != 0.0 {
                let acc = if n % 2 == 0 { &mut *even } else { &mut *odd };
                for (o, p) in acc.iter_mut().zip(self.row(n)) {
                    *o += a * p;
                }
            }
        }
        let centre = self.centre.as_ref().map(|c| {
            coeffs
                .iter()
                .zip(c)
                .take(self.modes)
                .map(|(a, p)| a * p)
                .sum::<f64>()
        });
        // odd[half-1-j] holds the odd sum at x_j; write mirrored values in place
        odd.reverse();
        for j in 0..half {
            let (e, o) = (even[j], odd[half - 1 - j]);
            even[j] = e + o;
            odd[half - 1 - j] = e - o;
        }
        if let Some(c) = centre {
            out[half] = c;
        }
    }

    /// Modal coefficients of grid values `g`; `scratch` holds `points` values.
    pub fn project_into(&self, g: &[f64], scratch: &mut [f64], out: &mut [f64]) {
        let half = self.half;
        let p = self.points;
        let (sym, rest) = scratch.split_at_mut(half);
        let anti = &mut rest[..half];
        for j in 0..half {
            let a = g[j] * self.weights[j];
            let b = g[p - 1 - j] * self.weights[p - 1 - j];
            sym[j] = a + b;
            anti[j] = a - b;
        }
        let centre_w = self.centre.as_ref().map(|_| g[half] * self.weights[half]);
        for (n, o) in out.iter_mut().enumerate().take(self.modes) {
            let src = if n % 2 == 0 { &*sym } else { &*anti };
            *o = dot(self.row(n), src);
            if let (Some(c), Some(w)) = (self.centre.as_ref(), centre_w) {
                *o += c[n] * w;
            }
        }
    }

    pub fn project(&self, g: &[f64]) -> Vec<f64> {
        let mut scratch = vec![0.0; self.points];
        let mut out = vec![0.0; self.modes];
        self.project_into(g, &mut scratch, &mut out);
        out
    }

    pub fn reconstruct(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.points];
        self.reconstruct_into(coeffs, &mut out);
        out
    }

    /// Discrete `L2` norm of grid values.
    pub fn norm(&self, g: &[f64]) -> f64 {
        g.iter()
            .zip(&self.weights)
            .map(|(v, w)| w * v * v)
            .sum::<f64>()
            .sqrt()
    }
}

/// Dot product with independent lanes so the loop vectorizes.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    const LANES: usize = 8;
    let mut acc = [0.0; LANES];
    let chunks = a.len() / LANES;
    for c in 0..chunks {
        let (x, y) = (&a[c * LANES..(c + 1) * LANES], &b[c * LANES..(c + 1) * LANES]);
        for l in 0..LANES {
            acc[l] += x[l] * y[l];
        }
    }
    let mut total: f64 = acc.iter().sum();
    for i in chunks * LANES..a.len() {
        total += a[i] * b[i];
    }
    total
}

/// `f(z) = sigma z / (1 + sigma |z|)`
pub fn saturation(sigma: f64, z: f64) -> f64 {
    sigma * z / (1.0 + sigma * z.abs())
}

/// Projection of `f(z(x))` onto the modes, evaluated on the grid.
pub fn nonlinearity_modal(grid: &Grid, coeffs: &[f64], sigma: f64) -> Vec<f64> {
    let mut field = grid.reconstruct(coeffs);
    for v in field.iter_mut() {
        *v = saturation(sigma, *v);
    }
    grid.project(&field)
}

/// Truncated series `sum_n coeffs[n] phi_n(x)` at each position.
pub fn reconstruct_field(coeffs: &[f64], xs: &[f64]) -> Result<Vec<f64>> {
    xs.iter()
        .map(|&x| {
            coeffs
                .iter()
                .enumerate()
                .map(|(n, &a)| eval_eigenfunction(n, x).map(|p| a * p))
                .sum()
        })
        .collect()
}
