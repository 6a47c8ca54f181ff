//! Input-to-residue L² gain `gamma` of the neglected modes `n >= N`.
//!
//! The residue `zeta = sqrt(2/pi) * sum_{n>=N} z_n` is bounded through the
//! weighted inequality `(sum z_n)^2 <= sum mu_n z_n^2`, which holds for every
//! summable sequence exactly when `sum 1/mu_n <= 1`. Choosing the largest
//! admissible weights `mu_n = gamma (pi/2) (n^2 - q - sigma)` and the smallest
//! `gamma` meeting the harmonic condition gives
//!
//! ```text
//! gamma = (2/pi) sum_{n>=N} 1/(n^2 - q - sigma)
//! ```
//!
//! which has a closed form through the partial-fraction expansion of the
//! cotangent. The Sobolev baseline fixes the weights' shape instead and is
//! strictly more conservative.

use std::f64::consts::{FRAC_2_PI, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Distance to an integer below which the cotangent form is abandoned for
/// the series.
pub const SINGULARITY_THRESHOLD: f64 = 1e-6;

/// Terms summed by the series fallback near removable singularities.
pub const FALLBACK_TERMS: usize = 10_000_000;

/// Default length of the series oracle.
pub const DEFAULT_SERIES_TERMS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum GainMethod {
    #[default]
    Harmonic,
    Sobolev,
}

impl fmt::Display for GainMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GainMethod::Harmonic => f.write_str("harmonic"),
            GainMethod::Sobolev => f.write_str("sobolev"),
        }
    }
}

impl FromStr for GainMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "harmonic" => Ok(GainMethod::Harmonic),
            "sobolev" => Ok(GainMethod::Sobolev),
            other => Err(Error::InvalidParameter(format!(
                "unknown gain method '{other}'"
            ))),
        }
    }
}

/// Weights of the form `mu_n = scale * (n^2 + shift)` for `n >= N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuRule {
    pub scale: f64,
    pub shift: f64,
}

impl MuRule {
    pub fn mu(&self, n: usize) -> f64 {
        self.scale * ((n * n) as f64 + self.shift)
    }
}

/// Rigorous bracket `[lower, upper]` around an infinite series, built from a
/// partial sum plus integral bounds on the discarded tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesEnclosure {
    pub partial: f64,
    pub lower: f64,
    pub upper: f64,
}

impl SeriesEnclosure {
    pub fn estimate(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn contains(&self, value: f64, slack: f64) -> bool {
        value >= self.lower - slack && value <= self.upper + slack
    }

    fn scaled(self, factor: f64) -> Self {
        Self {
            partial: self.partial * factor,
            lower: self.lower * factor,
            upper: self.upper * factor,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GainBreakdown {
    pub gamma: f64,
    pub method: GainMethod,
    pub mu: MuRule,
    /// First residual mode index.
    pub n: usize,
    pub q: f64,
    pub sigma: f64,
}

impl GainBreakdown {
    pub fn mu(&self, n: usize) -> f64 {
        self.mu.mu(n)
    }

    /// Enclosure of `sum_{n>=N} 1/mu_n` using `terms` explicit terms.
    pub fn harmonic_sum(&self, terms: usize) -> SeriesEnclosure {
        reciprocal_quadratic_sum(self.mu.shift, self.n, terms).scaled(1.0 / self.mu.scale)
    }
}

/// `(sum z)^2 <= sum mu z^2`.
pub fn harmonic_bound_holds(z: &[f64], mu: &[f64]) -> Result<bool> {
    if z.len() != mu.len() {
        return Err(Error::DimensionMismatch(format!(
            "z has {} entries, mu has {}",
            z.len(),
            mu.len()
        )));
    }
    check_weights(mu)?;
    let s: f64 = z.iter().sum();
    let weighted: f64 = z.iter().zip(mu).map(|(zi, mi)| mi * zi * zi).sum();
    Ok(s * s <= weighted)
}

/// `sum 1/mu <= 1`.
pub fn check_harmonic_condition(mu: &[f64]) -> Result<bool> {
    check_weights(mu)?;
    Ok(mu.iter().map(|m| 1.0 / m).sum::<f64>() <= 1.0)
}

fn check_weights(mu: &[f64]) -> Result<()> {
    match mu.iter().position(|m| !(*m > 0.0)) {
        Some(index) => Err(Error::NonPositiveWeight {
            index,
            value: mu[index],
        }),
        None => Ok(()),
    }
}

fn check_modes(q: f64, sigma: f64, n: usize) -> Result<()> {
    let bound = q + sigma;
    if !(q.is_finite() && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("q = {q}, sigma = {sigma}")));
    }
    if n == 0 || ((n * n) as f64) <= bound {
        return Err(Error::ModeCondition {
            n_squared: (n * n) as f64,
            bound,
        });
    }
    Ok(())
}

/// `int_a^inf dx / (x^2 + shift)` for `a^2 + shift > 0`, `a > 0`.
fn tail_integral(shift: f64, a: f64) -> f64 {
    if shift < 0.0 {
        let d = (-shift).sqrt();
        (2.0 * d / (a - d)).ln_1p() / (2.0 * d)
    } else if shift == 0.0 {
        1.0 / a
    } else {
        let e = shift.sqrt();
        (e / a).atan() / e
    }
}

/// Enclosure of `sum_{n>=from} 1/(n^2 + shift)` from `terms` explicit terms.
/// Requires `from^2 + shift > 0`.
fn reciprocal_quadratic_sum(shift: f64, from: usize, terms: usize) -> SeriesEnclosure {
    let end = from + terms;
    // smallest terms first
    let partial: f64 = (from..end)
        .rev()
        .map(|n| 1.0 / ((n * n) as f64 + shift))
        .sum();
    let lower = partial + tail_integral(shift, end as f64);
    let upper = partial + tail_integral(shift, (end - 1) as f64);
    SeriesEnclosure {
        partial,
        lower,
        upper,
    }
}

/// Partial sum of `(2/pi) sum_{n=N}^{N+terms-1} 1/(n^2 - q - sigma)` with the
/// integral enclosure of the tail.
pub fn gamma_harmonic_series(
    q: f64,
    sigma: f64,
    n: usize,
    terms: usize,
) -> Result<SeriesEnclosure> {
    check_modes(q, sigma, n)?;
    if terms == 0 {
        return Err(Error::InvalidParameter(
            "series needs at least one term".into(),
        ));
    }
    Ok(reciprocal_quadratic_sum(-(q + sigma), n, terms).scaled(FRAC_2_PI))
}

/// `(1 - x cot x) / x^2`, accurate near `x = 0`.
fn one_minus_x_cot_x_over_x2(x: f64) -> f64 {
    if x.abs() < 0.1 {
        let x2 = x * x;
        // 2^{2k} |B_{2k}| / (2k)! coefficients
        1.0 / 3.0
            + x2 * (1.0 / 45.0 + x2 * (2.0 / 945.0 + x2 * (1.0 / 4725.0 + x2 * (2.0 / 93555.0))))
    } else {
        (1.0 - x / x.tan()) / (x * x)
    }
}

/// Cotangent closed form evaluated around `m = round(d)`, `e = d - m`. With
/// `pi cot(pi e) = 1/e - pi^2 e f(pi e)` the pole of the cotangent and the
/// `k = m` term of the finite sum cancel exactly, leaving `1/(d (d + m))`.
fn closed_form(s: f64, d: f64, n: usize) -> f64 {
    let m = d.round();
    let e = d - m;
    let mi = m as usize;
    let tail = PI * PI * e * one_minus_x_cot_x_over_x2(PI * e);
    let (head, skip) = if mi == 0 {
        (PI * PI * one_minus_x_cot_x_over_x2(PI * d), None)
    } else if mi < n {
        ((1.0 + d * tail) / s + 1.0 / (d * (d + m)), Some(mi))
    } else {
        ((1.0 - d * (1.0 / e - tail)) / s, None)
    };
    let finite: f64 = (1..n)
        .filter(|&k| Some(k) != skip)
        .map(|k| 1.0 / (s - (k * k) as f64))
        .sum();
    (head + 2.0 * finite) / PI
}

/// Closed-form harmonic gain.
pub fn gamma_harmonic(q: f64, sigma: f64, n: usize) -> Result<GainBreakdown> {
    check_modes(q, sigma, n)?;
    let s = q + sigma;
    let d = s.sqrt();
    let gamma = if (d - d.round()).abs() < SINGULARITY_THRESHOLD {
        gamma_harmonic_series(q, sigma, n, FALLBACK_TERMS)?.estimate()
    } else {
        // gamma = (1/pi) [ (1 - pi d cot(pi d)) / d^2 + 2 sum_{k<N} 1/(d^2 - k^2) ]
        closed_form(s, d, n)
    };
    Ok(GainBreakdown {
        gamma,
        method: GainMethod::Harmonic,
        mu: MuRule {
            scale: gamma * PI / 2.0,
            shift: -s,
        },
        n,
        q,
        sigma,
    })
}

/// Sobolev-inequality baseline `gamma = (2N + 1/pi) / (N^2 - q - sigma)` with
/// `Gamma = sqrt(lambda_N) = N`.
pub fn gamma_sobolev(q: f64, sigma: f64, n: usize) -> Result<GainBreakdown> {
    check_modes(q, sigma, n)?;
    let nf = n as f64;
    let big_gamma = nf;
    let gamma = (2.0 * nf + 1.0 / PI) / (nf * nf - q - sigma);
    // mu_n = (pi/2)(1/pi + Gamma + n^2/Gamma)
    Ok(GainBreakdown {
        gamma,
        method: GainMethod::Sobolev,
        mu: MuRule {
            scale: PI / (2.0 * big_gamma),
            shift: big_gamma * big_gamma + big_gamma / PI,
        },
        n,
        q,
        sigma,
    })
}

pub fn gamma(method: GainMethod, q: f64, sigma: f64, n: usize) -> Result<GainBreakdown> {
    match method {
        GainMethod::Harmonic => gamma_harmonic(q, sigma, n),
        GainMethod::Sobolev => gamma_sobolev(q, sigma, n),
    }
}
