//! Closed-loop simulation of the semilinear heat equation in `M` cosine modes
//! with the observer-based controller, under continuous or sample-and-hold
//! input. Time stepping is classical fourth-order Runge-Kutta with a fixed
//! step.

mod galerkin;
mod ic;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use galerkin::{nonlinearity_modal, reconstruct_field, saturation, Grid};
pub use ic::{cubic_coefficients, project_ic, InitialCondition};

use crate::modal::{eigenvalue, input_coefficient, output_coefficient, ModalSystem, PlantParams};
use crate::riccati::{ControllerGains, SynthesisResult};
use crate::{Error, Result};

/// Points of the snapshot grid on `[0, pi]`.
pub const SNAPSHOT_POINTS: usize = 101;
/// Upper bound on recorded rows, apart from the initial one.
pub const MAX_RECORDS: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Plant modes `M`.
    pub modes: usize,
    pub dt: f64,
    pub horizon: f64,
    /// Sampling period; 0 means continuous input.
    pub h: f64,
    pub quad_points: usize,
    pub ic: InitialCondition,
    pub snapshot_times: Vec<f64>,
    /// Keep per-mode coefficients of the plant and the observer.
    pub record_modes: bool,
    /// Force `u = 0`.
    pub open_loop: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            modes: 64,
            dt: 1e-4,
            horizon: 20.0,
            h: 0.0,
            quad_points: 512,
            ic: InitialCondition::Cubic,
            snapshot_times: Vec::new(),
            record_modes: false,
            open_loop: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.modes < 4 * n {
            return Err(Error::InvalidParameter(format!(
                "plant modes M = {} must be at least 4N = {}",
                self.modes,
                4 * n
            )));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be > 0, got {}", self.dt)));
        }
        let lambda = eigenvalue(self.modes - 1);
        if self.dt * lambda > 1.0 {
            return Err(Error::StabilityGuard {
                dt: self.dt,
                lambda,
                product: self.dt * lambda,
            });
        }
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "horizon must be >= 0, got {}",
                self.horizon
            )));
        }
        if !(self.h == 0.0 || (self.h >= self.dt && self.h.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "h must be 0 or at least dt, got {}",
                self.h
            )));
        }
        if self.quad_points < 2 * self.modes {
            return Err(Error::Aliasing {
                points: self.quad_points,
                needed: 2 * self.modes,
            });
        }
        self.ic.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub t: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimTrace {
    /// Modes in the controller.
    pub n: usize,
    pub t: Vec<f64>,
    pub state_norm: Vec<f64>,
    pub err_norm: Vec<f64>,
    pub u: Vec<f64>,
    pub y: Vec<f64>,
    pub zeta: Vec<f64>,
    pub v: Option<Vec<f64>>,
    pub snapshot_x: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    /// Plant coefficients `z_0..z_{M-1}` per row.
    pub modes: Option<Vec<Vec<f64>>>,
    /// Observer state per row.
    pub estimates: Option<Vec<Vec<f64>>>,
}

impl SimTrace {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// Plant and controller data for one run.
struct Model {
    m: usize,
    n: usize,
    q: f64,
    sigma: f64,
    lambda: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    /// `A + gamma sigma X` of the observer
    a_obs: DMatrix<f64>,
    b_obs: DVector<f64>,
    c_obs: DVector<f64>,
    k: DVector<f64>,
    l: DVector<f64>,
    grid: Grid,
}

struct Scratch {
    field: Vec<f64>,
    weighted: Vec<f64>,
    f: Vec<f64>,
}

impl Model {
    fn control(&self, zhat: &[f64]) -> f64 {
        -zhat.iter().zip(self.k.iter()).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Time derivative of `(z, zhat)` packed as one vector.
    #[allow(clippy::needless_range_loop)]
    fn rhs(&self, s: &[f64], held: Option<f64>, scratch: &mut Scratch, out: &mut [f64]) {
        let (z, zhat) = s.split_at(self.m);
        let u = held.unwrap_or_else(|| self.control(zhat));
        if self.sigma > 0.0 {
            self.grid.reconstruct_into(z, &mut scratch.field);
            for v in scratch.field.iter_mut() {
                *v = saturation(self.sigma, *v);
            }
            self.grid
                .project_into(&scratch.field, &mut scratch.weighted, &mut scratch.f);
        }
        let (dz, dzhat) = out.split_at_mut(self.m);
        for i in 0..self.m {
            let f = if self.sigma > 0.0 { scratch.f[i] } else { 0.0 };
            dz[i] = -(self.lambda[i] - self.q) * z[i] + self.b[i] * u + f;
        }
        let y: f64 = z.iter().zip(&self.c).map(|(a, b)| a * b).sum();
        let cz: f64 = zhat.iter().zip(self.c_obs.iter()).map(|(a, b)| a * b).sum();
        let innovation = cz - y;
        for i in 0..self.n {
            let mut acc = self.b_obs[i] * u - self.l[i] * innovation;
            for j in 0..self.n {
                acc += self.a_obs[(i, j)] * zhat[j];
            }
            dzhat[i] = acc;
        }
    }
}

/// Runs the loop closed by a feasible design.
pub fn simulate_closed_loop(
    sys: &ModalSystem,
    design: &SynthesisResult,
    cfg: &SimConfig,
) -> Result<SimTrace> {
    let gains = design.controller().ok_or_else(|| {
        Error::InvalidParameter("cannot simulate an infeasible design".into())
    })?;
    run(sys, &gains, cfg)
}

/// Plant with zero input; the observer of `sys.n` modes stays at rest.
pub fn simulate_open_loop(params: PlantParams, n: usize, cfg: &SimConfig) -> Result<SimTrace> {
    let sys = ModalSystem::unchecked(params, n);
    let gains = ControllerGains {
        k: DMatrix::zeros(1, n),
        l: DMatrix::zeros(n, 1),
        x: DMatrix::zeros(n, n),
        y: None,
        gamma: 1.0,
        sigma: params.sigma,
    };
    let cfg = SimConfig {
        open_loop: true,
        ..cfg.clone()
    };
    run(&sys, &gains, &cfg)
}

fn run(sys: &ModalSystem, gains: &ControllerGains, cfg: &SimConfig) -> Result<SimTrace> {
    let n = sys.n;
    cfg.validate(n)?;
    let m = cfg.modes;
    let grid = Grid::new(m, cfg.quad_points)?;
    let gs = gains.gamma * gains.sigma;
    let zero_k = DVector::zeros(n);
    let model = Model {
        m,
        n,
        q: sys.params.q,
        sigma: sys.params.sigma,
        lambda: (0..m).map(eigenvalue).collect(),
        b: (0..m).map(input_coefficient).collect(),
        c: (0..m).map(output_coefficient).collect(),
        a_obs: &sys.a + &gains.x * gs,
        b_obs: sys.b.clone(),
        c_obs: sys.c.clone(),
        k: if cfg.open_loop {
            zero_k
        } else {
            gains.k.transpose().column(0).into_owned()
        },
        l: gains.l.column(0).into_owned(),
        grid,
    };

    let z0 = project_ic(&cfg.ic, m, cfg.quad_points)?;
    let mut state = vec![0.0; m + n];
    state[..m].copy_from_slice(&z0);

    let steps = (cfg.horizon / cfg.dt).round() as usize;
    let record_dt = cfg.dt.max(cfg.horizon / MAX_RECORDS as f64);
    let record_stride = ((record_dt / cfg.dt).round() as usize).max(1);
    let sample_stride = if cfg.h > 0.0 {
        Some(((cfg.h / cfg.dt).round() as usize).max(1))
    } else {
        None
    };
    let snapshot_steps: Vec<usize> = cfg
        .snapshot_times
        .iter()
        .map(|&t| ((t / cfg.dt).round() as usize).min(steps))
        .collect();
    let snapshot_x: Vec<f64> = (0..SNAPSHOT_POINTS)
        .map(|i| i as f64 * PI / (SNAPSHOT_POINTS - 1) as f64)
        .collect();
    // phi_n on the snapshot grid, row per mode
    let snap_phi: Vec<Vec<f64>> = (0..m)
        .map(|k| reconstruct_field(&unit(k, m), &snapshot_x))
        .collect::<Result<_>>()?;

    let mut recorder = Recorder::new(gains, n, cfg.record_modes, cfg.open_loop);
    let mut snapshots = Vec::new();
    let mut scratch = Scratch {
        field: vec![0.0; cfg.quad_points],
        weighted: vec![0.0; cfg.quad_points],
        f: vec![0.0; m],
    };
    let dim = m + n;
    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut tmp = vec![0.0; dim];
    let mut held: Option<f64> = None;

    for step in 0..=steps {
        let t = step as f64 * cfg.dt;
        if let Some(stride) = sample_stride {
            if step % stride == 0 {
                held = Some(model.control(&state[m..]));
            }
        }
        let u_now = held.unwrap_or_else(|| model.control(&state[m..]));
        if step % record_stride == 0 || step == steps {
            recorder.push(&model, t, &state, u_now);
        }
        for (i, &s) in snapshot_steps.iter().enumerate() {
            if s == step {
                let values = (0..SNAPSHOT_POINTS)
                    .map(|j| (0..m).map(|k| state[k] * snap_phi[k][j]).sum())
                    .collect();
                snapshots.push((i, Snapshot { t, values }));
            }
        }
        if step == steps {
            break;
        }

        let dt = cfg.dt;
        model.rhs(&state, held, &mut scratch, &mut k1);
        for i in 0..dim {
            tmp[i] = state[i] + 0.5 * dt * k1[i];
        }
        model.rhs(&tmp, held, &mut scratch, &mut k2);
        for i in 0..dim {
            tmp[i] = state[i] + 0.5 * dt * k2[i];
        }
        model.rhs(&tmp, held, &mut scratch, &mut k3);
        for i in 0..dim {
            tmp[i] = state[i] + dt * k3[i];
        }
        model.rhs(&tmp, held, &mut scratch, &mut k4);
        for i in 0..dim {
            state[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if state.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(t));
        }
    }
    snapshots.sort_by_key(|(i, _)| *i);
    Ok(recorder.finish(
        snapshot_x,
        snapshots.into_iter().map(|(_, s)| s).collect(),
    ))
}

fn unit(k: usize, m: usize) -> Vec<f64> {
    let mut v = vec![0.0; m];
    v[k] = 1.0;
    v
}

struct Recorder<'a> {
    gains: &'a ControllerGains,
    n: usize,
    lyapunov: bool,
    trace: SimTrace,
}

impl<'a> Recorder<'a> {
    fn new(gains: &'a ControllerGains, n: usize, record_modes: bool, open_loop: bool) -> Self {
        let lyapunov = !open_loop && gains.y.is_some();
        Self {
            gains,
            n,
            lyapunov,
            trace: SimTrace {
                n,
                t: Vec::new(),
                state_norm: Vec::new(),
                err_norm: Vec::new(),
                u: Vec::new(),
                y: Vec::new(),
                zeta: Vec::new(),
                v: lyapunov.then(Vec::new),
                snapshot_x: Vec::new(),
                snapshots: Vec::new(),
                modes: record_modes.then(Vec::new),
                estimates: record_modes.then(Vec::new),
            },
        }
    }

    fn push(&mut self, model: &Model, t: f64, state: &[f64], u: f64) {
        let (z, zhat) = state.split_at(model.m);
        let n = self.n;
        let tr = &mut self.trace;
        tr.t.push(t);
        tr.state_norm.push(z.iter().map(|v| v * v).sum::<f64>().sqrt());
        tr.err_norm.push(
            zhat.iter()
                .zip(z)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
        );
        tr.u.push(u);
        tr.y.push(z.iter().zip(&model.c).map(|(a, b)| a * b).sum());
        tr.zeta
            .push(z[n..].iter().zip(&model.c[n..]).map(|(a, b)| a * b).sum());
        if self.lyapunov {
            let y = self.gains.y.as_ref().expect("checked");
            let v = lyapunov_value(z, zhat, &self.gains.x, y, self.gains.gamma, n);
            tr.v.as_mut().expect("allocated").push(v);
        }
        if let Some(modes) = tr.modes.as_mut() {
            modes.push(z.to_vec());
        }
        if let Some(est) = tr.estimates.as_mut() {
            est.push(zhat.to_vec());
        }
    }

    fn finish(mut self, snapshot_x: Vec<f64>, snapshots: Vec<Snapshot>) -> SimTrace {
        self.trace.snapshot_x = snapshot_x;
        self.trace.snapshots = snapshots;
        self.trace
    }
}

/// `|z^N|_X^2 + |e^N|_Y^2 + gamma^-1 sum_{n>=N} z_n^2`
fn lyapunov_value(
    z: &[f64],
    zhat: &[f64],
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    gamma: f64,
    n: usize,
) -> f64 {
    let zn = DVector::from_column_slice(&z[..n]);
    let e = DVector::from_column_slice(zhat) - &zn;
    let tail: f64 = z[n..].iter().map(|v| v * v).sum();
    zn.dot(&(x * &zn)) + e.dot(&(y * &e)) + tail / gamma
}

/// Lyapunov function along a trace recorded with per-mode coefficients.
pub fn lyapunov_trace(
    trace: &SimTrace,
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    gamma: f64,
    n: usize,
) -> Result<Vec<f64>> {
    let (Some(modes), Some(est)) = (trace.modes.as_ref(), trace.estimates.as_ref()) else {
        return Err(Error::MissingModes);
    };
    if x.shape() != (n, n) || y.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "X is {:?}, Y is {:?}, N = {n}",
            x.shape(),
            y.shape()
        )));
    }
    modes
        .iter()
        .zip(est)
        .map(|(z, zhat)| {
            if zhat.len() != n || z.len() < n {
                return Err(Error::DimensionMismatch(format!(
                    "trace carries {} observer states, N = {n}",
                    zhat.len()
                )));
            }
            Ok(lyapunov_value(z, zhat, x, y, gamma, n))
        })
        .collect()
}
