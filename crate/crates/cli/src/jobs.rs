//! Fully resolved commands. A `Job` holds every parameter that affects the
//! output, so executing the same job twice gives byte-identical artifacts.

use std::ops::RangeInclusive;
use std::path::PathBuf;

use heatctl::lmi::{max_h, CertStage, PsiData, SearchOptions, DEFAULT_BUDGET, DEFAULT_GRID_POINTS};
use heatctl::modal::{min_modes, ModalSystem, PlantParams};
use heatctl::residue_gain::gamma;
use heatctl::riccati::SemidefiniteMode;
use heatctl::sim::{simulate_closed_loop, simulate_open_loop, SimConfig, SimTrace};
use heatctl::synthesis::{gamma_curve, sigma_table, synthesize_with, DEFAULT_SIGMA_TOL};
use heatctl::GainMethod;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::args::{Command, DesignArgs, PlantArgs, SimArgs, TableKind};
use crate::config::{parse_ic, ConfigFile};
use crate::error::CliError;
use crate::format::{
    csv, json_matrix, json_number, json_text, Cell, GAIN_DIGITS, MATRIX_DIGITS,
};

pub const DEFAULT_H_HI: f64 = 1.0;
pub const DEFAULT_LMI_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plant {
    pub q: f64,
    pub sigma: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Design {
    #[serde(rename = "N")]
    pub n: usize,
    pub method: GainMethod,
    pub strict: bool,
}

impl Design {
    fn mode(&self) -> SemidefiniteMode {
        if self.strict {
            SemidefiniteMode::Strict
        } else {
            SemidefiniteMode::AllowLinear
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Job {
    Gamma {
        plant: Plant,
        design: Design,
        out: Option<PathBuf>,
    },
    Synthesize {
        plant: Plant,
        design: Design,
        out: Option<PathBuf>,
    },
    SigmaTable {
        q: f64,
        #[serde(rename = "N-max")]
        n_max: usize,
        tol: f64,
        out: Option<PathBuf>,
    },
    GammaCurve {
        q: f64,
        sigma: f64,
        #[serde(rename = "N-min")]
        n_min: usize,
        #[serde(rename = "N-max")]
        n_max: usize,
        out: Option<PathBuf>,
    },
    Simulate {
        plant: Plant,
        design: Design,
        sim: SimConfig,
        out: Option<PathBuf>,
        snapshot_out: Option<PathBuf>,
    },
    MaxH {
        plant: Plant,
        design: Design,
        q_lmi: f64,
        tol: f64,
        h_hi: f64,
        budget: usize,
        out: Option<PathBuf>,
    },
}

/// One output; `path = None` goes to standard output.
#[derive(Debug)]
pub struct Artifact {
    pub path: Option<PathBuf>,
    pub text: String,
}

#[derive(Debug, Default)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub warnings: Vec<String>,
}

fn require<T>(name: &str, value: Option<T>) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Input(format!("missing required parameter --{name}")))
}

fn plant(args: &PlantArgs, file: &ConfigFile) -> Result<Plant, CliError> {
    let p = Plant {
        q: require("q", args.q.or(file.plant.q))?,
        sigma: args.sigma.or(file.plant.sigma).unwrap_or(0.0),
        alpha: args.alpha.or(file.plant.alpha).unwrap_or(0.0),
    };
    for (name, v) in [("q", p.q), ("sigma", p.sigma), ("alpha", p.alpha)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(CliError::Input(format!("--{name} must be finite and >= 0, got {v}")));
        }
    }
    Ok(p)
}

fn design(args: &DesignArgs, file: &ConfigFile) -> Result<Design, CliError> {
    Ok(Design {
        n: require("N", args.n.or(file.design.n))?,
        method: args.method.or(file.design.method).unwrap_or_default(),
        strict: args.strict || file.design.strict.unwrap_or(false),
    })
}

fn sim_config(args: &SimArgs, file: &ConfigFile) -> Result<SimConfig, CliError> {
    let s = &file.sim;
    let d = SimConfig::default();
    let ic = match args.ic.as_deref().or(s.ic.as_deref()) {
        Some(text) => parse_ic(text)?,
        None => d.ic.clone(),
    };
    Ok(SimConfig {
        modes: args.m.or(s.m).unwrap_or(d.modes),
        dt: args.dt.or(s.dt).unwrap_or(d.dt),
        horizon: args.t.or(s.t).unwrap_or(d.horizon),
        h: args.h.or(s.h).unwrap_or(d.h),
        quad_points: args.p.or(s.p).unwrap_or(d.quad_points),
        ic,
        snapshot_times: args.snapshots.clone().or_else(|| s.snapshots.clone()).unwrap_or_default(),
        record_modes: false,
        open_loop: args.open_loop || s.open_loop.unwrap_or(false),
    })
}

impl Job {
    pub fn resolve(command: Command, file: &ConfigFile) -> Result<Self, CliError> {
        let out_or = |out: Option<PathBuf>| out.or_else(|| file.output.out.clone());
        Ok(match command {
            Command::Gamma { plant: p, design: d, out } => Job::Gamma {
                plant: plant(&p, file)?,
                design: design(&d, file)?,
                out: out_or(out.out),
            },
            Command::Synthesize { plant: p, design: d, out } => Job::Synthesize {
                plant: plant(&p, file)?,
                design: design(&d, file)?,
                out: out_or(out.out),
            },
            Command::Tables { kind: TableKind::SigmaTable { q, n_max, tol, out } } => {
                Job::SigmaTable {
                    q: require("q", q.or(file.plant.q))?,
                    n_max: require("N-max", n_max.or(file.tables.n_max))?,
                    tol: tol.or(file.tables.tol).unwrap_or(DEFAULT_SIGMA_TOL),
                    out: out_or(out.out),
                }
            }
            Command::Tables { kind: TableKind::GammaCurve { q, sigma, n_min, n_max, out } } => {
                let q = require("q", q.or(file.plant.q))?;
                let sigma = sigma.or(file.plant.sigma).unwrap_or(0.0);
                let first = PlantParams::new(q, sigma, 0.0).map(|p| min_modes(&p))?;
                Job::GammaCurve {
                    q,
                    sigma,
                    n_min: n_min.or(file.tables.n_min).unwrap_or(first),
                    n_max: require("N-max", n_max.or(file.tables.n_max))?,
                    out: out_or(out.out),
                }
            }
            Command::Simulate { plant: p, design: d, sim, out, snapshot_out } => Job::Simulate {
                plant: plant(&p, file)?,
                design: design(&d, file)?,
                sim: sim_config(&sim, file)?,
                out: out_or(out.out),
                snapshot_out: snapshot_out.or_else(|| file.output.snapshot_out.clone()),
            },
            Command::MaxH { plant: p, design: d, q_lmi, tol, h_hi, budget, out } => {
                let l = &file.lmi;
                Job::MaxH {
                    plant: plant(&p, file)?,
                    design: design(&d, file)?,
                    q_lmi: require("q-lmi", q_lmi.or(l.q_lmi))?,
                    tol: tol.or(l.tol).unwrap_or(DEFAULT_LMI_TOL),
                    h_hi: h_hi.or(l.h_hi).unwrap_or(DEFAULT_H_HI),
                    budget: budget.or(l.budget).unwrap_or(DEFAULT_BUDGET),
                    out: out_or(out.out),
                }
            }
            Command::Replay { .. } => unreachable!("replay is handled by the caller"),
        })
    }

    pub fn execute(&self, threads: usize) -> Result<Outcome, CliError> {
        match self {
            Job::Gamma { plant, design, out } => run_gamma(plant, design, out),
            Job::Synthesize { plant, design, out } => run_synthesize(plant, design, out),
            Job::SigmaTable { q, n_max, tol, out } => {
                let rows = sigma_table(*q, *n_max, *tol, threads)?;
                let text = csv(
                    &["N", "sigma_max", "gamma"],
                    rows.iter()
                        .map(|r| vec![Cell::Int(r.n), Cell::Real(r.sigma), Cell::Real(r.gamma)]),
                );
                let warnings = rows.iter().filter_map(|r| r.diagnostic.clone()).collect();
                Ok(Outcome { artifacts: vec![Artifact { path: out.clone(), text }], warnings })
            }
            Job::GammaCurve { q, sigma, n_min, n_max, out } => {
                let rows = gamma_curve(*q, *sigma, RangeInclusive::new(*n_min, *n_max))?;
                let text = csv(
                    &["N", "gamma_harmonic", "gamma_sobolev", "ratio"],
                    rows.iter().map(|r| {
                        vec![
                            Cell::Int(r.n),
                            Cell::Real(r.harmonic),
                            Cell::Real(r.sobolev),
                            Cell::Real(r.ratio()),
                        ]
                    }),
                );
                Ok(single(out, text))
            }
            Job::Simulate { plant, design, sim, out, snapshot_out } => {
                run_simulate(plant, design, sim, out, snapshot_out)
            }
            Job::MaxH { plant, design, q_lmi, tol, h_hi, budget, out } => {
                let search = LmiSearch { q_lmi: *q_lmi, tol: *tol, h_hi: *h_hi, budget: *budget };
                run_max_h(plant, design, &search, threads, out)
            }
        }
    }
}

fn single(out: &Option<PathBuf>, text: String) -> Outcome {
    Outcome {
        artifacts: vec![Artifact { path: out.clone(), text }],
        warnings: Vec::new(),
    }
}

fn params(plant: &Plant) -> Result<PlantParams, CliError> {
    Ok(PlantParams::new(plant.q, plant.sigma, plant.alpha)?)
}

fn run_gamma(plant: &Plant, design: &Design, out: &Option<PathBuf>) -> Result<Outcome, CliError> {
    let g = gamma(design.method, plant.q + plant.alpha, plant.sigma, design.n)?;
    let value = json!({
        "method": design.method,
        "q": plant.q,
        "sigma": plant.sigma,
        "alpha": plant.alpha,
        "N": design.n,
        "gamma": json_number(g.gamma, GAIN_DIGITS),
        "mu_rule": {
            "form": "mu_n = scale * (n^2 + shift), n >= N",
            "scale": json_number(g.mu.scale, GAIN_DIGITS),
            "shift": json_number(g.mu.shift, GAIN_DIGITS),
        },
    });
    Ok(single(out, json_text(&value)))
}

fn matrix_or_null(m: &Option<nalgebra::DMatrix<f64>>) -> Value {
    m.as_ref().map(json_matrix).unwrap_or(Value::Null)
}

fn run_synthesize(
    plant: &Plant,
    design: &Design,
    out: &Option<PathBuf>,
) -> Result<Outcome, CliError> {
    let report = synthesize_with(params(plant)?, design.n, design.method, design.mode())?;
    let r = &report.result;
    let value = json!({
        "method": design.method,
        "q": plant.q,
        "sigma": plant.sigma,
        "alpha": plant.alpha,
        "N": design.n,
        "feasible": report.feasible(),
        "reason": serde_json::to_value(&r.reason).expect("reason serializes"),
        "gamma": json_number(report.gain.gamma, GAIN_DIGITS),
        "rho_xz": r.rho_xz.map(|v| json_number(v, MATRIX_DIGITS)),
        "M_constant": report.stability_constant().map(|v| json_number(v, MATRIX_DIGITS)),
        "K": matrix_or_null(&r.k),
        "L": matrix_or_null(&r.l),
        "X": matrix_or_null(&r.x),
        "Z": matrix_or_null(&r.z),
        "Y": matrix_or_null(&r.y),
    });
    Ok(single(out, json_text(&value)))
}

fn trace_csv(trace: &SimTrace) -> String {
    let mut header = vec!["t", "state_norm", "err_norm", "u", "y", "zeta"];
    if trace.v.is_some() {
        header.push("V");
    }
    let rows = (0..trace.len()).map(|i| {
        let mut row = vec![
            Cell::Real(trace.t[i]),
            Cell::Real(trace.state_norm[i]),
            Cell::Real(trace.err_norm[i]),
            Cell::Real(trace.u[i]),
            Cell::Real(trace.y[i]),
            Cell::Real(trace.zeta[i]),
        ];
        if let Some(v) = &trace.v {
            row.push(Cell::Real(v[i]));
        }
        row
    });
    csv(&header, rows)
}

fn snapshot_csv(trace: &SimTrace) -> String {
    let rows = trace.snapshots.iter().flat_map(|s| {
        trace
            .snapshot_x
            .iter()
            .zip(&s.values)
            .map(move |(&x, &v)| vec![Cell::Real(x), Cell::Real(s.t), Cell::Real(v)])
    });
    csv(&["x", "t", "value"], rows)
}

fn run_simulate(
    plant: &Plant,
    design: &Design,
    sim: &SimConfig,
    out: &Option<PathBuf>,
    snapshot_out: &Option<PathBuf>,
) -> Result<Outcome, CliError> {
    if !sim.snapshot_times.is_empty() && snapshot_out.is_none() {
        return Err(CliError::Input("snapshots requested without --snapshot-out".into()));
    }
    let p = params(plant)?;
    let trace = if sim.open_loop {
        simulate_open_loop(p, design.n, sim)?
    } else {
        let report = synthesize_with(p, design.n, design.method, design.mode())?;
        if let Some(reason) = report.reason() {
            return Err(CliError::Input(format!(
                "design is infeasible ({}); nothing to simulate",
                reason.code()
            )));
        }
        simulate_closed_loop(&ModalSystem::new(p, design.n)?, &report.result, sim)?
    };
    let mut artifacts = vec![Artifact { path: out.clone(), text: trace_csv(&trace) }];
    if let Some(path) = snapshot_out {
        artifacts.push(Artifact { path: Some(path.clone()), text: snapshot_csv(&trace) });
    }
    Ok(Outcome { artifacts, warnings: Vec::new() })
}

struct LmiSearch {
    q_lmi: f64,
    tol: f64,
    h_hi: f64,
    budget: usize,
}

fn run_max_h(
    plant: &Plant,
    design: &Design,
    search: &LmiSearch,
    threads: usize,
    out: &Option<PathBuf>,
) -> Result<Outcome, CliError> {
    let q_lmi = search.q_lmi;
    if !(q_lmi.is_finite() && q_lmi >= 0.0) {
        return Err(CliError::Input(format!("--q-lmi must be >= 0, got {q_lmi}")));
    }
    let mut warnings = Vec::new();
    if q_lmi >= plant.q {
        warnings.push(format!(
            "q-lmi = {q_lmi} is not below q = {}; the sampled-data certificate needs q-lmi < q",
            plant.q
        ));
    }
    let report = synthesize_with(params(plant)?, design.n, design.method, design.mode())?;
    let (h_star, certificate, diagnostic) = match report.result.controller() {
        None => (
            0.0,
            Value::Null,
            Some(format!(
                "design is infeasible ({})",
                report.reason().map(|r| r.code()).unwrap_or("unknown")
            )),
        ),
        Some(gains) => {
            let reduced = ModalSystem::unchecked(
                PlantParams { q: q_lmi, sigma: plant.sigma, alpha: plant.alpha },
                design.n,
            );
            let data = PsiData::new(&reduced, &gains)?;
            let opts = SearchOptions {
                budget: search.budget,
                grid_points: DEFAULT_GRID_POINTS,
                threads,
            };
            let res = max_h(&data, gains.y.as_ref(), search.h_hi, search.tol, opts)?;
            let cert = res.certificate.as_ref().map(|c| {
                json!({
                    "h": json_number(c.h, GAIN_DIGITS),
                    "lambda_max": json_number(c.lambda_max, GAIN_DIGITS),
                    "stage": match c.stage {
                        CertStage::WarmStart => "warm-start",
                        CertStage::Subgradient => "subgradient",
                    },
                    "iterations": c.iterations,
                    "psi_size": data.psi_size(),
                })
            });
            (res.h_star, cert.unwrap_or(Value::Null), res.diagnostic)
        }
    };
    let value = json!({
        "q": plant.q,
        "q_lmi": q_lmi,
        "sigma": plant.sigma,
        "alpha": plant.alpha,
        "N": design.n,
        "method": design.method,
        "tol": search.tol,
        "h_hi": search.h_hi,
        "h_star": json_number(h_star, GAIN_DIGITS),
        "certificate": certificate,
        "diagnostic": diagnostic,
        "warnings": warnings,
    });
    Ok(Outcome {
        artifacts: vec![Artifact { path: out.clone(), text: json_text(&value) }],
        warnings,
    })
}
