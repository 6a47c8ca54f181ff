//! TOML configuration file. Sections group the keys; each key carries the
//! name of the flag it stands in for, and flags win over file values.

use std::path::{Path, PathBuf};

use heatctl::sim::InitialCondition;
use heatctl::GainMethod;
use serde::Deserialize;

use crate::error::CliError;

pub const CONFIG_HELP: &str = "\
Config file (--config FILE, TOML). Flags override file values.

  [plant]   q, sigma, alpha
  [design]  N, method (\"harmonic\" | \"sobolev\"), strict
  [sim]     M, dt, T, h, P, ic, snapshots (list of times), open-loop
  [lmi]     q-lmi, tol, h-hi, budget
  [tables]  N-min, N-max, tol
  [output]  out, snapshot-out

The ic value uses the --ic syntax: \"cubic\", \"constant:<value>\",
\"eigen:<n>\" or \"samples:<csv file with x,value rows>\".

Environment: HEATCTL_THREADS caps internal parallelism.
Exit codes: 0 computed (possibly infeasible), 1 replay mismatch,
2 invalid input, 3 I/O failure.";

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub plant: PlantSection,
    pub design: DesignSection,
    pub sim: SimSection,
    pub lmi: LmiSection,
    pub tables: TablesSection,
    pub output: OutputSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantSection {
    pub q: Option<f64>,
    pub sigma: Option<f64>,
    pub alpha: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignSection {
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub method: Option<GainMethod>,
    pub strict: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    #[serde(rename = "M")]
    pub m: Option<usize>,
    pub dt: Option<f64>,
    #[serde(rename = "T")]
    pub t: Option<f64>,
    pub h: Option<f64>,
    #[serde(rename = "P")]
    pub p: Option<usize>,
    pub ic: Option<String>,
    pub snapshots: Option<Vec<f64>>,
    #[serde(rename = "open-loop")]
    pub open_loop: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct LmiSection {
    pub q_lmi: Option<f64>,
    pub tol: Option<f64>,
    pub h_hi: Option<f64>,
    pub budget: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TablesSection {
    #[serde(rename = "N-min")]
    pub n_min: Option<usize>,
    #[serde(rename = "N-max")]
    pub n_max: Option<usize>,
    pub tol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct OutputSection {
    pub out: Option<PathBuf>,
    pub snapshot_out: Option<PathBuf>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text)
            .map_err(|e| CliError::Input(format!("config {}: {e}", path.display())))
    }
}

/// Parses the `--ic` syntax. Sample files are read here so that the resolved
/// condition is self-contained.
pub fn parse_ic(text: &str) -> Result<InitialCondition, CliError> {
    let bad = || CliError::Input(format!("unrecognised initial condition '{text}'"));
    let (kind, arg) = text.split_once(':').unwrap_or((text, ""));
    let ic = match kind {
        "cubic" if arg.is_empty() => InitialCondition::Cubic,
        "constant" => InitialCondition::Constant {
            value: arg.parse().map_err(|_| bad())?,
        },
        "eigen" => InitialCondition::Eigenfunction {
            n: arg.parse().map_err(|_| bad())?,
        },
        "samples" => read_samples(Path::new(arg))?,
        _ => return Err(bad()),
    };
    ic.validate()?;
    Ok(ic)
}

fn read_samples(path: &Path) -> Result<InitialCondition, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let (mut xs, mut values) = (Vec::new(), Vec::new());
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parsed: Option<(f64, f64)> = line
            .split_once(',')
            .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)));
        match parsed {
            Some((x, v)) => {
                xs.push(x);
                values.push(v);
            }
            // a header row is allowed
            None if i == 0 => {}
            None => {
                return Err(CliError::Input(format!(
                    "{}: line {} is not an x,value pair",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    Ok(InitialCondition::Samples { xs, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ic_syntax() {
        assert_eq!(parse_ic("cubic").unwrap(), InitialCondition::Cubic);
        assert_eq!(parse_ic("eigen:5").unwrap(), InitialCondition::Eigenfunction { n: 5 });
        assert_eq!(
            parse_ic("constant:-1.5").unwrap(),
            InitialCondition::Constant { value: -1.5 }
        );
        assert!(parse_ic("square").is_err());
        assert!(parse_ic("eigen:x").is_err());
    }

    #[test]
    fn sections_parse() {
        let c: ConfigFile = toml::from_str(
            "[plant]\nq = 0.1\n[design]\nN = 3\nmethod = \"sobolev\"\n[sim]\nT = 1.0\nopen-loop = true\n[lmi]\nq-lmi = 0.08\n",
        )
        .unwrap();
        assert_eq!(c.plant.q, Some(0.1));
        assert_eq!(c.design.n, Some(3));
        assert_eq!(c.design.method, Some(GainMethod::Sobolev));
        assert_eq!(c.sim.t, Some(1.0));
        assert_eq!(c.sim.open_loop, Some(true));
        assert_eq!(c.lmi.q_lmi, Some(0.08));
        assert!(toml::from_str::<ConfigFile>("[plant]\nqq = 1\n").is_err());
    }
}
