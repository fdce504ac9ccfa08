//! Declarative scenario configuration (TOML, versioned schema).
//!
//! Unknown keys are rejected everywhere, and each scenario rejects knobs it
//! does not consume — a silently ignored physics parameter is how
//! reproducibility dies. See the README for the full schema.

use photodetect::dressed::DetectorResponse;
use photodetect::models::CircuitSpec;
use serde::Deserialize;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub version: u32,
    pub model: ModelConfig,
    #[serde(default)]
    pub response: ResponseConfig,
    pub scenario: ScenarioBlock,
    #[serde(default)]
    pub convergence: ConvergenceConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(rename = "type")]
    pub kind: String,
    pub omega0: Option<f64>,
    pub omega_a: Option<f64>,
    pub g: Option<f64>,
    pub n_fock: Option<usize>,
    pub modes: Option<Vec<photodetect::models::CircuitMode>>,
    pub qubits: Option<Vec<photodetect::models::CircuitQubit>>,
    pub couplings: Option<Vec<photodetect::models::InternalCoupling>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResponseConfig {
    pub kind: String,
    pub chi0: Option<f64>,
    pub omega_ref: Option<f64>,
    pub points: Option<Vec<[f64; 2]>>,
}

impl Default for ResponseConfig {
    fn default() -> Self {
        Self {
            kind: "flat".into(),
            chi0: Some(1.0),
            omega_ref: None,
            points: None,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioBlock {
    pub name: String,
    pub states: Option<usize>,
    pub initial: Option<usize>,
    pub eta: Option<f64>,
    pub detector_coupling: Option<f64>,
    pub g_grid: Option<GridConfig>,
    pub omega_d_grid: Option<GridConfig>,
    pub t_grid: Option<GridConfig>,
    pub absorbers: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GridScale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default)]
    pub scale: GridScale,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum GridConfig {
    Explicit(Vec<f64>),
    Range(RangeGrid),
}

impl GridConfig {
    pub fn expand(&self, what: &str) -> Result<Vec<f64>, CliError> {
        let grid = match self {
            GridConfig::Explicit(values) => values.clone(),
            GridConfig::Range(range) => {
                if range.count < 2 {
                    return Err(CliError::Config(format!(
                        "scenario.{what}: a range grid needs count >= 2"
                    )));
                }
                if !range.start.is_finite()
                    || !range.stop.is_finite()
                    || range.stop <= range.start
                {
                    return Err(CliError::Config(format!(
                        "scenario.{what}: need finite stop > start"
                    )));
                }
                match range.scale {
                    GridScale::Linear => {
                        let step = (range.stop - range.start) / (range.count - 1) as f64;
                        (0..range.count)
                            .map(|i| range.start + step * i as f64)
                            .collect()
                    }
                    GridScale::Log => {
                        if range.start <= 0.0 {
                            return Err(CliError::Config(format!(
                                "scenario.{what}: a log grid needs start > 0"
                            )));
                        }
                        let ratio = range.stop / range.start;
                        (0..range.count)
                            .map(|i| {
                                range.start * ratio.powf(i as f64 / (range.count - 1) as f64)
                            })
                            .collect()
                    }
                }
            }
        };
        if grid.is_empty() {
            return Err(CliError::Config(format!("scenario.{what}: empty grid")));
        }
        if grid.iter().any(|x| !x.is_finite()) {
            return Err(CliError::Config(format!(
                "scenario.{what}: non-finite grid value"
            )));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::Config(format!(
                "scenario.{what}: grid must be strictly increasing"
            )));
        }
        Ok(grid)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceConfig {
    pub levels: usize,
    pub tol: f64,
    pub max_dim: usize,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            levels: 6,
            tol: 1e-8,
            max_dim: 4096,
        }
    }
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub save_eigensystem: bool,
}

/// The model block reduced to one of the supported families.
#[derive(Debug, Clone)]
pub enum ModelSpec {
    Rabi {
        omega0: f64,
        omega_a: f64,
        g: f64,
        n_fock: usize,
    },
    Jc {
        omega0: f64,
        omega_a: f64,
        g: f64,
        n_fock: usize,
    },
    Circuit(CircuitSpec),
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: ScenarioConfig = toml::from_str(text)
            .map_err(|e| CliError::Config(format!("config parse error: {e}")))?;
        if config.version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "config version {} unsupported (expected {SCHEMA_VERSION})",
                config.version
            )));
        }
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), CliError> {
        self.model_spec()?;
        self.detector_response()?;
        self.check_scenario_keys()?;
        if self.convergence.levels == 0 {
            return Err(CliError::Config("convergence.levels must be positive".into()));
        }
        if !self.convergence.tol.is_finite() || self.convergence.tol <= 0.0 {
            return Err(CliError::Config("convergence.tol must be positive".into()));
        }
        Ok(())
    }

    pub fn model_spec(&self) -> Result<ModelSpec, CliError> {
        let m = &self.model;
        let single = |kind: &str| -> Result<(f64, f64, f64, usize), CliError> {
            let mut missing = Vec::new();
            if m.omega0.is_none() {
                missing.push("model.omega0");
            }
            if m.omega_a.is_none() {
                missing.push("model.omega_a");
            }
            if m.g.is_none() {
                missing.push("model.g");
            }
            if m.n_fock.is_none() {
                missing.push("model.n_fock");
            }
            if !missing.is_empty() {
                return Err(CliError::Config(format!(
                    "model type '{kind}' requires {}",
                    missing.join(", ")
                )));
            }
            let mut stray = Vec::new();
            if m.modes.is_some() {
                stray.push("model.modes");
            }
            if m.qubits.is_some() {
                stray.push("model.qubits");
            }
            if m.couplings.is_some() {
                stray.push("model.couplings");
            }
            if !stray.is_empty() {
                return Err(CliError::Config(format!(
                    "model type '{kind}' does not take {}",
                    stray.join(", ")
                )));
            }
            Ok((
                m.omega0.unwrap(),
                m.omega_a.unwrap(),
                m.g.unwrap(),
                m.n_fock.unwrap(),
            ))
        };
        match m.kind.as_str() {
            "rabi" => {
                let (omega0, omega_a, g, n_fock) = single("rabi")?;
                Ok(ModelSpec::Rabi {
                    omega0,
                    omega_a,
                    g,
                    n_fock,
                })
            }
            "jc" => {
                let (omega0, omega_a, g, n_fock) = single("jc")?;
                Ok(ModelSpec::Jc {
                    omega0,
                    omega_a,
                    g,
                    n_fock,
                })
            }
            "circuit" => {
                let mut stray = Vec::new();
                for (set, key) in [
                    (m.omega0.is_some(), "model.omega0"),
                    (m.omega_a.is_some(), "model.omega_a"),
                    (m.g.is_some(), "model.g"),
                    (m.n_fock.is_some(), "model.n_fock"),
                ] {
                    if set {
                        stray.push(key);
                    }
                }
                if !stray.is_empty() {
                    return Err(CliError::Config(format!(
                        "model type 'circuit' does not take {}",
                        stray.join(", ")
                    )));
                }
                let modes = m.modes.clone().ok_or_else(|| {
                    CliError::Config("model type 'circuit' requires model.modes".into())
                })?;
                Ok(ModelSpec::Circuit(CircuitSpec {
                    modes,
                    qubits: m.qubits.clone().unwrap_or_default(),
                    couplings: m.couplings.clone().unwrap_or_default(),
                }))
            }
            other => Err(CliError::Config(format!(
                "unknown model type '{other}' (expected rabi, jc or circuit)"
            ))),
        }
    }

    pub fn detector_response(&self) -> Result<DetectorResponse, CliError> {
        let r = &self.response;
        let bad = |msg: String| CliError::Config(format!("response: {msg}"));
        match r.kind.as_str() {
            "flat" => {
                if r.omega_ref.is_some() || r.points.is_some() {
                    return Err(bad("'flat' takes only chi0".into()));
                }
                DetectorResponse::flat(r.chi0.unwrap_or(1.0)).map_err(|e| bad(e.to_string()))
            }
            "ohmic" => {
                if r.points.is_some() {
                    return Err(bad("'ohmic' takes chi0 and omega_ref".into()));
                }
                let omega_ref = r
                    .omega_ref
                    .ok_or_else(|| bad("'ohmic' requires omega_ref".into()))?;
                DetectorResponse::ohmic(r.chi0.unwrap_or(1.0), omega_ref)
                    .map_err(|e| bad(e.to_string()))
            }
            "tabulated" => {
                if r.chi0.is_some() || r.omega_ref.is_some() {
                    return Err(bad("'tabulated' takes only points".into()));
                }
                let points = r
                    .points
                    .clone()
                    .ok_or_else(|| bad("'tabulated' requires points".into()))?;
                DetectorResponse::tabulated(points.into_iter().map(|[w, c]| (w, c)).collect())
                    .map_err(|e| bad(e.to_string()))
            }
            other => Err(bad(format!(
                "unknown kind '{other}' (expected flat, ohmic or tabulated)"
            ))),
        }
    }

    /// Reject scenario knobs that the named scenario does not consume.
    fn check_scenario_keys(&self) -> Result<(), CliError> {
        let s = &self.scenario;
        let name = s.name.as_str();
        let allowed: &[&str] = match name {
            "ground-test" => &["states"],
            "sweep" => &["g_grid", "states"],
            "narrowband" => &["initial", "detector_coupling", "omega_d_grid", "eta"],
            "shorttime" => &["initial", "t_grid", "absorbers", "eta"],
            "jc-vs-rabi" => &["initial", "t_grid", "absorbers"],
            "spectrum-check" => &[],
            other => {
                return Err(CliError::Config(format!(
                    "unknown scenario name '{other}'"
                )))
            }
        };
        let mut offending = Vec::new();
        for (set, key) in [
            (s.states.is_some(), "states"),
            (s.initial.is_some(), "initial"),
            (s.eta.is_some(), "eta"),
            (s.detector_coupling.is_some(), "detector_coupling"),
            (s.g_grid.is_some(), "g_grid"),
            (s.omega_d_grid.is_some(), "omega_d_grid"),
            (s.t_grid.is_some(), "t_grid"),
            (s.absorbers.is_some(), "absorbers"),
        ] {
            if set && !allowed.contains(&key) {
                offending.push(format!("scenario.{key}"));
            }
        }
        if !offending.is_empty() {
            return Err(CliError::Config(format!(
                "scenario '{name}' does not consume {}",
                offending.join(", ")
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_grid_expansion() {
        let grid = GridConfig::Range(RangeGrid {
            start: 0.0,
            stop: 1.0,
            count: 5,
            scale: GridScale::Linear,
        })
        .expand("g_grid")
        .unwrap();
        assert_eq!(grid, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn log_grid_expansion() {
        let grid = GridConfig::Range(RangeGrid {
            start: 1e-3,
            stop: 1e-1,
            count: 3,
            scale: GridScale::Log,
        })
        .expand("t_grid")
        .unwrap();
        assert!((grid[0] - 1e-3).abs() < 1e-18);
        assert!((grid[1] - 1e-2).abs() < 1e-16);
        assert!((grid[2] - 1e-1).abs() < 1e-15);
    }

    #[test]
    fn grid_validation() {
        let bad = GridConfig::Range(RangeGrid {
            start: 0.0,
            stop: 1.0,
            count: 3,
            scale: GridScale::Log,
        });
        assert!(bad.expand("t_grid").is_err(), "log grids need start > 0");

        let bad = GridConfig::Range(RangeGrid {
            start: 1.0,
            stop: 1.0,
            count: 3,
            scale: GridScale::Linear,
        });
        assert!(bad.expand("g_grid").is_err(), "need stop > start");

        let bad = GridConfig::Explicit(vec![0.5, 0.5, 1.0]);
        assert!(bad.expand("g_grid").is_err(), "strictly increasing");

        let bad = GridConfig::Explicit(vec![]);
        assert!(bad.expand("g_grid").is_err(), "non-empty");
    }

    #[test]
    fn grid_parses_both_toml_forms() {
        #[derive(serde::Deserialize)]
        struct Holder {
            grid: GridConfig,
        }
        let explicit: Holder = toml::from_str("grid = [0.1, 0.2]").unwrap();
        assert_eq!(explicit.grid.expand("x").unwrap(), vec![0.1, 0.2]);
        let ranged: Holder =
            toml::from_str(r#"grid = { start = 0.0, stop = 1.0, count = 2 }"#).unwrap();
        assert_eq!(ranged.grid.expand("x").unwrap(), vec![0.0, 1.0]);
        let logged: Holder =
            toml::from_str(r#"grid = { start = 1.0, stop = 4.0, count = 3, scale = "log" }"#)
                .unwrap();
        assert_eq!(logged.grid.expand("x").unwrap(), vec![1.0, 2.0, 4.0]);
    }
}
