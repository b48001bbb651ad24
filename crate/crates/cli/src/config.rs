use std::fs;
use std::path::Path;

use bjj_core::{linspace, PhotonMode, SystemParams, Tolerances};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// One figure recipe: system parameters plus the options of a single command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub params: SystemParams,
    #[serde(flatten)]
    pub command: Command,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "options", rename_all = "kebab-case")]
pub enum Command {
    Dynamics(DynamicsOptions),
    PhaseDiagram(PhaseDiagramOptions),
    GroundState(GroundStateOptions),
    Sweep(SweepOptions),
    Frequency(FrequencyOptions),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Dynamics(_) => "dynamics",
            Command::PhaseDiagram(_) => "phase-diagram",
            Command::GroundState(_) => "ground-state",
            Command::Sweep(_) => "sweep",
            Command::Frequency(_) => "frequency",
        }
    }
}

/// Either explicit values or `count` evenly spaced points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Values(Vec<f64>),
    Range { start: f64, stop: f64, count: usize },
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::Values(v) => v.clone(),
            Grid::Range { start, stop, count } => linspace(*start, *stop, *count),
        }
    }

    fn check(&self, field: &str) -> Result<Vec<f64>, CliError> {
        let v = self.values();
        if v.is_empty() {
            return Err(CliError::config(field, "grid is empty"));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(CliError::config(field, "grid has non-finite entries"));
        }
        Ok(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelChoice {
    Reduced,
    Full,
    Both,
}

impl std::str::FromStr for ModelChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "reduced" => Ok(ModelChoice::Reduced),
            "full" => Ok(ModelChoice::Full),
            "both" => Ok(ModelChoice::Both),
            _ => Err(format!("expected reduced, full or both, got {s:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsOptions {
    pub z0: f64,
    pub theta0: f64,
    /// Initial cavity amplitude for the full model; the steady value at the
    /// initial atomic state when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi0: Option<f64>,
    /// `ξ²` frozen into the reduced model; derived from `photon_mode` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub photon_number: Option<f64>,
    #[serde(default = "default_photon_mode")]
    pub photon_mode: PhotonMode,
    pub t_end: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_model")]
    pub model_kind: ModelChoice,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
}

fn default_photon_mode() -> PhotonMode {
    PhotonMode::Refined
}

fn default_dt() -> f64 {
    0.01
}

fn default_model() -> ModelChoice {
    ModelChoice::Reduced
}

fn default_rtol() -> f64 {
    Tolerances::default().rtol
}

fn default_atol() -> f64 {
    Tolerances::default().atol
}

impl DynamicsOptions {
    pub fn tolerances(&self) -> Tolerances {
        Tolerances {
            rtol: self.rtol,
            atol: self.atol,
        }
    }

    fn check(&self) -> Result<(), CliError> {
        finite_in("z0", self.z0, -1.0, 1.0)?;
        finite_in("theta0", self.theta0, -std::f64::consts::PI, std::f64::consts::PI)?;
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(CliError::config("t_end", "must be positive"));
        }
        if !(self.dt.is_finite() && self.dt > 0.0 && self.dt <= self.t_end) {
            return Err(CliError::config("dt", "must be positive and at most t_end"));
        }
        if let Some(n) = self.photon_number {
            if !(n.is_finite() && n >= 0.0) {
                return Err(CliError::config("photon_number", "must be non-negative"));
            }
        }
        if let Some(xi) = self.xi0 {
            if !(xi.is_finite() && xi >= 0.0) {
                return Err(CliError::config("xi0", "must be non-negative"));
            }
        }
        if self.phi0.is_some_and(|p| !p.is_finite()) {
            return Err(CliError::config("phi0", "must be finite"));
        }
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(CliError::config("rtol", "tolerances must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecondAxis {
    U(Grid),
    Theta(Grid),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseDiagramOptions {
    #[serde(default)]
    pub photon_number: f64,
    pub z0: Grid,
    pub axis2: SecondAxis,
    /// `θ₀` for a `U` axis, `U` for a `θ₀` axis.
    #[serde(default)]
    pub fixed: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroundStateMode {
    Fixed,
    SelfConsistent,
}

impl std::str::FromStr for GroundStateMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fixed" => Ok(GroundStateMode::Fixed),
            "self_consistent" => Ok(GroundStateMode::SelfConsistent),
            _ => Err(format!("expected fixed or self_consistent, got {s:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundStateOptions {
    #[serde(rename = "U")]
    pub u: Grid,
    /// Fixed `|α|²` values, or starting points in self-consistent mode.
    pub photon_numbers: Vec<f64>,
    #[serde(default = "default_gs_mode")]
    pub mode: GroundStateMode,
}

fn default_gs_mode() -> GroundStateMode {
    GroundStateMode::Fixed
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfiguration {
    pub label: String,
    /// Overrides `params.W12` for this curve.
    #[serde(rename = "W12", default, skip_serializing_if = "Option::is_none")]
    pub w12: Option<f64>,
    /// Overrides `params.J` for this curve.
    #[serde(rename = "J", default, skip_serializing_if = "Option::is_none")]
    pub j: Option<f64>,
    #[serde(default)]
    pub photon_number: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepOptions {
    #[serde(rename = "U")]
    pub u: Grid,
    pub configurations: Vec<SweepConfiguration>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencyOptions {
    pub xi_sq: Grid,
}

fn finite_in(field: &str, v: f64, lo: f64, hi: f64) -> Result<(), CliError> {
    if v.is_finite() && v >= lo && v <= hi {
        Ok(())
    } else {
        Err(CliError::config(field, format!("{v} outside [{lo}, {hi}]")))
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::config("config", format!("{}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::config("config", format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every grid and option against its domain before any work starts.
    pub fn validate(&self) -> Result<(), CliError> {
        self.params.validate()?;
        match &self.command {
            Command::Dynamics(o) => o.check(),
            Command::PhaseDiagram(o) => {
                for z in o.z0.check("z0")? {
                    finite_in("z0", z, -1.0, 1.0)?;
                }
                match &o.axis2 {
                    SecondAxis::U(g) => {
                        g.check("axis2.u")?;
                        finite_in("fixed", o.fixed, -std::f64::consts::PI, std::f64::consts::PI)?;
                    }
                    SecondAxis::Theta(g) => {
                        for t in g.check("axis2.theta")? {
                            finite_in("axis2.theta", t, -std::f64::consts::PI, std::f64::consts::PI)?;
                        }
                        finite_in("fixed", o.fixed, f64::MIN, f64::MAX)?;
                    }
                }
                if !(o.photon_number.is_finite() && o.photon_number >= 0.0) {
                    return Err(CliError::config("photon_number", "must be non-negative"));
                }
                Ok(())
            }
            Command::GroundState(o) => {
                o.u.check("U")?;
                if o.photon_numbers.is_empty() {
                    return Err(CliError::config("photon_numbers", "list is empty"));
                }
                if o.photon_numbers.iter().any(|n| !(n.is_finite() && *n >= 0.0)) {
                    return Err(CliError::config("photon_numbers", "entries must be non-negative"));
                }
                Ok(())
            }
            Command::Sweep(o) => {
                let u = o.u.check("U")?;
                if u.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(CliError::config("U", "grid must be strictly increasing"));
                }
                if o.configurations.is_empty() {
                    return Err(CliError::config("configurations", "list is empty"));
                }
                let mut labels: Vec<&str> = o.configurations.iter().map(|c| c.label.as_str()).collect();
                labels.sort_unstable();
                if labels.windows(2).any(|w| w[0] == w[1]) {
                    return Err(CliError::config("configurations", "labels must be unique"));
                }
                for c in &o.configurations {
                    if c.label.is_empty()
                        || !c.label.chars().all(|ch| ch.is_ascii_alphanumeric() || "_-.".contains(ch))
                    {
                        return Err(CliError::config(
                            "configurations.label",
                            format!("{:?} is not a safe file name", c.label),
                        ));
                    }
                    if !(c.photon_number.is_finite() && c.photon_number >= 0.0) {
                        return Err(CliError::config("configurations.photon_number", "must be non-negative"));
                    }
                    self.sweep_params(c).validate()?;
                }
                Ok(())
            }
            Command::Frequency(o) => {
                for x in o.xi_sq.check("xi_sq")? {
                    if x < 0.0 {
                        return Err(CliError::config("xi_sq", "entries must be non-negative"));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn sweep_params(&self, c: &SweepConfiguration) -> SystemParams {
        let mut p = self.params.clone();
        if let Some(w12) = c.w12 {
            p.w12 = w12;
        }
        if let Some(j) = c.j {
            p.j = j;
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DYNAMICS: &str = r#"{
        "params": {"J": 1.0, "U": 0.012, "N": 1000},
        "command": "dynamics",
        "options": {"z0": 0.7, "theta0": 0.0, "t_end": 50.0}
    }"#;

    #[test]
    fn defaults_and_round_trip() {
        let cfg: RunConfig = serde_json::from_str(DYNAMICS).unwrap();
        let Command::Dynamics(o) = &cfg.command else {
            panic!("wrong command");
        };
        assert_eq!(o.model_kind, ModelChoice::Reduced);
        assert_eq!(o.dt, 0.01);
        assert_eq!(cfg.seed, 0);
        let again: RunConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn grids_parse_both_ways() {
        let g: Grid = serde_json::from_str("[1.0, 2.0]").unwrap();
        assert_eq!(g.values(), vec![1.0, 2.0]);
        let g: Grid = serde_json::from_str(r#"{"start": 0, "stop": 1, "count": 3}"#).unwrap();
        assert_eq!(g.values(), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn validation_names_the_field() {
        let mut cfg: RunConfig = serde_json::from_str(DYNAMICS).unwrap();
        if let Command::Dynamics(o) = &mut cfg.command {
            o.t_end = 0.0;
        }
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("t_end"));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn unknown_option_is_rejected() {
        let text = DYNAMICS.replace("\"t_end\"", "\"tend\": 1, \"t_end\"");
        assert!(serde_json::from_str::<RunConfig>(&text).is_err());
    }
}
