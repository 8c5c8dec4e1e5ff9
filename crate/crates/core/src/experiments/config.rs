//! Experiment configuration: a TOML file with one table per component.
//!
//! Every key has a default, so an empty file is a valid configuration
//! (the chirp compensation setup on a 400×400 mesh). Unknown sections or
//! keys are rejected. Overrides use `section.key=value`, where `value` is
//! parsed as a TOML value and falls back to a bare string.
//!
//! ```toml
//! [mesh]
//! n = 400
//! u_min = -1.0
//! u_max = 1.0
//!
//! [density]
//! kind = "gaussian"      # "uniform" | "gaussian"
//! y_min = -1.0
//! y_max = 1.0
//! mu_beta = -0.35
//! mu_alpha = 0.35
//! sigma_beta = 0.05      # variances and covariance, (β, α) order
//! sigma_alpha = 0.05
//! sigma_cross = 0.0
//!
//! [model]
//! init = "demagnetized"  # "all_down" | "all_up" | "demagnetized"
//! interpolation = false
//! plant_n = 400          # optional: plant mesh size differing from the internal model
//!
//! [controller]
//! gain = 6000.0
//! dt = 1e-5
//!
//! [signal]
//! kind = "chirp"         # "constant" | "sine" | "triangle" | "chirp" | "zigzag"
//! amplitude = 0.9
//! freq_hz = 1.0
//! f0_hz = 0.1
//! f1_hz = 10.0
//! duration = 120.0
//! value = 0.5
//! peak_step = 0.25
//! cycles = 4
//! slope = 1.0
//!
//! [frf]
//! gain = 1000.0
//! feedback_gains = [0.1, 1.0, 10.0]
//! omega0 = [0.1, 1.0, 10.0]
//! lag_gain = 1.0
//! delta = 2.5
//! omega_min = 0.01
//! omega_max = 1e6
//! points = 241
//!
//! [hysteron]
//! init = "all_down"
//! amplitude = 1.0
//! freq_hz = 1.0
//! periods = 3
//! dt = 1e-3
//!
//! [output]
//! record_every = 100
//! ```

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::compensator::CompensatorConfig;
use crate::density::{DensityGrid, GaussianParams};
use crate::error::{Error, Result};
use crate::mesh::TriangularMesh;
use crate::signals::SampledSignal;
use crate::state::InitMode;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mesh: MeshConfig,
    pub density: DensityConfig,
    pub model: ModelConfig,
    pub controller: CompensatorConfig,
    pub signal: SignalConfig,
    pub frf: FrfConfig,
    pub hysteron: HysteronConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshConfig {
    pub n: usize,
    pub u_min: f64,
    pub u_max: f64,
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self { n: 400, u_min: -1.0, u_max: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityKind {
    Uniform,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DensityConfig {
    pub kind: DensityKind,
    pub y_min: f64,
    pub y_max: f64,
    pub mu_beta: f64,
    pub mu_alpha: f64,
    pub sigma_beta: f64,
    pub sigma_alpha: f64,
    pub sigma_cross: f64,
}

impl Default for DensityConfig {
    fn default() -> Self {
        let g = GaussianParams::default();
        Self {
            kind: DensityKind::Uniform,
            y_min: -1.0,
            y_max: 1.0,
            mu_beta: g.mu[0],
            mu_alpha: g.mu[1],
            sigma_beta: g.sigma[0][0],
            sigma_alpha: g.sigma[1][1],
            sigma_cross: g.sigma[0][1],
        }
    }
}

impl DensityConfig {
    pub fn gaussian_params(&self) -> GaussianParams {
        GaussianParams {
            mu: [self.mu_beta, self.mu_alpha],
            sigma: [[self.sigma_beta, self.sigma_cross], [self.sigma_cross, self.sigma_alpha]],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub init: InitMode,
    pub interpolation: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plant_n: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalType {
    Constant,
    Sine,
    Triangle,
    Chirp,
    Zigzag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignalConfig {
    pub kind: SignalType,
    pub amplitude: f64,
    pub freq_hz: f64,
    pub f0_hz: f64,
    pub f1_hz: f64,
    pub duration: f64,
    pub value: f64,
    pub peak_step: f64,
    pub cycles: usize,
    pub slope: f64,
}

impl Default for SignalConfig {
    fn default() -> Self {
        Self {
            kind: SignalType::Chirp,
            amplitude: 0.9,
            freq_hz: 1.0,
            f0_hz: 0.1,
            f1_hz: 10.0,
            duration: 120.0,
            value: 0.5,
            peak_step: 0.25,
            cycles: 4,
            slope: 1.0,
        }
    }
}

impl SignalConfig {
    pub fn build(&self, dt: f64) -> Result<SampledSignal> {
        match self.kind {
            SignalType::Constant => SampledSignal::constant(self.value, self.duration, dt),
            SignalType::Sine => SampledSignal::sine(self.amplitude, self.freq_hz, self.duration, dt),
            SignalType::Triangle => {
                SampledSignal::triangle(self.amplitude, self.freq_hz, self.duration, dt)
            }
            SignalType::Chirp => {
                SampledSignal::chirp(self.amplitude, self.f0_hz, self.f1_hz, self.duration, dt)
            }
            SignalType::Zigzag => {
                SampledSignal::zigzag_growing(self.peak_step, self.cycles, self.slope, dt)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrfConfig {
    pub gain: f64,
    pub feedback_gains: Vec<f64>,
    pub omega0: Vec<f64>,
    pub lag_gain: f64,
    pub delta: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub points: usize,
}

impl Default for FrfConfig {
    fn default() -> Self {
        Self {
            gain: 1000.0,
            feedback_gains: vec![0.1, 1.0, 10.0],
            omega0: vec![0.1, 1.0, 10.0],
            lag_gain: 1.0,
            delta: 2.5,
            omega_min: 0.01,
            omega_max: 1e6,
            points: 241,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HysteronConfig {
    pub init: InitMode,
    pub amplitude: f64,
    pub freq_hz: f64,
    pub periods: usize,
    pub dt: f64,
}

impl Default for HysteronConfig {
    fn default() -> Self {
        Self { init: InitMode::AllDown, amplitude: 1.0, freq_hz: 1.0, periods: 3, dt: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Keep every k-th sample in the written trajectory.
    pub record_every: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { record_every: 100 }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Self::from_table(parse_table(text)?)
    }

    pub fn from_table(table: Table) -> Result<Self> {
        let config: Self = Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.message().trim().to_string()))?;
        Ok(config)
    }

    /// Reads `path` (if given), applies `section.key=value` overrides, then validates.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
                parse_table(&text)?
            }
            None => Table::new(),
        };
        for item in overrides {
            apply_override(&mut table, item)?;
        }
        let config = Self::from_table(table)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn build_mesh(&self, n: usize) -> Result<Arc<TriangularMesh>> {
        Ok(Arc::new(TriangularMesh::new(n, self.mesh.u_min, self.mesh.u_max)?))
    }

    pub fn build_density(&self, mesh: Arc<TriangularMesh>) -> Result<Arc<DensityGrid>> {
        let range = (self.density.y_min, self.density.y_max);
        let grid = match self.density.kind {
            DensityKind::Uniform => DensityGrid::uniform(mesh, range)?,
            DensityKind::Gaussian => {
                DensityGrid::gaussian(mesh, &self.density.gaussian_params(), range)?
            }
        };
        Ok(Arc::new(grid))
    }

    /// Checks every cross-field constraint that can be checked without simulating.
    pub fn validate(&self) -> Result<()> {
        let field = |name: &str, e: Error| Error::Config(format!("{name}: {e}"));
        let mesh = self.build_mesh(self.mesh.n).map_err(|e| field("mesh", e))?;
        if let Some(n) = self.model.plant_n {
            TriangularMesh::new(n, self.mesh.u_min, self.mesh.u_max)
                .map_err(|e| field("model.plant_n", e))?;
        }
        let density = self.build_density(mesh).map_err(|e| field("density", e))?;
        let slope = if self.model.interpolation {
            density.max_sub_cell_slope()
        } else {
            density.max_branch_slope()
        };
        self.controller
            .validate(slope)
            .map_err(|e| field("controller", e))?;
        self.signal.build(self.controller.dt).map_err(|e| field("signal", e))?;
        if self.frf.points == 0 || !(self.frf.omega_min > 0.0 && self.frf.omega_max >= self.frf.omega_min) {
            return Err(Error::Config("frf: need 0 < omega_min <= omega_max and points > 0".into()));
        }
        if !(self.frf.gain > 0.0) || self.frf.feedback_gains.iter().any(|a| !(*a > 0.0)) {
            return Err(Error::Config("frf: gains must be positive".into()));
        }
        if !(self.frf.delta > 1.0) || self.frf.omega0.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::Config("frf: need delta > 1 and positive omega0".into()));
        }
        if self.hysteron.periods == 0 || !(self.hysteron.dt > 0.0) || !(self.hysteron.freq_hz > 0.0) {
            return Err(Error::Config("hysteron: need periods > 0, dt > 0, freq_hz > 0".into()));
        }
        if self.output.record_every == 0 {
            return Err(Error::Config("output.record_every must be at least 1".into()));
        }
        Ok(())
    }
}

fn parse_table(text: &str) -> Result<Table> {
    text.parse::<Table>()
        .map_err(|e| Error::Config(e.message().trim().to_string()))
}

/// Applies one `section.key=value` override to a raw config table.
pub fn apply_override(table: &mut Table, item: &str) -> Result<()> {
    let (path, raw) = item
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override '{item}' is not key=value")))?;
    let (section, key) = path
        .trim()
        .split_once('.')
        .ok_or_else(|| Error::Config(format!("override key '{path}' must be section.key")))?;
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    let entry = table
        .entry(section.to_string())
        .or_insert_with(|| Value::Table(Table::new()));
    match entry {
        Value::Table(t) => {
            t.insert(key.to_string(), value);
            Ok(())
        }
        _ => Err(Error::Config(format!("'{section}' is not a section"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = ExperimentConfig::from_toml_str("").unwrap();
        assert_eq!(c, ExperimentConfig::default());
        assert_eq!(c.mesh.n, 400);
        assert_eq!(c.controller.gain, 6000.0);
        assert_eq!(c.controller.dt, 1e-5);
        c.validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_errors() {
        assert!(ExperimentConfig::from_toml_str("[mesh]\nsize = 4\n").is_err());
        assert!(ExperimentConfig::from_toml_str("[plant]\nn = 4\n").is_err());
        assert!(ExperimentConfig::from_toml_str("[density]\nkind = \"lorentz\"\n").is_err());
    }

    #[test]
    fn overrides_are_typed() {
        let mut t = Table::new();
        apply_override(&mut t, "mesh.n=25").unwrap();
        apply_override(&mut t, "density.kind=gaussian").unwrap();
        apply_override(&mut t, "model.interpolation = true").unwrap();
        apply_override(&mut t, "frf.omega0=[1.0, 2.0]").unwrap();
        let c = ExperimentConfig::from_table(t).unwrap();
        assert_eq!(c.mesh.n, 25);
        assert_eq!(c.density.kind, DensityKind::Gaussian);
        assert!(c.model.interpolation);
        assert_eq!(c.frf.omega0, vec![1.0, 2.0]);
        let mut bad = Table::new();
        assert!(apply_override(&mut bad, "n=25").is_err());
        assert!(apply_override(&mut bad, "mesh.n").is_err());
    }

    #[test]
    fn validation_names_the_field() {
        let mut c = ExperimentConfig::default();
        c.controller.dt = 1e-3;
        let err = c.validate().unwrap_err().to_string();
        assert!(err.contains("controller"), "{err}");
        let mut c = ExperimentConfig::default();
        c.mesh.u_max = -2.0;
        assert!(c.validate().unwrap_err().to_string().contains("mesh"));
        let mut c = ExperimentConfig::default();
        c.signal.kind = SignalType::Zigzag;
        c.signal.peak_step = 0.5;
        assert!(c.validate().unwrap_err().to_string().contains("signal"));
    }
}
