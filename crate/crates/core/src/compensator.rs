//! Inversion-free feedforward compensator.
//!
//! A high-gain integrator is closed around an internal hysteresis model:
//! `u ← u + K·dt·(r − y*)`, then the model is advanced to `u` and its output
//! becomes the next `y*`. When the internal loop error is small the integrator
//! value is the input that drives the model to the reference, i.e. it acts as
//! the inverse hysteresis map without ever constructing one.
//!
//! The forward rule is stable while `K·κ·dt < 2`, with κ the model's largest
//! branch slope. Construction rejects configurations outside that bound.
//! There is no anti-windup: references outside the reachable output range
//! make the integrator ramp while the model saturates.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signals::SampledSignal;
use crate::state::PreisachState;

/// A rate-independent map the compensator can close its loop around.
pub trait HysteresisModel {
    /// Advances to input `u` and returns the new output.
    fn apply(&mut self, u: f64) -> Result<f64>;
    fn output(&self) -> f64;
    /// Last input actually seen by the model, after any clamping.
    fn input(&self) -> f64;
    /// Upper bound of `Δy/Δu` along monotone input runs.
    fn max_slope(&self) -> f64;
}

impl HysteresisModel for PreisachState {
    fn apply(&mut self, u: f64) -> Result<f64> {
        self.apply_input(u)?;
        Ok(self.output())
    }

    fn output(&self) -> f64 {
        PreisachState::output(self)
    }

    fn input(&self) -> f64 {
        PreisachState::input(self)
    }

    fn max_slope(&self) -> f64 {
        PreisachState::max_slope(self)
    }
}

/// Linear stand-in `y = A·u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaticGain {
    pub gain: f64,
    u: f64,
}

impl StaticGain {
    pub fn new(gain: f64) -> Self {
        Self { gain, u: 0.0 }
    }
}

impl HysteresisModel for StaticGain {
    fn apply(&mut self, u: f64) -> Result<f64> {
        if !u.is_finite() {
            return Err(Error::NonFinite("model input"));
        }
        self.u = u;
        Ok(self.gain * u)
    }

    fn output(&self) -> f64 {
        self.gain * self.u
    }

    fn input(&self) -> f64 {
        self.u
    }

    fn max_slope(&self) -> f64 {
        self.gain.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompensatorConfig {
    /// Integral gain K, 1/s.
    pub gain: f64,
    /// Integration step, s.
    pub dt: f64,
}

impl Default for CompensatorConfig {
    fn default() -> Self {
        Self { gain: 6000.0, dt: 1e-5 }
    }
}

impl CompensatorConfig {
    pub fn validate(&self, slope: f64) -> Result<()> {
        if !(self.gain.is_finite() && self.gain > 0.0) {
            return Err(Error::InvalidParameter(format!("gain must be positive, got {}", self.gain)));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if self.gain * slope * self.dt >= 2.0 {
            return Err(Error::UnstableLoop { gain: self.gain, slope, dt: self.dt });
        }
        Ok(())
    }
}

/// One loop sample; `e` is the error that drove this step's integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopSample {
    pub t: f64,
    pub r: f64,
    pub u: f64,
    pub ystar: f64,
    pub e: f64,
}

#[derive(Debug, Clone)]
pub struct Compensator<M> {
    config: CompensatorConfig,
    model: M,
    u: f64,
    ystar: f64,
    e: f64,
}

impl<M: HysteresisModel> Compensator<M> {
    /// The integrator starts at the model's current input.
    pub fn new(config: CompensatorConfig, model: M) -> Result<Self> {
        config.validate(model.max_slope())?;
        let u = model.input();
        let ystar = model.output();
        Ok(Self { config, model, u, ystar, e: 0.0 })
    }

    /// Reads `e = r − y*`, integrates it, then advances the model. Returns `u`.
    pub fn step(&mut self, r: f64) -> Result<f64> {
        if !r.is_finite() {
            return Err(Error::NonFinite("reference"));
        }
        let e = r - self.ystar;
        let u = self.u + self.config.gain * self.config.dt * e;
        if !u.is_finite() {
            return Err(Error::NonFinite("integrator"));
        }
        let ystar = self.model.apply(u)?;
        if !ystar.is_finite() {
            return Err(Error::NonFinite("model output"));
        }
        self.u = u;
        self.ystar = ystar;
        self.e = e;
        Ok(u)
    }

    pub fn control(&self) -> f64 {
        self.u
    }

    /// Internal model output y*.
    pub fn ystar(&self) -> f64 {
        self.ystar
    }

    /// Loop error of the most recent step.
    pub fn error(&self) -> f64 {
        self.e
    }

    pub fn model(&self) -> &M {
        &self.model
    }

    pub fn config(&self) -> &CompensatorConfig {
        &self.config
    }
}

/// Runs the compensator over a reference sampled at `config.dt`.
pub fn run_feedforward<M: HysteresisModel>(
    config: CompensatorConfig,
    model: M,
    reference: &SampledSignal,
) -> Result<Vec<LoopSample>> {
    if reference.is_empty() {
        return Err(Error::InsufficientData("empty reference".into()));
    }
    if (reference.dt() - config.dt).abs() > 1e-12 * config.dt {
        return Err(Error::InvalidParameter(format!(
            "reference sampled at {} but loop steps at {}",
            reference.dt(),
            config.dt
        )));
    }
    let mut comp = Compensator::new(config, model)?;
    reference
        .iter()
        .map(|(t, r)| {
            let u = comp.step(r)?;
            Ok(LoopSample { t, r, u, ystar: comp.ystar(), e: comp.error() })
        })
        .collect()
}

/// Writes `t,r,u,ystar,e` rows.
pub fn write_trajectory_csv<W: Write>(samples: &[LoopSample], mut out: W) -> Result<()> {
    writeln!(out, "t,r,u,ystar,e")?;
    for s in samples {
        writeln!(out, "{},{},{},{},{}", s.t, s.r, s.u, s.ystar, s.e)?;
    }
    Ok(())
}
