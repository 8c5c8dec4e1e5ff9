use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::analysis::{self, CycleError, CycleErrorTracker, FrequencyResponsePoint};
use crate::batch;
use crate::compensator::Compensator;
use crate::density::DensityGrid;
use crate::error::{Error, Result};
use crate::experiments::config::ExperimentConfig;
use crate::signals::SampledSignal;
use crate::state::PreisachState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Sweep,
    Compensate,
    Frf,
    Hysteron,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Sweep => "sweep",
            ExperimentKind::Compensate => "compensate",
            ExperimentKind::Frf => "frf",
            ExperimentKind::Hysteron => "hysteron",
        }
    }
}

/// Column-wise time series; decimated by `output.record_every`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub y: Vec<f64>,
    pub ystar: Vec<f64>,
    pub e: Vec<f64>,
}

impl Trajectory {
    pub fn push(&mut self, t: f64, r: f64, u: f64, y: f64, ystar: f64, e: f64) {
        self.t.push(t);
        self.r.push(r);
        self.u.push(u);
        self.y.push(y);
        self.ystar.push(ystar);
        self.e.push(e);
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrfCurve {
    pub label: String,
    pub points: Vec<FrequencyResponsePoint>,
}

#[derive(Debug, Clone)]
pub struct ExperimentRecord {
    pub kind: ExperimentKind,
    pub config: ExperimentConfig,
    pub trajectory: Trajectory,
    pub cycles: Vec<CycleError>,
    pub frf: Vec<FrfCurve>,
    pub metrics: BTreeMap<String, f64>,
}

impl ExperimentRecord {
    fn new(kind: ExperimentKind, config: &ExperimentConfig) -> Self {
        Self {
            kind,
            config: config.clone(),
            trajectory: Trajectory::default(),
            cycles: Vec::new(),
            frf: Vec::new(),
            metrics: BTreeMap::new(),
        }
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.get(name).copied()
    }
}

pub fn run(kind: ExperimentKind, config: &ExperimentConfig) -> Result<ExperimentRecord> {
    match kind {
        ExperimentKind::Sweep => run_loop_sweep(config),
        ExperimentKind::Compensate => run_compensation(config),
        ExperimentKind::Frf => run_frf(config),
        ExperimentKind::Hysteron => run_hysteron_demo(config),
    }
}

/// Runs independent configurations on the worker pool, one state machine each.
pub fn run_batch(kind: ExperimentKind, configs: &[ExperimentConfig]) -> Vec<Result<ExperimentRecord>> {
    batch::map(configs, |c| run(kind, c))
}

fn model_density(config: &ExperimentConfig) -> Result<Arc<DensityGrid>> {
    config.build_density(config.build_mesh(config.mesh.n)?)
}

fn plant_state(config: &ExperimentConfig, model: &Arc<DensityGrid>) -> Result<PreisachState> {
    let density = match config.model.plant_n {
        Some(n) if n != config.mesh.n => config.build_density(config.build_mesh(n)?)?,
        _ => model.clone(),
    };
    Ok(PreisachState::new(density, config.model.init).with_interpolation(config.model.interpolation))
}

fn finite(v: f64, what: &'static str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Open loop: the reference drives the plant directly, tracing `(u, y)` loops.
pub fn run_loop_sweep(config: &ExperimentConfig) -> Result<ExperimentRecord> {
    config.validate()?;
    let density = model_density(config)?;
    let signal = config.signal.build(config.controller.dt)?;
    let mut plant = plant_state(config, &density)?;
    let mut rec = ExperimentRecord::new(ExperimentKind::Sweep, config);
    let every = config.output.record_every;
    let (mut y_lo, mut y_hi, mut peak) = (f64::INFINITY, f64::NEG_INFINITY, 0.0_f64);
    for (k, (t, r)) in signal.iter().enumerate() {
        plant.apply_input(r)?;
        let y = finite(plant.output(), "plant output")?;
        y_lo = y_lo.min(y);
        y_hi = y_hi.max(y);
        peak = peak.max((r - y).abs());
        if k % every == 0 {
            rec.trajectory.push(t, r, r, y, y, r - y);
        }
    }
    rec.metrics.insert("samples".into(), signal.len() as f64);
    rec.metrics.insert("y_min".into(), y_lo);
    rec.metrics.insert("y_max".into(), y_hi);
    rec.metrics.insert("peak_abs_r_minus_y".into(), peak);
    Ok(rec)
}

/// Full chain: reference → compensator → plant, plus an uncompensated
/// pass-through plant driven by the reference itself for comparison.
pub fn run_compensation(config: &ExperimentConfig) -> Result<ExperimentRecord> {
    config.validate()?;
    let density = model_density(config)?;
    let signal = config.signal.build(config.controller.dt)?;
    let model = PreisachState::new(density.clone(), config.model.init)
        .with_interpolation(config.model.interpolation);
    let mut comp = Compensator::new(config.controller, model)?;
    let mut plant = plant_state(config, &density)?;
    let mut bypass = plant_state(config, &density)?;
    let mut tracker = CycleErrorTracker::new(signal.dt(), Some(signal.kind().clone()));
    let mut rec = ExperimentRecord::new(ExperimentKind::Compensate, config);
    let every = config.output.record_every;
    let (mut peak_track, mut peak_loop, mut peak_bypass) = (0.0_f64, 0.0_f64, 0.0_f64);
    for (k, (t, r)) in signal.iter().enumerate() {
        let u = comp.step(r)?;
        plant.apply_input(u)?;
        let y = finite(plant.output(), "plant output")?;
        bypass.apply_input(r)?;
        let y_bypass = finite(bypass.output(), "pass-through output")?;
        let e = comp.error();
        peak_track = peak_track.max((r - y).abs());
        peak_loop = peak_loop.max(e.abs());
        peak_bypass = peak_bypass.max((r - y_bypass).abs());
        tracker.push(r, y);
        if k % every == 0 {
            rec.trajectory.push(t, r, u, y, comp.ystar(), e);
        }
    }
    rec.cycles = tracker.into_cycles();
    let m = &mut rec.metrics;
    m.insert("samples".into(), signal.len() as f64);
    m.insert("peak_tracking_error".into(), peak_track);
    m.insert("peak_loop_error".into(), peak_loop);
    m.insert("uncompensated_peak_error".into(), peak_bypass);
    m.insert("final_loop_error".into(), comp.error());
    m.insert("model_kappa".into(), comp.model().max_slope());
    m.insert("cycles".into(), rec.cycles.len() as f64);
    if let Ok(slope) = analysis::slope_db_per_decade(&rec.cycles) {
        m.insert("error_slope_db_per_decade".into(), slope);
    }
    Ok(rec)
}

/// Analytic loop-error magnitudes: the static-gain family and the lag family.
pub fn run_frf(config: &ExperimentConfig) -> Result<ExperimentRecord> {
    config.validate()?;
    let f = &config.frf;
    let omegas = analysis::log_space(f.omega_min, f.omega_max, f.points)?;
    if f.feedback_gains.is_empty() && f.omega0.is_empty() {
        return Err(Error::Config("frf: no curves requested".into()));
    }
    let mut rec = ExperimentRecord::new(ExperimentKind::Frf, config);
    for &a in &f.feedback_gains {
        let points = analysis::frequency_response(&omegas, |w| analysis::sensitivity_linear(w, f.gain, a));
        rec.metrics.insert(format!("corner_rad_s[A={a}]"), f.gain * a);
        rec.frf.push(FrfCurve { label: format!("linear_A={a}"), points });
    }
    for &w0 in &f.omega0 {
        let points = analysis::frequency_response(&omegas, |w| {
            analysis::sensitivity_hysteresis(w, f.gain, f.lag_gain, w0, f.delta)
        });
        let at_w0 = analysis::sensitivity_hysteresis(w0, f.gain, f.lag_gain, w0, f.delta);
        rec.metrics.insert(format!("error_db_at_omega0[{w0}]"), at_w0.magnitude_db());
        rec.frf.push(FrfCurve { label: format!("hysteresis_omega0={w0}"), points });
    }
    Ok(rec)
}

/// A single relay spanning the whole domain under a sine.
pub fn run_hysteron_demo(config: &ExperimentConfig) -> Result<ExperimentRecord> {
    config.validate()?;
    let h = &config.hysteron;
    let mesh = config.build_mesh(1)?;
    let density = Arc::new(DensityGrid::uniform(mesh, (config.density.y_min, config.density.y_max))?);
    let period_samples = (1.0 / (h.freq_hz * h.dt)).round() as usize;
    let signal = SampledSignal::sine(h.amplitude, h.freq_hz, h.periods as f64 / h.freq_hz, h.dt)?;
    let mut relay = PreisachState::new(density, h.init);
    let mut rec = ExperimentRecord::new(ExperimentKind::Hysteron, config);
    let mut ys = Vec::with_capacity(signal.len());
    for (t, u) in signal.iter() {
        relay.apply_input(u)?;
        let y = relay.output();
        ys.push(y);
        rec.trajectory.push(t, u, u, y, y, u - y);
    }
    let us = signal.samples();
    let degenerate = ys.iter().all(|&y| y == ys[0]);
    rec.metrics.insert("degenerate".into(), if degenerate { 1.0 } else { 0.0 });
    let phase = |a: usize, b: usize| -> f64 {
        if degenerate {
            return f64::NAN;
        }
        analysis::fundamental_phase(&us[a..b], &ys[a..b], h.freq_hz, h.dt).unwrap_or(f64::NAN)
    };
    let n = us.len();
    let first = phase(0, period_samples.min(n));
    rec.metrics.insert("phase_deg".into(), phase(0, n).to_degrees());
    rec.metrics.insert("phase_first_period_deg".into(), first.to_degrees());
    if h.periods > 1 {
        rec.metrics.insert("phase_steady_deg".into(), phase(period_samples, n).to_degrees());
    }
    rec.metrics.insert("phase_bound_deg".into(), (PI / 2.0).to_degrees());
    Ok(rec)
}
