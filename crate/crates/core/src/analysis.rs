//! Loop-error transfer functions and time-series metrics.
//!
//! With a static gain `A` in the loop the reference-to-error map is the
//! sensitivity `jω / (jω + KA)`. Replacing the gain by a first-order lag
//! `F(jω)` that mimics the hysteresis phase lag gives
//! `1 / (1 + KA·F(jω)/jω)`, which also maps a slowly varying memory bias to
//! the error. Both vanish at DC and rise at +20 dB/dec below the corner.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::batch;
use crate::error::{Error, Result};
use crate::signals::SignalKind;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyResponsePoint {
    /// rad/s
    pub omega: f64,
    pub magnitude: f64,
    /// rad, wrapped to (−π, π]
    pub phase: f64,
}

impl FrequencyResponsePoint {
    fn from_complex(omega: f64, z: Complex64) -> Self {
        Self { omega, magnitude: z.norm(), phase: wrap_phase(z.arg()) }
    }

    pub fn magnitude_db(&self) -> f64 {
        20.0 * self.magnitude.log10()
    }

    pub fn phase_deg(&self) -> f64 {
        self.phase.to_degrees()
    }
}

/// First-order lag surrogate of a hysteresis loop around a harmonic operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LagApproximation {
    /// Center frequency of the phase lag, rad/s.
    pub omega0: f64,
    /// Bandwidth scaling; `δ > 1` gives a lag.
    pub delta: f64,
    /// Gain factor A.
    pub gain: f64,
    /// Output bias ȳ.
    pub bias: f64,
}

impl LagApproximation {
    pub const DEFAULT_DELTA: f64 = 2.5;

    pub fn new(omega0: f64, delta: f64, gain: f64, bias: f64) -> Result<Self> {
        if !(omega0 > 0.0 && omega0.is_finite()) {
            return Err(Error::InvalidParameter("omega0 must be positive".into()));
        }
        if !(delta > 1.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter("delta must exceed 1".into()));
        }
        Ok(Self { omega0, delta, gain, bias })
    }

    pub fn lag(&self, omega: f64) -> FrequencyResponsePoint {
        lag_f(omega, self.omega0, self.delta)
    }

    pub fn sensitivity(&self, omega: f64, k: f64) -> FrequencyResponsePoint {
        sensitivity_hysteresis(omega, k, self.gain, self.omega0, self.delta)
    }
}

/// `jω / (jω + KA)`.
pub fn sensitivity_linear(omega: f64, k: f64, a: f64) -> FrequencyResponsePoint {
    let jw = Complex64::new(0.0, omega);
    FrequencyResponsePoint::from_complex(omega, jw / (jw + k * a))
}

/// `(jω/(δω₀) + 1) / (jω·δ/ω₀ + 1)`.
pub fn lag_f(omega: f64, omega0: f64, delta: f64) -> FrequencyResponsePoint {
    FrequencyResponsePoint::from_complex(omega, lag_complex(omega, omega0, delta))
}

fn lag_complex(omega: f64, omega0: f64, delta: f64) -> Complex64 {
    let num = Complex64::new(1.0, omega / (delta * omega0));
    let den = Complex64::new(1.0, omega * delta / omega0);
    num / den
}

/// `1 / (1 + (KA/jω)·F(jω))`, exactly zero at ω = 0.
pub fn sensitivity_hysteresis(
    omega: f64,
    k: f64,
    a: f64,
    omega0: f64,
    delta: f64,
) -> FrequencyResponsePoint {
    if omega == 0.0 {
        return FrequencyResponsePoint { omega, magnitude: 0.0, phase: PI / 2.0 };
    }
    // multiply through by jω to stay finite for small ω
    let jw = Complex64::new(0.0, omega);
    let f = lag_complex(omega, omega0, delta);
    FrequencyResponsePoint::from_complex(omega, jw / (jw + k * a * f))
}

/// `points` logarithmically spaced values from `min` to `max` inclusive.
pub fn log_space(min: f64, max: f64, points: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max >= min && min.is_finite() && max.is_finite()) || points == 0 {
        return Err(Error::InvalidParameter(format!(
            "log grid needs 0 < min <= max and points > 0, got [{min}, {max}] x {points}"
        )));
    }
    if points == 1 {
        return Ok(vec![min]);
    }
    let (lo, hi) = (min.log10(), max.log10());
    Ok((0..points)
        .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (points - 1) as f64))
        .collect())
}

/// Evaluates `f` on every grid point, in parallel when enabled.
pub fn frequency_response<F>(omegas: &[f64], f: F) -> Vec<FrequencyResponsePoint>
where
    F: Fn(f64) -> FrequencyResponsePoint + Sync + Send,
{
    batch::map(omegas, |&w| f(w))
}

/// One reference cycle: frequency in Hz and the peak tracking error inside it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleError {
    pub nu_hz: f64,
    pub eps: f64,
}

/// Sample indices where the reference crosses zero upward (`r[k-1] <= 0 < r[k]`).
pub fn cycle_boundaries(r: &[f64]) -> Vec<usize> {
    (1..r.len()).filter(|&k| r[k - 1] <= 0.0 && r[k] > 0.0).collect()
}

fn cycle_frequency(kind: Option<&SignalKind>, start: usize, end: usize, dt: f64) -> f64 {
    let mid = 0.5 * (start + end) as f64 * dt;
    kind.and_then(|k| k.instantaneous_frequency(mid))
        .unwrap_or(1.0 / ((end - start) as f64 * dt))
}

/// Peak `|r − y|` over each full cycle between consecutive zero-up-crossings of
/// `r`. The cycle frequency is the signal's instantaneous frequency at the
/// cycle midpoint, or the inverse cycle length if the signal has none.
pub fn per_cycle_peak_error(
    r: &[f64],
    y: &[f64],
    dt: f64,
    kind: Option<&SignalKind>,
) -> Result<Vec<CycleError>> {
    if r.len() != y.len() {
        return Err(Error::InsufficientData("reference and output lengths differ".into()));
    }
    let bounds = cycle_boundaries(r);
    if bounds.len() < 2 {
        return Err(Error::InsufficientData("less than one full reference cycle".into()));
    }
    Ok(bounds
        .windows(2)
        .map(|w| {
            let eps = (w[0]..w[1]).map(|k| (r[k] - y[k]).abs()).fold(0.0, f64::max);
            CycleError { nu_hz: cycle_frequency(kind, w[0], w[1], dt), eps }
        })
        .collect())
}

/// Streaming form of [`per_cycle_peak_error`] for runs too long to keep in memory.
#[derive(Debug, Clone)]
pub struct CycleErrorTracker {
    dt: f64,
    kind: Option<SignalKind>,
    k: usize,
    prev_r: f64,
    start: Option<usize>,
    peak: f64,
    cycles: Vec<CycleError>,
}

impl CycleErrorTracker {
    pub fn new(dt: f64, kind: Option<SignalKind>) -> Self {
        Self { dt, kind, k: 0, prev_r: 0.0, start: None, peak: 0.0, cycles: Vec::new() }
    }

    pub fn push(&mut self, r: f64, y: f64) {
        if self.k > 0 && self.prev_r <= 0.0 && r > 0.0 {
            if let Some(start) = self.start {
                let nu_hz = cycle_frequency(self.kind.as_ref(), start, self.k, self.dt);
                self.cycles.push(CycleError { nu_hz, eps: self.peak });
            }
            self.start = Some(self.k);
            self.peak = 0.0;
        }
        if self.start.is_some() {
            self.peak = self.peak.max((r - y).abs());
        }
        self.prev_r = r;
        self.k += 1;
    }

    pub fn cycles(&self) -> &[CycleError] {
        &self.cycles
    }

    pub fn into_cycles(self) -> Vec<CycleError> {
        self.cycles
    }
}

/// Least-squares slope of `20·log10(ε)` against `log10(ν)`.
pub fn slope_db_per_decade(points: &[CycleError]) -> Result<f64> {
    if points.len() < 5 {
        return Err(Error::InsufficientData(format!("need at least 5 points, got {}", points.len())));
    }
    if points.iter().any(|p| !(p.eps > 0.0) || !(p.nu_hz > 0.0)) {
        return Err(Error::InvalidParameter("errors and frequencies must be positive".into()));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.nu_hz.log10()).collect();
    let ys: Vec<f64> = points.iter().map(|p| 20.0 * p.eps.log10()).collect();
    let (lo, hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    if hi - lo < 1.0 - 1e-9 {
        return Err(Error::InsufficientData(format!("frequency span of {:.3} decades", hi - lo)));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Single-frequency Fourier coefficient `Σ x_k e^{-jωt_k}`.
fn fundamental(series: &[f64], freq_hz: f64, dt: f64) -> Complex64 {
    let w = 2.0 * PI * freq_hz * dt;
    series
        .iter()
        .enumerate()
        .map(|(k, &x)| x * Complex64::from_polar(1.0, -w * k as f64))
        .sum()
}

/// Phase of the output's fundamental minus the input's, in (−π, π].
/// The window must hold a whole number of periods.
pub fn fundamental_phase(input: &[f64], output: &[f64], freq_hz: f64, dt: f64) -> Result<f64> {
    if input.len() != output.len() || input.is_empty() {
        return Err(Error::InsufficientData("input and output must be equally long and non-empty".into()));
    }
    let periods = input.len() as f64 * dt * freq_hz;
    if periods < 1.0 - 1e-9 || (periods - periods.round()).abs() > 1e-6 * periods.max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "window spans {periods} periods; a whole number is required"
        )));
    }
    let x = fundamental(input, freq_hz, dt);
    let y = fundamental(output, freq_hz, dt);
    if x.norm() == 0.0 || y.norm() == 0.0 {
        return Err(Error::InsufficientData("no fundamental component".into()));
    }
    Ok(wrap_phase(y.arg() - x.arg()))
}

/// Fundamental amplitude of a window holding whole periods.
pub fn fundamental_amplitude(series: &[f64], freq_hz: f64, dt: f64) -> f64 {
    2.0 * fundamental(series, freq_hz, dt).norm() / series.len() as f64
}

/// Wraps to (−π, π].
pub fn wrap_phase(phi: f64) -> f64 {
    let mut p = phi % (2.0 * PI);
    if p <= -PI {
        p += 2.0 * PI;
    } else if p > PI {
        p -= 2.0 * PI;
    }
    p
}
