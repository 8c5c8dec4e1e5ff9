//! Uniformly sampled, continuous reference signals.
//!
//! Sample `k` sits at `t = k·dt`. Periodic generators reduce the phase on the
//! integer sample grid whenever the period is a whole number of samples, so
//! peaks and zero crossings land on exact values.

use std::f64::consts::TAU;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignalKind {
    Constant { value: f64 },
    Sine { amplitude: f64, freq_hz: f64 },
    Triangle { amplitude: f64, freq_hz: f64 },
    Chirp { amplitude: f64, f0_hz: f64, f1_hz: f64, duration: f64 },
    Zigzag { peak_step: f64, cycles: usize, slope: f64 },
    Samples,
}

impl SignalKind {
    /// Instantaneous frequency in Hz, where the signal has one.
    pub fn instantaneous_frequency(&self, t: f64) -> Option<f64> {
        match *self {
            SignalKind::Sine { freq_hz, .. } | SignalKind::Triangle { freq_hz, .. } => Some(freq_hz),
            SignalKind::Chirp { f0_hz, f1_hz, duration, .. } => {
                Some(f0_hz + (f1_hz - f0_hz) * t / duration)
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    dt: f64,
    samples: Vec<f64>,
    kind: SignalKind,
}

impl SampledSignal {
    pub fn from_samples(samples: Vec<f64>, dt: f64) -> Result<Self> {
        check_dt(dt)?;
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("signal samples"));
        }
        Ok(Self { dt, samples, kind: SignalKind::Samples })
    }

    pub fn constant(value: f64, duration: f64, dt: f64) -> Result<Self> {
        let n = sample_count(duration, dt)?;
        if !value.is_finite() {
            return Err(Error::NonFinite("constant level"));
        }
        Ok(Self { dt, samples: vec![value; n], kind: SignalKind::Constant { value } })
    }

    /// `amplitude · sin(2π f t)`.
    pub fn sine(amplitude: f64, freq_hz: f64, duration: f64, dt: f64) -> Result<Self> {
        check_periodic(amplitude, freq_hz)?;
        let n = sample_count(duration, dt)?;
        let phase = PhaseGrid::new(freq_hz, dt);
        let samples = (0..n).map(|k| amplitude * (TAU * phase.cycles(k)).sin()).collect();
        Ok(Self { dt, samples, kind: SignalKind::Sine { amplitude, freq_hz } })
    }

    /// Symmetric triangle wave starting at zero and rising.
    pub fn triangle(amplitude: f64, freq_hz: f64, duration: f64, dt: f64) -> Result<Self> {
        check_periodic(amplitude, freq_hz)?;
        let n = sample_count(duration, dt)?;
        let phase = PhaseGrid::new(freq_hz, dt);
        let samples = (0..n)
            .map(|k| {
                let x = phase.cycles(k);
                let v = if x < 0.25 {
                    4.0 * x
                } else if x < 0.75 {
                    2.0 - 4.0 * x
                } else {
                    4.0 * x - 4.0
                };
                amplitude * v
            })
            .collect();
        Ok(Self { dt, samples, kind: SignalKind::Triangle { amplitude, freq_hz } })
    }

    /// Linear chirp `a·sin(2π(f0 t + (f1 − f0) t² / 2T))`.
    pub fn chirp(amplitude: f64, f0_hz: f64, f1_hz: f64, duration: f64, dt: f64) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude >= 0.0) {
            return Err(Error::InvalidParameter("amplitude must be nonnegative".into()));
        }
        if !(f0_hz.is_finite() && f1_hz.is_finite() && f0_hz > 0.0 && f1_hz >= f0_hz) {
            return Err(Error::InvalidParameter(format!(
                "chirp band must satisfy 0 < f0 <= f1, got [{f0_hz}, {f1_hz}]"
            )));
        }
        let n = sample_count(duration, dt)?;
        let rate = (f1_hz - f0_hz) / (2.0 * duration);
        let samples = (0..n)
            .map(|k| {
                let t = k as f64 * dt;
                let cycles = f0_hz * t + rate * t * t;
                amplitude * (TAU * cycles.fract()).sin()
            })
            .collect();
        Ok(Self {
            dt,
            samples,
            kind: SignalKind::Chirp { amplitude, f0_hz, f1_hz, duration },
        })
    }

    /// Ramps at constant |slope| through `+p₁, −p₁, +p₂, −p₂, …, +pₙ, −pₙ` and
    /// back to zero, with `p_k = k · peak_step`. The last peak must stay within
    /// the normalized domain `[-1, 1]`.
    pub fn zigzag_growing(peak_step: f64, cycles: usize, slope: f64, dt: f64) -> Result<Self> {
        check_dt(dt)?;
        if !(peak_step.is_finite() && peak_step > 0.0) || cycles == 0 {
            return Err(Error::InvalidParameter("zigzag needs a positive step and at least one cycle".into()));
        }
        if !(slope.is_finite() && slope > 0.0) {
            return Err(Error::InvalidParameter("zigzag slope must be positive".into()));
        }
        let final_peak = cycles as f64 * peak_step;
        if final_peak > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "zigzag final peak {final_peak} leaves the domain [-1, 1]"
            )));
        }
        let mut vertices = vec![0.0];
        for k in 1..=cycles {
            let p = k as f64 * peak_step;
            vertices.extend([p, -p]);
        }
        vertices.push(0.0);
        // vertex times along the path
        let mut times = Vec::with_capacity(vertices.len());
        let mut t = 0.0;
        times.push(t);
        for w in vertices.windows(2) {
            t += (w[1] - w[0]).abs() / slope;
            times.push(t);
        }
        let n = (t / dt + 1e-9).floor() as usize + 1;
        let mut seg = 0;
        let samples = (0..n)
            .map(|k| {
                let tk = (k as f64 * dt).min(t);
                while seg + 2 < times.len() && tk > times[seg + 1] {
                    seg += 1;
                }
                let (t0, t1) = (times[seg], times[seg + 1]);
                let (v0, v1) = (vertices[seg], vertices[seg + 1]);
                v0 + (v1 - v0) * (tk - t0) / (t1 - t0)
            })
            .collect();
        Ok(Self { dt, samples, kind: SignalKind::Zigzag { peak_step, cycles, slope } })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn kind(&self) -> &SignalKind {
        &self.kind
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 * self.dt
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    /// `(t, value)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.samples.iter().enumerate().map(move |(k, &v)| (k as f64 * self.dt, v))
    }

    /// Largest absolute sample-to-sample step.
    pub fn max_step(&self) -> f64 {
        self.samples.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max)
    }

    /// Writes `t,value` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,value")?;
        for (t, v) in self.iter() {
            writeln!(out, "{t},{v}")?;
        }
        Ok(())
    }
}

// Cycle fraction at sample k, exact when the period is an integer sample count.
struct PhaseGrid {
    freq: f64,
    dt: f64,
    period: Option<u64>,
}

impl PhaseGrid {
    fn new(freq: f64, dt: f64) -> Self {
        let samples = 1.0 / (freq * dt);
        let rounded = samples.round();
        let period = (rounded >= 1.0 && (samples - rounded).abs() < 1e-9 * rounded)
            .then_some(rounded as u64);
        Self { freq, dt, period }
    }

    fn cycles(&self, k: usize) -> f64 {
        match self.period {
            Some(p) => (k as u64 % p) as f64 / p as f64,
            None => (self.freq * k as f64 * self.dt).fract(),
        }
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    Ok(())
}

fn check_periodic(amplitude: f64, freq_hz: f64) -> Result<()> {
    if !(amplitude.is_finite() && amplitude >= 0.0) {
        return Err(Error::InvalidParameter("amplitude must be nonnegative".into()));
    }
    if !(freq_hz.is_finite() && freq_hz > 0.0) {
        return Err(Error::InvalidParameter("frequency must be positive".into()));
    }
    Ok(())
}

fn sample_count(duration: f64, dt: f64) -> Result<usize> {
    check_dt(dt)?;
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::InvalidParameter(format!("duration must be positive, got {duration}")));
    }
    Ok((duration / dt).round().max(1.0) as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_period_sine() {
        let s = SampledSignal::sine(1.0, 1.0, 1.0, 0.25).unwrap();
        let expected = [0.0, 1.0, 0.0, -1.0];
        assert_eq!(s.len(), 4);
        for (v, e) in s.samples().iter().zip(expected) {
            assert!((v - e).abs() < 1e-15);
        }
        assert_eq!(s.samples()[1], 1.0);
    }

    #[test]
    fn zero_amplitude_sine() {
        let s = SampledSignal::sine(0.0, 3.0, 2.0, 0.01).unwrap();
        assert!(s.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sine_rejects_bad_grid() {
        assert!(SampledSignal::sine(1.0, 1.0, 1.0, 0.0).is_err());
        assert!(SampledSignal::sine(1.0, 1.0, -1.0, 0.1).is_err());
        assert!(SampledSignal::sine(1.0, 0.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn sine_peaks_are_exact_on_integer_periods() {
        let s = SampledSignal::sine(1.0, 1.0, 5.0, 1e-3).unwrap();
        for c in 0..5 {
            assert_eq!(s.samples()[c * 1000 + 250], 1.0);
            assert_eq!(s.samples()[c * 1000 + 750], -1.0);
        }
    }

    #[test]
    fn zigzag_reversal_peaks() {
        let s = SampledSignal::zigzag_growing(0.25, 4, 1.0, 1e-3).unwrap();
        let v = s.samples();
        let peaks: Vec<f64> = (1..v.len() - 1)
            .filter(|&k| (v[k] - v[k - 1]) * (v[k + 1] - v[k]) < 0.0)
            .map(|k| v[k])
            .collect();
        let expected = [0.25, -0.25, 0.5, -0.5, 0.75, -0.75, 1.0, -1.0];
        assert_eq!(peaks.len(), expected.len());
        for (p, e) in peaks.iter().zip(expected) {
            assert!((p - e).abs() < 1e-9, "{p} vs {e}");
        }
        assert!(s.max_step() <= 1e-3 * (1.0 + 1e-9));
    }

    #[test]
    fn zigzag_rejects_out_of_domain_peak() {
        assert!(SampledSignal::zigzag_growing(0.3, 4, 1.0, 1e-3).is_err());
        assert!(SampledSignal::zigzag_growing(0.25, 0, 1.0, 1e-3).is_err());
    }

    #[test]
    fn degenerate_chirp_is_a_sine() {
        let c = SampledSignal::chirp(0.7, 2.0, 2.0, 3.0, 1e-3).unwrap();
        let s = SampledSignal::sine(0.7, 2.0, 3.0, 1e-3).unwrap();
        for (a, b) in c.samples().iter().zip(s.samples()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn chirp_midpoint_frequency() {
        let c = SampledSignal::chirp(0.9, 0.1, 10.0, 120.0, 1e-3).unwrap();
        let f = c.kind().instantaneous_frequency(60.0).unwrap();
        assert!((f - 5.05).abs() < 1e-12);
        assert!(SampledSignal::chirp(0.9, 10.0, 0.1, 1.0, 1e-3).is_err());
        assert!(SampledSignal::chirp(0.9, 0.0, 1.0, 1.0, 1e-3).is_err());
    }

    #[test]
    fn chirp_step_bound() {
        let (a, f1, dt) = (0.9, 10.0, 1e-4);
        let c = SampledSignal::chirp(a, 0.1, f1, 20.0, dt).unwrap();
        assert!(c.max_step() <= a * TAU * f1 * dt);
    }

    #[test]
    fn triangle_shape() {
        let s = SampledSignal::triangle(0.8, 1.0, 1.0, 0.125).unwrap();
        let expected = [0.0, 0.4, 0.8, 0.4, 0.0, -0.4, -0.8, -0.4];
        for (v, e) in s.samples().iter().zip(expected) {
            assert!((v - e).abs() < 1e-12);
        }
    }

    #[test]
    fn csv_rows() {
        let s = SampledSignal::constant(0.5, 0.3, 0.1).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,value\n0,0.5\n0.1,0.5\n0.2,0.5\n");
    }
}
