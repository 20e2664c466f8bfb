//! Time envelopes Ω(t) for pulsed drives.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// A Gaussian is treated as zero beyond this many FWHM from its centre
/// (relative amplitude 2⁻⁶⁴).
pub const GAUSSIAN_SUPPORT_FWHM: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum PulseEnvelope {
    Constant {
        rabi: f64,
    },
    Gaussian {
        center: f64,
        fwhm: f64,
        peak: f64,
    },
    /// Piecewise-linear through the samples, zero outside them.
    Samples {
        times: Vec<f64>,
        values: Vec<f64>,
    },
}

impl PulseEnvelope {
    pub fn gaussian(center: f64, fwhm: f64, peak: f64) -> Self {
        PulseEnvelope::Gaussian { center, fwhm, peak }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PulseEnvelope::Constant { rabi } => {
                if !(*rabi >= 0.0 && rabi.is_finite()) {
                    return Err(invalid("pulse.rabi", format!("must be finite and >= 0, got {rabi}")));
                }
            }
            PulseEnvelope::Gaussian { center, fwhm, peak } => {
                if !center.is_finite() {
                    return Err(invalid("pulse.center", "must be finite"));
                }
                if !(*fwhm > 0.0 && fwhm.is_finite()) {
                    return Err(invalid("pulse.fwhm", format!("must be positive, got {fwhm}")));
                }
                if !(*peak >= 0.0 && peak.is_finite()) {
                    return Err(invalid("pulse.peak", format!("must be finite and >= 0, got {peak}")));
                }
            }
            PulseEnvelope::Samples { times, values } => {
                if times.len() != values.len() || times.len() < 2 {
                    return Err(invalid(
                        "pulse.samples",
                        "need at least two (time, value) pairs of equal length",
                    ));
                }
                if times.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(invalid("pulse.samples", "times must be strictly increasing"));
                }
                if times.iter().chain(values).any(|x| !x.is_finite()) {
                    return Err(invalid("pulse.samples", "non-finite sample"));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            PulseEnvelope::Constant { rabi } => *rabi,
            PulseEnvelope::Gaussian { center, fwhm, peak } => {
                let x = (t - center) / fwhm;
                peak * (-4.0 * std::f64::consts::LN_2 * x * x).exp()
            }
            PulseEnvelope::Samples { times, values } => {
                if t < times[0] || t > times[times.len() - 1] {
                    return 0.0;
                }
                let k = times.partition_point(|&s| s <= t).clamp(1, times.len() - 1);
                let (t0, t1) = (times[k - 1], times[k]);
                let w = (t - t0) / (t1 - t0);
                values[k - 1] * (1.0 - w) + values[k] * w
            }
        }
    }

    /// Interval outside which the envelope vanishes; `None` for CW.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            PulseEnvelope::Constant { .. } => None,
            PulseEnvelope::Gaussian { center, fwhm, .. } => Some((
                center - GAUSSIAN_SUPPORT_FWHM * fwhm,
                center + GAUSSIAN_SUPPORT_FWHM * fwhm,
            )),
            PulseEnvelope::Samples { times, .. } => Some((times[0], times[times.len() - 1])),
        }
    }

    /// True when Ω(t) = 0 everywhere.
    pub fn is_zero(&self) -> bool {
        match self {
            PulseEnvelope::Constant { rabi } => *rabi == 0.0,
            PulseEnvelope::Gaussian { peak, .. } => *peak == 0.0,
            PulseEnvelope::Samples { values, .. } => values.iter().all(|&v| v == 0.0),
        }
    }

    /// Pulse area ∫Ω dt; infinite for a non-zero CW envelope.
    pub fn area(&self) -> f64 {
        match self {
            PulseEnvelope::Constant { rabi } => {
                if *rabi == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            PulseEnvelope::Gaussian { fwhm, peak, .. } => {
                peak * fwhm * (std::f64::consts::PI / (4.0 * std::f64::consts::LN_2)).sqrt()
            }
            PulseEnvelope::Samples { times, values } => times
                .windows(2)
                .zip(values.windows(2))
                .map(|(t, v)| 0.5 * (v[0] + v[1]) * (t[1] - t[0]))
                .sum(),
        }
    }
}
