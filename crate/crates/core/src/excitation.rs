//! Closed-form stator supply and load torque as functions of time.

use std::f64::consts::{FRAC_PI_2, SQRT_2, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::machine::ExcitationSample;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExcitationError {
    #[error("supply frequency must be positive (got {0})")]
    Frequency(f64),
    #[error("supply voltage must be positive (got {0})")]
    Voltage(f64),
    #[error("harmonic amplitude must be non-negative and finite on {phase} phase (got {value})")]
    Amplitude { phase: &'static str, value: f64 },
    #[error("harmonic phase must be finite on {phase} phase (got {value})")]
    Phase { phase: &'static str, value: f64 },
    #[error("harmonic order must be at least 1 on {0} phase")]
    ZeroOrder(&'static str),
    #[error("harmonic order {order} repeated on {phase} phase")]
    DuplicateOrder { phase: &'static str, order: u32 },
    #[error("load profile must have at least one breakpoint")]
    EmptyLoad,
    #[error("first load breakpoint must start at t = 0 (got {0})")]
    LoadStart(f64),
    #[error("load breakpoints must be strictly increasing in time (at t = {0})")]
    LoadOrder(f64),
    #[error("load torque must be finite (got {0})")]
    LoadTorque(f64),
}

/// One cosine term `amplitude * cos(2π·order·f·t + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Harmonic {
    pub order: u32,
    /// Peak volts.
    pub amplitude: f64,
    /// Radians.
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseSequence {
    /// β lags α by a quarter period; drives positive rotation.
    #[default]
    Forward,
    /// β leads α by a quarter period.
    Reverse,
}

/// Periodic two-phase stator supply.
#[derive(Debug, Clone, PartialEq)]
pub struct VoltageSource {
    frequency: f64,
    alpha: Vec<Harmonic>,
    beta: Vec<Harmonic>,
}

impl VoltageSource {
    pub fn new(
        frequency: f64,
        alpha: Vec<Harmonic>,
        beta: Vec<Harmonic>,
    ) -> Result<Self, ExcitationError> {
        if !(frequency.is_finite() && frequency > 0.0) {
            return Err(ExcitationError::Frequency(frequency));
        }
        check_harmonics("alpha", &alpha)?;
        check_harmonics("beta", &beta)?;
        Ok(Self { frequency, alpha, beta })
    }

    /// Equal-amplitude sinusoids a quarter period apart: α = cos, β = ±sin.
    pub fn quadrature(
        amplitude_peak: f64,
        frequency: f64,
        sequence: PhaseSequence,
    ) -> Result<Self, ExcitationError> {
        if !(amplitude_peak.is_finite() && amplitude_peak > 0.0) {
            return Err(ExcitationError::Voltage(amplitude_peak));
        }
        let beta_phase = match sequence {
            PhaseSequence::Forward => -FRAC_PI_2,
            PhaseSequence::Reverse => FRAC_PI_2,
        };
        Self::new(
            frequency,
            vec![Harmonic { order: 1, amplitude: amplitude_peak, phase: 0.0 }],
            vec![Harmonic { order: 1, amplitude: amplitude_peak, phase: beta_phase }],
        )
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn period(&self) -> f64 {
        1.0 / self.frequency
    }

    pub fn alpha(&self) -> &[Harmonic] {
        &self.alpha
    }

    pub fn beta(&self) -> &[Harmonic] {
        &self.beta
    }

    /// Instantaneous `(v_sα, v_sβ)`.
    pub fn sample(&self, t: f64) -> (f64, f64) {
        // Phase is reduced to whole cycles before scaling by 2π to keep
        // periodicity exact-ish at large t.
        let cycles = self.frequency * t;
        let eval = |hs: &[Harmonic]| {
            hs.iter()
                .map(|h| {
                    let frac = (f64::from(h.order) * cycles).rem_euclid(1.0);
                    h.amplitude * (TAU * frac + h.phase).cos()
                })
                .sum::<f64>()
        };
        (eval(&self.alpha), eval(&self.beta))
    }
}

fn check_harmonics(phase: &'static str, hs: &[Harmonic]) -> Result<(), ExcitationError> {
    let mut seen = Vec::with_capacity(hs.len());
    for h in hs {
        if h.order == 0 {
            return Err(ExcitationError::ZeroOrder(phase));
        }
        if !(h.amplitude.is_finite() && h.amplitude >= 0.0) {
            return Err(ExcitationError::Amplitude { phase, value: h.amplitude });
        }
        if !h.phase.is_finite() {
            return Err(ExcitationError::Phase { phase, value: h.phase });
        }
        if seen.contains(&h.order) {
            return Err(ExcitationError::DuplicateOrder { phase, order: h.order });
        }
        seen.push(h.order);
    }
    Ok(())
}

/// Forward-sequence quadrature supply from an RMS rating.
pub fn quadrature_supply(v_rms: f64, frequency: f64) -> Result<VoltageSource, ExcitationError> {
    if !(v_rms.is_finite() && v_rms > 0.0) {
        return Err(ExcitationError::Voltage(v_rms));
    }
    VoltageSource::quadrature(SQRT_2 * v_rms, frequency, PhaseSequence::Forward)
}

pub fn sample_voltage(src: &VoltageSource, t: f64) -> (f64, f64) {
    src.sample(t)
}

/// Piecewise-constant load torque, right-continuous at each breakpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadProfile {
    breakpoints: Vec<(f64, f64)>,
}

impl LoadProfile {
    pub fn new(breakpoints: Vec<(f64, f64)>) -> Result<Self, ExcitationError> {
        let Some(&(t0, _)) = breakpoints.first() else {
            return Err(ExcitationError::EmptyLoad);
        };
        if t0 != 0.0 {
            return Err(ExcitationError::LoadStart(t0));
        }
        for w in breakpoints.windows(2) {
            if !w[1].0.is_finite() || w[1].0 <= w[0].0 {
                return Err(ExcitationError::LoadOrder(w[1].0));
            }
        }
        if let Some(&(_, tq)) = breakpoints.iter().find(|(_, tq)| !tq.is_finite()) {
            return Err(ExcitationError::LoadTorque(tq));
        }
        Ok(Self { breakpoints })
    }

    pub fn constant(torque: f64) -> Result<Self, ExcitationError> {
        Self::new(vec![(0.0, torque)])
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.breakpoints
    }

    pub fn sample(&self, t: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|&(start, _)| start <= t);
        // t < 0 falls before the first breakpoint; hold the initial torque.
        self.breakpoints[idx.saturating_sub(1)].1
    }
}

pub fn sample_load(profile: &LoadProfile, t: f64) -> f64 {
    profile.sample(t)
}

/// Anything that can provide stator voltages and load torque at time `t`.
pub trait Sources {
    fn sample(&self, t: f64) -> ExcitationSample;
}

impl<F: Fn(f64) -> ExcitationSample> Sources for F {
    fn sample(&self, t: f64) -> ExcitationSample {
        self(t)
    }
}

/// Supply plus load.
#[derive(Debug, Clone, PartialEq)]
pub struct Excitation {
    pub supply: VoltageSource,
    pub load: LoadProfile,
}

impl Sources for Excitation {
    fn sample(&self, t: f64) -> ExcitationSample {
        let (v_s_alpha, v_s_beta) = self.supply.sample(t);
        ExcitationSample { v_s_alpha, v_s_beta, load_torque: self.load.sample(t) }
    }
}
