//! Post-processing of traces: steady-state detection, summary statistics and
//! the energy audit.

use std::f64::consts::TAU;

use thiserror::Error;

use crate::dynamics::{SimulationTrace, TraceRecord};
use crate::machine::{field_energy, FluxLinkages, TorqueModel, ValidatedParameters, WindingCurrents};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("trace spans {span} s but steady-state detection needs at least {needed} s")]
    TraceTooShort { span: f64, needed: f64 },
    #[error("steady state not reached within {0} s")]
    NotSettled(f64),
    #[error("less than one supply period of settled data after t = {0} s")]
    InsufficientSettledData(f64),
    #[error("supply frequency must be positive (got {0})")]
    Frequency(f64),
    #[error("trace spacing {spacing} s is too coarse for a {period} s supply period")]
    CoarseSpacing { spacing: f64, period: f64 },
}

/// Steady state holds at `t` when `max - min` of the (optionally
/// period-averaged) speed over `[t, t + window]` is at most
/// `speed_tol * |mean|` over the same span.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateCriteria {
    pub speed_tol: f64,
    /// Seconds.
    pub window: f64,
    /// When set, speed is first replaced by its trailing mean over this many
    /// seconds. Use the supply period to remove pulsating-torque ripple.
    pub averaging_period: Option<f64>,
}

impl Default for SteadyStateCriteria {
    fn default() -> Self {
        Self { speed_tol: 1e-3, window: 0.1, averaging_period: None }
    }
}

impl SteadyStateCriteria {
    pub fn averaged_over(self, period: f64) -> Self {
        Self { averaging_period: Some(period), ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    /// Earliest time at which the criteria hold, if any.
    pub settle_time: Option<f64>,
}

impl SteadyState {
    pub fn reached(&self) -> bool {
        self.settle_time.is_some()
    }
}

fn samples(span: f64, spacing: f64) -> usize {
    (span / spacing).round().max(1.0) as usize
}

pub fn detect_steady_state(
    trace: &SimulationTrace,
    criteria: &SteadyStateCriteria,
) -> Result<SteadyState, AnalysisError> {
    let span = trace.duration();
    let needed = 2.0 * criteria.window;
    if trace.len() < 2 || span < needed * (1.0 - 1e-9) {
        return Err(AnalysisError::TraceTooShort { span, needed });
    }

    let h = trace.spacing;
    let omega = trace.column(|r| r.omega_mech);
    let avg = criteria.averaging_period.map_or(1, |p| samples(p, h));

    // smoothed[j] is the mean of omega over samples j .. j + avg - 1; it is
    // attributed to the last of those samples.
    let mut smoothed = Vec::with_capacity(omega.len() + 1 - avg.min(omega.len()));
    let mut acc: f64 = omega[..avg.min(omega.len())].iter().sum();
    if avg <= omega.len() {
        smoothed.push(acc / avg as f64);
        for j in avg..omega.len() {
            acc += omega[j] - omega[j - avg];
            smoothed.push(acc / avg as f64);
        }
    }

    let w = samples(criteria.window, h);
    if smoothed.len() <= w {
        return Err(AnalysisError::TraceTooShort { span, needed });
    }
    for i in 0..smoothed.len() - w {
        let win = &smoothed[i..=i + w];
        let (lo, hi) = win
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        let mean = win.iter().sum::<f64>() / win.len() as f64;
        if hi - lo <= criteria.speed_tol * mean.abs() {
            return Ok(SteadyState { settle_time: Some(trace.records[i + avg - 1].t) });
        }
    }
    Ok(SteadyState { settle_time: None })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryReport {
    pub steady_state_reached: bool,
    pub settle_time: f64,
    /// Start of the whole-period span the statistics are taken over; the span
    /// ends at the last record.
    pub window_start: f64,
    /// Mean mechanical speed over the analysis span.
    pub final_speed_mech: f64,
    pub synchronous_speed_mech: f64,
    pub slip: f64,
    pub mean_torque: f64,
    pub torque_ripple_pp: f64,
    pub stator_current_rms_alpha: f64,
    pub stator_current_rms_beta: f64,
}

impl SummaryReport {
    pub const FIELDS: [&'static str; 10] = [
        "steady_state_reached",
        "settle_time",
        "window_start",
        "final_speed_mech",
        "synchronous_speed_mech",
        "slip",
        "mean_torque",
        "torque_ripple_pp",
        "stator_current_rms_alpha",
        "stator_current_rms_beta",
    ];

    /// Value of a named field as text, `None` for unknown names.
    pub fn field(&self, name: &str) -> Option<String> {
        let v = match name {
            "steady_state_reached" => return Some(self.steady_state_reached.to_string()),
            "settle_time" => self.settle_time,
            "window_start" => self.window_start,
            "final_speed_mech" => self.final_speed_mech,
            "synchronous_speed_mech" => self.synchronous_speed_mech,
            "slip" => self.slip,
            "mean_torque" => self.mean_torque,
            "torque_ripple_pp" => self.torque_ripple_pp,
            "stator_current_rms_alpha" => self.stator_current_rms_alpha,
            "stator_current_rms_beta" => self.stator_current_rms_beta,
            _ => return None,
        };
        Some(v.to_string())
    }
}

/// Trapezoidal integral of `f` over consecutive records with uniform `h`.
fn trapezoid(records: &[TraceRecord], h: f64, f: impl Fn(&TraceRecord) -> f64) -> f64 {
    match records {
        [] | [_] => 0.0,
        [first, .., last] => {
            let inner: f64 = records[1..records.len() - 1].iter().map(&f).sum();
            h * (0.5 * (f(first) + f(last)) + inner)
        }
    }
}

/// Summary statistics over the trailing whole supply periods (at most
/// `criteria.window` long) that lie after the settle time. Steady-state
/// detection averages speed over one supply period.
pub fn summarize(
    trace: &SimulationTrace,
    p: &ValidatedParameters,
    supply_frequency: f64,
    criteria: &SteadyStateCriteria,
) -> Result<SummaryReport, AnalysisError> {
    if !(supply_frequency.is_finite() && supply_frequency > 0.0) {
        return Err(AnalysisError::Frequency(supply_frequency));
    }
    let period = 1.0 / supply_frequency;
    let h = trace.spacing;
    let per_period = (period / h).round() as usize;
    if per_period < 2 {
        return Err(AnalysisError::CoarseSpacing { spacing: h, period });
    }

    let settled = detect_steady_state(trace, &criteria.averaged_over(period))?;
    let settle_time = settled.settle_time.ok_or(AnalysisError::NotSettled(trace.duration()))?;

    let last = trace.len() - 1;
    let settle_idx = trace.records.partition_point(|r| r.t < settle_time);
    let wanted = ((criteria.window * supply_frequency + 1e-9).floor() as usize).max(1);
    let available = last.saturating_sub(settle_idx) / per_period;
    let periods = wanted.min(available);
    if periods == 0 {
        return Err(AnalysisError::InsufficientSettledData(settle_time));
    }
    let start = last - periods * per_period;
    let span_records = &trace.records[start..=last];
    let span = h * (periods * per_period) as f64;

    let mean = |f: &dyn Fn(&TraceRecord) -> f64| trapezoid(span_records, h, f) / span;
    let final_speed_mech = mean(&|r| r.omega_mech);
    let mean_torque = mean(&|r| r.torque_e);
    let rms_alpha = mean(&|r| r.i_s_alpha * r.i_s_alpha).sqrt();
    let rms_beta = mean(&|r| r.i_s_beta * r.i_s_beta).sqrt();
    let (lo, hi) = span_records.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
        (lo.min(r.torque_e), hi.max(r.torque_e))
    });

    let synchronous = TAU * supply_frequency / p.pole_pairs();
    Ok(SummaryReport {
        steady_state_reached: true,
        settle_time,
        window_start: trace.records[start].t,
        final_speed_mech,
        synchronous_speed_mech: synchronous,
        slip: (synchronous - final_speed_mech) / synchronous,
        mean_torque,
        torque_ripple_pp: hi - lo,
        stator_current_rms_alpha: rms_alpha,
        stator_current_rms_beta: rms_beta,
    })
}

/// Mechanical side of the energy balance for one torque expression.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MechanicalBalance {
    /// ∫ T·ω_mech dt, joules.
    pub mechanical_energy_out: f64,
    /// input − losses − field delta − mechanical.
    pub residual: f64,
}

/// Energy integrals over the whole trace, joules.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EnergyReport {
    pub stator_input_energy: f64,
    pub stator_copper_loss: f64,
    pub rotor_copper_loss: f64,
    pub field_energy_delta: f64,
    /// Using the mutual-inductance torque.
    pub mutual: MechanicalBalance,
    /// Using the energy-consistent torque.
    pub energy_consistent: MechanicalBalance,
}

impl EnergyReport {
    pub fn balance(&self, model: TorqueModel) -> &MechanicalBalance {
        match model {
            TorqueModel::MutualInductance => &self.mutual,
            TorqueModel::EnergyConsistent => &self.energy_consistent,
        }
    }

    /// |residual| / stator input energy; zero when there is no input.
    pub fn relative_residual(&self, model: TorqueModel) -> f64 {
        let r = self.balance(model).residual;
        if self.stator_input_energy == 0.0 {
            if r == 0.0 { 0.0 } else { f64::INFINITY }
        } else {
            (r / self.stator_input_energy).abs()
        }
    }
}

fn stored_energy(r: &TraceRecord) -> f64 {
    let psi = FluxLinkages {
        psi_s_alpha: r.psi_s_alpha,
        psi_s_beta: r.psi_s_beta,
        psi_r_alpha: r.psi_r_alpha,
        psi_r_beta: r.psi_r_beta,
    };
    let i = WindingCurrents {
        i_s_alpha: r.i_s_alpha,
        i_s_beta: r.i_s_beta,
        i_r_alpha: r.i_r_alpha,
        i_r_beta: r.i_r_beta,
    };
    field_energy(&psi, &i)
}

pub fn energy_audit(trace: &SimulationTrace, p: &ValidatedParameters) -> EnergyReport {
    let (Some(first), Some(last)) = (trace.records.first(), trace.records.last()) else {
        return EnergyReport::default();
    };
    let recs = &trace.records;
    let h = trace.spacing;

    let input = trapezoid(recs, h, |r| r.v_s_alpha * r.i_s_alpha + r.v_s_beta * r.i_s_beta);
    let stator_loss = trapezoid(recs, h, |r| {
        p.r_s_alpha * r.i_s_alpha * r.i_s_alpha + p.r_s_beta * r.i_s_beta * r.i_s_beta
    });
    let rotor_loss = trapezoid(recs, h, |r| {
        p.r_r_alpha * r.i_r_alpha * r.i_r_alpha + p.r_r_beta * r.i_r_beta * r.i_r_beta
    });
    let field_delta = stored_energy(last) - stored_energy(first);
    let balance = |mech: f64| MechanicalBalance {
        mechanical_energy_out: mech,
        residual: input - stator_loss - rotor_loss - field_delta - mech,
    };

    EnergyReport {
        stator_input_energy: input,
        stator_copper_loss: stator_loss,
        rotor_copper_loss: rotor_loss,
        field_energy_delta: field_delta,
        mutual: balance(trapezoid(recs, h, |r| r.torque_e * r.omega_mech)),
        energy_consistent: balance(trapezoid(recs, h, |r| r.torque_e_ec * r.omega_mech)),
    }
}
