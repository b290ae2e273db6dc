//! Fixed-step time integration of the five-state model.
//!
//! Classical RK4 is the production integrator. Forward Euler is kept as an
//! independent low-order reference for verification runs at tiny steps.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::excitation::{Excitation, Sources};
use crate::machine::{
    currents_from_fluxes, electromagnetic_torque, energy_consistent_torque, state_derivative,
    MachineState, ModelOptions, StateDerivative, ValidatedParameters,
};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Rk4,
    Euler,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    #[serde(default)]
    pub method: Method,
    #[serde(default = "IntegratorConfig::default_step_size")]
    pub step_size: f64,
    pub duration: f64,
    #[serde(default = "IntegratorConfig::default_record_every")]
    pub record_every: usize,
}

impl IntegratorConfig {
    pub const DEFAULT_STEP_SIZE: f64 = 1e-4;

    fn default_step_size() -> f64 {
        Self::DEFAULT_STEP_SIZE
    }

    fn default_record_every() -> usize {
        1
    }

    pub fn rk4(step_size: f64, duration: f64) -> Self {
        Self { method: Method::Rk4, step_size, duration, record_every: 1 }
    }

    pub fn euler(step_size: f64, duration: f64) -> Self {
        Self { method: Method::Euler, step_size, duration, record_every: 1 }
    }

    pub fn with_record_every(self, record_every: usize) -> Self {
        Self { record_every, ..self }
    }

    /// Number of integration steps. `duration` must be a whole multiple of
    /// `step_size` up to rounding.
    pub fn steps(&self) -> usize {
        (self.duration / self.step_size).round() as usize
    }

    pub fn validate(&self) -> Result<(), IntegratorError> {
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return Err(IntegratorError::StepSize(self.step_size));
        }
        if !(self.duration.is_finite() && self.duration >= 0.0) {
            return Err(IntegratorError::Duration(self.duration));
        }
        if self.duration > 0.0 && self.duration < self.step_size {
            return Err(IntegratorError::ShorterThanStep {
                duration: self.duration,
                step_size: self.step_size,
            });
        }
        let n = self.duration / self.step_size;
        if (n - n.round()).abs() > 1e-6 {
            return Err(IntegratorError::NotMultiple {
                duration: self.duration,
                step_size: self.step_size,
            });
        }
        if self.record_every < 1 {
            return Err(IntegratorError::RecordEvery);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegratorError {
    #[error("step_size must be positive (got {0})")]
    StepSize(f64),
    #[error("duration must be non-negative (got {0})")]
    Duration(f64),
    #[error("duration {duration} is shorter than step_size {step_size}")]
    ShorterThanStep { duration: f64, step_size: f64 },
    #[error("duration {duration} is not a whole number of steps of {step_size}")]
    NotMultiple { duration: f64, step_size: f64 },
    #[error("record_every must be at least 1")]
    RecordEvery,
    #[error("initial state must be finite")]
    InitialState,
}

/// A step produced a non-finite state.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("non-finite state at t = {time} s: {state:?}")]
pub struct StepError {
    pub time: f64,
    pub state: MachineState,
}

/// Everything `integrate` needs besides the machine itself.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub excitation: Excitation,
    pub integrator: IntegratorConfig,
    pub initial_state: MachineState,
    pub options: ModelOptions,
}

/// One recorded sample; algebraic channels are recomputed from the state.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TraceRecord {
    pub t: f64,
    pub v_s_alpha: f64,
    pub v_s_beta: f64,
    pub i_s_alpha: f64,
    pub i_s_beta: f64,
    pub i_r_alpha: f64,
    pub i_r_beta: f64,
    pub psi_s_alpha: f64,
    pub psi_s_beta: f64,
    pub psi_r_alpha: f64,
    pub psi_r_beta: f64,
    /// Mutual-inductance torque.
    pub torque_e: f64,
    /// Energy-consistent torque.
    pub torque_e_ec: f64,
    pub omega_mech: f64,
    pub load_torque: f64,
}

impl TraceRecord {
    pub const COLUMNS: [&'static str; 15] = [
        "t", "v_sa", "v_sb", "i_sa", "i_sb", "i_ra", "i_rb", "psi_sa", "psi_sb", "psi_ra",
        "psi_rb", "te", "te_ec", "omega_mech", "tl",
    ];

    pub fn capture(
        p: &ValidatedParameters,
        t: f64,
        state: &MachineState,
        sources: &impl Sources,
    ) -> Self {
        let input = sources.sample(t);
        let psi = state.fluxes();
        let i = currents_from_fluxes(p, &psi);
        Self {
            t,
            v_s_alpha: input.v_s_alpha,
            v_s_beta: input.v_s_beta,
            i_s_alpha: i.i_s_alpha,
            i_s_beta: i.i_s_beta,
            i_r_alpha: i.i_r_alpha,
            i_r_beta: i.i_r_beta,
            psi_s_alpha: psi.psi_s_alpha,
            psi_s_beta: psi.psi_s_beta,
            psi_r_alpha: psi.psi_r_alpha,
            psi_r_beta: psi.psi_r_beta,
            torque_e: electromagnetic_torque(p, &i),
            torque_e_ec: energy_consistent_torque(p, &psi, &i),
            omega_mech: state.omega_mech,
            load_torque: input.load_torque,
        }
    }

    pub fn values(&self) -> [f64; 15] {
        [
            self.t,
            self.v_s_alpha,
            self.v_s_beta,
            self.i_s_alpha,
            self.i_s_beta,
            self.i_r_alpha,
            self.i_r_beta,
            self.psi_s_alpha,
            self.psi_s_beta,
            self.psi_r_alpha,
            self.psi_r_beta,
            self.torque_e,
            self.torque_e_ec,
            self.omega_mech,
            self.load_torque,
        ]
    }

    pub fn from_values(v: [f64; 15]) -> Self {
        Self {
            t: v[0],
            v_s_alpha: v[1],
            v_s_beta: v[2],
            i_s_alpha: v[3],
            i_s_beta: v[4],
            i_r_alpha: v[5],
            i_r_beta: v[6],
            psi_s_alpha: v[7],
            psi_s_beta: v[8],
            psi_r_alpha: v[9],
            psi_r_beta: v[10],
            torque_e: v[11],
            torque_e_ec: v[12],
            omega_mech: v[13],
            load_torque: v[14],
        }
    }

    pub fn state(&self) -> MachineState {
        MachineState {
            psi_s_alpha: self.psi_s_alpha,
            psi_s_beta: self.psi_s_beta,
            psi_r_alpha: self.psi_r_alpha,
            psi_r_beta: self.psi_r_beta,
            omega_mech: self.omega_mech,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    /// Time between consecutive records.
    pub spacing: f64,
    pub records: Vec<TraceRecord>,
}

impl SimulationTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn duration(&self) -> f64 {
        match (self.records.first(), self.records.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        }
    }

    pub fn column(&self, f: impl Fn(&TraceRecord) -> f64) -> Vec<f64> {
        self.records.iter().map(f).collect()
    }
}

/// Integration stopped on a non-finite state; `partial` holds every record
/// written before the failure.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{error}")]
pub struct IntegrationFailure {
    pub error: StepError,
    pub partial: SimulationTrace,
}

fn checked(next: MachineState, time: f64) -> Result<MachineState, StepError> {
    if next.is_finite() {
        Ok(next)
    } else {
        Err(StepError { time, state: next })
    }
}

pub fn step_rk4(
    p: &ValidatedParameters,
    state: &MachineState,
    t: f64,
    dt: f64,
    sources: &impl Sources,
    opts: &ModelOptions,
) -> Result<MachineState, StepError> {
    let f = |t: f64, x: &MachineState| state_derivative(p, x, &sources.sample(t), opts);
    let half = 0.5 * dt;
    let k1 = f(t, state);
    let k2 = f(t + half, &state.offset(&k1, half));
    let k3 = f(t + half, &state.offset(&k2, half));
    let k4 = f(t + dt, &state.offset(&k3, dt));
    let (k1, k2, k3, k4) = (k1.as_array(), k2.as_array(), k3.as_array(), k4.as_array());
    let blend = StateDerivative::from_array(std::array::from_fn(|k| {
        (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]) / 6.0
    }));
    checked(state.offset(&blend, dt), t + dt)
}

pub fn step_euler(
    p: &ValidatedParameters,
    state: &MachineState,
    t: f64,
    dt: f64,
    sources: &impl Sources,
    opts: &ModelOptions,
) -> Result<MachineState, StepError> {
    let d = state_derivative(p, state, &sources.sample(t), opts);
    checked(state.offset(&d, dt), t + dt)
}

/// Runs `scenario` from its initial state and records every
/// `record_every`-th grid point, starting with `t = 0`.
pub fn integrate(
    p: &ValidatedParameters,
    scenario: &Scenario,
) -> Result<SimulationTrace, IntegrationFailure> {
    let cfg = &scenario.integrator;
    let dt = cfg.step_size;
    let every = cfg.record_every.max(1);
    let steps = cfg.steps();
    let sources = &scenario.excitation;

    let mut trace = SimulationTrace {
        spacing: dt * every as f64,
        records: Vec::with_capacity(steps / every + 1),
    };
    let mut state = scenario.initial_state;
    trace.records.push(TraceRecord::capture(p, 0.0, &state, sources));

    for k in 0..steps {
        let t = k as f64 * dt;
        let next = match cfg.method {
            Method::Rk4 => step_rk4(p, &state, t, dt, sources, &scenario.options),
            Method::Euler => step_euler(p, &state, t, dt, sources, &scenario.options),
        };
        state = match next {
            Ok(s) => s,
            Err(error) => return Err(IntegrationFailure { error, partial: trace }),
        };
        if (k + 1) % every == 0 {
            let t_next = (k + 1) as f64 * dt;
            trace.records.push(TraceRecord::capture(p, t_next, &state, sources));
        }
    }
    Ok(trace)
}
