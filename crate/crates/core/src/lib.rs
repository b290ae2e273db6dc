//! Time-domain simulation of unsymmetrical two-phase induction motors in the
//! stationary αβ frame.
//!
//! The state is the four winding flux linkages plus rotor speed. Currents
//! and torque are algebraic functions of the state ([`machine`]), the state
//! is advanced with fixed-step RK4 ([`dynamics`]) under closed-form supply
//! and load ([`excitation`]), and finished traces are reduced to steady-state
//! statistics and an energy audit ([`analysis`]).

pub mod analysis;
pub mod cli;
pub mod config;
pub mod dynamics;
pub mod excitation;
pub mod machine;
pub mod output;

pub use analysis::{
    detect_steady_state, energy_audit, summarize, EnergyReport, SteadyState, SteadyStateCriteria,
    SummaryReport,
};
pub use config::{parse_config, RunConfig, SweepSpec};
pub use dynamics::{
    integrate, step_euler, step_rk4, IntegratorConfig, Method, Scenario, SimulationTrace,
    TraceRecord,
};
pub use excitation::{
    quadrature_supply, sample_load, sample_voltage, Excitation, LoadProfile, PhaseSequence,
    VoltageSource,
};
pub use machine::{
    currents_from_fluxes, electromagnetic_torque, energy_consistent_torque, fluxes_from_currents,
    state_derivative, ExcitationSample, FluxLinkages, MachineParameters, MachineState,
    ModelOptions, SpeedConvention, TorqueModel, ValidatedParameters, WindingCurrents,
};
