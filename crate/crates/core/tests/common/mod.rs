#![allow(dead_code)]

use twophase::config::{builtin, parse_config, RunConfig};
use twophase::{
    integrate, IntegratorConfig, MachineState, Method, Scenario, SimulationTrace,
    ValidatedParameters,
};

pub fn builtin_config(name: &str) -> RunConfig {
    parse_config(builtin(name).unwrap()).unwrap()
}

/// Parameters and scenario of a built-in config with its integrator replaced.
pub fn builtin_run(name: &str, integrator: IntegratorConfig) -> (ValidatedParameters, Scenario) {
    let mut c = builtin_config(name);
    c.integrator = integrator;
    let r = c.resolve().unwrap();
    (r.params, r.scenario)
}

pub fn run(p: &ValidatedParameters, scenario: &Scenario) -> SimulationTrace {
    integrate(p, scenario).unwrap()
}

/// Final state of `scenario` integrated over `horizon` with `method`/`dt`,
/// recording only the endpoints.
pub fn final_state(
    p: &ValidatedParameters,
    scenario: &Scenario,
    method: Method,
    dt: f64,
    horizon: f64,
) -> MachineState {
    let mut s = scenario.clone();
    let steps = (horizon / dt).round() as usize;
    s.integrator = IntegratorConfig { method, step_size: dt, duration: horizon, record_every: steps };
    run(p, &s).last().unwrap().state()
}

/// Forward Euler at `dt`, `dt/2`, `dt/4` combined by two levels of
/// Richardson extrapolation. The leading O(dt) and O(dt²) error terms cancel,
/// leaving an Euler-only reference whose error is far below the raw run's.
pub fn euler_richardson(
    p: &ValidatedParameters,
    scenario: &Scenario,
    dt: f64,
    horizon: f64,
) -> MachineState {
    let e = [dt, dt / 2.0, dt / 4.0]
        .map(|h| final_state(p, scenario, Method::Euler, h, horizon).as_array());
    MachineState::from_array(std::array::from_fn(|k| {
        let r1 = 2.0 * e[1][k] - e[0][k];
        let r2 = 2.0 * e[2][k] - e[1][k];
        (4.0 * r2 - r1) / 3.0
    }))
}

/// Peak |value| of each state component along a trace.
pub fn state_scales(trace: &SimulationTrace) -> [f64; 5] {
    let mut m = [0.0f64; 5];
    for r in &trace.records {
        for (slot, v) in m.iter_mut().zip(r.state().as_array()) {
            *slot = slot.max(v.abs());
        }
    }
    m
}

/// Largest component-wise error, each normalised by its scale.
pub fn scaled_error(a: &MachineState, b: &MachineState, scales: &[f64; 5]) -> f64 {
    a.as_array()
        .iter()
        .zip(b.as_array())
        .zip(scales)
        .map(|((x, y), s)| (x - y).abs() / s)
        .fold(0.0, f64::max)
}
