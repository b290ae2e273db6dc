mod common;

use common::{builtin_run, euler_richardson, final_state, run, state_scales, scaled_error};
use twophase::analysis::{summarize, SteadyStateCriteria};
use twophase::{IntegratorConfig, MachineState, Method, SpeedConvention};

#[test]
fn runs_are_bit_identical() {
    let (p, s) = builtin_run("paper_s3", IntegratorConfig::rk4(1e-4, 0.2));
    let a = run(&p, &s);
    let b = run(&p, &s);
    assert_eq!(a.len(), b.len());
    for (x, y) in a.records.iter().zip(&b.records) {
        for (u, v) in x.values().iter().zip(y.values()) {
            assert_eq!(u.to_bits(), v.to_bits());
        }
    }
}

#[test]
fn rk4_tracks_euler_over_short_horizon() {
    let (p, s) = builtin_run("paper_s3", IntegratorConfig::rk4(1e-6, 0.01));
    let trace = run(&p, &s);
    let scales = state_scales(&trace);
    let rk4 = final_state(&p, &s, Method::Rk4, 1e-5, 0.01);
    let euler = euler_richardson(&p, &s, 1e-6, 0.01);
    let err = scaled_error(&rk4, &euler, &scales);
    assert!(err < 1e-4, "{err}");
}

#[test]
fn euler_converges_at_first_order() {
    let horizon = 0.1;
    let (p, s) = builtin_run("paper_s3", IntegratorConfig::rk4(1e-5, horizon));
    let scales = state_scales(&run(&p, &s));
    let reference = final_state(&p, &s, Method::Rk4, 1e-6, horizon);
    let err = |dt| scaled_error(&final_state(&p, &s, Method::Euler, dt, horizon), &reference, &scales);
    let order = (err(2e-5) / err(1e-5)).log2();
    assert!((order - 1.0).abs() < 0.1, "{order}");
}

#[test]
fn richardson_reference_agrees_with_rk4() {
    let horizon = 0.05;
    let (p, s) = builtin_run("paper_s3", IntegratorConfig::rk4(1e-5, horizon));
    let scales = state_scales(&run(&p, &s));
    let reference = euler_richardson(&p, &s, 1e-5, horizon);
    let rk4 = final_state(&p, &s, Method::Rk4, 1e-5, horizon);
    let err = scaled_error(&rk4, &reference, &scales);
    assert!(err < 1e-6, "{err}");
}

#[test]
fn halving_step_leaves_steady_speed_unchanged() {
    let criteria = |f: f64| SteadyStateCriteria::default().averaged_over(1.0 / f);
    let speeds: Vec<f64> = [1e-4, 5e-5]
        .into_iter()
        .map(|dt| {
            let (p, s) = builtin_run("paper_s3", IntegratorConfig::rk4(dt, 1.0));
            let f = s.excitation.supply.frequency();
            let t = run(&p, &s);
            summarize(&t, &p, f, &criteria(f)).unwrap().final_speed_mech
        })
        .collect();
    let rel = (speeds[0] - speeds[1]).abs() / speeds[1].abs();
    assert!(rel < 1e-6, "{speeds:?} {rel}");
}

#[test]
fn record_every_subsamples_the_same_grid() {
    let (p, s) = builtin_run("paper_s3", IntegratorConfig::rk4(1e-4, 0.05));
    let full = run(&p, &s);
    let mut sparse_s = s.clone();
    sparse_s.integrator = sparse_s.integrator.with_record_every(10);
    let sparse = run(&p, &sparse_s);
    assert_eq!(sparse.len(), 51);
    for (k, r) in sparse.records.iter().enumerate() {
        assert_eq!(r.values(), full.records[10 * k].values());
    }
}

#[test]
fn zero_duration_records_initial_state_only() {
    let (p, mut s) = builtin_run("paper_s3", IntegratorConfig::rk4(1e-4, 0.0));
    s.initial_state = MachineState { omega_mech: 12.5, ..Default::default() };
    let trace = run(&p, &s);
    assert_eq!(trace.len(), 1);
    assert_eq!(trace.records[0].t, 0.0);
    assert_eq!(trace.records[0].omega_mech, 12.5);
}

#[test]
fn electrical_state_convention_scales_acceleration() {
    let (p, s) = builtin_run("paper_s3", IntegratorConfig::rk4(1e-4, 0.05));
    let mut e = s.clone();
    e.options.speed_convention = SpeedConvention::ElectricalState;
    let mech = run(&p, &s);
    let elec = run(&p, &e);
    // Early on, before the flux build-up differs appreciably, the
    // electrical-state speed rises at 1/p of the mechanical-state rate.
    let k = 20;
    let ratio = elec.records[k].omega_mech / mech.records[k].omega_mech;
    assert!((ratio - 0.5).abs() < 1e-3, "{ratio}");
    assert!(elec.records.iter().all(|r| r.omega_mech.is_finite()));
}

#[test]
fn blocked_rotor_holds_speed() {
    let (p, s) = builtin_run("blocked_rotor", IntegratorConfig::rk4(1e-4, 0.1));
    let trace = run(&p, &s);
    assert!(trace.records.iter().all(|r| r.omega_mech == 0.0));
    assert!(trace.records.iter().any(|r| r.torque_e.abs() > 0.1));
}

#[test]
fn non_finite_state_aborts_with_partial_trace() {
    let (p, mut s) = builtin_run("paper_s3", IntegratorConfig::euler(1.0, 5.0));
    s.integrator.duration = 50.0;
    let err = twophase::integrate(&p, &s).unwrap_err();
    assert!(err.error.time > 0.0);
    assert!(!err.partial.is_empty());
    assert!(err.partial.records.iter().all(|r| r.state().is_finite()));
}
