//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use rand::{rngs::StdRng, Rng, SeedableRng};
use twophase::config::{builtin, parse_config};
use twophase::output::{read_trace_csv, TRACE_HEADER};
use twophase::{
    currents_from_fluxes, energy_audit, fluxes_from_currents, summarize, IntegratorConfig,
    MachineParameters, Method, PhaseSequence, TorqueModel, WindingCurrents,
};

use common::*;

const T_LOAD: f64 = 1.0096;
/// 2π·50 / 2.
const SYNC_SPEED: f64 = 157.079_632_679_489_66;

type Check = fn() -> Result<String, String>;

fn ensure(ok: bool, detail: String) -> Result<String, String> {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn reference_scenario() -> Result<String, String> {
    let started = Instant::now();
    let (p, scenario) = builtin_run("paper_s3", IntegratorConfig::rk4(1e-4, 1.0));
    let trace = run(&p, &scenario);
    let elapsed = started.elapsed().as_secs_f64();
    let crit = builtin_config("paper_s3").resolve().unwrap().criteria;
    let s = summarize(&trace, &p, 50.0, &crit).map_err(|e| e.to_string())?;
    let torque_err = (s.mean_torque - T_LOAD).abs() / T_LOAD;
    ensure(
        s.final_speed_mech > 0.0
            && s.final_speed_mech < SYNC_SPEED
            && torque_err <= 0.01
            && elapsed < 2.0,
        format!(
            "settled at {:.3} s, speed {:.4} rad/s (< {SYNC_SPEED:.2}), mean T_e {:.5} N·m \
             (error {:.3}%), run {:.3} s",
            s.settle_time,
            s.final_speed_mech,
            s.mean_torque,
            100.0 * torque_err,
            elapsed
        ),
    )
}

fn symmetric_reduction() -> Result<String, String> {
    let config = builtin_config("symmetric_check");
    let r = config.resolve().unwrap();
    let trace = run(&r.params, &r.scenario);
    let s = summarize(&trace, &r.params, r.supply_frequency, &r.criteria).map_err(|e| e.to_string())?;
    let ripple = s.torque_ripple_pp / s.mean_torque;

    // Relative to the size of the products summed in the torque
    // expressions, so that zero crossings of T_e do not divide by ~0.
    let pp = r.params.pole_pairs();
    let worst = trace
        .records
        .iter()
        .map(|rec| {
            let scale = pp
                * (r.params.l_m_beta * (rec.i_s_beta * rec.i_r_alpha).abs()
                    + r.params.l_m_alpha * (rec.i_s_alpha * rec.i_r_beta).abs());
            if scale == 0.0 {
                (rec.torque_e - rec.torque_e_ec).abs()
            } else {
                (rec.torque_e - rec.torque_e_ec).abs() / scale
            }
        })
        .fold(0.0, f64::max);
    ensure(
        ripple < 0.02 && worst <= 1e-10,
        format!(
            "ripple {:.4}% of mean {:.5} N·m; max torque disagreement {:.2e} relative over {} points",
            100.0 * ripple,
            s.mean_torque,
            worst,
            trace.len()
        ),
    )
}

fn flux_round_trip() -> Result<String, String> {
    let p = MachineParameters::reference_quarter_hp().validate().unwrap();
    let mut rng = StdRng::seed_from_u64(0x5eed_2024);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let i = WindingCurrents::from_array(std::array::from_fn(|_| rng.random_range(-50.0..50.0)));
        let back = currents_from_fluxes(&p, &fluxes_from_currents(&p, &i));
        let norm = i.as_array().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let err = i
            .as_array()
            .iter()
            .zip(back.as_array())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        worst = worst.max(err / norm);
    }
    ensure(worst <= 1e-12, format!("max relative error {worst:.2e} over 1000 vectors"))
}

fn oracle_equivalence() -> Result<String, String> {
    let (p, rk) = builtin_run("paper_s3", IntegratorConfig::rk4(1e-4, 0.2));
    let (_, eu) = builtin_run(
        "paper_s3",
        IntegratorConfig { method: Method::Euler, step_size: 1e-7, duration: 0.2, record_every: 1000 },
    );
    let a = run(&p, &rk);
    let b = run(&p, &eu);
    if a.len() != b.len() {
        return Err(format!("record counts differ: {} vs {}", a.len(), b.len()));
    }
    let scales = state_scales(&b);
    let mut worst = [0.0f64; 5];
    for (x, y) in a.records.iter().zip(&b.records) {
        assert!((x.t - y.t).abs() < 1e-12);
        for (k, (u, v)) in x.state().as_array().iter().zip(y.state().as_array()).enumerate() {
            worst[k] = worst[k].max((u - v).abs() / scales[k]);
        }
    }
    ensure(
        worst.iter().all(|&w| w < 1e-3),
        format!(
            "max deviation relative to peak: psi_sa {:.2e}, psi_sb {:.2e}, psi_ra {:.2e}, \
             psi_rb {:.2e}, omega {:.2e}",
            worst[0], worst[1], worst[2], worst[3], worst[4]
        ),
    )
}

fn convergence_order() -> Result<String, String> {
    let horizon = 0.1;
    let (p, scenario) = builtin_run("paper_s3", IntegratorConfig::rk4(1e-4, horizon));
    let scales = state_scales(&run(&p, &scenario));

    let raw = final_state(&p, &scenario, Method::Euler, 1e-7, horizon);
    let reference = euler_richardson(&p, &scenario, 1e-7, horizon);
    let coarse = final_state(&p, &scenario, Method::Rk4, 2e-4, horizon);
    let fine = final_state(&p, &scenario, Method::Rk4, 1e-4, horizon);

    let order = |r| {
        let e1 = scaled_error(&coarse, r, &scales);
        let e2 = scaled_error(&fine, r, &scales);
        ((e1 / e2).log2(), e1, e2)
    };
    let (q, e1, e2) = order(&reference);
    let (q_raw, _, _) = order(&raw);
    ensure(
        q >= 3.5,
        format!(
            "order {q:.3} (errors {e1:.2e} at 2e-4, {e2:.2e} at 1e-4) against extrapolated \
             Euler 1e-7; raw Euler 1e-7 reference error {:.2e} would give {q_raw:.2}",
            scaled_error(&raw, &reference, &scales)
        ),
    )
}

fn energy_audit_closure() -> Result<String, String> {
    let blocked = builtin_config("blocked_rotor").resolve().unwrap();
    let trace = run(&blocked.params, &blocked.scenario);
    let b = energy_audit(&trace, &blocked.params);
    let b_mut = b.relative_residual(TorqueModel::MutualInductance);
    let b_ec = b.relative_residual(TorqueModel::EnergyConsistent);

    let mut ec_config = builtin_config("paper_s3");
    ec_config.model.torque_model = TorqueModel::EnergyConsistent;
    let ec = ec_config.resolve().unwrap();
    let e = energy_audit(&run(&ec.params, &ec.scenario), &ec.params);
    let ec_res = e.relative_residual(TorqueModel::EnergyConsistent);

    let base = builtin_config("paper_s3").resolve().unwrap();
    let m = energy_audit(&run(&base.params, &base.scenario), &base.params);
    let mut_res = m.relative_residual(TorqueModel::MutualInductance);

    ensure(
        b.mutual.mechanical_energy_out == 0.0
            && b.energy_consistent.mechanical_energy_out == 0.0
            && b_mut <= 5e-3
            && b_ec <= 5e-3
            && ec_res <= 5e-3,
        format!(
            "blocked rotor residual {:.2e} of {:.1} J input; reference scenario (energy-consistent \
             torque) residual {:.2e}; mutual-inductance torque residual {:.3e} (reported only)",
            b_mut, b.stator_input_energy, ec_res, mut_res
        ),
    )
}

fn reversal() -> Result<String, String> {
    let speed = |sequence| {
        let mut c = builtin_config("paper_s3");
        c.load.torque = Some(0.0);
        c.supply.sequence = sequence;
        let r = c.resolve().unwrap();
        let trace = run(&r.params, &r.scenario);
        summarize(&trace, &r.params, r.supply_frequency, &r.criteria).map(|s| s.final_speed_mech)
    };
    let fwd = speed(PhaseSequence::Forward).map_err(|e| e.to_string())?;
    let rev = speed(PhaseSequence::Reverse).map_err(|e| e.to_string())?;
    ensure(
        fwd > 0.0 && rev < 0.0 && (fwd + rev).abs() <= 1e-6 * fwd.abs(),
        format!("forward {fwd:.6} rad/s, reversed {rev:.6} rad/s"),
    )
}

fn cli_contract() -> Result<String, String> {
    let bin = env!("CARGO_BIN_EXE_twophase");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().join("s3");
    let status = Command::new(bin)
        .args(["run", "paper_s3", "--output-dir"])
        .arg(&out)
        .output()
        .map_err(|e| e.to_string())?;
    if status.status.code() != Some(0) {
        return Err(format!("run paper_s3 exited {:?}", status.status.code()));
    }
    let text = std::fs::read_to_string(out.join("trace.csv")).map_err(|e| e.to_string())?;
    let golden = include_str!("golden/trace_header.csv");
    let header_ok = text.lines().next() == golden.lines().next() && golden.trim_end() == TRACE_HEADER;
    let trace = read_trace_csv(text.as_bytes()).map_err(|e| e.to_string())?;
    let records = trace.len();

    let validated = Command::new(bin).args(["validate", "paper_s3"]).output().map_err(|e| e.to_string())?;
    let expanded = String::from_utf8_lossy(&validated.stdout);
    let round_trip = validated.status.code() == Some(0)
        && parse_config(&expanded).ok() == parse_config(builtin("paper_s3").unwrap()).ok();

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, builtin("paper_s3").unwrap().replace("l_m_alpha = 0.2464", "l_m_alpha = 0.30"))
        .map_err(|e| e.to_string())?;
    let invalid = Command::new(bin).arg("run").arg(&bad).arg("--output-dir").arg(dir.path())
        .output().map_err(|e| e.to_string())?;
    let blowup = dir.path().join("blowup.toml");
    std::fs::write(&blowup, builtin("paper_s3").unwrap().replace("voltage = 230.0", "voltage = 1e300"))
        .map_err(|e| e.to_string())?;
    let numerical = Command::new(bin).arg("run").arg(&blowup).arg("--output-dir").arg(dir.path())
        .output().map_err(|e| e.to_string())?;

    let codes = (status.status.code(), invalid.status.code(), numerical.status.code());
    ensure(
        header_ok && records == 10001 && round_trip && codes == (Some(0), Some(1), Some(2)),
        format!(
            "header golden {}, {records} records, config round-trip {}, exit codes {:?}",
            if header_ok { "ok" } else { "MISMATCH" },
            if round_trip { "ok" } else { "FAILED" },
            codes
        ),
    )
}

fn main() {
    let checks: [(&str, Check); 8] = [
        ("1 reference scenario settles below synchronous speed", reference_scenario),
        ("2 symmetric reduction", symmetric_reduction),
        ("3 flux/current round-trip", flux_round_trip),
        ("4 RK4 vs Euler oracle", oracle_equivalence),
        ("5 RK4 convergence order", convergence_order),
        ("6 energy audit", energy_audit_closure),
        ("7 phase-sequence reversal", reversal),
        ("8 CLI contract", cli_contract),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|e| Err(format!("panicked: {:?}", e.downcast_ref::<String>())));
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {name}: {detail} ({secs:.2} s)"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {name}: {detail} ({secs:.2} s)");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
