//! Python bindings: machine parameters, the algebraic maps, the state
//! derivative, and whole-config simulation returning plain dicts and lists.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use twophase::config::{builtin, parse_config, BUILTIN_NAMES};
use twophase::{
    energy_audit, integrate, summarize, ExcitationSample, FluxLinkages, MachineState,
    ModelOptions, SpeedConvention, TorqueModel, TraceRecord, ValidatedParameters,
    WindingCurrents,
};

create_exception!(twophase_py, NumericalError, PyRuntimeError);

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Machine constants in SI units, rotor quantities referred to the stator.
#[pyclass(name = "MachineParameters", get_all, set_all, from_py_object)]
#[derive(Debug, Clone)]
pub struct PyMachineParameters {
    pub r_s_alpha: f64,
    pub r_s_beta: f64,
    pub r_r_alpha: f64,
    pub r_r_beta: f64,
    pub l_s_alpha: f64,
    pub l_s_beta: f64,
    pub l_r_alpha: f64,
    pub l_r_beta: f64,
    pub l_m_alpha: f64,
    pub l_m_beta: f64,
    pub turns_ratio_a: f64,
    pub pole_pairs: u32,
    pub inertia_j: f64,
}

impl From<twophase::MachineParameters> for PyMachineParameters {
    fn from(p: twophase::MachineParameters) -> Self {
        Self {
            r_s_alpha: p.r_s_alpha,
            r_s_beta: p.r_s_beta,
            r_r_alpha: p.r_r_alpha,
            r_r_beta: p.r_r_beta,
            l_s_alpha: p.l_s_alpha,
            l_s_beta: p.l_s_beta,
            l_r_alpha: p.l_r_alpha,
            l_r_beta: p.l_r_beta,
            l_m_alpha: p.l_m_alpha,
            l_m_beta: p.l_m_beta,
            turns_ratio_a: p.turns_ratio_a,
            pole_pairs: p.pole_pairs,
            inertia_j: p.inertia_j,
        }
    }
}

impl From<&PyMachineParameters> for twophase::MachineParameters {
    fn from(p: &PyMachineParameters) -> Self {
        Self {
            r_s_alpha: p.r_s_alpha,
            r_s_beta: p.r_s_beta,
            r_r_alpha: p.r_r_alpha,
            r_r_beta: p.r_r_beta,
            l_s_alpha: p.l_s_alpha,
            l_s_beta: p.l_s_beta,
            l_r_alpha: p.l_r_alpha,
            l_r_beta: p.l_r_beta,
            l_m_alpha: p.l_m_alpha,
            l_m_beta: p.l_m_beta,
            turns_ratio_a: p.turns_ratio_a,
            pole_pairs: p.pole_pairs,
            inertia_j: p.inertia_j,
        }
    }
}

impl PyMachineParameters {
    fn checked(&self) -> PyResult<ValidatedParameters> {
        twophase::MachineParameters::from(self).validate().map_err(value_error)
    }
}

#[pymethods]
impl PyMachineParameters {
    #[new]
    #[allow(clippy::too_many_arguments)]
    #[pyo3(signature = (
        *, r_s_alpha, r_s_beta, r_r_alpha, r_r_beta, l_s_alpha, l_s_beta, l_r_alpha,
        l_r_beta, l_m_alpha, l_m_beta, turns_ratio_a, pole_pairs, inertia_j
    ))]
    fn new(
        r_s_alpha: f64,
        r_s_beta: f64,
        r_r_alpha: f64,
        r_r_beta: f64,
        l_s_alpha: f64,
        l_s_beta: f64,
        l_r_alpha: f64,
        l_r_beta: f64,
        l_m_alpha: f64,
        l_m_beta: f64,
        turns_ratio_a: f64,
        pole_pairs: u32,
        inertia_j: f64,
    ) -> Self {
        Self {
            r_s_alpha,
            r_s_beta,
            r_r_alpha,
            r_r_beta,
            l_s_alpha,
            l_s_beta,
            l_r_alpha,
            l_r_beta,
            l_m_alpha,
            l_m_beta,
            turns_ratio_a,
            pole_pairs,
            inertia_j,
        }
    }

    /// The quarter-horsepower 4-pole reference machine.
    #[staticmethod]
    fn reference() -> Self {
        twophase::MachineParameters::reference_quarter_hp().into()
    }

    /// Copy with the main-winding (β) values on both axes and a = 1.
    fn symmetric_from_main(&self) -> Self {
        twophase::MachineParameters::from(self).symmetric_from_main().into()
    }

    /// Raises ValueError when the set is not physically admissible.
    fn validate(&self) -> PyResult<()> {
        self.checked().map(|_| ())
    }

    fn __repr__(&self) -> String {
        format!("{:?}", twophase::MachineParameters::from(self))
    }
}

fn parse_torque_model(s: &str) -> PyResult<TorqueModel> {
    match s {
        "mutual_inductance" => Ok(TorqueModel::MutualInductance),
        "energy_consistent" => Ok(TorqueModel::EnergyConsistent),
        _ => Err(value_error(format!(
            "torque_model must be `mutual_inductance` or `energy_consistent` (got `{s}`)"
        ))),
    }
}

fn parse_speed_convention(s: &str) -> PyResult<SpeedConvention> {
    match s {
        "mechanical_state" => Ok(SpeedConvention::MechanicalState),
        "electrical_state" => Ok(SpeedConvention::ElectricalState),
        _ => Err(value_error(format!(
            "speed_convention must be `mechanical_state` or `electrical_state` (got `{s}`)"
        ))),
    }
}

/// `(i_sa, i_sb, i_ra, i_rb)` to `(psi_sa, psi_sb, psi_ra, psi_rb)`.
#[pyfunction]
fn fluxes_from_currents(params: &PyMachineParameters, currents: [f64; 4]) -> PyResult<[f64; 4]> {
    let p = params.checked()?;
    Ok(twophase::fluxes_from_currents(&p, &WindingCurrents::from_array(currents)).as_array())
}

/// `(psi_sa, psi_sb, psi_ra, psi_rb)` to `(i_sa, i_sb, i_ra, i_rb)`.
#[pyfunction]
fn currents_from_fluxes(params: &PyMachineParameters, fluxes: [f64; 4]) -> PyResult<[f64; 4]> {
    let p = params.checked()?;
    Ok(twophase::currents_from_fluxes(&p, &FluxLinkages::from_array(fluxes)).as_array())
}

#[pyfunction]
fn electromagnetic_torque(params: &PyMachineParameters, currents: [f64; 4]) -> PyResult<f64> {
    let p = params.checked()?;
    Ok(twophase::electromagnetic_torque(&p, &WindingCurrents::from_array(currents)))
}

#[pyfunction]
fn energy_consistent_torque(
    params: &PyMachineParameters,
    fluxes: [f64; 4],
    currents: [f64; 4],
) -> PyResult<f64> {
    let p = params.checked()?;
    Ok(twophase::energy_consistent_torque(
        &p,
        &FluxLinkages::from_array(fluxes),
        &WindingCurrents::from_array(currents),
    ))
}

/// Time derivative of `(psi_sa, psi_sb, psi_ra, psi_rb, omega_mech)`.
#[pyfunction]
#[pyo3(signature = (
    params, state, v_s_alpha, v_s_beta, load_torque = 0.0, *,
    torque_model = "mutual_inductance", speed_convention = "mechanical_state",
    blocked_rotor = false
))]
#[allow(clippy::too_many_arguments)]
fn state_derivative(
    params: &PyMachineParameters,
    state: [f64; 5],
    v_s_alpha: f64,
    v_s_beta: f64,
    load_torque: f64,
    torque_model: &str,
    speed_convention: &str,
    blocked_rotor: bool,
) -> PyResult<[f64; 5]> {
    let p = params.checked()?;
    let opts = ModelOptions {
        speed_convention: parse_speed_convention(speed_convention)?,
        torque_model: parse_torque_model(torque_model)?,
        blocked_rotor,
    };
    let u = ExcitationSample { v_s_alpha, v_s_beta, load_torque };
    Ok(twophase::state_derivative(&p, &MachineState::from_array(state), &u, &opts).as_array())
}

#[pyfunction]
fn builtin_names() -> Vec<&'static str> {
    BUILTIN_NAMES.to_vec()
}

/// Text of a built-in config.
#[pyfunction]
fn builtin_config(name: &str) -> PyResult<&'static str> {
    builtin(name).ok_or_else(|| value_error(format!("unknown built-in config `{name}`")))
}

/// Parses and validates config text; returns it with all defaults expanded.
#[pyfunction]
fn validate_config(text: &str) -> PyResult<String> {
    parse_config(text).map(|c| c.to_text()).map_err(value_error)
}

fn trace_columns<'py>(
    py: Python<'py>,
    records: &[TraceRecord],
) -> PyResult<Bound<'py, PyDict>> {
    let cols = PyDict::new(py);
    for (k, name) in TraceRecord::COLUMNS.iter().enumerate() {
        let v: Vec<f64> = records.iter().map(|r| r.values()[k]).collect();
        cols.set_item(*name, v)?;
    }
    Ok(cols)
}

/// Runs a config and returns `{"trace": {column: [...]}, "summary": {...} | None,
/// "summary_note": str | None, "energy": {...}}`.
///
/// Raises ValueError for invalid configs and NumericalError when the state
/// stops being finite; the exception's second argument holds the partial
/// trace columns.
#[pyfunction]
#[pyo3(signature = (config_text, *, record_every = None))]
fn simulate<'py>(
    py: Python<'py>,
    config_text: &str,
    record_every: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let mut config = parse_config(config_text).map_err(value_error)?;
    if let Some(n) = record_every {
        config.integrator.record_every = n;
    }
    let run = config.resolve().map_err(value_error)?;

    let trace = match py.detach(|| integrate(&run.params, &run.scenario)) {
        Ok(t) => t,
        Err(f) => {
            let partial = trace_columns(py, &f.partial.records)?;
            return Err(NumericalError::new_err((f.error.to_string(), partial.unbind())));
        }
    };

    let out = PyDict::new(py);
    out.set_item("trace", trace_columns(py, &trace.records)?)?;

    match summarize(&trace, &run.params, run.supply_frequency, &run.criteria) {
        Ok(s) => {
            let d = PyDict::new(py);
            d.set_item("steady_state_reached", s.steady_state_reached)?;
            d.set_item("settle_time", s.settle_time)?;
            d.set_item("window_start", s.window_start)?;
            d.set_item("final_speed_mech", s.final_speed_mech)?;
            d.set_item("synchronous_speed_mech", s.synchronous_speed_mech)?;
            d.set_item("slip", s.slip)?;
            d.set_item("mean_torque", s.mean_torque)?;
            d.set_item("torque_ripple_pp", s.torque_ripple_pp)?;
            d.set_item("stator_current_rms_alpha", s.stator_current_rms_alpha)?;
            d.set_item("stator_current_rms_beta", s.stator_current_rms_beta)?;
            out.set_item("summary", d)?;
            out.set_item("summary_note", py.None())?;
        }
        Err(e) => {
            out.set_item("summary", py.None())?;
            out.set_item("summary_note", e.to_string())?;
        }
    }

    let e = energy_audit(&trace, &run.params);
    let energy = PyDict::new(py);
    energy.set_item("stator_input_energy", e.stator_input_energy)?;
    energy.set_item("stator_copper_loss", e.stator_copper_loss)?;
    energy.set_item("rotor_copper_loss", e.rotor_copper_loss)?;
    energy.set_item("field_energy_delta", e.field_energy_delta)?;
    energy.set_item("mechanical_energy_out_mutual", e.mutual.mechanical_energy_out)?;
    energy.set_item("residual_mutual", e.mutual.residual)?;
    energy.set_item(
        "mechanical_energy_out_energy_consistent",
        e.energy_consistent.mechanical_energy_out,
    )?;
    energy.set_item("residual_energy_consistent", e.energy_consistent.residual)?;
    energy.set_item(
        "relative_residual_mutual",
        e.relative_residual(TorqueModel::MutualInductance),
    )?;
    energy.set_item(
        "relative_residual_energy_consistent",
        e.relative_residual(TorqueModel::EnergyConsistent),
    )?;
    out.set_item("energy", energy)?;
    Ok(out)
}

#[pymodule]
fn twophase_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMachineParameters>()?;
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add("TRACE_COLUMNS", TraceRecord::COLUMNS.to_vec())?;
    m.add_function(wrap_pyfunction!(fluxes_from_currents, m)?)?;
    m.add_function(wrap_pyfunction!(currents_from_fluxes, m)?)?;
    m.add_function(wrap_pyfunction!(electromagnetic_torque, m)?)?;
    m.add_function(wrap_pyfunction!(energy_consistent_torque, m)?)?;
    m.add_function(wrap_pyfunction!(state_derivative, m)?)?;
    m.add_function(wrap_pyfunction!(builtin_names, m)?)?;
    m.add_function(wrap_pyfunction!(builtin_config, m)?)?;
    m.add_function(wrap_pyfunction!(validate_config, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
