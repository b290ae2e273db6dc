//! Machine parameters and the algebraic side of the stationary-frame model:
//! flux maps, torque, and the explicit state derivative.
//!
//! The α axis carries the auxiliary stator winding and the β axis the main
//! winding. Rotor quantities are referred to the stator winding of the same
//! axis, so the two rotor axes differ by the turns ratio `a`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Raw machine parameters. Use [`MachineParameters::validate`] before
/// handing them to any of the model functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineParameters {
    /// Auxiliary (α) stator winding resistance, ohm.
    pub r_s_alpha: f64,
    /// Main (β) stator winding resistance, ohm.
    pub r_s_beta: f64,
    pub r_r_alpha: f64,
    pub r_r_beta: f64,
    pub l_s_alpha: f64,
    pub l_s_beta: f64,
    pub l_r_alpha: f64,
    pub l_r_beta: f64,
    pub l_m_alpha: f64,
    pub l_m_beta: f64,
    /// Effective auxiliary-to-main turns ratio.
    pub turns_ratio_a: f64,
    pub pole_pairs: u32,
    /// Rotor moment of inertia, kg·m².
    pub inertia_j: f64,
}

impl MachineParameters {
    /// The 230 V, 50 Hz, ¼ HP, 4-pole reference machine.
    pub fn reference_quarter_hp() -> Self {
        Self {
            r_s_alpha: 7.14,
            r_s_beta: 2.02,
            r_r_alpha: 5.74,
            r_r_beta: 4.12,
            l_s_alpha: 0.2549,
            l_s_beta: 0.1846,
            l_r_alpha: 0.2542,
            l_r_beta: 0.1828,
            l_m_alpha: 0.2464,
            l_m_beta: 0.1772,
            turns_ratio_a: 1.18,
            pole_pairs: 2,
            inertia_j: 2.92e-3,
        }
    }

    /// Copy of these parameters with the α axis replaced by the β axis and
    /// a unit turns ratio, i.e. the symmetric machine built from the main
    /// winding.
    pub fn symmetric_from_main(&self) -> Self {
        Self {
            r_s_alpha: self.r_s_beta,
            r_r_alpha: self.r_r_beta,
            l_s_alpha: self.l_s_beta,
            l_r_alpha: self.l_r_beta,
            l_m_alpha: self.l_m_beta,
            turns_ratio_a: 1.0,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<ValidatedParameters, ParameterError> {
        let positive = [
            ("resistance", "r_s_alpha", self.r_s_alpha),
            ("resistance", "r_s_beta", self.r_s_beta),
            ("resistance", "r_r_alpha", self.r_r_alpha),
            ("resistance", "r_r_beta", self.r_r_beta),
            ("inductance", "l_s_alpha", self.l_s_alpha),
            ("inductance", "l_s_beta", self.l_s_beta),
            ("inductance", "l_r_alpha", self.l_r_alpha),
            ("inductance", "l_r_beta", self.l_r_beta),
            ("inductance", "l_m_alpha", self.l_m_alpha),
            ("inductance", "l_m_beta", self.l_m_beta),
            ("turns ratio", "turns_ratio_a", self.turns_ratio_a),
            ("inertia", "inertia_j", self.inertia_j),
        ];
        for (kind, name, value) in positive {
            if !value.is_finite() {
                return Err(ParameterError::NonFinite { name, value });
            }
            if value <= 0.0 {
                return Err(ParameterError::NotPositive { kind, name, value });
            }
        }
        if self.pole_pairs < 1 {
            return Err(ParameterError::PolePairs(self.pole_pairs));
        }

        let axes = [
            (Axis::Alpha, self.l_s_alpha, self.l_r_alpha, self.l_m_alpha),
            (Axis::Beta, self.l_s_beta, self.l_r_beta, self.l_m_beta),
        ];
        for (axis, l_s, l_r, l_m) in axes {
            let det = l_s * l_r - l_m * l_m;
            if det <= 0.0 {
                return Err(ParameterError::Leakage { axis, determinant: det });
            }
        }
        for (axis, l_s, l_r, l_m) in axes {
            let limit = l_s.min(l_r);
            if l_m > limit {
                return Err(ParameterError::MagnetizingExceedsSelf { axis, l_m, limit });
            }
        }

        Ok(ValidatedParameters {
            params: *self,
            det_alpha: self.l_s_alpha * self.l_r_alpha - self.l_m_alpha * self.l_m_alpha,
            det_beta: self.l_s_beta * self.l_r_beta - self.l_m_beta * self.l_m_beta,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Alpha,
    Beta,
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Axis::Alpha => f.write_str("alpha"),
            Axis::Beta => f.write_str("beta"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParameterError {
    #[error("{name} must be finite (got {value})")]
    NonFinite { name: &'static str, value: f64 },
    #[error("{kind} must be positive ({name} = {value})")]
    NotPositive {
        kind: &'static str,
        name: &'static str,
        value: f64,
    },
    #[error("pole_pairs must be at least 1 (got {0})")]
    PolePairs(u32),
    #[error("leakage condition violated on {axis} axis: l_s*l_r - l_m^2 = {determinant}")]
    Leakage { axis: Axis, determinant: f64 },
    #[error("magnetizing inductance exceeds self inductance on {axis} axis: l_m = {l_m} > {limit}")]
    MagnetizingExceedsSelf { axis: Axis, l_m: f64, limit: f64 },
}

/// Parameters that passed [`MachineParameters::validate`]. Carries the
/// per-axis inductance determinants, which are strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidatedParameters {
    params: MachineParameters,
    det_alpha: f64,
    det_beta: f64,
}

impl ValidatedParameters {
    pub fn params(&self) -> &MachineParameters {
        &self.params
    }

    pub fn pole_pairs(&self) -> f64 {
        f64::from(self.params.pole_pairs)
    }
}

impl std::ops::Deref for ValidatedParameters {
    type Target = MachineParameters;

    fn deref(&self) -> &MachineParameters {
        &self.params
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WindingCurrents {
    pub i_s_alpha: f64,
    pub i_s_beta: f64,
    pub i_r_alpha: f64,
    pub i_r_beta: f64,
}

impl WindingCurrents {
    pub fn as_array(&self) -> [f64; 4] {
        [self.i_s_alpha, self.i_s_beta, self.i_r_alpha, self.i_r_beta]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self {
            i_s_alpha: a[0],
            i_s_beta: a[1],
            i_r_alpha: a[2],
            i_r_beta: a[3],
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FluxLinkages {
    pub psi_s_alpha: f64,
    pub psi_s_beta: f64,
    pub psi_r_alpha: f64,
    pub psi_r_beta: f64,
}

impl FluxLinkages {
    pub fn as_array(&self) -> [f64; 4] {
        [self.psi_s_alpha, self.psi_s_beta, self.psi_r_alpha, self.psi_r_beta]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self {
            psi_s_alpha: a[0],
            psi_s_beta: a[1],
            psi_r_alpha: a[2],
            psi_r_beta: a[3],
        }
    }
}

/// The five integrated states.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MachineState {
    pub psi_s_alpha: f64,
    pub psi_s_beta: f64,
    pub psi_r_alpha: f64,
    pub psi_r_beta: f64,
    /// Rotor mechanical speed, rad/s.
    pub omega_mech: f64,
}

impl MachineState {
    pub fn at_rest() -> Self {
        Self::default()
    }

    pub fn fluxes(&self) -> FluxLinkages {
        FluxLinkages {
            psi_s_alpha: self.psi_s_alpha,
            psi_s_beta: self.psi_s_beta,
            psi_r_alpha: self.psi_r_alpha,
            psi_r_beta: self.psi_r_beta,
        }
    }

    pub fn as_array(&self) -> [f64; 5] {
        [
            self.psi_s_alpha,
            self.psi_s_beta,
            self.psi_r_alpha,
            self.psi_r_beta,
            self.omega_mech,
        ]
    }

    pub fn from_array(a: [f64; 5]) -> Self {
        Self {
            psi_s_alpha: a[0],
            psi_s_beta: a[1],
            psi_r_alpha: a[2],
            psi_r_beta: a[3],
            omega_mech: a[4],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|x| x.is_finite())
    }

    /// `self + h * d`, component-wise.
    pub fn offset(&self, d: &StateDerivative, h: f64) -> Self {
        let x = self.as_array();
        let dx = d.as_array();
        Self::from_array(std::array::from_fn(|k| x[k] + h * dx[k]))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ElectricalOutputs {
    pub i_s_alpha: f64,
    pub i_s_beta: f64,
    pub i_r_alpha: f64,
    pub i_r_beta: f64,
    pub torque_e: f64,
}

impl ElectricalOutputs {
    pub fn currents(&self) -> WindingCurrents {
        WindingCurrents {
            i_s_alpha: self.i_s_alpha,
            i_s_beta: self.i_s_beta,
            i_r_alpha: self.i_r_alpha,
            i_r_beta: self.i_r_beta,
        }
    }
}

/// Time derivative of [`MachineState`]: V for the flux rows, rad/s² for speed.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StateDerivative {
    pub d_psi_s_alpha: f64,
    pub d_psi_s_beta: f64,
    pub d_psi_r_alpha: f64,
    pub d_psi_r_beta: f64,
    pub d_omega_mech: f64,
}

impl StateDerivative {
    pub fn as_array(&self) -> [f64; 5] {
        [
            self.d_psi_s_alpha,
            self.d_psi_s_beta,
            self.d_psi_r_alpha,
            self.d_psi_r_beta,
            self.d_omega_mech,
        ]
    }

    pub fn from_array(a: [f64; 5]) -> Self {
        Self {
            d_psi_s_alpha: a[0],
            d_psi_s_beta: a[1],
            d_psi_r_alpha: a[2],
            d_psi_r_beta: a[3],
            d_omega_mech: a[4],
        }
    }
}

/// How the single rotor-speed symbol of the model is read.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeedConvention {
    /// State is mechanical speed; rotor speed voltages use `p_p * omega_mech`;
    /// the swing equation acts on mechanical speed with the physical inertia.
    #[default]
    MechanicalState,
    /// Speed is electrical everywhere: `J * d(omega_e)/dt = T_e - T_L`.
    /// The stored state is still `omega_e / p_p`.
    ElectricalState,
}

/// Which torque expression drives the mechanical equation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TorqueModel {
    /// `p_p (L_mβ i_sβ i_rα − L_mα i_sα i_rβ)`.
    #[default]
    MutualInductance,
    /// Torque implied by the rotor speed-voltage power, see
    /// [`energy_consistent_torque`].
    EnergyConsistent,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelOptions {
    pub speed_convention: SpeedConvention,
    pub torque_model: TorqueModel,
    /// Hold the rotor: speed derivative forced to zero.
    pub blocked_rotor: bool,
}

/// Applied stator voltages and load torque at one instant.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ExcitationSample {
    pub v_s_alpha: f64,
    pub v_s_beta: f64,
    pub load_torque: f64,
}

pub fn fluxes_from_currents(p: &ValidatedParameters, i: &WindingCurrents) -> FluxLinkages {
    FluxLinkages {
        psi_s_alpha: p.l_s_alpha * i.i_s_alpha + p.l_m_alpha * i.i_r_alpha,
        psi_s_beta: p.l_s_beta * i.i_s_beta + p.l_m_beta * i.i_r_beta,
        psi_r_alpha: p.l_m_alpha * i.i_s_alpha + p.l_r_alpha * i.i_r_alpha,
        psi_r_beta: p.l_m_beta * i.i_s_beta + p.l_r_beta * i.i_r_beta,
    }
}

pub fn currents_from_fluxes(p: &ValidatedParameters, psi: &FluxLinkages) -> WindingCurrents {
    WindingCurrents {
        i_s_alpha: (p.l_r_alpha * psi.psi_s_alpha - p.l_m_alpha * psi.psi_r_alpha) / p.det_alpha,
        i_s_beta: (p.l_r_beta * psi.psi_s_beta - p.l_m_beta * psi.psi_r_beta) / p.det_beta,
        i_r_alpha: (p.l_s_alpha * psi.psi_r_alpha - p.l_m_alpha * psi.psi_s_alpha) / p.det_alpha,
        i_r_beta: (p.l_s_beta * psi.psi_r_beta - p.l_m_beta * psi.psi_s_beta) / p.det_beta,
    }
}

pub fn electromagnetic_torque(p: &ValidatedParameters, i: &WindingCurrents) -> f64 {
    p.pole_pairs()
        * (p.l_m_beta * i.i_s_beta * i.i_r_alpha - p.l_m_alpha * i.i_s_alpha * i.i_r_beta)
}

/// Shaft torque whose power `T * omega_mech` equals the power removed from
/// the rotor circuits by the speed-voltage terms. The `omega_e / omega_mech`
/// ratio is folded into `p_p`, so the expression is regular at zero speed.
pub fn energy_consistent_torque(
    p: &ValidatedParameters,
    psi: &FluxLinkages,
    i: &WindingCurrents,
) -> f64 {
    let a = p.turns_ratio_a;
    p.pole_pairs() * (a * psi.psi_r_beta * i.i_r_alpha - psi.psi_r_alpha * i.i_r_beta / a)
}

/// Currents and torque for a state, using the torque expression selected by
/// `torque_model`.
pub fn electrical_outputs(
    p: &ValidatedParameters,
    state: &MachineState,
    torque_model: TorqueModel,
) -> ElectricalOutputs {
    let psi = state.fluxes();
    let i = currents_from_fluxes(p, &psi);
    let torque_e = match torque_model {
        TorqueModel::MutualInductance => electromagnetic_torque(p, &i),
        TorqueModel::EnergyConsistent => energy_consistent_torque(p, &psi, &i),
    };
    ElectricalOutputs {
        i_s_alpha: i.i_s_alpha,
        i_s_beta: i.i_s_beta,
        i_r_alpha: i.i_r_alpha,
        i_r_beta: i.i_r_beta,
        torque_e,
    }
}

/// Magnetic field energy `½ Σ Ψ·i`; meaningful because the flux maps are linear.
pub fn field_energy(psi: &FluxLinkages, i: &WindingCurrents) -> f64 {
    0.5 * (psi.psi_s_alpha * i.i_s_alpha
        + psi.psi_s_beta * i.i_s_beta
        + psi.psi_r_alpha * i.i_r_alpha
        + psi.psi_r_beta * i.i_r_beta)
}

pub fn state_derivative(
    p: &ValidatedParameters,
    state: &MachineState,
    input: &ExcitationSample,
    opts: &ModelOptions,
) -> StateDerivative {
    let out = electrical_outputs(p, state, opts.torque_model);
    let a = p.turns_ratio_a;
    let omega_e = p.pole_pairs() * state.omega_mech;

    let d_omega_mech = if opts.blocked_rotor {
        0.0
    } else {
        let accel = (out.torque_e - input.load_torque) / p.inertia_j;
        match opts.speed_convention {
            SpeedConvention::MechanicalState => accel,
            SpeedConvention::ElectricalState => accel / p.pole_pairs(),
        }
    };

    StateDerivative {
        d_psi_s_alpha: input.v_s_alpha - p.r_s_alpha * out.i_s_alpha,
        d_psi_s_beta: input.v_s_beta - p.r_s_beta * out.i_s_beta,
        d_psi_r_alpha: -p.r_r_alpha * out.i_r_alpha - a * omega_e * state.psi_r_beta,
        d_psi_r_beta: -p.r_r_beta * out.i_r_beta + omega_e * state.psi_r_alpha / a,
        d_omega_mech,
    }
}
