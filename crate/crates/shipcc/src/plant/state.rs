//! State vectors and input/output value types.
//!
//! The differential state vector has 103 entries laid out as:
//!
//! | slice     | meaning                                      |
//! |-----------|----------------------------------------------|
//! | 0..20     | absorber liquid concentrations, 4 comps x 5 layers |
//! | 20..25    | absorber liquid temperatures                 |
//! | 25..45    | absorber gas concentrations                  |
//! | 45..50    | absorber gas temperatures                    |
//! | 50..100   | desorber, same internal layout               |
//! | 100       | lean-rich HX tube temperature (rich side)    |
//! | 101       | lean-rich HX shell temperature (lean side)   |
//! | 102       | reboiler temperature                         |
//!
//! Components are ordered `[N2, CO2, MEA, H2O]`; layer 0 is the column top.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const N_DIFF: usize = 103;
pub const N_ALG: usize = 7;
pub const N_COMP: usize = 4;
pub const N_LAYERS: usize = 5;
pub const N_INPUT: usize = 3;

/// Component indices within concentration blocks.
pub mod comp {
    pub const N2: usize = 0;
    pub const CO2: usize = 1;
    pub const MEA: usize = 2;
    pub const H2O: usize = 3;
}

/// Offsets into the differential state vector.
pub mod idx {
    pub const ABS_LIQ: usize = 0;
    pub const ABS_TL: usize = 20;
    pub const ABS_GAS: usize = 25;
    pub const ABS_TG: usize = 45;
    pub const DES_LIQ: usize = 50;
    pub const DES_TL: usize = 70;
    pub const DES_GAS: usize = 75;
    pub const DES_TG: usize = 95;
    pub const HX_TUBE: usize = 100;
    pub const HX_SHELL: usize = 101;
    pub const T_REB: usize = 102;

    /// Index of component `c`, layer `n` within a concentration block at `base`.
    #[inline]
    pub const fn conc(base: usize, c: usize, n: usize) -> usize {
        base + c * super::N_LAYERS + n
    }
}

/// Indices of all temperature entries; used for divergence checks.
pub const TEMPERATURE_INDICES: [usize; 23] = [
    20, 21, 22, 23, 24, 45, 46, 47, 48, 49, 70, 71, 72, 73, 74, 95, 96, 97, 98, 99, 100, 101, 102,
];

/// Physical temperature envelope (K); leaving it flags a trajectory as diverged.
pub const TEMP_MIN: f64 = 273.0;
pub const TEMP_MAX: f64 = 473.0;

/// The 103 differential states.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantState(pub [f64; N_DIFF]);

impl Serialize for PlantState {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.0.iter())
    }
}

impl<'de> Deserialize<'de> for PlantState {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(deserializer)?;
        PlantState::from_slice(&v).map_err(serde::de::Error::custom)
    }
}

impl PlantState {
    pub fn zeros() -> Self {
        PlantState([0.0; N_DIFF])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn from_slice(s: &[f64]) -> Result<Self> {
        if s.len() != N_DIFF {
            return Err(Error::Shape(format!(
                "plant state needs {N_DIFF} entries, got {}",
                s.len()
            )));
        }
        let mut a = [0.0; N_DIFF];
        a.copy_from_slice(s);
        Ok(PlantState(a))
    }

    /// Reboiler temperature (K).
    pub fn t_reb(&self) -> f64 {
        self.0[idx::T_REB]
    }

    /// True when all temperatures sit inside the physical envelope and every
    /// entry is finite.
    pub fn is_physical(&self) -> bool {
        state_is_physical(&self.0)
    }

    /// Clip all concentration entries to be non-negative (rollout hygiene for
    /// learned predictors; the integrator itself never calls this).
    pub fn clip_concentrations(&mut self) {
        for block in [idx::ABS_LIQ, idx::ABS_GAS, idx::DES_LIQ, idx::DES_GAS] {
            for v in &mut self.0[block..block + N_COMP * N_LAYERS] {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
        }
    }
}

/// Envelope check on a raw state slice; see [`PlantState::is_physical`].
pub fn state_is_physical(x: &[f64]) -> bool {
    if x.iter().any(|v| !v.is_finite()) {
        return false;
    }
    TEMPERATURE_INDICES
        .iter()
        .all(|&i| x[i] > TEMP_MIN && x[i] < TEMP_MAX)
}

/// The 7 algebraic states: reboiler liquid concentrations `[N2, CO2, MEA,
/// H2O]`, boil-up vapor fraction, outlet liquid CO2 mole fraction, and the
/// gas volumetric flow leaving the reboiler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgebraicState(pub [f64; N_ALG]);

impl AlgebraicState {
    pub fn zeros() -> Self {
        AlgebraicState([0.0; N_ALG])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn from_slice(s: &[f64]) -> Result<Self> {
        if s.len() != N_ALG {
            return Err(Error::Shape(format!(
                "algebraic state needs {N_ALG} entries, got {}",
                s.len()
            )));
        }
        let mut a = [0.0; N_ALG];
        a.copy_from_slice(s);
        Ok(AlgebraicState(a))
    }

    pub fn c_liq(&self, component: usize) -> f64 {
        self.0[component]
    }

    /// Boil-up vapor fraction (-).
    pub fn q_reb(&self) -> f64 {
        self.0[4]
    }

    /// Outlet liquid CO2 mole fraction (-).
    pub fn m_co2_out(&self) -> f64 {
        self.0[5]
    }

    /// Gas volumetric flow leaving the reboiler (m3/s).
    pub fn f_g_reb(&self) -> f64 {
        self.0[6]
    }

    /// Clamp into the invariant ranges (used on inferred values).
    pub fn clip_to_invariants(&mut self) {
        for c in &mut self.0[0..4] {
            *c = c.max(0.0);
        }
        self.0[4] = self.0[4].clamp(0.0, 1.0);
        self.0[5] = self.0[5].clamp(0.0, 1.0);
        self.0[6] = self.0[6].max(0.0);
    }
}

/// Control input bounds (lower, upper) in order `[F_L, F_fuel, F_sw]`.
pub const INPUT_LO: [f64; N_INPUT] = [0.02, 0.194, 0.02];
pub const INPUT_HI: [f64; N_INPUT] = [0.04, 0.333, 0.04];

/// The three manipulated variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlInput {
    /// Solvent volumetric flow (m3/s).
    pub f_l: f64,
    /// Gas-turbine fuel mass flow (kg/s).
    pub f_fuel: f64,
    /// Seawater volumetric flow (m3/s).
    pub f_sw: f64,
}

impl ControlInput {
    pub fn new(f_l: f64, f_fuel: f64, f_sw: f64) -> Self {
        ControlInput { f_l, f_fuel, f_sw }
    }

    /// Midpoint of the input box; the nominal operating input.
    pub fn box_midpoint() -> Self {
        ControlInput {
            f_l: 0.5 * (INPUT_LO[0] + INPUT_HI[0]),
            f_fuel: 0.5 * (INPUT_LO[1] + INPUT_HI[1]),
            f_sw: 0.5 * (INPUT_LO[2] + INPUT_HI[2]),
        }
    }

    pub fn to_array(self) -> [f64; N_INPUT] {
        [self.f_l, self.f_fuel, self.f_sw]
    }

    pub fn from_array(a: [f64; N_INPUT]) -> Self {
        ControlInput {
            f_l: a[0],
            f_fuel: a[1],
            f_sw: a[2],
        }
    }

    pub fn clip_to_box(mut self) -> Self {
        self.f_l = self.f_l.clamp(INPUT_LO[0], INPUT_HI[0]);
        self.f_fuel = self.f_fuel.clamp(INPUT_LO[1], INPUT_HI[1]);
        self.f_sw = self.f_sw.clamp(INPUT_LO[2], INPUT_HI[2]);
        self
    }

    pub fn in_box(&self) -> bool {
        let a = self.to_array();
        (0..N_INPUT).all(|i| a[i] >= INPUT_LO[i] - 1e-12 && a[i] <= INPUT_HI[i] + 1e-12)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.f_l.is_finite() || !self.f_fuel.is_finite() || !self.f_sw.is_finite() {
            return Err(Error::InputDomain("control inputs must be finite".into()));
        }
        Ok(())
    }
}

/// Engine load ratio, the known disturbance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disturbance(pub f64);

impl Disturbance {
    pub fn validate(&self) -> Result<()> {
        if !self.0.is_finite() || !(0.0..=1.0).contains(&self.0) {
            return Err(Error::InputDomain(format!(
                "engine load must lie in [0, 1], got {}",
                self.0
            )));
        }
        Ok(())
    }
}

/// Controlled outputs: CO2 mass flow in the treated gas and the reboiler
/// temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantOutput {
    /// CO2 mass flow released with the treated gas (kg/s).
    pub f_co2_out: f64,
    /// Reboiler temperature (K).
    pub t_reb: f64,
}

impl PlantOutput {
    pub fn to_array(self) -> [f64; 2] {
        [self.f_co2_out, self.t_reb]
    }
}
