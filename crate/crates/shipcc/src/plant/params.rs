//! Plant parameter sets.
//!
//! One structure carries every physical constant so the truth simulator and
//! the imperfect first-principles model share a single code path. The two
//! variants differ in exactly four closure constants (gas/liquid film
//! constants, interfacial heat-transfer multiplier, desorber enhancement
//! multiplier); everything else is identical.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Which parameter set a [`PlantParameters`] value represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamVariant {
    Truth,
    Imperfect,
}

impl std::fmt::Display for ParamVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParamVariant::Truth => write!(f, "truth"),
            ParamVariant::Imperfect => write!(f, "imperfect"),
        }
    }
}

impl std::str::FromStr for ParamVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "truth" => Ok(ParamVariant::Truth),
            "imperfect" => Ok(ParamVariant::Imperfect),
            other => Err(Error::Config(format!(
                "unknown parameter set `{other}` (expected `truth` or `imperfect`)"
            ))),
        }
    }
}

/// Ship-engine, waste-heat-recovery, and gas-turbine constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineParams {
    /// Power output per engine at full load (kW).
    pub q_e: f64,
    /// Specific fuel oil consumption (kg/kWh).
    pub w_sfoc: f64,
    /// Carbon fraction of the fuel (-).
    pub q_fuel_c: f64,
    /// Molar mass of carbon (kg/kmol).
    pub r_c: f64,
    /// Molar mass of CO2 (kg/kmol).
    pub r_co2: f64,
    /// CO2 mole fraction in the flue gas (-).
    pub q_flue_co2: f64,
    /// Flue gas density (kg/m3).
    pub rho_flue: f64,
    /// Flue gas heat capacity (kJ/(kg K)).
    pub cp_flue: f64,
    /// Waste-heat-recovery inlet temperature (K).
    pub t_rec_in: f64,
    /// Waste-heat-recovery outlet temperature (K).
    pub t_rec_out: f64,
    /// Fuel calorific value (kJ/kg).
    pub eta_fuel: f64,
    /// Saturated steam specific enthalpy at 6 barG (kJ/kg).
    pub h_steam: f64,
    /// Saturated water specific enthalpy at 6 barG (kJ/kg).
    pub h_water: f64,
}

impl EngineParams {
    pub fn validate(&self) -> Result<()> {
        let pos = [
            self.q_e,
            self.w_sfoc,
            self.q_fuel_c,
            self.r_c,
            self.r_co2,
            self.q_flue_co2,
            self.rho_flue,
            self.cp_flue,
            self.t_rec_in,
            self.t_rec_out,
            self.eta_fuel,
            self.h_steam,
            self.h_water,
        ];
        if pos.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::InputDomain(
                "engine parameters must be finite and strictly positive".into(),
            ));
        }
        if self.t_rec_in <= self.t_rec_out {
            return Err(Error::InputDomain("t_rec_in must exceed t_rec_out".into()));
        }
        if self.h_steam <= self.h_water {
            return Err(Error::InputDomain("h_steam must exceed h_water".into()));
        }
        if !(0.0..1.0).contains(&self.q_flue_co2) || !(0.0..1.0).contains(&self.q_fuel_c) {
            return Err(Error::InputDomain(
                "q_flue_co2 and q_fuel_c must lie in (0, 1)".into(),
            ));
        }
        Ok(())
    }
}

/// Which column a [`ColumnParams`] describes; the desorber additionally
/// applies the stripping enhancement factor and reversed transfer direction
/// through the shared closure code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColumnKind {
    Absorber,
    Desorber,
}

/// Packed-column geometry and per-component molar heat capacities.
///
/// Component order everywhere in this crate is `[N2, CO2, MEA, H2O]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnParams {
    /// Internal diameter (m).
    pub diameter: f64,
    /// Packed length (m).
    pub length: f64,
    /// Interfacial area (m2/m3).
    pub interfacial_area: f64,
    /// Spatial layers; fixed at 5 by the state layout.
    pub n_layers: usize,
    /// Molar heat capacities (kJ/(kmol K)), order [N2, CO2, MEA, H2O].
    pub cp_molar: [f64; 4],
    pub kind: ColumnKind,
}

impl ColumnParams {
    /// Cross-sectional area (m2).
    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.diameter * self.diameter / 4.0
    }

    pub fn validate(&self) -> Result<()> {
        if self.diameter <= 0.0 || self.length <= 0.0 || self.interfacial_area <= 0.0 {
            return Err(Error::InputDomain(
                "column geometry must be strictly positive".into(),
            ));
        }
        if self.n_layers != 5 {
            return Err(Error::InputDomain(
                "n_layers must be 5 (fixed by the state layout)".into(),
            ));
        }
        Ok(())
    }
}

/// Mass/heat-transfer closure constants.
///
/// The first four fields are the ones perturbed in the imperfect model;
/// the rest are fixed surrogate-closure constants shared by both variants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosureParams {
    /// Gas-film correlation constant (truth 5.23, imperfect 3.08).
    pub k_g_const: f64,
    /// Liquid-film correlation constant (truth 0.0051, imperfect 0.0031).
    pub k_l_const: f64,
    /// Interfacial heat-transfer multiplier (truth 1.0, imperfect 0.8).
    pub h_int_scale: f64,
    /// Desorber enhancement-factor multiplier (truth 1.0, imperfect 1.05).
    pub e_des_scale: f64,

    /// Gas-film flow-dependence scale: k_g = k_g_const * k_g_flow_scale * u_g^0.7 (m/s).
    pub k_g_flow_scale: f64,
    /// Liquid-film flow-dependence scale: k_l = k_l_const * k_l_flow_scale * u_l^0.5 (m/s).
    pub k_l_flow_scale: f64,
    /// Dimensionless liquid-film partition weight in the two-film CO2 coefficient.
    pub liquid_film_partition: f64,
    /// CO2-MEA equilibrium coefficient at the reference temperature (-).
    pub k_eq_ref: f64,
    /// Arrhenius activation temperature of the equilibrium coefficient (K).
    pub e_eq_over_r: f64,
    /// Equilibrium reference temperature (K).
    pub t_eq_ref: f64,
    /// Water saturation concentration at the reference temperature (kmol/m3).
    pub c_sat_ref: f64,
    /// Clausius-Clapeyron slope of the water saturation curve (K).
    pub e_w_over_r: f64,
    /// Water saturation reference temperature (K).
    pub t_sat_ref: f64,
    /// Water transfer gas-film multiplier (-).
    pub water_film_scale: f64,
    /// Interfacial heat-transfer base coefficient (kW/(m2 K)).
    pub h_int_base: f64,
    /// Desorber enhancement base factor (-).
    pub enhancement_base: f64,
    /// Heat released per kmol CO2 absorbed (kJ/kmol).
    pub dh_abs_co2: f64,
    /// Heat released per kmol H2O condensed (kJ/kmol).
    pub dh_vap_h2o: f64,
}

impl ClosureParams {
    pub fn validate(&self) -> Result<()> {
        let pos = [
            self.k_g_const,
            self.k_l_const,
            self.h_int_scale,
            self.e_des_scale,
        ];
        if pos.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InputDomain(
                "closure constants must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Lean-rich and seawater heat-exchanger constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HxParams {
    /// Tube-side holdup volume (m3), rich stream.
    pub v_tube: f64,
    /// Shell-side holdup volume (m3), lean stream.
    pub v_shell: f64,
    /// Overall heat-transfer coefficient (kW/K).
    pub u_coeff: f64,
    /// Seawater inlet temperature (K).
    pub t_sw_in: f64,
    /// Seawater outlet temperature (K).
    pub t_sw_out: f64,
    /// Seawater heat capacity (kJ/(kg K)).
    pub cp_sw: f64,
    /// Solvent heat capacity (kJ/(kg K)).
    pub cp_sol: f64,
    /// Seawater density (kg/m3).
    pub rho_sw: f64,
    /// Solvent density (kg/m3); equal to rho_sw by assumption.
    pub rho_sol: f64,
}

impl HxParams {
    pub fn validate(&self) -> Result<()> {
        if self.v_tube <= 0.0 || self.v_shell <= 0.0 || self.u_coeff <= 0.0 {
            return Err(Error::InputDomain(
                "heat-exchanger volumes and U must be strictly positive".into(),
            ));
        }
        if self.t_sw_out <= self.t_sw_in {
            return Err(Error::InputDomain("t_sw_out must exceed t_sw_in".into()));
        }
        if (self.rho_sw - self.rho_sol).abs() > f64::EPSILON {
            return Err(Error::InputDomain(
                "seawater and solvent densities are assumed equal".into(),
            ));
        }
        Ok(())
    }
}

/// Reboiler holdup, enthalpy, and flash-closure constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReboilerParams {
    /// Holdup volume (m3).
    pub v_reb: f64,
    /// Liquid molar density (kmol/m3).
    pub rho_reb: f64,
    /// Liquid average molar heat capacity (kJ/(kmol K)).
    pub cp_reb: f64,
    /// Operating pressure (kPa).
    pub p_reb: f64,
    /// Fixed molar latent heat of the boil-up (kJ/kmol).
    pub latent_heat: f64,
    /// Relative volatility of CO2 in the flash split (-).
    pub alpha_co2: f64,
    /// Relative volatility of H2O in the flash split (-).
    pub alpha_h2o: f64,
    /// Boil-up fraction at high temperature (-), logistic asymptote.
    pub boilup_max: f64,
    /// Temperature of half-maximal boil-up (K).
    pub boilup_t_half: f64,
    /// Logistic width of the boil-up curve (K).
    pub boilup_t_width: f64,
}

impl ReboilerParams {
    pub fn validate(&self) -> Result<()> {
        if self.v_reb <= 0.0 || self.rho_reb <= 0.0 || self.cp_reb <= 0.0 {
            return Err(Error::InputDomain(
                "reboiler holdup, density, and heat capacity must be strictly positive".into(),
            ));
        }
        Ok(())
    }
}

/// Fixed boundary-stream constants (flue-gas inlet and solvent makeup).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryParams {
    /// Flue gas temperature at the absorber inlet (K).
    pub flue_t_in: f64,
    /// Water mole fraction of the flue gas (-).
    pub flue_h2o_frac: f64,
    /// Lean solvent MEA concentration, 30 wt% reference (kmol/m3).
    pub lean_c_mea: f64,
    /// Lean solvent water concentration (kmol/m3).
    pub lean_c_h2o: f64,
    /// Upper clamp on the recycled lean CO2 loading (-).
    pub lean_loading_max: f64,
}

/// Every physical constant of the plant, in truth or imperfect flavor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantParameters {
    pub variant: ParamVariant,
    pub engine: EngineParams,
    pub absorber: ColumnParams,
    pub desorber: ColumnParams,
    pub closures: ClosureParams,
    pub hx: HxParams,
    pub reboiler: ReboilerParams,
    pub boundary: BoundaryParams,
}

impl PlantParameters {
    /// The high-fidelity simulator parameter set.
    pub fn truth() -> Self {
        PlantParameters {
            variant: ParamVariant::Truth,
            engine: EngineParams {
                q_e: 10_800.0,
                w_sfoc: 0.1775,
                q_fuel_c: 0.8486,
                r_c: 12.01,
                r_co2: 44.01,
                q_flue_co2: 0.05462,
                rho_flue: 1.0,
                cp_flue: 1.1,
                t_rec_in: 633.15,
                t_rec_out: 423.15,
                eta_fuel: 42_700.0,
                h_steam: 2763.0,
                h_water: 697.0,
            },
            absorber: ColumnParams {
                diameter: 4.2,
                length: 12.5,
                interfacial_area: 143.9,
                n_layers: 5,
                cp_molar: [29.1, 37.1, 170.0, 75.3],
                kind: ColumnKind::Absorber,
            },
            desorber: ColumnParams {
                diameter: 4.9,
                length: 12.5,
                interfacial_area: 143.9,
                n_layers: 5,
                cp_molar: [29.1, 37.1, 170.0, 75.3],
                kind: ColumnKind::Desorber,
            },
            closures: ClosureParams {
                k_g_const: 5.23,
                k_l_const: 0.0051,
                h_int_scale: 1.0,
                e_des_scale: 1.0,
                k_g_flow_scale: 4.2e-4,
                k_l_flow_scale: 1.0,
                liquid_film_partition: 0.08,
                k_eq_ref: 2.0e-4,
                e_eq_over_r: 8370.0,
                t_eq_ref: 320.0,
                c_sat_ref: 2.835e-3,
                e_w_over_r: 5200.0,
                t_sat_ref: 313.15,
                water_film_scale: 0.30,
                h_int_base: 5.0e-3,
                enhancement_base: 1.15,
                dh_abs_co2: 85_000.0,
                dh_vap_h2o: 43_500.0,
            },
            hx: HxParams {
                v_tube: 0.0155,
                v_shell: 0.4172,
                u_coeff: 1899.949,
                t_sw_in: 308.0,
                t_sw_out: 323.0,
                cp_sw: 4.18,
                cp_sol: 3.9,
                rho_sw: 1010.0,
                rho_sol: 1010.0,
            },
            reboiler: ReboilerParams {
                v_reb: 0.145,
                rho_reb: 45.0,
                cp_reb: 80.0,
                p_reb: 180.0,
                latent_heat: 45_000.0,
                alpha_co2: 8.0,
                alpha_h2o: 1.0,
                boilup_max: 0.6,
                boilup_t_half: 393.0,
                boilup_t_width: 5.0,
            },
            boundary: BoundaryParams {
                flue_t_in: 313.15,
                flue_h2o_frac: 0.08,
                lean_c_mea: 4.96,
                lean_c_h2o: 39.2,
                lean_loading_max: 0.55,
            },
        }
    }

    /// The imperfect first-principles parameter set: exactly four closure
    /// constants deviate from [`PlantParameters::truth`].
    pub fn imperfect() -> Self {
        let mut p = PlantParameters::truth();
        p.variant = ParamVariant::Imperfect;
        p.closures.k_g_const = 3.08;
        p.closures.k_l_const = 0.0031;
        p.closures.h_int_scale = 0.8;
        p.closures.e_des_scale = 1.05;
        p
    }

    pub fn for_variant(variant: ParamVariant) -> Self {
        match variant {
            ParamVariant::Truth => Self::truth(),
            ParamVariant::Imperfect => Self::imperfect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.engine.validate()?;
        self.absorber.validate()?;
        self.desorber.validate()?;
        self.closures.validate()?;
        self.hx.validate()?;
        self.reboiler.validate()?;
        Ok(())
    }

    /// List the scalar fields on which `self` and `other` differ.
    ///
    /// Used by tests to assert that the imperfect variant deviates from the
    /// truth in exactly the four documented closure constants.
    pub fn scalar_diff(&self, other: &Self) -> Vec<(String, f64, f64)> {
        let a = flatten_params(self);
        let b = flatten_params(other);
        a.into_iter()
            .zip(b)
            .filter(|((_, x), (_, y))| x != y)
            .map(|((name, x), (_, y))| (name, x, y))
            .collect()
    }
}

fn flatten_params(p: &PlantParameters) -> Vec<(String, f64)> {
    let json = serde_json::to_value(p).expect("plant parameters serialize");
    let mut out = Vec::new();
    flatten_value("", &json, &mut out);
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

fn flatten_value(prefix: &str, v: &serde_json::Value, out: &mut Vec<(String, f64)>) {
    match v {
        serde_json::Value::Number(n) => {
            if let Some(f) = n.as_f64() {
                out.push((prefix.to_string(), f));
            }
        }
        serde_json::Value::Object(map) => {
            for (k, val) in map {
                let name = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten_value(&name, val, out);
            }
        }
        serde_json::Value::Array(items) => {
            for (i, val) in items.iter().enumerate() {
                flatten_value(&format!("{prefix}[{i}]"), val, out);
            }
        }
        _ => {}
    }
}
