//! Ship-engine flue gas rates and reboiler heat supply.

use super::params::EngineParams;
use crate::{Error, Result};

/// Flue-gas CO2 mass rate and volumetric flow at a given engine load.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlueGas {
    /// CO2 mass flow contained in the flue gas (kg/s).
    pub co2_rate: f64,
    /// Flue gas volumetric flow (m3/s).
    pub volumetric_flow: f64,
}

/// Heat supplied to the reboiler by waste-heat recovery and the gas turbine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatSupply {
    /// Recovered waste heat (kW).
    pub q_rec: f64,
    /// Gas-turbine heat (kW).
    pub q_turbine: f64,
    /// Total reboiler duty (kW).
    pub q_reb: f64,
}

/// CO2 mass rate and flue-gas volumetric flow from the engine load.
///
/// Both are exactly linear in the load ratio.
pub fn flue_gas_rates(phi_e: f64, ep: &EngineParams) -> Result<FlueGas> {
    if !phi_e.is_finite() || !(0.0..=1.0).contains(&phi_e) {
        return Err(Error::InputDomain(format!(
            "engine load must lie in [0, 1], got {phi_e}"
        )));
    }
    Ok(flue_gas_rates_unchecked(phi_e, ep))
}

#[inline]
pub(crate) fn flue_gas_rates_unchecked(phi_e: f64, ep: &EngineParams) -> FlueGas {
    let co2_rate =
        ep.r_co2 / (3600.0 * ep.r_c) * ep.q_fuel_c * phi_e * 2.0 * ep.q_e * ep.w_sfoc;
    let volumetric_flow = co2_rate / (ep.q_flue_co2 * ep.rho_flue);
    FlueGas {
        co2_rate,
        volumetric_flow,
    }
}

/// Waste-heat recovery, gas-turbine heat, and the resulting reboiler duty.
///
/// Linear in the flue gas flow and in the fuel flow respectively.
pub fn heat_supply(f_g: f64, f_fuel: f64, ep: &EngineParams) -> Result<HeatSupply> {
    if !f_g.is_finite() || f_g < 0.0 {
        return Err(Error::InputDomain(format!(
            "flue gas flow must be non-negative, got {f_g}"
        )));
    }
    if !f_fuel.is_finite() || f_fuel < 0.0 {
        return Err(Error::InputDomain(format!(
            "fuel flow must be non-negative, got {f_fuel}"
        )));
    }
    Ok(heat_supply_unchecked(f_g, f_fuel, ep))
}

#[inline]
pub(crate) fn heat_supply_unchecked(f_g: f64, f_fuel: f64, ep: &EngineParams) -> HeatSupply {
    let q_rec = ep.rho_flue * ep.cp_flue * f_g * (ep.t_rec_in - ep.t_rec_out);
    let q_turbine = ep.eta_fuel * f_fuel * (ep.h_steam - ep.h_water) / ep.h_steam;
    HeatSupply {
        q_rec,
        q_turbine,
        q_reb: q_rec + q_turbine,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plant::PlantParameters;
    use approx::assert_relative_eq;

    #[test]
    fn zero_load_gives_zero_rates() {
        let ep = PlantParameters::truth().engine;
        let fg = flue_gas_rates(0.0, &ep).unwrap();
        assert_eq!(fg.co2_rate, 0.0);
        assert_eq!(fg.volumetric_flow, 0.0);
    }

    #[test]
    fn full_load_matches_hand_arithmetic() {
        let ep = PlantParameters::truth().engine;
        let fg = flue_gas_rates(1.0, &ep).unwrap();
        // 44.01/(3600*12.01) * 0.8486 * 2 * 10800 * 0.1775
        assert_relative_eq!(fg.co2_rate, 3.311776318900916, max_relative = 1e-12);
        assert_relative_eq!(fg.volumetric_flow, 60.63303403333789, max_relative = 1e-12);
    }

    #[test]
    fn half_load_is_half_of_full() {
        let ep = PlantParameters::truth().engine;
        let full = flue_gas_rates(1.0, &ep).unwrap();
        let half = flue_gas_rates(0.5, &ep).unwrap();
        assert_relative_eq!(half.co2_rate, 0.5 * full.co2_rate, max_relative = 1e-14);
    }

    #[test]
    fn out_of_range_load_is_rejected() {
        let ep = PlantParameters::truth().engine;
        assert!(flue_gas_rates(-0.1, &ep).is_err());
        assert!(flue_gas_rates(1.1, &ep).is_err());
        assert!(flue_gas_rates(f64::NAN, &ep).is_err());
    }

    #[test]
    fn zero_flows_give_zero_heat() {
        let ep = PlantParameters::truth().engine;
        let hs = heat_supply(0.0, 0.0, &ep).unwrap();
        assert_eq!(hs.q_rec, 0.0);
        assert_eq!(hs.q_turbine, 0.0);
        assert_eq!(hs.q_reb, 0.0);
    }

    #[test]
    fn heat_supply_matches_hand_arithmetic() {
        let ep = PlantParameters::truth().engine;
        let hs = heat_supply(10.0, 0.25, &ep).unwrap();
        assert_relative_eq!(hs.q_rec, 2310.0, max_relative = 1e-12);
        assert_relative_eq!(hs.q_turbine, 7982.102786825913, max_relative = 1e-12);
        assert_relative_eq!(hs.q_reb, hs.q_rec + hs.q_turbine, max_relative = 1e-15);
    }

    #[test]
    fn negative_flows_are_rejected() {
        let ep = PlantParameters::truth().engine;
        assert!(heat_supply(-1.0, 0.0, &ep).is_err());
        assert!(heat_supply(0.0, -1.0, &ep).is_err());
    }
}
