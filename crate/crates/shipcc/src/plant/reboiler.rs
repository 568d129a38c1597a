//! Reboiler energy balance and the algebraic flash closure.
//!
//! The reboiler holds one differential state (its temperature); the liquid
//! composition, boil-up fraction, outlet CO2 mole fraction, and vapor flow
//! are the seven algebraic states, pinned by quasi-steady component balances
//! and a constant-relative-volatility flash around the 120 C reference.

use super::params::ReboilerParams;
use super::state::{comp, AlgebraicState, N_ALG};

/// Universal gas constant (kJ/(kmol K)).
pub const R_GAS: f64 = 8.314;

/// Liquid stream entering the reboiler from the desorber bottom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReboilerInflow {
    /// Concentrations (kmol/m3), order [N2, CO2, MEA, H2O].
    pub conc: [f64; 4],
    /// Temperature (K).
    pub temperature: f64,
    /// Volumetric flow (m3/s).
    pub f_l: f64,
}

/// Everything the reboiler model produces at one evaluation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReboilerEval {
    /// Holdup imbalance dM_i/dt for i = CO2, MEA, H2O (kmol/s). Zero at the
    /// quasi-steady solution enforced by the residuals.
    pub dm_dt: [f64; 3],
    /// Reboiler temperature derivative (K/s).
    pub dt_reb_dt: f64,
    /// Algebraic residuals; the consistent state satisfies `residuals = 0`.
    pub residuals: [f64; N_ALG],
    /// Vapor CO2 mole fraction of the boil-up.
    pub y_co2: f64,
    /// Vapor H2O mole fraction of the boil-up.
    pub y_h2o: f64,
    /// Molar feed rate (kmol/s).
    pub f_mol_in: f64,
}

/// Boil-up fraction as a smooth logistic in the reboiler temperature.
#[inline]
pub fn boilup_fraction(t_reb: f64, rp: &ReboilerParams) -> f64 {
    rp.boilup_max / (1.0 + (-(t_reb - rp.boilup_t_half) / rp.boilup_t_width).exp())
}

/// Vapor mole fractions from the constant-relative-volatility split of the
/// reboiler liquid (MEA and N2 nonvolatile).
#[inline]
pub fn vapor_split(c_co2: f64, c_h2o: f64, rp: &ReboilerParams) -> (f64, f64) {
    let denom = (rp.alpha_co2 * c_co2 + rp.alpha_h2o * c_h2o).max(1e-12);
    let y_co2 = rp.alpha_co2 * c_co2 / denom;
    (y_co2, 1.0 - y_co2)
}

/// Evaluate the reboiler balances and flash residuals.
pub fn reboiler_residuals(
    t_reb: f64,
    z: &AlgebraicState,
    inflow: &ReboilerInflow,
    q_reb: f64,
    rp: &ReboilerParams,
) -> ReboilerEval {
    let c_in_tot: f64 = inflow.conc.iter().sum::<f64>().max(1e-9);
    let f_mol_in = inflow.f_l.max(1e-9) * c_in_tot;
    let m_in = [
        inflow.conc[comp::N2] / c_in_tot,
        inflow.conc[comp::CO2] / c_in_tot,
        inflow.conc[comp::MEA] / c_in_tot,
        inflow.conc[comp::H2O] / c_in_tot,
    ];

    let q = z.0[4];
    let one_minus_q = 1.0 - q;
    let rho = rp.rho_reb;
    let (y_co2, y_h2o) = vapor_split(z.0[comp::CO2], z.0[comp::H2O], rp);

    let mut g = [0.0; N_ALG];
    // Nonvolatile N2 pass-through.
    g[0] = z.0[comp::N2] * one_minus_q - rho * m_in[comp::N2];
    // Quasi-steady component balances, normalized by the molar feed rate.
    g[1] = m_in[comp::CO2] - q * y_co2 - one_minus_q * z.0[comp::CO2] / rho;
    g[2] = m_in[comp::MEA] - one_minus_q * z.0[comp::MEA] / rho;
    g[3] = m_in[comp::H2O] - q * y_h2o - one_minus_q * z.0[comp::H2O] / rho;
    // Flash specification of the boil-up fraction.
    g[4] = q - boilup_fraction(t_reb, rp);
    // Outlet liquid CO2 mole fraction definition.
    g[5] = z.0[5] - z.0[comp::CO2] / rho;
    // Ideal-gas vapor volumetric flow at the reboiler pressure.
    g[6] = z.0[6] - q * f_mol_in * R_GAS * t_reb / rp.p_reb;

    // Raw holdup imbalances of Eq-form dM/dt = in - vapor out - liquid out.
    let f_v = q * f_mol_in;
    let f_l_out = one_minus_q * f_mol_in;
    let dm_dt = [
        f_mol_in * m_in[comp::CO2] - f_v * y_co2 - f_l_out * z.0[comp::CO2] / rho,
        f_mol_in * m_in[comp::MEA] - f_l_out * z.0[comp::MEA] / rho,
        f_mol_in * m_in[comp::H2O] - f_v * y_h2o - f_l_out * z.0[comp::H2O] / rho,
    ];

    // Energy balance with affine enthalpies; the reference temperature
    // cancels, leaving sensible heating plus the latent duty of the boil-up.
    let dt_reb_dt = (f_mol_in * rp.cp_reb * (inflow.temperature - t_reb) - f_v * rp.latent_heat
        + q_reb)
        / (rho * rp.cp_reb * rp.v_reb);

    ReboilerEval {
        dm_dt,
        dt_reb_dt,
        residuals: g,
        y_co2,
        y_h2o,
        f_mol_in,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plant::PlantParameters;
    use approx::assert_relative_eq;

    fn nominal_inflow() -> ReboilerInflow {
        ReboilerInflow {
            conc: [0.0, 1.8, 4.9, 38.3],
            temperature: 380.0,
            f_l: 0.03,
        }
    }

    #[test]
    fn no_boilup_reduces_to_liquid_balance() {
        let rp = PlantParameters::truth().reboiler;
        let inflow = nominal_inflow();
        // Force q = 0 through the algebraic state; dm reduces to in - liquid out.
        let z = AlgebraicState([0.0, 1.8, 4.9, 38.3, 0.0, 0.04, 0.0]);
        let ev = reboiler_residuals(390.0, &z, &inflow, 0.0, &rp);
        let c_tot: f64 = inflow.conc.iter().sum();
        let f_mol = inflow.f_l * c_tot;
        for (i, c) in [1.8, 4.9, 38.3].iter().enumerate() {
            let expected = f_mol * (c / c_tot) - f_mol * (c / rp.rho_reb);
            assert_relative_eq!(ev.dm_dt[i], expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn balanced_energy_flux_is_stationary() {
        let rp = PlantParameters::truth().reboiler;
        let inflow = nominal_inflow();
        let z = AlgebraicState([0.0, 1.5, 5.0, 38.5, 0.25, 1.5 / 45.0, 5.0]);
        // Choose q_reb to exactly balance sensible + latent flux.
        let c_tot: f64 = inflow.conc.iter().sum();
        let f_mol = inflow.f_l * c_tot;
        let t_reb = 391.0;
        let q_needed =
            z.0[4] * f_mol * rp.latent_heat - f_mol * rp.cp_reb * (inflow.temperature - t_reb);
        let ev = reboiler_residuals(t_reb, &z, &inflow, q_needed, &rp);
        assert_relative_eq!(ev.dt_reb_dt, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn boilup_fraction_is_monotone_and_bounded() {
        let rp = PlantParameters::truth().reboiler;
        let mut prev = 0.0;
        for i in 0..100 {
            let t = 360.0 + i as f64;
            let q = boilup_fraction(t, &rp);
            assert!(q > prev);
            assert!(q < rp.boilup_max);
            prev = q;
        }
    }

    #[test]
    fn vapor_split_sums_to_one_and_favors_co2() {
        let rp = PlantParameters::truth().reboiler;
        let (y_co2, y_h2o) = vapor_split(1.8, 38.0, &rp);
        assert_relative_eq!(y_co2 + y_h2o, 1.0, epsilon = 1e-15);
        let liquid_ratio = 1.8 / (1.8 + 38.0);
        assert!(y_co2 > liquid_ratio);
    }
}
