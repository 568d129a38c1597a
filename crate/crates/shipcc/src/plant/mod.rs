//! First-principles model of the ship-engine system and the shipboard
//! post-combustion carbon capture plant.
//!
//! Plant topology (all assembled in [`plant_dae`]):
//! engine flue gas enters the absorber bottom; rich solvent from the
//! absorber bottom is heated in the lean-rich exchanger tube and fed to the
//! desorber top; the desorber bottom liquid enters the reboiler; reboiler
//! vapor returns to the desorber bottom while the lean liquid runs through
//! the exchanger shell and seawater cooler back to the absorber top. The
//! lean stream is rebuilt at the 30 wt% MEA makeup composition, carrying the
//! recycle loading and temperature.

mod column;
mod engine;
mod exchanger;
mod params;
mod reboiler;
mod state;

pub use column::{
    co2_equilibrium_coeff, column_derivatives, transfer_closures, water_saturation_conc,
    InletStream, LayerState, TransferRates, MIN_FLOW,
};
pub use engine::{flue_gas_rates, heat_supply, FlueGas, HeatSupply};
pub use exchanger::{lean_rich_hx_derivatives, seawater_hx_outlet, HxStream};
pub use params::{
    BoundaryParams, ClosureParams, ColumnKind, ColumnParams, EngineParams, HxParams, ParamVariant,
    PlantParameters, ReboilerParams,
};
pub use reboiler::{boilup_fraction, reboiler_residuals, vapor_split, ReboilerEval, ReboilerInflow, R_GAS};
pub use state::{
    comp, idx, state_is_physical, AlgebraicState, ControlInput, Disturbance, PlantOutput,
    PlantState, INPUT_HI, INPUT_LO, N_ALG, N_COMP, N_DIFF, N_INPUT, N_LAYERS, TEMPERATURE_INDICES,
    TEMP_MAX, TEMP_MIN,
};

use crate::Result;

/// Gas composition of the flue gas entering the absorber.
///
/// The CO2 concentration is pinned so that an untouched gas stream leaves
/// with exactly the inlet CO2 mass rate (capture rate 0 for pass-through).
pub fn flue_gas_inlet(params: &PlantParameters) -> InletStream {
    let ep = &params.engine;
    let c_co2 = ep.q_flue_co2 * ep.rho_flue / ep.r_co2;
    let c_tot = c_co2 / ep.q_flue_co2;
    let c_h2o = params.boundary.flue_h2o_frac * c_tot;
    let c_n2 = c_tot - c_co2 - c_h2o;
    InletStream {
        conc: [c_n2, c_co2, 0.0, c_h2o],
        temperature: params.boundary.flue_t_in,
    }
}

fn section_layers(x: &[f64], base: usize) -> [LayerState; N_LAYERS] {
    let mut layers = [LayerState {
        c_liq: [0.0; N_COMP],
        c_gas: [0.0; N_COMP],
        t_liq: 0.0,
        t_gas: 0.0,
    }; N_LAYERS];
    for (n, layer) in layers.iter_mut().enumerate() {
        for c in 0..N_COMP {
            layer.c_liq[c] = x[base + c * N_LAYERS + n];
            layer.c_gas[c] = x[base + 25 + c * N_LAYERS + n];
        }
        layer.t_liq = x[base + 20 + n];
        layer.t_gas = x[base + 45 + n];
    }
    layers
}

/// Full right-hand side and algebraic residual; infallible on any finite
/// state so Newton iterates never abort mid-solve.
pub(crate) fn rhs_into(
    x: &[f64],
    z: &[f64],
    u: &ControlInput,
    p: f64,
    params: &PlantParameters,
    xdot: &mut [f64],
    g: &mut [f64],
) {
    let f_l = u.f_l.max(MIN_FLOW);
    let z_state = AlgebraicState([z[0], z[1], z[2], z[3], z[4], z[5], z[6]]);

    // Engine side.
    let flue = engine::flue_gas_rates_unchecked(p, &params.engine);
    let heat = engine::heat_supply_unchecked(flue.volumetric_flow, u.f_fuel.max(0.0), &params.engine);

    // Lean solvent entering the absorber: makeup composition at the recycle
    // loading, cooled by the seawater exchanger.
    let loading = (z_state.0[comp::CO2] / z_state.0[comp::MEA].max(1e-9))
        .clamp(0.0, params.boundary.lean_loading_max);
    let lean_t =
        exchanger::seawater_hx_outlet_unchecked(x[idx::HX_SHELL], u.f_sw.max(0.0), f_l, &params.hx);
    let lean_inlet = InletStream {
        conc: [
            0.0,
            loading * params.boundary.lean_c_mea,
            params.boundary.lean_c_mea,
            params.boundary.lean_c_h2o,
        ],
        temperature: lean_t,
    };

    // Absorber.
    let abs_layers = section_layers(x, idx::ABS_LIQ);
    let abs_gas_in = flue_gas_inlet(params);
    let d_abs = column_derivatives(
        &params.absorber,
        &abs_layers,
        &lean_inlet,
        &abs_gas_in,
        u.f_l.max(0.0),
        flue.volumetric_flow,
        &params.closures,
    );
    xdot[idx::ABS_LIQ..idx::ABS_LIQ + 50].copy_from_slice(&d_abs);

    // Rich stream leaving the absorber bottom.
    let rich_conc = [
        x[idx::conc(idx::ABS_LIQ, comp::N2, N_LAYERS - 1)],
        x[idx::conc(idx::ABS_LIQ, comp::CO2, N_LAYERS - 1)],
        x[idx::conc(idx::ABS_LIQ, comp::MEA, N_LAYERS - 1)],
        x[idx::conc(idx::ABS_LIQ, comp::H2O, N_LAYERS - 1)],
    ];
    let rich_t = x[idx::ABS_TL + N_LAYERS - 1];

    // Lean-rich exchanger: rich through tube, lean (at reboiler temperature)
    // through shell.
    let (d_tube, d_shell) = lean_rich_hx_derivatives(
        x[idx::HX_TUBE],
        x[idx::HX_SHELL],
        &HxStream {
            t_in: rich_t,
            flow: f_l,
        },
        &HxStream {
            t_in: x[idx::T_REB],
            flow: f_l,
        },
        &params.hx,
    );
    xdot[idx::HX_TUBE] = d_tube;
    xdot[idx::HX_SHELL] = d_shell;

    // Desorber: rich feed at tube temperature, reboiler vapor at the bottom.
    let rich_inlet = InletStream {
        conc: rich_conc,
        temperature: x[idx::HX_TUBE],
    };
    let (y_co2, y_h2o) = vapor_split(z_state.0[comp::CO2], z_state.0[comp::H2O], &params.reboiler);
    let t_reb = x[idx::T_REB];
    let c_vap_tot = params.reboiler.p_reb / (R_GAS * t_reb.max(TEMP_MIN));
    let des_gas_in = InletStream {
        conc: [0.0, y_co2 * c_vap_tot, 0.0, y_h2o * c_vap_tot],
        temperature: t_reb,
    };
    let des_layers = section_layers(x, idx::DES_LIQ);
    let d_des = column_derivatives(
        &params.desorber,
        &des_layers,
        &rich_inlet,
        &des_gas_in,
        u.f_l.max(0.0),
        z_state.f_g_reb().max(0.0),
        &params.closures,
    );
    xdot[idx::DES_LIQ..idx::DES_LIQ + 50].copy_from_slice(&d_des);

    // Reboiler fed by the desorber bottom liquid.
    let inflow = ReboilerInflow {
        conc: [
            x[idx::conc(idx::DES_LIQ, comp::N2, N_LAYERS - 1)],
            x[idx::conc(idx::DES_LIQ, comp::CO2, N_LAYERS - 1)],
            x[idx::conc(idx::DES_LIQ, comp::MEA, N_LAYERS - 1)],
            x[idx::conc(idx::DES_LIQ, comp::H2O, N_LAYERS - 1)],
        ],
        temperature: x[idx::DES_TL + N_LAYERS - 1],
        f_l,
    };
    let reb = reboiler_residuals(t_reb, &z_state, &inflow, heat.q_reb, &params.reboiler);
    xdot[idx::T_REB] = reb.dt_reb_dt;
    g.copy_from_slice(&reb.residuals);
}

/// Assemble the full semi-explicit DAE: `xdot = f(x, z, u, p)`, `g(x, z, u, p)`.
///
/// Validates the inputs once; the returned values are pure functions of the
/// arguments (bit-identical on identical inputs).
pub fn plant_dae(
    x: &PlantState,
    z: &AlgebraicState,
    u: &ControlInput,
    p: Disturbance,
    params: &PlantParameters,
) -> Result<(PlantState, AlgebraicState)> {
    u.validate()?;
    p.validate()?;
    let mut xdot = [0.0; N_DIFF];
    let mut g = [0.0; N_ALG];
    rhs_into(&x.0, &z.0, u, p.0, params, &mut xdot, &mut g);
    Ok((PlantState(xdot), AlgebraicState(g)))
}

/// Controlled outputs: released CO2 mass flow (top absorber gas layer) and
/// the reboiler temperature.
pub fn outputs(x: &PlantState, p: Disturbance, params: &PlantParameters) -> Result<PlantOutput> {
    p.validate()?;
    let flue = engine::flue_gas_rates_unchecked(p.0, &params.engine);
    let c_co2_top = x.0[idx::conc(idx::ABS_GAS, comp::CO2, 0)];
    Ok(PlantOutput {
        f_co2_out: params.engine.r_co2 * c_co2_top * flue.volumetric_flow,
        t_reb: x.0[idx::T_REB],
    })
}

/// Carbon capture rate: fraction of the inlet flue-gas CO2 that is removed.
pub fn capture_rate(y: &PlantOutput, p: Disturbance, params: &PlantParameters) -> Result<f64> {
    p.validate()?;
    let flue = engine::flue_gas_rates_unchecked(p.0, &params.engine);
    if flue.co2_rate <= 0.0 {
        return Err(crate::Error::UndefinedRate);
    }
    Ok((flue.co2_rate - y.f_co2_out) / flue.co2_rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rough_state(params: &PlantParameters) -> PlantState {
        let mut x = [0.0; N_DIFF];
        let flue = flue_gas_inlet(params);
        for n in 0..N_LAYERS {
            // Absorber liquid: lean-ish solvent at 320 K.
            x[idx::conc(idx::ABS_LIQ, comp::CO2, n)] = 1.0;
            x[idx::conc(idx::ABS_LIQ, comp::MEA, n)] = params.boundary.lean_c_mea;
            x[idx::conc(idx::ABS_LIQ, comp::H2O, n)] = params.boundary.lean_c_h2o;
            x[idx::ABS_TL + n] = 320.0;
            for c in 0..N_COMP {
                x[idx::conc(idx::ABS_GAS, c, n)] = flue.conc[c];
            }
            x[idx::ABS_TG + n] = 318.0;
            // Desorber: rich solvent at 380 K, steamy gas.
            x[idx::conc(idx::DES_LIQ, comp::CO2, n)] = 1.8;
            x[idx::conc(idx::DES_LIQ, comp::MEA, n)] = params.boundary.lean_c_mea;
            x[idx::conc(idx::DES_LIQ, comp::H2O, n)] = params.boundary.lean_c_h2o;
            x[idx::DES_TL + n] = 380.0;
            x[idx::conc(idx::DES_GAS, comp::CO2, n)] = 0.004;
            x[idx::conc(idx::DES_GAS, comp::H2O, n)] = 0.045;
            x[idx::DES_TG + n] = 385.0;
        }
        x[idx::HX_TUBE] = 360.0;
        x[idx::HX_SHELL] = 360.0;
        x[idx::T_REB] = 391.0;
        PlantState(x)
    }

    fn rough_alg() -> AlgebraicState {
        AlgebraicState([0.0, 0.6, 6.5, 37.9, 0.24, 0.013, 5.5])
    }

    #[test]
    fn dae_is_deterministic() {
        let params = PlantParameters::truth();
        let x = rough_state(&params);
        let z = rough_alg();
        let u = ControlInput::box_midpoint();
        let p = Disturbance(0.55);
        let (a1, g1) = plant_dae(&x, &z, &u, p, &params).unwrap();
        let (a2, g2) = plant_dae(&x, &z, &u, p, &params).unwrap();
        assert_eq!(a1, a2);
        assert_eq!(g1, g2);
    }

    #[test]
    fn truth_and_imperfect_differ_only_via_closures() {
        let truth = PlantParameters::truth();
        let imperfect = PlantParameters::imperfect();
        let x = rough_state(&truth);
        let z = rough_alg();
        let u = ControlInput::box_midpoint();
        let p = Disturbance(0.55);
        let (xd_t, g_t) = plant_dae(&x, &z, &u, p, &truth).unwrap();
        let (xd_i, g_i) = plant_dae(&x, &z, &u, p, &imperfect).unwrap();
        // Engine-side and reboiler/exchanger equations are untouched: the
        // algebraic residuals and HX/reboiler derivatives agree exactly.
        assert_eq!(g_t, g_i);
        assert_eq!(xd_t.0[idx::HX_TUBE], xd_i.0[idx::HX_TUBE]);
        assert_eq!(xd_t.0[idx::HX_SHELL], xd_i.0[idx::HX_SHELL]);
        assert_eq!(xd_t.0[idx::T_REB], xd_i.0[idx::T_REB]);
        // The columns do differ.
        let col_diff: f64 = (0..100).map(|i| (xd_t.0[i] - xd_i.0[i]).abs()).sum();
        assert!(col_diff > 0.0);
    }

    #[test]
    fn parameter_diff_is_exactly_four_scalars() {
        let diffs = PlantParameters::truth().scalar_diff(&PlantParameters::imperfect());
        let names: Vec<&str> = diffs.iter().map(|(n, _, _)| n.as_str()).collect();
        assert_eq!(diffs.len(), 4, "unexpected diffs: {names:?}");
        assert!(names.iter().any(|n| n.ends_with("k_g_const")));
        assert!(names.iter().any(|n| n.ends_with("k_l_const")));
        assert!(names.iter().any(|n| n.ends_with("h_int_scale")));
        assert!(names.iter().any(|n| n.ends_with("e_des_scale")));
        for (name, t, i) in &diffs {
            if name.ends_with("k_g_const") {
                assert_eq!((*t, *i), (5.23, 3.08));
            } else if name.ends_with("k_l_const") {
                assert_eq!((*t, *i), (0.0051, 0.0031));
            } else if name.ends_with("h_int_scale") {
                assert_eq!((*t, *i), (1.0, 0.8));
            } else if name.ends_with("e_des_scale") {
                assert_eq!((*t, *i), (1.0, 1.05));
            }
        }
    }

    #[test]
    fn nitrogen_gas_holdup_is_transport_only() {
        // With closures forced to zero the whole column is transport-only;
        // the N2 gas derivatives of the full model must match that oracle
        // exactly because N2 is inert.
        let params = PlantParameters::truth();
        let mut zeroed = params.clone();
        zeroed.closures.k_g_const = 0.0;
        zeroed.closures.k_l_const = 0.0;
        zeroed.closures.h_int_scale = 0.0;
        zeroed.closures.water_film_scale = 0.0;

        let x = rough_state(&params);
        let z = rough_alg();
        let u = ControlInput::box_midpoint();
        let p = Disturbance(0.55);
        let (full, _) = plant_dae(&x, &z, &u, p, &params).unwrap();
        let (transport, _) = plant_dae(&x, &z, &u, p, &zeroed).unwrap();
        for n in 0..N_LAYERS {
            let i_abs = idx::conc(idx::ABS_GAS, comp::N2, n);
            let i_des = idx::conc(idx::DES_GAS, comp::N2, n);
            assert_eq!(full.0[i_abs], transport.0[i_abs]);
            assert_eq!(full.0[i_des], transport.0[i_des]);
        }
    }

    #[test]
    fn pass_through_gas_has_zero_capture() {
        let params = PlantParameters::truth();
        let mut x = rough_state(&params);
        let flue = flue_gas_inlet(&params);
        x.0[idx::conc(idx::ABS_GAS, comp::CO2, 0)] = flue.conc[comp::CO2];
        let p = Disturbance(0.55);
        let y = outputs(&x, p, &params).unwrap();
        let rate = capture_rate(&y, p, &params).unwrap();
        assert_relative_eq!(rate, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn clean_gas_has_full_capture() {
        let params = PlantParameters::truth();
        let mut x = rough_state(&params);
        x.0[idx::conc(idx::ABS_GAS, comp::CO2, 0)] = 0.0;
        let p = Disturbance(0.55);
        let y = outputs(&x, p, &params).unwrap();
        assert_eq!(capture_rate(&y, p, &params).unwrap(), 1.0);
    }

    #[test]
    fn zero_load_capture_is_undefined() {
        let params = PlantParameters::truth();
        let x = rough_state(&params);
        let y = PlantOutput {
            f_co2_out: 0.0,
            t_reb: x.t_reb(),
        };
        assert!(matches!(
            capture_rate(&y, Disturbance(0.0), &params),
            Err(crate::Error::UndefinedRate)
        ));
    }

    #[test]
    fn engine_equations_are_linear_in_their_drivers() {
        // Randomized linearity probes for the four closed-form equations.
        let params = PlantParameters::truth();
        let ep = &params.engine;
        let mut seed = 0x243F6A8885A308D3u64;
        let mut next = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..200 {
            let phi = next();
            let a = flue_gas_rates(phi, ep).unwrap();
            let b = flue_gas_rates(phi * 0.5, ep).unwrap();
            assert_relative_eq!(b.co2_rate * 2.0, a.co2_rate, max_relative = 1e-12);
            assert_relative_eq!(b.volumetric_flow * 2.0, a.volumetric_flow, max_relative = 1e-12);

            let f_g = 60.0 * next();
            let f_fuel = 0.333 * next();
            let h = heat_supply(f_g, f_fuel, ep).unwrap();
            let h2 = heat_supply(0.5 * f_g, f_fuel, ep).unwrap();
            assert_relative_eq!(h2.q_rec * 2.0, h.q_rec, max_relative = 1e-12);
            let h3 = heat_supply(f_g, 0.5 * f_fuel, ep).unwrap();
            assert_relative_eq!(h3.q_turbine * 2.0, h.q_turbine, max_relative = 1e-12);
        }
    }
}
