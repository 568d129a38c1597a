//! Seawater and lean-rich solvent heat exchangers.

use super::params::HxParams;
use crate::{Error, Result};

/// Solvent outlet temperature of the seawater exchanger.
///
/// Algebraic energy balance; since the seawater outlet runs hotter than its
/// inlet, the solvent is always cooled when seawater flows.
pub fn seawater_hx_outlet(t_sol_in: f64, f_sw: f64, f_l: f64, hx: &HxParams) -> Result<f64> {
    if f_l <= 0.0 {
        return Err(Error::SingularInput(
            "seawater exchanger needs a strictly positive solvent flow".into(),
        ));
    }
    Ok(seawater_hx_outlet_unchecked(t_sol_in, f_sw, f_l, hx))
}

#[inline]
pub(crate) fn seawater_hx_outlet_unchecked(t_sol_in: f64, f_sw: f64, f_l: f64, hx: &HxParams) -> f64 {
    t_sol_in
        + (hx.rho_sw * f_sw * hx.cp_sw) / (hx.rho_sol * f_l * hx.cp_sol)
            * (hx.t_sw_in - hx.t_sw_out)
}

/// One stream entering the lean-rich exchanger.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HxStream {
    /// Inlet temperature (K).
    pub t_in: f64,
    /// Volumetric flow (m3/s).
    pub flow: f64,
}

/// Time derivatives of the two lumped holdup temperatures.
///
/// The rich stream runs through the tube and is heated; the lean stream runs
/// through the shell and is cooled; the volumes couple through U.
pub fn lean_rich_hx_derivatives(
    t_tube: f64,
    t_shell: f64,
    rich: &HxStream,
    lean: &HxStream,
    hx: &HxParams,
) -> (f64, f64) {
    let rho_cp = hx.rho_sol * hx.cp_sol; // kJ/(m3 K)
    let d_tube = rich.flow / hx.v_tube * (rich.t_in - t_tube)
        + hx.u_coeff * (t_shell - t_tube) / (rho_cp * hx.v_tube);
    let d_shell = lean.flow / hx.v_shell * (lean.t_in - t_shell)
        + hx.u_coeff * (t_tube - t_shell) / (rho_cp * hx.v_shell);
    (d_tube, d_shell)
}
