//! The composed gray-box predictor: one imperfect first-principles step
//! warm-started with network-inferred algebraic states, plus a learned
//! additive state correction.
//!
//! `x_next = fp_step(x, z_inferred, u, p) + compensation(x, z_inferred, u, p)`
//!
//! No measured algebraic state is needed anywhere in the prediction path.

use ndarray::Array1;

use crate::datagen::NormStats;
use crate::integrator::{dae_step_with, IntegratorConfig, NewtonWorkspace, PlantDae};
use crate::neural::MlpModel;
use crate::plant::{
    self, AlgebraicState, ControlInput, Disturbance, ParamVariant, PlantOutput, PlantParameters,
    PlantState, N_ALG, N_DIFF, N_INPUT,
};
use crate::{Error, Result};

/// Normalization floor marking a dimension as carrying no information
/// (constant over the training split).
const STD_FLOOR_CUTOFF: f64 = 1.5e-8;

/// Imperfect physics plus the two trained networks and their normalization
/// statistics.
#[derive(Debug, Clone)]
pub struct HybridModel {
    pub fp_params: PlantParameters,
    pub inference: MlpModel,
    pub compensation: MlpModel,
    pub stats: NormStats,
    pub int_cfg: IntegratorConfig,
    /// Per-dimension gate: dimensions whose mismatch labels were constant in
    /// training carry no signal, and correcting them would only inject dust
    /// into otherwise exactly-conserved states.
    correction_mask: Vec<bool>,
}

impl HybridModel {
    pub fn new(
        fp_params: PlantParameters,
        inference: MlpModel,
        compensation: MlpModel,
        stats: NormStats,
        int_cfg: IntegratorConfig,
    ) -> Result<Self> {
        if fp_params.variant != ParamVariant::Imperfect {
            return Err(Error::Config(
                "the hybrid model wraps the imperfect parameter set".into(),
            ));
        }
        if inference.input_dim() != N_DIFF + N_INPUT + 1 || inference.output_dim() != N_ALG {
            return Err(Error::Shape(format!(
                "inference net must map {} -> {}",
                N_DIFF + N_INPUT + 1,
                N_ALG
            )));
        }
        if compensation.input_dim() != N_DIFF + N_ALG + N_INPUT + 1
            || compensation.output_dim() != N_DIFF
        {
            return Err(Error::Shape(format!(
                "compensation net must map {} -> {}",
                N_DIFF + N_ALG + N_INPUT + 1,
                N_DIFF
            )));
        }
        let correction_mask = stats
            .mismatch
            .std
            .iter()
            .map(|s| *s > STD_FLOOR_CUTOFF)
            .collect();
        Ok(HybridModel {
            fp_params,
            inference,
            compensation,
            stats,
            int_cfg,
            correction_mask,
        })
    }

    fn inference_input(&self, x: &PlantState, u: &ControlInput, p: f64) -> Array1<f64> {
        let mut v = Array1::zeros(N_DIFF + N_INPUT + 1);
        for i in 0..N_DIFF {
            v[i] = (x.0[i] - self.stats.x.mean[i]) / self.stats.x.std[i];
        }
        let ua = u.to_array();
        for i in 0..N_INPUT {
            v[N_DIFF + i] = (ua[i] - self.stats.u.mean[i]) / self.stats.u.std[i];
        }
        v[N_DIFF + N_INPUT] = (p - self.stats.p.mean[0]) / self.stats.p.std[0];
        v
    }

    fn dynamics_input(
        &self,
        x: &PlantState,
        z: &AlgebraicState,
        u: &ControlInput,
        p: f64,
    ) -> Array1<f64> {
        let mut v = Array1::zeros(N_DIFF + N_ALG + N_INPUT + 1);
        for i in 0..N_DIFF {
            v[i] = (x.0[i] - self.stats.x.mean[i]) / self.stats.x.std[i];
        }
        for i in 0..N_ALG {
            v[N_DIFF + i] = (z.0[i] - self.stats.z.mean[i]) / self.stats.z.std[i];
        }
        let ua = u.to_array();
        for i in 0..N_INPUT {
            v[N_DIFF + N_ALG + i] = (ua[i] - self.stats.u.mean[i]) / self.stats.u.std[i];
        }
        v[N_DIFF + N_ALG + N_INPUT] = (p - self.stats.p.mean[0]) / self.stats.p.std[0];
        v
    }

    /// Infer the algebraic states from `(x, u, p)`; the result is clipped
    /// into the algebraic-state invariant ranges.
    pub fn infer_algebraic(
        &self,
        x: &PlantState,
        u: &ControlInput,
        p: Disturbance,
    ) -> Result<AlgebraicState> {
        let out = self.inference.forward(&self.inference_input(x, u, p.0).view())?;
        let mut z = AlgebraicState::zeros();
        for i in 0..N_ALG {
            z.0[i] = out[i] * self.stats.z.std[i] + self.stats.z.mean[i];
        }
        z.clip_to_invariants();
        Ok(z)
    }

    /// One hybrid prediction step (no measured algebraic state required).
    pub fn hybrid_step(
        &self,
        x: &PlantState,
        u: &ControlInput,
        p: Disturbance,
    ) -> Result<PlantState> {
        let mut ws = NewtonWorkspace::new(N_DIFF, N_ALG);
        self.hybrid_step_with(&mut ws, x, u, p)
    }

    /// Hybrid step reusing a Newton workspace (hot path).
    pub fn hybrid_step_with(
        &self,
        ws: &mut NewtonWorkspace,
        x: &PlantState,
        u: &ControlInput,
        p: Disturbance,
    ) -> Result<PlantState> {
        let z_hat = self.infer_algebraic(x, u, p)?;
        let sys = PlantDae {
            params: &self.fp_params,
            u: *u,
            p: p.0,
        };
        // The inferred z only warm-starts the implicit solve; if a poor
        // inference stalls Newton, fall back to a consistent initialization
        // (deterministic) and retry once.
        let (x_fp, _z_fp) = match dae_step_with(ws, &sys, &x.0, &z_hat.0, &self.int_cfg) {
            Ok(step) => step,
            Err(_) => {
                ws.invalidate();
                let z_fb =
                    crate::integrator::consistent_initialize(x, u, p, &self.fp_params, &self.int_cfg)?;
                dae_step_with(ws, &sys, &x.0, &z_fb.0, &self.int_cfg)?
            }
        };
        let correction = self
            .compensation
            .forward(&self.dynamics_input(x, &z_hat, u, p.0).view())?;
        let mut x_next = PlantState::zeros();
        for i in 0..N_DIFF {
            let corr = if self.correction_mask[i] {
                correction[i] * self.stats.mismatch.std[i] + self.stats.mismatch.mean[i]
            } else {
                0.0
            };
            x_next.0[i] = x_fp[i] + corr;
        }
        x_next.clip_concentrations();
        Ok(x_next)
    }

    /// Multi-step rollout feeding predictions forward; returns `n + 1`
    /// states including the initial one.
    pub fn rollout(
        &self,
        x0: &PlantState,
        u_seq: &[ControlInput],
        p_seq: &[f64],
        n: usize,
    ) -> Result<Vec<PlantState>> {
        if n > u_seq.len() || n > p_seq.len() {
            return Err(Error::Shape(format!(
                "rollout of {n} steps needs {n} inputs, got {} / {}",
                u_seq.len(),
                p_seq.len()
            )));
        }
        let mut ws = NewtonWorkspace::new(N_DIFF, N_ALG);
        let mut states = Vec::with_capacity(n + 1);
        states.push(x0.clone());
        let mut x = x0.clone();
        for k in 0..n {
            x = self
                .hybrid_step_with(&mut ws, &x, &u_seq[k], Disturbance(p_seq[k]))
                .map_err(|e| Error::StepFailed {
                    sample: k,
                    source: Box::new(e),
                })?;
            states.push(x.clone());
        }
        Ok(states)
    }

    /// Predicted outputs along a rollout (uses the plant output map).
    pub fn rollout_outputs(
        &self,
        states: &[PlantState],
        p_seq: &[f64],
    ) -> Result<Vec<PlantOutput>> {
        states
            .iter()
            .enumerate()
            .map(|(k, x)| {
                let p = if k == 0 {
                    p_seq.first().copied().unwrap_or(0.0)
                } else {
                    p_seq[(k - 1).min(p_seq.len() - 1)]
                };
                plant::outputs(x, Disturbance(p), &self.fp_params)
            })
            .collect()
    }
}

/// Open-loop rollout of a black-box one-step model `(x, z, u, p) ->
/// (x_next, z_next)`, feeding its own predictions forward.
pub fn blackbox_rollout(
    net: &MlpModel,
    stats: &NormStats,
    x0: &PlantState,
    z0: &AlgebraicState,
    u_seq: &[ControlInput],
    p_seq: &[f64],
    n: usize,
) -> Result<Vec<(PlantState, AlgebraicState)>> {
    if n > u_seq.len() || n > p_seq.len() {
        return Err(Error::Shape(format!(
            "rollout of {n} steps needs {n} inputs, got {} / {}",
            u_seq.len(),
            p_seq.len()
        )));
    }
    if net.input_dim() != N_DIFF + N_ALG + N_INPUT + 1 || net.output_dim() != N_DIFF + N_ALG {
        return Err(Error::Shape(format!(
            "black-box net must map {} -> {}",
            N_DIFF + N_ALG + N_INPUT + 1,
            N_DIFF + N_ALG
        )));
    }
    let mut out = Vec::with_capacity(n + 1);
    out.push((x0.clone(), *z0));
    let mut x = x0.clone();
    let mut z = *z0;
    let mut input = Array1::zeros(N_DIFF + N_ALG + N_INPUT + 1);
    for k in 0..n {
        for i in 0..N_DIFF {
            input[i] = (x.0[i] - stats.x.mean[i]) / stats.x.std[i];
        }
        for i in 0..N_ALG {
            input[N_DIFF + i] = (z.0[i] - stats.z.mean[i]) / stats.z.std[i];
        }
        let ua = u_seq[k].to_array();
        for i in 0..N_INPUT {
            input[N_DIFF + N_ALG + i] = (ua[i] - stats.u.mean[i]) / stats.u.std[i];
        }
        input[N_DIFF + N_ALG + N_INPUT] = (p_seq[k] - stats.p.mean[0]) / stats.p.std[0];
        let pred = net.forward(&input.view())?;
        // Zero-information dimensions (constant in training) pin to their
        // mean, mirroring the hybrid model's correction gate.
        for i in 0..N_DIFF {
            x.0[i] = if stats.x.std[i] > STD_FLOOR_CUTOFF {
                pred[i] * stats.x.std[i] + stats.x.mean[i]
            } else {
                stats.x.mean[i]
            };
        }
        for i in 0..N_ALG {
            z.0[i] = if stats.z.std[i] > STD_FLOOR_CUTOFF {
                pred[N_DIFF + i] * stats.z.std[i] + stats.z.mean[i]
            } else {
                stats.z.mean[i]
            };
        }
        x.clip_concentrations();
        z.clip_to_invariants();
        out.push((x.clone(), z));
    }
    Ok(out)
}

/// Normalized multi-step state MSE of predicted vs true states (skips the
/// shared initial state).
pub fn rollout_state_mse(
    predicted: &[PlantState],
    truth: &[PlantState],
    stats: &NormStats,
) -> Result<f64> {
    if predicted.len() != truth.len() || predicted.len() < 2 {
        return Err(Error::Shape(
            "rollout MSE needs matching sequences of at least two states".into(),
        ));
    }
    let n = predicted.len() - 1;
    let mut acc = 0.0;
    for k in 1..=n {
        for i in 0..N_DIFF {
            let d = (predicted[k].0[i] - truth[k].0[i]) / stats.x.std[i];
            acc += d * d;
        }
    }
    Ok(acc / (n * N_DIFF) as f64)
}

/// Normalized multi-step MSE over algebraic states.
pub fn rollout_alg_mse(
    predicted: &[AlgebraicState],
    truth: &[AlgebraicState],
    stats: &NormStats,
) -> Result<f64> {
    if predicted.len() != truth.len() || predicted.len() < 2 {
        return Err(Error::Shape(
            "rollout MSE needs matching sequences of at least two states".into(),
        ));
    }
    let n = predicted.len() - 1;
    let mut acc = 0.0;
    for k in 1..=n {
        for i in 0..N_ALG {
            let d = (predicted[k].0[i] - truth[k].0[i]) / stats.z.std[i];
            acc += d * d;
        }
    }
    Ok(acc / (n * N_ALG) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::ColumnStats;
    use crate::integrator::{consistent_initialize, nominal_steady_state};
    use crate::neural::{MlpModel, COMPENSATION_SIZES, INFERENCE_SIZES};

    fn unit_stats(dim: usize) -> ColumnStats {
        ColumnStats {
            mean: vec![0.0; dim],
            std: vec![1.0; dim],
        }
    }

    fn passthrough_stats() -> NormStats {
        NormStats {
            x: unit_stats(N_DIFF),
            z: unit_stats(N_ALG),
            u: unit_stats(N_INPUT),
            p: unit_stats(1),
            mismatch: unit_stats(N_DIFF),
        }
    }

    /// Zero-weight nets with the z-statistics mean pinned at the consistent
    /// algebraic state, so the "inferred" z is a sensible constant.
    fn zeroed_hybrid() -> HybridModel {
        let cfg = IntegratorConfig::default();
        let (x, _) = nominal_steady_state(&PlantParameters::truth(), &cfg).unwrap();
        let z = consistent_initialize(
            &x,
            &ControlInput::box_midpoint(),
            Disturbance(0.55),
            &PlantParameters::imperfect(),
            &cfg,
        )
        .unwrap();
        let mut stats = passthrough_stats();
        stats.z.mean = z.0.to_vec();
        HybridModel::new(
            PlantParameters::imperfect(),
            MlpModel::zeroed(&INFERENCE_SIZES).unwrap(),
            MlpModel::zeroed(&COMPENSATION_SIZES).unwrap(),
            stats,
            IntegratorConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn rejects_truth_parameters() {
        let err = HybridModel::new(
            PlantParameters::truth(),
            MlpModel::zeroed(&INFERENCE_SIZES).unwrap(),
            MlpModel::zeroed(&COMPENSATION_SIZES).unwrap(),
            passthrough_stats(),
            IntegratorConfig::default(),
        );
        assert!(err.is_err());
    }

    #[test]
    fn zeroed_compensation_reproduces_the_imperfect_step_bitwise() {
        // Additivity: with a zero-weight compensation net the hybrid step
        // equals the imperfect one-step prediction started from the same
        // inferred warm start, bit for bit (concentration clipping included
        // on both sides).
        let hybrid = zeroed_hybrid();
        let cfg = IntegratorConfig::default();
        let (x, _z) = nominal_steady_state(&PlantParameters::truth(), &cfg).unwrap();
        let u = ControlInput::box_midpoint();
        let p = Disturbance(0.55);

        let predicted = hybrid.hybrid_step(&x, &u, p).unwrap();

        let z_hat = hybrid.infer_algebraic(&x, &u, p).unwrap();
        let sys = PlantDae {
            params: &hybrid.fp_params,
            u,
            p: p.0,
        };
        let mut ws = NewtonWorkspace::new(N_DIFF, N_ALG);
        let (x_fp, _) = dae_step_with(&mut ws, &sys, &x.0, &z_hat.0, &cfg).unwrap();
        let mut expected = PlantState::from_slice(&x_fp).unwrap();
        expected.clip_concentrations();
        assert_eq!(predicted, expected);
    }

    #[test]
    fn inferred_algebraic_state_is_clipped() {
        let hybrid = zeroed_hybrid();
        let (x, _) = nominal_steady_state(&PlantParameters::truth(), &IntegratorConfig::default())
            .unwrap();
        let z = hybrid
            .infer_algebraic(&x, &ControlInput::box_midpoint(), Disturbance(0.5))
            .unwrap();
        assert!((0.0..=1.0).contains(&z.q_reb()));
        assert!((0.0..=1.0).contains(&z.m_co2_out()));
        assert!(z.f_g_reb() >= 0.0);
        // Repeated calls are identical.
        let z2 = hybrid
            .infer_algebraic(&x, &ControlInput::box_midpoint(), Disturbance(0.5))
            .unwrap();
        assert_eq!(z, z2);
    }

    #[test]
    fn one_step_rollout_equals_hybrid_step() {
        let hybrid = zeroed_hybrid();
        let (x, _) = nominal_steady_state(&PlantParameters::truth(), &IntegratorConfig::default())
            .unwrap();
        let u = vec![ControlInput::box_midpoint()];
        let p = vec![0.55];
        let states = hybrid.rollout(&x, &u, &p, 1).unwrap();
        assert_eq!(states.len(), 2);
        let single = hybrid.hybrid_step(&x, &u[0], Disturbance(0.55)).unwrap();
        assert_eq!(states[1], single);
    }

    #[test]
    fn blackbox_rollout_denormalizes_one_forward_pass() {
        let net = MlpModel::zeroed(&crate::neural::NN2_SIZES).unwrap();
        let stats = passthrough_stats();
        let cfg = IntegratorConfig::default();
        let (x0, _) = nominal_steady_state(&PlantParameters::truth(), &cfg).unwrap();
        let z0 = consistent_initialize(
            &x0,
            &ControlInput::box_midpoint(),
            Disturbance(0.55),
            &PlantParameters::truth(),
            &cfg,
        )
        .unwrap();
        let u = vec![ControlInput::box_midpoint(); 2];
        let p = vec![0.55; 2];
        let states = blackbox_rollout(&net, &stats, &x0, &z0, &u, &p, 1).unwrap();
        // A zero net predicts the normalized origin, which denormalizes to
        // the stats mean (zero under pass-through stats).
        assert!(states[1].0 .0.iter().all(|v| *v == 0.0));
    }
}
