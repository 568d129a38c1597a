//! Economic and tracking stage costs, the horizon objective over a
//! predictive model, steady-state set-point search, and the closed-loop
//! runner against the truth plant.

mod cem;

pub use cem::{ce_solve, CandidateEval, CeConfig, CeSolution, SamplingDistribution};

use serde::{Deserialize, Serialize};

use crate::datagen::derive_seed;
use crate::hybrid::HybridModel;
use crate::integrator::{
    consistent_initialize_from, plant_step_with, IntegratorConfig, NewtonWorkspace,
};
use crate::plant::{
    self, AlgebraicState, ControlInput, Disturbance, PlantParameters, PlantState, N_ALG, N_DIFF,
    N_INPUT,
};
use crate::{Error, Result};

/// Economic stage-cost constants: carbon tax, fuel price, CO2 release
/// threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EconomicConfig {
    /// Carbon tax ($/kg).
    pub alpha: f64,
    /// Fuel price ($/kg).
    pub beta: f64,
    /// CO2 release threshold (kg/s) above which the tax applies.
    pub y_limit: f64,
}

impl Default for EconomicConfig {
    fn default() -> Self {
        EconomicConfig {
            alpha: 0.05,
            beta: 1.2852,
            y_limit: 0.5,
        }
    }
}

/// Economic cost rate ($/s): taxed excess CO2 release plus fuel expense.
pub fn economic_cost(y: &[f64; 2], u: &[f64; N_INPUT], ec: &EconomicConfig) -> f64 {
    ec.alpha * (y[0] - ec.y_limit).max(0.0) + ec.beta * u[1]
}

/// Set-point tracking cost configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingConfig {
    /// Output set-point `[released CO2, T_reb]`.
    pub y_s: [f64; 2],
    /// Steady-state reference input.
    pub u_s: [f64; N_INPUT],
    /// Diagonal output weights.
    pub q_weights: [f64; 2],
    /// Diagonal input weights.
    pub r_weights: [f64; N_INPUT],
}

impl TrackingConfig {
    pub fn with_setpoint(y_s: [f64; 2], u_s: [f64; N_INPUT]) -> Self {
        TrackingConfig {
            y_s,
            u_s,
            q_weights: [3.0, 10.0],
            r_weights: [0.08, 0.08, 0.08],
        }
    }
}

/// Weighted squared deviation from the set-point.
pub fn tracking_cost(y: &[f64; 2], u: &[f64; N_INPUT], tc: &TrackingConfig) -> f64 {
    let mut cost = 0.0;
    for i in 0..2 {
        let d = tc.y_s[i] - y[i];
        cost += tc.q_weights[i] * d * d;
    }
    for i in 0..N_INPUT {
        let d = tc.u_s[i] - u[i];
        cost += tc.r_weights[i] * d * d;
    }
    cost
}

/// Box constraint on the controlled outputs (infinite bounds allowed).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutputBox {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl OutputBox {
    /// The operating constraint: released CO2 unconstrained, reboiler
    /// temperature confined to [385.15, 393.15] K.
    pub fn reboiler_band() -> Self {
        OutputBox {
            lo: [f64::NEG_INFINITY, 385.15],
            hi: [f64::INFINITY, 393.15],
        }
    }

    pub fn contains(&self, y: &[f64; 2]) -> bool {
        (0..2).all(|i| y[i] >= self.lo[i] && y[i] <= self.hi[i])
    }
}

/// Euclidean distance from `y` to the output box (clamp-and-norm); zero iff
/// feasible.
pub fn constraint_distance(y: &[f64; 2], output_box: &OutputBox) -> f64 {
    let mut acc = 0.0;
    for i in 0..2 {
        let clamped = y[i].clamp(output_box.lo[i], output_box.hi[i]);
        let d = y[i] - clamped;
        acc += d * d;
    }
    acc.sqrt()
}

/// Stage cost selector for the two controller flavors.
#[derive(Debug, Clone, PartialEq)]
pub enum StageCost {
    Economic(EconomicConfig),
    Tracking(TrackingConfig),
}

impl StageCost {
    pub fn evaluate(&self, y: &[f64; 2], u: &[f64; N_INPUT]) -> f64 {
        match self {
            StageCost::Economic(ec) => economic_cost(y, u, ec),
            StageCost::Tracking(tc) => tracking_cost(y, u, tc),
        }
    }
}

/// A model that can predict controlled outputs over a candidate input
/// sequence (the plant model bound inside an EMPC objective).
pub trait PredictModel: Sync {
    /// Predicted outputs at steps `1..=u_seq.len()` starting from `x0`. The
    /// load is held constant over the horizon. `z_hint` carries the measured
    /// algebraic state for models that want a warm start; learned models may
    /// ignore it.
    fn predict_outputs(
        &self,
        x0: &PlantState,
        z_hint: &AlgebraicState,
        u_seq: &[[f64; N_INPUT]],
        p: f64,
    ) -> Result<Vec<[f64; 2]>>;
}

/// Candidate sequences early in a CE solve jump across the whole input box,
/// which makes a stale step-0 Jacobian a poor preconditioner for later
/// steps; once the sampler contracts, inputs barely move and the
/// factorization can be kept. Rebuild when any input moves more than 2% of
/// its box width between horizon steps.
fn input_moved(prev: &[f64; N_INPUT], next: &[f64; N_INPUT]) -> bool {
    (0..N_INPUT).any(|c| {
        (next[c] - prev[c]).abs() > 0.02 * (plant::INPUT_HI[c] - plant::INPUT_LO[c])
    })
}

impl PredictModel for HybridModel {
    fn predict_outputs(
        &self,
        x0: &PlantState,
        _z_hint: &AlgebraicState,
        u_seq: &[[f64; N_INPUT]],
        p: f64,
    ) -> Result<Vec<[f64; 2]>> {
        let mut ws = NewtonWorkspace::new(N_DIFF, N_ALG);
        let mut outputs = Vec::with_capacity(u_seq.len());
        let mut x = x0.clone();
        let dist = Disturbance(p);
        for (j, u) in u_seq.iter().enumerate() {
            if j > 0 && input_moved(&u_seq[j - 1], u) {
                ws.invalidate();
            }
            x = self.hybrid_step_with(&mut ws, &x, &ControlInput::from_array(*u), dist)?;
            let y = plant::outputs(&x, dist, &self.fp_params)?;
            outputs.push(y.to_array());
        }
        Ok(outputs)
    }
}

/// The imperfect first-principles model used directly as an EMPC predictor
/// (algebraic states resolved by Newton at every step).
pub struct ImperfectFpPredictor<'a> {
    pub params: &'a PlantParameters,
    pub cfg: IntegratorConfig,
}

impl PredictModel for ImperfectFpPredictor<'_> {
    fn predict_outputs(
        &self,
        x0: &PlantState,
        z_hint: &AlgebraicState,
        u_seq: &[[f64; N_INPUT]],
        p: f64,
    ) -> Result<Vec<[f64; 2]>> {
        let mut ws = NewtonWorkspace::new(N_DIFF, N_ALG);
        let mut outputs = Vec::with_capacity(u_seq.len());
        let mut x = x0.clone();
        let mut z = *z_hint;
        let dist = Disturbance(p);
        for (j, u) in u_seq.iter().enumerate() {
            if j > 0 && input_moved(&u_seq[j - 1], u) {
                ws.invalidate();
            }
            let u = ControlInput::from_array(*u);
            let (xn, zn) = plant_step_with(&mut ws, &x, &z, &u, dist, self.params, &self.cfg)?;
            x = xn;
            z = zn;
            outputs.push(plant::outputs(&x, dist, self.params)?.to_array());
        }
        Ok(outputs)
    }
}

/// The receding-horizon objective bound to one measured state.
pub struct HorizonObjective<'a> {
    pub model: &'a dyn PredictModel,
    pub stage_cost: &'a StageCost,
    pub output_box: OutputBox,
    pub x0: &'a PlantState,
    pub z_hint: AlgebraicState,
    /// Measured output at the current state (stage j = 0 cost term).
    pub y0: [f64; 2],
    /// Load held over the horizon at its current measured value.
    pub p_hold: f64,
}

impl HorizonObjective<'_> {
    /// Accumulated stage cost, feasibility, and the max per-step constraint
    /// distance for one candidate sequence. Prediction failures map to an
    /// infeasible candidate with infinite cost.
    pub fn evaluate(&self, u_seq: &[[f64; N_INPUT]]) -> CandidateEval {
        let outs = match self
            .model
            .predict_outputs(self.x0, &self.z_hint, u_seq, self.p_hold)
        {
            Ok(o) => o,
            Err(_) => return CandidateEval::infeasible_failure(),
        };
        // Stage costs pair the pre-decision output with each input: stage 0
        // uses the measured output, later stages the predictions.
        let mut cost = self.stage_cost.evaluate(&self.y0, &u_seq[0]);
        for j in 1..u_seq.len() {
            cost += self.stage_cost.evaluate(&outs[j - 1], &u_seq[j]);
        }
        // Output constraints apply to every predicted output.
        let d_max = outs
            .iter()
            .map(|y| constraint_distance(y, &self.output_box))
            .fold(0.0f64, f64::max);
        CandidateEval {
            cost,
            feasible: d_max == 0.0,
            constraint_cost: d_max,
        }
    }
}

/// Result of the steady-state economic set-point search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Setpoint {
    pub y_s: [f64; 2],
    pub u_s: [f64; N_INPUT],
    /// Economic cost rate at the set-point.
    pub cost_rate: f64,
}

/// Settle the hybrid model at a constant input until the per-step state
/// change stalls; returns the settled state and the last per-step delta.
fn settle_hybrid(
    model: &HybridModel,
    x_start: &PlantState,
    u: &ControlInput,
    p: Disturbance,
    max_steps: usize,
    step_tol: f64,
) -> Result<(PlantState, f64)> {
    let mut ws = NewtonWorkspace::new(N_DIFF, N_ALG);
    let mut x = x_start.clone();
    let mut delta = f64::INFINITY;
    for _ in 0..max_steps {
        let x_next = model.hybrid_step_with(&mut ws, &x, u, p)?;
        delta = x_next
            .0
            .iter()
            .zip(&x.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        x = x_next;
        if delta < step_tol {
            break;
        }
    }
    Ok((x, delta))
}

/// Search steady states of the hybrid model over the input box for the
/// cheapest economic operating point with the reboiler temperature inside
/// the output box.
///
/// Grid search with one local refinement; steadiness is certified by the
/// per-step state change after the settling simulation.
pub fn compute_setpoint(
    model: &HybridModel,
    x_init: &PlantState,
    p_nominal: Disturbance,
    ec: &EconomicConfig,
    output_box: &OutputBox,
) -> Result<Setpoint> {
    let grid = |values: &[Vec<f64>], x_warm: &PlantState| -> Result<(Option<(f64, Setpoint, PlantState)>, PlantState)> {
        let mut best: Option<(f64, Setpoint, PlantState)> = None;
        let mut warm = x_warm.clone();
        for &f_l in &values[0] {
            for &f_fuel in &values[1] {
                for &f_sw in &values[2] {
                    let u = ControlInput::new(f_l, f_fuel, f_sw);
                    let Ok((x_ss, _delta)) = settle_hybrid(model, &warm, &u, p_nominal, 500, 1e-4)
                    else {
                        continue;
                    };
                    warm = x_ss.clone();
                    let y = plant::outputs(&x_ss, p_nominal, &model.fp_params)?.to_array();
                    if !output_box.contains(&y) {
                        continue;
                    }
                    let cost = economic_cost(&y, &u.to_array(), ec);
                    if best.as_ref().map_or(true, |(c, _, _)| cost < *c) {
                        best = Some((
                            cost,
                            Setpoint {
                                y_s: y,
                                u_s: u.to_array(),
                                cost_rate: cost,
                            },
                            x_ss,
                        ));
                    }
                }
            }
        }
        Ok((best, warm))
    };

    let coarse: Vec<Vec<f64>> = vec![
        linspace(plant::INPUT_LO[0], plant::INPUT_HI[0], 5),
        linspace(plant::INPUT_LO[1], plant::INPUT_HI[1], 6),
        linspace(plant::INPUT_LO[2], plant::INPUT_HI[2], 3),
    ];
    let (best, warm) = grid(&coarse, x_init)?;
    let (_, candidate, x_best) = best.ok_or_else(|| {
        Error::SetpointNotFound("no feasible steady state on the coarse grid".into())
    })?;

    // Refine around the winner with half the coarse spacing.
    let spacing = [
        (plant::INPUT_HI[0] - plant::INPUT_LO[0]) / 4.0 / 2.0,
        (plant::INPUT_HI[1] - plant::INPUT_LO[1]) / 5.0 / 2.0,
        (plant::INPUT_HI[2] - plant::INPUT_LO[2]) / 2.0 / 2.0,
    ];
    let fine: Vec<Vec<f64>> = (0..N_INPUT)
        .map(|c| {
            let center = candidate.u_s[c];
            vec![
                (center - spacing[c]).max(plant::INPUT_LO[c]),
                center,
                (center + spacing[c]).min(plant::INPUT_HI[c]),
            ]
        })
        .collect();
    let (refined, _) = grid(&fine, &warm)?;
    let (_, refined_sp, x_ss) = refined.unwrap_or((candidate.cost_rate, candidate, x_best));

    // Certify steadiness at the chosen point.
    let (x_final, delta) = settle_hybrid(
        model,
        &x_ss,
        &ControlInput::from_array(refined_sp.u_s),
        p_nominal,
        300,
        1e-5,
    )?;
    if delta > 5e-2 {
        return Err(Error::SetpointNotFound(format!(
            "chosen point did not settle (per-step delta {delta:.3e})"
        )));
    }
    let y = plant::outputs(&x_final, p_nominal, &model.fp_params)?.to_array();
    Ok(Setpoint {
        y_s: y,
        u_s: refined_sp.u_s,
        cost_rate: economic_cost(&y, &refined_sp.u_s, ec),
    })
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Closed-loop runner settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedLoopConfig {
    /// Number of controller invocations.
    pub n_control_steps: usize,
    /// Samples each optimal action is held for (10 per the update cadence).
    pub control_hold: usize,
    pub ce: CeConfig,
    pub seed: u64,
    /// Shift-warm-start the sampling mean between control steps.
    pub warm_start: bool,
}

impl Default for ClosedLoopConfig {
    fn default() -> Self {
        ClosedLoopConfig {
            n_control_steps: 200,
            control_hold: 10,
            ce: CeConfig::default(),
            seed: 0,
            warm_start: true,
        }
    }
}

/// One recorded plant sample of a closed-loop run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedLoopSample {
    pub t: f64,
    pub y: [f64; 2],
    pub capture: f64,
    pub cost_rate: f64,
    pub u: [f64; N_INPUT],
    pub p: f64,
    pub treb_in_box: bool,
}

/// Per-controller-call diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlStepInfo {
    pub step: usize,
    pub ce_iterations: usize,
    pub best_cost: f64,
    pub feasible: bool,
    /// Wall time of the solver call (informational; excluded from
    /// determinism-checked artifacts).
    pub solve_ms: f64,
}

/// Averages over one closed-loop run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedLoopSummary {
    pub avg_cost_rate: f64,
    pub avg_capture: f64,
    pub treb_violation_fraction: f64,
    pub avg_solve_ms: f64,
    pub n_samples: usize,
}

/// Full record of one closed-loop run.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedLoopTrace {
    pub samples: Vec<ClosedLoopSample>,
    pub steps: Vec<ControlStepInfo>,
    pub summary: ClosedLoopSummary,
}

/// Run a controller against the truth plant.
///
/// Every `control_hold` samples the full state is measured, one CE solve
/// produces the action, and the action is held. The economic cost rate is
/// recorded for every sample regardless of the controller's own stage cost,
/// so EMPC and tracking MPC runs are directly comparable.
pub fn closed_loop_run(
    truth: &PlantParameters,
    int_cfg: &IntegratorConfig,
    model: &dyn PredictModel,
    stage_cost: &StageCost,
    output_box: &OutputBox,
    profile: &[f64],
    x0: &PlantState,
    z0: &AlgebraicState,
    reporting: &EconomicConfig,
    clc: &ClosedLoopConfig,
) -> Result<ClosedLoopTrace> {
    clc.ce.validate()?;
    let needed = clc.n_control_steps * clc.control_hold;
    if profile.len() < needed {
        return Err(Error::Shape(format!(
            "load profile has {} samples, run needs {needed}",
            profile.len()
        )));
    }
    let mut x = x0.clone();
    let mut z = *z0;
    let mut ws = NewtonWorkspace::new(N_DIFF, N_ALG);
    let mut samples = Vec::with_capacity(needed);
    let mut steps = Vec::with_capacity(clc.n_control_steps);
    let mut previous_sequence: Option<Vec<[f64; N_INPUT]>> = None;

    for k in 0..clc.n_control_steps {
        let p_k = profile[k * clc.control_hold];
        let y0 = plant::outputs(&x, Disturbance(p_k), truth)?.to_array();
        let objective = HorizonObjective {
            model,
            stage_cost,
            output_box: *output_box,
            x0: &x,
            z_hint: z,
            y0,
            p_hold: p_k,
        };

        // Warm start: previous optimal sequence shifted one step, the tail
        // filled with the box midpoint; variances reset to the initial ones.
        let mut dist = SamplingDistribution::initial(&clc.ce);
        if clc.warm_start {
            if let Some(prev) = &previous_sequence {
                for j in 0..clc.ce.horizon {
                    dist.mu[j] = if j + 1 < prev.len() {
                        prev[j + 1]
                    } else {
                        ControlInput::box_midpoint().to_array()
                    };
                }
            }
        }

        let t_solve = std::time::Instant::now();
        let sol = ce_solve(
            |seq| objective.evaluate(seq),
            &dist,
            &clc.ce,
            derive_seed(clc.seed, k as u64),
        )?;
        let solve_ms = t_solve.elapsed().as_secs_f64() * 1e3;
        steps.push(ControlStepInfo {
            step: k,
            ce_iterations: sol.iterations,
            best_cost: sol.eval.cost,
            feasible: sol.eval.feasible,
            solve_ms,
        });
        let u_apply = ControlInput::from_array(sol.action).clip_to_box();
        previous_sequence = Some(sol.sequence);

        for j in 0..clc.control_hold {
            let sample_idx = k * clc.control_hold + j;
            let p = Disturbance(profile[sample_idx]);
            let (xn, zn) = plant_step_with(&mut ws, &x, &z, &u_apply, p, truth, int_cfg)
                .map_err(|e| Error::StepFailed {
                    sample: sample_idx,
                    source: Box::new(e),
                })?;
            x = xn;
            z = zn;
            let y = plant::outputs(&x, p, truth)?;
            let capture = plant::capture_rate(&y, p, truth)?;
            let ya = y.to_array();
            samples.push(ClosedLoopSample {
                t: (sample_idx + 1) as f64 * int_cfg.sample_period,
                y: ya,
                capture,
                cost_rate: economic_cost(&ya, &u_apply.to_array(), reporting),
                u: u_apply.to_array(),
                p: p.0,
                treb_in_box: ya[1] >= output_box.lo[1] && ya[1] <= output_box.hi[1],
            });
        }
    }

    let n = samples.len();
    let summary = ClosedLoopSummary {
        avg_cost_rate: samples.iter().map(|s| s.cost_rate).sum::<f64>() / n as f64,
        avg_capture: samples.iter().map(|s| s.capture).sum::<f64>() / n as f64,
        treb_violation_fraction: samples.iter().filter(|s| !s.treb_in_box).count() as f64
            / n as f64,
        avg_solve_ms: steps.iter().map(|s| s.solve_ms).sum::<f64>() / steps.len().max(1) as f64,
        n_samples: n,
    };
    Ok(ClosedLoopTrace {
        samples,
        steps,
        summary,
    })
}

/// Consistent algebraic state for a fresh closed-loop start.
pub fn initialize_plant(
    x0: &PlantState,
    u: &ControlInput,
    p: Disturbance,
    params: &PlantParameters,
    cfg: &IntegratorConfig,
) -> Result<AlgebraicState> {
    let warm = crate::integrator::reboiler_warm_start(x0, u, params);
    consistent_initialize_from(&warm, x0, u, p, params, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn economic_cost_matches_hand_values() {
        let ec = EconomicConfig::default();
        // Below the release threshold only fuel is billed.
        let c1 = economic_cost(&[0.4, 390.0], &[0.03, 0.25, 0.03], &ec);
        assert_relative_eq!(c1, 0.3213, max_relative = 1e-12);
        // Above the threshold the tax applies to the excess only.
        let c2 = economic_cost(&[0.6, 390.0], &[0.03, 0.25, 0.03], &ec);
        assert_relative_eq!(c2, 0.3263, max_relative = 1e-12);
        assert!(c1 >= 0.0 && c2 >= 0.0);
    }

    #[test]
    fn tracking_cost_is_zero_at_the_setpoint_and_weighted_elsewhere() {
        let tc = TrackingConfig::with_setpoint([0.5, 390.0], [0.03, 0.25, 0.03]);
        assert_eq!(tracking_cost(&[0.5, 390.0], &[0.03, 0.25, 0.03], &tc), 0.0);
        // Unit deviation in the second output costs q2 = 10.
        assert_relative_eq!(
            tracking_cost(&[0.5, 391.0], &[0.03, 0.25, 0.03], &tc),
            10.0,
            max_relative = 1e-12
        );
        // Unit deviation in every input costs 3 * 0.08.
        assert_relative_eq!(
            tracking_cost(&[0.5, 390.0], &[1.03, 1.25, 1.03], &tc),
            0.24,
            max_relative = 1e-12
        );
    }

    #[test]
    fn constraint_distance_is_a_box_clamp_norm() {
        let b = OutputBox::reboiler_band();
        assert_eq!(constraint_distance(&[123.0, 390.0], &b), 0.0);
        assert_relative_eq!(
            constraint_distance(&[0.0, 395.15], &b),
            2.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            constraint_distance(&[0.0, 383.15], &b),
            2.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn horizon_distance_aggregates_by_max() {
        struct Fixed(Vec<[f64; 2]>);
        impl PredictModel for Fixed {
            fn predict_outputs(
                &self,
                _x0: &PlantState,
                _z: &AlgebraicState,
                _u: &[[f64; N_INPUT]],
                _p: f64,
            ) -> Result<Vec<[f64; 2]>> {
                Ok(self.0.clone())
            }
        }
        let model = Fixed(vec![[0.4, 390.0], [0.4, 394.15], [0.4, 396.15]]);
        let cost = StageCost::Economic(EconomicConfig::default());
        let x0 = PlantState::zeros();
        let objective = HorizonObjective {
            model: &model,
            stage_cost: &cost,
            output_box: OutputBox::reboiler_band(),
            x0: &x0,
            z_hint: AlgebraicState::zeros(),
            y0: [0.4, 390.0],
            p_hold: 0.5,
        };
        let eval = objective.evaluate(&[[0.03, 0.2, 0.03]; 3]);
        assert!(!eval.feasible);
        // Per-step distances are 0, 1, 3; the aggregate is their max.
        assert_relative_eq!(eval.constraint_cost, 3.0, max_relative = 1e-12);
        // The objective is the exact sum of the three stage costs.
        let expected: f64 = 3.0 * (1.2852 * 0.2);
        assert_relative_eq!(eval.cost, expected, max_relative = 1e-12);
    }

    #[test]
    fn paired_sequences_isolate_the_fuel_term() {
        struct Fixed;
        impl PredictModel for Fixed {
            fn predict_outputs(
                &self,
                _x0: &PlantState,
                _z: &AlgebraicState,
                u: &[[f64; N_INPUT]],
                _p: f64,
            ) -> Result<Vec<[f64; 2]>> {
                Ok(vec![[0.3, 390.0]; u.len()])
            }
        }
        let cost = StageCost::Economic(EconomicConfig::default());
        let x0 = PlantState::zeros();
        let objective = HorizonObjective {
            model: &Fixed,
            stage_cost: &cost,
            output_box: OutputBox::reboiler_band(),
            x0: &x0,
            z_hint: AlgebraicState::zeros(),
            y0: [0.3, 390.0],
            p_hold: 0.5,
        };
        let mut a = [[0.03, 0.20, 0.03]; 5];
        let mut b = a;
        a[2][1] = 0.25;
        b[2][1] = 0.30;
        let ea = objective.evaluate(&a);
        let eb = objective.evaluate(&b);
        // Outputs stay below the release threshold, so the difference is
        // exactly beta * delta_fuel.
        assert_relative_eq!(eb.cost - ea.cost, 1.2852 * 0.05, max_relative = 1e-10);
    }
}
