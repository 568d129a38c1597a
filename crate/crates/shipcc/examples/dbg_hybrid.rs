//! Throwaway diagnostic: where does the hybrid rollout error come from?
use shipcc::datagen::{build_dataset, make_disturbance_profile, make_excitation, Scenario};
use shipcc::hybrid::{rollout_state_mse, HybridModel};
use shipcc::integrator::{nominal_steady_state, simulate_open_loop, IntegratorConfig, NewtonWorkspace, dae_step_with, PlantDae};
use shipcc::neural::{train_compensation_net, train_inference_net, TrainConfig};
use shipcc::plant::{Disturbance, PlantParameters, PlantState, N_ALG, N_DIFF};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().collect();
    let n_samples: usize = args.get(1).map_or(4000, |s| s.parse().unwrap());
    let epochs: usize = args.get(2).map_or(120, |s| s.parse().unwrap());
    let horizon: usize = args.get(3).map_or(600, |s| s.parse().unwrap());

    let truth = PlantParameters::truth();
    let imperfect = PlantParameters::imperfect();
    let int_cfg = IntegratorConfig::default();
    let scenario = Scenario::case_i();
    let ds = build_dataset(&scenario, n_samples, &truth, &imperfect, &int_cfg, 1)?;
    let tc = TrainConfig { epochs, seed: 1, ..TrainConfig::default() };
    let inf = train_inference_net(&ds, &tc)?;
    println!("inference best val {:.3e} ({} epochs)", inf.best_val_mse, inf.curves.len());
    let comp = train_compensation_net(&ds, &tc)?;
    println!("compensation best val {:.3e} ({} epochs)", comp.best_val_mse, comp.curves.len());
    let hybrid = HybridModel::new(imperfect.clone(), inf.model, comp.model, ds.stats().clone(), int_cfg.clone())?;

    let p_seq = make_disturbance_profile(&scenario, horizon, 9090)?;
    let u_seq = make_excitation(horizon, scenario.input_hold, 9091)?;
    let (x0, _) = nominal_steady_state(&truth, &int_cfg)?;
    let traj = simulate_open_loop(&x0, &u_seq, &p_seq, &truth, &int_cfg)?;
    let stats = ds.stats();

    // (d) teacher-forced one-step errors along the eval trajectory.
    let mut ws = NewtonWorkspace::new(N_DIFF, N_ALG);
    let mut hyb_1step = 0.0;
    let mut fp_1step = 0.0;
    let mut count = 0usize;
    for k in 0..horizon {
        let xh = hybrid.hybrid_step(&traj.x[k], &u_seq[k], Disturbance(p_seq[k]))?;
        let sys = PlantDae { params: &imperfect, u: u_seq[k], p: p_seq[k] };
        let (xf, _) = dae_step_with(&mut ws, &sys, &traj.x[k].0, &traj.z[k].0, &int_cfg)?;
        for i in 0..N_DIFF {
            let sd = stats.x.std[i];
            let dh = (xh.0[i] - traj.x[k + 1].0[i]) / sd;
            let df = (xf[i] - traj.x[k + 1].0[i]) / sd;
            hyb_1step += dh * dh;
            fp_1step += df * df;
        }
        count += N_DIFF;
    }
    println!("one-step (teacher-forced) MSE: hybrid {:.4e} vs fp {:.4e}", hyb_1step / count as f64, fp_1step / count as f64);

    // (a)+(b): rollout error growth, with inferred z and with oracle z.
    let mut ws2 = NewtonWorkspace::new(N_DIFF, N_ALG);
    let mut x_h = x0.clone();           // hybrid with inferred z
    let mut worst_dim = 0usize;
    for milestone in [50usize, 100, 200, 400, 600] {
        if milestone > horizon { break; }
        // continue rollout up to the milestone
        let from = if milestone == 50 { 0 } else { milestone / 2 };
        for k in from..milestone {
            x_h = hybrid.hybrid_step_with(&mut ws2, &x_h, &u_seq[k], Disturbance(p_seq[k]))?;
        }
        let mut mse = 0.0;
        let mut worst = 0.0;
        for i in 0..N_DIFF {
            let d = (x_h.0[i] - traj.x[milestone].0[i]) / stats.x.std[i];
            mse += d * d / N_DIFF as f64;
            if d.abs() > worst { worst = d.abs(); worst_dim = i; }
        }
        println!("hybrid rollout @ {milestone}: per-state MSE {:.4e}, worst dim {} ({} sigma)", mse, worst_dim, worst);
    }

    // (c) pure FP rollout but with the hybrid's inferred-z warm start (correction off).
    let zero_comp = shipcc::neural::MlpModel::zeroed(&shipcc::neural::COMPENSATION_SIZES)?;
    let hybrid_nocorr = HybridModel::new(imperfect.clone(), hybrid.inference.clone(), zero_comp, {
        let mut s = ds.stats().clone();
        s.mismatch.mean = vec![0.0; N_DIFF];
        s.mismatch.std = vec![1.0; N_DIFF];
        s
    }, int_cfg.clone())?;
    let states = hybrid_nocorr.rollout(&x0, &u_seq, &p_seq, horizon.min(600))?;
    let mse_nc = rollout_state_mse(&states, &traj.x[..states.len()], stats)?;
    println!("no-correction (fp via inferred-z) rollout MSE @{}: {:.4e}", states.len()-1, mse_nc);
    Ok(())
}
