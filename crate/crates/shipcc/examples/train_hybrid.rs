//! Generate a small mixed-condition dataset, train the algebraic-state
//! inference and state-dynamics compensation networks, compose the hybrid
//! model, and compare multi-step open-loop predictions against the
//! imperfect first-principles model alone.
//!
//! Run: `cargo run --release --example train_hybrid`
//! Optional args: `<n_samples> <epochs> <rollout_steps>`

use shipcc::datagen::{build_dataset, make_disturbance_profile, make_excitation, Scenario};
use shipcc::hybrid::{rollout_alg_mse, rollout_state_mse, HybridModel};
use shipcc::integrator::{
    consistent_initialize, nominal_steady_state, simulate_open_loop, IntegratorConfig,
    NewtonWorkspace, plant_step_with,
};
use shipcc::neural::{train_compensation_net, train_inference_net, TrainConfig};
use shipcc::plant::{AlgebraicState, Disturbance, PlantParameters, PlantState, N_ALG, N_DIFF};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().collect();
    let n_samples: usize = args.get(1).map_or(4000, |s| s.parse().unwrap());
    let epochs: usize = args.get(2).map_or(120, |s| s.parse().unwrap());
    let rollout_steps: usize = args.get(3).map_or(600, |s| s.parse().unwrap());

    let truth = PlantParameters::truth();
    let imperfect = PlantParameters::imperfect();
    let int_cfg = IntegratorConfig::default();
    let scenario = Scenario::case_i();
    let seed = 1u64;

    println!("building dataset: {n_samples} samples, scenario {}", scenario.name);
    let t0 = std::time::Instant::now();
    let ds = build_dataset(&scenario, n_samples, &truth, &imperfect, &int_cfg, seed)?;
    println!("  built in {:.1} s", t0.elapsed().as_secs_f64());
    let mm = ds.mismatch.as_ref().unwrap();
    let mm_norm: f64 = mm.iter().map(|v| v * v).sum::<f64>() / mm.len() as f64;
    println!("  raw mismatch mean square: {mm_norm:.3e}");

    let train_cfg = TrainConfig {
        epochs,
        seed,
        ..TrainConfig::default()
    };
    println!("training inference net (107-150-7)...");
    let t0 = std::time::Instant::now();
    let inference = train_inference_net(&ds, &train_cfg)?;
    println!(
        "  best val MSE {:.3e} at epoch {} ({} epochs run, {:.1} s)",
        inference.best_val_mse,
        inference.best_epoch,
        inference.curves.len(),
        t0.elapsed().as_secs_f64()
    );

    println!("training compensation net (114-600-103)...");
    let t0 = std::time::Instant::now();
    let compensation = train_compensation_net(&ds, &train_cfg)?;
    println!(
        "  best val MSE {:.3e} at epoch {} ({} epochs run, {:.1} s)",
        compensation.best_val_mse,
        compensation.best_epoch,
        compensation.curves.len(),
        t0.elapsed().as_secs_f64()
    );

    let hybrid = HybridModel::new(
        imperfect.clone(),
        inference.model,
        compensation.model,
        ds.stats().clone(),
        int_cfg.clone(),
    )?;

    // Held-out evaluation trajectory from a fresh seed.
    println!("simulating held-out evaluation trajectory ({rollout_steps} steps)...");
    let eval_seed = 9090u64;
    let p_seq = make_disturbance_profile(&scenario, rollout_steps, eval_seed)?;
    let u_seq = make_excitation(rollout_steps, scenario.input_hold, eval_seed + 1)?;
    let (x0, _) = nominal_steady_state(&truth, &int_cfg)?;
    let truth_traj = simulate_open_loop(&x0, &u_seq, &p_seq, &truth, &int_cfg)?;

    // Hybrid rollout.
    let t0 = std::time::Instant::now();
    let hybrid_states = hybrid.rollout(&x0, &u_seq, &p_seq, rollout_steps)?;
    println!("  hybrid rollout {:.1} s", t0.elapsed().as_secs_f64());

    // Imperfect first-principles rollout (its own algebraic path).
    let mut fp_states: Vec<PlantState> = Vec::with_capacity(rollout_steps + 1);
    let mut fp_alg: Vec<AlgebraicState> = Vec::with_capacity(rollout_steps + 1);
    let mut x = x0.clone();
    let mut z = consistent_initialize(&x, &u_seq[0], Disturbance(p_seq[0]), &imperfect, &int_cfg)?;
    fp_states.push(x.clone());
    fp_alg.push(z);
    let mut ws = NewtonWorkspace::new(N_DIFF, N_ALG);
    for k in 0..rollout_steps {
        let (xn, zn) = plant_step_with(&mut ws, &x, &z, &u_seq[k], Disturbance(p_seq[k]), &imperfect, &int_cfg)?;
        x = xn;
        z = zn;
        fp_states.push(x.clone());
        fp_alg.push(z);
    }

    let stats = ds.stats();
    let hybrid_x_mse = rollout_state_mse(&hybrid_states, &truth_traj.x, stats)?;
    let fp_x_mse = rollout_state_mse(&fp_states, &truth_traj.x, stats)?;

    // Hybrid algebraic predictions come from the inference net along the
    // hybrid rollout.
    let mut hybrid_alg = Vec::with_capacity(rollout_steps + 1);
    hybrid_alg.push(truth_traj.z[0]);
    for k in 0..rollout_steps {
        hybrid_alg.push(hybrid.infer_algebraic(
            &hybrid_states[k],
            &u_seq[k],
            Disturbance(p_seq[k]),
        )?);
    }
    let hybrid_z_mse = rollout_alg_mse(&hybrid_alg, &truth_traj.z, stats)?;
    let fp_z_mse = rollout_alg_mse(&fp_alg, &truth_traj.z, stats)?;

    println!("\n{rollout_steps}-step open-loop prediction MSE (normalized):");
    println!("  differential states: hybrid {hybrid_x_mse:.4e}  vs  imperfect FP {fp_x_mse:.4e}  (ratio {:.3})", hybrid_x_mse / fp_x_mse);
    println!("  algebraic states:    hybrid {hybrid_z_mse:.4e}  vs  imperfect FP {fp_z_mse:.4e}  (ratio {:.3})", hybrid_z_mse / fp_z_mse);
    Ok(())
}
