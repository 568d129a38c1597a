//! Multi-step open-loop prediction comparison on held-out data: hybrid
//! model vs the imperfect first-principles model vs a purely data-driven
//! baseline, all trained on the same dataset.
//!
//! Run: `cargo run --release --example rollout_comparison`
//! Optional args: `<n_train_samples> <epochs> <rollout_steps>`

use shipcc::cli::{evaluate_blackbox, evaluate_models, evaluation_trajectory, train_models};
use shipcc::datagen::{build_dataset, Scenario};
use shipcc::integrator::IntegratorConfig;
use shipcc::io;
use shipcc::neural::{BlackboxVariant, TrainConfig};
use shipcc::plant::PlantParameters;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().collect();
    let n_train: usize = args.get(1).map_or(8000, |s| s.parse().unwrap());
    let epochs: usize = args.get(2).map_or(150, |s| s.parse().unwrap());
    let steps: usize = args.get(3).map_or(900, |s| s.parse().unwrap());

    let truth = PlantParameters::truth();
    let imperfect = PlantParameters::imperfect();
    let int_cfg = IntegratorConfig::default();
    let scenario = Scenario::case_i();

    println!("dataset: {n_train} samples; training hybrid nets and the NN2 baseline...");
    let ds = build_dataset(&scenario, n_train, &truth, &imperfect, &int_cfg, 1)?;
    let models = train_models(
        &ds,
        &int_cfg,
        &TrainConfig {
            epochs,
            seed: 1,
            ..TrainConfig::default()
        },
        &[BlackboxVariant::Nn2],
    )?;

    println!("evaluating {steps}-step rollouts on a held-out trajectory...");
    let eval_traj = evaluation_trajectory(&scenario, steps, 9090, &truth, &int_cfg)?;
    let (hybrid_mse, fp_mse) =
        evaluate_models(&models.hybrid, &eval_traj, &imperfect, &int_cfg, steps)?;
    let (_, nn2) = &models.blackbox[0];
    let nn2_mse = evaluate_blackbox(&nn2.model, ds.stats(), &eval_traj, steps)?;

    println!("\n{steps}-step open-loop prediction MSE (normalized states):");
    println!("  {:<22} x: {:>10.4e}   z: {:>10.4e}", "hybrid", hybrid_mse.x_mse, hybrid_mse.z_mse);
    println!("  {:<22} x: {:>10.4e}   z: {:>10.4e}", "imperfect-fp", fp_mse.x_mse, fp_mse.z_mse);
    println!("  {:<22} x: {:>10.4e}", "black-box NN2", nn2_mse);

    // Figure-analog CSV with the truth and hybrid state trajectories.
    let hybrid_states = models
        .hybrid
        .rollout(&eval_traj.x[0], &eval_traj.u, &eval_traj.p, steps)?;
    let out = std::path::Path::new("runs/rollout-example");
    std::fs::create_dir_all(out)?;
    std::fs::write(
        out.join("rollout_comparison.csv"),
        io::rollout_comparison_csv(
            &["truth", "hybrid"],
            &[&eval_traj.x[..=steps], &hybrid_states],
            &eval_traj.t,
        )?,
    )?;
    println!("\nper-state trajectories written to runs/rollout-example/rollout_comparison.csv");
    Ok(())
}
