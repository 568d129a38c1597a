//! Throwaway: inspect raw values of the worst dims at 50 rollout steps.
use shipcc::datagen::{build_dataset, make_disturbance_profile, make_excitation, Scenario};
use shipcc::hybrid::HybridModel;
use shipcc::integrator::{nominal_steady_state, simulate_open_loop, IntegratorConfig, NewtonWorkspace};
use shipcc::neural::{train_compensation_net, train_inference_net, TrainConfig};
use shipcc::plant::{Disturbance, PlantParameters, N_DIFF};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let truth = PlantParameters::truth();
    let imperfect = PlantParameters::imperfect();
    let int_cfg = IntegratorConfig::default();
    let scenario = Scenario::case_i();
    let ds = build_dataset(&scenario, 4000, &truth, &imperfect, &int_cfg, 1)?;
    let tc = TrainConfig { epochs: 120, seed: 1, ..TrainConfig::default() };
    let inf = train_inference_net(&ds, &tc)?;
    let comp = train_compensation_net(&ds, &tc)?;
    let hybrid = HybridModel::new(imperfect.clone(), inf.model, comp.model, ds.stats().clone(), int_cfg.clone())?;

    let p_seq = make_disturbance_profile(&scenario, 60, 9090)?;
    let u_seq = make_excitation(60, scenario.input_hold, 9091)?;
    let (x0, _) = nominal_steady_state(&truth, &int_cfg)?;
    let traj = simulate_open_loop(&x0, &u_seq, &p_seq, &truth, &int_cfg)?;
    let stats = ds.stats();

    let mut ws = NewtonWorkspace::new(N_DIFF, 7);
    let mut x = x0.clone();
    for k in 0..50 {
        x = hybrid.hybrid_step_with(&mut ws, &x, &u_seq[k], Disturbance(p_seq[k]))?;
    }
    let mut idx: Vec<usize> = (0..N_DIFF).collect();
    idx.sort_by(|&a, &b| {
        let da = ((x.0[a] - traj.x[50].0[a]) / stats.x.std[a]).abs();
        let db = ((x.0[b] - traj.x[50].0[b]) / stats.x.std[b]).abs();
        db.partial_cmp(&da).unwrap()
    });
    println!("top-10 error dims at step 50:");
    for &i in idx.iter().take(10) {
        println!(
            "  dim {i:3}: hybrid {:+.6e} truth {:+.6e} std {:.3e}  ({:.1} sigma)  mм_std {:.3e}",
            x.0[i],
            traj.x[50].0[i],
            stats.x.std[i],
            ((x.0[i] - traj.x[50].0[i]) / stats.x.std[i]).abs(),
            stats.mismatch.std[i],
        );
    }
    Ok(())
}
