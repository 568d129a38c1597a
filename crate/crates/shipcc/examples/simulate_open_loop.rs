//! Simulate the truth plant and the imperfect first-principles model open
//! loop under the same excitation, and write both trajectories to CSV.
//!
//! Run: `cargo run --release --example simulate_open_loop`
//! Optional args: `<n_samples> <out_dir>`

use shipcc::datagen::{make_disturbance_profile, make_excitation, Scenario};
use shipcc::integrator::{nominal_steady_state, simulate_open_loop, IntegratorConfig};
use shipcc::io;
use shipcc::plant::{capture_rate, Disturbance, PlantParameters};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).map_or(1000, |s| s.parse().unwrap());
    let out_dir = std::path::PathBuf::from(args.get(2).map_or("runs/simulate-example", String::as_str));

    let truth = PlantParameters::truth();
    let imperfect = PlantParameters::imperfect();
    let int_cfg = IntegratorConfig::default();
    let scenario = Scenario::case_i();

    println!("settling the nominal steady state...");
    let (x0, _) = nominal_steady_state(&truth, &int_cfg)?;

    let p_seq = make_disturbance_profile(&scenario, n, 7)?;
    let u_seq = make_excitation(n, scenario.input_hold, 8)?;

    println!("simulating {n} samples ({}h of plant time)...", n as f64 * 40.0 / 3600.0);
    let t0 = std::time::Instant::now();
    let truth_traj = simulate_open_loop(&x0, &u_seq, &p_seq, &truth, &int_cfg)?;
    let fp_traj = simulate_open_loop(&x0, &u_seq, &p_seq, &imperfect, &int_cfg)?;
    println!("  both runs done in {:.1} s", t0.elapsed().as_secs_f64());

    // Where the two models end up after the full horizon.
    let p_last = Disturbance(*p_seq.last().expect("non-empty"));
    let cap_truth = capture_rate(truth_traj.y.last().unwrap(), p_last, &truth)?;
    let cap_fp = capture_rate(fp_traj.y.last().unwrap(), p_last, &imperfect)?;
    println!("final capture rate: truth {:.2}%  imperfect {:.2}%", 100.0 * cap_truth, 100.0 * cap_fp);
    println!(
        "final reboiler temperature: truth {:.2} K  imperfect {:.2} K",
        truth_traj.y.last().unwrap().t_reb,
        fp_traj.y.last().unwrap().t_reb
    );

    std::fs::create_dir_all(&out_dir)?;
    std::fs::write(out_dir.join("truth.csv"), io::trajectory_csv(&truth_traj)?)?;
    std::fs::write(out_dir.join("imperfect.csv"), io::trajectory_csv(&fp_traj)?)?;
    io::write_trajectory_bin(&out_dir.join("truth.traj"), &truth_traj)?;
    println!("trajectories written to {}", out_dir.display());
    Ok(())
}
