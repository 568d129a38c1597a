//! Train a hybrid model, then run economic MPC against set-point-tracking
//! MPC (and an EMPC driven by the raw imperfect model) on the truth plant
//! over a shared engine-load profile.
//!
//! Run: `cargo run --release --example closed_loop_empc`
//! Optional args: `<n_control_steps> <n_train_samples> <epochs>`

use shipcc::cli::{control_comparison_study, train_models};
use shipcc::control::ClosedLoopConfig;
use shipcc::datagen::{build_dataset, make_disturbance_profile, Scenario};
use shipcc::integrator::IntegratorConfig;
use shipcc::neural::TrainConfig;
use shipcc::plant::PlantParameters;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().collect();
    let n_control_steps: usize = args.get(1).map_or(20, |s| s.parse().unwrap());
    let n_train: usize = args.get(2).map_or(8000, |s| s.parse().unwrap());
    let epochs: usize = args.get(3).map_or(150, |s| s.parse().unwrap());

    let truth = PlantParameters::truth();
    let imperfect = PlantParameters::imperfect();
    let int_cfg = IntegratorConfig::default();
    let scenario = Scenario::case_i();

    println!("building dataset ({n_train} samples) and training the hybrid model...");
    let t0 = std::time::Instant::now();
    let ds = build_dataset(&scenario, n_train, &truth, &imperfect, &int_cfg, 1)?;
    let models = train_models(
        &ds,
        &int_cfg,
        &TrainConfig {
            epochs,
            seed: 1,
            ..TrainConfig::default()
        },
        &[],
    )?;
    println!("  ready in {:.0} s", t0.elapsed().as_secs_f64());

    // Slow-steaming load profile, one level per 200 samples.
    let profile_scenario = Scenario {
        load_hold: 200,
        ..Scenario::single_condition(0)
    };
    let profile = make_disturbance_profile(&profile_scenario, n_control_steps * 10, 7)?;

    let clc = ClosedLoopConfig {
        n_control_steps,
        seed: 5,
        ..ClosedLoopConfig::default()
    };
    let controllers = [
        "empc-hybrid".to_string(),
        "mpc-hybrid".to_string(),
        "empc-imperfect".to_string(),
    ];
    println!("running {n_control_steps} control steps per controller...");
    let t0 = std::time::Instant::now();
    let (report, traces) = control_comparison_study(
        &models.hybrid,
        &controllers,
        &profile,
        &clc,
        &int_cfg,
        &Default::default(),
        0.55,
    )?;
    println!("  closed loops done in {:.0} s", t0.elapsed().as_secs_f64());

    if let Some(sp) = &report.setpoint {
        println!(
            "tracking set-point: y_s = ({:.3} kg/s, {:.2} K), u_s = ({:.4}, {:.4}, {:.4}), cost {:.4} $/s",
            sp.y_s[0], sp.y_s[1], sp.u_s[0], sp.u_s[1], sp.u_s[2], sp.cost_rate
        );
    }
    println!(
        "\n{:<16} {:>12} {:>11} {:>14} {:>12}",
        "controller", "cost $/s", "capture %", "T_reb viol %", "solve ms"
    );
    for (name, trace) in &traces {
        let n = trace.samples.len();
        let mean = |f: &dyn Fn(&shipcc::control::ClosedLoopSample) -> f64| {
            trace.samples.iter().map(|s| f(s)).sum::<f64>() / n as f64
        };
        let last_q = &trace.samples[3 * n / 4..];
        println!(
            "  [{name}] mean u = ({:.4}, {:.4}, {:.4});   last-quartile capture {:.2}%, cost {:.4}, T_reb {:.2} K",
            mean(&|s| s.u[0]),
            mean(&|s| s.u[1]),
            mean(&|s| s.u[2]),
            100.0 * last_q.iter().map(|s| s.capture).sum::<f64>() / last_q.len() as f64,
            last_q.iter().map(|s| s.cost_rate).sum::<f64>() / last_q.len() as f64,
            last_q.iter().map(|s| s.y[1]).sum::<f64>() / last_q.len() as f64,
        );
    }
    for r in &report.results {
        println!(
            "{:<16} {:>12.4} {:>11.2} {:>14.2} {:>12.0}",
            r.name,
            r.summary.avg_cost_rate,
            100.0 * r.summary.avg_capture,
            100.0 * r.summary.treb_violation_fraction,
            r.summary.avg_solve_ms
        );
    }
    Ok(())
}
