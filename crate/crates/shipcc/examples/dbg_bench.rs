//! Throwaway micro-bench of the CE hot path.
use shipcc::cli::train_models;
use shipcc::datagen::{build_dataset, Scenario};
use shipcc::integrator::{nominal_steady_state, IntegratorConfig, NewtonWorkspace, dae_step_with, PlantDae};
use shipcc::neural::TrainConfig;
use shipcc::plant::{ControlInput, Disturbance, PlantParameters, N_ALG, N_DIFF};
use std::time::Instant;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // 1. nalgebra LU timing at n = 110.
    let n = 110;
    let a = nalgebra::DMatrix::<f64>::from_fn(n, n, |i, j| {
        if i == j { 4.0 } else { 1.0 / (1.0 + (i as f64 - j as f64).abs()) }
    });
    let t0 = Instant::now();
    let reps = 200;
    let mut acc = 0.0;
    for _ in 0..reps {
        let lu = a.clone().lu();
        acc += lu.determinant().abs().ln();
    }
    println!("LU 110x110: {:.0} us each (acc {acc:.1})", t0.elapsed().as_secs_f64() * 1e6 / reps as f64);

    // 2. Candidate rollout stats with the real hybrid model.
    let truth = PlantParameters::truth();
    let imperfect = PlantParameters::imperfect();
    let int_cfg = IntegratorConfig::default();
    let ds = build_dataset(&Scenario::case_i(), 3000, &truth, &imperfect, &int_cfg, 1)?;
    let models = train_models(&ds, &int_cfg, &TrainConfig { epochs: 40, seed: 1, ..TrainConfig::default() }, &[])?;
    let hybrid = &models.hybrid;
    let (x0, _) = nominal_steady_state(&truth, &int_cfg)?;

    // One candidate: 5 hybrid steps with a fresh workspace, varying u per step.
    let us = [
        ControlInput::new(0.022, 0.21, 0.03),
        ControlInput::new(0.035, 0.30, 0.025),
        ControlInput::new(0.03, 0.194, 0.04),
        ControlInput::new(0.04, 0.333, 0.02),
        ControlInput::new(0.028, 0.25, 0.033),
    ];
    let t0 = Instant::now();
    let reps = 50;
    let mut stats_total = (0u64, 0u64, 0u64);
    for _ in 0..reps {
        let mut ws = NewtonWorkspace::new(N_DIFF, N_ALG);
        let mut x = x0.clone();
        for u in &us {
            x = hybrid.hybrid_step_with(&mut ws, &x, u, Disturbance(0.55))?;
        }
        stats_total.0 += ws.stats.jacobian_builds;
        stats_total.1 += ws.stats.iterations;
        stats_total.2 += ws.stats.stages;
    }
    let dt = t0.elapsed().as_secs_f64();
    println!(
        "hybrid candidate (5 steps): {:.2} ms; per candidate: {:.1} J builds, {:.1} iters, {:.0} stages",
        dt * 1e3 / reps as f64,
        stats_total.0 as f64 / reps as f64,
        stats_total.1 as f64 / reps as f64,
        stats_total.2 as f64 / reps as f64,
    );

    // 3. Same but constant u (steady-state-like candidate).
    let t0 = Instant::now();
    let mut stats_total = (0u64, 0u64);
    for _ in 0..reps {
        let mut ws = NewtonWorkspace::new(N_DIFF, N_ALG);
        let mut x = x0.clone();
        let u = ControlInput::box_midpoint();
        for _ in 0..5 {
            x = hybrid.hybrid_step_with(&mut ws, &x, &u, Disturbance(0.55))?;
        }
        stats_total.0 += ws.stats.jacobian_builds;
        stats_total.1 += ws.stats.iterations;
    }
    println!(
        "constant-u candidate: {:.2} ms; {:.1} J builds, {:.1} iters",
        t0.elapsed().as_secs_f64() * 1e3 / reps as f64,
        stats_total.0 as f64 / reps as f64,
        stats_total.1 as f64 / reps as f64,
    );

    // 4. Plain dae_step throughput at steady state (reference).
    let sys = PlantDae { params: &imperfect, u: ControlInput::box_midpoint(), p: 0.55 };
    let z0 = shipcc::integrator::consistent_initialize(&x0, &ControlInput::box_midpoint(), Disturbance(0.55), &imperfect, &int_cfg)?;
    let mut ws = NewtonWorkspace::new(N_DIFF, N_ALG);
    let t0 = Instant::now();
    let reps = 500;
    let mut x = x0.clone();
    for _ in 0..reps {
        let (xn, _zn) = dae_step_with(&mut ws, &sys, &x.0, &z0.0, &int_cfg)?;
        x = shipcc::plant::PlantState::from_slice(&xn)?;
    }
    println!("sequential dae_step: {:.2} ms ({} J builds / {} iters over {reps} steps)",
        t0.elapsed().as_secs_f64() * 1e3 / reps as f64, ws.stats.jacobian_builds, ws.stats.iterations);

    // 5. Same varying-u candidate with a relaxed controller-side tolerance.
    for tol in [1e-6f64, 1e-7] {
        let mut hybrid_fast = hybrid.clone();
        hybrid_fast.int_cfg.newton_tol = tol;
        let t0 = Instant::now();
        let reps = 50;
        let mut stats_total = (0u64, 0u64);
        for _ in 0..reps {
            let mut ws = NewtonWorkspace::new(N_DIFF, N_ALG);
            let mut x = x0.clone();
            for u in &us {
                x = hybrid_fast.hybrid_step_with(&mut ws, &x, u, Disturbance(0.55))?;
            }
            stats_total.0 += ws.stats.jacobian_builds;
            stats_total.1 += ws.stats.iterations;
        }
        println!(
            "varying-u candidate @ tol {tol:.0e}: {:.2} ms; {:.1} J builds, {:.1} iters",
            t0.elapsed().as_secs_f64() * 1e3 / reps as f64,
            stats_total.0 as f64 / reps as f64,
            stats_total.1 as f64 / reps as f64,
        );
    }

    // 6. Rebuild the Jacobian at every step boundary (u changes there).
    for tol in [1e-6f64, 1e-8] {
        let mut hybrid_fast = hybrid.clone();
        hybrid_fast.int_cfg.newton_tol = tol;
        let t0 = Instant::now();
        let reps = 50;
        let mut stats_total = (0u64, 0u64);
        for _ in 0..reps {
            let mut ws = NewtonWorkspace::new(N_DIFF, N_ALG);
            let mut x = x0.clone();
            for u in &us {
                ws.invalidate();
                x = hybrid_fast.hybrid_step_with(&mut ws, &x, u, Disturbance(0.55))?;
            }
            stats_total.0 += ws.stats.jacobian_builds;
            stats_total.1 += ws.stats.iterations;
        }
        println!(
            "per-step-J candidate @ tol {tol:.0e}: {:.2} ms; {:.1} J builds, {:.1} iters",
            t0.elapsed().as_secs_f64() * 1e3 / reps as f64,
            stats_total.0 as f64 / reps as f64,
            stats_total.1 as f64 / reps as f64,
        );
    }

    // 7. Net forward cost.
    {
        let comp = shipcc::neural::MlpModel::init(&shipcc::neural::COMPENSATION_SIZES, 3)?;
        let inf = shipcc::neural::MlpModel::init(&shipcc::neural::INFERENCE_SIZES, 4)?;
        let xin = ndarray::Array1::<f64>::from_elem(114, 0.3);
        let xin2 = ndarray::Array1::<f64>::from_elem(107, 0.3);
        let t0 = Instant::now();
        let reps = 5000;
        let mut acc = 0.0;
        for _ in 0..reps {
            acc += comp.forward(&xin.view())?[0];
        }
        println!("comp forward: {:.1} us (acc {acc:.2})", t0.elapsed().as_secs_f64()*1e6/reps as f64);
        let t0 = Instant::now();
        let mut acc = 0.0;
        for _ in 0..reps {
            acc += inf.forward(&xin2.view())?[0];
        }
        println!("inference forward: {:.1} us (acc {acc:.2})", t0.elapsed().as_secs_f64()*1e6/reps as f64);
    }
    Ok(())
}
