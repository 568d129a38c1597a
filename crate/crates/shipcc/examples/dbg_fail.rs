//! Throwaway debug probe for the sample-800 Newton stall.
use nalgebra::{DMatrix, DVector};
use shipcc::datagen::{make_disturbance_profile, make_excitation, Scenario};
use shipcc::integrator::{nominal_steady_state, simulate_open_loop, IntegratorConfig};
use shipcc::plant::{plant_dae, Disturbance, PlantParameters, N_ALG, N_DIFF};

fn main() {
    let truth = PlantParameters::truth();
    let cfg = IntegratorConfig::default();
    let sc = Scenario::case_i();
    let seed = 1u64;
    let p_seq = make_disturbance_profile(&sc, 810, shipcc::datagen::derive_seed(seed, 1)).unwrap();
    let u_seq = make_excitation(810, sc.input_hold, shipcc::datagen::derive_seed(seed, 2)).unwrap();
    let (x0, _) = nominal_steady_state(&truth, &cfg).unwrap();
    let t = simulate_open_loop(&x0, &u_seq[..800], &p_seq[..800], &truth, &cfg).unwrap();
    let x = t.x[800].clone();
    let z = t.z[800];
    let u = u_seq[800];
    let p = Disturbance(p_seq[800]);
    println!("state at 800: T_reb={:.2} HX=({:.1},{:.1})", x.t_reb(), x.0[100], x.0[101]);
    println!("abs TL: {:?}", &x.0[20..25].iter().map(|v| format!("{v:.1}")).collect::<Vec<_>>());
    println!("des TL: {:?}", &x.0[70..75].iter().map(|v| format!("{v:.1}")).collect::<Vec<_>>());
    println!("des gas co2: {:?}", &x.0[80..85].iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>());
    println!("des gas h2o: {:?}", &x.0[90..95].iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>());
    println!("z = {:?}", z.0.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>());

    // Manual implicit-Euler stage: h = 4 s.
    let h = 4.0;
    let n = N_DIFF + N_ALG;
    let resid = |w: &DVector<f64>| -> DVector<f64> {
        let xs = shipcc::plant::PlantState::from_slice(&w.as_slice()[..N_DIFF]).unwrap();
        let zs = shipcc::plant::AlgebraicState::from_slice(&w.as_slice()[N_DIFF..]).unwrap();
        let (xdot, g) = plant_dae(&xs, &zs, &u, p, &truth).unwrap();
        let mut r = DVector::zeros(n);
        for i in 0..N_DIFF {
            r[i] = w[i] - x.0[i] - h * xdot.0[i];
        }
        for i in 0..N_ALG {
            r[N_DIFF + i] = g.0[i];
        }
        r
    };
    // Predictor.
    let (xdot0, _) = plant_dae(&x, &z, &u, p, &truth).unwrap();
    let mut w = DVector::zeros(n);
    for i in 0..N_DIFF {
        w[i] = x.0[i] + h * xdot0.0[i];
    }
    for i in 0..N_ALG {
        w[N_DIFF + i] = z.0[i];
    }
    for iter in 0..20 {
        let r = resid(&w);
        let norm = r.amax();
        let mut worst = 0;
        for i in 0..n {
            if r[i].abs() > r[worst].abs() {
                worst = i;
            }
        }
        println!("iter {iter}: |R|={norm:.4e} worst row {worst} = {:.4e} (w[worst]={:.4})", r[worst], w[worst]);
        if norm < 1e-8 {
            println!("converged");
            break;
        }
        // Fresh FD Jacobian every iteration (full Newton).
        let mut jac = DMatrix::zeros(n, n);
        for j in 0..n {
            let step = 1e-7 * w[j].abs().max(1e-3);
            let mut wp = w.clone();
            wp[j] += step;
            let rp = resid(&wp);
            for i in 0..n {
                jac[(i, j)] = (rp[i] - r[i]) / step;
            }
        }
        let lu = jac.lu();
        let delta = lu.solve(&(-&r)).unwrap();
        // plain full step with backtracking
        let mut alpha = 1.0;
        let mut done = false;
        for _ in 0..8 {
            let wt = &w + alpha * &delta;
            let rt = resid(&wt);
            if rt.amax() < norm {
                w = wt;
                done = true;
                break;
            }
            alpha *= 0.5;
        }
        if !done {
            println!("  line search failed at iter {iter}: delta amax={:.3e}", delta.amax());
            // report the biggest |delta| rows
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&a, &b| delta[b].abs().partial_cmp(&delta[a].abs()).unwrap());
            for &i in idx.iter().take(6) {
                println!("  delta[{i}] = {:+.4e} (w={:+.4e})", delta[i], w[i]);
            }
            break;
        }
    }
}
