//! The constrained cross-entropy solver on a synthetic problem: a convex
//! quadratic over the input box, first unconstrained, then with an output
//! constraint that makes part of the box infeasible.
//!
//! Run: `cargo run --release --example ce_quadratic`

use shipcc::control::{ce_solve, CandidateEval, CeConfig, SamplingDistribution};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = CeConfig::default();
    let target = [0.033, 0.22, 0.027];

    // Plain quadratic: the optimum is interior, no constraints.
    let quadratic = |seq: &[[f64; 3]]| {
        let cost = seq
            .iter()
            .map(|u| (0..3).map(|c| (u[c] - target[c]).powi(2)).sum::<f64>())
            .sum();
        CandidateEval {
            cost,
            feasible: true,
            constraint_cost: 0.0,
        }
    };
    let sol = ce_solve(quadratic, &SamplingDistribution::initial(&cfg), &cfg, 11)?;
    println!("unconstrained quadratic:");
    println!("  target  ({:.4}, {:.4}, {:.4})", target[0], target[1], target[2]);
    println!(
        "  found   ({:.4}, {:.4}, {:.4}) after {} iterations, cost {:.3e}",
        sol.action[0], sol.action[1], sol.action[2], sol.iterations, sol.eval.cost
    );

    // Constrained variant: pretend any fuel above 0.25 violates an output
    // band, so the feasible optimum moves to the constraint surface.
    let constrained = |seq: &[[f64; 3]]| {
        let cost: f64 = seq
            .iter()
            .map(|u| (0..3).map(|c| (u[c] - [0.03, 0.32, 0.03][c]).powi(2)).sum::<f64>())
            .sum();
        let violation = seq
            .iter()
            .map(|u| (u[1] - 0.25).max(0.0))
            .fold(0.0f64, f64::max);
        CandidateEval {
            cost,
            feasible: violation == 0.0,
            constraint_cost: violation,
        }
    };
    let sol = ce_solve(constrained, &SamplingDistribution::initial(&cfg), &cfg, 12)?;
    println!("constrained quadratic (fuel capped at 0.25 by the constraint):");
    println!(
        "  found   ({:.4}, {:.4}, {:.4}); feasible = {}, fuel sits at the cap",
        sol.action[0], sol.action[1], sol.action[2], sol.eval.feasible
    );

    // Impossible constraint: the solver falls back to constraint-distance
    // ranking and returns the least-violating head.
    let impossible = |seq: &[[f64; 3]]| CandidateEval {
        cost: 0.0,
        feasible: false,
        constraint_cost: seq.iter().map(|u| (u[2] - 0.02).abs()).sum(),
    };
    let sol = ce_solve(impossible, &SamplingDistribution::initial(&cfg), &cfg, 13)?;
    println!("infeasible problem: least-violating head has F_sw = {:.4} (bound 0.02)", sol.action[2]);
    Ok(())
}
