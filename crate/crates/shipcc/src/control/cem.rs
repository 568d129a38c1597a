//! Constrained cross-entropy solver over per-step Gaussian input
//! distributions.
//!
//! Each iteration samples `n_samples` control sequences, clips them into the
//! input box, evaluates them (in parallel; samples are drawn up front so the
//! result is independent of worker count), forms the feasible set, ranks it
//! (by objective, or by constraint cost when no sample is feasible), refits
//! the distribution to the elite set, and blends it with the previous
//! parameters by moving average.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::plant::{INPUT_HI, INPUT_LO, N_INPUT};
use crate::{Error, Result};

/// Cross-entropy solver settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CeConfig {
    /// Maximum iterations.
    pub n_iterations: usize,
    /// Control sequences sampled per iteration.
    pub n_samples: usize,
    /// Elite set size.
    pub n_elite: usize,
    /// Moving-average rate: new = (1 - lambda) * elite_fit + lambda * old.
    pub blend_lambda: f64,
    /// Stop once every variance falls to this floor; also the eigenvalue
    /// floor applied after each refit.
    pub variance_floor: f64,
    /// Control horizon (steps per sequence).
    pub horizon: usize,
    /// Initial per-step mean.
    pub mu0: [f64; N_INPUT],
    /// Initial per-step variance (diagonal).
    pub nu0: [f64; N_INPUT],
    /// Input box.
    pub input_lo: [f64; N_INPUT],
    pub input_hi: [f64; N_INPUT],
}

impl Default for CeConfig {
    fn default() -> Self {
        CeConfig {
            n_iterations: 20,
            n_samples: 400,
            n_elite: 20,
            blend_lambda: 0.01,
            variance_floor: 1e-8,
            horizon: 5,
            mu0: [0.03, 0.2635, 0.03],
            nu0: [1.0, 1.0, 1.0],
            input_lo: INPUT_LO,
            input_hi: INPUT_HI,
        }
    }
}

impl CeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_elite > self.n_samples {
            return Err(Error::Config("elite size cannot exceed sample count".into()));
        }
        if !(0.0..=1.0).contains(&self.blend_lambda) {
            return Err(Error::Config("blend lambda must lie in [0, 1]".into()));
        }
        if self.horizon == 0 || self.n_iterations == 0 || self.n_samples == 0 {
            return Err(Error::Config(
                "horizon, iterations, and samples must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Per-horizon-step Gaussian mean and diagonal variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingDistribution {
    pub mu: Vec<[f64; N_INPUT]>,
    pub nu: Vec<[f64; N_INPUT]>,
}

impl SamplingDistribution {
    pub fn initial(cfg: &CeConfig) -> Self {
        SamplingDistribution {
            mu: vec![cfg.mu0; cfg.horizon],
            nu: vec![cfg.nu0; cfg.horizon],
        }
    }

    pub fn max_variance(&self) -> f64 {
        self.nu
            .iter()
            .flat_map(|step| step.iter())
            .fold(0.0f64, |m, v| m.max(*v))
    }

    /// Elite fit blended with the previous parameters:
    /// `new = (1 - lambda) * elite + lambda * old`, variances floored.
    pub fn blended_update(
        &self,
        elite: &SamplingDistribution,
        lambda: f64,
        floor: f64,
    ) -> SamplingDistribution {
        let mut out = elite.clone();
        for j in 0..self.mu.len() {
            for c in 0..N_INPUT {
                out.mu[j][c] = (1.0 - lambda) * elite.mu[j][c] + lambda * self.mu[j][c];
                out.nu[j][c] =
                    ((1.0 - lambda) * elite.nu[j][c] + lambda * self.nu[j][c]).max(floor);
            }
        }
        out
    }
}

/// One candidate's evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateEval {
    /// Accumulated objective over the horizon.
    pub cost: f64,
    /// All predicted outputs inside the output constraint set.
    pub feasible: bool,
    /// Aggregated constraint distance (0 when feasible).
    pub constraint_cost: f64,
}

impl CandidateEval {
    pub fn infeasible_failure() -> Self {
        CandidateEval {
            cost: f64::INFINITY,
            feasible: false,
            constraint_cost: f64::INFINITY,
        }
    }
}

/// Result of one CE solve.
#[derive(Debug, Clone)]
pub struct CeSolution {
    /// First element of the best sequence at the last iteration (the action
    /// to apply).
    pub action: [f64; N_INPUT],
    /// The full best sequence (used for warm starting).
    pub sequence: Vec<[f64; N_INPUT]>,
    /// Its evaluation.
    pub eval: CandidateEval,
    /// Iterations actually executed.
    pub iterations: usize,
    /// Final distribution (diagnostics).
    pub distribution: SamplingDistribution,
}

/// Run the constrained cross-entropy method.
///
/// `objective` maps a clipped control sequence to its evaluation; it runs in
/// parallel over candidates and must be deterministic.
pub fn ce_solve<F>(
    objective: F,
    init: &SamplingDistribution,
    cfg: &CeConfig,
    seed: u64,
) -> Result<CeSolution>
where
    F: Fn(&[[f64; N_INPUT]]) -> CandidateEval + Sync,
{
    cfg.validate()?;
    if init.mu.len() != cfg.horizon || init.nu.len() != cfg.horizon {
        return Err(Error::Shape(format!(
            "initial distribution horizon {} does not match config horizon {}",
            init.mu.len(),
            cfg.horizon
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dist = init.clone();
    let mut best: Option<(Vec<[f64; N_INPUT]>, CandidateEval)> = None;
    let mut iterations = 0usize;

    while iterations < cfg.n_iterations && dist.max_variance() > cfg.variance_floor {
        // Draw all samples up front from the single seeded stream.
        let mut samples: Vec<Vec<[f64; N_INPUT]>> = Vec::with_capacity(cfg.n_samples);
        for _ in 0..cfg.n_samples {
            let mut seq = Vec::with_capacity(cfg.horizon);
            for j in 0..cfg.horizon {
                let mut step = [0.0; N_INPUT];
                for c in 0..N_INPUT {
                    let xi: f64 = StandardNormal.sample(&mut rng);
                    step[c] = (dist.mu[j][c] + dist.nu[j][c].sqrt() * xi)
                        .clamp(cfg.input_lo[c], cfg.input_hi[c]);
                }
                seq.push(step);
            }
            samples.push(seq);
        }

        let evals: Vec<CandidateEval> = samples
            .par_iter()
            .map(|seq| objective(seq))
            .collect();

        // Feasible set; rank by objective inside it, otherwise rank all by
        // constraint cost. Ties break by sample index (stable sort).
        let feasible: Vec<usize> = (0..cfg.n_samples).filter(|&i| evals[i].feasible).collect();
        let elite_indices: Vec<usize> = if feasible.is_empty() {
            let mut order: Vec<usize> = (0..cfg.n_samples).collect();
            order.sort_by(|&a, &b| {
                evals[a]
                    .constraint_cost
                    .partial_cmp(&evals[b].constraint_cost)
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
            order.truncate(cfg.n_elite);
            order
        } else {
            let mut order = feasible;
            order.sort_by(|&a, &b| {
                evals[a]
                    .cost
                    .partial_cmp(&evals[b].cost)
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
            order.truncate(cfg.n_elite);
            order
        };

        // Refit mean and per-coordinate variance to the elite set.
        let m = elite_indices.len().max(1) as f64;
        let mut elite = SamplingDistribution {
            mu: vec![[0.0; N_INPUT]; cfg.horizon],
            nu: vec![[0.0; N_INPUT]; cfg.horizon],
        };
        for &i in &elite_indices {
            for j in 0..cfg.horizon {
                for c in 0..N_INPUT {
                    elite.mu[j][c] += samples[i][j][c] / m;
                }
            }
        }
        for &i in &elite_indices {
            for j in 0..cfg.horizon {
                for c in 0..N_INPUT {
                    let d = samples[i][j][c] - elite.mu[j][c];
                    elite.nu[j][c] += d * d / m;
                }
            }
        }
        dist = dist.blended_update(&elite, cfg.blend_lambda, cfg.variance_floor);

        // The best sample of this (now the last executed) iteration.
        let head = elite_indices[0];
        best = Some((samples[head].clone(), evals[head]));
        iterations += 1;
    }

    let (sequence, eval) = best.ok_or_else(|| {
        Error::Config("cross-entropy solver executed zero iterations".into())
    })?;
    Ok(CeSolution {
        action: sequence[0],
        sequence,
        eval,
        iterations,
        distribution: dist,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn blend_identities_hold_exactly() {
        let cfg = CeConfig::default();
        let a = SamplingDistribution {
            mu: vec![[0.03, 0.25, 0.03]; cfg.horizon],
            nu: vec![[1.0, 1.0, 1.0]; cfg.horizon],
        };
        let elite = SamplingDistribution {
            mu: vec![[0.025, 0.2, 0.035]; cfg.horizon],
            nu: vec![[0.5, 0.25, 0.125]; cfg.horizon],
        };
        // lambda = 1: distribution unchanged.
        let kept = a.blended_update(&elite, 1.0, 0.0);
        assert_eq!(kept.mu, a.mu);
        assert_eq!(kept.nu, a.nu);
        // lambda = 0: elite fit adopted exactly.
        let swapped = a.blended_update(&elite, 0.0, 0.0);
        assert_eq!(swapped.mu, elite.mu);
        assert_eq!(swapped.nu, elite.nu);
    }

    #[test]
    fn quadratic_box_interior_optimum_is_found() {
        let cfg = CeConfig::default();
        let target = [0.032, 0.24, 0.026];
        let objective = |seq: &[[f64; N_INPUT]]| {
            let cost = seq
                .iter()
                .map(|u| {
                    (0..N_INPUT)
                        .map(|c| (u[c] - target[c]) * (u[c] - target[c]))
                        .sum::<f64>()
                })
                .sum::<f64>();
            CandidateEval {
                cost,
                feasible: true,
                constraint_cost: 0.0,
            }
        };
        let sol = ce_solve(objective, &SamplingDistribution::initial(&cfg), &cfg, 17).unwrap();
        for c in 0..N_INPUT {
            assert_relative_eq!(sol.action[c], target[c], epsilon = 1e-3);
        }
        assert!(sol.iterations <= cfg.n_iterations);
    }

    #[test]
    fn empty_feasible_set_ranks_by_constraint_distance() {
        let cfg = CeConfig {
            n_iterations: 1,
            ..CeConfig::default()
        };
        // No sample is ever feasible; the constraint cost prefers the fuel
        // coordinate near its lower bound.
        let objective = |seq: &[[f64; N_INPUT]]| CandidateEval {
            cost: 0.0,
            feasible: false,
            constraint_cost: seq.iter().map(|u| (u[1] - 0.194).abs()).sum::<f64>(),
        };
        let sol = ce_solve(objective, &SamplingDistribution::initial(&cfg), &cfg, 3).unwrap();
        assert!(!sol.eval.feasible);
        // With one iteration over 400 clipped samples the winner sits at the
        // fuel lower bound (half of all draws clip onto it).
        assert_relative_eq!(sol.action[1], 0.194, epsilon = 1e-6);
    }

    #[test]
    fn solver_is_deterministic_under_seed() {
        let cfg = CeConfig::default();
        let objective = |seq: &[[f64; N_INPUT]]| CandidateEval {
            cost: seq.iter().flat_map(|u| u.iter()).map(|v| v * v).sum(),
            feasible: true,
            constraint_cost: 0.0,
        };
        let a = ce_solve(objective, &SamplingDistribution::initial(&cfg), &cfg, 5).unwrap();
        let b = ce_solve(objective, &SamplingDistribution::initial(&cfg), &cfg, 5).unwrap();
        assert_eq!(a.action, b.action);
        assert_eq!(a.iterations, b.iterations);
    }

    #[test]
    fn every_sampled_action_is_clipped_into_the_box() {
        let cfg = CeConfig::default();
        let objective = |seq: &[[f64; N_INPUT]]| {
            for u in seq {
                for c in 0..N_INPUT {
                    assert!(u[c] >= INPUT_LO[c] && u[c] <= INPUT_HI[c]);
                }
            }
            CandidateEval {
                cost: seq[0][1],
                feasible: true,
                constraint_cost: 0.0,
            }
        };
        let sol = ce_solve(objective, &SamplingDistribution::initial(&cfg), &cfg, 9).unwrap();
        assert!(sol.action[1] >= INPUT_LO[1] && sol.action[1] <= INPUT_HI[1]);
    }
}
