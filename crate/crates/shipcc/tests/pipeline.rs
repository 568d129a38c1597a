//! End-to-end pipeline checks at smoke scale: the command layer writes
//! consistent artifacts, errors carry actionable context, and the dataset
//! invariants hold record-wise.

use shipcc::cli;
use shipcc::config::RunConfig;
use shipcc::datagen::{build_dataset, Scenario};
use shipcc::integrator::{dae_step, IntegratorConfig};
use shipcc::io;
use shipcc::plant::{AlgebraicState, ControlInput, Disturbance, PlantParameters, PlantState};

fn config_with_out(tmp: &std::path::Path, body: &str) -> (RunConfig, String) {
    let text = format!(
        "[run]\nseed = 3\nout_dir = \"{}\"\n\n{body}",
        tmp.display().to_string().replace('\\', "/")
    );
    (RunConfig::parse(&text).unwrap(), text)
}

#[test]
fn missing_config_error_names_the_path() {
    let err = RunConfig::load(std::path::Path::new("/definitely/not/here.toml")).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("/definitely/not/here.toml"), "message was: {msg}");
}

#[test]
fn simulate_writes_csv_with_expected_row_count() {
    let tmp = tempfile::tempdir().unwrap();
    let (cfg, text) = config_with_out(tmp.path(), "[simulation]\nn_samples = 60\n");
    let dir = cli::cmd_simulate(&cfg, &text).unwrap();
    let csv = std::fs::read_to_string(dir.join("trajectory.csv")).unwrap();
    // header + n + 1 rows
    assert_eq!(csv.lines().count(), 1 + 60 + 1);
    let traj = io::read_trajectory_bin(&dir.join("trajectory.traj")).unwrap();
    assert_eq!(traj.len(), 60);
    assert!(dir.join("manifest.json").exists());
}

#[test]
fn gen_data_roundtrips_and_labels_satisfy_the_identity() {
    let tmp = tempfile::tempdir().unwrap();
    let (cfg, text) = config_with_out(tmp.path(), "[data]\nn_samples = 120\n");
    let dir = cli::cmd_gen_data(&cfg, &text).unwrap();
    let ds = io::read_dataset_bin(&dir.join("dataset.dsb")).unwrap();
    assert_eq!(ds.x.nrows(), 120);

    // x_next = fp_one_step + mismatch, re-assertable record-wise.
    let int_cfg = IntegratorConfig::default();
    let imperfect = PlantParameters::imperfect();
    let mismatch = ds.mismatch.as_ref().expect("labels present");
    for k in (0..120).step_by(17) {
        let x = PlantState::from_slice(ds.x.row(k).as_slice().unwrap()).unwrap();
        let z = AlgebraicState::from_slice(ds.z.row(k).as_slice().unwrap()).unwrap();
        let u = ControlInput::new(ds.u[(k, 0)], ds.u[(k, 1)], ds.u[(k, 2)]);
        let (x_fp, _) = dae_step(&x, &z, &u, Disturbance(ds.p[(k, 0)]), &imperfect, &int_cfg)
            .expect("one-step reproduces");
        for i in 0..x_fp.0.len() {
            // An independent re-solve reproduces the stored one-step to the
            // Newton tolerance, so the identity re-asserts to that precision.
            let reconstructed = x_fp.0[i] + mismatch[(k, i)];
            assert!(
                (reconstructed - ds.x_next[(k, i)]).abs()
                    <= 1e-8 * ds.x_next[(k, i)].abs().max(1.0),
                "record {k} dim {i}: {} vs {}",
                reconstructed,
                ds.x_next[(k, i)]
            );
        }
    }
}

#[test]
fn identical_mismatch_models_give_zero_labels() {
    // Building the dataset against the truth itself zeroes every label.
    let truth = PlantParameters::truth();
    let ds = build_dataset(
        &Scenario::case_i(),
        40,
        &truth,
        &truth,
        &IntegratorConfig::default(),
        5,
    )
    .unwrap();
    let m = ds.mismatch.unwrap();
    let max = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    assert_eq!(max, 0.0, "labels must vanish when the models coincide");
}

#[test]
fn mismatch_grows_with_the_perturbation_magnitude() {
    // Scale the four closure deviations by {0.25, 0.5, 1.0}: the mean
    // mismatch magnitude is monotone in the perturbation.
    let truth = PlantParameters::truth();
    let int_cfg = IntegratorConfig::default();
    let mut norms = Vec::new();
    for scale in [0.25, 0.5, 1.0] {
        let mut p = truth.clone();
        p.closures.k_g_const = 5.23 + (3.08 - 5.23) * scale;
        p.closures.k_l_const = 0.0051 + (0.0031 - 0.0051) * scale;
        p.closures.h_int_scale = 1.0 + (0.8 - 1.0) * scale;
        p.closures.e_des_scale = 1.0 + (1.05 - 1.0) * scale;
        let ds = build_dataset(&Scenario::case_i(), 60, &truth, &p, &int_cfg, 5).unwrap();
        let m = ds.mismatch.unwrap();
        norms.push(m.iter().map(|v| v * v).sum::<f64>() / m.len() as f64);
    }
    assert!(
        norms[0] < norms[1] && norms[1] < norms[2],
        "mismatch magnitudes not monotone: {norms:?}"
    );
}

#[test]
fn train_and_evaluate_commands_chain() {
    let tmp = tempfile::tempdir().unwrap();
    let (cfg, text) = config_with_out(
        tmp.path(),
        "[data]\nn_samples = 800\n\n[training]\nepochs = 8\n\n[evaluation]\nrollout_steps = 40\n",
    );
    let train_dir = cli::cmd_train(&cfg, &text).unwrap();
    assert!(train_dir.join("inference.mlp").exists());
    assert!(train_dir.join("compensation.mlp").exists());
    assert!(train_dir.join("inference_curves.csv").exists());

    let (model, stats, manifest) = io::read_checkpoint(&train_dir.join("compensation.mlp")).unwrap();
    assert_eq!(model.sizes, vec![114, 600, 103]);
    assert_eq!(stats.x.mean.len(), 103);
    assert_eq!(manifest.role, "compensation");

    let eval_dir = cli::cmd_evaluate(&cfg, &text, &train_dir).unwrap();
    assert!(eval_dir.join("report.json").exists());
    assert!(eval_dir.join("rollout_comparison.csv").exists());
}

#[test]
fn experiment_report_schema_case_i() {
    let tmp = tempfile::tempdir().unwrap();
    let (cfg, text) = config_with_out(
        tmp.path(),
        "[data]\nn_samples = 600\n\n[training]\nepochs = 6\n\n[evaluation]\nrollout_steps = 30\n",
    );
    let dir = cli::cmd_experiment(&cfg, &text, cli::ExperimentKind::CaseIModeling).unwrap();
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    // The report carries hybrid and imperfect-FP rows for x and z.
    for model in ["hybrid", "imperfect_fp"] {
        for field in ["x_mse", "z_mse"] {
            assert!(
                report[model][field].is_number(),
                "missing {model}.{field} in report"
            );
        }
    }
    let summary = std::fs::read_to_string(dir.join("summary.txt")).unwrap();
    assert!(summary.contains("hybrid"));
    assert!(summary.contains("imperfect-fp"));
}
