//! Build a one-step-ahead dataset with model-mismatch labels and persist it
//! with its manifest.
//!
//! Run: `cargo run --release --example generate_dataset`
//! Optional args: `<n_samples> <scenario: case-i|case-ii> <out_dir>`

use shipcc::datagen::{build_dataset, Scenario};
use shipcc::integrator::IntegratorConfig;
use shipcc::io;
use shipcc::plant::PlantParameters;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).map_or(5000, |s| s.parse().unwrap());
    let scenario = match args.get(2).map(String::as_str) {
        Some("case-ii") => Scenario::case_ii(),
        _ => Scenario::case_i(),
    };
    let out_dir = std::path::PathBuf::from(args.get(3).map_or("runs/dataset-example", String::as_str));

    let truth = PlantParameters::truth();
    let imperfect = PlantParameters::imperfect();
    let int_cfg = IntegratorConfig::default();

    println!("building {n}-sample dataset for scenario {}...", scenario.name);
    let t0 = std::time::Instant::now();
    let ds = build_dataset(&scenario, n, &truth, &imperfect, &int_cfg, 42)?;
    println!("  done in {:.1} s", t0.elapsed().as_secs_f64());

    let split = ds.split;
    println!(
        "records: {} train / {} val / {} test",
        split.train().len(),
        split.val().len(),
        split.test().len()
    );
    let mismatch = ds.mismatch.as_ref().expect("mismatch labels present");
    let raw_ms = mismatch.iter().map(|v| v * v).sum::<f64>() / mismatch.len() as f64;
    println!("one-step mismatch mean square (raw units): {raw_ms:.3e}");

    std::fs::create_dir_all(&out_dir)?;
    let path = out_dir.join("dataset.dsb");
    io::write_dataset_bin(&path, &ds)?;
    std::fs::write(
        out_dir.join("manifest.json"),
        serde_json::to_string_pretty(&ds.manifest)?,
    )?;
    println!("dataset written to {}", path.display());

    // Round-trip sanity: the file reloads bit-identically.
    let back = io::read_dataset_bin(&path)?;
    assert_eq!(back.x, ds.x);
    assert_eq!(back.mismatch, ds.mismatch);
    println!("reload check passed");
    Ok(())
}
