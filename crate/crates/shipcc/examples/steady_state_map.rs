//! Settle the plant at constant inputs and map steady capture rate and
//! reboiler temperature over a small grid of solvent and fuel flows.
//!
//! Run: `cargo run --release --example steady_state_map`

use shipcc::integrator::{find_steady_state, IntegratorConfig};
use shipcc::plant::{
    capture_rate, comp, idx, outputs, ControlInput, Disturbance, PlantParameters,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = PlantParameters::truth();
    let cfg = IntegratorConfig::default();
    let p = Disturbance(0.55);

    println!("settling nominal steady state (box-midpoint inputs, 55% load)...");
    let t0 = std::time::Instant::now();
    let (x, z) = find_steady_state(&params, &cfg, &ControlInput::box_midpoint(), p, 4000, 1e-6)?;
    println!("settled in {:.1} s wall time", t0.elapsed().as_secs_f64());

    let y = outputs(&x, p, &params)?;
    let cap = capture_rate(&y, p, &params)?;
    let lean_loading = z.0[comp::CO2] / z.0[comp::MEA];
    let rich_loading = x.0[idx::conc(idx::ABS_LIQ, comp::CO2, 4)]
        / x.0[idx::conc(idx::ABS_LIQ, comp::MEA, 4)];
    println!("nominal steady state:");
    println!("  capture rate      {:6.2} %", 100.0 * cap);
    println!("  released CO2      {:6.3} kg/s", y.f_co2_out);
    println!("  reboiler T        {:7.2} K", y.t_reb);
    println!("  boil-up fraction  {:6.3}", z.q_reb());
    println!("  lean loading      {:6.3}", lean_loading);
    println!("  rich loading      {:6.3}", rich_loading);
    println!("  HX tube/shell     {:7.2} / {:7.2} K", x.0[idx::HX_TUBE], x.0[idx::HX_SHELL]);
    println!(
        "  absorber T_L top/bottom  {:7.2} / {:7.2} K",
        x.0[idx::ABS_TL],
        x.0[idx::ABS_TL + 4]
    );
    println!(
        "  desorber T_L top/bottom  {:7.2} / {:7.2} K",
        x.0[idx::DES_TL],
        x.0[idx::DES_TL + 4]
    );

    println!("\nsteady map over (F_L, F_fuel), F_sw = 0.03, load = 0.55:");
    println!("{:>8} {:>8} {:>10} {:>10} {:>9}", "F_L", "F_fuel", "capture %", "T_reb K", "cost $/s");
    for f_l in [0.02, 0.03, 0.04] {
        for f_fuel in [0.194, 0.2635, 0.333] {
            let u = ControlInput::new(f_l, f_fuel, 0.03);
            match find_steady_state(&params, &cfg, &u, p, 4000, 1e-5) {
                Ok((xs, _zs)) => {
                    let ys = outputs(&xs, p, &params)?;
                    let caps = capture_rate(&ys, p, &params)?;
                    let cost = 0.05 * (ys.f_co2_out - 0.5).max(0.0) + 1.2852 * f_fuel;
                    println!(
                        "{f_l:>8.3} {f_fuel:>8.4} {:>10.2} {:>10.2} {cost:>9.4}",
                        100.0 * caps,
                        ys.t_reb
                    );
                }
                Err(e) => println!("{f_l:>8.3} {f_fuel:>8.4}  failed: {e}"),
            }
        }
    }
    Ok(())
}
