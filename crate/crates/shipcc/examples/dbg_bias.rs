//! Throwaway: steady-state bias of the imperfect model vs truth.
use shipcc::integrator::{find_steady_state, IntegratorConfig};
use shipcc::plant::{capture_rate, outputs, ControlInput, Disturbance, PlantParameters};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = IntegratorConfig::default();
    let p = Disturbance(0.55);
    println!("{:>8} {:>8} | {:>10} {:>9} | {:>10} {:>9} | {:>7} {:>7}",
        "F_L", "F_fuel", "T_reb tru", "cap tru", "T_reb imp", "cap imp", "dT_reb", "dcap");
    for f_l in [0.02, 0.03, 0.04] {
        for f_fuel in [0.194, 0.2635] {
            let u = ControlInput::new(f_l, f_fuel, 0.03);
            let t = find_steady_state(&PlantParameters::truth(), &cfg, &u, p, 4000, 1e-5);
            let i = find_steady_state(&PlantParameters::imperfect(), &cfg, &u, p, 4000, 1e-5);
            match (t, i) {
                (Ok((xt, _)), Ok((xi, _))) => {
                    let yt = outputs(&xt, p, &PlantParameters::truth())?;
                    let yi = outputs(&xi, p, &PlantParameters::imperfect())?;
                    let ct = capture_rate(&yt, p, &PlantParameters::truth())?;
                    let ci = capture_rate(&yi, p, &PlantParameters::imperfect())?;
                    println!("{f_l:>8.3} {f_fuel:>8.4} | {:>10.2} {:>9.2} | {:>10.2} {:>9.2} | {:>+7.2} {:>+7.2}",
                        yt.t_reb, 100.0*ct, yi.t_reb, 100.0*ci, yi.t_reb - yt.t_reb, 100.0*(ci-ct));
                }
                (t, i) => println!("{f_l:>8.3} {f_fuel:>8.4} | failed: truth {:?} imp {:?}", t.is_ok(), i.is_ok()),
            }
        }
    }
    Ok(())
}
