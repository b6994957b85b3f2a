// Plaquette expectation in the ground state across couplings.

use plaquette_sim::spectra::{scan_ground, ScanConfig};
use plaquette_sim::Result;

fn main() -> Result<()> {
    let cfg = ScanConfig {
        lambda_over_g: vec![0.1, 0.3, 1.0, 3.0, 10.0],
        lambda_over_m: vec![0.1, 1.0, f64::INFINITY],
        n_states: 5,
        ..Default::default()
    };
    let table = scan_ground(&cfg)?;
    let grid = table.grid("plaquette").expect("observable requested");
    print!("{:>8}", "l/g \\ l/m");
    for lm in &cfg.lambda_over_m {
        print!("{lm:>10}");
    }
    println!();
    for (lg, row) in cfg.lambda_over_g.iter().zip(&grid) {
        print!("{lg:>8}");
        for p in row {
            print!("{p:>10.4}");
        }
        println!();
    }
    Ok(())
}
