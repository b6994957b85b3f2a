// Kick the ground state with a vortex operator and follow the fidelity,
// energy and plaquette in real time.

use std::f64::consts::PI;

use plaquette_sim::dynamics::{quench_vortex, uniform_grid, EvolveOptions};
use plaquette_sim::plaquette::PlaquetteParams;
use plaquette_sim::spectra::SolveOptions;
use plaquette_sim::Result;

fn main() -> Result<()> {
    let params = PlaquetteParams::gauge_fixed(0.05, 0.05, 1.0, 3);
    let times = uniform_grid(20.0, 41);
    let q = quench_vortex(&params, PI, &times, &SolveOptions::default(), &EvolveOptions::default())?;
    println!("ground energy {:.10}", q.ground_energy);
    let col = |n: &str| q.series.column(n).expect("recorded");
    let (f, e, p) = (col("fidelity"), col("energy"), col("plaquette"));
    for (i, t) in q.series.times.iter().enumerate().step_by(4) {
        println!("t = {t:>5.1}  F = {:.6}  E = {:.12}  <P> = {:+.6}", f[i], e[i], p[i]);
    }
    Ok(())
}
