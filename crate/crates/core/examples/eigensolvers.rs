// Dense, Davidson and Lanczos on the same gauge-fixed Hamiltonian.

use std::time::Instant;

use plaquette_sim::plaquette::{build, PlaquetteParams};
use plaquette_sim::spectra::{lowest_eigenpairs, SolveOptions, Solver};
use plaquette_sim::Result;

fn main() -> Result<()> {
    let rep = build(&PlaquetteParams::gauge_fixed(2.0, 1.0, 1.0, 3))?;
    println!("dim {}", rep.dim());
    for solver in [Solver::Dense, Solver::Davidson, Solver::Lanczos] {
        let t = Instant::now();
        let s = lowest_eigenpairs(&rep.h, 4, &SolveOptions { solver, ..Default::default() })?;
        let worst = s.residuals.iter().cloned().fold(0.0, f64::max);
        println!("{solver:>9}: {:.3}s  E = {:.12?}  max residual {worst:.1e}", t.elapsed().as_secs_f64(), s.energies);
    }
    Ok(())
}
