// The full charge basis carries every site and link; Gauss's law picks out
// the physical sector, which matches the gauge-fixed construction.

use plaquette_sim::plaquette::{build, gauss_violation, sector_indices, PlaquetteParams};
use plaquette_sim::spectra::{low_spectrum, lowest_eigenpairs, SolveOptions};
use plaquette_sim::Result;

fn main() -> Result<()> {
    let (m, g, lambda) = (0.7, 1.0, 1.2);
    let full = build(&PlaquetteParams::full(m, g, lambda, 1))?;
    println!("full basis dim {}, max |[G_i, H]| = {:e}", full.dim(), gauss_violation(&full)?);

    let idx = sector_indices(&full)?;
    let sector = full.h.as_sparse().expect("full basis is sparse").restrict(&idx);
    let opts = SolveOptions::default();
    let a = lowest_eigenpairs(&sector, 5, &opts)?;
    let b = low_spectrum(&build(&PlaquetteParams::gauge_fixed(m, g, lambda, 1))?, 5, &opts)?;
    println!("zero-charge sector dim {}", idx.len());
    for (x, y) in a.energies.iter().zip(&b.energies) {
        println!("  {x:>20.14}  {y:>20.14}");
    }
    Ok(())
}
