// Mathieu characteristic values from the Fourier tridiagonal recurrences and
// from diagonalizing a single gauge link in its charge basis.

use plaquette_sim::mathieu::{characteristic_values, characteristic_values_from_link, link_eigenbasis};
use plaquette_sim::Result;

fn main() -> Result<()> {
    for q in [0.0, -1.0, -5.0] {
        let tri = characteristic_values(q, 7, 60)?;
        let link = characteristic_values_from_link(q, 7, 60)?;
        println!("q = {q}");
        for ((label, a), (_, b)) in tri.values.iter().zip(&link.values) {
            println!("  {label:>5}  {a:>22.15}  {b:>22.15}  {:.1e}", (a - b).abs());
        }
    }

    // a link with m = 0.5, g = 1, lambda = 2 sits at q = -2 lambda / (2m + g) = -2
    let l = link_eigenbasis(0.5, 1.0, 2.0, 5, 40)?;
    println!("link q = {}, energies {:?}", l.q, &l.energies[..3]);
    println!("<0|cos theta|0> = {:.12}", l.cos_matrix()[(0, 0)]);
    Ok(())
}
