// Conserved charges of the plaquette circuit from the integer nullspace of
// its node-potential pairings, and the gauge-fixing map they imply.

use plaquette_sim::circuit::nullspace::{conserved_charges, gauge_fix_map, hermite_normal_form, PotentialTopology};
use plaquette_sim::Result;

fn main() -> Result<()> {
    let topo = PotentialTopology::plaquette();
    println!("{} nodes, pairing rank {}", topo.n_nodes, topo.rank());
    for r in hermite_normal_form(&topo.rows, topo.n_nodes) {
        println!("  hnf {r:?}");
    }
    let ns = conserved_charges(&topo);
    println!("nullity {}", ns.nullity());
    for r in &ns.rows {
        println!("  conserved {r:?}");
    }
    let map = gauge_fix_map(&ns, &[0, 0, 0, 0])?;
    println!("{} dependent charges; independent (1, 0, 0, 0) -> {:?}", map.n_dependent(), map.apply(&[1, 0, 0, 0]));
    Ok(())
}
