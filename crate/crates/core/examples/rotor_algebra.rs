// Truncated rotor algebra: `[n, e^{iθ}] = e^{iθ}` holds inside the charge
// window and fails only on the boundary row.

use plaquette_sim::rotor::{cos_op, lower_op, number_op, raise_op, ChargeBasis};
use plaquette_sim::Result;

fn main() -> Result<()> {
    let basis = ChargeBasis::new(3);
    let (n, up, down) = (number_op(basis), raise_op(basis), lower_op(basis));
    println!("charges {:?}", basis.charges());

    let defect = n.commutator(&up)?.sub(&up)?;
    println!("max |[n, e^(i theta)] - e^(i theta)| = {:e}", defect.max_abs());

    // e^{iθ} e^{-iθ} is the identity except at the top of the window
    let prod = up.matmul(&down)?;
    for q in basis.charges() {
        let i = basis.index_of(q).expect("in window");
        println!("  <{q:+}| U U^dag |{q:+}> = {}", prod.get(i, i).re);
    }

    let c = cos_op(basis);
    println!("cos theta hermitian: {}, nnz {}", c.is_hermitian(), c.nnz());
    Ok(())
}
