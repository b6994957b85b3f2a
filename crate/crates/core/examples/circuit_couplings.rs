// Lattice couplings from circuit elements, and how far the first-order
// junction-capacitance expansion is from the exact inverse.

use plaquette_sim::circuit::{couplings, junction_corrected_couplings, BranchCircuit};
use plaquette_sim::Result;

fn main() -> Result<()> {
    let c = BranchCircuit {
        c_m: 0.05,
        c_g: 1.0,
        c_s: 0.1,
        v_s: 0.3,
        ..Default::default()
    };
    let k = couplings(&c)?;
    println!("m = {:.6}  g = {:.6}  lambda = {:.6}  lambda_ext = {:.6}", k.m, k.g, k.lambda, k.lambda_ext);
    println!("offset: m_s = {:.6}  g_s = {:.6}  n_s = {:.6}", k.m_s, k.g_s, k.n_s);

    println!("{:>8} {:>12} {:>12}", "C_J", "|first - exact| (chi)", "ratio");
    let mut last = None;
    for cj in [1e-1, 1e-2, 1e-3, 1e-4] {
        let j = junction_corrected_couplings(&BranchCircuit { c_j: cj, ..c })?;
        let err = (j.first_order.chi - j.exact.chi).abs();
        let ratio = last.map(|p: f64| p / err).unwrap_or(f64::NAN);
        println!("{cj:>8.0e} {err:>12.3e} {ratio:>12.1}");
        last = Some(err);
    }
    Ok(())
}
