use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{
    BasisKind, ConfigSpace, HamiltonianRep, PlaquetteParams, LINK_ENDS, PLAQUETTE_ORIENTATION,
};
use crate::circuit::{conserved_charges, PotentialTopology};
use crate::error::{Error, Result};
use crate::operator::Operator;
use crate::rotor::{SparseOperator, StateVector};

/// `½ (P + P†)` with `P` the oriented four-link shift, links starting at `link0`.
pub(crate) fn plaquette_charge(space: &ConfigSpace, link0: usize) -> SparseOperator {
    let half = C64::new(0.5, 0.0);
    SparseOperator::from_row_fn(space.dim(), |r, out| {
        let c = space.decode(r);
        for s in [1i64, -1] {
            let delta: Vec<(usize, i64)> = (0..4)
                .map(|l| (link0 + l, s * PLAQUETTE_ORIENTATION[l]))
                .collect();
            if let Some(t) = space.shifted(r, &c, &delta) {
                out.push((t, half));
            }
        }
    })
}

/// The plaquette operator in the representation's own basis.
pub fn plaquette_op(rep: &HamiltonianRep) -> &Operator {
    &rep.observables["plaquette"]
}

fn link_offset(rep: &HamiltonianRep) -> Result<(usize, &ConfigSpace)> {
    let space = rep.config_space().ok_or_else(|| {
        Error::Unsupported(
            "operation needs a charge basis; transform through the link eigenvectors first".into(),
        )
    })?;
    let off = if rep.basis() == BasisKind::FullCharge { 4 } else { 0 };
    Ok((off, space))
}

/// Diagonal `exp(iΘ/4 · (n12 + n24 − n13 − n34))`, which shifts the oriented
/// flux `θ_□` by Θ.
pub fn vortex_unitary(rep: &HamiltonianRep, theta: f64) -> Result<SparseOperator> {
    let (off, space) = link_offset(rep)?;
    let diag: Vec<C64> = (0..space.dim())
        .map(|r| {
            let c = space.decode(r);
            let w: i64 = (0..4).map(|l| PLAQUETTE_ORIENTATION[l] * c[off + l]).sum();
            C64::from_polar(1.0, 0.25 * theta * w as f64)
        })
        .collect();
    Ok(SparseOperator::from_diagonal(&diag))
}

/// `|1,1,0,0⟩` and `|0,0,1,1⟩` in link order (12, 24, 13, 34).
pub fn updown_states(rep: &HamiltonianRep) -> Result<(StateVector, StateVector)> {
    if rep.basis() != BasisKind::GaugeFixedCharge {
        return Err(Error::Unsupported("UP/DOWN states need the gauge-fixed charge basis".into()));
    }
    let space = rep.config_space().expect("charge basis has a config space");
    if rep.params.n_max == 0 {
        return Err(Error::InvalidParameter("UP/DOWN states need n_max >= 1".into()));
    }
    let up = space.encode(&[1, 1, 0, 0]).expect("in range");
    let down = space.encode(&[0, 0, 1, 1]).expect("in range");
    Ok((
        StateVector::basis_state(space.dim(), up),
        StateVector::basis_state(space.dim(), down),
    ))
}

/// Indices of full-basis configurations with every `G_i = 0`.
pub fn sector_indices(rep: &HamiltonianRep) -> Result<Vec<usize>> {
    if rep.basis() != BasisKind::FullCharge {
        return Err(Error::Unsupported("sector projection needs the full basis".into()));
    }
    let space = rep.config_space().expect("charge basis has a config space");
    let u = conserved_charges(&PotentialTopology::plaquette());
    Ok((0..space.dim())
        .filter(|&r| {
            let c = space.decode(r);
            u.rows
                .iter()
                .all(|row| row.iter().zip(&c).map(|(a, b)| a * b).sum::<i64>() == 0)
        })
        .collect())
}

pub fn zero_charge_projector(rep: &HamiltonianRep) -> Result<SparseOperator> {
    let idx = sector_indices(rep)?;
    let mut diag = vec![C64::new(0.0, 0.0); rep.dim()];
    for i in idx {
        diag[i] = C64::new(1.0, 0.0);
    }
    Ok(SparseOperator::from_diagonal(&diag))
}

/// `max_i ‖[G_i, H]‖_max` over the stored Gauss generators.
pub fn gauss_violation(rep: &HamiltonianRep) -> Result<f64> {
    let h = rep
        .h
        .as_sparse()
        .ok_or_else(|| Error::Unsupported("Gauss check needs a sparse Hamiltonian".into()))?;
    if rep.gauss_ops.is_empty() {
        return Err(Error::Unsupported("Gauss generators exist in the full basis only".into()));
    }
    let mut worst: f64 = 0.0;
    for gi in &rep.gauss_ops {
        worst = worst.max(gi.commutator(h)?.max_abs());
    }
    Ok(worst)
}

/// One term of the full-basis Hamiltonian with the charge shift it applies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianTerm {
    pub name: String,
    pub coefficient: f64,
    /// Change of each of the eight node charges.
    pub shift: [i64; 8],
}

/// Term list of the full-basis Hamiltonian, including any corrections.
pub fn hamiltonian_terms(params: &PlaquetteParams) -> Vec<HamiltonianTerm> {
    let names = ["1", "2", "3", "4"];
    let links = ["12", "24", "13", "34"];
    let mut terms = Vec::new();
    let diag = |name: String, coefficient: f64| HamiltonianTerm {
        name,
        coefficient,
        shift: [0; 8],
    };
    for n in names {
        terms.push(diag(format!("m (n{n} - ns)^2"), params.m));
    }
    for (l, &(i, j)) in LINK_ENDS.iter().enumerate() {
        let lab = links[l];
        terms.push(diag(format!("g (n{lab} - ns)^2"), params.g));
        let c = params.corrections;
        if c.chi != 0.0 {
            terms.push(diag(format!("chi n{lab} n{}", names[j]), c.chi));
            terms.push(diag(format!("-chi n{} n{lab}", names[i]), -c.chi));
        }
        if c.eta != 0.0 {
            terms.push(diag(format!("eta n{} n{}", names[i], names[j]), c.eta));
        }
        for s in [1i64, -1] {
            let mut shift = [0; 8];
            shift[i] += s;
            shift[4 + l] += s;
            shift[j] -= s;
            terms.push(HamiltonianTerm {
                name: format!("-lambda/2 e^({}i(phi{} + theta{lab} - phi{}))", if s > 0 { "+" } else { "-" }, names[i], names[j]),
                coefficient: -0.5 * params.lambda,
                shift,
            });
        }
    }
    terms
}
