//! Single-plaquette Hamiltonians in three representations, with observables.
//!
//! Slot order in the full basis is `φ1..φ4, θ12, θ24, θ13, θ34`; gauge-fixed
//! bases keep only the four links in the order (12, 24, 13, 34).

mod ops;
pub mod space;

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::circuit::{conserved_charges, gauge_fix_map, GaugeFixMap, PotentialTopology};
use crate::error::{Error, Result};
use crate::mathieu::{default_aux_cutoff, link_eigenbasis, LinkEigenbasis};
use crate::operator::{Operator, TensorOperator};
use crate::rotor::SparseOperator;

pub use ops::{
    gauss_violation, hamiltonian_terms, plaquette_op, sector_indices, updown_states,
    vortex_unitary, zero_charge_projector, HamiltonianTerm,
};
pub use space::ConfigSpace;

pub const LINK_LABELS: [&str; 4] = ["12", "24", "13", "34"];

/// Matter endpoints `(i, j)` of each link, 0-based, for `cos(φ_i + θ_ij − φ_j)`.
pub const LINK_ENDS: [(usize, usize); 4] = [(0, 1), (1, 3), (0, 2), (2, 3)];

/// Orientation of each link around the plaquette: `θ_□ = θ12 + θ24 − θ13 − θ34`.
pub const PLAQUETTE_ORIENTATION: [i64; 4] = [1, 1, -1, -1];

/// Quadratic form of the matter kinetic energy after gauge fixing:
/// `m Σ n_i² = m nᵀ M n` over link charges.
pub const KINETIC_MATRIX: [[i64; 4]; 4] = [[2, -1, 1, 0], [-1, 2, 0, 1], [1, 0, 2, -1], [0, 1, -1, 2]];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisKind {
    FullCharge,
    GaugeFixedCharge,
    GaugeFixedMathieu,
}

impl fmt::Display for BasisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BasisKind::FullCharge => "full-charge",
            BasisKind::GaugeFixedCharge => "gauge-fixed-charge",
            BasisKind::GaugeFixedMathieu => "gauge-fixed-mathieu",
        })
    }
}

impl std::str::FromStr for BasisKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" | "full-charge" => Ok(BasisKind::FullCharge),
            "charge" | "gauge-fixed-charge" => Ok(BasisKind::GaugeFixedCharge),
            "mathieu" | "gauge-fixed-mathieu" => Ok(BasisKind::GaugeFixedMathieu),
            other => Err(Error::Config(format!("unknown basis '{other}'"))),
        }
    }
}

/// Junction-capacitance and offset-charge terms, applied per link as
/// `χ (ñ_ij ñ_j − ñ_i ñ_ij) + η ñ_i ñ_j` with `ñ = n − n_s` everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Corrections {
    pub chi: f64,
    pub eta: f64,
    pub n_s: f64,
}

impl Corrections {
    pub fn is_zero(&self) -> bool {
        self.chi == 0.0 && self.eta == 0.0 && self.n_s == 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaquetteParams {
    pub m: f64,
    pub g: f64,
    pub lambda: f64,
    pub basis: BasisKind,
    /// Gauge charge cutoff for the charge bases (matter uses twice this).
    pub n_max: u32,
    /// Retained states per link for the Mathieu basis.
    pub n_states: usize,
    pub aux_cutoff: Option<usize>,
    pub corrections: Corrections,
    /// Eigenvalues `q_i` of the Gauss generators selecting the sector.
    pub static_charges: [i64; 4],
}

impl PlaquetteParams {
    fn base(m: f64, g: f64, lambda: f64, basis: BasisKind) -> Self {
        Self {
            m,
            g,
            lambda,
            basis,
            n_max: 0,
            n_states: 1,
            aux_cutoff: None,
            corrections: Corrections::default(),
            static_charges: [0; 4],
        }
    }

    pub fn full(m: f64, g: f64, lambda: f64, n_max_gauge: u32) -> Self {
        Self {
            n_max: n_max_gauge,
            ..Self::base(m, g, lambda, BasisKind::FullCharge)
        }
    }

    pub fn gauge_fixed(m: f64, g: f64, lambda: f64, n_max: u32) -> Self {
        Self {
            n_max,
            ..Self::base(m, g, lambda, BasisKind::GaugeFixedCharge)
        }
    }

    pub fn mathieu(m: f64, g: f64, lambda: f64, n_states: usize) -> Self {
        Self {
            n_states,
            ..Self::base(m, g, lambda, BasisKind::GaugeFixedMathieu)
        }
    }

    pub fn with_corrections(mut self, c: Corrections) -> Self {
        self.corrections = c;
        self
    }

    pub fn with_static_charges(mut self, q: [i64; 4]) -> Self {
        self.static_charges = q;
        self
    }

    /// Local dimension per link.
    pub fn local_dim(&self) -> usize {
        match self.basis {
            BasisKind::GaugeFixedMathieu => self.n_states,
            _ => 2 * self.n_max as usize + 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m >= 0.0 && self.g > 0.0 && self.lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need m >= 0, g > 0, lambda >= 0 (m = {}, g = {}, lambda = {})",
                self.m, self.g, self.lambda
            )));
        }
        if self.basis == BasisKind::GaugeFixedMathieu && self.n_states == 0 {
            return Err(Error::InvalidParameter("Mathieu basis needs N >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct HamiltonianRep {
    pub params: PlaquetteParams,
    pub slot_dims: Vec<usize>,
    pub h: Operator,
    pub observables: BTreeMap<String, Operator>,
    /// Gauss generators `G_1..G_4`; full basis only.
    pub gauss_ops: Vec<SparseOperator>,
    pub link_basis: Option<LinkEigenbasis>,
    space: Option<ConfigSpace>,
}

impl HamiltonianRep {
    pub fn dim(&self) -> usize {
        self.slot_dims.iter().product()
    }

    pub fn basis(&self) -> BasisKind {
        self.params.basis
    }

    pub fn observable(&self, name: &str) -> Result<&Operator> {
        self.observables
            .get(name)
            .ok_or_else(|| Error::InvalidParameter(format!("no observable '{name}'")))
    }

    /// Charge-configuration indexing (charge bases only).
    pub fn config_space(&self) -> Option<&ConfigSpace> {
        self.space.as_ref()
    }

    /// Sparse Hamiltonian; fails for dimensions beyond `limit` in the Mathieu basis.
    pub fn h_sparse(&self, limit: usize) -> Result<SparseOperator> {
        self.h.to_sparse(limit)
    }
}

/// Gauge-fixing map of the plaquette in the sector with the given static charges.
pub fn plaquette_gauge_map(static_charges: [i64; 4]) -> Result<GaugeFixMap> {
    let u = conserved_charges(&PotentialTopology::plaquette());
    gauge_fix_map(&u, &static_charges)
}

/// Diagonal charging energy of one configuration.
pub fn charging_energy(m: f64, g: f64, c: &Corrections, matter: &[i64], links: &[i64]) -> f64 {
    let nm = |i: usize| matter[i] as f64 - c.n_s;
    let nl = |l: usize| links[l] as f64 - c.n_s;
    let mut e = 0.0;
    for i in 0..4 {
        e += m * nm(i) * nm(i);
    }
    for l in 0..4 {
        e += g * nl(l) * nl(l);
    }
    if c.chi != 0.0 || c.eta != 0.0 {
        for (l, &(i, j)) in LINK_ENDS.iter().enumerate() {
            e += c.chi * (nl(l) * nm(j) - nm(i) * nl(l)) + c.eta * nm(i) * nm(j);
        }
    }
    e
}

pub fn build(params: &PlaquetteParams) -> Result<HamiltonianRep> {
    match params.basis {
        BasisKind::FullCharge => build_full(params),
        BasisKind::GaugeFixedCharge => build_gauge_fixed_charge(params),
        BasisKind::GaugeFixedMathieu => build_gauge_fixed_mathieu(params),
    }
}

fn diag_observable(space: &ConfigSpace, f: impl Fn(&[i64]) -> f64 + Sync) -> SparseOperator {
    SparseOperator::from_row_fn(space.dim(), |r, out| {
        let c = space.decode(r);
        out.push((r, C64::new(f(&c), 0.0)));
    })
}

fn charge_observables(space: &ConfigSpace, link0: usize) -> BTreeMap<String, Operator> {
    let mut obs = BTreeMap::new();
    obs.insert("plaquette".to_string(), ops::plaquette_charge(space, link0).into());
    obs.insert(
        "n12".to_string(),
        diag_observable(space, |c| c[link0] as f64).into(),
    );
    for (l, label) in LINK_LABELS.iter().enumerate() {
        obs.insert(
            format!("n{label}_sq"),
            diag_observable(space, move |c| (c[link0 + l] * c[link0 + l]) as f64).into(),
        );
    }
    obs
}

/// All eight rotors; matter slots get cutoff `2·n_max` so that gauge fixing
/// is exact at the truncation edge.
pub fn build_full(params: &PlaquetteParams) -> Result<HamiltonianRep> {
    params.validate()?;
    let ng = params.n_max;
    let space = ConfigSpace::new(&[2 * ng, 2 * ng, 2 * ng, 2 * ng, ng, ng, ng, ng])?;
    let (m, g, lam, corr) = (params.m, params.g, params.lambda, params.corrections);
    let half = C64::new(-0.5 * lam, 0.0);
    let h = SparseOperator::from_row_fn(space.dim(), |r, out| {
        let c = space.decode(r);
        out.push((r, C64::new(charging_energy(m, g, &corr, &c[..4], &c[4..]), 0.0)));
        if lam == 0.0 {
            return;
        }
        for (l, &(i, j)) in LINK_ENDS.iter().enumerate() {
            for s in [1i64, -1] {
                if let Some(t) = space.shifted(r, &c, &[(i, s), (4 + l, s), (j, -s)]) {
                    out.push((t, half));
                }
            }
        }
    });
    let u = conserved_charges(&PotentialTopology::plaquette());
    let gauss_ops = u
        .rows
        .iter()
        .map(|row| diag_observable(&space, |c| row.iter().zip(c).map(|(a, b)| (a * b) as f64).sum()))
        .collect();
    Ok(HamiltonianRep {
        params: params.clone(),
        slot_dims: space.slot_dims().to_vec(),
        h: h.into(),
        observables: charge_observables(&space, 4),
        gauss_ops,
        link_basis: None,
        space: Some(space),
    })
}

/// Four link rotors with matter charges eliminated through Gauss's law.
pub fn build_gauge_fixed_charge(params: &PlaquetteParams) -> Result<HamiltonianRep> {
    params.validate()?;
    let space = ConfigSpace::new(&[params.n_max; 4])?;
    let map = plaquette_gauge_map(params.static_charges)?;
    let (m, g, lam, corr) = (params.m, params.g, params.lambda, params.corrections);
    let half = C64::new(-0.5 * lam, 0.0);
    let h = SparseOperator::from_row_fn(space.dim(), |r, out| {
        let c = space.decode(r);
        let matter = map.apply(&c);
        out.push((r, C64::new(charging_energy(m, g, &corr, &matter, &c), 0.0)));
        if lam == 0.0 {
            return;
        }
        for l in 0..4 {
            for s in [1i64, -1] {
                if let Some(t) = space.shifted(r, &c, &[(l, s)]) {
                    out.push((t, half));
                }
            }
        }
    });
    Ok(HamiltonianRep {
        params: params.clone(),
        slot_dims: space.slot_dims().to_vec(),
        h: h.into(),
        observables: charge_observables(&space, 0),
        gauss_ops: Vec::new(),
        link_basis: None,
        space: Some(space),
    })
}

/// Four-link charge-basis representation around an externally assembled
/// Hamiltonian, with the standard observables.
pub fn link_charge_rep(params: PlaquetteParams, h: SparseOperator) -> Result<HamiltonianRep> {
    if params.basis != BasisKind::GaugeFixedCharge {
        return Err(Error::InvalidParameter("link_charge_rep needs gauge-fixed charge parameters".into()));
    }
    let space = ConfigSpace::new(&[params.n_max; 4])?;
    if h.dim() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            got: h.dim(),
        });
    }
    Ok(HamiltonianRep {
        params,
        slot_dims: space.slot_dims().to_vec(),
        h: h.into(),
        observables: charge_observables(&space, 0),
        gauss_ops: Vec::new(),
        link_basis: None,
        space: Some(space),
    })
}

fn to_complex(m: &DMatrix<f64>) -> DMatrix<C64> {
    m.map(|x| C64::new(x, 0.0))
}

/// Products of single-link Mathieu states; `H_links` is diagonal and the
/// matter kinetic cross terms couple links through the charge matrix elements.
pub fn build_gauge_fixed_mathieu(params: &PlaquetteParams) -> Result<HamiltonianRep> {
    params.validate()?;
    if !params.corrections.is_zero() || params.static_charges != [0; 4] {
        return Err(Error::Unsupported(
            "corrections and static charges need a charge basis".into(),
        ));
    }
    let (m, g, lam, n) = (params.m, params.g, params.lambda, params.n_states);
    let states = (n as u128).pow(4);
    if states > space::MAX_STATES {
        return Err(Error::DimensionOverflow {
            states,
            limit: space::MAX_STATES,
        });
    }
    let aux = params
        .aux_cutoff
        .unwrap_or_else(|| default_aux_cutoff(m, g, lam, n));
    let link = link_eigenbasis(m, g, lam, n, aux)?;
    let dims = vec![n; 4];
    let dim = n.pow(4);

    let mut h = TensorOperator::new(dims.clone());
    let mut diag = vec![0.0; dim];
    for (idx, d) in diag.iter_mut().enumerate() {
        let mut rest = idx;
        let mut e = 0.0;
        for _ in 0..4 {
            e += link.energies[rest % n];
            rest /= n;
        }
        *d = e;
    }
    h.add_diagonal(&diag)?;
    if m != 0.0 {
        let nm = to_complex(&link.n_matrix);
        // 2m (n12 n13 + n24 n34 − n24 n12 − n34 n13)
        for (a, b, sign) in [(0, 2, 1.0), (1, 3, 1.0), (1, 0, -1.0), (3, 2, -1.0)] {
            h.push_term(C64::new(2.0 * m * sign, 0.0), vec![(a, nm.clone()), (b, nm.clone())])?;
        }
    }

    let shift = to_complex(&link.shift_matrix);
    let shift_dag = shift.adjoint();
    let mut plaq = TensorOperator::new(dims.clone());
    let half = C64::new(0.5, 0.0);
    plaq.push_term(
        half,
        vec![(0, shift.clone()), (1, shift.clone()), (2, shift_dag.clone()), (3, shift_dag.clone())],
    )?;
    plaq.push_term(
        half,
        vec![(0, shift_dag.clone()), (1, shift_dag), (2, shift.clone()), (3, shift)],
    )?;
    let mut observables: BTreeMap<String, Operator> = BTreeMap::new();
    observables.insert("plaquette".into(), plaq.into());
    let mut n12 = TensorOperator::new(dims.clone());
    n12.push_term(C64::new(1.0, 0.0), vec![(0, to_complex(&link.n_matrix))])?;
    observables.insert("n12".into(), n12.into());
    let n2 = to_complex(&link.n2_matrix());
    for (l, label) in LINK_LABELS.iter().enumerate() {
        let mut t = TensorOperator::new(dims.clone());
        t.push_term(C64::new(1.0, 0.0), vec![(l, n2.clone())])?;
        observables.insert(format!("n{label}_sq"), t.into());
    }
    Ok(HamiltonianRep {
        params: params.clone(),
        slot_dims: dims,
        h: h.into(),
        observables,
        gauss_ops: Vec::new(),
        link_basis: Some(link),
        space: None,
    })
}

#[cfg(test)]
mod tests;
