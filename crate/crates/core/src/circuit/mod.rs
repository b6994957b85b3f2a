//! From lumped-element branch parameters to Hamiltonian couplings, and from
//! the potential's topology to conserved charges and gauge fixing.

pub mod nullspace;
pub mod poly;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use nullspace::{
    conserved_charges, gauge_fix_map, GaugeFixMap, NullspaceBasis, PotentialTopology,
};

/// One branch: two matter capacitors `C_m`, a gauge capacitor `C_g`, and a
/// (possibly flux-tunable, shunted) Josephson element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchCircuit {
    pub c_m: f64,
    pub c_g: f64,
    pub c_j: f64,
    pub c_s: f64,
    pub v_s: f64,
    pub phi_ext: f64,
    pub e_j: f64,
    /// Stands for `2e²`; 1 gives dimensionless simulation units.
    pub charge_unit: f64,
    /// Stands for `2e` in the offset charge `−C_s V_s / 2e`.
    pub pair_charge: f64,
}

impl Default for BranchCircuit {
    fn default() -> Self {
        Self {
            c_m: 1.0,
            c_g: 1.0,
            c_j: 0.0,
            c_s: 0.0,
            v_s: 0.0,
            phi_ext: 0.0,
            e_j: 1.0,
            charge_unit: 1.0,
            pair_charge: 1.0,
        }
    }
}

impl BranchCircuit {
    pub fn validate(&self) -> Result<()> {
        if !(self.c_m > 0.0 && self.c_g > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "capacitances must be positive (C_m = {}, C_g = {})",
                self.c_m, self.c_g
            )));
        }
        if !(self.c_j >= 0.0 && self.c_s >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "C_J and C_s must be non-negative (C_J = {}, C_s = {})",
                self.c_j, self.c_s
            )));
        }
        if !(self.charge_unit > 0.0 && self.pair_charge > 0.0) {
            return Err(Error::InvalidParameter("charge units must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaseCouplings {
    pub m: f64,
    pub g: f64,
    pub lambda: f64,
    pub lambda_ext: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OffsetCouplings {
    pub m_s: f64,
    pub g_s: f64,
    pub n_s: f64,
}

/// Charge-space couplings read off a quadratic form `cu · nᵀ C⁻¹ n` over
/// `(n_i, n_ij, n_j)`, in the sign convention
/// `m n_i² + m n_j² + g n_ij² + χ (n_ij n_j − n_i n_ij) + η n_i n_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticCouplings {
    pub m: f64,
    pub g: f64,
    pub chi: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JunctionCorrection {
    /// First order in `C_J`.
    pub first_order: QuadraticCouplings,
    /// From the exact inverse capacitance matrix.
    pub exact: QuadraticCouplings,
    pub inverse: [[f64; 3]; 3],
    pub determinant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingConstants {
    pub m: f64,
    pub g: f64,
    pub lambda: f64,
    pub m_prime: f64,
    pub g_prime: f64,
    pub chi: f64,
    pub eta: f64,
    pub m_s: f64,
    pub g_s: f64,
    pub n_s: f64,
    pub lambda_ext: f64,
}

/// `m = cu/C_m`, `g = cu/C_g`, `λ = E_J`, `λ(φ_ext) = E_J cos(φ_ext/2)`.
pub fn branch_couplings(c: &BranchCircuit) -> Result<BaseCouplings> {
    c.validate()?;
    Ok(BaseCouplings {
        m: c.charge_unit / c.c_m,
        g: c.charge_unit / c.c_g,
        lambda: c.e_j,
        lambda_ext: flux_tuned_josephson(c.e_j, c.phi_ext),
    })
}

pub fn flux_tuned_josephson(e_j: f64, phi_ext: f64) -> f64 {
    e_j * (0.5 * phi_ext).cos()
}

/// Gate capacitors add to the node capacitances and shift the charge origin.
pub fn offset_couplings(c: &BranchCircuit) -> Result<OffsetCouplings> {
    c.validate()?;
    let n_s = if c.c_s == 0.0 || c.v_s == 0.0 {
        0.0
    } else {
        -c.c_s * c.v_s / c.pair_charge
    };
    Ok(OffsetCouplings {
        m_s: c.charge_unit / (c.c_m + c.c_s),
        g_s: c.charge_unit / (c.c_g + c.c_s),
        n_s,
    })
}

/// Capacitance matrix over `(φ_i, θ_ij, φ_j)` with a junction shunt `C_J`.
pub fn capacitance_matrix(c_m: f64, c_g: f64, c_j: f64) -> Matrix3<f64> {
    Matrix3::new(
        c_m + c_j,
        c_j,
        -c_j,
        c_j,
        c_g + c_j,
        -c_j,
        -c_j,
        -c_j,
        c_m + c_j,
    )
}

fn quadratic_from_inverse(inv: &Matrix3<f64>, cu: f64) -> QuadraticCouplings {
    QuadraticCouplings {
        m: cu * inv[(0, 0)],
        g: cu * inv[(1, 1)],
        chi: -2.0 * cu * inv[(0, 1)],
        eta: 2.0 * cu * inv[(0, 2)],
    }
}

/// First-order junction-capacitance constants next to the exact inverse.
pub fn junction_corrected_couplings(c: &BranchCircuit) -> Result<JunctionCorrection> {
    c.validate()?;
    let (a, b, j, cu) = (c.c_m, c.c_g, c.c_j, c.charge_unit);
    let mat = capacitance_matrix(a, b, j);
    let det = mat.determinant();
    let inv = mat
        .try_inverse()
        .ok_or_else(|| Error::Singular(format!("capacitance matrix with determinant {det}")))?;
    let first_order = QuadraticCouplings {
        m: cu * (a - j) / (a * a),
        g: cu * (b - j) / (b * b),
        chi: 2.0 * cu * j / (a * b),
        eta: 2.0 * cu * j / (a * a),
    };
    let mut inverse = [[0.0; 3]; 3];
    for (r, row) in inverse.iter_mut().enumerate() {
        for (col, v) in row.iter_mut().enumerate() {
            *v = inv[(r, col)];
        }
    }
    Ok(JunctionCorrection {
        first_order,
        exact: quadratic_from_inverse(&inv, cu),
        inverse,
        determinant: det,
    })
}

/// Every coupling at once; corrected constants use gate-augmented capacitances.
pub fn couplings(c: &BranchCircuit) -> Result<CouplingConstants> {
    let base = branch_couplings(c)?;
    let off = offset_couplings(c)?;
    let corr = junction_corrected_couplings(c)?;
    Ok(CouplingConstants {
        m: base.m,
        g: base.g,
        lambda: base.lambda,
        m_prime: corr.first_order.m,
        g_prime: corr.first_order.g,
        chi: corr.first_order.chi,
        eta: corr.first_order.eta,
        m_s: off.m_s,
        g_s: off.g_s,
        n_s: off.n_s,
        lambda_ext: base.lambda_ext,
    })
}

/// Symbolic capacitance matrix in variables `x0 = C_m`, `x1 = C_g`, `x2 = C_J`.
pub fn symbolic_capacitance_matrix() -> poly::Mat3<3> {
    use poly::Poly;
    let (cm, cg, cj) = (Poly::<3>::var(0), Poly::<3>::var(1), Poly::<3>::var(2));
    let ncj = -&cj;
    [
        [&cm + &cj, cj.clone(), ncj.clone()],
        [cj.clone(), &cg + &cj, ncj.clone()],
        [ncj.clone(), ncj, &cm + &cj],
    ]
}
