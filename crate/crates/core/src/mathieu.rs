//! Mathieu characteristic values and the single-link eigenbasis.
//!
//! A single link with Hamiltonian `(g + 2m) n² − λ cos θ` is the Mathieu
//! problem with `q = −2λ/(2m + g)` and `a = 4E/(2m + g)`. Two routes are
//! provided: a Sturm-bisection solve of the Fourier-mode tridiagonal
//! matrices, and a parity-adapted dense diagonalization in the charge basis
//! which also yields eigenvectors.

use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for declaring a characteristic value converged.
pub const CONVERGENCE_TOL: f64 = 1e-10;

/// π-periodic Mathieu solution label: `ce_{2n}` (even) or `se_{2n}` (odd).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MathieuLabel {
    Ce(u32),
    Se(u32),
}

impl MathieuLabel {
    pub fn order(self) -> u32 {
        match self {
            MathieuLabel::Ce(k) | MathieuLabel::Se(k) => k,
        }
    }

    pub fn is_even(self) -> bool {
        matches!(self, MathieuLabel::Ce(_))
    }
}

impl fmt::Display for MathieuLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MathieuLabel::Ce(k) => write!(f, "ce_{k}"),
            MathieuLabel::Se(k) => write!(f, "se_{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MathieuSpectrum {
    pub q: f64,
    pub values: Vec<(MathieuLabel, f64)>,
}

impl MathieuSpectrum {
    pub fn value(&self, label: MathieuLabel) -> Option<f64> {
        self.values.iter().find(|(l, _)| *l == label).map(|(_, v)| *v)
    }

    pub fn numbers(&self) -> Vec<f64> {
        self.values.iter().map(|(_, v)| *v).collect()
    }
}

/// Interleave the even and odd ladders as `a_0 < b_2 < a_2 < b_4 < …`,
/// which holds for every real q.
fn merge_ladders(q: f64, ce: &[f64], se: &[f64], count: usize) -> MathieuSpectrum {
    let values = (0..count)
        .map(|k| {
            let order = (2 * k.div_ceil(2)) as u32;
            if k % 2 == 0 {
                (MathieuLabel::Ce(order), ce[k / 2])
            } else {
                (MathieuLabel::Se(order), se[k / 2])
            }
        })
        .collect();
    MathieuSpectrum { q, values }
}

/// Number of eigenvalues below `x` of the symmetric tridiagonal matrix with
/// diagonal `d` and squared off-diagonals `e2`.
fn sturm_count(d: &[f64], e2: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut p = 1.0;
    for i in 0..d.len() {
        let prev = if i == 0 { 0.0 } else { e2[i - 1] / p };
        p = d[i] - x - prev;
        if p == 0.0 {
            p = -f64::EPSILON * (d[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if p < 0.0 {
            count += 1;
        }
    }
    count
}

/// Lowest `k` eigenvalues of a symmetric tridiagonal matrix by bisection.
fn tridiagonal_lowest(d: &[f64], e2: &[f64], k: usize) -> Vec<f64> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..d.len() {
        let mut r = 0.0;
        if i > 0 {
            r += e2[i - 1].sqrt();
        }
        if i + 1 < d.len() {
            r += e2[i].sqrt();
        }
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    (0..k.min(d.len()))
        .map(|j| {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if sturm_count(d, e2, mid) > j {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

fn fourier_ladders(q: f64, count: usize, cutoff: usize) -> (Vec<f64>, Vec<f64>) {
    let per = count / 2 + 2;
    // even cosine modes cos(2kx), k = 0..=cutoff
    let d_ce: Vec<f64> = (0..=cutoff).map(|k| 4.0 * (k * k) as f64).collect();
    let e2_ce: Vec<f64> = (0..cutoff)
        .map(|k| if k == 0 { 2.0 * q * q } else { q * q })
        .collect();
    // sine modes sin(2kx), k = 1..=cutoff
    let d_se: Vec<f64> = (1..=cutoff).map(|k| 4.0 * (k * k) as f64).collect();
    let e2_se: Vec<f64> = vec![q * q; cutoff.saturating_sub(1)];
    (
        tridiagonal_lowest(&d_ce, &e2_ce, per),
        tridiagonal_lowest(&d_se, &e2_se, per),
    )
}

/// Lowest `count` π-periodic characteristic numbers `a_{2n}(q)`, `b_{2n}(q)`
/// from the Fourier-mode tridiagonal matrices truncated at `cutoff` modes.
pub fn characteristic_values(q: f64, count: usize, cutoff: usize) -> Result<MathieuSpectrum> {
    if count == 0 {
        return Err(Error::InvalidParameter("count must be at least 1".into()));
    }
    if !q.is_finite() {
        return Err(Error::InvalidParameter(format!("q = {q} is not finite")));
    }
    if cutoff < count / 2 + 2 {
        return Err(Error::InvalidParameter(format!(
            "cutoff {cutoff} too small for {count} values"
        )));
    }
    if q == 0.0 {
        let n = count / 2 + 2;
        let ce: Vec<f64> = (0..n).map(|k| 4.0 * (k * k) as f64).collect();
        let se: Vec<f64> = (1..=n).map(|k| 4.0 * (k * k) as f64).collect();
        return Ok(merge_ladders(q, &ce, &se, count));
    }
    let (ce, se) = fourier_ladders(q, count, cutoff);
    let spec = merge_ladders(q, &ce, &se, count);
    let (ce2, se2) = fourier_ladders(q, count, 2 * cutoff);
    let check = merge_ladders(q, &ce2, &se2, count);
    let (_, top) = *spec.values.last().unwrap();
    let (_, top2) = *check.values.last().unwrap();
    let residual = (top - top2).abs() / top2.abs().max(1.0);
    if residual > CONVERGENCE_TOL {
        return Err(Error::NotConverged {
            what: format!("Mathieu characteristic values at cutoff {cutoff}"),
            residual,
        });
    }
    Ok(spec)
}

/// Auxiliary charge cutoff used when none is given.
pub fn default_aux_cutoff(m: f64, g: f64, lambda: f64, n_states: usize) -> usize {
    let width = (2.0 * lambda.abs() / (2.0 * m + g)).sqrt().ceil() as usize;
    40usize.max(4 * width + n_states + 10)
}

/// Lowest eigenpairs of a single link, expressed in an auxiliary charge basis.
#[derive(Debug, Clone)]
pub struct LinkEigenbasis {
    pub m: f64,
    pub g: f64,
    pub lambda: f64,
    pub n_states: usize,
    pub aux_cutoff: usize,
    pub q: f64,
    pub energies: Vec<f64>,
    pub labels: Vec<MathieuLabel>,
    /// Columns are eigenvectors over charges `−aux_cutoff..=aux_cutoff`.
    pub vectors: DMatrix<f64>,
    pub n_matrix: DMatrix<f64>,
    /// Matrix of `e^{+iθ}`; real because the eigenvectors are real.
    pub shift_matrix: DMatrix<f64>,
}

struct RawLink {
    energies: Vec<f64>,
    labels: Vec<MathieuLabel>,
    vectors: DMatrix<f64>,
}

/// Eigenvectors of `pᵀ h p` lifted back through `p`, ascending in energy.
fn diag_block(h: &DMatrix<f64>, p: &DMatrix<f64>) -> DMatrix<f64> {
    let hb = p.transpose() * h * p;
    let eig = SymmetricEigen::new(hb);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    DMatrix::from_fn(p.nrows(), order.len(), |r, c| {
        (p.row(r) * eig.eigenvectors.column(order[c]))[(0, 0)]
    })
}

fn link_raw(m: f64, g: f64, lambda: f64, n_states: usize, aux: usize) -> RawLink {
    let dim = 2 * aux + 1;
    let e_c = g + 2.0 * m;
    let charge = |i: usize| i as f64 - aux as f64;

    if lambda == 0.0 {
        // charge eigenstates in order 0, −1, +1, −2, +2, …
        let mut idx: Vec<usize> = (0..dim).collect();
        idx.sort_by_key(|&i| {
            let c = i as i64 - aux as i64;
            (c.abs(), c)
        });
        idx.truncate(n_states);
        let vectors = DMatrix::from_fn(dim, n_states, |r, c| if r == idx[c] { 1.0 } else { 0.0 });
        let labels = (0..n_states)
            .map(|k| {
                let order = (2 * k.div_ceil(2)) as u32;
                if k % 2 == 0 {
                    MathieuLabel::Ce(order)
                } else {
                    MathieuLabel::Se(order)
                }
            })
            .collect();
        return RawLink {
            energies: idx.iter().map(|&i| e_c * charge(i).powi(2)).collect(),
            labels,
            vectors,
        };
    }

    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..dim {
        h[(i, i)] = e_c * charge(i).powi(2);
        if i + 1 < dim {
            h[(i, i + 1)] = -0.5 * lambda;
            h[(i + 1, i)] = -0.5 * lambda;
        }
    }
    // reflection-adapted bases: even {|0⟩, (|k⟩+|−k⟩)/√2}, odd (|k⟩−|−k⟩)/√2
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut pe = DMatrix::<f64>::zeros(dim, aux + 1);
    let mut po = DMatrix::<f64>::zeros(dim, aux);
    pe[(aux, 0)] = 1.0;
    for k in 1..=aux {
        pe[(aux + k, k)] = s;
        pe[(aux - k, k)] = s;
        po[(aux + k, k - 1)] = s;
        po[(aux - k, k - 1)] = -s;
    }
    let ve = diag_block(&h, &pe);
    let vo = diag_block(&h, &po);

    let mut picks: Vec<(f64, MathieuLabel, DVector<f64>)> = Vec::new();
    let (mut i, mut j) = (0, 0);
    while picks.len() < n_states {
        let (v, label) = if picks.len() % 2 == 0 {
            i += 1;
            (ve.column(i - 1).into_owned(), MathieuLabel::Ce(2 * (i as u32 - 1)))
        } else {
            j += 1;
            (vo.column(j - 1).into_owned(), MathieuLabel::Se(2 * j as u32))
        };
        let mut v = v.normalize();
        let lead = v.iter().fold(0.0f64, |acc, x| if x.abs() > acc.abs() + 1e-12 { *x } else { acc });
        if lead < 0.0 {
            v = -v;
        }
        // Rayleigh quotient keeps small energies accurate to relative precision.
        let e = (v.transpose() * &h * &v)[(0, 0)];
        picks.push((e, label, v));
    }
    let vectors = DMatrix::from_columns(&picks.iter().map(|p| p.2.clone()).collect::<Vec<_>>());
    RawLink {
        energies: picks.iter().map(|p| p.0).collect(),
        labels: picks.iter().map(|p| p.1).collect(),
        vectors,
    }
}

/// Lowest `n_states` eigenpairs of `(g + 2m) n² − λ cos θ` on the charge window
/// `−aux_cutoff..=aux_cutoff`, checked against a doubled window.
pub fn link_eigenbasis(
    m: f64,
    g: f64,
    lambda: f64,
    n_states: usize,
    aux_cutoff: usize,
) -> Result<LinkEigenbasis> {
    if !(m >= 0.0 && g >= 0.0 && 2.0 * m + g > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "link needs m, g >= 0 with 2m + g > 0 (m = {m}, g = {g}, lambda = {lambda})"
        )));
    }
    if n_states == 0 || n_states > 2 * aux_cutoff + 1 {
        return Err(Error::InvalidParameter(format!(
            "{n_states} states do not fit an auxiliary cutoff of {aux_cutoff}"
        )));
    }
    let raw = link_raw(m, g, lambda, n_states, aux_cutoff);
    if lambda != 0.0 {
        let check = link_raw(m, g, lambda, n_states, 2 * aux_cutoff);
        let top = raw.energies[n_states - 1];
        let top2 = check.energies[n_states - 1];
        let residual = (top - top2).abs() / top2.abs().max(2.0 * m + g);
        if residual > CONVERGENCE_TOL {
            return Err(Error::NotConverged {
                what: format!("link eigenbasis at auxiliary cutoff {aux_cutoff}"),
                residual,
            });
        }
    }
    let dim = 2 * aux_cutoff + 1;
    let n_aux = DMatrix::from_fn(dim, dim, |r, c| {
        if r == c {
            r as f64 - aux_cutoff as f64
        } else {
            0.0
        }
    });
    let raise = DMatrix::from_fn(dim, dim, |r, c| if r == c + 1 { 1.0 } else { 0.0 });
    let v = &raw.vectors;
    let n_proj = v.transpose() * n_aux * v;
    let n_matrix = (&n_proj + n_proj.transpose()) * 0.5;
    let shift_matrix = v.transpose() * raise * v;
    Ok(LinkEigenbasis {
        m,
        g,
        lambda,
        n_states,
        aux_cutoff,
        q: -2.0 * lambda / (2.0 * m + g),
        energies: raw.energies,
        labels: raw.labels,
        vectors: raw.vectors,
        n_matrix,
        shift_matrix,
    })
}

impl LinkEigenbasis {
    /// Characteristic numbers `a = 4E/(2m + g)` of the retained states.
    pub fn characteristic_numbers(&self) -> Vec<f64> {
        let s = 4.0 / (2.0 * self.m + self.g);
        self.energies.iter().map(|e| e * s).collect()
    }

    /// Matrix of `cos θ` in the retained basis.
    pub fn cos_matrix(&self) -> DMatrix<f64> {
        (&self.shift_matrix + self.shift_matrix.transpose()) * 0.5
    }

    /// Projection of `n²` itself (not the square of the projected `n`).
    pub fn n2_matrix(&self) -> DMatrix<f64> {
        let aux = self.aux_cutoff as f64;
        let v = &self.vectors;
        let mut out = DMatrix::zeros(self.n_states, self.n_states);
        for a in 0..self.n_states {
            for b in 0..self.n_states {
                out[(a, b)] = (0..v.nrows())
                    .map(|r| v[(r, a)] * v[(r, b)] * (r as f64 - aux).powi(2))
                    .sum();
            }
        }
        (&out + out.transpose()) * 0.5
    }
}

/// Symmetrized projection `(PnP + (PnP)†)/2` of the charge operator.
pub fn n_matrix_in_basis(basis: &LinkEigenbasis) -> DMatrix<f64> {
    basis.n_matrix.clone()
}

/// Characteristic numbers from single-rotor diagonalization at `2m + g = 1`.
pub fn characteristic_values_from_link(
    q: f64,
    count: usize,
    aux_cutoff: usize,
) -> Result<MathieuSpectrum> {
    let basis = link_eigenbasis(0.0, 1.0, -q / 2.0, count, aux_cutoff)?;
    Ok(MathieuSpectrum {
        q,
        values: basis
            .labels
            .iter()
            .copied()
            .zip(basis.characteristic_numbers())
            .collect(),
    })
}
