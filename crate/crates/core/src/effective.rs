//! Fourth-order effective plaquette Hamiltonian in the static-matter regime.
//!
//! With `H_0 = m Σ n_i²` the unperturbed manifold is every link configuration
//! at zero matter charge. The numeric oracle evaluates the Takahashi series
//! on sparse configuration vectors: `S = (1 − P_0)/(E_0 − H_0)` is diagonal
//! in charges, so no matrix is ever inverted.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plaquette::{
    link_charge_rep, plaquette_gauge_map, sector_indices, BasisKind, HamiltonianRep, PlaquetteParams,
    LINK_ENDS, PLAQUETTE_ORIENTATION,
};
use crate::rotor::SparseOperator;
use crate::spectra::{dense_lowest, low_spectrum, Eigenpairs, SolveOptions};

/// Analytic couplings of the effective theory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveParams {
    pub g: f64,
    pub j_plaquette: f64,
    pub delta_e2: f64,
    pub delta_e4: f64,
    pub within_convergence: bool,
}

impl EffectiveParams {
    pub fn new(m: f64, g: f64, lambda: f64) -> Result<Self> {
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::InvalidParameter(format!("effective theory needs m > 0, got {m}")));
        }
        if !(g >= 0.0) || !(lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!("need g, lambda >= 0, got g = {g}, lambda = {lambda}")));
        }
        let l2 = lambda * lambda;
        Ok(Self {
            g,
            j_plaquette: -5.0 * l2 * l2 / (16.0 * m.powi(3)),
            delta_e2: -l2 / m,
            delta_e4: -l2 * l2 / (2.0 * m.powi(3)),
            within_convergence: convergence_bound(m, lambda),
        })
    }

    /// `|J_□|`, the UP/DOWN oscillation frequency.
    pub fn omega(&self) -> f64 {
        self.j_plaquette.abs()
    }
}

/// `‖λ V_λ‖ = 4λ` below half the gap `m`.
pub fn convergence_bound(m: f64, lambda: f64) -> bool {
    lambda < m / 8.0
}

/// The effective Hamiltonian and its couplings.
#[derive(Debug, Clone)]
pub struct EffectiveModel {
    pub couplings: EffectiveParams,
    /// `g Σ n_l² + J_□ □` on the link box `[−n_max, n_max]⁴`; constants excluded.
    pub rep: HamiltonianRep,
}

impl EffectiveModel {
    /// Indices of link configurations with zero matter charge, the only
    /// sector the effective theory describes.
    pub fn static_sector(&self) -> Vec<usize> {
        let space = self.rep.config_space().expect("charge basis");
        let map = plaquette_gauge_map([0; 4]).expect("zero charges are valid");
        (0..space.dim())
            .filter(|&r| map.apply(&space.decode(r)).iter().all(|&q| q == 0))
            .collect()
    }

    /// Ascending spectrum inside the static sector.
    pub fn sector_spectrum(&self) -> Result<Vec<f64>> {
        let idx = self.static_sector();
        let h = self.rep.h.as_sparse().expect("sparse").restrict(&idx);
        let r: Eigenpairs<f64> = dense_lowest(&h, idx.len())?;
        Ok(r.values)
    }
}

pub fn analytic_effective(m: f64, g: f64, lambda: f64, n_max: u32) -> Result<EffectiveModel> {
    let couplings = EffectiveParams::new(m, g, lambda)?;
    let params = PlaquetteParams::gauge_fixed(m, g.max(f64::MIN_POSITIVE), lambda, n_max);
    let space = crate::plaquette::ConfigSpace::new(&[n_max; 4])?;
    let hop = C64::new(0.5 * couplings.j_plaquette, 0.0);
    let h = SparseOperator::from_row_fn(space.dim(), |r, out| {
        let c = space.decode(r);
        let e: i64 = c.iter().map(|x| x * x).sum();
        out.push((r, C64::new(g * e as f64, 0.0)));
        if hop.re == 0.0 {
            return;
        }
        for s in [1i64, -1] {
            let d: Vec<(usize, i64)> = (0..4).map(|l| (l, s * PLAQUETTE_ORIENTATION[l])).collect();
            if let Some(t) = space.shifted(r, &c, &d) {
                out.push((t, hop));
            }
        }
    });
    Ok(EffectiveModel {
        couplings,
        rep: link_charge_rep(params, h)?,
    })
}

/// Zero-shifted gaps of a full and an effective Hamiltonian side by side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapComparison {
    pub full_gaps: Vec<f64>,
    pub effective_gaps: Vec<f64>,
    /// `|ΔE_full − ΔE_eff| / max(|ΔE_full|, 1e-12)` per gap.
    pub relative_errors: Vec<f64>,
    pub full_ground: f64,
    pub effective_ground: f64,
}

/// The first `k` gaps of both spectra. A full-basis representation is
/// restricted to its zero-charge sector first.
pub fn compare_gaps(full: &HamiltonianRep, eff: &EffectiveModel, k: usize, opts: &SolveOptions) -> Result<GapComparison> {
    let eff_levels = eff.sector_spectrum()?;
    if k == 0 || k + 1 > eff_levels.len() {
        return Err(Error::InvalidParameter(format!(
            "{k} gaps requested but the effective sector has {} levels",
            eff_levels.len()
        )));
    }
    let full_levels = if full.basis() == BasisKind::FullCharge {
        let idx = sector_indices(full)?;
        let h = full.h.as_sparse().expect("full basis is sparse").restrict(&idx);
        crate::spectra::lowest_eigenpairs(&h, k + 1, opts)?.energies
    } else {
        low_spectrum(full, k + 1, opts)?.energies
    };
    let full_gaps: Vec<f64> = (1..=k).map(|a| full_levels[a] - full_levels[0]).collect();
    let effective_gaps: Vec<f64> = (1..=k).map(|a| eff_levels[a] - eff_levels[0]).collect();
    let relative_errors = full_gaps
        .iter()
        .zip(&effective_gaps)
        .map(|(f, e)| (f - e).abs() / f.abs().max(1e-12))
        .collect();
    Ok(GapComparison {
        full_gaps,
        effective_gaps,
        relative_errors,
        full_ground: full_levels[0],
        effective_ground: eff_levels[0],
    })
}

/// Relative errors of the first `k` zero-shifted gaps, full against effective.
pub fn spectrum_compare(full: &HamiltonianRep, eff: &EffectiveModel, k: usize, opts: &SolveOptions) -> Result<Vec<f64>> {
    Ok(compare_gaps(full, eff, k, opts)?.relative_errors)
}

/// Charge cutoffs for the perturbative oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truncation {
    pub n_max_gauge: u32,
    pub n_max_matter: u32,
}

impl Default for Truncation {
    fn default() -> Self {
        Self {
            n_max_gauge: 1,
            n_max_matter: 2,
        }
    }
}

/// Matter charges first, then links in the order (12, 24, 13, 34).
type Config = [i64; 8];
type SparseVec = BTreeMap<Config, f64>;

/// Unperturbed energies, projector, resolvent and hopping of the oracle.
#[derive(Debug, Clone, Copy)]
pub struct PerturbationWorkspace {
    pub m: f64,
    pub g: f64,
    pub lambda: f64,
    pub truncation: Truncation,
}

fn add(v: &mut SparseVec, c: Config, x: f64) {
    *v.entry(c).or_insert(0.0) += x;
}

impl PerturbationWorkspace {
    pub fn h0(&self, c: &Config) -> f64 {
        self.m * c[..4].iter().map(|x| (x * x) as f64).sum::<f64>()
    }

    pub fn in_p0(c: &Config) -> bool {
        c[..4].iter().all(|&x| x == 0)
    }

    fn in_range(&self, c: &Config) -> bool {
        let (ng, nm) = (self.truncation.n_max_gauge as i64, self.truncation.n_max_matter as i64);
        c[..4].iter().all(|x| x.abs() <= nm) && c[4..].iter().all(|x| x.abs() <= ng)
    }

    /// `λ V_λ`: `−λ/2 Σ (e^{i(φ_i + θ_ij − φ_j)} + h.c.)`.
    pub fn apply_v(&self, v: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (c, &x) in v {
            for (l, &(i, j)) in LINK_ENDS.iter().enumerate() {
                for s in [1i64, -1] {
                    let mut t = *c;
                    t[i] += s;
                    t[4 + l] += s;
                    t[j] -= s;
                    if self.in_range(&t) {
                        add(&mut out, t, -0.5 * self.lambda * x);
                    }
                }
            }
        }
        out
    }

    /// `S^k` with `S = (1 − P_0)/(0 − H_0)`.
    pub fn apply_s(&self, v: &SparseVec, power: i32) -> SparseVec {
        v.iter()
            .filter(|(c, _)| !Self::in_p0(c))
            .map(|(c, &x)| (*c, x * (-1.0 / self.h0(c)).powi(power)))
            .collect()
    }

    pub fn apply_p0(&self, v: &SparseVec) -> SparseVec {
        v.iter().filter(|(c, _)| Self::in_p0(c)).map(|(c, &x)| (*c, x)).collect()
    }

    /// Applies the word read right to left: `'V'`, `'S'`, `'Q'` (= `S²`), `'P'`.
    fn word(&self, w: &str, v: &SparseVec) -> SparseVec {
        let mut x = v.clone();
        for op in w.chars().rev() {
            x = match op {
                'V' => self.apply_v(&x),
                'S' => self.apply_s(&x, 1),
                'Q' => self.apply_s(&x, 2),
                'P' => self.apply_p0(&x),
                _ => unreachable!("operator word letter"),
            };
            x.retain(|_, a| *a != 0.0);
        }
        x
    }

    /// Columns `h^(n)|c⟩` for n = 2, 3, 4 on a zero-matter configuration.
    pub fn columns(&self, c: &Config) -> [SparseVec; 3] {
        let start: SparseVec = [(*c, 1.0)].into_iter().collect();
        let h2 = self.word("PVSVP", &start);
        let h3 = self.word("PVSVSVP", &start);
        let mut h4 = self.word("PVSVSVSVP", &start);
        for (k, x) in self.word("PVQVPVSVP", &start).into_iter().chain(self.word("PVSVPVQVP", &start)) {
            add(&mut h4, k, -0.5 * x);
        }
        [h2, h3, h4]
    }
}

/// Output of the numeric Takahashi oracle on the zero-matter sector.
#[derive(Debug, Clone)]
pub struct TakahashiResult {
    pub truncation: Truncation,
    /// Link configurations spanning the sector, in matrix order.
    pub sector: Vec<[i64; 4]>,
    pub h1: DMatrix<f64>,
    pub h2: DMatrix<f64>,
    pub h3: DMatrix<f64>,
    pub h4: DMatrix<f64>,
    /// `2 ⟨(1,1,−1,−1)| h^(4) |0⟩`.
    pub j_plaquette: f64,
    /// Largest relative deviation among all plaquette-shift entries of `h^(4)`.
    pub extraction_spread: f64,
    pub plaquette_entries: usize,
    /// Mean process energy `−λ⁴/(E_1 E_2 E_3)` per class I, II, III.
    pub class_j: [f64; 3],
    pub class_counts: [usize; 3],
    /// `⟨0|h^(2)|0⟩`.
    pub delta_e2: f64,
    /// `⟨0|h^(4)|0⟩` at cutoffs wide enough for every fourth-order path.
    pub delta_e4: f64,
    pub p0vp0_max: f64,
    pub third_order_max: f64,
    /// Largest off-diagonal `h^(4)` entry that is not a plaquette shift.
    pub off_plaquette_max: f64,
    /// J at one step wider cutoffs.
    pub j_check: f64,
}

fn plaquette_shift(t: i64) -> [i64; 4] {
    [t * PLAQUETTE_ORIENTATION[0], t * PLAQUETTE_ORIENTATION[1], t * PLAQUETTE_ORIENTATION[2], t * PLAQUETTE_ORIENTATION[3]]
}

fn with_links(links: &[i64; 4]) -> Config {
    let mut c = [0; 8];
    c[4..].copy_from_slice(links);
    c
}

fn vacuum_j(ws: &PerturbationWorkspace) -> f64 {
    let [_, _, h4] = ws.columns(&[0; 8]);
    2.0 * h4.get(&with_links(&plaquette_shift(1))).copied().unwrap_or(0.0)
}

fn shares_node(a: usize, b: usize) -> bool {
    let (x, y) = (LINK_ENDS[a], LINK_ENDS[b]);
    x.0 == y.0 || x.0 == y.1 || x.1 == y.0 || x.1 == y.1
}

/// Process energies of the 24 orderings of the four plaquette hops, grouped:
/// III when the first two links are disjoint; otherwise I when the third
/// link touches only the second, II when it touches only the first.
fn class_energies(m: f64, lambda: f64) -> ([f64; 3], [usize; 3]) {
    let mut sums = [0.0; 3];
    let mut counts = [0; 3];
    let mut perm = [0usize, 1, 2, 3];
    let mut all = Vec::new();
    permute(&mut perm, 0, &mut all);
    for p in all {
        let mut c = [0i64; 8];
        let mut prod = 1.0;
        for &l in &p[..3] {
            let (i, j) = LINK_ENDS[l];
            let s = PLAQUETTE_ORIENTATION[l];
            c[i] += s;
            c[4 + l] += s;
            c[j] -= s;
            prod *= m * c[..4].iter().map(|x| (x * x) as f64).sum::<f64>();
        }
        let class = if !shares_node(p[0], p[1]) {
            2
        } else if shares_node(p[2], p[1]) && !shares_node(p[2], p[0]) {
            0
        } else {
            1
        };
        sums[class] += -lambda.powi(4) / prod;
        counts[class] += 1;
    }
    let mut mean = [0.0; 3];
    for k in 0..3 {
        mean[k] = sums[k] / counts[k] as f64;
    }
    (mean, counts)
}

fn permute(p: &mut [usize; 4], k: usize, out: &mut Vec<[usize; 4]>) {
    if k == 4 {
        out.push(*p);
        return;
    }
    for i in k..4 {
        p.swap(k, i);
        permute(p, k + 1, out);
        p.swap(k, i);
    }
}

/// Effective operators through fourth order on the zero-matter sector,
/// the plaquette coefficient and its decomposition by virtual process.
pub fn takahashi_effective_numeric(m: f64, g: f64, lambda: f64, truncation: Truncation) -> Result<TakahashiResult> {
    if !(m > 0.0) || !(lambda > 0.0) || !(g >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "oracle needs m > 0, lambda > 0, g >= 0; got m = {m}, lambda = {lambda}, g = {g}"
        )));
    }
    if truncation.n_max_gauge < 1 || truncation.n_max_matter < 2 {
        return Err(Error::InvalidParameter(
            "plaquette paths need n_max_gauge >= 1 and n_max_matter >= 2".into(),
        ));
    }
    let ws = PerturbationWorkspace { m, g, lambda, truncation };
    let ng = truncation.n_max_gauge as i64;
    let w = 2 * ng + 1;
    let sector: Vec<[i64; 4]> = (0..w.pow(4))
        .map(|mut r| {
            let mut l = [0i64; 4];
            for k in (0..4).rev() {
                l[k] = r % w - ng;
                r /= w;
            }
            l
        })
        .collect();
    let index: BTreeMap<[i64; 4], usize> = sector.iter().enumerate().map(|(i, l)| (*l, i)).collect();
    let d = sector.len();
    let mut h1 = DMatrix::<f64>::zeros(d, d);
    let mut h2 = DMatrix::<f64>::zeros(d, d);
    let mut h3 = DMatrix::<f64>::zeros(d, d);
    let mut h4 = DMatrix::<f64>::zeros(d, d);
    let mut p0vp0_max: f64 = 0.0;
    for (col, links) in sector.iter().enumerate() {
        let c = with_links(links);
        h1[(col, col)] = g * links.iter().map(|x| (x * x) as f64).sum::<f64>();
        let start: SparseVec = [(c, 1.0)].into_iter().collect();
        for x in ws.apply_p0(&ws.apply_v(&start)).values() {
            p0vp0_max = p0vp0_max.max(x.abs());
        }
        let cols = ws.columns(&c);
        for (mat, v) in [&mut h2, &mut h3, &mut h4].into_iter().zip(cols.iter()) {
            for (k, &x) in v {
                let mut l = [0i64; 4];
                l.copy_from_slice(&k[4..]);
                mat[(index[&l], col)] += x;
            }
        }
    }
    let third_order_max = h3.iter().fold(0.0f64, |a, x| a.max(x.abs()));

    let vac = index[&[0; 4]];
    let shift = index[&plaquette_shift(1)];
    let reference = h4[(shift, vac)];
    let j_plaquette = 2.0 * reference;
    let mut spread: f64 = 0.0;
    let mut entries = 0;
    let mut off_plaquette_max: f64 = 0.0;
    for (col, a) in sector.iter().enumerate() {
        for (row, b) in sector.iter().enumerate() {
            if row == col {
                continue;
            }
            let diff: Vec<i64> = (0..4).map(|k| b[k] - a[k]).collect();
            if diff == plaquette_shift(1) || diff == plaquette_shift(-1) {
                spread = spread.max((h4[(row, col)] - reference).abs() / reference.abs());
                entries += 1;
            } else {
                off_plaquette_max = off_plaquette_max.max(h4[(row, col)].abs());
            }
        }
    }

    let wide = PerturbationWorkspace {
        truncation: Truncation {
            n_max_gauge: truncation.n_max_gauge + 1,
            n_max_matter: truncation.n_max_matter + 1,
        },
        ..ws
    };
    let j_check = vacuum_j(&wide);
    if (j_check - j_plaquette).abs() > 1e-12 * j_plaquette.abs() {
        return Err(Error::NotConverged {
            what: "plaquette coefficient changes with the charge cutoffs".into(),
            residual: (j_check - j_plaquette).abs(),
        });
    }
    let full = PerturbationWorkspace {
        truncation: Truncation {
            n_max_gauge: truncation.n_max_gauge.max(2),
            n_max_matter: truncation.n_max_matter.max(2),
        },
        ..ws
    };
    let [_, _, h4_vac] = full.columns(&[0; 8]);
    let delta_e4 = h4_vac.get(&[0; 8]).copied().unwrap_or(0.0);
    let (class_j, class_counts) = class_energies(m, lambda);

    Ok(TakahashiResult {
        truncation,
        delta_e2: h2[(vac, vac)],
        delta_e4,
        sector,
        h1,
        h2,
        h3,
        h4,
        j_plaquette,
        extraction_spread: spread,
        plaquette_entries: entries,
        class_j,
        class_counts,
        p0vp0_max,
        third_order_max,
        off_plaquette_max,
        j_check,
    })
}
