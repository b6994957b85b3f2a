//! Ground states, low spectra and parameter scans.

pub mod eigen;

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{expectation_parts, LinearOperator};
use crate::plaquette::{build, BasisKind, HamiltonianRep, PlaquetteParams};
use crate::rotor::StateVector;

pub use eigen::{davidson, dense_lowest, lanczos, DavidsonOptions, Eigenpairs};

/// Dimensions up to this are diagonalized densely by [`Solver::Auto`].
pub const DENSE_LIMIT: usize = 800;

/// Imaginary parts of expectation values above this signal a non-Hermitian input.
pub const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Auto,
    Dense,
    Davidson,
    Lanczos,
}

impl std::fmt::Display for Solver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Solver::Auto => "auto",
            Solver::Dense => "dense",
            Solver::Davidson => "davidson",
            Solver::Lanczos => "lanczos",
        })
    }
}

impl std::str::FromStr for Solver {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Solver::Auto),
            "dense" => Ok(Solver::Dense),
            "davidson" => Ok(Solver::Davidson),
            "lanczos" => Ok(Solver::Lanczos),
            _ => Err(Error::InvalidParameter(format!("unknown solver '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Bound on `‖Hψ − Eψ‖` for every returned pair.
    pub tol: f64,
    pub solver: Solver,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            solver: Solver::Auto,
            max_iter: 2000,
            seed: 0x5eed,
        }
    }
}

/// Lowest eigenpairs, ascending, with residual norms.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub energies: Vec<f64>,
    pub states: Vec<StateVector>,
    pub residuals: Vec<f64>,
    pub solver: Solver,
    pub iterations: usize,
}

impl Spectrum {
    pub fn ground_energy(&self) -> f64 {
        self.energies[0]
    }

    /// `E_i − E_0` for `i ≥ 1`.
    pub fn gaps(&self) -> Vec<f64> {
        self.energies[1..].iter().map(|e| e - self.energies[0]).collect()
    }
}

fn solve<T: crate::operator::Scalar + faer::traits::ComplexField>(op: &dyn LinearOperator, k: usize, opts: &SolveOptions, solver: Solver) -> Result<Eigenpairs<T>> {
    // iterative residuals cannot drop below the rounding level of H
    let tol = opts.tol.max(roundoff_floor(op, &[]));
    match solver {
        Solver::Dense => dense_lowest(op, k),
        Solver::Lanczos => lanczos(op, k, tol, opts.max_iter, opts.seed),
        _ => davidson(
            op,
            k,
            &DavidsonOptions {
                tol,
                max_iter: opts.max_iter,
                seed: opts.seed,
                ..Default::default()
            },
        ),
    }
}

/// Orders a cluster of (numerically) equal eigenvalues by the index of each
/// vector's largest component so repeated runs list degenerate states alike.
fn canonical_order(values: &[f64], vectors: &[Vec<C64>]) -> Vec<usize> {
    let dominant: Vec<usize> = vectors
        .iter()
        .map(|v| {
            let mut best = 0;
            for (i, z) in v.iter().enumerate() {
                if z.norm_sqr() > v[best].norm_sqr() * (1.0 + 1e-9) {
                    best = i;
                }
            }
            best
        })
        .collect();
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        let e0 = values[order[start]];
        while end < order.len() && (values[order[end]] - e0).abs() <= 1e-10 * e0.abs().max(1.0) {
            end += 1;
        }
        order[start..end].sort_by_key(|&i| dominant[i]);
        start = end;
    }
    order
}

/// Residual reachable in double precision, `1e-12 ‖H‖` with the norm
/// estimated from the diagonal and the returned values.
fn roundoff_floor(op: &dyn LinearOperator, values: &[f64]) -> f64 {
    let d = op.diagonal().iter().map(|z| z.norm()).fold(1.0, f64::max);
    1e-12 * values.iter().map(|e| e.abs()).fold(d, f64::max)
}

/// `k` lowest eigenpairs of a Hermitian operator. Every returned pair has
/// `‖Hψ − Eψ‖ ≤ max(tol, 1e-12 ‖H‖)`.
pub fn lowest_eigenpairs(op: &dyn LinearOperator, k: usize, opts: &SolveOptions) -> Result<Spectrum> {
    let n = op.dim();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("{k} eigenpairs requested from dimension {n}")));
    }
    let solver = match opts.solver {
        Solver::Auto if n <= DENSE_LIMIT => Solver::Dense,
        Solver::Auto => Solver::Davidson,
        s => s,
    };
    let (values, vectors, residuals, iterations) = if op.is_real() {
        let r: Eigenpairs<f64> = solve(op, k, opts, solver)?;
        let v = r
            .vectors
            .into_iter()
            .map(|v| v.into_iter().map(|x| C64::new(x, 0.0)).collect())
            .collect();
        (r.values, v, r.residuals, r.iterations)
    } else {
        let r: Eigenpairs<C64> = solve(op, k, opts, solver)?;
        (r.values, r.vectors, r.residuals, r.iterations)
    };
    let worst = residuals.iter().cloned().fold(0.0, f64::max);
    if worst > opts.tol.max(roundoff_floor(op, &values)) {
        return Err(Error::NotConverged {
            what: format!("{solver} eigensolver"),
            residual: worst,
        });
    }
    let order = canonical_order(&values, &vectors);
    let mut vectors: Vec<Option<Vec<C64>>> = vectors.into_iter().map(Some).collect();
    Ok(Spectrum {
        energies: order.iter().map(|&i| values[i]).collect(),
        residuals: order.iter().map(|&i| residuals[i]).collect(),
        states: order
            .iter()
            .map(|&i| StateVector::new(vectors[i].take().expect("each index once")))
            .collect(),
        solver,
        iterations,
    })
}

pub fn low_spectrum(rep: &HamiltonianRep, k: usize, opts: &SolveOptions) -> Result<Spectrum> {
    lowest_eigenpairs(&rep.h, k, opts)
}

pub fn ground_state(rep: &HamiltonianRep, opts: &SolveOptions) -> Result<(f64, StateVector)> {
    let mut s = low_spectrum(rep, 1, opts)?;
    Ok((s.energies[0], s.states.remove(0)))
}

/// Real expectation value `⟨ψ|A|ψ⟩ / ⟨ψ|ψ⟩`.
pub fn expectation(op: &dyn LinearOperator, state: &StateVector) -> Result<f64> {
    if op.dim() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            got: state.dim(),
        });
    }
    let n2 = state.norm().powi(2);
    if n2 == 0.0 {
        return Err(Error::InvalidParameter("expectation in the zero vector".into()));
    }
    let (re, im) = expectation_parts(op, state.amplitudes());
    if im.abs() > HERMITIAN_TOL * n2.max(re.abs()) {
        return Err(Error::NonHermitian { imag: im / n2 });
    }
    Ok(re / n2)
}

/// Ground-state scan over `λ/g` and `λ/m` at fixed `λ`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanConfig {
    pub lambda: f64,
    pub lambda_over_g: Vec<f64>,
    /// `f64::INFINITY` stands for `m = 0`.
    pub lambda_over_m: Vec<f64>,
    pub basis: BasisKind,
    pub n_max: u32,
    pub n_states: usize,
    pub aux_cutoff: Option<usize>,
    pub observables: Vec<String>,
    pub tol: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            lambda_over_g: vec![0.1, 1.0, 10.0],
            lambda_over_m: vec![0.1, 1.0, 10.0],
            basis: BasisKind::GaugeFixedMathieu,
            n_max: 6,
            n_states: 8,
            aux_cutoff: None,
            observables: vec!["plaquette".into(), "n12_sq".into()],
            tol: 1e-10,
        }
    }
}

impl ScanConfig {
    pub fn params(&self, lg: f64, lm: f64) -> Result<PlaquetteParams> {
        if !(lg > 0.0) || !(lm > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "scan ratios must be positive, got lambda/g = {lg}, lambda/m = {lm}"
            )));
        }
        let g = self.lambda / lg;
        let m = if lm.is_infinite() { 0.0 } else { self.lambda / lm };
        let mut p = match self.basis {
            BasisKind::FullCharge => PlaquetteParams::full(m, g, self.lambda, self.n_max),
            BasisKind::GaugeFixedCharge => PlaquetteParams::gauge_fixed(m, g, self.lambda, self.n_max),
            BasisKind::GaugeFixedMathieu => PlaquetteParams::mathieu(m, g, self.lambda, self.n_states),
        };
        p.aux_cutoff = self.aux_cutoff;
        Ok(p)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanRow {
    pub lambda_over_g: f64,
    pub lambda_over_m: f64,
    pub m: f64,
    pub g: f64,
    pub energy: f64,
    pub residual: f64,
    pub observables: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanTable {
    pub config: ScanConfig,
    pub rows: Vec<ScanRow>,
}

impl ScanTable {
    pub fn headers(&self) -> Vec<String> {
        let mut h: Vec<String> = ["lambda_over_g", "lambda_over_m", "m", "g", "energy", "residual"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        h.extend(self.config.observables.iter().cloned());
        h
    }

    pub fn records(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| {
                let mut v = vec![r.lambda_over_g, r.lambda_over_m, r.m, r.g, r.energy, r.residual];
                v.extend(self.config.observables.iter().map(|o| r.observables[o]));
                v
            })
            .collect()
    }

    /// Observable values as a `λ/g` by `λ/m` grid.
    pub fn grid(&self, observable: &str) -> Option<Vec<Vec<f64>>> {
        let nm = self.config.lambda_over_m.len();
        self.config.observables.iter().find(|o| *o == observable)?;
        Some(
            self.rows
                .chunks(nm)
                .map(|c| c.iter().map(|r| r.observables[observable]).collect())
                .collect(),
        )
    }
}

/// Ground state and observables at every grid cell, rows ordered by `λ/g`
/// then `λ/m`. Cells run in parallel.
pub fn scan_ground(config: &ScanConfig) -> Result<ScanTable> {
    let cells: Vec<(f64, f64)> = config
        .lambda_over_g
        .iter()
        .flat_map(|&lg| config.lambda_over_m.iter().map(move |&lm| (lg, lm)))
        .collect();
    if cells.is_empty() {
        return Err(Error::InvalidParameter("empty scan grid".into()));
    }
    let opts = SolveOptions {
        tol: config.tol,
        ..Default::default()
    };
    let rows = cells
        .par_iter()
        .map(|&(lg, lm)| {
            let params = config.params(lg, lm)?;
            let rep = build(&params)?;
            let s = low_spectrum(&rep, 1, &opts)?;
            let mut observables = BTreeMap::new();
            for name in &config.observables {
                observables.insert(name.clone(), expectation(rep.observable(name)?, &s.states[0])?);
            }
            Ok(ScanRow {
                lambda_over_g: lg,
                lambda_over_m: lm,
                m: params.m,
                g: params.g,
                energy: s.energies[0],
                residual: s.residuals[0],
                observables,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanTable {
        config: config.clone(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mathieu::characteristic_values;
    use crate::mathieu::MathieuLabel;
    use crate::rotor::SparseOperator;

    #[test]
    fn solvers_agree_on_plaquette() {
        let rep = build(&PlaquetteParams::gauge_fixed(0.7, 1.3, 2.0, 2)).unwrap();
        let mut prev: Option<Vec<f64>> = None;
        for solver in [Solver::Dense, Solver::Davidson, Solver::Lanczos] {
            let opts = SolveOptions {
                solver,
                tol: 1e-9,
                ..Default::default()
            };
            let s = low_spectrum(&rep, if solver == Solver::Lanczos { 1 } else { 4 }, &opts).unwrap();
            if let Some(p) = &prev {
                for (a, b) in p.iter().zip(&s.energies) {
                    assert!((a - b).abs() < 1e-9, "{solver}: {a} vs {b}");
                }
            }
            prev = Some(s.energies);
        }
    }

    #[test]
    fn decoupled_ground_energy_is_mathieu() {
        // m = 0: four independent links, E0 = 4 · (g/4) a_0(q) with q = −2λ/g
        let (g, lambda) = (1.0, 2.0);
        let rep = build(&PlaquetteParams::mathieu(0.0, g, lambda, 5)).unwrap();
        let (e0, _) = ground_state(&rep, &SolveOptions::default()).unwrap();
        let a0 = characteristic_values(-2.0 * lambda / g, 1, 60).unwrap().value(MathieuLabel::Ce(0)).unwrap();
        assert!((e0 - g * a0).abs() < 1e-9, "{e0} vs {}", g * a0);
    }

    #[test]
    fn expectation_rejects_non_hermitian() {
        let op = SparseOperator::from_triplets(2, [(0, 1, C64::new(1.0, 0.0))]).unwrap();
        let psi = StateVector::new(vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0)]);
        assert!(matches!(expectation(&op, &psi), Err(Error::NonHermitian { .. })));
        let h = op.add(&op.adjoint()).unwrap();
        assert!(expectation(&h, &psi).unwrap().abs() < 1e-15);
    }

    #[test]
    fn degenerate_order_is_stable() {
        let rep = build(&PlaquetteParams::gauge_fixed(0.0, 1.0, 0.0, 2)).unwrap();
        let opts = SolveOptions::default();
        let a = low_spectrum(&rep, 9, &opts).unwrap();
        let b = low_spectrum(&rep, 9, &opts).unwrap();
        for (x, y) in a.states.iter().zip(&b.states) {
            assert!((x.inner(y).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn scan_orders_rows_and_limits() {
        let cfg = ScanConfig {
            lambda_over_g: vec![0.01, 100.0],
            lambda_over_m: vec![0.01, f64::INFINITY],
            n_states: 4,
            ..Default::default()
        };
        let t = scan_ground(&cfg).unwrap();
        assert_eq!(t.rows.len(), 4);
        assert_eq!(t.rows[1].m, 0.0);
        let grid = t.grid("plaquette").unwrap();
        // heavy matter freezes the plaquette even when the links are soft
        assert!(grid[0][0].abs() < 1e-3, "{grid:?}");
        assert!(grid[1][0].abs() < 1e-3);
        assert!(grid[1][1] > 0.8);
        assert_eq!(t.headers().len(), t.records()[0].len());
    }
}
