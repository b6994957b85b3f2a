//! Fast oracle checks; any failure exits with the numerical code.

use std::time::Instant;

use super::{EXIT_NUMERICAL, EXIT_OK};
use crate::circuit::poly::{adjugate, determinant, Poly};
use crate::circuit::symbolic_capacitance_matrix;
use crate::effective::{takahashi_effective_numeric, Truncation};
use crate::error::Result;
use crate::mathieu::{characteristic_values, characteristic_values_from_link};
use crate::plaquette::{build, gauss_violation, sector_indices, Corrections, PlaquetteParams};
use crate::spectra::{low_spectrum, lowest_eigenpairs, SolveOptions};

type Check = fn() -> Result<(bool, String)>;

fn gauss() -> Result<(bool, String)> {
    let corr = Corrections {
        chi: 0.02,
        eta: 0.01,
        n_s: 0.25,
    };
    let v = gauss_violation(&build(&PlaquetteParams::full(0.8, 1.1, 1.3, 1).with_corrections(corr))?)?;
    Ok((v == 0.0, format!("max |[G_i, H]| = {v:e}")))
}

fn gauge_fixing() -> Result<(bool, String)> {
    let opts = SolveOptions::default();
    let full = build(&PlaquetteParams::full(0.7, 1.1, 1.3, 1))?;
    let idx = sector_indices(&full)?;
    let sector = full.h.as_sparse().expect("full basis is sparse").restrict(&idx);
    let a = lowest_eigenpairs(&sector, 4, &opts)?.energies;
    let b = low_spectrum(&build(&PlaquetteParams::gauge_fixed(0.7, 1.1, 1.3, 1))?, 4, &opts)?.energies;
    let err = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    Ok((err <= 1e-10, format!("max |dE| = {err:e}")))
}

fn mathieu() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for q in [-0.5, -4.0] {
        let a = characteristic_values(q, 8, 40)?.numbers();
        let b = characteristic_values_from_link(q, 8, 40)?.numbers();
        for (x, y) in a.iter().zip(&b) {
            worst = worst.max((x - y).abs() / x.abs().max(1e-300));
        }
    }
    Ok((worst <= 1e-10, format!("max relative difference {worst:e}")))
}

fn takahashi() -> Result<(bool, String)> {
    let (m, l) = (10.0, 1.0);
    let r = takahashi_effective_numeric(m, 1.0, l, Truncation::default())?;
    let want = -5.0 * l.powi(4) / (16.0 * m * m * m);
    let err = (r.j_plaquette / want - 1.0).abs();
    Ok((err <= 1e-10, format!("J = {:.6e}, relative error {err:e}", r.j_plaquette)))
}

fn adjugate_check() -> Result<(bool, String)> {
    let c = symbolic_capacitance_matrix();
    let adj = adjugate(&c);
    let det = determinant(&c);
    let ok = (0..3).all(|i| {
        (0..3).all(|k| {
            let s = (0..3).fold(Poly::zero(), |s, j| &s + &(&adj[i][j] * &c[j][k]));
            if i == k {
                s == det
            } else {
                s.is_zero()
            }
        })
    });
    Ok((ok, "adj(C) C = det(C) I".into()))
}

pub(crate) fn run() -> Result<i32> {
    let checks: [(&str, Check); 5] = [
        ("gauss law", gauss),
        ("gauge fixing", gauge_fixing),
        ("mathieu solvers", mathieu),
        ("effective coupling", takahashi),
        ("capacitance adjugate", adjugate_check),
    ];
    let mut failed = 0;
    for (name, f) in checks {
        let t = Instant::now();
        let (ok, detail) = match f() {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!ok);
        println!("{} {name} [{:.2}s] {detail}", if ok { "PASS" } else { "FAIL" }, t.elapsed().as_secs_f64());
    }
    println!("selftest: {} of {} checks passed", checks.len() - failed, checks.len());
    Ok(if failed == 0 { EXIT_OK } else { EXIT_NUMERICAL })
}
