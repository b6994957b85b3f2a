//! Acceptance suite: one line per criterion, nonzero exit on any failure.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use num_rational::Ratio;
use plaquette_sim::circuit::poly::{adjugate, determinant, Mat3, Poly};
use plaquette_sim::circuit::{junction_corrected_couplings, symbolic_capacitance_matrix, BranchCircuit};
use plaquette_sim::dynamics::{quench_vortex, uniform_grid, updown_grid, updown_oscillation, updown_params, EvolveOptions};
use plaquette_sim::effective::{analytic_effective, spectrum_compare, takahashi_effective_numeric, Truncation};
use plaquette_sim::mathieu::{characteristic_values, characteristic_values_from_link, link_eigenbasis};
use plaquette_sim::plaquette::{build, gauss_violation, sector_indices, Corrections, PlaquetteParams, KINETIC_MATRIX};
use plaquette_sim::spectra::{expectation, ground_state, lowest_eigenpairs, low_spectrum, SolveOptions};
use plaquette_sim::Result;

type Verdict = Result<(bool, String)>;

fn gauss_law() -> Verdict {
    let plain = build(&PlaquetteParams::full(0.8, 1.1, 1.3, 1))?;
    let corr = Corrections {
        chi: 0.013,
        eta: 0.021,
        n_s: 0.3,
    };
    let corrected = build(&PlaquetteParams::full(0.8, 1.1, 1.3, 1).with_corrections(corr))?;
    let (a, b) = (gauss_violation(&plain)?, gauss_violation(&corrected)?);
    Ok((a == 0.0 && b == 0.0, format!("max |[G_i, H]| = {a:e} plain, {b:e} with corrections")))
}

fn gauge_fixing() -> Verdict {
    let (m, g, l) = (0.7, 1.1, 1.3);
    let full = build(&PlaquetteParams::full(m, g, l, 1))?;
    let idx = sector_indices(&full)?;
    let sector = full.h.as_sparse().expect("sparse").restrict(&idx);
    let opts = SolveOptions::default();
    let a = lowest_eigenpairs(&sector, 6, &opts)?.energies;
    let b = low_spectrum(&build(&PlaquetteParams::gauge_fixed(m, g, l, 1))?, 6, &opts)?.energies;
    let err = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    Ok((err <= 1e-10, format!("sector dim {}, max |ΔE| = {err:e}", idx.len())))
}

fn mathieu_cross() -> Verdict {
    let mut worst: f64 = 0.0;
    for q in [-0.5, -2.0, -8.0] {
        let tri = characteristic_values(q, 10, 60)?.numbers();
        let link = characteristic_values_from_link(q, 10, 60)?.numbers();
        for (a, b) in tri.iter().zip(&link) {
            worst = worst.max((a - b).abs() / a.abs().max(1e-300));
        }
    }
    let free = characteristic_values(0.0, 9, 20)?.numbers();
    let free_link = characteristic_values_from_link(0.0, 9, 20)?.numbers();
    let exact = (0..9).all(|k| {
        let n = ((k + 1) / 2) as f64;
        free[k] == 4.0 * n * n && free_link[k] == 4.0 * n * n
    });
    Ok((worst <= 1e-10 && exact, format!("max relative difference {worst:e}; q = 0 exact: {exact}")))
}

fn kinetic_matrix() -> Verdict {
    let m: Vec<Vec<Ratio<i64>>> = KINETIC_MATRIX
        .iter()
        .map(|r| r.iter().map(|&x| Ratio::from_integer(x)).collect())
        .collect();
    // Faddeev–LeVerrier: characteristic polynomial coefficients in exact rationals
    let n = 4;
    let mut coeffs = vec![Ratio::from_integer(1i64)];
    let mut mk = vec![vec![Ratio::from_integer(0i64); n]; n];
    for k in 1..=n {
        let mut next = vec![vec![Ratio::from_integer(0i64); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = Ratio::from_integer(0);
                for l in 0..n {
                    s += m[i][l] * mk[l][j];
                }
                if i == j {
                    s += coeffs[k - 1];
                }
                next[i][j] = s;
            }
        }
        let mut tr = Ratio::from_integer(0);
        for i in 0..n {
            for l in 0..n {
                tr += m[i][l] * next[l][i];
            }
        }
        coeffs.push(-tr / Ratio::from_integer(k as i64));
        mk = next;
    }
    // x (x − 2)² (x − 4) = x⁴ − 8x³ + 20x² − 16x
    let want: Vec<Ratio<i64>> = [1, -8, 20, -16, 0].iter().map(|&x| Ratio::from_integer(x)).collect();
    let pairs: [(i64, [i64; 4]); 4] = [(0, [1, 1, -1, -1]), (2, [1, 1, 1, 1]), (2, [1, -1, -1, 1]), (4, [1, -1, 1, -1])];
    let eigen_ok = pairs.iter().all(|(lam, v)| {
        (0..4).all(|i| (0..4).map(|j| KINETIC_MATRIX[i][j] * v[j]).sum::<i64>() == lam * v[i])
    });
    let ok = coeffs == want && eigen_ok;
    Ok((ok, "char. poly x(x-2)^2(x-4); zero mode (1,1,-1,-1)".into()))
}

fn takahashi() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut classes_ok = true;
    for (m, l) in [(1.0, 1.0), (10.0, 1.0), (3.0, 0.7)] {
        let r = takahashi_effective_numeric(m, 1.0, l, Truncation::default())?;
        let want = -5.0 * l.powi(4) / (16.0 * m * m * m);
        worst = worst.max((r.j_plaquette / want - 1.0).abs());
        let ji = -l.powi(4) / (8.0 * m * m * m);
        let jiii = -l.powi(4) / (16.0 * m * m * m);
        classes_ok &= (r.class_j[0] / ji - 1.0).abs() < 1e-12
            && (r.class_j[1] / ji - 1.0).abs() < 1e-12
            && (r.class_j[2] / jiii - 1.0).abs() < 1e-12
            && r.extraction_spread < 1e-12;
    }
    Ok((worst <= 1e-10 && classes_ok, format!("max relative error of J {worst:e}; class energies match: {classes_ok}")))
}

fn spectrum_agreement() -> Verdict {
    let n_max = 12;
    let opts = SolveOptions::default();
    let mut maxima = Vec::new();
    for m in [20.0, 50.0, 100.0, 200.0] {
        let full = build(&PlaquetteParams::gauge_fixed(m, 1.0, 1.0, n_max))?;
        let eff = analytic_effective(m, 1.0, 1.0, n_max)?;
        let err = spectrum_compare(&full, &eff, 8, &opts)?;
        maxima.push(err.iter().cloned().fold(0.0, f64::max));
    }
    let monotone = maxima.windows(2).all(|w| w[1] < w[0]);
    let last = *maxima.last().expect("four runs");
    let text: Vec<String> = maxima.iter().map(|e| format!("{e:.3e}")).collect();
    Ok((monotone && last <= 1e-6, format!("max gap error at m = 20, 50, 100, 200: {}", text.join(", "))))
}

fn oscillation() -> Verdict {
    let p = updown_params(20.0, 1.0, 1.0, 2);
    let times = updown_grid(&p, 8.0, 400)?;
    let (_, fit) = updown_oscillation(&p, &times, &EvolveOptions::default())?;
    let err = fit.relative_error.expect("prediction given");
    Ok((err <= 5e-3, format!("omega = {:.6e}, predicted {:.6e}, relative error {err:.2e}", fit.omega, fit.predicted.unwrap())))
}

fn vortex_quench() -> Verdict {
    let p = PlaquetteParams::gauge_fixed(0.02, 0.02, 1.0, 6);
    let q = quench_vortex(&p, PI, &uniform_grid(60.0, 241), &SolveOptions::default(), &EvolveOptions::default())?;
    let s = &q.series;
    let norm_dev = s.column("norm").unwrap().iter().map(|x| (x - 1.0).abs()).fold(0.0, f64::max);
    let e0 = s.column("energy").unwrap()[0];
    let e_dev = s.range("energy").unwrap() / e0.abs();
    let f_range = s.range("fidelity").unwrap();
    Ok((
        norm_dev <= 1e-10 && e_dev <= 1e-8 && f_range > 0.1,
        format!("norm drift {norm_dev:.1e}, energy drift {e_dev:.1e}, F range {f_range:.3}"),
    ))
}

fn decoupled_limit() -> Verdict {
    let opts = SolveOptions::default();
    let mut worst_mathieu: f64 = 0.0;
    let mut worst_charge: f64 = 0.0;
    for lg in [0.1, 1.0, 10.0, 100.0] {
        let (lambda, g) = (1.0, 1.0 / lg);
        let single = link_eigenbasis(0.0, g, lambda, 1, 80)?.cos_matrix()[(0, 0)];
        let want = single.powi(4);
        for (n, basis) in [(0usize, 5usize), (1, 25)] {
            let p = if n == 0 {
                PlaquetteParams::mathieu(0.0, g, lambda, basis)
            } else {
                PlaquetteParams::gauge_fixed(0.0, g, lambda, (basis as u32 - 1) / 2)
            };
            let rep = build(&p)?;
            let (_, psi) = ground_state(&rep, &opts)?;
            let err = (expectation(rep.observable("plaquette")?, &psi)? - want).abs();
            if n == 0 {
                worst_mathieu = worst_mathieu.max(err);
            } else {
                worst_charge = worst_charge.max(err);
            }
        }
    }
    Ok((
        worst_mathieu <= 1e-8 && worst_charge <= 1e-8,
        format!("max |<P> - <cos>^4|: Mathieu N = 5 {worst_mathieu:.1e}, charge N = 25 {worst_charge:.1e}"),
    ))
}

fn circuit_consistency() -> Verdict {
    let mut errs = Vec::new();
    for cj in [1e-2, 1e-3, 1e-4] {
        let c = BranchCircuit {
            c_m: 1.0,
            c_g: 2.0,
            c_j: cj,
            ..Default::default()
        };
        let j = junction_corrected_couplings(&c)?;
        let (f, e) = (j.first_order, j.exact);
        // absolute: χ and η are themselves O(C_J)
        let abs = [(f.m, e.m), (f.g, e.g), (f.chi, e.chi), (f.eta, e.eta)]
            .iter()
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        errs.push(abs);
    }
    let ratios: Vec<f64> = errs.windows(2).map(|w| w[0] / w[1]).collect();
    let scaling = ratios.iter().all(|r| (80.0..=125.0).contains(r));

    let m = symbolic_capacitance_matrix();
    let adj = adjugate(&m);
    let det = determinant(&m);
    let product = |a: &Mat3<3>, b: &Mat3<3>| -> Mat3<3> {
        std::array::from_fn(|i| std::array::from_fn(|k| (0..3).fold(Poly::zero(), |s, j| &s + &(&a[i][j] * &b[j][k]))))
    };
    let scalar: Mat3<3> = std::array::from_fn(|i| std::array::from_fn(|k| if i == k { det.clone() } else { Poly::zero() }));
    let cofactors = product(&adj, &m) == scalar && product(&m, &adj) == scalar;
    let (cm, cg, cj) = (Poly::<3>::var(0), Poly::<3>::var(1), Poly::<3>::var(2));
    let diag = &(&cg * &cm) + &(&cj * &(&cg + &cm));
    let printed: Mat3<3> = [
        [diag.clone(), -&(&cj * &cm), &cj * &cg],
        [-&(&cj * &cm), &(&cm * &cm) + &(&(&cm * &cj) * &Poly::constant(2)), &cj * &cm],
        [&cj * &cg, &cj * &cm, diag],
    ];
    let numerators = adj == printed;
    Ok((
        scaling && cofactors && numerators,
        format!(
            "errors {:.2e}, {:.2e}, {:.2e} (ratios {:.1}, {:.1}); adj*C = det*I: {cofactors}; numerators match: {numerators}",
            errs[0], errs[1], errs[2], ratios[0], ratios[1]
        ),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("gauss-law exactness", gauss_law),
        ("gauge-fixing equivalence", gauge_fixing),
        ("mathieu cross-validation", mathieu_cross),
        ("kinetic-matrix structure", kinetic_matrix),
        ("effective-coupling oracle", takahashi),
        ("spectrum agreement", spectrum_agreement),
        ("oscillation frequency", oscillation),
        ("vortex quench properties", vortex_quench),
        ("decoupled-limit ground state", decoupled_limit),
        ("circuit-quantization consistency", circuit_consistency),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let (ok, detail) = match f() {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} {name} [{:.1}s] {detail}",
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
