use std::path::Path;
use std::time::Instant;

use serde_json::{json, Map, Value};

use super::config::Settings;
use super::output::{emit, Cell, Sidecar, Table};
use super::{COMMANDS, COUPLINGS, EXIT_OK};
use crate::circuit::{couplings, junction_corrected_couplings, BranchCircuit};
use crate::dynamics::{quench_vortex, updown_grid, updown_oscillation, updown_params, EvolveOptions, Propagator};
use crate::effective::{analytic_effective, compare_gaps};
use crate::error::{Error, Result};
use crate::mathieu::{characteristic_values, characteristic_values_from_link};
use crate::plaquette::{build, BasisKind, Corrections, PlaquetteParams};
use crate::spectra::{scan_ground, ScanConfig, SolveOptions};

pub(crate) fn dispatch(name: &str, s: &Settings, out: &Path, start: Instant) -> Result<i32> {
    let (table, stem, results) = match name {
        "ground-scan" => ground_scan(s)?,
        "spectrum-compare" => spectrum(s)?,
        "quench" => quench(s)?,
        "updown" => updown(s)?,
        "mathieu" => mathieu(s)?,
        "circuit" => circuit(s)?,
        _ => unreachable!("dispatch covers every data command"),
    };
    let mut parameters = Map::new();
    let keys = COMMANDS.iter().find(|c| c.name == name).expect("known").all_keys();
    for (k, v) in s.entries() {
        if k != "out" && keys.iter().any(|x| x.name == k) {
            parameters.insert(k.clone(), Value::String(v.clone()));
        }
    }
    let sidecar = Sidecar {
        command: name.to_string(),
        parameters,
        results,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    let path = emit(out, stem, &table, &sidecar)?;
    println!("wrote {} ({} rows)", path.display(), table.rows.len());
    Ok(EXIT_OK)
}

type Output = (Table, &'static str, Map<String, Value>);

fn solve_opts(s: &Settings) -> Result<SolveOptions> {
    Ok(SolveOptions {
        tol: s.f64("tol")?,
        ..Default::default()
    })
}

fn evolve_opts(s: &Settings) -> Result<EvolveOptions> {
    Ok(EvolveOptions {
        tol: s.f64("evolve-tol")?,
        propagator: s.parse::<Propagator>("propagator").map_err(|_| Error::Config(format!("unknown propagator '{}'", s.raw("propagator"))))?,
        ..Default::default()
    })
}

/// Charge cutoff from an odd local dimension `N = 2 n_max + 1`.
fn charge_cutoff(s: &Settings) -> Result<u32> {
    let n: u32 = s.parse("N")?;
    if n % 2 == 0 {
        return Err(Error::Config(format!("charge bases need an odd N, got {n}")));
    }
    Ok((n - 1) / 2)
}

fn basis(s: &Settings) -> Result<BasisKind> {
    s.raw("basis")
        .parse()
        .map_err(|_| Error::Config(format!("unknown basis '{}'", s.raw("basis"))))
}

/// `(m values, g, λ, corrections)` from couplings or, exclusively, from a circuit.
fn resolve_couplings(s: &Settings, m_key: &str) -> Result<(Vec<f64>, f64, f64, Corrections)> {
    let circuit_given = COUPLINGS.iter().any(|k| s.is_explicit(k.name));
    let couplings_given = [m_key, "g", "lambda"].iter().any(|k| s.is_explicit(k));
    if circuit_given && couplings_given {
        return Err(Error::Config(
            "give either couplings (m, g, lambda) or circuit parameters, not both".into(),
        ));
    }
    if !circuit_given {
        let m = if m_key == "m" { vec![s.f64("m")?] } else { s.grid(m_key)? };
        return Ok((m, s.f64("g")?, s.f64("lambda")?, Corrections::default()));
    }
    let c = branch(s)?;
    let cc = couplings(&c)?;
    let corr = Corrections {
        chi: cc.chi,
        eta: cc.eta,
        n_s: cc.n_s,
    };
    Ok((vec![cc.m_prime], cc.g_prime, cc.lambda_ext, corr))
}

fn branch(s: &Settings) -> Result<BranchCircuit> {
    let d = BranchCircuit::default();
    let get = |k: &str, dv: f64| -> Result<f64> {
        if s.is_set(k) {
            s.f64(k)
        } else {
            Ok(dv)
        }
    };
    let c = BranchCircuit {
        c_m: get("Cm", d.c_m)?,
        c_g: get("Cg", d.c_g)?,
        c_j: get("CJ", d.c_j)?,
        c_s: get("Cs", d.c_s)?,
        v_s: get("Vs", d.v_s)?,
        phi_ext: get("phi-ext", d.phi_ext)?,
        e_j: get("EJ", d.e_j)?,
        charge_unit: get("charge-unit", d.charge_unit)?,
        pair_charge: if s.is_set("pair-charge") { s.f64("pair-charge")? } else { d.pair_charge },
    };
    c.validate()?;
    Ok(c)
}

fn ground_scan(s: &Settings) -> Result<Output> {
    let basis = basis(s)?;
    let n: usize = s.parse("N")?;
    let mut cfg = ScanConfig {
        lambda: s.f64("lambda")?,
        lambda_over_g: s.grid("lg-grid")?,
        lambda_over_m: s.grid("lm-grid")?,
        basis,
        observables: s.raw("observables").split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect(),
        tol: s.f64("tol")?,
        ..Default::default()
    };
    match basis {
        BasisKind::GaugeFixedMathieu => cfg.n_states = n,
        _ => cfg.n_max = charge_cutoff(s)?,
    }
    if s.is_set("aux-cutoff") {
        cfg.aux_cutoff = Some(s.parse("aux-cutoff")?);
    }
    let t = scan_ground(&cfg)?;
    let mut table = Table::new(t.headers());
    for r in t.records() {
        table.push(r.into_iter().map(Cell::F).collect());
    }
    let mut res = Map::new();
    res.insert("basis".into(), json!(basis.to_string()));
    res.insert("local_dim".into(), json!(n));
    res.insert("cells".into(), json!(t.rows.len()));
    res.insert("max_residual".into(), json!(t.rows.iter().map(|r| r.residual).fold(0.0, f64::max)));
    Ok((table, "ground_scan", res))
}

fn spectrum(s: &Settings) -> Result<Output> {
    let (ms, g, lambda, corr) = resolve_couplings(s, "m-grid")?;
    let levels: usize = s.parse("levels")?;
    if levels < 2 {
        return Err(Error::Config("levels must be at least 2".into()));
    }
    let n_max = charge_cutoff(s)?;
    let basis = basis(s)?;
    let opts = solve_opts(s)?;
    let mut table = Table::new(["m", "level", "full_gap", "effective_gap", "relative_error"]);
    let mut per_m = Vec::new();
    for &m in &ms {
        let p = match basis {
            BasisKind::FullCharge => PlaquetteParams::full(m, g, lambda, n_max),
            BasisKind::GaugeFixedCharge => PlaquetteParams::gauge_fixed(m, g, lambda, n_max),
            BasisKind::GaugeFixedMathieu => {
                return Err(Error::Config("spectrum-compare needs a charge basis".into()));
            }
        }
        .with_corrections(corr);
        let full = build(&p)?;
        let eff = analytic_effective(m, g, lambda, n_max)?;
        let cmp = compare_gaps(&full, &eff, levels - 1, &opts)?;
        for a in 0..levels - 1 {
            table.push(vec![
                Cell::F(m),
                Cell::I(a as i64 + 1),
                Cell::F(cmp.full_gaps[a]),
                Cell::F(cmp.effective_gaps[a]),
                Cell::F(cmp.relative_errors[a]),
            ]);
        }
        per_m.push(json!({
            "m": m,
            "j_plaquette": eff.couplings.j_plaquette,
            "delta_e2": eff.couplings.delta_e2,
            "delta_e4": eff.couplings.delta_e4,
            "within_convergence": eff.couplings.within_convergence,
            "max_relative_error": cmp.relative_errors.iter().cloned().fold(0.0, f64::max),
            "full_ground": cmp.full_ground,
        }));
    }
    let mut res = Map::new();
    res.insert("basis".into(), json!(basis.to_string()));
    res.insert("n_max".into(), json!(n_max));
    res.insert("runs".into(), Value::Array(per_m));
    Ok((table, "spectrum_compare", res))
}

fn quench(s: &Settings) -> Result<Output> {
    let (ms, g, lambda, corr) = resolve_couplings(s, "m")?;
    let n_max = charge_cutoff(s)?;
    let p = match basis(s)? {
        BasisKind::FullCharge => PlaquetteParams::full(ms[0], g, lambda, n_max),
        BasisKind::GaugeFixedCharge => PlaquetteParams::gauge_fixed(ms[0], g, lambda, n_max),
        BasisKind::GaugeFixedMathieu => return Err(Error::Config("quench needs a charge basis".into())),
    }
    .with_corrections(corr);
    let points: usize = s.parse("points")?;
    let t_max = s.f64("t-max")?;
    if points < 2 || !(t_max > 0.0) {
        return Err(Error::Config("quench needs points >= 2 and t-max > 0".into()));
    }
    let times: Vec<f64> = (0..points).map(|k| t_max * k as f64 / (points - 1) as f64).collect();
    let theta = s.f64("theta")?;
    let q = quench_vortex(&p, theta, &times, &solve_opts(s)?, &evolve_opts(s)?)?;
    let series = &q.series;
    let mut headers = vec!["t".to_string()];
    headers.extend(series.columns.iter().map(|(n, _)| n.clone()));
    let mut table = Table::new(headers);
    for (i, t) in series.times.iter().enumerate() {
        let mut row = vec![Cell::F(*t)];
        row.extend(series.columns.iter().map(|(_, c)| Cell::F(c[i])));
        table.push(row);
    }
    let mut res = Map::new();
    res.insert("theta".into(), json!(theta));
    res.insert("ground_energy".into(), json!(q.ground_energy));
    res.insert("basis".into(), json!(p.basis.to_string()));
    res.insert("n_max".into(), json!(n_max));
    res.insert("propagator".into(), json!(series.params.get("propagator")));
    res.insert("fidelity_range".into(), json!(series.range("fidelity")));
    Ok((table, "quench", res))
}

fn updown(s: &Settings) -> Result<Output> {
    let (ms, g, lambda, corr) = resolve_couplings(s, "m")?;
    let p = updown_params(ms[0], g, lambda, charge_cutoff(s)?).with_corrections(corr);
    let periods = s.f64("periods")?;
    let points: usize = s.parse("points")?;
    let times = updown_grid(&p, periods, points)?;
    let (series, fit) = updown_oscillation(&p, &times, &evolve_opts(s)?)?;
    let mut headers = vec!["t".to_string()];
    headers.extend(series.columns.iter().map(|(n, _)| n.clone()));
    let mut table = Table::new(headers);
    for (i, t) in series.times.iter().enumerate() {
        let mut row = vec![Cell::F(*t)];
        row.extend(series.columns.iter().map(|(_, c)| Cell::F(c[i])));
        table.push(row);
    }
    let mut res = Map::new();
    res.insert("fit".into(), serde_json::to_value(fit).expect("plain struct"));
    res.insert("static_charges".into(), json!(p.static_charges));
    res.insert("within_convergence".into(), json!(crate::effective::convergence_bound(p.m, p.lambda)));
    println!(
        "omega = {:.6e}, predicted |J| = {:.6e}, relative error {:.3e}",
        fit.omega,
        fit.predicted.unwrap_or(f64::NAN),
        fit.relative_error.unwrap_or(f64::NAN)
    );
    Ok((table, "updown", res))
}

fn mathieu(s: &Settings) -> Result<Output> {
    let qs = s.grid("q-grid")?;
    let count: usize = s.parse("count")?;
    let cutoff: usize = s.parse("cutoff")?;
    let mut table = Table::new(["q", "label", "order", "a_tridiagonal", "a_link", "relative_difference"]);
    let mut worst: f64 = 0.0;
    for &q in &qs {
        let tri = characteristic_values(q, count, cutoff)?;
        let link = characteristic_values_from_link(q, count, cutoff)?;
        for ((label, a), (_, b)) in tri.values.iter().zip(&link.values) {
            let rel = (a - b).abs() / a.abs().max(1e-300);
            worst = worst.max(rel);
            table.push(vec![
                Cell::F(q),
                Cell::S(label.to_string()),
                Cell::I(label.order() as i64),
                Cell::F(*a),
                Cell::F(*b),
                Cell::F(rel),
            ]);
        }
    }
    let mut res = Map::new();
    res.insert("max_relative_difference".into(), json!(worst));
    Ok((table, "mathieu", res))
}

fn circuit(s: &Settings) -> Result<Output> {
    let c = branch(s)?;
    let cc = couplings(&c)?;
    let jc = junction_corrected_couplings(&c)?;
    let mut table = Table::new(["quantity", "first_order", "exact", "relative_error"]);
    let (f, e) = (jc.first_order, jc.exact);
    let rel = |a: f64, b: f64| if b == 0.0 { (a - b).abs() } else { ((a - b) / b).abs() };
    println!("m = {:.10e}  g = {:.10e}  lambda = {:.10e}", cc.m, cc.g, cc.lambda);
    for (name, a, b) in [("m_prime", f.m, e.m), ("g_prime", f.g, e.g), ("chi", f.chi, e.chi), ("eta", f.eta, e.eta)] {
        println!("{name:8} first order {a:.10e}  exact {b:.10e}  relative error {:.3e}", rel(a, b));
        table.push(vec![Cell::S(name.into()), Cell::F(a), Cell::F(b), Cell::F(rel(a, b))]);
    }
    for (name, v) in [
        ("m", cc.m),
        ("g", cc.g),
        ("lambda", cc.lambda),
        ("lambda_ext", cc.lambda_ext),
        ("m_s", cc.m_s),
        ("g_s", cc.g_s),
        ("n_s", cc.n_s),
    ] {
        table.push(vec![Cell::S(name.into()), Cell::F(v), Cell::F(v), Cell::F(0.0)]);
    }
    let mut res = Map::new();
    res.insert("couplings".into(), serde_json::to_value(&cc).expect("plain struct"));
    res.insert("junction".into(), serde_json::to_value(&jc).expect("plain struct"));
    res.insert("circuit".into(), serde_json::to_value(c).expect("plain struct"));
    Ok((table, "circuit", res))
}
