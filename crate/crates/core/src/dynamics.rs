//! Real-time evolution: vortex quench and UP/DOWN plaquette exchange.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::effective::EffectiveParams;
use crate::error::{Error, Result};
use crate::operator::{axpy, dot, norm, LinearOperator, Scalar};
use crate::plaquette::{build, updown_states, vortex_unitary, BasisKind, HamiltonianRep, PlaquetteParams};
use crate::rotor::{apply, StateVector};
use crate::spectra::{dense_lowest, expectation, ground_state, SolveOptions, DENSE_LIMIT};

/// Static charges that put both UP and DOWN link states at zero matter charge.
pub const UPDOWN_STATIC_CHARGES: [i64; 4] = [-1, 0, 0, 1];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Propagator {
    Auto,
    Krylov,
    Spectral,
}

impl std::fmt::Display for Propagator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Propagator::Auto => "auto",
            Propagator::Krylov => "krylov",
            Propagator::Spectral => "spectral",
        })
    }
}

impl std::str::FromStr for Propagator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Propagator::Auto),
            "krylov" => Ok(Propagator::Krylov),
            "spectral" => Ok(Propagator::Spectral),
            _ => Err(Error::InvalidParameter(format!("unknown propagator '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions {
    /// Krylov error estimate allowed per internal step.
    pub tol: f64,
    pub krylov_dim: usize,
    /// Upper bound on the internal step; `∞` leaves it adaptive.
    pub max_step: f64,
    pub propagator: Propagator,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            krylov_dim: 30,
            max_step: f64::INFINITY,
            propagator: Propagator::Auto,
        }
    }
}

/// Observables sampled on a time grid; columns keep insertion order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub columns: Vec<(String, Vec<f64>)>,
    pub params: BTreeMap<String, String>,
}

impl TimeSeries {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn push_column(&mut self, name: &str, v: Vec<f64>) {
        self.columns.push((name.to_string(), v));
    }

    /// `(max − min)` of a column.
    pub fn range(&self, name: &str) -> Option<f64> {
        let c = self.column(name)?;
        let hi = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
        Some(hi - lo)
    }
}

/// `n` equally spaced times on `[0, t_end)`.
pub fn uniform_grid(t_end: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| t_end * k as f64 / n as f64).collect()
}

fn check_grid(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidParameter("empty time grid".into()));
    }
    if times[0] != 0.0 {
        return Err(Error::InvalidParameter("time grid must start at 0".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidParameter("time grid must be finite and strictly ascending".into()));
    }
    Ok(())
}

/// Short-time Lanczos propagator with an a-posteriori step control.
pub struct KrylovPropagator<'a> {
    h: &'a dyn LinearOperator,
    opts: EvolveOptions,
    last_step: f64,
    pub steps: usize,
}

impl<'a> KrylovPropagator<'a> {
    pub fn new(h: &'a dyn LinearOperator, opts: EvolveOptions) -> Self {
        Self {
            h,
            opts,
            last_step: 0.0,
            steps: 0,
        }
    }

    /// Advance `psi` by `t` (either sign).
    pub fn advance(&mut self, psi: &mut Vec<C64>, t: f64) -> Result<()> {
        let total = t.abs();
        let sign = t.signum();
        let mut done = 0.0;
        while done < total {
            let remaining = total - done;
            let beta0 = norm(psi);
            if beta0 == 0.0 {
                return Ok(());
            }
            let n = psi.len();
            let mmax = self.opts.krylov_dim.min(n).max(1);
            let mut basis: Vec<Vec<C64>> = vec![psi.iter().map(|z| z / beta0).collect()];
            let mut alpha = Vec::with_capacity(mmax);
            let mut beta: Vec<f64> = Vec::with_capacity(mmax);
            let mut exact = false;
            loop {
                let j = basis.len() - 1;
                let mut w = self.h.apply_vec(&basis[j]);
                alpha.push(dot(&basis[j], &w).re);
                for _ in 0..2 {
                    for b in &basis {
                        let c = dot(b, &w);
                        axpy(-c, b, &mut w);
                    }
                }
                let b = norm(&w);
                beta.push(b);
                if b <= 1e-14 * alpha.iter().fold(1.0f64, |a, x| a.max(x.abs())) {
                    exact = true;
                    break;
                }
                if basis.len() == mmax {
                    break;
                }
                basis.push(w.iter().map(|z| z / b).collect());
            }
            let m = alpha.len();
            let tri = DMatrix::from_fn(m, m, |r, c| {
                if r == c {
                    alpha[r]
                } else if r.abs_diff(c) == 1 {
                    beta[r.min(c)]
                } else {
                    0.0
                }
            });
            let eig = SymmetricEigen::new(tri);
            let coeffs = |dt: f64| -> Vec<C64> {
                (0..m)
                    .map(|r| {
                        (0..m)
                            .map(|k| {
                                let q = eig.eigenvectors[(r, k)] * eig.eigenvectors[(0, k)];
                                C64::from_polar(q, -sign * eig.eigenvalues[k] * dt)
                            })
                            .sum()
                    })
                    .collect()
            };
            let mut dt = if self.last_step > 0.0 {
                (2.0 * self.last_step).min(remaining)
            } else {
                remaining
            };
            dt = dt.min(self.opts.max_step);
            let floor = 1e-14 * total.max(1.0);
            let c = loop {
                let c = coeffs(dt);
                let err = if exact { 0.0 } else { beta0 * beta[m - 1] * c[m - 1].norm() };
                if err <= self.opts.tol {
                    break c;
                }
                dt *= 0.5;
                if dt < floor {
                    return Err(Error::StepUnderflow { t: sign * done });
                }
            };
            psi.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
            for (v, ck) in basis.iter().zip(&c) {
                axpy(ck * beta0, v, psi);
            }
            done += dt;
            if dt < remaining {
                self.last_step = dt;
            }
            self.steps += 1;
        }
        Ok(())
    }
}

/// Exact propagation in the eigenbasis of a dense Hamiltonian.
pub struct SpectralPropagator {
    energies: Vec<f64>,
    vectors: Vec<Vec<C64>>,
}

impl SpectralPropagator {
    pub fn new(h: &dyn LinearOperator) -> Result<Self> {
        let n = h.dim();
        let (energies, vectors) = if h.is_real() {
            let r = dense_lowest::<f64>(h, n)?;
            (r.values, r.vectors.into_iter().map(|v| v.into_iter().map(|x| x.to_c64()).collect()).collect())
        } else {
            let r = dense_lowest::<C64>(h, n)?;
            (r.values, r.vectors)
        };
        Ok(Self { energies, vectors })
    }

    pub fn coefficients(&self, psi: &[C64]) -> Vec<C64> {
        self.vectors.iter().map(|v| dot(v, psi)).collect()
    }

    pub fn state_at(&self, coeffs: &[C64], t: f64) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.vectors[0].len()];
        for ((v, c), e) in self.vectors.iter().zip(coeffs).zip(&self.energies) {
            axpy(c * C64::from_polar(1.0, -e * t), v, &mut out);
        }
        out
    }
}

/// `ψ(t) = exp(−iHt) ψ0` sampled on `times` (ascending from 0), with
/// `norm`, `energy`, `fidelity = |⟨ψ0|ψ(t)⟩|²` and the named observables.
pub fn evolve_operator(
    h: &dyn LinearOperator,
    psi0: &StateVector,
    times: &[f64],
    observables: &[(&str, &dyn LinearOperator)],
    opts: &EvolveOptions,
) -> Result<TimeSeries> {
    check_grid(times)?;
    if psi0.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            got: psi0.dim(),
        });
    }
    if !psi0.is_normalized() {
        return Err(Error::InvalidParameter("initial state must be normalized".into()));
    }
    let propagator = match opts.propagator {
        Propagator::Auto if h.dim() <= DENSE_LIMIT => Propagator::Spectral,
        Propagator::Auto => Propagator::Krylov,
        p => p,
    };
    let mut cols: Vec<Vec<f64>> = vec![Vec::with_capacity(times.len()); 3 + observables.len()];
    let mut record = |psi: &StateVector| -> Result<()> {
        cols[0].push(psi.norm());
        cols[1].push(expectation(h, psi)?);
        cols[2].push(psi0.inner(psi).norm_sqr());
        for (k, (_, op)) in observables.iter().enumerate() {
            cols[3 + k].push(expectation(*op, psi)?);
        }
        Ok(())
    };
    match propagator {
        Propagator::Spectral => {
            let sp = SpectralPropagator::new(h)?;
            let c = sp.coefficients(psi0.amplitudes());
            for &t in times {
                record(&StateVector::new(sp.state_at(&c, t)))?;
            }
        }
        _ => {
            let mut kp = KrylovPropagator::new(h, *opts);
            let mut psi = psi0.amplitudes().to_vec();
            let mut now = 0.0;
            for &t in times {
                kp.advance(&mut psi, t - now)?;
                now = t;
                record(&StateVector::new(psi.clone()))?;
            }
        }
    }
    let mut series = TimeSeries {
        times: times.to_vec(),
        columns: Vec::new(),
        params: BTreeMap::new(),
    };
    series.params.insert("propagator".into(), propagator.to_string());
    series.params.insert("tol".into(), format!("{:e}", opts.tol));
    let mut it = cols.into_iter();
    for name in ["norm", "energy", "fidelity"] {
        series.push_column(name, it.next().expect("column"));
    }
    for ((name, _), c) in observables.iter().zip(it) {
        series.push_column(name, c);
    }
    Ok(series)
}

/// [`evolve_operator`] with the named observables of a representation.
pub fn evolve(rep: &HamiltonianRep, psi0: &StateVector, times: &[f64], observables: &[&str], opts: &EvolveOptions) -> Result<TimeSeries> {
    let mut obs: Vec<(&str, &dyn LinearOperator)> = Vec::new();
    for name in observables {
        obs.push((name, rep.observable(name)?));
    }
    let mut s = evolve_operator(&rep.h, psi0, times, &obs, opts)?;
    record_params(&mut s, &rep.params);
    Ok(s)
}

fn record_params(s: &mut TimeSeries, p: &PlaquetteParams) {
    for (k, v) in [
        ("m", p.m.to_string()),
        ("g", p.g.to_string()),
        ("lambda", p.lambda.to_string()),
        ("basis", p.basis.to_string()),
        ("n_max", p.n_max.to_string()),
        ("local_dim", p.local_dim().to_string()),
    ] {
        s.params.insert(k.into(), v);
    }
}

/// Vortex quench result; the ground energy is that of the unkicked state.
#[derive(Debug, Clone)]
pub struct Quench {
    pub series: TimeSeries,
    pub ground_energy: f64,
    pub theta: f64,
}

/// Kicks the ground state with `U_vortex(Θ)` and follows ⟨□⟩, ⟨n12²⟩ and
/// `F_Θ = |⟨Θ|Ψ_t⟩|²` (the `fidelity` column).
pub fn quench_vortex(params: &PlaquetteParams, theta: f64, times: &[f64], solve: &SolveOptions, opts: &EvolveOptions) -> Result<Quench> {
    if params.basis == BasisKind::GaugeFixedMathieu {
        return Err(Error::Unsupported("the vortex kick is diagonal only in a charge basis".into()));
    }
    let rep = build(params)?;
    let (e0, psi0) = ground_state(&rep, solve)?;
    let kicked = apply(&vortex_unitary(&rep, theta)?, &psi0)?;
    let mut series = evolve(&rep, &kicked, times, &["plaquette", "n12_sq"], opts)?;
    series.params.insert("theta".into(), theta.to_string());
    Ok(Quench {
        series,
        ground_energy: e0,
        theta,
    })
}

/// Peak of a discrete spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyFit {
    /// Angular frequency.
    pub omega: f64,
    /// Amplitude of the fitted sinusoid.
    pub amplitude: f64,
    pub predicted: Option<f64>,
    pub relative_error: Option<f64>,
    /// Angular bin spacing `2π / (N Δt)`.
    pub resolution: f64,
}

/// Dominant angular frequency of a uniformly sampled series: mean removed,
/// Hann window, FFT, three-point quadratic refinement around the peak bin.
pub fn dominant_frequency(times: &[f64], values: &[f64], predicted: Option<f64>) -> Result<FrequencyFit> {
    let n = values.len();
    if n < 8 || times.len() != n {
        return Err(Error::InvalidParameter("frequency fit needs at least 8 matching samples".into()));
    }
    let dt = times[1] - times[0];
    if !(dt > 0.0) || times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt) {
        return Err(Error::InvalidParameter("frequency fit needs a uniform time grid".into()));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let window: Vec<f64> = (0..n)
        .map(|k| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos())
        .collect();
    let mut buf: Vec<C64> = values
        .iter()
        .zip(&window)
        .map(|(v, w)| C64::new((v - mean) * w, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let mag: Vec<f64> = buf[..n / 2 + 1].iter().map(|z| z.norm()).collect();
    let (p, &peak) = mag
        .iter()
        .enumerate()
        .skip(1)
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or(Error::NoPeak)?;
    let mut sorted = mag[1..].to_vec();
    sorted.sort_by(f64::total_cmp);
    let floor = sorted[sorted.len() / 2];
    if !(peak > 0.0) || peak <= 10.0 * floor || p + 1 >= mag.len() {
        return Err(Error::NoPeak);
    }
    let (a, b, c) = (mag[p - 1], mag[p], mag[p + 1]);
    let den = a - 2.0 * b + c;
    let delta = if den != 0.0 { 0.5 * (a - c) / den } else { 0.0 };
    let resolution = 2.0 * std::f64::consts::PI / (n as f64 * dt);
    let omega = (p as f64 + delta) * resolution;
    let wsum: f64 = window.iter().sum();
    Ok(FrequencyFit {
        omega,
        amplitude: 2.0 * b / wsum,
        predicted,
        relative_error: predicted.map(|w| (omega - w).abs() / w.abs()),
        resolution,
    })
}

/// UP/DOWN parameters: gauge-fixed charge basis in the sector where both
/// states carry no matter charge.
pub fn updown_params(m: f64, g: f64, lambda: f64, n_max: u32) -> PlaquetteParams {
    PlaquetteParams::gauge_fixed(m, g, lambda, n_max).with_static_charges(UPDOWN_STATIC_CHARGES)
}

/// Default grid: `points` samples over `periods` periods of `|J_□|`, endpoint excluded.
pub fn updown_grid(params: &PlaquetteParams, periods: f64, points: usize) -> Result<Vec<f64>> {
    let w = EffectiveParams::new(params.m, params.g, params.lambda)?.omega();
    if w == 0.0 {
        return Err(Error::InvalidParameter("no plaquette coupling at lambda = 0".into()));
    }
    Ok(uniform_grid(periods * 2.0 * std::f64::consts::PI / w, points))
}

/// Starts in UP and records both populations, their leakage and ⟨n12⟩;
/// the frequency comes from the spectrum of ⟨n12⟩ against `|J_□|`.
pub fn updown_oscillation(params: &PlaquetteParams, times: &[f64], opts: &EvolveOptions) -> Result<(TimeSeries, FrequencyFit)> {
    if params.static_charges != UPDOWN_STATIC_CHARGES {
        return Err(Error::InvalidParameter(format!(
            "UP/DOWN runs in the static-charge sector {UPDOWN_STATIC_CHARGES:?}; use updown_params"
        )));
    }
    let predicted = EffectiveParams::new(params.m, params.g, params.lambda)?.omega();
    let rep = build(params)?;
    let (up, down) = updown_states(&rep)?;
    let up_proj = projector_onto(&up);
    let down_proj = projector_onto(&down);
    let obs: Vec<(&str, &dyn LinearOperator)> = vec![
        ("p_up", &up_proj),
        ("p_down", &down_proj),
        ("n12", rep.observable("n12")?),
    ];
    let mut series = evolve_operator(&rep.h, &up, times, &obs, opts)?;
    record_params(&mut series, params);
    let leak: Vec<f64> = series
        .column("p_up")
        .expect("column")
        .iter()
        .zip(series.column("p_down").expect("column"))
        .map(|(a, b)| 1.0 - a - b)
        .collect();
    series.push_column("leakage", leak);
    let fit = dominant_frequency(times, series.column("n12").expect("column"), Some(predicted))?;
    Ok((series, fit))
}

fn projector_onto(basis_state: &StateVector) -> crate::rotor::SparseOperator {
    let mut d = vec![C64::new(0.0, 0.0); basis_state.dim()];
    for (i, z) in basis_state.amplitudes().iter().enumerate() {
        if *z != C64::new(0.0, 0.0) {
            d[i] = C64::new(z.norm_sqr(), 0.0);
        }
    }
    crate::rotor::SparseOperator::from_diagonal(&d)
}
