//! Lowest eigenpairs of Hermitian operators: dense, block Davidson, Lanczos.

use faer::Side;
use faer::traits::ComplexField;
use faer::Mat;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::operator::{apply_scalar, axpy, dot, norm, LinearOperator, Scalar};

/// Converged eigenpairs, ascending.
#[derive(Debug, Clone)]
pub struct Eigenpairs<T> {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<T>>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub matvecs: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct DavidsonOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Extra block vectors beyond the requested count.
    pub extra: usize,
    pub seed: u64,
}

impl Default for DavidsonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 2000,
            extra: 2,
            seed: 0x5eed,
        }
    }
}

fn residual_norm<T: Scalar>(op: &dyn LinearOperator, v: &[T], e: f64) -> f64 {
    let mut hv = vec![T::zero_value(); v.len()];
    apply_scalar(op, v, &mut hv);
    axpy(T::from_re(-e), v, &mut hv);
    norm(&hv)
}

/// Full diagonalization of an explicit Hermitian matrix.
pub fn dense_lowest<T: Scalar + ComplexField>(op: &dyn LinearOperator, k: usize) -> Result<Eigenpairs<T>> {
    let n = op.dim();
    if k > n {
        return Err(Error::InvalidParameter(format!("{k} eigenpairs requested from dimension {n}")));
    }
    let mut m = Mat::<T>::zeros(n, n);
    let mut e = vec![T::zero_value(); n];
    let mut col = vec![T::zero_value(); n];
    for j in 0..n {
        e.iter_mut().for_each(|x| *x = T::zero_value());
        e[j] = T::from_re(1.0);
        apply_scalar(op, &e, &mut col);
        for (i, c) in col.iter().enumerate() {
            m[(i, j)] = *c;
        }
    }
    // threaded reductions would make the result depend on the worker count
    faer::set_global_parallelism(faer::Par::Seq);
    let h = Mat::<T>::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj_value()).scaled(0.5));
    let eig = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::NotConverged {
            what: format!("dense eigensolver: {e:?}"),
            residual: f64::NAN,
        })?;
    let (u, s) = (eig.U(), eig.S().column_vector());
    let mut out = Eigenpairs {
        values: Vec::with_capacity(k),
        vectors: Vec::with_capacity(k),
        residuals: Vec::with_capacity(k),
        iterations: 1,
        matvecs: n,
    };
    // eigenvalues come sorted ascending
    for i in 0..k {
        let v: Vec<T> = (0..n).map(|r| u[(r, i)]).collect();
        let e = s[i].re_value();
        out.residuals.push(residual_norm(op, &v, e));
        out.values.push(e);
        out.vectors.push(v);
    }
    Ok(out)
}

/// Orthogonalize `t` against `basis` twice; returns the norm left over.
fn orthogonalize<T: Scalar>(basis: &[Vec<T>], t: &mut [T]) -> f64 {
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, t);
            axpy(-c, b, t);
        }
    }
    norm(t)
}

fn random_vector<T: Scalar>(rng: &mut ChaCha8Rng, n: usize) -> Vec<T> {
    (0..n).map(|_| T::from_re(rng.gen_range(-1.0..1.0))).collect()
}

fn ritz<T: Scalar>(g: &DMatrix<T>) -> (Vec<f64>, DMatrix<T>) {
    let h = (g + g.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(g.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

fn combine<T: Scalar>(basis: &[Vec<T>], coeffs: nalgebra::DVectorView<'_, T>, out: &mut [T]) {
    out.iter_mut().for_each(|x| *x = T::zero_value());
    for (b, c) in basis.iter().zip(coeffs.iter()) {
        axpy(*c, b, out);
    }
}

/// Block Davidson with a diagonal preconditioner and Olsen's correction.
///
/// The diagonal of a charge-basis Hamiltonian spans many orders of magnitude
/// more than the low-lying gaps, which stalls plain Lanczos; the
/// preconditioned corrections converge in a handful of iterations there.
pub fn davidson<T: Scalar>(op: &dyn LinearOperator, k: usize, opts: &DavidsonOptions) -> Result<Eigenpairs<T>> {
    let n = op.dim();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("{k} eigenpairs requested from dimension {n}")));
    }
    let blk = (k + opts.extra).min(n);
    let max_sub = (4 * blk).max(blk + 8).min(n);
    let keep = (2 * blk).min(max_sub - blk.min(max_sub / 2)).max(blk);
    let diag: Vec<f64> = op.diagonal().iter().map(|z| z.re).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]));
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(max_sub);
    let mut images: Vec<Vec<T>> = Vec::with_capacity(max_sub);
    let mut pending: Vec<Vec<T>> = order
        .iter()
        .take(blk.saturating_sub(1).max(1))
        .map(|&i| {
            let mut v = vec![T::zero_value(); n];
            v[i] = T::from_re(1.0);
            v
        })
        .collect();
    if blk > 1 {
        pending.push(random_vector(&mut rng, n));
    }

    let mut matvecs = 0;
    let mut best_res = f64::INFINITY;
    let mut g = DMatrix::<T>::zeros(0, 0);
    for iter in 0..opts.max_iter {
        // extend the basis with the accepted, orthonormalized pending vectors
        for mut t in pending.drain(..) {
            let before = norm(&t);
            let after = orthogonalize(&basis, &mut t);
            if after <= 1e-8 * before || after == 0.0 {
                continue;
            }
            t.iter_mut().for_each(|x| *x = x.scaled(1.0 / after));
            let after2 = orthogonalize(&basis, &mut t);
            t.iter_mut().for_each(|x| *x = x.scaled(1.0 / after2));
            let mut at = vec![T::zero_value(); n];
            apply_scalar(op, &t, &mut at);
            matvecs += 1;
            basis.push(t);
            images.push(at);
        }
        let s = basis.len();
        let old = g.nrows();
        let mut gn = DMatrix::<T>::zeros(s, s);
        for i in 0..s {
            for j in 0..s {
                gn[(i, j)] = if i < old && j < old {
                    g[(i, j)]
                } else {
                    dot(&basis[i], &images[j])
                };
            }
        }
        g = gn;
        let (theta, y) = ritz(&g);
        let nb = blk.min(s);

        let mut residuals = Vec::with_capacity(nb);
        let mut xs = Vec::with_capacity(nb);
        let mut rs = Vec::with_capacity(nb);
        for i in 0..nb {
            let mut x = vec![T::zero_value(); n];
            let mut r = vec![T::zero_value(); n];
            combine(&basis, y.column(i), &mut x);
            combine(&images, y.column(i), &mut r);
            axpy(T::from_re(-theta[i]), &x, &mut r);
            residuals.push(norm(&r));
            xs.push(x);
            rs.push(r);
        }
        let worst = residuals.iter().take(k).cloned().fold(0.0, f64::max);
        best_res = best_res.min(worst);
        if nb >= k && worst <= opts.tol {
            return Ok(Eigenpairs {
                values: theta[..k].to_vec(),
                vectors: xs.into_iter().take(k).collect(),
                residuals: residuals[..k].to_vec(),
                iterations: iter + 1,
                matvecs,
            });
        }
        if s == n {
            // the subspace is the whole space; Ritz pairs are exact up to rounding
            return Ok(Eigenpairs {
                values: theta[..k].to_vec(),
                vectors: xs.into_iter().take(k).collect(),
                residuals: residuals[..k].to_vec(),
                iterations: iter + 1,
                matvecs,
            });
        }

        // Olsen-corrected preconditioned residuals for unconverged pairs
        for i in 0..nb {
            if residuals[i] <= opts.tol {
                continue;
            }
            let th = theta[i];
            let inv: Vec<f64> = diag
                .iter()
                .map(|d| {
                    let mut den = d - th;
                    if den.abs() < 1e-3 {
                        den = if den < 0.0 { -1e-3 } else { 1e-3 };
                    }
                    1.0 / den
                })
                .collect();
            let mut kr: Vec<T> = rs[i].iter().zip(&inv).map(|(r, w)| r.scaled(*w)).collect();
            let kx: Vec<T> = xs[i].iter().zip(&inv).map(|(x, w)| x.scaled(*w)).collect();
            let eps = dot(&xs[i], &kr) / dot(&xs[i], &kx);
            axpy(-eps, &kx, &mut kr);
            pending.push(kr);
        }

        if s + pending.len() > max_sub {
            // collapse to the lowest Ritz vectors without new products
            let kk = keep.min(s);
            let mut nbasis = Vec::with_capacity(max_sub);
            let mut nimages = Vec::with_capacity(max_sub);
            for i in 0..kk {
                let mut x = vec![T::zero_value(); n];
                let mut ax = vec![T::zero_value(); n];
                combine(&basis, y.column(i), &mut x);
                combine(&images, y.column(i), &mut ax);
                nbasis.push(x);
                nimages.push(ax);
            }
            basis = nbasis;
            images = nimages;
            // recomputed rather than assumed diagonal so rounding drift does not accumulate
            g = DMatrix::from_fn(kk, kk, |i, j| dot(&basis[i], &images[j]));
            g = (&g + g.adjoint()).scale(0.5);
        }
        // a stalled expansion gets a fresh random direction
        let fresh: usize = pending
            .iter()
            .map(|p| {
                let mut t = p.clone();
                let before = norm(&t);
                usize::from(orthogonalize(&basis, &mut t) > 1e-8 * before)
            })
            .sum();
        if fresh == 0 {
            pending.push(random_vector(&mut rng, n));
        }
    }
    Err(Error::NotConverged {
        what: format!("Davidson for {k} eigenpairs after {} iterations", opts.max_iter),
        residual: best_res,
    })
}

/// Lanczos with full reorthogonalization from a deterministic random start.
/// Finds one vector per distinct eigenvalue; degenerate copies are missed.
pub fn lanczos<T: Scalar>(op: &dyn LinearOperator, k: usize, tol: f64, max_iter: usize, seed: u64) -> Result<Eigenpairs<T>> {
    let n = op.dim();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("{k} eigenpairs requested from dimension {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q: Vec<T> = random_vector(&mut rng, n);
    let nq = norm(&q);
    q.iter_mut().for_each(|x| *x = x.scaled(1.0 / nq));
    let mut qs: Vec<Vec<T>> = vec![q];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let limit = max_iter.min(n);
    let mut best = f64::INFINITY;
    for j in 0..limit {
        let mut w = vec![T::zero_value(); n];
        apply_scalar(op, &qs[j], &mut w);
        let a = dot(&qs[j], &w).re_value();
        alpha.push(a);
        orthogonalize(&qs, &mut w);
        let b = norm(&w);
        let m = alpha.len();
        if m >= k && (m % 5 == 0 || b < 1e-14 || m == limit) {
            let t = DMatrix::from_fn(m, m, |r, c| {
                if r == c {
                    alpha[r]
                } else if r.abs_diff(c) == 1 {
                    beta[r.min(c)]
                } else {
                    0.0
                }
            });
            let (vals, vecs) = ritz(&t);
            let res: Vec<f64> = (0..k).map(|i| (b * vecs[(m - 1, i)]).abs()).collect();
            let worst = res.iter().cloned().fold(0.0, f64::max);
            best = best.min(worst);
            if worst <= tol || b < 1e-14 || m == limit {
                let mut out = Eigenpairs {
                    values: Vec::new(),
                    vectors: Vec::new(),
                    residuals: Vec::new(),
                    iterations: m,
                    matvecs: m,
                };
                for i in 0..k {
                    let mut x = vec![T::zero_value(); n];
                    for (qv, c) in qs.iter().zip(vecs.column(i).iter()) {
                        axpy(T::from_re(*c), qv, &mut x);
                    }
                    out.residuals.push(residual_norm(op, &x, vals[i]));
                    out.values.push(vals[i]);
                    out.vectors.push(x);
                }
                let worst = out.residuals.iter().cloned().fold(0.0, f64::max);
                if worst <= tol {
                    return Ok(out);
                }
                if b < 1e-14 || m == limit {
                    return Err(Error::NotConverged {
                        what: format!("Lanczos for {k} eigenpairs"),
                        residual: worst,
                    });
                }
            }
        }
        if b < 1e-14 {
            break;
        }
        beta.push(b);
        w.iter_mut().for_each(|x| *x = x.scaled(1.0 / b));
        qs.push(w);
    }
    Err(Error::NotConverged {
        what: format!("Lanczos for {k} eigenpairs"),
        residual: best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rotor::SparseOperator;
    use num_complex::Complex64 as C64;

    fn graded(n: usize) -> SparseOperator {
        SparseOperator::from_row_fn(n, |r, out| {
            out.push((r, C64::new((r as f64).powi(2) * 0.5 + ((r * 7) % 5) as f64, 0.0)));
            if r + 1 < n {
                out.push((r + 1, C64::new(-0.7, 0.0)));
            }
            if r > 0 {
                out.push((r - 1, C64::new(-0.7, 0.0)));
            }
            if r + 9 < n {
                out.push((r + 9, C64::new(0.1, 0.0)));
            }
            if r >= 9 {
                out.push((r - 9, C64::new(0.1, 0.0)));
            }
        })
    }

    #[test]
    fn davidson_matches_dense() {
        let h = graded(300);
        let d: Eigenpairs<f64> = dense_lowest(&h, 6).unwrap();
        let v: Eigenpairs<f64> = davidson(&h, 6, &DavidsonOptions::default()).unwrap();
        for i in 0..6 {
            // dense rounding is about ε‖H‖ with ‖H‖ ≈ 4.5e4
            assert!((d.values[i] - v.values[i]).abs() < 1e-9, "{i}");
            assert!(v.residuals[i] <= 1e-10);
        }
    }

    #[test]
    fn complex_path_agrees() {
        let h = graded(120);
        let a: Eigenpairs<C64> = davidson(&h, 3, &DavidsonOptions::default()).unwrap();
        let b: Eigenpairs<f64> = davidson(&h, 3, &DavidsonOptions::default()).unwrap();
        for i in 0..3 {
            assert!((a.values[i] - b.values[i]).abs() < 1e-11);
        }
    }

    #[test]
    fn lanczos_matches_dense() {
        let h = graded(200);
        let d: Eigenpairs<f64> = dense_lowest(&h, 3).unwrap();
        let l: Eigenpairs<f64> = lanczos(&h, 3, 1e-9, 200, 1).unwrap();
        for i in 0..3 {
            assert!((d.values[i] - l.values[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn degenerate_levels_are_found() {
        // two identical decoupled blocks: every level doubly degenerate
        let a = graded(40);
        let h = SparseOperator::identity(2).kron(&a);
        let d: Eigenpairs<f64> = dense_lowest(&h, 6).unwrap();
        let v: Eigenpairs<f64> = davidson(&h, 6, &DavidsonOptions::default()).unwrap();
        for i in 0..6 {
            assert!((d.values[i] - v.values[i]).abs() < 1e-11);
        }
        assert!((v.values[0] - v.values[1]).abs() < 1e-12);
    }

    #[test]
    fn whole_space_is_handled() {
        let h = graded(5);
        let v: Eigenpairs<f64> = davidson(&h, 5, &DavidsonOptions::default()).unwrap();
        let d: Eigenpairs<f64> = dense_lowest(&h, 5).unwrap();
        for i in 0..5 {
            assert!((d.values[i] - v.values[i]).abs() < 1e-11);
        }
        assert!(davidson::<f64>(&h, 6, &DavidsonOptions::default()).is_err());
    }
}
