//! Truncated U(1) rotor algebra.
//!
//! A rotor mode carries an integer charge `n` (Cooper pairs) conjugate to a
//! compact phase `θ`. The charge window is symmetric, `-n_max..=n_max`, and
//! the shift operators `e^{±iθ}` are hard-truncated: matrix elements that
//! would leave the window are dropped rather than wrapped.

use std::fmt;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::operator::LinearOperator;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Rows per rayon task in matrix-vector products.
const PAR_CHUNK: usize = 4096;

/// Symmetric charge window `-n_max..=n_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct ChargeBasis {
    n_max: u32,
}

impl ChargeBasis {
    pub fn new(n_max: u32) -> Self {
        Self { n_max }
    }

    /// Basis with a given odd local dimension `N = 2 n_max + 1`.
    pub fn with_dim(dim: usize) -> Result<Self> {
        if dim % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "charge basis dimension must be odd, got {dim}"
            )));
        }
        Ok(Self::new(((dim - 1) / 2) as u32))
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        2 * self.n_max as usize + 1
    }

    pub fn charges(&self) -> Vec<i64> {
        let n = self.n_max as i64;
        (-n..=n).collect()
    }

    pub fn charge_at(&self, index: usize) -> i64 {
        index as i64 - self.n_max as i64
    }

    pub fn index_of(&self, charge: i64) -> Option<usize> {
        let shifted = charge + self.n_max as i64;
        (0..self.dim() as i64)
            .contains(&shifted)
            .then_some(shifted as usize)
    }
}

/// Complex sparse matrix in compressed-row form.
///
/// Rows are stored with strictly increasing column indices and no explicit
/// zeros, so two operators with the same entries have identical storage.
#[derive(Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl fmt::Debug for SparseOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SparseOperator")
            .field("dim", &self.dim)
            .field("nnz", &self.nnz())
            .finish()
    }
}

impl SparseOperator {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            row_ptr: vec![0; dim + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(&vec![ONE; dim])
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        Self::from_triplets(diag.len(), diag.iter().enumerate().map(|(i, &v)| (i, i, v)))
            .expect("diagonal indices are in range")
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_diagonal(&d)
    }

    /// Assemble from `(row, col, value)` triplets. Repeated positions are
    /// summed in input order; entries that sum to exactly zero are dropped.
    pub fn from_triplets<I>(dim: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, C64)>,
    {
        let mut t: Vec<(usize, usize, C64)> = triplets.into_iter().collect();
        for &(r, c, _) in &t {
            if r >= dim || c >= dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: r.max(c) + 1,
                });
            }
        }
        t.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(t.len());
        let mut vals = Vec::with_capacity(t.len());
        let mut i = 0;
        while i < t.len() {
            let (r, c, mut v) = t[i];
            let mut j = i + 1;
            while j < t.len() && t[j].0 == r && t[j].1 == c {
                v += t[j].2;
                j += 1;
            }
            if v != ZERO {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
            }
            i = j;
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(Self {
            dim,
            row_ptr,
            cols,
            vals,
        })
    }

    /// Build row by row from a generator emitting the entries of each row.
    /// Entries within a row may come in any order and may repeat.
    pub fn from_row_fn<F>(dim: usize, row_fn: F) -> Self
    where
        F: Fn(usize, &mut Vec<(usize, C64)>) + Sync,
    {
        let rows: Vec<Vec<(usize, C64)>> = (0..dim)
            .into_par_iter()
            .with_min_len(PAR_CHUNK)
            .map_init(Vec::new, |buf, r| {
                buf.clear();
                row_fn(r, buf);
                buf.sort_by_key(|&(c, _)| c);
                let mut out: Vec<(usize, C64)> = Vec::with_capacity(buf.len());
                for &(c, v) in buf.iter() {
                    match out.last_mut() {
                        Some(last) if last.0 == c => last.1 += v,
                        _ => out.push((c, v)),
                    }
                }
                out.retain(|&(_, v)| v != ZERO);
                out
            })
            .collect();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        row_ptr.push(0);
        let nnz: usize = rows.iter().map(Vec::len).sum();
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        for row in rows {
            for (c, v) in row {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Self {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    /// Entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[span.clone()].binary_search(&c) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => ZERO,
        }
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        self.entries().all(|(r, c, _)| r == c)
    }

    pub fn is_real(&self) -> bool {
        self.vals.iter().all(|v| v.im == 0.0)
    }

    pub fn adjoint(&self) -> Self {
        let t: Vec<_> = self.entries().map(|(r, c, v)| (c, r, v.conj())).collect();
        Self::from_triplets(self.dim, t).expect("transposed indices are in range")
    }

    /// Entrywise `A[c, r] == conj(A[r, c])`, exactly.
    pub fn is_hermitian(&self) -> bool {
        self.entries().all(|(r, c, v)| self.get(c, r) == v.conj())
    }

    pub fn scale(&self, alpha: C64) -> Self {
        let t: Vec<_> = self.entries().map(|(r, c, v)| (r, c, alpha * v)).collect();
        Self::from_triplets(self.dim, t).expect("indices are in range")
    }

    pub fn scale_real(&self, alpha: f64) -> Self {
        self.scale(C64::new(alpha, 0.0))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        let t = self.entries().chain(other.entries());
        Self::from_triplets(self.dim, t)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale_real(-1.0))
    }

    /// Linear combination `Σ c_k A_k` summed in the given order.
    pub fn linear_combination(dim: usize, terms: &[(C64, &SparseOperator)]) -> Result<Self> {
        let mut t = Vec::new();
        for (coef, op) in terms {
            if op.dim != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: op.dim,
                });
            }
            t.extend(op.entries().map(|(r, c, v)| (r, c, *coef * v)));
        }
        Self::from_triplets(dim, t)
    }

    /// Sparse product `self · other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        let n = self.dim;
        Ok(Self::from_row_fn(n, |r, out| {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    out.push((c, a * b));
                }
            }
        }))
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    /// Largest entry modulus (zero for the empty operator).
    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Kronecker product `self ⊗ other`, `self` on the slower index.
    pub fn kron(&self, other: &Self) -> Self {
        let nb = other.dim;
        let dim = self.dim * nb;
        Self::from_row_fn(dim, |r, out| {
            let (ra, rb) = (r / nb, r % nb);
            for (ca, a) in self.row(ra) {
                for (cb, b) in other.row(rb) {
                    out.push((ca * nb + cb, a * b));
                }
            }
        })
    }

    /// Principal submatrix on `indices` (in the given order).
    pub fn restrict(&self, indices: &[usize]) -> Self {
        let mut position = std::collections::HashMap::with_capacity(indices.len());
        for (k, &i) in indices.iter().enumerate() {
            position.insert(i, k);
        }
        Self::from_row_fn(indices.len(), |k, out| {
            for (c, v) in self.row(indices[k]) {
                if let Some(&kc) = position.get(&c) {
                    out.push((kc, v));
                }
            }
        })
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<C64> {
        let mut m = nalgebra::DMatrix::from_element(self.dim, self.dim, ZERO);
        for (r, c, v) in self.entries() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn to_dense_real(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.entries() {
            m[(r, c)] = v.re;
        }
        m
    }

    pub fn from_dense(m: &nalgebra::DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        let n = m.nrows();
        Ok(Self::from_row_fn(n, |r, out| {
            for c in 0..n {
                out.push((c, m[(r, c)]));
            }
        }))
    }

    /// `y = A x` into a caller-provided buffer.
    pub fn matvec_into(&self, x: &[C64], y: &mut [C64]) {
        y.par_chunks_mut(PAR_CHUNK)
            .enumerate()
            .for_each(|(chunk, ys)| {
                let base = chunk * PAR_CHUNK;
                for (k, yr) in ys.iter_mut().enumerate() {
                    let r = base + k;
                    let mut acc = ZERO;
                    for j in self.row_ptr[r]..self.row_ptr[r + 1] {
                        acc += self.vals[j] * x[self.cols[j]];
                    }
                    *yr = acc;
                }
            });
    }

    /// Real-arithmetic product using the real parts of the stored entries.
    pub fn matvec_real_into(&self, x: &[f64], y: &mut [f64]) {
        y.par_chunks_mut(PAR_CHUNK)
            .enumerate()
            .for_each(|(chunk, ys)| {
                let base = chunk * PAR_CHUNK;
                for (k, yr) in ys.iter_mut().enumerate() {
                    let r = base + k;
                    let mut acc = 0.0;
                    for j in self.row_ptr[r]..self.row_ptr[r + 1] {
                        acc += self.vals[j].re * x[self.cols[j]];
                    }
                    *yr = acc;
                }
            });
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        Ok(())
    }
}

impl LinearOperator for SparseOperator {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        self.matvec_into(x, y)
    }

    fn apply_real_into(&self, x: &[f64], y: &mut [f64]) {
        self.matvec_real_into(x, y)
    }

    fn diagonal(&self) -> Vec<C64> {
        SparseOperator::diagonal(self)
    }

    fn is_real(&self) -> bool {
        SparseOperator::is_real(self)
    }
}

/// Dense complex state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Self {
        Self { amplitudes }
    }

    pub fn from_real(amplitudes: &[f64]) -> Self {
        Self::new(amplitudes.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn basis_state(dim: usize, index: usize) -> Self {
        let mut a = vec![ZERO; dim];
        a[index] = ONE;
        Self::new(a)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            for a in &mut self.amplitudes {
                *a /= n;
            }
        }
        self
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= 1e-12
    }

    pub fn combine(alpha: C64, x: &Self, beta: C64, y: &Self) -> Self {
        Self::new(
            x.amplitudes
                .iter()
                .zip(&y.amplitudes)
                .map(|(a, b)| alpha * a + beta * b)
                .collect(),
        )
    }
}

/// Charge operator `n̂`.
pub fn number_op(basis: ChargeBasis) -> SparseOperator {
    let d: Vec<f64> = basis.charges().iter().map(|&n| n as f64).collect();
    SparseOperator::from_real_diagonal(&d)
}

/// `e^{+iθ̂}`: `|n⟩ → |n+1⟩`, with `|n_max⟩ → 0`.
pub fn raise_op(basis: ChargeBasis) -> SparseOperator {
    let d = basis.dim();
    SparseOperator::from_triplets(d, (0..d.saturating_sub(1)).map(|i| (i + 1, i, ONE)))
        .expect("shift indices are in range")
}

/// `e^{-iθ̂}`: `|n⟩ → |n-1⟩`, with `|-n_max⟩ → 0`.
pub fn lower_op(basis: ChargeBasis) -> SparseOperator {
    raise_op(basis).adjoint()
}

/// `cos θ̂ = (e^{iθ̂} + e^{-iθ̂}) / 2`.
pub fn cos_op(basis: ChargeBasis) -> SparseOperator {
    raise_op(basis)
        .add(&lower_op(basis))
        .expect("same dimension")
        .scale_real(0.5)
}

/// Embed a single-slot operator into the tensor product of `slots`,
/// acting as the identity elsewhere. Slot 0 is the slowest-varying index.
pub fn embed(op: &SparseOperator, slot: usize, slots: &[ChargeBasis]) -> Result<SparseOperator> {
    let dims: Vec<usize> = slots.iter().map(ChargeBasis::dim).collect();
    embed_dims(op, slot, &dims)
}

/// [`embed`] over plain slot dimensions.
pub fn embed_dims(op: &SparseOperator, slot: usize, dims: &[usize]) -> Result<SparseOperator> {
    if slot >= dims.len() {
        return Err(Error::SlotOutOfRange {
            slot,
            slots: dims.len(),
        });
    }
    if op.dim() != dims[slot] {
        return Err(Error::DimensionMismatch {
            expected: dims[slot],
            got: op.dim(),
        });
    }
    let before: usize = dims[..slot].iter().product();
    let after: usize = dims[slot + 1..].iter().product();
    Ok(SparseOperator::identity(before)
        .kron(op)
        .kron(&SparseOperator::identity(after)))
}

/// Exact sparse matrix-vector product.
pub fn apply(op: &SparseOperator, state: &StateVector) -> Result<StateVector> {
    if op.dim() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            got: state.dim(),
        });
    }
    let mut y = vec![ZERO; op.dim()];
    op.matvec_into(state.amplitudes(), &mut y);
    Ok(StateVector::new(y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn number_op_is_charge_diagonal() {
        let n = number_op(ChargeBasis::new(1));
        assert_eq!(n.diagonal(), vec![c(-1.0), c(0.0), c(1.0)]);
        assert!(n.is_diagonal());

        let n0 = number_op(ChargeBasis::new(0));
        assert_eq!(n0.dim(), 1);
        assert_eq!(n0.get(0, 0), ZERO);

        let n6 = number_op(ChargeBasis::new(6));
        assert_eq!(n6.dim(), 13);
        assert!(n6.is_hermitian());
    }

    #[test]
    fn raise_truncates_at_top_edge() {
        let b = ChargeBasis::new(1);
        let up = raise_op(b);
        let zero = StateVector::basis_state(3, b.index_of(0).unwrap());
        let one = apply(&up, &zero).unwrap();
        assert_eq!(one, StateVector::basis_state(3, b.index_of(1).unwrap()));
        let top = StateVector::basis_state(3, b.index_of(1).unwrap());
        assert!(apply(&up, &top).unwrap().norm() == 0.0);
        assert_eq!(up.adjoint(), lower_op(b));
    }

    #[test]
    fn lower_raise_leaves_top_projector_hole() {
        let b = ChargeBasis::new(1);
        let prod = lower_op(b).matmul(&raise_op(b)).unwrap().to_dense();
        // direct 3x3 product: identity minus |n_max><n_max|
        let mut expected = nalgebra::DMatrix::from_element(3, 3, ZERO);
        expected[(0, 0)] = ONE;
        expected[(1, 1)] = ONE;
        assert_eq!(prod, expected);
    }

    #[test]
    fn cos_op_structure() {
        let b = ChargeBasis::new(1);
        let cs = cos_op(b);
        assert_eq!(cs.get(0, 1), c(0.5));
        assert_eq!(cs.get(1, 2), c(0.5));
        assert_eq!(cs.get(0, 2), ZERO);
        assert_eq!(cs.get(1, 1), ZERO);
        assert!(cs.is_hermitian());
    }

    #[test]
    fn cos_op_top_eigenvalue_approaches_one() {
        let mut prev = 0.0;
        for n_max in [5u32, 20, 80] {
            let m = cos_op(ChargeBasis::new(n_max)).to_dense_real();
            let top = m
                .symmetric_eigenvalues()
                .iter()
                .cloned()
                .fold(f64::MIN, f64::max);
            assert!(top < 1.0);
            assert!(top > prev);
            prev = top;
        }
        assert!(1.0 - prev < 1e-3);
    }

    #[test]
    fn exact_truncated_commutator() {
        for n_max in 0..5 {
            let b = ChargeBasis::new(n_max);
            let comm = number_op(b).commutator(&raise_op(b)).unwrap();
            assert_eq!(comm, raise_op(b));
        }
    }

    #[test]
    fn embed_basics() {
        let b = ChargeBasis::new(1);
        let slots = [b, b];
        let n0 = embed(&number_op(b), 0, &slots).unwrap();
        assert_eq!(n0.dim(), 9);
        // |1,0>: slot 0 charge 1 (index 2), slot 1 charge 0 (index 1)
        let idx = 2 * 3 + 1;
        let s = StateVector::basis_state(9, idx);
        let out = apply(&n0, &s).unwrap();
        assert_eq!(out, s);
        assert!(matches!(
            embed(&number_op(b), 2, &slots),
            Err(Error::SlotOutOfRange { .. })
        ));
        assert!(matches!(
            embed(&number_op(ChargeBasis::new(2)), 0, &slots),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn disjoint_embeddings_commute_and_embed_is_multiplicative() {
        let b = ChargeBasis::new(2);
        let slots = [b, ChargeBasis::new(1), b];
        let a = raise_op(b).add(&number_op(b)).unwrap();
        let bb = cos_op(ChargeBasis::new(1));
        let ea = embed(&a, 0, &slots).unwrap();
        let eb = embed(&bb, 1, &slots).unwrap();
        assert_eq!(ea.matmul(&eb).unwrap(), eb.matmul(&ea).unwrap());

        let c2 = lower_op(b);
        let lhs = embed(&a.matmul(&c2).unwrap(), 2, &slots).unwrap();
        let rhs = embed(&a, 2, &slots)
            .unwrap()
            .matmul(&embed(&c2, 2, &slots).unwrap())
            .unwrap();
        assert_eq!(lhs, rhs);
    }

    fn random_operator(rng: &mut ChaCha8Rng, dim: usize, density: f64) -> SparseOperator {
        let mut t = Vec::new();
        for r in 0..dim {
            for cc in 0..dim {
                if rng.gen::<f64>() < density {
                    t.push((r, cc, C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
                }
            }
        }
        SparseOperator::from_triplets(dim, t).unwrap()
    }

    #[test]
    fn apply_matches_dense_matvec() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let op = random_operator(&mut rng, 100, 0.1);
        let x: Vec<C64> = (0..100)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let y = apply(&op, &StateVector::new(x.clone())).unwrap();
        let dense = op.to_dense() * nalgebra::DVector::from_vec(x);
        for (a, b) in y.amplitudes().iter().zip(dense.iter()) {
            assert!((a - b).norm() < 1e-13);
        }
        let bad = StateVector::basis_state(99, 0);
        assert!(apply(&op, &bad).is_err());
    }

    #[test]
    fn identity_apply_is_noop() {
        let s = StateVector::new(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]);
        assert_eq!(apply(&SparseOperator::identity(2), &s).unwrap(), s);
    }

    #[test]
    fn triplets_merge_and_drop_zeros() {
        let op = SparseOperator::from_triplets(
            2,
            vec![(0, 1, c(1.0)), (0, 1, c(-1.0)), (1, 0, c(2.0)), (1, 0, c(0.5))],
        )
        .unwrap();
        assert_eq!(op.nnz(), 1);
        assert_eq!(op.get(1, 0), c(2.5));
        assert!(SparseOperator::from_triplets(2, vec![(2, 0, ONE)]).is_err());
    }

    proptest! {
        #[test]
        fn apply_is_linear(seed in 0u64..1000, ar in -2.0f64..2.0, ai in -2.0f64..2.0,
                           br in -2.0f64..2.0, bi in -2.0f64..2.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let op = random_operator(&mut rng, 30, 0.2);
            let mk = |rng: &mut ChaCha8Rng| StateVector::new(
                (0..30).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect());
            let x = mk(&mut rng);
            let y = mk(&mut rng);
            let (alpha, beta) = (C64::new(ar, ai), C64::new(br, bi));
            let lhs = apply(&op, &StateVector::combine(alpha, &x, beta, &y)).unwrap();
            let rhs = StateVector::combine(alpha, &apply(&op, &x).unwrap(), beta, &apply(&op, &y).unwrap());
            for (a, b) in lhs.amplitudes().iter().zip(rhs.amplitudes()) {
                prop_assert!((a - b).norm() < 1e-13);
            }
        }

        #[test]
        fn shifts_and_cos_hermitian_structure(n_max in 0u32..8) {
            let b = ChargeBasis::new(n_max);
            prop_assert!(cos_op(b).is_hermitian());
            prop_assert!(number_op(b).is_hermitian());
            prop_assert_eq!(raise_op(b).adjoint(), lower_op(b));
            let charges = b.charges();
            prop_assert_eq!(charges.len(), b.dim());
            prop_assert!(charges.windows(2).all(|w| w[0] < w[1]));
            prop_assert_eq!(charges[0], -charges[charges.len() - 1]);
        }
    }
}
