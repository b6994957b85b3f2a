//! Matrix-free linear operators.
//!
//! Solvers and propagators only need `y = A x` and the diagonal of `A`, so
//! they work against [`LinearOperator`]. Besides the sparse charge-basis
//! matrices there is [`TensorOperator`], a sum of Kronecker products of small
//! dense per-slot matrices. The Mathieu-basis plaquette needs it because the
//! four-link shift product is dense there.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rotor::SparseOperator;

/// Field scalars the iterative kernels run over (`f64` or `Complex64`).
pub trait Scalar:
    Copy
    + Send
    + Sync
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + nalgebra::ComplexField<RealField = f64>
    + 'static
{
    fn zero_value() -> Self;
    fn from_re(x: f64) -> Self;
    fn from_c64(z: C64) -> Self;
    fn to_c64(self) -> C64;
    fn conj_value(self) -> Self;
    fn re_value(self) -> f64;
    fn abs2(self) -> f64;
    fn scaled(self, s: f64) -> Self;
    fn apply_op(op: &dyn LinearOperator, x: &[Self], y: &mut [Self]);
}

impl Scalar for f64 {
    fn zero_value() -> Self {
        0.0
    }
    fn from_re(x: f64) -> Self {
        x
    }
    fn from_c64(z: C64) -> Self {
        z.re
    }
    fn to_c64(self) -> C64 {
        C64::new(self, 0.0)
    }
    fn conj_value(self) -> Self {
        self
    }
    fn re_value(self) -> f64 {
        self
    }
    fn abs2(self) -> f64 {
        self * self
    }
    fn scaled(self, s: f64) -> Self {
        self * s
    }
    fn apply_op(op: &dyn LinearOperator, x: &[Self], y: &mut [Self]) {
        op.apply_real_into(x, y)
    }
}

impl Scalar for C64 {
    fn zero_value() -> Self {
        C64::new(0.0, 0.0)
    }
    fn from_re(x: f64) -> Self {
        C64::new(x, 0.0)
    }
    fn from_c64(z: C64) -> Self {
        z
    }
    fn to_c64(self) -> C64 {
        self
    }
    fn conj_value(self) -> Self {
        self.conj()
    }
    fn re_value(self) -> f64 {
        self.re
    }
    fn abs2(self) -> f64 {
        self.norm_sqr()
    }
    fn scaled(self, s: f64) -> Self {
        self * s
    }
    fn apply_op(op: &dyn LinearOperator, x: &[Self], y: &mut [Self]) {
        op.apply_into(x, y)
    }
}

/// `⟨x|y⟩ = Σ conj(x_i) y_i`, summed sequentially.
pub fn dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    let mut acc = T::zero_value();
    for (a, b) in x.iter().zip(y) {
        acc += a.conj_value() * *b;
    }
    acc
}

pub fn norm<T: Scalar>(x: &[T]) -> f64 {
    x.iter().map(|a| a.abs2()).sum::<f64>().sqrt()
}

/// `y += alpha x`.
pub fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * *xi;
    }
}

/// Hermitian operator acting on dense vectors.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    fn apply_into(&self, x: &[C64], y: &mut [C64]);

    /// Real-arithmetic product. Only meaningful when [`Self::is_real`] holds.
    fn apply_real_into(&self, x: &[f64], y: &mut [f64]);

    fn diagonal(&self) -> Vec<C64>;

    fn is_real(&self) -> bool;

    fn apply_vec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.dim()];
        self.apply_into(x, &mut y);
        y
    }
}

/// Dispatch helper so generic kernels can call the right product.
pub fn apply_scalar<T: Scalar>(op: &dyn LinearOperator, x: &[T], y: &mut [T]) {
    T::apply_op(op, x, y)
}

/// One Kronecker term: `coef · ⊗_s A_s`, identity on slots not listed.
#[derive(Debug, Clone)]
pub struct TensorTerm {
    pub coef: C64,
    pub factors: Vec<(usize, DMatrix<C64>)>,
}

/// Sum of Kronecker-product terms over a tensor product of slots.
/// Slot 0 is the slowest-varying index.
#[derive(Debug, Clone)]
pub struct TensorOperator {
    dims: Vec<usize>,
    terms: Vec<TensorTerm>,
    diag: Option<Vec<f64>>,
}

impl TensorOperator {
    pub fn new(dims: Vec<usize>) -> Self {
        Self {
            dims,
            terms: Vec::new(),
            diag: None,
        }
    }

    /// Add an explicit real diagonal over the full product space.
    pub fn add_diagonal(&mut self, d: &[f64]) -> Result<()> {
        let n: usize = self.dims.iter().product();
        if d.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: d.len(),
            });
        }
        match &mut self.diag {
            Some(existing) => existing.iter_mut().zip(d).for_each(|(a, b)| *a += b),
            None => self.diag = Some(d.to_vec()),
        }
        Ok(())
    }

    pub fn slot_dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn terms(&self) -> &[TensorTerm] {
        &self.terms
    }

    pub fn push_term(&mut self, coef: C64, factors: Vec<(usize, DMatrix<C64>)>) -> Result<()> {
        for (slot, m) in &factors {
            let d = *self.dims.get(*slot).ok_or(Error::SlotOutOfRange {
                slot: *slot,
                slots: self.dims.len(),
            })?;
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: m.nrows(),
                });
            }
        }
        self.terms.push(TensorTerm { coef, factors });
        Ok(())
    }

    fn mode_product<T: Scalar>(&self, slot: usize, a: &DMatrix<C64>, x: &[T], out: &mut [T]) {
        let d = self.dims[slot];
        let right: usize = self.dims[slot + 1..].iter().product();
        let a: Vec<T> = (0..d * d)
            .map(|k| T::from_c64(a[(k / d, k % d)]))
            .collect();
        out.par_chunks_mut(right)
            .with_min_len((4096 / right).max(1))
            .enumerate()
            .for_each(|(li, chunk)| {
                let (l, i) = (li / d, li % d);
                for v in chunk.iter_mut() {
                    *v = T::zero_value();
                }
                for j in 0..d {
                    let aij = a[i * d + j];
                    if aij == T::zero_value() {
                        continue;
                    }
                    let src = &x[(l * d + j) * right..(l * d + j + 1) * right];
                    for (o, s) in chunk.iter_mut().zip(src) {
                        *o += aij * *s;
                    }
                }
            });
    }

    fn apply_generic<T: Scalar>(&self, x: &[T], y: &mut [T]) {
        let n = x.len();
        match &self.diag {
            Some(d) => y
                .par_iter_mut()
                .zip(x.par_iter())
                .zip(d.par_iter())
                .for_each(|((yi, xi), di)| *yi = xi.scaled(*di)),
            None => y.iter_mut().for_each(|v| *v = T::zero_value()),
        }
        let mut cur = vec![T::zero_value(); n];
        let mut tmp = vec![T::zero_value(); n];
        for term in &self.terms {
            cur.copy_from_slice(x);
            for (slot, m) in &term.factors {
                self.mode_product(*slot, m, &cur, &mut tmp);
                std::mem::swap(&mut cur, &mut tmp);
            }
            axpy(T::from_c64(term.coef), &cur, y);
        }
    }

    /// Explicit sparse form; refuses dimensions above `limit`.
    pub fn to_sparse(&self, limit: usize) -> Result<SparseOperator> {
        let n = LinearOperator::dim(self);
        if n > limit {
            return Err(Error::DimensionOverflow {
                states: n as u128,
                limit: limit as u128,
            });
        }
        let mut cols = Vec::with_capacity(n);
        let mut e = vec![C64::new(0.0, 0.0); n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
            e[j] = C64::new(1.0, 0.0);
            cols.push(self.apply_vec(&e));
        }
        Ok(SparseOperator::from_row_fn(n, |r, out| {
            for (j, col) in cols.iter().enumerate() {
                out.push((j, col[r]));
            }
        }))
    }
}

impl LinearOperator for TensorOperator {
    fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        self.apply_generic(x, y)
    }

    fn apply_real_into(&self, x: &[f64], y: &mut [f64]) {
        self.apply_generic(x, y)
    }

    fn diagonal(&self) -> Vec<C64> {
        let n = LinearOperator::dim(self);
        let mut diag = match &self.diag {
            Some(d) => d.iter().map(|x| C64::new(*x, 0.0)).collect(),
            None => vec![C64::new(0.0, 0.0); n],
        };
        let strides: Vec<usize> = (0..self.dims.len())
            .map(|s| self.dims[s + 1..].iter().product())
            .collect();
        for term in &self.terms {
            for (idx, d) in diag.iter_mut().enumerate() {
                let mut v = term.coef;
                for (slot, m) in &term.factors {
                    let k = (idx / strides[*slot]) % self.dims[*slot];
                    v *= m[(k, k)];
                }
                *d += v;
            }
        }
        diag
    }

    fn is_real(&self) -> bool {
        self.terms.iter().all(|t| {
            t.coef.im == 0.0 && t.factors.iter().all(|(_, m)| m.iter().all(|z| z.im == 0.0))
        })
    }
}

/// Either storage form, so representations can hold a mix of both.
#[derive(Debug, Clone)]
pub enum Operator {
    Sparse(SparseOperator),
    Tensor(TensorOperator),
}

impl Operator {
    pub fn as_sparse(&self) -> Option<&SparseOperator> {
        match self {
            Operator::Sparse(s) => Some(s),
            Operator::Tensor(_) => None,
        }
    }

    /// Sparse form, materializing tensor operators up to `limit` states.
    pub fn to_sparse(&self, limit: usize) -> Result<SparseOperator> {
        match self {
            Operator::Sparse(s) => Ok(s.clone()),
            Operator::Tensor(t) => t.to_sparse(limit),
        }
    }
}

impl From<SparseOperator> for Operator {
    fn from(s: SparseOperator) -> Self {
        Operator::Sparse(s)
    }
}

impl From<TensorOperator> for Operator {
    fn from(t: TensorOperator) -> Self {
        Operator::Tensor(t)
    }
}

impl LinearOperator for Operator {
    fn dim(&self) -> usize {
        match self {
            Operator::Sparse(s) => LinearOperator::dim(s),
            Operator::Tensor(t) => LinearOperator::dim(t),
        }
    }

    fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        match self {
            Operator::Sparse(s) => s.apply_into(x, y),
            Operator::Tensor(t) => t.apply_into(x, y),
        }
    }

    fn apply_real_into(&self, x: &[f64], y: &mut [f64]) {
        match self {
            Operator::Sparse(s) => s.apply_real_into(x, y),
            Operator::Tensor(t) => t.apply_real_into(x, y),
        }
    }

    fn diagonal(&self) -> Vec<C64> {
        match self {
            Operator::Sparse(s) => LinearOperator::diagonal(s),
            Operator::Tensor(t) => LinearOperator::diagonal(t),
        }
    }

    fn is_real(&self) -> bool {
        match self {
            Operator::Sparse(s) => LinearOperator::is_real(s),
            Operator::Tensor(t) => t.is_real(),
        }
    }
}

/// Real part of `⟨ψ|O|ψ⟩` with the imaginary residue returned alongside.
pub fn expectation_parts(op: &dyn LinearOperator, psi: &[C64]) -> (f64, f64) {
    let y = op.apply_vec(psi);
    let z = dot(psi, &y);
    (z.re, z.im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rotor::{cos_op, embed_dims, number_op, raise_op, ChargeBasis};

    #[test]
    fn tensor_operator_matches_sparse_kron() {
        let b = ChargeBasis::new(1);
        let dims = vec![3, 3, 3];
        let mut t = TensorOperator::new(dims.clone());
        let n = number_op(b).to_dense();
        let up = raise_op(b).to_dense();
        t.push_term(C64::new(0.5, 0.0), vec![(0, n.clone()), (2, up.clone())])
            .unwrap();
        t.push_term(C64::new(-1.0, 0.0), vec![(1, cos_op(b).to_dense())])
            .unwrap();
        let s = embed_dims(&number_op(b), 0, &dims)
            .unwrap()
            .matmul(&embed_dims(&raise_op(b), 2, &dims).unwrap())
            .unwrap()
            .scale_real(0.5)
            .add(&embed_dims(&cos_op(b), 1, &dims).unwrap().scale_real(-1.0))
            .unwrap();
        assert_eq!(t.to_sparse(100).unwrap().to_dense(), s.to_dense());
        assert_eq!(LinearOperator::diagonal(&t), s.diagonal());
        assert!(t.is_real());
        let mut with_diag = t.clone();
        with_diag.add_diagonal(&vec![0.25; 27]).unwrap();
        let dense = with_diag.to_sparse(100).unwrap().to_dense();
        let want = s.to_dense() + nalgebra::DMatrix::<C64>::identity(27, 27) * C64::new(0.25, 0.0);
        assert_eq!(dense, want);

        let x: Vec<f64> = (0..27).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut yr = vec![0.0; 27];
        t.apply_real_into(&x, &mut yr);
        let mut ys = vec![0.0; 27];
        s.matvec_real_into(&x, &mut ys);
        for (a, b) in yr.iter().zip(&ys) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn push_term_validates_shapes() {
        let mut t = TensorOperator::new(vec![2, 3]);
        assert!(t
            .push_term(C64::new(1.0, 0.0), vec![(1, DMatrix::identity(2, 2))])
            .is_err());
        assert!(t
            .push_term(C64::new(1.0, 0.0), vec![(2, DMatrix::identity(2, 2))])
            .is_err());
    }
}
