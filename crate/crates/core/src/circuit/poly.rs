//! Multivariate integer polynomials, just enough for symbolic 3×3 cofactors.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Polynomial in a fixed number of variables `NV` with integer coefficients.
/// Monomials are keyed by exponent vectors; zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly<const NV: usize> {
    terms: BTreeMap<[u32; NV], i64>,
}

impl<const NV: usize> Poly<NV> {
    pub fn zero() -> Self {
        Self {
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: i64) -> Self {
        let mut p = Self::zero();
        p.add_term([0; NV], c);
        p
    }

    pub fn var(i: usize) -> Self {
        let mut e = [0; NV];
        e[i] = 1;
        let mut p = Self::zero();
        p.add_term(e, 1);
        p
    }

    /// Monomial `c · Π x_i^{e_i}`.
    pub fn monomial(c: i64, exps: [u32; NV]) -> Self {
        let mut p = Self::zero();
        p.add_term(exps, c);
        p
    }

    fn add_term(&mut self, e: [u32; NV], c: i64) {
        if c == 0 {
            return;
        }
        let slot = self.terms.entry(e).or_insert(0);
        *slot += c;
        if *slot == 0 {
            self.terms.remove(&e);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32; NV], &i64)> {
        self.terms.iter()
    }

    pub fn eval(&self, x: &[f64; NV]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                *c as f64
                    * e.iter()
                        .zip(x)
                        .map(|(k, v)| v.powi(*k as i32))
                        .product::<f64>()
            })
            .sum()
    }
}

impl<const NV: usize> Add for &Poly<NV> {
    type Output = Poly<NV>;
    fn add(self, rhs: &Poly<NV>) -> Poly<NV> {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, *c);
        }
        out
    }
}

impl<const NV: usize> Sub for &Poly<NV> {
    type Output = Poly<NV>;
    fn sub(self, rhs: &Poly<NV>) -> Poly<NV> {
        self + &(-rhs)
    }
}

impl<const NV: usize> Neg for &Poly<NV> {
    type Output = Poly<NV>;
    fn neg(self) -> Poly<NV> {
        Poly {
            terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect(),
        }
    }
}

impl<const NV: usize> Mul for &Poly<NV> {
    type Output = Poly<NV>;
    fn mul(self, rhs: &Poly<NV>) -> Poly<NV> {
        let mut out = Poly::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let mut e = [0; NV];
                for k in 0..NV {
                    e[k] = ea[k] + eb[k];
                }
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

impl<const NV: usize> fmt::Display for Poly<NV> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            let sign = if *c < 0 { "-" } else { "+" };
            if first {
                if *c < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let mag = c.abs();
            let vars: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, k)| **k > 0)
                .map(|(i, k)| if *k == 1 { format!("x{i}") } else { format!("x{i}^{k}") })
                .collect();
            if vars.is_empty() {
                write!(f, "{mag}")?;
            } else if mag == 1 {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{mag}*{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

pub type Mat3<const NV: usize> = [[Poly<NV>; 3]; 3];

fn minor<const NV: usize>(m: &Mat3<NV>, r: usize, c: usize) -> Poly<NV> {
    let rows: Vec<usize> = (0..3).filter(|&i| i != r).collect();
    let cols: Vec<usize> = (0..3).filter(|&j| j != c).collect();
    let a = &m[rows[0]][cols[0]] * &m[rows[1]][cols[1]];
    let b = &m[rows[0]][cols[1]] * &m[rows[1]][cols[0]];
    &a - &b
}

/// Adjugate (transposed cofactor matrix), so `m · adj(m) = det(m) · I`.
pub fn adjugate<const NV: usize>(m: &Mat3<NV>) -> Mat3<NV> {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let mnr = minor(m, j, i);
            if (i + j) % 2 == 0 {
                mnr
            } else {
                -&mnr
            }
        })
    })
}

pub fn determinant<const NV: usize>(m: &Mat3<NV>) -> Poly<NV> {
    (0..3).fold(Poly::zero(), |acc, j| {
        let t = &m[0][j] * &minor(m, 0, j);
        if j % 2 == 0 {
            &acc + &t
        } else {
            &acc - &t
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    type P = Poly<2>;

    #[test]
    fn arithmetic_cancels() {
        let x = P::var(0);
        let y = P::var(1);
        let s = &x + &y;
        let d = &x - &y;
        let prod = &s * &d;
        let want = &(&x * &x) - &(&y * &y);
        assert_eq!(prod, want);
        assert!((&prod - &want).is_zero());
        assert_eq!(prod.eval(&[3.0, 2.0]), 5.0);
    }

    #[test]
    fn adjugate_identity() {
        let x = P::var(0);
        let y = P::var(1);
        let one = P::constant(1);
        let z = P::zero();
        let m: Mat3<2> = [
            [x.clone(), y.clone(), z.clone()],
            [z.clone(), one.clone(), x.clone()],
            [y.clone(), z.clone(), one.clone()],
        ];
        let adj = adjugate(&m);
        let det = determinant(&m);
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = P::zero();
                for k in 0..3 {
                    acc = &acc + &(&m[i][k] * &adj[k][j]);
                }
                let want = if i == j { det.clone() } else { P::zero() };
                assert_eq!(acc, want);
            }
        }
    }

    #[test]
    fn display_is_readable() {
        let p = &(&P::monomial(2, [2, 0]) - &P::var(1)) + &P::constant(3);
        assert_eq!(p.to_string(), "2*x0^2 - x1 + 3");
    }
}
