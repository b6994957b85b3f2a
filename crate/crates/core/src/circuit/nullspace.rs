//! Conserved charges from the potential's coupling vectors, in exact integer
//! arithmetic, and the gauge-fixing map they induce.

use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Node-flux names in the plaquette ordering.
pub const PLAQUETTE_NODES: [&str; 8] = [
    "phi1", "phi2", "phi3", "phi4", "theta12", "theta24", "theta13", "theta34",
];

/// Coupling vectors `v_α` of the cosine arguments, one row per term.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PotentialTopology {
    pub n_nodes: usize,
    pub rows: Vec<Vec<i64>>,
}

impl PotentialTopology {
    pub fn new(n_nodes: usize, rows: Vec<Vec<i64>>) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| r.len() != n_nodes) {
            return Err(Error::DimensionMismatch {
                expected: n_nodes,
                got: r.len(),
            });
        }
        Ok(Self { n_nodes, rows })
    }

    /// The four link cosines `φ_i + θ_ij − φ_j` over links (12, 24, 13, 34).
    pub fn plaquette() -> Self {
        Self {
            n_nodes: 8,
            rows: vec![
                vec![1, -1, 0, 0, 1, 0, 0, 0],
                vec![0, 1, 0, -1, 0, 1, 0, 0],
                vec![1, 0, -1, 0, 0, 0, 1, 0],
                vec![0, 0, 1, -1, 0, 0, 0, 1],
            ],
        }
    }

    pub fn rank(&self) -> usize {
        rank(&self.rows, self.n_nodes)
    }
}

/// Integer basis of `{u : u · v_α = 0 ∀α}` in Hermite normal form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NullspaceBasis {
    pub n_nodes: usize,
    pub rows: Vec<Vec<i64>>,
}

impl NullspaceBasis {
    pub fn nullity(&self) -> usize {
        self.rows.len()
    }

    pub fn rank(&self) -> usize {
        rank(&self.rows, self.n_nodes)
    }

    /// `u · v` for every (u, v) pair; all zero for a valid basis.
    pub fn pairings(&self, topology: &PotentialTopology) -> Vec<Vec<i64>> {
        self.rows
            .iter()
            .map(|u| {
                topology
                    .rows
                    .iter()
                    .map(|v| u.iter().zip(v).map(|(a, b)| a * b).sum())
                    .collect()
            })
            .collect()
    }
}

/// Rank over the rationals by fraction-exact elimination.
pub fn rank(rows: &[Vec<i64>], n_cols: usize) -> usize {
    let mut a: Vec<Vec<Ratio<i128>>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| Ratio::from_integer(x as i128)).collect())
        .collect();
    let mut rank = 0;
    for c in 0..n_cols {
        let Some(p) = (rank..a.len()).find(|&r| !a[r][c].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        let piv = a[rank][c];
        for r in 0..a.len() {
            if r != rank && !a[r][c].is_zero() {
                let f = a[r][c] / piv;
                for k in 0..n_cols {
                    let t = a[rank][k] * f;
                    a[r][k] -= t;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = ext_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

/// Row Hermite normal form: positive pivots, entries above each pivot reduced
/// into `[0, pivot)`, zero rows dropped. Unique for a given row lattice.
pub fn hermite_normal_form(rows: &[Vec<i64>], n_cols: usize) -> Vec<Vec<i64>> {
    let mut a: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    let mut pr = 0;
    for c in 0..n_cols {
        if pr == a.len() {
            break;
        }
        for r in pr + 1..a.len() {
            if a[r][c] == 0 {
                continue;
            }
            let (x, y) = (a[pr][c], a[r][c]);
            let (g, s, t) = ext_gcd(x, y);
            let (u, v) = (x / g, y / g);
            for k in 0..n_cols {
                let (p, q) = (a[pr][k], a[r][k]);
                a[pr][k] = s * p + t * q;
                a[r][k] = -v * p + u * q;
            }
        }
        if a[pr][c] == 0 {
            continue;
        }
        if a[pr][c] < 0 {
            a[pr].iter_mut().for_each(|x| *x = -*x);
        }
        let piv = a[pr][c];
        for r in 0..pr {
            let f = a[r][c].div_euclid(piv);
            if f != 0 {
                for k in 0..n_cols {
                    a[r][k] -= f * a[pr][k];
                }
            }
        }
        pr += 1;
    }
    a.truncate(pr);
    a.into_iter()
        .map(|r| r.into_iter().map(|x| x as i64).collect())
        .collect()
}

/// Integer kernel lattice of the topology, canonicalized to Hermite normal form.
///
/// Column operations with extended gcds bring `V` to echelon form `V·U = [H | 0]`
/// with `U` unimodular; the trailing columns of `U` then span every integer
/// solution, not just a finite-index sublattice.
pub fn conserved_charges(topology: &PotentialTopology) -> NullspaceBasis {
    let n = topology.n_nodes;
    let mut a: Vec<Vec<i128>> = topology
        .rows
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    let mut u: Vec<Vec<i128>> = (0..n)
        .map(|i| (0..n).map(|j| i128::from(i == j)).collect())
        .collect();
    let col_op = |m: &mut Vec<Vec<i128>>, c1: usize, c2: usize, s: i128, t: i128, p: i128, q: i128| {
        for row in m.iter_mut() {
            let (x, y) = (row[c1], row[c2]);
            row[c1] = s * x + t * y;
            row[c2] = p * x + q * y;
        }
    };
    let mut col = 0;
    for r in 0..a.len() {
        if col == n {
            break;
        }
        for j in col + 1..n {
            if a[r][j] == 0 {
                continue;
            }
            let (x, y) = (a[r][col], a[r][j]);
            let (g, s, t) = ext_gcd(x, y);
            let (p, q) = (-y / g, x / g);
            col_op(&mut a, col, j, s, t, p, q);
            col_op(&mut u, col, j, s, t, p, q);
        }
        if a[r][col] != 0 {
            col += 1;
        }
    }
    let kernel: Vec<Vec<i64>> = (col..n)
        .map(|c| (0..n).map(|i| u[i][c] as i64).collect())
        .collect();
    NullspaceBasis {
        n_nodes: n,
        rows: hermite_normal_form(&kernel, n),
    }
}

/// Affine map from independent (gauge) charges to dependent (matter) charges,
/// obtained by solving `G_i = q_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaugeFixMap {
    /// `dependent[k] = Σ_j coeffs[k][j] · independent[j] + offsets[k]`.
    pub coeffs: Vec<Vec<i64>>,
    pub offsets: Vec<i64>,
}

impl GaugeFixMap {
    pub fn apply(&self, independent: &[i64]) -> Vec<i64> {
        self.coeffs
            .iter()
            .zip(&self.offsets)
            .map(|(row, off)| row.iter().zip(independent).map(|(a, b)| a * b).sum::<i64>() + off)
            .collect()
    }

    pub fn n_dependent(&self) -> usize {
        self.coeffs.len()
    }
}

/// Solve the Gauss constraints `u · n = q` for the first `nullity` node charges
/// (the matter charges in the plaquette ordering) in terms of the rest.
pub fn gauge_fix_map(nullspace: &NullspaceBasis, static_charges: &[i64]) -> Result<GaugeFixMap> {
    let k = nullspace.nullity();
    let n = nullspace.n_nodes;
    if static_charges.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: static_charges.len(),
        });
    }
    type Q = Ratio<i128>;
    // augmented system [u_M | u_G | q], eliminated to [I | X | y] over Q
    let mut a: Vec<Vec<Q>> = nullspace
        .rows
        .iter()
        .zip(static_charges)
        .map(|(r, &q)| {
            r.iter()
                .map(|&x| Q::from_integer(x as i128))
                .chain(std::iter::once(Q::from_integer(q as i128)))
                .collect()
        })
        .collect();
    for c in 0..k {
        let p = (c..k)
            .find(|&r| !a[r][c].is_zero())
            .ok_or_else(|| Error::Singular(format!("matter charge {c} is not fixed by the constraints")))?;
        a.swap(c, p);
        let piv = a[c][c];
        a[c].iter_mut().for_each(|x| *x /= piv);
        for r in 0..k {
            if r != c && !a[r][c].is_zero() {
                let f = a[r][c];
                for j in 0..=n {
                    let t = a[c][j] * f;
                    a[r][j] -= t;
                }
            }
        }
    }
    let to_int = |x: Q| -> Result<i64> {
        if x.is_integer() {
            Ok(x.to_integer() as i64)
        } else {
            Err(Error::Unsupported(format!("non-integral gauge-fixing coefficient {x}")))
        }
    };
    let mut coeffs = Vec::with_capacity(k);
    let mut offsets = Vec::with_capacity(k);
    for row in &a {
        coeffs.push(
            row[k..n]
                .iter()
                .map(|x| to_int(-*x))
                .collect::<Result<Vec<_>>>()?,
        );
        offsets.push(to_int(row[n])?);
    }
    Ok(GaugeFixMap { coeffs, offsets })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn plaquette_charges_reproduce_gauss_generators() {
        let t = PotentialTopology::plaquette();
        assert_eq!(t.rank(), 4);
        let u = conserved_charges(&t);
        assert_eq!(u.nullity(), 4);
        assert_eq!(u.rank() + t.rank(), 8);
        assert_eq!(
            u.rows,
            vec![
                vec![1, 0, 0, 0, -1, 0, -1, 0],
                vec![0, 1, 0, 0, 1, -1, 0, 0],
                vec![0, 0, 1, 0, 0, 0, 1, -1],
                vec![0, 0, 0, 1, 0, 1, 0, 1],
            ]
        );
        assert!(u.pairings(&t).iter().flatten().all(|x| *x == 0));
    }

    #[test]
    fn empty_topology_keeps_everything_conserved() {
        let t = PotentialTopology::new(3, vec![]).unwrap();
        let u = conserved_charges(&t);
        assert_eq!(u.rows, vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
    }

    #[test]
    fn dependent_rows_are_handled() {
        let mut t = PotentialTopology::plaquette();
        let extra: Vec<i64> = t.rows[0].iter().zip(&t.rows[1]).map(|(a, b)| a + b).collect();
        t.rows.push(extra);
        assert_eq!(t.rank(), 4);
        assert_eq!(conserved_charges(&t), conserved_charges(&PotentialTopology::plaquette()));
    }

    #[test]
    fn kernel_is_saturated() {
        // 2x + 4y = 0 has primitive solution (2, −1), not (4, −2)
        let t = PotentialTopology::new(2, vec![vec![2, 4]]).unwrap();
        assert_eq!(conserved_charges(&t).rows, vec![vec![2, -1]]);
    }

    #[test]
    fn gauge_fixing_in_the_neutral_sector() {
        let u = conserved_charges(&PotentialTopology::plaquette());
        let map = gauge_fix_map(&u, &[0, 0, 0, 0]).unwrap();
        assert_eq!(
            map.coeffs,
            vec![vec![1, 0, 1, 0], vec![-1, 1, 0, 0], vec![0, 0, -1, 1], vec![0, -1, 0, -1]]
        );
        assert_eq!(map.apply(&[0, 0, 0, 0]), vec![0, 0, 0, 0]);
        assert_eq!(map.apply(&[1, 1, 0, 0]), vec![1, 0, 0, -1]);
    }

    #[test]
    fn static_charges_shift_the_matter() {
        let u = conserved_charges(&PotentialTopology::plaquette());
        let map = gauge_fix_map(&u, &[-1, 0, 0, 1]).unwrap();
        assert_eq!(map.apply(&[1, 1, 0, 0]), vec![0, 0, 0, 0]);
        assert_eq!(map.apply(&[0, 0, 1, 1]), vec![0, 0, 0, 0]);
        assert!(gauge_fix_map(&u, &[0, 0]).is_err());
    }

    #[test]
    fn hnf_is_canonical() {
        let rows = vec![vec![2, 3, 1], vec![4, 1, 0]];
        let h = hermite_normal_form(&rows, 3);
        let shuffled = hermite_normal_form(&[vec![6, 4, 1], vec![-2, -3, -1]], 3);
        assert_eq!(h, shuffled);
        assert!(h[0][0] > 0);
    }

    proptest! {
        #[test]
        fn neutral_sector_is_globally_neutral(links in proptest::collection::vec(-5i64..=5, 4)) {
            let u = conserved_charges(&PotentialTopology::plaquette());
            let map = gauge_fix_map(&u, &[0; 4]).unwrap();
            prop_assert_eq!(map.apply(&links).iter().sum::<i64>(), 0);
        }

        #[test]
        fn random_topologies_rank_nullity(rows in proptest::collection::vec(proptest::collection::vec(-1i64..=1, 6), 0..5)) {
            let t = PotentialTopology::new(6, rows).unwrap();
            let u = conserved_charges(&t);
            prop_assert_eq!(u.rank() + t.rank(), 6);
            prop_assert_eq!(u.nullity(), u.rank());
            prop_assert!(u.pairings(&t).iter().flatten().all(|x| *x == 0));
        }
    }
}
