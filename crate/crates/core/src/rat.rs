//! Exact rational scalars and small dense rational matrices.
//!
//! Lattice bases, dual bases, change-of-basis matrices, and coset arithmetic
//! must be exact: a dual basis is an inverse transpose, sublattice tests ask
//! for integrality, and the index of a sublattice is a determinant ratio.
//! Floating point would silently turn "is this entry an integer?" into a
//! tolerance judgement, so every lattice-level computation runs on
//! `Ratio<i64>` and only the final sampling positions are lowered to `f64`.

use num::rational::Ratio;
use num::{One, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar used throughout the lattice layer.
pub type Rat = Ratio<i64>;

/// Parse a rational literal: `"3"`, `"-5"`, `"1/2"`, `"-7/4"`.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = |why: &str| Error::Parse(format!("invalid rational {s:?}: {why}"));
    if let Some((num, den)) = s.split_once('/') {
        let n: i64 = num.trim().parse().map_err(|_| bad("numerator"))?;
        let d: i64 = den.trim().parse().map_err(|_| bad("denominator"))?;
        if d == 0 {
            return Err(bad("zero denominator"));
        }
        Ok(Rat::new(n, d))
    } else {
        let n: i64 = s.parse().map_err(|_| bad("integer"))?;
        Ok(Rat::from_integer(n))
    }
}

/// Render a rational in the same literal syntax `parse_rat` accepts.
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Dense column-major square rational matrix (dimensions stay tiny: the
/// ambient dimension of a lattice, at most a handful).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatMat {
    pub dim: usize,
    /// `data[c][r]` is the entry in column `c`, row `r`.
    pub data: Vec<Vec<Rat>>,
}

impl RatMat {
    pub fn from_columns(cols: Vec<Vec<Rat>>) -> Result<Self> {
        let dim = cols.len();
        for c in &cols {
            if c.len() != dim {
                return Err(Error::NotLattice(format!(
                    "basis matrix is not square: {} columns, column of length {}",
                    dim,
                    c.len()
                )));
            }
        }
        Ok(RatMat { dim, data: cols })
    }

    pub fn identity(dim: usize) -> Self {
        let data = (0..dim)
            .map(|c| {
                (0..dim)
                    .map(|r| if r == c { Rat::one() } else { Rat::zero() })
                    .collect()
            })
            .collect();
        RatMat { dim, data }
    }

    pub fn get(&self, r: usize, c: usize) -> Rat {
        self.data[c][r]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rat) {
        self.data[c][r] = v;
    }

    pub fn column(&self, c: usize) -> &[Rat] {
        &self.data[c]
    }

    pub fn transpose(&self) -> RatMat {
        let dim = self.dim;
        let data = (0..dim)
            .map(|c| (0..dim).map(|r| self.get(c, r)).collect())
            .collect();
        RatMat { dim, data }
    }

    pub fn mul(&self, other: &RatMat) -> RatMat {
        let dim = self.dim;
        let data = (0..dim)
            .map(|c| {
                (0..dim)
                    .map(|r| (0..dim).map(|k| self.get(r, k) * other.get(k, c)).sum())
                    .collect()
            })
            .collect();
        RatMat { dim, data }
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Vec<Rat> {
        (0..self.dim)
            .map(|r| (0..self.dim).map(|k| self.get(r, k) * v[k]).sum())
            .collect()
    }

    /// Determinant by fraction-free Gaussian elimination with partial
    /// pivoting on exact rationals.
    pub fn det(&self) -> Rat {
        let mut m = self.clone();
        let dim = m.dim;
        let mut det = Rat::one();
        for col in 0..dim {
            let pivot_row = (col..dim).find(|&r| !m.get(r, col).is_zero());
            let Some(pivot_row) = pivot_row else {
                return Rat::zero();
            };
            if pivot_row != col {
                for c in 0..dim {
                    let a = m.get(col, c);
                    let b = m.get(pivot_row, c);
                    m.set(col, c, b);
                    m.set(pivot_row, c, a);
                }
                det = -det;
            }
            let pivot = m.get(col, col);
            det *= pivot;
            for r in (col + 1)..dim {
                let factor = m.get(r, col) / pivot;
                if factor.is_zero() {
                    continue;
                }
                for c in col..dim {
                    let v = m.get(r, c) - factor * m.get(col, c);
                    m.set(r, c, v);
                }
            }
        }
        det
    }

    /// Exact inverse by Gauss–Jordan elimination. Errors if singular.
    pub fn inverse(&self) -> Result<RatMat> {
        let dim = self.dim;
        let mut m = self.clone();
        let mut inv = RatMat::identity(dim);
        for col in 0..dim {
            let pivot_row = (col..dim).find(|&r| !m.get(r, col).is_zero());
            let Some(pivot_row) = pivot_row else {
                return Err(Error::NotLattice("singular basis matrix".into()));
            };
            if pivot_row != col {
                for c in 0..dim {
                    let (a, b) = (m.get(col, c), m.get(pivot_row, c));
                    m.set(col, c, b);
                    m.set(pivot_row, c, a);
                    let (a, b) = (inv.get(col, c), inv.get(pivot_row, c));
                    inv.set(col, c, b);
                    inv.set(pivot_row, c, a);
                }
            }
            let pivot = m.get(col, col);
            for c in 0..dim {
                m.set(col, c, m.get(col, c) / pivot);
                inv.set(col, c, inv.get(col, c) / pivot);
            }
            for r in 0..dim {
                if r == col {
                    continue;
                }
                let factor = m.get(r, col);
                if factor.is_zero() {
                    continue;
                }
                for c in 0..dim {
                    let v = m.get(r, c) - factor * m.get(col, c);
                    m.set(r, c, v);
                    let v = inv.get(r, c) - factor * inv.get(col, c);
                    inv.set(r, c, v);
                }
            }
        }
        Ok(inv)
    }

    pub fn is_integer(&self) -> bool {
        self.data
            .iter()
            .flatten()
            .all(|v| v.denom().is_one() || v.is_zero())
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.dim).all(|r| (0..self.dim).all(|c| r == c || self.get(r, c).is_zero()))
    }

    pub fn to_f64_columns(&self) -> Vec<Vec<f64>> {
        self.data
            .iter()
            .map(|col| col.iter().map(rat_to_f64).collect())
            .collect()
    }
}

/// Smith normal form of a square integer matrix.
///
/// Returns `(u, d, v)` with `u * m * v = d`, `u` and `v` unimodular and `d`
/// diagonal with nonnegative entries `d[0] | d[1] | ...`. Arithmetic runs in
/// `i128`; inputs are the small change-of-basis matrices of nested lattices.
pub fn smith_normal_form(m: &[Vec<i128>]) -> (Vec<Vec<i128>>, Vec<Vec<i128>>, Vec<Vec<i128>>) {
    let n = m.len();
    let mut a: Vec<Vec<i128>> = m.to_vec();
    let mut u = ident_i128(n);
    let mut v = ident_i128(n);

    for t in 0..n {
        loop {
            // Locate the smallest-magnitude nonzero entry in the trailing block.
            let mut best: Option<(usize, usize)> = None;
            for r in t..n {
                for c in t..n {
                    if a[r][c] != 0
                        && best.is_none_or(|(br, bc)| a[r][c].abs() < a[br][bc].abs())
                    {
                        best = Some((r, c));
                    }
                }
            }
            let Some((pr, pc)) = best else {
                break; // trailing block all zero
            };
            if pr != t {
                a.swap(pr, t);
                u.swap(pr, t);
            }
            if pc != t {
                for row in a.iter_mut() {
                    row.swap(pc, t);
                }
                for row in v.iter_mut() {
                    row.swap(pc, t);
                }
            }
            // Clear the pivot row and column by Euclidean steps.
            let mut dirty = false;
            for r in (t + 1)..n {
                let q = div_round(a[r][t], a[t][t]);
                if q != 0 {
                    for c in 0..n {
                        a[r][c] -= q * a[t][c];
                        u[r][c] -= q * u[t][c];
                    }
                }
                if a[r][t] != 0 {
                    dirty = true;
                }
            }
            for c in (t + 1)..n {
                let q = div_round(a[t][c], a[t][t]);
                if q != 0 {
                    for r in 0..n {
                        a[r][c] -= q * a[r][t];
                        v[r][c] -= q * v[r][t];
                    }
                }
                if a[t][c] != 0 {
                    dirty = true;
                }
            }
            if dirty {
                continue;
            }
            // Pivot must divide every remaining entry; if not, fold the
            // offending row in and repeat.
            let mut fixed = true;
            'scan: for r in (t + 1)..n {
                for c in (t + 1)..n {
                    if a[r][c] % a[t][t] != 0 {
                        for cc in 0..n {
                            a[t][cc] += a[r][cc];
                            u[t][cc] += u[r][cc];
                        }
                        fixed = false;
                        break 'scan;
                    }
                }
            }
            if fixed {
                break;
            }
        }
        if t < n && a[t][t] < 0 {
            for c in 0..n {
                a[t][c] = -a[t][c];
                u[t][c] = -u[t][c];
            }
        }
    }
    (u, a, v)
}

fn ident_i128(n: usize) -> Vec<Vec<i128>> {
    (0..n)
        .map(|r| (0..n).map(|c| i128::from(r == c)).collect())
        .collect()
}

/// Round-to-nearest integer division, which makes the Euclidean steps above
/// shrink magnitudes as fast as possible.
fn div_round(a: i128, b: i128) -> i128 {
    let q = a / b;
    let r = a - q * b;
    if 2 * r.abs() > b.abs() {
        q + if (r < 0) == (b < 0) { 1 } else { -1 }
    } else {
        q
    }
}

/// Exact inverse of a unimodular integer matrix (used for Smith-form
/// transforms, whose determinant is ±1 so the inverse is again integral).
pub fn invert_unimodular(m: &[Vec<i128>]) -> Vec<Vec<i128>> {
    let n = m.len();
    let cols: Vec<Vec<Rat>> = (0..n)
        .map(|c| {
            (0..n)
                .map(|r| {
                    Rat::new(
                        i64::try_from(m[r][c]).expect("unimodular entry fits in i64"),
                        1,
                    )
                })
                .collect()
        })
        .collect();
    let rm = RatMat { dim: n, data: cols };
    let inv = rm.inverse().expect("unimodular matrix is invertible");
    debug_assert!(inv.is_integer());
    (0..n)
        .map(|r| (0..n).map(|c| i128::from(*inv.get(r, c).numer())).collect())
        .collect()
}
