//! Lattices, dual lattices, indices, coset representatives, and fundamental
//! domains — all in exact rational arithmetic.
//!
//! A full-rank lattice in dimension `d` is `B * Z^d` for an invertible
//! rational basis matrix `B` (basis vectors are the columns). Its dual is
//! the set of `x` with integer pairing against every lattice vector, i.e.
//! the lattice with basis `B^{-T}`. Duality reverses inclusions, and for
//! nested lattices `L ⊆ G` the quotient `L*/G*` is finite with exactly
//! `[G : L] = |det B_L| / |det B_G|` elements; its coset representatives
//! drive every periodization sum in the fiber layer.
//!
//! The ambient group `R^d` is admitted as the translation group of a
//! "translation-invariant" check; its dual is the one-element group, encoded
//! as [`Group::Trivial`] so that sums over the dual degenerate to a single
//! term.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rat::{
    format_rat, invert_unimodular, parse_rat, rat_to_f64, smith_normal_form, Rat, RatMat,
};
use num::{One, Signed, Zero};

/// A closed subgroup of `R^d` of the three kinds this crate analyzes:
/// a full-rank lattice, all of `R^d`, or the one-element group (which only
/// ever arises as the dual of `FullSpace`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Group {
    /// `basis * Z^d`, basis columns are the generating vectors.
    Lattice { basis: RatMat },
    /// The ambient space `R^d`.
    FullSpace { dim: usize },
    /// The one-element group `{0}` in `R^d`.
    Trivial { dim: usize },
}

impl Group {
    /// Build a lattice group, validating invertibility of the basis.
    pub fn lattice(basis: RatMat) -> Result<Group> {
        if basis.dim == 0 {
            return Err(Error::NotLattice("empty basis".into()));
        }
        if basis.det().is_zero() {
            return Err(Error::NotLattice("basis matrix is singular".into()));
        }
        Ok(Group::Lattice { basis })
    }

    /// The integer lattice `Z^d`.
    pub fn integers(dim: usize) -> Group {
        Group::Lattice {
            basis: RatMat::identity(dim),
        }
    }

    /// The one-dimensional lattice `c * Z`.
    pub fn scaled_integers(c: Rat) -> Result<Group> {
        Group::lattice(RatMat::from_columns(vec![vec![c]])?)
    }

    pub fn dim(&self) -> usize {
        match self {
            Group::Lattice { basis } => basis.dim,
            Group::FullSpace { dim } | Group::Trivial { dim } => *dim,
        }
    }

    pub fn is_lattice(&self) -> bool {
        matches!(self, Group::Lattice { .. })
    }

    pub fn basis(&self) -> Option<&RatMat> {
        match self {
            Group::Lattice { basis } => Some(basis),
            _ => None,
        }
    }

    /// Parse a group literal.
    ///
    /// Accepted forms:
    /// * `"Z"` / `"Z^d"` — the integer lattice;
    /// * `"q Z"` (also `"qZ"`) with `q` a rational literal — scaled integers
    ///   in dimension 1, e.g. `"1/2 Z"`, `"3Z"`;
    /// * `"R"` / `"R^d"` — the ambient space;
    /// * `"[[...],[...]]"` — a matrix of rational strings listing the basis
    ///   vectors (each inner list is one basis vector).
    pub fn parse(text: &str) -> Result<Group> {
        let s = text.trim();
        if s.is_empty() {
            return Err(Error::Parse("empty group literal".into()));
        }
        if s == "Z" {
            return Ok(Group::integers(1));
        }
        if s == "R" {
            return Ok(Group::FullSpace { dim: 1 });
        }
        if let Some(d) = s.strip_prefix("Z^") {
            let d: usize = d
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad dimension in {s:?}")))?;
            if d == 0 {
                return Err(Error::Parse("dimension must be positive".into()));
            }
            return Ok(Group::integers(d));
        }
        if let Some(d) = s.strip_prefix("R^") {
            let d: usize = d
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad dimension in {s:?}")))?;
            if d == 0 {
                return Err(Error::Parse("dimension must be positive".into()));
            }
            return Ok(Group::FullSpace { dim: d });
        }
        if let Some(q) = s.strip_suffix('Z') {
            let q = parse_rat(q)?;
            if q.is_zero() {
                return Err(Error::NotLattice("zero scale".into()));
            }
            return Group::scaled_integers(q.abs());
        }
        if s.starts_with('[') {
            return Self::parse_matrix_literal(s);
        }
        Err(Error::Parse(format!("unrecognized group literal {text:?}")))
    }

    fn parse_matrix_literal(s: &str) -> Result<Group> {
        let v: serde_json::Value = serde_json::from_str(s)
            .map_err(|e| Error::Parse(format!("bad lattice literal {s:?}: {e}")))?;
        let rows = v
            .as_array()
            .ok_or_else(|| Error::Parse("lattice literal must be a list of vectors".into()))?;
        let mut vectors: Vec<Vec<Rat>> = Vec::new();
        for row in rows {
            let entries = row
                .as_array()
                .ok_or_else(|| Error::Parse("lattice vector must be a list".into()))?;
            let mut vec_r = Vec::new();
            for e in entries {
                let r = match e {
                    serde_json::Value::String(s) => parse_rat(s)?,
                    serde_json::Value::Number(n) => {
                        if let Some(i) = n.as_i64() {
                            Rat::from_integer(i)
                        } else {
                            return Err(Error::Parse(format!(
                                "non-integer numeric lattice entry {n}; write rationals as strings like \"1/2\""
                            )));
                        }
                    }
                    _ => return Err(Error::Parse("lattice entries must be rationals".into())),
                };
                vec_r.push(r);
            }
            vectors.push(vec_r);
        }
        Group::lattice(RatMat::from_columns(vectors)?)
    }

    /// Render the group in the literal syntax `parse` accepts.
    pub fn to_literal(&self) -> String {
        match self {
            Group::FullSpace { dim } => {
                if *dim == 1 {
                    "R".into()
                } else {
                    format!("R^{dim}")
                }
            }
            Group::Trivial { dim } => format!("{{0}}^{dim}"),
            Group::Lattice { basis } => {
                if *basis == RatMat::identity(basis.dim) {
                    return if basis.dim == 1 {
                        "Z".into()
                    } else {
                        format!("Z^{}", basis.dim)
                    };
                }
                if basis.dim == 1 {
                    return format!("{} Z", format_rat(&basis.get(0, 0)));
                }
                let rows: Vec<String> = basis
                    .data
                    .iter()
                    .map(|col| {
                        let entries: Vec<String> =
                            col.iter().map(|r| format!("\"{}\"", format_rat(r))).collect();
                        format!("[{}]", entries.join(","))
                    })
                    .collect();
                format!("[{}]", rows.join(","))
            }
        }
    }

    /// The dual group: for a lattice, the lattice of integer-pairing
    /// frequencies (basis `B^{-T}`); for the ambient space, the one-element
    /// group; for the one-element group, the ambient space.
    pub fn dual(&self) -> Result<Group> {
        match self {
            Group::Lattice { basis } => {
                let dual_basis = basis.inverse()?.transpose();
                Ok(Group::Lattice { basis: dual_basis })
            }
            Group::FullSpace { dim } => Ok(Group::Trivial { dim: *dim }),
            Group::Trivial { dim } => Ok(Group::FullSpace { dim: *dim }),
        }
    }

    /// Does `self ⊆ other` hold as subgroups of `R^d`?
    pub fn is_subgroup_of(&self, other: &Group) -> Result<bool> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(match (self, other) {
            (_, Group::FullSpace { .. }) => true,
            (Group::Trivial { .. }, _) => true,
            (Group::FullSpace { .. }, _) => false,
            (_, Group::Trivial { .. }) => false,
            (Group::Lattice { basis: bl }, Group::Lattice { basis: bg }) => {
                bg.inverse()?.mul(bl).is_integer()
            }
        })
    }
}

/// Index `[G : L]` of a sublattice `L ⊆ G`, i.e. `|det B_L| / |det B_G|`.
pub fn index(sub: &Group, sup: &Group) -> Result<u64> {
    let (bl, bg) = match (sub, sup) {
        (Group::Lattice { basis: bl }, Group::Lattice { basis: bg }) => (bl, bg),
        _ => {
            return Err(Error::NotLattice(
                "index is defined for a pair of lattices".into(),
            ))
        }
    };
    if bl.dim != bg.dim {
        return Err(Error::DimensionMismatch {
            expected: bl.dim,
            got: bg.dim,
        });
    }
    let m = bg.inverse()?.mul(bl);
    if !m.is_integer() {
        return Err(Error::NotSublattice(format!(
            "{} is not contained in {}",
            sub.to_literal(),
            sup.to_literal()
        )));
    }
    let det = m.det().abs();
    debug_assert!(det.denom().is_one());
    Ok(*det.numer() as u64)
}

/// Representatives of the dual quotient `L*/G*` for nested lattices
/// `L ⊆ G` — the finite index set every periodization identity sums over.
#[derive(Debug, Clone)]
pub struct CosetReps {
    /// Representatives in canonical (lexicographic) order, each reduced into
    /// the fundamental domain of the sub-dual `G*`.
    pub reps: Vec<Vec<Rat>>,
    /// The subgroup of the quotient: `G*`.
    pub sub: Group,
    /// The ambient group of the quotient: `L*`.
    pub sup: Group,
}

impl CosetReps {
    pub fn reps_f64(&self) -> Vec<Vec<f64>> {
        self.reps
            .iter()
            .map(|v| v.iter().map(rat_to_f64).collect())
            .collect()
    }
}

/// Compute coset representatives of `L*/G*` for lattices `L ⊆ G`.
///
/// Writing `A* = dual basis of L`, `B* = dual basis of G`, the integer
/// change-of-basis `M = (A*)^{-1} B*` presents the quotient as
/// `Z^d / M Z^d`; a Smith normal form `U M V = D` turns that into
/// `⊕ Z/d_i`, with representatives `A* U^{-1} k` for `k` ranging over the
/// integer box `∏ [0, d_i)`. Each representative is then reduced into the
/// fundamental domain of `G*` and the list is sorted lexicographically.
pub fn coset_reps(sub: &Group, sup: &Group) -> Result<CosetReps> {
    let idx = index(sub, sup)?; // validates lattice pair + nesting
    let dual_sub = sup.dual()?; // G* (the smaller dual)
    let dual_sup = sub.dual()?; // L* (the larger dual)
    let a_star = dual_sup.basis().expect("dual of lattice is lattice");
    let b_star = dual_sub.basis().expect("dual of lattice is lattice");
    let d = a_star.dim;

    let m = a_star.inverse()?.mul(b_star);
    debug_assert!(m.is_integer(), "duality preserves nesting integrality");
    let m_int: Vec<Vec<i128>> = (0..d)
        .map(|r| (0..d).map(|c| i128::from(*m.get(r, c).numer())).collect())
        .collect();
    let (u, diag, _v) = smith_normal_form(&m_int);
    let u_inv = invert_unimodular(&u);

    let elementary: Vec<u64> = (0..d).map(|i| diag[i][i].unsigned_abs() as u64).collect();
    debug_assert_eq!(elementary.iter().product::<u64>(), idx);

    let domain = FundamentalDomain::for_group(&dual_sub)?;
    let mut reps: Vec<Vec<Rat>> = Vec::with_capacity(idx as usize);
    let mut k = vec![0u64; d];
    loop {
        // z = U^{-1} k, x = A* z
        let z: Vec<Rat> = (0..d)
            .map(|r| {
                (0..d)
                    .map(|c| Rat::from_integer(u_inv[r][c] as i64) * Rat::from_integer(k[c] as i64))
                    .sum()
            })
            .collect();
        let x = a_star.mul_vec(&z);
        reps.push(domain.reduce_exact(&x));

        // advance the mixed-radix counter over ∏ [0, d_i)
        let mut axis = 0;
        loop {
            if axis == d {
                break;
            }
            k[axis] += 1;
            if k[axis] < elementary[axis].max(1) {
                break;
            }
            k[axis] = 0;
            axis += 1;
        }
        if axis == d {
            break;
        }
    }

    reps.sort();
    reps.dedup();
    debug_assert_eq!(reps.len() as u64, idx);
    Ok(CosetReps {
        reps,
        sub: dual_sub,
        sup: dual_sup,
    })
}

/// Half-open fundamental parallelepiped `offset + edges * [0,1)^d` of a
/// lattice, used as the sampling window for all fiber grids.
#[derive(Debug, Clone)]
pub struct FundamentalDomain {
    pub offset: Vec<Rat>,
    pub edges: RatMat,
    edges_f: Vec<Vec<f64>>,
    inv_f: Vec<Vec<f64>>,
}

impl FundamentalDomain {
    pub fn new(offset: Vec<Rat>, edges: RatMat) -> Result<FundamentalDomain> {
        if offset.len() != edges.dim {
            return Err(Error::DimensionMismatch {
                expected: edges.dim,
                got: offset.len(),
            });
        }
        let inv = edges.inverse()?;
        Ok(FundamentalDomain {
            edges_f: edges.to_f64_columns(),
            inv_f: inv.to_f64_columns(),
            offset,
            edges,
        })
    }

    /// The standard (origin-cornered) fundamental domain of a lattice.
    pub fn for_group(g: &Group) -> Result<FundamentalDomain> {
        match g {
            Group::Lattice { basis } => {
                FundamentalDomain::new(vec![Rat::zero(); basis.dim], basis.clone())
            }
            _ => Err(Error::NotLattice(
                "fundamental domain requires a lattice".into(),
            )),
        }
    }

    /// Fundamental domain of the dual lattice — the natural window for
    /// fiber scans of a shift lattice.
    pub fn for_dual_of(g: &Group) -> Result<FundamentalDomain> {
        FundamentalDomain::for_group(&g.dual()?)
    }

    pub fn dim(&self) -> usize {
        self.edges.dim
    }

    /// Exact reduction of a rational point into the half-open domain.
    pub fn reduce_exact(&self, x: &[Rat]) -> Vec<Rat> {
        let inv = self.edges.inverse().expect("validated at construction");
        let shifted: Vec<Rat> = x
            .iter()
            .zip(&self.offset)
            .map(|(xi, oi)| *xi - *oi)
            .collect();
        let y = inv.mul_vec(&shifted);
        let fracs: Vec<Rat> = y.iter().map(|yi| yi - yi.floor()).collect();
        let back = self.edges.mul_vec(&fracs);
        back.iter()
            .zip(&self.offset)
            .map(|(bi, oi)| *bi + *oi)
            .collect()
    }

    /// Reduce a floating-point point into the half-open domain: the unique
    /// representative of `x` modulo the edge lattice lying inside.
    pub fn reduce(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let off: Vec<f64> = self.offset.iter().map(rat_to_f64).collect();
        let mut y = vec![0.0; d];
        for (r, yr) in y.iter_mut().enumerate() {
            for c in 0..d {
                *yr += self.inv_f[c][r] * (x[c] - off[c]);
            }
        }
        for yr in y.iter_mut() {
            *yr -= yr.floor();
            // floor(negative epsilon) artifacts: keep strictly inside [0,1)
            if *yr >= 1.0 {
                *yr = 0.0;
            }
        }
        let mut out = off;
        for (c, yc) in y.iter().enumerate() {
            for r in 0..d {
                out[r] += self.edges_f[c][r] * yc;
            }
        }
        out
    }

    /// Map box coordinates `u ∈ [0,1)^d` to a point of the domain.
    pub fn point_at(&self, u: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let mut out: Vec<f64> = self.offset.iter().map(rat_to_f64).collect();
        for (c, uc) in u.iter().enumerate().take(d) {
            for r in 0..d {
                out[r] += self.edges_f[c][r] * uc;
            }
        }
        out
    }
}

/// Floating-point view of a lattice used by fiber enumeration. The exact
/// basis stays authoritative; this caches `f64` columns and, when the basis
/// is diagonal, the per-axis spacings that allow fast per-axis hit walks.
#[derive(Debug, Clone)]
pub struct FloatLattice {
    pub dim: usize,
    pub basis: Vec<Vec<f64>>,
    pub inv: Vec<Vec<f64>>,
    /// `Some(spacings)` iff the basis matrix is diagonal (absolute values).
    pub diagonal: Option<Vec<f64>>,
}

impl FloatLattice {
    pub fn from_group(g: &Group) -> Result<FloatLattice> {
        let basis = g
            .basis()
            .ok_or_else(|| Error::NotLattice("expected a lattice".into()))?;
        let inv = basis.inverse()?;
        let diagonal = if basis.is_diagonal() {
            Some(
                (0..basis.dim)
                    .map(|i| rat_to_f64(&basis.get(i, i)).abs())
                    .collect(),
            )
        } else {
            None
        };
        Ok(FloatLattice {
            dim: basis.dim,
            basis: basis.to_f64_columns(),
            inv: inv.to_f64_columns(),
            diagonal,
        })
    }
}


/// Serde helper: groups serialize as their literal string.
impl Serialize for Group {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_literal())
    }
}

impl<'de> Deserialize<'de> for Group {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Group::parse(&s).map_err(serde::de::Error::custom)
    }
}
