//! Fourier-domain generators, generator sets, and built-in presets.
//!
//! A [`FourierGenerator`] wraps an expression tree with a label and
//! certified truncation metadata.  A [`GeneratorSet`] couples an ordered
//! list of generators with the translation lattice Λ they are shifted
//! along; it is the object the fiber, invariance, and diagnostics layers
//! consume.  Sets serialize to a small JSON document and round-trip
//! losslessly.

use super::expr::GeneratorExpr;
use super::support::{AxisSupport, TailInfo};
use crate::error::{Error, Result};
use crate::lattice::Group;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A labeled Fourier-domain generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierGenerator {
    pub label: String,
    pub expr: GeneratorExpr,
    /// Certified sup-norm bound on the discarded series tail (0 for exact
    /// generators).
    pub tail_bound: f64,
    #[serde(skip)]
    pub dim: usize,
    #[serde(skip)]
    tail: TailInfo,
}

impl FourierGenerator {
    pub fn new(label: impl Into<String>, expr: GeneratorExpr) -> Result<Self> {
        let dim = expr.dim()?;
        let tail = expr.tail()?;
        Ok(FourierGenerator {
            label: label.into(),
            tail_bound: tail.sup_bound,
            expr,
            dim,
            tail,
        })
    }

    /// Re-derive the skipped fields after deserialization and check the
    /// stored tail bound against the recomputed one.
    fn rehydrate(&mut self) -> Result<()> {
        self.dim = self.expr.dim()?;
        self.tail = self.expr.tail()?;
        if self.tail_bound < self.tail.sup_bound - 1e-12 {
            return Err(Error::Config(format!(
                "generator '{}' declares tail_bound {} below the certified bound {}",
                self.label, self.tail_bound, self.tail.sup_bound
            )));
        }
        Ok(())
    }

    pub fn eval(&self, omega: &[f64]) -> Complex64 {
        debug_assert_eq!(omega.len(), self.dim);
        self.expr.eval(omega)
    }

    pub fn tail_info(&self) -> &TailInfo {
        &self.tail
    }

    pub fn axis_supports(&self) -> Result<Vec<AxisSupport>> {
        self.expr.axis_supports()
    }
}

/// An ordered family of generators over a common translation lattice Λ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSet {
    pub dim: usize,
    pub lattice: Group,
    pub generators: Vec<FourierGenerator>,
}

impl GeneratorSet {
    pub fn new(lattice: Group, generators: Vec<FourierGenerator>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::Config("generator set must be nonempty".into()));
        }
        let dim = generators[0].dim;
        for g in &generators {
            if g.dim != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: g.dim,
                });
            }
        }
        if lattice.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: lattice.dim(),
            });
        }
        if !lattice.is_lattice() {
            return Err(Error::NotLattice(
                "the translation group of a generator set must be a full-rank lattice".into(),
            ));
        }
        let mut labels: Vec<&str> = generators.iter().map(|g| g.label.as_str()).collect();
        labels.sort_unstable();
        labels.dedup();
        if labels.len() != generators.len() {
            return Err(Error::Config("generator labels must be distinct".into()));
        }
        Ok(GeneratorSet {
            dim,
            lattice,
            generators,
        })
    }

    /// Number of generators.
    pub fn r(&self) -> usize {
        self.generators.len()
    }

    /// Evaluate every generator at one point.
    pub fn eval_all(&self, omega: &[f64]) -> Vec<Complex64> {
        self.generators.iter().map(|g| g.eval(omega)).collect()
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let mut set: GeneratorSet = serde_json::from_str(s)?;
        for g in &mut set.generators {
            g.rehydrate()?;
        }
        // Re-validate the assembled set (dims, lattice, labels).
        let lattice = set.lattice.clone();
        GeneratorSet::new(lattice, std::mem::take(&mut set.generators)).and_then(|rebuilt| {
            if rebuilt.dim != set.dim {
                return Err(Error::DimensionMismatch {
                    expected: set.dim,
                    got: rebuilt.dim,
                });
            }
            Ok(rebuilt)
        })
    }
}

/// The smooth rising-falling generator `g(x) g(2 - x)` supported on `[0, 2]`.
pub fn smooth_pair_first() -> GeneratorExpr {
    GeneratorExpr::product(vec![
        GeneratorExpr::BumpG,
        GeneratorExpr::shift1(2.0, GeneratorExpr::reflect(GeneratorExpr::BumpG)),
    ])
}

/// Its signed companion `g(1-x) χ_[0,1) − g(x-1) χ_[1,2)`.
pub fn smooth_pair_second() -> GeneratorExpr {
    GeneratorExpr::sum(vec![
        GeneratorExpr::product(vec![
            GeneratorExpr::shift1(1.0, GeneratorExpr::reflect(GeneratorExpr::BumpG)),
            GeneratorExpr::indicator(0.0, 1.0),
        ]),
        GeneratorExpr::scale_re(
            -1.0,
            GeneratorExpr::product(vec![
                GeneratorExpr::shift1(1.0, GeneratorExpr::BumpG),
                GeneratorExpr::indicator(1.0, 2.0),
            ]),
        ),
    ])
}

/// Single sinc generator (`χ_[-1/2, 1/2)` in the Fourier domain) over ℤ.
pub fn make_sinc_set() -> GeneratorSet {
    let g = FourierGenerator::new("sinc", GeneratorExpr::indicator(-0.5, 0.5))
        .expect("static expression");
    GeneratorSet::new(Group::integers(1), vec![g]).expect("static set")
}

/// Single tent generator (`max(0, 1-|ω|)`) over ℤ.
pub fn make_hat_set() -> GeneratorSet {
    let g = FourierGenerator::new("hat", GeneratorExpr::Hat).expect("static expression");
    GeneratorSet::new(Group::integers(1), vec![g]).expect("static set")
}

/// The 1-d regular family: `2k` generators tiling `[0, 2k]`, alternating
/// shifted copies of the smooth pair.  Odd positions carry the rising-
/// falling window, even positions its signed companion; consecutive pairs
/// tile unit cells with exactly orthonormal integer fibers.
fn regular_exprs_1d(k: u32) -> Vec<GeneratorExpr> {
    let mut out = Vec::with_capacity(2 * k as usize);
    for i in 1..=(2 * k) {
        let e = if i % 2 == 1 {
            GeneratorExpr::shift1(f64::from(i - 1), smooth_pair_first())
        } else {
            GeneratorExpr::shift1(f64::from(i - 2), smooth_pair_second())
        };
        out.push(e);
    }
    out
}

/// The regular family over ℤ^d: `(2k)^d` generators, all d-fold tensor
/// products of the 1-d family, in lexicographic index order.  Exact
/// (tail_bound 0), smooth except for the signed companions' jump pieces,
/// supported in `[0, 2k]^d`.
pub fn make_regular_set(k: u32, d: usize) -> Result<GeneratorSet> {
    if k < 1 {
        return Err(Error::Config("regular family needs k >= 1".into()));
    }
    if d < 1 {
        return Err(Error::Config("dimension must be >= 1".into()));
    }
    let r_total = (2 * k as u64).pow(d as u32);
    if r_total > 4096 {
        return Err(Error::Config(format!(
            "regular family would have {r_total} generators; cap is 4096"
        )));
    }
    let axis = regular_exprs_1d(k);
    let mut gens = Vec::with_capacity(r_total as usize);
    let mut idx = vec![0usize; d];
    loop {
        let label = format!(
            "phi{}",
            idx.iter()
                .map(|i| (i + 1).to_string())
                .collect::<Vec<_>>()
                .join("_")
        );
        let expr = if d == 1 {
            axis[idx[0]].clone()
        } else {
            GeneratorExpr::Tensor {
                children: idx.iter().map(|&i| axis[i].clone()).collect(),
            }
        };
        gens.push(FourierGenerator::new(label, expr)?);
        // Lexicographic increment, last axis fastest.
        let mut a = d;
        loop {
            if a == 0 {
                break;
            }
            a -= 1;
            idx[a] += 1;
            if idx[a] < axis.len() {
                break;
            }
            idx[a] = 0;
        }
        if idx.iter().all(|&i| i == 0) {
            break;
        }
    }
    GeneratorSet::new(Group::integers(d), gens)
}

/// The first sparse series generator with spacing `n1`, truncated at
/// `levels`.
pub fn make_sparse_generator(n1: u32, levels: u32) -> Result<FourierGenerator> {
    FourierGenerator::new(
        "phi1",
        GeneratorExpr::DyadicSeries {
            index: 1,
            n1,
            levels,
        },
    )
}

/// The sparse family: `r` series generators with pairwise disjoint
/// supports over Λ = ℤ^d, where `d = n.len()`.  Axis 0 of generator `i`
/// carries the index-`i` series with spacing `n[0]`; for `d > 1` every
/// generator is tensored with the first series generator with spacing
/// `n[axis]` on each remaining axis.
pub fn make_sparse_set(r: u32, n: &[u32], levels: u32) -> Result<GeneratorSet> {
    if r < 1 {
        return Err(Error::Config("sparse family needs r >= 1".into()));
    }
    if n.is_empty() {
        return Err(Error::Config(
            "sparse family needs at least one axis spacing".into(),
        ));
    }
    let d = n.len();
    let mut gens = Vec::with_capacity(r as usize);
    for i in 1..=r {
        let head = GeneratorExpr::DyadicSeries {
            index: i,
            n1: n[0],
            levels,
        };
        let expr = if d == 1 {
            head
        } else {
            let mut children = Vec::with_capacity(d);
            children.push(head);
            for &nk in &n[1..] {
                children.push(GeneratorExpr::DyadicSeries {
                    index: 1,
                    n1: nk,
                    levels,
                });
            }
            GeneratorExpr::Tensor { children }
        };
        gens.push(FourierGenerator::new(format!("phi{i}"), expr)?);
    }
    GeneratorSet::new(Group::integers(d), gens)
}

/// Build a preset generator set by name with string parameters.
///
/// Recognized presets and parameters (all parameters optional):
/// * `sinc` — the half-open unit indicator.
/// * `hat` — the tent generator.
/// * `regular` — `k` (default 1), `d` (default 1).
/// * `sparse` — `n` (spacing, default 2), `j` (levels, default 8).
/// * `sparse-family` — `r` (default 2), `n` (comma-separated spacings,
///   default `2`), `j` (levels, default 8).
pub fn make_preset(name: &str, params: &BTreeMap<String, String>) -> Result<GeneratorSet> {
    fn get_u32(params: &BTreeMap<String, String>, key: &str, default: u32) -> Result<u32> {
        match params.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<u32>()
                .map_err(|_| Error::Config(format!("parameter {key}={v} is not a whole number"))),
        }
    }
    let known: &[&str] = match name {
        "sinc" | "hat" => &[],
        "regular" => &["k", "d"],
        "sparse" => &["n", "j"],
        "sparse-family" => &["r", "n", "j"],
        other => {
            return Err(Error::Config(format!(
                "unknown preset '{other}' (expected sinc, hat, regular, sparse, or sparse-family)"
            )))
        }
    };
    for key in params.keys() {
        if !known.contains(&key.as_str()) {
            return Err(Error::Config(format!(
                "preset '{name}' does not take parameter '{key}'"
            )));
        }
    }
    match name {
        "sinc" => Ok(make_sinc_set()),
        "hat" => Ok(make_hat_set()),
        "regular" => {
            let k = get_u32(params, "k", 1)?;
            let d = get_u32(params, "d", 1)? as usize;
            make_regular_set(k, d)
        }
        "sparse" => {
            let n = get_u32(params, "n", 2)?;
            let j = get_u32(params, "j", 8)?;
            let g = make_sparse_generator(n, j)?;
            GeneratorSet::new(Group::integers(1), vec![g])
        }
        "sparse-family" => {
            let r = get_u32(params, "r", 2)?;
            let j = get_u32(params, "j", 8)?;
            let n: Vec<u32> = match params.get("n") {
                None => vec![2],
                Some(v) => v
                    .split(',')
                    .map(|p| {
                        p.trim().parse::<u32>().map_err(|_| {
                            Error::Config(format!("spacing list entry '{p}' is not a whole number"))
                        })
                    })
                    .collect::<Result<_>>()?,
            };
            make_sparse_set(r, &n, j)
        }
        _ => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regular_pair_has_unit_orthonormal_integer_fibers() {
        let set = make_regular_set(1, 1).unwrap();
        assert_eq!(set.r(), 2);
        let n = 4096;
        let mut worst_mass = 0.0f64;
        let mut worst_cross = 0.0f64;
        for kk in 0..n {
            let w = kk as f64 / n as f64;
            let mut mass = [0.0f64; 2];
            let mut cross = Complex64::new(0.0, 0.0);
            for l in -2..=2 {
                let v = set.eval_all(&[w + l as f64]);
                mass[0] += v[0].norm_sqr();
                mass[1] += v[1].norm_sqr();
                cross += v[0] * v[1].conj();
            }
            worst_mass = worst_mass
                .max((mass[0] - 1.0).abs())
                .max((mass[1] - 1.0).abs());
            worst_cross = worst_cross.max(cross.norm());
        }
        assert!(worst_mass < 1e-10, "fiber mass deviation {worst_mass}");
        assert!(worst_cross < 1e-10, "fiber cross-term {worst_cross}");
    }

    #[test]
    fn regular_family_counts_and_supports() {
        let set = make_regular_set(2, 1).unwrap();
        assert_eq!(set.r(), 4);
        for (i, g) in set.generators.iter().enumerate() {
            let sup = g.axis_supports().unwrap();
            let hull = sup[0].hull().unwrap();
            assert!(hull.lo >= 0.0 && hull.hi <= 4.0, "generator {i} outside [0,4]");
        }
        assert_eq!(set.generators[2].label, "phi3");

        let set2 = make_regular_set(1, 2).unwrap();
        assert_eq!(set2.r(), 4);
        assert_eq!(set2.dim, 2);
        assert_eq!(set2.generators[0].label, "phi1_1");
        assert_eq!(set2.generators[1].label, "phi1_2");
        assert_eq!(set2.generators[2].label, "phi2_1");
        // Tensor evaluation: factor product.
        let g = &set2.generators[1]; // phi1 ⊗ phi2
        let v = g.eval(&[0.7, 0.3]);
        let f1 = smooth_pair_first().eval(&[0.7]);
        let f2 = smooth_pair_second().eval(&[0.3]);
        assert!((v - f1 * f2).norm() < 1e-15);
    }

    #[test]
    fn sparse_family_degenerates_to_single_series() {
        let single = make_sparse_generator(2, 8).unwrap();
        let set = make_sparse_set(1, &[2], 8).unwrap();
        assert_eq!(set.r(), 1);
        assert_eq!(set.generators[0].expr, single.expr);
        assert_eq!(set.generators[0].tail_bound, 1.0 / 256.0);
    }

    #[test]
    fn sparse_family_supports_are_pairwise_disjoint() {
        let set = make_sparse_set(2, &[2], 8).unwrap();
        let s1 = set.generators[0].axis_supports().unwrap();
        let s2 = set.generators[1].axis_supports().unwrap();
        let overlap = s1[0].overlap_len(&s2[0]).expect("same spacing");
        assert_eq!(overlap, 0.0, "supports of distinct indices must be disjoint");
        // The second generator's positive support begins past n1*gamma(2)-1 = 9.
        let hull2 = s2[0].hull().unwrap();
        assert!(hull2.hi > 9.0);
        let flat = s2[0].flatten(4_000_000).unwrap();
        for iv in flat.intervals() {
            assert!(
                iv.hi <= -9.0 || iv.lo >= 9.0,
                "second generator support reaches into (-9, 9): [{}, {}]",
                iv.lo,
                iv.hi
            );
        }
    }

    #[test]
    fn sparse_family_tensor_dimensions() {
        let set = make_sparse_set(2, &[2, 2], 4).unwrap();
        assert_eq!(set.dim, 2);
        let g = &set.generators[0];
        // Tensor of two first-series generators: value at (0,0) is 1.
        assert!((g.eval(&[0.0, 0.0]).re - 1.0).abs() < 1e-15);
        assert_eq!(g.tail_info().zones.len(), 2);
        assert_eq!(g.tail_bound, 2.0 / 16.0);
    }

    #[test]
    fn set_json_round_trip() {
        for set in [
            make_sinc_set(),
            make_hat_set(),
            make_regular_set(1, 1).unwrap(),
            make_sparse_set(2, &[2], 6).unwrap(),
        ] {
            let js = set.to_json_string().unwrap();
            let back = GeneratorSet::from_json_str(&js).unwrap();
            assert_eq!(back, set, "round trip changed the set:\n{js}");
        }
    }

    #[test]
    fn set_validation_rejects_bad_inputs() {
        // Mismatched dims.
        let g1 = FourierGenerator::new("a", GeneratorExpr::Hat).unwrap();
        let g2 = FourierGenerator::new(
            "b",
            GeneratorExpr::Tensor {
                children: vec![GeneratorExpr::Hat, GeneratorExpr::Hat],
            },
        )
        .unwrap();
        assert!(GeneratorSet::new(Group::integers(1), vec![g1.clone(), g2]).is_err());
        // Lattice dim mismatch.
        assert!(GeneratorSet::new(Group::integers(2), vec![g1.clone()]).is_err());
        // Non-lattice translation group.
        assert!(GeneratorSet::new(Group::FullSpace { dim: 1 }, vec![g1.clone()]).is_err());
        // Duplicate labels.
        let g3 = FourierGenerator::new("a", GeneratorExpr::indicator(0.0, 1.0)).unwrap();
        assert!(GeneratorSet::new(Group::integers(1), vec![g1, g3]).is_err());
        // Empty set.
        assert!(GeneratorSet::new(Group::integers(1), vec![]).is_err());
    }

    #[test]
    fn json_rejects_understated_tail_bound() {
        let set = make_sparse_set(1, &[2], 8).unwrap();
        let js = set.to_json_string().unwrap();
        let cheat = js.replace("0.00390625", "0.0000001");
        assert!(
            GeneratorSet::from_json_str(&cheat).is_err(),
            "understated tail bound must be rejected"
        );
    }

    #[test]
    fn preset_registry() {
        let p = |name: &str, kv: &[(&str, &str)]| {
            let params: BTreeMap<String, String> = kv
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect();
            make_preset(name, &params)
        };
        assert_eq!(p("sinc", &[]).unwrap().r(), 1);
        assert_eq!(p("hat", &[]).unwrap().r(), 1);
        assert_eq!(p("regular", &[("k", "2")]).unwrap().r(), 4);
        assert_eq!(p("regular", &[("k", "1"), ("d", "2")]).unwrap().r(), 4);
        let sparse = p("sparse", &[("n", "2"), ("j", "6")]).unwrap();
        assert_eq!(sparse.generators[0].tail_bound, 1.0 / 64.0);
        assert_eq!(p("sparse-family", &[("r", "2")]).unwrap().r(), 2);
        assert_eq!(
            p("sparse-family", &[("r", "2"), ("n", "2,2")]).unwrap().dim,
            2
        );
        assert!(p("nope", &[]).is_err());
        assert!(p("sinc", &[("k", "1")]).is_err(), "stray parameter");
        assert!(p("regular", &[("k", "x")]).is_err());
    }
}
