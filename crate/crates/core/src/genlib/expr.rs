//! Serializable expression trees for Fourier-domain generators.
//!
//! A [`GeneratorExpr`] is an immutable tree built from smooth window
//! leaves, half-open indicators, sparse dyadic series, and the usual
//! combinators (shift, reflect, dilate, complex scale, sum, product,
//! tensor).  Evaluation is pure and total on ℝ^d; every tree reports a
//! per-axis support descriptor outside of which it evaluates to exactly
//! zero, plus truncation metadata for the series leaves.
//!
//! Trees serialize to JSON as tagged objects (`"kind"` discriminator).
//! Numeric positions accept either JSON numbers or exact-rational strings
//! (`"1/3"`), and serialize back as numbers.

use super::bump::{bump_g, g0, g1, h_level, h_support};
use super::series;
use super::support::{AxisSupport, Interval, IntervalUnion, TailInfo};
use crate::error::{Error, Result};
use crate::rat::{parse_rat, rat_to_f64};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Cap on materialized pieces when an operation (product intersection,
/// flattened support listing) must expand piece families.
pub const MATERIALIZE_CAP: u64 = 4_000_000;

/// A real coordinate that deserializes from either a JSON number or an
/// exact-rational string like `"-7/4"`, and serializes as a number.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coord(pub f64);

impl From<f64> for Coord {
    fn from(x: f64) -> Self {
        Coord(x)
    }
}

impl Serialize for Coord {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for Coord {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(Coord(x)),
            Repr::Str(s) => {
                let r = parse_rat(&s).map_err(serde::de::Error::custom)?;
                Ok(Coord(rat_to_f64(&r)))
            }
        }
    }
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

/// Expression tree for a Fourier-domain generator.
///
/// One-dimensional leaves:
/// * `BumpG` — the smooth transition `g` (0 for x ≤ 0, 1 for x ≥ 1).
/// * `G0` — symmetric window on `[-1, 1]`, 1 at the origin.
/// * `G1` — asymmetric window on `[-1, 1/2]`, 1 only at the origin.
/// * `Hj` — dyadic level window (level 0 on `[-1/4, 1/4]`).
/// * `Hat` — piecewise-linear tent `max(0, 1 - |x|)` on `[-1, 1]`.
/// * `Indicator` — half-open indicator `[lo, hi)`.
/// * `DyadicSeries` — sparse series generator (see [`super::series`]).
///
/// Combinators: `Shift` (by a d-vector), `Reflect` (`x -> f(-x)`),
/// `Dilate` (`x -> f(a x)`), `Scale` (complex scalar multiple), `Sum`,
/// `Product`, and `Tensor` (one 1-d child per axis).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum GeneratorExpr {
    BumpG,
    G0,
    G1,
    Hj {
        level: u32,
    },
    Hat,
    Indicator {
        lo: Coord,
        hi: Coord,
    },
    Shift {
        by: Vec<Coord>,
        child: Box<GeneratorExpr>,
    },
    Reflect {
        child: Box<GeneratorExpr>,
    },
    Dilate {
        factor: Coord,
        child: Box<GeneratorExpr>,
    },
    Scale {
        re: f64,
        #[serde(default, skip_serializing_if = "is_zero")]
        im: f64,
        child: Box<GeneratorExpr>,
    },
    Sum {
        children: Vec<GeneratorExpr>,
    },
    Product {
        children: Vec<GeneratorExpr>,
    },
    DyadicSeries {
        index: u32,
        n1: u32,
        levels: u32,
    },
    Tensor {
        children: Vec<GeneratorExpr>,
    },
}

impl GeneratorExpr {
    /// Convenience constructors.
    pub fn shift1(by: f64, child: GeneratorExpr) -> GeneratorExpr {
        GeneratorExpr::Shift {
            by: vec![Coord(by)],
            child: Box::new(child),
        }
    }

    pub fn reflect(child: GeneratorExpr) -> GeneratorExpr {
        GeneratorExpr::Reflect {
            child: Box::new(child),
        }
    }

    pub fn scale_re(re: f64, child: GeneratorExpr) -> GeneratorExpr {
        GeneratorExpr::Scale {
            re,
            im: 0.0,
            child: Box::new(child),
        }
    }

    pub fn indicator(lo: f64, hi: f64) -> GeneratorExpr {
        GeneratorExpr::Indicator {
            lo: Coord(lo),
            hi: Coord(hi),
        }
    }

    pub fn product(children: Vec<GeneratorExpr>) -> GeneratorExpr {
        GeneratorExpr::Product { children }
    }

    pub fn sum(children: Vec<GeneratorExpr>) -> GeneratorExpr {
        GeneratorExpr::Sum { children }
    }

    /// Validate the tree and return its dimension.
    pub fn dim(&self) -> Result<usize> {
        use GeneratorExpr::*;
        match self {
            BumpG | G0 | G1 | Hat => Ok(1),
            Hj { level } => {
                if *level > 30 {
                    return Err(Error::Config(format!(
                        "level window {level} is deeper than supported (30)"
                    )));
                }
                Ok(1)
            }
            Indicator { lo, hi } => {
                if !lo.0.is_finite() || !hi.0.is_finite() {
                    return Err(Error::Config(
                        "indicator endpoints must be finite".into(),
                    ));
                }
                if lo.0 > hi.0 {
                    return Err(Error::Config(format!(
                        "indicator endpoints out of order: [{}, {})",
                        lo.0, hi.0
                    )));
                }
                Ok(1)
            }
            DyadicSeries { index, n1, levels } => {
                series::validate_series(*index, *n1, *levels)?;
                Ok(1)
            }
            Shift { by, child } => {
                let d = child.dim()?;
                if by.len() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        got: by.len(),
                    });
                }
                if by.iter().any(|c| !c.0.is_finite()) {
                    return Err(Error::Config("shift vector must be finite".into()));
                }
                Ok(d)
            }
            Reflect { child } => child.dim(),
            Dilate { factor, child } => {
                if factor.0 == 0.0 || !factor.0.is_finite() {
                    return Err(Error::Config(
                        "dilation factor must be finite and nonzero".into(),
                    ));
                }
                child.dim()
            }
            Scale { re, im, child } => {
                if !re.is_finite() || !im.is_finite() {
                    return Err(Error::Config("scale factor must be finite".into()));
                }
                child.dim()
            }
            Sum { children } | Product { children } => {
                let Some((first, rest)) = children.split_first() else {
                    return Err(Error::Config(
                        "sum/product must have at least one child".into(),
                    ));
                };
                let d = first.dim()?;
                for c in rest {
                    let dc = c.dim()?;
                    if dc != d {
                        return Err(Error::DimensionMismatch {
                            expected: d,
                            got: dc,
                        });
                    }
                }
                Ok(d)
            }
            Tensor { children } => {
                if children.is_empty() {
                    return Err(Error::Config("tensor must have at least one axis".into()));
                }
                for c in children {
                    let dc = c.dim()?;
                    if dc != 1 {
                        return Err(Error::Config(
                            "tensor children must be one-dimensional".into(),
                        ));
                    }
                }
                Ok(children.len())
            }
        }
    }

    /// Evaluate at a point (length must equal `dim`).
    pub fn eval(&self, omega: &[f64]) -> Complex64 {
        use GeneratorExpr::*;
        match self {
            BumpG => Complex64::new(bump_g(omega[0]), 0.0),
            G0 => Complex64::new(g0(omega[0]), 0.0),
            G1 => Complex64::new(g1(omega[0]), 0.0),
            Hj { level } => Complex64::new(h_level(*level, omega[0]), 0.0),
            Hat => Complex64::new((1.0 - omega[0].abs()).max(0.0), 0.0),
            Indicator { lo, hi } => {
                let x = omega[0];
                Complex64::new(if lo.0 <= x && x < hi.0 { 1.0 } else { 0.0 }, 0.0)
            }
            DyadicSeries { index, n1, levels } => {
                Complex64::new(series::series_eval(*index, *n1, *levels, omega[0]), 0.0)
            }
            Shift { by, child } => {
                let mut shifted = [0.0f64; 8];
                if omega.len() <= shifted.len() {
                    for (i, (&w, c)) in omega.iter().zip(by).enumerate() {
                        shifted[i] = w - c.0;
                    }
                    child.eval(&shifted[..omega.len()])
                } else {
                    let v: Vec<f64> =
                        omega.iter().zip(by).map(|(&w, c)| w - c.0).collect();
                    child.eval(&v)
                }
            }
            Reflect { child } => {
                let mut neg = [0.0f64; 8];
                if omega.len() <= neg.len() {
                    for (i, &w) in omega.iter().enumerate() {
                        neg[i] = -w;
                    }
                    child.eval(&neg[..omega.len()])
                } else {
                    let v: Vec<f64> = omega.iter().map(|w| -w).collect();
                    child.eval(&v)
                }
            }
            Dilate { factor, child } => {
                let mut sc = [0.0f64; 8];
                if omega.len() <= sc.len() {
                    for (i, &w) in omega.iter().enumerate() {
                        sc[i] = factor.0 * w;
                    }
                    child.eval(&sc[..omega.len()])
                } else {
                    let v: Vec<f64> = omega.iter().map(|w| factor.0 * w).collect();
                    child.eval(&v)
                }
            }
            Scale { re, im, child } => Complex64::new(*re, *im) * child.eval(omega),
            Sum { children } => children.iter().map(|c| c.eval(omega)).sum(),
            Product { children } => {
                let mut acc = Complex64::new(1.0, 0.0);
                for c in children {
                    acc *= c.eval(omega);
                    if acc == Complex64::new(0.0, 0.0) {
                        return acc;
                    }
                }
                acc
            }
            Tensor { children } => {
                let mut acc = Complex64::new(1.0, 0.0);
                for (c, &w) in children.iter().zip(omega) {
                    acc *= c.eval(&[w]);
                    if acc == Complex64::new(0.0, 0.0) {
                        return acc;
                    }
                }
                acc
            }
        }
    }

    /// Per-axis support descriptors: the expression is exactly zero at any
    /// point with some coordinate outside its axis support.
    pub fn axis_supports(&self) -> Result<Vec<AxisSupport>> {
        use GeneratorExpr::*;
        match self {
            BumpG => Ok(vec![AxisSupport::from_union(IntervalUnion::single(
                0.0,
                f64::INFINITY,
            ))]),
            G0 | Hat => Ok(vec![AxisSupport::from_union(IntervalUnion::single(
                -1.0, 1.0,
            ))]),
            G1 => Ok(vec![AxisSupport::from_union(IntervalUnion::single(
                -1.0, 0.5,
            ))]),
            Hj { level } => {
                let (lo, hi) = h_support(*level);
                Ok(vec![AxisSupport::from_union(IntervalUnion::single(lo, hi))])
            }
            Indicator { lo, hi } => Ok(vec![AxisSupport::from_union(IntervalUnion::single(
                lo.0, hi.0,
            ))]),
            DyadicSeries { index, n1, levels } => {
                Ok(vec![series::series_support(*index, *n1, *levels)])
            }
            Shift { by, child } => {
                let sup = child.axis_supports()?;
                Ok(sup
                    .into_iter()
                    .zip(by)
                    .map(|(ax, c)| ax.translate(c.0))
                    .collect())
            }
            Reflect { child } => Ok(child
                .axis_supports()?
                .into_iter()
                .map(|ax| ax.reflect())
                .collect()),
            Dilate { factor, child } => Ok(child
                .axis_supports()?
                .into_iter()
                .map(|ax| ax.compress(factor.0))
                .collect()),
            Scale { re, im, child } => {
                if *re == 0.0 && *im == 0.0 {
                    let d = child.dim()?;
                    Ok(vec![AxisSupport::default(); d])
                } else {
                    child.axis_supports()
                }
            }
            Sum { children } => {
                let mut acc = children[0].axis_supports()?;
                for c in &children[1..] {
                    for (a, b) in acc.iter_mut().zip(c.axis_supports()?) {
                        *a = a.union(&b);
                    }
                }
                Ok(acc)
            }
            Product { children } => {
                // Per-axis intersection; families are materialized first.
                let mut acc: Vec<IntervalUnion> = children[0]
                    .axis_supports()?
                    .into_iter()
                    .map(|ax| ax.flatten(MATERIALIZE_CAP))
                    .collect::<Result<_>>()?;
                for c in &children[1..] {
                    for (a, bx) in acc.iter_mut().zip(c.axis_supports()?) {
                        *a = a.intersect(&bx.flatten(MATERIALIZE_CAP)?);
                    }
                }
                Ok(acc.into_iter().map(AxisSupport::from_union).collect())
            }
            Tensor { children } => {
                let mut out = Vec::with_capacity(children.len());
                for c in children {
                    let mut sup = c.axis_supports()?;
                    debug_assert_eq!(sup.len(), 1);
                    out.push(sup.remove(0));
                }
                Ok(out)
            }
        }
    }

    /// Truncation metadata (sup-norm bound on the discarded part plus
    /// per-axis fiber-loss zones).
    ///
    /// Exact for every node that contains no series leaf.  Series leaves
    /// carry their own certified metadata.  `Shift`/`Reflect`/`Dilate`
    /// transport zones geometrically; `Scale` rescales masses.  `Tensor`
    /// concatenates child zones axis by axis, which bounds the combined
    /// loss because every built-in truncated leaf has values bounded by 1
    /// and unit-bounded fiber mass.  `Sum` and `Product` refuse truncated
    /// children: no sound bound is available without extra structure.
    pub fn tail(&self) -> Result<TailInfo> {
        use GeneratorExpr::*;
        match self {
            BumpG | G0 | G1 | Hat | Hj { .. } | Indicator { .. } => Ok(TailInfo::exact(1)),
            DyadicSeries { index, levels, .. } => Ok(series::series_tail(*index, *levels)),
            Shift { by, child } => {
                let t = child.tail()?;
                Ok(TailInfo {
                    sup_bound: t.sup_bound,
                    zones: t
                        .zones
                        .into_iter()
                        .zip(by)
                        .map(|(zs, c)| zs.into_iter().map(|z| z.translate(c.0)).collect())
                        .collect(),
                })
            }
            Reflect { child } => {
                let t = child.tail()?;
                Ok(TailInfo {
                    sup_bound: t.sup_bound,
                    zones: t
                        .zones
                        .into_iter()
                        .map(|zs| zs.into_iter().map(|z| z.reflect()).collect())
                        .collect(),
                })
            }
            Dilate { factor, child } => {
                let t = child.tail()?;
                Ok(TailInfo {
                    sup_bound: t.sup_bound,
                    zones: t
                        .zones
                        .into_iter()
                        .map(|zs| zs.into_iter().map(|z| z.compress(factor.0)).collect())
                        .collect(),
                })
            }
            Scale { re, im, child } => {
                let t = child.tail()?;
                let mag = Complex64::new(*re, *im).norm();
                Ok(TailInfo {
                    sup_bound: t.sup_bound * mag,
                    zones: t
                        .zones
                        .into_iter()
                        .map(|zs| {
                            zs.into_iter()
                                .map(|mut z| {
                                    z.mass *= mag * mag;
                                    z
                                })
                                .collect()
                        })
                        .collect(),
                })
            }
            Sum { children } | Product { children } => {
                let d = self.dim()?;
                for c in children {
                    if !c.tail()?.is_exact() {
                        return Err(Error::Config(
                            "truncated series cannot be combined through sums or products; \
                             use tensor nodes or plain series"
                                .into(),
                        ));
                    }
                }
                Ok(TailInfo::exact(d))
            }
            Tensor { children } => {
                let mut sup = 0.0;
                let mut zones = Vec::with_capacity(children.len());
                for c in children {
                    let t = c.tail()?;
                    sup += t.sup_bound;
                    zones.push(t.zones.into_iter().next().unwrap_or_default());
                }
                Ok(TailInfo {
                    sup_bound: sup,
                    zones,
                })
            }
        }
    }

    /// Flattened, merged support intervals per axis (materializing piece
    /// families).  Errors above [`MATERIALIZE_CAP`] pieces.
    pub fn support_intervals(&self) -> Result<Vec<Vec<Interval>>> {
        self.axis_supports()?
            .into_iter()
            .map(|ax| Ok(ax.flatten(MATERIALIZE_CAP)?.intervals().to_vec()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The smooth compactly supported pair used throughout: rising-falling
    /// product on [0, 2] and its signed companion.
    fn phi1() -> GeneratorExpr {
        // g(x) * g(2 - x)  ==  BumpG * Shift(2, Reflect(BumpG))
        GeneratorExpr::product(vec![
            GeneratorExpr::BumpG,
            GeneratorExpr::shift1(2.0, GeneratorExpr::reflect(GeneratorExpr::BumpG)),
        ])
    }

    fn phi2() -> GeneratorExpr {
        // g(1-x) on [0,1)  minus  g(x-1) on [1,2)
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

    fn re(e: &GeneratorExpr, x: f64) -> f64 {
        let v = e.eval(&[x]);
        assert!(v.im == 0.0);
        v.re
    }

    #[test]
    fn pair_evaluation_matches_closed_form() {
        let p1 = phi1();
        assert_eq!(re(&p1, 1.0), 1.0); // g(1) g(1) = 1
        assert_eq!(re(&p1, 0.0), 0.0);
        assert_eq!(re(&p1, 2.0), 0.0);
        assert_eq!(re(&p1, -0.5), 0.0);
        assert_eq!(re(&p1, 2.5), 0.0);
        let x = 0.37;
        assert!((re(&p1, x) - bump_g(x) * bump_g(2.0 - x)).abs() < 1e-15);

        let p2 = phi2();
        assert_eq!(re(&p2, 1.0), 0.0); // right piece at its boundary: -g(0) = 0
        assert_eq!(re(&p2, 0.0), 1.0); // left piece: g(1) = 1
        assert!((re(&p2, 0.3) - bump_g(0.7)).abs() < 1e-15);
        assert!((re(&p2, 1.3) + bump_g(0.3)).abs() < 1e-15);
        assert_eq!(re(&p2, 2.0), 0.0);
        assert_eq!(re(&p2, -0.1), 0.0);
    }

    #[test]
    fn pair_fiber_identities_on_integer_offsets() {
        // Unit fiber mass and exact cross-cancellation: the algebraic
        // identities behind orthonormality of the pair.
        let p1 = phi1();
        let p2 = phi2();
        let mut w = 0.0;
        while w < 1.0 {
            let mut mass1 = 0.0;
            let mut mass2 = 0.0;
            let mut cross = 0.0;
            for l in -2..=2 {
                let x = w + l as f64;
                mass1 += re(&p1, x).powi(2);
                mass2 += re(&p2, x).powi(2);
                cross += re(&p1, x) * re(&p2, x);
            }
            assert!((mass1 - 1.0).abs() < 1e-12, "mass1 at {w}: {mass1}");
            assert!((mass2 - 1.0).abs() < 1e-12, "mass2 at {w}: {mass2}");
            assert!(cross.abs() < 1e-12, "cross at {w}: {cross}");
            w += 0.0137;
        }
    }

    #[test]
    fn indicator_is_half_open() {
        let ind = GeneratorExpr::indicator(0.0, 1.0);
        assert_eq!(re(&ind, 0.0), 1.0);
        assert_eq!(re(&ind, 1.0), 0.0);
        assert_eq!(re(&ind, 0.999999), 1.0);
        assert_eq!(re(&ind, -1e-12), 0.0);
    }

    #[test]
    fn hat_shape() {
        let h = GeneratorExpr::Hat;
        assert_eq!(re(&h, 0.0), 1.0);
        assert_eq!(re(&h, 0.5), 0.5);
        assert_eq!(re(&h, -0.25), 0.75);
        assert_eq!(re(&h, 1.0), 0.0);
        assert_eq!(re(&h, -3.0), 0.0);
    }

    #[test]
    fn tensor_eval_is_product_of_axis_evals() {
        let t = GeneratorExpr::Tensor {
            children: vec![phi1(), phi2()],
        };
        assert_eq!(t.dim().unwrap(), 2);
        let mut k = 0u32;
        while k < 100 {
            // deterministic scattered points
            let x = (k as f64 * 0.731).rem_euclid(3.0) - 0.5;
            let y = (k as f64 * 1.137).rem_euclid(3.0) - 0.5;
            let lhs = t.eval(&[x, y]);
            let rhs = phi1().eval(&[x]) * phi2().eval(&[y]);
            assert!((lhs - rhs).norm() < 1e-15);
            k += 1;
        }
    }

    #[test]
    fn dim_validation_catches_mismatches() {
        let bad_shift = GeneratorExpr::Shift {
            by: vec![Coord(1.0), Coord(2.0)],
            child: Box::new(GeneratorExpr::BumpG),
        };
        assert!(bad_shift.dim().is_err());
        let bad_sum = GeneratorExpr::sum(vec![
            GeneratorExpr::BumpG,
            GeneratorExpr::Tensor {
                children: vec![GeneratorExpr::BumpG, GeneratorExpr::BumpG],
            },
        ]);
        assert!(bad_sum.dim().is_err());
        let bad_dilate = GeneratorExpr::Dilate {
            factor: Coord(0.0),
            child: Box::new(GeneratorExpr::Hat),
        };
        assert!(bad_dilate.dim().is_err());
        let bad_series = GeneratorExpr::DyadicSeries {
            index: 0,
            n1: 2,
            levels: 8,
        };
        assert!(bad_series.dim().is_err());
        assert!(GeneratorExpr::sum(vec![]).dim().is_err());
    }

    #[test]
    fn supports_follow_combinators() {
        let p1 = phi1();
        let sup = p1.axis_supports().unwrap();
        assert_eq!(sup.len(), 1);
        let flat = sup[0].explicit.clone();
        assert_eq!(flat.intervals(), &[Interval::new(0.0, 2.0)]);

        let shifted = GeneratorExpr::shift1(3.0, phi1());
        let s2 = shifted.axis_supports().unwrap();
        assert_eq!(s2[0].explicit.intervals(), &[Interval::new(3.0, 5.0)]);

        let refl = GeneratorExpr::reflect(phi1());
        let s3 = refl.axis_supports().unwrap();
        assert_eq!(s3[0].explicit.intervals(), &[Interval::new(-2.0, 0.0)]);

        let dil = GeneratorExpr::Dilate {
            factor: Coord(2.0),
            child: Box::new(phi1()),
        };
        let s4 = dil.axis_supports().unwrap();
        assert_eq!(s4[0].explicit.intervals(), &[Interval::new(0.0, 1.0)]);

        // Sinc indicator support.
        let sinc = GeneratorExpr::indicator(-0.5, 0.5);
        let s5 = sinc.support_intervals().unwrap();
        assert_eq!(s5[0], vec![Interval::new(-0.5, 0.5)]);
    }

    #[test]
    fn series_node_support_at_one_level() {
        // index 1, n1 = 2, one retained level: central piece plus the
        // level-1 pieces at offsets 2(1+l), l = 0..3, each of width 3/8,
        // plus mirror images.
        let e = GeneratorExpr::DyadicSeries {
            index: 1,
            n1: 2,
            levels: 1,
        };
        let flat = e.support_intervals().unwrap();
        let ivs = &flat[0];
        assert_eq!(ivs.len(), 1 + 4 + 4);
        assert_eq!(ivs[4], Interval::new(-0.25, 0.25));
        // First positive piece: offset 2*(gamma(1)+0) = 2, window [0, 3/8].
        assert_eq!(ivs[5], Interval::new(2.0, 2.375));
        assert_eq!(ivs[8], Interval::new(8.0, 8.375));
        // Mirrors.
        assert_eq!(ivs[3], Interval::new(-2.375, -2.0));
        assert_eq!(ivs[0], Interval::new(-8.375, -8.0));
        // Gap points evaluate to zero.
        assert_eq!(re(&e, 1.0), 0.0);
        assert_eq!(re(&e, 0.3), 0.0);
    }

    #[test]
    fn tail_metadata_flows_through_combinators() {
        let e = GeneratorExpr::DyadicSeries {
            index: 1,
            n1: 2,
            levels: 8,
        };
        let t = e.tail().unwrap();
        assert_eq!(t.sup_bound, 1.0 / 256.0);
        assert_eq!(t.zones[0].len(), 1);

        let scaled = GeneratorExpr::Scale {
            re: 0.0,
            im: 2.0,
            child: Box::new(e.clone()),
        };
        let ts = scaled.tail().unwrap();
        assert_eq!(ts.sup_bound, 2.0 / 256.0);
        assert_eq!(ts.zones[0][0].mass, 4.0);

        let tens = GeneratorExpr::Tensor {
            children: vec![e.clone(), e.clone()],
        };
        let tt = tens.tail().unwrap();
        assert_eq!(tt.sup_bound, 2.0 / 256.0);
        assert_eq!(tt.zones.len(), 2);
        assert_eq!(tt.zones[1].len(), 1);

        // Sums and products refuse truncated children.
        assert!(GeneratorExpr::sum(vec![e.clone(), GeneratorExpr::Hat])
            .tail()
            .is_err());
        assert!(
            GeneratorExpr::product(vec![e, GeneratorExpr::indicator(0.0, 10.0)])
                .tail()
                .is_err()
        );
        // Exact trees are exact.
        assert!(phi1().tail().unwrap().is_exact());
    }

    #[test]
    fn serde_round_trip_is_lossless() {
        let exprs = vec![
            phi1(),
            phi2(),
            GeneratorExpr::DyadicSeries {
                index: 2,
                n1: 2,
                levels: 8,
            },
            GeneratorExpr::Tensor {
                children: vec![
                    GeneratorExpr::DyadicSeries {
                        index: 1,
                        n1: 2,
                        levels: 6,
                    },
                    GeneratorExpr::Hat,
                ],
            },
            GeneratorExpr::Scale {
                re: 0.5,
                im: -1.25,
                child: Box::new(GeneratorExpr::indicator(-0.5, 0.5)),
            },
        ];
        for e in exprs {
            let js = serde_json::to_string(&e).unwrap();
            let back: GeneratorExpr = serde_json::from_str(&js).unwrap();
            assert_eq!(back, e, "round trip changed the tree: {js}");
        }
    }

    #[test]
    fn serde_accepts_rational_strings_and_tagged_kinds() {
        let js = r#"{
            "kind": "Shift",
            "by": ["1/2"],
            "child": {"kind": "Indicator", "lo": "-1/2", "hi": 0.5}
        }"#;
        let e: GeneratorExpr = serde_json::from_str(js).unwrap();
        assert_eq!(e.dim().unwrap(), 1);
        assert_eq!(e.eval(&[0.5]).re, 1.0); // shifted indicator covers [0, 1)
        assert_eq!(e.eval(&[-0.1]).re, 0.0);
        // Scale with the imaginary part omitted defaults to real.
        let js2 = r#"{"kind": "Scale", "re": 3.0, "child": {"kind": "Hat"}}"#;
        let e2: GeneratorExpr = serde_json::from_str(js2).unwrap();
        assert_eq!(e2.eval(&[0.0]).re, 3.0);
        // Unknown kinds are rejected.
        assert!(serde_json::from_str::<GeneratorExpr>(r#"{"kind": "Cos"}"#).is_err());
    }
}
