//! Extra-invariance decisions via fiberwise rank comparison.
//!
//! A shift-invariant space generated by `Φ` over a lattice `Λ` is invariant
//! under a larger closed group `Γ ⊇ Λ` exactly when, at almost every `ω`,
//! the Gramian rank splits across the cosets `F = Λ*/Γ*`:
//! `rank G(ω) = Σ_{f∈F} rank A(ω+f)`. For `Γ = ℝ^d` the right-hand side
//! degenerates to counting the dual translates where the generator value
//! vector is nonzero.
//!
//! Grid scans stand in for "almost every": samples within
//! [`crate::fiber::BREAKPOINT_RADIUS`] of a support breakpoint, or with an
//! oversized truncation bound, are excluded and counted. A verdict of
//! `NotInvariant` additionally demands that the rank mismatch is backed by
//! comfortable eigenvalue margins, so tolerance noise cannot manufacture a
//! negative verdict; mismatches without margins leave the scan
//! `Inconclusive`, as does an excessive exclusion ratio.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fiber::{
    assemble_fiber, enumerate_hits, numerical_rank, DualScan, FiberMatrix, SetGeometry,
    TRUNC_EXCLUDE_THRESHOLD,
};
use crate::genlib::GeneratorSet;
use crate::grid::GridSpec;
use crate::lattice::{coset_reps, FundamentalDomain, Group};

/// Fraction of excluded samples beyond which a scan is inconclusive.
pub const EXCLUSION_BUDGET: f64 = 0.01;

/// Outcome of an invariance scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InvarianceVerdict {
    /// The rank equality held at every non-excluded sample.
    Invariant,
    /// Some sample violated the equality with strong eigenvalue margins.
    NotInvariant,
    /// Too many exclusions, or only margin-less violations.
    Inconclusive,
}

/// Evidence collected at one non-excluded sample.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiberRecord {
    pub omega: Vec<f64>,
    pub rank_g: usize,
    /// Per-coset fiber ranks (lattice `Γ`), or per-translate nonzero
    /// counts with grouped translates collapsed (`Γ = ℝ^d`).
    pub ranks_a: Vec<usize>,
    /// Whether `rank_g` equals the sum of `ranks_a`.
    pub ok: bool,
}

/// Grid-aggregated invariance verdict with per-fiber evidence.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub verdict: InvarianceVerdict,
    pub grid: GridSpec,
    pub tau: f64,
    /// Total samples scanned.
    pub samples: usize,
    /// Samples excluded (breakpoint proximity or truncation bound).
    pub excluded: usize,
    /// Non-excluded samples violating the rank equality with margins.
    pub violations: usize,
    /// Violating samples whose eigenvalue margins were too thin to count.
    pub weak_violations: usize,
    pub fibers: Vec<FiberRecord>,
}

/// Numerical rank together with a margin flag: the rank is "strong" when
/// every counted eigenvalue clears ten times the threshold (and everything
/// rejected sits at or below a tenth of it), so a ±10× change of `tau`
/// would not alter the count.
fn rank_with_margin(m: &FiberMatrix, tau: f64) -> (usize, bool) {
    let rank = numerical_rank(m, tau);
    let thr = tau * m.lambda_max().max(1.0);
    let accepted_ok = rank == 0 || m.eigvals[rank - 1] >= 10.0 * thr;
    let rejected_ok = rank == m.r() || m.eigvals[rank] <= 0.1 * thr;
    (rank, accepted_ok && rejected_ok)
}

fn digest_verdict(
    samples: usize,
    excluded: usize,
    violations: usize,
    weak_violations: usize,
) -> InvarianceVerdict {
    if (excluded as f64) > EXCLUSION_BUDGET * samples as f64 {
        InvarianceVerdict::Inconclusive
    } else if violations == 0 && weak_violations == 0 {
        InvarianceVerdict::Invariant
    } else if violations > 0 {
        InvarianceVerdict::NotInvariant
    } else {
        InvarianceVerdict::Inconclusive
    }
}

/// Decide `Γ`-invariance of the space generated by `set` by comparing
/// `rank G(ω)` with `Σ_f rank A(ω+f)` over one fundamental domain of `Λ*`.
/// For `Γ = ℝ^d` this delegates to [`check_translation_invariance`].
pub fn check_gamma_invariance(
    set: &GeneratorSet,
    gamma: &Group,
    grid: GridSpec,
    tau: f64,
) -> Result<InvarianceReport> {
    match gamma {
        Group::FullSpace { .. } => {
            if gamma.dim() != set.dim {
                return Err(Error::DimensionMismatch {
                    expected: set.dim,
                    got: gamma.dim(),
                });
            }
            return check_translation_invariance(set, grid, tau);
        }
        Group::Trivial { .. } => {
            return Err(Error::NotSuperGroup(
                "the trivial group contains no lattice".into(),
            ));
        }
        Group::Lattice { .. } => {}
    }
    if !set.lattice.is_subgroup_of(gamma)? {
        return Err(Error::NotSuperGroup(format!(
            "{} does not contain the generator lattice {}",
            gamma.to_literal(),
            set.lattice.to_literal()
        )));
    }
    let geom = SetGeometry::new(set)?;
    let dual_g = DualScan::for_group(&set.lattice)?;
    let dual_a = DualScan::for_group(gamma)?;
    let reps = coset_reps(&set.lattice, gamma)?.reps_f64();
    let domain = FundamentalDomain::for_dual_of(&set.lattice)?;
    let points = grid.points(&domain)?;

    let mut excluded = 0usize;
    let mut violations = 0usize;
    let mut weak_violations = 0usize;
    let mut fibers = Vec::new();
    'samples: for omega in &points {
        let g = assemble_fiber(set, &geom, &dual_g, omega)?;
        if g.near_boundary || g.trunc_error > TRUNC_EXCLUDE_THRESHOLD {
            excluded += 1;
            continue;
        }
        let (rank_g, mut strong) = rank_with_margin(&g, tau);
        let mut ranks_a = Vec::with_capacity(reps.len());
        let mut sum_a = 0usize;
        for f in &reps {
            let shifted: Vec<f64> = omega.iter().zip(f).map(|(w, fi)| w + fi).collect();
            let a = assemble_fiber(set, &geom, &dual_a, &shifted)?;
            if a.near_boundary || a.trunc_error > TRUNC_EXCLUDE_THRESHOLD {
                excluded += 1;
                continue 'samples;
            }
            let (rank_a, strong_a) = rank_with_margin(&a, tau);
            strong &= strong_a;
            sum_a += rank_a;
            ranks_a.push(rank_a);
        }
        let ok = rank_g == sum_a;
        if !ok {
            if strong {
                violations += 1;
            } else {
                weak_violations += 1;
            }
        }
        fibers.push(FiberRecord {
            omega: omega.clone(),
            rank_g,
            ranks_a,
            ok,
        });
    }
    Ok(InvarianceReport {
        verdict: digest_verdict(points.len(), excluded, violations, weak_violations),
        grid,
        tau,
        samples: points.len(),
        excluded,
        violations,
        weak_violations,
        fibers,
    })
}

/// Decide invariance under all real translations by comparing `rank G(ω)`
/// with the number of dual translates carrying a nonzero generator value
/// vector (`‖Φ̂(ω+f)‖² > τ`, so the criterion matches the rank of the
/// one-term outer product used for lattice fibers).
pub fn check_translation_invariance(
    set: &GeneratorSet,
    grid: GridSpec,
    tau: f64,
) -> Result<InvarianceReport> {
    let geom = SetGeometry::new(set)?;
    let dual_g = DualScan::for_group(&set.lattice)?;
    let fl = match &dual_g {
        DualScan::Lattice(fl) => fl.clone(),
        DualScan::Point => unreachable!("generator lattice is a lattice"),
    };
    let domain = FundamentalDomain::for_dual_of(&set.lattice)?;
    let points = grid.points(&domain)?;

    let mut excluded = 0usize;
    let mut violations = 0usize;
    let mut weak_violations = 0usize;
    let mut fibers = Vec::new();
    for omega in &points {
        let g = assemble_fiber(set, &geom, &dual_g, omega)?;
        if g.near_boundary || g.trunc_error > TRUNC_EXCLUDE_THRESHOLD {
            excluded += 1;
            continue;
        }
        let (rank_g, mut strong) = rank_with_margin(&g, tau);
        let mut ranks_a = Vec::new();
        let mut count = 0usize;
        for hit in enumerate_hits(&geom, &fl, omega)? {
            let v = set.eval_all(&hit.pos);
            let n2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            // a translate counts when the rank of its outer product is 1
            let nonzero = n2 > tau;
            strong &= n2 >= 10.0 * tau || n2 <= 0.1 * tau;
            let members = hit.count as usize;
            if nonzero {
                count += members;
                ranks_a.push(members);
            } else {
                ranks_a.push(0);
            }
        }
        let ok = rank_g == count;
        if !ok {
            if strong {
                violations += 1;
            } else {
                weak_violations += 1;
            }
        }
        fibers.push(FiberRecord {
            omega: omega.clone(),
            rank_g,
            ranks_a,
            ok,
        });
    }
    Ok(InvarianceReport {
        verdict: digest_verdict(points.len(), excluded, violations, weak_violations),
        grid,
        tau,
        samples: points.len(),
        excluded,
        violations,
        weak_violations,
        fibers,
    })
}

/// The essential supremum surrogate for the minimal number of generators:
/// the maximal Gramian rank over non-excluded samples.
pub fn minimal_generator_count(
    set: &GeneratorSet,
    grid: GridSpec,
    tau: f64,
) -> Result<usize> {
    let geom = SetGeometry::new(set)?;
    let dual = DualScan::for_group(&set.lattice)?;
    let domain = FundamentalDomain::for_dual_of(&set.lattice)?;
    let mut rho = 0usize;
    let mut seen = false;
    for omega in &grid.points(&domain)? {
        let g = assemble_fiber(set, &geom, &dual, omega)?;
        if g.near_boundary || g.trunc_error > TRUNC_EXCLUDE_THRESHOLD {
            continue;
        }
        seen = true;
        rho = rho.max(numerical_rank(&g, tau));
    }
    if !seen {
        return Err(Error::Config(
            "every grid sample was excluded; no rank evidence".into(),
        ));
    }
    Ok(rho)
}

/// One fiber of a reduced generator family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReducedFiber {
    pub omega: Vec<f64>,
    /// Index (into the original family) of the removed vector, when one
    /// lay in the span of the others at this fiber.
    pub removed: Option<usize>,
    /// Least-squares residual of the removed vector against the span of
    /// the kept ones (0 when nothing was removed).
    pub residual: f64,
    /// New names for the kept vectors, in order: `"g1' := phi1"`, ….
    pub relabeling: Vec<String>,
}

/// Fiberwise reduction of a rank-deficient generator family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReducedSet {
    pub grid: GridSpec,
    pub tau: f64,
    pub samples: usize,
    pub excluded: usize,
    pub fibers: Vec<ReducedFiber>,
}

/// Least-squares residual (a norm) of column `i` of the fiber-vector
/// matrix against the span of the other columns. The residual vector is
/// formed explicitly (`b − A c` after an SVD solve), so an exactly
/// dependent column yields a residual at rounding level rather than the
/// square root of it, as a Gramian-only formula would.
fn span_residual(m: &DMatrix<Complex64>, i: usize, tau: f64) -> f64 {
    let n = m.nrows();
    let r = m.ncols();
    if n == 0 || r == 1 {
        return if n == 0 { 0.0 } else { m.column(i).norm() };
    }
    let b = m.column(i).clone_owned();
    let mut a: DMatrix<Complex64> = DMatrix::zeros(n, r - 1);
    let mut k = 0;
    for j in 0..r {
        if j != i {
            a.set_column(k, &m.column(j));
            k += 1;
        }
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    if smax == 0.0 {
        return b.norm();
    }
    match svd.solve(&b, tau * smax) {
        Ok(c) => (&b - &a * c).norm(),
        Err(_) => b.norm(),
    }
}

/// Explicit fiber vectors at `omega`: one row per enumerated translate
/// (grouped translates carry a `√count` weight so inner products match
/// the assembled Gramian), one column per generator.
fn fiber_vector_matrix(
    set: &GeneratorSet,
    geom: &SetGeometry,
    fl: &crate::lattice::FloatLattice,
    omega: &[f64],
) -> Result<DMatrix<Complex64>> {
    let hits = enumerate_hits(geom, fl, omega)?;
    let r = set.r();
    let mut m: DMatrix<Complex64> = DMatrix::zeros(hits.len(), r);
    for (h, hit) in hits.iter().enumerate() {
        let v = set.eval_all(&hit.pos);
        let w = hit.count.sqrt();
        for (j, vj) in v.iter().enumerate() {
            m[(h, j)] = vj * w;
        }
    }
    Ok(m)
}

/// Remove, at each sampled fiber, the minimal-index generator vector that
/// lies in the span of the others, and relabel the remainder in order.
/// Errors with `AlreadyMinimal` when every sampled fiber has full rank.
pub fn reduce_generators(
    set: &GeneratorSet,
    grid: GridSpec,
    tau: f64,
) -> Result<ReducedSet> {
    let r = set.r();
    let geom = SetGeometry::new(set)?;
    let dual = DualScan::for_group(&set.lattice)?;
    let fl = match &dual {
        DualScan::Lattice(fl) => fl.clone(),
        DualScan::Point => unreachable!("generator lattice is a lattice"),
    };
    let domain = FundamentalDomain::for_dual_of(&set.lattice)?;
    let points = grid.points(&domain)?;
    let mut excluded = 0usize;
    let mut fibers = Vec::new();
    let mut any_removed = false;
    for omega in &points {
        let g = assemble_fiber(set, &geom, &dual, omega)?;
        if g.near_boundary || g.trunc_error > TRUNC_EXCLUDE_THRESHOLD {
            excluded += 1;
            continue;
        }
        let rank = numerical_rank(&g, tau);
        let mut removed = None;
        let mut residual = 0.0;
        if rank < r {
            let m = fiber_vector_matrix(set, &geom, &fl, omega)?;
            for i in 0..r {
                let res = span_residual(&m, i, tau);
                let norm_i = m.column(i).norm();
                if res <= tau * norm_i.max(1.0) {
                    removed = Some(i);
                    residual = res;
                    break;
                }
            }
        }
        let relabeling = match removed {
            Some(i) => (0..r)
                .filter(|&j| j != i)
                .enumerate()
                .map(|(k, j)| format!("g{}' := {}", k + 1, set.generators[j].label))
                .collect(),
            None => Vec::new(),
        };
        any_removed |= removed.is_some();
        fibers.push(ReducedFiber {
            omega: omega.clone(),
            removed,
            residual,
            relabeling,
        });
    }
    if !any_removed {
        return Err(Error::AlreadyMinimal(
            "every sampled fiber has full rank; nothing to remove".into(),
        ));
    }
    Ok(ReducedSet {
        grid,
        tau,
        samples: points.len(),
        excluded,
        fibers,
    })
}

/// A sample where the Gramian rank fell below the expected value.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RankDropSample {
    pub omega: Vec<f64>,
    pub rank: usize,
}

/// All non-excluded samples with `rank G(ω) < rho`.
pub fn rank_drop_locus(
    set: &GeneratorSet,
    grid: GridSpec,
    tau: f64,
    rho: usize,
) -> Result<Vec<RankDropSample>> {
    let geom = SetGeometry::new(set)?;
    let dual = DualScan::for_group(&set.lattice)?;
    let domain = FundamentalDomain::for_dual_of(&set.lattice)?;
    let mut out = Vec::new();
    for omega in &grid.points(&domain)? {
        let g = assemble_fiber(set, &geom, &dual, omega)?;
        if g.near_boundary || g.trunc_error > TRUNC_EXCLUDE_THRESHOLD {
            continue;
        }
        let rank = numerical_rank(&g, tau);
        if rank < rho {
            out.push(RankDropSample {
                omega: omega.clone(),
                rank,
            });
        }
    }
    Ok(out)
}

/// A persistent rank dip: a run of at least two adjacent samples whose
/// rank sits strictly below both flanking samples, all with strong
/// eigenvalue margins.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SemicontinuityFlag {
    /// Which matrix stream dipped: `"G"`, or `"A[k]"` for the k-th coset.
    pub stream: String,
    /// First sample of the dip run.
    pub omega: Vec<f64>,
    pub run_len: usize,
    pub rank_inside: usize,
    pub rank_before: usize,
    pub rank_after: usize,
}

/// Scan the rank sequences of `G` and of each coset fiber `A(·+f)` along
/// the grid (adjacent along the last axis) and flag persistent dips.
/// Single-sample dips are tolerated: ranks of continuous matrix fields may
/// drop on thin closed sets, and one sample is the grid picture of that.
pub fn semicontinuity_scan(
    set: &GeneratorSet,
    gamma: &Group,
    grid: GridSpec,
    tau: f64,
) -> Result<Vec<SemicontinuityFlag>> {
    let geom = SetGeometry::new(set)?;
    let dual_g = DualScan::for_group(&set.lattice)?;
    let domain = FundamentalDomain::for_dual_of(&set.lattice)?;
    let points = grid.points(&domain)?;

    // Assemble the rank streams: None marks an excluded or weak sample,
    // which breaks adjacency.
    let (labels, shifted_duals): (Vec<String>, Vec<(Vec<f64>, DualScan)>) = match gamma {
        Group::FullSpace { .. } => (
            vec!["G".into(), "A[0]".into()],
            vec![
                (vec![0.0; set.dim], dual_g.clone()),
                (vec![0.0; set.dim], DualScan::Point),
            ],
        ),
        Group::Lattice { .. } => {
            if !set.lattice.is_subgroup_of(gamma)? {
                return Err(Error::NotSuperGroup(format!(
                    "{} does not contain the generator lattice {}",
                    gamma.to_literal(),
                    set.lattice.to_literal()
                )));
            }
            let dual_a = DualScan::for_group(gamma)?;
            let mut labels = vec!["G".into()];
            let mut streams = vec![(vec![0.0; set.dim], dual_g.clone())];
            for (k, f) in coset_reps(&set.lattice, gamma)?.reps_f64().iter().enumerate() {
                labels.push(format!("A[{k}]"));
                streams.push((f.clone(), dual_a.clone()));
            }
            (labels, streams)
        }
        Group::Trivial { .. } => {
            return Err(Error::NotSuperGroup(
                "the trivial group contains no lattice".into(),
            ));
        }
    };

    let mut flags = Vec::new();
    let row = grid.samples_per_axis.max(1);
    for (label, (shift, dual)) in labels.iter().zip(&shifted_duals) {
        let mut ranks: Vec<Option<usize>> = Vec::with_capacity(points.len());
        for omega in &points {
            let x: Vec<f64> = omega.iter().zip(shift).map(|(w, f)| w + f).collect();
            let m = assemble_fiber(set, &geom, dual, &x)?;
            if m.near_boundary || m.trunc_error > TRUNC_EXCLUDE_THRESHOLD {
                ranks.push(None);
                continue;
            }
            let (rank, strong) = rank_with_margin(&m, tau);
            ranks.push(if strong { Some(rank) } else { None });
        }
        // walk each contiguous row (last axis fastest)
        for row_start in (0..points.len()).step_by(row) {
            let seg = &ranks[row_start..(row_start + row).min(points.len())];
            let mut i = 1usize;
            while i + 1 < seg.len() {
                let (Some(before), Some(inside)) = (seg[i - 1], seg[i]) else {
                    i += 1;
                    continue;
                };
                if inside >= before {
                    i += 1;
                    continue;
                }
                // extend the run of equal dipped rank
                let mut j = i;
                while j + 1 < seg.len() && seg[j + 1] == Some(inside) {
                    j += 1;
                }
                if j + 1 < seg.len() {
                    if let Some(after) = seg[j + 1] {
                        let run_len = j - i + 1;
                        if inside < after && run_len >= 2 {
                            flags.push(SemicontinuityFlag {
                                stream: label.clone(),
                                omega: points[row_start + i].clone(),
                                run_len,
                                rank_inside: inside,
                                rank_before: before,
                                rank_after: after,
                            });
                        }
                    }
                }
                i = j + 1;
            }
        }
    }
    Ok(flags)
}

/// Rank histogram of the positive fibers `A(ω)` over the grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstantRankReport {
    /// True when a single rank value occurs outside excluded samples.
    pub constant: bool,
    /// That single value, when `constant`.
    pub rank: Option<usize>,
    pub histogram: BTreeMap<usize, usize>,
    pub samples: usize,
    pub excluded: usize,
}

/// Tally `rank A(ω)` over one fundamental domain of `Λ*`. Intended for
/// fiber families already known to satisfy two-sided spectral bounds with
/// constant `s ≥ 1`; the scan reports whatever rank distribution it finds.
pub fn constant_rank_scan(
    set: &GeneratorSet,
    gamma: &Group,
    grid: GridSpec,
    s: f64,
    tau: f64,
) -> Result<ConstantRankReport> {
    if !(s >= 1.0) {
        return Err(Error::Config(format!(
            "spectral constant must be at least 1, got {s}"
        )));
    }
    if !set.lattice.is_subgroup_of(gamma)? {
        return Err(Error::NotSuperGroup(format!(
            "{} does not contain the generator lattice {}",
            gamma.to_literal(),
            set.lattice.to_literal()
        )));
    }
    let geom = SetGeometry::new(set)?;
    let dual = DualScan::for_group(gamma)?;
    let domain = FundamentalDomain::for_dual_of(&set.lattice)?;
    let points = grid.points(&domain)?;
    let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
    let mut excluded = 0usize;
    for omega in &points {
        let m = assemble_fiber(set, &geom, &dual, omega)?;
        if m.near_boundary || m.trunc_error > TRUNC_EXCLUDE_THRESHOLD {
            excluded += 1;
            continue;
        }
        *histogram.entry(numerical_rank(&m, tau)).or_insert(0) += 1;
    }
    let constant = histogram.len() == 1;
    let rank = if constant {
        histogram.keys().next().copied()
    } else {
        None
    };
    Ok(ConstantRankReport {
        constant,
        rank,
        histogram,
        samples: points.len(),
        excluded,
    })
}
