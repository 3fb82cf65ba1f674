//! Support geometry for Fourier-domain generators.
//!
//! A generator's support along each axis is described by a small set of
//! explicit closed intervals plus zero or more *piece families*: arithmetic
//! progressions of congruent translated pieces.  Sparse series generators
//! produce families with up to millions of members, so the family form is
//! kept symbolic; fiber enumeration works directly on the arithmetic data
//! and only materializes pieces when it must.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A closed interval `[lo, hi]`.  Endpoints may be infinite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "interval endpoints out of order: [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Length of the overlap with `other` (0 when they only touch).
    pub fn overlap_len(&self, other: &Interval) -> f64 {
        (self.hi.min(other.hi) - self.lo.max(other.lo)).max(0.0)
    }

    pub fn translate(&self, by: f64) -> Interval {
        Interval::new(self.lo + by, self.hi + by)
    }

    pub fn reflect(&self) -> Interval {
        Interval::new(-self.hi, -self.lo)
    }

    /// Support of `x -> f(a x)` given this support of `f` (i.e. divide by `a`).
    pub fn compress(&self, a: f64) -> Interval {
        debug_assert!(a != 0.0);
        let (p, q) = (self.lo / a, self.hi / a);
        if p <= q {
            Interval::new(p, q)
        } else {
            Interval::new(q, p)
        }
    }
}

/// A sorted union of closed intervals with disjoint interiors.
/// Touching intervals are merged, so the representation is canonical.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IntervalUnion(Vec<Interval>);

impl IntervalUnion {
    pub fn empty() -> Self {
        IntervalUnion(Vec::new())
    }

    pub fn single(lo: f64, hi: f64) -> Self {
        IntervalUnion(vec![Interval::new(lo, hi)])
    }

    pub fn from_intervals(mut v: Vec<Interval>) -> Self {
        v.retain(|iv| iv.hi >= iv.lo);
        v.sort_by(|a, b| a.lo.partial_cmp(&b.lo).expect("NaN interval endpoint"));
        let mut merged: Vec<Interval> = Vec::with_capacity(v.len());
        for iv in v {
            match merged.last_mut() {
                Some(last) if iv.lo <= last.hi => {
                    last.hi = last.hi.max(iv.hi);
                }
                _ => merged.push(iv),
            }
        }
        IntervalUnion(merged)
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_bounded(&self) -> bool {
        self.0.iter().all(Interval::is_bounded)
    }

    pub fn contains(&self, x: f64) -> bool {
        // Binary search over sorted, disjoint intervals.
        let idx = self.0.partition_point(|iv| iv.hi < x);
        idx < self.0.len() && self.0[idx].contains(x)
    }

    pub fn total_len(&self) -> f64 {
        self.0.iter().map(Interval::len).sum()
    }

    /// Smallest closed interval containing the union (None when empty).
    pub fn hull(&self) -> Option<Interval> {
        match (self.0.first(), self.0.last()) {
            (Some(a), Some(b)) => Some(Interval::new(a.lo, b.hi)),
            _ => None,
        }
    }

    pub fn union(&self, other: &IntervalUnion) -> IntervalUnion {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        IntervalUnion::from_intervals(v)
    }

    pub fn intersect(&self, other: &IntervalUnion) -> IntervalUnion {
        let mut out = Vec::new();
        // Two-pointer sweep over the sorted interval lists.
        let (mut i, mut j) = (0usize, 0usize);
        while i < self.0.len() && j < other.0.len() {
            let a = self.0[i];
            let b = other.0[j];
            let lo = a.lo.max(b.lo);
            let hi = a.hi.min(b.hi);
            if lo <= hi {
                out.push(Interval::new(lo, hi));
            }
            if a.hi <= b.hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        IntervalUnion(out)
    }

    /// Total length of the overlap with `other` (interiors only; touching
    /// endpoints contribute zero).
    pub fn overlap_len(&self, other: &IntervalUnion) -> f64 {
        self.intersect(other).total_len()
    }

    pub fn translate(&self, by: f64) -> IntervalUnion {
        IntervalUnion(self.0.iter().map(|iv| iv.translate(by)).collect())
    }

    pub fn reflect(&self) -> IntervalUnion {
        let mut v: Vec<Interval> = self.0.iter().map(Interval::reflect).collect();
        v.reverse();
        IntervalUnion(v)
    }

    pub fn compress(&self, a: f64) -> IntervalUnion {
        IntervalUnion::from_intervals(self.0.iter().map(|iv| iv.compress(a)).collect())
    }

    /// Distance from `x` to the nearest interval endpoint in the union.
    pub fn boundary_distance(&self, x: f64) -> f64 {
        let mut best = f64::INFINITY;
        for iv in &self.0 {
            best = best.min((x - iv.lo).abs()).min((x - iv.hi).abs());
        }
        best
    }
}

/// An arithmetic progression of `count` congruent closed pieces
/// `[start + m*spacing, start + m*spacing + width]`, `m = 0 .. count`.
///
/// Families arise from sparse series generators, where a single dyadic
/// level contributes up to `4^j` identical translated windows.  `width`
/// never exceeds `spacing`, so distinct pieces of one family have disjoint
/// interiors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PieceFamily {
    pub start: f64,
    pub spacing: f64,
    pub count: u64,
    pub width: f64,
}

impl PieceFamily {
    pub fn new(start: f64, spacing: f64, count: u64, width: f64) -> Self {
        debug_assert!(spacing > 0.0 && count >= 1 && width >= 0.0);
        debug_assert!(width <= spacing, "family pieces must not self-overlap");
        PieceFamily {
            start,
            spacing,
            count,
            width,
        }
    }

    /// Closed hull `[start, start + (count-1)*spacing + width]`.
    pub fn hull(&self) -> Interval {
        Interval::new(
            self.start,
            self.start + (self.count - 1) as f64 * self.spacing + self.width,
        )
    }

    pub fn piece(&self, m: u64) -> Interval {
        debug_assert!(m < self.count);
        let lo = self.start + m as f64 * self.spacing;
        Interval::new(lo, lo + self.width)
    }

    pub fn translate(&self, by: f64) -> PieceFamily {
        PieceFamily {
            start: self.start + by,
            ..*self
        }
    }

    /// Mirror image: the reflected family, re-indexed so pieces are again
    /// listed left to right.
    pub fn reflect(&self) -> PieceFamily {
        let hull = self.hull();
        PieceFamily {
            start: -hull.hi,
            ..*self
        }
    }

    /// Family for `x -> f(a x)`: all geometry divides by `|a|`.
    pub fn compress(&self, a: f64) -> PieceFamily {
        let s = a.abs();
        let f = PieceFamily {
            start: self.start / s,
            spacing: self.spacing / s,
            count: self.count,
            width: self.width / s,
        };
        if a < 0.0 {
            f.reflect()
        } else {
            f
        }
    }

    /// Total length covered by the family's pieces.
    pub fn total_len(&self) -> f64 {
        self.count as f64 * self.width
    }

    /// Exact overlap length with a single interval.
    pub fn overlap_with_interval(&self, iv: &Interval) -> f64 {
        if !iv.is_bounded() {
            let h = self.hull();
            let capped = Interval::new(iv.lo.max(h.lo), iv.hi.min(h.hi));
            if capped.lo > capped.hi {
                return 0.0;
            }
            return self.overlap_with_interval(&capped);
        }
        // Pieces with index in [m_lo, m_hi] can meet iv.
        let m_lo = ((iv.lo - self.start - self.width) / self.spacing).floor().max(0.0) as i64;
        let m_hi = ((iv.hi - self.start) / self.spacing).ceil() as i64;
        let mut total = 0.0;
        for m in m_lo.max(0)..=m_hi.min(self.count as i64 - 1) {
            if m < 0 {
                continue;
            }
            total += self.piece(m as u64).overlap_len(iv);
        }
        total
    }

    /// Exact overlap length with another family when both spacings agree
    /// (the common case: all series families in one generator set share the
    /// integer spacing `n1`).  Returns `None` when spacings differ and the
    /// hulls intersect, i.e. when the exact answer would require a full
    /// materialization.
    pub fn overlap_with_family(&self, other: &PieceFamily) -> Option<f64> {
        if self.hull().overlap_len(&other.hull()) == 0.0 {
            return Some(0.0);
        }
        if (self.spacing - other.spacing).abs() > 1e-12 * self.spacing.max(other.spacing) {
            return None;
        }
        let s = self.spacing;
        // Piece m of self is [a + m s, a + m s + w1]; piece m' of other is
        // [b + m' s, b + m' s + w2].  Overlap depends only on
        // delta = (b - a) + (m' - m) s, i.e. on k = m' - m.  For each k with
        // index ranges intersecting, the per-pair overlap is constant.
        let a = self.start;
        let b = other.start;
        // Candidate k values: those with delta in (-w2, w1), i.e. pieces
        // close enough to overlap.
        let k_lo = ((a - b - other.width) / s).floor() as i64;
        let k_hi = ((a - b + self.width) / s).ceil() as i64;
        let mut total = 0.0;
        for k in k_lo..=k_hi {
            // delta = offset of other's piece relative to self's piece
            let delta = b - a + k as f64 * s;
            let per_pair = Interval::new(0.0, self.width)
                .overlap_len(&Interval::new(delta, delta + other.width));
            if per_pair == 0.0 {
                continue;
            }
            // Count pairs (m, m') with m' - m = k, 0 <= m < count1, 0 <= m' < count2.
            let m_min = 0i64.max(-k);
            let m_max = (self.count as i64 - 1).min(other.count as i64 - 1 - k);
            if m_max >= m_min {
                total += (m_max - m_min + 1) as f64 * per_pair;
            }
        }
        Some(total)
    }

    /// Materialize the family into explicit intervals, refusing above `cap`.
    pub fn materialize(&self, cap: u64) -> Result<Vec<Interval>> {
        if self.count > cap {
            return Err(Error::Config(format!(
                "piece family with {} members exceeds materialization cap {cap}",
                self.count
            )));
        }
        Ok((0..self.count).map(|m| self.piece(m)).collect())
    }
}

/// Support of a generator along one axis: explicit intervals plus families.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AxisSupport {
    pub explicit: IntervalUnion,
    pub families: Vec<PieceFamily>,
}

impl AxisSupport {
    pub fn from_union(u: IntervalUnion) -> Self {
        AxisSupport {
            explicit: u,
            families: Vec::new(),
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.explicit.is_bounded()
    }

    pub fn is_empty(&self) -> bool {
        self.explicit.is_empty() && self.families.is_empty()
    }

    /// Closed hull over explicit intervals and family hulls.
    pub fn hull(&self) -> Option<Interval> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        if let Some(h) = self.explicit.hull() {
            lo = lo.min(h.lo);
            hi = hi.max(h.hi);
        }
        for f in &self.families {
            let h = f.hull();
            lo = lo.min(h.lo);
            hi = hi.max(h.hi);
        }
        if lo.is_infinite() && lo > 0.0 {
            None
        } else {
            Some(Interval::new(lo, hi))
        }
    }

    pub fn translate(&self, by: f64) -> AxisSupport {
        AxisSupport {
            explicit: self.explicit.translate(by),
            families: self.families.iter().map(|f| f.translate(by)).collect(),
        }
    }

    pub fn reflect(&self) -> AxisSupport {
        AxisSupport {
            explicit: self.explicit.reflect(),
            families: self.families.iter().map(PieceFamily::reflect).collect(),
        }
    }

    pub fn compress(&self, a: f64) -> AxisSupport {
        AxisSupport {
            explicit: self.explicit.compress(a),
            families: self.families.iter().map(|f| f.compress(a)).collect(),
        }
    }

    pub fn union(&self, other: &AxisSupport) -> AxisSupport {
        let mut families = self.families.clone();
        families.extend_from_slice(&other.families);
        AxisSupport {
            explicit: self.explicit.union(&other.explicit),
            families,
        }
    }

    /// Exact overlap length with another axis support.  `None` when an
    /// exact family-vs-family answer is unavailable without materializing
    /// incommensurate families.
    pub fn overlap_len(&self, other: &AxisSupport) -> Option<f64> {
        let mut total = self.explicit.overlap_len(&other.explicit);
        for f in &self.families {
            for iv in other.explicit.intervals() {
                total += f.overlap_with_interval(iv);
            }
        }
        for f in &other.families {
            for iv in self.explicit.intervals() {
                total += f.overlap_with_interval(iv);
            }
        }
        for f in &self.families {
            for g in &other.families {
                total += f.overlap_with_family(g)?;
            }
        }
        Some(total)
    }

    /// Flatten to a canonical interval union, refusing above `cap` total
    /// materialized pieces.
    pub fn flatten(&self, cap: u64) -> Result<IntervalUnion> {
        let mut v: Vec<Interval> = self.explicit.intervals().to_vec();
        let mut budget = cap.saturating_sub(v.len() as u64);
        for f in &self.families {
            let pieces = f.materialize(budget)?;
            budget = budget.saturating_sub(pieces.len() as u64);
            v.extend(pieces);
        }
        Ok(IntervalUnion::from_intervals(v))
    }

    /// Distance from `x` to the nearest piece boundary (explicit or family).
    pub fn boundary_distance(&self, x: f64) -> f64 {
        let mut best = self.explicit.boundary_distance(x);
        for f in &self.families {
            // Nearest piece index to x.
            let m = ((x - f.start) / f.spacing).round();
            for mm in [m - 1.0, m, m + 1.0] {
                if mm >= 0.0 && mm < f.count as f64 {
                    let lo = f.start + mm * f.spacing;
                    best = best.min((x - lo).abs()).min((x - (lo + f.width)).abs());
                }
            }
        }
        best
    }
}

/// A periodic band of fiber offsets where a truncated series parks the mass
/// it discarded.  For any point whose coordinate, reduced modulo `period`,
/// lies in `[lo, hi]`, fiber sums over lattices commensurate with `period`
/// may miss up to `mass` of squared magnitude.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailZone {
    pub period: f64,
    pub lo: f64,
    pub hi: f64,
    pub mass: f64,
}

impl TailZone {
    /// Does the residue of `x` modulo `period` fall inside `[lo, hi]`?
    pub fn covers(&self, x: f64) -> bool {
        let r = x.rem_euclid(self.period);
        // The zone interval is stored with 0 <= lo <= hi < period after
        // normalization, but guard against wrap anyway.
        if self.lo <= self.hi {
            self.lo <= r && r <= self.hi
        } else {
            r >= self.lo || r <= self.hi
        }
    }

    pub fn translate(&self, by: f64) -> TailZone {
        let lo = (self.lo + by).rem_euclid(self.period);
        let hi = lo + (self.hi - self.lo).min(self.period);
        if hi < self.period {
            TailZone { lo, hi, ..*self }
        } else {
            // Wrapped: store as a wrapping zone (lo > hi).
            TailZone {
                lo,
                hi: hi - self.period,
                ..*self
            }
        }
    }

    pub fn reflect(&self) -> TailZone {
        let width = if self.lo <= self.hi {
            self.hi - self.lo
        } else {
            self.period - self.lo + self.hi
        };
        let lo = (-self.hi).rem_euclid(self.period);
        let hi = lo + width;
        if hi < self.period {
            TailZone { lo, hi, ..*self }
        } else {
            TailZone {
                lo,
                hi: hi - self.period,
                ..*self
            }
        }
    }

    pub fn compress(&self, a: f64) -> TailZone {
        let s = a.abs();
        let z = TailZone {
            period: self.period / s,
            lo: self.lo / s,
            hi: self.hi / s,
            mass: self.mass,
        };
        if a < 0.0 {
            z.reflect()
        } else {
            z
        }
    }
}

/// Truncation metadata for a generator: a global sup-norm bound on the
/// discarded part, plus per-axis zones where fiber sums lose mass.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TailInfo {
    /// Pointwise bound: |ideal - truncated| <= sup_bound everywhere.
    pub sup_bound: f64,
    /// Per-axis tail zones (outer Vec indexed by axis).
    pub zones: Vec<Vec<TailZone>>,
}

impl TailInfo {
    pub fn exact(dim: usize) -> Self {
        TailInfo {
            sup_bound: 0.0,
            zones: vec![Vec::new(); dim],
        }
    }

    pub fn is_exact(&self) -> bool {
        self.sup_bound == 0.0 && self.zones.iter().all(Vec::is_empty)
    }
}
