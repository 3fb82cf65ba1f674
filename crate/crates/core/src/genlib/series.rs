//! Sparse dyadic series generators.
//!
//! A family of real, even, compactly supported (after truncation)
//! Fourier-domain generators indexed by `index >= 1`, built from the level
//! windows in [`super::bump`].  Generator `index` has a *block shift*
//! `L = 2*index - 2` and consists of
//!
//! * a block of `4^L` copies of the central window `h_level(0, ·)` placed
//!   at offsets `n1 * (gamma(L) + l)`, amplitude `2^-L` (times `1/sqrt 2`
//!   when `L >= 1`, where the block is split between the two mirror
//!   halves), and
//! * for each dyadic level `j >= 1`, `4^(j+L)` copies of `h_level(j, ·)`
//!   at offsets `n1 * (gamma(j+L) + l)`, amplitude `2^-(j+L)`,
//!
//! extended evenly to the negative axis.  Here `gamma(j) = (4^j - 1)/3`,
//! so level hulls are nested end to end and never overlap.  Amplitudes
//! shrink like `2^-j` while copy counts grow like `4^j`: the squared
//! window shapes telescope (`h_j^2 + h_{j+1}^2 = 1` on the shared strip),
//! so integer fiber sums equal 1 exactly wherever the retained levels
//! cover the fiber offset — sparsity along the axis, full mass along each
//! fiber.  Distinct indices have disjoint supports, touching at most at
//! endpoints where the windows vanish.
//!
//! Truncating at `levels = J` discards every level `j > J`.  All discarded
//! pieces sit at fiber offsets within `2^-(J+1)` of `1/2` (mod 1), so the
//! loss is confined to a narrow periodic band recorded as a
//! [`TailZone`]; outside that band the truncated fiber sums are exact.
//! The pointwise sup of the discarded part is the amplitude tail sum
//! `2^-(J+L)`.

use super::bump::{exp2_u32, h_level, h_support};
use super::support::{AxisSupport, IntervalUnion, PieceFamily, TailInfo, TailZone};
use crate::error::{Error, Result};
use std::f64::consts::FRAC_1_SQRT_2;

/// Largest admissible total dyadic depth (`levels` plus the block shift).
/// Keeps piece positions well below 2^53 so that offset arithmetic stays
/// exact in f64.
pub const MAX_TOTAL_DEPTH: u32 = 24;

/// `gamma(j) = (4^j - 1) / 3`: the cumulative piece count below level `j`,
/// and the offset multiplier where level `j` starts.
#[inline]
pub fn gamma(j: u32) -> u64 {
    ((1u64 << (2 * j)) - 1) / 3
}

/// `4^j` as u64.
#[inline]
pub fn pow4(j: u32) -> u64 {
    1u64 << (2 * j)
}

/// Block shift of generator `index`: `L = 2*index - 2`.
#[inline]
pub fn block_shift(index: u32) -> u32 {
    2 * index - 2
}

pub fn validate_series(index: u32, n1: u32, levels: u32) -> Result<()> {
    if index == 0 {
        return Err(Error::Config("series generator index starts at 1".into()));
    }
    if n1 == 0 {
        return Err(Error::Config("series spacing n1 must be >= 1".into()));
    }
    if levels == 0 {
        return Err(Error::Config("series must keep at least one level".into()));
    }
    let total = levels + block_shift(index) + 1;
    if total > MAX_TOTAL_DEPTH {
        return Err(Error::Config(format!(
            "series depth {total} (levels + block shift) exceeds the supported maximum {MAX_TOTAL_DEPTH}"
        )));
    }
    Ok(())
}

/// Amplitude of the central-window block of generator `index`.
#[inline]
fn block_amp(big_l: u32) -> f64 {
    if big_l == 0 {
        1.0
    } else {
        FRAC_1_SQRT_2 / exp2_u32(big_l)
    }
}

/// Locate which translated copy of a level window contains `w`, if any.
///
/// Pieces sit at `n1 * (offset_gamma + l) + [lo, hi]` for `l` in
/// `[0, count)`, where `[lo, hi]` is the window support with
/// `hi - lo <= 1/2 <= n1`.  Returns the in-window coordinate.
#[inline]
fn locate_piece(w: f64, n1: f64, offset_gamma: u64, count: u64, lo: f64, hi: f64) -> Option<f64> {
    // Candidate index from the left endpoint; the window is narrower than
    // the spacing, so at most one candidate (plus its neighbor, guarding
    // exact boundaries) can contain w.
    let base = (w - lo) / n1;
    if base < 0.0 {
        return None;
    }
    let idx = base.floor();
    for cand in [idx, idx - 1.0] {
        if cand < offset_gamma as f64 {
            continue;
        }
        let l = cand as u64 - offset_gamma;
        if l >= count {
            continue;
        }
        let theta = w - n1 * cand;
        if theta >= lo && theta <= hi {
            return Some(theta);
        }
    }
    None
}

/// Evaluate series generator `index` at `omega` (even in `omega`).
pub fn series_eval(index: u32, n1: u32, levels: u32, omega: f64) -> f64 {
    let n1f = f64::from(n1);
    let big_l = block_shift(index);
    let w = omega.abs();
    let mut acc = 0.0;
    // Central-window block.
    if let Some(theta) = locate_piece(w, n1f, gamma(big_l), pow4(big_l), -0.25, 0.25) {
        acc += block_amp(big_l) * h_level(0, theta);
    }
    // Dyadic levels.
    for j in 1..=levels {
        let (lo, hi) = h_support(j);
        if let Some(theta) = locate_piece(w, n1f, gamma(j + big_l), pow4(j + big_l), lo, hi) {
            acc += h_level(j, theta) / exp2_u32(j + big_l);
        }
    }
    acc
}

/// Axis support of series generator `index`.
pub fn series_support(index: u32, n1: u32, levels: u32) -> AxisSupport {
    let n1f = f64::from(n1);
    let big_l = block_shift(index);
    let mut explicit = IntervalUnion::empty();
    let mut families = Vec::with_capacity(2 * (levels as usize + 1));
    if big_l == 0 {
        // Single central piece, symmetric about 0: explicit, no mirror.
        explicit = IntervalUnion::single(-0.25, 0.25);
    } else {
        let block = PieceFamily::new(
            n1f * gamma(big_l) as f64 - 0.25,
            n1f,
            pow4(big_l),
            0.5,
        );
        families.push(block);
        families.push(block.reflect());
    }
    for j in 1..=levels {
        let (lo, hi) = h_support(j);
        let fam = PieceFamily::new(
            n1f * gamma(j + big_l) as f64 + lo,
            n1f,
            pow4(j + big_l),
            hi - lo,
        );
        families.push(fam);
        families.push(fam.reflect());
    }
    AxisSupport { explicit, families }
}

/// Truncation metadata for series generator `index` truncated at `levels`.
///
/// Discarded levels `j > levels` occupy fiber offsets in
/// `[1/2 - 2^-(levels+1), 1/2)` and their mirror images, so the loss band
/// has half-width `2^-(levels+1)` around `1/2` (period 1).  Within the
/// band the discarded squared-sum mass is at most 1 (the full function has
/// unit fiber mass); outside it the truncated fiber sums are exact.
pub fn series_tail(index: u32, levels: u32) -> TailInfo {
    let big_l = block_shift(index);
    let half_band = 1.0 / exp2_u32(levels + 1);
    TailInfo {
        sup_bound: 1.0 / exp2_u32(levels + big_l),
        zones: vec![vec![TailZone {
            period: 1.0,
            lo: 0.5 - half_band,
            hi: 0.5 + half_band,
            mass: 1.0,
        }]],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genlib::bump::h_peak;

    #[test]
    fn gamma_values() {
        let expected: [u64; 9] = [1, 5, 21, 85, 341, 1365, 5461, 21845, 87381];
        for (j, &g) in expected.iter().enumerate() {
            assert_eq!(gamma(j as u32 + 1), g, "gamma({})", j + 1);
        }
        assert_eq!(gamma(0), 0);
    }

    /// Direct, unoptimized summation over all pieces — the oracle.
    fn series_naive(index: u32, n1: u32, levels: u32, omega: f64) -> f64 {
        let n1f = f64::from(n1);
        let big_l = block_shift(index);
        let w = omega.abs();
        let mut acc = 0.0;
        for l in 0..pow4(big_l) {
            let c = n1f * (gamma(big_l) + l) as f64;
            acc += block_amp(big_l) * h_level(0, w - c);
        }
        for j in 1..=levels {
            let amp = 1.0 / exp2_u32(j + big_l);
            for l in 0..pow4(j + big_l) {
                let c = n1f * (gamma(j + big_l) + l) as f64;
                acc += amp * h_level(j, w - c);
            }
        }
        acc
    }

    #[test]
    fn first_generator_matches_naive_sum() {
        for n1 in [1u32, 2, 3] {
            let n1f = f64::from(n1);
            let levels = 4;
            // Hit every region: center, each level's pieces (first, middle,
            // last, peak), gaps, far outside, and both signs.
            let mut points = vec![0.0, 0.1, -0.2, 0.25, 0.3, 1e6];
            for j in 1..=levels {
                let (lo, hi) = h_support(j);
                for l in [0, 1, pow4(j) / 2, pow4(j) - 1] {
                    let base = n1f * (gamma(j) + l) as f64;
                    points.extend([
                        base + lo,
                        base + lo + 0.01,
                        base + h_peak(j),
                        base + hi,
                        base + hi + 0.2,
                        -(base + h_peak(j)),
                    ]);
                }
            }
            for &w in &points {
                let fast = series_eval(1, n1, levels, w);
                let slow = series_naive(1, n1, levels, w);
                assert!(
                    (fast - slow).abs() <= 1e-15 * (1.0 + slow.abs()),
                    "n1={n1} omega={w}: fast {fast} vs naive {slow}"
                );
            }
        }
    }

    #[test]
    fn second_generator_matches_naive_sum() {
        let (index, n1, levels) = (2u32, 2u32, 3u32);
        let n1f = f64::from(n1);
        let big_l = block_shift(index);
        let mut points = vec![0.0, 1.0, 5.0, n1f * gamma(big_l) as f64 - 1.0];
        for l in [0, 7, pow4(big_l) - 1] {
            let base = n1f * (gamma(big_l) + l) as f64;
            points.extend([base, base + 0.2, base - 0.25, -(base + 0.1)]);
        }
        for j in 1..=levels {
            let (lo, hi) = h_support(j);
            for l in [0, pow4(j + big_l) - 1] {
                let base = n1f * (gamma(j + big_l) + l) as f64;
                points.extend([
                    base + lo + 0.001,
                    base + h_peak(j),
                    base + hi,
                    -(base + h_peak(j)),
                ]);
            }
        }
        for &w in &points {
            let fast = series_eval(index, n1, levels, w);
            let slow = series_naive(index, n1, levels, w);
            assert!(
                (fast - slow).abs() <= 1e-15 * (1.0 + slow.abs()),
                "omega={w}: fast {fast} vs naive {slow}"
            );
        }
    }

    #[test]
    fn eval_is_even() {
        for &w in &[0.3, 2.25, 10.4, 170.7, 681.1] {
            assert_eq!(series_eval(2, 2, 4, w), series_eval(2, 2, 4, -w));
            assert_eq!(series_eval(1, 2, 4, w), series_eval(1, 2, 4, -w));
        }
    }

    #[test]
    fn support_families_are_disjoint_and_bound_the_mass() {
        for (index, n1, levels) in [(1u32, 2u32, 5u32), (2, 2, 4), (1, 1, 4), (3, 1, 3)] {
            let sup = series_support(index, n1, levels);
            // Families pairwise interior-disjoint, and vs the explicit part:
            // the self-overlap of the whole support equals its total length
            // exactly when no two parts overlap.
            let total = sup.overlap_len(&sup).expect("commensurate families");
            let self_len: f64 = sup.explicit.total_len()
                + sup.families.iter().map(PieceFamily::total_len).sum::<f64>();
            assert!(
                (total - self_len).abs() < 1e-9,
                "index {index}: self-intersection {total} vs length {self_len}"
            );
            // Values vanish outside the support.
            let flat = sup.flatten(3_000_000).unwrap();
            for iv in flat.intervals().iter().take(40) {
                let outside = iv.hi + 1e-4;
                if !flat.contains(outside) {
                    assert_eq!(
                        series_eval(index, n1, levels, outside),
                        0.0,
                        "nonzero outside support at {outside}"
                    );
                }
            }
        }
    }

    #[test]
    fn integer_fiber_sum_is_one_off_the_tail_band() {
        // For n1 = 2 and integer offsets the retained levels tile every
        // fiber offset outside the band around 1/2; the squared sums
        // telescope to exactly 1.
        let (n1, levels) = (2u32, 4u32);
        let hull = 2.0 * gamma(levels + 1) as f64 + 1.0;
        let band = 1.0 / exp2_u32(levels + 1);
        for &theta in &[0.0, 0.07, 0.23, 0.25, 0.31, 0.44, 0.5 - 1.5 * band, 0.61, 0.76, 0.93] {
            let mut sum = 0.0;
            let mut l = -hull;
            while l <= hull {
                sum += series_eval(1, n1, levels, theta + l).powi(2);
                l += 1.0;
            }
            assert!(
                (sum - 1.0).abs() < 1e-12,
                "fiber sum at offset {theta}: {sum}"
            );
        }
        // Inside the band the truncated sum drops below 1 (mass was lost).
        let mut sum_mid = 0.0;
        let mut l = -hull;
        while l <= hull {
            sum_mid += series_eval(1, n1, levels, 0.5 + l).powi(2);
            l += 1.0;
        }
        assert!(
            sum_mid < 0.5,
            "fiber sum at the band center should collapse, got {sum_mid}"
        );
    }

    #[test]
    fn second_generator_fiber_sum_is_one_off_the_tail_band() {
        let (index, n1, levels) = (2u32, 2u32, 4u32);
        let big_l = block_shift(index);
        let hull = 2.0 * gamma(levels + big_l + 1) as f64 + 1.0;
        for &theta in &[0.0, 0.1, 0.26, 0.4, 0.67, 0.85] {
            let mut sum = 0.0;
            let mut l = -hull;
            while l <= hull {
                sum += series_eval(index, n1, levels, theta + l).powi(2);
                l += 1.0;
            }
            // Tolerance reflects cancellation noise recovering the in-window
            // coordinate at offsets of order gamma(levels + block shift).
            assert!(
                (sum - 1.0).abs() < 1e-10,
                "fiber sum at offset {theta}: {sum}"
            );
        }
    }

    #[test]
    fn higher_generators_vanish_near_origin() {
        let (index, n1, levels) = (2u32, 2u32, 6u32);
        let first = f64::from(n1) * gamma(block_shift(index)) as f64 - 0.25;
        assert_eq!(first, 2.0 * 5.0 - 0.25);
        let mut w = 0.0;
        while w < first {
            assert_eq!(series_eval(index, n1, levels, w), 0.0, "nonzero at {w}");
            assert_eq!(series_eval(index, n1, levels, -w), 0.0);
            w += 0.37;
        }
    }

    #[test]
    fn tail_sup_bounds() {
        assert_eq!(series_tail(1, 8).sup_bound, 1.0 / 256.0);
        assert_eq!(series_tail(2, 8).sup_bound, 1.0 / 1024.0);
        let info = series_tail(1, 8);
        let z = &info.zones[0][0];
        assert!(z.covers(0.5) && z.covers(0.5 - 0.9 / 512.0) && !z.covers(0.49));
    }

    #[test]
    fn parameter_validation() {
        assert!(validate_series(1, 0, 4).is_err());
        assert!(validate_series(1, 2, 0).is_err());
        assert!(validate_series(1, 2, 30).is_err());
        assert!(validate_series(0, 2, 4).is_err());
        assert!(validate_series(1, 2, 8).is_ok());
        assert!(validate_series(2, 2, 8).is_ok());
        assert!(validate_series(9, 2, 12).is_err());
    }
}
