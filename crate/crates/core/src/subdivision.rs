//! Subdivision schemes on sequences of point clouds.
//!
//! [`wlr_refine`] is the Lane-Riesenfeld B-spline scheme with midpoint
//! averaging replaced by optimal-transport averaging. Each round doubles every
//! cloud, repeats the two boundary clouds until each occupies `M + 1` leading
//! (trailing) slots, and then runs `M` averaging passes, each of which maps a
//! sequence of length `L` to the `L - 1` midpoints of consecutive pairs. The
//! boundary repetition makes the first and last clouds exact fixed points,
//! and the output length after `R` rounds is `2^R (T + M - 1) + 2 - M` for an
//! input of `T + 1` clouds.
//!
//! [`four_point_refine`] is the interpolatory four-point scheme in the same
//! setting. [`lane_riesenfeld_linear`] is the classical scheme on vectors, kept
//! as an independent reference for the singleton-cloud case.

use std::ops::Deref;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesic::{geodesic_interpolant, ot_average};
use crate::measure::{DiscreteMeasure, RefinementConfig, TimedSequence};
use crate::ot::wasserstein_distance;

/// Default tension of the four-point scheme.
pub const FOUR_POINT_W: f64 = 1.0 / 16.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Wlr,
    FourPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefinementMeta {
    pub degree: usize,
    pub level: usize,
    pub scheme: Scheme,
    /// Number of clouds in the unrefined input.
    pub input_len: usize,
}

/// Output of a refinement scheme; dereferences to its clouds.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinedSequence {
    measures: Vec<DiscreteMeasure>,
    meta: RefinementMeta,
}

impl RefinedSequence {
    pub fn new(measures: Vec<DiscreteMeasure>, meta: RefinementMeta) -> Self {
        RefinedSequence { measures, meta }
    }

    pub fn meta(&self) -> &RefinementMeta {
        &self.meta
    }

    pub fn measures(&self) -> &[DiscreteMeasure] {
        &self.measures
    }

    pub fn into_measures(self) -> Vec<DiscreteMeasure> {
        self.measures
    }
}

impl Deref for RefinedSequence {
    type Target = [DiscreteMeasure];

    fn deref(&self) -> &[DiscreteMeasure] {
        &self.measures
    }
}

/// `2^R (T + M - 1) + 2 - M`, the number of clouds WLR returns.
pub fn expected_output_count(t: usize, r: usize, m: usize) -> usize {
    ((t + m - 1) << r) + 2 - m
}

/// Classical Lane-Riesenfeld refinement of points in R^d.
pub fn lane_riesenfeld_linear(points: &[Vec<f64>], r: usize, m: usize) -> Result<Vec<Vec<f64>>> {
    if points.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: points.len(),
        });
    }
    if m < 1 {
        return Err(Error::Config("degree must be at least 1".into()));
    }
    let mut y = points.to_vec();
    for _ in 0..r {
        let first = y[0].clone();
        let last = y[y.len() - 1].clone();
        let mut doubled = Vec::with_capacity(2 * y.len() + 2 * m);
        doubled.extend(std::iter::repeat_n(first, m - 1));
        for p in &y {
            doubled.push(p.clone());
            doubled.push(p.clone());
        }
        doubled.extend(std::iter::repeat_n(last, m - 1));
        y = doubled;
        for _ in 0..m {
            y = y
                .windows(2)
                .map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| 0.5 * (a + b)).collect())
                .collect();
        }
    }
    Ok(y)
}

/// Midpoints of consecutive pairs.
fn averaging_pass(seq: &[DiscreteMeasure], cfg: &RefinementConfig) -> Result<Vec<DiscreteMeasure>> {
    seq.par_windows(2)
        .map(|w| ot_average(&w[0], &w[1], 0.5, cfg))
        .collect()
}

/// One Wasserstein Lane-Riesenfeld round: double, pad the boundary, then
/// `cfg.degree` averaging passes.
pub fn wlr_round(seq: &[DiscreteMeasure], cfg: &RefinementConfig) -> Result<Vec<DiscreteMeasure>> {
    if seq.len() < 2 {
        return Err(Error::TooFewClouds {
            needed: 2,
            got: seq.len(),
        });
    }
    let m = cfg.degree;
    let first = &seq[0];
    let last = &seq[seq.len() - 1];
    let mut cur = Vec::with_capacity(2 * seq.len() + 2 * m);
    cur.extend(std::iter::repeat_n(first.clone(), m - 1));
    for mu in seq {
        cur.push(mu.clone());
        cur.push(mu.clone());
    }
    cur.extend(std::iter::repeat_n(last.clone(), m - 1));
    for _ in 0..m {
        cur = averaging_pass(&cur, cfg)?;
    }
    Ok(cur)
}

/// Refines plain clouds `cfg.level` times with WLR.
pub fn wlr_refine_measures(
    seq: &[DiscreteMeasure],
    cfg: &RefinementConfig,
) -> Result<RefinedSequence> {
    cfg.validate()?;
    check_dims(seq)?;
    if seq.len() < 2 {
        return Err(Error::TooFewClouds {
            needed: 2,
            got: seq.len(),
        });
    }
    let mut cur = seq.to_vec();
    for _ in 0..cfg.level {
        cur = wlr_round(&cur, cfg)?;
    }
    debug_assert_eq!(
        cur.len(),
        expected_output_count(seq.len() - 1, cfg.level, cfg.degree)
    );
    Ok(RefinedSequence::new(
        cur,
        RefinementMeta {
            degree: cfg.degree,
            level: cfg.level,
            scheme: Scheme::Wlr,
            input_len: seq.len(),
        },
    ))
}

/// Wasserstein Lane-Riesenfeld refinement of a timed sequence.
pub fn wlr_refine(seq: &TimedSequence, cfg: &RefinementConfig) -> Result<RefinedSequence> {
    wlr_refine_measures(&seq.measures(), cfg)
}

/// Every level `0..=max_level` of WLR refinement, starting from the input.
pub fn wlr_levels(
    seq: &[DiscreteMeasure],
    cfg: &RefinementConfig,
    max_level: usize,
) -> Result<Vec<Vec<DiscreteMeasure>>> {
    cfg.validate()?;
    check_dims(seq)?;
    let mut levels = vec![seq.to_vec()];
    for r in 0..max_level {
        let next = wlr_round(&levels[r], cfg)?;
        levels.push(next);
    }
    Ok(levels)
}

/// Interpolatory four-point refinement with tension `w`.
///
/// Each round repeats the first and last cloud once, inserts between every
/// interior pair `(j, j+1)` the cloud
/// `OT-av(OT-av(v_j, v_{j-1}, -2w), OT-av(v_{j+1}, v_{j+2}, -2w), 1/2)`, and
/// drops the two repeated boundary copies again. Input clouds therefore stay
/// at positions `k * 2^R` and the output has `2^R (L - 1) + 1` clouds.
pub fn four_point_refine(
    seq: &TimedSequence,
    r: usize,
    w: f64,
    cfg: &RefinementConfig,
) -> Result<RefinedSequence> {
    four_point_refine_measures(&seq.measures(), r, w, cfg)
}

pub fn four_point_refine_measures(
    seq: &[DiscreteMeasure],
    r: usize,
    w: f64,
    cfg: &RefinementConfig,
) -> Result<RefinedSequence> {
    cfg.validate()?;
    check_dims(seq)?;
    if seq.len() < 4 {
        return Err(Error::TooFewClouds {
            needed: 4,
            got: seq.len(),
        });
    }
    let w_max = (5f64.sqrt() - 1.0) / 8.0;
    if !(w > 0.0 && w < w_max) {
        return Err(Error::Config(format!(
            "four-point tension must lie in (0, {w_max:.6}), got {w}"
        )));
    }
    let mut cur = seq.to_vec();
    for _ in 0..r {
        cur = four_point_round(&cur, w, cfg)?;
    }
    Ok(RefinedSequence::new(
        cur,
        RefinementMeta {
            degree: 3,
            level: r,
            scheme: Scheme::FourPoint,
            input_len: seq.len(),
        },
    ))
}

fn four_point_round(
    seq: &[DiscreteMeasure],
    w: f64,
    cfg: &RefinementConfig,
) -> Result<Vec<DiscreteMeasure>> {
    let mut ext = Vec::with_capacity(seq.len() + 2);
    ext.push(seq[0].clone());
    ext.extend_from_slice(seq);
    ext.push(seq[seq.len() - 1].clone());

    let inserted: Vec<DiscreteMeasure> = (1..ext.len() - 2)
        .into_par_iter()
        .map(|j| {
            let left = ot_average(&ext[j], &ext[j - 1], -2.0 * w, cfg)?;
            let right = ot_average(&ext[j + 1], &ext[j + 2], -2.0 * w, cfg)?;
            ot_average(&left, &right, 0.5, cfg)
        })
        .collect::<Result<_>>()?;

    let mut out = Vec::with_capacity(2 * seq.len() - 1);
    for (k, mu) in seq.iter().enumerate() {
        out.push(mu.clone());
        if k < inserted.len() {
            out.push(inserted[k].clone());
        }
    }
    Ok(out)
}

/// Largest p-Wasserstein distance between consecutive clouds.
pub fn delta_sup(seq: &[DiscreteMeasure], p: f64) -> Result<f64> {
    if seq.len() < 2 {
        return Err(Error::TooFewClouds {
            needed: 2,
            got: seq.len(),
        });
    }
    let gaps: Vec<f64> = seq
        .par_windows(2)
        .map(|w| wasserstein_distance(&w[0], &w[1], p))
        .collect::<Result<_>>()?;
    Ok(gaps.into_iter().fold(0.0, f64::max))
}

/// `sup_t W_p(N_fine(t), N_coarse(t))` over `grid`, where `N_*` are the
/// piecewise geodesic interpolants of two refinement levels.
pub fn interpolant_gap(
    coarse: &[DiscreteMeasure],
    fine: &[DiscreteMeasure],
    grid: &[f64],
    cfg: &RefinementConfig,
) -> Result<f64> {
    let gaps: Vec<f64> = grid
        .par_iter()
        .map(|&t| {
            let a = geodesic_interpolant(coarse, t, cfg)?;
            let b = geodesic_interpolant(fine, t, cfg)?;
            wasserstein_distance(&a, &b, cfg.cost_exponent)
        })
        .collect::<Result<_>>()?;
    Ok(gaps.into_iter().fold(0.0, f64::max))
}

/// `n + 1` equally spaced parameters `0, 1/n, ..., 1`.
pub fn dyadic_grid(n: usize) -> Vec<f64> {
    (0..=n).map(|k| k as f64 / n as f64).collect()
}

fn check_dims(seq: &[DiscreteMeasure]) -> Result<()> {
    if let Some(first) = seq.first() {
        if let Some(bad) = seq.iter().find(|m| m.dim() != first.dim()) {
            return Err(Error::DimensionMismatch {
                expected: first.dim(),
                found: bad.dim(),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn singletons(values: &[f64]) -> Vec<DiscreteMeasure> {
        values
            .iter()
            .map(|&v| DiscreteMeasure::dirac(&[v]).unwrap())
            .collect()
    }

    #[test]
    fn linear_lr_hand_example() {
        // doubling with boundary padding: [0,0,0,4,4,4] -> [0,0,2,4,4] -> [0,1,3,4]
        let out = lane_riesenfeld_linear(&[vec![0.0], vec![4.0]], 1, 2).unwrap();
        let flat: Vec<f64> = out.into_iter().map(|p| p[0]).collect();
        assert_eq!(flat, vec![0.0, 1.0, 3.0, 4.0]);
    }

    #[test]
    fn linear_lr_zero_rounds_is_identity() {
        let pts = vec![vec![0.0, 1.0], vec![2.0, -1.0], vec![5.0, 5.0]];
        assert_eq!(lane_riesenfeld_linear(&pts, 0, 3).unwrap(), pts);
    }

    #[test]
    fn linear_lr_preserves_collinearity() {
        let pts: Vec<Vec<f64>> = (0..5)
            .map(|k| vec![k as f64, 2.0 * k as f64 + 1.0])
            .collect();
        for m in 1..=3 {
            for r in 0..=4 {
                for p in lane_riesenfeld_linear(&pts, r, m).unwrap() {
                    assert_abs_diff_eq!(p[1], 2.0 * p[0] + 1.0, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn linear_lr_needs_two_points() {
        assert!(matches!(
            lane_riesenfeld_linear(&[vec![0.0]], 1, 2),
            Err(Error::TooFewPoints { .. })
        ));
    }

    #[test]
    fn output_count_examples() {
        assert_eq!(expected_output_count(3, 7, 2), 512);
        for t in 1..5 {
            for m in 1..4 {
                assert_eq!(expected_output_count(t, 0, m), t + 1);
            }
        }
        assert_eq!(expected_output_count(1, 1, 1), 3);
    }

    #[test]
    fn wlr_count_law_and_endpoints() {
        let cfg = RefinementConfig::default();
        for t in 1..=3 {
            let seq: Vec<DiscreteMeasure> = (0..=t)
                .map(|k| DiscreteMeasure::from_scalars(&[k as f64, k as f64 + 0.5], None).unwrap())
                .collect();
            for m in 1..=3 {
                for r in 0..=3 {
                    let out = wlr_refine_measures(&seq, &cfg.with_degree(m).with_level(r)).unwrap();
                    assert_eq!(out.len(), expected_output_count(t, r, m));
                    assert_eq!(out[0], seq[0]);
                    assert_eq!(out[out.len() - 1], seq[t]);
                }
            }
        }
    }

    #[test]
    fn wlr_on_singletons_matches_linear() {
        let out = wlr_refine_measures(
            &singletons(&[0.0, 4.0]),
            &RefinementConfig::default().with_degree(2).with_level(1),
        )
        .unwrap();
        let got: Vec<f64> = out.iter().map(|m| m.point(0)[0]).collect();
        let want: Vec<f64> = lane_riesenfeld_linear(&[vec![0.0], vec![4.0]], 1, 2)
            .unwrap()
            .into_iter()
            .map(|p| p[0])
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn four_point_inserts_linear_midpoint() {
        // -(1/16)(0 + 3) + (9/16)(1 + 2) = 1.5
        let seq = singletons(&[0.0, 1.0, 2.0, 3.0]);
        let out = four_point_refine_measures(&seq, 1, FOUR_POINT_W, &RefinementConfig::default())
            .unwrap();
        assert_eq!(out.len(), 7);
        assert_abs_diff_eq!(out[3].point(0)[0], 1.5, epsilon = 1e-12);
        for k in 0..4 {
            assert_eq!(out[2 * k], seq[k]);
        }
    }

    #[test]
    fn four_point_zero_rounds_and_errors() {
        let seq = singletons(&[0.0, 1.0, 4.0, 9.0]);
        let cfg = RefinementConfig::default();
        let out = four_point_refine_measures(&seq, 0, FOUR_POINT_W, &cfg).unwrap();
        assert_eq!(out.measures(), &seq[..]);
        assert!(matches!(
            four_point_refine_measures(&seq[..3], 1, FOUR_POINT_W, &cfg),
            Err(Error::TooFewClouds { needed: 4, got: 3 })
        ));
        assert!(matches!(
            four_point_refine_measures(&seq, 1, 0.2, &cfg),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn four_point_keeps_inputs_at_dyadic_positions() {
        let seq = vec![
            DiscreteMeasure::from_points(&[vec![0.0, 0.0], vec![1.0, 0.0]], None).unwrap(),
            DiscreteMeasure::from_points(&[vec![1.0, 1.0]], None).unwrap(),
            DiscreteMeasure::from_points(&[vec![2.0, 0.5], vec![2.5, 1.5]], Some(vec![1.0, 3.0]))
                .unwrap(),
            DiscreteMeasure::from_points(&[vec![3.0, 0.0], vec![3.0, 2.0], vec![4.0, 1.0]], None)
                .unwrap(),
            DiscreteMeasure::from_points(&[vec![5.0, 1.0]], None).unwrap(),
        ];
        let r = 3;
        let out = four_point_refine_measures(&seq, r, FOUR_POINT_W, &RefinementConfig::default())
            .unwrap();
        assert_eq!(out.len(), (1 << r) * (seq.len() - 1) + 1);
        for (k, mu) in seq.iter().enumerate() {
            assert_eq!(&out[k << r], mu);
        }
    }

    #[test]
    fn delta_sup_examples() {
        let constant = vec![DiscreteMeasure::from_scalars(&[0.0, 1.0], None).unwrap(); 4];
        assert_eq!(delta_sup(&constant, 2.0).unwrap(), 0.0);
        let seq = singletons(&[0.0, 1.0, 3.0]);
        assert_abs_diff_eq!(delta_sup(&seq, 1.0).unwrap(), 2.0, epsilon = 1e-12);
        let mut rev = seq.clone();
        rev.reverse();
        assert_eq!(delta_sup(&rev, 1.0).unwrap(), delta_sup(&seq, 1.0).unwrap());
    }

    #[test]
    fn wlr_levels_matches_refine() {
        let seq = singletons(&[0.0, 2.0, 1.0]);
        let cfg = RefinementConfig::default().with_level(3);
        let levels = wlr_levels(&seq, &cfg, 3).unwrap();
        assert_eq!(levels.len(), 4);
        assert_eq!(
            levels[3],
            wlr_refine_measures(&seq, &cfg).unwrap().into_measures()
        );
    }
}
