//! Averaging of point clouds along optimal-transport geodesics.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::measure::{DiscreteMeasure, RefinementConfig};
use crate::ot::optimal_coupling;

/// Displacement interpolation between `a` and `b` at parameter `alpha`.
///
/// Every plan entry above `cfg.prune_threshold` becomes an atom at
/// `(1 - alpha) x_i + alpha y_j` carrying the entry's mass; masses are then
/// renormalized and coincident atoms merged. Values of `alpha` outside
/// `[0, 1]` extrapolate along the same plan.
pub fn ot_average(
    a: &DiscreteMeasure,
    b: &DiscreteMeasure,
    alpha: f64,
    cfg: &RefinementConfig,
) -> Result<DiscreteMeasure> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    if !alpha.is_finite() {
        return Err(Error::NonFinite("averaging parameter"));
    }
    if !(0.0..1.0).contains(&cfg.prune_threshold) {
        return Err(Error::Config(format!(
            "prune threshold must lie in [0, 1), got {}",
            cfg.prune_threshold
        )));
    }
    // the constant curve
    if a == b {
        return Ok(a.clone());
    }

    let coupling = optimal_coupling(a, b, cfg.cost_exponent)?;
    let entries: Vec<(usize, usize, f64)> = coupling.support_above(cfg.prune_threshold).collect();
    if entries.is_empty() {
        return Err(Error::EmptyAfterPrune(cfg.prune_threshold));
    }

    let d = a.dim();
    let mut support = Array2::<f64>::zeros((entries.len(), d));
    let mut weights = Array1::<f64>::zeros(entries.len());
    for (k, &(i, j, mass)) in entries.iter().enumerate() {
        let (x, y) = (a.point(i), b.point(j));
        for c in 0..d {
            support[[k, c]] = (1.0 - alpha) * x[c] + alpha * y[c];
        }
        weights[k] = mass;
    }
    let averaged = DiscreteMeasure::from_parts_unchecked(support, weights);
    Ok(averaged.merge_duplicates(cfg.merge_tolerance))
}

/// Evaluates the piecewise geodesic curve through `seq` at `t` in `[0, 1]`.
///
/// Measure `i` sits at parameter `i / (L - 1)`; between knots the curve follows
/// the geodesic of [`ot_average`].
pub fn geodesic_interpolant(
    seq: &[DiscreteMeasure],
    t: f64,
    cfg: &RefinementConfig,
) -> Result<DiscreteMeasure> {
    let len = seq.len();
    if len < 2 {
        return Err(Error::TooFewClouds {
            needed: 2,
            got: len,
        });
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Config(format!(
            "interpolant parameter must lie in [0, 1], got {t}"
        )));
    }
    if t == 1.0 {
        return Ok(seq[len - 1].clone());
    }
    let scaled = t * (len - 1) as f64;
    let i = (scaled.floor() as usize).min(len - 2);
    let s = scaled - i as f64;
    if s == 0.0 {
        return Ok(seq[i].clone());
    }
    ot_average(&seq[i], &seq[i + 1], s, cfg)
}
