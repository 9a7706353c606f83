//! Leave-one-out evaluation and runtime diagnostics.

use std::time::Instant;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geodesic::geodesic_interpolant;
use crate::measure::{DiscreteMeasure, RefinementConfig, TimedSequence};
use crate::ot::{optimal_coupling, wasserstein_distance};
use crate::subdivision::wlr_refine;

const UNIFORM_TOLERANCE: f64 = 1e-12;

/// Scores for one held-out step plus the averages over all interior steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub held_out_step: usize,
    pub w1: f64,
    #[serde(with = "undefined_as_string")]
    pub mse: Option<f64>,
    pub mean_w1: f64,
    #[serde(with = "undefined_as_string")]
    pub mean_mse: Option<f64>,
    pub runtime_seconds: f64,
    pub config: RefinementConfig,
}

/// Serializes `None` as the string `"undefined"`.
mod undefined_as_string {
    use super::*;

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Value(f64),
        Tag(String),
    }

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match v {
            Some(x) => s.serialize_f64(*x),
            None => s.serialize_str("undefined"),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<f64>, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Value(x) => Ok(Some(x)),
            Repr::Tag(t) if t == "undefined" => Ok(None),
            Repr::Tag(t) => Err(serde::de::Error::custom(format!(
                "expected a number or \"undefined\", found {t:?}"
            ))),
        }
    }
}

/// Refits WLR without step `held` and evaluates the resulting curve at the
/// held-out time.
///
/// Refined clouds are spread evenly over the original time span, so the
/// prediction is the piecewise geodesic interpolant at
/// `(t_held - t_0) / (t_T - t_0)`.
pub fn predict_held_out(
    seq: &TimedSequence,
    held: usize,
    cfg: &RefinementConfig,
) -> Result<DiscreteMeasure> {
    let len = seq.len();
    if len < 3 {
        return Err(Error::TooFewClouds {
            needed: 3,
            got: len,
        });
    }
    if held == 0 || held >= len - 1 {
        return Err(Error::BoundaryHoldout { step: held, len });
    }
    let reduced = seq.without(held)?;
    let refined = wlr_refine(&reduced, cfg)?;
    let (t0, t_end) = (seq.time(0), seq.time(len - 1));
    let t = ((seq.time(held) - t0) / (t_end - t0)).clamp(0.0, 1.0);
    geodesic_interpolant(&refined, t, cfg)
}

pub fn metric_w1(predicted: &DiscreteMeasure, actual: &DiscreteMeasure) -> Result<f64> {
    wasserstein_distance(predicted, actual, 1.0)
}

/// Mean squared distance under the optimal one-to-one assignment.
///
/// Only defined for two uniform clouds of the same size; `None` otherwise.
pub fn metric_mse(predicted: &DiscreteMeasure, actual: &DiscreteMeasure) -> Option<f64> {
    if predicted.len() != actual.len()
        || predicted.dim() != actual.dim()
        || !predicted.is_uniform(UNIFORM_TOLERANCE)
        || !actual.is_uniform(UNIFORM_TOLERANCE)
    {
        return None;
    }
    // uniform marginals of equal size: the optimal vertex is a permutation
    // scaled by 1/n, so the objective is the assignment MSE
    optimal_coupling(predicted, actual, 2.0)
        .ok()
        .map(|c| c.objective())
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepScore {
    pub step: usize,
    pub w1: f64,
    pub mse: Option<f64>,
}

/// Leave-one-out scores for every interior step.
pub fn interior_scores(seq: &TimedSequence, cfg: &RefinementConfig) -> Result<Vec<StepScore>> {
    if seq.len() < 3 {
        return Err(Error::TooFewClouds {
            needed: 3,
            got: seq.len(),
        });
    }
    (1..seq.len() - 1)
        .map(|step| {
            let predicted = predict_held_out(seq, step, cfg)?;
            let actual = seq.measure(step);
            Ok(StepScore {
                step,
                w1: metric_w1(&predicted, actual)?,
                mse: metric_mse(&predicted, actual),
            })
        })
        .collect()
}

fn means(scores: &[StepScore]) -> (f64, Option<f64>) {
    let n = scores.len() as f64;
    let mean_w1 = scores.iter().map(|s| s.w1).sum::<f64>() / n;
    let mean_mse = scores
        .iter()
        .map(|s| s.mse)
        .sum::<Option<f64>>()
        .map(|total| total / n);
    (mean_w1, mean_mse)
}

/// Average leave-one-out W1 and MSE over the interior steps. The MSE mean is
/// undefined as soon as one term is.
pub fn mean_metrics(seq: &TimedSequence, cfg: &RefinementConfig) -> Result<(f64, Option<f64>)> {
    Ok(means(&interior_scores(seq, cfg)?))
}

/// Full leave-one-out report for `held`.
pub fn evaluate(seq: &TimedSequence, held: usize, cfg: &RefinementConfig) -> Result<EvalReport> {
    cfg.validate()?;
    if held == 0 || held + 1 >= seq.len() {
        return Err(Error::BoundaryHoldout {
            step: held,
            len: seq.len(),
        });
    }
    let start = Instant::now();
    let scores = interior_scores(seq, cfg)?;
    let (mean_w1, mean_mse) = means(&scores);
    let own = &scores[held - 1];
    Ok(EvalReport {
        held_out_step: held,
        w1: own.w1,
        mse: own.mse,
        mean_w1,
        mean_mse,
        runtime_seconds: start.elapsed().as_secs_f64(),
        config: *cfg,
    })
}

/// W1 error of predicting step `held` by the retained cloud closest in time.
/// When two retained clouds are equally close the better one counts.
pub fn nearest_retained_w1(seq: &TimedSequence, held: usize) -> Result<f64> {
    let t = seq.time(held);
    let gaps: Vec<(usize, f64)> = (0..seq.len())
        .filter(|&k| k != held)
        .map(|k| (k, (seq.time(k) - t).abs()))
        .collect();
    let closest = gaps.iter().map(|g| g.1).fold(f64::INFINITY, f64::min);
    let mut best = f64::INFINITY;
    for &(k, gap) in &gaps {
        if gap == closest {
            best = best.min(metric_w1(seq.measure(k), seq.measure(held))?);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub level: usize,
    pub degree: usize,
    pub seconds: f64,
}

/// Times `wlr_refine` on `seq` for every `(level, degree)` pair.
pub fn runtime_scaling_probe(
    seq: &TimedSequence,
    levels: &[usize],
    degrees: &[usize],
    cfg: &RefinementConfig,
) -> Result<Vec<ScalingRow>> {
    let mut rows = Vec::with_capacity(levels.len() * degrees.len());
    for &degree in degrees {
        for &level in levels {
            let run_cfg = cfg.with_degree(degree).with_level(level);
            let start = Instant::now();
            wlr_refine(seq, &run_cfg)?;
            rows.push(ScalingRow {
                level,
                degree,
                seconds: start.elapsed().as_secs_f64(),
            });
        }
    }
    Ok(rows)
}

/// `seconds(R + 1) / seconds(R)` for consecutive levels at each degree.
pub fn level_growth_ratios(rows: &[ScalingRow]) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for pair in rows.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if a.degree == b.degree && b.level == a.level + 1 && a.seconds > 0.0 {
            out.push((a.degree, a.level, b.seconds / a.seconds));
        }
    }
    out
}
