//! Per-particle trajectories through a refined sequence.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{DiscreteMeasure, RefinementConfig, TimedSequence};
use crate::ot::optimal_coupling;
use crate::subdivision::RefinedSequence;

/// Default mass below which plan entries are not drawn as edges.
pub const DEFAULT_MASS_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceNode {
    pub step: usize,
    pub atom: usize,
    pub pos: Vec<f64>,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceEdge {
    pub from: usize,
    pub to: usize,
    pub mass: f64,
}

/// Atoms of every cloud as nodes, transported mass between consecutive
/// clouds as edges. The roots are the step-0 nodes.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryForest {
    pub nodes: Vec<TraceNode>,
    pub edges: Vec<TraceEdge>,
}

impl TrajectoryForest {
    pub fn roots(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.step == 0)
            .map(|(i, _)| i)
    }

    pub fn steps(&self) -> usize {
        self.nodes.iter().map(|n| n.step + 1).max().unwrap_or(0)
    }

    pub fn out_edges(&self, node: usize) -> impl Iterator<Item = &TraceEdge> + '_ {
        self.edges.iter().filter(move |e| e.from == node)
    }

    pub fn in_edges(&self, node: usize) -> impl Iterator<Item = &TraceEdge> + '_ {
        self.edges.iter().filter(move |e| e.to == node)
    }

    /// Checks that edge indices are in range and only join consecutive steps.
    pub fn validate(&self) -> Result<()> {
        for (k, e) in self.edges.iter().enumerate() {
            let (Some(a), Some(b)) = (self.nodes.get(e.from), self.nodes.get(e.to)) else {
                return Err(Error::parse(k, "edge refers to a missing node"));
            };
            if b.step != a.step + 1 {
                return Err(Error::parse(k, "edge does not join consecutive steps"));
            }
            if !e.mass.is_finite() || e.mass < 0.0 {
                return Err(Error::parse(k, "edge mass must be finite and >= 0"));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let forest: TrajectoryForest =
            serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()))?;
        forest.validate()?;
        Ok(forest)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("forest is serializable")
    }
}

/// Evenly spaces refined clouds over `[t0, t_end]`.
pub fn assign_times(refined: &RefinedSequence, t0: f64, t_end: f64) -> Result<TimedSequence> {
    assign_times_to(refined.measures(), t0, t_end)
}

pub fn assign_times_to(measures: &[DiscreteMeasure], t0: f64, t_end: f64) -> Result<TimedSequence> {
    if !t0.is_finite() || !t_end.is_finite() || t0 >= t_end {
        return Err(Error::BadInterval {
            start: t0,
            end: t_end,
        });
    }
    let n = measures.len();
    if n < 2 {
        return Err(Error::TooFewClouds { needed: 2, got: n });
    }
    let span = t_end - t0;
    let entries = measures
        .iter()
        .enumerate()
        .map(|(k, m)| {
            let t = if k == n - 1 {
                t_end
            } else {
                t0 + span * k as f64 / (n - 1) as f64
            };
            (t, m.clone())
        })
        .collect();
    TimedSequence::new(entries)
}

/// Couples every consecutive pair of clouds and keeps plan entries above
/// `mass_threshold` as edges.
pub fn trace_paths(
    refined: &[DiscreteMeasure],
    mass_threshold: f64,
    cfg: &RefinementConfig,
) -> Result<TrajectoryForest> {
    if refined.len() < 2 {
        return Err(Error::TooFewClouds {
            needed: 2,
            got: refined.len(),
        });
    }
    if !(0.0..1.0).contains(&mass_threshold) {
        return Err(Error::Config(format!(
            "mass threshold must lie in [0, 1), got {mass_threshold}"
        )));
    }
    let couplings = refined
        .par_windows(2)
        .map(|w| optimal_coupling(&w[0], &w[1], cfg.cost_exponent))
        .collect::<Result<Vec<_>>>()?;

    let mut offsets = Vec::with_capacity(refined.len());
    let mut nodes = Vec::new();
    for (step, m) in refined.iter().enumerate() {
        offsets.push(nodes.len());
        for atom in 0..m.len() {
            nodes.push(TraceNode {
                step,
                atom,
                pos: m.point(atom).to_vec(),
                mass: m.weights()[atom],
            });
        }
    }
    let mut edges = Vec::new();
    for (step, coupling) in couplings.iter().enumerate() {
        for (i, j, mass) in coupling.support_above(mass_threshold) {
            edges.push(TraceEdge {
                from: offsets[step] + i,
                to: offsets[step + 1] + j,
                mass,
            });
        }
    }
    Ok(TrajectoryForest { nodes, edges })
}
