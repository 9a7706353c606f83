//! Weighted point clouds, timed sequences of them, and refinement settings.

use ndarray::{Array1, Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default distance below which two atoms are treated as the same point.
pub const DEFAULT_MERGE_TOLERANCE: f64 = 1e-9;

const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// A finitely supported probability measure on R^d.
///
/// Rows of `support` are atom positions; `weights` holds one strictly positive
/// mass per row and sums to one. Atoms keep the order they were given in.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    support: Array2<f64>,
    weights: Array1<f64>,
}

impl DiscreteMeasure {
    /// Builds a measure from an `n x d` support matrix.
    ///
    /// Missing weights default to uniform. Weights are normalized to sum to one
    /// and zero-mass atoms are dropped.
    pub fn new(support: Array2<f64>, weights: Option<Vec<f64>>) -> Result<Self> {
        let n = support.nrows();
        if n == 0 {
            return Err(Error::EmptyMeasure);
        }
        if support.ncols() == 0 {
            return Err(Error::BadDims("points need at least one coordinate".into()));
        }
        if support.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("support"));
        }
        let weights = match weights {
            Some(w) => {
                if w.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: w.len(),
                    });
                }
                if w.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite("weights"));
                }
                if let Some((index, &value)) = w.iter().enumerate().find(|(_, v)| **v < 0.0) {
                    return Err(Error::NegativeMass { index, value });
                }
                w
            }
            None => vec![1.0; n],
        };

        let keep: Vec<usize> = (0..n).filter(|&i| weights[i] > 0.0).collect();
        if keep.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        let (support, mut weights) = if keep.len() == n {
            (support, Array1::from(weights))
        } else {
            (
                support.select(Axis(0), &keep),
                keep.iter().map(|&i| weights[i]).collect::<Array1<f64>>(),
            )
        };
        let total: f64 = weights.sum();
        if !total.is_finite() {
            return Err(Error::NonFinite("weights"));
        }
        weights.mapv_inplace(|w| w / total);
        debug_assert!((weights.sum() - 1.0).abs() <= NORMALIZATION_TOLERANCE);
        Ok(DiscreteMeasure { support, weights })
    }

    /// Builds a measure from a list of points, one `Vec` per atom.
    pub fn from_points(points: &[Vec<f64>], weights: Option<Vec<f64>>) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptyMeasure)?;
        let d = first.len();
        let mut flat = Vec::with_capacity(points.len() * d);
        for p in points {
            if p.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: p.len(),
                });
            }
            flat.extend_from_slice(p);
        }
        let support = Array2::from_shape_vec((points.len(), d), flat)
            .expect("shape matches flattened length");
        Self::new(support, weights)
    }

    /// A unit point mass.
    pub fn dirac(point: &[f64]) -> Result<Self> {
        Self::from_points(&[point.to_vec()], None)
    }

    /// Uniform measure on scalar atoms; handy for one-dimensional data.
    pub fn from_scalars(values: &[f64], weights: Option<Vec<f64>>) -> Result<Self> {
        let points: Vec<Vec<f64>> = values.iter().map(|&v| vec![v]).collect();
        Self::from_points(&points, weights)
    }

    /// Assembles a measure from parts already known to satisfy the invariants
    /// up to normalization.
    pub(crate) fn from_parts_unchecked(support: Array2<f64>, mut weights: Array1<f64>) -> Self {
        let total = weights.sum();
        weights.mapv_inplace(|w| w / total);
        DiscreteMeasure { support, weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    /// Always false; a measure holds at least one atom.
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Ambient dimension d.
    pub fn dim(&self) -> usize {
        self.support.ncols()
    }

    pub fn support(&self) -> &Array2<f64> {
        &self.support
    }

    pub fn weights(&self) -> &Array1<f64> {
        &self.weights
    }

    pub fn point(&self, i: usize) -> ArrayView1<'_, f64> {
        self.support.row(i)
    }

    /// True if all weights agree with `1/n` to within `tol`.
    pub fn is_uniform(&self, tol: f64) -> bool {
        let u = 1.0 / self.len() as f64;
        self.weights.iter().all(|w| (w - u).abs() <= tol)
    }

    /// Mass-weighted mean position.
    pub fn mean(&self) -> Array1<f64> {
        self.weights.dot(&self.support)
    }

    /// Applies `f` to every atom position, keeping weights.
    pub fn map_points(&self, mut f: impl FnMut(ArrayView1<'_, f64>) -> Array1<f64>) -> Self {
        let mut support = Array2::zeros(self.support.raw_dim());
        for (i, row) in self.support.rows().into_iter().enumerate() {
            support.row_mut(i).assign(&f(row));
        }
        DiscreteMeasure {
            support,
            weights: self.weights.clone(),
        }
    }

    /// Merges atoms lying within Euclidean distance `tol` of each other.
    ///
    /// Clusters are formed greedily in support order around the first atom
    /// that opened them; each cluster collapses to its mass-weighted mean. The
    /// pass repeats until no two atoms are within `tol`, so the operation is
    /// idempotent.
    pub fn merge_duplicates(&self, tol: f64) -> Self {
        let mut current = self.clone();
        while let Some(merged) = merge_pass(&current, tol) {
            current = merged;
        }
        current
    }
}

/// One greedy clustering pass. Returns `None` if nothing merged.
fn merge_pass(m: &DiscreteMeasure, tol: f64) -> Option<DiscreteMeasure> {
    let n = m.len();
    let d = m.dim();
    let tol_sq = tol * tol;
    // seed atom of each cluster, and the cluster each atom joined
    let mut seeds: Vec<usize> = Vec::new();
    let mut owner = vec![0usize; n];
    for (i, slot) in owner.iter_mut().enumerate() {
        let p = m.support.row(i);
        let hit = seeds.iter().position(|&s| {
            let q = m.support.row(s);
            let dist_sq: f64 = p.iter().zip(q.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
            dist_sq <= tol_sq
        });
        match hit {
            Some(c) => *slot = c,
            None => {
                *slot = seeds.len();
                seeds.push(i);
            }
        }
    }
    if seeds.len() == n {
        return None;
    }

    let k = seeds.len();
    let mut mass = vec![0.0; k];
    // offsets from the seed keep exact coincidences exact
    let mut offset = Array2::<f64>::zeros((k, d));
    for (i, &c) in owner.iter().enumerate() {
        let w = m.weights[i];
        mass[c] += w;
        let seed = m.support.row(seeds[c]);
        for (o, (x, s)) in offset
            .row_mut(c)
            .iter_mut()
            .zip(m.support.row(i).iter().zip(seed.iter()))
        {
            *o += w * (x - s);
        }
    }
    let mut support = Array2::<f64>::zeros((k, d));
    for c in 0..k {
        let seed = m.support.row(seeds[c]);
        for j in 0..d {
            support[[c, j]] = seed[j] + offset[[c, j]] / mass[c];
        }
    }
    Some(DiscreteMeasure {
        support,
        weights: Array1::from(mass),
    })
}

/// An ordered list of (time, measure) observations.
#[derive(Debug, Clone, PartialEq)]
pub struct TimedSequence {
    entries: Vec<(f64, DiscreteMeasure)>,
}

impl TimedSequence {
    /// Validates strictly increasing finite times and a shared dimension.
    pub fn new(entries: Vec<(f64, DiscreteMeasure)>) -> Result<Self> {
        let first = entries
            .first()
            .ok_or(Error::TooFewClouds { needed: 1, got: 0 })?;
        let d = first.1.dim();
        for (k, (t, m)) in entries.iter().enumerate() {
            if !t.is_finite() {
                return Err(Error::NonFinite("times"));
            }
            if m.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: m.dim(),
                });
            }
            if k > 0 && *t <= entries[k - 1].0 {
                return Err(Error::Config(format!(
                    "times must be strictly increasing: {} follows {}",
                    t,
                    entries[k - 1].0
                )));
            }
        }
        Ok(TimedSequence { entries })
    }

    /// Places measures at times 0, 1, 2, ...
    pub fn from_measures(measures: Vec<DiscreteMeasure>) -> Result<Self> {
        Self::new(
            measures
                .into_iter()
                .enumerate()
                .map(|(i, m)| (i as f64, m))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.entries[0].1.dim()
    }

    pub fn entries(&self) -> &[(f64, DiscreteMeasure)] {
        &self.entries
    }

    pub fn times(&self) -> Vec<f64> {
        self.entries.iter().map(|(t, _)| *t).collect()
    }

    pub fn measures(&self) -> Vec<DiscreteMeasure> {
        self.entries.iter().map(|(_, m)| m.clone()).collect()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.entries[k].0
    }

    pub fn measure(&self, k: usize) -> &DiscreteMeasure {
        &self.entries[k].1
    }

    /// The same sequence with step `k` removed.
    pub fn without(&self, k: usize) -> Result<Self> {
        let mut entries = self.entries.clone();
        entries.remove(k);
        Self::new(entries)
    }
}

/// Parameters shared by the refinement schemes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefinementConfig {
    /// B-spline degree M.
    pub degree: usize,
    /// Number of refinement rounds R.
    pub level: usize,
    /// Exponent p of the transport cost `|x - y|^p`.
    pub cost_exponent: f64,
    /// Plan entries at or below this mass are dropped when averaging.
    pub prune_threshold: f64,
    pub merge_tolerance: f64,
    pub seed: u64,
}

impl Default for RefinementConfig {
    fn default() -> Self {
        RefinementConfig {
            degree: 2,
            level: 7,
            cost_exponent: 2.0,
            prune_threshold: 1e-10,
            merge_tolerance: DEFAULT_MERGE_TOLERANCE,
            seed: 0,
        }
    }
}

impl RefinementConfig {
    pub fn with_degree(mut self, degree: usize) -> Self {
        self.degree = degree;
        self
    }

    pub fn with_level(mut self, level: usize) -> Self {
        self.level = level;
        self
    }

    pub fn with_cost_exponent(mut self, p: f64) -> Self {
        self.cost_exponent = p;
        self
    }

    pub fn with_prune_threshold(mut self, eps: f64) -> Self {
        self.prune_threshold = eps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.degree < 1 {
            return Err(Error::Config("degree must be at least 1".into()));
        }
        if !self.cost_exponent.is_finite() || self.cost_exponent < 1.0 {
            return Err(Error::Config(format!(
                "cost exponent must be a finite value >= 1, got {}",
                self.cost_exponent
            )));
        }
        if !(0.0..1.0).contains(&self.prune_threshold) {
            return Err(Error::Config(format!(
                "prune threshold must lie in [0, 1), got {}",
                self.prune_threshold
            )));
        }
        if !self.merge_tolerance.is_finite() || self.merge_tolerance < 0.0 {
            return Err(Error::Config(format!(
                "merge tolerance must be finite and >= 0, got {}",
                self.merge_tolerance
            )));
        }
        Ok(())
    }
}
