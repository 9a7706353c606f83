//! Exact discrete optimal transport between weighted point clouds.

mod simplex;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;

/// Pairwise transport costs `|x_i - y_j|^p`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    values: Array2<f64>,
    exponent: f64,
}

impl CostMatrix {
    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.values.nrows(), self.values.ncols())
    }
}

/// An optimal transport plan and the cost it attains.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    plan: Array2<f64>,
    objective: f64,
}

impl Coupling {
    pub fn plan(&self) -> &Array2<f64> {
        &self.plan
    }

    /// `<plan, cost>` for the cost matrix the plan was solved against.
    pub fn objective(&self) -> f64 {
        self.objective
    }

    /// Entries strictly above `threshold`, in row-major order.
    pub fn support_above(&self, threshold: f64) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.plan
            .indexed_iter()
            .filter(move |(_, &g)| g > threshold)
            .map(|((i, j), &g)| (i, j, g))
    }
}

pub fn cost_matrix(a: &DiscreteMeasure, b: &DiscreteMeasure, p: f64) -> Result<CostMatrix> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    if !p.is_finite() || p < 1.0 {
        return Err(Error::Config(format!(
            "cost exponent must be a finite value >= 1, got {p}"
        )));
    }
    let (xa, xb) = (
        a.support().as_standard_layout(),
        b.support().as_standard_layout(),
    );
    let (xa, xb) = (
        xa.as_slice().expect("standard layout"),
        xb.as_slice().expect("standard layout"),
    );
    let d = a.dim();
    let mut flat = Vec::with_capacity(a.len() * b.len());
    for x in xa.chunks_exact(d) {
        for y in xb.chunks_exact(d) {
            let sq: f64 = x.iter().zip(y).map(|(u, v)| (u - v) * (u - v)).sum();
            flat.push(if p == 2.0 {
                sq
            } else if p == 1.0 {
                sq.sqrt()
            } else {
                sq.sqrt().powf(p)
            });
        }
    }
    let values = Array2::from_shape_vec((a.len(), b.len()), flat).expect("one cost per pair");
    Ok(CostMatrix {
        values,
        exponent: p,
    })
}

/// Solves the Kantorovich problem exactly with the network simplex method.
///
/// The plan is a vertex of the transport polytope, so it has at most
/// `n_a + n_b - 1` nonzero entries. Equal inputs always give the same plan.
pub fn solve_kantorovich(
    a: &DiscreteMeasure,
    b: &DiscreteMeasure,
    cost: &CostMatrix,
) -> Result<Coupling> {
    let (rows, cols) = cost.shape();
    if rows != a.len() || cols != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len() * b.len(),
            found: rows * cols,
        });
    }
    let costs = cost.values.as_standard_layout();
    let costs = costs.as_slice().expect("standard layout");
    let supply = a.weights().as_slice().expect("contiguous weights");
    let demand = b.weights().as_slice().expect("contiguous weights");
    let solution = simplex::solve(supply, demand, costs)?;
    let objective = solution
        .flow
        .iter()
        .zip(costs.iter())
        .map(|(f, c)| f * c)
        .sum::<f64>()
        .max(0.0);
    let plan =
        Array2::from_shape_vec((rows, cols), solution.flow).expect("flow has one entry per arc");
    Ok(Coupling { plan, objective })
}

/// Optimal coupling under the cost `|x - y|^p`.
pub fn optimal_coupling(a: &DiscreteMeasure, b: &DiscreteMeasure, p: f64) -> Result<Coupling> {
    let cost = cost_matrix(a, b, p)?;
    solve_kantorovich(a, b, &cost)
}

/// The p-Wasserstein distance, `objective^(1/p)`.
pub fn wasserstein_distance(a: &DiscreteMeasure, b: &DiscreteMeasure, p: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let coupling = optimal_coupling(a, b, p)?;
    Ok(coupling.objective().powf(1.0 / p))
}
