//! Primal network simplex for the balanced transportation problem.
//!
//! The graph has one node per source atom, one per target atom and an
//! artificial root. Every source is tied to the root by an artificial arc
//! carrying its supply, every target by an artificial arc carrying its demand;
//! that star is the starting spanning tree. Costs are rescaled to `[0, 1]` and
//! artificial arcs cost 1, which is more than half of any real arc, so an
//! optimal tree never routes mass through the root.
//!
//! Leaving arcs are chosen by the strongly feasible tree rule, which rules out
//! cycling on the heavily degenerate problems produced by uniform marginals.
//! Entering arcs come from block search: arcs are scanned cyclically in blocks
//! of about `sqrt(arcs)` and the most negative reduced cost in the first block
//! that has one enters, ties going to the lowest index.

use crate::error::{Error, Result};

/// Reduced costs above `-PRICING_TOLERANCE` (on the rescaled costs) count as
/// optimal.
const PRICING_TOLERANCE: f64 = 1e-12;
const ARTIFICIAL_COST: f64 = 1.0;

pub(crate) struct Solution {
    /// Row-major `rows x cols` flows.
    pub flow: Vec<f64>,
}

pub(crate) fn solve(supply: &[f64], demand: &[f64], cost: &[f64]) -> Result<Solution> {
    let mut net = Network::new(supply, demand, cost);
    net.run()?;
    let real = supply.len() * demand.len();
    let mut flow = net.flow;
    flow.truncate(real);
    for f in flow.iter_mut() {
        if *f < 0.0 {
            *f = 0.0;
        }
    }
    Ok(Solution { flow })
}

struct Network {
    rows: usize,
    cols: usize,
    root: usize,
    real_arcs: usize,
    /// rescaled real arc costs, row-major
    cost: Vec<f64>,
    flow: Vec<f64>,
    parent: Vec<usize>,
    /// arc joining a node to its parent
    pred: Vec<usize>,
    /// true if `pred` points from the node up to its parent
    up: Vec<bool>,
    depth: Vec<usize>,
    potential: Vec<f64>,
    children: Vec<Vec<usize>>,
    next_arc: usize,
    block: usize,
}

impl Network {
    fn new(supply: &[f64], demand: &[f64], cost: &[f64]) -> Self {
        let rows = supply.len();
        let cols = demand.len();
        let real_arcs = rows * cols;
        let nodes = rows + cols + 1;
        let root = rows + cols;
        let scale = cost.iter().fold(0.0f64, |m, &c| m.max(c));
        let cost: Vec<f64> = if scale > 0.0 {
            cost.iter().map(|c| c / scale).collect()
        } else {
            cost.to_vec()
        };

        let total_arcs = real_arcs + rows + cols;
        let mut flow = vec![0.0; total_arcs];
        let mut parent = vec![root; nodes];
        let mut pred = vec![usize::MAX; nodes];
        let mut up = vec![false; nodes];
        let mut depth = vec![1; nodes];
        let mut potential = vec![0.0; nodes];
        for i in 0..rows {
            pred[i] = real_arcs + i;
            up[i] = true;
            flow[real_arcs + i] = supply[i];
            potential[i] = -ARTIFICIAL_COST;
        }
        for j in 0..cols {
            let v = rows + j;
            pred[v] = real_arcs + rows + j;
            up[v] = false;
            flow[real_arcs + rows + j] = demand[j];
            potential[v] = ARTIFICIAL_COST;
        }
        parent[root] = root;
        depth[root] = 0;
        let mut children = vec![Vec::new(); nodes];
        children[root] = (0..rows + cols).collect();

        let block = ((total_arcs as f64).sqrt().ceil() as usize).max(10);
        Network {
            rows,
            cols,
            root,
            real_arcs,
            cost,
            flow,
            parent,
            pred,
            up,
            depth,
            potential,
            children,
            next_arc: 0,
            block,
        }
    }

    fn total_arcs(&self) -> usize {
        self.real_arcs + self.rows + self.cols
    }

    fn endpoints(&self, arc: usize) -> (usize, usize) {
        if arc < self.real_arcs {
            (arc / self.cols, self.rows + arc % self.cols)
        } else if arc < self.real_arcs + self.rows {
            (arc - self.real_arcs, self.root)
        } else {
            (self.root, self.rows + (arc - self.real_arcs - self.rows))
        }
    }

    fn arc_cost(&self, arc: usize) -> f64 {
        if arc < self.real_arcs {
            self.cost[arc]
        } else {
            ARTIFICIAL_COST
        }
    }

    fn reduced_cost(&self, arc: usize) -> f64 {
        let (u, v) = self.endpoints(arc);
        self.arc_cost(arc) + self.potential[u] - self.potential[v]
    }

    fn run(&mut self) -> Result<usize> {
        let arcs = self.total_arcs();
        let cap = 200 * arcs + 10_000;
        let mut pivots = 0;
        while let Some(entering) = self.find_entering() {
            self.pivot(entering);
            pivots += 1;
            if pivots > cap {
                return Err(Error::SolverFailure(format!(
                    "no convergence after {pivots} pivots on a {}x{} problem",
                    self.rows, self.cols
                )));
            }
        }
        Ok(pivots)
    }

    fn find_entering(&mut self) -> Option<usize> {
        let arcs = self.total_arcs();
        let mut best = -PRICING_TOLERANCE;
        let mut best_arc = None;
        let mut scanned = 0;
        let mut in_block = 0;
        let mut arc = self.next_arc;
        while scanned < arcs {
            // scan in segments that stay within one row of real arcs, so the
            // inner loop runs over plain slices
            let row_end = if arc < self.real_arcs {
                (arc / self.cols + 1) * self.cols
            } else {
                arc + 1
            };
            let end = row_end
                .min(arc + self.block - in_block)
                .min(arc + arcs - scanned);
            if arc < self.real_arcs {
                let i = arc / self.cols;
                let j0 = self.rows + arc - i * self.cols;
                let pi = self.potential[i];
                let costs = &self.cost[arc..end];
                let column_potentials = &self.potential[j0..j0 + costs.len()];
                for (k, (c, pj)) in costs.iter().zip(column_potentials).enumerate() {
                    let rc = c + pi - pj;
                    if rc < best {
                        best = rc;
                        best_arc = Some(arc + k);
                    }
                }
            } else {
                let rc = self.reduced_cost(arc);
                if rc < best {
                    best = rc;
                    best_arc = Some(arc);
                }
            }
            let len = end - arc;
            scanned += len;
            in_block += len;
            arc = if end == arcs { 0 } else { end };
            if in_block == self.block {
                if best_arc.is_some() {
                    self.next_arc = arc;
                    return best_arc;
                }
                in_block = 0;
            }
        }
        self.next_arc = arc;
        best_arc
    }

    fn join(&self, mut a: usize, mut b: usize) -> usize {
        while a != b {
            if self.depth[a] > self.depth[b] {
                a = self.parent[a];
            } else if self.depth[b] > self.depth[a] {
                b = self.parent[b];
            } else {
                a = self.parent[a];
                b = self.parent[b];
            }
        }
        a
    }

    fn pivot(&mut self, entering: usize) {
        let (first, second) = self.endpoints(entering);
        let apex = self.join(first, second);

        // Flow moves first -> second -> ... -> apex -> ... -> first. Pick the
        // last blocking arc in that order, starting from the apex.
        let mut delta = f64::INFINITY;
        let mut leaving_node = usize::MAX;
        let mut on_first_side = true;
        let mut x = first;
        while x != apex {
            if self.up[x] {
                let f = self.flow[self.pred[x]];
                if f < delta {
                    delta = f;
                    leaving_node = x;
                }
            }
            x = self.parent[x];
        }
        let mut x = second;
        while x != apex {
            if !self.up[x] {
                let f = self.flow[self.pred[x]];
                if f <= delta {
                    delta = f;
                    leaving_node = x;
                    on_first_side = false;
                }
            }
            x = self.parent[x];
        }
        debug_assert!(leaving_node != usize::MAX, "costs are bounded below");
        let delta = delta.max(0.0);

        if delta > 0.0 {
            self.flow[entering] += delta;
            let mut x = first;
            while x != apex {
                let a = self.pred[x];
                if self.up[x] {
                    self.flow[a] -= delta;
                } else {
                    self.flow[a] += delta;
                }
                x = self.parent[x];
            }
            let mut x = second;
            while x != apex {
                let a = self.pred[x];
                if self.up[x] {
                    self.flow[a] += delta;
                } else {
                    self.flow[a] -= delta;
                }
                x = self.parent[x];
            }
        }
        let leaving = self.pred[leaving_node];
        self.flow[leaving] = 0.0;

        // Re-hang the subtree cut off by the leaving arc from the entering arc.
        let (stem, new_parent, stem_up) = if on_first_side {
            (first, second, true)
        } else {
            (second, first, false)
        };
        let mut hang_from = new_parent;
        let mut hang_arc = entering;
        let mut hang_up = stem_up;
        let mut x = stem;
        loop {
            let old_parent = self.parent[x];
            let old_pred = self.pred[x];
            let old_up = self.up[x];
            detach(&mut self.children[old_parent], x);
            self.parent[x] = hang_from;
            self.pred[x] = hang_arc;
            self.up[x] = hang_up;
            self.children[hang_from].push(x);
            if x == leaving_node {
                break;
            }
            hang_from = x;
            hang_arc = old_pred;
            hang_up = !old_up;
            x = old_parent;
        }
        self.refresh_subtree(stem);
    }

    /// Recomputes depth and potentials below (and including) `top`.
    fn refresh_subtree(&mut self, top: usize) {
        let mut stack = vec![top];
        while let Some(x) = stack.pop() {
            let p = self.parent[x];
            let c = self.arc_cost(self.pred[x]);
            self.depth[x] = self.depth[p] + 1;
            self.potential[x] = if self.up[x] {
                self.potential[p] - c
            } else {
                self.potential[p] + c
            };
            stack.extend_from_slice(&self.children[x]);
        }
    }
}

fn detach(list: &mut Vec<usize>, x: usize) {
    let pos = list
        .iter()
        .position(|&y| y == x)
        .expect("child is listed under its parent");
    list.swap_remove(pos);
}
