//! Transportation simplex on the spanning-tree basis, with Bland's rule for
//! both the entering and the leaving cell. Flows are exact rationals.

use std::collections::VecDeque;

use num_traits::{Signed, Zero};

use super::{CostMatrix, CouplingEntry, DiscreteCoupling, OtSolution};
use crate::error::{Error, Result};
use crate::numeric::{self, NeumaierSum, Rational};

const MAX_PIVOTS: usize = 5_000_000;

struct Basis {
    m: usize,
    n: usize,
    // Basic cells (i, j) with their flows; always m + n - 1 of them.
    cells: Vec<(usize, usize)>,
    flow: Vec<Rational>,
    is_basic: Vec<bool>,
}

impl Basis {
    /// North-west corner rule. Each step advances exactly one of row or
    /// column, so the result is a spanning tree even under degeneracy.
    fn northwest(supply: &[Rational], demand: &[Rational]) -> Self {
        let (m, n) = (supply.len(), demand.len());
        let mut rs = supply.to_vec();
        let mut cs = demand.to_vec();
        let mut cells = Vec::with_capacity(m + n - 1);
        let mut flow = Vec::with_capacity(m + n - 1);
        let mut is_basic = vec![false; m * n];
        let (mut i, mut j) = (0, 0);
        while i < m && j < n {
            let x = if rs[i] < cs[j] { rs[i].clone() } else { cs[j].clone() };
            rs[i] -= &x;
            cs[j] -= &x;
            cells.push((i, j));
            flow.push(x);
            is_basic[i * n + j] = true;
            if rs[i].is_zero() && i + 1 < m {
                i += 1;
            } else {
                j += 1;
            }
        }
        debug_assert_eq!(cells.len(), m + n - 1);
        Basis {
            m,
            n,
            cells,
            flow,
            is_basic,
        }
    }

    /// Adjacency over nodes `0..m` (rows) and `m..m+n` (columns); each entry
    /// is (neighbour, basic cell index).
    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.m + self.n];
        for (k, &(i, j)) in self.cells.iter().enumerate() {
            adj[i].push((self.m + j, k));
            adj[self.m + j].push((i, k));
        }
        adj
    }

    fn potentials(&self, adj: &[Vec<(usize, usize)>], costs: &CostMatrix) -> (Vec<f64>, Vec<f64>) {
        let total = self.m + self.n;
        let mut pot = vec![f64::NAN; total];
        pot[0] = 0.0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(node) = queue.pop_front() {
            for &(next, k) in &adj[node] {
                if pot[next].is_nan() {
                    let (i, j) = self.cells[k];
                    // u_i + v_j = c_ij
                    pot[next] = costs.get(i, j) - pot[node];
                    queue.push_back(next);
                }
            }
        }
        let v = pot.split_off(self.m);
        (pot, v)
    }

    /// Basic cells on the tree path from row node `i` to column node `m + j`,
    /// in path order.
    fn path(&self, adj: &[Vec<(usize, usize)>], i: usize, j: usize) -> Vec<usize> {
        let total = self.m + self.n;
        let target = self.m + j;
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; total];
        let mut seen = vec![false; total];
        seen[i] = true;
        let mut queue = VecDeque::from([i]);
        while let Some(node) = queue.pop_front() {
            if node == target {
                break;
            }
            for &(next, k) in &adj[node] {
                if !seen[next] {
                    seen[next] = true;
                    parent[next] = Some((node, k));
                    queue.push_back(next);
                }
            }
        }
        let mut cells = Vec::new();
        let mut node = target;
        while node != i {
            let (prev, k) = parent[node].expect("basis is a spanning tree");
            cells.push(k);
            node = prev;
        }
        cells.reverse();
        cells
    }
}

pub(super) fn solve(supply: &[Rational], demand: &[Rational], costs: &CostMatrix) -> Result<OtSolution> {
    let (m, n) = (supply.len(), demand.len());
    if m == 0 || n == 0 {
        return Err(Error::EmptyInput);
    }
    let mut basis = Basis::northwest(supply, demand);
    let tol = 1e-12 * costs.max_abs().max(1.0);

    for _ in 0..MAX_PIVOTS {
        let adj = basis.adjacency();
        let (u, v) = basis.potentials(&adj, costs);

        // Bland: lowest-index cell with negative reduced cost enters.
        let entering = (0..m * n).find(|&k| {
            if basis.is_basic[k] {
                return false;
            }
            let (i, j) = (k / n, k % n);
            costs.get(i, j) - u[i] - v[j] < -tol
        });
        let Some(k) = entering else {
            return Ok(finish(basis, costs, u, v));
        };
        let (ei, ej) = (k / n, k % n);

        // Cycle: entering cell (+), then the tree path from row ei to column
        // ej alternating (-, +, -, ...). Path length is odd.
        let path = basis.path(&adj, ei, ej);
        let mut leave: Option<usize> = None;
        for (pos, &cell) in path.iter().enumerate() {
            if pos % 2 == 1 {
                continue;
            }
            leave = match leave {
                None => Some(cell),
                Some(cur) => {
                    let (ci, cj) = basis.cells[cur];
                    let (ni, nj) = basis.cells[cell];
                    let better = basis.flow[cell] < basis.flow[cur]
                        || (basis.flow[cell] == basis.flow[cur] && ni * n + nj < ci * n + cj);
                    Some(if better { cell } else { cur })
                }
            };
        }
        let leave = leave.expect("cycle has at least one decreasing cell");
        let theta = basis.flow[leave].clone();
        if !theta.is_zero() {
            for (pos, &cell) in path.iter().enumerate() {
                if pos % 2 == 0 {
                    basis.flow[cell] -= &theta;
                } else {
                    basis.flow[cell] += &theta;
                }
            }
        }
        debug_assert!(basis.flow.iter().all(|f| !f.is_negative()));
        let (li, lj) = basis.cells[leave];
        basis.is_basic[li * n + lj] = false;
        basis.is_basic[k] = true;
        basis.cells[leave] = (ei, ej);
        basis.flow[leave] = theta;
    }
    Err(Error::Infeasible(format!("pivot limit {MAX_PIVOTS} reached")))
}

fn finish(basis: Basis, costs: &CostMatrix, u: Vec<f64>, v: Vec<f64>) -> OtSolution {
    let mut entries: Vec<CouplingEntry> = basis
        .cells
        .iter()
        .zip(basis.flow)
        .filter(|(_, f)| f.is_positive())
        .map(|(&(i, j), mass)| CouplingEntry { i, j, mass })
        .collect();
    entries.sort_by_key(|e| (e.i, e.j));
    let value = entries
        .iter()
        .map(|e| numeric::rational_to_f64(&e.mass) * costs.get(e.i, e.j))
        .collect::<NeumaierSum>()
        .value();
    OtSolution {
        value,
        witness: DiscreteCoupling { entries },
        row_potentials: u,
        col_potentials: v,
    }
}
