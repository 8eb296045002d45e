use super::CostMatrix;
use crate::error::{Error, Result};

/// Shortest augmenting path Hungarian method, O(n³).
///
/// Returns the row-to-column permutation and dual potentials `(u, v)` with
/// `u_i + v_j ≤ c_ij`, tight on the permutation.
pub fn hungarian(costs: &CostMatrix) -> (Vec<usize>, Vec<f64>, Vec<f64>) {
    let n = costs.rows();
    assert_eq!(n, costs.cols(), "assignment needs a square cost matrix");
    // 1-based indexing with column 0 as the virtual start.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = costs.get(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut perm = vec![0usize; n];
    for j in 1..=n {
        perm[row_of[j] - 1] = j - 1;
    }
    (perm, u[1..].to_vec(), v[1..].to_vec())
}

/// Minimum of `Σ_i c[i][σ(i)]` over all permutations by enumeration
/// (Heap's algorithm). Limited to `n ≤ 9`.
pub fn exhaustive_assignment(costs: &CostMatrix) -> Result<(f64, Vec<usize>)> {
    let n = costs.rows();
    if n != costs.cols() {
        return Err(Error::NotAnAssignment("cost matrix is not square".into()));
    }
    if n > 9 {
        return Err(Error::CapExceeded { n, cap: 9 });
    }
    let total = |perm: &[usize]| -> f64 { perm.iter().enumerate().map(|(i, &j)| costs.get(i, j)).sum() };
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = (total(&perm), perm.clone());
    let mut c = vec![0usize; n];
    let mut k = 1;
    while k < n {
        if c[k] < k {
            if k % 2 == 0 {
                perm.swap(0, k);
            } else {
                perm.swap(c[k], k);
            }
            let t = total(&perm);
            if t < best.0 {
                best = (t, perm.clone());
            }
            c[k] += 1;
            k = 1;
        } else {
            c[k] = 0;
            k += 1;
        }
    }
    Ok(best)
}
