//! Exact optimal transport between finitely supported measures.
//!
//! Masses are exact rationals and costs are floats, so the optimal value is
//! only subject to the rounding of the cost evaluations.

mod assignment;
mod simplex;
pub mod verify;

use std::cmp::Ordering;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::distributions::Empirical;
use crate::error::{Error, Result};
use crate::numeric::{self, NeumaierSum, Rational};

pub use assignment::{exhaustive_assignment, hungarian};

/// Default bound on the number of atoms per side.
pub const DEFAULT_CAP: usize = 64;

/// Finitely supported probability measure on ℝ^d.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasureND {
    dim: usize,
    points: Vec<Vec<f64>>,
    masses: Vec<Rational>,
}

impl DiscreteMeasureND {
    /// Masses must be positive and sum to exactly one. Points are sorted
    /// lexicographically and duplicates merged.
    pub fn new(points: Vec<Vec<f64>>, masses: Vec<Rational>) -> Result<Self> {
        let total: Rational = masses.iter().cloned().sum();
        if !total.is_one() {
            return Err(Error::Domain(format!("masses must sum to 1, got {total}")));
        }
        Self::normalized(points, masses)
    }

    /// As [`DiscreteMeasureND::new`] but rescales positive weights to unit total.
    pub fn normalized(points: Vec<Vec<f64>>, weights: Vec<Rational>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInput);
        }
        if points.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                got: weights.len(),
            });
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(Error::Domain("points must have at least one coordinate".into()));
        }
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            if let Some(&x) = p.iter().find(|x| !x.is_finite()) {
                return Err(Error::NonFinite(x));
            }
        }
        let masses = numeric::normalize(&weights)?;
        let mut atoms: Vec<(Vec<f64>, Rational)> = points
            .into_iter()
            .map(|p| p.into_iter().map(|x| if x == 0.0 { 0.0 } else { x }).collect())
            .zip(masses)
            .collect();
        atoms.sort_by(|a, b| lex_cmp(&a.0, &b.0));
        let mut merged: Vec<(Vec<f64>, Rational)> = Vec::with_capacity(atoms.len());
        for (p, m) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == p => last.1 += m,
                _ => merged.push((p, m)),
            }
        }
        let (points, masses) = merged.into_iter().unzip();
        Ok(DiscreteMeasureND { dim, points, masses })
    }

    /// Float masses are accepted when they sum to one within `1e-12`; they
    /// are then converted exactly and renormalized.
    pub fn from_f64_masses(points: Vec<Vec<f64>>, masses: &[f64]) -> Result<Self> {
        let total = numeric::compensated_sum(masses.iter().copied());
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("masses must sum to 1 within 1e-12, got {total}")));
        }
        let exact = masses
            .iter()
            .map(|&m| {
                if m.is_nan() || m <= 0.0 {
                    return Err(Error::InvalidWeight(m.to_string()));
                }
                numeric::rational_from_f64(m)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::normalized(points, exact)
    }

    /// Equal masses `1/n` on the given points.
    pub fn uniform(points: Vec<Vec<f64>>) -> Result<Self> {
        let w = vec![Rational::one(); points.len()];
        Self::normalized(points, w)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn masses(&self) -> &[Rational] {
        &self.masses
    }

    /// Law of coordinate `i`.
    pub fn marginal(&self, i: usize) -> Result<Empirical> {
        if i >= self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: i + 1,
            });
        }
        let xs: Vec<f64> = self.points.iter().map(|p| p[i]).collect();
        Empirical::new(&xs, &self.masses)
    }

    pub fn marginals(&self) -> Result<Vec<Empirical>> {
        (0..self.dim).map(|i| self.marginal(i)).collect()
    }
}

impl From<&Empirical> for DiscreteMeasureND {
    fn from(e: &Empirical) -> Self {
        DiscreteMeasureND {
            dim: 1,
            points: e.locations().iter().map(|&x| vec![x]).collect(),
            masses: e.weights().to_vec(),
        }
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// One cell of a coupling: mass moved from source atom `i` to target atom `j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingEntry {
    pub i: usize,
    pub j: usize,
    #[serde(serialize_with = "serialize_rational_f64")]
    pub mass: Rational,
}

fn serialize_rational_f64<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(numeric::rational_to_f64(r))
}

/// Finitely supported coupling, indexed into the canonical atom order of its
/// source and target measures.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteCoupling {
    pub entries: Vec<CouplingEntry>,
}

impl DiscreteCoupling {
    /// Largest absolute deviation of row/column sums from the prescribed
    /// masses, in exact arithmetic.
    pub fn margin_defect(&self, source: &DiscreteMeasureND, target: &DiscreteMeasureND) -> Rational {
        let mut rows = vec![Rational::zero(); source.len()];
        let mut cols = vec![Rational::zero(); target.len()];
        for e in &self.entries {
            rows[e.i] += &e.mass;
            cols[e.j] += &e.mass;
        }
        let mut worst = Rational::zero();
        for (r, m) in rows.iter().zip(source.masses()) {
            worst = worst.max((r - m).abs());
        }
        for (c, m) in cols.iter().zip(target.masses()) {
            worst = worst.max((c - m).abs());
        }
        worst
    }

    /// Total cost `Σ mass · cost(i, j)`.
    pub fn cost(&self, costs: &CostMatrix) -> f64 {
        self.entries
            .iter()
            .map(|e| numeric::rational_to_f64(&e.mass) * costs.get(e.i, e.j))
            .collect::<NeumaierSum>()
            .value()
    }
}

/// Dense row-major cost matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn build<F>(mu: &DiscreteMeasureND, nu: &DiscreteMeasureND, cost: F) -> Result<Self>
    where
        F: Fn(&[f64], &[f64]) -> f64,
    {
        let mut data = Vec::with_capacity(mu.len() * nu.len());
        for x in mu.points() {
            for y in nu.points() {
                let c = cost(x, y);
                if !c.is_finite() || c < 0.0 {
                    return Err(Error::InvalidCost(c));
                }
                data.push(c);
            }
        }
        Ok(CostMatrix {
            rows: mu.len(),
            cols: nu.len(),
            data,
        })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::DimensionMismatch {
                    expected: c,
                    got: row.len(),
                });
            }
            data.extend(row);
        }
        Ok(CostMatrix { rows: r, cols: c, data })
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn scaled(&self, factor: f64) -> Self {
        CostMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|c| c * factor).collect(),
        }
    }

    fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

/// Common ground costs.
pub mod cost {
    /// `‖x − y‖_p^p`.
    pub fn lp_power(p: f64) -> impl Fn(&[f64], &[f64]) -> f64 {
        move |x, y| x.iter().zip(y).map(|(a, b)| (a - b).abs().powf(p)).sum()
    }

    /// `‖x − y‖_q^p`.
    pub fn lq_norm_pow(q: f64, p: f64) -> impl Fn(&[f64], &[f64]) -> f64 {
        move |x, y| {
            let s: f64 = x.iter().zip(y).map(|(a, b)| (a - b).abs().powf(q)).sum();
            s.powf(p / q)
        }
    }
}

/// Solver settings.
#[derive(Debug, Clone, Copy)]
pub struct OtConfig {
    pub cap: usize,
    /// Route equal-count equal-mass instances to the Hungarian method.
    pub assignment_fast_path: bool,
}

impl Default for OtConfig {
    fn default() -> Self {
        OtConfig {
            cap: DEFAULT_CAP,
            assignment_fast_path: true,
        }
    }
}

/// Optimal value, an optimal coupling, and dual potentials certifying it.
#[derive(Debug, Clone)]
pub struct OtSolution {
    pub value: f64,
    pub witness: DiscreteCoupling,
    pub row_potentials: Vec<f64>,
    pub col_potentials: Vec<f64>,
}

impl OtSolution {
    /// Worst violation of dual feasibility `u_i + v_j ≤ c_ij` and of
    /// complementary slackness on the support of the witness.
    pub fn slackness_violation(&self, costs: &CostMatrix) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..costs.rows() {
            for j in 0..costs.cols() {
                let excess = self.row_potentials[i] + self.col_potentials[j] - costs.get(i, j);
                worst = worst.max(excess);
            }
        }
        for e in &self.witness.entries {
            let gap = costs.get(e.i, e.j) - self.row_potentials[e.i] - self.col_potentials[e.j];
            worst = worst.max(gap.abs());
        }
        worst
    }
}

/// Minimum of `Σ cost · mass` over all couplings of `mu` and `nu`.
pub fn solve_ot<F>(mu: &DiscreteMeasureND, nu: &DiscreteMeasureND, cost: F) -> Result<OtSolution>
where
    F: Fn(&[f64], &[f64]) -> f64,
{
    solve_ot_with(mu, nu, cost, OtConfig::default())
}

pub fn solve_ot_with<F>(mu: &DiscreteMeasureND, nu: &DiscreteMeasureND, cost: F, cfg: OtConfig) -> Result<OtSolution>
where
    F: Fn(&[f64], &[f64]) -> f64,
{
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch {
            expected: mu.dim(),
            got: nu.dim(),
        });
    }
    for n in [mu.len(), nu.len()] {
        if n > cfg.cap {
            return Err(Error::CapExceeded { n, cap: cfg.cap });
        }
    }
    let costs = CostMatrix::build(mu, nu, cost)?;
    if cfg.assignment_fast_path && is_assignment(mu, nu) {
        return Ok(assignment_solution(&costs));
    }
    simplex::solve(mu.masses(), nu.masses(), &costs)
}

/// Solve directly on a cost matrix with explicit exact masses.
pub fn solve_transport(supply: &[Rational], demand: &[Rational], costs: &CostMatrix) -> Result<OtSolution> {
    if costs.rows() != supply.len() || costs.cols() != demand.len() {
        return Err(Error::DimensionMismatch {
            expected: supply.len() * demand.len(),
            got: costs.rows() * costs.cols(),
        });
    }
    let s: Rational = supply.iter().cloned().sum();
    let d: Rational = demand.iter().cloned().sum();
    if s != d {
        return Err(Error::Infeasible(format!("supply {s} differs from demand {d}")));
    }
    simplex::solve(supply, demand, costs)
}

fn is_assignment(mu: &DiscreteMeasureND, nu: &DiscreteMeasureND) -> bool {
    let n = mu.len();
    if nu.len() != n {
        return false;
    }
    let share = Rational::new(1.into(), (n as i64).into());
    mu.masses().iter().chain(nu.masses()).all(|m| *m == share)
}

fn assignment_solution(costs: &CostMatrix) -> OtSolution {
    let n = costs.rows();
    let (perm, u, v) = hungarian(costs);
    let share = Rational::new(1.into(), (n as i64).into());
    let value = permutation_cost(costs, &perm) / n as f64;
    OtSolution {
        value,
        witness: DiscreteCoupling {
            entries: perm
                .iter()
                .enumerate()
                .map(|(i, &j)| CouplingEntry {
                    i,
                    j,
                    mass: share.clone(),
                })
                .collect(),
        },
        row_potentials: u,
        col_potentials: v,
    }
}

/// Sum of `cost(i, perm[i])` in row order.
pub fn permutation_cost(costs: &CostMatrix, perm: &[usize]) -> f64 {
    perm.iter().enumerate().map(|(i, &j)| costs.get(i, j)).sum()
}

/// Equal-mass assignment: `(1/n) · min_σ Σ cost(x_i, y_σ(i))`.
pub fn solve_assignment<F>(mu: &DiscreteMeasureND, nu: &DiscreteMeasureND, cost: F) -> Result<(f64, Vec<usize>)>
where
    F: Fn(&[f64], &[f64]) -> f64,
{
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch {
            expected: mu.dim(),
            got: nu.dim(),
        });
    }
    if mu.len() != nu.len() {
        return Err(Error::NotAnAssignment(format!(
            "{} source atoms vs {} target atoms",
            mu.len(),
            nu.len()
        )));
    }
    if !is_assignment(mu, nu) {
        return Err(Error::NotAnAssignment("masses are not all 1/n".into()));
    }
    let costs = CostMatrix::build(mu, nu, cost)?;
    let (perm, _, _) = hungarian(&costs);
    Ok((permutation_cost(&costs, &perm) / mu.len() as f64, perm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::empirical_from_samples;
    use crate::distributions::Distribution1D;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn line(xs: &[f64], ws: &[f64]) -> DiscreteMeasureND {
        let Distribution1D::Empirical(e) = empirical_from_samples(xs, Some(ws)).unwrap() else {
            unreachable!()
        };
        DiscreteMeasureND::from(&e)
    }

    #[test]
    fn identical_measures_cost_nothing() {
        let mu = line(&[0.0, 1.0, 3.0], &[0.2, 0.3, 0.5]);
        let sol = solve_ot(&mu, &mu, cost::lp_power(2.0)).unwrap();
        assert_eq!(sol.value, 0.0);
        assert!(sol.witness.margin_defect(&mu, &mu).is_zero());
    }

    #[test]
    fn point_masses() {
        let a = DiscreteMeasureND::uniform(vec![vec![0.0, 1.0]]).unwrap();
        let b = DiscreteMeasureND::uniform(vec![vec![3.0, 5.0]]).unwrap();
        let sol = solve_ot(&a, &b, cost::lp_power(2.0)).unwrap();
        assert_eq!(sol.value, 9.0 + 16.0);
        assert_eq!(sol.witness.entries.len(), 1);
    }

    #[test]
    fn running_two_by_two() {
        let mu = line(&[0.0, 1.0], &[0.5, 0.5]);
        let nu = line(&[0.0, 2.0], &[0.25, 0.75]);
        // Couplings form the one-parameter family t = mass(0→0) in [0, .25]:
        // cost(t) = t·0 + (.5−t)·2 + (.5−(.25−t))·... enumerated below.
        let enumerate = |p: f64| {
            (0..=1000)
                .map(|k| {
                    let t = 0.25 * k as f64 / 1000.0;
                    let m00 = t;
                    let m02 = 0.5 - t;
                    let m10 = 0.25 - t;
                    let m12 = 0.75 - m02;
                    m00 * 0.0 + m02 * 2f64.powf(p) + m10 * 1.0 + m12 * 1.0
                })
                .fold(f64::INFINITY, f64::min)
        };
        let w1 = solve_ot(&mu, &nu, cost::lp_power(1.0)).unwrap();
        assert!((w1.value - 1.0).abs() < 1e-15);
        assert!((enumerate(1.0) - 1.0).abs() < 1e-15);
        let w2 = solve_ot(&mu, &nu, cost::lp_power(2.0)).unwrap();
        assert!((w2.value - 1.5).abs() < 1e-15);
        assert!((enumerate(2.0) - 1.5).abs() < 1e-15);
        assert!(w2.witness.margin_defect(&mu, &nu).is_zero());
        assert!(w2.slackness_violation(&CostMatrix::build(&mu, &nu, cost::lp_power(2.0)).unwrap()) < 1e-12);
    }

    #[test]
    fn cap_is_enforced() {
        let pts: Vec<Vec<f64>> = (0..65).map(|k| vec![k as f64]).collect();
        let mu = DiscreteMeasureND::uniform(pts).unwrap();
        assert_eq!(
            solve_ot(&mu, &mu, cost::lp_power(1.0)).unwrap_err(),
            Error::CapExceeded { n: 65, cap: 64 }
        );
    }

    #[test]
    fn rejects_bad_cost_and_dims() {
        let a = DiscreteMeasureND::uniform(vec![vec![0.0]]).unwrap();
        let b = DiscreteMeasureND::uniform(vec![vec![1.0]]).unwrap();
        assert!(matches!(solve_ot(&a, &b, |_, _| f64::NAN), Err(Error::InvalidCost(_))));
        assert!(matches!(solve_ot(&a, &b, |_, _| -1.0), Err(Error::InvalidCost(_))));
        let c = DiscreteMeasureND::uniform(vec![vec![1.0, 2.0]]).unwrap();
        assert!(matches!(
            solve_ot(&a, &c, cost::lp_power(1.0)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn measure_validation() {
        assert!(DiscreteMeasureND::new(vec![vec![0.0], vec![1.0]], vec![r(1, 2), r(1, 3)]).is_err());
        let m = DiscreteMeasureND::new(vec![vec![1.0], vec![0.0], vec![1.0]], vec![r(1, 4), r(1, 2), r(1, 4)]).unwrap();
        assert_eq!(m.points(), &[vec![0.0], vec![1.0]]);
        assert_eq!(m.masses(), &[r(1, 2), r(1, 2)]);
        assert!(DiscreteMeasureND::from_f64_masses(vec![vec![0.0]], &[0.9]).is_err());
        assert!(DiscreteMeasureND::uniform(vec![vec![0.0], vec![1.0, 2.0]]).is_err());
        assert!(DiscreteMeasureND::uniform(vec![]).is_err());
    }

    #[test]
    fn assignment_requires_equal_masses() {
        let a = line(&[0.0, 1.0], &[0.5, 0.5]);
        let b = line(&[0.0, 2.0], &[0.25, 0.75]);
        assert!(matches!(
            solve_assignment(&a, &b, cost::lp_power(1.0)),
            Err(Error::NotAnAssignment(_))
        ));
        let c = line(&[0.0], &[1.0]);
        assert!(matches!(
            solve_assignment(&a, &c, cost::lp_power(1.0)),
            Err(Error::NotAnAssignment(_))
        ));
    }

    #[test]
    fn assignment_single_and_sorted() {
        let a = DiscreteMeasureND::uniform(vec![vec![4.0]]).unwrap();
        let b = DiscreteMeasureND::uniform(vec![vec![1.0]]).unwrap();
        assert_eq!(solve_assignment(&a, &b, cost::lp_power(2.0)).unwrap(), (9.0, vec![0]));

        let a = DiscreteMeasureND::uniform(vec![vec![0.3], vec![-1.0], vec![2.5], vec![0.9]]).unwrap();
        let b = DiscreteMeasureND::uniform(vec![vec![7.0], vec![-3.0], vec![1.0], vec![0.0]]).unwrap();
        let (_, perm) = solve_assignment(&a, &b, cost::lp_power(2.0)).unwrap();
        // Both sides are stored sorted, so the optimal map is the identity.
        assert_eq!(perm, vec![0, 1, 2, 3]);
    }

    #[test]
    fn fast_path_agrees_with_simplex() {
        let pts = |xs: &[f64]| xs.iter().map(|&x| vec![x, x * x - 1.0]).collect::<Vec<_>>();
        let a = DiscreteMeasureND::uniform(pts(&[0.1, 0.7, -0.4, 1.3, 2.2])).unwrap();
        let b = DiscreteMeasureND::uniform(pts(&[0.5, -1.1, 0.9, 1.8, -0.2])).unwrap();
        let fast = solve_ot(&a, &b, cost::lp_power(1.5)).unwrap();
        let slow = solve_ot_with(
            &a,
            &b,
            cost::lp_power(1.5),
            OtConfig {
                assignment_fast_path: false,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((fast.value - slow.value).abs() < 1e-12);
        let costs = CostMatrix::build(&a, &b, cost::lp_power(1.5)).unwrap();
        assert!(fast.slackness_violation(&costs) < 1e-9);
        assert!(slow.slackness_violation(&costs) < 1e-9);
    }
}
