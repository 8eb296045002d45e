//! Copulas, Fréchet–Hoeffding bounds, Sklar assembly and comonotone
//! couplings.

use std::sync::Arc;

use num_traits::{One, Zero};

use crate::distributions::{Distribution1D, Empirical};
use crate::error::{Error, Result};
use crate::numeric::{self, NeumaierSum, Rational};
use crate::oracle::DiscreteMeasureND;
use crate::quadrature::{self, Estimate, QuadratureConfig};
use crate::wasserstein::GridSpec;

/// Absolute slack used when comparing exact copulas against their bounds.
pub const COPULA_TOL: f64 = 1e-12;

fn check_unit_cube(u: &[f64]) -> Result<()> {
    if u.is_empty() {
        return Err(Error::EmptyInput);
    }
    for &x in u {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("copula argument {x} outside [0, 1]")));
        }
    }
    Ok(())
}

/// Upper Fréchet–Hoeffding bound `min(u_1, …, u_d)`.
pub fn eval_m(u: &[f64]) -> Result<f64> {
    check_unit_cube(u)?;
    Ok(u.iter().copied().fold(1.0, f64::min))
}

/// Lower Fréchet–Hoeffding bound `max(Σ u_i − d + 1, 0)`.
pub fn eval_w(u: &[f64]) -> Result<f64> {
    check_unit_cube(u)?;
    let deficit = numeric::compensated_sum(u.iter().map(|x| 1.0 - x));
    Ok((1.0 - deficit).max(0.0))
}

/// Empirical copula `(1/n)·#{rows r : r_i ≤ u_i ∀i}` of `n` rows in `[0,1]^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCopula {
    dim: usize,
    rows: Vec<Vec<f64>>,
}

impl EmpiricalCopula {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.first().map(Vec::len).ok_or(Error::EmptyInput)?;
        if dim < 2 {
            return Err(Error::Domain(format!("copula dimension must be at least 2, got {dim}")));
        }
        for row in &rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            check_unit_cube(row)?;
        }
        Ok(EmpiricalCopula { dim, rows })
    }

    /// Pseudo-observations of raw data: column-wise midranks `(r − ½)/n`,
    /// ties sharing their average rank.
    pub fn from_data(data: &[Vec<f64>]) -> Result<Self> {
        let n = data.len();
        let dim = data.first().map(Vec::len).ok_or(Error::EmptyInput)?;
        let mut rows = vec![vec![0.0; dim]; n];
        for c in 0..dim {
            let mut col: Vec<(f64, usize)> = Vec::with_capacity(n);
            for (r, row) in data.iter().enumerate() {
                if row.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: row.len(),
                    });
                }
                if !row[c].is_finite() {
                    return Err(Error::NonFinite(row[c]));
                }
                col.push((row[c], r));
            }
            col.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut start = 0;
            while start < n {
                let mut end = start + 1;
                while end < n && col[end].0 == col[start].0 {
                    end += 1;
                }
                // Ranks start+1..=end share their mean.
                let rank = (start + end + 1) as f64 / 2.0;
                for &(_, r) in &col[start..end] {
                    rows[r][c] = (rank - 0.5) / n as f64;
                }
                start = end;
            }
        }
        Self::new(rows)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn eval(&self, u: &[f64]) -> f64 {
        let hits = self
            .rows
            .iter()
            .filter(|row| row.iter().zip(u).all(|(r, x)| r <= x))
            .count();
        hits as f64 / self.rows.len() as f64
    }
}

/// A dependence structure on `[0,1]^d`.
#[derive(Debug, Clone, PartialEq)]
pub enum CopulaSpec {
    /// `M^d`.
    Comonotone {
        dim: usize,
    },
    /// `W^d`; a copula only for `dim == 2`.
    LowerFH {
        dim: usize,
    },
    Empirical(EmpiricalCopula),
}

impl CopulaSpec {
    pub fn comonotone(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Domain(format!("copula dimension must be at least 2, got {dim}")));
        }
        Ok(CopulaSpec::Comonotone { dim })
    }

    pub fn lower_fh(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Domain(format!("copula dimension must be at least 2, got {dim}")));
        }
        Ok(CopulaSpec::LowerFH { dim })
    }

    pub fn empirical(rows: Vec<Vec<f64>>) -> Result<Self> {
        EmpiricalCopula::new(rows).map(CopulaSpec::Empirical)
    }

    pub fn dim(&self) -> usize {
        match self {
            CopulaSpec::Comonotone { dim } | CopulaSpec::LowerFH { dim } => *dim,
            CopulaSpec::Empirical(e) => e.dim,
        }
    }

    /// False for `W^d` with `d > 2`, which is only a bound.
    pub fn is_copula(&self) -> bool {
        !matches!(self, CopulaSpec::LowerFH { dim } if *dim > 2)
    }

    /// Tolerance against the Fréchet–Hoeffding bounds and uniform margins.
    pub fn slack(&self) -> f64 {
        match self {
            CopulaSpec::Empirical(e) => 1.0 / e.len() as f64 + COPULA_TOL,
            _ => COPULA_TOL,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CopulaSpec::Comonotone { .. } => "comonotone",
            CopulaSpec::LowerFH { .. } => "lower-fh",
            CopulaSpec::Empirical(_) => "empirical",
        }
    }

    pub fn eval(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: u.len(),
            });
        }
        check_unit_cube(u)?;
        Ok(match self {
            CopulaSpec::Comonotone { .. } => eval_m(u)?,
            CopulaSpec::LowerFH { .. } => eval_w(u)?,
            CopulaSpec::Empirical(e) => e.eval(u),
        })
    }

    /// C-volume of the box `[a, b]` by inclusion–exclusion over its corners.
    pub fn volume(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        let d = self.dim();
        if a.len() != d || b.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: a.len().min(b.len()),
            });
        }
        let mut corner = vec![0.0; d];
        let mut total = NeumaierSum::new();
        for mask in 0u32..(1 << d) {
            let mut lows = 0;
            for k in 0..d {
                if mask & (1 << k) != 0 {
                    corner[k] = b[k];
                } else {
                    corner[k] = a[k];
                    lows += 1;
                }
            }
            let sign = if lows % 2 == 0 { 1.0 } else { -1.0 };
            total.add(sign * self.eval(&corner)?);
        }
        Ok(total.value())
    }
}

/// Outcome of comparing a copula value with its Fréchet–Hoeffding bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FhCheck {
    pub lower: f64,
    pub value: f64,
    pub upper: f64,
    pub ok: bool,
}

/// `W(u) − tol ≤ C(u) ≤ M(u) + tol` with the copula's own slack.
pub fn frechet_hoeffding_check(c: &CopulaSpec, u: &[f64]) -> Result<FhCheck> {
    let value = c.eval(u)?;
    frechet_hoeffding_check_value(value, u, c.slack())
}

/// Same check for an arbitrary evaluator.
pub fn frechet_hoeffding_check_with<F: Fn(&[f64]) -> f64>(eval: F, u: &[f64], tol: f64) -> Result<FhCheck> {
    frechet_hoeffding_check_value(eval(u), u, tol)
}

fn frechet_hoeffding_check_value(value: f64, u: &[f64], tol: f64) -> Result<FhCheck> {
    let lower = eval_w(u)?;
    let upper = eval_m(u)?;
    Ok(FhCheck {
        lower,
        value,
        upper,
        ok: lower - tol <= value && value <= upper + tol,
    })
}

/// Margins plus one copula: a law on ℝ^d assembled through Sklar's identity.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSpec {
    margins: Vec<Distribution1D>,
    copula: Arc<CopulaSpec>,
}

impl JointSpec {
    pub fn new(margins: Vec<Distribution1D>, copula: Arc<CopulaSpec>) -> Result<Self> {
        if margins.len() != copula.dim() {
            return Err(Error::DimensionMismatch {
                expected: copula.dim(),
                got: margins.len(),
            });
        }
        if !copula.is_copula() {
            return Err(Error::NotACopula(format!(
                "{} in dimension {}",
                copula.name(),
                copula.dim()
            )));
        }
        for m in &margins {
            m.validate()?;
        }
        Ok(JointSpec { margins, copula })
    }

    pub fn dim(&self) -> usize {
        self.margins.len()
    }

    pub fn margins(&self) -> &[Distribution1D] {
        &self.margins
    }

    pub fn copula(&self) -> &Arc<CopulaSpec> {
        &self.copula
    }

    /// Finitely supported version of the joint law.
    ///
    /// Empirical copula: one atom `(F_i^{-1}(u_{j,i}))_i` of mass `1/n` per
    /// row. Comonotone copula with discrete margins: the exact comonotone
    /// measure on merged cumulative breakpoints.
    pub fn discretize(&self) -> Result<DiscreteMeasureND> {
        match &*self.copula {
            CopulaSpec::Empirical(e) => {
                let points = e
                    .rows
                    .iter()
                    .map(|row| {
                        row.iter()
                            .zip(&self.margins)
                            .map(|(&u, m)| m.quantile(u))
                            .collect::<Result<Vec<f64>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                DiscreteMeasureND::uniform(points)
            }
            CopulaSpec::Comonotone { .. } => {
                let discrete = self
                    .margins
                    .iter()
                    .map(|m| m.as_empirical().map(|e| e.into_owned()))
                    .collect::<Option<Vec<Empirical>>>()
                    .ok_or_else(|| {
                        Error::InvalidGrid("exact comonotone discretization needs discrete margins".into())
                    })?;
                let (points, masses) = merge_comonotone(&discrete.iter().collect::<Vec<_>>());
                DiscreteMeasureND::new(points, masses)
            }
            CopulaSpec::LowerFH { .. } => Err(Error::Domain("countermonotone discretization is not supported".into())),
        }
    }
}

/// `H(x) = C(F_1(x_1), …, F_d(x_d))`.
pub fn sklar_joint_cdf(j: &JointSpec, x: &[f64]) -> Result<f64> {
    if x.len() != j.dim() {
        return Err(Error::DimensionMismatch {
            expected: j.dim(),
            got: x.len(),
        });
    }
    let u = x
        .iter()
        .zip(&j.margins)
        .map(|(&xi, m)| m.cdf(xi))
        .collect::<Result<Vec<f64>>>()?;
    j.copula.eval(&u)
}

/// Comonotone measure of discrete margins: one atom per interval between
/// consecutive distinct cumulative weights, holding each margin's
/// generalized inverse on that interval.
fn merge_comonotone(margins: &[&Empirical]) -> (Vec<Vec<f64>>, Vec<Rational>) {
    let mut idx = vec![0usize; margins.len()];
    let mut prev = Rational::zero();
    let mut points = Vec::new();
    let mut masses = Vec::new();
    loop {
        let next = margins
            .iter()
            .zip(&idx)
            .map(|(m, &k)| &m.cumulative()[k])
            .min()
            .expect("at least one margin")
            .clone();
        points.push(margins.iter().zip(&idx).map(|(m, &k)| m.locations()[k]).collect());
        masses.push(&next - &prev);
        if next.is_one() {
            break;
        }
        for (m, k) in margins.iter().zip(idx.iter_mut()) {
            if m.cumulative()[*k] == next {
                *k += 1;
            }
        }
        prev = next;
    }
    (points, masses)
}

/// Discrete realization of `(F^{-1}(U), G^{-1}(U))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComonotonePair {
    /// Representative level of each atom, strictly inside `(0, 1)`.
    pub u_grid: Vec<f64>,
    pub pairs: Vec<(f64, f64)>,
    pub masses: Vec<f64>,
    /// Exact masses when every atom's mass is rational-exact.
    pub exact_masses: Option<Vec<Rational>>,
}

impl ComonotonePair {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Both coordinate sequences are nondecreasing along the grid.
    pub fn is_comonotone(&self) -> bool {
        self.pairs.windows(2).all(|w| w[0].0 <= w[1].0 && w[0].1 <= w[1].1)
    }
}

/// Comonotone coupling of two laws on ℝ.
///
/// Two discrete laws are coupled exactly on merged breakpoints (at most
/// `n_F + n_G − 1` atoms). Otherwise a [`GridSpec::UniformGrid`] of midpoint
/// levels is used.
pub fn comonotone_coupling(f: &Distribution1D, g: &Distribution1D, grid: GridSpec) -> Result<ComonotonePair> {
    grid.validate()?;
    f.validate()?;
    g.validate()?;
    if let (Some(ef), Some(eg)) = (f.as_empirical(), g.as_empirical()) {
        let (points, masses) = merge_comonotone(&[&ef, &eg]);
        let mut u_grid = Vec::with_capacity(masses.len());
        let mut acc = Rational::zero();
        for m in &masses {
            let mid = &acc + m / Rational::from_integer(2.into());
            u_grid.push(numeric::rational_to_f64(&mid));
            acc += m;
        }
        return Ok(ComonotonePair {
            u_grid,
            pairs: points.into_iter().map(|p| (p[0], p[1])).collect(),
            masses: masses.iter().map(numeric::rational_to_f64).collect(),
            exact_masses: Some(masses),
        });
    }
    match grid {
        GridSpec::UniformGrid(n) => {
            let mut u_grid = Vec::with_capacity(n);
            let mut pairs = Vec::with_capacity(n);
            for k in 0..n {
                let u = (k as f64 + 0.5) / n as f64;
                u_grid.push(u);
                pairs.push((f.quantile(u)?, g.quantile(u)?));
            }
            let share = Rational::new(1.into(), (n as i64).into());
            Ok(ComonotonePair {
                u_grid,
                pairs,
                masses: vec![1.0 / n as f64; n],
                exact_masses: Some(vec![share; n]),
            })
        }
        GridSpec::ExactBreakpoints => Err(Error::InvalidGrid(
            "exact breakpoints require both margins to be discrete".into(),
        )),
        GridSpec::AdaptiveQuadrature(_) => Err(Error::InvalidGrid(
            "adaptive grids depend on the integrand; use a uniform grid to sample a coupling".into(),
        )),
    }
}

/// Levels in `(0, 1)` where a discrete margin's quantile jumps.
pub(crate) fn quantile_breaks(ds: &[&Distribution1D]) -> Vec<f64> {
    let mut cuts = Vec::new();
    for d in ds {
        if let Some(e) = d.as_empirical() {
            for c in e.cumulative() {
                let v = numeric::rational_to_f64(c);
                if v > 0.0 && v < 1.0 {
                    cuts.push(v);
                }
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts
}

/// Integrate `h(u)` over `(0, 1)` split at `cuts`. Quadrature nodes are
/// interior, so `h` is never evaluated at 0 or 1; the pieces below `eps` and
/// above `1 − eps`, where quantiles are clamped, are added to the error.
pub(crate) fn integrate_levels<H>(mut h: H, cuts: &[f64], eps: f64, tol: f64) -> Result<Estimate>
where
    H: FnMut(f64) -> f64,
{
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(0.0);
    edges.extend(cuts.iter().copied().filter(|&c| c > 0.0 && c < 1.0));
    edges.push(1.0);
    let cfg = QuadratureConfig {
        tol,
        ..Default::default()
    };
    let mut total = Estimate::zero();
    let mut nonfinite = None;
    for w in edges.windows(2) {
        let piece = quadrature::integrate(
            |u| {
                let v = h(u);
                if !v.is_finite() {
                    nonfinite = Some(v);
                    0.0
                } else {
                    v
                }
            },
            w[0],
            w[1],
            cfg,
        )?;
        total = total + piece;
    }
    if let Some(v) = nonfinite {
        return Err(Error::NonFinite(v));
    }
    let tails = eps * (h(eps).abs() + h(1.0 - eps).abs());
    total.error += tails;
    Ok(total)
}

/// `∫₀¹ g(F^{-1}(u), G^{-1}(u)) du`, exact for two discrete laws.
pub fn expect_comonotone<G>(f: &Distribution1D, g: &Distribution1D, func: G, grid: GridSpec) -> Result<Estimate>
where
    G: Fn(f64, f64) -> f64,
{
    grid.validate()?;
    if f.is_discrete() && g.is_discrete() {
        let coupling = comonotone_coupling(f, g, grid)?;
        return expect_along(&coupling, func, false);
    }
    match grid {
        GridSpec::UniformGrid(_) => {
            let coupling = comonotone_coupling(f, g, grid)?;
            expect_along(&coupling, func, true)
        }
        GridSpec::AdaptiveQuadrature(tol) => {
            let cuts = quantile_breaks(&[f, g]);
            let eps = crate::distributions::DEFAULT_QUANTILE_EPS;
            integrate_levels(
                |u| {
                    let x = f.quantile(u).unwrap_or(f64::NAN);
                    let y = g.quantile(u).unwrap_or(f64::NAN);
                    func(x, y)
                },
                &cuts,
                eps,
                tol,
            )
        }
        GridSpec::ExactBreakpoints => Err(Error::InvalidGrid(
            "exact breakpoints require both margins to be discrete".into(),
        )),
    }
}

/// Weighted sum of `g` over the atoms of a comonotone coupling.
pub fn expect_along<G>(coupling: &ComonotonePair, func: G, sampled: bool) -> Result<Estimate>
where
    G: Fn(f64, f64) -> f64,
{
    let mut total = NeumaierSum::new();
    let mut coarse = NeumaierSum::new();
    for (k, (&(x, y), &m)) in coupling.pairs.iter().zip(&coupling.masses).enumerate() {
        let v = func(x, y);
        if !v.is_finite() {
            return Err(Error::NonFinite(v));
        }
        total.add(m * v);
        if k % 2 == 0 {
            coarse.add(2.0 * m * v);
        }
    }
    let value = total.value();
    let error = if sampled {
        (value - coarse.value()).abs()
    } else {
        f64::EPSILON * coupling.len() as f64 * value.abs()
    };
    Ok(Estimate { value, error })
}

/// Two joint laws built from one copula object and their own margins.
pub fn shared_copula_build(
    copula: &CopulaSpec,
    margins_f: Vec<Distribution1D>,
    margins_g: Vec<Distribution1D>,
) -> Result<(JointSpec, JointSpec)> {
    if margins_f.len() != margins_g.len() {
        return Err(Error::DimensionMismatch {
            expected: margins_f.len(),
            got: margins_g.len(),
        });
    }
    let shared = Arc::new(copula.clone());
    let jf = JointSpec::new(margins_f, Arc::clone(&shared))?;
    let jg = JointSpec::new(margins_g, shared)?;
    Ok((jf, jg))
}
