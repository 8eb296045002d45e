//! `W_p` and `W_{p,q}` through distribution functions, quantile
//! functions and the comonotone copula.
//!
//! For two discrete laws every engine is an exact finite sum over merged
//! breakpoints. For parametric laws the integrals run over levels in
//! `(ε, 1 − ε)` and the report carries the quadrature error estimate.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::copulas::{self, CopulaSpec};
use crate::distributions::{Distribution1D, DEFAULT_QUANTILE_EPS};
use crate::error::{Error, Result};
use crate::numeric::{self, NeumaierSum, Rational};
use crate::quadrature::{self, Estimate, QuadratureConfig};

/// Default tolerance of adaptive quadrature.
pub const DEFAULT_GRID_TOL: f64 = 1e-8;

/// How integrals over `(0, 1)` (or ℝ) are discretized for parametric laws.
/// Pairs of discrete laws are always handled exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridSpec {
    ExactBreakpoints,
    UniformGrid(usize),
    AdaptiveQuadrature(f64),
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::AdaptiveQuadrature(DEFAULT_GRID_TOL)
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            GridSpec::ExactBreakpoints => Ok(()),
            GridSpec::UniformGrid(n) if n >= 2 => Ok(()),
            GridSpec::UniformGrid(n) => Err(Error::InvalidGrid(format!("uniform grid needs n >= 2, got {n}"))),
            GridSpec::AdaptiveQuadrature(tol) if tol > 0.0 && tol.is_finite() => Ok(()),
            GridSpec::AdaptiveQuadrature(tol) => Err(Error::InvalidGrid(format!(
                "quadrature tolerance must be positive, got {tol}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    CdfIntegral,
    QuantileIntegral,
    ComonotoneCopulaIntegral,
    SharedCopulaSum,
    #[serde(rename = "OracleLP")]
    OracleLp,
}

/// Result of a distance computation.
///
/// `value` is the distance itself and `power_value` its `p`-th power;
/// `error_estimate` bounds the error of `power_value`. `bounds`, when
/// present, brackets `W_{p,q}^p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub p: f64,
    pub q: Option<f64>,
    pub value: f64,
    pub power_value: f64,
    pub method: Method,
    pub error_estimate: f64,
    pub bounds: Option<(f64, f64)>,
}

impl DistanceReport {
    pub fn new(p: f64, power: Estimate, method: Method) -> Self {
        let power_value = power.value.max(0.0);
        DistanceReport {
            p,
            q: None,
            value: power_value.powf(1.0 / p),
            power_value,
            method,
            error_estimate: power.error,
            bounds: None,
        }
    }
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidExponent(p))
    }
}

fn moment_gate(d: &Distribution1D, p: f64) -> Result<()> {
    d.validate()?;
    d.moment(p).map(|_| ())
}

/// `∫_ℝ |F(x) − G(x)| dx`, which equals `W_1`.
pub fn w1_cdf(f: &Distribution1D, g: &Distribution1D, grid: GridSpec) -> Result<DistanceReport> {
    grid.validate()?;
    moment_gate(f, 1.0)?;
    moment_gate(g, 1.0)?;
    let estimate = if let (Some(ef), Some(eg)) = (f.as_empirical(), g.as_empirical()) {
        // Step integrand: constant between consecutive merged locations.
        let mut xs: Vec<f64> = ef.locations().iter().chain(eg.locations()).copied().collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let mut sum = NeumaierSum::new();
        for w in xs.windows(2) {
            let gap = (f.cdf(w[0])? - g.cdf(w[0])?).abs();
            sum.add(gap * (w[1] - w[0]));
        }
        let value = sum.value();
        Estimate {
            value,
            error: f64::EPSILON * xs.len() as f64 * value,
        }
    } else {
        let eps = DEFAULT_QUANTILE_EPS;
        let lo = f.quantile(0.0)?.min(g.quantile(0.0)?);
        let hi = f.quantile(1.0)?.max(g.quantile(1.0)?);
        let integrand = |x: f64| (f.cdf(x).unwrap_or(f64::NAN) - g.cdf(x).unwrap_or(f64::NAN)).abs();
        let mut est = match grid {
            GridSpec::AdaptiveQuadrature(tol) => {
                let mut cuts = vec![lo, hi];
                for d in [f, g] {
                    if let Some(e) = d.as_empirical() {
                        cuts.extend(e.locations().iter().copied());
                    }
                }
                cuts.sort_by(f64::total_cmp);
                cuts.dedup();
                let cfg = QuadratureConfig {
                    tol,
                    ..Default::default()
                };
                let mut total = Estimate::zero();
                for w in cuts.windows(2) {
                    total = total + quadrature::integrate(integrand, w[0], w[1], cfg)?;
                }
                total
            }
            GridSpec::UniformGrid(n) => quadrature::midpoint(integrand, lo, hi, n)?,
            GridSpec::ExactBreakpoints => {
                return Err(Error::InvalidGrid(
                    "exact breakpoints require both laws to be discrete".into(),
                ))
            }
        };
        // Mass beyond the clipped range.
        est.error += 2.0 * eps * (hi - lo);
        est
    };
    Ok(DistanceReport::new(1.0, estimate, Method::CdfIntegral))
}

/// `W_p^p = ∫₀¹ |F^{-1}(u) − G^{-1}(u)|^p du`.
pub fn wp_quantile(f: &Distribution1D, g: &Distribution1D, p: f64, grid: GridSpec) -> Result<DistanceReport> {
    check_exponent(p)?;
    grid.validate()?;
    moment_gate(f, p)?;
    moment_gate(g, p)?;
    let estimate = if let (Some(ef), Some(eg)) = (f.as_empirical(), g.as_empirical()) {
        // Sweep both staircases; each segment between consecutive distinct
        // cumulative weights pairs one atom of each law.
        let (cf, cg) = (ef.cumulative(), eg.cumulative());
        let (xf, xg) = (ef.locations(), eg.locations());
        let (mut i, mut j) = (0, 0);
        let mut prev = Rational::zero();
        let mut sum = NeumaierSum::new();
        let mut terms = 0usize;
        loop {
            let next = if cf[i] < cg[j] { &cf[i] } else { &cg[j] }.clone();
            let mass = numeric::rational_to_f64(&(&next - &prev));
            sum.add(mass * (xf[i] - xg[j]).abs().powf(p));
            terms += 1;
            if next.is_one() {
                break;
            }
            if cf[i] == next {
                i += 1;
            }
            if cg[j] == next {
                j += 1;
            }
            prev = next;
        }
        let value = sum.value();
        Estimate {
            value,
            error: f64::EPSILON * terms as f64 * value,
        }
    } else {
        let integrand = |u: f64| {
            let x = f.quantile(u).unwrap_or(f64::NAN);
            let y = g.quantile(u).unwrap_or(f64::NAN);
            (x - y).abs().powf(p)
        };
        match grid {
            GridSpec::AdaptiveQuadrature(tol) => {
                copulas::integrate_levels(integrand, &copulas::quantile_breaks(&[f, g]), DEFAULT_QUANTILE_EPS, tol)?
            }
            GridSpec::UniformGrid(n) => quadrature::midpoint(integrand, 0.0, 1.0, n)?,
            GridSpec::ExactBreakpoints => {
                return Err(Error::InvalidGrid(
                    "exact breakpoints require both laws to be discrete".into(),
                ))
            }
        }
    };
    Ok(DistanceReport::new(p, estimate, Method::QuantileIntegral))
}

/// `W_p^p = ∫∫ |x − y|^p dM(F(x), G(y))`, evaluated as an expectation along
/// the comonotone coupling.
pub fn wp_via_m(f: &Distribution1D, g: &Distribution1D, p: f64, grid: GridSpec) -> Result<DistanceReport> {
    check_exponent(p)?;
    grid.validate()?;
    moment_gate(f, p)?;
    moment_gate(g, p)?;
    let estimate = copulas::expect_comonotone(f, g, |x, y| (x - y).abs().powf(p), grid)?;
    Ok(DistanceReport::new(p, estimate, Method::ComonotoneCopulaIntegral))
}

fn check_margins(copula: Option<&CopulaSpec>, mf: &[Distribution1D], mg: &[Distribution1D]) -> Result<()> {
    if mf.is_empty() {
        return Err(Error::EmptyInput);
    }
    if mf.len() != mg.len() {
        return Err(Error::DimensionMismatch {
            expected: mf.len(),
            got: mg.len(),
        });
    }
    match copula {
        Some(c) => {
            if c.dim() != mf.len() {
                return Err(Error::DimensionMismatch {
                    expected: c.dim(),
                    got: mf.len(),
                });
            }
            if !c.is_copula() {
                return Err(Error::NotACopula(format!("{} in dimension {}", c.name(), c.dim())));
            }
        }
        None if mf.len() > 1 => {
            return Err(Error::Domain("a shared copula is required in dimension > 1".into()));
        }
        None => {}
    }
    Ok(())
}

fn coordinate_sum(mf: &[Distribution1D], mg: &[Distribution1D], p: f64, grid: GridSpec) -> Result<Estimate> {
    let mut total = Estimate::zero();
    let mut sum = NeumaierSum::new();
    for (f, g) in mf.iter().zip(mg) {
        let r = wp_quantile(f, g, p, grid)?;
        sum.add(r.power_value);
        total.error += r.error_estimate;
    }
    total.value = sum.value();
    Ok(total)
}

/// `W_p^p = Σ_i W_p(F_i, G_i)^p` for two laws sharing the copula `C`.
///
/// The copula does not enter the value; it is checked for dimension and
/// genuineness only.
pub fn wp_shared_nd(
    copula: &CopulaSpec,
    margins_f: &[Distribution1D],
    margins_g: &[Distribution1D],
    p: f64,
    grid: GridSpec,
) -> Result<DistanceReport> {
    check_exponent(p)?;
    check_margins(Some(copula), margins_f, margins_g)?;
    let est = coordinate_sum(margins_f, margins_g, p, grid)?;
    Ok(DistanceReport::new(p, est, Method::SharedCopulaSum))
}

/// Norm-equivalence bracket on `W_{p,q}^p` for laws sharing a copula.
///
/// With `S = Σ_i W_p(F_i, G_i)^p`: `[S, d^{p/q−1}·S]` when `q ≤ p` and
/// `[d^{p/q−1}·S, S]` when `p ≤ q`. A copula is required when `d > 1`.
pub fn wpq_bounds(
    copula: Option<&CopulaSpec>,
    margins_f: &[Distribution1D],
    margins_g: &[Distribution1D],
    p: f64,
    q: f64,
    grid: GridSpec,
) -> Result<DistanceReport> {
    check_exponent(p)?;
    check_exponent(q)?;
    if p == q {
        return Err(Error::EqualExponents(p));
    }
    check_margins(copula, margins_f, margins_g)?;
    let est = coordinate_sum(margins_f, margins_g, p, grid)?;
    let s = est.value;
    let d = margins_f.len() as f64;
    let factor = d.powf(p / q - 1.0);
    let bounds = if q <= p { (s, factor * s) } else { (factor * s, s) };
    let mut report = DistanceReport::new(p, est, Method::SharedCopulaSum);
    report.q = Some(q);
    report.bounds = Some(bounds);
    Ok(report)
}

/// `Σ_i W_p(F_i, G_i)^p`, a lower bound on `W_p^p` for any pair of laws with
/// these margins (projections of a coupling are couplings of the margins).
pub fn wp_lower_bound_nd(margins_f: &[Distribution1D], margins_g: &[Distribution1D], p: f64) -> Result<f64> {
    check_exponent(p)?;
    if margins_f.is_empty() {
        return Err(Error::EmptyInput);
    }
    if margins_f.len() != margins_g.len() {
        return Err(Error::DimensionMismatch {
            expected: margins_f.len(),
            got: margins_g.len(),
        });
    }
    Ok(coordinate_sum(margins_f, margins_g, p, GridSpec::default())?.value)
}
