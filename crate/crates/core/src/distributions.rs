//! One-dimensional probability laws exposed through their distribution
//! function and generalized inverse.
//!
//! Empirical laws keep exact rational weights. Their CDF and quantile
//! share one float staircase derived from the exact cumulative sums, so the
//! Galois inequalities hold without tolerance.

use std::borrow::Cow;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::numeric::{self, compensated_sum, Rational};
use crate::quadrature::{self, QuadratureConfig};

/// Default clamp applied to `u` when a parametric quantile would be infinite.
pub const DEFAULT_QUANTILE_EPS: f64 = 1e-12;

/// Finitely supported law on ℝ with strictly increasing atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct Empirical {
    locations: Vec<f64>,
    weights: Vec<Rational>,
    cumulative: Vec<Rational>,
    weights_f64: Vec<f64>,
    cumulative_f64: Vec<f64>,
}

impl Empirical {
    /// Sort, merge duplicate locations by exact weight addition, and
    /// normalize. The result does not depend on input order.
    pub fn new(locations: &[f64], weights: &[Rational]) -> Result<Self> {
        if locations.is_empty() {
            return Err(Error::EmptyInput);
        }
        if locations.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: locations.len(),
                got: weights.len(),
            });
        }
        if let Some(&x) = locations.iter().find(|x| !x.is_finite()) {
            return Err(Error::NonFinite(x));
        }
        let weights = numeric::normalize(weights)?;
        let mut atoms: Vec<(f64, Rational)> = locations.iter().copied().zip(weights).collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, Rational)> = Vec::with_capacity(atoms.len());
        for (x, w) in atoms {
            // -0.0 and 0.0 are the same location.
            let x = if x == 0.0 { 0.0 } else { x };
            match merged.last_mut() {
                Some(last) if last.0 == x => last.1 += w,
                _ => merged.push((x, w)),
            }
        }
        Ok(Self::from_sorted(merged))
    }

    fn from_sorted(atoms: Vec<(f64, Rational)>) -> Self {
        let mut locations = Vec::with_capacity(atoms.len());
        let mut weights = Vec::with_capacity(atoms.len());
        let mut cumulative = Vec::with_capacity(atoms.len());
        let mut acc = Rational::zero();
        for (x, w) in atoms {
            acc += &w;
            locations.push(x);
            weights.push(w);
            cumulative.push(acc.clone());
        }
        debug_assert!(acc.is_one());
        let weights_f64 = weights.iter().map(numeric::rational_to_f64).collect();
        let mut cumulative_f64: Vec<f64> = cumulative.iter().map(numeric::rational_to_f64).collect();
        if let Some(last) = cumulative_f64.last_mut() {
            *last = 1.0;
        }
        Empirical {
            locations,
            weights,
            cumulative,
            weights_f64,
            cumulative_f64,
        }
    }

    pub fn point_mass(x: f64) -> Result<Self> {
        Self::new(&[x], &[Rational::one()])
    }

    /// `n` atoms of mass `1/n` each (merged when locations repeat).
    pub fn uniform_atoms(locations: &[f64]) -> Result<Self> {
        let w = vec![Rational::one(); locations.len()];
        Self::new(locations, &w)
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    pub fn locations(&self) -> &[f64] {
        &self.locations
    }

    /// Exact normalized weights.
    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn weights_f64(&self) -> &[f64] {
        &self.weights_f64
    }

    /// Exact cumulative weights; the last entry is one.
    pub fn cumulative(&self) -> &[Rational] {
        &self.cumulative
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, &Rational)> + '_ {
        self.locations.iter().copied().zip(self.weights.iter())
    }

    fn cdf(&self, x: f64) -> f64 {
        let k = self.locations.partition_point(|&loc| loc <= x);
        if k == 0 {
            0.0
        } else {
            self.cumulative_f64[k - 1]
        }
    }

    fn quantile(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return self.locations[0];
        }
        if u >= 1.0 {
            return *self.locations.last().expect("nonempty");
        }
        let k = self.cumulative_f64.partition_point(|&c| c < u);
        self.locations[k.min(self.locations.len() - 1)]
    }

    /// Image of the law under `x ↦ a·x + b`.
    pub fn affine(&self, a: f64, b: f64) -> Result<Self> {
        let xs: Vec<f64> = self.locations.iter().map(|x| a * x + b).collect();
        Self::new(&xs, &self.weights)
    }
}

/// A law on ℝ, either finitely supported or from a closed-form family.
#[derive(Debug, Clone, PartialEq)]
pub enum Distribution1D {
    Empirical(Empirical),
    PointMass(f64),
    Uniform { a: f64, b: f64 },
    Normal { mean: f64, stddev: f64 },
    Exponential { rate: f64 },
}

impl From<Empirical> for Distribution1D {
    fn from(e: Empirical) -> Self {
        Distribution1D::Empirical(e)
    }
}

impl Distribution1D {
    pub fn point_mass(x: f64) -> Result<Self> {
        let d = Distribution1D::PointMass(x);
        d.validate()?;
        Ok(d)
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        let d = Distribution1D::Uniform { a, b };
        d.validate()?;
        Ok(d)
    }

    pub fn normal(mean: f64, stddev: f64) -> Result<Self> {
        let d = Distribution1D::Normal { mean, stddev };
        d.validate()?;
        Ok(d)
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        let d = Distribution1D::Exponential { rate };
        d.validate()?;
        Ok(d)
    }

    /// Check the parameter constraints of the parametric families.
    pub fn validate(&self) -> Result<()> {
        let finite = |v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::NonFinite(v))
            }
        };
        match *self {
            Distribution1D::Empirical(_) => Ok(()),
            Distribution1D::PointMass(x) => finite(x),
            Distribution1D::Uniform { a, b } => {
                finite(a)?;
                finite(b)?;
                if a < b {
                    Ok(())
                } else {
                    Err(Error::Domain(format!("uniform requires a < b, got a={a}, b={b}")))
                }
            }
            Distribution1D::Normal { mean, stddev } => {
                finite(mean)?;
                finite(stddev)?;
                if stddev > 0.0 {
                    Ok(())
                } else {
                    Err(Error::Domain(format!("normal requires stddev > 0, got {stddev}")))
                }
            }
            Distribution1D::Exponential { rate } => {
                finite(rate)?;
                if rate > 0.0 {
                    Ok(())
                } else {
                    Err(Error::Domain(format!("exponential requires rate > 0, got {rate}")))
                }
            }
        }
    }

    /// Finitely supported view of the law, if it has one.
    pub fn as_empirical(&self) -> Option<Cow<'_, Empirical>> {
        match self {
            Distribution1D::Empirical(e) => Some(Cow::Borrowed(e)),
            Distribution1D::PointMass(x) => Empirical::point_mass(*x).ok().map(Cow::Owned),
            _ => None,
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, Distribution1D::Empirical(_) | Distribution1D::PointMass(_))
    }

    /// Infimum and supremum of the support (possibly infinite).
    pub fn support(&self) -> (f64, f64) {
        match self {
            Distribution1D::Empirical(e) => (e.locations[0], *e.locations.last().expect("nonempty")),
            Distribution1D::PointMass(x) => (*x, *x),
            Distribution1D::Uniform { a, b } => (*a, *b),
            Distribution1D::Normal { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Distribution1D::Exponential { .. } => (0.0, f64::INFINITY),
        }
    }

    /// Distribution function `P(X ≤ x)`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::Domain(format!("cdf argument must be finite, got {x}")));
        }
        Ok(match *self {
            Distribution1D::Empirical(ref e) => e.cdf(x),
            Distribution1D::PointMass(a) => {
                if x >= a {
                    1.0
                } else {
                    0.0
                }
            }
            Distribution1D::Uniform { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
            Distribution1D::Normal { mean, stddev } => normal_cdf((x - mean) / stddev),
            Distribution1D::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -libm::expm1(-rate * x)
                }
            }
        })
    }

    /// Generalized inverse `inf{x : F(x) ≥ u}` with the default clamp.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        self.quantile_with_eps(u, DEFAULT_QUANTILE_EPS)
    }

    /// Generalized inverse. `u = 0` and `u = 1` give the support bounds when
    /// those are finite; otherwise `u` is clamped to `[eps, 1 - eps]`.
    pub fn quantile_with_eps(&self, u: f64, eps: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::Domain(format!("quantile level must lie in [0, 1], got {u}")));
        }
        Ok(match *self {
            Distribution1D::Empirical(ref e) => e.quantile(u),
            Distribution1D::PointMass(a) => a,
            Distribution1D::Uniform { a, b } => {
                if u == 1.0 {
                    b
                } else {
                    a + u * (b - a)
                }
            }
            Distribution1D::Normal { mean, stddev } => {
                let u = u.clamp(eps, 1.0 - eps);
                mean + stddev * normal_quantile(u)
            }
            Distribution1D::Exponential { rate } => {
                let u = u.min(1.0 - eps);
                -libm::log1p(-u) / rate
            }
        })
    }

    /// Certified finite estimate of `∫|x|^p dμ`.
    pub fn moment(&self, p: f64) -> Result<MomentCertificate> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::InvalidExponent(p));
        }
        let bound = match *self {
            Distribution1D::Empirical(ref e) => {
                compensated_sum(e.locations.iter().zip(&e.weights_f64).map(|(x, w)| w * x.abs().powf(p)))
            }
            Distribution1D::PointMass(a) => a.abs().powf(p),
            Distribution1D::Uniform { a, b } => uniform_abs_moment(a, b, p),
            Distribution1D::Exponential { rate } => libm::tgamma(p + 1.0) / rate.powf(p),
            Distribution1D::Normal { mean, stddev } => {
                let density = |x: f64| {
                    let z = (x - mean) / stddev;
                    x.abs().powf(p) * (-0.5 * z * z).exp() / (stddev * (2.0 * std::f64::consts::PI).sqrt())
                };
                let lo = mean - 40.0 * stddev;
                let hi = mean + 40.0 * stddev;
                let cfg = QuadratureConfig {
                    tol: 1e-10,
                    ..Default::default()
                };
                // Split at the kink of |x|^p and at the mode.
                let mut cuts = vec![lo, hi, mean];
                if lo < 0.0 && 0.0 < hi {
                    cuts.push(0.0);
                }
                cuts.sort_by(f64::total_cmp);
                cuts.dedup();
                let mut total = quadrature::Estimate::zero();
                for w in cuts.windows(2) {
                    total = total + quadrature::integrate(density, w[0], w[1], cfg)?;
                }
                total.value + total.error
            }
        };
        if !bound.is_finite() {
            return Err(Error::MomentGate { p });
        }
        Ok(MomentCertificate { p, bound })
    }
}

/// Finite upper estimate of the `p`-th absolute moment, proof that a law
/// lies in the Wasserstein space of order `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentCertificate {
    pub p: f64,
    pub bound: f64,
}

/// Build an empirical law from samples and optional positive weights.
pub fn empirical_from_samples(xs: &[f64], ws: Option<&[f64]>) -> Result<Distribution1D> {
    let weights: Vec<Rational> = match ws {
        None => vec![Rational::one(); xs.len()],
        Some(ws) => {
            if ws.len() != xs.len() {
                return Err(Error::DimensionMismatch {
                    expected: xs.len(),
                    got: ws.len(),
                });
            }
            ws.iter()
                .map(|&w| {
                    if !(w.is_finite() && w > 0.0) {
                        return Err(Error::InvalidWeight(w.to_string()));
                    }
                    numeric::rational_from_decimal_f64(w)
                })
                .collect::<Result<_>>()?
        }
    };
    Ok(Distribution1D::Empirical(Empirical::new(xs, &weights)?))
}

fn uniform_abs_moment(a: f64, b: f64, p: f64) -> f64 {
    let q = p + 1.0;
    let mass = if a >= 0.0 {
        b.powf(q) - a.powf(q)
    } else if b <= 0.0 {
        (-a).powf(q) - (-b).powf(q)
    } else {
        (-a).powf(q) + b.powf(q)
    };
    mass / (q * (b - a))
}

/// Standard normal distribution function.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Inverse of the standard normal distribution function on `(0, 1)`.
///
/// Acklam's rational approximation followed by one Halley step against
/// `erfc`, which brings the error to a few ulps.
pub fn normal_quantile(u: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e1,
        2.209460984245205e2,
        -2.759285104469687e2,
        1.383_577_518_672_69e2,
        -3.066479806614716e1,
        2.506628277459239,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e1,
        1.615858368580409e2,
        -1.556989798598866e2,
        6.680131188771972e1,
        -1.328068155288572e1,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-3,
        -3.223964580411365e-1,
        -2.400758277161838,
        -2.549732539343734,
        4.374664141464968,
        2.938163982698783,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-3,
        3.224671290700398e-1,
        2.445134137142996,
        3.754408661907416,
    ];
    const LOW: f64 = 0.02425;

    if u <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if u >= 1.0 {
        return f64::INFINITY;
    }
    if u == 0.5 {
        return 0.0;
    }
    let tail = |q: f64| {
        let t = (-2.0 * q.ln()).sqrt();
        (((((C[0] * t + C[1]) * t + C[2]) * t + C[3]) * t + C[4]) * t + C[5])
            / ((((D[0] * t + D[1]) * t + D[2]) * t + D[3]) * t + 1.0)
    };
    let x = if u < LOW {
        tail(u)
    } else if u <= 1.0 - LOW {
        let q = u - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail(1.0 - u)
    };
    // Halley refinement. In the upper tail work with the complement to
    // avoid cancellation in Φ(x) - u.
    let e = if u > 0.5 {
        (1.0 - u) - 0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
    } else {
        0.5 * libm::erfc(-x / std::f64::consts::SQRT_2) - u
    };
    let step = e * (2.0 * std::f64::consts::PI).sqrt() * (0.5 * x * x).exp();
    x - step / (1.0 + 0.5 * x * step)
}
