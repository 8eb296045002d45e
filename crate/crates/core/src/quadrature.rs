//! Globally adaptive Gauss–Kronrod (7/15) integration and a composite
//! midpoint rule, both returning an error estimate alongside the value.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Integral value with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn zero() -> Self {
        Estimate { value: 0.0, error: 0.0 }
    }
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, rhs: Self) -> Self {
        Estimate {
            value: self.value + rhs.value,
            error: self.error + rhs.error,
        }
    }
}

/// Settings for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadratureConfig {
    /// Target for the error estimate, applied as `tol * max(1, |I|)`.
    pub tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            tol: 1e-8,
            max_intervals: 4000,
        }
    }
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (k, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod += w * (f1 + f2);
        if k % 2 == 1 {
            gauss += WG[k / 2] * (f1 + f2);
        }
    }
    let value = kronrod * half;
    if !value.is_finite() {
        return Err(Error::NonFinite(value));
    }
    let err = ((kronrod - gauss) * half).abs();
    // Round-off floor.
    let err = err.max(50.0 * f64::EPSILON * value.abs());
    Ok((value, err))
}

#[derive(Debug)]
struct Interval {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrate `f` over `[a, b]`, bisecting the interval with the largest
/// local error until the total error meets the tolerance.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, cfg: QuadratureConfig) -> Result<Estimate> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("integration bounds must be finite: [{a}, {b}]")));
    }
    if cfg.tol.is_nan() || cfg.tol <= 0.0 {
        return Err(Error::InvalidGrid(format!(
            "tolerance must be positive, got {}",
            cfg.tol
        )));
    }
    if a == b {
        return Ok(Estimate::zero());
    }
    if a > b {
        let e = integrate(f, b, a, cfg)?;
        return Ok(Estimate {
            value: -e.value,
            error: e.error,
        });
    }
    let (v, e) = gk15(&mut f, a, b)?;
    let mut heap = BinaryHeap::new();
    heap.push(Interval {
        a,
        b,
        value: v,
        error: e,
    });
    let mut total = v;
    let mut total_err = e;
    while total_err > cfg.tol * total.abs().max(1.0) {
        if heap.len() >= cfg.max_intervals {
            return Err(Error::Quadrature {
                estimate: total_err,
                tol: cfg.tol,
                intervals: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval cannot be split further in floating point.
            heap.push(worst);
            return Err(Error::Quadrature {
                estimate: total_err,
                tol: cfg.tol,
                intervals: heap.len(),
            });
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid)?;
        let (v2, e2) = gk15(&mut f, mid, worst.b)?;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Interval {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Interval {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // Re-sum to shed the drift of the running totals.
    let mut value = crate::numeric::NeumaierSum::new();
    let mut error = 0.0;
    for iv in heap.iter() {
        value.add(iv.value);
        error += iv.error;
    }
    Ok(Estimate {
        value: value.value(),
        error,
    })
}

/// Composite midpoint rule with `n` cells; the error estimate is the
/// difference to the rule with half as many cells.
pub fn midpoint<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize) -> Result<Estimate> {
    if n < 2 {
        return Err(Error::InvalidGrid(format!("uniform grid needs n >= 2, got {n}")));
    }
    let h = (b - a) / n as f64;
    let mut fine = crate::numeric::NeumaierSum::new();
    let mut coarse = crate::numeric::NeumaierSum::new();
    let half = n / 2;
    let hc = (b - a) / half as f64;
    for k in 0..n {
        let v = f(a + (k as f64 + 0.5) * h);
        if !v.is_finite() {
            return Err(Error::NonFinite(v));
        }
        fine.add(v);
    }
    for k in 0..half {
        coarse.add(f(a + (k as f64 + 0.5) * hc));
    }
    let value = fine.value() * h;
    let coarse_value = coarse.value() * hc;
    Ok(Estimate {
        value,
        error: (value - coarse_value).abs(),
    })
}
