//! Closed-form distances checked against the exact transport optimum.

use serde::Serialize;

use super::{cost, solve_ot_with, DiscreteMeasureND, OtConfig};
use crate::copulas::{shared_copula_build, CopulaSpec};
use crate::distributions::{Distribution1D, Empirical};
use crate::error::Result;
use crate::wasserstein::{wp_lower_bound_nd, wp_quantile, wp_shared_nd, wpq_bounds, GridSpec};

/// Relative tolerance for formula-versus-LP equalities.
pub const EQUALITY_TOL: f64 = 1e-9;
/// Absolute slack for inequality checks.
pub const BOUND_SLACK: f64 = 1e-10;

/// LP optimum against a closed-form value.
#[derive(Debug, Clone, Serialize)]
pub struct EqualityCheck {
    pub lp_value: f64,
    pub formula_value: f64,
    pub gap: f64,
    pub passed: bool,
}

/// LP optimum against a two-sided bracket.
#[derive(Debug, Clone, Serialize)]
pub struct SandwichCheck {
    pub lp_value: f64,
    pub lower: f64,
    pub upper: f64,
    /// Distance outside the bracket, zero when contained.
    pub excess: f64,
    pub passed: bool,
}

/// Two laws with identical margins and different copulas.
#[derive(Debug, Clone, Serialize)]
pub struct NecessityCheck {
    pub lp_value: f64,
    /// `Σ_i W_p(μ_i, ν_i)^p`, what the decomposition would claim.
    pub decomposition_value: f64,
    pub mu_atoms: Vec<Vec<f64>>,
    pub nu_atoms: Vec<Vec<f64>>,
    /// LP value ≥ decomposition value − slack.
    pub projection_bound_holds: bool,
    /// LP value exceeds the decomposition value.
    pub strict_gap: bool,
}

/// Settings shared by the checks. `formula_offset` is added to every
/// closed-form value and exists to exercise failure reporting.
#[derive(Debug, Clone, Copy, Default)]
pub struct Verifier {
    pub ot: OtConfig,
    pub formula_offset: f64,
}

fn margins_of(m: &DiscreteMeasureND) -> Result<Vec<Distribution1D>> {
    Ok(m.marginals()?.into_iter().map(Distribution1D::Empirical).collect())
}

impl Verifier {
    /// `W_p^p` by the quantile integral versus the LP with cost `|x − y|^p`.
    /// Passes when the gap is at most `1e-9 · max(1, lp)`.
    pub fn comonotone_optimal(&self, f: &Empirical, g: &Empirical, p: f64) -> Result<EqualityCheck> {
        let formula = wp_quantile(
            &Distribution1D::Empirical(f.clone()),
            &Distribution1D::Empirical(g.clone()),
            p,
            GridSpec::ExactBreakpoints,
        )?
        .power_value
            + self.formula_offset;
        let lp = solve_ot_with(&f.into(), &g.into(), cost::lp_power(p), self.ot)?.value;
        let gap = (lp - formula).abs();
        Ok(EqualityCheck {
            lp_value: lp,
            formula_value: formula,
            gap,
            passed: gap <= EQUALITY_TOL * lp.max(1.0),
        })
    }

    /// Discretize two laws sharing `copula` and compare the LP with cost
    /// `‖x − y‖_p^p` against the coordinate-wise sum on the discrete margins.
    pub fn shared_copula_decomposition(
        &self,
        copula: &CopulaSpec,
        margins_f: Vec<Distribution1D>,
        margins_g: Vec<Distribution1D>,
        p: f64,
    ) -> Result<EqualityCheck> {
        let (jf, jg) = shared_copula_build(copula, margins_f, margins_g)?;
        let (x, y) = (jf.discretize()?, jg.discretize()?);
        let formula = wp_shared_nd(
            copula,
            &margins_of(&x)?,
            &margins_of(&y)?,
            p,
            GridSpec::ExactBreakpoints,
        )?
        .power_value
            + self.formula_offset;
        let lp = solve_ot_with(&x, &y, cost::lp_power(p), self.ot)?.value;
        let gap = (lp - formula).abs();
        let scale = lp.abs().max(formula.abs());
        Ok(EqualityCheck {
            lp_value: lp,
            formula_value: formula,
            gap,
            passed: gap <= EQUALITY_TOL * scale,
        })
    }

    /// Exact `W_{p,q}^p` (cost `‖x − y‖_q^p`) against the norm-equivalence
    /// bracket on a discretized shared-copula pair.
    pub fn wpq_sandwich(
        &self,
        copula: &CopulaSpec,
        margins_f: Vec<Distribution1D>,
        margins_g: Vec<Distribution1D>,
        p: f64,
        q: f64,
    ) -> Result<SandwichCheck> {
        let (jf, jg) = shared_copula_build(copula, margins_f, margins_g)?;
        let (x, y) = (jf.discretize()?, jg.discretize()?);
        let report = wpq_bounds(
            Some(copula),
            &margins_of(&x)?,
            &margins_of(&y)?,
            p,
            q,
            GridSpec::ExactBreakpoints,
        )?;
        let (lower, upper) = report.bounds.expect("wpq_bounds always sets bounds");
        let (lower, upper) = (lower + self.formula_offset, upper + self.formula_offset);
        let lp = solve_ot_with(&x, &y, cost::lq_norm_pow(q, p), self.ot)?.value;
        let excess = (lower - lp).max(lp - upper).max(0.0);
        Ok(SandwichCheck {
            lp_value: lp,
            lower,
            upper,
            excess,
            passed: lp >= lower - BOUND_SLACK && lp <= upper + BOUND_SLACK,
        })
    }

    /// Same margins, different copulas: the projection bound must hold and
    /// the LP value generally exceeds the coordinate-wise sum.
    pub fn necessity(
        &self,
        copula_mu: &CopulaSpec,
        copula_nu: &CopulaSpec,
        margins: Vec<Distribution1D>,
        p: f64,
    ) -> Result<NecessityCheck> {
        let (jmu, _) = shared_copula_build(copula_mu, margins.clone(), margins.clone())?;
        let (jnu, _) = shared_copula_build(copula_nu, margins.clone(), margins)?;
        let (x, y) = (jmu.discretize()?, jnu.discretize()?);
        let decomposition = wp_lower_bound_nd(&margins_of(&x)?, &margins_of(&y)?, p)? + self.formula_offset;
        let lp = solve_ot_with(&x, &y, cost::lp_power(p), self.ot)?.value;
        Ok(NecessityCheck {
            lp_value: lp,
            decomposition_value: decomposition,
            mu_atoms: x.points().to_vec(),
            nu_atoms: y.points().to_vec(),
            projection_bound_holds: lp >= decomposition - BOUND_SLACK,
            strict_gap: lp > decomposition + BOUND_SLACK,
        })
    }

    /// LP with cost `‖x − y‖_p^p` against `Σ_i W_p(μ_i, ν_i)^p` for arbitrary
    /// discrete measures.
    pub fn projection_bound(&self, mu: &DiscreteMeasureND, nu: &DiscreteMeasureND, p: f64) -> Result<SandwichCheck> {
        let lower = wp_lower_bound_nd(&margins_of(mu)?, &margins_of(nu)?, p)? + self.formula_offset;
        let lp = solve_ot_with(mu, nu, cost::lp_power(p), self.ot)?.value;
        Ok(SandwichCheck {
            lp_value: lp,
            lower,
            upper: f64::INFINITY,
            excess: (lower - lp).max(0.0),
            passed: lp >= lower - BOUND_SLACK,
        })
    }
}

pub fn verify_comonotone_optimal(f: &Empirical, g: &Empirical, p: f64) -> Result<EqualityCheck> {
    Verifier::default().comonotone_optimal(f, g, p)
}

pub fn verify_shared_copula_decomposition(
    copula: &CopulaSpec,
    margins_f: Vec<Distribution1D>,
    margins_g: Vec<Distribution1D>,
    p: f64,
) -> Result<EqualityCheck> {
    Verifier::default().shared_copula_decomposition(copula, margins_f, margins_g, p)
}

pub fn verify_wpq_sandwich(
    copula: &CopulaSpec,
    margins_f: Vec<Distribution1D>,
    margins_g: Vec<Distribution1D>,
    p: f64,
    q: f64,
) -> Result<SandwichCheck> {
    Verifier::default().wpq_sandwich(copula, margins_f, margins_g, p, q)
}

/// The two-atom instance: diagonal versus anti-diagonal copula rows on
/// Uniform(0, 1) margins.
pub fn necessity_witness(p: f64) -> Result<NecessityCheck> {
    let diag = CopulaSpec::empirical(vec![vec![0.25, 0.25], vec![0.75, 0.75]])?;
    let anti = CopulaSpec::empirical(vec![vec![0.25, 0.75], vec![0.75, 0.25]])?;
    let u = Distribution1D::uniform(0.0, 1.0)?;
    Verifier::default().necessity(&diag, &anti, vec![u.clone(), u], p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::empirical_from_samples;

    fn emp(xs: &[f64], ws: &[f64]) -> Empirical {
        let Distribution1D::Empirical(e) = empirical_from_samples(xs, Some(ws)).unwrap() else {
            unreachable!()
        };
        e
    }

    #[test]
    fn comonotone_examples() {
        let f = emp(&[0.0, 1.0], &[0.5, 0.5]);
        let g = emp(&[0.0, 2.0], &[0.25, 0.75]);
        let same = verify_comonotone_optimal(&f, &f, 2.0).unwrap();
        assert_eq!(same.gap, 0.0);
        let c = verify_comonotone_optimal(&f, &g, 2.0).unwrap();
        assert_eq!(c.lp_value, 1.5);
        assert_eq!(c.formula_value, 1.5);
        assert!(c.passed);
    }

    #[test]
    fn corrupted_formula_fails() {
        let f = emp(&[0.0, 1.0], &[0.5, 0.5]);
        let g = emp(&[0.0, 2.0], &[0.25, 0.75]);
        let v = Verifier {
            formula_offset: 1e-3,
            ..Default::default()
        };
        assert!(!v.comonotone_optimal(&f, &g, 2.0).unwrap().passed);
    }

    #[test]
    fn decomposition_examples() {
        let u = Distribution1D::uniform(0.0, 1.0).unwrap();
        let rows: Vec<Vec<f64>> = (0..5).map(|k| vec![(k as f64 + 0.5) / 5.0; 2]).collect();
        let comonotone_rows = CopulaSpec::empirical(rows).unwrap();
        let g = vec![
            Distribution1D::normal(1.0, 2.0).unwrap(),
            Distribution1D::exponential(0.5).unwrap(),
        ];
        let c = verify_shared_copula_decomposition(&comonotone_rows, vec![u.clone(), u.clone()], g, 2.0).unwrap();
        assert!(c.passed, "{c:?}");

        let anti = CopulaSpec::empirical(vec![vec![0.25, 0.75], vec![0.75, 0.25]]).unwrap();
        let c = verify_shared_copula_decomposition(&anti, vec![u.clone(), u.clone()], vec![u.clone(), u], 2.0).unwrap();
        assert_eq!(c.lp_value, 0.0);
        assert!(c.passed);
    }

    #[test]
    fn necessity_instance() {
        let w = necessity_witness(2.0).unwrap();
        assert_eq!(w.decomposition_value, 0.0);
        assert!((w.lp_value - 0.25).abs() < 1e-15);
        assert!(w.projection_bound_holds && w.strict_gap);
    }

    #[test]
    fn sandwich_examples() {
        let u = Distribution1D::uniform(0.0, 1.0).unwrap();
        let e = Distribution1D::exponential(1.0).unwrap();
        let rows: Vec<Vec<f64>> = (0..4).map(|k| vec![(k as f64 + 0.5) / 4.0; 2]).collect();
        let c = CopulaSpec::empirical(rows).unwrap();
        let s = verify_wpq_sandwich(&c, vec![u.clone(), e.clone()], vec![e, u], 2.0, 1.0).unwrap();
        assert!(s.passed, "{s:?}");
        assert!(s.lower <= s.lp_value && s.lp_value <= s.upper);
    }
}
