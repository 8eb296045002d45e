//! Seeded property sweeps that compare every closed-form engine with the
//! transport oracle. Each sweep is deterministic given its seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::copulas::{frechet_hoeffding_check, CopulaSpec, EmpiricalCopula, COPULA_TOL};
use crate::distributions::{Distribution1D, Empirical};
use crate::error::Result;
use crate::numeric::Rational;
use crate::oracle::verify::{necessity_witness, NecessityCheck, Verifier};
use crate::oracle::{
    cost, exhaustive_assignment, permutation_cost, solve_assignment, solve_ot_with, CostMatrix, DiscreteMeasureND,
    OtConfig,
};
use crate::wasserstein::{w1_cdf, wp_quantile, wp_via_m, GridSpec};

/// Offset added to formula values by the `corrupt` switch.
pub const CORRUPTION: f64 = 1e-3;

/// Instance generators.
pub mod gen {
    use super::*;

    pub fn rng(seed: u64, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }

    /// Up to `max_atoms` atoms with integer weights in `1..=10` (so exact
    /// rationals after normalization). Locations sit on a quarter grid half
    /// the time so that merges and ties occur.
    pub fn empirical(rng: &mut ChaCha8Rng, max_atoms: usize) -> Empirical {
        let n = rng.random_range(1..=max_atoms);
        let coarse = rng.random_bool(0.5);
        let xs: Vec<f64> = (0..n)
            .map(|_| {
                let x: f64 = rng.random_range(-5.0..5.0);
                if coarse {
                    (x * 4.0).round() / 4.0
                } else {
                    x
                }
            })
            .collect();
        let ws: Vec<Rational> = (0..n)
            .map(|_| Rational::from_integer(rng.random_range(1..=10).into()))
            .collect();
        Empirical::new(&xs, &ws).expect("generated atoms are valid")
    }

    /// A margin from any supported family.
    pub fn margin(rng: &mut ChaCha8Rng) -> Distribution1D {
        match rng.random_range(0..5) {
            0 => Distribution1D::Empirical(empirical(rng, 6)),
            1 => Distribution1D::PointMass(rng.random_range(-2.0..2.0)),
            2 => {
                let a = rng.random_range(-3.0..1.0);
                Distribution1D::Uniform {
                    a,
                    b: a + rng.random_range(0.1..4.0),
                }
            }
            3 => Distribution1D::Normal {
                mean: rng.random_range(-2.0..2.0),
                stddev: rng.random_range(0.2..3.0),
            },
            _ => Distribution1D::Exponential {
                rate: rng.random_range(0.3..3.0),
            },
        }
    }

    pub fn margins(rng: &mut ChaCha8Rng, d: usize) -> Vec<Distribution1D> {
        (0..d).map(|_| margin(rng)).collect()
    }

    /// Midrank pseudo-observations of `n` correlated Gaussian-like rows.
    pub fn copula(rng: &mut ChaCha8Rng, d: usize, n: usize) -> EmpiricalCopula {
        let rho: f64 = rng.random_range(-0.9..0.9);
        let data: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let common: f64 = rng.random_range(-1.0..1.0);
                (0..d)
                    .map(|_| rho * common + (1.0 - rho.abs()) * rng.random_range(-1.0..1.0))
                    .collect()
            })
            .collect();
        EmpiricalCopula::from_data(&data).expect("generated rows are valid")
    }

    /// Arbitrary discrete measure on ℝ^d with integer weights.
    pub fn measure(rng: &mut ChaCha8Rng, d: usize, max_atoms: usize) -> DiscreteMeasureND {
        let n = rng.random_range(1..=max_atoms);
        let pts = (0..n)
            .map(|_| (0..d).map(|_| rng.random_range(-3.0..3.0)).collect())
            .collect();
        let ws = (0..n)
            .map(|_| Rational::from_integer(rng.random_range(1..=10).into()))
            .collect();
        DiscreteMeasureND::normalized(pts, ws).expect("generated atoms are valid")
    }
}

/// Outcome of one property sweep.
#[derive(Debug, Clone, Serialize)]
pub struct PropertyResult {
    pub name: &'static str,
    pub passed: bool,
    pub instances: usize,
    pub max_gap: f64,
    pub detail: String,
}

impl PropertyResult {
    fn new(name: &'static str) -> Self {
        PropertyResult {
            name,
            passed: true,
            instances: 0,
            max_gap: 0.0,
            detail: String::new(),
        }
    }

    fn record(&mut self, ok: bool, gap: f64) {
        self.instances += 1;
        self.passed &= ok;
        if gap.is_nan() || gap > self.max_gap {
            self.max_gap = gap;
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SuiteConfig {
    pub seed: u64,
    pub corrupt_formula: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: DEFAULT_SEED,
            corrupt_formula: false,
        }
    }
}

pub const DEFAULT_SEED: u64 = 20_240_601;

impl SuiteConfig {
    fn offset(&self) -> f64 {
        if self.corrupt_formula {
            CORRUPTION
        } else {
            0.0
        }
    }

    fn verifier(&self) -> Verifier {
        Verifier {
            ot: OtConfig::default(),
            formula_offset: self.offset(),
        }
    }
}

pub const SUITES: [&str; 9] = [
    "comonotone",
    "formulas",
    "metric",
    "decomposition",
    "necessity",
    "frechet",
    "sandwich",
    "continuous",
    "assignment",
];

/// Run one named sweep.
pub fn run(name: &str, cfg: &SuiteConfig) -> Result<Vec<PropertyResult>> {
    Ok(match name {
        "comonotone" => vec![comonotone(cfg)?],
        "formulas" => vec![formulas(cfg)?],
        "metric" => vec![metric(cfg)?],
        "decomposition" => vec![decomposition(cfg)?],
        "necessity" => necessity(cfg)?.0,
        "frechet" => frechet(cfg)?,
        "sandwich" => vec![sandwich(cfg)?],
        "continuous" => vec![continuous(cfg)?],
        "assignment" => vec![assignment(cfg)?],
        other => return Err(crate::Error::Domain(format!("unknown suite '{other}'"))),
    })
}

pub fn run_all(cfg: &SuiteConfig) -> Result<Vec<PropertyResult>> {
    let mut out = Vec::new();
    for name in SUITES {
        out.extend(run(name, cfg)?);
    }
    Ok(out)
}

fn empirical_pairs(seed: u64) -> Vec<(Empirical, Empirical)> {
    let mut rng = gen::rng(seed, 1);
    (0..200)
        .map(|_| (gen::empirical(&mut rng, 12), gen::empirical(&mut rng, 12)))
        .collect()
}

fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Quantile formula equals the LP optimum on 200 random pairs.
pub fn comonotone(cfg: &SuiteConfig) -> Result<PropertyResult> {
    let mut res = PropertyResult::new("comonotone optimality");
    let v = cfg.verifier();
    for (f, g) in empirical_pairs(cfg.seed) {
        for p in [1.0, 2.0, 3.0] {
            let c = v.comonotone_optimal(&f, &g, p)?;
            let gap = relative_gap(c.lp_value, c.formula_value);
            res.record(gap <= 1e-9, gap);
        }
    }
    Ok(res)
}

/// CDF integral, quantile integral and comonotone expectation agree.
pub fn formulas(cfg: &SuiteConfig) -> Result<PropertyResult> {
    let mut res = PropertyResult::new("formula agreement");
    let grid = GridSpec::ExactBreakpoints;
    for (f, g) in empirical_pairs(cfg.seed) {
        let (f, g) = (Distribution1D::Empirical(f), Distribution1D::Empirical(g));
        let w1 = w1_cdf(&f, &g, grid)?.value + cfg.offset();
        let q1 = wp_quantile(&f, &g, 1.0, grid)?.value;
        let gap = (w1 - q1).abs();
        res.record(gap <= 1e-10, gap);
        for p in [1.0, 2.0, 3.0] {
            let m = wp_via_m(&f, &g, p, grid)?.value + cfg.offset();
            let q = wp_quantile(&f, &g, p, grid)?.value;
            let gap = (m - q).abs();
            res.record(gap <= 1e-10, gap);
        }
    }
    Ok(res)
}

/// Identity, symmetry and triangle inequality on 1000 random triples.
pub fn metric(cfg: &SuiteConfig) -> Result<PropertyResult> {
    let mut res = PropertyResult::new("metric axioms");
    let mut rng = gen::rng(cfg.seed, 3);
    let grid = GridSpec::ExactBreakpoints;
    for _ in 0..1000 {
        let [a, b, c] = [0, 1, 2].map(|_| Distribution1D::Empirical(gen::empirical(&mut rng, 12)));
        for p in [1.0, 2.0] {
            let w = |x: &Distribution1D, y: &Distribution1D| wp_quantile(x, y, p, grid).map(|r| r.value);
            let zero = w(&a, &a)?;
            res.record(zero == 0.0, zero);
            let asym = (w(&a, &b)? - w(&b, &a)?).abs();
            res.record(asym <= 1e-12, asym);
            let excess = (w(&a, &c)? - w(&a, &b)? - w(&b, &c)?).max(0.0);
            res.record(excess <= 1e-10, excess);
        }
    }
    Ok(res)
}

/// LP on discretized shared-copula pairs equals the coordinate sum.
pub fn decomposition(cfg: &SuiteConfig) -> Result<PropertyResult> {
    let mut res = PropertyResult::new("shared-copula decomposition");
    let mut rng = gen::rng(cfg.seed, 4);
    let v = cfg.verifier();
    for _ in 0..100 {
        let d = rng.random_range(2..=3);
        let n = rng.random_range(1..=10);
        let c = CopulaSpec::Empirical(gen::copula(&mut rng, d, n));
        let mf = gen::margins(&mut rng, d);
        let mg = gen::margins(&mut rng, d);
        for p in [1.0, 2.0, 3.0] {
            let check = v.shared_copula_decomposition(&c, mf.clone(), mg.clone(), p)?;
            let gap = relative_gap(check.lp_value, check.formula_value);
            res.record(gap <= 1e-9, gap);
        }
    }
    Ok(res)
}

/// The two-atom witness plus the projection bound on 100 arbitrary pairs.
pub fn necessity(cfg: &SuiteConfig) -> Result<(Vec<PropertyResult>, NecessityCheck)> {
    let mut witness_res = PropertyResult::new("necessity witness");
    let w = necessity_witness(2.0)?;
    let decomposition = w.decomposition_value + cfg.offset();
    let ok = w.lp_value > 0.0 && decomposition == 0.0 && w.lp_value >= 0.1;
    witness_res.record(ok, w.lp_value - decomposition);
    witness_res.detail = format!(
        "mu atoms {:?}, nu atoms {:?}: LP = {}, sum of coordinate W_p^p = {}",
        w.mu_atoms, w.nu_atoms, w.lp_value, decomposition
    );

    let mut bound_res = PropertyResult::new("projection bound");
    let mut rng = gen::rng(cfg.seed, 5);
    let v = cfg.verifier();
    for _ in 0..100 {
        let d = rng.random_range(2..=3);
        let p = [1.0, 2.0, 3.0][rng.random_range(0..3)];
        let mu = gen::measure(&mut rng, d, 8);
        let nu = gen::measure(&mut rng, d, 8);
        let check = v.projection_bound(&mu, &nu, p)?;
        bound_res.record(check.passed, check.excess);
    }
    Ok((vec![witness_res, bound_res], w))
}

/// 10^4 evaluations per dimension of empirical copulas against `W ≤ C ≤ M`
/// with slack `1/n + 1e-12`. The second result repeats the sweep at the
/// midrank discretization bound `d/(2n) + 1e-12`.
pub fn frechet(cfg: &SuiteConfig) -> Result<Vec<PropertyResult>> {
    let mut stated = PropertyResult::new("Frechet-Hoeffding bounds");
    let mut midrank = PropertyResult::new("Frechet-Hoeffding bounds, slack d/(2n)");
    let mut rng = gen::rng(cfg.seed, 6);
    for d in 2..=4 {
        for _ in 0..100 {
            let n = rng.random_range(2..=16);
            let c = CopulaSpec::Empirical(gen::copula(&mut rng, d, n));
            let wide = d as f64 / (2 * n) as f64 + COPULA_TOL;
            for _ in 0..100 {
                let u: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
                let check = frechet_hoeffding_check(&c, &u)?;
                let dist = (check.lower - check.value).max(check.value - check.upper);
                stated.record(check.ok, (dist - c.slack()).max(0.0));
                if !check.ok && stated.detail.is_empty() {
                    stated.detail = format!("first violation: d = {d}, n = {n}, u = {u:?}, {check:?}");
                }
                midrank.record(dist <= wide, (dist - wide).max(0.0));
            }
        }
    }
    Ok(vec![stated, midrank])
}

/// Exact `W_{p,q}^p` lies inside the norm-equivalence bracket.
pub fn sandwich(cfg: &SuiteConfig) -> Result<PropertyResult> {
    let mut res = PropertyResult::new("W_pq sandwich");
    let mut rng = gen::rng(cfg.seed, 7);
    let v = cfg.verifier();
    for (p, q) in [(1.0, 2.0), (2.0, 1.0), (2.0, 3.0), (3.0, 2.0)] {
        for d in 2..=3 {
            for _ in 0..50 {
                let n = rng.random_range(1..=10);
                let c = CopulaSpec::Empirical(gen::copula(&mut rng, d, n));
                let check = v.wpq_sandwich(&c, gen::margins(&mut rng, d), gen::margins(&mut rng, d), p, q)?;
                res.record(check.passed, check.excess);
            }
        }
    }
    Ok(res)
}

/// `W_2(U(0,1), U(0,2))^2 = 1/3` by quadrature and by a 200-atom LP.
pub fn continuous(cfg: &SuiteConfig) -> Result<PropertyResult> {
    let mut res = PropertyResult::new("continuous sanity");
    let f = Distribution1D::uniform(0.0, 1.0)?;
    let g = Distribution1D::uniform(0.0, 2.0)?;
    let r = wp_quantile(&f, &g, 2.0, GridSpec::AdaptiveQuadrature(1e-10))?;
    let value = r.power_value + cfg.offset();
    let err = (value - 1.0 / 3.0).abs();
    res.record(err <= 1e-8, err);

    let n = 200;
    let grid = |d: &Distribution1D| -> Result<DiscreteMeasureND> {
        let pts = (0..n)
            .map(|k| d.quantile((k as f64 + 0.5) / n as f64).map(|x| vec![x]))
            .collect::<Result<Vec<_>>>()?;
        DiscreteMeasureND::uniform(pts)
    };
    let lp = solve_ot_with(
        &grid(&f)?,
        &grid(&g)?,
        cost::lp_power(2.0),
        OtConfig {
            cap: n,
            ..Default::default()
        },
    )?;
    let rel = (lp.value - value).abs() / value;
    res.record(rel <= 0.02, rel);
    res.detail = format!("quadrature {value:.12}, 200-atom LP {:.12}", lp.value);
    Ok(res)
}

/// Hungarian assignment equals exhaustive enumeration for n ≤ 6.
pub fn assignment(cfg: &SuiteConfig) -> Result<PropertyResult> {
    let mut res = PropertyResult::new("assignment cross-check");
    let mut rng = gen::rng(cfg.seed, 9);
    for _ in 0..200 {
        let n = rng.random_range(1..=6);
        let d = rng.random_range(1..=3);
        let p = [1.0, 1.5, 2.0, 3.0][rng.random_range(0..4)];
        let pts = |rng: &mut ChaCha8Rng| -> Vec<Vec<f64>> {
            (0..n)
                .map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect())
                .collect()
        };
        let mu = DiscreteMeasureND::uniform(pts(&mut rng))?;
        let nu = DiscreteMeasureND::uniform(pts(&mut rng))?;
        if mu.len() != n || nu.len() != n {
            continue;
        }
        let (value, perm) = solve_assignment(&mu, &nu, cost::lp_power(p))?;
        let costs = CostMatrix::build(&mu, &nu, cost::lp_power(p))?;
        let (best, _) = exhaustive_assignment(&costs)?;
        let brute = best / n as f64;
        debug_assert_eq!(permutation_cost(&costs, &perm) / n as f64, value);
        res.record(value == brute, (value - brute).abs());
    }
    Ok(res)
}
