use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wassercop::copulas::{eval_m, eval_w};
use wassercop::oracle::{cost, solve_transport};
use wassercop::suite::{self, gen, SuiteConfig};
use wassercop::*;

fn atoms() -> impl Strategy<Value = (Vec<f64>, Vec<u32>)> {
    prop::collection::vec(
        (
            prop_oneof![(-20i32..20).prop_map(|k| k as f64 / 4.0), -5.0..5.0f64],
            1u32..10,
        ),
        1..12,
    )
    .prop_map(|v| v.into_iter().unzip())
}

fn empirical() -> impl Strategy<Value = Empirical> {
    atoms().prop_map(|(xs, ws)| {
        let ws: Vec<Rational> = ws.into_iter().map(|w| Rational::from_integer(w.into())).collect();
        Empirical::new(&xs, &ws).unwrap()
    })
}

fn dist() -> impl Strategy<Value = Distribution1D> {
    prop_oneof![
        empirical().prop_map(Distribution1D::Empirical),
        (-3.0..3.0f64).prop_map(Distribution1D::PointMass),
        (-3.0..1.0f64, 0.1..4.0f64).prop_map(|(a, w)| Distribution1D::uniform(a, a + w).unwrap()),
        (-2.0..2.0f64, 0.2..3.0f64).prop_map(|(m, s)| Distribution1D::normal(m, s).unwrap()),
        (0.3..3.0f64).prop_map(|r| Distribution1D::exponential(r).unwrap()),
    ]
}

fn measure(d: usize) -> impl Strategy<Value = DiscreteMeasureND> {
    prop::collection::vec((prop::collection::vec(-3.0..3.0f64, d), 1u32..10), 1..8).prop_map(|v| {
        let (pts, ws): (Vec<_>, Vec<_>) = v.into_iter().unzip();
        let ws = ws.into_iter().map(|w| Rational::from_integer(w.into())).collect();
        DiscreteMeasureND::normalized(pts, ws).unwrap()
    })
}

fn exact(f: &Empirical, g: &Empirical, p: f64) -> f64 {
    wp_quantile(
        &Distribution1D::Empirical(f.clone()),
        &Distribution1D::Empirical(g.clone()),
        p,
        GridSpec::ExactBreakpoints,
    )
    .unwrap()
    .power_value
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn galois_empirical(f in empirical(), u in 1e-9..1.0f64) {
        let d = Distribution1D::Empirical(f.clone());
        let q = d.quantile(u).unwrap();
        prop_assert!(d.cdf(q).unwrap() >= u);
        for &x in f.locations() {
            prop_assert_eq!(q <= x, u <= d.cdf(x).unwrap());
        }
    }

    #[test]
    fn galois_parametric(d in dist(), u in 1e-6..(1.0 - 1e-6)) {
        let q = d.quantile(u).unwrap();
        prop_assert!(d.cdf(q).unwrap() >= u - 1e-9);
    }
}

proptest! {
    #[test]
    fn quantile_monotone_left_continuous(f in empirical()) {
        let d = Distribution1D::Empirical(f.clone());
        let cum: Vec<f64> = f.cumulative().iter().map(numeric::rational_to_f64).collect();
        let mut prev = f64::NEG_INFINITY;
        for (k, &c) in cum.iter().enumerate() {
            // At each jump level the quantile still returns the lower atom.
            prop_assert_eq!(d.quantile(c).unwrap(), f.locations()[k]);
            let below = d.quantile(c * (1.0 - 1e-12)).unwrap();
            prop_assert_eq!(below, f.locations()[k]);
            prop_assert!(below >= prev);
            prev = below;
        }
    }

    #[test]
    fn fh_bounds_genuine_copulas(d in 2usize..5, seed in any::<u64>(), u in prop::collection::vec(0.0..=1.0f64, 4)) {
        let u = &u[..d];
        let m = CopulaSpec::comonotone(d).unwrap();
        let ch = frechet_hoeffding_check(&m, u).unwrap();
        prop_assert!(ch.ok);
        prop_assert_eq!(ch.value, ch.upper);
        if d == 2 {
            prop_assert!(frechet_hoeffding_check(&CopulaSpec::lower_fh(2).unwrap(), u).unwrap().ok);
        }
        let mut rng = gen::rng(seed, 0);
        let n = rng.random_range(1..=20);
        let c = CopulaSpec::Empirical(gen::copula(&mut rng, d, n));
        let ch = frechet_hoeffding_check(&c, u).unwrap();
        let wide = d as f64 / (2 * n) as f64 + 1e-12;
        prop_assert!(ch.lower - wide <= ch.value && ch.value <= ch.upper + 1.0 / n as f64 + 1e-12);
        prop_assert!(eval_w(u).unwrap() <= eval_m(u).unwrap());
    }

    #[test]
    fn d_increasing(d in 2usize..5, seed in any::<u64>(), a in prop::collection::vec(0.0..=1.0f64, 4), b in prop::collection::vec(0.0..=1.0f64, 4)) {
        let lo: Vec<f64> = a.iter().zip(&b).take(d).map(|(x, y)| x.min(*y)).collect();
        let hi: Vec<f64> = a.iter().zip(&b).take(d).map(|(x, y)| x.max(*y)).collect();
        let mut rng = gen::rng(seed, 0);
        let n = rng.random_range(1..=20);
        let specs = [CopulaSpec::comonotone(d).unwrap(), CopulaSpec::Empirical(gen::copula(&mut rng, d, n))];
        for c in &specs {
            prop_assert!(c.volume(&lo, &hi).unwrap() >= -1e-12);
        }
        if d == 2 {
            prop_assert!(CopulaSpec::lower_fh(2).unwrap().volume(&lo, &hi).unwrap() >= -1e-12);
        }
    }

    #[test]
    fn comonotone_coupling_margins(f in empirical(), g in empirical()) {
        let c = comonotone_coupling(&Distribution1D::Empirical(f.clone()), &Distribution1D::Empirical(g.clone()), GridSpec::ExactBreakpoints).unwrap();
        prop_assert!(c.is_comonotone());
        prop_assert!(c.len() < f.len() + g.len());
        let masses = c.exact_masses.clone().unwrap();
        for (side, e) in [(0, &f), (1, &g)] {
            for (x, w) in e.atoms() {
                let total: Rational = c.pairs.iter().zip(&masses)
                    .filter(|(pr, _)| if side == 0 { pr.0 == x } else { pr.1 == x })
                    .map(|(_, m)| m.clone())
                    .sum();
                prop_assert_eq!(&total, w);
            }
        }
    }

    #[test]
    fn sampled_coupling_is_comonotone(f in dist(), g in dist(), n in 2usize..200) {
        let c = comonotone_coupling(&f, &g, GridSpec::UniformGrid(n)).unwrap();
        prop_assert!(c.is_comonotone());
        let total: f64 = c.masses.iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn metric_axioms(f in empirical(), g in empirical(), h in empirical(), p in prop_oneof![Just(1.0), Just(2.0), Just(3.0)]) {
        prop_assert_eq!(exact(&f, &f, p), 0.0);
        let (fg, gf) = (exact(&f, &g, p).powf(1.0 / p), exact(&g, &f, p).powf(1.0 / p));
        prop_assert!((fg - gf).abs() <= 1e-12);
        let fh = exact(&f, &h, p).powf(1.0 / p);
        let gh = exact(&g, &h, p).powf(1.0 / p);
        prop_assert!(fh <= fg + gh + 1e-10);
    }

    #[test]
    fn scale_equivariance(f in empirical(), g in empirical(), a in -3.0..3.0f64, b in -3.0..3.0f64, p in 1.0..3.0f64) {
        prop_assume!(a != 0.0);
        let base = exact(&f, &g, p).powf(1.0 / p);
        let moved = exact(&f.affine(a, b).unwrap(), &g.affine(a, b).unwrap(), p).powf(1.0 / p);
        prop_assert!((moved - a.abs() * base).abs() <= 1e-12 * (1.0 + moved));
    }

    #[test]
    fn formula_agreement(f in empirical(), g in empirical(), p in prop_oneof![Just(1.0), Just(2.0), Just(3.0)]) {
        let (f, g) = (Distribution1D::Empirical(f), Distribution1D::Empirical(g));
        let grid = GridSpec::ExactBreakpoints;
        let q = wp_quantile(&f, &g, p, grid).unwrap();
        prop_assert!((wp_via_m(&f, &g, p, grid).unwrap().value - q.value).abs() <= 1e-10);
        if p == 1.0 {
            prop_assert!((w1_cdf(&f, &g, grid).unwrap().value - q.value).abs() <= 1e-10);
        }
    }

    #[test]
    fn witness_feasible_and_certified(mu in measure(2), nu in measure(2), p in 1.0..3.0f64) {
        let sol = solve_ot(&mu, &nu, cost::lp_power(p)).unwrap();
        prop_assert!(sol.witness.margin_defect(&mu, &nu).is_zero());
        let costs = CostMatrix::build(&mu, &nu, cost::lp_power(p)).unwrap();
        prop_assert!(sol.slackness_violation(&costs) <= 1e-9);
        prop_assert!((sol.witness.cost(&costs) - sol.value).abs() <= 1e-12 * (1.0 + sol.value));
    }

    #[test]
    fn lp_scaling(mu in measure(2), nu in measure(2), lambda in 0.01..100.0f64) {
        let costs = CostMatrix::build(&mu, &nu, |x, y| x.iter().zip(y).map(|(a, b)| (a - b).abs() + 0.5).sum()).unwrap();
        let base = solve_transport(mu.masses(), nu.masses(), &costs).unwrap().value;
        let scaled = solve_transport(mu.masses(), nu.masses(), &costs.scaled(lambda)).unwrap().value;
        prop_assert!((scaled - lambda * base).abs() <= 1e-12 * lambda * base.max(1.0));
    }

    #[test]
    fn projection_bound(mu in measure(3), nu in measure(3), p in prop_oneof![Just(1.0), Just(2.0), Just(3.0)]) {
        let lp = solve_ot(&mu, &nu, cost::lp_power(p)).unwrap().value;
        let mf: Vec<Distribution1D> = mu.marginals().unwrap().into_iter().map(Distribution1D::Empirical).collect();
        let mg: Vec<Distribution1D> = nu.marginals().unwrap().into_iter().map(Distribution1D::Empirical).collect();
        prop_assert!(lp >= wp_lower_bound_nd(&mf, &mg, p).unwrap() - 1e-10);
    }
}

#[test]
fn pushforward_ks() {
    let families = [
        Distribution1D::uniform(-1.0, 3.0).unwrap(),
        Distribution1D::normal(0.5, 2.0).unwrap(),
        Distribution1D::exponential(1.5).unwrap(),
    ];
    let n = 10_000;
    for (k, d) in families.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(11 + k as u64);
        let mut xs: Vec<f64> = (0..n).map(|_| d.quantile(rng.random::<f64>()).unwrap()).collect();
        xs.sort_by(f64::total_cmp);
        let ks = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let c = d.cdf(x).unwrap();
                (c - i as f64 / n as f64).max((i + 1) as f64 / n as f64 - c)
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.05, "{d:?}: KS = {ks}");
    }
}

#[test]
fn pushforward_ks_empirical() {
    let f = empirical_from_samples(&[0.0, 1.0, 2.5, 4.0], Some(&[0.1, 0.4, 0.3, 0.2])).unwrap();
    let n = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let draws: Vec<f64> = (0..n).map(|_| f.quantile(rng.random::<f64>()).unwrap()).collect();
    for x in [0.0, 1.0, 2.5, 4.0] {
        let emp = draws.iter().filter(|&&d| d <= x).count() as f64 / n as f64;
        assert!((emp - f.cdf(x).unwrap()).abs() < 0.05);
    }
}

#[test]
fn midrank_slack_holds_everywhere_sampled() {
    let rs = suite::frechet(&SuiteConfig::default()).unwrap();
    assert!(rs[1].passed, "{:?}", rs[1]);
}

#[test]
fn verify_suite_is_deterministic() {
    let cfg = SuiteConfig::default();
    let a = serde_json::to_string(&suite::run("sandwich", &cfg).unwrap()).unwrap();
    let b = serde_json::to_string(&suite::run("sandwich", &cfg).unwrap()).unwrap();
    assert_eq!(a, b);
}
