use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use wassercop::io;
use wassercop::oracle::{cost, OtConfig, DEFAULT_CAP};
use wassercop::suite::{self, PropertyResult, SuiteConfig};
use wassercop::{
    comonotone_coupling, solve_ot_with, w1_cdf, wp_quantile, wp_shared_nd, wp_via_m, wpq_bounds, CopulaSpec,
    DiscreteMeasureND, DistanceReport, Distribution1D, Error, GridSpec, Method,
};

#[derive(Parser, Debug)]
#[command(
    name = "wassercop",
    version,
    about = "Wasserstein distances via quantiles, copulas and exact transport"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Distance between two laws on ℝ, or between two laws on ℝ^d sharing a copula.
    Compute(ComputeArgs),
    /// Norm-equivalence bracket on W_{p,q}^p.
    Bounds(BoundsArgs),
    /// Run the seeded verification suites against the transport oracle.
    Verify(VerifyArgs),
    /// Write the comonotone coupling of two laws on ℝ.
    Sample(SampleArgs),
    /// Exact optimal transport between two discrete measures on ℝ^d.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Human,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Quantile,
    Cdf,
    Comonotone,
    Shared,
    Lp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Ranks {
    Auto,
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Corruption {
    Formula,
}

#[derive(Args, Debug)]
struct GridArgs {
    /// `exact`, `uniform:N` or `adaptive[:TOL]`.
    #[arg(long)]
    grid: Option<String>,
    /// Default tolerance for adaptive quadrature.
    #[arg(long, env = "WASSERCOP_GRID_TOL", default_value_t = wassercop::wasserstein::DEFAULT_GRID_TOL)]
    grid_tol: f64,
}

impl GridArgs {
    fn resolve(&self) -> Result<GridSpec, Failure> {
        let grid = match self.grid.as_deref() {
            None | Some("adaptive") => GridSpec::AdaptiveQuadrature(self.grid_tol),
            Some("exact") => GridSpec::ExactBreakpoints,
            Some(s) => match s.split_once(':') {
                Some(("uniform", n)) => {
                    GridSpec::UniformGrid(n.parse().map_err(|_| usage(format!("bad grid size '{n}'")))?)
                }
                Some(("adaptive", t)) => {
                    GridSpec::AdaptiveQuadrature(t.parse().map_err(|_| usage(format!("bad grid tolerance '{t}'")))?)
                }
                _ => return Err(usage(format!("unknown grid '{s}'"))),
            },
        };
        grid.validate()?;
        Ok(grid)
    }
}

#[derive(Args, Debug)]
struct MarginArgs {
    /// Empirical copula rows (CSV, d columns).
    #[arg(long)]
    copula: Option<PathBuf>,
    /// Treat copula rows as raw data and replace them by pseudo-observations.
    #[arg(long, value_enum, default_value_t = Ranks::None)]
    ranks: Ranks,
    /// Margins of the first law, one file per coordinate.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    margins_f: Vec<PathBuf>,
    /// Margins of the second law, one file per coordinate.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    margins_g: Vec<PathBuf>,
}

#[derive(Args, Debug)]
struct ComputeArgs {
    /// Distribution files (CSV `x[,w]` or JSON) for F and G.
    inputs: Vec<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    margins: MarginArgs,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    /// Distribution files for F and G when d = 1.
    inputs: Vec<PathBuf>,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    q: f64,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    margins: MarginArgs,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value_t = suite::DEFAULT_SEED)]
    seed: u64,
    /// Run a single suite instead of all of them.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(suite::SUITES))]
    suite: Option<String>,
    /// Perturb formula values to check that the harness notices.
    #[arg(long, value_enum)]
    corrupt: Option<Corruption>,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SampleArgs {
    inputs: Vec<PathBuf>,
    #[arg(long)]
    grid: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    /// Measure files: CSV rows of d coordinates, optional trailing `w` column.
    inputs: Vec<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    /// Use the q-norm inside the cost instead of the p-norm.
    #[arg(long)]
    q: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: usize,
    /// Write the optimal coupling as JSON.
    #[arg(long)]
    witness: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Core(Error),
    Verify(String),
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Verify(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Core(Error::MomentGate { .. }) => 3,
            Failure::Core(Error::Quadrature { .. } | Error::Infeasible(_)) => 4,
            Failure::Core(_) => 2,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) | Failure::Verify(m) => m.clone(),
            Failure::Core(e) => e.to_string(),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_distribution(path: &Path) -> CliResult<Distribution1D> {
    Ok(io::distribution_from_str(&read(path)?)?)
}

fn load_pair(inputs: &[PathBuf]) -> CliResult<(Distribution1D, Distribution1D)> {
    match inputs {
        [f, g] => Ok((load_distribution(f)?, load_distribution(g)?)),
        _ => Err(usage(format!("expected two distribution files, got {}", inputs.len()))),
    }
}

fn load_margins(paths: &[PathBuf]) -> CliResult<Vec<Distribution1D>> {
    paths.iter().map(|p| load_distribution(p)).collect()
}

fn load_copula(m: &MarginArgs) -> CliResult<Option<CopulaSpec>> {
    m.copula
        .as_deref()
        .map(|path| Ok(io::copula_from_csv(&read(path)?, m.ranks == Ranks::Auto)?))
        .transpose()
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:?}")).unwrap_or_default()
}

fn method_name(m: Method) -> String {
    serde_json::to_value(m)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

fn render_report(r: &DistanceReport, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(r).expect("report serializes") + "\n",
        Format::Csv => {
            let (lo, hi) = r.bounds.unzip();
            format!(
                "p,q,value,power_value,method,error_estimate,lower,upper\n{:?},{},{:?},{:?},{},{:?},{},{}\n",
                r.p,
                opt(r.q),
                r.value,
                r.power_value,
                method_name(r.method),
                r.error_estimate,
                opt(lo),
                opt(hi)
            )
        }
        Format::Human => {
            let mut s = String::new();
            match r.q {
                Some(q) => {
                    let _ = writeln!(s, "W_{{{},{}}}^p bracket via {}", r.p, q, method_name(r.method));
                }
                None => {
                    let _ = writeln!(s, "W_{} = {} via {}", r.p, r.value, method_name(r.method));
                }
            }
            let _ = writeln!(s, "  W^p            = {}", r.power_value);
            let _ = writeln!(s, "  error estimate = {:e}", r.error_estimate);
            if let Some((lo, hi)) = r.bounds {
                let _ = writeln!(s, "  lower          = {lo}");
                let _ = writeln!(s, "  upper          = {hi}");
            }
            s
        }
    }
}

fn cmd_compute(a: &ComputeArgs) -> CliResult<()> {
    let grid = a.grid.resolve()?;
    let copula = load_copula(&a.margins)?;
    let shared = copula.is_some() || !a.margins.margins_f.is_empty();
    let method = a
        .method
        .unwrap_or(if shared { MethodArg::Shared } else { MethodArg::Quantile });
    let report = if method == MethodArg::Shared {
        let c = copula.ok_or_else(|| usage("--method shared needs --copula"))?;
        if !a.inputs.is_empty() {
            return Err(usage(
                "positional inputs are not used with --copula; pass --margins-f and --margins-g",
            ));
        }
        let mf = load_margins(&a.margins.margins_f)?;
        let mg = load_margins(&a.margins.margins_g)?;
        wp_shared_nd(&c, &mf, &mg, a.p, grid)?
    } else {
        if shared {
            return Err(usage("--copula and margins are only used with --method shared"));
        }
        let (f, g) = load_pair(&a.inputs)?;
        match method {
            MethodArg::Quantile => wp_quantile(&f, &g, a.p, grid)?,
            MethodArg::Comonotone => wp_via_m(&f, &g, a.p, grid)?,
            MethodArg::Cdf => {
                if a.p != 1.0 {
                    return Err(usage("--method cdf computes W_1 only; use --p 1"));
                }
                w1_cdf(&f, &g, grid)?
            }
            MethodArg::Lp => lp_1d(&f, &g, a.p)?,
            MethodArg::Shared => unreachable!(),
        }
    };
    emit(a.out.as_deref(), &render_report(&report, a.format))
}

fn lp_1d(f: &Distribution1D, g: &Distribution1D, p: f64) -> CliResult<DistanceReport> {
    let (Some(fe), Some(ge)) = (f.as_empirical(), g.as_empirical()) else {
        return Err(usage("--method lp needs two discrete inputs"));
    };
    wp_quantile(f, g, p, GridSpec::ExactBreakpoints)?;
    let mu = DiscreteMeasureND::from(fe.as_ref());
    let nu = DiscreteMeasureND::from(ge.as_ref());
    let sol = solve_ot_with(&mu, &nu, cost::lp_power(p), OtConfig::default())?;
    Ok(DistanceReport::new(
        p,
        wassercop::Estimate {
            value: sol.value,
            error: 0.0,
        },
        Method::OracleLp,
    ))
}

fn cmd_bounds(a: &BoundsArgs) -> CliResult<()> {
    if a.p == a.q {
        return Err(usage(format!("p and q must differ (both {})", a.p)));
    }
    let grid = a.grid.resolve()?;
    let copula = load_copula(&a.margins)?;
    let (mf, mg) = if a.inputs.is_empty() {
        (load_margins(&a.margins.margins_f)?, load_margins(&a.margins.margins_g)?)
    } else {
        let (f, g) = load_pair(&a.inputs)?;
        (vec![f], vec![g])
    };
    let report = wpq_bounds(copula.as_ref(), &mf, &mg, a.p, a.q, grid)?;
    emit(a.out.as_deref(), &render_report(&report, a.format))
}

#[derive(Serialize)]
struct VerifySummary<'a> {
    seed: u64,
    corrupt_formula: bool,
    passed: bool,
    properties: &'a [PropertyResult],
}

fn cmd_verify(a: &VerifyArgs) -> CliResult<()> {
    let cfg = SuiteConfig {
        seed: a.seed,
        corrupt_formula: a.corrupt == Some(Corruption::Formula),
    };
    let results = match &a.suite {
        Some(name) => suite::run(name, &cfg)?,
        None => suite::run_all(&cfg)?,
    };
    let passed = results.iter().all(|r| r.passed);
    let text = match a.format {
        Format::Json => {
            let summary = VerifySummary {
                seed: cfg.seed,
                corrupt_formula: cfg.corrupt_formula,
                passed,
                properties: &results,
            };
            serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n"
        }
        Format::Csv => {
            let mut s = String::from("property,passed,instances,max_gap\n");
            for r in &results {
                let _ = writeln!(s, "{},{},{},{:e}", r.name, r.passed, r.instances, r.max_gap);
            }
            s
        }
        Format::Human => {
            let mut s = String::new();
            for r in &results {
                let _ = writeln!(
                    s,
                    "{} {:<40} {:>6} instances  max gap {:.3e}",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.name,
                    r.instances,
                    r.max_gap
                );
                if !r.detail.is_empty() {
                    let _ = writeln!(s, "     {}", r.detail);
                }
            }
            s
        }
    };
    emit(a.out.as_deref(), &text)?;
    if passed {
        Ok(())
    } else {
        let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.name).collect();
        Err(Failure::Verify(format!("failed: {}", failed.join(", "))))
    }
}

#[derive(Serialize)]
struct SampleAtom {
    u: f64,
    x: f64,
    y: f64,
    mass: f64,
}

fn cmd_sample(a: &SampleArgs) -> CliResult<()> {
    let (f, g) = load_pair(&a.inputs)?;
    let grid = match a.grid.as_deref() {
        None => {
            if f.is_discrete() && g.is_discrete() {
                GridSpec::ExactBreakpoints
            } else {
                GridSpec::UniformGrid(1000)
            }
        }
        Some(_) => GridArgs {
            grid: a.grid.clone(),
            grid_tol: wassercop::wasserstein::DEFAULT_GRID_TOL,
        }
        .resolve()?,
    };
    let c = comonotone_coupling(&f, &g, grid)?;
    let atoms: Vec<SampleAtom> = (0..c.len())
        .map(|k| SampleAtom {
            u: c.u_grid[k],
            x: c.pairs[k].0,
            y: c.pairs[k].1,
            mass: c.masses[k],
        })
        .collect();
    let text = match a.format {
        Format::Json => serde_json::to_string_pretty(&atoms).expect("atoms serialize") + "\n",
        Format::Csv | Format::Human => {
            let mut s = String::from("u,x,y,mass\n");
            for t in &atoms {
                let _ = writeln!(s, "{},{},{},{}", t.u, t.x, t.y, t.mass);
            }
            s
        }
    };
    emit(a.out.as_deref(), &text)
}

fn cmd_oracle(a: &OracleArgs) -> CliResult<()> {
    let [mu, nu] = match a.inputs.as_slice() {
        [m, n] => [io::measure_from_csv(&read(m)?)?, io::measure_from_csv(&read(n)?)?],
        _ => return Err(usage(format!("expected two measure files, got {}", a.inputs.len()))),
    };
    let cfg = OtConfig {
        cap: a.cap,
        ..Default::default()
    };
    let sol = match a.q {
        Some(q) => solve_ot_with(&mu, &nu, cost::lq_norm_pow(q, a.p), cfg)?,
        None => solve_ot_with(&mu, &nu, cost::lp_power(a.p), cfg)?,
    };
    if let Some(path) = &a.witness {
        std::fs::write(path, io::witness_to_json(&mu, &nu, &sol) + "\n")
            .map_err(|e| usage(format!("{}: {e}", path.display())))?;
    }
    let mut report = DistanceReport::new(
        a.p,
        wassercop::Estimate {
            value: sol.value,
            error: 0.0,
        },
        Method::OracleLp,
    );
    report.q = a.q;
    emit(a.out.as_deref(), &render_report(&report, a.format))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Compute(a) => cmd_compute(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Sample(a) => cmd_sample(a),
        Command::Oracle(a) => cmd_oracle(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
