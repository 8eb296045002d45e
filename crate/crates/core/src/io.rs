//! Text formats for distributions, copula rows, discrete measures and
//! transport witnesses.
//!
//! Distribution CSV: header `x` or `x,w`, one atom per line; weights may be
//! decimals or ratios such as `1/3`. Distribution JSON:
//! `{"kind": "empirical", "atoms": [[x, w], ...]}`, `{"kind": "normal",
//! "mean": m, "stddev": s}`, `{"kind": "uniform", "a": a, "b": b}`,
//! `{"kind": "exponential", "rate": r}` or `{"kind": "point_mass", "x": a}`.

use num_traits::One;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::copulas::{CopulaSpec, EmpiricalCopula};
use crate::distributions::{Distribution1D, Empirical};
use crate::error::{Error, Result};
use crate::numeric::{self, parse_rational, Rational};
use crate::oracle::{CouplingEntry, DiscreteMeasureND, OtSolution};

fn csv_records(text: &str) -> Result<Vec<Vec<String>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        out.push(rec.iter().map(str::to_owned).collect());
    }
    Ok(out)
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: invalid number '{s}'")))?;
    if !v.is_finite() {
        return Err(Error::NonFinite(v));
    }
    Ok(v)
}

/// Split off a header row when its first field is not numeric.
fn split_header(records: Vec<Vec<String>>) -> (Option<Vec<String>>, Vec<Vec<String>>) {
    match records.first() {
        Some(first) if first.first().is_some_and(|f| f.parse::<f64>().is_err()) => {
            let mut it = records.into_iter();
            let header = it.next();
            (header, it.collect())
        }
        _ => (None, records),
    }
}

/// Empirical law from `x[,w]` CSV text.
pub fn distribution_from_csv(text: &str) -> Result<Distribution1D> {
    let (header, rows) = split_header(csv_records(text)?);
    if let Some(h) = &header {
        let names: Vec<&str> = h.iter().map(String::as_str).collect();
        if !(names == ["x"] || names == ["x", "w"]) {
            return Err(Error::Parse(format!(
                "expected header 'x' or 'x,w', got '{}'",
                h.join(",")
            )));
        }
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut xs = Vec::with_capacity(rows.len());
    let mut ws = Vec::with_capacity(rows.len());
    for (k, row) in rows.iter().enumerate() {
        let line = k + 1 + usize::from(header.is_some());
        match row.as_slice() {
            [x] => {
                xs.push(parse_f64(x, line)?);
                ws.push(Rational::one());
            }
            [x, w] => {
                xs.push(parse_f64(x, line)?);
                ws.push(parse_rational(w).map_err(|e| Error::Parse(format!("line {line}: {e}")))?);
            }
            _ => {
                return Err(Error::Parse(format!(
                    "line {line}: expected 1 or 2 columns, got {}",
                    row.len()
                )))
            }
        }
    }
    Ok(Distribution1D::Empirical(Empirical::new(&xs, &ws)?))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum DistributionRepr {
    Empirical { atoms: Vec<(f64, Value)> },
    PointMass { x: f64 },
    Uniform { a: f64, b: f64 },
    Normal { mean: f64, stddev: f64 },
    Exponential { rate: f64 },
}

fn weight_from_json(v: &Value) -> Result<Rational> {
    match v {
        Value::Number(n) => parse_rational(&n.to_string()),
        Value::String(s) => parse_rational(s),
        other => Err(Error::Parse(format!("weight must be a number or string, got {other}"))),
    }
}

/// Law from its JSON description.
pub fn distribution_from_json(text: &str) -> Result<Distribution1D> {
    let repr: DistributionRepr = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let d = match repr {
        DistributionRepr::Empirical { atoms } => {
            let xs: Vec<f64> = atoms.iter().map(|a| a.0).collect();
            let ws = atoms
                .iter()
                .map(|a| weight_from_json(&a.1))
                .collect::<Result<Vec<_>>>()?;
            Distribution1D::Empirical(Empirical::new(&xs, &ws)?)
        }
        DistributionRepr::PointMass { x } => Distribution1D::PointMass(x),
        DistributionRepr::Uniform { a, b } => Distribution1D::Uniform { a, b },
        DistributionRepr::Normal { mean, stddev } => Distribution1D::Normal { mean, stddev },
        DistributionRepr::Exponential { rate } => Distribution1D::Exponential { rate },
    };
    d.validate()?;
    Ok(d)
}

/// JSON description of a law; empirical weights are written as exact
/// ratio strings.
pub fn distribution_to_json(d: &Distribution1D) -> String {
    let repr = match d {
        Distribution1D::Empirical(e) => DistributionRepr::Empirical {
            atoms: e.atoms().map(|(x, w)| (x, Value::String(w.to_string()))).collect(),
        },
        Distribution1D::PointMass(x) => DistributionRepr::PointMass { x: *x },
        Distribution1D::Uniform { a, b } => DistributionRepr::Uniform { a: *a, b: *b },
        Distribution1D::Normal { mean, stddev } => DistributionRepr::Normal {
            mean: *mean,
            stddev: *stddev,
        },
        Distribution1D::Exponential { rate } => DistributionRepr::Exponential { rate: *rate },
    };
    serde_json::to_string(&repr).expect("distribution serializes")
}

/// Dispatch on the first non-blank character: `{` means JSON.
pub fn distribution_from_str(text: &str) -> Result<Distribution1D> {
    if text.trim_start().starts_with('{') {
        distribution_from_json(text)
    } else {
        distribution_from_csv(text)
    }
}

fn numeric_rows(text: &str) -> Result<Vec<Vec<f64>>> {
    let (header, rows) = split_header(csv_records(text)?);
    let offset = usize::from(header.is_some());
    let rows = rows
        .iter()
        .enumerate()
        .map(|(k, row)| {
            row.iter()
                .map(|s| parse_f64(s, k + 1 + offset))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rows)
}

/// Empirical copula from CSV rows. With `rank` set the rows are raw data and
/// are replaced by their midrank pseudo-observations.
pub fn copula_from_csv(text: &str, rank: bool) -> Result<CopulaSpec> {
    let rows = numeric_rows(text)?;
    let c = if rank {
        EmpiricalCopula::from_data(&rows)?
    } else {
        EmpiricalCopula::new(rows)?
    };
    Ok(CopulaSpec::Empirical(c))
}

/// Discrete measure on ℝ^d from CSV. A header whose last column is `w`
/// marks that column as weights; otherwise all atoms get equal mass.
pub fn measure_from_csv(text: &str) -> Result<DiscreteMeasureND> {
    let (header, _) = split_header(csv_records(text)?);
    let weighted = header.as_ref().is_some_and(|h| h.last().is_some_and(|c| c == "w"));
    if !weighted {
        let rows = numeric_rows(text)?;
        return DiscreteMeasureND::uniform(rows);
    }
    let (_, records) = split_header(csv_records(text)?);
    let mut points = Vec::with_capacity(records.len());
    let mut weights = Vec::with_capacity(records.len());
    for (k, rec) in records.iter().enumerate() {
        let (w, xs) = rec.split_last().ok_or(Error::EmptyInput)?;
        points.push(xs.iter().map(|s| parse_f64(s, k + 2)).collect::<Result<Vec<f64>>>()?);
        weights.push(parse_rational(w)?);
    }
    DiscreteMeasureND::normalized(points, weights)
}

#[derive(Debug, Serialize)]
struct AtomOut<'a> {
    point: &'a [f64],
    mass: f64,
    mass_exact: String,
}

#[derive(Debug, Serialize)]
struct WitnessOut<'a> {
    value: f64,
    source: Vec<AtomOut<'a>>,
    target: Vec<AtomOut<'a>>,
    entries: &'a [CouplingEntry],
}

fn atoms_out(m: &DiscreteMeasureND) -> Vec<AtomOut<'_>> {
    m.points()
        .iter()
        .zip(m.masses())
        .map(|(p, w)| AtomOut {
            point: p,
            mass: numeric::rational_to_f64(w),
            mass_exact: w.to_string(),
        })
        .collect()
}

/// Optimal value, atom tables and `{i, j, mass}` entries as pretty JSON.
pub fn witness_to_json(mu: &DiscreteMeasureND, nu: &DiscreteMeasureND, sol: &OtSolution) -> String {
    let out = WitnessOut {
        value: sol.value,
        source: atoms_out(mu),
        target: atoms_out(nu),
        entries: &sol.witness.entries,
    };
    serde_json::to_string_pretty(&out).expect("witness serializes")
}
