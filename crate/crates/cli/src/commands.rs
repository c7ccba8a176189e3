use std::fmt::Write as _;

use orthospec_core::apollonian::{length_histogram, ortho_sum};
use orthospec_core::bk::fn_evaluate;
use orthospec_core::measure::{based_in_ball, hyperbolic_ball_volume, StereographicProposal};
use orthospec_core::special::{cusp_coefficient, Dimension};
use orthospec_core::{
    cusp_integral_closed, cusp_integral_quadrature, f3_closed, fn_numeric, generate_strip_packing, identity_residual,
    mc_measure, partial_orthospectrum, sphere_volume, CuspIntegralKind, HPoint, MeasureEstimate, Suite, SCHEMA,
};
use serde::Serialize;

use crate::args::{Command, Format, PackingArgs, Series};
use crate::output::{json, Csv};
use crate::CliError;

/// Primary output of a subcommand. `passed` is false when a check the
/// subcommand performs did not hold.
pub struct Outcome {
    pub body: String,
    pub passed: bool,
}

impl Outcome {
    fn ok(body: String) -> Self {
        Outcome { body, passed: true }
    }
}

fn dimension(n: Option<u32>) -> Result<Dimension, CliError> {
    let n = n.ok_or_else(|| CliError::Usage("--dimension is required".into()))?;
    Ok(Dimension::new(n)?)
}

fn pick(format: Option<Format>, default: Format, allowed: &[Format]) -> Result<Format, CliError> {
    let f = format.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(CliError::Usage(format!("--output {f:?} is not supported here").to_lowercase()))
    }
}

pub fn name(command: &Command) -> &'static str {
    match command {
        Command::CuspCoeff { .. } => "cusp-coeff",
        Command::BkFunction { .. } => "bk-function",
        Command::VerifyLemmas { .. } => "verify-lemmas",
        Command::MeasureCheck { .. } => "measure-check",
        Command::ApollonianSpectrum { .. } => "apollonian-spectrum",
        Command::IdentityCheck { .. } => "identity-check",
        Command::PlotData { .. } => "plot-data",
    }
}

fn suites(command: &Command) -> &'static [Suite] {
    match command {
        Command::CuspCoeff { .. } => &[Suite::Special],
        Command::BkFunction { .. } => &[Suite::Bk],
        Command::VerifyLemmas { .. } => &[Suite::Cusp],
        Command::MeasureCheck { .. } => &[Suite::Geometry, Suite::Measure],
        Command::ApollonianSpectrum { .. } | Command::IdentityCheck { .. } => &[Suite::Apollonian],
        Command::PlotData { .. } => &[Suite::Bk, Suite::Apollonian],
    }
}

pub fn self_test(command: &Command, format: Option<Format>) -> Result<Outcome, CliError> {
    let checks: Vec<_> = suites(command).iter().flat_map(|&s| orthospec_core::selftest::run(s)).collect();
    let passed = checks.iter().all(|c| c.passed);
    let body = match pick(format, Format::Text, &[Format::Text, Format::Json])? {
        Format::Json => json(&checks)?,
        _ => {
            let mut s = String::new();
            for c in &checks {
                let status = if c.passed { "PASS" } else { "FAIL" };
                let _ = writeln!(s, "{status} {:?}: {}: {}", c.suite, c.name, c.detail);
            }
            s
        }
    };
    Ok(Outcome { body, passed })
}

pub fn run(command: &Command, format: Option<Format>, seed: u64) -> Result<Outcome, CliError> {
    match command {
        Command::CuspCoeff { dimension: n } => cusp_coeff(dimension(*n)?, format),
        Command::BkFunction { dimension: n, length, samples, monte_carlo } => {
            bk_function(dimension(*n)?, length, *samples, *monte_carlo, seed, format)
        }
        Command::VerifyLemmas { tolerance } => verify_lemmas(*tolerance, format),
        Command::MeasureCheck { dimension: n, radius, samples, isometries } => {
            measure_check(Dimension::new(*n)?, *radius, *samples, *isometries, seed, format)
        }
        Command::ApollonianSpectrum { packing } => apollonian_spectrum(packing, format),
        Command::IdentityCheck { packing } => identity_check(packing, format),
        Command::PlotData { series, max_length, points, packing } => plot_data(*series, *max_length, *points, packing, format),
    }
}

fn cusp_coeff(n: Dimension, format: Option<Format>) -> Result<Outcome, CliError> {
    let c = cusp_coefficient(n)?;
    let body = match pick(format, Format::Text, &[Format::Text, Format::Json, Format::Csv])? {
        Format::Text => format!("{c:?}\n"),
        Format::Csv => {
            let mut csv = Csv::new(&["n", "cusp_coefficient"]);
            csv.row(&[n.get().to_string(), c.to_string()]);
            csv.finish()
        }
        Format::Json => json(&serde_json::json!({ "schema": SCHEMA, "n": n.get(), "cusp_coefficient": c }))?,
    };
    Ok(Outcome::ok(body))
}

#[derive(Serialize)]
struct FnPoint {
    ell: f64,
    estimate: MeasureEstimate,
    closed_form: Option<f64>,
}

fn bk_function(n: Dimension, lengths: &[f64], samples: u64, monte_carlo: bool, seed: u64, format: Option<Format>) -> Result<Outcome, CliError> {
    if lengths.is_empty() {
        return Err(CliError::Usage("--length is required".into()));
    }
    let closed_available = n.get() == 3;
    let points = lengths
        .iter()
        .map(|&ell| {
            let closed_form = if closed_available { Some(f3_closed(ell)?) } else { None };
            let estimate = if monte_carlo { fn_numeric(n, ell, samples, seed)? } else { fn_evaluate(n, ell, samples, seed)? };
            Ok(FnPoint { ell, estimate, closed_form })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let body = match pick(format, Format::Text, &[Format::Text, Format::Json, Format::Csv])? {
        Format::Text => {
            let mut s = String::new();
            for p in &points {
                if points.len() > 1 {
                    let _ = write!(s, "{} ", p.ell);
                }
                let _ = write!(s, "{:.6}", p.estimate.value);
                if p.estimate.std_error > 0.0 {
                    let _ = write!(s, " +- {:.6}", p.estimate.std_error);
                }
                s.push('\n');
            }
            s
        }
        Format::Csv => {
            let mut csv = Csv::new(&["n", "ell", "estimate", "std_error", "closed_form_if_available"]);
            for p in &points {
                csv.row(&[
                    n.get().to_string(),
                    p.ell.to_string(),
                    p.estimate.value.to_string(),
                    p.estimate.std_error.to_string(),
                    p.closed_form.map_or(String::new(), |c| c.to_string()),
                ]);
            }
            csv.finish()
        }
        Format::Json => json(&serde_json::json!({ "schema": SCHEMA, "n": n.get(), "points": points }))?,
    };
    Ok(Outcome::ok(body))
}

#[derive(Serialize)]
struct LemmaRow {
    kind: String,
    n: u32,
    d: f64,
    closed: f64,
    quadrature: f64,
    abs_err: f64,
    tol: f64,
    pass: bool,
}

fn verify_lemmas(tolerance: f64, format: Option<Format>) -> Result<Outcome, CliError> {
    use CuspIntegralKind::*;
    let mut cells: Vec<(CuspIntegralKind, u32, f64, f64)> = Vec::new();
    for n in [3, 4, 5] {
        for d in [0.5, 1.0, 2.0] {
            for kind in [Main, I1, I2, I3] {
                cells.push((kind, n, d, 1e-6));
            }
        }
    }
    cells.extend((0..=6).map(|m| (Harmonic(m), 3, 1.0, 1e-8)));
    cells.extend((3..=10).map(|k| (Cosine(k), 3, 1.0, 1e-10)));
    let rows = cells
        .into_iter()
        .map(|(kind, n, d, rel)| {
            let dim = Dimension::new(n)?;
            let closed = cusp_integral_closed(kind, dim, d)?;
            let q = cusp_integral_quadrature(kind, dim, d, tolerance)?;
            // Relative to the integrand's scale where the integral itself vanishes.
            let tol = rel * closed.abs().max(q.magnitude);
            let abs_err = (closed - q.value).abs();
            Ok(LemmaRow { kind: kind.to_string(), n, d, closed, quadrature: q.value, abs_err, tol, pass: abs_err <= tol })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let passed = rows.iter().all(|r| r.pass);
    let body = match pick(format, Format::Csv, &[Format::Csv, Format::Json])? {
        Format::Json => json(&serde_json::json!({ "schema": SCHEMA, "rows": rows }))?,
        _ => {
            let mut csv = Csv::new(&["kind", "n", "d", "closed", "quadrature", "abs_err", "tol", "pass"]);
            for r in &rows {
                csv.row(&[
                    r.kind.clone(),
                    r.n.to_string(),
                    r.d.to_string(),
                    r.closed.to_string(),
                    r.quadrature.to_string(),
                    r.abs_err.to_string(),
                    r.tol.to_string(),
                    r.pass.to_string(),
                ]);
            }
            csv.finish()
        }
    };
    Ok(Outcome { body, passed })
}

fn measure_check(n: Dimension, radius: f64, samples: u64, isometries: usize, seed: u64, format: Option<Format>) -> Result<Outcome, CliError> {
    let format = pick(format, Format::Json, &[Format::Json, Format::Text])?;
    if isometries > 0 {
        let r = orthospec_core::measure::liouville_invariance_check(n, radius, isometries, samples, seed)?;
        let passed = r.max_pairwise_z < 3.0 && r.max_exact_z < 3.0;
        let body = match format {
            Format::Json => json(&serde_json::json!({ "schema": SCHEMA, "invariance": r, "pass": passed }))?,
            _ => format!(
                "exact {}\nestimates {}\nmax pairwise z {:.3}\nmax z vs exact {:.3}\n",
                r.exact,
                r.estimates.len(),
                r.max_pairwise_z,
                r.max_exact_z
            ),
        };
        return Ok(Outcome { body, passed });
    }
    let center = HPoint::origin(n.boundary_dim());
    let proposal = StereographicProposal::new(center.clone(), radius)?;
    let estimate = mc_measure(based_in_ball(center, radius), &proposal, n, samples, seed)?;
    let exact = sphere_volume(n.get() - 1) * hyperbolic_ball_volume(n, radius)?;
    let z = estimate.z_score_exact(exact);
    let passed = z < 3.0;
    let body = match format {
        Format::Json => json(&serde_json::json!({
            "schema": SCHEMA, "n": n.get(), "radius": radius, "exact": exact, "estimate": estimate, "z": z, "pass": passed,
        }))?,
        _ => format!("{:.6} +- {:.6} (exact {exact:.6}, z = {z:.3})\n", estimate.value, estimate.std_error),
    };
    Ok(Outcome { body, passed })
}

fn apollonian_spectrum(args: &PackingArgs, format: Option<Format>) -> Result<Outcome, CliError> {
    let config = args.config();
    config.validate()?;
    let packing = generate_strip_packing(&config)?;
    let entries = partial_orthospectrum(&packing, &config)?;
    let body = match pick(format, Format::Json, &[Format::Json, Format::Csv])? {
        Format::Csv => {
            let mut csv = Csv::new(&["inversive_distance_num", "inversive_distance_den", "length", "multiplicity"]);
            for e in &entries {
                csv.row(&[
                    e.inversive_distance.numer().to_string(),
                    e.inversive_distance.denom().to_string(),
                    e.length.to_string(),
                    e.multiplicity.to_string(),
                ]);
            }
            csv.finish()
        }
        _ => json(&serde_json::json!({
            "schema": SCHEMA,
            "curvature_bound": config.curvature_bound,
            "length_cutoff": config.length_cutoff,
            "strategy": config.strategy,
            "circles": packing.circles.len(),
            "partial": packing.partial,
            "orthogeodesics": entries.iter().map(|e| e.multiplicity).sum::<u64>(),
            "ortho_sum": ortho_sum(&entries)?,
            "entries": entries,
        }))?,
    };
    Ok(Outcome::ok(body))
}

fn identity_check(args: &PackingArgs, format: Option<Format>) -> Result<Outcome, CliError> {
    let report = identity_residual(&args.config())?;
    let passed = report.monotone && report.bound_satisfied;
    let body = match pick(format, Format::Json, &[Format::Json, Format::Text])? {
        Format::Json => json(&report)?,
        _ => {
            let mut s = format!("target {:.9}\ncusp term {}\n", report.target, report.cusp_term);
            for p in &report.k_schedule {
                let _ = writeln!(s, "K = {:>8}  S(K) = {:.9}  residual {:.3e}", p.curvature_bound, p.total, p.residual);
            }
            let _ = writeln!(s, "monotone {}, bounded by target {}", report.monotone, report.bound_satisfied);
            s
        }
    };
    Ok(Outcome { body, passed })
}

fn plot_data(series: Series, max_length: f64, points: usize, args: &PackingArgs, format: Option<Format>) -> Result<Outcome, CliError> {
    pick(format, Format::Csv, &[Format::Csv])?;
    let body = match series {
        Series::F3 => {
            if !(max_length > 0.0) || !max_length.is_finite() || points == 0 {
                return Err(CliError::Usage("--max-length must be positive and --points at least 1".into()));
            }
            let mut csv = Csv::new(&["ell", "f3"]);
            for i in 1..=points {
                let ell = max_length * i as f64 / points as f64;
                csv.row(&[ell.to_string(), f3_closed(ell)?.to_string()]);
            }
            csv.finish()
        }
        Series::Convergence => {
            let report = identity_residual(&args.config())?;
            let mut csv = Csv::new(&["curvature_bound", "circles", "orthogeodesics", "ortho_sum", "total", "residual", "target"]);
            for p in &report.k_schedule {
                csv.row(&[
                    p.curvature_bound.to_string(),
                    p.circles.to_string(),
                    p.orthogeodesics.to_string(),
                    p.ortho_sum.to_string(),
                    p.total.to_string(),
                    p.residual.to_string(),
                    report.target.to_string(),
                ]);
            }
            csv.finish()
        }
        Series::Histogram => {
            let config = args.config();
            config.validate()?;
            let entries = partial_orthospectrum(&generate_strip_packing(&config)?, &config)?;
            let mut csv = Csv::new(&["lo", "hi", "count", "mass"]);
            for b in length_histogram(&entries, config.length_cutoff)? {
                csv.row(&[b.lo.to_string(), b.hi.to_string(), b.count.to_string(), b.mass.to_string()]);
            }
            csv.finish()
        }
    };
    Ok(Outcome::ok(body))
}
