//! The simulate, analytic and validate runs.

use std::io::Write;

use fdnoma::analytic::quadrature::{chebyshev_grid, QuadratureGrid};
use fdnoma::analytic::{self, AnalyticResult, Bound, IntegrationRule};
use fdnoma::mc::{run_batch, same_sampling, Metric, RunOptions};
use fdnoma::model::{derive_scalars, DerivedScalars};
use fdnoma::{FarDistanceModel, Strategy, SystemParams};

use crate::config::{ExperimentConfig, Point};
use crate::output::{csv_writer, fmt_axis, fmt_g};
use crate::CliError;

/// Threshold derivation used by the analytic side of a run.
pub type DeriveFn = fn(&SystemParams) -> fdnoma::Result<DerivedScalars>;

/// Absolute floor of the Monte Carlo agreement tolerance.
pub const MC_FLOOR: f64 = 5e-4;
/// Agreement tolerance of the far-user formulas against the exact distance
/// model.
pub const EXACT_MODEL_TOL: f64 = 0.02;

/// Runs of consecutive points whose draws can be shared.
fn sampling_groups(points: &[Point]) -> Vec<&[Point]> {
    let mut groups = Vec::new();
    let mut start = 0;
    for i in 1..=points.len() {
        if i == points.len() || !same_sampling(&points[start].params, &points[i].params) {
            groups.push(&points[start..i]);
            start = i;
        }
    }
    groups
}

pub fn simulate<W: Write>(exps: &[ExperimentConfig], opts: RunOptions, out: W) -> Result<(), CliError> {
    let mut csv = csv_writer(out);
    csv.write_record(["axis_value", "strategy", "metric", "p_hat", "std_err", "trials", "seed", "curve"])?;
    for exp in exps {
        let points = exp.points()?;
        for &strategy in &exp.strategies {
            for group in sampling_groups(&points) {
                let variants: Vec<SystemParams> = group.iter().map(|p| p.params.clone()).collect();
                log::info!(
                    "{} {}: {} point(s), {} trials",
                    exp.label,
                    strategy.name(),
                    variants.len(),
                    exp.trials
                );
                let batch = run_batch(&variants, strategy, &exp.metrics, exp.trials, exp.seed, opts)?;
                for (point, row) in group.iter().zip(&batch.estimates) {
                    for est in row {
                        csv.write_record([
                            fmt_axis(point.axis_value),
                            strategy.name().into(),
                            est.metric.name().into(),
                            fmt_g(est.p_hat),
                            fmt_g(est.std_err),
                            est.trials.to_string(),
                            est.seed.to_string(),
                            exp.label.clone(),
                        ])?;
                    }
                }
            }
        }
    }
    csv.flush()?;
    Ok(())
}

/// Every analytic evaluation that applies to one metric at one point.
pub fn analytic_rows(
    params: &SystemParams,
    derived: &DerivedScalars,
    strategy: Strategy,
    metric: Metric,
    grid: &QuadratureGrid,
) -> fdnoma::Result<Vec<AnalyticResult>> {
    let rule = IntegrationRule::default();
    let alpha2 = params.alpha == 2.0;
    Ok(match (metric, strategy) {
        (Metric::Near, Strategy::Rnrf) => vec![
            analytic::near_rnrf_exact(params, derived, params.relay_offset, rule)?,
            analytic::near_rnrf_bound(params, derived, Bound::Upper, grid)?,
            analytic::near_rnrf_bound(params, derived, Bound::Lower, grid)?,
        ],
        (Metric::Near, Strategy::Nnnf) => vec![
            analytic::near_nnnf_exact(params, derived, params.relay_offset, rule)?,
            analytic::near_nnnf_bound(params, derived, Bound::Upper, grid)?,
            analytic::near_nnnf_bound(params, derived, Bound::Lower, grid)?,
        ],
        (Metric::Far, Strategy::Rnrf) => {
            let mut rows = vec![analytic::far_rnrf(params, derived)?];
            if alpha2 {
                rows.push(analytic::far_rnrf_alpha2(params, derived)?);
            }
            rows
        }
        (Metric::Far, Strategy::Nnnf) => {
            let mut rows = vec![analytic::far_nnnf(params, derived, grid)?];
            if alpha2 {
                rows.push(analytic::far_nnnf_alpha2(params, derived)?);
            }
            rows
        }
        (Metric::NearHd | Metric::FarHd, _) => Vec::new(),
    })
}

fn skip_hd(exp: &ExperimentConfig) {
    if exp.metrics.iter().any(|m| matches!(m, Metric::NearHd | Metric::FarHd)) {
        log::info!("{}: no analytic form for half-duplex metrics, skipped", exp.label);
    }
}

pub fn analytic<W: Write>(exps: &[ExperimentConfig], out: W) -> Result<(), CliError> {
    let mut csv = csv_writer(out);
    csv.write_record(["axis_value", "strategy", "metric", "value", "method", "m_used", "curve"])?;
    for exp in exps {
        skip_hd(exp);
        let grid = chebyshev_grid(exp.quadrature_m);
        for point in exp.points()? {
            let derived = derive_scalars(&point.params)?;
            for &strategy in &exp.strategies {
                for &metric in &exp.metrics {
                    let rows = analytic_rows(&point.params, &derived, strategy, metric, &grid).map_err(|e| {
                        let hint = match e {
                            fdnoma::Error::OutOfRange { .. } => "; a larger quadrature_m may help",
                            _ => "",
                        };
                        CliError::Numeric(format!(
                            "{} {} {} at axis value {}: {e}{hint}",
                            exp.label,
                            strategy.name(),
                            metric.name(),
                            fmt_axis(point.axis_value)
                        ))
                    })?;
                    for r in rows {
                        csv.write_record([
                            fmt_axis(point.axis_value),
                            strategy.name().into(),
                            metric.name().into(),
                            fmt_g(r.value),
                            r.method.name().into(),
                            r.m_used.to_string(),
                            exp.label.clone(),
                        ])?;
                    }
                }
            }
        }
    }
    csv.flush()?;
    Ok(())
}

/// One engine-versus-formula comparison.
#[derive(Clone, Debug)]
pub struct Check {
    pub curve: String,
    pub axis_value: Option<f64>,
    pub strategy: Strategy,
    pub metric: Metric,
    /// Far-user distance model of the simulation; `None` for near users,
    /// which it does not affect.
    pub model: Option<FarDistanceModel>,
    pub p_hat: f64,
    pub std_err: f64,
    /// NaN when the formula failed to evaluate.
    pub value: f64,
    pub method: Option<analytic::Method>,
    pub tolerance: f64,
}

impl Check {
    pub fn diff(&self) -> f64 {
        (self.p_hat - self.value).abs()
    }

    /// NaN never passes.
    pub fn pass(&self) -> bool {
        self.diff() <= self.tolerance
    }
}

fn model_name(model: Option<FarDistanceModel>) -> &'static str {
    match model {
        None => "-",
        Some(FarDistanceModel::Exact) => "exact",
        Some(FarDistanceModel::BsCentered) => "bs-centered",
    }
}

/// Simulates and evaluates every point, with `derive` supplying the
/// thresholds of the formulas.
pub fn collect_checks(exps: &[ExperimentConfig], opts: RunOptions, derive: DeriveFn) -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    for exp in exps {
        skip_hd(exp);
        let metrics: Vec<Metric> = exp
            .metrics
            .iter()
            .copied()
            .filter(|m| matches!(m, Metric::Near | Metric::Far))
            .collect();
        if metrics.is_empty() {
            continue;
        }
        let has_far = metrics.contains(&Metric::Far);
        let models: Vec<FarDistanceModel> = if has_far {
            vec![FarDistanceModel::BsCentered, FarDistanceModel::Exact]
        } else {
            vec![exp.far_distance_model]
        };
        let grid = chebyshev_grid(exp.quadrature_m);
        let points = exp.points()?;
        for &strategy in &exp.strategies {
            for group in sampling_groups(&points) {
                let variants: Vec<SystemParams> = group
                    .iter()
                    .flat_map(|p| {
                        models.iter().map(|&far_distance_model| SystemParams {
                            far_distance_model,
                            ..p.params.clone()
                        })
                    })
                    .collect();
                let batch = run_batch(&variants, strategy, &metrics, exp.trials, exp.seed, opts)?;
                for (i, point) in group.iter().enumerate() {
                    let derived = derive(&point.params)?;
                    for (m, &metric) in metrics.iter().enumerate() {
                        // a formula that fails to evaluate is a failed check, not an abort
                        let (value, method) = match analytic_rows(&point.params, &derived, strategy, metric, &grid) {
                            Ok(rows) => (rows[0].value, Some(rows[0].method)),
                            Err(e) => {
                                log::warn!("{} {} {}: {e}", exp.label, strategy.name(), metric.name());
                                (f64::NAN, None)
                            }
                        };
                        let per_model: Vec<(usize, Option<FarDistanceModel>)> = if metric == Metric::Far {
                            models.iter().enumerate().map(|(j, &md)| (j, Some(md))).collect()
                        } else {
                            vec![(0, None)]
                        };
                        for (j, model) in per_model {
                            let est = batch.estimates[i * models.len() + j][m];
                            let tolerance = if model == Some(FarDistanceModel::Exact) {
                                EXACT_MODEL_TOL
                            } else {
                                (3.0 * est.std_err).max(MC_FLOOR)
                            };
                            checks.push(Check {
                                curve: exp.label.clone(),
                                axis_value: point.axis_value,
                                strategy,
                                metric,
                                model,
                                p_hat: est.p_hat,
                                std_err: est.std_err,
                                value,
                                method,
                                tolerance,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(checks)
}

pub fn write_checks<W: Write>(checks: &[Check], out: W) -> Result<(), CliError> {
    let mut csv = csv_writer(out);
    csv.write_record([
        "axis_value",
        "strategy",
        "metric",
        "far_distance_model",
        "p_hat",
        "std_err",
        "value",
        "method",
        "abs_diff",
        "tolerance",
        "status",
        "curve",
    ])?;
    for c in checks {
        csv.write_record([
            fmt_axis(c.axis_value),
            c.strategy.name().into(),
            c.metric.name().into(),
            model_name(c.model).into(),
            fmt_g(c.p_hat),
            fmt_g(c.std_err),
            fmt_g(c.value),
            c.method.map_or("error", |m| m.name()).into(),
            fmt_g(c.diff()),
            fmt_g(c.tolerance),
            if c.pass() { "PASS" } else { "FAIL" }.into(),
            c.curve.clone(),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

pub fn report<W: Write>(checks: &[Check], mut w: W) -> std::io::Result<()> {
    for c in checks {
        writeln!(
            w,
            "{} {:<24} {:>8} {} {:<5} {:<11} p_hat={:<12} value={:<12} |diff|={:<12} tol={}",
            if c.pass() { "PASS" } else { "FAIL" },
            c.curve,
            fmt_axis(c.axis_value),
            c.strategy.name(),
            c.metric.name(),
            model_name(c.model),
            fmt_g(c.p_hat),
            fmt_g(c.value),
            fmt_g(c.diff()),
            fmt_g(c.tolerance),
        )?;
    }
    let failed = checks.iter().filter(|c| !c.pass()).count();
    writeln!(w, "{} checks, {} failed", checks.len(), failed)
}

/// Full validate run. Returns the number of failed checks.
pub fn validate_with<W: Write, R: Write>(
    exps: &[ExperimentConfig],
    opts: RunOptions,
    derive: DeriveFn,
    out: W,
    report_to: R,
) -> Result<usize, CliError> {
    let checks = collect_checks(exps, opts, derive)?;
    write_checks(&checks, out)?;
    report(&checks, report_to)?;
    Ok(checks.iter().filter(|c| !c.pass()).count())
}
