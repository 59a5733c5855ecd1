//! The `envelope`, `extremal`, `hull` and `oracle` subcommands.

use pshenv_core::{
    envelope_at, hull_membership, relative_extremal_disc, relative_extremal_oracle, replay_certificate, sup_side_1d,
    sup_side_toric, CPoint, Domain, EnvelopeError, EnvelopeResult, ExtReal, GridField, GridKind, HullCertificate, HullVerdict,
    OracleError, Scenario,
};
use rayon::prelude::*;

use crate::config::{Config, OracleGrid, OracleMethod};
use crate::error::CliError;
use crate::report::{
    extremal_csv, field_csv, hull_csv, rows_csv, ExtremalRow, HullRow, OracleSummary, PointRow, RunReport,
};

/// A finished run: the report plus the CSV tables to write next to it.
pub struct Outcome {
    pub report: RunReport,
    pub tables: Vec<(&'static str, String)>,
}

pub(crate) fn envelope_error(e: EnvelopeError) -> CliError {
    CliError::Config(e.to_string())
}

pub(crate) fn oracle_error(e: OracleError) -> CliError {
    match e {
        OracleError::NoConvergence { .. } => CliError::refusal("oracle", e),
        other => CliError::Config(other.to_string()),
    }
}

fn toric_applies(sc: &Scenario) -> bool {
    sc.domain.log_box().is_some() && sc.potential.is_torus_invariant() && sc.obstacle.is_torus_invariant()
}

/// The sup side on the configured grid: the convex-envelope oracle when the data are
/// torus invariant on a product of annuli, the planar obstacle iteration otherwise.
pub fn sup_field(sc: &Scenario, grid: &OracleGrid) -> Result<GridField, CliError> {
    let toric = match grid.method {
        OracleMethod::Toric => true,
        OracleMethod::Planar => false,
        OracleMethod::Auto => toric_applies(sc),
    };
    let field = if toric { sup_side_toric(sc, &grid.geometry()) } else { sup_side_1d(sc, &grid.geometry()) };
    field.map_err(oracle_error)
}

pub(crate) fn method_of(f: &GridField) -> &'static str {
    match f.kind() {
        GridKind::Planar => "planar",
        GridKind::Log { .. } => "toric",
    }
}

fn gap(inf: ExtReal, sup: Option<f64>) -> Option<ExtReal> {
    sup.map(|s| inf + (-s))
}

pub(crate) fn row(r: EnvelopeResult, sup: Option<f64>) -> PointRow {
    PointRow {
        point: r.x,
        inf_side: r.value,
        sup_side: sup,
        gap: gap(r.value, sup),
        degree: r.best_disc.degree(),
        evaluations: r.evaluations(),
        diverged: r.diverged,
        ladder: r.ladder.iter().map(|g| g.value).collect(),
    }
}

/// Per-point computations run concurrently; results keep config order.
fn per_point<T: Send>(
    points: &[CPoint],
    f: impl Fn(&CPoint) -> Result<T, CliError> + Sync + Send,
) -> Result<Vec<T>, CliError> {
    points.par_iter().map(f).collect()
}

pub fn run_envelope(config: &Config) -> Result<Outcome, CliError> {
    config.check_points()?;
    let sc = config.scenario()?;
    let field = config.oracle_grid.as_ref().map(|g| sup_field(&sc, g)).transpose()?;
    let rows = per_point(&config.points, |p| {
        let r = envelope_at(p, &sc, &config.budget).map_err(envelope_error)?;
        Ok(row(r, field.as_ref().and_then(|f| f.value_at(p))))
    })?;
    let mut report = RunReport::new("envelope", config);
    report.oracle = field.as_ref().map(|f| OracleSummary::of(method_of(f), f));
    let tables = vec![("envelope.csv", rows_csv(&rows)?)];
    report.rows = rows;
    Ok(Outcome { report, tables })
}

fn extremal_set(config: &Config) -> Result<&Domain, CliError> {
    config
        .extremal
        .as_ref()
        .map(|e| &e.set)
        .ok_or_else(|| CliError::Config("the extremal command needs an `extremal` section".into()))
}

pub fn run_extremal(config: &Config) -> Result<Outcome, CliError> {
    config.check_points()?;
    let e = extremal_set(config)?;
    let sc = config.scenario()?;
    let field = config
        .oracle_grid
        .as_ref()
        .map(|g| relative_extremal_oracle(&sc, e, &g.geometry()).map_err(oracle_error))
        .transpose()?;
    let rows = per_point(&config.points, |p| {
        let r = relative_extremal_disc(p, e, &sc, &config.budget).map_err(envelope_error)?;
        let oracle = field.as_ref().and_then(|f| f.value_at(p));
        Ok(ExtremalRow {
            point: *p,
            disc_side: r.value,
            oracle_side: oracle,
            gap: gap(r.value, oracle),
            degree: r.best_disc.degree(),
            evaluations: r.evaluations(),
        })
    })?;
    let mut report = RunReport::new("extremal", config);
    report.oracle = field.as_ref().map(|f| OracleSummary::of(method_of(f), f));
    let tables = vec![("extremal.csv", extremal_csv(&rows)?)];
    report.extremal = rows;
    Ok(Outcome { report, tables })
}

pub fn run_hull(config: &Config) -> Result<Outcome, CliError> {
    let spec = config.hull.as_ref().ok_or_else(|| CliError::Config("the hull command needs a `hull` section".into()))?;
    config.check_points()?;
    let sc = config.scenario()?;
    let rows = per_point(&config.points, |p| {
        let decision = hull_membership(p, &spec.compact, &sc, &spec.radii, &spec.epsilons, &config.budget)
            .map_err(envelope_error)?;
        let replay = match (&decision.verdict, &decision.certificate) {
            (HullVerdict::Member, HullCertificate::Disc { disc, radius, .. }) => Some(
                replay_certificate(disc, &spec.compact, *radius, &sc).map_err(|e| CliError::refusal("replay", e))?,
            ),
            _ => None,
        };
        Ok(HullRow { decision, replay })
    })?;
    let mut report = RunReport::new("hull", config);
    let tables = vec![("hull.csv", hull_csv(&rows)?)];
    report.hull = rows;
    Ok(Outcome { report, tables })
}

/// Writes the grid field itself: the sup side, or the relative extremal field when
/// the config has an `extremal` section.
pub fn run_oracle(config: &Config) -> Result<Outcome, CliError> {
    let sc = config.scenario()?;
    let grid = config.oracle_grid.unwrap_or_default();
    let field = match &config.extremal {
        Some(e) => relative_extremal_oracle(&sc, &e.set, &grid.geometry()).map_err(oracle_error)?,
        None => sup_field(&sc, &grid)?,
    };
    let mut report = RunReport::new("oracle", config);
    report.oracle = Some(OracleSummary::of(method_of(&field), &field));
    Ok(Outcome { report, tables: vec![("oracle.csv", field_csv(&field)?)] })
}
