//! Report types and their CSV / JSON renderings.

use std::fs;
use std::path::Path;

use pshenv_core::{CPoint, ExtReal, GridField, HullCertificate, HullDecision, HullVerdict};
use serde::Serialize;

use crate::config::Config;
use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointRow {
    pub point: CPoint,
    pub inf_side: ExtReal,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sup_side: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap: Option<ExtReal>,
    /// Degree of the best disc found.
    pub degree: usize,
    pub evaluations: usize,
    pub diverged: bool,
    /// Best value after each rung of the degree ladder.
    pub ladder: Vec<ExtReal>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtremalRow {
    pub point: CPoint,
    pub disc_side: ExtReal,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_side: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap: Option<ExtReal>,
    pub degree: usize,
    pub evaluations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HullRow {
    pub decision: HullDecision,
    /// Member certificates re-evaluated with doubled boundary nodes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replay: Option<ExtReal>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteSummary {
    pub name: String,
    pub samples: usize,
    pub failures: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleSummary {
    pub method: &'static str,
    pub spacing: f64,
    pub nodes: usize,
    pub clamped: usize,
    pub sweeps: usize,
    pub residual: f64,
}

impl OracleSummary {
    pub fn of(method: &'static str, field: &GridField) -> OracleSummary {
        let (nodes, clamped) = field.nodes().fold((0, 0), |(n, c), node| (n + 1, c + usize::from(node.clamped)));
        OracleSummary { method, spacing: field.spacing(), nodes, clamped, sweeps: field.sweeps(), residual: field.residual() }
    }
}

/// Everything a run produces except wall time, which goes to stderr so that
/// reruns stay byte-identical.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub name: String,
    pub command: &'static str,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rows: Vec<PointRow>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub extremal: Vec<ExtremalRow>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub hull: Vec<HullRow>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub suites: Vec<SuiteSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSummary>,
    pub config: Config,
}

impl RunReport {
    pub fn new(command: &'static str, config: &Config) -> RunReport {
        RunReport {
            name: config.name.clone(),
            command,
            rows: Vec::new(),
            extremal: Vec::new(),
            hull: Vec::new(),
            suites: Vec::new(),
            oracle: None,
            config: config.clone(),
        }
    }

    pub fn failed_suites(&self) -> usize {
        self.suites.iter().filter(|s| !s.passed).count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
    #[default]
    Both,
}

pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "+inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x:.16e}")
    }
}

fn ext(x: ExtReal) -> String {
    x.to_string()
}

fn opt(x: Option<String>) -> String {
    x.unwrap_or_default()
}

fn point_cells(p: &CPoint) -> [String; 4] {
    let c = p.coords();
    let cell = |i: usize, im: bool| c.get(i).map(|z| num(if im { z.im } else { z.re })).unwrap_or_default();
    [cell(0, false), cell(0, true), cell(1, false), cell(1, true)]
}

const POINT_HEADER: [&str; 4] = ["z1_re", "z1_im", "z2_re", "z2_im"];

fn csv_string(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Config(format!("csv: {e}"));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Config(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn rows_csv(rows: &[PointRow]) -> Result<String, CliError> {
    let mut header = POINT_HEADER.to_vec();
    header.extend(["inf_side", "sup_side", "gap", "degree", "evaluations", "diverged"]);
    csv_string(
        &header,
        rows.iter().map(|r| {
            let mut v = point_cells(&r.point).to_vec();
            v.extend([
                ext(r.inf_side),
                opt(r.sup_side.map(num)),
                opt(r.gap.map(ext)),
                r.degree.to_string(),
                r.evaluations.to_string(),
                r.diverged.to_string(),
            ]);
            v
        }),
    )
}

pub fn extremal_csv(rows: &[ExtremalRow]) -> Result<String, CliError> {
    let mut header = POINT_HEADER.to_vec();
    header.extend(["disc_side", "oracle_side", "gap", "degree", "evaluations"]);
    csv_string(
        &header,
        rows.iter().map(|r| {
            let mut v = point_cells(&r.point).to_vec();
            v.extend([
                ext(r.disc_side),
                opt(r.oracle_side.map(num)),
                opt(r.gap.map(ext)),
                r.degree.to_string(),
                r.evaluations.to_string(),
            ]);
            v
        }),
    )
}

fn verdict_name(v: HullVerdict) -> &'static str {
    match v {
        HullVerdict::Member => "member",
        HullVerdict::NonMember => "non-member",
        HullVerdict::Inconclusive => "inconclusive",
    }
}

pub fn hull_csv(rows: &[HullRow]) -> Result<String, CliError> {
    let mut header = POINT_HEADER.to_vec();
    header.extend(["verdict", "certificate", "best_value", "replay"]);
    csv_string(
        &header,
        rows.iter().map(|r| {
            let d = &r.decision;
            let cert = match &d.certificate {
                HullCertificate::Disc { radius, epsilon, .. } => format!("disc r={radius} eps={epsilon}"),
                HullCertificate::Separator { function, .. } => format!("separator {function}"),
                HullCertificate::BestValues => "best-values".into(),
            };
            let best = d.rungs.iter().map(|g| g.value).reduce(|a, b| if b < a { b } else { a });
            let mut v = point_cells(&d.x).to_vec();
            v.extend([verdict_name(d.verdict).to_string(), cert, opt(best.map(ext)), opt(r.replay.map(ext))]);
            v
        }),
    )
}

pub fn suites_csv(suites: &[SuiteSummary]) -> Result<String, CliError> {
    csv_string(
        &["suite", "samples", "failures", "max_residual", "tolerance", "passed"],
        suites.iter().map(|s| {
            vec![
                s.name.clone(),
                s.samples.to_string(),
                s.failures.to_string(),
                opt(s.max_residual.map(num)),
                opt(s.tolerance.map(num)),
                s.passed.to_string(),
            ]
        }),
    )
}

pub fn field_csv(field: &GridField) -> Result<String, CliError> {
    csv_string(
        &["x", "y", "value", "clamped"],
        field.nodes().map(|n| vec![num(n.x), num(n.y), num(n.value), n.clamped.to_string()]),
    )
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

/// Writes `report.json`, `config.json` and the command's CSV tables into `dir`.
pub fn write_outputs(
    dir: &Path,
    format: Format,
    report: &RunReport,
    tables: &[(&str, String)],
) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
    let put = |name: &str, body: &str| {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
    };
    put("config.json", &to_json(&report.config))?;
    if format != Format::Csv {
        put("report.json", &to_json(report))?;
    }
    if format != Format::Json {
        for (name, body) in tables {
            put(name, body)?;
        }
    }
    Ok(())
}
