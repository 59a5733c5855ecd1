//! Verification suites run by `pshenv verify`.

use pshenv_core::rng::task_rng;
use pshenv_core::{
    check_subaverage, envelope_at, eval_potential, pullback_atoms, riesz_direct, riesz_fast, Atom, CPoint, DiscParams,
    ExtReal, Monomial, Polynomial, PotentialSpec, Quadrature, SmoothPart, C64,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::commands::{envelope_error, row, sup_field, Outcome};
use crate::config::Config;
use crate::error::CliError;
use crate::report::{suites_csv, PointRow, RunReport, SuiteSummary};

pub const SUITES: [&str; 6] =
    ["riesz-identity", "jensen", "parseval", "fundamental-inequality", "subaverage", "ladder-monotonicity"];

pub const RIESZ_TOL: f64 = 5e-3;
pub const JENSEN_TOL: f64 = 1e-9;
pub const PARSEVAL_TOL: f64 = 1e-12;
pub const GAP_TOL: f64 = 2e-2;

/// Atoms of the sampled pullbacks keep at least this distance from the unit circle.
const NON_GRAZING: f64 = 0.05;

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

fn complex(rng: &mut ChaCha8Rng, radius: f64) -> C64 {
    pshenv_core::rng::complex_in_disc(rng, radius)
}

fn random_polynomial(rng: &mut ChaCha8Rng, dim: usize) -> Polynomial {
    let exps: &[[u32; 2]] = if dim == 1 {
        &[[0, 0], [1, 0], [2, 0]]
    } else {
        &[[0, 0], [1, 0], [0, 1], [2, 0], [1, 1], [0, 2]]
    };
    let count = rng.random_range(2..=exps.len().min(4));
    let mut terms: Vec<Monomial> = Vec::with_capacity(count);
    while terms.len() < count {
        let e = exps[rng.random_range(0..exps.len())];
        let e = e[..dim].to_vec();
        if terms.iter().all(|m| m.exps != e) {
            terms.push(Monomial { coef: complex(rng, 1.0), exps: e });
        }
    }
    Polynomial { terms }
}

fn random_potential(rng: &mut ChaCha8Rng, dim: usize) -> PotentialSpec {
    let atoms = (0..rng.random_range(1..=2))
        .map(|_| Atom { weight: uniform(rng, 0.2, 2.0), poly: random_polynomial(rng, dim) })
        .collect();
    let smooth = if rng.random::<bool>() {
        SmoothPart::ScaledSquareModulus { c: uniform(rng, 0.0, 1.0) }
    } else {
        SmoothPart::Zero
    };
    PotentialSpec { atoms, smooth }
}

fn random_disc(rng: &mut ChaCha8Rng, dim: usize) -> DiscParams {
    let degree = rng.random_range(1..=4);
    let center: Vec<C64> = (0..dim).map(|_| complex(rng, 0.8)).collect();
    let rows: Vec<Vec<C64>> =
        (0..dim).map(|_| (1..=degree).map(|k| complex(rng, 0.6 / k as f64)).collect()).collect();
    let refs: Vec<&[C64]> = rows.iter().map(|r| r.as_slice()).collect();
    DiscParams::new(CPoint::from_slice(&center).expect("dimension 1 or 2"), &refs)
}

/// A random catalog pair `(ψ, f)` whose pullback atoms stay off the unit circle.
pub fn catalog_pair(seed: u64, index: u64) -> (PotentialSpec, DiscParams) {
    let mut rng = task_rng(seed, 0x7e55, index);
    loop {
        let dim = rng.random_range(1..=2);
        let psi = random_potential(&mut rng, dim);
        let f = random_disc(&mut rng, dim);
        if eval_potential(&psi, f.center()).is_minus_infinity() {
            continue;
        }
        match pullback_atoms(&f, &psi) {
            Ok(pa) if !pa.degenerate && pa.boundary_gap > NON_GRAZING => return (psi, f),
            _ => continue,
        }
    }
}

fn summary(name: &str, residuals: &[Option<f64>], tol: f64) -> SuiteSummary {
    let failures = residuals.iter().filter(|r| r.is_none_or(|r| !(r <= tol))).count();
    let max_residual = residuals.iter().flatten().copied().fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.max(r))));
    SuiteSummary {
        name: name.into(),
        samples: residuals.len(),
        failures,
        max_residual,
        tolerance: Some(tol),
        passed: failures == 0,
    }
}

pub fn riesz_identity(seed: u64, samples: usize) -> SuiteSummary {
    let q = Quadrature::default();
    let residuals: Vec<Option<f64>> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let (psi, f) = catalog_pair(seed, i);
            let d = riesz_direct(&f, &psi, &q).ok()?.finite()?;
            let r = riesz_fast(&f, &psi, &q).ok()?.value.finite()?;
            Some((d - r).abs())
        })
        .collect();
    summary("riesz-identity", &residuals, RIESZ_TOL)
}

/// `ψ = log|z - a|` along `f(t) = x + b t`: the Riesz potential is `min(log|t0|, 0)`
/// with `t0 = (a - x)/b`.
pub fn jensen(seed: u64, samples: usize) -> SuiteSummary {
    let q = Quadrature::new(2048, 64, 64).expect("valid quadrature");
    let residuals: Vec<Option<f64>> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = task_rng(seed, 0x1e5, i);
            let (a, x, b, t0) = loop {
                let a = complex(&mut rng, 3.0);
                let x = complex(&mut rng, 0.9);
                let b = complex(&mut rng, 1.0);
                let t0 = ((a - x) / b).norm_sqr().sqrt();
                if b.norm_sqr() > 1e-4 && (t0 - 1.0).abs() > NON_GRAZING && (a - x).norm_sqr() > 1e-12 {
                    break (a, x, b, t0);
                }
            };
            let psi = PotentialSpec {
                atoms: vec![Atom {
                    weight: 1.0,
                    poly: Polynomial {
                        terms: vec![
                            Monomial { coef: -a, exps: vec![0] },
                            Monomial { coef: C64::new(1.0, 0.0), exps: vec![1] },
                        ],
                    },
                }],
                smooth: SmoothPart::Zero,
            };
            let f = DiscParams::new(CPoint::one(x), &[&[b]]);
            let want = t0.ln().min(0.0);
            let fast = riesz_fast(&f, &psi, &q).ok()?.value.finite()?;
            let direct = riesz_direct(&f, &psi, &q).ok()?.finite()?;
            Some((fast - want).abs().max((direct - want).abs()))
        })
        .collect();
    summary("jensen", &residuals, JENSEN_TOL)
}

/// Smooth part `c|z|²`: the boundary route must give `-c Σ |c_ik|²` exactly.
pub fn parseval(seed: u64, samples: usize) -> SuiteSummary {
    let q = Quadrature::default();
    let residuals: Vec<Option<f64>> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = task_rng(seed, 0x9a5, i);
            let dim = rng.random_range(1..=2);
            let c = uniform(&mut rng, 0.0, 2.0);
            let f = random_disc(&mut rng, dim);
            let energy: f64 = (0..dim).flat_map(|k| f.row(k).iter().map(|z| z.norm_sqr())).sum();
            let psi = PotentialSpec::square_modulus(c);
            let fast = riesz_fast(&f, &psi, &q).ok()?.value.finite()?;
            Some((fast + c * energy).abs())
        })
        .collect();
    summary("parseval", &residuals, PARSEVAL_TOL)
}

fn fundamental_inequality(rows: &[PointRow]) -> SuiteSummary {
    let residuals: Vec<Option<f64>> = rows
        .iter()
        .map(|r| match (r.inf_side, r.sup_side) {
            (_, None) => None,
            (ExtReal::Finite(inf), Some(sup)) => Some((sup - inf).max(0.0)),
            (ExtReal::PlusInfinity, Some(_)) => Some(0.0),
            (ExtReal::MinusInfinity, Some(_)) => Some(f64::INFINITY),
        })
        .collect();
    summary("fundamental-inequality", &residuals, GAP_TOL)
}

fn ladder_monotonicity(rows: &[PointRow]) -> SuiteSummary {
    let failures = rows.iter().filter(|r| r.ladder.windows(2).any(|w| !(w[1] <= w[0]))).count();
    SuiteSummary {
        name: "ladder-monotonicity".into(),
        samples: rows.len(),
        failures,
        max_residual: None,
        tolerance: None,
        passed: failures == 0,
    }
}

pub fn run_verify(config: &Config) -> Result<Outcome, CliError> {
    let spec = config.verify.clone().unwrap_or_else(|| crate::config::VerifySpec { suites: vec![], samples: Default::default() });
    if let Some(bad) = spec.suites.iter().find(|s| !SUITES.contains(&s.as_str())) {
        return Err(CliError::Config(format!("unknown suite `{bad}` (known: {})", SUITES.join(", "))));
    }
    let wants = |name: &str| spec.suites.iter().any(|s| s == name);
    let needs_rows = wants("fundamental-inequality") || wants("ladder-monotonicity");
    let needs_field = wants("fundamental-inequality") || wants("subaverage");

    let field = if needs_field {
        config.check_points()?;
        Some(sup_field(&config.scenario()?, &config.oracle_grid.unwrap_or_default())?)
    } else {
        None
    };
    let rows: Vec<PointRow> = if needs_rows {
        config.check_points()?;
        let sc = config.scenario()?;
        config
            .points
            .par_iter()
            .map(|p| {
                let r = envelope_at(p, &sc, &config.budget).map_err(envelope_error)?;
                Ok(row(r, field.as_ref().and_then(|f| f.value_at(p))))
            })
            .collect::<Result<_, CliError>>()?
    } else {
        Vec::new()
    };

    let mut suites = Vec::new();
    for name in &spec.suites {
        let s = match name.as_str() {
            "riesz-identity" => riesz_identity(config.seed, spec.samples.riesz_identity),
            "jensen" => jensen(config.seed, spec.samples.jensen),
            "parseval" => parseval(config.seed, spec.samples.parseval),
            "fundamental-inequality" => fundamental_inequality(&rows),
            "subaverage" => {
                let f = field.as_ref().expect("field computed for subaverage");
                let rep = check_subaverage(f, &config.scenario()?, spec.samples.subaverage, config.seed)
                    .map_err(crate::commands::oracle_error)?;
                SuiteSummary {
                    name: name.clone(),
                    samples: rep.tested,
                    failures: rep.violations,
                    max_residual: Some((-rep.worst_margin).max(0.0)),
                    tolerance: Some(rep.tolerance),
                    passed: rep.violations == 0 && rep.tested == rep.trials,
                }
            }
            _ => ladder_monotonicity(&rows),
        };
        suites.push(s);
    }

    let mut report = RunReport::new("verify", config);
    let tables = vec![("verify.csv", suites_csv(&suites)?)];
    report.suites = suites;
    report.rows = rows;
    Ok(Outcome { report, tables })
}
