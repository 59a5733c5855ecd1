//! Relative extremal functions and ω-polynomial-hull membership.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::disc::{poisson_functional, DiscParams};
use crate::domain::{contains, CPoint, Domain, C64};
use crate::envelope::{envelope_search, EnvelopeError, EnvelopeResult, LadderControl, OptBudget, Scenario};
use crate::ext::ExtReal;
use crate::math::{cis, modulus, TAU};
use crate::obstacle::{IndicatorSet, Obstacle};
use crate::oracle::{sup_side_1d, sup_side_toric, GridField, GridGeometry, OracleError};

/// Separation must beat the sampled supremum on K by this much.
pub const SEPARATION_MARGIN: f64 = 1e-9;

/// Compact sets K with exact max-modulus distance functions.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)
)]
pub enum CompactSpec {
    /// Closed polydisc `{ |z_i - c_i| ≤ r }`.
    ClosedBall { center: CPoint, radius: f64 },
    /// `{ |z - c| = r }` in the plane.
    Circle { center: C64, radius: f64 },
    FinitePointSet { points: Vec<CPoint> },
    /// `{ |z_i - c_i| = r_i for all i }`.
    CircleProduct { center: Vec<C64>, radii: Vec<f64> },
}

impl CompactSpec {
    pub fn dim(&self) -> usize {
        match self {
            CompactSpec::ClosedBall { center, .. } => center.dim(),
            CompactSpec::Circle { .. } => 1,
            CompactSpec::FinitePointSet { points } => points.first().map_or(0, |p| p.dim()),
            CompactSpec::CircleProduct { radii, .. } => radii.len(),
        }
    }

    pub fn validate(&self, dim: usize) -> Result<(), &'static str> {
        let pos = |r: f64| r.is_finite() && r > 0.0;
        let ok = match self {
            CompactSpec::ClosedBall { radius, .. } => radius.is_finite() && *radius >= 0.0,
            CompactSpec::Circle { radius, .. } => pos(*radius),
            CompactSpec::FinitePointSet { points } => !points.is_empty() && points.iter().all(|p| p.dim() == dim),
            CompactSpec::CircleProduct { center, radii } => {
                center.len() == radii.len() && radii.iter().all(|r| pos(*r))
            }
        };
        if !ok {
            return Err("compact set parameters are invalid");
        }
        if self.dim() != dim {
            return Err("compact set dimension differs from the domain");
        }
        Ok(())
    }

    /// Max-modulus distance from `p` to K.
    pub fn distance(&self, p: &CPoint) -> f64 {
        let z = p.coords();
        match self {
            CompactSpec::ClosedBall { center, radius } => z
                .iter()
                .zip(center.coords())
                .map(|(a, c)| (modulus(*a - *c) - radius).max(0.0))
                .fold(0.0, f64::max),
            CompactSpec::Circle { center, radius } => (modulus(z[0] - center) - radius).abs(),
            CompactSpec::FinitePointSet { points } => {
                points.iter().map(|q| q.distance(p)).fold(f64::INFINITY, f64::min)
            }
            CompactSpec::CircleProduct { center, radii } => z
                .iter()
                .zip(center)
                .zip(radii)
                .map(|((a, c), r)| (modulus(*a - *c) - r).abs())
                .fold(0.0, f64::max),
        }
    }

    pub fn is_torus_invariant(&self) -> bool {
        let zero = |c: &C64| c.re == 0.0 && c.im == 0.0;
        match self {
            CompactSpec::ClosedBall { center, .. } => center.coords().iter().all(zero),
            CompactSpec::Circle { center, .. } => zero(center),
            CompactSpec::FinitePointSet { .. } => false,
            CompactSpec::CircleProduct { center, .. } => center.iter().all(zero),
        }
    }

    /// A finite net of K together with its covering radius (max-modulus).
    pub fn sample_net(&self, per_circle: usize) -> (Vec<CPoint>, f64) {
        let m = per_circle.max(8);
        let ring = |c: C64, r: f64| -> Vec<C64> { (0..m).map(|k| c + cis(TAU * k as f64 / m as f64) * r).collect() };
        let chord = |r: f64| r * TAU / m as f64 * 0.5;
        match self {
            CompactSpec::Circle { center, radius } => {
                (ring(*center, *radius).into_iter().map(CPoint::one).collect(), chord(*radius))
            }
            CompactSpec::FinitePointSet { points } => (points.clone(), 0.0),
            CompactSpec::ClosedBall { center, radius } => {
                // Concentric rings per coordinate; a ball's sup of the catalog
                // separators is attained on its distinguished boundary.
                let rings: Vec<Vec<C64>> = center.coords().iter().map(|c| ring(*c, *radius)).collect();
                (product(&rings), chord(*radius))
            }
            CompactSpec::CircleProduct { center, radii } => {
                let rings: Vec<Vec<C64>> = center.iter().zip(radii).map(|(c, r)| ring(*c, *r)).collect();
                (product(&rings), radii.iter().map(|r| chord(*r)).fold(0.0, f64::max))
            }
        }
    }
}

fn product(rings: &[Vec<C64>]) -> Vec<CPoint> {
    match rings {
        [a] => a.iter().map(|z| CPoint::one(*z)).collect(),
        [a, b] => a.iter().flat_map(|z| b.iter().map(move |w| CPoint::two(*z, *w))).collect(),
        _ => Vec::new(),
    }
}

/// Disc side of the relative extremal function `h_{E,Ω,ω}(x)`: the envelope of the
/// indicator obstacle (0 on E, 1 off E).
pub fn relative_extremal_disc(
    x: &CPoint,
    e: &Domain,
    scenario: &Scenario,
    budget: &OptBudget,
) -> Result<EnvelopeResult, EnvelopeError> {
    let sc = scenario.with_obstacle(Obstacle::indicator_complement(e.clone()));
    envelope_search(x, &sc, budget, LadderControl { seek: Some(e), ..LadderControl::default() })
}

/// Grid side of the relative extremal function.
pub fn relative_extremal_oracle(
    scenario: &Scenario,
    e: &Domain,
    geometry: &GridGeometry,
) -> Result<GridField, OracleError> {
    let sc = scenario.with_obstacle(Obstacle::indicator_complement(e.clone()));
    if sc.dim() == 1 && sc.domain.planar_bounds().is_some() && !matches!(sc.domain, Domain::LogBox { .. }) {
        sup_side_1d(&sc, geometry)
    } else {
        sup_side_toric(&sc, geometry)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "kebab-case"))]
pub enum HullVerdict {
    Member,
    NonMember,
    Inconclusive,
}

/// Outcome of one `(radius, ε)` rung of the disc criterion.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HullRung {
    pub radius: f64,
    pub epsilon: f64,
    /// Best `-R_{f*ω}(0) + σ(T \ f⁻¹(U))` found.
    pub value: ExtReal,
    pub certified: bool,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "kind", rename_all = "kebab-case")
)]
pub enum HullCertificate {
    Disc { disc: DiscParams, radius: f64, epsilon: f64, value: f64 },
    Separator { function: String, value_at_x: f64, sup_on_k: f64 },
    BestValues,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HullDecision {
    pub x: CPoint,
    pub verdict: HullVerdict,
    pub certificate: HullCertificate,
    pub rungs: Vec<HullRung>,
}

struct Separator {
    name: String,
    lipschitz: f64,
    eval: fn(&CPoint, &Aux) -> f64,
}

struct Aux {
    center: [C64; 2],
    smooth: f64,
}

fn smooth_correction(p: &CPoint, aux: &Aux) -> f64 {
    aux.smooth * p.coords().iter().map(|z| z.norm_sqr()).sum::<f64>()
}

fn fmt_c(c: C64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else {
        format!("({}{:+}i)", c.re, c.im)
    }
}

/// Catalog `u = v - c|z|²` with `v` plurisubharmonic, so `u + ψ` is plurisubharmonic
/// for `ψ = Σ λ_j log|g_j| + c|z|²`.
fn separators(k: &CompactSpec, dim: usize, smooth: f64, reach: f64) -> (Vec<Separator>, Aux) {
    let center = match k {
        CompactSpec::ClosedBall { center, .. } => [center.coords()[0], center.coords().get(1).copied().unwrap_or_default()],
        CompactSpec::Circle { center, .. } => [*center, C64::new(0.0, 0.0)],
        CompactSpec::CircleProduct { center, .. } => [center[0], center.get(1).copied().unwrap_or_default()],
        CompactSpec::FinitePointSet { .. } => [C64::new(0.0, 0.0); 2],
    };
    let aux = Aux { center, smooth };
    let sl = 2.0 * smooth * reach * dim as f64;
    let mut out = Vec::new();
    let var = |i: usize| if dim == 1 { String::from("z") } else { format!("z_{}", i + 1) };
    let suffix = if smooth > 0.0 { format!(" - {}|z|^2", smooth) } else { String::new() };
    out.push(Separator { name: format!("|{}|{}", var(0), suffix), lipschitz: 1.0 + sl, eval: |p, a| modulus(p.coords()[0]) - smooth_correction(p, a) });
    if dim == 2 {
        out.push(Separator { name: format!("|{}|{}", var(1), suffix), lipschitz: 1.0 + sl, eval: |p, a| modulus(p.coords()[1]) - smooth_correction(p, a) });
        out.push(Separator { name: format!("|z_1 + z_2|{}", suffix), lipschitz: 2.0 + sl, eval: |p, a| modulus(p.coords()[0] + p.coords()[1]) - smooth_correction(p, a) });
        out.push(Separator { name: format!("|z_1 - z_2|{}", suffix), lipschitz: 2.0 + sl, eval: |p, a| modulus(p.coords()[0] - p.coords()[1]) - smooth_correction(p, a) });
    }
    if center.iter().any(|c| c.re != 0.0 || c.im != 0.0) {
        out.push(Separator {
            name: format!("|{} - {}|{}", var(0), fmt_c(center[0]), suffix),
            lipschitz: 1.0 + sl,
            eval: |p, a| modulus(p.coords()[0] - a.center[0]) - smooth_correction(p, a),
        });
        if dim == 2 {
            out.push(Separator {
                name: format!("|{} - {}|{}", var(1), fmt_c(center[1]), suffix),
                lipschitz: 1.0 + sl,
                eval: |p, a| modulus(p.coords()[1] - a.center[1]) - smooth_correction(p, a),
            });
        }
    }
    if smooth > 0.0 {
        out.push(Separator { name: format!("-{}|z|^2", smooth), lipschitz: sl, eval: |p, a| -smooth_correction(p, a) });
    }
    (out, aux)
}

/// ω-polynomial-hull membership of `x` relative to K.
///
/// Non-membership needs an explicit catalog separator `u(x) > sup_K u`; membership
/// needs, for every `(r, ε)` rung, a disc centered at `x` with
/// `-R_{f*ω}(0) + σ(T \ f⁻¹(U_r)) < ε`, where `U_r = { dist(·, K) < r }`. Anything else
/// is inconclusive.
pub fn hull_membership(
    x: &CPoint,
    k: &CompactSpec,
    scenario: &Scenario,
    radii: &[f64],
    epsilons: &[f64],
    budget: &OptBudget,
) -> Result<HullDecision, EnvelopeError> {
    let dim = scenario.dim();
    k.validate(dim).map_err(|e| EnvelopeError::Scenario(crate::envelope::ScenarioError::Obstacle(e)))?;
    if x.dim() != dim {
        return Err(EnvelopeError::Dimension { got: x.dim(), want: dim });
    }
    if scenario.potential.is_singular(x) {
        return Err(EnvelopeError::SingularPoint);
    }
    if !contains(&scenario.domain, x, budget.margin) {
        return Err(EnvelopeError::OutsideDomain);
    }

    if k.distance(x) == 0.0 {
        return Ok(HullDecision {
            x: *x,
            verdict: HullVerdict::Member,
            certificate: HullCertificate::Disc {
                disc: DiscParams::constant(*x),
                radius: radii.last().copied().unwrap_or(0.0),
                epsilon: epsilons.last().copied().unwrap_or(0.0),
                value: 0.0,
            },
            rungs: radii
                .iter()
                .flat_map(|r| epsilons.iter().map(move |e| HullRung { radius: *r, epsilon: *e, value: ExtReal::ZERO, certified: true }))
                .collect(),
        });
    }

    let (net, cover) = k.sample_net(4096);
    let reach = net.iter().chain(core::iter::once(x)).flat_map(|p| p.coords().iter().map(|z| modulus(*z))).fold(0.0, f64::max) + cover;
    let (cands, aux) = separators(k, dim, scenario.potential.smooth.coefficient(), reach);
    for s in &cands {
        let ux = (s.eval)(x, &aux);
        let sup = net.iter().map(|p| (s.eval)(p, &aux)).fold(f64::NEG_INFINITY, f64::max) + s.lipschitz * cover;
        if ux > sup + SEPARATION_MARGIN {
            return Ok(HullDecision {
                x: *x,
                verdict: HullVerdict::NonMember,
                certificate: HullCertificate::Separator { function: s.name.clone(), value_at_x: ux, sup_on_k: sup },
                rungs: Vec::new(),
            });
        }
    }

    let eps_min = epsilons.iter().copied().fold(f64::INFINITY, f64::min);
    let mut per_radius: Vec<(f64, Scenario, EnvelopeResult)> = Vec::with_capacity(radii.len());
    let mut warm: Option<DiscParams> = None;
    for r in radii {
        let ob = Obstacle::IndicatorComplement { set: IndicatorSet::Neighborhood { compact: k.clone(), radius: *r } };
        let sc = scenario.with_obstacle(ob);
        let control = LadderControl { target: Some(eps_min), warm: warm.as_ref(), guide: Some(k), seek: None };
        let res = envelope_search(x, &sc, budget, control)?;
        warm = Some(res.best_disc.clone());
        per_radius.push((*r, sc, res));
    }

    // Discs found for smaller neighbourhoods are admissible for larger ones, which
    // makes the recorded values monotone in the radius.
    let mut best: Vec<(f64, DiscParams)> = Vec::with_capacity(per_radius.len());
    for (i, (_, sc, res)) in per_radius.iter().enumerate() {
        let mut b = (res.value.finite().unwrap_or(f64::INFINITY), res.best_disc.clone());
        for (_, _, other) in &per_radius[i + 1..] {
            if let Ok(ExtReal::Finite(v)) = poisson_functional(&other.best_disc, &sc.potential, &sc.obstacle, &sc.quadrature) {
                if v < b.0 {
                    b = (v, other.best_disc.clone());
                }
            }
        }
        best.push(b);
    }

    let mut rungs = Vec::new();
    for ((r, _, _), (v, _)) in per_radius.iter().zip(&best) {
        for e in epsilons {
            rungs.push(HullRung { radius: *r, epsilon: *e, value: ExtReal::from_f64(*v), certified: *v < *e });
        }
    }
    let all = !rungs.is_empty() && rungs.iter().all(|r| r.certified);
    if all {
        let (v, disc) = best.last().cloned().expect("at least one radius");
        let r = *radii.last().expect("at least one radius");
        return Ok(HullDecision {
            x: *x,
            verdict: HullVerdict::Member,
            certificate: HullCertificate::Disc { disc, radius: r, epsilon: eps_min, value: v },
            rungs,
        });
    }
    Ok(HullDecision { x: *x, verdict: HullVerdict::Inconclusive, certificate: HullCertificate::BestValues, rungs })
}

/// Re-evaluates a hull certificate disc with a doubled boundary rule.
pub fn replay_certificate(
    disc: &DiscParams,
    k: &CompactSpec,
    radius: f64,
    scenario: &Scenario,
) -> Result<ExtReal, crate::disc::DiscError> {
    let ob = Obstacle::IndicatorComplement { set: IndicatorSet::Neighborhood { compact: k.clone(), radius } };
    poisson_functional(disc, &scenario.potential, &ob, &scenario.quadrature.refined())
}
