//! The infimum side: `EH(x) = inf { H(f) : f ∈ A_Ω, f(0) = x }` by multistart
//! simplex search over polynomial discs with a degree ladder.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::disc::{disc_in_domain, eval_disc, poisson_unshifted, DiscParams, Quadrature};
use crate::domain::{contains, CPoint, Domain};
use crate::ext::ExtReal;
use crate::extremal::CompactSpec;
use crate::math::{cis, sqrt, TAU};
use crate::obstacle::Obstacle;
use crate::potential::PotentialSpec;
use crate::rng::{complex_in_disc, task_rng};
use crate::search::{local_search, SearchOptions};

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default, deny_unknown_fields))]
pub struct OptBudget {
    pub max_degree: usize,
    pub multistarts: usize,
    pub max_evals_per_start: usize,
    pub init_scale: f64,
    pub margin: f64,
    pub floor: f64,
    pub seed: u64,
}

impl Default for OptBudget {
    fn default() -> Self {
        OptBudget {
            max_degree: 8,
            multistarts: 32,
            max_evals_per_start: 1500,
            init_scale: 0.5,
            margin: 1e-3,
            floor: -1e4,
            seed: 0,
        }
    }
}

impl OptBudget {
    pub fn validate(&self) -> Result<(), &'static str> {
        if self.multistarts == 0 {
            return Err("multistarts must be at least 1");
        }
        if self.max_evals_per_start == 0 {
            return Err("max_evals_per_start must be positive");
        }
        if !(self.init_scale.is_finite() && self.init_scale > 0.0) {
            return Err("init_scale must be positive");
        }
        if !(self.margin.is_finite() && self.margin > 0.0) {
            return Err("margin must be positive");
        }
        if !(self.floor <= -1e4) {
            return Err("floor must be at most -1e4");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error("invalid domain: {0}")]
    Domain(&'static str),
    #[error("invalid potential: {0}")]
    Potential(&'static str),
    #[error("invalid obstacle: {0}")]
    Obstacle(&'static str),
}

/// Domain, current (through its global potential), obstacle and boundary quadrature.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Scenario {
    pub domain: Domain,
    pub potential: PotentialSpec,
    pub obstacle: Obstacle,
    #[cfg_attr(feature = "serde", serde(default))]
    pub quadrature: Quadrature,
}

impl Scenario {
    pub fn new(
        domain: Domain,
        potential: PotentialSpec,
        obstacle: Obstacle,
        quadrature: Quadrature,
    ) -> Result<Scenario, ScenarioError> {
        let sc = Scenario { domain, potential, obstacle, quadrature };
        sc.validate()?;
        Ok(sc)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.domain.validate().map_err(ScenarioError::Domain)?;
        let n = self.domain.dim();
        self.potential.validate(n).map_err(ScenarioError::Potential)?;
        self.obstacle.validate(n, &self.potential).map_err(ScenarioError::Obstacle)
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn with_obstacle(&self, obstacle: Obstacle) -> Scenario {
        Scenario { obstacle, ..self.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum EnvelopeError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("invalid budget: {0}")]
    Budget(&'static str),
    #[error("point has dimension {got}, domain has dimension {want}")]
    Dimension { got: usize, want: usize },
    #[error("point is not inside the domain with the required margin")]
    OutsideDomain,
    #[error("point in singular set")]
    SingularPoint,
    #[error("point is not in the singular set")]
    NotSingular,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LadderRung {
    pub degree: usize,
    /// Best value over degrees `0..=degree`.
    pub value: ExtReal,
    pub evaluations: usize,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnvelopeResult {
    pub x: CPoint,
    pub value: ExtReal,
    pub best_disc: DiscParams,
    pub ladder: Vec<LadderRung>,
    pub diverged: bool,
}

impl EnvelopeResult {
    pub fn evaluations(&self) -> usize {
        self.ladder.iter().map(|r| r.evaluations).sum()
    }
}

/// Ladder controls beyond the budget, used by the hull search.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct LadderControl<'a> {
    /// Stop as soon as a disc with value below this is found.
    pub target: Option<f64>,
    /// Extra warm start tried first at every degree.
    pub warm: Option<&'a DiscParams>,
    /// Steer the boundary of the disc toward this set.
    pub guide: Option<&'a CompactSpec>,
    /// Add the distance from f(T) to this set, which vanishes once f(T) meets it.
    pub seek: Option<&'a Domain>,
}

/// Infimum of the Poisson functional over discs centered at `x` (see module docs).
///
/// A top-level shift of the obstacle is added after the search, so shifting φ by `c`
/// shifts the result by exactly `c`.
pub fn envelope_at(x: &CPoint, scenario: &Scenario, budget: &OptBudget) -> Result<EnvelopeResult, EnvelopeError> {
    envelope_search(x, scenario, budget, LadderControl::default())
}

fn check_point(x: &CPoint, scenario: &Scenario, budget: &OptBudget) -> Result<(), EnvelopeError> {
    scenario.validate()?;
    budget.validate().map_err(EnvelopeError::Budget)?;
    if x.dim() != scenario.dim() {
        return Err(EnvelopeError::Dimension { got: x.dim(), want: scenario.dim() });
    }
    if scenario.potential.is_singular(x) {
        return Err(EnvelopeError::SingularPoint);
    }
    if !contains(&scenario.domain, x, budget.margin) {
        return Err(EnvelopeError::OutsideDomain);
    }
    Ok(())
}

struct Candidate {
    params: Vec<f64>,
    value: f64,
}

/// Lower value wins; among equal values the lexicographically smaller modulus sequence.
fn better(a: &Candidate, b: &Candidate) -> bool {
    match a.value.total_cmp(&b.value) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => moduli(&a.params).lt(moduli(&b.params)),
    }
}

fn moduli(params: &[f64]) -> impl Iterator<Item = f64> + '_ {
    params.chunks_exact(2).map(|p| libm::hypot(p[0], p[1]))
}

pub(crate) fn envelope_search(
    x: &CPoint,
    scenario: &Scenario,
    budget: &OptBudget,
    control: LadderControl<'_>,
) -> Result<EnvelopeResult, EnvelopeError> {
    check_point(x, scenario, budget)?;
    let (base, shift) = scenario.obstacle.split_shift();
    let n = x.dim();
    let q = &scenario.quadrature;
    let dist = scenario.domain.boundary_distance(x).unwrap_or(1.0);

    let true_value = |f: &DiscParams| -> Option<f64> {
        if !disc_in_domain(f, &scenario.domain, budget.margin, q) {
            return None;
        }
        match poisson_unshifted(f, &scenario.potential, base, q) {
            Ok(ExtReal::Finite(v)) => Some(v),
            Ok(ExtReal::MinusInfinity) => Some(f64::NEG_INFINITY),
            _ => None,
        }
    };
    // With a guide set K the search minimizes H plus the mean distance of f(T) to K,
    // which is 0 exactly when the boundary lands in K; reported values are plain H.
    let guide_term = |f: &DiscParams| -> f64 {
        let guided = control.guide.map_or(0.0, |k| q.circle_mean(|t| k.distance(&eval_disc(f, t))));
        let sought = control.seek.map_or(0.0, |e| {
            q.nodes().iter().map(|t| e.boundary_distance(&eval_disc(f, *t)).map_or(0.0, |d| (-d).max(0.0))).fold(f64::INFINITY, f64::min)
        });
        guided + sought
    };
    let objective = |degree: usize, p: &[f64]| -> Option<f64> {
        let f = DiscParams::from_real_params(*x, degree, p);
        true_value(&f).map(|v| v + guide_term(&f))
    };
    let report = |f: &DiscParams, searched: f64| -> f64 {
        if control.guide.is_some() || control.seek.is_some() {
            true_value(f).unwrap_or(f64::INFINITY)
        } else {
            searched
        }
    };

    let evals0 = 1;
    let v0 = objective(0, &[]).unwrap_or(f64::INFINITY);
    let mut best_disc = DiscParams::constant(*x);
    let mut best_value = v0;
    let mut ladder = vec![LadderRung {
        degree: 0,
        value: ExtReal::from_f64(report(&best_disc, v0)) + shift,
        evaluations: evals0,
    }];
    let mut below_floor_run = usize::from(v0 < budget.floor);
    let mut diverged = false;
    let reached = |v: f64| control.target.is_some_and(|t| v < t);

    for degree in 1..=budget.max_degree {
        if reached(best_value) || diverged {
            break;
        }
        let dim = 2 * n * degree;
        let scale = |k: usize| budget.init_scale * dist / (k as f64 + 1.0);
        let step: Vec<f64> = (0..dim).map(|j| scale((j / 2) % degree + 1)).collect();
        let opts = SearchOptions {
            max_evals: budget.max_evals_per_start,
            step,
            floor: Some(budget.floor),
            target: control.target,
            restarts: 2,
        };

        let mut inits: Vec<Vec<f64>> = Vec::with_capacity(budget.multistarts + 1);
        if let Some(w) = control.warm {
            if w.degree() <= degree && w.center() == x {
                inits.push(w.padded(degree - w.degree()).real_params());
            }
        }
        inits.push(best_disc.padded(degree - best_disc.degree()).real_params());
        let zero = vec![0.0; dim];
        if !inits.contains(&zero) {
            inits.push(zero);
        }
        // Odd starts perturb the previous rung's best disc, even starts sample fresh.
        let anchor = best_disc.padded(degree - best_disc.degree()).real_params();
        let mut start = 0u64;
        while inits.len() < budget.multistarts {
            let mut rng = task_rng(budget.seed, degree as u64, start);
            let local = start % 2 == 1;
            start += 1;
            let mut radius = if local { [0.3, 0.1, 0.03][(start as usize / 2) % 3] } else { 1.0 };
            let mut chosen = None;
            for _ in 0..8 {
                let mut p = if local { anchor.clone() } else { vec![0.0; dim] };
                for i in 0..n {
                    for k in 1..=degree {
                        let c = complex_in_disc(&mut rng, radius * scale(k));
                        let j = 2 * (i * degree + k - 1);
                        p[j] += c.re;
                        p[j + 1] += c.im;
                    }
                }
                let f = DiscParams::from_real_params(*x, degree, &p);
                if disc_in_domain(&f, &scenario.domain, budget.margin, q) {
                    chosen = Some(p);
                    break;
                }
                radius *= 0.5;
            }
            inits.push(chosen.unwrap_or_else(|| vec![0.0; dim]));
        }
        inits.truncate(budget.multistarts);

        let mut evals = 0usize;
        let mut deg_best: Option<Candidate> = None;
        for init in &inits {
            let out = local_search(|p| objective(degree, p), init, &opts);
            evals += out.evaluations;
            let cand = Candidate { params: out.point, value: out.value };
            if deg_best.as_ref().is_none_or(|b| better(&cand, b)) {
                deg_best = Some(cand);
            }
            let v = deg_best.as_ref().map_or(f64::INFINITY, |b| b.value);
            if v < budget.floor || reached(v) {
                break;
            }
        }
        if let Some(c) = deg_best {
            if c.value < best_value {
                best_value = c.value;
                best_disc = DiscParams::from_real_params(*x, degree, &c.params);
            }
        }
        let reported = report(&best_disc, best_value);
        ladder.push(LadderRung { degree, value: ExtReal::from_f64(reported) + shift, evaluations: evals });
        below_floor_run = if best_value < budget.floor { below_floor_run + 1 } else { 0 };
        if below_floor_run >= 2 {
            diverged = true;
        }
    }

    let value = if diverged {
        ExtReal::MinusInfinity
    } else {
        ExtReal::from_f64(report(&best_disc, best_value)) + shift
    };
    Ok(EnvelopeResult { x: *x, value, best_disc, ladder, diverged })
}

/// Limsup proxy for the envelope at a point of sing(ω): the maximum of
/// [`envelope_at`] over 8 ring points at each radius. `None` when every ring point was
/// skipped (singular or outside the domain).
pub fn envelope_near_singular(
    a: &CPoint,
    scenario: &Scenario,
    budget: &OptBudget,
    radii: &[f64],
) -> Result<Vec<(f64, Option<ExtReal>)>, EnvelopeError> {
    scenario.validate()?;
    if a.dim() != scenario.dim() {
        return Err(EnvelopeError::Dimension { got: a.dim(), want: scenario.dim() });
    }
    if !scenario.potential.is_singular(a) {
        return Err(EnvelopeError::NotSingular);
    }
    let dir: [f64; 2] = if a.dim() == 1 { [1.0, 0.0] } else { [1.0 / sqrt(2.0), 1.0 / sqrt(2.0)] };
    let mut out = Vec::with_capacity(radii.len());
    for r in radii {
        let mut best: Option<ExtReal> = None;
        for k in 0..8 {
            let w = cis(TAU * k as f64 / 8.0) * *r;
            let mut p = *a;
            for (z, d) in p.coords_mut().iter_mut().zip(dir) {
                *z += w * d;
            }
            match envelope_at(&p, scenario, budget) {
                Ok(res) => best = Some(best.map_or(res.value, |b| b.max(res.value))),
                Err(EnvelopeError::SingularPoint | EnvelopeError::OutsideDomain) => {}
                Err(e) => return Err(e),
            }
        }
        out.push((*r, best));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> OptBudget {
        OptBudget { max_degree: 3, multistarts: 4, max_evals_per_start: 600, ..OptBudget::default() }
    }

    fn unit_disc(potential: PotentialSpec, obstacle: Obstacle) -> Scenario {
        Scenario::new(Domain::disc(1.0), potential, obstacle, Quadrature::new(256, 32, 32).unwrap()).unwrap()
    }

    #[test]
    fn psh_obstacle_is_its_own_envelope() {
        let sc = unit_disc(PotentialSpec::zero(), Obstacle::square_modulus(1.0, 1));
        let r = envelope_at(&CPoint::real(0.5), &sc, &quick()).unwrap();
        let v = r.value.finite().unwrap();
        assert!((v - 0.25).abs() < 2e-2, "{v}");
        assert!(v <= 0.25 + 1e-12);
        assert!(!r.diverged);
    }

    #[test]
    fn log_potential_zero_obstacle() {
        let sc = unit_disc(PotentialSpec::log_coordinate(0, 1.0), Obstacle::constant(0.0));
        let r = envelope_at(&CPoint::real(0.5), &sc, &quick()).unwrap();
        assert!(r.value.finite().unwrap().abs() < 1e-3);
    }

    #[test]
    fn ladder_is_monotone_and_value_is_its_minimum() {
        let sc = unit_disc(PotentialSpec::zero(), Obstacle::square_modulus(-1.0, 1));
        let r = envelope_at(&CPoint::real(0.5), &sc, &quick()).unwrap();
        for w in r.ladder.windows(2) {
            assert!(w[1].value <= w[0].value);
        }
        assert_eq!(r.value, r.ladder.last().unwrap().value);
        assert!(r.value.finite().unwrap() < -0.5);
    }

    #[test]
    fn preconditions() {
        let sc = unit_disc(PotentialSpec::log_coordinate(0, 1.0), Obstacle::constant(0.0));
        assert_eq!(envelope_at(&CPoint::real(0.0), &sc, &quick()), Err(EnvelopeError::SingularPoint));
        assert_eq!(envelope_at(&CPoint::real(1.5), &sc, &quick()), Err(EnvelopeError::OutsideDomain));
        let flat = unit_disc(PotentialSpec::zero(), Obstacle::constant(0.0));
        assert_eq!(
            envelope_near_singular(&CPoint::real(0.0), &flat, &quick(), &[0.1]),
            Err(EnvelopeError::NotSingular)
        );
        assert_eq!(envelope_near_singular(&CPoint::real(0.0), &sc, &quick(), &[]), Ok(vec![]));
    }

    #[test]
    fn near_singular_ring_values_vanish() {
        let sc = unit_disc(PotentialSpec::log_coordinate(0, 1.0), Obstacle::constant(0.0));
        let b = OptBudget { max_degree: 1, multistarts: 2, max_evals_per_start: 200, ..OptBudget::default() };
        let out = envelope_near_singular(&CPoint::real(0.0), &sc, &b, &[0.2, 0.1]).unwrap();
        assert_eq!(out.len(), 2);
        for (_, v) in out {
            assert!(v.unwrap().finite().unwrap().abs() < 1e-3, "{v:?}");
        }
    }

    #[test]
    fn shift_is_exact() {
        let sc = unit_disc(PotentialSpec::zero(), Obstacle::square_modulus(-1.0, 1));
        let b = quick();
        let x = CPoint::real(0.3);
        let a = envelope_at(&x, &sc, &b).unwrap();
        let s = envelope_at(&x, &sc.with_obstacle(sc.obstacle.clone().shifted(0.7)), &b).unwrap();
        assert_eq!(s.value, a.value + 0.7);
        assert_eq!(s.best_disc, a.best_disc);
    }

    #[test]
    fn empty_family_diverges() {
        let sc = Scenario::new(
            Domain::FullSpace { dim: 1 },
            PotentialSpec::zero(),
            Obstacle::square_modulus(-1.0, 1),
            Quadrature::new(64, 32, 32).unwrap(),
        )
        .unwrap();
        let r = envelope_at(&CPoint::real(0.5), &sc, &quick()).unwrap();
        assert!(r.diverged);
        assert_eq!(r.value, ExtReal::MinusInfinity);
        let below: Vec<f64> = r.ladder.iter().filter_map(|l| l.value.finite()).filter(|v| *v < -1e4).collect();
        assert!(below.len() >= 2);
        assert!(below.windows(2).all(|w| w[1] < w[0]));
    }
}
