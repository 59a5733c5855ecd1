//! Closed analytic discs, boundary quadrature, pullback measures, Riesz potentials and
//! the Poisson disc functional `H(f) = -R_{f*ω}(0) + ∫_T φ∘f dσ`.

use alloc::vec;
use alloc::vec::Vec;

use crate::domain::{contains, green_disc, CPoint, Domain, C64};
use crate::ext::ExtReal;
use crate::math::{cis, cos, ln, modulus, TAU};
use crate::obstacle::Obstacle;
use crate::potential::{eval_potential, PotentialSpec};
use crate::roots::{polynomial_roots, RootError};

/// Roots closer than this to the unit circle are flagged as grazing.
pub const GRAZING_BAND: f64 = 1e-9;
/// Roots closer than this to each other are merged into one atom.
const MERGE_DISTANCE: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum DiscError {
    /// The disc center lies in sing(ω): `f*ω` is `+∞` or undefined and the disc can
    /// never compete for the infimum.
    #[error("disc is inadmissible: its center lies in the singular set")]
    Inadmissible,
    #[error("{excluded} of {nodes} boundary nodes hit the singular set (at most 1% allowed)")]
    Grazing { excluded: usize, nodes: usize },
    #[error(transparent)]
    Roots(#[from] RootError),
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum QuadratureError {
    #[error("boundary_m must be a power of two and at least 64 (got {0})")]
    BoundaryNodes(usize),
    #[error("area grid needs at least 32 nodes per direction (got {0} x {1})")]
    AreaGrid(usize, usize),
}

/// Equispaced trapezoid rule on the circle plus a polar grid for area integrals
/// (Gauss–Legendre in the radius, trapezoid in the angle).
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(try_from = "QuadratureParams", into = "QuadratureParams")
)]
pub struct Quadrature {
    boundary_m: usize,
    area_nr: usize,
    area_ntheta: usize,
    nodes: Vec<C64>,
    radial: Vec<(f64, f64)>,
}

/// The serialized form of [`Quadrature`].
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuadratureParams {
    pub boundary_m: usize,
    pub area_nr: usize,
    pub area_ntheta: usize,
}

impl Default for QuadratureParams {
    fn default() -> Self {
        QuadratureParams { boundary_m: 1024, area_nr: 64, area_ntheta: 64 }
    }
}

impl TryFrom<QuadratureParams> for Quadrature {
    type Error = QuadratureError;
    fn try_from(p: QuadratureParams) -> Result<Self, Self::Error> {
        Quadrature::new(p.boundary_m, p.area_nr, p.area_ntheta)
    }
}

impl From<Quadrature> for QuadratureParams {
    fn from(q: Quadrature) -> Self {
        q.params()
    }
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature::try_from(QuadratureParams::default()).expect("default quadrature is valid")
    }
}

impl Quadrature {
    pub fn new(boundary_m: usize, area_nr: usize, area_ntheta: usize) -> Result<Quadrature, QuadratureError> {
        if boundary_m < 64 || !boundary_m.is_power_of_two() {
            return Err(QuadratureError::BoundaryNodes(boundary_m));
        }
        if area_nr < 32 || area_ntheta < 32 {
            return Err(QuadratureError::AreaGrid(area_nr, area_ntheta));
        }
        let nodes = circle_nodes(boundary_m);
        let radial = gauss_legendre_unit(area_nr);
        Ok(Quadrature { boundary_m, area_nr, area_ntheta, nodes, radial })
    }

    pub fn params(&self) -> QuadratureParams {
        QuadratureParams {
            boundary_m: self.boundary_m,
            area_nr: self.area_nr,
            area_ntheta: self.area_ntheta,
        }
    }

    pub fn boundary_m(&self) -> usize {
        self.boundary_m
    }

    /// The boundary nodes `e^{2πik/m}`.
    pub fn nodes(&self) -> &[C64] {
        &self.nodes
    }

    /// Same rule with twice as many boundary nodes.
    pub fn refined(&self) -> Quadrature {
        Quadrature::new(self.boundary_m * 2, self.area_nr, self.area_ntheta)
            .expect("doubling keeps the rule valid")
    }

    /// Trapezoid mean of `g` over the unit circle.
    pub fn circle_mean(&self, mut g: impl FnMut(C64) -> f64) -> f64 {
        self.nodes.iter().map(|t| g(*t)).sum::<f64>() / self.boundary_m as f64
    }
}

fn circle_nodes(m: usize) -> Vec<C64> {
    // Fill one quadrant and reflect, so symmetric nodes are exactly symmetric.
    let mut nodes = vec![C64::new(0.0, 0.0); m];
    let q = m / 4;
    for k in 0..=q {
        let z = cis(TAU * k as f64 / m as f64);
        nodes[k] = z;
        if k > 0 {
            nodes[m - k] = z.conj();
        }
        if k < q {
            nodes[2 * q - k] = C64::new(-z.re, z.im);
            nodes[(2 * q + k) % m] = C64::new(-z.re, -z.im);
        }
    }
    nodes[q] = C64::new(0.0, 1.0);
    nodes[3 * q] = C64::new(0.0, -1.0);
    nodes[2 * q] = C64::new(-1.0, 0.0);
    nodes
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub(crate) fn gauss_legendre_unit(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (1.0 - x), 0.5 * w));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// A closed analytic disc `f_i(t) = center_i + Σ_{k=1..d} c_{i,k} t^k`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(try_from = "DiscJson", into = "DiscJson")
)]
pub struct DiscParams {
    center: CPoint,
    degree: usize,
    /// Row-major `n × degree`.
    coeffs: Vec<C64>,
}

#[cfg(feature = "serde")]
#[derive(serde::Serialize, serde::Deserialize)]
struct DiscJson {
    center: CPoint,
    coeffs: Vec<Vec<C64>>,
    degree: usize,
}

#[cfg(feature = "serde")]
impl TryFrom<DiscJson> for DiscParams {
    type Error = &'static str;
    fn try_from(j: DiscJson) -> Result<Self, Self::Error> {
        if j.coeffs.len() != j.center.dim() || j.coeffs.iter().any(|r| r.len() != j.degree) {
            return Err("disc needs one coefficient row of length `degree` per coordinate");
        }
        Ok(DiscParams { center: j.center, degree: j.degree, coeffs: j.coeffs.concat() })
    }
}

#[cfg(feature = "serde")]
impl From<DiscParams> for DiscJson {
    fn from(f: DiscParams) -> Self {
        let coeffs = (0..f.dim()).map(|i| f.row(i).to_vec()).collect();
        DiscJson { center: f.center, coeffs, degree: f.degree }
    }
}

impl DiscParams {
    pub fn constant(center: CPoint) -> DiscParams {
        DiscParams { center, degree: 0, coeffs: Vec::new() }
    }

    /// Builds a disc from one coefficient row per coordinate.
    pub fn new(center: CPoint, rows: &[&[C64]]) -> DiscParams {
        assert_eq!(rows.len(), center.dim(), "one coefficient row per coordinate");
        let degree = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == degree), "rows must share a degree");
        DiscParams { center, degree, coeffs: rows.concat() }
    }

    /// Interprets `params` as interleaved `(re, im)` pairs, row-major.
    pub fn from_real_params(center: CPoint, degree: usize, params: &[f64]) -> DiscParams {
        assert_eq!(params.len(), 2 * center.dim() * degree);
        let coeffs = params.chunks_exact(2).map(|p| C64::new(p[0], p[1])).collect();
        DiscParams { center, degree, coeffs }
    }

    pub fn real_params(&self) -> Vec<f64> {
        self.coeffs.iter().flat_map(|c| [c.re, c.im]).collect()
    }

    pub fn center(&self) -> &CPoint {
        &self.center
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.coeffs[i * self.degree..(i + 1) * self.degree]
    }

    /// The same map viewed as a disc of degree `degree + extra` (zero top coefficients).
    pub fn padded(&self, extra: usize) -> DiscParams {
        let d = self.degree + extra;
        let mut coeffs = Vec::with_capacity(self.dim() * d);
        for i in 0..self.dim() {
            coeffs.extend_from_slice(self.row(i));
            coeffs.extend(core::iter::repeat_n(C64::new(0.0, 0.0), extra));
        }
        DiscParams { center: self.center, degree: d, coeffs }
    }

    /// Coefficient moduli `|c_{i,1}|, …` in row-major order (tie-break key).
    pub fn modulus_sequence(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| modulus(*c)).collect()
    }

    pub fn coordinate_poly(&self, i: usize) -> crate::poly::Poly1 {
        let mut coeffs = Vec::with_capacity(self.degree + 1);
        coeffs.push(self.center.coords()[i]);
        coeffs.extend_from_slice(self.row(i));
        crate::poly::Poly1 { coeffs }
    }

    #[inline]
    fn eval_coord(&self, i: usize, t: C64) -> C64 {
        let row = self.row(i);
        let mut acc = C64::new(0.0, 0.0);
        for c in row.iter().rev() {
            acc = acc * t + c;
        }
        self.center.coords()[i] + acc * t
    }

    fn derivative_norm_sqr(&self, t: C64) -> f64 {
        (0..self.dim())
            .map(|i| {
                let row = self.row(i);
                let mut acc = C64::new(0.0, 0.0);
                for (k, c) in row.iter().enumerate().rev() {
                    acc = acc * t + c * (k as f64 + 1.0);
                }
                acc.norm_sqr()
            })
            .sum()
    }
}

/// `f(t)`, componentwise Horner.
pub fn eval_disc(f: &DiscParams, t: C64) -> CPoint {
    match f.dim() {
        1 => CPoint::one(f.eval_coord(0, t)),
        _ => CPoint::two(f.eval_coord(0, t), f.eval_coord(1, t)),
    }
}

/// `f(ρ e^{2πik/m})` stays `margin` inside `dom` for all k and ρ ∈ {1/8, …, 1}.
pub fn disc_in_domain(f: &DiscParams, dom: &Domain, margin: f64, q: &Quadrature) -> bool {
    // The outer circle is checked first: it is where almost all failures happen.
    // An inner circle is skipped when the coefficient bound already keeps it in a
    // ball around the centre that lies inside `dom`.
    (1..=8).rev().all(|j| {
        let rho = j as f64 / 8.0;
        let reach = (0..f.dim())
            .map(|i| f.row(i).iter().rev().fold(0.0, |acc, c| acc * rho + modulus(*c)) * rho)
            .fold(0.0, f64::max);
        (j < 8 && contains(dom, f.center(), margin + reach))
            || q.nodes().iter().all(|t| contains(dom, &eval_disc(f, *t * rho), margin))
    })
}

/// Atoms of `f*ω` inside the unit disc.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct PullbackAtoms {
    /// `(location, mass)` with `|location| < 1`.
    pub atoms: Vec<(C64, f64)>,
    /// Some active `g_j ∘ f` vanishes identically, so `f*ω = +∞`.
    pub degenerate: bool,
    /// Some root lies within [`GRAZING_BAND`] of the unit circle.
    pub grazing: bool,
    /// Smallest `||root| - 1|` over all roots, inside or outside (`+∞` without roots).
    pub boundary_gap: f64,
}

impl PullbackAtoms {
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }
}

/// Discrete part of `f*ω`: unit mass per simple zero of `g_j ∘ f` in the disc, times `λ_j`.
pub fn pullback_atoms(f: &DiscParams, spec: &PotentialSpec) -> Result<PullbackAtoms, DiscError> {
    let mut out = PullbackAtoms { boundary_gap: f64::INFINITY, ..PullbackAtoms::default() };
    for atom in spec.active_atoms() {
        let (composed, bound) = atom.poly.compose(f);
        if composed.max_abs_coeff() <= 1e-13 * bound {
            out.degenerate = true;
            continue;
        }
        for root in polynomial_roots(&composed.coeffs)? {
            let r = modulus(root);
            out.boundary_gap = out.boundary_gap.min((r - 1.0).abs());
            if (r - 1.0).abs() < GRAZING_BAND {
                out.grazing = true;
            }
            if r < 1.0 {
                push_merged(&mut out.atoms, root, atom.weight);
            }
        }
    }
    if out.degenerate {
        out.atoms.clear();
    }
    Ok(out)
}

fn push_merged(atoms: &mut Vec<(C64, f64)>, root: C64, mass: f64) {
    if let Some(a) = atoms.iter_mut().find(|a| modulus(a.0 - root) < MERGE_DISTANCE) {
        let total = a.1 + mass;
        a.0 = (a.0 * a.1 + root * mass) / total;
        a.1 = total;
    } else {
        atoms.push((root, mass));
    }
}

/// Blaschke condition `∫ (1 - |ζ|) d(f*ω) < ∞`; fails only for a degenerate pullback.
pub fn blaschke_finite(pa: &PullbackAtoms) -> bool {
    !pa.degenerate
}

/// `R_{f*ω}(0) = ∫_D G_D(0, ·) d(f*ω)` computed from the measure itself: Green
/// weights of the atoms plus a polar-grid integral of the smooth part's Laplacian.
pub fn riesz_direct(f: &DiscParams, spec: &PotentialSpec, q: &Quadrature) -> Result<ExtReal, DiscError> {
    if eval_potential(spec, f.center()).is_minus_infinity() {
        return Err(DiscError::Inadmissible);
    }
    let pa = pullback_atoms(f, spec)?;
    if !blaschke_finite(&pa) {
        return Ok(ExtReal::MinusInfinity);
    }
    let origin = C64::new(0.0, 0.0);
    let mut total = ExtReal::ZERO;
    for (t, m) in &pa.atoms {
        let g = green_disc(origin, *t).expect("atoms lie in the open disc");
        total = total + match g {
            ExtReal::Finite(v) => ExtReal::Finite(m * v),
            other => other,
        };
    }
    let c = spec.smooth.coefficient();
    if c > 0.0 && f.degree() > 0 {
        // (1/2π) ∬ log|t| · 4c Σ|f_i'(t)|² dA  =  ∫_0^1 r log r · mean_θ(4c Σ|f_i'|²) dr
        let ntheta = q.area_ntheta;
        let angles: Vec<C64> = (0..ntheta).map(|k| cis(TAU * k as f64 / ntheta as f64)).collect();
        let mut area = 0.0;
        for (r, w) in &q.radial {
            let mean = angles.iter().map(|a| f.derivative_norm_sqr(*a * *r)).sum::<f64>() / ntheta as f64;
            area += w * r * ln(*r) * 4.0 * c * mean;
        }
        total = total + area;
    }
    Ok(total)
}

/// Result of a boundary quadrature that skipped nodes on sing(ω).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RieszEstimate {
    pub value: ExtReal,
    pub excluded_nodes: usize,
}

fn check_excluded(excluded: usize, m: usize) -> Result<(), DiscError> {
    if 100 * excluded > m {
        Err(DiscError::Grazing { excluded, nodes: m })
    } else {
        Ok(())
    }
}

/// `R_{f*ω}(0) = ψ(f(0)) - ∫_T ψ∘f dσ` (Riesz representation of the global potential).
pub fn riesz_fast(f: &DiscParams, spec: &PotentialSpec, q: &Quadrature) -> Result<RieszEstimate, DiscError> {
    let center = match eval_potential(spec, f.center()) {
        ExtReal::Finite(v) => v,
        _ => return Err(DiscError::Inadmissible),
    };
    let (mean, excluded) = boundary_mean(q, |t| eval_potential(spec, &eval_disc(f, t)))?;
    Ok(RieszEstimate { value: ExtReal::Finite(center) + (-mean), excluded_nodes: excluded })
}

/// Trapezoid mean over the nodes where `g` is not `-∞`.
fn boundary_mean(q: &Quadrature, mut g: impl FnMut(C64) -> ExtReal) -> Result<(ExtReal, usize), DiscError> {
    let mut sum = PairwiseSum::default();
    let mut excluded = 0;
    let mut plus_inf = false;
    for t in q.nodes() {
        match g(*t) {
            ExtReal::Finite(v) => sum.push(v),
            ExtReal::MinusInfinity => excluded += 1,
            ExtReal::PlusInfinity => plus_inf = true,
        }
    }
    let m = q.boundary_m();
    check_excluded(excluded, m)?;
    if plus_inf {
        return Ok((ExtReal::PlusInfinity, excluded));
    }
    Ok((ExtReal::from_f64(sum.total() / (m - excluded) as f64), excluded))
}

/// Streaming pairwise summation: error O(log m · ε), and exact for `2^k` equal terms.
struct PairwiseSum {
    levels: [f64; 64],
    count: u64,
}

impl Default for PairwiseSum {
    fn default() -> Self {
        PairwiseSum { levels: [0.0; 64], count: 0 }
    }
}

impl PairwiseSum {
    fn push(&mut self, v: f64) {
        let mut carry = v;
        let mut level = 0;
        let mut c = self.count;
        while c & 1 == 1 {
            carry += self.levels[level];
            level += 1;
            c >>= 1;
        }
        self.levels[level] = carry;
        self.count += 1;
    }

    fn total(&self) -> f64 {
        (0..64).rev().filter(|l| self.count >> l & 1 == 1).map(|l| self.levels[l]).sum()
    }
}

/// `-R_{f*ω}(0)` without boundary quadrature: `-Σ m_k log|t_k|` over the pullback
/// atoms plus `c Σ_{i,k} |c_{i,k}|²` for the smooth part (Parseval).
fn minus_riesz_exact(f: &DiscParams, spec: &PotentialSpec) -> Result<f64, DiscError> {
    let mut total = 0.0;
    if spec.has_singular_set() {
        let pa = pullback_atoms(f, spec)?;
        if pa.degenerate {
            return Err(DiscError::Inadmissible);
        }
        for (t, m) in &pa.atoms {
            let r = modulus(*t);
            if r == 0.0 {
                return Err(DiscError::Inadmissible);
            }
            total -= m * ln(r);
        }
    }
    let c = spec.smooth.coefficient();
    if c > 0.0 {
        total += c * f.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>();
    }
    Ok(total)
}

/// `H_{ω,φ}(f) = -R_{f*ω}(0) + ∫_T φ∘f dσ`. A top-level shift `φ = φ₀ + c` is added last.
///
/// The Riesz term comes from the pullback atoms and Parseval, so boundary quadrature
/// only touches φ; for the negated-potential obstacle `φ + ψ` is constant and
/// `H = offset - ψ(f(0))` exactly.
pub fn poisson_functional(
    f: &DiscParams,
    spec: &PotentialSpec,
    ob: &Obstacle,
    q: &Quadrature,
) -> Result<ExtReal, DiscError> {
    let (base, shift) = ob.split_shift();
    Ok(poisson_unshifted(f, spec, base, q)? + shift)
}

pub(crate) fn poisson_unshifted(
    f: &DiscParams,
    spec: &PotentialSpec,
    ob: &Obstacle,
    q: &Quadrature,
) -> Result<ExtReal, DiscError> {
    let center = match eval_potential(spec, f.center()) {
        ExtReal::Finite(v) => v,
        _ => return Err(DiscError::Inadmissible),
    };
    if let Obstacle::NegatedPotentialOffset { offset, .. } = ob {
        return Ok(ExtReal::Finite(offset - center));
    }
    let minus_r = minus_riesz_exact(f, spec)?;
    let (mean, _) = boundary_mean(q, |t| crate::obstacle::eval_obstacle(ob, &eval_disc(f, t)))?;
    Ok(mean + minus_r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{ln, powi};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn affine(a: C64, b: C64) -> DiscParams {
        DiscParams::new(CPoint::one(a), &[&[b]])
    }

    fn quad(m: usize) -> Quadrature {
        Quadrature::new(m, 64, 64).unwrap()
    }

    #[test]
    fn quadrature_validation() {
        assert!(Quadrature::new(63, 32, 32).is_err());
        assert!(Quadrature::new(96, 32, 32).is_err());
        assert!(Quadrature::new(64, 31, 32).is_err());
        assert!(Quadrature::new(64, 32, 32).is_ok());
    }

    #[test]
    fn circle_nodes_are_unit_and_symmetric() {
        let q = quad(256);
        for (k, t) in q.nodes().iter().enumerate() {
            assert!((t.norm_sqr() - 1.0).abs() < 1e-15);
            let expected = cis(TAU * k as f64 / 256.0);
            assert!((t - expected).norm_sqr() < 1e-30, "node {k}");
        }
        let s: C64 = q.nodes().iter().sum();
        assert!(s.norm_sqr() < 1e-28);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let gl = gauss_legendre_unit(32);
        let total: f64 = gl.iter().map(|(_, w)| w).sum();
        assert!((total - 1.0).abs() < 1e-14);
        let m7: f64 = gl.iter().map(|(x, w)| w * powi(*x, 7)).sum();
        assert!((m7 - 0.125).abs() < 1e-14);
        // ∫_0^1 r log r dr = -1/4
        let rl: f64 = gl.iter().map(|(x, w)| w * x * ln(*x)).sum();
        assert!((rl + 0.25).abs() < 1e-5);
    }

    #[test]
    fn eval_disc_examples() {
        let f = affine(c(0.3, 0.0), c(0.5, 0.0));
        assert_eq!(eval_disc(&f, c(0.0, 0.0)), CPoint::real(0.3));
        assert_eq!(eval_disc(&f, c(1.0, 0.0)), CPoint::real(0.8));
        let sq = DiscParams::new(CPoint::real(0.0), &[&[c(0.0, 0.0), c(1.0, 0.0)]]);
        assert_eq!(eval_disc(&sq, c(0.0, 1.0)), CPoint::real(-1.0));
    }

    #[test]
    fn padding_preserves_values_bitwise() {
        let f = DiscParams::new(CPoint::one(c(0.1, -0.2)), &[&[c(0.3, 0.1), c(-0.05, 0.2)]]);
        let g = f.padded(3);
        for t in quad(64).nodes() {
            assert_eq!(eval_disc(&f, *t), eval_disc(&g, *t));
        }
    }

    #[test]
    fn disc_in_domain_examples() {
        let q = quad(256);
        let unit = Domain::disc(1.0);
        assert!(disc_in_domain(&DiscParams::constant(CPoint::real(0.5)), &unit, 0.01, &q));
        assert!(!disc_in_domain(&affine(c(0.3, 0.0), c(0.8, 0.0)), &unit, 0.01, &q));
        assert!(disc_in_domain(&affine(c(0.0, 0.0), c(0.5, 0.0)), &unit, 0.4, &q));
        // an annulus rejects a disc that sweeps through the hole
        assert!(!disc_in_domain(&affine(c(0.5, 0.0), c(0.4, 0.0)), &Domain::annulus(0.2, 1.0), 0.01, &q));
    }

    #[test]
    fn pullback_examples() {
        let psi = PotentialSpec::log_coordinate(0, 1.0);
        let pa = pullback_atoms(&affine(c(0.3, 0.0), c(0.5, 0.0)), &psi).unwrap();
        assert_eq!(pa.atoms.len(), 1);
        assert!((pa.atoms[0].0 - c(-0.6, 0.0)).norm_sqr() < 1e-28);
        assert_eq!(pa.atoms[0].1, 1.0);
        let pa = pullback_atoms(&affine(c(2.0, 0.0), c(1.0, 0.0)), &psi).unwrap();
        assert!(pa.atoms.is_empty());
        let sq = DiscParams::new(CPoint::real(0.0), &[&[c(0.0, 0.0), c(1.0, 0.0)]]);
        let pa = pullback_atoms(&sq, &psi).unwrap();
        assert_eq!(pa.atoms, vec![(c(0.0, 0.0), 2.0)]);
    }

    #[test]
    fn grazing_and_degenerate_flags() {
        let psi = PotentialSpec::log_coordinate(0, 1.0);
        let pa = pullback_atoms(&affine(c(0.5, 0.0), c(0.5, 0.0)), &psi).unwrap();
        assert!(pa.grazing);
        assert!(pa.atoms.is_empty());
        // ψ = log|z_2| and a disc inside {z_2 = 0}
        let psi2 = PotentialSpec::log_coordinate(1, 1.0);
        let f = DiscParams::new(CPoint::two(c(0.1, 0.0), c(0.0, 0.0)), &[&[c(0.2, 0.0)], &[c(0.0, 0.0)]]);
        let pa = pullback_atoms(&f, &psi2).unwrap();
        assert!(pa.degenerate);
        assert!(!blaschke_finite(&pa));
        assert!(blaschke_finite(&PullbackAtoms::default()));
        assert_eq!(riesz_direct(&f, &psi2, &quad(64)), Err(DiscError::Inadmissible));
    }

    #[test]
    fn riesz_examples() {
        let q = quad(1024);
        let psi = PotentialSpec::log_coordinate(0, 1.0);
        let f = affine(c(0.3, 0.0), c(0.5, 0.0));
        let d = riesz_direct(&f, &psi, &q).unwrap().finite().unwrap();
        assert!((d - ln(0.6)).abs() < 1e-12);
        let fast = riesz_fast(&f, &psi, &q).unwrap();
        assert!((fast.value.finite().unwrap() - ln(0.6)).abs() < 1e-9);
        assert_eq!(fast.excluded_nodes, 0);
        let g = affine(c(2.0, 0.0), c(1.0, 0.0));
        assert!(riesz_fast(&g, &psi, &q).unwrap().value.finite().unwrap().abs() < 1e-9);
        let k = DiscParams::constant(CPoint::real(0.4));
        assert_eq!(riesz_direct(&k, &psi, &q).unwrap(), ExtReal::Finite(0.0));
        assert!(riesz_fast(&k, &psi, &q).unwrap().value.finite().unwrap().abs() < 1e-15);
    }

    #[test]
    fn riesz_of_smooth_part_both_routes() {
        let q = quad(1024);
        let psi = PotentialSpec::square_modulus(0.5);
        let f = affine(c(0.0, 0.0), c(1.0, 0.0));
        let d = riesz_direct(&f, &psi, &q).unwrap().finite().unwrap();
        assert!((d + 0.5).abs() < 1e-5, "direct {d}");
        let fast = riesz_fast(&f, &psi, &q).unwrap().value.finite().unwrap();
        assert!((fast + 0.5).abs() < 1e-14);
    }

    #[test]
    fn center_in_singular_set_is_inadmissible() {
        let psi = PotentialSpec::log_coordinate(0, 1.0);
        let f = affine(c(0.0, 0.0), c(0.5, 0.0));
        let q = quad(64);
        assert_eq!(riesz_fast(&f, &psi, &q), Err(DiscError::Inadmissible));
        assert_eq!(poisson_functional(&f, &psi, &Obstacle::constant(0.0), &q), Err(DiscError::Inadmissible));
    }

    #[test]
    fn too_many_singular_boundary_nodes_refuse() {
        // ψ = log|z^4 - 1|
        let psi = PotentialSpec {
            atoms: vec![crate::potential::Atom {
                weight: 1.0,
                poly: crate::potential::Polynomial {
                    terms: vec![
                        crate::potential::Monomial { coef: c(1.0, 0.0), exps: vec![4] },
                        crate::potential::Monomial { coef: c(-1.0, 0.0), exps: vec![0] },
                    ],
                },
            }],
            smooth: crate::potential::SmoothPart::Zero,
        };
        // f(t) = t hits the 4th roots of unity, which are nodes of every power-of-two rule.
        let f = DiscParams::new(CPoint::real(0.0), &[&[c(1.0, 0.0)]]);
        let q = quad(64);
        assert_eq!(riesz_fast(&f, &psi, &q), Err(DiscError::Grazing { excluded: 4, nodes: 64 }));
        let q = quad(512);
        assert_eq!(riesz_fast(&f, &psi, &q).unwrap().excluded_nodes, 4);
    }

    #[test]
    fn poisson_examples() {
        let q = quad(1024);
        let x = CPoint::real(0.37);
        let k = DiscParams::constant(x);
        let sq = Obstacle::square_modulus(1.0, 1);
        let h = poisson_functional(&k, &PotentialSpec::zero(), &sq, &q).unwrap().finite().unwrap();
        assert!((h - 0.37 * 0.37).abs() < 1e-15);
        let f = affine(c(0.3, 0.0), c(0.5, 0.0));
        let h = poisson_functional(&f, &PotentialSpec::zero(), &sq, &q).unwrap().finite().unwrap();
        assert!((h - 0.34).abs() < 1e-14);
        let psi = PotentialSpec::log_coordinate(0, 1.0);
        let h = poisson_functional(&f, &psi, &Obstacle::constant(0.0), &q).unwrap().finite().unwrap();
        assert!((h + ln(0.6)).abs() < 1e-9);
    }

    #[test]
    fn indicator_obstacle_counts_boundary_fraction() {
        let q = quad(256);
        let ob = Obstacle::indicator_complement(Domain::disc(0.2));
        // boundary circle |z - 0.5| = 0.5 meets the disc of radius 0.2 around 0 on a short arc
        let f = affine(c(0.5, 0.0), c(0.5, 0.0));
        let h = poisson_functional(&f, &PotentialSpec::zero(), &ob, &q).unwrap().finite().unwrap();
        let inside = q.nodes().iter().filter(|t| modulus(c(0.5, 0.0) + **t * 0.5) < 0.2).count();
        assert_eq!(h, 1.0 - inside as f64 / 256.0);
        assert!(inside > 0);
    }
}
