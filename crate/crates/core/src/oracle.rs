//! The supremum side: largest ω-psh minorant of φ on a grid.
//!
//! With a global potential ψ the problem reduces to the largest subharmonic
//! (planar case) or convex-in-log-moduli (toric case) minorant `v` of `o = ψ + φ`; the
//! returned field stores `u = v - ψ`.

use alloc::vec;
use alloc::vec::Vec;

use crate::domain::{contains, CPoint, Domain, C64};
use crate::envelope::{Scenario, ScenarioError};
use crate::ext::ExtReal;
use crate::math::{ceil, cis, exp, floor, ln, modulus, TAU};
use crate::potential::eval_potential;
use crate::rng::task_rng;
use rand::Rng;

/// Grid stand-in for `-∞`.
pub const CLAMP_FLOOR: f64 = -1e6;
/// Sweep stopping tolerance on the max nodewise update.
pub const SWEEP_TOL: f64 = 1e-8;
pub const SWEEP_CAP: usize = 1_000_000;
const MAX_NODES: usize = 20_000_000;
const SNAP: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("grid spacing must be positive and leave at most {MAX_NODES} nodes")]
    Spacing,
    #[error("the planar oracle needs a bounded domain in the complex plane")]
    NotPlanar,
    #[error("the toric oracle needs a product of annuli and torus-invariant data")]
    NotTorusInvariant,
    #[error("obstacle iteration stopped after {sweeps} sweeps with residual {residual:e}")]
    NoConvergence { sweeps: usize, residual: f64 },
    #[error("field and scenario have different dimensions")]
    Dimension,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(deny_unknown_fields))]
pub struct GridGeometry {
    /// Node spacing (planar), or target spacing in log-modulus coordinates (toric).
    pub spacing: f64,
    /// Slope-grid size per axis for the toric Legendre transforms
    /// (default 8192 for n = 1 and 1024 for n = 2).
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub slope_points: Option<usize>,
}

impl GridGeometry {
    pub fn new(spacing: f64) -> GridGeometry {
        GridGeometry { spacing, slope_points: None }
    }
}

impl Default for GridGeometry {
    fn default() -> Self {
        GridGeometry::new(0.01)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridKind {
    /// Nodes `(i h, j h)` in the complex plane.
    Planar,
    /// Nodes in `(log|z_1|, …, log|z_n|)`.
    Log { dim: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Axis {
    offset: f64,
    first: i64,
    step: f64,
    len: usize,
}

impl Axis {
    fn coord(&self, i: usize) -> f64 {
        self.offset + (self.first + i as i64) as f64 * self.step
    }

    /// Cell index and fraction for coordinate `x`, with fractions near 0 or 1 snapped.
    fn locate(&self, x: f64) -> Option<(usize, f64)> {
        if self.len == 1 {
            return (x - self.coord(0)).abs().le(&(SNAP * self.step.max(1.0))).then_some((0, 0.0));
        }
        let r = (x - self.offset) / self.step - self.first as f64;
        let mut i = floor(r);
        let mut t = r - i;
        if t > 1.0 - SNAP {
            i += 1.0;
            t = 0.0;
        } else if t < SNAP {
            t = 0.0;
        }
        if i < 0.0 || i > (self.len - 1) as f64 || (i == (self.len - 1) as f64 && t > 0.0) {
            return None;
        }
        Some((i as usize, t))
    }
}

/// A grid function `u` over Ω with a clamp mask.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    kind: GridKind,
    axes: [Axis; 2],
    spacing: f64,
    values: Vec<f64>,
    clamped: Vec<bool>,
    active: Vec<bool>,
    sweeps: usize,
    residual: f64,
}

/// One node of a [`GridField`] (`y` is 0 for one-dimensional log grids).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridNode {
    pub x: f64,
    pub y: f64,
    pub value: f64,
    pub clamped: bool,
}

impl GridField {
    pub fn kind(&self) -> GridKind {
        self.kind
    }

    /// Nominal spacing `h` (used for the subaverage tolerance `5h`).
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    fn index(&self, i: usize, j: usize) -> usize {
        i * self.axes[1].len + j
    }

    /// Active nodes in row-major order.
    pub fn nodes(&self) -> impl Iterator<Item = GridNode> + '_ {
        (0..self.axes[0].len).flat_map(move |i| {
            (0..self.axes[1].len).filter_map(move |j| {
                let k = self.index(i, j);
                self.active[k].then(|| GridNode {
                    x: self.axes[0].coord(i),
                    y: if self.axes[1].len == 1 && matches!(self.kind, GridKind::Log { dim: 1 }) {
                        0.0
                    } else {
                        self.axes[1].coord(j)
                    },
                    value: self.values[k],
                    clamped: self.clamped[k],
                })
            })
        })
    }

    fn grid_coords(&self, p: &CPoint) -> Option<(f64, f64)> {
        match self.kind {
            GridKind::Planar => {
                let z = *p.coords().first()?;
                Some((z.re, z.im))
            }
            GridKind::Log { dim } => {
                if p.dim() != dim {
                    return None;
                }
                let s: Vec<f64> = p.coords().iter().map(|z| ln(modulus(*z))).collect();
                if s.iter().any(|v| !v.is_finite()) {
                    return None;
                }
                Some((s[0], s.get(1).copied().unwrap_or(0.0)))
            }
        }
    }

    /// Bilinear interpolation of `u`; `None` if a contributing corner is clamped or
    /// outside the grid domain.
    pub fn value_at(&self, p: &CPoint) -> Option<f64> {
        let (x, y) = self.grid_coords(p)?;
        let (i, tx) = self.axes[0].locate(x)?;
        let (j, ty) = if matches!(self.kind, GridKind::Log { dim: 1 }) { (0, 0.0) } else { self.axes[1].locate(y)? };
        let mut acc = 0.0;
        for (di, wx) in [(0, 1.0 - tx), (1, tx)] {
            for (dj, wy) in [(0, 1.0 - ty), (1, ty)] {
                let w = wx * wy;
                if w == 0.0 {
                    continue;
                }
                let k = self.index(i + di, j + dj);
                if !self.active[k] || self.clamped[k] {
                    return None;
                }
                acc += w * self.values[k];
            }
        }
        Some(acc)
    }

    /// Max nodewise `|u - other|` over nodes unclamped in both fields.
    pub fn max_abs_difference(&self, other: &GridField) -> Option<f64> {
        if self.values.len() != other.values.len() {
            return None;
        }
        let mut m: f64 = 0.0;
        for k in 0..self.values.len() {
            if self.active[k] && other.active[k] && !self.clamped[k] && !other.clamped[k] {
                m = m.max((self.values[k] - other.values[k]).abs());
            }
        }
        Some(m)
    }

    /// The obstacle itself, `u = φ`, on the planar grid (no minorant taken).
    pub fn from_obstacle(scenario: &Scenario, geometry: &GridGeometry) -> Result<GridField, OracleError> {
        Ok(PlanarObstacleProblem::new(scenario, geometry)?.field())
    }
}

#[derive(Clone, Copy, Debug)]
struct Stencil {
    node: usize,
    nbrs: [(usize, f64); 4],
    count: usize,
    constant: f64,
}

/// Jacobi min-sweeps `v ← min(o, weighted 4-neighbour average)` on a planar grid.
///
/// Arms that leave Ω are cut at the boundary crossing, where `v` is held at `o`;
/// clamped nodes (where `o = -∞`) are frozen at the floor and left out of averages.
#[derive(Clone, Debug)]
pub struct PlanarObstacleProblem {
    field: GridField,
    obstacle: Vec<f64>,
    psi: Vec<f64>,
    v: Vec<f64>,
    next: Vec<f64>,
    stencils: Vec<Stencil>,
}

impl PlanarObstacleProblem {
    pub fn new(scenario: &Scenario, geometry: &GridGeometry) -> Result<PlanarObstacleProblem, OracleError> {
        scenario.validate()?;
        let (x0, x1, y0, y1) = scenario.domain.planar_bounds().ok_or(OracleError::NotPlanar)?;
        let h = geometry.spacing;
        if !(h.is_finite() && h > 0.0) {
            return Err(OracleError::Spacing);
        }
        let axis = |lo: f64, hi: f64| {
            let first = floor(lo / h) as i64 - 1;
            let last = ceil(hi / h) as i64 + 1;
            Axis { offset: 0.0, first, step: h, len: (last - first + 1) as usize }
        };
        let axes = [axis(x0, x1), axis(y0, y1)];
        let total = axes[0].len.checked_mul(axes[1].len).filter(|t| *t <= MAX_NODES).ok_or(OracleError::Spacing)?;
        let dom = &scenario.domain;
        let o_at = |z: C64| scenario.obstacle.plus_potential(&scenario.potential, &CPoint::one(z));
        let point = |i: usize, j: usize| C64::new(axes[0].coord(i), axes[1].coord(j));

        let mut active = vec![false; total];
        let mut clamped = vec![false; total];
        let mut obstacle = vec![0.0; total];
        let mut psi = vec![0.0; total];
        for i in 0..axes[0].len {
            for j in 0..axes[1].len {
                let k = i * axes[1].len + j;
                let z = point(i, j);
                if !contains(dom, &CPoint::one(z), 0.0) {
                    continue;
                }
                active[k] = true;
                let (o, c) = o_at(z).clamp_below(CLAMP_FLOOR);
                obstacle[k] = o;
                clamped[k] = c;
                psi[k] = match eval_potential(&scenario.potential, &CPoint::one(z)) {
                    ExtReal::Finite(p) => p,
                    _ => 0.0,
                };
            }
        }

        let mut stencils = Vec::new();
        for i in 0..axes[0].len {
            for j in 0..axes[1].len {
                let k = i * axes[1].len + j;
                if !active[k] || clamped[k] {
                    continue;
                }
                let z = point(i, j);
                // (arm length in units of h, neighbour index or boundary value)
                let mut arms: [(f64, Result<usize, f64>); 4] = [(1.0, Err(0.0)); 4];
                let dirs = [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)];
                for (a, (di, dj)) in dirs.iter().enumerate() {
                    let ni = i as i64 + di;
                    let nj = j as i64 + dj;
                    let nk = (ni as usize) * axes[1].len + nj as usize;
                    if active[nk] {
                        arms[a] = (1.0, Ok(nk));
                    } else {
                        let d = C64::new(*di as f64 * h, *dj as f64 * h);
                        let t = boundary_crossing(dom, z, d).max(1e-9);
                        let (ob, c) = o_at(z + d * t).clamp_below(CLAMP_FLOOR);
                        arms[a] = (t, if c { Ok(usize::MAX) } else { Err(ob) });
                    }
                }
                let mut st = Stencil { node: k, nbrs: [(0, 0.0); 4], count: 0, constant: 0.0 };
                let mut total_w = 0.0;
                for axis_arms in [[arms[0], arms[1]], [arms[2], arms[3]]] {
                    let (a, b) = (axis_arms[0].0, axis_arms[1].0);
                    for (len, target) in &axis_arms {
                        // Shortley–Weller weight, exact for quadratics along the axis
                        let w = 1.0 / (len * (a + b));
                        match target {
                            Ok(nk) if *nk == usize::MAX || clamped[*nk] => {}
                            Ok(nk) => {
                                st.nbrs[st.count] = (*nk, w);
                                st.count += 1;
                                total_w += w;
                            }
                            Err(val) => {
                                st.constant += w * val;
                                total_w += w;
                            }
                        }
                    }
                }
                if total_w > 0.0 {
                    for n in st.nbrs[..st.count].iter_mut() {
                        n.1 /= total_w;
                    }
                    st.constant /= total_w;
                    stencils.push(st);
                }
            }
        }

        let values = vec![0.0; total];
        let field = GridField {
            kind: GridKind::Planar,
            axes,
            spacing: h,
            values,
            clamped,
            active,
            sweeps: 0,
            residual: f64::INFINITY,
        };
        let v = obstacle.clone();
        let next = v.clone();
        Ok(PlanarObstacleProblem { field, obstacle, psi, v, next, stencils })
    }

    /// Restarts the iteration from `v⁰ = field + ψ` on unclamped nodes.
    pub fn with_initial(mut self, field: &GridField) -> PlanarObstacleProblem {
        for k in 0..self.v.len() {
            if self.field.active[k] && !self.field.clamped[k] && field.active.get(k) == Some(&true) {
                self.v[k] = field.values[k] + self.psi[k];
            }
        }
        self.next.clone_from(&self.v);
        self
    }

    fn average(&self, st: &Stencil, v: &[f64]) -> f64 {
        st.nbrs[..st.count].iter().fold(st.constant, |acc, (k, w)| acc + w * v[*k])
    }

    /// One Jacobi sweep; returns the max nodewise change.
    pub fn sweep(&mut self) -> f64 {
        let mut max_change: f64 = 0.0;
        for st in &self.stencils {
            let avg = st.nbrs[..st.count].iter().fold(st.constant, |acc, (k, w)| acc + w * self.v[*k]);
            let new = self.obstacle[st.node].min(avg);
            max_change = max_change.max((new - self.v[st.node]).abs());
            self.next[st.node] = new;
        }
        core::mem::swap(&mut self.v, &mut self.next);
        self.field.sweeps += 1;
        self.field.residual = max_change;
        max_change
    }

    /// Sweeps until the update falls below `tol` or `cap` sweeps have run.
    pub fn solve(&mut self, tol: f64, cap: usize) -> Result<(), OracleError> {
        while self.field.sweeps < cap {
            if self.sweep() < tol {
                return Ok(());
            }
        }
        Err(OracleError::NoConvergence { sweeps: self.field.sweeps, residual: self.field.residual })
    }

    /// `v` at the nodes (including the clamp floor on masked nodes).
    pub fn raw_values(&self) -> &[f64] {
        &self.v
    }

    /// Max over unclamped active nodes of `v - (weighted neighbour average)`.
    pub fn subharmonic_defect(&self) -> f64 {
        self.stencils.iter().map(|st| self.v[st.node] - self.average(st, &self.v)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Max over unclamped active nodes of `v - o`.
    pub fn obstacle_excess(&self) -> f64 {
        self.stencils.iter().map(|st| self.v[st.node] - self.obstacle[st.node]).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn field(&self) -> GridField {
        let mut f = self.field.clone();
        for k in 0..f.values.len() {
            f.values[k] = if !f.active[k] {
                0.0
            } else if f.clamped[k] {
                CLAMP_FLOOR
            } else {
                self.v[k] - self.psi[k]
            };
        }
        f
    }
}

/// Fraction `t ∈ (0, 1]` of the step `d` from `z` (inside) at which the segment leaves Ω.
fn boundary_crossing(dom: &Domain, z: C64, d: C64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if contains(dom, &CPoint::one(z + d * mid), 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Largest subharmonic minorant of `ψ + φ` on a planar grid, minus ψ.
pub fn sup_side_1d(scenario: &Scenario, geometry: &GridGeometry) -> Result<GridField, OracleError> {
    let mut problem = PlanarObstacleProblem::new(scenario, geometry)?;
    problem.solve(SWEEP_TOL, SWEEP_CAP)?;
    Ok(problem.field())
}

/// `out[j] = max_i (ps[j] x_i - f_i)`, exact over the given points (`xs` increasing,
/// `ps` increasing), in linear time via the lower convex hull.
pub fn legendre_1d(xs: &[f64], f: &[f64], ps: &[f64], out: &mut [f64]) {
    let mut hull: Vec<usize> = Vec::with_capacity(xs.len());
    for i in 0..xs.len() {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b if it lies on or above the chord from a to i
            let lhs = (f[b] - f[a]) * (xs[i] - xs[a]);
            let rhs = (f[i] - f[a]) * (xs[b] - xs[a]);
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let mut h = 0;
    for (j, p) in ps.iter().enumerate() {
        while h + 1 < hull.len() && p * xs[hull[h + 1]] - f[hull[h + 1]] >= p * xs[hull[h]] - f[hull[h]] {
            h += 1;
        }
        out[j] = p * xs[hull[h]] - f[hull[h]];
    }
}

/// Slopes `k Δ` covering `[lo, hi]` padded by 10%, with `Δ` a power of two near
/// `width / (m - 1)`. Narrower ranges get finer lattices containing the coarser
/// ones, which keeps the biconjugate idempotent.
fn slope_grid(lo: f64, hi: f64, m: usize) -> Vec<f64> {
    let scale = lo.abs().max(hi.abs()).max(1.0);
    let pad = (0.1 * (hi - lo)).max(1e-6 * scale);
    let (a, b) = (lo - pad, hi + pad);
    let delta = libm::exp2(floor(libm::log2((b - a) / (m.max(2) - 1) as f64)));
    let (k0, k1) = (floor(a / delta) as i64, ceil(b / delta) as i64);
    (k0..=k1).map(|k| k as f64 * delta).collect()
}

fn quotient_range(values: &[f64], stride: usize, len: usize, lines: usize, line_stride: usize, step: f64) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for l in 0..lines {
        for i in 0..len - 1 {
            let a = values[l * line_stride + i * stride];
            let b = values[l * line_stride + (i + 1) * stride];
            let q = (b - a) / step;
            lo = lo.min(q);
            hi = hi.max(q);
        }
    }
    if lo > hi {
        (0.0, 0.0)
    } else {
        (lo, hi)
    }
}

/// Discrete convex biconjugate of `values` on the tensor grid `xs × ys` (row-major,
/// `ys` may have a single entry), with per-axis slope lattices of roughly `m` points.
pub fn biconjugate(xs: &[f64], ys: &[f64], values: &[f64], m: usize) -> Vec<f64> {
    let (nx, ny) = (xs.len(), ys.len());
    if ny == 1 {
        let (lo, hi) = quotient_range(values, 1, nx, 1, 0, xs[1] - xs[0]);
        let ps = slope_grid(lo, hi, m);
        let mut conj = vec![0.0; ps.len()];
        legendre_1d(xs, values, &ps, &mut conj);
        let mut out = vec![0.0; nx];
        legendre_1d(&ps, &conj, xs, &mut out);
        return out;
    }
    let (lo1, hi1) = quotient_range(values, ny, nx, ny, 1, xs[1] - xs[0]);
    let (lo2, hi2) = quotient_range(values, 1, ny, nx, ny, ys[1] - ys[0]);
    let p1 = slope_grid(lo1, hi1, m);
    let p2 = slope_grid(lo2, hi2, m);
    let (m1, m2) = (p1.len(), p2.len());

    // g(x_i, q) = max_j (q y_j - f(x_i, y_j))
    let mut g = vec![0.0; nx * m2];
    for i in 0..nx {
        legendre_1d(ys, &values[i * ny..(i + 1) * ny], &p2, &mut g[i * m2..(i + 1) * m2]);
    }
    // f*(p, q) = max_i (p x_i + g(x_i, q)), stored q-major
    let mut conj = vec![0.0; m2 * m1];
    let mut col = vec![0.0; nx];
    for q in 0..m2 {
        for i in 0..nx {
            col[i] = -g[i * m2 + q];
        }
        legendre_1d(xs, &col, &p1, &mut conj[q * m1..(q + 1) * m1]);
    }
    // back: h(p, y_j) = max_q (q y_j - f*(p, q)); f**(x_i, y_j) = max_p (p x_i - (-h))
    let mut hh = vec![0.0; m1 * ny];
    let mut line = vec![0.0; m2];
    for p in 0..m1 {
        for q in 0..m2 {
            line[q] = conj[q * m1 + p];
        }
        legendre_1d(&p2, &line, ys, &mut hh[p * ny..(p + 1) * ny]);
    }
    let mut out = vec![0.0; nx * ny];
    let mut res = vec![0.0; nx];
    let mut line = vec![0.0; m1];
    for j in 0..ny {
        for p in 0..m1 {
            line[p] = -hh[p * ny + j];
        }
        legendre_1d(&p1, &line, xs, &mut res);
        for i in 0..nx {
            out[i * ny + j] = res[i];
        }
    }
    out
}

fn toric_axes(scenario: &Scenario, geometry: &GridGeometry) -> Result<[Axis; 2], OracleError> {
    let (lo, hi) = scenario.domain.log_box().ok_or(OracleError::NotTorusInvariant)?;
    let h = geometry.spacing;
    if !(h.is_finite() && h > 0.0) {
        return Err(OracleError::Spacing);
    }
    let axis = |a: f64, b: f64| {
        let n = ceil((b - a) / h).max(1.0) as usize;
        Axis { offset: a, first: 0, step: (b - a) / n as f64, len: n + 1 }
    };
    let ax0 = axis(lo[0], hi[0]);
    let ax1 = if lo.len() > 1 { axis(lo[1], hi[1]) } else { Axis { offset: 0.0, first: 0, step: 1.0, len: 1 } };
    if ax0.len.saturating_mul(ax1.len) > MAX_NODES {
        return Err(OracleError::Spacing);
    }
    Ok([ax0, ax1])
}

/// Largest convex-in-log-moduli minorant of `ψ + φ` on a product of annuli, minus ψ.
pub fn sup_side_toric(scenario: &Scenario, geometry: &GridGeometry) -> Result<GridField, OracleError> {
    scenario.validate()?;
    let dom = &scenario.domain;
    if !matches!(dom, Domain::Annulus { .. } | Domain::AnnulusProduct { .. } | Domain::LogBox { .. })
        || !scenario.potential.is_torus_invariant()
        || !scenario.obstacle.is_torus_invariant()
    {
        return Err(OracleError::NotTorusInvariant);
    }
    let dim = dom.dim();
    let axes = toric_axes(scenario, geometry)?;
    let (nx, ny) = (axes[0].len, axes[1].len);
    let xs: Vec<f64> = (0..nx).map(|i| axes[0].coord(i)).collect();
    let ys: Vec<f64> = (0..ny).map(|j| axes[1].coord(j)).collect();
    let point = |i: usize, j: usize| {
        if dim == 1 {
            CPoint::real(exp(xs[i]))
        } else {
            CPoint::two(C64::new(exp(xs[i]), 0.0), C64::new(exp(ys[j]), 0.0))
        }
    };
    let mut o = vec![0.0; nx * ny];
    let mut clamped = vec![false; nx * ny];
    let mut psi = vec![0.0; nx * ny];
    for i in 0..nx {
        for j in 0..ny {
            let p = point(i, j);
            let (v, c) = scenario.obstacle.plus_potential(&scenario.potential, &p).clamp_below(CLAMP_FLOOR);
            o[i * ny + j] = v;
            clamped[i * ny + j] = c;
            psi[i * ny + j] = eval_potential(&scenario.potential, &p).finite().unwrap_or(0.0);
        }
    }
    let m = geometry.slope_points.unwrap_or(if dim == 1 { 8192 } else { 1024 }).max(2);
    let v = biconjugate(&xs, &ys, &o, m);
    let values = v.iter().zip(&psi).zip(&clamped).map(|((v, p), c)| if *c { CLAMP_FLOOR } else { v - p }).collect();
    let h = axes[0].step.max(if dim == 2 { axes[1].step } else { 0.0 });
    Ok(GridField {
        kind: GridKind::Log { dim },
        axes,
        spacing: h,
        values,
        clamped,
        active: vec![true; nx * ny],
        sweeps: 0,
        residual: 0.0,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SubaverageReport {
    pub trials: usize,
    pub tested: usize,
    pub violations: usize,
    /// Smallest `mean + tol - center` seen (negative means a violation).
    pub worst_margin: f64,
    pub tolerance: f64,
}

const CIRCLE_NODES: usize = 64;

/// Samples random affine discs `h(t) = c + b t` inside Ω and checks
/// `(u+ψ)(c) ≤ mean_T (u+ψ)∘h + 5 h_spacing`, with `u` interpolated and ψ exact.
pub fn check_subaverage(
    field: &GridField,
    scenario: &Scenario,
    trials: usize,
    seed: u64,
) -> Result<SubaverageReport, OracleError> {
    let dim = scenario.dim();
    match field.kind {
        GridKind::Planar if dim != 1 => return Err(OracleError::Dimension),
        GridKind::Log { dim: d } if d != dim => return Err(OracleError::Dimension),
        _ => {}
    }
    let tol = 5.0 * field.spacing;
    let dom = &scenario.domain;
    let total = |p: &CPoint| -> Option<f64> {
        let psi = eval_potential(&scenario.potential, p).finite()?;
        Some(field.value_at(p)? + psi)
    };
    let sample_center = |rng: &mut rand_chacha::ChaCha8Rng| -> Option<CPoint> {
        let mut z = [C64::new(0.0, 0.0); 2];
        for (i, zi) in z.iter_mut().enumerate().take(dim) {
            *zi = match field.kind {
                GridKind::Planar => C64::new(
                    field.axes[0].coord(0) + rng.random::<f64>() * (field.axes[0].coord(field.axes[0].len - 1) - field.axes[0].coord(0)),
                    field.axes[1].coord(0) + rng.random::<f64>() * (field.axes[1].coord(field.axes[1].len - 1) - field.axes[1].coord(0)),
                ),
                GridKind::Log { .. } => {
                    let ax = field.axes[i];
                    let s = ax.coord(0) + rng.random::<f64>() * (ax.coord(ax.len - 1) - ax.coord(0));
                    cis(TAU * rng.random::<f64>()) * exp(s)
                }
            };
        }
        let p = CPoint::from_slice(&z[..dim])?;
        contains(dom, &p, 0.0).then_some(p)
    };

    let mut report = SubaverageReport { trials, tested: 0, violations: 0, worst_margin: f64::INFINITY, tolerance: tol };
    let mut rng = task_rng(seed, 0x5ab, 0);
    let mut attempts = 0;
    while report.tested < trials && attempts < 50 * trials.max(1) {
        attempts += 1;
        let Some(c) = sample_center(&mut rng) else { continue };
        let Some(d) = dom.boundary_distance(&c) else { continue };
        let r = d * rng.random::<f64>();
        if r <= 0.0 {
            continue;
        }
        let mut b = [C64::new(0.0, 0.0); 2];
        for bi in b.iter_mut().take(dim) {
            *bi = cis(TAU * rng.random::<f64>()) * r;
        }
        let Some(center) = total(&c) else { continue };
        let mut sum = 0.0;
        let mut ok = true;
        for k in 0..CIRCLE_NODES {
            let t = cis(TAU * k as f64 / CIRCLE_NODES as f64);
            let mut p = c;
            for (z, bi) in p.coords_mut().iter_mut().zip(b) {
                *z += bi * t;
            }
            match total(&p) {
                Some(v) => sum += v,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        report.tested += 1;
        let margin = sum / CIRCLE_NODES as f64 + tol - center;
        report.worst_margin = report.worst_margin.min(margin);
        if margin < 0.0 {
            report.violations += 1;
        }
    }
    Ok(report)
}
