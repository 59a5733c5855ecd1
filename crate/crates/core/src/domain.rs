//! Points, domains and the Green function of the unit disc.

use alloc::vec::Vec;
use num_complex::Complex;

use crate::ext::ExtReal;
use crate::math::{ln, modulus};

pub type C64 = Complex<f64>;

/// A point in C^n, n ∈ {1, 2}.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(try_from = "Vec<C64>", into = "Vec<C64>")
)]
pub struct CPoint {
    dim: usize,
    z: [C64; 2],
}

impl CPoint {
    pub fn one(z: C64) -> CPoint {
        CPoint { dim: 1, z: [z, C64::new(0.0, 0.0)] }
    }

    pub fn two(z1: C64, z2: C64) -> CPoint {
        CPoint { dim: 2, z: [z1, z2] }
    }

    pub fn real(x: f64) -> CPoint {
        CPoint::one(C64::new(x, 0.0))
    }

    pub fn from_slice(coords: &[C64]) -> Option<CPoint> {
        match coords {
            [a] => Some(CPoint::one(*a)),
            [a, b] => Some(CPoint::two(*a, *b)),
            _ => None,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &[C64] {
        &self.z[..self.dim]
    }

    pub fn coords_mut(&mut self) -> &mut [C64] {
        &mut self.z[..self.dim]
    }

    pub fn is_finite(&self) -> bool {
        self.coords().iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Max-modulus distance.
    pub fn distance(&self, other: &CPoint) -> f64 {
        self.coords()
            .iter()
            .zip(other.coords())
            .map(|(a, b)| modulus(*a - *b))
            .fold(0.0, f64::max)
    }
}

impl TryFrom<Vec<C64>> for CPoint {
    type Error = &'static str;
    fn try_from(v: Vec<C64>) -> Result<Self, Self::Error> {
        CPoint::from_slice(&v).ok_or("a point needs 1 or 2 complex coordinates")
    }
}

impl From<CPoint> for Vec<C64> {
    fn from(p: CPoint) -> Self {
        p.coords().to_vec()
    }
}

/// Open domains of C^n, all but `Disc` centered at the origin.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)
)]
pub enum Domain {
    Disc {
        radius: f64,
        #[cfg_attr(feature = "serde", serde(default))]
        center: C64,
    },
    Polydisc {
        radii: Vec<f64>,
    },
    Annulus {
        inner: f64,
        outer: f64,
    },
    AnnulusProduct {
        inner: Vec<f64>,
        outer: Vec<f64>,
    },
    /// `{ z : lo_i < log|z_i| < hi_i }`.
    LogBox {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    FullSpace {
        dim: usize,
    },
}

impl Domain {
    pub fn disc(radius: f64) -> Domain {
        Domain::Disc { radius, center: C64::new(0.0, 0.0) }
    }

    pub fn annulus(inner: f64, outer: f64) -> Domain {
        Domain::Annulus { inner, outer }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Disc { .. } | Domain::Annulus { .. } => 1,
            Domain::Polydisc { radii } => radii.len(),
            Domain::AnnulusProduct { inner, .. } => inner.len(),
            Domain::LogBox { lo, .. } => lo.len(),
            Domain::FullSpace { dim } => *dim,
        }
    }

    /// Checks the parameter invariants; returns a description of the first violation.
    pub fn validate(&self) -> Result<(), &'static str> {
        let pos = |r: f64| r.is_finite() && r > 0.0;
        let ok = match self {
            Domain::Disc { radius, center } => {
                if !pos(*radius) || !center.re.is_finite() || !center.im.is_finite() {
                    return Err("disc radius must be positive and finite");
                }
                true
            }
            Domain::Polydisc { radii } => {
                if !radii.iter().all(|r| pos(*r)) {
                    return Err("polydisc radii must be positive");
                }
                true
            }
            Domain::Annulus { inner, outer } => {
                if !(pos(*inner) && pos(*outer) && inner < outer) {
                    return Err("annulus needs 0 < inner < outer");
                }
                true
            }
            Domain::AnnulusProduct { inner, outer } => {
                if inner.len() != outer.len() {
                    return Err("annulus product needs matching inner/outer lengths");
                }
                if !inner.iter().zip(outer).all(|(a, b)| pos(*a) && pos(*b) && a < b) {
                    return Err("annulus product needs 0 < inner < outer in every factor");
                }
                true
            }
            Domain::LogBox { lo, hi } => {
                if lo.len() != hi.len() {
                    return Err("log box needs matching lo/hi lengths");
                }
                if !lo.iter().zip(hi).all(|(a, b)| a.is_finite() && b.is_finite() && a < b) {
                    return Err("log box needs lo < hi in every coordinate");
                }
                true
            }
            Domain::FullSpace { .. } => true,
        };
        debug_assert!(ok);
        if !(1..=2).contains(&self.dim()) {
            return Err("domain dimension must be 1 or 2");
        }
        Ok(())
    }

    /// Per-coordinate radial bounds `(inner, outer)` for the torus-invariant kinds.
    fn radial_bounds(&self, i: usize) -> Option<(f64, f64)> {
        match self {
            Domain::Disc { radius, center } if center.re == 0.0 && center.im == 0.0 => {
                Some((0.0, *radius))
            }
            Domain::Disc { .. } => None,
            Domain::Polydisc { radii } => Some((0.0, radii[i])),
            Domain::Annulus { inner, outer } => Some((*inner, *outer)),
            Domain::AnnulusProduct { inner, outer } => Some((inner[i], outer[i])),
            Domain::LogBox { lo, hi } => Some((crate::math::exp(lo[i]), crate::math::exp(hi[i]))),
            Domain::FullSpace { .. } => Some((0.0, f64::INFINITY)),
        }
    }

    /// Max-modulus distance from `p` to the complement; negative outside, `None` for
    /// the full space.
    pub fn boundary_distance(&self, p: &CPoint) -> Option<f64> {
        if let Domain::FullSpace { .. } = self {
            return None;
        }
        if let Domain::Disc { radius, center } = self {
            return Some(radius - modulus(p.coords()[0] - center));
        }
        let mut d = f64::INFINITY;
        for (i, z) in p.coords().iter().enumerate() {
            let (r_in, r_out) = self.radial_bounds(i)?;
            let r = modulus(*z);
            let di = if r_in > 0.0 { (r - r_in).min(r_out - r) } else { r_out - r };
            d = d.min(di);
        }
        Some(d)
    }

    /// Nearest boundary point of a planar domain (used for Dirichlet data on grids).
    pub fn project_to_boundary(&self, z: C64) -> Option<C64> {
        let radial = |c: C64, r: f64| {
            let w = z - c;
            let m = modulus(w);
            if m == 0.0 {
                c + C64::new(r, 0.0)
            } else {
                c + w * (r / m)
            }
        };
        match self {
            Domain::Disc { radius, center } => Some(radial(*center, *radius)),
            Domain::Polydisc { radii } if radii.len() == 1 => {
                Some(radial(C64::new(0.0, 0.0), radii[0]))
            }
            Domain::Annulus { .. }
            | Domain::AnnulusProduct { .. }
            | Domain::LogBox { .. }
                if self.dim() == 1 =>
            {
                let (r_in, r_out) = self.radial_bounds(0)?;
                let m = modulus(z);
                let target = if m - r_in < r_out - m { r_in } else { r_out };
                Some(radial(C64::new(0.0, 0.0), target))
            }
            _ => None,
        }
    }

    /// Log-modulus box `(lo, hi)` for domains bounded away from the coordinate axes.
    pub fn log_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match self {
            Domain::Annulus { inner, outer } => Some((alloc::vec![ln(*inner)], alloc::vec![ln(*outer)])),
            Domain::AnnulusProduct { inner, outer } => Some((
                inner.iter().map(|r| ln(*r)).collect(),
                outer.iter().map(|r| ln(*r)).collect(),
            )),
            Domain::LogBox { lo, hi } => Some((lo.clone(), hi.clone())),
            _ => None,
        }
    }

    /// Invariant under the torus action `z_i ↦ e^{iθ_i} z_i`.
    pub fn is_torus_invariant(&self) -> bool {
        match self {
            Domain::Disc { center, .. } => center.re == 0.0 && center.im == 0.0,
            _ => true,
        }
    }

    /// Planar bounding box `(re_min, re_max, im_min, im_max)` for 1-D bounded domains.
    pub fn planar_bounds(&self) -> Option<(f64, f64, f64, f64)> {
        if self.dim() != 1 {
            return None;
        }
        let (c, r) = match self {
            Domain::Disc { radius, center } => (*center, *radius),
            Domain::FullSpace { .. } => return None,
            _ => (C64::new(0.0, 0.0), self.radial_bounds(0)?.1),
        };
        Some((c.re - r, c.re + r, c.im - r, c.im + r))
    }
}

/// True iff the closed max-modulus ball of radius `margin` around `p` lies in `domain`.
///
/// Comparisons are made on squared moduli, so no square roots enter the test.
pub fn contains(domain: &Domain, p: &CPoint, margin: f64) -> bool {
    debug_assert!(margin >= 0.0);
    if p.dim() != domain.dim() {
        return false;
    }
    let inside_ring = |z: C64, r_in: f64, r_out: f64| {
        let m2 = z.norm_sqr();
        let hi = r_out - margin;
        if hi <= 0.0 || m2 >= hi * hi {
            return false;
        }
        if r_in > 0.0 {
            let lo = r_in + margin;
            m2 > lo * lo
        } else {
            true
        }
    };
    match domain {
        Domain::FullSpace { .. } => p.is_finite(),
        Domain::Disc { radius, center } => inside_ring(p.coords()[0] - center, 0.0, *radius),
        _ => p.coords().iter().enumerate().all(|(i, z)| match domain.radial_bounds(i) {
            Some((r_in, r_out)) => inside_ring(*z, r_in, r_out),
            None => false,
        }),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, thiserror::Error)]
pub enum GreenError {
    #[error("first argument must lie in the open unit disc (|z| = {0})")]
    FirstOutside(f64),
    #[error("second argument must lie in the closed unit disc (|w| = {0})")]
    SecondOutside(f64),
}

/// Green function of the unit disc, `log(|z - w| / |1 - z w̄|)`.
pub fn green_disc(z: C64, w: C64) -> Result<ExtReal, GreenError> {
    let mz = modulus(z);
    let mw = modulus(w);
    if mz >= 1.0 {
        return Err(GreenError::FirstOutside(mz));
    }
    if mw > 1.0 {
        return Err(GreenError::SecondOutside(mw));
    }
    let num = modulus(z - w);
    if num == 0.0 {
        return Ok(ExtReal::MinusInfinity);
    }
    if mw == 1.0 {
        return Ok(ExtReal::Finite(0.0));
    }
    // |1 - z w̄|^2 - |z - w|^2 = (1 - |z|^2)(1 - |w|^2) keeps the ratio below one even when
    // both moduli are close to 1.
    let gap = (1.0 - mz * mz) * (1.0 - mw * mw);
    let ratio2 = num * num / (num * num + gap);
    Ok(ExtReal::Finite(0.5 * ln(ratio2).min(0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn contains_examples() {
        assert!(contains(&Domain::disc(1.0), &CPoint::real(0.5), 0.0));
        assert!(!contains(&Domain::disc(1.0), &CPoint::real(0.95), 0.1));
        assert!(contains(&Domain::annulus(0.2, 1.0), &CPoint::real(0.5), 0.05));
        assert!(!contains(&Domain::annulus(0.2, 1.0), &CPoint::real(0.22), 0.05));
        assert!(!contains(&Domain::disc(1.0), &CPoint::real(1.0), 0.0));
    }

    #[test]
    fn contains_polydisc_and_products() {
        let pd = Domain::Polydisc { radii: alloc::vec![1.0, 2.0] };
        assert!(contains(&pd, &CPoint::two(c(0.5, 0.0), c(0.0, 1.5)), 0.4));
        assert!(!contains(&pd, &CPoint::two(c(0.5, 0.0), c(0.0, 1.5)), 0.6));
        let ap = Domain::AnnulusProduct { inner: alloc::vec![0.5, 0.5], outer: alloc::vec![1.0, 1.0] };
        assert!(contains(&ap, &CPoint::two(c(0.7, 0.0), c(0.0, 0.8)), 0.1));
        assert!(!contains(&ap, &CPoint::two(c(0.3, 0.0), c(0.0, 0.8)), 0.0));
        // dimension mismatch is never contained
        assert!(!contains(&pd, &CPoint::real(0.1), 0.0));
    }

    #[test]
    fn log_box_matches_annulus_product() {
        let lb = Domain::LogBox { lo: alloc::vec![ln(0.5)], hi: alloc::vec![0.0] };
        assert!(contains(&lb, &CPoint::real(0.75), 0.0));
        assert!(!contains(&lb, &CPoint::real(0.4), 0.0));
    }

    #[test]
    fn green_examples() {
        let g = green_disc(c(0.0, 0.0), c(0.5, 0.0)).unwrap().finite().unwrap();
        assert!((g - ln(0.5)).abs() < 1e-15);
        assert_eq!(green_disc(c(0.3, 0.0), c(0.3, 0.0)).unwrap(), ExtReal::MinusInfinity);
        for k in 0..16 {
            let w = crate::math::cis(k as f64 * 0.41);
            let w = w / modulus(w);
            let g = green_disc(c(0.0, 0.0), w).unwrap().finite().unwrap();
            assert!(g.abs() < 1e-15);
        }
    }

    #[test]
    fn green_rejects_outside_arguments() {
        assert!(green_disc(c(1.0, 0.0), c(0.0, 0.0)).is_err());
        assert!(green_disc(c(0.0, 0.0), c(1.1, 0.0)).is_err());
    }

    #[test]
    fn boundary_distance_and_projection() {
        let d = Domain::annulus(0.2, 1.0);
        let p = CPoint::real(0.3);
        assert!((d.boundary_distance(&p).unwrap() - 0.1).abs() < 1e-15);
        let z = d.project_to_boundary(c(0.0, 0.25)).unwrap();
        assert!((z - c(0.0, 0.2)).norm_sqr() < 1e-30);
        assert!(Domain::FullSpace { dim: 1 }.boundary_distance(&p).is_none());
    }
}
