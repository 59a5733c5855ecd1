//! Catalog of ω-upper-semicontinuous obstacles φ.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::domain::{contains, CPoint, Domain};
use crate::ext::ExtReal;
use crate::extremal::CompactSpec;
use crate::math::{ln, modulus, powi};
use crate::potential::{eval_potential, PotentialSpec};

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SquareModulusTerm {
    pub coef: f64,
    /// `coef * Π |z_i|^(2 exps[i])`.
    #[cfg_attr(feature = "serde", serde(rename = "exp"))]
    pub exps: Vec<u32>,
}

/// `offset + Σ slopes[i] log|z_i|`, slopes nonnegative.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LogAffine {
    pub offset: f64,
    pub slopes: Vec<f64>,
}

impl LogAffine {
    fn eval(&self, p: &CPoint) -> ExtReal {
        let mut acc = self.offset;
        for (s, z) in self.slopes.iter().zip(p.coords()) {
            if *s == 0.0 {
                continue;
            }
            let m = modulus(*z);
            if m == 0.0 {
                return ExtReal::MinusInfinity;
            }
            acc += s * ln(m);
        }
        ExtReal::from_f64(acc)
    }
}

/// The set E of an indicator obstacle.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(untagged))]
pub enum IndicatorSet {
    Domain(Domain),
    /// `{ z : dist(z, K) < radius }` in the max-modulus metric.
    Neighborhood { compact: CompactSpec, radius: f64 },
}

impl IndicatorSet {
    pub fn contains(&self, p: &CPoint) -> bool {
        match self {
            IndicatorSet::Domain(d) => contains(d, p, 0.0),
            IndicatorSet::Neighborhood { compact, radius } => compact.distance(p) < *radius,
        }
    }

    fn is_torus_invariant(&self) -> bool {
        match self {
            IndicatorSet::Domain(d) => d.is_torus_invariant(),
            IndicatorSet::Neighborhood { compact, .. } => compact.is_torus_invariant(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)
)]
pub enum Obstacle {
    Constant {
        value: f64,
    },
    /// A real polynomial in the `|z_i|^2`.
    SquareModulus {
        terms: Vec<SquareModulusTerm>,
    },
    /// Minimum of affine functions of `(log|z_1|, …, log|z_n|)`.
    LogAffineMin {
        pieces: Vec<LogAffine>,
    },
    /// 0 on E, 1 elsewhere.
    IndicatorComplement {
        set: IndicatorSet,
    },
    /// `offset - ψ`, so that `φ + ψ` is the constant `offset`.
    NegatedPotentialOffset {
        offset: f64,
        #[cfg_attr(feature = "serde", serde(default))]
        potential: PotentialSpec,
    },
    /// `base + shift`.
    Shifted {
        base: Box<Obstacle>,
        shift: f64,
    },
}

impl Obstacle {
    pub fn constant(value: f64) -> Obstacle {
        Obstacle::Constant { value }
    }

    /// `scale * Σ_i |z_i|^2` in dimension `dim`.
    pub fn square_modulus(scale: f64, dim: usize) -> Obstacle {
        Obstacle::SquareModulus {
            terms: (0..dim)
                .map(|i| {
                    let mut exps = alloc::vec![0; dim];
                    exps[i] = 1;
                    SquareModulusTerm { coef: scale, exps }
                })
                .collect(),
        }
    }

    pub fn indicator_complement(set: Domain) -> Obstacle {
        Obstacle::IndicatorComplement { set: IndicatorSet::Domain(set) }
    }

    pub fn shifted(self, shift: f64) -> Obstacle {
        Obstacle::Shifted { base: Box::new(self), shift }
    }

    /// Peels `Shifted` layers: the innermost obstacle and the total shift.
    pub fn split_shift(&self) -> (&Obstacle, f64) {
        let mut ob = self;
        let mut shift = 0.0;
        while let Obstacle::Shifted { base, shift: s } = ob {
            shift += s;
            ob = base;
        }
        (ob, shift)
    }

    /// `(ψ + φ)(p)`, exact for the negated-potential kind even on sing(ω).
    pub fn plus_potential(&self, potential: &PotentialSpec, p: &CPoint) -> ExtReal {
        match self {
            Obstacle::NegatedPotentialOffset { offset, .. } => ExtReal::Finite(*offset),
            Obstacle::Shifted { base, shift } => base.plus_potential(potential, p) + *shift,
            _ => eval_potential(potential, p) + eval_obstacle(self, p),
        }
    }

    /// Catalog pairing rules for use with `potential` on a `dim`-dimensional domain.
    pub fn validate(&self, dim: usize, potential: &PotentialSpec) -> Result<(), &'static str> {
        match self {
            Obstacle::Constant { value } => {
                if !value.is_finite() {
                    return Err("constant obstacle must be finite");
                }
            }
            Obstacle::SquareModulus { terms } => {
                if terms.iter().any(|t| !t.coef.is_finite() || t.exps.len() > dim) {
                    return Err("square-modulus terms need finite coefficients and at most n exponents");
                }
            }
            Obstacle::LogAffineMin { pieces } => {
                if pieces.is_empty() {
                    return Err("log-affine obstacle needs at least one piece");
                }
                for piece in pieces {
                    if !piece.offset.is_finite() || piece.slopes.len() > dim {
                        return Err("log-affine pieces need a finite offset and at most n slopes");
                    }
                    if piece.slopes.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
                        return Err("log-affine slopes must be nonnegative");
                    }
                }
            }
            Obstacle::IndicatorComplement { set } => match set {
                IndicatorSet::Domain(d) => {
                    d.validate()?;
                    if d.dim() != dim {
                        return Err("indicator set dimension differs from the domain");
                    }
                }
                IndicatorSet::Neighborhood { compact, radius } => {
                    if !(radius.is_finite() && *radius > 0.0) {
                        return Err("neighborhood radius must be positive");
                    }
                    compact.validate(dim)?;
                }
            },
            Obstacle::NegatedPotentialOffset { offset, potential: own } => {
                if !offset.is_finite() {
                    return Err("offset must be finite");
                }
                if own != potential {
                    return Err("negated-potential obstacle must carry the scenario potential");
                }
            }
            Obstacle::Shifted { base, shift } => {
                if !shift.is_finite() {
                    return Err("shift must be finite");
                }
                base.validate(dim, potential)?;
            }
        }
        Ok(())
    }

    pub fn is_torus_invariant(&self) -> bool {
        match self {
            Obstacle::Constant { .. } | Obstacle::SquareModulus { .. } | Obstacle::LogAffineMin { .. } => {
                true
            }
            Obstacle::IndicatorComplement { set } => set.is_torus_invariant(),
            Obstacle::NegatedPotentialOffset { potential, .. } => potential.is_torus_invariant(),
            Obstacle::Shifted { base, .. } => base.is_torus_invariant(),
        }
    }

    pub fn is_indicator(&self) -> bool {
        matches!(self.split_shift().0, Obstacle::IndicatorComplement { .. })
    }
}

/// φ(p). Values lie in `[-∞, +∞)` except for the negated-potential kind on sing(ω).
pub fn eval_obstacle(ob: &Obstacle, p: &CPoint) -> ExtReal {
    match ob {
        Obstacle::Constant { value } => ExtReal::Finite(*value),
        Obstacle::SquareModulus { terms } => {
            let z = p.coords();
            let v = terms.iter().fold(0.0, |acc, t| {
                let mut m = t.coef;
                for (i, e) in t.exps.iter().enumerate() {
                    if *e > 0 {
                        m *= powi(z.get(i).map_or(0.0, |c| c.norm_sqr()), *e);
                    }
                }
                acc + m
            });
            ExtReal::from_f64(v)
        }
        Obstacle::LogAffineMin { pieces } => pieces
            .iter()
            .map(|piece| piece.eval(p))
            .fold(ExtReal::PlusInfinity, ExtReal::min),
        Obstacle::IndicatorComplement { set } => {
            ExtReal::Finite(if set.contains(p) { 0.0 } else { 1.0 })
        }
        Obstacle::NegatedPotentialOffset { offset, potential } => {
            -eval_potential(potential, p) + *offset
        }
        Obstacle::Shifted { base, shift } => eval_obstacle(base, p) + *shift,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn obstacle_examples() {
        assert_eq!(eval_obstacle(&Obstacle::constant(0.0), &CPoint::real(0.7)), ExtReal::Finite(0.0));
        let ind = Obstacle::indicator_complement(Domain::disc(0.2));
        assert_eq!(eval_obstacle(&ind, &CPoint::real(0.1)), ExtReal::Finite(0.0));
        assert_eq!(eval_obstacle(&ind, &CPoint::real(0.2)), ExtReal::Finite(1.0));
        let neg = Obstacle::square_modulus(-1.0, 1);
        assert_eq!(eval_obstacle(&neg, &CPoint::real(0.5)), ExtReal::Finite(-0.25));
    }

    #[test]
    fn log_affine_min_takes_minimum_and_hits_minus_infinity() {
        let ob = Obstacle::LogAffineMin {
            pieces: alloc::vec![
                LogAffine { offset: 0.0, slopes: alloc::vec![2.0] },
                LogAffine { offset: -0.3, slopes: alloc::vec![0.5] },
            ],
        };
        let s = ln(0.5);
        let v = eval_obstacle(&ob, &CPoint::real(0.5)).finite().unwrap();
        assert_eq!(v, (2.0 * s).min(-0.3 + 0.5 * s));
        assert_eq!(eval_obstacle(&ob, &CPoint::real(0.0)), ExtReal::MinusInfinity);
        assert!(ob.validate(1, &PotentialSpec::zero()).is_ok());
    }

    #[test]
    fn negated_potential_sums_to_offset() {
        let psi = PotentialSpec::log_coordinate(0, 1.0);
        let ob = Obstacle::NegatedPotentialOffset { offset: 0.25, potential: psi.clone() };
        assert_eq!(ob.plus_potential(&psi, &CPoint::real(0.0)), ExtReal::Finite(0.25));
        assert_eq!(eval_obstacle(&ob, &CPoint::real(0.0)), ExtReal::PlusInfinity);
        assert!(ob.validate(1, &psi).is_ok());
        assert!(ob.validate(1, &PotentialSpec::zero()).is_err());
    }

    #[test]
    fn shifts_peel_and_negative_slopes_are_rejected() {
        let ob = Obstacle::constant(1.0).shifted(0.5).shifted(0.25);
        let (base, s) = ob.split_shift();
        assert_eq!(base, &Obstacle::constant(1.0));
        assert_eq!(s, 0.75);
        let bad = Obstacle::LogAffineMin {
            pieces: alloc::vec![LogAffine { offset: 0.0, slopes: alloc::vec![-1.0] }],
        };
        assert!(bad.validate(1, &PotentialSpec::zero()).is_err());
    }
}
