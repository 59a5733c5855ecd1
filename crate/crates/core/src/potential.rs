//! Global potentials `ψ = Σ λ_j log|g_j| + smooth`, hence `ω = dd^c ψ`.

use alloc::vec;
use alloc::vec::Vec;

use crate::disc::DiscParams;
use crate::domain::{CPoint, C64};
use crate::ext::ExtReal;
use crate::math::{cpowi, ln, modulus, powi};
use crate::poly::Poly1;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Monomial {
    pub coef: C64,
    /// Exponent of each coordinate; missing entries count as zero.
    #[cfg_attr(feature = "serde", serde(rename = "exp"))]
    pub exps: Vec<u32>,
}

/// A polynomial in n ≤ 2 complex variables.
#[derive(Clone, Debug, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(transparent))]
pub struct Polynomial {
    pub terms: Vec<Monomial>,
}

impl Polynomial {
    /// The coordinate function `z_i`.
    pub fn coordinate(i: usize) -> Polynomial {
        let mut exps = vec![0; i + 1];
        exps[i] = 1;
        Polynomial { terms: vec![Monomial { coef: C64::new(1.0, 0.0), exps }] }
    }

    pub fn eval(&self, p: &CPoint) -> C64 {
        let z = p.coords();
        self.terms.iter().fold(C64::new(0.0, 0.0), |acc, m| {
            let mut v = m.coef;
            for (i, e) in m.exps.iter().enumerate() {
                if *e > 0 {
                    v *= cpowi(z.get(i).copied().unwrap_or_default(), *e);
                }
            }
            acc + v
        })
    }

    /// Highest coordinate index used, plus one.
    pub fn arity(&self) -> usize {
        self.terms
            .iter()
            .map(|m| m.exps.iter().rposition(|e| *e > 0).map_or(0, |i| i + 1))
            .max()
            .unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.arity() == 0
    }

    /// A single monomial, hence `|g|` depends only on the moduli `|z_i|`.
    pub fn is_monomial(&self) -> bool {
        self.terms.iter().filter(|m| m.coef != C64::new(0.0, 0.0)).count() <= 1
    }

    /// `g ∘ f` as a polynomial in the disc variable, together with a bound on
    /// `sup_{|t| ≤ 1} |g ∘ f|` built from coefficient moduli.
    pub fn compose(&self, f: &DiscParams) -> (Poly1, f64) {
        let rows: Vec<Poly1> = (0..f.dim()).map(|i| f.coordinate_poly(i)).collect();
        let row_bounds: Vec<f64> =
            rows.iter().map(|r| r.coeffs.iter().map(|c| modulus(*c)).sum()).collect();
        let mut out = Poly1::zero();
        let mut bound = 0.0;
        for m in &self.terms {
            let mut term = Poly1::constant(m.coef);
            let mut b = modulus(m.coef);
            for (i, e) in m.exps.iter().enumerate() {
                if *e > 0 {
                    term = term.mul(&rows[i].pow(*e));
                    b *= powi(row_bounds[i], *e);
                }
            }
            out.add_scaled(&term, C64::new(1.0, 0.0));
            bound += b;
        }
        (out, bound)
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Atom {
    pub weight: f64,
    pub poly: Polynomial,
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "kind", rename_all = "kebab-case")
)]
pub enum SmoothPart {
    #[default]
    Zero,
    /// `c |z|^2` with `c ≥ 0`.
    ScaledSquareModulus { c: f64 },
}

impl SmoothPart {
    pub fn eval(&self, p: &CPoint) -> f64 {
        match self {
            SmoothPart::Zero => 0.0,
            SmoothPart::ScaledSquareModulus { c } => {
                c * p.coords().iter().map(|z| z.norm_sqr()).sum::<f64>()
            }
        }
    }

    pub fn coefficient(&self) -> f64 {
        match self {
            SmoothPart::Zero => 0.0,
            SmoothPart::ScaledSquareModulus { c } => *c,
        }
    }
}

/// Global potential ψ of ω. Plurisubharmonic by construction when all weights and the
/// smooth coefficient are nonnegative.
#[derive(Clone, Debug, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PotentialSpec {
    #[cfg_attr(feature = "serde", serde(default))]
    pub atoms: Vec<Atom>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub smooth: SmoothPart,
}

impl PotentialSpec {
    pub fn zero() -> PotentialSpec {
        PotentialSpec::default()
    }

    /// `λ log|z_i|`.
    pub fn log_coordinate(i: usize, weight: f64) -> PotentialSpec {
        PotentialSpec {
            atoms: vec![Atom { weight, poly: Polynomial::coordinate(i) }],
            smooth: SmoothPart::Zero,
        }
    }

    pub fn square_modulus(c: f64) -> PotentialSpec {
        PotentialSpec { atoms: Vec::new(), smooth: SmoothPart::ScaledSquareModulus { c } }
    }

    pub fn validate(&self, dim: usize) -> Result<(), &'static str> {
        for a in &self.atoms {
            if !(a.weight.is_finite() && a.weight >= 0.0) {
                return Err("atom weights must be finite and nonnegative");
            }
            if a.poly.arity() > dim {
                return Err("atom polynomial uses more variables than the domain has");
            }
            if a.poly.terms.iter().any(|m| !(m.coef.re.is_finite() && m.coef.im.is_finite())) {
                return Err("atom coefficients must be finite");
            }
        }
        let c = self.smooth.coefficient();
        if !(c.is_finite() && c >= 0.0) {
            return Err("smooth coefficient must be finite and nonnegative");
        }
        Ok(())
    }

    /// Atoms that actually contribute mass.
    pub fn active_atoms(&self) -> impl Iterator<Item = &Atom> {
        self.atoms.iter().filter(|a| a.weight > 0.0 && !a.poly.is_constant())
    }

    /// ω = 0 (ψ pluriharmonic, here: constant atoms and no smooth part).
    pub fn is_zero_current(&self) -> bool {
        self.active_atoms().next().is_none() && self.smooth.coefficient() == 0.0
    }

    pub fn has_singular_set(&self) -> bool {
        self.active_atoms().next().is_some()
    }

    pub fn is_torus_invariant(&self) -> bool {
        self.atoms.iter().all(|a| a.poly.is_monomial())
    }

    pub fn is_singular(&self, p: &CPoint) -> bool {
        eval_potential(self, p).is_minus_infinity()
    }
}

/// `ψ(p) = Σ λ_j log|g_j(p)| + smooth(p)`; `-∞` exactly when some active `g_j(p) = 0`.
pub fn eval_potential(spec: &PotentialSpec, p: &CPoint) -> ExtReal {
    let mut acc = spec.smooth.eval(p);
    for a in &spec.atoms {
        if a.weight == 0.0 {
            continue;
        }
        let g = a.poly.eval(p);
        if g.re == 0.0 && g.im == 0.0 {
            return ExtReal::MinusInfinity;
        }
        acc += a.weight * ln(modulus(g));
    }
    ExtReal::from_f64(acc)
}
