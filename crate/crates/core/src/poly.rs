//! Dense one-variable complex polynomials (coefficient `k` multiplies `t^k`).

use alloc::vec;
use alloc::vec::Vec;

use crate::domain::C64;
use crate::math::modulus;

#[derive(Clone, Debug, PartialEq)]
pub struct Poly1 {
    pub coeffs: Vec<C64>,
}

impl Poly1 {
    pub fn constant(c: C64) -> Poly1 {
        Poly1 { coeffs: vec![c] }
    }

    pub fn one() -> Poly1 {
        Poly1::constant(C64::new(1.0, 0.0))
    }

    pub fn zero() -> Poly1 {
        Poly1::constant(C64::new(0.0, 0.0))
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, t: C64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    pub fn mul(&self, other: &Poly1) -> Poly1 {
        let mut out = vec![C64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly1 { coeffs: out }
    }

    pub fn add_scaled(&mut self, other: &Poly1, scale: C64) {
        if other.coeffs.len() > self.coeffs.len() {
            self.coeffs.resize(other.coeffs.len(), C64::new(0.0, 0.0));
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b * scale;
        }
    }

    pub fn pow(&self, mut e: u32) -> Poly1 {
        let mut base = self.clone();
        let mut acc = Poly1::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn derivative(&self) -> Poly1 {
        if self.coeffs.len() <= 1 {
            return Poly1::zero();
        }
        Poly1 {
            coeffs: self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(k, c)| c * (k as f64 + 1.0))
                .collect(),
        }
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| modulus(*c)).fold(0.0, f64::max)
    }

    /// Drops high-order coefficients with modulus `<= rel * max|coeff|`.
    pub fn trimmed(&self, rel: f64) -> Poly1 {
        let cut = rel * self.max_abs_coeff();
        let mut len = self.coeffs.len();
        while len > 1 && modulus(self.coeffs[len - 1]) <= cut {
            len -= 1;
        }
        Poly1 { coeffs: self.coeffs[..len].to_vec() }
    }
}
