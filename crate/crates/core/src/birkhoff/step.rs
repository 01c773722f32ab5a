//! Step functions `h : Ω → ℝᵈ` built from trigonometric polynomials in the
//! coordinates of Ω.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Wave {
    Cos,
    Sin,
}

/// `coeff · wave(2π (freq · ω))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub coeff: f64,
    pub wave: Wave,
    pub freq: [i64; 2],
}

impl TrigTerm {
    pub fn cos(coeff: f64, freq: [i64; 2]) -> Self {
        Self {
            coeff,
            wave: Wave::Cos,
            freq,
        }
    }

    pub fn sin(coeff: f64, freq: [i64; 2]) -> Self {
        Self {
            coeff,
            wave: Wave::Sin,
            freq,
        }
    }

    pub fn eval(&self, omega: Point) -> f64 {
        let arg = TAU * (self.freq[0] as f64 * omega[0] + self.freq[1] as f64 * omega[1]);
        self.coeff
            * match self.wave {
                Wave::Cos => arg.cos(),
                Wave::Sin => arg.sin(),
            }
    }
}

/// A real trigonometric polynomial on the circle or the unit square.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrigPolynomial {
    pub constant: f64,
    pub terms: Vec<TrigTerm>,
}

impl TrigPolynomial {
    pub fn constant(c: f64) -> Self {
        Self {
            constant: c,
            terms: Vec::new(),
        }
    }

    pub fn with_term(mut self, term: TrigTerm) -> Self {
        self.terms.push(term);
        self
    }

    pub fn eval(&self, omega: Point) -> f64 {
        self.constant + self.terms.iter().map(|t| t.eval(omega)).sum::<f64>()
    }

    /// `|c| + Σ |aₖ|`, an upper bound of `|p(ω)|`.
    pub fn sup_bound(&self) -> f64 {
        self.constant.abs() + self.terms.iter().map(|t| t.coeff.abs()).sum::<f64>()
    }

    /// Largest |frequency| along either axis.
    pub fn degree(&self) -> u64 {
        self.terms
            .iter()
            .flat_map(|t| t.freq)
            .map(|f| f.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|t| t.coeff == 0.0)
    }

    fn validate(&self, omega_dim: usize) -> Result<()> {
        if !self.constant.is_finite() || self.terms.iter().any(|t| !t.coeff.is_finite()) {
            return Err(Error::arg("h", "non-finite coefficient"));
        }
        if omega_dim == 1 && self.terms.iter().any(|t| t.freq[1] != 0) {
            return Err(Error::arg(
                "h",
                "a second frequency component needs a two-dimensional Ω",
            ));
        }
        Ok(())
    }
}

/// `h : Ω → ℝᵈ`, one polynomial per walker coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    components: Vec<TrigPolynomial>,
}

impl StepFunction {
    pub fn new(components: Vec<TrigPolynomial>) -> Result<Self> {
        if !(1..=2).contains(&components.len()) {
            return Err(Error::Unsupported(format!("walker dimension {}", components.len())));
        }
        Ok(Self { components })
    }

    /// The constant step `h ≡ v`.
    pub fn constant(v: &[f64]) -> Result<Self> {
        Self::new(v.iter().map(|c| TrigPolynomial::constant(*c)).collect())
    }

    pub fn scalar(p: TrigPolynomial) -> Self {
        Self { components: vec![p] }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[TrigPolynomial] {
        &self.components
    }

    pub fn eval(&self, omega: Point) -> Point {
        let mut out = [0.0; 2];
        for (o, c) in out.iter_mut().zip(&self.components) {
            *o = c.eval(omega);
        }
        out
    }

    pub fn is_constant(&self) -> bool {
        self.components.iter().all(TrigPolynomial::is_constant)
    }

    /// Per-coordinate bound on `|h|`.
    pub fn sup_bound(&self) -> Point {
        let mut out = [0.0; 2];
        for (o, c) in out.iter_mut().zip(&self.components) {
            *o = c.sup_bound();
        }
        out
    }

    pub(crate) fn validate(&self, omega_dim: usize) -> Result<()> {
        self.components.iter().try_for_each(|c| c.validate(omega_dim))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluation() {
        let p = TrigPolynomial::constant(0.5)
            .with_term(TrigTerm::cos(2.0, [1, 0]))
            .with_term(TrigTerm::sin(1.0, [0, 2]));
        let v = p.eval([0.25, 0.125]);
        assert!((v - (0.5 + 0.0 + 1.0)).abs() < 1e-15);
        assert_eq!(p.sup_bound(), 3.5);
        assert_eq!(p.degree(), 2);
        assert!(p.validate(1).is_err());
        assert!(p.validate(2).is_ok());
    }

    #[test]
    fn constant_step() {
        let h = StepFunction::constant(&[1.5, -2.0]).unwrap();
        assert!(h.is_constant());
        assert_eq!(h.eval([0.3, 0.7]), [1.5, -2.0]);
        assert!(StepFunction::constant(&[1.0, 2.0, 3.0]).is_err());
    }
}
