//! Weighted point-mass measures on ℝ or ℝ².

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::neumaier_sum;

/// A point of ℝᵈ for d ∈ {1, 2}. In one dimension the second slot is zero.
pub type Point = [f64; 2];

const MASS_TOL: f64 = 1e-12;

/// Provenance recorded alongside Monte Carlo measures.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub samples: usize,
    pub seed: Option<u64>,
    /// Walk horizon the atoms were drawn at, if any.
    pub n: Option<usize>,
    /// Averaging horizon of a Birkhoff-average limit estimate.
    pub n_avg: Option<usize>,
    /// Fraction of atoms whose Birkhoff average at `n_avg` and `n_avg / 2`
    /// agree to within the stabilization tolerance.
    pub stabilized_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    dim: usize,
    points: Vec<Point>,
    weights: Vec<f64>,
    pub meta: SampleMeta,
}

impl EmpiricalMeasure {
    pub fn new(dim: usize, points: Vec<Point>, weights: Vec<f64>) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::Unsupported(format!("measure dimension {dim}")));
        }
        if points.len() != weights.len() {
            return Err(Error::arg(
                "weights",
                format!("{} weights for {} atoms", weights.len(), points.len()),
            ));
        }
        if points.is_empty() {
            return Err(Error::arg("points", "a measure needs at least one atom"));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return Err(Error::arg("weights", format!("negative or non-finite weight {w}")));
        }
        if points.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(Error::arg("points", "non-finite atom"));
        }
        let total = neumaier_sum(weights.iter().copied());
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::arg("weights", format!("total mass {total} is not 1")));
        }
        let samples = points.len();
        Ok(Self {
            dim,
            points,
            weights,
            meta: SampleMeta {
                samples,
                ..SampleMeta::default()
            },
        })
    }

    /// Equal weights `1 / len`.
    pub fn uniform(dim: usize, points: Vec<Point>) -> Result<Self> {
        let w = 1.0 / points.len().max(1) as f64;
        let weights = vec![w; points.len()];
        Self::new(dim, points, weights)
    }

    pub fn point_mass(dim: usize, at: Point) -> Result<Self> {
        Self::new(dim, vec![at], vec![1.0])
    }

    pub fn with_meta(mut self, meta: SampleMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        neumaier_sum(self.weights.iter().copied())
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&Point, f64)> + '_ {
        self.points.iter().zip(self.weights.iter().copied())
    }

    /// The one-dimensional marginal along `axis` as (coordinate, weight) pairs.
    pub fn marginal(&self, axis: usize) -> Vec<(f64, f64)> {
        self.atoms().map(|(p, w)| (p[axis], w)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_weights() {
        assert!(EmpiricalMeasure::new(1, vec![[0.0, 0.0]], vec![0.5]).is_err());
        assert!(EmpiricalMeasure::new(1, vec![[0.0, 0.0]; 2], vec![1.5, -0.5]).is_err());
        assert!(EmpiricalMeasure::new(3, vec![[0.0, 0.0]], vec![1.0]).is_err());
        assert!(EmpiricalMeasure::new(1, vec![], vec![]).is_err());
    }

    #[test]
    fn uniform_weights_sum_to_one() {
        let pts = vec![[0.25, 0.0]; 100_000];
        let m = EmpiricalMeasure::uniform(1, pts).unwrap();
        assert!((m.total_mass() - 1.0).abs() < 1e-12);
    }
}
