//! Real probability densities tabulated on a uniform grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::Point;
use crate::numeric::neumaier_sum;

/// What a grid value stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Binning {
    /// Point values of a smooth density at the grid nodes.
    Samples,
    /// Exact averages of the density over the cell centred on each node.
    CellAverages,
}

/// Density values on the nodes `origin + i·spacing`, `i < points`, along each
/// of `dim` axes (row-major, last axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOnGrid {
    dim: usize,
    origin: f64,
    spacing: f64,
    points: usize,
    binning: Binning,
    values: Vec<f64>,
}

impl DensityOnGrid {
    pub fn new(
        dim: usize,
        origin: f64,
        spacing: f64,
        points: usize,
        binning: Binning,
        values: Vec<f64>,
    ) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::Unsupported(format!("density dimension {dim}")));
        }
        if !(spacing > 0.0) || !spacing.is_finite() || !origin.is_finite() {
            return Err(Error::arg(
                "spacing",
                format!("grid spacing {spacing}, origin {origin}"),
            ));
        }
        if points == 0 || values.len() != points.pow(dim as u32) {
            return Err(Error::arg(
                "values",
                format!("{} values for {points}^{dim} nodes", values.len()),
            ));
        }
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::arg("values", "densities must be finite and nonnegative"));
        }
        Ok(Self {
            dim,
            origin,
            spacing,
            points,
            binning,
            values,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn binning(&self) -> Binning {
        self.binning
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.spacing
    }

    pub fn node(&self, flat: usize) -> Point {
        if self.dim == 1 {
            [self.coord(flat), 0.0]
        } else {
            [self.coord(flat / self.points), self.coord(flat % self.points)]
        }
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim as i32)
    }

    /// `Δᵈ Σ values`.
    pub fn total_mass(&self) -> f64 {
        self.cell_volume() * neumaier_sum(self.values.iter().copied())
    }

    /// One-dimensional marginal along `axis` (same grid, same binning).
    pub fn marginal(&self, axis: usize) -> DensityOnGrid {
        if self.dim == 1 {
            return self.clone();
        }
        let n = self.points;
        let values = (0..n)
            .map(|i| {
                self.spacing
                    * neumaier_sum((0..n).map(|j| {
                        if axis == 0 {
                            self.values[i * n + j]
                        } else {
                            self.values[j * n + i]
                        }
                    }))
            })
            .collect();
        DensityOnGrid {
            dim: 1,
            origin: self.origin,
            spacing: self.spacing,
            points: n,
            binning: self.binning,
            values,
        }
    }

    /// `Qₙ(x) = nᵈ Pₙ(n x)` on the grid contracted by `n`; bins are relabelled,
    /// not resampled.
    pub fn rescaled(&self, n: usize) -> Result<DensityOnGrid> {
        if n == 0 {
            return Err(Error::arg("n", "rescaling needs n ≥ 1"));
        }
        let s = n as f64;
        let factor = s.powi(self.dim as i32);
        Ok(DensityOnGrid {
            dim: self.dim,
            origin: self.origin / s,
            spacing: self.spacing / s,
            points: self.points,
            binning: self.binning,
            values: self.values.iter().map(|v| v * factor).collect(),
        })
    }
}

/// Free-function form of [`DensityOnGrid::rescaled`].
pub fn rescaled_density(p: &DensityOnGrid, n: usize) -> Result<DensityOnGrid> {
    p.rescaled(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spike(at: usize) -> DensityOnGrid {
        let mut v = vec![0.0; 21];
        v[at] = 1.0 / 0.5;
        DensityOnGrid::new(1, -5.0, 0.5, 21, Binning::CellAverages, v).unwrap()
    }

    #[test]
    fn rescaling_relabels_bins() {
        let p = spike(16); // x0 = 3
        assert_eq!(p.rescaled(1).unwrap(), p);
        let q = p.rescaled(4).unwrap();
        assert!((q.coord(16) - 0.75).abs() < 1e-15);
        assert!((q.total_mass() - 1.0).abs() < 1e-15);
        assert!(p.rescaled(0).is_err());
    }

    #[test]
    fn rescaling_preserves_mass_in_two_dimensions() {
        let v: Vec<f64> = (0..64).map(|i| (i % 7) as f64).collect();
        let p = DensityOnGrid::new(2, -1.0, 0.25, 8, Binning::Samples, v).unwrap();
        let q = p.rescaled(3).unwrap();
        assert!((q.total_mass() - p.total_mass()).abs() < 1e-12);
        let m = p.marginal(1);
        assert!((m.total_mass() - p.total_mass()).abs() < 1e-12);
    }

    #[test]
    fn rejects_negative_values() {
        assert!(DensityOnGrid::new(1, 0.0, 1.0, 2, Binning::Samples, vec![1.0, -0.1]).is_err());
        assert!(DensityOnGrid::new(1, 0.0, 0.0, 1, Binning::Samples, vec![1.0]).is_err());
    }
}
