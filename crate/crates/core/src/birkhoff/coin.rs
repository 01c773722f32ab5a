//! Coin densities `ω ↦ ∫ |ψ₀(x, ω)|² dx` over Ω.

use rand::{Rng, RngCore};

use super::step::TrigPolynomial;
use crate::error::{Error, Result};
use crate::measure::Point;
use crate::numeric::neumaier_sum;

const MASS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Uniform,
    /// `|χ(ω)|² / Z` for a real trigonometric amplitude χ.
    Trig {
        amplitude: TrigPolynomial,
        norm: f64,
        bound: f64,
    },
    /// Piecewise constant on `per_axis^dim` equal cells.
    Grid {
        per_axis: usize,
        values: Vec<f64>,
        cumulative: Vec<f64>,
    },
}

/// A probability density with respect to ℙ on the circle or the square.
#[derive(Debug, Clone, PartialEq)]
pub struct CoinDensity {
    omega_dim: usize,
    kind: Kind,
}

impl CoinDensity {
    pub fn uniform(omega_dim: usize) -> Self {
        Self {
            omega_dim,
            kind: Kind::Uniform,
        }
    }

    /// `|χ|²` normalized; the normalizing integral is computed exactly.
    pub fn trig_amplitude(omega_dim: usize, amplitude: TrigPolynomial) -> Result<Self> {
        if omega_dim == 1 && amplitude.terms.iter().any(|t| t.freq[1] != 0) {
            return Err(Error::arg(
                "chi0",
                "a second frequency component needs a two-dimensional Ω",
            ));
        }
        // |χ|² has degree ≤ 2D, which the midpoint rule with more than 2D
        // nodes per axis integrates exactly
        let m = 2 * amplitude.degree() as usize + 2;
        let norm = midpoint_mean(omega_dim, m, |w| amplitude.eval(w).powi(2));
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NotNormalizable(norm));
        }
        let bound = amplitude.sup_bound().powi(2) / norm;
        Ok(Self {
            omega_dim,
            kind: Kind::Trig { amplitude, norm, bound },
        })
    }

    /// Cell values over `per_axis^omega_dim` cells (row-major, first
    /// coordinate slowest), normalized so that their mean is 1.
    pub fn grid(omega_dim: usize, per_axis: usize, values: Vec<f64>) -> Result<Self> {
        if per_axis == 0 || values.len() != per_axis.pow(omega_dim as u32) {
            return Err(Error::arg(
                "coin",
                format!("{} values for {per_axis}^{omega_dim} cells", values.len()),
            ));
        }
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::arg("coin", "coin density values must be finite and nonnegative"));
        }
        let mean = neumaier_sum(values.iter().copied()) / values.len() as f64;
        if !(mean > 0.0) {
            return Err(Error::NotNormalizable(mean));
        }
        let values: Vec<f64> = values.iter().map(|v| v / mean).collect();
        let mut cumulative = Vec::with_capacity(values.len());
        let mut acc = 0.0;
        for v in &values {
            acc += v;
            cumulative.push(acc);
        }
        Ok(Self {
            omega_dim,
            kind: Kind::Grid {
                per_axis,
                values,
                cumulative,
            },
        })
    }

    pub fn omega_dim(&self) -> usize {
        self.omega_dim
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.kind, Kind::Uniform)
    }

    pub fn eval(&self, w: Point) -> f64 {
        match &self.kind {
            Kind::Uniform => 1.0,
            Kind::Trig { amplitude, norm, .. } => amplitude.eval(w).powi(2) / norm,
            Kind::Grid { per_axis, values, .. } => {
                let cell = |c: f64| ((c * *per_axis as f64) as usize).min(per_axis - 1);
                let idx = if self.omega_dim == 1 {
                    cell(w[0])
                } else {
                    cell(w[0]) * per_axis + cell(w[1])
                };
                values[idx]
            }
        }
    }

    /// Quadrature weight of a cell: the density at its centre.
    pub fn cell_weight(&self, cell: [usize; 2], per_axis: usize) -> f64 {
        let centre = |i: usize| (i as f64 + 0.5) / per_axis as f64;
        self.eval([centre(cell[0]), centre(cell[1])])
    }

    /// ∫ density dℙ by the rule used for quadrature on `per_axis` cells.
    pub fn quadrature_mass(&self, per_axis: usize) -> f64 {
        midpoint_mean(self.omega_dim, per_axis, |w| self.eval(w))
    }

    /// Coordinates of ω ~ density·ℙ; `None` if rejection sampling gives up
    /// after `max_tries` proposals.
    pub(crate) fn sample_coords(&self, rng: &mut dyn RngCore, max_tries: usize) -> Option<Point> {
        let uniform = |rng: &mut dyn RngCore| -> Point {
            let u: f64 = rng.gen();
            let v: f64 = if self.omega_dim == 2 { rng.gen() } else { 0.0 };
            [u, v]
        };
        match &self.kind {
            Kind::Uniform => Some(uniform(rng)),
            Kind::Trig { bound, .. } => (0..max_tries).find_map(|_| {
                let w = uniform(rng);
                (rng.gen::<f64>() * bound <= self.eval(w)).then_some(w)
            }),
            Kind::Grid {
                per_axis, cumulative, ..
            } => {
                let total = *cumulative.last().expect("nonempty");
                let target = rng.gen::<f64>() * total;
                let idx = cumulative.partition_point(|c| *c <= target).min(cumulative.len() - 1);
                let m = *per_axis as f64;
                let (i, j) = if self.omega_dim == 1 {
                    (idx, 0)
                } else {
                    (idx / per_axis, idx % per_axis)
                };
                let u: f64 = rng.gen();
                let v: f64 = if self.omega_dim == 2 { rng.gen() } else { 0.0 };
                Some([(i as f64 + u) / m, (j as f64 + v) / m])
            }
        }
    }

    pub(crate) fn validate_mass(&self) -> Result<()> {
        let probe = match &self.kind {
            Kind::Uniform => return Ok(()),
            Kind::Trig { amplitude, .. } => 2 * amplitude.degree() as usize + 2,
            Kind::Grid { per_axis, .. } => *per_axis,
        };
        let mass = self.quadrature_mass(probe);
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::arg("coin", format!("coin density integrates to {mass}")));
        }
        Ok(())
    }
}

/// Mean of `f` over the midpoints of `m^dim` equal cells of `[0, 1)^dim`.
fn midpoint_mean(dim: usize, m: usize, f: impl Fn(Point) -> f64) -> f64 {
    let c = |i: usize| (i as f64 + 0.5) / m as f64;
    let total = if dim == 1 {
        neumaier_sum((0..m).map(|i| f([c(i), 0.0])))
    } else {
        neumaier_sum((0..m * m).map(|k| f([c(k / m), c(k % m)])))
    };
    total / m.pow(dim as u32) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::birkhoff::step::TrigTerm;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn trig_density_is_normalized() {
        let chi = TrigPolynomial::constant(1.0)
            .with_term(TrigTerm::cos(0.8, [1, 0]))
            .with_term(TrigTerm::sin(0.3, [0, 2]));
        let c = CoinDensity::trig_amplitude(2, chi).unwrap();
        // ∫(1 + 0.8 cos + 0.3 sin)² = 1 + 0.32 + 0.045
        let want = 1.0 + 0.32 + 0.045;
        assert!((c.eval([0.0, 0.0]) - 1.8f64.powi(2) / want).abs() < 1e-12);
        for m in [6, 17, 64] {
            assert!((c.quadrature_mass(m) - 1.0).abs() < 1e-12);
        }
        c.validate_mass().unwrap();
    }

    #[test]
    fn grid_density_sampling_hits_cells_in_proportion() {
        let c = CoinDensity::grid(1, 4, vec![1.0, 0.0, 2.0, 1.0]).unwrap();
        assert_eq!(c.eval([0.6, 0.0]), 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut counts = [0usize; 4];
        for _ in 0..40_000 {
            let w = c.sample_coords(&mut rng, 1000).unwrap();
            counts[(w[0] * 4.0) as usize] += 1;
        }
        assert_eq!(counts[1], 0);
        assert!((counts[2] as f64 / 40_000.0 - 0.5).abs() < 0.01);
        assert!(CoinDensity::grid(1, 4, vec![1.0, -1.0, 2.0, 1.0]).is_err());
    }

    #[test]
    fn rejection_sampling_matches_the_density() {
        let c = CoinDensity::trig_amplitude(1, TrigPolynomial::constant(1.0).with_term(TrigTerm::cos(1.0, [1, 0])))
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 100_000;
        // E cos(2πω) under (1 + cos)²/1.5 is 2·(1/2)/1.5
        let mean: f64 = (0..n)
            .map(|_| (std::f64::consts::TAU * c.sample_coords(&mut rng, 1000).unwrap()[0]).cos())
            .sum::<f64>()
            / n as f64;
        assert!((mean - 2.0 / 3.0).abs() < 0.01, "{mean}");
    }
}
