//! Product initial states `ψ₀(x, y) = φ₀(x) χ₀(y)` built from one-dimensional
//! profiles.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, RngCore};
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, GridWavefunction};
use crate::measure::Point;

/// A normalized amplitude on ℝ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Profile {
    /// `(πw²)^{-1/4} e^{−(x−c)²/(2w²)} e^{ikx}`, so `|φ|²` is normal with
    /// mean `c` and variance `w²/2`.
    Gaussian { center: f64, width: f64, momentum: f64 },
    /// `(b − a)^{-1/2}` on `[a, b)`.
    Box { a: f64, b: f64 },
}

impl Profile {
    /// The standard Gaussian `π^{-1/4} e^{−x²/2}`.
    pub fn standard_gaussian() -> Self {
        Profile::Gaussian {
            center: 0.0,
            width: 1.0,
            momentum: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Profile::Gaussian {
                center,
                width,
                momentum,
            } => {
                if !(width > 0.0) || !width.is_finite() || !center.is_finite() || !momentum.is_finite() {
                    return Err(Error::arg("width", format!("gaussian width {width} must be positive")));
                }
            }
            Profile::Box { a, b } => {
                if !(a < b) || !a.is_finite() || !b.is_finite() {
                    return Err(Error::arg("box", format!("box [{a}, {b}) is empty")));
                }
            }
        }
        Ok(())
    }

    pub fn amplitude(&self, x: f64) -> Complex64 {
        match *self {
            Profile::Gaussian {
                center,
                width,
                momentum,
            } => {
                let z = (x - center) / width;
                let r = (PI * width * width).powf(-0.25) * (-0.5 * z * z).exp();
                Complex64::from_polar(r, momentum * x)
            }
            Profile::Box { a, b } => {
                if (a..b).contains(&x) {
                    Complex64::new((b - a).powf(-0.5), 0.0)
                } else {
                    Complex64::default()
                }
            }
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        self.amplitude(x).norm_sqr()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Profile::Gaussian { center, width, .. } => {
                // variance w²/2, so the standardized argument is (x − c)/w
                0.5 * libm::erfc(-(x - center) / width)
            }
            Profile::Box { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
        }
    }

    pub fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        match *self {
            Profile::Gaussian { center, width, .. } => {
                let normal = Normal::new(center, width / 2f64.sqrt()).expect("validated width");
                normal.sample(rng)
            }
            Profile::Box { a, b } => a + (b - a) * rng.gen::<f64>(),
        }
    }

    /// An interval outside of which `|φ|²` carries less than about 1e−30.
    pub fn support_hint(&self) -> (f64, f64) {
        match *self {
            Profile::Gaussian { center, width, .. } => (center - 12.0 * width, center + 12.0 * width),
            Profile::Box { a, b } => (a, b),
        }
    }
}

/// `φ(x₁) φ(x₂) …`, one profile per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductProfile {
    axes: Vec<Profile>,
}

impl ProductProfile {
    pub fn new(axes: Vec<Profile>) -> Result<Self> {
        if !(1..=2).contains(&axes.len()) {
            return Err(Error::Unsupported(format!("{} profile axes", axes.len())));
        }
        axes.iter().try_for_each(Profile::validate)?;
        Ok(Self { axes })
    }

    /// The same profile on each of `dim` axes.
    pub fn isotropic(profile: Profile, dim: usize) -> Result<Self> {
        Self::new(vec![profile; dim])
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Profile] {
        &self.axes
    }

    pub fn amplitude(&self, p: Point) -> Complex64 {
        self.axes.iter().zip(p).map(|(f, x)| f.amplitude(x)).product()
    }

    pub fn density(&self, p: Point) -> f64 {
        self.amplitude(p).norm_sqr()
    }

    /// Mass of the box `[lo, hi)` (only the first `dim` slots are read).
    pub fn box_mass(&self, lo: Point, hi: Point) -> f64 {
        self.axes
            .iter()
            .enumerate()
            .map(|(i, f)| f.cdf(hi[i]) - f.cdf(lo[i]))
            .product()
    }

    pub fn sample(&self, rng: &mut dyn RngCore) -> Point {
        let mut p = [0.0; 2];
        for (v, f) in p.iter_mut().zip(&self.axes) {
            *v = f.sample(rng);
        }
        p
    }
}

/// Samples `φ₀(x) χ₀(y)` on the grid and normalizes it on the grid; returns
/// the state and its norm before normalization.
pub fn product_grid_state(
    spec: GridSpec,
    phi0: &ProductProfile,
    chi0: &ProductProfile,
) -> Result<(GridWavefunction, f64)> {
    if phi0.dim() != spec.dim() || chi0.dim() != spec.dim() {
        return Err(Error::GridMismatch(format!(
            "profiles of dimension {}/{} on a {}-dimensional grid",
            phi0.dim(),
            chi0.dim(),
            spec.dim()
        )));
    }
    let coin: Vec<Complex64> = (0..spec.coin_len()).map(|j| chi0.amplitude(spec.y_point(j))).collect();
    let mut psi = GridWavefunction::zeros(spec);
    for (i, row) in psi.values_mut().chunks_mut(spec.coin_len()).enumerate() {
        let a = phi0.amplitude(spec.x_point(i));
        for (v, c) in row.iter_mut().zip(&coin) {
            *v = a * c;
        }
    }
    let before = psi.normalize()?;
    Ok((psi, before))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn trapezoid(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
        let h = (hi - lo) / n as f64;
        (0..=n)
            .map(|i| {
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                w * f(lo + i as f64 * h)
            })
            .sum::<f64>()
            * h
    }

    #[test]
    fn gaussian_is_normalized_and_cdf_matches() {
        let g = Profile::Gaussian {
            center: 0.7,
            width: 1.3,
            momentum: 2.0,
        };
        assert!((trapezoid(|x| g.density(x), -20.0, 20.0, 40_000) - 1.0).abs() < 1e-10);
        for t in [-1.0, 0.2, 0.7, 3.0] {
            let want = trapezoid(|x| g.density(x), -20.0, t, 40_000);
            assert!((g.cdf(t) - want).abs() < 1e-8, "{t}");
        }
    }

    #[test]
    fn box_profile() {
        let b = Profile::Box { a: -1.0, b: 3.0 };
        assert_eq!(b.density(0.0), 0.25);
        assert_eq!(b.density(3.0), 0.0);
        assert_eq!(b.cdf(1.0), 0.5);
        assert!(Profile::Box { a: 1.0, b: 1.0 }.validate().is_err());
    }

    #[test]
    fn samples_follow_the_density() {
        let g = Profile::Gaussian {
            center: 1.0,
            width: 2.0,
            momentum: 0.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| g.sample(&mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        // variance w²/2 = 2
        assert!((mean - 1.0).abs() < 0.02);
        assert!((var - 2.0).abs() < 0.05);
    }

    #[test]
    fn product_state_on_a_grid() {
        let spec = GridSpec::new(2, 16, 32, 1).unwrap();
        let g = ProductProfile::isotropic(Profile::standard_gaussian(), 2).unwrap();
        let (psi, before) = product_grid_state(spec, &g, &g).unwrap();
        assert!((before - 1.0).abs() < 1e-6);
        assert!((psi.norm() - 1.0).abs() < 1e-12);
        let one = ProductProfile::isotropic(Profile::standard_gaussian(), 1).unwrap();
        assert!(product_grid_state(spec, &one, &g).is_err());
    }
}
