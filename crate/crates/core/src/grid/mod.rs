//! Periodic grid wavefunctions ψ(x, y) on a torus, the discrete Fourier
//! transforms 𝓕₁ (walker axes), 𝓕₂ (coin axes) and the exact shear
//! `(Sψ)(x, y) = ψ(x − y, y)`.
//!
//! The coin axes are self-dual: their spacing is `Δ_y = √(2π/N_y)`, so the
//! transform on the coin axes maps the coin grid onto itself and the coin
//! flip followed by the conditional step stays on one lattice. The walker
//! axes use spacing `Δ_x = Δ_y / refine`, so every coin value is an integer
//! number of walker cells and the shear is pure index arithmetic. The
//! walker box `N_x Δ_x` can be made much larger than the coin box, which is
//! what ballistic spreading needs.

mod fft;
pub mod io;

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::Point;
use crate::numeric::{is_power_of_two, neumaier_sum, par_sum};
use fft::CenteredFft;

/// Largest number of complex values a single grid may hold (1 GiB).
pub const MAX_GRID_LEN: usize = 1 << 26;

/// Points within this many cells of a box face count towards
/// [`GridWavefunction::boundary_mass`].
pub const BOUNDARY_SHELL: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    coin_points: usize,
    walk_points: usize,
    refine: usize,
}

impl GridSpec {
    /// `dim` spatial dimensions, `coin_points` per coin axis,
    /// `walk_points` per walker axis, walker spacing `Δ_y / refine`.
    pub fn new(dim: usize, coin_points: usize, walk_points: usize, refine: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} (supported: 1, 2)")));
        }
        for (name, n) in [("coin_points", coin_points), ("walk_points", walk_points)] {
            if n < 8 || !is_power_of_two(n) {
                return Err(Error::InvalidGrid(format!("{name} = {n} must be a power of two ≥ 8")));
            }
        }
        if refine == 0 {
            return Err(Error::InvalidGrid("refine must be ≥ 1".into()));
        }
        let len = walk_points
            .checked_pow(dim as u32)
            .and_then(|w| coin_points.checked_pow(dim as u32).and_then(|c| w.checked_mul(c)));
        match len {
            Some(l) if l <= MAX_GRID_LEN => {}
            _ => {
                return Err(Error::InvalidGrid(format!(
                    "{walk_points}^{dim} × {coin_points}^{dim} values exceed the {MAX_GRID_LEN} limit"
                )))
            }
        }
        Ok(Self {
            dim,
            coin_points,
            walk_points,
            refine,
        })
    }

    /// Identical walker and coin lattices with `n` points per axis.
    pub fn square(dim: usize, n: usize) -> Result<Self> {
        Self::new(dim, n, n, 1)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coin_points(&self) -> usize {
        self.coin_points
    }

    pub fn walk_points(&self) -> usize {
        self.walk_points
    }

    pub fn refine(&self) -> usize {
        self.refine
    }

    pub fn coin_spacing(&self) -> f64 {
        (2.0 * PI / self.coin_points as f64).sqrt()
    }

    pub fn walk_spacing(&self) -> f64 {
        self.coin_spacing() / self.refine as f64
    }

    /// Half-length `L_y` of the coin box `[−L_y, L_y)`.
    pub fn coin_half_length(&self) -> f64 {
        0.5 * self.coin_points as f64 * self.coin_spacing()
    }

    /// Half-length `L_x` of the walker box `[−L_x, L_x)`.
    pub fn walk_half_length(&self) -> f64 {
        0.5 * self.walk_points as f64 * self.walk_spacing()
    }

    /// Spacing `π / L_x` of the walker frequency grid.
    pub fn walk_frequency_spacing(&self) -> f64 {
        PI / self.walk_half_length()
    }

    pub fn x_coord(&self, i: usize) -> f64 {
        (i as f64 - (self.walk_points / 2) as f64) * self.walk_spacing()
    }

    pub fn y_coord(&self, j: usize) -> f64 {
        (j as f64 - (self.coin_points / 2) as f64) * self.coin_spacing()
    }

    pub fn zeta_coord(&self, k: usize) -> f64 {
        (k as f64 - (self.walk_points / 2) as f64) * self.walk_frequency_spacing()
    }

    /// Number of walker sites, `N_x^d`.
    pub fn walk_len(&self) -> usize {
        self.walk_points.pow(self.dim as u32)
    }

    /// Number of coin sites, `N_y^d`.
    pub fn coin_len(&self) -> usize {
        self.coin_points.pow(self.dim as u32)
    }

    pub fn len(&self) -> usize {
        self.walk_len() * self.coin_len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Array shape, walker axes first, last axis fastest.
    fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.walk_points; self.dim];
        d.extend(std::iter::repeat_n(self.coin_points, self.dim));
        d
    }

    /// Multi-index of a flat walker (or coin) index with `points` per axis.
    pub(crate) fn unflatten(&self, flat: usize, points: usize) -> [usize; 2] {
        if self.dim == 1 {
            [flat, 0]
        } else {
            [flat / points, flat % points]
        }
    }

    pub fn x_point(&self, x_flat: usize) -> Point {
        let m = self.unflatten(x_flat, self.walk_points);
        let mut p = [self.x_coord(m[0]), 0.0];
        if self.dim == 2 {
            p[1] = self.x_coord(m[1]);
        }
        p
    }

    pub fn y_point(&self, y_flat: usize) -> Point {
        let m = self.unflatten(y_flat, self.coin_points);
        let mut p = [self.y_coord(m[0]), 0.0];
        if self.dim == 2 {
            p[1] = self.y_coord(m[1]);
        }
        p
    }

    pub fn zeta_point(&self, k_flat: usize) -> Point {
        let m = self.unflatten(k_flat, self.walk_points);
        let mut p = [self.zeta_coord(m[0]), 0.0];
        if self.dim == 2 {
            p[1] = self.zeta_coord(m[1]);
        }
        p
    }
}

/// Representation of the walker axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Position,
    Frequency,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axes {
    /// Walker axes only (𝓕₁).
    X,
    /// Coin axes only (𝓕₂).
    Y,
    /// All axes (𝓕 on L²(ℝ²ᵈ)).
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Complex values on the walker × coin grid, indexed
/// `x_flat * coin_len + y_flat`.
///
/// The coin axes are self-dual, so only the walker axes carry a
/// representation tag.
#[derive(Debug, Clone, PartialEq)]
pub struct GridWavefunction {
    spec: GridSpec,
    x_domain: Domain,
    values: Vec<Complex64>,
}

impl GridWavefunction {
    pub fn zeros(spec: GridSpec) -> Self {
        Self {
            spec,
            x_domain: Domain::Position,
            values: vec![Complex64::default(); spec.len()],
        }
    }

    pub fn from_values(spec: GridSpec, x_domain: Domain, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {}",
                values.len(),
                spec.len()
            )));
        }
        Ok(Self { spec, x_domain, values })
    }

    /// Samples `f(x, y)` at every grid point (walker axes in position).
    pub fn from_fn<F>(spec: GridSpec, f: F) -> Self
    where
        F: Fn(Point, Point) -> Complex64 + Sync,
    {
        let coin_len = spec.coin_len();
        let ys: Vec<Point> = (0..coin_len).map(|j| spec.y_point(j)).collect();
        let mut values = vec![Complex64::default(); spec.len()];
        values.par_chunks_mut(coin_len).enumerate().for_each(|(i, row)| {
            let x = spec.x_point(i);
            for (v, y) in row.iter_mut().zip(&ys) {
                *v = f(x, *y);
            }
        });
        Self {
            spec,
            x_domain: Domain::Position,
            values,
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn x_domain(&self) -> Domain {
        self.x_domain
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// The same function on a walker box with `walk_points` points per axis
    /// (same spacing, same coin grid), zero outside the original box.
    pub fn zero_padded(&self, walk_points: usize) -> Result<Self> {
        if self.x_domain != Domain::Position {
            return Err(Error::GridMismatch("padding needs the position representation".into()));
        }
        let old = self.spec;
        if walk_points < old.walk_points {
            return Err(Error::arg("walk_points", "padding cannot shrink the box"));
        }
        let spec = GridSpec::new(old.dim, old.coin_points, walk_points, old.refine)?;
        let shift = (walk_points - old.walk_points) / 2;
        let coin_len = old.coin_len();
        let mut out = Self::zeros(spec);
        for i in 0..old.walk_len() {
            let m = old.unflatten(i, old.walk_points);
            let target = if old.dim == 1 {
                m[0] + shift
            } else {
                (m[0] + shift) * walk_points + m[1] + shift
            };
            out.values[target * coin_len..(target + 1) * coin_len].copy_from_slice(self.row(i));
        }
        Ok(out)
    }

    pub fn get(&self, x_flat: usize, y_flat: usize) -> Complex64 {
        self.values[x_flat * self.spec.coin_len() + y_flat]
    }

    /// Row of coin values at walker index `x_flat`.
    pub fn row(&self, x_flat: usize) -> &[Complex64] {
        let c = self.spec.coin_len();
        &self.values[x_flat * c..(x_flat + 1) * c]
    }

    /// Volume of one grid cell in the current representation.
    pub fn cell_volume(&self) -> f64 {
        let dx = match self.x_domain {
            Domain::Position => self.spec.walk_spacing(),
            Domain::Frequency => self.spec.walk_frequency_spacing(),
        };
        (dx * self.spec.coin_spacing()).powi(self.spec.dim as i32)
    }

    /// Squared L² norm, `cell · Σ |ψ|²`.
    pub fn norm_sqr(&self) -> f64 {
        self.cell_volume() * par_sum(self.values.len(), |i| self.values[i].norm_sqr())
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Rescales to unit L² norm and returns the norm it had before.
    pub fn normalize(&mut self) -> Result<f64> {
        let norm = self.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NotNormalizable(norm));
        }
        let inv = 1.0 / norm;
        self.values.par_iter_mut().for_each(|v| *v *= inv);
        Ok(norm)
    }

    /// Fraction of the total probability within [`BOUNDARY_SHELL`] cells of
    /// any face of the walker or coin box.
    pub fn boundary_mass(&self) -> f64 {
        let spec = self.spec;
        let near = |i: usize, n: usize| i < BOUNDARY_SHELL || i + BOUNDARY_SHELL >= n;
        let coin_len = spec.coin_len();
        let coin_edge: Vec<bool> = (0..coin_len)
            .map(|j| {
                let m = spec.unflatten(j, spec.coin_points);
                (0..spec.dim).any(|a| near(m[a], spec.coin_points))
            })
            .collect();
        let total = par_sum(self.values.len(), |i| self.values[i].norm_sqr());
        if total == 0.0 {
            return 0.0;
        }
        let shell = par_sum(spec.walk_len(), |i| {
            let m = spec.unflatten(i, spec.walk_points);
            let row = self.row(i);
            if (0..spec.dim).any(|a| near(m[a], spec.walk_points)) {
                neumaier_sum(row.iter().map(|v| v.norm_sqr()))
            } else {
                neumaier_sum(
                    row.iter()
                        .zip(&coin_edge)
                        .filter(|(_, e)| **e)
                        .map(|(v, _)| v.norm_sqr()),
                )
            }
        });
        shell / total
    }

    /// Discrete approximation of the continuous transform with kernel
    /// `(2π)^{−d/2} e^{∓i x·ζ}` on the selected axes.
    pub fn dft(&self, axes: Axes, direction: Direction) -> Result<Self> {
        let mut out = self.clone();
        out.dft_in_place(axes, direction)?;
        Ok(out)
    }

    pub fn dft_in_place(&mut self, axes: Axes, direction: Direction) -> Result<()> {
        let spec = self.spec;
        let d = spec.dim;
        let do_x = matches!(axes, Axes::X | Axes::Both);
        let do_y = matches!(axes, Axes::Y | Axes::Both);
        if do_x {
            let expected = match direction {
                Direction::Forward => Domain::Position,
                Direction::Inverse => Domain::Frequency,
            };
            if self.x_domain != expected {
                return Err(Error::GridMismatch(format!(
                    "{direction:?} walker transform applied to a {:?}-domain wavefunction",
                    self.x_domain
                )));
            }
        }
        let fft_dir = match direction {
            Direction::Forward => FftDirection::Forward,
            Direction::Inverse => FftDirection::Inverse,
        };
        let dims = spec.dims();
        if do_x {
            let spacing = match direction {
                Direction::Forward => spec.walk_spacing(),
                Direction::Inverse => spec.walk_frequency_spacing(),
            };
            let plan = CenteredFft::new(spec.walk_points, fft_dir);
            let scale = spacing / (2.0 * PI).sqrt();
            for axis in 0..d {
                plan.apply(&mut self.values, &dims, axis, scale);
            }
            self.x_domain = match direction {
                Direction::Forward => Domain::Frequency,
                Direction::Inverse => Domain::Position,
            };
        }
        if do_y {
            let plan = CenteredFft::new(spec.coin_points, fft_dir);
            let scale = spec.coin_spacing() / (2.0 * PI).sqrt();
            for axis in d..2 * d {
                plan.apply(&mut self.values, &dims, axis, scale);
            }
        }
        Ok(())
    }

    /// `(Sψ)(x, y) = ψ(x − y, y)` by cyclic index arithmetic.
    pub fn shear(&self) -> Result<Self> {
        self.shear_by(1)
    }

    /// `(S⁻¹ψ)(x, y) = ψ(x + y, y)`.
    pub fn shear_inverse(&self) -> Result<Self> {
        self.shear_by(-1)
    }

    fn shear_by(&self, sign: i64) -> Result<Self> {
        if self.x_domain != Domain::Position {
            return Err(Error::GridMismatch(
                "shear needs the walker axes in position representation".into(),
            ));
        }
        let spec = self.spec;
        let (nx, ny) = (spec.walk_points as i64, spec.coin_points as i64);
        let r = spec.refine as i64;
        let coin_len = spec.coin_len();
        // walker-index displacement per coin index along one axis
        let shift: Vec<i64> = (0..ny).map(|j| sign * r * (j - ny / 2)).collect();
        let wrap = |i: i64| i.rem_euclid(nx) as usize;
        let mut out = vec![Complex64::default(); self.values.len()];
        out.par_chunks_mut(coin_len)
            .enumerate()
            .for_each(|(x_flat, row)| match spec.dim {
                1 => {
                    let i = x_flat as i64;
                    for (j, v) in row.iter_mut().enumerate() {
                        *v = self.values[wrap(i - shift[j]) * coin_len + j];
                    }
                }
                _ => {
                    let (i1, i2) = ((x_flat / spec.walk_points) as i64, (x_flat % spec.walk_points) as i64);
                    for (y_flat, v) in row.iter_mut().enumerate() {
                        let (j1, j2) = (y_flat / spec.coin_points, y_flat % spec.coin_points);
                        let src = wrap(i1 - shift[j1]) * spec.walk_points + wrap(i2 - shift[j2]);
                        *v = self.values[src * coin_len + y_flat];
                    }
                }
            });
        Ok(Self {
            spec,
            x_domain: self.x_domain,
            values: out,
        })
    }
}

pub fn dft(psi: &GridWavefunction, axes: Axes, direction: Direction) -> Result<GridWavefunction> {
    psi.dft(axes, direction)
}

pub fn shear(psi: &GridWavefunction) -> Result<GridWavefunction> {
    psi.shear()
}

pub fn boundary_mass(psi: &GridWavefunction) -> f64 {
    psi.boundary_mass()
}
