//! The Birkhoff walk: the coin space is `L²(Ω, ℙ)` and the coin flip is
//! composition with an invertible measure-preserving map `T`.
//!
//! The walk is evolved through its closed form. After `n` steps the walker
//! sits at `x + Σ_{j=0}^{n−1} h(Tʲω)`, so with `ω′ = Tⁿω`
//!
//! ```text
//! Pₙ(x) = ∫ |ψ₀(x − Σ_{k=1}^{n} h(T⁻ᵏω′), ω′)|² dℙ(ω′)
//! ```
//!
//! which both estimators below evaluate.

pub mod coin;
pub mod step;
pub mod system;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::density::{Binning, DensityOnGrid};
use crate::error::{Error, Result};
use crate::measure::{EmpiricalMeasure, Point, SampleMeta};
use crate::psi0::ProductProfile;

pub use coin::CoinDensity;
pub use step::{StepFunction, TrigPolynomial, TrigTerm, Wave};
pub use system::{Baker, BakerPoint, MeasurePreserving, PowerRange, Rotation, SystemSpec};

/// Default averaging horizon for [`limit_pushforward`].
pub const DEFAULT_N_AVG: usize = 10_000;

/// Two Birkhoff averages closer than this (per coordinate) count as
/// stabilized.
pub const STABILIZATION_TOLERANCE: f64 = 1e-2;

const MAX_REJECTIONS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitDirection {
    /// `Σ_{j=0}^{n−1} h(Tʲω)`.
    Forward,
    /// `Σ_{j=1}^{n} h(T⁻ʲω)`.
    Backward,
}

fn check_pair<S: MeasurePreserving>(sys: &S, h: &StepFunction) -> Result<()> {
    h.validate(sys.omega_dim())
}

fn positive(name: &'static str, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::arg(name, "must be at least 1"));
    }
    Ok(())
}

fn orbit_range(n: usize, direction: OrbitDirection) -> PowerRange {
    let n = n as i64;
    match direction {
        OrbitDirection::Forward => PowerRange::new(0, n - 1),
        OrbitDirection::Backward => PowerRange::new(-n, -1),
    }
}

fn average_range(n: usize) -> PowerRange {
    PowerRange::new(1 - n as i64, 0)
}

/// Per-sample generator: one ChaCha stream per index, so draws do not
/// depend on how samples are split across workers.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn trajectory_sum<S: MeasurePreserving>(
    sys: &S,
    h: &StepFunction,
    omega: &S::Point,
    n: usize,
    direction: OrbitDirection,
) -> Result<Point> {
    check_pair(sys, h)?;
    positive("n", n)?;
    Ok(sys.orbit_kernel(h, orbit_range(n, direction))(omega))
}

/// Divides an orbit sum by `n`, keeping constant components exact.
fn to_average(h: &StepFunction, sum: Point, n: usize) -> Point {
    let mut out = [0.0; 2];
    for (i, c) in h.components().iter().enumerate() {
        out[i] = if c.is_constant() { c.constant } else { sum[i] / n as f64 };
    }
    out
}

/// `h̄ₙ(ω) = (1/n) Σ_{j=0}^{n−1} h(T⁻ʲω)`.
pub fn birkhoff_average<S: MeasurePreserving>(sys: &S, h: &StepFunction, omega: &S::Point, n: usize) -> Result<Point> {
    check_pair(sys, h)?;
    positive("n", n)?;
    let sum = sys.orbit_kernel(h, average_range(n))(omega);
    Ok(to_average(h, sum, n))
}

/// Draws `(y, ω′)` from `|ψ₀|²`.
pub trait Psi0Sampler<S: MeasurePreserving>: Sync {
    fn dim(&self) -> usize;

    fn draw(&self, sys: &S, rng: &mut dyn RngCore) -> Result<(Point, S::Point)>;
}

/// `ψ₀(x, ω) = φ₀(x) χ₀(ω)` with coin density `|χ₀|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductState {
    pub phi0: ProductProfile,
    pub coin: CoinDensity,
}

impl ProductState {
    pub fn new(phi0: ProductProfile, coin: CoinDensity) -> Result<Self> {
        coin.validate_mass()?;
        Ok(Self { phi0, coin })
    }
}

fn draw_omega<S: MeasurePreserving>(sys: &S, coin: &CoinDensity, rng: &mut dyn RngCore) -> Result<S::Point> {
    if coin.omega_dim() != sys.omega_dim() {
        return Err(Error::GridMismatch(format!(
            "coin density on a {}-dimensional Ω for a {}-dimensional system",
            coin.omega_dim(),
            sys.omega_dim()
        )));
    }
    if coin.is_uniform() {
        return Ok(sys.sample(rng));
    }
    let c = coin
        .sample_coords(rng, MAX_REJECTIONS)
        .ok_or_else(|| Error::Sampler(format!("no coin sample accepted in {MAX_REJECTIONS} tries")))?;
    Ok(sys.point_at(c, rng.next_u64()))
}

impl<S: MeasurePreserving> Psi0Sampler<S> for ProductState {
    fn dim(&self) -> usize {
        self.phi0.dim()
    }

    fn draw(&self, sys: &S, rng: &mut dyn RngCore) -> Result<(Point, S::Point)> {
        let y = self.phi0.sample(rng);
        let omega = draw_omega(sys, &self.coin, rng)?;
        Ok((y, omega))
    }
}

/// Monte Carlo estimate of `Qₙ`: atoms `(y + Σ_{k=1}^{n} h(T⁻ᵏω′)) / n` with
/// `(y, ω′)` drawn from `|ψ₀|²`.
pub fn sample_rescaled_position<S, P>(
    sys: &S,
    h: &StepFunction,
    psi0: &P,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<EmpiricalMeasure>
where
    S: MeasurePreserving,
    P: Psi0Sampler<S>,
{
    check_pair(sys, h)?;
    positive("n", n)?;
    positive("samples", samples)?;
    if psi0.dim() != h.dim() {
        return Err(Error::GridMismatch(format!(
            "initial state of dimension {} for a step of dimension {}",
            psi0.dim(),
            h.dim()
        )));
    }
    let kernel = sys.orbit_kernel(h, orbit_range(n, OrbitDirection::Backward));
    let scale = 1.0 / n as f64;
    let points = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i as u64);
            let (y, omega) = psi0.draw(sys, &mut rng)?;
            let s = kernel(&omega);
            Ok([(y[0] + s[0]) * scale, (y[1] + s[1]) * scale])
        })
        .collect::<Result<Vec<Point>>>()?;
    Ok(EmpiricalMeasure::uniform(h.dim(), points)?.with_meta(SampleMeta {
        samples,
        seed: Some(seed),
        n: Some(n),
        ..SampleMeta::default()
    }))
}

/// A uniform walker grid: `points` cells of width `spacing` per axis, the
/// first centred on `origin`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XGrid {
    pub origin: f64,
    pub spacing: f64,
    pub points: usize,
}

impl XGrid {
    /// The grid of `points` cells covering `[lo, hi)`.
    pub fn covering(lo: f64, hi: f64, points: usize) -> Self {
        let spacing = (hi - lo) / points as f64;
        Self {
            origin: lo + 0.5 * spacing,
            spacing,
            points,
        }
    }

    fn edge(&self, i: usize) -> f64 {
        self.origin + (i as f64 - 0.5) * self.spacing
    }
}

/// Quadrature evaluation of `Pₙ` for `ψ₀ = φ₀ ⊗ χ₀` on `omega_cells` cells per
/// axis of Ω.
///
/// Each cell contributes one orbit, started at the system's quadrature node
/// `ω′ₘ` and weighted by the coin density at the cell centre. The walker
/// profile is integrated exactly over each grid cell, so the result holds
/// cell averages and its mass is the Ω-rule applied to the coin density
/// times the `φ₀` mass inside the grid.
pub fn pn_quadrature<S: MeasurePreserving>(
    sys: &S,
    h: &StepFunction,
    psi0: &ProductState,
    n: usize,
    grid: XGrid,
    omega_cells: usize,
) -> Result<DensityOnGrid> {
    check_pair(sys, h)?;
    positive("omega_cells", omega_cells)?;
    positive("points", grid.points)?;
    let d = h.dim();
    if psi0.phi0.dim() != d {
        return Err(Error::GridMismatch(format!(
            "initial state of dimension {} for a step of dimension {d}",
            psi0.phi0.dim()
        )));
    }
    if psi0.coin.omega_dim() != sys.omega_dim() {
        return Err(Error::GridMismatch("coin density and system disagree on Ω".into()));
    }
    let omega_dim = sys.omega_dim();
    let nodes = omega_cells.pow(omega_dim as u32);
    let cell_of = |m: usize| {
        if omega_dim == 1 {
            [m, 0]
        } else {
            [m / omega_cells, m % omega_cells]
        }
    };
    let kernel = (n > 0).then(|| sys.orbit_kernel(h, orbit_range(n, OrbitDirection::Backward)));
    let node_weight = 1.0 / nodes as f64;
    let shifts: Vec<(f64, Point)> = (0..nodes)
        .into_par_iter()
        .map(|m| {
            let cell = cell_of(m);
            let w = psi0.coin.cell_weight(cell, omega_cells) * node_weight;
            let s = match &kernel {
                Some(k) => k(&sys.quadrature_node(cell, omega_cells, m as u64)),
                None => [0.0; 2],
            };
            (w, s)
        })
        .collect();

    let p = grid.points;
    let inv_volume = grid.spacing.powi(-(d as i32));
    let axes = psi0.phi0.axes();
    // mass of each grid cell along each axis, per node
    let cell_mass = |axis: usize, s: f64| -> Vec<f64> {
        let f = &axes[axis];
        let cdf: Vec<f64> = (0..=p).map(|i| f.cdf(grid.edge(i) - s)).collect();
        cdf.windows(2).map(|w| w[1] - w[0]).collect()
    };
    let values: Vec<f64> = if d == 1 {
        let per_node: Vec<Vec<f64>> = shifts.par_iter().map(|(_, s)| cell_mass(0, s[0])).collect();
        (0..p)
            .into_par_iter()
            .map(|i| {
                inv_volume * crate::numeric::neumaier_sum(shifts.iter().zip(&per_node).map(|((w, _), a)| w * a[i]))
            })
            .collect()
    } else {
        let per_node: Vec<(Vec<f64>, Vec<f64>)> = shifts
            .par_iter()
            .map(|(_, s)| (cell_mass(0, s[0]), cell_mass(1, s[1])))
            .collect();
        (0..p * p)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k / p, k % p);
                inv_volume
                    * crate::numeric::neumaier_sum(shifts.iter().zip(&per_node).map(|((w, _), (a, b))| w * a[i] * b[j]))
            })
            .collect()
    };
    DensityOnGrid::new(d, grid.origin, grid.spacing, p, Binning::CellAverages, values)
}

/// Monte Carlo estimate of the limit law: atoms `h̄_{n_avg}(ω)` for ω drawn
/// from the coin density.
///
/// The stabilization check compares `h̄` at `n_avg` and `n_avg / 2`; the
/// fraction of atoms agreeing within [`STABILIZATION_TOLERANCE`] is recorded
/// in the metadata rather than enforced.
pub fn limit_pushforward<S: MeasurePreserving>(
    sys: &S,
    h: &StepFunction,
    coin: &CoinDensity,
    n_avg: usize,
    samples: usize,
    seed: u64,
) -> Result<EmpiricalMeasure> {
    check_pair(sys, h)?;
    positive("n_avg", n_avg)?;
    positive("samples", samples)?;
    coin.validate_mass()?;
    let full = sys.orbit_kernel(h, average_range(n_avg));
    let half_n = (n_avg / 2).max(1);
    let half = sys.orbit_kernel(h, average_range(half_n));
    let results = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i as u64);
            let omega = draw_omega(sys, coin, &mut rng)?;
            let a = to_average(h, full(&omega), n_avg);
            let b = to_average(h, half(&omega), half_n);
            let stable = (0..h.dim()).all(|k| (a[k] - b[k]).abs() < STABILIZATION_TOLERANCE);
            Ok((a, stable))
        })
        .collect::<Result<Vec<(Point, bool)>>>()?;
    let stable = results.iter().filter(|r| r.1).count();
    let points = results.into_iter().map(|r| r.0).collect();
    Ok(EmpiricalMeasure::uniform(h.dim(), points)?.with_meta(SampleMeta {
        samples,
        seed: Some(seed),
        n_avg: Some(n_avg),
        stabilized_fraction: Some(stable as f64 / samples as f64),
        ..SampleMeta::default()
    }))
}

/// Kolmogorov–Smirnov distance between the law of `T(ω)` (and of `T⁻¹(ω)`)
/// for ω ~ ℙ and ℙ itself, per coordinate; the larger of the two maps.
pub fn measure_preservation_ks<S: MeasurePreserving>(sys: &S, samples: usize, seed: u64) -> Result<Point> {
    positive("samples", samples)?;
    let mut out = [0.0; 2];
    for forward in [true, false] {
        let mut coords: Vec<Point> = (0..samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = sample_rng(seed, i as u64);
                let w = sys.sample(&mut rng);
                sys.coords(&if forward { sys.forward(&w) } else { sys.inverse(&w) })
            })
            .collect();
        for axis in 0..sys.omega_dim() {
            coords.sort_by(|a, b| a[axis].total_cmp(&b[axis]));
            let nf = samples as f64;
            let ks = coords
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let u = c[axis];
                    (u - i as f64 / nf).abs().max(((i + 1) as f64 / nf - u).abs())
                })
                .fold(0.0, f64::max);
            out[axis] = f64::max(out[axis], ks);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psi0::Profile;
    use std::f64::consts::TAU;

    fn cos_h(k: i64) -> StepFunction {
        StepFunction::scalar(TrigPolynomial::constant(0.0).with_term(TrigTerm::cos(1.0, [k, 0])))
    }

    fn gaussian_product(coin: CoinDensity) -> ProductState {
        ProductState::new(
            ProductProfile::isotropic(Profile::standard_gaussian(), 1).unwrap(),
            coin,
        )
        .unwrap()
    }

    #[test]
    fn constant_step_sums() {
        let h = StepFunction::constant(&[0.5, -1.25]).unwrap();
        let p = BakerPoint::from_seed(3);
        for dir in [OrbitDirection::Forward, OrbitDirection::Backward] {
            let s = trajectory_sum(&Baker, &h, &p, 8, dir).unwrap();
            assert_eq!(s, [4.0, -10.0]);
        }
        let r = Rotation::golden();
        let h1 = StepFunction::constant(&[0.3]).unwrap();
        for n in [1, 7, 1000] {
            assert_eq!(birkhoff_average(&r, &h1, &0.2, n).unwrap()[0], 0.3);
        }
        assert!(trajectory_sum(&r, &h1, &0.2, 0, OrbitDirection::Forward).is_err());
    }

    #[test]
    fn half_rotation_two_terms() {
        let r = Rotation::rational(1, 2);
        let s = trajectory_sum(&r, &cos_h(1), &0.0, 2, OrbitDirection::Forward).unwrap();
        assert!(s[0].abs() < 1e-15);
    }

    #[test]
    fn forward_and_backward_sums_are_shifted_copies() {
        let h = StepFunction::scalar(
            TrigPolynomial::constant(0.1)
                .with_term(TrigTerm::cos(1.0, [1, 0]))
                .with_term(TrigTerm::sin(0.4, [2, 1])),
        );
        let mut rng = sample_rng(5, 0);
        for n in [1, 5, 64] {
            let p = Baker.sample(&mut rng);
            let fwd = trajectory_sum(&Baker, &h, &p, n, OrbitDirection::Forward).unwrap();
            let back =
                trajectory_sum(&Baker, &h, &Baker.step_power(&p, n as i64), n, OrbitDirection::Backward).unwrap();
            assert!((fwd[0] - back[0]).abs() < 1e-12);
        }
        let r = Rotation::golden();
        let h1 = cos_h(3);
        for n in [1, 5, 64] {
            let fwd = trajectory_sum(&r, &h1, &0.37, n, OrbitDirection::Forward).unwrap();
            let back = trajectory_sum(&r, &h1, &r.step_power(&0.37, n as i64), n, OrbitDirection::Backward).unwrap();
            assert!((fwd[0] - back[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn irrational_average_obeys_the_dirichlet_bound() {
        // |Σ_{j<n} e^{−2πijα}| ≤ 1/|sin(πα)|
        let r = Rotation::golden();
        let bound = 1.0 / (std::f64::consts::PI * r.alpha()).sin().abs();
        for n in [10, 100, 10_000] {
            for w in [0.0, 0.3, 0.77] {
                let a = birkhoff_average(&r, &cos_h(1), &w, n).unwrap()[0];
                assert!(a.abs() <= bound / n as f64 + 1e-12);
            }
        }
        assert!(birkhoff_average(&r, &cos_h(1), &0.1, 10_000).unwrap()[0].abs() < 0.02);
    }

    #[test]
    fn rational_average_is_periodic() {
        let r = Rotation::rational(1, 2);
        for n in [2, 4, 100] {
            for w in [0.05, 0.4, 0.9] {
                let a = birkhoff_average(&r, &cos_h(2), &w, n).unwrap()[0];
                assert!((a - (2.0 * TAU * w).cos()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_step_limit_is_a_point_mass() {
        let h = StepFunction::constant(&[0.7, 0.1]).unwrap();
        for n_avg in [1, 10, 1000] {
            let m = limit_pushforward(&Baker, &h, &CoinDensity::uniform(2), n_avg, 100, 1).unwrap();
            assert!(m.points().iter().all(|p| *p == [0.7, 0.1]));
            assert_eq!(m.meta.stabilized_fraction, Some(1.0));
        }
        assert!(limit_pushforward(&Baker, &h, &CoinDensity::uniform(2), 10, 0, 1).is_err());
    }

    #[test]
    fn constant_drift_sampling() {
        let h = StepFunction::constant(&[2.0]).unwrap();
        let psi0 = ProductState::new(
            ProductProfile::new(vec![Profile::Box { a: -1.0, b: 1.0 }]).unwrap(),
            CoinDensity::uniform(1),
        )
        .unwrap();
        let r = Rotation::golden();
        for n in [1, 10, 100] {
            let m = sample_rescaled_position(&r, &h, &psi0, n, 1000, 9).unwrap();
            let tol = (1.0 + 2.0) / n as f64;
            assert!(m.points().iter().all(|p| (p[0] - 2.0).abs() <= tol));
        }
        assert!(sample_rescaled_position(&r, &h, &psi0, 5, 0, 9).is_err());
    }

    #[test]
    fn sampling_is_reproducible_and_thread_independent() {
        let psi0 = gaussian_product(CoinDensity::uniform(1));
        let r = Rotation::golden();
        let a = sample_rescaled_position(&r, &cos_h(1), &psi0, 10, 500, 42).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| sample_rescaled_position(&r, &cos_h(1), &psi0, 10, 500, 42).unwrap());
        assert_eq!(a, b);
        let c = sample_rescaled_position(&r, &cos_h(1), &psi0, 10, 500, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn quadrature_special_cases() {
        let psi0 = gaussian_product(CoinDensity::uniform(1));
        let grid = XGrid::covering(-12.0, 20.0, 640);
        let r = Rotation::golden();
        let p0 = pn_quadrature(&r, &cos_h(1), &psi0, 0, grid, 16).unwrap();
        let g = Profile::standard_gaussian();
        for i in 0..grid.points {
            let want = (g.cdf(grid.edge(i + 1)) - g.cdf(grid.edge(i))) / grid.spacing;
            assert!((p0.values()[i] - want).abs() < 1e-14);
        }
        let h = StepFunction::constant(&[0.25]).unwrap();
        let p = pn_quadrature(&r, &h, &psi0, 20, grid, 16).unwrap();
        for i in 0..grid.points {
            let want = (g.cdf(grid.edge(i + 1) - 5.0) - g.cdf(grid.edge(i) - 5.0)) / grid.spacing;
            assert!((p.values()[i] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn quadrature_conserves_mass() {
        let chi = TrigPolynomial::constant(1.0).with_term(TrigTerm::sin(0.6, [1, 1]));
        let psi0 = ProductState::new(
            ProductProfile::isotropic(Profile::standard_gaussian(), 1).unwrap(),
            CoinDensity::trig_amplitude(2, chi).unwrap(),
        )
        .unwrap();
        let h = StepFunction::scalar(TrigPolynomial::constant(0.0).with_term(TrigTerm::cos(1.0, [1, 0])));
        for n in [0, 1, 10, 100] {
            let grid = XGrid::covering(-15.0 - n as f64, 15.0 + n as f64, 512);
            let p = pn_quadrature(&Baker, &h, &psi0, n, grid, 32).unwrap();
            assert!((p.total_mass() - 1.0).abs() < 1e-10, "n = {n}: {}", p.total_mass());
        }
    }

    #[test]
    fn shipped_systems_preserve_lebesgue_measure() {
        let r = measure_preservation_ks(&Rotation::golden(), 100_000, 1).unwrap();
        assert!(r[0] < 0.01);
        let b = measure_preservation_ks(&Baker, 100_000, 2).unwrap();
        assert!(b[0] < 0.01 && b[1] < 0.01);
    }
}
