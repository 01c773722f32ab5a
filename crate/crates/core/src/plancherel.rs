//! The Plancherel walk: coin flip by the Fourier transform on the coin axes
//! followed by the conditional step `ψ(x, y) ↦ ψ(x − y, y)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::density::{Binning, DensityOnGrid};
use crate::error::{Error, Result};
use crate::grid::{Axes, Direction, Domain, GridWavefunction};
use crate::numeric::{neumaier_sum, par_sum};

/// Boundary mass above which an evolution is flagged as aliasing.
pub const BOUNDARY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryWarning {
    /// First step after which the boundary mass exceeded the tolerance.
    pub step: usize,
    pub mass: f64,
}

impl std::fmt::Display for BoundaryWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "boundary mass {:.3e} exceeds {:.0e} after step {}",
            self.mass, BOUNDARY_TOLERANCE, self.step
        )
    }
}

#[derive(Debug, Clone)]
pub struct Evolved {
    pub state: GridWavefunction,
    pub max_boundary_mass: f64,
    pub warning: Option<BoundaryWarning>,
}

fn require_position(psi: &GridWavefunction, what: &str) -> Result<()> {
    if psi.x_domain() != Domain::Position {
        return Err(Error::GridMismatch(format!(
            "{what} needs the walker axes in position representation"
        )));
    }
    Ok(())
}

fn raw_step(psi: &GridWavefunction) -> Result<GridWavefunction> {
    let flipped = psi.dft(Axes::Y, Direction::Forward)?;
    flipped.shear()
}

/// One step `U = S (I ⊗ 𝓕)`.
pub fn plancherel_step(psi: &GridWavefunction) -> Result<Evolved> {
    evolve(psi, 1)
}

/// A walk advanced step by step, tracking the boundary-mass guard.
#[derive(Debug, Clone)]
pub struct PlancherelWalk {
    state: GridWavefunction,
    steps: usize,
    max_boundary_mass: f64,
    warning: Option<BoundaryWarning>,
}

impl PlancherelWalk {
    pub fn new(psi0: GridWavefunction) -> Result<Self> {
        require_position(&psi0, "evolution")?;
        let b = psi0.boundary_mass();
        Ok(Self {
            warning: (b > BOUNDARY_TOLERANCE).then_some(BoundaryWarning { step: 0, mass: b }),
            state: psi0,
            steps: 0,
            max_boundary_mass: b,
        })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn state(&self) -> &GridWavefunction {
        &self.state
    }

    pub fn warning(&self) -> Option<BoundaryWarning> {
        self.warning
    }

    pub fn max_boundary_mass(&self) -> f64 {
        self.max_boundary_mass
    }

    pub fn step(&mut self) -> Result<()> {
        self.state = raw_step(&self.state)?;
        self.steps += 1;
        let b = self.state.boundary_mass();
        self.max_boundary_mass = self.max_boundary_mass.max(b);
        if b > BOUNDARY_TOLERANCE && self.warning.is_none() {
            self.warning = Some(BoundaryWarning {
                step: self.steps,
                mass: b,
            });
        }
        Ok(())
    }

    /// Advances to absolute step count `n` (which must not be in the past).
    pub fn advance_to(&mut self, n: usize) -> Result<()> {
        if n < self.steps {
            return Err(Error::arg(
                "n",
                format!("walk is already at step {}, cannot go back to {n}", self.steps),
            ));
        }
        while self.steps < n {
            self.step()?;
        }
        Ok(())
    }

    pub fn into_evolved(self) -> Evolved {
        Evolved {
            state: self.state,
            max_boundary_mass: self.max_boundary_mass,
            warning: self.warning,
        }
    }
}

/// `Uⁿ ψ₀`.
pub fn evolve(psi0: &GridWavefunction, n: usize) -> Result<Evolved> {
    let mut walk = PlancherelWalk::new(psi0.clone())?;
    walk.advance_to(n)?;
    Ok(walk.into_evolved())
}

/// `Pₙ(x) = ∫ |ψ(x, y)|² dy` on the walker grid.
pub fn position_density(psi: &GridWavefunction) -> Result<DensityOnGrid> {
    require_position(psi, "position density")?;
    let spec = psi.spec();
    let dy = spec.coin_spacing().powi(spec.dim() as i32);
    let values: Vec<f64> = (0..spec.walk_len())
        .into_par_iter()
        .map(|i| dy * neumaier_sum(psi.row(i).iter().map(|v| v.norm_sqr())))
        .collect();
    DensityOnGrid::new(
        spec.dim(),
        spec.x_coord(0),
        spec.walk_spacing(),
        spec.walk_points(),
        Binning::Samples,
        values,
    )
}

/// The limit density `Q(x) = 2ᵈ ∫ |(𝓕₁ψ₀)(−2x, y)|² dy`.
///
/// Evaluated at the nodes `x = −ζ/2` for ζ on the walker frequency grid, so
/// the result lives on a grid of spacing `π / (2 L_x)`.
pub fn limit_density(psi0: &GridWavefunction) -> Result<DensityOnGrid> {
    let spec = *psi0.spec();
    let f = match psi0.x_domain() {
        Domain::Position => psi0.dft(Axes::X, Direction::Forward)?,
        Domain::Frequency => psi0.clone(),
    };
    let d = spec.dim();
    let n = spec.walk_points();
    let dy = spec.coin_spacing().powi(d as i32);
    let marginal: Vec<f64> = (0..spec.walk_len())
        .into_par_iter()
        .map(|k| dy * neumaier_sum(f.row(k).iter().map(|v| v.norm_sqr())))
        .collect();
    // node m sits at x = (m − N/2) δ/2, i.e. ζ = −2x = (N/2 − m) δ ≡ index N − m (mod N)
    let reflect = |m: usize| (n - m) % n;
    let jacobian = 2f64.powi(d as i32);
    let values: Vec<f64> = (0..spec.walk_len())
        .map(|flat| {
            let k = if d == 1 {
                reflect(flat)
            } else {
                reflect(flat / n) * n + reflect(flat % n)
            };
            jacobian * marginal[k]
        })
        .collect();
    let spacing = 0.5 * spec.walk_frequency_spacing();
    DensityOnGrid::new(d, -((n / 2) as f64) * spacing, spacing, n, Binning::Samples, values)
}

fn dispersion_phase(psi_hat: &mut GridWavefunction, m: f64) {
    let spec = *psi_hat.spec();
    let coin_len = spec.coin_len();
    psi_hat
        .values_mut()
        .par_chunks_mut(coin_len)
        .enumerate()
        .for_each(|(k, row)| {
            let z = spec.zeta_point(k);
            let phase = Complex64::from_polar(1.0, m * (z[0] * z[0] + z[1] * z[1]));
            row.iter_mut().for_each(|v| *v *= phase);
        });
}

/// `𝓕₁⁻¹ e^{i m ζ²} 𝓕₁ ψ`, the multiplication-operator form of `U^{4m} ψ`.
pub fn dispersion_shortcut(psi: &GridWavefunction, m: usize) -> Result<GridWavefunction> {
    require_position(psi, "dispersion shortcut")?;
    let mut f = psi.dft(Axes::X, Direction::Forward)?;
    dispersion_phase(&mut f, m as f64);
    f.dft(Axes::X, Direction::Inverse)
}

/// Relative error `‖𝓕₁U⁴ψ − e^{iζ²}𝓕₁ψ‖ / ‖ψ‖`.
pub fn check_u4_identity(psi: &GridWavefunction) -> Result<f64> {
    require_position(psi, "the four-step identity check")?;
    let four = evolve(psi, 4)?.state.dft(Axes::X, Direction::Forward)?;
    let mut expected = psi.dft(Axes::X, Direction::Forward)?;
    dispersion_phase(&mut expected, 1.0);
    let a = four.values();
    let b = expected.values();
    let diff = four.cell_volume() * par_sum(a.len(), |i| (a[i] - b[i]).norm_sqr());
    Ok((diff / psi.norm_sqr()).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use std::f64::consts::PI;

    fn gaussian(spec: GridSpec) -> GridWavefunction {
        let mut psi = GridWavefunction::from_fn(spec, |x, y| {
            let r2 = x[0] * x[0] + x[1] * x[1] + y[0] * y[0] + y[1] * y[1];
            Complex64::new((-r2 / 2.0).exp(), 0.0)
        });
        psi.normalize().unwrap();
        psi
    }

    #[test]
    fn one_step_of_the_gaussian_is_analytic() {
        // 𝓕 fixes the standard Gaussian, so Uψ₀(x, y) = π^{-1/2} e^{-((x−y)² + y²)/2}
        let spec = GridSpec::square(1, 256).unwrap();
        let one = plancherel_step(&gaussian(spec)).unwrap();
        assert!(one.warning.is_none());
        let mut err = 0.0f64;
        for i in 0..spec.walk_points() {
            let x = spec.x_coord(i);
            for j in 0..spec.coin_points() {
                let y = spec.y_coord(j);
                let want = ((-(x - y).powi(2) - y * y) / 2.0).exp() / PI.sqrt();
                // wrap-around images are below e^{-200}
                err = err.max((one.state.get(i, j) - want).norm());
            }
        }
        assert!(err < 1e-8, "max error {err}");
        assert!((one.state.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_steps_is_identity_and_one_step_matches() {
        let spec = GridSpec::new(1, 32, 64, 1).unwrap();
        let psi = gaussian(spec);
        assert_eq!(evolve(&psi, 0).unwrap().state, psi);
        assert_eq!(evolve(&psi, 1).unwrap().state, plancherel_step(&psi).unwrap().state);
    }

    #[test]
    fn four_steps_match_the_multiplication_route() {
        let spec = GridSpec::new(1, 256, 512, 1).unwrap();
        let psi = gaussian(spec);
        let direct = evolve(&psi, 4).unwrap().state;
        let shortcut = dispersion_shortcut(&psi, 1).unwrap();
        let err = direct
            .values()
            .iter()
            .zip(shortcut.values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn position_density_of_a_product_is_the_walker_marginal() {
        let spec = GridSpec::new(1, 32, 64, 1).unwrap();
        let psi = gaussian(spec);
        let p = position_density(&psi).unwrap();
        for i in 0..spec.walk_points() {
            let x = spec.x_coord(i);
            let want = (-x * x).exp() / PI.sqrt();
            assert!((p.values()[i] - want).abs() < 1e-12);
        }
        assert!((p.total_mass() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn position_density_of_a_delta() {
        let spec = GridSpec::square(1, 16).unwrap();
        let mut psi = GridWavefunction::zeros(spec);
        psi.values_mut()[5 * 16 + 9] = Complex64::new(1.0, 0.0);
        psi.normalize().unwrap();
        let p = position_density(&psi).unwrap();
        let support: Vec<_> = (0..16).filter(|i| p.values()[*i] > 0.0).collect();
        assert_eq!(support, vec![5]);
        assert!((p.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_limit_density() {
        let spec = GridSpec::square(1, 256).unwrap();
        let q = limit_density(&gaussian(spec)).unwrap();
        let mut err = 0.0f64;
        for i in 0..q.points() {
            let x = q.coord(i);
            err = err.max((q.values()[i] - 2.0 / PI.sqrt() * (-4.0 * x * x).exp()).abs());
        }
        assert!(err < 1e-6, "max error {err}");
        assert!((q.total_mass() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn limit_density_in_two_dimensions_is_normalized() {
        let spec = GridSpec::new(2, 16, 32, 1).unwrap();
        let q = limit_density(&gaussian(spec)).unwrap();
        assert!((q.total_mass() - 1.0).abs() < 1e-8);
        // product of two one-dimensional limits
        let c = 32 / 2;
        let peak = q.values()[c * 32 + c];
        assert!((peak - 4.0 / PI).abs() < 1e-6, "{peak}");
    }

    #[test]
    fn u4_identity_is_exact_when_the_boxes_coincide() {
        // walker box = coin box: the identity holds on the finite group
        let spec = GridSpec::new(1, 32, 64, 2).unwrap();
        let mut delta = GridWavefunction::zeros(spec);
        delta.values_mut()[0] = Complex64::new(1.0, 0.0);
        assert!(check_u4_identity(&delta).unwrap() < 1e-12);
    }

    #[test]
    fn u4_identity_flags_an_uncontained_state() {
        let spec = GridSpec::new(1, 16, 64, 1).unwrap();
        let mut corner = GridWavefunction::zeros(spec);
        corner.values_mut()[0] = Complex64::new(1.0, 0.0);
        corner.normalize().unwrap();
        assert!(check_u4_identity(&corner).unwrap() > 0.1);
        let run = evolve(&corner, 1).unwrap();
        assert!(run.warning.is_some());
    }

    #[test]
    fn zero_padding_does_not_increase_the_u4_error() {
        for (cp, wp) in [(32, 64), (64, 128)] {
            let psi = gaussian(GridSpec::new(1, cp, wp, 1).unwrap());
            let e = check_u4_identity(&psi).unwrap();
            let padded = check_u4_identity(&psi.zero_padded(2 * wp).unwrap()).unwrap();
            assert!(padded <= e * (1.0 + 1e-9), "{padded} > {e}");
        }
    }

    #[test]
    fn walk_cannot_rewind() {
        let spec = GridSpec::square(1, 16).unwrap();
        let mut w = PlancherelWalk::new(gaussian(spec)).unwrap();
        w.advance_to(3).unwrap();
        assert!(w.advance_to(2).is_err());
    }
}
