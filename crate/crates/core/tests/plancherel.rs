use std::f64::consts::PI;

use qwalk::grid::GridSpec;
use qwalk::plancherel::{self, dispersion_shortcut, PlancherelWalk};
use qwalk::psi0::{product_grid_state, ProductProfile, Profile};

fn gaussian_state(spec: GridSpec, momentum: f64) -> qwalk::GridWavefunction {
    let phi0 = ProductProfile::isotropic(
        Profile::Gaussian {
            center: 0.3,
            width: 1.0,
            momentum,
        },
        spec.dim(),
    )
    .unwrap();
    let chi0 = ProductProfile::isotropic(Profile::standard_gaussian(), spec.dim()).unwrap();
    product_grid_state(spec, &phi0, &chi0).unwrap().0
}

#[test]
fn multiples_of_four_steps_are_a_phase_in_frequency() {
    // with the walker box equal to the coin box the identity holds on the grid
    let spec = GridSpec::new(1, 32, 64, 2).unwrap();
    let psi = gaussian_state(spec, 0.8);
    let mut walk = PlancherelWalk::new(psi.clone()).unwrap();
    for m in 1..=3 {
        walk.advance_to(4 * m).unwrap();
        let expected = dispersion_shortcut(&psi, m).unwrap();
        let err = walk
            .state()
            .values()
            .iter()
            .zip(expected.values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "m={m}: {err}");
    }
}

#[test]
fn limit_density_in_two_dimensions() {
    // φ₀ standard Gaussian on each axis: Q(x) = (4/π) e^{−4|x|²}
    let spec = GridSpec::new(2, 32, 32, 1).unwrap();
    let phi0 = ProductProfile::isotropic(Profile::standard_gaussian(), 2).unwrap();
    let psi = product_grid_state(spec, &phi0, &phi0).unwrap().0;
    let q = plancherel::limit_density(&psi).unwrap();
    for i in 0..q.values().len() {
        let x = q.node(i);
        let expected = 4.0 / PI * (-4.0 * (x[0] * x[0] + x[1] * x[1])).exp();
        assert!((q.values()[i] - expected).abs() < 1e-9, "{x:?}");
    }
    assert!((q.total_mass() - 1.0).abs() < 1e-9);
}

#[test]
fn boundary_guard_stays_quiet_for_a_contained_state() {
    let spec = GridSpec::new(1, 64, 512, 1).unwrap();
    let ev = plancherel::evolve(&gaussian_state(spec, 0.0), 16).unwrap();
    assert!(ev.warning.is_none(), "{:?}", ev.warning);
    assert!((ev.state.norm_sqr() - 1.0).abs() < 1e-12);
}

#[test]
fn rescaled_density_approaches_the_limit() {
    let spec = GridSpec::new(1, 128, 1024, 1).unwrap();
    let psi = gaussian_state(spec, 0.0);
    let limit = plancherel::limit_density(&psi).unwrap();
    let mut walk = PlancherelWalk::new(psi).unwrap();
    let zeta = qwalk::limits::ZetaGrid::default();
    let mut previous = f64::INFINITY;
    for n in [4, 8, 16, 32] {
        walk.advance_to(n).unwrap();
        let q = plancherel::position_density(walk.state()).unwrap().rescaled(n).unwrap();
        let d = qwalk::limits::cf_distance(&q.into(), &limit.clone().into(), &zeta).unwrap();
        assert!(d < previous, "n={n}: {d}");
        previous = d;
    }
}
