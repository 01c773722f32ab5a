use std::f64::consts::PI;

use qwalk::birkhoff::{
    self, CoinDensity, OrbitDirection, ProductState, Rotation, StepFunction, TrigPolynomial, TrigTerm, XGrid,
};
use qwalk::limits::{moments, Measure};
use qwalk::psi0::{ProductProfile, Profile};

fn h() -> StepFunction {
    StepFunction::scalar(
        TrigPolynomial::constant(0.3)
            .with_term(TrigTerm::cos(1.0, [1, 0]))
            .with_term(TrigTerm::sin(0.5, [3, 0])),
    )
}

fn h_direct(w: f64) -> f64 {
    0.3 + (2.0 * PI * w).cos() + 0.5 * (6.0 * PI * w).sin()
}

#[test]
fn rotation_orbit_sums_match_a_direct_loop() {
    let alpha = 2f64.sqrt() - 1.0;
    let r = Rotation::new(alpha);
    for &w in &[0.0, 0.123, 0.77] {
        for &n in &[1usize, 7, 100, 1000] {
            let got = birkhoff::trajectory_sum(&r, &h(), &w, n, OrbitDirection::Backward).unwrap()[0];
            let direct: f64 = (1..=n).map(|k| h_direct((w - k as f64 * alpha).rem_euclid(1.0))).sum();
            assert!((got - direct).abs() < 1e-9 * n as f64, "w={w} n={n}: {got} vs {direct}");
        }
    }
}

fn normal_cdf(x: f64, mean: f64, sd: f64) -> f64 {
    0.5 * (1.0 + libm::erf((x - mean) / (sd * 2f64.sqrt())))
}

#[test]
fn constant_step_shifts_the_initial_profile() {
    let v = 0.75;
    let h = StepFunction::constant(&[v]).unwrap();
    let phi0 = ProductProfile::new(vec![Profile::Gaussian {
        center: -0.5,
        width: 1.2,
        momentum: 0.4,
    }])
    .unwrap();
    let psi0 = ProductState::new(phi0, CoinDensity::uniform(1)).unwrap();
    let n = 9;
    let grid = XGrid::covering(-5.0, 15.0, 400);
    let p = birkhoff::pn_quadrature(&Rotation::golden(), &h, &psi0, n, grid, 16).unwrap();
    // |φ₀|² is normal with mean −0.5 and variance 1.2²/2, moved by n v
    let sd = 1.2 / 2f64.sqrt();
    let mean = -0.5 + n as f64 * v;
    for i in 0..grid.points {
        let a = -5.0 + i as f64 * grid.spacing;
        let expected = (normal_cdf(a + grid.spacing, mean, sd) - normal_cdf(a, mean, sd)) / grid.spacing;
        assert!((p.values()[i] - expected).abs() < 1e-12, "cell {i}");
    }
}

#[test]
fn monte_carlo_mean_matches_the_drift() {
    let phi0 = ProductProfile::new(vec![Profile::standard_gaussian()]).unwrap();
    let psi0 = ProductState::new(phi0, CoinDensity::uniform(1)).unwrap();
    let n = 50;
    let samples = 100_000;
    let q = birkhoff::sample_rescaled_position(&Rotation::golden(), &h(), &psi0, n, samples, 11).unwrap();
    let m = moments(&Measure::Empirical(q), 2).unwrap();
    let (mean, second) = (m[0][0], m[0][1]);
    let sd = (second - mean * mean).sqrt() / (samples as f64).sqrt();
    assert!((mean - 0.3).abs() < 4.0 * sd, "{mean} ± {sd}");
}

#[test]
fn samples_do_not_depend_on_the_worker_count() {
    let phi0 = ProductProfile::new(vec![Profile::standard_gaussian()]).unwrap();
    let coin =
        CoinDensity::trig_amplitude(1, TrigPolynomial::constant(1.0).with_term(TrigTerm::cos(0.5, [1, 0]))).unwrap();
    let psi0 = ProductState::new(phi0, coin).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                birkhoff::sample_rescaled_position(&birkhoff::Baker, &h_baker(), &psi0_baker(), 16, 5000, 3).unwrap()
            })
    };
    assert_eq!(run(1).points(), run(3).points());
    let r = Rotation::golden();
    let a = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| birkhoff::sample_rescaled_position(&r, &h(), &psi0, 16, 5000, 3).unwrap());
    let b = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap()
        .install(|| birkhoff::sample_rescaled_position(&r, &h(), &psi0, 16, 5000, 3).unwrap());
    assert_eq!(a.points(), b.points());
}

fn h_baker() -> StepFunction {
    StepFunction::scalar(TrigPolynomial::constant(0.0).with_term(TrigTerm::cos(1.0, [1, 1])))
}

fn psi0_baker() -> ProductState {
    let phi0 = ProductProfile::new(vec![Profile::standard_gaussian()]).unwrap();
    ProductState::new(phi0, CoinDensity::uniform(2)).unwrap()
}
