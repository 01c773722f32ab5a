//! The acceptance checks behind `qwalk verify`.
//!
//! Each criterion runs end to end from fixed seeds and returns a
//! [`Verdict`]; tolerances are constants in this module.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::birkhoff::{
    self, Baker, CoinDensity, MeasurePreserving, ProductState, Rotation, StepFunction, TrigPolynomial, TrigTerm, XGrid,
};
use crate::config::parse_config;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, GridWavefunction};
use crate::lattice::{mass_outside, rescaled_lattice_measure, Coin, LatticeState};
use crate::limits::{self, cf_distance, characteristic_function, ks_distance_to, Measure, ZetaGrid};
use crate::plancherel::{self, PlancherelWalk};
use crate::psi0::{product_grid_state, ProductProfile, Profile};
use crate::runner::{self, RunOptions};

pub const UNITARITY_TOL: f64 = 1e-10;
pub const RANDOM_STATES: usize = 100;
pub const U4_FINAL_TOL: f64 = 1e-6;
pub const LIMIT_ANALYTIC_TOL: f64 = 1e-6;
pub const LIMIT_CF_FINAL_TOL: f64 = 0.02;
pub const CHI0_TOL: f64 = 1e-10;
pub const POWER_INVARIANCE_TOL: f64 = 1e-6;
pub const SECOND_MOMENT_TOL: f64 = 1e-3;
pub const ARCSINE_KS_TOL: f64 = 0.01;
pub const MC_BAND_SIGMAS: f64 = 3.0;
pub const SUPPORT_MARGIN: f64 = 0.05;
pub const SUPPORT_MASS_TOL: f64 = 0.05;
pub const ORACLE_TOL: f64 = 1e-10;

const SEED: u64 = 20_240_917;
const MC_SAMPLES: usize = 100_000;

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "criterion {} {:<28} {} ({:.1}s) {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.seconds,
            self.detail
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Lattice,
    Plancherel,
    Birkhoff,
    All,
}

impl Suite {
    pub fn criteria(self) -> &'static [u8] {
        match self {
            Suite::Lattice => &[1, 8],
            Suite::Plancherel => &[2, 3, 4, 5],
            Suite::Birkhoff => &[6, 7],
            Suite::All => &[1, 2, 3, 4, 5, 6, 7, 8, 9],
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lattice" => Ok(Suite::Lattice),
            "plancherel" => Ok(Suite::Plancherel),
            "birkhoff" => Ok(Suite::Birkhoff),
            "all" => Ok(Suite::All),
            other => Err(Error::arg("suite", format!("unknown suite {other:?}"))),
        }
    }
}

pub fn name(id: u8) -> &'static str {
    match id {
        1 => "unitarity",
        2 => "four-step identity",
        3 => "plancherel limit",
        4 => "chi0 independence",
        5 => "U^p invariance",
        6 => "birkhoff limit",
        7 => "estimator cross-validation",
        8 => "hadamard support",
        9 => "determinism",
        _ => "unknown",
    }
}

/// Runs one criterion; errors count as failures.
pub fn criterion(id: u8) -> Verdict {
    let started = Instant::now();
    let outcome = match id {
        1 => unitarity(),
        2 => u4_identity(),
        3 => plancherel_limit(),
        4 => chi0_independence(),
        5 => power_invariance(),
        6 => birkhoff_limit(),
        7 => cross_validation(),
        8 => hadamard_support(),
        9 => determinism(),
        _ => Err(Error::arg("criterion", format!("no criterion {id}"))),
    };
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    Verdict {
        id,
        name: name(id),
        passed,
        detail,
        seconds: started.elapsed().as_secs_f64(),
    }
}

pub fn run_suite(suite: Suite) -> Vec<Verdict> {
    suite.criteria().iter().map(|&id| criterion(id)).collect()
}

type Outcome = Result<(bool, String)>;

fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn gaussian(center: f64, width: f64, momentum: f64) -> Profile {
    Profile::Gaussian {
        center,
        width,
        momentum,
    }
}

fn standard(dim: usize) -> Result<ProductProfile> {
    ProductProfile::isotropic(Profile::standard_gaussian(), dim)
}

fn cos_term(coeff: f64, k: [i64; 2]) -> TrigTerm {
    TrigTerm::cos(coeff, k)
}

fn random_trig(rng: &mut ChaCha8Rng, omega_dim: usize, constant: f64) -> TrigPolynomial {
    let mut p = TrigPolynomial::constant(constant);
    for _ in 0..rng.gen_range(1..=3) {
        let k1 = rng.gen_range(-3..=3);
        let k2 = if omega_dim == 2 { rng.gen_range(-3..=3) } else { 0 };
        let c = rng.gen_range(-1.0..1.0);
        p = p.with_term(if rng.gen_bool(0.5) {
            TrigTerm::cos(c, [k1, k2])
        } else {
            TrigTerm::sin(c, [k1, k2])
        });
    }
    p
}

// ---------------------------------------------------------------- criterion 1

fn unitarity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);

    let mut lattice_worst = 0.0f64;
    for _ in 0..RANDOM_STATES {
        let width = rng.gen_range(1..40);
        let h = (0..width).map(|_| random_complex(&mut rng)).collect();
        let t = (0..width).map(|_| random_complex(&mut rng)).collect();
        let mut s = LatticeState::normalized(rng.gen_range(-20..20), h, t)?;
        for _ in 0..rng.gen_range(1..=20) {
            s = s.hadamard_step();
            lattice_worst = lattice_worst.max((s.norm_sqr() - 1.0).abs());
        }
    }

    let mut plancherel_worst = 0.0f64;
    let spec_1d = GridSpec::new(1, 32, 64, 1)?;
    let spec_2d = GridSpec::new(2, 8, 16, 1)?;
    for i in 0..RANDOM_STATES {
        let spec = if i % 5 == 4 { spec_2d } else { spec_1d };
        let values = (0..spec.len()).map(|_| random_complex(&mut rng)).collect();
        let mut psi = GridWavefunction::from_values(spec, crate::grid::Domain::Position, values)?;
        psi.normalize()?;
        let next = plancherel::plancherel_step(&psi)?.state;
        plancherel_worst = plancherel_worst.max((next.norm_sqr() - 1.0).abs());
    }

    let mut birkhoff_worst = 0.0f64;
    for i in 0..RANDOM_STATES {
        let d = if i % 5 == 4 { 2 } else { 1 };
        let baker = rng.gen_bool(0.5);
        let omega_dim = if baker { 2 } else { 1 };
        let h = StepFunction::new(
            (0..d)
                .map(|_| {
                    let c = rng.gen_range(-1.0..1.0);
                    random_trig(&mut rng, omega_dim, c)
                })
                .collect(),
        )?;
        let coin = CoinDensity::trig_amplitude(omega_dim, random_trig(&mut rng, omega_dim, 2.0))?;
        let phi0 = ProductProfile::new(
            (0..d)
                .map(|_| {
                    gaussian(
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(0.5..2.0),
                        rng.gen_range(-2.0..2.0),
                    )
                })
                .collect(),
        )?;
        let psi0 = ProductState::new(phi0, coin)?;
        let n = rng.gen_range(1..50);
        let reach = n as f64 * h.sup_bound().iter().cloned().fold(0.0, f64::max) + 30.0;
        let points = if d == 1 { 4096 } else { 128 };
        let grid = XGrid::covering(-reach, reach, points);
        let p = if baker {
            birkhoff::pn_quadrature(&Baker, &h, &psi0, n, grid, 32)?
        } else {
            let alpha = rng.gen_range(0.0..1.0);
            birkhoff::pn_quadrature(&Rotation::new(alpha), &h, &psi0, n, grid, 32)?
        };
        birkhoff_worst = birkhoff_worst.max((p.total_mass() - 1.0).abs());
    }

    let worst = lattice_worst.max(plancherel_worst).max(birkhoff_worst);
    Ok((
        worst < UNITARITY_TOL,
        format!(
            "max |norm - 1|: lattice {lattice_worst:.2e}, plancherel {plancherel_worst:.2e}, birkhoff {birkhoff_worst:.2e} (tol {UNITARITY_TOL:.0e})"
        ),
    ))
}

// ---------------------------------------------------------------- criterion 2

/// Coin and walker points for the three boxes; each walker box doubles the
/// previous one.
pub const U4_SWEEP: [(usize, usize); 3] = [(16, 64), (64, 256), (256, 1024)];

fn u4_identity() -> Outcome {
    let mut errors = Vec::new();
    for &(coin, walk) in &U4_SWEEP {
        let spec = GridSpec::new(1, coin, walk, 1)?;
        let (psi, _) = product_grid_state(spec, &standard(1)?, &standard(1)?)?;
        errors.push((spec.walk_half_length(), plancherel::check_u4_identity(&psi)?));
    }
    let decreasing = errors.windows(2).all(|w| w[1].1 < w[0].1);
    let last = errors.last().map_or(f64::NAN, |e| e.1);
    let listing: Vec<String> = errors.iter().map(|(l, e)| format!("L={l:.1}: {e:.3e}")).collect();
    Ok((
        decreasing && last < U4_FINAL_TOL,
        format!(
            "{} (strictly decreasing: {decreasing}, final tol {U4_FINAL_TOL:.0e})",
            listing.join(", ")
        ),
    ))
}

// ---------------------------------------------------------------- criterion 3

/// `(2/√π) e^{−4x²}`, the limit for product standard Gaussians in d = 1.
pub fn gaussian_limit(x: f64) -> f64 {
    2.0 / PI.sqrt() * (-4.0 * x * x).exp()
}

pub const LIMIT_SWEEP_N: [usize; 5] = [4, 8, 16, 32, 64];

fn plancherel_limit() -> Outcome {
    let spec = GridSpec::new(1, 256, 256, 1)?;
    let (psi, _) = product_grid_state(spec, &standard(1)?, &standard(1)?)?;
    let q = plancherel::limit_density(&psi)?;
    let analytic_err = (0..q.points())
        .map(|i| (q.values()[i] - gaussian_limit(q.coord(i))).abs())
        .fold(0.0, f64::max);

    let spec = GridSpec::new(1, 256, 2048, 1)?;
    let (psi, _) = product_grid_state(spec, &standard(1)?, &standard(1)?)?;
    let limit = Measure::Density(plancherel::limit_density(&psi)?);
    let zeta = ZetaGrid::default();
    let mut walk = PlancherelWalk::new(psi)?;
    let mut cf = Vec::new();
    for &n in &LIMIT_SWEEP_N {
        walk.advance_to(n)?;
        let q = plancherel::position_density(walk.state())?.rescaled(n)?;
        cf.push(cf_distance(&Measure::Density(q), &limit, &zeta)?);
    }
    let nonincreasing = cf.windows(2).all(|w| w[1] <= w[0]);
    let last = *cf.last().unwrap_or(&f64::NAN);
    let listing: Vec<String> = cf.iter().map(|d| format!("{d:.3e}")).collect();
    let mut detail = format!(
        "analytic max-abs {analytic_err:.2e} (tol {LIMIT_ANALYTIC_TOL:.0e}); cf at n={LIMIT_SWEEP_N:?}: [{}] (final tol {LIMIT_CF_FINAL_TOL})",
        listing.join(", ")
    );
    if let Some(w) = walk.warning() {
        detail.push_str(&format!("; {w}"));
    }
    Ok((
        analytic_err < LIMIT_ANALYTIC_TOL && nonincreasing && last < LIMIT_CF_FINAL_TOL,
        detail,
    ))
}

// ---------------------------------------------------------------- criterion 4

fn chi0_independence() -> Outcome {
    let spec = GridSpec::new(1, 64, 256, 1)?;
    let phi0 = ProductProfile::new(vec![gaussian(0.5, 1.3, 0.7)])?;
    let chi_gauss = ProductProfile::new(vec![gaussian(-0.3, 0.8, 0.0)])?;
    let chi_box = ProductProfile::new(vec![Profile::Box { a: -1.0, b: 1.5 }])?;
    let (a, _) = product_grid_state(spec, &phi0, &chi_gauss)?;
    let (b, _) = product_grid_state(spec, &phi0, &chi_box)?;
    let qa = plancherel::limit_density(&a)?;
    let qb = plancherel::limit_density(&b)?;
    let diff = max_abs_diff(qa.values(), qb.values());
    Ok((
        diff < CHI0_TOL,
        format!("max-abs difference {diff:.2e} (tol {CHI0_TOL:.0e})"),
    ))
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

// ---------------------------------------------------------------- criterion 5

fn power_invariance() -> Outcome {
    let spec = GridSpec::new(1, 64, 256, 1)?;
    let phi0 = ProductProfile::new(vec![gaussian(0.0, 1.0, 1.5)])?;
    let chi0 = ProductProfile::new(vec![Profile::Box { a: -1.0, b: 1.0 }])?;
    let (psi, _) = product_grid_state(spec, &phi0, &chi0)?;
    let base = plancherel::limit_density(&psi)?;
    let mut walk = PlancherelWalk::new(psi)?;
    let mut diffs = Vec::new();
    for _ in 1..=4 {
        walk.step()?;
        let q = plancherel::limit_density(walk.state())?;
        diffs.push(max_abs_diff(base.values(), q.values()));
    }
    let worst = diffs.iter().cloned().fold(0.0, f64::max);
    let listing: Vec<String> = diffs.iter().map(|d| format!("{d:.2e}")).collect();
    Ok((
        worst < POWER_INVARIANCE_TOL,
        format!(
            "max-abs difference for p=1..4: [{}] (tol {POWER_INVARIANCE_TOL:.0e})",
            listing.join(", ")
        ),
    ))
}

// ---------------------------------------------------------------- criterion 6

fn cos_h(k: i64) -> StepFunction {
    StepFunction::scalar(TrigPolynomial::constant(0.0).with_term(cos_term(1.0, [k, 0])))
}

fn birkhoff_limit() -> Outcome {
    // (a) constant steps
    let mut exact = true;
    for n_avg in [1, 10, 10_000] {
        let v = StepFunction::constant(&[0.3])?;
        let m = birkhoff::limit_pushforward(&Rotation::golden(), &v, &CoinDensity::uniform(1), n_avg, 1000, SEED)?;
        exact &= m.points().iter().all(|p| p[0] == 0.3);
        let v = StepFunction::constant(&[-0.25, 1.5])?;
        let m = birkhoff::limit_pushforward(&Baker, &v, &CoinDensity::uniform(2), n_avg, 1000, SEED)?;
        exact &= m.points().iter().all(|p| *p == [-0.25, 1.5]);
    }

    // (b) golden rotation, h = cos 2πω
    let golden = Rotation::golden();
    let h = cos_h(1);
    let coin = CoinDensity::uniform(1);
    let limit = birkhoff::limit_pushforward(&golden, &h, &coin, 10_000, MC_SAMPLES, SEED)?;
    let second = limits::moments(&Measure::Empirical(limit.clone()), 2)?[0][1];
    let psi0 = ProductState::new(standard(1)?, coin.clone())?;
    let limit = Measure::Empirical(limit);
    let zeta = ZetaGrid::default();
    let mut cf = Vec::new();
    for n in [100, 1000, 10_000] {
        let q = birkhoff::sample_rescaled_position(&golden, &h, &psi0, n, MC_SAMPLES, SEED)?;
        cf.push(cf_distance(&Measure::Empirical(q), &limit, &zeta)?);
    }
    let decreasing = cf.windows(2).all(|w| w[1] < w[0]);

    // (c) α = 1/2, h = cos 4πω
    let half = Rotation::rational(1, 2);
    let m = birkhoff::limit_pushforward(&half, &cos_h(2), &coin, birkhoff::DEFAULT_N_AVG, MC_SAMPLES, SEED)?;
    let ks = ks_distance_to(&Measure::Empirical(m), |t| (-t.clamp(-1.0, 1.0)).acos() / PI)?;

    let listing: Vec<String> = cf.iter().map(|d| format!("{d:.3e}")).collect();
    Ok((
        exact && second < SECOND_MOMENT_TOL && decreasing && ks < ARCSINE_KS_TOL,
        format!(
            "(a) exact point mass: {exact}; (b) second moment {second:.2e} (tol {SECOND_MOMENT_TOL:.0e}), cf at n=1e2,1e3,1e4: [{}]; (c) arcsine KS {ks:.2e} (tol {ARCSINE_KS_TOL})",
            listing.join(", ")
        ),
    ))
}

// ---------------------------------------------------------------- criterion 7

pub const CROSS_N: [usize; 3] = [1, 4, 16];
const QUAD_POINTS: usize = 2048;
const ROTATION_CELLS: usize = 4096;
const BAKER_CELLS: usize = 128;

/// Largest `|φ_MC − φ_quad| / band` over the ζ grid; the band is
/// `MC_BAND_SIGMAS` standard errors of the MC estimate, widened by `widen`.
fn cf_band_ratio(
    mc: &crate::measure::EmpiricalMeasure,
    quad: &Measure,
    zeta: &[crate::measure::Point],
    widen: f64,
) -> f64 {
    let n = mc.len() as f64;
    let a = characteristic_function(&Measure::Empirical(mc.clone()), zeta);
    let b = characteristic_function(quad, zeta);
    zeta.iter()
        .zip(a.iter().zip(&b))
        .map(|(z, (fa, fb))| {
            // E|e^{iζX}|² = 1, so Var cos + Var sin = 1 − |φ|²
            let second = mc
                .points()
                .iter()
                .map(|p| {
                    let t = z[0] * p[0] + z[1] * p[1];
                    let c = t.cos() - fa.re;
                    let s = t.sin() - fa.im;
                    c * c + s * s
                })
                .sum::<f64>()
                / (n - 1.0);
            let band = MC_BAND_SIGMAS * widen * (second / n).sqrt() + 1e-9;
            (fa - fb).norm() / band
        })
        .fold(0.0, f64::max)
}

fn cross_validate<S: MeasurePreserving>(
    sys: &S,
    h: &StepFunction,
    coin: CoinDensity,
    cells: usize,
    widen: f64,
) -> Result<Vec<f64>> {
    let psi0 = ProductState::new(ProductProfile::new(vec![gaussian(0.3, 1.0, 0.0)])?, coin)?;
    let zeta = ZetaGrid::default().nodes(1);
    let sup = h.sup_bound()[0];
    let mut ratios = Vec::new();
    for &n in &CROSS_N {
        let mc = birkhoff::sample_rescaled_position(sys, h, &psi0, n, MC_SAMPLES, SEED)?;
        let reach = sup + 10.0 / n as f64;
        let s = n as f64;
        let p = birkhoff::pn_quadrature(
            sys,
            h,
            &psi0,
            n,
            XGrid::covering(-reach * s, reach * s, QUAD_POINTS),
            cells,
        )?;
        let q = Measure::Density(p.rescaled(n)?);
        ratios.push(cf_band_ratio(&mc, &q, &zeta, widen));
    }
    Ok(ratios)
}

fn cross_validation() -> Outcome {
    let h = StepFunction::scalar(
        TrigPolynomial::constant(0.4)
            .with_term(cos_term(1.0, [1, 0]))
            .with_term(TrigTerm::sin(0.5, [3, 0])),
    );
    let coin = CoinDensity::trig_amplitude(1, TrigPolynomial::constant(1.0).with_term(cos_term(0.6, [1, 0])))?;
    let rotation = cross_validate(&Rotation::golden(), &h, coin, ROTATION_CELLS, 1.0)?;

    let h = StepFunction::scalar(
        TrigPolynomial::constant(0.2)
            .with_term(cos_term(1.0, [1, 0]))
            .with_term(TrigTerm::sin(0.7, [0, 1])),
    );
    let coin = CoinDensity::trig_amplitude(2, TrigPolynomial::constant(1.0).with_term(cos_term(0.5, [1, 1])))?;
    // the baker nodes are themselves random, one per cell
    let widen = (1.0 + MC_SAMPLES as f64 / (BAKER_CELLS * BAKER_CELLS) as f64).sqrt();
    let baker = cross_validate(&Baker, &h, coin, BAKER_CELLS, widen)?;

    let worst = rotation.iter().chain(&baker).cloned().fold(0.0, f64::max);
    let fmt = |v: &[f64]| v.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>().join(", ");
    Ok((
        worst <= 1.0,
        format!(
            "max |cf_mc - cf_quad| / band at n={CROSS_N:?}: rotation [{}], baker [{}] (pass <= 1, band {MC_BAND_SIGMAS} sigma)",
            fmt(&rotation),
            fmt(&baker)
        ),
    ))
}

// ---------------------------------------------------------------- criterion 8

pub const SUPPORT_FROM: usize = 100;
pub const SUPPORT_TO: usize = 200;
pub const ORACLE_MAX_N: usize = 8;
/// Steps per block of the envelope test; longer than the period at which
/// the outermost occupied site crosses the moving edge.
pub const SUPPORT_BLOCK: usize = 10;

/// `U^n ψ` by dense matrix powers on sites `−n..=n`.
pub fn dense_hadamard(heads: Complex64, tails: Complex64, n: usize) -> Vec<[Complex64; 2]> {
    let sites = 2 * n + 1;
    let dim = 2 * sites;
    let zero = Complex64::new(0.0, 0.0);
    let idx = |site: usize, coin: usize| 2 * site + coin;
    let mut u = vec![vec![zero; dim]; dim];
    let r = Complex64::new(FRAC_1_SQRT_2, 0.0);
    for s in 0..sites {
        // heads ← (h + t)/√2 moved right, tails ← (h − t)/√2 moved left
        if s + 1 < sites {
            u[idx(s + 1, 0)][idx(s, 0)] += r;
            u[idx(s + 1, 0)][idx(s, 1)] += r;
        }
        if s > 0 {
            u[idx(s - 1, 1)][idx(s, 0)] += r;
            u[idx(s - 1, 1)][idx(s, 1)] -= r;
        }
    }
    let mul = |a: &Vec<Vec<Complex64>>, b: &Vec<Vec<Complex64>>| -> Vec<Vec<Complex64>> {
        (0..dim)
            .map(|i| (0..dim).map(|j| (0..dim).map(|k| a[i][k] * b[k][j]).sum()).collect())
            .collect()
    };
    let mut power: Vec<Vec<Complex64>> = (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| if i == j { Complex64::new(1.0, 0.0) } else { zero })
                .collect()
        })
        .collect();
    for _ in 0..n {
        power = mul(&u, &power);
    }
    let mut v = vec![zero; dim];
    v[idx(n, 0)] = heads;
    v[idx(n, 1)] = tails;
    (0..sites)
        .map(|s| {
            let row = |c| (0..dim).map(|k| power[idx(s, c)][k] * v[k]).sum();
            [row(0), row(1)]
        })
        .collect()
}

fn hadamard_support() -> Outcome {
    let edge = FRAC_1_SQRT_2 + SUPPORT_MARGIN;
    let mut state = LatticeState::basis(0, Coin::Heads).evolve(SUPPORT_FROM);
    let mut outside = Vec::new();
    for n in SUPPORT_FROM..=SUPPORT_TO {
        if n > SUPPORT_FROM {
            state = state.hadamard_step();
        }
        let m = rescaled_lattice_measure(&state.distribution(), n)?;
        outside.push(mass_outside(&m, -edge, edge));
    }
    let last = *outside.last().unwrap_or(&f64::NAN);
    let violations = outside.windows(2).filter(|w| w[1] > w[0]).count();
    // one step at a time the mass saw-tooths as sites cross the edge, so
    // monotonicity is asked of the per-block maxima
    let envelope: Vec<f64> = outside
        .chunks(SUPPORT_BLOCK)
        .map(|c| c.iter().cloned().fold(0.0, f64::max))
        .collect();
    let envelope_ok = envelope.windows(2).all(|w| w[1] <= w[0]);

    let mut oracle_err = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let inits = [
        (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
        (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)),
        (Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::new(0.0, FRAC_1_SQRT_2)),
        (random_complex(&mut rng), random_complex(&mut rng)),
    ];
    for (a, b) in inits {
        let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (a, b) = (a / norm, b / norm);
        for n in 0..=ORACLE_MAX_N {
            let walk = LatticeState::localized(0, a, b)?.evolve(n);
            for (i, amp) in dense_hadamard(a, b, n).iter().enumerate() {
                let site = i as i64 - n as i64;
                oracle_err = oracle_err
                    .max((walk.amplitude(site, Coin::Heads) - amp[0]).norm())
                    .max((walk.amplitude(site, Coin::Tails) - amp[1]).norm());
            }
        }
    }
    Ok((
        last < SUPPORT_MASS_TOL && envelope_ok && oracle_err < ORACLE_TOL,
        format!(
            "mass outside at n={SUPPORT_FROM}: {:.3e}, n={SUPPORT_TO}: {last:.3e} (tol {SUPPORT_MASS_TOL}), {SUPPORT_BLOCK}-step envelope nonincreasing: {envelope_ok} (single-step increases: {violations}); dense oracle n<={ORACLE_MAX_N}: {oracle_err:.2e} (tol {ORACLE_TOL:.0e})",
            outside[0]
        ),
    ))
}

// ---------------------------------------------------------------- criterion 9

/// A small run touching every parallel code path of the Birkhoff walk.
pub const DETERMINISM_CONFIG: &str = r#"
walk = "birkhoff"
n = [1, 4, 16]
seed = 7

[birkhoff]
system = "rotation"
alpha = "golden"
h = { constant = 0.2, terms = [{ coeff = 1.0, wave = "cos", freq = 1 }] }
phi0 = { kind = "gaussian" }
coin = { kind = "trig", constant = 1.0, terms = [{ coeff = 0.5, wave = "cos", freq = 1 }] }
samples = 20000
n_avg = 1000
quadrature = { lo = -5.0, hi = 5.0, points = 256, omega_cells = 512 }
"#;

/// CSV files of `dir`, by name.
pub fn csv_bodies(dir: &Path) -> Result<Vec<(String, Vec<u8>)>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().is_some_and(|e| e == "csv") {
            let body = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
            out.push((path.file_name().unwrap().to_string_lossy().into_owned(), body));
        }
    }
    out.sort();
    Ok(out)
}

fn determinism() -> Outcome {
    let config = parse_config(DETERMINISM_CONFIG)?;
    let root = std::env::temp_dir().join(format!("qwalk-verify-{}", std::process::id()));
    let mut bodies = Vec::new();
    let threads = [1usize, 4];
    for &t in &threads {
        let out: PathBuf = root.join(format!("threads-{t}"));
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::arg("threads", e.to_string()))?;
        pool.install(|| {
            runner::run(
                &config,
                &RunOptions {
                    out: Some(out.clone()),
                    ..RunOptions::default()
                },
            )
        })?;
        bodies.push(csv_bodies(&out)?);
    }
    let _ = std::fs::remove_dir_all(&root);
    let identical = bodies[0] == bodies[1];
    Ok((
        identical && !bodies[0].is_empty(),
        format!(
            "{} CSV files, byte-identical across {threads:?} threads: {identical}",
            bodies[0].len()
        ),
    ))
}
