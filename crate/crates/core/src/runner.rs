//! Runs a parsed [`ExperimentConfig`] and writes its artifacts.
//!
//! Every run writes `q_n_<n>.csv` for each horizon, `q_n.csv` (the last
//! horizon), `report.json` with `report.csv`, and `manifest.json`. Plancherel
//! and Birkhoff runs add `q_limit.csv`; Hadamard and Plancherel runs add
//! `summary.json`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use crate::birkhoff::{self, Baker, MeasurePreserving, ProductState, Rotation, XGrid};
use crate::config::{
    AlphaSpec, BirkhoffConfig, ExperimentConfig, HadamardConfig, PlancherelConfig, PlancherelPsi0, SystemConfig,
    WalkConfig,
};
use crate::emit::{self, DensityHeader};
use crate::error::{Error, Result};
use crate::grid::io as grid_io;
use crate::lattice::{mass_outside, rescaled_lattice_measure, LatticeState};
use crate::limits::{cauchy_sweep, convergence_sweep, ConvergenceReport, Measure};
use crate::plancherel::{self, PlancherelWalk};
use crate::psi0::product_grid_state;

/// Exit status of a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit status for an unexpected failure (I/O, numerics).
pub const EXIT_ERROR: i32 = 1;
/// Exit status when the configuration does not validate.
pub const EXIT_INVALID: i32 = 2;
/// Exit status when `--strict` turns a runtime warning into a failure.
pub const EXIT_STRICT: i32 = 3;

/// Runs whose Birkhoff averages stabilize for fewer atoms than this get a
/// warning.
pub const STABILIZED_FRACTION_TARGET: f64 = 0.99;

/// Default output directory when neither the config nor `--out` names one.
pub const DEFAULT_OUTPUT: &str = "qwalk-out";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub strict: bool,
    pub out: Option<PathBuf>,
    /// Directory that relative paths inside the config are resolved against.
    pub base_dir: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub artifacts: Vec<PathBuf>,
    pub warnings: Vec<String>,
    pub report: ConvergenceReport,
}

impl RunOutcome {
    pub fn exit_code(&self, strict: bool) -> i32 {
        if strict && !self.warnings.is_empty() {
            EXIT_STRICT
        } else {
            EXIT_OK
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    program: &'static str,
    version: &'static str,
    walk: &'static str,
    n: &'a [usize],
    seed: Option<u64>,
    threads: usize,
    strict: bool,
    wall_time_seconds: f64,
    warnings: &'a [String],
    artifacts: Vec<String>,
    config: String,
}

struct Sink {
    dir: PathBuf,
    artifacts: Vec<PathBuf>,
}

impl Sink {
    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.artifacts.push(p.clone());
        p
    }
}

pub fn run(config: &ExperimentConfig, opts: &RunOptions) -> Result<RunOutcome> {
    let started = Instant::now();
    let out_dir = opts
        .out
        .clone()
        .or_else(|| {
            config.output.as_ref().map(|o| match &opts.base_dir {
                Some(b) if o.is_relative() => b.join(o),
                _ => o.clone(),
            })
        })
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT));
    std::fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
    let mut sink = Sink {
        dir: out_dir.clone(),
        artifacts: Vec::new(),
    };
    let (report, warnings) = match &config.walk {
        WalkConfig::Hadamard(h) => run_hadamard(config, h, &mut sink)?,
        WalkConfig::Plancherel(p) => run_plancherel(config, p, opts, &mut sink)?,
        WalkConfig::Birkhoff(b) => run_birkhoff(config, b, &mut sink)?,
    };
    let report_path = sink.path("report.json");
    emit::write_report(&report, &report_path)?;
    sink.artifacts.push(report_path.with_extension("csv"));

    let manifest_path = sink.path("manifest.json");
    let manifest = Manifest {
        program: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        walk: config.walk.name(),
        n: &config.n,
        seed: config.seed,
        threads: rayon::current_num_threads(),
        strict: opts.strict,
        wall_time_seconds: started.elapsed().as_secs_f64(),
        warnings: &warnings,
        artifacts: sink
            .artifacts
            .iter()
            .filter_map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()))
            .collect(),
        config: config.to_toml(),
    };
    emit::write_json(&manifest, &manifest_path)?;
    Ok(RunOutcome {
        out_dir,
        artifacts: sink.artifacts,
        warnings,
        report,
    })
}

/// Serves precomputed measures to the sweep functions.
fn lookup(
    measures: &BTreeMap<usize, (Measure, Vec<String>)>,
) -> impl Fn(usize) -> Result<(Measure, Vec<String>)> + Sync + '_ {
    move |n| {
        measures
            .get(&n)
            .cloned()
            .ok_or_else(|| Error::arg("n", format!("no measure at n = {n}")))
    }
}

fn run_hadamard(
    config: &ExperimentConfig,
    h: &HadamardConfig,
    sink: &mut Sink,
) -> Result<(ConvergenceReport, Vec<String>)> {
    let c = |v: [f64; 2]| Complex64::new(v[0], v[1]);
    let mut state = LatticeState::localized(h.site, c(h.heads), c(h.tails))?;
    let mut steps = 0;
    let mut measures = BTreeMap::new();
    let mut last = None;
    let mut outside = Vec::new();
    let edge = std::f64::consts::FRAC_1_SQRT_2 + 0.05;
    for &n in &config.n {
        state = state.evolve(n - steps);
        steps = n;
        let m = rescaled_lattice_measure(&state.distribution(), n)?;
        outside.push((n, mass_outside(&m, -edge, edge)));
        emit::write_measure(&m, &sink.path(&format!("q_n_{n}.csv")))?;
        sink.artifacts.push(sink.dir.join(format!("q_n_{n}.json")));
        last = Some(m.clone());
        measures.insert(n, (Measure::Empirical(m), Vec::new()));
    }
    if let Some(m) = last {
        emit::write_measure(&m, &sink.path("q_n.csv"))?;
        sink.artifacts.push(sink.dir.join("q_n.json"));
    }
    #[derive(Serialize)]
    struct Summary {
        norm: f64,
        /// Rescaled mass outside `[−1/√2 − 0.05, 1/√2 + 0.05]` per horizon.
        mass_outside_support: Vec<(usize, f64)>,
    }
    emit::write_json(
        &Summary {
            norm: state.norm_sqr().sqrt(),
            mass_outside_support: outside,
        },
        &sink.path("summary.json"),
    )?;
    let walk = lookup(&measures);
    let report = if config.n.len() >= 2 {
        cauchy_sweep("hadamard", &walk, &config.n, &config.zeta)?
    } else {
        // a single horizon has nothing to compare with; report it against itself
        let (m, _) = walk(config.n[0])?;
        convergence_sweep("hadamard", &walk, &config.n, &m, &config.zeta)?
    };
    Ok((report, Vec::new()))
}

fn resolve(path: &Path, base: Option<&Path>) -> PathBuf {
    match base {
        Some(b) if path.is_relative() => b.join(path),
        _ => path.to_path_buf(),
    }
}

fn run_plancherel(
    config: &ExperimentConfig,
    p: &PlancherelConfig,
    opts: &RunOptions,
    sink: &mut Sink,
) -> Result<(ConvergenceReport, Vec<String>)> {
    let (psi0, initial_norm) = match &p.psi0 {
        PlancherelPsi0::Product { phi0, chi0 } => {
            let (psi, norm) = product_grid_state(p.grid, phi0, chi0)?;
            log::info!("ψ₀ normalized on the grid (norm before: {norm:.16e})");
            (psi, norm)
        }
        PlancherelPsi0::File(f) => {
            let path = resolve(f, opts.base_dir.as_deref());
            let mut psi = grid_io::load(&path)?;
            if *psi.spec() != p.grid {
                return Err(Error::GridMismatch(format!(
                    "{} holds a {:?} grid, the config asks for {:?}",
                    path.display(),
                    psi.spec(),
                    p.grid
                )));
            }
            if psi.x_domain() != crate::grid::Domain::Position {
                psi = psi.dft(crate::grid::Axes::X, crate::grid::Direction::Inverse)?;
            }
            let norm = psi.normalize()?;
            log::info!("ψ₀ from {} normalized (norm before: {norm:.16e})", path.display());
            (psi, norm)
        }
    };
    let spec = p.grid;
    let u4_error = plancherel::check_u4_identity(&psi0)?;
    let limit = plancherel::limit_density(&psi0)?;
    emit::write_density(
        &limit,
        &DensityHeader {
            n: None,
            half_length: 0.5 * limit.points() as f64 * limit.spacing(),
            points: limit.points(),
        },
        &sink.path("q_limit.csv"),
    )?;

    let mut walk = PlancherelWalk::new(psi0)?;
    let mut warnings = Vec::new();
    let mut measures = BTreeMap::new();
    let mut reported = false;
    for &n in &config.n {
        walk.advance_to(n)?;
        let mut step_warnings = Vec::new();
        if let (false, Some(w)) = (reported, walk.warning()) {
            step_warnings.push(format!("plancherel: {w}"));
            reported = true;
        }
        let q = plancherel::position_density(walk.state())?.rescaled(n)?;
        let header = DensityHeader {
            n: Some(n),
            half_length: spec.walk_half_length(),
            points: spec.walk_points(),
        };
        emit::write_density(&q, &header, &sink.path(&format!("q_n_{n}.csv")))?;
        if Some(&n) == config.n.last() {
            emit::write_density(&q, &header, &sink.path("q_n.csv"))?;
        }
        warnings.extend(step_warnings.iter().cloned());
        measures.insert(n, (Measure::Density(q), step_warnings));
    }

    #[derive(Serialize)]
    struct Summary {
        n: usize,
        /// Grid norm of ψ₀ before it was normalized.
        initial_norm: f64,
        norm: f64,
        boundary_mass: f64,
        max_boundary_mass: f64,
        u4_error: f64,
        coin_half_length: f64,
        walk_half_length: f64,
    }
    emit::write_json(
        &Summary {
            n: walk.steps(),
            initial_norm,
            norm: walk.state().norm(),
            boundary_mass: walk.state().boundary_mass(),
            max_boundary_mass: walk.max_boundary_mass(),
            u4_error,
            coin_half_length: spec.coin_half_length(),
            walk_half_length: spec.walk_half_length(),
        },
        &sink.path("summary.json"),
    )?;
    let report = convergence_sweep(
        "plancherel",
        &lookup(&measures),
        &config.n,
        &Measure::Density(limit),
        &config.zeta,
    )?;
    Ok((report, warnings))
}

fn run_birkhoff(
    config: &ExperimentConfig,
    b: &BirkhoffConfig,
    sink: &mut Sink,
) -> Result<(ConvergenceReport, Vec<String>)> {
    match b.system {
        SystemConfig::Baker => birkhoff_with(&Baker, config, b, sink),
        SystemConfig::Rotation(a) => {
            let r = match a {
                AlphaSpec::Golden => Rotation::golden(),
                AlphaSpec::Value(v) => Rotation::new(v),
                AlphaSpec::Rational { p, q } => Rotation::rational(p, q),
            };
            birkhoff_with(&r, config, b, sink)
        }
    }
}

fn birkhoff_with<S: MeasurePreserving>(
    sys: &S,
    config: &ExperimentConfig,
    b: &BirkhoffConfig,
    sink: &mut Sink,
) -> Result<(ConvergenceReport, Vec<String>)> {
    let seed = config
        .seed
        .ok_or_else(|| Error::Config(vec!["seed: required for birkhoff runs".into()]))?;
    let coin = b.coin.build(sys.omega_dim())?;
    let psi0 = ProductState::new(b.phi0.clone(), coin.clone())?;
    let mut warnings = Vec::new();

    let limit = birkhoff::limit_pushforward(sys, &b.h, &coin, b.n_avg, b.samples, seed)?;
    if let Some(f) = limit.meta.stabilized_fraction {
        if f < STABILIZED_FRACTION_TARGET {
            warnings.push(format!(
                "birkhoff: only {:.2}% of Birkhoff averages at n_avg = {} agree with n_avg/2 within {:.0e}",
                100.0 * f,
                b.n_avg,
                birkhoff::STABILIZATION_TOLERANCE
            ));
        }
    }
    emit::write_measure(&limit, &sink.path("q_limit.csv"))?;
    sink.artifacts.push(sink.dir.join("q_limit.json"));

    let mut measures = BTreeMap::new();
    for &n in &config.n {
        let m = birkhoff::sample_rescaled_position(sys, &b.h, &psi0, n, b.samples, seed)?;
        emit::write_measure(&m, &sink.path(&format!("q_n_{n}.csv")))?;
        sink.artifacts.push(sink.dir.join(format!("q_n_{n}.json")));
        if Some(&n) == config.n.last() {
            emit::write_measure(&m, &sink.path("q_n.csv"))?;
            sink.artifacts.push(sink.dir.join("q_n.json"));
        }
        if let Some(q) = b.quadrature {
            let s = n as f64;
            let grid = XGrid::covering(q.lo * s, q.hi * s, q.points);
            let p = birkhoff::pn_quadrature(sys, &b.h, &psi0, n, grid, q.omega_cells)?;
            let mass = p.total_mass();
            let qd = p.rescaled(n)?;
            emit::write_density(
                &qd,
                &DensityHeader {
                    n: Some(n),
                    half_length: 0.5 * (q.hi - q.lo),
                    points: q.points,
                },
                &sink.path(&format!("q_quad_{n}.csv")),
            )?;
            if (mass - 1.0).abs() > 1e-6 {
                warnings.push(format!(
                    "birkhoff: quadrature grid [{}, {}) holds mass {mass:.8} at n = {n}",
                    q.lo, q.hi
                ));
            }
        }
        measures.insert(n, (Measure::Empirical(m), Vec::new()));
    }
    let report = convergence_sweep(
        "birkhoff",
        &lookup(&measures),
        &config.n,
        &Measure::Empirical(limit),
        &config.zeta,
    )?;
    Ok((report, warnings))
}

/// Reads, validates and runs a config file; returns the process exit code.
pub fn run_file(path: &Path, opts: &RunOptions) -> i32 {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}", Error::io(path, e));
            return EXIT_INVALID;
        }
    };
    let config = match crate::config::parse_config(&text) {
        Ok(c) => c,
        Err(Error::Config(errs)) => {
            eprintln!("error: invalid configuration {}:", path.display());
            for e in errs {
                eprintln!("  {e}");
            }
            return EXIT_INVALID;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INVALID;
        }
    };
    let mut opts = opts.clone();
    if opts.base_dir.is_none() {
        opts.base_dir = path.parent().map(Path::to_path_buf);
    }
    match run(&config, &opts) {
        Ok(outcome) => {
            println!(
                "wrote {} artifacts to {}",
                outcome.artifacts.len(),
                outcome.out_dir.display()
            );
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            outcome.exit_code(opts.strict)
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::InvalidGrid(_) | Error::InvalidArgument { .. } => EXIT_INVALID,
                _ => EXIT_ERROR,
            }
        }
    }
}
