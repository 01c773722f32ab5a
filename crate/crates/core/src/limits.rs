//! Comparing probability measures on ℝᵈ: characteristic functions, CDF
//! distances, moments and convergence sweeps.
//!
//! The characteristic function is `φ(ζ) = ∫ e^{iζ·x} dm(x)` with no
//! prefactor. For a density `Q` this is `(2π)^{d/2}` times the inverse
//! unitary Fourier transform of `Q` at ζ.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{Binning, DensityOnGrid};
use crate::error::{Error, Result};
use crate::lattice::LatticeDistribution;
use crate::measure::{EmpiricalMeasure, Point};
use crate::numeric::neumaier_sum;

/// Largest moment order [`moments`] computes.
pub const MAX_MOMENT_ORDER: usize = 8;

/// A probability measure in one of the representations the walks produce.
#[derive(Debug, Clone, PartialEq)]
pub enum Measure {
    Density(DensityOnGrid),
    Empirical(EmpiricalMeasure),
    /// The lattice law at step `n`, read at the points `j / n`.
    Lattice {
        dist: LatticeDistribution,
        n: usize,
    },
}

impl From<DensityOnGrid> for Measure {
    fn from(d: DensityOnGrid) -> Self {
        Measure::Density(d)
    }
}

impl From<EmpiricalMeasure> for Measure {
    fn from(m: EmpiricalMeasure) -> Self {
        Measure::Empirical(m)
    }
}

impl Measure {
    pub fn lattice(dist: LatticeDistribution, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::arg("n", "rescaling needs n ≥ 1"));
        }
        Ok(Measure::Lattice { dist, n })
    }

    pub fn dim(&self) -> usize {
        match self {
            Measure::Density(d) => d.dim(),
            Measure::Empirical(m) => m.dim(),
            Measure::Lattice { .. } => 1,
        }
    }

    pub fn total_mass(&self) -> f64 {
        match self {
            Measure::Density(d) => d.total_mass(),
            Measure::Empirical(m) => m.total_mass(),
            Measure::Lattice { dist, .. } => dist.total(),
        }
    }

    /// The measure as weighted atoms; a density contributes one atom per
    /// grid node carrying the node's cell mass.
    fn atoms(&self) -> Vec<(Point, f64)> {
        match self {
            Measure::Density(d) => {
                let v = d.cell_volume();
                d.values()
                    .iter()
                    .enumerate()
                    .filter(|(_, f)| **f > 0.0)
                    .map(|(i, f)| (d.node(i), f * v))
                    .collect()
            }
            Measure::Empirical(m) => m.atoms().map(|(p, w)| (*p, w)).collect(),
            Measure::Lattice { dist, n } => dist.support().map(|(j, p)| ([j as f64 / *n as f64, 0.0], p)).collect(),
        }
    }

    /// The one-dimensional marginal along `axis`.
    pub fn marginal(&self, axis: usize) -> Result<Measure> {
        if axis >= self.dim() {
            return Err(Error::arg(
                "axis",
                format!("axis {axis} of a {}-dimensional measure", self.dim()),
            ));
        }
        Ok(match self {
            Measure::Density(d) => Measure::Density(d.marginal(axis)),
            Measure::Empirical(m) if m.dim() == 2 => {
                let (points, weights): (Vec<Point>, Vec<f64>) =
                    m.marginal(axis).into_iter().map(|(x, w)| ([x, 0.0], w)).unzip();
                Measure::Empirical(EmpiricalMeasure::new(1, points, weights)?.with_meta(m.meta.clone()))
            }
            other => other.clone(),
        })
    }

    /// The CDF of a one-dimensional measure. Grid densities are read as
    /// constant on each cell, which makes their CDF piecewise linear.
    pub fn cdf(&self) -> Result<Cdf> {
        if self.dim() != 1 {
            return Err(Error::Unsupported("CDF of a two-dimensional measure".into()));
        }
        Ok(match self {
            Measure::Density(d) => {
                let dx = d.spacing();
                let mut edges = Vec::with_capacity(d.points() + 1);
                let mut cum = Vec::with_capacity(d.points() + 1);
                edges.push(d.coord(0) - 0.5 * dx);
                cum.push(0.0);
                let mut acc = 0.0;
                for (i, f) in d.values().iter().enumerate() {
                    acc += f * dx;
                    edges.push(d.coord(i) + 0.5 * dx);
                    cum.push(acc);
                }
                Cdf::Linear { edges, cum }
            }
            _ => {
                let mut atoms: Vec<(f64, f64)> = self.atoms().into_iter().map(|(p, w)| (p[0], w)).collect();
                atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mut xs: Vec<f64> = Vec::with_capacity(atoms.len());
                let mut cum: Vec<f64> = Vec::with_capacity(atoms.len());
                let mut acc = 0.0;
                for (x, w) in atoms {
                    acc += w;
                    if xs.last() == Some(&x) {
                        *cum.last_mut().expect("nonempty") = acc;
                    } else {
                        xs.push(x);
                        cum.push(acc);
                    }
                }
                Cdf::Steps { xs, cum }
            }
        })
    }
}

/// A one-dimensional cumulative distribution function.
#[derive(Debug, Clone, PartialEq)]
pub enum Cdf {
    /// Jumps at `xs` to the running totals `cum`.
    Steps { xs: Vec<f64>, cum: Vec<f64> },
    /// Linear between `edges`, with values `cum` there.
    Linear { edges: Vec<f64>, cum: Vec<f64> },
}

impl Cdf {
    /// `F(x)`, right-continuous.
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Cdf::Steps { xs, cum } => {
                let k = xs.partition_point(|a| *a <= x);
                if k == 0 {
                    0.0
                } else {
                    cum[k - 1]
                }
            }
            Cdf::Linear { edges, cum } => linear_eval(edges, cum, x),
        }
    }

    /// `F(x⁻)`.
    pub fn eval_left(&self, x: f64) -> f64 {
        match self {
            Cdf::Steps { xs, cum } => {
                let k = xs.partition_point(|a| *a < x);
                if k == 0 {
                    0.0
                } else {
                    cum[k - 1]
                }
            }
            Cdf::Linear { edges, cum } => linear_eval(edges, cum, x),
        }
    }

    fn breakpoints(&self) -> &[f64] {
        match self {
            Cdf::Steps { xs, .. } => xs,
            Cdf::Linear { edges, .. } => edges,
        }
    }
}

fn linear_eval(edges: &[f64], cum: &[f64], x: f64) -> f64 {
    let k = edges.partition_point(|e| *e <= x);
    if k == 0 {
        0.0
    } else if k == edges.len() {
        cum[k - 1]
    } else {
        let t = (x - edges[k - 1]) / (edges[k] - edges[k - 1]);
        cum[k - 1] + t * (cum[k] - cum[k - 1])
    }
}

/// The ζ nodes `[−Z, Z]` sampled uniformly, per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZetaGrid {
    pub window: f64,
    /// Nodes in one dimension.
    pub points: usize,
    /// Nodes per axis in two dimensions.
    pub points_2d: usize,
}

impl Default for ZetaGrid {
    fn default() -> Self {
        Self {
            window: 8.0,
            points: 257,
            points_2d: 33,
        }
    }
}

impl ZetaGrid {
    pub fn new(window: f64, points: usize) -> Result<Self> {
        let g = Self {
            window,
            points,
            ..Self::default()
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.window > 0.0) || !self.window.is_finite() {
            return Err(Error::arg("zeta_window", format!("{} must be positive", self.window)));
        }
        if self.points < 2 || self.points_2d < 2 {
            return Err(Error::arg("zeta_points", "at least two nodes per axis"));
        }
        Ok(())
    }

    fn axis(&self, m: usize) -> Vec<f64> {
        (0..m)
            .map(|i| -self.window + 2.0 * self.window * i as f64 / (m - 1) as f64)
            .collect()
    }

    pub fn nodes(&self, dim: usize) -> Vec<Point> {
        if dim == 1 {
            self.axis(self.points).into_iter().map(|z| [z, 0.0]).collect()
        } else {
            let a = self.axis(self.points_2d);
            a.iter().flat_map(|u| a.iter().map(move |v| [*u, *v])).collect()
        }
    }
}

fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-8 {
        1.0 - t * t / 6.0
    } else {
        t.sin() / t
    }
}

/// `φ(ζ)` at each node: exact sums for atoms, Riemann sums for sampled
/// densities, and exact integrals of the piecewise-constant density for
/// cell averages.
pub fn characteristic_function(m: &Measure, zeta: &[Point]) -> Vec<Complex64> {
    let atoms = m.atoms();
    let cell = match m {
        Measure::Density(d) if d.binning() == Binning::CellAverages => Some((d.spacing(), d.dim())),
        _ => None,
    };
    zeta.par_iter()
        .map(|z| {
            let re = neumaier_sum(atoms.iter().map(|(p, w)| w * (z[0] * p[0] + z[1] * p[1]).cos()));
            let im = neumaier_sum(atoms.iter().map(|(p, w)| w * (z[0] * p[0] + z[1] * p[1]).sin()));
            let factor = match cell {
                Some((dx, dim)) => (0..dim).map(|k| sinc(0.5 * z[k] * dx)).product(),
                None => 1.0,
            };
            Complex64::new(re, im) * factor
        })
        .collect()
}

fn same_dim(a: &Measure, b: &Measure) -> Result<usize> {
    if a.dim() != b.dim() {
        return Err(Error::GridMismatch(format!(
            "comparing a {}-dimensional measure with a {}-dimensional one",
            a.dim(),
            b.dim()
        )));
    }
    Ok(a.dim())
}

/// `sup_ζ |φ₁(ζ) − φ₂(ζ)|` over the grid.
pub fn cf_distance(a: &Measure, b: &Measure, grid: &ZetaGrid) -> Result<f64> {
    grid.validate()?;
    let dim = same_dim(a, b)?;
    let nodes = grid.nodes(dim);
    let fa = characteristic_function(a, &nodes);
    let fb = characteristic_function(b, &nodes);
    Ok(fa.iter().zip(&fb).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
}

fn ks_1d(a: &Cdf, b: &Cdf) -> f64 {
    a.breakpoints()
        .iter()
        .chain(b.breakpoints())
        .map(|&x| {
            let right = (a.eval(x) - b.eval(x)).abs();
            let left = (a.eval_left(x) - b.eval_left(x)).abs();
            right.max(left)
        })
        .fold(0.0, f64::max)
        .min(1.0)
}

fn per_marginal(a: &Measure, b: &Measure, f: impl Fn(&Cdf, &Cdf) -> f64) -> Result<f64> {
    let dim = same_dim(a, b)?;
    let mut worst = 0.0f64;
    for axis in 0..dim {
        let ca = a.marginal(axis)?.cdf()?;
        let cb = b.marginal(axis)?.cdf()?;
        worst = worst.max(f(&ca, &cb));
    }
    Ok(worst)
}

/// `sup_x |F₁(x) − F₂(x)|`; the largest marginal distance in two dimensions.
pub fn ks_distance(a: &Measure, b: &Measure) -> Result<f64> {
    per_marginal(a, b, ks_1d)
}

/// KS distance between a one-dimensional measure and a continuous CDF.
///
/// Exact for atomic measures. For grid densities the CDF is compared at the
/// cell edges and midpoints.
pub fn ks_distance_to(m: &Measure, cdf: impl Fn(f64) -> f64) -> Result<f64> {
    let c = m.cdf()?;
    let d = match &c {
        Cdf::Steps { xs, .. } => xs
            .iter()
            .map(|&x| {
                let f = cdf(x);
                (c.eval(x) - f).abs().max((c.eval_left(x) - f).abs())
            })
            .fold(0.0, f64::max),
        Cdf::Linear { edges, .. } => edges
            .iter()
            .zip(edges.iter().skip(1))
            .flat_map(|(a, b)| [*a, 0.5 * (a + b), *b])
            .map(|x| (c.eval(x) - cdf(x)).abs())
            .fold(0.0, f64::max),
    };
    Ok(d)
}

/// Whether `G(x) ≤ F(x + ε) + ε` for every x.
fn levy_below(g: &Cdf, f: &Cdf, eps: f64) -> bool {
    // G − F(· + ε) can only peak where G jumps or where F(· + ε) is about to
    const SLACK: f64 = 1e-12;
    g.breakpoints()
        .iter()
        .all(|&x| g.eval(x) <= f.eval(x + eps) + eps + SLACK)
        && f.breakpoints()
            .iter()
            .all(|&b| g.eval_left(b - eps) <= f.eval_left(b) + eps + SLACK)
}

fn levy_1d(a: &Cdf, b: &Cdf) -> f64 {
    let ok = |eps: f64| levy_below(a, b, eps) && levy_below(b, a, eps);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if ok(0.0) {
        return 0.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Lévy distance `inf{ε : F₁(x − ε) − ε ≤ F₂(x) ≤ F₁(x + ε) + ε ∀x}`, to a
/// relative precision of about 1e−15; the largest marginal distance in two
/// dimensions. Unlike the KS distance it metrizes weak convergence towards
/// limits with atoms.
pub fn levy_distance(a: &Measure, b: &Measure) -> Result<f64> {
    per_marginal(a, b, levy_1d)
}

/// Raw moments `E[xₖʲ]` for `j = 1..=order`; `table[k][j − 1]`.
pub fn moments(m: &Measure, order: usize) -> Result<Vec<Vec<f64>>> {
    if order == 0 || order > MAX_MOMENT_ORDER {
        return Err(Error::arg("order", format!("{order} not in 1..={MAX_MOMENT_ORDER}")));
    }
    let dim = m.dim();
    let mut table = vec![vec![0.0; order]; dim];
    let cell = match m {
        Measure::Density(d) if d.binning() == Binning::CellAverages => Some(d.spacing()),
        _ => None,
    };
    let atoms = m.atoms();
    for (k, row) in table.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate() {
            let p = (j + 1) as i32;
            *slot = neumaier_sum(atoms.iter().map(|(x, w)| {
                let c = x[k];
                let v = match cell {
                    // mean of xᵖ over the cell, the density being flat there
                    Some(dx) => {
                        let (a, b) = (c - 0.5 * dx, c + 0.5 * dx);
                        (b.powi(p + 1) - a.powi(p + 1)) / ((p + 1) as f64 * dx)
                    }
                    None => c.powi(p),
                };
                w * v
            }));
        }
    }
    Ok(table)
}

/// Variance per coordinate from the first two raw moments.
pub fn variance(m: &Measure) -> Result<Vec<f64>> {
    Ok(moments(m, 2)?.into_iter().map(|r| r[1] - r[0] * r[0]).collect())
}

/// One step of a convergence sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub n: usize,
    /// The comparison horizon for Cauchy sweeps.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_next: Option<usize>,
    pub cf_distance: f64,
    pub ks_distance: f64,
    pub levy_distance: f64,
    /// Raw moments up to order 4, per coordinate.
    pub moments: Vec<Vec<f64>>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub walk: String,
    pub zeta: ZetaGrid,
    pub entries: Vec<SweepEntry>,
    pub cf_nonincreasing: bool,
    pub ks_nonincreasing: bool,
    pub levy_nonincreasing: bool,
}

fn nonincreasing(v: impl Iterator<Item = f64>) -> bool {
    let v: Vec<f64> = v.collect();
    v.windows(2).all(|w| w[1] <= w[0])
}

impl ConvergenceReport {
    fn new(walk: &str, zeta: ZetaGrid, entries: Vec<SweepEntry>) -> Self {
        Self {
            walk: walk.to_string(),
            zeta,
            cf_nonincreasing: nonincreasing(entries.iter().map(|e| e.cf_distance)),
            ks_nonincreasing: nonincreasing(entries.iter().map(|e| e.ks_distance)),
            levy_nonincreasing: nonincreasing(entries.iter().map(|e| e.levy_distance)),
            entries,
        }
    }

    pub fn final_cf_distance(&self) -> Option<f64> {
        self.entries.last().map(|e| e.cf_distance)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &String> {
        self.entries.iter().flat_map(|e| e.warnings.iter())
    }

    /// Rows `n,metric,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,metric,value\n");
        for e in &self.entries {
            for (name, v) in [
                ("cf_distance", e.cf_distance),
                ("ks_distance", e.ks_distance),
                ("levy_distance", e.levy_distance),
            ] {
                out.push_str(&format!("{},{name},{v:.16e}\n", e.n));
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// A walk evaluated at horizon `n`: the rescaled measure and any warnings.
pub type WalkAt<'a> = dyn Fn(usize) -> Result<(Measure, Vec<String>)> + Sync + 'a;

fn check_n_list(ns: &[usize]) -> Result<()> {
    if ns.is_empty() {
        return Err(Error::arg("n", "the n list is empty"));
    }
    if ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::arg("n", "the n list must be strictly increasing"));
    }
    Ok(())
}

fn entry(
    n: usize,
    n_next: Option<usize>,
    a: &Measure,
    b: &Measure,
    zeta: &ZetaGrid,
    warnings: Vec<String>,
) -> Result<SweepEntry> {
    Ok(SweepEntry {
        n,
        n_next,
        cf_distance: cf_distance(a, b, zeta)?,
        ks_distance: ks_distance(a, b)?,
        levy_distance: levy_distance(a, b)?,
        moments: moments(a, 4)?,
        warnings,
    })
}

/// Distances from the walk at each `n` to `limit`.
pub fn convergence_sweep(
    walk_name: &str,
    walk: &WalkAt<'_>,
    ns: &[usize],
    limit: &Measure,
    zeta: &ZetaGrid,
) -> Result<ConvergenceReport> {
    check_n_list(ns)?;
    zeta.validate()?;
    let entries = ns
        .iter()
        .map(|&n| {
            let (m, warnings) = walk(n)?;
            entry(n, None, &m, limit, zeta, warnings)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport::new(walk_name, *zeta, entries))
}

/// Distances between the walk at successive horizons, for walks without a
/// closed-form limit.
pub fn cauchy_sweep(walk_name: &str, walk: &WalkAt<'_>, ns: &[usize], zeta: &ZetaGrid) -> Result<ConvergenceReport> {
    check_n_list(ns)?;
    if ns.len() < 2 {
        return Err(Error::arg("n", "a Cauchy sweep needs at least two horizons"));
    }
    zeta.validate()?;
    let measures = ns.iter().map(|&n| walk(n)).collect::<Result<Vec<_>>>()?;
    let entries = ns
        .windows(2)
        .zip(measures.windows(2))
        .map(|(n, m)| {
            let mut warnings = m[0].1.clone();
            warnings.extend(m[1].1.iter().cloned());
            entry(n[0], Some(n[1]), &m[0].0, &m[1].0, zeta, warnings)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport::new(walk_name, *zeta, entries))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(x: f64) -> Measure {
        EmpiricalMeasure::point_mass(1, [x, 0.0]).unwrap().into()
    }

    fn uniform_density(a: f64, b: f64, points: usize) -> Measure {
        let dx = (b - a) / points as f64;
        DensityOnGrid::new(
            1,
            a + 0.5 * dx,
            dx,
            points,
            Binning::CellAverages,
            vec![1.0 / (b - a); points],
        )
        .unwrap()
        .into()
    }

    #[test]
    fn point_mass_cf() {
        let z = ZetaGrid::default().nodes(1);
        let f = characteristic_function(&point(0.3), &z);
        for (c, n) in f.iter().zip(&z) {
            assert!((c - Complex64::from_polar(1.0, 0.3 * n[0])).norm() < 1e-15);
        }
        let d = cf_distance(&point(0.0), &point(0.3), &ZetaGrid::default()).unwrap();
        let want = z
            .iter()
            .map(|n| (1.0 - Complex64::from_polar(1.0, 0.3 * n[0])).norm())
            .fold(0.0, f64::max);
        assert!((d - want).abs() < 1e-15);
    }

    #[test]
    fn gaussian_cf_and_moments() {
        // variance 1/8 on a fine grid
        let n = 256;
        let dx = 8.0 / n as f64;
        let vals: Vec<f64> = (0..n)
            .map(|i| {
                let x = -4.0 + i as f64 * dx;
                2.0 / std::f64::consts::PI.sqrt() * (-4.0 * x * x).exp()
            })
            .collect();
        let m: Measure = DensityOnGrid::new(1, -4.0, dx, n, Binning::Samples, vals)
            .unwrap()
            .into();
        let z = ZetaGrid::default().nodes(1);
        let f = characteristic_function(&m, &z);
        let err = f
            .iter()
            .zip(&z)
            .map(|(c, n)| (c - (-n[0] * n[0] / 16.0).exp()).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-6);
        assert!(f.iter().all(|c| c.im.abs() < 1e-12));
        let v = variance(&m).unwrap()[0];
        assert!((v - 0.125).abs() < 1e-6);
        let mo = moments(&m, 8).unwrap();
        assert!(mo[0].iter().step_by(2).all(|odd| odd.abs() < 1e-10));
        assert!(moments(&m, 9).is_err());
    }

    #[test]
    fn ks_cases() {
        assert_eq!(ks_distance(&point(0.0), &point(0.0)).unwrap(), 0.0);
        let u = uniform_density(-1.0, 1.0, 64);
        assert!((ks_distance(&point(0.0), &u).unwrap() - 0.5).abs() < 1e-12);
        assert!((ks_distance(&u, &point(5.0)).unwrap() - 1.0).abs() < 1e-12);
        let direct = ks_distance_to(&point(0.0), |x| ((x + 1.0) / 2.0).clamp(0.0, 1.0)).unwrap();
        assert!((direct - 0.5).abs() < 1e-12);
    }

    #[test]
    fn levy_of_a_shrinking_box() {
        for n in [1usize, 4, 10, 100] {
            let h = 1.0 / n as f64;
            let d = levy_distance(&point(0.0), &uniform_density(-h, h, 200)).unwrap();
            assert!((d - 1.0 / (n as f64 + 2.0)).abs() < 1e-9, "n = {n}: {d}");
        }
        let d = levy_distance(&point(0.0), &point(0.25)).unwrap();
        assert!((d - 0.25).abs() < 1e-12);
    }

    #[test]
    fn sweeps_reject_bad_lists() {
        let walk = |n: usize| -> Result<(Measure, Vec<String>)> { Ok((point(0.125 / n as f64), vec![])) };
        let z = ZetaGrid::default();
        assert!(convergence_sweep("t", &walk, &[], &point(0.0), &z).is_err());
        assert!(convergence_sweep("t", &walk, &[4, 2], &point(0.0), &z).is_err());
        let r = convergence_sweep("t", &walk, &[1, 2, 4], &point(0.0), &z).unwrap();
        assert!(r.cf_nonincreasing && r.levy_nonincreasing);
        assert!(r.to_csv().lines().count() == 10);
        let c = cauchy_sweep("t", &walk, &[1, 2, 4], &z).unwrap();
        assert_eq!(c.entries.len(), 2);
        assert_eq!(c.entries[0].n_next, Some(2));
    }
}
