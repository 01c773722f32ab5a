//! The Hadamard walk on ℤ with a two-level coin.
//!
//! States live on a finite window of sites `offset .. offset + len`; every
//! step grows the window by one site on each side, so the window always
//! contains the support of the state.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measure::EmpiricalMeasure;
use crate::numeric::neumaier_sum;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coin {
    Heads,
    Tails,
}

/// Amplitudes ⟨j⊗H|ψ⟩ and ⟨j⊗T|ψ⟩ for `j` in the window.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState {
    offset: i64,
    amps_h: Vec<Complex64>,
    amps_t: Vec<Complex64>,
}

impl LatticeState {
    pub fn new(offset: i64, amps_h: Vec<Complex64>, amps_t: Vec<Complex64>) -> Result<Self> {
        if amps_h.len() != amps_t.len() {
            return Err(Error::arg(
                "amps_t",
                format!("{} heads vs {} tails amplitudes", amps_h.len(), amps_t.len()),
            ));
        }
        if amps_h.is_empty() {
            return Err(Error::arg("amps_h", "empty window"));
        }
        if amps_h
            .iter()
            .chain(&amps_t)
            .any(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(Error::arg("amps_h", "non-finite amplitude"));
        }
        Ok(Self { offset, amps_h, amps_t })
    }

    /// Builds a state and rescales it to unit norm.
    pub fn normalized(offset: i64, amps_h: Vec<Complex64>, amps_t: Vec<Complex64>) -> Result<Self> {
        let mut s = Self::new(offset, amps_h, amps_t)?;
        let norm = s.norm_sqr().sqrt();
        if !(norm > 0.0) {
            return Err(Error::NotNormalizable(norm));
        }
        let inv = 1.0 / norm;
        s.amps_h.iter_mut().chain(s.amps_t.iter_mut()).for_each(|a| *a *= inv);
        Ok(s)
    }

    /// |site⟩ ⊗ |coin⟩.
    pub fn basis(site: i64, coin: Coin) -> Self {
        let one = vec![Complex64::new(1.0, 0.0)];
        let zero = vec![Complex64::new(0.0, 0.0)];
        match coin {
            Coin::Heads => Self::new(site, one, zero),
            Coin::Tails => Self::new(site, zero, one),
        }
        .expect("single-site basis state")
    }

    /// |site⟩ ⊗ (a|H⟩ + b|T⟩), normalized.
    pub fn localized(site: i64, heads: Complex64, tails: Complex64) -> Result<Self> {
        Self::normalized(site, vec![heads], vec![tails])
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn width(&self) -> usize {
        self.amps_h.len()
    }

    pub fn heads(&self) -> &[Complex64] {
        &self.amps_h
    }

    pub fn tails(&self) -> &[Complex64] {
        &self.amps_t
    }

    /// Amplitude ⟨site⊗coin|ψ⟩, zero outside the window.
    pub fn amplitude(&self, site: i64, coin: Coin) -> Complex64 {
        let idx = site - self.offset;
        if idx < 0 || idx as usize >= self.width() {
            return Complex64::new(0.0, 0.0);
        }
        match coin {
            Coin::Heads => self.amps_h[idx as usize],
            Coin::Tails => self.amps_t[idx as usize],
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        neumaier_sum(self.amps_h.iter().chain(&self.amps_t).map(|a| a.norm_sqr()))
    }

    /// One step `S (I ⊗ F)`: Hadamard coin flip, then heads moves right and
    /// tails moves left.
    pub fn hadamard_step(&self) -> Self {
        let w = self.width();
        let zero = Complex64::new(0.0, 0.0);
        let mut h = vec![zero; w + 2];
        let mut t = vec![zero; w + 2];
        for i in 0..w {
            let (a, b) = (self.amps_h[i], self.amps_t[i]);
            // site offset + i moves to new indices i + 2 (heads) and i (tails)
            h[i + 2] = (a + b) * FRAC_1_SQRT_2;
            t[i] = (a - b) * FRAC_1_SQRT_2;
        }
        Self {
            offset: self.offset - 1,
            amps_h: h,
            amps_t: t,
        }
    }

    pub fn evolve(&self, steps: usize) -> Self {
        let mut s = self.clone();
        for _ in 0..steps {
            s = s.hadamard_step();
        }
        s
    }

    /// Position distribution P(j; ψ) = |⟨j⊗H|ψ⟩|² + |⟨j⊗T|ψ⟩|².
    pub fn distribution(&self) -> LatticeDistribution {
        let probs = self
            .amps_h
            .iter()
            .zip(&self.amps_t)
            .map(|(h, t)| h.norm_sqr() + t.norm_sqr())
            .collect();
        LatticeDistribution {
            offset: self.offset,
            probs,
        }
    }
}

/// Free-function form of [`LatticeState::hadamard_step`].
pub fn hadamard_step(state: &LatticeState) -> LatticeState {
    state.hadamard_step()
}

/// Free-function form of [`LatticeState::distribution`].
pub fn lattice_distribution(state: &LatticeState) -> LatticeDistribution {
    state.distribution()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeDistribution {
    offset: i64,
    probs: Vec<f64>,
}

impl LatticeDistribution {
    pub fn new(offset: i64, probs: Vec<f64>) -> Result<Self> {
        if probs.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::arg("probs", "probabilities must be nonnegative"));
        }
        Ok(Self { offset, probs })
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, site: i64) -> f64 {
        let idx = site - self.offset;
        if idx < 0 {
            return 0.0;
        }
        self.probs.get(idx as usize).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        neumaier_sum(self.probs.iter().copied())
    }

    /// Sites with nonzero probability together with that probability.
    pub fn support(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(move |(i, p)| (self.offset + i as i64, *p))
    }
}

/// Σⱼ P(j) δ(j/n) as a weighted point-mass measure.
pub fn rescaled_lattice_measure(dist: &LatticeDistribution, n: usize) -> Result<EmpiricalMeasure> {
    if n == 0 {
        return Err(Error::arg("n", "rescaling needs n ≥ 1"));
    }
    let scale = n as f64;
    let (points, weights): (Vec<_>, Vec<_>) = dist.support().map(|(j, p)| ([j as f64 / scale, 0.0], p)).unzip();
    let mut m = EmpiricalMeasure::new(1, points, weights)?;
    m.meta.n = Some(n);
    Ok(m)
}

/// Mass of a one-dimensional measure outside the closed interval `[lo, hi]`.
pub fn mass_outside(m: &EmpiricalMeasure, lo: f64, hi: f64) -> f64 {
    neumaier_sum(m.atoms().filter(|(p, _)| p[0] < lo || p[0] > hi).map(|(_, w)| w))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn heads_splits_symmetrically() {
        let s = LatticeState::basis(0, Coin::Heads).hadamard_step();
        let r = FRAC_1_SQRT_2;
        assert!((s.amplitude(1, Coin::Heads) - c(r, 0.0)).norm() < 1e-15);
        assert!((s.amplitude(-1, Coin::Tails) - c(r, 0.0)).norm() < 1e-15);
        assert_eq!(s.amplitude(1, Coin::Tails), c(0.0, 0.0));
        assert_eq!(s.amplitude(-1, Coin::Heads), c(0.0, 0.0));
    }

    #[test]
    fn tails_picks_up_a_sign_on_the_left() {
        let s = LatticeState::basis(0, Coin::Tails).hadamard_step();
        let r = FRAC_1_SQRT_2;
        assert!((s.amplitude(1, Coin::Heads) - c(r, 0.0)).norm() < 1e-15);
        assert!((s.amplitude(-1, Coin::Tails) - c(-r, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn two_steps_from_heads() {
        let d = LatticeState::basis(0, Coin::Heads).evolve(2).distribution();
        assert!((d.prob(2) - 0.25).abs() < 1e-15);
        assert!((d.prob(0) - 0.5).abs() < 1e-15);
        assert!((d.prob(-2) - 0.25).abs() < 1e-15);
        assert_eq!(d.prob(1), 0.0);
    }

    #[test]
    fn distribution_of_basis_state_is_a_point_mass() {
        let d = LatticeState::basis(3, Coin::Tails).distribution();
        assert_eq!(d.support().collect::<Vec<_>>(), vec![(3, 1.0)]);
    }

    #[test]
    fn window_grows_by_two_per_step() {
        let s = LatticeState::normalized(-2, vec![c(1.0, 0.0); 5], vec![c(0.0, 1.0); 5]).unwrap();
        let e = s.evolve(7);
        assert_eq!(e.width(), 5 + 14);
        assert_eq!(e.offset(), -9);
        assert!((e.distribution().total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rescaling() {
        let d = LatticeDistribution::new(5, vec![1.0]).unwrap();
        let m = rescaled_lattice_measure(&d, 10).unwrap();
        assert_eq!(m.points(), &[[0.5, 0.0]]);
        assert!(rescaled_lattice_measure(&d, 0).is_err());

        let d2 = LatticeState::basis(0, Coin::Heads).evolve(2).distribution();
        let m2 = rescaled_lattice_measure(&d2, 2).unwrap();
        let atoms: Vec<_> = m2.atoms().map(|(p, w)| (p[0], w)).collect();
        assert_eq!(atoms.len(), 3);
        for ((x, w), (ex, ew)) in atoms.iter().zip([(-1.0, 0.25), (0.0, 0.5), (1.0, 0.25)]) {
            assert!((x - ex).abs() < 1e-15 && (w - ew).abs() < 1e-15);
        }
    }

    #[test]
    fn mismatched_window_rejected() {
        assert!(LatticeState::new(0, vec![c(1.0, 0.0)], vec![]).is_err());
        assert!(LatticeState::normalized(0, vec![c(0.0, 0.0)], vec![c(0.0, 0.0)]).is_err());
    }
}
