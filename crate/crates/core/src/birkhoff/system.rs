//! Invertible measure-preserving systems (Ω, 𝓑, ℙ, T).

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, RngCore};

use super::step::{StepFunction, Wave};
use crate::measure::Point;

/// Inclusive range of powers `lo ..= hi` of `T` in `Σ_p h(Tᵖ ω)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PowerRange {
    pub lo: i64,
    pub hi: i64,
}

impl PowerRange {
    pub fn new(lo: i64, hi: i64) -> Self {
        debug_assert!(lo <= hi);
        Self { lo, hi }
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }
}

/// An orbit-sum evaluator prepared for one step function and power range.
pub type OrbitKernel<'a, P> = Box<dyn Fn(&P) -> Point + Send + Sync + 'a>;

pub trait MeasurePreserving: Sync {
    type Point: Copy + Send + Sync + std::fmt::Debug;

    /// Dimension of Ω (1 for the circle, 2 for the square).
    fn omega_dim(&self) -> usize;

    fn forward(&self, p: &Self::Point) -> Self::Point;

    fn inverse(&self, p: &Self::Point) -> Self::Point;

    /// Draws ω ~ ℙ.
    fn sample(&self, rng: &mut dyn RngCore) -> Self::Point;

    /// Coordinates of ω in `[0, 1)^dim` (second slot zero on the circle).
    fn coords(&self, p: &Self::Point) -> Point;

    /// The quadrature node of the grid cell `cell` (of `per_axis` cells per
    /// axis), deterministic in `(cell, node_seed)`.
    fn quadrature_node(&self, cell: [usize; 2], per_axis: usize, node_seed: u64) -> Self::Point;

    /// The point with coordinates `c`; `tail` fills any precision beyond
    /// what an `f64` holds.
    fn point_at(&self, c: Point, tail: u64) -> Self::Point;

    fn step_power(&self, p: &Self::Point, power: i64) -> Self::Point {
        let mut q = *p;
        for _ in 0..power.unsigned_abs() {
            q = if power > 0 { self.forward(&q) } else { self.inverse(&q) };
        }
        q
    }

    /// Prepares `ω ↦ Σ_{p = lo}^{hi} h(Tᵖ ω)`.
    fn orbit_kernel<'a>(&'a self, h: &'a StepFunction, range: PowerRange) -> OrbitKernel<'a, Self::Point> {
        Box::new(move |p| direct_orbit_sum(self, h, p, range))
    }
}

/// Orbit sum by walking the orbit one application of `T` or `T⁻¹` at a time.
pub fn direct_orbit_sum<S: MeasurePreserving + ?Sized>(
    sys: &S,
    h: &StepFunction,
    p: &S::Point,
    range: PowerRange,
) -> Point {
    let mut acc = [0.0; 2];
    let mut add = |q: &S::Point| {
        let v = h.eval(sys.coords(q));
        acc[0] += v[0];
        acc[1] += v[1];
    };
    if range.lo >= 0 {
        let mut q = sys.step_power(p, range.lo);
        add(&q);
        for _ in range.lo..range.hi {
            q = sys.forward(&q);
            add(&q);
        }
    } else if range.hi <= 0 {
        let mut q = sys.step_power(p, range.hi);
        add(&q);
        for _ in range.lo..range.hi {
            q = sys.inverse(&q);
            add(&q);
        }
    } else {
        let mut q = *p;
        add(&q);
        for _ in 0..range.hi {
            q = sys.forward(&q);
            add(&q);
        }
        q = *p;
        for _ in range.lo..0 {
            q = sys.inverse(&q);
            add(&q);
        }
    }
    acc
}

/// Rotation `ω ↦ ω + α (mod 1)` of the circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    alpha: f64,
}

impl Rotation {
    /// The golden-mean rotation `α = (√5 − 1)/2`.
    pub fn golden() -> Self {
        Self {
            alpha: (5f64.sqrt() - 1.0) / 2.0,
        }
    }

    pub fn new(alpha: f64) -> Self {
        Self {
            alpha: alpha.rem_euclid(1.0),
        }
    }

    /// `α = p/q`.
    pub fn rational(p: i64, q: i64) -> Self {
        Self::new(p as f64 / q as f64)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn at_power(&self, omega: f64, power: i64) -> f64 {
        wrap_unit(omega + (power as f64 * self.alpha).rem_euclid(1.0))
    }
}

fn wrap_unit(v: f64) -> f64 {
    let w = v.rem_euclid(1.0);
    // rem_euclid can round up to exactly 1.0 for tiny negative inputs
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

impl MeasurePreserving for Rotation {
    type Point = f64;

    fn omega_dim(&self) -> usize {
        1
    }

    fn forward(&self, p: &f64) -> f64 {
        wrap_unit(p + self.alpha)
    }

    fn inverse(&self, p: &f64) -> f64 {
        wrap_unit(p - self.alpha)
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        rng.gen::<f64>()
    }

    fn coords(&self, p: &f64) -> Point {
        [*p, 0.0]
    }

    fn quadrature_node(&self, cell: [usize; 2], per_axis: usize, _node_seed: u64) -> f64 {
        (cell[0] as f64 + 0.5) / per_axis as f64
    }

    fn point_at(&self, c: Point, _tail: u64) -> f64 {
        wrap_unit(c[0])
    }

    fn step_power(&self, p: &f64, power: i64) -> f64 {
        self.at_power(*p, power)
    }

    /// Each term `a·cos(2πk(ω + pα))` sums to `a·Re(e^{2πikω} Dₖ)` with
    /// `Dₖ = Σₚ e^{2πikpα}`, so the Dirichlet sums are computed once.
    fn orbit_kernel<'a>(&'a self, h: &'a StepFunction, range: PowerRange) -> OrbitKernel<'a, f64> {
        let count = range.len() as f64;
        let dirichlet: Vec<Vec<Complex64>> = h
            .components()
            .iter()
            .map(|c| {
                c.terms
                    .iter()
                    .map(|t| {
                        let k = t.freq[0];
                        (range.lo..=range.hi)
                            .map(|p| {
                                let turns = ((k * p) as f64 * self.alpha).rem_euclid(1.0);
                                Complex64::from_polar(1.0, TAU * turns)
                            })
                            .sum()
                    })
                    .collect()
            })
            .collect();
        Box::new(move |omega: &f64| {
            let mut out = [0.0; 2];
            for ((o, c), ds) in out.iter_mut().zip(h.components()).zip(&dirichlet) {
                let mut s = c.constant * count;
                for (t, d) in c.terms.iter().zip(ds) {
                    let z = Complex64::from_polar(1.0, TAU * t.freq[0] as f64 * omega) * d;
                    s += t.coeff
                        * match t.wave {
                            Wave::Cos => z.re,
                            Wave::Sin => z.im,
                        };
                }
                *o = s;
            }
            out
        })
    }
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A point of the square as a bi-infinite sequence of fair bits `b_k`.
///
/// `x = 0.b_s b_{s+1} …` and `y = 0.b_{s−1} b_{s−2} …` where `s` is the shift;
/// 64 bits of each are held in registers and the rest are a deterministic
/// function of `seed`. The baker's map is the shift `s ↦ s + 1`, so orbits
/// of any length stay exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BakerPoint {
    seed: u64,
    shift: i64,
    x: u64,
    y: u64,
}

impl BakerPoint {
    fn word(seed: u64, w: i64) -> u64 {
        splitmix64(seed ^ (w as u64).wrapping_mul(GOLDEN_GAMMA))
    }

    fn bit(seed: u64, k: i64) -> u64 {
        (Self::word(seed, k.div_euclid(64)) >> k.rem_euclid(64)) & 1
    }

    /// The point whose bits are all drawn from `seed`.
    pub fn from_seed(seed: u64) -> Self {
        Self {
            seed,
            shift: 0,
            // b_0 … b_63, most significant first
            x: Self::word(seed, 0).reverse_bits(),
            // b_{-1} … b_{-64}, most significant first
            y: Self::word(seed, -1),
        }
    }

    /// The point `(x, y)`; bits below double precision come from `tail_seed`.
    pub fn from_coords(x: f64, y: f64, tail_seed: u64) -> Self {
        let fixed = |v: f64| -> u64 {
            let v = v.rem_euclid(1.0);
            ((v * (1u64 << 53) as f64) as u64).min((1 << 53) - 1) << 11
        };
        let tail = splitmix64(tail_seed);
        Self {
            seed: tail_seed,
            shift: 0,
            x: fixed(x) | (tail & 0x7ff),
            y: fixed(y) | ((tail >> 11) & 0x7ff),
        }
    }

    pub fn xy(&self) -> Point {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        [(self.x >> 11) as f64 * SCALE, (self.y >> 11) as f64 * SCALE]
    }
}

/// The baker's map `(x, y) ↦ (2x mod 1, (y + ⌊2x⌋)/2)` on the unit square.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Baker;

impl MeasurePreserving for Baker {
    type Point = BakerPoint;

    fn omega_dim(&self) -> usize {
        2
    }

    fn forward(&self, p: &BakerPoint) -> BakerPoint {
        let s = p.shift;
        BakerPoint {
            seed: p.seed,
            shift: s + 1,
            x: (p.x << 1) | BakerPoint::bit(p.seed, s + 64),
            y: (p.y >> 1) | (p.x & (1 << 63)),
        }
    }

    fn inverse(&self, p: &BakerPoint) -> BakerPoint {
        let s = p.shift;
        BakerPoint {
            seed: p.seed,
            shift: s - 1,
            x: (p.x >> 1) | (p.y & (1 << 63)),
            y: (p.y << 1) | BakerPoint::bit(p.seed, s - 65),
        }
    }

    fn sample(&self, rng: &mut dyn RngCore) -> BakerPoint {
        BakerPoint::from_seed(rng.next_u64())
    }

    fn coords(&self, p: &BakerPoint) -> Point {
        p.xy()
    }

    fn quadrature_node(&self, cell: [usize; 2], per_axis: usize, node_seed: u64) -> BakerPoint {
        let u = (splitmix64(node_seed) >> 11) as f64 / (1u64 << 53) as f64;
        let v = (splitmix64(node_seed ^ 0x5555) >> 11) as f64 / (1u64 << 53) as f64;
        let m = per_axis as f64;
        BakerPoint::from_coords(
            (cell[0] as f64 + u) / m,
            (cell[1] as f64 + v) / m,
            splitmix64(node_seed.wrapping_add(1)),
        )
    }

    fn point_at(&self, c: Point, tail: u64) -> BakerPoint {
        BakerPoint::from_coords(c[0], c[1], tail)
    }
}

/// The systems a configuration can name.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SystemSpec {
    Rotation(Rotation),
    Baker,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::birkhoff::step::{TrigPolynomial, TrigTerm};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rotation_inverts() {
        let r = Rotation::golden();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let w = r.sample(&mut rng);
            assert!((r.forward(&r.inverse(&w)) - w).abs() < 1e-12);
            assert!((r.inverse(&r.forward(&w)) - w).abs() < 1e-12);
        }
    }

    #[test]
    fn baker_matches_the_textbook_formula() {
        let b = Baker;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let p = b.sample(&mut rng);
            let [x, y] = p.xy();
            let [fx, fy] = b.forward(&p).xy();
            let bit = (2.0 * x).floor();
            assert!((fx - (2.0 * x - bit)).abs() < 1e-15);
            assert!((fy - (y + bit) / 2.0).abs() < 1e-15);
            assert_eq!(b.inverse(&b.forward(&p)), p);
            assert_eq!(b.forward(&b.inverse(&p)), p);
        }
    }

    #[test]
    fn long_baker_orbits_do_not_degenerate() {
        let b = Baker;
        let mut p = BakerPoint::from_seed(99);
        let mut low = 0;
        for _ in 0..10_000 {
            p = b.inverse(&p);
            let [x, y] = p.xy();
            if x < 1e-3 && y < 1e-3 {
                low += 1;
            }
        }
        assert!(low < 5);
        assert_eq!(b.step_power(&p, 10_000), BakerPoint::from_seed(99));
    }

    #[test]
    fn from_coords_round_trips() {
        let p = BakerPoint::from_coords(0.3, 0.85, 5);
        let [x, y] = p.xy();
        assert!((x - 0.3).abs() < 1e-15 && (y - 0.85).abs() < 1e-15);
        let q = Baker.inverse(&Baker.forward(&p));
        let [qx, qy] = q.xy();
        assert!((qx - x).abs() < 1e-12 && (qy - y).abs() < 1e-12);
    }

    #[test]
    fn rotation_kernel_matches_direct_sum() {
        let r = Rotation::golden();
        let h = StepFunction::new(vec![
            TrigPolynomial::constant(0.25)
                .with_term(TrigTerm::cos(1.0, [1, 0]))
                .with_term(TrigTerm::sin(-0.5, [3, 0])),
            TrigPolynomial::constant(-1.0).with_term(TrigTerm::cos(2.0, [2, 0])),
        ])
        .unwrap();
        for range in [
            PowerRange::new(0, 99),
            PowerRange::new(-100, -1),
            PowerRange::new(-7, 5),
        ] {
            let k = r.orbit_kernel(&h, range);
            for w in [0.0, 0.1234, 0.9] {
                let fast = k(&w);
                let slow = direct_orbit_sum(&r, &h, &w, range);
                assert!((fast[0] - slow[0]).abs() < 1e-10 && (fast[1] - slow[1]).abs() < 1e-10);
            }
        }
    }
}
