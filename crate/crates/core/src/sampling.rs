//! Seeded randomness: one master seed, split into named streams so that
//! adding a suite or a case never perturbs another one's draws.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{AlgebraElement, Context, ContextExt};
use crate::groupoid::Elem;
use crate::phase::Phase;

pub type SampleRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug)]
pub struct Streams {
    seed: u64,
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        Streams { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent generator for the stream called `name`.
    pub fn rng(&self, name: &str) -> SampleRng {
        ChaCha8Rng::seed_from_u64(splitmix(self.seed ^ splitmix(fnv1a(name))))
    }
}

/// Real and imaginary parts uniform in `[-1, 1]`.
pub fn complex(rng: &mut SampleRng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Modulus in `[0.25, 2]`, uniform argument; never near zero.
pub fn nonzero_complex(rng: &mut SampleRng) -> Complex64 {
    let r = rng.random_range(0.25..2.0);
    let theta = rng.random_range(0.0..std::f64::consts::TAU);
    Complex64::from_polar(r, theta)
}

pub fn element(ctx: &Context, rng: &mut SampleRng) -> AlgebraElement {
    ctx.element((0..ctx.len()).map(|_| complex(rng)).collect())
}

pub fn diagonal(ctx: &Context, rng: &mut SampleRng) -> AlgebraElement {
    let mut a = ctx.zero();
    for &u in ctx.groupoid().units() {
        a.set_coeff(u, complex(rng));
    }
    a
}

/// Nonzero coefficients on exactly `set`.
pub fn on_support(ctx: &Context, set: &[Elem], rng: &mut SampleRng) -> AlgebraElement {
    let mut a = ctx.zero();
    for &g in set {
        a.set_coeff(g, nonzero_complex(rng));
    }
    a
}

/// Nonzero coefficients on exactly `set` whose phases are multiples of
/// `1/12` turn, so that twist points read off them are exact.
pub fn rational_on_support(ctx: &Context, set: &[Elem], rng: &mut SampleRng) -> AlgebraElement {
    let mut a = ctx.zero();
    for &g in set {
        let r = rng.random_range(0.25..2.0);
        let k: i64 = rng.random_range(0..12);
        a.set_coeff(g, Phase::from_turns(k, 12).to_complex() * r);
    }
    a
}

/// A monomial supported on a uniformly chosen bisection from `bisections`.
pub fn monomial(ctx: &Context, bisections: &[Vec<Elem>], rng: &mut SampleRng) -> AlgebraElement {
    let b = &bisections[rng.random_range(0..bisections.len())];
    on_support(ctx, b, rng)
}

/// A random subset of `set`.
pub fn subset(set: &[Elem], rng: &mut SampleRng) -> Vec<Elem> {
    set.iter().copied().filter(|_| rng.random_bool(0.5)).collect()
}

/// A pair of monomials mixing three regimes: independent draws, `m` a
/// restriction of `n`, and `m` supported inside `n` with other values.
pub fn monomial_pair(ctx: &Context, bisections: &[Vec<Elem>], rng: &mut SampleRng) -> (AlgebraElement, AlgebraElement) {
    let n = monomial(ctx, bisections, rng);
    let m = match rng.random_range(0..3) {
        0 => monomial(ctx, bisections, rng),
        1 => n.restrict(&subset(&n.support(), rng)),
        _ => on_support(ctx, &subset(&n.support(), rng), rng),
    };
    (m, n)
}
