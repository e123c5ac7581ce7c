//! Seedable generator with explicit stream splitting.
//!
//! Chain `i` of a run seeded with `s` draws from `split(s, i)`: the base
//! xoshiro256++ state seeded from `s`, advanced by `i` jumps of 2^128 steps,
//! so streams never overlap.

use rand::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

pub type ChainRng = Xoshiro256PlusPlus;

pub fn split(seed: u64, stream: u64) -> ChainRng {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    for _ in 0..stream {
        rng.jump();
    }
    rng
}

/// Integer threshold for a Bernoulli(p) draw against a uniform `u64`.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Bernoulli {
    Never,
    Always,
    Below(u64),
}

impl Bernoulli {
    pub(crate) fn new(p: f64) -> Self {
        if p <= 0.0 {
            Bernoulli::Never
        } else if p >= 1.0 {
            Bernoulli::Always
        } else {
            // p * 2^64, exact for p with at most 53 significant bits
            Bernoulli::Below((p * 18_446_744_073_709_551_616.0) as u64)
        }
    }

    #[inline(always)]
    pub(crate) fn sample<R: RngCore>(self, rng: &mut R) -> bool {
        match self {
            Bernoulli::Never => false,
            Bernoulli::Always => true,
            Bernoulli::Below(t) => rng.next_u64() < t,
        }
    }
}

impl Bernoulli {
    /// `cond && sample()`, always consuming one draw so the branch on the
    /// outcome can be avoided.
    #[inline(always)]
    pub(crate) fn sample_if<R: RngCore>(self, cond: bool, rng: &mut R) -> bool {
        let x = rng.next_u64();
        let hit = match self {
            Bernoulli::Never => false,
            Bernoulli::Always => true,
            Bernoulli::Below(t) => x < t,
        };
        cond & hit
    }
}

#[inline(always)]
pub(crate) fn coin<R: RngCore>(rng: &mut R) -> i8 {
    if rng.next_u64() >> 63 == 0 {
        1
    } else {
        -1
    }
}
