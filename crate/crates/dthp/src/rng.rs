//! Seed derivation and a portable Poisson sampler.
//!
//! All stochastic components of the crate draw from [`ChaCha8Rng`] streams
//! whose seeds derive from a user seed through [`stream_seed`]. The Poisson
//! sampler is implemented here rather than taken from a distributions crate
//! so that simulated data are reproducible bit-for-bit across platforms and
//! crate upgrades.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::ln_gamma;

/// Domain tags keeping replicate streams and chain streams disjoint.
pub const STREAM_SIMULATION: u64 = 0x5349_4d00;
pub const STREAM_CHAIN: u64 = 0x4348_4e00;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fixed seed-splitting rule: the stream seed for (master seed, domain,
/// stream index) is a splitmix64 chain over the three words.
pub fn stream_seed(master: u64, domain: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ domain) ^ index)
}

/// A seeded ChaCha stream for the given domain and index.
pub fn stream_rng(master: u64, domain: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(master, domain, index))
}

/// Mean threshold between inversion and transformed-rejection sampling.
const POISSON_INVERSION_CUTOFF: f64 = 10.0;

/// Draws a Poisson variate with the given mean.
///
/// Uses Knuth-style inversion (product of uniforms) for small means and
/// Hörmann's PTRS transformed rejection for large means. Both paths consume
/// only `f64` uniforms from the provided stream.
///
/// # Panics
/// Panics if `mean` is not finite and non-negative.
pub fn poisson<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    assert!(
        mean.is_finite() && mean >= 0.0,
        "Poisson mean must be finite and non-negative, got {mean}"
    );
    if mean == 0.0 {
        0
    } else if mean < POISSON_INVERSION_CUTOFF {
        poisson_inversion(rng, mean)
    } else {
        poisson_ptrs(rng, mean)
    }
}

fn poisson_inversion<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    let limit = (-mean).exp();
    let mut product: f64 = rng.random();
    let mut count = 0u64;
    while product > limit {
        product *= rng.random::<f64>();
        count += 1;
    }
    count
}

/// Transformed rejection with squeeze (Hörmann, 1993).
fn poisson_ptrs<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    let log_mean = mean.ln();
    let b = 0.931 + 2.53 * mean.sqrt();
    let a = -0.059 + 0.024_83 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let v_r = 0.9277 - 3.6224 / (b - 2.0);

    loop {
        let u = rng.random::<f64>() - 0.5;
        let v = rng.random::<f64>();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
        if us >= 0.07 && v <= v_r {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let accept = (v * inv_alpha / (a / (us * us) + b)).ln()
            <= -mean + k * log_mean - ln_gamma(k + 1.0);
        if accept {
            return k as u64;
        }
    }
}
