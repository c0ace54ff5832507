//! Seeded substream derivation and Poisson sampling.
//!
//! Component `j` of replicate `i` draws from a ChaCha12 stream keyed by
//! `hash(master_seed, j)` with the replicate index as the stream counter, so
//! replays are bit-identical regardless of the parallel schedule.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Component identifiers for substream separation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Drift = 0,
    Gauss = 1,
    SmallJumps = 2,
    BigJumps = 3,
    Refinement = 4,
    Harness = 5,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Deterministic generator for component `component` of replicate `replicate`.
pub fn substream(master_seed: u64, component: Component, replicate: u64) -> ChaCha12Rng {
    let mut state = master_seed ^ ((component as u64).wrapping_mul(0xA076_1D64_78BD_642F));
    let mut key = [0u8; 32];
    for chunk in key.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha12Rng::from_seed(key);
    rng.set_stream(replicate);
    rng
}

/// Poisson draw: CDF inversion below mean 10, Hörmann's PTRD above.
///
/// Both branches consume the generator deterministically, so fixed substreams
/// reproduce counts exactly.
pub fn poisson<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    assert!(mean >= 0.0 && mean.is_finite(), "poisson mean must be finite");
    if mean == 0.0 {
        0
    } else if mean < 10.0 {
        poisson_inversion(rng, mean)
    } else {
        poisson_ptrd(rng, mean)
    }
}

fn poisson_inversion<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    let u: f64 = rng.gen();
    let mut k = 0u64;
    let mut p = (-mean).exp();
    let mut cdf = p;
    while u > cdf {
        k += 1;
        p *= mean / k as f64;
        cdf += p;
        if k > 1000 {
            break; // cdf has saturated numerically
        }
    }
    k
}

// Hörmann (1993), transformed rejection with squeeze (PTRS), valid mu >= 10.
fn poisson_ptrd<R: Rng + ?Sized>(rng: &mut R, mu: f64) -> u64 {
    let smu = mu.sqrt();
    let b = 0.931 + 2.53 * smu;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let v_r = 0.9277 - 3.6224 / (b - 2.0);

    loop {
        let u: f64 = rng.gen::<f64>() - 0.5;
        let v: f64 = rng.gen();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + mu + 0.43).floor();
        if us >= 0.07 && v <= v_r {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let log_accept = k * mu.ln() - mu - ln_factorial(k as u64);
        if (v * inv_alpha / (a / (us * us) + b)).ln() <= log_accept {
            return k as u64;
        }
    }
}

fn ln_factorial(k: u64) -> f64 {
    // exact for small k, Stirling series beyond
    const TABLE: [f64; 10] = [
        0.0,
        0.0,
        0.693147180559945,
        1.791759469228055,
        3.178053830347946,
        4.787491742782046,
        6.579251212010101,
        8.525161361065415,
        10.604602902745251,
        12.801827480081469,
    ];
    if (k as usize) < TABLE.len() {
        return TABLE[k as usize];
    }
    let x = (k + 1) as f64;
    let x2 = x * x;
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * x)
        - 1.0 / (360.0 * x * x2)
        + 1.0 / (1260.0 * x * x2 * x2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substreams_are_reproducible_and_distinct() {
        let mut a = substream(42, Component::Gauss, 7);
        let mut b = substream(42, Component::Gauss, 7);
        let mut c = substream(42, Component::Gauss, 8);
        let mut d = substream(42, Component::SmallJumps, 7);
        let xa: [u64; 4] = core::array::from_fn(|_| a.gen());
        let xb: [u64; 4] = core::array::from_fn(|_| b.gen());
        let xc: [u64; 4] = core::array::from_fn(|_| c.gen());
        let xd: [u64; 4] = core::array::from_fn(|_| d.gen());
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
        assert_ne!(xa, xd);
    }

    #[test]
    fn poisson_moments_match() {
        for &mean in &[0.3, 3.0, 9.9, 10.1, 47.0, 300.0] {
            let mut rng = substream(1, Component::Harness, 0);
            let n = 200_000;
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for _ in 0..n {
                let k = poisson(&mut rng, mean) as f64;
                sum += k;
                sumsq += k * k;
            }
            let m = sum / n as f64;
            let v = sumsq / n as f64 - m * m;
            let se_mean = (mean / n as f64).sqrt();
            assert!(
                (m - mean).abs() < 5.0 * se_mean,
                "mean {mean}: got {m}, se {se_mean}"
            );
            // Var(sample var) ~ (mu4 - var^2)/n; Poisson mu4 = 3 mean^2 + mean
            let se_var = ((2.0 * mean * mean + mean) / n as f64).sqrt();
            assert!(
                (v - mean).abs() < 6.0 * se_var,
                "var for mean {mean}: got {v}"
            );
        }
    }

    #[test]
    fn ln_factorial_accuracy() {
        let mut direct = 0.0;
        for k in 1..200u64 {
            direct += (k as f64).ln();
            assert!((ln_factorial(k) - direct).abs() < 1e-10 * direct.max(1.0));
        }
    }
}
