//! Seeded simulation of Lévy increment batches.
//!
//! The small-jump martingale `M(eps)` is simulated through its compound
//! Poisson approximation `M(eta, eps)`: jumps with magnitudes in
//! `(eta, eps]` at rate `lambda_{eta,eps}`, compensated by the band mean.
//! The sub-eta remainder is never silently replaced by Gaussian noise — that
//! substitution is exactly the approximation this crate quantifies. Callers
//! who want an Asmussen–Rosinski-style refinement can opt in and receive an
//! extra `N(0, Delta sigma^2(0, eta))` term.

use crate::error::{Error, Result};
use crate::levy_model::{drift_beps, intensity, LevyTriplet, MeasureKind, MeasureSpec};
use crate::quad;
use crate::rng::{poisson, substream, Component};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::io::Write;

/// Which Lévy-Itô components enter a simulated batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComponentMask {
    pub gauss: bool,
    pub small_jumps: bool,
    pub big_jumps: bool,
    pub drift: bool,
}

impl ComponentMask {
    pub const ALL: ComponentMask = ComponentMask {
        gauss: true,
        small_jumps: true,
        big_jumps: true,
        drift: true,
    };

    pub fn only_gauss() -> Self {
        ComponentMask {
            gauss: true,
            small_jumps: false,
            big_jumps: false,
            drift: false,
        }
    }

    pub fn gauss_and_small() -> Self {
        ComponentMask {
            gauss: true,
            small_jumps: true,
            big_jumps: false,
            drift: false,
        }
    }
}

/// A batch of `n` simulated increments at step `delta`.
#[derive(Debug, Clone)]
pub struct IncrementBatch {
    pub values: Vec<f64>,
    pub delta: f64,
    pub seed: u64,
    /// Truncation used by the compound Poisson approximation; 0 means the
    /// jump part was sampled exactly (finite activity).
    pub truncation_eta: f64,
    pub mask: ComponentMask,
}

impl IncrementBatch {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// CSV export: header `value`, one increment per line, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "value")?;
        for v in &self.values {
            writeln!(w, "{v:.16e}")?;
        }
        Ok(())
    }

    /// Binary column export: little-endian IEEE-754 doubles, no header.
    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }
}

/// Draws jump sizes from the measure restricted to `{lo < |x| <= hi}`,
/// normalized to a probability law.
enum JumpSampler {
    /// Inverse CDF of the restricted power law, per side.
    Stable {
        beta: f64,
        prob_plus: f64,
        lo_pow: f64,  // lo^-beta
        span: f64,    // lo^-beta - hi^-beta
    },
    /// Tabulated inverse CDF on a uniform magnitude grid, per side.
    Table {
        prob_plus: f64,
        grid_plus: Vec<f64>,
        grid_minus: Vec<f64>,
        lo: f64,
        hi: f64,
    },
    Atoms {
        cumulative: Vec<(f64, f64)>, // (cumulative probability, location)
    },
}

const TABLE_GRID: usize = 4096;

impl JumpSampler {
    fn new(measure: &MeasureSpec, lo: f64, hi: f64) -> Result<Self> {
        match &measure.kind {
            MeasureKind::StableType {
                beta,
                c_plus,
                c_minus,
            } => {
                if lo <= 0.0 {
                    return Err(Error::Capability(
                        "exact small-jump simulation needs eta > 0 for stable-type measures"
                            .into(),
                    ));
                }
                Ok(JumpSampler::Stable {
                    beta: *beta,
                    prob_plus: c_plus / (c_plus + c_minus),
                    lo_pow: lo.powf(-beta),
                    span: lo.powf(-beta) - hi.powf(-beta),
                })
            }
            MeasureKind::Density {
                density,
                singularity_exponent,
            } => {
                if lo <= 0.0 && *singularity_exponent > 0.0 {
                    return Err(Error::Capability(
                        "tabulated inverse CDF needs eta > 0 when the density is singular at 0"
                            .into(),
                    ));
                }
                let mass = |side: f64| -> Result<f64> {
                    let d = density.clone();
                    Ok(quad::integrate(move |x| d(side * x), lo, hi, 1e-10, 1e-300)?.value)
                };
                let m_plus = mass(1.0)?;
                let m_minus = mass(-1.0)?;
                let total = m_plus + m_minus;
                if !(total > 0.0) {
                    return Err(Error::Degenerate("jump band carries no mass".into()));
                }
                let tabulate = |side: f64, side_mass: f64| -> Result<Vec<f64>> {
                    if side_mass <= 0.0 {
                        return Ok(vec![]);
                    }
                    let d = density.clone();
                    let n = TABLE_GRID;
                    let dx = (hi - lo) / n as f64;
                    let mut cdf = Vec::with_capacity(n + 1);
                    cdf.push(0.0);
                    let mut acc = 0.0;
                    for i in 0..n {
                        let a = lo + i as f64 * dx;
                        let b = a + dx;
                        // Simpson on each cell is plenty for a sampling table
                        let fa = d(side * a);
                        let fm = d(side * 0.5 * (a + b));
                        let fb = d(side * b);
                        acc += dx / 6.0 * (fa + 4.0 * fm + fb);
                        cdf.push(acc);
                    }
                    let last = *cdf.last().unwrap();
                    for v in &mut cdf {
                        *v /= last;
                    }
                    Ok(cdf)
                };
                Ok(JumpSampler::Table {
                    prob_plus: m_plus / total,
                    grid_plus: tabulate(1.0, m_plus)?,
                    grid_minus: tabulate(-1.0, m_minus)?,
                    lo,
                    hi,
                })
            }
            MeasureKind::FiniteAtoms { atoms } => {
                let selected: Vec<(f64, f64)> = atoms
                    .iter()
                    .copied()
                    .filter(|(x, _)| x.abs() > lo && x.abs() <= hi)
                    .collect();
                let total: f64 = selected.iter().map(|(_, m)| m).sum();
                if !(total > 0.0) {
                    return Err(Error::Degenerate("jump band carries no atoms".into()));
                }
                let mut cumulative = Vec::with_capacity(selected.len());
                let mut acc = 0.0;
                for (x, m) in selected {
                    acc += m / total;
                    cumulative.push((acc, x));
                }
                cumulative.last_mut().unwrap().0 = 1.0;
                Ok(JumpSampler::Atoms { cumulative })
            }
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            JumpSampler::Stable {
                beta,
                prob_plus,
                lo_pow,
                span,
            } => {
                let side = if rng.gen::<f64>() < *prob_plus { 1.0 } else { -1.0 };
                let u: f64 = rng.gen();
                side * (lo_pow - u * span).powf(-1.0 / beta)
            }
            JumpSampler::Table {
                prob_plus,
                grid_plus,
                grid_minus,
                lo,
                hi,
            } => {
                let (side, grid) = if rng.gen::<f64>() < *prob_plus {
                    (1.0, grid_plus)
                } else {
                    (-1.0, grid_minus)
                };
                let u: f64 = rng.gen();
                let idx = grid.partition_point(|&c| c < u).clamp(1, grid.len() - 1);
                let (c0, c1) = (grid[idx - 1], grid[idx]);
                let frac = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
                let dx = (hi - lo) / (grid.len() - 1) as f64;
                side * (lo + ((idx - 1) as f64 + frac) * dx)
            }
            JumpSampler::Atoms { cumulative } => {
                let u: f64 = rng.gen();
                cumulative
                    .iter()
                    .find(|(c, _)| u <= *c)
                    .map(|(_, x)| *x)
                    .unwrap_or(cumulative.last().unwrap().1)
            }
        }
    }
}

fn effective_band(measure: &MeasureSpec, lo: f64, hi: f64) -> Option<(f64, f64)> {
    let l = measure.band.lower.max(lo);
    let u = measure.band.upper.min(hi);
    (u > l).then_some((l, u))
}

/// Simulate increments of the compensated small-jump part `M_Delta(eta, eps)`.
///
/// Each increment is `sum_{i<=P} Y_i - Delta \int_{eta<|x|<=eps} x nu(dx)`
/// with `P ~ Poisson(Delta lambda_{eta,eps})` and `Y_i` i.i.d. from the
/// normalized restricted measure. With `gaussian_refinement` an independent
/// `N(0, Delta sigma^2(0,eta))` term is added per increment.
pub fn sample_small_jump_increments(
    measure: &MeasureSpec,
    eta: f64,
    epsilon: f64,
    delta: f64,
    n: usize,
    seed: u64,
    gaussian_refinement: bool,
) -> Result<IncrementBatch> {
    if !(eta >= 0.0 && epsilon > eta && delta > 0.0) {
        return Err(Error::Domain(
            "need 0 <= eta < epsilon and delta > 0".into(),
        ));
    }
    let lambda = intensity(measure, eta, epsilon)?
        .finite("small-jump simulation")?;
    let mask = ComponentMask {
        gauss: false,
        small_jumps: true,
        big_jumps: false,
        drift: false,
    };

    let values: Vec<f64> = match effective_band(measure, eta, epsilon) {
        None => vec![0.0; n],
        Some((lo, hi)) => {
            let sampler = if lambda > 0.0 {
                Some(JumpSampler::new(measure, lo, hi)?)
            } else {
                None
            };
            let compensator = delta * measure.moment_on(1, eta, epsilon)?;
            let refine_sd = if gaussian_refinement && eta > 0.0 {
                (delta * measure.moment_on(2, 0.0, eta)?).sqrt()
            } else {
                0.0
            };
            let mean_jumps = delta * lambda;
            (0..n as u64)
                .into_par_iter()
                .map(|i| {
                    let mut rng = substream(seed, Component::SmallJumps, i);
                    let mut x = -compensator;
                    if let Some(s) = &sampler {
                        let count = poisson(&mut rng, mean_jumps);
                        for _ in 0..count {
                            x += s.draw(&mut rng);
                        }
                    }
                    if refine_sd > 0.0 {
                        let mut refine = substream(seed, Component::Refinement, i);
                        let z: f64 = refine.sample(StandardNormal);
                        x += refine_sd * z;
                    }
                    x
                })
                .collect()
        }
    };

    Ok(IncrementBatch {
        values,
        delta,
        seed,
        truncation_eta: eta,
        mask,
    })
}

/// Simulate increments of the big-jump compound Poisson part `Z_Delta(eps)`:
/// uncompensated jumps of magnitude above `epsilon`.
pub fn sample_big_jump_increments(
    measure: &MeasureSpec,
    epsilon: f64,
    delta: f64,
    n: usize,
    seed: u64,
) -> Result<IncrementBatch> {
    if !(epsilon >= 0.0 && delta > 0.0) {
        return Err(Error::Domain("need epsilon >= 0 and delta > 0".into()));
    }
    let mask = ComponentMask {
        gauss: false,
        small_jumps: false,
        big_jumps: true,
        drift: false,
    };
    let lambda = match measure.mass_on(epsilon, f64::INFINITY) {
        Ok(act) => act.finite("big-jump simulation")?,
        Err(e) => return Err(e),
    };
    if lambda == 0.0 {
        return Ok(IncrementBatch {
            values: vec![0.0; n],
            delta,
            seed,
            truncation_eta: 0.0,
            mask,
        });
    }
    let (lo, hi) = effective_band(measure, epsilon, f64::INFINITY)
        .expect("positive mass implies nonempty band");
    let sampler = JumpSampler::new(measure, lo, hi)?;
    let mean_jumps = delta * lambda;
    let values: Vec<f64> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, Component::BigJumps, i);
            let count = poisson(&mut rng, mean_jumps);
            let mut x = 0.0;
            for _ in 0..count {
                x += sampler.draw(&mut rng);
            }
            x
        })
        .collect();
    Ok(IncrementBatch {
        values,
        delta,
        seed,
        truncation_eta: 0.0,
        mask,
    })
}

/// Simulate increments of the full process at truncation `epsilon`:
/// `b(eps) Delta + Sigma W_Delta + M_Delta(eta, eps) + Z_Delta(eps)`,
/// with independently seeded component substreams.
pub fn sample_process_increments(
    triplet: &LevyTriplet,
    epsilon: f64,
    eta: f64,
    delta: f64,
    n: usize,
    seed: u64,
    mask: ComponentMask,
) -> Result<IncrementBatch> {
    let mut values = vec![0.0; n];

    if mask.drift {
        let b_eps = drift_beps(triplet, epsilon)? * delta;
        for v in &mut values {
            *v += b_eps;
        }
    }
    if mask.gauss && triplet.sigma_sq > 0.0 {
        let sd = (triplet.sigma_sq * delta).sqrt();
        values
            .par_iter_mut()
            .enumerate()
            .for_each(|(i, v)| {
                let mut rng = substream(seed, Component::Gauss, i as u64);
                let z: f64 = rng.sample(StandardNormal);
                *v += sd * z;
            });
    }
    if mask.small_jumps {
        let small =
            sample_small_jump_increments(&triplet.measure, eta, epsilon, delta, n, seed, false)?;
        for (v, s) in values.iter_mut().zip(small.values) {
            *v += s;
        }
    }
    if mask.big_jumps && triplet.measure.band.upper > epsilon {
        let big = sample_big_jump_increments(&triplet.measure, epsilon, delta, n, seed)?;
        for (v, s) in values.iter_mut().zip(big.values) {
            *v += s;
        }
    }

    Ok(IncrementBatch {
        values,
        delta,
        seed,
        truncation_eta: eta,
        mask,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy_model::{moment_table, Band};
    use approx::assert_relative_eq;

    fn band(lo: f64, hi: f64) -> Band {
        Band::new(lo, hi).unwrap()
    }

    fn central_moments(xs: &[f64]) -> (f64, f64, f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let mut m2 = 0.0;
        let mut m3 = 0.0;
        let mut m4 = 0.0;
        for &x in xs {
            let d = x - mean;
            m2 += d * d;
            m3 += d * d * d;
            m4 += d * d * d * d;
        }
        (mean, m2 / n, m3 / n, m4 / n)
    }

    #[test]
    fn determinism_across_thread_counts() {
        let m = MeasureSpec::symmetric_stable(0.7, 1.0, band(0.0, 0.2)).unwrap();
        let pool1 = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let pool4 = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let a = pool1
            .install(|| sample_small_jump_increments(&m, 0.01, 0.2, 0.5, 4096, 99, false))
            .unwrap();
        let b = pool4
            .install(|| sample_small_jump_increments(&m, 0.01, 0.2, 0.5, 4096, 99, false))
            .unwrap();
        assert_eq!(a.values, b.values, "batches must be bit-identical");
    }

    #[test]
    fn atoms_cpp_law_is_exact_lattice() {
        // {(0.1, 2.0)}, eta=0, Delta=1: increments in {0.1 k - 0.2}
        let m = MeasureSpec::finite_atoms(vec![(0.1, 2.0)], band(0.0, 0.2)).unwrap();
        let batch = sample_small_jump_increments(&m, 0.0, 0.2, 1.0, 200_000, 5, false).unwrap();
        for &v in &batch.values {
            let k = (v + 0.2) / 0.1;
            assert!((k - k.round()).abs() < 1e-9, "value {v} off-lattice");
        }
        let n = batch.values.len() as f64;
        let mean = batch.values.iter().sum::<f64>() / n;
        // Var = Delta * mu2 = 2 * 0.01 = 0.02
        let se = (0.02f64 / n).sqrt();
        assert!(mean.abs() < 4.0 * se, "mean {mean} vs se {se}");
    }

    #[test]
    fn symmetric_stable_skewness_is_zero() {
        let m = MeasureSpec::symmetric_stable(0.5, 1.0, band(0.0, 0.1)).unwrap();
        let batch = sample_small_jump_increments(&m, 0.01, 0.1, 1.0, 300_000, 17, false).unwrap();
        let (_, _m2, m3, _) = central_moments(&batch.values);
        let n = batch.values.len() as f64;
        // SE of the third central moment, Gaussian-order approximation
        let m6: f64 = {
            let mean = batch.values.iter().sum::<f64>() / n;
            batch.values.iter().map(|&x| (x - mean).powi(6)).sum::<f64>() / n
        };
        let se = (m6 / n).sqrt();
        assert!(m3.abs() < 4.0 * se, "m3 {m3} vs 4se {}", 4.0 * se);
    }

    #[test]
    fn fourth_moment_matches_martingale_formula() {
        // E[(M_Delta)^4] = Delta mu4 + 3 Delta^2 sigma^4 on the (eta, eps] band
        let m = MeasureSpec::symmetric_stable(0.5, 1.0, band(0.0, 0.1)).unwrap();
        let t = LevyTriplet::new(0.0, 0.0, m.clone()).unwrap();
        let mt = moment_table(&t, 0.01, 0.1).unwrap();
        let delta = 1.0;
        let batch = sample_small_jump_increments(&m, 0.01, 0.1, delta, 1_000_000, 23, false).unwrap();
        let (_, m2, _, m4) = central_moments(&batch.values);
        let expect_m2 = delta * mt.sigma2;
        let expect_m4 = delta * mt.mu_k(4) + 3.0 * delta * delta * mt.sigma2 * mt.sigma2;
        let n = batch.values.len() as f64;
        let se_m2 = ((m4 - m2 * m2).max(0.0) / n).sqrt();
        assert!((m2 - expect_m2).abs() < 4.0 * se_m2);
        let m8: f64 = {
            let mean = batch.values.iter().sum::<f64>() / n;
            batch.values.iter().map(|&x| (x - mean).powi(8)).sum::<f64>() / n
        };
        let se_m4 = ((m8 - m4 * m4).max(0.0) / n).sqrt();
        assert!(
            (m4 - expect_m4).abs() < 4.0 * se_m4,
            "m4 {m4} expect {expect_m4} se {se_m4}"
        );
    }

    #[test]
    fn big_jump_void_probability() {
        // symmetric beta=1 c=1 band (0,1], eps=0.5: Lambda = 2(1/0.5 - 1/1) = 2
        let m = MeasureSpec::symmetric_stable(1.0, 1.0, band(0.0, 1.0)).unwrap();
        let batch = sample_big_jump_increments(&m, 0.5, 1.0, 400_000, 31).unwrap();
        let zeros = batch.values.iter().filter(|v| **v == 0.0).count() as f64;
        let n = batch.values.len() as f64;
        let p = (-2.0f64).exp();
        let se = (p * (1.0 - p) / n).sqrt();
        assert!(
            (zeros / n - p).abs() < 4.0 * se,
            "void fraction {} vs {p}",
            zeros / n
        );
    }

    #[test]
    fn big_jump_atom_poisson_mean() {
        // atom at 0.8 mass 1.0, eps=0.5, Delta=0.3: increment/0.8 ~ Poisson(0.3)
        let m = MeasureSpec::finite_atoms(vec![(0.8, 1.0)], band(0.0, 1.0)).unwrap();
        let batch = sample_big_jump_increments(&m, 0.5, 0.3, 400_000, 37).unwrap();
        let n = batch.values.len() as f64;
        let mean = batch.values.iter().sum::<f64>() / n;
        let var_one = 0.3 * 0.64; // Var(0.8 P) = 0.64 * 0.3
        let se = (var_one / n).sqrt();
        assert!((mean - 0.24).abs() < 4.0 * se);
    }

    #[test]
    fn big_jumps_inside_band_are_all_zero() {
        let m = MeasureSpec::symmetric_stable(0.5, 1.0, band(0.0, 0.1)).unwrap();
        let batch = sample_big_jump_increments(&m, 0.1, 1.0, 1000, 3).unwrap();
        assert!(batch.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn gauss_only_variance() {
        let t = LevyTriplet::new(0.0, 2.0, MeasureSpec::none()).unwrap();
        let batch = sample_process_increments(
            &t,
            1.0,
            0.0,
            0.5,
            1_000_000,
            41,
            ComponentMask::only_gauss(),
        )
        .unwrap();
        let (_, m2, _, m4) = central_moments(&batch.values);
        let n = batch.values.len() as f64;
        let se = ((m4 - m2 * m2) / n).sqrt();
        assert!((m2 - 1.0).abs() < 4.0 * se, "variance {m2}");
        // kurtosis 3 +- 4 se
        let kurt = m4 / (m2 * m2);
        let se_k = (24.0f64 / n).sqrt();
        assert!((kurt - 3.0).abs() < 4.0 * se_k, "kurtosis {kurt}");
    }

    #[test]
    fn gauss_plus_small_variance_adds() {
        let m = MeasureSpec::symmetric_stable(0.8, 1.0, band(0.0, 0.3)).unwrap();
        let t = LevyTriplet::new(0.0, 0.5, m).unwrap();
        let delta = 1.0;
        let mt = moment_table(&t, 0.02, 0.3).unwrap();
        let batch = sample_process_increments(
            &t,
            0.3,
            0.02,
            delta,
            1_000_000,
            43,
            ComponentMask::gauss_and_small(),
        )
        .unwrap();
        let (_, m2, _, m4) = central_moments(&batch.values);
        let expect = delta * (0.5 + mt.sigma2);
        let n = batch.values.len() as f64;
        let se = ((m4 - m2 * m2) / n).sqrt();
        assert!((m2 - expect).abs() < 4.0 * se, "var {m2} expect {expect}");
    }

    #[test]
    fn full_mask_atoms_mean_is_zero() {
        // atoms inside band, b=0, eps <= 1: b(eps) compensates exactly
        let m = MeasureSpec::finite_atoms(vec![(0.2, 1.5), (-0.1, 0.7)], band(0.0, 0.3)).unwrap();
        let t = LevyTriplet::new(0.0, 0.2, m).unwrap();
        let batch =
            sample_process_increments(&t, 0.5, 0.0, 1.0, 500_000, 47, ComponentMask::ALL).unwrap();
        let n = batch.values.len() as f64;
        let mean = batch.values.iter().sum::<f64>() / n;
        let (_, m2, _, _) = central_moments(&batch.values);
        let se = (m2 / n).sqrt();
        assert!(mean.abs() < 4.0 * se, "mean {mean} vs se {se}");
    }

    #[test]
    fn infinite_activity_without_eta_is_capability_error() {
        let m = MeasureSpec::symmetric_stable(0.5, 1.0, band(0.0, 0.1)).unwrap();
        match sample_small_jump_increments(&m, 0.0, 0.1, 1.0, 10, 1, false) {
            Err(Error::Capability(msg)) => assert!(msg.contains("eta")),
            other => panic!("expected capability error, got {other:?}"),
        }
    }

    #[test]
    fn gaussian_refinement_adds_subband_variance() {
        let m = MeasureSpec::symmetric_stable(1.2, 1.0, band(0.0, 0.4)).unwrap();
        let t = LevyTriplet::new(0.0, 0.0, m.clone()).unwrap();
        let mt_full = moment_table(&t, 0.0, 0.4).unwrap();
        let batch = sample_small_jump_increments(&m, 0.1, 0.4, 1.0, 400_000, 53, true).unwrap();
        let (_, m2, _, m4) = central_moments(&batch.values);
        let n = batch.values.len() as f64;
        let se = ((m4 - m2 * m2) / n).sqrt();
        assert!(
            (m2 - mt_full.sigma2).abs() < 4.0 * se,
            "refined variance {m2} vs {}",
            mt_full.sigma2
        );
    }

    #[test]
    fn csv_and_binary_exports() {
        let m = MeasureSpec::finite_atoms(vec![(0.5, 1.0)], band(0.0, 1.0)).unwrap();
        let batch = sample_small_jump_increments(&m, 0.0, 1.0, 1.0, 4, 7, false).unwrap();
        let mut csv = Vec::new();
        batch.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("value\n"));
        assert_eq!(text.lines().count(), 5);
        let mut bin = Vec::new();
        batch.write_binary(&mut bin).unwrap();
        assert_eq!(bin.len(), 4 * 8);
        let first = f64::from_le_bytes(bin[0..8].try_into().unwrap());
        assert_relative_eq!(first, batch.values[0]);
    }
}
