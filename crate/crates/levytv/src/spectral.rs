//! Characteristic function of the truncated process, FFT density inversion,
//! and a numerical total-variation oracle against the matched Gaussian.
//!
//! The characteristic function comes from the Lévy–Khintchine formula
//! `E e^{itX_Delta(eps)} = exp(it b(eps) Delta - Sigma^2 Delta t^2/2
//!   + Delta \int (e^{itx} - 1 - itx) nu(dx))`
//! with the jump integral restricted to `|x| <= eps`. The integral is split
//! at `|x| = 1/|t|`: the inner part is summed as a series against the
//! power-law kernel (the integrand is O(t^2 x^2) against a `|x|^{-1-beta}`
//! singularity, so direct evaluation would cancel catastrophically), the
//! outer part is integrated panel-by-panel over half-periods.

use crate::error::{Error, Result};
use crate::levy_model::{drift_beps, LevyTriplet, MeasureKind, MeasureSpec};
use crate::quad;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use std::collections::HashMap;
use std::io::Write;

/// FFT inversion parameters.
#[derive(Debug, Clone, Copy)]
pub struct GridParams {
    /// Number of grid points (power of two).
    pub grid_size: usize,
    /// Half-width of the x-grid in standard deviations of the increment.
    pub half_width_sds: f64,
    /// Shift applied to the grid origin (diagnostics; the oracle result must
    /// not depend on it).
    pub center_shift: f64,
    /// Re-run at doubled grid size and fail if the TV moves by 1e-3 or more.
    pub refine_check: bool,
}

impl Default for GridParams {
    fn default() -> Self {
        GridParams {
            grid_size: 1 << 16,
            half_width_sds: 12.0,
            center_shift: 0.0,
            refine_check: true,
        }
    }
}

/// Density samples on a uniform grid, plus the analytically split atom for
/// finite-activity laws with no Gaussian part.
#[derive(Debug, Clone)]
pub struct DensityGrid {
    pub x0: f64,
    pub dx: f64,
    pub values: Vec<f64>,
    /// `(location, mass)` of the no-jump atom.
    pub atom: Option<(f64, f64)>,
    /// True when the continuous part is itself a spiked lattice law
    /// (finite atoms with `Sigma = 0`); densities are then cell averages.
    pub lattice: bool,
}

impl DensityGrid {
    pub fn x(&self, j: usize) -> f64 {
        self.x0 + j as f64 * self.dx
    }

    /// Total mass on the grid plus the atom.
    pub fn mass(&self) -> f64 {
        self.dx * self.values.iter().sum::<f64>() + self.atom.map_or(0.0, |(_, m)| m)
    }

    /// Mean and variance of the gridded law (atom included).
    pub fn mean_variance(&self) -> (f64, f64) {
        let mut m0 = 0.0;
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for (j, &v) in self.values.iter().enumerate() {
            let x = self.x(j);
            m0 += v * self.dx;
            m1 += x * v * self.dx;
            m2 += x * x * v * self.dx;
        }
        if let Some((loc, mass)) = self.atom {
            m0 += mass;
            m1 += loc * mass;
            m2 += loc * loc * mass;
        }
        let mean = m1 / m0;
        (mean, m2 / m0 - mean * mean)
    }

    /// CSV export `(x, f(x))`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,f")?;
        for (j, &v) in self.values.iter().enumerate() {
            writeln!(w, "{:.16e},{:.16e}", self.x(j), v)?;
        }
        Ok(())
    }
}

/// Result of the numerical TV oracle.
#[derive(Debug, Clone, Copy)]
pub struct TvEstimate {
    pub value: f64,
    /// Set when the law is purely atomic (finite atoms, `Sigma = 0`): the TV
    /// against any Gaussian is exactly 1 and the continuous oracle was not
    /// consulted.
    pub flagged: bool,
}

// stable evaluation of cos(z) - 1
fn cos_m1(z: f64) -> f64 {
    let s = (0.5 * z).sin();
    -2.0 * s * s
}

// stable evaluation of sin(z) - z
fn sin_m1(z: f64) -> f64 {
    if z.abs() < 0.25 {
        let z2 = z * z;
        z * z2 * (-1.0 / 6.0 + z2 * (1.0 / 120.0 - z2 / 5040.0))
    } else {
        z.sin() - z
    }
}

/// `\int_{band ^ (0, eps]} (e^{itx} - 1 - itx) nu(dx)` for `t >= 0`.
fn jump_cf_exponent(measure: &MeasureSpec, epsilon: f64, t: f64) -> Result<Complex64> {
    debug_assert!(t >= 0.0);
    let lo = measure.band.lower;
    let hi = measure.band.upper.min(epsilon);
    if hi <= lo || t == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    match &measure.kind {
        MeasureKind::FiniteAtoms { atoms } => {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(x, m) in atoms {
                if x.abs() > lo && x.abs() <= hi {
                    let z = t * x;
                    acc += m * Complex64::new(cos_m1(z), sin_m1(z));
                }
            }
            Ok(acc)
        }
        MeasureKind::StableType {
            beta,
            c_plus,
            c_minus,
        } => {
            let c_sym = c_plus + c_minus;
            let c_skew = c_plus - c_minus;
            let split = hi.min(1.0 / t).max(lo);
            let mut re = 0.0;
            let mut im = 0.0;
            // inner series over (lo, split]
            if split > lo {
                re += c_sym * stable_series(t, lo, split, *beta, 0);
                if c_skew != 0.0 {
                    im += c_skew * stable_series(t, lo, split, *beta, 1);
                }
            }
            // outer oscillatory part over (split, hi]
            if hi > split {
                let kernel = move |x: f64, b: f64| x.powf(-1.0 - b);
                let b = *beta;
                re += c_sym
                    * oscillatory_band(t, split, hi, move |x| cos_m1(t * x) * kernel(x, b))?;
                if c_skew != 0.0 {
                    im += c_skew
                        * oscillatory_band(t, split, hi, move |x| sin_m1(t * x) * kernel(x, b))?;
                }
            }
            Ok(Complex64::new(re, im))
        }
        MeasureKind::Density {
            density,
            singularity_exponent,
        } => {
            let d = density.clone();
            let w_sum = move |x: f64| d(x) + d(-x);
            let d2 = density.clone();
            let w_diff = move |x: f64| d2(x) - d2(-x);
            let gamma = *singularity_exponent;
            let mut re = 0.0;
            let mut im = 0.0;
            let split = hi.min(1.0 / t).max(lo);
            if split > lo {
                // substitute the x^{2-gamma} leading behaviour smooth near 0
                re += singular_band(lo, split, gamma, 2, |x| cos_m1(t * x) * w_sum(x))?;
                im += singular_band(lo, split, gamma, 3, |x| sin_m1(t * x) * w_diff(x))?;
            }
            if hi > split {
                re += oscillatory_band(t, split, hi, |x| cos_m1(t * x) * w_sum(x))?;
                im += oscillatory_band(t, split, hi, |x| sin_m1(t * x) * w_diff(x))?;
            }
            Ok(Complex64::new(re, im))
        }
    }
}

/// Series for `\int_l^u (cos(tx)-1) x^{-1-beta} dx` (parity 0) or
/// `\int_l^u (sin(tx)-tx) x^{-1-beta} dx` (parity 1), valid for `t u <= 1`.
fn stable_series(t: f64, l: f64, u: f64, beta: f64, parity: u8) -> f64 {
    let mut acc = 0.0;
    let mut sign = -1.0;
    let mut log_fact = 0.0; // ln(p!)
    let mut p = 0u32;
    for k in 1..=40u32 {
        let pow = 2 * k + parity as u32; // 2k or 2k+1
        while p < pow {
            p += 1;
            log_fact += (p as f64).ln();
        }
        let e = pow as f64 - beta;
        let band = if l > 0.0 {
            u.powf(e) - l.powf(e)
        } else {
            u.powf(e)
        };
        let term = sign * (pow as f64 * t.ln() - log_fact).exp() * band / e;
        acc += term;
        if term.abs() <= 1e-17 * (acc.abs() + 1e-300) {
            break;
        }
        sign = -sign;
    }
    acc
}

/// Integrate an oscillatory integrand over `(a, b]`, pre-split on half-periods.
fn oscillatory_band<F: Fn(f64) -> f64>(t: f64, a: f64, b: f64, f: F) -> Result<f64> {
    let half_period = std::f64::consts::PI / t;
    let panels = ((b - a) / half_period).ceil() as usize;
    if panels > 200_000 {
        return Err(Error::Numeric(format!(
            "oscillatory CF integral needs {panels} panels; frequency too high for this band"
        )));
    }
    let mut pts = Vec::with_capacity(panels + 2);
    let mut x = a;
    while x < b {
        pts.push(x);
        x += half_period;
    }
    pts.push(b);
    Ok(quad::integrate_segmented(f, &pts, 1e-11, 1e-12)?.value)
}

/// Integrate `f` over `(l, u]` where `f(x) ~ x^{k - gamma}` near 0; when
/// `l = 0` the substitution `x = s^p` with `p = 2/(k - gamma + 1)` makes the
/// transformed integrand O(s).
fn singular_band<F: Fn(f64) -> f64>(l: f64, u: f64, gamma: f64, k: u32, f: F) -> Result<f64> {
    if l > 0.0 {
        return Ok(quad::integrate(f, l, u, 1e-11, 1e-12)?.value);
    }
    let p = 2.0 / (k as f64 - gamma + 1.0);
    if p <= 0.0 {
        return Err(Error::NonIntegrable(format!(
            "CF integrand of order {k} is non-integrable for singularity exponent {gamma}"
        )));
    }
    let g = move |s: f64| {
        if s <= 0.0 {
            return 0.0;
        }
        let x = s.powf(p);
        f(x) * p * s.powf(p - 1.0)
    };
    Ok(quad::integrate(g, 0.0, u.powf(1.0 / p), 1e-11, 1e-12)?.value)
}

/// Real part of the jump exponent restricted to the inner region; an upper
/// bound for the full real part since `cos - 1 <= 0` everywhere.
fn jump_exponent_real_upper_bound(measure: &MeasureSpec, epsilon: f64, t: f64) -> Result<f64> {
    let lo = measure.band.lower;
    let hi = measure.band.upper.min(epsilon);
    if hi <= lo || t == 0.0 {
        return Ok(0.0);
    }
    match &measure.kind {
        MeasureKind::StableType {
            beta,
            c_plus,
            c_minus,
        } => {
            let split = hi.min(1.0 / t).max(lo);
            if split > lo {
                Ok((c_plus + c_minus) * stable_series(t, lo, split, *beta, 0))
            } else {
                Ok(0.0)
            }
        }
        _ => Ok(0.0), // no cheap bound; evaluate in full
    }
}

/// `E[e^{it X_Delta(eps)}]` of the process truncated at `epsilon`
/// (drift `b(eps)`, Gaussian part, compensated jumps of size `<= eps`).
pub fn char_fn(triplet: &LevyTriplet, epsilon: f64, delta: f64, t: f64) -> Result<Complex64> {
    if !(epsilon > 0.0 && delta > 0.0) {
        return Err(Error::Domain("char_fn: need epsilon > 0 and delta > 0".into()));
    }
    let t_abs = t.abs();
    let b_eps = drift_beps(triplet, epsilon)?;
    let gauss_re = -0.5 * triplet.sigma_sq * delta * t_abs * t_abs;

    // cheap upper bound on the real part decides whether the exact
    // oscillatory work can be skipped (|psi| < e^-60 contributes nothing)
    let bound = gauss_re + delta * jump_exponent_real_upper_bound(&triplet.measure, epsilon, t_abs)?;
    if bound < -60.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }

    let jump = jump_cf_exponent(&triplet.measure, epsilon, t_abs)?;
    let exponent = Complex64::new(
        gauss_re + delta * jump.re,
        t_abs * b_eps * delta + delta * jump.im,
    );
    let psi = exponent.exp();
    Ok(if t < 0.0 { psi.conj() } else { psi })
}

struct LawSplit {
    /// Atom `(location, mass)` of the no-jump event, when `Sigma = 0` and
    /// the activity is finite.
    atom: Option<(f64, f64)>,
}

fn law_split(triplet: &LevyTriplet, epsilon: f64, delta: f64) -> Result<LawSplit> {
    let lam = triplet.measure.mass_on(0.0, epsilon)?;
    let atom = match (triplet.sigma_sq > 0.0, lam) {
        (false, crate::levy_model::Activity::Finite(l)) => {
            let m1 = triplet.measure.moment_on(1, 0.0, epsilon)?;
            let loc = drift_beps(triplet, epsilon)? * delta - delta * m1;
            Some((loc, (-l * delta).exp()))
        }
        _ => None,
    };
    Ok(LawSplit { atom })
}

/// Invert the characteristic function to a density on a uniform grid.
///
/// The grid spans `mean +- half_width_sds * sqrt(Delta (Sigma^2 + sigma^2(eps)))`.
/// For finite activity with `Sigma = 0` the no-jump atom `e^{-Delta lambda}`
/// is split out analytically; for finite-atom measures with `Sigma = 0` the
/// whole lattice law is enumerated exactly and gridded as cell averages.
pub fn density_on_grid(
    triplet: &LevyTriplet,
    epsilon: f64,
    delta: f64,
    params: &GridParams,
) -> Result<DensityGrid> {
    let sigma2_eps = triplet.measure.moment_on(2, 0.0, epsilon)?;
    let var = delta * (triplet.sigma_sq + sigma2_eps);
    if !(var > 0.0) {
        return Err(Error::Degenerate(
            "increment variance is zero; nothing to invert".into(),
        ));
    }
    let mean = drift_beps(triplet, epsilon)? * delta;

    if triplet.sigma_sq == 0.0 {
        if let MeasureKind::FiniteAtoms { .. } = triplet.measure.kind {
            return lattice_grid(triplet, epsilon, delta, mean, var, params);
        }
    }

    let n = params.grid_size;
    if !n.is_power_of_two() || n < 64 {
        return Err(Error::Domain("grid_size must be a power of two >= 64".into()));
    }
    let sd = var.sqrt();
    let span = 2.0 * params.half_width_sds * sd;
    let dx = span / n as f64;
    let x0 = mean - 0.5 * span + params.center_shift;
    let dt = 2.0 * std::f64::consts::PI / (n as f64 * dx);

    let split = law_split(triplet, epsilon, delta)?;

    // CF samples on the positive t-grid, atom part removed
    let psis: Vec<Complex64> = (0..n)
        .into_par_iter()
        .map(|k| -> Result<Complex64> {
            let t = k as f64 * dt;
            let mut psi = char_fn(triplet, epsilon, delta, t)?;
            if let Some((loc, mass)) = split.atom {
                psi -= mass * Complex64::new(0.0, t * loc).exp();
            }
            Ok(psi)
        })
        .collect::<Result<Vec<_>>>()?;

    let tail = psis[n - 1].norm();
    if tail > 1e-6 {
        return Err(Error::Resolution(format!(
            "characteristic function mass {tail:.3e} > 1e-6 at the grid edge; \
             increase grid_size or reduce half_width_sds"
        )));
    }

    // f(x_j) = dt/pi * Re sum_k w_k psi(t_k) e^{-i t_k x0} e^{-2pi i kj / n}
    let mut buf: Vec<Complex64> = (0..n)
        .map(|k| {
            let w = if k == 0 { 0.5 } else { 1.0 };
            let phase = Complex64::new(0.0, -(k as f64) * dt * x0).exp();
            w * psis[k] * phase
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let scale = dt / std::f64::consts::PI;
    let values: Vec<f64> = buf.iter().map(|c| c.re * scale).collect();

    let grid = DensityGrid {
        x0,
        dx,
        values,
        atom: split.atom,
        lattice: false,
    };
    validate_grid(&grid)?;
    Ok(grid)
}

fn validate_grid(grid: &DensityGrid) -> Result<()> {
    let min = grid.values.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -1e-8 {
        return Err(Error::Resolution(format!(
            "density ringing {min:.3e} below -1e-8; increase grid_size"
        )));
    }
    let mass = grid.mass();
    if !(0.9999..=1.0001).contains(&mass) {
        return Err(Error::Resolution(format!(
            "gridded mass {mass:.6} outside [0.9999, 1.0001]; widen the grid"
        )));
    }
    Ok(())
}

/// Exact lattice law for finite-atom measures with `Sigma = 0`, gridded as
/// spikes (cell averages) so that mass accounting still holds.
fn lattice_grid(
    triplet: &LevyTriplet,
    epsilon: f64,
    delta: f64,
    mean: f64,
    var: f64,
    params: &GridParams,
) -> Result<DensityGrid> {
    let lam = triplet
        .measure
        .mass_on(0.0, epsilon)?
        .finite("lattice law")?;
    let lam_dt = lam * delta;
    if lam_dt > 60.0 {
        return Err(Error::Resolution(
            "atom law with lambda Delta > 60: enumerate-and-spike is hopeless, \
             add a Gaussian component instead"
                .into(),
        ));
    }
    let atoms: Vec<(f64, f64)> = match &triplet.measure.kind {
        MeasureKind::FiniteAtoms { atoms } => atoms
            .iter()
            .copied()
            .filter(|(x, _)| {
                x.abs() > triplet.measure.band.lower && x.abs() <= triplet.measure.band.upper.min(epsilon)
            })
            .collect(),
        _ => unreachable!("lattice path is FiniteAtoms-only"),
    };
    let shift = mean - delta * triplet.measure.moment_on(1, 0.0, epsilon)?;

    // law of sum of P jumps, P ~ Poisson(lam_dt); keys quantized for folding
    let quantum = atoms
        .iter()
        .map(|(x, _)| x.abs())
        .fold(f64::INFINITY, f64::min)
        * 1e-9;
    let q = |v: f64| (v / quantum).round() as i64;
    let mut law: HashMap<i64, (f64, f64)> = HashMap::new(); // key -> (value, prob)
    let mut conv: HashMap<i64, (f64, f64)> = HashMap::new(); // jump-sum law at count k
    conv.insert(0, (0.0, 1.0));
    let mut poisson_term = (-lam_dt).exp();
    let mut accounted = 0.0;
    let mut k = 0u32;
    loop {
        for (_, &(v, p)) in conv.iter() {
            let e = law.entry(q(v)).or_insert((v, 0.0));
            e.1 += poisson_term * p;
        }
        accounted += poisson_term;
        if 1.0 - accounted < 1e-12 || k > 400 {
            break;
        }
        // convolve one more jump
        let mut next: HashMap<i64, (f64, f64)> = HashMap::new();
        for (_, &(v, p)) in conv.iter() {
            for &(x, m) in &atoms {
                let nv = v + x;
                let np = p * m / lam;
                let e = next.entry(q(nv)).or_insert((nv, 0.0));
                e.1 += np;
            }
        }
        conv = next;
        k += 1;
        poisson_term *= lam_dt / k as f64;
        if conv.len() > 2_000_000 {
            return Err(Error::Resolution(
                "lattice support exploded during enumeration".into(),
            ));
        }
    }

    let n = params.grid_size;
    let sd = var.sqrt();
    let span = 2.0 * params.half_width_sds * sd;
    let dx = span / n as f64;
    let x0 = mean - 0.5 * span + params.center_shift;
    let mut values = vec![0.0; n];
    let atom_mass = (-lam_dt).exp();
    let mut atom = None;
    for (_, (v, p)) in law {
        let x = v + shift;
        if v == 0.0 {
            atom = Some((x, p));
            continue;
        }
        let j = ((x - x0) / dx).round();
        if j >= 0.0 && (j as usize) < n {
            values[j as usize] += p / dx;
        }
    }
    let atom = atom.or(Some((shift, atom_mass)));

    Ok(DensityGrid {
        x0,
        dx,
        values,
        atom,
        lattice: true,
    })
}

/// One-dimensional TV between a gridded law and `N(g_mean, g_var)`:
/// `1/2 (atom mass + \int |f - phi|)` by trapezoid on the grid.
pub fn tv_grid_vs_gaussian(grid: &DensityGrid, g_mean: f64, g_var: f64) -> f64 {
    let g_sd = g_var.sqrt();
    let norm = 1.0 / (g_sd * (2.0 * std::f64::consts::PI).sqrt());
    let mut l1 = 0.0;
    for (j, &v) in grid.values.iter().enumerate() {
        let x = grid.x(j);
        let z = (x - g_mean) / g_sd;
        let phi = norm * (-0.5 * z * z).exp();
        let w = if j == 0 || j == grid.values.len() - 1 {
            0.5
        } else {
            1.0
        };
        l1 += w * (v - phi).abs() * grid.dx;
    }
    let atom_mass = grid.atom.map_or(0.0, |(_, m)| m);
    (0.5 * (l1 + atom_mass)).min(1.0)
}

/// Numerical TV between `X_Delta(eps)` and its matched Gaussian
/// `N(b(eps) Delta, Delta (Sigma^2 + sigma^2(eps)))`.
pub fn numeric_tv_to_gaussian(
    triplet: &LevyTriplet,
    epsilon: f64,
    delta: f64,
    params: &GridParams,
) -> Result<TvEstimate> {
    if triplet.sigma_sq == 0.0 {
        if let MeasureKind::FiniteAtoms { .. } = triplet.measure.kind {
            // purely atomic law vs an absolutely continuous one
            return Ok(TvEstimate {
                value: 1.0,
                flagged: true,
            });
        }
    }
    let sigma2_eps = triplet.measure.moment_on(2, 0.0, epsilon)?;
    let g_var = delta * (triplet.sigma_sq + sigma2_eps);
    let g_mean = drift_beps(triplet, epsilon)? * delta;

    let grid = density_on_grid(triplet, epsilon, delta, params)?;
    let tv = tv_grid_vs_gaussian(&grid, g_mean, g_var);

    if params.refine_check {
        let mut refined = *params;
        refined.grid_size = params.grid_size * 2;
        refined.refine_check = false;
        let grid2 = density_on_grid(triplet, epsilon, delta, &refined)?;
        let tv2 = tv_grid_vs_gaussian(&grid2, g_mean, g_var);
        if (tv2 - tv).abs() >= 1e-3 {
            return Err(Error::Resolution(format!(
                "TV moved by {:.3e} when doubling the grid; result not converged",
                (tv2 - tv).abs()
            )));
        }
        return Ok(TvEstimate {
            value: tv2,
            flagged: false,
        });
    }
    Ok(TvEstimate {
        value: tv,
        flagged: false,
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in lx.iter().zip(ly.iter()) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy_model::Band;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn band(lo: f64, hi: f64) -> Band {
        Band::new(lo, hi).unwrap()
    }

    fn pure_gaussian(b: f64, sigma_sq: f64) -> LevyTriplet {
        LevyTriplet::new(b, sigma_sq, MeasureSpec::none()).unwrap()
    }

    fn normal_cdf(x: f64) -> f64 {
        0.5 * (1.0 + libm::erf(x / std::f64::consts::SQRT_2))
    }

    #[test]
    fn char_fn_pure_gaussian() {
        let t = pure_gaussian(0.0, 1.0);
        let v = char_fn(&t, 1.0, 2.0, 1.0).unwrap();
        assert_relative_eq!(v.re, (-1.0f64).exp(), max_relative = 1e-12);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn char_fn_symmetric_measure_is_real() {
        let m = MeasureSpec::symmetric_stable(1.2, 1.0, band(0.0, 0.5)).unwrap();
        let t = LevyTriplet::new(0.0, 0.0, m).unwrap();
        for tt in [0.3, 1.7, 9.0, 33.0] {
            let v = char_fn(&t, 0.5, 1.0, tt).unwrap();
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn char_fn_compensated_atom_closed_form() {
        // atom (0.1, 5.0), Sigma=0, b=0, Delta=1, t=3:
        // psi = exp(5 (e^{0.3 i} - 1 - 0.3 i))
        let m = MeasureSpec::finite_atoms(vec![(0.1, 5.0)], band(0.0, 0.2)).unwrap();
        let t = LevyTriplet::new(0.0, 0.0, m).unwrap();
        let got = char_fn(&t, 0.2, 1.0, 3.0).unwrap();
        let z = Complex64::new(0.0, 0.3).exp() - Complex64::new(1.0, 0.3);
        let expect = (5.0 * z).exp();
        assert_relative_eq!(got.re, expect.re, max_relative = 1e-12);
        assert_relative_eq!(got.im, expect.im, max_relative = 1e-12);
        // modulus e^{5(cos 0.3 - 1)}
        assert_relative_eq!(got.norm(), (5.0 * (0.3f64.cos() - 1.0)).exp(), max_relative = 1e-12);
    }

    #[test]
    fn char_fn_hermitian_symmetry() {
        let m = MeasureSpec::stable(0.8, 1.0, 0.3, band(0.0, 0.4)).unwrap();
        let t = LevyTriplet::new(0.1, 0.2, m).unwrap();
        for tt in [0.5, 2.0, 11.0] {
            let a = char_fn(&t, 0.4, 1.0, tt).unwrap();
            let b = char_fn(&t, 0.4, 1.0, -tt).unwrap();
            assert_relative_eq!(a.re, b.re, max_relative = 1e-13);
            assert_relative_eq!(a.im, -b.im, max_relative = 1e-13);
            assert!(a.norm() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn char_fn_envelope_decreases_with_gaussian_part() {
        let t = pure_gaussian(0.3, 1.5);
        let m0 = char_fn(&t, 1.0, 1.0, 0.0).unwrap().norm();
        let m1 = char_fn(&t, 1.0, 1.0, 1.0).unwrap().norm();
        let m10 = char_fn(&t, 1.0, 1.0, 10.0).unwrap().norm();
        assert!(m0 >= m1 && m1 >= m10);
        assert_relative_eq!(m0, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn density_matches_standard_normal() {
        let t = pure_gaussian(0.0, 1.0);
        let grid = density_on_grid(&t, 1.0, 1.0, &GridParams::default()).unwrap();
        let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        let mut worst: f64 = 0.0;
        for (j, &v) in grid.values.iter().enumerate() {
            let x = grid.x(j);
            if x.abs() <= 6.0 {
                let phi = norm * (-0.5 * x * x).exp();
                worst = worst.max((v - phi).abs());
            }
        }
        assert!(worst <= 1e-6, "max density error {worst:.2e}");
    }

    #[test]
    fn lattice_law_atom_mass() {
        // lambda Delta = 2 -> atom mass e^{-2}
        let m = MeasureSpec::finite_atoms(vec![(0.1, 2.0)], band(0.0, 0.2)).unwrap();
        let t = LevyTriplet::new(0.0, 0.0, m).unwrap();
        let grid = density_on_grid(&t, 0.2, 1.0, &GridParams::default()).unwrap();
        assert!(grid.lattice);
        let (_, mass) = grid.atom.unwrap();
        assert_relative_eq!(mass, (-2.0f64).exp(), max_relative = 1e-12);
        assert_relative_eq!(grid.mass(), 1.0, epsilon = 1e-9);
        let tv = numeric_tv_to_gaussian(&t, 0.2, 1.0, &GridParams::default()).unwrap();
        assert_eq!(tv.value, 1.0);
        assert!(tv.flagged);
    }

    #[test]
    fn density_symmetric_about_zero() {
        let m = MeasureSpec::symmetric_stable(1.8, 1.0, band(0.0, 0.5)).unwrap();
        let t = LevyTriplet::new(0.0, 0.0, m).unwrap();
        let grid = density_on_grid(&t, 0.5, 1.0, &GridParams::default()).unwrap();
        let n = grid.values.len();
        let mut worst: f64 = 0.0;
        for j in 1..n {
            worst = worst.max((grid.values[j] - grid.values[n - j]).abs());
        }
        assert!(worst <= 1e-8, "asymmetry {worst:.2e}");
    }

    #[test]
    fn grid_variance_matches_model() {
        let m = MeasureSpec::symmetric_stable(0.9, 1.0, band(0.0, 0.3)).unwrap();
        let t = LevyTriplet::new(0.0, 0.4, m).unwrap();
        let grid = density_on_grid(&t, 0.3, 1.0, &GridParams::default()).unwrap();
        let sigma2 = t.measure.moment_on(2, 0.0, 0.3).unwrap();
        let (mean, var) = grid.mean_variance();
        assert_abs_diff_eq!(mean, 0.0, epsilon = 1e-6);
        assert_relative_eq!(var, 0.4 + sigma2, max_relative = 1e-3);
    }

    #[test]
    fn tv_of_gaussian_against_itself_is_zero() {
        let t = pure_gaussian(0.2, 1.0);
        let tv = numeric_tv_to_gaussian(&t, 1.0, 1.0, &GridParams::default()).unwrap();
        assert!(tv.value <= 1e-6, "tv {}", tv.value);
    }

    #[test]
    fn mean_shift_self_test_matches_closed_form() {
        // N(0,1) vs N(0.1,1): TV = 2 Phi(0.05) - 1
        let t = pure_gaussian(0.0, 1.0);
        let grid = density_on_grid(&t, 1.0, 1.0, &GridParams::default()).unwrap();
        let tv = tv_grid_vs_gaussian(&grid, 0.1, 1.0);
        let expect = 2.0 * normal_cdf(0.05) - 1.0;
        assert_relative_eq!(tv, expect, max_relative = 1e-5);
        assert_relative_eq!(expect, 0.0398776, max_relative = 1e-4);
    }

    #[test]
    fn tv_invariant_to_grid_shift() {
        let m = MeasureSpec::symmetric_stable(0.9, 1.0, band(0.0, 0.1)).unwrap();
        let t = LevyTriplet::new(0.0, 0.0, m).unwrap();
        let mut p = GridParams::default();
        p.refine_check = false;
        let a = numeric_tv_to_gaussian(&t, 0.1, 1.0, &p).unwrap().value;
        p.center_shift = 0.3 * (2.0 * 12.0 * (t.measure.moment_on(2, 0.0, 0.1).unwrap()).sqrt())
            / p.grid_size as f64;
        let b = numeric_tv_to_gaussian(&t, 0.1, 1.0, &p).unwrap().value;
        assert_abs_diff_eq!(a, b, epsilon = 1e-6);
    }

    #[test]
    fn rate_slope_beta_09() {
        // log TV vs log eps slope ~ beta for symmetric stable, Sigma = 0
        let epsilons = [0.02, 0.04, 0.08];
        let mut tvs = Vec::new();
        for &eps in &epsilons {
            let m = MeasureSpec::symmetric_stable(0.9, 1.0, band(0.0, eps)).unwrap();
            let t = LevyTriplet::new(0.0, 0.0, m).unwrap();
            let mut p = GridParams::default();
            p.refine_check = false;
            tvs.push(numeric_tv_to_gaussian(&t, eps, 1.0, &p).unwrap().value);
        }
        let slope = log_log_slope(&epsilons, &tvs);
        assert!(
            (slope - 0.9).abs() <= 0.15,
            "slope {slope} vs beta 0.9, tvs {tvs:?}"
        );
    }
}
