//! Process and measure descriptions, and every deterministic quantity derived
//! from the Lévy measure: truncated drift, band intensities, moments of the
//! truncated measure, and the detection thresholds `u_plus`, `u_tilde_star`,
//! `u_star`.

use crate::error::{Error, Result};
use crate::quad;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::sync::Arc;

/// Relative tolerance used by the threshold solvers.
pub const THRESHOLD_REL_TOL: f64 = 1e-10;
/// Default quadrature tolerances for measure integrals.
const QUAD_REL_TOL: f64 = 1e-11;
const QUAD_ABS_TOL: f64 = 1e-300;

/// `log(e v n)` as used throughout: `max(1, ln n)`.
pub fn log_e_or_n(n: u64) -> f64 {
    (n as f64).ln().max(1.0)
}

/// Band `{x : lower < |x| <= upper}` restricting a measure's support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lower: f64,
    pub upper: f64,
}

impl Band {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower >= 0.0 && upper > lower && upper.is_finite()) {
            return Err(Error::Domain(format!(
                "band: need 0 <= lower < upper, got ({lower}, {upper})"
            )));
        }
        Ok(Band { lower, upper })
    }

    /// Intersection with `(lo, hi]`; `None` when empty.
    fn clamp(&self, lo: f64, hi: f64) -> Option<(f64, f64)> {
        let l = self.lower.max(lo);
        let u = self.upper.min(hi);
        (u > l).then_some((l, u))
    }
}

/// Jump density callable for user-supplied measures, `x != 0`.
pub type DensityFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// How the Lévy measure looks inside its band.
#[derive(Clone)]
pub enum MeasureKind {
    /// `c_plus / x^{1+beta}` on `(0, inf)` and `c_minus / |x|^{1+beta}` on
    /// `(-inf, 0)`, restricted to the band.
    StableType { beta: f64, c_plus: f64, c_minus: f64 },
    /// User density with a power-law hint: `density(x) ~ O(|x|^{-gamma})` as
    /// `x -> 0` with `gamma = singularity_exponent` (use 0 for bounded).
    Density {
        density: DensityFn,
        singularity_exponent: f64,
    },
    /// Finite list of `(location, mass)` atoms.
    FiniteAtoms { atoms: Vec<(f64, f64)> },
}

impl fmt::Debug for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureKind::StableType {
                beta,
                c_plus,
                c_minus,
            } => f
                .debug_struct("StableType")
                .field("beta", beta)
                .field("c_plus", c_plus)
                .field("c_minus", c_minus)
                .finish(),
            MeasureKind::Density {
                singularity_exponent,
                ..
            } => f
                .debug_struct("Density")
                .field("singularity_exponent", singularity_exponent)
                .finish_non_exhaustive(),
            MeasureKind::FiniteAtoms { atoms } => {
                f.debug_struct("FiniteAtoms").field("atoms", atoms).finish()
            }
        }
    }
}

/// A Lévy measure restricted to a band.
#[derive(Debug, Clone)]
pub struct MeasureSpec {
    pub kind: MeasureKind,
    pub band: Band,
}

/// Band mass of a measure: finite value or the infinite-activity marker.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Activity {
    Finite(f64),
    Infinite,
}

impl Activity {
    pub fn is_finite(&self) -> bool {
        matches!(self, Activity::Finite(_))
    }

    /// Finite value, or an error naming the operation.
    pub fn finite(&self, what: &str) -> Result<f64> {
        match self {
            Activity::Finite(v) => Ok(*v),
            Activity::Infinite => Err(Error::Capability(format!(
                "{what}: infinite activity; choose a positive truncation eta"
            ))),
        }
    }

    /// Value as a float with `+inf` for the infinite marker (display only).
    pub fn as_f64(&self) -> f64 {
        match self {
            Activity::Finite(v) => *v,
            Activity::Infinite => f64::INFINITY,
        }
    }
}

impl MeasureSpec {
    pub fn stable(beta: f64, c_plus: f64, c_minus: f64, band: Band) -> Result<Self> {
        if !(0.0 < beta && beta < 2.0) {
            return Err(Error::Domain(format!("beta must lie in (0,2), got {beta}")));
        }
        if c_plus < 0.0 || c_minus < 0.0 || (c_plus == 0.0 && c_minus == 0.0) {
            return Err(Error::Domain(
                "stable coefficients must be nonnegative and not both zero".into(),
            ));
        }
        Ok(MeasureSpec {
            kind: MeasureKind::StableType {
                beta,
                c_plus,
                c_minus,
            },
            band,
        })
    }

    /// Symmetric stable-type measure with `c_plus = c_minus = c`.
    pub fn symmetric_stable(beta: f64, c: f64, band: Band) -> Result<Self> {
        MeasureSpec::stable(beta, c, c, band)
    }

    pub fn density(density: DensityFn, singularity_exponent: f64, band: Band) -> Result<Self> {
        if singularity_exponent >= 3.0 {
            return Err(Error::NonIntegrable(format!(
                "density singularity exponent {singularity_exponent} >= 3 violates x^2 ^ 1 integrability"
            )));
        }
        Ok(MeasureSpec {
            kind: MeasureKind::Density {
                density,
                singularity_exponent,
            },
            band,
        })
    }

    pub fn finite_atoms(atoms: Vec<(f64, f64)>, band: Band) -> Result<Self> {
        for &(x, m) in &atoms {
            if x == 0.0 || !x.is_finite() {
                return Err(Error::Domain(format!("atom location must be nonzero, got {x}")));
            }
            if !(m > 0.0) || !m.is_finite() {
                return Err(Error::Domain(format!("atom mass must be positive, got {m}")));
            }
            if x.abs() <= band.lower || x.abs() > band.upper {
                return Err(Error::Domain(format!(
                    "atom at {x} lies outside the band ({}, {}]",
                    band.lower, band.upper
                )));
            }
        }
        Ok(MeasureSpec {
            kind: MeasureKind::FiniteAtoms { atoms },
            band,
        })
    }

    /// An empty measure (no jumps); the H0 configuration.
    pub fn none() -> Self {
        MeasureSpec {
            kind: MeasureKind::FiniteAtoms { atoms: vec![] },
            band: Band {
                lower: 0.0,
                upper: 1.0,
            },
        }
    }

    /// Whether the measure is symmetric about 0 (used to pick closed forms;
    /// user densities are treated as non-symmetric).
    pub fn is_symmetric(&self) -> bool {
        match &self.kind {
            MeasureKind::StableType {
                c_plus, c_minus, ..
            } => c_plus == c_minus,
            MeasureKind::Density { .. } => false,
            MeasureKind::FiniteAtoms { atoms } => {
                let mut sorted: Vec<(f64, f64)> = atoms.clone();
                sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mut mirrored: Vec<(f64, f64)> = atoms.iter().map(|&(x, m)| (-x, m)).collect();
                mirrored.sort_by(|a, b| a.0.total_cmp(&b.0));
                sorted == mirrored
            }
        }
    }

    /// Mass of the measure on `{x : lo < |x| <= hi}`.
    pub fn mass_on(&self, lo: f64, hi: f64) -> Result<Activity> {
        let Some((l, u)) = self.band.clamp(lo, hi) else {
            return Ok(Activity::Finite(0.0));
        };
        match &self.kind {
            MeasureKind::StableType {
                beta,
                c_plus,
                c_minus,
            } => {
                if l == 0.0 {
                    return Ok(Activity::Infinite);
                }
                let one_side = (l.powf(-beta) - u.powf(-beta)) / beta;
                Ok(Activity::Finite((c_plus + c_minus) * one_side))
            }
            MeasureKind::Density {
                density,
                singularity_exponent,
            } => {
                if l == 0.0 && *singularity_exponent >= 1.0 {
                    return Ok(Activity::Infinite);
                }
                Ok(Activity::Finite(self.integrate_sides(
                    density,
                    *singularity_exponent,
                    0,
                    l,
                    u,
                )?))
            }
            MeasureKind::FiniteAtoms { atoms } => Ok(Activity::Finite(
                atoms
                    .iter()
                    .filter(|(x, _)| x.abs() > l && x.abs() <= u)
                    .map(|(_, m)| m)
                    .sum(),
            )),
        }
    }

    /// Signed moment `\int_{lo < |x| <= hi} x^k nu(dx)`, `k >= 1`.
    ///
    /// For stable-type measures with `k <= beta` this only exists for the
    /// symmetric combination; the one-sided divergence is rejected.
    pub fn moment_on(&self, k: u32, lo: f64, hi: f64) -> Result<f64> {
        assert!(k >= 1);
        let Some((l, u)) = self.band.clamp(lo, hi) else {
            return Ok(0.0);
        };
        match &self.kind {
            MeasureKind::StableType {
                beta,
                c_plus,
                c_minus,
            } => {
                let kf = k as f64;
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                let coeff = c_plus + sign * c_minus;
                if kf <= *beta && l == 0.0 {
                    if coeff == 0.0 {
                        // symmetric cancellation: the signed integral is 0
                        return Ok(0.0);
                    }
                    return Err(Error::NonIntegrable(format!(
                        "one-sided moment of order {k} diverges at 0 for beta = {beta}"
                    )));
                }
                let one_side = if (kf - beta).abs() < 1e-14 {
                    (u / l).ln()
                } else {
                    (u.powf(kf - beta) - l.powf(kf - beta)) / (kf - beta)
                };
                Ok(coeff * one_side)
            }
            MeasureKind::Density {
                density,
                singularity_exponent,
            } => self.integrate_sides(density, *singularity_exponent, k, l, u),
            MeasureKind::FiniteAtoms { atoms } => Ok(atoms
                .iter()
                .filter(|(x, _)| x.abs() > l && x.abs() <= u)
                .map(|(x, m)| x.powi(k as i32) * m)
                .sum()),
        }
    }

    /// `\int_{l<|x|<=u} x^k dens(x) dx` by adaptive quadrature, splitting the
    /// two sides and substituting the origin singularity away when `l = 0`.
    fn integrate_sides(
        &self,
        density: &DensityFn,
        gamma: f64,
        k: u32,
        l: f64,
        u: f64,
    ) -> Result<f64> {
        let mut total = 0.0;
        for side in [1.0f64, -1.0f64] {
            let d = Arc::clone(density);
            let f = move |x: f64| {
                let xs = side * x;
                xs.powi(k as i32) * d(xs) * side.abs()
            };
            let value = if l == 0.0 {
                // x = t^p maps the leading x^{k - gamma} behaviour to ~ t
                let p = 2.0 / (k as f64 - gamma + 1.0);
                if p <= 0.0 {
                    return Err(Error::NonIntegrable(format!(
                        "moment of order {k} diverges at 0 (singularity exponent {gamma})"
                    )));
                }
                let g = move |t: f64| {
                    if t <= 0.0 {
                        return 0.0;
                    }
                    let x = t.powf(p);
                    f(x) * p * t.powf(p - 1.0)
                };
                quad::integrate(g, 0.0, u.powf(1.0 / p), QUAD_REL_TOL, QUAD_ABS_TOL)?.value
            } else {
                quad::integrate(f, l, u, QUAD_REL_TOL, QUAD_ABS_TOL)?.value
            };
            total += value;
        }
        Ok(total)
    }

    /// Check `\int (x^2 ^ 1) nu(dx) < inf` (numerically for density specs).
    pub fn check_integrability(&self) -> Result<()> {
        match &self.kind {
            MeasureKind::StableType { .. } => Ok(()), // beta in (0,2) guarantees it
            MeasureKind::FiniteAtoms { .. } => Ok(()),
            MeasureKind::Density { .. } => {
                let hi = self.band.upper.min(1.0);
                let second = self.moment_on(2, 0.0, hi)?;
                if !second.is_finite() {
                    return Err(Error::NonIntegrable(
                        "second moment of the density near 0 is not finite".into(),
                    ));
                }
                if self.band.upper > 1.0 {
                    self.mass_on(1.0, self.band.upper)?
                        .finite("tail mass of density spec")?;
                }
                Ok(())
            }
        }
    }
}

// Declarative JSON record: {kind, beta, c_plus, c_minus, atoms, band}.
#[derive(Serialize, Deserialize)]
struct MeasureRecord {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c_plus: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c_minus: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    atoms: Option<Vec<(f64, f64)>>,
    band: (f64, f64),
}

impl Serialize for MeasureSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let band = (self.band.lower, self.band.upper);
        let rec = match &self.kind {
            MeasureKind::StableType {
                beta,
                c_plus,
                c_minus,
            } => MeasureRecord {
                kind: "stable".into(),
                beta: Some(*beta),
                c_plus: Some(*c_plus),
                c_minus: Some(*c_minus),
                atoms: None,
                band,
            },
            MeasureKind::FiniteAtoms { atoms } => MeasureRecord {
                kind: "atoms".into(),
                beta: None,
                c_plus: None,
                c_minus: None,
                atoms: Some(atoms.clone()),
                band,
            },
            MeasureKind::Density { .. } => {
                return Err(serde::ser::Error::custom(
                    "density measure specs have no declarative form",
                ))
            }
        };
        rec.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MeasureSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rec = MeasureRecord::deserialize(deserializer)?;
        let band = Band::new(rec.band.0, rec.band.1).map_err(D::Error::custom)?;
        match rec.kind.as_str() {
            "stable" => {
                let beta = rec
                    .beta
                    .ok_or_else(|| D::Error::custom("measure.beta: missing for kind=stable"))?;
                let c_plus = rec.c_plus.unwrap_or(1.0);
                let c_minus = rec.c_minus.unwrap_or(c_plus);
                MeasureSpec::stable(beta, c_plus, c_minus, band)
                    .map_err(|e| D::Error::custom(format!("measure.beta: {e}")))
            }
            "atoms" => {
                let atoms = rec
                    .atoms
                    .ok_or_else(|| D::Error::custom("measure.atoms: missing for kind=atoms"))?;
                MeasureSpec::finite_atoms(atoms, band)
                    .map_err(|e| D::Error::custom(format!("measure.atoms: {e}")))
            }
            other => Err(D::Error::custom(format!(
                "measure.kind: unknown kind '{other}' (expected 'stable' or 'atoms')"
            ))),
        }
    }
}

/// Full process description `(b, Sigma^2, nu)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevyTriplet {
    /// Drift per unit time.
    pub b: f64,
    /// Gaussian variance per unit time (`Sigma^2`).
    pub sigma_sq: f64,
    pub measure: MeasureSpec,
}

impl LevyTriplet {
    pub fn new(b: f64, sigma_sq: f64, measure: MeasureSpec) -> Result<Self> {
        if !(sigma_sq >= 0.0) || !sigma_sq.is_finite() {
            return Err(Error::Domain(format!(
                "sigma_sq must be a finite nonnegative real, got {sigma_sq}"
            )));
        }
        measure.check_integrability()?;
        Ok(LevyTriplet {
            b,
            sigma_sq,
            measure,
        })
    }
}

/// Moments of the measure restricted to `{eta < |x| <= epsilon}`, plus the
/// truncated drift of the carrying triplet.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentTable {
    pub epsilon: f64,
    pub eta: f64,
    /// `b(epsilon)` of the triplet the table was computed from.
    pub drift_beps: f64,
    /// `lambda_{eta, epsilon}` (infinite only when `eta = 0` with an
    /// infinite-activity measure).
    pub lambda: Activity,
    /// `sigma^2(eta, epsilon)`.
    pub sigma2: f64,
    /// `mu_3 .. mu_8` of the restricted measure.
    pub mu: [f64; 6],
}

impl MomentTable {
    pub fn mu_k(&self, k: u32) -> f64 {
        assert!((3..=8).contains(&k));
        self.mu[(k - 3) as usize]
    }

    fn validate(&self) -> Result<()> {
        let eps = self.epsilon;
        let tol = 1e-9 * (1.0 + self.sigma2);
        let checks = [
            ("sigma2 >= 0", self.sigma2 >= -tol),
            ("mu4 >= 0", self.mu_k(4) >= -tol),
            ("mu6 >= 0", self.mu_k(6) >= -tol),
            ("mu8 >= 0", self.mu_k(8) >= -tol),
            (
                "|mu3| <= eps sigma2",
                self.mu_k(3).abs() <= eps * self.sigma2 * (1.0 + 1e-9) + tol,
            ),
            (
                "mu4 <= eps^2 sigma2",
                self.mu_k(4) <= eps * eps * self.sigma2 * (1.0 + 1e-9) + tol,
            ),
            (
                "mu6 <= eps^2 mu4",
                self.mu_k(6) <= eps * eps * self.mu_k(4) * (1.0 + 1e-9) + tol,
            ),
            (
                "mu8 <= eps^4 mu4",
                self.mu_k(8) <= eps.powi(4) * self.mu_k(4) * (1.0 + 1e-9) + tol,
            ),
        ];
        for (name, ok) in checks {
            if !ok {
                return Err(Error::Numeric(format!(
                    "moment table violates '{name}' beyond numerical tolerance"
                )));
            }
        }
        Ok(())
    }
}

/// Jump-size thresholds separating Gaussian-absorbable from detectable jumps.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ThresholdSet {
    /// Largest `u` with `lambda_{u,eps} n Delta >= log(e v n)`.
    pub u_plus: f64,
    /// `sup{u in [u_plus, eps] : u <= c_tilde sqrt((sigma^2(u)+Sigma^2) Delta / log(e v n))} v u_plus`.
    pub u_tilde_star: f64,
    /// Same with the `sqrt(Delta (Sigma^2+sigma^2(u))) log(e v n)^2` ceiling.
    pub u_star: f64,
    pub c_tilde: f64,
    pub n: u64,
    pub delta: f64,
}

/// Truncated drift `b(epsilon)`: the drift after re-truncating the
/// compensator at level `epsilon`.
pub fn drift_beps(triplet: &LevyTriplet, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")));
    }
    let correction = if epsilon <= 1.0 {
        -triplet.measure.moment_on(1, epsilon, 1.0)?
    } else {
        triplet.measure.moment_on(1, 1.0, epsilon)?
    };
    Ok(triplet.b + correction)
}

/// Band intensity `lambda_{eta, epsilon}`.
pub fn intensity(measure: &MeasureSpec, eta: f64, epsilon: f64) -> Result<Activity> {
    if !(eta >= 0.0 && epsilon > eta) {
        return Err(Error::Domain(format!(
            "need 0 <= eta < epsilon, got eta = {eta}, epsilon = {epsilon}"
        )));
    }
    measure.mass_on(eta, epsilon)
}

/// All moments of the measure restricted to `{eta < |x| <= epsilon}`.
pub fn moment_table(triplet: &LevyTriplet, eta: f64, epsilon: f64) -> Result<MomentTable> {
    if !(eta >= 0.0 && epsilon > eta) {
        return Err(Error::Domain(format!(
            "need 0 <= eta < epsilon, got eta = {eta}, epsilon = {epsilon}"
        )));
    }
    let lambda = intensity(&triplet.measure, eta, epsilon)?;
    let sigma2 = triplet.measure.moment_on(2, eta, epsilon)?;
    let mut mu = [0.0; 6];
    for k in 3..=8 {
        mu[(k - 3) as usize] = triplet.measure.moment_on(k, eta, epsilon)?;
    }
    let table = MomentTable {
        epsilon,
        eta,
        drift_beps: drift_beps(triplet, epsilon)?,
        lambda,
        sigma2,
        mu,
    };
    table.validate()?;
    Ok(table)
}

/// `sigma^2(u)` of the measure restricted below `u` (from 0).
fn sigma2_below(measure: &MeasureSpec, u: f64) -> Result<f64> {
    measure.moment_on(2, 0.0, u)
}

fn lambda_band(measure: &MeasureSpec, u: f64, epsilon: f64) -> Result<f64> {
    if u >= epsilon {
        return Ok(0.0);
    }
    match measure.mass_on(u, epsilon)? {
        Activity::Finite(v) => Ok(v),
        Activity::Infinite => Ok(f64::INFINITY), // only reachable at u = 0
    }
}

/// Solve for the thresholds `u_plus`, `u_tilde_star`, `u_star`.
///
/// `u_plus` is found by monotone bisection on
/// `u -> lambda_{u,eps} n Delta - log(e v n)` (closed form for stable-type
/// measures); the feasible sets for the starred thresholds may be
/// disconnected since `sigma^2(u)` varies, so a 1024-point log-spaced scan
/// locates the last feasible point before bisection refines it.
pub fn thresholds(
    triplet: &LevyTriplet,
    epsilon: f64,
    n: u64,
    delta: f64,
    c_tilde: f64,
) -> Result<ThresholdSet> {
    if !(epsilon > 0.0 && delta > 0.0 && n >= 1) {
        return Err(Error::Domain("thresholds: need epsilon > 0, delta > 0, n >= 1".into()));
    }
    if !(c_tilde > 0.0 && c_tilde <= 1.0) {
        return Err(Error::Domain(format!("c_tilde must lie in (0,1], got {c_tilde}")));
    }
    let target = log_e_or_n(n);
    let nd = n as f64 * delta;
    let measure = &triplet.measure;

    // feasibility: lambda_{0,eps} n Delta >= log(e v n)
    match measure.mass_on(0.0, epsilon)? {
        Activity::Infinite => {}
        Activity::Finite(total) => {
            if total * nd < target {
                return Err(Error::Infeasible(format!(
                    "u_plus does not exist: lambda_{{0,eps}} n Delta = {:.6e} < log(e v n) = {:.6e}",
                    total * nd,
                    target
                )));
            }
        }
    }

    let u_plus = match &measure.kind {
        MeasureKind::StableType {
            beta,
            c_plus,
            c_minus,
        } if measure.band.lower == 0.0 && measure.band.upper >= epsilon => {
            // (c+ + c-) (u^-beta - eps^-beta)/beta * n Delta = target
            let c = c_plus + c_minus;
            let rhs = target * beta / (c * nd) + epsilon.powf(-beta);
            rhs.powf(-1.0 / beta)
        }
        _ => {
            // bisection: g(u) = lambda_{u,eps} n Delta - target, non-increasing in u
            let g = |u: f64| -> Result<f64> { Ok(lambda_band(measure, u, epsilon)? * nd - target) };
            let mut lo = 0.0;
            let mut hi = epsilon;
            // g(lo) >= 0 by the feasibility check; g(eps) = -target < 0
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if g(mid)? >= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= THRESHOLD_REL_TOL * hi {
                    break;
                }
            }
            lo
        }
    };
    let u_plus = u_plus.min(epsilon);

    let ssq = triplet.sigma_sq;
    let ceil_tilde = |u: f64| -> Result<f64> {
        Ok(c_tilde * ((sigma2_below(measure, u)? + ssq) * delta / target).sqrt())
    };
    let ceil_star =
        |u: f64| -> Result<f64> { Ok(((ssq + sigma2_below(measure, u)?) * delta).sqrt() * target * target) };

    let u_tilde_star = sup_feasible(u_plus, epsilon, &ceil_tilde)?;
    let u_star = sup_feasible(u_plus, epsilon, &ceil_star)?;

    Ok(ThresholdSet {
        u_plus,
        u_tilde_star,
        u_star,
        c_tilde,
        n,
        delta,
    })
}

/// Largest `u` in `[u_plus, eps]` with `u <= ceiling(u)`, floored at `u_plus`.
fn sup_feasible<F: Fn(f64) -> Result<f64>>(u_plus: f64, epsilon: f64, ceiling: &F) -> Result<f64> {
    let feasible = |u: f64| -> Result<bool> { Ok(u <= ceiling(u)?) };
    if feasible(epsilon)? {
        return Ok(epsilon);
    }
    // log-spaced scan from u_plus to epsilon; the feasible set may be
    // disconnected, so locate the highest feasible grid point first
    const GRID: usize = 1024;
    let lo_log = u_plus.max(1e-300).ln();
    let hi_log = epsilon.ln();
    let grid_pt = |i: usize| (lo_log + (hi_log - lo_log) * i as f64 / GRID as f64).exp();
    let mut highest: Option<usize> = None;
    for i in (0..=GRID).rev() {
        if feasible(grid_pt(i))? {
            highest = Some(i);
            break;
        }
    }
    let Some(i) = highest else {
        return Ok(u_plus); // sup of the empty set, floored at u_plus
    };
    // refine the boundary between grid_pt(i) (feasible) and the next point up
    let mut lo = grid_pt(i);
    let mut hi = if i == GRID { epsilon } else { grid_pt(i + 1) };
    for _ in 0..200 {
        if hi - lo <= THRESHOLD_REL_TOL * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo.max(u_plus))
}
