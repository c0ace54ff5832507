//! Quantifies when the small jumps of a discretely observed Lévy process are
//! statistically indistinguishable from Gaussian noise.
//!
//! The crate is organized around five layers:
//!
//! - [`levy_model`]: process and measure descriptions plus every deterministic
//!   quantity derived from the Lévy measure (truncated drift, band intensities,
//!   moments, detection thresholds).
//! - [`sampler`]: reproducible seeded simulation of increment batches for the
//!   three Lévy-Itô components (Gaussian part, compound-Poisson approximation
//!   of the small-jump martingale, big-jump compound Poisson).
//! - [`spectral`]: Lévy–Khintchine characteristic function evaluation, FFT
//!   density inversion, and a numerical total-variation oracle against the
//!   moment-matched Gaussian.
//! - [`bounds`]: closed-form upper and lower bounds on the total variation
//!   distance between increment samples and Gaussian vectors, plus the
//!   two-process combined bound and auxiliary TV lemmas.
//! - [`jumptest`]: the test battery for H0 "no jumps below epsilon" built from
//!   raw increments, with Monte Carlo calibration of the threshold constants
//!   and a level/power harness.

pub mod bounds;
pub mod error;
pub mod jumptest;
pub mod levy_model;
pub mod quad;
pub mod rng;
pub mod sampler;
pub mod spectral;

pub use error::{Error, Result};
pub use levy_model::{Activity, Band, LevyTriplet, MeasureSpec, MomentTable, ThresholdSet};
pub use sampler::{ComponentMask, IncrementBatch};
