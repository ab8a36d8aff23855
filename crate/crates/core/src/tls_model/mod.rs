//! The t-location-scale distribution: density, likelihood, fitting and sampling.
//!
//! The density is the Student's t density with `nu` degrees of freedom,
//! translated by `mu` and rescaled by `sigma`:
//!
//! ```text
//! f(x | mu, sigma, nu) = Gamma((nu + 1) / 2) / (sigma sqrt(nu pi) Gamma(nu / 2))
//!                        * ((nu + ((x - mu) / sigma)^2) / nu)^(-(nu + 1) / 2)
//! ```
//!
//! Everything is evaluated in log space so that neither very large `nu` nor
//! far-tail arguments overflow.

mod fit;
pub mod gamma;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use thiserror::Error;

use crate::optimizer::OptimizeError;

pub use fit::{fit_mle, initial_guess, FitConfig, FitReport, MIN_FIT_SAMPLES, NU_CAP};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TlsError {
    #[error("invalid t-location-scale parameters (mu={mu}, sigma={sigma}, nu={nu})")]
    InvalidParams { mu: f64, sigma: f64, nu: f64 },
    #[error("sample is empty")]
    EmptySample,
    #[error("sample has {0} points; at least {MIN_FIT_SAMPLES} are needed for a fit")]
    TooFewSamples(usize),
    #[error("sample contains a non-finite value at index {0}")]
    NonFiniteSample(usize),
    #[error("sample has zero spread; the scale estimate collapses to 0")]
    DegenerateSample,
    #[error("simplex search did not converge after {} iterations", .0.iterations)]
    NotConverged(Box<FitReport>),
    #[error("sample count must be at least 1")]
    ZeroCount,
    #[error(transparent)]
    Optimizer(#[from] OptimizeError),
}

/// Location, scale and shape of a t-location-scale distribution.
///
/// Also used as the three-dimensional feature vector of a segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TlsParams {
    pub mu: f64,
    pub sigma: f64,
    pub nu: f64,
}

impl TlsParams {
    pub fn new(mu: f64, sigma: f64, nu: f64) -> Result<Self, TlsError> {
        let p = Self { mu, sigma, nu };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), TlsError> {
        let ok = self.mu.is_finite()
            && self.sigma.is_finite()
            && self.nu.is_finite()
            && self.sigma > 0.0
            && self.nu > 0.0;
        if ok {
            Ok(())
        } else {
            Err(TlsError::InvalidParams {
                mu: self.mu,
                sigma: self.sigma,
                nu: self.nu,
            })
        }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.mu, self.sigma, self.nu]
    }

    pub fn from_array([mu, sigma, nu]: [f64; 3]) -> Self {
        Self { mu, sigma, nu }
    }
}

/// `ln(1 + t^2)` without overflowing for huge `|t|`.
fn ln1p_sq(t: f64) -> f64 {
    let t = t.abs();
    if t > 1e100 {
        2.0 * t.ln() + (1.0 / t).powi(2).ln_1p()
    } else {
        (t * t).ln_1p()
    }
}

/// Log normalizing constant `ln Gamma((nu+1)/2) - ln Gamma(nu/2) - ln sigma - ln(nu pi)/2`.
fn log_norm(sigma: f64, nu: f64) -> f64 {
    gamma::ln_gamma_half_ratio(0.5 * nu) - sigma.ln() - 0.5 * (nu * PI).ln()
}

#[inline]
fn log_pdf_unchecked(x: f64, mu: f64, sigma: f64, nu: f64, norm: f64) -> f64 {
    let z = (x - mu) / sigma;
    norm - 0.5 * (nu + 1.0) * ln1p_sq(z / nu.sqrt())
}

pub fn tls_log_pdf(x: f64, params: &TlsParams) -> Result<f64, TlsError> {
    params.validate()?;
    let TlsParams { mu, sigma, nu } = *params;
    Ok(log_pdf_unchecked(x, mu, sigma, nu, log_norm(sigma, nu)))
}

pub fn tls_pdf(x: f64, params: &TlsParams) -> Result<f64, TlsError> {
    tls_log_pdf(x, params).map(f64::exp)
}

/// `-sum ln f(x_i | params)`.
pub fn neg_log_likelihood(samples: &[f64], params: &TlsParams) -> Result<f64, TlsError> {
    if samples.is_empty() {
        return Err(TlsError::EmptySample);
    }
    params.validate()?;
    Ok(nll_unchecked(samples, params.mu, params.sigma, params.nu))
}

pub(crate) fn nll_unchecked(samples: &[f64], mu: f64, sigma: f64, nu: f64) -> f64 {
    let norm = log_norm(sigma, nu);
    let half = 0.5 * (nu + 1.0);
    let inv_sigma_sqrt_nu = 1.0 / (sigma * nu.sqrt());
    let tail: f64 = samples
        .iter()
        .map(|&x| ln1p_sq((x - mu) * inv_sigma_sqrt_nu))
        .sum();
    half * tail - samples.len() as f64 * norm
}

/// Deterministic generator for a `(seed, stream)` pair: ChaCha8 keyed by
/// `seed` (through `seed_from_u64`), with `stream` selecting an independent
/// keystream. Distinct streams of one seed never overlap.
pub fn generator(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draw `count` values `mu + sigma * Z / sqrt(V / nu)` with `Z ~ N(0, 1)` and
/// `V ~ chi-square(nu)`, from stream 0 of [`generator`]`(seed, 0)`.
pub fn tls_sample(params: &TlsParams, count: usize, seed: u64) -> Result<Vec<f64>, TlsError> {
    if count == 0 {
        return Err(TlsError::ZeroCount);
    }
    let mut rng = generator(seed, 0);
    tls_sample_with(params, count, &mut rng)
}

/// Same draw as [`tls_sample`] but from a caller-supplied generator.
pub fn tls_sample_with<R: Rng + ?Sized>(
    params: &TlsParams,
    count: usize,
    rng: &mut R,
) -> Result<Vec<f64>, TlsError> {
    params.validate()?;
    let chi2 = ChiSquared::new(params.nu).map_err(|_| TlsError::InvalidParams {
        mu: params.mu,
        sigma: params.sigma,
        nu: params.nu,
    })?;
    Ok((0..count)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            let v = chi2.sample(rng);
            params.mu + params.sigma * z / (v / params.nu).sqrt()
        })
        .collect())
}
