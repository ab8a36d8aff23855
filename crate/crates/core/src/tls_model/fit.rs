//! Maximum-likelihood fitting over the unconstrained triple `(mu, ln sigma, ln nu)`.

use super::{nll_unchecked, TlsError, TlsParams};
use crate::optimizer::{nelder_mead, SimplexConfig};

/// Smallest sample a three-parameter fit is attempted on.
pub const MIN_FIT_SAMPLES: usize = 8;

/// Shape values above this are numerically indistinguishable from the normal limit.
pub const NU_CAP: f64 = 1e6;

const MAD_TO_SIGMA: f64 = 1.4826;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub simplex: SimplexConfig,
    pub nu_cap: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            simplex: SimplexConfig::default(),
            nu_cap: NU_CAP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitReport {
    pub params: TlsParams,
    pub neg_log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn median_of(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

fn sorted_copy(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Robust starting point: median, scaled MAD, and a kurtosis-matched shape.
///
/// `nu0` defaults to 3; when the sample excess kurtosis `k` exceeds 0.1 it is
/// matched as `4 + 6 / k`. Either way it is clamped to `[0.6, 100]`.
pub fn initial_guess(samples: &[f64]) -> TlsParams {
    let sorted = sorted_copy(samples);
    let med = median_of(&sorted);
    let deviations = sorted_copy(&samples.iter().map(|x| (x - med).abs()).collect::<Vec<_>>());
    let mut sigma = MAD_TO_SIGMA * median_of(&deviations);

    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let (m2, m4) = samples.iter().fold((0.0, 0.0), |(m2, m4), x| {
        let d2 = (x - mean).powi(2);
        (m2 + d2, m4 + d2 * d2)
    });
    let (m2, m4) = (m2 / n, m4 / n);
    if !(sigma > 0.0) {
        // More than half the sample sits on one value.
        sigma = m2.sqrt();
    }
    let excess_kurtosis = if m2 > 0.0 { m4 / (m2 * m2) - 3.0 } else { 0.0 };
    let nu = if excess_kurtosis > 0.1 {
        4.0 + 6.0 / excess_kurtosis
    } else {
        3.0
    };
    TlsParams {
        mu: med,
        sigma,
        nu: nu.clamp(0.6, 100.0),
    }
}

fn check_sample(samples: &[f64]) -> Result<(), TlsError> {
    if samples.is_empty() {
        return Err(TlsError::EmptySample);
    }
    if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
        return Err(TlsError::NonFiniteSample(i));
    }
    if samples.len() < MIN_FIT_SAMPLES {
        return Err(TlsError::TooFewSamples(samples.len()));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let med = median_of(&sorted_copy(samples));
    if var.sqrt() < 1e-12 * med.abs().max(1.0) {
        return Err(TlsError::DegenerateSample);
    }
    Ok(())
}

/// Maps an unconstrained point back to parameters; `nu` is capped.
fn unpack(point: &[f64], nu_cap: f64) -> (f64, f64, f64) {
    (point[0], point[1].exp(), point[2].exp().min(nu_cap))
}

/// Fit `(mu, sigma, nu)` by minimizing the negative log-likelihood with the simplex search.
///
/// On hitting the iteration cap the best point found so far is returned
/// inside [`TlsError::NotConverged`].
pub fn fit_mle(samples: &[f64], config: &FitConfig) -> Result<FitReport, TlsError> {
    check_sample(samples)?;
    let start = initial_guess(samples);
    let x0 = [start.mu, start.sigma.ln(), start.nu.ln()];
    let nu_cap = config.nu_cap;

    let objective = |point: &[f64]| {
        let (mu, sigma, nu) = unpack(point, nu_cap);
        if !(sigma > 0.0 && sigma.is_finite() && nu > 0.0) {
            return f64::INFINITY;
        }
        nll_unchecked(samples, mu, sigma, nu)
    };
    let result = nelder_mead(objective, &x0, &config.simplex)?;
    let (mu, sigma, nu) = unpack(&result.x_min, nu_cap);
    let report = FitReport {
        params: TlsParams { mu, sigma, nu },
        neg_log_likelihood: result.f_min,
        iterations: result.iterations,
        converged: result.converged,
    };
    if report.converged {
        Ok(report)
    } else {
        Err(TlsError::NotConverged(Box::new(report)))
    }
}
