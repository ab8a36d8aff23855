mod common;

use common::{grid_argmin, integrate, integrate_pieces, linspace, standard_normal_pdf};
use proptest::prelude::*;
use rand_distr::{Distribution, StandardNormal};
use spikewave::tls_model::{
    fit_mle, generator, neg_log_likelihood, tls_log_pdf, tls_pdf, tls_sample, FitConfig, TlsParams,
};

fn p(mu: f64, sigma: f64, nu: f64) -> TlsParams {
    TlsParams::new(mu, sigma, nu).unwrap()
}

/// Mass of the whole real line: finite range directly, tails after x = mu +- e^s.
fn total_mass(params: &TlsParams, half_width: f64) -> f64 {
    let f = |x: f64| tls_pdf(x, params).unwrap();
    let inner = integrate_pieces(&f, params.mu - half_width, params.mu + half_width, 64, 1e-12);
    let tail = |s: f64| {
        let x = params.mu + s.exp();
        (tls_log_pdf(x, params).unwrap() + s).exp()
    };
    let lo = half_width.ln();
    let right = integrate_pieces(&tail, lo, lo + 200.0, 64, 1e-13);
    inner + 2.0 * right
}

#[test]
fn density_integrates_to_one_over_the_real_line() {
    for nu in [0.5, 1.0, 2.0, 5.0, 30.0] {
        for (mu, sigma) in [(0.0, 1.0), (3.5, 0.25), (-40.0, 20.0)] {
            let params = p(mu, sigma, nu);
            let width = 60.0 * sigma * nu.sqrt().max(1.0);
            let mass = total_mass(&params, width);
            assert!((mass - 1.0).abs() < 1e-6, "nu={nu} mu={mu} sigma={sigma}: {mass}");
        }
    }
}

#[test]
fn light_tailed_mass_is_inside_sixty_scales() {
    for nu in [5.0, 30.0] {
        let params = p(0.0, 1.0, nu);
        let width = 60.0 * nu.sqrt();
        let f = |x: f64| tls_pdf(x, &params).unwrap();
        let mass = integrate_pieces(&f, -width, width, 64, 1e-12);
        assert!((mass - 1.0).abs() < 1e-6, "nu={nu}: {mass}");
    }
}

#[test]
fn cauchy_case_matches_closed_form() {
    for &(mu, sigma) in &[(0.0, 1.0), (2.0, 0.5), (-7.0, 13.0)] {
        for i in -40..=40 {
            let x = mu + 0.37 * i as f64 * sigma;
            let z = (x - mu) / sigma;
            let expected = 1.0 / (std::f64::consts::PI * sigma * (1.0 + z * z));
            let got = tls_pdf(x, &p(mu, sigma, 1.0)).unwrap();
            assert!(((got - expected) / expected).abs() < 1e-12, "x={x}");
        }
    }
}

#[test]
fn normal_limit() {
    let params = p(0.0, 1.0, 1e6);
    for i in 0..=1000 {
        let x = -5.0 + 0.01 * i as f64;
        let diff = (tls_pdf(x, &params).unwrap() - standard_normal_pdf(x)).abs();
        assert!(diff < 1e-5, "x={x}: {diff}");
    }
}

#[test]
fn far_tail_stays_finite() {
    for z in [1e10, 1e50, 1e100, 1e150] {
        for nu in [0.5, 3.0, 1e6] {
            let l = tls_log_pdf(z, &p(0.0, 1.0, nu)).unwrap();
            assert!(l.is_finite(), "z={z} nu={nu}");
        }
    }
    // For z >> sqrt(nu): ln f ~ C - (nu + 1)/2 ln(z^2 / nu).
    let nu: f64 = 3.0;
    let c = tls_log_pdf(0.0, &p(0.0, 1.0, nu)).unwrap();
    let z: f64 = 1e100;
    let asymptote = c - 0.5 * (nu + 1.0) * (z * z / nu).ln();
    let l = tls_log_pdf(z, &p(0.0, 1.0, nu)).unwrap();
    assert!((l - asymptote).abs() < 1e-9);
}

proptest! {
    #[test]
    fn location_scale_equivariance(
        x in -1e3f64..1e3, mu in -100f64..100.0, sigma in 1e-3f64..1e3, nu in 0.2f64..1e4
    ) {
        let direct = tls_pdf(x, &p(mu, sigma, nu)).unwrap();
        let standard = tls_pdf((x - mu) / sigma, &p(0.0, 1.0, nu)).unwrap() / sigma;
        prop_assume!(standard > 1e-300);
        prop_assert!(((direct - standard) / standard).abs() < 1e-12);
    }

    #[test]
    fn symmetric_about_location(d in 0f64..1e4, mu in -50f64..50.0, sigma in 0.01f64..100.0, nu in 0.1f64..1e5) {
        let params = p(mu, sigma, nu);
        let a = tls_pdf(mu + d, &params).unwrap();
        let b = tls_pdf(mu - d, &params).unwrap();
        // mu + d and mu - d round differently; allow for that input error.
        prop_assert!(a == b || ((a - b) / a).abs() < 1e-11);
    }

    #[test]
    fn log_and_linear_agree(x in -1e3f64..1e3, mu in -10f64..10.0, sigma in 0.1f64..10.0, nu in 0.3f64..1e3) {
        let params = p(mu, sigma, nu);
        let l = tls_log_pdf(x, &params).unwrap();
        let d = tls_pdf(x, &params).unwrap();
        prop_assume!(d > 1e-300);
        prop_assert!(((l.exp() - d) / d).abs() < 1e-12);
    }
}

fn central_gradient(xs: &[f64], point: [f64; 3]) -> [f64; 3] {
    let nll = |q: [f64; 3]| neg_log_likelihood(xs, &p(q[0], q[1].exp(), q[2].exp())).unwrap();
    let mut g = [0.0; 3];
    for i in 0..3 {
        let h = 1e-5 * point[i].abs().max(1.0);
        let mut up = point;
        let mut down = point;
        up[i] += h;
        down[i] -= h;
        g[i] = (nll(up) - nll(down)) / (2.0 * h);
    }
    g
}

#[test]
fn recovers_known_parameters_and_agrees_with_grid_search() {
    let xs = tls_sample(&p(2.0, 0.5, 4.0), 10_000, 20240601).unwrap();
    let fit = fit_mle(&xs, &FitConfig::default()).unwrap();
    let est = fit.params;
    assert!((1.9..=2.1).contains(&est.mu), "{est:?}");
    assert!((0.45..=0.55).contains(&est.sigma), "{est:?}");
    assert!((3.0..=5.5).contains(&est.nu), "{est:?}");

    let nll = |mu: f64, sigma: f64, nu: f64| neg_log_likelihood(&xs, &p(mu, sigma, nu)).unwrap();
    let mus = linspace(1.8, 2.2, 21);
    let sigmas = linspace(0.4, 0.6, 21);
    let nus = linspace(2.5, 7.0, 19);
    let (grid_best, grid_value) = grid_argmin(&nll, &mus, &sigmas, &nus);
    assert!(fit.neg_log_likelihood <= grid_value + 1e-9);
    assert!((grid_best[0] - est.mu).abs() <= 0.02 + 1e-9, "{grid_best:?} vs {est:?}");
    assert!((grid_best[1] - est.sigma).abs() <= 0.01 + 1e-9, "{grid_best:?} vs {est:?}");
    assert!((grid_best[2] - est.nu).abs() <= 0.25 + 1e-9, "{grid_best:?} vs {est:?}");

    let g = central_gradient(&xs, [est.mu, est.sigma.ln(), est.nu.ln()]);
    let scale = fit.neg_log_likelihood.abs().max(1.0);
    assert!(g.iter().all(|c| c.abs() < 1e-3 * scale), "{g:?}");
}

#[test]
fn normal_sample_fits_large_shape() {
    let mut rng = generator(5150, 0);
    let xs: Vec<f64> = (0..10_000).map(|_| StandardNormal.sample(&mut rng)).collect();
    let fit = fit_mle(&xs, &FitConfig::default()).unwrap();
    let est = fit.params;
    assert!(est.nu >= 20.0, "{est:?}");
    assert!(est.mu.abs() < 0.1 && (est.sigma - 1.0).abs() < 0.1, "{est:?}");

    let nll = |mu: f64, sigma: f64, nu: f64| neg_log_likelihood(&xs, &p(mu, sigma, nu)).unwrap();
    let nus: Vec<f64> = (0..=30).map(|i| 10f64.powf(i as f64 * 0.2)).collect();
    let (grid_best, grid_value) =
        grid_argmin(&nll, &linspace(-0.1, 0.1, 11), &linspace(0.9, 1.1, 11), &nus);
    assert!(grid_best[2] >= 20.0, "{grid_best:?}");
    assert!(fit.neg_log_likelihood <= grid_value + 1e-9);
}

#[test]
fn fit_is_affine_equivariant() {
    let xs = tls_sample(&p(-1.0, 2.0, 3.0), 3_000, 99).unwrap();
    let base = fit_mle(&xs, &FitConfig::default()).unwrap().params;
    for &(a, b) in &[(3.0, -7.0), (0.01, 100.0), (250.0, 0.0)] {
        let ys: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
        let t = fit_mle(&ys, &FitConfig::default()).unwrap().params;
        assert!((t.mu - (a * base.mu + b)).abs() < 1e-4 * a, "a={a} b={b}: {t:?} vs {base:?}");
        assert!((t.sigma / (a * base.sigma) - 1.0).abs() < 1e-4, "a={a}: {t:?} vs {base:?}");
        assert!((t.nu / base.nu - 1.0).abs() < 1e-3, "a={a}: {t:?} vs {base:?}");
    }
}

#[test]
fn quadrature_helper_sanity() {
    let v = integrate(&|x: f64| x * x, 0.0, 3.0, 1e-12);
    assert!((v - 9.0).abs() < 1e-10);
}
