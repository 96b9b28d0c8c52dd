mod common;

use common::{gauss_hermite, ngmi_quadrature, pam_levels, variance_for};
use pcs_imdd::metrics::ngmi_estimate;
use pcs_imdd::source::{Family, PamAlphabet, ShapedSource};

#[test]
fn hermite_rule_integrates_moments() {
    let (t, w) = gauss_hermite(64);
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let m0: f64 = w.iter().sum();
    let m2: f64 = t.iter().zip(&w).map(|(t, w)| w * t * t).sum();
    let m4: f64 = t.iter().zip(&w).map(|(t, w)| w * t.powi(4)).sum();
    assert!((m0 - sqrt_pi).abs() < 1e-12);
    assert!((m2 - sqrt_pi / 2.0).abs() < 1e-12);
    assert!((m4 - 3.0 * sqrt_pi / 4.0).abs() < 1e-12);
}

/// Direct trapezoidal integration over y as a second reference.
fn ngmi_trapezoid_pam2(variance: f64) -> f64 {
    let sd = variance.sqrt();
    let (lo, hi, n) = (-1.0 - 12.0 * sd, 1.0 + 12.0 * sd, 200_000);
    let dy = (hi - lo) / n as f64;
    let pdf = |y: f64, x: f64| (-(y - x).powi(2) / (2.0 * variance)).exp() / (2.0 * std::f64::consts::PI * variance).sqrt();
    let mut loss = 0.0;
    for i in 0..=n {
        let y = lo + i as f64 * dy;
        let (a, b) = (pdf(y, 1.0), pdf(y, -1.0));
        let f = 0.5 * a * -(a / (a + b)).log2() + 0.5 * b * -(b / (a + b)).log2();
        loss += if i == 0 || i == n { 0.5 * f } else { f } * dy;
    }
    1.0 - loss
}

#[test]
fn quadrature_matches_trapezoid_for_pam2() {
    for snr in [0.0, 5.0, 10.0] {
        let levels = pam_levels(2);
        let var = variance_for(&levels, &[0.5, 0.5], snr);
        let gh = ngmi_quadrature(&levels, &[0.5, 0.5], var, 120);
        let tr = ngmi_trapezoid_pam2(var);
        assert!((gh - tr).abs() < 1e-6, "snr {snr}: {gh} vs {tr}");
    }
}

#[test]
fn estimator_matches_quadrature_uniform() {
    for order in [2usize, 4, 8] {
        let source = ShapedSource::uniform(PamAlphabet::bipolar(order).unwrap());
        let levels = pam_levels(order);
        let priors = vec![1.0 / order as f64; order];
        for snr in [5.0, 10.0, 15.0] {
            let oracle = ngmi_quadrature(&levels, &priors, variance_for(&levels, &priors, snr), 160);
            let est = ngmi_estimate(&source, snr, 200_000, 11).unwrap();
            assert!(
                (est.ngmi - oracle).abs() < 0.005,
                "PAM-{order} at {snr} dB: {} vs {oracle}",
                est.ngmi
            );
        }
    }
}

#[test]
fn estimator_matches_quadrature_shaped() {
    let source = ShapedSource::with_entropy(PamAlphabet::bipolar(8).unwrap(), Family::MaxwellBoltzmann, 2.2).unwrap();
    let levels = pam_levels(8);
    let priors = source.distribution().probabilities().to_vec();
    for snr in [8.0, 12.0, 16.0] {
        let oracle = ngmi_quadrature(&levels, &priors, variance_for(&levels, &priors, snr), 160);
        let est = ngmi_estimate(&source, snr, 200_000, 5).unwrap();
        assert!((est.ngmi - oracle).abs() < 0.005, "{snr} dB: {} vs {oracle}", est.ngmi);
        assert!(est.std_error < 0.005);
    }
}
