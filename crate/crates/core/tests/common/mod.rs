//! Numerical-integration reference for bit-metric NGMI over a real AWGN
//! channel. Shares no code with the library estimator.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Gauss-Hermite nodes and weights for `∫ e^{-t²} f(t) dt`, by Newton
/// iteration on orthonormal Hermite polynomials.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let pim4 = PI.powf(-0.25);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() <= 1e-14 {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// NGMI of a PAM constellation with binary-reflected Gray labels, computed
/// as `1 - E[Σ_i -log2 P(b_i | y)] / m` by quadrature over the noise.
pub fn ngmi_quadrature(levels: &[f64], priors: &[f64], variance: f64, nodes: usize) -> f64 {
    let order = levels.len();
    let m = order.trailing_zeros() as usize;
    let gray: Vec<usize> = (0..order).map(|k| k ^ (k >> 1)).collect();
    let (t, w) = gauss_hermite(nodes);
    let sd = variance.sqrt();
    let mut loss = 0.0;
    for (k, &xk) in levels.iter().enumerate() {
        if priors[k] == 0.0 {
            continue;
        }
        let mut inner = 0.0;
        for (tj, wj) in t.iter().zip(&w) {
            let y = xk + std::f64::consts::SQRT_2 * sd * tj;
            // Likelihoods relative to the transmitted symbol avoid underflow.
            let q: Vec<f64> = levels
                .iter()
                .zip(priors)
                .map(|(x, p)| p * (((y - xk).powi(2) - (y - x).powi(2)) / (2.0 * variance)).exp())
                .collect();
            let total: f64 = q.iter().sum();
            let mut bits = 0.0;
            for i in 0..m {
                let bit = (gray[k] >> (m - 1 - i)) & 1;
                let same: f64 = (0..order).filter(|&j| (gray[j] >> (m - 1 - i)) & 1 == bit).map(|j| q[j]).sum();
                bits -= (same / total).log2();
            }
            inner += wj * bits;
        }
        loss += priors[k] * inner / PI.sqrt();
    }
    1.0 - loss / m as f64
}

/// Noise variance for a symbol SNR in dB.
pub fn variance_for(levels: &[f64], priors: &[f64], snr_db: f64) -> f64 {
    let energy: f64 = levels.iter().zip(priors).map(|(x, p)| p * x * x).sum();
    energy / 10f64.powf(snr_db / 10.0)
}

/// Uniform bipolar PAM levels.
pub fn pam_levels(order: usize) -> Vec<f64> {
    (0..order).map(|k| 2.0 * k as f64 - (order as f64 - 1.0)).collect()
}
