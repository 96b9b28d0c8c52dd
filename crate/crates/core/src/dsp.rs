//! Pulse shaping: RC/RRC design, oversampled synthesis, pre-emphasis and
//! matched filtering.
//!
//! Time is measured in symbol periods. A filter spanning `span` symbols at
//! `L` samples per symbol has `span·L + 1` taps centred on tap `span·L/2`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_SPAN: usize = 64;
pub const DEFAULT_OVERSAMPLING: usize = 16;

/// Output samples per parallel work item of the FIR.
const FIR_BLOCK: usize = 1 << 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FilterKind {
    #[serde(rename = "none")]
    None,
    #[serde(rename = "rc")]
    RaisedCosine,
    #[serde(rename = "rrc")]
    RootRaisedCosine,
}

impl FilterKind {
    pub fn name(self) -> &'static str {
        match self {
            FilterKind::None => "none",
            FilterKind::RaisedCosine => "rc",
            FilterKind::RootRaisedCosine => "rrc",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "none" => Some(FilterKind::None),
            "rc" => Some(FilterKind::RaisedCosine),
            "rrc" => Some(FilterKind::RootRaisedCosine),
            _ => None,
        }
    }
}

/// Transmit filter chain: an optional RC/RRC pulse followed by an optional
/// pre-emphasis tilt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseShaper {
    pub kind: FilterKind,
    pub roll_off: f64,
    pub span: usize,
    pub oversampling: usize,
    /// Pre-emphasis gain at the signal band edge relative to DC, in dB.
    pub tilt_db: f64,
}

impl Default for PulseShaper {
    fn default() -> Self {
        Self::none()
    }
}

impl PulseShaper {
    /// No pulse shaping: the waveform is the symbol sequence itself.
    pub fn none() -> Self {
        Self {
            kind: FilterKind::None,
            roll_off: 0.0,
            span: DEFAULT_SPAN,
            oversampling: 1,
            tilt_db: 0.0,
        }
    }

    pub fn rrc(roll_off: f64) -> Self {
        Self {
            kind: FilterKind::RootRaisedCosine,
            roll_off,
            span: DEFAULT_SPAN,
            oversampling: DEFAULT_OVERSAMPLING,
            tilt_db: 0.0,
        }
    }

    pub fn rc(roll_off: f64) -> Self {
        Self {
            kind: FilterKind::RaisedCosine,
            ..Self::rrc(roll_off)
        }
    }

    pub fn with_span(self, span: usize) -> Self {
        Self { span, ..self }
    }

    pub fn with_oversampling(self, oversampling: usize) -> Self {
        Self {
            oversampling,
            ..self
        }
    }

    pub fn with_tilt(self, tilt_db: f64) -> Self {
        Self { tilt_db, ..self }
    }

    pub fn is_none(&self) -> bool {
        self.kind == FilterKind::None
    }

    pub fn validate(&self) -> Result<()> {
        if !self.tilt_db.is_finite() || self.tilt_db < 0.0 {
            return Err(Error::NegativeTilt(self.tilt_db));
        }
        if self.is_none() {
            return Ok(());
        }
        check_design(self.roll_off, self.span, self.oversampling)
    }

    /// Filter taps; a single unit tap when there is no pulse.
    pub fn taps(&self) -> Result<Vec<f64>> {
        match self.kind {
            FilterKind::None => Ok(vec![1.0]),
            FilterKind::RaisedCosine => rc_taps(self.roll_off, self.span, self.oversampling),
            FilterKind::RootRaisedCosine => rrc_taps(self.roll_off, self.span, self.oversampling),
        }
    }

    /// Minimum number of symbols accepted by [`shape_waveform`].
    pub fn min_symbols(&self) -> usize {
        if self.is_none() {
            1
        } else {
            4 * self.span
        }
    }

    /// One-sided signal bandwidth in cycles per sample.
    pub fn band_edge(&self) -> f64 {
        match self.kind {
            FilterKind::None => 0.5,
            _ => ((1.0 + self.roll_off) / (2.0 * self.oversampling as f64)).min(0.5),
        }
    }

    /// Short identifier such as `rrc0.2-t3` used in file names and labels.
    pub fn label(&self) -> String {
        let base = match self.kind {
            FilterKind::None => "none".to_string(),
            kind => format!("{}{}", kind.name(), self.roll_off),
        };
        if self.tilt_db > 0.0 {
            format!("{base}-t{}", self.tilt_db)
        } else {
            base
        }
    }
}

fn check_design(roll_off: f64, span: usize, oversampling: usize) -> Result<()> {
    if !(roll_off > 0.0 && roll_off <= 1.0) {
        return Err(Error::InvalidRollOff(roll_off));
    }
    if span < 8 || !span.is_multiple_of(2) {
        return Err(Error::InvalidSpan(span));
    }
    if oversampling < 2 {
        return Err(Error::InvalidOversampling(oversampling));
    }
    Ok(())
}

fn tap_times(span: usize, oversampling: usize) -> impl Iterator<Item = f64> {
    let half = (span * oversampling / 2) as i64;
    (-half..=half).map(move |k| k as f64 / oversampling as f64)
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Root-raised-cosine taps, normalised to unit energy.
pub fn rrc_taps(roll_off: f64, span: usize, oversampling: usize) -> Result<Vec<f64>> {
    check_design(roll_off, span, oversampling)?;
    let r = roll_off;
    let mut taps: Vec<f64> = tap_times(span, oversampling)
        .map(|t| {
            if t == 0.0 {
                1.0 - r + 4.0 * r / PI
            } else if (1.0 - (4.0 * r * t).powi(2)).abs() < 1e-10 {
                let a = PI / (4.0 * r);
                r * FRAC_1_SQRT_2 * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos())
            } else {
                ((PI * t * (1.0 - r)).sin() + 4.0 * r * t * (PI * t * (1.0 + r)).cos())
                    / (PI * t * (1.0 - (4.0 * r * t).powi(2)))
            }
        })
        .collect();
    let norm = taps.iter().map(|h| h * h).sum::<f64>().sqrt();
    taps.iter_mut().for_each(|h| *h /= norm);
    Ok(taps)
}

/// Raised-cosine taps with unit centre tap.
///
/// Taps at non-zero symbol instants are set to exactly zero.
pub fn rc_taps(roll_off: f64, span: usize, oversampling: usize) -> Result<Vec<f64>> {
    check_design(roll_off, span, oversampling)?;
    let r = roll_off;
    let half = span * oversampling / 2;
    Ok(tap_times(span, oversampling)
        .enumerate()
        .map(|(k, t)| {
            if k != half && (k as i64 - half as i64) % oversampling as i64 == 0 {
                0.0
            } else if (1.0 - (2.0 * r * t).powi(2)).abs() < 1e-10 {
                PI / 4.0 * sinc(1.0 / (2.0 * r))
            } else {
                sinc(t) * (PI * r * t).cos() / (1.0 - (2.0 * r * t).powi(2))
            }
        })
        .collect())
}

/// A real oversampled waveform after transient trimming.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub samples: Vec<f64>,
    pub oversampling: usize,
    /// One-sided signal bandwidth in cycles per sample.
    pub band_edge: f64,
    /// Index of the input symbol whose pulse peaks at sample 0.
    pub first_symbol: usize,
    /// Free-form provenance, e.g. source and filter labels.
    pub origin: String,
}

impl Waveform {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn average_power(&self) -> f64 {
        mean_square(&self.samples)
    }
}

pub(crate) fn mean_square(x: &[f64]) -> f64 {
    x.par_chunks(FIR_BLOCK)
        .map(|c| c.iter().map(|v| v * v).sum::<f64>())
        .collect::<Vec<_>>()
        .iter()
        .sum::<f64>()
        / x.len() as f64
}

/// Zero-stuffs `amplitudes` by `L`, filters with `taps` and drops the
/// `taps.len() − 1` samples at each end that see a partially filled filter.
///
/// Returns `(n − span)·L` samples where `n = amplitudes.len()`; output sample
/// `j·L` is centred on input symbol `j + span/2`.
fn interpolate(amplitudes: &[f64], taps: &[f64], oversampling: usize) -> Vec<f64> {
    let l = oversampling;
    let span = (taps.len() - 1) / l;
    let out_len = (amplitudes.len() - span) * l;
    // phases[p][q] = taps[p + q·L]
    let phases: Vec<Vec<f64>> = (0..l)
        .map(|p| taps.iter().skip(p).step_by(l).copied().collect())
        .collect();
    let mut out = vec![0.0; out_len];
    out.par_chunks_mut(FIR_BLOCK)
        .enumerate()
        .for_each(|(b, chunk)| {
            let start = b * FIR_BLOCK;
            for (off, y) in chunk.iter_mut().enumerate() {
                // Full-convolution index n = i + span·L; symbols a[(n − p)/L − q].
                let n = start + off + span * l;
                let p = n % l;
                let base = (n - p) / l;
                *y = phases[p]
                    .iter()
                    .enumerate()
                    .map(|(q, h)| h * amplitudes[base - q])
                    .sum();
            }
        });
    out
}

/// Synthesises the transmitted waveform for a sequence of symbol amplitudes.
///
/// With no pulse the waveform is the amplitude sequence itself, one sample
/// per symbol. Otherwise the output has `(n − span)·L` samples free of
/// start-up and tail transients; a positive tilt is then applied with
/// [`pre_emphasis`].
pub fn shape_waveform(amplitudes: &[f64], shaper: &PulseShaper, origin: &str) -> Result<Waveform> {
    shaper.validate()?;
    let need = shaper.min_symbols();
    if amplitudes.len() < need {
        return Err(Error::TooFewSymbols {
            got: amplitudes.len(),
            need,
        });
    }
    if let Some(bad) = amplitudes.iter().find(|a| !a.is_finite()) {
        return Err(Error::NonFinite(format!("symbol amplitude {bad}")));
    }
    let (samples, oversampling, first_symbol) = if shaper.is_none() {
        (amplitudes.to_vec(), 1, 0)
    } else {
        let taps = shaper.taps()?;
        (
            interpolate(amplitudes, &taps, shaper.oversampling),
            shaper.oversampling,
            shaper.span / 2,
        )
    };
    let waveform = Waveform {
        samples,
        oversampling,
        band_edge: shaper.band_edge(),
        first_symbol,
        origin: origin.to_string(),
    };
    if shaper.tilt_db > 0.0 {
        pre_emphasis(&waveform, shaper.tilt_db)
    } else {
        Ok(waveform)
    }
}

/// Zero-phase spectral tilt over the whole block.
///
/// The magnitude gain rises linearly in dB from 0 at DC to `tilt_db` at the
/// waveform's band edge and stays at `tilt_db` above it. The result is
/// rescaled to the input's average power.
pub fn pre_emphasis(waveform: &Waveform, tilt_db: f64) -> Result<Waveform> {
    if !tilt_db.is_finite() || tilt_db < 0.0 {
        return Err(Error::NegativeTilt(tilt_db));
    }
    if tilt_db == 0.0 || waveform.is_empty() {
        return Ok(waveform.clone());
    }
    let n = waveform.len();
    let mut buf: Vec<Complex<f64>> = waveform
        .samples
        .iter()
        .map(|&x| Complex::new(x, 0.0))
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    let edge = waveform.band_edge;
    buf.par_iter_mut().enumerate().for_each(|(k, c)| {
        let f = k.min(n - k) as f64 / n as f64;
        let gain_db = tilt_db * (f / edge).min(1.0);
        *c *= 10f64.powf(gain_db / 20.0);
    });
    planner.plan_fft_inverse(n).process(&mut buf);
    let mut samples: Vec<f64> = buf.iter().map(|c| c.re / n as f64).collect();
    let p_in = waveform.average_power();
    let p_out = mean_square(&samples);
    if p_out > 0.0 {
        let g = (p_in / p_out).sqrt();
        samples.iter_mut().for_each(|x| *x *= g);
    }
    Ok(Waveform {
        samples,
        ..waveform.clone()
    })
}

/// Filters a waveform with the shaper's own pulse and samples it once per
/// symbol.
///
/// Returns `(symbols, first)` where `symbols[j]` estimates input symbol
/// `first + j`. With an RRC pulse this is the matched-filter receiver.
pub fn matched_filter(waveform: &Waveform, shaper: &PulseShaper) -> Result<(Vec<f64>, usize)> {
    shaper.validate()?;
    if shaper.is_none() {
        return Ok((waveform.samples.clone(), waveform.first_symbol));
    }
    let taps = shaper.taps()?;
    let l = shaper.oversampling;
    let t = taps.len() - 1;
    if waveform.len() <= t {
        return Err(Error::TooFewSymbols {
            got: waveform.len() / l,
            need: shaper.span + 1,
        });
    }
    let n_out = (waveform.len() - t).div_ceil(l);
    let x = &waveform.samples;
    let symbols = (0..n_out)
        .into_par_iter()
        .map(|j| {
            let n = j * l + t;
            taps.iter().enumerate().map(|(k, h)| h * x[n - k]).sum()
        })
        .collect();
    Ok((symbols, waveform.first_symbol + shaper.span / 2))
}

/// Sample excess kurtosis `E[(x−μ)⁴]/σ⁴ − 3`.
pub fn excess_kurtosis(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let (m2, m4) = x.iter().fold((0.0, 0.0), |(a, b), v| {
        let d = (v - mean) * (v - mean);
        (a + d, b + d * d)
    });
    (m4 / n) / (m2 / n).powi(2) - 3.0
}

/// Normalised histogram over `[lo, hi)` with `bins` equal bins.
///
/// Returns bin centres and probability densities; samples outside the range
/// are counted in the normalisation but not binned.
pub fn histogram(x: &[f64], lo: f64, hi: f64, bins: usize) -> (Vec<f64>, Vec<f64>) {
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in x {
        let b = ((v - lo) / width).floor();
        if b >= 0.0 && (b as usize) < bins {
            counts[b as usize] += 1;
        }
    }
    let centres = (0..bins).map(|b| lo + (b as f64 + 0.5) * width).collect();
    let density = counts
        .iter()
        .map(|&c| c as f64 / (x.len() as f64 * width))
        .collect();
    (centres, density)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{derive_seed, rng_from_seed};
    use rand::Rng;

    fn random_pam8(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = rng_from_seed(seed);
        (0..n)
            .map(|_| (2 * rng.random_range(0..8) as i64 - 7) as f64)
            .collect()
    }

    /// Direct evaluation of a filter at offset `t` symbols, used as an
    /// oracle for the tap generators away from singular points.
    fn rc_closed(r: f64, t: f64) -> f64 {
        sinc(t) * (PI * r * t).cos() / (1.0 - (2.0 * r * t).powi(2))
    }

    #[test]
    fn tap_count_and_symmetry() {
        for (r, span, l) in [(0.01, 64, 16), (0.2, 8, 4), (1.0, 32, 2)] {
            for taps in [rrc_taps(r, span, l).unwrap(), rc_taps(r, span, l).unwrap()] {
                assert_eq!(taps.len(), span * l + 1);
                for k in 0..taps.len() {
                    assert!((taps[k] - taps[taps.len() - 1 - k]).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn rrc_unit_energy() {
        for r in [0.01, 0.05, 0.25, 0.5, 1.0] {
            let e: f64 = rrc_taps(r, 64, 16).unwrap().iter().map(|h| h * h).sum();
            assert!((e - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rrc_singularities_are_continuous() {
        // ρ = 0.25 puts t = ±1 on a tap; compare with neighbours at ±1/L.
        let l = 64;
        let taps = rrc_taps(0.25, 16, l).unwrap();
        let c = 8 * l;
        let at = taps[c + l];
        let left = taps[c + l - 1];
        let right = taps[c + l + 1];
        assert!((at - 0.5 * (left + right)).abs() < 1e-3 * taps[c]);
        assert!(taps[c] >= taps.iter().cloned().fold(f64::MIN, f64::max));
    }

    #[test]
    fn rc_symbol_instants_are_a_delta() {
        for r in [0.1, 0.5, 1.0] {
            let l = 16;
            let taps = rc_taps(r, 64, l).unwrap();
            let c = 32 * l;
            assert_eq!(taps[c], 1.0);
            for j in 1..=32 {
                assert!(taps[c + j * l].abs() <= 1e-12);
                assert!(taps[c - j * l].abs() <= 1e-12);
            }
            let max = taps.iter().cloned().fold(f64::MIN, f64::max);
            assert_eq!(max, taps[c]);
            // Off-grid taps match the closed form.
            for k in [1, 5, 17, 100] {
                let t = k as f64 / l as f64;
                if (1.0 - (2.0 * r * t).powi(2)).abs() > 1e-6 {
                    assert!((taps[c + k] - rc_closed(r, t)).abs() < 1e-14);
                }
            }
        }
        // Singular point of ρ = 1 at t = 1/2.
        let taps = rc_taps(1.0, 8, 4).unwrap();
        assert!((taps[16 + 2] - 0.5).abs() < 1e-15);
    }

    /// Numerical convolution oracle: the RRC autocorrelation sampled at
    /// symbol instants is a delta up to truncation ISI.
    #[test]
    fn rrc_pair_is_nyquist() {
        for r in [0.2, 0.4, 1.0] {
            let l = 16;
            let h = rrc_taps(r, 64, l).unwrap();
            let n = h.len();
            let centre = n - 1;
            let corr = |lag: usize| -> f64 {
                (0..n)
                    .filter(|&k| k + lag < 2 * n - 1 && k + lag >= centre && k + lag - centre < n)
                    .map(|k| h[k] * h[k + lag - centre])
                    .sum()
            };
            assert!((corr(centre) - 1.0).abs() < 1e-12);
            for j in 1..64 {
                assert!(corr(centre + j * l).abs() < 1e-3, "ρ={r} lag {j}");
            }
        }
    }

    #[test]
    fn design_errors() {
        assert_eq!(rrc_taps(0.0, 64, 16), Err(Error::InvalidRollOff(0.0)));
        assert_eq!(rc_taps(1.5, 64, 16), Err(Error::InvalidRollOff(1.5)));
        assert_eq!(rrc_taps(0.1, 6, 16), Err(Error::InvalidSpan(6)));
        assert_eq!(rrc_taps(0.1, 9, 16), Err(Error::InvalidSpan(9)));
        assert_eq!(rrc_taps(0.1, 64, 1), Err(Error::InvalidOversampling(1)));
        let s = PulseShaper::rrc(0.1).with_tilt(-1.0);
        assert_eq!(s.validate(), Err(Error::NegativeTilt(-1.0)));
    }

    #[test]
    fn none_shaper_passes_symbols_through() {
        let a = random_pam8(100, 1);
        let w = shape_waveform(&a, &PulseShaper::none(), "t").unwrap();
        assert_eq!(w.samples, a);
        assert_eq!(w.oversampling, 1);
    }

    #[test]
    fn too_few_symbols_rejected() {
        let a = random_pam8(255, 1);
        assert_eq!(
            shape_waveform(&a, &PulseShaper::rrc(0.1), ""),
            Err(Error::TooFewSymbols { got: 255, need: 256 })
        );
    }

    /// The polyphase FIR equals a direct zero-stuffed convolution.
    #[test]
    fn polyphase_matches_direct_convolution() {
        let shaper = PulseShaper::rrc(0.3).with_span(8).with_oversampling(4);
        let a = random_pam8(40, 5);
        let w = shape_waveform(&a, &shaper, "").unwrap();
        let h = shaper.taps().unwrap();
        let mut stuffed = vec![0.0; a.len() * 4];
        for (j, v) in a.iter().enumerate() {
            stuffed[j * 4] = *v;
        }
        let full: Vec<f64> = (0..stuffed.len() + h.len() - 1)
            .map(|n| {
                (0..h.len())
                    .filter(|&k| n >= k && n - k < stuffed.len())
                    .map(|k| h[k] * stuffed[n - k])
                    .sum()
            })
            .collect();
        let t = h.len() - 1;
        assert_eq!(w.len(), (40 - 8) * 4);
        for (i, y) in w.samples.iter().enumerate() {
            assert!((y - full[i + t]).abs() < 1e-12);
        }
        // RC pulses pass symbol values at symbol instants.
        let rc = PulseShaper::rc(0.5).with_span(8).with_oversampling(4);
        let w = shape_waveform(&a, &rc, "").unwrap();
        for j in 0..w.len() / 4 {
            assert!((w.samples[j * 4] - a[j + w.first_symbol]).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_isi_loopback() {
        for r in [0.2, 0.4, 1.0] {
            let shaper = PulseShaper::rrc(r);
            let a = random_pam8(4096, derive_seed(9, 1));
            let w = shape_waveform(&a, &shaper, "").unwrap();
            let (y, first) = matched_filter(&w, &shaper).unwrap();
            let err: f64 = y
                .iter()
                .enumerate()
                .map(|(j, v)| (v - a[first + j]).powi(2))
                .sum();
            let sig: f64 = y.iter().enumerate().map(|(j, _)| a[first + j].powi(2)).sum();
            assert!((err / sig).sqrt() < 1e-3, "ρ={r}: {}", (err / sig).sqrt());
        }
    }

    /// For isolated pulses the waveform energy is exactly Σ a²·Σ h².
    #[test]
    fn isolated_pulse_energy() {
        let shaper = PulseShaper::rrc(0.3).with_span(16);
        let h = shaper.taps().unwrap();
        let hh: f64 = h.iter().map(|v| v * v).sum();
        let mut a = vec![0.0; 16 * 12];
        for (k, v) in [3.0, -5.0, 7.0, -1.0].iter().enumerate() {
            a[16 + 16 * (2 * k + 1) + 8] = *v;
        }
        let w = shape_waveform(&a, &shaper, "").unwrap();
        let e: f64 = w.samples.iter().map(|v| v * v).sum();
        assert!((e - 84.0 * hh).abs() < 1e-9 * e);
    }

    #[test]
    fn ensemble_power_follows_parseval() {
        // For i.i.d. zero-mean symbols, E[y²] = E[a²]·Σh²/L.
        let shaper = PulseShaper::rrc(0.2);
        let h = shaper.taps().unwrap();
        let hh: f64 = h.iter().map(|v| v * v).sum();
        let a = random_pam8(200_000, 3);
        let w = shape_waveform(&a, &shaper, "").unwrap();
        let expect = 21.0 * hh / 16.0;
        assert!((w.average_power() / expect - 1.0).abs() < 0.01);
    }

    #[test]
    fn pre_emphasis_identity_and_power() {
        let a = random_pam8(4096, 4);
        let w = shape_waveform(&a, &PulseShaper::rrc(0.05), "").unwrap();
        let same = pre_emphasis(&w, 0.0).unwrap();
        assert!(same.samples.iter().zip(&w.samples).all(|(x, y)| (x - y).abs() <= 1e-10));
        let tilted = pre_emphasis(&w, 8.0).unwrap();
        assert!((tilted.average_power() - w.average_power()).abs() <= 1e-9 * w.average_power());
        assert!(tilted.samples != w.samples);
        assert_eq!(pre_emphasis(&w, -1.0), Err(Error::NegativeTilt(-1.0)));
    }

    #[test]
    fn pre_emphasis_gain_profile() {
        // A tone at the band edge gains T dB relative to a DC offset.
        let n = 4096;
        let w = |samples: Vec<f64>| Waveform {
            samples,
            oversampling: 16,
            band_edge: 0.125,
            first_symbol: 0,
            origin: String::new(),
        };
        let tone: Vec<f64> = (0..n)
            .map(|i| 1.0 + (2.0 * PI * 512.0 * i as f64 / n as f64).cos())
            .collect();
        let out = pre_emphasis(&w(tone), 6.0).unwrap();
        let dc = out.samples.iter().sum::<f64>() / n as f64;
        let amp: f64 = out
            .samples
            .iter()
            .enumerate()
            .map(|(i, v)| v * (2.0 * PI * 512.0 * i as f64 / n as f64).cos())
            .sum::<f64>()
            * 2.0
            / n as f64;
        assert!((20.0 * (amp / dc).log10() - 6.0).abs() < 1e-9);
    }

    #[test]
    fn gaussianization_with_smaller_roll_off() {
        let a = random_pam8(100_000, 6);
        let k = |r: f64| {
            let w = shape_waveform(&a, &PulseShaper::rrc(r), "").unwrap();
            excess_kurtosis(&w.samples).abs()
        };
        assert!(k(0.01) < k(0.4));
    }

    #[test]
    fn kurtosis_and_histogram_basics() {
        let x: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!((excess_kurtosis(&x) + 2.0).abs() < 1e-12);
        let (c, d) = histogram(&x, -2.0, 2.0, 4);
        assert_eq!(c, vec![-1.5, -0.5, 0.5, 1.5]);
        assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shaping_is_deterministic() {
        let a = random_pam8(2048, 8);
        let s = PulseShaper::rrc(0.1).with_tilt(3.0);
        assert_eq!(shape_waveform(&a, &s, "").unwrap(), shape_waveform(&a, &s, "").unwrap());
    }
}
