//! Power constraints, constellation scaling and the AWGN path.
//!
//! Noise is added at symbol rate. For filtered transmitters the channel
//! quality is still quoted as PSNR, with the peak taken as the ε-clip level
//! of the filtered waveform; the symbol SNR then follows from
//! `SNR = PSNR − PAPR(ε)`. Matched RRC pairs are free of ISI, so this is
//! equivalent to adding the noise after the receive filter.

use serde::Serialize;

use crate::dsp::{shape_waveform, PulseShaper, Waveform};
use crate::error::{Error, Result};
use crate::metrics::{
    min_samples_for, noise_variance, papr_at_clip, papr_deterministic, snr_from_psnr, PaprInput,
    PaprReport,
};
use crate::rng::{derive_seed, standard_normals, tags};
use crate::source::{sample_indices, ShapedSource};

/// Transmit power constraint.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Constraint {
    /// `E[|X|²] ≤ p_avg`, met with equality.
    Average { p_avg: f64 },
    /// `max |X|² ≤ p_peak` on the unfiltered symbols.
    Peak { p_peak: f64 },
    /// The ε-clip level of the filtered waveform equals `p_peak`.
    PeakClip {
        p_peak: f64,
        clip_ratio: f64,
        shaper: PulseShaper,
        calibration_samples: usize,
    },
    /// Every source is rescaled to the same average power
    /// `p_peak / reference PAPR`, so peak and average constraints coincide.
    EqualAverage { p_peak: f64, reference_papr_db: f64 },
}

impl Constraint {
    fn check(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Error::InconsistentChannel(format!("{what} must be positive, got {v}"));
        match *self {
            Constraint::Average { p_avg } if !(p_avg > 0.0 && p_avg.is_finite()) => Err(bad("p_avg", p_avg)),
            Constraint::Peak { p_peak }
            | Constraint::PeakClip { p_peak, .. }
            | Constraint::EqualAverage { p_peak, .. }
                if !(p_peak > 0.0 && p_peak.is_finite()) =>
            {
                Err(bad("p_peak", p_peak))
            }
            Constraint::PeakClip {
                clip_ratio,
                shaper,
                calibration_samples,
                ..
            } => {
                shaper.validate()?;
                if !(clip_ratio > 0.0 && clip_ratio <= 0.1) {
                    return Err(Error::InvalidClipRatio(clip_ratio));
                }
                let need = min_samples_for(clip_ratio);
                if calibration_samples < need {
                    return Err(Error::InsufficientSamples {
                        have: calibration_samples,
                        need,
                        clip_ratio,
                    });
                }
                Ok(())
            }
            Constraint::EqualAverage { reference_papr_db, .. } if !reference_papr_db.is_finite() => {
                Err(Error::NonFinite(format!("reference PAPR {reference_papr_db}")))
            }
            _ => Ok(()),
        }
    }

    pub fn is_peak(&self) -> bool {
        !matches!(self, Constraint::Average { .. })
    }
}

/// Channel quality in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "metric", content = "db", rename_all = "kebab-case")]
pub enum Quality {
    SnrDb(f64),
    PsnrDb(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelSpec {
    pub constraint: Constraint,
    pub quality: Quality,
    pub seed: u64,
}

impl ChannelSpec {
    pub fn new(constraint: Constraint, quality: Quality, seed: u64) -> Result<Self> {
        let spec = Self {
            constraint,
            quality,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// SNR pairs with the average constraint and PSNR with the peak ones.
    pub fn validate(&self) -> Result<()> {
        self.constraint.check()?;
        match (&self.constraint, self.quality) {
            (Constraint::Average { .. }, Quality::PsnrDb(_)) => Err(Error::InconsistentChannel(
                "PSNR is undefined under an average-power constraint".into(),
            )),
            (c, Quality::SnrDb(_)) if c.is_peak() => Err(Error::InconsistentChannel(
                "peak-power constraints take a PSNR; convert with snr_from_psnr".into(),
            )),
            (_, Quality::SnrDb(v) | Quality::PsnrDb(v)) if !v.is_finite() => {
                Err(Error::NonFinite(format!("channel quality {v} dB")))
            }
            _ => Ok(()),
        }
    }
}

fn unit_energy(source: &ShapedSource) -> Result<f64> {
    let e = source.rescaled(1.0)?.average_energy();
    if e > 0.0 {
        Ok(e)
    } else {
        Err(Error::ZeroEnergy)
    }
}

/// Scale meeting `E[|ΔX|²] = p_avg`.
pub fn normalize_apc(source: &ShapedSource, p_avg: f64) -> Result<f64> {
    Ok((p_avg / unit_energy(source)?).sqrt())
}

/// Scale putting the outermost alphabet level at `p_peak`, whatever the
/// distribution.
pub fn normalize_ppc(source: &ShapedSource, p_peak: f64) -> Result<f64> {
    Ok(p_peak.sqrt() / source.alphabet().max_abs_level())
}

/// PAPR of the transmitted waveform.
///
/// Without a pulse this is the true-peak PAPR of the symbols. Otherwise
/// `n_samples` waveform samples are synthesised from a stream seeded by
/// `seed` and PAPR(ε) is read from them.
pub fn transmitter_papr(
    source: &ShapedSource,
    shaper: &PulseShaper,
    clip_ratio: f64,
    n_samples: usize,
    seed: u64,
) -> Result<PaprReport> {
    shaper.validate()?;
    if shaper.is_none() && shaper.tilt_db == 0.0 {
        return papr_deterministic(source);
    }
    let need = min_samples_for(clip_ratio);
    if n_samples < need {
        return Err(Error::InsufficientSamples {
            have: n_samples,
            need,
            clip_ratio,
        });
    }
    let w = transmitter_waveform(source, shaper, n_samples, seed)?;
    papr_at_clip(PaprInput::Samples(&w.samples), clip_ratio)
}

/// At least `n_samples` samples of the transmitted waveform for random
/// symbols drawn from a calibration stream of `seed`.
pub fn transmitter_waveform(source: &ShapedSource, shaper: &PulseShaper, n_samples: usize, seed: u64) -> Result<Waveform> {
    shaper.validate()?;
    let (l, extra) = if shaper.is_none() {
        (1, 0)
    } else {
        (shaper.oversampling, shaper.span)
    };
    let n_symbols = (n_samples.div_ceil(l) + extra).max(shaper.min_symbols());
    let amps = source.amplitudes();
    let x: Vec<f64> = sample_indices(source, n_symbols, derive_seed(seed, tags::CALIBRATION))?
        .iter()
        .map(|&k| amps[k as usize])
        .collect();
    shape_waveform(&x, shaper, &shaper.label())
}

/// Scale at which the ε-clip power of the filtered waveform equals
/// `p_peak`. Clip power scales as Δ², so one calibration run suffices.
pub fn normalize_ppc_clip(
    source: &ShapedSource,
    shaper: &PulseShaper,
    p_peak: f64,
    clip_ratio: f64,
    calibration_samples: usize,
    seed: u64,
) -> Result<f64> {
    Constraint::PeakClip {
        p_peak,
        clip_ratio,
        shaper: *shaper,
        calibration_samples,
    }
    .check()?;
    let unit = source.rescaled(1.0)?;
    let clip = if shaper.is_none() && shaper.tilt_db == 0.0 {
        papr_at_clip(PaprInput::Source(&unit), clip_ratio)?.clip_power
    } else {
        transmitter_papr(&unit, shaper, clip_ratio, calibration_samples, seed)?.clip_power
    };
    if clip <= 0.0 {
        return Err(Error::ZeroEnergy);
    }
    Ok((p_peak / clip).sqrt())
}

/// Scale, PAPR and SNR of a source under given channel settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatingPoint {
    pub scale: f64,
    pub papr_db: f64,
    pub snr_db: f64,
    pub psnr_db: Option<f64>,
    pub noise_variance: f64,
}

/// Resolves `spec` for `source`: scales the constellation, finds the PAPR
/// that links PSNR and SNR and derives the noise variance.
pub fn operating_point(source: &ShapedSource, spec: &ChannelSpec) -> Result<OperatingPoint> {
    spec.validate()?;
    let (scale, papr_db) = match &spec.constraint {
        Constraint::Average { p_avg } => (normalize_apc(source, *p_avg)?, papr_deterministic(source)?.papr_db),
        Constraint::Peak { p_peak } => (normalize_ppc(source, *p_peak)?, papr_deterministic(source)?.papr_db),
        Constraint::PeakClip {
            p_peak,
            clip_ratio,
            shaper,
            calibration_samples,
        } => {
            let scale = normalize_ppc_clip(source, shaper, *p_peak, *clip_ratio, *calibration_samples, spec.seed)?;
            let papr = transmitter_papr(source, shaper, *clip_ratio, *calibration_samples, spec.seed)?;
            (scale, papr.papr_db)
        }
        Constraint::EqualAverage {
            p_peak,
            reference_papr_db,
        } => {
            let p_avg = p_peak / 10f64.powf(reference_papr_db / 10.0);
            (normalize_apc(source, p_avg)?, *reference_papr_db)
        }
    };
    let (snr_db, psnr_db) = match spec.quality {
        Quality::SnrDb(snr) => (snr, None),
        Quality::PsnrDb(psnr) => (snr_from_psnr(psnr, papr_db), Some(psnr)),
    };
    let energy = source.rescaled(scale)?.average_energy();
    Ok(OperatingPoint {
        scale,
        papr_db,
        snr_db,
        psnr_db,
        noise_variance: noise_variance(energy, snr_db)?,
    })
}

/// Symbols and their noisy observations.
#[derive(Debug, Clone, PartialEq)]
pub struct Received {
    /// The source at the scale chosen for the constraint.
    pub source: ShapedSource,
    pub indices: Vec<u8>,
    pub samples: Vec<f64>,
    pub noise_variance: f64,
    pub snr_db: f64,
    pub papr_db: f64,
}

/// Draws `n` symbols, scales them for the constraint and adds white
/// Gaussian noise at the resolved symbol SNR.
pub fn transmit_awgn(source: &ShapedSource, spec: &ChannelSpec, n: usize, seed: u64) -> Result<Received> {
    let op = operating_point(source, spec)?;
    let scaled = source.rescaled(op.scale)?;
    let indices = sample_indices(&scaled, n, seed)?;
    let z = standard_normals(n, derive_seed(seed, tags::NOISE));
    let amps = scaled.amplitudes();
    let sd = op.noise_variance.sqrt();
    let samples = indices
        .iter()
        .zip(&z)
        .map(|(&k, z)| amps[k as usize] + sd * z)
        .collect();
    Ok(Received {
        source: scaled,
        indices,
        samples,
        noise_variance: op.noise_variance,
        snr_db: op.snr_db,
        papr_db: op.papr_db,
    })
}
