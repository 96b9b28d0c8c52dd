//! Sweeps, thresholds, rate adaptation and the composite scenarios.
//!
//! Every operating point of a sweep reuses one Monte-Carlo draw per
//! modulation (common random numbers), and all modulations share the master
//! seed, so differences between curves carry as little sampling noise as
//! possible. Points run in parallel on the ambient rayon pool and results
//! are collected in configuration order, so output does not depend on the
//! number of workers.

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::transmitter_papr;
use crate::dsp::PulseShaper;
use crate::error::{Error, Result};
use crate::metrics::{air, MonteCarloDraw, PaprReport};
use crate::source::{Family, PamAlphabet, Polarity, ShapedSource};

/// One shaped PAM format.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Modulation {
    pub family: Family,
    pub order: usize,
    pub polarity: Polarity,
    pub bias: Option<f64>,
    /// Target entropy in bits per symbol.
    pub entropy: f64,
}

impl Modulation {
    pub fn uniform(order: usize, polarity: Polarity) -> Self {
        Self {
            family: Family::Uniform,
            order,
            polarity,
            bias: None,
            entropy: (order as f64).log2(),
        }
    }

    pub fn shaped(family: Family, order: usize, polarity: Polarity, entropy: f64) -> Self {
        Self {
            family,
            order,
            polarity,
            bias: None,
            entropy,
        }
    }

    pub fn alphabet(&self) -> Result<PamAlphabet> {
        PamAlphabet::new(self.order, self.polarity, self.bias)
    }

    /// The source at unit scale.
    pub fn source(&self) -> Result<ShapedSource> {
        let alphabet = self.alphabet()?;
        if self.family == Family::Uniform {
            let max = alphabet.bits_per_symbol() as f64;
            if (self.entropy - max).abs() > 1e-12 {
                return Err(Error::UnreachableEntropy {
                    target: self.entropy,
                    min: max,
                    max,
                });
            }
            return Ok(ShapedSource::uniform(alphabet));
        }
        ShapedSource::with_entropy(alphabet, self.family, self.entropy)
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.order.trailing_zeros() as usize
    }

    /// Identifier such as `mb-pam8-h2.2` or `uniform-upam4`.
    pub fn label(&self) -> String {
        let pol = match self.polarity {
            Polarity::Bipolar => "",
            Polarity::Unipolar => "u",
        };
        match self.family {
            Family::Uniform => format!("uniform-{pol}pam{}", self.order),
            f => format!("{}-{pol}pam{}-h{}", f.name(), self.order, self.entropy),
        }
    }
}

/// How the transmit power is constrained in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintMode {
    /// Average power; the sweep axis is SNR.
    Apc,
    /// Peak power (ε-clip peak when a pulse is present); the axis is PSNR.
    Ppc,
    /// Peak constraint with every source forced to the same average power,
    /// so that PSNR and SNR differ by one fixed reference PAPR.
    ExtremePe,
}

impl ConstraintMode {
    pub fn name(self) -> &'static str {
        match self {
            ConstraintMode::Apc => "apc",
            ConstraintMode::Ppc => "ppc",
            ConstraintMode::ExtremePe => "extreme-pe",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "apc" => Some(ConstraintMode::Apc),
            "ppc" => Some(ConstraintMode::Ppc),
            "extreme-pe" => Some(ConstraintMode::ExtremePe),
            _ => None,
        }
    }

    /// Name of the channel-quality axis.
    pub fn axis(self) -> &'static str {
        match self {
            ConstraintMode::Apc => "snr_db",
            _ => "psnr_db",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub modulations: Vec<Modulation>,
    pub shaper: PulseShaper,
    pub mode: ConstraintMode,
    /// Channel-quality grid in dB on the mode's axis, ascending.
    pub grid_db: Vec<f64>,
    pub ngmi_target: f64,
    pub code_rate: f64,
    /// Monte-Carlo symbols per NGMI point.
    pub samples: usize,
    pub clip_ratio: f64,
    /// Waveform samples used to measure PAPR(ε) of filtered signals.
    pub calibration_samples: usize,
    pub seed: u64,
    /// Fixed PAPR used by [`ConstraintMode::ExtremePe`]; measured from a
    /// uniform source through the shaper when absent.
    pub reference_papr_db: Option<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            modulations: Vec::new(),
            shaper: PulseShaper::none(),
            mode: ConstraintMode::Apc,
            grid_db: Vec::new(),
            ngmi_target: 0.8,
            code_rate: 0.8,
            samples: 1_000_000,
            clip_ratio: 1e-5,
            calibration_samples: 10_000_000,
            seed: 1,
            reference_papr_db: None,
        }
    }
}

/// Ascending grid from `start` to `stop` inclusive.
pub fn linear_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    let ascending = step > 0.0 && stop >= start && start.is_finite() && stop.is_finite();
    if !ascending {
        return Err(Error::InvalidArgument(format!(
            "grid {start}..{stop} step {step} is empty or not ascending"
        )));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    // Round to 1e-9 so that grids print cleanly and compare exactly.
    Ok((0..=n)
        .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
        .collect())
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.ngmi_target > 0.0 && self.ngmi_target < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "NGMI threshold must lie in (0, 1), got {}",
                self.ngmi_target
            )));
        }
        if !(self.code_rate > 0.0 && self.code_rate <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "code rate must lie in (0, 1], got {}",
                self.code_rate
            )));
        }
        if self.grid_db.is_empty() || self.grid_db.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("quality grid must be non-empty and ascending".into()));
        }
        if self.grid_db.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("quality grid".into()));
        }
        self.shaper.validate()?;
        if !(self.clip_ratio > 0.0 && self.clip_ratio <= 0.1) {
            return Err(Error::InvalidClipRatio(self.clip_ratio));
        }
        Ok(())
    }

    fn with_modulations(&self, modulations: Vec<Modulation>) -> Self {
        Self {
            modulations,
            ..self.clone()
        }
    }
}

/// One evaluated operating point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub modulation: String,
    pub family: Family,
    pub order: usize,
    pub polarity: Polarity,
    pub entropy: f64,
    pub filter: String,
    pub constraint: ConstraintMode,
    /// Grid value on the mode's axis.
    pub quality_db: f64,
    pub snr_db: f64,
    pub psnr_db: f64,
    pub papr_db: f64,
    pub ngmi: f64,
    pub gmi: f64,
    pub ngmi_std_error: f64,
    pub gmi_std_error: f64,
    /// Rate with ideal shaping and a fixed-rate code of the configured rate.
    pub air: f64,
    pub seed: u64,
    pub samples: usize,
    pub error: Option<String>,
}

/// Checks `PSNR = SNR + PAPR` and the AIR formula on a record.
pub fn verify_record(record: &SweepRecord, code_rate: f64) -> Result<()> {
    let psnr = record.snr_db + record.papr_db;
    if (psnr - record.psnr_db).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "{}: PSNR {} != SNR {} + PAPR {}",
            record.modulation, record.psnr_db, record.snr_db, record.papr_db
        )));
    }
    let expected = air(record.entropy, code_rate, record.order)?;
    if (expected - record.air).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "{}: AIR {} != {}",
            record.modulation, record.air, expected
        )));
    }
    Ok(())
}

/// A modulation with its source, transmitter PAPR and Monte-Carlo draw.
struct Prepared {
    modulation: Modulation,
    source: ShapedSource,
    papr: PaprReport,
    draw: MonteCarloDraw,
}

fn reference_papr(cfg: &SweepConfig, like: &Modulation) -> Result<f64> {
    if let Some(p) = cfg.reference_papr_db {
        return Ok(p);
    }
    let order = cfg.modulations.iter().map(|m| m.order).max().unwrap_or(like.order);
    let uniform = Modulation {
        bias: like.bias,
        ..Modulation::uniform(order, like.polarity)
    };
    Ok(transmitter_papr(&uniform.source()?, &cfg.shaper, cfg.clip_ratio, cfg.calibration_samples, cfg.seed)?.papr_db)
}

fn prepare(m: &Modulation, cfg: &SweepConfig) -> Result<Prepared> {
    let source = m.source()?;
    let mut papr = transmitter_papr(&source, &cfg.shaper, cfg.clip_ratio, cfg.calibration_samples, cfg.seed)?;
    if cfg.mode == ConstraintMode::ExtremePe {
        papr.papr_db = reference_papr(cfg, m)?;
    }
    let draw = MonteCarloDraw::new(&source, cfg.samples, cfg.seed)?;
    Ok(Prepared {
        modulation: *m,
        source,
        papr,
        draw,
    })
}

impl Prepared {
    fn snr_for(&self, quality_db: f64, mode: ConstraintMode) -> f64 {
        match mode {
            ConstraintMode::Apc => quality_db,
            _ => quality_db - self.papr.papr_db,
        }
    }

    fn evaluate(&self, quality_db: f64, cfg: &SweepConfig) -> SweepRecord {
        let snr_db = self.snr_for(quality_db, cfg.mode);
        let m = &self.modulation;
        let mut record = SweepRecord {
            modulation: m.label(),
            family: m.family,
            order: m.order,
            polarity: m.polarity,
            entropy: m.entropy,
            filter: cfg.shaper.label(),
            constraint: cfg.mode,
            quality_db,
            snr_db,
            psnr_db: snr_db + self.papr.papr_db,
            papr_db: self.papr.papr_db,
            ngmi: f64::NAN,
            gmi: f64::NAN,
            ngmi_std_error: f64::NAN,
            gmi_std_error: f64::NAN,
            air: air(m.entropy, cfg.code_rate, m.order).unwrap_or(f64::NAN),
            seed: cfg.seed,
            samples: cfg.samples,
            error: None,
        };
        match self.draw.ngmi(&self.source, snr_db) {
            Ok(e) => {
                record.ngmi = e.ngmi;
                record.gmi = e.gmi;
                record.ngmi_std_error = e.std_error;
                record.gmi_std_error = e.gmi_std_error;
            }
            Err(e) => record.error = Some(e.to_string()),
        }
        record
    }

    fn curve(&self, cfg: &SweepConfig) -> Vec<SweepRecord> {
        cfg.grid_db.par_iter().map(|&q| self.evaluate(q, cfg)).collect()
    }
}

/// NGMI over the cartesian product of modulations and the quality grid,
/// modulation-major. Per-point failures are recorded in `error`.
pub fn ngmi_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    let mut out = Vec::with_capacity(cfg.modulations.len() * cfg.grid_db.len());
    for m in &cfg.modulations {
        out.extend(prepare(m, cfg)?.curve(cfg));
    }
    Ok(out)
}

/// Threshold of one modulation on the mode's axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdResult {
    pub modulation: String,
    pub entropy: f64,
    pub filter: String,
    pub constraint: ConstraintMode,
    pub ngmi_target: f64,
    /// Crossing on the sweep axis.
    pub threshold_db: f64,
    pub snr_star_db: f64,
    pub psnr_star_db: f64,
    pub papr_db: f64,
    /// `(quality_db, ngmi)` pairs evaluated, grid then refinement.
    pub evaluations: Vec<(f64, f64)>,
}

fn interpolate(x0: f64, v0: f64, x1: f64, v1: f64, target: f64) -> f64 {
    if v1 == v0 {
        0.5 * (x0 + x1)
    } else {
        x0 + (target - v0) * (x1 - x0) / (v1 - v0)
    }
}

fn threshold_from_curve(p: &Prepared, curve: &[SweepRecord], cfg: &SweepConfig) -> Result<ThresholdResult> {
    let target = cfg.ngmi_target;
    let xs: Vec<f64> = curve.iter().map(|r| r.quality_db).collect();
    if let Some(r) = curve.iter().find(|r| r.error.is_some()) {
        return Err(Error::InvalidArgument(format!(
            "{} at {} dB: {}",
            r.modulation,
            r.quality_db,
            r.error.as_deref().unwrap_or_default()
        )));
    }
    // Running maximum makes the sampled curve monotone before interpolation.
    let mut vs: Vec<f64> = curve.iter().map(|r| r.ngmi).collect();
    for i in 1..vs.len() {
        vs[i] = vs[i].max(vs[i - 1]);
    }
    let no_crossing = || Error::NoCrossing {
        target,
        low_db: xs[0],
        high_db: xs[xs.len() - 1],
        low_ngmi: curve[0].ngmi,
        high_ngmi: curve[curve.len() - 1].ngmi,
    };
    let j = match vs.iter().position(|&v| v >= target) {
        Some(0) | None => return Err(no_crossing()),
        Some(j) => j,
    };
    let (mut x0, mut v0, mut x1, mut v1) = (xs[j - 1], vs[j - 1], xs[j], vs[j]);
    let mut evaluations: Vec<(f64, f64)> = xs.iter().copied().zip(curve.iter().map(|r| r.ngmi)).collect();

    // One halved-grid pass inside the bracket.
    let mid = 0.5 * (x0 + x1);
    let r = p.evaluate(mid, cfg);
    if let Some(e) = r.error {
        return Err(Error::InvalidArgument(e));
    }
    evaluations.push((mid, r.ngmi));
    let vm = r.ngmi.clamp(v0, v1);
    if vm >= target {
        x1 = mid;
        v1 = vm;
    } else {
        x0 = mid;
        v0 = vm;
    }
    let threshold_db = interpolate(x0, v0, x1, v1, target);
    let snr_star_db = p.snr_for(threshold_db, cfg.mode);
    Ok(ThresholdResult {
        modulation: p.modulation.label(),
        entropy: p.modulation.entropy,
        filter: cfg.shaper.label(),
        constraint: cfg.mode,
        ngmi_target: target,
        threshold_db,
        snr_star_db,
        psnr_star_db: snr_star_db + p.papr.papr_db,
        papr_db: p.papr.papr_db,
        evaluations,
    })
}

/// Quality at which `modulation` reaches the configured NGMI threshold.
///
/// NGMI is evaluated on the whole grid with common random numbers, the
/// crossing is bracketed on the running-maximum curve and refined once at
/// the bracket midpoint before linear interpolation.
pub fn threshold(modulation: &Modulation, cfg: &SweepConfig) -> Result<ThresholdResult> {
    cfg.validate()?;
    let p = prepare(modulation, cfg)?;
    let curve = p.curve(cfg);
    threshold_from_curve(&p, &curve, cfg)
}

/// Curves and thresholds for several modulations in one pass.
fn curves_and_thresholds(cfg: &SweepConfig) -> Result<(Vec<SweepRecord>, Vec<ThresholdResult>)> {
    cfg.validate()?;
    let mut records = Vec::new();
    let mut thresholds = Vec::new();
    for m in &cfg.modulations {
        let p = prepare(m, cfg)?;
        let curve = p.curve(cfg);
        thresholds.push(threshold_from_curve(&p, &curve, cfg)?);
        records.extend(curve);
    }
    Ok((records, thresholds))
}

/// Best rate at one channel quality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatePoint {
    pub quality_db: f64,
    /// Largest grid entropy meeting the NGMI threshold, if any.
    pub entropy: Option<f64>,
    pub air: Option<f64>,
}

/// Rate adaptation with ideal shaping and a fixed-rate code.
///
/// NGMI is evaluated for every entropy in `entropies` at every grid point.
/// At each point the largest entropy meeting the threshold is selected and
/// mapped to AIR. Decodability is monotone in channel quality, so an entropy
/// that works at one point is carried to better points.
pub fn rate_adaptation_curve(
    family: Family,
    order: usize,
    polarity: Polarity,
    entropies: &[f64],
    cfg: &SweepConfig,
) -> Result<Vec<RatePoint>> {
    cfg.validate()?;
    if entropies.is_empty() {
        return Err(Error::InvalidArgument("entropy grid is empty".into()));
    }
    let max = (order as f64).log2();
    let mut best: Vec<Option<f64>> = vec![None; cfg.grid_db.len()];
    for &h in entropies {
        let m = if (h - max).abs() <= 1e-12 {
            Modulation::uniform(order, polarity)
        } else {
            Modulation::shaped(family, order, polarity, h)
        };
        let p = prepare(&m, &cfg.with_modulations(vec![m]))?;
        for (b, r) in best.iter_mut().zip(p.curve(cfg)) {
            if r.error.is_none() && r.ngmi >= cfg.ngmi_target && b.is_none_or(|v| h > v) {
                *b = Some(h);
            }
        }
    }
    for i in 1..best.len() {
        if let (Some(prev), cur) = (best[i - 1], best[i]) {
            if cur.is_none_or(|c| c < prev) {
                best[i] = Some(prev);
            }
        }
    }
    best.iter()
        .zip(&cfg.grid_db)
        .map(|(b, &q)| {
            Ok(RatePoint {
                quality_db: q,
                entropy: *b,
                air: b.map(|h| air(h, cfg.code_rate, order)).transpose()?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PaprRow {
    pub entropy: f64,
    pub papr_db: f64,
    /// `psnr_ref − papr`.
    pub snr_db: f64,
}

/// Transmitter PAPR over an entropy grid and the SNR left at a fixed PSNR.
#[allow(clippy::too_many_arguments)]
pub fn papr_vs_entropy(
    family: Family,
    alphabet: &PamAlphabet,
    shaper: &PulseShaper,
    clip_ratio: f64,
    entropies: &[f64],
    psnr_ref_db: f64,
    calibration_samples: usize,
    seed: u64,
) -> Result<Vec<PaprRow>> {
    let max = alphabet.bits_per_symbol() as f64;
    entropies
        .iter()
        .map(|&h| {
            let source = if (h - max).abs() <= 1e-12 {
                ShapedSource::uniform(alphabet.clone())
            } else {
                ShapedSource::with_entropy(alphabet.clone(), family, h)?
            };
            let papr = transmitter_papr(&source, shaper, clip_ratio, calibration_samples, seed)?.papr_db;
            Ok(PaprRow {
                entropy: h,
                papr_db: papr,
                snr_db: crate::metrics::snr_from_psnr(psnr_ref_db, papr),
            })
        })
        .collect()
}

/// Least-squares line through `(x, y)` pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: Vec<(f64, f64)>,
    pub residuals: Vec<f64>,
}

/// Fits `ΔPSNR* = slope·ΔPAPR + intercept`.
pub fn delta_relation_check(points: &[(f64, f64)]) -> Result<LinearFit> {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let distinct = points
        .iter()
        .any(|p| (p.0 - points[0].0).abs() > 1e-12 * (1.0 + p.0.abs()));
    if points.len() < 2 || !distinct || sxx <= 0.0 {
        return Err(Error::DegenerateFit(format!(
            "need at least two distinct ΔPAPR values, got {} points",
            points.len()
        )));
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    Ok(LinearFit {
        slope,
        intercept,
        points: points.to_vec(),
        residuals: points.iter().map(|p| p.1 - (slope * p.0 + intercept)).collect(),
    })
}

/// Per-filter thresholds of two modulations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterComparison {
    pub filter: String,
    pub reference: ThresholdResult,
    pub shaped: ThresholdResult,
}

impl FilterComparison {
    /// `(PAPR_shaped − PAPR_reference, PSNR*_shaped − PSNR*_reference)`.
    pub fn delta(&self) -> (f64, f64) {
        (
            self.shaped.papr_db - self.reference.papr_db,
            self.shaped.psnr_star_db - self.reference.psnr_star_db,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaReport {
    pub filters: Vec<FilterComparison>,
    pub curves: Vec<SweepRecord>,
    /// Reference modulation across filters, relative to the first filter.
    pub reference_fit: LinearFit,
    /// Shaped modulation across filters, relative to the first filter.
    pub shaped_fit: LinearFit,
    /// Shaped against reference at each filter.
    pub cross_fit: LinearFit,
}

/// PSNR thresholds of `reference` and `shaped` under peak-power constraints
/// for each transmit filter, and the three ΔPSNR*-vs-ΔPAPR fits.
///
/// `cfg.grid_db` is the PSNR grid and must bracket every threshold.
pub fn delta_relation_sweep(
    reference: Modulation,
    shaped: Modulation,
    shapers: &[PulseShaper],
    cfg: &SweepConfig,
) -> Result<DeltaReport> {
    let mut filters = Vec::new();
    let mut curves = Vec::new();
    for shaper in shapers {
        let c = SweepConfig {
            shaper: *shaper,
            mode: ConstraintMode::Ppc,
            ..cfg.with_modulations(vec![reference, shaped])
        };
        let (records, mut t) = curves_and_thresholds(&c)?;
        curves.extend(records);
        let shaped_t = t.pop().expect("two thresholds");
        let reference_t = t.pop().expect("two thresholds");
        filters.push(FilterComparison {
            filter: shaper.label(),
            reference: reference_t,
            shaped: shaped_t,
        });
    }
    let base = &filters[0];
    let along = |pick: fn(&FilterComparison) -> &ThresholdResult| -> Vec<(f64, f64)> {
        filters
            .iter()
            .map(|f| {
                (
                    pick(f).papr_db - pick(base).papr_db,
                    pick(f).psnr_star_db - pick(base).psnr_star_db,
                )
            })
            .collect()
    };
    let reference_fit = delta_relation_check(&along(|f| &f.reference))?;
    let shaped_fit = delta_relation_check(&along(|f| &f.shaped))?;
    let cross: Vec<(f64, f64)> = filters.iter().map(|f| f.delta()).collect();
    let cross_fit = delta_relation_check(&cross)?;
    Ok(DeltaReport {
        filters,
        curves,
        reference_fit,
        shaped_fit,
        cross_fit,
    })
}

/// Default roll-off set for the ΔPSNR*-vs-ΔPAPR study; an unfiltered
/// transmitter is added as the first entry.
pub const DEFAULT_ROLL_OFFS: [f64; 5] = [0.01, 0.05, 0.1, 0.2, 0.4];

pub fn roll_off_shapers(roll_offs: &[f64], span: usize, oversampling: usize) -> Vec<PulseShaper> {
    std::iter::once(PulseShaper::none())
        .chain(
            roll_offs
                .iter()
                .map(|&r| PulseShaper::rrc(r).with_span(span).with_oversampling(oversampling)),
        )
        .collect()
}

/// The three band-limitation regimes.
///
/// 1. RC ρ = 1, no pre-emphasis: little PAPR enhancement.
/// 2. RRC ρ = 0.2 with a weak tilt (`weak_tilt_db`).
/// 3. RRC ρ = 0.05 with an 8 dB tilt and all sources rescaled to the same
///    average power.
pub fn scenario_chain(id: u32, weak_tilt_db: f64) -> Result<(PulseShaper, ConstraintMode)> {
    match id {
        1 => Ok((PulseShaper::rc(1.0), ConstraintMode::Ppc)),
        2 => Ok((PulseShaper::rrc(0.2).with_tilt(weak_tilt_db), ConstraintMode::Ppc)),
        3 => Ok((PulseShaper::rrc(0.05).with_tilt(8.0), ConstraintMode::ExtremePe)),
        _ => Err(Error::InvalidScenario(id)),
    }
}

/// Uniform PAM-4, uniform PAM-8 and MB PAM-8 at `entropies`, all bipolar.
pub fn scenario_modulations(entropies: &[f64]) -> Vec<Modulation> {
    let mut v = vec![
        Modulation::uniform(4, Polarity::Bipolar),
        Modulation::uniform(8, Polarity::Bipolar),
    ];
    v.extend(
        entropies
            .iter()
            .map(|&h| Modulation::shaped(Family::MaxwellBoltzmann, 8, Polarity::Bipolar, h)),
    );
    v
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub id: u32,
    pub shaper: PulseShaper,
    pub mode: ConstraintMode,
    pub thresholds: Vec<ThresholdResult>,
    pub curves: Vec<SweepRecord>,
    /// PAPR of the lowest-entropy MB format minus uniform PAM-8.
    pub delta_papr_db: f64,
    /// SNR* of the lowest-entropy MB format minus uniform PAM-8.
    pub delta_snr_star_db: f64,
    /// PSNR* of the lowest-entropy MB format minus uniform PAM-8.
    pub delta_psnr_star_db: f64,
    /// `|ΔPSNR*|`: the PSNR span over which PAM-8 can adapt its rate.
    pub range_db: f64,
    /// Equivalent received-power span, `range/2`.
    pub rop_range_db: f64,
}

/// Runs a scenario over `cfg.grid_db` (PSNR) for
/// [`scenario_modulations`] with MB entropies `entropies`.
pub fn scenario(id: u32, weak_tilt_db: f64, entropies: &[f64], cfg: &SweepConfig) -> Result<ScenarioReport> {
    let (shaper, mode) = scenario_chain(id, weak_tilt_db)?;
    if entropies.is_empty() {
        return Err(Error::InvalidArgument("scenario needs at least one MB entropy".into()));
    }
    let base = SweepConfig {
        shaper: PulseShaper {
            span: cfg.shaper.span,
            oversampling: cfg.shaper.oversampling,
            ..shaper
        },
        mode,
        ..cfg.with_modulations(scenario_modulations(entropies))
    };
    let (curves, thresholds) = curves_and_thresholds(&base)?;
    let uniform8 = &thresholds[1];
    let lowest = thresholds[2..]
        .iter()
        .min_by(|a, b| a.entropy.total_cmp(&b.entropy))
        .expect("non-empty");
    let delta_psnr_star_db = lowest.psnr_star_db - uniform8.psnr_star_db;
    let range_db = delta_psnr_star_db.abs();
    Ok(ScenarioReport {
        id,
        shaper: base.shaper,
        mode,
        delta_papr_db: lowest.papr_db - uniform8.papr_db,
        delta_snr_star_db: lowest.snr_star_db - uniform8.snr_star_db,
        delta_psnr_star_db,
        range_db,
        rop_range_db: range_db / 2.0,
        thresholds,
        curves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn apc_cfg(grid: Vec<f64>, samples: usize) -> SweepConfig {
        SweepConfig {
            grid_db: grid,
            samples,
            ..SweepConfig::default()
        }
    }

    #[test]
    fn grid_construction() {
        assert_eq!(linear_grid(0.0, 1.0, 0.25).unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(linear_grid(2.0, 3.0, 0.1).unwrap().len(), 11);
        assert_eq!(*linear_grid(2.0, 3.0, 0.1).unwrap().last().unwrap(), 3.0);
        assert!(linear_grid(1.0, 0.0, 0.1).is_err());
        assert!(linear_grid(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn labels() {
        assert_eq!(Modulation::uniform(4, Polarity::Bipolar).label(), "uniform-pam4");
        assert_eq!(
            Modulation::shaped(Family::AsymmetricMb, 8, Polarity::Unipolar, 2.2).label(),
            "as-mb-upam8-h2.2"
        );
    }

    #[test]
    fn config_validation() {
        let mut c = apc_cfg(vec![1.0, 2.0], 10_000);
        assert!(c.validate().is_ok());
        c.ngmi_target = 1.5;
        assert!(c.validate().is_err());
        let c = apc_cfg(vec![2.0, 1.0], 10_000);
        assert!(c.validate().is_err());
        let c = apc_cfg(vec![], 10_000);
        assert!(c.validate().is_err());
    }

    #[test]
    fn sweep_records_satisfy_identities() {
        let cfg = SweepConfig {
            modulations: vec![
                Modulation::uniform(8, Polarity::Bipolar),
                Modulation::shaped(Family::MaxwellBoltzmann, 8, Polarity::Bipolar, 2.4),
            ],
            mode: ConstraintMode::Ppc,
            ..apc_cfg(linear_grid(14.0, 22.0, 2.0).unwrap(), 20_000)
        };
        let records = ngmi_sweep(&cfg).unwrap();
        assert_eq!(records.len(), 10);
        for r in &records {
            verify_record(r, 0.8).unwrap();
            assert!(r.error.is_none());
            assert_eq!(r.psnr_db, r.quality_db);
        }
        assert_eq!(records[0].modulation, "uniform-pam8");
        assert_eq!(records[9].quality_db, 22.0);
    }

    #[test]
    fn apc_ngmi_ordered_by_entropy() {
        let mods: Vec<_> = [2.2, 2.6, 3.0]
            .iter()
            .map(|&h| Modulation::shaped(Family::MaxwellBoltzmann, 8, Polarity::Bipolar, h))
            .collect();
        let cfg = SweepConfig {
            modulations: mods,
            ..apc_cfg(vec![8.0, 12.0, 16.0], 30_000)
        };
        let r = ngmi_sweep(&cfg).unwrap();
        for q in 0..3 {
            assert!(r[q].ngmi > r[3 + q].ngmi && r[3 + q].ngmi > r[6 + q].ngmi);
        }
    }

    #[test]
    fn threshold_is_monotone_in_target() {
        let m = Modulation::uniform(4, Polarity::Bipolar);
        let grid = linear_grid(4.0, 16.0, 1.0).unwrap();
        let t = |target| {
            threshold(
                &m,
                &SweepConfig {
                    ngmi_target: target,
                    ..apc_cfg(grid.clone(), 50_000)
                },
            )
            .unwrap()
            .threshold_db
        };
        let (a, b, c) = (t(0.7), t(0.8), t(0.9));
        assert!(a < b && b < c);
        assert!((b - 10.16).abs() < 0.1, "{b}");
    }

    #[test]
    fn threshold_without_crossing() {
        let m = Modulation::uniform(4, Polarity::Bipolar);
        let cfg = SweepConfig {
            ngmi_target: 0.999_999,
            ..apc_cfg(vec![4.0, 6.0, 8.0], 10_000)
        };
        assert!(matches!(threshold(&m, &cfg), Err(Error::NoCrossing { .. })));
        let cfg = SweepConfig {
            ngmi_target: 0.1,
            ..apc_cfg(vec![10.0, 12.0], 10_000)
        };
        assert!(matches!(threshold(&m, &cfg), Err(Error::NoCrossing { .. })));
    }

    #[test]
    fn rate_adaptation_is_non_decreasing() {
        let entropies = linear_grid(2.0, 3.0, 0.1).unwrap();
        let cfg = apc_cfg(linear_grid(5.0, 18.0, 1.0).unwrap(), 20_000);
        let curve =
            rate_adaptation_curve(Family::MaxwellBoltzmann, 8, Polarity::Bipolar, &entropies, &cfg).unwrap();
        let airs: Vec<f64> = curve.iter().filter_map(|p| p.air).collect();
        assert!(airs.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(curve.last().unwrap().entropy, Some(3.0));
        assert!(curve[0].entropy.is_none());
    }

    #[test]
    fn papr_vs_entropy_identity() {
        let a = PamAlphabet::unipolar(8, None).unwrap();
        let hs = [2.2, 2.6, 3.0];
        let rows = papr_vs_entropy(Family::AsymmetricMb, &a, &PulseShaper::none(), 1e-5, &hs, 15.0, 0, 0).unwrap();
        assert!(rows.windows(2).all(|w| w[0].papr_db > w[1].papr_db));
        for r in &rows {
            assert_eq!(r.papr_db + r.snr_db, 15.0);
        }
        let uniform = crate::metrics::papr_deterministic(&ShapedSource::uniform(a)).unwrap();
        assert_eq!(rows[2].papr_db, uniform.papr_db);
    }

    #[test]
    fn fit_examples() {
        let f = delta_relation_check(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 1.0).abs() < 1e-12);
        assert!(f.residuals.iter().all(|r| r.abs() < 1e-12));
        assert!(matches!(
            delta_relation_check(&[(1.0, 2.0), (1.0, 2.0)]),
            Err(Error::DegenerateFit(_))
        ));
        assert!(delta_relation_check(&[(1.0, 2.0)]).is_err());
    }

    #[test]
    fn scenario_ids() {
        assert_eq!(scenario_chain(4, 3.0), Err(Error::InvalidScenario(4)));
        let (s, m) = scenario_chain(3, 3.0).unwrap();
        assert_eq!((s.roll_off, s.tilt_db, m), (0.05, 8.0, ConstraintMode::ExtremePe));
        let (s, _) = scenario_chain(2, 4.5).unwrap();
        assert_eq!(s.tilt_db, 4.5);
    }

    #[test]
    fn sweep_is_independent_of_thread_count() {
        let cfg = SweepConfig {
            modulations: vec![Modulation::shaped(Family::MaxwellBoltzmann, 8, Polarity::Bipolar, 2.4)],
            ..apc_cfg(vec![8.0, 10.0, 12.0], 70_000)
        };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| ngmi_sweep(&cfg).unwrap())
        };
        assert_eq!(run(1), run(3));
    }
}
