//! TOML run configuration.
//!
//! All keys are optional and flat; quantities in dB carry a `_db` suffix.
//! Modulations are given either with the top-level `family`, `order`,
//! `polarity`, `bias` and `entropies` keys or as a `[[modulation]]` array.
//!
//! ```toml
//! seed = 7
//! samples = 1000000
//! constraint = "ppc"          # apc | ppc | extreme-pe
//! grid_start_db = 12.0
//! grid_stop_db = 30.0
//! grid_step_db = 1.0
//! filter = "rrc"              # none | rc | rrc
//! roll_off = 0.2
//!
//! [[modulation]]
//! family = "mb"               # uniform | mb | as-mb | r-mb
//! order = 8
//! entropies = [2.2, 2.6, 3.0]
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dsp::{FilterKind, PulseShaper, DEFAULT_OVERSAMPLING, DEFAULT_SPAN};
use crate::experiments::{linear_grid, ConstraintMode, Modulation, DEFAULT_ROLL_OFFS};
use crate::source::{Family, Polarity};

#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModulationEntry {
    pub family: Option<String>,
    pub order: Option<usize>,
    pub polarity: Option<String>,
    pub bias: Option<f64>,
    pub entropies: Option<Vec<f64>>,
}

/// Raw file contents.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub ngmi_target: Option<f64>,
    pub code_rate: Option<f64>,
    pub constraint: Option<String>,
    pub grid_start_db: Option<f64>,
    pub grid_stop_db: Option<f64>,
    pub grid_step_db: Option<f64>,
    pub clip_ratio: Option<f64>,
    pub calibration_samples: Option<usize>,
    pub filter: Option<String>,
    pub roll_off: Option<f64>,
    pub span: Option<usize>,
    pub oversampling: Option<usize>,
    pub tilt_db: Option<f64>,
    pub psnr_ref_db: Option<f64>,
    pub entropy_min: Option<f64>,
    pub entropy_step: Option<f64>,
    pub roll_offs: Option<Vec<f64>>,
    pub scenario: Option<u32>,
    pub weak_tilt_db: Option<f64>,
    pub family: Option<String>,
    pub order: Option<usize>,
    pub polarity: Option<String>,
    pub bias: Option<f64>,
    pub entropies: Option<Vec<f64>>,
    pub modulation: Option<Vec<ModulationEntry>>,
}

/// Validated configuration with defaults applied.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    pub seed: u64,
    pub samples: usize,
    pub ngmi_target: f64,
    pub code_rate: f64,
    pub constraint: ConstraintMode,
    /// Explicit grid, if all three grid keys were given.
    pub grid_db: Option<Vec<f64>>,
    pub clip_ratio: f64,
    pub calibration_samples: usize,
    pub shaper: PulseShaper,
    pub span: usize,
    pub oversampling: usize,
    pub psnr_ref_db: f64,
    pub entropy_min: Option<f64>,
    pub entropy_step: f64,
    pub roll_offs: Vec<f64>,
    pub scenario: Option<u32>,
    pub weak_tilt_db: f64,
    pub modulations: Vec<Modulation>,
}

impl Default for Settings {
    fn default() -> Self {
        Settings::from_file(ConfigFile::default()).expect("defaults are valid")
    }
}

fn parse_enum<T>(key: &str, value: &str, parse: fn(&str) -> Option<T>, allowed: &str) -> Result<T, String> {
    parse(value).ok_or_else(|| format!("{key}: unknown value \"{value}\", expected one of {allowed}"))
}

fn parse_polarity(s: &str) -> Option<Polarity> {
    match s {
        "bipolar" => Some(Polarity::Bipolar),
        "unipolar" => Some(Polarity::Unipolar),
        _ => None,
    }
}

impl Settings {
    /// Reads and validates a TOML file.
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| e.to_string())?;
        Self::from_file(file)
    }

    pub fn from_file(f: ConfigFile) -> Result<Self, String> {
        let mut problems = Vec::new();
        let ngmi_target = f.ngmi_target.unwrap_or(0.8);
        if !(ngmi_target > 0.0 && ngmi_target < 1.0) {
            problems.push(format!("ngmi_target must lie in (0, 1), got {ngmi_target}"));
        }
        let code_rate = f.code_rate.unwrap_or(0.8);
        if !(code_rate > 0.0 && code_rate <= 1.0) {
            problems.push(format!("code_rate must lie in (0, 1], got {code_rate}"));
        }
        let samples = f.samples.unwrap_or(1_000_000);
        if samples < crate::metrics::MIN_NGMI_SAMPLES {
            problems.push(format!("samples must be at least 10000, got {samples}"));
        }
        let clip_ratio = f.clip_ratio.unwrap_or(1e-5);
        if !(clip_ratio > 0.0 && clip_ratio <= 0.1) {
            problems.push(format!("clip_ratio must lie in (0, 0.1], got {clip_ratio}"));
        }
        let calibration_samples = f.calibration_samples.unwrap_or(10_000_000);
        let constraint = match &f.constraint {
            None => ConstraintMode::Apc,
            Some(s) => parse_enum("constraint", s, ConstraintMode::parse, "apc, ppc, extreme-pe")
                .unwrap_or_else(|e| {
                    problems.push(e);
                    ConstraintMode::Apc
                }),
        };
        let grid_db = match (f.grid_start_db, f.grid_stop_db, f.grid_step_db) {
            (None, None, None) => None,
            (Some(a), Some(b), Some(s)) => match linear_grid(a, b, s) {
                Ok(g) => Some(g),
                Err(e) => {
                    problems.push(format!("grid: {e}"));
                    None
                }
            },
            _ => {
                problems.push("grid_start_db, grid_stop_db and grid_step_db must be given together".into());
                None
            }
        };

        let kind = match &f.filter {
            None => FilterKind::None,
            Some(s) => parse_enum("filter", s, FilterKind::parse, "none, rc, rrc").unwrap_or_else(|e| {
                problems.push(e);
                FilterKind::None
            }),
        };
        let span = f.span.unwrap_or(DEFAULT_SPAN);
        let oversampling = f.oversampling.unwrap_or(DEFAULT_OVERSAMPLING);
        let roll_off = match (kind, f.roll_off) {
            (FilterKind::None, r) => r.unwrap_or(0.0),
            (_, Some(r)) => r,
            (k, None) => {
                problems.push(format!("filter \"{}\" needs roll_off", k.name()));
                1.0
            }
        };
        let shaper = match kind {
            FilterKind::None => PulseShaper::none(),
            FilterKind::RaisedCosine => PulseShaper::rc(roll_off),
            FilterKind::RootRaisedCosine => PulseShaper::rrc(roll_off),
        }
        .with_tilt(f.tilt_db.unwrap_or(0.0));
        let shaper = if kind == FilterKind::None {
            shaper
        } else {
            shaper.with_span(span).with_oversampling(oversampling)
        };
        // Span and oversampling also apply to presets that add their own filters.
        let probe = PulseShaper::rrc(0.5).with_span(span).with_oversampling(oversampling);
        for result in [shaper.validate(), probe.validate()] {
            if let Err(e) = result {
                problems.push(format!("filter: {e}"));
                break;
            }
        }

        let entropy_step = f.entropy_step.unwrap_or(0.05);
        if !(entropy_step > 0.0 && entropy_step <= 0.05 + 1e-12) {
            problems.push(format!("entropy_step must lie in (0, 0.05], got {entropy_step}"));
        }
        let roll_offs = f.roll_offs.clone().unwrap_or_else(|| DEFAULT_ROLL_OFFS.to_vec());
        if let Some(r) = roll_offs.iter().find(|r| !(**r > 0.0 && **r <= 1.0)) {
            problems.push(format!("roll_offs: {r} outside (0, 1]"));
        }
        if let Some(id) = f.scenario {
            if !(1..=3).contains(&id) {
                problems.push(format!("scenario must be 1, 2 or 3, got {id}"));
            }
        }
        let weak_tilt_db = f.weak_tilt_db.unwrap_or(3.0);
        if !(weak_tilt_db >= 0.0 && weak_tilt_db.is_finite()) {
            problems.push(format!("weak_tilt_db must be non-negative, got {weak_tilt_db}"));
        }

        let mut entries: Vec<ModulationEntry> = f.modulation.clone().unwrap_or_default();
        let top = ModulationEntry {
            family: f.family.clone(),
            order: f.order,
            polarity: f.polarity.clone(),
            bias: f.bias,
            entropies: f.entropies.clone(),
        };
        if top != ModulationEntry::default() {
            entries.insert(0, top);
        }
        let mut modulations = Vec::new();
        for (i, e) in entries.iter().enumerate() {
            match resolve_entry(e) {
                Ok(mut v) => modulations.append(&mut v),
                Err(msg) => problems.push(format!("modulation {}: {msg}", i + 1)),
            }
        }

        if !problems.is_empty() {
            return Err(problems.join("; "));
        }
        Ok(Settings {
            seed: f.seed.unwrap_or(1),
            samples,
            ngmi_target,
            code_rate,
            constraint,
            grid_db,
            clip_ratio,
            calibration_samples,
            shaper,
            span,
            oversampling,
            psnr_ref_db: f.psnr_ref_db.unwrap_or(15.0),
            entropy_min: f.entropy_min,
            entropy_step,
            roll_offs,
            scenario: f.scenario,
            weak_tilt_db,
            modulations,
        })
    }
}

/// Expands one entry to a modulation per entropy, checking each source.
fn resolve_entry(e: &ModulationEntry) -> Result<Vec<Modulation>, String> {
    let family = match e.family.as_deref() {
        None => Family::Uniform,
        Some(s) => parse_enum("family", s, Family::parse, "uniform, mb, as-mb, r-mb")?,
    };
    let order = e.order.unwrap_or(8);
    let default_polarity = if family == Family::AsymmetricMb {
        Polarity::Unipolar
    } else {
        Polarity::Bipolar
    };
    let polarity = match e.polarity.as_deref() {
        None => default_polarity,
        Some(s) => parse_enum("polarity", s, parse_polarity, "bipolar, unipolar")?,
    };
    if !(2..=64).contains(&order) || !order.is_power_of_two() {
        return Err(format!("order {order} is not a power of two in [2, 64]"));
    }
    let m = (order as f64).log2();
    let entropies = match (&e.entropies, family) {
        (Some(v), _) if v.is_empty() => return Err("entropies is empty".into()),
        (Some(v), _) => v.clone(),
        (None, Family::Uniform) => vec![m],
        (None, _) => (0..5).rev().map(|k| m - 0.2 * k as f64).map(|h| (h * 1e9).round() / 1e9).collect(),
    };
    entropies
        .iter()
        .map(|&h| {
            let md = Modulation {
                bias: e.bias,
                ..if family == Family::Uniform {
                    Modulation {
                        entropy: h,
                        ..Modulation::uniform(order, polarity)
                    }
                } else {
                    Modulation::shaped(family, order, polarity, h)
                }
            };
            md.source().map_err(|err| err.to_string())?;
            Ok(md)
        })
        .collect()
}
