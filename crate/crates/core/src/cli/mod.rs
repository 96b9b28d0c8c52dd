//! Command-line front end.
//!
//! Every invocation writes its outputs and a `manifest.json` into the `--out`
//! directory; the manifest is written even when the command fails. Exit
//! codes: 0 on success, 2 for configuration errors, 3 for runtime errors
//! such as a threshold that is never crossed.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::channel::{transmitter_papr, transmitter_waveform};
use crate::dsp::{histogram, PulseShaper};
use crate::error::Error;
use crate::experiments::{
    delta_relation_sweep, linear_grid, ngmi_sweep, papr_vs_entropy, rate_adaptation_curve, roll_off_shapers,
    scenario, threshold, ConstraintMode, Modulation, SweepConfig, SweepRecord,
};
use crate::metrics::{papr_deterministic, CcdfTable};
use crate::source::{Family, PamAlphabet, Polarity, ShapedSource};

pub use config::Settings;
use output::{LinePlot, OutDir, RunManifest, Series, Table};

pub const WORKERS_ENV: &str = "PCS_IMDD_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "pcs-imdd", version, about = "Probabilistic shaping under peak-power constraints")]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Master seed; overrides the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; does not change any output.
    #[arg(long, global = true, env = WORKERS_ENV)]
    pub workers: Option<usize>,
    /// Skip SVG plots.
    #[arg(long, global = true)]
    pub no_plots: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Symbol distributions of the configured modulations.
    Dist,
    /// Transmitter PAPR of the configured modulations.
    Papr,
    /// Power CCDF of the transmitted signal.
    Ccdf,
    /// NGMI over the configured grid.
    Sweep,
    /// NGMI threshold crossing per modulation.
    Threshold,
    /// Best AIR versus channel quality for the first modulation's family.
    RateAdapt,
    /// ΔPSNR* against ΔPAPR across roll-off factors.
    DeltaCheck,
    /// One of the three band-limitation scenarios.
    Scenario {
        /// 1, 2 or 3; defaults to the `scenario` key.
        id: Option<u32>,
    },
    /// Figure preset.
    Fig {
        #[arg(value_parser = ["1", "3c", "3d", "4a", "4b", "4c", "5", "6c", "7"])]
        id: String,
    },
    /// Filter taps of the configured pulse.
    Taps,
}

impl Command {
    fn name(&self) -> String {
        match self {
            Command::Dist => "dist".into(),
            Command::Papr => "papr".into(),
            Command::Ccdf => "ccdf".into(),
            Command::Sweep => "sweep".into(),
            Command::Threshold => "threshold".into(),
            Command::RateAdapt => "rate-adapt".into(),
            Command::DeltaCheck => "delta-check".into(),
            Command::Scenario { id } => format!("scenario {}", id.map_or(String::new(), |i| i.to_string())),
            Command::Fig { id } => format!("fig {id}"),
            Command::Taps => "taps".into(),
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Runtime(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("i/o: {e}"))
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let argv: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    execute(cli, argv)
}

fn execute(cli: Cli, argv: Vec<String>) -> i32 {
    let start = Instant::now();
    let workers = cli
        .workers
        .filter(|w| *w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let settings = match &cli.config {
        Some(path) => Settings::load(path).map_err(CliError::Config),
        None => Ok(Settings::default()),
    };
    let settings = settings.map(|mut s| {
        if let Some(seed) = cli.seed {
            s.seed = seed;
        }
        s
    });

    let mut out = match OutDir::create(&cli.out, !cli.no_plots) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: cannot create {}: {e}", cli.out.display());
            return 3;
        }
    };

    let result = match &settings {
        Ok(s) => rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| CliError::Runtime(e.to_string()))
            .and_then(|pool| pool.install(|| dispatch(&cli.command, s, &mut out))),
        Err(e) => Err(CliError::Config(e.message().to_string())),
    };

    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: if argv.is_empty() { vec![cli.command.name()] } else { argv },
        seed: settings.as_ref().map_or(cli.seed.unwrap_or(0), |s| s.seed),
        workers,
        config: settings
            .as_ref()
            .ok()
            .and_then(|s| serde_json::to_value(s).ok())
            .unwrap_or(serde_json::Value::Null),
        outputs: out.entries.clone(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        error: result.as_ref().err().map(|e| e.message().to_string()),
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
    if let Err(e) = std::fs::write(out.root().join("manifest.json"), json + "\n") {
        eprintln!("error: cannot write manifest: {e}");
    }
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

fn dispatch(command: &Command, s: &Settings, out: &mut OutDir) -> CliResult<()> {
    match command {
        Command::Dist => cmd_dist(s, out),
        Command::Papr => cmd_papr(s, out),
        Command::Ccdf => cmd_ccdf(s, out),
        Command::Sweep => cmd_sweep(s, out),
        Command::Threshold => cmd_threshold(s, out),
        Command::RateAdapt => cmd_rate_adapt(s, out),
        Command::DeltaCheck => cmd_delta(s, out, "delta"),
        Command::Scenario { id } => {
            let id = id
                .or(s.scenario)
                .ok_or_else(|| CliError::Config("scenario id missing: pass it or set `scenario`".into()))?;
            if !(1..=3).contains(&id) {
                return Err(CliError::Config(format!("scenario must be 1, 2 or 3, got {id}")));
            }
            cmd_scenario(id, s, out)
        }
        Command::Fig { id } => cmd_fig(id, s, out),
        Command::Taps => cmd_taps(s, out),
    }
}

// ---------------------------------------------------------------------------
// Shared helpers

fn modulations_or_default(s: &Settings) -> Vec<Modulation> {
    if s.modulations.is_empty() {
        vec![Modulation::uniform(8, Polarity::Bipolar)]
    } else {
        s.modulations.clone()
    }
}

fn require_grid(s: &Settings) -> CliResult<Vec<f64>> {
    s.grid_db
        .clone()
        .ok_or_else(|| CliError::Config("grid_start_db, grid_stop_db and grid_step_db are required".into()))
}

fn grid_or(s: &Settings, start: f64, stop: f64, step: f64) -> Vec<f64> {
    s.grid_db
        .clone()
        .unwrap_or_else(|| linear_grid(start, stop, step).expect("preset grid"))
}

fn sweep_config(s: &Settings, modulations: Vec<Modulation>, mode: ConstraintMode, shaper: PulseShaper, grid: Vec<f64>) -> SweepConfig {
    SweepConfig {
        modulations,
        shaper,
        mode,
        grid_db: grid,
        ngmi_target: s.ngmi_target,
        code_rate: s.code_rate,
        samples: s.samples,
        clip_ratio: s.clip_ratio,
        calibration_samples: s.calibration_samples,
        seed: s.seed,
        reference_papr_db: None,
    }
}

fn rrc(s: &Settings, roll_off: f64) -> PulseShaper {
    PulseShaper::rrc(roll_off).with_span(s.span).with_oversampling(s.oversampling)
}

fn entropy_grid(min: f64, max: f64, step: f64) -> CliResult<Vec<f64>> {
    linear_grid(min, max, step).map_err(|e| CliError::Config(e.to_string()))
}

fn mb8(h: f64) -> Modulation {
    Modulation::shaped(Family::MaxwellBoltzmann, 8, Polarity::Bipolar, h)
}

const FIG_ENTROPIES: [f64; 5] = [2.2, 2.4, 2.6, 2.8, 3.0];

fn fig_modulations(family: Family, polarity: Polarity) -> Vec<Modulation> {
    FIG_ENTROPIES
        .iter()
        .map(|&h| {
            if h == 3.0 {
                Modulation::uniform(8, polarity)
            } else {
                Modulation::shaped(family, 8, polarity, h)
            }
        })
        .collect()
}

fn record_table(records: &[SweepRecord]) -> Table {
    let mut t = Table::new(&[
        "modulation",
        "family",
        "order",
        "polarity",
        "entropy",
        "filter",
        "constraint",
        "quality_db",
        "snr_db",
        "psnr_db",
        "papr_db",
        "ngmi",
        "gmi",
        "ngmi_std_error",
        "gmi_std_error",
        "air",
        "seed",
        "samples",
        "error",
    ]);
    for r in records {
        t.push(vec![
            r.modulation.clone().into(),
            r.family.name().into(),
            r.order.into(),
            r.polarity.name().into(),
            r.entropy.into(),
            r.filter.clone().into(),
            r.constraint.name().into(),
            r.quality_db.into(),
            r.snr_db.into(),
            r.psnr_db.into(),
            r.papr_db.into(),
            r.ngmi.into(),
            r.gmi.into(),
            r.ngmi_std_error.into(),
            r.gmi_std_error.into(),
            r.air.into(),
            r.seed.into(),
            r.samples.into(),
            r.error.clone().unwrap_or_default().into(),
        ]);
    }
    t
}

fn check_records(records: &[SweepRecord], code_rate: f64) -> CliResult<()> {
    for r in records {
        crate::experiments::verify_record(r, code_rate)?;
    }
    Ok(())
}

/// NGMI curves grouped by series key, in first-seen order.
fn curve_plot(title: &str, x_label: &str, records: &[SweepRecord], key: impl Fn(&SweepRecord) -> String) -> LinePlot {
    let mut series: Vec<Series> = Vec::new();
    for r in records {
        let name = key(r);
        match series.iter_mut().find(|s| s.name == name) {
            Some(s) => s.points.push((r.quality_db, r.ngmi)),
            None => series.push(Series {
                name,
                points: vec![(r.quality_db, r.ngmi)],
            }),
        }
    }
    LinePlot {
        title: title.into(),
        x_label: x_label.into(),
        y_label: "NGMI".into(),
        log_y: false,
        series,
    }
}

fn axis_label(mode: ConstraintMode) -> &'static str {
    match mode {
        ConstraintMode::Apc => "SNR (dB)",
        _ => "PSNR (dB)",
    }
}

// ---------------------------------------------------------------------------
// Commands

fn cmd_dist(s: &Settings, out: &mut OutDir) -> CliResult<()> {
    let mut series = Vec::new();
    for m in modulations_or_default(s) {
        let src = m.source()?;
        let a = src.alphabet();
        let mut t = Table::new(&["level", "probability", "label_bits"]);
        for (k, p) in src.distribution().probabilities().iter().enumerate() {
            t.push(vec![a.levels()[k].into(), (*p).into(), a.label_string(k).into()]);
        }
        out.table(&format!("dist_{}.csv", m.label()), &t)?;
        series.push(Series {
            name: m.label(),
            points: a.levels().iter().copied().zip(src.distribution().probabilities().iter().copied()).collect(),
        });
    }
    out.plot(
        "dist.svg",
        &LinePlot {
            title: "Symbol distributions".into(),
            x_label: "level".into(),
            y_label: "probability".into(),
            log_y: false,
            series,
        },
    )?;
    Ok(())
}

fn cmd_papr(s: &Settings, out: &mut OutDir) -> CliResult<()> {
    let mut t = Table::new(&[
        "modulation",
        "entropy",
        "filter",
        "clip_ratio",
        "clip_power",
        "mean_power",
        "papr_db",
        "papr_peak_db",
    ]);
    for m in modulations_or_default(s) {
        let src = m.source()?;
        let r = transmitter_papr(&src, &s.shaper, s.clip_ratio, s.calibration_samples, s.seed)?;
        let peak = papr_deterministic(&src)?;
        t.push(vec![
            m.label().into(),
            m.entropy.into(),
            s.shaper.label().into(),
            r.clip_ratio.into(),
            r.clip_power.into(),
            r.mean_power.into(),
            r.papr_db.into(),
            peak.papr_db.into(),
        ]);
    }
    out.table("papr.csv", &t)?;
    Ok(())
}

fn ccdf_table(src: &ShapedSource, shaper: &PulseShaper, s: &Settings) -> CliResult<CcdfTable> {
    if shaper.is_none() && shaper.tilt_db == 0.0 {
        Ok(CcdfTable::exact(src))
    } else {
        let w = transmitter_waveform(src, shaper, s.calibration_samples, s.seed)?;
        Ok(CcdfTable::empirical(&w.samples, s.clip_ratio)?)
    }
}

fn ccdf_rows(table: &CcdfTable) -> Vec<(f64, f64)> {
    table
        .thresholds
        .iter()
        .zip(&table.probabilities)
        .filter(|(x, _)| **x > 0.0)
        .map(|(x, p)| (10.0 * (x / table.mean_power).log10(), *p))
        .collect()
}

fn cmd_ccdf(s: &Settings, out: &mut OutDir) -> CliResult<()> {
    let mut series = Vec::new();
    for m in modulations_or_default(s) {
        let table = ccdf_table(&m.source()?, &s.shaper, s)?;
        let mut t = Table::new(&["power_db", "ccdf"]);
        let rows = ccdf_rows(&table);
        for (db, p) in &rows {
            t.push(vec![(*db).into(), (*p).into()]);
        }
        out.table(&format!("ccdf_{}.csv", m.label()), &t)?;
        series.push(Series {
            name: m.label(),
            points: rows,
        });
    }
    out.plot(
        "ccdf.svg",
        &LinePlot {
            title: format!("Power CCDF, {}", s.shaper.label()),
            x_label: "power relative to mean (dB)".into(),
            y_label: "CCDF".into(),
            log_y: true,
            series,
        },
    )?;
    Ok(())
}

fn cmd_taps(s: &Settings, out: &mut OutDir) -> CliResult<()> {
    if s.shaper.is_none() {
        return Err(CliError::Config("taps needs filter = \"rc\" or \"rrc\"".into()));
    }
    let taps = s.shaper.taps()?;
    let half = (taps.len() / 2) as f64;
    let l = s.shaper.oversampling as f64;
    let mut t = Table::new(&["index", "time", "tap"]);
    let mut pts = Vec::new();
    for (k, h) in taps.iter().enumerate() {
        let time = (k as f64 - half) / l;
        t.push(vec![k.into(), time.into(), (*h).into()]);
        pts.push((time, *h));
    }
    out.table("taps.csv", &t)?;
    out.plot(
        "taps.svg",
        &LinePlot {
            title: format!("Taps, {}", s.shaper.label()),
            x_label: "time (symbols)".into(),
            y_label: "amplitude".into(),
            log_y: false,
            series: vec![Series {
                name: s.shaper.label(),
                points: pts,
            }],
        },
    )?;
    Ok(())
}

fn cmd_sweep(s: &Settings, out: &mut OutDir) -> CliResult<()> {
    if s.modulations.is_empty() {
        return Err(CliError::Config("sweep needs at least one modulation".into()));
    }
    let cfg = sweep_config(s, s.modulations.clone(), s.constraint, s.shaper, require_grid(s)?);
    let records = ngmi_sweep(&cfg)?;
    check_records(&records, s.code_rate)?;
    out.table("sweep.csv", &record_table(&records))?;
    out.plot("sweep.svg", &curve_plot("NGMI", axis_label(s.constraint), &records, |r| r.modulation.clone()))?;
    Ok(())
}

fn cmd_threshold(s: &Settings, out: &mut OutDir) -> CliResult<()> {
    if s.modulations.is_empty() {
        return Err(CliError::Config("threshold needs at least one modulation".into()));
    }
    let cfg = sweep_config(s, s.modulations.clone(), s.constraint, s.shaper, require_grid(s)?);
    let mut t = Table::new(&[
        "modulation",
        "entropy",
        "filter",
        "constraint",
        "ngmi_target",
        "threshold_db",
        "snr_star_db",
        "psnr_star_db",
        "papr_db",
    ]);
    let mut failure = None;
    for m in &s.modulations {
        match threshold(m, &cfg) {
            Ok(r) => t.push(vec![
                r.modulation.into(),
                r.entropy.into(),
                r.filter.into(),
                r.constraint.name().into(),
                r.ngmi_target.into(),
                r.threshold_db.into(),
                r.snr_star_db.into(),
                r.psnr_star_db.into(),
                r.papr_db.into(),
            ]),
            Err(e) => {
                failure.get_or_insert(format!("{}: {e}", m.label()));
            }
        }
    }
    out.table("thresholds.csv", &t)?;
    match failure {
        Some(msg) => Err(CliError::Runtime(msg)),
        None => Ok(()),
    }
}

fn rate_entropies(s: &Settings, family: Family, order: usize, default_min: f64) -> CliResult<Vec<f64>> {
    let max = (order as f64).log2();
    let min = s.entropy_min.unwrap_or(default_min);
    let lo = match family {
        Family::AsymmetricMb => 0.0,
        _ => 1.0,
    };
    if !(min > lo && min <= max) {
        return Err(CliError::Config(format!("entropy_min {min} outside ({lo}, {max}]")));
    }
    let mut grid = entropy_grid(min, max, s.entropy_step)?;
    if (grid[grid.len() - 1] - max).abs() > 1e-9 {
        grid.push(max);
    }
    Ok(grid)
}

fn rate_table(points: &[crate::experiments::RatePoint]) -> Table {
    let mut t = Table::new(&["quality_db", "entropy", "air"]);
    for p in points {
        t.push(vec![p.quality_db.into(), p.entropy.into(), p.air.into()]);
    }
    t
}

fn cmd_rate_adapt(s: &Settings, out: &mut OutDir) -> CliResult<()> {
    let first = s
        .modulations
        .iter()
        .find(|m| m.family != Family::Uniform)
        .copied()
        .unwrap_or_else(|| mb8(2.2));
    let grid = require_grid(s)?;
    let entropies = rate_entropies(s, first.family, first.order, (first.order as f64).log2() - 1.0)?;
    let cfg = sweep_config(s, vec![], s.constraint, s.shaper, grid);
    let points = rate_adaptation_curve(first.family, first.order, first.polarity, &entropies, &cfg)?;
    out.table("rate_adapt.csv", &rate_table(&points))?;
    out.plot(
        "rate_adapt.svg",
        &LinePlot {
            title: "Rate adaptation".into(),
            x_label: axis_label(s.constraint).into(),
            y_label: "AIR (bit/symbol)".into(),
            log_y: false,
            series: vec![Series {
                name: format!("{}-pam{}", first.family.name(), first.order),
                points: points.iter().filter_map(|p| p.air.map(|a| (p.quality_db, a))).collect(),
            }],
        },
    )?;
    Ok(())
}

fn cmd_delta(s: &Settings, out: &mut OutDir, prefix: &str) -> CliResult<()> {
    let shaped = s
        .modulations
        .iter()
        .find(|m| m.family != Family::Uniform)
        .copied()
        .unwrap_or_else(|| mb8(2.2));
    let reference = Modulation {
        bias: shaped.bias,
        ..Modulation::uniform(shaped.order, shaped.polarity)
    };
    let shapers = roll_off_shapers(&s.roll_offs, s.span, s.oversampling);
    let cfg = sweep_config(s, vec![], ConstraintMode::Ppc, PulseShaper::none(), grid_or(s, 14.0, 30.0, 1.0));
    let report = delta_relation_sweep(reference, shaped, &shapers, &cfg)?;
    check_records(&report.curves, s.code_rate)?;

    let mut curves = Table::new(&["filter", "modulation", "entropy", "psnr_db", "snr_db", "papr_db", "ngmi"]);
    for r in &report.curves {
        curves.push(vec![
            r.filter.clone().into(),
            r.modulation.clone().into(),
            r.entropy.into(),
            r.psnr_db.into(),
            r.snr_db.into(),
            r.papr_db.into(),
            r.ngmi.into(),
        ]);
    }
    out.table(&format!("{prefix}_curves.csv"), &curves)?;

    let mut delta = Table::new(&[
        "filter",
        "papr_reference_db",
        "papr_shaped_db",
        "psnr_star_reference_db",
        "psnr_star_shaped_db",
        "delta_papr_db",
        "delta_psnr_star_db",
    ]);
    for f in &report.filters {
        let (dp, ds) = f.delta();
        delta.push(vec![
            f.filter.clone().into(),
            f.reference.papr_db.into(),
            f.shaped.papr_db.into(),
            f.reference.psnr_star_db.into(),
            f.shaped.psnr_star_db.into(),
            dp.into(),
            ds.into(),
        ]);
    }
    out.table(&format!("{prefix}_delta.csv"), &delta)?;

    let mut fit = Table::new(&["series", "slope", "intercept_db", "max_abs_residual_db", "points"]);
    for (name, f) in [
        (reference.label(), &report.reference_fit),
        (shaped.label(), &report.shaped_fit),
        (format!("{}-vs-{}", shaped.label(), reference.label()), &report.cross_fit),
    ] {
        let worst = f.residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        fit.push(vec![name.into(), f.slope.into(), f.intercept.into(), worst.into(), f.points.len().into()]);
    }
    out.table(&format!("{prefix}_fit.csv"), &fit)?;

    out.plot(
        &format!("{prefix}_curves.svg"),
        &curve_plot("NGMI across transmit filters", "PSNR (dB)", &report.curves, |r| {
            format!("{} {}", r.modulation, r.filter)
        }),
    )?;
    let fit_series = |name: String, f: &crate::experiments::LinearFit| Series { name, points: f.points.clone() };
    out.plot(
        &format!("{prefix}_delta.svg"),
        &LinePlot {
            title: "ΔPSNR* against ΔPAPR".into(),
            x_label: "ΔPAPR (dB)".into(),
            y_label: "ΔPSNR* (dB)".into(),
            log_y: false,
            series: vec![
                fit_series(reference.label(), &report.reference_fit),
                fit_series(shaped.label(), &report.shaped_fit),
                fit_series("cross".into(), &report.cross_fit),
            ],
        },
    )?;
    Ok(())
}

fn cmd_scenario(id: u32, s: &Settings, out: &mut OutDir) -> CliResult<()> {
    let mut entropies: Vec<f64> = s
        .modulations
        .iter()
        .filter(|m| m.family == Family::MaxwellBoltzmann && m.order == 8 && m.entropy < 3.0)
        .map(|m| m.entropy)
        .collect();
    if entropies.is_empty() {
        entropies = vec![2.2, 2.4, 2.6, 2.8];
    }
    let base = PulseShaper::none().with_span(s.span).with_oversampling(s.oversampling);
    let cfg = sweep_config(s, vec![], ConstraintMode::Ppc, base, grid_or(s, 10.0, 32.0, 1.0));
    let report = scenario(id, s.weak_tilt_db, &entropies, &cfg)?;
    check_records(&report.curves, s.code_rate)?;

    let mut curves = Table::new(&["modulation", "entropy", "psnr_db", "snr_db", "papr_db", "ngmi"]);
    for r in &report.curves {
        curves.push(vec![
            r.modulation.clone().into(),
            r.entropy.into(),
            r.psnr_db.into(),
            r.snr_db.into(),
            r.papr_db.into(),
            r.ngmi.into(),
        ]);
    }
    out.table(&format!("scenario{id}_curves.csv"), &curves)?;

    let mut th = Table::new(&["modulation", "entropy", "papr_db", "snr_star_db", "psnr_star_db"]);
    for t in &report.thresholds {
        th.push(vec![
            t.modulation.clone().into(),
            t.entropy.into(),
            t.papr_db.into(),
            t.snr_star_db.into(),
            t.psnr_star_db.into(),
        ]);
    }
    out.table(&format!("scenario{id}_thresholds.csv"), &th)?;

    let mut summary = Table::new(&["quantity", "value"]);
    for (k, v) in [
        ("delta_papr_db", report.delta_papr_db),
        ("delta_snr_star_db", report.delta_snr_star_db),
        ("delta_psnr_star_db", report.delta_psnr_star_db),
        ("range_db", report.range_db),
        ("rop_range_db", report.rop_range_db),
    ] {
        summary.push(vec![k.into(), v.into()]);
    }
    out.table(&format!("scenario{id}_summary.csv"), &summary)?;
    out.plot(
        &format!("scenario{id}.svg"),
        &curve_plot(&format!("Scenario {id}, {}", report.shaper.label()), "PSNR (dB)", &report.curves, |r| {
            r.modulation.clone()
        }),
    )?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Figure presets

fn cmd_fig(id: &str, s: &Settings, out: &mut OutDir) -> CliResult<()> {
    match id {
        "1" => fig1(s, out),
        "3c" => fig3c(s, out),
        "3d" => fig3d(s, out),
        "4a" => fig4(s, out, "4a", Family::AsymmetricMb, Polarity::Unipolar, grid_or(s, 14.0, 34.0, 1.0)),
        "4b" => fig4(s, out, "4b", Family::MaxwellBoltzmann, Polarity::Bipolar, grid_or(s, 8.0, 28.0, 1.0)),
        "4c" => fig4(s, out, "4c", Family::ReverseMb, Polarity::Bipolar, grid_or(s, 8.0, 28.0, 1.0)),
        "5" => fig5(s, out),
        "6c" => fig6c(s, out),
        "7" => cmd_delta(s, out, "fig7"),
        other => Err(CliError::Config(format!("unknown figure {other}"))),
    }
}

fn fig1(s: &Settings, out: &mut OutDir) -> CliResult<()> {
    let grid = grid_or(s, 0.0, 24.0, 0.5);
    let mut mods = vec![Modulation::uniform(4, Polarity::Bipolar)];
    mods.extend([2.0, 2.2, 2.4, 2.6, 2.8].map(mb8));
    mods.push(Modulation::uniform(8, Polarity::Bipolar));
    let cfg = sweep_config(s, mods, ConstraintMode::Apc, PulseShaper::none(), grid.clone());
    let records = ngmi_sweep(&cfg)?;
    check_records(&records, s.code_rate)?;
    let mut t = Table::new(&["snr_db", "modulation", "entropy", "ngmi"]);
    for r in &records {
        t.push(vec![r.snr_db.into(), r.modulation.clone().into(), r.entropy.into(), r.ngmi.into()]);
    }
    out.table("fig1.csv", &t)?;
    out.plot("fig1.svg", &curve_plot("NGMI under APC", "SNR (dB)", &records, |r| r.modulation.clone()))?;

    let entropies = rate_entropies(s, Family::MaxwellBoltzmann, 8, 2.0)?;
    let rate_cfg = sweep_config(s, vec![], ConstraintMode::Apc, PulseShaper::none(), grid);
    let pcs = rate_adaptation_curve(Family::MaxwellBoltzmann, 8, Polarity::Bipolar, &entropies, &rate_cfg)?;
    let pam4 = rate_adaptation_curve(Family::Uniform, 4, Polarity::Bipolar, &[2.0], &rate_cfg)?;
    let mut inset = Table::new(&["snr_db", "entropy_pcs_pam8", "air_pcs_pam8", "air_pam4"]);
    for (p, q) in pcs.iter().zip(&pam4) {
        inset.push(vec![p.quality_db.into(), p.entropy.into(), p.air.into(), q.air.into()]);
    }
    out.table("fig1_inset.csv", &inset)?;
    let series = |name: &str, pts: &[crate::experiments::RatePoint]| Series {
        name: name.into(),
        points: pts.iter().filter_map(|p| p.air.map(|a| (p.quality_db, a))).collect(),
    };
    out.plot(
        "fig1_inset.svg",
        &LinePlot {
            title: "Rate adaptation under APC".into(),
            x_label: "SNR (dB)".into(),
            y_label: "AIR (bit/symbol)".into(),
            log_y: false,
            series: vec![series("PCS PAM-8", &pcs), series("PAM-4", &pam4)],
        },
    )?;
    Ok(())
}

fn fig3c(s: &Settings, out: &mut OutDir) -> CliResult<()> {
    let alphabet = PamAlphabet::unipolar(8, Some(7.0))?;
    let entropies = rate_entropies(s, Family::AsymmetricMb, 8, 1.0)?;
    let rows = papr_vs_entropy(
        Family::AsymmetricMb,
        &alphabet,
        &PulseShaper::none(),
        s.clip_ratio,
        &entropies,
        s.psnr_ref_db,
        s.calibration_samples,
        s.seed,
    )?;
    let mut t = Table::new(&["entropy", "papr_db", "snr_db"]);
    for r in &rows {
        t.push(vec![r.entropy.into(), r.papr_db.into(), r.snr_db.into()]);
    }
    out.table("fig3c.csv", &t)?;
    out.plot(
        "fig3c.svg",
        &LinePlot {
            title: format!("AS-MB unipolar PAM-8 at PSNR {} dB", s.psnr_ref_db),
            x_label: "H(X) (bit/symbol)".into(),
            y_label: "dB".into(),
            log_y: false,
            series: vec![
                Series {
                    name: "PAPR".into(),
                    points: rows.iter().map(|r| (r.entropy, r.papr_db)).collect(),
                },
                Series {
                    name: "SNR".into(),
                    points: rows.iter().map(|r| (r.entropy, r.snr_db)).collect(),
                },
            ],
        },
    )?;
    Ok(())
}

fn fig3d(s: &Settings, out: &mut OutDir) -> CliResult<()> {
    let alphabet = PamAlphabet::unipolar(8, Some(7.0))?;
    let entropies = rate_entropies(s, Family::MaxwellBoltzmann, 8, 1.2)?;
    let mut t = Table::new(&["entropy", "mean_intensity_mb", "mean_intensity_asmb"]);
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for &h in &entropies {
        let source = |family| -> CliResult<ShapedSource> {
            Ok(if h == 3.0 {
                ShapedSource::uniform(alphabet.clone())
            } else {
                ShapedSource::with_entropy(alphabet.clone(), family, h)?
            })
        };
        let mb = source(Family::MaxwellBoltzmann)?.mean_intensity()?;
        let asmb = source(Family::AsymmetricMb)?.mean_intensity()?;
        t.push(vec![h.into(), mb.into(), asmb.into()]);
        a.push((h, mb));
        b.push((h, asmb));
    }
    out.table("fig3d.csv", &t)?;
    out.plot(
        "fig3d.svg",
        &LinePlot {
            title: "Mean intensity of unipolar PAM-8".into(),
            x_label: "H(X) (bit/symbol)".into(),
            y_label: "mean intensity".into(),
            log_y: false,
            series: vec![
                Series { name: "MB".into(), points: a },
                Series { name: "AS-MB".into(), points: b },
            ],
        },
    )?;
    Ok(())
}

fn fig4(s: &Settings, out: &mut OutDir, id: &str, family: Family, polarity: Polarity, grid: Vec<f64>) -> CliResult<()> {
    let cfg = sweep_config(s, fig_modulations(family, polarity), ConstraintMode::Ppc, PulseShaper::none(), grid);
    let records = ngmi_sweep(&cfg)?;
    check_records(&records, s.code_rate)?;
    let mut t = Table::new(&["psnr_db", "entropy", "ngmi"]);
    for r in &records {
        t.push(vec![r.psnr_db.into(), r.entropy.into(), r.ngmi.into()]);
    }
    out.table(&format!("fig{id}.csv"), &t)?;
    out.plot(
        &format!("fig{id}.svg"),
        &curve_plot(&format!("{} PAM-8 under PPC", family.name()), "PSNR (dB)", &records, |r| {
            format!("H = {}", r.entropy)
        }),
    )?;
    Ok(())
}

fn fig5(s: &Settings, out: &mut OutDir) -> CliResult<()> {
    let mods = [Modulation::uniform(8, Polarity::Bipolar), mb8(2.2)];
    let shapers = [PulseShaper::none(), rrc(s, 0.01), rrc(s, 0.4)];
    let mut ccdf = Table::new(&["series", "power_db", "ccdf"]);
    let mut pdf = Table::new(&["series", "amplitude", "density"]);
    let mut ccdf_series = Vec::new();
    let mut pdf_series = Vec::new();
    for m in &mods {
        let src = m.source()?;
        for sh in &shapers {
            let name = format!("{} {}", m.label(), sh.label());
            let w = transmitter_waveform(&src, sh, s.calibration_samples, s.seed)?;
            let table = if sh.is_none() {
                CcdfTable::exact(&src)
            } else {
                CcdfTable::empirical(&w.samples, s.clip_ratio)?
            };
            let rows = ccdf_rows(&table);
            for (db, p) in &rows {
                ccdf.push(vec![name.clone().into(), (*db).into(), (*p).into()]);
            }
            let rms = w.average_power().sqrt();
            let normalised: Vec<f64> = w.samples.iter().map(|v| v / rms).collect();
            let (centres, density) = histogram(&normalised, -4.0, 4.0, 160);
            for (c, d) in centres.iter().zip(&density) {
                pdf.push(vec![name.clone().into(), (*c).into(), (*d).into()]);
            }
            ccdf_series.push(Series { name: name.clone(), points: rows });
            pdf_series.push(Series {
                name,
                points: centres.into_iter().zip(density).collect(),
            });
        }
    }
    out.table("fig5.csv", &ccdf)?;
    out.table("fig5_pdf.csv", &pdf)?;
    out.plot(
        "fig5.svg",
        &LinePlot {
            title: "Power CCDF".into(),
            x_label: "power relative to mean (dB)".into(),
            y_label: "CCDF".into(),
            log_y: true,
            series: ccdf_series,
        },
    )?;
    out.plot(
        "fig5_pdf.svg",
        &LinePlot {
            title: "Amplitude density".into(),
            x_label: "amplitude / rms".into(),
            y_label: "density".into(),
            log_y: false,
            series: pdf_series,
        },
    )?;
    Ok(())
}

fn fig6c(s: &Settings, out: &mut OutDir) -> CliResult<()> {
    let alphabet = PamAlphabet::bipolar(8)?;
    let entropies = rate_entropies(s, Family::MaxwellBoltzmann, 8, 2.0)?;
    let mut t = Table::new(&["filter", "entropy", "papr_db", "snr_db"]);
    let mut papr_series = Vec::new();
    for sh in [PulseShaper::none(), rrc(s, 0.01), rrc(s, 0.4)] {
        let rows = papr_vs_entropy(
            Family::MaxwellBoltzmann,
            &alphabet,
            &sh,
            s.clip_ratio,
            &entropies,
            s.psnr_ref_db,
            s.calibration_samples,
            s.seed,
        )?;
        for r in &rows {
            t.push(vec![sh.label().into(), r.entropy.into(), r.papr_db.into(), r.snr_db.into()]);
        }
        papr_series.push(Series {
            name: sh.label(),
            points: rows.iter().map(|r| (r.entropy, r.snr_db)).collect(),
        });
    }
    out.table("fig6c.csv", &t)?;
    out.plot(
        "fig6c.svg",
        &LinePlot {
            title: format!("SNR at PSNR {} dB, MB PAM-8", s.psnr_ref_db),
            x_label: "H(X) (bit/symbol)".into(),
            y_label: "SNR (dB)".into(),
            log_y: false,
            series: papr_series,
        },
    )?;
    Ok(())
}
