use std::fs;
use std::path::Path;
use std::process::Command;

use pcs_imdd::cli::run;

const BIN: &str = env!("CARGO_BIN_EXE_pcs-imdd");

const SMALL: &str = "samples = 10000\nclip_ratio = 1e-3\ncalibration_samples = 100000\n";

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("run.toml");
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap_or_default().to_string()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn run_in(dir: &Path, args: &[&str]) -> i32 {
    let out = dir.join("out");
    let mut argv = vec!["pcs-imdd", "--out", out.to_str().unwrap(), "--no-plots"];
    argv.extend_from_slice(args);
    run(argv)
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(run(["pcs-imdd", "--help"]), 0);
    assert_eq!(run(["pcs-imdd", "--version"]), 0);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(["pcs-imdd", "frobnicate"]), 2);
    assert_eq!(run(["pcs-imdd", "fig", "2"]), 2);
}

#[test]
fn invalid_config_exits_two_and_still_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ngmi_target = 1.5\nbogus = 1\n");
    assert_eq!(run_in(dir.path(), &["--config", &cfg, "dist"]), 2);
    let m = manifest(&dir.path().join("out"));
    let err = m["error"].as_str().unwrap();
    assert!(err.contains("bogus"), "{err}");
}

#[test]
fn missing_crossing_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!("{SMALL}grid_start_db = 0\ngrid_stop_db = 3\ngrid_step_db = 1\n[[modulation]]\nfamily = \"uniform\"\norder = 4\n"),
    );
    assert_eq!(run_in(dir.path(), &["--config", &cfg, "threshold"]), 3);
    let m = manifest(&dir.path().join("out"));
    assert!(m["error"].as_str().unwrap().contains("never crosses"));
}

#[test]
fn binary_reports_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(BIN).args(["--out"]).arg(dir.path()).arg("nope").status().unwrap();
    assert_eq!(status.code(), Some(2));
    let status = Command::new(BIN).args(["--no-plots", "--out"]).arg(dir.path()).arg("dist").status().unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(dir.path().join("dist_uniform-pam8.csv").exists());
}

#[test]
fn dist_table_is_gray_labelled() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), &["dist"]), 0);
    let text = fs::read_to_string(dir.path().join("out/dist_uniform-pam8.csv")).unwrap();
    let golden = "level,probability,label_bits\n-7,0.125,000\n-5,0.125,001\n-3,0.125,011\n-1,0.125,010\n\
                  1,0.125,110\n3,0.125,111\n5,0.125,101\n7,0.125,100\n";
    assert_eq!(text, golden);
}

#[test]
fn output_headers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!(
            "{SMALL}constraint = \"ppc\"\ngrid_start_db = 14\ngrid_stop_db = 22\ngrid_step_db = 2\n\
             [[modulation]]\nfamily = \"mb\"\norder = 8\nentropies = [2.4]\n"
        ),
    );
    let out = dir.path().join("out");
    let cases: &[(&[&str], &str, &str)] = &[
        (&["sweep"], "sweep.csv", "modulation,family,order,polarity,entropy,filter,constraint,quality_db,snr_db,psnr_db,papr_db,ngmi,gmi,ngmi_std_error,gmi_std_error,air,seed,samples,error"),
        (&["threshold"], "thresholds.csv", "modulation,entropy,filter,constraint,ngmi_target,threshold_db,snr_star_db,psnr_star_db,papr_db"),
        (&["papr"], "papr.csv", "modulation,entropy,filter,clip_ratio,clip_power,mean_power,papr_db,papr_peak_db"),
        (&["ccdf"], "ccdf_mb-pam8-h2.4.csv", "power_db,ccdf"),
        (&["rate-adapt"], "rate_adapt.csv", "quality_db,entropy,air"),
        (&["fig", "3c"], "fig3c.csv", "entropy,papr_db,snr_db"),
        (&["fig", "3d"], "fig3d.csv", "entropy,mean_intensity_mb,mean_intensity_asmb"),
        (&["fig", "4b"], "fig4b.csv", "psnr_db,entropy,ngmi"),
        (&["fig", "6c"], "fig6c.csv", "filter,entropy,papr_db,snr_db"),
    ];
    for (args, file, expected) in cases {
        let mut a = vec!["--config", cfg.as_str()];
        a.extend_from_slice(args);
        assert_eq!(run_in(dir.path(), &a), 0, "{args:?}");
        assert_eq!(header(&out.join(file)), *expected, "{file}");
    }
}

#[test]
fn taps_need_a_filter() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), &["taps"]), 2);
    let cfg = write_config(dir.path(), "filter = \"rrc\"\nroll_off = 0.2\nspan = 8\noversampling = 4\n");
    assert_eq!(run_in(dir.path(), &["--config", &cfg, "taps"]), 0);
    let text = fs::read_to_string(dir.path().join("out/taps.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("index,time,tap"));
    assert_eq!(text.lines().count(), 1 + 8 * 4 + 1);
}

#[test]
fn manifest_lists_outputs_with_digests() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), &["--seed", "42", "dist"]), 0);
    let m = manifest(&dir.path().join("out"));
    assert_eq!(m["seed"], 42);
    assert!(m["error"].is_null());
    let outputs = m["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), 1);
    assert_eq!(outputs[0]["file"], "dist_uniform-pam8.csv");
    assert_eq!(outputs[0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn sweep_is_reproducible_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!("{SMALL}grid_start_db = 4\ngrid_stop_db = 16\ngrid_step_db = 1\n[[modulation]]\nfamily = \"mb\"\norder = 8\nentropies = [2.2, 2.6]\n"),
    );
    let mut texts = Vec::new();
    for workers in ["1", "3"] {
        let out = dir.path().join(format!("w{workers}"));
        let code = run([
            "pcs-imdd",
            "--no-plots",
            "--workers",
            workers,
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap(),
            "sweep",
        ]);
        assert_eq!(code, 0);
        texts.push(fs::read(out.join("sweep.csv")).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
}

#[test]
fn plots_are_written_unless_disabled() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p");
    assert_eq!(run(["pcs-imdd", "--out", out.to_str().unwrap(), "fig", "3d"]), 0);
    let svg = fs::read_to_string(out.join("fig3d.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
}
