use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use spiked_wigner_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = sw_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

unsafe fn take(p: *mut c_char) -> String {
    let s = CStr::from_ptr(p).to_str().unwrap().to_string();
    sw_string_free(p);
    s
}

#[test]
fn version_matches_the_crate() {
    let v = unsafe { CStr::from_ptr(sw_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn run_and_inspect_a_report() {
    unsafe {
        let mut cfg = ptr::null_mut();
        assert_eq!(sw_config_default(c("outliers").as_ptr(), &mut cfg), SwStatus::Ok);
        assert_eq!(sw_config_set(cfg, c("n").as_ptr(), c("150").as_ptr()), SwStatus::Ok);
        assert_eq!(sw_config_set(cfg, c("replicas").as_ptr(), c("30").as_ptr()), SwStatus::Ok);
        assert_eq!(sw_config_set_workers(cfg, 2), SwStatus::Ok);

        let mut report = ptr::null_mut();
        assert_eq!(sw_run(cfg, &mut report), SwStatus::Ok);
        let (mut replicas, mut skipped) = (0, 0);
        assert_eq!(sw_report_counts(report, &mut replicas, &mut skipped), SwStatus::Ok);
        assert_eq!((replicas, skipped), (30, 0));

        let mut count = 0;
        assert_eq!(sw_report_verdict_count(report, &mut count), SwStatus::Ok);
        assert!(count >= 3);
        let mut all = true;
        for i in 0..count {
            let mut v = SwVerdict {
                comparison: SwComparison::Above,
                empirical: 0.0,
                target: 0.0,
                tolerance: 0.0,
                standard_error: 0.0,
                passed: false,
            };
            assert_eq!(sw_report_verdict(report, i, &mut v), SwStatus::Ok);
            let mut name = ptr::null_mut();
            assert_eq!(sw_report_verdict_name(report, i, &mut name), SwStatus::Ok);
            assert!(!take(name).is_empty());
            if v.comparison == SwComparison::Within {
                assert_eq!(v.passed, (v.empirical - v.target).abs() <= v.tolerance);
            }
            all &= v.passed;
        }
        let mut passed = false;
        assert_eq!(sw_report_passed(report, &mut passed), SwStatus::Ok);
        assert_eq!(passed, all);

        let mut stat = std::mem::zeroed::<SwStatistic>();
        assert_eq!(sw_report_statistic(report, c("lambda_j1_i1").as_ptr(), &mut stat), SwStatus::Ok);
        assert_eq!(stat.count, 30);
        assert!((stat.mean - 2.5).abs() < 0.05);
        assert!(stat.min <= stat.median && stat.median <= stat.max);
        assert_eq!(sw_report_statistic(report, c("nope").as_ptr(), &mut stat), SwStatus::OutOfRange);

        let mut json = ptr::null_mut();
        assert_eq!(sw_report_to_json(report, &mut json), SwStatus::Ok);
        let json = take(json);
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(value["config"]["n"], 150);

        let dir = tempfile::tempdir().unwrap();
        let d = c(dir.path().to_str().unwrap());
        assert_eq!(sw_report_write(report, d.as_ptr(), c("run").as_ptr()), SwStatus::Ok);
        assert_eq!(std::fs::read_to_string(dir.path().join("run.json")).unwrap(), json);
        assert!(dir.path().join("run.csv").exists());

        sw_report_free(report);
        sw_config_free(cfg);
    }
}

#[test]
fn config_from_json_fills_defaults_and_rejects_unknown_keys() {
    unsafe {
        let mut cfg = ptr::null_mut();
        let json = c(r#"{"experiment": "testfn", "n": 40}"#);
        assert_eq!(sw_config_from_json(json.as_ptr(), &mut cfg), SwStatus::Ok);
        let mut text = ptr::null_mut();
        assert_eq!(sw_config_to_json(cfg, &mut text), SwStatus::Ok);
        let value: serde_json::Value = serde_json::from_str(&take(text)).unwrap();
        assert_eq!(value["n"], 40);
        assert_eq!(value["replicas"], 1000);

        assert_eq!(sw_config_set(cfg, c("bogus").as_ptr(), c("1").as_ptr()), SwStatus::InvalidConfig);
        assert!(last_error().contains("bogus"));
        assert_eq!(sw_config_set(cfg, c("n").as_ptr(), c("not json").as_ptr()), SwStatus::InvalidConfig);
        let mut text = ptr::null_mut();
        assert_eq!(sw_config_to_json(cfg, &mut text), SwStatus::Ok);
        let value: serde_json::Value = serde_json::from_str(&take(text)).unwrap();
        assert_eq!(value["n"], 40);
        sw_config_free(cfg);

        let mut other = ptr::null_mut();
        assert_eq!(sw_config_from_json(c(r#"{"n": 40}"#).as_ptr(), &mut other), SwStatus::InvalidConfig);
        assert_eq!(
            sw_config_from_json(c(r#"{"experiment": "x"}"#).as_ptr(), &mut other),
            SwStatus::InvalidConfig
        );
        assert_eq!(sw_config_default(c("outliers").as_ptr(), ptr::null_mut()), SwStatus::NullPointer);
        assert!(other.is_null());
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        assert_eq!(sw_config_default(ptr::null(), &mut ptr::null_mut()), SwStatus::NullPointer);
        let bad = [0xffu8, 0];
        assert_eq!(sw_config_default(bad.as_ptr().cast(), &mut ptr::null_mut()), SwStatus::InvalidUtf8);

        let mut cfg = ptr::null_mut();
        let below = c(r#"{"experiment":"outliers","n":40,"replicas":2,"spikes":[{"theta":0.5,"frame":"uniform"}]}"#);
        assert_eq!(sw_config_from_json(below.as_ptr(), &mut cfg), SwStatus::Ok);
        let mut report = ptr::null_mut();
        assert_eq!(sw_run(cfg, &mut report), SwStatus::NothingToMeasure);
        assert!(report.is_null());
        sw_config_free(cfg);

        let mut x = 0.0;
        assert_eq!(sw_c_theta(0.5, 1.0, &mut x), SwStatus::BelowPhaseTransition);
        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(sw_stieltjes_g(1.0, 0.0, 1.0, &mut re, &mut im), SwStatus::OnBranchCut);
        assert_eq!(sw_config_set_workers(ptr::null_mut(), 1), SwStatus::NullPointer);

        sw_config_free(ptr::null_mut());
        sw_report_free(ptr::null_mut());
        sw_matrix_free(ptr::null_mut());
        sw_string_free(ptr::null_mut());
    }
}

#[test]
fn theory_entry_points() {
    unsafe {
        let (mut rho, mut exists) = (0.0, false);
        assert_eq!(sw_outlier_location(2.0, 1.0, &mut rho, &mut exists), SwStatus::Ok);
        assert!(exists);
        assert!((rho - 2.5).abs() < 1e-15);
        assert_eq!(sw_outlier_location(0.9, 1.0, &mut rho, &mut exists), SwStatus::Ok);
        assert!(!exists);

        let mut ct = 0.0;
        assert_eq!(sw_c_theta(2.0, 1.0, &mut ct), SwStatus::Ok);
        assert!((ct - 4.0 / 3.0).abs() < 1e-15);

        // g(ρ_θ) = 1/θ
        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(sw_stieltjes_g(2.5, 0.0, 1.0, &mut re, &mut im), SwStatus::Ok);
        assert!((re - 0.5).abs() < 1e-14 && im == 0.0);

        let mut cov = [0.0; 4];
        assert_eq!(
            sw_gamma_covariance(3.0, 0.5, 3.0, 0.5, 1.0, true, 1, cov.as_mut_ptr()),
            SwStatus::Ok
        );
        assert!(cov[0] > 0.0 && cov[3] > 0.0);
        assert!((cov[1] - cov[2]).abs() < 1e-12);
        assert_eq!(
            sw_gamma_covariance(3.0, 0.5, 3.0, 0.5, 1.0, true, 3, cov.as_mut_ptr()),
            SwStatus::InvalidArgument
        );
    }
}

#[test]
fn matrices_and_eigenvalues() {
    unsafe {
        let law = c(r#"{"kind": "rademacher"}"#);
        let mut x = ptr::null_mut();
        assert_eq!(sw_matrix_sample_wigner(law.as_ptr(), 300, 1, 17, &mut x), SwStatus::Ok);
        let mut n = 0;
        assert_eq!(sw_matrix_dim(x, &mut n), SwStatus::Ok);
        assert_eq!(n, 300);

        let mut y = ptr::null_mut();
        let spikes = c(r#"[{"theta": 3.0, "frame": "uniform"}]"#);
        assert_eq!(sw_matrix_add_spikes(x, spikes.as_ptr(), &mut y), SwStatus::Ok);

        let mut bulk = vec![0.0; n];
        let mut spiked = vec![0.0; n];
        assert_eq!(sw_matrix_eigenvalues(x, bulk.as_mut_ptr(), n), SwStatus::Ok);
        assert_eq!(sw_matrix_eigenvalues(y, spiked.as_mut_ptr(), n), SwStatus::Ok);
        assert!(bulk.windows(2).all(|w| w[0] <= w[1]));
        assert!(bulk[n - 1] < 2.3);
        // ρ = 3 + 1/3
        assert!((spiked[n - 1] - 10.0 / 3.0).abs() < 0.25);
        assert_eq!(sw_matrix_eigenvalues(x, bulk.as_mut_ptr(), n - 1), SwStatus::InvalidArgument);

        let mut z = ptr::null_mut();
        assert_eq!(sw_matrix_sample_wigner(law.as_ptr(), 10, 5, 1, &mut z), SwStatus::InvalidArgument);
        let bad = c(r#"[{"theta": 1.0, "mult": 2, "frame": "uniform"}]"#);
        assert_eq!(sw_matrix_add_spikes(x, bad.as_ptr(), &mut z), SwStatus::InvalidConfig);
        assert!(z.is_null());

        sw_matrix_free(y);
        sw_matrix_free(x);
    }
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/spiked_wigner.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "sw_run",
        "sw_last_error_message",
        "SW_STATUS_NOTHING_TO_MEASURE",
        "typedef struct SwReport SwReport",
    ] {
        assert!(text.contains(name), "{name}");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(&src, "#include \"spiked_wigner.h\"\nint main(void) { return sw_version() == 0; }\n").unwrap();
    let include = header.parent().unwrap();
    for (compiler, extra) in [("cc", &["-std=c99"][..]), ("c++", &["-x", "c++"][..])] {
        let Ok(status) = Command::new(compiler)
            .args(extra)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-I"])
            .arg(include)
            .arg(&src)
            .status()
        else {
            eprintln!("{compiler} not found, skipping");
            continue;
        };
        assert!(status.success(), "{compiler} rejected the header");
    }
}
