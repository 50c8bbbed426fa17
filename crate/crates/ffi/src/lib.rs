//! C ABI for `spiked-wigner`.
//!
//! Objects cross the boundary as opaque pointers (`SwConfig`, `SwReport`,
//! `SwMatrix`) created by `sw_*` constructors and released by the matching
//! `*_free`. Every fallible call returns an [`SwStatus`]; on failure
//! `sw_last_error_message` describes the error for the calling thread.
//! Strings handed out by the library are freed with `sw_string_free`.
//! The generated header is `include/spiked_wigner.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use serde_json::Value;
use spiked_wigner::deformation::SpikeSpec;
use spiked_wigner::ensemble::{sample_wigner, EntryLaw};
use spiked_wigner::experiments::{self, Comparison, ExperimentConfig, ExperimentKind, ExperimentReport};
use spiked_wigner::spectral::{deformed_matrix, eigvalsh, Beta, DenseHermitian};
use spiked_wigner::{theory, Complex64, Error};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    InvalidConfig = 4,
    NothingToMeasure = 5,
    BelowPhaseTransition = 6,
    OnBranchCut = 7,
    NearSingularShift = 8,
    NoConvergence = 9,
    KernelSingularity = 10,
    Io = 11,
    OutOfRange = 12,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwComparison {
    /// `|empirical − target| ≤ tolerance`
    Within = 0,
    /// `empirical < target`
    Below = 1,
    /// `empirical > target`
    Above = 2,
}

/// Numeric part of one verdict; the name is read with `sw_report_verdict_name`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwVerdict {
    pub comparison: SwComparison,
    pub empirical: f64,
    pub target: f64,
    pub tolerance: f64,
    /// NaN when the tolerance did not involve a standard error.
    pub standard_error: f64,
    pub passed: bool,
}

/// Summary of one per-replica statistic.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwStatistic {
    pub count: u64,
    pub mean: f64,
    pub variance: f64,
    pub standard_error: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

/// An experiment configuration.
pub struct SwConfig(ExperimentConfig);

/// The outcome of a run.
pub struct SwReport(ExperimentReport);

/// A dense real symmetric or Hermitian matrix.
pub struct SwMatrix(DenseHermitian);

struct Fault {
    status: SwStatus,
    message: String,
}

impl Fault {
    fn new(status: SwStatus, message: impl Into<String>) -> Self {
        Fault {
            status,
            message: message.into(),
        }
    }
}

impl From<Error> for Fault {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Config(_) => SwStatus::InvalidConfig,
            Error::NothingToMeasure => SwStatus::NothingToMeasure,
            Error::BelowPhaseTransition { .. } => SwStatus::BelowPhaseTransition,
            Error::OnBranchCut(_) => SwStatus::OnBranchCut,
            Error::NearSingularShift(_) => SwStatus::NearSingularShift,
            Error::NoConvergence => SwStatus::NoConvergence,
            Error::KernelSingularity(..) => SwStatus::KernelSingularity,
            Error::Io { .. } => SwStatus::Io,
            _ => SwStatus::InvalidArgument,
        };
        Fault::new(status, e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Fault>) -> SwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SwStatus::Ok,
        Ok(Err(fault)) => {
            set_last_error(&fault.message);
            fault.status
        }
        Err(_) => {
            set_last_error("internal panic");
            SwStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fault> {
    if p.is_null() {
        return Err(Fault::new(SwStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fault::new(SwStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Fault> {
    p.as_ref()
        .ok_or_else(|| Fault::new(SwStatus::NullPointer, format!("{name} is null")))
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Fault> {
    p.as_mut()
        .ok_or_else(|| Fault::new(SwStatus::NullPointer, format!("{name} is null")))
}

fn json_arg(text: &str, name: &str) -> Result<Value, Fault> {
    serde_json::from_str(text).map_err(|e| Fault::new(SwStatus::InvalidConfig, format!("{name}: {e}")))
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("no interior nul").into_raw()
}

fn kind_from_name(name: &str) -> Result<ExperimentKind, Fault> {
    serde_json::from_value(Value::String(name.to_string()))
        .map_err(|_| Fault::new(SwStatus::InvalidConfig, format!("unknown experiment {name:?}")))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn sw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sw_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Frees a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn sw_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Default config of an experiment (`"outliers"`, `"xi-proxy"`,
/// `"resolvent"`, `"testfn"` or `"steinitz-demo"`).
///
/// # Safety
/// `experiment` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sw_config_default(experiment: *const c_char, out: *mut *mut SwConfig) -> SwStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let kind = kind_from_name(str_arg(experiment, "experiment")?)?;
        *out = Box::into_raw(Box::new(SwConfig(ExperimentConfig::default_for(kind))));
        Ok(())
    })
}

/// Config from a JSON object naming its `experiment`; missing fields take
/// that experiment's defaults, unknown fields are rejected.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sw_config_from_json(json: *const c_char, out: *mut *mut SwConfig) -> SwStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let value = json_arg(str_arg(json, "json")?, "json")?;
        let name = value
            .get("experiment")
            .and_then(Value::as_str)
            .ok_or_else(|| Fault::new(SwStatus::InvalidConfig, "config must name its experiment"))?;
        let kind = kind_from_name(name)?;
        let cfg = ExperimentConfig::from_layers(kind, Some(value), &[])?;
        *out = Box::into_raw(Box::new(SwConfig(cfg)));
        Ok(())
    })
}

/// Replaces one top-level field; `json_value` is JSON text. The config is
/// left unchanged on error.
///
/// # Safety
/// `cfg` must be a live config; `key` and `json_value` nul-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn sw_config_set(cfg: *mut SwConfig, key: *const c_char, json_value: *const c_char) -> SwStatus {
    guard(|| {
        let cfg = out_arg(cfg, "cfg")?;
        let key = str_arg(key, "key")?;
        let value = json_arg(str_arg(json_value, "json_value")?, "json_value")?;
        let current = serde_json::to_value(&cfg.0).map_err(|e| Fault::new(SwStatus::InvalidConfig, e.to_string()))?;
        let mut next = ExperimentConfig::from_layers(cfg.0.experiment, Some(current), &[(key.to_string(), value)])?;
        if key != "workers" {
            next.workers = cfg.0.workers;
        }
        cfg.0 = next;
        Ok(())
    })
}

/// Sets the worker thread count (at least 1).
///
/// # Safety
/// `cfg` must be a live config.
#[no_mangle]
pub unsafe extern "C" fn sw_config_set_workers(cfg: *mut SwConfig, workers: usize) -> SwStatus {
    guard(|| {
        let cfg = out_arg(cfg, "cfg")?;
        if workers == 0 {
            return Err(Fault::new(SwStatus::InvalidArgument, "workers must be at least 1"));
        }
        cfg.0.workers = workers;
        Ok(())
    })
}

/// Serializes the config; free the result with `sw_string_free`.
///
/// # Safety
/// `cfg` must be a live config; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sw_config_to_json(cfg: *const SwConfig, out: *mut *mut c_char) -> SwStatus {
    guard(|| {
        let cfg = ref_arg(cfg, "cfg")?;
        let out = out_arg(out, "out")?;
        let text = serde_json::to_string(&cfg.0).map_err(|e| Fault::new(SwStatus::InvalidConfig, e.to_string()))?;
        *out = to_c_string(text);
        Ok(())
    })
}

/// # Safety
/// `cfg` must be NULL or a config not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sw_config_free(cfg: *mut SwConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Runs the configured experiment.
///
/// # Safety
/// `cfg` must be a live config; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sw_run(cfg: *const SwConfig, out: *mut *mut SwReport) -> SwStatus {
    guard(|| {
        let cfg = ref_arg(cfg, "cfg")?;
        let out = out_arg(out, "out")?;
        let report = experiments::run(&cfg.0)?;
        *out = Box::into_raw(Box::new(SwReport(report)));
        Ok(())
    })
}

/// Whether every verdict passed.
///
/// # Safety
/// `report` must be a live report; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sw_report_passed(report: *const SwReport, out: *mut bool) -> SwStatus {
    guard(|| {
        *out_arg(out, "out")? = ref_arg(report, "report")?.0.passed;
        Ok(())
    })
}

/// Number of replicas run and skipped.
///
/// # Safety
/// `report` must be a live report; `replicas` and `skipped` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sw_report_counts(report: *const SwReport, replicas: *mut usize, skipped: *mut usize) -> SwStatus {
    guard(|| {
        let r = &ref_arg(report, "report")?.0;
        *out_arg(replicas, "replicas")? = r.replicas;
        *out_arg(skipped, "skipped")? = r.skipped;
        Ok(())
    })
}

/// # Safety
/// `report` must be a live report; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sw_report_verdict_count(report: *const SwReport, out: *mut usize) -> SwStatus {
    guard(|| {
        *out_arg(out, "out")? = ref_arg(report, "report")?.0.verdicts.len();
        Ok(())
    })
}

/// # Safety
/// `report` must be a live report; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sw_report_verdict(report: *const SwReport, index: usize, out: *mut SwVerdict) -> SwStatus {
    guard(|| {
        let r = &ref_arg(report, "report")?.0;
        let out = out_arg(out, "out")?;
        let v = r
            .verdicts
            .get(index)
            .ok_or_else(|| Fault::new(SwStatus::OutOfRange, format!("verdict {index} of {}", r.verdicts.len())))?;
        *out = SwVerdict {
            comparison: match v.comparison {
                Comparison::Within => SwComparison::Within,
                Comparison::Below => SwComparison::Below,
                Comparison::Above => SwComparison::Above,
            },
            empirical: v.empirical,
            target: v.target,
            tolerance: v.tolerance,
            standard_error: v.standard_error.unwrap_or(f64::NAN),
            passed: v.passed,
        };
        Ok(())
    })
}

/// Name of a verdict; free with `sw_string_free`.
///
/// # Safety
/// `report` must be a live report; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sw_report_verdict_name(report: *const SwReport, index: usize, out: *mut *mut c_char) -> SwStatus {
    guard(|| {
        let r = &ref_arg(report, "report")?.0;
        let out = out_arg(out, "out")?;
        let v = r
            .verdicts
            .get(index)
            .ok_or_else(|| Fault::new(SwStatus::OutOfRange, format!("verdict {index} of {}", r.verdicts.len())))?;
        *out = to_c_string(v.name.clone());
        Ok(())
    })
}

/// Summary of a named per-replica statistic.
///
/// # Safety
/// `report` must be a live report; `name` a nul-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sw_report_statistic(report: *const SwReport, name: *const c_char, out: *mut SwStatistic) -> SwStatus {
    guard(|| {
        let r = &ref_arg(report, "report")?.0;
        let name = str_arg(name, "name")?;
        let out = out_arg(out, "out")?;
        let s = r
            .statistic(name)
            .ok_or_else(|| Fault::new(SwStatus::OutOfRange, format!("no statistic named {name:?}")))?;
        *out = SwStatistic {
            count: s.summary.count,
            mean: s.summary.mean,
            variance: s.variance,
            standard_error: s.standard_error,
            median: s.median,
            min: s.summary.min,
            max: s.summary.max,
        };
        Ok(())
    })
}

/// The JSON report; free with `sw_string_free`.
///
/// # Safety
/// `report` must be a live report; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sw_report_to_json(report: *const SwReport, out: *mut *mut c_char) -> SwStatus {
    guard(|| {
        let r = &ref_arg(report, "report")?.0;
        let out = out_arg(out, "out")?;
        *out = to_c_string(r.to_json()?);
        Ok(())
    })
}

/// Writes `<stem>.json` and `<stem>.csv` into `dir`.
///
/// # Safety
/// `report` must be a live report; `dir` and `stem` nul-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn sw_report_write(report: *const SwReport, dir: *const c_char, stem: *const c_char) -> SwStatus {
    guard(|| {
        let r = &ref_arg(report, "report")?.0;
        r.write(Path::new(str_arg(dir, "dir")?), str_arg(stem, "stem")?)?;
        Ok(())
    })
}

/// # Safety
/// `report` must be NULL or a report not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sw_report_free(report: *mut SwReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Samples `X_N = W_N/√N` with entry law given as JSON, e.g.
/// `{"kind":"standardized-bernoulli","p":0.2,"sigma":1.0}`; `beta` is 1 or 2.
///
/// # Safety
/// `law_json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sw_matrix_sample_wigner(
    law_json: *const c_char,
    n: usize,
    beta: u8,
    seed: u64,
    out: *mut *mut SwMatrix,
) -> SwStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let law: EntryLaw = serde_json::from_value(json_arg(str_arg(law_json, "law_json")?, "law_json")?)
            .map_err(|e| Fault::new(SwStatus::InvalidConfig, e.to_string()))?;
        let sample = sample_wigner(&law, n, beta, seed)?;
        *out = Box::into_raw(Box::new(SwMatrix(sample.matrix)));
        Ok(())
    })
}

/// `X + A` for spikes given as a JSON list, e.g. `[{"theta":2.0,"frame":"uniform"}]`.
///
/// # Safety
/// `matrix` must be a live matrix; `spikes_json` a nul-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sw_matrix_add_spikes(matrix: *const SwMatrix, spikes_json: *const c_char, out: *mut *mut SwMatrix) -> SwStatus {
    guard(|| {
        let m = &ref_arg(matrix, "matrix")?.0;
        let out = out_arg(out, "out")?;
        let spec: SpikeSpec = serde_json::from_value(json_arg(str_arg(spikes_json, "spikes_json")?, "spikes_json")?)
            .map_err(|e| Fault::new(SwStatus::InvalidConfig, e.to_string()))?;
        let frames = spec.build_frames(m.n())?;
        *out = Box::into_raw(Box::new(SwMatrix(deformed_matrix(m, &spec, &frames)?)));
        Ok(())
    })
}

/// # Safety
/// `matrix` must be a live matrix; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sw_matrix_dim(matrix: *const SwMatrix, out: *mut usize) -> SwStatus {
    guard(|| {
        *out_arg(out, "out")? = ref_arg(matrix, "matrix")?.0.n();
        Ok(())
    })
}

/// Eigenvalues in ascending order into `out`, which must hold exactly `len = n` values.
///
/// # Safety
/// `matrix` must be a live matrix; `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sw_matrix_eigenvalues(matrix: *const SwMatrix, out: *mut f64, len: usize) -> SwStatus {
    guard(|| {
        let m = &ref_arg(matrix, "matrix")?.0;
        if out.is_null() {
            return Err(Fault::new(SwStatus::NullPointer, "out is null"));
        }
        if len != m.n() {
            return Err(Fault::new(
                SwStatus::InvalidArgument,
                format!("buffer of {len} for dimension {}", m.n()),
            ));
        }
        let values = eigvalsh(m)?;
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(&values);
        Ok(())
    })
}

/// # Safety
/// `matrix` must be NULL or a matrix not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sw_matrix_free(matrix: *mut SwMatrix) {
    if !matrix.is_null() {
        drop(Box::from_raw(matrix));
    }
}

/// `ρ_θ = θ + σ²/θ` when `|θ| > σ`; otherwise `*exists` is false and `*rho` untouched.
///
/// # Safety
/// `rho` and `exists` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sw_outlier_location(theta: f64, sigma: f64, rho: *mut f64, exists: *mut bool) -> SwStatus {
    guard(|| {
        let (rho, exists) = (out_arg(rho, "rho")?, out_arg(exists, "exists")?);
        match theory::outlier_location(theta, sigma)? {
            Some(r) => {
                *rho = r;
                *exists = true;
            }
            None => *exists = false,
        }
        Ok(())
    })
}

/// `c_θ = θ²/(θ² − σ²)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sw_c_theta(theta: f64, sigma: f64, out: *mut f64) -> SwStatus {
    guard(|| {
        *out_arg(out, "out")? = theory::c_theta(theta, sigma)?;
        Ok(())
    })
}

/// `g_σ(z)` off the cut `[−2σ, 2σ]`.
///
/// # Safety
/// `g_re` and `g_im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sw_stieltjes_g(z_re: f64, z_im: f64, sigma: f64, g_re: *mut f64, g_im: *mut f64) -> SwStatus {
    guard(|| {
        let (re, im) = (out_arg(g_re, "g_re")?, out_arg(g_im, "g_im")?);
        let g = theory::stieltjes_g(Complex64::new(z_re, z_im), sigma)?.g;
        *re = g.re;
        *im = g.im;
        Ok(())
    })
}

/// The 2×2 covariance of `(Re G(z₁), Im G(z₁))` with `(Re G(z₂), Im G(z₂))`,
/// row-major into `out[0..4]`.
///
/// # Safety
/// `out` must point to 4 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sw_gamma_covariance(
    z1_re: f64,
    z1_im: f64,
    z2_re: f64,
    z2_im: f64,
    sigma: f64,
    same_index: bool,
    beta: u8,
    out: *mut f64,
) -> SwStatus {
    guard(|| {
        if out.is_null() {
            return Err(Fault::new(SwStatus::NullPointer, "out is null"));
        }
        let beta = Beta::try_from(beta)?;
        let m = theory::gamma_covariance(Complex64::new(z1_re, z1_im), Complex64::new(z2_re, z2_im), sigma, same_index, beta)?;
        std::slice::from_raw_parts_mut(out, 4).copy_from_slice(&[m[0][0], m[0][1], m[1][0], m[1][1]]);
        Ok(())
    })
}
