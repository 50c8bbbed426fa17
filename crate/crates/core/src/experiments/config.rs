use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::deformation::{FrameKind, Spike, SpikeSpec};
use crate::ensemble::EntryLaw;
use crate::spectral::Beta;
use crate::theory::{stieltjes_g, TestFunction};
use crate::{Complex64, Error, Result};

/// Which Monte Carlo experiment to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Outliers,
    XiProxy,
    Resolvent,
    Testfn,
    SteinitzDemo,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Outliers => "outliers",
            ExperimentKind::XiProxy => "xi-proxy",
            ExperimentKind::Resolvent => "resolvent",
            ExperimentKind::Testfn => "testfn",
            ExperimentKind::SteinitzDemo => "steinitz-demo",
        }
    }
}

/// Orthonormal probe vectors `u¹, …, uᵐ` for the resolvent and test-function experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    pub frame: FrameKind,
    pub count: usize,
}

impl Default for ProbeSpec {
    fn default() -> Self {
        ProbeSpec {
            frame: FrameKind::Fourier,
            count: 2,
        }
    }
}

/// Verdict tolerances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Absolute tolerance on mean outlier locations.
    pub lambda_abs_tol: f64,
    /// Relative tolerance on variances.
    pub variance_rel_tol: f64,
    /// KS verdicts pass when `p > ks_alpha`.
    pub ks_alpha: f64,
    /// Means pass within this many standard errors.
    pub mean_se_multiplier: f64,
    /// Absolute floor on covariance tolerances.
    pub cov_abs_tol: f64,
    /// Largest accepted fraction of skipped replicas.
    pub max_skip_rate: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            lambda_abs_tol: 0.01,
            variance_rel_tol: 0.15,
            ks_alpha: 0.01,
            mean_se_multiplier: 3.0,
            cov_abs_tol: 0.05,
            max_skip_rate: 0.01,
        }
    }
}

/// A complete experiment description. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub law: EntryLaw,
    pub n: usize,
    /// Matrix sizes for the `Ξ` residual ladder; empty means `[n]`.
    #[serde(default)]
    pub n_ladder: Vec<usize>,
    pub beta: Beta,
    pub replicas: usize,
    #[serde(default)]
    pub spikes: SpikeSpec,
    #[serde(default)]
    pub probes: ProbeSpec,
    /// Spectral parameters as `[re, im]` pairs.
    #[serde(default)]
    pub z_points: Vec<[f64; 2]>,
    #[serde(default)]
    pub test_functions: Vec<TestFunction>,
    /// Replace `X_N` by its truncated, re-centered version.
    #[serde(default)]
    pub truncate: bool,
    pub master_seed: u64,
    /// Worker threads; never affects results, so it is left out of reports.
    #[serde(default = "one", skip_serializing)]
    pub workers: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn one() -> usize {
    1
}

impl ExperimentConfig {
    /// The reference setup of each experiment.
    pub fn default_for(kind: ExperimentKind) -> Self {
        let spike = |frame| {
            SpikeSpec::new(vec![Spike {
                theta: 2.0,
                mult: 1,
                frame,
            }])
            .expect("valid default spike")
        };
        let base = ExperimentConfig {
            experiment: kind,
            law: EntryLaw::gaussian(1.0),
            n: 1000,
            n_ladder: Vec::new(),
            beta: Beta::Real,
            replicas: 200,
            spikes: SpikeSpec::default(),
            probes: ProbeSpec::default(),
            z_points: Vec::new(),
            test_functions: Vec::new(),
            truncate: false,
            master_seed: 0,
            workers: 1,
            tolerances: Tolerances::default(),
        };
        match kind {
            ExperimentKind::Outliers => ExperimentConfig {
                spikes: spike(FrameKind::Uniform),
                ..base
            },
            ExperimentKind::XiProxy => ExperimentConfig {
                n_ladder: vec![500, 1000, 2000],
                replicas: 100,
                spikes: spike(FrameKind::Fourier),
                ..base
            },
            ExperimentKind::Resolvent => ExperimentConfig {
                replicas: 2000,
                z_points: vec![[3.0, 0.5], [2.5, 0.0]],
                truncate: true,
                ..base
            },
            ExperimentKind::Testfn => ExperimentConfig {
                replicas: 1000,
                test_functions: vec![
                    TestFunction::Poly { coeffs: vec![0.0, 1.0] },
                    TestFunction::Poly {
                        coeffs: vec![0.0, 0.0, 1.0],
                    },
                ],
                ..base
            },
            ExperimentKind::SteinitzDemo => ExperimentConfig {
                n: 500,
                replicas: 50,
                probes: ProbeSpec {
                    frame: FrameKind::RandomOrthogonal { seed: 0 },
                    count: 2,
                },
                ..base
            },
        }
    }

    /// Builds a config from the defaults of `kind`, a JSON object whose keys
    /// replace top-level fields, and `key=value` style overrides (values parsed
    /// as JSON, falling back to strings). Unknown keys are errors.
    pub fn from_layers(kind: ExperimentKind, file: Option<Value>, overrides: &[(String, Value)]) -> Result<Self> {
        let mut value = serde_json::to_value(ExperimentConfig::default_for(kind)).map_err(|e| Error::Config(e.to_string()))?;
        let obj = value.as_object_mut().expect("config serializes to an object");
        if let Some(file) = file {
            let Value::Object(map) = file else {
                return Err(Error::Config("config file must hold a JSON object".into()));
            };
            for (k, v) in map {
                obj.insert(k, v);
            }
        }
        for (k, v) in overrides {
            obj.insert(k.clone(), v.clone());
        }
        let cfg: ExperimentConfig = serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.experiment != kind {
            return Err(Error::Config(format!(
                "config describes experiment {:?} but {:?} was requested",
                cfg.experiment.name(),
                kind.name()
            )));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicas == 0 {
            return Err(Error::Config("replicas must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        for &n in self.ladder().iter() {
            if n < 2 {
                return Err(Error::InvalidDimension(format!("n must be at least 2, got {n}")));
            }
            if self.spikes.rank() > n {
                return Err(Error::InvalidDimension(format!("rank {} exceeds n = {n}", self.spikes.rank())));
            }
        }
        for z in self.z_points() {
            stieltjes_g(z, self.law.sigma)?;
        }
        Ok(())
    }

    /// The matrix sizes to run.
    pub fn ladder(&self) -> Vec<usize> {
        if self.n_ladder.is_empty() {
            vec![self.n]
        } else {
            self.n_ladder.clone()
        }
    }

    pub fn z_points(&self) -> Vec<Complex64> {
        self.z_points.iter().map(|&[re, im]| Complex64::new(re, im)).collect()
    }
}

/// Parses one `key=value` override; the value is JSON when it parses as such.
pub fn parse_override(text: &str) -> Result<(String, Value)> {
    let (k, v) = text
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override {text:?} is not of the form key=value")))?;
    let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
    Ok((k.trim().to_string(), value))
}
