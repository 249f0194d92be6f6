//! Experiment specification files and tolerance overrides.

use std::path::{Path, PathBuf};

use lctsr::experiment::SuccessCriteria;
use lctsr::io::ParamsJson;
use lctsr::lct::{standard_matrix, LctParams, StandardTransform};
use lctsr::measurement::AcquisitionConfig;
use lctsr::pencil::PencilConfig;
use lctsr::solver::SolverOptions;
use serde::Deserialize;

use crate::failure::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Synth,
    Measure,
    Solve,
    Denoise,
    PhaseTransition,
    Selftest,
}

impl Mode {
    pub fn randomized(self) -> bool {
        matches!(self, Mode::Synth | Mode::PhaseTransition | Mode::Selftest)
    }
}

/// A named transform, e.g. `{"name": "fresnel", "b": 1.0}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformSpec {
    pub name: String,
    #[serde(default)]
    pub theta: Option<f64>,
    #[serde(default)]
    pub b: Option<f64>,
}

/// Input files, relative to the spec file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inputs {
    pub spikes: Option<PathBuf>,
    pub samples: Option<PathBuf>,
    pub sidecar: Option<PathBuf>,
    pub signal: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub delta_fc: Vec<f64>,
    pub fc: Vec<usize>,
    pub k: usize,
    pub trials: usize,
    #[serde(default)]
    pub n_samples: Option<usize>,
}

/// Every tunable threshold; unset fields keep the library defaults.
#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub feasibility_tol: Option<f64>,
    pub stall_tol: Option<f64>,
    pub stall_window: Option<usize>,
    pub max_iterations: Option<usize>,
    pub eps_circle: Option<f64>,
    pub eps_dup: Option<f64>,
    pub polish: Option<bool>,
    pub rank_tol: Option<f64>,
    pub location_tol: Option<f64>,
    pub amplitude_tol: Option<f64>,
}

impl Tolerances {
    /// Fields set in `other` win.
    pub fn merged(&self, other: &Tolerances) -> Tolerances {
        macro_rules! pick {
            ($($f:ident),*) => { Tolerances { $($f: other.$f.or(self.$f)),* } };
        }
        pick!(
            feasibility_tol,
            stall_tol,
            stall_window,
            max_iterations,
            eps_circle,
            eps_dup,
            polish,
            rank_tol,
            location_tol,
            amplitude_tol
        )
    }

    pub fn solver(&self) -> SolverOptions {
        let mut o = SolverOptions::default();
        if let Some(v) = self.feasibility_tol {
            o.sdp.feasibility_tol = v;
        }
        if let Some(v) = self.stall_tol {
            o.sdp.stall_tol = v;
        }
        if let Some(v) = self.stall_window {
            o.sdp.stall_window = v;
        }
        if let Some(v) = self.max_iterations {
            o.sdp.max_iterations = v;
        }
        if let Some(v) = self.eps_circle {
            o.support.eps_circle = v;
        }
        if let Some(v) = self.eps_dup {
            o.support.eps_dup = v;
        }
        if let Some(v) = self.polish {
            o.polish = v;
        }
        o
    }

    pub fn pencil(&self) -> PencilConfig {
        let mut p = PencilConfig::default();
        if let Some(v) = self.rank_tol {
            p.rank_tol = v;
        }
        p
    }

    pub fn success(&self) -> SuccessCriteria {
        let d = SuccessCriteria::default();
        SuccessCriteria {
            location_tol: self.location_tol.unwrap_or(d.location_tol),
            amplitude_tol: self.amplitude_tol.unwrap_or(d.amplitude_tol),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub mode: Mode,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub transform: Option<TransformSpec>,
    #[serde(default)]
    pub params: Option<ParamsJson>,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default)]
    pub fc: Option<usize>,
    #[serde(default)]
    pub bandwidth: Option<f64>,
    #[serde(default)]
    pub n_samples: Option<usize>,
    /// Spike count for `synth` and for `denoise` on a recorded input.
    #[serde(default)]
    pub k: Option<usize>,
    /// Target `Δ·fc` for `synth`.
    #[serde(default)]
    pub delta_fc: Option<f64>,
    #[serde(default)]
    pub inputs: Inputs,
    #[serde(default)]
    pub sweep: Option<SweepGrid>,
    /// Use only the pencil in `denoise`.
    #[serde(default)]
    pub pencil_only: bool,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_tau() -> f64 {
    1.0
}

impl ExperimentSpec {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::spec(format!("cannot read spec {}: {e}", path.display())))?;
        let mut spec: ExperimentSpec =
            serde_json::from_str(&text).map_err(|e| Failure::spec(format!("invalid spec: {e}")))?;
        spec.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(spec)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn input(&self, field: &str, value: &Option<PathBuf>) -> Result<PathBuf, Failure> {
        value
            .as_deref()
            .map(|p| self.resolve(p))
            .ok_or_else(|| Failure::spec(format!("mode requires inputs.{field}")))
    }

    /// The transform, from either `params` or a named `transform`.
    pub fn lct_params(&self) -> Result<Option<LctParams>, Failure> {
        match (&self.params, &self.transform) {
            (Some(_), Some(_)) => Err(Failure::spec("give either `params` or `transform`, not both")),
            (Some(p), None) => Ok(Some(p.to_params()?)),
            (None, Some(t)) => {
                let kind = StandardTransform::from_name(&t.name, t.theta, t.b)?;
                Ok(Some(standard_matrix(kind)?))
            }
            (None, None) => Ok(None),
        }
    }

    pub fn require_params(&self) -> Result<LctParams, Failure> {
        self.lct_params()?
            .ok_or_else(|| Failure::spec("mode requires `params` or `transform`"))
    }

    /// Acquisition from `fc` or `bandwidth`; `n_samples` defaults to `2fc + 1`.
    pub fn acquisition(&self) -> Result<AcquisitionConfig, Failure> {
        let params = self.require_params()?;
        let cfg = match (self.fc, self.bandwidth) {
            (Some(fc), None) => AcquisitionConfig::with_cutoff(params, self.tau, fc, self.n_samples.unwrap_or(2 * fc + 1))?,
            (None, Some(bw)) => {
                let probe = AcquisitionConfig::new(params, self.tau, bw, usize::MAX)?;
                AcquisitionConfig::new(params, self.tau, bw, self.n_samples.unwrap_or(2 * probe.fc() + 1))?
            }
            _ => return Err(Failure::spec("give exactly one of `fc` and `bandwidth`")),
        };
        Ok(cfg)
    }
}

/// Parses `--tolerance-overrides`, which is inline JSON or a path to a JSON file.
pub fn parse_overrides(arg: &str) -> Result<Tolerances, Failure> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg)
            .map_err(|e| Failure::spec(format!("cannot read tolerance overrides {arg}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| Failure::spec(format!("invalid tolerance overrides: {e}")))
}
