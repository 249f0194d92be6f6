//! File formats: JSON records with complex numbers as `{re, im}`, CSV tables
//! with a mandatory header row.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::denoise::{DenoisePath, DenoiseResult, LfmSignalSpec};
use crate::error::{Error, Result};
use crate::experiment::SweepPoint;
use crate::lct::{LctParams, Spike, SpikeTrain};
use crate::measurement::{AcquisitionConfig, MeasurementRecord};
use crate::solver::{RecoveryResult, SdpSolution};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexJson {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexJson {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<ComplexJson> for Complex64 {
    fn from(z: ComplexJson) -> Self {
        Complex64::new(z.re, z.im)
    }
}

fn complex_list(zs: &[Complex64]) -> Vec<ComplexJson> {
    zs.iter().copied().map(ComplexJson::from).collect()
}

/// Parameter matrix `[a b; c d]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamsJson {
    pub a: ComplexJson,
    pub b: ComplexJson,
    pub c: ComplexJson,
    pub d: ComplexJson,
}

impl From<&LctParams> for ParamsJson {
    fn from(p: &LctParams) -> Self {
        Self {
            a: p.a().into(),
            b: p.b().into(),
            c: p.c().into(),
            d: p.d().into(),
        }
    }
}

impl ParamsJson {
    pub fn to_params(&self) -> Result<LctParams> {
        LctParams::new(self.a.into(), self.b.into(), self.c.into(), self.d.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpikeJson {
    pub t: f64,
    pub re_c: f64,
    pub im_c: f64,
}

fn spike_list(s: &SpikeTrain) -> Vec<SpikeJson> {
    s.iter()
        .map(|sp| SpikeJson {
            t: sp.t,
            re_c: sp.c.re,
            im_c: sp.c.im,
        })
        .collect()
}

/// Spike-train file written by `synth`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpikeTrainJson {
    #[serde(default)]
    pub seed: Option<u64>,
    pub tau: f64,
    pub spikes: Vec<SpikeJson>,
}

impl SpikeTrainJson {
    pub fn new(s: &SpikeTrain, seed: Option<u64>) -> Self {
        Self {
            seed,
            tau: s.tau(),
            spikes: spike_list(s),
        }
    }

    pub fn to_spike_train(&self) -> Result<SpikeTrain> {
        SpikeTrain::from_unsorted(
            self.tau,
            self.spikes
                .iter()
                .map(|s| Spike::new(s.t, Complex64::new(s.re_c, s.im_c)))
                .collect(),
        )
    }
}

/// Sidecar describing the acquisition of a sample table. `period` and `fc`
/// are derived and only written for reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcquisitionJson {
    #[serde(default)]
    pub seed: Option<u64>,
    pub params: ParamsJson,
    pub tau: f64,
    pub bandwidth: f64,
    pub n_samples: usize,
    #[serde(default)]
    pub period: Option<f64>,
    #[serde(default)]
    pub fc: Option<usize>,
}

impl AcquisitionJson {
    pub fn new(cfg: &AcquisitionConfig, seed: Option<u64>) -> Self {
        Self {
            seed,
            params: cfg.params().into(),
            tau: cfg.tau(),
            bandwidth: cfg.bandwidth(),
            n_samples: cfg.n_samples(),
            period: Some(cfg.period()),
            fc: Some(cfg.fc()),
        }
    }

    pub fn to_config(&self) -> Result<AcquisitionConfig> {
        let cfg = AcquisitionConfig::new(self.params.to_params()?, self.tau, self.bandwidth, self.n_samples)?;
        if let Some(fc) = self.fc {
            if fc != cfg.fc() {
                return Err(Error::InvalidConfig(format!(
                    "sidecar states fc = {fc} but the parameters give {}",
                    cfg.fc()
                )));
            }
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct SampleRow {
    n: usize,
    re: f64,
    im: f64,
}

fn table_error(e: csv::Error) -> Error {
    Error::Table(e.to_string())
}

/// Writes `h[n]` as a CSV table with columns `n,re,im`.
pub fn write_samples_csv(path: &Path, samples: &[Complex64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(table_error)?;
    for (n, h) in samples.iter().enumerate() {
        w.serialize(SampleRow { n, re: h.re, im: h.im }).map_err(table_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a `n,re,im` table; rows must be numbered `0, 1, …` in order.
pub fn read_samples_csv(path: &Path) -> Result<Vec<Complex64>> {
    let mut r = csv::Reader::from_path(path).map_err(table_error)?;
    let mut out = Vec::new();
    for (i, row) in r.deserialize::<SampleRow>().enumerate() {
        let row = row.map_err(table_error)?;
        if row.n != i {
            return Err(Error::Table(format!("row {i} is numbered {}", row.n)));
        }
        out.push(Complex64::new(row.re, row.im));
    }
    Ok(out)
}

/// Writes a measurement record as `<csv>` plus its JSON sidecar.
pub fn write_record(rec: &MeasurementRecord, csv_path: &Path, json_path: &Path, seed: Option<u64>) -> Result<()> {
    write_samples_csv(csv_path, rec.samples())?;
    write_json(json_path, &AcquisitionJson::new(rec.config(), seed))
}

pub fn read_record(csv_path: &Path, json_path: &Path) -> Result<MeasurementRecord> {
    let side: AcquisitionJson = read_json(json_path)?;
    let samples = read_samples_csv(csv_path)?;
    MeasurementRecord::new(samples, side.to_config()?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdpDiagnostics {
    pub objective: f64,
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

impl From<&SdpSolution> for SdpDiagnostics {
    fn from(s: &SdpSolution) -> Self {
        Self {
            objective: s.objective,
            gap: s.primal_dual_gap_estimate,
            iterations: s.iterations,
            converged: s.converged,
            primal_residual: s.primal_residual,
            dual_residual: s.dual_residual,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub objective: f64,
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
    pub root_residuals: Vec<f64>,
    pub lsq_residual: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// Degree of `z^{2fc} p(z)` after trimming negligible leading terms.
    pub polynomial_degree: usize,
    pub coefficient_residual: f64,
    pub idft_condition: f64,
}

/// Output of `solve`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryJson {
    pub seed: Option<u64>,
    pub tau: f64,
    pub spikes: Vec<SpikeJson>,
    pub rho: Vec<ComplexJson>,
    pub diagnostics: Diagnostics,
}

impl RecoveryJson {
    pub fn new(r: &RecoveryResult, seed: Option<u64>) -> Self {
        Self {
            seed,
            tau: r.spikes.tau(),
            spikes: spike_list(&r.spikes),
            rho: complex_list(&r.weights),
            diagnostics: Diagnostics {
                objective: r.sdp.objective,
                gap: r.sdp.primal_dual_gap_estimate,
                iterations: r.sdp.iterations,
                converged: r.sdp.converged,
                root_residuals: r.root_residuals.clone(),
                lsq_residual: r.amplitude_residual,
                primal_residual: r.sdp.primal_residual,
                dual_residual: r.sdp.dual_residual,
                polynomial_degree: r.polynomial_degree,
                coefficient_residual: r.coefficient_residual,
                idft_condition: r.idft_condition,
            },
        }
    }

    pub fn spike_train(&self) -> Result<SpikeTrain> {
        SpikeTrainJson {
            seed: self.seed,
            tau: self.tau,
            spikes: self.spikes.clone(),
        }
        .to_spike_train()
    }
}

/// Input description of a bandlimited chirped signal, coefficients listed
/// for `m = -M..=M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LfmSignalJson {
    pub band: usize,
    pub coefficients: Vec<ComplexJson>,
    pub params: ParamsJson,
    pub tau: f64,
    pub c1: ComplexJson,
    pub c2: ComplexJson,
}

impl LfmSignalJson {
    pub fn new(spec: &LfmSignalSpec) -> Self {
        Self {
            band: spec.band,
            coefficients: complex_list(&spec.coefficients),
            params: (&spec.params).into(),
            tau: spec.tau,
            c1: spec.c1.into(),
            c2: spec.c2.into(),
        }
    }

    pub fn to_spec(&self) -> Result<LfmSignalSpec> {
        LfmSignalSpec::new(
            self.band,
            self.coefficients.iter().map(|&z| z.into()).collect(),
            self.params.to_params()?,
            self.tau,
            self.c1.into(),
            self.c2.into(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexedComplex {
    pub m: i64,
    pub re: f64,
    pub im: f64,
}

/// Output of `denoise`: both estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenoiseJson {
    pub seed: Option<u64>,
    pub path: DenoisePath,
    pub fallback_reason: Option<String>,
    pub band: usize,
    pub signal: Vec<IndexedComplex>,
    pub tau: f64,
    pub spikes: Vec<SpikeJson>,
    pub rho: Vec<ComplexJson>,
    pub sdp: Option<SdpDiagnostics>,
}

impl DenoiseJson {
    pub fn new(r: &DenoiseResult, seed: Option<u64>) -> Self {
        let band = r.signal.len() / 2;
        Self {
            seed,
            path: r.path,
            fallback_reason: r.fallback_reason.clone(),
            band,
            signal: r
                .signal
                .iter()
                .enumerate()
                .map(|(i, z)| IndexedComplex {
                    m: i as i64 - band as i64,
                    re: z.re,
                    im: z.im,
                })
                .collect(),
            tau: r.spikes.tau(),
            spikes: spike_list(&r.spikes),
            rho: complex_list(&r.weights),
            sdp: r.sdp.as_ref().map(SdpDiagnostics::from),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SweepRow {
    delta_fc: f64,
    fc: usize,
    k: usize,
    trials: usize,
    successes: usize,
    solver_failures: usize,
    success_rate: f64,
    max_location_error: f64,
    max_amplitude_error: f64,
    seed: u64,
}

/// Phase-transition table, one row per grid point, seed on every row.
pub fn write_sweep_csv(path: &Path, rows: &[SweepPoint], seed: u64) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(table_error)?;
    for p in rows {
        w.serialize(SweepRow {
            delta_fc: p.delta_fc,
            fc: p.fc,
            k: p.k,
            trials: p.trials,
            successes: p.successes,
            solver_failures: p.solver_failures,
            success_rate: p.success_rate,
            max_location_error: p.max_location_error,
            max_amplitude_error: p.max_amplitude_error,
            seed,
        })
        .map_err(table_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sweep_csv(path: &Path) -> Result<(Vec<SweepPoint>, Option<u64>)> {
    let mut r = csv::Reader::from_path(path).map_err(table_error)?;
    let mut seed = None;
    let mut rows = Vec::new();
    for row in r.deserialize::<SweepRow>() {
        let row = row.map_err(table_error)?;
        seed = Some(row.seed);
        rows.push(SweepPoint {
            delta_fc: row.delta_fc,
            fc: row.fc,
            k: row.k,
            trials: row.trials,
            successes: row.successes,
            solver_failures: row.solver_failures,
            success_rate: row.success_rate,
            max_location_error: row.max_location_error,
            max_amplitude_error: row.max_amplitude_error,
        });
    }
    Ok((rows, seed))
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}
