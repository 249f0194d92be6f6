//! Exact removal of additive impulsive noise from a bandlimited chirped
//! signal: the spike train alone populates the coefficients outside the
//! signal band, so it can be super-resolved from them and subtracted.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lct::{LctParams, SpikeTrain};
use crate::measurement::{demodulate, recover_fourier_coeffs, samples_from_coefficients, AcquisitionConfig, MeasurementRecord};
use crate::pencil::{pencil_recover_on, PencilConfig};
use crate::series::{chirp_fourier_coefficients, exponential_sums, FourierCoeffVector, SeriesConfig};
use crate::solver::{demodulate_weights, locate_and_fit, solve_dual_sdp_masked, SdpSolution, SolverOptions};

/// Bandlimited chirped signal `r_BL(t) = κ Σ_{|m|≤M} r̂_BL[m] k_Λ(t, m ω0 b)`
/// together with the mixing constants of the corrupted observation.
#[derive(Debug, Clone, PartialEq)]
pub struct LfmSignalSpec {
    pub band: usize,
    pub coefficients: Vec<Complex64>,
    pub params: LctParams,
    pub tau: f64,
    pub c1: Complex64,
    pub c2: Complex64,
}

impl LfmSignalSpec {
    pub fn new(
        band: usize,
        coefficients: Vec<Complex64>,
        params: LctParams,
        tau: f64,
        c1: Complex64,
        c2: Complex64,
    ) -> Result<Self> {
        if coefficients.len() != 2 * band + 1 {
            return Err(Error::LengthMismatch {
                expected: 2 * band + 1,
                found: coefficients.len(),
            });
        }
        if c1 == Complex64::new(0.0, 0.0) || c2 == Complex64::new(0.0, 0.0) {
            return Err(Error::InvalidParameter("mixing constants must be nonzero".into()));
        }
        SeriesConfig::new(params, tau)?;
        Ok(Self {
            band,
            coefficients,
            params,
            tau,
            c1,
            c2,
        })
    }
}

fn check_precondition(fc: usize, band: usize, k: usize) -> Result<()> {
    if fc < band + 2 * k + 1 {
        return Err(Error::Precondition(format!(
            "impulsive-noise removal needs fc >= M + 2K + 1 = {}, got fc = {fc}",
            band + 2 * k + 1
        )));
    }
    Ok(())
}

/// `ŷ1[m] = r̂_BL[m] e^{-j d (m ω0 b)²/2b}` for `|m| ≤ M`.
fn signal_chirp(series: &SeriesConfig, m: i64) -> Complex64 {
    let p = series.real();
    series.real().output_chirp(m as f64 * series.omega0() * p.b)
}

/// Coefficients of the corrupted observation: `c1 ŷ1 + c2 ŷ2` in band and
/// `c2 ŷ2` outside.
pub fn corrupted_coefficients(spec: &LfmSignalSpec, s: &SpikeTrain, fc: usize) -> Result<FourierCoeffVector> {
    check_precondition(fc, spec.band, s.len())?;
    let series = SeriesConfig::new(spec.params, spec.tau)?;
    let mut y = chirp_fourier_coefficients(s, &series, fc)?;
    for (m, v) in (-(fc as i64)..=fc as i64).zip(y.values_mut()) {
        *v *= spec.c2;
        if m.unsigned_abs() as usize <= spec.band {
            let r = spec.coefficients[(m + spec.band as i64) as usize];
            *v += spec.c1 * r * signal_chirp(&series, m);
        }
    }
    Ok(y)
}

/// Low-pass samples of `c1 r_BL + c2 s` through the acquisition chain.
pub fn simulate_corrupted_samples(
    spec: &LfmSignalSpec,
    s: &SpikeTrain,
    cfg: &AcquisitionConfig,
) -> Result<MeasurementRecord> {
    if spec.params.max_abs_diff(cfg.params()) > 1e-12 || (spec.tau - cfg.tau()).abs() > 1e-12 * cfg.tau() {
        return Err(Error::InvalidConfig(
            "signal and acquisition use different parameters".into(),
        ));
    }
    let y = corrupted_coefficients(spec, s, cfg.fc())?;
    samples_from_coefficients(&y, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DenoisePath {
    MaskedSdp,
    PencilFallback,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DenoiseOptions {
    pub solver: SolverOptions,
    pub pencil: PencilConfig,
    /// Skip the SDP and go straight to the pencil.
    pub pencil_only: bool,
}

#[derive(Debug, Clone)]
pub struct DenoiseResult {
    /// Estimate of `r̂_BL[m]`, `|m| ≤ M`.
    pub signal: Vec<Complex64>,
    pub spikes: SpikeTrain,
    pub weights: Vec<Complex64>,
    pub path: DenoisePath,
    pub sdp: Option<SdpSolution>,
    /// Why the SDP path was abandoned, if it was.
    pub fallback_reason: Option<String>,
}

/// Separates the bandlimited signal and the spike train of a corrupted
/// record, given the band `M`, the spike count `K` and the mixing constants.
pub fn denoise_ain(
    rec: &MeasurementRecord,
    band: usize,
    k: usize,
    c1: Complex64,
    c2: Complex64,
    opts: &DenoiseOptions,
) -> Result<DenoiseResult> {
    let cfg = rec.config();
    let fc = cfg.fc();
    check_precondition(fc, band, k)?;
    if c1 == Complex64::new(0.0, 0.0) || c2 == Complex64::new(0.0, 0.0) {
        return Err(Error::InvalidParameter("mixing constants must be nonzero".into()));
    }
    let series = cfg.series();
    let w0 = series.omega0();
    let fit = recover_fourier_coeffs(&demodulate(rec), cfg).map_err(Error::at("coefficients"))?;
    let observed = fit.coeffs;
    let scaled = FourierCoeffVector::new(fc, observed.values().iter().map(|v| v / c2).collect())?;
    let out_of_band = |m: i64| m.unsigned_abs() as usize > band;

    let mut sdp_solution = None;
    let mut fallback_reason = None;
    let mut estimate = None;
    if !opts.pencil_only {
        let mask: Vec<bool> = scaled.indices().map(out_of_band).collect();
        let sdp = solve_dual_sdp_masked(&scaled, &mask, &opts.solver.sdp);
        sdp_solution = Some(sdp.clone());
        if !sdp.converged {
            fallback_reason = Some(format!("masked SDP stopped after {} iterations", sdp.iterations));
        } else {
            match locate_and_fit(&scaled, w0, sdp, &opts.solver, out_of_band) {
                Ok(found) if found.locations.len() == k => {
                    estimate = Some((found.locations, found.weights, DenoisePath::MaskedSdp));
                }
                Ok(found) => {
                    fallback_reason = Some(format!(
                        "masked SDP found {} spikes, expected {k}",
                        found.locations.len()
                    ));
                }
                Err(e) => fallback_reason = Some(e.to_string()),
            }
        }
    }
    let (locations, weights, path) = match estimate {
        Some(e) => e,
        None if k == 0 => (Vec::new(), Vec::new(), DenoisePath::PencilFallback),
        None => {
            let p = pencil_recover_on(
                &scaled,
                band as i64 + 1,
                fc - band,
                k,
                w0,
                &opts.pencil,
                out_of_band,
            )
            .map_err(Error::at("pencil"))?;
            (p.locations, p.weights, DenoisePath::PencilFallback)
        }
    };

    let spike_part = exponential_sums(
        &locations.iter().copied().zip(weights.iter().copied()).collect::<Vec<_>>(),
        w0,
        fc,
    );
    let signal = (-(band as i64)..=band as i64)
        .map(|m| {
            let y = observed.get(m).unwrap_or_default();
            let s = spike_part.get(m).unwrap_or_default();
            (y - c2 * s) / (c1 * signal_chirp(&series, m))
        })
        .collect();
    let amps = demodulate_weights(&weights, &locations, series.real());
    let spikes = SpikeTrain::from_unsorted(
        series.tau(),
        locations
            .iter()
            .zip(amps)
            .map(|(&t, c)| crate::lct::Spike::new(t, c))
            .collect(),
    )?;
    Ok(DenoiseResult {
        signal,
        spikes,
        weights,
        path,
        sdp: sdp_solution,
        fallback_reason,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lct::Spike;
    use crate::measurement::simulate_samples;
    use crate::solver::circular_distance;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn spec(band: usize) -> LfmSignalSpec {
        let coeffs = (0..2 * band + 1)
            .map(|i| c((i as f64 * 0.7).sin(), (i as f64 * 1.3).cos() * 0.5))
            .collect();
        LfmSignalSpec::new(band, coeffs, LctParams::rotation(PI / 3.0), 1.0, c(1.0, 0.5), c(0.8, -0.2)).unwrap()
    }

    fn two_spikes() -> SpikeTrain {
        SpikeTrain::new(1.0, vec![Spike::new(0.15, c(1.0, 0.4)), Spike::new(0.62, c(-0.7, 0.9))]).unwrap()
    }

    #[test]
    fn spec_validation() {
        let p = LctParams::fresnel(1.0);
        assert!(LfmSignalSpec::new(2, vec![c(1., 0.); 4], p, 1.0, c(1., 0.), c(1., 0.)).is_err());
        assert!(LfmSignalSpec::new(2, vec![c(1., 0.); 5], p, 1.0, c(0., 0.), c(1., 0.)).is_err());
        assert!(LfmSignalSpec::new(2, vec![c(1., 0.); 5], p, 1.0, c(1., 0.), c(1., 0.)).is_ok());
    }

    #[test]
    fn empty_train_leaves_out_of_band_zero() {
        let sp = spec(4);
        let y = corrupted_coefficients(&sp, &SpikeTrain::empty(1.0).unwrap(), 10).unwrap();
        for (m, v) in y.indices().zip(y.values()) {
            if m.abs() > 4 {
                assert_eq!(*v, c(0., 0.));
            }
        }
    }

    #[test]
    fn zero_signal_reduces_to_scaled_measurement() {
        let mut sp = spec(4);
        sp.coefficients = vec![c(0., 0.); 9];
        let cfg = AcquisitionConfig::with_cutoff(sp.params, 1.0, 10, 21).unwrap();
        let a = simulate_corrupted_samples(&sp, &two_spikes(), &cfg).unwrap();
        let b = simulate_samples(&two_spikes(), &cfg).unwrap();
        for (x, y) in a.samples().iter().zip(b.samples()) {
            assert!((x - sp.c2 * y).norm() < 1e-14);
        }
    }

    #[test]
    fn in_band_coefficients_by_direct_sums() {
        let sp = spec(4);
        let s = two_spikes();
        let y = corrupted_coefficients(&sp, &s, 10).unwrap();
        let series = SeriesConfig::new(sp.params, 1.0).unwrap();
        let p = series.real();
        for m in -4i64..=4 {
            let omega = m as f64 * series.omega0() * p.b;
            let y1 = sp.coefficients[(m + 4) as usize]
                * Complex64::from_polar(1.0, -p.d * omega * omega / (2.0 * p.b));
            let y2: Complex64 = s
                .iter()
                .map(|sp| sp.c * Complex64::from_polar(1.0, p.a * sp.t * sp.t / (2.0 * p.b) - m as f64 * series.omega0() * sp.t))
                .sum();
            assert!((y.get(m).unwrap() - (sp.c1 * y1 + sp.c2 * y2)).norm() < 1e-12);
        }
    }

    #[test]
    fn precondition_is_checked() {
        let sp = spec(4);
        let cfg = AcquisitionConfig::with_cutoff(sp.params, 1.0, 8, 17).unwrap();
        let err = simulate_corrupted_samples(&sp, &two_spikes(), &cfg).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
        let ok_cfg = AcquisitionConfig::with_cutoff(sp.params, 1.0, 9, 19).unwrap();
        let rec = simulate_corrupted_samples(&sp, &two_spikes(), &ok_cfg).unwrap();
        let short = MeasurementRecord::new(rec.samples().to_vec(), ok_cfg).unwrap();
        let err = denoise_ain(&short, 4, 3, sp.c1, sp.c2, &DenoiseOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn empty_train_recovers_signal_exactly() {
        let sp = spec(4);
        let cfg = AcquisitionConfig::with_cutoff(sp.params, 1.0, 10, 21).unwrap();
        let rec = simulate_corrupted_samples(&sp, &SpikeTrain::empty(1.0).unwrap(), &cfg).unwrap();
        let out = denoise_ain(&rec, 4, 0, sp.c1, sp.c2, &DenoiseOptions::default()).unwrap();
        assert!(out.spikes.is_empty());
        for (a, b) in out.signal.iter().zip(&sp.coefficients) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    fn check_recovery(out: &DenoiseResult, sp: &LfmSignalSpec, truth: &SpikeTrain) {
        let scale = sp.coefficients.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (a, b) in out.signal.iter().zip(&sp.coefficients) {
            assert!((a - b).norm() <= 1e-6 * scale, "{a} vs {b}");
        }
        assert_eq!(out.spikes.len(), truth.len());
        for (a, b) in out.spikes.iter().zip(truth.iter()) {
            assert!(circular_distance(a.t, b.t, 1.0) <= 1e-6);
            assert!((a.c - b.c).norm() <= 1e-6 * b.c.norm());
        }
    }

    #[test]
    fn two_spikes_through_masked_sdp() {
        let sp = spec(4);
        let cfg = AcquisitionConfig::with_cutoff(sp.params, 1.0, 10, 21).unwrap();
        let rec = simulate_corrupted_samples(&sp, &two_spikes(), &cfg).unwrap();
        let out = denoise_ain(&rec, 4, 2, sp.c1, sp.c2, &DenoiseOptions::default()).unwrap();
        assert_eq!(out.path, DenoisePath::MaskedSdp, "{:?}", out.fallback_reason);
        check_recovery(&out, &sp, &two_spikes());
    }

    #[test]
    fn two_spikes_through_pencil_fallback() {
        let sp = spec(4);
        let cfg = AcquisitionConfig::with_cutoff(sp.params, 1.0, 10, 21).unwrap();
        let rec = simulate_corrupted_samples(&sp, &two_spikes(), &cfg).unwrap();
        let opts = DenoiseOptions {
            pencil_only: true,
            ..DenoiseOptions::default()
        };
        let out = denoise_ain(&rec, 4, 2, sp.c1, sp.c2, &opts).unwrap();
        assert_eq!(out.path, DenoisePath::PencilFallback);
        check_recovery(&out, &sp, &two_spikes());
    }

    #[test]
    fn doubling_c2_doubles_weights() {
        // The observation is generated with 2·c2 but separated assuming c2.
        let sp = spec(4);
        let mut doubled = sp.clone();
        doubled.c2 *= 2.0;
        let cfg = AcquisitionConfig::with_cutoff(sp.params, 1.0, 10, 21).unwrap();
        let opts = DenoiseOptions {
            pencil_only: true,
            ..DenoiseOptions::default()
        };
        let rec = simulate_corrupted_samples(&sp, &two_spikes(), &cfg).unwrap();
        let one = denoise_ain(&rec, 4, 2, sp.c1, sp.c2, &opts).unwrap();
        let rec = simulate_corrupted_samples(&doubled, &two_spikes(), &cfg).unwrap();
        let two = denoise_ain(&rec, 4, 2, sp.c1, sp.c2, &opts).unwrap();
        for (a, b) in one.spikes.iter().zip(two.spikes.iter()) {
            assert!((a.t - b.t).abs() <= 1e-8);
            assert!((b.c - a.c * 2.0).norm() <= 1e-8 * a.c.norm());
        }
    }
}
