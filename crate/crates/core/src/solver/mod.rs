//! Super-resolution by total-variation minimization: dual SDP, dual
//! polynomial roots, amplitude least squares and chirp demodulation.

mod sdp;
mod support;

pub use sdp::{solve_dual_sdp, solve_dual_sdp_masked, SdpOptions, SdpSolution};
pub use support::{build_dual_polynomial, extract_support, polish_location, SupportOptions, SupportPoint};

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lct::{RealParams, Spike, SpikeTrain};
use crate::linalg::{least_squares, CMatrix, CVector};
use crate::measurement::{demodulate, recover_fourier_coeffs, MeasurementRecord};
use crate::series::{FourierCoeffVector, SeriesConfig};

/// Everything tunable in the recovery chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub sdp: SdpOptions,
    pub support: SupportOptions,
    /// Refine each location to the critical point of `|q(t)|²`.
    pub polish: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            sdp: SdpOptions::default(),
            support: SupportOptions::default(),
            polish: true,
        }
    }
}

/// Least-squares weights for fixed locations.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeFit {
    pub weights: Vec<Complex64>,
    /// `‖E ρ - ŷ‖₂` over the rows used.
    pub residual: f64,
    pub condition: f64,
}

/// Output of the full recovery chain.
#[derive(Debug, Clone)]
pub struct RecoveryResult {
    pub spikes: SpikeTrain,
    /// `ρ̃_k = c̃_k e^{+j a t̃_k²/2b}`.
    pub weights: Vec<Complex64>,
    /// `|p(e^{j ω0 t̃_k})|` at each location.
    pub root_residuals: Vec<f64>,
    pub amplitude_residual: f64,
    pub coefficients: FourierCoeffVector,
    pub coefficient_residual: f64,
    pub idft_condition: f64,
    /// Degree of the dual polynomial after leading-zero trimming.
    pub polynomial_degree: usize,
    pub sdp: SdpSolution,
}

/// Circular minimum separation `min_{k≠l} |t_k - t_l|_τ`; infinite for
/// fewer than two spikes.
pub fn minimum_separation(s: &SpikeTrain) -> f64 {
    circular_min_gap(&s.locations(), s.tau())
}

pub(crate) fn circular_min_gap(locations: &[f64], tau: f64) -> f64 {
    if locations.len() < 2 {
        return f64::INFINITY;
    }
    let mut t = locations.to_vec();
    t.sort_by(f64::total_cmp);
    let mut best = t[0] + tau - t[t.len() - 1];
    for w in t.windows(2) {
        best = best.min(w[1] - w[0]);
    }
    best
}

/// Circular distance on `[0, τ)`.
pub fn circular_distance(a: f64, b: f64, tau: f64) -> f64 {
    let d = (a - b).rem_euclid(tau);
    d.min(tau - d)
}

/// Solves `Σ_k ρ_k e^{-j m ω0 t_k} = ŷ[m]` for `ρ` in the least-squares sense.
pub fn fit_amplitudes(
    y_hat: &FourierCoeffVector,
    locations: &[f64],
    omega0: f64,
) -> Result<AmplitudeFit> {
    fit_amplitudes_on(y_hat, locations, omega0, |_| true)
}

/// As [`fit_amplitudes`], restricted to the rows `m` with `use_row(m)`.
pub fn fit_amplitudes_on(
    y_hat: &FourierCoeffVector,
    locations: &[f64],
    omega0: f64,
    use_row: impl Fn(i64) -> bool,
) -> Result<AmplitudeFit> {
    let tau = TAU / omega0;
    let sep = circular_min_gap(locations, tau);
    if sep < 1e-8 * tau {
        return Err(Error::CollinearLocations { separation: sep });
    }
    let rows: Vec<(i64, Complex64)> = y_hat
        .indices()
        .zip(y_hat.values().iter().copied())
        .filter(|&(m, _)| use_row(m))
        .collect();
    if locations.len() > rows.len() {
        return Err(Error::Underdetermined {
            equations: rows.len(),
            unknowns: locations.len(),
        });
    }
    let e = CMatrix::from_fn(rows.len(), locations.len(), |r, k| {
        Complex64::from_polar(1.0, -(rows[r].0 as f64) * omega0 * locations[k])
    });
    let rhs = CVector::from_iterator(rows.len(), rows.iter().map(|r| r.1));
    let ls = least_squares(&e, &rhs)?;
    let condition = ls.condition();
    Ok(AmplitudeFit {
        weights: ls.solution.iter().copied().collect(),
        residual: ls.residual,
        condition,
    })
}

/// `c_k = ρ_k e^{-j a t_k²/2b}`.
pub fn demodulate_weights(weights: &[Complex64], locations: &[f64], params: &RealParams) -> Vec<Complex64> {
    weights
        .iter()
        .zip(locations)
        .map(|(&rho, &t)| rho * params.chirp(t).conj())
        .collect()
}

/// Locations and weights recovered from chirp-modulated Fourier coefficients.
#[derive(Debug, Clone)]
pub struct SpectralRecovery {
    pub locations: Vec<f64>,
    pub weights: Vec<Complex64>,
    pub root_residuals: Vec<f64>,
    pub amplitude_residual: f64,
    pub polynomial_degree: usize,
    pub sdp: SdpSolution,
}

/// SDP, roots and amplitude fit on a coefficient vector with period
/// `2π/ω0`; no chirp is involved at this stage.
pub fn recover_from_coefficients(
    y_hat: &FourierCoeffVector,
    omega0: f64,
    opts: &SolverOptions,
) -> Result<SpectralRecovery> {
    let sdp = solve_dual_sdp(y_hat, &opts.sdp);
    locate_and_fit(y_hat, omega0, sdp, opts, |_| true)
}

pub(crate) fn locate_and_fit(
    y_hat: &FourierCoeffVector,
    omega0: f64,
    sdp: SdpSolution,
    opts: &SolverOptions,
    use_row: impl Fn(i64) -> bool,
) -> Result<SpectralRecovery> {
    let tau = TAU / omega0;
    let poly = build_dual_polynomial(&sdp.u);
    let scale = poly.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let polynomial_degree = poly
        .iter()
        .rposition(|z| z.norm() > 1e-14 * scale)
        .unwrap_or(0);
    let points = extract_support(&poly, omega0, tau, &opts.support).map_err(Error::at("support"))?;
    let mut locations: Vec<f64> = points.iter().map(|p| p.t).collect();
    let mut root_residuals: Vec<f64> = points.iter().map(|p| p.residual).collect();
    if opts.polish {
        let max_step = opts.support.eps_dup * tau;
        for (t, res) in locations.iter_mut().zip(root_residuals.iter_mut()) {
            *t = polish_location(&sdp.u, omega0, tau, *t, max_step);
            let q = sdp.dual_polynomial_at(omega0, *t);
            *res = (1.0 - q.norm_sqr()).abs();
        }
        let mut order: Vec<usize> = (0..locations.len()).collect();
        order.sort_by(|&i, &j| locations[i].total_cmp(&locations[j]));
        locations = order.iter().map(|&i| locations[i]).collect();
        root_residuals = order.iter().map(|&i| root_residuals[i]).collect();
    }
    let fit = fit_amplitudes_on(y_hat, &locations, omega0, use_row).map_err(Error::at("amplitudes"))?;
    Ok(SpectralRecovery {
        locations,
        weights: fit.weights,
        root_residuals,
        amplitude_residual: fit.residual,
        polynomial_degree,
        sdp,
    })
}

/// Full chain from low-pass LCT samples to a spike train.
pub fn super_resolve(rec: &MeasurementRecord, opts: &SolverOptions) -> Result<RecoveryResult> {
    let cfg = rec.config();
    let y = demodulate(rec);
    let fit = recover_fourier_coeffs(&y, cfg).map_err(Error::at("coefficients"))?;
    let series = cfg.series();
    let spectral = recover_from_coefficients(&fit.coeffs, series.omega0(), opts)?;
    assemble(spectral, &series, fit.coeffs, fit.residual, fit.condition)
}

pub(crate) fn assemble(
    spectral: SpectralRecovery,
    series: &SeriesConfig,
    coefficients: FourierCoeffVector,
    coefficient_residual: f64,
    idft_condition: f64,
) -> Result<RecoveryResult> {
    let amps = demodulate_weights(&spectral.weights, &spectral.locations, series.real());
    let spikes = SpikeTrain::from_unsorted(
        series.tau(),
        spectral
            .locations
            .iter()
            .zip(&amps)
            .map(|(&t, &c)| Spike::new(t, c))
            .collect(),
    )
    .map_err(Error::at("assemble"))?;
    Ok(RecoveryResult {
        spikes,
        weights: spectral.weights,
        root_residuals: spectral.root_residuals,
        amplitude_residual: spectral.amplitude_residual,
        coefficients,
        coefficient_residual,
        idft_condition,
        polynomial_degree: spectral.polynomial_degree,
        sdp: spectral.sdp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lct::LctParams;
    use crate::measurement::{simulate_samples, AcquisitionConfig};
    use crate::series::exponential_sums;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn separation_examples() {
        let s = SpikeTrain::new(1.0, vec![Spike::new(0.1, c(1., 0.)), Spike::new(0.95, c(1., 0.))]).unwrap();
        assert!((minimum_separation(&s) - 0.15).abs() < 1e-12);
        let one = SpikeTrain::new(1.0, vec![Spike::new(0.5, c(1., 0.))]).unwrap();
        assert_eq!(minimum_separation(&one), f64::INFINITY);
        assert!((circular_distance(0.02, 0.98, 1.0) - 0.04).abs() < 1e-12);
    }

    #[test]
    fn amplitude_fit_is_exact_on_clean_data() {
        let w0 = 2.0 * PI;
        let truth = [(0.1, c(1., -0.5)), (0.45, c(-0.3, 0.8))];
        let y = exponential_sums(&truth, w0, 6);
        let fit = fit_amplitudes(&y, &[0.1, 0.45], w0).unwrap();
        assert!(fit.residual < 1e-12);
        for (w, (_, rho)) in fit.weights.iter().zip(&truth) {
            assert!((w - rho).norm() < 1e-12);
        }
    }

    #[test]
    fn coincident_locations_are_rejected() {
        let y = FourierCoeffVector::zeros(4);
        let err = fit_amplitudes(&y, &[0.3, 0.3 + 1e-10], 2.0 * PI).unwrap_err();
        assert!(matches!(err, Error::CollinearLocations { .. }));
    }

    #[test]
    fn weights_demodulate_with_conjugate_chirp() {
        let p = LctParams::fresnel(2.0).require_pipeline().unwrap();
        let c0 = c(0.7, 0.2);
        let rho = c0 * p.chirp(0.4);
        let back = demodulate_weights(&[rho], &[0.4], &p);
        assert!((back[0] - c0).norm() < 1e-14);
    }

    #[test]
    fn empty_measurement_recovers_nothing() {
        let cfg = AcquisitionConfig::with_cutoff(LctParams::rotation(PI / 3.0), 1.0, 4, 9).unwrap();
        let rec = simulate_samples(&SpikeTrain::empty(1.0).unwrap(), &cfg).unwrap();
        let out = super_resolve(&rec, &SolverOptions::default()).unwrap();
        assert!(out.spikes.is_empty());
    }

    #[test]
    fn recovers_three_spikes_through_fresnel_samples() {
        let cfg = AcquisitionConfig::with_cutoff(LctParams::fresnel(1.0), 1.0, 10, 21).unwrap();
        let truth = SpikeTrain::new(
            1.0,
            vec![
                Spike::new(0.12, c(1.0, 0.3)),
                Spike::new(0.47, c(-0.6, 0.9)),
                Spike::new(0.81, c(0.2, -1.1)),
            ],
        )
        .unwrap();
        let rec = simulate_samples(&truth, &cfg).unwrap();
        let out = super_resolve(&rec, &SolverOptions::default()).unwrap();
        assert!(out.sdp.converged);
        assert_eq!(out.spikes.len(), 3);
        for (a, b) in out.spikes.iter().zip(truth.iter()) {
            assert!(circular_distance(a.t, b.t, 1.0) < 1e-7, "{} vs {}", a.t, b.t);
            assert!((a.c - b.c).norm() < 1e-6 * b.c.norm());
        }
    }
}
