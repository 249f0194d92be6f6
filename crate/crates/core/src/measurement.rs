//! Acquisition chain: chirped low-pass filtering, uniform sampling,
//! demodulation and linear inversion back to the coefficients `ŷ[m]`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lct::{lct_trapezoid, LctParams, RealParams, SpikeTrain};
use crate::linalg::{least_squares, CMatrix, CVector};
use crate::series::{chirp_fourier_coefficients, FourierCoeffVector, SeriesConfig};

/// Largest condition number of the IDFT system accepted by
/// [`recover_fourier_coeffs`].
pub const MAX_IDFT_CONDITION: f64 = 1e10;

/// `floor` that forgives a few ulps of rounding below an integer.
fn guarded_floor(x: f64) -> f64 {
    (x + x.abs() * 1e-12).floor()
}

/// Cutoff `⌊τ / 2T⌋` from the period and the sampling step.
pub fn cutoff_from_period(tau: f64, period: f64) -> usize {
    guarded_floor(tau / (2.0 * period)).max(0.0) as usize
}

/// Sampling setup: transform, period, bandwidth `Ω` and sample count `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcquisitionConfig {
    params: LctParams,
    real: RealParams,
    tau: f64,
    bandwidth: f64,
    n_samples: usize,
}

impl AcquisitionConfig {
    pub fn new(params: LctParams, tau: f64, bandwidth: f64, n_samples: usize) -> Result<Self> {
        let real = params.require_pipeline()?;
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "period must be positive, got {tau}"
            )));
        }
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "bandwidth must be positive, got {bandwidth}"
            )));
        }
        let cfg = Self {
            params,
            real,
            tau,
            bandwidth,
            n_samples,
        };
        let fc = cfg.fc();
        if fc < 1 {
            return Err(Error::InvalidConfig(format!(
                "cutoff floor(Ωτ/2b) = 0 for Ω = {bandwidth}, τ = {tau}, b = {}",
                real.b
            )));
        }
        if n_samples < 2 * fc + 1 {
            return Err(Error::InvalidConfig(format!(
                "N = {n_samples} samples cannot resolve 2fc + 1 = {} coefficients",
                2 * fc + 1
            )));
        }
        Ok(cfg)
    }

    /// Picks `Ω` so that the cutoff is exactly `fc`, half a step away from
    /// the floor discontinuities.
    pub fn with_cutoff(params: LctParams, tau: f64, fc: usize, n_samples: usize) -> Result<Self> {
        let b = params.require_pipeline()?.b;
        let bandwidth = (fc as f64 + 0.5) * 2.0 * b / tau;
        Self::new(params, tau, bandwidth, n_samples)
    }

    pub fn params(&self) -> &LctParams {
        &self.params
    }

    pub fn real(&self) -> &RealParams {
        &self.real
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    /// Sampling step `T = b / Ω`.
    pub fn period(&self) -> f64 {
        self.real.b / self.bandwidth
    }

    /// Cutoff `⌊Ωτ / 2b⌋`.
    pub fn fc(&self) -> usize {
        guarded_floor(self.bandwidth * self.tau / (2.0 * self.real.b)).max(0.0) as usize
    }

    pub fn omega0(&self) -> f64 {
        2.0 * PI / self.tau
    }

    pub fn series(&self) -> SeriesConfig {
        SeriesConfig::new(self.params, self.tau).expect("validated at construction")
    }

    /// Sampling instants `nT`.
    pub fn sample_times(&self) -> impl Iterator<Item = f64> + '_ {
        let t = self.period();
        (0..self.n_samples).map(move |n| n as f64 * t)
    }

    /// `√(j2πb) · τ`, the scale removed by demodulation.
    fn modulation_scale(&self) -> Complex64 {
        Complex64::new(0.0, 2.0 * PI * self.real.b).sqrt() * self.tau
    }
}

/// `N` low-pass samples together with the setup that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    samples: Vec<Complex64>,
    config: AcquisitionConfig,
}

impl MeasurementRecord {
    pub fn new(samples: Vec<Complex64>, config: AcquisitionConfig) -> Result<Self> {
        if samples.len() != config.n_samples {
            return Err(Error::LengthMismatch {
                expected: config.n_samples,
                found: samples.len(),
            });
        }
        Ok(Self { samples, config })
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn config(&self) -> &AcquisitionConfig {
        &self.config
    }
}

/// `φ_LP(t) = (Ω/b) e^{-j a t²/2b} sinc((Ω/b) t)` with the normalized sinc.
pub fn lowpass_kernel(cfg: &AcquisitionConfig, t: f64) -> Complex64 {
    let scale = cfg.bandwidth / cfg.real.b;
    cfg.real.chirp(t).conj() * (scale * sinc(scale * t))
}

/// Closed-form low-pass samples of a spike train,
/// `h[n] = e^{-j a (nT)²/2b} / (√(j2πb) τ) · Σ_{|m|≤fc} ŷ[m] e^{j ω0 m nT}`.
pub fn simulate_samples(s: &SpikeTrain, cfg: &AcquisitionConfig) -> Result<MeasurementRecord> {
    if (s.tau() - cfg.tau).abs() > 1e-12 * cfg.tau {
        return Err(Error::InvalidSpikeTrain(format!(
            "spike train period {} differs from acquisition period {}",
            s.tau(),
            cfg.tau
        )));
    }
    let coeffs = chirp_fourier_coefficients(s, &cfg.series(), cfg.fc())?;
    samples_from_coefficients(&coeffs, cfg)
}

/// Low-pass samples produced by an arbitrary coefficient vector with `fc`
/// matching the acquisition cutoff.
pub fn samples_from_coefficients(
    coeffs: &FourierCoeffVector,
    cfg: &AcquisitionConfig,
) -> Result<MeasurementRecord> {
    if coeffs.fc() != cfg.fc() {
        return Err(Error::LengthMismatch {
            expected: 2 * cfg.fc() + 1,
            found: coeffs.values().len(),
        });
    }
    let w0 = cfg.omega0();
    let scale = cfg.modulation_scale().inv();
    let samples = cfg
        .sample_times()
        .map(|t| {
            let sum: Complex64 = coeffs
                .indices()
                .zip(coeffs.values())
                .map(|(m, &y)| y * Complex64::from_polar(1.0, w0 * m as f64 * t))
                .sum();
            cfg.real.chirp(t).conj() * scale * sum
        })
        .collect();
    MeasurementRecord::new(samples, *cfg)
}

/// `y[n] = √(j2πb) τ e^{+j a (nT)²/2b} h[n]`, the trigonometric sum `Σ ŷ[m] e^{j ω0 m nT}`.
pub fn demodulate(rec: &MeasurementRecord) -> Vec<Complex64> {
    let cfg = &rec.config;
    let scale = cfg.modulation_scale();
    cfg.sample_times()
        .zip(&rec.samples)
        .map(|(t, &h)| scale * cfg.real.chirp(t) * h)
        .collect()
}

/// Least-squares coefficients with inversion diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientFit {
    pub coeffs: FourierCoeffVector,
    /// `‖V ŷ - y‖₂`.
    pub residual: f64,
    pub condition: f64,
}

/// IDFT matrix `V[n, m] = e^{j ω0 m nT}`, columns in ascending `m`.
pub fn idft_matrix(cfg: &AcquisitionConfig) -> CMatrix {
    let fc = cfg.fc() as i64;
    let w0 = cfg.omega0();
    let times: Vec<f64> = cfg.sample_times().collect();
    CMatrix::from_fn(times.len(), (2 * fc + 1) as usize, |n, col| {
        let m = col as i64 - fc;
        Complex64::from_polar(1.0, w0 * m as f64 * times[n])
    })
}

/// Solves `V ŷ = y` in the least-squares sense through an SVD.
pub fn recover_fourier_coeffs(y: &[Complex64], cfg: &AcquisitionConfig) -> Result<CoefficientFit> {
    let fc = cfg.fc();
    let unknowns = 2 * fc + 1;
    if y.len() < unknowns {
        return Err(Error::Underdetermined {
            equations: y.len(),
            unknowns,
        });
    }
    if y.len() != cfg.n_samples {
        return Err(Error::LengthMismatch {
            expected: cfg.n_samples,
            found: y.len(),
        });
    }
    let v = idft_matrix(cfg);
    let rhs = CVector::from_column_slice(y);
    let ls = least_squares(&v, &rhs)?;
    let condition = ls.condition();
    if !(condition <= MAX_IDFT_CONDITION) {
        return Err(Error::RankDeficient {
            n: y.len(),
            fc,
            period: cfg.period(),
            tau: cfg.tau,
            condition,
        });
    }
    Ok(CoefficientFit {
        coeffs: FourierCoeffVector::new(fc, ls.solution.iter().copied().collect())?,
        residual: ls.residual,
        condition,
    })
}

/// Whether the cutoff admits `K` spikes: `fc >= K`.
pub fn check_sampling_condition(cfg: &AcquisitionConfig, k: usize) -> bool {
    cfg.fc() >= k
}

/// Discrete form of the chirped convolution
/// `(f *_Λ g)(t) = e^{-j a t²/2b}/√(j2πb) · ((f e^{j a t²/2b}) * (g e^{j a t²/2b}))(t)`.
///
/// `f` and `g` are samples on the same uniform `grid`. The full linear
/// convolution is returned on its own grid, starting at `2 · grid[0]`.
pub fn lct_convolve_discrete(
    f: &[Complex64],
    g: &[Complex64],
    params: &LctParams,
    grid: &[f64],
) -> Result<(Vec<f64>, Vec<Complex64>)> {
    let real = params.require_pipeline()?;
    if f.len() != grid.len() || g.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            found: if f.len() != grid.len() { f.len() } else { g.len() },
        });
    }
    if grid.len() < 2 {
        return Err(Error::InvalidConfig("convolution grid needs two points".into()));
    }
    let step = grid[1] - grid[0];
    let uniform = grid
        .windows(2)
        .all(|w| ((w[1] - w[0]) - step).abs() <= 1e-9 * step.abs());
    if !(step > 0.0) || !uniform {
        return Err(Error::InvalidConfig("convolution grid must be uniform and ascending".into()));
    }
    let fm: Vec<Complex64> = grid.iter().zip(f).map(|(&t, &v)| v * real.chirp(t)).collect();
    let gm: Vec<Complex64> = grid.iter().zip(g).map(|(&t, &v)| v * real.chirp(t)).collect();
    let len = 2 * grid.len() - 1;
    let start = 2.0 * grid[0];
    let out_grid: Vec<f64> = (0..len).map(|k| start + k as f64 * step).collect();
    let norm = Complex64::new(0.0, 2.0 * PI * real.b).sqrt().inv() * step;
    let out = out_grid
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let lo = k.saturating_sub(gm.len() - 1);
            let hi = k.min(fm.len() - 1);
            let conv: Complex64 = (lo..=hi).map(|i| fm[i] * gm[k - i]).sum();
            real.chirp(t).conj() * norm * conv
        })
        .collect();
    Ok((out_grid, out))
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// The reference pair for checking the convolution–multiplication property:
/// `f(t) = e^{-jat²/2b} sinc⁴(t)` and `g(t) = e^{-jat²/2b} sinc⁴(t/2 - 0.3) e^{j t/2}`.
/// Both are band-limited once the chirp is removed, and decay like `t⁻⁴`.
pub fn band_limited_test_pair(params: &LctParams, t: f64) -> Result<(Complex64, Complex64)> {
    let real = params.require_pipeline()?;
    let demod = real.chirp(t).conj();
    let f = demod * sinc(t).powi(4);
    let g = demod * sinc(t / 2.0 - 0.3).powi(4) * Complex64::from_polar(1.0, t / 2.0);
    Ok((f, g))
}

/// Largest relative mismatch `|L[f *_Λ g](ω) - e^{-jdω²/2b} L[f](ω) L[g](ω)|`
/// over `omegas`, for the reference pair sampled on `[-half_width, half_width]`
/// with spacing `step`, all transforms by trapezoid quadrature. Normalized by
/// the largest right-hand side.
pub fn convolution_duality_error(
    params: &LctParams,
    step: f64,
    half_width: f64,
    omegas: &[f64],
) -> Result<f64> {
    let real = params.require_pipeline()?;
    let count = (half_width / step).round() as i64;
    let grid: Vec<f64> = (-count..=count).map(|i| i as f64 * step).collect();
    let (f, g): (Vec<Complex64>, Vec<Complex64>) = grid
        .iter()
        .map(|&t| band_limited_test_pair(params, t))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    let (out_grid, conv) = lct_convolve_discrete(&f, &g, params, &grid)?;
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for &w in omegas {
        let lhs = lct_trapezoid(params, &out_grid, &conv, w)?;
        let rhs = real.output_chirp(w)
            * lct_trapezoid(params, &grid, &f, w)?
            * lct_trapezoid(params, &grid, &g, w)?;
        worst = worst.max((lhs - rhs).norm());
        scale = scale.max(rhs.norm());
    }
    Ok(if scale > 0.0 { worst / scale } else { worst })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lct::Spike;
    use crate::series::synthesize_on_grid;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn generic() -> LctParams {
        LctParams::real(0.6, 0.9, (0.6 * 1.2 - 1.0) / 0.9, 1.2).unwrap()
    }

    #[test]
    fn config_derivations() {
        let cfg = AcquisitionConfig::new(LctParams::fresnel(2.0), 1.0, 45.0, 60).unwrap();
        assert!((cfg.period() - 2.0 / 45.0).abs() < 1e-16);
        assert_eq!(cfg.fc(), 11);
        assert_eq!(cutoff_from_period(1.0, cfg.period()), 11);
        let cfg = AcquisitionConfig::with_cutoff(generic(), 2.5, 7, 15).unwrap();
        assert_eq!(cfg.fc(), 7);
        assert!(AcquisitionConfig::with_cutoff(generic(), 1.0, 7, 14).is_err());
        assert!(AcquisitionConfig::new(generic(), 1.0, 0.1, 50).is_err());
        assert!(AcquisitionConfig::new(LctParams::fresnel(-1.0), 1.0, 10.0, 50).is_err());
    }

    #[test]
    fn lowpass_kernel_values() {
        let cfg = AcquisitionConfig::new(generic(), 1.0, 20.0, 30).unwrap();
        let scale = 20.0 / 0.9;
        assert_eq!(lowpass_kernel(&cfg, 0.0), c(scale, 0.0));
        assert!(lowpass_kernel(&cfg, cfg.period()).norm() < 1e-14);
        let plain = AcquisitionConfig::new(LctParams::fourier(), 4.0, 1.0, 5).unwrap();
        for t in [0.3, -1.7, 2.25] {
            let sinc = (PI * t).sin() / (PI * t);
            assert!((lowpass_kernel(&plain, t) - c(sinc, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn empty_train_gives_zero_samples() {
        let cfg = AcquisitionConfig::with_cutoff(generic(), 1.0, 4, 12).unwrap();
        let rec = simulate_samples(&SpikeTrain::empty(1.0).unwrap(), &cfg).unwrap();
        assert!(rec.samples().iter().all(|z| *z == c(0., 0.)));
        assert!(demodulate(&rec).iter().all(|z| *z == c(0., 0.)));
        let fit = recover_fourier_coeffs(&demodulate(&rec), &cfg).unwrap();
        assert_eq!(fit.coeffs, FourierCoeffVector::zeros(4));
    }

    #[test]
    fn single_spike_fourier_dirichlet_samples() {
        let cfg = AcquisitionConfig::with_cutoff(LctParams::fourier(), 1.0, 2, 5).unwrap();
        let s = SpikeTrain::new(1.0, vec![Spike::new(0.0, c(1., 0.))]).unwrap();
        let rec = simulate_samples(&s, &cfg).unwrap();
        let t = cfg.period();
        for (n, h) in rec.samples().iter().enumerate() {
            let sum: Complex64 = (-2..=2)
                .map(|m| Complex64::from_polar(1.0, 2.0 * PI * m as f64 * n as f64 * t))
                .sum();
            let expected = sum / c(0.0, 2.0 * PI).sqrt();
            assert!((h - expected).norm() < 1e-13);
        }
    }

    #[test]
    fn demodulation_without_chirp() {
        let cfg = AcquisitionConfig::with_cutoff(LctParams::fourier(), 1.0, 3, 9).unwrap();
        let h: Vec<Complex64> = (0..9).map(|i| c(i as f64, 1.0 - i as f64)).collect();
        let rec = MeasurementRecord::new(h.clone(), cfg).unwrap();
        for (y, h) in demodulate(&rec).iter().zip(&h) {
            assert!((y - c(0.0, 2.0 * PI).sqrt() * h).norm() < 1e-13);
        }
        assert!(MeasurementRecord::new(vec![c(0., 0.)], cfg).is_err());
    }

    #[test]
    fn inversion_examples() {
        let cfg = AcquisitionConfig::with_cutoff(generic(), 1.3, 5, 11).unwrap();
        let y_hat: Vec<Complex64> = (0..11).map(|i| c((i as f64).sin(), (i as f64 * 0.7).cos())).collect();
        let truth = FourierCoeffVector::new(5, y_hat).unwrap();
        let y = idft_matrix(&cfg) * CVector::from_column_slice(truth.values());
        let fit = recover_fourier_coeffs(y.as_slice(), &cfg).unwrap();
        assert!(fit.coeffs.max_abs_diff(&truth) < 1e-10);
        assert!(fit.residual < 1e-10);

        let zero = recover_fourier_coeffs(&[c(0., 0.); 11], &cfg).unwrap();
        assert_eq!(zero.coeffs.norm(), 0.0);

        assert!(matches!(
            recover_fourier_coeffs(&[c(1., 0.); 10], &cfg),
            Err(Error::Underdetermined { equations: 10, unknowns: 11 })
        ));
    }

    #[test]
    fn aliased_sampling_is_rank_deficient() {
        // τ/2T exactly integral: the m = ±fc columns coincide.
        let cfg = AcquisitionConfig::new(LctParams::fresnel(1.0), 1.0, 10.0, 11).unwrap();
        assert_eq!(cfg.fc(), 5);
        let err = recover_fourier_coeffs(&[c(1., 0.); 11], &cfg).unwrap_err();
        assert!(matches!(err, Error::RankDeficient { n: 11, fc: 5, .. }), "{err}");
    }

    #[test]
    fn sampling_condition() {
        // τ = 1, T = 0.1 (Ω = b / T = 10 for b = 1).
        let cfg = AcquisitionConfig::new(LctParams::fresnel(1.0), 1.0, 10.0, 11).unwrap();
        assert_eq!(cfg.fc(), 5);
        assert!(check_sampling_condition(&cfg, 5));
        assert!(!check_sampling_condition(&cfg, 6));
        assert_eq!(cutoff_from_period(1.0, 0.1), 5);
    }

    proptest! {
        #[test]
        fn cutoff_routes_agree(b in 0.05f64..5.0, tau in 0.1f64..10.0, omega in 0.5f64..200.0) {
            let p = LctParams::fresnel(b);
            let Ok(cfg) = AcquisitionConfig::new(p, tau, omega, 10_000) else { return Ok(()) };
            prop_assert_eq!(cfg.fc(), cutoff_from_period(tau, cfg.period()));
        }

        #[test]
        fn simulate_demodulate_matches_trigonometric_sum(
            ts in prop::collection::vec(0.0f64..1.0, 1..6),
            amps in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 6),
            a in -2.0f64..2.0, b in 0.1f64..3.0, d in -2.0f64..2.0,
            tau in 0.5f64..3.0, fc in 1usize..12, extra in 0usize..5,
        ) {
            let p = LctParams::real(a, b, (a * d - 1.0) / b, d).unwrap();
            let mut spikes: Vec<Spike> = ts.iter().zip(&amps)
                .map(|(&t, &(re, im))| Spike::new(t * tau, c(re, im))).collect();
            spikes.sort_by(|x, y| x.t.total_cmp(&y.t));
            spikes.dedup_by(|x, y| x.t == y.t);
            let s = SpikeTrain::new(tau, spikes).unwrap();
            let cfg = AcquisitionConfig::with_cutoff(p, tau, fc, 2 * fc + 1 + extra).unwrap();
            let y_hat = chirp_fourier_coefficients(&s, &cfg.series(), fc).unwrap();
            let y = demodulate(&simulate_samples(&s, &cfg).unwrap());
            let w0 = cfg.omega0();
            for (n, yn) in y.iter().enumerate() {
                let t = n as f64 * cfg.period();
                let direct: Complex64 = y_hat.indices().zip(y_hat.values())
                    .map(|(m, &v)| v * Complex64::from_polar(1.0, w0 * m as f64 * t)).sum();
                prop_assert!((yn - direct).norm() <= 1e-12 * (1.0 + direct.norm()) * (2 * fc + 1) as f64);
            }
        }
    }

    #[test]
    fn convolution_with_delta_returns_input() {
        let p = generic();
        let h = 0.01;
        let grid: Vec<f64> = (-200..=200).map(|i| i as f64 * h).collect();
        let f: Vec<Complex64> = grid.iter().map(|&t| c((-t * t).exp(), t)).collect();
        let mut g = vec![c(0., 0.); grid.len()];
        g[200] = c(1.0 / h, 0.0);
        let (out_grid, out) = lct_convolve_discrete(&f, &g, &p, &grid).unwrap();
        let scale = c(0.0, 2.0 * PI * 0.9).sqrt().inv();
        for (i, &t) in grid.iter().enumerate() {
            let k = i + 200;
            assert!((out_grid[k] - t).abs() < 1e-12);
            assert!((out[k] - f[i] * scale).norm() < 1e-12);
        }
    }

    #[test]
    fn convolution_reduces_to_plain_convolution_without_chirp() {
        let h = 0.05;
        let grid: Vec<f64> = (0..40).map(|i| i as f64 * h).collect();
        let f: Vec<Complex64> = grid.iter().map(|&t| c(t.sin(), 0.5)).collect();
        let g: Vec<Complex64> = grid.iter().map(|&t| c((-t).exp(), t)).collect();
        let (_, out) = lct_convolve_discrete(&f, &g, &LctParams::fourier(), &grid).unwrap();
        let scale = c(0.0, 2.0 * PI).sqrt().inv();
        for (k, z) in out.iter().enumerate() {
            let lo = k.saturating_sub(39);
            let direct: Complex64 = (lo..=k.min(39)).map(|i| f[i] * g[k - i]).sum::<Complex64>() * h;
            assert!((z - scale * direct).norm() < 1e-13);
        }
        assert!(lct_convolve_discrete(&f[..3], &g, &LctParams::fourier(), &grid).is_err());
    }

    /// Low-pass samples agree with brute-force chirped convolution of the
    /// band-limited series against φ_LP, and the discrepancy shrinks as the
    /// truncation window grows.
    #[test]
    fn closed_form_samples_match_dense_convolution() {
        let p = generic();
        let tau = 1.0;
        let fc = 4;
        let cfg = AcquisitionConfig::with_cutoff(p, tau, fc, 2 * fc + 1).unwrap();
        let s = SpikeTrain::new(
            tau,
            vec![Spike::new(0.3, c(1.0, 0.0)), Spike::new(0.65, c(-0.5, 0.8))],
        )
        .unwrap();
        let y_hat = chirp_fourier_coefficients(&s, &cfg.series(), fc).unwrap();
        let rec = simulate_samples(&s, &cfg).unwrap();
        let real = *cfg.real();
        let w0 = cfg.omega0();
        // Σ ŷ e^{jmω0t}/τ is periodic; the chirped signal of the series is
        // e^{-jat²/2b} times it, so its modulated version is that sum.
        let periodic = |t: f64| -> Complex64 {
            y_hat
                .indices()
                .zip(y_hat.values())
                .map(|(m, &v)| v * Complex64::from_polar(1.0, w0 * m as f64 * t))
                .sum::<Complex64>()
                / tau
        };
        let sample_at = |n: usize, half_width: f64, step: f64| -> Complex64 {
            let t = n as f64 * cfg.period();
            let count = (half_width / step).round() as i64;
            let mut acc = c(0., 0.);
            for i in -count..=count {
                let x = i as f64 * step;
                let w = if i.abs() == count { 0.5 } else { 1.0 };
                // s̃(t - x) φ̃(x) with both chirps removed.
                let lp = lowpass_kernel(&cfg, x) * real.chirp(x);
                acc += periodic(t - x) * lp * w;
            }
            real.chirp(t).conj() * acc * step / c(0.0, 2.0 * PI * real.b).sqrt()
        };
        let step = 0.004;
        let mut last = f64::INFINITY;
        for half in [8.0, 32.0, 128.0] {
            let err = (0..cfg.n_samples())
                .map(|n| (sample_at(n, half, step) - rec.samples()[n]).norm())
                .fold(0.0, f64::max);
            assert!(err < last, "window {half}: {err:e} !< {last:e}");
            last = err;
        }
        assert!(last < 2e-2, "{last:e}");
        // Cross-check that the synthesized series is the same signal.
        let grid = [0.1, 0.45];
        let synth = synthesize_on_grid(&y_hat, &cfg.series(), &grid);
        for (&t, v) in grid.iter().zip(synth) {
            assert!((v - real.chirp(t).conj() * periodic(t)).norm() < 1e-12);
        }
    }

    #[test]
    fn convolution_multiplication_duality_converges() {
        let omegas = [-3.0, -1.0, 0.0, 0.5, 2.0, 4.0];
        for p in [generic(), LctParams::fourier(), LctParams::fresnel(1.5)] {
            let errs: Vec<f64> = [(0.1, 20.0), (0.05, 40.0), (0.025, 80.0)]
                .iter()
                .map(|&(h, w)| convolution_duality_error(&p, h, w, &omegas).unwrap())
                .collect();
            assert!(errs[1] < errs[0] && errs[2] < errs[1], "{errs:?}");
            assert!(errs[2] < 1e-3);
        }
    }

    #[test]
    fn lowpass_kernel_is_band_limited() {
        let p = generic();
        let cfg = AcquisitionConfig::new(p, 1.0, 3.0, 10).unwrap();
        let in_band = 0.5 * 2.0 * PI * cfg.bandwidth();
        let expected = (2.0 * PI * 0.9f64).sqrt().recip();
        let mut last_out = f64::INFINITY;
        for half in [40.0, 80.0, 160.0] {
            let step = 0.01;
            let count = (half / step) as i64;
            let grid: Vec<f64> = (-count..=count).map(|i| i as f64 * step).collect();
            let vals: Vec<Complex64> = grid.iter().map(|&t| lowpass_kernel(&cfg, t)).collect();
            let inside = lct_trapezoid(&p, &grid, &vals, 0.3 * in_band).unwrap();
            assert!((inside.norm() - expected).abs() < 0.05 * expected);
            let outside = lct_trapezoid(&p, &grid, &vals, 1.7 * in_band).unwrap().norm();
            assert!(outside < last_out);
            last_out = outside;
        }
    }
}
