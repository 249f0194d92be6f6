//! Linear canonical series of spike trains and the chirp-modulated Fourier
//! coefficients every later stage works with.

use std::f64::consts::PI;
use std::ops::RangeInclusive;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lct::{kernel, LctParams, RealParams, SpikeTrain};

/// Transform parameters plus the period of the spike train.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesConfig {
    params: LctParams,
    real: RealParams,
    tau: f64,
}

impl SeriesConfig {
    pub fn new(params: LctParams, tau: f64) -> Result<Self> {
        let real = params.require_pipeline()?;
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "period must be positive, got {tau}"
            )));
        }
        Ok(Self { params, real, tau })
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

    /// Fundamental frequency `2π/τ`.
    pub fn omega0(&self) -> f64 {
        2.0 * PI / self.tau
    }

    /// Series normalization `√(2πb/τ)`.
    pub fn kappa(&self) -> f64 {
        (2.0 * PI * self.real.b / self.tau).sqrt()
    }

    fn check_support(&self, s: &SpikeTrain) -> Result<()> {
        if s.iter().any(|sp| sp.t >= self.tau) {
            return Err(Error::InvalidSpikeTrain(format!(
                "spike train is not supported in [0, {})",
                self.tau
            )));
        }
        Ok(())
    }
}

/// Coefficients `ŷ[m]` for `m = -fc..=fc`, stored in ascending `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCoeffVector {
    fc: usize,
    values: Vec<Complex64>,
}

impl FourierCoeffVector {
    pub fn new(fc: usize, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != 2 * fc + 1 {
            return Err(Error::LengthMismatch {
                expected: 2 * fc + 1,
                found: values.len(),
            });
        }
        Ok(Self { fc, values })
    }

    pub fn zeros(fc: usize) -> Self {
        Self {
            fc,
            values: vec![Complex64::new(0.0, 0.0); 2 * fc + 1],
        }
    }

    pub fn fc(&self) -> usize {
        self.fc
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn indices(&self) -> RangeInclusive<i64> {
        -(self.fc as i64)..=self.fc as i64
    }

    /// Coefficient at frequency index `m`, if `|m| <= fc`.
    pub fn get(&self, m: i64) -> Option<Complex64> {
        let i = m + self.fc as i64;
        (i >= 0).then(|| self.values.get(i as usize).copied()).flatten()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest `|self[m] - other[m]|`; both vectors must share `fc`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.fc, other.fc, "cutoff mismatch");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }
}

/// Series coefficients `ŝ[n] = κ Σ_k c_k conj(k_Λ(t_k, n ω0 b))`.
pub fn lcs_coefficients(
    s: &SpikeTrain,
    cfg: &SeriesConfig,
    n_range: impl IntoIterator<Item = i64>,
) -> Result<Vec<Complex64>> {
    cfg.check_support(s)?;
    let step = cfg.omega0() * cfg.real.b;
    let kappa = cfg.kappa();
    n_range
        .into_iter()
        .map(|n| {
            let omega = n as f64 * step;
            let mut acc = Complex64::new(0.0, 0.0);
            for sp in s.iter() {
                acc += sp.c * kernel(&cfg.params, sp.t, omega)?.conj();
            }
            Ok(acc * kappa)
        })
        .collect()
}

/// `ŷ[m] = Σ_k c_k e^{+j a t_k²/2b} e^{-j m ω0 t_k}` for `|m| <= fc`.
pub fn chirp_fourier_coefficients(
    s: &SpikeTrain,
    cfg: &SeriesConfig,
    fc: usize,
) -> Result<FourierCoeffVector> {
    cfg.check_support(s)?;
    let weights: Vec<(f64, Complex64)> = s
        .iter()
        .map(|sp| (sp.t, sp.c * cfg.real.chirp(sp.t)))
        .collect();
    Ok(exponential_sums(&weights, cfg.omega0(), fc))
}

/// `Σ_k ρ_k e^{-j m ω0 t_k}` for `|m| <= fc`.
pub fn exponential_sums(
    weights: &[(f64, Complex64)],
    omega0: f64,
    fc: usize,
) -> FourierCoeffVector {
    let fc_i = fc as i64;
    let values = (-fc_i..=fc_i)
        .map(|m| {
            weights
                .iter()
                .map(|&(t, rho)| rho * Complex64::from_polar(1.0, -(m as f64) * omega0 * t))
                .sum()
        })
        .collect();
    FourierCoeffVector { fc, values }
}

/// Truncated series `(e^{-j a t²/2b}/τ) Σ_m ŷ[m] e^{j m ω0 t}` on `grid`.
pub fn synthesize_on_grid(
    coeffs: &FourierCoeffVector,
    cfg: &SeriesConfig,
    grid: &[f64],
) -> Vec<Complex64> {
    let w0 = cfg.omega0();
    grid.iter()
        .map(|&t| {
            let sum: Complex64 = coeffs
                .indices()
                .zip(&coeffs.values)
                .map(|(m, &y)| y * Complex64::from_polar(1.0, m as f64 * w0 * t))
                .sum();
            cfg.real.chirp(t).conj() * sum / cfg.tau
        })
        .collect()
}
