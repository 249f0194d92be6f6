//! Matrix-pencil recovery of a known number of exponentials from consecutive
//! Fourier coefficients. Used to cross-check the SDP pipeline and as the
//! fallback path of impulsive-noise removal.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lct::{Spike, SpikeTrain};
use crate::linalg::{eigenvalues, svd, CMatrix};
use crate::series::{FourierCoeffVector, SeriesConfig};
use crate::solver::{demodulate_weights, fit_amplitudes_on};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PencilConfig {
    /// Pencil parameter; `None` picks the balanced choice (`fc` for a full
    /// coefficient vector).
    pub l: Option<usize>,
    /// Singular values below `rank_tol · σ_max` count as zero.
    pub rank_tol: f64,
}

impl Default for PencilConfig {
    fn default() -> Self {
        Self {
            l: None,
            rank_tol: 1e-10,
        }
    }
}

/// Locations and weights `ρ_k` of the model `ŷ[m] = Σ_k ρ_k e^{-j m ω0 t_k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PencilRecovery {
    pub locations: Vec<f64>,
    pub weights: Vec<Complex64>,
    pub singular_values: Vec<f64>,
    pub residual: f64,
}

impl PencilRecovery {
    /// Removes the chirp from the weights, `c_k = ρ_k e^{-j a t_k²/2b}`.
    pub fn to_spike_train(&self, series: &SeriesConfig) -> Result<SpikeTrain> {
        let amps = demodulate_weights(&self.weights, &self.locations, series.real());
        SpikeTrain::from_unsorted(
            series.tau(),
            self.locations
                .iter()
                .zip(amps)
                .map(|(&t, c)| Spike::new(t, c))
                .collect(),
        )
    }
}

/// Recovers `k` spikes from a full coefficient vector.
pub fn pencil_recover(
    y_hat: &FourierCoeffVector,
    k: usize,
    omega0: f64,
    cfg: &PencilConfig,
) -> Result<PencilRecovery> {
    let fc = y_hat.fc();
    if k == 0 {
        return Ok(PencilRecovery {
            locations: Vec::new(),
            weights: Vec::new(),
            singular_values: Vec::new(),
            residual: y_hat.norm(),
        });
    }
    if fc < k {
        return Err(Error::PencilRank {
            needed: k,
            available: fc,
        });
    }
    let l = cfg.l.unwrap_or(fc);
    recover_on_run(y_hat, -(fc as i64), 2 * fc + 1, k, l, omega0, cfg.rank_tol, |_| true)
}

/// Recovers `k` spikes from the run of `len` consecutive coefficients
/// starting at index `start`, then fits the weights on every row `m` with
/// `use_row(m)`.
#[allow(clippy::too_many_arguments)]
pub fn pencil_recover_on(
    y_hat: &FourierCoeffVector,
    start: i64,
    len: usize,
    k: usize,
    omega0: f64,
    cfg: &PencilConfig,
    use_row: impl Fn(i64) -> bool,
) -> Result<PencilRecovery> {
    if len < 2 * k + 1 {
        return Err(Error::PencilRank {
            needed: k,
            available: len.saturating_sub(1) / 2,
        });
    }
    let l = cfg.l.unwrap_or(len / 2);
    recover_on_run(y_hat, start, len, k, l, omega0, cfg.rank_tol, use_row)
}

#[allow(clippy::too_many_arguments)]
fn recover_on_run(
    y_hat: &FourierCoeffVector,
    start: i64,
    len: usize,
    k: usize,
    l: usize,
    omega0: f64,
    rank_tol: f64,
    use_row: impl Fn(i64) -> bool,
) -> Result<PencilRecovery> {
    if l < k || l + k > len {
        return Err(Error::InvalidConfig(format!(
            "pencil parameter L = {l} outside [{k}, {}]",
            len.saturating_sub(k)
        )));
    }
    let x: Vec<Complex64> = (0..len as i64)
        .map(|i| {
            y_hat.get(start + i).ok_or_else(|| {
                Error::InvalidConfig(format!("coefficient index {} out of range", start + i))
            })
        })
        .collect::<Result<_>>()?;
    let (z, singular_values) = pencil_eigenvalues(&x, k, l, rank_tol)?;
    let mut locations: Vec<f64> = z
        .iter()
        .map(|zk| {
            let t = (-zk.arg()).rem_euclid(TAU) / omega0;
            if t >= TAU / omega0 {
                0.0
            } else {
                t
            }
        })
        .collect();
    locations.sort_by(f64::total_cmp);
    let fit = fit_amplitudes_on(y_hat, &locations, omega0, use_row)?;
    Ok(PencilRecovery {
        locations,
        weights: fit.weights,
        singular_values,
        residual: fit.residual,
    })
}

/// The `k` signal poles `z` of `x_i = Σ_k a_k z_k^i`, from the right singular
/// subspace of the `(len - L) × (L + 1)` Hankel matrix `Y[i, l] = x_{i+l}`.
fn pencil_eigenvalues(
    x: &[Complex64],
    k: usize,
    l: usize,
    rank_tol: f64,
) -> Result<(Vec<Complex64>, Vec<f64>)> {
    let rows = x.len() - l;
    let hankel = CMatrix::from_fn(rows, l + 1, |i, j| x[i + j]);
    let svd = svd(&hankel);
    let singular_values = svd.s;
    let top = singular_values.first().copied().unwrap_or(0.0);
    let rank = singular_values
        .iter()
        .filter(|&&s| top > 0.0 && s > rank_tol * top)
        .count();
    if rank < k {
        return Err(Error::PencilRank {
            needed: k,
            available: rank,
        });
    }
    // Columns spanning the rows of Y, i.e. the vectors [1, z_k, …, z_k^L].
    let w = CMatrix::from_fn(l + 1, k, |r, c| svd.v[(r, c)].conj());
    let w0 = w.rows(0, l).into_owned();
    let w1 = w.rows(1, l).into_owned();
    // Least-squares solve of W0 X = W1 through a thin QR factorization.
    let qr = w0.qr();
    let rhs = qr.q().adjoint() * w1;
    let shift = qr
        .r()
        .solve_upper_triangular(&rhs)
        .ok_or(Error::PencilRank { needed: k, available: rank })?;
    let z = eigenvalues(shift)?;
    Ok((z, singular_values))
}
