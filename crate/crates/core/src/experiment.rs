//! Seeded random instances and the separation phase-transition sweep.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::denoise::{denoise_ain, simulate_corrupted_samples, DenoiseOptions, DenoiseResult, LfmSignalSpec};
use crate::error::{Error, Result};
use crate::lct::{fourier_factorization, iwasawa_factorization, matmul, Iwasawa, LctParams, Spike, SpikeTrain};
use crate::measurement::{simulate_samples, AcquisitionConfig};
use crate::solver::{circular_distance, minimum_separation, super_resolve, RecoveryResult, SolverOptions};

/// Accepted separations lie in `[Δ, SEPARATION_SLACK · Δ]`.
pub const SEPARATION_SLACK: f64 = 1.05;

const MAX_DRAWS: usize = 10_000_000;

/// The generator for one trial: stream `trial` of the ChaCha8 family keyed by
/// `seed`, so trials are reproducible independently of scheduling.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Amplitude with `|c| ∈ [0.5, 1.5]` and uniform phase.
pub fn random_amplitude<R: Rng>(rng: &mut R) -> Complex64 {
    let r = rng.gen_range(0.5..=1.5);
    Complex64::from_polar(r, rng.gen_range(-PI..PI))
}

/// `k` spikes on `[0, τ)` whose circular minimum separation lies in
/// `[Δ, 1.05 Δ]`. Locations are drawn uniformly and the whole set is redrawn
/// until it lands in the window.
pub fn random_instance<R: Rng>(rng: &mut R, k: usize, tau: f64, delta: f64) -> Result<SpikeTrain> {
    if k >= 2 && k as f64 * delta > tau {
        return Err(Error::InvalidParameter(format!(
            "{k} spikes cannot be {delta} apart on a period of {tau}"
        )));
    }
    let mut locations = vec![0.0; k];
    let mut accepted = k < 2;
    for _ in 0..MAX_DRAWS {
        for t in locations.iter_mut() {
            *t = rng.gen_range(0.0..tau);
        }
        if k < 2 {
            break;
        }
        locations.sort_by(f64::total_cmp);
        let gap = crate::solver::circular_min_gap(&locations, tau);
        if gap >= delta && gap <= SEPARATION_SLACK * delta {
            accepted = true;
            break;
        }
    }
    if !accepted {
        return Err(Error::InvalidParameter(format!(
            "no instance with separation in [{delta}, {}] after {MAX_DRAWS} draws",
            SEPARATION_SLACK * delta
        )));
    }
    let spikes = locations
        .into_iter()
        .map(|t| Spike::new(t, random_amplitude(rng)))
        .collect();
    SpikeTrain::from_unsorted(tau, spikes)
}

/// Real unimodular matrix `Λ_θ · diag(Γ, 1/Γ) · [1 u; 0 1]` with
/// `θ ∈ [-π, π)`, `Γ ∈ [0.25, 4]` log-uniform, `u ∈ [-2, 2]`, redrawn until
/// `|b| ≥ 0.05`.
pub fn random_real_unimodular<R: Rng>(rng: &mut R) -> LctParams {
    loop {
        let m = Iwasawa {
            theta: rng.gen_range(-PI..PI),
            gamma: 4f64.powf(rng.gen_range(-1.0..=1.0)),
            shear: rng.gen_range(-2.0..=2.0),
        }
        .reassemble();
        if m[0][1].abs() < 0.05 {
            continue;
        }
        if let Ok(p) = LctParams::real(m[0][0], m[0][1], m[1][0], m[1][1]) {
            return p;
        }
    }
}

/// As [`random_real_unimodular`] but with `b > 0`, as the pipeline requires.
pub fn random_pipeline_params<R: Rng>(rng: &mut R) -> LctParams {
    loop {
        let p = random_real_unimodular(rng);
        if p.b().re > 0.0 {
            return p;
        }
    }
}

/// Largest entrywise reassembly errors of the Fourier and Iwasawa
/// factorizations.
pub fn factorization_residuals(params: &LctParams) -> Result<(f64, f64)> {
    let (m1, m2) = fourier_factorization(params)?;
    let fourier = matmul(&m1, &matmul(&LctParams::fourier(), &m2)?)?.max_abs_diff(params);
    let back = iwasawa_factorization(params)?.reassemble();
    let m = params.matrix();
    let mut iwasawa: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            iwasawa = iwasawa.max((m[i][j] - Complex64::new(back[i][j], 0.0)).norm());
        }
    }
    Ok((fourier, iwasawa))
}

/// Pass thresholds for one recovery.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessCriteria {
    /// Location tolerance as a fraction of `τ`.
    pub location_tol: f64,
    /// Relative amplitude tolerance `|c̃ - c| / |c|`.
    pub amplitude_tol: f64,
}

impl Default for SuccessCriteria {
    fn default() -> Self {
        Self {
            location_tol: 1e-4,
            amplitude_tol: 1e-3,
        }
    }
}

/// Worst-case errors after matching each true spike to its nearest estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub same_count: bool,
    /// Largest circular location error, in units of `τ`.
    pub location_error: f64,
    pub amplitude_error: f64,
}

impl Comparison {
    pub fn passes(&self, crit: &SuccessCriteria) -> bool {
        self.same_count
            && self.location_error <= crit.location_tol
            && self.amplitude_error <= crit.amplitude_tol
    }
}

/// Compares an estimate to the truth. Errors are infinite when the counts
/// differ or two true spikes claim the same estimate.
pub fn compare(truth: &SpikeTrain, estimate: &SpikeTrain) -> Comparison {
    let tau = truth.tau();
    let mut cmp = Comparison {
        same_count: truth.len() == estimate.len(),
        location_error: 0.0,
        amplitude_error: 0.0,
    };
    if !cmp.same_count {
        cmp.location_error = f64::INFINITY;
        cmp.amplitude_error = f64::INFINITY;
        return cmp;
    }
    let mut used = vec![false; estimate.len()];
    for s in truth.iter() {
        let (j, d) = estimate
            .iter()
            .enumerate()
            .map(|(j, e)| (j, circular_distance(s.t, e.t, tau)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("counts are equal and nonzero here");
        if used[j] {
            cmp.location_error = f64::INFINITY;
            cmp.amplitude_error = f64::INFINITY;
            return cmp;
        }
        used[j] = true;
        let e = estimate.spikes()[j];
        cmp.location_error = cmp.location_error.max(d / tau);
        cmp.amplitude_error = cmp.amplitude_error.max((e.c - s.c).norm() / s.c.norm());
    }
    cmp
}

/// Fixed part of every trial in a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialSetup {
    pub params: LctParams,
    pub tau: f64,
    pub fc: usize,
    pub k: usize,
    pub n_samples: usize,
}

impl Default for TrialSetup {
    fn default() -> Self {
        Self {
            params: LctParams::rotation(PI / 3.0),
            tau: 1.0,
            fc: 16,
            k: 4,
            n_samples: 33,
        }
    }
}

impl TrialSetup {
    pub fn acquisition(&self) -> Result<AcquisitionConfig> {
        AcquisitionConfig::with_cutoff(self.params, self.tau, self.fc, self.n_samples)
    }
}

/// Result of one randomized recovery.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub truth: SpikeTrain,
    pub separation: f64,
    pub recovery: std::result::Result<RecoveryResult, String>,
    pub comparison: Option<Comparison>,
    pub success: bool,
}

/// Draws an instance at separation `Δ = delta_fc / fc · τ`, measures and
/// recovers it.
pub fn run_trial(
    setup: &TrialSetup,
    delta_fc: f64,
    rng: &mut ChaCha8Rng,
    opts: &SolverOptions,
    crit: &SuccessCriteria,
) -> Result<TrialOutcome> {
    let cfg = setup.acquisition()?;
    let delta = delta_fc / setup.fc as f64 * setup.tau;
    let truth = random_instance(rng, setup.k, setup.tau, delta)?;
    let rec = simulate_samples(&truth, &cfg)?;
    let recovery = super_resolve(&rec, opts).map_err(|e| e.to_string());
    let comparison = recovery.as_ref().ok().map(|r| compare(&truth, &r.spikes));
    let success = comparison.is_some_and(|c| c.passes(crit));
    Ok(TrialOutcome {
        separation: minimum_separation(&truth),
        truth,
        recovery,
        comparison,
        success,
    })
}

/// One row of the phase-transition table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub delta_fc: f64,
    pub fc: usize,
    pub k: usize,
    pub trials: usize,
    pub successes: usize,
    pub solver_failures: usize,
    pub success_rate: f64,
    pub max_location_error: f64,
    pub max_amplitude_error: f64,
}

/// Grid for [`phase_transition`].
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub setup: TrialSetup,
    pub delta_fc: Vec<f64>,
    pub fc: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
}

/// Success rate over `trials` instances for every `(fc, Δ·fc)` grid point.
///
/// Trial `i` of grid point `g` uses stream `g · 2³² + i`, so the table is
/// identical for any thread count. Rows are ordered by `fc`, then `Δ·fc`.
pub fn phase_transition(
    spec: &SweepSpec,
    opts: &SolverOptions,
    crit: &SuccessCriteria,
) -> Result<Vec<SweepPoint>> {
    let mut grid: Vec<(usize, f64)> = spec
        .fc
        .iter()
        .flat_map(|&fc| spec.delta_fc.iter().map(move |&d| (fc, d)))
        .collect();
    grid.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let jobs: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|g| (0..spec.trials).map(move |i| (g, i)))
        .collect();
    let outcomes: Vec<Result<(usize, bool, bool, Option<Comparison>)>> = jobs
        .par_iter()
        .map(|&(g, i)| {
            let (fc, delta_fc) = grid[g];
            let setup = TrialSetup {
                fc,
                n_samples: spec.setup.n_samples.max(2 * fc + 1),
                ..spec.setup
            };
            let mut rng = trial_rng(spec.seed, ((g as u64) << 32) | i as u64);
            let out = run_trial(&setup, delta_fc, &mut rng, opts, crit)?;
            Ok((g, out.success, out.recovery.is_err(), out.comparison))
        })
        .collect();
    let mut rows: Vec<SweepPoint> = grid
        .iter()
        .map(|&(fc, delta_fc)| SweepPoint {
            delta_fc,
            fc,
            k: spec.setup.k,
            trials: 0,
            successes: 0,
            solver_failures: 0,
            success_rate: 0.0,
            max_location_error: 0.0,
            max_amplitude_error: 0.0,
        })
        .collect();
    for outcome in outcomes {
        let (g, success, failed, cmp) = outcome?;
        let row = &mut rows[g];
        row.trials += 1;
        row.successes += success as usize;
        row.solver_failures += failed as usize;
        let (loc, amp) = cmp.map_or((f64::INFINITY, f64::INFINITY), |c| {
            (c.location_error, c.amplitude_error)
        });
        row.max_location_error = row.max_location_error.max(loc);
        row.max_amplitude_error = row.max_amplitude_error.max(amp);
    }
    for row in &mut rows {
        if row.trials > 0 {
            row.success_rate = row.successes as f64 / row.trials as f64;
        }
    }
    Ok(rows)
}

/// Fixed part of a randomized impulsive-noise removal trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenoiseSetup {
    pub params: LctParams,
    pub tau: f64,
    /// Signal band `M`.
    pub band: usize,
    pub k: usize,
    pub fc: usize,
    pub n_samples: usize,
}

impl Default for DenoiseSetup {
    fn default() -> Self {
        Self {
            params: LctParams::rotation(PI / 3.0),
            tau: 1.0,
            band: 4,
            k: 2,
            fc: 10,
            n_samples: 21,
        }
    }
}

/// Random band-`M` signal with coefficients and mixing constants drawn like
/// spike amplitudes.
pub fn random_lfm_spec<R: Rng>(rng: &mut R, band: usize, params: LctParams, tau: f64) -> Result<LfmSignalSpec> {
    let coefficients = (0..2 * band + 1).map(|_| random_amplitude(rng)).collect();
    let c1 = random_amplitude(rng);
    let c2 = random_amplitude(rng);
    LfmSignalSpec::new(band, coefficients, params, tau, c1, c2)
}

#[derive(Debug, Clone)]
pub struct DenoiseOutcome {
    pub signal: LfmSignalSpec,
    pub truth: SpikeTrain,
    pub result: std::result::Result<DenoiseResult, String>,
    /// `max |r̂ - r| / max |r|` over the band.
    pub signal_error: f64,
    pub comparison: Option<Comparison>,
}

impl DenoiseOutcome {
    /// Both estimates within `tol` (relative, and in units of `τ` for locations).
    pub fn passes(&self, tol: f64) -> bool {
        self.signal_error <= tol
            && self.comparison.is_some_and(|c| {
                c.passes(&SuccessCriteria {
                    location_tol: tol,
                    amplitude_tol: tol,
                })
            })
    }
}

/// Draws a signal and a spike train at separation `delta_fc / fc · τ`,
/// simulates the corrupted record and separates it.
pub fn run_denoise_trial(
    setup: &DenoiseSetup,
    delta_fc: f64,
    rng: &mut ChaCha8Rng,
    opts: &DenoiseOptions,
) -> Result<DenoiseOutcome> {
    let cfg = AcquisitionConfig::with_cutoff(setup.params, setup.tau, setup.fc, setup.n_samples)?;
    let signal = random_lfm_spec(rng, setup.band, setup.params, setup.tau)?;
    let truth = random_instance(rng, setup.k, setup.tau, delta_fc / setup.fc as f64 * setup.tau)?;
    let rec = simulate_corrupted_samples(&signal, &truth, &cfg)?;
    let result = denoise_ain(&rec, setup.band, setup.k, signal.c1, signal.c2, opts).map_err(|e| e.to_string());
    let (signal_error, comparison) = match &result {
        Ok(r) => {
            let scale = signal.coefficients.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let err = r
                .signal
                .iter()
                .zip(&signal.coefficients)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            (err / scale, Some(compare(&truth, &r.spikes)))
        }
        Err(_) => (f64::INFINITY, None),
    };
    Ok(DenoiseOutcome {
        signal,
        truth,
        result,
        signal_error,
        comparison,
    })
}
