//! Quick invariant checks, one report line per module.

use std::path::Path;

use lctsr::denoise::DenoiseOptions;
use lctsr::experiment::{
    compare, factorization_residuals, random_amplitude, random_instance, random_pipeline_params, run_denoise_trial,
    trial_rng, DenoiseSetup,
};
use lctsr::lct::{compose, invert, LctParams};
use lctsr::measurement::{convolution_duality_error, demodulate, recover_fourier_coeffs, simulate_samples, AcquisitionConfig};
use lctsr::pencil::pencil_recover;
use lctsr::series::{chirp_fourier_coefficients, exponential_sums, SeriesConfig};
use lctsr::solver::{circular_distance, super_resolve};
use lctsr::{Error, Spike, SpikeTrain};
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::failure::{Failure, Kind};
use crate::spec::Tolerances;

#[derive(Debug, Clone, Serialize)]
pub struct ModuleReport {
    pub module: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
struct Report {
    seed: u64,
    passed: bool,
    modules: Vec<ModuleReport>,
}

type Check = std::result::Result<String, String>;

fn lct_core(seed: u64) -> Check {
    let mut rng = trial_rng(seed, 1);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let p = random_pipeline_params(&mut rng);
        let (f, i) = factorization_residuals(&p).map_err(|e| e.to_string())?;
        let id = compose(&invert(&p), &p).map_err(|e| e.to_string())?.max_abs_diff(&LctParams::identity());
        worst = worst.max(f).max(i).max(id);
    }
    if worst <= 1e-12 {
        Ok(format!("factorizations and inverses exact to {worst:.1e} on 200 matrices"))
    } else {
        Err(format!("reassembly error {worst:.1e} > 1e-12"))
    }
}

fn series_and_measurement(seed: u64) -> Check {
    let mut rng = trial_rng(seed, 2);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let params = random_pipeline_params(&mut rng);
        let tau = rng.gen_range(0.5..2.0);
        let fc = rng.gen_range(2..12);
        let cfg = AcquisitionConfig::with_cutoff(params, tau, fc, 2 * fc + 1 + rng.gen_range(0..5))
            .map_err(|e| e.to_string())?;
        let spikes = (0..rng.gen_range(1..=fc))
            .map(|_| Spike::new(rng.gen_range(0.0..tau), random_amplitude(&mut rng)))
            .collect();
        let s = SpikeTrain::from_unsorted(tau, spikes).map_err(|e| e.to_string())?;
        let truth = chirp_fourier_coefficients(&s, &cfg.series(), fc).map_err(|e| e.to_string())?;
        let rec = simulate_samples(&s, &cfg).map_err(|e| e.to_string())?;
        let fit = recover_fourier_coeffs(&demodulate(&rec), &cfg).map_err(|e| e.to_string())?;
        worst = worst.max(fit.coeffs.max_abs_diff(&truth) / truth.values().iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    let unit = SpikeTrain::new(1.0, vec![Spike::new(0.0, Complex64::new(1.0, 0.0))]).map_err(|e| e.to_string())?;
    let series = SeriesConfig::new(LctParams::rotation(0.7), 1.0).map_err(|e| e.to_string())?;
    let ones = chirp_fourier_coefficients(&unit, &series, 5).map_err(|e| e.to_string())?;
    if ones.values().iter().any(|z| (z - 1.0).norm() > 1e-15) {
        return Err("a unit spike at t = 0 should give all-ones coefficients".into());
    }
    if worst > 1e-9 {
        return Err(format!("end-to-end coefficient error {worst:.1e} > 1e-9"));
    }
    let params = LctParams::real(0.6, 0.9, (0.6 * 1.2 - 1.0) / 0.9, 1.2).map_err(|e| e.to_string())?;
    let omegas = [-3.0, -1.0, 0.0, 0.5, 2.0, 4.0];
    let errs = [(0.1, 20.0), (0.05, 40.0), (0.025, 80.0)]
        .iter()
        .map(|&(h, w)| convolution_duality_error(&params, h, w, &omegas))
        .collect::<lctsr::Result<Vec<f64>>>()
        .map_err(|e| e.to_string())?;
    if !(errs[1] < errs[0] && errs[2] < errs[1] && errs[2] < 1e-3) {
        return Err(format!("convolution duality errors {errs:?} not decreasing below 1e-3"));
    }
    Ok(format!(
        "coefficients recovered to {worst:.1e} on 20 configs; duality error {:.1e}",
        errs[2]
    ))
}

fn solver_and_oracle(seed: u64, tol: &Tolerances) -> (Check, Check) {
    let run = || -> std::result::Result<(String, String), String> {
        let fc = 16;
        let cfg = AcquisitionConfig::with_cutoff(LctParams::fresnel(1.0), 1.0, fc, 2 * fc + 1).map_err(|e| e.to_string())?;
        let s = random_instance(&mut trial_rng(seed, 3), 3, 1.0, 2.5 / fc as f64).map_err(|e| e.to_string())?;
        let rec = simulate_samples(&s, &cfg).map_err(|e| e.to_string())?;
        let r = super_resolve(&rec, &tol.solver()).map_err(|e| format!("solver: {e}"))?;
        let sdp = &r.sdp;
        if !sdp.converged {
            return Err(format!("solver: SDP did not converge in {} iterations", sdp.iterations));
        }
        let (herm, psd, diag) = (sdp.hermitian_residual(), sdp.min_block_eigenvalue(), sdp.diagonal_sum_residual());
        if herm > 1e-10 || psd < -1e-8 || diag > 1e-8 {
            return Err(format!("solver: SDP invariants violated ({herm:.1e}, {psd:.1e}, {diag:.1e})"));
        }
        let cmp = compare(&s, &r.spikes);
        if !cmp.passes(&tol.success()) {
            return Err(format!("solver: recovery errors {:.1e} / {:.1e}", cmp.location_error, cmp.amplitude_error));
        }
        let solver_msg = format!(
            "K = 3, fc = 16 recovered to {:.1e} (location) and {:.1e} (amplitude)",
            cmp.location_error, cmp.amplitude_error
        );
        let fit = recover_fourier_coeffs(&demodulate(&rec), &cfg).map_err(|e| e.to_string())?;
        let w0 = cfg.omega0();
        let p = pencil_recover(&fit.coeffs, 3, w0, &tol.pencil()).map_err(|e| format!("oracle: {e}"))?;
        let mut located = p.locations.clone();
        located.sort_by(f64::total_cmp);
        let gap = located
            .iter()
            .zip(r.spikes.iter())
            .map(|(a, b)| circular_distance(*a, b.t, 1.0))
            .fold(0.0, f64::max);
        if gap > 1e-6 {
            return Err(format!("oracle: pencil and SDP supports differ by {gap:.1e}"));
        }
        let small = exponential_sums(&[(0.1, 1.0.into()), (0.4, 1.0.into()), (0.8, 1.0.into())], w0, 2);
        match pencil_recover(&small, 3, w0, &tol.pencil()) {
            Err(Error::PencilRank { .. }) => {}
            other => return Err(format!("oracle: fc = K - 1 should be rank deficient, got {other:?}")),
        }
        Ok((solver_msg, format!("pencil agrees with SDP to {gap:.1e}; fc = K - 1 rejected")))
    };
    match run() {
        Ok((a, b)) => (Ok(a), Ok(b)),
        Err(e) if e.starts_with("oracle") => (Ok("recovered".into()), Err(e)),
        Err(e) => (Err(e.clone()), Err("not reached".into())),
    }
}

fn denoise(seed: u64, tol: &Tolerances) -> Check {
    let opts = DenoiseOptions {
        solver: tol.solver(),
        pencil: tol.pencil(),
        pencil_only: false,
    };
    let out = run_denoise_trial(&DenoiseSetup::default(), 4.0, &mut trial_rng(seed, 4), &opts).map_err(|e| e.to_string())?;
    if out.passes(1e-6) {
        Ok(format!("signal recovered to {:.1e}", out.signal_error))
    } else {
        Err(format!(
            "separation failed: signal error {:.1e}, spikes {:?}, result {:?}",
            out.signal_error,
            out.comparison,
            out.result.as_ref().err()
        ))
    }
}

pub fn run(seed: u64, tol: &Tolerances, report_path: &Path) -> Result<(), Failure> {
    let (solver, oracle) = solver_and_oracle(seed, tol);
    let checks: Vec<(&'static str, Check)> = vec![
        ("lct_core", lct_core(seed)),
        ("series+measurement", series_and_measurement(seed)),
        ("solver", solver),
        ("baseline_oracle", oracle),
        ("denoise", denoise(seed, tol)),
    ];
    let modules: Vec<ModuleReport> = checks
        .into_iter()
        .map(|(module, c)| {
            let (passed, detail) = match c {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            println!("{module:20} {}  {detail}", if passed { "PASS" } else { "FAIL" });
            ModuleReport { module, passed, detail }
        })
        .collect();
    let passed = modules.iter().all(|m| m.passed);
    lctsr::io::write_json(report_path, &Report { seed, passed, modules })?;
    if passed {
        Ok(())
    } else {
        Err(Failure::new(Kind::Acceptance, "selftest failed; see the per-module report"))
    }
}
