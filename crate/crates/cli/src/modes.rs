//! One function per mode. Each writes its artifacts into the output directory.

use std::path::{Path, PathBuf};

use lctsr::denoise::{denoise_ain, simulate_corrupted_samples, DenoiseOptions};
use lctsr::experiment::{phase_transition, random_instance, trial_rng, SweepSpec, TrialSetup};
use lctsr::io::{
    read_json, read_samples_csv, write_json, write_record, write_sweep_csv, AcquisitionJson, DenoiseJson,
    LfmSignalJson, RecoveryJson, SpikeTrainJson,
};
use lctsr::measurement::{simulate_samples, AcquisitionConfig, MeasurementRecord};
use lctsr::solver::super_resolve;
use lctsr::SpikeTrain;

use crate::failure::Failure;
use crate::selftest;
use crate::spec::{ExperimentSpec, Mode, Tolerances};

/// Separation used by `synth` when the spec gives none.
const DEFAULT_SYNTH_DELTA_FC: f64 = 2.5;

pub struct Run<'a> {
    pub spec: &'a ExperimentSpec,
    pub out: &'a Path,
    pub seed: Option<u64>,
    pub tolerances: Tolerances,
}

impl Run<'_> {
    fn artifact(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn require_seed(&self) -> Result<u64, Failure> {
        self.seed
            .ok_or_else(|| Failure::spec("this mode is randomized and needs a seed (spec `seed` or --seed)"))
    }

    fn read_spikes(&self) -> Result<(SpikeTrain, Option<u64>), Failure> {
        let path = self.spec.input("spikes", &self.spec.inputs.spikes)?;
        let file: SpikeTrainJson = read_json(&path)?;
        Ok((file.to_spike_train()?, file.seed))
    }

    /// Sample table plus sidecar, and the seed recorded in the sidecar.
    fn load_record(&self) -> Result<(MeasurementRecord, Option<u64>), Failure> {
        let sidecar: AcquisitionJson = read_json(&self.spec.input("sidecar", &self.spec.inputs.sidecar)?)?;
        let samples = read_samples_csv(&self.spec.input("samples", &self.spec.inputs.samples)?)?;
        Ok((MeasurementRecord::new(samples, sidecar.to_config()?)?, sidecar.seed))
    }

    pub fn execute(&self) -> Result<(), Failure> {
        if self.spec.mode.randomized() {
            self.require_seed()?;
        }
        std::fs::create_dir_all(self.out)
            .map_err(|e| Failure::spec(format!("cannot create {}: {e}", self.out.display())))?;
        match self.spec.mode {
            Mode::Synth => self.synth(),
            Mode::Measure => self.measure(),
            Mode::Solve => self.solve(),
            Mode::Denoise => self.denoise(),
            Mode::PhaseTransition => self.phase_transition(),
            Mode::Selftest => selftest::run(self.require_seed()?, &self.tolerances, &self.artifact("selftest.json")),
        }
    }

    fn synth(&self) -> Result<(), Failure> {
        let seed = self.require_seed()?;
        let k = self.spec.k.ok_or_else(|| Failure::spec("synth requires `k`"))?;
        let delta = if k >= 2 {
            let fc = self.spec.fc.ok_or_else(|| Failure::spec("synth requires `fc` to set the separation"))?;
            self.spec.delta_fc.unwrap_or(DEFAULT_SYNTH_DELTA_FC) / fc as f64 * self.spec.tau
        } else {
            0.0
        };
        let s = random_instance(&mut trial_rng(seed, 0), k, self.spec.tau, delta)?;
        let path = self.artifact("spikes.json");
        write_json(&path, &SpikeTrainJson::new(&s, Some(seed)))?;
        println!("synth: {k} spikes -> {}", path.display());
        Ok(())
    }

    fn measure(&self) -> Result<(), Failure> {
        let (s, file_seed) = self.read_spikes()?;
        let cfg = self.spec.acquisition()?;
        check_period(&s, &cfg)?;
        let rec = simulate_samples(&s, &cfg)?;
        let (csv, json) = (self.artifact("samples.csv"), self.artifact("samples.json"));
        write_record(&rec, &csv, &json, self.seed.or(file_seed))?;
        println!("measure: N = {}, fc = {} -> {}", cfg.n_samples(), cfg.fc(), csv.display());
        Ok(())
    }

    fn solve(&self) -> Result<(), Failure> {
        let (rec, side_seed) = self.load_record()?;
        let result = super_resolve(&rec, &self.tolerances.solver())?;
        let path = self.artifact("recovery.json");
        write_json(&path, &RecoveryJson::new(&result, self.seed.or(side_seed)))?;
        println!(
            "solve: {} spikes, objective {:.12}, {} iterations -> {}",
            result.spikes.len(),
            result.sdp.objective,
            result.sdp.iterations,
            path.display()
        );
        if !result.sdp.converged {
            return Err(Failure {
                stage: Some("sdp".into()),
                ..Failure::numerical(format!(
                    "SDP stopped at the iteration cap ({}) without converging",
                    result.sdp.iterations
                ))
            });
        }
        Ok(())
    }

    fn denoise(&self) -> Result<(), Failure> {
        let signal_file: LfmSignalJson = read_json(&self.spec.input("signal", &self.spec.inputs.signal)?)?;
        let signal = signal_file.to_spec()?;
        let opts = DenoiseOptions {
            solver: self.tolerances.solver(),
            pencil: self.tolerances.pencil(),
            pencil_only: self.spec.pencil_only,
        };
        let (rec, k, seed) = if self.spec.inputs.samples.is_some() {
            let (rec, side_seed) = self.load_record()?;
            let k = self.spec.k.ok_or_else(|| Failure::spec("denoise on recorded samples requires `k`"))?;
            (rec, k, self.seed.or(side_seed))
        } else {
            let (s, file_seed) = self.read_spikes()?;
            let fc = self.spec.fc.ok_or_else(|| Failure::spec("denoise simulation requires `fc`"))?;
            let params = self.spec.lct_params()?.unwrap_or(signal.params);
            let cfg = AcquisitionConfig::with_cutoff(params, signal.tau, fc, self.spec.n_samples.unwrap_or(2 * fc + 1))?;
            check_period(&s, &cfg)?;
            let rec = simulate_corrupted_samples(&signal, &s, &cfg)?;
            let seed = self.seed.or(file_seed);
            write_record(&rec, &self.artifact("corrupted.csv"), &self.artifact("corrupted.json"), seed)?;
            (rec, s.len(), seed)
        };
        let result = denoise_ain(&rec, signal.band, k, signal.c1, signal.c2, &opts)?;
        let path = self.artifact("denoise.json");
        write_json(&path, &DenoiseJson::new(&result, seed))?;
        println!("denoise: {:?} path, {} spikes -> {}", result.path, result.spikes.len(), path.display());
        Ok(())
    }

    fn phase_transition(&self) -> Result<(), Failure> {
        let seed = self.require_seed()?;
        let grid = self
            .spec
            .sweep
            .as_ref()
            .ok_or_else(|| Failure::spec("phase-transition requires a `sweep` block"))?;
        if grid.delta_fc.is_empty() || grid.fc.is_empty() || grid.trials == 0 {
            return Err(Failure::spec("sweep grid must be non-empty with trials > 0"));
        }
        let defaults = TrialSetup::default();
        let setup = TrialSetup {
            params: self.spec.lct_params()?.unwrap_or(defaults.params),
            tau: self.spec.tau,
            fc: grid.fc[0],
            k: grid.k,
            n_samples: grid.n_samples.unwrap_or(0),
        };
        let sweep = SweepSpec {
            setup,
            delta_fc: grid.delta_fc.clone(),
            fc: grid.fc.clone(),
            trials: grid.trials,
            seed,
        };
        let rows = phase_transition(&sweep, &self.tolerances.solver(), &self.tolerances.success())?;
        let path = self.artifact("sweep.csv");
        write_sweep_csv(&path, &rows, seed)?;
        for r in &rows {
            println!(
                "fc = {:3}  delta*fc = {:5.2}  success {:3}/{:3} ({:.2})",
                r.fc, r.delta_fc, r.successes, r.trials, r.success_rate
            );
        }
        println!("phase-transition -> {}", path.display());
        Ok(())
    }
}

fn check_period(s: &SpikeTrain, cfg: &AcquisitionConfig) -> Result<(), Failure> {
    if (s.tau() - cfg.tau()).abs() > 1e-12 * cfg.tau() {
        return Err(Failure::spec(format!(
            "spike file has tau = {} but the spec has tau = {}",
            s.tau(),
            cfg.tau()
        )));
    }
    Ok(())
}
