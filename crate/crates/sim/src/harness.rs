//! Monte Carlo sweeps over the evaluation schemes.

use std::time::Instant;

use rayon::prelude::*;
use rdars_core::metrics::{beampattern_bs, beampattern_rdars};
use rdars_core::optimizer::TraceRow;
use rdars_core::schemes::SchemeSetup;
use rdars_core::{apply_scheme, derive_geometry, synthesize_channels, ChannelSet, Error, JointSolution, Scheme, SystemConfig};
use serde::Serialize;

use crate::error::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Convergence,
    Power,
    Elements,
    Sinr,
    #[value(name = "fixed-vs-opt-a")]
    #[serde(rename = "fixed-vs-opt-a")]
    FixedVsOptA,
    Beampattern,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Convergence => "convergence",
            ExperimentKind::Power => "power",
            ExperimentKind::Elements => "elements",
            ExperimentKind::Sinr => "sinr",
            ExperimentKind::FixedVsOptA => "fixed-vs-opt-a",
            ExperimentKind::Beampattern => "beampattern",
        }
    }

    /// Sweep grid used when none is given.
    pub fn default_grid(self, base: &SystemConfig) -> Vec<f64> {
        match self {
            ExperimentKind::Power | ExperimentKind::FixedVsOptA => vec![10.0, 15.0, 20.0, 25.0, 30.0],
            ExperimentKind::Sinr => vec![0.0, 5.0, 10.0, 15.0, 20.0],
            ExperimentKind::Elements => {
                let n = base.elements as f64;
                vec![0.5 * n, n, 1.5 * n, 2.0 * n].into_iter().map(f64::round).collect()
            }
            ExperimentKind::Convergence | ExperimentKind::Beampattern => vec![base.power_dbm],
        }
    }

    pub fn default_schemes(self) -> Vec<Scheme> {
        match self {
            ExperimentKind::Convergence | ExperimentKind::Beampattern => vec![Scheme::RdarsIsac],
            ExperimentKind::FixedVsOptA => vec![Scheme::RdarsIsac, Scheme::RdarsIsacFixedA],
            _ => Scheme::ALL.to_vec(),
        }
    }

    pub fn default_trials(self) -> usize {
        match self {
            ExperimentKind::Convergence | ExperimentKind::Beampattern => 1,
            _ => 20,
        }
    }

    /// The configuration at one sweep point.
    pub fn config_at(self, base: &SystemConfig, value: f64) -> Result<SystemConfig> {
        let config = match self {
            ExperimentKind::Power | ExperimentKind::FixedVsOptA | ExperimentKind::Convergence | ExperimentKind::Beampattern => {
                SystemConfig { power_dbm: value, ..base.clone() }
            }
            ExperimentKind::Sinr => base.clone().with_sinr_threshold_db(value),
            ExperimentKind::Elements => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(SimError::config("grid", format!("element count {value} is not a positive integer")));
                }
                base.clone().with_elements(value as usize)
            }
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub grid: Vec<f64>,
    pub schemes: Vec<Scheme>,
    pub trials: usize,
    pub base: SystemConfig,
    pub master_seed: u64,
}

impl ExperimentSpec {
    /// Experiment with the kind's default grid, schemes and trial count.
    pub fn new(kind: ExperimentKind, base: SystemConfig, master_seed: u64) -> Self {
        Self {
            kind,
            grid: kind.default_grid(&base),
            schemes: kind.default_schemes(),
            trials: kind.default_trials(),
            base,
            master_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(SimError::config("grid", "sweep grid is empty"));
        }
        if self.trials < 1 {
            return Err(SimError::config("trials", "at least one trial is required"));
        }
        if self.schemes.is_empty() {
            return Err(SimError::config("schemes", "no scheme selected"));
        }
        self.base.validate()?;
        for &v in &self.grid {
            self.kind.config_at(&self.base, v)?;
        }
        for s in &self.schemes {
            s.spec().validate()?;
        }
        Ok(())
    }
}

/// One (scheme, trial, sweep point) result. Optional fields are empty when the run failed
/// before producing any solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub scheme: String,
    pub trial: usize,
    pub seed: u64,
    pub sweep_value: f64,
    pub radar_snr_db: Option<f64>,
    pub min_sinr_db: Option<f64>,
    pub comm_residual: Option<f64>,
    pub selection_residual: Option<f64>,
    pub iterations: Option<usize>,
    /// Left empty unless timing is requested in the records, keeping them reproducible.
    pub wall_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingRow {
    pub scheme: String,
    pub trial: usize,
    pub sweep_value: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureRow {
    pub scheme: String,
    pub trial: usize,
    pub sweep_value: f64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRun {
    pub scheme: Scheme,
    pub trial: usize,
    pub rows: Vec<TraceRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Beampattern {
    pub scheme: Scheme,
    pub trial: usize,
    /// BS azimuth grid (rad) and gain (dB).
    pub bs: Vec<(f64, f64)>,
    /// RDARS (azimuth, elevation) grid (rad) and gain (dB).
    pub rdars: Vec<(f64, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub kind: ExperimentKind,
    pub records: Vec<ExperimentRecord>,
    pub timings: Vec<TimingRow>,
    pub failures: Vec<FailureRow>,
    pub traces: Vec<TraceRun>,
    pub beampatterns: Vec<Beampattern>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one Monte Carlo trial, shared by every sweep point and scheme.
pub fn trial_seed(master: u64, trial: usize) -> u64 {
    splitmix64(master ^ splitmix64(trial as u64))
}

pub fn degrees_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| (lo + step * i as f64).to_radians()).collect()
}

/// BS azimuth grid: −90° to 90° in 0.25° steps.
pub fn bs_pattern_grid() -> Vec<f64> {
    degrees_grid(-90.0, 90.0, 0.25)
}

/// RDARS grid: azimuth and elevation from −90° to 90° in 2° steps.
pub fn rdars_pattern_grid() -> Vec<(f64, f64)> {
    let axis = degrees_grid(-90.0, 90.0, 2.0);
    axis.iter().flat_map(|&t| axis.iter().map(move |&p| (t, p))).collect()
}

pub fn compute_beampattern(scheme: Scheme, trial: usize, sol: &JointSolution, channels: &ChannelSet) -> Result<Beampattern> {
    let f = &sol.beamformer.f;
    let bs_grid = bs_pattern_grid();
    let bs = beampattern_bs(f, channels, &bs_grid)?;
    let rd_grid = rdars_pattern_grid();
    let rd = beampattern_rdars(f, channels, &sol.rdars, &rd_grid)?;
    Ok(Beampattern {
        scheme,
        trial,
        bs: bs_grid.into_iter().zip(bs).collect(),
        rdars: rd_grid.into_iter().zip(rd).map(|((t, p), g)| (t, p, g)).collect(),
    })
}

struct RunOutcome {
    record: ExperimentRecord,
    timing: TimingRow,
    failure: Option<FailureRow>,
    trace: Option<TraceRun>,
    beampattern: Option<Beampattern>,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn run_one(
    kind: ExperimentKind,
    setup: &SchemeSetup,
    channels: &ChannelSet,
    trial: usize,
    seed: u64,
    sweep_value: f64,
) -> RunOutcome {
    let scheme = setup.spec.scheme;
    let start = Instant::now();
    let result = setup.run(channels);
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let name = scheme.name().to_string();
    let mut record = ExperimentRecord {
        scheme: name.clone(),
        trial,
        seed,
        sweep_value,
        radar_snr_db: None,
        min_sinr_db: None,
        comm_residual: None,
        selection_residual: None,
        iterations: None,
        wall_ms: None,
    };
    let fill = |record: &mut ExperimentRecord, sol: &JointSolution, iterations: usize| {
        record.radar_snr_db = finite(sol.radar_snr_db());
        record.min_sinr_db = finite(sol.min_sinr_db());
        record.comm_residual = Some(sol.residuals.comm);
        record.selection_residual = Some(sol.residuals.selection);
        record.iterations = Some(iterations);
    };
    let mut failure = None;
    let mut trace = None;
    let mut beampattern = None;
    match result {
        Ok(sol) => {
            fill(&mut record, &sol, sol.iterations);
            if kind == ExperimentKind::Convergence {
                trace = Some(TraceRun { scheme, trial, rows: sol.trace.clone() });
            }
            if kind == ExperimentKind::Beampattern {
                match compute_beampattern(scheme, trial, &sol, &setup.prepare_channels(channels)) {
                    Ok(b) => beampattern = Some(b),
                    Err(e) => {
                        failure = Some(FailureRow { scheme: name.clone(), trial, sweep_value, error: e.to_string() })
                    }
                }
            }
        }
        Err(e) => {
            if let Error::Aborted { iteration, last_feasible: Some(sol), .. } = &e {
                fill(&mut record, sol, *iteration);
            }
            failure = Some(FailureRow { scheme: name.clone(), trial, sweep_value, error: e.to_string() });
        }
    }
    RunOutcome { record, timing: TimingRow { scheme: name, trial, sweep_value, wall_ms }, failure, trace, beampattern }
}

/// Runs every (sweep point, trial, scheme) combination. Channels are drawn once per
/// (sweep point, trial) and shared by all schemes.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    spec.validate()?;
    let mut setups_per_point = Vec::with_capacity(spec.grid.len());
    for &value in &spec.grid {
        let config = spec.kind.config_at(&spec.base, value)?;
        let geometry = derive_geometry(&config, &config.placement)?;
        setups_per_point.push((config, geometry));
    }
    let jobs: Vec<(usize, usize)> =
        (0..spec.grid.len()).flat_map(|p| (0..spec.trials).map(move |t| (p, t))).collect();
    let results: Vec<Result<Vec<RunOutcome>>> = jobs
        .par_iter()
        .map(|&(p, trial)| {
            let (config, geometry) = &setups_per_point[p];
            let seed = trial_seed(spec.master_seed, trial);
            let config = SystemConfig { seed, ..config.clone() };
            let channels = synthesize_channels(&config, geometry, seed)?;
            spec.schemes
                .iter()
                .map(|s| {
                    let setup = apply_scheme(&s.spec(), &config)?;
                    Ok(run_one(spec.kind, &setup, &channels, trial, seed, spec.grid[p]))
                })
                .collect()
        })
        .collect();
    let mut out = ExperimentOutput {
        kind: spec.kind,
        records: Vec::new(),
        timings: Vec::new(),
        failures: Vec::new(),
        traces: Vec::new(),
        beampatterns: Vec::new(),
    };
    for batch in results {
        for r in batch? {
            out.records.push(r.record);
            out.timings.push(r.timing);
            out.failures.extend(r.failure);
            out.traces.extend(r.trace);
            out.beampatterns.extend(r.beampattern);
        }
    }
    // Jobs are already in (point, trial, scheme) order; keep it explicit.
    let order = |scheme: &str| spec.schemes.iter().position(|s| s.name() == scheme).unwrap_or(usize::MAX);
    let point = |v: f64| spec.grid.iter().position(|&g| g == v).unwrap_or(usize::MAX);
    out.records.sort_by_key(|r| (point(r.sweep_value), r.trial, order(&r.scheme)));
    if out.records.iter().all(|r| r.radar_snr_db.is_none()) {
        if let Some(f) = out.failures.first() {
            return Err(SimError::AllRunsFailed(format!("{} (trial {}): {}", f.scheme, f.trial, f.error)));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stat {
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
}

/// Mean and standard error (sample standard deviation over √n) of the finite values.
pub fn mean_stderr(values: &[f64]) -> Option<Stat> {
    let v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    let n = v.len();
    if n == 0 {
        return None;
    }
    let mean = v.iter().sum::<f64>() / n as f64;
    let stderr = if n > 1 {
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    } else {
        0.0
    };
    Some(Stat { mean, stderr, count: n })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryPoint {
    pub scheme: String,
    pub sweep_value: f64,
    pub trials: usize,
    pub failed: usize,
    pub radar_snr_db: Option<Stat>,
    pub min_sinr_db: Option<Stat>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub experiment: ExperimentKind,
    pub points: Vec<SummaryPoint>,
}

/// Per (scheme, sweep point) means of the dB values.
pub fn summarize(kind: ExperimentKind, records: &[ExperimentRecord]) -> Summary {
    let mut keys: Vec<(String, f64)> = Vec::new();
    for r in records {
        if !keys.iter().any(|(s, v)| *s == r.scheme && *v == r.sweep_value) {
            keys.push((r.scheme.clone(), r.sweep_value));
        }
    }
    let points = keys
        .into_iter()
        .map(|(scheme, value)| {
            let rows: Vec<&ExperimentRecord> =
                records.iter().filter(|r| r.scheme == scheme && r.sweep_value == value).collect();
            let snr: Vec<f64> = rows.iter().filter_map(|r| r.radar_snr_db).collect();
            let sinr: Vec<f64> = rows.iter().filter_map(|r| r.min_sinr_db).collect();
            SummaryPoint {
                failed: rows.len() - snr.len(),
                trials: rows.len(),
                radar_snr_db: mean_stderr(&snr),
                min_sinr_db: mean_stderr(&sinr),
                scheme,
                sweep_value: value,
            }
        })
        .collect();
    Summary { experiment: kind, points }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_by_hand() {
        let s = mean_stderr(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.mean, 2.0);
        assert!((s.stderr - 0.5774).abs() < 1e-4);
        assert!(mean_stderr(&[]).is_none());
    }

    #[test]
    fn trial_seeds_differ() {
        let a: Vec<u64> = (0..100).map(|t| trial_seed(7, t)).collect();
        let mut b = a.clone();
        b.sort();
        b.dedup();
        assert_eq!(b.len(), 100);
        assert_eq!(trial_seed(7, 3), trial_seed(7, 3));
        assert_ne!(trial_seed(7, 3), trial_seed(8, 3));
    }

    #[test]
    fn empty_grid_rejected() {
        let mut spec = ExperimentSpec::new(ExperimentKind::Power, SystemConfig::desk(), 1);
        spec.grid.clear();
        assert!(spec.validate().unwrap_err().is_config_error());
    }

    #[test]
    fn elements_grid_scales_preset() {
        assert_eq!(ExperimentKind::Elements.default_grid(&SystemConfig::desk()), vec![12.0, 24.0, 36.0, 48.0]);
    }
}
