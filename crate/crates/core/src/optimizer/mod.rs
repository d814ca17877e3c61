//! Alternating optimization of the beamformers and the RDARS configuration.
//!
//! Every outer iteration takes one step per block in the order receive filter,
//! transmit beamformer, reflection phases, auxiliary variables, connected-mode
//! indicator and connected-column selection, then shrinks the penalty weights.

mod auxiliary;
mod beamforming;
mod surface;

use alloc::boxed::Box;
use alloc::vec::Vec;

use num_traits::Float;
use rand::Rng;

pub use auxiliary::{dual_function, update_auxiliary, AuxiliaryState};
pub use beamforming::{
    align_beam_phases, min_power_beamformer, unvec_f, update_receive_filter, update_transmit_beamformer, vec_f,
    SocpProblem, UserCone,
};
pub use surface::{
    align_unit_modulus, mode_vector, smallest_entries, update_mode_selection, update_reflection, update_selection_columns,
};

use crate::channel::{assemble_composites, link_rng, stream, ChannelSet, Composites, RdarsState};
use crate::error::{Error, Result, UserDiagnostic};
use crate::linalg::{CMat, CVec, C64};
use crate::metrics::{penalty_residuals, radar_snr, to_db, user_sinr, Beamformer, Residuals};
use crate::scenario::{PenaltyParams, SystemConfig};
use crate::surrogate::{column_coefficients, mode_coefficients, penalized_objective_direct, phi_coefficients, BlockState};

/// Which blocks run, and whether the SINR constraints apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockFlags {
    pub optimize_phase: bool,
    pub optimize_selection: bool,
    pub enforce_sinr: bool,
}

impl Default for BlockFlags {
    fn default() -> Self {
        Self { optimize_phase: true, optimize_selection: true, enforce_sinr: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltySchedule {
    pub rho1: f64,
    pub rho2: f64,
    pub c1: f64,
    pub c2: f64,
    pub rho_floor: f64,
}

impl PenaltySchedule {
    pub fn new(p: &PenaltyParams) -> Self {
        Self { rho1: p.rho1_init, rho2: p.rho2_init, c1: p.c1, c2: p.c2, rho_floor: p.rho_floor }
    }

    pub fn decay(&mut self) {
        self.rho1 = (self.c1 * self.rho1).max(self.rho_floor);
        self.rho2 = (self.c2 * self.rho2).max(self.rho_floor);
    }
}

/// One row of the iteration trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub radar_snr_db: f64,
    pub penalized_obj: f64,
    pub comm_residual: f64,
    pub selection_residual: f64,
    pub min_sinr_db: f64,
    pub rho1: f64,
    pub rho2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointSolution {
    pub beamformer: Beamformer,
    pub rdars: RdarsState,
    pub aux: AuxiliaryState,
    pub penalty: PenaltySchedule,
    pub trace: Vec<TraceRow>,
    pub iterations: usize,
    pub converged: bool,
    /// Linear radar SNR.
    pub radar_snr: f64,
    /// Linear per-user SINR.
    pub sinr: Vec<f64>,
    pub residuals: Residuals,
}

impl JointSolution {
    pub fn radar_snr_db(&self) -> f64 {
        to_db(self.radar_snr)
    }

    pub fn min_sinr_db(&self) -> f64 {
        self.sinr.iter().copied().fold(f64::INFINITY, f64::min).pipe_db()
    }
}

trait PipeDb {
    fn pipe_db(self) -> f64;
}

impl PipeDb for f64 {
    fn pipe_db(self) -> f64 {
        if self.is_finite() {
            to_db(self)
        } else {
            f64::NAN
        }
    }
}

/// Uniform phases on `[0, 2π)` drawn from the initial-phase stream of `seed`.
pub fn random_phases(elements: usize, seed: u64) -> CVec {
    let mut rng = link_rng(seed, stream::INITIAL_PHASES);
    CVec::from_fn(elements, |_, _| C64::from_polar(1.0, rng.gen_range(0.0..core::f64::consts::TAU)))
}

/// Matched beams `conj(h1_k)` scaled to total power `power`.
fn matched_beams(h1: &[CVec], rows: usize, power: f64) -> CMat {
    let mut f = CMat::zeros(rows, h1.len());
    for (k, h) in h1.iter().enumerate() {
        let n = h.norm();
        if n > 0.0 {
            f.set_column(k, &h.map(|z| z.conj() / n));
        } else {
            f[(k % rows, k)] = C64::new(1.0, 0.0);
        }
    }
    let scale = Float::sqrt(power) / f.norm();
    f * C64::new(scale, 0.0)
}

fn diagnostics(h1: &[CVec], thresholds: &[f64], noise: &[f64], power: f64) -> Vec<UserDiagnostic> {
    h1.iter()
        .enumerate()
        .map(|(k, h)| UserDiagnostic {
            user: k,
            target_db: to_db(thresholds[k]),
            single_user_limit_db: to_db(power * h.norm_squared() / noise[k]),
        })
        .collect()
}

/// Initial point: random phases, the first `a` elements connected in order, and the
/// minimum-power SINR-feasible beamformer scaled up to full power.
pub fn initialize(config: &SystemConfig, channels: &ChannelSet, seed: u64) -> Result<(Beamformer, RdarsState, AuxiliaryState)> {
    let rdars = RdarsState::leading(random_phases(channels.elements(), seed), config.connected);
    let comp = assemble_composites(channels, &rdars)?;
    let thresholds = config.sinr_thresholds();
    let noise = config.user_noise_watts();
    let power = config.power_watts();
    let rows = channels.antennas() + config.connected;
    let f = initial_beams(&comp, rows, &thresholds, &noise, power)?;
    let w = update_receive_filter(&comp.h2, &f)?;
    let aux = update_auxiliary(&comp.h1, &f, &alloc::vec![0.0; thresholds.len()], &noise)?;
    Ok((Beamformer { f, w }, rdars, aux))
}

fn initial_beams(comp: &Composites, rows: usize, thresholds: &[f64], noise: &[f64], power: f64) -> Result<CMat> {
    let users = comp.h1.len();
    if thresholds.iter().all(|&g| g <= 0.0) {
        return Ok(matched_beams(&comp.h1, rows, power));
    }
    let infeasible = || Error::InfeasibleTargets(diagnostics(&comp.h1, thresholds, noise, power));
    if comp.h1.iter().zip(thresholds).any(|(h, &g)| g > 0.0 && h.norm_squared() == 0.0) {
        return Err(infeasible());
    }
    let placeholder = CMat::zeros(rows, users);
    let problem = SocpProblem {
        objective: CVec::zeros(rows * users),
        ..SocpProblem::new(&CMat::zeros(1, rows), &CVec::from_element(1, C64::new(1.0, 0.0)), &placeholder, &comp.h1, thresholds, noise, power)
    };
    let (f, p) = match min_power_beamformer(&problem) {
        Ok(v) => v,
        Err(Error::Infeasible) => return Err(infeasible()),
        Err(e) => return Err(e),
    };
    if p > power || p == 0.0 {
        return Err(infeasible());
    }
    Ok(f * C64::new(Float::sqrt(power / p), 0.0))
}

/// Stateful alternating optimizer; each `step_*` call is one block update.
#[derive(Debug, Clone)]
pub struct AlternatingOptimizer<'a> {
    config: &'a SystemConfig,
    channels: &'a ChannelSet,
    pub flags: BlockFlags,
    pub beamformer: Beamformer,
    pub rdars: RdarsState,
    pub aux: AuxiliaryState,
    pub penalty: PenaltySchedule,
    thresholds: Vec<f64>,
    noise: Vec<f64>,
}

impl<'a> AlternatingOptimizer<'a> {
    /// Initializes from `config.seed`. When the SINR constraints are not enforced and the
    /// targets are unreachable, the matched-beam start is used instead.
    pub fn new(config: &'a SystemConfig, channels: &'a ChannelSet, flags: BlockFlags) -> Result<Self> {
        let noise = config.user_noise_watts();
        let thresholds = if flags.enforce_sinr { config.sinr_thresholds() } else { alloc::vec![0.0; noise.len()] };
        let (beamformer, rdars, aux) = match initialize(config, channels, config.seed) {
            Err(Error::InfeasibleTargets(_)) if !flags.enforce_sinr => {
                let mut relaxed = config.clone();
                relaxed.sinr_threshold_db = alloc::vec![f64::NEG_INFINITY; noise.len()];
                initialize(&relaxed, channels, config.seed)?
            }
            other => other?,
        };
        Ok(Self {
            config,
            channels,
            flags,
            beamformer,
            rdars,
            aux,
            penalty: PenaltySchedule::new(&config.penalty),
            thresholds,
            noise,
        })
    }

    /// Replaces the RDARS state, e.g. to pin a connected set.
    pub fn with_rdars(mut self, rdars: RdarsState) -> Result<Self> {
        rdars.validate()?;
        if rdars.columns.len() != self.rdars.columns.len() {
            return Err(Error::DimensionMismatch(alloc::format!(
                "{} connected columns, beamformer expects {}",
                rdars.columns.len(),
                self.rdars.columns.len()
            )));
        }
        self.rdars = rdars;
        let comp = self.composites()?;
        self.aux = update_auxiliary(&comp.h1, &self.beamformer.f, &alloc::vec![0.0; self.noise.len()], &self.noise)?;
        Ok(self)
    }

    pub fn composites(&self) -> Result<Composites> {
        assemble_composites(self.channels, &self.rdars)
    }

    /// Communication penalty weight; the penalty vanishes when the SINR constraints are dropped.
    fn comm_rho(&self) -> f64 {
        if self.flags.enforce_sinr {
            self.penalty.rho1
        } else {
            f64::INFINITY
        }
    }

    pub fn block_state(&self) -> BlockState<'_> {
        BlockState {
            channels: self.channels,
            beamformer: &self.beamformer,
            aux: &self.aux.s,
            rdars: &self.rdars,
            user_noise: &self.noise,
            rho1: self.comm_rho(),
            rho2: self.penalty.rho2,
            rcs_mean_square: self.config.rcs_mean_square,
            radar_noise: self.config.radar_noise_watts(),
        }
    }

    pub fn penalized_objective(&self) -> Result<f64> {
        penalized_objective_direct(&self.block_state())
    }

    fn selection_active(&self) -> bool {
        self.flags.optimize_selection && self.rdars.connected_count() < self.rdars.elements()
    }

    pub fn step_receive_filter(&mut self) -> Result<()> {
        let comp = self.composites()?;
        self.beamformer.w = update_receive_filter(&comp.h2, &self.beamformer.f)?;
        Ok(())
    }

    pub fn transmit_problem(&self) -> Result<(CMat, SocpProblem)> {
        let comp = self.composites()?;
        let f_t = align_beam_phases(&comp.h1, &self.beamformer.f);
        let problem = SocpProblem::new(
            &comp.h2,
            &self.beamformer.w,
            &f_t,
            &comp.h1,
            &self.thresholds,
            &self.noise,
            self.config.power_watts(),
        );
        Ok((f_t, problem))
    }

    pub fn step_transmit(&mut self) -> Result<()> {
        let (f_t, problem) = self.transmit_problem()?;
        self.beamformer.f = update_transmit_beamformer(&f_t, &problem)?;
        Ok(())
    }

    pub fn step_reflection(&mut self) -> Result<()> {
        if !self.flags.optimize_phase {
            return Ok(());
        }
        let coeffs = phi_coefficients(&self.block_state());
        self.rdars.phi = update_reflection(&coeffs, &self.rdars.phi);
        Ok(())
    }

    pub fn step_auxiliary(&mut self) -> Result<()> {
        let comp = self.composites()?;
        self.aux = update_auxiliary(&comp.h1, &self.beamformer.f, &self.thresholds, &self.noise)?;
        Ok(())
    }

    pub fn step_mode(&mut self) -> Result<()> {
        if !self.selection_active() {
            return Ok(());
        }
        let coeffs = mode_coefficients(&self.block_state());
        let a_t = mode_vector(&self.rdars.connected);
        self.rdars.connected = update_mode_selection(&coeffs, &a_t, self.rdars.connected_count());
        Ok(())
    }

    pub fn step_columns(&mut self) -> Result<()> {
        if !self.selection_active() || self.rdars.columns.is_empty() {
            return Ok(());
        }
        let coeffs = column_coefficients(&self.block_state())?;
        self.rdars.columns = update_selection_columns(&coeffs, &self.rdars.column_vector());
        Ok(())
    }

    pub fn decay(&mut self) {
        self.penalty.decay();
    }

    /// Current state with the optimal receive filter for the current `F`.
    pub fn snapshot(&self, iter: usize, trace: Vec<TraceRow>, converged: bool) -> Result<(JointSolution, TraceRow)> {
        let comp = self.composites()?;
        let w = update_receive_filter(&comp.h2, &self.beamformer.f)?;
        let snr = radar_snr(&w, &comp.h2, &self.beamformer.f, self.config.rcs_mean_square, self.config.radar_noise_watts());
        let sinr = user_sinr(&comp.h1, &self.beamformer.f, &self.noise)?;
        let residuals = penalty_residuals(&self.rdars, &self.aux.s, &comp.h1, &self.beamformer.f, &self.noise);
        let beamformer = Beamformer { f: self.beamformer.f.clone(), w };
        let state = BlockState { beamformer: &beamformer, ..self.block_state() };
        let row = TraceRow {
            iter,
            radar_snr_db: to_db(snr),
            penalized_obj: penalized_objective_direct(&state)?,
            comm_residual: residuals.comm,
            selection_residual: residuals.selection,
            min_sinr_db: sinr.iter().copied().fold(f64::INFINITY, f64::min).pipe_db(),
            rho1: self.penalty.rho1,
            rho2: self.penalty.rho2,
        };
        let solution = JointSolution {
            beamformer,
            rdars: self.rdars.clone(),
            aux: self.aux.clone(),
            penalty: self.penalty,
            trace,
            iterations: iter,
            converged,
            radar_snr: snr,
            sinr,
            residuals,
        };
        Ok((solution, row))
    }
}

/// Runs the alternating optimization from `config.seed` until the radar SNR settles and
/// both penalty residuals vanish, or `config.stopping.max_iters` is reached.
pub fn run_joint_optimization(config: &SystemConfig, channels: &ChannelSet, flags: BlockFlags) -> Result<JointSolution> {
    let mut opt = AlternatingOptimizer::new(config, channels, flags)?;
    let stop = config.stopping;
    let mut trace: Vec<TraceRow> = Vec::new();
    let mut last: Option<JointSolution> = None;
    let abort = |iteration: usize, cause: Error, last: Option<JointSolution>| Error::Aborted {
        iteration,
        cause: Box::new(cause),
        last_feasible: last.map(Box::new),
    };
    for iter in 1..=stop.max_iters {
        if let Err(e) = opt.step_receive_filter().and_then(|_| opt.step_transmit()) {
            return Err(abort(iter, e, last));
        }
        let (mut solution, row) = match opt.snapshot(iter, Vec::new(), false) {
            Ok(v) => v,
            Err(e) => return Err(abort(iter, e, last)),
        };
        let settled = trace.last().is_some_and(|prev: &TraceRow| {
            let prev_snr = 10f64.powf(prev.radar_snr_db / 10.0);
            (solution.radar_snr - prev_snr).abs() <= stop.rel_tol * prev_snr
        });
        trace.push(row);
        let converged =
            settled && row.comm_residual < stop.residual_tol && row.selection_residual < stop.residual_tol;
        if converged || iter == stop.max_iters {
            solution.trace = trace;
            solution.converged = converged;
            return Ok(solution);
        }
        last = Some(solution);
        let blocks = opt
            .step_reflection()
            .and_then(|_| opt.step_auxiliary())
            .and_then(|_| opt.step_mode())
            .and_then(|_| opt.step_columns());
        if let Err(e) = blocks {
            return Err(abort(iter, e, last));
        }
        opt.decay();
    }
    // max_iters == 0
    let (mut solution, _) = opt.snapshot(0, Vec::new(), false)?;
    solution.trace = trace;
    Ok(solution)
}
