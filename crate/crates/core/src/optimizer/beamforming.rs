//! Receive-filter and transmit-beamformer updates.

use alloc::vec::Vec;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{complexify, dotu, principal_eigenvector, realify, CMat, CVec, RMat, RVec, C64};
use crate::socp::{solve_linear_socp, Cone, Socp, SocpOptions};

/// Principal eigenvector of `H2 F Fᴴ H2ᴴ` (unit norm), the radar-SNR maximizing filter.
pub fn update_receive_filter(h2: &CMat, f: &CMat) -> Result<CVec> {
    let g = h2 * f;
    if g.iter().all(|z| *z == C64::new(0.0, 0.0)) {
        return Err(Error::ZeroEcho);
    }
    let (_, w) = principal_eigenvector(&(&g * g.adjoint()));
    Ok(w)
}

/// One user's SINR constraint in cone form.
#[derive(Debug, Clone, PartialEq)]
pub struct UserCone {
    pub user: usize,
    pub h1: CVec,
    /// Linear SINR threshold, positive.
    pub threshold: f64,
    pub noise_power: f64,
}

/// Linearized transmit problem: maximize `Re{cᴴ vec(F)}` over the user cones and
/// the power ball.
#[derive(Debug, Clone, PartialEq)]
pub struct SocpProblem {
    /// `C vec(F_t)` with `C = I_K ⊗ H2ᴴwwᴴH2 / (wᴴw)`.
    pub objective: CVec,
    pub users: Vec<UserCone>,
    pub power: f64,
    /// Rows of `F` (M + a).
    pub rows: usize,
    /// Columns of `F` (K).
    pub beams: usize,
}

pub fn vec_f(f: &CMat) -> CVec {
    CVec::from_column_slice(f.as_slice())
}

pub fn unvec_f(v: &CVec, rows: usize, beams: usize) -> CMat {
    CMat::from_column_slice(rows, beams, v.as_slice())
}

impl SocpProblem {
    /// Builds the problem around `f_t`. Users with a non-positive threshold are unconstrained.
    pub fn new(
        h2: &CMat,
        w: &CVec,
        f_t: &CMat,
        h1: &[CVec],
        thresholds: &[f64],
        noise_powers: &[f64],
        power: f64,
    ) -> Self {
        let echo = h2.adjoint() * w;
        let scale = 1.0 / w.norm_squared();
        let mut objective = CVec::zeros(f_t.len());
        let rows = f_t.nrows();
        for (k, col) in f_t.column_iter().enumerate() {
            let gain = echo.dotc(&col.into_owned()) * scale;
            objective.rows_mut(k * rows, rows).copy_from(&(&echo * gain));
        }
        let users = h1
            .iter()
            .enumerate()
            .filter(|(k, _)| thresholds[*k] > 0.0)
            .map(|(k, h)| UserCone { user: k, h1: h.clone(), threshold: thresholds[k], noise_power: noise_powers[k] })
            .collect();
        Self { objective, users, power, rows, beams: f_t.ncols() }
    }

    /// Real variables `x = [Re f; Im f] / √P`.
    pub fn user_cones(&self, extra_vars: usize) -> Vec<Cone> {
        let d = self.rows;
        let kd = d * self.beams;
        let n = 2 * kd + extra_vars;
        let amp = Float::sqrt(self.power);
        self.users
            .iter()
            .map(|u| {
                let sigma = Float::sqrt(u.noise_power);
                let c = amp / sigma;
                let re_row = |i: usize| {
                    let mut r = RVec::zeros(n);
                    for (j, h) in u.h1.iter().enumerate() {
                        r[i * d + j] = h.re * c;
                        r[kd + i * d + j] = -h.im * c;
                    }
                    r
                };
                let im_row = |i: usize| {
                    let mut r = RVec::zeros(n);
                    for (j, h) in u.h1.iter().enumerate() {
                        r[i * d + j] = h.im * c;
                        r[kd + i * d + j] = h.re * c;
                    }
                    r
                };
                let g = Float::sqrt(u.threshold);
                let mut u_coef = RMat::zeros(2 * self.beams + 1, n);
                for i in 0..self.beams {
                    u_coef.row_mut(2 * i).copy_from(&(re_row(i) * g).transpose());
                    u_coef.row_mut(2 * i + 1).copy_from(&(im_row(i) * g).transpose());
                }
                let mut u_const = RVec::zeros(2 * self.beams + 1);
                u_const[2 * self.beams] = g;
                Cone { t_coef: re_row(u.user) * Float::sqrt(1.0 + u.threshold), t_const: 0.0, u_coef, u_const }
            })
            .collect()
    }

    pub fn to_socp(&self) -> Socp {
        let n = 2 * self.objective.len();
        let c = realify(&self.objective);
        let norm = c.norm();
        let objective = if norm > 0.0 { c.unscale(-norm) } else { c };
        let mut cones = self.user_cones(0);
        cones.push(Cone::ball(n, 1.0));
        Socp { objective, cones }
    }
}

/// Rotates every beam `f_k` so that `h1_kᵀ f_k` is real and non-negative; SINR and the
/// radar SNR are unchanged.
pub fn align_beam_phases(h1: &[CVec], f: &CMat) -> CMat {
    let mut out = f.clone();
    for (k, h) in h1.iter().enumerate().take(f.ncols()) {
        let g = dotu(h, &f.column(k).into_owned());
        if g.norm() > 0.0 {
            let rot = g.conj() / g.norm();
            for x in out.column_mut(k).iter_mut() {
                *x *= rot;
            }
        }
    }
    out
}

/// Solves the linearized transmit problem, warm-started at `f_prev`.
pub fn update_transmit_beamformer(f_prev: &CMat, problem: &SocpProblem) -> Result<CMat> {
    let amp = Float::sqrt(problem.power);
    if problem.users.is_empty() {
        let c = &problem.objective;
        let norm = c.norm();
        if norm == 0.0 {
            return Ok(f_prev.clone());
        }
        return Ok(unvec_f(&c.scale(amp / norm), problem.rows, problem.beams));
    }
    let h1: Vec<CVec> = {
        let mut v = alloc::vec![CVec::zeros(problem.rows); problem.beams];
        for u in &problem.users {
            v[u.user] = u.h1.clone();
        }
        v
    };
    let start = realify(&vec_f(&align_beam_phases(&h1, f_prev))).unscale(amp);
    let options = SocpOptions { start: Some(start), ..SocpOptions::default() };
    let sol = match solve_linear_socp(&problem.to_socp(), &options) {
        Err(Error::Infeasible) => return Err(Error::SinrTargetsUnattainable),
        other => other?,
    };
    Ok(unvec_f(&complexify(&sol.x).scale(amp), problem.rows, problem.beams))
}

/// Minimum-power beamformer meeting the cones of `problem` (its objective is ignored).
///
/// Returns `vec(F)` and its power.
pub fn min_power_beamformer(problem: &SocpProblem) -> Result<(CMat, f64)> {
    let n = 2 * problem.rows * problem.beams;
    let mut cones = problem.user_cones(1);
    // ‖x‖ ≤ τ
    let mut t_coef = RVec::zeros(n + 1);
    t_coef[n] = 1.0;
    let u_coef = RMat::identity(n, n).resize_horizontally(n + 1, 0.0);
    cones.push(Cone { t_coef, t_const: 0.0, u_coef, u_const: RVec::zeros(n) });
    let mut objective = RVec::zeros(n + 1);
    objective[n] = 1.0;
    let sol = solve_linear_socp(&Socp { objective, cones }, &SocpOptions::default())?;
    let x = sol.x.rows(0, n).into_owned();
    let f = unvec_f(&complexify(&x).scale(Float::sqrt(problem.power)), problem.rows, problem.beams);
    let p = f.norm_squared();
    Ok((f, p))
}
