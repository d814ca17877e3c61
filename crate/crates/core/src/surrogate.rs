//! Closed-form coefficient expansions of the penalized objective in each block
//! variable, their MM linearizations, and the direct-evaluation oracle.
//!
//! The radar part of every expansion carries the factor `σα² / (σ2² ‖w‖²)`, so the
//! expansions equal the penalized objective itself rather than a rescaled copy.
//! Kronecker-lifted terms are stored factored (`Z_k = δ_kᵀ ⊗ β`) and only
//! materialized on request for small surfaces.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::channel::{assemble_composites, select_rows, ChannelSet, RdarsState};
use crate::error::{Error, Result};
use crate::linalg::{
    conj, dotu, gram_max_eigenvalue, kron, symmetric_max_eigenvalue, CMat, CVec, RMat, RVec, C64, ONE, ZERO,
};
use crate::metrics::{selection_residual, Beamformer};

/// Largest surface size for which `φ ⊗ φ` is materialized.
pub const LIFT_CAP: usize = 256;

/// Per-user affine/bilinear decomposition of the echo `wᴴH2 f_k` in one block variable:
/// `x_k + y_kᵀv + (z_rightᵀv)(z_left_kᵀv)`, i.e. `Z_k = z_left_kᵀ ⊗ z_rightᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct EchoAffineParts {
    pub x: Vec<C64>,
    pub y: Vec<CVec>,
    pub z_left: Vec<CVec>,
    pub z_right: CVec,
}

impl EchoAffineParts {
    pub fn zeros(n: usize, users: usize) -> Self {
        Self {
            x: vec![ZERO; users],
            y: vec![CVec::zeros(n); users],
            z_left: vec![CVec::zeros(n); users],
            z_right: CVec::zeros(n),
        }
    }

    pub fn users(&self) -> usize {
        self.x.len()
    }

    /// The lifted row `Z_k` (length N²) with `(v ⊗ v)[jN+i] = v_j v_i`.
    pub fn z(&self, k: usize) -> CVec {
        kron(&self.z_left[k], &self.z_right)
    }

    /// Echo of user `k` at `v`, using the factored bilinear term.
    pub fn evaluate(&self, k: usize, v: &CVec) -> C64 {
        self.x[k] + dotu(&self.y[k], v) + dotu(&self.z_right, v) * dotu(&self.z_left[k], v)
    }
}

/// Everything the block expansions need besides the block variable itself.
#[derive(Debug, Clone, Copy)]
pub struct BlockState<'a> {
    pub channels: &'a ChannelSet,
    pub beamformer: &'a Beamformer,
    /// Auxiliary variables, `s[(k, i)]` pairs with `h1_kᵀ f_i`.
    pub aux: &'a CMat,
    pub rdars: &'a RdarsState,
    /// Per-user noise power; communication residuals are measured in units of `σ_k`.
    pub user_noise: &'a [f64],
    pub rho1: f64,
    pub rho2: f64,
    pub rcs_mean_square: f64,
    pub radar_noise: f64,
}

impl BlockState<'_> {
    pub fn radar_scale(&self) -> f64 {
        self.rcs_mean_square / (self.radar_noise * self.beamformer.w.norm_squared())
    }

    fn antennas(&self) -> usize {
        self.channels.antennas()
    }

    fn comm_weight(&self, k: usize) -> f64 {
        1.0 / Float::sqrt(self.user_noise[k])
    }

    fn f1(&self, k: usize) -> CVec {
        self.beamformer.f.column(k).rows(0, self.antennas()).into_owned()
    }

    fn f2(&self, k: usize) -> CVec {
        let m = self.antennas();
        let f = &self.beamformer.f;
        f.column(k).rows(m, f.nrows() - m).into_owned()
    }

    fn users(&self) -> usize {
        self.beamformer.f.ncols()
    }

    /// `h_rtᵀ A_a f_{k,2}`.
    fn connected_target_term(&self, k: usize) -> C64 {
        dotu(&select_rows(&self.channels.h_rt, &self.rdars.columns), &self.f2(k))
    }

    /// `h_ru,kᵀ A_a f_{i,2}`.
    fn connected_user_term(&self, k: usize, i: usize) -> C64 {
        dotu(&select_rows(&self.channels.h_ru[k], &self.rdars.columns), &self.f2(i))
    }
}

/// Penalized objective evaluated term by term from freshly assembled composites.
pub fn penalized_objective_direct(state: &BlockState) -> Result<f64> {
    let comp = assemble_composites(state.channels, state.rdars)?;
    let bf = state.beamformer;
    let radar = crate::metrics::radar_snr(&bf.w, &comp.h2, &bf.f, state.rcs_mean_square, state.radar_noise);
    let mut comm = 0.0;
    for (k, h) in comp.h1.iter().enumerate() {
        for (i, col) in bf.f.column_iter().enumerate() {
            comm += (dotu(h, &col.into_owned()) - state.aux[(k, i)]).norm_sqr() / state.user_noise[k];
        }
    }
    let sel = selection_residual(state.rdars);
    Ok(-radar + comm / (2.0 * state.rho1) + sel / (2.0 * state.rho2))
}

/// Echo decomposition in the reflection vector `φ` with `H3 = (I − A)H_br`.
pub fn echo_affine_decomposition(channels: &ChannelSet, rdars: &RdarsState, bf: &Beamformer) -> EchoAffineParts {
    let m = channels.antennas();
    let h3 = reflecting_rows(channels, rdars);
    let w = &bf.w;
    let h_rt = &channels.h_rt;
    let alpha0 = w.dotc(&channels.h_bt);
    let beta = (&h3 * conj(w)).component_mul(h_rt);
    let targets = select_rows(h_rt, &rdars.columns);
    let mut out = EchoAffineParts::zeros(channels.elements(), bf.f.ncols());
    out.z_right = beta.clone();
    for (k, col) in bf.f.column_iter().enumerate() {
        let f1 = col.rows(0, m).into_owned();
        let f2 = col.rows(m, col.len() - m).into_owned();
        let delta = h_rt.component_mul(&(&h3 * &f1));
        let gamma = dotu(&channels.h_bt, &f1) + dotu(&targets, &f2);
        out.x[k] = alpha0 * gamma;
        out.y[k] = beta.scale(1.0) * gamma + delta.clone() * alpha0;
        out.z_left[k] = delta;
    }
    out
}

fn reflecting_rows(channels: &ChannelSet, rdars: &RdarsState) -> CMat {
    let mut h3 = channels.h_br.clone();
    for (i, &c) in rdars.connected.iter().enumerate() {
        if c {
            h3.row_mut(i).fill(ZERO);
        }
    }
    h3
}

fn outer_conj_sum(vectors: &[CVec], n: usize) -> CMat {
    // Σ v vᴴ
    let mut r = CMat::zeros(n, n);
    for v in vectors {
        r.ger(ONE, v, &conj(v), ONE);
    }
    r
}

fn require_lift(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        Err(Error::LiftTooLarge { size: n, cap })
    } else {
        Ok(())
    }
}

/// Radar coefficients `(r, r_vec, R_mat)` = scale·(Σ|x|², Σ conj(y) x, Σ conj(y) yᵀ).
fn radar_terms(echo: &EchoAffineParts, scale: f64, n: usize) -> (f64, CVec, CMat) {
    let mut r0 = 0.0;
    let mut r1 = CVec::zeros(n);
    let mut r2 = CMat::zeros(n, n);
    for k in 0..echo.users() {
        r0 += echo.x[k].norm_sqr();
        r1 += conj(&echo.y[k]) * echo.x[k];
        r2.ger(ONE, &conj(&echo.y[k]), &echo.y[k], ONE);
    }
    (r0 * scale, r1.scale(scale), r2.scale(scale))
}

/// Lifted radar coefficients `(Σ conj(Z) x, Σ conj(Z) yᵀ, Σ conj(Z) Zᵀ)` times scale.
fn lifted_terms(echo: &EchoAffineParts, scale: f64) -> (CVec, CMat, CMat) {
    let n = echo.z_right.len();
    let nn = n * n;
    let mut r3 = CVec::zeros(nn);
    let mut r5 = CMat::zeros(nn, n);
    let mut r6 = CMat::zeros(nn, nn);
    for k in 0..echo.users() {
        let zc = conj(&echo.z(k));
        r3 += &zc * echo.x[k];
        r5.ger(ONE, &zc, &echo.y[k], ONE);
        r6.ger(ONE, &zc, &echo.z(k), ONE);
    }
    (r3.scale(scale), r5.scale(scale), r6.scale(scale))
}

/// Scaled radar part `scale·Σ_k |echo_k(v)|²` with the lifted terms in printed form.
fn radar_expansion(r0: f64, r_lin: &CVec, r_quad: &CMat, echo: &EchoAffineParts, scale: f64, v: &CVec) -> f64 {
    let psi = kron(v, v);
    let mut lifted_lin = ZERO; // r3ᴴψ
    let mut lifted_cross = ZERO; // ψᴴR5 v
    let mut lifted_quad = 0.0; // ψᴴR6ψ
    for k in 0..echo.users() {
        let zpsi = dotu(&echo.z(k), &psi);
        lifted_lin += echo.x[k].conj() * zpsi;
        lifted_cross += zpsi.conj() * dotu(&echo.y[k], v);
        lifted_quad += zpsi.norm_sqr();
    }
    r0 + 2.0 * r_lin.dotc(v).re
        + 2.0 * scale * lifted_lin.re
        + v.dotc(&(r_quad * v)).re
        + 2.0 * scale * lifted_cross.re
        + scale * lifted_quad
}

/// Coefficients of the objective in the reflection vector `φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiCoefficients {
    pub echo: EchoAffineParts,
    pub radar_scale: f64,
    pub rho1: f64,
    /// `s̃_{k,i}` at index `k·K + i`.
    pub offsets: Vec<C64>,
    /// `e_{k,i} = diag(h_ru,k) H3 f_{i,1}` at index `k·K + i`.
    pub gains: Vec<CVec>,
    pub r1: f64,
    pub r2: CVec,
    pub r4: CMat,
    pub r7: f64,
    pub r8: CVec,
    pub r9: CMat,
    /// Selection penalty `‖A − A_aA_aᵀ‖_F² / 2ρ2`, constant in `φ`.
    pub selection: f64,
}

impl PhiCoefficients {
    pub fn zeros(n: usize, users: usize, rho1: f64) -> Self {
        Self {
            echo: EchoAffineParts::zeros(n, users),
            radar_scale: 1.0,
            rho1,
            offsets: vec![ZERO; users * users],
            gains: vec![CVec::zeros(n); users * users],
            r1: 0.0,
            r2: CVec::zeros(n),
            r4: CMat::zeros(n, n),
            r7: 0.0,
            r8: CVec::zeros(n),
            r9: CMat::zeros(n, n),
            selection: 0.0,
        }
    }

    pub fn elements(&self) -> usize {
        self.r2.len()
    }

    /// `(r3, R5, R6)` materialized; requires N² ≤ [`LIFT_CAP`].
    pub fn lifted(&self) -> Result<(CVec, CMat, CMat)> {
        require_lift(self.elements() * self.elements(), LIFT_CAP)?;
        Ok(lifted_terms(&self.echo, self.radar_scale))
    }

    pub fn evaluate(&self, phi: &CVec) -> Result<f64> {
        let n = self.elements();
        if phi.len() != n {
            return Err(Error::DimensionMismatch(alloc::format!("phi has {} entries, expected {n}", phi.len())));
        }
        require_lift(n, LIFT_CAP)?;
        let radar = radar_expansion(self.r1, &self.r2, &self.r4, &self.echo, self.radar_scale, phi);
        // φᵀR9φ*
        let quad = dotu(phi, &(&self.r9 * conj(phi))).re;
        let penalty = self.r7 + 2.0 * self.r8.dotc(phi).re + quad;
        Ok(-radar + penalty / (2.0 * self.rho1) + self.selection)
    }

    /// Residual `(h1_kᵀ f_i − s_{k,i}) / σ_k` at `φ` for pair index `k·K + i`.
    pub fn residual(&self, pair: usize, phi: &CVec) -> C64 {
        self.offsets[pair] + dotu(&self.gains[pair], phi)
    }

    pub fn linearize(&self, phi_t: &CVec) -> PhiLinearization {
        let n = self.elements();
        let scale = self.radar_scale;
        let echo = &self.echo;
        // q1 = r2 + R4φ_t + R5ᴴ(φ_t⊗φ_t) = scale Σ conj(y_k) echo_k(φ_t)
        let mut q1 = CVec::zeros(n);
        let mut u = CVec::zeros(n);
        for k in 0..echo.users() {
            let e = echo.evaluate(k, phi_t);
            q1 += conj(&echo.y[k]) * e;
            u += conj(&echo.z_left[k]) * e;
        }
        let q1 = q1.scale(scale);
        // Q2[i,j] = q2[jN+i] = scale conj(β_i) Σ_k e_k conj(δ_k,j)
        let q2 = (conj(&echo.z_right) * u.transpose()).scale(scale);
        let q2_bar = RMat::from_fn(2 * n, 2 * n, |r, c| {
            let z = q2[(r % n, c % n)];
            match (r < n, c < n) {
                (true, true) => -z.re,
                (true, false) | (false, true) => -z.im,
                (false, false) => z.re,
            }
        });
        let sym = &q2_bar + q2_bar.transpose();
        let lambda1 = symmetric_max_eigenvalue(&sym);
        let phi_bar = crate::linalg::realify(phi_t);
        let mut shifted = sym;
        for i in 0..2 * n {
            shifted[(i, i)] -= lambda1;
        }
        let q3 = crate::linalg::complexify(&(shifted * &phi_bar));
        // R̄9 is the realification of conj(R9), so λmax(R̄9 + R̄9ᵀ) = 2 λmax(R9).
        let lambda2 = 2.0 * gram_max_eigenvalue(&self.gains);
        let q4 = (self.r9.map(|z| z.conj()) * phi_t).scale(2.0) - phi_t.scale(lambda2);
        let q5 = q1.scale(-2.0) + q3.scale(2.0) + (self.r8.scale(2.0) + &q4).unscale(2.0 * self.rho1);
        PhiLinearization { q1, q2, q2_bar, lambda1, q3, lambda2, q4, q5 }
    }
}

/// MM quantities of the reflection update at an expansion point.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiLinearization {
    pub q1: CVec,
    /// Reshaped `q2`, `Q2[i, j] = q2[jN + i]`.
    pub q2: CMat,
    pub q2_bar: RMat,
    pub lambda1: f64,
    pub q3: CVec,
    pub lambda2: f64,
    pub q4: CVec,
    pub q5: CVec,
}

fn pair_loop<F: FnMut(usize, usize)>(users: usize, mut f: F) {
    for k in 0..users {
        for i in 0..users {
            f(k, i);
        }
    }
}

pub fn phi_coefficients(state: &BlockState) -> PhiCoefficients {
    let ch = state.channels;
    let n = ch.elements();
    let users = state.users();
    let scale = state.radar_scale();
    let echo = echo_affine_decomposition(ch, state.rdars, state.beamformer);
    let (r1, r2, r4) = radar_terms(&echo, scale, n);
    let h3 = reflecting_rows(ch, state.rdars);
    let mut offsets = Vec::with_capacity(users * users);
    let mut gains = Vec::with_capacity(users * users);
    pair_loop(users, |k, i| {
        let f1 = state.f1(i);
        let wk = state.comm_weight(k);
        gains.push(ch.h_ru[k].component_mul(&(&h3 * &f1)) * C64::new(wk, 0.0));
        offsets.push((dotu(&ch.h_bu[k], &f1) + state.connected_user_term(k, i) - state.aux[(k, i)]) * wk);
    });
    let r7 = offsets.iter().map(|s| s.norm_sqr()).sum();
    let mut r8 = CVec::zeros(n);
    for (e, s) in gains.iter().zip(&offsets) {
        r8 += conj(e) * *s;
    }
    let r9 = outer_conj_sum(&gains, n);
    let selection = selection_residual(state.rdars) / (2.0 * state.rho2);
    PhiCoefficients { echo, radar_scale: scale, rho1: state.rho1, offsets, gains, r1, r2, r4, r7, r8, r9, selection }
}

/// Coefficients of the objective in the connected-mode indicator `a` (diagonal of `A`).
#[derive(Debug, Clone, PartialEq)]
pub struct ModeCoefficients {
    pub echo: EchoAffineParts,
    pub radar_scale: f64,
    pub rho1: f64,
    pub rho2: f64,
    /// `t_{k,i}` with residual `t_{k,i} − e'_{k,i}ᵀ a`.
    pub offsets: Vec<C64>,
    pub gains: Vec<CVec>,
    pub r10: f64,
    pub r11: CVec,
    pub r13: CMat,
    pub r16: f64,
    pub r17: CVec,
    pub r18: CMat,
    pub r19: RVec,
    pub r20: f64,
}

impl ModeCoefficients {
    pub fn elements(&self) -> usize {
        self.r19.len()
    }

    /// `(r12, R14, R15)` materialized; requires N² ≤ [`LIFT_CAP`].
    pub fn lifted(&self) -> Result<(CVec, CMat, CMat)> {
        require_lift(self.elements() * self.elements(), LIFT_CAP)?;
        Ok(lifted_terms(&self.echo, self.radar_scale))
    }

    pub fn evaluate(&self, a: &RVec) -> Result<f64> {
        let n = self.elements();
        if a.len() != n {
            return Err(Error::DimensionMismatch(alloc::format!("a has {} entries, expected {n}", a.len())));
        }
        require_lift(n, LIFT_CAP)?;
        let v = a.map(|x| C64::new(x, 0.0));
        let radar = radar_expansion(self.r10, &self.r11, &self.r13, &self.echo, self.radar_scale, &v);
        let penalty = self.r16 + 2.0 * self.r17.dotc(&v).re + v.dotc(&(&self.r18 * &v)).re;
        let selection = self.r19.dot(a) + self.r20;
        Ok(-radar + penalty / (2.0 * self.rho1) + selection / (2.0 * self.rho2))
    }

    pub fn linearize(&self, a_t: &RVec) -> ModeLinearization {
        let n = self.elements();
        let scale = self.radar_scale;
        let echo = &self.echo;
        let v = a_t.map(|x| C64::new(x, 0.0));
        let mut q6 = CVec::zeros(n);
        let mut u = CVec::zeros(n);
        for k in 0..echo.users() {
            let e = echo.evaluate(k, &v);
            q6 += conj(&echo.y[k]) * e;
            u += conj(&echo.z_left[k]) * e;
        }
        let q6 = q6.scale(scale);
        let q7 = (conj(&echo.z_right) * u.transpose()).scale(scale);
        let q7_tilde = q7.map(|z| -z.re);
        let sym = &q7_tilde + q7_tilde.transpose();
        let lambda3 = symmetric_max_eigenvalue(&sym);
        let mut shifted = sym;
        for i in 0..n {
            shifted[(i, i)] -= lambda3;
        }
        let q8 = q6.scale(-2.0) + (shifted * a_t).scale(2.0).map(|x| C64::new(x, 0.0));
        let lambda4 = gram_max_eigenvalue(&self.gains);
        let q9 = &self.r17 + &self.r18 * &v - v.scale(lambda4);
        let q10 = &q8 + q9.unscale(self.rho1) + self.r19.map(|x| C64::new(x / (2.0 * self.rho2), 0.0));
        ModeLinearization { q6, q7, q7_tilde, lambda3, q8, lambda4, q9, q10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeLinearization {
    pub q6: CVec,
    pub q7: CMat,
    pub q7_tilde: RMat,
    pub lambda3: f64,
    pub q8: CVec,
    pub lambda4: f64,
    pub q9: CVec,
    pub q10: CVec,
}

fn multiplicities(rdars: &RdarsState) -> RVec {
    let mut d = RVec::zeros(rdars.elements());
    for &r in &rdars.columns {
        d[r] += 1.0;
    }
    d
}

pub fn mode_coefficients(state: &BlockState) -> ModeCoefficients {
    let ch = state.channels;
    let n = ch.elements();
    let users = state.users();
    let scale = state.radar_scale();
    let w = &state.beamformer.w;
    let g = ch.h_rt.component_mul(&state.rdars.phi);
    let h0 = &ch.h_bt + ch.h_br.transpose() * &g;
    let alpha0 = w.dotc(&h0);
    let beta = (&ch.h_br * conj(w)).component_mul(&g);
    let mut echo = EchoAffineParts::zeros(n, users);
    echo.z_right = beta.clone();
    for k in 0..users {
        let f1 = state.f1(k);
        let delta = g.component_mul(&(&ch.h_br * &f1));
        let gamma = dotu(&h0, &f1) + state.connected_target_term(k);
        echo.x[k] = alpha0 * gamma;
        echo.y[k] = -(&beta * gamma + &delta * alpha0);
        echo.z_left[k] = delta;
    }
    let (r10, r11, r13) = radar_terms(&echo, scale, n);

    let mut offsets = Vec::with_capacity(users * users);
    let mut gains = Vec::with_capacity(users * users);
    pair_loop(users, |k, i| {
        let f1 = state.f1(i);
        let e = ch.h_ru[k].component_mul(&state.rdars.phi).component_mul(&(&ch.h_br * &f1));
        let t = dotu(&ch.h_bu[k], &f1) + e.sum() + state.connected_user_term(k, i) - state.aux[(k, i)];
        let wk = state.comm_weight(k);
        gains.push(e * C64::new(wk, 0.0));
        offsets.push(t * wk);
    });
    let r16 = offsets.iter().map(|t| t.norm_sqr()).sum();
    let mut r17 = CVec::zeros(n);
    for (e, t) in gains.iter().zip(&offsets) {
        r17 -= conj(e) * *t;
    }
    let r18 = outer_conj_sum(&gains, n);
    let r19 = multiplicities(state.rdars).map(|d| 1.0 - 2.0 * d);
    let r20 = state.rdars.columns.len() as f64;
    ModeCoefficients {
        echo,
        radar_scale: scale,
        rho1: state.rho1,
        rho2: state.rho2,
        offsets,
        gains,
        r10,
        r11,
        r13,
        r16,
        r17,
        r18,
        r19,
        r20,
    }
}

/// Coefficients of the objective in the stacked column-selection vector
/// `vec(A_a)` (`[jN + n]` is entry `(n, j)` of `A_a`).
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnCoefficients {
    pub elements: usize,
    pub columns: usize,
    pub rho1: f64,
    pub rho2: f64,
    /// Diagonal of the (fixed) `A`.
    pub selection_diag: RVec,
    pub x: Vec<C64>,
    pub y: Vec<CVec>,
    /// `u_{k,i}` with residual `u_{k,i} + e''_{k,i}ᵀ vec(A_a)`.
    pub offsets: Vec<C64>,
    pub gains: Vec<CVec>,
    pub r21: f64,
    pub r22: CVec,
    pub r23: CMat,
    pub r24: f64,
    pub r25: CVec,
    pub r26: CMat,
}

impl ColumnCoefficients {
    /// `(I_a ⊗ A) v`.
    pub fn selection_apply(&self, v: &RVec) -> RVec {
        RVec::from_fn(v.len(), |idx, _| self.selection_diag[idx % self.elements] * v[idx])
    }

    pub fn evaluate(&self, v: &RVec) -> Result<f64> {
        let len = self.elements * self.columns;
        if v.len() != len {
            return Err(Error::DimensionMismatch(alloc::format!("vec(A_a) has {} entries, expected {len}", v.len())));
        }
        let c = v.map(|x| C64::new(x, 0.0));
        let radar = self.r21 + 2.0 * self.r22.dotc(&c).re + c.dotc(&(&self.r23 * &c)).re;
        let penalty = self.r24 + 2.0 * self.r25.dotc(&c).re + c.dotc(&(&self.r26 * &c)).re;
        let selection = self.columns as f64 - v.dot(&self.selection_apply(v));
        Ok(-radar + penalty / (2.0 * self.rho1) + selection / self.rho2)
    }

    pub fn linearize(&self, v_t: &RVec) -> ColumnLinearization {
        let c = v_t.map(|x| C64::new(x, 0.0));
        let radar_grad = &self.r22 + &self.r23 * &c;
        let lambda26 = gram_max_eigenvalue(&self.gains);
        let penalty_grad = &self.r25 + &self.r26 * &c - c.scale(lambda26);
        // Binary entries give vᵀ(I⊗A)v = dᵀv with d the tiled diagonal, so this term is exact.
        let selection_grad = self.selection_apply(&RVec::from_element(v_t.len(), 1.0));
        let q = radar_grad.scale(-2.0) + penalty_grad.unscale(self.rho1)
            - selection_grad.map(|x| C64::new(x / self.rho2, 0.0));
        let cost = RMat::from_fn(self.columns, self.elements, |j, n| q[j * self.elements + n].re);
        ColumnLinearization { radar_grad, penalty_grad, lambda26, selection_grad, cost }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnLinearization {
    /// `r22 + R23 v_t`.
    pub radar_grad: CVec,
    /// `r25 + (R26 − λ I) v_t`.
    pub penalty_grad: CVec,
    pub lambda26: f64,
    /// Diagonal of `I_a ⊗ A`.
    pub selection_grad: RVec,
    /// Linearized cost, row `j` (column of `A_a`) by element `n`.
    pub cost: RMat,
}

pub fn column_coefficients(state: &BlockState) -> Result<ColumnCoefficients> {
    let ch = state.channels;
    let n = ch.elements();
    let cols = state.rdars.columns.len();
    let len = n * cols;
    let users = state.users();
    let scale = state.radar_scale();
    let comp = assemble_composites(ch, state.rdars)?;
    let alpha = state.beamformer.w.dotc(&comp.h4);
    let mut x = Vec::with_capacity(users);
    let mut y = Vec::with_capacity(users);
    for k in 0..users {
        x.push(alpha * dotu(&comp.h4, &state.f1(k)));
        y.push(kron(&state.f2(k), &ch.h_rt) * alpha);
    }
    let echo = EchoAffineParts { x: x.clone(), y: y.clone(), z_left: vec![CVec::zeros(len); users], z_right: CVec::zeros(len) };
    let (r21, r22, r23) = radar_terms(&echo, scale, len);

    let refl = state.rdars.reflection();
    let mut offsets = Vec::with_capacity(users * users);
    let mut gains = Vec::with_capacity(users * users);
    pair_loop(users, |k, i| {
        let f1 = state.f1(i);
        let reflected = dotu(&ch.h_ru[k].component_mul(&refl), &(&ch.h_br * &f1));
        let wk = state.comm_weight(k);
        offsets.push((dotu(&ch.h_bu[k], &f1) + reflected - state.aux[(k, i)]) * wk);
        gains.push(kron(&state.f2(i), &ch.h_ru[k]) * C64::new(wk, 0.0));
    });
    let r24 = offsets.iter().map(|u| u.norm_sqr()).sum();
    let mut r25 = CVec::zeros(len);
    for (e, u) in gains.iter().zip(&offsets) {
        r25 += conj(e) * *u;
    }
    let r26 = outer_conj_sum(&gains, len);
    Ok(ColumnCoefficients {
        elements: n,
        columns: cols,
        rho1: state.rho1,
        rho2: state.rho2,
        selection_diag: state.rdars.selection_diag(),
        x: x.to_vec(),
        y,
        offsets,
        gains,
        r21,
        r22,
        r23,
        r24,
        r25,
        r26,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Phi,
    Mode,
    Columns,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BlockCoefficients {
    Phi(PhiCoefficients),
    Mode(ModeCoefficients),
    Columns(ColumnCoefficients),
}

/// A value of one block variable.
#[derive(Debug, Clone, Copy)]
pub enum BlockVariable<'a> {
    Phi(&'a CVec),
    Mode(&'a RVec),
    Columns(&'a RVec),
}

pub fn build_block_coefficients(block: Block, state: &BlockState) -> Result<BlockCoefficients> {
    Ok(match block {
        Block::Phi => BlockCoefficients::Phi(phi_coefficients(state)),
        Block::Mode => BlockCoefficients::Mode(mode_coefficients(state)),
        Block::Columns => BlockCoefficients::Columns(column_coefficients(state)?),
    })
}

pub fn evaluate_block_objective(variable: BlockVariable, coeffs: &BlockCoefficients) -> Result<f64> {
    match (variable, coeffs) {
        (BlockVariable::Phi(v), BlockCoefficients::Phi(c)) => c.evaluate(v),
        (BlockVariable::Mode(v), BlockCoefficients::Mode(c)) => c.evaluate(v),
        (BlockVariable::Columns(v), BlockCoefficients::Columns(c)) => c.evaluate(v),
        _ => Err(Error::DimensionMismatch("block variable does not match coefficients".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_coefficients_evaluate_to_zero() {
        let c = PhiCoefficients::zeros(3, 2, 1.0);
        let phi = CVec::from_element(3, ONE);
        assert_eq!(c.evaluate(&phi).unwrap(), 0.0);
        let mut c = c;
        c.r1 = 2.0;
        assert_eq!(c.evaluate(&phi).unwrap(), -2.0);
    }

    #[test]
    fn lifted_cap_enforced() {
        let c = PhiCoefficients::zeros(17, 1, 1.0);
        assert!(matches!(c.lifted(), Err(Error::LiftTooLarge { .. })));
    }

    #[test]
    fn variable_block_mismatch() {
        let c = BlockCoefficients::Phi(PhiCoefficients::zeros(2, 1, 1.0));
        let a = RVec::zeros(2);
        assert!(evaluate_block_objective(BlockVariable::Mode(&a), &c).is_err());
    }
}
