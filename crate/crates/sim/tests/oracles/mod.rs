//! Independent reference computations for the acceptance suite. Nothing here calls the
//! coefficient expansions; echoes and objectives are formed straight from the channels.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rdars_core::channel::{ChannelSet, RdarsState};
use rdars_core::linalg::{dotu, CMat, CVec, C64};
use rdars_core::metrics::Beamformer;
use rdars_core::scenario::{derive_geometry, SystemConfig};
use rdars_core::surrogate::BlockState;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cn(rng: &mut ChaCha8Rng) -> C64 {
    // Box-Muller, unit variance
    let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let v: f64 = rng.gen();
    let r = (-u.ln()).sqrt();
    C64::from_polar(r, std::f64::consts::TAU * v)
}

pub fn cvec(rng: &mut ChaCha8Rng, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| cn(rng))
}

pub fn cmat(rng: &mut ChaCha8Rng, r: usize, c: usize) -> CMat {
    CMat::from_fn(r, c, |_, _| cn(rng))
}

pub fn unit_phases(rng: &mut ChaCha8Rng, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| C64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU)))
}

/// Random binary vector with `count` ones.
pub fn random_mode(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<bool> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let mut out = vec![false; n];
    for &i in idx.iter().take(count) {
        out[i] = true;
    }
    out
}

/// Random distinct rows for `count` columns.
pub fn random_columns(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    idx.truncate(count);
    idx
}

/// All `count`-subsets of `0..n` as indicator vectors.
pub fn all_modes(n: usize, count: usize) -> Vec<Vec<bool>> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize == count {
            out.push((0..n).map(|i| mask >> i & 1 == 1).collect());
        }
    }
    out
}

/// All ordered choices of `count` distinct rows out of `n`.
pub fn all_assignments(n: usize, count: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, count: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == count {
            out.push(cur.clone());
            return;
        }
        for r in 0..n {
            if !cur.contains(&r) {
                cur.push(r);
                rec(n, count, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(n, count, &mut Vec::new(), &mut out);
    out
}

/// A random problem instance with unit-scale channels.
#[derive(Debug, Clone)]
pub struct Instance {
    pub channels: ChannelSet,
    pub beamformer: Beamformer,
    pub aux: CMat,
    pub rdars: RdarsState,
    pub noise: Vec<f64>,
    pub rho1: f64,
    pub rho2: f64,
    pub rcs: f64,
    pub radar_noise: f64,
}

impl Instance {
    /// `m` antennas, `n` elements, `connected` connected elements, `users` users.
    /// The selection diagonal and `A_a` are drawn independently, so `A ≠ A_aA_aᵀ` in general.
    pub fn random(seed: u64, m: usize, n: usize, connected: usize, users: usize) -> Self {
        let mut cfg = SystemConfig { antennas: m, connected: 1, ..SystemConfig::desk() }.with_elements(n).with_users(users);
        cfg.seed = seed;
        let geometry = derive_geometry(&cfg, &cfg.placement).unwrap();
        let mut channels = rdars_core::synthesize_channels(&cfg, &geometry, seed).unwrap();
        let mut r = rng(seed ^ 0x5eed);
        channels.h_br = cmat(&mut r, n, m);
        channels.h_bt = cvec(&mut r, m);
        channels.h_rt = cvec(&mut r, n);
        channels.h_bu = (0..users).map(|_| cvec(&mut r, m)).collect();
        channels.h_ru = (0..users).map(|_| cvec(&mut r, n)).collect();
        let rdars = RdarsState {
            phi: unit_phases(&mut r, n),
            connected: random_mode(&mut r, n, connected),
            columns: random_columns(&mut r, n, connected),
        };
        let f = cmat(&mut r, m + connected, users).scale(0.5);
        let w = cvec(&mut r, m);
        Self {
            channels,
            beamformer: Beamformer { f, w },
            aux: cmat(&mut r, users, users),
            rdars,
            noise: (0..users).map(|_| r.gen_range(0.5..2.0)).collect(),
            rho1: 10f64.powf(r.gen_range(-1.0..1.0)),
            rho2: 10f64.powf(r.gen_range(-1.0..1.0)),
            rcs: r.gen_range(0.5..2.0),
            radar_noise: r.gen_range(0.5..2.0),
        }
    }

    pub fn state(&self) -> BlockState<'_> {
        self.state_with(&self.rdars)
    }

    pub fn state_with<'a>(&'a self, rdars: &'a RdarsState) -> BlockState<'a> {
        BlockState {
            channels: &self.channels,
            beamformer: &self.beamformer,
            aux: &self.aux,
            rdars,
            user_noise: &self.noise,
            rho1: self.rho1,
            rho2: self.rho2,
            rcs_mean_square: self.rcs,
            radar_noise: self.radar_noise,
        }
    }

    pub fn with_phi(&self, phi: CVec) -> RdarsState {
        RdarsState { phi, ..self.rdars.clone() }
    }

    pub fn with_mode(&self, connected: Vec<bool>) -> RdarsState {
        RdarsState { connected, ..self.rdars.clone() }
    }

    pub fn with_columns(&self, columns: Vec<usize>) -> RdarsState {
        RdarsState { columns, ..self.rdars.clone() }
    }
}

/// Effective BS → target channel `h_bt + H_brᵀ(I−A)Φh_rt`, built elementwise.
pub fn target_channel(ch: &ChannelSet, st: &RdarsState) -> CVec {
    let mut h = ch.h_bt.clone();
    for n in 0..ch.elements() {
        if !st.connected[n] {
            let g = st.phi[n] * ch.h_rt[n];
            for m in 0..ch.antennas() {
                h[m] += ch.h_br[(n, m)] * g;
            }
        }
    }
    h
}

/// Composite user channel `[h_bu + H_brᵀ(I−A)Φh_ru; A_aᵀh_ru]`.
pub fn user_channel(ch: &ChannelSet, st: &RdarsState, k: usize) -> CVec {
    let m = ch.antennas();
    let mut h = CVec::zeros(m + st.columns.len());
    for i in 0..m {
        h[i] = ch.h_bu[k][i];
    }
    for n in 0..ch.elements() {
        if !st.connected[n] {
            let g = st.phi[n] * ch.h_ru[k][n];
            for i in 0..m {
                h[i] += ch.h_br[(n, i)] * g;
            }
        }
    }
    for (j, &r) in st.columns.iter().enumerate() {
        h[m + j] = ch.h_ru[k][r];
    }
    h
}

/// Echo of beam `k` after receive filtering: `wᴴ h4 (h4ᵀ f_k1 + h_rtᵀ A_a f_k2)`.
pub fn echoes(ch: &ChannelSet, st: &RdarsState, bf: &Beamformer) -> Vec<C64> {
    let m = ch.antennas();
    let h4 = target_channel(ch, st);
    let alpha = bf.w.dotc(&h4);
    bf.f.column_iter()
        .map(|col| {
            let mut g = C64::new(0.0, 0.0);
            for i in 0..m {
                g += h4[i] * col[i];
            }
            for (j, &r) in st.columns.iter().enumerate() {
                g += ch.h_rt[r] * col[m + j];
            }
            alpha * g
        })
        .collect()
}

/// Radar output SNR from the echoes.
pub fn radar_snr(inst: &Instance, st: &RdarsState, bf: &Beamformer) -> f64 {
    let e: f64 = echoes(&inst.channels, st, bf).iter().map(|z| z.norm_sqr()).sum();
    inst.rcs * e / (inst.radar_noise * bf.w.norm_squared())
}

pub fn comm_penalty(inst: &Instance, st: &RdarsState, bf: &Beamformer) -> f64 {
    let mut total = 0.0;
    for k in 0..inst.noise.len() {
        let h = user_channel(&inst.channels, st, k);
        for (i, col) in bf.f.column_iter().enumerate() {
            total += (dotu(&h, &col.into_owned()) - inst.aux[(k, i)]).norm_sqr() / inst.noise[k];
        }
    }
    total
}

/// `‖A − A_aA_aᵀ‖_F²`.
pub fn selection_penalty(st: &RdarsState) -> f64 {
    let n = st.phi.len();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let a = if i == j && st.connected[i] { 1.0 } else { 0.0 };
            // (A_aA_aᵀ)[i, j] = Σ_c [r_c = i][r_c = j]
            let b = st.columns.iter().filter(|&&r| r == i && r == j).count() as f64;
            total += (a - b) * (a - b);
        }
    }
    total
}

/// Penalized objective with its three parts: `(value, radar, comm/2ρ1, selection/2ρ2)`.
pub fn penalized(inst: &Instance, st: &RdarsState) -> (f64, f64, f64, f64) {
    let bf = &inst.beamformer;
    let radar = radar_snr(inst, st, bf);
    let comm = comm_penalty(inst, st, bf) / (2.0 * inst.rho1);
    let sel = selection_penalty(st) / (2.0 * inst.rho2);
    (-radar + comm + sel, radar, comm, sel)
}

/// Scale used for relative comparisons of penalized objectives.
pub fn magnitude(inst: &Instance, st: &RdarsState) -> f64 {
    let (_, r, c, s) = penalized(inst, st);
    r + c + s
}

/// Radar SNR as a function of the beamformer with `w` held fixed.
pub fn radar_snr_fixed_w(inst: &Instance, st: &RdarsState, f: &CMat) -> f64 {
    radar_snr(inst, st, &Beamformer { f: f.clone(), w: inst.beamformer.w.clone() })
}

/// Real-form `[Re v; Im v]`.
pub fn real_form(v: &CVec) -> Vec<f64> {
    v.iter().map(|z| z.re).chain(v.iter().map(|z| z.im)).collect()
}

pub fn close(a: f64, b: f64, rel: f64, scale: f64) -> bool {
    (a - b).abs() <= rel * scale.max(f64::MIN_POSITIVE)
}

/// Mean and standard error (sample standard deviation over √n).
pub fn mean_se(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn report(name: &str, pass: bool, detail: impl std::fmt::Display) {
    println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
}
