//! Communication SINR, radar output SNR, beampatterns and penalty residuals.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::channel::{ChannelSet, RdarsState};
use crate::error::{Error, Result};
use crate::linalg::{dotu, CMat, CVec};

/// Lowest gain reported by the beampattern functions (dB).
pub const DB_FLOOR: f64 = -120.0;

/// Compound transmit beamformer `F = [F1; F2]` ((M+a)×K) and receive filter `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct Beamformer {
    pub f: CMat,
    pub w: CVec,
}

pub fn to_db(x: f64) -> f64 {
    10.0 * Float::log10(x)
}

fn floored_db(x: f64) -> f64 {
    if x > 0.0 {
        to_db(x).max(DB_FLOOR)
    } else {
        DB_FLOOR
    }
}

/// Per-user SINR (linear) for composite channels `h1` and per-user noise powers.
pub fn user_sinr(h1: &[CVec], f: &CMat, noise: &[f64]) -> Result<Vec<f64>> {
    let k_users = f.ncols();
    if h1.len() != k_users || noise.len() != k_users {
        return Err(Error::DimensionMismatch(alloc::format!(
            "{} channels, {} beams, {} noise powers",
            h1.len(),
            k_users,
            noise.len()
        )));
    }
    let cols: Vec<CVec> = f.column_iter().map(|c| c.into_owned()).collect();
    let mut out = Vec::with_capacity(k_users);
    for (k, h) in h1.iter().enumerate() {
        if h.len() != f.nrows() {
            return Err(Error::DimensionMismatch(alloc::format!(
                "channel length {} vs beamformer rows {}",
                h.len(),
                f.nrows()
            )));
        }
        let mut signal = 0.0;
        let mut interference = 0.0;
        for (i, col) in cols.iter().enumerate() {
            let p = dotu(h, col).norm_sqr();
            if i == k {
                signal = p;
            } else {
                interference += p;
            }
        }
        let denom = interference + noise[k];
        if denom == 0.0 {
            if signal == 0.0 {
                return Err(Error::UndefinedSinr(k));
            }
            out.push(f64::INFINITY);
        } else {
            out.push(signal / denom);
        }
    }
    Ok(out)
}

/// Radar output SNR (linear) `σα² wᴴH2FFᴴH2ᴴw / (σ2² wᴴw)`.
pub fn radar_snr(w: &CVec, h2: &CMat, f: &CMat, rcs_mean_square: f64, radar_noise: f64) -> f64 {
    let echo = h2.adjoint() * w;
    let num = (f.adjoint() * echo).norm_squared();
    rcs_mean_square * num / (radar_noise * w.norm_squared())
}

/// BS transmit pattern `Σ_k |a_ULA(θ)ᵀ f_{k,1}|²` in dB over azimuths `grid`.
pub fn beampattern_bs(f: &CMat, channels: &ChannelSet, grid: &[f64]) -> Result<Vec<f64>> {
    let m = channels.antennas();
    let f1 = f.rows(0, m);
    grid.iter()
        .map(|&theta| {
            let a = channels.layout.ula(theta)?;
            let g: f64 = f1.column_iter().map(|c| dotu(&a, &c.into_owned()).norm_sqr()).sum();
            Ok(floored_db(g))
        })
        .collect()
}

/// Field radiated from the surface aperture per beam: `(I−A)ΦH_br f_{k,1} + A_a f_{k,2}`.
pub fn aperture_excitation(f: &CMat, channels: &ChannelSet, state: &RdarsState) -> Vec<CVec> {
    let m = channels.antennas();
    let refl = state.reflection();
    f.column_iter()
        .map(|col| {
            let f1 = col.rows(0, m).into_owned();
            let mut x = (&channels.h_br * f1).component_mul(&refl);
            for (j, &row) in state.columns.iter().enumerate() {
                x[row] += col[m + j];
            }
            x
        })
        .collect()
}

/// RDARS pattern `Σ_k |a_UPA(θ,ψ)ᵀ x_k|²` in dB over `(θ, ψ)` pairs.
pub fn beampattern_rdars(
    f: &CMat,
    channels: &ChannelSet,
    state: &RdarsState,
    grid: &[(f64, f64)],
) -> Result<Vec<f64>> {
    let x = aperture_excitation(f, channels, state);
    grid.iter()
        .map(|&(theta, psi)| {
            let a = channels.layout.upa(theta, psi)?;
            let g: f64 = x.iter().map(|xk| dotu(&a, xk).norm_sqr()).sum();
            Ok(floored_db(g))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    /// `Σ_{k,i} |h1_kᵀ f_i − s_{k,i}|² / σ_k²`.
    pub comm: f64,
    /// `‖A − A_a A_aᵀ‖_F²`.
    pub selection: f64,
}

pub fn selection_residual(state: &RdarsState) -> f64 {
    let mut mult = vec![0.0; state.elements()];
    for &r in &state.columns {
        mult[r] += 1.0;
    }
    state
        .connected
        .iter()
        .zip(&mult)
        .map(|(&a, &m)| {
            let d = if a { 1.0 } else { 0.0 } - m;
            d * d
        })
        .sum()
}

/// Residuals of the two penalized equality constraints; `s[(k, i)]` pairs with `h1_kᵀ f_i`
/// and the communication part is normalized by each user's noise power.
pub fn penalty_residuals(state: &RdarsState, s: &CMat, h1: &[CVec], f: &CMat, noise: &[f64]) -> Residuals {
    let mut comm = 0.0;
    for (k, h) in h1.iter().enumerate() {
        for (i, col) in f.column_iter().enumerate() {
            comm += (dotu(h, &col.into_owned()) - s[(k, i)]).norm_sqr() / noise[k];
        }
    }
    Residuals { comm, selection: selection_residual(state) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{C64, ONE, ZERO};
    use crate::scenario::{derive_geometry, SystemConfig};
    use crate::channel::synthesize_channels;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cv(v: &[C64]) -> CVec {
        CVec::from_column_slice(v)
    }

    fn random_cvec(rng: &mut ChaCha8Rng, n: usize) -> CVec {
        CVec::from_fn(n, |_, _| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
    }

    #[test]
    fn sinr_hand_examples() {
        let f = CMat::from_column_slice(2, 1, &[C64::new(2.0, 0.0), ZERO]);
        let s = user_sinr(&[cv(&[ONE, ZERO])], &f, &[1.0]).unwrap();
        assert!((s[0] - 4.0).abs() < 1e-15);

        let f = CMat::identity(2, 2);
        let h = cv(&[ONE, ONE]);
        let s = user_sinr(&[h.clone(), h], &f, &[1.0, 1.0]).unwrap();
        assert!((s[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sinr_undefined() {
        let f = CMat::zeros(2, 1);
        assert!(matches!(user_sinr(&[cv(&[ONE, ZERO])], &f, &[0.0]), Err(Error::UndefinedSinr(0))));
    }

    #[test]
    fn sinr_phase_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h: Vec<CVec> = (0..3).map(|_| random_cvec(&mut rng, 5)).collect();
        let f = CMat::from_fn(5, 3, |_, _| C64::new(rng.gen(), rng.gen()));
        let mut g = f.clone();
        g.column_mut(1).scale_mut(1.0);
        let rot = C64::from_polar(1.0, 1.234);
        for x in g.column_mut(1).iter_mut() {
            *x *= rot;
        }
        let a = user_sinr(&h, &f, &[0.1, 0.2, 0.3]).unwrap();
        let b = user_sinr(&h, &g, &[0.1, 0.2, 0.3]).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12 * x);
        }
    }

    #[test]
    fn radar_unit_case_and_scale() {
        let w = cv(&[ONE, ZERO]);
        let i2 = CMat::identity(2, 2);
        assert!((radar_snr(&w, &i2, &i2, 1.0, 1.0) - 1.0).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let h2 = CMat::from_fn(3, 4, |_, _| C64::new(rng.gen(), rng.gen()));
        let f = CMat::from_fn(4, 2, |_, _| C64::new(rng.gen(), rng.gen()));
        let w = random_cvec(&mut rng, 3);
        let a = radar_snr(&w, &h2, &f, 2.0, 0.5);
        let b = radar_snr(&w.scale(5.0), &h2, &f, 2.0, 0.5);
        assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn matched_beam_peaks_at_angle() {
        let cfg = SystemConfig::desk();
        let g = derive_geometry(&cfg, &cfg.placement).unwrap();
        let ch = synthesize_channels(&cfg, &g, 0).unwrap();
        let m = cfg.antennas;
        let theta0 = 0.4;
        let a0 = ch.layout.ula(theta0).unwrap();
        let mut f = CMat::zeros(m + cfg.connected, 1);
        for i in 0..m {
            f[(i, 0)] = a0[i].conj() / (m as f64).sqrt();
        }
        let grid: Vec<f64> = (0..=400).map(|i| -1.2 + 2.4 * i as f64 / 400.0).collect();
        let gains = beampattern_bs(&f, &ch, &grid).unwrap();
        let peak = beampattern_bs(&f, &ch, &[theta0]).unwrap()[0];
        assert!((peak - to_db(m as f64)).abs() < 1e-10);
        assert!(gains.iter().all(|&g| g <= peak + 1e-10));

        let zero = CMat::zeros(m + cfg.connected, 2);
        assert!(beampattern_bs(&zero, &ch, &grid).unwrap().iter().all(|&g| g == DB_FLOOR));
    }

    #[test]
    fn residual_examples() {
        let state = RdarsState { phi: cv(&[ONE, ONE]), connected: vec![true, false], columns: vec![1] };
        assert_eq!(selection_residual(&state), 2.0);
        let state = RdarsState { phi: cv(&[ONE, ONE, ONE]), connected: vec![false, true, true], columns: vec![2, 1] };
        assert_eq!(selection_residual(&state), 0.0);

        let h1 = vec![cv(&[ONE, C64::new(0.0, 2.0)])];
        let f = CMat::from_column_slice(2, 1, &[C64::new(1.0, 1.0), C64::new(3.0, 0.0)]);
        let s = CMat::from_element(1, 1, dotu(&h1[0], &f.column(0).into_owned()));
        assert_eq!(penalty_residuals(&state, &s, &h1, &f, &[2.0]).comm, 0.0);
    }
}
