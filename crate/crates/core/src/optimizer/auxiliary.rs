//! Auxiliary-variable update: projection of `h1_kᵀ f_i` onto the SINR constraint set.

use alloc::vec::Vec;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{dotu, CMat, CVec};

/// Auxiliary variables `s[(k, i)]` and the per-user duals `μ_k ∈ [0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliaryState {
    pub s: CMat,
    pub mu: Vec<f64>,
}

/// `f_μ(μ) = γ(Σ_{i≠k}|b_i|²/(1+μγ)² + σ²) − |b_k|²/(1−μ)²`, decreasing on [0, 1).
pub fn dual_function(b: &[f64], k: usize, threshold: f64, noise: f64, mu: f64) -> f64 {
    let interference: f64 = b.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, p)| p).sum();
    threshold * (interference / Float::powi(1.0 + mu * threshold, 2) + noise) - b[k] / Float::powi(1.0 - mu, 2)
}

/// Per user, the closest `s_k` (in `Σ_i |h1_kᵀ f_i − s_{k,i}|²`) meeting its SINR target.
pub fn update_auxiliary(h1: &[CVec], f: &CMat, thresholds: &[f64], noise_powers: &[f64]) -> Result<AuxiliaryState> {
    let users = h1.len();
    let mut s = CMat::zeros(users, f.ncols());
    let mut mu = Vec::with_capacity(users);
    for (k, h) in h1.iter().enumerate() {
        let b: Vec<_> = f.column_iter().map(|c| dotu(h, &c.into_owned())).collect();
        let power: Vec<f64> = b.iter().map(|z| z.norm_sqr()).collect();
        let gamma = thresholds[k];
        let noise = noise_powers[k];
        let slack = dual_function(&power, k, gamma, noise, 0.0);
        if gamma <= 0.0 || slack <= 0.0 {
            for (i, z) in b.iter().enumerate() {
                s[(k, i)] = *z;
            }
            mu.push(0.0);
            continue;
        }
        if power[k] == 0.0 {
            return Err(Error::UserInfeasible(k));
        }
        let reference = gamma * (power.iter().sum::<f64>() + noise) + power[k];
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        // f(lo) > 0 ≥ f(hi); hi stays on the feasible side.
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let v = dual_function(&power, k, gamma, noise, mid);
            if v > 0.0 {
                lo = mid;
            } else {
                hi = mid;
                if v.abs() <= 1e-13 * reference {
                    break;
                }
            }
        }
        let m = hi;
        for (i, z) in b.iter().enumerate() {
            s[(k, i)] = if i == k { z / (1.0 - m) } else { z / (1.0 + m * gamma) };
        }
        mu.push(m);
    }
    Ok(AuxiliaryState { s, mu })
}
