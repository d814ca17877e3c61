//! Majorize-minimize updates of the RDARS variables.

use alloc::vec::Vec;

use crate::assignment::min_cost_assignment;
use crate::linalg::{CVec, RVec, C64};
use crate::surrogate::{ColumnCoefficients, ModeCoefficients, PhiCoefficients};

/// Minimizer of `Re{qᴴφ}` over unit-modulus `φ`: `−exp(j arg q)`, or `fallback` where `q = 0`.
pub fn align_unit_modulus(q: &CVec, fallback: &CVec) -> CVec {
    CVec::from_iterator(
        q.len(),
        q.iter().zip(fallback.iter()).map(|(q, p)| if q.norm() > 0.0 { -C64::from_polar(1.0, q.arg()) } else { *p }),
    )
}

pub fn update_reflection(coeffs: &PhiCoefficients, phi_t: &CVec) -> CVec {
    align_unit_modulus(&coeffs.linearize(phi_t).q5, phi_t)
}

/// Indicator of the `count` smallest entries (ties by index).
pub fn smallest_entries(values: &[f64], count: usize) -> Vec<bool> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
    let mut out = alloc::vec![false; values.len()];
    for &i in order.iter().take(count) {
        out[i] = true;
    }
    out
}

/// Connects the `count` elements with the smallest `Re q10`.
pub fn update_mode_selection(coeffs: &ModeCoefficients, a_t: &RVec, count: usize) -> Vec<bool> {
    let q10: Vec<f64> = coeffs.linearize(a_t).q10.iter().map(|z| z.re).collect();
    smallest_entries(&q10, count)
}

/// Assigns each connected column a distinct element by minimum linearized cost.
pub fn update_selection_columns(coeffs: &ColumnCoefficients, v_t: &RVec) -> Vec<usize> {
    min_cost_assignment(&coeffs.linearize(v_t).cost)
}

pub fn mode_vector(connected: &[bool]) -> RVec {
    RVec::from_iterator(connected.len(), connected.iter().map(|&c| if c { 1.0 } else { 0.0 }))
}
